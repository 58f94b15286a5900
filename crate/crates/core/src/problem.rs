use crate::error::{Error, Result};
use crate::graph::{Graph, NodeField};

/// One instance of ∂ₜu = Δu − a(u − ū) + |u|^{p−1}u on a graph.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub graph: Graph,
    /// Potential (controller gain), nonnegative.
    pub a: NodeField,
    /// Exponent, p > 1.
    pub p: f64,
    pub u0: NodeField,
    /// Equilibrium offset; the theory covers ū = 0 only.
    pub ubar: f64,
}

impl ProblemSpec {
    pub fn new(graph: Graph, a: NodeField, p: f64, u0: NodeField) -> Result<Self> {
        Self::with_offset(graph, a, p, u0, 0.0)
    }

    pub fn with_offset(
        graph: Graph,
        a: NodeField,
        p: f64,
        u0: NodeField,
        ubar: f64,
    ) -> Result<Self> {
        graph.check(&a)?;
        graph.check(&u0)?;
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "exponent p = {p} must be > 1"
            )));
        }
        if let Some(i) = a
            .values()
            .iter()
            .position(|&v| !(v >= 0.0) || !v.is_finite())
        {
            return Err(Error::InvalidArgument(format!(
                "potential a must be nonnegative, got {} at node `{}`",
                a.values()[i],
                graph.ids()[i]
            )));
        }
        if !u0.values().iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument("initial data must be finite".into()));
        }
        if !ubar.is_finite() {
            return Err(Error::InvalidArgument("ubar must be finite".into()));
        }
        Ok(ProblemSpec {
            graph,
            a,
            p,
            u0,
            ubar,
        })
    }

    /// Same instance with different initial data.
    pub fn with_u0(&self, u0: NodeField) -> Result<Self> {
        Self::with_offset(self.graph.clone(), self.a.clone(), self.p, u0, self.ubar)
    }

    pub fn a_max(&self) -> f64 {
        self.a.max()
    }

    pub fn a_is_zero(&self) -> bool {
        self.a.is_zero()
    }

    pub(crate) fn require_nonzero_a(&self) -> Result<()> {
        if self.a_is_zero() {
            Err(Error::InvalidArgument(
                "this quantity requires a potential a that is not identically zero".into(),
            ))
        } else {
            Ok(())
        }
    }

    pub fn u0_nonnegative(&self) -> bool {
        self.u0.values().iter().all(|&v| v >= 0.0)
    }
}
