//! Ready-made scenarios on a 25-node hub network.
//!
//! The reference network for these scenarios has 25 nodes but no known
//! adjacency. [`stand_in_g25`] is a substitute with the same node count, unit
//! measures and unit weights: hub `x1` joined to spokes `x2..x9`, the spokes
//! joined in a ring, and two leaves hanging off each spoke. Quantities that do
//! not depend on the edges (masses, norms, the mass-criterion bound) match the
//! reference values. λ_a, Λ and the trajectories are specific to this stand-in.

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeField};
use crate::problem::ProblemSpec;

/// Reference first eigenvalue for the original network. Not reproducible here.
pub const G25_REFERENCE_LAMBDA_A: f64 = 1.9116;
/// Reference ε₀ for the decay scenario (computed from [`G25_REFERENCE_LAMBDA_A`]).
pub const G25_REFERENCE_EPSILON0: f64 = 0.0365;
/// Reference ∥u₀∥₂ for the decay scenario.
pub const G25_REFERENCE_DECAY_L2: f64 = 0.0304;
/// Reference c₁, ∫u₀dμ and mass-criterion bound for the blow-up scenario.
pub const G25_REFERENCE_C1: f64 = 35.3553;
pub const G25_REFERENCE_BLOWUP_MASS: f64 = 36.5;
pub const G25_REFERENCE_MASS_BOUND: f64 = 0.6962;

const SPOKES: usize = 8;

/// Stand-in 25-node topology (see module docs).
pub fn stand_in_g25() -> Graph {
    let mut edges = Vec::with_capacity(40);
    for s in 1..=SPOKES {
        edges.push((0, s));
        edges.push((s, s % SPOKES + 1));
    }
    let mut leaf = SPOKES + 1;
    for s in 1..=SPOKES {
        edges.push((s, leaf));
        edges.push((s, leaf + 1));
        leaf += 2;
    }
    Graph::unweighted(leaf, &edges).expect("stand-in topology is valid")
}

/// a = 0 at the hub (first node), `gain` elsewhere.
pub fn hub_potential(g: &Graph, gain: f64) -> NodeField {
    let mut a = NodeField::constant(g, gain);
    a.values_mut()[0] = 0.0;
    a
}

/// `hub` at the first node, `rest` elsewhere.
pub fn hub_data(g: &Graph, hub: f64, rest: f64) -> NodeField {
    let mut u = NodeField::constant(g, rest);
    u.values_mut()[0] = hub;
    u
}

/// Named initial-data pattern usable on any graph; the hub is the first node.
pub fn named_u0(g: &Graph, name: &str) -> Result<NodeField> {
    match name {
        "hub-decay" => Ok(hub_data(g, 0.03, 0.001)),
        "hub-blowup" => Ok(hub_data(g, 0.5, 1.5)),
        _ => Err(Error::InvalidArgument(format!(
            "unknown initial-data preset `{name}` (expected hub-decay or hub-blowup)"
        ))),
    }
}

/// p = 2, small data: expected to decay.
pub fn g25_decay() -> ProblemSpec {
    let g = stand_in_g25();
    let a = hub_potential(&g, 2.0);
    let u0 = named_u0(&g, "hub-decay").unwrap();
    ProblemSpec::new(g, a, 2.0, u0).unwrap()
}

/// p = 3, large data: expected to blow up.
pub fn g25_blowup() -> ProblemSpec {
    let g = stand_in_g25();
    let a = hub_potential(&g, 2.0);
    let u0 = named_u0(&g, "hub-blowup").unwrap();
    ProblemSpec::new(g, a, 3.0, u0).unwrap()
}

fn one_node(a: f64, p: f64, u0: f64) -> ProblemSpec {
    let g = Graph::unweighted(1, &[]).unwrap();
    ProblemSpec::new(g, vec![a].into(), p, vec![u0].into()).unwrap()
}

/// A single-node case with its closed-form solution.
#[derive(Debug, Clone)]
pub struct SingleNodeCase {
    pub name: &'static str,
    pub problem: ProblemSpec,
    /// Exact blow-up time, or `None` when the solution decays.
    pub exact_blowup: Option<f64>,
}

impl SingleNodeCase {
    /// Exact u(t) while it exists.
    pub fn exact(&self, t: f64) -> f64 {
        let ps = &self.problem;
        let (a, p, u0) = (ps.a.values()[0], ps.p, ps.u0.values()[0]);
        if a == 0.0 {
            // u' = u^p
            return (u0.powf(1.0 - p) - (p - 1.0) * t).powf(-1.0 / (p - 1.0));
        }
        // Bernoulli: v = u^{1−p} solves v' = (p−1)(a v − 1)
        let v0 = u0.powf(1.0 - p);
        let v = 1.0 / a + (v0 - 1.0 / a) * ((p - 1.0) * a * t).exp();
        v.powf(-1.0 / (p - 1.0))
    }
}

/// Closed-form single-node checks: logistic decay, u′ = u², u′ = u³ − u.
pub fn single_node_suite() -> Vec<SingleNodeCase> {
    vec![
        SingleNodeCase {
            name: "logistic-decay",
            problem: one_node(1.0, 2.0, 0.5),
            exact_blowup: None,
        },
        SingleNodeCase {
            name: "quadratic-blowup",
            problem: one_node(0.0, 2.0, 1.0),
            exact_blowup: Some(1.0),
        },
        SingleNodeCase {
            name: "cubic-blowup",
            problem: one_node(1.0, 3.0, 2.0),
            exact_blowup: Some(0.5 * (4.0f64 / 3.0).ln()),
        },
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    G25Decay,
    G25Blowup,
    SingleNodeSuite,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::G25Decay, Preset::G25Blowup, Preset::SingleNodeSuite];

    pub fn name(self) -> &'static str {
        match self {
            Preset::G25Decay => "g25-decay",
            Preset::G25Blowup => "g25-blowup",
            Preset::SingleNodeSuite => "single-node-suite",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown preset `{name}` (expected g25-decay, g25-blowup or single-node-suite)"
                ))
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stand_in_shape() {
        let g = stand_in_g25();
        assert_eq!(g.len(), 25);
        assert_eq!(g.edges().len(), 32);
        assert_eq!(g.degree(0), 8.0);
        assert_eq!(g.volume(), 25.0);
    }

    #[test]
    fn scenario_data() {
        let d = g25_decay();
        let l2 = d.graph.lp_norm(&d.u0, 2.0).unwrap();
        assert!((l2 - 0.000924f64.sqrt()).abs() < 1e-15);
        let b = g25_blowup();
        assert_eq!(b.graph.integral(&b.u0).unwrap(), 36.5);
        assert_eq!(b.a_max(), 2.0);
    }

    #[test]
    fn single_node_exact_solutions() {
        let suite = single_node_suite();
        let logistic = &suite[0];
        for t in [0.0, 1.0, 3.0] {
            assert!((logistic.exact(t) - 1.0 / (1.0 + f64::exp(t))).abs() < 1e-14);
        }
        assert!((suite[1].exact(0.5) - 2.0).abs() < 1e-14);
        let cubic = &suite[2];
        let t = cubic.exact_blowup.unwrap();
        assert!(cubic.exact(t * (1.0 - 1e-9)) > 1e3);
    }

    #[test]
    fn preset_names() {
        for p in Preset::ALL {
            assert_eq!(Preset::from_name(p.name()).unwrap(), p);
        }
        assert!(Preset::from_name("g26").is_err());
        assert!(named_u0(&stand_in_g25(), "nope").is_err());
    }
}
