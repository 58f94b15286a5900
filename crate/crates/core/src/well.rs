//! Energy and Nehari functionals, the embedding constant Λ, the potential-well
//! depth r and classification of initial data.
//!
//! With E(u) = ∥u∥²_{1,a} = ∫(|∇u|² + au²) dμ and P(u) = ∫|u|^{p+1} dμ:
//!
//! ```text
//! J(u) = E/2 − P/(p+1)        N(u) = E − P
//! Λ    = inf E / P^{2/(p+1)}  r    = (p−1)/(2(p+1)) Λ^{(p+1)/(p−1)}
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::NodeField;
use crate::linalg::Cholesky;
use crate::problem::ProblemSpec;
use crate::spectral::quadratic_form;

pub const DEFAULT_LAMBDA_TOL: f64 = 1e-10;
pub const DEFAULT_SEEDS: usize = 16;
/// Base seed for the restart directions of the Λ minimizer.
pub const LAMBDA_SEED: u64 = 0x5EED_1A4B;

const MAX_DESCENT_ITERS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    InWell,
    Exterior,
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WellReport {
    #[serde(rename = "J0")]
    pub j0: f64,
    #[serde(rename = "N0")]
    pub n0: f64,
    #[serde(rename = "Lambda")]
    pub lambda: f64,
    #[serde(rename = "r")]
    pub depth_r: f64,
    pub norm_1a: f64,
    pub classification: Classification,
}

/// Result of the Λ minimization: the best quotient and the point attaining it,
/// normalized to ∥u∥_{p+1} = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaMin {
    pub lambda: f64,
    pub minimizer: NodeField,
}

fn power_integral(ps: &ProblemSpec, u: &[f64]) -> f64 {
    let q = ps.p + 1.0;
    u.iter()
        .zip(ps.graph.measure())
        .map(|(v, m)| m * v.abs().powf(q))
        .sum()
}

fn energy_parts(ps: &ProblemSpec, u: &NodeField) -> Result<(f64, f64)> {
    ps.graph.check(u)?;
    Ok((
        quadratic_form(&ps.graph, ps.a.values(), u.values()),
        power_integral(ps, u.values()),
    ))
}

/// J(u) = ½∫(|∇u|² + au²) dμ − (1/(p+1))∫|u|^{p+1} dμ.
pub fn energy_j(ps: &ProblemSpec, u: &NodeField) -> Result<f64> {
    let (e, p) = energy_parts(ps, u)?;
    Ok(0.5 * e - p / (ps.p + 1.0))
}

/// N(u) = ∫(|∇u|² + au²) dμ − ∫|u|^{p+1} dμ.
pub fn nehari_n(ps: &ProblemSpec, u: &NodeField) -> Result<f64> {
    let (e, p) = energy_parts(ps, u)?;
    Ok(e - p)
}

pub fn norm_1a(ps: &ProblemSpec, u: &NodeField) -> Result<f64> {
    Ok(energy_parts(ps, u)?.0.sqrt())
}

/// The s > 0 with N(s·u) = 0: s = (∥u∥²_{1,a} / ∥u∥_{p+1}^{p+1})^{1/(p−1)}.
pub fn nehari_scale(ps: &ProblemSpec, u: &NodeField) -> Result<f64> {
    let (e, p) = energy_parts(ps, u)?;
    if p == 0.0 {
        return Err(Error::InvalidArgument(
            "Nehari scale of the zero field".into(),
        ));
    }
    Ok((e / p).powf(1.0 / (ps.p - 1.0)))
}

/// The scale-invariant quotient ∥u∥²_{1,a} / ∥u∥²_{p+1}.
pub fn sobolev_quotient(ps: &ProblemSpec, u: &NodeField) -> Result<f64> {
    let (e, p) = energy_parts(ps, u)?;
    if p == 0.0 {
        return Err(Error::InvalidArgument("quotient of the zero field".into()));
    }
    Ok(e / p.powf(2.0 / (ps.p + 1.0)))
}

/// Λ = inf ∥u∥²_{1,a}/∥u∥²_{p+1}, by preconditioned descent on the log-quotient
/// over the unit ∥·∥_{p+1} sphere with `seeds` restarts.
pub fn lambda_constant(ps: &ProblemSpec, tol: f64, seeds: usize) -> Result<LambdaMin> {
    lambda_constant_seeded(ps, tol, seeds, LAMBDA_SEED)
}

/// [`lambda_constant`] with an explicit base seed for the random restarts.
pub fn lambda_constant_seeded(
    ps: &ProblemSpec,
    tol: f64,
    seeds: usize,
    seed: u64,
) -> Result<LambdaMin> {
    ps.require_nonzero_a()?;
    let g = &ps.graph;
    let n = g.len();
    let mu = g.measure();

    // A = K + diag(μa), so that E(u) = uᵀAu
    let mut a_mat = vec![0.0; n * n];
    for i in 0..n {
        a_mat[i * n + i] = g.degree(i) + mu[i] * ps.a.values()[i];
    }
    for &(i, j, w) in g.edges() {
        a_mat[i * n + j] -= w;
        a_mat[j * n + i] -= w;
    }
    let chol = Cholesky::new(&a_mat, n)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<LambdaMin> = None;
    let mut failures = 0;
    for k in 0..seeds.max(1) {
        let start: Vec<f64> = if k == 0 {
            vec![1.0; n]
        } else {
            (0..n).map(|_| rng.gen_range(0.05..1.0)).collect()
        };
        match descend(ps, &a_mat, &chol, start, tol) {
            Some(found) => {
                if best.as_ref().is_none_or(|b| found.lambda < b.lambda) {
                    best = Some(found);
                }
            }
            None => failures += 1,
        }
    }
    best.ok_or_else(|| {
        Error::NoConvergence(format!(
            "Lambda minimizer failed on all {failures} restarts"
        ))
    })
}

fn normalize(ps: &ProblemSpec, u: &mut [f64]) {
    let s = power_integral(ps, u).powf(1.0 / (ps.p + 1.0));
    for v in u.iter_mut() {
        *v /= s;
    }
}

fn mat_vec(a: &[f64], x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|i| (0..n).map(|j| a[i * n + j] * x[j]).sum())
        .collect()
}

fn descend(
    ps: &ProblemSpec,
    a_mat: &[f64],
    chol: &Cholesky,
    mut u: Vec<f64>,
    tol: f64,
) -> Option<LambdaMin> {
    let mu = ps.graph.measure();
    let q = ps.p + 1.0;
    let objective = |u: &[f64]| -> f64 {
        let e = quadratic_form(&ps.graph, ps.a.values(), u);
        e.ln() - (2.0 / q) * power_integral(ps, u).ln()
    };

    normalize(ps, &mut u);
    let mut f = objective(&u);
    for _ in 0..MAX_DESCENT_ITERS {
        let au = mat_vec(a_mat, &u);
        let e: f64 = u.iter().zip(&au).map(|(x, y)| x * y).sum();
        let pw = power_integral(ps, &u);
        let grad: Vec<f64> = u
            .iter()
            .zip(&au)
            .zip(mu)
            .map(|((x, ax), m)| 2.0 * ax / e - 2.0 * m * x.abs().powf(ps.p - 1.0) * x / pw)
            .collect();
        let dir: Vec<f64> = chol.solve(&grad).into_iter().map(|v| -v).collect();
        let slope: f64 = grad.iter().zip(&dir).map(|(g, d)| g * d).sum();
        if -slope < tol {
            return Some(LambdaMin {
                lambda: f.exp(),
                minimizer: NodeField::new(u),
            });
        }

        // step E/2 is one nonlinear inverse iteration; backtrack from there
        let mut step = 0.5 * e;
        let mut accepted = false;
        for _ in 0..60 {
            let mut trial: Vec<f64> = u.iter().zip(&dir).map(|(x, d)| x + step * d).collect();
            if trial.iter().any(|v| *v != 0.0) {
                normalize(ps, &mut trial);
                let ft = objective(&trial);
                if ft.is_finite() && ft <= f + 1e-4 * step * slope {
                    u = trial;
                    f = ft;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            // no further decrease representable: accept if already flat to roundoff
            return if -slope < tol.max(1e-12) * 1e3 {
                Some(LambdaMin {
                    lambda: f.exp(),
                    minimizer: NodeField::new(u),
                })
            } else {
                None
            };
        }
    }
    None
}

/// r = ((p−1)/(2(p+1))) Λ^{(p+1)/(p−1)}.
pub fn depth_from_lambda(lambda: f64, p: f64) -> f64 {
    (p - 1.0) / (2.0 * (p + 1.0)) * lambda.powf((p + 1.0) / (p - 1.0))
}

pub fn well_depth(ps: &ProblemSpec, tol: f64) -> Result<f64> {
    let min = lambda_constant(ps, tol, DEFAULT_SEEDS)?;
    Ok(depth_from_lambda(min.lambda, ps.p))
}

/// Lower bound r − ε/(p+1) for inf{J(u) : N(u) = −ε}.
pub fn depth_shift(r: f64, p: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps = {eps} must be > 0")));
    }
    Ok(r - eps / (p + 1.0))
}

pub fn classify(ps: &ProblemSpec) -> Result<WellReport> {
    classify_with(ps, DEFAULT_LAMBDA_TOL, DEFAULT_SEEDS)
}

pub fn classify_with(ps: &ProblemSpec, tol: f64, seeds: usize) -> Result<WellReport> {
    classify_seeded(ps, tol, seeds, LAMBDA_SEED)
}

pub fn classify_seeded(ps: &ProblemSpec, tol: f64, seeds: usize, seed: u64) -> Result<WellReport> {
    if ps.ubar != 0.0 {
        return Err(Error::InvalidArgument(
            "potential-well classification requires ubar = 0".into(),
        ));
    }
    let min = lambda_constant_seeded(ps, tol, seeds, seed)?;
    let depth_r = depth_from_lambda(min.lambda, ps.p);
    Ok(classify_against(ps, &ps.u0, min.lambda, depth_r))
}

/// Classifies `u` against a precomputed Λ and r.
pub fn classify_against(ps: &ProblemSpec, u: &NodeField, lambda: f64, depth_r: f64) -> WellReport {
    let (e, p) = (
        quadratic_form(&ps.graph, ps.a.values(), u.values()),
        power_integral(ps, u.values()),
    );
    let j0 = 0.5 * e - p / (ps.p + 1.0);
    let n0 = e - p;
    let classification = if u.is_zero() || (j0 < depth_r && n0 > 0.0) {
        Classification::InWell
    } else if j0 < depth_r && n0 < 0.0 {
        Classification::Exterior
    } else {
        Classification::Indeterminate
    };
    WellReport {
        j0,
        n0,
        lambda,
        depth_r,
        norm_1a: e.sqrt(),
        classification,
    }
}
