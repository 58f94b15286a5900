//! Principal eigenpair of −Δ + a and the small-data decay thresholds built on it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeField};
use crate::linalg::sym_eigen;

pub const DEFAULT_EIGEN_TOL: f64 = 1e-10;

/// First eigenvalue λ_a and positive eigenfunction φ of −Δ + a, with ∫φ² dμ = 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub lambda_a: f64,
    pub phi: NodeField,
    /// ∥−Δφ + aφ − λ_a φ∥_∞ of the returned pair.
    pub residual: f64,
}

impl EigenPair {
    pub fn phi_min(&self) -> f64 {
        self.phi.min()
    }

    pub fn phi_max(&self) -> f64 {
        self.phi.max()
    }
}

fn check_potential(g: &Graph, a: &NodeField) -> Result<()> {
    g.check(a)?;
    if let Some(i) = a.values().iter().position(|&v| !(v >= 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "potential must be nonnegative, got {} at node `{}`",
            a.values()[i],
            g.ids()[i]
        )));
    }
    Ok(())
}

/// ∫(|∇u|² + au²) dμ / ∫u² dμ.
pub fn rayleigh_quotient(g: &Graph, a: &NodeField, u: &NodeField) -> Result<f64> {
    g.check(a)?;
    g.check(u)?;
    let mass = g.integral_raw(&u.mul(u).into_values());
    if mass == 0.0 {
        return Err(Error::InvalidArgument(
            "Rayleigh quotient of the zero field".into(),
        ));
    }
    Ok(quadratic_form(g, a.values(), u.values()) / mass)
}

/// ∥u∥²_{1,a} = ∫(|∇u|² + au²) dμ.
pub(crate) fn quadratic_form(g: &Graph, a: &[f64], u: &[f64]) -> f64 {
    let potential: f64 = u
        .iter()
        .zip(a)
        .zip(g.measure())
        .map(|((x, ax), m)| m * ax * x * x)
        .sum();
    g.dirichlet_raw(u) + potential
}

/// Symmetric matrix D^{-1/2}(K + D_a)D^{-1/2}, row-major, where K is the
/// combinatorial weighted Laplacian, D = diag(μ), D_a = diag(μa).
pub fn symmetrized_operator(g: &Graph, a: &NodeField) -> Vec<f64> {
    let n = g.len();
    let mu = g.measure();
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = (g.degree(i) + mu[i] * a.values()[i]) / mu[i];
    }
    for &(i, j, w) in g.edges() {
        let v = -w / (mu[i] * mu[j]).sqrt();
        m[i * n + j] = v;
        m[j * n + i] = v;
    }
    m
}

/// ∥−Δφ + aφ − λφ∥_∞.
pub fn eigen_residual(g: &Graph, a: &NodeField, lambda: f64, phi: &NodeField) -> Result<f64> {
    let lphi = g.laplacian(phi)?;
    Ok(lphi
        .values()
        .iter()
        .zip(phi.values())
        .zip(a.values())
        .map(|((l, f), av)| (-l + av * f - lambda * f).abs())
        .fold(0.0, f64::max))
}

/// Smallest eigenvalue of −Δ + a with its eigenfunction, sign-normalized so
/// that φ is positive at the first node and ∫φ² dμ = 1.
///
/// With a ≡ 0 the result is λ_a = 0 and φ constant; callers needing λ_a > 0
/// must check the potential themselves.
pub fn principal_eigenpair(g: &Graph, a: &NodeField, tol: f64) -> Result<EigenPair> {
    check_potential(g, a)?;
    let n = g.len();
    let eig = sym_eigen(&symmetrized_operator(g, a), n)?;
    let lambda_a = eig.values[0];
    let y = eig.vector(0);
    let mut phi: Vec<f64> = y
        .iter()
        .zip(g.measure())
        .map(|(v, m)| v / m.sqrt())
        .collect();
    let norm = g.lp_norm_raw(&phi, 2.0);
    let sign = if phi[0] < 0.0 { -1.0 } else { 1.0 };
    for v in &mut phi {
        *v *= sign / norm;
    }
    let phi = NodeField::new(phi);

    if let Some(i) = phi.values().iter().position(|&v| !(v > 0.0)) {
        return Err(Error::NoConvergence(format!(
            "principal eigenfunction not positive at node `{}` ({})",
            g.ids()[i],
            phi.values()[i]
        )));
    }
    let residual = eigen_residual(g, a, lambda_a, &phi)?;
    if residual > tol * lambda_a.abs().max(1.0) {
        return Err(Error::NoConvergence(format!(
            "eigen-residual {residual:e} exceeds tolerance {tol:e}"
        )));
    }
    Ok(EigenPair {
        lambda_a,
        phi,
        residual,
    })
}

/// Constructive constants (δ, C) for uniform small-data decay at rate σ:
/// δ = (λ_a − σ)^{1/(p−1)} min φ / (2 max φ), C = 2 max φ / min φ.
pub fn small_data_threshold(pair: &EigenPair, p: f64, sigma: f64) -> Result<(f64, f64)> {
    if !(p > 1.0) {
        return Err(Error::InvalidArgument(format!(
            "exponent p = {p} must be > 1"
        )));
    }
    if !(sigma > 0.0 && sigma < pair.lambda_a) {
        return Err(Error::InvalidArgument(format!(
            "decay rate sigma = {sigma} must lie in (0, {})",
            pair.lambda_a
        )));
    }
    let ratio = pair.phi_min() / pair.phi_max();
    let delta = (pair.lambda_a - sigma).powf(1.0 / (p - 1.0)) * ratio / 2.0;
    Ok((delta, 2.0 / ratio))
}

/// L² smallness threshold ε₀ = (λ_a² μ_min^{p+1} / (4|V|))^{1/(p−1)}, with
/// |V| the total measure of `g`.
pub fn l2_threshold_epsilon0(g: &Graph, lambda_a: f64, p: f64) -> Result<f64> {
    epsilon0(lambda_a, p, g.mu_min(), g.volume())
}

pub fn epsilon0(lambda_a: f64, p: f64, mu_min: f64, volume: f64) -> Result<f64> {
    if !(lambda_a > 0.0) || !(p > 1.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon0 needs lambda_a > 0 and p > 1 (got {lambda_a}, {p})"
        )));
    }
    Ok((lambda_a * lambda_a * mu_min.powf(p + 1.0) / (4.0 * volume)).powf(1.0 / (p - 1.0)))
}
