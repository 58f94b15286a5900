//! Closed-form blow-up criteria, upper bounds on the blow-up time, and the
//! blow-up-rate fit.
//!
//! All criteria assume ū = 0 and u₀ ≥ 0; otherwise they report not applicable
//! with a note. |V| is the total measure Σμ(x) throughout.

use serde::{Deserialize, Serialize};

use crate::dynamics::{Status, Trajectory};
use crate::error::{Error, Result};
use crate::graph::NodeField;
use crate::problem::ProblemSpec;
use crate::spectral::{
    epsilon0, principal_eigenpair, small_data_threshold, EigenPair, DEFAULT_EIGEN_TOL,
};
use crate::well::{self, WellReport};

/// Outcome of one blow-up criterion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub applicable: bool,
    /// The criterion's cutoff (c₁, c₂, c₃, or 0 for the equilibrium test).
    pub threshold: Option<f64>,
    /// The quantity compared against the cutoff.
    pub witness: Option<f64>,
    /// Upper bound on T_max when applicable.
    pub t_bound: Option<f64>,
    pub note: Option<String>,
}

impl BoundResult {
    fn not_applicable(note: impl Into<String>) -> Self {
        BoundResult {
            applicable: false,
            threshold: None,
            witness: None,
            t_bound: None,
            note: Some(note.into()),
        }
    }

    fn gated(threshold: f64, witness: f64) -> Self {
        BoundResult {
            applicable: false,
            threshold: Some(threshold),
            witness: Some(witness),
            t_bound: None,
            note: None,
        }
    }
}

fn common_gate(ps: &ProblemSpec) -> Option<BoundResult> {
    if ps.ubar != 0.0 {
        Some(BoundResult::not_applicable("requires ubar = 0"))
    } else if !ps.u0_nonnegative() {
        Some(BoundResult::not_applicable("requires u0 >= 0"))
    } else {
        None
    }
}

/// log(1/(1 − x)) for 0 < x < 1, accurate when x is near 0 or 1.
fn log_inv_one_minus(x: f64) -> f64 {
    -(-x).ln_1p()
}

/// Mass criterion: ∫u₀dμ > c₁ = (max a)^{1/(p−1)}|V| gives
/// T ≤ log(1/(1 − |V|^{p−1}(max a)(∫u₀dμ)^{1−p})) / ((p−1) max a).
///
/// With max a = 0 the a → 0 limit T ≤ (∫u₀dμ)^{1−p}|V|^{p−1}/(p−1) is used.
pub fn criterion_mass(ps: &ProblemSpec) -> BoundResult {
    if let Some(r) = common_gate(ps) {
        return r;
    }
    let p = ps.p;
    let vol = ps.graph.volume();
    let mass = ps.graph.integral_raw(ps.u0.values());
    let a0 = ps.a_max();
    if a0 == 0.0 {
        if mass > 0.0 {
            return BoundResult {
                applicable: true,
                threshold: Some(0.0),
                witness: Some(mass),
                t_bound: Some(mass.powf(1.0 - p) * vol.powf(p - 1.0) / (p - 1.0)),
                note: Some("max a = 0: limiting form of the mass bound".into()),
            };
        }
        return BoundResult::gated(0.0, mass);
    }
    let c1 = a0.powf(1.0 / (p - 1.0)) * vol;
    if !(mass > c1) {
        return BoundResult::gated(c1, mass);
    }
    let x = vol.powf(p - 1.0) * a0 * mass.powf(1.0 - p);
    BoundResult {
        applicable: true,
        threshold: Some(c1),
        witness: Some(mass),
        t_bound: Some(log_inv_one_minus(x) / ((p - 1.0) * a0)),
        note: None,
    }
}

/// Eigenfunction criterion: ∫φu₀dμ > c₂ = λ_a^{1/(p−1)}∫φdμ gives
/// T ≤ log(1/(1 − λ_a(∫φdμ)^{p−1}(∫φu₀dμ)^{1−p})) / ((p−1)λ_a).
pub fn criterion_eigen(ps: &ProblemSpec, pair: &EigenPair) -> BoundResult {
    if let Some(r) = common_gate(ps) {
        return r;
    }
    if ps.graph.check(&pair.phi).is_err() {
        return BoundResult::not_applicable("eigenfunction does not match the graph");
    }
    let p = ps.p;
    let g = &ps.graph;
    let phi_mass = g.integral_raw(pair.phi.values());
    let witness = g.integral_raw(pair.phi.mul(&ps.u0).values());
    let lambda = pair.lambda_a;
    if lambda <= 0.0 {
        if witness > 0.0 {
            return BoundResult {
                applicable: true,
                threshold: Some(0.0),
                witness: Some(witness),
                t_bound: Some(witness.powf(1.0 - p) * phi_mass.powf(p - 1.0) / (p - 1.0)),
                note: Some("lambda_a = 0: limiting form of the eigenfunction bound".into()),
            };
        }
        return BoundResult::gated(0.0, witness);
    }
    let c2 = lambda.powf(1.0 / (p - 1.0)) * phi_mass;
    if !(witness > c2) {
        return BoundResult::gated(c2, witness);
    }
    let x = lambda * phi_mass.powf(p - 1.0) * witness.powf(1.0 - p);
    BoundResult {
        applicable: true,
        threshold: Some(c2),
        witness: Some(witness),
        t_bound: Some(log_inv_one_minus(x) / ((p - 1.0) * lambda)),
        note: None,
    }
}

/// c₃ = ((p−1)/(2(p+1))) |V|^{(1−p)/2} ∥u₀∥₂^{1+p}.
pub fn energy_threshold_c3(p: f64, vol: f64, l2: f64) -> f64 {
    (p - 1.0) / (2.0 * (p + 1.0)) * vol.powf((1.0 - p) / 2.0) * l2.powf(1.0 + p)
}

/// Bound for J(u₀) < 0: ((p+1)/(p−1)²) |V|^{(p−1)/2} ∥u₀∥₂^{1−p}.
pub fn energy_bound_negative(p: f64, vol: f64, l2: f64) -> f64 {
    (p + 1.0) / ((p - 1.0) * (p - 1.0)) * vol.powf((p - 1.0) / 2.0) * l2.powf(1.0 - p)
}

/// Bound for 0 ≤ J(u₀) < c₃, written as the two-term maximum in closed form.
pub fn energy_bound_statement(p: f64, vol: f64, l2: f64, j: f64) -> f64 {
    let k = (p - 1.0).powf(2.0 / (p + 1.0));
    let first = (p + 1.0)
        * ((4.0 * (p + 1.0) * vol.powf((p - 1.0) / 2.0) * j).powf(2.0 / (p + 1.0)) - k * l2 * l2)
        / (k * (2.0 * (p - 1.0) * vol.powf((1.0 - p) / 2.0) * l2.powf(1.0 + p)
            - 4.0 * (p + 1.0) * j));
    let second =
        2.0 * (p + 1.0) * l2.powf(1.0 - p) / ((p - 1.0) * (p - 1.0) * vol.powf((1.0 - p) / 2.0));
    first.max(second)
}

/// Coefficients of the differential inequality w′ ≥ −d₀ + d₁w^α for w = ∥u∥₂².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyOde {
    pub w0: f64,
    pub d0: f64,
    pub d1: f64,
    pub alpha: f64,
}

impl EnergyOde {
    pub fn new(p: f64, vol: f64, l2: f64, j: f64) -> Self {
        EnergyOde {
            w0: l2 * l2,
            d0: 4.0 * j,
            d1: (2.0 * p - 2.0) / (p + 1.0) * vol.powf((1.0 - p) / 2.0),
            alpha: (p + 1.0) / 2.0,
        }
    }

    /// η₀ = d₁w₀^α − d₀; the positive-energy branch needs η₀ > 0.
    pub fn eta0(&self) -> f64 {
        self.d1 * self.w0.powf(self.alpha) - self.d0
    }

    /// max{((2d₀/d₁)^{1/α} − w₀)/η₀, 2w₀^{1−α}/((α−1)d₁)}.
    pub fn bound(&self) -> f64 {
        let first = ((2.0 * self.d0 / self.d1).powf(1.0 / self.alpha) - self.w0) / self.eta0();
        let second = 2.0 * self.w0.powf(1.0 - self.alpha) / ((self.alpha - 1.0) * self.d1);
        first.max(second)
    }
}

/// Same quantity as [`energy_bound_statement`], via the w-inequality coefficients.
pub fn energy_bound_proof_form(p: f64, vol: f64, l2: f64, j: f64) -> f64 {
    EnergyOde::new(p, vol, l2, j).bound()
}

/// Energy criterion: J(u₀) < 0, or 0 ≤ J(u₀) < c₃.
pub fn criterion_energy(ps: &ProblemSpec) -> BoundResult {
    if let Some(r) = common_gate(ps) {
        return r;
    }
    if ps.u0.is_zero() {
        return BoundResult::not_applicable("u0 is identically zero");
    }
    let p = ps.p;
    let vol = ps.graph.volume();
    let l2 = ps.graph.lp_norm_raw(ps.u0.values(), 2.0);
    let j = well::energy_j(ps, &ps.u0).expect("u0 validated against the graph");
    let c3 = energy_threshold_c3(p, vol, l2);
    let t_bound = if j < 0.0 {
        energy_bound_negative(p, vol, l2)
    } else if j < c3 {
        energy_bound_statement(p, vol, l2, j)
    } else {
        return BoundResult::gated(c3, j);
    };
    BoundResult {
        applicable: true,
        threshold: Some(c3),
        witness: Some(j),
        t_bound: Some(t_bound),
        note: None,
    }
}

/// ∥Δv − av + |v|^{p−1}v∥_∞.
pub fn equilibrium_residual(ps: &ProblemSpec, v: &NodeField) -> Result<f64> {
    let lv = ps.graph.laplacian(v)?;
    Ok(lv
        .values()
        .iter()
        .zip(v.values())
        .zip(ps.a.values())
        .map(|((l, &x), a)| (l - a * x + x.abs().powf(ps.p - 1.0) * x).abs())
        .fold(0.0, f64::max))
}

/// Equilibrium criterion: a positive equilibrium v with u₀ ≥ v, u₀ ≢ v
/// certifies finite-time blow-up. No closed-form time is produced.
pub fn criterion_equilibrium(ps: &ProblemSpec, v: &NodeField, res_tol: f64) -> BoundResult {
    if let Some(r) = common_gate(ps) {
        return r;
    }
    if ps.graph.check(v).is_err() {
        return BoundResult::not_applicable("candidate equilibrium does not match the graph");
    }
    if !v.values().iter().all(|&x| x > 0.0) {
        return BoundResult::not_applicable("positivity: candidate equilibrium must be > 0");
    }
    let residual = equilibrium_residual(ps, v).expect("checked domain");
    if !(residual <= res_tol) {
        return BoundResult::not_applicable(format!(
            "residual: candidate equilibrium residual {residual:e} exceeds {res_tol:e}"
        ));
    }
    let gap: Vec<f64> = ps
        .u0
        .values()
        .iter()
        .zip(v.values())
        .map(|(u, x)| u - x)
        .collect();
    if gap.iter().any(|&d| d < 0.0) {
        return BoundResult::not_applicable("requires u0 >= v");
    }
    let witness = gap.iter().copied().fold(0.0, f64::max);
    BoundResult {
        applicable: witness > 0.0,
        threshold: Some(0.0),
        witness: Some(witness),
        t_bound: None,
        note: Some(if witness > 0.0 {
            "finite blow-up time certified; no closed-form bound".into()
        } else {
            "requires u0 not identically equal to v".into()
        }),
    }
}

/// Blow-up-rate fit over the tail of a blow-up trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub t_hat: f64,
    /// (t, (t̂ − t)(max_x u)^{p−1}) over the fit window.
    pub rate_samples: Vec<(f64, f64)>,
    pub limit_estimate: f64,
}

pub const DEFAULT_RATE_WINDOW: usize = 20;
/// Only samples with max u at least this fraction of the peak enter the fit.
pub const RATE_PEAK_FRACTION: f64 = 0.01;

/// Fits max_x u(t) ≈ ((p−1)(t̂ − t))^{−1/(p−1)} by least squares on the affine
/// transform (max u)^{1−p} = (p−1)(t̂ − t), weighted by relative error.
pub fn fit_blowup_rate(traj: &Trajectory, p: f64, window: usize) -> Result<RateFit> {
    if traj.status != Status::BlowUp {
        return Err(Error::InvalidArgument(format!(
            "rate fit needs a blow-up trajectory, got {:?}",
            traj.status
        )));
    }
    if window < 3 {
        return Err(Error::InvalidArgument(
            "rate-fit window must be >= 3".into(),
        ));
    }
    let peaks: Vec<f64> = traj.states.iter().map(|u| u.max()).collect();
    let peak = peaks.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(peak > 0.0) {
        return Err(Error::InvalidArgument("max u is not positive".into()));
    }
    let eligible: Vec<usize> = (0..peaks.len())
        .filter(|&i| peaks[i] >= RATE_PEAK_FRACTION * peak)
        .collect();
    if eligible.len() < window {
        return Err(Error::InvalidArgument(format!(
            "too few samples near blow-up: {} < {window}",
            eligible.len()
        )));
    }
    let idx = &eligible[eligible.len() - window..];
    if idx.windows(2).any(|w| peaks[w[1]] < peaks[w[0]]) {
        return Err(Error::InvalidArgument(
            "max u is not monotone over the fit window".into(),
        ));
    }

    // weighted least squares, weights 1/y², on y = c0 + c1 t
    let (mut sw, mut st, mut sy, mut stt, mut sty) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let t_ref = traj.times[idx[0]];
    for &i in idx {
        let t = traj.times[i] - t_ref;
        let y = peaks[i].powf(1.0 - p);
        let w = 1.0 / (y * y);
        sw += w;
        st += w * t;
        sy += w * y;
        stt += w * t * t;
        sty += w * t * y;
    }
    let det = sw * stt - st * st;
    let slope = (sw * sty - st * sy) / det;
    let intercept = (stt * sy - st * sty) / det;
    if !(slope < 0.0) {
        return Err(Error::NoConvergence(format!(
            "rate fit slope {slope} is not negative"
        )));
    }
    let t_hat = t_ref - intercept / slope;
    let t_last = traj.times[*idx.last().unwrap()];
    if !(t_hat > t_last) {
        return Err(Error::NoConvergence(format!(
            "extrapolated blow-up time {t_hat} precedes the last sample {t_last}"
        )));
    }
    let rate_samples: Vec<(f64, f64)> = idx
        .iter()
        .map(|&i| {
            let t = traj.times[i];
            (t, (t_hat - t) * peaks[i].powf(p - 1.0))
        })
        .collect();
    let mut values: Vec<f64> = rate_samples.iter().map(|s| s.1).collect();
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    let limit_estimate = if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    };
    Ok(RateFit {
        t_hat,
        rate_samples,
        limit_estimate,
    })
}

/// A = max_z (Σ_{y∼z} ω_zy / μ(z) + a(z)).
pub fn rate_constant_a(ps: &ProblemSpec) -> f64 {
    (0..ps.graph.len())
        .map(|z| ps.graph.degree(z) / ps.graph.measure()[z] + ps.a.values()[z])
        .fold(0.0, f64::max)
}

/// Two-sided bounds on (T − t)(max u)^{p−1}: [1/(p−1), A s/(1 − e^{−(p−1)A s})], s = T − t.
pub fn rate_bounds(p: f64, a_const: f64, remaining: f64) -> (f64, f64) {
    let lower = 1.0 / (p - 1.0);
    let x = (p - 1.0) * a_const * remaining;
    let upper = if x == 0.0 {
        lower
    } else {
        a_const * remaining / (-(-x).exp_m1())
    };
    (lower, upper)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub epsilon0: f64,
    /// Decay rate used for (δ, C); λ_a/2 unless overridden.
    pub sigma: f64,
    pub delta: f64,
    #[serde(rename = "C")]
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Criteria {
    pub mass: BoundResult,
    pub eigen: BoundResult,
    pub energy: BoundResult,
    pub equilibrium: BoundResult,
}

impl Criteria {
    pub fn iter(&self) -> impl Iterator<Item = (&'static str, &BoundResult)> {
        [
            ("mass", &self.mass),
            ("eigen", &self.eigen),
            ("energy", &self.energy),
            ("equilibrium", &self.equilibrium),
        ]
        .into_iter()
    }

    pub fn any_applicable(&self) -> bool {
        self.iter().any(|(_, c)| c.applicable)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub eigen: EigenPair,
    pub thresholds: Option<Thresholds>,
    pub well: Option<WellReport>,
    pub criteria: Criteria,
    /// Smallest t_bound among applicable criteria.
    pub best_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisOptions {
    pub eigen_tol: f64,
    pub lambda_tol: f64,
    pub seeds: usize,
    pub seed: u64,
    pub sigma: Option<f64>,
    /// Candidate positive equilibrium for the equilibrium criterion.
    pub equilibrium: Option<NodeField>,
    pub res_tol: f64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            eigen_tol: DEFAULT_EIGEN_TOL,
            lambda_tol: well::DEFAULT_LAMBDA_TOL,
            seeds: well::DEFAULT_SEEDS,
            seed: well::LAMBDA_SEED,
            sigma: None,
            equilibrium: None,
            res_tol: 1e-9,
        }
    }
}

/// Runs every analysis that applies to `ps` and gathers the results.
pub fn analyze(ps: &ProblemSpec, opts: &AnalysisOptions) -> Result<AnalysisReport> {
    let g = &ps.graph;
    let eigen = principal_eigenpair(g, &ps.a, opts.eigen_tol)?;
    let thresholds = if eigen.lambda_a > 0.0 {
        let sigma = opts.sigma.unwrap_or(0.5 * eigen.lambda_a);
        let (delta, c) = small_data_threshold(&eigen, ps.p, sigma)?;
        Some(Thresholds {
            epsilon0: epsilon0(eigen.lambda_a, ps.p, g.mu_min(), g.volume())?,
            sigma,
            delta,
            c,
        })
    } else {
        None
    };
    let well = if ps.ubar == 0.0 && !ps.a_is_zero() {
        Some(well::classify_seeded(
            ps,
            opts.lambda_tol,
            opts.seeds,
            opts.seed,
        )?)
    } else {
        None
    };
    let criteria = Criteria {
        mass: criterion_mass(ps),
        eigen: criterion_eigen(ps, &eigen),
        energy: criterion_energy(ps),
        equilibrium: match &opts.equilibrium {
            Some(v) => criterion_equilibrium(ps, v, opts.res_tol),
            None => BoundResult::not_applicable("no candidate equilibrium supplied"),
        },
    };
    let best_bound = criteria
        .iter()
        .filter(|(_, c)| c.applicable)
        .filter_map(|(_, c)| c.t_bound)
        .min_by(f64::total_cmp);
    Ok(AnalysisReport {
        eigen,
        thresholds,
        well,
        criteria,
        best_bound,
    })
}
