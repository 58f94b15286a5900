//! Adaptive time integration of ∂ₜu = Δu − a(u − ū) + |u|^{p−1}u.
//!
//! The node system is a plain ODE y′ = F(y) in ℝᴺ. It is advanced with the
//! Dormand–Prince 5(4) embedded pair (FSAL, local extrapolation) under a PI
//! step-size controller. Runs end in one of four [`Status`] values; blow-up is
//! declared on the `u_max` threshold, or when the step falls below `h_min` (or
//! below what f64 can resolve at the current time) while the nonlinear time
//! scale is comparably short.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::NodeField;
use crate::problem::ProblemSpec;
use crate::spectral::{epsilon0, EigenPair};
use crate::well;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorOptions {
    pub rtol: f64,
    pub atol: f64,
    pub t_horizon: f64,
    /// Blow-up threshold on max|u|.
    pub u_max: f64,
    /// Smallest admissible step; `None` means 1e−14·t_horizon.
    pub h_min: Option<f64>,
    /// Converged once ∥u∥_∞ drops below this (only when ū = 0).
    pub conv_tol: f64,
    /// Keep every k-th accepted step (the first and last are always kept).
    pub record_every: usize,
    /// Times the integrator lands on exactly and always records.
    pub checkpoints: Vec<f64>,
    pub max_steps: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions {
            rtol: 1e-10,
            atol: 1e-12,
            t_horizon: 100.0,
            u_max: 1e8,
            h_min: None,
            conv_tol: 1e-9,
            record_every: 1,
            checkpoints: Vec::new(),
            max_steps: 5_000_000,
        }
    }
}

impl IntegratorOptions {
    pub fn h_min(&self) -> f64 {
        self.h_min.unwrap_or(1e-14 * self.t_horizon)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rtol", self.rtol),
            ("atol", self.atol),
            ("t_horizon", self.t_horizon),
            ("u_max", self.u_max),
            ("h_min", self.h_min()),
            ("conv_tol", self.conv_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "{name} = {v} must be positive"
                )));
            }
        }
        if self.rtol < 1e-13 {
            return Err(Error::InvalidArgument(format!(
                "rtol = {} is below 1e-13",
                self.rtol
            )));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidArgument("record_every must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    ReachedHorizon,
    Converged,
    BlowUp,
    StepUnderflow,
}

/// Derived scalars at one sample. `j` and `n` are NaN when ū ≠ 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub max_abs_u: f64,
    pub l2_norm: f64,
    pub j: f64,
    pub n: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<NodeField>,
    pub traces: Vec<Trace>,
    pub status: Status,
    /// Time of the status event; for blow-up the last accepted time.
    pub t_detect: f64,
    /// Size of the last attempted step; T_max ∈ [t_detect, t_detect + bracket] on blow-up.
    pub bracket: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl Trajectory {
    pub fn final_state(&self) -> &NodeField {
        self.states
            .last()
            .expect("trajectory has at least one sample")
    }

    pub fn final_trace(&self) -> &Trace {
        self.traces
            .last()
            .expect("trajectory has at least one sample")
    }
}

/// F(u) = Δu − a(u − ū) + |u|^{p−1}u.
pub fn rhs(ps: &ProblemSpec, u: &NodeField) -> Result<NodeField> {
    ps.graph.check(u)?;
    let mut out = vec![0.0; u.len()];
    rhs_into(ps, u.values(), &mut out);
    Ok(NodeField::new(out))
}

fn rhs_into(ps: &ProblemSpec, u: &[f64], out: &mut [f64]) {
    ps.graph.laplacian_into(u, out);
    let pm1 = ps.p - 1.0;
    for ((o, &x), &a) in out.iter_mut().zip(u).zip(ps.a.values()) {
        *o += -a * (x - ps.ubar) + x.abs().powf(pm1) * x;
    }
}

fn trace_of(ps: &ProblemSpec, u: &NodeField) -> Trace {
    let (j, n) = if ps.ubar == 0.0 {
        (
            well::energy_j(ps, u).unwrap_or(f64::NAN),
            well::nehari_n(ps, u).unwrap_or(f64::NAN),
        )
    } else {
        (f64::NAN, f64::NAN)
    };
    Trace {
        max_abs_u: u.max_abs(),
        l2_norm: ps.graph.lp_norm_raw(u.values(), 2.0),
        j,
        n,
    }
}

// Dormand–Prince 5(4) tableau; the system is autonomous so stage times are unused
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Work buffers for one Dormand–Prince step of an autonomous system.
pub(crate) struct Stepper<F> {
    f: F,
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
    pub(crate) y_new: Vec<f64>,
    pub(crate) err: Vec<f64>,
}

impl<F: FnMut(&[f64], &mut [f64])> Stepper<F> {
    pub(crate) fn new(f: F, n: usize) -> Self {
        Stepper {
            f,
            k: std::array::from_fn(|_| vec![0.0; n]),
            tmp: vec![0.0; n],
            y_new: vec![0.0; n],
            err: vec![0.0; n],
        }
    }

    pub(crate) fn eval_first(&mut self, y: &[f64]) {
        (self.f)(y, &mut self.k[0]);
    }

    fn stage(&mut self, y: &[f64], h: f64, coeffs: &[(usize, f64)], out: usize) {
        for (i, (t, &yi)) in self.tmp.iter_mut().zip(y).enumerate() {
            let s: f64 = coeffs.iter().map(|&(j, c)| c * self.k[j][i]).sum();
            *t = yi + h * s;
        }
        let (f, k, tmp) = (&mut self.f, &mut self.k, &self.tmp);
        f(tmp, &mut k[out]);
    }

    /// One step of size `h` from `y`, assuming `k[0] = f(y)`. Fills `y_new`,
    /// `err` (the embedded difference) and leaves `k[6] = f(y_new)`.
    pub(crate) fn step(&mut self, y: &[f64], h: f64) {
        self.stage(y, h, &[(0, A21)], 1);
        self.stage(y, h, &[(0, A31), (1, A32)], 2);
        self.stage(y, h, &[(0, A41), (1, A42), (2, A43)], 3);
        self.stage(y, h, &[(0, A51), (1, A52), (2, A53), (3, A54)], 4);
        self.stage(y, h, &[(0, A61), (1, A62), (2, A63), (3, A64), (4, A65)], 5);
        for i in 0..y.len() {
            let k = &self.k;
            self.y_new[i] = y[i]
                + h * (A71 * k[0][i]
                    + A73 * k[2][i]
                    + A74 * k[3][i]
                    + A75 * k[4][i]
                    + A76 * k[5][i]);
        }
        let (f, k, y_new) = (&mut self.f, &mut self.k, &self.y_new);
        f(y_new, &mut k[6]);
        for i in 0..y.len() {
            let k = &self.k;
            self.err[i] = h
                * (E1 * k[0][i]
                    + E3 * k[2][i]
                    + E4 * k[3][i]
                    + E5 * k[4][i]
                    + E6 * k[5][i]
                    + E7 * k[6][i]);
        }
    }

    pub(crate) fn accept(&mut self) {
        self.k.swap(0, 6);
    }

    pub(crate) fn slope(&self) -> &[f64] {
        &self.k[0]
    }
}

fn error_norm(y: &[f64], y_new: &[f64], err: &[f64], opts: &IntegratorOptions) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..y.len() {
        let scale = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
        let r = (err[i] / scale).abs();
        if !r.is_finite() || !y_new[i].is_finite() {
            return f64::INFINITY;
        }
        worst = worst.max(r);
    }
    worst
}

fn initial_step(y: &[f64], f0: &[f64], opts: &IntegratorOptions) -> f64 {
    let norm = |v: &[f64]| {
        v.iter()
            .zip(y)
            .map(|(x, yi)| (x / (opts.atol + opts.rtol * yi.abs())).abs())
            .fold(0.0, f64::max)
    };
    let d0 = norm(y);
    let d1 = norm(f0);
    let h = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h.min(opts.t_horizon).max(opts.h_min())
}

const SAFETY: f64 = 0.9;
const PI_ALPHA: f64 = 0.17;
const PI_BETA: f64 = 0.04;
const MAX_FACTOR: f64 = 10.0;
const MIN_FACTOR: f64 = 0.2;
/// A step underflow counts as blow-up when the nonlinear time scale
/// 1/((p−1)∥u∥_∞^{p−1}) is within this factor of the step floor ...
pub const UNDERFLOW_SCALE_RATIO: f64 = 1e4;
/// ... and ∥u∥_∞^{p−1} exceeds the linear rate max(deg/μ + a) by this factor.
pub const UNDERFLOW_DOMINANCE: f64 = 1e3;

/// Integrates `ps` from u₀ until one of the four [`Status`] events.
pub fn integrate(ps: &ProblemSpec, opts: &IntegratorOptions) -> Result<Trajectory> {
    opts.validate()?;
    let n = ps.graph.len();
    let h_min = opts.h_min();
    let mut checkpoints: Vec<f64> = opts
        .checkpoints
        .iter()
        .copied()
        .filter(|&t| t > 0.0 && t < opts.t_horizon)
        .collect();
    checkpoints.sort_by(f64::total_cmp);
    checkpoints.dedup();
    let mut next_checkpoint = 0;

    let mut y = ps.u0.values().to_vec();
    let mut t = 0.0;
    let check_converged = ps.ubar == 0.0;

    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![ps.u0.clone()],
        traces: vec![trace_of(ps, &ps.u0)],
        status: Status::ReachedHorizon,
        t_detect: 0.0,
        bracket: 0.0,
        accepted_steps: 0,
        rejected_steps: 0,
    };
    if check_converged && ps.u0.max_abs() < opts.conv_tol {
        traj.status = Status::Converged;
        return Ok(traj);
    }

    let mut stepper = Stepper::new(|u: &[f64], out: &mut [f64]| rhs_into(ps, u, out), n);
    stepper.eval_first(&y);
    let mut h = initial_step(&y, stepper.slope(), opts);
    let mut err_prev: f64 = 1.0;
    let mut since_record = 0;
    let mut last_recorded = true;

    // below this, t + h no longer resolves distinct times
    let step_floor = |t: f64| h_min.max(16.0 * f64::EPSILON * t.abs());
    let linear_rate = (0..n)
        .map(|i| ps.graph.degree(i) / ps.graph.measure()[i] + ps.a.values()[i])
        .fold(1.0, f64::max);
    let underflow_status = |y: &[f64], floor: f64| {
        let max_abs = y.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let growth = max_abs.powf(ps.p - 1.0);
        let time_scale = 1.0 / ((ps.p - 1.0) * growth);
        if time_scale <= UNDERFLOW_SCALE_RATIO * floor
            && growth >= UNDERFLOW_DOMINANCE * linear_rate
        {
            Status::BlowUp
        } else {
            Status::StepUnderflow
        }
    };

    let record = |traj: &mut Trajectory, t: f64, y: &[f64]| {
        let u = NodeField::new(y.to_vec());
        traj.times.push(t);
        traj.traces.push(trace_of(ps, &u));
        traj.states.push(u);
    };

    loop {
        if traj.accepted_steps + traj.rejected_steps >= opts.max_steps {
            traj.status = Status::StepUnderflow;
            traj.t_detect = t;
            traj.bracket = h;
            break;
        }
        // land exactly on the horizon and on checkpoints
        let mut target = opts.t_horizon;
        let mut hits_checkpoint = false;
        if next_checkpoint < checkpoints.len() && checkpoints[next_checkpoint] < target {
            target = checkpoints[next_checkpoint];
            hits_checkpoint = true;
        }
        let mut h_try = h;
        let mut lands = false;
        if t + h_try >= target {
            h_try = target - t;
            lands = true;
        }

        if !lands && h_try < step_floor(t) {
            traj.status = underflow_status(&y, step_floor(t));
            traj.t_detect = t;
            traj.bracket = h_try;
            break;
        }

        stepper.step(&y, h_try);
        let err = error_norm(&y, &stepper.y_new, &stepper.err, opts);

        if err > 1.0 {
            traj.rejected_steps += 1;
            let factor = if err.is_finite() {
                (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, 1.0)
            } else {
                MIN_FACTOR
            };
            h = h_try * factor;
            if h < step_floor(t) {
                traj.status = underflow_status(&y, step_floor(t));
                traj.t_detect = t;
                traj.bracket = h_try;
                break;
            }
            continue;
        }

        // accepted
        traj.accepted_steps += 1;
        let new_t = if lands { target } else { t + h_try };
        std::mem::swap(&mut y, &mut stepper.y_new);
        stepper.accept();
        t = new_t;
        if lands && hits_checkpoint {
            next_checkpoint += 1;
        }

        let err_c = err.max(1e-10);
        let factor =
            (SAFETY * err_c.powf(-PI_ALPHA) * err_prev.powf(PI_BETA)).clamp(MIN_FACTOR, MAX_FACTOR);
        err_prev = err_c;
        // a truncated landing step says nothing about the natural step size
        h = if lands {
            h.max(h_try * factor)
        } else {
            h_try * factor
        };

        let max_abs = y.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        since_record += 1;
        let must_record = lands && hits_checkpoint;
        let mut done = None;
        if !max_abs.is_finite() || max_abs >= opts.u_max {
            done = Some(Status::BlowUp);
        } else if check_converged && max_abs < opts.conv_tol {
            done = Some(Status::Converged);
        } else if lands && !hits_checkpoint {
            done = Some(Status::ReachedHorizon);
        }

        if must_record || since_record >= opts.record_every || done.is_some() {
            record(&mut traj, t, &y);
            since_record = 0;
            last_recorded = true;
        } else {
            last_recorded = false;
        }
        if let Some(status) = done {
            traj.status = status;
            traj.t_detect = t;
            traj.bracket = h;
            break;
        }
    }
    if !last_recorded {
        record(&mut traj, t, &y);
    }
    Ok(traj)
}

/// Fixed-step Dormand–Prince integration of `ps` to `t_end` in `steps` steps.
pub fn integrate_fixed(ps: &ProblemSpec, t_end: f64, steps: usize) -> NodeField {
    let n = ps.graph.len();
    let mut y = ps.u0.values().to_vec();
    let mut stepper = Stepper::new(|u: &[f64], out: &mut [f64]| rhs_into(ps, u, out), n);
    stepper.eval_first(&y);
    let h = t_end / steps as f64;
    for _ in 0..steps {
        stepper.step(&y, h);
        std::mem::swap(&mut y, &mut stepper.y_new);
        stepper.accept();
    }
    NodeField::new(y)
}

/// One sample of [`energy_trace`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergySample {
    pub t: f64,
    pub j: f64,
    pub n: f64,
    /// dJ/dt = −∫ F(u)² dμ at the sample.
    pub dj_dt: f64,
}

pub fn energy_trace(ps: &ProblemSpec, traj: &Trajectory) -> Result<Vec<EnergySample>> {
    if ps.ubar != 0.0 {
        return Err(Error::InvalidArgument(
            "energy trace requires ubar = 0".into(),
        ));
    }
    if traj.states.first() != Some(&ps.u0) {
        return Err(Error::InvalidArgument(
            "trajectory does not start at this problem's initial data".into(),
        ));
    }
    traj.times
        .iter()
        .zip(&traj.states)
        .map(|(&t, u)| {
            let f = rhs(ps, u)?;
            Ok(EnergySample {
                t,
                j: well::energy_j(ps, u)?,
                n: well::nehari_n(ps, u)?,
                dj_dt: -ps.graph.integral(&f.mul(&f))?,
            })
        })
        .collect()
}

pub const ENVELOPE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub applicable: bool,
    pub note: Option<String>,
    pub epsilon0: Option<f64>,
    /// max over samples of ∥u(t)∥_∞ / (μ_min^{−1/2} ∥u₀∥₂ e^{−λ_a t/2}).
    pub max_ratio: f64,
    pub pass: bool,
}

/// ∥u₀∥₂ μ_min^{−1/2} e^{−λ_a t/2}, the sup-norm envelope for small data.
pub fn decay_envelope(l2_0: f64, mu_min: f64, lambda_a: f64, t: f64) -> f64 {
    l2_0 / mu_min.sqrt() * (-0.5 * lambda_a * t).exp()
}

/// Checks the L² small-data decay envelope along a trajectory.
pub fn decay_envelope_check(ps: &ProblemSpec, traj: &Trajectory, pair: &EigenPair) -> DecayReport {
    let not_applicable = |note: String, eps0: Option<f64>| DecayReport {
        applicable: false,
        note: Some(note),
        epsilon0: eps0,
        max_ratio: f64::NAN,
        pass: false,
    };
    if ps.ubar != 0.0 {
        return not_applicable("requires ubar = 0".into(), None);
    }
    if ps.a_is_zero() {
        return not_applicable(
            "requires a potential that is not identically zero".into(),
            None,
        );
    }
    let g = &ps.graph;
    let eps0 = match epsilon0(pair.lambda_a, ps.p, g.mu_min(), g.volume()) {
        Ok(e) => e,
        Err(e) => return not_applicable(e.to_string(), None),
    };
    let l2 = g.lp_norm_raw(ps.u0.values(), 2.0);
    if !(l2 < eps0) {
        return not_applicable(
            format!("||u0||_2 = {l2} is not below epsilon0 = {eps0}"),
            Some(eps0),
        );
    }
    let max_ratio = traj
        .times
        .iter()
        .zip(&traj.traces)
        .map(|(&t, tr)| {
            if tr.max_abs_u == 0.0 {
                0.0
            } else {
                tr.max_abs_u / decay_envelope(l2, g.mu_min(), pair.lambda_a, t)
            }
        })
        .fold(0.0, f64::max);
    DecayReport {
        applicable: true,
        note: None,
        epsilon0: Some(eps0),
        max_ratio,
        pass: max_ratio <= 1.0 + ENVELOPE_TOL,
    }
}
