//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test -p graphheat --test acceptance`.

mod common;

use std::collections::HashMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use graphheat::blowup::{
    criterion_eigen, criterion_energy, criterion_mass, energy_bound_proof_form,
    energy_bound_statement, energy_threshold_c3, fit_blowup_rate, DEFAULT_RATE_WINDOW,
};
use graphheat::graph::NodeEntry;
use graphheat::spectral::epsilon0;
use graphheat::well::{
    classify_against, depth_from_lambda, lambda_constant, nehari_scale, well_depth,
};
use graphheat::{
    integrate, principal_eigenpair, Classification, Graph, IntegratorOptions, NodeField,
    ProblemSpec, Status, Trajectory,
};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;

use common::{random_field, random_graph, random_potential, random_problem, rng};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

fn single(a: f64, p: f64, u0: f64) -> ProblemSpec {
    let g = Graph::new(
        &[NodeEntry {
            id: "x".into(),
            mu: 1.0,
        }],
        &[],
    )
    .unwrap();
    ProblemSpec::new(g, vec![a].into(), p, vec![u0].into()).unwrap()
}

/// 25 unit nodes, a = 0 at the first and `gain` elsewhere. The mass bound does
/// not see the edges, so any connected topology gives the same numbers.
fn hub25(p: f64, hub: f64, rest: f64) -> ProblemSpec {
    let g = graphheat::presets::stand_in_g25();
    let a = graphheat::presets::hub_potential(&g, 2.0);
    let u0 = graphheat::presets::hub_data(&g, hub, rest);
    ProblemSpec::new(g, a, p, u0).unwrap()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let ps = hub25(3.0, 0.5, 1.5);
    let r = criterion_mass(&ps);
    let (c1, mass, t) = (r.threshold.unwrap(), r.witness.unwrap(), r.t_bound.unwrap());
    let elapsed = start.elapsed();
    let pass = r.applicable
        && (c1 - 35.3553).abs() <= 1e-3
        && mass == 36.5
        && (t - 0.6962).abs() <= 1e-3
        && within(elapsed, 1.0);
    outcome(
        pass,
        format!("c1 = {c1:.6}, mass = {mass}, t_bound = {t:.6} ({elapsed:.2?})"),
    )
}

fn criterion_2() -> Outcome {
    let ps = hub25(2.0, 0.03, 0.001);
    let l2 = ps.graph.lp_norm(&ps.u0, 2.0).unwrap();
    let eps0 = epsilon0(1.9116, 2.0, ps.graph.mu_min(), ps.graph.volume()).unwrap();
    let pass = (l2 - 0.0304).abs() <= 1e-4 && (eps0 - 0.0365).abs() <= 1e-3;
    outcome(
        pass,
        format!("||u0||_2 = {l2:.6}, epsilon0(lambda_a = 1.9116) = {eps0:.6}"),
    )
}

/// Dense oracle: smallest eigenpair of D^{-1/2}(K + D_a)D^{-1/2} via nalgebra.
fn dense_eigen(g: &Graph, a: &NodeField) -> (f64, Vec<f64>) {
    let n = g.len();
    let mu = g.measure();
    let mut k = DMatrix::<f64>::zeros(n, n);
    for &(i, j, w) in g.edges() {
        k[(i, j)] -= w;
        k[(j, i)] -= w;
        k[(i, i)] += w;
        k[(j, j)] += w;
    }
    for i in 0..n {
        k[(i, i)] += mu[i] * a.values()[i];
    }
    let m = DMatrix::from_fn(n, n, |i, j| k[(i, j)] / (mu[i] * mu[j]).sqrt());
    let eig = SymmetricEigen::new(m);
    let idx = (0..n)
        .min_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]))
        .unwrap();
    let y = eig.eigenvectors.column(idx);
    let mut phi: Vec<f64> = (0..n).map(|i| y[i] / mu[i].sqrt()).collect();
    let norm = phi
        .iter()
        .zip(mu)
        .map(|(v, m)| m * v * v)
        .sum::<f64>()
        .sqrt();
    let sign = if phi[0] < 0.0 { -1.0 } else { 1.0 };
    phi.iter_mut().for_each(|v| *v *= sign / norm);
    (eig.eigenvalues[idx], phi)
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut rng = rng(3);
    let (mut worst_lambda, mut worst_phi) = (0.0_f64, 0.0_f64);
    let mut positive = true;
    for _ in 0..50 {
        let n = rng.gen_range(1..=10);
        let g = random_graph(&mut rng, n);
        let a = random_potential(&mut rng, &g);
        let pair = principal_eigenpair(&g, &a, 1e-10).unwrap();
        let (lambda, phi) = dense_eigen(&g, &a);
        worst_lambda = worst_lambda.max((pair.lambda_a - lambda).abs());
        let dphi = pair
            .phi
            .values()
            .iter()
            .zip(&phi)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        worst_phi = worst_phi.max(dphi);
        positive &= pair.phi.values().iter().all(|&v| v > 0.0);
    }
    let elapsed = start.elapsed();
    let pass = worst_lambda <= 1e-8 && worst_phi <= 1e-8 && positive && within(elapsed, 10.0);
    outcome(
        pass,
        format!("50 graphs: max |dlambda| = {worst_lambda:.2e}, max |dphi| = {worst_phi:.2e}, phi > 0: {positive} ({elapsed:.2?})"),
    )
}

fn blowup_runs() -> Vec<(ProblemSpec, Trajectory, f64)> {
    [
        (single(0.0, 2.0, 1.0), 1.0),
        (single(1.0, 3.0, 2.0), 0.5 * (4.0f64 / 3.0).ln()),
    ]
    .into_iter()
    .map(|(ps, exact)| {
        let opts = IntegratorOptions {
            t_horizon: 2.0,
            ..Default::default()
        };
        let traj = integrate(&ps, &opts).unwrap();
        (ps, traj, exact)
    })
    .collect()
}

fn criterion_4(runs: &[(ProblemSpec, Trajectory, f64)]) -> Outcome {
    let start = Instant::now();
    let ps = single(1.0, 2.0, 0.5);
    let opts = IntegratorOptions {
        t_horizon: 5.0,
        checkpoints: (1..100).map(|k| 0.05 * k as f64).collect(),
        ..Default::default()
    };
    let traj = integrate(&ps, &opts).unwrap();
    let logistic_err = traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(&t, u)| (u.values()[0] - 1.0 / (1.0 + t.exp())).abs())
        .fold(0.0, f64::max);
    let covers = *traj.times.last().unwrap() == 5.0;

    let (_, quad, _) = &runs[0];
    let quad_ok = quad.status == Status::BlowUp && quad.t_detect > 0.99 && quad.t_detect < 1.0;
    let (cubic_ps, cubic, exact) = &runs[1];
    let fit = fit_blowup_rate(cubic, cubic_ps.p, DEFAULT_RATE_WINDOW).unwrap();
    let rel = (fit.t_hat - exact).abs() / exact;
    let elapsed = start.elapsed();
    let pass = logistic_err < 1e-6 && covers && quad_ok && rel <= 0.01 && within(elapsed, 5.0);
    outcome(
        pass,
        format!(
            "logistic max err = {logistic_err:.2e}; u'=u^2 t_detect = {:.9}; u'=u^3-u t_hat = {:.8} (rel err {rel:.2e}) ({elapsed:.2?})",
            quad.t_detect, fit.t_hat
        ),
    )
}

fn criterion_5(runs: &[(ProblemSpec, Trajectory, f64)]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (ps, traj, _) in runs {
        let fit = fit_blowup_rate(traj, ps.p, DEFAULT_RATE_WINDOW).unwrap();
        let limit = 1.0 / (ps.p - 1.0);
        let rel = (fit.limit_estimate - limit).abs() / limit;
        pass &= rel <= 0.05;
        parts.push(format!(
            "p = {}: median {:.6} vs {limit} (rel {rel:.2e})",
            ps.p, fit.limit_estimate
        ));
    }
    outcome(pass, parts.join("; "))
}

/// Λ by brute-force search over the positive part of the unit sphere (n ≤ 3),
/// refined by repeated zooming around the best cell.
fn grid_lambda(ps: &ProblemSpec) -> f64 {
    let g = &ps.graph;
    let mu = g.measure();
    let a = ps.a.values();
    let q = ps.p + 1.0;
    let quotient = |u: &[f64]| {
        let mut e: f64 = g
            .edges()
            .iter()
            .map(|&(i, j, w)| w * (u[i] - u[j]).powi(2))
            .sum();
        e += (0..u.len())
            .map(|i| mu[i] * a[i] * u[i] * u[i])
            .sum::<f64>();
        let p: f64 = (0..u.len()).map(|i| mu[i] * u[i].abs().powf(q)).sum();
        e / p.powf(2.0 / q)
    };
    let point = |th: f64, ph: f64| -> Vec<f64> {
        match g.len() {
            1 => vec![1.0],
            2 => vec![th.cos(), th.sin()],
            _ => vec![ph.sin() * th.cos(), ph.sin() * th.sin(), ph.cos()],
        }
    };
    let half_pi = std::f64::consts::FRAC_PI_2;
    let (mut lo_t, mut hi_t, mut lo_p, mut hi_p) = (0.0, half_pi, 0.0, half_pi);
    let steps = 120;
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for _ in 0..25 {
        let dt = (hi_t - lo_t) / steps as f64;
        let dp = (hi_p - lo_p) / steps as f64;
        let p_steps = if g.len() == 3 { steps } else { 0 };
        for i in 0..=steps {
            for j in 0..=p_steps {
                let (th, ph) = (lo_t + i as f64 * dt, lo_p + j as f64 * dp);
                let v = quotient(&point(th, ph));
                if v < best.0 {
                    best = (v, th, ph);
                }
            }
        }
        lo_t = (best.1 - 2.0 * dt).max(0.0);
        hi_t = (best.1 + 2.0 * dt).min(half_pi);
        lo_p = (best.2 - 2.0 * dp).max(0.0);
        hi_p = (best.2 + 2.0 * dp).min(half_pi);
    }
    best.0
}

fn criterion_6() -> Outcome {
    let ps = single(1.0, 3.0, 0.0);
    let min = lambda_constant(&ps, 1e-10, 16).unwrap();
    let r = depth_from_lambda(min.lambda, 3.0);
    let single_ok = (min.lambda - 1.0).abs() <= 1e-8 && (r - 0.25).abs() <= 1e-6;

    let mut rng = rng(6);
    let mut worst = 0.0_f64;
    for _ in 0..10 {
        let n = rng.gen_range(1..=3);
        let g = random_graph(&mut rng, n);
        let a = random_potential(&mut rng, &g);
        let p = rng.gen_range(1.5..4.0);
        let ps = ProblemSpec::new(g.clone(), a, p, NodeField::zeros(&g)).unwrap();
        let r = well_depth(&ps, 1e-10).unwrap();
        let r_grid = depth_from_lambda(grid_lambda(&ps), p);
        worst = worst.max((r - r_grid).abs() / r_grid.max(1.0));
    }
    outcome(
        single_ok && worst <= 1e-4,
        format!("single node Lambda = {:.12}, r = {r:.10}; grid oracle max rel diff on 10 graphs = {worst:.2e}", min.lambda),
    )
}

struct WellInstance {
    ps: ProblemSpec,
    class: Classification,
}

/// Draws u₀ = s·v until `want` comes out of the classifier.
fn draw_well_instance(rng: &mut rand_chacha::ChaCha8Rng, want: Classification) -> WellInstance {
    loop {
        let base = random_problem(rng, 8);
        let lm = lambda_constant(&base, 1e-10, 16).unwrap();
        let r = depth_from_lambda(lm.lambda, base.p);
        let n = base.graph.len();
        for _ in 0..20 {
            let (v, c) = match want {
                Classification::InWell => {
                    (random_field(rng, n, -1.0, 1.0), rng.gen_range(0.05..0.9))
                }
                _ => (random_field(rng, n, 0.1, 1.0), rng.gen_range(1.05..3.0)),
            };
            let Ok(s_star) = nehari_scale(&base, &v) else {
                continue;
            };
            let u0 = v.scaled(c * s_star);
            let rep = classify_against(&base, &u0, lm.lambda, r);
            if rep.classification == want {
                return WellInstance {
                    ps: base.with_u0(u0).unwrap(),
                    class: want,
                };
            }
        }
    }
}

fn criterion_7(exterior_runs: &mut Vec<(ProblemSpec, Trajectory)>) -> Outcome {
    let start = Instant::now();
    let mut rng = rng(7);
    let opts = IntegratorOptions {
        t_horizon: 1e4,
        ..Default::default()
    };
    let (mut in_ok, mut ext_ok) = (0, 0);
    for _ in 0..50 {
        let inst = draw_well_instance(&mut rng, Classification::InWell);
        assert_eq!(inst.class, Classification::InWell);
        let traj = integrate(&inst.ps, &opts).unwrap();
        let j0 = traj.traces[0].j.abs().max(f64::MIN_POSITIVE);
        let j_down = traj.traces.windows(2).all(|w| w[1].j <= w[0].j + 1e-9 * j0);
        let n_pos = traj.traces.iter().all(|t| t.n > 0.0);
        if traj.status == Status::Converged && j_down && n_pos {
            in_ok += 1;
        }
    }
    for _ in 0..50 {
        let inst = draw_well_instance(&mut rng, Classification::Exterior);
        let traj = integrate(&inst.ps, &opts).unwrap();
        if traj.status == Status::BlowUp {
            ext_ok += 1;
        }
        exterior_runs.push((inst.ps, traj));
    }
    let elapsed = start.elapsed();
    outcome(
        in_ok == 50 && ext_ok == 50 && within(elapsed, 60.0),
        format!("InWell converged with J down, N > 0: {in_ok}/50; Exterior blew up: {ext_ok}/50 ({elapsed:.2?})"),
    )
}

fn checkpoint_states(traj: &Trajectory) -> HashMap<u64, &NodeField> {
    traj.times
        .iter()
        .zip(&traj.states)
        .map(|(t, u)| (t.to_bits(), u))
        .collect()
}

fn criterion_8() -> Outcome {
    let mut rng = rng(8);
    let checkpoints: Vec<f64> = (1..50).map(|k| 0.1 * k as f64).collect();
    let opts = IntegratorOptions {
        t_horizon: 5.0,
        checkpoints: checkpoints.clone(),
        ..Default::default()
    };
    let mut order_violations = 0;
    let mut compared = 0;
    for _ in 0..100 {
        let base = random_problem(&mut rng, 6);
        let n = base.graph.len();
        let u0 = random_field(&mut rng, n, -0.5, 0.5);
        let gap = random_field(&mut rng, n, 0.0, 0.3);
        let v0: NodeField = u0
            .values()
            .iter()
            .zip(gap.values())
            .map(|(u, d)| u + d)
            .collect::<Vec<_>>()
            .into();
        let tu = integrate(&base.with_u0(u0).unwrap(), &opts).unwrap();
        let tv = integrate(&base.with_u0(v0).unwrap(), &opts).unwrap();
        let (su, sv) = (checkpoint_states(&tu), checkpoint_states(&tv));
        let mut bad = false;
        for t in std::iter::once(0.0).chain(checkpoints.iter().copied()) {
            if let (Some(u), Some(v)) = (su.get(&t.to_bits()), sv.get(&t.to_bits())) {
                compared += 1;
                let tol = 1e-8 * v.max_abs().max(u.max_abs()).max(1.0);
                bad |= u.values().iter().zip(v.values()).any(|(a, b)| a - b > tol);
            }
        }
        order_violations += bad as usize;
    }

    let mut sign_violations = 0;
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let base = random_problem(&mut rng, 6);
        let n = base.graph.len();
        let mut u0 = random_field(&mut rng, n, 0.0, 1.0);
        for v in u0.values_mut() {
            if rng.gen_bool(0.3) {
                *v = 0.0;
            }
        }
        let traj = integrate(&base.with_u0(u0).unwrap(), &opts).unwrap();
        let low = traj
            .states
            .iter()
            .map(|u| u.min() / u.max_abs().max(1.0))
            .fold(f64::INFINITY, f64::min);
        worst = worst.min(low);
        sign_violations += (low < -1e-8) as usize;
    }
    outcome(
        order_violations == 0 && sign_violations == 0,
        format!("ordered pairs violating order: {order_violations}/100 ({compared} comparisons); nonnegative runs going below -1e-8: {sign_violations}/100 (min normalized u = {worst:.2e})"),
    )
}

fn best_bound(ps: &ProblemSpec) -> Option<f64> {
    let pair = principal_eigenpair(&ps.graph, &ps.a, 1e-10).unwrap();
    [
        criterion_mass(ps),
        criterion_eigen(ps, &pair),
        criterion_energy(ps),
    ]
    .into_iter()
    .filter(|c| c.applicable)
    .filter_map(|c| c.t_bound)
    .min_by(f64::total_cmp)
}

fn criterion_9(
    runs: &[(ProblemSpec, Trajectory, f64)],
    exterior: &[(ProblemSpec, Trajectory)],
) -> Outcome {
    let mut rng = rng(9);
    let mut pool: Vec<(ProblemSpec, Trajectory)> = runs
        .iter()
        .map(|(ps, traj, _)| (ps.clone(), traj.clone()))
        .chain(exterior.iter().cloned())
        .collect();
    let blow = hub25(3.0, 0.5, 1.5);
    pool.push((
        blow.clone(),
        integrate(&blow, &IntegratorOptions::default()).unwrap(),
    ));
    for _ in 0..50 {
        let base = random_problem(&mut rng, 8);
        let n = base.graph.len();
        let ps = base.with_u0(random_field(&mut rng, n, 0.5, 4.0)).unwrap();
        let traj = integrate(&ps, &IntegratorOptions::default()).unwrap();
        pool.push((ps, traj));
    }

    let (mut checked, mut violations) = (0, 0);
    for (ps, traj) in &pool {
        if traj.status != Status::BlowUp {
            continue;
        }
        if let Some(bound) = best_bound(ps) {
            checked += 1;
            if traj.t_detect > bound + traj.bracket {
                violations += 1;
            }
        }
    }
    outcome(
        violations == 0 && checked > 0,
        format!("{checked} blow-up runs with an applicable criterion, {violations} with t_detect > best_bound + bracket"),
    )
}

fn criterion_10() -> Outcome {
    let mut rng = rng(10);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let p = rng.gen_range(1.1..5.0);
        let vol = rng.gen_range(1.0..100.0);
        let l2 = rng.gen_range(0.1..10.0);
        let j = rng.gen_range(0.0..1.0) * energy_threshold_c3(p, vol, l2);
        let a = energy_bound_statement(p, vol, l2, j);
        let b = energy_bound_proof_form(p, vol, l2, j);
        worst = worst.max((a - b).abs() / a.abs());
    }
    outcome(
        worst <= 1e-10,
        format!("100 tuples, max relative difference {worst:.2e}"),
    )
}

fn main() -> ExitCode {
    let runs = blowup_runs();
    let mut exterior = Vec::new();
    let results = [
        ("1  mass-criterion reference numbers", criterion_1()),
        ("2  small-data reference numbers", criterion_2()),
        ("3  eigenpair vs dense oracle", criterion_3()),
        ("4  closed-form dynamics", criterion_4(&runs)),
        ("5  blow-up rate", criterion_5(&runs)),
        ("6  potential-well constants", criterion_6()),
        (
            "7  well classification behaviour",
            criterion_7(&mut exterior),
        ),
        ("8  comparison and positivity", criterion_8()),
        ("9  blow-up bound soundness", criterion_9(&runs, &exterior)),
        ("10 energy-bound cross-form", criterion_10()),
    ];
    let mut failed = 0;
    for (name, o) in &results {
        println!(
            "[{}] criterion {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += !o.pass as usize;
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
