use std::fs;
use std::path::{Path, PathBuf};

use graphheat::blowup::{fit_blowup_rate, DEFAULT_RATE_WINDOW};
use graphheat::dynamics::{decay_envelope, decay_envelope_check};
use graphheat::presets::{self, Preset};
use graphheat::spectral::{epsilon0, DEFAULT_EIGEN_TOL};
use graphheat::{
    analyze, integrate, principal_eigenpair, AnalysisOptions, AnalysisReport, IntegratorOptions,
    ProblemSpec, Status, Trajectory,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::problem_file::{load_graph, load_problem, FieldSpec, ProblemFile};
use crate::svg::{Chart, Series};
use crate::table::{write_trajectory, Table};

/// Command-line overrides of problem-file integrator settings.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    pub tmax: Option<f64>,
    pub umax: Option<f64>,
    pub hmin: Option<f64>,
    pub ubar: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, opts: &mut IntegratorOptions) {
        if let Some(v) = self.rtol {
            opts.rtol = v;
        }
        if let Some(v) = self.atol {
            opts.atol = v;
        }
        if let Some(v) = self.tmax {
            opts.t_horizon = v;
        }
        if let Some(v) = self.umax {
            opts.u_max = v;
        }
        if self.hmin.is_some() {
            opts.h_min = self.hmin;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub status: Status,
    pub t_detect: f64,
    pub bracket: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub samples: usize,
    pub final_max_abs_u: f64,
    pub final_l2_norm: f64,
    /// Absent when ū ≠ 0.
    #[serde(rename = "final_J")]
    pub final_j: Option<f64>,
    #[serde(rename = "final_N")]
    pub final_n: Option<f64>,
}

impl RunReport {
    pub fn new(traj: &Trajectory) -> Self {
        let tr = traj.final_trace();
        let finite = |v: f64| v.is_finite().then_some(v);
        RunReport {
            status: traj.status,
            t_detect: traj.t_detect,
            bracket: traj.bracket,
            accepted_steps: traj.accepted_steps,
            rejected_steps: traj.rejected_steps,
            samples: traj.times.len(),
            final_max_abs_u: tr.max_abs_u,
            final_l2_norm: tr.l2_norm,
            final_j: finite(tr.j),
            final_n: finite(tr.n),
        }
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("serializable report");
    s.push('\n');
    s.into_bytes()
}

fn trajectory_csv(ps: &ProblemSpec, traj: &Trajectory) -> Vec<u8> {
    let mut buf = Vec::new();
    write_trajectory(&ps.graph, traj, &mut buf).expect("writing CSV to memory");
    buf
}

fn run(
    ps: &ProblemSpec,
    opts: &IntegratorOptions,
    out: &Path,
    report: &Path,
) -> CliResult<Trajectory> {
    let traj = integrate(ps, opts)?;
    let csv = trajectory_csv(ps, &traj);
    let json = to_json(&RunReport::new(&traj));
    write_file(out, &csv)?;
    write_file(report, &json)?;
    Ok(traj)
}

pub fn simulate(problem: &Path, out: &Path, report: &Path, ov: &Overrides) -> CliResult<RunReport> {
    let mut loaded = load_problem(problem)?;
    ov.apply(&mut loaded.integrator);
    loaded.integrator.validate()?;
    let mut ps = loaded.spec;
    if let Some(ubar) = ov.ubar {
        ps = ProblemSpec::with_offset(ps.graph, ps.a, ps.p, ps.u0, ubar)?;
    }
    let traj = run(&ps, &loaded.integrator, out, report)?;
    Ok(RunReport::new(&traj))
}

pub fn analyze_cmd(problem: &Path, out: &Path, seed: Option<u64>) -> CliResult<AnalysisReport> {
    let loaded = load_problem(problem)?;
    let mut opts = AnalysisOptions {
        equilibrium: loaded.equilibrium,
        ..Default::default()
    };
    if let Some(s) = seed {
        opts.seed = s;
    }
    let report = analyze(&loaded.spec, &opts)?;
    write_file(out, &to_json(&report))?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub lambda_a: f64,
    pub nodes: Vec<String>,
    pub phi: Vec<f64>,
    pub residual: f64,
}

/// A potential given either as a bare number or as a field spec in JSON.
pub fn parse_potential(text: &str) -> CliResult<FieldSpec> {
    if let Ok(c) = text.trim().parse::<f64>() {
        return Ok(FieldSpec::Const(c));
    }
    serde_json::from_str(text).map_err(|e| {
        CliError::Usage(format!(
            "potential `{text}`: expected a number or a field spec ({e})"
        ))
    })
}

pub fn spectrum(graph: &Path, potential: &str, out: &Path) -> CliResult<SpectrumReport> {
    let g = load_graph(graph)?;
    let a = parse_potential(potential)?.resolve(&g, "a")?;
    let pair = principal_eigenpair(&g, &a, DEFAULT_EIGEN_TOL)?;
    let report = SpectrumReport {
        lambda_a: pair.lambda_a,
        nodes: g.ids().to_vec(),
        phi: pair.phi.into_values(),
        residual: pair.residual,
    };
    write_file(out, &to_json(&report))?;
    Ok(report)
}

/// Envelope ∥u₀∥₂ μ_min^{−1/2} e^{−λt/2}, drawn with ∥u₀∥₂ from the first row.
#[derive(Debug, Clone, Copy)]
pub struct EnvelopeSpec {
    pub lambda_a: f64,
    pub mu_min: f64,
}

pub struct PlotRequest<'a> {
    pub columns: &'a [String],
    pub log_y: bool,
    pub envelope: Option<EnvelopeSpec>,
    pub title: String,
}

pub fn plot(traj: &Path, out: &Path, req: &PlotRequest) -> CliResult<()> {
    let file = fs::File::open(traj).map_err(|e| CliError::io(traj, e))?;
    let table = Table::read(file, traj)?;
    let svg = render_plot(&table, traj, req)?;
    write_file(out, svg.as_bytes())
}

pub fn render_plot(table: &Table, origin: &Path, req: &PlotRequest) -> CliResult<String> {
    let t = table
        .column("t")
        .ok_or_else(|| CliError::format(origin, "missing `t` column"))?;
    let mut series = Vec::new();
    for name in req.columns {
        let ys = table
            .column(name)
            .ok_or_else(|| CliError::Usage(format!("unknown column `{name}`")))?;
        series.push(Series {
            name: name.clone(),
            points: t.iter().copied().zip(ys).collect(),
        });
    }
    if let Some(env) = req.envelope {
        let l2 = table
            .column("l2_norm")
            .ok_or_else(|| CliError::format(origin, "envelope needs an `l2_norm` column"))?;
        series.push(Series {
            name: "envelope".into(),
            points: t
                .iter()
                .map(|&s| (s, decay_envelope(l2[0], env.mu_min, env.lambda_a, s)))
                .collect(),
        });
    }
    if series.is_empty() {
        return Err(CliError::Usage(
            "nothing to plot: select columns or an envelope".into(),
        ));
    }
    let chart = Chart {
        title: req.title.clone(),
        log_y: req.log_y,
        ..Default::default()
    };
    Ok(chart.render(&series))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    /// `exact` for values that do not depend on the network edges,
    /// `stand-in` for values specific to the substitute topology,
    /// `closed-form` for single-node oracles.
    pub group: String,
    pub name: String,
    pub value: f64,
    pub reference: Option<f64>,
    pub tolerance: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub preset: String,
    pub checks: Vec<Check>,
    pub all_pass: bool,
}

struct Checks(Vec<Check>);

impl Checks {
    fn near(&mut self, group: &str, name: &str, value: f64, reference: f64, tol: f64) {
        self.0.push(Check {
            group: group.into(),
            name: name.into(),
            value,
            reference: Some(reference),
            tolerance: Some(tol),
            pass: (value - reference).abs() <= tol,
        });
    }

    fn holds(&mut self, group: &str, name: &str, value: f64, pass: bool) {
        self.0.push(Check {
            group: group.into(),
            name: name.into(),
            value,
            reference: None,
            tolerance: None,
            pass,
        });
    }

    fn finish(self, preset: Preset) -> Summary {
        let all_pass = self.0.iter().all(|c| c.pass);
        Summary {
            preset: preset.name().into(),
            checks: self.0,
            all_pass,
        }
    }
}

fn opt_or_nan(v: Option<f64>) -> f64 {
    v.unwrap_or(f64::NAN)
}

/// Writes graph.json and problem.json for a 25-node scenario.
fn write_g25_inputs(dir: &Path, ps: &ProblemSpec, u0_preset: &str) -> CliResult<()> {
    write_file(&dir.join("graph.json"), &to_json(&ps.graph.to_file()))?;
    let a = ps
        .graph
        .ids()
        .iter()
        .cloned()
        .zip(ps.a.values().iter().copied())
        .collect();
    let file = ProblemFile {
        graph: PathBuf::from("graph.json"),
        p: ps.p,
        a: FieldSpec::Map(a),
        u0: FieldSpec::Preset(u0_preset.into()),
        ubar: 0.0,
        integrator: IntegratorOptions::default(),
        equilibrium: None,
    };
    write_file(&dir.join("problem.json"), &to_json(&file))
}

fn analysis_options(seed: Option<u64>) -> AnalysisOptions {
    let mut opts = AnalysisOptions::default();
    if let Some(s) = seed {
        opts.seed = s;
    }
    opts
}

fn reproduce_g25_blowup(dir: &Path, seed: Option<u64>) -> CliResult<Summary> {
    let ps = presets::g25_blowup();
    write_g25_inputs(dir, &ps, "hub-blowup")?;
    let opts = IntegratorOptions::default();
    let traj = run(
        &ps,
        &opts,
        &dir.join("trajectory.csv"),
        &dir.join("run.json"),
    )?;
    let report = analyze(&ps, &analysis_options(seed))?;
    write_file(&dir.join("analysis.json"), &to_json(&report))?;

    let table = Table::read(
        trajectory_csv(&ps, &traj).as_slice(),
        &dir.join("trajectory.csv"),
    )?;
    let cols = ["u_x1", "u_x2", "u_x10", "max_abs_u"].map(String::from);
    let svg = render_plot(
        &table,
        dir,
        &PlotRequest {
            columns: &cols,
            log_y: true,
            envelope: None,
            title: "g25-blowup".into(),
        },
    )?;
    write_file(&dir.join("plot.svg"), svg.as_bytes())?;

    let mass = &report.criteria.mass;
    let t_bound = opt_or_nan(mass.t_bound);
    let mut c = Checks(Vec::new());
    c.near(
        "exact",
        "c1",
        opt_or_nan(mass.threshold),
        presets::G25_REFERENCE_C1,
        1e-3,
    );
    c.near(
        "exact",
        "mass",
        opt_or_nan(mass.witness),
        presets::G25_REFERENCE_BLOWUP_MASS,
        0.0,
    );
    c.near(
        "exact",
        "mass_t_bound",
        t_bound,
        presets::G25_REFERENCE_MASS_BOUND,
        1e-3,
    );
    c.holds(
        "stand-in",
        "lambda_a",
        report.eigen.lambda_a,
        report.eigen.lambda_a > 0.0,
    );
    c.holds(
        "stand-in",
        "blow_up_detected",
        traj.t_detect,
        traj.status == Status::BlowUp,
    );
    c.holds(
        "stand-in",
        "t_detect_le_mass_t_bound",
        traj.t_detect,
        traj.t_detect <= t_bound,
    );
    let best = opt_or_nan(report.best_bound);
    c.holds(
        "stand-in",
        "t_detect_le_best_bound",
        best,
        traj.t_detect <= best + traj.bracket,
    );
    Ok(c.finish(Preset::G25Blowup))
}

fn reproduce_g25_decay(dir: &Path, seed: Option<u64>) -> CliResult<Summary> {
    let ps = presets::g25_decay();
    write_g25_inputs(dir, &ps, "hub-decay")?;
    let opts = IntegratorOptions::default();
    let traj = run(
        &ps,
        &opts,
        &dir.join("trajectory.csv"),
        &dir.join("run.json"),
    )?;
    let report = analyze(&ps, &analysis_options(seed))?;
    write_file(&dir.join("analysis.json"), &to_json(&report))?;

    let g = &ps.graph;
    let table = Table::read(
        trajectory_csv(&ps, &traj).as_slice(),
        &dir.join("trajectory.csv"),
    )?;
    let cols = ["u_x1".to_string(), "max_abs_u".to_string()];
    let svg = render_plot(
        &table,
        dir,
        &PlotRequest {
            columns: &cols,
            log_y: true,
            envelope: Some(EnvelopeSpec {
                lambda_a: report.eigen.lambda_a,
                mu_min: g.mu_min(),
            }),
            title: "g25-decay".into(),
        },
    )?;
    write_file(&dir.join("plot.svg"), svg.as_bytes())?;

    let l2 = g.lp_norm(&ps.u0, 2.0)?;
    let eps_ref = epsilon0(
        presets::G25_REFERENCE_LAMBDA_A,
        ps.p,
        g.mu_min(),
        g.volume(),
    )?;
    let eps_own = report.thresholds.as_ref().map(|t| t.epsilon0);
    let envelope = decay_envelope_check(&ps, &traj, &report.eigen);

    let mut c = Checks(Vec::new());
    c.near(
        "exact",
        "u0_l2_norm",
        l2,
        presets::G25_REFERENCE_DECAY_L2,
        1e-4,
    );
    c.near(
        "exact",
        "epsilon0_from_reference_lambda",
        eps_ref,
        presets::G25_REFERENCE_EPSILON0,
        1e-3,
    );
    c.holds(
        "stand-in",
        "lambda_a",
        report.eigen.lambda_a,
        report.eigen.lambda_a > 0.0,
    );
    c.holds(
        "stand-in",
        "epsilon0",
        opt_or_nan(eps_own),
        eps_own.is_some_and(|e| l2 < e),
    );
    c.holds(
        "stand-in",
        "converged",
        traj.t_detect,
        traj.status == Status::Converged,
    );
    c.holds(
        "stand-in",
        "envelope_max_ratio",
        envelope.max_ratio,
        envelope.pass,
    );
    Ok(c.finish(Preset::G25Decay))
}

fn reproduce_single_node(dir: &Path, seed: Option<u64>) -> CliResult<Summary> {
    let mut c = Checks(Vec::new());
    for case in presets::single_node_suite() {
        let ps = &case.problem;
        let opts = IntegratorOptions {
            t_horizon: if case.exact_blowup.is_some() {
                2.0
            } else {
                5.0
            },
            ..Default::default()
        };
        let traj = run(
            ps,
            &opts,
            &dir.join(format!("{}.csv", case.name)),
            &dir.join(format!("{}.json", case.name)),
        )?;
        match case.exact_blowup {
            None => {
                let err = traj
                    .times
                    .iter()
                    .zip(&traj.states)
                    .map(|(&t, u)| (u.values()[0] - case.exact(t)).abs())
                    .fold(0.0, f64::max);
                c.holds(
                    "closed-form",
                    &format!("{}/max_error", case.name),
                    err,
                    err < 1e-6,
                );
            }
            Some(t_exact) => {
                let name = |s: &str| format!("{}/{s}", case.name);
                let detected = traj.status == Status::BlowUp
                    && traj.t_detect <= t_exact
                    && traj.t_detect > 0.99 * t_exact;
                c.holds("closed-form", &name("t_detect"), traj.t_detect, detected);
                let fit = fit_blowup_rate(&traj, ps.p, DEFAULT_RATE_WINDOW)?;
                c.near(
                    "closed-form",
                    &name("t_hat"),
                    fit.t_hat,
                    t_exact,
                    0.01 * t_exact,
                );
                let limit = 1.0 / (ps.p - 1.0);
                c.near(
                    "closed-form",
                    &name("rate_limit"),
                    fit.limit_estimate,
                    limit,
                    0.05 * limit,
                );
                let report = analyze(ps, &analysis_options(seed))?;
                let best = opt_or_nan(report.best_bound);
                c.holds(
                    "closed-form",
                    &name("best_bound_ge_exact"),
                    best,
                    best >= t_exact * (1.0 - 1e-12),
                );
            }
        }
    }
    Ok(c.finish(Preset::SingleNodeSuite))
}

pub fn reproduce(preset: &str, out_dir: &Path, seed: Option<u64>) -> CliResult<Summary> {
    let preset = Preset::from_name(preset)?;
    fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let summary = match preset {
        Preset::G25Blowup => reproduce_g25_blowup(out_dir, seed)?,
        Preset::G25Decay => reproduce_g25_decay(out_dir, seed)?,
        Preset::SingleNodeSuite => reproduce_single_node(out_dir, seed)?,
    };
    write_file(&out_dir.join("summary.json"), &to_json(&summary))?;
    Ok(summary)
}

pub fn summary_lines(summary: &Summary) -> Vec<String> {
    summary
        .checks
        .iter()
        .map(|c| {
            let reference = match (c.reference, c.tolerance) {
                (Some(r), Some(t)) => format!(" (reference {r} ± {t})"),
                _ => String::new(),
            };
            format!(
                "[{}] {:<11} {:<34} {}{}",
                if c.pass { "pass" } else { "FAIL" },
                c.group,
                c.name,
                c.value,
                reference
            )
        })
        .collect()
}
