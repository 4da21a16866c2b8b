//! Scenario runs and verification suites behind the command line.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{
    Formulation, InitialConfig, InitialSource, KernelConfig, OutputConfig, Profile, RunConfig, ScenarioConfig, StabilityConfig, VectorSpec,
};
use crate::error::{Error, Result};
use crate::gallery;
use crate::history::{evolve_history, history_grid, init_history, ExtendedHistoryVector, HistoryOptions};
use crate::io::{self, Echo};
use crate::kernel::{build_kernel, check_decay_conditions, sample_grid, AlphaMode, Family, Kernel, KernelSpec};
use crate::maps::{
    gamma_map, lambda_map, lambda_midpoint, lambda_via_derivative, pi_contraction, proper_initial_state, PastHistory, StateFunction,
};
use crate::quad::{GaussLegendre, Grid};
use crate::spectral::{build_operator, ModalOperator, OperatorSpec, Weight, WeightedField};
use crate::stability::{fit_decay_rate, stability_constants, verify_inequalities, DecayReport};
use crate::state::{evolve_state, state_grid, ExtendedStateVector, StateOptions};
use crate::tolerances::{COMPARE_GAP, C_FD, DECAY_R_SQUARED, EPS_TAIL, FIT_SKIP_FRACTION, MARGIN_FRACTION, PI_CONTRACTION_SLACK};
use crate::volterra::{solve_direct, step_count, InitialState, Trajectory};

/// Kernel, operator and the initial data every formulation needs.
pub struct Prepared {
    pub kernel: Kernel,
    pub op: ModalOperator,
    pub u0: Vec<f64>,
    pub v0: Vec<f64>,
    pub t_end: f64,
    pub dt: f64,
    pub steps: usize,
    /// Present only for history sources.
    pub eta0: Option<WeightedField>,
    /// F₀ at t_j = jΔt for j up to the longer of the run and the state grid.
    pub f0: StateFunction,
    pub xi0: WeightedField,
    pub snapshot_steps: Vec<usize>,
    pub echo: Echo,
}

fn weights(w: &Option<Vec<f64>>, u0: &[f64]) -> Result<Vec<f64>> {
    match w {
        None => Ok(u0.to_vec()),
        Some(w) if w.len() == u0.len() => Ok(w.clone()),
        Some(w) => Err(Error::Config(format!("weights have {} entries, operator has {} modes", w.len(), u0.len()))),
    }
}

/// Builds everything a run needs; relative paths resolve against `base`.
pub fn prepare(cfg: &ScenarioConfig, base: &Path) -> Result<Prepared> {
    cfg.validate()?;
    let kernel = build_kernel(&cfg.kernel_spec(base)?, cfg.kernel.eps_tail)?;
    let op = build_operator(&cfg.operator)?;
    let n = op.n();
    let u0 = cfg.initial.u0.resolve(n)?;
    let v0 = cfg.initial.v0.resolve(n)?;
    let (t_end, dt) = (cfg.run.t_end, cfg.run.dt);
    let steps = step_count(t_end, dt)?;
    let sg = state_grid(&kernel, dt)?;
    let times: Vec<f64> = (0..=steps.max(sg.cells)).map(|j| j as f64 * dt).collect();
    let mu = |s: f64| kernel.mu(s);

    let (eta0, f0, xi0) = match &cfg.initial.source {
        InitialSource::History { profile, csv, weights: w } => {
            let hg = history_grid(&kernel, t_end, dt)?;
            let phi = match (profile, csv) {
                (Some(p), _) => PastHistory::from_profile(&weights(w, &u0)?, hg, |s| p.eval(s, mu)),
                (None, Some(path)) => io::read_history(&base.join(path), hg)?,
                (None, None) => unreachable!("validated"),
            };
            if phi.values.len() != n {
                return Err(Error::Input(format!("history has {} modes, operator has {n}", phi.values.len())));
            }
            let eta0 = init_history(&u0, &phi)?;
            let f0 = lambda_map(&phi, &kernel, &times);
            let xi0 = proper_initial_state(&u0, &f0, &kernel, sg)?;
            (Some(eta0), f0, xi0)
        }
        InitialSource::StateFunction { csv } => {
            let mut f0 = io::read_state_function(&base.join(csv))?;
            if f0.modes() != n {
                return Err(Error::Input(format!("F0 has {} modes, operator has {n}", f0.modes())));
            }
            if f0.times.len() < times.len() {
                return Err(Error::MissingSamples(format!("F0 has {} samples, the run needs {}", f0.times.len(), times.len())));
            }
            f0.times.truncate(times.len());
            f0.values.iter_mut().for_each(|r| r.truncate(times.len()));
            let xi0 = proper_initial_state(&u0, &f0, &kernel, sg)?;
            (None, f0, xi0)
        }
        InitialSource::ProperState { profile, weights: w } => {
            let xi0 = WeightedField::from_profile(&weights(w, &u0)?, sg, Weight::Nu, |s| profile.eval(s, mu));
            // F₀ = Γξ₀ + M(t)u₀
            let mut f0 = gamma_map(&xi0, &times);
            for (row, u) in f0.values.iter_mut().zip(&u0) {
                for (x, t) in row.iter_mut().zip(&times) {
                    *x += kernel.tail(*t) * u;
                }
            }
            (None, f0, xi0)
        }
    };

    let mut echo: Echo = vec![
        ("memevo".into(), env!("CARGO_PKG_VERSION").into()),
        ("kernel".into(), serde_json::to_string(&KernelSpec { family: kernel.family().clone(), alpha: cfg.kernel.alpha.clone() }).unwrap()),
        ("alpha".into(), kernel.alpha.to_string()),
        ("m0".into(), kernel.m0().to_string()),
        ("ell_eff".into(), kernel.ell_eff().to_string()),
        ("eps_tail".into(), kernel.eps_tail.to_string()),
        ("operator".into(), serde_json::to_string(&cfg.operator).unwrap()),
        ("u0".into(), serde_json::to_string(&u0).unwrap()),
        ("v0".into(), serde_json::to_string(&v0).unwrap()),
        ("t_end".into(), t_end.to_string()),
        ("dt".into(), dt.to_string()),
        ("stride".into(), cfg.output.stride.to_string()),
        ("c_fd".into(), C_FD.to_string()),
        ("fit_skip_fraction".into(), FIT_SKIP_FRACTION.to_string()),
        ("compare_gap".into(), COMPARE_GAP.to_string()),
    ];
    if let Some(class) = f0.class_tag {
        echo.push(("f0_class".into(), serde_json::to_string(&class).unwrap().trim_matches('"').to_string()));
    }
    let snapshot_steps = cfg.run.snapshot_times.iter().map(|t| (t / dt).round() as usize).collect();
    Ok(Prepared { kernel, op, u0, v0, t_end, dt, steps, eta0, f0, xi0, snapshot_steps, echo })
}

#[derive(Clone, Debug, Serialize)]
pub struct PairGap {
    pub a: String,
    pub b: String,
    pub gap: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Comparison {
    pub pairs: Vec<PairGap>,
    pub tolerance: f64,
    /// Formulations that could not run from the given initial source.
    pub skipped: Vec<String>,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub formulations: Vec<String>,
    pub files: Vec<String>,
    pub comparison: Option<Comparison>,
    pub decay: Option<DecayReport>,
    pub margins_min_fraction: Option<f64>,
    /// Set by the state run; see `state::is_rough`.
    pub rough_initial_state: Option<bool>,
    pub pass: bool,
}

/// Runs the requested formulations and writes their artifacts into `out`.
///
/// Stability analysis runs along the state formulation when `stability`
/// is given; it adds `decay_report.json` and `margins.csv`.
pub fn run_scenario(
    p: &Prepared,
    formulation: Formulation,
    stability: Option<&StabilityConfig>,
    output: &OutputConfig,
    out: &Path,
) -> Result<RunSummary> {
    let (want_direct, want_history, want_state) = match formulation {
        Formulation::Direct => (true, false, false),
        Formulation::History => (false, true, false),
        Formulation::State => (false, false, true),
        Formulation::CompareAll => {
            let normalized = p.kernel.require_normalized().is_ok();
            (true, p.eta0.is_some() && normalized, normalized)
        }
    };
    if formulation == Formulation::History && p.eta0.is_none() {
        return Err(Error::Config("the history formulation needs a history source".into()));
    }
    let snapshot_steps = p.snapshot_steps.clone();
    let mut files = Vec::new();
    let mut runs: Vec<(String, Trajectory)> = Vec::new();
    let mut write = |name: &str| -> PathBuf {
        files.push(name.to_string());
        out.join(name)
    };
    let stride = output.stride;

    if output.write_f0 {
        io::write_state_function(&write("f0.csv"), &p.f0, &p.echo)?;
    }
    if want_direct {
        let s = InitialState { u0: p.u0.clone(), v0: p.v0.clone(), f0: p.f0.clone() };
        let traj = solve_direct(&s, &p.op, &p.kernel, p.t_end, p.dt)?;
        io::write_trajectory(&write("trajectory_direct.csv"), &traj, stride, &p.echo)?;
        runs.push(("direct".into(), traj));
    }
    if want_history {
        let z = ExtendedHistoryVector { u: p.u0.clone(), v: p.v0.clone(), eta: p.eta0.clone().unwrap() };
        let opts = HistoryOptions { snapshot_steps: snapshot_steps.clone(), ..Default::default() };
        let run = evolve_history(&z, &p.op, &p.kernel, p.t_end, p.dt, &opts)?;
        io::write_trajectory(&write("trajectory_history.csv"), &run.traj, stride, &p.echo)?;
        io::write_energy(&write("energy_history.csv"), &run.traj.times, &run.energy, None, stride, &p.echo)?;
        if !run.snapshots.is_empty() {
            let fields: Vec<(f64, &WeightedField)> = run.snapshots.iter().map(|(n, f)| (*n as f64 * p.dt, f)).collect();
            io::write_fields(&write("snapshots_history.csv"), &fields, &p.echo)?;
        }
        runs.push(("history".into(), run.traj));
    }
    let mut decay = None;
    let mut margins_min_fraction = None;
    let mut rough_initial_state = None;
    let mut pass = true;
    if want_state {
        let beta = stability.and_then(|s| s.beta).unwrap_or_else(|| p.kernel.default_beta());
        let z = ExtendedStateVector { u: p.u0.clone(), v: p.v0.clone(), xi: p.xi0.clone() };
        let opts = StateOptions { snapshot_steps: snapshot_steps.clone(), beta: Some(beta), ..Default::default() };
        let run = evolve_state(&z, &p.op, &p.kernel, p.t_end, p.dt, &opts)?;
        rough_initial_state = Some(run.diag.rough_initial_state);
        io::write_trajectory(&write("trajectory_state.csv"), &run.traj, stride, &p.echo)?;
        io::write_energy(&write("energy_state.csv"), &run.traj.times, &run.diag.energy, Some(&run.diag.rate), stride, &p.echo)?;
        if !run.snapshots.is_empty() {
            let fields: Vec<(f64, &WeightedField)> = run.snapshots.iter().map(|(n, f)| (*n as f64 * p.dt, f)).collect();
            io::write_fields(&write("snapshots_state.csv"), &fields, &p.echo)?;
        }
        if let Some(s) = stability {
            let c = stability_constants(&p.kernel, &p.op, beta, s.delta)?;
            let rep = verify_inequalities(&run.diag, p.dt, &c)?;
            io::write_margins(&write("margins.csv"), &rep, &p.echo)?;
            let fit = fit_decay_rate(&run.traj.times, &run.diag.energy)?;
            let dc = check_decay_conditions(&p.kernel, s.delta, 1.0, &sample_grid(&p.kernel, 200), &sample_grid(&p.kernel, 50))?;
            let report = DecayReport::new(&fit, &c, dc.suf_holds, dc.mu_holds, Some("margins.csv".into()));
            io::write_json(&write("decay_report.json"), &report)?;
            let frac = rep.min_fraction_ok();
            pass &= report.decaying && report.omega_fit > 0.0 && report.r_squared >= DECAY_R_SQUARED && frac >= MARGIN_FRACTION;
            decay = Some(report);
            margins_min_fraction = Some(frac);
        }
        runs.push(("state".into(), run.traj));
    }

    let comparison = (formulation == Formulation::CompareAll).then(|| {
        let mut pairs = Vec::new();
        for i in 0..runs.len() {
            for j in i + 1..runs.len() {
                pairs.push(PairGap { a: runs[i].0.clone(), b: runs[j].0.clone(), gap: runs[i].1.relative_linf_gap(&runs[j].1) });
            }
        }
        let ok = pairs.iter().all(|g| g.gap <= COMPARE_GAP);
        let skipped = [("history", want_history), ("state", want_state)].iter().filter(|(_, w)| !w).map(|(n, _)| n.to_string()).collect();
        Comparison { pairs, tolerance: COMPARE_GAP, skipped, pass: ok }
    });
    if let Some(c) = &comparison {
        pass &= c.pass;
        io::write_json(&write("comparison.json"), c)?;
    }
    files.push("summary.json".into());
    let summary = RunSummary {
        formulations: runs.into_iter().map(|(n, _)| n).collect(),
        files,
        comparison,
        decay,
        margins_min_fraction,
        rough_initial_state,
        pass,
    };
    io::write_json(&out.join("summary.json"), &summary)?;
    Ok(summary)
}

/// Loads, prepares and runs a config file.
pub fn run_config(
    cfg: &ScenarioConfig,
    base: &Path,
    formulation: Formulation,
    stability: Option<&StabilityConfig>,
    out: &Path,
) -> Result<RunSummary> {
    let p = prepare(cfg, base)?;
    run_scenario(&p, formulation, stability, &cfg.output, out)
}

// ---------------------------------------------------------------------------
// Verification suites

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// Threshold the value is compared against.
    pub limit: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Self { name: name.into(), value, limit, pass: value <= limit }
    }

    fn at_least(name: &str, value: f64, limit: f64) -> Self {
        Self { name: name.into(), value, limit, pass: value >= limit }
    }

    fn holds(name: &str, ok: bool) -> Self {
        let v = if ok { 1.0 } else { 0.0 };
        Self { name: name.into(), value: v, limit: 1.0, pass: ok }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub suite: String,
    pub checks: Vec<Check>,
    /// Full record of the underlying computation.
    pub details: serde_json::Value,
    pub pass: bool,
}

impl Verdict {
    fn new(suite: &str, checks: Vec<Check>, details: serde_json::Value) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        Self { suite: suite.into(), checks, details, pass }
    }
}

pub const SUITES: [&str; 9] = ["kernel", "pi", "tempo", "exnn", "kappa", "cantor", "exinj", "muntz", "decay"];

/// Exponential kernel a = κ = 1, four Dirichlet modes, seeded (u₀, v₀) and
/// φ₀(s) = e^{−s}u₀, with stability analysis at δ = 1.
pub fn builtin_decay_config(t_end: f64, dt: f64) -> ScenarioConfig {
    ScenarioConfig {
        kernel: KernelConfig {
            family: Some(Family::Exponential { a: 1.0, kappa: 1.0 }),
            table_csv: None,
            alpha: AlphaMode::Normalized,
            eps_tail: EPS_TAIL,
        },
        operator: OperatorSpec::DirichletLaplacianInterval { n: 4 },
        initial: InitialConfig {
            u0: VectorSpec::Random { seed: 1, amplitude: 1.0 },
            v0: VectorSpec::Random { seed: 2, amplitude: 1.0 },
            source: InitialSource::History { profile: Some(Profile::Exponential { rate: 1.0 }), csv: None, weights: None },
        },
        run: RunConfig { formulation: Formulation::State, t_end, dt, snapshot_times: vec![] },
        stability: Some(StabilityConfig { delta: 1.0, beta: None }),
        output: OutputConfig::default(),
    }
}

/// Runs a named suite. `cfg` supplies the kernel for `kernel` and the whole
/// scenario for `decay`; built-in defaults are used otherwise.
pub fn verify_suite(name: &str, cfg: Option<(&ScenarioConfig, &Path)>, out: &Path) -> Result<Verdict> {
    match name {
        "kernel" => {
            let k = match cfg {
                Some((c, base)) => build_kernel(&c.kernel_spec(base)?, c.kernel.eps_tail)?,
                None => build_kernel(&KernelSpec::normalized(Family::Exponential { a: 1.0, kappa: 2.0 }), EPS_TAIL)?,
            };
            Ok(kernel_suite(&k))
        }
        "pi" => pi_suite(),
        "tempo" => {
            let k = build_kernel(&KernelSpec::normalized(Family::Linear), EPS_TAIL)?;
            let g = Grid::covering(1.0, 1e-3)?;
            let gap = [0.0, 0.1, 0.25, 0.5, 0.75, 0.9]
                .iter()
                .map(|&t| (lambda_midpoint(&k, |_| 1.0, &g, t) - lambda_via_derivative(&k, |_| 1.0, t, 32)).abs())
                .fold(0.0, f64::max);
            Ok(Verdict::new("tempo", vec![Check::at_most("two_route_gap", gap, 1e-6)], serde_json::Value::Null))
        }
        "exnn" => {
            let s = gallery::exnn_build(&[1.0, 1.0], &[1.0, 2.0])?;
            let op = build_operator(&OperatorSpec::DirichletLaplacianInterval { n: 2 })?;
            let v = gallery::exnn_check(&s, &op, &[1.0, -0.5], &[0.3, 0.2], 5.0, 1e-3)?;
            let checks = vec![
                Check::at_most("det_product_error", (s.det_product + 0.5).abs(), 1e-10),
                Check::at_most("det_gap", s.det_gap, 1e-10),
                Check::at_most("x_error", (s.x[0] - 3.0).abs().max((s.x[1] + 1.0).abs()), 1e-10),
                Check::at_most("pi_gap", v.pi_gap, 1e-6),
                Check::at_most("trajectory_gap", v.trajectory_gap, 1e-3),
            ];
            Ok(Verdict::new("exnn", checks, details(&v)))
        }
        "kappa" => {
            let v = gallery::kappa_constant(1e-8)?;
            let checks = vec![Check::at_least("kappa_lower", v, 0.27), Check::at_most("kappa_upper", v, 0.29)];
            Ok(Verdict::new("kappa", checks, serde_json::json!({ "kappa": v })))
        }
        "cantor" => {
            let r = gallery::cantor_sequence(6)?;
            Ok(Verdict::new("cantor", vec![Check::holds("cauchy_with_certificates", r.pass)], details(&r)))
        }
        "exinj" => {
            let r = gallery::exinj_suite()?;
            let checks = vec![
                Check::holds("exinj_has_limit", r.exinj.observed == r.exinj.expected),
                Check::at_most("exinj_limit_gap", (r.exinj_last - r.exinj_limit).abs(), 1e-4),
                Check::holds("case_ii_bounded_without_limit", r.case_ii.observed == r.case_ii.expected),
                Check::holds("l1strict_unbounded", r.l1strict.observed == r.l1strict.expected),
                Check::holds("all", r.pass),
            ];
            Ok(Verdict::new("exinj", checks, details(&r)))
        }
        "muntz" => {
            let r = gallery::muntz_witness(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0], 1e-2)?;
            Ok(Verdict::new("muntz", vec![Check::holds("witness", r.pass)], details(&r)))
        }
        "decay" => {
            let owned;
            let (c, base) = match cfg {
                Some(x) => x,
                None => {
                    owned = builtin_decay_config(40.0, 2e-3);
                    (&owned, Path::new("."))
                }
            };
            let stab = c.stability.clone().unwrap_or(StabilityConfig { delta: 1.0, beta: None });
            let s = run_config(c, base, Formulation::State, Some(&stab), out)?;
            let d = s.decay.clone().unwrap();
            let checks = vec![
                Check::at_least("omega_fit_positive", d.omega_fit, f64::MIN_POSITIVE),
                Check::at_least("r_squared", d.r_squared, DECAY_R_SQUARED),
                Check::at_least("omega_fit_over_proof", d.omega_fit - d.omega_proof, 0.0),
                Check::holds("suf", d.suf),
                Check::holds("mu", d.mu_cond),
                Check::at_least("margin_fraction", s.margins_min_fraction.unwrap(), MARGIN_FRACTION),
            ];
            Ok(Verdict::new("decay", checks, details(&s)))
        }
        other => Err(Error::Config(format!("unknown suite `{other}`; known: {}", SUITES.join(", ")))),
    }
}

fn details<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).unwrap_or_default()
}

/// Identities every kernel must satisfy, plus "μ′ + δμ ≤ 0 implies μ(σ+s) ≤ e^{−δσ}μ(s)"
/// at the largest δ for which the first holds on the sample grid.
pub fn kernel_suite(k: &Kernel) -> Verdict {
    let end = k.ell_eff();
    let s: Vec<f64> = sample_grid(k, 200).into_iter().filter(|x| *x < 0.95 * end).collect();
    let nu_mu = s.iter().map(|&x| (k.nu(x) * k.mu(x) - 1.0).abs()).fold(0.0, f64::max);
    let dnu = s
        .iter()
        .map(|&x| {
            let h = 1e-4 * x.min(end - x);
            let fd = (k.nu(x + h) - k.nu(x - h)) / (2.0 * h);
            (fd - k.dnu(x)).abs() / k.dnu(x).abs().max(k.nu(x))
        })
        .fold(0.0, f64::max);
    let gl = GaussLegendre::new(16);
    let h = end / 200.0;
    let tail = s
        .iter()
        .map(|&x| {
            let breaks: Vec<f64> = (0..=8).map(|i| x + h * i as f64 / 8.0).collect();
            (k.tail(x) - k.tail(x + h) - gl.integrate_panels(|y| k.mu(y), &breaks)).abs() / k.m0()
        })
        .fold(0.0, f64::max);
    let delta_star = s.iter().filter(|&&x| k.mu(x) > 0.0).map(|&x| -k.dmu(x) / k.mu(x)).fold(f64::INFINITY, f64::min);
    let mut checks = vec![
        Check::at_most("nu_times_mu", nu_mu, 1e-12),
        Check::at_most("dnu_vs_difference", dnu, 1e-6),
        Check::at_most("tail_vs_quadrature", tail, 1e-8),
    ];
    let mut details = serde_json::json!({ "m0": k.m0(), "alpha": k.alpha, "ell_eff": end, "delta_star": delta_star });
    if delta_star > 0.0 {
        let delta = delta_star * (1.0 - 1e-9);
        match check_decay_conditions(k, delta, 1.0, &sample_grid(k, 200), &sample_grid(k, 50)) {
            Ok(dc) => {
                checks.push(Check::holds("suf_implies_mu", !dc.suf_holds || dc.mu_holds));
                details["suf"] = dc.suf_holds.into();
                details["mu"] = dc.mu_holds.into();
            }
            Err(e) => checks.push(Check { name: format!("decay_conditions: {e}"), value: f64::NAN, limit: 1.0, pass: false }),
        }
    }
    Verdict::new("kernel", checks, details)
}

/// ‖Πη‖ ≤ ‖η‖ on 100 seeded random histories and equality on constants.
fn pi_suite() -> Result<Verdict> {
    let k = build_kernel(&KernelSpec::normalized(Family::Exponential { a: 1.0, kappa: 1.0 }), EPS_TAIL)?;
    let op = build_operator(&OperatorSpec::DirichletLaplacianInterval { n: 3 })?;
    let g = Grid::covering(2.0 * k.l_trunc, 1e-2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..100 {
        let values = (0..3).map(|_| (0..g.cells).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let (a, b) = pi_contraction(&WeightedField { values, grid: g, weight: Weight::Mu }, &op, &k)?;
        worst = worst.max(a - b);
    }
    let fine = Grid::covering(2.0 * k.l_trunc, 1e-3)?;
    let (a, b) = pi_contraction(&WeightedField::from_profile(&[0.7, -1.1, 0.4], fine, Weight::Mu, |_| 1.0), &op, &k)?;
    let checks = vec![
        Check::at_most("contraction_excess", worst, PI_CONTRACTION_SLACK),
        Check::at_most("constant_equality_gap", (a - b).abs() / b, 1e-8),
    ];
    Ok(Verdict::new("pi", checks, serde_json::Value::Null))
}
