//! The five commands. Each is a pure function of the config: artifacts,
//! summary and exit status depend on nothing else.

use immigration_core::diagnostics::{
    convergence_test_with, dri_mean_check, dri_path_check, intensity_check, laplace_functional_compare,
    overshoot_check, shift_invariance_check, stationary_base, transient_base, ConvergenceOptions, ConvergenceReport,
    DriReport, IntensityRow, LaplaceReport, OvershootReport, ShiftReport, Verdict, Warning, Z_99,
};
use immigration_core::kernels::Table;
use immigration_core::process::{replicate_key, window_key, FddSample, Mode};
use immigration_core::renewal::build_stationary_window;
use immigration_core::stats::normal_quantile;
use immigration_core::{Error as CoreError, InterarrivalLaw, Kernel, StreamKey, TruncationFailure};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{CliError, Exit};
use crate::output::{fmt_f64, fmt_label, OutputDir};
use crate::sampler::fdd_sample_parallel;

const TAG_DRI: u64 = 50;
const TAG_INTENSITY: u64 = 51;
const TAG_OVERSHOOT: u64 = 52;
const TAG_SHIFT: u64 = 53;
const TAG_LAPLACE: u64 = 54;

/// What a command reports on stdout.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub command: &'static str,
    pub status: &'static str,
    pub exit_code: u8,
    pub outputs: Vec<String>,
    pub message: String,
}

pub struct Outcome {
    pub exit: Exit,
    pub message: String,
}

impl Outcome {
    fn new(exit: Exit, message: impl Into<String>) -> Self {
        Outcome { exit, message: message.into() }
    }
}

pub fn status_name(exit: Exit) -> &'static str {
    match exit {
        Exit::Pass => "pass",
        Exit::Usage => "error",
        Exit::Reject => "reject",
        Exit::Warning => "warning",
    }
}

#[derive(Serialize)]
struct Spread {
    min: f64,
    max: f64,
    mean: f64,
}

fn spread(xs: &[f64]) -> Option<Spread> {
    if xs.is_empty() {
        return None;
    }
    Some(Spread {
        min: xs.iter().copied().fold(f64::INFINITY, f64::min),
        max: xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean: xs.iter().sum::<f64>() / xs.len() as f64,
    })
}

#[derive(Serialize)]
struct SampleMetadata {
    file: String,
    mode: Mode,
    rows: usize,
    c_used: Option<Spread>,
    truncation_bound: Option<Spread>,
}

impl SampleMetadata {
    fn new(file: &str, s: &FddSample) -> Self {
        SampleMetadata {
            file: file.to_string(),
            mode: s.mode,
            rows: s.values.rows(),
            c_used: spread(&s.c_used),
            truncation_bound: spread(&s.truncation_bounds),
        }
    }
}

#[derive(Serialize)]
struct Metadata<'a> {
    command: &'static str,
    version: &'static str,
    seed: u64,
    law: &'a InterarrivalLaw,
    kernel: Option<&'a Kernel>,
    u_grid: &'a [f64],
    n_replicates: usize,
    tol: f64,
    c_max: f64,
    max_points: usize,
    lattice_span: Option<f64>,
    fixed_discontinuities: Vec<f64>,
    samples: Vec<SampleMetadata>,
}

fn metadata<'a>(command: &'static str, config: &'a ExperimentConfig, samples: Vec<SampleMetadata>) -> Metadata<'a> {
    Metadata {
        command,
        version: env!("CARGO_PKG_VERSION"),
        seed: config.seed,
        law: &config.law,
        kernel: config.kernel.as_ref(),
        u_grid: &config.u_grid,
        n_replicates: config.n_replicates,
        tol: config.tol,
        c_max: config.c_max,
        max_points: config.max_points,
        lattice_span: config.law.lattice_span(),
        fixed_discontinuities: config.kernel.as_ref().map(|k| k.fixed_discontinuities()).unwrap_or_default(),
        samples,
    }
}

#[derive(Serialize)]
struct TruncationReport<'a> {
    replicate: Option<usize>,
    message: String,
    failure: &'a TruncationFailure,
}

fn replicate_index(e: &CoreError) -> Option<usize> {
    match e {
        CoreError::Replicate { index, .. } => Some(*index),
        _ => None,
    }
}

/// Transient fdd matrices, one CSV per `t` in `t_list`.
pub fn simulate(config: &ExperimentConfig, out: &mut OutputDir) -> Result<Outcome, CliError> {
    let kernel = config.kernel()?;
    let t_list = config.require_t_list()?;
    let opts = config.stationary_options();
    let mut samples = Vec::new();
    for (i, &t) in t_list.iter().enumerate() {
        log::info!("transient sample at t = {t}");
        let mode = Mode::Transient { t };
        let s = fdd_sample_parallel(&config.law, kernel, mode, &config.u_grid, config.n_replicates, transient_base(config.seed, i), &opts)?;
        let name = format!("transient_{i}.csv");
        out.write_matrix(&name, &config.u_grid, &s.values)?;
        samples.push(SampleMetadata::new(&name, &s));
    }
    out.write_json("metadata.json", &metadata("simulate", config, samples))?;
    Ok(Outcome::new(Exit::Pass, format!("{} transient sample(s) of {} replicates", t_list.len(), config.n_replicates)))
}

/// Stationary fdd matrix, plus the window of replicate 0 when asked.
pub fn stationary(config: &ExperimentConfig, out: &mut OutputDir, dump_window: bool) -> Result<Outcome, CliError> {
    let kernel = config.kernel()?;
    let opts = config.stationary_options();
    let base = stationary_base(config.seed);
    if dump_window {
        let c = config.window_c.unwrap_or_else(|| {
            config.u_grid.iter().fold(0.0f64, |m, u| m.max(u.abs())) + 10.0 * config.law.mean()
        });
        let w = build_stationary_window(&config.law, c, window_key(replicate_key(base, 0)))?;
        out.write_window("window.csv", &w)?;
    }
    let s = match fdd_sample_parallel(&config.law, kernel, Mode::Stationary, &config.u_grid, config.n_replicates, base, &opts) {
        Ok(s) => s,
        Err(e) => {
            if let CoreError::Truncation(f) = e.root_cause() {
                let report = TruncationReport { replicate: replicate_index(&e), message: e.to_string(), failure: f };
                out.write_json("truncation.json", &report)?;
                return Ok(Outcome::new(Exit::Reject, e.to_string()));
            }
            return Err(e.into());
        }
    };
    out.write_matrix("stationary.csv", &config.u_grid, &s.values)?;
    out.write_json("metadata.json", &metadata("stationary", config, vec![SampleMetadata::new("stationary.csv", &s)]))?;
    Ok(Outcome::new(Exit::Pass, format!("stationary sample of {} replicates", config.n_replicates)))
}

/// Transient against stationary comparisons at each `t`.
pub fn converge(config: &ExperimentConfig, out: &mut OutputDir) -> Result<Outcome, CliError> {
    let kernel = config.kernel()?;
    let t_list = config.require_t_list()?;
    let opts = ConvergenceOptions {
        n_permutations: config.n_permutations,
        stationary: config.stationary_options(),
        dri_k_max: config.dri.k_max,
        dri_grid_per_unit: config.dri.grid_per_unit,
        dri_n_mc: config.dri.n_mc,
    };
    let sampler = |mode: Mode, base: StreamKey| {
        log::info!("sampling {mode:?}");
        fdd_sample_parallel(&config.law, kernel, mode, &config.u_grid, config.n_replicates, base, &opts.stationary)
    };
    let report = convergence_test_with(
        &config.law,
        kernel,
        t_list,
        &config.u_grid,
        config.n_replicates,
        config.alpha,
        config.seed,
        &opts,
        &sampler,
    )?;
    for (i, c) in report.comparisons.iter().enumerate() {
        out.write_json(&format!("comparison_{i}.json"), c)?;
    }
    let mut header = vec!["t".to_string()];
    header.extend(config.u_grid.iter().map(|u| format!("ks_p_u={}", fmt_label(*u))));
    header.extend(["energy_p".to_string(), "reject".to_string()]);
    let rows: Vec<Vec<String>> = report
        .comparisons
        .iter()
        .map(|c| {
            let mut r = vec![fmt_f64(c.t)];
            r.extend(c.ks.iter().map(|k| fmt_f64(k.p_value)));
            r.push(fmt_f64(c.energy.p_value));
            r.push(c.reject.to_string());
            r
        })
        .collect();
    out.write_csv("summary.csv", &header, &rows)?;
    out.write_json("report.json", &report)?;
    Ok(converge_outcome(&report))
}

fn describe(w: &Warning) -> String {
    match w {
        Warning::LatticeLaw { span } => format!("interarrival law is lattice with span {span}"),
        Warning::DriDivergent => "mean integrability check points to divergence".into(),
        Warning::InfiniteExpectedLifetime => "kernel lifetime has infinite mean (E tau = inf)".into(),
        Warning::NonIntegrableKernel => "kernel is not integrable along renewal epochs".into(),
        Warning::StationaryFailure { message } => format!("stationary evaluation failed: {message}"),
    }
}

fn converge_outcome(report: &ConvergenceReport) -> Outcome {
    if !report.warnings.is_empty() {
        let text: Vec<String> = report.warnings.iter().map(describe).collect();
        return Outcome::new(Exit::Warning, format!("hypothesis warnings: {}", text.join("; ")));
    }
    match report.final_reject() {
        Some(false) => Outcome::new(Exit::Pass, "final t does not reject"),
        Some(true) => Outcome::new(Exit::Reject, "final t rejects"),
        None => Outcome::new(Exit::Warning, "no comparison was possible"),
    }
}

/// Both integrability criteria on paired paths.
pub fn dri(config: &ExperimentConfig, out: &mut OutputDir) -> Result<Outcome, CliError> {
    let kernel = config.kernel()?;
    let key = StreamKey::root(config.seed).child(TAG_DRI);
    let d = &config.dri;
    let mean = dri_mean_check(kernel, d.k_max, d.grid_per_unit, d.n_mc, key)?;
    let path = dri_path_check(kernel, d.k_max, d.n_mc, key)?;
    out.write_json("dri_mean.json", &mean)?;
    out.write_json("dri_path.json", &path)?;
    let header: Vec<String> =
        ["k", "mean_term", "mean_se", "mean_partial", "path_term", "path_se", "path_partial"].map(String::from).into();
    let rows: Vec<Vec<String>> = (0..d.k_max)
        .map(|k| {
            vec![
                k.to_string(),
                fmt_f64(mean.terms[k]),
                fmt_f64(mean.std_errors[k]),
                fmt_f64(mean.partial_sums[k]),
                fmt_f64(path.terms[k]),
                fmt_f64(path.std_errors[k]),
                fmt_f64(path.partial_sums[k]),
            ]
        })
        .collect();
    out.write_csv("dri_terms.csv", &header, &rows)?;
    Ok(dri_outcome(&mean, &path))
}

fn verdict_exit(v: Verdict) -> Exit {
    match v {
        Verdict::ConvergentEvidence => Exit::Pass,
        Verdict::DivergentEvidence => Exit::Reject,
        Verdict::Inconclusive => Exit::Warning,
    }
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::ConvergentEvidence => "convergent",
        Verdict::DivergentEvidence => "divergent",
        Verdict::Inconclusive => "inconclusive",
    }
}

fn dri_outcome(mean: &DriReport, path: &DriReport) -> Outcome {
    let (a, b) = (verdict_exit(mean.verdict), verdict_exit(path.verdict));
    let text = format!(
        "mean criterion {} (exit {}), path criterion {} (exit {})",
        verdict_name(mean.verdict),
        a.code(),
        verdict_name(path.verdict),
        b.code()
    );
    if a == b {
        Outcome::new(a, text)
    } else {
        Outcome::new(Exit::Warning, format!("criteria disagree: {text}"))
    }
}

#[derive(Serialize)]
struct Check<T> {
    pass: bool,
    level: f64,
    result: T,
}

#[derive(Serialize)]
struct LaplaceCheck {
    difference: f64,
    allowed: f64,
    report: LaplaceReport,
}

#[derive(Serialize)]
struct PointProcessReport<'a> {
    law: &'a InterarrivalLaw,
    seed: u64,
    alpha: f64,
    note: &'static str,
    warnings: Vec<Warning>,
    intensity: Check<Vec<IntensityRow>>,
    overshoot: Check<OvershootReport>,
    shift_invariance: Check<ShiftReport>,
    laplace: Check<LaplaceCheck>,
}

/// Intensity, overshoot, shift-invariance and Laplace-functional checks.
pub fn pointprocess(config: &ExperimentConfig, out: &mut OutputDir) -> Result<Outcome, CliError> {
    let law = &config.law;
    let pp = &config.pointprocess;
    let root = StreamKey::root(config.seed);
    let h = Table::new(pp.laplace_h.breakpoints.clone(), pp.laplace_h.values.clone()).map_err(|e| {
        CliError::Config { path: "pointprocess.laplace_h".into(), message: e.to_string() }
    })?;
    // Four checks, each at alpha / 4.
    let level = config.alpha / 4.0;

    let rows = intensity_check(law, &pp.intervals, pp.n_windows, root.child(TAG_INTENSITY))?;
    let z_max = normal_quantile(1.0 - level / (2.0 * rows.len().max(1) as f64));
    let intensity = Check { pass: rows.iter().all(|r| r.z_score.abs() <= z_max), level, result: rows };

    let horizon = pp.horizon.unwrap_or(50.0 * law.mean());
    let o = overshoot_check(law, horizon, pp.n_overshoot, root.child(TAG_OVERSHOOT))?;
    let overshoot = Check { pass: o.ks.p_value >= level, level, result: o };

    let s = shift_invariance_check(law, pp.shift, pp.shift_interval, pp.n_windows, root.child(TAG_SHIFT))?;
    let shift_invariance = Check { pass: s.test.p_value >= level, level, result: s };

    let l = laplace_functional_compare(law, &h, pp.laplace_t, pp.laplace_n, root.child(TAG_LAPLACE))?;
    let se = ((l.transient_halfwidth / Z_99).powi(2) + (l.stationary_halfwidth / Z_99).powi(2)).sqrt();
    let allowed = normal_quantile(1.0 - level / 2.0) * se;
    let difference = (l.transient - l.stationary).abs();
    let laplace = Check { pass: difference <= allowed, level, result: LaplaceCheck { difference, allowed, report: l } };

    let warnings: Vec<Warning> = law.lattice_span().map(|span| Warning::LatticeLaw { span }).into_iter().collect();
    let report = PointProcessReport {
        law,
        seed: config.seed,
        alpha: config.alpha,
        note: "each of the four checks runs at level alpha/4 (Bonferroni)",
        warnings,
        intensity,
        overshoot,
        shift_invariance,
        laplace,
    };
    out.write_json("pointprocess.json", &report)?;
    let failed: Vec<&str> = [
        ("intensity", report.intensity.pass),
        ("overshoot", report.overshoot.pass),
        ("shift_invariance", report.shift_invariance.pass),
        ("laplace", report.laplace.pass),
    ]
    .into_iter()
    .filter(|(_, p)| !p)
    .map(|(n, _)| n)
    .collect();
    Ok(if !report.warnings.is_empty() {
        let text: Vec<String> = report.warnings.iter().map(describe).collect();
        Outcome::new(Exit::Warning, format!("hypothesis warnings: {}; failed checks: {:?}", text.join("; "), failed))
    } else if failed.is_empty() {
        Outcome::new(Exit::Pass, "all checks pass")
    } else {
        Outcome::new(Exit::Reject, format!("failed checks: {}", failed.join(", ")))
    })
}
