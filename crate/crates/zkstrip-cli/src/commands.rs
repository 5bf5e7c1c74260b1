//! The five subcommands: run, check-data, verify-inequalities,
//! fit-decay and converge. Exit codes: 0 success, 1 configuration or
//! gate failure, 2 numerical blow-up.

use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use zkstrip::error::Error as ZkError;
use zkstrip::experiments::{
    galerkin_convergence, l2_balance_residual, run_decay_experiment, run_monitored,
    verify_inequalities, BalanceSample, DecayFit, InequalityContext,
    InequalityReport, TrialMargins,
};
use zkstrip::functionals::{
    check_decay_conditions, ConditionReport, DecayGates,
};
use zkstrip::StripGrid;

use crate::config::ResolvedConfig;
use crate::output::{series_csv, write_atomic, Manifest};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_BLOWUP: i32 = 2;

/// Maps a solver error to the documented exit code.
fn exit_code_for(e: &ZkError) -> i32 {
    match e {
        ZkError::BlowUp { .. } => EXIT_BLOWUP,
        _ => EXIT_CONFIG,
    }
}

fn ensure_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

#[derive(Serialize)]
struct RunSummary {
    l2_initial: f64,
    l2_final: f64,
    max_balance_residual: Option<f64>,
    snapshots: usize,
    steps_per_snapshot: usize,
    runtime_sec: f64,
}

pub fn cmd_run(
    cfg: ResolvedConfig,
    out: &Path,
    seed: u64,
    threads: usize,
    stride: Option<usize>,
) -> i32 {
    let mut cfg = cfg;
    if let Some(s) = stride {
        cfg.stride = s.max(1);
    }
    if let Err(e) = ensure_out(out) {
        eprintln!("error: {e:#}");
        return EXIT_CONFIG;
    }
    let manifest = Manifest::new("run", cfg.clone(), seed, threads);
    let exp = cfg.to_experiment();
    let start = Instant::now();
    match run_monitored(&exp) {
        Ok(run) => {
            let csv = series_csv(&run.reports);
            let samples: Vec<BalanceSample> =
                run.reports.iter().map(BalanceSample::from_report).collect();
            let summary = RunSummary {
                l2_initial: run.reports.first().map(|r| r.l2).unwrap_or(0.0),
                l2_final: run.reports.last().map(|r| r.l2).unwrap_or(0.0),
                max_balance_residual: l2_balance_residual(&samples).ok(),
                snapshots: run.reports.len(),
                steps_per_snapshot: exp.stride,
                runtime_sec: start.elapsed().as_secs_f64(),
            };
            let mut manifest = manifest;
            if let Err(e) = write_outputs(out, &csv, &summary, &mut manifest) {
                eprintln!("error: {e:#}");
                return EXIT_CONFIG;
            }
            if let Err(e) = manifest.finish(out, EXIT_OK) {
                eprintln!("error: {e:#}");
                return EXIT_CONFIG;
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            let code = exit_code_for(&e);
            let _ = manifest.finish(out, code);
            code
        }
    }
}

fn write_outputs<S: Serialize>(
    out: &Path,
    csv: &str,
    summary: &S,
    manifest: &mut Manifest,
) -> Result<()> {
    let csv_path = out.join("series.csv");
    write_atomic(&csv_path, csv)?;
    let sum_path = out.join("summary.json");
    write_atomic(&sum_path, &serde_json::to_string_pretty(summary)?)?;
    manifest.outputs = vec!["series.csv".into(), "summary.json".into()];
    Ok(())
}

#[derive(Serialize)]
struct GateJson {
    u0_l2: f64,
    threshold_32: f64,
    j: f64,
    k0: f64,
    k_threshold: f64,
    l2_ok: bool,
    k0_ok: bool,
    j_finite_ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    decay: Option<DecayJson>,
    pass: bool,
}

#[derive(Serialize)]
struct DecayJson {
    k: f64,
    cs2: f64,
    cs2_threshold: f64,
    k_cap: f64,
    j_exp: f64,
    cs2_ok: bool,
    k_ok: bool,
    finite_ok: bool,
}

impl GateJson {
    fn from_report(r: &ConditionReport) -> Self {
        GateJson {
            u0_l2: r.u0_l2,
            threshold_32: r.threshold_32,
            j: r.j,
            k0: r.k0,
            k_threshold: r.k_threshold,
            l2_ok: r.l2_ok,
            k0_ok: r.k0_ok,
            j_finite_ok: r.j_finite_ok,
            decay: r.decay.as_ref().map(|g: &DecayGates| DecayJson {
                k: g.k,
                cs2: g.cs2,
                cs2_threshold: g.cs2_threshold,
                k_cap: g.k_cap,
                j_exp: g.j_exp,
                cs2_ok: g.cs2_ok,
                k_ok: g.k_ok,
                finite_ok: g.finite_ok,
            }),
            pass: r.pass,
        }
    }
}

pub fn cmd_check_data(cfg: ResolvedConfig) -> i32 {
    let exp = cfg.to_experiment();
    let u0 = match exp.build_initial() {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    // decay gates need Cs^2: supplied, or estimated over a short run
    let cs2 = match cfg.cs2 {
        Some(v) => v,
        None => match zkstrip::experiments::estimate_cs2(&exp, 5.0) {
            Ok(v) => v,
            Err(e) => {
                eprintln!("error: {e}");
                return exit_code_for(&e);
            }
        },
    };
    let report = match check_decay_conditions(&u0, exp.k, cs2) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    match serde_json::to_string_pretty(&GateJson::from_report(&report)) {
        Ok(s) => println!("{s}"),
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    }
    if report.pass {
        EXIT_OK
    } else {
        EXIT_CONFIG
    }
}

#[derive(Serialize)]
struct InequalityJson {
    trials: u64,
    seed: u64,
    worst_steklov_margin: f64,
    worst_l4_rel_margin: f64,
    worst_l8_rel_margin: f64,
    worst_sup_gap: f64,
    pass: bool,
}

/// Parallel variant of the randomized suite: trials are addressed by
/// `(seed, index)`, and the min-reductions are order-independent, so
/// any thread count produces identical margins.
fn verify_parallel(grid: StripGrid, seed: u64, trials: u64, threads: usize) -> InequalityReport {
    let ctx = InequalityContext::new(grid);
    let threads = threads.max(1).min(trials.max(1) as usize);
    let merge = |report: &mut InequalityReport, m: &TrialMargins| {
        report.pass &= m.pass();
        report.worst_steklov_margin = report.worst_steklov_margin.min(m.steklov_margin);
        report.worst_l4_rel_margin = report.worst_l4_rel_margin.min(m.l4_margin / m.l4_rhs);
        report.worst_l8_rel_margin = report.worst_l8_rel_margin.min(m.l8_margin / m.l8_rhs);
        report.worst_sup_gap = report.worst_sup_gap.min(m.sup_gap);
    };
    let empty = InequalityReport {
        trials,
        worst_steklov_margin: f64::INFINITY,
        worst_l4_rel_margin: f64::INFINITY,
        worst_l8_rel_margin: f64::INFINITY,
        worst_sup_gap: f64::INFINITY,
        pass: true,
    };
    let partials: Vec<InequalityReport> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..threads)
            .map(|t| {
                let ctx = &ctx;
                scope.spawn(move || {
                    let mut local = empty;
                    let mut idx = t as u64;
                    while idx < trials {
                        let m = ctx.trial(seed, idx);
                        merge(&mut local, &m);
                        idx += threads as u64;
                    }
                    local
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut total = empty;
    for p in partials {
        total.pass &= p.pass;
        total.worst_steklov_margin = total.worst_steklov_margin.min(p.worst_steklov_margin);
        total.worst_l4_rel_margin = total.worst_l4_rel_margin.min(p.worst_l4_rel_margin);
        total.worst_l8_rel_margin = total.worst_l8_rel_margin.min(p.worst_l8_rel_margin);
        total.worst_sup_gap = total.worst_sup_gap.min(p.worst_sup_gap);
    }
    total
}

pub fn cmd_verify_inequalities(
    grid_cfg: Option<ResolvedConfig>,
    seed: u64,
    trials: u64,
    threads: usize,
) -> i32 {
    if trials < 1 {
        eprintln!("error: trials must be at least 1");
        return EXIT_CONFIG;
    }
    // default verification grid unless a config overrides it
    let grid = match grid_cfg {
        Some(cfg) => match StripGrid::new(cfg.b, cfg.l, cfg.nx, cfg.ny) {
            Ok(g) => g,
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_CONFIG;
            }
        },
        None => StripGrid::new(std::f64::consts::PI, 10.0, 256, 32).unwrap(),
    };
    let report = if threads > 1 {
        verify_parallel(grid, seed, trials, threads)
    } else {
        match verify_inequalities(grid, seed, trials) {
            Ok(r) => r,
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_CONFIG;
            }
        }
    };
    let json = InequalityJson {
        trials,
        seed,
        worst_steklov_margin: report.worst_steklov_margin,
        worst_l4_rel_margin: report.worst_l4_rel_margin,
        worst_l8_rel_margin: report.worst_l8_rel_margin,
        worst_sup_gap: report.worst_sup_gap,
        pass: report.pass,
    };
    match serde_json::to_string_pretty(&json) {
        Ok(s) => println!("{s}"),
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    }
    if report.pass {
        EXIT_OK
    } else {
        EXIT_CONFIG
    }
}

#[derive(Serialize)]
struct FitJson {
    fitted_rate: f64,
    r_squared: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    theoretical_rate: Option<f64>,
    points_used: usize,
}

impl FitJson {
    fn from(f: &DecayFit) -> Self {
        FitJson {
            fitted_rate: f.fitted_rate,
            r_squared: f.r_squared,
            theoretical_rate: f.theoretical_rate,
            points_used: f.n_used,
        }
    }
}

#[derive(Serialize)]
struct DecaySummary {
    theoretical_rate: f64,
    exp_weighted_fit: FitJson,
    h2_fit: FitJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    ut_exp_fit: Option<FitJson>,
    cs2: f64,
    gates: GateJson,
    max_balance_residual: Option<f64>,
    runtime_sec: f64,
}

pub fn cmd_fit_decay(cfg: ResolvedConfig, out: &Path, seed: u64, threads: usize) -> i32 {
    if let Err(e) = ensure_out(out) {
        eprintln!("error: {e:#}");
        return EXIT_CONFIG;
    }
    let manifest = Manifest::new("fit-decay", cfg.clone(), seed, threads);
    let exp = cfg.to_experiment();
    let start = Instant::now();
    match run_decay_experiment(&exp) {
        Ok(outcome) => {
            let csv = series_csv(&outcome.reports);
            let samples: Vec<BalanceSample> =
                outcome.reports.iter().map(BalanceSample::from_report).collect();
            let summary = DecaySummary {
                theoretical_rate: outcome.theoretical_rate,
                exp_weighted_fit: FitJson::from(&outcome.exp_fit),
                h2_fit: FitJson::from(&outcome.h2_fit),
                ut_exp_fit: outcome.ut_exp_fit.as_ref().map(FitJson::from),
                cs2: outcome.cs2,
                gates: GateJson::from_report(&outcome.condition),
                max_balance_residual: l2_balance_residual(&samples).ok(),
                runtime_sec: start.elapsed().as_secs_f64(),
            };
            let mut manifest = manifest;
            if let Err(e) = write_outputs(out, &csv, &summary, &mut manifest) {
                eprintln!("error: {e:#}");
                return EXIT_CONFIG;
            }
            if let Err(e) = manifest.finish(out, EXIT_OK) {
                eprintln!("error: {e:#}");
                return EXIT_CONFIG;
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            let code = exit_code_for(&e);
            let _ = manifest.finish(out, code);
            code
        }
    }
}

#[derive(Serialize)]
struct ConvergeSummary {
    mode_counts: Vec<usize>,
    successive_differences: Vec<f64>,
    strictly_decreasing: bool,
    runtime_sec: f64,
}

pub fn cmd_converge(
    cfg: ResolvedConfig,
    modes: &[usize],
    out: &Path,
    seed: u64,
    threads: usize,
) -> i32 {
    if modes.len() < 2 {
        eprintln!("error: need at least 2 mode counts");
        return EXIT_CONFIG;
    }
    if let Err(e) = ensure_out(out) {
        eprintln!("error: {e:#}");
        return EXIT_CONFIG;
    }
    let manifest = Manifest::new("converge", cfg.clone(), seed, threads);
    let exp = cfg.to_experiment();
    let start = Instant::now();
    match galerkin_convergence(&exp, modes) {
        Ok(diffs) => {
            let mut csv = String::from("n_modes,diff_to_previous\n");
            for (w, d) in modes.windows(2).zip(&diffs) {
                csv.push_str(&format!("{},{:e}\n", w[1], d));
            }
            let summary = ConvergeSummary {
                mode_counts: modes.to_vec(),
                successive_differences: diffs.clone(),
                strictly_decreasing: diffs.windows(2).all(|w| w[1] < w[0]),
                runtime_sec: start.elapsed().as_secs_f64(),
            };
            let mut manifest = manifest;
            if let Err(e) = write_outputs(out, &csv, &summary, &mut manifest) {
                eprintln!("error: {e:#}");
                return EXIT_CONFIG;
            }
            if let Err(e) = manifest.finish(out, EXIT_OK) {
                eprintln!("error: {e:#}");
                return EXIT_CONFIG;
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            let code = exit_code_for(&e);
            let _ = manifest.finish(out, code);
            code
        }
    }
}
