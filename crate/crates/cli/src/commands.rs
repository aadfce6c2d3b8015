//! The four subcommands: run, bounds, verify-estimator, sweep.

use std::path::{Path, PathBuf};

use zomd::analysis::{
    concentration_bound, concentration_curve, min_iterations_for_confidence,
    neighborhood_radius, optimal_mu, radius_at_mu, TheoryParams,
};
use zomd::estimator::{verify_estimator_bounds, NgaConfig};
use zomd::numerics::{median, quantile};
use zomd::oracle::SmoothnessClass;
use zomd::rng::StreamTree;
use zomd::solver::{run_ensemble, run_zomd};
use zomd::Error;

use crate::config::{load_config, BuiltExperiment, ExperimentConfig, OutputFormat};
use crate::report::{
    self, Aggregate, BoundReport, BoundsReport, CurvePoint, RunReport, SweepRow, VerifyReport,
    VerifyRow,
};

/// Failure modes mapped to process exit codes: configuration problems exit
/// with 2, runtime or verification failures with 1.
#[derive(Debug)]
pub enum CliFailure {
    Config(String),
    Runtime(String),
}

impl CliFailure {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliFailure::Config(_) => 2,
            CliFailure::Runtime(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliFailure::Config(m) => m,
            CliFailure::Runtime(m) => m,
        }
    }
}

pub type CmdResult = Result<(), CliFailure>;

/// Command-line overrides of config fields.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub trials: Option<u64>,
    pub quiet: bool,
}

fn config_failure(e: impl std::fmt::Display) -> CliFailure {
    CliFailure::Config(e.to_string())
}

fn runtime_failure(e: impl std::fmt::Display) -> CliFailure {
    CliFailure::Runtime(e.to_string())
}

struct Prepared {
    config: ExperimentConfig,
    built: BuiltExperiment,
    out_dir: PathBuf,
    quiet: bool,
}

fn prepare(config_path: &Path, ov: &Overrides) -> Result<Prepared, CliFailure> {
    let mut config = load_config(config_path).map_err(config_failure)?;
    if let Some(seed) = ov.seed {
        config.run.seed = seed;
    }
    if let Some(trials) = ov.trials {
        config.run.trials = trials;
    }
    let built = config.build().map_err(config_failure)?;
    let out_dir = ov
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&config.output.dir));
    Ok(Prepared {
        config,
        built,
        out_dir,
        quiet: ov.quiet,
    })
}

/// Log-spaced iteration grid for concentration curves, ending at `t_max`.
fn curve_grid(t_max: u64) -> Vec<u64> {
    let mut ts: Vec<u64> = (0..=9)
        .map(|k| ((t_max as f64).powf(k as f64 / 9.0)).round() as u64)
        .filter(|&t| t >= 1)
        .collect();
    ts.push(t_max);
    ts.sort_unstable();
    ts.dedup();
    ts
}

fn bound_report_for(
    epsilon: f64,
    confidence: f64,
    built: &BuiltExperiment,
    tp: &TheoryParams<f64>,
) -> Result<BoundReport, CliFailure> {
    let sched = &built.experiment.schedule;
    let t_max = built.experiment.iterations;
    let t0 = match concentration_bound(t_max, epsilon, sched, tp) {
        Ok(b) => b.t0,
        Err(Error::BelowStartIteration { t0, .. }) => t0,
        Err(e) => return Err(runtime_failure(e)),
    };
    let curve = concentration_curve(&curve_grid(t_max), epsilon, sched, tp)
        .map_err(runtime_failure)?;
    let (t_confidence, t_confidence_note) =
        match min_iterations_for_confidence(confidence, epsilon, sched, tp) {
            Ok(t) => (Some(t), None),
            Err(e @ Error::ScanCapExceeded { .. }) => (None, Some(e.to_string())),
            Err(e) => return Err(runtime_failure(e)),
        };
    Ok(BoundReport {
        epsilon,
        neighborhood_radius: neighborhood_radius(tp) + 0.0,
        t0,
        t_confidence,
        t_confidence_note,
        concentration_curve: curve.iter().map(CurvePoint::from).collect(),
    })
}

fn gap_aggregate(gaps: &[f64]) -> Aggregate {
    Aggregate {
        gap_median: median(gaps),
        gap_p90: quantile(gaps, 0.9),
        gap_min: gaps.iter().copied().fold(f64::INFINITY, f64::min),
        gap_max: gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    }
}

pub fn cmd_run(config_path: &Path, ov: &Overrides) -> CmdResult {
    let p = prepare(config_path, ov)?;
    let built = &p.built;
    let exp = &built.experiment;
    let tp = TheoryParams::derive(
        &exp.objective,
        &exp.noise,
        &exp.geometry,
        exp.nga.mu(),
        &built.options,
    )
    .map_err(runtime_failure)?;

    let summaries = run_ensemble(exp, built.trials, built.seed).map_err(runtime_failure)?;
    let gaps: Vec<f64> = summaries.iter().map(|s| s.gap_final).collect();

    let mut bounds = Vec::new();
    for &eps in &built.epsilons {
        bounds.push(bound_report_for(eps, built.confidence, built, &tp)?);
    }

    if p.config.wants(OutputFormat::Csv) {
        let tree = StreamTree::from_master_seed(built.seed);
        let traj = run_zomd(exp, &tree, 0).map_err(runtime_failure)?;
        let csv = report::trajectory_csv(&traj, exp.objective.f_star());
        report::write_text(&p.out_dir.join("trajectory.csv"), &csv)
            .map_err(runtime_failure)?;
    }
    if p.config.wants(OutputFormat::Json) {
        let out = RunReport {
            seed: built.seed,
            trials: built.trials,
            iterations: exp.iterations,
            theory: tp,
            bounds,
            aggregate: gap_aggregate(&gaps),
            trial_summaries: summaries,
        };
        report::write_json(&p.out_dir.join("summary.json"), &out).map_err(runtime_failure)?;
    }
    if !p.quiet {
        println!(
            "run: {} trials x {} iterations, median gap {}",
            built.trials,
            exp.iterations,
            median(&gaps)
        );
    }
    Ok(())
}

pub fn cmd_bounds(config_path: &Path, ov: &Overrides) -> CmdResult {
    let p = prepare(config_path, ov)?;
    let built = &p.built;
    let exp = &built.experiment;
    let tp = TheoryParams::derive(
        &exp.objective,
        &exp.noise,
        &exp.geometry,
        exp.nga.mu(),
        &built.options,
    )
    .map_err(runtime_failure)?;

    let lipschitz = match tp.class {
        SmoothnessClass::C00 => tp.l0,
        SmoothnessClass::C11 => tp.l1.unwrap_or(tp.l0),
    };
    let (mu_star, radius_at_mu_star) = if tp.bias_bound > 0.0 {
        let star = optimal_mu(
            tp.class,
            lipschitz,
            tp.kappa1,
            tp.bias_bound,
            tp.diameter,
            tp.n,
            &built.options,
        )
        .map_err(runtime_failure)?;
        let r = radius_at_mu(
            tp.class,
            lipschitz,
            tp.kappa1,
            tp.bias_bound,
            tp.diameter,
            tp.n,
            star,
            &built.options,
        )
        .map_err(runtime_failure)?;
        (Some(star), Some(r))
    } else {
        (None, None)
    };

    let x1 = exp.start_point();
    let bregman_to_opt_initial = exp
        .geometry
        .mirror()
        .bregman(exp.objective.x_star(), &x1)
        .unwrap_or(f64::NAN);

    let mut per_epsilon = Vec::new();
    for &eps in &built.epsilons {
        per_epsilon.push(bound_report_for(eps, built.confidence, built, &tp)?);
    }

    let out = BoundsReport {
        neighborhood_radius: neighborhood_radius(&tp),
        mu_star,
        radius_at_mu_star,
        bregman_to_opt_initial,
        theory: tp,
        per_epsilon,
    };
    report::write_json(&p.out_dir.join("bounds.json"), &out).map_err(runtime_failure)?;
    if !p.quiet {
        println!(
            "bounds: delta {} bias {} K {} C {} radius {}",
            out.theory.delta,
            out.theory.b1,
            out.theory.k,
            out.theory.c,
            out.neighborhood_radius
        );
        if let Some(star) = out.mu_star {
            println!("optimal mu: {star}");
        }
    }
    Ok(())
}

/// Smoothing radii checked by `verify-estimator`.
pub const VERIFY_MU_GRID: [f64; 5] = [0.01, 0.05, 0.1, 0.5, 1.0];
/// Probe points per radius.
pub const VERIFY_PROBES: usize = 5;
/// Estimator draws per (radius, probe) cell.
pub const VERIFY_SAMPLES: usize = 20_000;

/// Stream-tree fork domain for probe-point sampling.
const PROBE_DOMAIN: u64 = 1;

pub fn cmd_verify_estimator(config_path: &Path, ov: &Overrides) -> CmdResult {
    let p = prepare(config_path, ov)?;
    let built = &p.built;
    let exp = &built.experiment;
    let n = exp.geometry.dim();
    let tree = StreamTree::from_master_seed(built.seed);
    let probe_tree = tree.fork(PROBE_DOMAIN);
    let probes: Vec<Vec<f64>> = (0..VERIFY_PROBES)
        .map(|i| {
            exp.geometry
                .set()
                .sample_uniform(&mut probe_tree.rng(0, i as u64, 0))
        })
        .collect();

    let mut rows = Vec::new();
    let mut all_ok = true;
    for (mi, &mu) in VERIFY_MU_GRID.iter().enumerate() {
        let cfg = NgaConfig::new(mu, n).map_err(runtime_failure)?;
        for (pi, probe) in probes.iter().enumerate() {
            let lane = (mi * VERIFY_PROBES + pi) as u64;
            let rep = verify_estimator_bounds(
                &exp.objective,
                &exp.noise,
                exp.geometry.norms(),
                probe,
                &cfg,
                VERIFY_SAMPLES,
                &tree,
                lane,
            )
            .map_err(runtime_failure)?;
            let ok = rep.bias_ok && rep.second_moment_ok;
            all_ok &= ok;
            if !p.quiet {
                println!(
                    "mu {:>5} probe {pi}: bias {:.4} <= {:.4} [{}], moment {:.4} <= {:.4} [{}]",
                    mu,
                    rep.bias_empirical,
                    rep.bias_bound + 4.0 * rep.bias_std_err,
                    if rep.bias_ok { "ok" } else { "FAIL" },
                    rep.second_moment_empirical,
                    rep.second_moment_bound + 4.0 * rep.second_moment_std_err,
                    if rep.second_moment_ok { "ok" } else { "FAIL" },
                );
            }
            rows.push(VerifyRow {
                mu,
                probe_index: pi,
                probe: (n <= report::MAX_VECTOR_COLUMNS).then(|| probe.clone()),
                report: rep,
                ok,
            });
        }
    }
    let out = VerifyReport {
        samples_per_row: VERIFY_SAMPLES,
        all_ok,
        rows,
    };
    report::write_json(&p.out_dir.join("verify.json"), &out).map_err(runtime_failure)?;
    if all_ok {
        Ok(())
    } else {
        Err(CliFailure::Runtime(
            "estimator verification failed: at least one (mu, probe) cell exceeded its cap"
                .into(),
        ))
    }
}

pub fn cmd_sweep(
    config_path: &Path,
    ov: &Overrides,
    parameter: &str,
    values: &[f64],
) -> CmdResult {
    if parameter != "mu" {
        return Err(CliFailure::Config(format!(
            "unsupported sweep parameter '{parameter}': only 'mu' is supported"
        )));
    }
    if values.len() < 2 {
        return Err(CliFailure::Config(
            "sweep needs at least two values".into(),
        ));
    }
    let p = prepare(config_path, ov)?;
    if values.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(CliFailure::Config("sweep values must be positive".into()));
    }

    let mut rows = Vec::new();
    for (i, &mu) in values.iter().enumerate() {
        let mut cell_config = p.config.clone();
        cell_config.estimator.mu = mu;
        let cell = cell_config.build().map_err(config_failure)?;
        let exp = &cell.experiment;
        let tp = TheoryParams::derive(&exp.objective, &exp.noise, &exp.geometry, mu, &cell.options)
            .map_err(runtime_failure)?;
        // Each sweep cell runs on its own seed offset.
        let seed = cell.seed.wrapping_add(i as u64);
        let summaries = run_ensemble(exp, cell.trials, seed).map_err(runtime_failure)?;
        let gaps: Vec<f64> = summaries.iter().map(|s| s.gap_final).collect();
        let epsilon = cell.epsilons[0];
        let bound_at_t = match concentration_bound(exp.iterations, epsilon, &exp.schedule, &tp) {
            Ok(b) => b.value,
            // Below t₀ the theorem gives no information.
            Err(Error::BelowStartIteration { .. }) => 1.0,
            Err(e) => return Err(runtime_failure(e)),
        };
        rows.push(SweepRow {
            mu,
            radius_theory: neighborhood_radius(&tp),
            gap_median: median(&gaps),
            gap_p90: quantile(&gaps, 0.9),
            bound_at_t,
        });
        if !p.quiet {
            let r = rows.last().unwrap();
            println!(
                "mu {}: radius {} gap_median {} gap_p90 {} bound {}",
                r.mu, r.radius_theory, r.gap_median, r.gap_p90, r.bound_at_t
            );
        }
    }
    report::write_text(&p.out_dir.join("sweep.csv"), &report::sweep_csv(&rows))
        .map_err(runtime_failure)?;
    Ok(())
}
