//! Output files: trajectory CSV, summary/bounds/verification JSON.
//!
//! All files are UTF-8 with LF line endings; floats are printed with Rust's
//! shortest round-trip formatting, so identical values always produce
//! identical bytes.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use zomd::analysis::{ConcentrationBound, EmpiricalProbability, TheoryParams};
use zomd::estimator::EstimatorBoundReport;
use zomd::solver::{RunSummary, Trajectory};

/// Vector columns are written only up to this dimension.
pub const MAX_VECTOR_COLUMNS: usize = 10;

/// Trajectory CSV: `t,alpha,f_x,f_z,gap_z,diag_sum,cum_alpha[,x_1..x_n]`.
pub fn trajectory_csv(traj: &Trajectory<f64>, f_star: f64) -> String {
    let n = traj
        .points
        .first()
        .map(|p| p.x.len())
        .unwrap_or(0);
    let with_vectors = n <= MAX_VECTOR_COLUMNS;
    let mut out = String::from("t,alpha,f_x,f_z,gap_z,diag_sum,cum_alpha");
    if with_vectors {
        for i in 1..=n {
            out.push_str(&format!(",x_{i}"));
        }
    }
    out.push('\n');
    for p in &traj.points {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}",
            p.t,
            p.alpha,
            p.f_x,
            p.f_z,
            p.f_z - f_star,
            p.diag_sum,
            p.cum_alpha
        ));
        if with_vectors {
            for x in &p.x {
                out.push_str(&format!(",{x}"));
            }
        }
        out.push('\n');
    }
    out
}

/// One concentration-curve sample.
#[derive(Debug, Serialize)]
pub struct CurvePoint {
    pub t: u64,
    /// Clipped to [0, 1].
    pub bound: f64,
    pub raw: f64,
}

impl From<&ConcentrationBound<f64>> for CurvePoint {
    fn from(b: &ConcentrationBound<f64>) -> Self {
        CurvePoint {
            t: b.t,
            bound: b.value,
            raw: b.raw,
        }
    }
}

/// Finite-time bound report for one epsilon.
#[derive(Debug, Serialize)]
pub struct BoundReport {
    pub epsilon: f64,
    /// δ + B₁D
    pub neighborhood_radius: f64,
    /// First t with Σα ≥ 3D/ε.
    pub t0: u64,
    /// Smallest t certifying the configured confidence level; absent when
    /// the forward scan hit its cap.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_confidence: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_confidence_note: Option<String>,
    pub concentration_curve: Vec<CurvePoint>,
}

/// summary.json emitted by `run`.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub seed: u64,
    pub trials: u64,
    pub iterations: u64,
    pub theory: TheoryParams<f64>,
    pub bounds: Vec<BoundReport>,
    pub aggregate: Aggregate,
    pub trial_summaries: Vec<RunSummary<f64>>,
}

#[derive(Debug, Serialize)]
pub struct Aggregate {
    pub gap_median: f64,
    pub gap_p90: f64,
    pub gap_min: f64,
    pub gap_max: f64,
}

/// bounds.json emitted by `bounds`.
#[derive(Debug, Serialize)]
pub struct BoundsReport {
    pub theory: TheoryParams<f64>,
    pub neighborhood_radius: f64,
    /// Radius-minimizing smoothing radius; absent for unbiased oracles.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_star: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius_at_mu_star: Option<f64>,
    /// D_R(x*, x₁) diagnostic for the configured start point.
    pub bregman_to_opt_initial: f64,
    pub per_epsilon: Vec<BoundReport>,
}

/// One verification row of `verify-estimator`.
#[derive(Debug, Serialize)]
pub struct VerifyRow {
    pub mu: f64,
    pub probe_index: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probe: Option<Vec<f64>>,
    #[serde(flatten)]
    pub report: EstimatorBoundReport<f64>,
    pub ok: bool,
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub samples_per_row: usize,
    pub all_ok: bool,
    pub rows: Vec<VerifyRow>,
}

/// One sweep row; `plot-ready`.
#[derive(Debug, Serialize)]
pub struct SweepRow {
    pub mu: f64,
    pub radius_theory: f64,
    pub gap_median: f64,
    pub gap_p90: f64,
    /// Concentration bound at the configured T (1.0 when T < t₀, where the
    /// bound gives no information).
    pub bound_at_t: f64,
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("mu,radius_theory,gap_median,gap_p90,bound_at_T\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.mu, r.radius_theory, r.gap_median, r.gap_p90, r.bound_at_t
        ));
    }
    out
}

/// Probability-validation block, attachable to reports.
#[derive(Debug, Serialize)]
pub struct ProbabilityBlock {
    pub epsilon: f64,
    pub empirical: EmpiricalProbability<f64>,
}

pub fn write_text(path: &Path, text: &str) -> std::io::Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(text.as_bytes())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("report serialization");
    text.push('\n');
    write_text(path, &text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_csv_has_fixed_header() {
        let rows = vec![SweepRow {
            mu: 0.1,
            radius_theory: 0.5,
            gap_median: 0.01,
            gap_p90: 0.02,
            bound_at_t: 1.0,
        }];
        let csv = sweep_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "mu,radius_theory,gap_median,gap_p90,bound_at_T"
        );
        assert_eq!(lines.next().unwrap(), "0.1,0.5,0.01,0.02,1");
    }
}
