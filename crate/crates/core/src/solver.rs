//! The ZOMD iteration loop.
//!
//! Per iteration t = 1..T at the current iterate x_t:
//! estimate the gradient with the two-point sampler, take one Bregman
//! proximal step with step size α(t), and fold x_t into the running
//! step-weighted average z_t = Σ_{j≤t} α(j)x_j / Σ_{k≤t} α(k). Convergence
//! statements concern f(z_t). The recorded f(x_t), f(z_t) use the exact
//! objective — diagnostics only, the algorithm itself never sees them.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimator::{estimate_gradient, NgaConfig};
use crate::geometry::Geometry;
use crate::numerics::CompensatedSum;
use crate::oracle::{NoiseModel, ObjectiveSpec};
use crate::rng::StreamTree;
use crate::scalar::{cast, from_iter_index, Scalar};

/// Decreasing step sizes α(t) = a·t^(−p) with p ∈ (0.5, 1], so that
/// Σα(t) diverges while Σα(t)² converges.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct StepSchedule<T> {
    a: T,
    p: T,
    t_max: Option<u64>,
}

impl<T: Scalar> StepSchedule<T> {
    pub fn new(a: T, p: T) -> Result<Self> {
        if !(a > T::zero()) || !a.is_finite() {
            return Err(Error::Config("step scale a must be positive".into()));
        }
        // p = 0.5 exactly sits on the boundary where Σα² = Σ1/t diverges.
        if !(p > cast::<T>(0.5)) || !(p <= T::one()) {
            return Err(Error::Config(
                "step exponent p must lie in (0.5, 1]: the step sum must diverge while the squared-step sum converges"
                    .into(),
            ));
        }
        Ok(StepSchedule { a, p, t_max: None })
    }

    /// Optional cap on the number of iterations runs may take.
    pub fn with_cap(mut self, t_max: u64) -> Self {
        self.t_max = Some(t_max);
        self
    }

    pub fn scale(&self) -> T {
        self.a
    }

    pub fn exponent(&self) -> T {
        self.p
    }

    pub fn cap(&self) -> Option<u64> {
        self.t_max
    }

    /// α(t) = a·t^(−p) for t ≥ 1.
    pub fn alpha(&self, t: u64) -> Result<T> {
        if t == 0 {
            return Err(Error::ZeroIteration);
        }
        Ok(self.a * from_iter_index::<T>(t).powf(-self.p))
    }
}

/// One step of the weighted running average:
/// z_t = (cum_alpha_prev·z_prev + α_t·x_t)/(cum_alpha_prev + α_t).
/// At t = 1 pass `cum_alpha_prev = 0`; `z_prev` is then ignored.
pub fn update_average<T: Scalar>(
    z_prev: &[T],
    x_t: &[T],
    alpha_t: T,
    cum_alpha_prev: T,
) -> (Vec<T>, T) {
    let total = cum_alpha_prev + alpha_t;
    if cum_alpha_prev == T::zero() {
        return (x_t.to_vec(), total);
    }
    let z = z_prev
        .iter()
        .zip(x_t)
        .map(|(&z, &x)| (cum_alpha_prev * z + alpha_t * x) / total)
        .collect();
    (z, total)
}

/// One recorded iteration.
#[derive(Clone, Debug, Serialize)]
pub struct TrajectoryPoint<T> {
    pub t: u64,
    pub x: Vec<T>,
    pub z: Vec<T>,
    /// Exact objective at x_t (diagnostic).
    pub f_x: T,
    /// Exact objective at z_t (diagnostic).
    pub f_z: T,
    pub alpha: T,
    pub cum_alpha: T,
    pub cum_alpha_sq: T,
    /// Σ_{k≤t} α(k)²‖g̃(k)‖*²/(2σ_R), the summability diagnostic.
    pub diag_sum: T,
}

/// End-of-run summary.
#[derive(Clone, Debug, Serialize)]
pub struct RunSummary<T> {
    pub iterations: u64,
    pub f_x_final: T,
    pub f_z_final: T,
    /// f(z_T) − f*.
    pub gap_final: T,
    /// Best f(z_t) seen over the whole run.
    pub best_f_z: T,
    pub cum_alpha: T,
    pub cum_alpha_sq: T,
    pub diag_sum: T,
    pub z_final: Vec<T>,
    /// D_R(x*, x₁) for the configured mirror map (diagnostic).
    pub bregman_to_opt_initial: T,
}

/// Recorded run: dense points up to [`DENSE_RECORD_LIMIT`] iterations, then
/// geometrically thinned (ratio 1.1), plus always the final iteration.
#[derive(Clone, Debug, Serialize)]
pub struct Trajectory<T> {
    pub points: Vec<TrajectoryPoint<T>>,
    pub summary: RunSummary<T>,
}

pub const DENSE_RECORD_LIMIT: u64 = 10_000;
const THIN_RATIO: f64 = 1.1;

/// Everything one run needs. `start` defaults to the Bregman center of the
/// feasible set (box midpoint, ball center, uniform simplex point), which
/// keeps D_R(x*, x₁) uniformly bounded.
#[derive(Clone, Debug)]
pub struct Experiment<T> {
    pub objective: ObjectiveSpec<T>,
    pub noise: NoiseModel<T>,
    pub geometry: Geometry<T>,
    pub nga: NgaConfig<T>,
    pub schedule: StepSchedule<T>,
    pub start: Option<Vec<T>>,
    pub iterations: u64,
}

impl<T: Scalar> Experiment<T> {
    pub fn validate(&self) -> Result<()> {
        let n = self.geometry.dim();
        if self.objective.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: self.objective.dim(),
            });
        }
        if self.nga.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: self.nga.dim(),
            });
        }
        if self.iterations == 0 {
            return Err(Error::Config("iterations must be at least 1".into()));
        }
        if let Some(cap) = self.schedule.cap() {
            if self.iterations > cap {
                return Err(Error::Config(format!(
                    "iterations {} exceed the schedule cap {cap}",
                    self.iterations
                )));
            }
        }
        if let Some(x1) = &self.start {
            if !self.geometry.set().contains(x1, cast(1e-9)) {
                return Err(Error::Config("start point is not feasible".into()));
            }
        }
        Ok(())
    }

    pub fn start_point(&self) -> Vec<T> {
        self.start
            .clone()
            .unwrap_or_else(|| self.geometry.set().bregman_center())
    }
}

fn next_record_mark(t: u64) -> u64 {
    let scaled = (t as f64 * THIN_RATIO).ceil() as u64;
    scaled.max(t + 1)
}

/// Run one seeded trajectory on lane `lane` of the stream tree.
pub fn run_zomd<T: Scalar>(
    exp: &Experiment<T>,
    streams: &StreamTree,
    lane: u64,
) -> Result<Trajectory<T>> {
    exp.validate()?;
    let geometry = &exp.geometry;
    let norms = geometry.norms();
    let sigma_r = geometry.sigma_r();
    let two_sigma = cast::<T>(2.0) * sigma_r;
    let n = geometry.dim();

    let x1 = exp.start_point();
    let bregman_to_opt_initial = geometry
        .mirror()
        .bregman(exp.objective.x_star(), &x1)
        .unwrap_or_else(|_| T::nan());

    let mut x = x1;
    // z_t is maintained as a compensated weighted sum divided by the
    // compensated weight total; algebraically identical to update_average.
    let mut weighted_x: Vec<CompensatedSum<T>> = vec![CompensatedSum::new(); n];
    let mut cum_alpha = CompensatedSum::<T>::new();
    let mut cum_alpha_sq = CompensatedSum::<T>::new();
    let mut diag_sum = CompensatedSum::<T>::new();

    let mut points = Vec::new();
    let mut next_mark = 1u64;
    let mut best_f_z = T::infinity();
    let mut f_x_final = T::zero();
    let mut f_z_final = T::zero();
    let mut z = vec![T::zero(); n];

    for t in 1..=exp.iterations {
        let alpha = exp.schedule.alpha(t)?;
        let sample = estimate_gradient(&exp.objective, &exp.noise, &x, &exp.nga, streams, lane, t);

        cum_alpha.add(alpha);
        cum_alpha_sq.add(alpha * alpha);
        for (w, &xi) in weighted_x.iter_mut().zip(&x) {
            w.add(alpha * xi);
        }
        let total = cum_alpha.value();
        for (zi, w) in z.iter_mut().zip(&weighted_x) {
            *zi = w.value() / total;
        }

        let dual = norms.dual_norm_of(&sample.gradient)?;
        diag_sum.add(alpha * alpha * dual * dual / two_sigma);

        let f_x = exp.objective.value(&x);
        let f_z = exp.objective.value(&z);
        best_f_z = best_f_z.min(f_z);
        f_x_final = f_x;
        f_z_final = f_z;

        let record = t <= DENSE_RECORD_LIMIT || t >= next_mark || t == exp.iterations;
        if record {
            if t >= next_mark {
                next_mark = next_record_mark(t);
            }
            points.push(TrajectoryPoint {
                t,
                x: x.clone(),
                z: z.clone(),
                f_x,
                f_z,
                alpha,
                cum_alpha: total,
                cum_alpha_sq: cum_alpha_sq.value(),
                diag_sum: diag_sum.value(),
            });
        }

        x = geometry.prox_step(&x, &sample.gradient, alpha)?;
    }

    let summary = RunSummary {
        iterations: exp.iterations,
        f_x_final,
        f_z_final,
        gap_final: f_z_final - exp.objective.f_star(),
        best_f_z,
        cum_alpha: cum_alpha.value(),
        cum_alpha_sq: cum_alpha_sq.value(),
        diag_sum: diag_sum.value(),
        z_final: z,
        bregman_to_opt_initial,
    };
    Ok(Trajectory { points, summary })
}

/// Run `trials` independent trajectories; trial i owns lane i of the master
/// seed's stream tree. Trials execute in parallel but the returned summaries
/// are ordered by trial index, so results are independent of thread count.
pub fn run_ensemble<T: Scalar>(
    exp: &Experiment<T>,
    trials: u64,
    master_seed: u64,
) -> Result<Vec<RunSummary<T>>> {
    if trials == 0 {
        return Err(Error::Precondition("ensemble needs at least one trial".into()));
    }
    exp.validate()?;
    let tree = StreamTree::from_master_seed(master_seed);
    (0..trials)
        .into_par_iter()
        .map(|trial| run_zomd(exp, &tree, trial).map(|t| t.summary))
        .collect()
}

/// Full trajectories for every trial (used by the CLI when writing CSVs).
pub fn run_ensemble_trajectories<T: Scalar>(
    exp: &Experiment<T>,
    trials: u64,
    master_seed: u64,
) -> Result<Vec<Trajectory<T>>> {
    if trials == 0 {
        return Err(Error::Precondition("ensemble needs at least one trial".into()));
    }
    exp.validate()?;
    let tree = StreamTree::from_master_seed(master_seed);
    (0..trials)
        .into_par_iter()
        .map(|trial| run_zomd(exp, &tree, trial))
        .collect()
}
