//! Two-point Gaussian-smoothing gradient estimator and Monte Carlo
//! references for the smoothed function.
//!
//! The estimator queries the noisy oracle at `x + μu` and at `x` with
//! *independent* noise draws (two distinct sub-streams) and forms
//! `g̃ = (f̂(x+μu) − f̂(x))/μ · u`. Its conditional mean is `∇f_μ(x)` plus a
//! bias term driven by the oracle bias, and its second moment blows up like
//! `V²/μ²` — both facts are checked empirically by
//! [`verify_estimator_bounds`] against the closed-form caps in
//! [`crate::analysis`].

use rand::Rng;
use serde::Serialize;

use crate::analysis;
use crate::error::{Error, Result};
use crate::geometry::NormPair;
use crate::numerics::RunningMoments;
use crate::oracle::{NoiseModel, ObjectiveSpec};
use crate::rng::StreamTree;
use crate::scalar::{cast, from_count, Scalar};
use crate::vecops;

/// Call indices inside one estimator invocation.
pub const CALL_DIRECTION: u32 = 0;
pub const CALL_NOISE_FAR: u32 = 1;
pub const CALL_NOISE_NEAR: u32 = 2;

/// Smoothing configuration: radius μ and dimension n.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct NgaConfig<T> {
    mu: T,
    n: usize,
}

impl<T: Scalar> NgaConfig<T> {
    pub fn new(mu: T, n: usize) -> Result<Self> {
        if !(mu > T::zero()) || !mu.is_finite() {
            return Err(Error::Config("smoothing radius mu must be positive".into()));
        }
        if n == 0 {
            return Err(Error::Config("dimension must be at least 1".into()));
        }
        Ok(NgaConfig { mu, n })
    }

    pub fn mu(&self) -> T {
        self.mu
    }

    pub fn dim(&self) -> usize {
        self.n
    }
}

/// One two-point gradient sample.
#[derive(Clone, Debug)]
pub struct GradientSample<T> {
    /// g̃ = ((f̂_far − f̂_near)/μ)·u
    pub gradient: Vec<T>,
    /// The Gaussian direction u that was used.
    pub direction: Vec<T>,
    /// Noisy value at x + μu.
    pub value_far: T,
    /// Noisy value at x.
    pub value_near: T,
}

/// Draw u ~ N(0, Iₙ).
pub fn sample_direction<T: Scalar, R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<T> {
    (0..n).map(|_| T::standard_normal(rng)).collect()
}

/// One estimator invocation at `x`, addressed by `(lane, slot)` in the
/// stream tree. Direction and the two noise draws come from three distinct
/// calls of that slot, so the two oracle queries are independently noised.
pub fn estimate_gradient<T: Scalar>(
    obj: &ObjectiveSpec<T>,
    noise: &NoiseModel<T>,
    x: &[T],
    cfg: &NgaConfig<T>,
    streams: &StreamTree,
    lane: u64,
    slot: u64,
) -> GradientSample<T> {
    debug_assert_eq!(x.len(), cfg.n);
    let u = sample_direction::<T, _>(&mut streams.rng(lane, slot, CALL_DIRECTION), cfg.n);
    let far_point = vecops::add_scaled(x, cfg.mu, &u);
    let value_far = obj.noisy_value(noise, &far_point, &mut streams.rng(lane, slot, CALL_NOISE_FAR));
    let value_near = obj.noisy_value(noise, x, &mut streams.rng(lane, slot, CALL_NOISE_NEAR));
    let scale = (value_far - value_near) / cfg.mu;
    GradientSample {
        gradient: vecops::scale(scale, &u),
        direction: u,
        value_far,
        value_near,
    }
}

/// Monte Carlo estimate with standard error.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ScalarEstimate<T> {
    pub mean: T,
    pub std_err: T,
    pub samples: usize,
}

/// Componentwise Monte Carlo estimate with standard errors.
#[derive(Clone, Debug, Serialize)]
pub struct VectorEstimate<T> {
    pub mean: Vec<T>,
    pub std_err: Vec<T>,
    pub samples: usize,
}

const MIN_REF_SAMPLES: usize = 1000;

/// Monte Carlo estimate of the Gaussian smoothing f_μ(x) = E[f(x + μu)].
pub fn smoothed_value_ref<T: Scalar, R: Rng + ?Sized>(
    obj: &ObjectiveSpec<T>,
    x: &[T],
    mu: T,
    samples: usize,
    rng: &mut R,
) -> Result<ScalarEstimate<T>> {
    if samples < MIN_REF_SAMPLES {
        return Err(Error::Precondition(format!(
            "smoothed_value_ref needs at least {MIN_REF_SAMPLES} samples, got {samples}"
        )));
    }
    let n = x.len();
    let mut mom = RunningMoments::new();
    for _ in 0..samples {
        let u = sample_direction::<T, _>(rng, n);
        mom.push(obj.value(&vecops::add_scaled(x, mu, &u)));
    }
    Ok(ScalarEstimate {
        mean: mom.mean(),
        std_err: mom.std_err(),
        samples,
    })
}

/// Monte Carlo estimate of ∇f_μ(x) = (1/μ)·E[u·f(x + μu)].
///
/// Variance-reduced with the control variate u·f(x) (zero mean), which the
/// estimator under test never uses — this is the reference side only.
pub fn smoothed_gradient_ref<T: Scalar, R: Rng + ?Sized>(
    obj: &ObjectiveSpec<T>,
    x: &[T],
    mu: T,
    samples: usize,
    rng: &mut R,
) -> Result<VectorEstimate<T>> {
    if samples < MIN_REF_SAMPLES {
        return Err(Error::Precondition(format!(
            "smoothed_gradient_ref needs at least {MIN_REF_SAMPLES} samples, got {samples}"
        )));
    }
    let n = x.len();
    let f_x = obj.value(x);
    let mut mom: Vec<RunningMoments<T>> = vec![RunningMoments::new(); n];
    for _ in 0..samples {
        let u = sample_direction::<T, _>(rng, n);
        let df = (obj.value(&vecops::add_scaled(x, mu, &u)) - f_x) / mu;
        for (m, &ui) in mom.iter_mut().zip(&u) {
            m.push(df * ui);
        }
    }
    Ok(VectorEstimate {
        mean: mom.iter().map(|m| m.mean()).collect(),
        std_err: mom.iter().map(|m| m.std_err()).collect(),
        samples,
    })
}

/// Empirical check of the estimator's bias and second-moment caps at one
/// probe point.
#[derive(Clone, Debug, Serialize)]
pub struct EstimatorBoundReport<T> {
    pub mu: T,
    /// ‖mean(g̃) − ∇f_μ(x)‖* over the sample budget.
    pub bias_empirical: T,
    /// 2κ₁B√n/μ
    pub bias_bound: T,
    /// Dual norm of the combined componentwise standard errors.
    pub bias_std_err: T,
    pub bias_ok: bool,
    /// mean ‖g̃‖*²
    pub second_moment_empirical: T,
    /// Class-dependent cap (squared gradient-Lipschitz reading for C¹,¹).
    pub second_moment_bound: T,
    /// C¹,¹ only: the cap under the unsquared gradient-Lipschitz reading.
    pub second_moment_bound_alt: Option<T>,
    pub second_moment_std_err: T,
    pub second_moment_ok: bool,
    pub second_moment_ok_alt: Option<bool>,
}

/// Pass slack in standard errors for the statistical checks.
const PASS_SIGMAS: f64 = 4.0;

/// Salt separating the reference oracle's fork domain from trial lanes.
const REFERENCE_FORK_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

/// Draw `samples` estimator invocations at `x` (lanes/slots under the given
/// lane of `streams`), compare the empirical bias and second moment against
/// their closed-form caps.
pub fn verify_estimator_bounds<T: Scalar>(
    obj: &ObjectiveSpec<T>,
    noise: &NoiseModel<T>,
    norms: &NormPair<T>,
    x: &[T],
    cfg: &NgaConfig<T>,
    samples: usize,
    streams: &StreamTree,
    lane: u64,
) -> Result<EstimatorBoundReport<T>> {
    if samples < 10_000 {
        return Err(Error::Precondition(format!(
            "verify_estimator_bounds needs at least 10000 samples, got {samples}"
        )));
    }
    let n = cfg.n;
    vecops::check_dim(x, n)?;
    if norms.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: norms.dim(),
        });
    }

    let mut comp_moments: Vec<RunningMoments<T>> = vec![RunningMoments::new(); n];
    let mut sq_moments = RunningMoments::new();
    for s in 0..samples {
        let sample = estimate_gradient(obj, noise, x, cfg, streams, lane, s as u64);
        for (m, &gi) in comp_moments.iter_mut().zip(&sample.gradient) {
            m.push(gi);
        }
        let dual = norms.dual_norm_of(&sample.gradient)?;
        sq_moments.push(dual * dual);
    }

    // Reference gradient of the smoothed function, on its own sub-stream.
    let mut ref_rng = streams.fork(lane ^ REFERENCE_FORK_SALT).rng(0, 0, 0);
    let reference = smoothed_gradient_ref(obj, x, cfg.mu, 2 * samples, &mut ref_rng)?;

    let mean_g: Vec<T> = comp_moments.iter().map(|m| m.mean()).collect();
    let bias_vec = vecops::sub(&mean_g, &reference.mean);
    let bias_empirical = norms.dual_norm_of(&bias_vec)?;
    let se_vec: Vec<T> = comp_moments
        .iter()
        .zip(&reference.std_err)
        .map(|(m, &r)| (m.std_err() * m.std_err() + r * r).sqrt())
        .collect();
    let bias_std_err = norms.dual_norm_of(&se_vec)?;
    let bias_bound =
        analysis::compute_bias_bound(norms.kappa1(), noise.bias_bound(), n, cfg.mu)?;

    let sigmas = cast::<T>(PASS_SIGMAS);
    let bias_ok = bias_empirical <= bias_bound + sigmas * bias_std_err;

    let second_moment_empirical = sq_moments.mean();
    let second_moment_std_err = sq_moments.std_err();
    let inputs = analysis::MomentBoundInputs::for_objective(obj, noise, norms, cfg.mu)?;
    let second_moment_bound = analysis::compute_second_moment_bound(obj.class(), &inputs)?;
    let second_moment_ok =
        second_moment_empirical <= second_moment_bound + sigmas * second_moment_std_err;
    let (second_moment_bound_alt, second_moment_ok_alt) = match obj.class() {
        crate::oracle::SmoothnessClass::C11 => {
            let alt = analysis::compute_second_moment_bound(
                obj.class(),
                &inputs.with_unsquared_smoothness(true),
            )?;
            let ok = second_moment_empirical <= alt + sigmas * second_moment_std_err;
            (Some(alt), Some(ok))
        }
        crate::oracle::SmoothnessClass::C00 => (None, None),
    };

    Ok(EstimatorBoundReport {
        mu: cfg.mu,
        bias_empirical,
        bias_bound,
        bias_std_err,
        bias_ok,
        second_moment_empirical,
        second_moment_bound,
        second_moment_bound_alt,
        second_moment_std_err,
        second_moment_ok,
        second_moment_ok_alt,
    })
}

/// E‖u‖₂ᵖ caps for a standard normal vector: nᵖ/² for p ∈ [0, 2] and
/// (p + n)ᵖ/² for p > 2. Used by moment sanity tests.
pub fn gaussian_moment_cap<T: Scalar>(n: usize, p: u32) -> T {
    let nf = from_count::<T>(n);
    let pf = cast::<T>(f64::from(p));
    let half = pf / cast::<T>(2.0);
    if p <= 2 {
        nf.powf(half)
    } else {
        (pf + nf).powf(half)
    }
}
