//! Closed-form evaluation of the convergence theory: the smoothing gap δ,
//! the estimator bias cap B₁, the second-moment cap K, the martingale
//! constant C, the asymptotic neighborhood radius δ + B₁D, the optimal
//! smoothing radius μ*, finite-time concentration bounds, and the iteration
//! count needed for a target confidence level — together with seeded
//! empirical probability estimates to validate them.
//!
//! Three printed-vs-derived formula discrepancies are settled by flags on
//! [`AnalysisOptions`]; the defaults use the derivation-consistent readings
//! (√n smoothing gap for C¹,¹, squared gradient-Lipschitz constant in the
//! second-moment cap, squared K₁ in C).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Geometry, NormPair};
use crate::numerics::{wilson_interval_95, CompensatedSum, WilsonInterval};
use crate::oracle::{NoiseModel, ObjectiveSpec, SmoothnessClass};
use crate::scalar::{cast, from_count, Scalar};
use crate::solver::{run_ensemble, Experiment, StepSchedule};

/// Cap for forward scans over iteration counts.
pub const SCAN_CAP: u64 = 1_000_000_000;

/// Formula-variant switches. All default to `false`, i.e. the
/// derivation-consistent readings.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct AnalysisOptions {
    /// C¹,¹ smoothing gap (μ²/2)L₁·n instead of (μ²/2)L₁·√n.
    pub c11_delta_linear_n: bool,
    /// C¹,¹ second-moment cap with L₁ unsquared in its curvature term.
    pub c11_unsquared_smoothness: bool,
    /// C = 3κ₁²(K + B₁² + K₁) instead of 3κ₁²(K + B₁² + K₁²).
    pub zeta_bound_unsquared_k1: bool,
}

/// δ such that ∇f_μ(x) is a δ-subgradient of f:
/// μL₀√n for C⁰,⁰ and (μ²/2)L₁√n for C¹,¹ (variant: (μ²/2)L₁n).
pub fn compute_delta<T: Scalar>(
    class: SmoothnessClass,
    mu: T,
    lipschitz: T,
    n: usize,
    opts: &AnalysisOptions,
) -> Result<T> {
    if mu < T::zero() || lipschitz < T::zero() {
        return Err(Error::Config("delta needs nonnegative mu and Lipschitz constant".into()));
    }
    let nf = from_count::<T>(n);
    Ok(match class {
        SmoothnessClass::C00 => mu * lipschitz * nf.sqrt(),
        SmoothnessClass::C11 => {
            let dimension_factor = if opts.c11_delta_linear_n {
                nf
            } else {
                nf.sqrt()
            };
            mu * mu / cast::<T>(2.0) * lipschitz * dimension_factor
        }
    })
}

/// Cap on the estimator's conditional bias: ‖B(t)‖* ≤ 2κ₁B√n/μ.
pub fn compute_bias_bound<T: Scalar>(kappa1: T, b: T, n: usize, mu: T) -> Result<T> {
    if !(mu > T::zero()) {
        return Err(Error::Config("bias bound needs mu > 0".into()));
    }
    if b < T::zero() || kappa1 < T::zero() {
        return Err(Error::Config("bias bound needs nonnegative kappa1 and B".into()));
    }
    Ok(cast::<T>(2.0) * kappa1 * b * from_count::<T>(n).sqrt() / mu)
}

/// Inputs to the second-moment cap.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MomentBoundInputs<T> {
    pub kappa1: T,
    pub kappa2: T,
    pub n: usize,
    pub mu: T,
    pub l0: T,
    pub l1: Option<T>,
    pub grad_bound: Option<T>,
    pub v: T,
    pub unsquared_smoothness: bool,
}

impl<T: Scalar> MomentBoundInputs<T> {
    pub fn for_objective(
        obj: &ObjectiveSpec<T>,
        noise: &NoiseModel<T>,
        norms: &NormPair<T>,
        mu: T,
    ) -> Result<Self> {
        if !(mu > T::zero()) {
            return Err(Error::Config("second-moment cap needs mu > 0".into()));
        }
        Ok(MomentBoundInputs {
            kappa1: norms.kappa1(),
            kappa2: norms.kappa2(),
            n: obj.dim(),
            mu,
            l0: obj.l0(),
            l1: obj.l1(),
            grad_bound: obj.grad_bound(),
            v: noise.declared_v(),
            unsquared_smoothness: false,
        })
    }

    pub fn with_unsquared_smoothness(mut self, yes: bool) -> Self {
        self.unsquared_smoothness = yes;
        self
    }
}

/// Conditional second-moment cap K on E[‖g̃‖*²]:
///
/// C⁰,⁰: κ₁²(2L₀²n + 8(V/μ)²n)
/// C¹,¹: κ₁²(¾L₁²μ²κ₂⁴(n+6)³ + 3G²(n+4)² + 12V²n/μ²), with L₁ unsquared
/// under the variant flag.
pub fn compute_second_moment_bound<T: Scalar>(
    class: SmoothnessClass,
    p: &MomentBoundInputs<T>,
) -> Result<T> {
    let nf = from_count::<T>(p.n);
    let k1sq = p.kappa1 * p.kappa1;
    match class {
        SmoothnessClass::C00 => {
            let noise = cast::<T>(8.0) * (p.v / p.mu) * (p.v / p.mu) * nf;
            Ok(k1sq * (cast::<T>(2.0) * p.l0 * p.l0 * nf + noise))
        }
        SmoothnessClass::C11 => {
            let l1 = p.l1.ok_or_else(|| {
                Error::Config("C11 second-moment cap needs the gradient-Lipschitz constant".into())
            })?;
            let g = p.grad_bound.ok_or_else(|| {
                Error::Config("C11 second-moment cap needs the gradient-norm cap G".into())
            })?;
            let curvature = if p.unsquared_smoothness { l1 } else { l1 * l1 };
            let k2_4 = p.kappa2.powi(4);
            let n6 = (nf + cast::<T>(6.0)).powi(3);
            let n4 = (nf + cast::<T>(4.0)).powi(2);
            let term_smooth = cast::<T>(0.75) * curvature * p.mu * p.mu * k2_4 * n6;
            let term_grad = cast::<T>(3.0) * g * g * n4;
            let term_noise = cast::<T>(12.0) * p.v * p.v * nf / (p.mu * p.mu);
            Ok(k1sq * (term_smooth + term_grad + term_noise))
        }
    }
}

/// Every constant the convergence statements use.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TheoryParams<T> {
    /// Smoothing gap of ∇f_μ as a δ-subgradient.
    pub delta: T,
    /// Cap on the estimator bias ‖B(t)‖*.
    pub b1: T,
    /// Cap on E[‖g̃‖*²].
    pub k: T,
    /// Cap on ‖g_δ(t)‖₂ over the feasible set.
    pub k1: T,
    /// Cap on E[‖ζ(t)‖*²] for the martingale part ζ = g̃ − g_δ − B.
    pub c: T,
    pub diameter: T,
    pub sigma_r: T,
    pub kappa1: T,
    pub kappa2: T,
    pub n: usize,
    pub mu: T,
    pub class: SmoothnessClass,
    pub l0: T,
    pub l1: Option<T>,
    pub grad_bound: Option<T>,
    /// Oracle bias bound B.
    pub bias_bound: T,
    /// Declared oracle second-moment bound V.
    pub v: T,
}

impl<T: Scalar> TheoryParams<T> {
    pub fn derive(
        obj: &ObjectiveSpec<T>,
        noise: &NoiseModel<T>,
        geometry: &Geometry<T>,
        mu: T,
        opts: &AnalysisOptions,
    ) -> Result<Self> {
        if obj.dim() != geometry.dim() {
            return Err(Error::DimensionMismatch {
                expected: geometry.dim(),
                got: obj.dim(),
            });
        }
        let norms = geometry.norms();
        let n = obj.dim();
        let class = obj.class();
        let lipschitz_for_delta = match class {
            SmoothnessClass::C00 => obj.l0(),
            SmoothnessClass::C11 => obj.l1().ok_or_else(|| {
                Error::Config("C11 analysis needs the gradient-Lipschitz constant".into())
            })?,
        };
        let delta = compute_delta(class, mu, lipschitz_for_delta, n, opts)?;
        let b = noise.bias_bound();
        let b1 = if b > T::zero() {
            compute_bias_bound(norms.kappa1(), b, n, mu)?
        } else {
            T::zero()
        };
        let inputs = MomentBoundInputs::for_objective(obj, noise, norms, mu)?
            .with_unsquared_smoothness(opts.c11_unsquared_smoothness);
        let k = compute_second_moment_bound(class, &inputs)?;
        let k1 = match class {
            SmoothnessClass::C00 => obj.l0(),
            SmoothnessClass::C11 => obj.grad_bound().ok_or_else(|| {
                Error::Config("C11 analysis needs the gradient-norm cap G".into())
            })?,
        };
        let k1_term = if opts.zeta_bound_unsquared_k1 {
            k1
        } else {
            k1 * k1
        };
        let kappa1 = norms.kappa1();
        let c = cast::<T>(3.0) * kappa1 * kappa1 * (k + b1 * b1 + k1_term);
        Ok(TheoryParams {
            delta,
            b1,
            k,
            k1,
            c,
            diameter: geometry.diameter(),
            sigma_r: geometry.sigma_r(),
            kappa1,
            kappa2: norms.kappa2(),
            n,
            mu,
            class,
            l0: obj.l0(),
            l1: obj.l1(),
            grad_bound: obj.grad_bound(),
            bias_bound: b,
            v: noise.declared_v(),
        })
    }
}

/// Asymptotic suboptimality floor δ + B₁D.
pub fn neighborhood_radius<T: Scalar>(tp: &TheoryParams<T>) -> T {
    tp.delta + tp.b1 * tp.diameter
}

/// Smoothing radius minimizing the neighborhood radius in μ:
/// √(2κ₁BD/L₀) for C⁰,⁰ and (2κ₁BD/L₁)^⅓ for C¹,¹ (the linear-n variant
/// divides by an extra √n). Requires B > 0: with an unbiased oracle the
/// radius is monotone in μ and has no interior minimum.
pub fn optimal_mu<T: Scalar>(
    class: SmoothnessClass,
    lipschitz: T,
    kappa1: T,
    bias_bound: T,
    diameter: T,
    n: usize,
    opts: &AnalysisOptions,
) -> Result<T> {
    if !(bias_bound > T::zero()) {
        return Err(Error::NoInteriorMinimum(
            "unbiased oracle: the radius decreases monotonically as mu shrinks".into(),
        ));
    }
    if !(lipschitz > T::zero()) || !(diameter > T::zero()) || !(kappa1 > T::zero()) {
        return Err(Error::Config(
            "optimal mu needs positive Lipschitz constant, kappa1, and diameter".into(),
        ));
    }
    let base = cast::<T>(2.0) * kappa1 * bias_bound * diameter;
    Ok(match class {
        SmoothnessClass::C00 => (base / lipschitz).sqrt(),
        SmoothnessClass::C11 => {
            let denom = if opts.c11_delta_linear_n {
                lipschitz * from_count::<T>(n).sqrt()
            } else {
                lipschitz
            };
            (base / denom).powf(T::one() / cast::<T>(3.0))
        }
    })
}

/// The neighborhood radius as a function of μ (used by the μ* certificate
/// and the sweep command).
pub fn radius_at_mu<T: Scalar>(
    class: SmoothnessClass,
    lipschitz: T,
    kappa1: T,
    bias_bound: T,
    diameter: T,
    n: usize,
    mu: T,
    opts: &AnalysisOptions,
) -> Result<T> {
    let delta = compute_delta(class, mu, lipschitz, n, opts)?;
    let b1 = if bias_bound > T::zero() {
        compute_bias_bound(kappa1, bias_bound, n, mu)?
    } else {
        T::zero()
    };
    Ok(delta + b1 * diameter)
}

/// One evaluated concentration bound.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ConcentrationBound<T> {
    pub t: u64,
    /// min(1, raw): the reported probability bound.
    pub value: T,
    /// The unclipped right-hand side (kept for monotonicity checks).
    pub raw: T,
    /// First index with Σ_{k≤t₀} α(k) ≥ 3D/ε.
    pub t0: u64,
    pub sum_alpha: T,
    pub sum_alpha_sq: T,
}

struct AlphaSums<T> {
    s1: CompensatedSum<T>,
    s2: CompensatedSum<T>,
}

impl<T: Scalar> AlphaSums<T> {
    fn new() -> Self {
        AlphaSums {
            s1: CompensatedSum::new(),
            s2: CompensatedSum::new(),
        }
    }

    fn push(&mut self, alpha: T) {
        self.s1.add(alpha);
        self.s2.add(alpha * alpha);
    }
}

fn bound_from_sums<T: Scalar>(epsilon: T, tp: &TheoryParams<T>, s1: T, s2: T) -> T {
    let term_moment = cast::<T>(3.0) * tp.k / epsilon * s2 / s1;
    let term_martingale =
        cast::<T>(9.0) * tp.c * tp.diameter / (epsilon * epsilon) * s2 / (s1 * s1);
    term_moment + term_martingale
}

/// P(f(z_t) − f* ≥ δ + B₁D + ε) ≤ (3K/ε)·Σα²/Σα + (9CD/ε²)·Σα²/(Σα)²,
/// valid for t ≥ t₀ where t₀ is the first index with Σ_{k≤t₀}α(k) ≥ 3D/ε.
/// Partial sums are exact forward summations. Querying t < t₀ is an error
/// that carries the computed t₀.
pub fn concentration_bound<T: Scalar>(
    t: u64,
    epsilon: T,
    sched: &StepSchedule<T>,
    tp: &TheoryParams<T>,
) -> Result<ConcentrationBound<T>> {
    if t == 0 {
        return Err(Error::ZeroIteration);
    }
    if !(epsilon > T::zero()) {
        return Err(Error::Config("epsilon must be positive".into()));
    }
    let threshold = cast::<T>(3.0) * tp.diameter / epsilon;
    let mut sums = AlphaSums::new();
    let mut t0 = 0u64;
    for k in 1..=t {
        sums.push(sched.alpha(k)?);
        if t0 == 0 && sums.s1.value() >= threshold {
            t0 = k;
        }
    }
    if t0 == 0 {
        // Keep scanning just to report where the bound becomes valid.
        let mut tail = t;
        while t0 == 0 {
            tail += 1;
            if tail > SCAN_CAP {
                return Err(Error::ScanCapExceeded {
                    cap: SCAN_CAP,
                    sum_alpha: sums.s1.value().to_f64().unwrap_or(f64::NAN),
                    sum_alpha_sq: sums.s2.value().to_f64().unwrap_or(f64::NAN),
                });
            }
            sums.push(sched.alpha(tail)?);
            if sums.s1.value() >= threshold {
                t0 = tail;
            }
        }
        return Err(Error::BelowStartIteration { t, t0 });
    }
    let s1 = sums.s1.value();
    let s2 = sums.s2.value();
    let raw = bound_from_sums(epsilon, tp, s1, s2);
    Ok(ConcentrationBound {
        t,
        value: raw.min(T::one()),
        raw,
        t0,
        sum_alpha: s1,
        sum_alpha_sq: s2,
    })
}

/// Concentration bounds at several iteration counts in one forward pass.
/// Entries with t < t₀ are omitted from the result.
pub fn concentration_curve<T: Scalar>(
    ts: &[u64],
    epsilon: T,
    sched: &StepSchedule<T>,
    tp: &TheoryParams<T>,
) -> Result<Vec<ConcentrationBound<T>>> {
    let mut targets: Vec<u64> = ts.iter().copied().filter(|&t| t > 0).collect();
    targets.sort_unstable();
    targets.dedup();
    let Some(&t_max) = targets.last() else {
        return Ok(Vec::new());
    };
    let threshold = cast::<T>(3.0) * tp.diameter / epsilon;
    let mut sums = AlphaSums::new();
    let mut t0 = 0u64;
    let mut out = Vec::new();
    let mut next = targets.iter().copied().peekable();
    for k in 1..=t_max {
        sums.push(sched.alpha(k)?);
        if t0 == 0 && sums.s1.value() >= threshold {
            t0 = k;
        }
        if next.peek() == Some(&k) {
            next.next();
            if t0 > 0 && k >= t0 {
                let s1 = sums.s1.value();
                let s2 = sums.s2.value();
                let raw = bound_from_sums(epsilon, tp, s1, s2);
                out.push(ConcentrationBound {
                    t: k,
                    value: raw.min(T::one()),
                    raw,
                    t0,
                    sum_alpha: s1,
                    sum_alpha_sq: s2,
                });
            }
        }
    }
    Ok(out)
}

/// Smallest t at which the step sums certify confidence p for accuracy ε:
/// Σα ≥ 3D/ε, Σα ≥ (6K/(εp₁))Σα², and (Σα)² ≥ (18CD/(ε²p₁))Σα² with
/// p₁ = 1 − p, found by forward scan (cap [`SCAN_CAP`]).
pub fn min_iterations_for_confidence<T: Scalar>(
    p: T,
    epsilon: T,
    sched: &StepSchedule<T>,
    tp: &TheoryParams<T>,
) -> Result<u64> {
    if !(p > T::zero()) || !(p < T::one()) {
        return Err(Error::Config("confidence level must lie in (0, 1)".into()));
    }
    if !(epsilon > T::zero()) {
        return Err(Error::Config("epsilon must be positive".into()));
    }
    let p1 = T::one() - p;
    let start_threshold = cast::<T>(3.0) * tp.diameter / epsilon;
    let moment_factor = cast::<T>(6.0) * tp.k / (epsilon * p1);
    let martingale_factor =
        cast::<T>(18.0) * tp.c * tp.diameter / (epsilon * epsilon * p1);
    let mut sums = AlphaSums::new();
    for t in 1..=SCAN_CAP {
        sums.push(sched.alpha(t)?);
        let s1 = sums.s1.value();
        let s2 = sums.s2.value();
        if s1 >= start_threshold && s1 >= moment_factor * s2 && s1 * s1 >= martingale_factor * s2
        {
            return Ok(t);
        }
    }
    Err(Error::ScanCapExceeded {
        cap: SCAN_CAP,
        sum_alpha: sums.s1.value().to_f64().unwrap_or(f64::NAN),
        sum_alpha_sq: sums.s2.value().to_f64().unwrap_or(f64::NAN),
    })
}

/// Empirical estimate of P(f(z_t) − f* < δ + B₁D + ε) over seeded trials.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct EmpiricalProbability<T> {
    pub fraction: T,
    pub wilson: WilsonInterval<T>,
    pub successes: u64,
    pub trials: u64,
    /// δ + B₁D for the experiment's parameters.
    pub radius: T,
    /// radius + ε: the gap threshold defining success.
    pub threshold: T,
}

pub fn empirical_convergence_probability<T: Scalar>(
    exp: &Experiment<T>,
    t: u64,
    epsilon: T,
    trials: u64,
    master_seed: u64,
    opts: &AnalysisOptions,
) -> Result<EmpiricalProbability<T>> {
    if trials < 30 {
        return Err(Error::Precondition(format!(
            "empirical probability needs at least 30 trials, got {trials}"
        )));
    }
    if !(epsilon > T::zero()) {
        return Err(Error::Config("epsilon must be positive".into()));
    }
    let tp = TheoryParams::derive(&exp.objective, &exp.noise, &exp.geometry, exp.nga.mu(), opts)?;
    let radius = neighborhood_radius(&tp);
    let threshold = radius + epsilon;
    let mut run = exp.clone();
    run.iterations = t;
    let summaries = run_ensemble(&run, trials, master_seed)?;
    let successes = summaries
        .iter()
        .filter(|s| s.gap_final < threshold)
        .count() as u64;
    Ok(EmpiricalProbability {
        fraction: T::from_u64(successes).expect("count fits scalar")
            / T::from_u64(trials).expect("count fits scalar"),
        wilson: wilson_interval_95(successes, trials),
        successes,
        trials,
        radius,
        threshold,
    })
}
