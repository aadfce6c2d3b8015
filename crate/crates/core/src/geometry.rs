//! Norm pairs, feasible sets, mirror maps, Bregman divergences, and the
//! Bregman proximal step.
//!
//! Supported pairings are the ones with exact closed-form prox steps:
//! Euclidean mirror map on a box or a Euclidean ball, and the negative
//! entropy map on the probability simplex (multiplicative update).

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{cast, from_count, Scalar};
use crate::vecops::{self, check_dim};

/// Norms available for the primal space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Norm {
    L1,
    L2,
    LInf,
}

impl Norm {
    /// The exact dual: l1 and l-infinity swap, l2 is self-dual.
    pub fn dual(self) -> Norm {
        match self {
            Norm::L1 => Norm::LInf,
            Norm::L2 => Norm::L2,
            Norm::LInf => Norm::L1,
        }
    }

    pub fn eval<T: Scalar>(self, v: &[T]) -> T {
        match self {
            Norm::L1 => vecops::norm_l1(v),
            Norm::L2 => vecops::norm_l2(v),
            Norm::LInf => vecops::norm_linf(v),
        }
    }
}

/// A primal/dual norm pair with the tight dimensional constants
/// relating both norms to the Euclidean one:
/// `‖v‖₂ ≤ κ₁‖v‖*` and `‖v‖₂ ≤ κ₂‖v‖`, with `κ = κ₁κ₂`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct NormPair<T> {
    primal: Norm,
    dual: Norm,
    kappa1: T,
    kappa2: T,
    kappa: T,
    n: usize,
}

impl<T: Scalar> NormPair<T> {
    pub fn new(primal: Norm, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("dimension must be at least 1".into()));
        }
        let sqrt_n = from_count::<T>(n).sqrt();
        // Tight constants: ‖v‖₂ ≤ ‖v‖₁ and ‖v‖₂ ≤ √n‖v‖∞.
        let against_l2 = |norm: Norm| match norm {
            Norm::L1 => T::one(),
            Norm::L2 => T::one(),
            Norm::LInf => sqrt_n,
        };
        let dual = primal.dual();
        let kappa1 = against_l2(dual);
        let kappa2 = against_l2(primal);
        Ok(NormPair {
            primal,
            dual,
            kappa1,
            kappa2,
            kappa: kappa1 * kappa2,
            n,
        })
    }

    pub fn primal(&self) -> Norm {
        self.primal
    }

    pub fn dual(&self) -> Norm {
        self.dual
    }

    pub fn kappa1(&self) -> T {
        self.kappa1
    }

    pub fn kappa2(&self) -> T {
        self.kappa2
    }

    pub fn kappa(&self) -> T {
        self.kappa
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `sup{⟨v, y⟩ : ‖y‖ ≤ 1}`, evaluated in closed form.
    pub fn dual_norm_of(&self, v: &[T]) -> Result<T> {
        check_dim(v, self.n)?;
        Ok(self.dual.eval(v))
    }

    pub fn primal_norm_of(&self, v: &[T]) -> Result<T> {
        check_dim(v, self.n)?;
        Ok(self.primal.eval(v))
    }
}

/// Convex compact feasible sets with decidable membership and exact
/// per-norm diameters.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeasibleSet<T> {
    Box { lo: Vec<T>, hi: Vec<T> },
    Ball { center: Vec<T>, radius: T },
    Simplex { n: usize },
}

/// Default membership tolerance.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

impl<T: Scalar> FeasibleSet<T> {
    pub fn new_box(lo: Vec<T>, hi: Vec<T>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::Config("box bounds must be nonempty and equal-length".into()));
        }
        if lo.iter().zip(&hi).any(|(&l, &h)| !(l <= h)) {
            return Err(Error::Config("box requires lo <= hi componentwise".into()));
        }
        Ok(FeasibleSet::Box { lo, hi })
    }

    pub fn new_ball(center: Vec<T>, radius: T) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::Config("ball center must be nonempty".into()));
        }
        if !(radius > T::zero()) || !radius.is_finite() {
            return Err(Error::Config("ball radius must be positive and finite".into()));
        }
        Ok(FeasibleSet::Ball { center, radius })
    }

    pub fn new_simplex(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("simplex dimension must be at least 1".into()));
        }
        Ok(FeasibleSet::Simplex { n })
    }

    pub fn dim(&self) -> usize {
        match self {
            FeasibleSet::Box { lo, .. } => lo.len(),
            FeasibleSet::Ball { center, .. } => center.len(),
            FeasibleSet::Simplex { n } => *n,
        }
    }

    /// Membership up to `tol`.
    pub fn contains(&self, x: &[T], tol: T) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        match self {
            FeasibleSet::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(&v, (&l, &h))| v >= l - tol && v <= h + tol),
            FeasibleSet::Ball { center, radius } => {
                vecops::dist_l2(x, center) <= *radius + tol
            }
            FeasibleSet::Simplex { .. } => {
                let sum: T = x.iter().copied().sum();
                x.iter().all(|&v| v >= -tol) && (sum - T::one()).abs() <= tol
            }
        }
    }

    /// Exact diameter in the given norm.
    ///
    /// Box: `‖hi − lo‖`. Ball of radius r: `2r` in l2 and l-infinity,
    /// `2r√n` in l1. Simplex (n ≥ 2): 2 in l1, √2 in l2, 1 in l-infinity;
    /// a 1-point simplex has diameter 0.
    pub fn diameter(&self, norm: Norm) -> T {
        match self {
            FeasibleSet::Box { lo, hi } => norm.eval(&vecops::sub(hi, lo)),
            FeasibleSet::Ball { center, radius } => {
                let two = cast::<T>(2.0);
                match norm {
                    Norm::L1 => two * *radius * from_count::<T>(center.len()).sqrt(),
                    Norm::L2 => two * *radius,
                    Norm::LInf => two * *radius,
                }
            }
            FeasibleSet::Simplex { n } => {
                if *n < 2 {
                    return T::zero();
                }
                match norm {
                    Norm::L1 => cast(2.0),
                    Norm::L2 => cast::<T>(2.0).sqrt(),
                    Norm::LInf => T::one(),
                }
            }
        }
    }

    /// Center used as the default start: box midpoint, ball center,
    /// uniform distribution on the simplex.
    pub fn bregman_center(&self) -> Vec<T> {
        match self {
            FeasibleSet::Box { lo, hi } => lo
                .iter()
                .zip(hi)
                .map(|(&l, &h)| (l + h) / cast(2.0))
                .collect(),
            FeasibleSet::Ball { center, .. } => center.clone(),
            FeasibleSet::Simplex { n } => vec![T::one() / from_count::<T>(*n); *n],
        }
    }

    /// Uniform sample from the set (used by tests and probe selection).
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<T> {
        match self {
            FeasibleSet::Box { lo, hi } => lo
                .iter()
                .zip(hi)
                .map(|(&l, &h)| l + (h - l) * T::unit_uniform(rng))
                .collect(),
            FeasibleSet::Ball { center, radius } => {
                // Gaussian direction, radius scaled by U^(1/n).
                let n = center.len();
                let g: Vec<T> = (0..n).map(|_| T::standard_normal(rng)).collect();
                let norm = vecops::norm_l2(&g).max(T::min_positive_value());
                let u = T::unit_uniform(rng);
                let r = *radius * u.powf(T::one() / from_count::<T>(n));
                center
                    .iter()
                    .zip(&g)
                    .map(|(&c, &gi)| c + r * gi / norm)
                    .collect()
            }
            FeasibleSet::Simplex { n } => {
                // Normalized exponentials give the flat Dirichlet.
                let e: Vec<T> = (0..*n)
                    .map(|_| {
                        let u = T::unit_uniform(rng).max(T::min_positive_value());
                        -u.ln()
                    })
                    .collect();
                let total: T = e.iter().copied().sum();
                e.iter().map(|&v| v / total).collect()
            }
        }
    }
}

/// Mirror maps with known strong-convexity structure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MirrorMap {
    /// R(x) = ½‖x‖₂²
    Euclidean,
    /// R(x) = Σ xᵢ ln xᵢ on the simplex
    NegativeEntropy,
}

/// Floor applied to simplex coordinates before logarithms. The
/// multiplicative prox update keeps coordinates strictly positive in exact
/// arithmetic; the floor only guards floating-point underflow.
fn entropy_floor<T: Scalar>() -> T {
    T::from_f64(1e-300)
        .filter(|v| *v > T::zero())
        .unwrap_or_else(T::min_positive_value)
}

impl MirrorMap {
    pub fn value<T: Scalar>(&self, x: &[T]) -> Result<T> {
        match self {
            MirrorMap::Euclidean => Ok(vecops::dot(x, x) / cast(2.0)),
            MirrorMap::NegativeEntropy => {
                let mut s = T::zero();
                for &v in x {
                    if v < T::zero() {
                        return Err(Error::Domain(
                            "entropy map needs nonnegative coordinates".into(),
                        ));
                    }
                    if v > T::zero() {
                        s = s + v * v.ln();
                    }
                }
                Ok(s)
            }
        }
    }

    pub fn grad<T: Scalar>(&self, x: &[T]) -> Result<Vec<T>> {
        match self {
            MirrorMap::Euclidean => Ok(x.to_vec()),
            MirrorMap::NegativeEntropy => x
                .iter()
                .map(|&v| {
                    if v > T::zero() {
                        Ok(v.ln() + T::one())
                    } else {
                        Err(Error::Domain(
                            "entropy gradient needs strictly positive coordinates".into(),
                        ))
                    }
                })
                .collect(),
        }
    }

    /// Bregman divergence `D_R(x, y) = R(x) − R(y) − ⟨∇R(y), x − y⟩`.
    ///
    /// Euclidean: ½‖x−y‖₂². Negative entropy: Σ xᵢ ln(xᵢ/yᵢ) − Σxᵢ + Σyᵢ,
    /// which is the KL divergence when both points lie on the simplex.
    /// `y` must be in the interior of the entropy domain.
    pub fn bregman<T: Scalar>(&self, x: &[T], y: &[T]) -> Result<T> {
        check_dim(y, x.len())?;
        match self {
            MirrorMap::Euclidean => {
                let d = vecops::dist_l2(x, y);
                Ok(d * d / cast(2.0))
            }
            MirrorMap::NegativeEntropy => {
                let mut s = T::zero();
                for (&xi, &yi) in x.iter().zip(y) {
                    if yi <= T::zero() {
                        return Err(Error::Domain(
                            "entropy divergence needs y strictly positive".into(),
                        ));
                    }
                    if xi < T::zero() {
                        return Err(Error::Domain(
                            "entropy divergence needs x nonnegative".into(),
                        ));
                    }
                    if xi > T::zero() {
                        s = s + xi * (xi / yi).ln();
                    }
                    s = s - xi + yi;
                }
                Ok(s)
            }
        }
    }
}

/// Residual of the three-point identity
/// `D_R(z,y) − D_R(z,x) − D_R(x,y) = ⟨∇R(x) − ∇R(y), z − x⟩`.
///
/// Returns the absolute difference of the two sides; tests assert it stays
/// at round-off level.
pub fn three_point_gap<T: Scalar>(mm: MirrorMap, x: &[T], y: &[T], z: &[T]) -> Result<T> {
    let lhs = mm.bregman(z, y)? - mm.bregman(z, x)? - mm.bregman(x, y)?;
    let gx = mm.grad(x)?;
    let gy = mm.grad(y)?;
    let rhs = vecops::dot(&vecops::sub(&gx, &gy), &vecops::sub(z, x));
    Ok((lhs - rhs).abs())
}

/// One Bregman proximal step:
/// `argmin over the set of ⟨g, x − x_t⟩ + (1/α) D_R(x, x_t)`.
///
/// Closed forms per supported pairing: Euclidean/box clamps `x_t − αg`
/// componentwise, Euclidean/ball projects it radially, negative
/// entropy/simplex applies the multiplicative update
/// `x_i ∝ x_{t,i} exp(−α gᵢ)`.
pub fn prox_step<T: Scalar>(
    mm: MirrorMap,
    fs: &FeasibleSet<T>,
    x_t: &[T],
    g: &[T],
    alpha: T,
) -> Result<Vec<T>> {
    let n = fs.dim();
    check_dim(x_t, n)?;
    check_dim(g, n)?;
    if !(alpha > T::zero()) || !alpha.is_finite() {
        return Err(Error::NonPositiveStep {
            alpha: alpha.to_f64().unwrap_or(f64::NAN),
        });
    }
    match (mm, fs) {
        (MirrorMap::Euclidean, FeasibleSet::Box { lo, hi }) => Ok(x_t
            .iter()
            .zip(g)
            .zip(lo.iter().zip(hi))
            .map(|((&x, &gi), (&l, &h))| (x - alpha * gi).max(l).min(h))
            .collect()),
        (MirrorMap::Euclidean, FeasibleSet::Ball { center, radius }) => {
            let y = vecops::add_scaled(x_t, -alpha, g);
            let d = vecops::sub(&y, center);
            let dist = vecops::norm_l2(&d);
            if dist <= *radius {
                Ok(y)
            } else {
                let s = *radius / dist;
                Ok(center.iter().zip(&d).map(|(&c, &di)| c + s * di).collect())
            }
        }
        (MirrorMap::NegativeEntropy, FeasibleSet::Simplex { .. }) => {
            // Work in the log domain so extreme α·g cannot overflow.
            let floor = entropy_floor::<T>();
            let logw: Vec<T> = x_t
                .iter()
                .zip(g)
                .map(|(&x, &gi)| x.max(floor).ln() - alpha * gi)
                .collect();
            let m = logw.iter().fold(T::neg_infinity(), |a, &b| a.max(b));
            let w: Vec<T> = logw.iter().map(|&l| (l - m).exp()).collect();
            let total: T = w.iter().copied().sum();
            Ok(w.iter().map(|&v| v / total).collect())
        }
        _ => Err(Error::Config(
            "unsupported (mirror map, feasible set) pairing; supported: euclidean with box or ball, negative entropy with simplex"
                .into(),
        )),
    }
}

/// A validated bundle of norm pair, feasible set, and mirror map.
#[derive(Clone, Debug, Serialize)]
pub struct Geometry<T> {
    norms: NormPair<T>,
    set: FeasibleSet<T>,
    mirror: MirrorMap,
    sigma_r: T,
    diameter: T,
}

impl<T: Scalar> Geometry<T> {
    pub fn new(norms: NormPair<T>, set: FeasibleSet<T>, mirror: MirrorMap) -> Result<Self> {
        if norms.dim() != set.dim() {
            return Err(Error::DimensionMismatch {
                expected: norms.dim(),
                got: set.dim(),
            });
        }
        let supported = matches!(
            (mirror, &set),
            (MirrorMap::Euclidean, FeasibleSet::Box { .. })
                | (MirrorMap::Euclidean, FeasibleSet::Ball { .. })
                | (MirrorMap::NegativeEntropy, FeasibleSet::Simplex { .. })
        );
        if !supported {
            return Err(Error::Config(
                "unsupported (mirror map, feasible set) pairing".into(),
            ));
        }
        // Strong-convexity modulus of R in the configured primal norm.
        // Euclidean R is 1-strongly convex in l2, hence also in l-infinity,
        // and (1/n)-strongly convex in l1. Negative entropy on the simplex
        // is 1-strongly convex in l1 (Pinsker), hence in l2 and l-infinity.
        let sigma_r = match (mirror, norms.primal()) {
            (MirrorMap::Euclidean, Norm::L1) => T::one() / from_count::<T>(norms.dim()),
            _ => T::one(),
        };
        let diameter = set.diameter(norms.primal());
        Ok(Geometry {
            norms,
            set,
            mirror,
            sigma_r,
            diameter,
        })
    }

    pub fn norms(&self) -> &NormPair<T> {
        &self.norms
    }

    pub fn set(&self) -> &FeasibleSet<T> {
        &self.set
    }

    pub fn mirror(&self) -> MirrorMap {
        self.mirror
    }

    pub fn sigma_r(&self) -> T {
        self.sigma_r
    }

    /// Diameter of the feasible set in the primal norm.
    pub fn diameter(&self) -> T {
        self.diameter
    }

    pub fn dim(&self) -> usize {
        self.norms.dim()
    }

    pub fn prox_step(&self, x_t: &[T], g: &[T], alpha: T) -> Result<Vec<T>> {
        prox_step(self.mirror, &self.set, x_t, g, alpha)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn l2_pair(n: usize) -> NormPair<f64> {
        NormPair::new(Norm::L2, n).unwrap()
    }

    #[test]
    fn dual_norm_closed_forms() {
        let p2 = l2_pair(2);
        assert_eq!(p2.dual_norm_of(&[3.0, 4.0]).unwrap(), 5.0);
        let p1 = NormPair::<f64>::new(Norm::L1, 3).unwrap();
        assert_eq!(p1.dual(), Norm::LInf);
        assert_eq!(p1.dual_norm_of(&[3.0, -4.0, 1.0]).unwrap(), 4.0);
        assert_eq!(p1.dual_norm_of(&[0.0, 0.0, 0.0]).unwrap(), 0.0);
        assert!(matches!(
            p1.dual_norm_of(&[1.0, 2.0]),
            Err(Error::DimensionMismatch { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn kappa_constants_are_tight() {
        let p1 = NormPair::<f64>::new(Norm::L1, 4).unwrap();
        assert_eq!(p1.kappa1(), 2.0); // dual is l-inf: ‖v‖₂ ≤ √n ‖v‖∞
        assert_eq!(p1.kappa2(), 1.0);
        assert_eq!(p1.kappa(), 2.0);
        let pinf = NormPair::<f64>::new(Norm::LInf, 4).unwrap();
        assert_eq!(pinf.kappa1(), 1.0);
        assert_eq!(pinf.kappa2(), 2.0);
        let p2 = l2_pair(4);
        assert_eq!((p2.kappa1(), p2.kappa2()), (1.0, 1.0));
    }

    #[test]
    fn kappa_inequalities_hold_on_samples() {
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        for &norm in &[Norm::L1, Norm::L2, Norm::LInf] {
            let np = NormPair::<f64>::new(norm, 6).unwrap();
            for _ in 0..10_000 {
                let v: Vec<f64> = (0..6)
                    .map(|_| f64::standard_normal(&mut rng) * 3.0)
                    .collect();
                let l2 = vecops::norm_l2(&v);
                assert!(l2 <= np.kappa1() * np.dual_norm_of(&v).unwrap() * (1.0 + 1e-12));
                assert!(l2 <= np.kappa2() * np.primal_norm_of(&v).unwrap() * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn bregman_examples() {
        let e = MirrorMap::Euclidean;
        assert_eq!(e.bregman(&[1.0, 0.0], &[0.0, 0.0]).unwrap(), 0.5);
        assert_eq!(e.bregman(&[0.3, -0.7], &[0.3, -0.7]).unwrap(), 0.0);

        let ne = MirrorMap::NegativeEntropy;
        assert_eq!(ne.bregman(&[0.25, 0.75], &[0.25, 0.75]).unwrap(), 0.0);
        // KL((0.5,0.5) || (0.25,0.75)) = ½ln2 + ½ln(2/3)
        let expected = 0.5 * (2.0f64).ln() + 0.5 * (2.0f64 / 3.0).ln();
        let got = ne.bregman(&[0.5, 0.5], &[0.25, 0.75]).unwrap();
        assert!((got - expected).abs() < 1e-12, "got {got}");
        assert!(ne.bregman(&[0.5, 0.5], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn bregman_nonnegative_and_zero_iff_equal() {
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let simplex = FeasibleSet::<f64>::new_simplex(4).unwrap();
        for _ in 0..1000 {
            let x = simplex.sample_uniform(&mut rng);
            let y = simplex.sample_uniform(&mut rng);
            let d = MirrorMap::NegativeEntropy.bregman(&x, &y).unwrap();
            assert!(d >= 0.0);
            if vecops::dist_l1(&x, &y) > 1e-9 {
                assert!(d > 0.0);
            }
        }
    }

    #[test]
    fn strong_convexity_lower_bound_holds() {
        // D_R(x,y) ≥ (σ_R/2)‖x−y‖² on sampled in-domain pairs, both maps.
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let boxset =
            FeasibleSet::new_box(vec![-1.0f64; 3], vec![1.0f64; 3]).unwrap();
        let geo_box = Geometry::new(l2_pair(3), boxset.clone(), MirrorMap::Euclidean).unwrap();
        for _ in 0..10_000 {
            let x = boxset.sample_uniform(&mut rng);
            let y = boxset.sample_uniform(&mut rng);
            let d = MirrorMap::Euclidean.bregman(&x, &y).unwrap();
            let nx = Norm::L2.eval(&vecops::sub(&x, &y));
            assert!(d + 1e-12 >= 0.5 * geo_box.sigma_r() * nx * nx);
        }
        let simplex = FeasibleSet::<f64>::new_simplex(3).unwrap();
        let geo_sx = Geometry::new(
            NormPair::new(Norm::L1, 3).unwrap(),
            simplex.clone(),
            MirrorMap::NegativeEntropy,
        )
        .unwrap();
        for _ in 0..10_000 {
            let x = simplex.sample_uniform(&mut rng);
            let y = simplex.sample_uniform(&mut rng);
            let d = MirrorMap::NegativeEntropy.bregman(&x, &y).unwrap();
            let nx = Norm::L1.eval(&vecops::sub(&x, &y));
            assert!(d + 1e-12 >= 0.5 * geo_sx.sigma_r() * nx * nx);
        }
    }

    #[test]
    fn three_point_identity_residual_is_roundoff() {
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let boxset = FeasibleSet::new_box(vec![-2.0f64; 4], vec![2.0f64; 4]).unwrap();
        for _ in 0..10_000 {
            let x = boxset.sample_uniform(&mut rng);
            let y = boxset.sample_uniform(&mut rng);
            let z = boxset.sample_uniform(&mut rng);
            assert!(three_point_gap(MirrorMap::Euclidean, &x, &y, &z).unwrap() <= 1e-10);
        }
        let simplex = FeasibleSet::<f64>::new_simplex(4).unwrap();
        for _ in 0..10_000 {
            let x = simplex.sample_uniform(&mut rng);
            let y = simplex.sample_uniform(&mut rng);
            let z = simplex.sample_uniform(&mut rng);
            assert!(three_point_gap(MirrorMap::NegativeEntropy, &x, &y, &z).unwrap() <= 1e-10);
        }
        let p = [0.2, 0.3, 0.5];
        assert_eq!(
            three_point_gap(MirrorMap::NegativeEntropy, &p, &p, &p).unwrap(),
            0.0
        );
    }

    #[test]
    fn prox_step_closed_forms() {
        let boxset = FeasibleSet::new_box(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        let got = prox_step(
            MirrorMap::Euclidean,
            &boxset,
            &[0.0, 0.0],
            &[0.5, -0.5],
            1.0,
        )
        .unwrap();
        assert_eq!(got, vec![-0.5, 0.5]);

        // Zero gradient is a fixed point in every geometry.
        let simplex = FeasibleSet::new_simplex(3).unwrap();
        let x = [0.2f64, 0.3, 0.5];
        let got = prox_step(MirrorMap::NegativeEntropy, &simplex, &x, &[0.0; 3], 0.7).unwrap();
        for (a, b) in got.iter().zip(&x) {
            assert!((a - b).abs() < 1e-15);
        }

        // Multiplicative update: x=(½,½), g=(ln 2, 0), α=1 → (⅓, ⅔).
        let got = prox_step(
            MirrorMap::NegativeEntropy,
            &FeasibleSet::new_simplex(2).unwrap(),
            &[0.5, 0.5],
            &[(2.0f64).ln(), 0.0],
            1.0,
        )
        .unwrap();
        assert!((got[0] - 1.0 / 3.0).abs() < 1e-12);
        assert!((got[1] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn prox_step_ball_projects_radially() {
        let ball = FeasibleSet::new_ball(vec![0.0f64, 0.0], 1.0).unwrap();
        let got = prox_step(MirrorMap::Euclidean, &ball, &[0.0, 0.0], &[-3.0, -4.0], 1.0).unwrap();
        assert!((got[0] - 0.6).abs() < 1e-12);
        assert!((got[1] - 0.8).abs() < 1e-12);
        let interior =
            prox_step(MirrorMap::Euclidean, &ball, &[0.1, 0.1], &[0.2, 0.0], 1.0).unwrap();
        assert!((interior[0] + 0.1).abs() < 1e-12);
    }

    #[test]
    fn prox_step_rejects_bad_input() {
        let boxset = FeasibleSet::new_box(vec![-1.0], vec![1.0]).unwrap();
        assert!(matches!(
            prox_step(MirrorMap::Euclidean, &boxset, &[0.0], &[1.0], 0.0),
            Err(Error::NonPositiveStep { .. })
        ));
        assert!(matches!(
            prox_step(MirrorMap::NegativeEntropy, &boxset, &[0.0], &[1.0], 1.0),
            Err(Error::Config(_))
        ));
        assert!(prox_step(MirrorMap::Euclidean, &boxset, &[0.0, 0.0], &[1.0], 1.0).is_err());
    }

    #[test]
    fn prox_step_beats_sampled_cloud() {
        // The closed-form minimizer's objective value is no worse than the
        // objective at 10^3 random feasible points, for each pairing.
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let objective = |_fs: &FeasibleSet<f64>,
                         mm: MirrorMap,
                         xt: &[f64],
                         g: &[f64],
                         alpha: f64,
                         p: &[f64]| {
            vecops::dot(g, &vecops::sub(p, xt)) + mm.bregman(p, xt).unwrap() / alpha
        };
        let cases: Vec<(FeasibleSet<f64>, MirrorMap)> = vec![
            (
                FeasibleSet::new_box(vec![-1.0; 3], vec![1.0; 3]).unwrap(),
                MirrorMap::Euclidean,
            ),
            (
                FeasibleSet::new_ball(vec![0.0; 3], 1.5).unwrap(),
                MirrorMap::Euclidean,
            ),
            (FeasibleSet::new_simplex(3).unwrap(), MirrorMap::NegativeEntropy),
        ];
        for (fs, mm) in cases {
            for _ in 0..20 {
                let xt = match mm {
                    // keep entropy base points interior
                    MirrorMap::NegativeEntropy => {
                        let mut p = fs.sample_uniform(&mut rng);
                        while p.iter().any(|&v| v < 0.02) {
                            p = fs.sample_uniform(&mut rng);
                        }
                        p
                    }
                    _ => fs.sample_uniform(&mut rng),
                };
                let g: Vec<f64> = (0..3).map(|_| f64::standard_normal(&mut rng)).collect();
                let alpha = 0.1 + 1.4 * f64::unit_uniform(&mut rng);
                let star = prox_step(mm, &fs, &xt, &g, alpha).unwrap();
                assert!(fs.contains(&star, 1e-12));
                let f_star = objective(&fs, mm, &xt, &g, alpha, &star);
                // Monotonicity: no worse than staying put.
                assert!(f_star <= objective(&fs, mm, &xt, &g, alpha, &xt) + 1e-12);
                for _ in 0..50 {
                    let p = fs.sample_uniform(&mut rng);
                    if mm == MirrorMap::NegativeEntropy && p.iter().any(|&v| v <= 0.0) {
                        continue;
                    }
                    assert!(f_star <= objective(&fs, mm, &xt, &g, alpha, &p) + 1e-9);
                }
            }
        }
    }

    #[test]
    fn diameters_match_sampled_suprema() {
        let mut rng = ChaCha12Rng::seed_from_u64(6);
        let sets: Vec<FeasibleSet<f64>> = vec![
            FeasibleSet::new_box(vec![-1.0, 0.0], vec![1.0, 3.0]).unwrap(),
            FeasibleSet::new_ball(vec![0.5, -0.5], 2.0).unwrap(),
            FeasibleSet::new_simplex(2).unwrap(),
        ];
        for set in sets {
            for &norm in &[Norm::L1, Norm::L2, Norm::LInf] {
                let d = set.diameter(norm);
                let mut best: f64 = 0.0;
                for _ in 0..2000 {
                    let a = set.sample_uniform(&mut rng);
                    let b = set.sample_uniform(&mut rng);
                    best = best.max(norm.eval(&vecops::sub(&a, &b)));
                    assert!(norm.eval(&vecops::sub(&a, &b)) <= d * (1.0 + 1e-9));
                }
                assert!(best > 0.5 * d, "sampled sup too far from diameter");
            }
        }
        assert_eq!(FeasibleSet::<f64>::new_simplex(1).unwrap().diameter(Norm::L1), 0.0);
    }

    #[test]
    fn geometry_validation() {
        let simplex = FeasibleSet::<f64>::new_simplex(3).unwrap();
        assert!(Geometry::new(l2_pair(3), simplex.clone(), MirrorMap::Euclidean).is_err());
        assert!(Geometry::new(
            NormPair::new(Norm::L1, 3).unwrap(),
            simplex,
            MirrorMap::NegativeEntropy
        )
        .is_ok());
        let boxset = FeasibleSet::new_box(vec![0.0; 2], vec![1.0; 2]).unwrap();
        assert!(Geometry::new(l2_pair(3), boxset, MirrorMap::Euclidean).is_err());
        assert!(FeasibleSet::new_box(vec![1.0], vec![0.0]).is_err());
    }

    proptest! {
        #[test]
        fn prox_result_stays_feasible(
            seed in 0u64..1000,
            alpha in 1e-3f64..10.0,
            scale in 0.1f64..20.0,
        ) {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let simplex = FeasibleSet::<f64>::new_simplex(5).unwrap();
            let x = simplex.sample_uniform(&mut rng);
            let g: Vec<f64> = (0..5).map(|_| scale * f64::standard_normal(&mut rng)).collect();
            let p = prox_step(MirrorMap::NegativeEntropy, &simplex, &x, &g, alpha).unwrap();
            prop_assert!(simplex.contains(&p, 1e-12));

            let ball = FeasibleSet::new_ball(vec![0.0; 5], 1.0).unwrap();
            let xb = ball.sample_uniform(&mut rng);
            let pb = prox_step(MirrorMap::Euclidean, &ball, &xb, &g, alpha).unwrap();
            prop_assert!(ball.contains(&pb, 1e-12));
        }

        #[test]
        fn dual_norm_is_absolutely_homogeneous(
            v in proptest::collection::vec(-100.0f64..100.0, 4),
            s in -10.0f64..10.0,
        ) {
            for norm in [Norm::L1, Norm::L2, Norm::LInf] {
                let np = NormPair::<f64>::new(norm, 4).unwrap();
                let sv: Vec<f64> = v.iter().map(|&x| s * x).collect();
                let lhs = np.dual_norm_of(&sv).unwrap();
                let rhs = s.abs() * np.dual_norm_of(&v).unwrap();
                prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs));
            }
        }
    }
}
