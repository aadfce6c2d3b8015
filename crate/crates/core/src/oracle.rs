//! Simulated biased zeroth-order oracle: test objectives with known optima
//! plus configurable noise laws.
//!
//! Objectives are globally defined (the estimator probes points `x + μu`
//! outside the feasible set); their Lipschitz data is measured in the
//! Euclidean norm, which is where the Gaussian moment bounds live. The noise
//! `e(x, ω)` returned by the oracle has conditional mean `b(x)` with
//! `|b(x)| ≤ B` and second moment at most `V²`.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::FeasibleSet;
use crate::scalar::{cast, from_count, Scalar};
use crate::vecops::{self, check_dim};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SmoothnessClass {
    /// Lipschitz function values: |f(x) − f(y)| ≤ L₀‖x − y‖₂.
    C00,
    /// Lipschitz gradients: ‖∇f(x) − ∇f(y)‖₂ ≤ L₁‖x − y‖₂.
    C11,
}

/// Quadratic coefficient matrix. The diagonal form admits exact constrained
/// optima on boxes and the simplex; a full matrix must be positive definite
/// with its unconstrained minimizer inside the feasible set.
#[derive(Clone, Debug, Serialize)]
#[serde(untagged)]
pub enum QuadraticForm<T> {
    Diagonal(Vec<T>),
    Full(Vec<Vec<T>>),
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObjectiveKind<T> {
    /// f(x) = xᵀQx + cᵀx
    Quadratic { q: QuadraticForm<T>, c: Vec<T> },
    /// f(x) = Σ |xᵢ − aᵢ|
    AbsSum { anchor: Vec<T> },
    /// f(x) = ln(Σ exp(s·xᵢ)) / s
    LogSumExp { scale: T },
}

/// A test objective together with everything the theory needs to know about
/// it: smoothness class, Lipschitz constants, a gradient-norm cap on an
/// enlargement of the feasible set, and the exact constrained optimum.
#[derive(Clone, Debug, Serialize)]
pub struct ObjectiveSpec<T> {
    kind: ObjectiveKind<T>,
    class: SmoothnessClass,
    n: usize,
    l0: T,
    l1: Option<T>,
    grad_bound: Option<T>,
    f_star: T,
    x_star: Vec<T>,
}

fn cholesky<T: Scalar>(a: &[Vec<T>]) -> Option<Vec<Vec<T>>> {
    let n = a.len();
    let mut l = vec![vec![T::zero(); n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i][j];
            for k in 0..j {
                sum = sum - l[i][k] * l[j][k];
            }
            if i == j {
                if !(sum > T::zero()) {
                    return None;
                }
                l[i][j] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    Some(l)
}

fn cholesky_solve<T: Scalar>(l: &[Vec<T>], b: &[T]) -> Vec<T> {
    let n = l.len();
    let mut y = vec![T::zero(); n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s = s - l[i][k] * y[k];
        }
        y[i] = s / l[i][i];
    }
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s = s - l[k][i] * x[k];
        }
        x[i] = s / l[i][i];
    }
    x
}

/// Exact minimizer of Σ qᵢxᵢ² + cᵢxᵢ over the simplex (qᵢ > 0), by the
/// waterfilling form of the KKT conditions: xᵢ = max(0, (λ − cᵢ)/(2qᵢ)).
fn simplex_quadratic_argmin<T: Scalar>(q: &[T], c: &[T]) -> Vec<T> {
    let n = q.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| c[i].partial_cmp(&c[j]).expect("finite costs"));
    let mut inv_sum = T::zero(); // Σ 1/(2q) over the active set
    let mut ratio_sum = T::zero(); // Σ c/(2q) over the active set
    let mut lambda = T::zero();
    for (k, &i) in order.iter().enumerate() {
        inv_sum = inv_sum + T::one() / (cast::<T>(2.0) * q[i]);
        ratio_sum = ratio_sum + c[i] / (cast::<T>(2.0) * q[i]);
        let cand = (T::one() + ratio_sum) / inv_sum;
        let upper_ok = k + 1 == n || cand <= c[order[k + 1]];
        if cand > c[i] && upper_ok {
            lambda = cand;
            break;
        }
        lambda = cand;
    }
    (0..n)
        .map(|i| ((lambda - c[i]) / (cast::<T>(2.0) * q[i])).max(T::zero()))
        .collect()
}

impl<T: Scalar> ObjectiveSpec<T> {
    /// Quadratic objective with exact constrained optimum.
    ///
    /// `enlargement` inflates the feasible set coordinatewise when computing
    /// the gradient-norm cap G (the estimator probes slightly outside the
    /// set; 6μ covers essentially all Gaussian probes).
    pub fn quadratic(
        q: QuadraticForm<T>,
        c: Vec<T>,
        set: &FeasibleSet<T>,
        enlargement: T,
    ) -> Result<Self> {
        let n = set.dim();
        check_dim(&c, n)?;
        if !(enlargement >= T::zero()) {
            return Err(Error::Config("enlargement must be nonnegative".into()));
        }
        match &q {
            QuadraticForm::Diagonal(d) => {
                check_dim(d, n)?;
                if d.iter().any(|&v| v < T::zero() || !v.is_finite()) {
                    return Err(Error::Config("diagonal quadratic needs q >= 0".into()));
                }
            }
            QuadraticForm::Full(m) => {
                if m.len() != n || m.iter().any(|row| row.len() != n) {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        got: m.len(),
                    });
                }
                for i in 0..n {
                    for j in 0..i {
                        if m[i][j] != m[j][i] {
                            return Err(Error::Config("quadratic matrix must be symmetric".into()));
                        }
                    }
                }
            }
        }
        let kind = ObjectiveKind::Quadratic { q, c };
        let x_star = Self::quadratic_argmin(&kind, set)?;
        let mut spec = ObjectiveSpec {
            n,
            class: SmoothnessClass::C11,
            l0: T::zero(),
            l1: None,
            grad_bound: None,
            f_star: T::zero(),
            x_star,
                    kind,
        };
        spec.f_star = spec.value(&spec.x_star.clone());
        let g = spec.quadratic_grad_cap(set, enlargement);
        spec.grad_bound = Some(g);
        spec.l0 = g;
        spec.l1 = Some(spec.quadratic_curvature_cap());
        Ok(spec)
    }

    pub fn quadratic_diag(
        diag: Vec<T>,
        c: Vec<T>,
        set: &FeasibleSet<T>,
        enlargement: T,
    ) -> Result<Self> {
        Self::quadratic(QuadraticForm::Diagonal(diag), c, set, enlargement)
    }

    /// f(x) = Σ |xᵢ − aᵢ|, Lipschitz with L₀ = √n in the Euclidean norm.
    pub fn abs_sum(anchor: Vec<T>, set: &FeasibleSet<T>) -> Result<Self> {
        let n = set.dim();
        check_dim(&anchor, n)?;
        let x_star = match set {
            FeasibleSet::Box { lo, hi } => anchor
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(&a, (&l, &h))| a.max(l).min(h))
                .collect::<Vec<T>>(),
            _ => {
                if set.contains(&anchor, cast(crate::geometry::MEMBERSHIP_TOL)) {
                    anchor.clone()
                } else {
                    return Err(Error::Config(
                        "abs_sum optimum on ball/simplex requires the anchor inside the set"
                            .into(),
                    ));
                }
            }
        };
        let mut spec = ObjectiveSpec {
            kind: ObjectiveKind::AbsSum { anchor },
            class: SmoothnessClass::C00,
            n,
            l0: from_count::<T>(n).sqrt(),
            l1: None,
            grad_bound: None,
            f_star: T::zero(),
            x_star,
        };
        spec.f_star = spec.value(&spec.x_star.clone());
        Ok(spec)
    }

    /// f(x) = ln(Σ exp(s·xᵢ))/s with s > 0. Coordinatewise increasing, so a
    /// box is minimized at its lower corner; a ball needs an all-equal
    /// center (minimum at center − (r/√n)·1); the simplex is minimized at
    /// the uniform point.
    pub fn log_sum_exp(scale: T, set: &FeasibleSet<T>) -> Result<Self> {
        if !(scale > T::zero()) || !scale.is_finite() {
            return Err(Error::Config("log_sum_exp scale must be positive".into()));
        }
        let n = set.dim();
        let x_star: Vec<T> = match set {
            FeasibleSet::Box { lo, .. } => lo.clone(),
            FeasibleSet::Ball { center, radius } => {
                let c0 = center[0];
                if center.iter().any(|&v| v != c0) {
                    return Err(Error::Config(
                        "log_sum_exp optimum on a ball requires an all-equal center".into(),
                    ));
                }
                let shift = *radius / from_count::<T>(n).sqrt();
                center.iter().map(|&v| v - shift).collect()
            }
            FeasibleSet::Simplex { n } => vec![T::one() / from_count::<T>(*n); *n],
        };
        let mut spec = ObjectiveSpec {
            kind: ObjectiveKind::LogSumExp { scale },
            class: SmoothnessClass::C11,
            n,
            l0: T::one(),
            l1: Some(scale),
            grad_bound: Some(T::one()),
            f_star: T::zero(),
            x_star,
        };
        spec.f_star = spec.value(&spec.x_star.clone());
        Ok(spec)
    }

    /// Re-class a smooth objective as C⁰,⁰ (uses its value-Lipschitz
    /// constant only). Going the other way needs gradient data, so abs_sum
    /// cannot become C¹,¹.
    pub fn with_class(mut self, class: SmoothnessClass) -> Result<Self> {
        if class == SmoothnessClass::C11 && (self.l1.is_none() || self.grad_bound.is_none()) {
            return Err(Error::Config(
                "objective lacks the gradient data required for class C11".into(),
            ));
        }
        self.class = class;
        Ok(self)
    }

    fn quadratic_argmin(kind: &ObjectiveKind<T>, set: &FeasibleSet<T>) -> Result<Vec<T>> {
        let (q, c) = match kind {
            ObjectiveKind::Quadratic { q, c } => (q, c),
            _ => unreachable!(),
        };
        let tol = cast::<T>(crate::geometry::MEMBERSHIP_TOL);
        // Unconstrained minimizer first: 2Qx = −c.
        let unconstrained: Option<Vec<T>> = match q {
            QuadraticForm::Diagonal(d) => {
                let mut x = Vec::with_capacity(d.len());
                let mut ok = true;
                for (&qi, &ci) in d.iter().zip(c) {
                    if qi > T::zero() {
                        x.push(-ci / (cast::<T>(2.0) * qi));
                    } else if ci == T::zero() {
                        x.push(T::zero());
                    } else {
                        ok = false;
                        break;
                    }
                }
                ok.then_some(x)
            }
            QuadraticForm::Full(m) => cholesky(m).map(|l| {
                let rhs: Vec<T> = c.iter().map(|&v| -v / cast::<T>(2.0)).collect();
                cholesky_solve(&l, &rhs)
            }),
        };
        if let Some(x) = &unconstrained {
            if set.contains(x, tol) {
                return Ok(x.clone());
            }
        }
        match (q, set) {
            (QuadraticForm::Diagonal(d), FeasibleSet::Box { lo, hi }) => Ok(d
                .iter()
                .zip(c)
                .zip(lo.iter().zip(hi))
                .map(|((&qi, &ci), (&l, &h))| {
                    if qi > T::zero() {
                        (-ci / (cast::<T>(2.0) * qi)).max(l).min(h)
                    } else if ci > T::zero() {
                        l
                    } else if ci < T::zero() {
                        h
                    } else {
                        (l + h) / cast(2.0)
                    }
                })
                .collect()),
            (QuadraticForm::Diagonal(d), FeasibleSet::Ball { center, radius }) => {
                let iso = d[0];
                if d.iter().any(|&v| v != iso) || !(iso > T::zero()) {
                    return Err(Error::Config(
                        "quadratic optimum on a ball requires an isotropic positive diagonal or an interior minimizer".into(),
                    ));
                }
                let xu: Vec<T> = c.iter().map(|&ci| -ci / (cast::<T>(2.0) * iso)).collect();
                let dvec = vecops::sub(&xu, center);
                let dist = vecops::norm_l2(&dvec);
                let s = *radius / dist;
                Ok(center
                    .iter()
                    .zip(&dvec)
                    .map(|(&ce, &di)| ce + s * di)
                    .collect())
            }
            (QuadraticForm::Diagonal(d), FeasibleSet::Simplex { .. }) => {
                if d.iter().any(|&v| !(v > T::zero())) {
                    return Err(Error::Config(
                        "quadratic optimum on the simplex requires strictly positive diagonal"
                            .into(),
                    ));
                }
                Ok(simplex_quadratic_argmin(d, c))
            }
            _ => Err(Error::Config(
                "quadratic optimum not analytically available for this (form, set) pairing"
                    .into(),
            )),
        }
    }

    /// Upper bound on ‖∇f‖₂ = ‖2Qx + c‖₂ over the set inflated by
    /// `enlargement` in every coordinate. Exact for diagonal forms on boxes
    /// (and the simplex via its bounding box), interval/operator bounds
    /// otherwise.
    fn quadratic_grad_cap(&self, set: &FeasibleSet<T>, enlargement: T) -> T {
        let (q, c) = match &self.kind {
            ObjectiveKind::Quadratic { q, c } => (q, c),
            _ => unreachable!(),
        };
        let bounds: Option<(Vec<T>, Vec<T>)> = match set {
            FeasibleSet::Box { lo, hi } => Some((
                lo.iter().map(|&v| v - enlargement).collect(),
                hi.iter().map(|&v| v + enlargement).collect(),
            )),
            FeasibleSet::Simplex { n } => Some((
                vec![-enlargement; *n],
                vec![T::one() + enlargement; *n],
            )),
            FeasibleSet::Ball { .. } => None,
        };
        match (q, bounds) {
            (QuadraticForm::Diagonal(d), Some((lo, hi))) => d
                .iter()
                .zip(c)
                .zip(lo.iter().zip(&hi))
                .map(|((&qi, &ci), (&l, &h))| {
                    let two = cast::<T>(2.0);
                    let a = (two * qi * l + ci).abs();
                    let b = (two * qi * h + ci).abs();
                    let m = a.max(b);
                    m * m
                })
                .sum::<T>()
                .sqrt(),
            (QuadraticForm::Full(m), Some((lo, hi))) => {
                let two = cast::<T>(2.0);
                let mut total = T::zero();
                for i in 0..self.n {
                    let mut row = c[i].abs();
                    for j in 0..self.n {
                        row = row + two * m[i][j].abs() * lo[j].abs().max(hi[j].abs());
                    }
                    total = total + row * row;
                }
                total.sqrt()
            }
            (_, None) => {
                // Ball: operator-norm bound around the center.
                let (center, radius) = match set {
                    FeasibleSet::Ball { center, radius } => (center, radius),
                    _ => unreachable!(),
                };
                let reach = *radius + enlargement * from_count::<T>(self.n).sqrt();
                let grad_center = self.quadratic_gradient_at(center);
                vecops::norm_l2(&grad_center) + self.quadratic_curvature_cap() * reach
            }
        }
    }

    /// Upper bound on 2λmax(Q): exact for diagonal, Gershgorin otherwise.
    fn quadratic_curvature_cap(&self) -> T {
        match &self.kind {
            ObjectiveKind::Quadratic { q, .. } => match q {
                QuadraticForm::Diagonal(d) => {
                    cast::<T>(2.0) * d.iter().fold(T::zero(), |m, &v| m.max(v))
                }
                QuadraticForm::Full(m) => {
                    let row_max = m
                        .iter()
                        .map(|row| row.iter().map(|v| v.abs()).sum::<T>())
                        .fold(T::zero(), |a, b| a.max(b));
                    cast::<T>(2.0) * row_max
                }
            },
            _ => unreachable!(),
        }
    }

    fn quadratic_gradient_at(&self, x: &[T]) -> Vec<T> {
        match &self.kind {
            ObjectiveKind::Quadratic { q, c } => match q {
                QuadraticForm::Diagonal(d) => d
                    .iter()
                    .zip(c)
                    .zip(x)
                    .map(|((&qi, &ci), &xi)| cast::<T>(2.0) * qi * xi + ci)
                    .collect(),
                QuadraticForm::Full(m) => m
                    .iter()
                    .zip(c)
                    .map(|(row, &ci)| cast::<T>(2.0) * vecops::dot(row, x) + ci)
                    .collect(),
            },
            _ => unreachable!(),
        }
    }

    pub fn kind(&self) -> &ObjectiveKind<T> {
        &self.kind
    }

    pub fn class(&self) -> SmoothnessClass {
        self.class
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Value-Lipschitz constant (Euclidean norm).
    pub fn l0(&self) -> T {
        self.l0
    }

    /// Gradient-Lipschitz constant, present for C¹,¹ data.
    pub fn l1(&self) -> Option<T> {
        self.l1
    }

    /// Cap on ‖∇f‖₂ over the enlarged feasible set, present for C¹,¹ data.
    pub fn grad_bound(&self) -> Option<T> {
        self.grad_bound
    }

    pub fn f_star(&self) -> T {
        self.f_star
    }

    pub fn x_star(&self) -> &[T] {
        &self.x_star
    }

    /// Exact (noise-free) objective value; defined on all of Rⁿ.
    pub fn value(&self, x: &[T]) -> T {
        debug_assert_eq!(x.len(), self.n);
        match &self.kind {
            ObjectiveKind::Quadratic { q, c } => {
                let quad = match q {
                    QuadraticForm::Diagonal(d) => d
                        .iter()
                        .zip(x)
                        .map(|(&qi, &xi)| qi * xi * xi)
                        .sum::<T>(),
                    QuadraticForm::Full(m) => m
                        .iter()
                        .zip(x)
                        .map(|(row, &xi)| xi * vecops::dot(row, x))
                        .sum::<T>(),
                };
                quad + vecops::dot(c, x)
            }
            ObjectiveKind::AbsSum { anchor } => x
                .iter()
                .zip(anchor)
                .map(|(&xi, &ai)| (xi - ai).abs())
                .sum(),
            ObjectiveKind::LogSumExp { scale } => {
                let m = x
                    .iter()
                    .map(|&v| *scale * v)
                    .fold(T::neg_infinity(), |a, b| a.max(b));
                let s: T = x.iter().map(|&v| (*scale * v - m).exp()).sum();
                (m + s.ln()) / *scale
            }
        }
    }

    /// Exact gradient. Errors at kinks of `abs_sum`.
    pub fn gradient(&self, x: &[T]) -> Result<Vec<T>> {
        check_dim(x, self.n)?;
        match &self.kind {
            ObjectiveKind::Quadratic { .. } => Ok(self.quadratic_gradient_at(x)),
            ObjectiveKind::AbsSum { anchor } => x
                .iter()
                .zip(anchor)
                .enumerate()
                .map(|(i, (&xi, &ai))| {
                    if xi == ai {
                        Err(Error::NotDifferentiable { coordinate: i })
                    } else if xi > ai {
                        Ok(T::one())
                    } else {
                        Ok(-T::one())
                    }
                })
                .collect(),
            ObjectiveKind::LogSumExp { scale } => {
                let m = x
                    .iter()
                    .map(|&v| *scale * v)
                    .fold(T::neg_infinity(), |a, b| a.max(b));
                let e: Vec<T> = x.iter().map(|&v| (*scale * v - m).exp()).collect();
                let total: T = e.iter().copied().sum();
                Ok(e.iter().map(|&v| v / total).collect())
            }
        }
    }

    /// One noisy oracle query: f(x) plus a fresh noise draw.
    pub fn noisy_value<R: Rng + ?Sized>(
        &self,
        noise: &NoiseModel<T>,
        x: &[T],
        rng: &mut R,
    ) -> T {
        self.value(x) + noise.draw(x, rng)
    }
}

/// Shape of the state-dependent bias `b(x)`, scaled by the bound B.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BiasField {
    /// b(x) = B
    Constant,
    /// b(x) = B·sin(Σxᵢ); bounded by B, smooth, and different at the two
    /// probe points of the estimator.
    SineOfSum,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseKind<T> {
    None,
    Gaussian { sd: T },
    Biased { field: BiasField, bound: T, sd: T },
}

/// Noise law for the oracle. `v` is the declared second-moment bound
/// E[e(x,ω)²] ≤ V²; constructors set a valid value, and
/// [`NoiseModel::with_declared_v`] can override it (useful as a negative
/// control in verification).
#[derive(Clone, Debug, Serialize)]
pub struct NoiseModel<T> {
    kind: NoiseKind<T>,
    v: T,
}

impl<T: Scalar> NoiseModel<T> {
    pub fn none() -> Self {
        NoiseModel {
            kind: NoiseKind::None,
            v: T::zero(),
        }
    }

    pub fn gaussian(sd: T) -> Result<Self> {
        if !(sd >= T::zero()) || !sd.is_finite() {
            return Err(Error::Config("noise sd must be nonnegative".into()));
        }
        Ok(NoiseModel {
            kind: NoiseKind::Gaussian { sd },
            v: sd,
        })
    }

    pub fn biased(field: BiasField, bound: T, sd: T) -> Result<Self> {
        if !(bound >= T::zero()) || !(sd >= T::zero()) {
            return Err(Error::Config("bias bound and sd must be nonnegative".into()));
        }
        Ok(NoiseModel {
            kind: NoiseKind::Biased { field, bound, sd },
            v: (bound * bound + sd * sd).sqrt(),
        })
    }

    /// Override the declared V (the actual law is unchanged).
    pub fn with_declared_v(mut self, v: T) -> Result<Self> {
        if !(v >= T::zero()) {
            return Err(Error::Config("declared V must be nonnegative".into()));
        }
        self.v = v;
        Ok(self)
    }

    pub fn kind(&self) -> &NoiseKind<T> {
        &self.kind
    }

    /// Conditional mean of the noise at x.
    pub fn bias(&self, x: &[T]) -> T {
        match &self.kind {
            NoiseKind::None | NoiseKind::Gaussian { .. } => T::zero(),
            NoiseKind::Biased { field, bound, .. } => match field {
                BiasField::Constant => *bound,
                BiasField::SineOfSum => {
                    let s: T = x.iter().copied().sum();
                    *bound * s.sin()
                }
            },
        }
    }

    /// The bound B with |b(x)| ≤ B.
    pub fn bias_bound(&self) -> T {
        match &self.kind {
            NoiseKind::None | NoiseKind::Gaussian { .. } => T::zero(),
            NoiseKind::Biased { bound, .. } => *bound,
        }
    }

    pub fn sd(&self) -> T {
        match &self.kind {
            NoiseKind::None => T::zero(),
            NoiseKind::Gaussian { sd } => *sd,
            NoiseKind::Biased { sd, .. } => *sd,
        }
    }

    /// Declared second-moment bound V.
    pub fn declared_v(&self) -> T {
        self.v
    }

    /// One fresh noise draw e(x, ω).
    pub fn draw<R: Rng + ?Sized>(&self, x: &[T], rng: &mut R) -> T {
        match &self.kind {
            NoiseKind::None => T::zero(),
            NoiseKind::Gaussian { sd } => *sd * T::standard_normal(rng),
            NoiseKind::Biased { sd, .. } => self.bias(x) + *sd * T::standard_normal(rng),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::FeasibleSet;
    use crate::numerics::RunningMoments;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn unit_box(n: usize) -> FeasibleSet<f64> {
        FeasibleSet::new_box(vec![-1.0; n], vec![1.0; n]).unwrap()
    }

    fn sphere_quadratic(n: usize) -> ObjectiveSpec<f64> {
        ObjectiveSpec::quadratic_diag(vec![1.0; n], vec![0.0; n], &unit_box(n), 0.0).unwrap()
    }

    #[test]
    fn quadratic_values_and_gradients() {
        let obj = sphere_quadratic(2);
        assert_eq!(obj.value(&[1.0, 2.0]), 5.0);
        assert_eq!(obj.gradient(&[1.0, 2.0]).unwrap(), vec![2.0, 4.0]);
        assert_eq!(obj.f_star(), 0.0);
        assert_eq!(obj.x_star(), &[0.0, 0.0]);
        // Stationarity at an interior optimum.
        let g = obj.gradient(obj.x_star()).unwrap();
        assert!(g.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn quadratic_box_optimum_clamps() {
        // f = Σ xᵢ² + 4x₀: unconstrained min (−2, 0) clamps to (−1, 0).
        let obj = ObjectiveSpec::quadratic_diag(
            vec![1.0, 1.0],
            vec![4.0, 0.0],
            &unit_box(2),
            0.0,
        )
        .unwrap();
        assert_eq!(obj.x_star(), &[-1.0, 0.0]);
        assert_eq!(obj.f_star(), -3.0);
    }

    #[test]
    fn quadratic_full_matrix_interior_optimum() {
        let q = QuadraticForm::Full(vec![vec![2.0, 0.5], vec![0.5, 1.0]]);
        let obj = ObjectiveSpec::quadratic(q, vec![-1.0, 0.5], &unit_box(2), 0.0).unwrap();
        // 2Qx* = −c must hold at the interior optimum.
        let g = obj.gradient(obj.x_star()).unwrap();
        assert!(g.iter().all(|&v| v.abs() < 1e-12));
        assert!((obj.value(obj.x_star()) - obj.f_star()).abs() < 1e-15);
        // A full matrix whose constrained optimum is not analytic is refused.
        let q = QuadraticForm::Full(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert!(ObjectiveSpec::quadratic(q, vec![10.0, 0.0], &unit_box(2), 0.0).is_err());
    }

    #[test]
    fn quadratic_simplex_waterfill_is_exact() {
        let simplex = FeasibleSet::new_simplex(3).unwrap();
        let obj = ObjectiveSpec::quadratic_diag(
            vec![1.0, 2.0, 4.0],
            vec![0.1, -0.3, 0.0],
            &simplex,
            0.0,
        )
        .unwrap();
        let xs = obj.x_star().to_vec();
        assert!(simplex.contains(&xs, 1e-12));
        // KKT: on the support, 2qᵢxᵢ + cᵢ is constant; off-support it is larger.
        let mults: Vec<f64> = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| 2.0 * [1.0, 2.0, 4.0][i] * x + [0.1, -0.3, 0.0][i])
            .collect();
        let lambda = mults
            .iter()
            .zip(&xs)
            .filter(|(_, &x)| x > 0.0)
            .map(|(&m, _)| m)
            .fold(f64::NAN, |a, b| if a.is_nan() { b } else { a });
        for (m, &x) in mults.iter().zip(&xs) {
            if x > 0.0 {
                assert!((m - lambda).abs() < 1e-12);
            } else {
                assert!(*m >= lambda - 1e-12);
            }
        }
        // Sampled feasible points never beat f_star.
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let p = simplex.sample_uniform(&mut rng);
            assert!(obj.value(&p) >= obj.f_star() - 1e-12);
        }
    }

    #[test]
    fn abs_sum_examples() {
        let obj = ObjectiveSpec::abs_sum(vec![0.0, 0.0], &unit_box(2)).unwrap();
        assert_eq!(obj.value(&[3.0, -4.0]), 7.0);
        assert_eq!(obj.l0(), (2.0f64).sqrt());
        assert_eq!(obj.f_star(), 0.0);
        // Kink flag.
        assert!(matches!(
            obj.gradient(&[0.0, 1.0]),
            Err(Error::NotDifferentiable { coordinate: 0 })
        ));
        assert_eq!(obj.gradient(&[2.0, -0.5]).unwrap(), vec![1.0, -1.0]);
        // Anchor outside the box clamps.
        let obj =
            ObjectiveSpec::abs_sum(vec![2.0, 0.0], &unit_box(2)).unwrap();
        assert_eq!(obj.x_star(), &[1.0, 0.0]);
        assert_eq!(obj.f_star(), 1.0);
    }

    #[test]
    fn log_sum_exp_optima_per_set() {
        let obj = ObjectiveSpec::log_sum_exp(2.0, &unit_box(3)).unwrap();
        assert_eq!(obj.x_star(), &[-1.0, -1.0, -1.0]);
        assert!((obj.value(obj.x_star()) - obj.f_star()).abs() < 1e-12);
        assert!((obj.f_star() - ((3.0f64).ln() / 2.0 - 1.0)).abs() < 1e-12);

        let ball = FeasibleSet::new_ball(vec![0.5; 4], 2.0).unwrap();
        let obj = ObjectiveSpec::log_sum_exp(1.0, &ball).unwrap();
        let expect = (4.0f64).ln() + 0.5 - 2.0 / 2.0;
        assert!((obj.f_star() - expect).abs() < 1e-12);

        let simplex = FeasibleSet::new_simplex(4).unwrap();
        let obj = ObjectiveSpec::log_sum_exp(3.0, &simplex).unwrap();
        assert!((obj.f_star() - ((4.0f64).ln() / 3.0 + 0.25)).abs() < 1e-12);

        // Sampled feasible values never beat f_star, and a local numeric
        // search from random starts cannot find anything below it either.
        let mut rng = ChaCha12Rng::seed_from_u64(12);
        let mut best = f64::INFINITY;
        for _ in 0..2000 {
            let mut p = simplex.sample_uniform(&mut rng);
            let mut f = obj.value(&p);
            // crude coordinate-pair descent staying on the simplex
            for _ in 0..200 {
                let i = (rng.gen::<u64>() % 4) as usize;
                let j = (rng.gen::<u64>() % 4) as usize;
                if i == j {
                    continue;
                }
                let step = 0.01 * f64::standard_normal(&mut rng);
                let step = step.clamp(-p[i], p[j]);
                p[i] += step;
                p[j] -= step;
                let f2 = obj.value(&p);
                if f2 < f {
                    f = f2;
                } else {
                    p[i] -= step;
                    p[j] += step;
                }
            }
            best = best.min(f);
            assert!(f >= obj.f_star() - 1e-12);
        }
        assert!(best <= obj.f_star() + 1e-4, "numeric search should approach f_star");
    }

    #[test]
    fn lse_gradient_matches_finite_differences() {
        let obj = ObjectiveSpec::log_sum_exp(1.5, &unit_box(4)).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        for _ in 0..50 {
            let x = unit_box(4).sample_uniform(&mut rng);
            let g = obj.gradient(&x).unwrap();
            for i in 0..4 {
                let h = 1e-6;
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += h;
                xm[i] -= h;
                let fd = (obj.value(&xp) - obj.value(&xm)) / (2.0 * h);
                assert!(
                    (fd - g[i]).abs() <= 1e-5 * (1.0 + g[i].abs()),
                    "component {i}: fd {fd} vs grad {}",
                    g[i]
                );
            }
        }
    }

    #[test]
    fn lipschitz_constants_certified_by_sampling() {
        let mut rng = ChaCha12Rng::seed_from_u64(14);
        let mu = 0.1;
        let infl = 6.0 * mu;
        let inflated =
            FeasibleSet::new_box(vec![-1.0 - infl; 3], vec![1.0 + infl; 3]).unwrap();

        let abs = ObjectiveSpec::abs_sum(vec![0.2, -0.1, 0.0], &unit_box(3)).unwrap();
        let quad = ObjectiveSpec::quadratic_diag(
            vec![1.0, 0.5, 2.0],
            vec![0.3, 0.0, -1.0],
            &unit_box(3),
            infl,
        )
        .unwrap();
        let lse = ObjectiveSpec::log_sum_exp(2.0, &unit_box(3)).unwrap();

        for _ in 0..10_000 {
            let x = inflated.sample_uniform(&mut rng);
            let y = inflated.sample_uniform(&mut rng);
            let dxy = vecops::dist_l2(&x, &y);
            // C00 certificates
            for obj in [&abs, &quad, &lse] {
                assert!(
                    (obj.value(&x) - obj.value(&y)).abs() <= obj.l0() * dxy * (1.0 + 1e-9),
                    "L0 violated"
                );
            }
            // C11 certificates
            for obj in [&quad, &lse] {
                let gx = obj.gradient(&x).unwrap();
                let gy = obj.gradient(&y).unwrap();
                assert!(
                    vecops::dist_l2(&gx, &gy) <= obj.l1().unwrap() * dxy * (1.0 + 1e-9),
                    "L1 violated"
                );
                assert!(vecops::norm_l2(&gx) <= obj.grad_bound().unwrap() * (1.0 + 1e-9));
            }
        }
    }

    #[test]
    fn noise_draws_match_declared_law() {
        let mut rng = ChaCha12Rng::seed_from_u64(15);
        let obj = sphere_quadratic(2);
        // Noiseless oracle is exact.
        assert_eq!(obj.noisy_value(&NoiseModel::none(), &[1.0, 2.0], &mut rng), 5.0);
        // Constant bias, zero sd: a deterministic shift.
        let nm = NoiseModel::biased(BiasField::Constant, 0.3, 0.0).unwrap();
        assert!((obj.noisy_value(&nm, &[1.0, 2.0], &mut rng) - 5.3).abs() < 1e-15);
        // Gaussian: the mean over many draws recovers f within 4 standard errors.
        let sd = 0.1;
        let nm = NoiseModel::gaussian(sd).unwrap();
        let n_draws = 1_000_000u64;
        let mut mom = RunningMoments::new();
        for _ in 0..n_draws {
            mom.push(obj.noisy_value(&nm, &[1.0, 2.0], &mut rng));
        }
        let tol = 4.0 * sd / (n_draws as f64).sqrt();
        assert!(
            (mom.mean() - 5.0).abs() <= tol,
            "mean {} vs 5.0 ± {tol}",
            mom.mean()
        );
    }

    #[test]
    fn bias_field_matches_empirical_mean_at_probes() {
        let mut rng = ChaCha12Rng::seed_from_u64(16);
        let nm = NoiseModel::biased(BiasField::SineOfSum, 0.25, 0.05).unwrap();
        let boxset = unit_box(3);
        let n_draws = 20_000u64;
        for _ in 0..20 {
            let x = boxset.sample_uniform(&mut rng);
            let mut mom = RunningMoments::new();
            for _ in 0..n_draws {
                mom.push(nm.draw(&x, &mut rng));
            }
            let want = nm.bias(&x);
            assert!(want.abs() <= nm.bias_bound());
            let tol = 4.0 * nm.sd() / (n_draws as f64).sqrt();
            assert!((mom.mean() - want).abs() <= tol);
        }
        // Declared V is consistent: b(x)² + sd² ≤ V².
        assert!(nm.bias_bound().powi(2) + nm.sd().powi(2) <= nm.declared_v().powi(2) + 1e-15);
    }

    #[test]
    fn paired_noise_draws_are_uncorrelated() {
        // Correlation between the noise at x and at x + μu over 1e5 paired
        // draws from distinct sub-streams stays below 0.01.
        use crate::rng::StreamTree;
        let tree = StreamTree::from_master_seed(99);
        let nm = NoiseModel::gaussian(1.0).unwrap();
        let x = [0.3, -0.2];
        let y = [0.35, -0.12];
        let n = 100_000u64;
        let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0f64, 0.0, 0.0, 0.0, 0.0);
        for s in 0..n {
            let a = nm.draw(&x, &mut tree.rng(0, s, 1));
            let b = nm.draw(&y, &mut tree.rng(0, s, 2));
            sx += a;
            sy += b;
            sxx += a * a;
            syy += b * b;
            sxy += a * b;
        }
        let nf = n as f64;
        let cov = sxy / nf - (sx / nf) * (sy / nf);
        let var_a = sxx / nf - (sx / nf).powi(2);
        let var_b = syy / nf - (sy / nf).powi(2);
        let corr = cov / (var_a * var_b).sqrt();
        assert!(corr.abs() <= 0.01, "correlation {corr}");
    }

    #[test]
    fn understated_v_is_representable() {
        let nm = NoiseModel::gaussian(0.1)
            .unwrap()
            .with_declared_v(0.01)
            .unwrap();
        assert_eq!(nm.declared_v(), 0.01);
        assert_eq!(nm.sd(), 0.1);
    }
}
