//! Small numeric utilities: compensated summation, Wilson intervals,
//! percentiles.

use serde::Serialize;

use crate::scalar::{cast, from_count, Scalar};

/// Neumaier-compensated accumulator.
///
/// Partial sums of step sizes run over as many as 1e9 terms in bound scans;
/// plain summation loses digits there, compensated summation does not.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum<T> {
    sum: T,
    compensation: T,
}

impl<T: Scalar> CompensatedSum<T> {
    pub fn new() -> Self {
        CompensatedSum {
            sum: T::zero(),
            compensation: T::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, v: T) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.compensation = self.compensation + ((self.sum - t) + v);
        } else {
            self.compensation = self.compensation + ((v - t) + self.sum);
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> T {
        self.sum + self.compensation
    }
}

/// Running mean and variance (Welford), for Monte Carlo standard errors.
#[derive(Clone, Copy, Debug)]
pub struct RunningMoments<T> {
    count: u64,
    mean: T,
    m2: T,
}

impl<T: Scalar> RunningMoments<T> {
    pub fn new() -> Self {
        RunningMoments {
            count: 0,
            mean: T::zero(),
            m2: T::zero(),
        }
    }

    #[inline]
    pub fn push(&mut self, x: T) {
        self.count += 1;
        let n = T::from_u64(self.count).expect("count fits scalar");
        let d = x - self.mean;
        self.mean = self.mean + d / n;
        let d2 = x - self.mean;
        self.m2 = self.m2 + d * d2;
    }

    pub fn merge(&mut self, other: &Self) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let na = T::from_u64(self.count).expect("count fits scalar");
        let nb = T::from_u64(other.count).expect("count fits scalar");
        let total = na + nb;
        let d = other.mean - self.mean;
        self.mean = self.mean + d * nb / total;
        self.m2 = self.m2 + other.m2 + d * d * na * nb / total;
        self.count += other.count;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> T {
        self.mean
    }

    /// Sample variance (n - 1 denominator); zero for fewer than two samples.
    pub fn variance(&self) -> T {
        if self.count < 2 {
            T::zero()
        } else {
            self.m2 / T::from_u64(self.count - 1).expect("count fits scalar")
        }
    }

    /// Standard error of the mean.
    pub fn std_err(&self) -> T {
        if self.count == 0 {
            T::zero()
        } else {
            (self.variance() / T::from_u64(self.count).expect("count fits scalar")).sqrt()
        }
    }
}

impl<T: Scalar> Default for RunningMoments<T> {
    fn default() -> Self {
        Self::new()
    }
}

/// Two-sided 95% Wilson score interval for a binomial proportion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WilsonInterval<T> {
    pub low: T,
    pub high: T,
}

/// z quantile for the 95% two-sided interval.
const WILSON_Z_95: f64 = 1.959963984540054;

pub fn wilson_interval_95<T: Scalar>(successes: u64, trials: u64) -> WilsonInterval<T> {
    assert!(trials > 0, "Wilson interval needs at least one trial");
    assert!(successes <= trials);
    let n = from_count::<T>(trials as usize);
    let z = cast::<T>(WILSON_Z_95);
    let z2 = z * z;
    let p = T::from_u64(successes).expect("count fits scalar") / n;
    let denom = T::one() + z2 / n;
    let center = p + z2 / (cast::<T>(2.0) * n);
    let half = z * (p * (T::one() - p) / n + z2 / (cast::<T>(4.0) * n * n)).sqrt();
    let low = ((center - half) / denom).max(T::zero());
    let high = ((center + half) / denom).min(T::one());
    WilsonInterval { low, high }
}

/// Sorts a copy of the data and reads quantile `q` in [0, 1] by the
/// nearest-rank rule. Deterministic for a deterministic input order.
pub fn quantile<T: Scalar>(data: &[T], q: T) -> T {
    assert!(!data.is_empty(), "quantile of empty data");
    let mut v = data.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("no NaN in quantile input"));
    let n = v.len();
    let rank = (q * from_count::<T>(n)).ceil();
    let idx = rank.to_usize().unwrap_or(1).clamp(1, n);
    v[idx - 1]
}

pub fn median<T: Scalar>(data: &[T]) -> T {
    quantile(data, cast(0.5))
}
