//! Exact binomial test, learning-curve smoothing and selection of the
//! representative epoch.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rnn::TrainReport;
use crate::scalar::Scalar;

/// Probability types the binomial tails can be evaluated in.
///
/// Floating types sum the mass in log space; [`BigRational`] sums it exactly.
pub trait TailMass: Clone + PartialOrd {
    /// `(P(X <= k), P(X >= k))` for `X ~ Binomial(n, p0)`.
    fn tails(k: u64, n: u64, p0: &Self) -> (Self, Self);
    fn unit() -> Self;
    fn twice(&self) -> Self;
}

fn ln_factorials(n: u64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n as usize + 1);
    let mut acc = 0.0f64;
    out.push(0.0);
    for j in 1..=n {
        acc += (j as f64).ln();
        out.push(acc);
    }
    out
}

fn log_sum_exp(terms: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = terms.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.map(|t| (t - max).exp()).sum::<f64>().ln()
}

fn log_tails(k: u64, n: u64, p0: f64) -> (f64, f64) {
    let lf = ln_factorials(n);
    let (lp, lq) = (p0.ln(), (1.0 - p0).ln());
    let term = |i: u64| {
        let i_f = i as f64;
        let r = (n - i) as f64;
        lf[n as usize] - (lf[i as usize] + lf[(n - i) as usize]) + (i_f * lp + r * lq)
    };
    // both tails are summed from the extreme towards k
    let lower = log_sum_exp((0..=k).map(term));
    let upper = log_sum_exp((k..=n).rev().map(term));
    (lower.exp().min(1.0), upper.exp().min(1.0))
}

macro_rules! float_tail_mass {
    ($($t:ty),*) => {$(
        impl TailMass for $t {
            fn tails(k: u64, n: u64, p0: &Self) -> (Self, Self) {
                let (lo, hi) = log_tails(k, n, *p0 as f64);
                (lo as $t, hi as $t)
            }
            fn unit() -> Self { 1.0 }
            fn twice(&self) -> Self { 2.0 * self }
        }
    )*};
}
float_tail_mass!(f32, f64);

impl TailMass for BigRational {
    fn tails(k: u64, n: u64, p0: &Self) -> (Self, Self) {
        let q0 = BigRational::one() - p0;
        let mut lower = BigRational::zero();
        let mut upper = BigRational::zero();
        // pmf(i) = C(n, i) p^i q^(n-i), stepped with pmf(i+1) = pmf(i) * (n-i)/(i+1) * p/q
        let mut pmf = num_traits::pow(q0.clone(), n as usize);
        for i in 0..=n {
            if i <= k {
                lower += &pmf;
            }
            if i >= k {
                upper += &pmf;
            }
            if i < n {
                if q0.is_zero() {
                    break;
                }
                pmf = pmf * BigRational::new(BigInt::from(n - i), BigInt::from(i + 1)) * p0 / &q0;
            }
        }
        (lower, upper)
    }
    fn unit() -> Self {
        BigRational::one()
    }
    fn twice(&self) -> Self {
        self * BigRational::from_integer(BigInt::from(2))
    }
}

/// Two-sided p-value `min(1, 2 min(P(X <= k), P(X >= k)))`.
pub fn binomial_p_value<P: TailMass>(k: u64, n: u64, p0: &P) -> P {
    let (lo, hi) = P::tails(k, n, p0);
    let smaller = if lo < hi { lo } else { hi };
    let doubled = smaller.twice();
    if doubled > P::unit() {
        P::unit()
    } else {
        doubled
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinomialTestResult {
    pub successes: u64,
    pub trials: u64,
    pub p0: f64,
    pub p_value: f64,
    pub alpha: f64,
    pub reject: bool,
}

/// Exact two-sided one-sample binomial test.
pub fn binomial_test(k: u64, n: u64, p0: f64, alpha: f64) -> Result<BinomialTestResult> {
    if n == 0 || k > n {
        return Err(Error::Parameter(format!("binomial test needs 0 <= k <= n, n >= 1 (k = {k}, n = {n})")));
    }
    if !(p0 > 0.0 && p0 < 1.0) {
        return Err(Error::Parameter(format!("null proportion {p0} outside (0, 1)")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Parameter(format!("significance level {alpha} outside (0, 1)")));
    }
    let p_value = binomial_p_value(k, n, &p0);
    Ok(BinomialTestResult { successes: k, trials: n, p0, p_value, alpha, reject: p_value < alpha })
}

/// Trailing moving average; the first `window - 1` points average the available prefix.
pub fn smooth<T: Scalar>(curve: &[T], window: usize) -> Result<Vec<T>> {
    if window == 0 {
        return Err(Error::Parameter("smoothing window must be at least 1".into()));
    }
    if curve.is_empty() {
        return Err(Error::Length("cannot smooth an empty curve".into()));
    }
    Ok((0..curve.len())
        .map(|i| {
            let w = &curve[(i + 1).saturating_sub(window)..=i];
            let mean = w.iter().copied().sum::<T>() / T::of_usize(w.len());
            let (lo, hi) = w.iter().fold((w[0], w[0]), |(lo, hi), &v| (lo.min(v), hi.max(v)));
            // rounding can push the mean an ulp outside the window's range
            mean.max(lo).min(hi)
        })
        .collect())
}

/// 1-based epoch minimizing `train + val` (earliest on ties) and the accuracy there.
pub fn representative_from_curves<T: Scalar>(train: &[T], val: &[T], acc: &[T]) -> Option<(usize, T)> {
    let n = train.len().min(val.len()).min(acc.len());
    let mut best: Option<(usize, T)> = None;
    for i in 0..n {
        let combined = train[i] + val[i];
        if best.is_none_or(|(_, b)| combined < b) {
            best = Some((i, combined));
        }
    }
    best.map(|(i, _)| (i + 1, acc[i]))
}

/// Representative epoch and accuracy from the smoothed curves of a report.
pub fn representative_accuracy<T: Scalar>(report: &TrainReport<T>) -> Option<(usize, T)> {
    representative_from_curves(&report.train_loss_smooth, &report.val_loss_smooth, &report.test_acc_smooth)
}

/// Summary of a training run: representative accuracy and its binomial test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub representative_epoch: usize,
    pub representative_accuracy: f64,
    pub binomial: BinomialTestResult,
}

/// Tests the representative accuracy against chance over `n_test` items.
pub fn verdict_from_curves(train: &[f64], val: &[f64], acc: &[f64], n_test: u64, alpha: f64) -> Result<Verdict> {
    let (epoch, accuracy) = representative_from_curves(train, val, acc)
        .ok_or_else(|| Error::Length("report has no epochs".into()))?;
    let k = (accuracy * n_test as f64).round() as u64;
    Ok(Verdict {
        representative_epoch: epoch,
        representative_accuracy: accuracy,
        binomial: binomial_test(k.min(n_test), n_test, 0.5, alpha)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half() -> BigRational {
        BigRational::new(BigInt::from(1), BigInt::from(2))
    }

    #[test]
    fn all_successes() {
        for n in [1u64, 5, 10, 30] {
            let r = binomial_test(n, n, 0.5, 0.05).unwrap();
            let expect = (2.0 * 0.5f64.powi(n as i32)).min(1.0);
            assert!((r.p_value - expect).abs() <= 1e-14 * expect, "n = {n}");
        }
    }

    #[test]
    fn center_is_capped() {
        let r = binomial_test(125, 250, 0.5, 0.05).unwrap();
        assert_eq!(r.p_value, 1.0);
        assert!(!r.reject);
        assert_eq!(binomial_p_value(125, 250, &half()), BigRational::one());
    }

    #[test]
    fn far_tail_without_underflow() {
        let r = binomial_test(245, 250, 0.5, 0.05).unwrap();
        assert!(r.p_value < 1e-50 && r.p_value > 0.0, "{}", r.p_value);
        assert!(r.reject);
        let exact = binomial_p_value(245, 250, &half());
        let approx = num_traits::ToPrimitive::to_f64(&exact).unwrap();
        assert!((r.p_value - approx).abs() <= 1e-12 * approx);
    }

    #[test]
    fn symmetric_under_half() {
        for n in 1..=80u64 {
            for k in 0..=n {
                assert_eq!(binomial_test(k, n, 0.5, 0.05).unwrap().p_value, binomial_test(n - k, n, 0.5, 0.05).unwrap().p_value);
            }
        }
    }

    #[test]
    fn invalid_arguments() {
        assert!(binomial_test(3, 2, 0.5, 0.05).is_err());
        assert!(binomial_test(0, 0, 0.5, 0.05).is_err());
        assert!(binomial_test(1, 2, 1.0, 0.05).is_err());
    }

    #[test]
    fn smoothing_examples() {
        assert_eq!(smooth(&[0.3; 9], 5).unwrap(), vec![0.3; 9]);
        let s = smooth(&[0.0, 0.0, 0.0, 0.0, 5.0], 5).unwrap();
        assert_eq!(s[4], 1.0);
        let c = [1.0, 4.0, -2.0, 0.5];
        assert_eq!(smooth(&c, 1).unwrap(), c.to_vec());
        assert_eq!(smooth(&[2.0, 4.0, 6.0], 5).unwrap(), vec![2.0, 3.0, 4.0]);
        assert!(smooth::<f64>(&[], 5).is_err());
        assert!(smooth(&c, 0).is_err());
    }

    #[test]
    fn representative_examples() {
        let dec: Vec<f64> = (0..20).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let acc: Vec<f64> = (0..20).map(|i| 0.5 + 0.01 * i as f64).collect();
        assert_eq!(representative_from_curves(&dec, &dec, &acc), Some((20, acc[19])));

        let mut train = vec![1.0; 12];
        train[6] = 0.2;
        let val = vec![0.5; 12];
        assert_eq!(representative_from_curves(&train, &val, &acc[..12]).unwrap().0, 7);

        let mut tied = vec![1.0; 10];
        tied[3] = 0.1;
        tied[8] = 0.1;
        assert_eq!(representative_from_curves(&tied, &[0.0; 10], &acc[..10]).unwrap().0, 4);
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn smooth_stays_in_range(curve in prop::collection::vec(-5.0f64..5.0, 1..60), w in 1usize..9) {
                let (lo, hi) = curve.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
                for v in smooth(&curve, w).unwrap() {
                    prop_assert!(v >= lo && v <= hi);
                }
            }

            #[test]
            fn float_matches_exact_for_general_p0(n in 1u64..120, k_frac in 0.0f64..=1.0, num in 1i64..20) {
                let k = ((n as f64) * k_frac).floor() as u64;
                let p0_exact = BigRational::new(BigInt::from(num), BigInt::from(20));
                let p0 = num as f64 / 20.0;
                let exact = num_traits::ToPrimitive::to_f64(&binomial_p_value(k, n, &p0_exact)).unwrap();
                let approx = binomial_p_value(k, n, &p0);
                prop_assert!((approx - exact).abs() <= 1e-11 * exact.max(1e-300), "{} vs {}", approx, exact);
            }
        }
    }
}
