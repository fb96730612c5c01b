use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::scalar::Scalar;
use crate::series::{SeriesMeta, TimeSeries};

use super::AR_BURN_IN;

/// AR(1) coefficient; innovations are standard normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams<T> {
    pub alpha: T,
}

impl<T: Scalar> NoiseParams<T> {
    pub fn new(alpha: T) -> Result<Self> {
        if !(alpha.abs() < T::one()) {
            return Err(Error::Nonstationary(alpha.to_f64_lossy()));
        }
        Ok(Self { alpha })
    }
}

/// `y = x * sqrt(|x|)`
#[inline]
pub fn static_transform<T: Scalar>(x: T) -> T {
    x * x.abs().sqrt()
}

/// `[x0, alpha*x0 + e[0], ...]`, one more element than `innovations`.
pub fn ar1_recursion<T: Scalar>(alpha: T, x0: T, innovations: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(innovations.len() + 1);
    let mut x = x0;
    out.push(x);
    for &e in innovations {
        x = alpha * x + e;
        out.push(x);
    }
    out
}

/// Latent AR(1) path of length `n`, started from the stationary law and
/// then run through `burn_in` extra steps.
pub(crate) fn ar1_latent<T: Scalar, R: Rng>(alpha: T, n: usize, burn_in: usize, rng: &mut R) -> Vec<T> {
    let a = alpha.to_f64_lossy();
    let sd0 = (1.0 / (1.0 - a * a)).sqrt();
    let mut draw = || -> f64 { StandardNormal.sample(&mut *rng) };
    let mut x = sd0 * draw();
    for _ in 0..burn_in {
        x = a * x + draw();
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        if i > 0 {
            x = a * x + draw();
        }
        out.push(T::of(x));
    }
    out
}

pub(crate) fn ar1_nonlinear_with<T: Scalar, R: Rng>(params: &NoiseParams<T>, n: usize, rng: &mut R) -> Result<TimeSeries<T>> {
    NoiseParams::new(params.alpha)?;
    let samples = ar1_latent(params.alpha, n, AR_BURN_IN, rng).into_iter().map(static_transform).collect();
    let meta = SeriesMeta::new("ar1").param("alpha", params.alpha.to_f64_lossy()).burn_in(AR_BURN_IN);
    Ok(TimeSeries::new(samples)?.with_meta(meta))
}

/// Static nonlinear transform of an AR(1) process.
pub fn generate_ar1_nonlinear<T: Scalar>(params: &NoiseParams<T>, n: usize, seed: u64) -> Result<TimeSeries<T>> {
    let mut rng = stream_rng(seed, 0);
    let s = ar1_nonlinear_with(params, n, &mut rng)?;
    let meta = s.meta().clone().seed(seed);
    Ok(s.with_meta(meta))
}
