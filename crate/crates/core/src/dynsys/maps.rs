use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::{SeriesMeta, TimeSeries};

use super::ESCAPE_BOUND;

/// Parameters of the logistic and Hénon maps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapParams<T> {
    /// Logistic growth rate.
    pub r: T,
    pub a: T,
    pub b: T,
}

impl<T: Scalar> Default for MapParams<T> {
    fn default() -> Self {
        Self { r: T::of(4.0), a: T::of(1.4), b: T::of(0.3) }
    }
}

#[inline]
pub fn logistic_step<T: Scalar>(x: T, r: T) -> T {
    r * x * (T::one() - x)
}

/// `n` iterates of the logistic map following `burn_in` discarded ones.
/// The initial value itself is not part of the output.
pub fn iterate_logistic<T: Scalar>(x0: T, r: T, n: usize, burn_in: usize) -> Result<TimeSeries<T>> {
    if !x0.is_finite() || x0 < T::zero() || x0 > T::one() {
        return Err(Error::Parameter(format!("logistic x0 = {x0} outside [0, 1]")));
    }
    if !r.is_finite() || r <= T::zero() || r > T::of(4.0) {
        return Err(Error::Parameter(format!("logistic r = {r} outside (0, 4]")));
    }
    let mut x = x0;
    for _ in 0..burn_in {
        x = logistic_step(x, r);
    }
    let samples = (0..n)
        .map(|_| {
            x = logistic_step(x, r);
            x
        })
        .collect();
    let meta = SeriesMeta::new("logistic").param("r", r.to_f64_lossy()).burn_in(burn_in);
    Ok(TimeSeries::new(samples)?.with_meta(meta))
}

#[inline]
pub fn henon_step<T: Scalar>((x, y): (T, T), a: T, b: T) -> (T, T) {
    (T::one() - a * x * x + y, b * x)
}

/// x-coordinates of `n` Hénon iterates after `burn_in` discarded ones.
pub fn iterate_henon<T: Scalar>(
    x0: T,
    y0: T,
    params: &MapParams<T>,
    n: usize,
    burn_in: usize,
) -> Result<TimeSeries<T>> {
    if !x0.is_finite() || !y0.is_finite() {
        return Err(Error::Parameter("Hénon initial state must be finite".into()));
    }
    let bound = T::of(ESCAPE_BOUND);
    let mut state = (x0, y0);
    let mut samples = Vec::with_capacity(n);
    for step in 0..burn_in + n {
        state = henon_step(state, params.a, params.b);
        if !(state.0.abs() <= bound) {
            return Err(Error::Escape { step });
        }
        if step >= burn_in {
            samples.push(state.0);
        }
    }
    let meta = SeriesMeta::new("henon")
        .param("a", params.a.to_f64_lossy())
        .param("b", params.b.to_f64_lossy())
        .burn_in(burn_in);
    Ok(TimeSeries::new(samples)?.with_meta(meta))
}
