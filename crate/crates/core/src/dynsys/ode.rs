//! Dormand–Prince 5(4) integrator with step-size control and the
//! fourth-order continuous extension for dense sampling.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::ESCAPE_BOUND;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance<T> {
    pub rel: T,
    pub abs: T,
}

impl<T: Scalar> Default for Tolerance<T> {
    fn default() -> Self {
        Self { rel: T::of(1e-9), abs: T::of(1e-12) }
    }
}

/// Uniform sampling grid `start + k * dt` for `k < count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sampling<T> {
    pub start: T,
    pub dt: T,
    pub count: usize,
}

impl<T: Scalar> Sampling<T> {
    fn time(&self, k: usize) -> T {
        self.start + T::of_usize(k) * self.dt
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
// fifth-order weights (also row 7 of the tableau, FSAL)
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth minus fourth order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// dense output
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const MAX_STEPS: usize = 50_000_000;

#[inline]
fn axpy<T: Scalar, const D: usize>(y: &[T; D], terms: &[(f64, &[T; D])], h: T) -> [T; D] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = T::zero();
        for &(c, k) in terms {
            acc = acc + T::of(c) * k[i];
        }
        *o = *o + h * acc;
    }
    out
}

fn rms_norm<T: Scalar, const D: usize>(v: &[T; D], scale: &[T; D]) -> T {
    let mut s = T::zero();
    for i in 0..D {
        let q = v[i] / scale[i];
        s = s + q * q;
    }
    (s / T::of_usize(D.max(1))).sqrt()
}

fn initial_step<T: Scalar, const D: usize, F>(f: &F, t0: T, y0: &[T; D], f0: &[T; D], tol: &Tolerance<T>, span: T) -> T
where
    F: Fn(T, &[T; D]) -> [T; D],
{
    let scale: [T; D] = std::array::from_fn(|i| tol.abs + tol.rel * y0[i].abs());
    let d0 = rms_norm(y0, &scale);
    let d1 = rms_norm(f0, &scale);
    let tiny = T::of(1e-10);
    let mut h0 = if d0 < tiny || d1 < tiny { T::of(1e-6) } else { T::of(0.01) * d0 / d1 };
    h0 = h0.min(span);
    let y1: [T; D] = std::array::from_fn(|i| y0[i] + h0 * f0[i]);
    let f1 = f(t0 + h0, &y1);
    let diff: [T; D] = std::array::from_fn(|i| f1[i] - f0[i]);
    let d2 = rms_norm(&diff, &scale) / h0;
    let m = d1.max(d2);
    let h1 = if m <= T::of(1e-15) {
        (h0 * T::of(1e-3)).max(T::of(1e-6))
    } else {
        (T::of(0.01) / m).powf(T::of(0.2))
    };
    (T::of(100.0) * h0).min(h1).min(span)
}

/// Integrates `dy/dt = f(t, y)` from `t0` to `t_end`.
///
/// Returns the final state and the states at the sampling grid, if one is
/// given. Sample times must lie in `[t0, t_end]`.
pub fn integrate<T, const D: usize, F>(
    f: F,
    t0: T,
    y0: [T; D],
    t_end: T,
    sampling: Option<Sampling<T>>,
    tol: &Tolerance<T>,
) -> Result<([T; D], Vec<[T; D]>)>
where
    T: Scalar,
    F: Fn(T, &[T; D]) -> [T; D],
{
    if !(t_end > t0) {
        return Err(Error::Parameter(format!("integration span must be positive (t0 = {t0}, t_end = {t_end})")));
    }
    if !(tol.rel > T::zero() && tol.abs > T::zero()) {
        return Err(Error::Parameter("tolerances must be positive".into()));
    }
    if let Some(s) = &sampling {
        if !(s.dt > T::zero()) {
            return Err(Error::Parameter("sampling interval must be positive".into()));
        }
        if s.count > 0 && (s.start < t0 || s.time(s.count - 1) > t_end) {
            return Err(Error::Parameter("sampling grid outside integration span".into()));
        }
    }
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(Error::Parameter("initial state must be finite".into()));
    }

    let span = t_end - t0;
    let h_min = T::of(1e-12) * t_end.abs().max(span);
    let bound = T::of(ESCAPE_BOUND);
    let mut samples = Vec::with_capacity(sampling.map_or(0, |s| s.count));
    let mut next_sample = 0usize;

    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut h = initial_step(&f, t0, &y0, &k1, tol, span);

    // grid points that coincide with t0
    if let Some(s) = &sampling {
        while next_sample < s.count && s.time(next_sample) <= t {
            samples.push(y);
            next_sample += 1;
        }
    }

    let mut accepted = 0usize;
    for _ in 0..MAX_STEPS {
        if t >= t_end {
            break;
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }
        let k2 = f(t + T::of(C2) * h, &axpy(&y, &[(A21, &k1)], h));
        let k3 = f(t + T::of(C3) * h, &axpy(&y, &[(A31, &k1), (A32, &k2)], h));
        let k4 = f(t + T::of(C4) * h, &axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], h));
        let k5 = f(t + T::of(C5) * h, &axpy(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], h));
        let k6 = f(t + h, &axpy(&y, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], h));
        let y_new = axpy(&y, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)], h);
        let k7 = f(t + h, &y_new);

        let err_vec: [T; D] = std::array::from_fn(|i| {
            h * (T::of(E1) * k1[i] + T::of(E3) * k3[i] + T::of(E4) * k4[i] + T::of(E5) * k5[i] + T::of(E6) * k6[i] + T::of(E7) * k7[i])
        });
        let scale: [T; D] = std::array::from_fn(|i| tol.abs + tol.rel * y[i].abs().max(y_new[i].abs()));
        let err = rms_norm(&err_vec, &scale);

        if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
            // shrink hard; a genuinely divergent solution trips the escape check below
            h = h * T::of(FAC_MIN);
            if h < h_min {
                return Err(Error::Escape { step: accepted });
            }
            continue;
        }

        let fac = if err == T::zero() {
            T::of(FAC_MAX)
        } else {
            (T::of(SAFETY) * err.powf(T::of(-0.2))).max(T::of(FAC_MIN)).min(T::of(FAC_MAX))
        };

        if err <= T::one() {
            if let Some(s) = &sampling {
                let t_new = if last { t_end } else { t + h };
                while next_sample < s.count && s.time(next_sample) <= t_new {
                    let theta = (s.time(next_sample) - t) / h;
                    let theta1 = T::one() - theta;
                    let point: [T; D] = std::array::from_fn(|i| {
                        let ydiff = y_new[i] - y[i];
                        let bspl = h * k1[i] - ydiff;
                        let c4 = ydiff - h * k7[i] - bspl;
                        let c5 = h
                            * (T::of(D1) * k1[i]
                                + T::of(D3) * k3[i]
                                + T::of(D4) * k4[i]
                                + T::of(D5) * k5[i]
                                + T::of(D6) * k6[i]
                                + T::of(D7) * k7[i]);
                        y[i] + theta * (ydiff + theta1 * (bspl + theta * (c4 + theta1 * c5)))
                    });
                    samples.push(point);
                    next_sample += 1;
                }
            }
            t = if last { t_end } else { t + h };
            y = y_new;
            k1 = k7;
            accepted += 1;
            if y.iter().any(|v| !(v.abs() <= bound)) {
                return Err(Error::Escape { step: accepted });
            }
            h = h * fac;
        } else {
            h = h * fac.min(T::one());
        }
        if h < h_min && t < t_end {
            return Err(Error::Stiffness { t: t.to_f64_lossy(), h: h.to_f64_lossy() });
        }
    }
    if t < t_end {
        return Err(Error::Stiffness { t: t.to_f64_lossy(), h: h.to_f64_lossy() });
    }
    Ok((y, samples))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp_error(rel: f64) -> f64 {
        let tol = Tolerance { rel, abs: 1e-14 };
        let (y, _) = integrate(|_, y: &[f64; 1]| [y[0]], 0.0, [1.0], 1.0, None, &tol).unwrap();
        (y[0] - std::f64::consts::E).abs() / std::f64::consts::E
    }

    #[test]
    fn exponential_growth() {
        let (y, _) = integrate(|_, y: &[f64; 1]| [y[0]], 0.0, [1.0], 1.0, None, &Tolerance::default()).unwrap();
        assert!((y[0] - std::f64::consts::E).abs() < 1e-6);
        assert!((y[0] - std::f64::consts::E).abs() < 1e-6);
    }

    #[test]
    fn local_accuracy_scales_with_tolerance() {
        for rel in [1e-6, 1e-9] {
            let e = exp_error(rel);
            assert!(e < 10.0 * rel, "rel {rel}: err {e}");
        }
    }

    #[test]
    fn halving_tolerance_does_not_increase_error() {
        let mut rel = 1e-5;
        let mut prev = exp_error(rel);
        for _ in 0..12 {
            rel /= 2.0;
            let e = exp_error(rel);
            assert!(e <= prev, "rel {rel}: {e} > {prev}");
            prev = e;
        }
    }

    #[test]
    fn harmonic_energy_conserved() {
        let tol = Tolerance::default();
        let grid = Sampling { start: 0.0, dt: 0.5, count: 201 };
        let (_, pts) = integrate(|_, y: &[f64; 2]| [y[1], -y[0]], 0.0, [1.0, 0.0], 100.0, Some(grid), &tol).unwrap();
        assert_eq!(pts.len(), 201);
        for p in &pts {
            assert!((p[0] * p[0] + p[1] * p[1] - 1.0).abs() < 1e-6);
        }
        // dense samples track the analytic solution
        for (k, p) in pts.iter().enumerate() {
            let t = 0.5 * k as f64;
            assert!((p[0] - t.cos()).abs() < 1e-6, "t = {t}");
        }
    }

    #[test]
    fn stationary_field_returns_initial_state() {
        let y0 = [0.3, -1.0, 2.5];
        let grid = Sampling { start: 0.0, dt: 0.1, count: 11 };
        let (_, pts) = integrate(|_, _: &[f64; 3]| [0.0; 3], 0.0, y0, 1.0, Some(grid), &Tolerance::default()).unwrap();
        assert_eq!(pts.len(), 11);
        assert!(pts.iter().all(|p| *p == y0));
    }

    #[test]
    fn blow_up_is_reported() {
        // y' = y^2 blows up at t = 1
        let r = integrate(|_, y: &[f64; 1]| [y[0] * y[0]], 0.0, [1.0], 2.0, None, &Tolerance::default());
        assert!(matches!(r, Err(Error::Escape { .. }) | Err(Error::Stiffness { .. })), "{r:?}");
    }

    #[test]
    fn rejects_bad_arguments() {
        let f = |_, y: &[f64; 1]| [y[0]];
        assert!(integrate(f, 0.0, [1.0], 0.0, None, &Tolerance::default()).is_err());
        assert!(integrate(f, 0.0, [1.0], 1.0, None, &Tolerance { rel: 0.0, abs: 1e-9 }).is_err());
        let grid = Sampling { start: 0.0, dt: 0.5, count: 4 };
        assert!(integrate(f, 0.0, [1.0], 1.0, Some(grid), &Tolerance::default()).is_err());
    }
}
