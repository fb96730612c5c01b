use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::{SeriesMeta, TimeSeries};

use super::ode::{integrate, Sampling, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowSystem {
    Lorenz,
    Rossler,
    Chua,
}

impl FlowSystem {
    pub fn name(self) -> &'static str {
        match self {
            FlowSystem::Lorenz => "lorenz",
            FlowSystem::Rossler => "rossler",
            FlowSystem::Chua => "chua",
        }
    }

    /// Default sampling interval in model time units.
    pub fn default_dt(self) -> f64 {
        match self {
            FlowSystem::Lorenz => 0.15,
            FlowSystem::Chua => 0.05,
            FlowSystem::Rossler => 0.25,
        }
    }
}

impl fmt::Display for FlowSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FlowSystem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lorenz" => Ok(FlowSystem::Lorenz),
            "rossler" | "rössler" => Ok(FlowSystem::Rossler),
            "chua" => Ok(FlowSystem::Chua),
            other => Err(Error::Usage(format!("unknown flow system `{other}`"))),
        }
    }
}

/// Parameters for all three flows, defaulting to their chaotic regimes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowParams<T> {
    pub lorenz_sigma: T,
    pub lorenz_rho: T,
    pub lorenz_beta: T,
    pub rossler_alpha: T,
    pub rossler_beta: T,
    pub rossler_gamma: T,
    pub chua_alpha: T,
    pub chua_beta: T,
    pub chua_m0: T,
    pub chua_m1: T,
}

impl<T: Scalar> Default for FlowParams<T> {
    fn default() -> Self {
        Self {
            lorenz_sigma: T::of(10.0),
            lorenz_rho: T::of(28.0),
            lorenz_beta: T::of(8.0 / 3.0),
            rossler_alpha: T::of(0.2),
            rossler_beta: T::of(0.2),
            rossler_gamma: T::of(5.7),
            chua_alpha: T::of(15.6),
            chua_beta: T::of(28.0),
            chua_m0: T::of(-8.0 / 7.0),
            chua_m1: T::of(-5.0 / 7.0),
        }
    }
}

impl<T: Scalar> FlowParams<T> {
    fn record(&self, system: FlowSystem, meta: SeriesMeta) -> SeriesMeta {
        let v = |x: T| x.to_f64_lossy();
        match system {
            FlowSystem::Lorenz => meta
                .param("sigma", v(self.lorenz_sigma))
                .param("rho", v(self.lorenz_rho))
                .param("beta", v(self.lorenz_beta)),
            FlowSystem::Rossler => meta
                .param("alpha", v(self.rossler_alpha))
                .param("beta", v(self.rossler_beta))
                .param("gamma", v(self.rossler_gamma)),
            FlowSystem::Chua => meta
                .param("alpha", v(self.chua_alpha))
                .param("beta", v(self.chua_beta))
                .param("m0", v(self.chua_m0))
                .param("m1", v(self.chua_m1)),
        }
    }
}

/// Piecewise-linear diode characteristic of Chua's circuit.
#[inline]
pub fn chua_nonlinearity<T: Scalar>(x: T, m0: T, m1: T) -> T {
    m1 * x + T::of(0.5) * (m0 - m1) * ((x + T::one()).abs() - (x - T::one()).abs())
}

pub fn flow_derivative<T: Scalar>(system: FlowSystem, s: &[T; 3], p: &FlowParams<T>) -> [T; 3] {
    let [x, y, z] = *s;
    match system {
        FlowSystem::Lorenz => [
            p.lorenz_sigma * (y - x),
            x * (p.lorenz_rho - z) - y,
            x * y - p.lorenz_beta * z,
        ],
        FlowSystem::Rossler => [-y - z, x + p.rossler_alpha * y, p.rossler_beta + z * (x - p.rossler_gamma)],
        FlowSystem::Chua => [
            p.chua_alpha * (y - x - chua_nonlinearity(x, p.chua_m0, p.chua_m1)),
            x - y + z,
            -p.chua_beta * y,
        ],
    }
}

/// Integrates a flow from `y0` at t = 0 to `t_end` and returns the
/// x-coordinate sampled every `dt_sample` from `burn_in` onwards.
pub fn rk45_integrate<T: Scalar>(
    system: FlowSystem,
    params: &FlowParams<T>,
    y0: [T; 3],
    burn_in: T,
    t_end: T,
    dt_sample: T,
    tol: &Tolerance<T>,
) -> Result<TimeSeries<T>> {
    if !(dt_sample > T::zero()) {
        return Err(Error::Parameter("sampling interval must be positive".into()));
    }
    if !(burn_in >= T::zero()) || !(t_end > burn_in) {
        return Err(Error::Parameter(format!("need 0 <= burn_in < t_end (got {burn_in}, {t_end})")));
    }
    let steps = ((t_end - burn_in) / dt_sample + T::of(1e-9)).floor().to_usize().unwrap_or(0);
    let grid = Sampling { start: burn_in, dt: dt_sample, count: steps + 1 };
    let t_stop = t_end.max(burn_in + T::of_usize(steps) * dt_sample);
    let (_, points) = integrate(|_, s: &[T; 3]| flow_derivative(system, s, params), T::zero(), y0, t_stop, Some(grid), tol)?;
    let samples = points.into_iter().map(|p| p[0]).collect();
    let meta = params.record(system, SeriesMeta::new(system.name()).burn_in(
        (burn_in / dt_sample).round().to_usize().unwrap_or(0),
    ));
    Ok(TimeSeries::new(samples)?.with_meta(meta).with_dt(dt_sample))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: [f64; 3], b: [f64; 3], tol: f64) -> bool {
        a.iter().zip(&b).all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn derivative_hand_values() {
        let p = FlowParams::default();
        let d = flow_derivative(FlowSystem::Lorenz, &[1.0, 1.0, 1.0], &p);
        assert!(close(d, [0.0, 26.0, -5.0 / 3.0], 1e-12));
        let d = flow_derivative(FlowSystem::Rossler, &[1.0, 1.0, 1.0], &p);
        assert!(close(d, [-2.0, 1.2, -4.5], 1e-12));
    }

    #[test]
    fn lorenz_fixed_point() {
        let p = FlowParams::<f64>::default();
        let c = (p.lorenz_beta * (p.lorenz_rho - 1.0)).sqrt();
        assert!((c - 72f64.sqrt()).abs() < 1e-12);
        let d = flow_derivative(FlowSystem::Lorenz, &[c, c, p.lorenz_rho - 1.0], &p);
        assert!(close(d, [0.0; 3], 1e-12), "{d:?}");
    }

    #[test]
    fn chua_hand_values() {
        let (m0, m1): (f64, f64) = (-8.0 / 7.0, -5.0 / 7.0);
        assert_eq!(chua_nonlinearity(0.0, m0, m1), 0.0);
        assert!((chua_nonlinearity(1.0, m0, m1) - m0).abs() < 1e-15);
        assert!((chua_nonlinearity(-1.0, m0, m1) - 8.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn chua_is_odd_with_piecewise_slopes() {
        let (m0, m1): (f64, f64) = (-8.0 / 7.0, -5.0 / 7.0);
        for i in -400..=400 {
            let x = i as f64 * 0.01;
            assert!((chua_nonlinearity(-x, m0, m1) + chua_nonlinearity(x, m0, m1)).abs() < 1e-14);
        }
        let h = 1e-3;
        for x in [-3.0, -1.5, 1.2, 2.0, 5.0] {
            let slope = (chua_nonlinearity(x + h, m0, m1) - chua_nonlinearity(x, m0, m1)) / h;
            assert!((slope - m1).abs() < 1e-9, "outer slope at {x}");
        }
        for x in [-0.9, -0.3, 0.0, 0.5, 0.8] {
            let slope = (chua_nonlinearity(x + h, m0, m1) - chua_nonlinearity(x, m0, m1)) / h;
            assert!((slope - m0).abs() < 1e-9, "inner slope at {x}");
        }
    }

    #[test]
    fn unknown_system_is_usage_error() {
        assert!(matches!("duffing".parse::<FlowSystem>(), Err(Error::Usage(_))));
        assert_eq!("Rossler".parse::<FlowSystem>().unwrap(), FlowSystem::Rossler);
    }

    #[test]
    fn origin_is_stationary_for_lorenz() {
        let s = rk45_integrate(FlowSystem::Lorenz, &FlowParams::default(), [0.0; 3], 0.0, 5.0, 0.05, &Tolerance::default()).unwrap();
        assert_eq!(s.len(), 101);
        assert!(s.samples().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn attractors_stay_bounded() {
        let tol = Tolerance::default();
        let p = FlowParams::default();
        for (sys, y0, bound) in [
            (FlowSystem::Lorenz, [1.0, 1.0, 20.0], 25.0),
            (FlowSystem::Rossler, [1.0, 1.0, 0.0], 15.0),
            (FlowSystem::Chua, [0.1, 0.0, 0.0], 3.0),
        ] {
            let dt = sys.default_dt();
            let s = rk45_integrate(sys, &p, y0, 100.0, 100.0 + 127.0 * dt, dt, &tol).unwrap();
            assert_eq!(s.len(), 128, "{sys}");
            let max = s.samples().iter().fold(0.0f64, |m, x| m.max(x.abs()));
            assert!(max < bound && max > 0.1, "{sys}: max |x| = {max}");
        }
    }
}
