use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::scalar::Scalar;
use crate::series::TimeSeries;

use super::flows::{rk45_integrate, FlowParams, FlowSystem};
use super::maps::{iterate_henon, iterate_logistic, MapParams};
use super::noise::{ar1_nonlinear_with, NoiseParams};
use super::ode::Tolerance;
use super::{FLOW_BURN_IN_TIME, MAP_BURN_IN};

/// A generating process together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SystemSpec<T> {
    Logistic { r: T },
    Henon { a: T, b: T },
    Flow { system: FlowSystem, params: FlowParams<T>, dt: T, tol: Tolerance<T> },
    Ar1 { alpha: T },
}

impl<T: Scalar> SystemSpec<T> {
    /// Looks a system up by name with its default parameters.
    pub fn by_name(name: &str) -> Result<Self> {
        let maps = MapParams::<T>::default();
        match name.to_ascii_lowercase().as_str() {
            "logistic" => Ok(SystemSpec::Logistic { r: maps.r }),
            "henon" | "hénon" => Ok(SystemSpec::Henon { a: maps.a, b: maps.b }),
            "ar1" => Ok(SystemSpec::Ar1 { alpha: T::of(0.2) }),
            other => {
                let system: FlowSystem = other
                    .parse()
                    .map_err(|_| Error::Usage(format!("unknown system `{other}`")))?;
                Ok(SystemSpec::Flow {
                    system,
                    params: FlowParams::default(),
                    dt: T::of(system.default_dt()),
                    tol: Tolerance::default(),
                })
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SystemSpec::Logistic { .. } => "logistic",
            SystemSpec::Henon { .. } => "henon",
            SystemSpec::Flow { system, .. } => system.name(),
            SystemSpec::Ar1 { .. } => "ar1",
        }
    }

    /// One realization from a random initial condition near a reference
    /// point on (or near) the attractor, after the standard burn-in.
    pub fn sample<R: Rng>(&self, len: usize, rng: &mut R) -> Result<TimeSeries<T>> {
        let mut jitter = |center: f64, half_width: f64| -> T { T::of(center + half_width * (2.0 * rng.random::<f64>() - 1.0)) };
        match *self {
            SystemSpec::Logistic { r } => iterate_logistic(jitter(0.5, 0.45), r, len, MAP_BURN_IN),
            SystemSpec::Henon { a, b } => {
                let (x0, y0) = (jitter(0.0, 0.1), jitter(0.0, 0.1));
                iterate_henon(x0, y0, &MapParams { r: T::of(4.0), a, b }, len, MAP_BURN_IN)
            }
            SystemSpec::Flow { system, params, dt, tol } => {
                let y0 = match system {
                    FlowSystem::Lorenz => [jitter(1.0, 1.0), jitter(1.0, 1.0), jitter(20.0, 1.0)],
                    FlowSystem::Rossler => [jitter(1.0, 1.0), jitter(1.0, 1.0), jitter(0.0, 0.1)],
                    FlowSystem::Chua => [jitter(0.1, 0.05), jitter(0.0, 0.05), jitter(0.0, 0.05)],
                };
                let burn_in = T::of(FLOW_BURN_IN_TIME);
                let t_end = burn_in + T::of_usize(len.saturating_sub(1)) * dt;
                if len == 1 {
                    // a single sample still needs a positive integration span
                    let s = rk45_integrate(system, &params, y0, burn_in, burn_in + dt, dt, &tol)?;
                    return s.window(0, 1);
                }
                rk45_integrate(system, &params, y0, burn_in, t_end, dt, &tol)
            }
            SystemSpec::Ar1 { alpha } => ar1_nonlinear_with(&NoiseParams::new(alpha)?, len, rng),
        }
    }
}

/// Where realizations are drawn from.
#[derive(Debug, Clone, Copy)]
pub enum Source<'a, T> {
    System(SystemSpec<T>),
    Record(&'a TimeSeries<T>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RealizationMode {
    /// Fresh initial condition and burn-in per realization.
    Independent,
    /// Uniformly random start indices into one long record.
    Windowed,
}

/// Minimum length of the long trajectory generated for windowed sampling of a system.
const WINDOW_SOURCE_MIN: usize = 4096;

/// `count` realizations of length `len`.
///
/// Realization `i` draws from stream `i` of `seed`, so the output does not
/// depend on how the work is scheduled.
pub fn make_realizations<T: Scalar>(
    source: Source<'_, T>,
    len: usize,
    count: usize,
    mode: RealizationMode,
    seed: u64,
) -> Result<Vec<TimeSeries<T>>> {
    if len < 8 {
        return Err(Error::Parameter(format!("realization length {len} below minimum 8")));
    }
    if count == 0 {
        return Err(Error::Parameter("realization count must be positive".into()));
    }
    match (source, mode) {
        (Source::System(spec), RealizationMode::Independent) => (0..count)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream_rng(seed, i as u64);
                let s = spec.sample(len, &mut rng)?;
                let meta = s.meta().clone().seed(seed).param("index", i as f64);
                Ok(s.with_meta(meta))
            })
            .collect(),
        (Source::System(spec), RealizationMode::Windowed) => {
            let mut rng = stream_rng(seed, u64::MAX);
            let long = spec.sample((16 * len).max(WINDOW_SOURCE_MIN), &mut rng)?;
            windows(&long, len, count, seed)
        }
        (Source::Record(record), RealizationMode::Windowed) => windows(record, len, count, seed),
        (Source::Record(_), RealizationMode::Independent) => Err(Error::Usage(
            "a recorded series can only be sampled in windowed mode".into(),
        )),
    }
}

fn windows<T: Scalar>(record: &TimeSeries<T>, len: usize, count: usize, seed: u64) -> Result<Vec<TimeSeries<T>>> {
    if record.len() < len {
        return Err(Error::Length(format!(
            "source of length {} is shorter than the window length {len}",
            record.len()
        )));
    }
    let starts = record.len() - len + 1;
    (0..count)
        .map(|i| {
            let mut rng = stream_rng(seed, i as u64);
            let start = rng.random_range(0..starts);
            let w = record.window(start, len)?;
            let meta = w.meta().clone().seed(seed).param("index", i as f64).param("start", start as f64);
            Ok(w.with_meta(meta))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forced_single_window() {
        let rec = TimeSeries::new((0..32).map(|i| i as f64).collect()).unwrap();
        let out = make_realizations(Source::Record(&rec), 32, 1, RealizationMode::Windowed, 5).unwrap();
        assert_eq!(out[0].samples(), rec.samples());
    }

    #[test]
    fn windows_reproduce_source_slices() {
        let rec = TimeSeries::new((0..500).map(|i| (i as f64 * 0.37).sin()).collect()).unwrap();
        let out = make_realizations(Source::Record(&rec), 64, 50, RealizationMode::Windowed, 1).unwrap();
        for w in &out {
            let start = w.meta().params["start"] as usize;
            assert_eq!(w.samples(), &rec.samples()[start..start + 64]);
        }
    }

    #[test]
    fn short_source_is_length_error() {
        let rec = TimeSeries::new(vec![0.0; 20]).unwrap();
        let r = make_realizations(Source::Record(&rec), 32, 1, RealizationMode::Windowed, 0);
        assert!(matches!(r, Err(Error::Length(_))));
    }

    #[test]
    fn logistic_batch_shape_and_range() {
        let spec = SystemSpec::<f64>::by_name("logistic").unwrap();
        let out = make_realizations(Source::System(spec), 32, 1000, RealizationMode::Independent, 3).unwrap();
        assert_eq!(out.len(), 1000);
        assert!(out.iter().all(|s| s.len() == 32 && s.samples().iter().all(|x| (0.0..=1.0).contains(x))));
    }

    #[test]
    fn equal_seeds_give_identical_output() {
        for name in ["logistic", "henon", "lorenz", "rossler", "chua", "ar1"] {
            let spec = SystemSpec::<f64>::by_name(name).unwrap();
            let a = make_realizations(Source::System(spec), 16, 4, RealizationMode::Independent, 42).unwrap();
            let b = make_realizations(Source::System(spec), 16, 4, RealizationMode::Independent, 42).unwrap();
            assert_eq!(a, b, "{name}");
            assert_ne!(a[0].samples(), a[1].samples(), "{name}");
        }
    }

    #[test]
    fn unknown_name_is_usage_error() {
        assert!(matches!(SystemSpec::<f64>::by_name("duffing"), Err(Error::Usage(_))));
    }
}
