use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::scalar::Scalar;
use crate::series::TimeSeries;

use super::fft::{dft, idft, Spectrum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Shuffle,
    Ft,
    Aaft,
    Iaaft,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Shuffle => "shuffle",
            Algorithm::Ft => "ft",
            Algorithm::Aaft => "aaft",
            Algorithm::Iaaft => "iaaft",
        }
    }

    fn min_len(self) -> usize {
        match self {
            Algorithm::Shuffle => 2,
            _ => 4,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "shuffle" => Ok(Algorithm::Shuffle),
            "ft" => Ok(Algorithm::Ft),
            "aaft" => Ok(Algorithm::Aaft),
            "iaaft" => Ok(Algorithm::Iaaft),
            other => Err(Error::Usage(format!("unknown surrogate algorithm `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurrogateConfig {
    pub algorithm: Algorithm,
    pub max_iter: usize,
    /// Stop once the normalized spectral discrepancy is at or below this.
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for SurrogateConfig {
    fn default() -> Self {
        Self { algorithm: Algorithm::Iaaft, max_iter: 100, tolerance: 1e-8, seed: 0 }
    }
}

impl SurrogateConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(Error::Parameter("max_iter must be at least 1".into()));
        }
        if !(self.tolerance > 0.0) || !self.tolerance.is_finite() {
            return Err(Error::Parameter(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateResult<T> {
    pub surrogate: TimeSeries<T>,
    /// Discrepancy after each iteration (IAAFT only).
    pub trace: Vec<T>,
    pub iterations: usize,
    pub converged: bool,
}

impl<T: Scalar> SurrogateResult<T> {
    fn direct(original: &TimeSeries<T>, values: Vec<T>, algorithm: Algorithm) -> Result<Self> {
        Ok(Self { surrogate: relabel(original, values, algorithm)?, trace: Vec::new(), iterations: 0, converged: true })
    }
}

fn relabel<T: Scalar>(original: &TimeSeries<T>, values: Vec<T>, algorithm: Algorithm) -> Result<TimeSeries<T>> {
    let mut meta = original.meta().clone();
    meta.system = if meta.system.is_empty() {
        algorithm.name().to_string()
    } else {
        format!("{}+{}", meta.system, algorithm.name())
    };
    let mut s = TimeSeries::new(values)?.with_meta(meta);
    if let Some(dt) = original.dt() {
        s = s.with_dt(dt);
    }
    Ok(s)
}

fn check_len<T>(x: &[T], algorithm: Algorithm) -> Result<()> {
    if x.len() < algorithm.min_len() {
        return Err(Error::Length(format!(
            "{} surrogate needs at least {} samples, got {}",
            algorithm.name(),
            algorithm.min_len(),
            x.len()
        )));
    }
    Ok(())
}

fn is_constant<T: Scalar>(x: &[T]) -> bool {
    x.iter().all(|&v| v == x[0])
}

fn sorted<T: Scalar>(x: &[T]) -> Vec<T> {
    let mut v = x.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    v
}

/// Positions of `template` in ascending order; ties keep their original order.
fn argsort<T: Scalar>(template: &[T]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..template.len()).collect();
    idx.sort_by(|&a, &b| template[a].partial_cmp(&template[b]).unwrap_or(Ordering::Equal));
    idx
}

fn rank_order_sorted<T: Scalar>(sorted_donor: &[T], template: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); template.len()];
    for (rank, pos) in argsort(template).into_iter().enumerate() {
        out[pos] = sorted_donor[rank];
    }
    out
}

/// Rearranges the values of `donor` so they follow the rank pattern of `template`.
pub fn rank_order<T: Scalar>(donor: &[T], template: &[T]) -> Result<Vec<T>> {
    if donor.len() != template.len() {
        return Err(Error::Length(format!(
            "rank ordering needs equal lengths ({} vs {})",
            donor.len(),
            template.len()
        )));
    }
    Ok(rank_order_sorted(&sorted(donor), template))
}

fn rms<T: Scalar>(v: impl Iterator<Item = T>, n: usize) -> T {
    (v.map(|x| x * x).sum::<T>() / T::of_usize(n)).sqrt()
}

fn discrepancy_from_amplitudes<T: Scalar>(reference: &[T], reference_rms: T, b: &[T]) -> Result<T> {
    let sb = dft(b)?.amplitudes();
    let diff = rms(reference.iter().zip(&sb).map(|(&x, &y)| x - y), reference.len());
    Ok(diff / reference_rms)
}

/// RMS difference of the amplitude spectra of `a` and `b`, relative to the
/// RMS amplitude of `a`.
pub fn spectral_discrepancy<T: Scalar>(a: &[T], b: &[T]) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::Length(format!("discrepancy needs equal lengths ({} vs {})", a.len(), b.len())));
    }
    let sa = dft(a)?.amplitudes();
    let norm = rms(sa.iter().copied(), sa.len());
    if !(norm > T::zero()) {
        return Err(Error::Normalization("reference series has zero energy".into()));
    }
    discrepancy_from_amplitudes(&sa, norm, b)
}

fn shuffled<T: Scalar>(x: &[T], rng: &mut ChaCha8Rng) -> Vec<T> {
    let mut v = x.to_vec();
    v.shuffle(rng);
    v
}

/// Randomizes the phases of all bins except DC and Nyquist, keeping conjugate symmetry.
fn randomize_phases<T: Scalar>(x: &[T], rng: &mut ChaCha8Rng) -> Result<Vec<T>> {
    let mut spec = dft(x)?;
    let n = x.len();
    for k in 1..n.div_ceil(2) {
        let amp = spec.coeffs[k].norm();
        let phase = T::of(rng.random::<f64>() * std::f64::consts::TAU);
        let c = Complex::from_polar(amp, phase);
        spec.coeffs[k] = c;
        spec.coeffs[n - k] = c.conj();
    }
    idft(&spec)
}

fn ft_with<T: Scalar>(x: &[T], rng: &mut ChaCha8Rng) -> Result<Vec<T>> {
    if is_constant(x) {
        return Ok(x.to_vec());
    }
    randomize_phases(x, rng)
}

fn aaft_with<T: Scalar>(x: &[T], rng: &mut ChaCha8Rng) -> Result<Vec<T>> {
    if is_constant(x) {
        return Ok(x.to_vec());
    }
    let gauss: Vec<T> = (0..x.len()).map(|_| T::of(StandardNormal.sample(&mut *rng))).collect();
    let gaussianized = rank_order(&gauss, x)?;
    let randomized = randomize_phases(&gaussianized, rng)?;
    rank_order(x, &randomized)
}

struct Iaaft<T> {
    values: Vec<T>,
    trace: Vec<T>,
    converged: bool,
}

fn iaaft_with<T: Scalar>(x: &[T], config: &SurrogateConfig, rng: &mut ChaCha8Rng) -> Result<Iaaft<T>> {
    if is_constant(x) {
        return Ok(Iaaft { values: x.to_vec(), trace: vec![T::zero()], converged: true });
    }
    let tol = T::of(config.tolerance);
    let sorted_x = sorted(x);
    let target = dft(x)?.amplitudes();
    let target_rms = rms(target.iter().copied(), target.len());
    if !(target_rms > T::zero()) {
        return Err(Error::Normalization("series has zero energy".into()));
    }

    let mut current = shuffled(x, rng);
    let mut best: Option<(T, Vec<T>)> = None;
    let mut trace = Vec::with_capacity(config.max_iter);
    let mut converged = false;
    for _ in 0..config.max_iter {
        // impose the target amplitudes, keep the current phases
        let mut spec: Spectrum<T> = dft(&current)?;
        for (c, &a) in spec.coeffs.iter_mut().zip(&target) {
            let m = c.norm();
            *c = if m > T::zero() { *c * (a / m) } else { Complex::new(a, T::zero()) };
        }
        let filtered = idft(&spec)?;
        // impose the target distribution
        let next = rank_order_sorted(&sorted_x, &filtered);
        let d = discrepancy_from_amplitudes(&target, target_rms, &next)?;
        trace.push(d);
        if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
            best = Some((d, next.clone()));
        }
        if d <= tol {
            converged = true;
            break;
        }
        if next == current {
            // fixed point: further iterations reproduce the same series
            break;
        }
        current = next;
    }
    let (_, values) = best.expect("at least one iteration");
    Ok(Iaaft { values, trace, converged })
}

/// Uniform random permutation.
pub fn shuffle_surrogate<T: Scalar>(series: &TimeSeries<T>, seed: u64) -> Result<SurrogateResult<T>> {
    run(series, &SurrogateConfig { algorithm: Algorithm::Shuffle, seed, ..Default::default() }, 0)
}

/// Phase-randomized surrogate with the same amplitude spectrum.
pub fn ft_surrogate<T: Scalar>(series: &TimeSeries<T>, seed: u64) -> Result<SurrogateResult<T>> {
    run(series, &SurrogateConfig { algorithm: Algorithm::Ft, seed, ..Default::default() }, 0)
}

/// Amplitude adjusted Fourier transform surrogate.
pub fn aaft_surrogate<T: Scalar>(series: &TimeSeries<T>, seed: u64) -> Result<SurrogateResult<T>> {
    run(series, &SurrogateConfig { algorithm: Algorithm::Aaft, seed, ..Default::default() }, 0)
}

/// Iterated AAFT surrogate.
///
/// Starts from a random shuffle, then alternates amplitude-spectrum
/// substitution and rank ordering onto the original values. Stops when the
/// discrepancy reaches `config.tolerance`, when an iteration no longer
/// changes the series, or after `config.max_iter` rounds, and returns the
/// iterate with the smallest discrepancy seen. The last step of every round
/// is the rank ordering, so the output is always an exact permutation of
/// the input.
pub fn iaaft_surrogate<T: Scalar>(series: &TimeSeries<T>, config: &SurrogateConfig) -> Result<SurrogateResult<T>> {
    run(series, &SurrogateConfig { algorithm: Algorithm::Iaaft, ..*config }, 0)
}

/// Runs `config.algorithm` using random stream `stream` of `config.seed`.
pub fn surrogate<T: Scalar>(series: &TimeSeries<T>, config: &SurrogateConfig, stream: u64) -> Result<SurrogateResult<T>> {
    run(series, config, stream)
}

fn run<T: Scalar>(series: &TimeSeries<T>, config: &SurrogateConfig, stream: u64) -> Result<SurrogateResult<T>> {
    config.validate()?;
    let x = series.samples();
    check_len(x, config.algorithm)?;
    let mut rng = stream_rng(config.seed, stream);
    match config.algorithm {
        Algorithm::Shuffle => SurrogateResult::direct(series, shuffled(x, &mut rng), Algorithm::Shuffle),
        Algorithm::Ft => SurrogateResult::direct(series, ft_with(x, &mut rng)?, Algorithm::Ft),
        Algorithm::Aaft => SurrogateResult::direct(series, aaft_with(x, &mut rng)?, Algorithm::Aaft),
        Algorithm::Iaaft => {
            let out = iaaft_with(x, config, &mut rng)?;
            Ok(SurrogateResult {
                surrogate: relabel(series, out.values, Algorithm::Iaaft)?,
                iterations: out.trace.len(),
                trace: out.trace,
                converged: out.converged,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn ts(v: Vec<f64>) -> TimeSeries<f64> {
        TimeSeries::new(v).unwrap()
    }

    fn white(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = stream_rng(seed, 99);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    fn bits_sorted(v: &[f64]) -> Vec<u64> {
        sorted(v).into_iter().map(f64::to_bits).collect()
    }

    #[test]
    fn rank_order_examples() {
        assert_eq!(rank_order(&[3.0, 1.0, 2.0], &[0.5, -0.2, 0.9]).unwrap(), vec![2.0, 1.0, 3.0]);
        let d = [4.0, -1.0, 7.5, 0.0];
        assert_eq!(rank_order(&d, &d).unwrap(), d.to_vec());
        assert_eq!(rank_order(&[2.5; 4], &[3.0, 1.0, 2.0, 0.0]).unwrap(), vec![2.5; 4]);
        assert!(matches!(rank_order(&[1.0, 2.0], &[1.0]), Err(Error::Length(_))));
    }

    #[test]
    fn rank_order_ties_are_stable_by_position() {
        assert_eq!(rank_order(&[10.0, 20.0, 30.0], &[1.0, 1.0, 0.0]).unwrap(), vec![20.0, 30.0, 10.0]);
    }

    #[test]
    fn discrepancy_examples() {
        let a: Vec<f64> = white(64, 1);
        let neg: Vec<f64> = a.iter().map(|x| -x).collect();
        let dbl: Vec<f64> = a.iter().map(|x| 2.0 * x).collect();
        assert!(spectral_discrepancy(&a, &a).unwrap().abs() < 1e-15);
        assert!(spectral_discrepancy(&a, &neg).unwrap().abs() < 1e-14);
        assert!((spectral_discrepancy(&a, &dbl).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(spectral_discrepancy(&[0.0; 8], &a[..8]), Err(Error::Normalization(_))));
        assert!(matches!(spectral_discrepancy(&a[..8], &a[..9]), Err(Error::Length(_))));
    }

    #[test]
    fn shuffle_edge_cases() {
        assert!(matches!(shuffle_surrogate(&ts(vec![1.0]), 0), Err(Error::Length(_))));
        let c = ts(vec![3.0; 10]);
        assert_eq!(shuffle_surrogate(&c, 4).unwrap().surrogate.samples(), c.samples());
    }

    #[test]
    fn constant_inputs_are_fixed() {
        let c = ts(vec![-2.0; 16]);
        for f in [ft_surrogate::<f64>, aaft_surrogate::<f64>] {
            assert_eq!(f(&c, 1).unwrap().surrogate.samples(), c.samples());
        }
        let r = iaaft_surrogate(&c, &SurrogateConfig::default()).unwrap();
        assert_eq!(r.surrogate.samples(), c.samples());
        assert_eq!(r.iterations, 1);
        assert!(r.converged);
    }

    #[test]
    fn ft_output_is_real_with_same_amplitudes() {
        let x = white(64, 5);
        let mut rng = stream_rng(1, 0);
        // reconstruct the complex output to look at the imaginary part
        let mut spec = dft(&x).unwrap();
        let n = x.len();
        for k in 1..n.div_ceil(2) {
            let c = Complex::from_polar(spec.coeffs[k].norm(), rng.random::<f64>() * std::f64::consts::TAU);
            spec.coeffs[k] = c;
            spec.coeffs[n - k] = c.conj();
        }
        let out = super::super::fft::idft_complex(&spec).unwrap();
        assert!(out.iter().all(|c| c.im.abs() < 1e-10));

        let s = ft_surrogate(&ts(x.clone()), 3).unwrap();
        let a = dft(&x).unwrap().amplitudes();
        let b = dft(s.surrogate.samples()).unwrap().amplitudes();
        for (p, q) in a.iter().zip(&b) {
            assert!((p - q).abs() < 1e-10 * p.max(1.0));
        }
        assert_ne!(s.surrogate.samples(), &x[..]);
    }

    #[test]
    fn aaft_seeds_give_distinct_permutations() {
        let x = ts(white(64, 8));
        for k in 0..10 {
            let a = aaft_surrogate(&x, 2 * k).unwrap();
            let b = aaft_surrogate(&x, 2 * k + 1).unwrap();
            assert_ne!(a.surrogate.samples(), b.surrogate.samples());
        }
    }

    #[test]
    fn iaaft_converges_on_long_white_noise() {
        // short series reach a rank-ordering fixed point well above 1e-3;
        // at this length the fixed point lies below it
        let x = ts(white(8192, 21));
        let cfg = SurrogateConfig { tolerance: 1e-3, max_iter: 100, ..Default::default() };
        let r = iaaft_surrogate(&x, &cfg).unwrap();
        let d = spectral_discrepancy(x.samples(), r.surrogate.samples()).unwrap();
        assert!(r.converged, "trace: {:?}", r.trace);
        assert!(d <= 1e-3);
    }

    #[test]
    fn iaaft_stops_at_fixed_point_on_short_series() {
        let x = ts(white(128, 21));
        let cfg = SurrogateConfig { tolerance: 1e-3, max_iter: 100, ..Default::default() };
        let r = iaaft_surrogate(&x, &cfg).unwrap();
        assert!(r.iterations < 100);
        let n = r.trace.len();
        assert_eq!(r.trace[n - 1], r.trace[n - 2]);
    }

    #[test]
    fn iaaft_returns_best_iterate() {
        let x = ts((0..64).map(|i| (i as f64 * 0.3).sin().powi(3) + 0.1 * (i as f64)).collect());
        let r = iaaft_surrogate(&x, &SurrogateConfig { max_iter: 30, ..Default::default() }).unwrap();
        assert_eq!(r.trace.len(), r.iterations);
        let min = r.trace.iter().cloned().fold(f64::INFINITY, f64::min);
        let d = spectral_discrepancy(x.samples(), r.surrogate.samples()).unwrap();
        assert_eq!(d, min);
    }

    #[test]
    fn config_validation() {
        let x = ts(white(16, 0));
        assert!(iaaft_surrogate(&x, &SurrogateConfig { max_iter: 0, ..Default::default() }).is_err());
        assert!(iaaft_surrogate(&x, &SurrogateConfig { tolerance: 0.0, ..Default::default() }).is_err());
        assert!("cyclic".parse::<Algorithm>().is_err());
    }

    proptest! {
        #[test]
        fn multiset_preserved(x in prop::collection::vec(-100.0f64..100.0, 4..80), seed in any::<u64>()) {
            let s = ts(x.clone());
            let want = bits_sorted(&x);
            for algo in [Algorithm::Shuffle, Algorithm::Aaft, Algorithm::Iaaft] {
                let cfg = SurrogateConfig { algorithm: algo, seed, max_iter: 20, ..Default::default() };
                let r = surrogate(&s, &cfg, 0).unwrap();
                prop_assert_eq!(bits_sorted(r.surrogate.samples()), want.clone());
            }
        }

        #[test]
        fn deterministic_given_seed(x in prop::collection::vec(-1.0f64..1.0, 8..40), seed in any::<u64>()) {
            let s = ts(x);
            for algo in [Algorithm::Shuffle, Algorithm::Ft, Algorithm::Aaft, Algorithm::Iaaft] {
                let cfg = SurrogateConfig { algorithm: algo, seed, max_iter: 10, ..Default::default() };
                prop_assert_eq!(surrogate(&s, &cfg, 3).unwrap(), surrogate(&s, &cfg, 3).unwrap());
            }
        }
    }
}
