use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterMode {
    /// Single forward pass.
    #[default]
    Causal,
    /// Forward then backward pass; doubles the attenuation, no phase shift.
    ZeroPhase,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    #[serde(default = "default_order")]
    pub order: usize,
    pub cutoff_hz: f64,
    pub sampling_rate_hz: f64,
    #[serde(default)]
    pub mode: FilterMode,
}

fn default_order() -> usize {
    4
}

impl FilterSpec {
    pub fn lowpass(cutoff_hz: f64, sampling_rate_hz: f64) -> Self {
        Self { order: 4, cutoff_hz, sampling_rate_hz, mode: FilterMode::Causal }
    }

    pub fn validate(&self) -> Result<()> {
        if self.order == 0 || !self.order.is_multiple_of(2) {
            return Err(Error::Design(format!("order must be a positive even number, got {}", self.order)));
        }
        if !(self.sampling_rate_hz > 0.0) || !self.sampling_rate_hz.is_finite() {
            return Err(Error::Design("sampling rate must be positive".into()));
        }
        if !(self.cutoff_hz > 0.0 && self.cutoff_hz < self.sampling_rate_hz / 2.0) {
            return Err(Error::Design(format!(
                "cutoff {} Hz must lie in (0, {}) Hz",
                self.cutoff_hz,
                self.sampling_rate_hz / 2.0
            )));
        }
        Ok(())
    }
}

/// Normalized second-order section `(b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad<T> {
    pub b: [T; 3],
    pub a: [T; 2],
}

impl<T: Scalar> Biquad<T> {
    fn run(&self, x: &mut [T]) {
        // transposed direct form II
        let (mut s1, mut s2) = (T::zero(), T::zero());
        for v in x.iter_mut() {
            let input = *v;
            let y = self.b[0] * input + s1;
            s1 = self.b[1] * input - self.a[0] * y + s2;
            s2 = self.b[2] * input - self.a[1] * y;
            *v = y;
        }
    }

    fn response(&self, omega: T) -> Complex<T> {
        let z1 = Complex::from_polar(T::one(), -omega);
        let z2 = z1 * z1;
        let num = Complex::new(self.b[0], T::zero()) + z1 * self.b[1] + z2 * self.b[2];
        let den = Complex::new(T::one(), T::zero()) + z1 * self.a[0] + z2 * self.a[1];
        num / den
    }
}

/// Butterworth low-pass as cascaded biquads, designed by the bilinear
/// transform with the cutoff prewarped so the -3 dB point lands exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct Butterworth<T> {
    pub spec: FilterSpec,
    pub sections: Vec<Biquad<T>>,
}

impl<T: Scalar> Butterworth<T> {
    pub fn design(spec: &FilterSpec) -> Result<Self> {
        spec.validate()?;
        let n = spec.order;
        let k = T::of((std::f64::consts::PI * spec.cutoff_hz / spec.sampling_rate_hz).tan());
        let k2 = k * k;
        let sections = (0..n / 2)
            .map(|i| {
                // pole pair quality factor of the analog prototype
                let q = T::of(1.0 / (2.0 * (std::f64::consts::PI * (2 * i + 1) as f64 / (2 * n) as f64).sin()));
                let norm = T::one() / (T::one() + k / q + k2);
                let b0 = k2 * norm;
                Biquad {
                    b: [b0, T::of(2.0) * b0, b0],
                    a: [T::of(2.0) * (k2 - T::one()) * norm, (T::one() - k / q + k2) * norm],
                }
            })
            .collect();
        Ok(Self { spec: *spec, sections })
    }

    /// Magnitude of the designed transfer function at `freq_hz` (single pass).
    pub fn magnitude(&self, freq_hz: f64) -> T {
        let omega = T::of(std::f64::consts::TAU * freq_hz / self.spec.sampling_rate_hz);
        self.sections
            .iter()
            .fold(Complex::new(T::one(), T::zero()), |acc, s| acc * s.response(omega))
            .norm()
    }

    pub fn apply(&self, x: &[T]) -> Vec<T> {
        let mut y = x.to_vec();
        for s in &self.sections {
            s.run(&mut y);
        }
        if self.spec.mode == FilterMode::ZeroPhase {
            y.reverse();
            for s in &self.sections {
                s.run(&mut y);
            }
            y.reverse();
        }
        y
    }
}

pub fn butterworth_lowpass<T: Scalar>(series: &TimeSeries<T>, spec: &FilterSpec) -> Result<TimeSeries<T>> {
    let filter = Butterworth::design(spec)?;
    if series.len() < 8 {
        return Err(Error::Length(format!("filtering needs at least 8 samples, got {}", series.len())));
    }
    let mut meta = series.meta().clone();
    meta.params.insert("lowpass_cutoff_hz".into(), spec.cutoff_hz);
    let mut out = TimeSeries::new(filter.apply(series.samples()))?.with_meta(meta);
    if let Some(dt) = series.dt() {
        out = out.with_dt(dt);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FS: f64 = 256.0;
    const FC: f64 = 10.0;

    /// Analog Butterworth magnitude evaluated at the bilinear-warped frequency.
    fn oracle(f: f64, fc: f64, fs: f64, order: i32) -> f64 {
        let r = (std::f64::consts::PI * f / fs).tan() / (std::f64::consts::PI * fc / fs).tan();
        1.0 / (1.0 + r.powi(2 * order)).sqrt()
    }

    fn steady_amplitude(filter: &Butterworth<f64>, f: f64) -> f64 {
        let n = 8192;
        let x: Vec<f64> = (0..n).map(|i| (std::f64::consts::TAU * f * i as f64 / FS).sin()).collect();
        let y = filter.apply(&x);
        y[n / 2..].iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    #[test]
    fn designed_response_matches_analog_prototype() {
        let filt = Butterworth::<f64>::design(&FilterSpec::lowpass(FC, FS)).unwrap();
        for f in [0.0, 1.0, 5.0, 9.0, 10.0, 11.0, 20.0, 40.0, 80.0, 127.0] {
            let got = filt.magnitude(f);
            assert!((got - oracle(f, FC, FS, 4)).abs() < 1e-9, "f = {f}: {got}");
        }
    }

    #[test]
    fn unity_dc_gain() {
        let filt = Butterworth::<f64>::design(&FilterSpec::lowpass(FC, FS)).unwrap();
        let y = filt.apply(&vec![3.5; 2000]);
        assert!((y[1999] - 3.5).abs() < 1e-6 * 3.5);
    }

    #[test]
    fn minus_three_db_at_cutoff() {
        let filt = Butterworth::<f64>::design(&FilterSpec::lowpass(FC, FS)).unwrap();
        let a = steady_amplitude(&filt, FC);
        assert!((a - std::f64::consts::FRAC_1_SQRT_2).abs() < 0.02, "{a}");
    }

    #[test]
    fn steep_rolloff_above_cutoff() {
        let filt = Butterworth::<f64>::design(&FilterSpec::lowpass(FC, FS)).unwrap();
        let a = steady_amplitude(&filt, 4.0 * FC);
        assert!(a < 10f64.powf(-47.5 / 20.0), "{a}");
    }

    #[test]
    fn linear_in_input() {
        let filt = Butterworth::<f64>::design(&FilterSpec::lowpass(40.0, 173.61)).unwrap();
        let x: Vec<f64> = (0..500).map(|i| ((i * 37 % 101) as f64 / 50.0) - 1.0).collect();
        let y: Vec<f64> = (0..500).map(|i| (i as f64 * 0.11).sin()).collect();
        let (a, b) = (2.5, -0.75);
        let mix: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
        let fx = filt.apply(&x);
        let fy = filt.apply(&y);
        for ((m, p), q) in filt.apply(&mix).iter().zip(&fx).zip(&fy) {
            assert!((m - (a * p + b * q)).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_phase_squares_the_magnitude() {
        let spec = FilterSpec { mode: FilterMode::ZeroPhase, ..FilterSpec::lowpass(FC, FS) };
        let filt = Butterworth::<f64>::design(&spec).unwrap();
        let a = steady_amplitude(&filt, FC);
        assert!((a - 0.5).abs() < 0.02, "{a}");
    }

    #[test]
    fn design_errors() {
        assert!(matches!(Butterworth::<f64>::design(&FilterSpec::lowpass(128.0, 256.0)), Err(Error::Design(_))));
        assert!(matches!(Butterworth::<f64>::design(&FilterSpec::lowpass(0.0, 256.0)), Err(Error::Design(_))));
        assert!(Butterworth::<f64>::design(&FilterSpec { order: 3, ..FilterSpec::lowpass(10.0, 256.0) }).is_err());
        let short = TimeSeries::new(vec![1.0; 5]).unwrap();
        assert!(matches!(butterworth_lowpass(&short, &FilterSpec::lowpass(10.0, 256.0)), Err(Error::Length(_))));
    }
}
