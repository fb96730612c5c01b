use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Unnormalized DFT coefficients of a real or complex sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T> {
    pub coeffs: Vec<Complex<T>>,
}

impl<T: Scalar> Spectrum<T> {
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn amplitudes(&self) -> Vec<T> {
        self.coeffs.iter().map(|c| c.norm()).collect()
    }

    /// Squared amplitudes `|c_k|^2`.
    pub fn power(&self) -> Vec<T> {
        self.coeffs.iter().map(|c| c.norm_sqr()).collect()
    }
}

fn twiddles<T: Scalar>(n: usize, inverse: bool) -> Vec<Complex<T>> {
    let sign = if inverse { T::one() } else { -T::one() };
    let step = T::TAU() / T::of_usize(n);
    (0..n)
        .map(|k| {
            let (s, c) = (step * T::of_usize(k)).sin_cos();
            Complex::new(c, sign * s)
        })
        .collect()
}

fn radix2<T: Scalar>(buf: &mut [Complex<T>], inverse: bool) {
    let n = buf.len();
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            buf.swap(i, j);
        }
    }
    let w = twiddles::<T>(n, inverse);
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let stride = n / len;
        for chunk in buf.chunks_exact_mut(len) {
            let (lo, hi) = chunk.split_at_mut(half);
            for (j, (a, b)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                let t = *b * w[j * stride];
                *b = *a - t;
                *a = *a + t;
            }
        }
        len <<= 1;
    }
}

fn direct<T: Scalar>(input: &[Complex<T>], inverse: bool) -> Vec<Complex<T>> {
    let n = input.len();
    let w = twiddles::<T>(n, inverse);
    (0..n)
        .map(|k| {
            input
                .iter()
                .enumerate()
                .fold(Complex::new(T::zero(), T::zero()), |acc, (j, &x)| acc + x * w[(j * k) % n])
        })
        .collect()
}

fn transform<T: Scalar>(mut data: Vec<Complex<T>>, inverse: bool) -> Vec<Complex<T>> {
    if data.len().is_power_of_two() {
        radix2(&mut data, inverse);
        data
    } else {
        direct(&data, inverse)
    }
}

/// Forward transform of a complex sequence.
pub fn dft_complex<T: Scalar>(x: &[Complex<T>]) -> Result<Spectrum<T>> {
    if x.is_empty() {
        return Err(Error::Length("cannot transform an empty sequence".into()));
    }
    Ok(Spectrum { coeffs: transform(x.to_vec(), false) })
}

/// Forward transform of a real sequence.
pub fn dft<T: Scalar>(x: &[T]) -> Result<Spectrum<T>> {
    if x.is_empty() {
        return Err(Error::Length("cannot transform an empty sequence".into()));
    }
    Ok(Spectrum { coeffs: transform(x.iter().map(|&v| Complex::new(v, T::zero())).collect(), false) })
}

/// Inverse transform (divides by n), keeping the imaginary parts.
pub fn idft_complex<T: Scalar>(spectrum: &Spectrum<T>) -> Result<Vec<Complex<T>>> {
    if spectrum.is_empty() {
        return Err(Error::Length("cannot invert an empty spectrum".into()));
    }
    let scale = T::one() / T::of_usize(spectrum.len());
    Ok(transform(spectrum.coeffs.clone(), true).into_iter().map(|c| c * scale).collect())
}

/// Inverse transform, real part only.
pub fn idft<T: Scalar>(spectrum: &Spectrum<T>) -> Result<Vec<T>> {
    Ok(idft_complex(spectrum)?.into_iter().map(|c| c.re).collect())
}
