//! Fourier transforms and the surrogate family: random shuffle, FT
//! (phase randomized), AAFT and IAAFT.

mod fft;
mod surrogate;

pub use fft::{dft, dft_complex, idft, idft_complex, Spectrum};
pub use surrogate::{
    aaft_surrogate, ft_surrogate, iaaft_surrogate, rank_order, shuffle_surrogate, spectral_discrepancy, surrogate,
    Algorithm, SurrogateConfig, SurrogateResult,
};

pub type Complex<T> = num_complex::Complex<T>;
