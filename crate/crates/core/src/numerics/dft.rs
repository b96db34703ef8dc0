//! Discrete Fourier transform by direct summation.
//!
//! Conventions used throughout the crate:
//!
//! ```text
//! x̃(ω_k) = (1/√L) Σ_j x(t_j) e^{+i ω_k t_j},   ω_k = 2πk/L,  t_j = j  (j = 1..L)
//! x(t_j) = (1/√L) Σ_k x̃(ω_k) e^{−i ω_k t_j}
//! ```
//!
//! Time is measured in months starting at `t_1 = 1`. The unitary scaling makes
//! Parseval exact: `Σ_j x² = Σ_k |x̃|²`. Series here are a few hundred points
//! long, so the O(L²) sum is cheap and works unchanged at arbitrary ω.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Fourier coefficients of a real series, indexed by wavenumber `k = 0..L-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSeries {
    values: Vec<Complex64>,
}

impl ComplexSeries {
    pub fn new(values: Vec<Complex64>) -> Self {
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn get(&self, k: usize) -> Complex64 {
        self.values[k]
    }

    /// `|x̃(ω_k)|²` for every k.
    pub fn power(&self) -> Vec<f64> {
        self.values.iter().map(|c| c.norm_sqr()).collect()
    }
}

/// Table of `e^{+2πi m / L}` for `m = 0..L-1`.
pub(crate) fn twiddles(len: usize) -> Vec<Complex64> {
    (0..len)
        .map(|m| Complex64::from_polar(1.0, 2.0 * PI * m as f64 / len as f64))
        .collect()
}

/// Forward transform on the Fourier grid `ω_k = 2πk/L`.
pub fn dft_forward(x: &[f64]) -> Result<ComplexSeries> {
    let len = x.len();
    if len < 2 {
        return Err(Error::invalid(format!(
            "dft_forward needs at least 2 samples, got {len}"
        )));
    }
    let tw = twiddles(len);
    let scale = 1.0 / (len as f64).sqrt();
    let values = (0..len)
        .map(|k| {
            let mut acc = Complex64::new(0.0, 0.0);
            // t_j = j for j = 1..L; index into the twiddle table modulo L
            for (j0, &xj) in x.iter().enumerate() {
                let m = (k * (j0 + 1)) % len;
                acc += tw[m] * xj;
            }
            acc * scale
        })
        .collect();
    Ok(ComplexSeries::new(values))
}

/// Inverse of [`dft_forward`]; returns the real part of the reconstruction.
pub fn dft_inverse(coeffs: &ComplexSeries) -> Vec<f64> {
    let len = coeffs.len();
    let tw = twiddles(len);
    let scale = 1.0 / (len as f64).sqrt();
    (0..len)
        .map(|j0| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, c) in coeffs.values().iter().enumerate() {
                let m = (k * (j0 + 1)) % len;
                acc += c * tw[m].conj();
            }
            acc.re * scale
        })
        .collect()
}

/// Transform evaluated at an arbitrary angular frequency (rad/month).
pub fn dft_at_frequency(x: &[f64], omega: f64) -> Result<Complex64> {
    if x.is_empty() {
        return Err(Error::invalid("dft_at_frequency on an empty series"));
    }
    if !omega.is_finite() {
        return Err(Error::invalid(format!("non-finite frequency {omega}")));
    }
    let scale = 1.0 / (x.len() as f64).sqrt();
    let acc = x
        .iter()
        .enumerate()
        .fold(Complex64::new(0.0, 0.0), |acc, (j0, &xj)| {
            acc + Complex64::from_polar(xj, omega * (j0 + 1) as f64)
        });
    Ok(acc * scale)
}

/// Fourier frequency `ω_k = 2πk/L`.
pub fn fourier_frequency(k: usize, len: usize) -> f64 {
    2.0 * PI * k as f64 / len as f64
}

/// Argument of `z` in `(−π, π]`.
pub fn principal_arg(z: Complex64) -> f64 {
    let a = z.im.atan2(z.re);
    if a <= -PI {
        a + 2.0 * PI
    } else {
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_input_gives_zero_coefficients() {
        let c = dft_forward(&[0.0; 8]).unwrap();
        assert!(c.values().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn short_input_rejected() {
        assert!(matches!(dft_forward(&[1.0]), Err(Error::InvalidInput(_))));
        assert!(dft_forward(&[]).is_err());
    }

    #[test]
    fn pure_cosine_concentrates_on_mirror_pair() {
        // closed form: cos(2π·3j/12) has |x̃|² = (L/2)²/L = 3 at k = 3 and k = 9
        let x: Vec<f64> = (0..12)
            .map(|j| (2.0 * PI * 3.0 * j as f64 / 12.0).cos())
            .collect();
        let p = dft_forward(&x).unwrap().power();
        for (k, pk) in p.iter().enumerate() {
            if k == 3 || k == 9 {
                assert!((pk - 3.0).abs() < 1e-10, "k={k} p={pk}");
            } else {
                assert!(pk.abs() < 1e-10, "k={k} p={pk}");
            }
        }
    }

    #[test]
    fn conjugate_symmetry_for_real_input() {
        let x: Vec<f64> = (0..17).map(|j| ((j * j) % 7) as f64 - 3.0).collect();
        let c = dft_forward(&x).unwrap();
        for k in 1..17 {
            let d = c.get(k).conj() - c.get(17 - k);
            assert!(d.norm() < 1e-12);
        }
    }

    #[test]
    fn arbitrary_frequency_matches_grid() {
        let x: Vec<f64> = (0..239).map(|j| ((j as f64) * 0.37).sin() + 0.1).collect();
        let c = dft_forward(&x).unwrap();
        for k in [0usize, 1, 4, 6, 100, 238] {
            let z = dft_at_frequency(&x, fourier_frequency(k, 239)).unwrap();
            assert!((z - c.get(k)).norm() < 1e-10, "k={k}");
        }
    }

    #[test]
    fn zero_frequency_of_zero_mean_series_vanishes() {
        let x = [1.0, -2.0, 0.5, 0.5];
        assert!(dft_at_frequency(&x, 0.0).unwrap().norm() < 1e-15);
    }

    #[test]
    fn principal_arg_range() {
        assert_eq!(principal_arg(Complex64::new(-1.0, -0.0)), PI);
        assert_eq!(principal_arg(Complex64::new(-1.0, 0.0)), PI);
        assert!((principal_arg(Complex64::new(0.0, -1.0)) + PI / 2.0).abs() < 1e-15);
    }
}
