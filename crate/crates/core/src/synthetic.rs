//! Seeded synthetic panels with known structure.

use std::f64::consts::PI;

use crate::error::Result;
use crate::growth::GrowthPanel;
use crate::numerics::{Matrix, RngStream};
use crate::panel::{GoodDescriptor, Panel, YearMonth};

fn default_start() -> YearMonth {
    YearMonth::new(1988, 1).expect("valid month")
}

/// Level panel whose log10 growth rates are `raw`, starting at 100.
pub fn levels_from_rates(start: YearMonth, raw: &[Vec<f64>]) -> Result<Panel> {
    let g = raw.len() / 3;
    let series = raw
        .iter()
        .map(|r| {
            let mut level = 2.0f64;
            std::iter::once(100.0)
                .chain(r.iter().map(|x| {
                    level += x;
                    10f64.powf(level)
                }))
                .collect()
        })
        .collect();
    Panel::from_series(start, GoodDescriptor::numbered(g), series)
}

/// Independent standard normal growth rates, `3·n_goods` series.
pub fn white_noise_rates(n_goods: usize, n_prime: usize, rng: RngStream) -> Vec<Vec<f64>> {
    let mut g = rng.generator();
    (0..3 * n_goods)
        .map(|_| (0..n_prime).map(|_| g.normal()).collect())
        .collect()
}

pub fn white_noise_growth(n_goods: usize, n_prime: usize, rng: RngStream) -> Result<GrowthPanel> {
    GrowthPanel::from_rates(
        default_start().offset(1),
        n_goods,
        white_noise_rates(n_goods, n_prime, rng),
    )
}

/// Two orthogonal factors plus iid unit-variance noise:
/// `w_s(t) = ℓ₁ u₁ₛ f₁(t) + ℓ₂ u₂ₛ f₂(t) + e_s(t)`.
///
/// `u₁` is uniform over all series; `u₂` is `+1` on production, `0` on
/// shipments and `−1` on inventory, normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedFactors {
    pub n_goods: usize,
    pub n_prime: usize,
    /// `ℓ₁², ℓ₂²`.
    pub strengths: [f64; 2],
}

impl PlantedFactors {
    /// Population correlation eigenvalues near 10 and 4 for 21 goods.
    pub fn standard(n_prime: usize) -> Self {
        Self {
            n_goods: 21,
            n_prime,
            strengths: [11.45, 4.12],
        }
    }

    pub fn loadings(&self) -> [Vec<f64>; 2] {
        let g = self.n_goods;
        let m = 3 * g;
        let u1 = vec![1.0 / (m as f64).sqrt(); m];
        let c = 1.0 / ((2 * g) as f64).sqrt();
        let u2 = (0..m)
            .map(|s| match s / g {
                0 => c,
                1 => 0.0,
                _ => -c,
            })
            .collect();
        [u1, u2]
    }

    /// Population covariance rescaled to unit diagonal.
    pub fn population_correlation(&self) -> Matrix {
        let [u1, u2] = self.loadings();
        let m = u1.len();
        let cov = |a: usize, b: usize| {
            self.strengths[0] * u1[a] * u1[b]
                + self.strengths[1] * u2[a] * u2[b]
                + if a == b { 1.0 } else { 0.0 }
        };
        let mut c = Matrix::zeros(m);
        for a in 0..m {
            for b in 0..m {
                c.set(a, b, cov(a, b) / (cov(a, a) * cov(b, b)).sqrt());
            }
        }
        c
    }

    pub fn rates(&self, rng: RngStream) -> Vec<Vec<f64>> {
        let mut g = rng.generator();
        let [u1, u2] = self.loadings();
        let (l1, l2) = (self.strengths[0].sqrt(), self.strengths[1].sqrt());
        let f1: Vec<f64> = (0..self.n_prime).map(|_| g.normal()).collect();
        let f2: Vec<f64> = (0..self.n_prime).map(|_| g.normal()).collect();
        (0..u1.len())
            .map(|s| {
                (0..self.n_prime)
                    .map(|t| l1 * u1[s] * f1[t] + l2 * u2[s] * f2[t] + g.normal())
                    .collect()
            })
            .collect()
    }

    pub fn growth(&self, rng: RngStream) -> Result<GrowthPanel> {
        GrowthPanel::from_rates(default_start().offset(1), self.n_goods, self.rates(rng))
    }
}

/// Single-frequency cycles with known delays:
/// shipments `∝ cos(ω_k t)`, production `∝ cos(ω_k (t − lag_sp))`,
/// inventory `∝ cos(ω_k (t − lag_sp − lag_pi))`, plus Gaussian noise.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedLag {
    pub n_goods: usize,
    pub n_prime: usize,
    pub k: usize,
    pub lag_sp: f64,
    pub lag_pi: f64,
    /// Noise standard deviation relative to a unit-amplitude cycle.
    pub noise: f64,
}

impl PlantedLag {
    pub fn new(n_goods: usize, n_prime: usize, k: usize) -> Self {
        Self {
            n_goods,
            n_prime,
            k,
            lag_sp: 4.0,
            lag_pi: 8.0,
            noise: 0.3,
        }
    }

    pub fn rates(&self, rng: RngStream) -> Vec<Vec<f64>> {
        let mut g = rng.generator();
        let omega = 2.0 * PI * self.k as f64 / self.n_prime as f64;
        let shifts = [self.lag_sp, 0.0, self.lag_sp + self.lag_pi];
        (0..3 * self.n_goods)
            .map(|s| {
                let shift = shifts[s / self.n_goods];
                let amp = 0.5 + g.uniform();
                (1..=self.n_prime)
                    .map(|t| amp * (omega * (t as f64 - shift)).cos() + self.noise * g.normal())
                    .collect()
            })
            .collect()
    }

    pub fn growth(&self, rng: RngStream) -> Result<GrowthPanel> {
        GrowthPanel::from_rates(default_start().offset(1), self.n_goods, self.rates(rng))
    }

    pub fn panel(&self, rng: RngStream) -> Result<Panel> {
        let scaled: Vec<Vec<f64>> = self
            .rates(rng)
            .into_iter()
            .map(|r| r.into_iter().map(|x| 0.01 * x).collect())
            .collect();
        levels_from_rates(default_start(), &scaled)
    }
}

pub fn planted_lag_growth(
    n_goods: usize,
    n_prime: usize,
    k: usize,
    noise: f64,
    rng: RngStream,
) -> Result<GrowthPanel> {
    PlantedLag {
        noise,
        ..PlantedLag::new(n_goods, n_prime, k)
    }
    .growth(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::growth::to_growth;

    #[test]
    fn levels_round_trip_rates() {
        let raw = white_noise_rates(2, 30, RngStream::new(1, 0));
        let scaled: Vec<Vec<f64>> = raw.iter().map(|r| r.iter().map(|x| 0.01 * x).collect()).collect();
        let p = levels_from_rates(default_start(), &scaled).unwrap();
        assert_eq!(p.n_months(), 31);
        let gp = to_growth(&p).unwrap();
        for (a, b) in gp.rates_raw.iter().flatten().zip(scaled.iter().flatten()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn planted_population_correlation_is_unit_diagonal() {
        let pf = PlantedFactors::standard(239);
        let c = pf.population_correlation();
        assert_eq!(c.dim(), 63);
        assert!((c.trace() - 63.0).abs() < 1e-12);
        let [u1, u2] = pf.loadings();
        let dot: f64 = u1.iter().zip(&u2).map(|(a, b)| a * b).sum();
        assert!(dot.abs() < 1e-15);
    }

    #[test]
    fn seeded_generation_is_reproducible() {
        let a = PlantedLag::new(2, 60, 2).rates(RngStream::new(9, 1));
        let b = PlantedLag::new(2, 60, 2).rates(RngStream::new(9, 1));
        assert_eq!(a, b);
    }
}
