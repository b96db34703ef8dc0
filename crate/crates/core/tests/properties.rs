use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use bcycle::factor::{correlation_matrix, correlation_of, rotate};
use bcycle::growth::{circular_autocorrelation, to_growth, GrowthPanel};
use bcycle::leadlag::delay_from_amplitudes;
use bcycle::modes::{project_modes, reconstruct_cycles};
use bcycle::numerics::{
    dft_forward, dft_inverse, eig_symmetric, eigenvalues_symmetric, Matrix, RngStream,
    SignConvention,
};
use bcycle::panel::{read_panel, write_panel, GoodDescriptor, LoadOptions, Panel, YearMonth};
use bcycle::xspec::{coherency_phase, periodograms, EdgeMode};

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(48)
}

fn series(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, len)
}

fn symmetric(n: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-5.0f64..5.0, n * n).prop_map(move |v| {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let x = v[i * n + j];
                m.set(i, j, x);
                m.set(j, i, x);
            }
        }
        m
    })
}

/// Closed-form roots of the characteristic polynomial of a symmetric 3×3 matrix, descending.
fn cubic_eigenvalues(a: &Matrix) -> [f64; 3] {
    let p1 = a.get(0, 1).powi(2) + a.get(0, 2).powi(2) + a.get(1, 2).powi(2);
    let q = a.trace() / 3.0;
    let p2 = (0..3).map(|i| (a.get(i, i) - q).powi(2)).sum::<f64>() + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    if p < 1e-300 {
        return [q; 3];
    }
    let b = |i: usize, j: usize| (a.get(i, j) - if i == j { q } else { 0.0 }) / p;
    let det = b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1))
        - b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0))
        + b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0));
    let r = (det / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let e1 = q + 2.0 * p * phi.cos();
    let e3 = q + 2.0 * p * (phi + 2.0 * PI / 3.0).cos();
    [e1, 3.0 * q - e1 - e3, e3]
}

fn gram_schmidt(raw: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in raw {
        let mut u = v.clone();
        for b in &basis {
            let d: f64 = u.iter().zip(b).map(|(x, y)| x * y).sum();
            u.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
        }
        let n = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        u.iter_mut().for_each(|x| *x /= n);
        basis.push(u);
    }
    basis
}

fn panel_from(levels: Vec<Vec<f64>>, start: YearMonth) -> Panel {
    let g = levels.len() / 3;
    Panel::from_series(start, GoodDescriptor::numbered(g), levels).unwrap()
}

fn white_growth(g: usize, n: usize, seed: u64) -> GrowthPanel {
    bcycle::synthetic::white_noise_growth(g, n, RngStream::new(seed, 0)).unwrap()
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn parseval_and_round_trip(x in series(2..80)) {
        let c = dft_forward(&x).unwrap();
        let lhs: f64 = x.iter().map(|v| v * v).sum();
        let rhs: f64 = c.power().iter().sum();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.max(1e-300));
        let back = dft_inverse(&c);
        for (a, b) in x.iter().zip(&back) {
            prop_assert!((a - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn power_mirror_symmetry(x in series(3..60)) {
        let p = dft_forward(&x).unwrap().power();
        let l = p.len();
        for k in 1..l {
            prop_assert!((p[k] - p[l - k]).abs() <= 1e-9 * (1.0 + p[k]));
        }
    }

    #[test]
    fn trace_and_reconstruction(m in (2usize..9).prop_flat_map(symmetric)) {
        let e = eig_symmetric(&m, &SignConvention::FirstNonzero).unwrap();
        let sum: f64 = e.values.iter().sum();
        prop_assert!((sum - m.trace()).abs() <= 1e-10 * (1.0 + m.trace().abs().max(m.frobenius())));
        prop_assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        let r = e.reconstruct();
        for i in 0..m.dim() {
            for j in 0..m.dim() {
                prop_assert!((r.get(i, j) - m.get(i, j)).abs() <= 1e-9 * (1.0 + m.frobenius()));
            }
        }
    }

    #[test]
    fn three_by_three_matches_characteristic_polynomial(m in symmetric(3)) {
        let got = eigenvalues_symmetric(&m).unwrap();
        let want = cubic_eigenvalues(&m);
        for (g, w) in got.iter().zip(want) {
            prop_assert!((g - w).abs() <= 1e-8, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn eigenvectors_are_complete(m in (2usize..9).prop_flat_map(symmetric)) {
        let e = eig_symmetric(&m, &SignConvention::FirstNonzero).unwrap();
        let n = m.dim();
        for i in 0..n {
            for j in 0..n {
                let s: f64 = (0..n).map(|k| e.vector(k)[i] * e.vector(k)[j]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((s - want).abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn relabeling_goods_keeps_eigenvalues(seed in 0u64..1000, shift in 1usize..4) {
        let gp = white_growth(4, 40, seed);
        let c = correlation_of(&gp.rates_norm);
        let g = 4;
        let perm: Vec<usize> = (0..3 * g).map(|s| (s / g) * g + (s % g + shift) % g).collect();
        let a = eigenvalues_symmetric(&c).unwrap();
        let b = eigenvalues_symmetric(&c.permuted(&perm)).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-10);
        }
    }

    #[test]
    fn rotation_keeps_circular_autocorrelation(x in series(5..50), tau in 0usize..100, m in 0usize..5) {
        let r = rotate(&x, tau);
        prop_assert_eq!(circular_autocorrelation(&x, m), circular_autocorrelation(&r, m));
    }

    #[test]
    fn level_scaling_leaves_growth_unchanged(
        rates in prop::collection::vec(-0.05f64..0.05, 3 * 30),
        c in 0.01f64..100.0,
    ) {
        let series: Vec<Vec<f64>> = rates
            .chunks(30)
            .map(|r| {
                let mut acc = 0.0;
                std::iter::once(100.0).chain(r.iter().map(|x| { acc += x; 100.0 * 10f64.powf(acc) })).collect()
            })
            .collect();
        let start = YearMonth::new(1990, 1).unwrap();
        let base = to_growth(&panel_from(series.clone(), start)).unwrap();
        let mut scaled = series;
        scaled[1].iter_mut().for_each(|v| *v *= c);
        let other = to_growth(&panel_from(scaled, start)).unwrap();
        for (a, b) in base.rates_norm.iter().flatten().zip(other.rates_norm.iter().flatten()) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn panel_text_round_trip(levels in prop::collection::vec(0.5f64..1e4, 3 * 2 * 12)) {
        let series: Vec<Vec<f64>> = levels.chunks(12).map(|c| c.to_vec()).collect();
        let p = panel_from(series, YearMonth::new(2001, 5).unwrap());
        let opts = LoadOptions::default();
        let mut first = Vec::new();
        write_panel(&p, &mut first).unwrap();
        let q = read_panel(first.as_slice(), &opts).unwrap();
        let mut second = Vec::new();
        write_panel(&q, &mut second).unwrap();
        prop_assert_eq!(&first, &second);
        prop_assert_eq!(read_panel(second.as_slice(), &opts).unwrap(), q);
    }

    #[test]
    fn chop_is_a_prefix(s in 2usize..20) {
        let levels: Vec<Vec<f64>> = (0..6).map(|i| (0..20).map(|t| 1.0 + (i * 20 + t) as f64).collect()).collect();
        let p = panel_from(levels, YearMonth::new(1999, 11).unwrap());
        let c = p.chop(s).unwrap();
        prop_assert_eq!(c.n_months(), s);
        for i in 0..6 {
            prop_assert_eq!(c.series_at(i), &p.series_at(i)[..s]);
        }
    }

    #[test]
    fn delay_is_antisymmetric(
        re1 in -5.0f64..5.0, im1 in -5.0f64..5.0, re2 in -5.0f64..5.0, im2 in -5.0f64..5.0,
        k in 1usize..10,
    ) {
        let a = Complex64::new(re1, im1);
        let b = Complex64::new(re2, im2);
        prop_assume!(a.norm() > 1e-3 && b.norm() > 1e-3);
        let period = 239.0 / k as f64;
        let d1 = delay_from_amplitudes(a, b, 239, k).unwrap();
        let d2 = delay_from_amplitudes(b, a, 239, k).unwrap();
        prop_assume!((d1.abs() - period / 2.0).abs() > 1e-9);
        prop_assert!((d1 + d2).abs() <= 1e-9 * period);
        prop_assert!(d1 > -period / 2.0 && d1 <= period / 2.0);
    }

    #[test]
    fn shuffle_preserves_multiset(x in series(0..60), seed in any::<u64>()) {
        let mut y = x.clone();
        RngStream::new(seed, 3).generator().shuffle(&mut y);
        let mut a = x;
        let mut b = y;
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn cross_periodogram_is_hermitian(x in series(8..50), y_seed in any::<u64>()) {
        let mut g = RngStream::new(y_seed, 0).generator();
        let y: Vec<f64> = x.iter().map(|_| g.normal()).collect();
        let xy = periodograms(&x, &y).unwrap().xy;
        let yx = periodograms(&y, &x).unwrap().xy;
        for (a, b) in xy.iter().zip(&yx) {
            prop_assert!((a.conj() - b).norm() <= 1e-9 * (1.0 + a.norm()));
        }
    }

    #[test]
    fn coherency_is_scale_free_and_phase_flips(seed in any::<u64>(), c1 in 0.1f64..10.0, c2 in 0.1f64..10.0) {
        let mut g = RngStream::new(seed, 0).generator();
        let x: Vec<f64> = (0..64).map(|_| g.normal()).collect();
        let y: Vec<f64> = (0..64).map(|_| g.normal()).collect();
        let base = coherency_phase(&x, &y, 5, 0, EdgeMode::Circular).unwrap();
        let xs: Vec<f64> = x.iter().map(|v| c1 * v).collect();
        let ys: Vec<f64> = y.iter().map(|v| c2 * v).collect();
        let scaled = coherency_phase(&xs, &ys, 5, 0, EdgeMode::Circular).unwrap();
        let flipped = coherency_phase(&y, &x, 5, 0, EdgeMode::Circular).unwrap();
        for k in 1..32 {
            prop_assert!((0.0..=1.0 + 1e-12).contains(&base.kappa2[k]));
            prop_assert!((base.kappa2[k] - scaled.kappa2[k]).abs() <= 1e-9);
            prop_assert!((base.phase[k] - scaled.phase[k]).abs() <= 1e-9);
            let sum = base.phase[k] + flipped.phase[k];
            prop_assert!(sum.abs() <= 1e-9 || (sum.abs() - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn volatility_identity_for_any_orthonormal_basis(seed in any::<u64>()) {
        let gp = white_growth(2, 30, seed);
        let m = gp.n_series();
        let mut g = RngStream::new(seed, 1).generator();
        let raw: Vec<Vec<f64>> = (0..m).map(|_| (0..m).map(|_| g.normal()).collect()).collect();
        let basis = gram_schmidt(&raw);
        for t in 0..gp.n_prime() {
            let direct: f64 = gp.rates_norm.iter().map(|w| w[t] * w[t]).sum();
            let modal: f64 = basis
                .iter()
                .map(|v| v.iter().enumerate().map(|(s, c)| c * gp.rates_norm[s][t]).sum::<f64>().powi(2))
                .sum();
            prop_assert!((direct - modal).abs() <= 1e-10 * direct.max(1.0));
        }
    }

    #[test]
    fn complementary_reconstructions_sum_to_panel(seed in 0u64..500, n_prime in 20usize..32, pick in 1usize..5) {
        let gp = white_growth(2, n_prime, seed);
        let model = correlation_matrix(&gp).unwrap();
        let md = project_modes(&gp, &model).unwrap();
        let half = n_prime / 2;
        let modes: Vec<usize> = vec![1, 2];
        let rest: Vec<usize> = (3..=md.m()).collect();
        let ks: Vec<usize> = (1..=half).filter(|k| k % pick == 0).collect();
        let other_ks: Vec<usize> = (1..=half).filter(|k| k % pick != 0).collect();
        let all_ks: Vec<usize> = (1..=half).collect();
        let mut total = reconstruct_cycles(&md, &modes, &ks).unwrap().series;
        let mut add = |cr: bcycle::modes::CycleReconstruction| {
            for (a, b) in total.iter_mut().zip(&cr.series) {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
            }
        };
        add(reconstruct_cycles(&md, &rest, &all_ks).unwrap());
        if !other_ks.is_empty() {
            add(reconstruct_cycles(&md, &modes, &other_ks).unwrap());
        }
        for (a, w) in total.iter().zip(&gp.rates_norm) {
            for (x, y) in a.iter().zip(w) {
                prop_assert!((x - y).abs() <= 1e-10);
            }
        }
    }
}
