mod common;

use common::{random_field, random_mean_free, random_scalar, rng};
use magflow_core::{SobolevIndex, WaveLattice};
use proptest::prelude::*;

fn s_idx(s: f64) -> SobolevIndex {
    SobolevIndex::new(s).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn leray_is_idempotent_and_solenoidal(seed in any::<u64>(), k in 2usize..7) {
        let lat = WaveLattice::new(k).unwrap();
        let f = random_field(&lat, &mut rng(seed), 1.0, 0.5);
        let p = f.leray_project();
        prop_assert!(p.leray_project().max_abs_diff(&p) <= 1e-14);
        prop_assert!(p.divergence_defect() <= 1e-14);
        prop_assert!(p.hermitian_defect() == 0.0);
    }

    #[test]
    fn gradients_are_annihilated(seed in any::<u64>(), k in 2usize..7) {
        let lat = WaveLattice::new(k).unwrap();
        let q = random_scalar(&lat, &mut rng(seed), 1.0, 0.0);
        prop_assert!(q.gradient().leray_project().max_abs() <= 1e-14);
    }

    #[test]
    fn helmholtz_reconstructs(seed in any::<u64>(), k in 2usize..7) {
        let lat = WaveLattice::new(k).unwrap();
        let f = random_field(&lat, &mut rng(seed), 1.0, 0.5);
        let h = f.helmholtz_decompose();
        let mut back = &h.divfree + &h.potential.gradient();
        let z = lat.zero_index();
        for c in 0..3 {
            back.coeffs_mut()[z][c] += h.mean[c];
        }
        prop_assert!(back.max_abs_diff(&f) <= 1e-13);
        prop_assert!(h.potential.zeroth_mode()[0].norm() == 0.0);
    }

    #[test]
    fn lambda_powers_compose(seed in any::<u64>(), s in -1.0f64..3.0, t in -1.0f64..3.0) {
        let lat = WaveLattice::new(5).unwrap();
        let f = random_mean_free(&lat, &mut rng(seed), 1.0, 2.0);
        let a = f.lambda_pow(s_idx(s)).lambda_pow(s_idx(t));
        let b = f.lambda_pow(s_idx(s + t));
        prop_assert!(a.max_abs_diff(&b) <= 1e-12 * b.max_abs().max(1.0));
    }

    #[test]
    fn seminorms_are_ordered(seed in any::<u64>(), s in 0.0f64..3.0, d in 0.0f64..3.0) {
        let lat = WaveLattice::new(5).unwrap();
        let f = random_mean_free(&lat, &mut rng(seed), 1.0, 1.0);
        let lo = f.sobolev_seminorm(s_idx(s)).unwrap();
        let hi = f.sobolev_seminorm(s_idx(s + d)).unwrap();
        prop_assert!(lo <= hi * (1.0 + 1e-14));
        let full = f.sobolev_norm(s_idx(s)).unwrap();
        let l2 = f.l2_norm();
        prop_assert!((full * full - (l2 * l2 + lo * lo)).abs() <= 1e-12 * full * full);
    }

    #[test]
    fn interpolation_inequality(seed in any::<u64>()) {
        let lat = WaveLattice::new(5).unwrap();
        let f = random_field(&lat, &mut rng(seed), 1.0, 1.0);
        let h1 = f.sobolev_seminorm(s_idx(1.0)).unwrap();
        let a = f.sobolev_seminorm(s_idx(0.5)).unwrap();
        let b = f.sobolev_seminorm(s_idx(1.5)).unwrap();
        prop_assert!(h1 <= (a * b).sqrt() * (1.0 + 1e-12));
    }

    #[test]
    fn hermitian_symmetry_is_preserved(seed in any::<u64>()) {
        let lat = WaveLattice::new(4).unwrap();
        let f = random_field(&lat, &mut rng(seed), 1.0, 1.0);
        prop_assert!(f.lambda_pow(s_idx(0.5)).hermitian_defect() == 0.0);
        prop_assert!(f.galerkin_project(2).unwrap().hermitian_defect() == 0.0);
        prop_assert!(f.helmholtz_decompose().potential.hermitian_defect() == 0.0);
        prop_assert!(f.curl().hermitian_defect() == 0.0);
        let g = magflow_core::FourierField::from_grid(&lat, &f.to_grid()).unwrap();
        prop_assert!(g.hermitian_defect() == 0.0);
        prop_assert!(g.max_abs_diff(&f) <= 1e-13 * f.max_abs());
    }

    #[test]
    fn inner_product_matches_grid_quadrature(seed in any::<u64>()) {
        let lat = WaveLattice::new(4).unwrap();
        let mut r = rng(seed);
        let f = random_field(&lat, &mut r, 1.0, 1.0);
        let g = random_field(&lat, &mut r, 1.0, 1.0);
        let (gf, gg) = (f.to_grid(), g.to_grid());
        let n = lat.grid_len();
        let cell = magflow_core::VOLUME / n as f64;
        let quad: f64 = (0..n).map(|p| (0..3).map(|c| gf[c][p] * gg[c][p]).sum::<f64>()).sum::<f64>() * cell;
        let exact = f.l2_inner(&g).unwrap();
        prop_assert!((quad - exact).abs() <= 1e-12 * f.l2_norm() * g.l2_norm());
    }
}

#[test]
fn direct_dft_agrees_with_transform() {
    let lat = WaveLattice::new(4).unwrap();
    let f = random_field(&lat, &mut rng(5), 1.0, 1.0);
    let grid = f.to_grid();
    let m = lat.grid_size();
    let h = 2.0 * std::f64::consts::PI / m as f64;
    for &(i, j, l) in &[(0, 0, 0), (3, 7, 1), (m - 1, 2, m / 2)] {
        let x = [i as f64 * h, j as f64 * h, l as f64 * h];
        let direct = f.eval(x);
        for c in 0..3 {
            assert!((direct[c] - grid[c][(i * m + j) * m + l]).abs() < 1e-13);
        }
    }
}
