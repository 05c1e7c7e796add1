mod common;

use common::{from_point_fn, random_field, random_mean_free, rng, taylor_green};
use magflow_core::dynamics::convolution::{advect_direct, grad_half_sq_direct, grad_transpose_mul_direct};
use magflow_core::dynamics::{
    advect, grad_half_sq, grad_transpose_mul, pressure_from_velocity, Backend, Dynamics, PrescribedVelocity,
    SystemTag,
};
use magflow_core::WaveLattice;
use std::sync::Arc;

#[test]
fn products_match_direct_sums() {
    let lat = WaveLattice::new(4).unwrap();
    let mut r = rng(11);
    for _ in 0..5 {
        let u = random_field(&lat, &mut r, 1.0, 1.0);
        let w = random_field(&lat, &mut r, 1.0, 1.0);
        assert!(advect(&u, &w).unwrap().max_abs_diff(&advect_direct(&u, &w).unwrap()) < 1e-12);
        assert!(
            grad_transpose_mul(&u, &w).unwrap().max_abs_diff(&grad_transpose_mul_direct(&u, &w).unwrap()) < 1e-12
        );
        assert!(grad_half_sq(&w).unwrap().max_abs_diff(&grad_half_sq_direct(&w).unwrap()) < 1e-12);
    }
}

#[test]
fn taylor_green_advection_matches_direct_sum() {
    let lat = WaveLattice::new(4).unwrap();
    let tg = taylor_green(&lat);
    assert!(advect(&tg, &tg).unwrap().max_abs_diff(&advect_direct(&tg, &tg).unwrap()) < 1e-13);
}

#[test]
fn every_rhs_matches_convolution_backend() {
    let lat = WaveLattice::new(4).unwrap();
    let mut r = rng(12);
    for tag in SystemTag::ALL {
        let w = random_field(&lat, &mut r, 1.0, 1.0);
        let mut d = Dynamics::new(tag, 1.0).unwrap();
        if tag == SystemTag::LinearFixedU {
            let u = random_field(&lat, &mut r, 1.0, 1.0).leray_project();
            d = d.with_prescribed(Arc::new(PrescribedVelocity::steady(u)));
        }
        let a = d.rhs(0.0, &w).unwrap();
        let b = d.clone().with_backend(Backend::Convolution).rhs(0.0, &w).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-12, "{tag}: {}", a.max_abs_diff(&b));
    }
}

#[test]
fn grad_transpose_of_self_is_half_gradient_of_square() {
    let lat = WaveLattice::new(6).unwrap();
    let w = random_field(&lat, &mut rng(13), 1.0, 1.5);
    let a = grad_transpose_mul(&w, &w).unwrap();
    let b = grad_half_sq(&w).unwrap();
    assert!(a.max_abs_diff(&b) < 1e-12);
}

#[test]
fn nse_rhs_of_taylor_green_matches_closed_form() {
    // (u.grad)u = (sin2x cos^2 z / 2, sin2y cos^2 z / 2, 0), p = (cos2x + cos2y)(cos2z + 2)/16,
    // rhs = -(u.grad)u - grad p - nu Lambda^2 u with Lambda^2 u = 3u.
    let lat = WaveLattice::new(4).unwrap();
    let tg = taylor_green(&lat);
    let rhs = Dynamics::new(SystemTag::Nse, 1.0).unwrap().rhs(0.0, &tg).unwrap();
    let expect = from_point_fn(&lat, |x, y, z| {
        let cz2 = z.cos().powi(2);
        let s = (2.0 * x).cos() + (2.0 * y).cos();
        let px = -(2.0 * x).sin() * ((2.0 * z).cos() + 2.0) / 8.0;
        let py = -(2.0 * y).sin() * ((2.0 * z).cos() + 2.0) / 8.0;
        let pz = -s * (2.0 * z).sin() / 8.0;
        let u = [x.sin() * y.cos() * z.cos(), -x.cos() * y.sin() * z.cos(), 0.0];
        [
            -0.5 * (2.0 * x).sin() * cz2 - px - 3.0 * u[0],
            -0.5 * (2.0 * y).sin() * cz2 - py - 3.0 * u[1],
            -pz - 3.0 * u[2],
        ]
    });
    assert!(rhs.max_abs_diff(&expect) < 1e-8);
}

#[test]
fn taylor_green_pressure_matches_closed_form() {
    let lat = WaveLattice::new(4).unwrap();
    let p = pressure_from_velocity(&taylor_green(&lat)).unwrap();
    assert!(p.warning().is_none());
    let expect = from_point_fn(&lat, |x, y, z| {
        [((2.0 * x).cos() + (2.0 * y).cos()) * ((2.0 * z).cos() + 2.0) / 16.0, 0.0, 0.0]
    });
    let mut e = expect.scalar_component(0);
    // zero-mean gauge
    let z = lat.zero_index();
    e.coeffs_mut()[z] = [magflow_core::Complex64::new(0.0, 0.0)];
    assert!(p.field.max_abs_diff(&e) < 1e-14);
}

#[test]
fn conserved_zeroth_modes_are_exactly_zero_in_rhs() {
    let lat = WaveLattice::new(5).unwrap();
    let mut r = rng(14);
    for _ in 0..5 {
        let w = random_field(&lat, &mut r, 2.0, 1.0);
        for tag in [SystemTag::Nse, SystemTag::Simplified] {
            let z = Dynamics::new(tag, 1.0).unwrap().rhs(0.0, &w).unwrap().zeroth_mode();
            assert!(z.iter().all(|c| c.norm() == 0.0), "{tag}: {z:?}");
        }
    }
}

#[test]
fn fixed_u_zeroth_mode_rate_is_bounded() {
    // |d/dt w_0| <= 2 ||w||_{1/2} ||u||_{1/2} in coefficient sums, i.e. divided by (2pi)^3
    let lat = WaveLattice::new(6).unwrap();
    let mut r = rng(15);
    let half = magflow_core::SobolevIndex::new(0.5).unwrap();
    for _ in 0..20 {
        let w = random_field(&lat, &mut r, 1.0, 0.5);
        let u = random_mean_free(&lat, &mut r, 1.0, 0.5).leray_project();
        let d = Dynamics::new(SystemTag::LinearFixedU, 1.0)
            .unwrap()
            .with_prescribed(Arc::new(PrescribedVelocity::steady(u.clone())));
        let rate = d.rhs(0.0, &w).unwrap().zeroth_mode();
        let rate = rate.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let bound = 2.0 * w.sobolev_seminorm(half).unwrap() * u.sobolev_seminorm(half).unwrap() / magflow_core::VOLUME;
        assert!(rate <= bound, "{rate} > {bound}");
    }
}

#[test]
fn burgers_and_simplified_differ_by_the_wiring_terms() {
    // rhs(burgers) - rhs(simplified) = advect(Pw - w, w) + grad_half_sq(w), checked on the oracle
    let lat = WaveLattice::new(4).unwrap();
    let w = random_field(&lat, &mut rng(16), 1.0, 1.0);
    let b = Dynamics::new(SystemTag::Burgers, 1.0).unwrap().rhs(0.0, &w).unwrap();
    let s = Dynamics::new(SystemTag::Simplified, 1.0).unwrap().rhs(0.0, &w).unwrap();
    let diff = &advect_direct(&(&w.leray_project() - &w), &w).unwrap() + &grad_half_sq_direct(&w).unwrap();
    assert!((&b - &s).max_abs_diff(&diff) < 1e-12);
}
