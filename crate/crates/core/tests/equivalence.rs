mod common;

use common::{random_field, random_mean_free, random_scalar, rng, taylor_green};
use magflow_core::dynamics::{Dynamics, PrescribedVelocity, SystemTag};
use magflow_core::equivalence::{equivalence_residual, gauge_shift, magnetization_from_velocity, velocity_from_magnetization};
use magflow_core::timestepper::{evolve, evolve_fixed_u_lockstep, EvolveConfig};
use magflow_core::WaveLattice;

fn projected(traj: &[(f64, magflow_core::FourierField)]) -> Vec<(f64, magflow_core::FourierField)> {
    traj.iter().map(|(t, w)| (*t, velocity_from_magnetization(w))).collect()
}

#[test]
fn magnetization_run_projects_onto_nse_run() {
    let lat = WaveLattice::new(6).unwrap();
    let u0 = taylor_green(&lat);
    let cfg = EvolveConfig::new(0.01, 0.1).snapshot_every(1);
    let u = evolve(&Dynamics::new(SystemTag::Nse, 1.0).unwrap(), &u0, &cfg).unwrap();
    let w = evolve(&Dynamics::new(SystemTag::Magnetization, 1.0).unwrap(), &u0, &cfg).unwrap();
    let r = equivalence_residual(&u.snapshots, &w.snapshots).unwrap();
    assert!(r.iter().all(|x| x.rel < 1e-12), "{:?}", r.last());
}

#[test]
fn gauge_shifted_runs_share_projection() {
    let lat = WaveLattice::new(6).unwrap();
    let mut g = rng(41);
    let w0 = random_field(&lat, &mut g, 1.0, 1.0);
    let q0 = random_scalar(&lat, &mut g, 1.0, 1.0);
    let cfg = EvolveConfig::new(0.01, 0.1).snapshot_every(1);
    let d = Dynamics::new(SystemTag::Magnetization, 1.0).unwrap();
    let a = evolve(&d, &w0, &cfg).unwrap();
    let b = evolve(&d, &gauge_shift(&w0, &q0).unwrap(), &cfg).unwrap();
    let r = equivalence_residual(&projected(&a.snapshots), &b.snapshots).unwrap();
    assert!(r.iter().all(|x| x.abs < 1e-12), "{:?}", r.last());
}

#[test]
fn gauge_potentials_differ_by_gradients() {
    let lat = WaveLattice::new(5).unwrap();
    let mut g = rng(42);
    let u0 = random_mean_free(&lat, &mut g, 0.5, 1.0).leray_project();
    let cfg = EvolveConfig::new(0.01, 0.05).snapshot_every(1);
    let u = evolve(&Dynamics::new(SystemTag::Nse, 1.0).unwrap(), &u0, &cfg).unwrap();
    let (times, snaps): (Vec<f64>, Vec<_>) = u.snapshots.iter().cloned().unzip();
    let traj = PrescribedVelocity::new(times, snaps).unwrap();
    let (_, w1) = magnetization_from_velocity(&traj, &random_scalar(&lat, &mut g, 1.0, 1.0), 1.0, 0.01).unwrap();
    let (pot, w2) = magnetization_from_velocity(&traj, &magflow_core::ScalarField::zeros(&lat), 1.0, 0.01).unwrap();
    for ((_, a), (_, b)) in w1.iter().zip(&w2) {
        assert!((a - b).leray_project().max_abs() <= 1e-10);
    }
    assert!(pot.q.iter().all(|q| q.zeroth_mode()[0].norm() == 0.0));
    let r = equivalence_residual(&u.snapshots, &w2).unwrap();
    assert!(r.iter().all(|x| x.rel <= 1e-12));
}

fn gauge_vs_direct(dt: f64) -> f64 {
    let lat = WaveLattice::new(5).unwrap();
    let mut g = rng(43);
    let u0 = random_mean_free(&lat, &mut g, 0.5, 1.0).leray_project();
    let q0 = random_scalar(&lat, &mut g, 0.5, 1.0);
    // velocity at half steps so every stage time is a sample
    let fine = EvolveConfig::new(dt / 2.0, 0.05).snapshot_every(1);
    let u = evolve(&Dynamics::new(SystemTag::Nse, 1.0).unwrap(), &u0, &fine).unwrap();
    let (times, snaps): (Vec<f64>, Vec<_>) = u.snapshots.iter().cloned().unzip();
    let traj = PrescribedVelocity::new(times, snaps).unwrap();
    let (_, w) = magnetization_from_velocity(&traj, &q0, 1.0, dt).unwrap();
    let cfg = EvolveConfig::new(dt, 0.05).snapshot_every(1);
    let direct = evolve(&Dynamics::new(SystemTag::Magnetization, 1.0).unwrap(), &gauge_shift(&u0, &q0).unwrap(), &cfg).unwrap();
    let (_, a) = w.last().unwrap();
    let (_, b) = direct.snapshots.last().unwrap();
    (a - b).l2_norm() / b.l2_norm()
}

#[test]
fn gauge_solution_satisfies_magnetization_dynamics() {
    let (a, b) = (gauge_vs_direct(0.01), gauge_vs_direct(0.005));
    println!("gauge vs direct {a:e} {b:e}");
    assert!(b < 1e-7 && a / b > 8.0, "{a:e} {b:e}");
}

#[test]
fn lockstep_fixed_u_residual_is_fourth_order() {
    let lat = WaveLattice::new(6).unwrap();
    let u0 = taylor_green(&lat);
    let res = |dt: f64| {
        let cfg = EvolveConfig::new(dt, 0.2);
        let (run, vel) = evolve_fixed_u_lockstep(1.0, &u0, &u0, &cfg).unwrap();
        assert_eq!(run.ledger.len(), vel.len());
        let (_, last_w) = run.snapshots.last().unwrap().clone();
        let (_, last_u) = vel.last().unwrap().clone();
        (&last_w.leray_project() - &last_u).l2_norm()
    };
    let (a, b) = (res(0.02), res(0.01));
    println!("fixed-u residuals {a:e} {b:e} ratio {}", a / b);
    assert!(a / b >= 8.0, "{a:e} {b:e}");
}
