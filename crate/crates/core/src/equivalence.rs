//! The dictionary between velocity `u` and magnetization `w = u + grad q`.

use rustfft::num_complex::Complex64;

use crate::dynamics::{dot, pressure_from_velocity, scalar_advect, PrescribedVelocity};
use crate::error::{domain, Error, Result};
use crate::field::{FourierField, ScalarField};
use crate::timestepper::{ifrk4_core, HeatFactors};

/// `u = P w`.
pub fn velocity_from_magnetization(w: &FourierField) -> FourierField {
    w.leray_project()
}

/// `w0 + grad q0`. The mean of `q0` has no effect.
pub fn gauge_shift(w0: &FourierField, q0: &ScalarField) -> Result<FourierField> {
    w0.check_same_lattice(q0)?;
    Ok(w0 + &q0.gradient())
}

/// Trajectory of the gauge potential, zero mean at every time.
#[derive(Clone, Debug)]
pub struct GaugePotential {
    pub times: Vec<f64>,
    pub q: Vec<ScalarField>,
}

fn zero_mean(mut q: ScalarField) -> ScalarField {
    let z = q.lattice().zero_index();
    q.coeffs_mut()[z] = [Complex64::new(0.0, 0.0)];
    q
}

/// Source `p - |u|^2 / 2` of the gauge equation, mean removed.
fn gauge_source(u: &FourierField) -> Result<ScalarField> {
    let p = pressure_from_velocity(u)?;
    let half_sq = dot(u, u)?.scale(0.5);
    Ok(zero_mean(&p.field - &half_sq))
}

/// Build `w(t) = u(t) + grad q(t)` from a velocity history, where
/// `q_t + (u . grad) q - nu Lap q = p - |u|^2 / 2`, `q(t0) = q0`, `q` kept mean-free.
///
/// The pressure is recomputed from the interpolated `u` at every stage. Output samples
/// are at `t0 + n dt` up to the last velocity time, which must be a multiple of `dt`
/// past the first. Stages between samples use linear interpolation of `u`, which caps the
/// order at two; velocity sampled every `dt / 2` keeps it at four.
pub fn magnetization_from_velocity(
    u_traj: &PrescribedVelocity,
    q0: &ScalarField,
    nu: f64,
    dt: f64,
) -> Result<(GaugePotential, Vec<(f64, FourierField)>)> {
    let times = u_traj.times();
    let (t0, t1) = (times[0], times[times.len() - 1]);
    if !(dt > 0.0) {
        return Err(domain(format!("step {dt} must be positive")));
    }
    let steps = ((t1 - t0) / dt).round();
    if (steps * dt - (t1 - t0)).abs() > 1e-9 * dt.max(t1 - t0) {
        return Err(domain(format!("velocity span {} is not a multiple of dt {dt}", t1 - t0)));
    }
    let steps = steps as usize;
    let lat = u_traj.snapshots()[0].lattice().clone();
    q0.check_same_lattice(&u_traj.snapshots()[0])?;
    let heat = HeatFactors::new(&lat, nu, dt);
    let mut q = zero_mean(q0.clone());
    let mut pot = GaugePotential {
        times: vec![t0],
        q: vec![q.clone()],
    };
    let mut w = vec![(t0, &u_traj.at(t0)? + &q.gradient())];
    for n in 1..=steps {
        let ts = t0 + (n - 1) as f64 * dt;
        let t = t0 + n as f64 * dt;
        q = ifrk4_core(&q, ts, dt, &heat, |s, q| {
            let u = u_traj.at(s.min(t1))?;
            let mut r = gauge_source(&u)?;
            r -= &scalar_advect(&u, q)?;
            Ok(zero_mean(r))
        })?;
        if !q.is_finite() {
            return Err(domain(format!("gauge potential left the finite range at t={t}")));
        }
        w.push((t, &u_traj.at(t.min(t1))? + &q.gradient()));
        pot.times.push(t);
        pot.q.push(q.clone());
    }
    Ok((pot, w))
}

/// One sample of the equivalence residual.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Residual {
    pub t: f64,
    /// `||P w - u||_{H^{1/2}}`.
    pub abs: f64,
    /// `abs / ||u||_{H^{1/2}}` (equal to `abs` when `u = 0`).
    pub rel: f64,
}

const TIME_ALIGN: f64 = 1e-12;

/// `r(t) = ||P w(t) - u(t)||_{H^{1/2}}` on aligned samples.
pub fn equivalence_residual(
    u_traj: &[(f64, FourierField)],
    w_traj: &[(f64, FourierField)],
) -> Result<Vec<Residual>> {
    if u_traj.len() != w_traj.len() {
        return Err(domain(format!("{} velocity samples vs {} magnetization samples", u_traj.len(), w_traj.len())));
    }
    u_traj
        .iter()
        .zip(w_traj)
        .map(|((tu, u), (tw, w))| {
            if (tu - tw).abs() > TIME_ALIGN * tu.abs().max(1.0) {
                return Err(Error::MisalignedTimes(*tu, *tw));
            }
            u.check_same_lattice(w)?;
            let abs = (&w.leray_project() - u).hnorm(0.5);
            let un = u.hnorm(0.5);
            Ok(Residual {
                t: *tu,
                abs,
                rel: if un > 0.0 { abs / un } else { abs },
            })
        })
        .collect()
}
