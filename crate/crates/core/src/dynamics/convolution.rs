//! Direct convolution sums over mode pairs: the reference semantics of the nonlinear
//! terms restricted to the ball. No grid, no transforms. Cost is quadratic in the
//! number of modes; intended for `K <= 4` (and tests up to `K = 8`).

use rustfft::num_complex::Complex64;

use crate::error::Result;
use crate::field::FourierField;

use super::SystemTag;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// `out_k = sum_{p + q = k, |p|,|q| <= K} term(p, q)` for every `k` in the ball.
fn convolve(
    u: &FourierField,
    w: &FourierField,
    mut term: impl FnMut([f64; 3], [f64; 3], &[Complex64; 3], &[Complex64; 3]) -> [Complex64; 3],
) -> Result<FourierField> {
    u.check_same_lattice(w)?;
    let lat = u.lattice();
    let mut out = FourierField::zeros(lat);
    let modes = lat.modes();
    for (m, k) in modes.iter().enumerate() {
        let mut acc = [ZERO; 3];
        for (pi, p) in modes.iter().enumerate() {
            let q = [k[0] - p[0], k[1] - p[1], k[2] - p[2]];
            let Some(qi) = lat.index_of(q) else { continue };
            let t = term(p.map(f64::from), q.map(f64::from), &u.coeffs()[pi], &w.coeffs()[qi]);
            for c in 0..3 {
                acc[c] += t[c];
            }
        }
        out.coeffs_mut()[m] = acc;
    }
    Ok(out)
}

fn dot(a: &[Complex64; 3], b: [Complex64; 3]) -> Complex64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// `(u . grad) w` by direct summation.
pub fn advect_direct(u: &FourierField, w: &FourierField) -> Result<FourierField> {
    convolve(u, w, |_, q, up, wq| {
        let s = dot(up, q.map(|x| I * x));
        wq.map(|z| s * z)
    })
}

/// `(grad u)^T w` by direct summation.
pub fn grad_transpose_mul_direct(u: &FourierField, w: &FourierField) -> Result<FourierField> {
    convolve(u, w, |p, _, up, wq| {
        let s = dot(up, *wq);
        p.map(|x| I * x * s)
    })
}

/// `grad(|w|^2 / 2)` by direct summation.
pub fn grad_half_sq_direct(w: &FourierField) -> Result<FourierField> {
    let sum = convolve(w, w, |_, _, a, b| {
        let s = dot(a, *b);
        [s, ZERO, ZERO]
    })?;
    let lat = w.lattice();
    Ok(FourierField::from_fn(lat, |k| {
        let s = sum.coeff(k).unwrap()[0];
        k.map(|x| I * (0.5 * x as f64) * s)
    }))
}

/// Nonlinear part `N(w)` of each system (so that `w_t = N(w) - nu Lambda^2 w`), built
/// literally from the direct products. `velocity` is the prescribed `u(t)` for
/// `linear_fixed_u` and ignored otherwise.
pub fn nonlinear_direct(tag: SystemTag, w: &FourierField, velocity: Option<&FourierField>) -> Result<FourierField> {
    let pw = w.leray_project();
    let out = match tag {
        SystemTag::Nse => advect_direct(&pw, &pw)?.leray_project(),
        SystemTag::Magnetization => &advect_direct(&pw, w)? + &grad_transpose_mul_direct(&pw, w)?,
        SystemTag::LinearFixedU => {
            let u = velocity.ok_or(crate::Error::MissingPrescribedVelocity)?;
            &advect_direct(u, w)? + &grad_transpose_mul_direct(u, w)?
        }
        SystemTag::Simplified => &advect_direct(&pw, w)? + &grad_half_sq_direct(w)?,
        SystemTag::Burgers => advect_direct(w, w)?,
        SystemTag::Toy => grad_transpose_mul_direct(&pw, w)?,
    };
    Ok(-&out)
}
