//! Pseudospectral quadratic products.
//!
//! Every product is formed on the collocation grid and transformed back keeping only
//! `|k| <= K`. On a grid with `M >= 3K + 1` this equals the exact Galerkin truncation
//! of the product, so these routines agree with direct convolution sums to roundoff.

use std::sync::Arc;

use rustfft::num_complex::Complex64;

use crate::error::{domain, Result};
use crate::field::{FourierField, ScalarField};
use crate::lattice::WaveLattice;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn require_products(lat: &WaveLattice) -> Result<()> {
    if lat.supports_products() {
        Ok(())
    } else {
        Err(domain(format!(
            "grid M={} cannot dealias products at K={} (need M >= 3K+1)",
            lat.grid_size(),
            lat.radius()
        )))
    }
}

/// `i k_axis f_k` for one scalar spectrum.
fn derivative(lat: &WaveLattice, spec: &[Complex64], axis: usize) -> Vec<Complex64> {
    spec.iter()
        .zip(lat.modes())
        .map(|(z, k)| I * (k[axis] as f64) * z)
        .collect()
}

fn spectra(f: &FourierField) -> [Vec<Complex64>; 3] {
    std::array::from_fn(|c| f.component(c))
}

/// Jacobian spectra `d_j f_i`, indexed `[i][j]`.
fn jacobian(lat: &WaveLattice, f: &[Vec<Complex64>; 3]) -> Vec<Vec<Complex64>> {
    let mut out = Vec::with_capacity(9);
    for fi in f {
        for j in 0..3 {
            out.push(derivative(lat, fi, j));
        }
    }
    out
}

fn synth(lat: &WaveLattice, list: &[&Vec<Complex64>]) -> Vec<Vec<f64>> {
    let refs: Vec<&[Complex64]> = list.iter().map(|v| v.as_slice()).collect();
    lat.synthesize(&refs)
}

fn analyze(lat: &WaveLattice, grids: &[Vec<f64>]) -> Vec<Vec<Complex64>> {
    let refs: Vec<&[f64]> = grids.iter().map(Vec::as_slice).collect();
    lat.analyze(&refs)
}

fn vector_from(lat: &Arc<WaveLattice>, s: &[Vec<Complex64>]) -> FourierField {
    FourierField::from_components(lat, [&s[0], &s[1], &s[2]])
}

/// `(u . grad) w`: component `i` is `sum_j u_j d_j w_i`.
pub fn advect(u: &FourierField, w: &FourierField) -> Result<FourierField> {
    u.check_same_lattice(w)?;
    let lat = u.lattice();
    require_products(lat)?;
    let us = spectra(u);
    let jw = jacobian(lat, &spectra(w));
    let mut list: Vec<&Vec<Complex64>> = us.iter().collect();
    list.extend(jw.iter());
    let g = synth(lat, &list);
    let n = lat.grid_len();
    let mut prod = vec![vec![0.0; n]; 3];
    for p in 0..n {
        for i in 0..3 {
            prod[i][p] = g[0][p] * g[3 + 3 * i][p] + g[1][p] * g[4 + 3 * i][p] + g[2][p] * g[5 + 3 * i][p];
        }
    }
    Ok(vector_from(lat, &analyze(lat, &prod)))
}

/// `(grad u)^T w`: component `i` is `sum_j (d_i u_j) w_j`.
pub fn grad_transpose_mul(u: &FourierField, w: &FourierField) -> Result<FourierField> {
    u.check_same_lattice(w)?;
    let lat = u.lattice();
    require_products(lat)?;
    let ju = jacobian(lat, &spectra(u));
    let ws = spectra(w);
    let mut list: Vec<&Vec<Complex64>> = ws.iter().collect();
    list.extend(ju.iter());
    let g = synth(lat, &list);
    let n = lat.grid_len();
    let mut prod = vec![vec![0.0; n]; 3];
    for p in 0..n {
        for i in 0..3 {
            // d_i u_j sits at 3 + 3j + i
            prod[i][p] = g[3 + i][p] * g[0][p] + g[6 + i][p] * g[1][p] + g[9 + i][p] * g[2][p];
        }
    }
    Ok(vector_from(lat, &analyze(lat, &prod)))
}

/// `grad(|w|^2 / 2)`.
pub fn grad_half_sq(w: &FourierField) -> Result<FourierField> {
    let lat = w.lattice();
    require_products(lat)?;
    let ws = spectra(w);
    let g = synth(lat, &ws.iter().collect::<Vec<_>>());
    let sq: Vec<f64> = (0..lat.grid_len())
        .map(|p| 0.5 * (g[0][p] * g[0][p] + g[1][p] * g[1][p] + g[2][p] * g[2][p]))
        .collect();
    let s = &analyze(lat, &[sq])[0];
    let comps: Vec<Vec<Complex64>> = (0..3).map(|a| derivative(lat, s, a)).collect();
    Ok(vector_from(lat, &comps))
}

/// Truncated pointwise dot product `u . w`.
pub fn dot(u: &FourierField, w: &FourierField) -> Result<ScalarField> {
    u.check_same_lattice(w)?;
    let lat = u.lattice();
    require_products(lat)?;
    let us = spectra(u);
    let ws = spectra(w);
    let g = synth(lat, &us.iter().chain(ws.iter()).collect::<Vec<_>>());
    let prod: Vec<f64> = (0..lat.grid_len())
        .map(|p| g[0][p] * g[3][p] + g[1][p] * g[4][p] + g[2][p] * g[5][p])
        .collect();
    let s = analyze(lat, &[prod]);
    Ok(ScalarField::from_components(lat, [&s[0]]))
}

/// Scalar transport term `(u . grad) q`.
pub fn scalar_advect(u: &FourierField, q: &ScalarField) -> Result<ScalarField> {
    u.check_same_lattice(q)?;
    let lat = u.lattice();
    require_products(lat)?;
    let us = spectra(u);
    let qs = q.values();
    let dq: Vec<Vec<Complex64>> = (0..3).map(|a| derivative(lat, &qs, a)).collect();
    let g = synth(lat, &us.iter().chain(dq.iter()).collect::<Vec<_>>());
    let prod: Vec<f64> = (0..lat.grid_len())
        .map(|p| g[0][p] * g[3][p] + g[1][p] * g[4][p] + g[2][p] * g[5][p])
        .collect();
    let s = analyze(lat, &[prod]);
    Ok(ScalarField::from_components(lat, [&s[0]]))
}

/// Pressure in the zero-mean gauge together with the divergence of the input.
#[derive(Clone, Debug)]
pub struct Pressure {
    pub field: ScalarField,
    /// Largest `|k . u_k| / |k|` of the velocity it was computed from.
    pub divergence_defect: f64,
}

impl Pressure {
    pub const DIVERGENCE_WARN: f64 = 1e-10;

    /// Human-readable warning when the input velocity was not divergence-free.
    pub fn warning(&self) -> Option<String> {
        (self.divergence_defect > Self::DIVERGENCE_WARN).then(|| {
            format!(
                "pressure computed from a velocity with divergence defect {:.3e}",
                self.divergence_defect
            )
        })
    }
}

/// `p = (-Lap)^{-1} div[(u . grad) u]`, i.e. `p_k = i k . N_k / |k|^2` with `N = (u . grad) u`
/// and `p_0 = 0`.
pub fn pressure_from_velocity(u: &FourierField) -> Result<Pressure> {
    let n = advect(u, u)?;
    let lat = u.lattice();
    let field = ScalarField::from_fn(lat, |_| [Complex64::new(0.0, 0.0)]);
    let mut field = field;
    for (m, (v, (k, &n2))) in n
        .coeffs()
        .iter()
        .zip(lat.modes().iter().zip(lat.norm_sq()))
        .enumerate()
    {
        if n2 == 0.0 {
            continue;
        }
        let dot = v[0] * k[0] as f64 + v[1] * k[1] as f64 + v[2] * k[2] as f64;
        field.coeffs_mut()[m] = [I * dot / n2];
    }
    Ok(Pressure {
        field,
        divergence_defect: u.divergence_defect(),
    })
}

/// Lattice on which products of fields from `lat` are represented without truncation.
pub fn exact_product_lattice(lat: &WaveLattice) -> Result<Arc<WaveLattice>> {
    WaveLattice::new(2 * lat.radius() + 1)
}

// Fused kernels used by the right-hand sides. Each is an exact rewrite of the
// corresponding sum of the public products above, arranged to need fewer transforms.

/// `(u . grad) w + (grad u)^T w = grad(u . w) - u x curl w`.
pub(crate) fn magnetization_term(u: &FourierField, w: &FourierField) -> Result<FourierField> {
    u.check_same_lattice(w)?;
    let lat = u.lattice();
    require_products(lat)?;
    let us = spectra(u);
    let ws = spectra(w);
    let cw = spectra(&w.curl());
    let list: Vec<&Vec<Complex64>> = us.iter().chain(cw.iter()).chain(ws.iter()).collect();
    let g = synth(lat, &list);
    let n = lat.grid_len();
    let mut prod = vec![vec![0.0; n]; 4];
    for p in 0..n {
        let (u0, u1, u2) = (g[0][p], g[1][p], g[2][p]);
        let (c0, c1, c2) = (g[3][p], g[4][p], g[5][p]);
        prod[0][p] = u1 * c2 - u2 * c1;
        prod[1][p] = u2 * c0 - u0 * c2;
        prod[2][p] = u0 * c1 - u1 * c0;
        prod[3][p] = u0 * g[6][p] + u1 * g[7][p] + u2 * g[8][p];
    }
    let s = analyze(lat, &prod);
    let comps: Vec<Vec<Complex64>> = (0..3)
        .map(|a| {
            let grad = derivative(lat, &s[3], a);
            grad.iter().zip(&s[a]).map(|(g, c)| g - c).collect()
        })
        .collect();
    Ok(vector_from(lat, &comps))
}

/// `div(u (x) w) + grad(|w|^2 / 2)`, which equals `(u . grad) w + grad(|w|^2/2)` for
/// divergence-free `u`. The zero mode is exactly zero.
pub(crate) fn simplified_term(u: &FourierField, w: &FourierField) -> Result<FourierField> {
    u.check_same_lattice(w)?;
    let lat = u.lattice();
    require_products(lat)?;
    let us = spectra(u);
    let ws = spectra(w);
    let g = synth(lat, &us.iter().chain(ws.iter()).collect::<Vec<_>>());
    let n = lat.grid_len();
    // T_ij = u_j w_i + delta_ij |w|^2 / 2, row-major
    let mut t = vec![vec![0.0; n]; 9];
    for p in 0..n {
        let half = 0.5 * (g[3][p] * g[3][p] + g[4][p] * g[4][p] + g[5][p] * g[5][p]);
        for i in 0..3 {
            for j in 0..3 {
                let mut v = g[j][p] * g[3 + i][p];
                if i == j {
                    v += half;
                }
                t[3 * i + j][p] = v;
            }
        }
    }
    let s = analyze(lat, &t);
    Ok(vector_from(lat, &divergence_rows(lat, &s)))
}

/// `div(u (x) u)`, equal to `(u . grad) u` for divergence-free `u`, zero mean exactly.
pub(crate) fn nse_term(u: &FourierField) -> Result<FourierField> {
    let lat = u.lattice();
    require_products(lat)?;
    let us = spectra(u);
    let g = synth(lat, &us.iter().collect::<Vec<_>>());
    let n = lat.grid_len();
    const PAIRS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];
    let mut t = vec![vec![0.0; n]; 6];
    for p in 0..n {
        for (slot, &(a, b)) in PAIRS.iter().enumerate() {
            t[slot][p] = g[a][p] * g[b][p];
        }
    }
    let s = analyze(lat, &t);
    let at = |a: usize, b: usize| {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        PAIRS.iter().position(|&x| x == (a, b)).unwrap()
    };
    let rows: Vec<Vec<Complex64>> = (0..9).map(|ij| s[at(ij / 3, ij % 3)].clone()).collect();
    Ok(vector_from(lat, &divergence_rows(lat, &rows)))
}

/// Component `i` is `sum_j i k_j T_ij` for row-major spectra `T`.
fn divergence_rows(lat: &WaveLattice, t: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    (0..3)
        .map(|i| {
            lat.modes()
                .iter()
                .enumerate()
                .map(|(m, k)| {
                    I * (t[3 * i][m] * k[0] as f64 + t[3 * i + 1][m] * k[1] as f64 + t[3 * i + 2][m] * k[2] as f64)
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sin_axis(lat: &Arc<WaveLattice>, k: [i32; 3], comp: usize, amp: f64) -> FourierField {
        let mut v = [c(0.0, 0.0); 3];
        v[comp] = c(0.0, -0.5 * amp);
        FourierField::single_mode(lat, k, v).unwrap()
    }

    #[test]
    fn advect_by_constant_is_directional_derivative() {
        let lat = WaveLattice::new(3).unwrap();
        let u = FourierField::single_mode(&lat, [0, 0, 0], [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        let w = sin_axis(&lat, [1, 0, 0], 1, 1.0);
        // cos(x) e_2: coefficient 1/2 at +-(1,0,0)
        let expect = FourierField::single_mode(&lat, [1, 0, 0], [c(0.0, 0.0), c(0.5, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(advect(&u, &w).unwrap().max_abs_diff(&expect) < 1e-15);
        let constant = FourierField::single_mode(&lat, [0, 0, 0], [c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]).unwrap();
        assert!(advect(&w, &constant).unwrap().max_abs() < 1e-15);
        assert!(grad_transpose_mul(&constant, &w).unwrap().max_abs() < 1e-15);
        assert!(grad_half_sq(&constant).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn grad_half_sq_of_single_sine() {
        let lat = WaveLattice::new(3).unwrap();
        let w = sin_axis(&lat, [1, 0, 0], 0, 1.0);
        // sin x cos x = sin(2x)/2: coefficient -i/4 at (2,0,0)
        let expect = FourierField::single_mode(&lat, [2, 0, 0], [c(0.0, -0.25), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(grad_half_sq(&w).unwrap().max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn shear_flow_has_no_pressure() {
        let lat = WaveLattice::new(3).unwrap();
        let u = sin_axis(&lat, [0, 1, 0], 0, 1.0);
        let p = pressure_from_velocity(&u).unwrap();
        assert!(p.field.max_abs() < 1e-15);
        assert!(p.warning().is_none());
        let constant = FourierField::single_mode(&lat, [0, 0, 0], [c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]).unwrap();
        assert!(pressure_from_velocity(&constant).unwrap().field.max_abs() < 1e-15);
    }

    #[test]
    fn pressure_warns_on_compressible_input() {
        let lat = WaveLattice::new(3).unwrap();
        let u = sin_axis(&lat, [1, 0, 0], 0, 1.0);
        assert!(pressure_from_velocity(&u).unwrap().warning().is_some());
    }

    #[test]
    fn undersized_grid_is_rejected() {
        let lat = WaveLattice::with_grid(4, 10).unwrap();
        let f = FourierField::zeros(&lat);
        assert!(advect(&f, &f).is_err());
    }
}
