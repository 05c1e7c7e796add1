//! Fourier representation of fields on the torus `[0, 2pi)^3` and the linear operator
//! toolkit: fractional derivatives, Leray projection, Helmholtz split, Galerkin
//! truncation, Sobolev norms.
//!
//! A field `f(x) = sum_k f_k e^{i k.x}` is stored as its coefficients on the modes of
//! a [`WaveLattice`]. Norms carry the `(2pi)^3` volume factor so they equal the
//! literal integrals over the periodic cell.

use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::Arc;

use rustfft::num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::lattice::WaveLattice;
use crate::sum::pairwise_sum;

/// `(2 pi)^3`, the volume of the periodic cell.
pub const VOLUME: f64 = 8.0 * PI * PI * PI;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Truncated Fourier coefficients of a `C`-component field.
#[derive(Clone, Debug)]
pub struct Field<const C: usize> {
    lattice: Arc<WaveLattice>,
    coeffs: Vec<[Complex64; C]>,
}

/// Three-component (vector) field: velocities and magnetizations.
pub type FourierField = Field<3>;
/// Scalar field: gauge potentials and pressures.
pub type ScalarField = Field<1>;

/// Exponent of a fractional derivative or Sobolev norm, restricted to `[-2, 6]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct SobolevIndex(f64);

impl SobolevIndex {
    pub const MIN: f64 = -2.0;
    pub const MAX: f64 = 6.0;

    pub fn new(s: f64) -> Result<Self> {
        if !(Self::MIN..=Self::MAX).contains(&s) {
            return Err(domain(format!("Sobolev index {s} outside [-2, 6]")));
        }
        Ok(Self(s))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for SobolevIndex {
    type Error = Error;
    fn try_from(s: f64) -> Result<Self> {
        Self::new(s)
    }
}

/// Components of the Helmholtz split `f = divfree + grad q + mean`.
#[derive(Clone, Debug)]
pub struct Helmholtz {
    pub divfree: FourierField,
    pub potential: ScalarField,
    pub mean: [Complex64; 3],
}

impl<const C: usize> Field<C> {
    pub fn zeros(lattice: &Arc<WaveLattice>) -> Self {
        Self {
            lattice: Arc::clone(lattice),
            coeffs: vec![[ZERO; C]; lattice.len()],
        }
    }

    /// Field with a single coefficient at `k` and its Hermitian partner at `-k`.
    pub fn single_mode(lattice: &Arc<WaveLattice>, k: [i32; 3], value: [Complex64; C]) -> Result<Self> {
        let mut f = Self::zeros(lattice);
        let i = lattice
            .index_of(k)
            .ok_or_else(|| domain(format!("mode {k:?} outside the lattice")))?;
        let n = lattice.negated(i);
        if i == n {
            f.coeffs[i] = value.map(|z| Complex64::new(z.re, 0.0));
        } else {
            f.coeffs[i] = value;
            f.coeffs[n] = value.map(|z| z.conj());
        }
        Ok(f)
    }

    pub fn from_coeffs(lattice: &Arc<WaveLattice>, coeffs: Vec<[Complex64; C]>) -> Result<Self> {
        if coeffs.len() != lattice.len() {
            return Err(domain(format!(
                "{} coefficients for a lattice of {} modes",
                coeffs.len(),
                lattice.len()
            )));
        }
        Ok(Self {
            lattice: Arc::clone(lattice),
            coeffs,
        })
    }

    /// Build a field mode by mode.
    pub fn from_fn(lattice: &Arc<WaveLattice>, mut f: impl FnMut([i32; 3]) -> [Complex64; C]) -> Self {
        Self {
            lattice: Arc::clone(lattice),
            coeffs: lattice.modes().iter().map(|&k| f(k)).collect(),
        }
    }

    pub fn lattice(&self) -> &Arc<WaveLattice> {
        &self.lattice
    }

    pub fn coeffs(&self) -> &[[Complex64; C]] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [[Complex64; C]] {
        &mut self.coeffs
    }

    pub fn coeff(&self, k: [i32; 3]) -> Option<[Complex64; C]> {
        self.lattice.index_of(k).map(|i| self.coeffs[i])
    }

    pub fn check_same_lattice<const D: usize>(&self, other: &Field<D>) -> Result<()> {
        let (a, b) = (&self.lattice, &other.lattice);
        if a.same_as(b) {
            Ok(())
        } else {
            Err(Error::LatticeMismatch {
                left_k: a.radius(),
                left_m: a.grid_size(),
                right_k: b.radius(),
                right_m: b.grid_size(),
            })
        }
    }

    /// Spectrum of one component, in mode order.
    pub fn component(&self, c: usize) -> Vec<Complex64> {
        self.coeffs.iter().map(|v| v[c]).collect()
    }

    pub fn from_components(lattice: &Arc<WaveLattice>, comps: [&[Complex64]; C]) -> Self {
        let coeffs = (0..lattice.len())
            .map(|m| std::array::from_fn(|c| comps[c][m]))
            .collect();
        Self {
            lattice: Arc::clone(lattice),
            coeffs,
        }
    }

    /// Apply a per-mode complex multiplier `g(k, |k|^2)`.
    pub fn map_modes(&self, mut g: impl FnMut([i32; 3], f64) -> Complex64) -> Self {
        let lat = &self.lattice;
        let coeffs = self
            .coeffs
            .iter()
            .zip(lat.modes().iter().zip(lat.norm_sq()))
            .map(|(v, (&k, &n2))| {
                let s = g(k, n2);
                v.map(|z| z * s)
            })
            .collect();
        Self {
            lattice: Arc::clone(lat),
            coeffs,
        }
    }

    pub fn scale(&self, a: f64) -> Self {
        Self {
            lattice: Arc::clone(&self.lattice),
            coeffs: self.coeffs.iter().map(|v| v.map(|z| z * a)).collect(),
        }
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &Self) {
        debug_assert!(self.lattice.same_as(&other.lattice));
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            for c in 0..C {
                x[c] += y[c] * a;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs
            .iter()
            .all(|v| v.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
    }

    /// Largest `|f_{-k} - conj(f_k)|` over modes and components.
    pub fn hermitian_defect(&self) -> f64 {
        let lat = &self.lattice;
        let mut worst: f64 = 0.0;
        for (i, v) in self.coeffs.iter().enumerate() {
            let w = &self.coeffs[lat.negated(i)];
            for c in 0..C {
                worst = worst.max((w[c] - v[c].conj()).norm());
            }
        }
        worst
    }

    /// Largest coefficient modulus difference, per component.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .flat_map(|(a, b)| (0..C).map(move |c| (a[c] - b[c]).norm()))
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs
            .iter()
            .flat_map(|v| v.iter().map(|z| z.norm()))
            .fold(0.0, f64::max)
    }

    /// Multiplier `|k|^s`; the zero mode is kept only for `s = 0`.
    pub fn lambda_pow(&self, s: SobolevIndex) -> Self {
        let s = s.value();
        self.map_modes(|_, n2| {
            if s == 0.0 {
                Complex64::new(1.0, 0.0)
            } else if n2 == 0.0 {
                ZERO
            } else {
                Complex64::new(n2.powf(0.5 * s), 0.0)
            }
        })
    }

    /// `P_n`: keep modes with `|k| <= n`.
    pub fn galerkin_project(&self, n: usize) -> Result<Self> {
        if n > self.lattice.radius() {
            return Err(domain(format!(
                "Galerkin order {n} exceeds lattice radius {}",
                self.lattice.radius()
            )));
        }
        let cut = (n * n) as f64;
        Ok(self.map_modes(|_, n2| if n2 <= cut { Complex64::new(1.0, 0.0) } else { ZERO }))
    }

    /// Exact copy of this field on a lattice of radius at least as large.
    pub fn embed(&self, target: &Arc<WaveLattice>) -> Result<Self> {
        if target.radius() < self.lattice.radius() {
            return Err(domain("embedding target is smaller than the source lattice"));
        }
        let mut out = Self::zeros(target);
        for (k, v) in self.lattice.modes().iter().zip(&self.coeffs) {
            let j = target.index_of(*k).expect("ball inclusion");
            out.coeffs[j] = *v;
        }
        Ok(out)
    }

    /// Restriction to a smaller lattice (drops the modes outside it).
    pub fn restrict(&self, target: &Arc<WaveLattice>) -> Self {
        Self::from_fn(target, |k| self.coeff(k).unwrap_or([ZERO; C]))
    }

    /// `f_0` exactly.
    pub fn zeroth_mode(&self) -> [Complex64; C] {
        self.coeffs[self.lattice.zero_index()]
    }

    fn weighted_sum(&self, weight: impl Fn(f64) -> f64) -> f64 {
        let terms: Vec<f64> = self
            .coeffs
            .iter()
            .zip(self.lattice.norm_sq())
            .map(|(v, &n2)| weight(n2) * v.iter().map(|z| z.norm_sqr()).sum::<f64>())
            .collect();
        pairwise_sum(&terms)
    }

    /// `||Lambda^s f||_{L^2}` over the nonzero modes.
    pub fn sobolev_seminorm(&self, s: SobolevIndex) -> Result<f64> {
        let s = s.value();
        if s < 0.0 {
            return Err(domain(format!("seminorm index {s} must be nonnegative")));
        }
        Ok(self.seminorm(s))
    }

    /// Unchecked seminorm for internal ledgers (`s >= 0`).
    pub(crate) fn seminorm(&self, s: f64) -> f64 {
        (VOLUME * self.weighted_sum(|n2| if n2 == 0.0 { 0.0 } else { n2.powf(s) })).sqrt()
    }

    /// `||f||_{H^s} = ((2pi)^3 sum_k (1 + |k|^{2s}) |f_k|^2)^{1/2}`.
    pub fn sobolev_norm(&self, s: SobolevIndex) -> Result<f64> {
        let s = s.value();
        if s < 0.0 {
            return Err(domain(format!("norm index {s} must be nonnegative")));
        }
        Ok(self.hnorm(s))
    }

    pub(crate) fn hnorm(&self, s: f64) -> f64 {
        (VOLUME * self.weighted_sum(|n2| 1.0 + if n2 == 0.0 { 0.0 } else { n2.powf(s) })).sqrt()
    }

    /// Full `L^2` norm, mean included.
    pub fn l2_norm(&self) -> f64 {
        (VOLUME * self.weighted_sum(|_| 1.0)).sqrt()
    }

    /// `(f, g)_{L^2} = (2pi)^3 Re sum_k f_k . conj(g_k)`.
    pub fn l2_inner(&self, other: &Self) -> Result<f64> {
        self.check_same_lattice(other)?;
        let terms: Vec<f64> = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (0..C).map(|c| (a[c] * b[c].conj()).re).sum::<f64>())
            .collect();
        Ok(VOLUME * pairwise_sum(&terms))
    }

    /// Collocation values of each component.
    pub fn to_grid(&self) -> Vec<Vec<f64>> {
        let comps: Vec<Vec<Complex64>> = (0..C).map(|c| self.component(c)).collect();
        let refs: Vec<&[Complex64]> = comps.iter().map(Vec::as_slice).collect();
        self.lattice.synthesize(&refs)
    }

    /// Inverse of [`Field::to_grid`] for band-limited data; other modes are dropped.
    pub fn from_grid(lattice: &Arc<WaveLattice>, values: &[Vec<f64>]) -> Result<Self> {
        if values.len() != C || values.iter().any(|v| v.len() != lattice.grid_len()) {
            return Err(domain("grid data does not match field shape"));
        }
        let refs: Vec<&[f64]> = values.iter().map(Vec::as_slice).collect();
        let spectra = lattice.analyze(&refs);
        Ok(Self::from_components(
            lattice,
            std::array::from_fn(|c| spectra[c].as_slice()),
        ))
    }

    /// Pointwise maximum of the Euclidean modulus over the collocation grid.
    ///
    /// This is a grid supremum, a lower bound of the true supremum that converges to it
    /// under grid refinement; see [`Field::linf_norm_refined`].
    pub fn linf_norm(&self) -> f64 {
        grid_modulus_max(&self.to_grid())
    }

    /// Grid supremum on an `m^3` grid other than the lattice's own.
    pub fn linf_norm_on_grid(&self, m: usize) -> Result<f64> {
        let lat = WaveLattice::with_grid(self.lattice.radius(), m)?;
        let f = Self {
            lattice: lat,
            coeffs: self.coeffs.clone(),
        };
        Ok(f.linf_norm())
    }

    /// Field value at an arbitrary point, by direct trigonometric summation.
    pub fn eval(&self, x: [f64; 3]) -> [f64; C] {
        let mut out = [0.0; C];
        for (k, v) in self.lattice.modes().iter().zip(&self.coeffs) {
            let phase = k[0] as f64 * x[0] + k[1] as f64 * x[1] + k[2] as f64 * x[2];
            let e = Complex64::from_polar(1.0, phase);
            for c in 0..C {
                out[c] += (v[c] * e).re;
            }
        }
        out
    }

    /// Supremum of `|f(x)|`, taken from the grid maximum and polished by Newton
    /// iterations on `|f|^2` from the strongest grid local maxima.
    ///
    /// The field is a trigonometric polynomial, so this converges to its true supremum
    /// whenever the global maximizer lies in the basin of one of the examined grid
    /// maxima. The result never falls below the grid supremum.
    pub fn linf_norm_refined(&self) -> f64 {
        let grid = self.to_grid();
        let m = self.lattice.grid_size();
        let sq: Vec<f64> = (0..self.lattice.grid_len())
            .map(|p| grid.iter().map(|g| g[p] * g[p]).sum())
            .collect();
        let best = sq.iter().cloned().fold(0.0, f64::max);
        if best == 0.0 {
            return 0.0;
        }
        let mut candidates: Vec<(f64, usize)> = local_maxima(&sq, m)
            .into_iter()
            .filter(|&p| sq[p] >= 0.8 * best)
            .map(|p| (sq[p], p))
            .collect();
        candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        candidates.truncate(8);
        let h = 2.0 * PI / m as f64;
        let mut sup_sq = best;
        for &(_, p) in &candidates {
            let (i, j, l) = (p / (m * m), (p / m) % m, p % m);
            let start = [i as f64 * h, j as f64 * h, l as f64 * h];
            sup_sq = sup_sq.max(self.polish_max_sq(start, h));
        }
        sup_sq.sqrt()
    }

    /// Newton ascent of `|f|^2` starting at `x`, steps limited to one grid spacing.
    /// Returns the best value seen.
    fn polish_max_sq(&self, mut x: [f64; 3], h: f64) -> f64 {
        let mut best = self.modulus_sq_derivatives(x).0;
        for _ in 0..30 {
            let (val, grad, hess) = self.modulus_sq_derivatives(x);
            best = best.max(val);
            let step = ascent_step(&hess, &grad, h);
            let len = step.iter().map(|s| s * s).sum::<f64>().sqrt();
            let scale = if len > h { h / len } else { 1.0 };
            let next = [x[0] + step[0] * scale, x[1] + step[1] * scale, x[2] + step[2] * scale];
            let v = self.modulus_sq_derivatives(next).0;
            if v < val {
                break;
            }
            x = next;
            best = best.max(v);
            if len * scale < 1e-14 {
                break;
            }
        }
        best
    }

    /// `|f|^2` with its gradient and Hessian at `x`.
    fn modulus_sq_derivatives(&self, x: [f64; 3]) -> (f64, [f64; 3], [[f64; 3]; 3]) {
        let mut val = [0.0; C];
        let mut d1 = [[0.0; 3]; C];
        let mut d2 = [[[0.0; 3]; 3]; C];
        for (k, v) in self.lattice.modes().iter().zip(&self.coeffs) {
            let kf = [k[0] as f64, k[1] as f64, k[2] as f64];
            let phase = kf[0] * x[0] + kf[1] * x[1] + kf[2] * x[2];
            let e = Complex64::from_polar(1.0, phase);
            for c in 0..C {
                let z = v[c] * e;
                val[c] += z.re;
                // d/dx_a Re(z) = Re(i k_a z) = -k_a Im z; second derivative = -k_a k_b Re z
                for a in 0..3 {
                    d1[c][a] -= kf[a] * z.im;
                    for b in 0..3 {
                        d2[c][a][b] -= kf[a] * kf[b] * z.re;
                    }
                }
            }
        }
        let mut f = 0.0;
        let mut g = [0.0; 3];
        let mut hm = [[0.0; 3]; 3];
        for c in 0..C {
            f += val[c] * val[c];
            for a in 0..3 {
                g[a] += 2.0 * val[c] * d1[c][a];
                for b in 0..3 {
                    hm[a][b] += 2.0 * (d1[c][a] * d1[c][b] + val[c] * d2[c][a][b]);
                }
            }
        }
        (f, g, hm)
    }
}

fn grid_modulus_max(grid: &[Vec<f64>]) -> f64 {
    let n = grid.first().map_or(0, Vec::len);
    (0..n)
        .map(|p| grid.iter().map(|g| g[p] * g[p]).sum::<f64>())
        .fold(0.0, f64::max)
        .sqrt()
}

fn local_maxima(sq: &[f64], m: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let wrap = |a: usize, d: isize| ((a as isize + d).rem_euclid(m as isize)) as usize;
    for i in 0..m {
        for j in 0..m {
            for l in 0..m {
                let p = (i * m + j) * m + l;
                let v = sq[p];
                let mut is_max = true;
                'scan: for di in -1..=1 {
                    for dj in -1..=1 {
                        for dl in -1..=1 {
                            if di == 0 && dj == 0 && dl == 0 {
                                continue;
                            }
                            let q = (wrap(i, di) * m + wrap(j, dj)) * m + wrap(l, dl);
                            if sq[q] > v {
                                is_max = false;
                                break 'scan;
                            }
                        }
                    }
                }
                if is_max {
                    out.push(p);
                }
            }
        }
    }
    out
}

fn solve3(a: &[[f64; 3]; 3], b: &[f64; 3]) -> Option<[f64; 3]> {
    let det = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(a);
    if d.abs() < 1e-300 || !d.is_finite() {
        return None;
    }
    let mut x = [0.0; 3];
    for (col, xc) in x.iter_mut().enumerate() {
        let mut m = *a;
        for r in 0..3 {
            m[r][col] = b[r];
        }
        *xc = det(&m) / d;
    }
    Some(x)
}

/// Newton step for a maximum with the Hessian shifted to be negative definite
/// (a Gershgorin bound on its largest eigenvalue), falling back to gradient ascent.
fn ascent_step(hess: &[[f64; 3]; 3], grad: &[f64; 3], h: f64) -> [f64; 3] {
    let scale = hess.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
    let gersh = (0..3)
        .map(|i| hess[i][i] + (0..3).filter(|&j| j != i).map(|j| hess[i][j].abs()).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max);
    let mu = gersh.max(0.0) + 1e-10 * scale;
    let mut m = *hess;
    for (i, row) in m.iter_mut().enumerate() {
        row[i] -= mu;
    }
    match solve3(&m, grad) {
        Some(d) => d.map(|v| -v),
        None => {
            let g = grad.iter().map(|x| x * x).sum::<f64>().sqrt();
            if g == 0.0 {
                [0.0; 3]
            } else {
                grad.map(|x| x * h / g)
            }
        }
    }
}

impl FourierField {
    /// Leray projection: remove the component of each `f_k` along `k`; the zero mode
    /// passes through.
    pub fn leray_project(&self) -> Self {
        let lat = &self.lattice;
        let coeffs = self
            .coeffs
            .iter()
            .zip(lat.modes().iter().zip(lat.norm_sq()))
            .map(|(v, (k, &n2))| {
                if n2 == 0.0 {
                    return *v;
                }
                let kf = k.map(f64::from);
                let dot = v[0] * kf[0] + v[1] * kf[1] + v[2] * kf[2];
                let r = dot / n2;
                [v[0] - r * kf[0], v[1] - r * kf[1], v[2] - r * kf[2]]
            })
            .collect();
        Self {
            lattice: Arc::clone(lat),
            coeffs,
        }
    }

    /// `f = divfree + grad q + mean` with `q_0 = 0` and `divfree` mean-free.
    pub fn helmholtz_decompose(&self) -> Helmholtz {
        let lat = &self.lattice;
        let z = lat.zero_index();
        let mut divfree = self.leray_project();
        divfree.coeffs[z] = [ZERO; 3];
        let potential = ScalarField::from_fn(lat, |_| [ZERO]);
        let mut potential = potential;
        for (m, (v, (k, &n2))) in self
            .coeffs
            .iter()
            .zip(lat.modes().iter().zip(lat.norm_sq()))
            .enumerate()
        {
            if n2 == 0.0 {
                continue;
            }
            let dot = v[0] * k[0] as f64 + v[1] * k[1] as f64 + v[2] * k[2] as f64;
            potential.coeffs[m] = [-I * dot / n2];
        }
        Helmholtz {
            divfree,
            potential,
            mean: self.coeffs[z],
        }
    }

    /// Spectral divergence `i k . f_k`.
    pub fn divergence(&self) -> ScalarField {
        let lat = &self.lattice;
        let coeffs = self
            .coeffs
            .iter()
            .zip(lat.modes())
            .map(|(v, k)| [I * (v[0] * k[0] as f64 + v[1] * k[1] as f64 + v[2] * k[2] as f64)])
            .collect();
        ScalarField {
            lattice: Arc::clone(lat),
            coeffs,
        }
    }

    /// Spectral curl `i k x f_k`.
    pub fn curl(&self) -> Self {
        let lat = &self.lattice;
        let coeffs = self
            .coeffs
            .iter()
            .zip(lat.modes())
            .map(|(v, k)| {
                let k = k.map(f64::from);
                [
                    I * (v[2] * k[1] - v[1] * k[2]),
                    I * (v[0] * k[2] - v[2] * k[0]),
                    I * (v[1] * k[0] - v[0] * k[1]),
                ]
            })
            .collect();
        Self {
            lattice: Arc::clone(lat),
            coeffs,
        }
    }

    /// Largest `|k . f_k| / |k|` over nonzero modes.
    pub fn divergence_defect(&self) -> f64 {
        let lat = &self.lattice;
        self.coeffs
            .iter()
            .zip(lat.modes().iter().zip(lat.norm_sq()))
            .filter(|(_, (_, &n2))| n2 > 0.0)
            .map(|(v, (k, &n2))| {
                (v[0] * k[0] as f64 + v[1] * k[1] as f64 + v[2] * k[2] as f64).norm() / n2.sqrt()
            })
            .fold(0.0, f64::max)
    }

    pub fn from_scalars(lattice: &Arc<WaveLattice>, comps: [&ScalarField; 3]) -> Self {
        Self::from_fn(lattice, |k| {
            let i = lattice.index_of(k).unwrap();
            [comps[0].coeffs[i][0], comps[1].coeffs[i][0], comps[2].coeffs[i][0]]
        })
    }

    pub fn scalar_component(&self, c: usize) -> ScalarField {
        ScalarField {
            lattice: Arc::clone(&self.lattice),
            coeffs: self.coeffs.iter().map(|v| [v[c]]).collect(),
        }
    }
}

impl ScalarField {
    /// Spectral gradient `i k q_k`.
    pub fn gradient(&self) -> FourierField {
        let lat = &self.lattice;
        let coeffs = self
            .coeffs
            .iter()
            .zip(lat.modes())
            .map(|(v, k)| k.map(|kc| I * kc as f64 * v[0]))
            .collect();
        FourierField {
            lattice: Arc::clone(lat),
            coeffs,
        }
    }

    pub fn values(&self) -> Vec<Complex64> {
        self.component(0)
    }
}

impl<const C: usize> Add for &Field<C> {
    type Output = Field<C>;
    fn add(self, rhs: &Field<C>) -> Field<C> {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl<const C: usize> Sub for &Field<C> {
    type Output = Field<C>;
    fn sub(self, rhs: &Field<C>) -> Field<C> {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl<const C: usize> AddAssign<&Field<C>> for Field<C> {
    fn add_assign(&mut self, rhs: &Field<C>) {
        self.axpy(1.0, rhs);
    }
}

impl<const C: usize> SubAssign<&Field<C>> for Field<C> {
    fn sub_assign(&mut self, rhs: &Field<C>) {
        self.axpy(-1.0, rhs);
    }
}

impl<const C: usize> Neg for &Field<C> {
    type Output = Field<C>;
    fn neg(self) -> Field<C> {
        self.scale(-1.0)
    }
}

impl<const C: usize> Mul<&Field<C>> for f64 {
    type Output = Field<C>;
    fn mul(self, rhs: &Field<C>) -> Field<C> {
        rhs.scale(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn s(v: f64) -> SobolevIndex {
        SobolevIndex::new(v).unwrap()
    }

    /// `sin(n x) e_1`: coefficient `-i/2` at `(n,0,0)`.
    fn sin_x(lat: &Arc<WaveLattice>, n: i32) -> FourierField {
        FourierField::single_mode(lat, [n, 0, 0], [c(0.0, -0.5), c(0.0, 0.0), c(0.0, 0.0)]).unwrap()
    }

    fn constant(lat: &Arc<WaveLattice>, v: [f64; 3]) -> FourierField {
        FourierField::single_mode(lat, [0, 0, 0], v.map(|x| c(x, 0.0))).unwrap()
    }

    #[test]
    fn sobolev_index_range() {
        assert!(SobolevIndex::new(-2.0).is_ok());
        assert!(SobolevIndex::new(6.0).is_ok());
        assert!(SobolevIndex::new(6.5).is_err());
        assert!(SobolevIndex::new(-2.1).is_err());
        assert!(SobolevIndex::new(f64::NAN).is_err());
    }

    #[test]
    fn lambda_pow_scales_by_wavenumber() {
        let lat = WaveLattice::new(4).unwrap();
        let f = FourierField::single_mode(&lat, [1, 2, 2], [c(1.0, 0.5), c(0.0, 1.0), c(-1.0, 0.0)]).unwrap();
        let half = f.lambda_pow(s(0.5));
        let one = f.lambda_pow(s(1.0));
        let k = lat.index_of([1, 2, 2]).unwrap();
        for comp in 0..3 {
            assert!((half.coeffs()[k][comp] - f.coeffs()[k][comp] * 3f64.sqrt()).norm() < 1e-15);
            assert!((one.coeffs()[k][comp] - f.coeffs()[k][comp] * 3.0).norm() < 1e-15);
        }
        assert_eq!(constant(&lat, [1.0, 1.0, 1.0]).lambda_pow(s(1.0)).max_abs(), 0.0);
        let g = sin_x(&lat, 2).lambda_pow(s(1.0));
        assert!(g.max_abs_diff(&sin_x(&lat, 2).scale(2.0)) < 1e-15);
        // s = 0 keeps the mean
        let m = constant(&lat, [1.0, 2.0, 3.0]);
        assert_eq!(m.lambda_pow(s(0.0)).max_abs_diff(&m), 0.0);
    }

    #[test]
    fn leray_examples() {
        let lat = WaveLattice::new(3).unwrap();
        // grad(sin x) = (cos x, 0, 0): coefficient 1/2 at +-(1,0,0)
        let grad = FourierField::single_mode(&lat, [1, 0, 0], [c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(grad.leray_project().max_abs() < 1e-16);
        let f = FourierField::single_mode(&lat, [1, 0, 0], [c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]).unwrap();
        let p = f.leray_project();
        let k = lat.index_of([1, 0, 0]).unwrap();
        assert_eq!(p.coeffs()[k], [c(0.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]);
        // (sin y, 0, 0)
        let shear = FourierField::single_mode(&lat, [0, 1, 0], [c(0.0, -0.5), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(shear.leray_project().max_abs_diff(&shear), 0.0);
        let mean = constant(&lat, [1.0, -2.0, 0.5]);
        assert_eq!(mean.leray_project().max_abs_diff(&mean), 0.0);
    }

    #[test]
    fn helmholtz_examples() {
        let lat = WaveLattice::new(3).unwrap();
        let cosx = FourierField::single_mode(&lat, [1, 0, 0], [c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        let sinx = ScalarField::single_mode(&lat, [1, 0, 0], [c(0.0, -0.5)]).unwrap();
        let h = cosx.helmholtz_decompose();
        assert!(h.divfree.max_abs() < 1e-16);
        assert!(h.potential.max_abs_diff(&sinx) < 1e-16);
        assert_eq!(h.mean, [c(0.0, 0.0); 3]);

        let siny = FourierField::single_mode(&lat, [0, 1, 0], [c(0.0, -0.5), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        let h = siny.helmholtz_decompose();
        assert!(h.divfree.max_abs_diff(&siny) < 1e-16);
        assert!(h.potential.max_abs() < 1e-16);

        let sum = &cosx + &siny;
        let h = sum.helmholtz_decompose();
        assert!(h.divfree.max_abs_diff(&siny) < 1e-16);
        assert!(h.potential.max_abs_diff(&sinx) < 1e-16);
    }

    #[test]
    fn galerkin_examples() {
        let lat = WaveLattice::new(3).unwrap();
        let f = FourierField::single_mode(&lat, [1, 1, 0], [c(1.0, 0.0); 3]).unwrap();
        assert_eq!(f.galerkin_project(1).unwrap().max_abs(), 0.0);
        let g = FourierField::single_mode(&lat, [1, 0, 0], [c(1.0, 0.0); 3]).unwrap();
        assert_eq!(g.galerkin_project(1).unwrap().max_abs_diff(&g), 0.0);
        assert_eq!(f.galerkin_project(3).unwrap().max_abs_diff(&f), 0.0);
        assert!(f.galerkin_project(4).is_err());
    }

    #[test]
    fn seminorm_examples() {
        let lat = WaveLattice::new(3).unwrap();
        let expect = (VOLUME / 2.0).sqrt();
        let f = sin_x(&lat, 1);
        assert!((f.sobolev_seminorm(s(0.0)).unwrap() - expect).abs() < 1e-13);
        assert!((f.sobolev_seminorm(s(1.0)).unwrap() - expect).abs() < 1e-13);
        let g = sin_x(&lat, 2);
        assert!((g.sobolev_seminorm(s(0.5)).unwrap() - 2f64.sqrt() * expect).abs() < 1e-13);
        assert!(g.sobolev_seminorm(s(-0.5)).is_err());
        // full norm: (1 + |k|^{2s}) weights
        assert!((f.sobolev_norm(s(1.0)).unwrap() - (2.0 * expect * expect).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn zeroth_mode_and_inner_product() {
        let lat = WaveLattice::new(3).unwrap();
        let m = constant(&lat, [1.0, 2.0, 3.0]);
        let f = sin_x(&lat, 1);
        assert_eq!(m.zeroth_mode(), [c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]);
        assert_eq!(f.zeroth_mode(), [c(0.0, 0.0); 3]);
        assert_eq!((&m + &f).zeroth_mode(), m.zeroth_mode());
        assert!((f.l2_inner(&f).unwrap() - VOLUME / 2.0).abs() < 1e-12);
        assert_eq!(f.l2_inner(&sin_x(&lat, 2)).unwrap(), 0.0);
        let other = FourierField::zeros(&WaveLattice::new(2).unwrap());
        assert!(f.l2_inner(&other).is_err());
    }

    #[test]
    fn linf_examples() {
        let lat = WaveLattice::new(3).unwrap();
        assert!((constant(&lat, [2.0, 0.0, 0.0]).linf_norm() - 2.0).abs() < 1e-15);
        // (sin x, cos x, 0)
        let f = FourierField::single_mode(&lat, [1, 0, 0], [c(0.0, -0.5), c(0.5, 0.0), c(0.0, 0.0)]).unwrap();
        assert!((f.linf_norm() - 1.0).abs() < 1e-14);
        assert!((f.linf_norm_refined() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn refined_sup_beats_coarse_grid() {
        // sin(x) on a grid that misses x = pi/2
        let lat = WaveLattice::with_grid(3, 10).unwrap();
        let f = sin_x(&lat, 1);
        assert!(f.linf_norm() < 1.0 - 1e-3);
        assert!((f.linf_norm_refined() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn grid_round_trip_single_mode() {
        let lat = WaveLattice::new(4).unwrap();
        let f = FourierField::single_mode(&lat, [1, -2, 3], [c(0.3, -0.2), c(1.0, 0.0), c(0.0, 2.0)]).unwrap();
        let back = FourierField::from_grid(&lat, &f.to_grid()).unwrap();
        assert!(back.max_abs_diff(&f) < 1e-15);
        let zero = FourierField::zeros(&lat);
        assert_eq!(FourierField::from_grid(&lat, &zero.to_grid()).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn pointwise_evaluation_matches_grid() {
        let lat = WaveLattice::new(3).unwrap();
        let f = FourierField::single_mode(&lat, [2, -1, 1], [c(0.3, -0.2), c(1.0, 0.4), c(0.0, 2.0)]).unwrap();
        let g = f.to_grid();
        let m = lat.grid_size();
        let h = 2.0 * PI / m as f64;
        let p = (3 * m + 5) * m + 7;
        let v = f.eval([3.0 * h, 5.0 * h, 7.0 * h]);
        for comp in 0..3 {
            assert!((v[comp] - g[comp][p]).abs() < 1e-13);
        }
    }
}
