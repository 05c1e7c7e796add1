//! The truncated wave-number set and the collocation grid that carries it.
//!
//! Modes are the integer vectors `k` with Euclidean norm `|k| <= K`, stored in
//! lexicographic order on `(k1, k2, k3)`. That order is the on-disk order of
//! snapshots and the summation order of every norm, so it never changes.
//!
//! The collocation grid has `M` points per axis on `[0, 2pi)`. Products of two
//! band-limited fields carry wave numbers up to `2K` per axis; with `M >= 3K + 1`
//! their aliases land outside the retained ball, which makes "multiply on the grid,
//! keep `|k| <= K`" the exact Galerkin truncation of the product (the padded
//! form of the 2/3 rule).

use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{domain, Result};

pub type Mode = [i32; 3];

const NO_MODE: u32 = u32::MAX;

pub struct WaveLattice {
    radius: usize,
    grid: usize,
    modes: Vec<Mode>,
    norm_sq: Vec<f64>,
    negated: Vec<usize>,
    cube_index: Vec<u32>,
    grid_index: Vec<usize>,
    fft: Fft3,
}

impl fmt::Debug for WaveLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WaveLattice")
            .field("radius", &self.radius)
            .field("grid", &self.grid)
            .field("modes", &self.modes.len())
            .finish()
    }
}

/// Smallest `n >= min` whose prime factors are all in {2, 3, 5, 7}.
pub fn smooth_grid_size(min: usize) -> usize {
    let mut n = min.max(2);
    loop {
        let mut r = n;
        for p in [2, 3, 5, 7] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return n;
        }
        n += 1;
    }
}

impl WaveLattice {
    /// Lattice of radius `radius` on the default dealiasing grid (smallest 7-smooth
    /// `M >= 3K + 1`).
    pub fn new(radius: usize) -> Result<Arc<Self>> {
        Self::with_grid(radius, smooth_grid_size(3 * radius + 1))
    }

    /// Lattice on an explicit grid. `M >= 2K + 1` is enough to sample a field; the
    /// nonlinear products additionally require `M >= 3K + 1`.
    pub fn with_grid(radius: usize, grid: usize) -> Result<Arc<Self>> {
        if radius > 256 {
            return Err(domain(format!("truncation radius {radius} is too large")));
        }
        if grid < 2 * radius + 1 || grid < 2 {
            return Err(domain(format!(
                "grid size {grid} cannot represent radius {radius} (need M >= 2K+1)"
            )));
        }
        let r = radius as i32;
        let side = 2 * radius + 1;
        let mut modes = Vec::new();
        let mut cube_index = vec![NO_MODE; side * side * side];
        for k1 in -r..=r {
            for k2 in -r..=r {
                for k3 in -r..=r {
                    if k1 * k1 + k2 * k2 + k3 * k3 <= r * r {
                        let c = cube_offset(radius, [k1, k2, k3]);
                        cube_index[c] = modes.len() as u32;
                        modes.push([k1, k2, k3]);
                    }
                }
            }
        }
        let norm_sq = modes
            .iter()
            .map(|k| (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64)
            .collect();
        let negated = modes
            .iter()
            .map(|k| cube_index[cube_offset(radius, [-k[0], -k[1], -k[2]])] as usize)
            .collect();
        let wrap = |k: i32| k.rem_euclid(grid as i32) as usize;
        let grid_index = modes
            .iter()
            .map(|k| (wrap(k[0]) * grid + wrap(k[1])) * grid + wrap(k[2]))
            .collect();
        let fft = Fft3::new(radius, grid);
        Ok(Arc::new(Self {
            radius,
            grid,
            modes,
            norm_sq,
            negated,
            cube_index,
            grid_index,
            fft,
        }))
    }

    /// Truncation radius K.
    pub fn radius(&self) -> usize {
        self.radius
    }

    /// Collocation points per axis, M.
    pub fn grid_size(&self) -> usize {
        self.grid
    }

    pub fn grid_len(&self) -> usize {
        self.grid * self.grid * self.grid
    }

    /// Number of modes in the ball.
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn mode(&self, index: usize) -> Mode {
        self.modes[index]
    }

    /// `|k|^2` per mode, in mode order.
    pub fn norm_sq(&self) -> &[f64] {
        &self.norm_sq
    }

    /// Index of `-k` for the mode at `index`.
    pub fn negated(&self, index: usize) -> usize {
        self.negated[index]
    }

    pub fn index_of(&self, k: Mode) -> Option<usize> {
        let r = self.radius as i32;
        if k.iter().any(|c| c.abs() > r) {
            return None;
        }
        match self.cube_index[cube_offset(self.radius, k)] {
            NO_MODE => None,
            i => Some(i as usize),
        }
    }

    pub fn zero_index(&self) -> usize {
        self.index_of([0, 0, 0]).expect("zero mode is always present")
    }

    /// True when the grid resolves quadratic products without aliasing.
    pub fn supports_products(&self) -> bool {
        self.grid > 3 * self.radius
    }

    /// Same truncation and grid; fields on such lattices are interchangeable.
    pub fn same_as(&self, other: &WaveLattice) -> bool {
        std::ptr::eq(self, other) || (self.radius == other.radius && self.grid == other.grid)
    }

    /// Collocation values of real fields, given their spectra over the ball.
    ///
    /// Every spectrum must be Hermitian. Two spectra share one complex transform
    /// (real part / imaginary part).
    pub fn synthesize(&self, spectra: &[&[Complex64]]) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(spectra.len());
        for pair in spectra.chunks(2) {
            let mut buf = vec![Complex64::new(0.0, 0.0); self.grid_len()];
            let i = Complex64::new(0.0, 1.0);
            match pair {
                [a, b] => {
                    for (m, &g) in self.grid_index.iter().enumerate() {
                        buf[g] = a[m] + i * b[m];
                    }
                }
                [a] => {
                    for (m, &g) in self.grid_index.iter().enumerate() {
                        buf[g] = a[m];
                    }
                }
                _ => unreachable!(),
            }
            self.fft.inverse(&mut buf);
            out.push(buf.iter().map(|z| z.re).collect());
            if pair.len() == 2 {
                out.push(buf.iter().map(|z| z.im).collect());
            }
        }
        out
    }

    /// Spectra over the ball of real collocation fields. Modes outside the ball are
    /// discarded; the result is exactly Hermitian.
    pub fn analyze(&self, grids: &[&[f64]]) -> Vec<Vec<Complex64>> {
        let scale = 1.0 / self.grid_len() as f64;
        let mut out = Vec::with_capacity(grids.len());
        for pair in grids.chunks(2) {
            let mut buf: Vec<Complex64> = match pair {
                [a, b] => a
                    .iter()
                    .zip(b.iter())
                    .map(|(&x, &y)| Complex64::new(x, y))
                    .collect(),
                [a] => a.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
                _ => unreachable!(),
            };
            self.fft.forward(&mut buf);
            let mut first = Vec::with_capacity(self.len());
            let mut second = Vec::with_capacity(if pair.len() == 2 { self.len() } else { 0 });
            for (m, &g) in self.grid_index.iter().enumerate() {
                let c = buf[g];
                let cn = buf[self.grid_index[self.negated[m]]].conj();
                first.push((c + cn) * (0.5 * scale));
                if pair.len() == 2 {
                    // (c - conj(c_{-k})) / 2i
                    let d = (c - cn) * (0.5 * scale);
                    second.push(Complex64::new(d.im, -d.re));
                }
            }
            out.push(first);
            if pair.len() == 2 {
                out.push(second);
            }
        }
        out
    }
}

fn cube_offset(radius: usize, k: Mode) -> usize {
    let side = 2 * radius + 1;
    let r = radius as i32;
    (((k[0] + r) as usize * side) + (k[1] + r) as usize) * side + (k[2] + r) as usize
}

/// Three-dimensional transform on an `M^3` grid, pruned to the lines that can carry
/// data from a ball of radius K.
struct Fft3 {
    m: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// Grid indices along one axis that hold `|k_i| <= K`.
    planes: Vec<usize>,
    /// Flattened `(i, j)` offsets of the z-lines with `k1^2 + k2^2 <= K^2`.
    columns: Vec<usize>,
}

impl Fft3 {
    fn new(radius: usize, m: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(m);
        let inverse = planner.plan_fft_inverse(m);
        let r = radius as i32;
        let wrap = |k: i32| k.rem_euclid(m as i32) as usize;
        let planes = (-r..=r).map(wrap).collect();
        let mut columns = Vec::new();
        for k1 in -r..=r {
            for k2 in -r..=r {
                if k1 * k1 + k2 * k2 <= r * r {
                    columns.push(wrap(k1) * m + wrap(k2));
                }
            }
        }
        Self {
            m,
            forward,
            inverse,
            planes,
            columns,
        }
    }

    fn scratch(&self, fft: &Arc<dyn Fft<f64>>) -> Vec<Complex64> {
        vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()]
    }

    /// Spectrum (nonzero only inside the ball) to grid values, unnormalized.
    fn inverse(&self, buf: &mut [Complex64]) {
        let m = self.m;
        let fft = &self.inverse;
        let mut scratch = self.scratch(fft);
        for &c in &self.columns {
            fft.process_with_scratch(&mut buf[c * m..(c + 1) * m], &mut scratch);
        }
        let mut tmp = vec![Complex64::new(0.0, 0.0); m * m];
        for &i in &self.planes {
            let plane = &mut buf[i * m * m..(i + 1) * m * m];
            transpose(plane, &mut tmp, m);
            fft.process_with_scratch(&mut tmp, &mut scratch);
            transpose(&tmp, plane, m);
        }
        self.x_pass(buf, &mut tmp, fft, &mut scratch);
    }

    /// Grid values to spectrum; only lines feeding the ball are finished.
    fn forward(&self, buf: &mut [Complex64]) {
        let m = self.m;
        let fft = &self.forward;
        let mut scratch = self.scratch(fft);
        let mut tmp = vec![Complex64::new(0.0, 0.0); m * m];
        self.x_pass(buf, &mut tmp, fft, &mut scratch);
        for &i in &self.planes {
            let plane = &mut buf[i * m * m..(i + 1) * m * m];
            transpose(plane, &mut tmp, m);
            fft.process_with_scratch(&mut tmp, &mut scratch);
            transpose(&tmp, plane, m);
        }
        for &c in &self.columns {
            fft.process_with_scratch(&mut buf[c * m..(c + 1) * m], &mut scratch);
        }
    }

    fn x_pass(
        &self,
        buf: &mut [Complex64],
        tmp: &mut [Complex64],
        fft: &Arc<dyn Fft<f64>>,
        scratch: &mut [Complex64],
    ) {
        let m = self.m;
        for j in 0..m {
            for i in 0..m {
                let row = &buf[(i * m + j) * m..(i * m + j + 1) * m];
                for (l, &v) in row.iter().enumerate() {
                    tmp[l * m + i] = v;
                }
            }
            fft.process_with_scratch(tmp, scratch);
            for i in 0..m {
                let row = &mut buf[(i * m + j) * m..(i * m + j + 1) * m];
                for (l, v) in row.iter_mut().enumerate() {
                    *v = tmp[l * m + i];
                }
            }
        }
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], m: usize) {
    for r in 0..m {
        for c in 0..m {
            dst[c * m + r] = src[r * m + c];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_set_is_symmetric_and_ordered() {
        let lat = WaveLattice::new(4).unwrap();
        for (i, k) in lat.modes().iter().enumerate() {
            let n = lat.negated(i);
            assert_eq!(lat.mode(n), [-k[0], -k[1], -k[2]]);
        }
        assert!(lat.modes().windows(2).all(|w| w[0] < w[1]));
        assert_eq!(lat.mode(lat.zero_index()), [0, 0, 0]);
        assert!(lat.index_of([1, 1, 4]).is_none());
        assert!(lat.index_of([0, 0, 4]).is_some());
    }

    #[test]
    fn default_grid_dealiases() {
        for k in [1, 4, 8, 12, 16] {
            let lat = WaveLattice::new(k).unwrap();
            assert!(lat.supports_products());
        }
        assert_eq!(WaveLattice::new(16).unwrap().grid_size(), 49);
        assert_eq!(WaveLattice::new(4).unwrap().grid_size(), 14);
    }

    #[test]
    fn rejects_undersized_grid() {
        assert!(WaveLattice::with_grid(4, 8).is_err());
        assert!(!WaveLattice::with_grid(4, 9).unwrap().supports_products());
    }

    #[test]
    fn ball_mode_count() {
        // Lattice points in the closed ball of radius 2.
        assert_eq!(WaveLattice::new(2).unwrap().len(), 33);
        assert_eq!(WaveLattice::new(1).unwrap().len(), 7);
    }
}
