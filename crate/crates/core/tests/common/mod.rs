#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::Arc;

use magflow_core::{Complex64, FourierField, ScalarField, WaveLattice};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gauss(r: &mut ChaCha8Rng) -> f64 {
    // Box-Muller
    let u: f64 = r.gen_range(f64::EPSILON..1.0);
    let v: f64 = r.gen();
    (-2.0 * u.ln()).sqrt() * (2.0 * PI * v).cos()
}

/// Real-valued random field with `|f_k| ~ amp (1 + |k|)^{-decay}` and a real mean.
pub fn random_field(lat: &Arc<WaveLattice>, r: &mut ChaCha8Rng, amp: f64, decay: f64) -> FourierField {
    let mut f = FourierField::zeros(lat);
    for i in 0..lat.len() {
        let j = lat.negated(i);
        if j < i {
            continue;
        }
        let n = lat.norm_sq()[i].sqrt();
        let a = amp * (1.0 + n).powf(-decay);
        let v: [Complex64; 3] = std::array::from_fn(|_| {
            if i == j {
                Complex64::new(a * gauss(r), 0.0)
            } else {
                Complex64::new(a * gauss(r), a * gauss(r))
            }
        });
        f.coeffs_mut()[i] = v;
        f.coeffs_mut()[j] = v.map(|z| z.conj());
    }
    f
}

pub fn random_mean_free(lat: &Arc<WaveLattice>, r: &mut ChaCha8Rng, amp: f64, decay: f64) -> FourierField {
    let mut f = random_field(lat, r, amp, decay);
    let z = lat.zero_index();
    f.coeffs_mut()[z] = [Complex64::new(0.0, 0.0); 3];
    f
}

pub fn random_scalar(lat: &Arc<WaveLattice>, r: &mut ChaCha8Rng, amp: f64, decay: f64) -> ScalarField {
    random_mean_free(lat, r, amp, decay).scalar_component(0)
}

/// `(sin x cos y cos z, -cos x sin y cos z, 0)` sampled on the lattice grid and analyzed.
pub fn taylor_green(lat: &Arc<WaveLattice>) -> FourierField {
    from_point_fn(lat, |x, y, z| [x.sin() * y.cos() * z.cos(), -x.cos() * y.sin() * z.cos(), 0.0])
}

pub fn from_point_fn(lat: &Arc<WaveLattice>, f: impl Fn(f64, f64, f64) -> [f64; 3]) -> FourierField {
    let m = lat.grid_size();
    let h = 2.0 * PI / m as f64;
    let mut g = vec![vec![0.0; m * m * m]; 3];
    for i in 0..m {
        for j in 0..m {
            for l in 0..m {
                let v = f(i as f64 * h, j as f64 * h, l as f64 * h);
                for c in 0..3 {
                    g[c][(i * m + j) * m + l] = v[c];
                }
            }
        }
    }
    FourierField::from_grid(lat, &g).unwrap()
}
