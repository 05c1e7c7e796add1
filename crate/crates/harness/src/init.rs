use std::fs::File;
use std::io::BufReader;
use std::sync::Arc;

use magflow_core::snapshot::read_snapshot;
use magflow_core::{Complex64, FourierField, WaveLattice, VOLUME};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::config::InitSpec;
use crate::error::{invalid, io_at, Result};

/// The generator behind every random draw of the harness.
pub type HarnessRng = ChaCha8Rng;

pub fn harness_rng(seed: u64) -> HarnessRng {
    ChaCha8Rng::seed_from_u64(seed)
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn taylor_green(lat: &Arc<WaveLattice>) -> Result<FourierField> {
    if lat.radius() < 2 {
        return Err(invalid("taylor_green needs K >= 2 (modes at |k| = sqrt 3)"));
    }
    // sin x cos y cos z has coefficient -i a / 8 at k = (a, b, c), a, b, c = +-1
    Ok(FourierField::from_fn(lat, |k| {
        if k.iter().all(|x| x.abs() == 1) {
            [Complex64::new(0.0, -f64::from(k[0]) / 8.0), Complex64::new(0.0, f64::from(k[1]) / 8.0), ZERO]
        } else {
            [ZERO; 3]
        }
    }))
}

fn abc(lat: &Arc<WaveLattice>, a: f64, b: f64, c: f64) -> FourierField {
    let sin = |s: i32, amp: f64| Complex64::new(0.0, -0.5 * amp * f64::from(s));
    let cos = |amp: f64| Complex64::new(0.5 * amp, 0.0);
    FourierField::from_fn(lat, |k| match k {
        [0, 0, s] if s.abs() == 1 => [sin(s, a), cos(a), ZERO],
        [0, s, 0] if s.abs() == 1 => [cos(c), ZERO, sin(s, c)],
        [s, 0, 0] if s.abs() == 1 => [ZERO, sin(s, b), cos(b)],
        _ => [ZERO; 3],
    })
}

fn gauss(rng: &mut HarnessRng) -> Complex64 {
    Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

fn rms(f: &FourierField) -> f64 {
    f.l2_norm() / VOLUME.sqrt()
}

fn normalized(f: FourierField, amp: f64, what: &str) -> Result<FourierField> {
    if amp == 0.0 {
        return Ok(f.scale(0.0));
    }
    let r = rms(&f);
    if r == 0.0 {
        return Err(invalid(format!("{what} part of the band is empty")));
    }
    Ok(f.scale(amp / r))
}

/// Mean-free field with independent solenoidal and gradient parts; each part is
/// rescaled to the requested root-mean-square value over the torus.
pub fn random_bandlimited(
    lat: &Arc<WaveLattice>,
    rng: &mut HarnessRng,
    band: (f64, f64),
    slope: f64,
    divfree_amp: f64,
    gradient_amp: f64,
) -> Result<FourierField> {
    let (k_min, k_max) = band;
    if !(k_min >= 0.0 && k_min <= k_max && slope.is_finite()) {
        return Err(invalid(format!("bad band [{k_min}, {k_max}] or slope {slope}")));
    }
    if !(divfree_amp >= 0.0 && gradient_amp >= 0.0) {
        return Err(invalid("amplitudes must be nonnegative"));
    }
    let mut sol = FourierField::zeros(lat);
    let mut grad = FourierField::zeros(lat);
    for i in 0..lat.len() {
        let j = lat.negated(i);
        let n2 = lat.norm_sq()[i];
        let n = n2.sqrt();
        if j <= i || n2 == 0.0 || n < k_min || n > k_max {
            continue;
        }
        let k = lat.mode(i).map(f64::from);
        let weight = n.powf(-slope);
        let g = [gauss(rng), gauss(rng), gauss(rng)];
        let kg = (k[0] * g[0] + k[1] * g[1] + k[2] * g[2]) / n2;
        let phi = gauss(rng);
        for c in 0..3 {
            let s = (g[c] - kg * k[c]) * weight;
            // i k phi / |k| so both parts share the |k|^-slope profile
            let q = Complex64::new(0.0, k[c] / n) * phi * weight;
            sol.coeffs_mut()[i][c] = s;
            sol.coeffs_mut()[j][c] = s.conj();
            grad.coeffs_mut()[i][c] = q;
            grad.coeffs_mut()[j][c] = q.conj();
        }
    }
    Ok(&normalized(sol, divfree_amp, "solenoidal")? + &normalized(grad, gradient_amp, "gradient")?)
}

/// Initial datum on `lat`. `seed` is used by random data without their own seed.
pub fn make_initial(spec: &InitSpec, lat: &Arc<WaveLattice>, seed: u64) -> Result<FourierField> {
    match spec {
        InitSpec::TaylorGreen => taylor_green(lat),
        InitSpec::Abc { a, b, c } => Ok(abc(lat, *a, *b, *c)),
        InitSpec::RandomBandlimited {
            k_min,
            k_max,
            slope,
            divfree_amp,
            gradient_amp,
            seed: own,
        } => {
            let mut rng = harness_rng(own.unwrap_or(seed));
            random_bandlimited(lat, &mut rng, (*k_min, *k_max), *slope, *divfree_amp, *gradient_amp)
        }
        InitSpec::Snapshot(path) => {
            let file = File::open(path).map_err(io_at(path))?;
            Ok(read_snapshot(&mut BufReader::new(file), Some(lat))?.1)
        }
    }
}
