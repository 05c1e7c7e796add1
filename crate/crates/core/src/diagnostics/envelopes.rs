//! Closed-form `H^1` envelopes of the simplified system and their calibration.

use crate::error::{domain, Result};

use super::{DiagnosticsLedger, EnvelopeReport};

fn check_c(c: f64) -> Result<()> {
    if c > 0.0 && c.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("envelope constant {c} must be positive")))
    }
}

/// `h0^2 / sqrt(1 - 2 c t h0^4)`, infinite once `t >= 1 / (2 c h0^4)`.
pub fn h1_blowup_envelope(h1_0: f64, c: f64, t: f64) -> Result<f64> {
    check_c(c)?;
    let h2 = h1_0 * h1_0;
    if h2 == 0.0 {
        return Ok(0.0);
    }
    let d = 1.0 - 2.0 * c * t * h2 * h2;
    Ok(if d <= 0.0 { f64::INFINITY } else { h2 / d.sqrt() })
}

/// `h0^2 exp(c t L^2)` with `L` the initial sup norm.
pub fn h1_growth_envelope(h1_0: f64, linf_0: f64, c: f64, t: f64) -> Result<f64> {
    check_c(c)?;
    Ok(h1_0 * h1_0 * (c * t * linf_0 * linf_0).exp())
}

/// The observables of one run that the envelopes bound.
#[derive(Clone, Debug)]
pub struct EnvelopeSample {
    pub h1_0: f64,
    pub linf_0: f64,
    pub times: Vec<f64>,
    /// `||w(t)||_1^2`.
    pub h1_sq: Vec<f64>,
}

impl EnvelopeSample {
    pub fn from_ledger(ledger: &DiagnosticsLedger) -> Self {
        let rows = ledger.rows();
        let (h1_0, linf_0) = rows.first().map_or((0.0, 0.0), |r| (r.h1, r.linf));
        Self {
            h1_0,
            linf_0,
            times: ledger.times(),
            h1_sq: rows.iter().map(|r| r.h1 * r.h1).collect(),
        }
    }

    fn growth_points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let h2 = self.h1_0 * self.h1_0;
        self.times
            .iter()
            .zip(&self.h1_sq)
            .filter(move |&(&t, &y)| t > 0.0 && y > h2)
            .map(|(&t, &y)| (t, y))
    }
}

/// Raise a closed-form `c` until the envelope as evaluated covers the sample; for
/// small growth `1 - (h0^2/y)^2` cancels and the raw value can fall short.
fn covering(c: f64, holds: impl Fn(f64) -> bool) -> f64 {
    let mut c = c.max(f64::MIN_POSITIVE);
    let mut step = 4.0 * f64::EPSILON;
    while !holds(c) && c.is_finite() {
        c *= 1.0 + step;
        step *= 2.0;
    }
    c
}

/// Smallest `c` keeping [`h1_blowup_envelope`] above every sample of every run.
///
/// Each sample with `y = ||w(t)||_1^2 > h0^2` needs `c >= (1 - (h0^2/y)^2) / (2 t h0^4)`.
/// Returns 0 when no sample exceeds its initial value (every `c > 0` then works).
pub fn calibrate_blowup_constant(runs: &[EnvelopeSample]) -> f64 {
    runs.iter()
        .flat_map(|r| {
            let h4 = r.h1_0.powi(4);
            r.growth_points().map(move |(t, y)| {
                let ratio = r.h1_0 * r.h1_0 / y;
                let c = (1.0 - ratio * ratio) / (2.0 * t * h4);
                covering(c, |c| h1_blowup_envelope(r.h1_0, c, t).is_ok_and(|e| e >= y))
            })
        })
        .fold(0.0, f64::max)
}

/// Smallest `c` keeping [`h1_growth_envelope`] above every sample of every run.
pub fn calibrate_growth_constant(runs: &[EnvelopeSample]) -> f64 {
    runs.iter()
        .flat_map(|r| {
            let l2 = r.linf_0 * r.linf_0;
            r.growth_points()
                .map(move |(t, y)| {
                    if l2 > 0.0 {
                        let c = (y / (r.h1_0 * r.h1_0)).ln() / (t * l2);
                        covering(c, |c| h1_growth_envelope(r.h1_0, r.linf_0, c, t).is_ok_and(|e| e >= y))
                    } else {
                        f64::INFINITY
                    }
                })
        })
        .fold(0.0, f64::max)
}

pub fn blowup_report(sample: &EnvelopeSample, c: f64) -> Result<EnvelopeReport> {
    let margins = sample
        .times
        .iter()
        .zip(&sample.h1_sq)
        .map(|(&t, &y)| h1_blowup_envelope(sample.h1_0, c, t).map(|e| e - y))
        .collect::<Result<Vec<_>>>()?;
    Ok(EnvelopeReport::new("h1_blowup_envelope", sample.times.clone(), margins, true).with_param("c", c))
}

pub fn growth_report(sample: &EnvelopeSample, c: f64) -> Result<EnvelopeReport> {
    let margins = sample
        .times
        .iter()
        .zip(&sample.h1_sq)
        .map(|(&t, &y)| h1_growth_envelope(sample.h1_0, sample.linf_0, c, t).map(|e| e - y))
        .collect::<Result<Vec<_>>>()?;
    Ok(EnvelopeReport::new("h1_growth_envelope", sample.times.clone(), margins, true).with_param("c", c))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        assert_eq!(h1_blowup_envelope(1.5, 0.3, 0.0).unwrap(), 2.25);
        assert_eq!(h1_blowup_envelope(0.0, 0.3, 10.0).unwrap(), 0.0);
        assert!(h1_blowup_envelope(1.0, 0.5, 1.0).unwrap().is_infinite());
        assert!(h1_blowup_envelope(1.0, 0.0, 1.0).is_err());
        assert_eq!(h1_growth_envelope(2.0, 3.0, 1.0, 0.0).unwrap(), 4.0);
        assert_eq!(h1_growth_envelope(2.0, 0.0, 1.0, 7.0).unwrap(), 4.0);
        assert!(h1_growth_envelope(2.0, 0.0, -1.0, 7.0).is_err());
    }

    #[test]
    fn calibrated_constant_is_tight() {
        let s = EnvelopeSample {
            h1_0: 1.0,
            linf_0: 2.0,
            times: vec![0.0, 0.1, 0.2],
            h1_sq: vec![1.0, 1.2, 1.1],
        };
        let c = calibrate_blowup_constant(std::slice::from_ref(&s));
        let r = blowup_report(&s, c).unwrap();
        assert!(r.holds());
        assert!(r.worst().unwrap().1.abs() < 1e-12);
        assert!(!blowup_report(&s, 0.9 * c).unwrap().holds());
        let g = calibrate_growth_constant(std::slice::from_ref(&s));
        assert!(growth_report(&s, g).unwrap().worst().unwrap().1.abs() < 1e-12);
    }
}
