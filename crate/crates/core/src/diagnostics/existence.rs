//! Existence-time evaluators on sampled data.
//!
//! Sampled functions are read as piecewise linear in time. Threshold times are the first
//! crossing of the linear interpolant, so data that is itself linear gives exact answers.

use crate::error::{domain, Result};

use super::{cumulative_trapezoid, DiagnosticsLedger};

/// Outcome of the existence-time lemma on one data set.
#[derive(Clone, Debug, PartialEq)]
pub struct LemmaOutcome {
    /// `T = min(T', T0)`.
    pub time: f64,
    /// `2 C(T) - (sup_{[0,T]} f + int_0^T g)`.
    pub margin: f64,
    pub verified: bool,
    /// Whether the supplied trajectory extends to `T`.
    pub covered: bool,
    /// Whether `A(0) = 0` and `B(0) C(0) = 0` hold to 1e-12; without them `T` may be 0.
    pub regular_start: bool,
}

const MONOTONE_TOL: f64 = 1e-12;

fn check_samples(name: &str, t: &[f64], y: &[f64], monotone: bool) -> Result<()> {
    if y.len() != t.len() {
        return Err(domain(format!("{name} has {} samples for {} times", y.len(), t.len())));
    }
    if y.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(domain(format!("{name} must be finite and nonnegative")));
    }
    if monotone && y.windows(2).any(|w| w[1] < w[0] - MONOTONE_TOL * w[0].abs().max(1.0)) {
        return Err(domain(format!("{name} must be nondecreasing")));
    }
    Ok(())
}

/// First time at which the interpolant of `phi` reaches `level`, or the last time.
fn first_crossing(t: &[f64], phi: &[f64], level: f64) -> f64 {
    for i in 0..t.len() {
        if !(phi[i] < level) {
            if i == 0 || phi[i] == level {
                return t[i];
            }
            let (a, b) = (phi[i - 1], phi[i]);
            let theta = (level - a) / (b - a);
            return t[i - 1] + theta * (t[i] - t[i - 1]);
        }
    }
    *t.last().unwrap()
}

fn interpolate(t: &[f64], y: &[f64], at: f64) -> f64 {
    let j = t.partition_point(|&s| s <= at);
    if j == 0 {
        return y[0];
    }
    if j == t.len() {
        return y[t.len() - 1];
    }
    let theta = (at - t[j - 1]) / (t[j] - t[j - 1]);
    y[j - 1] + theta * (y[j] - y[j - 1])
}

/// Evaluate the lemma: `T' = sup{t : A + 2BC < 1/2}`, `T = min(T', T0)`, then check
/// `sup_{[0,T]} f + int_0^T g <= 2 C(T)` on the supplied trajectory.
///
/// `times` is the grid of `A, B, C` on `[0, T0]`; `f` and `g` are sampled on a prefix
/// of it (a trajectory may stop early at its blow-up time). The threshold sample itself
/// is excluded from the sup: the check uses the samples strictly before `T` plus the
/// interpolated value at `T`.
pub fn existence_time_lemma(
    times: &[f64],
    a: &[f64],
    b: &[f64],
    c: &[f64],
    f: &[f64],
    g: &[f64],
) -> Result<LemmaOutcome> {
    if times.len() < 2 || times.windows(2).any(|w| !(w[1] > w[0])) || times[0] != 0.0 {
        return Err(domain("times must start at 0 and increase strictly"));
    }
    for (name, y) in [("A", a), ("B", b), ("C", c)] {
        check_samples(name, times, y, true)?;
    }
    let regular_start = a[0].abs() <= 1e-12 && (b[0] * c[0]).abs() <= 1e-12;
    let n = f.len();
    if n == 0 || n > times.len() || g.len() != n {
        return Err(domain("f and g must share a nonempty prefix of the time grid"));
    }
    check_samples("f", &times[..n], f, false)?;
    check_samples("g", &times[..n], g, false)?;

    let phi: Vec<f64> = (0..times.len()).map(|i| a[i] + 2.0 * b[i] * c[i]).collect();
    let t_big = first_crossing(times, &phi, 0.5);
    let tf = &times[..n];
    let covered = t_big <= tf[n - 1];
    let t_eval = t_big.min(tf[n - 1]);

    let gi = cumulative_trapezoid(tf, g);
    let mut sup_f = interpolate(tf, f, t_eval);
    for i in 0..n {
        if tf[i] < t_eval {
            sup_f = sup_f.max(f[i]);
        }
    }
    let int_g = interpolate(tf, &gi, t_eval);
    let margin = 2.0 * interpolate(times, c, t_big) - (sup_f + int_g);
    Ok(LemmaOutcome {
        time: t_big,
        margin,
        verified: margin >= 0.0,
        covered,
        regular_start,
    })
}

/// `T' = 1/2 sup{t : c int(||u||_{H^1}^4 + ||u||_{3/2}^2) + c t int ||u||_{3/2}^2 int ||u||_{1/2}^2 < 1/2}`
/// from the ledger of a velocity trajectory, trapezoidal in time.
pub fn fixed_u_existence_time(u_ledger: &DiagnosticsLedger, c: f64) -> Result<f64> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(domain(format!("constant {c} must be positive")));
    }
    let t = u_ledger.times();
    if t.is_empty() {
        return Err(domain("empty velocity ledger"));
    }
    if t.len() == 1 {
        return Ok(0.5 * t[0]);
    }
    let rows = u_ledger.rows();
    let i1 = cumulative_trapezoid(&t, &rows.iter().map(|r| r.hnorm1.powi(4) + r.h_3half.powi(2)).collect::<Vec<_>>());
    let i2 = cumulative_trapezoid(&t, &rows.iter().map(|r| r.h_3half.powi(2)).collect::<Vec<_>>());
    let i3 = cumulative_trapezoid(&t, &rows.iter().map(|r| r.h_half.powi(2)).collect::<Vec<_>>());
    let phi: Vec<f64> = (0..t.len()).map(|i| c * i1[i] + c * t[i] * i2[i] * i3[i]).collect();
    Ok(0.5 * first_crossing(&t, &phi, 0.5))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(t0: f64, n: usize) -> Vec<f64> {
        (0..=n).map(|i| t0 * i as f64 / n as f64).collect()
    }

    #[test]
    fn closed_form_thresholds() {
        let t = grid(2.0, 200);
        let z = vec![0.0; t.len()];
        let half = vec![0.5; t.len()];
        let tenth = vec![0.1; t.len()];
        let out = existence_time_lemma(&t, &z, &half, &z, &z, &z).unwrap();
        assert_eq!(out.time, 2.0);
        let lin: Vec<f64> = t.clone();
        let one = vec![1.0; t.len()];
        let out = existence_time_lemma(&t, &lin, &z, &one, &z, &z).unwrap();
        assert_eq!(out.time, 0.5);
        assert!(out.verified);
        let out = existence_time_lemma(&t, &z, &half, &tenth, &z, &z).unwrap();
        assert_eq!(out.time, 2.0);
        assert!(out.verified && !out.regular_start);
    }

    #[test]
    fn rejects_bad_inputs() {
        let t = grid(1.0, 4);
        let z = vec![0.0; 5];
        let down = vec![0.0, 0.2, 0.1, 0.3, 0.4];
        assert!(existence_time_lemma(&t, &down, &z, &z, &z, &z).is_err());
        let neg = vec![0.0, -1.0, 0.0, 0.0, 0.0];
        assert!(existence_time_lemma(&t, &z, &z, &z, &z, &neg).is_err());
    }
}
