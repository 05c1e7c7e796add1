use std::fmt;

use crate::dynamics::SystemTag;
use crate::field::VOLUME;

use super::DiagnosticsLedger;

/// Default absolute slack for sup-norm comparisons on resolved smooth runs.
pub const DEFAULT_SUP_SLACK: f64 = 1e-8;

/// Absolute drift allowed for a conserved zeroth mode.
pub const MOMENTUM_TOL: f64 = 1e-13;

/// Per-time margins `bound - observed` of one check.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvelopeReport {
    pub name: String,
    pub times: Vec<f64>,
    pub margins: Vec<f64>,
    pub first_violation: Option<f64>,
    pub params: Vec<(String, f64)>,
    /// Whether the check is asserted for this system or only monitored.
    pub asserted: bool,
}

impl EnvelopeReport {
    pub fn new(name: impl Into<String>, times: Vec<f64>, margins: Vec<f64>, asserted: bool) -> Self {
        let first_violation = times
            .iter()
            .zip(&margins)
            .find(|(_, m)| !(**m >= 0.0))
            .map(|(t, _)| *t);
        Self {
            name: name.into(),
            times,
            margins,
            first_violation,
            params: Vec::new(),
            asserted,
        }
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.params.push((name.to_string(), value));
        self
    }

    /// True when no margin is negative (monitor-only reports pass by definition).
    pub fn passed(&self) -> bool {
        !self.asserted || self.first_violation.is_none()
    }

    pub fn holds(&self) -> bool {
        self.first_violation.is_none()
    }

    /// `(time, margin)` of the smallest margin.
    pub fn worst(&self) -> Option<(f64, f64)> {
        self.times
            .iter()
            .zip(&self.margins)
            .map(|(&t, &m)| (t, m))
            .reduce(|a, b| if b.1 < a.1 || b.1.is_nan() { b } else { a })
    }

    /// CSV row `name,t_worst,margin,pass`.
    pub fn csv_row(&self) -> String {
        let (t, m) = self.worst().unwrap_or((f64::NAN, f64::NAN));
        format!("{},{:e},{:e},{}", self.name, t, m, self.passed())
    }

    pub const CSV_HEADER: &'static str = "check,t_worst,margin,pass";
}

impl fmt::Display for EnvelopeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = match (self.asserted, self.holds()) {
            (false, _) => "MONITOR",
            (true, true) => "PASS",
            (true, false) => "FAIL",
        };
        match self.worst() {
            Some((t, m)) => write!(f, "{status} {}: worst margin {m:e} at t={t:e}", self.name)?,
            None => write!(f, "{status} {}: no samples", self.name)?,
        }
        for (k, v) in &self.params {
            write!(f, " {k}={v:e}")?;
        }
        Ok(())
    }
}

/// `margin(t) = ||w(0)||_inf + slack - ||w(t)||_inf`. Asserted for the simplified system only.
pub fn max_principle_check(ledger: &DiagnosticsLedger, tag: SystemTag, slack: f64) -> EnvelopeReport {
    let rows = ledger.rows();
    let l0 = rows.first().map_or(0.0, |r| r.linf);
    let margins = rows.iter().map(|r| l0 + slack - r.linf).collect();
    EnvelopeReport::new("max_principle", ledger.times(), margins, tag == SystemTag::Simplified)
        .with_param("slack", slack)
}

/// Sup norm nonincreasing: `margin(t_i) = min_{j <= i} ||w(t_j)||_inf + slack - ||w(t_i)||_inf`.
pub fn sup_monotone_check(ledger: &DiagnosticsLedger, tag: SystemTag, slack: f64) -> EnvelopeReport {
    let mut running = f64::INFINITY;
    let margins = ledger
        .rows()
        .iter()
        .map(|r| {
            let m = running.min(r.linf) + slack - r.linf;
            running = running.min(r.linf);
            m
        })
        .collect();
    EnvelopeReport::new("sup_monotone", ledger.times(), margins, tag == SystemTag::Simplified)
        .with_param("slack", slack)
}

/// Zeroth-mode law of each system.
///
/// `nse`, `simplified`: `|w_0(t) - w_0(0)| <= 1e-13`. `linear_fixed_u`:
/// `|w_0(t)| <= |w_0(0)| + 2 int_0^t ||w||_{1/2} ||u||_{1/2} / (2pi)^3 + slack`, the
/// `(2pi)^3` converting the ledger norms back to coefficient sums. Other systems are
/// monitored with the drift as (negated) margin.
pub fn momentum_check(ledger: &DiagnosticsLedger, tag: SystemTag, slack: f64) -> EnvelopeReport {
    let rows = ledger.rows();
    let Some(first) = rows.first() else {
        return EnvelopeReport::new("momentum", vec![], vec![], false);
    };
    let drift = |r: &super::LedgerRow| {
        (0..3)
            .map(|c| (r.mom[c] - first.mom[c]).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    match tag {
        SystemTag::Nse | SystemTag::Simplified => {
            let margins = rows.iter().map(|r| MOMENTUM_TOL - drift(r)).collect();
            EnvelopeReport::new("momentum", ledger.times(), margins, true).with_param("tol", MOMENTUM_TOL)
        }
        SystemTag::LinearFixedU => {
            let m0 = first.momentum_norm();
            let margins = rows
                .iter()
                .map(|r| match r.cum_cross {
                    Some(c) => m0 + 2.0 * c / VOLUME + slack - r.momentum_norm(),
                    None => f64::NAN,
                })
                .collect();
            EnvelopeReport::new("momentum_bound", ledger.times(), margins, true).with_param("slack", slack)
        }
        _ => {
            let margins = rows.iter().map(|r| -drift(r)).collect();
            EnvelopeReport::new("momentum_drift", ledger.times(), margins, false)
        }
    }
}
