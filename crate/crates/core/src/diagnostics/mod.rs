//! Norm ledgers and the pass/fail renditions of the analytic bounds.

mod checks;
mod envelopes;
mod existence;

pub use checks::{max_principle_check, momentum_check, sup_monotone_check, EnvelopeReport, DEFAULT_SUP_SLACK, MOMENTUM_TOL};
pub use envelopes::{
    calibrate_blowup_constant, calibrate_growth_constant, h1_blowup_envelope, h1_growth_envelope, blowup_report,
    growth_report, EnvelopeSample,
};
pub use existence::{existence_time_lemma, fixed_u_existence_time, LemmaOutcome};

use crate::error::{domain, Result};
use crate::field::FourierField;

/// How the sup norm column is measured.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SupNorm {
    /// Maximum over the collocation grid (a lower bound of the true sup).
    #[default]
    Grid,
    /// Grid maximum polished by Newton ascent on `|w|^2`.
    Refined,
}

#[derive(Clone, Debug, Default)]
pub struct LedgerOptions {
    pub sup: SupNorm,
    /// Extra seminorm orders logged for inspection (e.g. `2.5, 3, ..., 6`).
    pub higher_orders: Vec<f64>,
}

impl LedgerOptions {
    pub fn refined_sup(mut self) -> Self {
        self.sup = SupNorm::Refined;
        self
    }

    /// Log seminorms of orders `2.5, 3, ..., 6`.
    pub fn with_higher_norms(mut self) -> Self {
        self.higher_orders = (5..=12).map(|i| f64::from(i) * 0.5).collect();
        self
    }
}

/// One ledger sample. Norm names follow the seminorm convention `||w||_s = ||Lambda^s w||`.
#[derive(Clone, Debug, PartialEq)]
pub struct LedgerRow {
    pub t: f64,
    pub l2: f64,
    pub h_half: f64,
    pub h1: f64,
    pub h_3half: f64,
    pub h2: f64,
    /// Full `H^{1/2}` norm, mean included.
    pub hnorm_half: f64,
    /// Full `H^1` norm, mean included.
    pub hnorm1: f64,
    pub linf: f64,
    /// Real part of the zeroth coefficient.
    pub mom: [f64; 3],
    /// Trapezoidal `int_0^t ||w||_{3/2}^2`.
    pub cum_h32sq: f64,
    /// `||u||_{1/2}` of the prescribed velocity, when there is one.
    pub u_half: Option<f64>,
    /// Trapezoidal `int_0^t ||w||_{1/2} ||u||_{1/2}`, when there is a velocity.
    pub cum_cross: Option<f64>,
    /// Equivalence residual `||Pw - u||_{H^{1/2}}`, filled in by comparison routes.
    pub resid_half: Option<f64>,
    /// Seminorms at [`LedgerOptions::higher_orders`].
    pub higher: Vec<f64>,
}

impl LedgerRow {
    pub fn momentum_norm(&self) -> f64 {
        self.mom.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        [
            self.t,
            self.l2,
            self.h_half,
            self.h1,
            self.h_3half,
            self.h2,
            self.hnorm_half,
            self.hnorm1,
            self.linf,
            self.cum_h32sq,
        ]
        .iter()
        .chain(&self.mom)
        .chain(&self.higher)
        .chain(self.u_half.iter())
        .chain(self.cum_cross.iter())
        .chain(self.resid_half.iter())
        .all(|x| x.is_finite())
    }
}

/// Time series of norms, momentum and cumulative integrals.
#[derive(Clone, Debug, Default)]
pub struct DiagnosticsLedger {
    options: LedgerOptions,
    rows: Vec<LedgerRow>,
}

impl DiagnosticsLedger {
    pub fn new(options: LedgerOptions) -> Self {
        Self { options, rows: Vec::new() }
    }

    pub fn options(&self) -> &LedgerOptions {
        &self.options
    }

    /// Append a sample at `t` (strictly after the previous one).
    pub fn record(&mut self, t: f64, w: &FourierField, u: Option<&FourierField>) -> Result<()> {
        if let Some(last) = self.rows.last() {
            if !(t > last.t) {
                return Err(domain(format!("ledger time {t} does not advance past {}", last.t)));
            }
        }
        let h_3half = w.seminorm(1.5);
        let h_half = w.seminorm(0.5);
        let u_half = u.map(|u| u.seminorm(0.5));
        let linf = match self.options.sup {
            SupNorm::Grid => w.linf_norm(),
            SupNorm::Refined => w.linf_norm_refined(),
        };
        let (cum_h32sq, cum_cross) = match self.rows.last() {
            None => (0.0, u_half.map(|_| 0.0)),
            Some(p) => {
                let h = 0.5 * (t - p.t);
                let a = p.cum_h32sq + h * (p.h_3half * p.h_3half + h_3half * h_3half);
                let b = match (p.cum_cross, p.u_half, u_half) {
                    (Some(c), Some(pu), Some(uu)) => Some(c + h * (p.h_half * pu + h_half * uu)),
                    _ => None,
                };
                (a, b)
            }
        };
        let w0 = w.zeroth_mode();
        self.rows.push(LedgerRow {
            t,
            l2: w.l2_norm(),
            h_half,
            h1: w.seminorm(1.0),
            h_3half,
            h2: w.seminorm(2.0),
            hnorm_half: w.hnorm(0.5),
            hnorm1: w.hnorm(1.0),
            linf,
            mom: w0.map(|z| z.re),
            cum_h32sq,
            u_half,
            cum_cross,
            resid_half: None,
            higher: self.options.higher_orders.iter().map(|&s| w.seminorm(s)).collect(),
        });
        Ok(())
    }

    pub fn push_row(&mut self, row: LedgerRow) {
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[LedgerRow] {
        &self.rows
    }

    pub fn rows_mut(&mut self) -> &mut [LedgerRow] {
        &mut self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }

    pub fn column(&self, f: impl Fn(&LedgerRow) -> f64) -> Vec<f64> {
        self.rows.iter().map(f).collect()
    }

    pub fn all_finite(&self) -> bool {
        self.rows.iter().all(LedgerRow::is_finite)
    }
}

/// Cumulative trapezoidal integral of `y` over `t`, starting at 0.
pub fn cumulative_trapezoid(t: &[f64], y: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(t.len());
    let mut acc = 0.0;
    for i in 0..t.len() {
        if i > 0 {
            acc += 0.5 * (t[i] - t[i - 1]) * (y[i] + y[i - 1]);
        }
        out.push(acc);
    }
    out
}
