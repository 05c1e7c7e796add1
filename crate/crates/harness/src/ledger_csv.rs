//! Ledger CSV: header row plus one row per sample.
//!
//! Floats are written with Rust's `{:e}` (shortest string that parses back to the same
//! binary64, no locale). `resid_half` is empty when the run has no reference velocity.
//! A run that blew up ends with a marker row `blowup,<t>,` followed by empty fields.

use std::fmt::Write as _;

use magflow_core::diagnostics::{cumulative_trapezoid, DiagnosticsLedger, LedgerOptions, LedgerRow};

use crate::error::{HarnessError, Result};

pub const COLUMNS: [&str; 13] = [
    "t",
    "l2",
    "h_half",
    "h1",
    "h_3half",
    "h2",
    "hnorm_half",
    "linf",
    "mom_x",
    "mom_y",
    "mom_z",
    "cum_h32sq",
    "resid_half",
];

pub const BLOWUP_MARKER: &str = "blowup";

pub fn header() -> String {
    COLUMNS.join(",")
}

fn row_fields(r: &LedgerRow) -> [f64; 12] {
    [
        r.t, r.l2, r.h_half, r.h1, r.h_3half, r.h2, r.hnorm_half, r.linf, r.mom[0], r.mom[1], r.mom[2], r.cum_h32sq,
    ]
}

pub fn write_ledger(ledger: &DiagnosticsLedger, blowup: Option<f64>) -> String {
    let mut s = header();
    s.push('\n');
    for r in ledger.rows() {
        for v in row_fields(r) {
            write!(s, "{v:e},").unwrap();
        }
        if let Some(x) = r.resid_half {
            write!(s, "{x:e}").unwrap();
        }
        s.push('\n');
    }
    if let Some(t) = blowup {
        write!(s, "{BLOWUP_MARKER},{t:e}").unwrap();
        s.push_str(&",".repeat(COLUMNS.len() - 2));
        s.push('\n');
    }
    s
}

/// A ledger read back from CSV.
#[derive(Clone, Debug)]
pub struct ParsedLedger {
    pub ledger: DiagnosticsLedger,
    pub blowup: Option<f64>,
}

fn bad(line: usize, msg: impl std::fmt::Display) -> HarnessError {
    HarnessError::Csv(format!("line {line}: {msg}"))
}

/// Parse a ledger file. Columns absent from the schema are rebuilt where they are
/// determined by it (`hnorm1^2 = l2^2 + h1^2`); the velocity columns stay empty.
pub fn read_ledger(text: &str) -> Result<ParsedLedger> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == header() => {}
        _ => return Err(bad(1, "missing or wrong header")),
    }
    let mut ledger = DiagnosticsLedger::new(LedgerOptions::default());
    let mut blowup = None;
    for (i, line) in lines {
        let n = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        if blowup.is_some() {
            return Err(bad(n, "rows after the blowup marker"));
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != COLUMNS.len() {
            return Err(bad(n, format!("{} fields, expected {}", f.len(), COLUMNS.len())));
        }
        let num = |j: usize| -> Result<f64> {
            f[j].parse::<f64>().map_err(|_| bad(n, format!("column {}: {:?}", COLUMNS[j], f[j])))
        };
        if f[0] == BLOWUP_MARKER {
            blowup = Some(num(1)?);
            continue;
        }
        let v = (0..12).map(num).collect::<Result<Vec<_>>>()?;
        let resid_half = if f[12].is_empty() { None } else { Some(num(12)?) };
        ledger.push_row(LedgerRow {
            t: v[0],
            l2: v[1],
            h_half: v[2],
            h1: v[3],
            h_3half: v[4],
            h2: v[5],
            hnorm_half: v[6],
            hnorm1: v[1].hypot(v[3]),
            linf: v[7],
            mom: [v[8], v[9], v[10]],
            cum_h32sq: v[11],
            u_half: None,
            cum_cross: None,
            resid_half,
            higher: vec![],
        });
    }
    Ok(ParsedLedger { ledger, blowup })
}

/// Copy `||u||_{1/2}` from a velocity ledger on the same times and rebuild the
/// trapezoidal `int ||w||_{1/2} ||u||_{1/2}`.
pub fn attach_velocity(w: &mut DiagnosticsLedger, u: &DiagnosticsLedger) -> Result<()> {
    if w.len() > u.len() || w.rows().iter().zip(u.rows()).any(|(a, b)| a.t != b.t) {
        return Err(HarnessError::Csv("velocity ledger does not match the run ledger".into()));
    }
    let t = w.times();
    let cross: Vec<f64> = w.rows().iter().zip(u.rows()).map(|(a, b)| a.h_half * b.h_half).collect();
    let cum = cumulative_trapezoid(&t, &cross);
    for ((r, b), c) in w.rows_mut().iter_mut().zip(u.rows()).zip(cum) {
        r.u_half = Some(b.h_half);
        r.cum_cross = Some(c);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use magflow_core::{Complex64, FourierField, WaveLattice};

    #[test]
    fn round_trip_is_exact() {
        let lat = WaveLattice::new(3).unwrap();
        let w = FourierField::from_fn(&lat, |k| {
            let x = f64::from(k[0] + 2 * k[1] - k[2]) / 7.0;
            [Complex64::new(x.cos() / 3.0, 0.0); 3]
        });
        let mut l = DiagnosticsLedger::new(LedgerOptions::default());
        l.record(0.0, &w, None).unwrap();
        l.record(0.1, &w.scale(0.5), None).unwrap();
        l.rows_mut()[1].resid_half = Some(1.0 / 3.0);
        let text = write_ledger(&l, Some(0.15));
        let back = read_ledger(&text).unwrap();
        assert_eq!(back.blowup, Some(0.15));
        for (a, b) in l.rows().iter().zip(back.ledger.rows()) {
            assert_eq!(row_fields(a), row_fields(b));
            assert_eq!(a.resid_half, b.resid_half);
            assert!((a.hnorm1 - b.hnorm1).abs() <= 1e-15 * a.hnorm1);
        }
        assert_eq!(write_ledger(&back.ledger, back.blowup), text);
        assert!(text.lines().all(|r| r.split(',').count() == 13));
    }

    #[test]
    fn rejects_malformed() {
        assert!(read_ledger("t,l2\n").is_err());
        let h = header();
        assert!(read_ledger(&format!("{h}\n1,2,3\n")).is_err());
        assert!(read_ledger(&format!("{h}\nblowup,1,,,,,,,,,,,\n0,0,0,0,0,0,0,0,0,0,0,0,\n")).is_err());
        assert!(read_ledger(&format!("{h}\nx,0,0,0,0,0,0,0,0,0,0,0,\n")).is_err());
    }
}
