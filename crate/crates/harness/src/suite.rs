//! Named scenario families. Overrides apply to every member; each member writes to
//! `<output>/<suite>/<member>`.

use std::fmt::Write as _;
use std::path::PathBuf;

use magflow_core::diagnostics::EnvelopeReport;
use magflow_core::dynamics::SystemTag;
use magflow_core::SobolevIndex;

use crate::compare::compare_series;
use crate::config::{InitSpec, RunPath, ScenarioConfig};
use crate::error::{invalid, Result};
use crate::run::{run, RunOutcome};

pub const SUITES: [&str; 4] = ["smoke", "equivalence", "gauge", "max_principle"];

/// Residual reduction required when `dt` is halved.
pub const HALVING_RATIO: f64 = 8.0;

pub const GAUGE_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct SuiteOutcome {
    pub name: String,
    pub runs: Vec<(String, RunOutcome)>,
    /// Reports that span several runs.
    pub extra: Vec<EnvelopeReport>,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.runs.iter().all(|(_, r)| r.passed()) && self.extra.iter().all(EnvelopeReport::passed)
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        for (name, r) in &self.runs {
            writeln!(s, "== {name}").unwrap();
            s.push_str(&r.summary);
        }
        if !self.extra.is_empty() {
            writeln!(s, "== {}", self.name).unwrap();
        }
        for r in &self.extra {
            writeln!(s, "{r}").unwrap();
        }
        writeln!(s, "suite {} {}", self.name, if self.passed() { "PASS" } else { "FAIL" }).unwrap();
        s
    }
}

fn member(suite: &str, name: &str, base: &PathBuf, overrides: &[(String, String)], mut cfg: ScenarioConfig) -> Result<ScenarioConfig> {
    for (k, v) in overrides {
        if k != "output" {
            cfg.set(k, v)?;
        }
    }
    cfg.output = base.join(suite).join(name);
    cfg.validate()?;
    Ok(cfg)
}

fn presets(name: &str) -> Result<Vec<(String, ScenarioConfig)>> {
    let d = ScenarioConfig::default();
    let random = |seed| InitSpec::random(1.0, 4.0, 2.0, 0.5, 0.5, seed);
    Ok(match name {
        "smoke" => SystemTag::ALL
            .iter()
            .map(|&system| {
                let cfg = ScenarioConfig {
                    system,
                    k: 4,
                    dt: 0.01,
                    t_end: 0.1,
                    init: random(1),
                    ..d.clone()
                };
                (system.to_string(), cfg)
            })
            .collect(),
        "equivalence" => {
            let dual = ScenarioConfig {
                system: SystemTag::Magnetization,
                k: 16,
                dt: 1e-3,
                t_end: 0.25,
                ledger_every: 10,
                path: RunPath::Dual,
                ..d.clone()
            };
            let fixed = |dt: f64| ScenarioConfig {
                system: SystemTag::LinearFixedU,
                path: RunPath::Direct,
                dt,
                ledger_every: (0.01 / dt).round() as usize,
                ..dual.clone()
            };
            vec![
                ("dual".into(), dual.clone()),
                ("fixed_u".into(), fixed(1e-3)),
                ("fixed_u_half".into(), fixed(5e-4)),
            ]
        }
        "gauge" => {
            let g = |grad| ScenarioConfig {
                system: SystemTag::Magnetization,
                k: 12,
                dt: 5e-3,
                t_end: 0.25,
                snapshot_every: Some(10),
                init: InitSpec::random(1.0, 12.0, 2.0, 1.0, grad, 5),
                ..d.clone()
            };
            vec![("base".into(), g(0.5)), ("shifted".into(), g(1.5))]
        }
        "max_principle" => (1..=5)
            .map(|seed| {
                let cfg = ScenarioConfig {
                    system: SystemTag::Simplified,
                    k: 16,
                    dt: 5e-3,
                    t_end: 1.0,
                    ledger_every: 2,
                    init: InitSpec::random(1.0, 8.0, 2.0, 1.0, 1.0, seed),
                    ..d.clone()
                };
                (format!("seed{seed}"), cfg)
            })
            .collect(),
        _ => return Err(invalid(format!("unknown suite {name:?}; known: {}", SUITES.join(", ")))),
    })
}

fn last_resid(r: &RunOutcome) -> f64 {
    r.simulation.ledger.rows().last().and_then(|x| x.resid_half).unwrap_or(f64::NAN)
}

pub fn suite(name: &str, overrides: &[(String, String)]) -> Result<SuiteOutcome> {
    let base = overrides
        .iter()
        .rev()
        .find(|(k, _)| k == "output")
        .map_or_else(|| PathBuf::from("suites"), |(_, v)| PathBuf::from(v));
    let mut runs = Vec::new();
    for (m, cfg) in presets(name)? {
        let cfg = member(name, &m, &base, overrides, cfg)?;
        runs.push((m, run(&cfg)?));
    }
    let mut extra = Vec::new();
    match name {
        "equivalence" => {
            let (a, b) = (last_resid(&runs[1].1), last_resid(&runs[2].1));
            let t = runs[1].1.simulation.ledger.rows().last().map_or(0.0, |r| r.t);
            extra.push(
                EnvelopeReport::new("halving_ratio", vec![t], vec![a / b - HALVING_RATIO], true)
                    .with_param("resid_dt", a)
                    .with_param("resid_dt_half", b),
            );
        }
        "gauge" => {
            let (a, b) = (&runs[0].1.simulation, &runs[1].1.simulation);
            let d = compare_series(&a.snapshots, &b.snapshots, SobolevIndex::new(0.5)?, true)?;
            let (times, margins) = d.into_iter().map(|(t, x)| (t, GAUGE_TOL - x)).unzip();
            extra.push(EnvelopeReport::new("gauge_invariance", times, margins, true).with_param("tol", GAUGE_TOL));
        }
        _ => {}
    }
    Ok(SuiteOutcome {
        name: name.to_string(),
        runs,
        extra,
    })
}
