use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use magflow_core::diagnostics::{
    max_principle_check, momentum_check, sup_monotone_check, DiagnosticsLedger, EnvelopeReport, LedgerOptions,
    DEFAULT_SUP_SLACK, MOMENTUM_TOL,
};
use magflow_core::dynamics::{Dynamics, PrescribedVelocity, SystemTag};
use magflow_core::snapshot::encode_snapshot;
use magflow_core::timestepper::{
    evolve, evolve_calderon_split, evolve_fixed_u_lockstep, galerkin_ode_oracle, BlowUpRecord, EvolveConfig, Ifrk4,
    SolverState,
};
use magflow_core::{Error as CoreError, FourierField, SobolevIndex, WaveLattice};

use crate::config::{CheckName, RunPath, ScenarioConfig, VelocityMode};
use crate::error::{invalid, io_at, Result};
use crate::init::make_initial;
use crate::ledger_csv::{attach_velocity, read_ledger, write_ledger};

/// Relative directories in `output` are resolved against this variable when it is set.
pub const OUTPUT_ROOT_ENV: &str = "MAGFLOW_OUTPUT_ROOT";

/// Relative `||Pw - u||_{H^{1/2}} / ||u||_{H^{1/2}}` allowed by the equivalence check.
pub const EQUIVALENCE_TOL: f64 = 1e-6;

pub fn output_dir(cfg: &ScenarioConfig) -> PathBuf {
    match std::env::var_os(OUTPUT_ROOT_ENV) {
        Some(root) if cfg.output.is_relative() => PathBuf::from(root).join(&cfg.output),
        _ => cfg.output.clone(),
    }
}

/// Everything a scenario produced, before any file is written.
#[derive(Clone, Debug)]
pub struct Simulation {
    pub lattice: Arc<WaveLattice>,
    pub ledger: DiagnosticsLedger,
    /// Companion velocity ledger (dual and `linear_fixed_u` runs).
    pub velocity_ledger: Option<DiagnosticsLedger>,
    /// `v` and `z` ledgers of the split path.
    pub split_ledgers: Option<(DiagnosticsLedger, DiagnosticsLedger)>,
    pub snapshots: Vec<(f64, FourierField)>,
    pub velocity_snapshots: Vec<(f64, FourierField)>,
    pub blowup: Option<BlowUpRecord>,
}

fn half() -> SobolevIndex {
    SobolevIndex::new(0.5).unwrap()
}

/// `||Pw - u||_{H^{1/2}}`.
pub fn residual(w: &FourierField, u: &FourierField) -> f64 {
    (&w.leray_project() - u).sobolev_norm(half()).unwrap()
}

fn ledger_options(cfg: &ScenarioConfig) -> LedgerOptions {
    let mut o = LedgerOptions {
        sup: cfg.sup,
        ..LedgerOptions::default()
    };
    if cfg.higher_norms {
        o = o.with_higher_norms();
    }
    o
}

fn evolve_config(cfg: &ScenarioConfig) -> EvolveConfig {
    let mut e = EvolveConfig::new(cfg.dt, cfg.t_end)
        .ledger_every(cfg.ledger_every)
        .with_ledger(ledger_options(cfg));
    e.snapshot_every = cfg.snapshot_every;
    e.ceiling = cfg.ceiling;
    e
}

fn velocity_ledger(cfg: &ScenarioConfig, u: &[(f64, FourierField)]) -> Result<DiagnosticsLedger> {
    let mut l = DiagnosticsLedger::new(ledger_options(cfg));
    for (t, f) in u {
        l.record(*t, f, None)?;
    }
    Ok(l)
}

/// Keep only the velocity samples at the snapshot times of `w`.
fn matching(u: &[(f64, FourierField)], w: &[(f64, FourierField)]) -> Vec<(f64, FourierField)> {
    u.iter().filter(|(t, _)| w.iter().any(|(s, _)| s == t)).cloned().collect()
}

/// Run the scenario in memory.
pub fn simulate(cfg: &ScenarioConfig) -> Result<Simulation> {
    cfg.validate()?;
    let lat = WaveLattice::with_grid(cfg.k, cfg.grid_size())?;
    let w0 = make_initial(&cfg.init, &lat, cfg.seed)?;
    let ecfg = evolve_config(cfg);
    let mut sim = Simulation {
        lattice: Arc::clone(&lat),
        ledger: DiagnosticsLedger::default(),
        velocity_ledger: None,
        split_ledgers: None,
        snapshots: vec![],
        velocity_snapshots: vec![],
        blowup: None,
    };
    let dynamics = Dynamics::new(cfg.system, cfg.nu)?;
    if cfg.path == RunPath::Dual {
        return dual(cfg, &lat, &w0, sim);
    }
    if cfg.path == RunPath::Split {
        let r = evolve_calderon_split(&dynamics, &w0, &ecfg)?;
        sim.snapshots = r.states.iter().map(|s| (s.t, s.recombined())).collect();
        sim.ledger = r.w_ledger;
        sim.split_ledgers = Some((r.v_ledger, r.z_ledger));
        sim.blowup = r.blowup;
        return Ok(sim);
    }
    let oracle = cfg.path == RunPath::Oracle;
    let run = if cfg.system == SystemTag::LinearFixedU {
        let u0 = make_initial(&cfg.velocity, &lat, cfg.seed.wrapping_add(1))?.leray_project();
        match cfg.velocity_mode {
            VelocityMode::Nse if oracle => return Err(invalid("oracle path needs velocity_mode = steady")),
            VelocityMode::Nse => {
                let (run, u) = evolve_fixed_u_lockstep(cfg.nu, &u0, &w0, &ecfg)?;
                let vl = velocity_ledger(cfg, &u)?;
                sim.velocity_snapshots = matching(&u, &run.snapshots);
                sim.velocity_ledger = Some(vl);
                run
            }
            VelocityMode::Steady => {
                let d = dynamics.with_prescribed(Arc::new(PrescribedVelocity::steady(u0.clone())));
                let run = if oracle { galerkin_ode_oracle(&d, &w0, &ecfg)? } else { evolve(&d, &w0, &ecfg)? };
                let u: Vec<_> = run.ledger.times().into_iter().map(|t| (t, u0.clone())).collect();
                sim.velocity_ledger = Some(velocity_ledger(cfg, &u)?);
                run
            }
        }
    } else if oracle {
        galerkin_ode_oracle(&dynamics, &w0, &ecfg)?
    } else {
        evolve(&dynamics, &w0, &ecfg)?
    };
    sim.ledger = run.ledger;
    sim.snapshots = run.snapshots;
    sim.blowup = run.blowup;
    Ok(sim)
}

/// NSE from `P w0` and magnetization from `w0`, stepped together; `resid_half` holds
/// `||Pw - u||_{H^{1/2}}`.
fn dual(cfg: &ScenarioConfig, lat: &Arc<WaveLattice>, w0: &FourierField, mut sim: Simulation) -> Result<Simulation> {
    let total = cfg.steps();
    let mag = Ifrk4::new(Dynamics::new(SystemTag::Magnetization, cfg.nu)?, lat, cfg.dt)?.with_ceiling(cfg.ceiling);
    let nse = Ifrk4::new(Dynamics::new(SystemTag::Nse, cfg.nu)?, lat, cfg.dt)?.with_ceiling(cfg.ceiling);
    let mut w = SolverState::new(0.0, w0.clone(), SystemTag::Magnetization, cfg.nu, cfg.dt)?;
    let mut u = SolverState::new(0.0, w0.leray_project(), SystemTag::Nse, cfg.nu, cfg.dt)?;
    let opts = ledger_options(cfg);
    let mut lw = DiagnosticsLedger::new(opts.clone());
    let mut lu = DiagnosticsLedger::new(opts);
    let record = |w: &SolverState, u: &SolverState, lw: &mut DiagnosticsLedger, lu: &mut DiagnosticsLedger| {
        lw.record(w.t, &w.w, None)?;
        lu.record(u.t, &u.w, None)?;
        lw.rows_mut().last_mut().unwrap().resid_half = Some(residual(&w.w, &u.w));
        Ok::<_, CoreError>(())
    };
    record(&w, &u, &mut lw, &mut lu)?;
    sim.snapshots.push((0.0, w.w.clone()));
    sim.velocity_snapshots.push((0.0, u.w.clone()));
    for n in 1..=total {
        let t = n as f64 * cfg.dt;
        let next = mag.step_to(&w, t).and_then(|a| nse.step_to(&u, t).map(|b| (a, b)));
        match next {
            Ok((a, b)) => (w, u) = (a, b),
            Err(CoreError::BlowUp { time, reason, .. }) => {
                sim.blowup = Some(BlowUpRecord { time, reason });
                break;
            }
            Err(e) => return Err(e.into()),
        }
        if n % cfg.ledger_every == 0 || n == total {
            record(&w, &u, &mut lw, &mut lu)?;
        }
        if n == total || cfg.snapshot_every.is_some_and(|c| n % c == 0) {
            sim.snapshots.push((t, w.w.clone()));
            sim.velocity_snapshots.push((t, u.w.clone()));
        }
    }
    attach_velocity(&mut lw, &lu)?;
    sim.ledger = lw;
    sim.velocity_ledger = Some(lu);
    Ok(sim)
}

fn finite_report(ledger: &DiagnosticsLedger) -> EnvelopeReport {
    let margins = ledger.rows().iter().map(|r| if r.is_finite() { 0.0 } else { f64::NAN }).collect();
    EnvelopeReport::new("finite", ledger.times(), margins, true)
}

fn equivalence_report(ledger: &DiagnosticsLedger, velocity: Option<&DiagnosticsLedger>) -> EnvelopeReport {
    let Some(u) = velocity else {
        return EnvelopeReport::new("equivalence", vec![], vec![], true);
    };
    let margins = ledger
        .rows()
        .iter()
        .zip(u.rows())
        .map(|(w, u)| match w.resid_half {
            Some(r) => EQUIVALENCE_TOL - if u.hnorm_half > 0.0 { r / u.hnorm_half } else { r },
            None => f64::NAN,
        })
        .collect();
    EnvelopeReport::new("equivalence", ledger.times(), margins, true).with_param("tol", EQUIVALENCE_TOL)
}

/// The configured checks on a ledger, plus a global-existence report when a blow-up
/// counts as failure.
pub fn evaluate_checks(
    cfg: &ScenarioConfig,
    ledger: &DiagnosticsLedger,
    velocity: Option<&DiagnosticsLedger>,
    blowup: Option<f64>,
) -> Vec<EnvelopeReport> {
    let mut out: Vec<EnvelopeReport> = cfg
        .checks()
        .into_iter()
        .map(|c| match c {
            CheckName::Finite => finite_report(ledger),
            CheckName::MaxPrinciple => max_principle_check(ledger, cfg.system, DEFAULT_SUP_SLACK),
            CheckName::SupMonotone => sup_monotone_check(ledger, cfg.system, DEFAULT_SUP_SLACK),
            CheckName::Momentum => momentum_check(ledger, cfg.system, MOMENTUM_TOL),
            CheckName::Equivalence => equivalence_report(ledger, velocity),
        })
        .collect();
    if let Some(t) = blowup {
        out.push(
            EnvelopeReport::new("global_existence", vec![t], vec![t - cfg.t_end], cfg.blowup_fails())
                .with_param("t_end", cfg.t_end),
        );
    }
    out
}

pub fn summary(cfg: &ScenarioConfig, ledger: &DiagnosticsLedger, blowup: Option<f64>, reports: &[EnvelopeReport]) -> String {
    let mut s = String::new();
    writeln!(
        s,
        "{} K={} M={} dt={:e} t_end={:e} nu={:e} path={}",
        cfg.system,
        cfg.k,
        cfg.grid_size(),
        cfg.dt,
        cfg.t_end,
        cfg.nu,
        cfg.path
    )
    .unwrap();
    if let Some(r) = ledger.rows().last() {
        writeln!(s, "last row t={:e} l2={:e} h1={:e} linf={:e}", r.t, r.l2, r.h1, r.linf).unwrap();
    }
    if let Some(t) = blowup {
        writeln!(s, "blowup at t={t:e}").unwrap();
    }
    for r in reports {
        writeln!(s, "{r}").unwrap();
    }
    let ok = reports.iter().all(EnvelopeReport::passed);
    writeln!(s, "status {}", if ok { "PASS" } else { "FAIL" }).unwrap();
    s
}

pub fn checks_csv(reports: &[EnvelopeReport]) -> String {
    let mut s = format!("{}\n", EnvelopeReport::CSV_HEADER);
    for r in reports {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub simulation: Simulation,
    pub reports: Vec<EnvelopeReport>,
    pub summary: String,
}

impl RunOutcome {
    pub fn passed(&self) -> bool {
        self.reports.iter().all(EnvelopeReport::passed)
    }

    /// 0 when every asserted check holds, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        i32::from(!self.passed())
    }
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, bytes).map_err(io_at(path))
}

fn step_index(t: f64, dt: f64) -> usize {
    (t / dt).round() as usize
}

/// Simulate and write `config.txt`, `ledger.csv`, `checks.csv`, `summary.txt` and the
/// snapshots in `snapshots/` under [`output_dir`].
pub fn run(cfg: &ScenarioConfig) -> Result<RunOutcome> {
    let dir = output_dir(cfg);
    let snaps = dir.join("snapshots");
    fs::create_dir_all(&snaps).map_err(io_at(&snaps))?;
    let sim = simulate(cfg)?;
    let blowup = sim.blowup.as_ref().map(|b| b.time);
    let reports = evaluate_checks(cfg, &sim.ledger, sim.velocity_ledger.as_ref(), blowup);
    let summary = summary(cfg, &sim.ledger, blowup, &reports);
    write(&dir.join("config.txt"), cfg.to_text())?;
    write(&dir.join("ledger.csv"), write_ledger(&sim.ledger, blowup))?;
    if let Some(u) = &sim.velocity_ledger {
        write(&dir.join("velocity_ledger.csv"), write_ledger(u, blowup))?;
    }
    if let Some((v, z)) = &sim.split_ledgers {
        write(&dir.join("split_v.csv"), write_ledger(v, None))?;
        write(&dir.join("split_z.csv"), write_ledger(z, None))?;
    }
    write(&dir.join("checks.csv"), checks_csv(&reports))?;
    write(&dir.join("summary.txt"), &summary)?;
    for (prefix, list) in [("w", &sim.snapshots), ("u", &sim.velocity_snapshots)] {
        for (t, f) in list {
            let name = format!("{prefix}_{:06}.magw", step_index(*t, cfg.dt));
            write(&snaps.join(name), encode_snapshot(*t, f))?;
        }
    }
    Ok(RunOutcome {
        dir,
        simulation: sim,
        reports,
        summary,
    })
}

/// Re-evaluate the checks of a finished run from its files.
pub fn check_dir(dir: &Path) -> Result<(Vec<EnvelopeReport>, String)> {
    let cfg_path = dir.join("config.txt");
    let cfg = ScenarioConfig::from_file(&cfg_path)?;
    let read = |name: &str| {
        let p = dir.join(name);
        fs::read_to_string(&p).map_err(io_at(p))
    };
    let mut parsed = read_ledger(&read("ledger.csv")?)?;
    let velocity = match dir.join("velocity_ledger.csv").exists() {
        true => Some(read_ledger(&read("velocity_ledger.csv")?)?.ledger),
        false => None,
    };
    if let Some(u) = &velocity {
        attach_velocity(&mut parsed.ledger, u)?;
    }
    let reports = evaluate_checks(&cfg, &parsed.ledger, velocity.as_ref(), parsed.blowup);
    let s = summary(&cfg, &parsed.ledger, parsed.blowup, &reports);
    Ok((reports, s))
}
