//! Fixed-step integrating-factor RK4 (Lawson form).
//!
//! With `E = exp(-nu |k|^2 dt/2)` applied per mode and `N` the nonlinear part, one step is
//!
//! ```text
//! k1 = N(t,        w)
//! k2 = N(t + dt/2, E (w + dt/2 k1))
//! k3 = N(t + dt/2, E w + dt/2 k2)
//! k4 = N(t + dt,   E^2 w + dt E k3)
//! w' = E^2 w + dt/6 (E^2 k1 + 2 E (k2 + k3) + k4)
//! ```
//!
//! Each stage is combined in exactly this order, elementwise, so results are bitwise
//! reproducible. `E^2` is evaluated directly as `exp(-nu |k|^2 dt)`. Time after `n`
//! steps is `n * dt`, never an accumulated sum.

use std::sync::Arc;

use crate::diagnostics::{DiagnosticsLedger, LedgerOptions};
use crate::dynamics::{Backend, Dynamics, PrescribedVelocity, SystemTag};
use crate::error::{domain, Error, Result};
use crate::field::{Field, FourierField};
use crate::lattice::WaveLattice;

/// Default ceiling on `||w||_1` above which a run is declared blown up.
pub const DEFAULT_CEILING: f64 = 1e6;

/// Largest radius accepted by the convolution oracle.
pub const ORACLE_MAX_RADIUS: usize = 4;

#[derive(Clone, Debug)]
pub struct SolverState {
    pub t: f64,
    pub w: FourierField,
    pub tag: SystemTag,
    pub nu: f64,
    pub dt: f64,
}

impl SolverState {
    pub fn new(t: f64, w: FourierField, tag: SystemTag, nu: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(domain(format!("step {dt} must be positive and finite")));
        }
        if !t.is_finite() {
            return Err(domain("time must be finite"));
        }
        if !w.is_finite() {
            return Err(domain("state must be finite"));
        }
        Ok(Self { t, w, tag, nu, dt })
    }
}

/// Per-mode heat factors for one step size on one lattice.
#[derive(Clone, Debug)]
pub(crate) struct HeatFactors {
    half: Vec<f64>,
    full: Vec<f64>,
}

impl HeatFactors {
    pub(crate) fn new(lattice: &WaveLattice, nu: f64, dt: f64) -> Self {
        let half = lattice.norm_sq().iter().map(|&n2| (-nu * n2 * dt * 0.5).exp()).collect();
        let full = lattice.norm_sq().iter().map(|&n2| (-nu * n2 * dt).exp()).collect();
        Self { half, full }
    }
}

fn apply<const C: usize>(f: &mut Field<C>, m: &[f64]) {
    for (v, &s) in f.coeffs_mut().iter_mut().zip(m) {
        for z in v.iter_mut() {
            *z *= s;
        }
    }
}

/// One Lawson RK4 step of `w_t = N(t, w) - nu Lambda^2 w` for any component count.
pub(crate) fn ifrk4_core<const C: usize>(
    w: &Field<C>,
    t: f64,
    dt: f64,
    heat: &HeatFactors,
    mut nl: impl FnMut(f64, &Field<C>) -> Result<Field<C>>,
) -> Result<Field<C>> {
    let h = 0.5 * dt;
    let k1 = nl(t, w)?;

    let mut a = w.clone();
    a.axpy(h, &k1);
    apply(&mut a, &heat.half);
    let k2 = nl(t + h, &a)?;

    let mut ew = w.clone();
    apply(&mut ew, &heat.half);
    let mut b = ew.clone();
    b.axpy(h, &k2);
    let k3 = nl(t + h, &b)?;

    let mut e2w = w.clone();
    apply(&mut e2w, &heat.full);
    let mut ek3 = k3.clone();
    apply(&mut ek3, &heat.half);
    let mut c = e2w.clone();
    c.axpy(dt, &ek3);
    let k4 = nl(t + dt, &c)?;

    let mut incr = k1;
    apply(&mut incr, &heat.full);
    let mut mid = k2;
    mid += &k3;
    apply(&mut mid, &heat.half);
    incr.axpy(2.0, &mid);
    incr += &k4;
    let mut out = e2w;
    out.axpy(dt / 6.0, &incr);
    Ok(out)
}

/// Integrating-factor RK4 for one system at one step size.
#[derive(Clone, Debug)]
pub struct Ifrk4 {
    dynamics: Dynamics,
    dt: f64,
    heat: HeatFactors,
    ceiling: f64,
}

impl Ifrk4 {
    pub fn new(dynamics: Dynamics, lattice: &WaveLattice, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(domain(format!("step {dt} must be positive and finite")));
        }
        dynamics.validate()?;
        let heat = HeatFactors::new(lattice, dynamics.nu(), dt);
        Ok(Self {
            dynamics,
            dt,
            heat,
            ceiling: DEFAULT_CEILING,
        })
    }

    pub fn with_ceiling(mut self, ceiling: f64) -> Self {
        self.ceiling = ceiling;
        self
    }

    pub fn dynamics(&self) -> &Dynamics {
        &self.dynamics
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advance `w` from `t` to `t + dt`, without blow-up detection.
    pub fn advance(&self, t: f64, w: &FourierField) -> Result<FourierField> {
        let d = &self.dynamics;
        let w = d.admissible(w);
        ifrk4_core(&w, t, self.dt, &self.heat, |s, x| d.nonlinear_term(s, x))
    }

    /// Step with blow-up detection; `t_next` is the time stamped on the result.
    pub fn step_to(&self, state: &SolverState, t_next: f64) -> Result<SolverState> {
        let w = self.advance(state.t, &state.w)?;
        check_blowup(state, w, t_next, self.ceiling)
    }

    pub fn step(&self, state: &SolverState) -> Result<SolverState> {
        self.step_to(state, state.t + self.dt)
    }
}

pub(crate) fn check_blowup(prev: &SolverState, w: FourierField, t_next: f64, ceiling: f64) -> Result<SolverState> {
    let reason = if !w.is_finite() {
        Some("non-finite coefficients".to_string())
    } else {
        let h1 = w.seminorm(1.0);
        (h1 > ceiling).then(|| format!("||w||_1 = {h1:e} above ceiling {ceiling:e}"))
    };
    match reason {
        Some(reason) => Err(Error::BlowUp {
            time: t_next,
            reason,
            last_state: Box::new(prev.clone()),
        }),
        None => Ok(SolverState {
            t: t_next,
            w,
            tag: prev.tag,
            nu: prev.nu,
            dt: prev.dt,
        }),
    }
}

/// One IF-RK4 step of `dynamics` from `state` (whose `tag`, `nu` must match).
pub fn step_ifrk4(dynamics: &Dynamics, state: &SolverState) -> Result<SolverState> {
    if dynamics.tag() != state.tag || dynamics.nu() != state.nu {
        return Err(domain("state and dynamics disagree on system or viscosity"));
    }
    Ifrk4::new(dynamics.clone(), state.w.lattice(), state.dt)?.step(state)
}

/// Fixed-step march parameters.
#[derive(Clone, Debug)]
pub struct EvolveConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Record a ledger row every this many steps (and always at `t = 0` and at the end).
    pub ledger_every: usize,
    /// Keep a snapshot every this many steps; `None` keeps only the initial and final states.
    pub snapshot_every: Option<usize>,
    pub ceiling: f64,
    pub ledger: LedgerOptions,
}

impl EvolveConfig {
    pub fn new(dt: f64, t_end: f64) -> Self {
        Self {
            dt,
            t_end,
            ledger_every: 1,
            snapshot_every: None,
            ceiling: DEFAULT_CEILING,
            ledger: LedgerOptions::default(),
        }
    }

    pub fn ledger_every(mut self, n: usize) -> Self {
        self.ledger_every = n;
        self
    }

    pub fn snapshot_every(mut self, n: usize) -> Self {
        self.snapshot_every = Some(n);
        self
    }

    pub fn with_ledger(mut self, opts: LedgerOptions) -> Self {
        self.ledger = opts;
        self
    }

    /// Number of steps; `t_end` must be an integer multiple of `dt` up to roundoff.
    pub fn steps(&self) -> Result<usize> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(domain(format!("step {} must be positive and finite", self.dt)));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(domain(format!("end time {} must be nonnegative and finite", self.t_end)));
        }
        if self.ledger_every == 0 || self.snapshot_every == Some(0) {
            return Err(domain("cadences must be positive"));
        }
        let n = (self.t_end / self.dt).round();
        if (n * self.dt - self.t_end).abs() > 1e-9 * self.t_end.max(self.dt) {
            return Err(domain(format!("t_end {} is not a multiple of dt {}", self.t_end, self.dt)));
        }
        Ok(n as usize)
    }

    fn records(&self, n: usize, total: usize) -> bool {
        n % self.ledger_every == 0 || n == total
    }

    fn keeps(&self, n: usize, total: usize) -> bool {
        n == 0 || n == total || self.snapshot_every.is_some_and(|c| n % c == 0)
    }
}

/// Blow-up record of a run that left every bounded set.
#[derive(Clone, Debug)]
pub struct BlowUpRecord {
    pub time: f64,
    pub reason: String,
}

/// Result of a march: kept snapshots, the ledger, and the blow-up marker if any.
#[derive(Clone, Debug)]
pub struct Run {
    pub snapshots: Vec<(f64, FourierField)>,
    pub ledger: DiagnosticsLedger,
    pub blowup: Option<BlowUpRecord>,
    pub final_state: SolverState,
}

impl Run {
    pub fn final_field(&self) -> &FourierField {
        &self.final_state.w
    }
}

/// March `dynamics` from `w0` with a fixed step.
pub fn evolve(dynamics: &Dynamics, w0: &FourierField, cfg: &EvolveConfig) -> Result<Run> {
    evolve_observed(dynamics, w0, cfg, |_| Ok(()))
}

/// [`evolve`] with a callback after every step (and once for the initial state).
pub fn evolve_observed(
    dynamics: &Dynamics,
    w0: &FourierField,
    cfg: &EvolveConfig,
    mut observe: impl FnMut(&SolverState) -> Result<()>,
) -> Result<Run> {
    let total = cfg.steps()?;
    let lat = w0.lattice();
    let stepper = Ifrk4::new(dynamics.clone(), lat, cfg.dt)?.with_ceiling(cfg.ceiling);
    let mut state = SolverState::new(0.0, dynamics.admissible(w0), dynamics.tag(), dynamics.nu(), cfg.dt)?;
    let mut ledger = DiagnosticsLedger::new(cfg.ledger.clone());
    let mut snapshots = Vec::new();
    ledger.record(0.0, &state.w, dynamics.velocity_at(0.0)?.as_ref())?;
    snapshots.push((0.0, state.w.clone()));
    observe(&state)?;
    let mut blowup = None;
    for n in 1..=total {
        let t = n as f64 * cfg.dt;
        state = match stepper.step_to(&state, t) {
            Ok(s) => s,
            Err(Error::BlowUp { time, reason, last_state }) => {
                blowup = Some(BlowUpRecord { time, reason });
                state = *last_state;
                break;
            }
            Err(e) => return Err(e),
        };
        if cfg.records(n, total) {
            ledger.record(t, &state.w, dynamics.velocity_at(t)?.as_ref())?;
        }
        if cfg.keeps(n, total) {
            snapshots.push((t, state.w.clone()));
        }
        observe(&state)?;
    }
    Ok(Run {
        snapshots,
        ledger,
        blowup,
        final_state: state,
    })
}

/// Heat part `v` and forced part `z` of the split, `w = v + z`.
#[derive(Clone, Debug)]
pub struct SplitState {
    pub t: f64,
    pub v: FourierField,
    pub z: FourierField,
}

impl SplitState {
    pub fn recombined(&self) -> FourierField {
        &self.v + &self.z
    }
}

#[derive(Clone, Debug)]
pub struct SplitRun {
    pub states: Vec<SplitState>,
    /// Ledgers of `v`, `z` and `w = v + z` on the same time grid.
    pub v_ledger: DiagnosticsLedger,
    pub z_ledger: DiagnosticsLedger,
    pub w_ledger: DiagnosticsLedger,
    pub blowup: Option<BlowUpRecord>,
}

/// Split march: `v` by exact heat multipliers from `v(0) = w0`, `z` by IF-RK4 from
/// `z(0) = 0` with forcing `N(v + z)`. Ledger rows and kept states follow `cfg`.
pub fn evolve_calderon_split(dynamics: &Dynamics, w0: &FourierField, cfg: &EvolveConfig) -> Result<SplitRun> {
    if !matches!(dynamics.tag(), SystemTag::Simplified | SystemTag::Magnetization) {
        return Err(domain(format!("split path supports simplified and magnetization, not {}", dynamics.tag())));
    }
    let total = cfg.steps()?;
    let lat = w0.lattice();
    let nu = dynamics.nu();
    let heat = HeatFactors::new(lat, nu, cfg.dt);
    let v0 = w0.clone();
    let mut state = SplitState {
        t: 0.0,
        v: v0.clone(),
        z: FourierField::zeros(lat),
    };
    let opts = cfg.ledger.clone();
    let (mut lv, mut lz, mut lw) = (
        DiagnosticsLedger::new(opts.clone()),
        DiagnosticsLedger::new(opts.clone()),
        DiagnosticsLedger::new(opts),
    );
    let record = |s: &SplitState, lv: &mut DiagnosticsLedger, lz: &mut DiagnosticsLedger, lw: &mut DiagnosticsLedger| {
        lv.record(s.t, &s.v, None)?;
        lz.record(s.t, &s.z, None)?;
        lw.record(s.t, &s.recombined(), None)
    };
    record(&state, &mut lv, &mut lz, &mut lw)?;
    let mut states = vec![state.clone()];
    let mut blowup = None;
    let heat_at = |t: f64| {
        let mut v = v0.clone();
        for (c, &n2) in v.coeffs_mut().iter_mut().zip(lat.norm_sq()) {
            let s = (-nu * n2 * t).exp();
            for z in c.iter_mut() {
                *z *= s;
            }
        }
        v
    };
    for n in 1..=total {
        let t0 = (n - 1) as f64 * cfg.dt;
        let t = n as f64 * cfg.dt;
        let z = ifrk4_core(&state.z, t0, cfg.dt, &heat, |s, z| {
            let v = heat_at(s);
            dynamics.nonlinear_term(s, &(&v + z))
        })?;
        let v = heat_at(t);
        let bad = !z.is_finite() || (&v + &z).seminorm(1.0) > cfg.ceiling;
        if bad {
            blowup = Some(BlowUpRecord {
                time: t,
                reason: "split state left the admissible set".into(),
            });
            break;
        }
        state = SplitState { t, v, z };
        if cfg.records(n, total) {
            record(&state, &mut lv, &mut lz, &mut lw)?;
        }
        if cfg.keeps(n, total) {
            states.push(state.clone());
        }
    }
    Ok(SplitRun {
        states,
        v_ledger: lv,
        z_ledger: lz,
        w_ledger: lw,
        blowup,
    })
}

/// [`evolve`] with every nonlinear term computed by direct convolution sums.
pub fn galerkin_ode_oracle(dynamics: &Dynamics, w0: &FourierField, cfg: &EvolveConfig) -> Result<Run> {
    let k = w0.lattice().radius();
    if k > ORACLE_MAX_RADIUS {
        return Err(domain(format!("oracle radius {k} exceeds {ORACLE_MAX_RADIUS}")));
    }
    let d = dynamics.clone().with_backend(Backend::Convolution);
    evolve(&d, w0, cfg)
}

/// `linear_fixed_u` driven by a velocity that is itself marched alongside.
///
/// The velocity is advanced by NSE IF-RK4 at `dt/2`, so it is available exactly at every
/// stage time of the `w` march at `dt`. Returns the `w` run and the velocity snapshots at
/// the ledger times; ledger rows carry `||Pw - u||_{H^{1/2}}` in `resid_half`.
pub fn evolve_fixed_u_lockstep(
    nu: f64,
    u0: &FourierField,
    w0: &FourierField,
    cfg: &EvolveConfig,
) -> Result<(Run, Vec<(f64, FourierField)>)> {
    let total = cfg.steps()?;
    let lat = w0.lattice();
    u0.check_same_lattice(w0)?;
    let nse = Ifrk4::new(Dynamics::new(SystemTag::Nse, nu)?, lat, 0.5 * cfg.dt)?;
    let heat = HeatFactors::new(lat, nu, cfg.dt);
    let mut u = u0.leray_project();
    let mut w = w0.clone();
    let mut ledger = DiagnosticsLedger::new(cfg.ledger.clone());
    let record = |ledger: &mut DiagnosticsLedger, t: f64, w: &FourierField, u: &FourierField| -> Result<()> {
        ledger.record(t, w, Some(u))?;
        ledger.rows_mut().last_mut().unwrap().resid_half = Some((&w.leray_project() - u).hnorm(0.5));
        Ok(())
    };
    record(&mut ledger, 0.0, &w, &u)?;
    let mut snapshots = vec![(0.0, w.clone())];
    let mut velocities = vec![(0.0, u.clone())];
    let mut blowup = None;
    let mut last = SolverState::new(0.0, w.clone(), SystemTag::LinearFixedU, nu, cfg.dt)?;
    for n in 1..=total {
        let t0 = (n - 1) as f64 * cfg.dt;
        let t = n as f64 * cfg.dt;
        let th = t0 + 0.5 * cfg.dt;
        let um = nse.advance(t0, &u)?;
        let u1 = nse.advance(th, &um)?;
        let p = PrescribedVelocity::new(vec![t0, th, t], vec![u.clone(), um, u1.clone()])?;
        let d = Dynamics::new(SystemTag::LinearFixedU, nu)?.with_prescribed(Arc::new(p));
        let next = ifrk4_core(&w, t0, cfg.dt, &heat, |s, x| d.nonlinear_term(s, x))?;
        match check_blowup(&last, next, t, cfg.ceiling) {
            Ok(s) => last = s,
            Err(Error::BlowUp { time, reason, .. }) => {
                blowup = Some(BlowUpRecord { time, reason });
                break;
            }
            Err(e) => return Err(e),
        }
        w = last.w.clone();
        u = u1;
        if cfg.records(n, total) {
            record(&mut ledger, t, &w, &u)?;
            velocities.push((t, u.clone()));
        }
        if cfg.keeps(n, total) {
            snapshots.push((t, w.clone()));
        }
    }
    Ok((
        Run {
            snapshots,
            ledger,
            blowup,
            final_state: last,
        },
        velocities,
    ))
}
