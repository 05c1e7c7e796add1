//! Scenario files: flat UTF-8 `key = value` lines, `#` starts a comment.
//!
//! | key | value | default |
//! |-----|-------|---------|
//! | `system` | `nse`, `magnetization`, `linear_fixed_u`, `simplified`, `burgers`, `toy` | `simplified` |
//! | `K` | truncation radius | `8` |
//! | `M` | grid size, must exceed `3K` | smallest 7-smooth `M >= 3K + 1` |
//! | `dt`, `t_end` | step and end time, `t_end` a multiple of `dt` | `1e-3`, `0.1` |
//! | `nu` | viscosity | `1` |
//! | `seed` | seed of every random draw | `0` |
//! | `init` | initial datum, see [`InitSpec`] | `taylor_green` |
//! | `velocity` | prescribed velocity for `linear_fixed_u` | `taylor_green` |
//! | `velocity_mode` | `nse` (velocity evolved alongside) or `steady` | `nse` |
//! | `snapshot_every` | steps between snapshots, or `none` | `none` |
//! | `ledger_every` | steps between ledger rows | `1` |
//! | `output` | output directory | `out` |
//! | `checks` | comma list of check names, `default` or `none` | `default` |
//! | `ceiling` | blow-up threshold on `||w||_1` | `1e6` |
//! | `path` | `direct`, `split`, `oracle` or `dual` | `direct` |
//! | `sup` | `grid` or `refined` | `grid` |
//! | `higher_norms` | log seminorms of order 2.5..6 | `false` |
//! | `blowup` | `auto`, `record` or `fail` | `auto` |
//!
//! Unknown keys and repeated keys are errors.

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use magflow_core::diagnostics::SupNorm;
use magflow_core::dynamics::SystemTag;
use magflow_core::lattice::smooth_grid_size;
use magflow_core::timestepper::DEFAULT_CEILING;

use crate::error::{invalid, io_at, HarnessError, Result};

/// `dt nu K^2` above which a warning is printed. The integrating factor keeps the heat
/// part stable at any step, but the Lawson stages lose order once `nu |k|^2 dt` is O(1).
pub const STABILITY_GUARD: f64 = 2.0;

#[derive(Clone, Debug, PartialEq)]
pub enum InitSpec {
    TaylorGreen,
    Abc { a: f64, b: f64, c: f64 },
    /// Coefficients `|w_k| ~ |k|^-slope` on `k_min <= |k| <= k_max`. `seed` falls back to
    /// the scenario seed.
    RandomBandlimited {
        k_min: f64,
        k_max: f64,
        slope: f64,
        divfree_amp: f64,
        gradient_amp: f64,
        seed: Option<u64>,
    },
    Snapshot(PathBuf),
}

impl InitSpec {
    pub fn random(k_min: f64, k_max: f64, slope: f64, divfree_amp: f64, gradient_amp: f64, seed: u64) -> Self {
        Self::RandomBandlimited {
            k_min,
            k_max,
            slope,
            divfree_amp,
            gradient_amp,
            seed: Some(seed),
        }
    }
}

fn number<T: FromStr>(s: &str, what: &str) -> Result<T> {
    s.trim().parse().map_err(|_| invalid(format!("{what}: cannot parse {s:?}")))
}

impl FromStr for InitSpec {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, args) = match s.find('(') {
            Some(i) => {
                let rest = s[i + 1..]
                    .strip_suffix(')')
                    .ok_or_else(|| invalid(format!("init {s:?}: missing ')'")))?;
                (s[..i].trim(), Some(rest))
            }
            None => (s, None),
        };
        let nums = |n: &[usize]| -> Result<Vec<f64>> {
            let v: Vec<f64> = match args {
                None => vec![],
                Some(a) if a.trim().is_empty() => vec![],
                Some(a) => a.split(',').map(|x| number(x, name)).collect::<Result<_>>()?,
            };
            if !n.contains(&v.len()) {
                return Err(invalid(format!("{name} takes {n:?} arguments, got {}", v.len())));
            }
            Ok(v)
        };
        match name {
            "taylor_green" => {
                nums(&[0])?;
                Ok(Self::TaylorGreen)
            }
            "abc" => {
                let v = nums(&[0, 3])?;
                let (a, b, c) = if v.is_empty() { (1.0, 1.0, 1.0) } else { (v[0], v[1], v[2]) };
                Ok(Self::Abc { a, b, c })
            }
            "random_bandlimited" => {
                let raw: Vec<&str> = args.unwrap_or("").split(',').collect();
                if raw.len() != 5 && raw.len() != 6 {
                    return Err(invalid("random_bandlimited takes 5 or 6 arguments"));
                }
                let f = |i: usize| number::<f64>(raw[i], name);
                let seed = raw.get(5).map(|x| number::<u64>(x, "seed")).transpose()?;
                Ok(Self::RandomBandlimited {
                    k_min: f(0)?,
                    k_max: f(1)?,
                    slope: f(2)?,
                    divfree_amp: f(3)?,
                    gradient_amp: f(4)?,
                    seed,
                })
            }
            "snapshot" => match args.map(str::trim) {
                Some(p) if !p.is_empty() => Ok(Self::Snapshot(PathBuf::from(p))),
                _ => Err(invalid("snapshot needs a path")),
            },
            _ => Err(invalid(format!("unknown initial datum {name:?}"))),
        }
    }
}

impl fmt::Display for InitSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::TaylorGreen => write!(f, "taylor_green"),
            Self::Abc { a, b, c } => write!(f, "abc({a:?}, {b:?}, {c:?})"),
            Self::RandomBandlimited {
                k_min,
                k_max,
                slope,
                divfree_amp,
                gradient_amp,
                seed,
            } => {
                write!(f, "random_bandlimited({k_min:?}, {k_max:?}, {slope:?}, {divfree_amp:?}, {gradient_amp:?}")?;
                if let Some(s) = seed {
                    write!(f, ", {s}")?;
                }
                write!(f, ")")
            }
            Self::Snapshot(p) => write!(f, "snapshot({})", p.display()),
        }
    }
}

macro_rules! keyword_enum {
    ($name:ident { $($var:ident => $s:literal),+ $(,)? }) => {
        #[derive(Clone, Copy, Debug, PartialEq, Eq)]
        pub enum $name { $($var),+ }

        impl FromStr for $name {
            type Err = HarnessError;
            fn from_str(s: &str) -> Result<Self> {
                match s.trim() {
                    $($s => Ok(Self::$var),)+
                    other => Err(invalid(format!(concat!(stringify!($name), " {:?} not one of ", $($s, " "),+), other))),
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $(Self::$var => $s),+ })
            }
        }
    };
}

keyword_enum!(RunPath { Direct => "direct", Split => "split", Oracle => "oracle", Dual => "dual" });
keyword_enum!(VelocityMode { Nse => "nse", Steady => "steady" });
keyword_enum!(BlowupPolicy { Auto => "auto", Record => "record", Fail => "fail" });
keyword_enum!(CheckName {
    MaxPrinciple => "max_principle",
    SupMonotone => "sup_monotone",
    Momentum => "momentum",
    Finite => "finite",
    Equivalence => "equivalence",
});

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub system: SystemTag,
    pub k: usize,
    pub m: Option<usize>,
    pub dt: f64,
    pub t_end: f64,
    pub nu: f64,
    pub seed: u64,
    pub init: InitSpec,
    pub velocity: InitSpec,
    pub velocity_mode: VelocityMode,
    pub snapshot_every: Option<usize>,
    pub ledger_every: usize,
    pub output: PathBuf,
    /// `None` selects the defaults of the system.
    pub checks: Option<Vec<CheckName>>,
    pub ceiling: f64,
    pub path: RunPath,
    pub sup: SupNorm,
    pub higher_norms: bool,
    pub blowup: BlowupPolicy,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            system: SystemTag::Simplified,
            k: 8,
            m: None,
            dt: 1e-3,
            t_end: 0.1,
            nu: 1.0,
            seed: 0,
            init: InitSpec::TaylorGreen,
            velocity: InitSpec::TaylorGreen,
            velocity_mode: VelocityMode::Nse,
            snapshot_every: None,
            ledger_every: 1,
            output: PathBuf::from("out"),
            checks: None,
            ceiling: DEFAULT_CEILING,
            path: RunPath::Direct,
            sup: SupNorm::Grid,
            higher_norms: false,
            blowup: BlowupPolicy::Auto,
        }
    }
}

pub const KEYS: [&str; 19] = [
    "system",
    "K",
    "M",
    "dt",
    "t_end",
    "nu",
    "seed",
    "init",
    "velocity",
    "velocity_mode",
    "snapshot_every",
    "ledger_every",
    "output",
    "checks",
    "ceiling",
    "path",
    "sup",
    "higher_norms",
    "blowup",
];

fn parse_bool(v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(invalid(format!("expected a boolean, got {v:?}"))),
    }
}

impl ScenarioConfig {
    /// Parse a scenario file on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen = HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| HarnessError::Config { line: i + 1, msg };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key = value, got {line:?}")))?;
            let key = key.trim();
            if !seen.insert(key.to_string()) {
                return Err(err(format!("duplicate key {key:?}")));
            }
            cfg.set(key, value.trim()).map_err(|e| err(e.to_string()))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_at(path))?;
        Self::parse(&text)
    }

    /// Set one key; values use the file syntax.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "system" => self.system = v.parse().map_err(|e: magflow_core::Error| invalid(e.to_string()))?,
            "K" => self.k = number(v, key)?,
            "M" => self.m = Some(number(v, key)?),
            "dt" => self.dt = number(v, key)?,
            "t_end" => self.t_end = number(v, key)?,
            "nu" => self.nu = number(v, key)?,
            "seed" => self.seed = number(v, key)?,
            "init" => self.init = v.parse()?,
            "velocity" => self.velocity = v.parse()?,
            "velocity_mode" => self.velocity_mode = v.parse()?,
            "snapshot_every" => {
                self.snapshot_every = if v == "none" { None } else { Some(number(v, key)?) };
            }
            "ledger_every" => self.ledger_every = number(v, key)?,
            "output" => self.output = PathBuf::from(v),
            "checks" => {
                self.checks = match v {
                    "default" => None,
                    "none" => Some(vec![]),
                    _ => Some(v.split(',').map(str::parse).collect::<Result<_>>()?),
                }
            }
            "ceiling" => self.ceiling = number(v, key)?,
            "path" => self.path = v.parse()?,
            "sup" => {
                self.sup = match v {
                    "grid" => SupNorm::Grid,
                    "refined" => SupNorm::Refined,
                    _ => return Err(invalid(format!("sup {v:?} not one of grid refined"))),
                }
            }
            "higher_norms" => self.higher_norms = parse_bool(v)?,
            "blowup" => self.blowup = v.parse()?,
            _ => return Err(invalid(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(invalid("K must be positive"));
        }
        if let Some(m) = self.m {
            if m <= 3 * self.k {
                return Err(invalid(format!("M = {m} must exceed 3K = {}", 3 * self.k)));
            }
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(invalid(format!("dt = {} must be positive", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(invalid(format!("t_end = {} must be nonnegative", self.t_end)));
        }
        let n = (self.t_end / self.dt).round();
        if (n * self.dt - self.t_end).abs() > 1e-9 * self.t_end.max(self.dt) {
            return Err(invalid(format!("t_end = {} is not a multiple of dt = {}", self.t_end, self.dt)));
        }
        if !(self.nu >= 0.0 && self.nu.is_finite()) {
            return Err(invalid(format!("nu = {} must be nonnegative", self.nu)));
        }
        if self.ledger_every == 0 || self.snapshot_every == Some(0) {
            return Err(invalid("cadences must be positive"));
        }
        if !(self.ceiling > 0.0) {
            return Err(invalid("ceiling must be positive"));
        }
        match self.path {
            RunPath::Split if !matches!(self.system, SystemTag::Simplified | SystemTag::Magnetization) => {
                return Err(invalid("split path needs simplified or magnetization"))
            }
            RunPath::Dual if self.system != SystemTag::Magnetization => {
                return Err(invalid("dual path needs system = magnetization"))
            }
            RunPath::Oracle if self.k > magflow_core::timestepper::ORACLE_MAX_RADIUS => {
                return Err(invalid("oracle path is limited to K <= 4"))
            }
            _ => {}
        }
        if self.checks().contains(&CheckName::Equivalence) && self.path != RunPath::Dual {
            return Err(invalid("the equivalence check needs path = dual"));
        }
        Ok(())
    }

    pub fn grid_size(&self) -> usize {
        self.m.unwrap_or_else(|| smooth_grid_size(3 * self.k + 1))
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    pub fn checks(&self) -> Vec<CheckName> {
        match &self.checks {
            Some(c) => c.clone(),
            None => {
                let mut c = vec![CheckName::Finite, CheckName::MaxPrinciple, CheckName::SupMonotone, CheckName::Momentum];
                if self.path == RunPath::Dual {
                    c.push(CheckName::Equivalence);
                }
                c
            }
        }
    }

    /// Whether a blow-up fails the run.
    pub fn blowup_fails(&self) -> bool {
        match self.blowup {
            BlowupPolicy::Auto => self.system == SystemTag::Simplified,
            BlowupPolicy::Record => false,
            BlowupPolicy::Fail => true,
        }
    }

    pub fn stability_number(&self) -> f64 {
        self.dt * self.nu * (self.k * self.k) as f64
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        let s = self.stability_number();
        if s > STABILITY_GUARD {
            w.push(format!("dt*nu*K^2 = {s:.3} exceeds {STABILITY_GUARD}; expect reduced temporal order"));
        }
        w
    }

    /// Canonical text form: every key, in table order. Parses back to `self`.
    pub fn to_text(&self) -> String {
        let checks = match &self.checks {
            None => "default".to_string(),
            Some(c) if c.is_empty() => "none".to_string(),
            Some(c) => c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","),
        };
        let sup = match self.sup {
            SupNorm::Grid => "grid",
            SupNorm::Refined => "refined",
        };
        let mut s = String::new();
        let mut put = |k: &str, v: String| s.push_str(&format!("{k} = {v}\n"));
        put("system", self.system.to_string());
        put("K", self.k.to_string());
        put("M", self.grid_size().to_string());
        put("dt", format!("{:?}", self.dt));
        put("t_end", format!("{:?}", self.t_end));
        put("nu", format!("{:?}", self.nu));
        put("seed", self.seed.to_string());
        put("init", self.init.to_string());
        put("velocity", self.velocity.to_string());
        put("velocity_mode", self.velocity_mode.to_string());
        put("snapshot_every", self.snapshot_every.map_or("none".into(), |n| n.to_string()));
        put("ledger_every", self.ledger_every.to_string());
        put("output", self.output.display().to_string());
        put("checks", checks);
        put("ceiling", format!("{:?}", self.ceiling));
        put("path", self.path.to_string());
        put("sup", sup.to_string());
        put("higher_norms", self.higher_norms.to_string());
        put("blowup", self.blowup.to_string());
        s
    }
}
