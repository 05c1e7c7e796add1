//! Right-hand sides of the six evolution systems.
//!
//! Every system has the form `w_t = N(w) - nu Lambda^2 w`:
//!
//! | tag | `N(w)` |
//! |-----|--------|
//! | `nse` | `-P[(u.grad)u]`, `u = Pw` (the state is projected first) |
//! | `magnetization` | `-(Pw.grad)w - (grad Pw)^T w` |
//! | `linear_fixed_u` | `-(u.grad)w - (grad u)^T w`, `u(t)` prescribed |
//! | `simplified` | `-(Pw.grad)w - grad(|w|^2/2)` |
//! | `burgers` | `-(w.grad)w` |
//! | `toy` | `-(grad Pw)^T w` |

pub mod convolution;
pub mod products;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rustfft::num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::field::FourierField;

pub use products::{
    advect, dot, exact_product_lattice, grad_half_sq, grad_transpose_mul, pressure_from_velocity, scalar_advect,
    Pressure,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SystemTag {
    Nse,
    Magnetization,
    LinearFixedU,
    Simplified,
    Burgers,
    Toy,
}

impl SystemTag {
    pub const ALL: [SystemTag; 6] = [
        SystemTag::Nse,
        SystemTag::Magnetization,
        SystemTag::LinearFixedU,
        SystemTag::Simplified,
        SystemTag::Burgers,
        SystemTag::Toy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SystemTag::Nse => "nse",
            SystemTag::Magnetization => "magnetization",
            SystemTag::LinearFixedU => "linear_fixed_u",
            SystemTag::Simplified => "simplified",
            SystemTag::Burgers => "burgers",
            SystemTag::Toy => "toy",
        }
    }

    /// Systems whose zeroth Fourier mode is invariant.
    pub fn conserves_momentum(self) -> bool {
        matches!(self, SystemTag::Nse | SystemTag::Simplified)
    }
}

impl fmt::Display for SystemTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SystemTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        SystemTag::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| domain(format!("unknown system tag '{s}'")))
    }
}

/// A velocity history given as snapshots, linearly interpolated in the coefficients.
#[derive(Clone, Debug)]
pub struct PrescribedVelocity {
    times: Vec<f64>,
    snapshots: Vec<FourierField>,
}

impl PrescribedVelocity {
    /// Relative tolerance under which a query time is treated as a snapshot time.
    const TIME_MATCH: f64 = 1e-12;

    pub fn new(times: Vec<f64>, snapshots: Vec<FourierField>) -> Result<Self> {
        if times.is_empty() || times.len() != snapshots.len() {
            return Err(domain("prescribed velocity needs one snapshot per time"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) || times.iter().any(|t| !t.is_finite()) {
            return Err(domain("prescribed velocity times must be finite and strictly increasing"));
        }
        let lat = snapshots[0].lattice();
        for s in &snapshots {
            s.check_same_lattice(&snapshots[0])?;
            debug_assert!(s.lattice().same_as(lat));
        }
        Ok(Self { times, snapshots })
    }

    /// A velocity frozen in time; valid for every `t`.
    pub fn steady(u: FourierField) -> Self {
        Self {
            times: vec![0.0],
            snapshots: vec![u],
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn snapshots(&self) -> &[FourierField] {
        &self.snapshots
    }

    pub fn at(&self, t: f64) -> Result<FourierField> {
        let n = self.times.len();
        if n == 1 {
            return Ok(self.snapshots[0].clone());
        }
        let (start, end) = (self.times[0], self.times[n - 1]);
        let tol = Self::TIME_MATCH * start.abs().max(end.abs()).max(1.0);
        if t < start - tol || t > end + tol || !t.is_finite() {
            return Err(Error::OutOfRange { t, start, end });
        }
        let j = self.times.partition_point(|&s| s <= t);
        // exact hits (and roundoff-level misses) return the stored snapshot
        for cand in [j.saturating_sub(1), j.min(n - 1)] {
            if (self.times[cand] - t).abs() <= tol {
                return Ok(self.snapshots[cand].clone());
            }
        }
        let hi = j.clamp(1, n - 1);
        let lo = hi - 1;
        let theta = (t - self.times[lo]) / (self.times[hi] - self.times[lo]);
        let mut out = self.snapshots[lo].scale(1.0 - theta);
        out.axpy(theta, &self.snapshots[hi]);
        Ok(out)
    }
}

/// How the nonlinear terms are evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Backend {
    /// Grid products with dealiasing.
    Pseudospectral,
    /// Direct convolution sums (reference semantics).
    Convolution,
}

/// One evolution system with its parameters.
#[derive(Clone, Debug)]
pub struct Dynamics {
    tag: SystemTag,
    nu: f64,
    prescribed: Option<Arc<PrescribedVelocity>>,
    nonlinear: bool,
    backend: Backend,
}

impl Dynamics {
    pub fn new(tag: SystemTag, nu: f64) -> Result<Self> {
        if !(nu >= 0.0) || !nu.is_finite() {
            return Err(domain(format!("viscosity {nu} must be finite and nonnegative")));
        }
        Ok(Self {
            tag,
            nu,
            prescribed: None,
            nonlinear: true,
            backend: Backend::Pseudospectral,
        })
    }

    pub fn with_prescribed(mut self, u: Arc<PrescribedVelocity>) -> Self {
        self.prescribed = Some(u);
        self
    }

    /// Drop the nonlinear terms, leaving the heat flow.
    pub fn linear_only(mut self) -> Self {
        self.nonlinear = false;
        self
    }

    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self
    }

    pub fn tag(&self) -> SystemTag {
        self.tag
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn is_nonlinear(&self) -> bool {
        self.nonlinear
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn prescribed(&self) -> Option<&Arc<PrescribedVelocity>> {
        self.prescribed.as_ref()
    }

    pub fn validate(&self) -> Result<()> {
        if self.tag == SystemTag::LinearFixedU && self.prescribed.is_none() {
            return Err(Error::MissingPrescribedVelocity);
        }
        Ok(())
    }

    /// Prescribed velocity at `t`, if the system has one.
    pub fn velocity_at(&self, t: f64) -> Result<Option<FourierField>> {
        self.prescribed.as_ref().map(|p| p.at(t)).transpose()
    }

    /// The state actually evolved: `nse` works on the projected field.
    pub fn admissible(&self, w: &FourierField) -> FourierField {
        match self.tag {
            SystemTag::Nse => w.leray_project(),
            _ => w.clone(),
        }
    }

    /// Nonlinear part `N(t, w)`.
    pub fn nonlinear_term(&self, t: f64, w: &FourierField) -> Result<FourierField> {
        self.validate()?;
        if !self.nonlinear {
            return Ok(FourierField::zeros(w.lattice()));
        }
        let velocity = if self.tag == SystemTag::LinearFixedU {
            let u = self.velocity_at(t)?.expect("validated");
            u.check_same_lattice(w)?;
            Some(u)
        } else {
            None
        };
        match self.backend {
            Backend::Convolution => convolution::nonlinear_direct(self.tag, w, velocity.as_ref()),
            Backend::Pseudospectral => {
                let out = match self.tag {
                    SystemTag::Nse => products::nse_term(&w.leray_project())?.leray_project(),
                    SystemTag::Magnetization => products::magnetization_term(&w.leray_project(), w)?,
                    SystemTag::LinearFixedU => products::magnetization_term(velocity.as_ref().unwrap(), w)?,
                    SystemTag::Simplified => products::simplified_term(&w.leray_project(), w)?,
                    SystemTag::Burgers => advect(w, w)?,
                    SystemTag::Toy => grad_transpose_mul(&w.leray_project(), w)?,
                };
                Ok(-&out)
            }
        }
    }

    /// Full right-hand side `N(t, w) - nu Lambda^2 w`.
    pub fn rhs(&self, t: f64, w: &FourierField) -> Result<FourierField> {
        let w = self.admissible(w);
        let mut out = self.nonlinear_term(t, &w)?;
        let nu = self.nu;
        let heat = w.map_modes(|_, n2| Complex64::new(-nu * n2, 0.0));
        out += &heat;
        Ok(out)
    }
}

/// Right-hand side of `tag` at `(t, w)` with viscosity `nu`; see [`Dynamics::rhs`].
pub fn rhs(tag: SystemTag, w: &FourierField, t: f64, nu: f64, prescribed: Option<Arc<PrescribedVelocity>>) -> Result<FourierField> {
    let mut d = Dynamics::new(tag, nu)?;
    if let Some(p) = prescribed {
        d = d.with_prescribed(p);
    }
    d.rhs(t, w)
}
