//! Points of the universal cover of ℂ× and the path integrator that transports
//! solutions of third-order linear equations along them.

mod integrate;
mod path;

pub use integrate::{integrate_jets, integrate_jets_recorded, integrate_ode, JetRhs, JetValue};
pub use path::{plan_path, ODEPath, PathKind};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PrecisionMode {
    #[default]
    Double,
    /// Compensated accumulation of the integrator state.
    Extended,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArithConfig {
    pub precision_mode: PrecisionMode,
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for ArithConfig {
    fn default() -> Self {
        // Every system we transport is linear, so relative control is the
        // meaningful one; abs_tol only guards against exact zeros.
        ArithConfig {
            precision_mode: PrecisionMode::Double,
            abs_tol: 1e-300,
            rel_tol: 1e-12,
        }
    }
}

impl ArithConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) {
            return Err(Error::Domain(format!(
                "tolerances must be positive (abs_tol={}, rel_tol={})",
                self.abs_tol, self.rel_tol
            )));
        }
        Ok(())
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }
}

/// A point of the universal cover: modulus and an unreduced argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverPoint {
    pub modulus: f64,
    pub arg: f64,
}

impl CoverPoint {
    pub fn new(modulus: f64, arg: f64) -> Self {
        debug_assert!(modulus > 0.0, "cover point needs positive modulus");
        CoverPoint { modulus, arg }
    }

    pub fn try_new(modulus: f64, arg: f64) -> Result<Self> {
        if !(modulus > 0.0) || !modulus.is_finite() || !arg.is_finite() {
            return Err(Error::Domain(format!("invalid cover point ({modulus}, {arg})")));
        }
        Ok(CoverPoint { modulus, arg })
    }

    pub fn real(x: f64) -> Self {
        CoverPoint::new(x, 0.0)
    }

    /// Lift with the principal argument in (−π, π].
    pub fn from_complex(z: Complex64) -> Self {
        CoverPoint::new(z.norm(), z.arg())
    }

    /// Lift choosing the sheet whose argument is closest to `reference`.
    pub fn from_complex_near(z: Complex64, reference: f64) -> Self {
        let a = z.arg();
        let turns = ((reference - a) / (2.0 * PI)).round();
        CoverPoint::new(z.norm(), a + 2.0 * PI * turns)
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::from_polar(self.modulus, self.arg)
    }

    /// ln|z| + i·arg, the logarithm on the cover.
    pub fn ln(&self) -> Complex64 {
        Complex64::new(self.modulus.ln(), self.arg)
    }

    pub fn rotate(&self, t: f64) -> Self {
        rotate(*self, t)
    }

    pub fn scale(&self, f: f64) -> Self {
        CoverPoint::new(self.modulus * f, self.arg)
    }
}

pub fn cover_pow(z: CoverPoint, alpha: Complex64) -> Complex64 {
    (alpha * z.ln()).exp()
}

pub fn cover_pow_real(z: CoverPoint, alpha: f64) -> Complex64 {
    Complex64::from_polar(z.modulus.powf(alpha), alpha * z.arg)
}

pub fn rotate(z: CoverPoint, t: f64) -> CoverPoint {
    CoverPoint {
        modulus: z.modulus,
        arg: z.arg + 2.0 * PI * t,
    }
}

/// e^{2πi t}
pub fn turn(t: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * t)
}
