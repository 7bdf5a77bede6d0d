use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{r_to_rbar, OperParams, RPair};
use crate::error::{Error, Result};

/// Coordinates of the x-variable form of the ground-state oper.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LegacyParams {
    pub m: f64,
    pub e: Complex64,
    pub ell: [Complex64; 2],
    /// (−ℓ₁+2, ℓ₁−ℓ₂+1, ℓ₂)
    pub ell_tilde: [Complex64; 3],
}

fn energy_scale(k: f64) -> f64 {
    -((k + 3.0) / 3.0).powf(3.0 * (k + 2.0))
}

fn tilde(ell: [Complex64; 2]) -> [Complex64; 3] {
    [2.0 - ell[0], ell[0] - ell[1] + 1.0, ell[1]]
}

/// (M, E, ℓ₁, ℓ₂) ↦ oper parameters, the r-pair and the ℓ̃ triple.
pub fn legacy_convert(m: f64, e: Complex64, ell: [Complex64; 2]) -> Result<(OperParams, RPair, [Complex64; 3])> {
    if !(m > 0.0) {
        return Err(Error::Domain(format!("M = {m} must be positive")));
    }
    let k = -(3.0 * m + 2.0) / (1.0 + m);
    let lambda = e / energy_scale(k);
    let f = (k + 3.0) / 3.0;
    let r = RPair {
        r1: (ell[0] - 1.0) * f + 1.0,
        r2: (ell[1] - 1.0) * f + 1.0,
    };
    let (r1bar, r2bar) = r_to_rbar(&r);
    Ok((OperParams { k, r1bar, r2bar, lambda }, r, tilde(ell)))
}

pub fn oper_to_legacy(p: &OperParams, r: &RPair) -> Result<LegacyParams> {
    p.validate()?;
    let k = p.k;
    let m = -(k + 2.0) / (k + 3.0);
    let f = 3.0 / (k + 3.0);
    let ell = [(r.r1 - 1.0) * f + 1.0, (r.r2 - 1.0) * f + 1.0];
    Ok(LegacyParams {
        m,
        e: p.lambda * energy_scale(k),
        ell,
        ell_tilde: tilde(ell),
    })
}
