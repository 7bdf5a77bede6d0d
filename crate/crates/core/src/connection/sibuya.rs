use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::wkb::AsymptoticSeries;
use crate::covercx::{cover_pow_real, integrate_jets_recorded, plan_path, turn, ArithConfig, CoverPoint, JetValue};
use crate::error::{Error, Result};
use crate::oper::{Equation, ScalarOper, StateSolution};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SibuyaConfig {
    pub z_max: f64,
    pub z_match: f64,
    /// Orders of the asymptotic series in z^{−1/3} and in λz^{−k̂}.
    pub series_order: usize,
    pub lambda_order: usize,
    /// Detours keep |z − w| ≥ guard_frac·|w| for every singular point.
    pub guard_frac: f64,
    pub arith: ArithConfig,
}

impl Default for SibuyaConfig {
    fn default() -> Self {
        SibuyaConfig {
            z_max: 1e4,
            z_match: 1.0,
            series_order: 40,
            lambda_order: 16,
            guard_frac: 0.2,
            arith: ArithConfig::default(),
        }
    }
}

impl SibuyaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.z_match > 0.0 && self.z_max > self.z_match) {
            return Err(Error::Domain(format!(
                "need 0 < z_match < z_max (got {}, {})",
                self.z_match, self.z_max
            )));
        }
        if !(self.guard_frac > 0.0 && self.guard_frac < 0.5) {
            return Err(Error::Domain(format!("guard_frac = {} outside (0, 0.5)", self.guard_frac)));
        }
        self.arith.validate()
    }
}

/// How far Ψ at z_max is from the leading forms z^{2/3}e^{−S} and −e^{−S},
/// and the size of the last asymptotic-series shell used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticCheck {
    pub value_ratio: f64,
    pub derivative_ratio: f64,
    pub series_tail: f64,
}

/// The subdominant solution at fixed λ, integrated inward along the positive
/// axis from z_max and cached there down to z_match.
#[derive(Debug, Clone)]
pub struct SibuyaSolution {
    pub lam: Complex64,
    pub z_max: f64,
    pub z_match: f64,
    pub equation: Equation,
    pub twist: f64,
    /// Jets at the accepted steps on the positive axis, by decreasing modulus.
    pub jets: Vec<(CoverPoint, JetValue)>,
    pub asymptotic: AsymptoticCheck,
    op: ScalarOper,
    cfg: SibuyaConfig,
}

pub fn build_sibuya(sol: &StateSolution, lam: Complex64, eq: Equation, z_max: f64, z_match: f64) -> Result<SibuyaSolution> {
    let cfg = SibuyaConfig {
        z_max,
        z_match,
        ..SibuyaConfig::default()
    };
    SibuyaSolution::new(ScalarOper::for_equation(sol, eq), lam, eq, &cfg)
}

impl SibuyaSolution {
    pub fn new(op: ScalarOper, lam: Complex64, eq: Equation, cfg: &SibuyaConfig) -> Result<Self> {
        cfg.validate()?;
        let series = AsymptoticSeries::new(&op, cfg.series_order, cfg.lambda_order)?;
        let top = CoverPoint::real(cfg.z_max);
        let [v, d1, d2] = series.jet(top, lam);
        let init = JetValue::new(v, d1, d2);
        let e_s = (-series.wkb.s(top, lam)).exp();
        let asymptotic = AsymptoticCheck {
            value_ratio: (v / (cover_pow_real(top, 2.0 / 3.0) * e_s) - 1.0).norm(),
            derivative_ratio: (d1 / (-e_s) - 1.0).norm(),
            series_tail: series.tail_estimate(top, lam),
        };
        if !init.is_finite() {
            return Err(Error::ToleranceFailure(format!(
                "asymptotic jet at z_max = {} is not finite",
                cfg.z_max
            )));
        }
        let singular = op.singular_points();
        let legs = plan_path(top, CoverPoint::real(cfg.z_match), &singular, cfg.guard_frac)?;
        let mut jets = vec![(top, init)];
        let rhs = op.rhs(lam);
        let mut cur = init;
        for leg in &legs {
            let (end, trace) = integrate_jets_recorded(&rhs, &[cur], leg, &cfg.arith)?;
            for (p, j) in trace {
                if p.arg == 0.0 && p.modulus < jets.last().unwrap().0.modulus {
                    jets.push((p, j[0]));
                }
            }
            cur = end[0];
        }
        let bottom = CoverPoint::real(cfg.z_match);
        if jets.last().unwrap().0 != bottom {
            jets.push((bottom, cur));
        }
        if !cur.is_finite() {
            return Err(Error::ToleranceFailure(
                "Sibuya jet overflowed during inward integration".into(),
            ));
        }
        Ok(SibuyaSolution {
            lam,
            z_max: cfg.z_max,
            z_match: cfg.z_match,
            equation: eq,
            twist: 0.0,
            jets,
            asymptotic,
            op,
            cfg: *cfg,
        })
    }

    pub fn oper(&self) -> &ScalarOper {
        &self.op
    }

    pub fn config(&self) -> &SibuyaConfig {
        &self.cfg
    }

    /// Jet at z_match on the positive axis.
    pub fn at_match(&self) -> JetValue {
        self.jets.last().unwrap().1
    }

    /// Jet at any cover point with |z| ≤ z_max, continued from the nearest
    /// cached point above it.
    pub fn jet_at(&self, z: CoverPoint) -> Result<JetValue> {
        if z.modulus > self.z_max {
            return Err(Error::OutOfDomain(format!("|z| = {} > z_max = {}", z.modulus, self.z_max)));
        }
        let start = self
            .jets
            .iter()
            .rev()
            .find(|(p, _)| p.modulus >= z.modulus)
            .copied()
            .unwrap_or(self.jets[0]);
        if start.0 == z {
            return Ok(start.1);
        }
        let legs = plan_path(start.0, z, &self.op.singular_points(), self.cfg.guard_frac)?;
        let rhs = self.op.rhs(self.lam);
        let mut cur = start.1;
        for leg in &legs {
            cur = crate::covercx::integrate_ode(&rhs, cur, leg, &self.cfg.arith)?;
        }
        Ok(cur)
    }

    /// Rebuilds the solution at another λ with the same equation and settings.
    pub fn at_lambda(&self, lam: Complex64) -> Result<SibuyaSolution> {
        SibuyaSolution::new(self.op.clone(), lam, self.equation, &self.cfg)
    }

    /// Jet of Ψ_t(z,λ) = e^{−2πit}Ψ(e^{2πit}z, e^{2πitk̂}λ); the solution is
    /// rebuilt at the rotated λ when it differs from the cached one.
    pub fn twisted_jet(&self, t: f64, z: CoverPoint, lam: Complex64) -> Result<JetValue> {
        let lam_t = turn(t * self.op.khat()) * lam;
        let rebuilt;
        let base = if (lam_t - self.lam).norm() <= 1e-15 * (1.0 + lam_t.norm()) {
            self
        } else {
            rebuilt = self.at_lambda(lam_t)?;
            &rebuilt
        };
        let s = turn(t);
        let j = base.jet_at(z.rotate(t))?;
        Ok(JetValue::new(j.value / s, j.d1, j.d2 * s))
    }
}
