//! Solutions at z = 0 (generalized Frobenius series) and at z = +∞ (Sibuya
//! solutions), and the connection coefficients Q_i(λ), Q*_i(λ) between them.

mod frobenius;
mod qtable;
mod sibuya;
mod wkb;

#[cfg(test)]
mod tests;

pub use frobenius::{build_frobenius, monodromy_eigencheck, FrobeniusSeries};
pub use qtable::QTable;
pub use sibuya::{build_sibuya, AsymptoticCheck, SibuyaConfig, SibuyaSolution};
pub use wkb::{build_wkb, AsymptoticSeries, WKBPrimitive};

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covercx::{integrate_jets, plan_path, turn, CoverPoint, JetValue};
use crate::error::{Error, Result};
use crate::oper::{Equation, ScalarOper, StateSolution};
use crate::params::{check_genericity, indices_from_r, r_from_rbar, Indices, WeylElement};

type C = Complex64;

/// The constant in Wr[Ψ_{−1/2}, Ψ_{1/2}] = κΨ* for solutions normalized by
/// Ψ ~ z^{2/3}e^{−S}: κ = e^{−2πi/3} − e^{2πi/3} = −i√3.
pub fn psi_system_constant() -> C {
    turn(-1.0 / 3.0) - turn(1.0 / 3.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConnectionConfig {
    pub m_trunc: usize,
    /// Frobenius evaluation radius; chosen adaptively when absent.
    pub z_eval: Option<f64>,
    /// Target truncation error of the series at z_eval.
    pub series_tol: f64,
    pub cond_max: f64,
    pub sibuya: SibuyaConfig,
}

impl Default for ConnectionConfig {
    fn default() -> Self {
        ConnectionConfig {
            m_trunc: 40,
            z_eval: None,
            series_tol: 1e-9,
            cond_max: 1e8,
            sibuya: SibuyaConfig::default(),
        }
    }
}

impl ConnectionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m_trunc < 4 {
            return Err(Error::Domain(format!("m_trunc = {} < 4", self.m_trunc)));
        }
        if let Some(z) = self.z_eval {
            if !(z > 0.0 && z <= self.sibuya.z_match) {
                return Err(Error::Domain(format!("z_eval = {z} must lie in (0, z_match]")));
            }
        }
        self.sibuya.validate()
    }
}

/// Indices at 0 with Re β₁ > Re β₂ > Re β₃.
pub fn default_indices(sol: &StateSolution) -> Indices {
    indices_from_r(&r_from_rbar(sol.params.r1bar, sol.params.r2bar))
}

/// Expansion coefficients of one Sibuya solution in one Frobenius basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Connection {
    pub q: [C; 3],
    pub cond: f64,
    pub z_eval: f64,
}

/// Q and Q* at one λ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QPoint {
    pub lam: C,
    pub q: [C; 3],
    pub qstar: [C; 3],
    pub cond_primal: f64,
    pub cond_dual: f64,
}

/// Everything λ-independent needed to compute Q_i(λ) and Q*_i(λ).
#[derive(Debug, Clone)]
pub struct QEvaluator {
    pub sol: StateSolution,
    pub indices: Indices,
    pub primal: [FrobeniusSeries; 3],
    pub dual: [FrobeniusSeries; 3],
    pub cfg: ConnectionConfig,
    ops: [ScalarOper; 2],
}

fn series_triple(op: &ScalarOper, betas: &[C; 3], eq: Equation, m_trunc: usize) -> Result<[FrobeniusSeries; 3]> {
    Ok([
        FrobeniusSeries::from_oper(op, betas[0], eq, m_trunc)?,
        FrobeniusSeries::from_oper(op, betas[1], eq, m_trunc)?,
        FrobeniusSeries::from_oper(op, betas[2], eq, m_trunc)?,
    ])
}

fn cond3(m: &Matrix3<C>) -> f64 {
    let sv = m.svd(false, false).singular_values;
    let hi = sv.iter().cloned().fold(0.0, f64::max);
    let lo = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

impl QEvaluator {
    pub fn new(sol: &StateSolution, cfg: &ConnectionConfig) -> Result<Self> {
        Self::with_indices(sol, default_indices(sol), cfg)
    }

    pub fn with_indices(sol: &StateSolution, indices: Indices, cfg: &ConnectionConfig) -> Result<Self> {
        cfg.validate()?;
        let khat = sol.params.khat();
        check_genericity(&indices, khat, 1e-8, cfg.m_trunc).map_err(|v| Error::Resonance(format!("{v:?}")))?;
        let star = Indices {
            beta: indices.beta_star,
            beta_star: indices.beta,
        };
        check_genericity(&star, khat, 1e-8, cfg.m_trunc).map_err(|v| Error::Resonance(format!("dual: {v:?}")))?;
        let p = ScalarOper::primal(sol);
        let d = ScalarOper::dual(sol);
        let primal = series_triple(&p, &indices.beta, Equation::Primal, cfg.m_trunc)?;
        let dual = series_triple(&d, &indices.beta_star, Equation::Dual, cfg.m_trunc)?;
        Ok(QEvaluator {
            sol: sol.clone(),
            indices,
            primal,
            dual,
            cfg: *cfg,
            ops: [p, d],
        })
    }

    pub fn oper(&self, eq: Equation) -> &ScalarOper {
        match eq {
            Equation::Primal => &self.ops[0],
            Equation::Dual => &self.ops[1],
        }
    }

    pub fn basis(&self, eq: Equation) -> &[FrobeniusSeries; 3] {
        match eq {
            Equation::Primal => &self.primal,
            Equation::Dual => &self.dual,
        }
    }

    /// Largest z ≤ min(z_match, radius/2) at which all three series meet
    /// series_tol, or the configured z_eval.
    pub fn z_eval(&self, eq: Equation, lam: C) -> Result<f64> {
        if let Some(z) = self.cfg.z_eval {
            return Ok(z);
        }
        let basis = self.basis(eq);
        let mut z = self.match_point(lam).min(0.5 * basis[0].radius);
        for _ in 0..80 {
            let p = CoverPoint::real(z);
            if basis.iter().all(|s| s.truncation_estimate(p, lam) < self.cfg.series_tol) {
                return Ok(z);
            }
            z *= 0.85;
        }
        Err(Error::OutOfConvergenceRegion(format!(
            "no z_eval meets the series tolerance at λ = {lam}"
        )))
    }

    /// The three Frobenius jets at z, evaluated at z_eval and transported.
    pub fn basis_jets(&self, eq: Equation, lam: C, z: CoverPoint) -> Result<[JetValue; 3]> {
        let ze = self.z_eval(eq, lam)?;
        let start = CoverPoint::real(ze);
        let basis = self.basis(eq);
        let init = [basis[0].jet(start, lam), basis[1].jet(start, lam), basis[2].jet(start, lam)];
        if start == z {
            return Ok(init);
        }
        let op = self.oper(eq);
        let legs = plan_path(start, z, &op.singular_points(), self.cfg.sibuya.guard_frac)?;
        let rhs = op.rhs(lam);
        let mut cur = init.to_vec();
        for leg in &legs {
            cur = integrate_jets(&rhs, &cur, leg, &self.cfg.sibuya.arith)?;
        }
        Ok([cur[0], cur[1], cur[2]])
    }

    /// Matching radius: the configured z_match, lowered to |λ|^{−1/(1−k̂)}
    /// where λz^{1−k̂} stops being small and the basis columns align.
    pub fn match_point(&self, lam: C) -> f64 {
        let khat = self.ops[0].khat();
        let natural = lam.norm().powf(-1.0 / (1.0 - khat));
        self.cfg.sibuya.z_match.min(natural)
    }

    pub fn sibuya(&self, eq: Equation, lam: C) -> Result<SibuyaSolution> {
        let cfg = SibuyaConfig {
            z_match: self.match_point(lam),
            ..self.cfg.sibuya
        };
        SibuyaSolution::new(self.oper(eq).clone(), lam, eq, &cfg)
    }

    /// Solves Ψ = Σ Q_i Φ^{(β_i)} from the jets at z_match.
    pub fn connect(&self, eq: Equation, lam: C) -> Result<Connection> {
        let z_eval = self.z_eval(eq, lam)?;
        let zm = CoverPoint::real(self.match_point(lam));
        let phi = self.basis_jets(eq, lam, zm)?;
        let psi = self.sibuya(eq, lam)?.at_match();
        // rows (Ψ, zΨ', z²Ψ'') and unit columns: the solution does not
        // depend on either scaling, so neither should the condition number
        let zr = zm.modulus;
        let row = [1.0, zr, zr * zr];
        let m = Matrix3::from_fn(|r, c| phi[c].as_array()[r] * row[r]);
        let col: Vec<f64> = (0..3).map(|c| m.column(c).norm()).collect();
        if col.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(Error::IllConditioned(f64::INFINITY));
        }
        let m = Matrix3::from_fn(|r, c| m[(r, c)] / col[c]);
        let cond = cond3(&m);
        if !(cond <= self.cfg.cond_max) {
            return Err(Error::IllConditioned(cond));
        }
        let psi = psi.as_array();
        let b = Vector3::from_fn(|r, _| psi[r] * row[r]);
        let y = m.lu().solve(&b).ok_or(Error::IllConditioned(f64::INFINITY))?;
        Ok(Connection {
            q: [y[0] / col[0], y[1] / col[1], y[2] / col[2]],
            cond,
            z_eval,
        })
    }

    pub fn q(&self, lam: C) -> Result<[C; 3]> {
        Ok(self.connect(Equation::Primal, lam)?.q)
    }

    pub fn qstar(&self, lam: C) -> Result<[C; 3]> {
        Ok(self.connect(Equation::Dual, lam)?.q)
    }

    pub fn eval(&self, lam: C) -> Result<QPoint> {
        let (p, d) = rayon::join(|| self.connect(Equation::Primal, lam), || self.connect(Equation::Dual, lam));
        let (p, d) = (p?, d?);
        Ok(QPoint {
            lam,
            q: p.q,
            qstar: d.q,
            cond_primal: p.cond,
            cond_dual: d.cond,
        })
    }

    /// Ψ(z) rebuilt from the Q's and the transported Frobenius basis.
    pub fn reconstruct(&self, eq: Equation, lam: C, q: &[C; 3], z: CoverPoint) -> Result<JetValue> {
        let phi = self.basis_jets(eq, lam, z)?;
        Ok(phi[0].scale(q[0]) + phi[1].scale(q[1]) + phi[2].scale(q[2]))
    }
}

pub fn extract_q(sol: &StateSolution, lambda_grid: &[C], cfg: &ConnectionConfig) -> Result<QTable> {
    let ev = QEvaluator::new(sol, cfg)?;
    extract_q_with(&ev, lambda_grid)
}

pub fn extract_q_with(ev: &QEvaluator, lambda_grid: &[C]) -> Result<QTable> {
    let points: Vec<QPoint> = lambda_grid.par_iter().map(|&l| ev.eval(l)).collect::<Result<_>>()?;
    Ok(QTable::from_points(&points, ev.cfg.sibuya.z_match))
}

/// Either kind of solution, for [`twisted_eval`].
pub enum Twistable<'a> {
    Sibuya(&'a SibuyaSolution),
    Frobenius(&'a FrobeniusSeries),
}

pub fn twisted_eval(s: Twistable<'_>, t: f64, z: CoverPoint, lam: C) -> Result<JetValue> {
    match s {
        Twistable::Sibuya(sb) => sb.twisted_jet(t, z, lam),
        Twistable::Frobenius(fs) => {
            if z.modulus >= fs.radius {
                return Err(Error::OutOfDomain(format!(
                    "|z| = {} outside the series radius {}",
                    z.modulus, fs.radius
                )));
            }
            Ok(fs.twisted_jet(t, z, lam))
        }
    }
}

/// (fg′ − f′g, fg″ − f″g, f′g″ − f″g′). The last slot is the second
/// derivative of the Wronskian up to the term v₁·W, which needs the equation;
/// see [`wronskian2_in`].
pub fn wronskian2(f: JetValue, g: JetValue) -> JetValue {
    JetValue::new(
        f.value * g.d1 - f.d1 * g.value,
        f.value * g.d2 - f.d2 * g.value,
        f.d1 * g.d2 - f.d2 * g.d1,
    )
}

/// Full jet of the Wronskian of two solutions of Ψ‴ = v₁Ψ′ − v₂Ψ at a point
/// where the first-derivative coefficient is v₁.
pub fn wronskian2_in(v1: C, f: JetValue, g: JetValue) -> JetValue {
    let w = wronskian2(f, g);
    JetValue::new(w.value, w.d1, w.d2 + v1 * w.value)
}

/// Relative mismatch of Wr[Ψ_{−1/2}, Ψ_{1/2}] and κΨ* (line = Primal), or of
/// the dual pair and κΨ (line = Dual), in value and first derivative.
pub fn psi_system_residual(sol: &StateSolution, line: Equation, z: CoverPoint, lam: C, cfg: &SibuyaConfig) -> Result<f64> {
    let other = match line {
        Equation::Primal => Equation::Dual,
        Equation::Dual => Equation::Primal,
    };
    let base = SibuyaSolution::new(ScalarOper::for_equation(sol, line), lam, line, cfg)?;
    let target = SibuyaSolution::new(ScalarOper::for_equation(sol, other), lam, other, cfg)?;
    let f = base.twisted_jet(-0.5, z, lam)?;
    let g = base.twisted_jet(0.5, z, lam)?;
    let w = wronskian2(f, g);
    let t = target.jet_at(z)?.scale(psi_system_constant());
    let rv = (w.value - t.value).norm() / t.value.norm();
    let rd = (w.d1 - t.d1).norm() / t.d1.norm();
    Ok(rv.max(rd))
}

/// Wr[Φ^{(a)}_{∓1/2}, Φ^{(b)}_{±1/2}] / Φ*^{(c)} for line 1 of sector s
/// (a, b, c = s(1), s(2), s(3)); for line 2 the dual pair (s(3), s(2)) over
/// Φ^{(s(1))}. `upper` selects the −1/2, +1/2 order.
pub fn phiphi_ratio(ev: &QEvaluator, s: &WeylElement, line: Equation, upper: bool, z: CoverPoint, lam: C) -> C {
    let [s1, s2, s3] = s.perm;
    let (from, to, a, b, c) = match line {
        Equation::Primal => (&ev.primal, &ev.dual, s1, s2, s3),
        Equation::Dual => (&ev.dual, &ev.primal, s3, s2, s1),
    };
    let (ta, tb) = if upper { (-0.5, 0.5) } else { (0.5, -0.5) };
    let f = from[a - 1].twisted_jet(ta, z, lam);
    let g = from[b - 1].twisted_jet(tb, z, lam);
    wronskian2(f, g).value / to[c - 1].jet(z, lam).value
}

/// The value of [`phiphi_ratio`] implied by the leading terms of c_{0,0} = 1
/// series: (β_b − β_a)e^{±iπ(β_b − β_a)}.
pub fn phiphi_predicted(idx: &Indices, s: &WeylElement, line: Equation, upper: bool) -> C {
    let [s1, s2, s3] = s.perm;
    let gap = match line {
        Equation::Primal => idx.beta[s2 - 1] - idx.beta[s1 - 1],
        Equation::Dual => idx.beta_star[s2 - 1] - idx.beta_star[s3 - 1],
    };
    let sign = if upper { 1.0 } else { -1.0 };
    gap * (C::new(0.0, sign * std::f64::consts::PI) * gap).exp()
}

/// λ, e^{iπk̂}λ, e^{−iπk̂}λ for each base point, in that order.
pub fn triple_grid(bases: &[C], khat: f64) -> Vec<C> {
    let (p, m) = (turn(0.5 * khat), turn(-0.5 * khat));
    bases.iter().flat_map(|&l| [l, p * l, m * l]).collect()
}
