//! The scalar quantum-KdV oper ∂³ − W₁∂ + W₂ and its local data.

mod laurent;
mod rational;
mod scalar;

pub(crate) use laurent::laurent_at_zero_of;
pub use laurent::{laurent_at_w, laurent_at_zero, Affine, LaurentData, Site};
pub use rational::{Laurent, PoleTerm, RationalFn};
pub use scalar::{Equation, OperRhs, ScalarOper};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::covercx::{cover_pow_real, turn, CoverPoint};
use crate::error::{Error, Result};
use crate::params::OperParams;

/// A level-N point {aⱼ, wⱼ} of the trivial-monodromy system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSolution {
    pub n: usize,
    pub a: Vec<Complex64>,
    pub w: Vec<Complex64>,
    pub params: OperParams,
    pub residual_norm: f64,
}

impl StateSolution {
    pub fn ground(params: OperParams) -> Self {
        StateSolution {
            n: 0,
            a: vec![],
            w: vec![],
            params: params.with_lambda(Complex64::default()),
            residual_norm: 0.0,
        }
    }

    /// Builds a solution record, computing its residual norm.
    pub fn new(params: OperParams, a: Vec<Complex64>, w: Vec<Complex64>) -> Result<Self> {
        if a.len() != w.len() {
            return Err(Error::Domain(format!("{} a-values for {} sites", a.len(), w.len())));
        }
        let params = params.with_lambda(Complex64::default());
        let res = crate::trivmon::residuals(&a, &w, &params)?;
        Ok(StateSolution {
            n: a.len(),
            a,
            w,
            params,
            residual_norm: res.norm_inf(),
        })
    }

    /// a₂₂ = ((2k+3)a − k²)/3, forced by the q₂₂ condition at the site.
    pub fn a22(&self, a: Complex64) -> Complex64 {
        let k = self.params.k;
        (a * (2.0 * k + 3.0) - k * k) / 3.0
    }

    /// 10⁻³·min(|wℓ|, pairwise gaps); 0 for the ground state.
    pub fn guard_distance(&self) -> f64 {
        let mut m = f64::INFINITY;
        for (i, wi) in self.w.iter().enumerate() {
            m = m.min(wi.norm());
            for wj in &self.w[i + 1..] {
                m = m.min((wi - wj).norm());
            }
        }
        if m.is_finite() {
            1e-3 * m
        } else {
            0.0
        }
    }

    /// Minimum of |wⱼ| and pairwise distances, ∞ for the ground state.
    pub fn min_separation(&self) -> f64 {
        self.guard_distance() * 1e3
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Potentials {
    pub w1: Complex64,
    pub w1p: Complex64,
    pub w2: Complex64,
    pub w2p: Complex64,
}

fn check_guard(sol: &StateSolution, z: &CoverPoint) -> Result<()> {
    let g = sol.guard_distance();
    let zc = z.to_complex();
    if z.modulus <= g || sol.w.iter().any(|w| (zc - w).norm() <= g) {
        return Err(Error::NearSingularity(format!("z = {zc}")));
    }
    Ok(())
}

/// W₁, W₁′, W₂, W₂′ at a point of the cover, term by term.
pub fn eval_potentials(sol: &StateSolution, lam: Complex64, z: &CoverPoint) -> Result<Potentials> {
    check_guard(sol, z)?;
    let p = &sol.params;
    let k = p.k;
    let x = z.to_complex();
    let x2 = x * x;
    let x3 = x2 * x;
    let zk = cover_pow_real(*z, k);
    let mut w1 = p.r1bar / x2;
    let mut w1p = -2.0 * p.r1bar / x3;
    let mut w2 = p.r2bar / x3 + 1.0 / x2 + lam * zk;
    let mut w2p = -3.0 * p.r2bar / (x3 * x) - 2.0 / x3 + lam * k * zk / x;
    for (&a, &w) in sol.a.iter().zip(&sol.w) {
        let b = sol.a22(a);
        let d = x - w;
        let d2 = d * d;
        let d3 = d2 * d;
        w1 += 3.0 / d2 + k / (x * d);
        w1p += -6.0 / d3 - k * (2.0 * x - w) / (x2 * d2);
        w2 += 3.0 / d3 + a / (x * d2) + b / (x2 * d);
        w2p += -9.0 / (d3 * d) + a * (-1.0 / (x2 * d2) - 2.0 / (x * d3)) + b * (-2.0 / (x3 * d) - 1.0 / (x2 * d2));
    }
    Ok(Potentials { w1, w1p, w2, w2p })
}

/// (V₁, V₂) = (W₁, −W₂ − W₁′): the adjoint equation ∂³ − V₁∂ + V₂.
pub fn adjoint_potentials(sol: &StateSolution, lam: Complex64, z: &CoverPoint) -> Result<(Complex64, Complex64)> {
    let p = eval_potentials(sol, lam, z)?;
    Ok((p.w1, -p.w2 - p.w1p))
}

/// Potentials of the twisted oper: W₁ᵗ(z) = e^{4πit}W₁(e^{2πit}z),
/// W₂ᵗ(z) = e^{6πit}W₂(e^{2πit}z, e^{2πitk̂}λ).
#[derive(Debug, Clone)]
pub struct PotentialPair {
    pub sol: StateSolution,
    pub lam: Complex64,
    pub t: f64,
}

impl PotentialPair {
    pub fn eval(&self, z: &CoverPoint) -> Result<Potentials> {
        let s = turn(self.t);
        let khat = self.sol.params.khat();
        let p = eval_potentials(&self.sol, self.lam * turn(self.t * khat), &z.rotate(self.t))?;
        Ok(Potentials {
            w1: p.w1 * s * s,
            w1p: p.w1p * s * s * s,
            w2: p.w2 * s * s * s,
            w2p: p.w2p * s * s * s * s,
        })
    }
}

pub fn twist_potentials(sol: &StateSolution, lam: Complex64, t: f64) -> PotentialPair {
    PotentialPair {
        sol: sol.clone(),
        lam,
        t,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Location {
    Zero,
    Infinity,
    Point(Complex64),
}

/// A positive rational number in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slope {
    pub num: i64,
    pub den: i64,
}

impl Slope {
    fn new(num: i64, den: i64) -> Self {
        fn gcd(a: i64, b: i64) -> i64 {
            if b == 0 {
                a.abs()
            } else {
                gcd(b, a % b)
            }
        }
        let g = gcd(num, den).max(1);
        Slope {
            num: num / g,
            den: den / g,
        }
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Slope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularityReport {
    pub location: Location,
    pub slope: Slope,
    pub regular: bool,
    /// Pole orders at a finite point, growth exponents at ∞; None if the
    /// coefficient vanishes identically.
    pub delta1: Option<i64>,
    pub delta2: Option<i64>,
}

/// Slope μ = max{1, δ₁/2, δ₂/3} (plus 2 inside the max at infinity).
///
/// The λz^k term never decides the slope in this family: at 0 its pole order
/// 2+k̂ is below 3, and at ∞ it decays faster than the 1/z² term.
pub fn classify_singularity(sol: &StateSolution, location: Location) -> Result<SingularityReport> {
    let op = ScalarOper::primal(sol);
    let order_at = |f: &RationalFn, p: Complex64| -> Option<i64> {
        let n = f.pole_order_at(p);
        (n > 0).then_some(n as i64)
    };
    let (d1, d2, infinite) = match location {
        Location::Zero => (
            order_at(&op.v1, Complex64::default()),
            order_at(&op.v2, Complex64::default()),
            false,
        ),
        Location::Point(w) => {
            if !sol.w.iter().any(|wj| (wj - w).norm() <= 1e-12 * (1.0 + w.norm())) {
                return Err(Error::NotASingularity(format!("{w}")));
            }
            (order_at(&op.v1, w), order_at(&op.v2, w), false)
        }
        Location::Infinity => {
            let lead = |f: &RationalFn| -> Option<i64> {
                let c = f.at_infinity(8);
                let scale = c.iter().map(|x| x.norm()).fold(0.0, f64::max);
                c.iter()
                    .position(|x| x.norm() > 1e-13 * scale && scale > 0.0)
                    .map(|m| -(m as i64))
            };
            (lead(&op.v1), lead(&op.v2), true)
        }
    };
    // Work in sixths: 6μ = max(6, 3δ₁, 2δ₂) (+12 at infinity).
    let inner = [d1.map(|d| 3 * d), d2.map(|d| 2 * d)].into_iter().flatten().max();
    let six = match (inner, infinite) {
        (Some(v), true) => (v + 12).max(6),
        (Some(v), false) => v.max(6),
        (None, _) => 6,
    };
    let slope = Slope::new(six, 6);
    Ok(SingularityReport {
        location,
        slope,
        regular: slope.num == slope.den,
        delta1: d1,
        delta2: d2,
    })
}
