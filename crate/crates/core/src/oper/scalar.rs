use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{RationalFn, StateSolution};
use crate::covercx::{cover_pow_real, turn, CoverPoint, JetRhs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Equation {
    Primal,
    Dual,
}

/// ∂³ − v₁∂ + v₂ + lam_factor·λ·z^k, with v₁, v₂ rational. The last term is
/// evaluated on the cover.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarOper {
    pub v1: RationalFn,
    pub v2: RationalFn,
    pub lam_factor: Complex64,
    pub k: f64,
}

impl ScalarOper {
    pub fn primal(sol: &StateSolution) -> Self {
        let p = &sol.params;
        let k = p.k;
        let zero = Complex64::default();
        let one = Complex64::new(1.0, 0.0);
        let mut v1 = RationalFn::new();
        let mut v2 = RationalFn::new();
        v1.add_term(zero, 2, p.r1bar);
        v2.add_term(zero, 3, p.r2bar);
        v2.add_term(zero, 2, one);
        for (&a, &w) in sol.a.iter().zip(&sol.w) {
            let b = sol.a22(a);
            v1.add_term(w, 2, 3.0 * one);
            // k/(z(z−w)) = (k/w)(1/(z−w) − 1/z)
            v1.add_term(w, 1, k / w);
            v1.add_term(zero, 1, -k / w);
            v2.add_term(w, 3, 3.0 * one);
            // 1/(z(z−w)²) = 1/(w²z) − 1/(w²(z−w)) + 1/(w(z−w)²)
            let w2 = w * w;
            v2.add_term(zero, 1, a / w2);
            v2.add_term(w, 1, -a / w2);
            v2.add_term(w, 2, a / w);
            // 1/(z²(z−w)) = −1/(wz²) − 1/(w²z) + 1/(w²(z−w))
            v2.add_term(zero, 2, -b / w);
            v2.add_term(zero, 1, -b / w2);
            v2.add_term(w, 1, b / w2);
        }
        ScalarOper {
            v1,
            v2,
            lam_factor: one,
            k,
        }
    }

    /// The adjoint equation of the half-twisted primal one; its λ-term is
    /// +λz^k and its rational part is W₂(e^{iπ}z) − d/dz W₁(e^{iπ}z).
    pub fn dual(sol: &StateSolution) -> Self {
        Self::primal(sol).twisted(0.5).adjoint()
    }

    pub fn for_equation(sol: &StateSolution, eq: Equation) -> Self {
        match eq {
            Equation::Primal => Self::primal(sol),
            Equation::Dual => Self::dual(sol),
        }
    }

    /// Coefficients of the equation satisfied by e^{−2πit}ψ(e^{2πit}z, e^{2πitk̂}λ).
    pub fn twisted(&self, t: f64) -> Self {
        let s = turn(t);
        ScalarOper {
            v1: self.v1.compose_scale(s).scale(s * s),
            v2: self.v2.compose_scale(s).scale(s * s * s),
            lam_factor: self.lam_factor * s,
            k: self.k,
        }
    }

    /// Monic form ∂³ − v₁∂ − (v₂ + v₁′) of the formal adjoint.
    pub fn adjoint(&self) -> Self {
        ScalarOper {
            v1: self.v1.clone(),
            v2: self.v2.add(&self.v1.derivative()).scale(Complex64::new(-1.0, 0.0)),
            lam_factor: -self.lam_factor,
            k: self.k,
        }
    }

    pub fn khat(&self) -> f64 {
        -self.k - 2.0
    }

    /// Nonzero finite singular points.
    pub fn singular_points(&self) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = Vec::new();
        for p in self.v1.poles().into_iter().chain(self.v2.poles()) {
            if p.norm() > 0.0 && !out.iter().any(|q| (q - p).norm() <= 1e-14 * p.norm()) {
                out.push(p);
            }
        }
        out
    }

    /// (v₁(z), v₂(z) + lam_factor·λ·z^k).
    pub fn potentials(&self, z: &CoverPoint, lam: Complex64) -> (Complex64, Complex64) {
        let zc = z.to_complex();
        let lam_term = if lam == Complex64::default() {
            Complex64::default()
        } else {
            self.lam_factor * lam * cover_pow_real(*z, self.k)
        };
        (self.v1.eval(zc), self.v2.eval(zc) + lam_term)
    }

    pub fn rhs(&self, lam: Complex64) -> OperRhs<'_> {
        OperRhs { op: self, lam }
    }
}

/// The equation at fixed λ as a jet transport rule: Ψ''' = v₁Ψ' − v₂Ψ.
pub struct OperRhs<'a> {
    op: &'a ScalarOper,
    lam: Complex64,
}

impl JetRhs for OperRhs<'_> {
    fn coefficients(&self, z: &CoverPoint) -> [Complex64; 3] {
        let (v1, v2) = self.op.potentials(z, self.lam);
        [-v2, v1, Complex64::default()]
    }
}
