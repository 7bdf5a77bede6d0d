use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::oper::{laurent_at_w, Affine, StateSolution};

type C = Complex64;

pub const CERTIFICATE_TOL: f64 = 1e-9;
const R_MAX: usize = 6;

/// Local trivial-monodromy certificate at one site.
///
/// Residuals are made dimensionless with the local length scale
/// ρ = min(|wℓ|, |wℓ − wⱼ|): a weight-m coefficient q is replaced by q·ρᵐ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrobeniusCertificate {
    /// 1-based.
    pub site: usize,
    /// q₁₂ condition, q₂₂ condition, constant and λ-slope parts of the
    /// weight-4 condition.
    pub consistency_residuals: [f64; 4],
    /// For the indices 3, 1, −1 in that order.
    pub recursion_ok: [bool; 3],
    /// Largest scaled right-hand side met at a step where P(β+r) = 0.
    pub max_recursion_residual: f64,
}

impl FrobeniusCertificate {
    pub fn passed(&self) -> bool {
        self.recursion_ok.iter().all(|&b| b) && self.consistency_residuals.iter().all(|&r| r < CERTIFICATE_TOL)
    }
}

fn indicial(x: f64) -> f64 {
    (x - 3.0) * (x - 1.0) * (x + 1.0)
}

/// Runs P(β+r)Φ_r = Σₘ [q₁ₘ(β+r−m) − q₂ₘ]Φ_{r−m} with Φ₀ = 1 and every free
/// coefficient set to zero; returns the right-hand sides at the resonant
/// steps.
fn resonant_rhs(beta: f64, q1: &[C], q2: &[C]) -> Vec<C> {
    let mut phi = vec![C::new(1.0, 0.0)];
    let mut out = Vec::new();
    for r in 1..=R_MAX {
        let mut rhs = C::default();
        for m in 1..=r {
            let x = beta + (r - m) as f64;
            rhs += (q1[m] * x - q2[m]) * phi[r - m];
        }
        let p = indicial(beta + r as f64);
        if p == 0.0 {
            out.push(rhs);
            phi.push(C::default());
        } else {
            phi.push(rhs / p);
        }
    }
    out
}

pub fn frobenius_certificate(sol: &StateSolution, l: usize, lam: C) -> FrobeniusCertificate {
    let failed = FrobeniusCertificate {
        site: l,
        consistency_residuals: [f64::INFINITY; 4],
        recursion_ok: [false; 3],
        max_recursion_residual: f64::INFINITY,
    };
    let Ok(data) = laurent_at_w(sol, l, R_MAX) else {
        return failed;
    };
    let w = sol.w[l - 1];
    let mut rho = w.norm();
    for (j, wj) in sol.w.iter().enumerate() {
        if j + 1 != l {
            rho = rho.min((w - wj).norm());
        }
    }
    let sc = |m: usize| rho.powi(m as i32);
    let q1: Vec<C> = data.q1.iter().enumerate().map(|(m, q)| q * sc(m)).collect();
    let q2a: Vec<Affine> = data
        .q2
        .iter()
        .enumerate()
        .map(|(m, q)| Affine {
            c0: q.c0 * sc(m),
            c1: q.c1 * sc(m),
        })
        .collect();
    let q2c: Vec<C> = q2a.iter().map(|q| q.c0).collect();

    let (q11, q12, q13, q14) = (q1[1], q1[2], q1[3], q1[4]);
    let (q21, q22, q23, q24) = (q2c[1], q2c[2], q2c[3], q2c[4]);
    let r21 = q12 - (q11 * q11 - q11 * q21 + q21 * q21) / 3.0;
    let r22 = q22 - q11 * (q21 * 2.0 - q11) / 3.0;
    let r4 =
        q14 + q24 - q13 * (q11 * 2.0 - q21) / 3.0 - q11 * q23 - q11 * (q11 * 2.0 - q21) * (q11 - q21 * 2.0) * (q11 + q21) / 27.0;
    // The λ-slope of the weight-4 condition: only q₂₃ and q₂₄ carry λ.
    let s23 = q2a[3].c1;
    let s24 = q2a[4].c1;
    let r4l = if s23.norm() > 0.0 {
        (s24 - q11 * s23) / s23.norm()
    } else {
        s24
    };
    let consistency_residuals = [r21.norm(), r22.norm(), r4.norm(), r4l.norm()];

    // The λ-dependence enters affinely, so two samples test the recursion
    // for every λ.
    let mut recursion_ok = [true; 3];
    let mut worst = 0.0f64;
    for lam_s in [lam, lam + 1.0] {
        let q2: Vec<C> = q2a.iter().map(|q| q.at(lam_s)).collect();
        for (i, beta) in [3.0, 1.0, -1.0].into_iter().enumerate() {
            for v in resonant_rhs(beta, &q1, &q2) {
                worst = worst.max(v.norm());
                if !(v.norm() < CERTIFICATE_TOL) {
                    recursion_ok[i] = false;
                }
            }
        }
    }
    FrobeniusCertificate {
        site: l,
        consistency_residuals,
        recursion_ok,
        max_recursion_residual: worst,
    }
}
