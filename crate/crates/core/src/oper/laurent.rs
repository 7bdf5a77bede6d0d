use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ScalarOper, StateSolution};
use crate::covercx::{cover_pow_real, CoverPoint};
use crate::error::{Error, Result};

/// c0 + c1·λ
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Affine {
    pub c0: Complex64,
    pub c1: Complex64,
}

impl Affine {
    pub fn constant(c0: Complex64) -> Self {
        Affine {
            c0,
            c1: Complex64::default(),
        }
    }

    pub fn at(&self, lam: Complex64) -> Complex64 {
        self.c0 + self.c1 * lam
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Site {
    Zero,
    /// 1-based site index ℓ.
    W(usize),
}

/// W₁ = Σ q₁ₘ u^{m−2}, W₂ = Σ q₂ₘ u^{m−3} around a site, u = z − site.
/// At a site wℓ the λz^k term is Taylor-expanded into the λ-slopes of q₂ₘ;
/// at zero it is left out (it is not a Laurent series there).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaurentData {
    pub site: Site,
    pub q1: Vec<Complex64>,
    pub q2: Vec<Affine>,
}

/// Generalized binomial coefficient C(k, j).
fn binom(k: f64, j: usize) -> f64 {
    let mut c = 1.0;
    for i in 0..j {
        c *= (k - i as f64) / (i as f64 + 1.0);
    }
    c
}

/// Laurent data at wℓ (1-based ℓ). The λ-term uses the principal branch of
/// wℓ^k.
pub fn laurent_at_w(sol: &StateSolution, l: usize, m_max: usize) -> Result<LaurentData> {
    if l == 0 || l > sol.n {
        return Err(Error::Index(format!("site {l} of {}", sol.n)));
    }
    if m_max < 4 {
        return Err(Error::Domain(format!("m_max = {m_max} < 4")));
    }
    let op = ScalarOper::primal(sol);
    let w = sol.w[l - 1];
    let l1 = op.v1.laurent_at(w, m_max as i32 - 2);
    let l2 = op.v2.laurent_at(w, m_max as i32 - 3);
    let k = sol.params.k;
    let wk = cover_pow_real(CoverPoint::from_complex(w), k);
    let q1 = (0..=m_max).map(|m| l1.get(m as i32 - 2)).collect();
    let q2 = (0..=m_max)
        .map(|m| {
            let c1 = if m >= 3 {
                wk * binom(k, m - 3) * w.powi(-(m as i32 - 3))
            } else {
                Complex64::default()
            };
            Affine {
                c0: l2.get(m as i32 - 3),
                c1,
            }
        })
        .collect();
    Ok(LaurentData {
        site: Site::W(l),
        q1,
        q2,
    })
}

/// Laurent data of the rational parts at z = 0.
pub fn laurent_at_zero(sol: &StateSolution, m_max: usize) -> LaurentData {
    let op = ScalarOper::primal(sol);
    laurent_at_zero_of(&op, m_max)
}

pub(crate) fn laurent_at_zero_of(op: &ScalarOper, m_max: usize) -> LaurentData {
    let zero = Complex64::default();
    let l1 = op.v1.laurent_at(zero, m_max as i32 - 2);
    let l2 = op.v2.laurent_at(zero, m_max as i32 - 3);
    LaurentData {
        site: Site::Zero,
        q1: (0..=m_max).map(|m| l1.get(m as i32 - 2)).collect(),
        q2: (0..=m_max).map(|m| Affine::constant(l2.get(m as i32 - 3))).collect(),
    }
}
