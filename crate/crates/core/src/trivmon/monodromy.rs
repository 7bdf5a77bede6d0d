use nalgebra::Matrix3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::covercx::{integrate_jets, ArithConfig, CoverPoint, JetValue, ODEPath};
use crate::error::{Error, Result};
use crate::oper::{ScalarOper, StateSolution};

type C = Complex64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonodromyMatrix {
    /// Row i, column j: component i of the transported j-th basis jet.
    pub entries: [[C; 3]; 3],
    pub deviation: f64,
}

impl MonodromyMatrix {
    pub fn det(&self) -> C {
        let e = &self.entries;
        Matrix3::from_fn(|i, j| e[i][j]).determinant()
    }
}

/// Transports the jet basis once around wℓ (1-based ℓ) on a circle of radius
/// ½·min(|wℓ|, |wℓ − wⱼ|). `steps` is a lower bound on the number of
/// integrator steps.
pub fn numeric_monodromy(sol: &StateSolution, l: usize, lam: C, steps: usize) -> Result<MonodromyMatrix> {
    numeric_monodromy_with(sol, l, lam, steps, &ArithConfig::default().with_rel_tol(1e-12))
}

pub fn numeric_monodromy_with(sol: &StateSolution, l: usize, lam: C, steps: usize, cfg: &ArithConfig) -> Result<MonodromyMatrix> {
    if l == 0 || l > sol.n {
        return Err(Error::Index(format!("site {l} of {}", sol.n)));
    }
    let w = sol.w[l - 1];
    let mut sep = w.norm();
    for (j, wj) in sol.w.iter().enumerate() {
        if j + 1 != l {
            sep = sep.min((w - wj).norm());
        }
    }
    let radius = 0.5 * sep;
    // Base point on the side facing away from the origin.
    let base = w + w / w.norm() * radius;
    let start = CoverPoint::from_complex(base);
    let path = ODEPath::centered_arc(start, w, TAU).with_steps_hint(steps.max(16));
    let op = ScalarOper::primal(sol);
    let rhs = op.rhs(lam);
    let one = C::new(1.0, 0.0);
    let zero = C::default();
    let basis = [
        JetValue::new(one, zero, zero),
        JetValue::new(zero, one, zero),
        JetValue::new(zero, zero, one),
    ];
    let out = integrate_jets(&rhs, &basis, &path, cfg)?;
    let mut entries = [[zero; 3]; 3];
    let mut deviation = 0.0f64;
    for (j, jet) in out.iter().enumerate() {
        for (i, v) in jet.as_array().into_iter().enumerate() {
            entries[i][j] = v;
            let id = if i == j { one } else { zero };
            deviation = deviation.max((v - id).norm());
        }
    }
    Ok(MonodromyMatrix { entries, deviation })
}
