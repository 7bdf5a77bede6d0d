use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::Path;

use super::{frobenius_certificate, numeric_monodromy, SolverConfig};
use crate::error::{Error, Result};
use crate::oper::StateSolution;
use crate::params::OperParams;

type C = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolutionCertificates {
    pub frobenius: bool,
    pub monodromy_deviation: f64,
}

impl SolutionCertificates {
    /// Certificates of every site at each sample λ. A failed transport is
    /// reported as deviation f64::MAX (JSON has no infinity).
    pub fn compute(sol: &StateSolution, lams: &[C]) -> Self {
        let mut frobenius = true;
        let mut dev = 0.0f64;
        for l in 1..=sol.n {
            for &lam in lams {
                frobenius &= frobenius_certificate(sol, l, lam).passed();
                let d = numeric_monodromy(sol, l, lam, 64).map(|m| m.deviation).unwrap_or(f64::MAX);
                dev = dev.max(if d.is_finite() { d } else { f64::MAX });
            }
        }
        SolutionCertificates {
            frobenius,
            monodromy_deviation: dev,
        }
    }

    pub fn passed(&self, monodromy_tol: f64) -> bool {
        self.frobenius && self.monodromy_deviation < monodromy_tol
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub a: Vec<C>,
    pub w: Vec<C>,
    pub residual_norm: f64,
    pub certificates: SolutionCertificates,
}

/// On-disk form of a set of level-N solutions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub k: f64,
    pub r1bar: C,
    pub r2bar: C,
    #[serde(rename = "N")]
    pub n: usize,
    pub solutions: Vec<SolutionRecord>,
    pub solver: Option<SolverConfig>,
}

impl SolutionFile {
    pub fn new(p: &OperParams, n: usize, records: Vec<SolutionRecord>, solver: Option<SolverConfig>) -> Self {
        SolutionFile {
            k: p.k,
            r1bar: p.r1bar,
            r2bar: p.r2bar,
            n,
            solutions: records,
            solver,
        }
    }

    pub fn params(&self) -> OperParams {
        OperParams::new(self.k, self.r1bar, self.r2bar)
    }

    /// The stored states, with residuals recomputed from (a, w).
    pub fn states(&self) -> Result<Vec<StateSolution>> {
        let p = self.params();
        p.validate()?;
        if self.n == 0 {
            return Ok(vec![StateSolution::ground(p)]);
        }
        self.solutions
            .iter()
            .map(|r| {
                if r.a.len() != self.n || r.w.len() != self.n {
                    return Err(Error::Parse(format!(
                        "record with {} sites in an N = {} file",
                        r.w.len(),
                        self.n
                    )));
                }
                StateSolution::new(p, r.a.clone(), r.w.clone())
            })
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

impl SolutionRecord {
    pub fn from_state(sol: &StateSolution, lams: &[C]) -> Self {
        SolutionRecord {
            a: sol.a.clone(),
            w: sol.w.clone(),
            residual_norm: sol.residual_norm,
            certificates: SolutionCertificates::compute(sol, lams),
        }
    }
}
