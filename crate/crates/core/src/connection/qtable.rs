use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::Path;

use super::QPoint;
use crate::error::{Error, Result};

type C = Complex64;

pub const CSV_HEADER: [&str; 16] = [
    "lambda_re",
    "lambda_im",
    "Q1_re",
    "Q1_im",
    "Q2_re",
    "Q2_im",
    "Q3_re",
    "Q3_im",
    "Qstar1_re",
    "Qstar1_im",
    "Qstar2_re",
    "Qstar2_im",
    "Qstar3_re",
    "Qstar3_im",
    "cond_primal",
    "cond_dual",
];

/// Q_i(λ), Q*_i(λ) on a grid, in the c_{0,0} = 1 normalization of the
/// Frobenius bases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QTable {
    pub lambda_grid: Vec<C>,
    pub q: [Vec<C>; 3],
    pub qstar: [Vec<C>; 3],
    pub cond_primal: Vec<f64>,
    pub cond_dual: Vec<f64>,
    pub z_match: f64,
    pub normalization_note: String,
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

impl QTable {
    pub fn from_points(points: &[QPoint], z_match: f64) -> Self {
        let col = |f: &dyn Fn(&QPoint) -> C| points.iter().map(f).collect::<Vec<C>>();
        QTable {
            lambda_grid: col(&|p| p.lam),
            q: [col(&|p| p.q[0]), col(&|p| p.q[1]), col(&|p| p.q[2])],
            qstar: [col(&|p| p.qstar[0]), col(&|p| p.qstar[1]), col(&|p| p.qstar[2])],
            cond_primal: points.iter().map(|p| p.cond_primal).collect(),
            cond_dual: points.iter().map(|p| p.cond_dual).collect(),
            z_match,
            normalization_note: "Frobenius bases normalized by c_{0,0} = 1; Sibuya solutions by z^{2/3}e^{-S}".into(),
        }
    }

    pub fn len(&self) -> usize {
        self.lambda_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda_grid.is_empty()
    }

    /// Position of λ in the grid, up to a relative tolerance.
    pub fn find(&self, lam: C, tol: f64) -> Option<usize> {
        self.lambda_grid
            .iter()
            .position(|l| (l - lam).norm() <= tol * (1.0 + lam.norm()))
    }

    pub fn point(&self, i: usize) -> QPoint {
        QPoint {
            lam: self.lambda_grid[i],
            q: [self.q[0][i], self.q[1][i], self.q[2][i]],
            qstar: [self.qstar[0][i], self.qstar[1][i], self.qstar[2][i]],
            cond_primal: self.cond_primal[i],
            cond_dual: self.cond_dual[i],
        }
    }

    pub fn all_finite(&self) -> bool {
        self.q
            .iter()
            .chain(&self.qstar)
            .flatten()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER).map_err(|e| Error::Io(e.to_string()))?;
        for i in 0..self.len() {
            let p = self.point(i);
            let mut row = vec![fmt(p.lam.re), fmt(p.lam.im)];
            for c in p.q.iter().chain(&p.qstar) {
                row.push(fmt(c.re));
                row.push(fmt(c.im));
            }
            row.push(fmt(p.cond_primal));
            row.push(fmt(p.cond_dual));
            w.write_record(&row).map_err(|e| Error::Io(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string()?)?;
        Ok(())
    }

    pub fn from_csv_str(s: &str, z_match: f64) -> Result<Self> {
        let mut r = csv::Reader::from_reader(s.as_bytes());
        let header: Vec<String> = r
            .headers()
            .map_err(|e| Error::Parse(e.to_string()))?
            .iter()
            .map(String::from)
            .collect();
        if header != CSV_HEADER {
            return Err(Error::Parse(format!("unexpected Q-table header {header:?}")));
        }
        let mut points = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
            let v: Vec<f64> = rec
                .iter()
                .map(|x| x.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{x}: {e}"))))
                .collect::<Result<_>>()?;
            let c = |i: usize| C::new(v[i], v[i + 1]);
            points.push(QPoint {
                lam: c(0),
                q: [c(2), c(4), c(6)],
                qstar: [c(8), c(10), c(12)],
                cond_primal: v[14],
                cond_dual: v[15],
            });
        }
        Ok(QTable::from_points(&points, z_match))
    }

    pub fn read_csv(path: &Path, z_match: f64) -> Result<Self> {
        Self::from_csv_str(&std::fs::read_to_string(path)?, z_match)
    }
}
