use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{BetheRoot, QQReport, RootKind};
use crate::params::WeylElement;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualStats {
    pub max: f64,
    pub median: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootRecord {
    pub lambda: Complex64,
    pub which: RootKind,
    pub refine_residual: f64,
    pub ba_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub fitted: [Complex64; 2],
    pub predicted: [Complex64; 2],
}

/// Serialized output of the qq and bethe commands for one sector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetheReport {
    pub sector: String,
    pub calibration: Option<Calibration>,
    /// Calibrated residuals of both lines.
    pub residual_stats: Option<ResidualStats>,
    /// The same with the predicted constants.
    pub raw_residual_stats: Option<ResidualStats>,
    pub roots: Vec<RootRecord>,
}

impl BetheReport {
    pub fn new(sector: &WeylElement, qq: Option<&QQReport>, roots: &[BetheRoot]) -> Self {
        let calibration = qq.map(|r| Calibration {
            fitted: [r.lines[0].fitted, r.lines[1].fitted],
            predicted: [r.lines[0].predicted, r.lines[1].predicted],
        });
        let residual_stats = qq.map(|r| {
            let all: Vec<f64> = r.lines.iter().flat_map(|l| l.calibrated.iter().copied()).collect();
            super::stats(&all)
        });
        let raw_residual_stats = qq.map(|r| {
            let all: Vec<f64> = r.lines.iter().flat_map(|l| l.raw.iter().copied()).collect();
            super::stats(&all)
        });
        BetheReport {
            sector: sector.name().to_string(),
            calibration,
            residual_stats,
            raw_residual_stats,
            roots: roots
                .iter()
                .map(|b| RootRecord {
                    lambda: b.lambda_root,
                    which: b.which,
                    refine_residual: b.refine_residual,
                    ba_residual: b.ba_residual,
                })
                .collect(),
        }
    }
}
