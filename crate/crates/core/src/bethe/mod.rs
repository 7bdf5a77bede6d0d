//! QQ̃-system residuals, zeros of Q-functions, Bethe Ansatz residuals at those
//! zeros, and the BHK form of the quadratic relations.

mod report;

#[cfg(test)]
mod tests;

pub use report::{BetheReport, Calibration, ResidualStats, RootRecord};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::connection::{psi_system_constant, QTable};
use crate::covercx::{cover_pow, turn, CoverPoint};
use crate::error::{Error, Result};
use crate::params::{bhk_params, sector_phases, BHKParams, Indices, RPair, WeylElement};

type C = Complex64;

const I: C = C::new(0.0, 1.0);

fn e_ipi(x: C) -> C {
    (I * PI * x).exp()
}

/// Which line of the QQ̃-system: 1 expresses Q* through Q, 2 the reverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Line {
    One,
    Two,
}

/// Labels (a, b, c) of a relation: c is expressed through the pair (a, b).
/// Line 1: (s(1), s(2), s(3)); line 2: (s(3), s(2), s(1)).
pub fn relation_labels(s: &WeylElement, line: Line) -> (usize, usize, usize) {
    let [s1, s2, s3] = s.perm;
    match line {
        Line::One => (s1, s2, s3),
        Line::Two => (s3, s2, s1),
    }
}

/// The relation phase: s(γ) for line 1, s(γ*) for line 2.
pub fn relation_phase(s: &WeylElement, idx: &Indices, line: Line) -> C {
    let (g, gs) = sector_phases(s, idx);
    match line {
        Line::One => g,
        Line::Two => gs,
    }
}

/// Constant C with RHS = C·(−1)^{p(s)}Q_c in the c_{0,0} = 1 normalization:
/// C = (−1)^{p(s)}κ/γ.
pub fn predicted_calibration(s: &WeylElement, idx: &Indices, line: Line) -> C {
    let sign = if s.p() == 0 { 1.0 } else { -1.0 };
    sign * psi_system_constant() / relation_phase(s, idx, line)
}

/// Values a relation needs at one base point λ: the pair at λ₋ = e^{−iπk̂}λ
/// and λ₊ = e^{iπk̂}λ, and the left-hand function at λ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelationSample {
    pub a_minus: C,
    pub a_plus: C,
    pub b_minus: C,
    pub b_plus: C,
    pub c_at: C,
}

/// e^{iπγ}Q_a(λ₋)Q_b(λ₊) − e^{−iπγ}Q_a(λ₊)Q_b(λ₋)
pub fn relation_rhs(gamma: C, v: &RelationSample) -> C {
    e_ipi(gamma) * v.a_minus * v.b_plus - e_ipi(-gamma) * v.a_plus * v.b_minus
}

/// C minimizing Σ|R_i − C·L_i|²/|R_i|²; invariant under rescaling any single
/// point, so pointwise-equivalent forms of a relation calibrate identically.
pub fn calibrate(rhs: &[C], lhs: &[C]) -> C {
    let mut num = C::default();
    let mut den = 0.0;
    for (r, l) in rhs.iter().zip(lhs) {
        let w = 1.0 / r.norm_sqr();
        num += l.conj() * r * w;
        den += l.norm_sqr() * w;
    }
    num / den
}

/// |R − C·L| / |R| per point.
pub fn relative_residuals(rhs: &[C], lhs: &[C], c: C) -> Vec<f64> {
    rhs.iter().zip(lhs).map(|(r, l)| (r - c * l).norm() / r.norm()).collect()
}

fn stats(v: &[f64]) -> ResidualStats {
    let mut s: Vec<f64> = v.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let max = s.last().copied().unwrap_or(0.0);
    let median = if s.is_empty() {
        0.0
    } else if s.len() % 2 == 1 {
        s[s.len() / 2]
    } else {
        0.5 * (s[s.len() / 2 - 1] + s[s.len() / 2])
    };
    ResidualStats { max, median }
}

/// One line of the QQ̃-system on a grid, before and after calibration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationReport {
    pub line: Line,
    pub labels: (usize, usize, usize),
    pub lambdas: Vec<C>,
    pub predicted: C,
    pub fitted: C,
    /// Residuals with the predicted constant.
    pub raw: Vec<f64>,
    /// Residuals with the fitted constant.
    pub calibrated: Vec<f64>,
}

impl RelationReport {
    pub fn calibrated_stats(&self) -> ResidualStats {
        stats(&self.calibrated)
    }

    pub fn raw_stats(&self) -> ResidualStats {
        stats(&self.raw)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QQReport {
    pub sector: WeylElement,
    pub lines: [RelationReport; 2],
}

impl QQReport {
    pub fn calibration_constants(&self) -> (C, C) {
        (self.lines[0].fitted, self.lines[1].fitted)
    }

    pub fn max_calibrated(&self) -> f64 {
        self.lines.iter().map(|l| l.calibrated_stats().max).fold(0.0, f64::max)
    }

    pub fn max_raw(&self) -> f64 {
        self.lines.iter().map(|l| l.raw_stats().max).fold(0.0, f64::max)
    }
}

/// Base points λ whose rotations e^{±iπk̂}λ are also on the grid.
pub fn complete_triples(qt: &QTable, khat: f64) -> Vec<(usize, usize, usize)> {
    let (p, m) = (turn(0.5 * khat), turn(-0.5 * khat));
    let tol = 1e-12;
    qt.lambda_grid
        .iter()
        .enumerate()
        .filter_map(|(i, &l)| Some((i, qt.find(m * l, tol)?, qt.find(p * l, tol)?)))
        .filter(|&(i, a, b)| i != a && i != b || qt.lambda_grid[i] == C::default())
        .collect()
}

fn relation_from_table(
    qt: &QTable,
    triples: &[(usize, usize, usize)],
    idx: &Indices,
    s: &WeylElement,
    line: Line,
) -> RelationReport {
    let (a, b, c) = relation_labels(s, line);
    let (pair, single) = match line {
        Line::One => (&qt.q, &qt.qstar),
        Line::Two => (&qt.qstar, &qt.q),
    };
    let gamma = relation_phase(s, idx, line);
    let sign = if s.p() == 0 { 1.0 } else { -1.0 };
    let mut rhs = Vec::new();
    let mut lhs = Vec::new();
    let mut lambdas = Vec::new();
    for &(i, im, ip) in triples {
        let v = RelationSample {
            a_minus: pair[a - 1][im],
            a_plus: pair[a - 1][ip],
            b_minus: pair[b - 1][im],
            b_plus: pair[b - 1][ip],
            c_at: single[c - 1][i],
        };
        rhs.push(relation_rhs(gamma, &v));
        lhs.push(sign * v.c_at);
        lambdas.push(qt.lambda_grid[i]);
    }
    let predicted = predicted_calibration(s, idx, line);
    let fitted = calibrate(&rhs, &lhs);
    RelationReport {
        line,
        labels: (a, b, c),
        lambdas,
        predicted,
        fitted,
        raw: relative_residuals(&rhs, &lhs, predicted),
        calibrated: relative_residuals(&rhs, &lhs, fitted),
    }
}

pub fn qq_residuals(qt: &QTable, idx: &Indices, khat: f64, sector: &WeylElement) -> Result<QQReport> {
    let triples = complete_triples(qt, khat);
    if triples.is_empty() {
        return Err(Error::InsufficientGrid);
    }
    Ok(QQReport {
        sector: *sector,
        lines: [
            relation_from_table(qt, &triples, idx, sector, Line::One),
            relation_from_table(qt, &triples, idx, sector, Line::Two),
        ],
    })
}

/// Which function a root belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootKind {
    ZeroOfQ,
    ZeroOfQstar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetheRoot {
    pub sector: WeylElement,
    pub which: RootKind,
    pub lambda_root: C,
    /// |Q(λ_root)| relative to the largest |Q| seen on the ray.
    pub refine_residual: f64,
    /// |Q| after each secant step, relative to the same scale.
    pub refine_trace: Vec<f64>,
    pub ba_residual: f64,
}

/// λ = e^{iφ}r for r in [r_min, r_max].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RaySpec {
    pub phase: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub n_samples: usize,
}

impl RaySpec {
    /// The ray of real positive E = −((k+3)/3)^{3(k+2)}λ for E in [e_min, e_max].
    pub fn real_e(k: f64, e_min: f64, e_max: f64, n_samples: usize) -> Self {
        let scale = ((k + 3.0) / 3.0).powf(3.0 * (k + 2.0));
        RaySpec {
            phase: PI,
            r_min: e_min / scale,
            r_max: e_max / scale,
            n_samples,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_min >= 0.0 && self.r_max > self.r_min && self.n_samples >= 3) {
            return Err(Error::Domain(format!("bad ray {self:?}")));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<C> {
        let n = self.n_samples;
        (0..n)
            .map(|i| C::from_polar(self.r_min + (self.r_max - self.r_min) * i as f64 / (n - 1) as f64, self.phase))
            .collect()
    }
}

/// A root located on a ray before and after refinement.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinedZero {
    pub lambda: C,
    pub residual: f64,
    pub trace: Vec<f64>,
}

/// Local minima of |f| along the ray, each refined by complex secant steps
/// until |f| < root_tol·max|f|. Minima shallower than `prominence` relative
/// to their higher neighbour are skipped.
pub fn find_zeros<F>(f: F, ray: &RaySpec, root_tol: f64, prominence: f64) -> Result<Vec<RefinedZero>>
where
    F: Fn(C) -> Result<C> + Sync,
{
    ray.validate()?;
    let pts = ray.points();
    let vals: Vec<C> = pts.par_iter().map(|&l| f(l)).collect::<Result<_>>()?;
    let mags: Vec<f64> = vals.iter().map(|v| v.norm()).collect();
    let scale = mags.iter().cloned().fold(0.0, f64::max);
    let mut out = Vec::new();
    for i in 1..pts.len() - 1 {
        if !(mags[i] <= mags[i - 1] && mags[i] < mags[i + 1]) {
            continue;
        }
        if mags[i] > prominence * mags[i - 1].max(mags[i + 1]) {
            continue;
        }
        let j = if mags[i - 1] < mags[i + 1] { i - 1 } else { i + 1 };
        let (mut x0, mut f0) = (pts[j], vals[j]);
        let (mut x1, mut f1) = (pts[i], vals[i]);
        let mut trace = vec![f1.norm() / scale];
        for _ in 0..60 {
            if f1.norm() < root_tol * scale {
                break;
            }
            let d = f1 - f0;
            if d.norm() == 0.0 {
                break;
            }
            let x2 = x1 - f1 * (x1 - x0) / d;
            let f2 = f(x2)?;
            x0 = x1;
            f0 = f1;
            x1 = x2;
            f1 = f2;
            trace.push(f1.norm() / scale);
        }
        if f1.norm() < root_tol * scale
            && !out
                .iter()
                .any(|z: &RefinedZero| (z.lambda - x1).norm() < 1e-8 * (1.0 + x1.norm()))
        {
            out.push(RefinedZero {
                lambda: x1,
                residual: f1.norm() / scale,
                trace,
            });
        }
    }
    Ok(out)
}

/// −e^{−2iπγ}F(e^{2iπk̂}λ)/F(e^{−2iπk̂}λ) and G(e^{iπk̂}λ)/G(e^{−iπk̂}λ) at a
/// zero λ of F, where (F, G, γ) = (Q_{s(1)}, Q*_{s(3)}, s(γ)) or
/// (Q*_{s(3)}, Q_{s(1)}, s(γ*)).
pub fn bethe_sides(gamma: C, f_pp: C, f_mm: C, g_p: C, g_m: C) -> (C, C) {
    (-e_ipi(-2.0 * gamma) * f_pp / f_mm, g_p / g_m)
}

/// |LHS/RHS − 1|; unchanged when F or G are rescaled.
pub fn bethe_double_ratio(gamma: C, f_pp: C, f_mm: C, g_p: C, g_m: C) -> f64 {
    let (l, r) = bethe_sides(gamma, f_pp, f_mm, g_p, g_m);
    (l / r - 1.0).norm()
}

/// Evaluators of the six functions, e.g. backed by the connection pipeline.
pub trait QSource: Sync {
    fn q(&self, lam: C) -> Result<[C; 3]>;
    fn qstar(&self, lam: C) -> Result<[C; 3]>;
}

impl QSource for crate::connection::QEvaluator {
    fn q(&self, lam: C) -> Result<[C; 3]> {
        crate::connection::QEvaluator::q(self, lam)
    }
    fn qstar(&self, lam: C) -> Result<[C; 3]> {
        crate::connection::QEvaluator::qstar(self, lam)
    }
}

fn pick(src: &dyn QSource, which: RootKind, label: usize, lam: C) -> Result<C> {
    let v = match which {
        RootKind::ZeroOfQ => src.q(lam)?,
        RootKind::ZeroOfQstar => src.qstar(lam)?,
    };
    let x = v[label - 1];
    if !(x.re.is_finite() && x.im.is_finite()) {
        return Err(Error::EvaluationFailure(format!("non-finite Q at λ = {lam}")));
    }
    Ok(x)
}

/// Labels of (F, G) for a root kind in sector s.
fn bethe_labels(s: &WeylElement, which: RootKind) -> (usize, usize) {
    let [s1, _, s3] = s.perm;
    match which {
        RootKind::ZeroOfQ => (s1, s3),
        RootKind::ZeroOfQstar => (s3, s1),
    }
}

pub fn bethe_residual(root: &BetheRoot, src: &dyn QSource, idx: &Indices, khat: f64) -> Result<f64> {
    let s = &root.sector;
    let (fl, gl) = bethe_labels(s, root.which);
    let (fk, gk) = match root.which {
        RootKind::ZeroOfQ => (RootKind::ZeroOfQ, RootKind::ZeroOfQstar),
        RootKind::ZeroOfQstar => (RootKind::ZeroOfQstar, RootKind::ZeroOfQ),
    };
    let line = match root.which {
        RootKind::ZeroOfQ => Line::One,
        RootKind::ZeroOfQstar => Line::Two,
    };
    let gamma = relation_phase(s, idx, line);
    let l = root.lambda_root;
    let f_pp = pick(src, fk, fl, turn(khat) * l)?;
    let f_mm = pick(src, fk, fl, turn(-khat) * l)?;
    let g_p = pick(src, gk, gl, turn(0.5 * khat) * l)?;
    let g_m = pick(src, gk, gl, turn(-0.5 * khat) * l)?;
    Ok(bethe_double_ratio(gamma, f_pp, f_mm, g_p, g_m))
}

/// Zeros of Q_{s(1)} (or Q*_{s(3)}) on a ray, refined and with their Bethe
/// residuals.
pub fn find_q_zeros(
    src: &dyn QSource,
    idx: &Indices,
    khat: f64,
    sector: &WeylElement,
    which: RootKind,
    ray: &RaySpec,
    root_tol: f64,
) -> Result<Vec<BetheRoot>> {
    let (fl, _) = bethe_labels(sector, which);
    let zeros = find_zeros(|l| pick(src, which, fl, l), ray, root_tol, 0.5)?;
    zeros
        .into_iter()
        .map(|z| {
            let mut root = BetheRoot {
                sector: *sector,
                which,
                lambda_root: z.lambda,
                refine_residual: z.residual,
                refine_trace: z.trace,
                ba_residual: f64::NAN,
            };
            root.ba_residual = bethe_residual(&root, src, idx, khat)?;
            Ok(root)
        })
        .collect()
}

/// P_i(t) = t^{β_i}Q_i(t)/Q_i(0) and P̄_i(t) = t^{β*_i}Q*_i(t)/Q*_i(0) on the
/// grid, with the six quadratic relations checked in the equivalent form
/// K·t·P̄_c(t) = q^{γ}P_a(q̃t)P_b(q̃⁻¹t) − q^{−γ}P_a(q̃⁻¹t)P_b(q̃t),
/// q = e^{iπg}, q̃ = e^{−iπk̂}, K predicted as the BHK constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralEigenvalue {
    pub t_grid: Vec<C>,
    pub p: [Vec<C>; 3],
    pub pbar: [Vec<C>; 3],
    pub bhk: BHKParams,
    pub relations: Vec<BhkRelation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BhkRelation {
    /// 1-based BHK label j of c_j.
    pub bhk_label: usize,
    pub line: Line,
    pub sector: WeylElement,
    pub predicted: C,
    pub fitted: C,
    pub calibrated: Vec<f64>,
    /// Flagged instead of asserted when the constant vanishes.
    pub degenerate: bool,
}

/// BHK label j of the relation producing our index c: labels run in reverse
/// (BHK's Q_j pairs with our β_{4−j}).
pub fn bhk_label(c: usize) -> usize {
    4 - c
}

/// The sectors whose two lines give the six BHK relations, keyed by the
/// BHK constant: c₁ ↔ (2,1,3), c₂ ↔ (1,3,2), c₃ ↔ σ = (3,2,1).
pub fn bhk_sectors() -> [WeylElement; 3] {
    [
        WeylElement::from_perm([2, 1, 3]).unwrap(),
        WeylElement::from_perm([1, 3, 2]).unwrap(),
        WeylElement::sigma(),
    ]
}

fn bhk_constant(b: &BHKParams, j: usize) -> C {
    match j {
        1 => b.c1,
        2 => b.c2,
        _ => b.c3,
    }
}

pub fn bhk_eigenvalues(qt: &QTable, idx: &Indices, khat: f64, r: &RPair) -> Result<SpectralEigenvalue> {
    let zero = qt.find(C::default(), 0.0).ok_or(Error::InsufficientGrid)?;
    let q0 = qt.point(zero);
    for i in 0..3 {
        if q0.q[i].norm() < 1e-14 || q0.qstar[i].norm() < 1e-14 {
            return Err(Error::VanishingQAtZero(i + 1));
        }
    }
    // λ on the cover: principal argument for base points, rotated ones
    // inherit ±πk̂.
    let triples = complete_triples(qt, khat);
    if triples.iter().all(|&(i, _, _)| qt.lambda_grid[i] == C::default()) {
        return Err(Error::InsufficientGrid);
    }
    let tpow = |t: CoverPoint, b: C| cover_pow(t, b);
    let n = qt.len();
    let mut p: [Vec<C>; 3] = Default::default();
    let mut pbar: [Vec<C>; 3] = Default::default();
    for j in 0..n {
        for i in 0..3 {
            let (pv, pb) = if qt.lambda_grid[j] == C::default() {
                (C::default(), C::default())
            } else {
                let t = CoverPoint::from_complex(qt.lambda_grid[j]);
                (
                    tpow(t, idx.beta[i]) * qt.q[i][j] / q0.q[i],
                    tpow(t, idx.beta_star[i]) * qt.qstar[i][j] / q0.qstar[i],
                )
            };
            p[i].push(pv);
            pbar[i].push(pb);
        }
    }
    let bhk = bhk_params(&crate::params::OperParams::new(-2.0 - khat, 0.0, 0.0), r);
    let q = CoverPoint::new(1.0, PI * bhk.g);
    let mut relations = Vec::new();
    for s in bhk_sectors() {
        for line in [Line::One, Line::Two] {
            let (a, b, c) = relation_labels(&s, line);
            let gamma = relation_phase(&s, idx, line);
            let (pair, single, bpair, bsingle) = match line {
                Line::One => (&qt.q, &qt.qstar, &idx.beta, &idx.beta_star),
                Line::Two => (&qt.qstar, &qt.q, &idx.beta_star, &idx.beta),
            };
            let (pa0, pb0, pc0) = match line {
                Line::One => (q0.q[a - 1], q0.q[b - 1], q0.qstar[c - 1]),
                Line::Two => (q0.qstar[a - 1], q0.qstar[b - 1], q0.q[c - 1]),
            };
            let mut rhs = Vec::new();
            let mut lhs = Vec::new();
            for &(i, im, ip) in &triples {
                if qt.lambda_grid[i] == C::default() {
                    continue;
                }
                let t = CoverPoint::from_complex(qt.lambda_grid[i]);
                let tm = t.rotate(-0.5 * khat);
                let tp = t.rotate(0.5 * khat);
                let pf = |vals: &Vec<C>, at: CoverPoint, j: usize, beta: C, q0: C| tpow(at, beta) * vals[j] / q0;
                let pa_m = pf(&pair[a - 1], tm, im, bpair[a - 1], pa0);
                let pa_p = pf(&pair[a - 1], tp, ip, bpair[a - 1], pa0);
                let pb_m = pf(&pair[b - 1], tm, im, bpair[b - 1], pb0);
                let pb_p = pf(&pair[b - 1], tp, ip, bpair[b - 1], pb0);
                let pc = pf(&single[c - 1], t, i, bsingle[c - 1], pc0);
                rhs.push(cover_pow(q, gamma) * pa_m * pb_p - cover_pow(q, -gamma) * pa_p * pb_m);
                lhs.push(t.to_complex() * pc);
            }
            let label = bhk_label(c);
            let predicted = bhk_constant(&bhk, label);
            let fitted = calibrate(&rhs, &lhs);
            relations.push(BhkRelation {
                bhk_label: label,
                line,
                sector: s,
                predicted,
                fitted,
                calibrated: relative_residuals(&rhs, &lhs, fitted),
                degenerate: predicted.norm() < 1e-12,
            });
        }
    }
    Ok(SpectralEigenvalue {
        t_grid: qt.lambda_grid.clone(),
        p,
        pbar,
        bhk,
        relations,
    })
}
