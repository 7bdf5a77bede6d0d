//! Coordinate systems on the model space and the exact maps between them.

mod legacy;
mod weyl;

pub use legacy::{legacy_convert, oper_to_legacy, LegacyParams};
pub use weyl::{dot_action, WeylElement};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperParams {
    pub k: f64,
    pub r1bar: Complex64,
    pub r2bar: Complex64,
    pub lambda: Complex64,
}

impl OperParams {
    pub fn new(k: f64, r1bar: impl Into<Complex64>, r2bar: impl Into<Complex64>) -> Self {
        OperParams {
            k,
            r1bar: r1bar.into(),
            r2bar: r2bar.into(),
            lambda: Complex64::default(),
        }
    }

    /// k = −5/2, r̄¹ = 1, r̄² = 0.
    pub fn desk() -> Self {
        OperParams::new(-2.5, 1.0, 0.0)
    }

    pub fn with_lambda(mut self, lambda: Complex64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn khat(&self) -> f64 {
        -self.k - 2.0
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k > -3.0 && self.k < -2.0) {
            return Err(Error::Domain(format!("k = {} outside (−3, −2)", self.k)));
        }
        Ok(())
    }

    pub fn is_real(&self) -> bool {
        self.r1bar.im == 0.0 && self.r2bar.im == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CFTParams {
    pub c: Complex64,
    pub delta2: Complex64,
    pub delta3: Complex64,
    pub mu: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RPair {
    pub r1: Complex64,
    pub r2: Complex64,
}

impl RPair {
    pub fn new(r1: impl Into<Complex64>, r2: impl Into<Complex64>) -> Self {
        RPair {
            r1: r1.into(),
            r2: r2.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Indices {
    pub beta: [Complex64; 3],
    pub beta_star: [Complex64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BHKParams {
    pub g: f64,
    pub p1: Complex64,
    pub p2: Complex64,
    pub q_phase: Complex64,
    pub c1: Complex64,
    pub c2: Complex64,
    pub c3: Complex64,
}

fn check_k(k: f64) -> Result<()> {
    if !(k > -3.0 && k < -2.0) {
        return Err(Error::Domain(format!("k = {k} outside (−3, −2)")));
    }
    Ok(())
}

/// Γ(k̂)³ with k̂ = −k−2, the scale in λ = −iΓ(k̂)³μ³.
fn lambda_scale(k: f64) -> Complex64 {
    -I * gamma(-k - 2.0).powi(3)
}

pub fn oper_to_cft(p: &OperParams) -> Result<CFTParams> {
    check_k(p.k)?;
    let k = p.k;
    let x = k + 3.0;
    let c = -3.0 * (4.0 * k + 9.0) * (3.0 * k + 5.0) / x;
    let r1 = p.r1bar;
    let delta2 = ((r1 - 8.0) * k * k + (r1 - 5.0) * 6.0 * k + r1 * 9.0 - 27.0) / (9.0 * x);
    let delta3 = (r1 - p.r2bar) * x.powf(1.5) / 27.0;
    let mu = (p.lambda / lambda_scale(k)).powf(1.0 / 3.0);
    Ok(CFTParams {
        c: c.into(),
        delta2,
        delta3,
        mu,
    })
}

/// Inverse of [`oper_to_cft`]. With x = k+3 the central charge reads
/// c = 75 − 36(x + 1/x); the branch with 0 < x < 1 gives k ∈ (−3, −2).
pub fn cft_to_oper(cft: &CFTParams) -> Result<OperParams> {
    let s = (75.0 - cft.c) / 36.0;
    let root = (s * s - 4.0).sqrt();
    let big = if (s + root).norm() >= (s - root).norm() {
        s + root
    } else {
        s - root
    };
    let xc = 2.0 / big;
    if xc.im.abs() > 1e-9 || !(xc.re > 0.0 && xc.re < 1.0) {
        return Err(Error::Domain(format!("no k in (−3, −2) for c = {}", cft.c)));
    }
    let k = xc.re - 3.0;
    let x = k + 3.0;
    let r1bar = (cft.delta2 * 9.0 * x + 8.0 * k * k + 30.0 * k + 27.0) / (x * x);
    let r2bar = r1bar - cft.delta3 * 27.0 / x.powf(1.5);
    let lambda = lambda_scale(k) * cft.mu.powi(3);
    Ok(OperParams { k, r1bar, r2bar, lambda })
}

pub fn r_to_rbar(r: &RPair) -> (Complex64, Complex64) {
    let (a, b) = (r.r1, r.r2);
    let r1bar = a * a - a * b + b * b - a - b;
    let r2bar = a * b * (a - b) + b * (b * 2.0 - a - 2.0);
    (r1bar, r2bar)
}

pub fn indices_from_r(r: &RPair) -> Indices {
    let (a, b) = (r.r1, r.r2);
    let one = Complex64::new(1.0, 0.0);
    Indices {
        beta: [b, a - b + one, 2.0 - a],
        beta_star: [2.0 - b, b - a + one, a],
    }
}

/// Coefficients [1, −3, 2−r̄¹, r̄²] of P and [1, −3, 2−r̄¹, 2r̄¹−r̄²] of P*,
/// highest degree first.
pub fn indicial_polys(p: &OperParams) -> ([Complex64; 4], [Complex64; 4]) {
    let one = Complex64::new(1.0, 0.0);
    let lin = 2.0 - p.r1bar;
    (
        [one, -3.0 * one, lin, p.r2bar],
        [one, -3.0 * one, lin, p.r1bar * 2.0 - p.r2bar],
    )
}

pub fn eval_poly(coeffs: &[Complex64], x: Complex64) -> Complex64 {
    coeffs.iter().fold(Complex64::default(), |acc, c| acc * x + c)
}

/// Roots of a monic cubic by simultaneous (Durand–Kerner) iteration, each
/// polished with Newton steps.
pub fn cubic_roots(coeffs: &[Complex64; 4]) -> [Complex64; 3] {
    let lead = coeffs[0];
    let c: Vec<Complex64> = coeffs.iter().map(|x| x / lead).collect();
    let scale = 1.0 + c[1..].iter().map(|x| x.norm()).fold(0.0, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut z = [seed * scale, seed.powi(2) * scale, seed.powi(3) * scale];
    for _ in 0..500 {
        let mut delta = 0.0f64;
        for i in 0..3 {
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..3 {
                if i != j {
                    den *= z[i] - z[j];
                }
            }
            if den.norm() == 0.0 {
                den = Complex64::new(1e-12, 0.0);
            }
            let step = eval_poly(&c, z[i]) / den;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 * scale {
            break;
        }
    }
    let d: Vec<Complex64> = vec![c[0] * 3.0, c[1] * 2.0, c[2]];
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let dp = eval_poly(&d, *zi);
            if dp.norm() > 1e-14 {
                *zi -= eval_poly(&c, *zi) / dp;
            }
        }
    }
    z
}

/// Recover (r¹, r²) from (r̄¹, r̄²): roots of P ordered by decreasing real
/// part give β₁ = r² and β₃ = 2 − r¹.
pub fn r_from_rbar(r1bar: Complex64, r2bar: Complex64) -> RPair {
    let p = OperParams {
        k: -2.5,
        r1bar,
        r2bar,
        lambda: Complex64::default(),
    };
    let mut roots = cubic_roots(&indicial_polys(&p).0);
    roots.sort_by(|a, b| b.re.partial_cmp(&a.re).unwrap().then(b.im.partial_cmp(&a.im).unwrap()));
    RPair {
        r1: 2.0 - roots[2],
        r2: roots[0],
    }
}

/// (s(γ), s(γ*)) = (β_{s(2)} − β_{s(1)}, β*_{s(2)} − β*_{s(3)}).
pub fn sector_phases(s: &WeylElement, idx: &Indices) -> (Complex64, Complex64) {
    let [a, b, c] = s.perm;
    (idx.beta[b - 1] - idx.beta[a - 1], idx.beta_star[b - 1] - idx.beta_star[c - 1])
}

pub fn bhk_params(p: &OperParams, r: &RPair) -> BHKParams {
    let g = p.k + 3.0;
    let p1 = (r.r1 + r.r2) / 2.0 - 1.0;
    let p2 = (r.r1 - r.r2) * (3f64.sqrt() / 2.0);
    let s3 = 3f64.sqrt();
    let e = |x: Complex64| (I * PI * x).exp();
    BHKParams {
        g,
        p1,
        p2,
        q_phase: Complex64::from_polar(1.0, PI * g),
        c1: e(p1 - p2 * s3) - e(-(p1 - p2 * s3)),
        c2: e(-2.0 * p1) - e(2.0 * p1),
        c3: e(p1 + p2 * s3) - e(-(p1 + p2 * s3)),
    }
}

/// (c, Δ₂, Δ₃) from (g, p₁, p₂) by the identities of the W₃ highest-weight
/// parametrization.
pub fn cft_from_bhk(b: &BHKParams) -> (Complex64, Complex64, Complex64) {
    let g = b.g;
    let c = 50.0 - 24.0 * (g + 1.0 / g);
    let delta2 = (b.p1 * b.p1 + b.p2 * b.p2) / g + (c - 2.0) / 24.0;
    let delta3 = b.p2 * 2.0 * (b.p2 * b.p2 - b.p1 * b.p1 * 3.0) / (3.0 * g).powf(1.5);
    (c.into(), delta2, delta3)
}

/// Number of pairs of partitions of total size N.
pub fn p2_count(n: usize) -> u64 {
    let mut p = vec![0u64; n + 1];
    p[0] = 1;
    for part in 1..=n {
        for m in part..=n {
            p[m] += p[m - part];
        }
    }
    (0..=n).map(|i| p[i] * p[n - i]).sum()
}

/// Reasons an index configuration is rejected by [`check_genericity`].
#[derive(Debug, Clone, PartialEq)]
pub enum GenericityViolation {
    IntegerGap { i: usize, j: usize, gap: Complex64 },
    Resonance { i: usize, j: usize, m: usize, n: usize },
}

/// Flags βᵢ − βⱼ ∈ ℤ and βᵢ − βⱼ + m − nk̂ = 0 for n ≤ m ≤ m_max, within tol.
pub fn check_genericity(idx: &Indices, khat: f64, tol: f64, m_max: usize) -> std::result::Result<(), GenericityViolation> {
    for i in 0..3 {
        for j in 0..3 {
            if i == j {
                continue;
            }
            let gap = idx.beta[i] - idx.beta[j];
            if gap.im.abs() < tol && (gap.re - gap.re.round()).abs() < tol {
                return Err(GenericityViolation::IntegerGap { i: i + 1, j: j + 1, gap });
            }
            for m in 0..=m_max {
                for n in 0..=m {
                    if (gap + m as f64 - n as f64 * khat).norm() < tol {
                        return Err(GenericityViolation::Resonance {
                            i: i + 1,
                            j: j + 1,
                            m,
                            n,
                        });
                    }
                }
            }
        }
    }
    Ok(())
}
