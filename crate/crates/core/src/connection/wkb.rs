use num_complex::Complex64;

use crate::covercx::{cover_pow_real, CoverPoint};
use crate::error::{Error, Result};
use crate::oper::ScalarOper;

const LOG_TOL: f64 = 1e-8;

/// Generalized binomial coefficient C(a, l).
fn binom(a: f64, l: usize) -> f64 {
    (0..l).fold(1.0, |c, i| c * (a - i as f64) / (i as f64 + 1.0))
}

/// q(z,λ) = z^{−2/3}(1 + Σ_{l≥1} c_l λ^l z^{−lk̂}) with c_l = C(1/3, l), kept
/// for l ≤ ⌊1/(3k̂)⌋, and its term-by-term primitive S.
#[derive(Debug, Clone, PartialEq)]
pub struct WKBPrimitive {
    pub khat: f64,
    /// c_0 = 1, c_1, …
    pub coeffs: Vec<f64>,
    /// Set when some l·k̂ is within tolerance of 1/3, so that the term
    /// integrates to a logarithm.
    pub log_resonant: bool,
}

pub fn build_wkb(khat: f64) -> Result<WKBPrimitive> {
    if !(khat > 0.0 && khat < 1.0) {
        return Err(Error::Domain(format!("k̂ = {khat} outside (0, 1)")));
    }
    let l_max = (1.0 / (3.0 * khat) + LOG_TOL).floor() as usize;
    let coeffs: Vec<f64> = (0..=l_max).map(|l| binom(1.0 / 3.0, l)).collect();
    let log_resonant = (1..=l_max).any(|l| (l as f64 * khat - 1.0 / 3.0).abs() < LOG_TOL);
    Ok(WKBPrimitive {
        khat,
        coeffs,
        log_resonant,
    })
}

impl WKBPrimitive {
    fn exponent(&self, l: usize) -> f64 {
        -2.0 / 3.0 - l as f64 * self.khat
    }

    pub fn q(&self, z: CoverPoint, lam: Complex64) -> Complex64 {
        let mut lp = Complex64::new(1.0, 0.0);
        let mut acc = Complex64::default();
        for (l, c) in self.coeffs.iter().enumerate() {
            acc += c * lp * cover_pow_real(z, self.exponent(l));
            lp *= lam;
        }
        acc
    }

    /// S(z,λ) with ∫y^e = y^{e+1}/(e+1) and ∫y^{−1} = log y.
    pub fn s(&self, z: CoverPoint, lam: Complex64) -> Complex64 {
        let mut lp = Complex64::new(1.0, 0.0);
        let mut acc = Complex64::default();
        for (l, c) in self.coeffs.iter().enumerate() {
            let e = self.exponent(l) + 1.0;
            let prim = if e.abs() < LOG_TOL { z.ln() } else { cover_pow_real(z, e) / e };
            acc += c * lp * prim;
            lp *= lam;
        }
        acc
    }
}

/// Formal solution y = Ψ'/Ψ = Σ c_{j,n} λⁿ z^{−(2+j)/3 − nk̂} of the Riccati
/// equation y'' + 3yy' + y³ − W₁y + W₂ = 0 on the subdominant branch
/// c_{0,0} = −1, valid as z → +∞.
#[derive(Debug, Clone)]
pub struct AsymptoticSeries {
    pub khat: f64,
    /// coeffs[j][n]
    pub coeffs: Vec<Vec<Complex64>>,
    pub wkb: WKBPrimitive,
}

impl AsymptoticSeries {
    pub fn new(op: &ScalarOper, j_max: usize, n_max: usize) -> Result<Self> {
        let khat = op.khat();
        let wkb = build_wkb(khat)?;
        // W₁ = Σ u_m z^{−m}, W₂ = Σ v_m z^{−m} + f λ z^k.
        let m_need = j_max / 3 + 4;
        let u = op.v1.at_infinity(m_need);
        let v = op.v2.at_infinity(m_need);
        let scale = 1.0 + u.iter().chain(&v).map(|x| x.norm()).fold(0.0, f64::max);
        if u[0].norm() + u[1].norm() + v[0].norm() + v[1].norm() > 1e-10 * scale || (v[2] - 1.0).norm() > 1e-10 * scale {
            return Err(Error::Domain(
                "potentials are not W₁ = O(z⁻²), W₂ = z⁻² + O(z⁻³) at infinity".into(),
            ));
        }
        let f = op.lam_factor;
        let zero = Complex64::default();
        let e = |j: usize, n: usize| -(2.0 + j as f64) / 3.0 - n as f64 * khat;
        let mut c = vec![vec![zero; n_max + 1]; j_max + 1];
        // y² coefficients, filled as c becomes available.
        let mut y2 = vec![vec![zero; n_max + 1]; j_max + 1];
        for jj in 0..=j_max {
            for nn in 0..=n_max {
                if jj == 0 && nn == 0 {
                    c[0][0] = Complex64::new(-1.0, 0.0);
                    y2[0][0] = Complex64::new(1.0, 0.0);
                    continue;
                }
                let mut rest = zero;
                // y'' lands two steps up in j.
                if jj >= 2 {
                    let (j, n) = (jj - 2, nn);
                    rest += c[j][n] * e(j, n) * (e(j, n) - 1.0);
                }
                // 3yy': index (j₁+j₂+1, n₁+n₂).
                if jj >= 1 {
                    for j1 in 0..jj {
                        let j2 = jj - 1 - j1;
                        for n1 in 0..=nn {
                            let n2 = nn - n1;
                            rest += 3.0 * c[j1][n1] * c[j2][n2] * e(j2, n2);
                        }
                    }
                }
                // y³ without the 3c_{jj,nn} part.
                let mut y3 = zero;
                let mut y2_partial = zero;
                for j1 in 0..=jj {
                    for n1 in 0..=nn {
                        let (j2, n2) = (jj - j1, nn - n1);
                        let own1 = j1 == jj && n1 == nn;
                        let own2 = j2 == jj && n2 == nn;
                        if !own1 && !own2 {
                            y2_partial += c[j1][n1] * c[j2][n2];
                        }
                        if (j1, n1) != (0, 0) && (j2, n2) != (0, 0) {
                            y3 += y2[j1][n1] * c[j2][n2];
                        }
                    }
                }
                // y³ = Σ y²_a c_b; the (0,0) and (jj,nn) ends carry c_{jj,nn}.
                y3 += y2_partial * c[0][0];
                rest += y3;
                // −W₁y: u_m z^{−m}·z^{−(2+j)/3} is index j + 3m − 4.
                for m in 2..u.len() {
                    let shift = 3 * m - 4;
                    if shift > jj {
                        break;
                    }
                    rest -= u[m] * c[jj - shift][nn];
                }
                // W₂, with v₂ = 1 already cancelled by c₀₀³.
                if nn == 0 && jj % 3 == 0 && jj > 0 {
                    let m = jj / 3 + 2;
                    if m < v.len() {
                        rest += v[m];
                    }
                }
                if nn == 1 && jj == 0 {
                    rest += f;
                }
                let cj = -rest / 3.0;
                c[jj][nn] = cj;
                y2[jj][nn] = y2_partial + 2.0 * c[0][0] * cj;
            }
        }
        Ok(AsymptoticSeries { khat, coeffs: c, wkb })
    }

    fn exponent(&self, j: usize, n: usize) -> f64 {
        -(2.0 + j as f64) / 3.0 - n as f64 * self.khat
    }

    /// True for the terms that make up −S and the z^{2/3} prefactor.
    fn is_leading(&self, j: usize, n: usize) -> bool {
        self.exponent(j, n) + 1.0 > -LOG_TOL
    }

    /// (y, y') at z.
    pub fn riccati(&self, z: CoverPoint, lam: Complex64) -> (Complex64, Complex64) {
        let mut y = Complex64::default();
        let mut dy = Complex64::default();
        let zc = z.to_complex();
        for (j, row) in self.coeffs.iter().enumerate() {
            let mut lp = Complex64::new(1.0, 0.0);
            for (n, cjn) in row.iter().enumerate() {
                let e = self.exponent(j, n);
                let t = cjn * lp * cover_pow_real(z, e);
                y += t;
                dy += t * e / zc;
                lp *= lam;
            }
        }
        (y, dy)
    }

    /// ln Ψ − (−S + (2/3) ln z): the decaying part of the primitive of y.
    pub fn log_correction(&self, z: CoverPoint, lam: Complex64) -> Complex64 {
        let mut acc = Complex64::default();
        for (j, row) in self.coeffs.iter().enumerate() {
            let mut lp = Complex64::new(1.0, 0.0);
            for (n, cjn) in row.iter().enumerate() {
                if !self.is_leading(j, n) {
                    let e = self.exponent(j, n) + 1.0;
                    acc += cjn * lp * cover_pow_real(z, e) / e;
                }
                lp *= lam;
            }
        }
        acc
    }

    /// Size of the highest-order j-shell at z, as a proxy for the truncation error.
    pub fn tail_estimate(&self, z: CoverPoint, lam: Complex64) -> f64 {
        let j = self.coeffs.len() - 1;
        let mut lp = 1.0;
        let mut acc = 0.0;
        for (n, cjn) in self.coeffs[j].iter().enumerate() {
            acc += cjn.norm() * lp * z.modulus.powf(self.exponent(j, n) + 1.0);
            lp *= lam.norm();
        }
        acc
    }

    /// (Ψ, Ψ', Ψ'') normalized so that Ψ = z^{2/3}e^{−S}(1 + o(1)).
    pub fn jet(&self, z: CoverPoint, lam: Complex64) -> [Complex64; 3] {
        let ln_psi = -self.wkb.s(z, lam) + z.ln() * (2.0 / 3.0) + self.log_correction(z, lam);
        let psi = ln_psi.exp();
        let (y, dy) = self.riccati(z, lam);
        [psi, y * psi, (dy + y * y) * psi]
    }
}
