use num_complex::Complex64;

use crate::covercx::{cover_pow, cover_pow_real, turn, CoverPoint, JetValue};
use crate::error::{Error, Result};
use crate::oper::{laurent_at_zero_of, Equation, ScalarOper, StateSolution};

const RESONANCE_TOL: f64 = 1e-8;

/// Φ^{(β)}(z,λ) = z^β Σ_{m≥n≥0} c_{m,n} z^m ζ^n with ζ = λz^{−k̂}.
///
/// The coefficients do not depend on λ; it enters only through ζ.
#[derive(Debug, Clone)]
pub struct FrobeniusSeries {
    pub beta: Complex64,
    /// coeffs[m][n] for 0 ≤ n ≤ m ≤ m_trunc.
    pub coeffs: Vec<Vec<Complex64>>,
    pub m_trunc: usize,
    pub equation: Equation,
    pub khat: f64,
    /// Radius of the rational part's expansion at 0.
    pub radius: f64,
    lam_factor: Complex64,
    p: Vec<Complex64>,
    s: Vec<Complex64>,
}

/// σ(σ−1)(σ−2) − p₀σ + s₀
fn indicial(p0: Complex64, s0: Complex64, x: Complex64) -> Complex64 {
    x * (x - 1.0) * (x - 2.0) - p0 * x + s0
}

pub fn build_frobenius(sol: &StateSolution, beta: Complex64, eq: Equation, m_trunc: usize) -> Result<FrobeniusSeries> {
    FrobeniusSeries::from_oper(&ScalarOper::for_equation(sol, eq), beta, eq, m_trunc)
}

impl FrobeniusSeries {
    pub fn from_oper(op: &ScalarOper, beta: Complex64, eq: Equation, m_trunc: usize) -> Result<Self> {
        // Extra Laurent orders feed the truncation residual.
        let j_max = 2 * m_trunc + 40;
        let ld = laurent_at_zero_of(op, j_max);
        let p: Vec<Complex64> = ld.q1.clone();
        let s: Vec<Complex64> = ld.q2.iter().map(|a| a.c0).collect();
        let khat = op.khat();
        let pb = indicial(p[0], s[0], beta);
        if pb.norm() > 1e-8 * (1.0 + beta.norm().powi(3)) {
            return Err(Error::Domain(format!("β = {beta} is not an index at 0 (P(β) = {pb:e})")));
        }
        let mut coeffs: Vec<Vec<Complex64>> = Vec::with_capacity(m_trunc + 1);
        coeffs.push(vec![Complex64::new(1.0, 0.0)]);
        for m in 1..=m_trunc {
            let mut row = vec![Complex64::default(); m + 1];
            for (n, slot) in row.iter_mut().enumerate() {
                let sigma = beta + m as f64 - n as f64 * khat;
                let pm = indicial(p[0], s[0], sigma);
                if pm.norm() < RESONANCE_TOL {
                    return Err(Error::Resonance(format!("P(β+{m}−{n}k̂) = {pm:e} for β = {beta}")));
                }
                let mut acc = Complex64::default();
                for j in 1..=m {
                    if n > m - j {
                        break;
                    }
                    acc += (s[j] - p[j] * (sigma - j as f64)) * coeffs[m - j][n];
                }
                if n >= 1 {
                    acc += op.lam_factor * coeffs[m - 1][n - 1];
                }
                *slot = -acc / pm;
            }
            coeffs.push(row);
        }
        let radius = op.singular_points().iter().map(|w| w.norm()).fold(f64::INFINITY, f64::min);
        Ok(FrobeniusSeries {
            beta,
            coeffs,
            m_trunc,
            equation: eq,
            khat,
            radius,
            lam_factor: op.lam_factor,
            p,
            s,
        })
    }

    fn sigma(&self, m: usize, n: usize) -> Complex64 {
        self.beta + m as f64 - n as f64 * self.khat
    }

    /// Terms c_{m,n}λⁿz^{σ_{mn}} for every stored (m, n), row by row.
    fn terms(&self, z: CoverPoint, lam: Complex64) -> Vec<Vec<Complex64>> {
        let zb = cover_pow(z, self.beta);
        let zc = z.to_complex();
        let lz = lam * cover_pow_real(z, -self.khat);
        let mut zm = zb;
        let mut out = Vec::with_capacity(self.m_trunc + 1);
        for row in &self.coeffs {
            let mut t = zm;
            let mut r = Vec::with_capacity(row.len());
            for c in row {
                r.push(c * t);
                t *= lz;
            }
            out.push(r);
            zm *= zc;
        }
        out
    }

    /// Value and the first three derivatives of the truncated series.
    pub fn derivatives(&self, z: CoverPoint, lam: Complex64) -> [Complex64; 4] {
        let zc = z.to_complex();
        let mut acc = [Complex64::default(); 4];
        for (m, row) in self.terms(z, lam).iter().enumerate() {
            for (n, t) in row.iter().enumerate() {
                let s = self.sigma(m, n);
                let s1 = s * t;
                let s2 = (s - 1.0) * s1;
                acc[0] += t;
                acc[1] += s1;
                acc[2] += s2;
                acc[3] += (s - 2.0) * s2;
            }
        }
        [acc[0], acc[1] / zc, acc[2] / (zc * zc), acc[3] / (zc * zc * zc)]
    }

    pub fn jet(&self, z: CoverPoint, lam: Complex64) -> JetValue {
        let [v, d1, d2, _] = self.derivatives(z, lam);
        JetValue::new(v, d1, d2)
    }

    /// Jet of Φ_t(z,λ) = e^{−2πit}Φ(e^{2πit}z, e^{2πitk̂}λ).
    pub fn twisted_jet(&self, t: f64, z: CoverPoint, lam: Complex64) -> JetValue {
        let s = turn(t);
        let j = self.jet(z.rotate(t), turn(t * self.khat) * lam);
        JetValue::new(j.value / s, j.d1, j.d2 * s)
    }

    /// Σₙ|c_{m,n}λⁿz^{σ}| per shell m, relative to |z^β|.
    pub fn shell_norms(&self, z: CoverPoint, lam: Complex64) -> Vec<f64> {
        let zb = cover_pow(z, self.beta).norm();
        self.terms(z, lam)
            .iter()
            .map(|r| r.iter().map(|t| t.norm()).sum::<f64>() / zb)
            .collect()
    }

    /// Ratio-test estimate of the neglected tail, relative to |z^β|.
    pub fn truncation_estimate(&self, z: CoverPoint, lam: Complex64) -> f64 {
        let sh = self.shell_norms(z, lam);
        let m = sh.len();
        if m < 4 {
            return f64::INFINITY;
        }
        let last = sh[m - 1];
        let ratio = (sh[m - 1] / sh[m - 2]).max(sh[m - 2] / sh[m - 3]);
        if !ratio.is_finite() {
            return if last == 0.0 { 0.0 } else { f64::INFINITY };
        }
        if ratio >= 1.0 {
            return f64::INFINITY;
        }
        last * ratio / (1.0 - ratio)
    }

    /// L applied to the truncated series. Every power up to z^{β+m_trunc−3}
    /// cancels identically, so only the terms pushed past the truncation are
    /// summed; this avoids the cancellation a pointwise evaluation suffers.
    pub fn residual(&self, z: CoverPoint, lam: Complex64) -> Complex64 {
        let mt = self.m_trunc;
        let j_max = self.s.len().min(self.p.len()) - 1;
        let zc = z.to_complex();
        let zb3 = cover_pow(z, self.beta) / (zc * zc * zc);
        let lz = lam * cover_pow_real(z, -self.khat);
        let mut total = Complex64::default();
        let mut zm = zc.powi(mt as i32 + 1);
        for mp in mt + 1..=mt + j_max {
            let mut zn = zm;
            let mut shell = Complex64::default();
            for n in 0..=mp.min(mt + 1) {
                let sigma = self.sigma(mp, n);
                let mut acc = Complex64::default();
                for j in (mp - mt)..=j_max.min(mp) {
                    let m = mp - j;
                    if n > m {
                        continue;
                    }
                    acc += (self.s[j] - self.p[j] * (sigma - j as f64)) * self.coeffs[m][n];
                }
                if n >= 1 && mp - 1 <= mt && n - 1 <= mp - 1 {
                    acc += self.lam_factor * self.coeffs[mp - 1][n - 1];
                }
                shell += acc * zn;
                zn *= lz;
            }
            total += shell;
            zm *= zc;
            if shell.norm() <= 1e-30 * total.norm() {
                break;
            }
        }
        total * zb3
    }

    /// |L Φ_M| / |z^{β−3}|.
    pub fn relative_residual(&self, z: CoverPoint, lam: Complex64) -> f64 {
        let zc = z.to_complex();
        self.residual(z, lam).norm() / (cover_pow(z, self.beta) / (zc * zc * zc)).norm()
    }

    /// L Φ_M evaluated pointwise from the derivatives; loses the relative
    /// precision of the leading terms but checks `residual` independently.
    pub fn direct_residual(&self, op: &ScalarOper, z: CoverPoint, lam: Complex64) -> Complex64 {
        let [v, d1, _, d3] = self.derivatives(z, lam);
        let (w1, w2) = op.potentials(&z, lam);
        d3 - w1 * d1 + w2 * v
    }
}

/// e^{−2πi}Φ(e^{2πi}z, e^{2πik̂}λ)/Φ(z,λ); e^{2πiβ} for an exact series.
pub fn monodromy_eigencheck(series: &FrobeniusSeries, z: CoverPoint, lam: Complex64) -> Result<Complex64> {
    if z.modulus > 0.5 * series.radius {
        return Err(Error::OutOfConvergenceRegion(format!(
            "|z| = {} > {}",
            z.modulus,
            0.5 * series.radius
        )));
    }
    let zz = lam.norm() * z.modulus.powf(1.0 - series.khat);
    if zz > 1.0 {
        return Err(Error::OutOfConvergenceRegion(format!("|zζ| = {zz}")));
    }
    let num = series.jet(z.rotate(1.0), turn(series.khat) * lam).value;
    let den = series.jet(z, lam).value;
    Ok(num / (den * turn(1.0)))
}
