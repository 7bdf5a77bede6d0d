//! Rational functions vanishing at infinity, stored as partial fractions.

use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleTerm {
    pub pole: Complex64,
    pub order: u32,
    pub coeff: Complex64,
}

/// Σ coeff·(z − pole)^{−order}.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RationalFn {
    terms: Vec<PoleTerm>,
}

/// Truncated Laurent series Σ_{j ≥ lowest} coeffs[j − lowest]·u^j.
#[derive(Debug, Clone, PartialEq)]
pub struct Laurent {
    pub lowest: i32,
    pub coeffs: Vec<Complex64>,
}

impl Laurent {
    pub fn get(&self, j: i32) -> Complex64 {
        let idx = j - self.lowest;
        if idx < 0 {
            return Complex64::default();
        }
        self.coeffs.get(idx as usize).copied().unwrap_or_default()
    }
}

fn same_pole(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= 1e-14 * (1.0 + a.norm().max(b.norm()))
}

/// C(n + j − 1, j), the coefficients of (1 − x)^{−n}.
fn neg_binom(n: u32, j: usize) -> f64 {
    let mut c = 1.0;
    for i in 0..j {
        c *= (n as f64 + i as f64) / (i as f64 + 1.0);
    }
    c
}

impl RationalFn {
    pub fn new() -> Self {
        RationalFn::default()
    }

    pub fn terms(&self) -> &[PoleTerm] {
        &self.terms
    }

    pub fn add_term(&mut self, pole: Complex64, order: u32, coeff: Complex64) {
        if order == 0 {
            return;
        }
        if let Some(t) = self.terms.iter_mut().find(|t| t.order == order && same_pole(t.pole, pole)) {
            t.coeff += coeff;
        } else {
            self.terms.push(PoleTerm { pole, order, coeff });
        }
    }

    pub fn add(&self, other: &RationalFn) -> RationalFn {
        let mut out = self.clone();
        for t in &other.terms {
            out.add_term(t.pole, t.order, t.coeff);
        }
        out
    }

    pub fn scale(&self, c: Complex64) -> RationalFn {
        RationalFn {
            terms: self
                .terms
                .iter()
                .map(|t| PoleTerm {
                    coeff: t.coeff * c,
                    ..*t
                })
                .collect(),
        }
    }

    pub fn derivative(&self) -> RationalFn {
        let terms = self
            .terms
            .iter()
            .map(|t| PoleTerm {
                pole: t.pole,
                order: t.order + 1,
                coeff: -t.coeff * t.order as f64,
            })
            .collect();
        RationalFn { terms }
    }

    /// z ↦ W(s·z).
    pub fn compose_scale(&self, s: Complex64) -> RationalFn {
        let terms = self
            .terms
            .iter()
            .map(|t| PoleTerm {
                pole: t.pole / s,
                order: t.order,
                coeff: t.coeff * s.powi(-(t.order as i32)),
            })
            .collect();
        RationalFn { terms }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.terms
            .iter()
            .map(|t| t.coeff * (z - t.pole).powi(-(t.order as i32)))
            .sum()
    }

    /// Distinct poles.
    pub fn poles(&self) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = Vec::new();
        for t in &self.terms {
            if !out.iter().any(|p| same_pole(*p, t.pole)) {
                out.push(t.pole);
            }
        }
        out
    }

    /// Order of the pole at p, ignoring coefficients below `tol` relative to
    /// the largest coefficient there; 0 if regular.
    pub fn pole_order_at(&self, p: Complex64) -> u32 {
        let here: Vec<&PoleTerm> = self.terms.iter().filter(|t| same_pole(t.pole, p)).collect();
        let scale = here.iter().map(|t| t.coeff.norm()).fold(0.0, f64::max);
        here.iter()
            .filter(|t| t.coeff.norm() > 1e-13 * scale)
            .map(|t| t.order)
            .max()
            .unwrap_or(0)
    }

    /// Laurent expansion in u = z − p0 up to and including u^{j_max}.
    pub fn laurent_at(&self, p0: Complex64, j_max: i32) -> Laurent {
        let lowest = -(self
            .terms
            .iter()
            .filter(|t| same_pole(t.pole, p0))
            .map(|t| t.order as i32)
            .max()
            .unwrap_or(0));
        let len = (j_max - lowest + 1).max(0) as usize;
        let mut coeffs = vec![Complex64::default(); len];
        for t in &self.terms {
            if same_pole(t.pole, p0) {
                let j = -(t.order as i32);
                if j <= j_max {
                    coeffs[(j - lowest) as usize] += t.coeff;
                }
                continue;
            }
            // (u + d)^{−n} = Σ_j C(n+j−1, j)(−1)^j d^{−n−j} u^j
            let d = p0 - t.pole;
            let inv = 1.0 / d;
            let mut dpow = inv.powi(t.order as i32);
            for j in 0..=j_max.max(-1) {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                coeffs[(j - lowest) as usize] += t.coeff * dpow * (sign * neg_binom(t.order, j as usize));
                dpow *= inv;
            }
        }
        Laurent { lowest, coeffs }
    }

    /// Coefficients of z^{−m}, m = 0..=m_max, at infinity.
    pub fn at_infinity(&self, m_max: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); m_max + 1];
        for t in &self.terms {
            // (z − p)^{−n} = Σ_j C(n+j−1, j) p^j z^{−n−j}
            let n = t.order as usize;
            let mut pp = Complex64::new(1.0, 0.0);
            for j in 0..=m_max {
                if n + j > m_max {
                    break;
                }
                out[n + j] += t.coeff * pp * neg_binom(t.order, j);
                pp *= t.pole;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> RationalFn {
        let mut f = RationalFn::new();
        f.add_term(Complex64::new(0.0, 0.0), 2, Complex64::new(1.5, 0.0));
        f.add_term(Complex64::new(-3.0, 1.0), 3, Complex64::new(2.0, -1.0));
        f.add_term(Complex64::new(-3.0, 1.0), 1, Complex64::new(0.5, 0.0));
        f.add_term(Complex64::new(0.0, 0.0), 1, Complex64::new(-0.25, 0.0));
        f
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let f = sample();
        let z = Complex64::new(0.7, 0.4);
        let h = 1e-5;
        let fd = (f.eval(z + h) - f.eval(z - h)) / (2.0 * h);
        assert!((f.derivative().eval(z) - fd).norm() < 1e-8);
    }

    #[test]
    fn laurent_reconstructs_values() {
        let f = sample();
        for p0 in [Complex64::new(0.0, 0.0), Complex64::new(-3.0, 1.0), Complex64::new(1.0, 1.0)] {
            let l = f.laurent_at(p0, 40);
            let u = Complex64::new(0.05, -0.03);
            let approx: Complex64 = (l.lowest..=40).map(|j| l.get(j) * u.powi(j)).sum();
            let exact = f.eval(p0 + u);
            assert!((approx - exact).norm() < 1e-12 * exact.norm(), "{p0}");
        }
        assert_eq!(f.laurent_at(Complex64::new(0.0, 0.0), 3).lowest, -2);
    }

    #[test]
    fn expansion_at_infinity() {
        let f = sample();
        let c = f.at_infinity(60);
        let z = Complex64::new(40.0, 25.0);
        let approx: Complex64 = c.iter().enumerate().map(|(m, a)| a * z.powi(-(m as i32))).sum();
        assert!((approx - f.eval(z)).norm() < 1e-13 * f.eval(z).norm());
        assert_eq!(c[0], Complex64::default());
    }

    proptest! {
        #[test]
        fn compose_scale_is_substitution(ar in -3.0f64..3.0, ai in -3.0f64..3.0, zr in -2.0f64..2.0, zi in 0.1f64..2.0) {
            let f = sample();
            let s = Complex64::from_polar(1.0, ar) * (1.0 + ai.abs());
            let z = Complex64::new(zr, zi);
            let lhs = f.compose_scale(s).eval(z);
            let rhs = f.eval(s * z);
            prop_assert!((lhs - rhs).norm() <= 1e-11 * (1.0 + rhs.norm()));
        }
    }
}
