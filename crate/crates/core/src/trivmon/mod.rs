//! The trivial-monodromy algebraic system for the sites {aⱼ, wⱼ}.

mod certificate;
mod io;
mod monodromy;
mod newton;

pub use certificate::{frobenius_certificate, FrobeniusCertificate, CERTIFICATE_TOL};
pub use io::{SolutionCertificates, SolutionFile, SolutionRecord};
pub use monodromy::{numeric_monodromy, numeric_monodromy_with, MonodromyMatrix};
pub use newton::{newton_refine, newton_solve, SolverConfig};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oper::StateSolution;
use crate::params::OperParams;

type C = Complex64;

/// Which form of the second family of equations to use.
///
/// `Derived` is what the local constraints at each site (the q₁₂, q₂₂ and
/// weight-4 conditions of the Frobenius recursion) reduce to for this oper,
/// with a₂₂ = ((2k+3)a − k²)/3. `Printed` carries the constants
/// A = 14k² + 50k − 8r̄¹ + 45, B = 27(r̄¹ − r̄²) − k(7k² + 7k + 9r̄² − 13r̄¹ + 9)
/// and the pair coefficients as usually quoted; its solutions do not give
/// trivial monodromy for this oper and it is kept for comparison only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemForm {
    #[default]
    Derived,
    Printed,
}

impl SystemForm {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "derived" => Ok(SystemForm::Derived),
            "printed" => Ok(SystemForm::Printed),
            _ => Err(Error::Parse(format!("unknown system form {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualVector {
    /// F₁..F_N from the quadratic equations, then F_{N+1}..F_{2N}.
    pub f: Vec<C>,
    pub a_const: C,
    pub b_const: C,
}

impl ResidualVector {
    pub fn norm_inf(&self) -> f64 {
        self.f.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }
}

/// (A, B) of the linear part A·aℓ + B − 9(k+2)wℓ.
///
/// Derived: A = 2(k+3)((k+1)(k+3) − r̄¹), B = (k+3)((k+9)r̄¹ − 9r̄² − k(k+1)(k+3)).
pub fn system_constants_for(form: SystemForm, p: &OperParams) -> (C, C) {
    let k = p.k;
    match form {
        SystemForm::Printed => {
            let a = -8.0 * p.r1bar + (14.0 * k * k + 50.0 * k + 45.0);
            let b = (p.r1bar - p.r2bar) * 27.0 - (p.r2bar * 9.0 - p.r1bar * 13.0 + (7.0 * k * k + 7.0 * k + 9.0)) * k;
            (a, b)
        }
        SystemForm::Derived => {
            let x = k + 3.0;
            let a = (C::from((k + 1.0) * x) - p.r1bar) * (2.0 * x);
            let b = (p.r1bar * (k + 9.0) - p.r2bar * 9.0 - k * (k + 1.0) * x) * x;
            (a, b)
        }
    }
}

pub fn system_constants(p: &OperParams) -> (C, C) {
    system_constants_for(SystemForm::default(), p)
}

fn check_sites(w: &[C]) -> Result<()> {
    let mut gap = f64::INFINITY;
    for (i, wi) in w.iter().enumerate() {
        gap = gap.min(wi.norm());
        for wj in &w[i + 1..] {
            gap = gap.min((wi - wj).norm());
        }
    }
    if gap < 1e-12 {
        return Err(Error::CollidedSites(gap));
    }
    Ok(())
}

/// Pair coefficients (α, β, γ) of x³, x², x in the cubic equation of site ℓ
/// against site j, each affine in (aℓ, aj): value = c + dl·aℓ + dj·aj.
struct PairCoeffs {
    c: [f64; 3],
    dl: [f64; 3],
    dj: [f64; 3],
}

impl PairCoeffs {
    fn new(form: SystemForm, k: f64) -> Self {
        let k2 = k * k;
        match form {
            SystemForm::Printed => PairCoeffs {
                c: [18.0 * k, 12.0 * k + 9.0 * k2, 9.0 * k + 16.0 * k2],
                dl: [-18.0, -9.0 * k, -5.0 * k],
                dj: [-18.0, -(63.0 + 6.0 * k), 6.0 * (k2 + 10.0 * k + 6.0)],
            },
            SystemForm::Derived => PairCoeffs {
                c: [-18.0 * k, -12.0 * k2 - 9.0 * k, -4.0 * k2 * k - 12.0 * k2 - 9.0 * k],
                dl: [18.0, 9.0 * k, 2.0 * k2 + 3.0 * k],
                dj: [18.0, 15.0 * k + 18.0, 6.0 * k2 + 21.0 * k + 18.0],
            },
        }
    }

    fn eval(&self, al: C, aj: C) -> [C; 3] {
        std::array::from_fn(|i| al * self.dl[i] + aj * self.dj[i] + self.c[i])
    }
}

pub fn residuals(a: &[C], w: &[C], p: &OperParams) -> Result<ResidualVector> {
    residuals_for(SystemForm::default(), a, w, p)
}

pub fn residuals_for(form: SystemForm, a: &[C], w: &[C], p: &OperParams) -> Result<ResidualVector> {
    if a.len() != w.len() {
        return Err(Error::Domain(format!("{} a-values for {} sites", a.len(), w.len())));
    }
    check_sites(w)?;
    let n = a.len();
    let k = p.k;
    let (ac, bc) = system_constants_for(form, p);
    let pc = PairCoeffs::new(form, k);
    let mut f = vec![C::default(); 2 * n];
    for l in 0..n {
        let (al, wl) = (a[l], w[l]);
        let mut s1 = C::default();
        let mut s2 = C::default();
        for j in 0..n {
            if j == l {
                continue;
            }
            let x = wl / (wl - w[j]);
            s1 += x * x * 9.0 + x * 3.0 * k;
            let [alpha, beta, gamma] = pc.eval(al, a[j]);
            s2 += alpha * x * x * x + beta * x * x + gamma * x;
        }
        f[l] = al * al - al * k + (k * k + 3.0 * k) - p.r1bar * 3.0 - s1;
        f[n + l] = ac * al + bc - wl * 9.0 * (k + 2.0) - s2;
    }
    Ok(ResidualVector {
        f,
        a_const: ac,
        b_const: bc,
    })
}

/// ∂F/∂(a₁..a_N, w₁..w_N), analytic.
pub fn jacobian(a: &[C], w: &[C], p: &OperParams) -> Result<DMatrix<C>> {
    jacobian_for(SystemForm::default(), a, w, p)
}

pub fn jacobian_for(form: SystemForm, a: &[C], w: &[C], p: &OperParams) -> Result<DMatrix<C>> {
    check_sites(w)?;
    let n = a.len();
    let k = p.k;
    let (ac, _) = system_constants_for(form, p);
    let pc = PairCoeffs::new(form, k);
    let mut jm = DMatrix::<C>::zeros(2 * n, 2 * n);
    for l in 0..n {
        let (al, wl) = (a[l], w[l]);
        jm[(l, l)] = al * 2.0 - k;
        jm[(n + l, l)] = ac;
        jm[(n + l, n + l)] = C::from(-9.0 * (k + 2.0));
        for j in 0..n {
            if j == l {
                continue;
            }
            let d = wl - w[j];
            let x = wl / d;
            // ∂x/∂wℓ = −wⱼ/d², ∂x/∂wⱼ = wℓ/d²
            let x_wl = -w[j] / (d * d);
            let x_wj = wl / (d * d);
            // g = 9x² + 3kx
            let g_x = x * 18.0 + 3.0 * k;
            jm[(l, n + l)] -= g_x * x_wl;
            jm[(l, n + j)] -= g_x * x_wj;
            // h = αx³ + βx² + γx
            let [alpha, beta, gamma] = pc.eval(al, a[j]);
            let (x2, x3) = (x * x, x * x * x);
            let h_x = alpha * x2 * 3.0 + beta * x * 2.0 + gamma;
            let h_al = x3 * pc.dl[0] + x2 * pc.dl[1] + x * pc.dl[2];
            let h_aj = x3 * pc.dj[0] + x2 * pc.dj[1] + x * pc.dj[2];
            jm[(n + l, l)] -= h_al;
            jm[(n + l, j)] -= h_aj;
            jm[(n + l, n + l)] -= h_x * x_wl;
            jm[(n + l, n + j)] -= h_x * x_wj;
        }
    }
    Ok(jm)
}

/// The two level-1 solutions:
/// a± = (k ± √(12r̄¹ − 3k² − 12k))/2, w± = (A·a± + B)/(9(k+2)).
pub fn solve_n1_closed_form(p: &OperParams) -> Result<[StateSolution; 2]> {
    solve_n1_closed_form_for(SystemForm::default(), p)
}

/// As [`solve_n1_closed_form`]; `residual_norm` of the returned states is
/// always measured in the derived form.
pub fn solve_n1_closed_form_for(form: SystemForm, p: &OperParams) -> Result<[StateSolution; 2]> {
    let k = p.k;
    let disc = p.r1bar * 12.0 - (3.0 * k * k + 12.0 * k);
    if disc.norm() < 1e-14 {
        return Err(Error::DegenerateDiscriminant);
    }
    let sq = disc.sqrt();
    let (ac, bc) = system_constants_for(form, p);
    let make = |a: C| -> Result<StateSolution> {
        let w = (ac * a + bc) / (9.0 * (k + 2.0));
        StateSolution::new(*p, vec![a], vec![w])
    };
    Ok([make((sq + k) / 2.0)?, make((-sq + k) / 2.0)?])
}
