use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{jacobian_for, residuals_for, solve_n1_closed_form_for, SystemForm};
use crate::error::{Error, Result};
use crate::oper::StateSolution;
use crate::params::OperParams;

type C = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub n_seeds: usize,
    /// Radius of the disc the sites are drawn from.
    pub seed_box: f64,
    /// Initial step fraction while the residual is still large.
    pub damping: f64,
    pub newton_tol: f64,
    pub dedup_tol: f64,
    pub max_iter: usize,
    pub rng_seed: u64,
    #[serde(default)]
    pub form: SystemForm,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            n_seeds: 2000,
            seed_box: 40.0,
            damping: 0.5,
            newton_tol: 1e-10,
            dedup_tol: 1e-6,
            max_iter: 200,
            rng_seed: 20180117,
            form: SystemForm::Derived,
        }
    }
}

impl SolverConfig {
    /// Defaults with the seed disc sized from the level-1 solutions:
    /// radius max(10, 2·max|w(N=1)|).
    pub fn for_params(p: &OperParams) -> Self {
        let mut cfg = SolverConfig::default();
        if let Ok(sols) = solve_n1_closed_form_for(cfg.form, p) {
            let wmax = sols.iter().map(|s| s.w[0].norm()).fold(0.0, f64::max);
            cfg.seed_box = (2.0 * wmax).max(10.0);
        }
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.n_seeds > 0
            && self.seed_box > 0.0
            && self.damping > 0.0
            && self.damping <= 1.0
            && self.newton_tol > 0.0
            && self.dedup_tol > self.newton_tol
            && self.max_iter > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("invalid solver configuration {self:?}")))
        }
    }
}

fn split(x: &DVector<C>) -> (Vec<C>, Vec<C>) {
    let n = x.len() / 2;
    (x.rows(0, n).iter().copied().collect(), x.rows(n, n).iter().copied().collect())
}

fn merit(x: &DVector<C>, p: &OperParams, form: SystemForm) -> Option<f64> {
    let (a, w) = split(x);
    let r = residuals_for(form, &a, &w, p).ok()?;
    let v = r.f.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    v.is_finite().then_some(v)
}

/// Damped Newton from (a, w); returns the converged point and the number of
/// iterations used, or None.
pub fn newton_refine(a: &[C], w: &[C], p: &OperParams, cfg: &SolverConfig) -> Option<(Vec<C>, Vec<C>, usize)> {
    let mut x = DVector::from_iterator(2 * a.len(), a.iter().chain(w.iter()).copied());
    let mut f = merit(&x, p, cfg.form)?;
    for it in 0..cfg.max_iter {
        let (av, wv) = split(&x);
        let r = residuals_for(cfg.form, &av, &wv, p).ok()?;
        if r.norm_inf() < cfg.newton_tol {
            // A couple of free polishing steps while they still help.
            for _ in 0..3 {
                let Some(step) = newton_step(&x, p, cfg.form) else { break };
                let trial = &x + &step;
                match merit(&trial, p, cfg.form) {
                    Some(ft) if ft < f => {
                        x = trial;
                        f = ft;
                    }
                    _ => break,
                }
            }
            let (a, w) = split(&x);
            return Some((a, w, it));
        }
        let step = newton_step(&x, p, cfg.form)?;
        let mut t = if f < 1e-3 { 1.0 } else { cfg.damping };
        loop {
            let trial = &x + &step * C::from(t);
            if let Some(ft) = merit(&trial, p, cfg.form) {
                if ft < (1.0 - 1e-4 * t) * f {
                    x = trial;
                    f = ft;
                    break;
                }
            }
            t *= 0.5;
            if t < 1e-6 {
                return None;
            }
        }
        if x.iter().any(|c| c.norm() > 1e8) {
            return None;
        }
    }
    None
}

fn newton_step(x: &DVector<C>, p: &OperParams, form: SystemForm) -> Option<DVector<C>> {
    let (a, w) = split(x);
    let r = residuals_for(form, &a, &w, p).ok()?;
    let jm: DMatrix<C> = jacobian_for(form, &a, &w, p).ok()?;
    let rhs = -DVector::from_vec(r.f);
    jm.lu().solve(&rhs)
}

fn heap_permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(k: usize, v: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(v.clone());
            return;
        }
        for i in 0..k {
            rec(k - 1, v, out);
            let j = if k % 2 == 0 { i } else { 0 };
            v.swap(j, k - 1);
        }
    }
    let mut out = Vec::new();
    rec(n, &mut (0..n).collect(), &mut out);
    out
}

/// min over relabelings π of maxⱼ(|aⱼ − a′_{π(j)}| + |wⱼ − w′_{π(j)}|).
pub(crate) fn site_distance(a: &[C], w: &[C], b: &[C], v: &[C], perms: &[Vec<usize>]) -> f64 {
    perms
        .iter()
        .map(|pi| {
            (0..a.len())
                .map(|j| (a[j] - b[pi[j]]).norm() + (w[j] - v[pi[j]]).norm())
                .fold(0.0, f64::max)
        })
        .fold(f64::INFINITY, f64::min)
}

fn canonical(a: Vec<C>, w: Vec<C>) -> (Vec<C>, Vec<C>) {
    let mut pairs: Vec<(C, C)> = a.into_iter().zip(w).collect();
    pairs.sort_by(|x, y| x.1.re.total_cmp(&y.1.re).then(x.1.im.total_cmp(&y.1.im)));
    pairs.into_iter().unzip()
}

fn seed_point(n: usize, idx: usize, cfg: &SolverConfig, a_centres: &[C]) -> (Vec<C>, Vec<C>) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    rng.set_stream(idx as u64);
    let r2min = 0.25;
    let r2max = cfg.seed_box * cfg.seed_box;
    let mut a = Vec::with_capacity(n);
    let mut w = Vec::with_capacity(n);
    for _ in 0..n {
        let r = rng.random_range(r2min..r2max).sqrt();
        let th = rng.random_range(0.0..std::f64::consts::TAU);
        w.push(C::from_polar(r, th));
        let centre = a_centres[rng.random_range(0..a_centres.len())];
        let spread = 1.0 + centre.norm();
        let nr = spread * rng.random_range(0.0f64..1.0).sqrt();
        let nt = rng.random_range(0.0..std::f64::consts::TAU);
        a.push(centre + C::from_polar(nr, nt));
    }
    (a, w)
}

/// Multi-start damped Newton. Distinct solutions are returned in canonical
/// site order, sorted lexicographically by (Re w, Im w).
pub fn newton_solve(n: usize, p: &OperParams, cfg: &SolverConfig) -> Result<Vec<StateSolution>> {
    cfg.validate()?;
    p.validate()?;
    if n == 0 {
        return Err(Error::Domain("newton_solve needs N ≥ 1".into()));
    }
    let a_centres: Vec<C> = match solve_n1_closed_form_for(cfg.form, p) {
        Ok(s) => s.iter().map(|x| x.a[0]).collect(),
        Err(_) => vec![C::from(p.k / 2.0)],
    };
    let hits: Vec<Option<(Vec<C>, Vec<C>)>> = (0..cfg.n_seeds)
        .into_par_iter()
        .map(|i| {
            let (a0, w0) = seed_point(n, i, cfg, &a_centres);
            newton_refine(&a0, &w0, p, cfg).map(|(a, w, _)| canonical(a, w))
        })
        .collect();
    let perms = heap_permutations(n);
    let mut found: Vec<(Vec<C>, Vec<C>)> = Vec::new();
    let push = |a: Vec<C>, w: Vec<C>, found: &mut Vec<(Vec<C>, Vec<C>)>| {
        if !found.iter().any(|(b, v)| site_distance(&a, &w, b, v, &perms) < cfg.dedup_tol) {
            found.push((a, w));
        }
    };
    for (a, w) in hits.into_iter().flatten() {
        push(a, w, &mut found);
    }
    if p.is_real() {
        let conj: Vec<(Vec<C>, Vec<C>)> = found
            .iter()
            .map(|(a, w)| canonical(a.iter().map(|x| x.conj()).collect(), w.iter().map(|x| x.conj()).collect()))
            .collect();
        for (a, w) in conj {
            if let Some((a, w, _)) = newton_refine(&a, &w, p, cfg) {
                let (a, w) = canonical(a, w);
                push(a, w, &mut found);
            }
        }
    }
    let mut out: Vec<StateSolution> = found
        .into_iter()
        .filter_map(|(a, w)| {
            let r = residuals_for(cfg.form, &a, &w, p).ok()?.norm_inf();
            let mut s = StateSolution::new(*p, a, w).ok()?;
            s.residual_norm = r;
            (r < cfg.newton_tol).then_some(s)
        })
        .collect();
    out.sort_by(|x, y| {
        for (u, v) in x.w.iter().zip(&y.w) {
            let o = u.re.total_cmp(&v.re).then(u.im.total_cmp(&v.im));
            if o != std::cmp::Ordering::Equal {
                return o;
            }
        }
        std::cmp::Ordering::Equal
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutations_are_complete() {
        assert_eq!(heap_permutations(3).len(), 6);
        let mut p = heap_permutations(4);
        p.sort();
        p.dedup();
        assert_eq!(p.len(), 24);
    }

    #[test]
    fn distance_ignores_relabeling() {
        let a = [C::new(1.0, 0.0), C::new(2.0, 1.0)];
        let w = [C::new(-3.0, 0.0), C::new(4.0, 0.0)];
        let perms = heap_permutations(2);
        let d = site_distance(&a, &w, &[a[1], a[0]], &[w[1], w[0]], &perms);
        assert_eq!(d, 0.0);
    }

    #[test]
    fn seeds_are_deterministic() {
        let cfg = SolverConfig::default();
        let c = [C::new(1.0, 0.0)];
        assert_eq!(seed_point(2, 7, &cfg, &c), seed_point(2, 7, &cfg, &c));
        assert_ne!(seed_point(2, 7, &cfg, &c), seed_point(2, 8, &cfg, &c));
        let (_, w) = seed_point(3, 1, &cfg, &c);
        assert!(w.iter().all(|x| x.norm() >= 0.5 && x.norm() <= cfg.seed_box));
    }
}
