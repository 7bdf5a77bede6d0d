use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use super::{
    BetheArgs, CliError, CliResult, ConfigFile, GridArgs, ParamsArgs, ParamsFrom, QqArgs, QtableArgs, SolveArgs, StateArgs,
    VerifyArgs,
};
use crate::bethe::{bhk_eigenvalues, find_q_zeros, qq_residuals, BetheReport, RaySpec, RootKind};
use crate::connection::{extract_q_with, triple_grid, ConnectionConfig, QEvaluator, QTable};
use crate::oper::StateSolution;
use crate::params::{
    bhk_params, cft_to_oper, indices_from_r, legacy_convert, oper_to_cft, oper_to_legacy, p2_count, r_from_rbar, r_to_rbar,
    CFTParams, OperParams, RPair, WeylElement,
};
use crate::trivmon::{
    frobenius_certificate, newton_solve, numeric_monodromy, residuals_for, SolutionCertificates, SolutionFile, SolutionRecord,
    SolverConfig, SystemForm,
};

type C = Complex64;

const MONODROMY_TOL: f64 = 1e-6;
const RESIDUAL_TOL: f64 = 1e-8;

fn write_text(path: &Path, text: &str) -> CliResult {
    std::fs::write(path, text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn emit_json<T: Serialize>(value: &T, out: Option<&PathBuf>) -> CliResult {
    let s = serde_json::to_string_pretty(value).map_err(|e| CliError::Failed(e.to_string()))?;
    match out {
        Some(p) => write_text(p, &(s + "\n")),
        None => {
            println!("{s}");
            Ok(())
        }
    }
}

/// Deterministic λ samples in the annulus 0.2 ≤ |λ| ≤ 1.
pub(crate) fn lambda_samples(n: usize, seed: u64) -> Vec<C> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| C::from_polar(rng.random_range(0.2..1.0), rng.random_range(-PI..PI)))
        .collect()
}

fn oper_params(cfg: &ConfigFile, a: &super::OperArgs) -> Result<OperParams, CliError> {
    let k = cfg.pick(&a.k, "k", f64::NAN)?;
    if k.is_nan() {
        return Err(CliError::Usage("missing --k".into()));
    }
    let p = OperParams::new(
        k,
        cfg.pick_complex(&a.r1bar, "r1bar", None)?,
        cfg.pick_complex(&a.r2bar, "r2bar", None)?,
    );
    p.validate()?;
    Ok(p)
}

fn residual_for(form: SystemForm, sol: &StateSolution) -> Result<f64, CliError> {
    if sol.n == 0 {
        return Ok(0.0);
    }
    Ok(residuals_for(form, &sol.a, &sol.w, &sol.params)?.norm_inf())
}

pub fn solve(a: &SolveArgs, cfg: &ConfigFile, form: SystemForm) -> CliResult {
    let n = cfg.pick(&a.n, "N", usize::MAX)?;
    if n == usize::MAX {
        return Err(CliError::Usage("missing --N".into()));
    }
    let p = oper_params(cfg, &a.oper)?;
    let base = SolverConfig::for_params(&p);
    let scfg = SolverConfig {
        n_seeds: cfg.pick(&a.seeds, "seeds", base.n_seeds)?,
        seed_box: cfg.pick(&a.seed_box, "seed_box", base.seed_box)?,
        damping: cfg.pick(&a.damping, "damping", base.damping)?,
        newton_tol: cfg.pick(&a.newton_tol, "newton_tol", base.newton_tol)?,
        dedup_tol: cfg.pick(&a.dedup_tol, "dedup_tol", base.dedup_tol)?,
        max_iter: cfg.pick(&a.max_iter, "max_iter", base.max_iter)?,
        rng_seed: cfg.pick(&a.rng_seed, "rng_seed", base.rng_seed)?,
        form,
    };
    scfg.validate()?;
    let n_lams = cfg.pick(&a.lambda_samples, "lambda_samples", 2)?;
    let lams = lambda_samples(n_lams, scfg.rng_seed);
    let out = a.out.clone().unwrap_or_else(|| PathBuf::from(format!("solutions_N{n}.json")));
    let expected = p2_count(n);
    if n == 0 {
        let rec = SolutionRecord {
            a: vec![],
            w: vec![],
            residual_norm: 0.0,
            certificates: SolutionCertificates {
                frobenius: true,
                monodromy_deviation: 0.0,
            },
        };
        SolutionFile::new(&p, 0, vec![rec], Some(scfg)).write(&out)?;
        println!("found 1 / expected {expected} (ground state); wrote {}", out.display());
        return Ok(());
    }
    let sols = newton_solve(n, &p, &scfg)?;
    let records: Vec<SolutionRecord> = sols
        .par_iter()
        .map(|s| {
            let mut r = SolutionRecord::from_state(s, &lams);
            r.residual_norm = residual_for(form, s).unwrap_or(f64::MAX);
            r
        })
        .collect();
    let all_pass = records
        .iter()
        .all(|r| r.certificates.passed(MONODROMY_TOL) && r.residual_norm < RESIDUAL_TOL);
    let count = records.len();
    SolutionFile::new(&p, n, records, Some(scfg)).write(&out)?;
    println!("found {count} / expected {expected}; wrote {}", out.display());
    if count == 0 {
        return Err(CliError::Failed("no solutions found".into()));
    }
    if !all_pass {
        return Err(CliError::Failed("some solutions fail their certificates".into()));
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct SiteCheck {
    site: usize,
    lambda: C,
    frobenius_passed: bool,
    consistency_residuals: [f64; 4],
    monodromy_deviation: f64,
    passed: bool,
}

#[derive(Debug, Serialize)]
struct SolutionCheck {
    index: usize,
    residual_norm: f64,
    stored_residual_norm: f64,
    residual_reproduced: bool,
    sites: Vec<SiteCheck>,
    passed: bool,
}

pub fn verify(a: &VerifyArgs, cfg: &ConfigFile, flag_form: SystemForm) -> CliResult {
    let file = SolutionFile::read(&a.file)?;
    let form = file.solver.map(|s| s.form).unwrap_or(flag_form);
    let seed = cfg.pick(&a.rng_seed, "rng_seed", file.solver.map(|s| s.rng_seed).unwrap_or(0))?;
    let lams = lambda_samples(cfg.pick(&a.lambda_samples, "lambda_samples", 2)?, seed);
    let tol = cfg.pick(&a.monodromy_tol, "monodromy_tol", MONODROMY_TOL)?;
    let states = file.states()?;
    let mut checks = Vec::new();
    if file.n > 0 {
        for (i, (sol, rec)) in states.iter().zip(&file.solutions).enumerate() {
            let res = residual_for(form, sol)?;
            let reproduced = (res - rec.residual_norm).abs() <= 1e-12 * (1.0 + rec.residual_norm);
            let sites: Vec<SiteCheck> = (1..=sol.n)
                .flat_map(|l| lams.iter().map(move |&lam| (l, lam)))
                .collect::<Vec<_>>()
                .par_iter()
                .map(|&(l, lam)| {
                    let cert = frobenius_certificate(sol, l, lam);
                    let dev = numeric_monodromy(sol, l, lam, 64).map(|m| m.deviation).unwrap_or(f64::MAX);
                    let dev = if dev.is_finite() { dev } else { f64::MAX };
                    SiteCheck {
                        site: l,
                        lambda: lam,
                        frobenius_passed: cert.passed(),
                        consistency_residuals: cert.consistency_residuals,
                        monodromy_deviation: dev,
                        passed: cert.passed() && dev < tol,
                    }
                })
                .collect();
            let passed = res < RESIDUAL_TOL && sites.iter().all(|s| s.passed);
            checks.push(SolutionCheck {
                index: i,
                residual_norm: res,
                stored_residual_norm: rec.residual_norm,
                residual_reproduced: reproduced,
                sites,
                passed,
            });
        }
    }
    let passed = checks.iter().all(|c| c.passed);
    for c in &checks {
        for s in &c.sites {
            println!(
                "solution {} site {} λ = {:.4}: frobenius {} monodromy {:.3e} {}",
                c.index,
                s.site,
                s.lambda,
                if s.frobenius_passed { "ok" } else { "FAIL" },
                s.monodromy_deviation,
                if s.passed { "PASS" } else { "FAIL" }
            );
        }
        println!(
            "solution {}: residual {:.3e} {}",
            c.index,
            c.residual_norm,
            if c.passed { "PASS" } else { "FAIL" }
        );
    }
    if file.n == 0 {
        println!("ground state: nothing to verify");
    }
    let report = json!({ "N": file.n, "lambdas": lams, "solutions": checks, "passed": passed });
    if let Some(out) = &a.out {
        emit_json(&report, Some(out))?;
    }
    if passed {
        Ok(())
    } else {
        Err(CliError::Failed("certificate check failed".into()))
    }
}

fn evaluator(s: &StateArgs, cfg: &ConfigFile) -> Result<QEvaluator, CliError> {
    let file = SolutionFile::read(&s.file)?;
    let states = file.states()?;
    let index = cfg.pick(&s.index, "index", 0)?;
    let sol = states
        .get(index)
        .ok_or_else(|| CliError::Usage(format!("solution index {index} out of range ({} in file)", states.len())))?;
    let mut cc = ConnectionConfig::default();
    cc.m_trunc = cfg.pick(&s.m_trunc, "m_trunc", cc.m_trunc)?;
    cc.sibuya.z_max = cfg.pick(&s.z_max, "z_max", cc.sibuya.z_max)?;
    cc.sibuya.z_match = cfg.pick(&s.z_match, "z_match", cc.sibuya.z_match)?;
    cc.validate()?;
    Ok(QEvaluator::new(sol, &cc)?)
}

fn base_points(g: &GridArgs, cfg: &ConfigFile, n_default: usize, r_default: f64) -> Result<Vec<C>, CliError> {
    let n = cfg.pick(&g.n_base, "n_base", n_default)?;
    let r = cfg.pick(&g.radius, "radius", r_default)?;
    let off = cfg.pick(&g.offset, "offset", 0.1)?;
    if n == 0 || !(r > 0.0) {
        return Err(CliError::Usage(format!(
            "grid needs n_base > 0 and radius > 0 (got {n}, {r})"
        )));
    }
    Ok((0..n)
        .map(|j| C::from_polar(r, off + 2.0 * PI * j as f64 / n as f64))
        .collect())
}

pub fn qtable(a: &QtableArgs, cfg: &ConfigFile) -> CliResult {
    let ev = evaluator(&a.state, cfg)?;
    let bases = base_points(&a.grid, cfg, 16, 0.5)?;
    let mut grid = if a.triples {
        triple_grid(&bases, ev.sol.params.khat())
    } else {
        bases
    };
    if a.origin {
        grid.insert(0, C::default());
    }
    let qt = extract_q_with(&ev, &grid)?;
    let out = a.out.clone().unwrap_or_else(|| PathBuf::from("qtable.csv"));
    qt.write_csv(&out)?;
    println!(
        "{} rows; max condition {:.3e}; wrote {}",
        qt.len(),
        max_cond(&qt),
        out.display()
    );
    Ok(())
}

fn max_cond(qt: &QTable) -> f64 {
    qt.cond_primal.iter().chain(&qt.cond_dual).cloned().fold(0.0, f64::max)
}

fn sectors(name: &str) -> Result<Vec<WeylElement>, CliError> {
    if name == "all" {
        return Ok(WeylElement::all().to_vec());
    }
    Ok(vec![WeylElement::parse(name)?])
}

pub fn qq(a: &QqArgs, cfg: &ConfigFile) -> CliResult {
    let ev = evaluator(&a.state, cfg)?;
    let khat = ev.sol.params.khat();
    let qt = match &a.qtable {
        Some(p) => QTable::read_csv(p, ev.cfg.sibuya.z_match)?,
        None => {
            let mut grid = vec![C::default()];
            grid.extend(triple_grid(&base_points(&a.grid, cfg, 16, 0.5)?, khat));
            extract_q_with(&ev, &grid)?
        }
    };
    let tol = cfg.pick(&a.tol, "tol", 1e-4)?;
    let name = cfg.pick(&a.sector, "sector", "all".to_string())?;
    let mut reports = Vec::new();
    let mut worst = 0.0f64;
    for s in sectors(&name)? {
        let r = qq_residuals(&qt, &ev.indices, khat, &s)?;
        worst = worst.max(r.max_calibrated());
        println!(
            "{:<10} max calibrated {:.3e}  max raw {:.3e}",
            s.name(),
            r.max_calibrated(),
            r.max_raw()
        );
        reports.push(BetheReport::new(&s, Some(&r), &[]));
    }
    let bhk = if a.bhk {
        let p = &ev.sol.params;
        let se = bhk_eigenvalues(&qt, &ev.indices, khat, &r_from_rbar(p.r1bar, p.r2bar))?;
        let rels: Vec<_> = se
            .relations
            .iter()
            .map(|r| {
                json!({
                    "bhk_label": r.bhk_label, "line": r.line, "sector": r.sector.name(),
                    "predicted": r.predicted, "fitted": r.fitted, "degenerate": r.degenerate,
                    "max_calibrated": r.calibrated.iter().cloned().fold(0.0, f64::max),
                })
            })
            .collect();
        Some(json!({ "params": se.bhk, "relations": rels }))
    } else {
        None
    };
    let out = json!({ "grid_size": qt.len(), "tolerance": tol, "reports": reports, "bhk": bhk });
    emit_json(&out, a.out.as_ref())?;
    if worst < tol {
        Ok(())
    } else {
        Err(CliError::Failed(format!("max calibrated residual {worst:.3e} ≥ {tol:e}")))
    }
}

pub fn bethe(a: &BetheArgs, cfg: &ConfigFile) -> CliResult {
    let ev = evaluator(&a.state, cfg)?;
    let p = ev.sol.params;
    let khat = p.khat();
    let window = match &a.window {
        Some(w) => [w[0], w[1]],
        None => [cfg.get("e_min")?.unwrap_or(0.0), cfg.get("e_max")?.unwrap_or(50.0)],
    };
    let samples = cfg.pick(&a.samples, "samples", 80)?;
    let ray = RaySpec::real_e(p.k, window[0], window[1], samples);
    ray.validate()?;
    let s = WeylElement::parse(&cfg.pick(&a.sector, "sector", "id".to_string())?)?;
    let which = match cfg.pick(&a.which, "which", "q".to_string())?.as_str() {
        "q" => RootKind::ZeroOfQ,
        "qstar" => RootKind::ZeroOfQstar,
        w => return Err(CliError::Usage(format!("--which must be q or qstar (got {w})"))),
    };
    let root_tol = cfg.pick(&a.root_tol, "root_tol", 1e-8)?;
    let tol = cfg.pick(&a.tol, "tol", 1e-4)?;
    let roots = find_q_zeros(&ev, &ev.indices, khat, &s, which, &ray, root_tol)?;
    let mut grid = vec![C::default()];
    grid.extend(triple_grid(
        &base_points(
            &GridArgs {
                n_base: None,
                radius: None,
                offset: None,
            },
            cfg,
            8,
            0.5,
        )?,
        khat,
    ));
    let qt = extract_q_with(&ev, &grid)?;
    let qq = qq_residuals(&qt, &ev.indices, khat, &s)?;
    let report = BetheReport::new(&s, Some(&qq), &roots);
    let scale = ((p.k + 3.0) / 3.0).powf(3.0 * (p.k + 2.0));
    for r in &roots {
        println!(
            "root λ = {:.10}  E = {:.8}  |Q|/max {:.2e}  BA residual {:.3e}",
            r.lambda_root,
            (-scale * r.lambda_root).re,
            r.refine_residual,
            r.ba_residual
        );
    }
    if let Some(plot) = &a.plot {
        write_text(plot, &ray_csv(&ev, &ray, scale)?)?;
    }
    emit_json(&report, a.out.as_ref())?;
    if roots.is_empty() {
        return Err(CliError::Failed("no roots in window".into()));
    }
    if roots.iter().any(|r| !(r.ba_residual < tol)) {
        return Err(CliError::Failed(format!("Bethe residual above {tol:e}")));
    }
    Ok(())
}

fn ray_csv(ev: &QEvaluator, ray: &RaySpec, scale: f64) -> Result<String, CliError> {
    let rows: Vec<String> = ray
        .points()
        .par_iter()
        .map(|&l| {
            let q = ev.q(l)?;
            let qs = ev.qstar(l)?;
            let mut row = vec![l.re, l.im, (-scale * l).re];
            row.extend(q.iter().chain(&qs).map(|x| x.norm()));
            Ok(row.iter().map(|x| format!("{x:.16e}")).collect::<Vec<_>>().join(","))
        })
        .collect::<crate::Result<_>>()?;
    let mut s = String::from("lambda_re,lambda_im,E,absQ1,absQ2,absQ3,absQstar1,absQstar2,absQstar3\n");
    for r in rows {
        s.push_str(&r);
        s.push('\n');
    }
    Ok(s)
}

#[derive(Debug, Serialize)]
pub(crate) struct ParamsReport {
    pub oper: OperParams,
    pub cft: CFTParams,
    pub r: RPair,
    pub rbar_from_r: (C, C),
    pub beta: [C; 3],
    pub beta_star: [C; 3],
    pub bhk: crate::params::BHKParams,
    pub legacy: crate::params::LegacyParams,
}

pub(crate) fn convert(a: &ParamsArgs, cfg: &ConfigFile) -> Result<ParamsReport, CliError> {
    let from = match a.from {
        Some(f) => f,
        None => match cfg.raw("from") {
            Some("oper") | None => ParamsFrom::Oper,
            Some("cft") => ParamsFrom::Cft,
            Some("r") => ParamsFrom::R,
            Some("legacy") => ParamsFrom::Legacy,
            Some(x) => return Err(CliError::Usage(format!("unknown --from {x}"))),
        },
    };
    let cx = |flag: &Option<String>, key: &str, d: Option<C>| cfg.pick_complex(flag, key, d);
    let (p, r) = match from {
        ParamsFrom::Oper => {
            let p = oper_params(cfg, &a.oper)?;
            (p, r_from_rbar(p.r1bar, p.r2bar))
        }
        ParamsFrom::Cft => {
            let cft = CFTParams {
                c: cx(&a.c, "c", None)?,
                delta2: cx(&a.delta2, "delta2", None)?,
                delta3: cx(&a.delta3, "delta3", None)?,
                mu: C::default(),
            };
            let p = cft_to_oper(&cft)?;
            (p, r_from_rbar(p.r1bar, p.r2bar))
        }
        ParamsFrom::R => {
            let r = RPair::new(cx(&a.r1, "r1", None)?, cx(&a.r2, "r2", None)?);
            let k = cfg.pick(&a.oper.k, "k", -2.5)?;
            let (r1bar, r2bar) = r_to_rbar(&r);
            let p = OperParams::new(k, r1bar, r2bar);
            p.validate()?;
            (p, r)
        }
        ParamsFrom::Legacy => {
            let m = cfg.pick(&a.m, "M", f64::NAN)?;
            if m.is_nan() {
                return Err(CliError::Usage("missing --M".into()));
            }
            let e = cx(&a.e, "E", Some(C::default()))?;
            let ell = [
                cx(&a.ell1, "ell1", Some(C::new(1.0, 0.0)))?,
                cx(&a.ell2, "ell2", Some(C::new(1.0, 0.0)))?,
            ];
            let (p, r, _) = legacy_convert(m, e, ell)?;
            p.validate()?;
            (p, r)
        }
    };
    let idx = indices_from_r(&r);
    Ok(ParamsReport {
        oper: p,
        cft: oper_to_cft(&p)?,
        r,
        rbar_from_r: r_to_rbar(&r),
        beta: idx.beta,
        beta_star: idx.beta_star,
        bhk: bhk_params(&p, &r),
        legacy: oper_to_legacy(&p, &r)?,
    })
}

fn fc(z: C) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else {
        format!("{z}")
    }
}

pub fn params(a: &ParamsArgs, cfg: &ConfigFile) -> CliResult {
    let r = convert(a, cfg)?;
    if a.json {
        return emit_json(&r, None);
    }
    let o = &r.oper;
    println!(
        "oper    k = {}  r̄¹ = {}  r̄² = {}  λ = {}",
        o.k,
        fc(o.r1bar),
        fc(o.r2bar),
        fc(o.lambda)
    );
    println!(
        "cft     c = {}  Δ₂ = {}  Δ₃ = {}  μ = {}",
        fc(r.cft.c),
        fc(r.cft.delta2),
        fc(r.cft.delta3),
        fc(r.cft.mu)
    );
    println!("r       r¹ = {}  r² = {}", fc(r.r.r1), fc(r.r.r2));
    println!(
        "indices β = ({}, {}, {})  β* = ({}, {}, {})",
        fc(r.beta[0]),
        fc(r.beta[1]),
        fc(r.beta[2]),
        fc(r.beta_star[0]),
        fc(r.beta_star[1]),
        fc(r.beta_star[2])
    );
    let b = &r.bhk;
    println!(
        "bhk     g = {}  p₁ = {}  p₂ = {}  c₁ = {}  c₂ = {}  c₃ = {}",
        b.g,
        fc(b.p1),
        fc(b.p2),
        fc(b.c1),
        fc(b.c2),
        fc(b.c3)
    );
    let l = &r.legacy;
    println!(
        "legacy  M = {}  E = {}  ℓ = ({}, {})",
        l.m,
        fc(l.e),
        fc(l.ell[0]),
        fc(l.ell[1])
    );
    Ok(())
}
