use super::*;
use crate::connection::{extract_q_with, triple_grid, ConnectionConfig, QEvaluator, QPoint};
use crate::oper::StateSolution;
use crate::params::{r_from_rbar, OperParams};
use proptest::prelude::*;
use std::sync::OnceLock;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

struct Ground {
    ev: QEvaluator,
    table: QTable,
}

fn ground() -> &'static Ground {
    static G: OnceLock<Ground> = OnceLock::new();
    G.get_or_init(|| {
        let sol = StateSolution::ground(OperParams::desk());
        let ev = QEvaluator::new(&sol, &ConnectionConfig::default()).unwrap();
        let mut bases = vec![C::default()];
        for i in 0..8 {
            bases.push(C::from_polar(0.3 + 0.1 * (i % 3) as f64, 0.4 + 0.75 * i as f64));
        }
        let table = extract_q_with(&ev, &triple_grid(&bases, 0.5)).unwrap();
        Ground { ev, table }
    })
}

#[test]
fn qq_system_holds_in_every_sector() {
    let g = ground();
    for s in WeylElement::all() {
        let r = qq_residuals(&g.table, &g.ev.indices, 0.5, &s).unwrap();
        assert!(r.max_calibrated() < 1e-9, "{}: {:e}", s.name(), r.max_calibrated());
        for l in &r.lines {
            assert!(
                (l.fitted - l.predicted).norm() < 1e-9 * l.predicted.norm(),
                "{}: {} vs {}",
                s.name(),
                l.fitted,
                l.predicted
            );
        }
        assert!(r.max_raw() < 1e-9);
    }
}

#[test]
fn swapping_q2_and_q3_breaks_the_relations() {
    let g = ground();
    let mut t = g.table.clone();
    t.q.swap(1, 2);
    let r = qq_residuals(&t, &g.ev.indices, 0.5, &WeylElement::identity()).unwrap();
    assert!(r.max_calibrated() > 1e-2, "{:e}", r.max_calibrated());
}

#[test]
fn calibration_absorbs_constant_rescaling() {
    let g = ground();
    let mut t = g.table.clone();
    for (i, f) in [c(2.0, 1.0), c(-0.3, 0.0), c(0.0, 5.0)].iter().enumerate() {
        t.q[i].iter_mut().for_each(|x| *x *= f);
        t.qstar[i].iter_mut().for_each(|x| *x *= f.conj());
    }
    let s = WeylElement::sigma();
    let a = qq_residuals(&g.table, &g.ev.indices, 0.5, &s).unwrap();
    let b = qq_residuals(&t, &g.ev.indices, 0.5, &s).unwrap();
    assert!((a.max_calibrated() - b.max_calibrated()).abs() < 1e-12);
}

#[test]
fn grid_without_rotations_is_rejected() {
    let g = ground();
    let pts: Vec<QPoint> = (1..4).map(|i| g.table.point(3 * i)).collect();
    let t = QTable::from_points(&pts, 1.0);
    assert!(matches!(
        qq_residuals(&t, &g.ev.indices, 0.5, &WeylElement::identity()),
        Err(Error::InsufficientGrid)
    ));
}

#[test]
fn bhk_relations_reproduce_the_bhk_constants() {
    let g = ground();
    let r = r_from_rbar(c(1.0, 0.0), C::default());
    let se = bhk_eigenvalues(&g.table, &g.ev.indices, 0.5, &r).unwrap();
    assert_eq!(se.relations.len(), 6);
    for rel in &se.relations {
        assert!(!rel.degenerate);
        assert!(
            (rel.fitted - rel.predicted).norm() < 1e-9,
            "c{} {:?}: {} vs {}",
            rel.bhk_label,
            rel.line,
            rel.fitted,
            rel.predicted
        );
        assert!(rel.calibrated.iter().all(|&x| x < 1e-9));
    }
    // P_i(t) ~ t^{β_i} near zero: the λ = 0 column is empty by construction
    assert!(se.p.iter().all(|v| v.len() == g.table.len()));
}

#[test]
fn bhk_needs_the_origin() {
    let g = ground();
    let pts: Vec<QPoint> = (3..g.table.len()).map(|i| g.table.point(i)).collect();
    let t = QTable::from_points(&pts, 1.0);
    let r = r_from_rbar(c(1.0, 0.0), C::default());
    assert!(matches!(
        bhk_eigenvalues(&t, &g.ev.indices, 0.5, &r),
        Err(Error::InsufficientGrid)
    ));
    let mut t = g.table.clone();
    t.qstar[1][0] = C::default();
    assert!(matches!(
        bhk_eigenvalues(&t, &g.ev.indices, 0.5, &r),
        Err(Error::VanishingQAtZero(2))
    ));
}

#[test]
fn bhk_labels_run_in_reverse() {
    assert_eq!((bhk_label(1), bhk_label(2), bhk_label(3)), (3, 2, 1));
    for (j, s) in bhk_sectors().iter().enumerate() {
        let (_, _, cl) = relation_labels(s, Line::One);
        assert_eq!(bhk_label(cl), j + 1);
    }
}

#[test]
fn first_zero_on_the_real_e_ray() {
    let g = ground();
    let ray = RaySpec::real_e(-2.5, 0.5, 30.0, 40);
    let roots = find_q_zeros(
        &g.ev,
        &g.ev.indices,
        0.5,
        &WeylElement::identity(),
        RootKind::ZeroOfQ,
        &ray,
        1e-8,
    )
    .unwrap();
    assert!(!roots.is_empty());
    let first = &roots[0];
    assert!((first.lambda_root - c(-1.015802, 0.0)).norm() < 1e-5, "{}", first.lambda_root);
    assert!(first.refine_residual < 1e-8);
    assert!(first.ba_residual < 1e-6, "{:e}", first.ba_residual);
    let tr = &first.refine_trace;
    assert!(tr.last().unwrap() < &tr[0]);
}

/// The evaluator's Q's times fixed constants.
struct Rescaled<'a> {
    inner: &'a QEvaluator,
    q: [C; 3],
    qstar: [C; 3],
}

impl QSource for Rescaled<'_> {
    fn q(&self, lam: C) -> Result<[C; 3]> {
        let v = self.inner.q(lam)?;
        Ok([v[0] * self.q[0], v[1] * self.q[1], v[2] * self.q[2]])
    }
    fn qstar(&self, lam: C) -> Result<[C; 3]> {
        let v = self.inner.qstar(lam)?;
        Ok([v[0] * self.qstar[0], v[1] * self.qstar[1], v[2] * self.qstar[2]])
    }
}

#[test]
fn bethe_residual_invariant_under_rescaling() {
    let g = ground();
    let root = BetheRoot {
        sector: WeylElement::identity(),
        which: RootKind::ZeroOfQ,
        lambda_root: c(-1.015802, 0.0),
        refine_residual: 0.0,
        refine_trace: vec![],
        ba_residual: 0.0,
    };
    let a = bethe_residual(&root, &g.ev, &g.ev.indices, 0.5).unwrap();
    let src = Rescaled {
        inner: &g.ev,
        q: [c(3.0, -1.0), c(0.1, 0.0), c(-7.0, 2.0)],
        qstar: [c(0.0, 1.0), c(2.0, 2.0), c(-0.5, 0.0)],
    };
    let b = bethe_residual(&root, &src, &g.ev.indices, 0.5).unwrap();
    assert!((a - b).abs() < 1e-12, "{a} vs {b}");
}

#[test]
fn find_zeros_on_a_polynomial() {
    let f = |l: C| Ok((l + 1.0) * (l + 2.5) * (l - 4.0));
    let ray = RaySpec {
        phase: std::f64::consts::PI,
        r_min: 0.0,
        r_max: 3.0,
        n_samples: 31,
    };
    let z = find_zeros(f, &ray, 1e-12, 0.5).unwrap();
    assert_eq!(z.len(), 2);
    assert!((z[0].lambda + 1.0).norm() < 1e-10);
    assert!((z[1].lambda + 2.5).norm() < 1e-10);
    let bad = RaySpec { n_samples: 2, ..ray };
    assert!(find_zeros(f, &bad, 1e-12, 0.5).is_err());
}

#[test]
fn real_e_ray_scale() {
    // E = −(1/6)^{−3/2}·λ at k = −5/2
    let r = RaySpec::real_e(-2.5, 1.0, 10.0, 5);
    let s = 6f64.powf(1.5);
    assert!((r.r_min - 1.0 / s).abs() < 1e-14 && (r.r_max - 10.0 / s).abs() < 1e-13);
    assert_eq!(r.phase, std::f64::consts::PI);
}

#[test]
fn report_serializes() {
    let g = ground();
    let s = WeylElement::sigma();
    let qq = qq_residuals(&g.table, &g.ev.indices, 0.5, &s).unwrap();
    let rep = BetheReport::new(&s, Some(&qq), &[]);
    let js = serde_json::to_string(&rep).unwrap();
    let v: serde_json::Value = serde_json::from_str(&js).unwrap();
    assert_eq!(v["sector"], "sigma");
    assert!(v["residual_stats"]["max"].as_f64().unwrap() < 1e-9);
    assert!(v["roots"].as_array().unwrap().is_empty());
    let back: BetheReport = serde_json::from_str(&js).unwrap();
    assert_eq!(back, rep);
}

#[test]
fn predicted_calibration_sign_follows_parity() {
    let g = ground();
    let s = WeylElement::identity();
    let t = WeylElement::from_perm([2, 1, 3]).unwrap();
    let a = predicted_calibration(&s, &g.ev.indices, Line::One);
    let b = predicted_calibration(&t, &g.ev.indices, Line::One);
    // γ flips sign with the swap and (−1)^p flips too
    let ga = relation_phase(&s, &g.ev.indices, Line::One);
    assert!((a * ga - psi_system_constant()).norm() < 1e-14);
    assert!((b - a).norm() < 1e-14);
}

#[test]
fn origin_alone_is_trivially_consistent() {
    let g = ground();
    let t = QTable::from_points(&[g.table.point(0)], 1.0);
    let r = qq_residuals(&t, &g.ev.indices, 0.5, &WeylElement::identity()).unwrap();
    assert!(r.max_calibrated() < 1e-14);
}

#[test]
fn more_samples_find_a_superset() {
    let g = ground();
    let run = |n| {
        let ray = RaySpec::real_e(-2.5, 0.5, 40.0, n);
        find_q_zeros(
            &g.ev,
            &g.ev.indices,
            0.5,
            &WeylElement::identity(),
            RootKind::ZeroOfQstar,
            &ray,
            1e-8,
        )
        .unwrap()
    };
    let coarse = run(30);
    let fine = run(60);
    assert!(!coarse.is_empty());
    for r in &coarse {
        assert!(
            fine.iter().any(|f| (f.lambda_root - r.lambda_root).norm() < 1e-7),
            "{} lost",
            r.lambda_root
        );
    }
}

#[test]
fn bhk_form_matches_qq_residuals() {
    let g = ground();
    let r = r_from_rbar(c(1.0, 0.0), C::default());
    let se = bhk_eigenvalues(&g.table, &g.ev.indices, 0.5, &r).unwrap();
    // the BHK form skips λ = 0; compare with QQ̃ on the same points
    let pts: Vec<QPoint> = (0..g.table.len())
        .filter(|&i| g.table.lambda_grid[i] != C::default())
        .map(|i| g.table.point(i))
        .collect();
    let t = QTable::from_points(&pts, 1.0);
    for rel in &se.relations {
        let qq = qq_residuals(&t, &g.ev.indices, 0.5, &rel.sector).unwrap();
        let l = &qq.lines[if rel.line == Line::One { 0 } else { 1 }];
        assert_eq!(l.calibrated.len(), rel.calibrated.len());
        for (a, b) in l.calibrated.iter().zip(&rel.calibrated) {
            assert!((a - b).abs() < 1e-10, "{a:e} vs {b:e}");
        }
    }
}

#[test]
fn bethe_ratio_agrees_with_qq_at_shifted_points() {
    // the QQ̃ relation at e^{±iπk̂}λ_s, with Q_a(λ_s) ≈ 0, gives the Bethe ratio
    let g = ground();
    let s = WeylElement::identity();
    let ray = RaySpec::real_e(-2.5, 0.5, 20.0, 30);
    let root = find_q_zeros(&g.ev, &g.ev.indices, 0.5, &s, RootKind::ZeroOfQ, &ray, 1e-10).unwrap()[0].lambda_root;
    let (a, b, cl) = relation_labels(&s, Line::One);
    let gamma = relation_phase(&s, &g.ev.indices, Line::One);
    let at = |t: f64| turn(t * 0.5) * root;
    let q = |l: C| g.ev.q(l).unwrap();
    let sample = |base: f64| {
        let (qm, qp) = (q(at(base - 0.5)), q(at(base + 0.5)));
        RelationSample {
            a_minus: qm[a - 1],
            a_plus: qp[a - 1],
            b_minus: qm[b - 1],
            b_plus: qp[b - 1],
            c_at: C::default(),
        }
    };
    let qq_route = relation_rhs(gamma, &sample(0.5)) / relation_rhs(gamma, &sample(-0.5));
    let direct = g.ev.qstar(at(0.5)).unwrap()[cl - 1] / g.ev.qstar(at(-0.5)).unwrap()[cl - 1];
    let (lhs, _) = bethe_sides(
        gamma,
        q(at(1.0))[a - 1],
        q(at(-1.0))[a - 1],
        C::new(1.0, 0.0),
        C::new(1.0, 0.0),
    );
    assert!((qq_route / direct - 1.0).norm() < 1e-9);
    assert!((lhs / direct - 1.0).norm() < 1e-6);
}

#[test]
fn normalized_q_tends_to_one_at_the_origin() {
    let g = ground();
    let q0 = g.ev.eval(C::default()).unwrap();
    let small = g.ev.eval(c(1e-6, 1e-6)).unwrap();
    for i in 0..3 {
        assert!((small.q[i] / q0.q[i] - 1.0).norm() < 1e-4);
        assert!((small.qstar[i] / q0.qstar[i] - 1.0).norm() < 1e-4);
    }
}

fn arb_c() -> impl Strategy<Value = C> {
    (-3.0f64..3.0, -3.0f64..3.0).prop_map(|(a, b)| c(a, b))
}

proptest! {
    #[test]
    fn double_ratio_ignores_scales(vals in prop::array::uniform4(arb_c()), g in arb_c(), a in arb_c(), b in arb_c()) {
        prop_assume!(vals.iter().all(|v| v.norm() > 1e-2) && a.norm() > 1e-2 && b.norm() > 1e-2);
        let gam = c(g.re * 0.3, g.im * 0.1);
        let r1 = bethe_double_ratio(gam, vals[0], vals[1], vals[2], vals[3]);
        let r2 = bethe_double_ratio(gam, a * vals[0], a * vals[1], b * vals[2], b * vals[3]);
        prop_assert!((r1 - r2).abs() <= 1e-12 * (1.0 + r1));
    }

    #[test]
    fn calibration_ignores_pointwise_scales(pts in prop::collection::vec((arb_c(), arb_c()), 3..12), k in arb_c()) {
        prop_assume!(pts.iter().all(|(r, l)| r.norm() > 1e-2 && l.norm() > 1e-2) && k.norm() > 1e-2);
        let rhs: Vec<C> = pts.iter().map(|p| p.0).collect();
        let lhs: Vec<C> = pts.iter().map(|p| p.1).collect();
        let c0 = calibrate(&rhs, &lhs);
        let f: Vec<C> = (0..rhs.len()).map(|i| k * (1.0 + i as f64)).collect();
        let rs: Vec<C> = rhs.iter().zip(&f).map(|(r, f)| r * f).collect();
        let ls: Vec<C> = lhs.iter().zip(&f).map(|(l, f)| l * f).collect();
        let c1 = calibrate(&rs, &ls);
        prop_assert!((c0 - c1).norm() <= 1e-10 * c0.norm());
        let a = relative_residuals(&rhs, &lhs, c0);
        let b = relative_residuals(&rs, &ls, c1);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-10);
        }
    }

    #[test]
    fn exact_relation_calibrates_exactly(pts in prop::collection::vec(arb_c(), 3..10), k in arb_c()) {
        prop_assume!(pts.iter().all(|l| l.norm() > 1e-2) && k.norm() > 1e-2);
        let rhs: Vec<C> = pts.iter().map(|l| k * l).collect();
        let fit = calibrate(&rhs, &pts);
        prop_assert!((fit - k).norm() < 1e-12 * k.norm());
    }
}
