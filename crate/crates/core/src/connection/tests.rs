use super::*;
use crate::covercx::cover_pow;
use crate::params::OperParams;
use crate::trivmon::solve_n1_closed_form;
use proptest::prelude::*;

fn desk() -> StateSolution {
    StateSolution::ground(OperParams::desk())
}

fn excited() -> StateSolution {
    let [a, b] = solve_n1_closed_form(&OperParams::desk()).unwrap();
    if a.w[0].re < b.w[0].re {
        a
    } else {
        b
    }
}

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

#[test]
fn riccati_coefficients_match_symbolic_expansion() {
    // generic r̄ so that every coefficient is exercised
    let p = OperParams::new(-2.4, 0.7, 0.2);
    let op = ScalarOper::primal(&StateSolution::ground(p));
    let ser = AsymptoticSeries::new(&op, 8, 3).unwrap();
    let (r1, r2) = (0.7, 0.2);
    let expect = [
        (1, -2.0 / 3.0 * -1.0),
        (2, -r1 / 3.0 - 8.0 / 27.0),
        (3, 4.0 * r1 / 9.0 - r2 / 3.0 + 8.0 / 81.0),
    ];
    assert!((ser.coeffs[0][0] - c(-1.0, 0.0)).norm() < 1e-15);
    for (j, v) in expect {
        assert!(
            (ser.coeffs[j][0] - c(v, 0.0)).norm() < 1e-13,
            "c[{j}][0] = {}",
            ser.coeffs[j][0]
        );
    }
}

#[test]
fn riccati_leading_lambda_terms_follow_the_wkb_binomials() {
    // y ≈ −q for the λ-only terms: c_{0,n} = −C(1/3, n) for the kept orders
    let p = OperParams::new(-2.2, 0.3, -0.1);
    let op = ScalarOper::primal(&StateSolution::ground(p));
    let ser = AsymptoticSeries::new(&op, 4, 4).unwrap();
    let wkb = build_wkb(p.khat()).unwrap();
    assert_eq!(wkb.coeffs.len(), 2);
    for (n, cw) in wkb.coeffs.iter().enumerate() {
        assert!((ser.coeffs[0][n] + cw).norm() < 1e-13, "n = {n}");
    }
}

#[test]
fn wkb_truncation_floor() {
    assert_eq!(build_wkb(5.0 / 6.0).unwrap().coeffs.len(), 1);
    assert_eq!(build_wkb(0.5).unwrap().coeffs.len(), 1);
    assert_eq!(build_wkb(0.3).unwrap().coeffs.len(), 2);
    let w = build_wkb(1.0 / 3.0).unwrap();
    assert_eq!(w.coeffs.len(), 2);
    assert!(w.log_resonant);
    assert!(!build_wkb(0.3).unwrap().log_resonant);
    assert!(build_wkb(1.0).is_err());
}

#[test]
fn wkb_at_zero_lambda() {
    let w = build_wkb(0.5).unwrap();
    for x in [0.5, 2.0, 100.0] {
        let z = CoverPoint::real(x);
        assert!((w.s(z, C::default()) - 3.0 * x.cbrt()).norm() < 1e-12 * x);
        assert!((w.q(z, C::default()) - x.powf(-2.0 / 3.0)).norm() < 1e-14);
    }
}

#[test]
fn frobenius_residual_decays_with_truncation() {
    let sol = desk();
    let idx = default_indices(&sol);
    let (z, lam) = (CoverPoint::real(0.05), c(0.3, 0.0));
    let res: Vec<f64> = [20, 22, 24]
        .iter()
        .map(|&m| {
            build_frobenius(&sol, idx.beta[0], Equation::Primal, m)
                .unwrap()
                .relative_residual(z, lam)
        })
        .collect();
    assert!(res[1] < 0.05 * res[0] && res[2] < 0.05 * res[1], "{res:?}");
}

#[test]
fn tail_residual_agrees_with_pointwise_evaluation() {
    let sol = desk();
    let op = ScalarOper::primal(&sol);
    let idx = default_indices(&sol);
    let f = build_frobenius(&sol, idx.beta[0], Equation::Primal, 6).unwrap();
    let lam = c(0.7, 0.2);
    for x in [0.3, 0.6, 1.0] {
        let z = CoverPoint::new(x, 0.4);
        let (a, b) = (f.residual(z, lam), f.direct_residual(&op, z, lam));
        assert!((a - b).norm() < 1e-4 * b.norm(), "z = {x}: {a} vs {b}");
    }
}

#[test]
fn zero_lambda_drops_the_branched_terms() {
    let sol = desk();
    let idx = default_indices(&sol);
    let f = build_frobenius(&sol, idx.beta[1], Equation::Primal, 12).unwrap();
    let z = CoverPoint::real(0.2);
    let full = f.jet(z, C::default());
    let mut classical = C::default();
    for (m, row) in f.coeffs.iter().enumerate() {
        classical += row[0] * cover_pow(z, idx.beta[1] + m as f64);
    }
    assert!((full.value - classical).norm() < 1e-14 * classical.norm());
    // λ-terms are present and nonzero otherwise
    assert!(f.coeffs[1][1].norm() > 0.0);
}

#[test]
fn monodromy_eigenvalue_of_each_series() {
    let sol = desk();
    let idx = default_indices(&sol);
    for eq in [Equation::Primal, Equation::Dual] {
        let betas = if eq == Equation::Primal { idx.beta } else { idx.beta_star };
        for b in betas {
            let f = build_frobenius(&sol, b, eq, 30).unwrap();
            let r = monodromy_eigencheck(&f, CoverPoint::real(0.05), c(0.3, 0.1)).unwrap();
            let want = (C::new(0.0, 2.0 * std::f64::consts::PI) * b).exp();
            assert!((r - want).norm() < 1e-10, "β = {b}: {r} vs {want}");
        }
    }
}

#[test]
fn monodromy_eigenvalue_minus_one_at_half_index() {
    let p = OperParams::new(-2.5, 0.0, -0.375);
    let sol = StateSolution::ground(p);
    let f = build_frobenius(&sol, c(0.5, 0.0), Equation::Primal, 30).unwrap();
    let r = monodromy_eigencheck(&f, CoverPoint::real(0.05), c(0.3, 0.0)).unwrap();
    assert!((r + 1.0).norm() < 1e-10, "{r}");
}

#[test]
fn eigencheck_refuses_points_outside_the_region() {
    let sol = desk();
    let idx = default_indices(&sol);
    let f = build_frobenius(&sol, idx.beta[0], Equation::Primal, 20).unwrap();
    let e = monodromy_eigencheck(&f, CoverPoint::real(0.5), c(40.0, 0.0));
    assert!(matches!(e, Err(Error::OutOfConvergenceRegion(_))));
}

#[test]
fn non_index_is_rejected() {
    let e = build_frobenius(&desk(), c(0.123, 0.0), Equation::Primal, 10);
    assert!(matches!(e, Err(Error::Domain(_))));
}

#[test]
fn twist_identity_and_full_turn() {
    let sol = desk();
    let idx = default_indices(&sol);
    let f = build_frobenius(&sol, idx.beta[0], Equation::Primal, 30).unwrap();
    let (z, lam) = (CoverPoint::real(0.1), c(0.3, -0.2));
    let base = f.jet(z, lam);
    let t0 = twisted_eval(Twistable::Frobenius(&f), 0.0, z, lam).unwrap();
    assert!((t0.value - base.value).norm() < 1e-15 * base.value.norm());
    let t1 = twisted_eval(Twistable::Frobenius(&f), 1.0, z, lam).unwrap();
    let factor = (C::new(0.0, 2.0 * std::f64::consts::PI) * (idx.beta[0] - 1.0)).exp();
    assert!((t1.value - factor * base.value).norm() < 1e-10 * base.value.norm());
}

#[test]
fn wronskian_examples() {
    // W[1, z] = 1, W[z, z²] = z²
    let z = c(0.7, 0.3);
    let one = JetValue::new(c(1.0, 0.0), C::default(), C::default());
    let lin = JetValue::new(z, c(1.0, 0.0), C::default());
    let sq = JetValue::new(z * z, 2.0 * z, c(2.0, 0.0));
    let w = wronskian2(one, lin);
    assert_eq!(w.value, c(1.0, 0.0));
    assert_eq!(w.d1, C::default());
    let w = wronskian2(lin, sq);
    assert!((w.value - z * z).norm() < 1e-15);
    assert!((w.d1 - 2.0 * z).norm() < 1e-15);
    assert!((w.d2 - 2.0).norm() < 1e-15);
    let w = wronskian2(sq, lin);
    assert!((w.value + z * z).norm() < 1e-15);
}

#[test]
fn sibuya_stable_under_doubling_z_max() {
    let sol = desk();
    let lam = c(0.3, 0.0);
    let a = build_sibuya(&sol, lam, Equation::Primal, 1e4, 1.0).unwrap().at_match().value;
    let b = build_sibuya(&sol, lam, Equation::Primal, 2e4, 1.0).unwrap().at_match().value;
    assert!((a - b).norm() < 1e-5 * a.norm());
}

#[test]
fn sibuya_leading_ratio_tracks_the_first_correction() {
    // at λ = 0 the first correction to z^{2/3}e^{−S} is 3(r̄¹/3 + 8/27)z^{−1/3}
    let sol = StateSolution::ground(OperParams::new(-2.5, 0.0, 0.0));
    let s = build_sibuya(&sol, C::default(), Equation::Primal, 1e4, 1.0).unwrap();
    let first = 8.0 / 9.0 * 1e4f64.powf(-1.0 / 3.0);
    assert!((s.asymptotic.value_ratio - first).abs() < 0.1 * first, "{:?}", s.asymptotic);
}

#[test]
fn sibuya_decays_along_the_axis() {
    let s = build_sibuya(&desk(), c(0.3, 0.0), Equation::Primal, 1e4, 1.0).unwrap();
    let mags: Vec<f64> = s.jets.iter().map(|(_, j)| j.value.norm()).collect();
    assert!(mags.windows(2).all(|w| w[1] >= w[0]));
    let z = CoverPoint::real(500.0);
    let j = s.jet_at(z).unwrap();
    let ser = AsymptoticSeries::new(s.oper(), 40, 16).unwrap();
    let [v, d1, _] = ser.jet(z, c(0.3, 0.0));
    assert!((j.value / v - 1.0).norm() < 1e-8);
    assert!((j.d1 / d1 - 1.0).norm() < 1e-8);
    assert!(s.jet_at(CoverPoint::real(2e4)).is_err());
}

#[test]
fn psi_system_holds_on_both_lines() {
    let sol = desk();
    let cfg = SibuyaConfig::default();
    for (x, lam) in [(1.0, c(0.3, 0.0)), (0.7, c(-0.5, 0.4))] {
        for line in [Equation::Primal, Equation::Dual] {
            let r = psi_system_residual(&sol, line, CoverPoint::real(x), lam, &cfg).unwrap();
            assert!(r < 1e-8, "{line:?} at z = {x}: {r:e}");
        }
    }
}

#[test]
fn psi_system_on_excited_state() {
    let sol = excited();
    let cfg = SibuyaConfig::default();
    for line in [Equation::Primal, Equation::Dual] {
        let r = psi_system_residual(&sol, line, CoverPoint::real(0.8), c(0.2, 0.1), &cfg).unwrap();
        assert!(r < 1e-6, "{line:?}: {r:e}");
    }
}

#[test]
fn phiphi_wronskians_match_leading_terms() {
    let sol = desk();
    let ev = QEvaluator::new(&sol, &ConnectionConfig::default()).unwrap();
    for s in WeylElement::all() {
        for line in [Equation::Primal, Equation::Dual] {
            for upper in [true, false] {
                let want = phiphi_predicted(&ev.indices, &s, line, upper);
                for (x, lam) in [(0.3, c(0.4, 0.1)), (0.5, c(-0.2, 0.3))] {
                    let r = phiphi_ratio(&ev, &s, line, upper, CoverPoint::real(x), lam);
                    assert!(
                        (r - want).norm() < 1e-8 * want.norm(),
                        "{} {line:?} {upper}: {r} vs {want}",
                        s.name()
                    );
                }
            }
        }
    }
}

#[test]
fn q_independent_of_evaluation_radius() {
    let sol = desk();
    let lam = c(0.3, 0.0);
    let a = QEvaluator::new(&sol, &ConnectionConfig::default())
        .unwrap()
        .eval(lam)
        .unwrap();
    let cfg = ConnectionConfig {
        z_eval: Some(0.1),
        ..Default::default()
    };
    let b = QEvaluator::new(&sol, &cfg).unwrap().eval(lam).unwrap();
    for i in 0..3 {
        assert!((a.q[i] - b.q[i]).norm() < 1e-8 * a.q[i].norm());
        assert!((a.qstar[i] - b.qstar[i]).norm() < 1e-8 * a.qstar[i].norm());
    }
}

#[test]
fn ground_state_q_values() {
    // frozen from this implementation; guards against regressions
    let ev = QEvaluator::new(&desk(), &ConnectionConfig::default()).unwrap();
    let p = ev.eval(c(0.3, 0.0)).unwrap();
    let q = [-3.47461, -6.60339, 2.12306];
    let qs = [0.81478, -3.04190, -9.12028];
    for i in 0..3 {
        assert!((p.q[i].re - q[i]).abs() < 1e-4 && p.q[i].im.abs() < 1e-8);
        assert!((p.qstar[i].re - qs[i]).abs() < 1e-4 && p.qstar[i].im.abs() < 1e-8);
    }
}

#[test]
fn held_out_reconstruction() {
    let sol = desk();
    let ev = QEvaluator::new(&sol, &ConnectionConfig::default()).unwrap();
    let lam = c(0.25, -0.15);
    for eq in [Equation::Primal, Equation::Dual] {
        let con = ev.connect(eq, lam).unwrap();
        let psi = ev.sibuya(eq, lam).unwrap();
        for x in [0.6, 2.0] {
            let z = CoverPoint::real(x);
            let rebuilt = ev.reconstruct(eq, lam, &con.q, z).unwrap();
            let direct = psi.jet_at(z).unwrap();
            assert!(
                (rebuilt.value - direct.value).norm() < 1e-7 * direct.value.norm(),
                "{eq:?} z = {x}"
            );
        }
    }
}

#[test]
fn large_lambda_stays_conditioned() {
    let ev = QEvaluator::new(&desk(), &ConnectionConfig::default()).unwrap();
    let p = ev.eval(c(-3.3, 0.0)).unwrap();
    assert!(p.cond_primal < 1e8 && p.cond_dual < 1e8);
    assert!(ev.match_point(c(-3.3, 0.0)) < 1.0);
}

#[test]
fn q_table_csv_round_trip() {
    let sol = desk();
    let grid = triple_grid(&[c(0.2, 0.0)], sol.params.khat());
    let qt = extract_q(&sol, &grid, &ConnectionConfig::default()).unwrap();
    assert_eq!(qt.len(), 3);
    assert!(qt.all_finite());
    let s = qt.to_csv_string().unwrap();
    let header = s.lines().next().unwrap();
    assert_eq!(header.split(',').count(), 16);
    let back = QTable::from_csv_str(&s, qt.z_match).unwrap();
    assert_eq!(back, qt);
    assert!(QTable::from_csv_str("a,b\n1,2\n", 1.0).is_err());
}

#[test]
fn q_smooth_along_a_line() {
    let ev = QEvaluator::new(&desk(), &ConnectionConfig::default()).unwrap();
    let h = 0.02;
    let grid: Vec<C> = (0..5).map(|i| c(0.1 + h * i as f64, 0.05)).collect();
    let qt = extract_q_with(&ev, &grid).unwrap();
    for i in 0..3 {
        let v = &qt.q[i];
        let scale = v.iter().map(|x| x.norm()).fold(0.0, f64::max);
        for k in 1..4 {
            let d2 = (v[k + 1] - 2.0 * v[k] + v[k - 1]).norm() / (h * h);
            assert!(d2 < 100.0 * scale, "Q{} second difference {d2}", i + 1);
        }
    }
}

#[test]
fn config_validation() {
    let bad = ConnectionConfig {
        z_eval: Some(2.0),
        ..Default::default()
    };
    assert!(bad.validate().is_err());
    let bad = ConnectionConfig {
        m_trunc: 2,
        ..Default::default()
    };
    assert!(bad.validate().is_err());
    let bad = SibuyaConfig {
        z_max: 0.5,
        ..Default::default()
    };
    assert!(bad.validate().is_err());
}

#[test]
fn psi_system_constant_value() {
    assert!((psi_system_constant() - c(0.0, -3f64.sqrt())).norm() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tail_and_pointwise_residuals_agree(x in 0.2f64..0.9, arg in -1.0f64..1.0, lr in -0.8f64..0.8, li in -0.8f64..0.8) {
        let sol = desk();
        let op = ScalarOper::primal(&sol);
        let idx = default_indices(&sol);
        let f = build_frobenius(&sol, idx.beta[2], Equation::Primal, 5).unwrap();
        let (z, lam) = (CoverPoint::new(x, arg), c(lr, li));
        let (a, b) = (f.residual(z, lam), f.direct_residual(&op, z, lam));
        prop_assert!((a - b).norm() < 1e-6 * (b.norm() + cover_pow(z, idx.beta[2] - 3.0).norm()));
    }

    #[test]
    fn twisted_series_solves_the_twisted_equation(t in -1.0f64..1.0, lr in -0.5f64..0.5, li in -0.5f64..0.5) {
        let sol = desk();
        let op = ScalarOper::primal(&sol).twisted(t);
        let idx = default_indices(&sol);
        let f = build_frobenius(&sol, idx.beta[1], Equation::Primal, 30).unwrap();
        let lam = c(lr, li);
        let z = CoverPoint::real(0.1);
        let h = 1e-4;
        let jets: Vec<JetValue> = [-h, 0.0, h].iter().map(|d| f.twisted_jet(t, CoverPoint::real(0.1 + d), lam)).collect();
        let d3 = (jets[2].d2 - jets[0].d2) / (2.0 * h);
        let (w1, w2) = op.potentials(&z, lam);
        let r = d3 - w1 * jets[1].d1 + w2 * jets[1].value;
        prop_assert!(r.norm() < 1e-5 * (d3.norm() + (w2 * jets[1].value).norm()));
    }
}
