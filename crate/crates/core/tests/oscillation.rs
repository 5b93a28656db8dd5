use confprop::confcalc::{h1, special_field, SpecialKind};
use confprop::corpus::{lyapunov_corpus, pair, roundabout_corpus};
use confprop::oscillation::*;
use confprop::solver::{solve_ivp, IVPSpec, SelfAdjointProblem};
use confprop::structure::riccati_from_solution;
use confprop::{Family, QuadratureConfig, ScalarField};
use std::f64::consts::PI;

fn sup_on(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    (0..=n).map(|i| f(lo + (hi - lo) * i as f64 / n as f64).abs()).fold(0.0, f64::max)
}

#[test]
fn zeros_of_cos_alpha() {
    let q = QuadratureConfig::tight();
    let pr = pair(Family::Power, 0.6, 1.0);
    let prob = SelfAdjointProblem::constant(&pr, 4.0, (0.0, 6.0)).unwrap();
    let x = solve_ivp(&prob, &IVPSpec { t0: 0.0, x0: 1.0, x1: 0.0 }, 0.01).unwrap();
    let zeros = find_zeros(&x);
    assert!(!zeros.is_empty());
    for (k, z) in zeros.iter().enumerate() {
        let want = (PI / 2.0 + k as f64 * PI) / 2.0;
        assert!((h1(&pr, *z, 0.0, &q).unwrap() - want).abs() < 1e-8, "{k}");
    }
    let e = solve_ivp(&SelfAdjointProblem::constant(&pr, 0.0, (0.0, 6.0)).unwrap(), &IVPSpec { t0: 0.0, x0: 1.0, x1: 0.0 }, 0.01)
        .unwrap();
    assert!(find_zeros(&e).is_empty());
}

#[test]
fn classical_sine_zero() {
    let pr = pair(Family::Trig, 1.0, 1.0);
    let prob = SelfAdjointProblem::constant(&pr, 1.0, (0.1, 6.2)).unwrap();
    let x = solve_ivp(&prob, &IVPSpec { t0: 0.1, x0: 0.1f64.sin(), x1: 0.1f64.cos() }, 0.01).unwrap();
    let z = find_zeros(&x);
    assert_eq!(z.len(), 1);
    assert!((z[0] - PI).abs() < 1e-9, "{}", z[0] - PI);
}

#[test]
fn disconjugacy_against_first_zero() {
    let pr = pair(Family::Trig, 0.5, 1.0);
    let k0 = (PI / 4.0).sin();
    let w = 2.0;
    let prob = SelfAdjointProblem::constant(&pr, w * w, (0.0, 10.0)).unwrap();
    // h₁(b,0) = b/κ₀; first zero of sin_α(ω;·,0) at h₁ = π/ω
    let crit = PI / w * k0;
    for (b, want) in [(0.8 * crit, true), (1.2 * crit, false)] {
        for c in [ReidCriterion::ReidV, ReidCriterion::ReidVI] {
            assert_eq!(disconjugate(&prob, 0.0, b, c, 0.01).unwrap().disconjugate, want, "{b} {c:?}");
        }
    }
    let q0 = SelfAdjointProblem::new(&pr, ScalarField::polynomial(&[1.0, 1.0]), ScalarField::zero(), ScalarField::zero(), (0.0, 10.0))
        .unwrap();
    assert!(disconjugate(&q0, 0.0, 10.0, ReidCriterion::ReidV, 0.01).unwrap().disconjugate);
}

#[test]
fn roundabout_corpus_agrees() {
    let q = QuadratureConfig::default();
    for case in roundabout_corpus().unwrap() {
        let rep = roundabout_audit(&case.prob, case.a, case.b, 0.01, &q).unwrap();
        assert!(rep.agree, "{}: {:?}", case.name, rep.criteria);
        assert_eq!(rep.criteria[0], case.disconjugate, "{}", case.name);
    }
}

#[test]
fn cutoff_functional_matches_boundary_terms() {
    let q = QuadratureConfig::default();
    let pr = pair(Family::Power, 0.7, 1.0);
    let prob = SelfAdjointProblem::new(&pr, ScalarField::polynomial(&[1.0, 0.3]), ScalarField::cos(), ScalarField::zero(), (0.0, 3.0))
        .unwrap();
    let u = solve_ivp(&prob, &IVPSpec { t0: 0.0, x0: 0.4, x1: 1.0 }, 0.01).unwrap();
    for (c, d) in [(0.3, 2.1), (0.77, 1.41), (1.5, 2.9)] {
        let adm = AdmissibleField::cutoff(&u, c, d, 0.0, 3.0).unwrap();
        let f = quadratic_functional(&prob, &adm, &q).unwrap();
        let want = cutoff_boundary_terms(&prob, &u, c, d, 3.0, &q).unwrap();
        assert!((f - want).abs() < 1e-4, "{c} {d}: {f} vs {want}");
    }
    let adm = bump(&pr, 0.0, 3.0, Profile::Sine, (0.0, 1.0), &q).unwrap();
    let f1 = quadratic_functional(&prob, &adm, &q).unwrap();
    let scaled = AdmissibleField::new(adm.eta.scale(3.0), 0.0, 3.0, adm.breaks.clone()).unwrap();
    let f3 = quadratic_functional(&prob, &scaled, &q).unwrap();
    assert!((f3 - 9.0 * f1).abs() <= 1e-8 * f3.abs());
    assert_eq!(quadratic_functional(&prob, &AdmissibleField::zero(0.0, 3.0), &q).unwrap(), 0.0);
}

#[test]
fn picone_identities() {
    let q = QuadratureConfig::default();
    let pr = pair(Family::Trig, 0.6, 1.0);
    let prob = SelfAdjointProblem::new(&pr, ScalarField::polynomial(&[1.0, 0.2]), ScalarField::constant(0.5), ScalarField::zero(), (0.0, 2.0))
        .unwrap();
    let x = solve_ivp(&prob, &IVPSpec { t0: 0.0, x0: 1.0, x1: 0.3 }, 0.01).unwrap();
    let z = riccati_from_solution(&prob, &x).unwrap();
    let adm = bump(&pr, 0.0, 2.0, Profile::Sine, (0.0, 1.0), &q).unwrap();
    let r = picone1_residual(&prob, &z, &adm);
    assert!(sup_on(|t| r.eval(t), 0.01, 1.99, 200) < 1e-4);

    let prob = prob.on_interval((0.0, 0.8)).unwrap();
    let p2 = SelfAdjointProblem::new(&pr, ScalarField::constant(0.8), ScalarField::constant(2.0), ScalarField::zero(), (0.0, 0.8)).unwrap();
    let cmp = ComparisonPair::new(prob.clone(), p2.clone()).unwrap();
    let u = solve_ivp(&prob, &IVPSpec { t0: 0.0, x0: 0.0, x1: 1.0 }, 0.01).unwrap();
    let v = solve_ivp(&p2, &IVPSpec { t0: 0.0, x0: 1.0, x1: 0.0 }, 0.01).unwrap();
    let r = picone2_residual(&cmp, &u, &v).unwrap();
    let s = sup_on(|t| r.eval(t), 0.0, 0.8, 200);
    assert!(s < 1e-4, "{s}");
}

#[test]
fn sturm_between_zeros() {
    let pr = pair(Family::Power, 0.7, 1.0);
    let p1 = SelfAdjointProblem::constant(&pr, 1.0, (0.0, 12.0)).unwrap();
    let p2 = SelfAdjointProblem::constant(&pr, 4.0, (0.0, 12.0)).unwrap();
    let u = solve_ivp(&p1, &IVPSpec { t0: 0.0, x0: 0.0, x1: 1.0 }, 0.01).unwrap();
    let zs = find_zeros(&u);
    let (a, b) = (zs[0], zs[1]);
    let cmp = ComparisonPair::new(p1.clone(), p2.clone()).unwrap();
    for th in [0.0, 0.7, 2.0] {
        let v = solve_ivp(&p2, &IVPSpec { t0: 0.0, x0: f64::cos(th), x1: f64::sin(th) }, 0.01).unwrap();
        let rep = sturm_compare(&cmp, &u, &v, a, b).unwrap();
        assert!(rep.hypothesis_holds && rep.strict_somewhere);
        assert!(rep.v_vanishes, "{th}");
    }
    let same = ComparisonPair::new(p1.clone(), p1.clone()).unwrap();
    let rep = sturm_compare(&same, &u, &u, a, b).unwrap();
    assert!(!rep.strict_somewhere && !rep.independent);
}

#[test]
fn lyapunov_corpus_necessary_condition() {
    let q = QuadratureConfig::tight();
    for (name, prob, a) in lyapunov_corpus().unwrap() {
        let u = solve_ivp(&prob, &IVPSpec { t0: a, x0: 0.0, x1: 1.0 }, 0.01).unwrap();
        let b = find_zeros(&u).into_iter().find(|&z| z > a + 1e-6).expect("conjugate point");
        let rep = lyapunov_check(&prob, a, b, &q).unwrap();
        assert!(rep.necessary_holds, "{name}: {} < {}", rep.lhs, rep.rhs);
        // shorter interval: if the sufficient test fires it must agree with the IVP criterion
        let rep = lyapunov_check(&prob, a, a + 0.3 * (b - a), &q).unwrap();
        if rep.sufficient_disconjugacy {
            assert!(disconjugate(&prob, a, a + 0.3 * (b - a), ReidCriterion::ReidV, 0.01).unwrap().disconjugate);
        }
    }
}

#[test]
fn classical_lyapunov_constant() {
    let q = QuadratureConfig::tight();
    let pr = pair(Family::Trig, 1.0, 1.0);
    let w = 3.0;
    let prob = SelfAdjointProblem::constant(&pr, w * w, (0.0, 2.0)).unwrap();
    let rep = lyapunov_check(&prob, 0.0, PI / w, &q).unwrap();
    assert!((rep.lhs - w * PI).abs() < 1e-9);
    assert!((rep.rhs - 4.0 * w / PI).abs() < 1e-12);
}

#[test]
fn sharpness_ratio_decreases_to_one() {
    let q = QuadratureConfig::tight();
    for pr in [pair(Family::Trig, 0.6, 1.0), pair(Family::Power, 0.8, 1.0), pair(Family::Trig, 1.0, 1.0)] {
        let pts: Vec<_> = [0.2, 0.1, 0.05].iter().map(|&d| lyapunov_sharpness(&pr, d, &q).unwrap()).collect();
        for p in &pts {
            assert!(p.lhs > p.rhs && p.lhs <= p.bound * (1.0 + 1e-12), "{p:?}");
        }
        assert!(pts.windows(2).all(|w| w[1].ratio < w[0].ratio && w[1].ratio > 1.0));
        assert!(pts[2].ratio - 1.0 < 0.5 * (pts[0].ratio - 1.0));
    }
}

#[test]
fn flw_examples() {
    let q = QuadratureConfig::default();
    let pr = pair(Family::Trig, 1.0, 1.0);
    let osc = SelfAdjointProblem::constant(&pr, 1.0, (0.0, 40.0)).unwrap();
    let rep = flw_scan(&osc, 0.0, &[10.0, 20.0, 40.0], 0.02, &q).unwrap();
    assert!(rep.oscillation_predicted);
    assert!((rep.slope_p - 1.0).abs() < 1e-9 && (rep.slope_q - 1.0).abs() < 1e-9);
    assert!(rep.zero_count >= 12);
    let flat = SelfAdjointProblem::constant(&pr, 0.0, (0.0, 40.0)).unwrap();
    assert!(!flw_scan(&flat, 0.0, &[10.0, 20.0, 40.0], 0.02, &q).unwrap().oscillation_predicted);

    // 0 < p ≤ 1, q ≥ ω²
    let pr = pair(Family::Power, 0.8, 1.0);
    let p = confprop::confcalc::e0_field(&pr, 0.0, &q);
    let qf = &ScalarField::constant(1.0) + &(&ScalarField::sin() * &ScalarField::sin()).scale(0.5);
    let prob = SelfAdjointProblem::new(&pr, p, qf, ScalarField::zero(), (0.0, 20.0)).unwrap();
    let rep = flw_scan(&prob, 0.0, &[5.0, 10.0, 15.0, 20.0], 0.01, &q).unwrap();
    assert!(rep.oscillation_predicted, "{rep:?}");
    let hh = h1(&pr, 20.0, 0.0, &q).unwrap();
    assert!(rep.zero_count as f64 >= (hh / PI).floor() - 1.0, "{} {}", rep.zero_count, hh);
    let _ = special_field(&pr, SpecialKind::SinA, 1.0, 0.0, &q);
}
