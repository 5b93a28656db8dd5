use confprop::confcalc::{e0, e0_field, h1, h1_field, special, special_field, SpecialKind};
use confprop::solver::{lx_residual, solve_ivp, IVPSpec, SelfAdjointProblem};
use confprop::structure::*;
use confprop::{make_pair, Alpha, Family, KappaPair, QuadratureConfig, ScalarField};

fn pair(f: Family, a: f64) -> KappaPair {
    make_pair(f, Alpha::new(a).unwrap(), if f == Family::Trig { None } else { Some(1.0) }).unwrap()
}

fn sup_on(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    (0..=n).map(|i| f(lo + (hi - lo) * i as f64 / n as f64).abs()).fold(0.0, f64::max)
}

fn uniform(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
}

#[test]
fn cauchy_methods_agree_and_match_q0_closed_form() {
    let q = QuadratureConfig::tight();
    let pr = pair(Family::Power, 0.7);
    let p = ScalarField::polynomial(&[1.0, 0.5]);
    let prob = SelfAdjointProblem::new(&pr, p.clone(), ScalarField::zero(), ScalarField::zero(), (0.0, 2.0)).unwrap();
    let sg = uniform(0.0, 2.0, 32);
    let k1 = cauchy_kernel(&prob, CauchyMethod::IvpSweep, &sg, 0.01).unwrap();
    let k2 = cauchy_kernel(&prob, CauchyMethod::BasisFormula, &sg, 0.01).unwrap();
    assert!(k1.max_diff(&k2) < 1e-6, "{}", k1.max_diff(&k2));
    let mut err: f64 = 0.0;
    for (i, &t) in sg.iter().enumerate() {
        for (j, &s) in sg.iter().enumerate() {
            err = err.max((k1.value(i, j) - cauchy_q0(&pr, &p, t, s, &q).unwrap()).abs());
        }
    }
    assert!(err < 1e-6, "{err}");
    // off-grid evaluation
    let (t, s) = (1.234, 0.377);
    assert!((k1.eval(t, s) - cauchy_q0(&pr, &p, t, s, &q).unwrap()).abs() < 1e-6);
}

#[test]
fn variation_of_constants_matches_ivp() {
    let q = QuadratureConfig::default();
    let pr = pair(Family::Trig, 0.6);
    let prob = SelfAdjointProblem::new(&pr, ScalarField::constant(1.0), ScalarField::constant(2.0), ScalarField::sin(), (0.0, 3.0))
        .unwrap();
    let x = variation_of_constants(&prob, 0.0, 0.01, &q).unwrap();
    let y = solve_ivp(&prob, &IVPSpec { t0: 0.0, x0: 0.0, x1: 0.0 }, 0.01).unwrap();
    assert_eq!(x.x()[0], 0.0);
    assert_eq!(x.dax()[0], 0.0);
    assert!(sup_on(|t| x.eval_x(t) - y.eval_x(t), 0.0, 3.0, 300) < 1e-6);
    let r = lx_residual(&prob, &x);
    assert!(sup_on(|t| r.eval(t), 0.0, 3.0, 300) < 1e-4);
}

#[test]
fn reduce_order_wronskian_law() {
    let q = QuadratureConfig::default();
    let pr = pair(Family::Power, 0.5);
    let prob = SelfAdjointProblem::constant(&pr, -1.0, (0.0, 2.0)).unwrap();
    let x = solve_ivp(&prob, &IVPSpec { t0: 0.5, x0: 1.0, x1: 0.0 }, 0.01).unwrap();
    let y = reduce_order(&prob, &x, 0.5, &q).unwrap();
    for &t in &[0.0, 0.3, 0.5, 1.1, 2.0] {
        let w = x.eval_x(t) * y.eval_dax(t) - y.eval_x(t) * x.eval_dax(t);
        let e2 = e0(&pr, t, 0.5, &q).unwrap().powi(2);
        assert!((w / e2 - 1.0).abs() < 1e-5, "{t}");
    }
    let r = lx_residual(&prob, &y);
    assert!(sup_on(|t| r.eval(t), 0.0, 2.0, 200) < 1e-4);
}

#[test]
fn riccati_tangent_example() {
    let q = QuadratureConfig::default();
    let pr = pair(Family::Trig, 0.5);
    let prob = SelfAdjointProblem::constant(&pr, 1.0, (0.0, 1.5)).unwrap();
    let hh = h1_field(&pr, 0.0, &q);
    let z = ScalarField::compose(&ScalarField::new("tan", f64::tan).with_lazy_deriv(|| {
        ScalarField::new("sec2", |t: f64| 1.0 / t.cos().powi(2))
    }), &hh)
    .scale(-1.0);
    let rp = RiccatiProblem::from_problem(&prob);
    let r = riccati_residual(&rp, &z);
    assert!(sup_on(|t| r.eval(t), 0.0, 1.0, 200) < 1e-4);
    let rp1 = RiccatiProblem { interval: (0.0, 1.0), ..rp };
    let x = solution_from_riccati(&rp1, &z, 0.0, 0.01, &q).unwrap();
    let c = special_field(&pr, SpecialKind::CosA, 1.0, 0.0, &q);
    assert!(sup_on(|t| x.eval_x(t) - c.eval(t), 0.0, 1.0, 100) < 1e-6);
    let prob1 = prob.on_interval((0.0, 1.0)).unwrap();
    let z2 = riccati_from_solution(&prob1, &x).unwrap();
    assert!(sup_on(|t| z2.eval(t) - z.eval(t), 0.0, 1.0, 100) < 1e-6);
    let _ = h1(&pr, 1.0, 0.0, &q);
}

#[test]
fn factorization_identity_for_arbitrary_x() {
    let pr = pair(Family::Power, 0.8);
    let prob = SelfAdjointProblem::new(&pr, ScalarField::polynomial(&[1.0, 0.2]), ScalarField::cos(), ScalarField::zero(), (0.0, 2.0))
        .unwrap();
    let x = &ScalarField::exp() + &ScalarField::polynomial(&[0.0, 0.0, 1.0]);
    let r = factorization_residual(&prob, &x);
    assert!(sup_on(|t| r.eval(t), 0.1, 1.9, 100) < 1e-4);
}

#[test]
fn polya_and_trench_residuals() {
    let q = QuadratureConfig::default();
    let pr = pair(Family::Trig, 0.6);
    let prob = SelfAdjointProblem::constant(&pr, 0.5, (0.0, 2.0)).unwrap();
    let x = solve_ivp(&prob, &IVPSpec { t0: 0.0, x0: 1.0, x1: 0.2 }, 0.01).unwrap();
    let fp = polya_factors(&prob, &x, 0.0, &q).unwrap();
    let probe = special_field(&pr, SpecialKind::SinA, 1.3, 0.0, &q);
    let r = fp.residual(&prob, &probe);
    assert!(sup_on(|t| r.eval(t), 0.05, 1.95, 100) < 1e-4, "{}", sup_on(|t| r.eval(t), 0.05, 1.95, 100));
    let ladder: Vec<f64> = (1..=6).map(|k| 2.0 * (1.0 - 0.5f64.powi(k))).collect();
    let (tp, rep) = trench_factors(&prob, &x, 0.0, 2.0, &ladder, &q).unwrap();
    assert_eq!(tp.kind, FactorKind::Trench);
    assert!(!rep.effectively_divergent);
    let r = tp.residual(&prob, &probe);
    let s = sup_on(|t| r.eval(t), 0.05, 1.8, 100);
    assert!(s < 1e-4, "{s}");
    assert!(rep.partial_integrals.windows(2).all(|w| w[1].1 > w[0].1));
    // ∫ₐᵀ 1/γ₂ d_α = 1/I(T) − 1/I(a)
    let i_of = |t: f64| 1.0 / tp.f2.eval(t).sqrt() * (fp.f2.eval(t)).sqrt();
    for &(t, v) in &rep.partial_integrals {
        let want = i_of(t) - i_of(0.0);
        assert!((v - want).abs() < 1e-6 * want.abs().max(1.0), "{t} {v} {want}");
    }
    let _ = e0_field(&pr, 0.0, &q);
}

#[test]
fn variation_of_parameters_matches_ivp() {
    let q = QuadratureConfig::default();
    let pr = pair(Family::Power, 0.6);
    let hom = SelfAdjointProblem::constant(&pr, -0.5, (0.0, 2.0)).unwrap();
    let x = solve_ivp(&hom, &IVPSpec { t0: 0.0, x0: 1.0, x1: 0.0 }, 0.01).unwrap();
    let prob = hom.with_forcing(ScalarField::polynomial(&[1.0, 1.0]));
    let (ya, wa) = (0.3, 0.7);
    let y = variation_of_parameters(&prob, &x, ya, wa, 0.0, &q).unwrap();
    // p(a)W(x,y)(a) = x(a) D^α y(a) − y(a) D^α x(a) = D^α y(a)
    let z = solve_ivp(&prob, &IVPSpec { t0: 0.0, x0: ya, x1: wa }, 0.01).unwrap();
    assert!(sup_on(|t| y.eval_x(t) - z.eval_x(t), 0.0, 2.0, 200) < 1e-4);
    let r = lx_residual(&prob, &y);
    assert!(sup_on(|t| r.eval(t), 0.0, 2.0, 200) < 1e-4);
}

#[test]
fn recessive_classification() {
    let q = QuadratureConfig::default();
    let pr = pair(Family::Trig, 0.7);
    let w = 1.0;
    let prob = SelfAdjointProblem::constant(&pr, -w * w, (0.0, 6.0)).unwrap();
    let u = solve_ivp(&prob, &IVPSpec { t0: 0.0, x0: 1.0, x1: -w }, 0.01).unwrap();
    let v = solve_ivp(&prob, &IVPSpec { t0: 0.0, x0: 1.0, x1: w }, 0.01).unwrap();
    let ladder = [1.0, 2.0, 3.0, 4.0, 5.0];
    let rep = classify_recessive_dominant(&prob, &u, &v, 0.0, &ladder, &q).unwrap();
    assert_eq!(rep.verdict, RecessiveVerdict::URecessive, "{rep:?}");
    let rep = classify_recessive_dominant(&prob, &v, &u, 0.0, &ladder, &q).unwrap();
    assert_eq!(rep.verdict, RecessiveVerdict::VRecessive, "{rep:?}");
    let osc = SelfAdjointProblem::constant(&pr, w * w, (0.0, 6.0)).unwrap();
    let a = solve_ivp(&osc, &IVPSpec { t0: 0.0, x0: 1.0, x1: 0.0 }, 0.01).unwrap();
    let b = solve_ivp(&osc, &IVPSpec { t0: 0.0, x0: 0.0, x1: 1.0 }, 0.01).unwrap();
    let rep = classify_recessive_dominant(&osc, &a, &b, 0.0, &ladder, &q).unwrap();
    assert_eq!(rep.verdict, RecessiveVerdict::Inconclusive);
    let _ = special(&pr, SpecialKind::CosA, 1.0, 1.0, 0.0, &q);
}
