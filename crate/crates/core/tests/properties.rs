use confprop::confcalc::*;
use confprop::corpus::pair;
use confprop::greens::{audit_green, green_phipsi, BVPSpec};
use confprop::oscillation::{bump, quadratic_functional, AdmissibleField, Profile};
use confprop::solver::{solve_ivp, IVPSpec, SelfAdjointProblem};
use confprop::structure::{cauchy_kernel, CauchyMethod};
use confprop::{Family, KappaPair, QuadratureConfig, ScalarField};
use proptest::prelude::*;

fn family() -> impl Strategy<Value = Family> {
    prop_oneof![Just(Family::Trig), Just(Family::Power), Just(Family::TimePower)]
}

fn alpha() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.3), Just(0.5), Just(0.8), Just(1.0), 0.2f64..1.0]
}

fn setup(fam: Family, al: f64) -> KappaPair {
    pair(fam, al, 1.0)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exponential_laws(fam in family(), al in alpha(), t in 0.2f64..3.0, s in 0.2f64..3.0, r in 0.2f64..3.0, c in -1.0f64..1.0) {
        let pr = setup(fam, al);
        let qc = QuadratureConfig::tight();
        let p = ScalarField::polynomial(&[c, 0.3]);
        let qf = ScalarField::cos();
        let ep = |f: &ScalarField, x: f64, y: f64| exp_p(&ExpArgs::new(f.clone(), &pr), x, y, &qc).unwrap();
        let k1 = pr.kappa1().clone();
        prop_assert!(close(ep(&p, t, t), 1.0, 1e-12));
        prop_assert!(close(ep(&p, t, s) * ep(&p, s, r), ep(&p, t, r), 1e-8));
        prop_assert!(close(1.0 / ep(&p, t, s), ep(&p, s, t), 1e-8));
        prop_assert!(close(ep(&p, s, t), ep(&(&k1.scale(2.0) - &p), t, s), 1e-8));
        prop_assert!(close(ep(&k1, t, s), 1.0, 1e-8));
        prop_assert!(close(ep(&k1.scale(-1.0), t, s), e0(&pr, t, s, &qc).unwrap().powi(2), 1e-8));
        prop_assert!(close(ep(&p, t, s) * ep(&qf, t, s), ep(&(&(&p + &qf) - &k1), t, s), 1e-8));
        prop_assert!(close(ep(&p, t, s) / ep(&qf, t, s), ep(&(&(&p - &qf) + &k1), t, s), 1e-8));
    }

    #[test]
    fn derivative_law(fam in family(), al in alpha(), t in 0.3f64..3.0, s in 0.2f64..3.0, c in -1.0f64..1.0) {
        let pr = setup(fam, al);
        let qc = QuadratureConfig::tight();
        let p = ScalarField::polynomial(&[c, 0.4]);
        let f = exp_field(&ExpArgs::new(p.clone(), &pr), s, &qc);
        let lhs = dalpha(&pr, &f, t).unwrap();
        let rhs = p.eval(t) * f.eval(t);
        prop_assert!((lhs - rhs).abs() <= 1e-6 * (1.0 + rhs.abs()));
    }

    #[test]
    fn ftc(fam in family(), al in alpha(), a in 0.2f64..1.0, len in 0.3f64..2.0, c in 0.1f64..2.0) {
        let pr = setup(fam, al);
        let qc = QuadratureConfig::tight();
        let b = a + len;
        let f = &ScalarField::sin().scale(c) + &ScalarField::polynomial(&[0.0, 0.5, -0.2]);
        let df = dalpha_field(&pr, &f);
        let lhs = alpha_integral(&pr, &df, a, b, Weight::E0Right, &qc).unwrap();
        let rhs = f.eval(b) - f.eval(a) * e0(&pr, b, a, &qc).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-6);
    }

    #[test]
    fn special_pythagoras(fam in family(), al in alpha(), w in 0.2f64..3.0, t in 0.2f64..3.0, t0 in 0.2f64..3.0) {
        let pr = setup(fam, al);
        let qc = QuadratureConfig::tight();
        let sp = |k| special(&pr, k, w, t, t0, &qc).unwrap();
        let e2 = e0(&pr, t, t0, &qc).unwrap().powi(2);
        prop_assert!(close(sp(SpecialKind::CosA).powi(2) + sp(SpecialKind::SinA).powi(2), e2, 1e-8));
        // the difference of squares loses digits in proportion to cosh²
        let (ch, sh) = (sp(SpecialKind::CoshA), sp(SpecialKind::SinhA));
        prop_assert!((ch * ch - sh * sh - e2).abs() <= 1e-8 * (e2 + ch * ch));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn cauchy_diagonal(fam in family(), al in alpha(), c in 0.1f64..1.0, qv in -1.0f64..1.0) {
        let pr = setup(fam, al);
        let p = ScalarField::polynomial(&[1.0, c]);
        let prob = SelfAdjointProblem::new(&pr, p.clone(), ScalarField::constant(qv), ScalarField::zero(), (0.2, 2.0)).unwrap();
        let sg: Vec<f64> = (0..=8).map(|i| 0.2 + 1.8 * i as f64 / 8.0).collect();
        let k = cauchy_kernel(&prob, CauchyMethod::BasisFormula, &sg, 0.01).unwrap();
        for (j, &s) in sg.iter().enumerate() {
            let i = k.t_grid().iter().position(|&t| t == s).unwrap();
            prop_assert!(k.value(i, j).abs() < 1e-9);
            prop_assert!((k.dvalue(i, j) - 1.0 / p.eval(s)).abs() < 1e-8);
        }
    }

    #[test]
    fn functional_is_quadratic(fam in family(), al in alpha(), qv in -2.0f64..2.0, c in -3.0f64..3.0) {
        let pr = setup(fam, al);
        let qc = QuadratureConfig::default();
        let prob = SelfAdjointProblem::new(&pr, ScalarField::constant(1.0), ScalarField::constant(qv), ScalarField::zero(), (0.2, 2.0)).unwrap();
        let eta = bump(&pr, 0.2, 2.0, Profile::Sine, (0.0, 1.0), &qc).unwrap();
        let scaled = AdmissibleField::new(eta.eta.scale(c), 0.2, 2.0, eta.breaks.clone()).unwrap();
        let f1 = quadratic_functional(&prob, &eta, &qc).unwrap();
        let fc = quadratic_functional(&prob, &scaled, &qc).unwrap();
        prop_assert!((fc - c * c * f1).abs() <= 1e-7 * (1.0 + fc.abs()));
    }

    #[test]
    fn ivp_superposition(fam in family(), al in alpha(), x0 in -1.0f64..1.0, x1 in -1.0f64..1.0, k in -2.0f64..2.0) {
        let pr = setup(fam, al);
        let prob = SelfAdjointProblem::new(&pr, ScalarField::polynomial(&[1.0, 0.2]), ScalarField::sin(), ScalarField::zero(), (0.2, 2.0)).unwrap();
        let a = solve_ivp(&prob, &IVPSpec { t0: 0.5, x0, x1 }, 0.01).unwrap();
        let b = solve_ivp(&prob, &IVPSpec { t0: 0.5, x0: k * x0, x1: k * x1 }, 0.01).unwrap();
        for t in [0.2, 0.9, 1.7, 2.0] {
            prop_assert!((b.eval_x(t) - k * a.eval_x(t)).abs() < 1e-7);
        }
    }

    #[test]
    fn green_symmetry(fam in family(), al in alpha(), c in 0.0f64..1.0, qv in -1.0f64..1.0) {
        let pr = setup(fam, al);
        let qc = QuadratureConfig::default();
        let prob = SelfAdjointProblem::new(&pr, ScalarField::polynomial(&[1.0, c]), ScalarField::constant(qv), ScalarField::zero(), (0.2, 1.7)).unwrap();
        let g = green_phipsi(&prob, &BVPSpec::conjugate(0.0, 0.0), 0.2, 1.7, 0.005, 17, &qc).unwrap();
        prop_assert!(audit_green(&g, &qc).unwrap().symmetry_residual < 1e-6);
    }
}
