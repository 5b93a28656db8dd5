//! The proportional-derivative calculus: D^α, exponentials, α-integrals,
//! special functions, geodesics and critical points.

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::gains::KappaPair;
use crate::quad::{integrate, QuadratureConfig};

fn finite(v: f64, what: &str, t: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite { what: what.into(), t })
    }
}

/// D^α f(t) = κ₁(t) f(t) + κ₀(t) f′(t).
pub fn dalpha(pair: &KappaPair, f: &ScalarField, t: f64) -> Result<f64> {
    pair.check(t)?;
    let v = pair.k1(t) * f.eval(t) + pair.k0(t) * f.deriv_at(t);
    finite(v, f.label(), t)
}

/// D^α f as a field; carries a closed derivative when f and the gains allow it.
pub fn dalpha_field(pair: &KappaPair, f: &ScalarField) -> ScalarField {
    (pair.kappa1() * f + pair.kappa0() * &f.derivative()).relabel(format!("Da[{}]", f.label()))
}

/// D^α D^α f(t).
pub fn dalpha2(pair: &KappaPair, f: &ScalarField, t: f64) -> Result<f64> {
    dalpha(pair, &dalpha_field(pair, f), t)
}

/// Exponent p and the pair it is measured against.
#[derive(Debug, Clone)]
pub struct ExpArgs {
    pub p: ScalarField,
    pub pair: KappaPair,
}

impl ExpArgs {
    pub fn new(p: ScalarField, pair: &KappaPair) -> Self {
        ExpArgs { p, pair: pair.clone() }
    }
}

fn check_span(pair: &KappaPair, t: f64, s: f64) -> Result<()> {
    pair.check_closed(t)?;
    pair.check_closed(s)
}

/// log e_p(t,s) = ∫ₛᵗ (p − κ₁)/κ₀ dτ.
pub fn log_exp_p(args: &ExpArgs, t: f64, s: f64, quad: &QuadratureConfig) -> Result<f64> {
    check_span(&args.pair, t, s)?;
    if t == s {
        return Ok(0.0);
    }
    let (p, pair) = (&args.p, &args.pair);
    integrate(|x| (p.eval(x) - pair.k1(x)) / pair.k0(x), s, t, quad)
}

/// e_p(t,s); the exponent is accumulated first and exponentiated once.
pub fn exp_p(args: &ExpArgs, t: f64, s: f64, quad: &QuadratureConfig) -> Result<f64> {
    Ok(log_exp_p(args, t, s, quad)?.exp())
}

/// log e₀(t,s), closed form for built-in families.
pub fn log_e0(pair: &KappaPair, t: f64, s: f64, quad: &QuadratureConfig) -> Result<f64> {
    check_span(pair, t, s)?;
    match pair.kappa_ratio_integral(t, s) {
        Some(v) => Ok(-v),
        None => log_exp_p(&ExpArgs::new(ScalarField::zero(), pair), t, s, quad),
    }
}

/// e₀(t,s).
pub fn e0(pair: &KappaPair, t: f64, s: f64, quad: &QuadratureConfig) -> Result<f64> {
    Ok(log_e0(pair, t, s, quad)?.exp())
}

/// h₁(t,a) = ∫ₐᵗ 1/κ₀.
pub fn h1(pair: &KappaPair, t: f64, a: f64, quad: &QuadratureConfig) -> Result<f64> {
    check_span(pair, t, a)?;
    match pair.h1_closed(t, a) {
        Some(v) => Ok(v),
        None => integrate(|x| 1.0 / pair.k0(x), a, t, quad),
    }
}

/// t ↦ e_p(t,s) with derivative (p − κ₁)/κ₀ · e_p. Evaluation failures yield NaN.
pub fn exp_field(args: &ExpArgs, s: f64, quad: &QuadratureConfig) -> ScalarField {
    let (a, q) = (args.clone(), *quad);
    let f = ScalarField::new(format!("e_{{{}}}(t,{s})", args.p.label()), move |t| {
        exp_p(&a, t, s, &q).unwrap_or(f64::NAN)
    });
    let a = args.clone();
    let g = f.clone();
    f.with_lazy_deriv(move || {
        let rate = &(&a.p - a.pair.kappa1()) / a.pair.kappa0();
        &rate * &g
    })
}

/// t ↦ e₀(t,s).
pub fn e0_field(pair: &KappaPair, s: f64, quad: &QuadratureConfig) -> ScalarField {
    let (p, q) = (pair.clone(), *quad);
    let f = ScalarField::new(format!("e0(t,{s})"), move |t| e0(&p, t, s, &q).unwrap_or(f64::NAN));
    let p = pair.clone();
    let g = f.clone();
    f.with_lazy_deriv(move || -(&(p.kappa1() / p.kappa0()) * &g))
}

/// t ↦ e₀(s,t), the reflected exponential.
pub fn e0_field_rev(pair: &KappaPair, s: f64, quad: &QuadratureConfig) -> ScalarField {
    let (p, q) = (pair.clone(), *quad);
    let f = ScalarField::new(format!("e0({s},t)"), move |t| e0(&p, s, t, &q).unwrap_or(f64::NAN));
    let p = pair.clone();
    let g = f.clone();
    f.with_lazy_deriv(move || &(p.kappa1() / p.kappa0()) * &g)
}

/// t ↦ h₁(t,a).
pub fn h1_field(pair: &KappaPair, a: f64, quad: &QuadratureConfig) -> ScalarField {
    let (p, q) = (pair.clone(), *quad);
    let f = ScalarField::new(format!("h1(t,{a})"), move |t| h1(&p, t, a, &q).unwrap_or(f64::NAN));
    let p = pair.clone();
    f.with_lazy_deriv(move || p.kappa0().recip())
}

/// Weight applied inside an α-integral over [a, b].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weight {
    None,
    /// e₀(b,t)
    E0Right,
    /// e₀²(b,t)
    E0SqRight,
}

fn weight_at(pair: &KappaPair, w: Weight, b: f64, t: f64, quad: &QuadratureConfig) -> f64 {
    match w {
        Weight::None => 1.0,
        Weight::E0Right => e0(pair, b, t, quad).unwrap_or(f64::NAN),
        Weight::E0SqRight => (2.0 * log_e0(pair, b, t, quad).unwrap_or(f64::NAN)).exp(),
    }
}

/// ∫ₐᵇ f(t) w(t) d_αt with d_αt = dt/κ₀(t).
pub fn alpha_integral(
    pair: &KappaPair,
    f: &ScalarField,
    a: f64,
    b: f64,
    weight: Weight,
    quad: &QuadratureConfig,
) -> Result<f64> {
    alpha_integral_fn(pair, |t| f.eval(t), a, b, weight, quad)
}

/// As [`alpha_integral`] for a plain closure.
pub fn alpha_integral_fn<F: Fn(f64) -> f64>(
    pair: &KappaPair,
    f: F,
    a: f64,
    b: f64,
    weight: Weight,
    quad: &QuadratureConfig,
) -> Result<f64> {
    check_span(pair, a, b)?;
    integrate(|t| f(t) * weight_at(pair, weight, b, t, quad) / pair.k0(t), a, b, quad)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecialKind {
    CosA,
    SinA,
    CoshA,
    SinhA,
}

/// cos_α, sin_α, cosh_α, sinh_α of (ω; t, t₀).
pub fn special(
    pair: &KappaPair,
    kind: SpecialKind,
    omega: f64,
    t: f64,
    t0: f64,
    quad: &QuadratureConfig,
) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::InvalidArgument(format!("omega must be positive, got {omega}")));
    }
    match kind {
        SpecialKind::CosA => Ok(e0(pair, t, t0, quad)? * (omega * h1(pair, t, t0, quad)?).cos()),
        SpecialKind::SinA => Ok(e0(pair, t, t0, quad)? * (omega * h1(pair, t, t0, quad)?).sin()),
        SpecialKind::CoshA | SpecialKind::SinhA => {
            let up = exp_p(&ExpArgs::new(ScalarField::constant(omega), pair), t, t0, quad)?;
            let dn = exp_p(&ExpArgs::new(ScalarField::constant(-omega), pair), t, t0, quad)?;
            Ok(if kind == SpecialKind::CoshA { 0.5 * (up + dn) } else { 0.5 * (up - dn) })
        }
    }
}

/// The special function as a field in t, with closed derivative
/// D^α cos_α = −ω sin_α, D^α sin_α = ω cos_α, D^α cosh_α = ω sinh_α, D^α sinh_α = ω cosh_α.
pub fn special_field(pair: &KappaPair, kind: SpecialKind, omega: f64, t0: f64, quad: &QuadratureConfig) -> ScalarField {
    let (p, q) = (pair.clone(), *quad);
    let name = match kind {
        SpecialKind::CosA => "cos_a",
        SpecialKind::SinA => "sin_a",
        SpecialKind::CoshA => "cosh_a",
        SpecialKind::SinhA => "sinh_a",
    };
    let f = ScalarField::new(format!("{name}({omega};t,{t0})"), move |t| {
        special(&p, kind, omega, t, t0, &q).unwrap_or(f64::NAN)
    });
    let (p, q) = (pair.clone(), *quad);
    let me = f.clone();
    f.with_lazy_deriv(move || {
        // classical derivative from D^α g = κ₁ g + κ₀ g′
        let (partner, sign) = match kind {
            SpecialKind::CosA => (SpecialKind::SinA, -1.0),
            SpecialKind::SinA => (SpecialKind::CosA, 1.0),
            SpecialKind::CoshA => (SpecialKind::SinhA, 1.0),
            SpecialKind::SinhA => (SpecialKind::CoshA, 1.0),
        };
        let other = special_field(&p, partner, omega, t0, &q);
        &(&other.scale(sign * omega) - &(p.kappa1() * &me)) / p.kappa0()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeodesicKind {
    Secant,
    Tangent,
}

/// Secant σ through (a, f(a)), (b, f(b)) or tangent ℓ at a, in the e₀/h₁ geometry.
pub fn geodesic(
    pair: &KappaPair,
    f: &ScalarField,
    a: f64,
    b: Option<f64>,
    kind: GeodesicKind,
    quad: &QuadratureConfig,
) -> Result<ScalarField> {
    let fa = f.eval(a);
    let ea = e0_field(pair, a, quad);
    let ha = h1_field(pair, a, quad);
    match kind {
        GeodesicKind::Secant => {
            let b = b.ok_or_else(|| Error::InvalidArgument("secant needs a second point".into()))?;
            let fb = f.eval(b);
            let hba = h1(pair, b, a, quad)?;
            if hba == 0.0 {
                return Err(Error::InvalidArgument("secant endpoints coincide".into()));
            }
            let eb = e0_field(pair, b, quad);
            let slope = &(&eb.scale(fb) - &ea.scale(fa)) / &ScalarField::constant(hba);
            Ok((&ea.scale(fa) + &(&ha * &slope)).relabel("secant"))
        }
        GeodesicKind::Tangent => {
            let da = dalpha(pair, f, a)?;
            Ok((&ea * &(&ScalarField::constant(fa) + &ha.scale(da))).relabel("tangent"))
        }
    }
}

/// ⟨f,g⟩ = ∫ₐᵇ f g e₀²(b,t) d_αt.
pub fn inner_product(
    pair: &KappaPair,
    f: &ScalarField,
    g: &ScalarField,
    a: f64,
    b: f64,
    quad: &QuadratureConfig,
) -> Result<f64> {
    alpha_integral_fn(pair, |t| f.eval(t) * g.eval(t), a, b, Weight::E0SqRight, quad)
}

/// Bisection on a sign-changing bracket down to width `tol`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut flo = f(lo);
    if flo == 0.0 {
        return lo;
    }
    while (hi - lo).abs() > tol {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriticalKind {
    AlphaMax,
    AlphaMin,
    Saddle,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint {
    pub t: f64,
    pub kind: CriticalKind,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CriticalScan {
    pub points: Vec<CriticalPoint>,
    /// D^α f vanishes identically on the grid; no points are listed.
    pub degenerate: bool,
    /// Grid cells where |D^α f| dips near zero without a sign change.
    pub unresolved: Vec<(f64, f64)>,
}

/// Zeros of D^α f on [lo, hi] by sign-change bisection, classified by the sign of D^αD^α f.
pub fn find_alpha_critical(pair: &KappaPair, f: &ScalarField, interval: (f64, f64), grid_n: usize) -> CriticalScan {
    let (lo, hi) = interval;
    let n = grid_n.max(2);
    let grid: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let df = dalpha_field(pair, f);
    let g = |t: f64| df.eval(t);
    let vals: Vec<f64> = grid.iter().map(|&t| g(t)).collect();
    let fscale = grid.iter().map(|&t| f.eval(t).abs()).fold(0.0, f64::max).max(1.0);
    let gmax = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let mut scan = CriticalScan::default();
    if gmax < 1e-12 * fscale {
        scan.degenerate = true;
        return scan;
    }
    let mut roots = Vec::new();
    for i in 0..n - 1 {
        let (a, b) = (vals[i], vals[i + 1]);
        if a == 0.0 {
            roots.push(grid[i]);
        } else if a * b < 0.0 {
            roots.push(bisect(g, grid[i], grid[i + 1], 1e-10));
        } else if i > 0 && vals[i].abs() < vals[i - 1].abs() && vals[i].abs() < b.abs() && vals[i].abs() < 1e-6 * gmax {
            scan.unresolved.push((grid[i - 1], grid[i + 1]));
        }
    }
    if vals[n - 1] == 0.0 {
        roots.push(grid[n - 1]);
    }
    for t in roots {
        let c = dalpha(pair, &df, t).unwrap_or(0.0);
        let kind = if c < -1e-12 * gmax {
            CriticalKind::AlphaMax
        } else if c > 1e-12 * gmax {
            CriticalKind::AlphaMin
        } else {
            CriticalKind::Saddle
        };
        scan.points.push(CriticalPoint { t, kind });
    }
    scan
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gains::{make_pair, Alpha, Family};
    use std::f64::consts::PI;

    fn trig(a: f64) -> KappaPair {
        make_pair(Family::Trig, Alpha::new(a).unwrap(), None).unwrap()
    }

    #[test]
    fn dalpha_of_sin_shifts_phase() {
        let p = trig(0.3);
        for &t in &[-1.0, 0.2, 2.5] {
            let want = (t + 0.3 * PI / 2.0).sin();
            assert!((dalpha(&p, &ScalarField::sin(), t).unwrap() - want).abs() < 1e-14);
            assert!((dalpha(&p, &ScalarField::sin().without_deriv(), t).unwrap() - want).abs() < 1e-9);
            let want2 = (t + 0.3 * PI).sin();
            assert!((dalpha2(&p, &ScalarField::sin(), t).unwrap() - want2).abs() < 1e-13);
        }
    }

    #[test]
    fn power_example() {
        let p = make_pair(Family::Power, Alpha::new(0.5).unwrap(), Some(1.0)).unwrap();
        let f = ScalarField::polynomial(&[0.0, 0.0, 1.0]);
        assert!((dalpha(&p, &f, 2.0).unwrap() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn classical_second_derivative() {
        let p = trig(1.0);
        let f = ScalarField::polynomial(&[0.0, 0.0, 0.0, 1.0]);
        assert!((dalpha2(&p, &f, 2.0).unwrap() - 12.0).abs() < 1e-12);
        assert!((dalpha2(&p, &f.without_deriv(), 2.0).unwrap() - 12.0).abs() < 1e-6);
    }

    #[test]
    fn e0_is_annihilated() {
        let p = trig(0.6);
        let q = QuadratureConfig::default();
        let f = e0_field(&p, 0.4, &q);
        assert!(dalpha(&p, &f, 1.3).unwrap().abs() < 1e-14);
        assert!(dalpha2(&p, &f.without_deriv(), 1.3).unwrap().abs() < 1e-8);
    }

    #[test]
    fn exp_examples() {
        let p = trig(0.5);
        let q = QuadratureConfig::default();
        let args = ExpArgs::new(ScalarField::zero(), &p);
        assert!((exp_p(&args, 1.0, 0.0, &q).unwrap() - (-1f64).exp()).abs() < 1e-12);
        assert_eq!(exp_p(&args, 0.7, 0.7, &q).unwrap(), 1.0);
        let k1 = ExpArgs::new(p.kappa1().clone(), &p);
        assert!((exp_p(&k1, 2.0, -1.0, &q).unwrap() - 1.0).abs() < 1e-13);
        assert!((h1(&p, 1.0, 0.0, &q).unwrap() - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn closed_forms_match_quadrature() {
        let q = QuadratureConfig::tight();
        let p = make_pair(Family::TimePower, Alpha::new(0.35).unwrap(), Some(1.7)).unwrap();
        let args = ExpArgs::new(ScalarField::zero(), &p);
        let quad_e0 = log_exp_p(&args, 2.5, 0.4, &q).unwrap();
        assert!((quad_e0 - log_e0(&p, 2.5, 0.4, &q).unwrap()).abs() < 1e-12);
        let qh = integrate(|x| 1.0 / p.k0(x), 0.4, 2.5, &q).unwrap();
        assert!((qh - h1(&p, 2.5, 0.4, &q).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn classical_integral() {
        let p = trig(1.0);
        let v = alpha_integral(&p, &ScalarField::identity(), 0.0, 1.0, Weight::None, &QuadratureConfig::default()).unwrap();
        assert!((v - 0.5).abs() < 1e-14);
    }

    #[test]
    fn special_values() {
        let p = trig(0.7);
        let q = QuadratureConfig::default();
        assert!((special(&p, SpecialKind::CosA, 2.0, 0.3, 0.3, &q).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(special(&p, SpecialKind::SinA, 2.0, 0.3, 0.3, &q).unwrap(), 0.0);
        let c = special(&trig(1.0), SpecialKind::CosA, 2.0, 0.9, 0.0, &q).unwrap();
        assert!((c - 1.8f64.cos()).abs() < 1e-14);
        let s = special_field(&p, SpecialKind::SinA, 2.0, 0.0, &q);
        let c = special_field(&p, SpecialKind::CosA, 2.0, 0.0, &q);
        let d = dalpha(&p, &s.without_deriv(), 0.8).unwrap();
        assert!((d - 2.0 * c.eval(0.8)).abs() < 1e-8);
    }

    #[test]
    fn secant_hits_endpoints() {
        let p = trig(0.4);
        let q = QuadratureConfig::default();
        let f = ScalarField::exp();
        let s = geodesic(&p, &f, 0.2, Some(1.4), GeodesicKind::Secant, &q).unwrap();
        assert!((s.eval(0.2) - f.eval(0.2)).abs() < 1e-13);
        assert!((s.eval(1.4) - f.eval(1.4)).abs() < 1e-12);
        assert!(geodesic(&p, &f, 0.2, None, GeodesicKind::Secant, &q).is_err());
        let e = e0_field(&p, 0.2, &q);
        let l = geodesic(&p, &e, 0.2, None, GeodesicKind::Tangent, &q).unwrap();
        assert!((l.eval(1.1) - e.eval(1.1)).abs() < 1e-14);
    }

    #[test]
    fn critical_points_of_sin() {
        let a = 0.4;
        let scan = find_alpha_critical(&trig(a), &ScalarField::sin(), (0.0, 2.0 * PI), 400);
        assert_eq!(scan.points.len(), 2);
        assert!((scan.points[0].t - (PI - a * PI / 2.0)).abs() < 1e-9);
        assert_eq!(scan.points[0].kind, CriticalKind::AlphaMax);
        assert_eq!(scan.points[1].kind, CriticalKind::AlphaMin);
        let e = e0_field(&trig(a), 0.0, &QuadratureConfig::default());
        let scan = find_alpha_critical(&trig(a), &e, (0.0, 3.0), 50);
        assert!(scan.degenerate && scan.points.is_empty());
    }
}
