//! Disconjugacy and oscillation: the quadratic functional, Picone identities,
//! zero finding, the six-way roundabout audit, Sturm comparison, the Lyapunov
//! inequality and finite-horizon oscillation scans.

use crate::confcalc::{bisect, dalpha_field, e0, e0_field, h1, log_e0};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::gains::KappaPair;
use crate::quad::{integrate, integrate_with_breaks, QuadratureConfig};
use crate::solver::{solve_ivp, IVPSpec, SelfAdjointProblem};
use crate::structure::riccati_residual;
use crate::structure::RiccatiProblem;
use crate::trajectory::Trajectory;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::sync::Arc;

/// Relative margin separating a numerical zero from a true one.
pub const ZERO_MARGIN: f64 = 1e-7;
/// Number of initial angles scanned when looking for a nonvanishing solution.
pub const FAN_ANGLES: usize = 64;

/// η vanishing at both ends of [a, b], with known kinks.
#[derive(Debug, Clone)]
pub struct AdmissibleField {
    pub eta: ScalarField,
    pub a: f64,
    pub b: f64,
    pub breaks: Vec<f64>,
}

impl AdmissibleField {
    pub fn new(eta: ScalarField, a: f64, b: f64, breaks: Vec<f64>) -> Result<Self> {
        if !(a < b) {
            return Err(Error::InvalidArgument(format!("empty interval [{a}, {b}]")));
        }
        if eta.eval(a).abs() > 1e-12 || eta.eval(b).abs() > 1e-12 {
            return Err(Error::InvalidArgument("eta must vanish at both endpoints".into()));
        }
        let nonzero = (1..200).any(|i| eta.eval(a + (b - a) * i as f64 / 200.0) != 0.0);
        if !nonzero {
            return Err(Error::InvalidArgument("eta vanishes identically".into()));
        }
        let mut breaks: Vec<f64> = breaks.into_iter().filter(|&t| t > a && t < b).collect();
        breaks.sort_by(f64::total_cmp);
        Ok(AdmissibleField { eta, a, b, breaks })
    }

    /// η ≡ 0, bypassing the nonzero check.
    pub fn zero(a: f64, b: f64) -> Self {
        AdmissibleField { eta: ScalarField::zero(), a, b, breaks: vec![] }
    }

    /// u on (c, d), zero elsewhere.
    pub fn cutoff(u: &Trajectory, c: f64, d: f64, a: f64, b: f64) -> Result<Self> {
        if !(a <= c && c < d && d <= b) {
            return Err(Error::InvalidArgument(format!("need a ≤ c < d ≤ b, got {a}, {c}, {d}, {b}")));
        }
        u.check(c)?;
        u.check(d)?;
        let (u1, u2) = (Arc::new(u.clone()), Arc::new(u.clone()));
        let slope = ScalarField::new("cutoff'", move |t| if t > c && t < d { u2.slope_x(t) } else { 0.0 });
        let eta = ScalarField::new("cutoff", move |t| if t > c && t < d { u1.eval_x(t) } else { 0.0 }).with_deriv(slope);
        Ok(AdmissibleField { eta, a, b, breaks: vec![c, d].into_iter().filter(|&t| t > a && t < b).collect() })
    }

    fn points(&self) -> Vec<f64> {
        let mut pts = vec![self.a];
        pts.extend(&self.breaks);
        pts.push(self.b);
        pts
    }
}

/// Bump profiles on [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    Sine,
    Tent,
    SineSquared,
    Parabola,
}

impl Profile {
    fn value(self, u: f64) -> f64 {
        match self {
            Profile::Sine => (PI * u).sin(),
            Profile::Tent => 1.0 - (2.0 * u - 1.0).abs(),
            Profile::SineSquared => (PI * u).sin().powi(2),
            Profile::Parabola => 4.0 * u * (1.0 - u),
        }
    }
    fn slope(self, u: f64) -> f64 {
        match self {
            Profile::Sine => PI * (PI * u).cos(),
            Profile::Tent => {
                if u < 0.5 {
                    2.0
                } else {
                    -2.0
                }
            }
            Profile::SineSquared => PI * (2.0 * PI * u).sin(),
            Profile::Parabola => 4.0 - 8.0 * u,
        }
    }
}

/// First t in [lo, hi] with h₁(t, a) = target.
fn invert_h1(pair: &KappaPair, a: f64, target: f64, lo: f64, hi: f64, quad: &QuadratureConfig) -> f64 {
    if target <= 0.0 {
        return lo;
    }
    bisect(|t| h1(pair, t, a, quad).unwrap_or(f64::NAN) - target, lo, hi, 1e-13 * (1.0 + hi.abs()))
}

/// η = e₀(t,b) φ((h₁(t,a) − s_L)/(s_R − s_L)) on the h₁-support [s_L, s_R] = H·support, zero outside.
/// With this choice D^α η = e₀(t,b) φ′(·)/(s_R − s_L).
pub fn bump(
    pair: &KappaPair,
    a: f64,
    b: f64,
    profile: Profile,
    support: (f64, f64),
    quad: &QuadratureConfig,
) -> Result<AdmissibleField> {
    let (f0, f1) = support;
    if !(0.0 <= f0 && f0 < f1 && f1 <= 1.0) {
        return Err(Error::InvalidArgument(format!("support fractions must satisfy 0 ≤ {f0} < {f1} ≤ 1")));
    }
    let hh = h1(pair, b, a, quad)?;
    let (sl, sr) = (f0 * hh, f1 * hh);
    let w = sr - sl;
    let (p1, q1) = (pair.clone(), *quad);
    let value = move |t: f64| {
        let s = h1(&p1, t, a, &q1).unwrap_or(f64::NAN);
        if s <= sl || s >= sr {
            return 0.0;
        }
        e0(&p1, t, b, &q1).unwrap_or(f64::NAN) * profile.value((s - sl) / w)
    };
    let (p2, q2) = (pair.clone(), *quad);
    let value2 = value.clone();
    // η′ = (D^α η − κ₁ η)/κ₀
    let deriv = ScalarField::new("bump'", move |t| {
        let s = h1(&p2, t, a, &q2).unwrap_or(f64::NAN);
        if s <= sl || s >= sr {
            return 0.0;
        }
        let da = e0(&p2, t, b, &q2).unwrap_or(f64::NAN) * profile.slope((s - sl) / w) / w;
        (da - p2.k1(t) * value2(t)) / p2.k0(t)
    });
    let eta = ScalarField::new(format!("bump{profile:?}"), value).with_deriv(deriv);
    let mut breaks = vec![invert_h1(pair, a, sl, a, b, quad), invert_h1(pair, a, sr, a, b, quad)];
    if profile == Profile::Tent {
        breaks.push(invert_h1(pair, a, 0.5 * (sl + sr), a, b, quad));
    }
    AdmissibleField::new(eta, a, b, breaks)
}

/// The fixed eight-member test family.
pub fn bump_family(pair: &KappaPair, a: f64, b: f64, quad: &QuadratureConfig) -> Result<Vec<AdmissibleField>> {
    let members = [
        (Profile::Sine, (0.0, 1.0)),
        (Profile::Tent, (0.0, 1.0)),
        (Profile::SineSquared, (0.0, 1.0)),
        (Profile::Parabola, (0.0, 1.0)),
        (Profile::Sine, (0.0, 0.5)),
        (Profile::Sine, (0.5, 1.0)),
        (Profile::Tent, (0.25, 0.75)),
        (Profile::SineSquared, (0.1, 0.6)),
    ];
    members.iter().map(|&(pf, sup)| bump(pair, a, b, pf, sup, quad)).collect()
}

/// ℱ(η) = ∫ₐᵇ [p (D^α η)² − q η²] e₀²(b,t) d_αt.
pub fn quadratic_functional(prob: &SelfAdjointProblem, adm: &AdmissibleField, quad: &QuadratureConfig) -> Result<f64> {
    let pair = &prob.pair;
    let b = adm.b;
    let f = |t: f64| {
        let eta = adm.eta.eval(t);
        let da = pair.k1(t) * eta + pair.k0(t) * adm.eta.deriv_at(t);
        let w = (2.0 * log_e0(pair, b, t, quad).unwrap_or(f64::NAN)).exp();
        (prob.p.eval(t) * da * da - prob.q.eval(t) * eta * eta) * w / pair.k0(t)
    };
    integrate_with_breaks(f, &adm.points(), quad)
}

/// [p u D^α u](d)/e₀²(d,b) − [p u D^α u](c)/e₀²(c,b).
pub fn cutoff_boundary_terms(prob: &SelfAdjointProblem, u: &Trajectory, c: f64, d: f64, b: f64, quad: &QuadratureConfig) -> Result<f64> {
    let term = |t: f64| -> Result<f64> {
        Ok(prob.p.eval(t) * u.eval_x(t) * u.eval_dax(t) / (2.0 * log_e0(&prob.pair, t, b, quad)?).exp())
    };
    Ok(term(d)? - term(c)?)
}

/// D^α[zη²] + κ₁zη² − {p(D^αη)² − qη² − p(D^αη − zη/p)²}.
pub fn picone1_residual(prob: &SelfAdjointProblem, z: &ScalarField, adm: &AdmissibleField) -> ScalarField {
    let pair = &prob.pair;
    let eta = &adm.eta;
    let ze2 = &(z * eta) * eta;
    let lhs = &dalpha_field(pair, &ze2) + &(pair.kappa1() * &ze2);
    let da = dalpha_field(pair, eta);
    let sq = &da - &(&(z * eta) / &prob.p);
    let rhs = &(&(&prob.p * &(&da * &da)) - &(&prob.q * &(eta * eta))) - &(&prob.p * &(&sq * &sq));
    (&lhs - &rhs).relabel("picone1")
}

/// Two self-adjoint problems on a common interval and pair.
#[derive(Debug, Clone)]
pub struct ComparisonPair {
    pub prob1: SelfAdjointProblem,
    pub prob2: SelfAdjointProblem,
}

impl ComparisonPair {
    pub fn new(prob1: SelfAdjointProblem, prob2: SelfAdjointProblem) -> Result<Self> {
        let (p, q) = (&prob1.pair, &prob2.pair);
        if prob1.interval != prob2.interval
            || p.family() != q.family()
            || p.alpha() != q.alpha()
            || p.omega() != q.omega()
        {
            return Err(Error::InvalidArgument("comparison problems must share the pair and interval".into()));
        }
        Ok(ComparisonPair { prob1, prob2 })
    }
}

/// With F = (u/v)(p₁vD^αu − p₂uD^αv):
/// D^αF + κ₁F − {(q₂−q₁)u² + (p₁−p₂)(D^αu)² + p₂(D^αu − uD^αv/v)²}.
pub fn picone2_residual(cmp: &ComparisonPair, u: &Trajectory, v: &Trajectory) -> Result<ScalarField> {
    crate::structure::check_nonvanishing(v, "v")?;
    let (p1, q1) = (&cmp.prob1.p, &cmp.prob1.q);
    let (p2, q2) = (&cmp.prob2.p, &cmp.prob2.q);
    let pair = &cmp.prob1.pair;
    let (uf, duf, vf, dvf) = (u.x_field(), u.dax_field(), v.x_field(), v.dax_field());
    // p₁uD^αu − p₂u²D^αv/v
    let f = &(&(p1 * &uf) * &duf) - &(&(&(p2 * &uf) * &uf) * &(&dvf / &vf));
    let lhs = &dalpha_field(pair, &f) + &(pair.kappa1() * &f);
    let sq = &duf - &(&(&uf * &dvf) / &vf);
    let rhs = &(&(&(q2 - q1) * &(&uf * &uf)) + &(&(p1 - p2) * &(&duf * &duf))) + &(p2 * &(&sq * &sq));
    Ok((&lhs - &rhs).relabel("picone2"))
}

/// Sign-change zeros of the interpolant, bisection-refined to 10⁻¹⁰, plus exact node zeros.
pub fn find_zeros(traj: &Trajectory) -> Vec<f64> {
    let g = traj.grid();
    let x = traj.x();
    let mut zeros = Vec::new();
    for i in 0..g.len() {
        if x[i] == 0.0 {
            zeros.push(g[i]);
            continue;
        }
        if i + 1 < g.len() && x[i + 1] != 0.0 && (x[i] < 0.0) != (x[i + 1] < 0.0) {
            zeros.push(bisect(|t| traj.eval_x(t), g[i], g[i + 1], 1e-11));
        }
    }
    zeros
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReidCriterion {
    /// u(a) = 0, D^α u(a) = 1/p(a), u ≠ 0 on (a, b]
    ReidV,
    /// v(b) = 0, D^α v(b) = 1/p(b), v ≠ 0 on [a, b)
    ReidVI,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DisconjugacyVerdict {
    pub disconjugate: bool,
    pub zeros: Vec<f64>,
    /// min |u| away from the anchored endpoint, relative to max |u|
    pub margin: f64,
}

fn nonzero_away_from(tr: &Trajectory, anchor_index: usize) -> (bool, Vec<f64>, f64) {
    let mx = tr.max_abs_x();
    let x = tr.x();
    let zeros: Vec<f64> = find_zeros(tr).into_iter().filter(|&z| z != tr.grid()[anchor_index]).collect();
    let mn = x
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != anchor_index)
        .fold(f64::INFINITY, |m, (_, v)| m.min(v.abs()));
    let rel = if mx > 0.0 { mn / mx } else { 0.0 };
    (zeros.is_empty() && rel > ZERO_MARGIN, zeros, rel)
}

pub fn disconjugate(prob: &SelfAdjointProblem, a: f64, b: f64, criterion: ReidCriterion, step: f64) -> Result<DisconjugacyVerdict> {
    let hom = prob.homogeneous().on_interval((a, b))?;
    let (t0, idx) = match criterion {
        ReidCriterion::ReidV => (a, 0),
        ReidCriterion::ReidVI => (b, usize::MAX),
    };
    let u = solve_ivp(&hom, &IVPSpec { t0, x0: 0.0, x1: 1.0 / hom.p.eval(t0) }, step)?;
    let idx = if idx == usize::MAX { u.len() - 1 } else { idx };
    let (ok, zeros, margin) = nonzero_away_from(&u, idx);
    Ok(DisconjugacyVerdict { disconjugate: ok, zeros, margin })
}

/// x(a) = cos θ, p(a) D^α x(a) = sin θ.
fn fan(prob: &SelfAdjointProblem, a: f64, step: f64) -> Result<Vec<Trajectory>> {
    let pa = prob.p.eval(a);
    (0..FAN_ANGLES)
        .into_par_iter()
        .map(|k| {
            let th = PI * k as f64 / FAN_ANGLES as f64;
            solve_ivp(prob, &IVPSpec { t0: a, x0: th.cos(), x1: th.sin() / pa }, step)
        })
        .collect()
}

fn nonvanishing(tr: &Trajectory) -> bool {
    let mx = tr.max_abs_x();
    let s = tr.x()[0].signum();
    tr.x().iter().all(|&v| v.signum() == s && v.abs() > ZERO_MARGIN * mx) && find_zeros(tr).is_empty()
}

/// Zeros in [a, b], counting a near-zero start as a zero at a.
fn zero_count(tr: &Trajectory) -> usize {
    let mx = tr.max_abs_x();
    let x = tr.x();
    let mut n = find_zeros(tr).len();
    if x[0] != 0.0 && x[0].abs() <= ZERO_MARGIN * mx {
        n += 1;
    }
    if x[x.len() - 1] != 0.0 && x[x.len() - 1].abs() <= ZERO_MARGIN * mx {
        n += 1;
    }
    n
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundaboutReport {
    /// (i)–(vi) in order
    pub criteria: [bool; 6],
    pub agree: bool,
    /// fan angle giving the nonvanishing solution used for (i), (ii)
    pub witness_angle: Option<f64>,
    pub riccati_sup: Option<f64>,
    pub functional_values: Vec<f64>,
    pub max_fan_zeros: usize,
    pub note: String,
}

pub fn roundabout_audit(prob: &SelfAdjointProblem, a: f64, b: f64, step: f64, quad: &QuadratureConfig) -> Result<RoundaboutReport> {
    if !prob.is_homogeneous() {
        return Err(Error::InvalidArgument("roundabout audit needs h ≡ 0".into()));
    }
    let hom = prob.on_interval((a, b))?;
    let fan = fan(&hom, a, step)?;
    let witness = fan.iter().position(nonvanishing);
    let c1 = witness.is_some();
    let (c2, riccati_sup) = match witness {
        Some(k) => {
            let x = &fan[k];
            let z = crate::structure::riccati_from_solution(&hom, x)?;
            let r = riccati_residual(&RiccatiProblem::from_problem(&hom), &z);
            let n = 400;
            let sup = (0..=n).map(|i| r.eval(a + (b - a) * i as f64 / n as f64).abs()).fold(0.0, f64::max);
            let zmax = (0..=n).map(|i| z.eval(a + (b - a) * i as f64 / n as f64).abs()).fold(0.0, f64::max);
            (sup.is_finite() && sup <= 1e-4 * (1.0 + zmax * zmax), Some(sup))
        }
        None => (false, None),
    };
    let family = bump_family(&hom.pair, a, b, quad)?;
    let functional_values: Vec<f64> =
        family.par_iter().map(|adm| quadratic_functional(&hom, adm, quad)).collect::<Result<_>>()?;
    let c3 = functional_values.iter().all(|&v| v > 0.0);
    let max_fan_zeros = fan.iter().map(zero_count).max().unwrap_or(0);
    let c4 = max_fan_zeros < 2;
    let c5 = disconjugate(&hom, a, b, ReidCriterion::ReidV, step)?.disconjugate;
    let c6 = disconjugate(&hom, a, b, ReidCriterion::ReidVI, step)?.disconjugate;
    let criteria = [c1, c2, c3, c4, c5, c6];
    let agree = criteria.iter().all(|&c| c == c1);
    Ok(RoundaboutReport {
        criteria,
        agree,
        witness_angle: witness.map(|k| PI * k as f64 / FAN_ANGLES as f64),
        riccati_sup,
        functional_values,
        max_fan_zeros,
        note: format!("(i) sampled over {FAN_ANGLES} initial angles; (iii) over an 8-member bump family"),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SturmReport {
    pub hypothesis_holds: bool,
    pub strict_somewhere: bool,
    pub independent: bool,
    pub v_zeros_inside: Vec<f64>,
    /// conclusion of the comparison theorem: v vanishes in (a, b)
    pub v_vanishes: bool,
    pub note: String,
}

/// Compare on [a, b], where a and b are consecutive zeros of u.
pub fn sturm_compare(cmp: &ComparisonPair, u: &Trajectory, v: &Trajectory, a: f64, b: f64) -> Result<SturmReport> {
    let mx = u.max_abs_x();
    if u.eval_x(a).abs() > 1e-6 * mx || u.eval_x(b).abs() > 1e-6 * mx {
        return Err(Error::InvalidArgument("a and b must be zeros of u".into()));
    }
    let n = 512;
    let (mut holds, mut strict) = (true, false);
    for i in 0..=n {
        let t = a + (b - a) * i as f64 / n as f64;
        let dq = cmp.prob2.q.eval(t) - cmp.prob1.q.eval(t);
        let dp = cmp.prob1.p.eval(t) - cmp.prob2.p.eval(t);
        if dq < -1e-12 || dp < -1e-12 {
            holds = false;
        }
        if dq > 1e-12 || dp > 1e-12 {
            strict = true;
        }
    }
    // dependence: v proportional to u on the grid
    let k = (0..=n)
        .map(|i| a + (b - a) * i as f64 / n as f64)
        .max_by(|&s, &t| u.eval_x(s).abs().total_cmp(&u.eval_x(t).abs()))
        .unwrap();
    let ratio = v.eval_x(k) / u.eval_x(k);
    let vmax = (0..=n).map(|i| v.eval_x(a + (b - a) * i as f64 / n as f64).abs()).fold(0.0, f64::max);
    let independent = (0..=n).any(|i| {
        let t = a + (b - a) * i as f64 / n as f64;
        (v.eval_x(t) - ratio * u.eval_x(t)).abs() > 1e-6 * vmax.max(1e-300)
    });
    let tol = 1e-9 * (b - a);
    let v_zeros_inside: Vec<f64> = find_zeros(v).into_iter().filter(|&z| z > a + tol && z < b - tol).collect();
    let note = if !holds {
        "coefficient ordering violated".into()
    } else if !strict && !independent {
        "no strict inequality and solutions dependent".into()
    } else {
        String::new()
    };
    Ok(SturmReport { hypothesis_holds: holds, strict_somewhere: strict, independent, v_vanishes: !v_zeros_inside.is_empty(), v_zeros_inside, note })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovReport {
    /// ∫ₐᵇ q(t) e₀(b,t) d_αt
    pub lhs: f64,
    /// 4 e₀(b,a)/h₁(b,a)
    pub rhs: f64,
    pub necessary_holds: bool,
    pub sufficient_disconjugacy: bool,
}

pub const LYAPUNOV_TOL: f64 = 1e-6;

pub fn lyapunov_check(prob: &SelfAdjointProblem, a: f64, b: f64, quad: &QuadratureConfig) -> Result<LyapunovReport> {
    let n = 256;
    for i in 0..=n {
        let t = a + (b - a) * i as f64 / n as f64;
        if prob.p.eval(t) != 1.0 {
            return Err(Error::InvalidArgument("Lyapunov check needs p ≡ 1".into()));
        }
        if !(prob.q.eval(t) > 0.0) {
            return Err(Error::CoefficientSign { name: "q".into(), t });
        }
    }
    let pair = &prob.pair;
    let lhs = integrate(|t| prob.q.eval(t) * e0(pair, b, t, quad).unwrap_or(f64::NAN) / pair.k0(t), a, b, quad)?;
    let rhs = 4.0 * e0(pair, b, a, quad)? / h1(pair, b, a, quad)?;
    Ok(LyapunovReport { lhs, rhs, necessary_holds: lhs >= rhs - LYAPUNOV_TOL, sufficient_disconjugacy: lhs < rhs })
}

/// One point of the sharpness construction on [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SharpnessPoint {
    pub delta: f64,
    pub c: f64,
    /// ∫₀¹ q e₀(1,t) d_αt
    pub lhs: f64,
    /// 4 e₀(1,0)/h₁(1,0)
    pub rhs: f64,
    /// 4 e₀(1,0)/(h₁(1,0) − 2h₁(c,c−δ))
    pub bound: f64,
    pub ratio: f64,
}

/// In s = h₁(t,0): φ(s) = s up to s₁ = H/2 − Δ, H − s beyond s₁ + 2Δ, and a concave C² cap between,
/// with Δ = h₁(c, c−δ). Then x = e₀(t,0)φ(s) has D^αD^αx = e₀(t,0)φ″(s) and q = −(D^αD^αx/x)e₀(t,0).
pub fn lyapunov_sharpness(pair: &KappaPair, delta: f64, quad: &QuadratureConfig) -> Result<SharpnessPoint> {
    let hh = h1(pair, 1.0, 0.0, quad)?;
    let c = invert_h1(pair, 0.0, 0.5 * hh, 0.0, 1.0, quad);
    if !(c - delta > 0.0 && c + delta < 1.0) {
        return Err(Error::InvalidArgument(format!("delta = {delta} does not fit around c = {c}")));
    }
    let dd = h1(pair, c, c - delta, quad)?;
    let s1 = 0.5 * hh - dd;
    if !(s1 > 0.0) {
        return Err(Error::InvalidArgument(format!("delta = {delta} too large")));
    }
    let phi = |s: f64| {
        let u = s - s1;
        s1 + u - (u * u / 2.0 + (dd / PI).powi(2) * ((PI * u / dd).cos() - 1.0)) / dd
    };
    let phi2 = |s: f64| -(1.0 - (PI * (s - s1) / dd).cos()) / dd;
    let tl = invert_h1(pair, 0.0, s1, 0.0, 1.0, quad);
    let tr = invert_h1(pair, 0.0, s1 + 2.0 * dd, 0.0, 1.0, quad);
    let q = |t: f64| {
        let s = h1(pair, t, 0.0, quad).unwrap_or(f64::NAN);
        -phi2(s) / phi(s) * e0(pair, t, 0.0, quad).unwrap_or(f64::NAN)
    };
    let lhs = integrate(|t| q(t) * e0(pair, 1.0, t, quad).unwrap_or(f64::NAN) / pair.k0(t), tl, tr, quad)?;
    let e10 = e0(pair, 1.0, 0.0, quad)?;
    let rhs = 4.0 * e10 / hh;
    let bound = 4.0 * e10 / (hh - 2.0 * dd);
    Ok(SharpnessPoint { delta, c, lhs, rhs, bound, ratio: lhs / rhs })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlwReport {
    pub ladder: Vec<f64>,
    /// ∫ₐᵀ e₀(t,a)/p d_αt
    pub integral_p: Vec<f64>,
    /// ∫ₐᵀ q d_αt
    pub integral_q: Vec<f64>,
    pub slope_p: f64,
    pub slope_q: f64,
    pub oscillation_predicted: bool,
    /// zeros of the solution x(a) = 1, D^α x(a) = 0 on the largest horizon
    pub zero_count: usize,
    pub heuristic: bool,
}

pub const FLW_SLOPE: f64 = 0.5;

fn loglog_slope(ladder: &[f64], a: f64, v: &[f64]) -> f64 {
    let n = v.len();
    let (v0, v1) = (v[n - 2], v[n - 1]);
    if !(v0 > 0.0 && v1 > 0.0) {
        return 0.0;
    }
    (v1 / v0).ln() / ((ladder[n - 1] - a) / (ladder[n - 2] - a)).ln()
}

pub fn flw_scan(prob: &SelfAdjointProblem, a: f64, ladder: &[f64], step: f64, quad: &QuadratureConfig) -> Result<FlwReport> {
    if ladder.len() < 2 || ladder.windows(2).any(|w| w[1] <= w[0]) || ladder[0] <= a {
        return Err(Error::InvalidArgument("ladder must be increasing and beyond a".into()));
    }
    let top = ladder[ladder.len() - 1];
    let pair = &prob.pair;
    let e = e0_field(pair, a, quad);
    let mut pts = vec![a];
    pts.extend_from_slice(ladder);
    let seg = |f: &dyn Fn(f64) -> f64| -> Result<Vec<f64>> {
        let mut acc = 0.0;
        let mut out = Vec::new();
        for w in pts.windows(2) {
            acc += integrate(f, w[0], w[1], quad)?;
            out.push(acc);
        }
        Ok(out)
    };
    let integral_p = seg(&|t| e.eval(t) / (prob.p.eval(t) * pair.k0(t)))?;
    let integral_q = seg(&|t| prob.q.eval(t) / pair.k0(t))?;
    let slope_p = loglog_slope(ladder, a, &integral_p);
    let slope_q = loglog_slope(ladder, a, &integral_q);
    let hom = prob.homogeneous().on_interval((a, top))?;
    let x = solve_ivp(&hom, &IVPSpec { t0: a, x0: 1.0, x1: 0.0 }, step)?;
    Ok(FlwReport {
        ladder: ladder.to_vec(),
        integral_p,
        integral_q,
        slope_p,
        slope_q,
        oscillation_predicted: slope_p > FLW_SLOPE && slope_q > FLW_SLOPE,
        zero_count: find_zeros(&x).len(),
        heuristic: true,
    })
}
