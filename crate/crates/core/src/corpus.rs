//! Fixed problem sets used by audits, tests and the acceptance run.

use crate::confcalc::h1;
use crate::error::Result;
use crate::field::ScalarField;
use crate::gains::{make_pair, Alpha, Family, KappaPair};
use crate::quad::QuadratureConfig;
use crate::solver::{GeneralProblem, SelfAdjointProblem};
use std::f64::consts::PI;

pub fn pair(family: Family, alpha: f64, omega: f64) -> KappaPair {
    let om = if family == Family::Trig { None } else { Some(omega) };
    make_pair(family, Alpha::new(alpha).expect("corpus alpha"), om).expect("corpus pair")
}

fn sa(pr: &KappaPair, p: ScalarField, q: ScalarField, iv: (f64, f64)) -> Result<SelfAdjointProblem> {
    SelfAdjointProblem::new(pr, p, q, ScalarField::zero(), iv)
}

fn c(v: f64) -> ScalarField {
    ScalarField::constant(v)
}

/// Twelve homogeneous self-adjoint problems.
pub fn abel_corpus() -> Result<Vec<(String, SelfAdjointProblem)>> {
    let lin = |a: f64, b: f64| ScalarField::polynomial(&[a, b]);
    let items = vec![
        ("trig-0.3-harmonic", sa(&pair(Family::Trig, 0.3, 1.0), c(1.0), c(1.0), (0.0, 3.0))?),
        ("trig-0.5-variable-p", sa(&pair(Family::Trig, 0.5, 1.0), lin(1.0, 0.5), c(2.0), (0.0, 3.0))?),
        ("trig-0.8-cos-q", sa(&pair(Family::Trig, 0.8, 1.0), c(1.0), ScalarField::cos(), (0.0, 4.0))?),
        ("trig-1.0-airy", sa(&pair(Family::Trig, 1.0, 1.0), c(1.0), lin(0.0, 1.0), (0.0, 3.0))?),
        ("power-0.3-negative-q", sa(&pair(Family::Power, 0.3, 1.0), c(1.0), c(-1.0), (0.0, 2.0))?),
        ("power-0.5-omega2", sa(&pair(Family::Power, 0.5, 2.0), lin(2.0, -0.3), c(3.0), (0.0, 3.0))?),
        ("power-0.8-sin-q", sa(&pair(Family::Power, 0.8, 1.0), c(1.0), &ScalarField::sin() + &c(1.0), (0.0, 4.0))?),
        ("power-1.0-exp-p", sa(&pair(Family::Power, 1.0, 1.0), ScalarField::exp(), c(1.0), (0.0, 2.0))?),
        ("time-0.3", sa(&pair(Family::TimePower, 0.3, 1.0), c(1.0), c(1.0), (0.5, 3.0))?),
        ("time-0.5-variable-p", sa(&pair(Family::TimePower, 0.5, 1.0), lin(1.0, 0.2), c(2.0), (0.5, 3.0))?),
        ("time-0.8-poly-q", sa(&pair(Family::TimePower, 0.8, 1.5), c(1.0), ScalarField::polynomial(&[1.0, 0.0, 0.5]), (0.5, 2.5))?),
        ("time-1.0-q-zero", sa(&pair(Family::TimePower, 1.0, 1.0), lin(1.0, 1.0), c(0.0), (0.5, 3.0))?),
    ];
    Ok(items.into_iter().map(|(n, p)| (n.to_string(), p)).collect())
}

/// General equations a D^αD^α x + b D^α x + c x = 0 for the Liouville check.
pub fn general_corpus() -> Vec<(String, GeneralProblem)> {
    let mk = |name: &str, pr: KappaPair, a: ScalarField, b: ScalarField, cc: ScalarField, iv: (f64, f64)| {
        (name.to_string(), GeneralProblem { pair: pr, a, b, c: cc, g: ScalarField::zero(), interval: iv })
    };
    vec![
        mk("trig-0.5-damped", pair(Family::Trig, 0.5, 1.0), c(1.0), c(0.5), c(2.0), (0.0, 3.0)),
        mk("power-0.7-variable", pair(Family::Power, 0.7, 1.0), ScalarField::polynomial(&[1.0, 0.5]), ScalarField::sin(), c(1.0), (0.0, 3.0)),
        mk("time-0.5", pair(Family::TimePower, 0.5, 1.0), c(2.0), ScalarField::polynomial(&[0.0, 1.0]), c(-1.0), (0.5, 2.5)),
        mk("trig-1.0-classical", pair(Family::Trig, 1.0, 1.0), c(1.0), c(-0.3), ScalarField::cos(), (0.0, 4.0)),
    ]
}

/// One roundabout instance with its expected verdict.
#[derive(Debug, Clone)]
pub struct RoundaboutCase {
    pub name: String,
    pub prob: SelfAdjointProblem,
    pub a: f64,
    pub b: f64,
    pub disconjugate: bool,
}

/// Right endpoint with h₁(b, a) = target.
fn endpoint(pr: &KappaPair, a: f64, target: f64) -> f64 {
    let q = QuadratureConfig::tight();
    let (mut lo, mut hi) = (a, a + 1.0);
    while h1(pr, hi, a, &q).unwrap() < target {
        hi = a + 2.0 * (hi - a);
    }
    while hi - lo > 1e-14 * hi.abs().max(1.0) {
        let m = 0.5 * (lo + hi);
        if h1(pr, m, a, &q).unwrap() < target {
            lo = m;
        } else {
            hi = m;
        }
    }
    0.5 * (lo + hi)
}

/// Five disconjugate and five oscillating instances.
pub fn roundabout_corpus() -> Result<Vec<RoundaboutCase>> {
    let mut out = Vec::new();
    let mut push = |name: &str, pr: KappaPair, p: ScalarField, q: ScalarField, a: f64, b: f64, dc: bool| -> Result<()> {
        let prob = sa(&pr, p, q, (a, b))?;
        out.push(RoundaboutCase { name: name.into(), prob, a, b, disconjugate: dc });
        Ok(())
    };
    let tr5 = pair(Family::Trig, 0.5, 1.0);
    let pw8 = pair(Family::Power, 0.8, 1.0);
    let tp5 = pair(Family::TimePower, 0.5, 1.0);
    let cl = pair(Family::Trig, 1.0, 1.0);
    let tr7 = pair(Family::Trig, 0.7, 1.0);
    let wobble_p = &c(1.0) + &ScalarField::sin().scale(0.3);
    push("trig-0.5-short", tr5.clone(), c(1.0), c(1.0), 0.0, endpoint(&tr5, 0.0, 0.6 * PI), true)?;
    push("power-0.8-short", pw8.clone(), c(1.0), c(4.0), 0.0, endpoint(&pw8, 0.0, 0.4 * PI), true)?;
    push("time-0.5-short", tp5.clone(), c(1.0), c(1.0), 0.5, endpoint(&tp5, 0.5, 0.6 * PI), true)?;
    push("classical-short", cl.clone(), c(1.0), c(1.0), 0.0, PI - 0.3, true)?;
    push("trig-0.7-variable-short", tr7.clone(), wobble_p.clone(), &c(0.5) + &ScalarField::cos().scale(0.2), 0.0, 1.5, true)?;
    push("trig-0.5-long", tr5.clone(), c(1.0), c(1.0), 0.0, endpoint(&tr5, 0.0, 2.5 * PI), false)?;
    push("power-0.8-long", pw8.clone(), c(1.0), c(4.0), 0.0, endpoint(&pw8, 0.0, 1.7 * PI / 2.0), false)?;
    push("time-0.5-long", tp5, c(1.0), c(9.0), 0.5, 3.0, false)?;
    push("classical-long", cl, c(1.0), c(1.0), 0.0, 2.0 * PI + 0.5, false)?;
    push("trig-0.7-variable-long", tr7, wobble_p, &c(4.0) + &ScalarField::cos(), 0.0, 8.0, false)?;
    Ok(out)
}

/// p ≡ 1 problems paired with a left endpoint; the right endpoint is the first
/// conjugate point of a, found numerically.
pub fn lyapunov_corpus() -> Result<Vec<(String, SelfAdjointProblem, f64)>> {
    let items = vec![
        ("trig-0.3-q1", sa(&pair(Family::Trig, 0.3, 1.0), c(1.0), c(1.0), (0.0, 12.0))?, 0.0),
        ("trig-0.5-q4", sa(&pair(Family::Trig, 0.5, 1.0), c(1.0), c(4.0), (0.0, 6.0))?, 0.0),
        ("trig-0.8-qvar", sa(&pair(Family::Trig, 0.8, 1.0), c(1.0), &c(2.0) + &ScalarField::sin(), (0.0, 8.0))?, 0.0),
        ("power-0.5-q2", sa(&pair(Family::Power, 0.5, 1.0), c(1.0), c(2.0), (0.0, 8.0))?, 0.0),
        ("power-0.8-qpoly", sa(&pair(Family::Power, 0.8, 2.0), c(1.0), ScalarField::polynomial(&[1.0, 0.5]), (0.0, 8.0))?, 0.0),
        ("time-0.5-q3", sa(&pair(Family::TimePower, 0.5, 1.0), c(1.0), c(3.0), (0.5, 8.0))?, 0.5),
        ("classical-q1", sa(&pair(Family::Trig, 1.0, 1.0), c(1.0), c(1.0), (0.0, 8.0))?, 0.0),
        ("classical-q9", sa(&pair(Family::Power, 1.0, 1.0), c(1.0), c(9.0), (0.0, 4.0))?, 0.0),
    ];
    Ok(items.into_iter().map(|(n, p, a)| (n.to_string(), p, a)).collect())
}
