//! Second-order self-adjoint equations D^α[p D^α x] + q x = h.

use crate::confcalc::{dalpha_field, exp_field, inner_product, log_e0, ExpArgs};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::gains::KappaPair;
use crate::ode::{integrate_to, OdeOptions, State};
use crate::quad::QuadratureConfig;
use crate::trajectory::Trajectory;

/// Number of probe points used for coefficient checks.
pub const PROBE_POINTS: usize = 1024;

fn probe_grid(lo: f64, hi: f64) -> impl Iterator<Item = f64> {
    (0..PROBE_POINTS).map(move |i| lo + (hi - lo) * i as f64 / (PROBE_POINTS - 1) as f64)
}

/// L x = D^α[p D^α x] + q x = h on an interval.
#[derive(Debug, Clone)]
pub struct SelfAdjointProblem {
    pub pair: KappaPair,
    pub p: ScalarField,
    pub q: ScalarField,
    pub h: ScalarField,
    pub interval: (f64, f64),
}

impl SelfAdjointProblem {
    pub fn new(pair: &KappaPair, p: ScalarField, q: ScalarField, h: ScalarField, interval: (f64, f64)) -> Result<Self> {
        let (lo, hi) = interval;
        if !(lo < hi) {
            return Err(Error::InvalidArgument(format!("empty interval [{lo}, {hi}]")));
        }
        pair.check(lo)?;
        pair.check(hi)?;
        for t in probe_grid(lo, hi) {
            let pv = p.eval(t);
            if !pv.is_finite() {
                return Err(Error::NonFinite { what: "p".into(), t });
            }
            if pv <= 0.0 {
                return Err(Error::CoefficientSign { name: "p".into(), t });
            }
            if !q.eval(t).is_finite() {
                return Err(Error::NonFinite { what: "q".into(), t });
            }
            if !h.eval(t).is_finite() {
                return Err(Error::NonFinite { what: "h".into(), t });
            }
        }
        Ok(SelfAdjointProblem { pair: pair.clone(), p, q, h, interval })
    }

    /// Homogeneous problem with p ≡ 1 and constant q.
    pub fn constant(pair: &KappaPair, q: f64, interval: (f64, f64)) -> Result<Self> {
        SelfAdjointProblem::new(pair, ScalarField::constant(1.0), ScalarField::constant(q), ScalarField::zero(), interval)
    }

    /// Same problem with h ≡ 0.
    pub fn homogeneous(&self) -> Self {
        SelfAdjointProblem { h: ScalarField::zero(), ..self.clone() }
    }

    pub fn with_forcing(&self, h: ScalarField) -> Self {
        SelfAdjointProblem { h, ..self.clone() }
    }

    pub fn on_interval(&self, interval: (f64, f64)) -> Result<Self> {
        SelfAdjointProblem::new(&self.pair, self.p.clone(), self.q.clone(), self.h.clone(), interval)
    }

    /// True when h vanishes on the probe grid.
    pub fn is_homogeneous(&self) -> bool {
        let (lo, hi) = self.interval;
        probe_grid(lo, hi).all(|t| self.h.eval(t) == 0.0)
    }

    /// Right-hand side of the classical system in (x, y = p D^α x).
    pub fn rhs(&self, t: f64, z: &State) -> Result<State> {
        let (k0, k1) = (self.pair.k0(t), self.pair.k1(t));
        let p = self.p.eval(t);
        if !(p > 0.0) {
            return Err(Error::CoefficientSign { name: "p".into(), t });
        }
        Ok([(-k1 * z[0] + z[1] / p) / k0, (-k1 * z[1] - self.q.eval(t) * z[0] + self.h.eval(t)) / k0])
    }

    /// Classical slopes (x′, (D^α x)′) of a solution passing through (x, D^α x) at t.
    pub fn slopes(&self, t: f64, x: f64, dax: f64) -> (f64, f64) {
        let p = self.p.eval(t);
        let (k0, k1) = (self.pair.k0(t), self.pair.k1(t));
        let y = p * dax;
        let xp = (dax - k1 * x) / k0;
        let yp = (-k1 * y - self.q.eval(t) * x + self.h.eval(t)) / k0;
        (xp, (yp - self.p.deriv_at(t) * dax) / p)
    }

    /// Trajectory from samples of a solution, slopes taken from the equation.
    pub fn trajectory_from_solution(&self, grid: Vec<f64>, x: Vec<f64>, dax: Vec<f64>) -> Result<Trajectory> {
        let (dx, ddax): (Vec<f64>, Vec<f64>) =
            grid.iter().zip(x.iter().zip(&dax)).map(|(&t, (&xv, &dv))| self.slopes(t, xv, dv)).unzip();
        Trajectory::with_slopes(grid, x, dax, dx, ddax)
    }
}

/// a D^αD^α x + b D^α x + c x = g.
#[derive(Debug, Clone)]
pub struct GeneralProblem {
    pub pair: KappaPair,
    pub a: ScalarField,
    pub b: ScalarField,
    pub c: ScalarField,
    pub g: ScalarField,
    pub interval: (f64, f64),
}

/// Initial data x(t₀) = x0, D^α x(t₀) = x1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IVPSpec {
    pub t0: f64,
    pub x0: f64,
    pub x1: f64,
}

/// Uniform grid with spacing at most `step`, with `t0` inserted as a node.
pub fn output_grid(interval: (f64, f64), t0: f64, step: f64) -> Vec<f64> {
    let (lo, hi) = interval;
    let n = (((hi - lo) / step).ceil() as usize).max(1);
    let dt = (hi - lo) / n as f64;
    let mut g: Vec<f64> = (0..=n).map(|i| if i == n { hi } else { lo + dt * i as f64 }).collect();
    let near = g.iter().position(|&t| (t - t0).abs() <= 1e-9 * dt);
    match near {
        Some(i) => g[i] = t0,
        None => {
            let pos = g.partition_point(|&t| t < t0);
            g.insert(pos, t0);
        }
    }
    g
}

/// Solve L x = h with the given initial data across the whole interval.
pub fn solve_ivp(prob: &SelfAdjointProblem, ivp: &IVPSpec, step: f64) -> Result<Trajectory> {
    let (lo, hi) = prob.interval;
    if !(step > 0.0) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
    }
    if !(ivp.t0 >= lo && ivp.t0 <= hi) {
        return Err(Error::InvalidArgument(format!("t0 = {} outside [{lo}, {hi}]", ivp.t0)));
    }
    let grid = output_grid(prob.interval, ivp.t0, step);
    let i0 = grid.iter().position(|&t| t == ivp.t0).expect("t0 is a node");
    let opts = OdeOptions { max_step: step, ..OdeOptions::default() };
    let y0 = [ivp.x0, prob.p.eval(ivp.t0) * ivp.x1];
    let f = |t: f64, z: &State| prob.rhs(t, z);
    let fwd = integrate_to(&f, ivp.t0, y0, &grid[i0 + 1..], &opts)?;
    let back_targets: Vec<f64> = grid[..i0].iter().rev().copied().collect();
    let back = integrate_to(&f, ivp.t0, y0, &back_targets, &opts)?;
    let mut states: Vec<State> = back.into_iter().rev().collect();
    states.push(y0);
    states.extend(fwd);
    let x: Vec<f64> = states.iter().map(|s| s[0]).collect();
    let dax: Vec<f64> = states.iter().zip(&grid).map(|(s, &t)| s[1] / prob.p.eval(t)).collect();
    let mut tr = prob.trajectory_from_solution(grid, x, dax)?;
    // initial data are stored exactly
    debug_assert_eq!(tr.x()[i0], ivp.x0);
    let _ = &mut tr;
    Ok(tr)
}

/// Self-adjoint form: p = e_{b/a+κ₁}(·,t₀), q = p c/a, h = g p/a.
pub fn to_self_adjoint(gp: &GeneralProblem, t0: f64, quad: &QuadratureConfig) -> Result<SelfAdjointProblem> {
    let (lo, hi) = gp.interval;
    for t in probe_grid(lo, hi) {
        let a = gp.a.eval(t);
        if a == 0.0 || !a.is_finite() {
            return Err(Error::NearZero { what: "a".into(), t });
        }
    }
    if !(t0 >= lo && t0 <= hi) {
        return Err(Error::InvalidArgument(format!("t0 = {t0} outside [{lo}, {hi}]")));
    }
    let exponent = &(&gp.b / &gp.a) + gp.pair.kappa1();
    let p = exp_field(&ExpArgs::new(exponent, &gp.pair), t0, quad).relabel("p");
    let q = (&p * &(&gp.c / &gp.a)).relabel("q");
    let h = (&p * &(&gp.g / &gp.a)).relabel("h");
    SelfAdjointProblem::new(&gp.pair, p, q, h, gp.interval)
}

/// W(x,y)(t) = x D^α y − y D^α x.
pub fn wronskian(xt: &Trajectory, yt: &Trajectory, t: f64) -> Result<f64> {
    xt.check(t)?;
    yt.check(t)?;
    Ok(xt.eval_x(t) * yt.eval_dax(t) - yt.eval_x(t) * xt.eval_dax(t))
}

/// Solutions with (x, D^α x)(t₀) = (1, 0) and (0, 1/p(t₀)).
pub fn basis(prob: &SelfAdjointProblem, t0: f64, step: f64) -> Result<(Trajectory, Trajectory)> {
    let hom = prob.homogeneous();
    let u = solve_ivp(&hom, &IVPSpec { t0, x0: 1.0, x1: 0.0 }, step)?;
    let v = solve_ivp(&hom, &IVPSpec { t0, x0: 0.0, x1: 1.0 / prob.p.eval(t0) }, step)?;
    Ok((u, v))
}

/// t ↦ D^α[p D^α x] + q x − h for a sampled x.
pub fn lx_residual(prob: &SelfAdjointProblem, traj: &Trajectory) -> ScalarField {
    let y = &prob.p * &traj.dax_field();
    let outer = dalpha_field(&prob.pair, &y);
    let x = traj.x_field();
    (&(&outer + &(&prob.q * &x)) - &prob.h).relabel("Lx-h")
}

/// L f = D^α[p D^α f] + q f for a smooth field f.
pub fn apply_l(prob: &SelfAdjointProblem, f: &ScalarField) -> ScalarField {
    let inner = &prob.p * &dalpha_field(&prob.pair, f);
    (&dalpha_field(&prob.pair, &inner) + &(&prob.q * f)).relabel(format!("L[{}]", f.label()))
}

/// W(x,y) for fields.
pub fn wronskian_field(pair: &KappaPair, x: &ScalarField, y: &ScalarField) -> ScalarField {
    &(x * &dalpha_field(pair, y)) - &(y * &dalpha_field(pair, x))
}

/// x·Ly − y·Lx − (D^α[pW] + κ₁pW) for smooth fields x, y.
pub fn lagrange_residual(prob: &SelfAdjointProblem, x: &ScalarField, y: &ScalarField) -> ScalarField {
    let pw = &prob.p * &wronskian_field(&prob.pair, x, y);
    let rhs = &dalpha_field(&prob.pair, &pw) + &(prob.pair.kappa1() * &pw);
    let lhs = &(x * &apply_l(prob, y)) - &(y * &apply_l(prob, x));
    &lhs - &rhs
}

/// (⟨x,Ly⟩ − ⟨Lx,y⟩, e₀²(b,t) p W |ₐᵇ) on [a, b].
pub fn green_formula(
    prob: &SelfAdjointProblem,
    x: &ScalarField,
    y: &ScalarField,
    a: f64,
    b: f64,
    quad: &QuadratureConfig,
) -> Result<(f64, f64)> {
    let pair = &prob.pair;
    let lhs = inner_product(pair, x, &apply_l(prob, y), a, b, quad)? - inner_product(pair, &apply_l(prob, x), y, a, b, quad)?;
    let w = wronskian_field(pair, x, y);
    let term = |t: f64| -> Result<f64> { Ok((2.0 * log_e0(pair, b, t, quad)?).exp() * prob.p.eval(t) * w.eval(t)) };
    Ok((lhs, term(b)? - term(a)?))
}

/// Samples of p W(x,y) / e₀²(t,b) on the grid of x.
pub fn abel_samples(prob: &SelfAdjointProblem, x: &Trajectory, y: &Trajectory, b: f64, quad: &QuadratureConfig) -> Result<Vec<f64>> {
    x.grid()
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let w = x.x()[i] * y.eval_dax(t) - y.eval_x(t) * x.dax()[i];
            Ok(prob.p.eval(t) * w / (2.0 * log_e0(&prob.pair, t, b, quad)?).exp())
        })
        .collect()
}

/// Relative spread (max − min)/max|·| of a sample set.
pub fn relative_variation(v: &[f64]) -> f64 {
    let mx = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mn = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let scale = v.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    if scale == 0.0 {
        0.0
    } else {
        (mx - mn) / scale
    }
}

/// W(t₀)·e_{−b/a−κ₁}(t,t₀) for the general homogeneous equation.
pub fn liouville_wronskian(gp: &GeneralProblem, w0: f64, t0: f64, t: f64, quad: &QuadratureConfig) -> Result<f64> {
    let exponent = -(&(&gp.b / &gp.a) + gp.pair.kappa1());
    Ok(w0 * crate::confcalc::exp_p(&ExpArgs::new(exponent, &gp.pair), t, t0, quad)?)
}
