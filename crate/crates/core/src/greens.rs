//! Two-point boundary value problems and Green's functions.

use crate::confcalc::{bisect, dalpha_field, e0, e0_field, h1};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::gains::KappaPair;
use crate::quad::{integrate, QuadratureConfig};
use crate::solver::{basis, solve_ivp, IVPSpec, SelfAdjointProblem};
use crate::structure::Kernel;
use crate::trajectory::Trajectory;
use rayon::prelude::*;
use std::sync::Arc;

/// |det M| below this multiple of ‖M‖² marks a degenerate boundary system.
pub const DEGENERACY_TOL: f64 = 1e-10;
/// Default kernel grid size per axis.
pub const KERNEL_GRID: usize = 129;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BvpKind {
    General,
    Conjugate,
    Focal,
    Periodic,
}

/// ξx(a) − βD^αx(a) = A, γx(b) + δD^αx(b) = B; or, for the periodic kind,
/// x(a) − e₀(a,b)x(b) = A, D^αx(a) − e₀(a,b)D^αx(b) = B.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BVPSpec {
    pub xi: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub a_value: f64,
    pub b_value: f64,
    pub kind: BvpKind,
}

impl BVPSpec {
    pub fn general(xi: f64, beta: f64, gamma: f64, delta: f64, a_value: f64, b_value: f64) -> Result<Self> {
        if (xi == 0.0 && beta == 0.0) || (gamma == 0.0 && delta == 0.0) {
            return Err(Error::InvalidArgument("each boundary condition needs a nonzero coefficient".into()));
        }
        Ok(BVPSpec { xi, beta, gamma, delta, a_value, b_value, kind: BvpKind::General })
    }
    pub fn conjugate(a_value: f64, b_value: f64) -> Self {
        BVPSpec { xi: 1.0, beta: 0.0, gamma: 1.0, delta: 0.0, a_value, b_value, kind: BvpKind::Conjugate }
    }
    pub fn focal(a_value: f64, b_value: f64) -> Self {
        BVPSpec { xi: 1.0, beta: 0.0, gamma: 0.0, delta: 1.0, a_value, b_value, kind: BvpKind::Focal }
    }
    pub fn periodic(a_value: f64, b_value: f64) -> Self {
        BVPSpec { xi: 0.0, beta: 0.0, gamma: 0.0, delta: 0.0, a_value, b_value, kind: BvpKind::Periodic }
    }
    pub fn homogeneous(&self) -> Self {
        BVPSpec { a_value: 0.0, b_value: 0.0, ..*self }
    }

    /// The two boundary functionals applied to (x, D^αx) at a and b.
    pub fn functionals(&self, at_a: (f64, f64), at_b: (f64, f64), e0ab: f64) -> [f64; 2] {
        match self.kind {
            BvpKind::Periodic => [at_a.0 - e0ab * at_b.0, at_a.1 - e0ab * at_b.1],
            _ => [self.xi * at_a.0 - self.beta * at_a.1, self.gamma * at_b.0 + self.delta * at_b.1],
        }
    }
}

fn ends(tr: &Trajectory, a: f64, b: f64) -> ((f64, f64), (f64, f64)) {
    ((tr.eval_x(a), tr.eval_dax(a)), (tr.eval_x(b), tr.eval_dax(b)))
}

/// Boundary matrix of a basis, with the degeneracy gate applied.
struct Shooting {
    y1: Trajectory,
    y2: Trajectory,
    inv: [[f64; 2]; 2],
    e0ab: f64,
}

fn shooting(prob: &SelfAdjointProblem, spec: &BVPSpec, a: f64, b: f64, step: f64, quad: &QuadratureConfig) -> Result<Shooting> {
    let (y1, y2) = basis(prob, a, step)?;
    let e0ab = e0(&prob.pair, a, b, quad)?;
    let (a1, b1) = ends(&y1, a, b);
    let (a2, b2) = ends(&y2, a, b);
    let c1 = spec.functionals(a1, b1, e0ab);
    let c2 = spec.functionals(a2, b2, e0ab);
    let m = [[c1[0], c2[0]], [c1[1], c2[1]]];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let norm = m.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
    if !(det.abs() > DEGENERACY_TOL * norm * norm) {
        return Err(Error::Degenerate { det, norm });
    }
    let inv = [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]];
    Ok(Shooting { y1, y2, inv, e0ab })
}

impl Shooting {
    fn solve(&self, r: [f64; 2]) -> (f64, f64) {
        (self.inv[0][0] * r[0] + self.inv[0][1] * r[1], self.inv[1][0] * r[0] + self.inv[1][1] * r[1])
    }
}

/// Unique solution of L x = h with the boundary conditions of `spec` on [a, b].
pub fn solve_bvp(prob: &SelfAdjointProblem, spec: &BVPSpec, a: f64, b: f64, step: f64, quad: &QuadratureConfig) -> Result<Trajectory> {
    let prob = prob.on_interval((a, b))?;
    let sh = shooting(&prob, spec, a, b, step, quad)?;
    let w = solve_ivp(&prob, &IVPSpec { t0: a, x0: 0.0, x1: 0.0 }, step)?;
    let (wa, wb) = ends(&w, a, b);
    let bw = spec.functionals(wa, wb, sh.e0ab);
    let (c1, c2) = sh.solve([spec.a_value - bw[0], spec.b_value - bw[1]]);
    let grid = w.grid().to_vec();
    let x: Vec<f64> = (0..grid.len()).map(|i| c1 * sh.y1.x()[i] + c2 * sh.y2.x()[i] + w.x()[i]).collect();
    let dax: Vec<f64> = (0..grid.len()).map(|i| c1 * sh.y1.dax()[i] + c2 * sh.y2.dax()[i] + w.dax()[i]).collect();
    prob.trajectory_from_solution(grid, x, dax)
}

/// (x, D^αx) at a and b residuals of the boundary conditions.
pub fn boundary_residual(pair: &KappaPair, spec: &BVPSpec, x: &Trajectory, a: f64, b: f64, quad: &QuadratureConfig) -> Result<[f64; 2]> {
    let (xa, xb) = ends(x, a, b);
    let f = spec.functionals(xa, xb, e0(pair, a, b, quad)?);
    Ok([f[0] - spec.a_value, f[1] - spec.b_value])
}

type Branch = Arc<dyn Fn(f64, f64) -> (f64, f64) + Send + Sync>;

/// Green's function: u-branch on t ≤ s, v-branch on t ≥ s.
#[derive(Clone)]
pub struct GreenKernel {
    pub kernel: Kernel,
    pub spec: BVPSpec,
    pub a: f64,
    pub b: f64,
    pub pair: KappaPair,
    /// p and q of the operator, used to complete trajectories
    pub prob: SelfAdjointProblem,
    u: Branch,
    v: Branch,
    pub method: &'static str,
}

impl std::fmt::Debug for GreenKernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GreenKernel").field("method", &self.method).field("a", &self.a).field("b", &self.b).finish()
    }
}

impl GreenKernel {
    fn build(prob: &SelfAdjointProblem, spec: BVPSpec, a: f64, b: f64, u: Branch, v: Branch, n: usize, method: &'static str) -> Result<Self> {
        let grid: Vec<f64> = (0..n).map(|i| if i + 1 == n { b } else { a + (b - a) * i as f64 / (n - 1) as f64 }).collect();
        let (uu, vv) = (u.clone(), v.clone());
        let kernel = Kernel::from_evaluator(grid.clone(), grid, move |t, s| if t <= s { uu(t, s) } else { vv(t, s) })?;
        Ok(GreenKernel { kernel, spec, a, b, pair: prob.pair.clone(), prob: prob.homogeneous(), u, v, method })
    }
    /// G(t, s).
    pub fn eval(&self, t: f64, s: f64) -> f64 {
        self.kernel.eval(t, s)
    }
    /// (G, D^α_t G) on the u-branch formula.
    pub fn u_branch(&self, t: f64, s: f64) -> (f64, f64) {
        (self.u)(t, s)
    }
    /// (G, D^α_t G) on the v-branch formula.
    pub fn v_branch(&self, t: f64, s: f64) -> (f64, f64) {
        (self.v)(t, s)
    }
    /// max |u(s,s) − v(s,s)| over the s-grid.
    pub fn diagonal_jump(&self) -> f64 {
        self.kernel.s_grid().iter().map(|&s| (self.u_branch(s, s).0 - self.v_branch(s, s).0).abs()).fold(0.0, f64::max)
    }
    /// max |G − other| over the shared grid.
    pub fn max_diff(&self, other: &GreenKernel) -> f64 {
        self.kernel.max_diff(&other.kernel)
    }
}

/// G from φ (φ(a) = β, D^αφ(a) = ξ) and ψ (ψ(b) = δ, D^αψ(b) = −γ).
pub fn green_phipsi(prob: &SelfAdjointProblem, spec: &BVPSpec, a: f64, b: f64, step: f64, n: usize, quad: &QuadratureConfig) -> Result<GreenKernel> {
    if spec.kind == BvpKind::Periodic {
        return Err(Error::InvalidArgument("the φ/ψ construction needs separated boundary conditions".into()));
    }
    let hom = prob.homogeneous().on_interval((a, b))?;
    shooting(&hom, spec, a, b, step, quad)?;
    let phi = Arc::new(solve_ivp(&hom, &IVPSpec { t0: a, x0: spec.beta, x1: spec.xi }, step)?);
    let psi = Arc::new(solve_ivp(&hom, &IVPSpec { t0: b, x0: spec.delta, x1: -spec.gamma }, step)?);
    let p = hom.p.clone();
    let den = {
        let (phi, psi) = (phi.clone(), psi.clone());
        move |s: f64| p.eval(s) * (phi.eval_x(s) * psi.eval_dax(s) - psi.eval_x(s) * phi.eval_dax(s))
    };
    let (f1, g1, d1) = (phi.clone(), psi.clone(), den.clone());
    let u: Branch = Arc::new(move |t, s| {
        let c = g1.eval_x(s) / d1(s);
        (f1.eval_x(t) * c, f1.eval_dax(t) * c)
    });
    let (f2, g2, d2) = (phi, psi, den);
    let v: Branch = Arc::new(move |t, s| {
        let c = f2.eval_x(s) / d2(s);
        (g2.eval_x(t) * c, g2.eval_dax(t) * c)
    });
    GreenKernel::build(&hom, *spec, a, b, u, v, n, "phipsi")
}

/// Cauchy function and its D^α_t from a basis at a.
fn cauchy_from(y1: Arc<Trajectory>, y2: Arc<Trajectory>, p: ScalarField) -> impl Fn(f64, f64) -> (f64, f64) + Send + Sync + Clone {
    move |t: f64, s: f64| {
        let (a1, a2) = (y1.eval_x(s), y2.eval_x(s));
        let den = p.eval(s) * (a1 * y2.eval_dax(s) - a2 * y1.eval_dax(s));
        ((a1 * y2.eval_x(t) - a2 * y1.eval_x(t)) / den, (a1 * y2.eval_dax(t) - a2 * y1.eval_dax(t)) / den)
    }
}

/// u(·,s) solves L u = 0 with boundary data shifted by the Cauchy function; v = u + x(·,s).
fn green_via_cauchy(prob: &SelfAdjointProblem, spec: &BVPSpec, a: f64, b: f64, step: f64, n: usize, quad: &QuadratureConfig, method: &'static str) -> Result<GreenKernel> {
    let hom = prob.homogeneous().on_interval((a, b))?;
    let sh = Arc::new(shooting(&hom, spec, a, b, step, quad)?);
    let y1 = Arc::new(sh.y1.clone());
    let y2 = Arc::new(sh.y2.clone());
    let cf = cauchy_from(y1.clone(), y2.clone(), hom.p.clone());
    let spec_c = *spec;
    let coeffs = {
        let (sh, cf) = (sh.clone(), cf.clone());
        move |s: f64| {
            let (xb, dxb) = cf(b, s);
            let r = match spec_c.kind {
                BvpKind::Periodic => [sh.e0ab * xb, sh.e0ab * dxb],
                _ => [0.0, -(spec_c.gamma * xb + spec_c.delta * dxb)],
            };
            sh.solve(r)
        }
    };
    let (c1, p1, p2) = (coeffs.clone(), y1.clone(), y2.clone());
    let u: Branch = Arc::new(move |t, s| {
        let (k1, k2) = c1(s);
        (k1 * p1.eval_x(t) + k2 * p2.eval_x(t), k1 * p1.eval_dax(t) + k2 * p2.eval_dax(t))
    });
    let uu = u.clone();
    let v: Branch = Arc::new(move |t, s| {
        let (g, dg) = uu(t, s);
        let (x, dx) = cf(t, s);
        (g + x, dg + dx)
    });
    GreenKernel::build(&hom, *spec, a, b, u, v, n, method)
}

/// Green's function through the Cauchy function (separated conditions).
pub fn green_cauchy(prob: &SelfAdjointProblem, spec: &BVPSpec, a: f64, b: f64, step: f64, n: usize, quad: &QuadratureConfig) -> Result<GreenKernel> {
    if spec.kind == BvpKind::Periodic {
        return Err(Error::InvalidArgument("use green_periodic for periodic conditions".into()));
    }
    green_via_cauchy(prob, spec, a, b, step, n, quad, "cauchy")
}

/// Green's function for x(a) = e₀(a,b)x(b), D^αx(a) = e₀(a,b)D^αx(b).
pub fn green_periodic(prob: &SelfAdjointProblem, a: f64, b: f64, step: f64, n: usize, quad: &QuadratureConfig) -> Result<GreenKernel> {
    green_via_cauchy(prob, &BVPSpec::periodic(0.0, 0.0), a, b, step, n, quad, "periodic")
}

/// q ≡ 0 Green's functions from quadratures of 1/p.
pub fn green_closed_form(pair: &KappaPair, p: &ScalarField, a: f64, b: f64, kind: BvpKind, n: usize, quad: &QuadratureConfig) -> Result<GreenKernel> {
    let prob = SelfAdjointProblem::new(pair, p.clone(), ScalarField::zero(), ScalarField::zero(), (a, b))?;
    let (pr, pf, q) = (pair.clone(), p.clone(), *quad);
    let pint = Arc::new(move |x: f64, y: f64| integrate(|r| 1.0 / (pf.eval(r) * pr.k0(r)), x, y, &q).unwrap_or(f64::NAN));
    let total = pint(a, b);
    let (pr, q) = (pair.clone(), *quad);
    let e = Arc::new(move |t: f64, s: f64| e0(&pr, t, s, &q).unwrap_or(f64::NAN));
    let (u, v): (Branch, Branch) = match kind {
        BvpKind::Conjugate => {
            let (pi1, e1, pp1) = (pint.clone(), e.clone(), p.clone());
            let u: Branch = Arc::new(move |t, s| {
                let (ets, psb) = (e1(t, s), pi1(s, b));
                (-ets * pi1(a, t) * psb / total, -ets * psb / (pp1.eval(t) * total))
            });
            let (pi2, e2, pp2) = (pint, e, p.clone());
            let v: Branch = Arc::new(move |t, s| {
                let (ets, pas) = (e2(t, s), pi2(a, s));
                (-ets * pas * pi2(t, b) / total, ets * pas / (pp2.eval(t) * total))
            });
            (u, v)
        }
        BvpKind::Focal => {
            let (pi1, e1, pp1) = (pint.clone(), e.clone(), p.clone());
            let u: Branch = Arc::new(move |t, s| {
                let ets = e1(t, s);
                (-ets * pi1(a, t), -ets / pp1.eval(t))
            });
            let (pi2, e2) = (pint, e);
            let v: Branch = Arc::new(move |t, s| (-e2(t, s) * pi2(a, s), 0.0));
            (u, v)
        }
        _ => return Err(Error::InvalidArgument("closed forms exist for conjugate and focal conditions".into())),
    };
    let spec = if kind == BvpKind::Conjugate { BVPSpec::conjugate(0.0, 0.0) } else { BVPSpec::focal(0.0, 0.0) };
    GreenKernel::build(&prob, spec, a, b, u, v, n, "closed_form")
}

/// p with 1/p(τ) = e₀(b,τ) D^α[τ/e₀(b,τ)], evaluated from the definition.
pub fn unit_measure_p(pair: &KappaPair, b: f64, quad: &QuadratureConfig) -> ScalarField {
    // τ/e₀(b,τ) = τ e₀(τ,b)
    let g = &ScalarField::identity() * &e0_field(pair, b, quad);
    let inv = &crate::confcalc::e0_field_rev(pair, b, quad) * &dalpha_field(pair, &g);
    inv.recip().relabel("p_unit")
}

/// x(t) = ∫ₐᵇ G(t,s) h(s) d_αs, split at s = t, on the kernel's t-grid.
pub fn apply_green(g: &GreenKernel, h: &ScalarField, quad: &QuadratureConfig) -> Result<Trajectory> {
    let (a, b) = (g.a, g.b);
    let pair = &g.pair;
    let grid = g.kernel.t_grid().to_vec();
    let vals: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&t| {
            let w = |s: f64| h.eval(s) / pair.k0(s);
            let (mut x, mut d) = (0.0, 0.0);
            if t > a {
                x += integrate(|s| g.v_branch(t, s).0 * w(s), a, t, quad)?;
                d += integrate(|s| g.v_branch(t, s).1 * w(s), a, t, quad)?;
            }
            if t < b {
                x += integrate(|s| g.u_branch(t, s).0 * w(s), t, b, quad)?;
                d += integrate(|s| g.u_branch(t, s).1 * w(s), t, b, quad)?;
            }
            Ok((x, d))
        })
        .collect::<Result<_>>()?;
    let (x, dax): (Vec<f64>, Vec<f64>) = vals.into_iter().unzip();
    g.prob.with_forcing(h.clone()).trajectory_from_solution(grid, x, dax)
}

/// Checks on a built Green's function.
#[derive(Debug, Clone, PartialEq)]
pub struct GreenAudit {
    /// max |e₀(s,t)G(t,s) − e₀(t,s)G(s,t)| over the grid
    pub symmetry_residual: f64,
    /// max of G over interior grid points
    pub interior_max: f64,
    pub negative_interior: bool,
    /// max of ∫G f over the nonnegative test forcings (should be ≤ 0)
    pub comparison_max: f64,
    pub comparison_holds: bool,
    /// ∫G·0 vanishes identically
    pub equality_case: bool,
}

pub fn audit_green(g: &GreenKernel, quad: &QuadratureConfig) -> Result<GreenAudit> {
    let sg = g.kernel.s_grid();
    let n = sg.len();
    let pair = &g.pair;
    let logs: Vec<f64> = sg.iter().map(|&t| crate::confcalc::log_e0(pair, t, g.a, quad)).collect::<Result<_>>()?;
    let mut sym: f64 = 0.0;
    let mut imax = f64::NEG_INFINITY;
    for i in 0..n {
        for j in 0..n {
            // e₀(t,s) = exp(L(t) − L(s))
            let ets = (logs[i] - logs[j]).exp();
            let lhs = g.kernel.value(i, j) / ets;
            let rhs = ets * g.kernel.value(j, i);
            sym = sym.max((lhs - rhs).abs());
            if i > 0 && j > 0 && i + 1 < n && j + 1 < n {
                imax = imax.max(g.kernel.value(i, j));
            }
        }
    }
    let forcings = [
        ScalarField::constant(1.0),
        e0_field(pair, g.a, quad),
        &ScalarField::constant(1.0) + &ScalarField::sin(),
        ScalarField::polynomial(&[g.a * g.a, -2.0 * g.a, 1.0]),
    ];
    let mut cmax = f64::NEG_INFINITY;
    for f in &forcings {
        let w = apply_green(g, f, quad)?;
        cmax = cmax.max(w.x().iter().cloned().fold(f64::NEG_INFINITY, f64::max));
    }
    let zero = apply_green(g, &ScalarField::zero(), quad)?;
    Ok(GreenAudit {
        symmetry_residual: sym,
        interior_max: imax,
        negative_interior: imax < 0.0,
        comparison_max: cmax,
        comparison_holds: cmax <= 1e-10,
        equality_case: zero.x().iter().all(|&v| v == 0.0),
    })
}

/// The t > 0 with h₁(t, 0) = target.
pub fn pi_star(pair: &KappaPair, target: f64, quad: &QuadratureConfig) -> Result<f64> {
    if !(target > 0.0) {
        return Err(Error::InvalidArgument(format!("target must be positive, got {target}")));
    }
    let (_, hi_dom) = pair.domain();
    let mut hi = 1.0f64;
    let mut k = 0;
    while h1(pair, hi.min(hi_dom), 0.0, quad)? < target {
        if hi >= hi_dom || k > 200 {
            return Err(Error::Unreachable { target });
        }
        hi *= 2.0;
        k += 1;
    }
    let hi = hi.min(hi_dom);
    let f = |t: f64| h1(pair, t, 0.0, quad).unwrap_or(f64::NAN) - target;
    let lo = 0.0;
    let t = bisect(f, lo, hi, 1e-15 * hi.max(1.0));
    Ok(t)
}
