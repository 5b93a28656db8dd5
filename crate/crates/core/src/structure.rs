//! Cauchy kernels, variation of constants and parameters, reduction of
//! order, the Riccati correspondence, Pólya/Trench factorizations and the
//! recessive/dominant test.

use crate::confcalc::{dalpha_field, e0, e0_field, exp_p, log_e0, ExpArgs};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::gains::KappaPair;
use crate::quad::{integrate, QuadratureConfig};
use crate::solver::{apply_l, basis, output_grid, solve_ivp, GeneralProblem, IVPSpec, SelfAdjointProblem};
use crate::trajectory::Trajectory;
use rayon::prelude::*;
use std::sync::Arc;

type KernelEval = Arc<dyn Fn(f64, f64) -> (f64, f64) + Send + Sync>;

/// A sampled two-variable function K(t,s) together with D^α_t K, and an
/// evaluator for points off the grid.
#[derive(Clone)]
pub struct Kernel {
    t_grid: Vec<f64>,
    s_grid: Vec<f64>,
    values: Vec<f64>,
    dvalues: Vec<f64>,
    eval: KernelEval,
}

impl std::fmt::Debug for Kernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Kernel").field("nt", &self.t_grid.len()).field("ns", &self.s_grid.len()).finish()
    }
}

impl Kernel {
    /// Sample an evaluator on a grid; columns are filled in parallel.
    pub fn from_evaluator(
        t_grid: Vec<f64>,
        s_grid: Vec<f64>,
        eval: impl Fn(f64, f64) -> (f64, f64) + Send + Sync + 'static,
    ) -> Result<Kernel> {
        let eval: KernelEval = Arc::new(eval);
        let cols: Vec<Vec<(f64, f64)>> =
            s_grid.par_iter().map(|&s| t_grid.iter().map(|&t| eval(t, s)).collect()).collect();
        let (nt, ns) = (t_grid.len(), s_grid.len());
        let mut values = vec![0.0; nt * ns];
        let mut dvalues = vec![0.0; nt * ns];
        for (j, col) in cols.iter().enumerate() {
            for (i, &(v, d)) in col.iter().enumerate() {
                if !v.is_finite() || !d.is_finite() {
                    return Err(Error::NonFinite { what: "kernel".into(), t: t_grid[i] });
                }
                values[i * ns + j] = v;
                dvalues[i * ns + j] = d;
            }
        }
        Ok(Kernel { t_grid, s_grid, values, dvalues, eval })
    }

    pub fn t_grid(&self) -> &[f64] {
        &self.t_grid
    }
    pub fn s_grid(&self) -> &[f64] {
        &self.s_grid
    }
    /// K(tᵢ, sⱼ).
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.s_grid.len() + j]
    }
    /// D^α_t K(tᵢ, sⱼ).
    pub fn dvalue(&self, i: usize, j: usize) -> f64 {
        self.dvalues[i * self.s_grid.len() + j]
    }
    pub fn eval(&self, t: f64, s: f64) -> f64 {
        (self.eval)(t, s).0
    }
    /// (K(t,s), D^α_t K(t,s)).
    pub fn eval_with_dalpha(&self, t: f64, s: f64) -> (f64, f64) {
        (self.eval)(t, s)
    }
    /// max |K − other| over the shared grid.
    pub fn max_diff(&self, other: &Kernel) -> f64 {
        self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Cubic Lagrange weights over four abscissae.
fn lagrange4(xs: &[f64], x: f64) -> [f64; 4] {
    let mut w = [1.0; 4];
    for i in 0..4 {
        for j in 0..4 {
            if i != j {
                w[i] *= (x - xs[j]) / (xs[i] - xs[j]);
            }
        }
    }
    w
}

/// Evaluate column trajectories at t and interpolate across s.
fn column_interp(s_grid: &[f64], cols: &[Trajectory], t: f64, s: f64) -> (f64, f64) {
    if let Ok(j) = s_grid.binary_search_by(|g| g.total_cmp(&s)) {
        return (cols[j].eval_x(t), cols[j].eval_dax(t));
    }
    let n = s_grid.len();
    if n < 4 {
        let j = s_grid.partition_point(|&g| g < s).clamp(1, n - 1);
        let w = (s - s_grid[j - 1]) / (s_grid[j] - s_grid[j - 1]);
        let a = (cols[j - 1].eval_x(t), cols[j - 1].eval_dax(t));
        let b = (cols[j].eval_x(t), cols[j].eval_dax(t));
        return (a.0 + w * (b.0 - a.0), a.1 + w * (b.1 - a.1));
    }
    let j = s_grid.partition_point(|&g| g < s);
    let start = j.saturating_sub(2).min(n - 4);
    let w = lagrange4(&s_grid[start..start + 4], s);
    let mut v = (0.0, 0.0);
    for k in 0..4 {
        let c = &cols[start + k];
        v.0 += w[k] * c.eval_x(t);
        v.1 += w[k] * c.eval_dax(t);
    }
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CauchyMethod {
    IvpSweep,
    BasisFormula,
}

/// Cauchy function x(t,s): L x(·,s) = 0, x(s,s) = 0, D^α x(s,s) = 1/p(s),
/// sampled on s_grid × s_grid.
pub fn cauchy_kernel(prob: &SelfAdjointProblem, method: CauchyMethod, s_grid: &[f64], step: f64) -> Result<Kernel> {
    let hom = prob.homogeneous();
    let grid = s_grid.to_vec();
    match method {
        CauchyMethod::IvpSweep => {
            let cols: Vec<Trajectory> = s_grid
                .par_iter()
                .map(|&s| solve_ivp(&hom, &IVPSpec { t0: s, x0: 0.0, x1: 1.0 / hom.p.eval(s) }, step))
                .collect::<Result<_>>()?;
            let sg = grid.clone();
            Kernel::from_evaluator(grid.clone(), grid, move |t, s| column_interp(&sg, &cols, t, s))
        }
        CauchyMethod::BasisFormula => {
            let eval = basis_cauchy(&hom, step)?;
            Kernel::from_evaluator(grid.clone(), grid, move |t, s| eval(t, s))
        }
    }
}

/// Cauchy function from one basis: (u(s)v(t) − v(s)u(t)) / (p(s) W(u,v)(s)).
pub(crate) fn basis_cauchy(prob: &SelfAdjointProblem, step: f64) -> Result<impl Fn(f64, f64) -> (f64, f64) + Send + Sync + Clone> {
    let (u, v) = basis(prob, prob.interval.0, step)?;
    let (u, v, p) = (Arc::new(u), Arc::new(v), prob.p.clone());
    Ok(move |t: f64, s: f64| {
        let (us, vs) = (u.eval_x(s), v.eval_x(s));
        let den = p.eval(s) * (us * v.eval_dax(s) - vs * u.eval_dax(s));
        ((us * v.eval_x(t) - vs * u.eval_x(t)) / den, (us * v.eval_dax(t) - vs * u.eval_dax(t)) / den)
    })
}

/// x(t) = ∫ₐᵗ x(t,s) h(s) d_αs with D^α x(t) = ∫ₐᵗ D^α_t x(t,s) h(s) d_αs.
pub fn variation_of_constants(prob: &SelfAdjointProblem, a: f64, step: f64, quad: &QuadratureConfig) -> Result<Trajectory> {
    let kern = basis_cauchy(&prob.homogeneous(), step)?;
    let grid = output_grid(prob.interval, a, step);
    let pair = &prob.pair;
    let h = &prob.h;
    let vals: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&t| {
            if t == a {
                return Ok((0.0, 0.0));
            }
            let x = integrate(|s| kern(t, s).0 * h.eval(s) / pair.k0(s), a, t, quad)?;
            let d = integrate(|s| kern(t, s).1 * h.eval(s) / pair.k0(s), a, t, quad)?;
            Ok((x, d))
        })
        .collect::<Result<_>>()?;
    let (x, dax): (Vec<f64>, Vec<f64>) = vals.into_iter().unzip();
    prob.trajectory_from_solution(grid, x, dax)
}

/// ∫ from grid[i0] to grid[i] of f, accumulated panel by panel in both directions.
fn cumulative<F: Fn(f64) -> f64 + Sync>(grid: &[f64], i0: usize, f: F, quad: &QuadratureConfig) -> Result<Vec<f64>> {
    let n = grid.len();
    let panels: Vec<f64> = (0..n - 1).into_par_iter().map(|i| integrate(&f, grid[i], grid[i + 1], quad)).collect::<Result<_>>()?;
    let mut out = vec![0.0; n];
    for i in i0 + 1..n {
        out[i] = out[i - 1] + panels[i - 1];
    }
    for i in (0..i0).rev() {
        out[i] = out[i + 1] - panels[i];
    }
    Ok(out)
}

fn node_index(tr: &Trajectory, t0: f64) -> Result<usize> {
    tr.grid()
        .iter()
        .position(|&g| g == t0)
        .ok_or_else(|| Error::InvalidArgument(format!("t0 = {t0} is not a grid node of the trajectory")))
}

/// min|x| > 10⁻⁸·max|x| on the grid.
pub fn check_nonvanishing(x: &Trajectory, what: &str) -> Result<()> {
    let mx = x.max_abs_x();
    let sign = x.x()[0].signum();
    for (i, &v) in x.x().iter().enumerate() {
        if v.abs() <= 1e-8 * mx || v.signum() != sign {
            return Err(Error::NearZero { what: what.into(), t: x.grid()[i] });
        }
    }
    Ok(())
}

/// Second solution y = x ∫_{t₀}^t e₀²(s,t₀)/(p x²) d_αs, with W(x,y) = e₀²(t,t₀)/p.
pub fn reduce_order(prob: &SelfAdjointProblem, x: &Trajectory, t0: f64, quad: &QuadratureConfig) -> Result<Trajectory> {
    check_nonvanishing(x, "x")?;
    let i0 = node_index(x, t0)?;
    let pair = &prob.pair;
    let grid = x.grid().to_vec();
    let integ = cumulative(
        &grid,
        i0,
        |s| {
            let xv = x.eval_x(s);
            (2.0 * log_e0(pair, s, t0, quad).unwrap_or(f64::NAN)).exp() / (prob.p.eval(s) * xv * xv * pair.k0(s))
        },
        quad,
    )?;
    let mut y = Vec::with_capacity(grid.len());
    let mut dy = Vec::with_capacity(grid.len());
    for (i, &t) in grid.iter().enumerate() {
        let e2 = (2.0 * log_e0(pair, t, t0, quad)?).exp();
        y.push(x.x()[i] * integ[i]);
        dy.push(e2 / (prob.p.eval(t) * x.x()[i]) + integ[i] * x.dax()[i]);
    }
    prob.homogeneous().trajectory_from_solution(grid, y, dy)
}

/// Second solution of the general homogeneous equation,
/// y = x ∫_{t₀}^t e_{−b/a−κ₁}(s,t₀)/x² d_αs.
pub fn reduce_order_general(gp: &GeneralProblem, x: &Trajectory, t0: f64, quad: &QuadratureConfig) -> Result<Trajectory> {
    check_nonvanishing(x, "x")?;
    let i0 = node_index(x, t0)?;
    let pair = &gp.pair;
    let args = ExpArgs::new(-(&(&gp.b / &gp.a) + pair.kappa1()), pair);
    let grid = x.grid().to_vec();
    let weight: Vec<f64> = grid.iter().map(|&t| exp_p(&args, t, t0, quad)).collect::<Result<_>>()?;
    let integ = cumulative(
        &grid,
        i0,
        |s| {
            let xv = x.eval_x(s);
            exp_p(&args, s, t0, quad).unwrap_or(f64::NAN) / (xv * xv * pair.k0(s))
        },
        quad,
    )?;
    let y: Vec<f64> = (0..grid.len()).map(|i| x.x()[i] * integ[i]).collect();
    let dy: Vec<f64> = (0..grid.len()).map(|i| weight[i] / x.x()[i] + integ[i] * x.dax()[i]).collect();
    let dx: Vec<f64> = grid.iter().enumerate().map(|(i, &t)| (dy[i] - pair.k1(t) * y[i]) / pair.k0(t)).collect();
    let fd = Trajectory::from_samples(grid.clone(), y.clone(), dy.clone())?;
    let ddy: Vec<f64> = grid.iter().map(|&t| fd.slope_dax(t)).collect();
    Trajectory::with_slopes(grid, y, dy, dx, ddy)
}

/// Constants (c₁, c₂) = (y(t₀)/x(t₀), p(t₀)W(x,y)(t₀)) writing y = c₁x + c₂·(reduction-of-order solution).
pub fn reduction_constants(prob: &SelfAdjointProblem, x: &Trajectory, y: &Trajectory, t0: f64) -> Result<(f64, f64)> {
    let w = crate::solver::wronskian(x, y, t0)?;
    Ok((y.eval_x(t0) / x.eval_x(t0), prob.p.eval(t0) * w))
}

/// R z = D^α z + q + z²/p − κ₁ z.
#[derive(Debug, Clone)]
pub struct RiccatiProblem {
    pub pair: KappaPair,
    pub p: ScalarField,
    pub q: ScalarField,
    pub interval: (f64, f64),
}

impl RiccatiProblem {
    pub fn from_problem(prob: &SelfAdjointProblem) -> Self {
        RiccatiProblem { pair: prob.pair.clone(), p: prob.p.clone(), q: prob.q.clone(), interval: prob.interval }
    }
}

/// z = p D^α x / x for a nonvanishing solution x.
pub fn riccati_from_solution(prob: &SelfAdjointProblem, x: &Trajectory) -> Result<ScalarField> {
    check_nonvanishing(x, "x")?;
    Ok((&(&prob.p * &x.dax_field()) / &x.x_field()).relabel("z"))
}

/// z = p D^α x / x for a smooth field x.
pub fn riccati_of_field(prob: &SelfAdjointProblem, x: &ScalarField) -> ScalarField {
    &(&prob.p * &dalpha_field(&prob.pair, x)) / x
}

pub fn riccati_residual(rp: &RiccatiProblem, z: &ScalarField) -> ScalarField {
    let quad = &(z * z) / &rp.p;
    (&(&(&dalpha_field(&rp.pair, z) + &rp.q) + &quad) - &(rp.pair.kappa1() * z)).relabel("Rz")
}

/// L x − x·R z with z = p D^α x / x.
pub fn factorization_residual(prob: &SelfAdjointProblem, x: &ScalarField) -> ScalarField {
    let z = riccati_of_field(prob, x);
    let rz = riccati_residual(&RiccatiProblem::from_problem(prob), &z);
    &apply_l(prob, x) - &(x * &rz)
}

/// x = e_{z/p}(·,t₀) with D^α x = z x / p.
pub fn solution_from_riccati(rp: &RiccatiProblem, z: &ScalarField, t0: f64, step: f64, quad: &QuadratureConfig) -> Result<Trajectory> {
    let grid = output_grid(rp.interval, t0, step);
    let i0 = grid.iter().position(|&g| g == t0).expect("t0 is a node");
    let pair = &rp.pair;
    let logx = cumulative(&grid, i0, |s| (z.eval(s) / rp.p.eval(s) - pair.k1(s)) / pair.k0(s), quad)?;
    let n = grid.len();
    let (mut x, mut dax, mut dx, mut ddax) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for i in 0..n {
        let t = grid[i];
        let (zv, pv) = (z.eval(t), rp.p.eval(t));
        if !zv.is_finite() {
            return Err(Error::NonFinite { what: "z".into(), t });
        }
        x[i] = logx[i].exp();
        dax[i] = zv * x[i] / pv;
        dx[i] = (dax[i] - pair.k1(t) * x[i]) / pair.k0(t);
        ddax[i] = (z.deriv_at(t) * x[i] + zv * dx[i]) / pv - zv * x[i] * rp.p.deriv_at(t) / (pv * pv);
    }
    Trajectory::with_slopes(grid, x, dax, dx, ddax)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorKind {
    Polya,
    Trench,
}

/// Positive factors with L y = f₁ D^α{f₂ D^α[f₁ y]}.
#[derive(Debug, Clone)]
pub struct FactorPair {
    pub f1: ScalarField,
    pub f2: ScalarField,
    pub kind: FactorKind,
}

impl FactorPair {
    /// f₁ D^α{f₂ D^α[f₁ y]}.
    pub fn apply(&self, pair: &KappaPair, y: &ScalarField) -> ScalarField {
        let inner = &self.f2 * &dalpha_field(pair, &(&self.f1 * y));
        &self.f1 * &dalpha_field(pair, &inner)
    }

    /// L y − f₁ D^α{f₂ D^α[f₁ y]}.
    pub fn residual(&self, prob: &SelfAdjointProblem, y: &ScalarField) -> ScalarField {
        &apply_l(prob, y) - &self.apply(&prob.pair, y)
    }
}

fn check_positive(x: &Trajectory) -> Result<()> {
    check_nonvanishing(x, "x")?;
    if x.x()[0] < 0.0 {
        return Err(Error::CoefficientSign { name: "x".into(), t: x.grid()[0] });
    }
    Ok(())
}

/// ρ₁ = e₀(t,a)/x, ρ₂ = p x²/e₀²(t,a).
pub fn polya_factors(prob: &SelfAdjointProblem, x: &Trajectory, a: f64, quad: &QuadratureConfig) -> Result<FactorPair> {
    check_positive(x)?;
    let e = e0_field(&prob.pair, a, quad);
    let xf = x.x_field();
    let f1 = (&e / &xf).relabel("rho1");
    let f2 = (&(&prob.p * &(&xf * &xf)) / &(&e * &e)).relabel("rho2");
    Ok(FactorPair { f1, f2, kind: FactorKind::Polya })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrenchReport {
    /// ∫ₐᵇ δ₂ d_α
    pub total: f64,
    /// ∫ over the first tenth of [a, b]
    pub first_decile: f64,
    pub effectively_divergent: bool,
    /// (T, ∫ₐᵀ 1/γ₂ d_α) along the ladder
    pub partial_integrals: Vec<(f64, f64)>,
}

/// Trench factors γ₁ = ρ₁/I, γ₂ = ρ₂ I² with I(t) = ∫ₜᵇ 1/ρ₂ d_α, unless that
/// integral is already effectively divergent (then the Pólya pair is returned).
pub fn trench_factors(
    prob: &SelfAdjointProblem,
    x: &Trajectory,
    a: f64,
    b: f64,
    ladder: &[f64],
    quad: &QuadratureConfig,
) -> Result<(FactorPair, TrenchReport)> {
    let polya = polya_factors(prob, x, a, quad)?;
    let pair = prob.pair.clone();
    let d2 = polya.f2.recip();
    let dens = {
        let (d2, pair) = (d2.clone(), pair.clone());
        move |s: f64| d2.eval(s) / pair.k0(s)
    };
    let total = integrate(&dens, a, b, quad)?;
    let first_decile = integrate(&dens, a, a + 0.1 * (b - a), quad)?;
    let effectively_divergent = total > 1e6 * first_decile;
    let (fp, inv_g2) = if effectively_divergent {
        let g2 = polya.f2.clone();
        (polya, g2.recip())
    } else {
        let q = *quad;
        let dd = dens.clone();
        let tail = ScalarField::new("I", move |t| integrate(&dd, t, b, &q).unwrap_or(f64::NAN));
        let (d2c, pc) = (d2.clone(), pair.clone());
        let tail = tail.with_lazy_deriv(move || -(&d2c / pc.kappa0()));
        let f1 = (&polya.f1 / &tail).relabel("gamma1");
        let f2 = (&polya.f2 * &(&tail * &tail)).relabel("gamma2");
        let beta2 = f2.recip();
        (FactorPair { f1, f2, kind: FactorKind::Trench }, beta2)
    };
    let mut partial_integrals = Vec::new();
    for &t in ladder {
        let v = integrate(|s| inv_g2.eval(s) / pair.k0(s), a, t, quad)?;
        partial_integrals.push((t, v));
    }
    Ok((fp, TrenchReport { total, first_decile, effectively_divergent, partial_integrals }))
}

/// Solution of L y = h through x:
/// y = x y(a)/x(a) + w_a x ∫ₐᵗ e₀²(s,a)/(p x²) d_αs + x ∫ₐᵗ (p x²)⁻¹ ∫ₐˢ x h e₀²(s,σ) d_ασ d_αs,
/// where w_a = p(a) W(x,y)(a).
pub fn variation_of_parameters(
    prob: &SelfAdjointProblem,
    x: &Trajectory,
    y_a: f64,
    w_a: f64,
    a: f64,
    quad: &QuadratureConfig,
) -> Result<Trajectory> {
    check_positive(x)?;
    let i0 = node_index(x, a)?;
    let pair = &prob.pair;
    let grid = x.grid().to_vec();
    let e2 = |s: f64, r: f64| (2.0 * log_e0(pair, s, r, quad).unwrap_or(f64::NAN)).exp();
    // K(s) = ∫ₐˢ x h e₀²(a,σ) d_ασ, so the inner integral is e₀²(s,a) K(s)
    let kdens = |s: f64| x.eval_x(s) * prob.h.eval(s) * e2(a, s) / pair.k0(s);
    let kvals = cumulative(&grid, i0, kdens, quad)?;
    let kslopes: Vec<f64> = grid.iter().map(|&s| kdens(s)).collect();
    let ktr = Trajectory::with_slopes(grid.clone(), kvals.clone(), vec![0.0; grid.len()], kslopes, vec![0.0; grid.len()])?;
    let adens = |s: f64| {
        let xv = x.eval_x(s);
        e2(s, a) / (prob.p.eval(s) * xv * xv * pair.k0(s))
    };
    let bdens = |s: f64| {
        let xv = x.eval_x(s);
        e2(s, a) * ktr.eval_x(s) / (prob.p.eval(s) * xv * xv * pair.k0(s))
    };
    let aint = cumulative(&grid, i0, adens, quad)?;
    let bint = cumulative(&grid, i0, bdens, quad)?;
    let c0 = y_a / x.x()[i0];
    let n = grid.len();
    let (mut y, mut dy) = (vec![0.0; n], vec![0.0; n]);
    for i in 0..n {
        let t = grid[i];
        let phi = c0 + w_a * aint[i] + bint[i];
        let xv = x.x()[i];
        let dphi = (w_a * e2(t, a) + e2(t, a) * kvals[i]) / (prob.p.eval(t) * xv * xv);
        y[i] = xv * phi;
        // D^α[xΦ] = Φ D^α x + x κ₀ Φ′
        dy[i] = phi * x.dax()[i] + xv * dphi;
    }
    prob.trajectory_from_solution(grid, y, dy)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecessiveVerdict {
    URecessive,
    VRecessive,
    Inconclusive,
}

/// Finite-horizon evidence for which of two solutions is recessive. Heuristic.
#[derive(Debug, Clone, PartialEq)]
pub struct RecessiveReport {
    pub ladder: Vec<f64>,
    /// |u/v| at each ladder point
    pub ratios: Vec<f64>,
    /// ∫ₐᵀ e₀²(t,a)/(p u²) d_α along the ladder
    pub integral_u: Vec<f64>,
    pub integral_v: Vec<f64>,
    /// min over the tail of p D^α v / v − p D^α u / u
    pub riccati_gap: f64,
    pub verdict: RecessiveVerdict,
    pub note: String,
    pub heuristic: bool,
}

fn growth(v: &[f64]) -> (bool, bool) {
    let inc: Vec<f64> = v.windows(2).map(|w| w[1] - w[0]).collect();
    let (first, last) = (inc[0], inc[inc.len() - 1]);
    (last >= first, last < 0.5 * first)
}

pub fn classify_recessive_dominant(
    prob: &SelfAdjointProblem,
    u: &Trajectory,
    v: &Trajectory,
    a: f64,
    ladder: &[f64],
    quad: &QuadratureConfig,
) -> Result<RecessiveReport> {
    if ladder.len() < 3 {
        return Err(Error::InvalidArgument("ladder needs at least three horizons".into()));
    }
    let top = ladder[ladder.len() - 1];
    u.check(top)?;
    v.check(top)?;
    let mut report = RecessiveReport {
        ladder: ladder.to_vec(),
        ratios: vec![],
        integral_u: vec![],
        integral_v: vec![],
        riccati_gap: f64::NAN,
        verdict: RecessiveVerdict::Inconclusive,
        note: String::new(),
        heuristic: true,
    };
    let tail_ok = |tr: &Trajectory| {
        let pts: Vec<f64> = tr.grid().iter().copied().filter(|&t| t >= a && t <= top).collect();
        let mx = pts.iter().fold(0.0f64, |m, &t| m.max(tr.eval_x(t).abs()));
        let s0 = tr.eval_x(a).signum();
        pts.iter().all(|&t| {
            let x = tr.eval_x(t);
            x.signum() == s0 && x.abs() > 1e-8 * mx
        })
    };
    if !tail_ok(u) || !tail_ok(v) {
        report.note = "zeros on the tail".into();
        return Ok(report);
    }
    let pair = &prob.pair;
    let dens = |tr: &Trajectory| {
        let tr = tr.clone();
        move |t: f64| {
            let x = tr.eval_x(t);
            (2.0 * log_e0(pair, t, a, quad).unwrap_or(f64::NAN)).exp() / (prob.p.eval(t) * x * x * pair.k0(t))
        }
    };
    let (du, dv) = (dens(u), dens(v));
    for &t in ladder {
        report.ratios.push((u.eval_x(t) / v.eval_x(t)).abs());
        report.integral_u.push(integrate(&du, a, t, quad)?);
        report.integral_v.push(integrate(&dv, a, t, quad)?);
    }
    let t_half = ladder[ladder.len() / 2];
    let gap = u
        .grid()
        .iter()
        .copied()
        .filter(|&t| t >= t_half && t <= top)
        .map(|t| prob.p.eval(t) * (v.eval_dax(t) / v.eval_x(t) - u.eval_dax(t) / u.eval_x(t)))
        .fold(f64::INFINITY, f64::min);
    let gap_max = u
        .grid()
        .iter()
        .copied()
        .filter(|&t| t >= t_half && t <= top)
        .map(|t| prob.p.eval(t) * (v.eval_dax(t) / v.eval_x(t) - u.eval_dax(t) / u.eval_x(t)))
        .fold(f64::NEG_INFINITY, f64::max);
    report.riccati_gap = if gap > 0.0 { gap } else { gap_max };
    let r = &report.ratios;
    let decreasing = r.windows(2).all(|w| w[1] < w[0]) && r[r.len() - 1] < 0.5 * r[0];
    let increasing = r.windows(2).all(|w| w[1] > w[0]) && r[r.len() - 1] > 2.0 * r[0];
    let (u_grows, u_bounded) = growth(&report.integral_u);
    let (v_grows, v_bounded) = growth(&report.integral_v);
    report.verdict = if decreasing && u_grows && v_bounded && gap > 0.0 {
        RecessiveVerdict::URecessive
    } else if increasing && v_grows && u_bounded && gap_max < 0.0 {
        RecessiveVerdict::VRecessive
    } else {
        RecessiveVerdict::Inconclusive
    };
    report.note = "finite-horizon heuristic".into();
    Ok(report)
}

/// e₀(t,s)·∫ₛᵗ 1/p d_α, the Cauchy function when q ≡ 0.
pub fn cauchy_q0(pair: &KappaPair, p: &ScalarField, t: f64, s: f64, quad: &QuadratureConfig) -> Result<f64> {
    let i = integrate(|r| 1.0 / (p.eval(r) * pair.k0(r)), s, t, quad)?;
    Ok(e0(pair, t, s, quad)? * i)
}
