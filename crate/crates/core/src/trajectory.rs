use crate::error::{Error, Result};
use crate::field::ScalarField;
use std::sync::Arc;

/// A sampled solution: grid, x and D^α x, with classical slopes of both
/// channels for cubic Hermite interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    grid: Vec<f64>,
    x: Vec<f64>,
    dax: Vec<f64>,
    dx: Vec<f64>,
    ddax: Vec<f64>,
}

fn fd_slopes(g: &[f64], y: &[f64]) -> Vec<f64> {
    let n = g.len();
    if n == 2 {
        let s = (y[1] - y[0]) / (g[1] - g[0]);
        return vec![s, s];
    }
    let three = |i0: usize, i1: usize, i2: usize, at: usize| {
        // derivative of the quadratic through three points, evaluated at g[at]
        let (x0, x1, x2) = (g[i0], g[i1], g[i2]);
        let t = g[at];
        y[i0] * ((t - x1) + (t - x2)) / ((x0 - x1) * (x0 - x2))
            + y[i1] * ((t - x0) + (t - x2)) / ((x1 - x0) * (x1 - x2))
            + y[i2] * ((t - x0) + (t - x1)) / ((x2 - x0) * (x2 - x1))
    };
    (0..n)
        .map(|i| {
            if i == 0 {
                three(0, 1, 2, 0)
            } else if i == n - 1 {
                three(n - 3, n - 2, n - 1, n - 1)
            } else {
                three(i - 1, i, i + 1, i)
            }
        })
        .collect()
}

impl Trajectory {
    /// Build from samples and classical slopes of x and D^α x.
    pub fn with_slopes(grid: Vec<f64>, x: Vec<f64>, dax: Vec<f64>, dx: Vec<f64>, ddax: Vec<f64>) -> Result<Self> {
        let n = grid.len();
        if n < 2 || x.len() != n || dax.len() != n || dx.len() != n || ddax.len() != n {
            return Err(Error::InvalidArgument("trajectory channels need equal length >= 2".into()));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("trajectory grid must be strictly increasing".into()));
        }
        Ok(Trajectory { grid, x, dax, dx, ddax })
    }

    /// Build from samples only; slopes come from three-point differences.
    pub fn from_samples(grid: Vec<f64>, x: Vec<f64>, dax: Vec<f64>) -> Result<Self> {
        if grid.len() < 2 || x.len() != grid.len() || dax.len() != grid.len() {
            return Err(Error::InvalidArgument("trajectory channels need equal length >= 2".into()));
        }
        let dx = fd_slopes(&grid, &x);
        let ddax = fd_slopes(&grid, &dax);
        Trajectory::with_slopes(grid, x, dax, dx, ddax)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }
    pub fn x(&self) -> &[f64] {
        &self.x
    }
    pub fn dax(&self) -> &[f64] {
        &self.dax
    }
    pub fn len(&self) -> usize {
        self.grid.len()
    }
    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }
    pub fn span(&self) -> (f64, f64) {
        (self.grid[0], self.grid[self.grid.len() - 1])
    }

    pub fn contains(&self, t: f64) -> bool {
        let (lo, hi) = self.span();
        let tol = 1e-12 * (hi - lo).abs().max(1.0);
        t >= lo - tol && t <= hi + tol
    }

    pub fn check(&self, t: f64) -> Result<()> {
        if self.contains(t) {
            Ok(())
        } else {
            let (lo, hi) = self.span();
            Err(Error::OutOfSpan { t, lo, hi })
        }
    }

    fn locate(&self, t: f64) -> usize {
        let n = self.grid.len();
        match self.grid.binary_search_by(|g| g.total_cmp(&t)) {
            Ok(i) => i.min(n - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(n - 2),
        }
    }

    fn hermite(&self, y: &[f64], m: &[f64], t: f64) -> (f64, f64) {
        if let Ok(i) = self.grid.binary_search_by(|g| g.total_cmp(&t)) {
            return (y[i], m[i]);
        }
        let i = self.locate(t);
        let (t0, t1) = (self.grid[i], self.grid[i + 1]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let (s2, s3) = (s * s, s * s * s);
        let v = (2.0 * s3 - 3.0 * s2 + 1.0) * y[i]
            + (s3 - 2.0 * s2 + s) * h * m[i]
            + (-2.0 * s3 + 3.0 * s2) * y[i + 1]
            + (s3 - s2) * h * m[i + 1];
        let d = ((6.0 * s2 - 6.0 * s) * y[i] + (6.0 * s - 6.0 * s2) * y[i + 1]) / h
            + (3.0 * s2 - 4.0 * s + 1.0) * m[i]
            + (3.0 * s2 - 2.0 * s) * m[i + 1];
        (v, d)
    }

    /// Interpolated x(t). Outside the span the end cubic is extended.
    pub fn eval_x(&self, t: f64) -> f64 {
        self.hermite(&self.x, &self.dx, t).0
    }
    /// Interpolated D^α x(t).
    pub fn eval_dax(&self, t: f64) -> f64 {
        self.hermite(&self.dax, &self.ddax, t).0
    }
    /// Classical derivative of the x interpolant.
    pub fn slope_x(&self, t: f64) -> f64 {
        self.hermite(&self.x, &self.dx, t).1
    }
    /// Classical derivative of the D^α x interpolant.
    pub fn slope_dax(&self, t: f64) -> f64 {
        self.hermite(&self.dax, &self.ddax, t).1
    }

    /// x as a field whose derivative is the interpolant's derivative.
    pub fn x_field(&self) -> ScalarField {
        let a = Arc::new(self.clone());
        let b = a.clone();
        let d = ScalarField::new("x'", move |t| b.slope_x(t));
        ScalarField::new("x", move |t| a.eval_x(t)).with_deriv(d)
    }

    /// D^α x as a field whose derivative is the interpolant's derivative.
    pub fn dax_field(&self) -> ScalarField {
        let a = Arc::new(self.clone());
        let b = a.clone();
        let d = ScalarField::new("(Dax)'", move |t| b.slope_dax(t));
        ScalarField::new("Dax", move |t| a.eval_dax(t)).with_deriv(d)
    }

    /// Σ cᵢ·trajᵢ on the grid of the first term (others are interpolated).
    pub fn combine(terms: &[(f64, &Trajectory)]) -> Result<Trajectory> {
        let first = terms.first().ok_or_else(|| Error::InvalidArgument("empty combination".into()))?.1;
        let g = first.grid.clone();
        let n = g.len();
        let (mut x, mut dax, mut dx, mut ddax) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        for &(c, tr) in terms {
            let same = tr.grid == g;
            for i in 0..n {
                let (xv, xs, dv, ds) = if same {
                    (tr.x[i], tr.dx[i], tr.dax[i], tr.ddax[i])
                } else {
                    let (xv, xs) = tr.hermite(&tr.x, &tr.dx, g[i]);
                    let (dv, ds) = tr.hermite(&tr.dax, &tr.ddax, g[i]);
                    (xv, xs, dv, ds)
                };
                x[i] += c * xv;
                dx[i] += c * xs;
                dax[i] += c * dv;
                ddax[i] += c * ds;
            }
        }
        Trajectory::with_slopes(g, x, dax, dx, ddax)
    }

    pub fn scaled(&self, c: f64) -> Trajectory {
        let m = |v: &Vec<f64>| v.iter().map(|a| a * c).collect::<Vec<_>>();
        Trajectory { grid: self.grid.clone(), x: m(&self.x), dax: m(&self.dax), dx: m(&self.dx), ddax: m(&self.ddax) }
    }

    /// max |x| over the grid.
    pub fn max_abs_x(&self) -> f64 {
        self.x.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Sample the interpolant of both channels on a new grid inside the span.
    pub fn resample(&self, grid: Vec<f64>) -> Result<Trajectory> {
        for &t in &grid {
            self.check(t)?;
        }
        let mut x = Vec::with_capacity(grid.len());
        let (mut dax, mut dx, mut ddax) = (Vec::new(), Vec::new(), Vec::new());
        for &t in &grid {
            let (a, b) = self.hermite(&self.x, &self.dx, t);
            let (c, d) = self.hermite(&self.dax, &self.ddax, t);
            x.push(a);
            dx.push(b);
            dax.push(c);
            ddax.push(d);
        }
        Trajectory::with_slopes(grid, x, dax, dx, ddax)
    }
}
