use crate::error::{Error, Result};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Tolerances for adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_depth: u32,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { abs_tol: 1e-10, rel_tol: 1e-8, max_depth: 40 }
    }
}

impl QuadratureConfig {
    pub fn new(abs_tol: f64, rel_tol: f64, max_depth: u32) -> Result<Self> {
        if !(abs_tol > 0.0 && rel_tol > 0.0 && max_depth > 0) {
            return Err(Error::InvalidArgument("quadrature tolerances must be positive".into()));
        }
        Ok(QuadratureConfig { abs_tol, rel_tol, max_depth })
    }

    /// Tight settings used where the exponent feeds an exponential.
    pub fn tight() -> Self {
        QuadratureConfig { abs_tol: 1e-14, rel_tol: 1e-13, max_depth: 40 }
    }
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

struct Panel {
    a: f64,
    b: f64,
    val: f64,
    err: f64,
    depth: u32,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> Ordering {
        self.err.total_cmp(&o.err)
    }
}

/// One 15-point Kronrod panel: (value, error estimate, roundoff floor).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<(f64, f64, f64)> {
    let c = 0.5 * (a + b);
    let hl = 0.5 * (b - a);
    let fc = f(c);
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    let mut resk = WGK[7] * fc;
    let mut resg = WG[3] * fc;
    let mut resabs = resk.abs();
    for j in 0..7 {
        let dx = hl * XGK[j];
        let (f1, f2) = (f(c - dx), f(c + dx));
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    if !resk.is_finite() {
        let bad = std::iter::once(c)
            .chain((0..7).flat_map(|j| [c - hl * XGK[j], c + hl * XGK[j]]))
            .find(|&x| !f(x).is_finite())
            .unwrap_or(c);
        return Err(Error::NonFinite { what: "integrand".into(), t: bad });
    }
    let mean = 0.5 * resk;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let hla = hl.abs();
    let val = resk * hl;
    resabs *= hla;
    resasc *= hla;
    let mut err = ((resk - resg) * hl).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * resabs;
    Ok((val, err.max(floor), floor))
}

/// Adaptive Gauss–Kronrod integral of f over [a, b]; b < a gives the negated integral.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<f64> {
    integrate_with_breaks(f, &[a, b], cfg)
}

/// As [`integrate`], over consecutive breakpoints `pts` (monotone in either direction).
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(f: F, pts: &[f64], cfg: &QuadratureConfig) -> Result<f64> {
    if pts.len() < 2 {
        return Ok(0.0);
    }
    let (a, b) = (pts[0], pts[pts.len() - 1]);
    if a == b {
        return Ok(0.0);
    }
    let mut heap = BinaryHeap::new();
    let mut done_val = 0.0;
    let mut done_err = 0.0;
    for w in pts.windows(2) {
        if w[0] == w[1] {
            continue;
        }
        let (val, err, floor) = gk15(&f, w[0], w[1])?;
        if err <= floor {
            done_val += val;
            done_err += err;
        } else {
            heap.push(Panel { a: w[0], b: w[1], val, err, depth: 0 });
        }
    }
    let mut frozen_val = 0.0;
    let mut frozen_err = 0.0;
    let max_panels = 20_000;
    let mut panels = heap.len();
    loop {
        let live_val: f64 = heap.iter().map(|p| p.val).sum();
        let live_err: f64 = heap.iter().map(|p| p.err).sum();
        let total = done_val + frozen_val + live_val;
        let tol = cfg.abs_tol.max(cfg.rel_tol * total.abs());
        if live_err + frozen_err <= tol {
            return Ok(total);
        }
        let Some(p) = heap.pop() else {
            // Only panels that cannot be refined remain.
            return Err(Error::Quadrature { a, b, err: frozen_err });
        };
        if p.depth >= cfg.max_depth || panels >= max_panels {
            frozen_val += p.val;
            frozen_err += p.err;
            continue;
        }
        let m = 0.5 * (p.a + p.b);
        for (lo, hi) in [(p.a, m), (m, p.b)] {
            let (val, err, floor) = gk15(&f, lo, hi)?;
            if err <= floor {
                done_val += val;
                done_err += err;
            } else {
                heap.push(Panel { a: lo, b: hi, val, err, depth: p.depth + 1 });
                panels += 1;
            }
        }
        let _ = done_err;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let v = integrate(|t| 3.0 * t * t, 0.0, 2.0, &QuadratureConfig::default()).unwrap();
        assert!((v - 8.0).abs() < 1e-13);
    }

    #[test]
    fn reversed_limits() {
        let v = integrate(f64::exp, 1.0, 0.0, &QuadratureConfig::tight()).unwrap();
        assert!((v + (1f64.exp() - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn endpoint_singularity() {
        let cfg = QuadratureConfig::new(1e-7, 1e-7, 60).unwrap();
        let v = integrate(|t: f64| 1.0 / t.sqrt(), 0.0, 1.0, &cfg).unwrap();
        assert!((v - 2.0).abs() < 1e-6);
    }

    #[test]
    fn kink_with_breakpoint() {
        let v = integrate_with_breaks(|t: f64| (t - 0.3).abs(), &[0.0, 0.3, 1.0], &QuadratureConfig::tight()).unwrap();
        assert!((v - (0.045 + 0.245)).abs() < 1e-14);
    }

    #[test]
    fn nan_is_reported() {
        assert!(integrate(|t: f64| (t - 2.0).ln(), 0.0, 1.0, &QuadratureConfig::default()).is_err());
    }
}
