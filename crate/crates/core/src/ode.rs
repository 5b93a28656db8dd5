//! Dormand–Prince 5(4) for the two-component systems used by the solver.

use crate::error::{Error, Result};

pub type State = [f64; 2];

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-9, atol: 1e-11, max_step: f64::INFINITY }
    }
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// difference between the 5th- and 4th-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrate y' = f(t, y) from t0 through each node of `targets` (monotone,
/// all on one side of t0), returning the state at every node.
pub fn integrate_to<F>(f: &F, t0: f64, y0: State, targets: &[f64], opts: &OdeOptions) -> Result<Vec<State>>
where
    F: Fn(f64, &State) -> Result<State>,
{
    let mut out = Vec::with_capacity(targets.len());
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y)?;
    let span = targets.last().map_or(0.0, |e| (e - t0).abs());
    let mut h = opts.max_step.min(span.max(1e-3) * 0.01).max(1e-6);
    for &target in targets {
        let dir = if target >= t { 1.0 } else { -1.0 };
        while (target - t).abs() > 0.0 {
            let remaining = (target - t).abs();
            let mut last = false;
            if h >= remaining {
                h = remaining;
                last = true;
            }
            h = h.min(opts.max_step);
            let hs = dir * h;
            let mut k = [[0.0; 2]; 7];
            k[0] = k1;
            for s in 1..7 {
                let mut ys = y;
                for j in 0..s {
                    ys[0] += hs * A[s][j] * k[j][0];
                    ys[1] += hs * A[s][j] * k[j][1];
                }
                k[s] = f(t + C[s] * hs, &ys)?;
            }
            let mut ynew = y;
            for j in 0..6 {
                ynew[0] += hs * A[6][j] * k[j][0];
                ynew[1] += hs * A[6][j] * k[j][1];
            }
            let mut err = 0.0f64;
            for c in 0..2 {
                let e: f64 = hs * (0..7).map(|j| E[j] * k[j][c]).sum::<f64>();
                let sc = opts.atol + opts.rtol * y[c].abs().max(ynew[c].abs());
                err = err.max((e / sc).abs());
            }
            if !err.is_finite() || !ynew[0].is_finite() || !ynew[1].is_finite() {
                h *= 0.25;
                if h < 1e-14 * t.abs().max(1.0) {
                    return Err(Error::Integrator { t, reason: "non-finite state".into() });
                }
                continue;
            }
            if err <= 1.0 {
                t = if last { target } else { t + hs };
                y = ynew;
                k1 = k[6];
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                if !last {
                    h *= fac;
                } else {
                    h = (h * fac).max(h);
                }
            } else {
                h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                if h < 1e-14 * t.abs().max(1.0) {
                    return Err(Error::Integrator { t, reason: "step size underflow".into() });
                }
            }
        }
        out.push(y);
    }
    Ok(out)
}
