//! Adaptive Dormand-Prince 5(4) integration for the small ODE systems
//! behind the homogeneous profile pair.  Steps are clamped to land on
//! each requested output time exactly; integration direction follows the
//! sign of the targets relative to the start.

use crate::error::{Result, VortexError};

/// Dormand-Prince 5(4) integrator with standard PI-free step control.
#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Dopri5 {
    fn default() -> Dopri5 {
        Dopri5 {
            rtol: 1e-12,
            atol: 1e-30,
            max_steps: 2_000_000,
        }
    }
}

const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
/// Difference between the 5th- and 4th-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

impl Dopri5 {
    /// Integrates y' = rhs(t, y) from t0, returning the state at each
    /// target time.  Targets must be ordered monotonically away from t0.
    pub fn solve<F>(&self, rhs: F, t0: f64, y0: &[f64], targets: &[f64]) -> Result<Vec<Vec<f64>>>
    where
        F: Fn(f64, &[f64], &mut [f64]),
    {
        let dim = y0.len();
        let mut out = Vec::with_capacity(targets.len());
        if targets.is_empty() {
            return Ok(out);
        }
        let dir = (targets[targets.len() - 1] - t0).signum();
        if dir == 0.0 {
            for _ in targets {
                out.push(y0.to_vec());
            }
            return Ok(out);
        }

        let mut t = t0;
        let mut y = y0.to_vec();
        let mut k: Vec<Vec<f64>> = (0..7).map(|_| vec![0.0; dim]).collect();
        rhs(t, &y, &mut k[0]);
        let mut h = dir * 1e-4;
        let mut steps = 0usize;

        for &target in targets {
            if (target - t0) * dir < -1e-12 {
                return Err(VortexError::domain(
                    "output times must lie along the integration direction",
                ));
            }
            while (target - t) * dir > 1e-14 * (1.0 + t.abs()) {
                steps += 1;
                if steps > self.max_steps {
                    return Err(VortexError::numeric(format!(
                        "step limit {} exceeded at t = {t:.6e} (h = {h:.3e})",
                        self.max_steps
                    )));
                }
                if (t + h - target) * dir > 0.0 {
                    h = target - t;
                }

                // Stage evaluations; the last stage lands on the
                // 5th-order solution itself (first-same-as-last pair).
                let mut ytmp = vec![0.0; dim];
                for s in 0..6 {
                    for i in 0..dim {
                        let mut acc = 0.0;
                        for (j, kj) in k.iter().enumerate().take(s + 1) {
                            acc += A[s][j] * kj[i];
                        }
                        ytmp[i] = y[i] + h * acc;
                    }
                    let stage = ytmp.clone();
                    rhs(t + C[s] * h, &stage, &mut k[s + 1]);
                }
                let ynew = ytmp;

                let mut err: f64 = 0.0;
                for i in 0..dim {
                    let mut e = 0.0;
                    for (j, kj) in k.iter().enumerate() {
                        e += E[j] * kj[i];
                    }
                    e *= h;
                    let scale = self.atol + self.rtol * y[i].abs().max(ynew[i].abs());
                    err += (e / scale) * (e / scale);
                }
                err = (err / dim as f64).sqrt();

                if err <= 1.0 {
                    t += h;
                    y = ynew;
                    k[0] = k[6].clone();
                }
                let factor = if err > 0.0 {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                } else {
                    5.0
                };
                h *= factor;
                if h.abs() < 1e-15 * (1.0 + t.abs()) {
                    return Err(VortexError::numeric(format!(
                        "step size underflow at t = {t:.6e}"
                    )));
                }
            }
            out.push(y.clone());
        }
        Ok(out)
    }
}
