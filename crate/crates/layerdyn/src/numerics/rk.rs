//! Adaptive Dormand-Prince 5(4) integration with dense record times and a
//! stop-event hook.

/// Why the integration loop ended.
#[derive(Debug, Clone, PartialEq)]
pub enum Halt {
    /// Reached `t_end`.
    Completed,
    /// The stop-event callback fired after an accepted step.
    Event { t: f64 },
}

/// Adaptive stepping failed: the controller drove the step size below the
/// resolvable limit (typically an ODE singularity such as gaps closing).
#[derive(Debug, Clone, PartialEq)]
pub struct StepSizeUnderflow {
    pub t: f64,
    pub dt: f64,
}

impl std::fmt::Display for StepSizeUnderflow {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "step size underflow at t = {:e} (dt = {:e})", self.t, self.dt)
    }
}

impl std::error::Error for StepSizeUnderflow {}

/// Options for [`integrate_adaptive`].
pub struct AdaptiveOptions {
    /// Relative error tolerance per step.
    pub rtol: f64,
    /// Absolute error tolerance per step.
    pub atol: f64,
    /// Initial step size guess (positive).
    pub dt0: f64,
    /// Hard cap on the step size (e.g. to not skip over record times too
    /// coarsely); `f64::INFINITY` disables it.
    pub dt_max: f64,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        AdaptiveOptions {
            rtol: 1e-9,
            atol: 1e-14,
            dt0: 1e-4,
            dt_max: f64::INFINITY,
        }
    }
}

// Dormand-Prince coefficients (the classic DOPRI5 tableau).
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B5: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrate `dy/dt = rhs(t, y)` from `t0` to `t_end` with adaptive
/// Dormand-Prince 5(4) steps.
///
/// The solver lands exactly on every time in `record_times` (which must be
/// strictly increasing and lie in `(t0, t_end]`) and calls `record(t, y)`
/// there, as well as at `t0` before the first step. After every accepted
/// step, `stop_event(t, y)` is consulted; returning `true` halts the
/// integration with [`Halt::Event`].
#[allow(clippy::too_many_arguments)]
pub fn integrate_adaptive(
    mut rhs: impl FnMut(f64, &[f64], &mut [f64]),
    t0: f64,
    t_end: f64,
    y0: &[f64],
    record_times: &[f64],
    opts: &AdaptiveOptions,
    mut record: impl FnMut(f64, &[f64]),
    mut stop_event: impl FnMut(f64, &[f64]) -> bool,
) -> Result<(Vec<f64>, Halt), StepSizeUnderflow> {
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut t = t0;
    record(t, &y);
    if stop_event(t, &y) {
        return Ok((y, Halt::Event { t }));
    }

    let mut k = vec![vec![0.0; n]; 7];
    let mut y_stage = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut dt = opts.dt0.min(opts.dt_max).min(t_end - t0);
    let mut next_record = 0usize;
    rhs(t, &y, &mut k[0]);

    while t < t_end {
        // Aim the step at the next record time or the end, whichever is first.
        let mut target = t_end;
        if next_record < record_times.len() {
            target = target.min(record_times[next_record]);
        }
        let mut h = dt.min(opts.dt_max);
        let mut hit_target = false;
        if t + h >= target - 1e-14 * target.abs().max(1.0) {
            h = target - t;
            hit_target = true;
        }
        if h <= 1e-14 * t.abs().max(1.0) {
            return Err(StepSizeUnderflow { t, dt: h });
        }

        // Stage evaluations.
        for i in 0..n {
            y_stage[i] = y[i] + h * A2[0] * k[0][i];
        }
        rhs(t + C[0] * h, &y_stage, &mut k[1]);
        for i in 0..n {
            y_stage[i] = y[i] + h * (A3[0] * k[0][i] + A3[1] * k[1][i]);
        }
        rhs(t + C[1] * h, &y_stage, &mut k[2]);
        for i in 0..n {
            y_stage[i] = y[i] + h * (A4[0] * k[0][i] + A4[1] * k[1][i] + A4[2] * k[2][i]);
        }
        rhs(t + C[2] * h, &y_stage, &mut k[3]);
        for i in 0..n {
            y_stage[i] = y[i]
                + h * (A5[0] * k[0][i] + A5[1] * k[1][i] + A5[2] * k[2][i] + A5[3] * k[3][i]);
        }
        rhs(t + C[3] * h, &y_stage, &mut k[4]);
        for i in 0..n {
            y_stage[i] = y[i]
                + h * (A6[0] * k[0][i]
                    + A6[1] * k[1][i]
                    + A6[2] * k[2][i]
                    + A6[3] * k[3][i]
                    + A6[4] * k[4][i]);
        }
        rhs(t + C[4] * h, &y_stage, &mut k[5]);
        for i in 0..n {
            y_new[i] = y[i]
                + h * (B5[0] * k[0][i]
                    + B5[2] * k[2][i]
                    + B5[3] * k[3][i]
                    + B5[4] * k[4][i]
                    + B5[5] * k[5][i]);
        }
        rhs(t + h, &y_new, &mut k[6]);

        // Embedded 4th-order error estimate, RMS-scaled.
        let mut err_sq = 0.0;
        for i in 0..n {
            let y4 = y[i]
                + h * (B4[0] * k[0][i]
                    + B4[2] * k[2][i]
                    + B4[3] * k[3][i]
                    + B4[4] * k[4][i]
                    + B4[5] * k[5][i]
                    + B4[6] * k[6][i]);
            let sc = opts.atol + opts.rtol * y_new[i].abs().max(y[i].abs());
            let e = (y_new[i] - y4) / sc;
            err_sq += e * e;
        }
        let err = (err_sq / n as f64).sqrt();

        if err <= 1.0 {
            // Accept; snap onto the target exactly when the step was aimed at
            // it, so record stamps compare equal across runs.
            t = if hit_target { target } else { t + h };
            std::mem::swap(&mut y, &mut y_new);
            k.swap(0, 6); // FSAL: k7 of this step is k1 of the next.
            if hit_target && next_record < record_times.len() && target == record_times[next_record]
            {
                record(t, &y);
                next_record += 1;
            }
            if stop_event(t, &y) {
                return Ok((y, Halt::Event { t }));
            }
        } else {
            // Rejected: k[0] still holds the slope at t.
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        dt = (h * factor).min(opts.dt_max);
    }

    Ok((y, Halt::Completed))
}
