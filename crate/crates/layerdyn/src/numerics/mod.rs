//! Small numeric kernels shared by the domain modules: adaptive
//! Gauss-Legendre quadrature, bracketed root finding, an embedded
//! Runge-Kutta 5(4) pair, and high-order finite-difference stencils.

pub mod quad;
pub mod rk;
pub mod root;
pub mod stencil;

/// Composite trapezoid rule on a uniform grid with spacing `dx`.
pub fn trapezoid(field: &[f64], dx: f64) -> f64 {
    debug_assert!(field.len() >= 2);
    let inner: f64 = field[1..field.len() - 1].iter().sum();
    dx * (inner + 0.5 * (field[0] + field[field.len() - 1]))
}

/// Record stamps for a run of length `t_end` sampled every `record_dt`:
/// the interior multiples of `record_dt`, then `t_end` itself (so the final
/// state is always recorded, and a cadence longer than the run still yields
/// one closing record).
pub fn record_stamps(t_end: f64, record_dt: f64) -> Vec<f64> {
    debug_assert!(t_end > 0.0 && record_dt > 0.0);
    let mut stamps = Vec::new();
    let mut k = 1usize;
    loop {
        let t = k as f64 * record_dt;
        if t >= t_end * (1.0 - 1e-12) {
            break;
        }
        stamps.push(t);
        k += 1;
    }
    stamps.push(t_end);
    stamps
}

/// Trapezoid rule applied to `map(x)` without materialising the mapped field.
pub fn trapezoid_map(field: &[f64], dx: f64, map: impl Fn(f64) -> f64) -> f64 {
    debug_assert!(field.len() >= 2);
    let last = field.len() - 1;
    let inner: f64 = field[1..last].iter().map(|&x| map(x)).sum();
    dx * (inner + 0.5 * (map(field[0]) + map(field[last])))
}
