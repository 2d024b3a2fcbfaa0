//! Bracketed scalar root finding (Brent's method).

/// Root finder failure modes.
#[derive(Debug, Clone, PartialEq)]
pub enum RootError {
    /// `f(a)` and `f(b)` have the same sign.
    NoBracket { a: f64, b: f64, fa: f64, fb: f64 },
    /// The iteration cap was reached before the interval shrank to tolerance.
    TooManyIterations { best: f64 },
}

impl std::fmt::Display for RootError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RootError::NoBracket { a, b, fa, fb } => write!(
                f,
                "no sign change on bracket [{a:e}, {b:e}] (f = {fa:e}, {fb:e})"
            ),
            RootError::TooManyIterations { best } => {
                write!(f, "root iteration cap reached near {best:e}")
            }
        }
    }
}

impl std::error::Error for RootError {}

/// Brent's method: inverse-quadratic / secant steps with a bisection
/// safeguard. Converges once the bracket width falls below
/// `xtol_abs + xtol_rel * |x|`.
pub fn brent(
    mut f: impl FnMut(f64) -> f64,
    a0: f64,
    b0: f64,
    xtol_abs: f64,
    xtol_rel: f64,
    max_iter: usize,
) -> Result<f64, RootError> {
    let mut a = a0;
    let mut b = b0;
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(RootError::NoBracket { a, b, fa, fb });
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * (xtol_abs + xtol_rel * b.abs());
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            // Attempt inverse quadratic interpolation (secant if a == c).
            let s = fb / fa;
            let (mut p, mut q) = if a == c {
                (2.0 * xm * s, 1.0 - s)
            } else {
                let q0 = fa / fc;
                let r = fb / fc;
                (
                    s * (2.0 * xm * q0 * (q0 - r) - (b - a) * (r - 1.0)),
                    (q0 - 1.0) * (r - 1.0) * (s - 1.0),
                )
            };
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        if d.abs() > tol {
            b += d;
        } else {
            b += tol.copysign(xm);
        }
        fb = f(b);
    }
    Err(RootError::TooManyIterations { best: b })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_cubic_root() {
        let r = brent(|x| x * x * x - 2.0, 0.0, 2.0, 1e-14, 1e-14, 100).unwrap();
        assert!((r - 2f64.powf(1.0 / 3.0)).abs() < 1e-13);
    }

    #[test]
    fn rejects_unbracketed_input() {
        let e = brent(|x| x * x + 1.0, -1.0, 1.0, 1e-12, 0.0, 100);
        assert!(matches!(e, Err(RootError::NoBracket { .. })));
    }

    #[test]
    fn handles_flat_then_steep() {
        let r = brent(|x| (x - 0.75).powi(3), 0.0, 1.0, 1e-15, 0.0, 200).unwrap();
        assert!((r - 0.75).abs() < 1e-5);
    }
}
