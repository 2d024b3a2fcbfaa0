//! High-order centered finite-difference stencils on uniform grids with
//! even-reflection (zero-flux) boundary handling.
//!
//! Fields produced in this crate satisfy zero Neumann conditions at both
//! walls, so the even extension `u(-x) = u(x)`, `u(2 - x) = u(x)` is smooth
//! and the centered stencils keep their full interior order at the
//! boundaries.

/// 8th-order centered first-derivative weights for offsets 1..=4 (the
/// antisymmetric half; offset 0 has weight zero).
const D1_W: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];

/// 8th-order centered second-derivative weights for offsets 0..=4.
const D2_W: [f64; 5] = [
    -205.0 / 72.0,
    8.0 / 5.0,
    -1.0 / 5.0,
    8.0 / 315.0,
    -1.0 / 560.0,
];

/// Mirror an out-of-range index back into `0..n` by even reflection about
/// the endpoint samples (`-j -> j`, `n-1+j -> n-1-j`).
fn reflect(i: isize, n: usize) -> usize {
    let last = (n - 1) as isize;
    let mut j = i;
    // One reflection suffices for stencils half-widths << n, but loop to be safe.
    while j < 0 || j > last {
        if j < 0 {
            j = -j;
        } else {
            j = 2 * last - j;
        }
    }
    j as usize
}

/// 8th-order first derivative of a uniformly sampled field, even-reflected
/// at both ends. Output has the same length as the input.
pub fn gradient_order8_reflect(field: &[f64], dx: f64, out: &mut [f64]) {
    let n = field.len();
    assert!(n >= 9, "need at least 9 samples for the 8th-order stencil");
    assert_eq!(out.len(), n);
    for (i, slot) in out.iter_mut().enumerate() {
        let ii = i as isize;
        let mut acc = 0.0;
        for (m, w) in D1_W.iter().enumerate() {
            let off = (m + 1) as isize;
            acc += w * (field[reflect(ii + off, n)] - field[reflect(ii - off, n)]);
        }
        *slot = acc / dx;
    }
}

/// 8th-order second derivative of a uniformly sampled field, even-reflected
/// at both ends.
pub fn second_derivative_order8_reflect(field: &[f64], dx: f64, out: &mut [f64]) {
    let n = field.len();
    assert!(n >= 9, "need at least 9 samples for the 8th-order stencil");
    assert_eq!(out.len(), n);
    let inv_dx2 = 1.0 / (dx * dx);
    for (i, slot) in out.iter_mut().enumerate() {
        let ii = i as isize;
        let mut acc = D2_W[0] * field[i];
        for (m, w) in D2_W.iter().enumerate().skip(1) {
            let off = m as isize;
            acc += w * (field[reflect(ii + off, n)] + field[reflect(ii - off, n)]);
        }
        *slot = acc * inv_dx2;
    }
}
