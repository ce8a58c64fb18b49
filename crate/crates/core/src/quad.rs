//! Composite Simpson quadrature over sampled points.
//!
//! Handles non-uniform spacing and an odd interval count by integrating the
//! exact quadratic through each consecutive point triple.

/// Integrates `ys` over `xs` (strictly increasing, same length, >= 1 point).
pub fn simpson(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    if n == 2 {
        return 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]);
    }
    let mut total = 0.0;
    let mut i = 0;
    while i + 2 < n {
        total += quadratic_piece(&xs[i..i + 3], &ys[i..i + 3], xs[i], xs[i + 2]);
        i += 2;
    }
    if i + 1 < n {
        // odd interval count: close with the quadratic through the last triple
        total += quadratic_piece(&xs[n - 3..n], &ys[n - 3..n], xs[n - 2], xs[n - 1]);
    }
    total
}

/// Exact integral of the interpolating quadratic through three points over `[p, q]`.
fn quadratic_piece(x: &[f64], y: &[f64], p: f64, q: f64) -> f64 {
    // work relative to the middle node; the cubic antiderivative evaluated at
    // absolute coordinates cancels catastrophically far from the origin
    let c = x[1];
    let x = [x[0] - c, 0.0, x[2] - c];
    let (p, q) = (p - c, q - c);
    let mut acc = 0.0;
    for i in 0..3 {
        let (a, b) = match i {
            0 => (x[1], x[2]),
            1 => (x[0], x[2]),
            _ => (x[0], x[1]),
        };
        let denom = (x[i] - a) * (x[i] - b);
        // antiderivative of (x-a)(x-b)
        let prim = |t: f64| t * t * t / 3.0 - (a + b) * t * t / 2.0 + a * b * t;
        acc += y[i] * (prim(q) - prim(p)) / denom;
    }
    acc
}
