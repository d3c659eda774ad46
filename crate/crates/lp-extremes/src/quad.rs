//! Adaptive Simpson quadrature for the semi-infinite integrals appearing in
//! the Pickands-regime multipliers.

/// Adaptive Simpson on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn integrates_polynomials_exactly() {
        let f = |x: f64| 3.0 * x * x;
        assert_relative_eq!(adaptive_simpson(&f, 0.0, 2.0, 1e-12), 8.0, epsilon = 1e-10);
    }

    #[test]
    fn integrates_exponential() {
        let f = |x: f64| (-x).exp();
        let v = adaptive_simpson(&f, 0.0, 60.0, 1e-12);
        assert_relative_eq!(v, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn integrates_gaussian_two_sided() {
        let f = |x: f64| (-x * x).exp();
        let v = adaptive_simpson(&f, -8.0, 8.0, 1e-12);
        assert_relative_eq!(v, std::f64::consts::PI.sqrt(), epsilon = 1e-10);
    }
}
