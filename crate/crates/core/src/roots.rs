//! Bracketing root search: a uniform scan for sign changes followed by
//! Brent's method inside each bracket.

/// Brent's method on `[a, b]`. Requires `f(a)` and `f(b)` of opposite sign
/// (or one of them zero). Stops when `|f| <= ftol` or the bracket shrinks
/// below a few ulps.
pub fn brent<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, ftol: f64, max_iter: usize) -> Option<f64> {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return None;
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
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * f64::EPSILON;
        let m = 0.5 * (c - b);
        if fb.abs() <= ftol || m.abs() <= tol {
            return Some(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            // inverse quadratic interpolation, or secant when only two points
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    Some(b)
}

/// Scans `[lo, hi]` in steps of `step` and returns every bracket where `f`
/// changes sign, in ascending order. Evaluation failures split the scan.
pub fn scan_brackets<F: Fn(f64) -> Option<f64>>(f: F, lo: f64, hi: f64, step: f64) -> Vec<(f64, f64)> {
    let n = ((hi - lo) / step).ceil().max(1.0) as usize;
    let mut out = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for k in 0..=n {
        let x = if k == n { hi } else { lo + step * k as f64 };
        let fx = f(x);
        if let (Some((px, pf)), Some(fx)) = (prev, fx) {
            if pf == 0.0 || pf.signum() != fx.signum() {
                out.push((px, x));
            }
        }
        prev = fx.map(|v| (x, v));
    }
    out
}
