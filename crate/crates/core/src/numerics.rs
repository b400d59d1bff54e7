//! Small scalar solvers shared by the physics modules.

use crate::error::{Error, Result};

/// Bisection on a sign-changing bracket `[lo, hi]`.
///
/// Iterates until the bracket is narrower than `xtol` (absolute) or the
/// midpoint no longer moves in floating point.
pub fn bisect<F>(f: F, mut lo: f64, mut hi: f64, xtol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if !(f_lo.is_finite() && f_hi.is_finite()) || f_lo.signum() == f_hi.signum() {
        return Err(Error::Numerical(format!(
            "no sign change on [{lo:e}, {hi:e}]: f = ({f_lo:e}, {f_hi:e})"
        )));
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= xtol || mid == lo || mid == hi {
            return Ok(mid);
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// All sign changes of `f` on `[lo, hi]`, located by scanning `samples`
/// uniform intervals and bisecting each bracket. Roots are ascending.
///
/// Tangential roots that do not change sign are missed unless a sample
/// lands on them exactly.
pub fn find_roots<F>(f: F, lo: f64, hi: f64, samples: usize, xtol: f64) -> Result<Vec<f64>>
where
    F: Fn(f64) -> f64,
{
    if !(hi > lo) || samples == 0 {
        return Err(Error::Numerical(format!(
            "invalid root scan interval [{lo:e}, {hi:e}] with {samples} samples"
        )));
    }
    let step = (hi - lo) / samples as f64;
    let mut roots: Vec<f64> = Vec::new();
    let mut x_prev = lo;
    let mut f_prev = f(lo);
    if f_prev == 0.0 {
        roots.push(lo);
    }
    for i in 1..=samples {
        let x = if i == samples { hi } else { lo + step * i as f64 };
        let fx = f(x);
        if fx == 0.0 {
            roots.push(x);
        } else if f_prev != 0.0 && fx.signum() != f_prev.signum() {
            roots.push(bisect(&f, x_prev, x, xtol)?);
        }
        x_prev = x;
        f_prev = fx;
    }
    Ok(roots)
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
/// The endpoints are compared as well, so a monotone `f` returns its
/// boundary maximum.
pub fn golden_max<F>(f: F, lo: f64, hi: f64, xtol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > xtol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    let mut best = (mid, f(mid));
    for x in [lo, hi] {
        let fx = f(x);
        if fx > best.1 {
            best = (x, fx);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn bisect_rejects_same_sign() {
        assert!(matches!(
            bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12),
            Err(Error::Numerical(_))
        ));
    }

    #[test]
    fn scan_finds_all_cubic_roots() {
        let roots = find_roots(|x| (x - 1.0) * (x - 2.0) * (x - 3.5), 0.0, 4.0, 97, 1e-13).unwrap();
        assert_eq!(roots.len(), 3);
        for (r, e) in roots.iter().zip([1.0, 2.0, 3.5]) {
            assert!((r - e).abs() < 1e-12);
        }
    }

    #[test]
    fn golden_finds_parabola_peak_and_boundary() {
        let (x, fx) = golden_max(|x| -(x - 0.3) * (x - 0.3), 0.0, 1.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-8);
        assert!(fx.abs() < 1e-15);
        let (x, _) = golden_max(|x| x, 0.0, 1.0, 1e-10);
        assert_eq!(x, 1.0);
    }
}
