//! Bracketed root finding for the monotone threshold equations.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub fx: f64,
    pub iterations: usize,
}

/// Brent's method on a sign-changing bracket `[a, b]`.
pub fn brent<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, xtol: f64, maxit: usize) -> Result<Root> {
    let (mut xpre, mut xcur) = (a, b);
    let (mut fpre, mut fcur) = (f(xpre), f(xcur));
    if fpre == 0.0 {
        return Ok(Root { x: xpre, fx: 0.0, iterations: 0 });
    }
    if fcur == 0.0 {
        return Ok(Root { x: xcur, fx: 0.0, iterations: 0 });
    }
    if fpre.signum() == fcur.signum() {
        return Err(Error::OutOfDomain(format!(
            "no sign change on [{a}, {b}]: f(a) = {fpre}, f(b) = {fcur}"
        )));
    }
    let (mut xblk, mut fblk) = (0.0, 0.0);
    let (mut spre, mut scur) = (0.0f64, 0.0f64);
    for it in 1..=maxit {
        if fpre != 0.0 && fcur != 0.0 && fpre.signum() != fcur.signum() {
            xblk = xpre;
            fblk = fpre;
            spre = xcur - xpre;
            scur = spre;
        }
        if fblk.abs() < fcur.abs() {
            xpre = xcur;
            xcur = xblk;
            xblk = xpre;
            fpre = fcur;
            fcur = fblk;
            fblk = fpre;
        }
        let delta = 0.5 * (xtol + 4.0 * f64::EPSILON * xcur.abs());
        let sbis = 0.5 * (xblk - xcur);
        if fcur == 0.0 || sbis.abs() < delta {
            return Ok(Root { x: xcur, fx: fcur, iterations: it });
        }
        if spre.abs() > delta && fcur.abs() < fpre.abs() {
            let stry = if xpre == xblk {
                -fcur * (xcur - xpre) / (fcur - fpre)
            } else {
                let dpre = (fpre - fcur) / (xpre - xcur);
                let dblk = (fblk - fcur) / (xblk - xcur);
                -fcur * (fblk * dblk - fpre * dpre) / (dblk * dpre * (fblk - fpre))
            };
            if 2.0 * stry.abs() < spre.abs().min(3.0 * sbis.abs() - delta) {
                spre = scur;
                scur = stry;
            } else {
                spre = sbis;
                scur = sbis;
            }
        } else {
            spre = sbis;
            scur = sbis;
        }
        xpre = xcur;
        fpre = fcur;
        if scur.abs() > delta {
            xcur += scur;
        } else {
            xcur += if sbis > 0.0 { delta } else { -delta };
        }
        fcur = f(xcur);
    }
    Err(Error::NoConvergence { what: "Brent root search".into(), residual: fcur.abs() })
}

/// Plain bisection on a sign-changing bracket; used as an independent oracle.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, iterations: usize) -> f64 {
    let fa = f(a);
    for _ in 0..iterations {
        let mid = 0.5 * (a + b);
        if mid == a || mid == b {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == fa.signum() {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        let r = brent(|x| x * x - 2.0, 0.0, 3.0, 1e-15, 100).unwrap();
        assert!((r.x - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn agrees_with_bisection() {
        let f = |x: f64| x.exp() - 3.0 * x - 0.5;
        let r = brent(f, 1.0, 3.0, 1e-15, 200).unwrap();
        let b = bisect(f, 1.0, 3.0, 200);
        assert!((r.x - b).abs() < 1e-13);
    }

    #[test]
    fn reports_missing_sign_change() {
        assert!(brent(|x| x * x + 1.0, -1.0, 1.0, 1e-12, 50).is_err());
    }
}
