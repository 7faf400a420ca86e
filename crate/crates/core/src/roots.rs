//! Bracketed bisection.


use crate::{Error, Result};

/// Stopping rule for [`bisect`]. The search ends once the bracket is
/// narrower than `x_tol` and `|f| <= f_tol`, or either holds at the cap.
#[derive(Debug, Clone, Copy)]
pub struct Stop {
    pub x_tol: f64,
    pub f_tol: f64,
    pub max_iter: usize,
}

/// Root of a continuous `f` with a sign change on `[lo, hi]`.
pub fn bisect<F>(mut f: F, lo: f64, hi: f64, stop: Stop) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    try_bisect(|x| Ok(f(x)), lo, hi, stop)
}

/// [`bisect`] for fallible functions.
pub fn try_bisect<F>(mut f: F, mut lo: f64, mut hi: f64, stop: Stop) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() || f_lo.is_nan() || f_hi.is_nan() {
        return Err(Error::NotBracketed { lo, hi, f_lo, f_hi });
    }
    let mut mid = 0.5 * (lo + hi);
    let mut f_mid = f(mid)?;
    for _ in 0..stop.max_iter {
        if (hi - lo) <= stop.x_tol && f_mid.abs() <= stop.f_tol {
            return Ok(mid);
        }
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
        let next = 0.5 * (lo + hi);
        if next == mid {
            // bracket exhausted at machine resolution
            break;
        }
        mid = next;
        f_mid = f(mid)?;
    }
    if (hi - lo) <= stop.x_tol || f_mid.abs() <= stop.f_tol {
        Ok(mid)
    } else {
        Err(Error::RootNotConverged { iterations: stop.max_iter, root: mid, residual: f_mid })
    }
}
