//! Adaptive quadrature: a global Gauss–Kronrod (7, 15) integrator for the
//! performance integrals and an adaptive Simpson rule for cap areas.

use alloc::vec::Vec;

#[allow(unused_imports)] // inherent float methods shadow it whenever std is linked
use num_traits::Float;

use crate::{Error, Result};

/// Error target for one integration. The integrator stops once its error
/// estimate is at most `max(abs, rel * |result|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_subdivisions: usize,
}

impl Tolerance {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Tolerance { abs, rel, max_subdivisions: 2000 }
    }

    /// Tolerance for a nested integral one level deeper.
    pub fn inner(self) -> Self {
        Tolerance { abs: self.abs / 10.0, rel: self.rel / 10.0, ..self }
    }

    pub fn scaled(self, factor: f64) -> Self {
        Tolerance { abs: self.abs * factor, ..self }
    }

    fn target(&self, result: f64) -> f64 {
        self.abs.max(self.rel * result.abs())
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance::new(1e-8, 1e-10)
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod<F>(f: &mut F, a: f64, b: f64) -> Result<Segment>
where
    F: FnMut(f64) -> Result<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    if !value.is_finite() {
        return Err(Error::Domain { what: "integrand", value });
    }
    Ok(Segment { a, b, value, error })
}

/// Integral of `f` over `[a, b]`.
pub fn integrate<F>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    try_integrate_with_breaks(|x| Ok(f(x)), &[a, b], tol)
}

/// Integral of a fallible `f` over `[a, b]`; the first integrand error aborts.
pub fn try_integrate<F>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    try_integrate_with_breaks(f, &[a, b], tol)
}

/// Integral over `[points[0], points[last]]`, starting from the partition
/// given by `points` (sorted). Use breaks to point the integrator at narrow
/// peaks or kinks it could otherwise step over.
pub fn try_integrate_with_breaks<F>(mut f: F, points: &[f64], tol: Tolerance) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if points.len() < 2 {
        return Ok(0.0);
    }
    let (a, b) = (points[0], points[points.len() - 1]);
    if a == b {
        return Ok(0.0);
    }
    let (sign, lo, hi) = if a < b { (1.0, a, b) } else { (-1.0, b, a) };
    let mut segs: Vec<Segment> = Vec::with_capacity(64);
    if sign > 0.0 {
        for w in points.windows(2) {
            if w[1] > w[0] {
                segs.push(kronrod(&mut f, w[0], w[1])?);
            }
        }
    } else {
        segs.push(kronrod(&mut f, lo, hi)?);
    }
    loop {
        let total: f64 = segs.iter().map(|s| s.value).sum();
        let err: f64 = segs.iter().map(|s| s.error).sum();
        if err <= tol.target(total) {
            return Ok(sign * total);
        }
        let (worst, _) = segs
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, s)| if s.error > acc.1 { (i, s.error) } else { acc });
        let s = segs[worst];
        let mid = 0.5 * (s.a + s.b);
        let resolution = 4.0 * f64::EPSILON * (s.a.abs() + s.b.abs()) + f64::MIN_POSITIVE;
        if segs.len() >= tol.max_subdivisions || (s.b - s.a) <= resolution {
            return Err(Error::Quadrature {
                estimate: sign * total,
                error: err,
                subdivisions: segs.len(),
            });
        }
        let left = kronrod(&mut f, s.a, mid)?;
        let right = kronrod(&mut f, mid, s.b)?;
        segs[worst] = left;
        segs.push(right);
    }
}

/// Adaptive Simpson integration to absolute tolerance `abs_tol`.
pub fn adaptive_simpson<F>(mut f: F, a: f64, b: f64, abs_tol: f64, max_depth: u32) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut ok = true;
    let v = simpson_step(&mut f, a, b, fa, fm, fb, whole, abs_tol, max_depth, &mut ok);
    if ok {
        Ok(v)
    } else {
        Err(Error::Quadrature { estimate: v, error: abs_tol, subdivisions: 1 << max_depth.min(30) })
    }
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F>(
    f: &mut F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    ok: &mut bool,
) -> f64
where
    F: FnMut(f64) -> f64,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    if depth == 0 {
        *ok = false;
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, ok)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, ok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn constant_is_exact() {
        let v = integrate(|_| 1.0, 0.0, 1.0, Tolerance::default()).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn single_leader_contact_law() {
        let v = integrate(|t| 0.5 * t.sin(), 0.0, PI, Tolerance::new(1e-12, 1e-12)).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let v = integrate(|x| x * x, 1.0, 0.0, Tolerance::default()).unwrap();
        assert!((v + 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn sqrt_endpoint_singularity() {
        // ∫_0^1 sqrt(1 - x) dx = 2/3
        let v = integrate(|x| (1.0 - x).max(0.0).sqrt(), 0.0, 1.0, Tolerance::new(1e-10, 0.0)).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-9);
        let s = adaptive_simpson(|x| (1.0 - x).max(0.0).sqrt(), 0.0, 1.0, 1e-10, 50).unwrap();
        assert!((s - 2.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn narrow_peak_with_breaks() {
        let f = |x: f64| Ok((-((x - 0.03) / 0.001).powi(2)).exp());
        let v = try_integrate_with_breaks(f, &[0.0, 0.02, 0.04, 10.0], Tolerance::new(1e-12, 1e-10)).unwrap();
        assert!((v - 0.001 * PI.sqrt()).abs() < 1e-11);
    }

    #[test]
    fn subdivision_limit_reports_estimate() {
        let tol = Tolerance { abs: 1e-15, rel: 0.0, max_subdivisions: 3 };
        match integrate(|x| (1.0 / x).sin(), 1e-3, 1.0, tol) {
            Err(Error::Quadrature { estimate, .. }) => assert!(estimate.is_finite()),
            other => panic!("expected subdivision error, got {other:?}"),
        }
    }

    #[test]
    fn integrand_errors_propagate() {
        let r = try_integrate(|x| if x > 0.5 { Err(Error::invalid("x", "test")) } else { Ok(x) }, 0.0, 1.0, Tolerance::default());
        assert!(matches!(r, Err(Error::InvalidParameter { .. })));
    }
}
