//! Link budget and shadowed-Rician small-scale fading.

use core::f64::consts::PI;

#[allow(unused_imports)] // inherent float methods shadow it whenever std is linked
use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::special::{gamma_p, ln_gamma};
use crate::{Error, Result};

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(ratio: f64) -> Result<f64> {
    if !(ratio > 0.0) {
        return Err(Error::Domain { what: "linear ratio", value: ratio });
    }
    Ok(10.0 * ratio.log10())
}

/// Power in watts for a level given in dBm.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

/// Per-link radio parameters. Logarithmic quantities are kept in the units
/// they are usually quoted in and converted on use.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkBudget {
    pub tx_power_dbw: f64,
    pub antenna_gain_dbi: f64,
    pub wavelength_m: f64,
    /// Rain attenuation; 0 dB for inter-satellite links.
    pub rain_attenuation_db: f64,
    pub noise_power_dbm: f64,
    pub bandwidth_hz: f64,
}

impl LinkBudget {
    pub fn validate(&self) -> Result<()> {
        if !(self.wavelength_m > 0.0) {
            return Err(Error::invalid("wavelength_m", "must be positive"));
        }
        if !(self.bandwidth_hz > 0.0) {
            return Err(Error::invalid("bandwidth_hz", "must be positive"));
        }
        if !(self.rain_attenuation_db <= 0.0) {
            return Err(Error::invalid("rain_attenuation_db", "must not exceed 0 dB"));
        }
        if !self.tx_power_dbw.is_finite() && self.tx_power_dbw != f64::NEG_INFINITY {
            return Err(Error::invalid("tx_power_dbw", "must be finite"));
        }
        Ok(())
    }

    pub fn tx_power_w(&self) -> f64 {
        db_to_linear(self.tx_power_dbw)
    }

    pub fn with_power_w(&self, watts: f64) -> LinkBudget {
        let tx_power_dbw = if watts > 0.0 { 10.0 * watts.log10() } else { f64::NEG_INFINITY };
        LinkBudget { tx_power_dbw, ..self.clone() }
    }
}

/// Composite gain `ξ = ρ G ζ (ν / (4π σ))²` in m², so that the received SNR
/// is `ξ W / r²` with `r` in metres.
pub fn composite_gain(link: &LinkBudget) -> f64 {
    let noise_w = dbm_to_watts(link.noise_power_dbm);
    let geometric = link.wavelength_m / (4.0 * PI);
    link.tx_power_w() * db_to_linear(link.antenna_gain_dbi) * db_to_linear(link.rain_attenuation_db) * geometric
        * geometric
        / noise_w
}

pub fn snr(xi: f64, fading_w: f64, r_m: f64) -> f64 {
    xi * fading_w / (r_m * r_m)
}

/// Shannon spectral efficiency for a composite gain over a squared distance.
/// A zero distance with positive gain is an unbounded rate.
pub(crate) fn spectral_efficiency(xi: f64, fading_w: f64, r2_m2: f64) -> f64 {
    let s = xi * fading_w;
    if s <= 0.0 {
        return 0.0;
    }
    if r2_m2 <= 0.0 {
        return f64::INFINITY;
    }
    (s / r2_m2).ln_1p() / core::f64::consts::LN_2
}

/// Shadowed-Rician parameters `(Ω, b0, m)`: LoS power `Ω`, half the diffuse
/// power `b0`, Nakagami shadowing order `m`, plus the moment-matched Gamma
/// shape `m1` and scale `m2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShadowedRicianParams {
    pub omega: f64,
    pub b0: f64,
    pub m: f64,
    pub m1: f64,
    pub m2: f64,
}

impl Default for ShadowedRicianParams {
    fn default() -> Self {
        gamma_approx(1.29, 0.158, 19.4).expect("table parameters are valid")
    }
}

impl ShadowedRicianParams {
    pub fn two_b0(&self) -> f64 {
        2.0 * self.b0
    }

    pub fn mean_power(&self) -> f64 {
        self.two_b0() + self.omega
    }
}

/// Builds the parameter set and fills in the Gamma approximation
/// `m1 = m(2b0+Ω)² / (4mb0² + 4mb0Ω + Ω²)`, `m2 = (4mb0² + 4mb0Ω + Ω²) / (m(2b0+Ω))`.
/// `Ω = 0` is accepted and degenerates to Rayleigh fading.
pub fn gamma_approx(omega: f64, b0: f64, m: f64) -> Result<ShadowedRicianParams> {
    if !(omega >= 0.0 && omega.is_finite()) {
        return Err(Error::invalid("sr_omega", "must be non-negative"));
    }
    if !(b0 > 0.0 && b0.is_finite()) {
        return Err(Error::invalid("sr_b0", "must be positive"));
    }
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::invalid("sr_m", "must be positive"));
    }
    let mean = 2.0 * b0 + omega;
    let spread = 4.0 * m * b0 * b0 + 4.0 * m * b0 * omega + omega * omega;
    Ok(ShadowedRicianParams { omega, b0, m, m1: m * mean * mean / spread, m2: spread / (m * mean) })
}

const SERIES_MIN_TERMS: usize = 10;
const SERIES_MAX_TERMS: usize = 500;
const SERIES_REL_STOP: f64 = 1e-12;
const SERIES_TAIL_LIMIT: f64 = 1e-9;
// Below this log-magnitude the linear recurrences would start from an
// underflowed value.
const LINEAR_FLOOR: f64 = -700.0;

/// Exact CDF of the shadowed-Rician power,
/// `Σ_z NB(z; m, q) P(z + 1, w / 2b0)` with `q = Ω / (2b0 m + Ω)`.
///
/// The negative-binomial weights `(1−q)^m (m)_z q^z / z!` and the Poisson
/// tails `P(z+1, x)` are both advanced by ratio recurrences, so the
/// Pochhammer symbol and factorial are never formed on their own.
pub fn sr_cdf(w: f64, p: &ShadowedRicianParams) -> Result<f64> {
    if !(w > 0.0) {
        return Ok(0.0);
    }
    if w == f64::INFINITY {
        return Ok(1.0);
    }
    let two_b0 = p.two_b0();
    let x = w / two_b0;
    let denom = two_b0 * p.m + p.omega;
    let q = p.omega / denom;
    let ln_q = q.ln();
    let ln_w0 = p.m * (two_b0 * p.m / denom).ln();

    let linear_w = ln_w0 > LINEAR_FLOOR;
    let mut weight = if linear_w { ln_w0.exp() } else { 0.0 };
    let mut ln_weight = ln_w0;

    let linear_pmf = -x > LINEAR_FLOOR;
    let ln_x = x.ln();
    let mut pmf = if linear_pmf { (-x).exp() } else { 0.0 };
    let mut ln_pmf = -x;
    // P(1, x)
    let mut tail = -(-x).exp_m1();

    let mut sum = 0.0;
    let mut weight_mass = 0.0;
    for z in 0..=SERIES_MAX_TERMS {
        let wz = if linear_w { weight } else { ln_weight.exp() };
        let term = wz * tail.max(0.0);
        sum += term;
        weight_mass += wz;
        let zf = z as f64;
        // weights only shrink once past the negative-binomial mode
        let past_mode = q * (p.m + zf) < zf + 1.0;
        if z >= SERIES_MIN_TERMS && past_mode && term <= SERIES_REL_STOP * sum {
            return Ok(sum.min(1.0));
        }
        if linear_w {
            weight *= q * (p.m + zf) / (zf + 1.0);
        } else {
            ln_weight += ln_q + (p.m + zf).ln() - (zf + 1.0).ln();
        }
        // P(z+2, x) = P(z+1, x) − e^{-x} x^{z+1} / (z+1)!
        let next_pmf = if linear_pmf {
            pmf *= x / (zf + 1.0);
            pmf
        } else {
            ln_pmf += ln_x - (zf + 1.0).ln();
            ln_pmf.exp()
        };
        tail -= next_pmf;
    }
    let remaining = (1.0 - weight_mass).max(0.0);
    if remaining > SERIES_TAIL_LIMIT {
        return Err(Error::SeriesNonConvergence { terms: SERIES_MAX_TERMS + 1, partial: sum, tail: remaining });
    }
    Ok(sum.min(1.0))
}

/// Gamma approximation to the fading power density.
pub fn gamma_pdf(w: f64, p: &ShadowedRicianParams) -> f64 {
    if w < 0.0 {
        return 0.0;
    }
    if w == 0.0 {
        return match p.m1.partial_cmp(&1.0) {
            Some(core::cmp::Ordering::Greater) => 0.0,
            Some(core::cmp::Ordering::Equal) => 1.0 / p.m2,
            _ => f64::INFINITY,
        };
    }
    ((p.m1 - 1.0) * w.ln() - w / p.m2 - p.m1 * p.m2.ln() - ln_gamma(p.m1)).exp()
}

pub fn gamma_cdf(w: f64, p: &ShadowedRicianParams) -> f64 {
    gamma_p(p.m1, w / p.m2)
}

/// Draws shadowed-Rician power from its construction: a circular Gaussian
/// diffuse part of power `2b0` plus a LoS amplitude whose power is
/// Gamma(`m`, `Ω/m`) distributed.
#[derive(Debug, Clone, Copy)]
pub struct SrSampler {
    diffuse_sd: f64,
    los: Option<Gamma<f64>>,
}

impl SrSampler {
    pub fn new(p: &ShadowedRicianParams) -> Result<Self> {
        let los = if p.omega > 0.0 {
            Some(Gamma::new(p.m, p.omega / p.m).map_err(|_| Error::invalid("sr_m", "invalid LoS shadowing law"))?)
        } else {
            None
        };
        Ok(SrSampler { diffuse_sd: p.b0.sqrt(), los })
    }
}

impl Distribution<f64> for SrSampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let g1: f64 = rng.sample(StandardNormal);
        let g2: f64 = rng.sample(StandardNormal);
        let los_amp = self.los.map_or(0.0, |d| d.sample(rng).sqrt());
        let re = self.diffuse_sd * g1 + los_amp;
        let im = self.diffuse_sd * g2;
        re * re + im * im
    }
}

/// One shadowed-Rician power draw.
pub fn sample_sr_power<R: Rng + ?Sized>(rng: &mut R, p: &ShadowedRicianParams) -> Result<f64> {
    Ok(SrSampler::new(p)?.sample(rng))
}

/// Draws from the Gamma(`m1`, `m2`) approximation.
#[derive(Debug, Clone, Copy)]
pub struct GammaFadingSampler(Gamma<f64>);

impl GammaFadingSampler {
    pub fn new(p: &ShadowedRicianParams) -> Result<Self> {
        Gamma::new(p.m1, p.m2)
            .map(GammaFadingSampler)
            .map_err(|_| Error::invalid("fading", "invalid Gamma approximation"))
    }
}

impl Distribution<f64> for GammaFadingSampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.0.sample(rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, Tolerance};

    fn lu() -> LinkBudget {
        LinkBudget {
            tx_power_dbw: 20.0,
            antenna_gain_dbi: 30.0,
            wavelength_m: 0.015,
            rain_attenuation_db: -2.0,
            noise_power_dbm: -94.0,
            bandwidth_hz: 10e6,
        }
    }

    #[test]
    fn decibels() {
        assert_eq!(db_to_linear(0.0), 1.0);
        assert!((db_to_linear(20.0) - 100.0).abs() < 1e-12);
        assert!((dbm_to_watts(-94.0) / 3.981e-13 - 1.0).abs() < 1e-3);
        assert!(linear_to_db(0.0).is_err());
        assert!(linear_to_db(-1.0).is_err());
        for &x in &[1e-13, 0.3, 7.0, 1e9] {
            let back = db_to_linear(linear_to_db(x).unwrap());
            assert!((back / x - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn composite_gain_examples() {
        // independent chain: 100 W · 1000 · 10^-0.2 · (0.015 / (4π sqrt(10^-12.4)))²
        let sigma = (10f64.powf(-12.4)).sqrt();
        let want = 100.0 * 1000.0 * 10f64.powf(-0.2) * (0.015 / (4.0 * PI * sigma)).powi(2);
        let xi = composite_gain(&lu());
        assert!((xi / want - 1.0).abs() < 1e-12);
        assert!((xi / 2.26e11 - 1.0).abs() < 0.01, "{xi}");
        let unit = LinkBudget {
            tx_power_dbw: 0.0,
            antenna_gain_dbi: 0.0,
            rain_attenuation_db: 0.0,
            noise_power_dbm: 30.0,
            ..lu()
        };
        assert!((composite_gain(&unit) - (0.015 / (4.0 * PI)).powi(2)).abs() < 1e-20);
        let doubled = LinkBudget { tx_power_dbw: 20.0 + 10.0 * 2f64.log10(), ..lu() };
        assert!((composite_gain(&doubled) / xi - 2.0).abs() < 1e-12);
    }

    #[test]
    fn snr_examples() {
        assert_eq!(snr(2.26e11, 0.0, 6e5), 0.0);
        assert!((snr(2.26e11, 1.0, 6e5) / 0.627 - 1.0).abs() < 0.02);
        assert!((snr(3.0, 2.0, 5.0) * 4.0 - snr(3.0, 2.0, 2.5)).abs() < 1e-15);
    }

    #[test]
    fn gamma_parameters() {
        let p = gamma_approx(1.29, 0.158, 19.4).unwrap();
        assert!((p.m1 - 2.577).abs() < 1e-3, "{}", p.m1);
        assert!((p.m2 - 0.6232).abs() < 1e-4, "{}", p.m2);
        assert!((p.m1 * p.m2 - 1.606).abs() < 1e-12);
        let r = gamma_approx(1e-12, 0.2, 5.0).unwrap();
        assert!((r.m1 - 1.0).abs() < 1e-9 && (r.m2 - 0.4).abs() < 1e-9);
        assert!(gamma_approx(1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn gamma_density() {
        let p = ShadowedRicianParams::default();
        let tol = Tolerance::new(1e-12, 1e-12);
        let total = integrate(|w| gamma_pdf(w, &p), 0.0, 60.0, tol).unwrap();
        assert!((total - 1.0).abs() < 1e-9);
        let mean = integrate(|w| w * gamma_pdf(w, &p), 0.0, 60.0, tol).unwrap();
        assert!((mean - 1.606).abs() < 1e-6);
        assert_eq!(gamma_pdf(0.0, &p), 0.0);
    }

    #[test]
    fn sr_cdf_limits() {
        let p = ShadowedRicianParams::default();
        assert_eq!(sr_cdf(0.0, &p).unwrap(), 0.0);
        assert!((sr_cdf(50.0 * p.mean_power(), &p).unwrap() - 1.0).abs() < 1e-6);
        assert!(sr_cdf(1e6, &p).unwrap() <= 1.0);
        let mut last = 0.0;
        for i in 0..=1000 {
            let w = 20.0 * p.mean_power() * i as f64 / 1000.0;
            let f = sr_cdf(w, &p).unwrap();
            assert!(f >= last, "not monotone at w = {w}");
            last = f;
        }
    }

    #[test]
    fn sr_cdf_rayleigh_limit() {
        let p = gamma_approx(0.0, 0.25, 3.0).unwrap();
        for &w in &[1e-6, 0.1, 0.5, 2.0, 10.0] {
            let want = -(-w / 0.5f64).exp_m1();
            assert!((sr_cdf(w, &p).unwrap() - want).abs() < 1e-14);
        }
    }

    #[test]
    fn sr_cdf_small_argument_keeps_relative_precision() {
        // F(w) ≈ (1−q)^m w / 2b0 near zero
        let p = ShadowedRicianParams::default();
        let q = p.omega / (p.two_b0() * p.m + p.omega);
        let w = 1e-10;
        let want = (1.0 - q).powf(p.m) * w / p.two_b0();
        assert!((sr_cdf(w, &p).unwrap() / want - 1.0).abs() < 1e-6);
    }

    #[test]
    fn sr_cdf_density_matches_exact_pdf_at_moderate_w() {
        // derivative of the series vs. the Gamma approximation: close, not equal
        let p = ShadowedRicianParams::default();
        let h = 1e-5;
        let w = 1.0;
        let d = (sr_cdf(w + h, &p).unwrap() - sr_cdf(w - h, &p).unwrap()) / (2.0 * h);
        assert!((d - gamma_pdf(w, &p)).abs() < 0.1 * d);
    }

    #[test]
    fn series_reports_nonconvergence() {
        // q → 1 makes the weights decay too slowly for the term cap
        let p = gamma_approx(1e6, 1e-3, 50.0).unwrap();
        assert!(matches!(sr_cdf(1.0, &p), Err(Error::SeriesNonConvergence { .. })));
    }
}
