//! Outage probability and average data rate by numerical quadrature, with
//! the single-integral bounds built on the extreme contact-angle laws.
//!
//! Rate integrals run in bits/s/Hz and are scaled by the bandwidth at the
//! end, so tolerances are spectral efficiencies.

use alloc::vec::Vec;
use core::f64::consts::{LN_2, PI};

#[allow(unused_imports)] // inherent float methods shadow it whenever std is linked
use num_traits::Float;

use crate::channel::{gamma_pdf, spectral_efficiency, sr_cdf, ShadowedRicianParams};
use crate::geometry::{
    chord_follower_user, chord_leader_follower, chord_leader_user, extreme_contact_laws, leader_contact_pdf,
    leader_contact_quantile, versine, ConstellationConfig,
};
use crate::quadrature::{try_integrate, try_integrate_with_breaks, Tolerance};
use crate::special::gamma_upper_quantile;
use crate::{Error, Result, ScenarioParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimateKind {
    Analytic,
    LowerBound,
    UpperBound,
    Midpoint,
    MonteCarlo,
}

/// A probability or a rate in bit/s. Monte Carlo estimates carry a 99%
/// confidence half-width and their trial count; analytic values carry zeros.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerformanceEstimate {
    pub value: f64,
    pub kind: EstimateKind,
    pub ci_half_width: f64,
    pub trials: u64,
}

impl PerformanceEstimate {
    pub fn analytic(value: f64, kind: EstimateKind) -> Self {
        PerformanceEstimate { value, kind, ci_half_width: 0.0, trials: 0 }
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.value - self.ci_half_width, self.value + self.ci_half_width)
    }

    /// Whether `x` lies within the confidence interval.
    pub fn covers(&self, x: f64) -> bool {
        (x - self.value).abs() <= self.ci_half_width
    }
}

/// Tolerance of the outermost integral. Every nested level is ten times
/// tighter than the one enclosing it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Precision {
    pub tol: Tolerance,
}

impl Default for Precision {
    fn default() -> Self {
        Precision { tol: Tolerance::new(1e-6, 1e-9) }
    }
}

impl Precision {
    pub fn with_abs(abs: f64) -> Self {
        Precision { tol: Tolerance { abs, ..Precision::default().tol } }
    }
}

const LEADER_QUANTILES: [f64; 10] = [0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99, 0.9999, 1.0 - 1e-8, 1.0 - 1e-13];
const FADING_TAIL: f64 = 1e-9;

/// `[a, b]` partitioned at the leader-law quantiles moved by `shift`, so the
/// integrator sees the narrow contact-angle peak.
fn leader_breaks(cfg: &ConstellationConfig, a: f64, b: f64, shift: f64) -> Vec<f64> {
    let mut pts = Vec::with_capacity(LEADER_QUANTILES.len() + 2);
    pts.push(a);
    for &q in &LEADER_QUANTILES {
        let t = leader_contact_quantile(q, cfg) + shift;
        if t > a && t < b {
            pts.push(t);
        }
    }
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

fn probability(value: f64, tol: Tolerance) -> Result<f64> {
    let slack = 10.0 * tol.abs;
    if !(value >= -slack && value <= 1.0 + slack) {
        return Err(Error::OutOfRange { what: "probability", value });
    }
    Ok(value.clamp(0.0, 1.0))
}

fn nonnegative(value: f64, tol: Tolerance) -> Result<f64> {
    if !(value >= -10.0 * tol.abs) {
        return Err(Error::OutOfRange { what: "rate", value });
    }
    Ok(value.max(0.0))
}

/// Probability that fading keeps the SNR at distance `r_km` below threshold.
fn link_outage(r_km: f64, xi: f64, s: &ScenarioParams) -> Result<f64> {
    let r = r_km * 1e3;
    sr_cdf(s.gamma_th() * r * r / xi, &s.fading)
}

/// Upper end of the fading integrals: the `1 − 1e-9` quantile of the Gamma
/// approximation.
pub fn fading_cutoff(p: &ShadowedRicianParams) -> Result<f64> {
    gamma_upper_quantile(p.m1, p.m2, FADING_TAIL)
}

/// `∫ min(log2(1 + c w), cap) f_W(w) dw` over `[0, w_max]`, in bits/s/Hz.
/// The kink of the min is passed to the integrator as a breakpoint.
fn capped_efficiency(c: f64, cap: f64, p: &ShadowedRicianParams, w_max: f64, tol: Tolerance) -> Result<f64> {
    if !(c > 0.0) || !(cap > 0.0) {
        return Ok(0.0);
    }
    let mut pts = Vec::with_capacity(4);
    pts.push(0.0);
    let mean = p.m1 * p.m2;
    if mean < w_max {
        pts.push(mean);
    }
    let kink = (cap * LN_2).exp_m1() / c;
    if kink > 0.0 && kink < w_max {
        pts.push(kink);
    }
    pts.push(w_max);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    try_integrate_with_breaks(
        |w| {
            let eff = (c * w).ln_1p() / LN_2;
            Ok(gamma_pdf(w, p) * eff.min(cap))
        },
        &pts,
        tol,
    )
}

fn ergodic_efficiency(c: f64, p: &ShadowedRicianParams, w_max: f64, tol: Tolerance) -> Result<f64> {
    capped_efficiency(c, f64::INFINITY, p, w_max, tol)
}

/// Leader-only outage: the exact fading CDF at the threshold distance,
/// averaged over the nearest-leader contact angle on `[0, θ_max]`.
pub fn outage_leader(s: &ScenarioParams, prec: &Precision) -> Result<PerformanceEstimate> {
    let cfg = &s.cfg;
    let xi = s.xi_lu();
    let tmax = cfg.max_contact_angle_rad;
    let v = try_integrate_with_breaks(
        |t| {
            let f = leader_contact_pdf(t, cfg);
            if f == 0.0 {
                return Ok(0.0);
            }
            Ok(link_outage(chord_leader_user(t, cfg), xi, s)? * f)
        },
        &leader_breaks(cfg, 0.0, tmax, 0.0),
        prec.tol,
    )?;
    Ok(PerformanceEstimate::analytic(probability(v, prec.tol)?, EstimateKind::Analytic))
}

fn follower_outage_at(theta: f64, s: &ScenarioParams, xi: f64, tol: Tolerance) -> Result<f64> {
    let cfg = &s.cfg;
    let tc = cfg.cap_half_angle_rad;
    let cap_norm = versine(tc);
    let inner = tol.inner();
    // the integrand is even in φ, so average over [0, π]
    try_integrate(
        |psi| {
            let ring = if theta == 0.0 {
                link_outage(chord_follower_user(theta, psi, 0.0, cfg), xi, s)?
            } else {
                try_integrate(|phi| link_outage(chord_follower_user(theta, psi, phi, cfg), xi, s), 0.0, PI, inner)?
                    / PI
            };
            Ok(psi.sin() / cap_norm * ring)
        },
        0.0,
        tc,
        tol,
    )
}

/// Outage of one follower-to-user link when the leader sits at contact
/// angle `theta`, averaged over the follower's uniform position in the cap.
pub fn outage_follower_given_theta(theta: f64, s: &ScenarioParams, prec: &Precision) -> Result<f64> {
    probability(follower_outage_at(theta, s, s.xi_fu(), prec.tol)?, prec.tol)
}

/// Cluster outage: every follower link and the leader link fail. Followers
/// fade independently, so given the leader angle their outages multiply.
pub fn outage_cluster(s: &ScenarioParams, prec: &Precision) -> Result<PerformanceEstimate> {
    let n = s.cfg.n_followers;
    if n == 0 {
        return outage_leader(s, prec);
    }
    let cfg = &s.cfg;
    let (xi_lu, xi_fu) = (s.xi_lu(), s.xi_fu());
    let tmax = cfg.max_contact_angle_rad;
    let inner = prec.tol.inner();
    let v = try_integrate_with_breaks(
        |t| {
            let f = leader_contact_pdf(t, cfg);
            if f == 0.0 {
                return Ok(0.0);
            }
            let leader = link_outage(chord_leader_user(t, cfg), xi_lu, s)?;
            if leader == 0.0 {
                return Ok(0.0);
            }
            let follower = follower_outage_at(t, s, xi_fu, inner)?.clamp(0.0, 1.0);
            Ok(follower.powi(n as i32) * leader * f)
        },
        &leader_breaks(cfg, 0.0, tmax, 0.0),
        prec.tol,
    )?;
    Ok(PerformanceEstimate::analytic(probability(v, prec.tol)?, EstimateKind::Analytic))
}

/// Single-integral lower and upper bounds on the cluster outage, placing all
/// followers at the cap point nearest to (lower) or farthest from (upper)
/// the user. The lower bound's first term, the atom of the minimum-angle law
/// times the leader outage integrated over `[0, θ_cap]`, is kept as is.
pub fn outage_cluster_bounds(
    s: &ScenarioParams,
    prec: &Precision,
) -> Result<(PerformanceEstimate, PerformanceEstimate)> {
    let cfg = &s.cfg;
    let n = s.cfg.n_followers as i32;
    let (xi_lu, xi_fu) = (s.xi_lu(), s.xi_fu());
    let tc = cfg.cap_half_angle_rad;
    let tmax = cfg.max_contact_angle_rad;
    let (min_law, max_law) = extreme_contact_laws(cfg);
    let follower_bound = |t: f64| -> Result<f64> {
        if n == 0 {
            return Ok(1.0);
        }
        Ok(link_outage(chord_leader_user(t, cfg), xi_fu, s)?.powi(n))
    };
    let leader = |t: f64| link_outage(chord_leader_user(t, cfg), xi_lu, s);

    let atom_term = if min_law.atom_weight > 0.0 {
        min_law.atom_weight * try_integrate(leader, 0.0, tc, prec.tol.inner())? * follower_bound(0.0)?
    } else {
        0.0
    };
    let continuous = try_integrate_with_breaks(
        |t| {
            let f = min_law.density(t);
            if f == 0.0 {
                return Ok(0.0);
            }
            Ok(follower_bound(t)? * leader(t + tc)? * f)
        },
        &leader_breaks(cfg, 0.0, (tmax - tc).max(0.0), -tc),
        prec.tol,
    )?;
    let upper = try_integrate_with_breaks(
        |t| {
            let f = max_law.density(t);
            if f == 0.0 {
                return Ok(0.0);
            }
            Ok(follower_bound(t)? * leader(t - tc)? * f)
        },
        &leader_breaks(cfg, tc, tmax + tc, tc),
        prec.tol,
    )?;
    Ok((
        PerformanceEstimate::analytic(probability(atom_term + continuous, prec.tol)?, EstimateKind::LowerBound),
        PerformanceEstimate::analytic(probability(upper, prec.tol)?, EstimateKind::UpperBound),
    ))
}

/// Leader-to-user ergodic rate in bits/s/Hz.
fn leader_efficiency(s: &ScenarioParams, prec: &Precision) -> Result<f64> {
    let cfg = &s.cfg;
    let xi = s.xi_lu();
    if !(xi > 0.0) {
        return Ok(0.0);
    }
    let w_max = fading_cutoff(&s.fading)?;
    let inner = prec.tol.inner();
    try_integrate_with_breaks(
        |t| {
            let f = leader_contact_pdf(t, cfg);
            if f == 0.0 {
                return Ok(0.0);
            }
            let r = chord_leader_user(t, cfg) * 1e3;
            Ok(f * ergodic_efficiency(xi / (r * r), &s.fading, w_max, inner)?)
        },
        &leader_breaks(cfg, 0.0, cfg.max_contact_angle_rad, 0.0),
        prec.tol,
    )
}

/// Average leader-to-user rate in bit/s under the Gamma fading approximation.
pub fn rate_leader(s: &ScenarioParams, prec: &Precision) -> Result<PerformanceEstimate> {
    let eff = nonnegative(leader_efficiency(s, prec)?, prec.tol)?;
    Ok(PerformanceEstimate::analytic(eff * s.lu.bandwidth_hz, EstimateKind::Analytic))
}

/// Average cluster rate in bit/s: the leader rate plus, for every follower,
/// the smaller of its ISL rate and its downlink rate, averaged over the
/// leader angle, the follower position and the fading. Four nested
/// integrals; expect seconds per call at the default precision.
pub fn rate_cluster(s: &ScenarioParams, prec: &Precision) -> Result<PerformanceEstimate> {
    let n = s.cfg.n_followers;
    if n == 0 {
        return rate_leader(s, prec);
    }
    let leader = rate_leader(s, prec)?.value;
    let cfg = &s.cfg;
    let tc = cfg.cap_half_angle_rad;
    let cap_norm = versine(tc);
    let (xi_fu, xi_lf) = (s.xi_fu(), s.xi_lf());
    let (b_fu, b_lf) = (s.fu.bandwidth_hz, s.lf.bandwidth_hz);
    let w_max = fading_cutoff(&s.fading)?;
    let t1 = prec.tol.inner();
    let t2 = t1.inner();
    let t3 = t2.inner();
    // the ISL rate is expressed in units of B_FU so both links share one scale
    let per_follower = try_integrate_with_breaks(
        |t| {
            let f = leader_contact_pdf(t, cfg);
            if f == 0.0 {
                return Ok(0.0);
            }
            let over_cap = try_integrate(
                |psi| {
                    let r_lf = chord_leader_follower(psi, cfg) * 1e3;
                    let isl = spectral_efficiency(xi_lf, 1.0, r_lf * r_lf) * b_lf / b_fu;
                    let downlink = |phi: f64| {
                        let r = chord_follower_user(t, psi, phi, cfg) * 1e3;
                        capped_efficiency(xi_fu / (r * r), isl, &s.fading, w_max, t3)
                    };
                    let ring = if t == 0.0 { downlink(0.0)? } else { try_integrate(downlink, 0.0, PI, t2)? / PI };
                    Ok(psi.sin() / cap_norm * ring)
                },
                0.0,
                tc,
                t1,
            )?;
            Ok(f * over_cap)
        },
        &leader_breaks(cfg, 0.0, cfg.max_contact_angle_rad, 0.0),
        prec.tol,
    )?;
    let per_follower = nonnegative(per_follower, prec.tol)? * b_fu;
    Ok(PerformanceEstimate::analytic(leader + n as f64 * per_follower, EstimateKind::Analytic))
}

/// Per-follower downlink rate bounds in bit/s, `(lower, upper)`, from the
/// maximum- and minimum-angle laws. The ISL is not a constraint here.
pub fn follower_rate_bounds(s: &ScenarioParams, prec: &Precision) -> Result<(f64, f64)> {
    let cfg = &s.cfg;
    let xi = s.xi_fu();
    if !(xi > 0.0) {
        return Ok((0.0, 0.0));
    }
    let tc = cfg.cap_half_angle_rad;
    let tmax = cfg.max_contact_angle_rad;
    let w_max = fading_cutoff(&s.fading)?;
    let inner = prec.tol.inner();
    let (min_law, max_law) = extreme_contact_laws(cfg);
    let eff = |t: f64| {
        let r = chord_leader_user(t, cfg) * 1e3;
        ergodic_efficiency(xi / (r * r), &s.fading, w_max, inner)
    };
    let atom = if min_law.atom_weight > 0.0 { min_law.atom_weight * eff(0.0)? } else { 0.0 };
    let upper = atom
        + try_integrate_with_breaks(
            |t| {
                let f = min_law.density(t);
                if f == 0.0 {
                    return Ok(0.0);
                }
                Ok(f * eff(t)?)
            },
            &leader_breaks(cfg, 0.0, (tmax - tc).max(0.0), -tc),
            prec.tol,
        )?;
    let lower = try_integrate_with_breaks(
        |t| {
            let f = max_law.density(t);
            if f == 0.0 {
                return Ok(0.0);
            }
            Ok(f * eff(t)?)
        },
        &leader_breaks(cfg, tc, tmax + tc, tc),
        prec.tol,
    )?;
    let b = s.fu.bandwidth_hz;
    Ok((nonnegative(lower, prec.tol)? * b, nonnegative(upper, prec.tol)? * b))
}

/// Cluster rate bounds `(lower, upper, midpoint)` in bit/s. Meant for caps
/// much smaller than the maximum contact angle; see [`bounds_regime_holds`].
pub fn rate_cluster_bounds(
    s: &ScenarioParams,
    prec: &Precision,
) -> Result<(PerformanceEstimate, PerformanceEstimate, PerformanceEstimate)> {
    let leader = rate_leader(s, prec)?.value;
    let n = s.cfg.n_followers as f64;
    let (lo, up) = if n > 0.0 { follower_rate_bounds(s, prec)? } else { (0.0, 0.0) };
    let lower = leader + n * lo;
    let upper = leader + n * up;
    Ok((
        PerformanceEstimate::analytic(lower, EstimateKind::LowerBound),
        PerformanceEstimate::analytic(upper, EstimateKind::UpperBound),
        PerformanceEstimate::analytic(0.5 * (lower + upper), EstimateKind::Midpoint),
    ))
}

/// Whether `θ_cap / θ_max ≤ 0.1`, the regime the rate bounds are meant for.
pub fn bounds_regime_holds(cfg: &ConstellationConfig) -> bool {
    cfg.cap_half_angle_rad <= 0.1 * cfg.max_contact_angle_rad
}

/// ISL rate in bit/s averaged over the follower's position in the cap.
pub fn isl_mean_rate(s: &ScenarioParams, prec: &Precision) -> Result<f64> {
    let cfg = &s.cfg;
    let xi = s.xi_lf();
    if !(xi > 0.0) {
        return Ok(0.0);
    }
    let tc = cfg.cap_half_angle_rad;
    let cap_norm = versine(tc);
    let v = try_integrate(
        |psi| {
            let r = chord_leader_follower(psi, cfg) * 1e3;
            Ok(psi.sin() / cap_norm * spectral_efficiency(xi, 1.0, r * r))
        },
        0.0,
        tc,
        prec.tol,
    )?;
    Ok(nonnegative(v, prec.tol)? * s.lf.bandwidth_hz)
}
