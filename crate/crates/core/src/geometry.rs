//! Spherical-shell geometry of the constellation.
//!
//! Angles are central angles in radians measured at the Earth's centre.
//! Leaders sit on the shell of radius `R_sat = R_earth + h`; followers sit on
//! the same shell inside a cap of half-angle `θ_cap` around their leader.

use core::f64::consts::{FRAC_PI_2, PI, TAU};

#[allow(unused_imports)] // inherent float methods shadow it whenever std is linked
use num_traits::Float;
use rand::Rng;

use crate::quadrature;
use crate::{Error, Result};

/// Slack allowed on `acos` arguments before a domain error is raised.
const ACOS_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ConstellationConfig {
    pub earth_radius_km: f64,
    pub altitude_km: f64,
    pub n_leaders: u32,
    pub n_followers: u32,
    pub cap_half_angle_rad: f64,
    pub max_contact_angle_rad: f64,
}

impl Default for ConstellationConfig {
    fn default() -> Self {
        ConstellationConfig {
            earth_radius_km: 6371.0,
            altitude_km: 600.0,
            n_leaders: 1000,
            n_followers: 10,
            cap_half_angle_rad: 1f64.to_radians(),
            max_contact_angle_rad: PI / 4.0,
        }
    }
}

impl ConstellationConfig {
    pub fn shell_radius_km(&self) -> f64 {
        self.earth_radius_km + self.altitude_km
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.earth_radius_km > 0.0) {
            return Err(Error::invalid("earth_radius_km", "must be positive"));
        }
        if !(self.altitude_km > 0.0) {
            return Err(Error::invalid("altitude_km", "must be positive"));
        }
        if self.n_leaders < 1 {
            return Err(Error::invalid("n_leaders", "must be at least 1"));
        }
        if !(self.cap_half_angle_rad > 0.0 && self.cap_half_angle_rad < PI / 2.0) {
            return Err(Error::invalid("cap_half_angle", "must lie in (0, 90) degrees"));
        }
        if !(self.max_contact_angle_rad > 0.0 && self.max_contact_angle_rad < PI / 2.0) {
            return Err(Error::invalid("max_contact_angle", "must lie in (0, 90) degrees"));
        }
        Ok(())
    }

    /// Whether `θ_max` respects the follower line-of-sight limit.
    pub fn los_constraint_holds(&self) -> bool {
        self.max_contact_angle_rad <= follower_los_limit(self)
    }

    /// Surface area of the follower cap, `2π R_sat² (1 − cos θ_cap)`.
    pub fn cap_area_km2(&self) -> f64 {
        let r = self.shell_radius_km();
        TAU * r * r * versine(self.cap_half_angle_rad)
    }
}

/// Direction of a follower relative to its leader: polar angle `ψ` from the
/// leader axis and azimuth `φ` measured from the leader–user plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalDirection {
    pub polar_rad: f64,
    pub azimuth_rad: f64,
}

/// `1 − cos x`, without cancellation for small `x`.
pub(crate) fn versine(x: f64) -> f64 {
    let s = (0.5 * x).sin();
    2.0 * s * s
}

fn chord_from_versine(vers: f64, cfg: &ConstellationConfig) -> f64 {
    let rs = cfg.shell_radius_km();
    let re = cfg.earth_radius_km;
    let dh = rs - re;
    (dh * dh + 2.0 * rs * re * vers.max(0.0)).sqrt()
}

fn checked_acos(arg: f64, what: &'static str) -> Result<f64> {
    if !(-1.0 - ACOS_SLACK..=1.0 + ACOS_SLACK).contains(&arg) {
        return Err(Error::Domain { what, value: arg });
    }
    Ok(arg.clamp(-1.0, 1.0).acos())
}

/// Central angle at which a leader is `d_max_km` away from a ground user.
pub fn max_contact_angle(d_max_km: f64, cfg: &ConstellationConfig) -> Result<f64> {
    let rs = cfg.shell_radius_km();
    let re = cfg.earth_radius_km;
    let arg = (re * re + rs * rs - d_max_km * d_max_km) / (2.0 * re * rs);
    checked_acos(arg, "max contact angle cosine")
}

/// Largest `θ_max` for which every follower of the serving leader stays above
/// the user's horizon: `acos(R_earth / R_sat) − θ_cap`.
pub fn follower_los_limit(cfg: &ConstellationConfig) -> f64 {
    (cfg.earth_radius_km / cfg.shell_radius_km()).acos() - cfg.cap_half_angle_rad
}

/// Leader-to-user distance (km) at contact angle `theta`.
pub fn chord_leader_user(theta: f64, cfg: &ConstellationConfig) -> f64 {
    chord_from_versine(versine(theta), cfg)
}

/// Follower-to-user distance (km) for a user at contact angle `theta` from
/// the leader and a follower at `(psi, phi)` around the leader.
pub fn chord_follower_user(theta: f64, psi: f64, phi: f64, cfg: &ConstellationConfig) -> f64 {
    // 1 − (sinθ sinψ cosφ + cosθ cosψ), rearranged so ψ = 0 reduces exactly
    // to the leader chord.
    let vers = versine(theta) + theta.cos() * versine(psi) - theta.sin() * psi.sin() * phi.cos();
    chord_from_versine(vers, cfg)
}

/// Leader-to-follower distance (km) at angular separation `psi`.
pub fn chord_leader_follower(psi: f64, cfg: &ConstellationConfig) -> f64 {
    cfg.shell_radius_km() * (2.0 * versine(psi)).sqrt()
}

/// `((1 + cos θ)/2)^n`, the probability that `n` uniform points all miss
/// the cap of half-angle `θ`.
pub(crate) fn void_probability(theta: f64, n: u32) -> f64 {
    if n == 0 {
        return 1.0;
    }
    // (1 + cos θ)/2 = cos²(θ/2) = 1 − 2 sin²(θ/4)
    let s = (0.25 * theta).sin();
    let ln_c = (-2.0 * s * s).ln_1p();
    (2.0 * n as f64 * ln_c).exp()
}

/// CDF of the nearest-leader contact angle.
pub fn leader_contact_cdf(theta: f64, cfg: &ConstellationConfig) -> f64 {
    contact_cdf(theta, cfg.n_leaders)
}

fn contact_cdf(theta: f64, n: u32) -> f64 {
    if theta <= 0.0 {
        return 0.0;
    }
    if theta >= PI {
        return 1.0;
    }
    let s = (0.25 * theta).sin();
    let ln_c = (-2.0 * s * s).ln_1p();
    -(2.0 * n as f64 * ln_c).exp_m1()
}

/// Density of the nearest-leader contact angle. Not renormalised to
/// `[0, θ_max]`; the missing mass is `((1 + cos θ_max)/2)^N_L`.
pub fn leader_contact_pdf(theta: f64, cfg: &ConstellationConfig) -> f64 {
    contact_pdf(theta, cfg.n_leaders)
}

fn contact_pdf(theta: f64, n: u32) -> f64 {
    if !(0.0..=PI).contains(&theta) {
        return 0.0;
    }
    0.5 * n as f64 * theta.sin() * void_probability(theta, n - 1)
}

/// Contact angle `θ` with `F_LU(θ) = q`.
pub fn leader_contact_quantile(q: f64, cfg: &ConstellationConfig) -> f64 {
    if q <= 0.0 {
        return 0.0;
    }
    if q >= 1.0 {
        return PI;
    }
    // sin²(θ/2) = 1 − (1 − q)^{1/N}
    let s2 = -((-q).ln_1p() / cfg.n_leaders as f64).exp_m1();
    2.0 * s2.sqrt().min(1.0).asin()
}

/// Area (km²) of the part of a cap of half-angle `theta_c` cut off by a
/// chord plane at angular distance `theta_o` from the cap edge.
pub fn cap_segment_area(theta_c: f64, theta_o: f64, cfg: &ConstellationConfig) -> Result<f64> {
    if !(theta_o >= 0.0 && theta_o <= 2.0 * theta_c && 2.0 * theta_c <= PI) {
        return Err(Error::Domain { what: "cap intercept angle", value: theta_o });
    }
    if theta_o == 0.0 {
        return Ok(0.0);
    }
    let r = cfg.shell_radius_km();
    let half_width = r * theta_c.sin();
    let lower = r * theta_c.cos() * (theta_c - theta_o).tan();
    // l = half_width·sin u takes the square-root edges out of the integrand
    let integrand = |u: f64| {
        let inner = half_width * u.cos() / r;
        2.0 * r * inner.min(1.0).asin() * half_width * u.cos()
    };
    let start = (lower / half_width).clamp(-1.0, 1.0).asin();
    let tol = 1e-12 * r * r;
    quadrature::adaptive_simpson(integrand, start, FRAC_PI_2, tol, 50)
}

// dS/dθ_o divided by the cap area, written in terms of x = θ_c − θ_o.
fn segment_density(x: f64, cfg: &ConstellationConfig) -> f64 {
    let tc = cfg.cap_half_angle_rad;
    let (s, c) = (tc.sin(), tc.cos());
    let t = x.tan();
    let arg = (s * s - c * c * t * t).max(0.0).sqrt();
    let sec2 = 1.0 + t * t;
    c * sec2 * arg.min(1.0).asin() / (PI * versine(tc))
}

/// Density of the follower-to-user contact angle given the leader contact
/// angle `theta_lu`, from the chord-cut approximation of the intersected cap.
///
/// When the user lies under the cap (`theta_lu < θ_cap`) the region closest
/// to the user is a strip bounded by two cuts and both edges contribute.
/// Outside the support the density is zero.
pub fn follower_contact_pdf(theta: f64, theta_lu: f64, cfg: &ConstellationConfig) -> f64 {
    let tc = cfg.cap_half_angle_rad;
    let lo = (theta_lu - tc).abs();
    let hi = theta_lu + tc;
    if theta_lu < tc && theta >= 0.0 && theta < tc - theta_lu {
        segment_density(theta_lu - theta, cfg) + segment_density(theta_lu + theta, cfg)
    } else if theta >= lo && theta <= hi {
        segment_density(theta_lu - theta, cfg)
    } else {
        0.0
    }
}

/// CDF matching [`follower_contact_pdf`], evaluated through cap segment areas.
pub fn follower_contact_cdf(theta: f64, theta_lu: f64, cfg: &ConstellationConfig) -> Result<f64> {
    let tc = cfg.cap_half_angle_rad;
    let cap = cfg.cap_area_km2();
    if theta <= 0.0 || theta <= theta_lu - tc {
        return Ok(0.0);
    }
    let theta = theta.min(theta_lu + tc);
    let offset = tc - theta_lu;
    if theta_lu < tc && theta < offset {
        let near = cap_segment_area(tc, offset + theta, cfg)?;
        let far = cap_segment_area(tc, offset - theta, cfg)?;
        Ok((near - far) / cap)
    } else {
        Ok(cap_segment_area(tc, (offset + theta).min(2.0 * tc), cfg)? / cap)
    }
}

/// A law on angles made of a point mass plus a density. Both extreme
/// follower laws are shifted copies of the leader contact law, so the density
/// is stored as a shift of it restricted to `support`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedAngularDistribution {
    pub atom_weight: f64,
    pub atom_location_rad: f64,
    pub support: (f64, f64),
    shift_rad: f64,
    n_leaders: u32,
}

impl MixedAngularDistribution {
    pub fn density(&self, theta: f64) -> f64 {
        if theta < self.support.0 || theta > self.support.1 {
            return 0.0;
        }
        contact_pdf(theta + self.shift_rad, self.n_leaders)
    }

    /// `P(Θ ≤ θ)`, including the atom.
    pub fn cdf(&self, theta: f64) -> f64 {
        let atom = if theta >= self.atom_location_rad { self.atom_weight } else { 0.0 };
        atom + self.continuous_mass(theta)
    }

    /// `P(Θ < θ)`.
    pub fn cdf_left(&self, theta: f64) -> f64 {
        let atom = if theta > self.atom_location_rad { self.atom_weight } else { 0.0 };
        atom + self.continuous_mass(theta)
    }

    fn continuous_mass(&self, theta: f64) -> f64 {
        let (lo, hi) = self.support;
        if theta <= lo {
            return 0.0;
        }
        let t = theta.min(hi);
        contact_cdf(t + self.shift_rad, self.n_leaders) - contact_cdf(lo + self.shift_rad, self.n_leaders)
    }

    /// Mass of the continuous part over the whole support.
    pub fn continuous_total(&self) -> f64 {
        self.continuous_mass(self.support.1)
    }
}

/// Laws of the smallest and largest user-to-cap angles: the cap edge nearest
/// to and farthest from the user, `max(θ_LU − θ_cap, 0)` and `θ_LU + θ_cap`.
pub fn extreme_contact_laws(cfg: &ConstellationConfig) -> (MixedAngularDistribution, MixedAngularDistribution) {
    let tc = cfg.cap_half_angle_rad;
    let tmax = cfg.max_contact_angle_rad;
    let nl = cfg.n_leaders;
    let min_law = MixedAngularDistribution {
        atom_weight: contact_cdf(tc, nl),
        atom_location_rad: 0.0,
        support: (0.0, (tmax - tc).max(0.0)),
        shift_rad: tc,
        n_leaders: nl,
    };
    let max_law = MixedAngularDistribution {
        atom_weight: 0.0,
        atom_location_rad: tc,
        support: (tc, tmax + tc),
        shift_rad: -tc,
        n_leaders: nl,
    };
    (min_law, max_law)
}

/// Nearest of `N_L` leaders placed uniformly on the sphere, by explicit
/// sampling of every leader. `1 − cos θ` of a uniform point is uniform on
/// `[0, 2]`, so only the smallest `sin²(θ/2)` needs to be tracked.
pub fn sample_nearest_leader_angle<R: Rng + ?Sized>(rng: &mut R, cfg: &ConstellationConfig) -> f64 {
    let mut best = 1.0f64;
    for _ in 0..cfg.n_leaders {
        let v: f64 = rng.random();
        if v < best {
            best = v;
        }
    }
    2.0 * best.sqrt().asin()
}

/// Nearest-leader angle by inverting the contact CDF.
pub fn sample_leader_angle_inverse<R: Rng + ?Sized>(rng: &mut R, cfg: &ConstellationConfig) -> f64 {
    let u: f64 = rng.random();
    leader_contact_quantile(u, cfg)
}

/// Uniform direction inside the follower cap: `cos ψ` uniform on
/// `[cos θ_cap, 1]`, `φ` uniform on `[0, 2π)`.
pub fn sample_follower_direction<R: Rng + ?Sized>(rng: &mut R, cfg: &ConstellationConfig) -> SphericalDirection {
    let u: f64 = rng.random();
    let v: f64 = rng.random();
    let edge = (0.5 * cfg.cap_half_angle_rad).sin();
    // sin²(ψ/2) is uniform on [0, sin²(θ_cap/2)]
    let polar = 2.0 * (edge * u.sqrt()).asin();
    SphericalDirection { polar_rad: polar, azimuth_rad: TAU * v }
}

/// Contact angle between the user and a follower at `dir` when the leader
/// sits at contact angle `theta_lu`.
pub fn follower_contact_angle(theta_lu: f64, dir: SphericalDirection) -> f64 {
    let vers = versine(theta_lu) + theta_lu.cos() * versine(dir.polar_rad)
        - theta_lu.sin() * dir.polar_rad.sin() * dir.azimuth_rad.cos();
    // γ = 2 asin(sqrt(vers / 2))
    2.0 * (0.5 * vers.max(0.0)).sqrt().min(1.0).asin()
}
