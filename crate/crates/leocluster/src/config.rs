//! Flat `key = value` scenario files.
//!
//! Lengths are in km, angles in degrees, powers in dBW, noise in dBm, gains
//! in dBi and dB, bandwidths in Hz. Keys left out keep their defaults.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use leocluster_core::channel::gamma_approx;
use leocluster_core::geometry::follower_los_limit;
use leocluster_core::ScenarioParams;

pub const KEYS: &[&str] = &[
    "earth_radius_km",
    "altitude_km",
    "n_leaders",
    "n_followers",
    "cap_half_angle_deg",
    "max_contact_angle_deg",
    "gamma_th_db",
    "lu_power_dbw",
    "fu_power_dbw",
    "lf_power_dbw",
    "lu_gain_dbi",
    "fu_gain_dbi",
    "lf_gain_dbi",
    "lu_wavelength_m",
    "fu_wavelength_m",
    "lf_wavelength_m",
    "rain_u_db",
    "rain_f_db",
    "noise_u_dbm",
    "noise_f_dbm",
    "sr_omega",
    "sr_b0",
    "sr_m",
    "bandwidth_lu_hz",
    "bandwidth_fu_hz",
    "bandwidth_lf_hz",
];

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}: {reason}: `{text}`")]
    Syntax { line: usize, text: String, reason: &'static str },
    #[error("{}unknown key `{key}`", at(*line))]
    UnknownKey { line: Option<usize>, key: String },
    #[error("{}`{key}` expects {expected}, got `{value}`", at(*line))]
    BadValue { line: Option<usize>, key: String, value: String, expected: &'static str },
    #[error("invalid scenario: {0}")]
    Scenario(#[from] leocluster_core::Error),
}

fn at(line: Option<usize>) -> String {
    line.map(|l| format!("line {l}: ")).unwrap_or_default()
}

/// Scenario under construction. The fading triple is held apart so the
/// Gamma approximation is derived once all keys are in.
#[derive(Debug, Clone)]
pub struct ConfigBuilder {
    scenario: ScenarioParams,
    sr: (f64, f64, f64),
}

impl Default for ConfigBuilder {
    fn default() -> Self {
        let scenario = ScenarioParams::default();
        let f = scenario.fading;
        ConfigBuilder { sr: (f.omega, f.b0, f.m), scenario }
    }
}

impl ConfigBuilder {
    pub fn from_scenario(scenario: ScenarioParams) -> Self {
        let f = scenario.fading;
        ConfigBuilder { sr: (f.omega, f.b0, f.m), scenario }
    }

    pub fn set(&mut self, key: &str, value: &str, line: Option<usize>) -> Result<(), ConfigError> {
        let bad = |expected| ConfigError::BadValue { line, key: key.to_owned(), value: value.to_owned(), expected };
        let real = || value.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| bad("a finite number"));
        let count = || value.parse::<u32>().map_err(|_| bad("a non-negative integer"));
        let s = &mut self.scenario;
        match key {
            "earth_radius_km" => s.cfg.earth_radius_km = real()?,
            "altitude_km" => s.cfg.altitude_km = real()?,
            "n_leaders" => s.cfg.n_leaders = count()?,
            "n_followers" => s.cfg.n_followers = count()?,
            "cap_half_angle_deg" => s.cfg.cap_half_angle_rad = real()?.to_radians(),
            "max_contact_angle_deg" => s.cfg.max_contact_angle_rad = real()?.to_radians(),
            "gamma_th_db" => s.gamma_th_db = real()?,
            "lu_power_dbw" => s.lu.tx_power_dbw = real()?,
            "fu_power_dbw" => s.fu.tx_power_dbw = real()?,
            "lf_power_dbw" => s.lf.tx_power_dbw = real()?,
            "lu_gain_dbi" => s.lu.antenna_gain_dbi = real()?,
            "fu_gain_dbi" => s.fu.antenna_gain_dbi = real()?,
            "lf_gain_dbi" => s.lf.antenna_gain_dbi = real()?,
            "lu_wavelength_m" => s.lu.wavelength_m = real()?,
            "fu_wavelength_m" => s.fu.wavelength_m = real()?,
            "lf_wavelength_m" => s.lf.wavelength_m = real()?,
            "rain_u_db" => {
                let v = real()?;
                s.lu.rain_attenuation_db = v;
                s.fu.rain_attenuation_db = v;
            }
            "rain_f_db" => s.lf.rain_attenuation_db = real()?,
            "noise_u_dbm" => {
                let v = real()?;
                s.lu.noise_power_dbm = v;
                s.fu.noise_power_dbm = v;
            }
            "noise_f_dbm" => s.lf.noise_power_dbm = real()?,
            "sr_omega" => self.sr.0 = real()?,
            "sr_b0" => self.sr.1 = real()?,
            "sr_m" => self.sr.2 = real()?,
            "bandwidth_lu_hz" => s.lu.bandwidth_hz = real()?,
            "bandwidth_fu_hz" => s.fu.bandwidth_hz = real()?,
            "bandwidth_lf_hz" => s.lf.bandwidth_hz = real()?,
            _ => return Err(ConfigError::UnknownKey { line, key: key.to_owned() }),
        }
        Ok(())
    }

    /// `key=value` as given on the command line.
    pub fn set_pair(&mut self, pair: &str) -> Result<(), ConfigError> {
        let (k, v) = split_pair(pair).ok_or_else(|| ConfigError::BadValue {
            line: None,
            key: pair.to_owned(),
            value: String::new(),
            expected: "the form key=value",
        })?;
        self.set(k, v, None)
    }

    pub fn parse_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = split_pair(line).ok_or_else(|| ConfigError::Syntax {
                line: i + 1,
                text: raw.to_owned(),
                reason: "expected `key = value`",
            })?;
            self.set(k, v, Some(i + 1))?;
        }
        Ok(())
    }

    pub fn build(&self) -> Result<ScenarioParams, ConfigError> {
        let mut s = self.scenario.clone();
        s.fading = gamma_approx(self.sr.0, self.sr.1, self.sr.2)?;
        s.validate()?;
        Ok(s)
    }
}

fn split_pair(s: &str) -> Option<(&str, &str)> {
    let (k, v) = s.split_once('=')?;
    let (k, v) = (k.trim(), v.trim());
    (!k.is_empty() && !v.is_empty()).then_some((k, v))
}

pub fn parse_config(text: &str) -> Result<ScenarioParams, ConfigError> {
    let mut b = ConfigBuilder::default();
    b.parse_text(text)?;
    b.build()
}

pub fn read_config(path: &Path) -> Result<ConfigBuilder, ConfigError> {
    let text =
        std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_owned(), source })?;
    let mut b = ConfigBuilder::default();
    b.parse_text(&text)?;
    Ok(b)
}

pub fn load_config(path: &Path) -> Result<ScenarioParams, ConfigError> {
    read_config(path)?.build()
}

/// Settings that are legal but outside the model's comfort zone.
pub fn warnings(s: &ScenarioParams) -> Vec<String> {
    let mut out = Vec::new();
    let limit = follower_los_limit(&s.cfg);
    if s.cfg.max_contact_angle_rad > limit {
        out.push(format!(
            "max contact angle {:.4} rad exceeds the follower line-of-sight limit {:.4} rad",
            s.cfg.max_contact_angle_rad, limit
        ));
    }
    if !leocluster_core::analysis::bounds_regime_holds(&s.cfg) {
        out.push(format!(
            "cap half-angle is more than a tenth of the max contact angle ({:.4} vs {:.4} rad); rate bounds are loose",
            s.cfg.cap_half_angle_rad, s.cfg.max_contact_angle_rad
        ));
    }
    out
}

/// The effective configuration, one `key = value` line per key.
pub fn render(b: &ConfigBuilder) -> String {
    let s = &b.scenario;
    let vals: [f64; 26] = [
        s.cfg.earth_radius_km,
        s.cfg.altitude_km,
        f64::from(s.cfg.n_leaders),
        f64::from(s.cfg.n_followers),
        s.cfg.cap_half_angle_rad.to_degrees(),
        s.cfg.max_contact_angle_rad.to_degrees(),
        s.gamma_th_db,
        s.lu.tx_power_dbw,
        s.fu.tx_power_dbw,
        s.lf.tx_power_dbw,
        s.lu.antenna_gain_dbi,
        s.fu.antenna_gain_dbi,
        s.lf.antenna_gain_dbi,
        s.lu.wavelength_m,
        s.fu.wavelength_m,
        s.lf.wavelength_m,
        s.lu.rain_attenuation_db,
        s.lf.rain_attenuation_db,
        s.lu.noise_power_dbm,
        s.lf.noise_power_dbm,
        b.sr.0,
        b.sr.1,
        b.sr.2,
        s.lu.bandwidth_hz,
        s.fu.bandwidth_hz,
        s.lf.bandwidth_hz,
    ];
    let mut out = String::new();
    for (k, v) in KEYS.iter().zip(vals) {
        let _ = writeln!(out, "{k} = {v}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_defaults() {
        assert_eq!(parse_config("").unwrap(), ScenarioParams::default());
        assert_eq!(parse_config("# only a comment\n\n   \n").unwrap(), ScenarioParams::default());
    }

    #[test]
    fn override_threshold() {
        let s = parse_config("gamma_th_db = -6   # tighter\n").unwrap();
        assert_eq!(s.gamma_th_db, -6.0);
    }

    #[test]
    fn malformed_integer_names_line() {
        let e = parse_config("n_leaders = 1000\nn_followers = ten\n").unwrap_err();
        assert!(matches!(e, ConfigError::BadValue { line: Some(2), .. }));
        assert!(e.to_string().contains("line 2"), "{e}");
    }

    #[test]
    fn missing_equals_is_syntax_error() {
        let e = parse_config("\naltitude_km 500\n").unwrap_err();
        assert!(matches!(e, ConfigError::Syntax { line: 2, .. }));
    }

    #[test]
    fn unknown_key() {
        let e = parse_config("altitude = 500").unwrap_err();
        assert!(matches!(e, ConfigError::UnknownKey { line: Some(1), .. }));
    }

    #[test]
    fn units_at_boundary() {
        let s = parse_config("cap_half_angle_deg = 2\nmax_contact_angle_deg = 30\nnoise_u_dbm = -90\n").unwrap();
        assert!((s.cfg.cap_half_angle_rad - 2f64.to_radians()).abs() < 1e-15);
        assert!((s.cfg.max_contact_angle_rad - 30f64.to_radians()).abs() < 1e-15);
        assert_eq!(s.lu.noise_power_dbm, -90.0);
        assert_eq!(s.fu.noise_power_dbm, -90.0);
        assert_eq!(s.lf.noise_power_dbm, -84.0);
    }

    #[test]
    fn fading_is_rederived() {
        let s = parse_config("sr_omega = 0.5\n").unwrap();
        assert_eq!(s.fading, gamma_approx(0.5, 0.158, 19.4).unwrap());
    }

    #[test]
    fn invalid_values_fail_validation() {
        assert!(matches!(parse_config("n_leaders = 0"), Err(ConfigError::Scenario(_))));
        assert!(matches!(parse_config("bandwidth_lu_hz = -1"), Err(ConfigError::Scenario(_))));
    }

    #[test]
    fn defaults_warn_about_los_limit() {
        let w = warnings(&ScenarioParams::default());
        assert_eq!(w.len(), 1);
        assert!(w[0].contains("line-of-sight"));
    }

    #[test]
    fn render_round_trips() {
        let mut b = ConfigBuilder::default();
        b.set_pair("altitude_km=550").unwrap();
        b.set_pair("sr_m=5").unwrap();
        let again = parse_config(&render(&b)).unwrap();
        let want = b.build().unwrap();
        assert_eq!(again.cfg.altitude_km, want.cfg.altitude_km);
        assert_eq!(again.fading, want.fading);
        assert!((again.cfg.cap_half_angle_rad - want.cfg.cap_half_angle_rad).abs() < 1e-15);
    }
}
