//! Complete parameter set for one evaluation point.

use crate::channel::{composite_gain, db_to_linear, LinkBudget, ShadowedRicianParams};
use crate::geometry::ConstellationConfig;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioParams {
    pub cfg: ConstellationConfig,
    /// Leader to user.
    pub lu: LinkBudget,
    /// Follower to user.
    pub fu: LinkBudget,
    /// Leader to follower.
    pub lf: LinkBudget,
    pub fading: ShadowedRicianParams,
    pub gamma_th_db: f64,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        let ground = LinkBudget {
            tx_power_dbw: 20.0,
            antenna_gain_dbi: 30.0,
            wavelength_m: 0.015,
            rain_attenuation_db: -2.0,
            noise_power_dbm: -94.0,
            bandwidth_hz: 10e6,
        };
        ScenarioParams {
            cfg: ConstellationConfig::default(),
            fu: LinkBudget { tx_power_dbw: 15.0, ..ground.clone() },
            lf: LinkBudget { tx_power_dbw: 5.0, rain_attenuation_db: 0.0, noise_power_dbm: -84.0, ..ground.clone() },
            lu: ground,
            fading: ShadowedRicianParams::default(),
            gamma_th_db: -5.0,
        }
    }
}

impl ScenarioParams {
    pub fn validate(&self) -> Result<()> {
        self.cfg.validate()?;
        self.lu.validate()?;
        self.fu.validate()?;
        self.lf.validate()?;
        if !self.gamma_th_db.is_finite() {
            return Err(Error::invalid("gamma_th_db", "must be finite"));
        }
        let f = &self.fading;
        let identity = f.m1 * f.m2 / f.mean_power() - 1.0;
        if !(identity.abs() <= 1e-12) {
            return Err(Error::invalid("fading", "Gamma approximation out of sync with (omega, b0, m)"));
        }
        Ok(())
    }

    pub fn gamma_th(&self) -> f64 {
        db_to_linear(self.gamma_th_db)
    }

    pub fn with_followers(&self, n: u32) -> ScenarioParams {
        let mut s = self.clone();
        s.cfg.n_followers = n;
        s
    }

    pub fn xi_lu(&self) -> f64 {
        composite_gain(&self.lu)
    }

    pub fn xi_fu(&self) -> f64 {
        composite_gain(&self.fu)
    }

    pub fn xi_lf(&self) -> f64 {
        composite_gain(&self.lf)
    }
}
