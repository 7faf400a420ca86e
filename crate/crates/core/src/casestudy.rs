//! Leader power budgeting: a cluster whose leader splits a fixed transmit
//! budget between its own downlink and the ISLs that feed its followers,
//! compared with a lone leader spending the whole budget on the downlink.

use alloc::vec::Vec;

#[allow(unused_imports)] // inherent float methods shadow it whenever std is linked
use num_traits::Float;

use crate::analysis::{follower_rate_bounds, isl_mean_rate, rate_leader, EstimateKind, PerformanceEstimate, Precision};
use crate::channel::db_to_linear;
use crate::roots::{try_bisect, Stop};
use crate::{Error, Result, ScenarioParams};

/// Lower end of the ISL power search, in watts (−60 dBW).
pub const ISL_POWER_FLOOR_W: f64 = 1e-6;
const BALANCE_STOP: Stop = Stop { x_tol: 1e-10, f_tol: 0.0, max_iter: 200 };
const BALANCE_REL_RESIDUAL: f64 = 1e-6;

fn watts_to_dbw(w: f64) -> f64 {
    if w > 0.0 {
        10.0 * w.log10()
    } else {
        f64::NEG_INFINITY
    }
}

/// How the leader budget `ρ_LU^(1)` is divided: `ρ_LU^(1) = ρ_LU^(2) + N·ρ_LF`
/// in watts, with one ISL power shared by all followers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSplit {
    pub total_lu_power_dbw: f64,
    pub direct_lu_power_dbw: f64,
    pub isl_power_per_follower_dbw: f64,
    pub effective_n_followers: u32,
}

impl PowerSplit {
    fn from_watts(total_w: f64, isl_w: f64, n: u32) -> Self {
        PowerSplit {
            total_lu_power_dbw: watts_to_dbw(total_w),
            direct_lu_power_dbw: watts_to_dbw(total_w - f64::from(n) * isl_w),
            isl_power_per_follower_dbw: watts_to_dbw(isl_w),
            effective_n_followers: n,
        }
    }

    pub fn total_w(&self) -> f64 {
        db_to_linear(self.total_lu_power_dbw)
    }

    pub fn direct_w(&self) -> f64 {
        db_to_linear(self.direct_lu_power_dbw)
    }

    pub fn isl_w(&self) -> f64 {
        db_to_linear(self.isl_power_per_follower_dbw)
    }

    /// Relative mismatch of the linear budget identity.
    pub fn budget_residual(&self) -> f64 {
        let total = self.total_w();
        (total - self.direct_w() - f64::from(self.effective_n_followers) * self.isl_w()).abs() / total
    }
}

/// Per-follower downlink rate used for balancing and for the cluster rate:
/// the midpoint of the follower rate bounds, in bit/s.
pub fn follower_rate_midpoint(s: &ScenarioParams, prec: &Precision) -> Result<f64> {
    let (lo, up) = follower_rate_bounds(s, prec)?;
    Ok(0.5 * (lo + up))
}

fn isl_rate_at(s: &ScenarioParams, watts: f64, prec: &Precision) -> Result<f64> {
    let mut t = s.clone();
    t.lf = s.lf.with_power_w(watts);
    isl_mean_rate(&t, prec)
}

/// ISL power in watts whose cap-averaged rate equals `target` bit/s, or
/// `None` when even `upper_w` falls short.
fn balance_power(s: &ScenarioParams, target: f64, upper_w: f64) -> Result<Option<f64>> {
    if !(target > 0.0) {
        return Ok(Some(0.0));
    }
    let isl_prec = Precision::with_abs(1e-12);
    let g = |w: f64| Ok(isl_rate_at(s, w, &isl_prec)? - target);
    if g(upper_w)? < 0.0 {
        return Ok(None);
    }
    if g(ISL_POWER_FLOOR_W)? >= 0.0 {
        return Ok(Some(ISL_POWER_FLOOR_W));
    }
    let root = try_bisect(g, ISL_POWER_FLOOR_W, upper_w, BALANCE_STOP)?;
    let residual = g(root)?;
    if residual.abs() > BALANCE_REL_RESIDUAL * target {
        return Err(Error::RootNotConverged { iterations: BALANCE_STOP.max_iter, root, residual });
    }
    Ok(Some(root))
}

fn checked_split(s: &ScenarioParams, isl_w: f64) -> Result<PowerSplit> {
    let total = s.lu.tx_power_w();
    let n = s.cfg.n_followers;
    if f64::from(n) * isl_w >= total {
        return Err(Error::InfeasibleBudget { total_w: total, isl_w, n_followers: n });
    }
    Ok(PowerSplit::from_watts(total, isl_w, n))
}

/// Solves the ISL power so that the cap-averaged ISL rate equals the
/// follower downlink rate, then charges it to the leader budget held in
/// `s.lu.tx_power_dbw`.
pub fn solve_isl_power(s: &ScenarioParams, prec: &Precision) -> Result<PowerSplit> {
    let total = s.lu.tx_power_w();
    let target = follower_rate_midpoint(s, prec)?;
    match balance_power(s, target, total)? {
        Some(w) => checked_split(s, w),
        None => Err(Error::InfeasibleBudget { total_w: total, isl_w: total, n_followers: s.cfg.n_followers }),
    }
}

/// Largest follower count, at most the configured one, whose balanced ISL
/// power fits strictly inside the leader budget. Zero followers means the
/// lone-leader architecture.
pub fn reduce_followers(s: &ScenarioParams, prec: &Precision) -> Result<PowerSplit> {
    let total = s.lu.tx_power_w();
    let target = follower_rate_midpoint(s, prec)?;
    match balance_power(s, target, total)? {
        Some(w) => Ok(PowerSplit::from_watts(total, w, affordable_followers(total, w, s.cfg.n_followers))),
        None => Ok(PowerSplit::from_watts(total, total, 0)),
    }
}

fn affordable_followers(total_w: f64, isl_w: f64, wanted: u32) -> u32 {
    if !(isl_w > 0.0) {
        return wanted;
    }
    let mut n = wanted;
    while n > 0 && f64::from(n) * isl_w >= total_w {
        n -= 1;
    }
    n
}

/// Sweep variable of an architecture comparison.
#[derive(Debug, Clone, PartialEq)]
pub enum Sweep {
    /// Requested follower counts; ISL power is solved by rate balance.
    FollowerCounts(Vec<u32>),
    /// ISL powers per follower in dBW at the configured follower count.
    IslPowers(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRow {
    pub sweep_value: f64,
    /// Lone leader with the whole budget.
    pub rate_nf: PerformanceEstimate,
    /// Leader with followers.
    pub rate_lf: PerformanceEstimate,
    pub split: PowerSplit,
}

/// Lone-leader versus cluster rates at every sweep point. The cluster rate
/// is the leader rate at the reduced direct power plus, per follower, the
/// smaller of the ISL rate and the follower downlink rate (the bound
/// midpoint). Infeasible points shed followers until the budget fits.
pub fn compare_architectures(s: &ScenarioParams, sweep: &Sweep, prec: &Precision) -> Result<Vec<ComparisonRow>> {
    let total = s.lu.tx_power_w();
    let nf = rate_leader(s, prec)?;
    let downlink = follower_rate_midpoint(s, prec)?;
    let cluster_rate = |split: &PowerSplit, isl_rate: f64| -> Result<PerformanceEstimate> {
        let n = split.effective_n_followers;
        if n == 0 {
            return Ok(PerformanceEstimate { kind: EstimateKind::Midpoint, ..nf });
        }
        let mut direct = s.clone();
        direct.lu.tx_power_dbw = split.direct_lu_power_dbw;
        let leader = rate_leader(&direct, prec)?.value;
        Ok(PerformanceEstimate::analytic(leader + f64::from(n) * isl_rate.min(downlink), EstimateKind::Midpoint))
    };
    let mut rows = Vec::new();
    match sweep {
        Sweep::FollowerCounts(counts) => {
            let balanced = balance_power(s, downlink, total)?;
            for &n in counts {
                let split = match balanced {
                    Some(w) => PowerSplit::from_watts(total, w, affordable_followers(total, w, n)),
                    None => PowerSplit::from_watts(total, total, 0),
                };
                rows.push(ComparisonRow {
                    sweep_value: f64::from(n),
                    rate_nf: nf,
                    rate_lf: cluster_rate(&split, downlink)?,
                    split,
                });
            }
        }
        Sweep::IslPowers(powers) => {
            for &dbw in powers {
                let w = db_to_linear(dbw);
                let split = PowerSplit::from_watts(total, w, affordable_followers(total, w, s.cfg.n_followers));
                let isl = isl_rate_at(s, w, prec)?;
                rows.push(ComparisonRow { sweep_value: dbw, rate_nf: nf, rate_lf: cluster_rate(&split, isl)?, split });
            }
        }
    }
    Ok(rows)
}
