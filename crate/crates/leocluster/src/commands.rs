//! Experiment runners. Each command turns a scenario into one CSV table.

use std::path::PathBuf;

use leocluster_core::analysis::{
    outage_cluster, outage_cluster_bounds, outage_follower_given_theta, outage_leader, rate_cluster,
    rate_cluster_bounds, rate_leader,
};
use leocluster_core::casestudy::compare_architectures;
use leocluster_core::geometry::{extreme_contact_laws, follower_contact_cdf, leader_contact_cdf, leader_contact_quantile};
use leocluster_core::montecarlo::{ks_distance, simulate_follower_outage_given_theta, AngleSample};
use leocluster_core::{Error, PerformanceEstimate, Precision, ScenarioParams, SimulationPlan, Sweep};

use crate::config::{read_config, warnings, ConfigBuilder, ConfigError};
use crate::csv::{Cell, Table};
use crate::driver::{angle_samples, map_points, simulate_outage, simulate_rate};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    OutageSweep,
    RateSweep,
    Casestudy,
    Validate,
    Lemmas,
}

impl Command {
    pub fn default_trials(self) -> u64 {
        match self {
            Command::Lemmas => 1_000_000,
            _ => 100_000,
        }
    }

    fn default_sweep(self) -> Option<SweepRange> {
        let r = |key: &str, start, stop, step| Some(SweepRange { key: key.to_owned(), start, stop, step });
        match self {
            Command::OutageSweep => r("gamma_th_db", -10.0, 5.0, 1.0),
            Command::RateSweep => r("altitude_km", 400.0, 1200.0, 100.0),
            Command::Casestudy => r("n_followers", 0.0, 20.0, 1.0),
            Command::Validate | Command::Lemmas => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRange {
    pub key: String,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl SweepRange {
    /// Parses `key=start:stop:step`.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let bad = || ConfigError::BadValue {
            line: None,
            key: "--sweep".into(),
            value: text.to_owned(),
            expected: "key=start:stop:step with step > 0 and start <= stop",
        };
        let (key, range) = text.split_once('=').ok_or_else(bad)?;
        let nums: Vec<f64> = range.split(':').map(|p| p.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
        let [start, stop, step] = nums[..] else { return Err(bad()) };
        if !(step > 0.0 && start <= stop && start.is_finite() && stop.is_finite()) {
            return Err(bad());
        }
        Ok(SweepRange { key: key.trim().to_owned(), start, stop, step })
    }

    pub fn values(&self) -> Vec<f64> {
        let slack = 1e-9 * self.step;
        (0..)
            .map(|i| self.start + f64::from(i) * self.step)
            .take_while(|&v| v <= self.stop + slack)
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub command: Command,
    pub config_path: PathBuf,
    pub output_path: PathBuf,
    pub overrides: Vec<String>,
    pub seed: u64,
    pub trials: Option<u64>,
    pub sweep: Option<SweepRange>,
    /// Absolute quadrature tolerance of the outermost integrals.
    pub tolerance: Option<f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("numeric failure: {0}")]
    Numeric(Error),
    #[error("cannot write {}: {source}", path.display())]
    Output { path: PathBuf, source: std::io::Error },
    #[error("{failed} of {checks} Monte Carlo checks disagree with the analysis")]
    Mismatch { failed: usize, checks: usize },
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter { .. } => RunError::Config(ConfigError::Scenario(e)),
            e => RunError::Numeric(e),
        }
    }
}

impl RunError {
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) => 1,
            RunError::Numeric(_) | RunError::Output { .. } => 2,
            RunError::Mismatch { .. } => 3,
        }
    }
}

struct Context {
    base: ConfigBuilder,
    scenario: ScenarioParams,
    seed: u64,
    trials: u64,
    prec: Precision,
}

impl Context {
    fn at(&self, key: &str, value: f64) -> Result<ScenarioParams, RunError> {
        let mut b = self.base.clone();
        b.set(key, &value.to_string(), None)?;
        Ok(b.build()?)
    }

    fn plan(&self, s: &ScenarioParams) -> SimulationPlan {
        SimulationPlan::new(s.clone(), self.trials, self.seed)
    }
}

/// Runs one experiment and writes its CSV. A validation mismatch still
/// writes the table before reporting the error.
pub fn run(spec: &ExperimentSpec) -> Result<Table, RunError> {
    let mut base = read_config(&spec.config_path)?;
    for o in &spec.overrides {
        base.set_pair(o)?;
    }
    let scenario = base.build()?;
    for w in warnings(&scenario) {
        log::warn!("{w}");
    }
    let trials = spec.trials.unwrap_or(spec.command.default_trials());
    if trials == 0 {
        return Err(Error::InvalidParameter { name: "trials", reason: "must be at least 1" }.into());
    }
    let prec = match spec.tolerance {
        Some(t) if t > 0.0 && t.is_finite() => Precision::with_abs(t),
        Some(_) => return Err(Error::InvalidParameter { name: "tolerance", reason: "must be positive" }.into()),
        None => Precision::default(),
    };
    let ctx = Context { base, scenario, seed: spec.seed, trials, prec };
    let sweep = spec.sweep.clone().or(spec.command.default_sweep());
    let (table, mismatch) = match spec.command {
        Command::OutageSweep => (outage_sweep(&ctx, &sweep.expect("sweep"))?, None),
        Command::RateSweep => (rate_sweep(&ctx, &sweep.expect("sweep"))?, None),
        Command::Casestudy => (casestudy(&ctx, &sweep.expect("sweep"))?, None),
        Command::Validate => {
            let (t, failed, checks) = validate(&ctx)?;
            (t, (failed > 0).then_some(RunError::Mismatch { failed, checks }))
        }
        Command::Lemmas => (lemmas(&ctx)?, None),
    };
    table.write_file(&spec.output_path).map_err(|source| RunError::Output { path: spec.output_path.clone(), source })?;
    match mismatch {
        Some(e) => Err(e),
        None => Ok(table),
    }
}

fn collect_rows(table: &mut Table, rows: Vec<Result<Vec<Cell>, RunError>>) -> Result<(), RunError> {
    for r in rows {
        table.push(r?);
    }
    Ok(())
}

fn outage_sweep(ctx: &Context, sweep: &SweepRange) -> Result<Table, RunError> {
    let mut t = Table::new(&[
        "sweep_var",
        "p_out_leader",
        "p_out_cluster",
        "p_out_lower",
        "p_out_upper",
        "p_out_mc",
        "mc_ci",
    ]);
    let rows = map_points(&sweep.values(), |&v| {
        let s = ctx.at(&sweep.key, v)?;
        let leader = outage_leader(&s, &ctx.prec)?;
        let cluster = outage_cluster(&s, &ctx.prec)?;
        let (lo, up) = outage_cluster_bounds(&s, &ctx.prec)?;
        let mc = simulate_outage(&ctx.plan(&s))?;
        Ok(vec![v.into(), leader.value.into(), cluster.value.into(), lo.value.into(), up.value.into(), mc.value.into(), mc.ci_half_width.into()])
    });
    collect_rows(&mut t, rows)?;
    Ok(t)
}

fn rate_sweep(ctx: &Context, sweep: &SweepRange) -> Result<Table, RunError> {
    let mut t = Table::new(&[
        "sweep_var",
        "rate_leader",
        "rate_cluster_lower",
        "rate_cluster_upper",
        "rate_cluster_mid",
        "rate_mc",
        "mc_ci",
    ]);
    let rows = map_points(&sweep.values(), |&v| {
        let s = ctx.at(&sweep.key, v)?;
        let leader = rate_leader(&s, &ctx.prec)?;
        let (lo, up, mid) = rate_cluster_bounds(&s, &ctx.prec)?;
        let mc = simulate_rate(&ctx.plan(&s))?;
        Ok(vec![v.into(), leader.value.into(), lo.value.into(), up.value.into(), mid.value.into(), mc.value.into(), mc.ci_half_width.into()])
    });
    collect_rows(&mut t, rows)?;
    Ok(t)
}

fn casestudy(ctx: &Context, sweep: &SweepRange) -> Result<Table, RunError> {
    let mut t = Table::new(&["sweep_var", "rate_nf", "rate_lf", "rho_lf_dbw", "rho_lf_w", "n_followers_effective"]);
    let values = sweep.values();
    let rows = match sweep.key.as_str() {
        "n_followers" => {
            let counts = values
                .iter()
                .map(|&v| ctx.at("n_followers", v).map(|s| s.cfg.n_followers))
                .collect::<Result<Vec<_>, _>>()?;
            compare_architectures(&ctx.scenario, &Sweep::FollowerCounts(counts), &ctx.prec)?
        }
        "lf_power_dbw" => compare_architectures(&ctx.scenario, &Sweep::IslPowers(values), &ctx.prec)?,
        key => {
            let per_point = map_points(&values, |&v| {
                let s = ctx.at(key, v)?;
                let mut rows = compare_architectures(&s, &Sweep::FollowerCounts(vec![s.cfg.n_followers]), &ctx.prec)?;
                let mut row = rows.pop().expect("one row per count");
                row.sweep_value = v;
                Ok::<_, RunError>((row, s.cfg.n_followers))
            });
            let mut rows = Vec::new();
            for r in per_point {
                let (row, wanted) = r?;
                log_reduction(row.sweep_value, wanted, row.split.effective_n_followers);
                rows.push(row);
            }
            rows
        }
    };
    for row in rows {
        if sweep.key == "n_followers" {
            log_reduction(row.sweep_value, row.sweep_value as u32, row.split.effective_n_followers);
        } else if sweep.key == "lf_power_dbw" {
            log_reduction(row.sweep_value, ctx.scenario.cfg.n_followers, row.split.effective_n_followers);
        }
        t.push(vec![
            row.sweep_value.into(),
            row.rate_nf.value.into(),
            row.rate_lf.value.into(),
            row.split.isl_power_per_follower_dbw.into(),
            row.split.isl_w().into(),
            row.split.effective_n_followers.into(),
        ]);
    }
    Ok(t)
}

fn log_reduction(at: f64, wanted: u32, got: u32) {
    if got < wanted {
        log::warn!("sweep point {at}: leader budget supports {got} of {wanted} followers");
    }
}

struct Check {
    name: &'static str,
    analytic: f64,
    mc: PerformanceEstimate,
    slack: f64,
}

/// Monte Carlo against every exact analytic result at the configured
/// scenario. A pair agrees when the gap is inside the 99% interval plus
/// the quadrature slack.
fn validate(ctx: &Context) -> Result<(Table, usize, usize), RunError> {
    let s = &ctx.scenario;
    let lone = s.with_followers(0);
    let p = &ctx.prec;
    let prob_slack = 10.0 * p.tol.abs;
    let rate_slack = 10.0 * p.tol.abs * s.lu.bandwidth_hz.max(s.fu.bandwidth_hz) * f64::from(1 + s.cfg.n_followers);
    let theta = leader_contact_quantile(0.5, &s.cfg);

    let jobs: Vec<u8> = (0..5).collect();
    let checks = map_points(&jobs, |&j| -> Result<Check, RunError> {
        Ok(match j {
            0 => Check {
                name: "outage_leader",
                analytic: outage_leader(s, p)?.value,
                mc: simulate_outage(&ctx.plan(&lone))?,
                slack: prob_slack,
            },
            1 => Check {
                name: "outage_cluster",
                analytic: outage_cluster(s, p)?.value,
                mc: simulate_outage(&ctx.plan(s))?,
                slack: prob_slack,
            },
            2 => Check {
                name: "outage_follower_median_leader",
                analytic: outage_follower_given_theta(theta, s, p)?,
                mc: simulate_follower_outage_given_theta(&ctx.plan(s), theta)?,
                slack: prob_slack,
            },
            3 => Check {
                name: "rate_leader",
                analytic: rate_leader(s, p)?.value,
                mc: simulate_rate(&ctx.plan(&lone))?,
                slack: rate_slack,
            },
            _ => Check {
                name: "rate_cluster",
                analytic: rate_cluster(s, p)?.value,
                mc: simulate_rate(&ctx.plan(s))?,
                slack: rate_slack,
            },
        })
    });
    let mut t = Table::new(&["quantity", "analytic", "mc", "mc_ci", "abs_diff", "agree"]);
    let mut failed = 0;
    let total = checks.len();
    for c in checks {
        let c = c?;
        let diff = (c.analytic - c.mc.value).abs();
        let ok = diff <= c.mc.ci_half_width + c.slack;
        if !ok {
            failed += 1;
            log::error!("{}: analytic {} vs Monte Carlo {} ± {}", c.name, c.analytic, c.mc.value, c.mc.ci_half_width);
        }
        t.push(vec![
            c.name.into(),
            c.analytic.into(),
            c.mc.value.into(),
            c.mc.ci_half_width.into(),
            diff.into(),
            u32::from(ok).into(),
        ]);
    }
    Ok((t, failed, total))
}

const FOLLOWER_CDF_GRID: usize = 4000;

/// Follower contact CDF tabulated over its support and interpolated
/// linearly between grid points.
fn tabulated_follower_cdf(theta_lu: f64, s: &ScenarioParams) -> Result<impl Fn(f64) -> f64, Error> {
    let tc = s.cfg.cap_half_angle_rad;
    let lo = (theta_lu - tc).max(0.0);
    let hi = theta_lu + tc;
    let h = (hi - lo) / FOLLOWER_CDF_GRID as f64;
    let grid: Vec<f64> = (0..=FOLLOWER_CDF_GRID).map(|i| lo + i as f64 * h).collect();
    let vals = map_points(&grid, |&x| follower_contact_cdf(x, theta_lu, &s.cfg)).into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(move |x: f64| {
        if x <= lo {
            return vals[0];
        }
        if x >= hi {
            return 1.0;
        }
        let u = (x - lo) / h;
        let i = (u as usize).min(FOLLOWER_CDF_GRID - 1);
        let f = u - i as f64;
        vals[i] + f * (vals[i + 1] - vals[i])
    })
}

fn lemmas(ctx: &Context) -> Result<Table, RunError> {
    let s = &ctx.scenario;
    let cfg = &s.cfg;
    let n = ctx.trials;
    let mut t = Table::new(&["law", "theta_lu", "samples", "ks_distance"]);

    let xs = angle_samples(AngleSample::NearestLeader, cfg, ctx.seed, n);
    let d = ks_distance(&xs, |x| leader_contact_cdf(x, cfg), |x| leader_contact_cdf(x, cfg))?;
    t.push(vec!["leader".into(), "".into(), n.into(), d.into()]);

    for (label, scale) in [("follower_half_cap", 0.5), ("follower_double_cap", 2.0)] {
        let theta_lu = scale * cfg.cap_half_angle_rad;
        let cdf = tabulated_follower_cdf(theta_lu, s)?;
        let xs = angle_samples(AngleSample::Follower { theta_lu }, cfg, ctx.seed, n);
        let d = ks_distance(&xs, &cdf, &cdf)?;
        t.push(vec![label.into(), theta_lu.into(), n.into(), d.into()]);
    }

    let (min_law, max_law) = extreme_contact_laws(cfg);
    for (label, kind, law) in
        [("cap_min", AngleSample::NearestCapPoint, min_law), ("cap_max", AngleSample::FarthestCapPoint, max_law)]
    {
        let xs = angle_samples(kind, cfg, ctx.seed, n);
        let d = ks_distance(&xs, |x| law.cdf(x), |x| law.cdf_left(x))?;
        t.push(vec![label.into(), "".into(), n.into(), d.into()]);
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_parsing() {
        let r = SweepRange::parse("gamma_th_db=-10:5:1").unwrap();
        assert_eq!(r.values().len(), 16);
        assert_eq!(r.values()[15], 5.0);
        assert_eq!(SweepRange::parse("altitude_km=400:1200:100").unwrap().values().len(), 9);
        assert!(SweepRange::parse("x=1:0:1").is_err());
        assert!(SweepRange::parse("x=0:1:0").is_err());
        assert!(SweepRange::parse("x=0:1").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(RunError::from(Error::InvalidParameter { name: "x", reason: "y" }).exit_code(), 1);
        assert_eq!(RunError::from(Error::NotBracketed { lo: 0.0, hi: 1.0, f_lo: 1.0, f_hi: 1.0 }).exit_code(), 2);
        assert_eq!(RunError::Mismatch { failed: 1, checks: 5 }.exit_code(), 3);
    }
}
