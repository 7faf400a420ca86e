//! Seeded simulation of the full model: nearest leader, followers on the
//! cap, shadowed-Rician fading on the ground links.
//!
//! Trial `i` draws from its own ChaCha8 stream `(seed, i)`. Trials are
//! reduced in fixed blocks of [`BLOCK_TRIALS`] and the block tallies are
//! merged in block order, so an estimate depends only on the seed, the
//! scenario and the trial count.

use alloc::vec::Vec;
use core::f64::consts::LN_2;

#[allow(unused_imports)] // inherent float methods shadow it whenever std is linked
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;

use crate::analysis::{EstimateKind, PerformanceEstimate};
use crate::channel::{GammaFadingSampler, SrSampler};
use crate::geometry::{
    chord_follower_user, chord_leader_follower, chord_leader_user, follower_contact_angle,
    sample_follower_direction, sample_leader_angle_inverse, sample_nearest_leader_angle, ConstellationConfig,
    SphericalDirection,
};
use crate::{Error, Result, ScenarioParams};

/// Two-sided 99% normal quantile.
pub const CI_Z: f64 = 2.575_829_303_548_900_4;
pub const BLOCK_TRIALS: u64 = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationPlan {
    pub scenario: ScenarioParams,
    pub trials: u64,
    pub seed: u64,
    /// Trials per unit of scheduled work. Has no effect on results.
    pub batch_size: u64,
    /// Draw rate-simulation fading from the exact shadowed-Rician law
    /// instead of its Gamma approximation.
    pub exact_rate_fading: bool,
}

impl SimulationPlan {
    pub fn new(scenario: ScenarioParams, trials: u64, seed: u64) -> Self {
        SimulationPlan { scenario, trials, seed, batch_size: 16 * BLOCK_TRIALS, exact_rate_fading: false }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid("trials", "must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch_size", "must be at least 1"));
        }
        self.scenario.validate()
    }

    pub fn block_count(&self) -> u64 {
        self.trials.div_ceil(BLOCK_TRIALS)
    }

    /// Consecutive runs of blocks sized by `batch_size`.
    pub fn batches(&self) -> impl Iterator<Item = core::ops::Range<u64>> + '_ {
        let per = self.batch_size.div_ceil(BLOCK_TRIALS).max(1);
        let blocks = self.block_count();
        (0..blocks.div_ceil(per)).map(move |b| b * per..((b + 1) * per).min(blocks))
    }
}

/// Everything drawn and derived in one trial. Index 0 of the per-link
/// vectors is the leader, followed by the followers in order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrialRecord {
    pub theta_lu: f64,
    pub follower_dirs: Vec<SphericalDirection>,
    pub fading_draws: Vec<f64>,
    pub snr_values: Vec<f64>,
    pub outage_flag: bool,
    pub cluster_rate: f64,
    /// Leader draws beyond the maximum contact angle that were redrawn.
    pub rejected: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    Outage,
    Rate,
}

/// Running count, mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Tally {
    pub trials: u64,
    pub mean: f64,
    pub m2: f64,
    pub rejected: u64,
}

impl Tally {
    pub fn push(&mut self, x: f64) {
        self.trials += 1;
        let d = x - self.mean;
        self.mean += d / self.trials as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Tally) {
        if other.trials == 0 {
            return;
        }
        let n = self.trials + other.trials;
        let d = other.mean - self.mean;
        let w = other.trials as f64 / n as f64;
        self.mean += d * w;
        self.m2 += other.m2 + d * d * self.trials as f64 * w;
        self.trials = n;
        self.rejected += other.rejected;
    }

    /// Estimate of a probability. When every trial agrees the normal
    /// interval degenerates, and the exact 99% one-sided bound
    /// `1 − 0.01^{1/n}` is used instead.
    pub fn proportion(&self) -> PerformanceEstimate {
        let n = self.trials as f64;
        let p = self.mean;
        let events = (p * n).round();
        let half = if events == 0.0 || events == n {
            -(0.01f64.ln() / n).exp_m1()
        } else {
            CI_Z * (p * (1.0 - p) / n).sqrt()
        };
        PerformanceEstimate { value: p, kind: EstimateKind::MonteCarlo, ci_half_width: half, trials: self.trials }
    }

    /// Estimate of a mean with the normal 99% interval.
    pub fn average(&self) -> PerformanceEstimate {
        let n = self.trials as f64;
        let var = if self.trials > 1 { self.m2 / (n - 1.0) } else { 0.0 };
        PerformanceEstimate {
            value: self.mean,
            kind: EstimateKind::MonteCarlo,
            ci_half_width: CI_Z * (var / n).sqrt(),
            trials: self.trials,
        }
    }
}

fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, Copy)]
enum Fading {
    Exact(SrSampler),
    Gamma(GammaFadingSampler),
}

impl Fading {
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Fading::Exact(d) => d.sample(rng),
            Fading::Gamma(d) => d.sample(rng),
        }
    }
}

/// A validated plan with the link constants and samplers resolved.
#[derive(Debug, Clone)]
pub struct Simulator {
    plan: SimulationPlan,
    xi_lu: f64,
    xi_fu: f64,
    xi_lf: f64,
    gamma_th: f64,
    exact: Fading,
    approx: Fading,
}

impl Simulator {
    pub fn new(plan: &SimulationPlan) -> Result<Self> {
        plan.validate()?;
        let s = &plan.scenario;
        let exact = Fading::Exact(SrSampler::new(&s.fading)?);
        let approx = if plan.exact_rate_fading { exact } else { Fading::Gamma(GammaFadingSampler::new(&s.fading)?) };
        Ok(Simulator {
            plan: plan.clone(),
            xi_lu: s.xi_lu(),
            xi_fu: s.xi_fu(),
            xi_lf: s.xi_lf(),
            gamma_th: s.gamma_th(),
            exact,
            approx,
        })
    }

    pub fn plan(&self) -> &SimulationPlan {
        &self.plan
    }

    fn fading(&self, metric: Metric) -> &Fading {
        match metric {
            Metric::Outage => &self.exact,
            Metric::Rate => &self.approx,
        }
    }

    /// One trial. Returns the outage flag, the cluster rate and the number
    /// of rejected leader draws; fills `record` when given.
    fn trial(&self, index: u64, metric: Metric, mut record: Option<&mut TrialRecord>) -> (bool, f64, u64) {
        let s = &self.plan.scenario;
        let cfg = &s.cfg;
        let fading = self.fading(metric);
        let mut rng = stream(self.plan.seed, index);
        let mut rejected = 0u64;
        let theta = loop {
            let t = sample_leader_angle_inverse(&mut rng, cfg);
            if t <= cfg.max_contact_angle_rad {
                break t;
            }
            rejected += 1;
        };
        let r = chord_leader_user(theta, cfg) * 1e3;
        let w = fading.draw(&mut rng);
        let snr = self.xi_lu * w / (r * r);
        let mut outage = snr < self.gamma_th;
        let mut rate = s.lu.bandwidth_hz * (snr.ln_1p() / LN_2);
        if let Some(rec) = record.as_deref_mut() {
            rec.theta_lu = theta;
            rec.rejected = rejected;
            rec.follower_dirs.clear();
            rec.fading_draws.clear();
            rec.snr_values.clear();
            rec.fading_draws.push(w);
            rec.snr_values.push(snr);
        }
        for _ in 0..cfg.n_followers {
            let dir = sample_follower_direction(&mut rng, cfg);
            let w = fading.draw(&mut rng);
            let r = chord_follower_user(theta, dir.polar_rad, dir.azimuth_rad, cfg) * 1e3;
            let snr = self.xi_fu * w / (r * r);
            outage &= snr < self.gamma_th;
            let r_lf = chord_leader_follower(dir.polar_rad, cfg) * 1e3;
            let isl = if r_lf > 0.0 {
                s.lf.bandwidth_hz * ((self.xi_lf / (r_lf * r_lf)).ln_1p() / LN_2)
            } else {
                f64::INFINITY
            };
            rate += isl.min(s.fu.bandwidth_hz * (snr.ln_1p() / LN_2));
            if let Some(rec) = record.as_deref_mut() {
                rec.follower_dirs.push(dir);
                rec.fading_draws.push(w);
                rec.snr_values.push(snr);
            }
        }
        if let Some(rec) = record {
            rec.outage_flag = outage;
            rec.cluster_rate = rate;
        }
        (outage, rate, rejected)
    }

    /// The full record of trial `index`, as drawn for `metric`.
    pub fn record(&self, index: u64, metric: Metric) -> TrialRecord {
        let mut rec = TrialRecord::default();
        self.trial(index, metric, Some(&mut rec));
        rec
    }

    /// Tally of block `block` (trials `block·BLOCK_TRIALS ..`).
    pub fn run_block(&self, block: u64, metric: Metric) -> Tally {
        let start = block * BLOCK_TRIALS;
        let end = (start + BLOCK_TRIALS).min(self.plan.trials);
        let mut t = Tally::default();
        for i in start..end {
            let (outage, rate, rejected) = self.trial(i, metric, None);
            t.push(match metric {
                Metric::Outage => f64::from(u8::from(outage)),
                Metric::Rate => rate,
            });
            t.rejected += rejected;
        }
        t
    }

    /// Sequential reduction of all blocks in order.
    pub fn run(&self, metric: Metric) -> Tally {
        let mut total = Tally::default();
        for block in 0..self.plan.block_count() {
            total.merge(&self.run_block(block, metric));
        }
        total
    }
}

/// Empirical cluster outage with exact fading draws.
pub fn simulate_outage(plan: &SimulationPlan) -> Result<PerformanceEstimate> {
    Ok(Simulator::new(plan)?.run(Metric::Outage).proportion())
}

/// Empirical average cluster rate in bit/s, fading drawn from the Gamma
/// approximation unless the plan asks for exact draws.
pub fn simulate_rate(plan: &SimulationPlan) -> Result<PerformanceEstimate> {
    Ok(Simulator::new(plan)?.run(Metric::Rate).average())
}

/// Outage of one follower link with the leader held at contact angle
/// `theta`: the follower position and fading are drawn per trial.
pub fn simulate_follower_outage_given_theta(plan: &SimulationPlan, theta: f64) -> Result<PerformanceEstimate> {
    plan.validate()?;
    let s = &plan.scenario;
    let sampler = SrSampler::new(&s.fading)?;
    let (xi, g) = (s.xi_fu(), s.gamma_th());
    let mut total = Tally::default();
    for block in 0..plan.block_count() {
        let start = block * BLOCK_TRIALS;
        let mut t = Tally::default();
        for i in start..(start + BLOCK_TRIALS).min(plan.trials) {
            let mut rng = stream(plan.seed, i);
            let dir = sample_follower_direction(&mut rng, &s.cfg);
            let r = chord_follower_user(theta, dir.polar_rad, dir.azimuth_rad, &s.cfg) * 1e3;
            let snr = xi * sampler.sample(&mut rng) / (r * r);
            t.push(f64::from(u8::from(snr < g)));
        }
        total.merge(&t);
    }
    Ok(total.proportion())
}

/// Which contact-angle law a validation sample is drawn from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AngleSample {
    /// Nearest of `N_L` explicitly drawn leaders.
    NearestLeader,
    /// A uniform follower seen from a user at leader contact angle `theta_lu`.
    Follower { theta_lu: f64 },
    /// Cap point nearest the user, `max(θ_LU − θ_cap, 0)`.
    NearestCapPoint,
    /// Cap point farthest from the user, `θ_LU + θ_cap`.
    FarthestCapPoint,
}

/// Sample `index` of the given law, from stream `(seed, index)`. The
/// leader angle is always drawn from explicit leader positions so the
/// samples do not rely on the analytic contact law.
pub fn angle_sample(kind: AngleSample, cfg: &ConstellationConfig, seed: u64, index: u64) -> f64 {
    let mut rng = stream(seed, index);
    match kind {
        AngleSample::NearestLeader => sample_nearest_leader_angle(&mut rng, cfg),
        AngleSample::Follower { theta_lu } => follower_contact_angle(theta_lu, sample_follower_direction(&mut rng, cfg)),
        AngleSample::NearestCapPoint => {
            (sample_nearest_leader_angle(&mut rng, cfg) - cfg.cap_half_angle_rad).max(0.0)
        }
        AngleSample::FarthestCapPoint => sample_nearest_leader_angle(&mut rng, cfg) + cfg.cap_half_angle_rad,
    }
}

pub fn angle_samples(kind: AngleSample, cfg: &ConstellationConfig, seed: u64, count: u64) -> Vec<f64> {
    (0..count).map(|i| angle_sample(kind, cfg, seed, i)).collect()
}

/// Empirical CDF of `samples` at each grid point.
pub fn empirical_distribution(samples: &[f64], grid: &[f64]) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::invalid("samples", "must not be empty"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    Ok(grid.iter().map(|&g| sorted.partition_point(|&x| x <= g) as f64 / n).collect())
}

/// Kolmogorov–Smirnov distance between the empirical law of `samples` and a
/// law with CDF `cdf` and left limits `cdf_left`. Repeated sample values
/// are handled as one jump, so laws with atoms are compared correctly.
pub fn ks_distance<F, G>(samples: &[f64], mut cdf: F, mut cdf_left: G) -> Result<f64>
where
    F: FnMut(f64) -> f64,
    G: FnMut(f64) -> f64,
{
    if samples.is_empty() {
        return Err(Error::invalid("samples", "must not be empty"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let x = sorted[i];
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == x {
            j += 1;
        }
        let before = i as f64 / n;
        let after = j as f64 / n;
        d = d.max((after - cdf(x)).abs()).max((before - cdf_left(x)).abs());
        i = j;
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan(trials: u64) -> SimulationPlan {
        SimulationPlan::new(ScenarioParams::default(), trials, 7)
    }

    #[test]
    fn tally_merge_matches_sequential() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.1).collect();
        let mut all = Tally::default();
        xs.iter().for_each(|&x| all.push(x));
        let mut a = Tally::default();
        let mut b = Tally::default();
        xs[..313].iter().for_each(|&x| a.push(x));
        xs[313..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        assert_eq!(a.trials, all.trials);
        assert!((a.mean - all.mean).abs() < 1e-12);
        assert!((a.m2 / all.m2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_proportion_interval() {
        let mut t = Tally::default();
        (0..1000).for_each(|_| t.push(0.0));
        let e = t.proportion();
        assert_eq!(e.value, 0.0);
        assert!((e.ci_half_width - 4.595e-3).abs() < 1e-5);
    }

    #[test]
    fn batch_size_does_not_change_estimate() {
        let mut p = plan(10_000);
        let a = simulate_outage(&p).unwrap();
        p.batch_size = 1;
        let b = simulate_outage(&p).unwrap();
        assert_eq!(a, b);
        assert_eq!(p.batches().map(|r| r.end - r.start).sum::<u64>(), p.block_count());
    }

    #[test]
    fn trial_records_are_consistent() {
        let sim = Simulator::new(&plan(10)).unwrap();
        let rec = sim.record(3, Metric::Outage);
        assert_eq!(rec.follower_dirs.len(), 10);
        assert_eq!(rec.fading_draws.len(), 11);
        assert_eq!(rec.snr_values.len(), 11);
        let th = sim.gamma_th;
        assert_eq!(rec.outage_flag, rec.snr_values.iter().all(|&x| x < th));
        assert_eq!(rec, sim.record(3, Metric::Outage));
        assert!(rec.theta_lu <= ScenarioParams::default().cfg.max_contact_angle_rad);
    }

    #[test]
    fn threshold_far_below_never_fails() {
        let mut p = plan(5000);
        p.scenario.gamma_th_db = -100.0;
        let e = simulate_outage(&p).unwrap();
        assert_eq!(e.value, 0.0);
        assert!(e.ci_half_width < 5.0 / 5000.0);
    }

    #[test]
    fn rate_scales_with_bandwidth() {
        let mut p = plan(2000);
        let a = simulate_rate(&p).unwrap().value;
        for l in [&mut p.scenario.lu, &mut p.scenario.fu, &mut p.scenario.lf] {
            l.bandwidth_hz *= 2.0;
        }
        let b = simulate_rate(&p).unwrap().value;
        assert!((b / a - 2.0).abs() < 1e-12);
    }

    #[test]
    fn saturated_isl_never_binds() {
        let mut p = plan(50);
        p.scenario.lf.tx_power_dbw = 300.0;
        let sim = Simulator::new(&p).unwrap();
        for i in 0..50 {
            let rec = sim.record(i, Metric::Rate);
            let s = &p.scenario;
            let direct: f64 = s.lu.bandwidth_hz * (1.0 + rec.snr_values[0]).log2()
                + rec.snr_values[1..].iter().map(|&x| s.fu.bandwidth_hz * (1.0 + x).log2()).sum::<f64>();
            assert!((rec.cluster_rate / direct - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn empirical_cdf_steps() {
        let f = empirical_distribution(&[0.5], &[0.0, 0.49, 0.5, 1.0]).unwrap();
        assert_eq!(f, [0.0, 0.0, 1.0, 1.0]);
        assert!(empirical_distribution(&[], &[0.0]).is_err());
    }

    #[test]
    fn ks_handles_atoms() {
        // half the mass at 0, half uniform on (0, 1]
        let mut xs = alloc::vec![0.0; 500];
        xs.extend((0..500).map(|i| (i as f64 + 0.5) / 500.0));
        let cdf = |x: f64| if x < 0.0 { 0.0 } else { 0.5 + 0.5 * x.min(1.0) };
        let left = |x: f64| if x <= 0.0 { 0.0 } else { 0.5 + 0.5 * x.min(1.0) };
        let d = ks_distance(&xs, cdf, left).unwrap();
        assert!(d <= 0.5 / 500.0 + 1e-12, "{d}");
        // ignoring the atom's left limit understates nothing but must not hide a missing atom
        let d_bad = ks_distance(&xs, |x| x.clamp(0.0, 1.0), |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(d_bad >= 0.5 - 1e-12);
    }
}
