//! Parallel execution on the rayon pool. Work is split into the same
//! blocks the sequential path uses and merged in block order, so results
//! are bit-identical to it.

use leocluster_core::montecarlo::{angle_sample, AngleSample, Metric, Simulator, Tally};
use leocluster_core::{ConstellationConfig, PerformanceEstimate, Result, SimulationPlan};
use rayon::prelude::*;

pub fn run_parallel(sim: &Simulator, metric: Metric) -> Tally {
    let batches: Vec<_> = sim.plan().batches().collect();
    let parts: Vec<Vec<Tally>> = batches
        .into_par_iter()
        .map(|range| range.map(|b| sim.run_block(b, metric)).collect())
        .collect();
    let mut total = Tally::default();
    for t in parts.iter().flatten() {
        total.merge(t);
    }
    total
}

pub fn simulate_outage(plan: &SimulationPlan) -> Result<PerformanceEstimate> {
    let sim = Simulator::new(plan)?;
    let t = run_parallel(&sim, Metric::Outage);
    log_rejections(&t);
    Ok(t.proportion())
}

pub fn simulate_rate(plan: &SimulationPlan) -> Result<PerformanceEstimate> {
    let sim = Simulator::new(plan)?;
    let t = run_parallel(&sim, Metric::Rate);
    log_rejections(&t);
    Ok(t.average())
}

fn log_rejections(t: &Tally) {
    if t.rejected > 0 {
        log::debug!("{} leader draws fell outside the max contact angle and were redrawn", t.rejected);
    }
}

pub fn angle_samples(kind: AngleSample, cfg: &ConstellationConfig, seed: u64, count: u64) -> Vec<f64> {
    (0..count).into_par_iter().map(|i| angle_sample(kind, cfg, seed, i)).collect()
}

/// Evaluates `f` on every point in parallel and returns results in input order.
pub fn map_points<T, U, F>(points: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    points.par_iter().map(f).collect()
}
