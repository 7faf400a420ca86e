use leocluster_core::analysis::{outage_follower_given_theta, outage_leader};
use leocluster_core::channel::{gamma_approx, sr_cdf};
use leocluster_core::geometry::{
    chord_follower_user, chord_leader_follower, chord_leader_user, follower_contact_cdf, leader_contact_cdf,
    leader_contact_quantile,
};
use leocluster_core::montecarlo::{ks_distance, Metric, Simulator, Tally, BLOCK_TRIALS};
use leocluster_core::{ConstellationConfig, Precision, ScenarioParams, SimulationPlan};
use proptest::prelude::*;

fn cfg() -> ConstellationConfig {
    ScenarioParams::default().cfg
}

// follower placed explicitly in 3D with the user on the z axis
fn chord_by_vectors(theta: f64, psi: f64, phi: f64, c: &ConstellationConfig) -> f64 {
    let rs = c.shell_radius_km();
    let re = c.earth_radius_km;
    let l = [theta.sin(), 0.0, theta.cos()];
    let e1 = [-theta.cos(), 0.0, theta.sin()];
    let e2 = [0.0, 1.0, 0.0];
    let f: Vec<f64> = (0..3).map(|i| psi.cos() * l[i] + psi.sin() * (phi.cos() * e1[i] + phi.sin() * e2[i])).collect();
    let d = [rs * f[0], rs * f[1], rs * f[2] - re];
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

proptest! {
    #[test]
    fn moment_matching_identity(omega in 0.0..20.0f64, b0 in 0.001..5.0f64, m in 0.1..50.0f64) {
        let f = gamma_approx(omega, b0, m).unwrap();
        let mean = 2.0 * b0 + omega;
        prop_assert!((f.m1 * f.m2 - mean).abs() <= 1e-12 * mean);
    }

    #[test]
    fn follower_chord_matches_vectors(theta in 0.0..0.8f64, psi in 0.0..0.0175f64, phi in 0.0..std::f64::consts::TAU) {
        let c = cfg();
        let got = chord_follower_user(theta, psi, phi, &c);
        let want = chord_by_vectors(theta, psi, phi, &c);
        prop_assert!((got - want).abs() <= 1e-9 * want, "{} {}", got, want);
    }

    #[test]
    fn follower_chord_at_leader(theta in 0.0..0.8f64, phi in -10.0..10.0f64) {
        let c = cfg();
        prop_assert_eq!(chord_follower_user(theta, 0.0, phi, &c), chord_leader_user(theta, &c));
    }

    #[test]
    fn triangle_inequality(theta in 0.0..0.8f64, psi in 0.0..0.0175f64, phi in 0.0..std::f64::consts::TAU) {
        let c = cfg();
        let lu = chord_leader_user(theta, &c);
        let lf = chord_leader_follower(psi, &c);
        let fu = chord_follower_user(theta, psi, phi, &c);
        prop_assert!(fu <= lu + lf + 1e-9 && fu >= (lu - lf).abs() - 1e-9);
    }

    #[test]
    fn sr_cdf_is_a_cdf(a in 0.0..5.0f64, b in 0.0..5.0f64) {
        let p = ScenarioParams::default().fading;
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (flo, fhi) = (sr_cdf(lo, &p).unwrap(), sr_cdf(hi, &p).unwrap());
        prop_assert!((0.0..=1.0).contains(&flo) && (0.0..=1.0).contains(&fhi));
        prop_assert!(flo <= fhi + 1e-14);
    }

    #[test]
    fn leader_quantile_inverts_cdf(q in 0.001..0.999f64) {
        let c = cfg();
        let t = leader_contact_quantile(q, &c);
        prop_assert!((leader_contact_cdf(t, &c) - q).abs() < 1e-10);
    }

    #[test]
    fn follower_cdf_monotone(scale in 0.1..5.0f64, a in 0.0..1.0f64, b in 0.0..1.0f64) {
        let c = cfg();
        let tlu = scale * c.cap_half_angle_rad;
        let lo = (tlu - c.cap_half_angle_rad).max(0.0);
        let width = tlu + c.cap_half_angle_rad - lo;
        let (x, y) = (lo + a.min(b) * width, lo + a.max(b) * width);
        let (fx, fy) = (follower_contact_cdf(x, tlu, &c).unwrap(), follower_contact_cdf(y, tlu, &c).unwrap());
        prop_assert!(fx <= fy + 1e-12 && fx >= -1e-12 && fy <= 1.0 + 1e-12);
    }

    #[test]
    fn tally_merge_is_order_free(xs in prop::collection::vec(0.0..1e3f64, 2..200), cut in 0.0..1.0f64) {
        let k = ((xs.len() as f64) * cut) as usize;
        let mut all = Tally::default();
        xs.iter().for_each(|&x| all.push(x));
        let (mut a, mut b) = (Tally::default(), Tally::default());
        xs[..k].iter().for_each(|&x| a.push(x));
        xs[k..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        prop_assert_eq!(a.trials, all.trials);
        prop_assert!((a.mean - all.mean).abs() <= 1e-9 * all.mean.abs().max(1.0));
        prop_assert!((a.m2 - all.m2).abs() <= 1e-7 * all.m2.abs().max(1.0));
    }
}

// the chord-cut law carries slightly less than unit mass for a 1 degree cap
#[test]
fn follower_cdf_nearly_reaches_one() {
    let c = cfg();
    for scale in [0.5, 1.0, 2.0] {
        let tlu = scale * c.cap_half_angle_rad;
        let top = follower_contact_cdf(tlu + c.cap_half_angle_rad, tlu, &c).unwrap();
        assert!((top - 1.0).abs() < 1e-4, "{top}");
    }
}

#[test]
fn outage_grows_with_threshold() {
    let p = Precision::default();
    let mut last = 0.0;
    for db in -12..=6 {
        let s = ScenarioParams { gamma_th_db: f64::from(db), ..ScenarioParams::default() };
        let v = outage_leader(&s, &p).unwrap().value;
        assert!(v >= last, "{db} dB");
        last = v;
    }
}

#[test]
fn follower_outage_grows_with_distance() {
    let s = ScenarioParams::default();
    let p = Precision::default();
    let near = outage_follower_given_theta(0.01, &s, &p).unwrap();
    let far = outage_follower_given_theta(0.3, &s, &p).unwrap();
    assert!(near < far);
}

#[test]
fn batch_size_does_not_change_results() {
    let mut plan = SimulationPlan::new(ScenarioParams::default(), 3 * BLOCK_TRIALS + 17, 9);
    let a = Simulator::new(&plan).unwrap().run(Metric::Rate);
    plan.batch_size = 1;
    let b = Simulator::new(&plan).unwrap().run(Metric::Rate);
    plan.batch_size = 100 * BLOCK_TRIALS;
    let c = Simulator::new(&plan).unwrap().run(Metric::Rate);
    assert_eq!(a, b);
    assert_eq!(a, c);
}

#[test]
fn trial_records_are_reproducible() {
    let plan = SimulationPlan::new(ScenarioParams::default(), 10, 5);
    let sim = Simulator::new(&plan).unwrap();
    let r = sim.record(3, Metric::Outage);
    assert_eq!(r, Simulator::new(&plan).unwrap().record(3, Metric::Outage));
    assert_eq!(r.follower_dirs.len(), 10);
    assert!(r.theta_lu <= plan.scenario.cfg.max_contact_angle_rad);
}

#[test]
fn ks_of_exact_quantiles() {
    let c = cfg();
    let n = 1000;
    let xs: Vec<f64> = (0..n).map(|i| leader_contact_quantile((i as f64 + 0.5) / n as f64, &c)).collect();
    let d = ks_distance(&xs, |x| leader_contact_cdf(x, &c), |x| leader_contact_cdf(x, &c)).unwrap();
    assert!((d - 0.5 / n as f64).abs() < 1e-9, "{d}");
}
