use std::f64::consts::PI;

use covariant_bohm::covariance::{compare_frames, convergence_study, log_log_slope};
use covariant_bohm::integrator::{
    eigenvalue_weight, first_shared_record, integrate, integrate_ensemble, sample_hyperplane, Scheme, Termination,
    Weighting,
};
use covariant_bohm::minkowski::{rapidity_from_velocity, Rapidity};
use covariant_bohm::wavefield::{boosted, ground_excited_pair, ConfigPoint, EntangledPair, Particle};
use proptest::prelude::*;

fn model() -> EntangledPair {
    ground_excited_pair(PI, 1.0).unwrap()
}

fn interior() -> impl Strategy<Value = f64> {
    0.3..PI - 0.3
}

fn start() -> impl Strategy<Value = ConfigPoint> {
    (interior(), -1.5..1.5f64, interior(), -1.5..1.5f64).prop_map(|(a, s, b, t)| ConfigPoint::new(a, s, b, t))
}

fn boost_velocity() -> impl Strategy<Value = f64> {
    -0.6..0.6f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn discrete_steps_are_exactly_covariant(q0 in start(), v in boost_velocity(), euler in any::<bool>()) {
        let m = model();
        let scheme = if euler { Scheme::Euler } else { Scheme::Midpoint };
        let alpha = rapidity_from_velocity(v).unwrap();
        let cmp = compare_frames(&m, &q0, alpha, 0.01, 200, scheme).unwrap();
        prop_assert!(cmp.is_consistent());
        if cmp.rest.termination == Termination::Completed {
            prop_assert!(cmp.max_deviation <= 1e-11, "{}", cmp.max_deviation);
            prop_assert!(cmp.velocity_addition_error() <= 1e-11);
        }
    }

    #[test]
    fn boosts_compose(q0 in start(), a in boost_velocity(), b in boost_velocity()) {
        let (a, b) = (rapidity_from_velocity(a).unwrap(), rapidity_from_velocity(b).unwrap());
        let twice = boosted(boosted(model(), a), b);
        let once = boosted(model(), a + b);
        let x = integrate(&twice, &q0.boosted(a).boosted(b), 0.01, 150, Scheme::Midpoint).unwrap();
        let y = integrate(&once, &q0.boosted(a + b), 0.01, 150, Scheme::Midpoint).unwrap();
        prop_assert_eq!(x.records.len(), y.records.len());
        for (r, s) in x.records.iter().zip(&y.records) {
            prop_assert!(r.q.max_abs_diff(&s.q) <= 1e-10);
        }
    }

    #[test]
    fn exchanged_start_gives_swapped_trajectory(a in interior(), b in interior(), s in -1.0..1.0f64) {
        let m = model();
        let q0 = ConfigPoint::new(a, s, b, 0.0);
        let x = integrate(&m, &q0, 0.01, 200, Scheme::Midpoint).unwrap();
        let y = integrate(&m, &q0.exchanged(), 0.01, 200, Scheme::Midpoint).unwrap();
        prop_assert_eq!(x.records.len(), y.records.len());
        for (r, t) in x.records.iter().zip(&y.records) {
            prop_assert!(r.q.max_abs_diff(&t.q.exchanged()) <= 1e-13);
            prop_assert!((r.v1 - t.v2).abs() <= 1e-13);
        }
    }

    #[test]
    fn equal_times_persist(a in interior(), b in interior(), t in -2.0..2.0f64) {
        let traj = integrate(&model(), &ConfigPoint::new(a, t, b, t), 0.01, 300, Scheme::Midpoint).unwrap();
        for r in &traj.records {
            prop_assert!((r.q.t1 - r.q.t2).abs() < 1e-10);
        }
    }

    #[test]
    fn proper_time_is_exact(q0 in start(), eps in 0.002..0.05f64, euler in any::<bool>()) {
        let scheme = if euler { Scheme::Euler } else { Scheme::Midpoint };
        let traj = integrate(&model(), &q0, eps, 100, scheme).unwrap();
        prop_assert!(traj.proper_time_violation() <= 1e-10);
    }
}

#[test]
fn schemes_converge_to_each_other() {
    let m = model();
    let q0 = ConfigPoint::new(1.0, 1.0, 2.0, 0.0);
    let epsilons = [0.02, 0.01, 0.005, 0.0025];
    let gaps: Vec<f64> = epsilons
        .iter()
        .map(|&eps| {
            let n = (2.0 / eps) as usize;
            let e = integrate(&m, &q0, eps, n, Scheme::Euler).unwrap();
            let mid = integrate(&m, &q0, eps, n, Scheme::Midpoint).unwrap();
            e.last().q.max_abs_diff(&mid.last().q)
        })
        .collect();
    let order = log_log_slope(&epsilons, &gaps);
    assert!(order >= 1.0 - 0.05, "order {order}, gaps {gaps:?}");
    assert!(gaps.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn stationary_start_has_no_fitted_order() {
    let report = convergence_study(
        &model(),
        &ConfigPoint::new(1.0, 0.0, 2.0, 0.0),
        rapidity_from_velocity(0.3).unwrap(),
        &[0.02, 0.01, 0.005],
        2.0,
        Scheme::Euler,
    )
    .unwrap();
    assert_eq!(report.fitted_order, None);
    assert!(report.deviations.iter().all(|d| *d < 1e-12));
}

#[test]
fn rest_frame_and_boosted_frame_agree_for_fig1() {
    let cmp = compare_frames(
        &model(),
        &ConfigPoint::new(1.0, 0.0, 2.0, 0.0),
        rapidity_from_velocity(0.3).unwrap(),
        0.01,
        200,
        Scheme::Euler,
    )
    .unwrap();
    assert!(cmp.max_deviation < 1e-9);
    // Both particles rest in the wells' frame, so they move at −0.3 in the boosted one.
    for r in &cmp.moved.records {
        assert!((r.v1 + 0.3).abs() < 1e-12 && (r.v2 + 0.3).abs() < 1e-12);
    }
}

#[test]
fn identity_boost_is_bitwise() {
    let cmp = compare_frames(&model(), &ConfigPoint::new(0.7, 0.4, 2.1, -0.3), Rapidity::ZERO, 0.01, 300, Scheme::Midpoint)
        .unwrap();
    assert_eq!(cmp.max_deviation, 0.0);
    assert_eq!(cmp.rest.records, cmp.moved.records);
}

#[test]
fn ensemble_members_never_share_a_record() {
    let m = model();
    for weighting in [Weighting::Uniform, Weighting::Eigenvalue] {
        let starts = sample_hyperplane(&m, PI, 100, weighting, 31).unwrap();
        let members: Vec<_> = integrate_ensemble(&m, &starts, 0.01, 100, Scheme::Midpoint)
            .into_iter()
            .filter_map(Result::ok)
            .collect();
        assert!(members.len() >= 90);
        assert_eq!(first_shared_record(&members), None);
    }
    // Staggered starts move, so the check is not only comparing static points.
    let starts: Vec<ConfigPoint> = (0..30).map(|k| ConfigPoint::new(0.5 + 0.07 * k as f64, 1.0, 2.0, 0.0)).collect();
    let members: Vec<_> = integrate_ensemble(&m, &starts, 0.01, 200, Scheme::Midpoint)
        .into_iter()
        .map(Result::unwrap)
        .collect();
    assert_eq!(first_shared_record(&members), None);
}

/// Midpoint-rule integral of `λ₁ λ₂` over `z1 ∈ [lo, hi]`, `z2 ∈ (0, L)`.
fn weight_mass(m: &EntangledPair, lo: f64, hi: f64) -> f64 {
    let (n1, n2) = (200, 600);
    let (h1, h2) = ((hi - lo) / n1 as f64, PI / n2 as f64);
    let mut total = 0.0;
    for a in 0..n1 {
        for b in 0..n2 {
            let q = ConfigPoint::new(lo + (a as f64 + 0.5) * h1, 0.0, (b as f64 + 0.5) * h2, 0.0);
            total += eigenvalue_weight(m, &q);
        }
    }
    total * h1 * h2
}

#[test]
fn eigenvalue_sampler_matches_quadrature() {
    let m = model();
    let (bin_a, bin_b) = ((0.5, 1.0), (1.5, 2.0));
    let expected = weight_mass(&m, bin_a.0, bin_a.1) / weight_mass(&m, bin_b.0, bin_b.1);
    let points = sample_hyperplane(&m, PI, 100_000, Weighting::Eigenvalue, 77).unwrap();
    let count = |(lo, hi): (f64, f64)| points.iter().filter(|q| q.z1 >= lo && q.z1 < hi).count() as f64;
    let observed = count(bin_a) / count(bin_b);
    assert!(
        (observed / expected - 1.0).abs() < 0.10,
        "observed {observed}, quadrature {expected}"
    );
    // The marginals of both particles agree.
    let by_particle = |p: Particle| points.iter().filter(|q| q.event(p).z < PI / 2.0).count() as f64;
    assert!((by_particle(Particle::First) / by_particle(Particle::Second) - 1.0).abs() < 0.03);
}
