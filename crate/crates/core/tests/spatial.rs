use tnc_core::spatial::{
    disk_expected_min_dist_exact, fit_sqrt_exponent, mc_min_dist, mgn_wait_sim, PassengerPlacement, QueueConfig,
    Region, ServiceDist,
};
use tnc_core::Error;

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

#[test]
fn exact_formula_approaches_its_asymptote() {
    let n = 10_000u64;
    let v = disk_expected_min_dist_exact(n, 1.0).unwrap();
    let asym = std::f64::consts::PI.sqrt() / (2.0 * (n as f64).sqrt());
    assert!((v / asym - 1.0).abs() < 1e-4, "{v} vs {asym}");
    assert!(matches!(disk_expected_min_dist_exact(0, 1.0), Err(Error::InvalidInput(_))));
}

/// The two-vehicle value from its order-statistic density, integrated by
/// the midpoint rule.
#[test]
fn two_vehicle_value_by_direct_integration() {
    let k = 200_000;
    let h = 1.0 / k as f64;
    let integral: f64 = (0..k)
        .map(|i| {
            let r = (i as f64 + 0.5) * h;
            2.0 * (1.0 - r * r) * 2.0 * r * r * h
        })
        .sum();
    assert!((integral - disk_expected_min_dist_exact(2, 1.0).unwrap()).abs() < 1e-9);
}

#[test]
fn exact_formula_scales_with_radius() {
    for n in [1, 7, 300] {
        let a = disk_expected_min_dist_exact(n, 2.5).unwrap();
        let b = disk_expected_min_dist_exact(n, 1.0).unwrap();
        assert!((a / b - 2.5).abs() < 1e-14);
    }
}

#[test]
fn unit_square_matches_poisson_intensity_estimate() {
    let r = mc_min_dist(&Region::Rectangle { width: 1.0, height: 1.0 }, 100, 50_000, 4, PassengerPlacement::Uniform)
        .unwrap();
    // boundary effects only lengthen the distance
    let bulk = 0.5 / 100f64.sqrt();
    assert!(r.mean > bulk && r.mean < 1.05 * bulk, "{r:?}");
}

#[test]
fn uniform_passenger_is_farther_than_central_one() {
    let d = Region::Disk { radius: 1.0 };
    let c = mc_min_dist(&d, 20, 20_000, 8, PassengerPlacement::Centre).unwrap();
    let u = mc_min_dist(&d, 20, 20_000, 8, PassengerPlacement::Uniform).unwrap();
    assert!(u.mean > c.mean + 3.0 * (u.stderr + c.stderr));
}

#[test]
fn same_seed_is_bit_identical_and_thread_count_free() {
    let region = Region::l_shape();
    let one = in_pool(1, || mc_min_dist(&region, 50, 10_000, 99, PassengerPlacement::Uniform).unwrap());
    let four = in_pool(4, || mc_min_dist(&region, 50, 10_000, 99, PassengerPlacement::Uniform).unwrap());
    let again = mc_min_dist(&region, 50, 10_000, 99, PassengerPlacement::Uniform).unwrap();
    assert_eq!(one, four);
    assert_eq!(one, again);
    let other = mc_min_dist(&region, 50, 10_000, 100, PassengerPlacement::Uniform).unwrap();
    assert_ne!(one.mean, other.mean);
}

#[test]
fn stderr_is_sample_deviation_over_root_trials() {
    let r = mc_min_dist(&Region::Disk { radius: 1.0 }, 1, 40_000, 3, PassengerPlacement::Centre).unwrap();
    // one vehicle: distance has density 2r on [0,1], variance 1/2 − 4/9
    let sd = (0.5f64 - 4.0 / 9.0).sqrt();
    assert!((r.stderr * (40_000f64).sqrt() / sd - 1.0).abs() < 0.02);
}

#[test]
fn degenerate_regions_are_rejected() {
    let flat = Region::Polygon { vertices: vec![[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]] };
    assert!(matches!(mc_min_dist(&flat, 5, 1000, 1, PassengerPlacement::Uniform), Err(Error::DegenerateRegion(_))));
    let clockwise = Region::Polygon { vertices: vec![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]] };
    assert!(mc_min_dist(&clockwise, 5, 1000, 1, PassengerPlacement::Uniform).is_err());
    // centroid of a thin C shape lies in the gap
    let c_shape = Region::Polygon {
        vertices: vec![[0.0, 0.0], [3.0, 0.0], [3.0, 0.2], [0.2, 0.2], [0.2, 2.8], [3.0, 2.8], [3.0, 3.0], [0.0, 3.0]],
    };
    assert!(mc_min_dist(&c_shape, 5, 1000, 1, PassengerPlacement::Centre).is_err());
    assert!(mc_min_dist(&c_shape, 5, 1000, 1, PassengerPlacement::Uniform).is_ok());
}

#[test]
fn sqrt_law_holds_on_a_concave_polygon_with_central_passenger() {
    let fit =
        fit_sqrt_exponent(&Region::l_shape(), &[100, 300, 1000, 3000, 10000], 2000, 5, PassengerPlacement::Centre)
            .unwrap();
    assert!((fit.exponent + 0.5).abs() < 0.05, "{}", fit.exponent);
    assert_eq!(fit.points.len(), 5);
}

fn queue(lambda: f64, servers: usize, service: ServiceDist) -> QueueConfig {
    QueueConfig {
        lambda,
        mean_service_minutes: 1.0,
        service,
        servers,
        horizon_minutes: 20_000.0,
        warmup_minutes: 1_000.0,
        seed: 17,
    }
}

#[test]
fn near_critical_load_is_reported_not_rejected() {
    let r = mgn_wait_sim(&queue(10.0, 11, ServiceDist::Exponential)).unwrap();
    let relaxed = mgn_wait_sim(&queue(10.0, 20, ServiceDist::Exponential)).unwrap();
    assert!(r.mean_wait_min > 100.0 * relaxed.mean_wait_min.max(1e-6));
    assert!(r.p99_wait_min > r.mean_wait_min);
}

#[test]
fn service_variability_lengthens_waits() {
    let det = mgn_wait_sim(&queue(8.0, 10, ServiceDist::Deterministic)).unwrap();
    let exp = mgn_wait_sim(&queue(8.0, 10, ServiceDist::Exponential)).unwrap();
    let logn = mgn_wait_sim(&queue(8.0, 10, ServiceDist::Lognormal { sigma: 1.5 })).unwrap();
    assert!(det.mean_wait_min < exp.mean_wait_min);
    assert!(exp.mean_wait_min < logn.mean_wait_min);
}

#[test]
fn queue_input_validation() {
    assert!(matches!(mgn_wait_sim(&queue(10.0, 10, ServiceDist::Exponential)), Err(Error::QueueUnstable { .. })));
    assert!(mgn_wait_sim(&queue(1.0, 3, ServiceDist::Lognormal { sigma: 0.0 })).is_err());
    let bad = QueueConfig { warmup_minutes: 30_000.0, ..queue(1.0, 3, ServiceDist::Exponential) };
    assert!(mgn_wait_sim(&bad).is_err());
}
