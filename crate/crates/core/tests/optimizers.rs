use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tnc_core::optimizer::{
    brute_force, regime_boundaries, solve_amod, solve_cap, solve_congestion, solve_subsidy, solve_subsidy_budget,
    solve_unregulated, solve_wage_floor, solve_wage_floor_allow_loss, GridSpec,
};
use tnc_core::{calibrate, Error, ModelParams, Observation, Regime, Regulation, Solution, SolverConfig};

fn nyc() -> ModelParams {
    calibrate(&Observation::nyc()).unwrap()
}

fn cfg() -> SolverConfig {
    SolverConfig::default()
}

fn close(x: f64, target: f64, tol: f64) -> bool {
    ((x - target) / target).abs() < tol
}

fn perturbed(rng: &mut ChaCha8Rng) -> ModelParams {
    let b = Observation::nyc();
    loop {
        let mut j = |x: f64| x * rng.random_range(0.8..1.2);
        let obs = Observation {
            n_obs: j(b.n_obs),
            lambda_obs: j(b.lambda_obs),
            trip_minutes: j(b.trip_minutes),
            pickup_minutes: j(b.pickup_minutes),
            p_f_obs: j(b.p_f_obs),
            p_d_obs: j(b.p_d_obs),
        };
        if let Ok(p) = calibrate(&obs) {
            return p;
        }
    }
}

fn assert_converged(s: &Solution) {
    assert!(s.diagnostics.converged, "{:?}", s.diagnostics);
    assert!(s.diagnostics.max_residual < 1e-8, "{:?}", s.diagnostics);
}

#[test]
fn potential_demand_sweep_endpoints() {
    let p = nyc();
    for (l0, p_f, p_d, wage) in [(1000.0, 15.76, 9.36, 18.93), (2000.0, 17.82, 10.86, 25.13)] {
        let s = solve_unregulated(&ModelParams { lambda0: l0, ..p }, &cfg()).unwrap();
        assert_converged(&s);
        assert!(close(s.prices.p_f, p_f, 0.01), "{l0}: {:?}", s.prices);
        assert!(close(s.prices.p_d, p_d, 0.01), "{l0}: {:?}", s.prices);
        assert!(close(s.outcome.wage_per_hr, wage, 0.01), "{l0}: {}", s.outcome.wage_per_hr);
    }
}

#[test]
fn slack_floor_is_the_unregulated_optimum() {
    let p = nyc();
    let free = solve_unregulated(&p, &cfg()).unwrap();
    let s = solve_wage_floor(&p, 20.0, &cfg()).unwrap();
    assert_eq!(s.regime, Regime::FloorInactive);
    assert_eq!(s.prices, free.prices);
}

#[test]
fn high_floor_leaves_only_the_floor_binding() {
    let s = solve_wage_floor(&nyc(), 38.0, &cfg()).unwrap();
    assert_eq!(s.regime, Regime::FloorOnlyActive);
    assert!(close(s.outcome.n, 7698.0, 0.03), "{}", s.outcome.n);
    assert!(s.outcome.profit_per_hr > 0.0);
    assert!((s.outcome.wage_per_hr - 38.0).abs() < 1e-9);
}

#[test]
fn floor_beyond_zero_profit_is_reported() {
    assert!(matches!(solve_wage_floor(&nyc(), 45.0, &cfg()), Err(Error::NoPositiveProfit { .. })));
}

#[test]
fn wage_floor_sweep_has_three_monotone_regimes() {
    let p = nyc();
    let b = regime_boundaries(&p, &cfg()).unwrap();
    let sweep: Vec<(f64, Solution)> = (0..=100)
        .map(|i| 20.0 + 0.2 * i as f64)
        .filter(|&w| w < b.w_zero_profit)
        .map(|w| (w, solve_wage_floor(&p, w, &cfg()).unwrap()))
        .collect();
    for pair in sweep.windows(2) {
        let ((w0, s0), (w1, s1)) = (&pair[0], &pair[1]);
        let (dn, dl) = (s1.outcome.n - s0.outcome.n, s1.outcome.lambda - s0.outcome.lambda);
        if *w1 < b.w_tilde {
            assert!(dn.abs() < 1e-9 * s0.outcome.n && dl.abs() < 1e-9 * s0.outcome.lambda, "flat at {w0}");
        } else if *w0 > b.w_tilde && *w1 < b.w_regime3 {
            assert!(dn > 0.0 && dl > 0.0, "rising at {w0}..{w1}");
        } else if *w0 > b.w_regime3 {
            assert!(dn < 0.0 && dl < 0.0, "falling at {w0}..{w1}");
        }
    }
    let regimes: Vec<Regime> = sweep.iter().map(|(_, s)| s.regime).collect();
    assert_eq!(regimes.first(), Some(&Regime::FloorInactive));
    assert!(regimes.contains(&Regime::BothConstraintsActive));
    assert_eq!(regimes.last(), Some(&Regime::FloorOnlyActive));
}

#[test]
fn small_floor_increase_lowers_cost_and_binds_the_wage() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..25 {
        let p = perturbed(&mut rng);
        let base = solve_unregulated(&p, &cfg()).unwrap();
        let w = base.outcome.wage_per_hr * 1.01;
        let s = solve_wage_floor_allow_loss(&p, w, &cfg()).unwrap();
        assert!(s.outcome.cost < base.outcome.cost, "{p:?}");
        assert!((s.outcome.wage_per_hr - w).abs() < 1e-9 * w, "{} vs {w}", s.outcome.wage_per_hr);
    }
}

#[test]
fn cap_reference_point() {
    let s = solve_cap(&nyc(), 3000.0, &cfg()).unwrap();
    assert_eq!(s.regime, Regime::CapBinding);
    assert_converged(&s);
    assert!(close(s.prices.p_f, 15.27, 0.01), "{:?}", s.prices);
    assert!(close(s.prices.p_d, 6.51, 0.01), "{:?}", s.prices);
    assert!(close(s.outcome.t_w, 6.18, 0.01), "{}", s.outcome.t_w);
    assert!((s.outcome.n - 3000.0).abs() < 1e-9);
}

#[test]
fn slack_cap_is_the_unregulated_optimum() {
    let p = nyc();
    let s = solve_cap(&p, 6000.0, &cfg()).unwrap();
    assert_eq!(s.regime, Regime::CapInactive);
    assert_eq!(s.prices, solve_unregulated(&p, &cfg()).unwrap().prices);
}

#[test]
fn zero_surcharge_is_bit_identical_to_unregulated() {
    let p = nyc();
    assert_eq!(solve_congestion(&p, 0.0, &cfg()).unwrap(), solve_unregulated(&p, &cfg()).unwrap());
}

#[test]
fn surcharge_reference_points() {
    let p = nyc();
    let one = solve_congestion(&p, 1.0, &cfg()).unwrap();
    assert!(close(one.outcome.profit_per_hr, 65119.0, 0.02), "{}", one.outcome.profit_per_hr);
    let s = solve_congestion(&p, 2.75, &cfg()).unwrap();
    assert_converged(&s);
    assert!(close(s.prices.p_f, 14.72, 0.02), "{:?}", s.prices);
    assert!(close(s.outcome.wage_per_hr, 19.89, 0.02), "{}", s.outcome.wage_per_hr);
}

#[test]
fn surcharge_shrinks_the_market() {
    let p = nyc();
    let mut prev = solve_congestion(&p, 0.0, &cfg()).unwrap().outcome;
    for k in 1..=20 {
        let cur = solve_congestion(&p, 0.25 * k as f64, &cfg()).unwrap().outcome;
        assert!(cur.lambda < prev.lambda && cur.n < prev.n && cur.profit_per_min < prev.profit_per_min);
        prev = cur;
    }
}

#[test]
fn subsidy_budget_buys_rides() {
    let p = nyc();
    let mut prev = solve_subsidy_budget(&p, 0.0, &cfg()).unwrap();
    assert_eq!(prev.solution.regime, Regime::UnregulatedOptimum);
    for k in 1..=12 {
        let b = 100.0 * k as f64;
        let cur = solve_subsidy_budget(&p, b, &cfg()).unwrap();
        assert_converged(&cur.solution);
        assert!(cur.solution.outcome.lambda > prev.solution.outcome.lambda);
        assert!((cur.budget - b).abs() < 1e-12);
        let kept = prev_profit(&p) - b;
        assert!((cur.solution.outcome.profit_per_min - kept).abs() < 1e-8 * kept.abs().max(1.0));
        prev = cur;
    }
}

fn prev_profit(p: &ModelParams) -> f64 {
    solve_unregulated(p, &cfg()).unwrap().outcome.profit_per_min
}

#[test]
fn subsidy_above_max_profit_is_infeasible() {
    let p = nyc();
    let r = prev_profit(&p) * 1.01;
    assert!(matches!(solve_subsidy(&p, r, &cfg()), Err(Error::InfeasibleRevenue { .. })));
}

#[test]
fn subsidy_matches_constrained_grid_search() {
    let p = nyc();
    let r = prev_profit(&p) - 500.0;
    let s = solve_subsidy(&p, r, &cfg()).unwrap();
    let g = brute_force(&p, Regulation::Subsidy { reservation_revenue: r }, GridSpec::default(), &cfg()).unwrap();
    assert!(g.outcome.lambda <= s.solution.outcome.lambda * (1.0 + 1e-6));
    assert!(close(g.outcome.lambda, s.solution.outcome.lambda, 1e-3));
}

#[test]
fn fleet_at_breakeven_vehicle_cost_is_profitable() {
    let s = solve_amod(&nyc(), 55_000.0 / 2000.0, &cfg()).unwrap();
    assert_eq!(s.regime, Regime::FleetCostOptimum);
    assert!(s.outcome.profit_per_hr > 0.0);
}

#[test]
fn cheaper_vehicles_mean_larger_fleets_and_thinner_costs() {
    let p = nyc();
    let share = |c_av: f64| {
        let s = solve_amod(&p, c_av, &cfg()).unwrap();
        (s.outcome.n, s.outcome.profit_per_min / (s.outcome.lambda * s.prices.p_f))
    };
    let (n_hi, r_hi) = share(5.0);
    let (n_mid, r_mid) = share(0.5);
    let (n_lo, r_lo) = share(0.01);
    assert!(n_lo > n_mid && n_mid > n_hi);
    assert!(r_lo > r_mid && r_mid > r_hi);
    assert!(r_lo > 0.98, "{r_lo}");
}

#[test]
fn amod_matches_grid_search() {
    let p = nyc();
    let s = solve_amod(&p, 27.86, &cfg()).unwrap();
    let g = brute_force(&p, Regulation::Amod { c_av: 27.86 }, GridSpec::default(), &cfg()).unwrap();
    assert!(close(g.outcome.profit_per_min, s.outcome.profit_per_min, 1e-3));
}

#[test]
fn grid_search_respects_constraints() {
    let p = nyc();
    let wf = brute_force(&p, Regulation::WageFloor { w_floor: 30.0 }, GridSpec::default(), &cfg()).unwrap();
    assert!(wf.outcome.wage_per_hr >= 30.0 - 1e-6, "{}", wf.outcome.wage_per_hr);
    let cap = brute_force(&p, Regulation::Cap { n_cap: 4000.0 }, GridSpec::default(), &cfg()).unwrap();
    assert!(cap.outcome.n <= 4000.0);
    let free = brute_force(&p, Regulation::Unregulated, GridSpec::default(), &cfg()).unwrap();
    let foc = solve_unregulated(&p, &cfg()).unwrap();
    assert!(close(free.outcome.profit_per_min, foc.outcome.profit_per_min, 1e-3));
}

#[test]
fn grid_refinement_closes_in_on_the_optimum() {
    let p = nyc();
    let foc = solve_unregulated(&p, &cfg()).unwrap();
    let dist = |rounds: usize| {
        let g = brute_force(
            &p,
            Regulation::Unregulated,
            GridSpec { c_steps: 60, w_steps: 60, refinement_rounds: rounds },
            &cfg(),
        )
        .unwrap();
        ((g.outcome.n - foc.outcome.n) / foc.outcome.n).abs()
            + ((g.outcome.cost - foc.outcome.cost) / foc.outcome.cost).abs()
    };
    let (d1, d4) = (dist(1), dist(4));
    assert!(d4 < d1, "{d4} !< {d1}");
}

#[test]
fn grid_spec_validation() {
    let p = nyc();
    let bad = GridSpec { c_steps: 10, w_steps: 400, refinement_rounds: 3 };
    assert!(brute_force(&p, Regulation::Unregulated, bad, &cfg()).is_err());
    let none = GridSpec { refinement_rounds: 0, ..GridSpec::default() };
    assert!(brute_force(&p, Regulation::Unregulated, none, &cfg()).is_err());
}

#[test]
fn foc_solvers_never_lose_to_the_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let quick = SolverConfig { oracle_check: false, ..cfg() };
    for _ in 0..20 {
        let p = perturbed(&mut rng);
        let base = solve_unregulated(&p, &quick).unwrap();
        let cases = [
            (Regulation::Unregulated, base.clone()),
            (
                Regulation::WageFloor { w_floor: base.outcome.wage_per_hr * 1.2 },
                solve_wage_floor_allow_loss(&p, base.outcome.wage_per_hr * 1.2, &quick).unwrap(),
            ),
            (Regulation::Cap { n_cap: 0.8 * base.outcome.n }, solve_cap(&p, 0.8 * base.outcome.n, &quick).unwrap()),
            (Regulation::CongestionTax { p_c: 1.5 }, solve_congestion(&p, 1.5, &quick).unwrap()),
        ];
        for (reg, foc) in cases {
            let g = brute_force(&p, reg, GridSpec { c_steps: 200, w_steps: 200, refinement_rounds: 3 }, &quick)
                .map_err(|e| format!("{reg:?} {p:?} {e}"))
                .unwrap();
            let slack = 1e-6 * foc.outcome.profit_per_min.abs();
            assert!(
                foc.outcome.profit_per_min >= g.outcome.profit_per_min - slack,
                "{reg:?}: {} < {}",
                foc.outcome.profit_per_min,
                g.outcome.profit_per_min
            );
            assert!(foc.diagnostics.max_residual < 1e-8, "{reg:?}: {:?}", foc.diagnostics);
        }
    }
}
