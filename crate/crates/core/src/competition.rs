//! Two platforms sharing passengers and drivers.
//!
//! Riders choose the platform with the lower total cost and drivers the
//! one with the higher wage, so in any interior split both platforms show
//! the same total cost `c` and wage `w`. Given a rival's prices, the pair
//! `(c, w)` pins the rival's idle fleet, fleet and rides; the remainder of
//! aggregate demand and supply is the own platform's share. Best responses
//! are searched over `(c, w)` so these equalities hold by construction.
//!
//! Existence and uniqueness of a fixed point are not known for this game;
//! every result carries a `converged` flag and nothing else is implied.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ModelParams, Prices};
use crate::numerics::{newton2, SolverConfig};
use crate::optimizer::solve_unregulated;

/// Rides and fleet of each platform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarketSplit {
    pub lambda_a: f64,
    pub n_a: f64,
    pub lambda_b: f64,
    pub n_b: f64,
}

/// One platform's position implied by its prices at common `(c, w)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlatformShare {
    pub lambda: f64,
    pub n: f64,
    pub n_idle: f64,
}

/// Share a platform with `prices` holds when the market clears at `(c, w)`.
///
/// `None` when the cost does not exceed its fare or the wage reaches the
/// per-trip payment rate, i.e. no positive idle fleet supports the point.
pub fn platform_share(prices: &Prices, c: f64, w: f64, params: &ModelParams) -> Option<PlatformShare> {
    let wait_cost = c - params.beta * prices.p_f;
    let busy_share = w / (params.mu * prices.p_d);
    if !(wait_cost > 0.0 && busy_share < 1.0 && w > 0.0) {
        return None;
    }
    let n_idle = (params.alpha * params.m / wait_cost).powi(2);
    let n = n_idle / (1.0 - busy_share);
    Some(PlatformShare { lambda: w * n / prices.p_d, n, n_idle })
}

/// Own share and prices at `(c, w)` given the rival's prices.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Response {
    prices: Prices,
    lambda: f64,
    n: f64,
    profit: f64,
}

fn respond_at(rival: &Prices, c: f64, w: f64, params: &ModelParams) -> Option<Response> {
    let theirs = platform_share(rival, c, w, params)?;
    let lambda = params.demand_rate(c) - theirs.lambda;
    let n = params.driver_supply(w) - theirs.n;
    if !(lambda > 0.0 && n > 0.0) {
        return None;
    }
    let idle = n - lambda / params.mu;
    if !(idle > 0.0) {
        return None;
    }
    let p_f = (c - params.alpha * params.m / idle.sqrt()) / params.beta;
    if p_f < 0.0 {
        return None;
    }
    let p_d = w * n / lambda;
    Some(Response { prices: Prices::new(p_f, p_d), lambda, n, profit: lambda * p_f - w * n })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BestResponse {
    pub prices: Prices,
    pub lambda: f64,
    pub n: f64,
    /// Profit [$/min].
    pub profit: f64,
    pub c: f64,
    pub w: f64,
}

const BR_STEPS: usize = 80;
const BR_ROUNDS: usize = 9;

/// Profit-maximizing reply to `rival` by grid search over `(c, w)` with
/// repeated zoom around the incumbent.
pub fn best_response(params: &ModelParams, rival: &Prices) -> Result<BestResponse> {
    params.validate()?;
    if !(rival.p_f >= 0.0 && rival.p_d > 0.0) {
        return Err(Error::InvalidInput(format!("rival prices {rival:?} not admissible")));
    }
    let (mut c_lo, mut c_hi) = (params.beta * rival.p_f, params.choke_cost());
    let (mut w_lo, mut w_hi) = (0.0, (params.mu * rival.p_d).min(params.saturation_wage()));
    let mut best: Option<BestResponse> = None;
    for _ in 0..BR_ROUNDS {
        let dc = (c_hi - c_lo) / (BR_STEPS + 1) as f64;
        let dw = (w_hi - w_lo) / (BR_STEPS + 1) as f64;
        let found = (1..=BR_STEPS)
            .into_par_iter()
            .map(|i| {
                let c = c_lo + dc * i as f64;
                let mut row: Option<BestResponse> = None;
                for j in 1..=BR_STEPS {
                    let w = w_lo + dw * j as f64;
                    if let Some(r) = respond_at(rival, c, w, params) {
                        if row.is_none_or(|b| r.profit > b.profit) {
                            row = Some(BestResponse {
                                prices: r.prices,
                                lambda: r.lambda,
                                n: r.n,
                                profit: r.profit,
                                c,
                                w,
                            });
                        }
                    }
                }
                row
            })
            .collect::<Vec<_>>();
        for r in found.into_iter().flatten() {
            if best.is_none_or(|b| r.profit > b.profit) {
                best = Some(r);
            }
        }
        let Some(b) = best else { break };
        c_lo = (b.c - 2.0 * dc).max(params.beta * rival.p_f);
        c_hi = (b.c + 2.0 * dc).min(params.choke_cost());
        w_lo = (b.w - 2.0 * dw).max(0.0);
        w_hi = (b.w + 2.0 * dw).min((params.mu * rival.p_d).min(params.saturation_wage()));
    }
    match best {
        Some(b) if b.profit > 0.0 => Ok(b),
        _ => Err(Error::NoInteriorBestResponse),
    }
}

/// Market-clearing `(c, w)` and split for both platforms' prices.
pub fn clear_market(
    params: &ModelParams,
    a: &Prices,
    b: &Prices,
    guess: (f64, f64),
) -> Result<(f64, f64, MarketSplit)> {
    let residual = |x: [f64; 2]| {
        let (c, w) = (x[0], x[1]);
        let sa = platform_share(a, c, w, params)?;
        let sb = platform_share(b, c, w, params)?;
        Some([
            (sa.lambda + sb.lambda - params.demand_rate(c)) / params.lambda0,
            (sa.n + sb.n - params.driver_supply(w)) / params.n0,
        ])
    };
    let (x, _) = newton2(residual, [guess.0, guess.1], 1e-14, 100)?;
    let sa = platform_share(a, x[0], x[1], params).ok_or(Error::NoInteriorEquilibrium)?;
    let sb = platform_share(b, x[0], x[1], params).ok_or(Error::NoInteriorEquilibrium)?;
    Ok((x[0], x[1], MarketSplit { lambda_a: sa.lambda, n_a: sa.n, lambda_b: sb.lambda, n_b: sb.n }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DuopolyState {
    pub prices_a: Prices,
    pub prices_b: Prices,
    pub split: MarketSplit,
    pub converged: bool,
    /// Largest gap between a platform's prices and its best response.
    pub br_residual: f64,
    pub iterations: usize,
    pub profit_a: f64,
    pub profit_b: f64,
    pub notes: Vec<String>,
}

/// Per-platform total cost and wage recomputed from the split, and the
/// aggregate demand and supply residuals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DuopolyCheck {
    pub cost_a: f64,
    pub cost_b: f64,
    pub wage_a: f64,
    pub wage_b: f64,
    pub demand_residual: f64,
    pub supply_residual: f64,
}

pub fn duopoly_check(params: &ModelParams, state: &DuopolyState) -> DuopolyCheck {
    let s = &state.split;
    let cost = |pr: &Prices, lambda: f64, n: f64| {
        params.alpha * params.m / (n - lambda / params.mu).sqrt() + params.beta * pr.p_f
    };
    let cost_a = cost(&state.prices_a, s.lambda_a, s.n_a);
    let cost_b = cost(&state.prices_b, s.lambda_b, s.n_b);
    let wage_a = s.lambda_a * state.prices_a.p_d / s.n_a;
    let wage_b = s.lambda_b * state.prices_b.p_d / s.n_b;
    DuopolyCheck {
        cost_a,
        cost_b,
        wage_a,
        wage_b,
        demand_residual: s.lambda_a + s.lambda_b - params.demand_rate(0.5 * (cost_a + cost_b)),
        supply_residual: s.n_a + s.n_b - params.driver_supply(0.5 * (wage_a + wage_b)),
    }
}

fn move_towards(from: &Prices, to: &Prices, step: f64) -> Prices {
    Prices::new(from.p_f + step * (to.p_f - from.p_f), from.p_d + step * (to.p_d - from.p_d))
}

fn price_gap(a: &Prices, b: &Prices) -> f64 {
    (a.p_f - b.p_f).abs().max((a.p_d - b.p_d).abs())
}

/// Damped alternating best responses from a symmetric start in which
/// each platform serves half the monopoly rides with half its fleet.
///
/// `damping` is the weight on the new best response; it is halved each
/// time successive moves reverse direction. A nonzero `seed` perturbs the
/// start by up to 5% per price.
pub fn solve_duopoly(params: &ModelParams, damping: f64, max_iter: usize, seed: u64) -> Result<DuopolyState> {
    if !(damping > 0.0 && damping <= 1.0) {
        return Err(Error::InvalidParameter { name: "damping", value: damping });
    }
    let cfg = SolverConfig { oracle_check: false, ..SolverConfig::default() };
    let mono = solve_unregulated(params, &cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut jitter = |p: &Prices| {
        if seed == 0 {
            *p
        } else {
            Prices::new(
                p.p_f * (1.0 + 0.05 * rng.random_range(-1.0..1.0)),
                p.p_d * (1.0 + 0.05 * rng.random_range(-1.0..1.0)),
            )
        }
    };
    // each platform holds half the monopoly fleet and rides at the monopoly cost and wage
    let half_idle = 0.5 * mono.outcome.n_idle;
    let start =
        Prices::new((mono.outcome.cost - params.alpha * params.m / half_idle.sqrt()) / params.beta, mono.prices.p_d);
    if start.p_f < 0.0 {
        return Err(Error::Infeasible(format!("symmetric split needs a negative fare {}", start.p_f)));
    }
    let mut a = jitter(&start);
    let mut b = jitter(&start);
    let mut guess = (mono.outcome.cost, mono.outcome.wage_per_min);
    let mut step = damping;
    let mut last_move: Option<[f64; 4]> = None;
    let mut notes = Vec::new();
    let mut br_residual = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;

    for it in 1..=max_iter {
        iterations = it;
        let br_a = match best_response(params, &b) {
            Ok(r) => r,
            Err(e) => {
                notes.push(format!("platform a: {e}"));
                break;
            }
        };
        let new_a = move_towards(&a, &br_a.prices, step);
        let br_b = match best_response(params, &new_a) {
            Ok(r) => r,
            Err(e) => {
                notes.push(format!("platform b: {e}"));
                a = new_a;
                break;
            }
        };
        let new_b = move_towards(&b, &br_b.prices, step);
        guess = (br_b.c, br_b.w);
        let mv = [new_a.p_f - a.p_f, new_a.p_d - a.p_d, new_b.p_f - b.p_f, new_b.p_d - b.p_d];
        let moved = mv.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
        if let Some(prev) = last_move {
            let dot: f64 = prev.iter().zip(mv.iter()).map(|(x, y)| x * y).sum();
            if dot < 0.0 && step > 1e-3 {
                step *= 0.5;
            }
        }
        last_move = Some(mv);
        a = new_a;
        b = new_b;
        br_residual = price_gap(&a, &br_a.prices).max(price_gap(&b, &br_b.prices));

        if moved < 1e-6 {
            let (c, w, split) = match clear_market(params, &a, &b, guess) {
                Ok(v) => v,
                Err(e) => {
                    notes.push(format!("market clearing failed: {e}"));
                    continue;
                }
            };
            guess = (c, w);
            let profit_a = split.lambda_a * (a.p_f - a.p_d);
            let profit_b = split.lambda_b * (b.p_f - b.p_d);
            let gain_a = (best_response(params, &b).map(|r| r.profit).unwrap_or(profit_a) - profit_a) / profit_a.abs();
            let gain_b = (best_response(params, &a).map(|r| r.profit).unwrap_or(profit_b) - profit_b) / profit_b.abs();
            if gain_a < 1e-4 && gain_b < 1e-4 {
                converged = true;
                break;
            }
        }
    }
    if step < damping {
        notes.push(format!("step weight reduced to {step} after oscillation"));
    }
    if !converged {
        notes.push(format!("no fixed point after {iterations} iterations; best-response gap {br_residual:.3e}"));
    }
    let (split, profit_a, profit_b) = match clear_market(params, &a, &b, guess) {
        Ok((_, _, s)) => (s, s.lambda_a * (a.p_f - a.p_d), s.lambda_b * (b.p_f - b.p_d)),
        Err(e) => {
            notes.push(format!("final prices do not clear an interior market: {e}"));
            converged = false;
            let nan = f64::NAN;
            (MarketSplit { lambda_a: nan, n_a: nan, lambda_b: nan, n_b: nan }, nan, nan)
        }
    };
    Ok(DuopolyState { prices_a: a, prices_b: b, split, converged, br_residual, iterations, profit_a, profit_b, notes })
}

/// Outcome of running [`solve_duopoly`] from several starts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiStartReport {
    pub states: Vec<(u64, DuopolyState)>,
    /// All converged runs agree on prices to `1e-4` relative; `None` if fewer than two converged.
    pub fixed_points_agree: Option<bool>,
}

pub fn probe_multiplicity(
    params: &ModelParams,
    damping: f64,
    max_iter: usize,
    seeds: &[u64],
) -> Result<MultiStartReport> {
    let states = seeds
        .par_iter()
        .map(|&s| solve_duopoly(params, damping, max_iter, s).map(|st| (s, st)))
        .collect::<Result<Vec<_>>>()?;
    let done: Vec<&DuopolyState> = states.iter().filter(|(_, s)| s.converged).map(|(_, s)| s).collect();
    let fixed_points_agree = if done.len() < 2 {
        None
    } else {
        let close = |x: &Prices, y: &Prices| price_gap(x, y) <= 1e-4 * x.p_f.abs().max(x.p_d.abs());
        let first = done[0];
        Some(done.iter().all(|s| {
            let same = close(&s.prices_a, &first.prices_a) && close(&s.prices_b, &first.prices_b);
            let swapped = close(&s.prices_a, &first.prices_b) && close(&s.prices_b, &first.prices_a);
            same || swapped
        }))
    };
    Ok(MultiStartReport { states, fixed_points_agree })
}
