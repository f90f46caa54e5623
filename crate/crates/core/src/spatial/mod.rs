//! Monte-Carlo checks of the nearest-idle-vehicle distance law and a
//! multi-server queue simulator.

mod queue;
mod region;

pub use queue::{mgn_wait_sim, QueueConfig, QueueResult, ServiceDist};
pub use region::{Point, Region};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use region::Sampler;

pub const MIN_TRIALS: usize = 1000;
const CHUNK: usize = 4096;
const EXACT_PRODUCT_MAX: u64 = 64;

/// Where the single passenger is placed in each trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PassengerPlacement {
    /// At the region's centroid.
    Centre,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McResult {
    pub mean: f64,
    /// Sample standard deviation over √trials.
    pub stderr: f64,
    pub trials: usize,
    pub seed: u64,
}

/// Expected distance from the centre of a disk of radius `radius` to the
/// nearest of `n` uniform points, `(2ⁿ n!)²/(2n+1)! · R`.
pub fn disk_expected_min_dist_exact(n: u64, radius: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidInput("need at least one vehicle".into()));
    }
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::InvalidParameter { name: "radius", value: radius });
    }
    // the product ∏ 2i/(2i+1) is exact to a few ulps for small n
    if n <= EXACT_PRODUCT_MAX {
        let v: f64 = (1..=n).map(|i| (2 * i) as f64 / (2 * i + 1) as f64).product();
        return Ok(v * radius);
    }
    let n = n as f64;
    let ln = 2.0 * (n * std::f64::consts::LN_2 + ln_gamma(n + 1.0)) - ln_gamma(2.0 * n + 2.0);
    Ok(ln.exp() * radius)
}

#[derive(Default, Clone, Copy)]
struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }
}

fn one_trial(sampler: &Sampler, n: usize, seed: u64, trial: u64, placement: PassengerPlacement) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    let q = match placement {
        PassengerPlacement::Centre => sampler.centre(),
        PassengerPlacement::Uniform => sampler.sample(&mut rng),
    };
    let mut best = f64::INFINITY;
    for _ in 0..n {
        let p = sampler.sample(&mut rng);
        let d2 = (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2);
        if d2 < best {
            best = d2;
        }
    }
    best.sqrt()
}

/// Mean nearest-vehicle distance over `trials` independent placements of
/// `n` uniform vehicles. Trial `i` draws from stream `i` of a generator
/// keyed by `seed`, so the result does not depend on the thread count.
pub fn mc_min_dist(
    region: &Region,
    n: usize,
    trials: usize,
    seed: u64,
    placement: PassengerPlacement,
) -> Result<McResult> {
    if n == 0 {
        return Err(Error::InvalidInput("need at least one vehicle".into()));
    }
    if trials < MIN_TRIALS {
        return Err(Error::InvalidInput(format!("need at least {MIN_TRIALS} trials, got {trials}")));
    }
    let sampler = Sampler::new(region)?;
    if placement == PassengerPlacement::Centre && !sampler.contains(sampler.centre()) {
        return Err(Error::DegenerateRegion("centroid lies outside the polygon".into()));
    }
    let chunks = trials.div_ceil(CHUNK);
    let partial: Vec<(Kahan, Kahan)> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let (mut s, mut s2) = (Kahan::default(), Kahan::default());
            for t in k * CHUNK..((k + 1) * CHUNK).min(trials) {
                let d = one_trial(&sampler, n, seed, t as u64, placement);
                s.add(d);
                s2.add(d * d);
            }
            (s, s2)
        })
        .collect();
    let (mut s, mut s2) = (Kahan::default(), Kahan::default());
    for (a, b) in partial {
        s.add(a.sum);
        s2.add(b.sum);
    }
    let t = trials as f64;
    let mean = s.sum / t;
    let var = ((s2.sum - t * mean * mean) / (t - 1.0)).max(0.0);
    Ok(McResult { mean, stderr: (var / t).sqrt(), trials, seed })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SqrtLawFit {
    /// Slope of log(mean distance) against log(n).
    pub exponent: f64,
    pub intercept: f64,
    pub points: Vec<(usize, McResult)>,
}

/// Least-squares slope of log mean distance against log n.
pub fn fit_sqrt_exponent(
    region: &Region,
    n_list: &[usize],
    trials: usize,
    seed: u64,
    placement: PassengerPlacement,
) -> Result<SqrtLawFit> {
    if n_list.len() < 4 {
        return Err(Error::InvalidInput(format!("need at least 4 fleet sizes, got {}", n_list.len())));
    }
    let lo = *n_list.iter().min().unwrap();
    let hi = *n_list.iter().max().unwrap();
    if lo == 0 || (hi as f64) < 100.0 * lo as f64 {
        return Err(Error::InvalidInput(format!("fleet sizes {lo}..{hi} span less than two decades")));
    }
    let points = n_list
        .iter()
        .map(|&n| mc_min_dist(region, n, trials, seed, placement).map(|r| (n, r)))
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = points.iter().map(|(n, _)| (*n as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, r)| r.mean.ln()).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let exponent = sxy / sxx;
    Ok(SqrtLawFit { exponent, intercept: my - exponent * mx, points })
}
