use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, LogNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const BATCHES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ServiceDist {
    Exponential,
    Deterministic,
    /// Log-normal with shape `sigma`, scaled to the configured mean.
    Lognormal {
        sigma: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueueConfig {
    /// Arrival rate [1/min].
    pub lambda: f64,
    pub mean_service_minutes: f64,
    pub service: ServiceDist,
    pub servers: usize,
    pub horizon_minutes: f64,
    /// Arrivals before this time are simulated but not recorded.
    pub warmup_minutes: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QueueResult {
    pub mean_wait_min: f64,
    pub p99_wait_min: f64,
    /// Batch-means standard error of the mean wait.
    pub stderr_min: f64,
    pub customers: usize,
}

#[derive(Clone, Copy, PartialEq)]
struct FreeAt(f64);

impl Eq for FreeAt {}

impl PartialOrd for FreeAt {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FreeAt {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

enum Sampler {
    Exp(Exp<f64>),
    Fixed(f64),
    LogNormal(LogNormal<f64>),
}

impl Sampler {
    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            Sampler::Exp(d) => d.sample(rng),
            Sampler::Fixed(x) => *x,
            Sampler::LogNormal(d) => d.sample(rng),
        }
    }
}

/// FIFO multi-server queue with Poisson arrivals. Reports time from
/// request to assignment only.
pub fn mgn_wait_sim(cfg: &QueueConfig) -> Result<QueueResult> {
    let checks = [
        ("lambda", cfg.lambda, cfg.lambda >= 0.0),
        ("mean_service_minutes", cfg.mean_service_minutes, cfg.mean_service_minutes > 0.0),
        ("horizon_minutes", cfg.horizon_minutes, cfg.horizon_minutes > 0.0),
        ("warmup_minutes", cfg.warmup_minutes, cfg.warmup_minutes >= 0.0 && cfg.warmup_minutes < cfg.horizon_minutes),
    ];
    for (name, value, ok) in checks {
        if !(ok && value.is_finite()) {
            return Err(Error::InvalidParameter { name, value });
        }
    }
    let load = cfg.lambda * cfg.mean_service_minutes;
    if cfg.lambda == 0.0 {
        return Ok(QueueResult { mean_wait_min: 0.0, p99_wait_min: 0.0, stderr_min: 0.0, customers: 0 });
    }
    if !(cfg.servers as f64 > load) {
        return Err(Error::QueueUnstable { n_idle: cfg.servers as f64 - load });
    }
    let service = match cfg.service {
        ServiceDist::Exponential => Sampler::Exp(Exp::new(1.0 / cfg.mean_service_minutes).expect("positive rate")),
        ServiceDist::Deterministic => Sampler::Fixed(cfg.mean_service_minutes),
        ServiceDist::Lognormal { sigma } => {
            if !(sigma.is_finite() && sigma > 0.0) {
                return Err(Error::InvalidParameter { name: "sigma", value: sigma });
            }
            let mu_ln = cfg.mean_service_minutes.ln() - 0.5 * sigma * sigma;
            Sampler::LogNormal(LogNormal::new(mu_ln, sigma).expect("valid log-normal"))
        }
    };
    let gaps = Exp::new(cfg.lambda).expect("positive rate");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut free: BinaryHeap<Reverse<FreeAt>> = (0..cfg.servers).map(|_| Reverse(FreeAt(0.0))).collect();
    let mut waits = Vec::new();
    let mut t = 0.0;
    loop {
        t += gaps.sample(&mut rng);
        if t > cfg.horizon_minutes {
            break;
        }
        let Reverse(FreeAt(ready)) = free.pop().expect("at least one server");
        let start = ready.max(t);
        free.push(Reverse(FreeAt(start + service.draw(&mut rng))));
        if t >= cfg.warmup_minutes {
            waits.push(start - t);
        }
    }
    let k = waits.len();
    if k == 0 {
        return Err(Error::InvalidInput("horizon too short to record any arrivals".into()));
    }
    let mean = waits.iter().sum::<f64>() / k as f64;
    let batch = k / BATCHES;
    let stderr = if batch == 0 {
        f64::NAN
    } else {
        let means: Vec<f64> =
            waits.chunks_exact(batch).take(BATCHES).map(|c| c.iter().sum::<f64>() / batch as f64).collect();
        let m = means.iter().sum::<f64>() / BATCHES as f64;
        let var = means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (BATCHES - 1) as f64;
        (var / BATCHES as f64).sqrt()
    };
    let mut sorted = waits;
    sorted.sort_by(f64::total_cmp);
    let p99 = sorted[((0.99 * k as f64).ceil() as usize).clamp(1, k) - 1];
    Ok(QueueResult { mean_wait_min: mean, p99_wait_min: p99, stderr_min: stderr, customers: k })
}
