use clap::ValueEnum;
use tnc_core::optimizer::solve_unregulated;
use tnc_core::spatial::{
    disk_expected_min_dist_exact, fit_sqrt_exponent, mc_min_dist, mgn_wait_sim, PassengerPlacement, QueueConfig,
    Region, ServiceDist,
};
use tnc_core::{calibrate, Observation, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Check {
    /// Monte-Carlo nearest-vehicle distance on a disk against the exact value.
    Disk,
    /// Log-log slope of nearest-vehicle distance against fleet size.
    SqrtLaw,
    /// Rider wait for a free vehicle in the calibrated market.
    Queue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Shape {
    Disk,
    Rectangle,
    #[value(name = "l_shape")]
    Lshape,
}

impl Shape {
    fn name(self) -> &'static str {
        match self {
            Shape::Disk => "disk",
            Shape::Rectangle => "2x1 rectangle",
            Shape::Lshape => "L-shape",
        }
    }

    fn region(self) -> Region {
        match self {
            Shape::Disk => Region::Disk { radius: 1.0 },
            Shape::Rectangle => Region::Rectangle { width: 2.0, height: 1.0 },
            Shape::Lshape => Region::l_shape(),
        }
    }
}

pub struct Line {
    pub label: String,
    pub measured: f64,
    pub expected: String,
    pub pass: bool,
}

impl Line {
    pub fn render(&self) -> String {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        format!("{verdict} {}: measured {:.6} expected {}", self.label, self.measured, self.expected)
    }
}

const DISK_Z: f64 = 4.0;
const SQRT_LAW_BAND: (f64, f64) = (-0.55, -0.45);
const NYC_WAIT_MAX: f64 = 0.01;
const ERLANG_Z: f64 = 4.0;

pub fn run(check: Check, trials: Option<usize>, seed: u64, shape: Option<Shape>) -> anyhow::Result<Vec<Line>> {
    match check {
        Check::Disk => {
            if shape.is_some_and(|s| s != Shape::Disk) {
                anyhow::bail!("the disk check only runs on a disk");
            }
            disk(trials.unwrap_or(200_000), seed)
        }
        Check::SqrtLaw => sqrt_law(trials.unwrap_or(2_000), seed, shape.unwrap_or(Shape::Disk)),
        Check::Queue => {
            if shape.is_some() || trials.is_some() {
                anyhow::bail!("the queue check takes only --seed");
            }
            queue(seed)
        }
    }
}

fn disk(trials: usize, seed: u64) -> anyhow::Result<Vec<Line>> {
    let mut out = Vec::new();
    for n in [1u64, 2, 5] {
        let exact = disk_expected_min_dist_exact(n, 1.0)?;
        let mc = mc_min_dist(&Region::Disk { radius: 1.0 }, n as usize, trials, seed, PassengerPlacement::Centre)?;
        let z = (mc.mean - exact) / mc.stderr;
        out.push(Line {
            label: format!("disk n={n} ({trials} trials, z={z:+.2})"),
            measured: mc.mean,
            expected: format!("{exact:.6} within {DISK_Z} standard errors"),
            pass: z.abs() < DISK_Z,
        });
    }
    Ok(out)
}

fn sqrt_law(trials: usize, seed: u64, shape: Shape) -> anyhow::Result<Vec<Line>> {
    let fit =
        fit_sqrt_exponent(&shape.region(), &[100, 300, 1000, 3000, 10000], trials, seed, PassengerPlacement::Uniform)?;
    Ok(vec![Line {
        label: format!("sqrt law on {} ({trials} trials per size)", shape.name()),
        measured: fit.exponent,
        expected: format!("exponent in [{}, {}]", SQRT_LAW_BAND.0, SQRT_LAW_BAND.1),
        pass: fit.exponent >= SQRT_LAW_BAND.0 && fit.exponent <= SQRT_LAW_BAND.1,
    }])
}

/// Mean queueing delay of M/M/N via the Erlang B recursion.
fn erlang_c_wait(lambda: f64, mean_service: f64, servers: usize) -> f64 {
    let a = lambda * mean_service;
    let mut b = 1.0;
    for k in 1..=servers {
        b = a * b / (k as f64 + a * b);
    }
    let rho = a / servers as f64;
    let c = b / (1.0 - rho + rho * b);
    c * mean_service / (servers as f64 - a)
}

fn queue(seed: u64) -> anyhow::Result<Vec<Line>> {
    let p = calibrate(&Observation::nyc())?;
    let base = solve_unregulated(&p, &SolverConfig { oracle_check: false, ..SolverConfig::default() })?;
    let nyc = mgn_wait_sim(&QueueConfig {
        lambda: base.outcome.lambda,
        mean_service_minutes: 1.0 / p.mu,
        service: ServiceDist::Exponential,
        servers: base.outcome.n.floor() as usize,
        horizon_minutes: 400.0,
        warmup_minutes: 150.0,
        seed,
    })?;
    let (lambda, mean, servers) = (2.0, 4.0, 10);
    let small = mgn_wait_sim(&QueueConfig {
        lambda,
        mean_service_minutes: mean,
        service: ServiceDist::Exponential,
        servers,
        horizon_minutes: 200_000.0,
        warmup_minutes: 2_000.0,
        seed,
    })?;
    let exact = erlang_c_wait(lambda, mean, servers);
    let z = (small.mean_wait_min - exact) / small.stderr_min;
    Ok(vec![
        Line {
            label: format!(
                "calibrated market wait ({:.0} vehicles, {:.2} rides/min)",
                base.outcome.n, base.outcome.lambda
            ),
            measured: nyc.mean_wait_min,
            expected: format!("below {NYC_WAIT_MAX} min"),
            pass: nyc.mean_wait_min < NYC_WAIT_MAX,
        },
        Line {
            label: format!("M/M/{servers} wait against Erlang C (z={z:+.2})"),
            measured: small.mean_wait_min,
            expected: format!("{exact:.6} within {ERLANG_Z} standard errors"),
            pass: z.abs() < ERLANG_Z,
        },
    ])
}
