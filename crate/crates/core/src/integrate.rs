//! Deterministic Monte-Carlo engine.
//!
//! Every estimate is a pure function of `(seed, n_samples, substreams)`.
//! Work is split into substreams, each driven by its own ChaCha stream
//! (`seed`, stream index); substreams may run on any number of threads and
//! are reduced in index order, so results are bit-stable regardless of
//! scheduling. Volumes are normalized so that the unit ball has measure 1.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ball::KobayashiBall;
use crate::error::{ensure, Error, Result};
use crate::point::Point;

pub type StreamRng = ChaCha8Rng;

/// Non-finite samples tolerated (and dropped) before an estimate is refused.
pub const MAX_NON_FINITE_FRACTION: f64 = 1e-4;

/// Smallest sample count for which an error bar is reported.
pub const MIN_SAMPLES_FOR_ERROR: usize = 100;

/// Default number of radial shells for boundary-singular integrands.
pub const DEFAULT_SHELLS: usize = 8;

/// RNG for substream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derives an independent seed for a labelled sub-experiment.
pub fn derive_seed(seed: u64, label: u64) -> u64 {
    // splitmix64 finalizer over the pair
    let mut x = seed ^ label.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MCConfig {
    pub seed: u64,
    pub n_samples: usize,
    /// Radial shell boundaries `0 = t₀ < … < t_k = 1` for unit-ball integrals.
    #[serde(default)]
    pub strata: Option<Vec<f64>>,
    #[serde(default = "default_substreams")]
    pub substreams: usize,
}

fn default_substreams() -> usize {
    8
}

impl Default for MCConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n_samples: 10_000,
            strata: None,
            substreams: default_substreams(),
        }
    }
}

impl MCConfig {
    pub fn new(seed: u64, n_samples: usize) -> Self {
        Self {
            seed,
            n_samples,
            ..Self::default()
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    pub fn with_samples(&self, n_samples: usize) -> Self {
        Self {
            n_samples,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(self.n_samples >= 1, Parameter, "n_samples must be positive");
        ensure!(self.substreams >= 1, Parameter, "substreams must be positive");
        if let Some(strata) = &self.strata {
            validate_strata(strata)?;
        }
        Ok(())
    }
}

fn validate_strata(strata: &[f64]) -> Result<()> {
    ensure!(strata.len() >= 2, Parameter, "strata need at least two radii");
    ensure!(
        strata[0] == 0.0 && *strata.last().unwrap() == 1.0,
        Parameter,
        "strata must start at 0 and end at 1"
    );
    ensure!(
        strata.windows(2).all(|w| w[0] < w[1]),
        Parameter,
        "strata radii must be strictly increasing"
    );
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithError {
    pub value: f64,
    pub std_error: f64,
    pub n_effective: usize,
}

impl EstimateWithError {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            std_error: 0.0,
            n_effective: 0,
        }
    }

    /// `|value − target| ≤ k · std_error`, with a relative floor for exact values.
    pub fn within(&self, target: f64, k: f64) -> bool {
        let slack = k * self.std_error + 1e-12 * target.abs().max(1.0);
        (self.value - target).abs() <= slack
    }

    pub fn z_score(&self, target: f64) -> f64 {
        if self.std_error == 0.0 {
            if self.value == target {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.value - target) / self.std_error
        }
    }

    pub fn relative_error(&self) -> f64 {
        if self.value == 0.0 {
            if self.std_error == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            self.std_error / self.value.abs()
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            value: a * self.value,
            std_error: a.abs() * self.std_error,
            n_effective: self.n_effective,
        }
    }

    /// Sum of two independent estimates.
    pub fn plus(&self, other: &Self) -> Self {
        Self {
            value: self.value + other.value,
            std_error: self.std_error.hypot(other.std_error),
            n_effective: self.n_effective + other.n_effective,
        }
    }
}

/// A probability distribution on points that can be sampled from a stream.
pub trait Sampler: Sync {
    fn dim(&self) -> usize;
    fn draw(&self, rng: &mut StreamRng) -> Point;
}

/// Uniform direction on the unit sphere of complex n-space.
pub fn random_direction(n: usize, rng: &mut StreamRng) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-150 {
            return v.into_iter().map(|c| c / norm).collect();
        }
    }
}

/// Uniform sample of the radial shell `t₀ ≤ ‖z‖ < t₁` (w.r.t. volume).
#[derive(Clone, Copy, Debug)]
pub struct ShellSampler {
    pub n: usize,
    pub inner: f64,
    pub outer: f64,
}

impl ShellSampler {
    pub fn unit_ball(n: usize) -> Self {
        Self {
            n,
            inner: 0.0,
            outer: 1.0,
        }
    }

    /// Normalized volume of the shell.
    pub fn volume(&self) -> f64 {
        let e = 2 * self.n as i32;
        self.outer.powi(e) - self.inner.powi(e)
    }
}

impl Sampler for ShellSampler {
    fn dim(&self) -> usize {
        self.n
    }

    fn draw(&self, rng: &mut StreamRng) -> Point {
        let dir = random_direction(self.n, rng);
        let e = 2 * self.n as i32;
        let lo = self.inner.powi(e);
        let hi = self.outer.powi(e);
        let u: f64 = rng.random();
        // radius law t^{1/(2n)} restricted to the shell
        let t = (lo + u * (hi - lo)).powf(1.0 / e as f64);
        let t = t.min(self.outer * (1.0 - f64::EPSILON));
        Point::from_vec_unchecked(dir.into_iter().map(|c| c * t).collect())
    }
}

/// `count` uniform points of the unit ball of complex `n`-space.
pub fn sample_unit_ball(n: usize, count: usize, seed: u64) -> Result<Vec<Point>> {
    ensure!(n >= 1, Parameter, "dimension must be at least 1");
    let sampler = ShellSampler::unit_ball(n);
    let mut rng = stream_rng(seed, 0);
    Ok((0..count).map(|_| sampler.draw(&mut rng)).collect())
}

/// Uniform sample of the Euclidean ball `B(center, radius)`.
#[derive(Clone, Debug)]
pub struct EuclideanBall {
    pub center: Point,
    pub radius: f64,
}

impl Sampler for EuclideanBall {
    fn dim(&self) -> usize {
        self.center.dim()
    }

    fn draw(&self, rng: &mut StreamRng) -> Point {
        let n = self.center.dim();
        let u = ShellSampler::unit_ball(n).draw(rng);
        self.center.add(&u.scale(self.radius))
    }
}

/// Integration region with a closed-form normalized volume.
#[derive(Clone, Debug)]
pub enum Region {
    UnitBall { n: usize },
    Ellipsoid(KobayashiBall),
}

impl Region {
    pub fn volume(&self) -> f64 {
        match self {
            Region::UnitBall { .. } => 1.0,
            Region::Ellipsoid(b) => b.volume(),
        }
    }
}

/// One stratum: a sampler, the probability weight of its cell and its
/// share of the sample budget.
pub struct Stratum<'a> {
    pub weight: f64,
    pub sampler: &'a dyn Sampler,
    pub samples: usize,
}

#[derive(Clone, Copy, Debug, Default)]
struct Moments {
    count: usize,
    mean: f64,
    m2: f64,
    non_finite: usize,
}

impl Moments {
    fn push(&mut self, x: f64) {
        if !x.is_finite() {
            self.non_finite += 1;
            return;
        }
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(&self, other: &Moments) -> Moments {
        let count = self.count + other.count;
        if count == 0 {
            return Moments {
                non_finite: self.non_finite + other.non_finite,
                ..Moments::default()
            };
        }
        let delta = other.mean - self.mean;
        let (na, nb) = (self.count as f64, other.count as f64);
        let mean = if self.count == 0 {
            other.mean
        } else if other.count == 0 {
            self.mean
        } else {
            self.mean + delta * nb / count as f64
        };
        Moments {
            count,
            mean,
            m2: self.m2 + other.m2 + delta * delta * na * nb / count as f64,
            non_finite: self.non_finite + other.non_finite,
        }
    }

    fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }
}

fn share(total: usize, parts: usize, index: usize) -> usize {
    total / parts + usize::from(index < total % parts)
}

/// Stratified estimate of `Σ_i weight_i · E_i[g]`.
pub fn estimate_stratified<G>(strata: &[Stratum<'_>], g: G, cfg: &MCConfig) -> Result<EstimateWithError>
where
    G: Fn(&Point) -> f64 + Sync,
{
    cfg.validate()?;
    ensure!(!strata.is_empty(), Parameter, "no strata to integrate over");
    let substreams = cfg.substreams;
    let per_stream: Vec<Vec<Moments>> = (0..substreams)
        .into_par_iter()
        .map(|s| {
            let mut rng = stream_rng(cfg.seed, s as u64);
            strata
                .iter()
                .map(|stratum| {
                    let mut m = Moments::default();
                    for _ in 0..share(stratum.samples, substreams, s) {
                        let p = stratum.sampler.draw(&mut rng);
                        m.push(g(&p));
                    }
                    m
                })
                .collect()
        })
        .collect();

    let mut value = 0.0;
    let mut variance = 0.0;
    let mut counted = 0usize;
    let mut non_finite = 0usize;
    for (i, stratum) in strata.iter().enumerate() {
        let m = per_stream
            .iter()
            .fold(Moments::default(), |acc, stream| acc.merge(&stream[i]));
        non_finite += m.non_finite;
        counted += m.count;
        if m.count == 0 {
            if stratum.weight == 0.0 {
                continue;
            }
            return Err(Error::Integration(format!(
                "stratum {i} received no finite samples"
            )));
        }
        value += stratum.weight * m.mean;
        variance += stratum.weight * stratum.weight * m.variance() / m.count as f64;
    }

    let drawn = counted + non_finite;
    if non_finite > 0 {
        let fraction = non_finite as f64 / drawn as f64;
        if fraction < MAX_NON_FINITE_FRACTION {
            log::warn!("dropped {non_finite} non-finite samples out of {drawn}");
        } else {
            return Err(Error::Integration(format!(
                "{non_finite} of {drawn} samples were non-finite"
            )));
        }
    }
    Ok(EstimateWithError {
        value,
        std_error: variance.sqrt(),
        n_effective: counted,
    })
}

/// Plain (single stratum) estimate of `E[g]` under `sampler`.
pub fn estimate_mean<G>(sampler: &dyn Sampler, g: G, cfg: &MCConfig) -> Result<EstimateWithError>
where
    G: Fn(&Point) -> f64 + Sync,
{
    estimate_stratified(
        &[Stratum {
            weight: 1.0,
            sampler,
            samples: cfg.n_samples,
        }],
        g,
        cfg,
    )
}

/// Shell boundaries `0, 1−2⁻¹, …, 1−2^{−(k−1)}, 1`, uniform in `log d`.
pub fn boundary_shells(k: usize) -> Vec<f64> {
    let mut radii = vec![0.0];
    radii.extend((1..k).map(|i| 1.0 - 0.5_f64.powi(i as i32)));
    radii.push(1.0);
    radii
}

/// `∫_region f dν`. Unit-ball integrals honour `cfg.strata` with
/// volume-proportional allocation.
pub fn integrate_density<F>(f: F, region: &Region, cfg: &MCConfig) -> Result<EstimateWithError>
where
    F: Fn(&Point) -> f64 + Sync,
{
    integrate_inner(f, None, region, cfg)
}

/// Like [`integrate_density`] for integrands that blow up like
/// `d(z)^{−pole_order}` at the sphere: the unit ball is split into radial
/// shells (default [`DEFAULT_SHELLS`], uniform in `log d`) and samples are
/// allocated in proportion to `volume · d^{−pole_order}` of each shell.
pub fn integrate_density_with_pole<F>(
    f: F,
    pole_order: f64,
    region: &Region,
    cfg: &MCConfig,
) -> Result<EstimateWithError>
where
    F: Fn(&Point) -> f64 + Sync,
{
    ensure!(pole_order >= 0.0, Parameter, "pole order must be non-negative");
    integrate_inner(f, Some(pole_order), region, cfg)
}

fn integrate_inner<F>(
    f: F,
    pole_order: Option<f64>,
    region: &Region,
    cfg: &MCConfig,
) -> Result<EstimateWithError>
where
    F: Fn(&Point) -> f64 + Sync,
{
    cfg.validate()?;
    match region {
        Region::Ellipsoid(ball) => {
            let est = estimate_mean(ball, f, cfg)?;
            Ok(est.scaled(ball.volume()))
        }
        Region::UnitBall { n } => {
            let radii = match (&cfg.strata, pole_order) {
                (Some(r), _) => r.clone(),
                (None, Some(_)) => boundary_shells(DEFAULT_SHELLS),
                (None, None) => vec![0.0, 1.0],
            };
            let shells: Vec<ShellSampler> = radii
                .windows(2)
                .map(|w| ShellSampler {
                    n: *n,
                    inner: w[0],
                    outer: w[1],
                })
                .collect();
            let scores: Vec<f64> = shells
                .iter()
                .map(|s| {
                    let d = 1.0 - 0.5 * (s.inner + s.outer);
                    s.volume() * pole_order.map_or(1.0, |p| d.powf(-p))
                })
                .collect();
            let allocation = allocate(cfg.n_samples, &scores);
            let strata: Vec<Stratum<'_>> = shells
                .iter()
                .zip(&allocation)
                .map(|(s, &samples)| Stratum {
                    weight: s.volume(),
                    sampler: s,
                    samples,
                })
                .collect();
            estimate_stratified(&strata, f, cfg)
        }
    }
}

/// Splits `total` proportionally to `scores`, with at least two samples per cell.
fn allocate(total: usize, scores: &[f64]) -> Vec<usize> {
    let k = scores.len();
    let floor = 2usize;
    let free = total.saturating_sub(floor * k);
    let sum: f64 = scores.iter().sum();
    let mut out: Vec<usize> = scores
        .iter()
        .map(|s| floor + (free as f64 * s / sum).floor() as usize)
        .collect();
    let mut assigned: usize = out.iter().sum();
    let mut i = 0;
    while assigned < total.max(floor * k) {
        out[i % k] += 1;
        assigned += 1;
        i += 1;
    }
    out
}
