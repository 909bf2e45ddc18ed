//! Finite positive measures on the unit ball and Carleson tests.
//!
//! A measure is a finite list of weighted atoms plus radial power densities
//! `c(1 − ‖ζ‖²)^s dν`. Boundedness is undecidable from finitely many
//! probes, so each test evaluates its statistic on a boundary-approach
//! schedule (`d = 2^{−k}`, radial and tangential), fits the log-log slope
//! against `d` and returns pass, fail or inconclusive.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::ball::{distance_from_parts, kobayashi_ball, KobayashiBall};
use crate::bergman::{self, density_kernel_integral, kernel_density, Polynomial};
use crate::error::{ensure, Error, Result};
use crate::integrate::{derive_seed, estimate_mean, random_direction, EstimateWithError, MCConfig, Sampler, StreamRng};
use crate::point::{neumaier, Point};
use crate::report::Verdict;

/// Slopes below this (with confidence) indicate divergence.
pub const SLOPE_THRESHOLD: f64 = -0.1;

/// Width, in standard errors, of the slope confidence interval.
pub const SLOPE_CONFIDENCE: f64 = 3.0;

/// Near-boundary maxima may exceed interior maxima by at most this factor.
pub const BOUNDED_FACTOR: f64 = 10.0;

/// Relative MC error above which a statistic is untrusted.
pub const REL_ERROR_LIMIT: f64 = 0.2;

/// Default radii for the ratio test.
pub const DEFAULT_RADII: [f64; 3] = [0.3, 0.5, 0.7];

/// Default depth of the schedule: `d = 2^{−1}, …, 2^{−12}`.
pub const DEFAULT_DEPTH: u32 = 12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub point: Point,
    pub weight: f64,
}

/// `scale · (1 − ‖ζ‖²)^s` against `ν`; finite iff `s > −1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "PowerSpec", into = "PowerSpec")]
pub struct PowerDensity {
    pub s: f64,
    pub scale: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum PowerTag {
    Power,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PowerSpec {
    #[serde(rename = "type")]
    kind: PowerTag,
    s: f64,
    #[serde(default = "one")]
    scale: f64,
}

impl From<PowerSpec> for PowerDensity {
    fn from(p: PowerSpec) -> Self {
        Self { s: p.s, scale: p.scale }
    }
}

impl From<PowerDensity> for PowerSpec {
    fn from(p: PowerDensity) -> Self {
        Self {
            kind: PowerTag::Power,
            s: p.s,
            scale: p.scale,
        }
    }
}

fn one() -> f64 {
    1.0
}

impl PowerDensity {
    pub fn eval(&self, z: &Point) -> f64 {
        self.scale * (1.0 - z.norm_sqr()).powf(self.s)
    }

    /// `scale · n! / Π_{j=1}^n (s + j)`.
    pub fn mass(&self, n: usize) -> f64 {
        self.scale * (1..=n).map(|j| j as f64 / (self.s + j as f64)).product::<f64>()
    }

    /// Sampler of the normalized density: `‖ζ‖² ~ Beta(n, s+1)`.
    pub fn sampler(&self, n: usize) -> PowerSampler {
        PowerSampler {
            n,
            beta: Beta::new(n as f64, self.s + 1.0).expect("validated exponent"),
        }
    }
}

pub struct PowerSampler {
    n: usize,
    beta: Beta<f64>,
}

impl Sampler for PowerSampler {
    fn dim(&self) -> usize {
        self.n
    }

    fn draw(&self, rng: &mut StreamRng) -> Point {
        let u: f64 = self.beta.sample(rng);
        let t = u.sqrt();
        let dir = random_direction(self.n, rng);
        Point::new(dir.into_iter().map(|c| c * t).collect()).expect("finite sample")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum DensitySpec {
    Named(String),
    One(PowerDensity),
    Many(Vec<PowerDensity>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[serde(default)]
    atoms: Vec<(Point, f64)>,
    #[serde(default = "no_density")]
    density: DensitySpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    total_mass_hint: Option<f64>,
}

fn no_density() -> DensitySpec {
    DensitySpec::Named("none".into())
}

/// JSON: `{n?, atoms: [[coords, weight], …], density: {type: "power", s} | "none" | [..]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureConfig", into = "MeasureConfig")]
pub struct Measure {
    n: usize,
    atoms: Vec<Atom>,
    densities: Vec<PowerDensity>,
    total_mass_hint: Option<f64>,
}

impl TryFrom<MeasureConfig> for Measure {
    type Error = Error;

    fn try_from(c: MeasureConfig) -> Result<Self> {
        let densities = match c.density {
            DensitySpec::Named(s) if s == "none" => Vec::new(),
            DensitySpec::Named(s) => {
                return Err(Error::Validation(format!("unknown density '{s}'")));
            }
            DensitySpec::One(d) => vec![d],
            DensitySpec::Many(v) => v,
        };
        let n = match (c.n, c.atoms.first()) {
            (Some(n), _) => n,
            (None, Some((p, _))) => p.dim(),
            (None, None) => {
                return Err(Error::Validation(
                    "measure without atoms must declare its dimension 'n'".into(),
                ))
            }
        };
        let m = Measure {
            n,
            atoms: c
                .atoms
                .into_iter()
                .map(|(point, weight)| Atom { point, weight })
                .collect(),
            densities,
            total_mass_hint: c.total_mass_hint,
        };
        m.validate()?;
        Ok(m)
    }
}

impl From<Measure> for MeasureConfig {
    fn from(m: Measure) -> Self {
        MeasureConfig {
            n: Some(m.n),
            atoms: m.atoms.into_iter().map(|a| (a.point, a.weight)).collect(),
            density: if m.densities.is_empty() {
                no_density()
            } else {
                DensitySpec::Many(m.densities)
            },
            total_mass_hint: m.total_mass_hint,
        }
    }
}

impl Measure {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            atoms: Vec::new(),
            densities: Vec::new(),
            total_mass_hint: None,
        }
    }

    /// Normalized volume `ν`.
    pub fn lebesgue(n: usize) -> Self {
        Self::power(n, 0.0).expect("s = 0 is admissible")
    }

    /// `(1 − ‖ζ‖²)^s dν`.
    pub fn power(n: usize, s: f64) -> Result<Self> {
        Self::zero(n).with_density(PowerDensity { s, scale: 1.0 })
    }

    pub fn dirac(points: Vec<Point>, weights: Vec<f64>) -> Result<Self> {
        ensure!(!points.is_empty(), Validation, "dirac measure needs at least one atom");
        ensure!(points.len() == weights.len(), Validation, "points and weights differ in length");
        let n = points[0].dim();
        let m = Self {
            n,
            atoms: points
                .into_iter()
                .zip(weights)
                .map(|(point, weight)| Atom { point, weight })
                .collect(),
            densities: Vec::new(),
            total_mass_hint: None,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn with_density(mut self, d: PowerDensity) -> Result<Self> {
        self.densities.push(d);
        self.validate()?;
        Ok(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(self.n >= 1, Validation, "dimension must be positive");
        for a in &self.atoms {
            ensure!(
                a.weight.is_finite() && a.weight > 0.0,
                Validation,
                "atom weight must be positive and finite, got {}",
                a.weight
            );
            ensure!(a.point.dim() == self.n, Validation, "atom {} has the wrong dimension", a.point);
            ensure!(a.point.norm() < 1.0, Validation, "atom {} is not interior", a.point);
        }
        for d in &self.densities {
            ensure!(
                d.s.is_finite() && d.s > -1.0,
                Validation,
                "power density needs s > −1 for finite mass, got {}",
                d.s
            );
            ensure!(
                d.scale.is_finite() && d.scale > 0.0,
                Validation,
                "density scale must be positive, got {}",
                d.scale
            );
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn densities(&self) -> &[PowerDensity] {
        &self.densities
    }

    pub fn total_mass_hint(&self) -> Option<f64> {
        self.total_mass_hint
    }

    /// Exact total mass.
    pub fn total_mass(&self) -> f64 {
        neumaier(
            self.atoms
                .iter()
                .map(|a| a.weight)
                .chain(self.densities.iter().map(|d| d.mass(self.n))),
        )
    }

    /// Density (w.r.t. `ν`) of the absolutely continuous part.
    pub fn density_at(&self, z: &Point) -> f64 {
        self.densities.iter().map(|d| d.eval(z)).sum()
    }

    pub fn plus(&self, other: &Measure) -> Result<Measure> {
        ensure!(self.n == other.n, Validation, "cannot add measures of different dimension");
        let mut out = self.clone();
        out.atoms.extend(other.atoms.iter().cloned());
        out.densities.extend(other.densities.iter().copied());
        out.total_mass_hint = None;
        Ok(out)
    }

    pub fn scaled(&self, a: f64) -> Result<Measure> {
        ensure!(a.is_finite() && a > 0.0, Validation, "scale factor must be positive");
        let mut out = self.clone();
        for atom in &mut out.atoms {
            atom.weight *= a;
        }
        for d in &mut out.densities {
            d.scale *= a;
        }
        out.total_mass_hint = self.total_mass_hint.map(|m| m * a);
        Ok(out)
    }
}

/// `μ(B)`: atoms by the metric membership test, densities by uniform
/// sampling of the ellipsoid.
pub fn measure_of_ball(mu: &Measure, ball: &KobayashiBall, cfg: &MCConfig) -> Result<EstimateWithError> {
    mu.validate()?;
    ensure!(ball.dim() == mu.dim(), Parameter, "ball and measure dimensions differ");
    let base = &ball.base;
    let cb = 1.0 - base.norm_sqr();
    let atoms = neumaier(mu.atoms.iter().filter_map(|a| {
        let rho = distance_from_parts(base, cb, &a.point, 1.0 - a.point.norm_sqr()).pseudo;
        (rho < ball.pseudo_radius).then_some(a.weight)
    }));
    if mu.densities.is_empty() {
        return Ok(EstimateWithError::exact(atoms));
    }
    let dens = estimate_mean(ball, |z| mu.density_at(z), cfg)?.scaled(ball.volume());
    Ok(EstimateWithError {
        value: atoms + dens.value,
        ..dens
    })
}

/// Centers approaching the boundary point `e₁` radially and along the
/// tangential curve `(1−d)·(cos √d e₁ + sin √d e')`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CenterSchedule {
    pub n: usize,
    pub centers: Vec<Point>,
    pub distances: Vec<f64>,
    pub families: Vec<String>,
}

impl CenterSchedule {
    pub fn boundary_approach(n: usize, depth: u32) -> Result<Self> {
        ensure!(n >= 1, Parameter, "dimension must be positive");
        ensure!((2..=40).contains(&depth), Parameter, "schedule depth must lie in 2..=40");
        let mut s = Self {
            n,
            centers: Vec::new(),
            distances: Vec::new(),
            families: Vec::new(),
        };
        for k in 1..=depth {
            let d = 0.5f64.powi(k as i32);
            let t = 1.0 - d;
            s.push("radial", Point::on_axis(n, 0, t), d);
            let angle = d.sqrt();
            let mut coords = vec![num_complex::Complex64::new(0.0, 0.0); n];
            if n == 1 {
                coords[0] = num_complex::Complex64::from_polar(t, angle);
            } else {
                coords[0] = (t * angle.cos()).into();
                coords[1] = (t * angle.sin()).into();
            }
            s.push("tangential", Point::new(coords)?, d);
        }
        Ok(s)
    }

    fn push(&mut self, family: &str, center: Point, d: f64) {
        self.centers.push(center);
        self.distances.push(d);
        self.families.push(family.to_string());
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CenterRow {
    pub family: String,
    pub center: Point,
    pub d: f64,
    pub value: f64,
    pub std_error: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub std_error: f64,
    pub points: usize,
}

/// Least-squares slope of `log value` against `log d` over positive values.
/// The error combines residual scatter with propagated MC errors.
pub fn fit_log_slope(rows: &[CenterRow]) -> Option<SlopeFit> {
    let pts: Vec<(f64, f64, f64)> = rows
        .iter()
        .filter(|r| r.value > 0.0 && r.d > 0.0)
        .map(|r| (r.d.ln(), r.value.ln(), r.std_error / r.value))
        .collect();
    let m = pts.len();
    if m < 3 {
        return None;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m as f64;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m as f64;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let residual_var = rss / (m - 2) as f64 / sxx;
    let mc_var = pts
        .iter()
        .map(|p| (p.0 - mx).powi(2) * p.2 * p.2)
        .sum::<f64>()
        / (sxx * sxx);
    Some(SlopeFit {
        slope,
        std_error: (residual_var + mc_var).sqrt(),
        points: m,
    })
}

/// Verdict from a boundary-approach series.
///
/// * fail: slope confidently below [`SLOPE_THRESHOLD`];
/// * inconclusive: untrusted MC values, or a slope below the threshold
///   without confidence, or a near-boundary spike not explained by a slope;
/// * pass: otherwise (slope ≥ threshold or undefined, and the maximum over
///   the half of the schedule nearest the boundary is at most
///   [`BOUNDED_FACTOR`] times the maximum over the inner half).
pub fn series_verdict(rows: &[CenterRow], fit: Option<&SlopeFit>, rel_limit: f64) -> Verdict {
    let untrusted = rows
        .iter()
        .any(|r| r.value > 0.0 && r.std_error > rel_limit * r.value);
    if untrusted {
        return Verdict::Inconclusive;
    }
    if let Some(f) = fit {
        if f.slope + SLOPE_CONFIDENCE * f.std_error < SLOPE_THRESHOLD {
            return Verdict::Fail;
        }
        if f.slope < SLOPE_THRESHOLD {
            return Verdict::Inconclusive;
        }
    }
    let mut ds: Vec<f64> = rows.iter().map(|r| r.d).collect();
    ds.sort_by(f64::total_cmp);
    ds.dedup();
    if ds.is_empty() {
        return Verdict::Inconclusive;
    }
    let split = ds[ds.len() / 2];
    let outer = rows
        .iter()
        .filter(|r| r.d < split)
        .map(|r| r.value)
        .fold(0.0, f64::max);
    let inner = rows
        .iter()
        .filter(|r| r.d >= split)
        .map(|r| r.value)
        .fold(0.0, f64::max);
    if outer == 0.0 || outer <= BOUNDED_FACTOR * inner {
        Verdict::Pass
    } else {
        Verdict::Inconclusive
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesTest {
    pub rows: Vec<CenterRow>,
    pub fit: Option<SlopeFit>,
    pub sup: f64,
    pub verdict: Verdict,
}

impl SeriesTest {
    fn from_rows(rows: Vec<CenterRow>, rel_limit: f64) -> Self {
        let fit = fit_log_slope(&rows);
        let verdict = series_verdict(&rows, fit.as_ref(), rel_limit);
        let sup = rows.iter().map(|r| r.value).fold(0.0, f64::max);
        Self {
            rows,
            fit,
            sup,
            verdict,
        }
    }

    pub fn slope(&self) -> Option<f64> {
        self.fit.map(|f| f.slope)
    }

    /// Row attaining the supremum.
    pub fn argmax(&self) -> Option<&CenterRow> {
        self.rows.iter().max_by(|a, b| a.value.total_cmp(&b.value))
    }
}

/// `μ(B(z₀,r)) / ν(B(z₀,r))` over the schedule.
pub fn carleson_ratio_test(
    mu: &Measure,
    r: f64,
    schedule: &CenterSchedule,
    cfg: &MCConfig,
) -> Result<SeriesTest> {
    ensure!(r > 0.0 && r < 1.0, Parameter, "radius must lie in (0,1), got {r}");
    ensure!(schedule.n == mu.dim(), Parameter, "schedule and measure dimensions differ");
    let mut rows = Vec::with_capacity(schedule.len());
    for (i, z0) in schedule.centers.iter().enumerate() {
        let ball = kobayashi_ball(z0, r)?;
        let vol = ball.volume();
        let est = measure_of_ball(mu, &ball, &cfg.with_seed(derive_seed(cfg.seed, i as u64)))?;
        rows.push(CenterRow {
            family: schedule.families[i].clone(),
            center: z0.clone(),
            d: schedule.distances[i],
            value: est.value / vol,
            std_error: est.std_error / vol,
        });
    }
    Ok(SeriesTest::from_rows(rows, REL_ERROR_LIMIT))
}

/// `Bμ` over the schedule.
pub fn carleson_berezin_test(mu: &Measure, schedule: &CenterSchedule, cfg: &MCConfig) -> Result<SeriesTest> {
    ensure!(schedule.n == mu.dim(), Parameter, "schedule and measure dimensions differ");
    let mut rows = Vec::with_capacity(schedule.len());
    for (i, z) in schedule.centers.iter().enumerate() {
        let est = bergman::berezin_transform(mu, z, &cfg.with_seed(derive_seed(cfg.seed, 1000 + i as u64)))?;
        rows.push(CenterRow {
            family: schedule.families[i].clone(),
            center: z.clone(),
            d: schedule.distances[i],
            value: est.value,
            std_error: est.std_error,
        });
    }
    Ok(SeriesTest::from_rows(rows, REL_ERROR_LIMIT))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionalTest {
    /// Normalized kernels `k_{z_j}` at the schedule centers.
    pub kernels: SeriesTest,
    /// `∫|f|² dμ / ‖f‖²` for the random polynomials.
    pub polynomials: Vec<EstimateWithError>,
    /// Maximum over the whole family.
    pub constant: EstimateWithError,
    pub verdict: Verdict,
}

/// `∫ |f|^p dμ / ‖f‖_p^p` over normalized kernels at the schedule centers and
/// `family_size` random polynomials of degree ≤ 2. Only `p = 2` is supported,
/// where every norm in the family is known in closed form.
pub fn carleson_functional_test(
    mu: &Measure,
    p: f64,
    family_size: usize,
    schedule: &CenterSchedule,
    cfg: &MCConfig,
    seed: u64,
) -> Result<FunctionalTest> {
    ensure!(p == 2.0, Parameter, "only p = 2 has closed-form test-function norms, got p = {p}");
    ensure!(schedule.n == mu.dim(), Parameter, "schedule and measure dimensions differ");
    mu.validate()?;
    let n = mu.dim();

    let mut rows = Vec::with_capacity(schedule.len());
    for (i, z) in schedule.centers.iter().enumerate() {
        // ‖k_z‖₂ = 1
        let atoms = neumaier(mu.atoms.iter().map(|a| a.weight * kernel_density(z, &a.point)));
        let dens = if mu.densities.is_empty() {
            EstimateWithError::exact(0.0)
        } else {
            density_kernel_integral(mu, z, |_| 1.0, &cfg.with_seed(derive_seed(seed, 2000 + i as u64)))?
        };
        rows.push(CenterRow {
            family: schedule.families[i].clone(),
            center: z.clone(),
            d: schedule.distances[i],
            value: atoms + dens.value,
            std_error: dens.std_error,
        });
    }
    let kernels = SeriesTest::from_rows(rows, REL_ERROR_LIMIT);

    let mut polynomials = Vec::with_capacity(family_size);
    for j in 0..family_size {
        let f = Polynomial::random(n, 2, derive_seed(seed, 3000 + j as u64));
        let norm = f.norm_sqr();
        let atoms = neumaier(mu.atoms.iter().map(|a| a.weight * f.eval(&a.point).norm_sqr()));
        let mut total = EstimateWithError::exact(atoms);
        for (t, d) in mu.densities.iter().enumerate() {
            let sampler = d.sampler(n);
            let c = cfg.with_seed(derive_seed(seed, 4000 + (j * 16 + t) as u64));
            let est = estimate_mean(&sampler, |z| f.eval(z).norm_sqr(), &c)?.scaled(d.mass(n));
            total = total.plus(&est);
        }
        polynomials.push(total.scaled(1.0 / norm));
    }

    let mut constant = EstimateWithError::exact(0.0);
    for r in &kernels.rows {
        if r.value > constant.value {
            constant = EstimateWithError {
                value: r.value,
                std_error: r.std_error,
                n_effective: cfg.n_samples,
            };
        }
    }
    for e in &polynomials {
        if e.value > constant.value {
            constant = *e;
        }
    }
    let poly_untrusted = polynomials
        .iter()
        .any(|e| e.value > 0.0 && e.std_error > REL_ERROR_LIMIT * e.value);
    let verdict = if poly_untrusted {
        Verdict::Inconclusive
    } else {
        kernels.verdict
    };
    Ok(FunctionalTest {
        kernels,
        polynomials,
        constant,
        verdict,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CarlesonConfig {
    #[serde(default = "default_radii")]
    pub radii: Vec<f64>,
    #[serde(default = "default_depth")]
    pub depth: u32,
    #[serde(default = "default_family")]
    pub family_size: usize,
    #[serde(default)]
    pub mc: MCConfig,
}

fn default_radii() -> Vec<f64> {
    DEFAULT_RADII.to_vec()
}

fn default_depth() -> u32 {
    DEFAULT_DEPTH
}

fn default_family() -> usize {
    10
}

impl Default for CarlesonConfig {
    fn default() -> Self {
        Self {
            radii: default_radii(),
            depth: default_depth(),
            family_size: default_family(),
            mc: MCConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestVerdicts {
    pub functional: Verdict,
    pub berezin: Verdict,
    pub ratio: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CarlesonVerdict {
    pub berezin_sup: EstimateWithError,
    pub berezin_slope: Option<f64>,
    /// `r → sup μ(B)/ν(B)` (keys formatted with three decimals).
    pub ratio_sup: BTreeMap<String, f64>,
    pub ratio_slope: BTreeMap<String, Option<f64>>,
    pub functional_constant: EstimateWithError,
    pub verdicts: TestVerdicts,
    pub agreement: bool,
    pub verdict: Verdict,
    #[serde(skip)]
    pub details: Option<Box<CarlesonDetails>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CarlesonDetails {
    pub ratio: Vec<(f64, SeriesTest)>,
    pub berezin: SeriesTest,
    pub functional: FunctionalTest,
}

/// Runs the functional, Berezin and ratio tests; `agreement` is false when
/// two conclusive verdicts differ, in which case the overall verdict is
/// inconclusive.
pub fn cross_check_equivalence(mu: &Measure, config: &CarlesonConfig) -> Result<CarlesonVerdict> {
    ensure!(!config.radii.is_empty(), Parameter, "need at least one radius");
    let schedule = CenterSchedule::boundary_approach(mu.dim(), config.depth)?;
    let cfg = &config.mc;

    let mut ratio = Vec::new();
    let mut ratio_verdict: Option<Verdict> = None;
    let mut ratio_split = false;
    for (i, &r) in config.radii.iter().enumerate() {
        let t = carleson_ratio_test(mu, r, &schedule, &cfg.with_seed(derive_seed(cfg.seed, 10 + i as u64)))?;
        if t.verdict.is_conclusive() {
            match ratio_verdict {
                Some(v) if v != t.verdict => ratio_split = true,
                _ => ratio_verdict = Some(t.verdict),
            }
        }
        ratio.push((r, t));
    }
    let ratio_v = if ratio_split {
        Verdict::Inconclusive
    } else {
        ratio_verdict.unwrap_or(Verdict::Inconclusive)
    };
    let berezin = carleson_berezin_test(mu, &schedule, &cfg.with_seed(derive_seed(cfg.seed, 1)))?;
    let functional = carleson_functional_test(
        mu,
        2.0,
        config.family_size,
        &schedule,
        &cfg.with_seed(derive_seed(cfg.seed, 2)),
        derive_seed(cfg.seed, 3),
    )?;

    let verdicts = TestVerdicts {
        functional: functional.verdict,
        berezin: berezin.verdict,
        ratio: ratio_v,
    };
    let conclusive: Vec<Verdict> = [verdicts.functional, verdicts.berezin, verdicts.ratio]
        .into_iter()
        .filter(|v| v.is_conclusive())
        .collect();
    let agreement = !ratio_split && conclusive.windows(2).all(|w| w[0] == w[1]);
    if !agreement {
        log::error!("Carleson tests disagree: {verdicts:?}");
    }
    let verdict = if !agreement || conclusive.is_empty() {
        Verdict::Inconclusive
    } else if conclusive.len() < 3 {
        Verdict::Inconclusive
    } else {
        conclusive[0]
    };

    let key = |r: f64| format!("{r:.3}");
    let berezin_sup = berezin
        .argmax()
        .map(|row| EstimateWithError {
            value: row.value,
            std_error: row.std_error,
            n_effective: cfg.n_samples,
        })
        .unwrap_or_else(|| EstimateWithError::exact(0.0));
    Ok(CarlesonVerdict {
        berezin_sup,
        berezin_slope: berezin.slope(),
        ratio_sup: ratio.iter().map(|(r, t)| (key(*r), t.sup)).collect(),
        ratio_slope: ratio.iter().map(|(r, t)| (key(*r), t.slope())).collect(),
        functional_constant: functional.constant,
        verdicts,
        agreement,
        verdict,
        details: Some(Box::new(CarlesonDetails {
            ratio,
            berezin,
            functional,
        })),
    })
}

/// CSV of `(family, center…, d, ratio_r…, berezin)` rows for plotting.
pub fn verdict_csv(v: &CarlesonVerdict) -> Result<String> {
    let details = v
        .details
        .as_ref()
        .ok_or_else(|| Error::Validation("verdict carries no per-center details".into()))?;
    let n = details.berezin.rows.first().map_or(0, |r| r.center.dim());
    let mut header = vec!["family".to_string()];
    for j in 1..=n {
        header.push(format!("re{j}"));
        header.push(format!("im{j}"));
    }
    header.push("d".into());
    for (r, _) in &details.ratio {
        header.push(format!("ratio_r{r}"));
    }
    header.push("berezin".into());
    header.push("berezin_err".into());
    let mut out = header.join(",");
    out.push('\n');
    for (i, row) in details.berezin.rows.iter().enumerate() {
        let mut cells = vec![row.family.clone(), row.center.to_csv_row(), format!("{}", row.d)];
        for (_, t) in &details.ratio {
            cells.push(format!("{}", t.rows[i].value));
        }
        cells.push(format!("{}", row.value));
        cells.push(format!("{}", row.std_error));
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    Ok(out)
}

/// Draws a uniformly random rotation angle; used by property tests.
pub fn random_phase(rng: &mut StreamRng) -> f64 {
    rng.random::<f64>() * std::f64::consts::TAU
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ball::ball_volume;
    use approx::assert_abs_diff_eq;

    fn fast() -> CarlesonConfig {
        CarlesonConfig {
            mc: MCConfig::new(5, 4000),
            ..CarlesonConfig::default()
        }
    }

    #[test]
    fn power_density_mass() {
        assert_abs_diff_eq!(PowerDensity { s: 0.0, scale: 1.0 }.mass(3), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(PowerDensity { s: -0.5, scale: 1.0 }.mass(1), 2.0, epsilon = 1e-15);
        // n=2, s=1: 2/(2·3)
        assert_abs_diff_eq!(PowerDensity { s: 1.0, scale: 1.0 }.mass(2), 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn power_sampler_matches_mass_weighting() {
        // E_s[‖ζ‖²] = n/(n+s+1) under the normalized density
        let d = PowerDensity { s: 0.5, scale: 1.0 };
        let est = estimate_mean(&d.sampler(2), |z| z.norm_sqr(), &MCConfig::new(3, 100_000)).unwrap();
        assert!(est.within(2.0 / 3.5, 3.0), "{est:?}");
    }

    #[test]
    fn measure_of_ball_examples() {
        let cfg = MCConfig::new(1, 20_000);
        let ball = kobayashi_ball(&Point::on_axis(2, 0, 0.6), 0.5).unwrap();
        let est = measure_of_ball(&Measure::lebesgue(2), &ball, &cfg).unwrap();
        assert!(est.within(ball_volume(&Point::on_axis(2, 0, 0.6), 0.5).unwrap(), 3.0));
        let delta = Measure::dirac(vec![Point::origin(1)], vec![1.0]).unwrap();
        let b0 = kobayashi_ball(&Point::origin(1), 0.3).unwrap();
        assert_eq!(measure_of_ball(&delta, &b0, &cfg).unwrap().value, 1.0);
        let b1 = kobayashi_ball(&Point::on_axis(1, 0, 0.6), 0.2).unwrap();
        assert_eq!(measure_of_ball(&delta, &b1, &cfg).unwrap().value, 0.0);
    }

    #[test]
    fn lebesgue_ratio_is_one() {
        let sched = CenterSchedule::boundary_approach(1, 12).unwrap();
        let t = carleson_ratio_test(&Measure::lebesgue(1), 0.5, &sched, &MCConfig::new(2, 1000)).unwrap();
        for row in &t.rows {
            assert_abs_diff_eq!(row.value, 1.0, epsilon = 1e-12);
        }
        assert_eq!(t.verdict, Verdict::Pass);
    }

    #[test]
    fn singular_density_fails_ratio_test() {
        let sched = CenterSchedule::boundary_approach(1, 12).unwrap();
        let mu = Measure::power(1, -0.5).unwrap();
        let t = carleson_ratio_test(&mu, 0.5, &sched, &MCConfig::new(2, 4000)).unwrap();
        assert_eq!(t.verdict, Verdict::Fail);
        let slope = t.slope().unwrap();
        assert!((slope + 0.5).abs() < 0.1, "{slope}");
    }

    #[test]
    fn vanishing_density_passes() {
        let sched = CenterSchedule::boundary_approach(1, 12).unwrap();
        let mu = Measure::power(1, 0.5).unwrap();
        let t = carleson_ratio_test(&mu, 0.5, &sched, &MCConfig::new(2, 4000)).unwrap();
        assert_eq!(t.verdict, Verdict::Pass);
        assert!(t.sup <= 1.0);
    }

    #[test]
    fn berezin_sup_of_dirac_at_origin() {
        let sched = CenterSchedule::boundary_approach(2, 12).unwrap();
        let mu = Measure::dirac(vec![Point::origin(2)], vec![1.0]).unwrap();
        let mut probes = sched.clone();
        probes.centers.insert(0, Point::origin(2));
        probes.distances.insert(0, 1.0);
        probes.families.insert(0, "origin".into());
        let t = carleson_berezin_test(&mu, &probes, &MCConfig::default()).unwrap();
        assert_eq!(t.sup, 1.0);
        assert_eq!(t.argmax().unwrap().center, Point::origin(2));
        assert_eq!(t.verdict, Verdict::Pass);
    }

    #[test]
    fn functional_test_closed_forms() {
        let sched = CenterSchedule::boundary_approach(1, 6).unwrap();
        let cfg = MCConfig::new(4, 20_000);
        let nu = carleson_functional_test(&Measure::lebesgue(1), 2.0, 5, &sched, &cfg, 9).unwrap();
        for e in &nu.polynomials {
            assert!(e.within(1.0, 3.0), "{e:?}");
        }
        let delta = Measure::dirac(vec![Point::origin(1)], vec![1.0]).unwrap();
        let t = carleson_functional_test(&delta, 2.0, 3, &sched, &cfg, 9).unwrap();
        for row in &t.kernels.rows {
            assert_abs_diff_eq!(row.value, (1.0 - row.center.norm_sqr()).powi(2), epsilon = 1e-14);
        }
        // the constant polynomial sees the total mass
        let constant = Polynomial::new(1, vec![(vec![0], 1.0.into())]).unwrap();
        assert_eq!(constant.norm_sqr(), 1.0);
        assert!(carleson_functional_test(&delta, 3.0, 3, &sched, &cfg, 9).is_err());
    }

    #[test]
    fn polynomial_integral_against_power_density_closed_form() {
        // ∫|z^α|²(1−|z|²)^s dν = n!·α!·Γ(s+1)/Γ(n+|α|+s+1); n=1, α=1, s=1: 1/6
        let mu = Measure::power(1, 1.0).unwrap();
        let d = mu.densities()[0];
        let est = estimate_mean(&d.sampler(1), |z| z.norm_sqr(), &MCConfig::new(8, 100_000))
            .unwrap()
            .scaled(d.mass(1));
        assert!(est.within(1.0 / 6.0, 3.0), "{est:?}");
    }

    #[test]
    fn cross_check_on_lebesgue_and_singular() {
        let v = cross_check_equivalence(&Measure::lebesgue(1), &fast()).unwrap();
        assert!(v.agreement);
        assert_eq!(v.verdict, Verdict::Pass, "{:?}", v.verdicts);
        let v = cross_check_equivalence(&Measure::power(1, -0.5).unwrap(), &fast()).unwrap();
        assert!(v.agreement, "{:?}", v.verdicts);
        assert_eq!(v.verdict, Verdict::Fail);
        let csv = verdict_csv(&v).unwrap();
        assert_eq!(csv.lines().count(), 25);
    }

    #[test]
    fn atomic_statistics_scale_exactly() {
        let pts: Vec<Point> = (1..=10).map(|m| Point::on_axis(1, 0, 1.0 - (-(m as f64)).exp())).collect();
        let w: Vec<f64> = (1..=10).map(|m| (-2.0 * m as f64).exp()).collect();
        let mu = Measure::dirac(pts, w).unwrap();
        let mu4 = mu.scaled(4.0).unwrap();
        let sched = CenterSchedule::boundary_approach(1, 12).unwrap();
        let cfg = MCConfig::default();
        let a = carleson_ratio_test(&mu, 0.5, &sched, &cfg).unwrap();
        let b = carleson_ratio_test(&mu4, 0.5, &sched, &cfg).unwrap();
        for (x, y) in a.rows.iter().zip(&b.rows) {
            assert_eq!(4.0 * x.value, y.value);
        }
        assert_eq!(a.verdict, b.verdict);
        let ba = carleson_berezin_test(&mu, &sched, &cfg).unwrap();
        let bb = carleson_berezin_test(&mu4, &sched, &cfg).unwrap();
        for (x, y) in ba.rows.iter().zip(&bb.rows) {
            assert_eq!(4.0 * x.value, y.value);
        }
    }

    #[test]
    fn measure_of_ball_is_additive() {
        let ball = kobayashi_ball(&Point::on_axis(1, 0, 0.5), 0.5).unwrap();
        let cfg = MCConfig::new(3, 20_000);
        let a = Measure::dirac(vec![Point::on_axis(1, 0, 0.5), Point::on_axis(1, 0, -0.5)], vec![1.0, 2.0]).unwrap();
        let b = Measure::power(1, 1.0).unwrap();
        let sum = measure_of_ball(&a.plus(&b).unwrap(), &ball, &cfg).unwrap();
        let pa = measure_of_ball(&a, &ball, &cfg).unwrap();
        let pb = measure_of_ball(&b, &ball, &cfg).unwrap();
        assert_eq!(pa.value, 1.0);
        assert!(sum.within(pa.value + pb.value, 3.0 * std::f64::consts::SQRT_2));
    }

    #[test]
    fn json_forms() {
        let m = Measure::from_json(r#"{"atoms": [[[0.1, 0.2], 0.5]], "density": {"type": "power", "s": -0.5}}"#)
            .unwrap();
        assert_eq!(m.dim(), 1);
        assert_eq!(m.densities()[0].s, -0.5);
        let nu = Measure::from_json(r#"{"n": 2, "density": {"type": "power", "s": 0}}"#).unwrap();
        assert_eq!(nu, Measure::lebesgue(2));
        assert!(Measure::from_json(r#"{"n": 1, "density": "none"}"#).unwrap().atoms().is_empty());
        assert!(Measure::from_json(r#"{"atoms": [[[0.1, 0.2], -1.0]]}"#).is_err());
        assert!(Measure::from_json(r#"{"n": 1, "density": {"type": "power", "s": -1.5}}"#).is_err());
        assert!(Measure::from_json(r#"{"n": 1, "extra": 1}"#).is_err());
        let back = serde_json::to_string(&m).unwrap();
        assert_eq!(Measure::from_json(&back).unwrap(), m);
    }

    #[test]
    fn slope_fit_on_exact_power_law() {
        let rows: Vec<CenterRow> = (1..=10)
            .map(|k| {
                let d = 0.5f64.powi(k);
                CenterRow {
                    family: "radial".into(),
                    center: Point::origin(1),
                    d,
                    value: 3.0 * d.powf(-0.7),
                    std_error: 0.0,
                }
            })
            .collect();
        let f = fit_log_slope(&rows).unwrap();
        assert_abs_diff_eq!(f.slope, -0.7, epsilon = 1e-12);
        assert!(f.std_error < 1e-10);
        assert_eq!(series_verdict(&rows, Some(&f), 0.2), Verdict::Fail);
    }
}
