//! Bounded convex domains given by defining functions `D = {ψ > 0}`.
//!
//! Built-ins: the unit ball, axis-aligned ellipsoids and a ball with a
//! smooth Gaussian dent. Outside the ball the Kobayashi distance is only
//! delivered as bounds: a circumscribed ball from below, inscribed balls (or
//! a chain of them) from above.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ball::{self, kobayashi_ball};
use crate::error::{ensure, Error, Result};
use crate::integrate::{stream_rng, EuclideanBall, Sampler};
use crate::point::Point;
use crate::report::CheckReport;

/// Default step of the inscribed-ball chain, as a fraction of the local
/// boundary distance.
pub const CHAIN_STEP_FRACTION: f64 = 0.1;

/// Chains longer than this give up and report an infinite upper bound.
pub const CHAIN_MAX_STEPS: usize = 100_000;

/// JSON form of a domain: `{"type": "ball" | "ellipsoid" | "perturbed_ball", ...}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainConfig {
    Ball {
        n: usize,
    },
    /// `1 − Σ x_k²/a_k² > 0`. `axes` has `n` entries (one per complex
    /// coordinate) or `2n` (one per real coordinate).
    Ellipsoid {
        n: usize,
        axes: Vec<f64>,
    },
    /// `1 − ‖z‖² − ε·exp(−‖z−c‖²/w²) > 0`.
    PerturbedBall {
        n: usize,
        epsilon: f64,
        center: Point,
        width: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DomainConfig", into = "DomainConfig")]
pub struct Domain {
    config: DomainConfig,
    n: usize,
    /// Semi-axes per real coordinate (ellipsoids only).
    real_axes: Vec<f64>,
    bounding_radius: f64,
    inner_radius: f64,
    /// Radius of a ball about the origin contained in `D`.
    core_radius: f64,
}

impl TryFrom<DomainConfig> for Domain {
    type Error = Error;

    fn try_from(config: DomainConfig) -> Result<Self> {
        Domain::new(config)
    }
}

impl From<Domain> for DomainConfig {
    fn from(d: Domain) -> Self {
        d.config
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceBounds {
    pub lower: f64,
    pub upper: f64,
    /// Set when no inscribed ball or chain certified a finite upper bound.
    pub upper_infinite: bool,
}

impl DistanceBounds {
    pub fn gap(&self) -> f64 {
        self.upper - self.lower
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryEstimate {
    pub c0: f64,
    #[serde(rename = "C0")]
    pub big_c0: f64,
    /// `(d, lower + ½ log d, upper + ½ log d)` per probe.
    pub per_probe: Vec<(f64, f64, f64)>,
}

impl Domain {
    pub fn new(config: DomainConfig) -> Result<Self> {
        let (n, real_axes, bounding_radius, inner_radius, core_radius) = match &config {
            DomainConfig::Ball { n } => {
                ensure!(*n >= 1, Parameter, "dimension must be at least 1");
                (*n, Vec::new(), 1.0, 1.0, 1.0)
            }
            DomainConfig::Ellipsoid { n, axes } => {
                ensure!(*n >= 1, Parameter, "dimension must be at least 1");
                let real: Vec<f64> = if axes.len() == 2 * n {
                    axes.clone()
                } else if axes.len() == *n {
                    axes.iter().flat_map(|&a| [a, a]).collect()
                } else {
                    return Err(Error::Parameter(format!(
                        "ellipsoid in dimension {n} needs {n} or {} semi-axes, got {}",
                        2 * n,
                        axes.len()
                    )));
                };
                ensure!(
                    real.iter().all(|a| a.is_finite() && *a > 0.0),
                    Parameter,
                    "semi-axes must be positive and finite"
                );
                let amin = real.iter().copied().fold(f64::INFINITY, f64::min);
                let amax = real.iter().copied().fold(0.0, f64::max);
                // smallest principal radius of curvature
                (*n, real, amax, amin * amin / amax, amin)
            }
            DomainConfig::PerturbedBall {
                n,
                epsilon,
                center,
                width,
            } => {
                ensure!(*n >= 1, Parameter, "dimension must be at least 1");
                ensure!(center.dim() == *n, Parameter, "bump center has the wrong dimension");
                ensure!(*width > 0.0, Parameter, "bump width must be positive");
                ensure!(
                    *epsilon >= 0.0 && *epsilon < 1.0 && *epsilon < 0.5 * width * width,
                    Parameter,
                    "perturbation must satisfy 0 ≤ ε < min(1, w²/2), got ε = {epsilon}, w = {width}"
                );
                // |∇ψ| ≥ 2√(1−ε) − ε√(2/e)/w on ∂D and −Hess ψ ≤ (2 + 2ε/w²)
                let grad_min = 2.0 * (1.0 - epsilon).sqrt()
                    - epsilon * (2.0 / std::f64::consts::E).sqrt() / width;
                ensure!(
                    grad_min > 0.0,
                    Parameter,
                    "perturbation too strong: gradient may vanish on the boundary"
                );
                let inner = grad_min / (2.0 + 2.0 * epsilon / (width * width));
                (*n, Vec::new(), 1.0, inner, (1.0 - epsilon).sqrt())
            }
        };
        Ok(Self {
            config,
            n,
            real_axes,
            bounding_radius,
            inner_radius,
            core_radius,
        })
    }

    pub fn ball(n: usize) -> Self {
        Self::new(DomainConfig::Ball { n }).expect("valid dimension")
    }

    pub fn ellipsoid(n: usize, axes: Vec<f64>) -> Result<Self> {
        Self::new(DomainConfig::Ellipsoid { n, axes })
    }

    pub fn perturbed_ball(n: usize, epsilon: f64, center: Point, width: f64) -> Result<Self> {
        Self::new(DomainConfig::PerturbedBall {
            n,
            epsilon,
            center,
            width,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn config(&self) -> &DomainConfig {
        &self.config
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn is_ball(&self) -> bool {
        matches!(self.config, DomainConfig::Ball { .. })
    }

    /// Radius of a ball about the origin known to contain `D`.
    pub fn bounding_radius(&self) -> f64 {
        self.bounding_radius
    }

    /// Radius `δ` such that the ball of radius `δ` internally tangent at
    /// any boundary point lies in `D`.
    pub fn inner_radius(&self) -> f64 {
        self.inner_radius
    }

    fn check_dim(&self, z: &Point) -> Result<()> {
        ensure!(
            z.dim() == self.n,
            Parameter,
            "point of dimension {} in a domain of dimension {}",
            z.dim(),
            self.n
        );
        Ok(())
    }

    /// The defining function.
    pub fn psi(&self, z: &Point) -> f64 {
        psi_real(self, &z.to_reals())
    }

    pub fn contains(&self, z: &Point) -> bool {
        z.dim() == self.n && self.psi(z) > 0.0
    }

    /// Real gradient of `ψ` (ordered re₁, im₁, …).
    pub fn gradient(&self, z: &Point) -> Vec<f64> {
        grad_real(self, &z.to_reals())
    }

    fn require_interior(&self, z: &Point) -> Result<()> {
        self.check_dim(z)?;
        ensure!(self.contains(z), Domain, "{z} is not an interior point (ψ = {})", self.psi(z));
        Ok(())
    }

    /// Euclidean distance to the boundary together with a nearest boundary point.
    pub fn nearest_boundary(&self, z: &Point) -> Result<(f64, Vec<f64>)> {
        self.require_interior(z)?;
        let x = z.to_reals();
        match &self.config {
            DomainConfig::Ball { .. } => {
                let norm = z.norm();
                let foot = if norm > 0.0 {
                    x.iter().map(|v| v / norm).collect()
                } else {
                    unit_axis(x.len(), 0)
                };
                Ok((1.0 - norm, foot))
            }
            DomainConfig::Ellipsoid { .. } => Ok(ellipsoid_nearest(&self.real_axes, &x)),
            DomainConfig::PerturbedBall { .. } => self.perturbed_nearest(&x),
        }
    }

    fn perturbed_nearest(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let m = x.len();
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut starts: Vec<Vec<f64>> = Vec::new();
        if norm > 1e-12 {
            starts.push(x.iter().map(|v| v / norm).collect());
        }
        for k in 0..m {
            let mut e = unit_axis(m, k);
            starts.push(e.clone());
            e[k] = -1.0;
            starts.push(e);
        }
        if let DomainConfig::PerturbedBall { center, .. } = &self.config {
            let c = center.to_reals();
            let cn = c.iter().map(|v| v * v).sum::<f64>().sqrt();
            if cn > 1e-12 {
                starts.push(c.iter().map(|v| v / cn).collect());
            }
        }
        let mut best: Option<(f64, Vec<f64>)> = None;
        let mut consider = |y: Vec<f64>| {
            let d = dist(&y, x);
            if best.as_ref().is_none_or(|(b, _)| d < *b) {
                best = Some((d, y));
            }
        };
        for dir in &starts {
            let y0 = self.radial_boundary(dir);
            if let Some(y) = lagrange_newton(self, x, &y0) {
                consider(y);
            }
            consider(y0);
        }
        best.ok_or_else(|| Error::Analysis("no boundary point found".into()))
    }

    /// Boundary point on the ray from the origin in direction `dir`.
    fn radial_boundary(&self, dir: &[f64]) -> Vec<f64> {
        let (mut lo, mut hi) = (0.0, self.bounding_radius * (1.0 + 1e-12));
        let at = |t: f64| dir.iter().map(|v| v * t).collect::<Vec<_>>();
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if psi_real(self, &at(mid)) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        at(lo)
    }

    /// Euclidean ball of radius `δ` tangent at the boundary point `foot`.
    fn rolling_ball(&self, foot: &[f64]) -> Option<(Point, f64)> {
        let g = grad_real(self, foot);
        let gn = norm(&g);
        if gn == 0.0 || !gn.is_finite() {
            return None;
        }
        let delta = self.inner_radius;
        let c: Vec<f64> = foot.iter().zip(&g).map(|(f, gi)| f + delta * gi / gn).collect();
        Some((Point::from_reals(&c).ok()?, delta))
    }

    /// `∂ψ_{z₀}(v) = Σ_j (∂ψ/∂z_j)(z₀)·v_j` from the analytic gradient.
    pub fn dpsi(&self, z0: &Point, v: &Point) -> Result<Complex64> {
        self.check_dim(z0)?;
        self.check_dim(v)?;
        complex_derivative(&self.gradient(z0), v)
    }

    /// Same as [`Domain::dpsi`] with central differences, step `1e−6·(1+‖z₀‖)`.
    pub fn dpsi_fd(&self, z0: &Point, v: &Point) -> Result<Complex64> {
        self.check_dim(z0)?;
        self.check_dim(v)?;
        let x = z0.to_reals();
        let h = 1e-6 * (1.0 + z0.norm());
        let grad: Vec<f64> = (0..x.len())
            .map(|k| {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[k] += h;
                xm[k] -= h;
                (psi_real(self, &xp) - psi_real(self, &xm)) / (2.0 * h)
            })
            .collect();
        complex_derivative(&grad, v)
    }
}

fn complex_derivative(grad: &[f64], v: &Point) -> Result<Complex64> {
    ensure!(
        grad.iter().all(|g| g.is_finite()),
        Analysis,
        "gradient of the defining function is not finite"
    );
    // ∂/∂z_j = ½(∂/∂x_j − i ∂/∂y_j)
    Ok(v
        .coords()
        .iter()
        .enumerate()
        .map(|(j, vj)| 0.5 * Complex64::new(grad[2 * j], -grad[2 * j + 1]) * vj)
        .sum())
}

fn unit_axis(m: usize, k: usize) -> Vec<f64> {
    let mut e = vec![0.0; m];
    e[k] = 1.0;
    e
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn psi_real(d: &Domain, x: &[f64]) -> f64 {
    match &d.config {
        DomainConfig::Ball { .. } => 1.0 - x.iter().map(|v| v * v).sum::<f64>(),
        DomainConfig::Ellipsoid { .. } => {
            1.0 - x
                .iter()
                .zip(&d.real_axes)
                .map(|(v, a)| (v / a) * (v / a))
                .sum::<f64>()
        }
        DomainConfig::PerturbedBall {
            epsilon,
            center,
            width,
            ..
        } => {
            let c = center.to_reals();
            let r2 = x.iter().map(|v| v * v).sum::<f64>();
            let q2 = dist(x, &c).powi(2);
            1.0 - r2 - epsilon * (-q2 / (width * width)).exp()
        }
    }
}

fn grad_real(d: &Domain, x: &[f64]) -> Vec<f64> {
    match &d.config {
        DomainConfig::Ball { .. } => x.iter().map(|v| -2.0 * v).collect(),
        DomainConfig::Ellipsoid { .. } => x
            .iter()
            .zip(&d.real_axes)
            .map(|(v, a)| -2.0 * v / (a * a))
            .collect(),
        DomainConfig::PerturbedBall {
            epsilon,
            center,
            width,
            ..
        } => {
            let c = center.to_reals();
            let w2 = width * width;
            let g = (-dist(x, &c).powi(2) / w2).exp();
            x.iter()
                .zip(&c)
                .map(|(v, ci)| -2.0 * v + epsilon * (2.0 / w2) * (v - ci) * g)
                .collect()
        }
    }
}

fn hessian_real(d: &Domain, x: &[f64]) -> Vec<Vec<f64>> {
    let m = x.len();
    let mut h = vec![vec![0.0; m]; m];
    match &d.config {
        DomainConfig::Ball { .. } => {
            for (k, row) in h.iter_mut().enumerate() {
                row[k] = -2.0;
            }
        }
        DomainConfig::Ellipsoid { .. } => {
            for (k, row) in h.iter_mut().enumerate() {
                row[k] = -2.0 / (d.real_axes[k] * d.real_axes[k]);
            }
        }
        DomainConfig::PerturbedBall {
            epsilon,
            center,
            width,
            ..
        } => {
            let c = center.to_reals();
            let w2 = width * width;
            let g = (-dist(x, &c).powi(2) / w2).exp();
            let s = epsilon * (2.0 / w2) * g;
            for i in 0..m {
                for j in 0..m {
                    let outer = (x[i] - c[i]) * (x[j] - c[j]);
                    let id = if i == j { 1.0 } else { 0.0 };
                    h[i][j] = -2.0 * id + s * (id - (2.0 / w2) * outer);
                }
            }
        }
    }
    h
}

/// Solves `y − x + μ∇ψ(y) = 0, ψ(y) = 0` from `y0`; returns the foot point.
fn lagrange_newton(d: &Domain, x: &[f64], y0: &[f64]) -> Option<Vec<f64>> {
    let m = x.len();
    let mut y = y0.to_vec();
    let g0 = grad_real(d, &y);
    let gg: f64 = g0.iter().map(|v| v * v).sum();
    let mut mu = x.iter().zip(&y).zip(&g0).map(|((a, b), g)| (a - b) * g).sum::<f64>() / gg;
    let residual = |y: &[f64], mu: f64| -> Vec<f64> {
        let g = grad_real(d, y);
        let mut r: Vec<f64> = (0..m).map(|k| y[k] - x[k] + mu * g[k]).collect();
        r.push(psi_real(d, y));
        r
    };
    let rnorm = |r: &[f64]| norm(r);
    let mut r = residual(&y, mu);
    for _ in 0..60 {
        if rnorm(&r) < 1e-15 {
            break;
        }
        let g = grad_real(d, &y);
        let h = hessian_real(d, &y);
        let mut jac = vec![vec![0.0; m + 1]; m + 1];
        for i in 0..m {
            for j in 0..m {
                jac[i][j] = if i == j { 1.0 } else { 0.0 } + mu * h[i][j];
            }
            jac[i][m] = g[i];
            jac[m][i] = g[i];
        }
        let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        let step = solve_dense(jac, rhs)?;
        let mut t = 1.0;
        loop {
            let yn: Vec<f64> = (0..m).map(|k| y[k] + t * step[k]).collect();
            let mun = mu + t * step[m];
            let rn = residual(&yn, mun);
            if rnorm(&rn) < rnorm(&r) || t < 1e-6 {
                y = yn;
                mu = mun;
                r = rn;
                break;
            }
            t *= 0.5;
        }
    }
    (rnorm(&r) < 1e-10 && mu >= -1e-12).then_some(y)
}

/// Gaussian elimination with partial pivoting.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let m = b.len();
    for col in 0..m {
        let p = (col..m).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[p][col].abs() < 1e-300 {
            return None;
        }
        a.swap(p, col);
        b.swap(p, col);
        for row in (col + 1)..m {
            let f = a[row][col] / a[col][col];
            for k in col..m {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; m];
    for i in (0..m).rev() {
        let s: f64 = ((i + 1)..m).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

/// Nearest boundary point of `{Σ x_k²/a_k² < 1}` from an interior point.
fn ellipsoid_nearest(axes: &[f64], z: &[f64]) -> (f64, Vec<f64>) {
    let a2: Vec<f64> = axes.iter().map(|a| a * a).collect();
    let amin2 = a2.iter().copied().fold(f64::INFINITY, f64::min);
    let is_min: Vec<bool> = a2.iter().map(|&v| v == amin2).collect();
    let on_min_axes_zero = z.iter().zip(&is_min).all(|(zk, &m)| !m || *zk == 0.0);

    if on_min_axes_zero {
        // the secular function stays finite at t = −a_min²
        let y: Vec<f64> = (0..z.len())
            .map(|k| if is_min[k] { 0.0 } else { a2[k] * z[k] / (a2[k] - amin2) })
            .collect();
        let used: f64 = (0..z.len())
            .filter(|&k| !is_min[k])
            .map(|k| y[k] * y[k] / a2[k])
            .sum();
        if used <= 1.0 {
            let mut y = y;
            let k0 = is_min.iter().position(|&m| m).unwrap();
            y[k0] = axes[k0] * (1.0 - used).sqrt();
            return (dist(&y, z), y);
        }
    }

    let secular = |t: f64| -> f64 {
        z.iter()
            .zip(&a2)
            .zip(axes)
            .map(|((zk, ak2), ak)| {
                let v = ak * zk / (ak2 + t);
                v * v
            })
            .sum::<f64>()
            - 1.0
    };
    let (mut lo, mut hi) = (-amin2, 0.0);
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if secular(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    let y: Vec<f64> = z.iter().zip(&a2).map(|(zk, ak2)| ak2 * zk / (ak2 + t)).collect();
    let d = z
        .iter()
        .zip(&a2)
        .map(|(zk, ak2)| (t * zk / (ak2 + t)).powi(2))
        .sum::<f64>()
        .sqrt();
    (d, y)
}

/// `d(z, ∂D)`; exactly `1 − ‖z‖` for the unit ball.
pub fn boundary_distance(domain: &Domain, z: &Point) -> Result<f64> {
    Ok(domain.nearest_boundary(z)?.0)
}

/// Kobayashi distance of the Euclidean ball `B(c, s)`, if it contains both points.
fn ball_distance(c: &Point, s: f64, z: &Point, w: &Point) -> Option<f64> {
    let zs = z.sub(c).scale(1.0 / s);
    let ws = w.sub(c).scale(1.0 / s);
    let (cz, cw) = (1.0 - zs.norm_sqr(), 1.0 - ws.norm_sqr());
    if cz <= 0.0 || cw <= 0.0 {
        return None;
    }
    Some(ball::distance_from_parts(&zs, cz, &ws, cw).kobayashi)
}

/// Inscribed balls available at `x` (own maximal ball, rolling ball at the foot).
fn local_balls(domain: &Domain, x: &Point) -> Result<Vec<(Point, f64)>> {
    let (d, foot) = domain.nearest_boundary(x)?;
    let mut balls = vec![(x.clone(), d)];
    if let Some(b) = domain.rolling_ball(&foot) {
        balls.push(b);
    }
    Ok(balls)
}

/// Options for the inscribed-ball chain.
#[derive(Clone, Copy, Debug)]
pub struct ChainOptions {
    pub step_fraction: f64,
    pub max_steps: usize,
}

impl Default for ChainOptions {
    fn default() -> Self {
        Self {
            step_fraction: CHAIN_STEP_FRACTION,
            max_steps: CHAIN_MAX_STEPS,
        }
    }
}

/// Bounds on `k_D(z, w)`.
pub fn kobayashi_bounds(domain: &Domain, z: &Point, w: &Point) -> Result<DistanceBounds> {
    kobayashi_bounds_with(domain, z, w, ChainOptions::default())
}

pub fn kobayashi_bounds_with(
    domain: &Domain,
    z: &Point,
    w: &Point,
    opts: ChainOptions,
) -> Result<DistanceBounds> {
    domain.require_interior(z)?;
    domain.require_interior(w)?;
    ensure!(
        opts.step_fraction > 0.0 && opts.step_fraction < 1.0,
        Parameter,
        "chain step fraction must lie in (0,1)"
    );
    if domain.is_ball() {
        let k = ball::pseudo_distance(z, w)?.kobayashi;
        return Ok(DistanceBounds {
            lower: k,
            upper: k,
            upper_infinite: false,
        });
    }
    let origin = Point::origin(domain.n);
    let lower = ball_distance(&origin, domain.bounding_radius, z, w)
        .ok_or_else(|| Error::Domain("point outside the circumscribed ball".into()))?;

    let mut candidates = vec![(origin, domain.core_radius)];
    candidates.extend(local_balls(domain, z)?);
    candidates.extend(local_balls(domain, w)?);
    let mut upper = candidates
        .iter()
        .filter_map(|(c, s)| ball_distance(c, *s, z, w))
        .fold(f64::INFINITY, f64::min);

    let chain = chain_bound(domain, z, w, opts)?;
    upper = upper.min(chain);
    // every upper bound dominates the circumscribed bound up to rounding
    let upper = upper.max(lower);
    Ok(DistanceBounds {
        lower,
        upper,
        upper_infinite: upper.is_infinite(),
    })
}

/// Sum of link costs along the segment `[z, w]`, each link certified by an
/// inscribed ball containing both of its endpoints.
fn chain_bound(domain: &Domain, z: &Point, w: &Point, opts: ChainOptions) -> Result<f64> {
    let total = z.distance(w);
    if total == 0.0 {
        return Ok(0.0);
    }
    let dir = w.sub(z).scale(1.0 / total);
    let core = (Point::origin(domain.n), domain.core_radius);
    let mut travelled = 0.0;
    let mut x = z.clone();
    let mut sum = 0.0;
    let mut balls = local_balls(domain, &x)?;
    for _ in 0..opts.max_steps {
        let d = balls[0].1;
        let step = (opts.step_fraction * d).min(total - travelled);
        let last = step >= total - travelled;
        let next = if last {
            w.clone()
        } else {
            z.add(&dir.scale(travelled + step))
        };
        let next_balls = local_balls(domain, &next)?;
        let link = balls
            .iter()
            .chain(next_balls.iter())
            .chain(std::iter::once(&core))
            .filter_map(|(c, s)| ball_distance(c, *s, &x, &next))
            .fold(f64::INFINITY, f64::min);
        sum += link;
        if last {
            return Ok(sum);
        }
        travelled += step;
        x = next;
        balls = next_balls;
    }
    log::warn!("inscribed-ball chain exceeded {} steps", opts.max_steps);
    Ok(f64::INFINITY)
}

/// Fits `c₀ ≤ k_D(z₀,z) + ½ log d(z,∂D) ≤ C₀` over the probes, with the
/// Kobayashi bounds in place of the exact distance.
pub fn estimate_boundary_constants(
    domain: &Domain,
    z0: &Point,
    probes: &[Point],
) -> Result<BoundaryEstimate> {
    ensure!(probes.len() >= 2, Parameter, "need at least 2 probes, got {}", probes.len());
    let mut per_probe = Vec::with_capacity(probes.len());
    for p in probes {
        let d = boundary_distance(domain, p)?;
        let b = kobayashi_bounds(domain, z0, p)?;
        let half_log = 0.5 * d.ln();
        per_probe.push((d, b.lower + half_log, b.upper + half_log));
    }
    let c0 = per_probe.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let big_c0 = per_probe.iter().map(|p| p.2).fold(f64::NEG_INFINITY, f64::max);
    Ok(BoundaryEstimate {
        c0,
        big_c0,
        per_probe,
    })
}

/// Points of `B_D(z₀, r)`: the exact ellipsoid in the ball, the Euclidean
/// ball `B(z₀, r·d(z₀))` (which lies inside `B_D(z₀, r)`) otherwise.
fn sample_kobayashi_region(
    domain: &Domain,
    z0: &Point,
    r: f64,
    samples: usize,
    seed: u64,
) -> Result<Vec<Point>> {
    ensure!(samples >= 1, Parameter, "sample count must be at least 1");
    ensure!(r > 0.0 && r < 1.0, Parameter, "pseudohyperbolic radius must lie in (0,1), got {r}");
    domain.require_interior(z0)?;
    if domain.is_ball() {
        return kobayashi_ball(z0, r)?.sample(samples, seed);
    }
    let d0 = boundary_distance(domain, z0)?;
    let sampler = EuclideanBall {
        center: z0.clone(),
        radius: r * d0,
    };
    let mut rng = stream_rng(seed, 0);
    Ok((0..samples).map(|_| sampler.draw(&mut rng)).collect())
}

/// Smallest `C₂` with `(1−r)/C₂·d(z₀) ≤ d(z) ≤ C₂/(1−r)·d(z₀)` on samples of
/// `B_D(z₀, r)`; passes iff `C₂ ≤ 4`.
pub fn check_distance_comparison(
    domain: &Domain,
    z0: &Point,
    r: f64,
    samples: usize,
    seed: u64,
) -> Result<CheckReport> {
    let pts = sample_kobayashi_region(domain, z0, r, samples, seed)?;
    let d0 = boundary_distance(domain, z0)?;
    let mut c2: f64 = 0.0;
    for z in &pts {
        let d = boundary_distance(domain, z)?;
        c2 = c2.max((1.0 - r) * (d / d0).max(d0 / d));
    }
    Ok(CheckReport::bound_above("distance_comparison", c2, 4.0, samples).with_seed(seed))
}

/// Largest `c_{2,r}` with `d(z₀) ≥ c_{2,r}(‖z−z₀‖² + |∂ψ_{z₀}(z−z₀)|)` on
/// samples of `B_D(z₀, r)`. Also reports `c_{2,r}/(1−r²)`.
pub fn check_defining_fn_inequality(
    domain: &Domain,
    z0: &Point,
    r: f64,
    samples: usize,
    seed: u64,
) -> Result<CheckReport> {
    let pts = sample_kobayashi_region(domain, z0, r, samples, seed)?;
    let d0 = boundary_distance(domain, z0)?;
    let grad = domain.gradient(z0);
    let mut c = f64::INFINITY;
    for z in &pts {
        let v = z.sub(z0);
        let rhs = v.norm_sqr() + complex_derivative(&grad, &v)?.norm();
        if rhs > 0.0 {
            c = c.min(d0 / rhs);
        }
    }
    Ok(CheckReport::bound_below("defining_fn_inequality", c, 0.0, samples)
        .with_seed(seed)
        .with_extra("c_over_1_minus_r2", c / (1.0 - r * r)))
}
