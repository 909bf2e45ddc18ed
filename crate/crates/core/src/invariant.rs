//! Eisenman–Kobayashi density and measure of the unit ball.
//!
//! `K(z) = (1 − ‖z‖²)^{−(n+1)}` is the reciprocal real Jacobian at `0` of the
//! automorphism sending `0` to `z`; the induced measure of a Kobayashi ball
//! `B(z₀, r)` is `(r²/(1 − r²))^n` for every center.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ball::{automorphism_unchecked, kobayashi_ball, BOUNDARY_GUARD};
use crate::error::{ensure, Result};
use crate::integrate::{integrate_density, stream_rng, EstimateWithError, MCConfig, Region};
use crate::point::Point;
use crate::report::CheckReport;

/// Finite-difference Jacobians are trusted to this relative accuracy.
pub const FD_TOLERANCE: f64 = 1e-6;

/// Density backend: the invariant density, or the boundary-distance
/// substitute `d(z, ∂B)^{−(n+1)}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    #[default]
    EisenmanKobayashi,
    BoundaryDistance,
}

impl Backend {
    pub fn density(self, z: &Point) -> Result<f64> {
        let n = z.dim() as i32;
        let c = 1.0 - z.norm_sqr();
        ensure!(
            c > BOUNDARY_GUARD,
            Domain,
            "density at {z} overflows: the point is on or too close to the sphere"
        );
        Ok(match self {
            Backend::EisenmanKobayashi => c.powi(-(n + 1)),
            Backend::BoundaryDistance => (1.0 - z.norm()).powi(-(n + 1)),
        })
    }
}

/// `(1 − ‖z‖²)^{−(n+1)}`.
pub fn ek_density(z: &Point) -> Result<f64> {
    Backend::EisenmanKobayashi.density(z)
}

/// Closed form `κ(B(z₀, r)) = (r²/(1 − r²))^n`.
pub fn ek_ball_measure_exact(n: usize, r: f64) -> Result<f64> {
    ensure!(r > 0.0 && r < 1.0, Parameter, "radius must lie in (0,1), got {r}");
    Ok((r * r / (1.0 - r * r)).powi(n as i32))
}

/// MC estimate of `κ(B(z₀, r))` from uniform samples of the ellipsoid.
pub fn ek_ball_measure(z0: &Point, r: f64, mc: &MCConfig) -> Result<EstimateWithError> {
    ek_ball_measure_with(Backend::EisenmanKobayashi, z0, r, mc)
}

pub fn ek_ball_measure_with(backend: Backend, z0: &Point, r: f64, mc: &MCConfig) -> Result<EstimateWithError> {
    let ball = kobayashi_ball(z0, r)?;
    backend.density(z0)?;
    integrate_density(
        |z| backend.density(z).unwrap_or(f64::NAN),
        &Region::Ellipsoid(ball),
        mc,
    )
}

/// Two-sided shell bounds `c r^{2n}(1−r)^{n+1} ≤ κ(B(z₀,r)) ≤ C/(d^n(1−r)^n)`
/// asserted with `c = C = 1` on the grid. `fitted_c11` is the least
/// lower-bound ratio and `fitted_C11` the largest upper-bound ratio.
/// Inconclusive when MC error exceeds 10% of the slack to either bound.
pub fn check_shell_bounds(n: usize, centers: &[f64], radii: &[f64], mc: &MCConfig) -> Result<CheckReport> {
    ensure!(!centers.is_empty() && !radii.is_empty(), Parameter, "empty grid");
    let mut lower_ratios = Vec::new();
    let mut upper_ratios = Vec::new();
    let mut pass = true;
    let mut inconclusive = false;
    let mut max_err: f64 = 0.0;
    for (i, &t) in centers.iter().enumerate() {
        for (j, &r) in radii.iter().enumerate() {
            let z0 = Point::on_axis(n, 0, t);
            let d = 1.0 - t;
            let cfg = mc.with_seed(crate::integrate::derive_seed(mc.seed, (i * radii.len() + j) as u64));
            let k = ek_ball_measure(&z0, r, &cfg)?;
            let lower = r.powi(2 * n as i32) * (1.0 - r).powi(n as i32 + 1);
            let upper = 1.0 / (d.powi(n as i32) * (1.0 - r).powi(n as i32));
            lower_ratios.push(k.value / lower);
            upper_ratios.push(k.value * d.powi(n as i32) * (1.0 - r).powi(n as i32));
            pass &= k.value >= lower && k.value <= upper;
            let slack = (k.value - lower).min(upper - k.value).abs();
            inconclusive |= k.std_error > 0.1 * slack;
            max_err = max_err.max(k.relative_error());
        }
    }
    let fold = |v: &[f64], f: fn(f64, f64) -> f64, init: f64| v.iter().copied().fold(init, f);
    let c11 = fold(&lower_ratios, f64::min, f64::INFINITY);
    let big_c11 = fold(&upper_ratios, f64::max, 0.0);
    let spread_lower = fold(&lower_ratios, f64::max, 0.0) / c11;
    let spread_upper = big_c11 / fold(&upper_ratios, f64::min, f64::INFINITY);
    let mut report = CheckReport::new("ek_shell_bounds", c11, 1.0, pass, mc.n_samples)
        .with_seed(mc.seed)
        .with_extra("fitted_c11", c11)
        .with_extra("fitted_C11", big_c11)
        .with_extra("lower_ratio_spread", spread_lower)
        .with_extra("upper_ratio_spread", spread_upper)
        .with_extra("max_relative_error", max_err);
    if inconclusive {
        report = report.inconclusive();
    }
    Ok(report)
}

/// `κ(B(z, r))` agrees across the centers and with the closed form: the
/// statistic is the largest pairwise or closed-form z-score.
pub fn check_mobius_invariance(centers: &[Point], r: f64, mc: &MCConfig) -> Result<CheckReport> {
    ensure!(centers.len() >= 2, Parameter, "need at least two centers");
    let n = centers[0].dim();
    let exact = ek_ball_measure_exact(n, r)?;
    let mut ests = Vec::new();
    for (i, z) in centers.iter().enumerate() {
        let cfg = mc.with_seed(crate::integrate::derive_seed(mc.seed, 100 + i as u64));
        ests.push(ek_ball_measure(z, r, &cfg)?);
    }
    let mut worst: f64 = 0.0;
    for (i, a) in ests.iter().enumerate() {
        worst = worst.max(a.z_score(exact).abs());
        for b in &ests[i + 1..] {
            let se = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
            worst = worst.max((a.value - b.value).abs() / se);
        }
    }
    let mut report = CheckReport::bound_above("ek_mobius_invariance", worst, 3.0, mc.n_samples)
        .with_seed(mc.seed)
        .with_extra("exact", exact);
    for (i, e) in ests.iter().enumerate() {
        report = report.with_extra(&format!("kappa_{i}"), e.value);
    }
    Ok(report)
}

/// `2^{−(n+1)} ≤ K(z)·d(z,∂B)^{n+1} ≤ 1` along a radial grid.
pub fn check_density_sandwich(n: usize, grid: usize) -> Result<CheckReport> {
    ensure!(grid >= 2, Parameter, "grid needs at least two points");
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for i in 0..grid {
        let d = 0.5f64.powf(40.0 * i as f64 / (grid - 1) as f64);
        let z = Point::on_axis(n, 0, 1.0 - d);
        // 1 − ‖z‖² = d(2 − d) exactly
        let k = (d * (2.0 - d)).powi(-(n as i32 + 1));
        let _ = ek_density(&z)?;
        let v = k * d.powi(n as i32 + 1);
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let c = 0.5f64.powi(n as i32 + 1);
    let pass = lo >= c * (1.0 - 1e-12) && hi <= 1.0 + 1e-12;
    Ok(CheckReport::new("ek_density_sandwich", lo, c, pass, grid).with_extra("max", hi))
}

/// Samples competitors `f = φ_a ∘ φ_c ∘ (t·) ∘ φ_c`, holomorphic self-maps of
/// the ball, and checks `1/|Jac_ℝ f(0)| ≥ K(f(0))`. The statistic is the
/// least ratio `(1/|Jac|)/K`, which equals one when `t = 1`.
pub fn check_inf_property(n: usize, trials: usize, seed: u64) -> Result<CheckReport> {
    ensure!(trials >= 1, Parameter, "need at least one trial");
    let mut rng = stream_rng(seed, 0);
    let mut worst = f64::INFINITY;
    for i in 0..trials {
        let a = random_point(n, 0.8, &mut rng);
        let c = random_point(n, 0.8, &mut rng);
        let t = if i == 0 { 1.0 } else { 0.05 + 0.95 * rng.random::<f64>() };
        let f = |w: &Point| {
            let inner = automorphism_unchecked(&c, w).scale(t);
            automorphism_unchecked(&a, &automorphism_unchecked(&c, &inner))
        };
        let origin = Point::origin(n);
        let image = f(&origin);
        let jac = fd_real_jacobian(f, &origin);
        worst = worst.min((1.0 / jac) / ek_density(&image)?);
    }
    Ok(CheckReport::bound_below("ek_inf_property", worst, 1.0 - FD_TOLERANCE, trials).with_seed(seed))
}

fn random_point(n: usize, radius: f64, rng: &mut crate::integrate::StreamRng) -> Point {
    loop {
        let reals: Vec<f64> = (0..2 * n).map(|_| radius * (2.0 * rng.random::<f64>() - 1.0)).collect();
        let p = Point::from_reals(&reals).expect("finite coordinates");
        if p.norm() < radius {
            return p;
        }
    }
}

/// `|det|` of the real `2n × 2n` Jacobian by central differences.
pub(crate) fn fd_real_jacobian(f: impl Fn(&Point) -> Point, z: &Point) -> f64 {
    let x = z.to_reals();
    let m = x.len();
    let h = 1e-6;
    let mut jac = vec![vec![0.0; m]; m];
    for j in 0..m {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[j] += h;
        xm[j] -= h;
        let fp = f(&Point::from_reals(&xp).expect("finite")).to_reals();
        let fm = f(&Point::from_reals(&xm).expect("finite")).to_reals();
        for i in 0..m {
            jac[i][j] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    determinant(jac).abs()
}

/// Gaussian elimination with partial pivoting.
pub(crate) fn determinant(mut a: Vec<Vec<f64>>) -> f64 {
    let m = a.len();
    let mut det = 1.0;
    for col in 0..m {
        let pivot = (col..m)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("nonempty range");
        if a[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        det *= a[col][col];
        for row in (col + 1)..m {
            let factor = a[row][col] / a[col][col];
            for k in col..m {
                a[row][k] -= factor * a[col][k];
            }
        }
    }
    det
}
