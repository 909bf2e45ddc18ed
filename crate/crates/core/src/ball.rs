//! Invariant geometry of the unit ball `Bⁿ ⊂ ℂⁿ`.
//!
//! Pseudohyperbolic distance
//!
//! ```text
//! ρ(z,w)² = 1 − (1−‖z‖²)(1−‖w‖²) / |1−⟨z,w⟩|²,      k = artanh ρ,
//! ```
//!
//! Kobayashi balls `B(z₀,r) = {ρ(z₀,·) < r}` (ellipsoids), their normalized
//! volumes, automorphisms and uniform sampling. `ν(Bⁿ) = 1` throughout.
//!
//! The automorphism convention is the involutive one,
//! `φ_a(z) = (a − P_a z − s_a Q_a z) / (1 − ⟨z,a⟩)` with `s_a = √(1−‖a‖²)`,
//! so `φ_a(0) = a`, `φ_a ∘ φ_a = id` and `φ_0(z) = −z`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::integrate::{
    estimate_mean, random_direction, stream_rng, EstimateWithError, EuclideanBall, MCConfig, Sampler, StreamRng,
};
use crate::point::Point;
use crate::report::CheckReport;
use rand::Rng;

/// Centers closer than this to the sphere are rejected.
pub const BOUNDARY_GUARD: f64 = 1e-12;

/// Tolerance on `‖z‖ ≤ 1` for points of the closed ball.
const CLOSED_BALL_SLACK: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistancePair {
    pub pseudo: f64,
    pub kobayashi: f64,
}

impl DistancePair {
    pub const ZERO: DistancePair = DistancePair {
        pseudo: 0.0,
        kobayashi: 0.0,
    };

    pub fn from_pseudo(rho: f64) -> Self {
        let rho = rho.clamp(0.0, 1.0);
        Self {
            pseudo: rho,
            kobayashi: rho.atanh(),
        }
    }

    pub fn from_kobayashi(k: f64) -> Self {
        Self {
            pseudo: k.tanh(),
            kobayashi: k,
        }
    }
}

fn check_closed(z: &Point, what: &str) -> Result<()> {
    let norm = z.norm();
    ensure!(
        norm <= 1.0 + CLOSED_BALL_SLACK,
        Domain,
        "{what} {z} lies outside the closed unit ball (‖z‖ = {norm})"
    );
    Ok(())
}

fn check_open(z: &Point, what: &str) -> Result<()> {
    let norm = z.norm();
    ensure!(
        norm < 1.0 - BOUNDARY_GUARD,
        Domain,
        "{what} {z} is not an interior point (‖z‖ = {norm})"
    );
    Ok(())
}

fn check_same_dim(z: &Point, w: &Point) -> Result<()> {
    ensure!(
        z.dim() == w.dim(),
        Parameter,
        "dimension mismatch: {} vs {}",
        z.dim(),
        w.dim()
    );
    Ok(())
}

/// `‖z‖²‖w‖² − |⟨z,w⟩|² = Σ_{j<k} |z_j w_k − z_k w_j|²`, computed without cancellation.
fn wedge_norm_sqr(z: &Point, w: &Point) -> f64 {
    let (a, b) = (z.coords(), w.coords());
    let mut sum = 0.0;
    for j in 0..a.len() {
        for k in (j + 1)..a.len() {
            sum += (a[j] * b[k] - a[k] * b[j]).norm_sqr();
        }
    }
    sum
}

/// Distance between `z` and `w` given `1 − ‖z‖²` and `1 − ‖w‖²`.
///
/// `ρ²` comes from `|1−⟨z,w⟩|²ρ² = ‖z−w‖² − (‖z‖²‖w‖² − |⟨z,w⟩|²)`, which is
/// exact at `z = w`; near the sphere `k` is taken from `1 − ρ²` directly.
pub(crate) fn distance_from_parts(z: &Point, cz: f64, w: &Point, cw: f64) -> DistancePair {
    let denom = z.one_minus_inner(w).norm_sqr();
    if denom == 0.0 {
        return DistancePair {
            pseudo: 1.0,
            kobayashi: f64::INFINITY,
        };
    }
    let numer = (z.distance(w).powi(2) - wedge_norm_sqr(z, w)).max(0.0);
    let rho = (numer / denom).sqrt().min(1.0);
    if rho < 0.5 {
        return DistancePair {
            pseudo: rho,
            kobayashi: rho.atanh(),
        };
    }
    let co = (cz.max(0.0) * cw.max(0.0)) / denom;
    if co <= 0.0 {
        return DistancePair {
            pseudo: 1.0,
            kobayashi: f64::INFINITY,
        };
    }
    // artanh ρ = ½ log((1+ρ)² / (1−ρ²))
    let rho = (1.0 - co).max(0.0).sqrt().min(1.0);
    let k = 0.5 * ((1.0 + rho) * (1.0 + rho) / co).ln();
    DistancePair {
        pseudo: k.tanh(),
        kobayashi: k,
    }
}

/// `1 − ‖z‖²`.
pub(crate) fn co_norm(z: &Point) -> f64 {
    1.0 - z.norm_sqr()
}

/// Pseudohyperbolic and Kobayashi distance in the unit ball.
pub fn pseudo_distance(z: &Point, w: &Point) -> Result<DistancePair> {
    check_same_dim(z, w)?;
    check_closed(z, "point")?;
    check_closed(w, "point")?;
    Ok(distance_from_parts(z, co_norm(z), w, co_norm(w)))
}

/// The involutive automorphism exchanging `0` and `a`.
pub fn ball_automorphism(a: &Point, z: &Point) -> Result<Point> {
    check_same_dim(a, z)?;
    check_open(a, "automorphism center")?;
    check_closed(z, "point")?;
    Ok(automorphism_unchecked(a, z))
}

pub(crate) fn automorphism_unchecked(a: &Point, z: &Point) -> Point {
    let a2 = a.norm_sqr();
    if a2 == 0.0 {
        return z.neg();
    }
    let za = z.inner(a);
    let proj = a.scale_complex(za / a2);
    let perp = z.sub(&proj);
    let s = (1.0 - a2).sqrt();
    let numer = a.sub(&proj).sub(&perp.scale(s));
    let denom = z.one_minus_inner(a);
    numer.scale_complex(Complex64::new(1.0, 0.0) / denom)
}

/// Real Jacobian determinant of `φ_a` at `z`:
/// `((1 − ‖a‖²) / |1 − ⟨z,a⟩|²)^{n+1}`.
pub fn automorphism_jacobian(a: &Point, z: &Point) -> Result<f64> {
    check_same_dim(a, z)?;
    check_open(a, "automorphism center")?;
    check_closed(z, "point")?;
    Ok(jacobian_unchecked(a, z))
}

pub(crate) fn jacobian_unchecked(a: &Point, z: &Point) -> f64 {
    let n = a.dim() as i32;
    ((1.0 - a.norm_sqr()) / z.one_minus_inner(a).norm_sqr()).powi(n + 1)
}

/// The Kobayashi ball `B(z₀, r)` of the unit ball, as an ellipsoid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KobayashiBall {
    pub base: Point,
    #[serde(rename = "r")]
    pub pseudo_radius: f64,
    pub center: Point,
    pub radial_axis: f64,
    pub transverse_axis: f64,
    /// Unit vector spanning `ℂz₀` (`None` for the round ball at the origin).
    #[serde(skip)]
    axis: Option<Point>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BallRecord {
    base: Point,
    r: f64,
    #[serde(default)]
    #[allow(dead_code)]
    center: Option<Point>,
    #[serde(default)]
    #[allow(dead_code)]
    radial_axis: Option<f64>,
    #[serde(default)]
    #[allow(dead_code)]
    transverse_axis: Option<f64>,
}

impl<'de> Deserialize<'de> for KobayashiBall {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        // Derived fields are recomputed from (base, r).
        let rec = BallRecord::deserialize(d)?;
        kobayashi_ball(&rec.base, rec.r).map_err(serde::de::Error::custom)
    }
}

/// Builds the ellipsoid `B(z₀, r)`.
pub fn kobayashi_ball(z0: &Point, r: f64) -> Result<KobayashiBall> {
    ensure!(
        r > 0.0 && r < 1.0,
        Parameter,
        "pseudohyperbolic radius must lie in (0,1), got {r}"
    );
    check_open(z0, "ball center")?;
    let a2 = z0.norm_sqr();
    let denom = 1.0 - r * r * a2;
    let s = (1.0 - a2) / denom;
    let axis = if a2 > 0.0 {
        Some(z0.scale(1.0 / a2.sqrt()))
    } else {
        None
    };
    Ok(KobayashiBall {
        base: z0.clone(),
        pseudo_radius: r,
        center: z0.scale((1.0 - r * r) / denom),
        radial_axis: r * s,
        transverse_axis: r * s.sqrt(),
        axis,
    })
}

impl KobayashiBall {
    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    /// Normalized volume `r^{2n} ((1−‖z₀‖²)/(1−r²‖z₀‖²))^{n+1}`.
    pub fn volume(&self) -> f64 {
        ball_volume_unchecked(&self.base, self.pseudo_radius)
    }

    /// Membership through the ellipsoid equation.
    pub fn contains(&self, z: &Point) -> bool {
        self.ellipsoid_level(z) < 1.0
    }

    /// `|α|²/radial² + ‖v⊥‖²/transverse²` for `v = z − c = α·u + v⊥`.
    pub fn ellipsoid_level(&self, z: &Point) -> f64 {
        let v = z.sub(&self.center);
        match &self.axis {
            None => v.norm_sqr() / (self.radial_axis * self.radial_axis),
            Some(u) => {
                let alpha = v.inner(u);
                let perp = v.sub(&u.scale_complex(alpha));
                alpha.norm_sqr() / (self.radial_axis * self.radial_axis)
                    + perp.norm_sqr() / (self.transverse_axis * self.transverse_axis)
            }
        }
    }

    /// Membership through `ρ(z₀, z) < r`.
    pub fn contains_metric(&self, z: &Point) -> bool {
        z.norm() <= 1.0
            && distance_from_parts(&self.base, co_norm(&self.base), z, co_norm(z)).pseudo
                < self.pseudo_radius
    }

    /// Maps a point `u` of the unit ball onto the ellipsoid (affinely).
    fn map_from_unit(&self, u: &Point) -> Point {
        match &self.axis {
            None => self.center.add(&u.scale(self.radial_axis)),
            Some(e) => {
                let alpha = u.inner(e);
                let perp = u.sub(&e.scale_complex(alpha));
                self.center
                    .add(&e.scale_complex(alpha * self.radial_axis))
                    .add(&perp.scale(self.transverse_axis))
            }
        }
    }

    pub fn sample(&self, count: usize, seed: u64) -> Result<Vec<Point>> {
        sample_ball_uniform(self, count, seed)
    }
}

impl Sampler for KobayashiBall {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn draw(&self, rng: &mut StreamRng) -> Point {
        let n = self.dim();
        loop {
            let dir = random_direction(n, rng);
            let u: f64 = rng.random();
            let t = u.powf(1.0 / (2 * n) as f64);
            let unit = Point::from_vec_unchecked(dir.into_iter().map(|c| c * t).collect());
            let z = self.map_from_unit(&unit);
            // rounding can push the image of a boundary point outside
            if self.contains(&z) && z.norm() < 1.0 {
                return z;
            }
        }
    }
}

fn ball_volume_unchecked(z0: &Point, r: f64) -> f64 {
    let n = z0.dim() as i32;
    let a2 = z0.norm_sqr();
    r.powi(2 * n) * ((1.0 - a2) / (1.0 - r * r * a2)).powi(n + 1)
}

/// Normalized volume of `B(z₀, r)`.
pub fn ball_volume(z0: &Point, r: f64) -> Result<f64> {
    Ok(kobayashi_ball(z0, r)?.volume())
}

/// `count` uniform samples of the ellipsoid (rejection-free up to rounding).
pub fn sample_ball_uniform(ball: &KobayashiBall, count: usize, seed: u64) -> Result<Vec<Point>> {
    ensure!(count >= 1, Parameter, "sample count must be at least 1");
    let mut rng = stream_rng(seed, 0);
    Ok((0..count).map(|_| ball.draw(&mut rng)).collect())
}

/// Hit-or-miss MC volume of `B(z₀, r)`: uniform points of the Euclidean ball
/// `B(c, transverse_axis)`, which encloses the ellipsoid, scaled by its
/// volume. Sampling all of `Bⁿ` would see no hits for volumes far below
/// `1/n_samples`.
pub fn mc_ball_volume(ball: &KobayashiBall, cfg: &MCConfig) -> Result<EstimateWithError> {
    let hull = EuclideanBall {
        center: ball.center.clone(),
        radius: ball.transverse_axis,
    };
    let hits = estimate_mean(&hull, |z| f64::from(u8::from(ball.contains(z))), cfg)?;
    Ok(hits.scaled(ball.transverse_axis.powi(2 * ball.dim() as i32)))
}

/// Slack of `1−‖z₀‖² > ((1−r²)/4)(‖z−z₀‖² + |⟨z−z₀,z₀⟩|)` at one point.
pub fn ball_inequality_slack(z0: &Point, r: f64, z: &Point) -> f64 {
    let v = z.sub(z0);
    let rhs = 0.25 * (1.0 - r * r) * (v.norm_sqr() + v.inner(z0).norm());
    (1.0 - z0.norm_sqr()) - rhs
}

/// Samples `B(z₀, r)` and reports the smallest slack of the ball-model
/// inequality; passes iff every slack is positive.
pub fn check_lemma_ball_inequality(
    z0: &Point,
    r: f64,
    samples: usize,
    seed: u64,
) -> Result<CheckReport> {
    let ball = kobayashi_ball(z0, r)?;
    let pts = sample_ball_uniform(&ball, samples, seed)?;
    let min_slack = pts
        .iter()
        .map(|z| ball_inequality_slack(z0, r, z))
        .fold(f64::INFINITY, f64::min);
    Ok(CheckReport::bound_below("ball_model_inequality", min_slack, 0.0, samples).with_seed(seed))
}

/// Volume sandwich `c₁ r^{2n} d^{n+1} ≤ ν(B(z₀,r)) ≤ C₁ r^{2n} (1−r²)^{−(n+1)} d^{n+1}`
/// with `d = 1 − ‖z₀‖`, evaluated on a grid. In the ball `c₁ = 1` and `C₁ = 2^{n+1}`.
pub fn check_volume_sandwich(n: usize, centers: &[f64], radii: &[f64]) -> Result<CheckReport> {
    ensure!(n >= 1, Parameter, "dimension must be positive");
    let mut lower_ratio = f64::INFINITY;
    let mut upper_ratio: f64 = 0.0;
    let mut cells = 0;
    for &t in centers {
        for &r in radii {
            let z0 = Point::on_axis(n, 0, t);
            let vol = ball_volume(&z0, r)?;
            let d = 1.0 - t;
            let np1 = n as i32 + 1;
            let base = r.powi(2 * n as i32) * d.powi(np1);
            lower_ratio = lower_ratio.min(vol / base);
            upper_ratio = upper_ratio.max(vol * (1.0 - r * r).powi(np1) / base);
            cells += 1;
        }
    }
    let bound = 2f64.powi(n as i32 + 1);
    let pass = lower_ratio >= 1.0 - 1e-12 && upper_ratio <= bound * (1.0 + 1e-12);
    Ok(CheckReport::new("volume_sandwich", upper_ratio, bound, pass, cells)
        .with_extra("fitted_c1", lower_ratio)
        .with_extra("fitted_C1", upper_ratio))
}

/// Radial extent `(a + r)/(1 + r a)` of `B(a·e₁, r)`.
pub fn outer_radius(a: f64, r: f64) -> f64 {
    (a + r) / (1.0 + r * a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::integrate::sample_unit_ball;
    use crate::invariant::fd_real_jacobian;
    use approx::assert_abs_diff_eq;

    fn p1(x: f64) -> Point {
        Point::on_axis(1, 0, x)
    }

    /// One-dimensional Möbius quotient |(z−w)/(1−z̄w)|.
    fn mobius_quotient(z: Complex64, w: Complex64) -> f64 {
        ((z - w) / (Complex64::new(1.0, 0.0) - z.conj() * w)).norm()
    }

    #[test]
    fn distance_from_origin_is_norm() {
        let d = pseudo_distance(&Point::origin(2), &Point::on_axis(2, 0, 0.5)).unwrap();
        assert_abs_diff_eq!(d.pseudo, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(d.kobayashi, 0.549306, epsilon = 1e-6);
    }

    #[test]
    fn distance_to_self_is_zero() {
        let z = Point::from_reals(&[0.3, -0.2, 0.1, 0.6]).unwrap();
        let d = pseudo_distance(&z, &z).unwrap();
        assert_eq!(d, DistancePair::ZERO);
    }

    #[test]
    fn disk_distance_matches_mobius_quotient() {
        let (z, w) = (0.632121, 0.864665);
        let oracle = mobius_quotient(Complex64::new(z, 0.0), Complex64::new(w, 0.0));
        let d = pseudo_distance(&p1(z), &p1(w)).unwrap();
        assert_abs_diff_eq!(d.pseudo, oracle, epsilon = 1e-14);
        assert_abs_diff_eq!(d.pseudo, 0.512858, epsilon = 1e-6);
    }

    #[test]
    fn distance_outside_closed_ball_is_rejected() {
        assert!(matches!(
            pseudo_distance(&p1(0.2), &p1(1.01)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn automorphism_examples() {
        let a = p1(0.5);
        assert_eq!(ball_automorphism(&a, &Point::origin(1)).unwrap(), a);
        let img = ball_automorphism(&a, &p1(0.2)).unwrap();
        assert_abs_diff_eq!(img.coords()[0].re, (0.5 - 0.2) / (1.0 - 0.1), epsilon = 1e-15);
        assert_abs_diff_eq!(img.coords()[0].re, 0.333333, epsilon = 1e-6);
        let z = Point::from_reals(&[0.1, 0.4, -0.3, 0.0]).unwrap();
        assert_eq!(ball_automorphism(&Point::origin(2), &z).unwrap(), z.neg());
    }

    #[test]
    fn jacobian_matches_finite_difference_determinant() {
        let a = Point::from_reals(&[0.3, -0.2, 0.1, 0.4]).unwrap();
        let z = Point::from_reals(&[-0.2, 0.1, 0.5, -0.1]).unwrap();
        let fd = fd_real_jacobian(|p| automorphism_unchecked(&a, p), &z);
        assert_abs_diff_eq!(automorphism_jacobian(&a, &z).unwrap(), fd, epsilon = 1e-7);
    }

    #[test]
    fn round_ball_at_origin() {
        let b = kobayashi_ball(&Point::origin(2), 0.3).unwrap();
        assert_eq!(b.center, Point::origin(2));
        assert_eq!(b.radial_axis, 0.3);
        assert_eq!(b.transverse_axis, 0.3);
        assert_abs_diff_eq!(b.volume(), 0.3f64.powi(4), epsilon = 1e-16);
    }

    #[test]
    fn ellipsoid_data_by_substitution() {
        let b = kobayashi_ball(&p1(0.6), 0.5).unwrap();
        assert_abs_diff_eq!(b.center.coords()[0].re, 0.494505, epsilon = 1e-6);
        assert_abs_diff_eq!(b.radial_axis, 0.351648, epsilon = 1e-6);
        let b2 = kobayashi_ball(&Point::on_axis(2, 0, 0.6), 0.5).unwrap();
        // r·sqrt((1−0.36)/(1−0.09)) = 0.419314
        assert_abs_diff_eq!(b2.transverse_axis, 0.419314, epsilon = 1e-6);
        assert!(b2.radial_axis <= b2.transverse_axis);
        assert_abs_diff_eq!(ball_volume(&p1(0.6), 0.5).unwrap(), 0.123657, epsilon = 1e-6);
    }

    #[test]
    fn mc_volume_on_the_grid() {
        for n in 1..=3 {
            for t in [0.0, 0.6, 0.9] {
                for r in [0.2, 0.8] {
                    let ball = kobayashi_ball(&Point::on_axis(n, 0, t), r).unwrap();
                    let est = mc_ball_volume(&ball, &MCConfig::new(5, 20_000)).unwrap();
                    assert!(est.within(ball.volume(), 4.0), "{n} {t} {r}: {est:?} vs {}", ball.volume());
                }
            }
        }
    }

    #[test]
    fn volume_tends_to_one_as_radius_grows() {
        let v = ball_volume(&Point::origin(3), 1.0 - 1e-9).unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-7);
    }

    #[test]
    fn invalid_ball_parameters() {
        assert!(matches!(kobayashi_ball(&p1(0.1), 1.0), Err(Error::Parameter(_))));
        assert!(matches!(kobayashi_ball(&p1(0.1), 0.0), Err(Error::Parameter(_))));
        assert!(matches!(
            kobayashi_ball(&p1(1.0 - 1e-13), 0.5),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn round_ball_samples_stay_inside() {
        let b = kobayashi_ball(&Point::origin(2), 0.5).unwrap();
        let pts = sample_ball_uniform(&b, 10_000, 4).unwrap();
        assert!(pts.iter().all(|p| p.norm() < 0.5));
        assert!(sample_ball_uniform(&b, 0, 4).is_err());
    }

    #[test]
    fn samples_balanced_about_the_center() {
        let b = kobayashi_ball(&p1(0.6), 0.5).unwrap();
        let count = 20_000;
        let pts = sample_ball_uniform(&b, count, 8).unwrap();
        let c = b.center.coords()[0].re;
        let above = pts.iter().filter(|p| p.coords()[0].re > c).count() as f64 / count as f64;
        let sigma = (0.25 / count as f64).sqrt();
        assert!((above - 0.5).abs() < 3.0 * sigma, "{above}");
        assert!(pts.iter().all(|p| b.contains_metric(p)));
    }

    #[test]
    fn samples_pass_octant_chi_square() {
        // orthants of the real 2n coordinates about the center are equiprobable
        let b = kobayashi_ball(&Point::from_reals(&[0.3, 0.2, -0.4, 0.1]).unwrap(), 0.6).unwrap();
        let count = 32_000;
        let pts = b.sample(count, 21).unwrap();
        let e = b.axis.clone().unwrap();
        let e2 = Point::on_axis(2, 1, 1.0);
        let f = e2.sub(&e.scale_complex(e2.inner(&e)));
        let f = f.scale(1.0 / f.norm());
        let mut bins = [0usize; 16];
        for p in &pts {
            // coordinates in an orthonormal frame adapted to the ellipsoid
            let v = p.sub(&b.center);
            let alpha = v.inner(&e);
            let q = v.inner(&f);
            let idx = usize::from(alpha.re > 0.0)
                | usize::from(alpha.im > 0.0) << 1
                | usize::from(q.re > 0.0) << 2
                | usize::from(q.im > 0.0) << 3;
            bins[idx] += 1;
        }
        let expected = count as f64 / 16.0;
        let chi2: f64 = bins
            .iter()
            .map(|&o| (o as f64 - expected).powi(2) / expected)
            .sum();
        // χ²₁₅ 99th percentile
        assert!(chi2 < 30.58, "chi2 = {chi2}, bins = {bins:?}");
    }

    #[test]
    fn ball_inequality_by_hand() {
        // n=1, z0=0.6, z=0.7: LHS 0.64, RHS (0.96/4)(0.01+0.06)=0.0168
        let slack = ball_inequality_slack(&p1(0.6), 0.2, &p1(0.7));
        assert_abs_diff_eq!(slack, 0.64 - 0.0168, epsilon = 1e-12);
        let rep = check_lemma_ball_inequality(&Point::origin(2), 0.9, 2000, 1).unwrap();
        assert!(rep.pass);
    }

    #[test]
    fn membership_duality_on_random_balls() {
        let bases = sample_unit_ball(2, 200, 5).unwrap();
        let probes = sample_unit_ball(2, 200, 6).unwrap();
        let mut checked = 0;
        for (i, z0) in bases.iter().enumerate() {
            let r = 0.05 + 0.9 * (i as f64 / 200.0);
            let ball = kobayashi_ball(z0, r).unwrap();
            for z in &probes {
                let rho = pseudo_distance(z0, z).unwrap().pseudo;
                if (rho - r).abs() < 1e-9 {
                    continue;
                }
                assert_eq!(ball.contains(z), rho < r, "z0={z0} r={r} z={z}");
                checked += 1;
            }
        }
        assert!(checked > 39_000);
    }

    #[test]
    fn volume_sandwich_constants() {
        let rep = check_volume_sandwich(2, &[0.0, 0.5, 0.9, 0.99], &[0.1, 0.5, 0.9]).unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn ball_json_shape() {
        let b = kobayashi_ball(&p1(0.6), 0.5).unwrap();
        let json = serde_json::to_value(&b).unwrap();
        for key in ["base", "r", "center", "radial_axis", "transverse_axis"] {
            assert!(json.get(key).is_some(), "{key}");
        }
        let back: KobayashiBall = serde_json::from_value(json).unwrap();
        assert_eq!(back, b);
    }
}
