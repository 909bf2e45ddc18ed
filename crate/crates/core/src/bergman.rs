//! Bergman kernel of the unit ball and the Berezin transform.
//!
//! With `ν(Bⁿ) = 1` the kernel is `K(z,w) = (1 − ⟨z,w⟩)^{−(n+1)}`; it is
//! validated against the reproducing property rather than trusted.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::ball::{automorphism_unchecked, kobayashi_ball};
use crate::error::{ensure, Error, Result};
use crate::integrate::{
    derive_seed, estimate_mean, stream_rng, EstimateWithError, MCConfig, Sampler, ShellSampler,
    StreamRng,
};
use crate::measures::Measure;
use crate::point::Point;
use crate::report::{CheckReport, Verdict};

/// A kernel function `(z, w) ↦ K(z, w)`, used to inject alternatives in checks.
pub type KernelFn<'a> = &'a (dyn Fn(&Point, &Point) -> Result<Complex64> + Sync);

/// `|1 − ⟨z,w⟩|` below this is treated as boundary contact.
const CONTACT: f64 = 1e-150;

fn check_pair(z: &Point, w: &Point) -> Result<()> {
    ensure!(z.dim() == w.dim(), Parameter, "dimension mismatch: {} vs {}", z.dim(), w.dim());
    for p in [z, w] {
        ensure!(p.norm() <= 1.0, Domain, "{p} lies outside the unit ball");
    }
    Ok(())
}

/// `true` if `z` precedes `w` in the lexicographic order of their bits.
fn canonical(z: &Point, w: &Point) -> bool {
    let key = |p: &Point| {
        p.to_reals()
            .into_iter()
            .map(f64::to_bits)
            .collect::<Vec<_>>()
    };
    key(z) <= key(w)
}

fn kernel_raw(z: &Point, w: &Point) -> Result<Complex64> {
    let n = z.dim() as i32;
    let base = z.one_minus_inner(w);
    let size = base.norm();
    if size < CONTACT {
        return Err(Error::BoundaryContact(format!("1 − ⟨z,w⟩ vanishes at z = {z}, w = {w}")));
    }
    let value = base.inv().powi(n + 1);
    if !(value.re.is_finite() && value.im.is_finite()) {
        return Err(Error::BoundaryContact(format!("kernel overflows at z = {z}, w = {w}")));
    }
    Ok(value)
}

/// `K(z, w) = (1 − ⟨z,w⟩)^{−(n+1)}`; `K(w,z)` is the exact conjugate.
pub fn kernel(z: &Point, w: &Point) -> Result<Complex64> {
    check_pair(z, w)?;
    if canonical(z, w) {
        kernel_raw(z, w)
    } else {
        Ok(kernel_raw(w, z)?.conj())
    }
}

/// `K(z, z) = (1 − ‖z‖²)^{−(n+1)}`.
pub fn kernel_diagonal(z: &Point) -> Result<f64> {
    ensure!(z.norm() < 1.0, Domain, "{z} is not an interior point");
    let v = (1.0 - z.norm_sqr()).powi(-(z.dim() as i32 + 1));
    ensure!(v.is_finite(), BoundaryContact, "K(z,z) overflows at {z}");
    Ok(v)
}

/// `k_{z₀}(z) = K(z, z₀) / √K(z₀, z₀)`.
pub fn normalized_kernel(z0: &Point, z: &Point) -> Result<Complex64> {
    let diag = kernel_diagonal(z0)?;
    Ok(kernel(z, z0)? / diag.sqrt())
}

/// `|k_{z₀}(ζ)|² = (1−‖z₀‖²)^{n+1} / |1−⟨ζ,z₀⟩|^{2(n+1)}`, the Jacobian of
/// `φ_{z₀}` at `ζ`. No argument checks.
pub(crate) fn kernel_density(z0: &Point, zeta: &Point) -> f64 {
    let n = z0.dim() as i32;
    ((1.0 - z0.norm_sqr()) / zeta.one_minus_inner(z0).norm_sqr()).powi(n + 1)
}

/// `ν` pushed forward by `φ_z`; its density is `|k_z|²`.
struct PushForward<'a> {
    z: &'a Point,
}

impl Sampler for PushForward<'_> {
    fn dim(&self) -> usize {
        self.z.dim()
    }

    fn draw(&self, rng: &mut StreamRng) -> Point {
        let u = ShellSampler::unit_ball(self.z.dim()).draw(rng);
        automorphism_unchecked(self.z, &u)
    }
}

/// Equal mixture of two samplers.
pub(crate) struct Mixture<'a> {
    pub first: &'a dyn Sampler,
    pub second: &'a dyn Sampler,
}

impl Sampler for Mixture<'_> {
    fn dim(&self) -> usize {
        self.first.dim()
    }

    fn draw(&self, rng: &mut StreamRng) -> Point {
        if rng.random::<bool>() {
            self.first.draw(rng)
        } else {
            self.second.draw(rng)
        }
    }
}

/// `∫ |k_z(ζ)|² g(ζ) w(ζ) dν(ζ)` for each density term `w` of `mu`,
/// sampling from an equal mixture of the term's own law and `φ_z`-pushed
/// `ν` (a defensive importance sampler: the weight is bounded by both
/// `2·mass·|k_z|²` and `2w`).
pub(crate) fn density_kernel_integral<G>(
    mu: &Measure,
    z: &Point,
    g: G,
    cfg: &MCConfig,
) -> Result<EstimateWithError>
where
    G: Fn(&Point) -> f64 + Sync,
{
    let mut total = EstimateWithError::exact(0.0);
    let push = PushForward { z };
    for (i, term) in mu.densities().iter().enumerate() {
        let mass = term.mass(mu.dim());
        let own = term.sampler(mu.dim());
        let mix = Mixture {
            first: &own,
            second: &push,
        };
        let term_cfg = cfg.with_seed(derive_seed(cfg.seed, i as u64));
        let est = estimate_mean(
            &mix,
            |zeta| {
                let kz = kernel_density(z, zeta);
                let w = term.eval(zeta);
                let q = 0.5 * w / mass + 0.5 * kz;
                if q == 0.0 {
                    0.0
                } else {
                    kz * w * g(zeta) / q
                }
            },
            &term_cfg,
        )?;
        total = total.plus(&est);
    }
    Ok(total)
}

/// `Bμ(z) = ∫|k_z|² dμ`: atoms summed exactly, densities by importance sampling.
pub fn berezin_transform(mu: &Measure, z: &Point, cfg: &MCConfig) -> Result<EstimateWithError> {
    mu.validate()?;
    ensure!(z.dim() == mu.dim(), Parameter, "probe dimension {} ≠ measure dimension {}", z.dim(), mu.dim());
    ensure!(z.norm() < 1.0, Domain, "{z} is not an interior point");
    let atoms: f64 = crate::point::neumaier(
        mu.atoms()
            .iter()
            .map(|a| a.weight * kernel_density(z, &a.point)),
    );
    if mu.densities().is_empty() {
        return Ok(EstimateWithError::exact(atoms));
    }
    let dens = density_kernel_integral(mu, z, |_| 1.0, cfg)?;
    Ok(EstimateWithError {
        value: atoms + dens.value,
        ..dens
    })
}

/// Asserts `K(z,z)·d(z,∂)^{n+1} ≤ 1` on the grid; the statistic is the maximum.
pub fn check_kernel_upper(z_grid: &[Point]) -> Result<CheckReport> {
    ensure!(!z_grid.is_empty(), Parameter, "empty grid");
    let mut worst: f64 = 0.0;
    for z in z_grid {
        let d = 1.0 - z.norm();
        let product = kernel_diagonal(z)? * d.powi(z.dim() as i32 + 1);
        worst = worst.max(product);
    }
    Ok(CheckReport::bound_above("kernel_upper", worst, 1.0, z_grid.len()))
}

/// `((1−r)²(1+r)/16)^{n+1}`.
pub fn kernel_lower_bound(n: usize, r: f64) -> f64 {
    ((1.0 - r) * (1.0 - r) * (1.0 + r) / 16.0).powi(n as i32 + 1)
}

/// Minimum over samples `z ∈ B(z₀, r)` and grid points `z₀` of
/// `|k_{z₀}(z)|²·d(z₀,∂)^{n+1}`; passes iff it stays above [`kernel_lower_bound`].
pub fn check_kernel_lower(
    z0_grid: &[Point],
    r: f64,
    samples: usize,
    seed: u64,
) -> Result<CheckReport> {
    ensure!(!z0_grid.is_empty(), Parameter, "empty grid");
    let n = z0_grid[0].dim();
    let mut worst = f64::INFINITY;
    let mut violations = 0usize;
    let bound = kernel_lower_bound(n, r);
    for (i, z0) in z0_grid.iter().enumerate() {
        let ball = kobayashi_ball(z0, r)?;
        let d0 = 1.0 - z0.norm();
        for z in ball.sample(samples, derive_seed(seed, i as u64))? {
            let v = kernel_density(z0, &z) * d0.powi(n as i32 + 1);
            if v < bound {
                violations += 1;
            }
            worst = worst.min(v);
        }
    }
    let total = samples * z0_grid.len();
    Ok(CheckReport::bound_below("kernel_lower", worst, bound, total)
        .with_seed(seed)
        .with_extra("violations", violations as f64))
}

/// Polynomial `Σ c_α z^α` on `ℂⁿ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    pub n: usize,
    pub terms: Vec<(Vec<u32>, Complex64)>,
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

/// `‖z^α‖² = n!·α! / (n+|α|)!` in `L²(ν)`.
pub fn monomial_norm_sqr(n: usize, alpha: &[u32]) -> f64 {
    let total: u32 = alpha.iter().sum();
    let afact: f64 = alpha.iter().map(|&a| factorial(a)).product();
    factorial(n as u32) * afact / factorial(n as u32 + total)
}

/// Multi-indices of `n` variables with `|α| ≤ degree`.
pub fn multi_indices(n: usize, degree: u32) -> Vec<Vec<u32>> {
    fn rec(n: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for a in 0..=left {
            cur.push(a);
            rec(n, left - a, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, degree, &mut Vec::new(), &mut out);
    out.sort_by_key(|a| (a.iter().sum::<u32>(), a.clone()));
    out
}

pub fn monomial(z: &Point, alpha: &[u32]) -> Complex64 {
    z.coords()
        .iter()
        .zip(alpha)
        .map(|(c, &a)| c.powu(a))
        .product()
}

impl Polynomial {
    pub fn new(n: usize, terms: Vec<(Vec<u32>, Complex64)>) -> Result<Self> {
        ensure!(
            terms.iter().all(|(a, _)| a.len() == n),
            Parameter,
            "multi-index length must equal the dimension {n}"
        );
        Ok(Self { n, terms })
    }

    /// Complex Gaussian coefficients on every monomial of degree ≤ `degree`.
    pub fn random(n: usize, degree: u32, seed: u64) -> Self {
        let mut rng = stream_rng(seed, 0);
        let terms = multi_indices(n, degree)
            .into_iter()
            .map(|a| {
                let c = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
                (a, c)
            })
            .collect();
        Self { n, terms }
    }

    pub fn eval(&self, z: &Point) -> Complex64 {
        self.terms.iter().map(|(a, c)| c * monomial(z, a)).sum()
    }

    /// `‖f‖²` in `L²(ν)`; monomials are orthogonal.
    pub fn norm_sqr(&self) -> f64 {
        let mut acc: std::collections::BTreeMap<&Vec<u32>, Complex64> = Default::default();
        for (a, c) in &self.terms {
            *acc.entry(a).or_default() += c;
        }
        acc.iter()
            .map(|(a, c)| c.norm_sqr() * monomial_norm_sqr(self.n, a))
            .sum()
    }
}

/// Submean check for `χ ≥ 0` plurisubharmonic on `B(z₀, r)`:
/// `χ(z₀) ≤ 4^{n+1}/(r^{2n} d^{n+1}) ∫_B χ dν` (passes when the MC slack is
/// conclusive), and the fitted `χ(z₀)·ν(B) / ∫_B χ dν`.
pub fn check_submean<F>(chi: F, z0: &Point, r: f64, cfg: &MCConfig) -> Result<CheckReport>
where
    F: Fn(&Point) -> f64 + Sync,
{
    let ball = kobayashi_ball(z0, r)?;
    let n = z0.dim() as i32;
    let d = 1.0 - z0.norm();
    let vol = ball.volume();
    let integral = estimate_mean(&ball, &chi, cfg)?.scaled(vol);
    let at_center = chi(z0);
    let constant = 4f64.powi(n + 1) / (r.powi(2 * n) * d.powi(n + 1));
    let rhs = constant * integral.value;
    let slack = rhs - at_center;
    let rhs_error = constant * integral.std_error;
    let mut report = CheckReport::new("submean", at_center, rhs, slack >= 0.0, cfg.n_samples)
        .with_seed(cfg.seed)
        .with_std_error(rhs_error)
        .with_extra("integral", integral.value)
        .with_extra("ball_volume", vol);
    if integral.value > 0.0 {
        report = report.with_extra("fitted_constant", at_center * vol / integral.value);
    }
    if slack > 0.0 && rhs_error > 0.1 * slack {
        report = report.inconclusive();
    }
    if slack < 0.0 && rhs_error > 0.1 * slack.abs() {
        report = report.inconclusive();
    }
    Ok(report)
}

/// `|f|^p` for a polynomial.
pub fn poly_power(f: &Polynomial, p: f64) -> impl Fn(&Point) -> f64 + Sync + '_ {
    move |z| f.eval(z).norm().powf(p)
}

/// Complex MC estimate of `∫ K(z,ζ) ζ^α dν(ζ)` and its comparison with `z^α`.
pub fn check_reproducing(
    kernel: KernelFn<'_>,
    z: &Point,
    alpha: &[u32],
    cfg: &MCConfig,
) -> Result<CheckReport> {
    ensure!(alpha.len() == z.dim(), Parameter, "multi-index length must equal the dimension");
    let sampler = ShellSampler::unit_ball(z.dim());
    let value = |zeta: &Point| -> Complex64 {
        match kernel(z, zeta) {
            Ok(k) => k * monomial(zeta, alpha),
            Err(_) => Complex64::new(f64::NAN, f64::NAN),
        }
    };
    let re = estimate_mean(&sampler, |p| value(p).re, cfg)?;
    let im = estimate_mean(&sampler, |p| value(p).im, cfg)?;
    let target = monomial(z, alpha);
    let zr = re.z_score(target.re).abs();
    let zi = im.z_score(target.im).abs();
    let worst = zr.max(zi);
    let name = format!(
        "reproducing_z{}_a{}",
        z.to_csv_row(),
        alpha.iter().map(u32::to_string).collect::<Vec<_>>().join("")
    );
    Ok(CheckReport::bound_above(&name, worst, 3.0, cfg.n_samples)
        .with_seed(cfg.seed)
        .with_std_error(re.std_error.hypot(im.std_error))
        .with_extra("estimate_re", re.value)
        .with_extra("estimate_im", im.value)
        .with_extra("target_re", target.re)
        .with_extra("target_im", target.im))
}

/// Reproducing property over `|α| ≤ 2` at the standard probes
/// `{0, 0.3e₁, 0.5e_n}`; one report per (probe, α).
pub fn reproducing_suite(kernel: KernelFn<'_>, n: usize, cfg: &MCConfig) -> Result<Vec<CheckReport>> {
    let probes = [
        Point::origin(n),
        Point::on_axis(n, 0, 0.3),
        Point::on_axis(n, n - 1, 0.5),
    ];
    let mut out = Vec::new();
    for (i, z) in probes.iter().enumerate() {
        for (j, alpha) in multi_indices(n, 2).iter().enumerate() {
            let c = cfg.with_seed(derive_seed(cfg.seed, (i * 100 + j) as u64));
            out.push(check_reproducing(kernel, z, alpha, &c)?);
        }
    }
    Ok(out)
}

/// MC estimate of `∫ |K(z,ζ)|² dν(ζ)` against `K(z,z)`.
pub fn check_diagonal_identity(kernel: KernelFn<'_>, z: &Point, cfg: &MCConfig) -> Result<CheckReport> {
    let sampler = ShellSampler::unit_ball(z.dim());
    let est = estimate_mean(
        &sampler,
        |zeta| kernel(z, zeta).map_or(f64::NAN, |k| k.norm_sqr()),
        cfg,
    )?;
    let target = kernel(z, z)?.re;
    Ok(CheckReport::bound_above("diagonal_identity", est.z_score(target).abs(), 3.0, cfg.n_samples)
        .with_seed(cfg.seed)
        .with_std_error(est.std_error)
        .with_extra("estimate", est.value)
        .with_extra("target", target))
}

/// `∫ |k_z|² dν = 1` via the Berezin transform of `ν`.
pub fn check_normalization(z: &Point, cfg: &MCConfig) -> Result<CheckReport> {
    let est = berezin_transform(&Measure::lebesgue(z.dim()), z, cfg)?;
    Ok(CheckReport::bound_above("kernel_normalization", est.z_score(1.0).abs(), 3.0, cfg.n_samples)
        .with_seed(cfg.seed)
        .with_std_error(est.std_error)
        .with_extra("estimate", est.value))
}

/// Verdict of a family of reports: fail dominates, then inconclusive.
pub fn combine(reports: &[CheckReport]) -> Verdict {
    reports
        .iter()
        .fold(Verdict::Pass, |acc, r| acc.and(r.verdict))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::sample_unit_ball;
    use approx::assert_abs_diff_eq;

    #[test]
    fn kernel_at_origin_is_one() {
        let z = Point::from_reals(&[0.3, 0.1, -0.2, 0.5]).unwrap();
        assert_eq!(kernel(&z, &Point::origin(2)).unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(normalized_kernel(&Point::origin(2), &z).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn kernel_diagonal_value() {
        let z = Point::on_axis(1, 0, 0.6);
        assert_abs_diff_eq!(kernel(&z, &z).unwrap().re, 2.441406, epsilon = 1e-6);
        assert_abs_diff_eq!(normalized_kernel(&z, &z).unwrap().norm_sqr(), 2.441406, epsilon = 1e-6);
    }

    #[test]
    fn hermitian_symmetry_is_bit_exact() {
        let pts = sample_unit_ball(3, 200, 2).unwrap();
        for w in pts.windows(2) {
            let a = kernel(&w[0], &w[1]).unwrap();
            let b = kernel(&w[1], &w[0]).unwrap();
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), (-b.im).to_bits());
        }
    }

    #[test]
    fn boundary_contact_is_an_error() {
        let e = Point::on_axis(2, 0, 1.0);
        assert!(matches!(kernel(&e, &e), Err(Error::BoundaryContact(_))));
        assert!(matches!(kernel(&Point::on_axis(1, 0, 1.5), &e.clone()), Err(_)));
    }

    #[test]
    fn berezin_of_lebesgue_is_one() {
        let cfg = MCConfig::new(4, 20_000);
        for t in [0.0, 0.5, 0.9, 0.99] {
            let est = berezin_transform(&Measure::lebesgue(2), &Point::on_axis(2, 0, t), &cfg).unwrap();
            assert!(est.within(1.0, 3.0), "{t}: {est:?}");
        }
    }

    #[test]
    fn berezin_of_dirac_at_origin() {
        let mu = Measure::dirac(vec![Point::origin(1)], vec![1.0]).unwrap();
        let est = berezin_transform(&mu, &Point::on_axis(1, 0, 0.6), &MCConfig::default()).unwrap();
        assert_eq!(est.std_error, 0.0);
        assert_abs_diff_eq!(est.value, 0.4096, epsilon = 1e-12);
    }

    #[test]
    fn berezin_of_power_density_at_origin() {
        let mu = Measure::power(1, 1.0).unwrap();
        let est = berezin_transform(&mu, &Point::origin(1), &MCConfig::new(8, 50_000)).unwrap();
        assert!(est.within(0.5, 3.0), "{est:?}");
    }

    #[test]
    fn berezin_rejects_negative_atoms() {
        assert!(matches!(
            Measure::dirac(vec![Point::origin(1)], vec![-1.0]),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn kernel_upper_product_closed_form() {
        let grid: Vec<Point> = (0..1000).map(|i| Point::on_axis(1, 0, i as f64 / 1000.0)).collect();
        for z in &grid {
            let d = 1.0 - z.norm();
            let product = kernel_diagonal(z).unwrap() * d * d;
            assert_abs_diff_eq!(product, (1.0 + z.norm()).powi(-2), epsilon = 1e-12);
        }
        let rep = check_kernel_upper(&grid).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.statistic, 1.0);
        let p = kernel_diagonal(&Point::on_axis(1, 0, 0.9)).unwrap() * 0.1f64.powi(2);
        assert_abs_diff_eq!(p, 0.277, epsilon = 1e-3);
    }

    #[test]
    fn kernel_lower_examples() {
        assert_abs_diff_eq!(kernel_lower_bound(1, 0.5), 0.000549, epsilon = 1e-6);
        let rep = check_kernel_lower(&[Point::origin(2)], 0.7, 500, 1).unwrap();
        assert_eq!(rep.statistic, 1.0);
        let grid: Vec<Point> = [0.5, 0.9, 0.99, 0.999].iter().map(|&t| Point::on_axis(1, 0, t)).collect();
        let rep = check_kernel_lower(&grid, 0.5, 2000, 3).unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn monomial_norms() {
        // n=1: ‖z^k‖² = 1/(k+1)
        assert_abs_diff_eq!(monomial_norm_sqr(1, &[3]), 0.25, epsilon = 1e-15);
        // n=2: ‖z₁z₂‖² = 2·1·1/4! = 1/12
        assert_abs_diff_eq!(monomial_norm_sqr(2, &[1, 1]), 1.0 / 12.0, epsilon = 1e-15);
        assert_eq!(multi_indices(2, 2).len(), 6);
    }

    #[test]
    fn polynomial_norm_matches_mc() {
        let f = Polynomial::random(2, 2, 5);
        let sampler = ShellSampler::unit_ball(2);
        let est = estimate_mean(&sampler, |z| f.eval(z).norm_sqr(), &MCConfig::new(1, 100_000)).unwrap();
        assert!(est.within(f.norm_sqr(), 3.0), "{est:?} vs {}", f.norm_sqr());
    }

    #[test]
    fn submean_examples() {
        let cfg = MCConfig::new(2, 20_000);
        let one = check_submean(|_| 1.0, &Point::on_axis(2, 0, 0.7), 0.5, &cfg).unwrap();
        assert!(one.pass);
        let f = Polynomial::new(1, vec![(vec![1], Complex64::new(1.0, 0.0))]).unwrap();
        let rep = check_submean(poly_power(&f, 2.0), &Point::origin(1), 0.5, &cfg).unwrap();
        assert_eq!(rep.statistic, 0.0);
        assert!(rep.pass);
        let g = Polynomial::new(
            1,
            vec![(vec![0], Complex64::new(1.0, 0.0)), (vec![1], Complex64::new(1.0, 0.0))],
        )
        .unwrap();
        let rep = check_submean(poly_power(&g, 2.0), &Point::on_axis(1, 0, 0.3), 0.5, &MCConfig::new(3, 100_000))
            .unwrap();
        assert!(rep.pass && rep.verdict == Verdict::Pass, "{rep:?}");
        // disc average of |1+z|² is |1+c|² + R²/2 with c, R the Euclidean center and radius
        let (z0, r) = (0.3f64, 0.5f64);
        let c = (1.0 - r * r) * z0 / (1.0 - r * r * z0 * z0);
        let big_r = r * (1.0 - z0 * z0) / (1.0 - r * r * z0 * z0);
        let avg = (1.0 + c).powi(2) + big_r * big_r / 2.0;
        let fitted = rep.extra("fitted_constant").unwrap();
        assert!((fitted - 1.69 / avg).abs() < 0.01, "{fitted} vs {}", 1.69 / avg);
    }

    #[test]
    fn reproducing_property_and_its_mutation() {
        let cfg = MCConfig::new(6, 50_000);
        let good = reproducing_suite(&kernel, 2, &cfg).unwrap();
        assert_eq!(combine(&good), Verdict::Pass, "{good:?}");
        let flipped = |z: &Point, w: &Point| kernel(z, &w.neg());
        let bad = reproducing_suite(&flipped, 2, &cfg).unwrap();
        assert_eq!(combine(&bad), Verdict::Fail);
    }

    #[test]
    fn diagonal_identity_and_normalization() {
        let cfg = MCConfig::new(7, 100_000);
        let z = Point::on_axis(2, 0, 0.5);
        assert!(check_diagonal_identity(&kernel, &z, &cfg).unwrap().pass);
        assert!(check_normalization(&z, &cfg).unwrap().pass);
    }
}
