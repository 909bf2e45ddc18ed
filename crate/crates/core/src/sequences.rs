//! Uniformly discrete sequences in the unit ball: separation, counting,
//! first-fit decomposition, greedy coverings, induced Dirac measures and
//! escape-rate sums.
//!
//! Boundary distances are cached next to the points. Deep ladder points
//! `1 − e^{−m}` round to the sphere in `f64` once `m ≳ 37`; the cache keeps
//! `d(z,∂B) = e^{−m}` exact for weights, escape sums and radial distances.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ball::{automorphism_unchecked, distance_from_parts};
use crate::domains::Domain;
use crate::error::{ensure, Error, Result};
use crate::integrate::{derive_seed, stream_rng, StreamRng};
use crate::measures::{Measure, SlopeFit};
use crate::point::{neumaier, neumaier_prefix, Point};
use crate::report::CheckReport;

/// Above this many points separation uses spatially pruned neighbor queries.
pub const BRUTE_FORCE_LIMIT: usize = 10_000;

/// Number of trailing terms in the tail-Cauchy diagnostic.
pub const TAIL_TERMS: usize = 10;

/// Slack allowed on the shell-growth exponent `n`.
pub const SHELL_SLOPE_SLACK: f64 = 0.2;

/// Tolerance on `|(1 − ‖z‖) − d|` for supplied boundary distances.
const DISTANCE_CONSISTENCY: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Pseudohyperbolic,
    Kobayashi,
    Euclidean,
}

impl Metric {
    /// Pseudohyperbolic radius equivalent to `r` in this metric.
    fn pseudo_radius(self, r: f64) -> f64 {
        match self {
            Metric::Kobayashi => r.tanh(),
            _ => r,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointSequence {
    points: Vec<Point>,
    metric: Metric,
    distances: Vec<f64>,
    /// `1 − ‖z‖² = d(2 − d)`.
    co_norms: Vec<f64>,
}

impl PointSequence {
    /// Boundary distances `1 − ‖z‖` are computed from the points.
    pub fn new(points: Vec<Point>, metric: Metric) -> Result<Self> {
        let distances = points.iter().map(|p| 1.0 - p.norm()).collect();
        Self::with_distances(points, metric, distances)
    }

    pub fn with_distances(points: Vec<Point>, metric: Metric, distances: Vec<f64>) -> Result<Self> {
        ensure!(
            points.len() == distances.len(),
            Validation,
            "{} points but {} boundary distances",
            points.len(),
            distances.len()
        );
        if let Some(p) = points.first() {
            let n = p.dim();
            ensure!(points.iter().all(|q| q.dim() == n), Validation, "points have mixed dimensions");
        }
        if metric != Metric::Euclidean {
            for (p, &d) in points.iter().zip(&distances) {
                ensure!(d > 0.0 && d <= 1.0, Validation, "point {p} is not interior (d = {d})");
                let gap = ((1.0 - p.norm()) - d).abs();
                ensure!(
                    gap <= DISTANCE_CONSISTENCY,
                    Validation,
                    "boundary distance {d} inconsistent with point {p}"
                );
            }
        }
        let co_norms = distances.iter().map(|&d| d * (2.0 - d)).collect();
        Ok(Self {
            points,
            metric,
            distances,
            co_norms,
        })
    }

    /// `z_m = (1 − e^{−m})·u` for `m = 1..=m_max`, with `d = e^{−m}` cached.
    pub fn radial_ladder(u: &Point, m_max: usize) -> Result<Self> {
        ensure!(m_max >= 1, Parameter, "ladder needs at least one point");
        ensure!((u.norm() - 1.0).abs() < 1e-12, Parameter, "ladder direction must be a unit vector");
        let mut points = Vec::with_capacity(m_max);
        let mut distances = Vec::with_capacity(m_max);
        for m in 1..=m_max {
            let d = (-(m as f64)).exp();
            points.push(u.scale(1.0 - d));
            distances.push(d);
        }
        Self::with_distances(points, Metric::Pseudohyperbolic, distances)
    }

    /// Greedy δ-packing of `K_ε = {d ≥ ε}`: hyperbolically uniform random
    /// candidates are kept iff at pseudohyperbolic distance `≥ δ` from every
    /// kept point. Points are returned by increasing norm.
    pub fn maximal_packing(n: usize, epsilon: f64, delta: f64, candidates: usize, seed: u64) -> Result<Self> {
        ensure!(n >= 1, Parameter, "dimension must be positive");
        ensure!(epsilon > 0.0 && epsilon < 1.0, Parameter, "need 0 < ε < 1, got {epsilon}");
        ensure!(delta > 0.0 && delta < 1.0, Parameter, "need 0 < δ < 1, got {delta}");
        let mut rng = stream_rng(seed, 0);
        let law = HyperbolicLaw::new(n, 1.0 - epsilon);
        let cands: Vec<Point> = (0..candidates.max(1))
            .map(|_| {
                let u: Vec<f64> = (0..=2 * n).map(|_| rng.random::<f64>()).collect();
                law.map(&u)
            })
            .collect();
        let mut chosen = greedy_select(&cands, delta);
        // enumerate from the center outwards so partial sums follow an exhaustion
        chosen.sort_by(|&a, &b| cands[a].norm_sqr().total_cmp(&cands[b].norm_sqr()).then(a.cmp(&b)));
        Self::new(chosen.into_iter().map(|i| cands[i].clone()).collect(), Metric::Pseudohyperbolic)
    }

    /// One layer per Kobayashi shell: layer `m` sits at `k = (m + ½)/2` with
    /// about `sinh^{2n−1}k · cosh k / a^{2n−1}` points (exact angles for
    /// `n = 1`, quasi-random directions otherwise); each point is moved by
    /// `φ_z(ξ)` with `‖ξ‖ ≤ jitter`, i.e. by pseudohyperbolic distance at most
    /// `jitter`.
    pub fn perturbed_lattice(n: usize, depth: usize, spacing: f64, jitter: f64, seed: u64) -> Result<Self> {
        ensure!(n >= 1, Parameter, "dimension must be positive");
        ensure!(spacing > 0.0, Parameter, "spacing must be positive");
        ensure!((0.0..0.5).contains(&jitter), Parameter, "jitter must lie in [0, 0.5)");
        let mut rng = stream_rng(seed, 1);
        let mut qr = Kronecker::new(2 * n, derive_seed(seed, 2));
        let mut points = Vec::new();
        let mut distances = Vec::new();
        for m in 0..=depth {
            let k = (m as f64 + 0.5) / 2.0;
            let t = k.tanh();
            // 1 − tanh k = 2/(e^{2k} + 1)
            let d = 2.0 / ((2.0 * k).exp() + 1.0);
            let exponent = (2 * n - 1) as i32;
            let size = (k.sinh().powi(exponent) * k.cosh() * TAU / spacing.powi(exponent)).ceil() as usize;
            let size = size.max(1);
            let phase = rng.random::<f64>();
            for j in 0..size {
                let dir = if n == 1 {
                    vec![Complex64::from_polar(1.0, TAU * (j as f64 + phase) / size as f64)]
                } else {
                    gaussian_direction(n, &qr.next_point())
                };
                let z = Point::from_vec_unchecked(dir.into_iter().map(|c| c * t).collect());
                let (z, dz) = if jitter > 0.0 {
                    let xi = random_in_ball(n, jitter, &mut rng);
                    let w = automorphism_unchecked(&z, &xi);
                    let dw = 1.0 - w.norm();
                    (w, dw)
                } else {
                    (z, d)
                };
                points.push(z);
                distances.push(dz);
            }
        }
        Self::with_distances(points, Metric::Pseudohyperbolic, distances)
    }

    pub fn with_metric(mut self, metric: Metric) -> Result<Self> {
        if metric != Metric::Euclidean && self.metric == Metric::Euclidean {
            return Self::with_distances(self.points, metric, self.distances);
        }
        self.metric = metric;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> Option<usize> {
        self.points.first().map(Point::dim)
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn boundary_distances(&self) -> &[f64] {
        &self.distances
    }

    /// Distance between points `i` and `j` in the sequence metric.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.distance_to(&self.points[i], self.co_norms[i], j)
    }

    fn distance_to(&self, z: &Point, cz: f64, j: usize) -> f64 {
        let w = &self.points[j];
        match self.metric {
            Metric::Euclidean => z.distance(w),
            Metric::Pseudohyperbolic => distance_from_parts(z, cz, w, self.co_norms[j]).pseudo,
            Metric::Kobayashi => distance_from_parts(z, cz, w, self.co_norms[j]).kobayashi,
        }
    }

    /// Radial sort key with a lower bound on the metric from key gaps.
    fn radial_key(&self, i: usize) -> f64 {
        match self.metric {
            Metric::Euclidean => self.points[i].norm(),
            // artanh(1 − d) = ½ log((2 − d)/d)
            _ => 0.5 * ((2.0 - self.distances[i]) / self.distances[i]).ln(),
        }
    }

    /// Indices `j ≠ i` with `distance(i, j) < r`.
    fn neighbors(&self, tree: &KdTree, i: usize, r: f64, out: &mut Vec<usize>) {
        out.clear();
        let z = &self.points[i];
        let reach = match self.metric {
            Metric::Euclidean => r,
            m => euclidean_reach(self.co_norms[i], m.pseudo_radius(r), z.dim()),
        };
        let mut hits = Vec::new();
        tree.within(&z.to_reals(), reach, &mut hits);
        for j in hits {
            if j != i && self.distance(i, j) < r {
                out.push(j);
            }
        }
    }

    fn tree(&self) -> KdTree {
        KdTree::new(self.points.iter().map(Point::to_reals).collect())
    }

    /// CSV with header `re1,im1,…,d`; the last column holds the cached
    /// boundary distance.
    pub fn to_csv(&self) -> String {
        let n = self.dim().unwrap_or(1);
        let mut header: Vec<String> = (1..=n).flat_map(|j| [format!("re{j}"), format!("im{j}")]).collect();
        header.push("d".into());
        let mut out = header.join(",");
        out.push('\n');
        for (p, d) in self.points.iter().zip(&self.distances) {
            out.push_str(&format!("{},{:e}\n", p.to_csv_row(), d));
        }
        out
    }

    /// Reads CSV point files with an optional trailing `d` column.
    pub fn from_csv(text: &str, metric: Metric) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Validation("empty point file".into()))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        let has_d = cols.last() == Some(&"d");
        let reals = if has_d { cols.len() - 1 } else { cols.len() };
        ensure!(reals >= 2 && reals % 2 == 0, Validation, "header must list re/im column pairs");
        let mut points = Vec::new();
        let mut distances = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let cells: Vec<&str> = line.split(',').collect();
            ensure!(
                cells.len() == cols.len(),
                Validation,
                "line {}: expected {} columns, found {}",
                lineno + 2,
                cols.len(),
                cells.len()
            );
            let p = Point::from_csv_row(&cells[..reals].join(","))
                .map_err(|e| Error::Validation(format!("line {}: {e}", lineno + 2)))?;
            let d = if has_d {
                cells[reals]
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Validation(format!("line {}: {e}", lineno + 2)))?
            } else {
                1.0 - p.norm()
            };
            points.push(p);
            distances.push(d);
        }
        Self::with_distances(points, metric, distances)
    }
}

/// `inf_{i≠j} distance(z_i, z_j)`; exact pairwise up to
/// [`BRUTE_FORCE_LIMIT`] points, kd-tree pruned beyond (also exact).
pub fn separation_constant(g: &PointSequence) -> Result<f64> {
    separation_with_limit(g, BRUTE_FORCE_LIMIT)
}

fn separation_with_limit(g: &PointSequence, limit: usize) -> Result<f64> {
    ensure!(g.len() >= 2, Parameter, "separation needs at least two points, got {}", g.len());
    if g.len() <= limit {
        let best = (0..g.len())
            .into_par_iter()
            .map(|i| {
                ((i + 1)..g.len())
                    .map(|j| g.distance(i, j))
                    .fold(f64::INFINITY, f64::min)
            })
            .reduce(|| f64::INFINITY, f64::min);
        return Ok(best);
    }
    // Upper bound from radially adjacent pairs, then exact neighbor queries
    // inside the current best radius.
    let keys: Vec<f64> = (0..g.len()).map(|i| g.radial_key(i)).collect();
    let mut order: Vec<usize> = (0..g.len()).collect();
    order.sort_by(|&a, &b| keys[a].total_cmp(&keys[b]));
    let mut best = order
        .windows(2)
        .map(|w| g.distance(w[0], w[1]))
        .fold(f64::INFINITY, f64::min);
    if best == 0.0 {
        return Ok(0.0);
    }
    let tree = g.tree();
    let mut nb = Vec::new();
    for i in 0..g.len() {
        g.neighbors(&tree, i, best, &mut nb);
        for &j in &nb {
            best = best.min(g.distance(i, j));
        }
    }
    Ok(best)
}

/// `N(z₀, r, Γ)`: points at metric distance `< r` from `z₀`.
pub fn count_in_ball(g: &PointSequence, z0: &Point, r: f64) -> Result<usize> {
    if g.is_empty() {
        return Ok(0);
    }
    ensure!(Some(z0.dim()) == g.dim(), Parameter, "probe dimension differs from the sequence");
    if g.metric != Metric::Euclidean {
        ensure!(z0.norm() < 1.0, Domain, "probe {z0} is not interior");
    }
    let c0 = 1.0 - z0.norm_sqr();
    Ok((0..g.len()).filter(|&j| g.distance_to(z0, c0, j) < r).count())
}

/// `max` of [`count_in_ball`] over the given probe centers. Large sequences
/// are pruned with a kd-tree; counts are exact either way.
pub fn sup_count(g: &PointSequence, probes: &[Point], r: f64) -> Result<usize> {
    if g.len() <= 256 || probes.len() < 8 {
        return probes
            .par_iter()
            .map(|p| count_in_ball(g, p, r))
            .try_reduce(|| 0, |a, b| Ok(a.max(b)));
    }
    let tree = g.tree();
    probes
        .par_iter()
        .map(|z| {
            ensure!(Some(z.dim()) == g.dim(), Parameter, "probe dimension differs from the sequence");
            let cz = 1.0 - z.norm_sqr();
            let reach = match g.metric {
                Metric::Euclidean => r,
                m => {
                    ensure!(z.norm() < 1.0, Domain, "probe {z} is not interior");
                    euclidean_reach(cz, m.pseudo_radius(r), z.dim())
                }
            };
            let mut hits = Vec::new();
            tree.within(&z.to_reals(), reach, &mut hits);
            Ok(hits.into_iter().filter(|&j| g.distance_to(z, cz, j) < r).count())
        })
        .try_reduce(|| 0, |a, b| Ok(a.max(b)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub color_of: Vec<usize>,
    pub n_colors: usize,
    pub radius: f64,
}

impl Decomposition {
    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_colors];
        for (i, &c) in self.color_of.iter().enumerate() {
            out[c].push(i);
        }
        out
    }
}

/// First-fit coloring: each point takes the least color not used by an
/// earlier point at distance `< r`.
pub fn greedy_decompose(g: &PointSequence, r: f64) -> Result<Decomposition> {
    ensure!(r > 0.0 && r.is_finite(), Parameter, "radius must be positive, got {r}");
    if g.metric == Metric::Pseudohyperbolic {
        ensure!(r <= 1.0, Parameter, "pseudohyperbolic radius must be ≤ 1, got {r}");
    }
    let tree = g.tree();
    let mut color_of = vec![0usize; g.len()];
    let mut n_colors = 0;
    let mut nb = Vec::new();
    let mut used = Vec::new();
    for i in 0..g.len() {
        g.neighbors(&tree, i, r, &mut nb);
        used.clear();
        used.resize(n_colors + 1, false);
        for &j in nb.iter().filter(|&&j| j < i) {
            used[color_of[j]] = true;
        }
        let c = used.iter().position(|u| !u).expect("one slot is always free");
        color_of[i] = c;
        n_colors = n_colors.max(c + 1);
    }
    Ok(Decomposition {
        color_of,
        n_colors,
        radius: r,
    })
}

/// Brute-force check of a decomposition: every class is `r`-separated and
/// `n_colors ≤ max_j N(x_j, r, Γ)`.
pub fn check_decomposition(g: &PointSequence, dec: &Decomposition) -> Result<CheckReport> {
    ensure!(dec.color_of.len() == g.len(), Validation, "decomposition does not match the sequence");
    let mut min_sep = f64::INFINITY;
    for class in dec.classes() {
        for (a, &i) in class.iter().enumerate() {
            for &j in &class[a + 1..] {
                min_sep = min_sep.min(g.distance(i, j));
            }
        }
    }
    let max_count = (0..g.len())
        .into_par_iter()
        .map(|i| (0..g.len()).filter(|&j| g.distance(i, j) < dec.radius).count())
        .max()
        .unwrap_or(0);
    let pass = min_sep >= dec.radius && dec.n_colors <= max_count;
    Ok(CheckReport::new("decomposition", min_sep, dec.radius, pass, g.len())
        .with_extra("n_colors", dec.n_colors as f64)
        .with_extra("max_count", max_count as f64))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverOptions {
    /// Candidates per unit hyperbolic volume of a ball of radius half the
    /// covering margin.
    #[serde(default = "default_candidate_factor")]
    pub candidate_factor: f64,
    #[serde(default = "default_probes")]
    pub probes: usize,
    #[serde(default = "default_refinement")]
    pub refinement: usize,
}

fn default_candidate_factor() -> f64 {
    4.0
}

fn default_probes() -> usize {
    10_000
}

fn default_refinement() -> usize {
    4
}

impl Default for CoverOptions {
    fn default() -> Self {
        Self {
            candidate_factor: default_candidate_factor(),
            probes: default_probes(),
            refinement: default_refinement(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cover {
    pub centers: Vec<Point>,
    pub epsilon: f64,
    pub radius: f64,
    /// Radius `r/3` of the disjoint sub-balls.
    pub sub_radius: f64,
    /// `2s/(1 + s²)`: sub-balls of radius `s` are disjoint iff their centers
    /// are at least this far apart.
    pub disjoint_threshold: f64,
    pub candidates: usize,
    pub min_center_distance: f64,
    pub probes: usize,
    pub probes_covered: usize,
    pub multiplicity_radius: f64,
    pub max_multiplicity: usize,
    pub refined_probes: usize,
    pub refined_max_multiplicity: usize,
    pub stable: bool,
}

/// Covering of `K_ε` by balls `B(z_k, r)` whose `r/3`-sub-balls are pairwise
/// disjoint, selected greedily from a quasi-random candidate net.
///
/// Covering is certified on `probes` quasi-random points of `K_ε`; the
/// multiplicity at `R = (1 + r)/2` is reported on those probes and on a
/// nested set `refinement` times larger. Unit ball only.
pub fn greedy_cover(
    domain: &Domain,
    epsilon: f64,
    r: f64,
    candidate_seed: u64,
    options: &CoverOptions,
) -> Result<Cover> {
    ensure!(domain.is_ball(), Domain, "greedy covering is implemented for the unit ball only");
    ensure!(epsilon > 0.0 && epsilon < 1.0, Parameter, "K_ε is empty unless 0 < ε < 1, got {epsilon}");
    ensure!(r > 0.0 && r < 1.0, Parameter, "radius must lie in (0,1), got {r}");
    ensure!(options.probes >= 1 && options.refinement >= 1, Parameter, "need probes and refinement ≥ 1");
    ensure!(options.candidate_factor > 0.0, Parameter, "candidate factor must be positive");
    let n = domain.dim();
    let outer = 1.0 - epsilon;
    let s = r / 3.0;
    let threshold = 2.0 * s / (1.0 + s * s);
    let law = HyperbolicLaw::new(n, outer);

    let (centers, n_candidates) = if outer < r {
        (vec![Point::origin(n)], 1)
    } else {
        let margin = r.atanh() - 2.0 * s.atanh();
        let eta = (margin / 2.0).tanh();
        let cell = (eta * eta / (1.0 - eta * eta)).powi(n as i32);
        let count = (options.candidate_factor * law.total / cell).ceil();
        ensure!(count <= 5e7, Parameter, "candidate net of {count} points is too large; raise ε");
        let count = (count as usize).max(1000);
        let mut qr = Kronecker::new(2 * n + 1, candidate_seed);
        let cands: Vec<Point> = (0..count).map(|_| law.map(&qr.next_point())).collect();
        let chosen = greedy_select(&cands, threshold);
        (chosen.into_iter().map(|i| cands[i].clone()).collect(), count)
    };

    let seq = PointSequence::new(centers, Metric::Pseudohyperbolic)?;
    let tree = seq.tree();
    let min_center_distance = if seq.len() >= 2 {
        separation_constant(&seq)?
    } else {
        f64::INFINITY
    };

    let big_r = (1.0 + r) / 2.0;
    let total = options.probes * options.refinement;
    let mut qr = Kronecker::new(2 * n + 1, derive_seed(candidate_seed, 7));
    let probes: Vec<Point> = (0..total).map(|_| law.map(&qr.next_point())).collect();
    let stats: Vec<(bool, usize)> = probes
        .par_iter()
        .map(|p| {
            let cp = 1.0 - p.norm_sqr();
            let mut hits = Vec::new();
            tree.within(&p.to_reals(), euclidean_reach(cp, big_r, n), &mut hits);
            let mut covered = false;
            let mut mult = 0;
            for j in hits {
                let rho = seq.distance_to(p, cp, j);
                covered |= rho < r;
                mult += usize::from(rho < big_r);
            }
            (covered, mult)
        })
        .collect();
    let covered = stats[..options.probes].iter().filter(|s| s.0).count();
    let all_covered = stats.iter().filter(|s| s.0).count();
    if all_covered < total {
        return Err(Error::Analysis(format!(
            "candidate net too sparse: {} of {} probes of K_ε are not covered; \
             raise candidate_factor above {}",
            total - all_covered,
            total,
            options.candidate_factor
        )));
    }
    let max_multiplicity = stats[..options.probes].iter().map(|s| s.1).max().unwrap_or(0);
    let refined_max_multiplicity = stats.iter().map(|s| s.1).max().unwrap_or(0);
    Ok(Cover {
        centers: seq.points,
        epsilon,
        radius: r,
        sub_radius: s,
        disjoint_threshold: threshold,
        candidates: n_candidates,
        min_center_distance,
        probes: options.probes,
        probes_covered: covered,
        multiplicity_radius: big_r,
        max_multiplicity,
        refined_probes: total,
        refined_max_multiplicity,
        stable: refined_max_multiplicity <= max_multiplicity + 1,
    })
}

/// `Σ d(z_j, ∂B)^{n+1} δ_{z_j}`.
pub fn dirac_carleson_measure(g: &PointSequence) -> Result<Measure> {
    let n = g
        .dim()
        .ok_or_else(|| Error::Parameter("empty sequence induces the zero measure".into()))?;
    for (p, d) in g.points.iter().zip(&g.distances) {
        ensure!(
            p.norm() < 1.0,
            Domain,
            "point with d = {d:e} rounds onto the sphere; truncate the sequence"
        );
    }
    let weights = g.distances.iter().map(|d| d.powi(n as i32 + 1)).collect();
    Measure::dirac(g.points.clone(), weights)
}

/// Increasing weight `h` applied at `1/log(1/d)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum EscapeWeight {
    /// `h(x) = x^s`, `s > 0`.
    Power { s: f64 },
    /// `h(x) = e^{−1/x}`, so `h(1/log(1/d)) = d`.
    Exp,
    /// `h ≡ 1`.
    None,
}

impl EscapeWeight {
    pub fn h(&self, x: f64) -> f64 {
        match *self {
            EscapeWeight::Power { s } => x.powf(s),
            EscapeWeight::Exp => (-1.0 / x).exp(),
            EscapeWeight::None => 1.0,
        }
    }

    /// Parameter check plus a monotonicity spot-check on a grid.
    pub fn validate(&self) -> Result<()> {
        if let EscapeWeight::Power { s } = *self {
            ensure!(s.is_finite() && s > 0.0, Parameter, "power weight needs s > 0 to be increasing, got {s}");
        }
        let grid: Vec<f64> = (0..64).map(|i| 1e-3 * 1.25f64.powi(i)).collect();
        let increasing = grid.windows(2).all(|w| self.h(w[0]) <= self.h(w[1]));
        ensure!(increasing, Parameter, "escape weight {self:?} is not increasing");
        Ok(())
    }

    /// `h(1/log(1/d))` for `0 < d < 1`.
    fn at_distance(&self, d: f64) -> Result<f64> {
        if *self == EscapeWeight::None {
            return Ok(1.0);
        }
        ensure!(d > 0.0 && d < 1.0, Parameter, "weighted escape sums need 0 < d < 1, got {d}");
        let log_inv = -d.ln();
        Ok(match *self {
            EscapeWeight::Exp => d,
            _ => self.h(1.0 / log_inv),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EscapeExponent {
    N,
    NPlusOne,
    TwoN,
}

impl EscapeExponent {
    pub fn value(self, n: usize) -> i32 {
        match self {
            EscapeExponent::N => n as i32,
            EscapeExponent::NPlusOne => n as i32 + 1,
            EscapeExponent::TwoN => 2 * n as i32,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EscapeSeries {
    pub exponent: i32,
    pub partial_sums: Vec<f64>,
    pub total: f64,
    /// Sum of the last [`TAIL_TERMS`] terms.
    pub tail_increment: f64,
}

/// Partial sums of `Σ d(z_j,∂B)^e · h(1/log(1/d(z_j,∂B)))` in sequence order.
pub fn escape_sum(g: &PointSequence, h: EscapeWeight, exponent: EscapeExponent) -> Result<EscapeSeries> {
    h.validate()?;
    let e = exponent.value(g.dim().unwrap_or(1));
    let terms: Vec<f64> = g
        .distances
        .iter()
        .map(|&d| Ok(d.powi(e) * h.at_distance(d)?))
        .collect::<Result<_>>()?;
    let partial_sums = neumaier_prefix(terms.iter().copied());
    let total = partial_sums.last().copied().unwrap_or(0.0);
    let tail_increment = neumaier(terms[terms.len().saturating_sub(TAIL_TERMS)..].iter().copied());
    Ok(EscapeSeries {
        exponent: e,
        partial_sums,
        total,
        tail_increment,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShellCounts {
    pub z0: Point,
    /// `N_m = #{j : m/2 ≤ k(z₀, z_j) < (m+1)/2}`.
    pub counts: Vec<usize>,
}

impl ShellCounts {
    /// Least-squares slope of `log N_m` against `m` over nonempty shells in
    /// `m_min..=m_max`.
    pub fn fit(&self, m_min: usize, m_max: usize) -> Option<SlopeFit> {
        let pts: Vec<(f64, f64)> = self
            .counts
            .iter()
            .enumerate()
            .filter(|&(m, &c)| m >= m_min && m <= m_max && c > 0)
            .map(|(m, &c)| (m as f64, (c as f64).ln()))
            .collect();
        ols(&pts)
    }

    /// Fit over shells `2 ≤ m <` the outermost nonempty shell, which a
    /// truncated sequence fills only partially.
    pub fn default_fit(&self) -> Option<SlopeFit> {
        let last = self.counts.iter().rposition(|&c| c > 0)?;
        self.fit(2, last.checked_sub(1)?)
    }
}

pub fn shell_counts(g: &PointSequence, z0: &Point) -> Result<ShellCounts> {
    if let Some(n) = g.dim() {
        ensure!(z0.dim() == n, Parameter, "base point dimension differs from the sequence");
    }
    ensure!(z0.norm() < 1.0, Domain, "base point {z0} is not interior");
    ensure!(
        g.metric != Metric::Euclidean || g.points.iter().all(|p| p.norm() < 1.0),
        Domain,
        "shell counts need interior points"
    );
    let c0 = 1.0 - z0.norm_sqr();
    let shells: Vec<usize> = (0..g.len())
        .into_par_iter()
        .map(|j| {
            let k = distance_from_parts(z0, c0, &g.points[j], g.co_norms[j]).kobayashi;
            (2.0 * k).floor() as usize
        })
        .collect();
    let top = shells.iter().copied().max().map_or(0, |m| m + 1);
    let mut counts = vec![0; top];
    for m in shells {
        counts[m] += 1;
    }
    Ok(ShellCounts {
        z0: z0.clone(),
        counts,
    })
}

/// Shell growth `N_m ≲ e^{mn}`: the fitted slope must not exceed
/// `n + SHELL_SLOPE_SLACK`. Inconclusive when fewer than three shells fit.
pub fn check_shell_growth(g: &PointSequence, z0: &Point, fit: Option<SlopeFit>) -> Result<CheckReport> {
    let n = g
        .dim()
        .ok_or_else(|| Error::Parameter("shell growth needs a nonempty sequence".into()))?;
    let counts = shell_counts(g, z0)?;
    let fit = fit.or_else(|| counts.default_fit());
    let bound = n as f64 + SHELL_SLOPE_SLACK;
    let report = match fit {
        Some(f) => CheckReport::new("shell_growth", f.slope, bound, f.slope <= bound, g.len())
            .with_std_error(f.std_error)
            .with_extra("shells_fitted", f.points as f64),
        None => CheckReport::new("shell_growth", f64::NAN, bound, false, g.len()).inconclusive(),
    };
    Ok(report.with_extra("shells", counts.counts.len() as f64))
}

fn ols(pts: &[(f64, f64)]) -> Option<SlopeFit> {
    let m = pts.len();
    if m < 3 {
        return None;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m as f64;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m as f64;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx;
    let rss: f64 = pts.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum();
    Some(SlopeFit {
        slope,
        std_error: (rss / (m - 2) as f64 / sxx).sqrt(),
        points: m,
    })
}

/// Euclidean radius containing the pseudohyperbolic ball `B(z, δ)` given
/// `c = 1 − ‖z‖²`: the ellipsoid center offset plus its largest semi-axis.
fn euclidean_reach(c: f64, delta: f64, n: usize) -> f64 {
    if delta >= 1.0 {
        return 2.0;
    }
    let t = (1.0 - c).max(0.0).sqrt();
    let s = c / (1.0 - delta * delta * (1.0 - c));
    let axis = if n == 1 { delta * s } else { delta * s.sqrt() };
    (delta * delta * s * t + axis) * (1.0 + 1e-9) + 1e-12
}

/// Greedy selection in order: a candidate is kept iff every kept point lies
/// at pseudohyperbolic distance `≥ threshold`.
fn greedy_select(cands: &[Point], threshold: f64) -> Vec<usize> {
    let n = cands.first().map_or(1, Point::dim);
    let co: Vec<f64> = cands.iter().map(|p| 1.0 - p.norm_sqr()).collect();
    let mut kept: Vec<usize> = Vec::new();
    let mut forest = KdForest::default();
    let mut hits = Vec::new();
    for (i, z) in cands.iter().enumerate() {
        let reach = euclidean_reach(co[i], threshold, n);
        let zr = z.to_reals();
        forest.within(&zr, reach, &mut hits);
        let blocked = hits
            .iter()
            .any(|&j| distance_from_parts(z, co[i], &cands[j], co[j]).pseudo < threshold);
        if !blocked {
            kept.push(i);
            forest.insert(i, zr);
        }
    }
    kept
}

/// Insert-only spatial index: a small unindexed buffer plus kd-trees of
/// sizes `BUFFER·2^k`, merged like a binary counter.
#[derive(Default)]
struct KdForest {
    buffer: Vec<(usize, Vec<f64>)>,
    levels: Vec<Option<(Vec<usize>, KdTree)>>,
}

impl KdForest {
    const BUFFER: usize = 64;

    fn insert(&mut self, id: usize, p: Vec<f64>) {
        self.buffer.push((id, p));
        if self.buffer.len() < Self::BUFFER {
            return;
        }
        let (mut ids, mut pts): (Vec<usize>, Vec<Vec<f64>>) = self.buffer.drain(..).unzip();
        for level in self.levels.iter_mut() {
            match level.take() {
                None => {
                    *level = Some((ids, KdTree::new(pts)));
                    return;
                }
                Some((more_ids, tree)) => {
                    ids.extend(more_ids);
                    pts.extend(tree.pts);
                }
            }
        }
        self.levels.push(Some((ids, KdTree::new(pts))));
    }

    /// Ids of all inserted points within Euclidean distance `r` of `q`.
    fn within(&self, q: &[f64], r: f64, out: &mut Vec<usize>) {
        out.clear();
        let r2 = r * r;
        for (id, p) in &self.buffer {
            let d2: f64 = p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
            if d2 <= r2 {
                out.push(*id);
            }
        }
        let mut local = Vec::new();
        for (ids, tree) in self.levels.iter().flatten() {
            tree.within(q, r, &mut local);
            out.extend(local.iter().map(|&i| ids[i]));
        }
    }
}

/// Radial law of the invariant measure restricted to `‖z‖ ≤ outer`:
/// `κ(B(0,ρ)) = (ρ²/(1−ρ²))^n` is uniform.
struct HyperbolicLaw {
    n: usize,
    total: f64,
}

impl HyperbolicLaw {
    fn new(n: usize, outer: f64) -> Self {
        Self {
            n,
            total: (outer * outer / (1.0 - outer * outer)).powi(n as i32),
        }
    }

    /// Maps `u ∈ [0,1)^{2n+1}` to a point: `u₀` radial, the rest directional.
    fn map(&self, u: &[f64]) -> Point {
        let x = (u[0] * self.total).powf(1.0 / self.n as f64);
        let t = (x / (1.0 + x)).sqrt();
        let dir = gaussian_direction(self.n, &u[1..]);
        Point::from_vec_unchecked(dir.into_iter().map(|c| c * t).collect())
    }
}

/// Box–Muller on `2n` uniforms, normalized.
fn gaussian_direction(n: usize, u: &[f64]) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..n)
        .map(|j| {
            let radius = (-2.0 * (1.0 - u[2 * j]).ln()).sqrt();
            Complex64::from_polar(radius, TAU * u[2 * j + 1])
        })
        .collect();
    let norm = v.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
    if norm == 0.0 {
        v[0] = Complex64::new(1.0, 0.0);
        return v;
    }
    for c in &mut v {
        *c /= norm;
    }
    v
}

fn random_in_ball(n: usize, radius: f64, rng: &mut StreamRng) -> Point {
    let u: Vec<f64> = (0..2 * n).map(|_| rng.random::<f64>()).collect();
    let dir = gaussian_direction(n, &u);
    let t = radius * rng.random::<f64>().powf(1.0 / (2 * n) as f64);
    Point::from_vec_unchecked(dir.into_iter().map(|c| c * t).collect())
}

/// Additive recurrence `x_k = frac(shift + k·α)` with `α_j = φ_D^{−j}`,
/// `φ_D^{D+1} = φ_D + 1`; the shift is drawn from the seed.
struct Kronecker {
    alpha: Vec<f64>,
    state: Vec<f64>,
}

impl Kronecker {
    fn new(dim: usize, seed: u64) -> Self {
        let mut phi = 2.0f64;
        for _ in 0..64 {
            phi -= (phi.powi(dim as i32 + 1) - phi - 1.0) / ((dim as f64 + 1.0) * phi.powi(dim as i32) - 1.0);
        }
        let alpha = (1..=dim).map(|j| phi.powi(-(j as i32)).fract()).collect();
        let mut rng = stream_rng(seed, 0);
        let state = (0..dim).map(|_| rng.random::<f64>()).collect();
        Self { alpha, state }
    }

    fn next_point(&mut self) -> Vec<f64> {
        for (x, a) in self.state.iter_mut().zip(&self.alpha) {
            *x = (*x + a).fract();
        }
        self.state.clone()
    }
}

/// Static kd-tree over points of `ℝ^D` for radius queries.
struct KdTree {
    dim: usize,
    pts: Vec<Vec<f64>>,
    order: Vec<usize>,
    nodes: Vec<KdNode>,
}

enum KdNode {
    Leaf(usize, usize),
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

const KD_LEAF: usize = 16;

impl KdTree {
    fn new(pts: Vec<Vec<f64>>) -> Self {
        let dim = pts.first().map_or(0, Vec::len);
        let mut t = Self {
            dim,
            order: (0..pts.len()).collect(),
            pts,
            nodes: Vec::new(),
        };
        if !t.pts.is_empty() {
            t.build(0, t.pts.len());
        }
        t
    }

    fn build(&mut self, lo: usize, hi: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(KdNode::Leaf(lo, hi));
        if hi - lo <= KD_LEAF {
            return id;
        }
        let (mut axis, mut spread) = (0, 0.0);
        for a in 0..self.dim {
            let (mn, mx) = self.order[lo..hi]
                .iter()
                .map(|&i| self.pts[i][a])
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), x| (l.min(x), h.max(x)));
            if mx - mn > spread {
                spread = mx - mn;
                axis = a;
            }
        }
        if spread == 0.0 {
            return id;
        }
        let mid = (lo + hi) / 2;
        let pts = &self.pts;
        self.order[lo..hi].select_nth_unstable_by(mid - lo, |&a, &b| pts[a][axis].total_cmp(&pts[b][axis]));
        let value = self.pts[self.order[mid]][axis];
        let left = self.build(lo, mid);
        let right = self.build(mid, hi);
        self.nodes[id] = KdNode::Split {
            axis,
            value,
            left,
            right,
        };
        id
    }

    fn within(&self, q: &[f64], r: f64, out: &mut Vec<usize>) {
        out.clear();
        if self.nodes.is_empty() {
            return;
        }
        let r2 = r * r;
        let mut stack = vec![0];
        while let Some(id) = stack.pop() {
            match self.nodes[id] {
                KdNode::Leaf(lo, hi) => {
                    for &i in &self.order[lo..hi] {
                        let d2: f64 = self.pts[i].iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
                        if d2 <= r2 {
                            out.push(i);
                        }
                    }
                }
                KdNode::Split {
                    axis,
                    value,
                    left,
                    right,
                } => {
                    let diff = q[axis] - value;
                    if diff <= r {
                        stack.push(left);
                    }
                    if diff >= -r {
                        stack.push(right);
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn reals(v: &[f64]) -> Vec<Point> {
        v.iter().map(|&x| Point::on_axis(1, 0, x)).collect()
    }

    /// Disc oracle: `|a − b| / |1 − ab|` for real `a`, `b`.
    fn disc_rho(a: f64, b: f64) -> f64 {
        (a - b).abs() / (1.0 - a * b)
    }

    #[test]
    fn separation_examples() {
        let g = PointSequence::new(reals(&[0.0, 0.5]), Metric::Pseudohyperbolic).unwrap();
        assert_abs_diff_eq!(separation_constant(&g).unwrap(), 0.5, epsilon = 1e-15);
        let dup = PointSequence::new(reals(&[0.3, 0.3, 0.1]), Metric::Pseudohyperbolic).unwrap();
        assert_eq!(separation_constant(&dup).unwrap(), 0.0);
        let one = PointSequence::new(reals(&[0.3]), Metric::Pseudohyperbolic).unwrap();
        assert!(matches!(separation_constant(&one), Err(Error::Parameter(_))));
    }

    #[test]
    fn ladder_separation_against_pairwise_oracle() {
        let g = PointSequence::radial_ladder(&Point::on_axis(1, 0, 1.0), 10).unwrap();
        let xs: Vec<f64> = (1..=10).map(|m| 1.0 - (-(m as f64)).exp()).collect();
        let mut oracle = f64::INFINITY;
        for i in 0..10 {
            for j in i + 1..10 {
                oracle = oracle.min(disc_rho(xs[i], xs[j]));
            }
        }
        let sep = separation_constant(&g).unwrap();
        assert_abs_diff_eq!(sep, oracle, epsilon = 1e-12);
        assert_abs_diff_eq!(sep, 0.462132, epsilon = 1e-6);
        // consecutive pairs approach (e − 1)/(e + 1)
        let e = std::f64::consts::E;
        assert!(sep > (e - 1.0) / (e + 1.0));
    }

    #[test]
    fn pruned_separation_matches_brute_force() {
        for (n, depth, spacing) in [(1, 5, 0.3), (2, 3, 0.5)] {
            let g = PointSequence::perturbed_lattice(n, depth, spacing, 0.1, 3).unwrap();
            assert!(g.len() > 500, "{}", g.len());
            let fast = separation_with_limit(&g, 0).unwrap();
            let brute = separation_with_limit(&g, usize::MAX).unwrap();
            assert_eq!(fast, brute);
        }
        let dup = PointSequence::new(reals(&[0.3, 0.1, 0.3]), Metric::Pseudohyperbolic).unwrap();
        assert_eq!(separation_with_limit(&dup, 0).unwrap(), 0.0);
    }

    #[test]
    fn counting_examples() {
        let g = PointSequence::new(reals(&[0.0, 0.5]), Metric::Pseudohyperbolic).unwrap();
        assert_eq!(count_in_ball(&g, &Point::origin(1), 0.6).unwrap(), 2);
        assert_eq!(count_in_ball(&g, &Point::origin(1), 0.4).unwrap(), 1);
        let empty = PointSequence::new(Vec::new(), Metric::Pseudohyperbolic).unwrap();
        assert_eq!(count_in_ball(&empty, &Point::origin(1), 0.4).unwrap(), 0);
        let k = g.clone().with_metric(Metric::Kobayashi).unwrap();
        assert_eq!(count_in_ball(&k, &Point::origin(1), 0.6f64.atanh()).unwrap(), 2);
    }

    #[test]
    fn decomposition_hand_example() {
        let g = PointSequence::new(reals(&[0.0, 0.1, 1.0, 1.1]), Metric::Euclidean).unwrap();
        let dec = greedy_decompose(&g, 0.2).unwrap();
        assert_eq!(dec.n_colors, 2);
        assert_eq!(dec.classes(), vec![vec![0, 2], vec![1, 3]]);
        let rep = check_decomposition(&g, &dec).unwrap();
        assert!(rep.pass);
        assert!(rep.statistic >= 0.9);
    }

    #[test]
    fn separated_input_is_one_class() {
        let g = PointSequence::radial_ladder(&Point::on_axis(2, 1, 1.0), 12).unwrap();
        let dec = greedy_decompose(&g, 0.4).unwrap();
        assert_eq!(dec.n_colors, 1);
    }

    #[test]
    fn random_clouds_decompose_correctly() {
        for seed in 0..5 {
            let pts = crate::integrate::sample_unit_ball(2, 500, seed).unwrap();
            let g = PointSequence::new(pts, Metric::Pseudohyperbolic).unwrap();
            let dec = greedy_decompose(&g, 0.5).unwrap();
            assert!(dec.n_colors > 1);
            assert!(check_decomposition(&g, &dec).unwrap().pass);
        }
    }

    #[test]
    fn dirac_measure_weights() {
        let g = PointSequence::new(vec![Point::origin(3)], Metric::Pseudohyperbolic).unwrap();
        let mu = dirac_carleson_measure(&g).unwrap();
        assert_eq!(mu.atoms()[0].weight, 1.0);
        let ladder = PointSequence::radial_ladder(&Point::on_axis(1, 0, 1.0), 30).unwrap();
        let mu = dirac_carleson_measure(&ladder).unwrap();
        let e2 = std::f64::consts::E.powi(2);
        assert_abs_diff_eq!(mu.total_mass(), 1.0 / (e2 - 1.0), epsilon = 1e-12);
        let deep = PointSequence::radial_ladder(&Point::on_axis(1, 0, 1.0), 50).unwrap();
        assert!(matches!(dirac_carleson_measure(&deep), Err(Error::Domain(_))));
    }

    #[test]
    fn escape_sums() {
        let g = PointSequence::radial_ladder(&Point::on_axis(1, 0, 1.0), 50).unwrap();
        let li2 = escape_sum(&g, EscapeWeight::Power { s: 2.0 }, EscapeExponent::N).unwrap();
        // Li₂(1/e) = Σ e^{−m}/m², summed independently to convergence
        let oracle: f64 = (1..200).map(|m| (-(m as f64)).exp() / (m * m) as f64).sum();
        assert_abs_diff_eq!(li2.total, oracle, epsilon = 1e-15);
        assert_abs_diff_eq!(li2.total, 0.408754, epsilon = 1e-6);
        assert!(li2.partial_sums.windows(2).all(|w| w[0] <= w[1]));
        let mass = escape_sum(&g, EscapeWeight::None, EscapeExponent::NPlusOne).unwrap();
        let e2 = std::f64::consts::E.powi(2);
        assert_abs_diff_eq!(mass.total, 1.0 / (e2 - 1.0), epsilon = 1e-15);
        assert!(mass.tail_increment < 1e-6);
        // e^{−1/x} turns the exponent-n sum into the exponent-(n+1) sum
        let exp = escape_sum(&g, EscapeWeight::Exp, EscapeExponent::N).unwrap();
        assert_abs_diff_eq!(exp.total, mass.total, epsilon = 1e-15);
        assert!(EscapeWeight::Power { s: -1.0 }.validate().is_err());
        let origin = PointSequence::new(vec![Point::origin(1)], Metric::Pseudohyperbolic).unwrap();
        assert!(escape_sum(&origin, EscapeWeight::Exp, EscapeExponent::N).is_err());
        assert_eq!(escape_sum(&origin, EscapeWeight::None, EscapeExponent::TwoN).unwrap().total, 1.0);
    }

    #[test]
    fn ladder_shells_have_one_point_each() {
        let g = PointSequence::radial_ladder(&Point::on_axis(1, 0, 1.0), 40).unwrap();
        let sc = shell_counts(&g, &Point::origin(1)).unwrap();
        // k(0, z_m) = artanh(1 − e^{−m}) = ½ log(2e^m − 1)
        for (m, &c) in sc.counts.iter().enumerate() {
            let expected = (1..=40)
                .filter(|&j| (0.5 * (2.0 * (j as f64).exp() - 1.0).ln() * 2.0).floor() as usize == m)
                .count();
            assert_eq!(c, expected, "shell {m}");
        }
        assert!(sc.counts.iter().all(|&c| c <= 1));
        let fit = sc.default_fit().unwrap();
        assert!(fit.slope.abs() < 0.05, "{fit:?}");
        let rep = check_shell_growth(&g, &Point::origin(1), None).unwrap();
        assert!(rep.pass);
    }

    #[test]
    fn packing_shells_grow_like_e_to_the_mn() {
        let g = PointSequence::maximal_packing(1, 1e-3, 0.5, 60_000, 11).unwrap();
        assert!(separation_constant(&g).unwrap() >= 0.5);
        let sc = shell_counts(&g, &Point::origin(1)).unwrap();
        // shells m with tanh((m+1)/2) ≤ 1 − ε are complete: m ≤ 6
        let fit = sc.fit(2, 6).unwrap();
        assert!((fit.slope - 1.0).abs() < 0.2, "{fit:?} {:?}", sc.counts);
    }

    #[test]
    fn lattice_is_interior_and_layered() {
        let g = PointSequence::perturbed_lattice(2, 4, 0.6, 0.1, 5).unwrap();
        assert!(g.points().iter().all(|p| p.norm() < 1.0));
        let sc = shell_counts(&g, &Point::origin(2)).unwrap();
        assert_eq!(sc.counts.len(), 5);
        let fit = sc.fit(1, 4).unwrap();
        assert!(fit.slope <= 2.0 + SHELL_SLOPE_SLACK, "{fit:?}");
    }

    #[test]
    fn small_cover_is_the_origin() {
        let cover = greedy_cover(&Domain::ball(1), 0.6, 0.5, 1, &CoverOptions::default()).unwrap();
        assert_eq!(cover.centers, vec![Point::origin(1)]);
        assert_eq!(cover.probes_covered, cover.probes);
    }

    #[test]
    fn disc_cover() {
        let cover = greedy_cover(&Domain::ball(1), 0.1, 0.5, 3, &CoverOptions::default()).unwrap();
        assert_eq!(cover.probes_covered, 10_000);
        assert!(cover.min_center_distance >= cover.disjoint_threshold);
        assert!(cover.stable, "{} vs {}", cover.max_multiplicity, cover.refined_max_multiplicity);
        assert!(cover.centers.iter().all(|c| c.norm() <= 0.9 + 1e-12));
        assert!(greedy_cover(&Domain::ellipsoid(1, vec![1.0]).unwrap(), 0.1, 0.5, 3, &CoverOptions::default()).is_err());
    }

    #[test]
    fn sparse_net_is_reported() {
        let opts = CoverOptions {
            candidate_factor: 1e-4,
            ..CoverOptions::default()
        };
        match greedy_cover(&Domain::ball(1), 0.01, 0.5, 3, &opts) {
            Err(Error::Analysis(msg)) => assert!(msg.contains("candidate_factor")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn kd_tree_matches_linear_scan() {
        let mut rng = stream_rng(9, 0);
        let pts: Vec<Vec<f64>> = (0..2000).map(|_| (0..4).map(|_| rng.random::<f64>()).collect()).collect();
        let tree = KdTree::new(pts.clone());
        let mut out = Vec::new();
        for q in pts.iter().take(50) {
            tree.within(q, 0.2, &mut out);
            out.sort();
            let lin: Vec<usize> = (0..pts.len())
                .filter(|&i| pts[i].iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() <= 0.04)
                .collect();
            assert_eq!(out, lin);
        }
    }

    #[test]
    fn reach_contains_the_ball() {
        let mut rng = stream_rng(4, 0);
        for n in 1..=3 {
            for _ in 0..200 {
                let z = random_in_ball(n, 0.99, &mut rng);
                let delta = rng.random::<f64>() * 0.95;
                let ball = crate::ball::kobayashi_ball(&z, delta).unwrap();
                let reach = euclidean_reach(1.0 - z.norm_sqr(), delta, n);
                for w in ball.sample(20, rng.random()).unwrap() {
                    assert!(z.distance(&w) <= reach);
                }
            }
        }
    }

    #[test]
    fn pruned_sup_count_is_exact() {
        let pts = crate::integrate::sample_unit_ball(2, 600, 4).unwrap();
        let probes = crate::integrate::sample_unit_ball(2, 40, 5).unwrap();
        for metric in [Metric::Pseudohyperbolic, Metric::Kobayashi, Metric::Euclidean] {
            let g = PointSequence::new(pts.clone(), metric).unwrap();
            for r in [0.2, 0.5, 0.9] {
                let brute = probes.iter().map(|p| count_in_ball(&g, p, r).unwrap()).max().unwrap();
                assert_eq!(sup_count(&g, &probes, r).unwrap(), brute, "{metric:?} r={r}");
            }
        }
    }

    #[test]
    fn csv_round_trip() {
        let g = PointSequence::radial_ladder(&Point::on_axis(2, 0, 1.0), 40).unwrap();
        let back = PointSequence::from_csv(&g.to_csv(), Metric::Pseudohyperbolic).unwrap();
        assert_eq!(back.boundary_distances(), g.boundary_distances());
        let plain = PointSequence::from_csv("re1,im1\n0.5,0\n0,0.25\n", Metric::Pseudohyperbolic).unwrap();
        assert_eq!(plain.len(), 2);
        assert!(PointSequence::from_csv("re1,im1\n0.5\n", Metric::Pseudohyperbolic).is_err());
        assert!(PointSequence::from_csv("re1,im1\n1.5,0\n", Metric::Pseudohyperbolic).is_err());
    }
}
