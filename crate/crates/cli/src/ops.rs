//! One executor per operation. Each returns a plot-ready table, summary
//! fields and a verdict; nothing here touches the filesystem.

use carleson_core::ball::{
    ball_automorphism, check_lemma_ball_inequality, kobayashi_ball, mc_ball_volume, pseudo_distance,
    sample_ball_uniform,
};
use carleson_core::bergman::{berezin_transform, combine, kernel, normalized_kernel};
use carleson_core::domains::{
    boundary_distance, check_defining_fn_inequality, check_distance_comparison, estimate_boundary_constants,
    kobayashi_bounds, Domain,
};
use carleson_core::integrate::{derive_seed, sample_unit_ball, MCConfig};
use carleson_core::invariant::{check_shell_bounds, ek_ball_measure_exact, ek_ball_measure_with, Backend};
use carleson_core::measures::{
    cross_check_equivalence, fit_log_slope, series_verdict, verdict_csv, CarlesonConfig, CenterRow, REL_ERROR_LIMIT,
};
use carleson_core::sequences::{
    check_decomposition, check_shell_growth, dirac_carleson_measure, escape_sum, EscapeWeight, greedy_cover, greedy_decompose, separation_constant,
    shell_counts, sup_count, CoverOptions, EscapeExponent, Metric, PointSequence,
};
use carleson_core::{CheckReport, Point, Verdict};

use crate::error::{CliError, CliResult};
use crate::output::{num, Outcome, Table};
use crate::spec::{ExperimentSpec, Operation};

/// Standard errors allowed between an MC estimate and its closed form.
pub const SIGMA: f64 = 3.0;

pub fn execute(spec: &ExperimentSpec) -> CliResult<Outcome> {
    let mc = &spec.mc;
    match &spec.operation {
        Operation::Ball { z0, r, w } => {
            let domain = spec.domain_or_ball(z0.dim());
            same_dim(domain.dim(), z0.dim())?;
            if domain.is_ball() {
                ball(z0, *r, w.as_ref(), mc)
            } else {
                domain_geometry(&domain, z0, *r, w.as_ref(), mc)
            }
        }
        Operation::Berezin { probes, distances } => {
            let mu = required(&spec.measure, "measure")?.build()?;
            berezin(&mu, *probes, distances.as_deref(), mc)
        }
        Operation::CarlesonTest {
            radii,
            depth,
            family_size,
        } => {
            let mu = required(&spec.measure, "measure")?.build()?;
            let config = CarlesonConfig {
                radii: radii.clone(),
                depth: *depth,
                family_size: *family_size,
                mc: mc.clone(),
            };
            carleson(&mu, &config)
        }
        Operation::SeqAnalyze { r } => seq_analyze(&required(&spec.sequence, "sequence")?.build()?, *r),
        Operation::SeqDecompose { r } => seq_decompose(&required(&spec.sequence, "sequence")?.build()?, *r),
        Operation::SeqEscape { h, exponent, tolerance } => {
            let g = required(&spec.sequence, "sequence")?.build()?;
            let series = escape_sum(&g, *h, *exponent)?;
            let mut table = Table::new(&["index", "partial_sum"]);
            for (i, s) in series.partial_sums.iter().enumerate() {
                table.push(vec![(i + 1).to_string(), num(*s)]);
            }
            let verdict = Verdict::from_pass(series.tail_increment < *tolerance);
            Ok(Outcome::new(table, verdict)
                .with("exponent", series.exponent)
                .with("total", series.total)
                .with("tail_increment", series.tail_increment)
                .with("tolerance", tolerance))
        }
        Operation::SeqShells { z0 } => {
            let g = required(&spec.sequence, "sequence")?.build()?;
            let n = g.dim().ok_or_else(|| CliError::Usage("empty sequence".into()))?;
            let z0 = z0.clone().unwrap_or_else(|| Point::origin(n));
            let counts = shell_counts(&g, &z0)?;
            let report = check_shell_growth(&g, &z0, None)?;
            let mut table = Table::new(&["m", "count"]);
            for (m, c) in counts.counts.iter().enumerate() {
                table.push(vec![m.to_string(), c.to_string()]);
            }
            Ok(Outcome::new(table, report.verdict).with("shell_growth", &report))
        }
        Operation::Cover {
            epsilon,
            r,
            candidate_factor,
            probes,
            refinement,
        } => {
            let domain = spec.domain_or_ball(1);
            let options = CoverOptions {
                candidate_factor: *candidate_factor,
                probes: *probes,
                refinement: *refinement,
            };
            cover(&domain, *epsilon, *r, mc.seed, &options)
        }
        Operation::Ek { z0, r, backend } => ek(z0, *r, *backend, mc),
    }
}

fn required<'a, T>(value: &'a Option<T>, key: &str) -> CliResult<&'a T> {
    value
        .as_ref()
        .ok_or_else(|| CliError::Usage(format!("missing '{key}' field")))
}

fn same_dim(a: usize, b: usize) -> CliResult<()> {
    if a != b {
        return Err(CliError::Usage(format!("dimension mismatch: domain has n={a}, point has n={b}")));
    }
    Ok(())
}

fn quantity_table() -> Table {
    Table::new(&["quantity", "value", "std_error", "exact"])
}

fn quantity(table: &mut Table, name: &str, value: f64, std_error: f64, exact: Option<f64>) {
    table.push(vec![
        name.to_string(),
        num(value),
        num(std_error),
        exact.map_or_else(String::new, num),
    ]);
}

fn report_rows(table: &mut Table, r: &CheckReport) {
    quantity(table, &r.name, r.statistic, r.std_error, None);
    for (k, v) in &r.extras {
        quantity(table, &format!("{}.{k}", r.name), *v, 0.0, None);
    }
}

fn ball(z0: &Point, r: f64, w: Option<&Point>, mc: &MCConfig) -> CliResult<Outcome> {
    let n = z0.dim();
    let b = kobayashi_ball(z0, r)?;
    let exact = b.volume();
    let mut t = quantity_table();
    quantity(&mut t, "center_norm", b.center.norm(), 0.0, None);
    quantity(&mut t, "radial_axis", b.radial_axis, 0.0, None);
    quantity(&mut t, "transverse_axis", b.transverse_axis, 0.0, None);
    quantity(&mut t, "volume", exact, 0.0, Some(exact));

    let est = mc_ball_volume(&b, &mc.with_seed(derive_seed(mc.seed, 1)))?;
    quantity(&mut t, "volume_mc", est.value, est.std_error, Some(exact));
    // plain hit-or-miss over Bⁿ, reported for comparison only
    let pts = sample_unit_ball(n, mc.n_samples, derive_seed(mc.seed, 2))?;
    let p = pts.iter().filter(|z| b.contains(z)).count() as f64 / pts.len() as f64;
    quantity(&mut t, "volume_mc_unit_ball", p, (p * (1.0 - p) / pts.len() as f64).sqrt(), Some(exact));

    let samples = sample_ball_uniform(&b, mc.n_samples, derive_seed(mc.seed, 3))?;
    let inside = samples.iter().filter(|z| b.contains_metric(z)).count();
    quantity(&mut t, "samples_inside_fraction", inside as f64 / samples.len() as f64, 0.0, Some(1.0));
    let lemma = check_lemma_ball_inequality(z0, r, mc.n_samples, derive_seed(mc.seed, 4))?;
    quantity(&mut t, "ball_inequality_min_slack", lemma.statistic, 0.0, None);

    let mut verdict = Verdict::from_pass(est.within(exact, SIGMA) && inside == samples.len()).and(lemma.verdict);
    if let Some(w) = w {
        let d = pseudo_distance(z0, w)?;
        quantity(&mut t, "pseudo_distance", d.pseudo, 0.0, None);
        quantity(&mut t, "kobayashi_distance", d.kobayashi, 0.0, None);
        // φ_{z₀} moves z₀ to 0, so ‖φ_{z₀}(w)‖ = ρ(z₀, w)
        let image = ball_automorphism(z0, w)?;
        quantity(&mut t, "automorphism_image_norm", image.norm(), 0.0, Some(d.pseudo));
        verdict = verdict.and(Verdict::from_pass((image.norm() - d.pseudo).abs() < 1e-10));
    }
    Ok(Outcome::new(t, verdict)
        .with("volume", exact)
        .with("volume_mc", est)
        .with("ball", &b))
}

fn domain_geometry(domain: &Domain, z0: &Point, r: f64, w: Option<&Point>, mc: &MCConfig) -> CliResult<Outcome> {
    let mut t = quantity_table();
    let d0 = boundary_distance(domain, z0)?;
    quantity(&mut t, "boundary_distance", d0, 0.0, None);
    if let Some(w) = w {
        let b = kobayashi_bounds(domain, z0, w)?;
        quantity(&mut t, "kobayashi_lower", b.lower, 0.0, None);
        quantity(&mut t, "kobayashi_upper", b.upper, 0.0, None);
    }
    // probes march from z₀ to its nearest boundary point
    let (_, foot) = domain.nearest_boundary(z0)?;
    let foot = Point::from_reals(&foot)?;
    let probes: Vec<Point> = (1..=8)
        .map(|k| z0.add(&foot.sub(z0).scale(1.0 - 0.5f64.powi(k))))
        .collect();
    let constants = estimate_boundary_constants(domain, z0, &probes)?;
    quantity(&mut t, "c0", constants.c0, 0.0, None);
    quantity(&mut t, "C0", constants.big_c0, 0.0, None);
    let comparison = check_distance_comparison(domain, z0, r, mc.n_samples, derive_seed(mc.seed, 1))?;
    let defining = check_defining_fn_inequality(domain, z0, r, mc.n_samples, derive_seed(mc.seed, 2))?;
    report_rows(&mut t, &comparison);
    report_rows(&mut t, &defining);
    let verdict = combine(&[comparison.clone(), defining.clone()]);
    Ok(Outcome::new(t, verdict)
        .with("distance_comparison", &comparison)
        .with("defining_fn_inequality", &defining)
        .with("boundary_constants", [constants.c0, constants.big_c0]))
}

/// Probe distances `0.5·0.02^{k/(p−1)}`; five probes give 0.5 … 0.01.
fn probe_distances(probes: usize) -> Vec<f64> {
    if probes == 1 {
        return vec![0.5];
    }
    (0..probes)
        .map(|k| 0.5 * 0.02f64.powf(k as f64 / (probes - 1) as f64))
        .collect()
}

fn berezin(
    mu: &carleson_core::measures::Measure,
    probes: usize,
    distances: Option<&[f64]>,
    mc: &MCConfig,
) -> CliResult<Outcome> {
    let n = mu.dim();
    let ds = distances.map_or_else(|| probe_distances(probes.max(1)), <[f64]>::to_vec);
    if ds.iter().any(|&d| !(d > 0.0 && d <= 1.0)) {
        return Err(CliError::Usage("probe distances must lie in (0, 1]".into()));
    }
    let mut header = vec!["probe".to_string()];
    for j in 1..=n {
        header.push(format!("re{j}"));
        header.push(format!("im{j}"));
    }
    header.extend(["d", "kernel", "normalized_kernel_sqr", "value", "std_error"].map(String::from));
    let mut t = Table::new(&header);
    let mut rows = Vec::new();
    for (i, &d) in ds.iter().enumerate() {
        let z = Point::on_axis(n, 0, 1.0 - d);
        let est = berezin_transform(mu, &z, &mc.with_seed(derive_seed(mc.seed, i as u64)))?;
        let k = kernel(&z, &z)?.re;
        let kz = normalized_kernel(&z, &z)?.norm_sqr();
        let mut row = vec![i.to_string(), z.to_csv_row()];
        row.extend([num(d), num(k), num(kz), num(est.value), num(est.std_error)]);
        // the centre cell already holds 2n comma-separated reals; split it
        let row: Vec<String> = row.join(",").split(',').map(String::from).collect();
        t.push(row);
        rows.push(CenterRow {
            family: "radial".into(),
            center: z,
            d,
            value: est.value,
            std_error: est.std_error,
        });
    }
    let fit = fit_log_slope(&rows);
    let verdict = series_verdict(&rows, fit.as_ref(), REL_ERROR_LIMIT);
    Ok(Outcome::new(t, verdict).with("slope", fit.map(|f| f.slope)))
}

fn carleson(mu: &carleson_core::measures::Measure, config: &CarlesonConfig) -> CliResult<Outcome> {
    let v = cross_check_equivalence(mu, config)?;
    let csv_text = verdict_csv(&v)?;
    let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::Usage(e.to_string()))?
        .iter()
        .map(String::from)
        .collect();
    let mut t = Table::new(&header);
    for rec in reader.records() {
        let rec = rec.map_err(|e| CliError::Usage(e.to_string()))?;
        t.push(rec.iter().map(String::from).collect());
    }
    Ok(Outcome::new(t, v.verdict)
        .with("verdicts", &v.verdicts)
        .with("agreement", v.agreement)
        .with("berezin_sup", v.berezin_sup)
        .with("berezin_slope", v.berezin_slope)
        .with("ratio_sup", &v.ratio_sup)
        .with("ratio_slope", &v.ratio_slope)
        .with("functional_constant", v.functional_constant))
}

fn interior(g: &PointSequence) -> bool {
    g.metric() != Metric::Euclidean || g.points().iter().all(|p| p.norm() < 1.0)
}

fn seq_analyze(g: &PointSequence, r: f64) -> CliResult<Outcome> {
    let mut t = Table::new(&["quantity", "value"]);
    t.push(vec!["points".into(), g.len().to_string()]);
    let separation = if g.len() >= 2 { separation_constant(g)? } else { f64::INFINITY };
    t.push(vec!["separation".into(), num(separation)]);
    let max_count = sup_count(g, g.points(), r)?;
    t.push(vec![format!("max_count_r{r}"), max_count.to_string()]);
    let mut out = Outcome::new(Table::default(), Verdict::from_pass(separation > 0.0))
        .with("points", g.len())
        .with("separation", separation)
        .with("max_count", max_count);
    if interior(g) && !g.is_empty() {
        let mu = dirac_carleson_measure(g)?;
        let mass = escape_sum(g, EscapeWeight::None, EscapeExponent::NPlusOne)?;
        t.push(vec!["carleson_mass".into(), num(mu.total_mass())]);
        t.push(vec!["carleson_mass_tail".into(), num(mass.tail_increment)]);
        out = out.with("carleson_mass", mu.total_mass());
    }
    out.table = t;
    Ok(out)
}

fn seq_decompose(g: &PointSequence, r: f64) -> CliResult<Outcome> {
    let dec = greedy_decompose(g, r)?;
    let report = check_decomposition(g, &dec)?;
    let n = g.dim().unwrap_or(1);
    let mut header = vec!["index".to_string()];
    for j in 1..=n {
        header.push(format!("re{j}"));
        header.push(format!("im{j}"));
    }
    header.push("class".into());
    let mut t = Table::new(&header);
    for (i, (p, c)) in g.points().iter().zip(&dec.color_of).enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(p.to_reals().into_iter().map(num));
        row.push(c.to_string());
        t.push(row);
    }
    Ok(Outcome::new(t, report.verdict)
        .with("n_colors", dec.n_colors)
        .with("classes", dec.classes())
        .with("check", &report))
}

fn cover(domain: &Domain, epsilon: f64, r: f64, seed: u64, options: &CoverOptions) -> CliResult<Outcome> {
    let c = greedy_cover(domain, epsilon, r, seed, options)?;
    let n = domain.dim();
    let mut header = vec!["index".to_string()];
    for j in 1..=n {
        header.push(format!("re{j}"));
        header.push(format!("im{j}"));
    }
    let mut t = Table::new(&header);
    for (i, p) in c.centers.iter().enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(p.to_reals().into_iter().map(num));
        t.push(row);
    }
    let disjoint = c.centers.len() < 2 || c.min_center_distance >= c.disjoint_threshold;
    let verdict = Verdict::from_pass(c.probes_covered == c.probes && c.stable && disjoint);
    Ok(Outcome::new(t, verdict)
        .with("balls", c.centers.len())
        .with("candidates", c.candidates)
        .with("probes", c.probes)
        .with("probes_covered", c.probes_covered)
        .with("multiplicity_radius", c.multiplicity_radius)
        .with("max_multiplicity", c.max_multiplicity)
        .with("refined_probes", c.refined_probes)
        .with("refined_max_multiplicity", c.refined_max_multiplicity)
        .with("min_center_distance", c.min_center_distance)
        .with("disjoint_threshold", c.disjoint_threshold))
}

fn ek(z0: &Point, r: f64, backend: Backend, mc: &MCConfig) -> CliResult<Outcome> {
    let n = z0.dim();
    let mut t = quantity_table();
    quantity(&mut t, "density_at_center", backend.density(z0)?, 0.0, None);
    let est = ek_ball_measure_with(backend, z0, r, mc)?;
    let out = match backend {
        Backend::EisenmanKobayashi => {
            let exact = ek_ball_measure_exact(n, r)?;
            quantity(&mut t, "measure", est.value, est.std_error, Some(exact));
            let shells = check_shell_bounds(n, &[0.0, 0.5, 0.9], &[0.3, 0.6, 0.9], &mc.with_seed(derive_seed(mc.seed, 9)))?;
            report_rows(&mut t, &shells);
            let verdict = Verdict::from_pass(est.within(exact, SIGMA)).and(shells.verdict);
            Outcome::new(t, verdict).with("exact", exact).with("shell_bounds", &shells)
        }
        Backend::BoundaryDistance => {
            quantity(&mut t, "measure", est.value, est.std_error, None);
            Outcome::new(t, Verdict::from_pass(est.value.is_finite()))
        }
    };
    Ok(out.with("measure", est))
}
