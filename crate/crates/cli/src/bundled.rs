//! Bundled example sequences and the reference measure suite.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use carleson_core::measures::Measure;
use carleson_core::sequences::{dirac_carleson_measure, Metric, PointSequence};
use carleson_core::{Point, Verdict};

use crate::error::{CliError, CliResult};

/// `{0, 0.1, 1.0, 1.1}` on the real line with the Euclidean metric.
pub const FOUR_POINT: &str = "four-point";

/// Bundled sequences that are uniformly discrete in the ball.
pub const UNIFORMLY_DISCRETE: [&str; 6] = [
    "ladder-disc",
    "ladder-ball2",
    "packing-disc",
    "packing-ball2",
    "lattice-disc",
    "lattice-ball2",
];

/// Ladder length used wherever points must stay representable inside the
/// ball; `1 − e^{−m}` rounds to one in double precision from `m ≈ 37`.
pub const LADDER_LENGTH: usize = 30;

/// Bundled sequence by name. Generated once per process.
pub fn sequence(name: &str) -> CliResult<PointSequence> {
    static CACHE: OnceLock<Mutex<HashMap<String, PointSequence>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(g) = cache.lock().expect("cache lock").get(name) {
        return Ok(g.clone());
    }
    let g = generate(name)?;
    cache.lock().expect("cache lock").insert(name.to_string(), g.clone());
    Ok(g)
}

fn generate(name: &str) -> CliResult<PointSequence> {
    let ladder = |n: usize| PointSequence::radial_ladder(&Point::on_axis(n, 0, 1.0), LADDER_LENGTH);
    let seq = match name {
        FOUR_POINT => PointSequence::new(
            [0.0, 0.1, 1.0, 1.1].iter().map(|&x| Point::on_axis(1, 0, x)).collect(),
            Metric::Euclidean,
        ),
        "ladder-disc" => ladder(1),
        "ladder-ball2" => ladder(2),
        "packing-disc" => PointSequence::maximal_packing(1, 2e-4, 0.5, 400_000, 11),
        "packing-ball2" => PointSequence::maximal_packing(2, 4e-3, 0.5, 600_000, 11),
        "lattice-disc" => PointSequence::perturbed_lattice(1, 8, 0.5, 0.1, 5),
        "lattice-ball2" => PointSequence::perturbed_lattice(2, 5, 0.5, 0.1, 5),
        other => {
            return Err(CliError::Usage(format!(
                "unknown bundled sequence '{other}'; known: {FOUR_POINT}, {}",
                UNIFORMLY_DISCRETE.join(", ")
            )))
        }
    }?;
    Ok(seq)
}

/// Reference measures with the Carleson verdict each must receive:
/// `ν`, the Dirac sums of the bundled ladder and packing, and
/// `(1 − ‖ζ‖²)^s ν` for `s ∈ {−½, 0, ½, 1}`.
pub fn measure_suite(n: usize) -> CliResult<Vec<(String, Measure, Verdict)>> {
    let tag = if n == 1 { "disc" } else { "ball2" };
    let mut out = vec![("nu".to_string(), Measure::lebesgue(n), Verdict::Pass)];
    for kind in ["ladder", "packing"] {
        let g = sequence(&format!("{kind}-{tag}"))?;
        out.push((format!("dirac-{kind}"), dirac_carleson_measure(&g)?, Verdict::Pass));
    }
    for s in [-0.5, 0.0, 0.5, 1.0] {
        let expected = if s < 0.0 { Verdict::Fail } else { Verdict::Pass };
        out.push((format!("power{s}"), Measure::power(n, s)?, expected));
    }
    Ok(out)
}
