//! JSON experiment specifications.
//!
//! A spec names one operation plus whichever domain, measure or sequence it
//! consumes. Unknown keys are rejected and every schema error carries the
//! line and column of the offending input.

use std::path::{Path, PathBuf};

use carleson_core::domains::Domain;
use carleson_core::integrate::MCConfig;
use carleson_core::invariant::Backend;
use carleson_core::measures::{Measure, DEFAULT_DEPTH, DEFAULT_RADII};
use carleson_core::sequences::{EscapeExponent, EscapeWeight, Metric, PointSequence};
use carleson_core::Point;
use serde::{Deserialize, Serialize};

use crate::bundled;
use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Domain>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequence: Option<SequenceSpec>,
    pub operation: Operation,
    #[serde(default)]
    pub mc: MCConfig,
    #[serde(default)]
    pub output: OutputSpec,
}

fn default_name() -> String {
    "experiment".into()
}

/// `{"op": "...", ...parameters}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Operation {
    /// Geometry of `B(z₀, r)`; with a non-ball domain, the distance bounds
    /// and comparison checks at `z₀`.
    Ball {
        z0: Point,
        r: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        w: Option<Point>,
    },
    Berezin {
        #[serde(default = "default_probes")]
        probes: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        distances: Option<Vec<f64>>,
    },
    CarlesonTest {
        #[serde(default = "default_radii")]
        radii: Vec<f64>,
        #[serde(default = "default_depth")]
        depth: u32,
        #[serde(default = "default_family")]
        family_size: usize,
    },
    SeqAnalyze {
        #[serde(default = "default_seq_radius")]
        r: f64,
    },
    SeqDecompose {
        r: f64,
    },
    SeqEscape {
        #[serde(default = "default_weight")]
        h: EscapeWeight,
        #[serde(default = "default_exponent")]
        exponent: EscapeExponent,
        #[serde(default = "default_tail_tolerance")]
        tolerance: f64,
    },
    SeqShells {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        z0: Option<Point>,
    },
    Cover {
        epsilon: f64,
        r: f64,
        #[serde(default = "default_candidate_factor")]
        candidate_factor: f64,
        #[serde(default = "default_cover_probes")]
        probes: usize,
        #[serde(default = "default_refinement")]
        refinement: usize,
    },
    Ek {
        z0: Point,
        r: f64,
        #[serde(default)]
        backend: Backend,
    },
}

fn default_probes() -> usize {
    5
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
fn default_seq_radius() -> f64 {
    0.5
}
fn default_weight() -> EscapeWeight {
    EscapeWeight::None
}
fn default_exponent() -> EscapeExponent {
    EscapeExponent::NPlusOne
}
fn default_tail_tolerance() -> f64 {
    1e-6
}
fn default_candidate_factor() -> f64 {
    4.0
}
fn default_cover_probes() -> usize {
    10_000
}
fn default_refinement() -> usize {
    4
}

impl Operation {
    /// Tag used in JSON and as the subcommand path (`seq-decompose` is
    /// `seq decompose` on the command line).
    pub fn tag(&self) -> &'static str {
        match self {
            Operation::Ball { .. } => "ball",
            Operation::Berezin { .. } => "berezin",
            Operation::CarlesonTest { .. } => "carleson-test",
            Operation::SeqAnalyze { .. } => "seq-analyze",
            Operation::SeqDecompose { .. } => "seq-decompose",
            Operation::SeqEscape { .. } => "seq-escape",
            Operation::SeqShells { .. } => "seq-shells",
            Operation::Cover { .. } => "cover",
            Operation::Ek { .. } => "ek",
        }
    }

    fn needs(&self) -> Inputs {
        match self {
            Operation::Ball { .. } | Operation::Cover { .. } => Inputs::Domain,
            Operation::Berezin { .. } | Operation::CarlesonTest { .. } => Inputs::Measure,
            Operation::SeqAnalyze { .. }
            | Operation::SeqDecompose { .. }
            | Operation::SeqEscape { .. }
            | Operation::SeqShells { .. } => Inputs::Sequence,
            Operation::Ek { .. } => Inputs::Nothing,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Inputs {
    Domain,
    Measure,
    Sequence,
    Nothing,
}

/// `{"kind": ...}`: a named family or an explicit measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MeasureSpec {
    Lebesgue { n: usize },
    /// `(1 − ‖ζ‖²)^s dν`.
    Power { n: usize, s: f64 },
    /// `Σ d(z_j,∂B)^{n+1} δ_{z_j}` over a sequence.
    Dirac { sequence: SequenceSpec },
    Explicit { measure: Measure },
}

impl MeasureSpec {
    pub fn build(&self) -> CliResult<Measure> {
        Ok(match self {
            MeasureSpec::Lebesgue { n } => {
                positive_dim(*n)?;
                Measure::lebesgue(*n)
            }
            MeasureSpec::Power { n, s } => {
                positive_dim(*n)?;
                Measure::power(*n, *s)?
            }
            MeasureSpec::Dirac { sequence } => carleson_core::sequences::dirac_carleson_measure(&sequence.build()?)?,
            MeasureSpec::Explicit { measure } => measure.clone(),
        })
    }
}

/// `{"kind": ...}`: a generator, an explicit point list, a CSV file or a
/// bundled example.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SequenceSpec {
    /// `(1 − e^{−m})·e₁`, `m = 1..=m_max`.
    Ladder { n: usize, m_max: usize },
    Packing {
        n: usize,
        epsilon: f64,
        delta: f64,
        candidates: usize,
        seed: u64,
    },
    Lattice {
        n: usize,
        depth: usize,
        spacing: f64,
        jitter: f64,
        seed: u64,
    },
    Points {
        #[serde(default)]
        metric: Metric,
        points: Vec<Point>,
    },
    Csv {
        path: PathBuf,
        #[serde(default)]
        metric: Metric,
    },
    Bundled { name: String },
}

impl SequenceSpec {
    pub fn build(&self) -> CliResult<PointSequence> {
        Ok(match self {
            SequenceSpec::Ladder { n, m_max } => {
                positive_dim(*n)?;
                PointSequence::radial_ladder(&Point::on_axis(*n, 0, 1.0), *m_max)?
            }
            SequenceSpec::Packing {
                n,
                epsilon,
                delta,
                candidates,
                seed,
            } => PointSequence::maximal_packing(*n, *epsilon, *delta, *candidates, *seed)?,
            SequenceSpec::Lattice {
                n,
                depth,
                spacing,
                jitter,
                seed,
            } => PointSequence::perturbed_lattice(*n, *depth, *spacing, *jitter, *seed)?,
            SequenceSpec::Points { metric, points } => PointSequence::new(points.clone(), *metric)?,
            SequenceSpec::Csv { path, metric } => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Usage(format!("cannot read sequence file {}: {e}", path.display())))?;
                PointSequence::from_csv(&text, *metric)?
            }
            SequenceSpec::Bundled { name } => bundled::sequence(name)?,
        })
    }
}

fn positive_dim(n: usize) -> CliResult<()> {
    if n == 0 {
        return Err(CliError::Usage("dimension n must be at least 1".into()));
    }
    Ok(())
}

impl ExperimentSpec {
    /// Default spec for an operation tag, used when no `--spec` is given.
    pub fn default_for(tag: &str) -> CliResult<Self> {
        let (operation, domain, measure, sequence) = match tag {
            "ball" => (
                Operation::Ball {
                    z0: Point::on_axis(1, 0, 0.6),
                    r: 0.5,
                    w: None,
                },
                Some(Domain::ball(1)),
                None,
                None,
            ),
            "berezin" => (
                Operation::Berezin {
                    probes: default_probes(),
                    distances: None,
                },
                None,
                Some(MeasureSpec::Lebesgue { n: 1 }),
                None,
            ),
            "carleson-test" => (
                Operation::CarlesonTest {
                    radii: default_radii(),
                    depth: default_depth(),
                    family_size: default_family(),
                },
                None,
                Some(MeasureSpec::Lebesgue { n: 1 }),
                None,
            ),
            "seq-analyze" => (Operation::SeqAnalyze { r: default_seq_radius() }, None, None, Some(ladder())),
            "seq-decompose" => (
                Operation::SeqDecompose { r: 0.2 },
                None,
                None,
                Some(SequenceSpec::Bundled {
                    name: bundled::FOUR_POINT.into(),
                }),
            ),
            "seq-escape" => (
                Operation::SeqEscape {
                    h: default_weight(),
                    exponent: default_exponent(),
                    tolerance: default_tail_tolerance(),
                },
                None,
                None,
                Some(ladder()),
            ),
            "seq-shells" => (Operation::SeqShells { z0: None }, None, None, Some(ladder())),
            "cover" => (
                Operation::Cover {
                    epsilon: 0.1,
                    r: 0.5,
                    candidate_factor: default_candidate_factor(),
                    probes: default_cover_probes(),
                    refinement: default_refinement(),
                },
                Some(Domain::ball(1)),
                None,
                None,
            ),
            "ek" => (
                Operation::Ek {
                    z0: Point::origin(1),
                    r: 0.5,
                    backend: Backend::default(),
                },
                None,
                None,
                None,
            ),
            other => return Err(CliError::Usage(format!("unknown operation '{other}'"))),
        };
        Ok(Self {
            name: tag.to_string(),
            domain,
            measure,
            sequence,
            operation,
            mc: MCConfig::default(),
            output: OutputSpec::default(),
        })
    }

    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read spec {}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Parses and validates; errors read `origin:line:column: message`.
    pub fn parse(text: &str, origin: &str) -> CliResult<Self> {
        let spec: ExperimentSpec = serde_json::from_str(text).map_err(|e| CliError::Schema {
            origin: origin.to_string(),
            line: e.line(),
            column: e.column(),
            message: strip_position(&e.to_string()),
        })?;
        spec.validate().map_err(|(key, message)| {
            let (line, column) = locate_key(text, key);
            CliError::Schema {
                origin: origin.to_string(),
                line,
                column,
                message,
            }
        })?;
        Ok(spec)
    }

    /// Cross-field checks; the error names the key to anchor it.
    fn validate(&self) -> Result<(), (&'static str, String)> {
        let op = self.operation.tag();
        let need = self.operation.needs();
        let given = [
            ("domain", self.domain.is_some(), Inputs::Domain),
            ("measure", self.measure.is_some(), Inputs::Measure),
            ("sequence", self.sequence.is_some(), Inputs::Sequence),
        ];
        for (key, present, kind) in given {
            if present && need != kind {
                return Err((key, format!("field '{key}' is not used by operation '{op}'")));
            }
            if !present && need == kind && kind != Inputs::Domain {
                return Err(("operation", format!("operation '{op}' requires a '{key}' field")));
            }
        }
        self.mc.validate().map_err(|e| ("mc", e.to_string()))?;
        Ok(())
    }

    /// The domain, defaulting to the unit ball of the operation's dimension.
    pub fn domain_or_ball(&self, n: usize) -> Domain {
        self.domain.clone().unwrap_or_else(|| Domain::ball(n))
    }
}

fn ladder() -> SequenceSpec {
    SequenceSpec::Ladder { n: 1, m_max: 30 }
}

/// serde_json appends " at line L column C"; the prefix carries it instead.
fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

/// 1-based position of the first occurrence of `"key"`, or `(1, 1)`.
fn locate_key(text: &str, key: &str) -> (usize, usize) {
    let needle = format!("\"{key}\"");
    for (i, line) in text.lines().enumerate() {
        if let Some(c) = line.find(&needle) {
            return (i + 1, line[..c].chars().count() + 1);
        }
    }
    (1, 1)
}
