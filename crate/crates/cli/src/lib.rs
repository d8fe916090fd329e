//! Library side of the `weavefuse` binary, so tests can drive commands
//! without spawning processes.

pub mod args;
pub mod report;

use std::ffi::OsString;
use std::path::Path;
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use clap::error::ErrorKind;
use clap::Parser;
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use weavefuse::document::{FrameSpecDocument, Scalar};
use weavefuse::erasure::{scaling_experiment, simulate, sweep_cells, ErasureModel, Estimator};
use weavefuse::hilbert::{random_unitary, random_vector, FieldTag, Vector, C64};
use weavefuse::phase::{
    alpha_estimate, complement_property_of_pair, is_phase_retrievable, transport, Retrievability,
    SearchBudget,
};
use weavefuse::weaving::{is_weaving, universal_bounds, SigmaMode, SubsetSelector, WeavingPair, WeavingStatus};

use args::{CheckCommand, Cli, Command, Common, OutputFormat, SigmaModeArg, SimulateCommand, SweepCommand};
use report::{verdict_name, ReportBody, ReportDocument, Status, TransportSummary};

pub const USAGE_ERROR: i32 = 3;
const DEFAULT_SIGMA_SAMPLES: usize = 256;
const DEFAULT_ALPHA_SAMPLES: usize = 10_000;
const DEFAULT_TRIALS: usize = 10_000;
const TRANSPORT_TOL: f64 = 1e-9;

/// Everything a run produces. `stdout` holds the rendered report (or help
/// text); `stderr` holds diagnostics.
#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub report: Option<ReportDocument>,
    pub stdout: String,
    pub stderr: String,
}

pub fn run_command<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Outcome {
                    code: 0,
                    report: None,
                    stdout: text,
                    stderr: String::new(),
                },
                _ => Outcome {
                    code: USAGE_ERROR,
                    report: None,
                    stdout: String::new(),
                    stderr: text,
                },
            };
        }
    };
    let start = Instant::now();
    match execute(&cli) {
        Ok(mut report) => {
            report.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
            let stdout = match cli.common.output {
                OutputFormat::Json => report.to_json() + "\n",
                OutputFormat::Text => report.to_text(),
            };
            Outcome {
                code: report.exit_code,
                report: Some(report),
                stdout,
                stderr: String::new(),
            }
        }
        Err(e) => Outcome {
            code: USAGE_ERROR,
            report: None,
            stdout: String::new(),
            stderr: format!("error: {e:#}\n"),
        },
    }
}

struct Loaded {
    pair: WeavingPair,
    digest: String,
}

fn load(path: &Path) -> anyhow::Result<Loaded> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let text = std::str::from_utf8(&bytes).with_context(|| format!("{} is not UTF-8", path.display()))?;
    let pair = FrameSpecDocument::parse(text)
        .and_then(|d| d.to_pair())
        .with_context(|| format!("loading {}", path.display()))?;
    Ok(Loaded {
        pair,
        digest: hex::encode(Sha256::digest(&bytes)),
    })
}

fn sigma_mode(common: &Common) -> SigmaMode {
    match common.sigma_mode {
        SigmaModeArg::Exact => SigmaMode::Exact,
        SigmaModeArg::Sample => SigmaMode::Sampled {
            count: common.samples.unwrap_or(DEFAULT_SIGMA_SAMPLES),
            seed: common.seed,
        },
    }
}

fn budget(common: &Common) -> SearchBudget {
    SearchBudget {
        seed: common.seed,
        ..SearchBudget::default()
    }
}

/// `1,2`, `{1,2}` or empty; 1-based.
pub fn parse_sigma(text: &str, m: usize) -> anyhow::Result<SubsetSelector> {
    let inner = text.trim().trim_start_matches('{').trim_end_matches('}');
    let indices = inner
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<usize>().with_context(|| format!("bad subset index {s:?}")))
        .collect::<anyhow::Result<Vec<_>>>()?;
    Ok(SubsetSelector::from_indices(m, &indices)?)
}

fn parse_vector(text: &str, n: usize, field: FieldTag) -> anyhow::Result<Vector> {
    let values: Vec<Scalar> = serde_json::from_str(text).context("--vector must be a JSON array")?;
    if values.len() != n {
        bail!("--vector has {} entries, expected {n}", values.len());
    }
    let coords = nalgebra::DVector::from_iterator(
        n,
        values.iter().map(|s| match *s {
            Scalar::Real(x) => C64::new(x, 0.0),
            Scalar::Complex([re, im]) => C64::new(re, im),
        }),
    );
    Ok(Vector::from_coords(coords, field)?)
}

fn parse_estimator(text: &str, m: usize) -> anyhow::Result<Estimator> {
    match text {
        "halving" => Ok(Estimator::halving(m)),
        "corrected" => Ok(Estimator::Corrected),
        other => match other.strip_prefix("scale:") {
            Some(x) => Ok(Estimator::Averaging {
                scale: x.parse().with_context(|| format!("bad scale {x:?}"))?,
            }),
            None => bail!("unknown estimator {other:?}; use halving, corrected or scale:<x>"),
        },
    }
}

fn load_unitary(spec: &str, n: usize, field: FieldTag) -> anyhow::Result<DMatrix<C64>> {
    if let Some(seed) = spec.strip_prefix("random:") {
        let seed: u64 = seed.parse().with_context(|| format!("bad seed {seed:?}"))?;
        return Ok(random_unitary(n, field, &mut ChaCha8Rng::seed_from_u64(seed)));
    }
    let text = std::fs::read_to_string(spec).with_context(|| format!("reading {spec}"))?;
    let rows: Vec<Vec<Scalar>> = serde_json::from_str(&text).with_context(|| format!("parsing {spec}"))?;
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        bail!("unitary in {spec} must be {n} x {n}");
    }
    Ok(DMatrix::from_fn(n, n, |i, j| match rows[i][j] {
        Scalar::Real(x) => C64::new(x, 0.0),
        Scalar::Complex([re, im]) => C64::new(re, im),
    }))
}

fn args_digest(parts: &[String]) -> String {
    hex::encode(Sha256::digest(parts.join("\u{1f}").as_bytes()))
}

fn document(command: &str, digest: String, common: &Common, status: Status, body: ReportBody) -> ReportDocument {
    ReportDocument {
        command: command.to_string(),
        inputs_digest: digest,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: common.seed,
        wall_time_ms: 0.0,
        status,
        exit_code: status.exit_code(),
        notes: Vec::new(),
        body,
    }
}

fn phase_status(outcome: &Retrievability) -> Status {
    match outcome {
        Retrievability::Retrievable => Status::CertifiedTrue,
        Retrievability::NotRetrievable { .. } => Status::CertifiedFalse,
        Retrievability::Inconclusive { .. } => Status::Inconclusive,
    }
}

fn weaving_status(status: WeavingStatus) -> Status {
    match status {
        WeavingStatus::Weaving => Status::CertifiedTrue,
        WeavingStatus::NotWeaving => Status::CertifiedFalse,
        WeavingStatus::NoViolationFound => Status::Inconclusive,
    }
}

fn execute(cli: &Cli) -> anyhow::Result<ReportDocument> {
    let common = &cli.common;
    if !(common.tol > 0.0 && common.tol.is_finite()) {
        bail!("--tol must be a positive number");
    }
    match &cli.command {
        Command::Bounds { spec } => {
            let input = load(spec)?;
            let verdict = is_weaving(&input.pair, common.tol, sigma_mode(common))?;
            let status = weaving_status(verdict.status);
            Ok(document("bounds", input.digest, common, status, ReportBody::Bounds(verdict.report)))
        }
        Command::Check(CheckCommand::Weaving { spec }) => {
            let input = load(spec)?;
            let verdict = is_weaving(&input.pair, common.tol, sigma_mode(common))?;
            let status = weaving_status(verdict.status);
            Ok(document("check weaving", input.digest, common, status, ReportBody::Weaving(verdict)))
        }
        Command::Check(CheckCommand::Phase { spec }) => {
            let input = load(spec)?;
            let verdict = is_phase_retrievable(&input.pair, sigma_mode(common), &budget(common))?;
            let status = phase_status(&verdict.outcome);
            Ok(document("check phase", input.digest, common, status, ReportBody::Phase(verdict)))
        }
        Command::Check(CheckCommand::Complement { spec }) => {
            let input = load(spec)?;
            match complement_property_of_pair(&input.pair, common.tol) {
                Ok(report) => {
                    let status = if report.holds { Status::CertifiedTrue } else { Status::CertifiedFalse };
                    Ok(document("check complement", input.digest, common, status, ReportBody::Complement(report)))
                }
                Err(weavefuse::Error::NotOneDimensional { index, dim }) => {
                    let verdict = is_phase_retrievable(&input.pair, sigma_mode(common), &budget(common))?;
                    let status = phase_status(&verdict.outcome);
                    let mut doc = document("check complement", input.digest, common, status, ReportBody::Phase(verdict));
                    doc.notes.push(format!(
                        "member {} has dimension {dim}; the complement property applies to lines only, so the lift-kernel criterion was used",
                        index + 1
                    ));
                    Ok(doc)
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Alpha { spec, sigma } => {
            let input = load(spec)?;
            let sigma = parse_sigma(sigma, input.pair.len())?;
            let samples = common.samples.unwrap_or(DEFAULT_ALPHA_SAMPLES);
            let estimate = alpha_estimate(&input.pair, &sigma, samples, common.seed)?;
            // a sampled minimum only bounds the constant from above
            let status = if estimate.alpha_hat <= common.tol { Status::CertifiedFalse } else { Status::Inconclusive };
            let mut doc = document("alpha", input.digest, common, status, ReportBody::Alpha(estimate));
            doc.notes.push("alpha_hat is an upper estimate of the true constant".into());
            Ok(doc)
        }
        Command::Transport { spec, unitary } => {
            let input = load(spec)?;
            let q = load_unitary(unitary, input.pair.dim(), input.pair.field())?;
            let moved = transport(&input.pair, &q)?;
            let mode = sigma_mode(common);
            let bounds_before = universal_bounds(&input.pair, mode)?;
            let bounds_after = universal_bounds(&moved, mode)?;
            let verdict_before = is_phase_retrievable(&input.pair, mode, &budget(common))?.outcome;
            let verdict_after = is_phase_retrievable(&moved, mode, &budget(common))?.outcome;
            let same = (bounds_before.universal_lower - bounds_after.universal_lower).abs() <= TRANSPORT_TOL
                && (bounds_before.universal_upper - bounds_after.universal_upper).abs() <= TRANSPORT_TOL
                && verdict_name(&verdict_before) == verdict_name(&verdict_after);
            let status = if same { Status::CertifiedTrue } else { Status::CertifiedFalse };
            let summary = TransportSummary {
                unitary: (0..q.nrows())
                    .map(|i| (0..q.ncols()).map(|j| [q[(i, j)].re, q[(i, j)].im]).collect())
                    .collect(),
                bounds_before,
                bounds_after,
                verdict_before,
                verdict_after,
                transported: FrameSpecDocument::from_pair(&moved),
            };
            let digest = args_digest(&[input.digest, unitary.clone()]);
            Ok(document("transport", digest, common, status, ReportBody::Transport(Box::new(summary))))
        }
        Command::Simulate(SimulateCommand::Erasure(a)) => {
            let input = load(&a.spec)?;
            let (n, m, field) = (input.pair.dim(), input.pair.len(), input.pair.field());
            let sigma = parse_sigma(&a.sigma, m)?;
            let f = match &a.vector {
                Some(text) => parse_vector(text, n, field)?,
                None => {
                    let v = random_vector(&mut ChaCha8Rng::seed_from_u64(common.seed), n, field);
                    v.scaled(1.0 / v.norm())
                }
            };
            let estimator = parse_estimator(&a.estimator, m)?;
            let model = ErasureModel::new(a.keep_prob, common.seed)?;
            let trials = common.trials.unwrap_or(DEFAULT_TRIALS);
            let report = simulate(&input.pair, &sigma, &f, &model, estimator, trials)?;
            Ok(document("simulate erasure", input.digest, common, Status::Completed, ReportBody::Erasure(report)))
        }
        Command::Sweep(SweepCommand::Erasure(a)) => {
            if a.dims.is_empty() || a.m_factors.is_empty() {
                return Err(anyhow!("--dims and --m-factors must be non-empty"));
            }
            let trials = common.trials.unwrap_or(DEFAULT_TRIALS);
            let table = scaling_experiment(&sweep_cells(&a.dims, &a.m_factors), trials, common.seed)?;
            if let Some(path) = &a.csv {
                std::fs::write(path, table.to_csv()).with_context(|| format!("writing {}", path.display()))?;
            }
            let digest = args_digest(&[
                format!("{:?}", a.dims),
                format!("{:?}", a.m_factors),
                trials.to_string(),
            ]);
            Ok(document("sweep erasure", digest, common, Status::Completed, ReportBody::Sweep(table)))
        }
    }
}
