//! Experiment execution: dispatch by kind, deterministic result
//! emission, and the atomic run-directory protocol.
//!
//! A run stages everything in a hidden temporary directory next to the
//! requested output directory and renames it into place only after the
//! manifest is finalized, so a failed or interrupted run never leaves a
//! partial output directory behind. All output bytes are a pure function
//! of the configuration and seed; wall-clock timestamps appear only in
//! the manifest, which is excluded from its own checksum table.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;

use snls_core::dynamics::{nls_solve, snls_solve, SimConfig};
use snls_core::error::CoreError;
use snls_core::field::TorusField;
use snls_core::lab::{
    quintic_estimate_check_on, strichartz_check_on, trilinear_uff_check_on, trilinear_uuu_check_on,
    FitReport, UffVariant,
};
use snls_core::lattice::{bracket_pow, FrequencyLattice};
use snls_core::noise::{
    build_noise_operator, psi_regularity_stats, sample_psi, NoiseOperator, NoiseStream, StatParams,
};
use snls_core::norms::{
    l2_mixed_norm, m_norm, mixed_norm, sobolev_norm, square_function_norm, xtilde_norm, y_norm,
    z_norm, NormValue,
};
use snls_core::path::SpaceTimePath;
use snls_core::rng::{CounterRng, StreamKey};
use snls_core::windows::interval_partition;

use crate::config::{
    DataSection, EstimateCheck, EstimatesSection, ExperimentConfig, ExperimentKind,
};
use crate::manifest::{sha256_hex, RunManifest, MANIFEST_FILE};

/// Schema tags stamped on every emitted record.
pub const SCHEMA_FIT_REPORT: &str = "snls.fit-report.v1";
pub const SCHEMA_MOMENT_REPORT: &str = "snls.moment-report.v1";
pub const SCHEMA_OPERATOR_SIZE: &str = "snls.operator-size.v1";
pub const SCHEMA_NORM_VALUE: &str = "snls.norm-value.v1";
pub const SCHEMA_WINDOW_PLAN: &str = "snls.window-plan.v1";

/// Failures of a run, split by the exit code they map to.
#[derive(Debug)]
pub enum HarnessError {
    /// Configuration, environment, or I/O problems (exit code 2). Every
    /// element is one reportable problem.
    Invalid(Vec<String>),
    /// The computation itself aborted: blow-up, non-finite values, or an
    /// exhausted adaptive search (exit code 3).
    Numerical(String),
}

impl fmt::Display for HarnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HarnessError::Invalid(problems) => {
                write!(f, "invalid run: {}", problems.join("; "))
            }
            HarnessError::Numerical(msg) => write!(f, "numerical abort: {msg}"),
        }
    }
}

impl std::error::Error for HarnessError {}

impl From<CoreError> for HarnessError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::BlowUp { .. } | CoreError::SearchFailed(_) => {
                HarnessError::Numerical(e.to_string())
            }
            other => HarnessError::Invalid(vec![other.to_string()]),
        }
    }
}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        HarnessError::Invalid(vec![format!("i/o: {e}")])
    }
}

pub type RunResult<T> = std::result::Result<T, HarnessError>;

/// Named output files of one experiment, in emission order.
type OutputSet = Vec<(&'static str, Vec<u8>)>;

/// Child label of the data substream under the master seed. The solver's
/// noise substreams sit at the mode/path indices of the same tree (small
/// integers), so the data label must stay far outside that range.
const DATA_SUBSTREAM: u64 = 0x6461_7461;

// ---------------------------------------------------------------------
// Result emission. Every emitter refuses empty input: a file with no
// records is a silent lie about work that never happened.
// ---------------------------------------------------------------------

#[derive(Serialize)]
struct Record<'a, T: Serialize> {
    schema: &'a str,
    #[serde(flatten)]
    body: &'a T,
}

/// One norm evaluation tagged with the quantity it measures.
#[derive(Serialize)]
pub struct NamedNorm {
    pub name: &'static str,
    #[serde(flatten)]
    pub norm: NormValue,
}

/// Hilbert–Schmidt size record accompanying the moment reports.
#[derive(Serialize)]
struct OperatorSize {
    quantity: &'static str,
    value: f64,
}

/// Serializes records as JSON Lines, one schema-stamped object per line.
pub fn jsonl_bytes<T: Serialize>(schema: &str, records: &[T]) -> RunResult<Vec<u8>> {
    if records.is_empty() {
        return Err(HarnessError::Invalid(vec![format!(
            "refusing to emit an empty record set for schema {schema}"
        )]));
    }
    let mut out = Vec::new();
    for body in records {
        let line = serde_json::to_string(&Record { schema, body })
            .map_err(|e| HarnessError::Invalid(vec![format!("serialization: {e}")]))?;
        out.extend_from_slice(line.as_bytes());
        out.push(b'\n');
    }
    Ok(out)
}

/// Serializes a mass/energy ledger as CSV with a header row.
pub fn ledger_csv_bytes(ledger: &snls_core::dynamics::EnergyLedger) -> RunResult<Vec<u8>> {
    if ledger.times.is_empty() {
        return Err(HarnessError::Invalid(vec![
            "refusing to emit an empty ledger".into(),
        ]));
    }
    let mut out = String::from("time,mass,energy,h1\n");
    for i in 0..ledger.times.len() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            ledger.times[i], ledger.mass[i], ledger.energy[i], ledger.h1[i]
        ));
    }
    Ok(out.into_bytes())
}

/// Serializes the raw ratio samples behind fit reports as CSV.
pub fn ratio_csv_bytes(reports: &[FitReport]) -> RunResult<Vec<u8>> {
    let total: usize = reports.iter().map(|r| r.raw.len()).sum();
    if total == 0 {
        return Err(HarnessError::Invalid(vec![
            "refusing to emit an empty ratio table".into(),
        ]));
    }
    let mut out = String::from("check,x,trial,lhs,rhs,ratio\n");
    for report in reports {
        for s in &report.raw {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                report.check, s.x, s.trial, s.lhs, s.rhs, s.ratio
            ));
        }
    }
    Ok(out.into_bytes())
}

// ---------------------------------------------------------------------
// Experiment implementations.
// ---------------------------------------------------------------------

/// Smooth Gaussian draw on the lattice: coefficient `<n>^{-2} (a + ib)`
/// with independent standard normals from the given stream.
fn gaussian_field(lattice: FrequencyLattice, key: StreamKey) -> TorusField {
    let mut rng = CounterRng::new(key);
    let coeffs: Vec<Complex64> = lattice
        .modes()
        .map(|n| {
            let (a, b) = rng.normal_pair();
            Complex64::new(a, b) * bracket_pow(n, -2.0)
        })
        .collect();
    TorusField::from_coeffs(lattice, coeffs).expect("coefficient count matches lattice")
}

fn build_data(
    data: &DataSection,
    lattice: &FrequencyLattice,
    key: StreamKey,
) -> RunResult<TorusField> {
    match data {
        DataSection::Constant { amplitude } => {
            let mut f = TorusField::zero(*lattice);
            f.set_mode([0, 0, 0], Complex64::new(*amplitude, 0.0));
            Ok(f)
        }
        DataSection::Gaussian { h1 } => {
            let f = gaussian_field(*lattice, key);
            let size = f.h_norm(1.0);
            if !(size > 0.0) {
                return Err(HarnessError::Numerical(
                    "gaussian draw degenerated to zero".into(),
                ));
            }
            Ok(f.scaled(Complex64::new(h1 / size, 0.0)))
        }
    }
}

fn build_noise(
    config: &ExperimentConfig,
    lattice: FrequencyLattice,
) -> RunResult<Option<NoiseOperator>> {
    match &config.noise {
        None => Ok(None),
        Some(section) => Ok(Some(build_noise_operator(
            &section.family,
            section.regularity,
            lattice,
        )?)),
    }
}

fn run_simulate(config: &ExperimentConfig) -> RunResult<OutputSet> {
    let lattice = FrequencyLattice::new(config.lattice.expect("validated").cutoff)?;
    let sim = config.sim.expect("validated");
    let data = config.data.expect("validated");
    let u0 = build_data(
        &data,
        &lattice,
        StreamKey::from_seed(config.seed).child(DATA_SUBSTREAM),
    )?;
    let cfg = SimConfig {
        lattice,
        dt: sim.dt,
        t_horizon: sim.t_horizon,
        scheme: sim.scheme,
        noise: build_noise(config, lattice)?,
        stride: sim.stride,
        linear_only: sim.linear_only,
    };
    let ledger = if cfg.noise.is_some() {
        snls_solve(&u0, &cfg, &NoiseStream::new(config.seed))?.ledger
    } else {
        nls_solve(&u0, &cfg)?.1
    };
    Ok(vec![("ledger.csv", ledger_csv_bytes(&ledger)?)])
}

fn run_noise_stats(config: &ExperimentConfig) -> RunResult<OutputSet> {
    let lattice = FrequencyLattice::new(config.lattice.expect("validated").cutoff)?;
    let phi = build_noise(config, lattice)?.expect("validated");
    let ns = config.noise_stats.expect("validated");
    let params = StatParams {
        s: ns.s,
        p: ns.p,
        q: ns.q,
        r: ns.r,
        t_horizon: ns.t_horizon,
        n_steps: ns.n_steps,
        ensemble: ns.ensemble,
    };
    let stats = psi_regularity_stats(&phi, &params, &NoiseStream::new(config.seed))?;
    let moment_lines = jsonl_bytes(
        SCHEMA_MOMENT_REPORT,
        &[
            stats.sup_moment.clone(),
            stats.mixed_moment.clone(),
            stats.l2_mixed_moment.clone(),
        ],
    )?;
    let size_line = jsonl_bytes(
        SCHEMA_OPERATOR_SIZE,
        &[OperatorSize {
            quantity: "hilbert-schmidt norm of the noise operator",
            value: stats.hs_norm,
        }],
    )?;
    let mut bytes = moment_lines;
    bytes.extend_from_slice(&size_line);
    Ok(vec![("moments.jsonl", bytes)])
}

fn run_estimates(est: &EstimatesSection, seed: u64) -> RunResult<Vec<FitReport>> {
    let lattice = FrequencyLattice::new(est.cutoff)?;
    let key = StreamKey::from_seed(seed);
    let trials = est.trials;
    let report = match est.check {
        EstimateCheck::Strichartz => strichartz_check_on(
            lattice,
            est.p.expect("validated"),
            est.blocks.as_ref().expect("validated"),
            trials,
            key,
        )?,
        EstimateCheck::TrilinearUuu => trilinear_uuu_check_on(
            lattice,
            est.blocks.as_ref().expect("validated"),
            est.n2.expect("validated"),
            est.n3.expect("validated"),
            trials,
            key,
        )?,
        EstimateCheck::TrilinearUff => trilinear_uff_check_on(
            lattice,
            UffVariant::Uff,
            est.p.expect("validated"),
            est.blocks.as_ref().expect("validated"),
            trials,
            key,
        )?,
        EstimateCheck::TrilinearUuf => trilinear_uff_check_on(
            lattice,
            UffVariant::Uuf,
            est.p.expect("validated"),
            est.blocks.as_ref().expect("validated"),
            trials,
            key,
        )?,
        EstimateCheck::Quintic => quintic_estimate_check_on(
            lattice,
            est.t_len.expect("validated"),
            est.mode.expect("validated"),
            trials,
            key,
        )?,
    };
    Ok(vec![report])
}

fn run_verify_estimates(config: &ExperimentConfig) -> RunResult<OutputSet> {
    let est = config.estimates.as_ref().expect("validated");
    let reports = run_estimates(est, config.seed)?;
    Ok(vec![
        ("reports.jsonl", jsonl_bytes(SCHEMA_FIT_REPORT, &reports)?),
        ("raw.csv", ratio_csv_bytes(&reports)?),
    ])
}

fn run_norms(config: &ExperimentConfig) -> RunResult<OutputSet> {
    let lattice = FrequencyLattice::new(config.lattice.expect("validated").cutoff)?;
    let section = config.norms.expect("validated");
    let data_spec = config.data.unwrap_or(DataSection::Gaussian { h1: 1.0 });
    let data = build_data(
        &data_spec,
        &lattice,
        StreamKey::from_seed(config.seed).child(DATA_SUBSTREAM),
    )?;
    let times = SpaceTimePath::uniform_times(0.0, section.t_horizon, section.n_steps);
    let path = SpaceTimePath::free(&data, times)?;
    // A free solution is a one-piece atom, so its `H^1` size is a valid
    // certificate for the atomic space-time norm entering the
    // interpolation norm.
    let certificate = sobolev_norm(&data, 1.0, 2.0)?;
    let s = section.s;
    let records = vec![
        NamedNorm {
            name: "sobolev-data",
            norm: sobolev_norm(&data, s, 2.0)?,
        },
        NamedNorm {
            name: "square-function-data",
            norm: square_function_norm(&data, s, 2.0)?,
        },
        NamedNorm {
            name: "free-path-y",
            norm: y_norm(&path, s)?,
        },
        NamedNorm {
            name: "free-path-xtilde",
            norm: xtilde_norm(&path, 1.0)?,
        },
        NamedNorm {
            name: "free-path-z",
            norm: z_norm(&path)?,
        },
        NamedNorm {
            name: "free-path-mixed",
            norm: mixed_norm(&path, section.q, s, section.r)?,
        },
        NamedNorm {
            name: "free-path-l2-mixed",
            norm: l2_mixed_norm(&path, section.q, s, section.r)?,
        },
        NamedNorm {
            name: "free-path-interpolation",
            norm: m_norm(&path, &certificate)?,
        },
    ];
    Ok(vec![(
        "norms.jsonl",
        jsonl_bytes(SCHEMA_NORM_VALUE, &records)?,
    )])
}

fn run_windows(config: &ExperimentConfig) -> RunResult<OutputSet> {
    let lattice = FrequencyLattice::new(config.lattice.expect("validated").cutoff)?;
    let section = config.windows.expect("validated");
    let phi = build_noise(config, lattice)?.expect("validated");
    let w0 = build_data(
        &DataSection::Gaussian {
            h1: section.data_h1,
        },
        &lattice,
        StreamKey::from_seed(config.seed).child(DATA_SUBSTREAM),
    )?;
    let times = SpaceTimePath::uniform_times(0.0, section.t_end, section.n_steps);
    let psi = sample_psi(&phi, &times, &NoiseStream::new(config.seed))?;
    let plan = interval_partition(&psi, &w0, section.t_end, section.eta)?;
    let mut doc = serde_json::to_string_pretty(&Record {
        schema: SCHEMA_WINDOW_PLAN,
        body: &plan,
    })
    .map_err(|e| HarnessError::Invalid(vec![format!("serialization: {e}")]))?;
    doc.push('\n');
    Ok(vec![("plan.json", doc.into_bytes())])
}

fn dispatch(config: &ExperimentConfig) -> RunResult<OutputSet> {
    match config.kind {
        ExperimentKind::Simulate => run_simulate(config),
        ExperimentKind::NoiseStats => run_noise_stats(config),
        ExperimentKind::VerifyEstimates => run_verify_estimates(config),
        ExperimentKind::Norms => run_norms(config),
        ExperimentKind::Windows => run_windows(config),
    }
}

// ---------------------------------------------------------------------
// Atomic run protocol.
// ---------------------------------------------------------------------

/// Executes a validated configuration and materializes the run directory
/// atomically. On any error the directory does not come into existence.
///
/// The resolved configuration (output location stripped) is itself
/// written as `config.toml` and checksummed, so a run directory is fully
/// self-describing.
pub fn run(config: &ExperimentConfig, output_dir: &Path) -> RunResult<RunManifest> {
    if output_dir.exists() {
        return Err(HarnessError::Invalid(vec![format!(
            "output directory {} already exists; refusing to overwrite",
            output_dir.display()
        )]));
    }
    let parent = match output_dir.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&parent)?;

    let config_text = config.content_only().to_toml();
    let config_sha = sha256_hex(config_text.as_bytes());
    let mut manifest = RunManifest::started(config.kind.as_str(), config.seed, config_sha);

    let staging = tempfile::Builder::new()
        .prefix(".snls-staging-")
        .tempdir_in(&parent)?;
    // The manifest exists (in `running` status) before any computation,
    // so an interrupted staging directory is identifiable as such.
    fs::write(staging.path().join(MANIFEST_FILE), manifest.to_json())?;

    let mut outputs = dispatch(config)?;
    outputs.push(("config.toml", config_text.into_bytes()));

    let mut checksums = BTreeMap::new();
    for (name, bytes) in &outputs {
        fs::write(staging.path().join(name), bytes)?;
        checksums.insert((*name).to_string(), sha256_hex(bytes));
    }
    manifest.finalize(checksums);
    fs::write(staging.path().join(MANIFEST_FILE), manifest.to_json())?;

    let staged = staging.keep();
    if let Err(e) = fs::rename(&staged, output_dir) {
        let _ = fs::remove_dir_all(&staged);
        return Err(HarnessError::Invalid(vec![format!(
            "could not move staged outputs into {}: {e}",
            output_dir.display()
        )]));
    }
    Ok(manifest)
}
