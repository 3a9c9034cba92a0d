//! Experiment configuration: one strict, human-readable TOML document per
//! run.
//!
//! Parsing is deliberately unforgiving. Unknown keys anywhere in the
//! document are rejected, and validation collects *every* offending key
//! and constraint before reporting, so a bad config is fixed in one
//! round trip rather than one error at a time. A parsed configuration
//! serializes back to TOML losslessly: `parse(serialize(c)) == c`.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use snls_core::dynamics::Scheme;
use snls_core::lab::{QuinticMode, LAB_CUTOFF};
use snls_core::noise::SymbolFamily;

/// Experiment families the harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// Integrate the (possibly stochastic) equation and record the
    /// mass/energy ledger.
    Simulate,
    /// Monte Carlo moments of the stochastic convolution.
    NoiseStats,
    /// Randomized audits of the multilinear estimates.
    VerifyEstimates,
    /// Norm battery of a free solution from sampled data.
    Norms,
    /// Adaptive interval partition from a sampled noise path.
    Windows,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Simulate => "simulate",
            ExperimentKind::NoiseStats => "noise-stats",
            ExperimentKind::VerifyEstimates => "verify-estimates",
            ExperimentKind::Norms => "norms",
            ExperimentKind::Windows => "windows",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `[lattice]`: the cubic frequency lattice `{-K..K}^3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct LatticeSection {
    pub cutoff: usize,
}

/// `[sim]`: integrator parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SimSection {
    pub dt: f64,
    pub t_horizon: f64,
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
    #[serde(default = "default_stride")]
    pub stride: usize,
    #[serde(default)]
    pub linear_only: bool,
}

fn default_scheme() -> Scheme {
    Scheme::Strang
}

fn default_stride() -> usize {
    1
}

/// `[noise]`: diagonal smoothing operator, named family plus the
/// regularity its Hilbert–Schmidt norm is reported at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct NoiseSection {
    #[serde(flatten)]
    pub family: SymbolFamily,
    #[serde(default = "default_regularity")]
    pub regularity: f64,
}

fn default_regularity() -> f64 {
    1.0
}

/// `[data]`: initial data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DataSection {
    /// Spatially constant data with the given (real) amplitude.
    Constant { amplitude: f64 },
    /// Smooth Gaussian draw rescaled to the given `H^1` size.
    Gaussian { h1: f64 },
}

/// `[noise-stats]`: moment-study parameters (mirrors the core
/// `StatParams`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct NoiseStatsSection {
    /// Sobolev regularity of the measured norms.
    pub s: f64,
    /// Moment order.
    pub p: f64,
    /// Time exponent of the mixed norms.
    pub q: f64,
    /// Space exponent of the mixed norms.
    pub r: f64,
    pub t_horizon: f64,
    pub n_steps: usize,
    pub ensemble: usize,
}

/// Which estimate audit to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateCheck {
    /// Cube-localization growth of space-time Lebesgue norms of free
    /// solutions.
    Strichartz,
    /// Trilinear product of three frequency-localized atomic paths.
    TrilinearUuu,
    /// Product of one atomic and two forcing factors.
    TrilinearUff,
    /// Product of one forcing and two atomic factors.
    TrilinearUuf,
    /// Quintic forcing bound (interval-shrinkage audit).
    Quintic,
}

impl EstimateCheck {
    pub fn as_str(self) -> &'static str {
        match self {
            EstimateCheck::Strichartz => "strichartz",
            EstimateCheck::TrilinearUuu => "trilinear-uuu",
            EstimateCheck::TrilinearUff => "trilinear-uff",
            EstimateCheck::TrilinearUuf => "trilinear-uuf",
            EstimateCheck::Quintic => "quintic",
        }
    }
}

/// `[estimates]`: parameters of one estimate audit. Which keys apply
/// depends on `check`; validation rejects the inapplicable ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct EstimatesSection {
    pub check: EstimateCheck,
    /// Lattice cutoff the audit runs on.
    #[serde(default = "default_lab_cutoff")]
    pub cutoff: usize,
    /// Lebesgue exponent (strichartz, trilinear-uff, trilinear-uuf).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    /// Dyadic frequency sweep (all checks except quintic).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<Vec<u64>>,
    /// Fixed middle frequency (trilinear-uuu).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n2: Option<u64>,
    /// Fixed low frequency (trilinear-uuu).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n3: Option<u64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Base interval length (quintic).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_len: Option<f64>,
    /// Which part of the quintic bound to exercise (quintic).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<QuinticMode>,
}

fn default_lab_cutoff() -> usize {
    LAB_CUTOFF
}

fn default_trials() -> usize {
    32
}

/// `[norms]`: free-path norm battery parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct NormsSection {
    /// Sobolev regularity of the data/path norms.
    #[serde(default = "default_regularity")]
    pub s: f64,
    /// Span of the sampled path (at most 1: the short-interval norms
    /// are defined on unit-length windows).
    #[serde(default = "default_regularity")]
    pub t_horizon: f64,
    #[serde(default = "default_norm_steps")]
    pub n_steps: usize,
    /// Time exponent of the mixed norms.
    #[serde(default = "default_mixed_exponent")]
    pub q: f64,
    /// Space exponent of the mixed norms.
    #[serde(default = "default_mixed_exponent")]
    pub r: f64,
}

fn default_norm_steps() -> usize {
    16
}

fn default_mixed_exponent() -> f64 {
    6.0
}

/// `[windows]`: interval-partition parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct WindowsSection {
    /// Smallness threshold the window diagnostics are held under.
    pub eta: f64,
    pub t_end: f64,
    /// Steps of the sampling grid for the noise path.
    pub n_steps: usize,
    /// `H^1` size the Gaussian data draw is rescaled to.
    pub data_h1: f64,
}

/// A full experiment description: kind, master seed, and the sections
/// the kind needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// Master seed; every random stream of the run derives from it.
    pub seed: u64,
    /// Output directory (a CLI flag may override or supply it).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<LatticeSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<DataSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_stats: Option<NoiseStatsSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimates: Option<EstimatesSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norms: Option<NormsSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub windows: Option<WindowsSection>,
}

impl ExperimentConfig {
    /// Serializes to canonical TOML (also the byte stream the config
    /// hash is computed over).
    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serialization cannot fail")
    }

    /// The configuration with the output location stripped; two runs of
    /// the same experiment into different directories share this form
    /// (and therefore their config hash and output checksums).
    pub fn content_only(&self) -> ExperimentConfig {
        let mut c = self.clone();
        c.output_dir = None;
        c
    }
}

/// Parses and validates a config document, collecting every problem.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, Vec<String>> {
    let doc: toml::Table =
        toml::from_str(text).map_err(|e| vec![format!("TOML syntax: {}", e.message())])?;
    let mut problems = Vec::new();
    walk_document(&doc, &mut problems);
    if !problems.is_empty() {
        return Err(problems);
    }
    let config: ExperimentConfig =
        toml::from_str(text).map_err(|e| vec![format!("config type error: {}", e.message())])?;
    let problems = validate(&config);
    if problems.is_empty() {
        Ok(config)
    } else {
        Err(problems)
    }
}

// ---------------------------------------------------------------------
// Key-level schema walk: every unknown or missing key is reported, not
// just the first (serde's `deny_unknown_fields` stops at one).
// ---------------------------------------------------------------------

fn check_keys(
    path: &str,
    table: &toml::Table,
    allowed: &[&str],
    required: &[&str],
    problems: &mut Vec<String>,
) {
    for key in table.keys() {
        if !allowed.contains(&key.as_str()) {
            problems.push(format!("unknown key `{path}{key}`"));
        }
    }
    for key in required {
        if !table.contains_key(*key) {
            problems.push(format!("missing required key `{path}{key}`"));
        }
    }
}

fn subtable<'a>(
    doc: &'a toml::Table,
    key: &str,
    problems: &mut Vec<String>,
) -> Option<&'a toml::Table> {
    match doc.get(key) {
        Some(toml::Value::Table(t)) => Some(t),
        Some(_) => {
            problems.push(format!("key `{key}` must be a table"));
            None
        }
        None => None,
    }
}

fn walk_document(doc: &toml::Table, problems: &mut Vec<String>) {
    check_keys(
        "",
        doc,
        &[
            "kind",
            "seed",
            "output-dir",
            "lattice",
            "noise",
            "sim",
            "data",
            "noise-stats",
            "estimates",
            "norms",
            "windows",
        ],
        &["kind", "seed"],
        problems,
    );
    if let Some(t) = subtable(doc, "lattice", problems) {
        check_keys("lattice.", t, &["cutoff"], &["cutoff"], problems);
    }
    if let Some(t) = subtable(doc, "sim", problems) {
        check_keys(
            "sim.",
            t,
            &["dt", "t-horizon", "scheme", "stride", "linear-only"],
            &["dt", "t-horizon"],
            problems,
        );
    }
    if let Some(t) = subtable(doc, "noise", problems) {
        walk_noise(t, problems);
    }
    if let Some(t) = subtable(doc, "data", problems) {
        walk_data(t, problems);
    }
    if let Some(t) = subtable(doc, "noise-stats", problems) {
        let keys = ["s", "p", "q", "r", "t-horizon", "n-steps", "ensemble"];
        check_keys("noise-stats.", t, &keys, &keys, problems);
    }
    if let Some(t) = subtable(doc, "estimates", problems) {
        check_keys(
            "estimates.",
            t,
            &[
                "check", "cutoff", "p", "blocks", "n2", "n3", "trials", "t-len", "mode",
            ],
            &["check"],
            problems,
        );
    }
    if let Some(t) = subtable(doc, "norms", problems) {
        check_keys(
            "norms.",
            t,
            &["s", "t-horizon", "n-steps", "q", "r"],
            &[],
            problems,
        );
    }
    if let Some(t) = subtable(doc, "windows", problems) {
        let keys = ["eta", "t-end", "n-steps", "data-h1"];
        check_keys("windows.", t, &keys, &keys, problems);
    }
}

fn walk_noise(t: &toml::Table, problems: &mut Vec<String>) {
    let family = t.get("family").and_then(|v| v.as_str());
    let (allowed, required): (&[&str], &[&str]) = match family {
        Some("power-law") => (&["family", "c", "alpha", "regularity"], &["c", "alpha"]),
        Some("bandlimited") => (&["family", "c", "band", "regularity"], &["c", "band"]),
        Some("single-mode") => (
            &["family", "mode", "lambda", "regularity"],
            &["mode", "lambda"],
        ),
        Some("custom") => (&["family", "table", "regularity"], &["table"]),
        Some(other) => {
            problems.push(format!(
                "unknown noise family `{other}` (expected power-law, bandlimited, \
                 single-mode, or custom)"
            ));
            return;
        }
        None => {
            problems.push("missing required key `noise.family`".into());
            return;
        }
    };
    check_keys("noise.", t, allowed, required, problems);
}

fn walk_data(t: &toml::Table, problems: &mut Vec<String>) {
    let kind = t.get("kind").and_then(|v| v.as_str());
    let (allowed, required): (&[&str], &[&str]) = match kind {
        Some("constant") => (&["kind", "amplitude"], &["amplitude"]),
        Some("gaussian") => (&["kind", "h1"], &["h1"]),
        Some(other) => {
            problems.push(format!(
                "unknown data kind `{other}` (expected constant or gaussian)"
            ));
            return;
        }
        None => {
            problems.push("missing required key `data.kind`".into());
            return;
        }
    };
    check_keys("data.", t, allowed, required, problems);
}

// ---------------------------------------------------------------------
// Semantic validation on the typed configuration.
// ---------------------------------------------------------------------

/// Collects every constraint violation in a parsed configuration.
pub fn validate(config: &ExperimentConfig) -> Vec<String> {
    let mut problems = Vec::new();
    check_sections(config, &mut problems);
    if let Some(lat) = &config.lattice {
        if lat.cutoff == 0 {
            problems.push("lattice.cutoff must be at least 1".into());
        }
    }
    if let Some(sim) = &config.sim {
        if !(sim.dt > 0.0 && sim.dt.is_finite()) {
            problems.push(format!("sim.dt must be positive, got {}", sim.dt));
        }
        if !(sim.t_horizon > 0.0 && sim.t_horizon.is_finite()) {
            problems.push(format!(
                "sim.t-horizon must be positive, got {}",
                sim.t_horizon
            ));
        }
        if sim.stride == 0 {
            problems.push("sim.stride must be at least 1".into());
        }
    }
    if let Some(noise) = &config.noise {
        check_noise(noise, config.lattice.as_ref(), &mut problems);
    }
    if let Some(data) = &config.data {
        match data {
            DataSection::Constant { amplitude } => {
                if !amplitude.is_finite() {
                    problems.push("data.amplitude must be finite".into());
                }
            }
            DataSection::Gaussian { h1 } => {
                if !(h1.is_finite() && *h1 > 0.0) {
                    problems.push(format!("data.h1 must be positive, got {h1}"));
                }
            }
        }
    }
    if let Some(ns) = &config.noise_stats {
        for (name, v) in [("s", ns.s), ("p", ns.p), ("q", ns.q), ("r", ns.r)] {
            if !v.is_finite() {
                problems.push(format!("noise-stats.{name} must be finite"));
            }
        }
        if ns.p < 1.0 {
            problems.push(format!("noise-stats.p must be at least 1, got {}", ns.p));
        }
        if ns.q < 1.0 || ns.r < 1.0 {
            problems.push("noise-stats.q and noise-stats.r must be at least 1".into());
        }
        if !(ns.t_horizon > 0.0 && ns.t_horizon.is_finite()) {
            problems.push("noise-stats.t-horizon must be positive".into());
        }
        if ns.n_steps == 0 {
            problems.push("noise-stats.n-steps must be at least 1".into());
        }
        if ns.ensemble < 100 {
            problems.push(format!(
                "noise-stats.ensemble must be at least 100 for a confidence interval, got {}",
                ns.ensemble
            ));
        }
    }
    if let Some(est) = &config.estimates {
        check_estimates(est, &mut problems);
    }
    if let Some(n) = &config.norms {
        if !n.s.is_finite() {
            problems.push("norms.s must be finite".into());
        }
        if !(n.t_horizon > 0.0 && n.t_horizon <= 1.0) {
            problems.push(format!(
                "norms.t-horizon must lie in (0, 1] (short-interval norms are \
                 defined on unit-length windows), got {}",
                n.t_horizon
            ));
        }
        if n.n_steps == 0 {
            problems.push("norms.n-steps must be at least 1".into());
        }
        if n.q < 1.0 || n.r < 1.0 {
            problems.push("norms.q and norms.r must be at least 1".into());
        }
    }
    if let Some(w) = &config.windows {
        if !(w.eta > 0.0 && w.eta.is_finite()) {
            problems.push(format!("windows.eta must be positive, got {}", w.eta));
        }
        if !(w.t_end > 0.0 && w.t_end.is_finite()) {
            problems.push(format!("windows.t-end must be positive, got {}", w.t_end));
        }
        if w.n_steps == 0 {
            problems.push("windows.n-steps must be at least 1".into());
        }
        if !(w.data_h1 > 0.0 && w.data_h1.is_finite()) {
            problems.push(format!(
                "windows.data-h1 must be positive, got {}",
                w.data_h1
            ));
        }
    }
    problems
}

fn check_sections(config: &ExperimentConfig, problems: &mut Vec<String>) {
    let present = [
        ("lattice", config.lattice.is_some()),
        ("noise", config.noise.is_some()),
        ("sim", config.sim.is_some()),
        ("data", config.data.is_some()),
        ("noise-stats", config.noise_stats.is_some()),
        ("estimates", config.estimates.is_some()),
        ("norms", config.norms.is_some()),
        ("windows", config.windows.is_some()),
    ];
    // Per kind: sections that must be present, and sections that may be.
    let (required, optional): (&[&str], &[&str]) = match config.kind {
        ExperimentKind::Simulate => (&["lattice", "sim", "data"], &["noise"]),
        ExperimentKind::NoiseStats => (&["lattice", "noise", "noise-stats"], &[]),
        ExperimentKind::VerifyEstimates => (&["estimates"], &[]),
        ExperimentKind::Norms => (&["lattice", "norms"], &["data"]),
        ExperimentKind::Windows => (&["lattice", "noise", "windows"], &[]),
    };
    for (name, is_present) in present {
        let needed = required.contains(&name);
        let allowed = needed || optional.contains(&name);
        if needed && !is_present {
            problems.push(format!(
                "experiment kind `{}` requires a [{name}] section",
                config.kind
            ));
        }
        if is_present && !allowed {
            problems.push(format!(
                "section [{name}] does not apply to experiment kind `{}`",
                config.kind
            ));
        }
    }
}

fn check_noise(noise: &NoiseSection, lattice: Option<&LatticeSection>, problems: &mut Vec<String>) {
    if !noise.regularity.is_finite() {
        problems.push("noise.regularity must be finite".into());
    }
    match &noise.family {
        SymbolFamily::PowerLaw { c, alpha } => {
            if !(c.is_finite() && *c >= 0.0) {
                problems.push(format!("noise.c must be finite and nonnegative, got {c}"));
            }
            if !alpha.is_finite() {
                problems.push("noise.alpha must be finite".into());
            }
        }
        SymbolFamily::Bandlimited { c, band } => {
            if !(c.is_finite() && *c >= 0.0) {
                problems.push(format!("noise.c must be finite and nonnegative, got {c}"));
            }
            if !(band.is_finite() && *band >= 0.0) {
                problems.push(format!(
                    "noise.band must be finite and nonnegative, got {band}"
                ));
            }
        }
        SymbolFamily::SingleMode { lambda, .. } => {
            if !(lambda.is_finite() && *lambda >= 0.0) {
                problems.push(format!(
                    "noise.lambda must be finite and nonnegative, got {lambda}"
                ));
            }
        }
        SymbolFamily::Custom { table } => {
            if table.iter().any(|&l| !(l.is_finite() && l >= 0.0)) {
                problems.push("noise.table entries must be finite and nonnegative".into());
            }
            if let Some(lat) = lattice {
                let m = 2 * lat.cutoff + 1;
                let n_modes = m * m * m;
                if table.len() != n_modes {
                    problems.push(format!(
                        "noise.table has {} entries but the lattice with cutoff {} \
                         has {} modes",
                        table.len(),
                        lat.cutoff,
                        n_modes
                    ));
                }
            }
        }
    }
}

fn check_estimates(est: &EstimatesSection, problems: &mut Vec<String>) {
    if est.cutoff == 0 {
        problems.push("estimates.cutoff must be at least 1".into());
    }
    if est.trials == 0 {
        problems.push("estimates.trials must be at least 1".into());
    }
    let check = est.check.as_str();
    let mut needs = |name: &str, present: bool| {
        if !present {
            problems.push(format!(
                "estimates check `{check}` requires `estimates.{name}`"
            ));
        }
    };
    match est.check {
        EstimateCheck::Strichartz | EstimateCheck::TrilinearUff | EstimateCheck::TrilinearUuf => {
            needs("p", est.p.is_some());
            needs("blocks", est.blocks.is_some());
        }
        EstimateCheck::TrilinearUuu => {
            needs("blocks", est.blocks.is_some());
            needs("n2", est.n2.is_some());
            needs("n3", est.n3.is_some());
        }
        EstimateCheck::Quintic => {
            needs("t-len", est.t_len.is_some());
            needs("mode", est.mode.is_some());
        }
    }
    let forbid = |name: &str, present: bool, problems: &mut Vec<String>| {
        if present {
            problems.push(format!(
                "estimates key `{name}` does not apply to check `{check}`"
            ));
        }
    };
    match est.check {
        EstimateCheck::Strichartz | EstimateCheck::TrilinearUff | EstimateCheck::TrilinearUuf => {
            forbid("n2", est.n2.is_some(), problems);
            forbid("n3", est.n3.is_some(), problems);
            forbid("t-len", est.t_len.is_some(), problems);
            forbid("mode", est.mode.is_some(), problems);
        }
        EstimateCheck::TrilinearUuu => {
            forbid("p", est.p.is_some(), problems);
            forbid("t-len", est.t_len.is_some(), problems);
            forbid("mode", est.mode.is_some(), problems);
        }
        EstimateCheck::Quintic => {
            forbid("p", est.p.is_some(), problems);
            forbid("blocks", est.blocks.is_some(), problems);
            forbid("n2", est.n2.is_some(), problems);
            forbid("n3", est.n3.is_some(), problems);
        }
    }
    if let Some(p) = est.p {
        if !(p.is_finite() && p > 4.0) {
            problems.push(format!("estimates.p must exceed 4, got {p}"));
        }
    }
    if let Some(blocks) = &est.blocks {
        if blocks.len() < 3 {
            problems.push(format!(
                "estimates.blocks needs at least 3 frequencies for a slope fit, got {}",
                blocks.len()
            ));
        }
        for &n in blocks {
            if n == 0 || !n.is_power_of_two() {
                problems.push(format!(
                    "estimates.blocks entries must be dyadic (powers of two), got {n}"
                ));
            }
        }
    }
    for (name, v) in [("n2", est.n2), ("n3", est.n3)] {
        if let Some(n) = v {
            if n == 0 || !n.is_power_of_two() {
                problems.push(format!(
                    "estimates.{name} must be dyadic (a power of two), got {n}"
                ));
            }
        }
    }
    if let (Some(n2), Some(n3)) = (est.n2, est.n3) {
        if n2 < n3 {
            problems.push(format!(
                "estimates.n2 must dominate estimates.n3, got n2={n2} < n3={n3}"
            ));
        }
    }
    if let Some(t_len) = est.t_len {
        if !(t_len > 0.0 && t_len <= 1.0) {
            problems.push(format!("estimates.t-len must lie in (0, 1], got {t_len}"));
        }
    }
}
