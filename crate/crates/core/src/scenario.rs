//! Scenario files: one experiment per TOML document, optionally swept over
//! a grid of parameter values, rendered as a CSV or JSON table.
//!
//! A Mach–Zehnder scenario looks like
//!
//! ```toml
//! kind = "mz"
//! phase = 0.0
//! recoil = 0.5            # in units of the splitter packet width
//!
//! [bs_in]
//! t = 0.7071067811865476
//! r = [0.0, 0.7071067811865476]   # complex numbers are [re, im]
//!
//! [ww]
//! arm = "reflected"
//! gamma = 0.5
//!
//! [[sweep]]
//! parameter = "phase"
//! start = 0.0
//! stop = 6.283185307179586
//! steps = 101
//!
//! [output]
//! format = "csv"
//! ```
//!
//! and a Stern–Gerlach one like
//!
//! ```toml
//! kind = "stern_gerlach"
//! a1 = 0.6
//! a2 = 0.8
//! shots = 100000
//! seed = 42
//! ```
//!
//! Overrides (`key=value`, dotted keys for nested tables) are applied to the
//! parsed document before it is interpreted, left to right.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::{json, Map, Value as Json};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use thiserror::Error;

use crate::collapse::{reduce_statistical, CollapseError, EntanglementSpec};
use crate::interferometer::{
    fringe_visibility, output_probabilities, visibility, Arm, BeamSplitterSpec, InputPort,
    InterferometerConfig, InterferometerError, PacketSpec, WhichWayDetectorSpec,
};
use crate::tolerance;

/// Phase points used for a per-row visibility when the phase is not swept.
pub const DEFAULT_VISIBILITY_POINTS: usize = 100;
pub const DEFAULT_SHOTS: u64 = 100_000;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl ScenarioError {
    /// Process exit code for this failure class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Parse(_) => 2,
            Self::Domain(_) => 3,
            Self::Io(_) => 4,
        }
    }
}

impl From<InterferometerError> for ScenarioError {
    fn from(e: InterferometerError) -> Self {
        Self::Domain(e.to_string())
    }
}

impl From<CollapseError> for ScenarioError {
    fn from(e: CollapseError) -> Self {
        Self::Domain(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, ScenarioError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Mz,
    SternGerlach,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(ScenarioError::Parse(format!(
                "unknown output format `{other}` (expected csv or json)"
            ))),
        }
    }
}

/// A `key=value` override. The value is read as a TOML value when possible
/// and as a bare string otherwise, so `phase=1.5`, `ww.arm=reflected` and
/// `bs_in.t=[0.6, 0.0]` all work.
#[derive(Debug, Clone, PartialEq)]
pub struct Override {
    pub key: String,
    pub value: toml::Value,
}

impl Override {
    pub fn new(key: impl Into<String>, value: impl Into<toml::Value>) -> Self {
        Self {
            key: key.into(),
            value: value.into(),
        }
    }
}

impl FromStr for Override {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self> {
        let (key, raw) = s
            .split_once('=')
            .ok_or_else(|| ScenarioError::Parse(format!("override `{s}` is not key=value")))?;
        let key = key.trim();
        if key.is_empty() || key.split('.').any(str::is_empty) {
            return Err(ScenarioError::Parse(format!("override `{s}` has an empty key")));
        }
        let raw = raw.trim();
        let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(raw.to_string()));
        Ok(Self::new(key, value))
    }
}

fn apply_override(doc: &mut toml::Table, o: &Override) -> Result<()> {
    let mut parts: Vec<&str> = o.key.split('.').collect();
    let last = parts.pop().expect("override keys are never empty");
    let mut table = doc;
    for part in parts {
        let entry = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry.as_table_mut().ok_or_else(|| {
            ScenarioError::Parse(format!("override `{}`: `{part}` is not a table", o.key))
        })?;
    }
    table.insert(last.to_string(), o.value.clone());
    Ok(())
}

/// A complex number written either as a real number or as `[re, im]`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
enum RawComplex {
    Real(f64),
    Pair([f64; 2]),
}

impl From<RawComplex> for Complex64 {
    fn from(c: RawComplex) -> Self {
        match c {
            RawComplex::Real(re) => Complex64::new(re, 0.0),
            RawComplex::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSplitter {
    enabled: Option<bool>,
    t: Option<RawComplex>,
    r: Option<RawComplex>,
    recoil: Option<f64>,
    packet: Option<PacketSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDetector {
    #[serde(default = "default_arm")]
    arm: Arm,
    gamma: f64,
}

fn default_arm() -> Arm {
    Arm::Reflected
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: String,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl SweepSpec {
    /// Evenly spaced values from `start` to `stop`, both included.
    pub fn values(&self) -> Vec<f64> {
        if self.steps <= 1 {
            return vec![self.start];
        }
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                if i + 1 == self.steps {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * i as f64 / last
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    kind: ScenarioKind,
    seed: Option<u64>,
    #[serde(default)]
    sweep: Vec<SweepSpec>,
    #[serde(default)]
    output: OutputSpec,

    phase: Option<f64>,
    input_port: Option<u8>,
    recoil: Option<f64>,
    absolute_momentum: Option<bool>,
    visibility_points: Option<usize>,
    packet: Option<PacketSpec>,
    bs_in: Option<RawSplitter>,
    bs_out: Option<RawSplitter>,
    ww: Option<RawDetector>,

    a1: Option<RawComplex>,
    a2: Option<RawComplex>,
    amplitudes: Option<Vec<RawComplex>>,
    eigenvalues: Option<Vec<f64>>,
    shots: Option<u64>,
}

const MZ_ONLY: &[&str] = &[
    "phase",
    "input_port",
    "recoil",
    "absolute_momentum",
    "visibility_points",
    "packet",
    "bs_in",
    "bs_out",
    "ww",
];
const SG_ONLY: &[&str] = &["a1", "a2", "amplitudes", "eigenvalues", "shots"];

/// Parameters a Mach–Zehnder sweep may vary.
pub const MZ_SWEEP_PARAMETERS: &[&str] =
    &["phase", "recoil", "bs_in.recoil", "bs_out.recoil", "gamma", "ww.gamma"];

fn canonical_parameter(name: &str) -> &str {
    match name {
        "ww.gamma" => "gamma",
        other => other,
    }
}

/// Whether a diagnostic concerns the file's structure or the physics it describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagnosticKind {
    Structure,
    Domain,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    /// Key or section the problem is attached to.
    pub location: String,
    pub message: String,
}

impl Diagnostic {
    fn structure(location: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            kind: DiagnosticKind::Structure,
            location: location.into(),
            message: message.into(),
        }
    }

    fn domain(location: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            kind: DiagnosticKind::Domain,
            location: location.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

/// A parsed scenario with overrides already applied.
#[derive(Debug, Clone)]
pub struct Scenario {
    document: toml::Table,
    raw: RawScenario,
}

impl Scenario {
    pub fn parse(text: &str, overrides: &[Override]) -> Result<Self> {
        let mut document: toml::Table =
            toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        for o in overrides {
            apply_override(&mut document, o)?;
        }
        let raw = toml::Value::Table(document.clone())
            .try_into::<RawScenario>()
            .map_err(|e| ScenarioError::Parse(e.to_string()))?;
        Ok(Self { document, raw })
    }

    pub fn load(path: impl AsRef<Path>, overrides: &[Override]) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| ScenarioError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text, overrides)
    }

    pub fn kind(&self) -> ScenarioKind {
        self.raw.kind
    }

    pub fn output(&self) -> &OutputSpec {
        &self.raw.output
    }

    pub fn sweeps(&self) -> &[SweepSpec] {
        &self.raw.sweep
    }

    pub fn seed(&self) -> u64 {
        self.raw.seed.unwrap_or(0)
    }

    /// Every invariant violation found without running anything.
    pub fn diagnostics(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let present = |k: &str| self.document.contains_key(k);
        let (foreign, kind_name) = match self.raw.kind {
            ScenarioKind::Mz => (SG_ONLY, "mz"),
            ScenarioKind::SternGerlach => (MZ_ONLY, "stern_gerlach"),
        };
        for key in foreign.iter().filter(|k| present(k)) {
            out.push(Diagnostic::structure(
                *key,
                format!("key does not apply to {kind_name} scenarios"),
            ));
        }
        for (i, sweep) in self.raw.sweep.iter().enumerate() {
            let at = format!("sweep[{i}]");
            if sweep.steps == 0 || (sweep.steps == 1 && sweep.start != sweep.stop) {
                out.push(Diagnostic::structure(
                    &at,
                    format!(
                        "steps must be at least 2 (a single step needs start == stop), got {}",
                        sweep.steps
                    ),
                ));
            }
            if !sweep.start.is_finite() || !sweep.stop.is_finite() {
                out.push(Diagnostic::domain(&at, "sweep bounds must be finite"));
            }
            let known = self.raw.kind == ScenarioKind::Mz
                && MZ_SWEEP_PARAMETERS.contains(&sweep.parameter.as_str());
            if !known {
                out.push(Diagnostic::structure(
                    &at,
                    format!(
                        "unknown parameter `{}` for {kind_name} scenarios",
                        sweep.parameter
                    ),
                ));
            }
            let dup = self.raw.sweep[..i]
                .iter()
                .any(|s| canonical_parameter(&s.parameter) == canonical_parameter(&sweep.parameter));
            if dup {
                out.push(Diagnostic::structure(
                    &at,
                    format!("parameter `{}` is swept twice", sweep.parameter),
                ));
            }
        }
        match self.raw.kind {
            ScenarioKind::Mz => self.mz_diagnostics(&mut out),
            ScenarioKind::SternGerlach => self.sg_diagnostics(&mut out),
        }
        out
    }

    fn mz_diagnostics(&self, out: &mut Vec<Diagnostic>) {
        let raw = &self.raw;
        if let Some(port) = raw.input_port {
            if port != 1 && port != 2 {
                out.push(Diagnostic::domain("input_port", format!("must be 1 or 2, got {port}")));
            }
        }
        if raw.visibility_points.is_some_and(|n| n < 8) {
            out.push(Diagnostic::domain("visibility_points", "must be at least 8"));
        }
        if let Some(p) = raw.phase.filter(|p| !p.is_finite()) {
            out.push(Diagnostic::domain("phase", format!("must be finite, got {p}")));
        }
        for (name, bs) in [("bs_in", &raw.bs_in), ("bs_out", &raw.bs_out)] {
            let Some(bs) = bs else { continue };
            if name == "bs_in" && bs.enabled == Some(false) {
                out.push(Diagnostic::structure("bs_in", "the input splitter cannot be disabled"));
            }
            match (bs.t, bs.r) {
                (Some(t), Some(r)) => {
                    let (t, r): (Complex64, Complex64) = (t.into(), r.into());
                    let weight = t.norm_sqr() + r.norm_sqr();
                    if !weight.is_finite() || (weight - 1.0).abs() > tolerance::NORM {
                        out.push(Diagnostic::domain(
                            name,
                            format!(
                                "beam splitter is not unitary: |t|² + |r|² = {weight} (must be 1)"
                            ),
                        ));
                    }
                }
                (None, None) => {}
                _ => out.push(Diagnostic::structure(name, "give both t and r, or neither")),
            }
        }
        for (name, packet) in self.packets() {
            if !(packet.width.is_finite() && packet.width > 0.0) {
                out.push(Diagnostic::domain(
                    format!("{name}.packet.width"),
                    format!("must be positive, got {}", packet.width),
                ));
                continue;
            }
            if let Err(e) = packet.build() {
                out.push(Diagnostic::domain(format!("{name}.packet"), e.to_string()));
            }
        }
        if let Some(ww) = &raw.ww {
            if !(0.0..=1.0).contains(&ww.gamma) {
                out.push(Diagnostic::domain(
                    "ww.gamma",
                    format!("must lie in [0, 1], got {}", ww.gamma),
                ));
            }
        }
        for (i, sweep) in raw.sweep.iter().enumerate() {
            let at = format!("sweep[{i}]");
            match canonical_parameter(&sweep.parameter) {
                "gamma" => {
                    if raw.ww.is_none() {
                        out.push(Diagnostic::structure(&at, "sweeping gamma needs a [ww] section"));
                    }
                    for v in [sweep.start, sweep.stop] {
                        if !(0.0..=1.0).contains(&v) {
                            out.push(Diagnostic::domain(
                                &at,
                                format!("gamma must lie in [0, 1], got {v}"),
                            ));
                        }
                    }
                }
                "bs_out.recoil" if !self.has_output_splitter() => {
                    out.push(Diagnostic::structure(&at, "output splitter is disabled"));
                }
                _ => {}
            }
        }
        self.recoil_limits(out);
    }

    /// Recoils must stay within the grid's shift limit, at the base point
    /// and at every sweep endpoint.
    fn recoil_limits(&self, out: &mut Vec<Diagnostic>) {
        let Ok(base) = self.base_config() else { return };
        let mut candidates = vec![base];
        for sweep in &self.raw.sweep {
            if !matches!(
                canonical_parameter(&sweep.parameter),
                "recoil" | "bs_in.recoil" | "bs_out.recoil"
            ) {
                continue;
            }
            for v in [sweep.start, sweep.stop] {
                let mut cfg = base;
                self.apply(&mut cfg, &sweep.parameter, v);
                candidates.push(cfg);
            }
        }
        for cfg in candidates {
            let mut splitters = vec![("bs_in", cfg.bs_in)];
            if let Some(bs) = cfg.bs_out {
                splitters.push(("bs_out", bs));
            }
            for (name, bs) in splitters {
                let Ok(grid) = bs.packet.grid() else { continue };
                if bs.recoil.abs() > grid.max_shift() {
                    let d = Diagnostic::domain(
                        format!("{name}.recoil"),
                        format!(
                            "recoil {} exceeds the grid limit {} (widen the packet span)",
                            bs.recoil,
                            grid.max_shift()
                        ),
                    );
                    if !out.contains(&d) {
                        out.push(d);
                    }
                }
            }
        }
    }

    fn sg_diagnostics(&self, out: &mut Vec<Diagnostic>) {
        let raw = &self.raw;
        let pair = raw.a1.is_some() || raw.a2.is_some();
        if pair && raw.amplitudes.is_some() {
            out.push(Diagnostic::structure("amplitudes", "give either a1/a2 or amplitudes, not both"));
        }
        if pair && raw.eigenvalues.is_some() {
            out.push(Diagnostic::structure(
                "eigenvalues",
                "a1/a2 scenarios use the spin eigenvalues ±1/2",
            ));
        }
        if !pair && raw.amplitudes.is_none() {
            out.push(Diagnostic::structure("a1", "amplitudes are missing"));
        }
        if pair && (raw.a1.is_none() || raw.a2.is_none()) {
            out.push(Diagnostic::structure("a1", "give both a1 and a2"));
        }
        if let (Some(a), Some(e)) = (&raw.amplitudes, &raw.eigenvalues) {
            if a.len() != e.len() {
                out.push(Diagnostic::structure(
                    "eigenvalues",
                    format!("{} eigenvalues for {} amplitudes", e.len(), a.len()),
                ));
            }
        }
        if raw.shots == Some(0) {
            out.push(Diagnostic::domain("shots", "must be positive"));
        }
        if let Some(amps) = self.sg_amplitudes() {
            let total: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
            if !total.is_finite() || (total - 1.0).abs() > tolerance::NORM {
                out.push(Diagnostic::domain(
                    "amplitudes",
                    format!("Σ|a_j|² = {total} (must be 1)"),
                ));
            }
        }
    }

    fn packets(&self) -> Vec<(&'static str, PacketSpec)> {
        let mut v = vec![("bs_in", self.packet_for(self.raw.bs_in.as_ref()))];
        if self.has_output_splitter() {
            v.push(("bs_out", self.packet_for(self.raw.bs_out.as_ref())));
        }
        v
    }

    fn packet_for(&self, bs: Option<&RawSplitter>) -> PacketSpec {
        bs.and_then(|b| b.packet)
            .or(self.raw.packet)
            .unwrap_or_default()
    }

    fn has_output_splitter(&self) -> bool {
        self.raw.bs_out.as_ref().and_then(|b| b.enabled) != Some(false)
    }

    fn momentum_scale(&self, packet: &PacketSpec) -> f64 {
        if self.raw.absolute_momentum == Some(true) {
            1.0
        } else {
            packet.width
        }
    }

    fn splitter(&self, bs: Option<&RawSplitter>) -> BeamSplitterSpec {
        let packet = self.packet_for(bs);
        let mut spec = match bs.and_then(|b| b.t.zip(b.r)) {
            Some((t, r)) => BeamSplitterSpec::new(t.into(), r.into()),
            None => BeamSplitterSpec::balanced(),
        };
        let recoil = bs.and_then(|b| b.recoil).or(self.raw.recoil).unwrap_or(0.0);
        spec.packet = packet;
        spec.recoil = recoil * self.momentum_scale(&packet);
        spec
    }

    /// Interferometer described by the file before any sweep is applied.
    pub fn base_config(&self) -> Result<InterferometerConfig> {
        if self.raw.kind != ScenarioKind::Mz {
            return Err(ScenarioError::Parse("not an mz scenario".into()));
        }
        let bs_in = self.splitter(self.raw.bs_in.as_ref());
        let bs_out = self
            .has_output_splitter()
            .then(|| self.splitter(self.raw.bs_out.as_ref()));
        let mut config = InterferometerConfig::new(bs_in, bs_out).with_phase(self.raw.phase.unwrap_or(0.0));
        config.input_port = match self.raw.input_port {
            Some(2) => InputPort::Two,
            _ => InputPort::One,
        };
        config.ww = self
            .raw
            .ww
            .as_ref()
            .map(|w| WhichWayDetectorSpec::new(w.arm, w.gamma));
        Ok(config)
    }

    /// Sets one sweep parameter; recoils are scaled like the file's keys.
    fn apply(&self, config: &mut InterferometerConfig, parameter: &str, value: f64) {
        let scaled = |bs: &BeamSplitterSpec| value * self.momentum_scale(&bs.packet);
        match canonical_parameter(parameter) {
            "phase" => config.phase = value,
            "gamma" => {
                if let Some(ww) = config.ww.as_mut() {
                    ww.gamma = value;
                }
            }
            "recoil" => {
                config.bs_in.recoil = scaled(&config.bs_in);
                if let Some(bs) = config.bs_out.as_mut() {
                    bs.recoil = scaled(bs);
                }
            }
            "bs_in.recoil" => config.bs_in.recoil = scaled(&config.bs_in),
            "bs_out.recoil" => {
                if let Some(bs) = config.bs_out.as_mut() {
                    bs.recoil = scaled(bs);
                }
            }
            _ => {}
        }
    }

    fn sg_amplitudes(&self) -> Option<Vec<Complex64>> {
        match (&self.raw.amplitudes, self.raw.a1, self.raw.a2) {
            (Some(a), _, _) => Some(a.iter().map(|&c| c.into()).collect()),
            (None, Some(a1), Some(a2)) => Some(vec![a1.into(), a2.into()]),
            _ => None,
        }
    }

    /// Runs the scenario. Structural problems are parse errors, anything
    /// else flagged by [`Scenario::diagnostics`] is a domain error.
    pub fn run(&self) -> Result<ResultTable> {
        let diagnostics = self.diagnostics();
        if let Some(d) = diagnostics.iter().find(|d| d.kind == DiagnosticKind::Structure) {
            return Err(ScenarioError::Parse(d.to_string()));
        }
        if let Some(d) = diagnostics.first() {
            return Err(ScenarioError::Domain(d.to_string()));
        }
        let mut table = match self.raw.kind {
            ScenarioKind::Mz => self.run_mz()?,
            ScenarioKind::SternGerlach => self.run_sg()?,
        };
        let echo = serde_json::to_value(&self.document)
            .map_err(|e| ScenarioError::Parse(e.to_string()))?;
        table.metadata.insert("scenario".into(), echo);
        table.metadata.insert("tool".into(), json!(env!("CARGO_PKG_NAME")));
        table.metadata.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        table.metadata.insert("seed".into(), json!(self.seed()));
        Ok(table)
    }

    fn run_mz(&self) -> Result<ResultTable> {
        let base = self.base_config()?;
        base.validate()?;
        let sweeps = &self.raw.sweep;
        let names: Vec<String> = sweeps
            .iter()
            .map(|s| canonical_parameter(&s.parameter).to_string())
            .collect();
        let axes: Vec<Vec<f64>> = sweeps.iter().map(SweepSpec::values).collect();
        let points = cartesian(&axes);
        let phase_swept = names.iter().any(|n| n == "phase");
        let n_phase = self.raw.visibility_points.unwrap_or(DEFAULT_VISIBILITY_POINTS);

        let rows: Vec<Vec<f64>> = points
            .par_iter()
            .map(|values| {
                let mut config = base;
                for (name, &v) in names.iter().zip(values) {
                    self.apply(&mut config, name, v);
                }
                let p = output_probabilities(&config)?;
                let mut row = values.clone();
                row.extend([p.p3, p.p4]);
                if !phase_swept {
                    row.push(visibility(&config, n_phase)?);
                }
                Ok(row)
            })
            .collect::<Result<_>>()?;

        let mut columns = names.clone();
        columns.extend(["p3".to_string(), "p4".to_string()]);
        if !phase_swept {
            columns.push("visibility".into());
        }
        let mut table = ResultTable::new(columns, rows);
        table.metadata.insert("kind".into(), json!("mz"));
        if phase_swept {
            table
                .metadata
                .insert("visibility".into(), phase_visibility(&names, &table.rows));
        }
        Ok(table)
    }

    fn run_sg(&self) -> Result<ResultTable> {
        let amplitudes = self
            .sg_amplitudes()
            .ok_or_else(|| ScenarioError::Parse("amplitudes are missing".into()))?;
        let spec = match (&self.raw.eigenvalues, amplitudes.as_slice()) {
            (Some(e), _) => EntanglementSpec::standard(amplitudes.clone(), e.clone())?,
            (None, [a1, a2]) => EntanglementSpec::stern_gerlach(*a1, *a2)?,
            (None, _) => {
                let e = (0..amplitudes.len()).map(|j| j as f64).collect();
                EntanglementSpec::standard(amplitudes.clone(), e)?
            }
        };
        let psi = spec.entangle()?;
        let probabilities = spec.outcome_probabilities(&psi)?;
        let reduced = reduce_statistical(&psi)?;
        let shots = self.raw.shots.unwrap_or(DEFAULT_SHOTS);
        let sample = spec.sample_outcomes(&psi, shots, self.seed())?;
        let frequencies = sample.frequencies();

        let mut rows = Vec::with_capacity(spec.branches());
        for j in 0..spec.branches() {
            let xi = &spec.system_states()[j];
            let weight = reduced
                .matrix_element(xi, xi)
                .map_err(|e| ScenarioError::Domain(e.to_string()))?
                .re;
            rows.push(vec![
                j as f64,
                spec.eigenvalues()[j],
                probabilities[j],
                weight,
                sample.counts[j] as f64,
                frequencies[j],
            ]);
        }
        let columns = ["outcome", "eigenvalue", "probability", "reduced_weight", "count", "frequency"]
            .map(String::from)
            .to_vec();
        let mut table = ResultTable::new(columns, rows);
        table.metadata.insert("kind".into(), json!("stern_gerlach"));
        table.metadata.insert("shots".into(), json!(shots));
        table
            .metadata
            .insert("purity".into(), json!(reduced.purity()));
        Ok(table)
    }
}

/// Every combination of the axis values, last axis fastest.
fn cartesian(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    axes.iter().fold(vec![Vec::new()], |acc, axis| {
        acc.iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect()
    })
}

/// Fringe visibility of `p3` along the phase axis. A single number when the
/// phase is the only swept parameter, otherwise one entry per combination of
/// the other parameters.
fn phase_visibility(names: &[String], rows: &[Vec<f64>]) -> Json {
    let phase_col = names.iter().position(|n| n == "phase").expect("phase is swept");
    let p3_col = names.len();
    let mut groups: Vec<(Vec<f64>, f64, f64)> = Vec::new();
    for row in rows {
        let key: Vec<f64> = (0..names.len())
            .filter(|&i| i != phase_col)
            .map(|i| row[i])
            .collect();
        let p3 = row[p3_col];
        match groups.iter_mut().find(|g| g.0 == key) {
            Some(g) => {
                g.1 = g.1.min(p3);
                g.2 = g.2.max(p3);
            }
            None => groups.push((key, p3, p3)),
        }
    }
    if names.len() == 1 {
        let (_, lo, hi) = groups[0];
        return json!(fringe_visibility(lo, hi));
    }
    let others: Vec<&String> = names.iter().filter(|n| *n != "phase").collect();
    Json::Array(
        groups
            .into_iter()
            .map(|(key, lo, hi)| {
                let mut entry = Map::new();
                for (name, v) in others.iter().zip(key) {
                    entry.insert((*name).clone(), json!(v));
                }
                entry.insert("visibility".into(), json!(fringe_visibility(lo, hi)));
                Json::Object(entry)
            })
            .collect(),
    )
}

/// Named columns of real numbers plus free-form metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub metadata: Map<String, Json>,
}

impl ResultTable {
    pub fn new(columns: Vec<String>, rows: Vec<Vec<f64>>) -> Self {
        debug_assert!(rows.iter().all(|r| r.len() == columns.len()));
        Self {
            columns,
            rows,
            metadata: Map::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// Header row, then one line per row; 17 significant digits, `\n` endings.
    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    /// `{"metadata": {...}, "rows": [{column: value, ...}, ...]}`.
    pub fn to_json(&self) -> String {
        let rows: Vec<Json> = self
            .rows
            .iter()
            .map(|row| {
                Json::Object(
                    self.columns
                        .iter()
                        .zip(row)
                        .map(|(c, v)| (c.clone(), json!(v)))
                        .collect(),
                )
            })
            .collect();
        let doc = json!({ "metadata": self.metadata, "rows": rows });
        let mut s = serde_json::to_string_pretty(&doc).expect("tables serialize");
        s.push('\n');
        s
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => self.to_json(),
        }
    }

    /// Writes the table. CSV output also gets a `<path>.meta.json` sidecar
    /// so the metadata is not lost.
    pub fn write(&self, path: &Path, format: OutputFormat) -> Result<()> {
        let io = |p: &Path, e: std::io::Error| ScenarioError::Io(format!("{}: {e}", p.display()));
        std::fs::write(path, self.render(format)).map_err(|e| io(path, e))?;
        if format == OutputFormat::Csv {
            let mut sidecar = path.as_os_str().to_owned();
            sidecar.push(".meta.json");
            let sidecar = PathBuf::from(sidecar);
            let meta = serde_json::to_string_pretty(&self.metadata).expect("metadata serializes");
            std::fs::write(&sidecar, meta + "\n").map_err(|e| io(&sidecar, e))?;
        }
        Ok(())
    }
}

/// Command-line knobs layered over the file after the `--set` overrides.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub overrides: Vec<Override>,
    pub output: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub seed: Option<u64>,
}

impl RunOptions {
    fn all_overrides(&self) -> Vec<Override> {
        let mut all = self.overrides.clone();
        if let Some(seed) = self.seed {
            let seed = i64::try_from(seed).unwrap_or(i64::MAX);
            all.push(Override::new("seed", seed));
        }
        all
    }
}

/// Loads, runs and writes a scenario. Returns the table together with the
/// destination it went to (`None` means the caller should print it).
pub fn run_file(path: impl AsRef<Path>, options: &RunOptions) -> Result<(ResultTable, Option<PathBuf>, OutputFormat)> {
    let scenario = Scenario::load(path, &options.all_overrides())?;
    let table = scenario.run()?;
    let format = options.format.unwrap_or(scenario.output().format);
    let dest = options.output.clone().or_else(|| scenario.output().path.clone());
    if let Some(dest) = &dest {
        table.write(dest, format)?;
    }
    Ok((table, dest, format))
}

/// Parses a file and lists what would stop it from running.
pub fn validate_file(path: impl AsRef<Path>) -> Result<Vec<Diagnostic>> {
    Ok(Scenario::load(path, &[])?.diagnostics())
}
