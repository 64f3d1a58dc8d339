//! Experiment configuration: a single JSON document, validated before any
//! computation.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use squidcav_core::model::Variant;
use squidcav_core::protocols::Switching;

use crate::error::{CliError, CliResult};

/// Carrier assumed for a drive whose frequency is neither given nor
/// derivable from a spectrum (GHz). Only the lab-frame bookkeeping uses it.
pub const NOMINAL_OMEGA_UW_GHZ: f64 = 20.0;
/// Cavity coupling used when neither `cavity.g_per_s` nor a field integral is given.
pub const DEFAULT_G_PER_S: f64 = 1.8e8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Bell,
    Transfer,
    Cnot,
    Swap,
    StarkSweep,
    Spectrum,
    Feasibility,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::Bell,
        Experiment::Transfer,
        Experiment::Cnot,
        Experiment::Swap,
        Experiment::StarkSweep,
        Experiment::Spectrum,
        Experiment::Feasibility,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Bell => "bell",
            Experiment::Transfer => "transfer",
            Experiment::Cnot => "cnot",
            Experiment::Swap => "swap",
            Experiment::StarkSweep => "stark-sweep",
            Experiment::Spectrum => "spectrum",
            Experiment::Feasibility => "feasibility",
        }
    }

    /// File-name stem: `stark-sweep` becomes `stark_sweep`.
    pub fn stem(self) -> String {
        self.name().replace('-', "_")
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Experiment::ALL.into_iter().find(|e| e.name() == s).ok_or_else(|| {
            let names: Vec<_> = Experiment::ALL.iter().map(|e| e.name()).collect();
            format!("unknown experiment `{s}`, expected one of {}", names.join(", "))
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SquidSection {
    #[serde(rename = "C_fF")]
    pub c_ff: f64,
    #[serde(rename = "L_pH")]
    pub l_ph: f64,
    #[serde(rename = "Ic_uA")]
    pub ic_ua: f64,
    #[serde(rename = "Phix_Phi0")]
    pub phix_phi0: f64,
    /// Eigenstate index used as |a⟩.
    #[serde(default = "default_a_index")]
    pub a_index: usize,
}

fn default_a_index() -> usize {
    3
}

impl Default for SquidSection {
    fn default() -> Self {
        Self { c_ff: 90.0, l_ph: 100.0, ic_ua: 3.75, phix_phi0: 0.4995, a_index: default_a_index() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub points: usize,
    #[serde(rename = "halfwidth_Phi0")]
    pub halfwidth_phi0: f64,
    pub levels: usize,
    pub check_convergence: bool,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { points: 512, halfwidth_phi0: 0.35, levels: 6, check_convergence: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CavitySection {
    #[serde(rename = "omega_c_GHz")]
    pub omega_c_ghz: f64,
    pub g_per_s: Option<f64>,
    pub n_max: usize,
    #[serde(rename = "Q")]
    pub q: Option<f64>,
    /// Fixes Δ_c directly instead of taking ω_a0 from the spectrum.
    #[serde(rename = "Delta_c_per_s")]
    pub delta_c_per_s: Option<f64>,
    /// Fixes Δ_c as a multiple of g.
    #[serde(rename = "Delta_c_over_g")]
    pub delta_c_over_g: Option<f64>,
}

impl Default for CavitySection {
    fn default() -> Self {
        Self { omega_c_ghz: 29.7, g_per_s: None, n_max: 5, q: Some(2e4), delta_c_per_s: None, delta_c_over_g: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSection {
    /// ∫ B_c · dS over the loop (T m²); sets g from ⟨0|Φ|a⟩.
    #[serde(rename = "Bc_integral_Tm2")]
    pub bc_integral_tm2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSection {
    #[serde(rename = "Omega_per_s")]
    pub omega_per_s: f64,
    #[serde(rename = "omega_uw_GHz", default)]
    pub omega_uw_ghz: Option<f64>,
    #[serde(rename = "Delta_uw_per_s", default)]
    pub delta_uw_per_s: Option<f64>,
    #[serde(rename = "Delta_uw_over_Omega", default)]
    pub delta_uw_over_omega: Option<f64>,
}

fn default_drives() -> Vec<DriveSection> {
    vec![DriveSection { omega_per_s: 1.5e8, omega_uw_ghz: None, delta_uw_per_s: None, delta_uw_over_omega: Some(10.0) }]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub variant: Variant,
    pub switching: Switching,
    /// Trajectory samples per protocol step.
    pub samples: usize,
    /// Re-run full-model protocols at n_max + 2 and report the fidelity change.
    pub fock_check: bool,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self { variant: Variant::EffTwoVacuum, switching: Switching::Adiabatic, samples: 401, fock_check: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecoherenceSection {
    #[serde(rename = "T1_s")]
    pub t1_s: Option<f64>,
    /// Junction shunt resistance; T₁ follows from the linear rule.
    #[serde(rename = "R_ohm")]
    pub r_ohm: Option<f64>,
    /// Photon loss at κ = ω_c / Q.
    pub cavity_loss: bool,
}

impl Default for DecoherenceSection {
    fn default() -> Self {
        Self { t1_s: None, r_ohm: None, cavity_loss: true }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransferSection {
    /// (re, im); drawn from the seed when both are absent.
    pub alpha: Option<[f64; 2]>,
    pub beta: Option<[f64; 2]>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CnotReadingChoice {
    #[default]
    Resolved,
    Literal,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CnotSection {
    pub reading: CnotReadingChoice,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StarkSection {
    pub theta_start: f64,
    pub theta_stop: f64,
    pub steps: usize,
    /// Evaluates a single point at θ = γ′ t instead of the θ range.
    pub t_s: Option<f64>,
    /// Register amplitudes (re, im) for |00⟩…|11⟩; drawn from the seed when absent.
    pub state: Option<[[f64; 2]; 4]>,
}

impl Default for StarkSection {
    fn default() -> Self {
        Self { theta_start: 0.0, theta_stop: 4.0 * std::f64::consts::PI, steps: 256, t_s: None, state: None }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FeasibilitySection {
    #[serde(rename = "R_ohm")]
    pub r_ohm: Option<f64>,
    #[serde(rename = "T1_s")]
    pub t1_s: Option<f64>,
    #[serde(rename = "P_a")]
    pub p_a: Option<f64>,
    #[serde(rename = "P_c")]
    pub p_c: Option<f64>,
    /// Take P_a and P_c from a full-model Bell trajectory.
    pub from_trajectory: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Dotted path into this document, e.g. `cavity.Delta_c_over_g` or `drive[0].Omega_per_s`.
    pub path: String,
    /// Further paths set to the same value at every point.
    #[serde(default)]
    pub linked: Vec<String>,
    #[serde(default)]
    pub values: Option<Vec<f64>>,
    #[serde(default)]
    pub start: Option<f64>,
    #[serde(default)]
    pub stop: Option<f64>,
    #[serde(default)]
    pub steps: Option<usize>,
}

impl SweepSection {
    pub fn values(&self) -> CliResult<Vec<f64>> {
        match (&self.values, self.start, self.stop, self.steps) {
            (Some(v), None, None, None) => Ok(v.clone()),
            (None, Some(a), Some(b), Some(n)) => Ok(linspace(a, b, n)),
            _ => Err(CliError::config("/sweep", "give either `values` or all of `start`, `stop`, `steps`")),
        }
    }
}

/// `n` evenly spaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_experiment")]
    pub experiment: Experiment,
    #[serde(default)]
    pub squid: SquidSection,
    /// Per-SQUID device constants; overrides `squid` when present.
    #[serde(default)]
    pub squids: Option<Vec<SquidSection>>,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub cavity: CavitySection,
    #[serde(default)]
    pub coupling: Option<CouplingSection>,
    /// One entry per SQUID, or a single entry shared by all.
    #[serde(default = "default_drives")]
    pub drive: Vec<DriveSection>,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub decoherence: Option<DecoherenceSection>,
    #[serde(default)]
    pub transfer: TransferSection,
    #[serde(default)]
    pub cnot: CnotSection,
    #[serde(default)]
    pub stark: StarkSection,
    #[serde(default)]
    pub feasibility: FeasibilitySection,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    /// Not part of the config hash.
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub seed: u64,
}

fn default_experiment() -> Experiment {
    Experiment::Bell
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::from_value(Value::Object(Default::default())).expect("empty config is valid")
    }
}

/// Model selection on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelChoice {
    Effective,
    Full,
}

/// Command-line values that replace config fields before hashing.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub experiment: Option<Experiment>,
    pub model: Option<ModelChoice>,
    pub seed: Option<u64>,
}

fn pointer_of(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } => out.push_str(&format!("/{}", key.replace('~', "~0").replace('/', "~1"))),
            Segment::Enum { variant } => out.push_str(&format!("/{variant}")),
            Segment::Unknown => {}
        }
    }
    out
}

fn positive(pointer: &str, x: f64) -> CliResult<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(CliError::config(pointer, format!("must be finite and > 0, got {x}")))
    }
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json_str(&text)
    }

    pub fn from_json_str(text: &str) -> CliResult<Self> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| CliError::config("", format!("invalid JSON: {e}")))?;
        Self::from_value(value)
    }

    /// Deserializes, validates and fills defaults.
    pub fn from_value(value: Value) -> CliResult<Self> {
        let mut cfg: Self = serde_path_to_error::deserialize(value).map_err(|e| {
            let pointer = pointer_of(e.path());
            CliError::config(pointer, e.into_inner().to_string())
        })?;
        cfg.normalize();
        cfg.validate()?;
        Ok(cfg)
    }

    fn normalize(&mut self) {
        if self.cavity.g_per_s.is_none() && self.coupling.is_none() {
            self.cavity.g_per_s = Some(DEFAULT_G_PER_S);
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        let squids = self.squids.as_deref().unwrap_or(std::slice::from_ref(&self.squid));
        if squids.is_empty() || squids.len() > 3 {
            return Err(CliError::config("/squids", "between 1 and 3 entries are supported"));
        }
        let g = &self.grid;
        if g.points < 64 || !g.points.is_multiple_of(2) {
            return Err(CliError::config("/grid/points", "must be an even number >= 64"));
        }
        positive("/grid/halfwidth_Phi0", g.halfwidth_phi0)?;
        let c = &self.cavity;
        positive("/cavity/omega_c_GHz", c.omega_c_ghz)?;
        if c.n_max < 1 {
            return Err(CliError::config("/cavity/n_max", "must be >= 1"));
        }
        if let Some(q) = c.q {
            positive("/cavity/Q", q)?;
        }
        match (c.g_per_s, &self.coupling) {
            (Some(_), Some(_)) => {
                return Err(CliError::config("/coupling", "give either cavity.g_per_s or coupling.Bc_integral_Tm2"))
            }
            (Some(g), None) if !(g.is_finite() && g >= 0.0) => {
                return Err(CliError::config("/cavity/g_per_s", "must be finite and >= 0"))
            }
            _ => {}
        }
        if c.delta_c_per_s.is_some() && c.delta_c_over_g.is_some() {
            return Err(CliError::config("/cavity", "give at most one of Delta_c_per_s, Delta_c_over_g"));
        }
        if self.drive.is_empty() || self.drive.len() > 3 {
            return Err(CliError::config("/drive", "between 1 and 3 entries are supported"));
        }
        for (i, d) in self.drive.iter().enumerate() {
            let set = [d.omega_uw_ghz, d.delta_uw_per_s, d.delta_uw_over_omega].iter().filter(|x| x.is_some()).count();
            if set != 1 {
                return Err(CliError::config(
                    format!("/drive/{i}"),
                    "give exactly one of omega_uw_GHz, Delta_uw_per_s, Delta_uw_over_Omega",
                ));
            }
        }
        if self.model.samples < 2 {
            return Err(CliError::config("/model/samples", "must be >= 2"));
        }
        if let Some(d) = &self.decoherence {
            if d.t1_s.is_some() && d.r_ohm.is_some() {
                return Err(CliError::config("/decoherence", "give at most one of T1_s, R_ohm"));
            }
        }
        if self.transfer.alpha.is_some() != self.transfer.beta.is_some() {
            return Err(CliError::config("/transfer", "give both alpha and beta, or neither"));
        }
        if let Some(s) = &self.sweep {
            s.values()?;
        }
        Ok(())
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(e) = o.experiment {
            self.experiment = e;
        }
        match o.model {
            Some(ModelChoice::Full) => self.model.variant = Variant::FullRotating,
            Some(ModelChoice::Effective) if !self.model.variant.is_effective() => {
                self.model.variant = Variant::EffTwoVacuum
            }
            _ => {}
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
    }

    /// Device constants of SQUID `k`.
    pub fn squid(&self, k: usize) -> &SquidSection {
        match &self.squids {
            Some(v) => &v[k.min(v.len() - 1)],
            None => &self.squid,
        }
    }

    /// Drive of SQUID `k`; a single entry is shared.
    pub fn drive(&self, k: usize) -> &DriveSection {
        &self.drive[k.min(self.drive.len() - 1)]
    }

    /// Canonical JSON with the output section removed; object keys are sorted.
    pub fn canonical_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Value::Object(map) = &mut v {
            map.remove("output");
        }
        v.to_string()
    }

    /// SHA-256 of [`Self::canonical_json`], hex encoded.
    pub fn hash(&self) -> String {
        Sha256::digest(self.canonical_json().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Step {
    Key(String),
    Index(usize),
}

fn parse_path(path: &str) -> CliResult<Vec<Step>> {
    let bad = || CliError::config("/sweep/path", format!("malformed parameter path `{path}`"));
    let mut steps = Vec::new();
    for part in path.split('.') {
        let (key, mut rest) = match part.find('[') {
            Some(i) => (&part[..i], &part[i..]),
            None => (part, ""),
        };
        if key.is_empty() {
            return Err(bad());
        }
        steps.push(Step::Key(key.to_string()));
        while !rest.is_empty() {
            let close = rest.find(']').ok_or_else(bad)?;
            if !rest.starts_with('[') {
                return Err(bad());
            }
            steps.push(Step::Index(rest[1..close].parse().map_err(|_| bad())?));
            rest = &rest[close + 1..];
        }
    }
    Ok(steps)
}

/// Sets the numeric field at a dotted `path` of a serialized config.
///
/// Every path segment must already exist (absent options serialize as
/// null), and the target must be a number or null.
pub fn set_numeric(doc: &mut Value, path: &str, x: f64) -> CliResult<()> {
    let unresolved = |why: &str| CliError::config("/sweep/path", format!("cannot resolve `{path}`: {why}"));
    let steps = parse_path(path)?;
    let mut node = doc;
    for step in &steps {
        node = match step {
            Step::Key(k) => node.get_mut(k.as_str()).ok_or_else(|| unresolved(&format!("no field `{k}`")))?,
            Step::Index(i) => node.get_mut(*i).ok_or_else(|| unresolved(&format!("no element [{i}]")))?,
        };
    }
    let integer = node.is_u64() || node.is_i64();
    if !(node.is_number() || node.is_null()) {
        return Err(unresolved("target is not numeric"));
    }
    *node = if integer && x.fract() == 0.0 && x >= 0.0 {
        Value::from(x as u64)
    } else {
        serde_json::Number::from_f64(x).map(Value::Number).ok_or_else(|| unresolved("value is not finite"))?
    };
    Ok(())
}
