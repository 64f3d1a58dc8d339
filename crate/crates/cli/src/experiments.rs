//! Named experiments and their result records.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use squidcav_core::feasibility::{feasibility_report, FeasibilityInputs, FeasibilityReport};
use squidcav_core::model::{Basis, Variant};
use squidcav_core::protocols::{
    cnot_report, cnot_unitary, generate_bell, stark_report, swap_via_ancilla, transfer_state, CnotReading,
    ProtocolOutcome, ProtocolReport,
};
use squidcav_core::scalar::Complex;
use squidcav_core::{SystemModel, Trajectory};

use crate::config::{linspace, CnotReadingChoice, Experiment, ExperimentConfig};
use crate::error::{CliError, CliResult, Context};
use crate::output::{num, write_json, write_tables, Table};
use crate::setup::{Setup, SpectrumSummary};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
/// Fidelity change at n_max + 2 above which the truncation is reported as unconverged.
pub const FOCK_CHECK_LIMIT: f64 = 1e-3;

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", content = "data", rename_all = "snake_case")]
pub enum Payload {
    Protocol(ProtocolReport),
    Feasibility(FeasibilityReport),
    Spectrum(Vec<SpectrumSummary>),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Swept {
    pub path: String,
    pub linked: Vec<String>,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ResultRecord {
    pub config_hash: String,
    pub experiment: Experiment,
    pub version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub swept: Option<Swept>,
    pub payload: Payload,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub setup: Option<Setup>,
    pub warnings: Vec<String>,
    /// Wall-clock time; left out of written files so they stay reproducible.
    #[serde(skip)]
    pub duration_s: f64,
}

impl ResultRecord {
    pub fn protocol(&self) -> Option<&ProtocolReport> {
        match &self.payload {
            Payload::Protocol(r) => Some(r),
            _ => None,
        }
    }
}

/// A record, the tables belonging to it and any failed verification.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub record: ResultRecord,
    pub tables: Vec<Table>,
    pub failure: Option<String>,
}

impl RunOutput {
    /// Writes `<experiment>.json` and the tables under `dir`.
    pub fn write(&self, dir: &Path) -> CliResult<Vec<PathBuf>> {
        let json = dir.join(format!("{}.json", self.record.experiment.stem()));
        write_json(&json, &self.record)?;
        let mut paths = vec![json];
        paths.extend(write_tables(dir, &self.tables)?);
        Ok(paths)
    }
}

struct Parts {
    payload: Payload,
    setup: Option<Setup>,
    tables: Vec<Table>,
    failure: Option<String>,
    warnings: Vec<String>,
}

impl Parts {
    fn new(payload: Payload, setup: Option<Setup>) -> Self {
        let warnings = setup.as_ref().map(|s| s.warnings.clone()).unwrap_or_default();
        Self { payload, setup, tables: Vec::new(), failure: None, warnings }
    }
}

/// Runs the experiment named in `cfg`.
pub fn run_experiment(cfg: &ExperimentConfig) -> CliResult<RunOutput> {
    let start = Instant::now();
    let parts = match cfg.experiment {
        Experiment::Bell | Experiment::Transfer => register_protocol(cfg)?,
        Experiment::Cnot => cnot(cfg)?,
        Experiment::Swap => swap(cfg)?,
        Experiment::StarkSweep => stark(cfg)?,
        Experiment::Spectrum => spectrum(cfg)?,
        Experiment::Feasibility => feasibility(cfg)?,
    };
    for w in &parts.warnings {
        log::warn!("{}: {w}", cfg.experiment);
    }
    let record = ResultRecord {
        config_hash: cfg.hash(),
        experiment: cfg.experiment,
        version: VERSION.to_string(),
        swept: None,
        payload: parts.payload,
        setup: parts.setup,
        warnings: parts.warnings,
        duration_s: start.elapsed().as_secs_f64(),
    };
    Ok(RunOutput { record, tables: parts.tables, failure: parts.failure })
}

/// Standard-normal complex amplitudes, normalized, from `seed`.
pub fn random_amplitudes(seed: u64, n: usize) -> Vec<Complex<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v: Vec<Complex<f64>> =
        (0..n).map(|_| Complex::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

fn pair(p: [f64; 2]) -> Complex<f64> {
    Complex::new(p[0], p[1])
}

fn require_identical(setup: &Setup, what: &str) -> CliResult<()> {
    let first = setup.eff(0);
    if setup.squids.iter().any(|s| s.effective != *first) {
        return Err(CliError::config("/drive", format!("{what} assumes identical SQUIDs")));
    }
    Ok(())
}

fn trajectory_table(file: String, traj: &Trajectory, basis: &Basis) -> Table {
    let three_level = basis.levels_per_squid() == 3;
    let cavity = basis.has_cavity();
    let mut header = vec!["t_s", "pop_00", "pop_01", "pop_10", "pop_11"];
    if three_level {
        header.push("pop_a_total");
    }
    if cavity {
        header.push("n_photon");
    }
    if traj.fidelity_vs_target.is_some() {
        header.push("fidelity_vs_target");
    }
    let mut t = Table::new(file, &header);
    for (k, (time, obs)) in traj.times.iter().zip(&traj.observables).enumerate() {
        let mut row = vec![num(*time)];
        row.extend(obs.logical.iter().map(|&p| num(p)));
        if three_level {
            row.push(num(obs.pop_a_total));
        }
        if cavity {
            row.push(num(obs.n_photon));
        }
        if let Some(f) = &traj.fidelity_vs_target {
            row.push(num(f[k]));
        }
        t.push(row);
    }
    t
}

fn register_protocol(cfg: &ExperimentConfig) -> CliResult<Parts> {
    let setup = Setup::resolve(cfg, 2)?;
    let opts = setup.run_options(cfg)?;
    let eff = *setup.eff(0);
    let (alpha, beta) = match (cfg.transfer.alpha, cfg.transfer.beta) {
        (Some(a), Some(b)) => (pair(a), pair(b)),
        _ => {
            let v = random_amplitudes(cfg.seed, 2);
            (v[0], v[1])
        }
    };
    let exp = cfg.experiment;
    let run = |m: &SystemModel| -> CliResult<ProtocolOutcome<f64>> {
        let out = match exp {
            Experiment::Transfer => transfer_state(m, &eff, alpha, beta, &opts),
            _ => generate_bell(m, &eff, &opts),
        };
        out.context(|| format!("{exp} on {}", m.variant))
    };
    let model = setup.model(cfg, cfg.cavity.n_max)?;
    let outcome = run(&model)?;
    let mut report = outcome.report;
    let mut warnings = setup.warnings.clone();
    warnings.extend(model.warnings.iter().cloned());
    if cfg.model.fock_check && model.basis.has_cavity() {
        let larger = setup.model(cfg, cfg.cavity.n_max + 2)?;
        let delta = (run(&larger)?.report.fidelity - report.fidelity).abs();
        report.extras.insert("fock_check_delta_fidelity".into(), delta);
        if delta > FOCK_CHECK_LIMIT {
            warnings.push(format!(
                "Fock truncation not converged: fidelity changes by {delta:.3e} at n_max = {}",
                cfg.cavity.n_max + 2
            ));
        }
    }
    let mut tables = Vec::new();
    if let (Some(traj), Some(basis)) = (&outcome.trajectory, &outcome.basis) {
        tables.push(trajectory_table(format!("{}_trajectory.csv", exp.stem()), traj, basis));
    }
    let mut parts = Parts::new(Payload::Protocol(report), Some(setup));
    parts.warnings = warnings;
    parts.tables = tables;
    Ok(parts)
}

fn cnot(cfg: &ExperimentConfig) -> CliResult<Parts> {
    let setup = Setup::resolve(cfg, 2)?;
    require_identical(&setup, "cnot")?;
    let reading = match cfg.cnot.reading {
        CnotReadingChoice::Resolved => CnotReading::resolved(),
        CnotReadingChoice::Literal => CnotReading::literal(),
    };
    let eff = setup.eff(0);
    let report = cnot_report(eff, &reading).context(|| "cnot".into())?;
    let failure = cnot_unitary(eff, &reading).err().map(|e| match e {
        squidcav_core::Error::Verification(m) => m,
        other => other.to_string(),
    });
    let mut parts = Parts::new(Payload::Protocol(report), Some(setup));
    parts.failure = failure;
    Ok(parts)
}

fn swap(cfg: &ExperimentConfig) -> CliResult<Parts> {
    let setup = Setup::resolve(cfg, 3)?;
    require_identical(&setup, "swap")?;
    let (report, _) = swap_via_ancilla(setup.eff(0)).context(|| "swap".into())?;
    Ok(Parts::new(Payload::Protocol(report), Some(setup)))
}

fn stark(cfg: &ExperimentConfig) -> CliResult<Parts> {
    let setup = Setup::resolve(cfg, 2)?;
    require_identical(&setup, "stark-sweep")?;
    let eff = setup.eff(0);
    let s = &cfg.stark;
    let thetas = match s.t_s {
        Some(t) => vec![eff.gamma_prime * t],
        None => linspace(s.theta_start, s.theta_stop, s.steps),
    };
    let alphas: [Complex<f64>; 4] = match s.state {
        Some(st) => st.map(pair),
        None => random_amplitudes(cfg.seed, 4).try_into().expect("four amplitudes"),
    };
    let (report, rows) = stark_report(&alphas, &thetas, eff).context(|| "stark-sweep (/stark)".into())?;
    let mut table = Table::new("stark_sweep.csv", &["theta", "Pe_closed_form", "Pe_oracle", "abs_diff"]);
    for r in &rows {
        table.push(vec![num(r.theta), num(r.closed_form), num(r.oracle), num(r.abs_diff())]);
    }
    let mut parts = Parts::new(Payload::Protocol(report), Some(setup));
    parts.tables.push(table);
    Ok(parts)
}

const LEVEL_LABELS: [&str; 3] = ["0", "1", "a"];

fn spectrum(cfg: &ExperimentConfig) -> CliResult<Parts> {
    let n = cfg.squids.as_ref().map_or(1, Vec::len);
    let mut summaries = Vec::new();
    let mut tables = Vec::new();
    let mut warnings = Vec::new();
    for k in 0..n {
        let s = crate::setup::solve_spectrum(cfg, k)?;
        if !s.lambda_check.valid {
            warnings.push(format!("SQUID {}: level map is not a Lambda configuration", k + 1));
        }
        let map = s.level_map;
        let mut levels = Table::new(format!("squid{}_levels.csv", k + 1), &["level", "index", "E_over_h_GHz"]);
        for i in 0..s.energies.len() {
            let label = [map.zero, map.one, map.a].iter().position(|&j| j == i).map_or("-", |p| LEVEL_LABELS[p]);
            levels.push(vec![label.to_string(), i.to_string(), num(s.level_ghz(i))]);
        }
        let mut flux = Table::new(format!("squid{}_flux_me.csv", k + 1), &["i", "j", "flux_me_Wb"]);
        for (i, row) in s.flux_elements.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                flux.push(vec![LEVEL_LABELS[i].into(), LEVEL_LABELS[j].into(), num(*x)]);
            }
        }
        tables.extend([levels, flux]);
        summaries.push(SpectrumSummary::new(k, &s));
    }
    let mut parts = Parts::new(Payload::Spectrum(summaries), None);
    parts.tables = tables;
    parts.warnings = warnings;
    Ok(parts)
}

fn feasibility(cfg: &ExperimentConfig) -> CliResult<Parts> {
    let f = &cfg.feasibility;
    if f.from_trajectory && (f.p_a.is_some() || f.p_c.is_some()) {
        return Err(CliError::config("/feasibility", "give P_a/P_c or from_trajectory, not both"));
    }
    if f.t1_s.is_some() && f.r_ohm.is_some() {
        return Err(CliError::config("/feasibility", "give at most one of T1_s, R_ohm"));
    }
    let setup = Setup::resolve(cfg, if f.from_trajectory { 2 } else { 1 })?;
    let mut inputs = FeasibilityInputs::new(setup.omega_c, *setup.eff(0));
    inputs.resistance = f.r_ohm;
    inputs.t1 = f.t1_s;
    inputs.quality_factor = cfg.cavity.q;
    inputs.p_a = f.p_a;
    inputs.p_c = f.p_c;
    let mut warnings = setup.warnings.clone();
    if f.from_trajectory {
        let mut full = cfg.clone();
        full.model.variant = Variant::FullRotating;
        let model = setup.model(&full, cfg.cavity.n_max)?;
        let opts = setup.run_options(&full)?;
        let out = generate_bell(&model, setup.eff(0), &opts).context(|| "feasibility trajectory".into())?;
        let peaks = out.report.peak_populations.expect("full model records peaks");
        inputs.p_a = Some(peaks.p_a);
        inputs.p_c = Some(peaks.n_photon);
        inputs.populations_measured = true;
        warnings.extend(model.warnings.iter().cloned());
    }
    let report = feasibility_report(&inputs).context(|| "feasibility (/feasibility)".into())?;
    let mut parts = Parts::new(Payload::Feasibility(report), Some(setup));
    parts.warnings = warnings;
    Ok(parts)
}

/// Flattens a serializable value into `(dotted key, scalar)` rows.
pub fn flatten(value: &serde_json::Value) -> Vec<(String, String)> {
    fn walk(prefix: &str, v: &serde_json::Value, out: &mut Vec<(String, String)>) {
        match v {
            serde_json::Value::Object(m) => {
                for (k, x) in m {
                    let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    walk(&key, x, out);
                }
            }
            serde_json::Value::Array(a) => {
                for (i, x) in a.iter().enumerate() {
                    walk(&format!("{prefix}[{i}]"), x, out);
                }
            }
            serde_json::Value::Number(n) => out.push((prefix.to_string(), match n.as_f64() {
                Some(x) if !n.is_u64() && !n.is_i64() => format!("{x:.6e}"),
                _ => n.to_string(),
            })),
            serde_json::Value::String(s) => out.push((prefix.to_string(), s.clone())),
            other => out.push((prefix.to_string(), other.to_string())),
        }
    }
    let mut out = Vec::new();
    walk("", value, &mut out);
    out
}

/// Two-column aligned table of every field.
pub fn aligned_table(value: &impl Serialize) -> String {
    let rows = flatten(&serde_json::to_value(value).expect("serializes"));
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    rows.iter().map(|(k, v)| format!("{k:<width$}  {v}\n")).collect()
}
