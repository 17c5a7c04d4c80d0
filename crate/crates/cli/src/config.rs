//! Experiment configuration files.
//!
//! A config is TOML with a leading `schema = "neurocart/1"` key. Omitted
//! values take the defaults of the chosen plant and controller; the fully
//! resolved config is written next to every output and parses back to the
//! same experiment.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use neurocart::control::{
    multi_link_initial_state, ControllerConfig, PidParams, RadiusRule, SimSettings, SmcParams,
};
use neurocart::dynamics::{linearize, StateVec, SystemParams};
use neurocart::lif::{Dendrites, LifParams, RateCodedConfig, LUI_MAX_SYNAPSES};
use neurocart::lqr::{lqr_gain, GainVector, LqrWeights};
use neurocart::metrics::HardwareConstants;
use neurocart::nef::{EnsembleSpec, InterceptSpec, RateRange};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

pub const SCHEMA: &str = "neurocart/1";
pub const DEFAULT_SEEDS: [u64; 5] = [0, 1, 2, 3, 4];
/// Ki of the spiking and non-spiking PID rows of the comparison.
pub const COMPARE_KI: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ControllerKind {
    Open,
    Lqr,
    Pid,
    Smc,
    #[serde(rename = "spiking-lqr-2")]
    SpikingLqr2,
    SpikingLqrLui,
    SpikingLqrEnsemble,
    SpikingPid,
}

impl ControllerKind {
    pub fn name(self) -> &'static str {
        match self {
            ControllerKind::Open => "open",
            ControllerKind::Lqr => "lqr",
            ControllerKind::Pid => "pid",
            ControllerKind::Smc => "smc",
            ControllerKind::SpikingLqr2 => "spiking-lqr-2",
            ControllerKind::SpikingLqrLui => "spiking-lqr-lui",
            ControllerKind::SpikingLqrEnsemble => "spiking-lqr-ensemble",
            ControllerKind::SpikingPid => "spiking-pid",
        }
    }

    /// Controller sub-sections this kind reads.
    pub fn sections(self) -> &'static [&'static str] {
        match self {
            ControllerKind::Open | ControllerKind::Lqr => &[],
            ControllerKind::Pid => &["pid"],
            ControllerKind::Smc => &["smc"],
            ControllerKind::SpikingLqr2 | ControllerKind::SpikingLqrLui => &["lif", "coding"],
            ControllerKind::SpikingLqrEnsemble => &["ensemble", "radius"],
            ControllerKind::SpikingPid => &["pid", "ensemble", "radius"],
        }
    }

    pub fn uses_ensemble(self) -> bool {
        matches!(
            self,
            ControllerKind::SpikingLqrEnsemble | ControllerKind::SpikingPid
        )
    }

    pub fn uses_pid(self) -> bool {
        matches!(self, ControllerKind::Pid | ControllerKind::SpikingPid)
    }

    fn rate_coded(self) -> bool {
        matches!(
            self,
            ControllerKind::SpikingLqr2 | ControllerKind::SpikingLqrLui
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantConfig {
    pub n_links: usize,
    pub cart_mass: f64,
    pub link_masses: Vec<f64>,
    pub link_lengths: Vec<f64>,
    pub gravity: f64,
}

/// Diagonal of Q in state order `x, θ1..θn, ẋ, θ̇1..θ̇n`, and R.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsConfig {
    pub q_diag: Vec<f64>,
    pub r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightPreset {
    CartpoleEnsemble,
    TwoNeuronCartpole,
    MultiLink,
}

impl WeightPreset {
    fn weights(self, n_links: usize) -> Result<LqrWeights> {
        match self {
            WeightPreset::CartpoleEnsemble | WeightPreset::TwoNeuronCartpole if n_links != 1 => {
                bail!("weights.preset: {self:?} is defined for one link, plant has {n_links}")
            }
            WeightPreset::CartpoleEnsemble => Ok(LqrWeights::cartpole_ensemble()),
            WeightPreset::TwoNeuronCartpole => Ok(LqrWeights::two_neuron_cartpole()),
            WeightPreset::MultiLink => Ok(LqrWeights::multi_link(n_links)),
        }
    }

    fn default_for(kind: ControllerKind, n_links: usize) -> Self {
        match (kind, n_links) {
            (ControllerKind::SpikingLqr2 | ControllerKind::SpikingLqrLui, 1) => {
                WeightPreset::TwoNeuronCartpole
            }
            (_, 1) => WeightPreset::CartpoleEnsemble,
            _ => WeightPreset::MultiLink,
        }
    }
}

/// Ensemble settings; radius and seed come from the radius rule and the run seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    pub n_neurons: usize,
    pub intercepts: InterceptSpec,
    pub max_rates: RateRange,
    pub tau_rc: f64,
    pub tau_ref: f64,
    pub synapse_tau: f64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        let s = EnsembleSpec::default();
        EnsembleConfig {
            n_neurons: s.n_neurons,
            intercepts: s.intercepts,
            max_rates: s.max_rates,
            tau_rc: s.tau_rc,
            tau_ref: s.tau_ref,
            synapse_tau: s.synapse_tau,
        }
    }
}

impl EnsembleConfig {
    pub fn spec(&self) -> EnsembleSpec {
        EnsembleSpec {
            n_neurons: self.n_neurons,
            intercepts: self.intercepts,
            max_rates: self.max_rates,
            tau_rc: self.tau_rc,
            tau_ref: self.tau_ref,
            synapse_tau: self.synapse_tau,
            ..EnsembleSpec::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerSpec {
    pub kind: ControllerKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pid: Option<PidParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smc: Option<SmcParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lif: Option<LifParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coding: Option<RateCodedConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EnsembleConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<RadiusRule>,
}

impl ControllerSpec {
    /// Every section the kind reads, at its default.
    pub fn defaults(kind: ControllerKind) -> Self {
        let s = kind.sections();
        let has = |name: &str| s.contains(&name);
        ControllerSpec {
            kind,
            pid: has("pid").then(|| PidParams::angle_loop(0.0)),
            smc: has("smc").then(SmcParams::default),
            lif: has("lif").then(LifParams::two_neuron),
            coding: has("coding").then(|| RateCodedConfig {
                dendrites: if kind == ControllerKind::SpikingLqrLui {
                    Dendrites::NoCartPosition
                } else {
                    Dendrites::All
                },
                ..RateCodedConfig::default()
            }),
            ensemble: has("ensemble").then(EnsembleConfig::default),
            radius: has("radius").then(RadiusRule::default),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub duration: f64,
    pub dt: f64,
    pub control_period: f64,
    /// Full initial state `x, θ1..θn, ẋ, θ̇1..θ̇n`.
    pub x0: Vec<f64>,
}

/// Classical controllers of the comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    pub pid: PidParams,
    pub smc: SmcParams,
}

impl Default for CompareConfig {
    fn default() -> Self {
        CompareConfig {
            pid: PidParams::angle_loop(COMPARE_KI),
            smc: SmcParams::default(),
        }
    }
}

/// Sweep shipped with a profile; `--axis` and `--values` override it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: String,
    pub values: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: String,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    pub seeds: Vec<u64>,
    pub plant: PlantConfig,
    pub weights: WeightsConfig,
    pub controller: ControllerSpec,
    pub sim: SimConfig,
    pub hardware: HardwareConstants,
    pub compare: CompareConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

/// Top level as written, before defaults.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    schema: String,
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    out_dir: Option<PathBuf>,
    #[serde(default)]
    seeds: Option<Vec<u64>>,
    plant: Table,
    #[serde(default)]
    weights: Option<Table>,
    controller: Table,
    #[serde(default)]
    sim: Option<Table>,
    #[serde(default)]
    hardware: Option<Table>,
    #[serde(default)]
    compare: Option<Table>,
    #[serde(default)]
    sweep: Option<SweepConfig>,
}

fn de<T: DeserializeOwned>(prefix: &str, value: Value) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let root = path == "." || path.is_empty();
        if root && prefix.is_empty() {
            anyhow!("{}", e.inner())
        } else if root {
            anyhow!("{prefix}: {}", e.inner())
        } else if prefix.is_empty() {
            anyhow!("{path}: {}", e.inner())
        } else {
            anyhow!("{prefix}.{path}: {}", e.inner())
        }
    })
}

fn to_table<T: Serialize>(value: &T) -> Table {
    match Value::try_from(value).expect("config types serialize to TOML") {
        Value::Table(t) => t,
        _ => unreachable!("structs serialize to tables"),
    }
}

/// Overlays `user` on `base`. Nested tables merge key by key unless the
/// user switches a tagged section to another `kind`, which replaces it.
fn merge(base: &mut Table, user: Table) {
    for (k, v) in user {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(u))
                if u.get("kind").is_none_or(|kind| b.get("kind") == Some(kind)) =>
            {
                merge(b, u)
            }
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

fn ensure_positive(path: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        bail!("{path}: must be > 0, got {v}")
    }
}

fn section_err(path: &str) -> impl Fn(neurocart::Error) -> anyhow::Error + '_ {
    move |e| anyhow!("{path}: {e}")
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let fallback = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("experiment");
        Self::parse(&text, fallback).with_context(|| format!("in config {}", path.display()))
    }

    /// Parses and validates a config; `fallback_name` is used when the file
    /// sets no `name`.
    pub fn parse(text: &str, fallback_name: &str) -> Result<Self> {
        let table: Table = text.parse().map_err(|e| anyhow!("syntax error: {e}"))?;
        let raw: RawConfig = de("", Value::Table(table))?;
        if raw.schema != SCHEMA {
            bail!("schema: expected \"{SCHEMA}\", got \"{}\"", raw.schema);
        }

        let n_links = match raw.plant.get("n_links") {
            None => bail!("plant: missing field `n_links`"),
            Some(v) => match v.as_integer() {
                Some(n) if n >= 1 => n as usize,
                _ => bail!("plant.n_links: must be an integer >= 1, got {v}"),
            },
        };
        let mut plant = to_table(&PlantConfig::from_params(&SystemParams::multi_link(
            n_links,
        )));
        merge(&mut plant, raw.plant);
        let plant: PlantConfig = de("plant", Value::Table(plant))?;

        let kind: ControllerKind = match raw.controller.get("kind") {
            None => bail!("controller: missing field `kind`"),
            Some(v) => de("controller.kind", v.clone())?,
        };
        for (key, value) in &raw.controller {
            if key != "kind" && value.is_table() && !kind.sections().contains(&key.as_str()) {
                bail!(
                    "controller.{key}: section not used by controller kind \"{}\"",
                    kind.name()
                );
            }
        }
        let mut controller = to_table(&ControllerSpec::defaults(kind));
        merge(&mut controller, raw.controller);
        let controller: ControllerSpec = de("controller", Value::Table(controller))?;

        let mut weights_user = raw.weights.unwrap_or_default();
        let preset = match weights_user.remove("preset") {
            Some(v) => de("weights.preset", v)?,
            None => WeightPreset::default_for(kind, n_links),
        };
        let base = preset.weights(n_links)?;
        let mut weights = to_table(&WeightsConfig {
            q_diag: base.q().diagonal().iter().copied().collect(),
            r: base.r(),
        });
        merge(&mut weights, weights_user);
        let weights: WeightsConfig = de("weights", Value::Table(weights))?;

        let mut sim_user = raw.sim.unwrap_or_default();
        if let Some(angles) = sim_user.remove("initial_angles") {
            if sim_user.contains_key("x0") {
                bail!("sim: give either `x0` or `initial_angles`, not both");
            }
            let angles: Vec<f64> = de("sim.initial_angles", angles)?;
            if angles.len() != n_links {
                bail!(
                    "sim.initial_angles: expected {n_links} angles, got {}",
                    angles.len()
                );
            }
            sim_user.insert(
                "x0".into(),
                Value::try_from(StateVec::from_angles(&angles).as_slice())?,
            );
        }
        let defaults = SimSettings::default();
        let mut sim = to_table(&SimConfig {
            duration: defaults.duration,
            dt: defaults.dt,
            control_period: if kind.rate_coded() {
                5e-3
            } else {
                defaults.control_period
            },
            x0: multi_link_initial_state(n_links).as_slice().to_vec(),
        });
        merge(&mut sim, sim_user);
        let sim: SimConfig = de("sim", Value::Table(sim))?;

        let mut hardware = to_table(&HardwareConstants::default());
        merge(&mut hardware, raw.hardware.unwrap_or_default());
        let hardware: HardwareConstants = de("hardware", Value::Table(hardware))?;

        let mut compare = to_table(&CompareConfig::default());
        merge(&mut compare, raw.compare.unwrap_or_default());
        let compare: CompareConfig = de("compare", Value::Table(compare))?;

        let cfg = ExperimentConfig {
            schema: raw.schema,
            name: raw.name.unwrap_or_else(|| fallback_name.to_string()),
            out_dir: raw.out_dir,
            seeds: raw.seeds.unwrap_or_else(|| DEFAULT_SEEDS.to_vec()),
            plant,
            weights,
            controller,
            sim,
            hardware,
            compare,
            sweep: raw.sweep,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// The resolved config as TOML; parsing it gives back `self`.
    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.plant;
        let n = p.n_links;
        if n == 0 {
            bail!("plant.n_links: must be >= 1, got 0");
        }
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            bail!("name: must be a nonempty file name, got {:?}", self.name);
        }
        ensure_positive("plant.cart_mass", p.cart_mass)?;
        for (field, values) in [
            ("link_masses", &p.link_masses),
            ("link_lengths", &p.link_lengths),
        ] {
            if values.len() != n {
                bail!(
                    "plant.{field}: expected {n} entries for n_links = {n}, got {}",
                    values.len()
                );
            }
            for (i, v) in values.iter().enumerate() {
                ensure_positive(&format!("plant.{field}[{i}]"), *v)?;
            }
        }
        if !p.gravity.is_finite() {
            bail!("plant.gravity: must be finite, got {}", p.gravity);
        }

        let dim = 2 * n + 2;
        if self.weights.q_diag.len() != dim {
            bail!(
                "weights.q_diag: expected {dim} entries, got {}",
                self.weights.q_diag.len()
            );
        }
        for (i, q) in self.weights.q_diag.iter().enumerate() {
            if !(*q >= 0.0 && q.is_finite()) {
                bail!("weights.q_diag[{i}]: must be >= 0, got {q}");
            }
        }
        ensure_positive("weights.r", self.weights.r)?;

        let s = &self.sim;
        ensure_positive("sim.duration", s.duration)?;
        ensure_positive("sim.dt", s.dt)?;
        ensure_positive("sim.control_period", s.control_period)?;
        let ratio = (s.control_period / s.dt).round();
        if ratio < 1.0 || (ratio * s.dt - s.control_period).abs() > 1e-9 * s.control_period {
            bail!(
                "sim.control_period: must be a whole multiple of sim.dt ({}), got {}",
                s.dt,
                s.control_period
            );
        }
        if s.x0.len() != dim {
            bail!("sim.x0: expected {dim} entries, got {}", s.x0.len());
        }
        if let Some((i, v)) = s.x0.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            bail!("sim.x0[{i}]: must be finite, got {v}");
        }
        if self.seeds.is_empty() {
            bail!("seeds: need at least one seed");
        }

        let c = &self.controller;
        if let Some(pid) = &c.pid {
            pid.validate().map_err(section_err("controller.pid"))?;
        }
        if let Some(smc) = &c.smc {
            smc.validate().map_err(section_err("controller.smc"))?;
        }
        if let Some(lif) = &c.lif {
            lif.validate().map_err(section_err("controller.lif"))?;
        }
        if let Some(coding) = &c.coding {
            coding
                .validate()
                .map_err(section_err("controller.coding"))?;
            if c.kind == ControllerKind::SpikingLqrLui
                && coding.dendrites.count(n) > LUI_MAX_SYNAPSES
            {
                bail!(
                    "controller.coding.dendrites: the Lu.i board takes at most {LUI_MAX_SYNAPSES} inputs, {:?} needs {} for {n} link(s)",
                    coding.dendrites,
                    coding.dendrites.count(n)
                );
            }
        }
        if let Some(e) = &c.ensemble {
            e.intercepts
                .validate()
                .map_err(section_err("controller.ensemble.intercepts"))?;
            e.spec()
                .validate()
                .map_err(section_err("controller.ensemble"))?;
        }
        match c.radius {
            Some(RadiusRule::Fixed { radius }) => {
                ensure_positive("controller.radius.radius", radius)?
            }
            Some(RadiusRule::Calibrated { factor }) => {
                ensure_positive("controller.radius.factor", factor)?
            }
            None => {}
        }
        self.compare
            .pid
            .validate()
            .map_err(section_err("compare.pid"))?;
        self.compare
            .smc
            .validate()
            .map_err(section_err("compare.smc"))?;
        self.hardware.validate().map_err(section_err("hardware"))?;
        Ok(())
    }

    pub fn system_params(&self) -> SystemParams {
        let p = &self.plant;
        SystemParams {
            cart_mass: p.cart_mass,
            link_masses: p.link_masses.clone(),
            link_lengths: p.link_lengths.clone(),
            gravity: p.gravity,
        }
    }

    pub fn lqr_weights(&self) -> Result<LqrWeights> {
        LqrWeights::diagonal(&self.weights.q_diag, self.weights.r).map_err(section_err("weights"))
    }

    pub fn gain(&self) -> Result<GainVector> {
        lqr_gain(&linearize(&self.system_params()), &self.lqr_weights()?)
            .map_err(|e| anyhow!("LQR gain: {e}"))
    }

    pub fn settings(&self) -> SimSettings {
        SimSettings {
            duration: self.sim.duration,
            dt: self.sim.dt,
            control_period: self.sim.control_period,
        }
    }

    pub fn x0(&self) -> StateVec {
        StateVec::from_vec(self.sim.x0.clone())
    }

    /// The library controller this config describes.
    pub fn controller(&self) -> Result<ControllerConfig> {
        let c = &self.controller;
        let missing = |s: &str| anyhow!("controller.{s}: missing for kind \"{}\"", c.kind.name());
        Ok(match c.kind {
            ControllerKind::Open => ControllerConfig::Open,
            ControllerKind::Lqr => ControllerConfig::Lqr { gain: self.gain()? },
            ControllerKind::Pid => ControllerConfig::Pid {
                pid: c.pid.ok_or_else(|| missing("pid"))?,
            },
            ControllerKind::Smc => ControllerConfig::Smc {
                smc: c.smc.ok_or_else(|| missing("smc"))?,
            },
            ControllerKind::SpikingLqr2 => ControllerConfig::SpikingLqrTwoNeuron {
                gain: self.gain()?,
                lif: c.lif.ok_or_else(|| missing("lif"))?,
                coding: c.coding.ok_or_else(|| missing("coding"))?,
            },
            ControllerKind::SpikingLqrLui => ControllerConfig::SpikingLqrLui {
                gain: self.gain()?,
                lif: c.lif.ok_or_else(|| missing("lif"))?,
                coding: c.coding.ok_or_else(|| missing("coding"))?,
            },
            ControllerKind::SpikingLqrEnsemble => ControllerConfig::SpikingLqrEnsemble {
                gain: self.gain()?,
                ensemble: c
                    .ensemble
                    .as_ref()
                    .ok_or_else(|| missing("ensemble"))?
                    .spec(),
                radius: c.radius.ok_or_else(|| missing("radius"))?,
            },
            ControllerKind::SpikingPid => ControllerConfig::SpikingPid {
                pid: c.pid.ok_or_else(|| missing("pid"))?,
                ensemble: c
                    .ensemble
                    .as_ref()
                    .ok_or_else(|| missing("ensemble"))?
                    .spec(),
                radius: c.radius.ok_or_else(|| missing("radius"))?,
            },
        })
    }

    /// Output directory: `--out`, then `out_dir`, then `$NEUROCART_OUT`,
    /// then `./out`; artifacts go under `<root>/<name>`.
    pub fn output_dir(&self, flag: Option<&Path>) -> PathBuf {
        let root = flag
            .map(Path::to_path_buf)
            .or_else(|| self.out_dir.clone())
            .or_else(|| std::env::var_os(crate::OUT_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"));
        root.join(&self.name)
    }
}

impl PlantConfig {
    pub fn from_params(p: &SystemParams) -> Self {
        PlantConfig {
            n_links: p.n_links(),
            cart_mass: p.cart_mass,
            link_masses: p.link_masses.clone(),
            link_lengths: p.link_lengths.clone(),
            gravity: p.gravity,
        }
    }
}

/// Parses `0,1,2` and inclusive ranges such as `0-4`.
pub fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    let mut seeds = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (u64, u64) = (a.trim().parse()?, b.trim().parse()?);
                if a > b {
                    bail!("--seeds: empty range {part}");
                }
                seeds.extend(a..=b);
            }
            None => seeds.push(
                part.parse()
                    .with_context(|| format!("--seeds: bad seed {part:?}"))?,
            ),
        }
    }
    if seeds.is_empty() {
        bail!("--seeds: no seeds given");
    }
    Ok(seeds)
}
