//! Run configuration: a subcommand, an output name and a parameter block.

use std::path::{Path, PathBuf};

use aowqed_core::cascade::RampProtocol;
use aowqed_core::dynamics1d::{BoundStateGrid, EmitterSpec, PulseSpec, StaticLattice, TransferScanSpec};
use aowqed_core::floquet1d::{LatticeSpec1D, MapAxis, DEFAULT_K_POINTS};
use aowqed_core::floquet2d::{ContourGrid, LatticeSpec2D};
use aowqed_core::scales::MaterialSpec;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

const BUILTIN_MATERIALS: &str = include_str!("../data/materials.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subcommand {
    Scales,
    Bands1d,
    Rates1d,
    Dmap,
    DecaySim,
    Entangle,
    Conveyor,
    Bands2d,
    Emission2d,
    Corrmap,
}

impl Subcommand {
    pub fn as_str(self) -> &'static str {
        match self {
            Subcommand::Scales => "scales",
            Subcommand::Bands1d => "bands1d",
            Subcommand::Rates1d => "rates1d",
            Subcommand::Dmap => "dmap",
            Subcommand::DecaySim => "decay-sim",
            Subcommand::Entangle => "entangle",
            Subcommand::Conveyor => "conveyor",
            Subcommand::Bands2d => "bands2d",
            Subcommand::Emission2d => "emission2d",
            Subcommand::Corrmap => "corrmap",
        }
    }
}

/// Evenly spaced values including both ends, or an explicit list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Sweep {
    Range(Range),
    Values(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub from: f64,
    pub to: f64,
    pub points: usize,
}

impl Sweep {
    pub fn range(from: f64, to: f64, points: usize) -> Self {
        Sweep::Range(Range { from, to, points })
    }

    pub fn values(&self) -> Vec<f64> {
        match self {
            Sweep::Values(v) => v.clone(),
            Sweep::Range(r) if r.points == 1 => vec![r.from],
            Sweep::Range(r) => (0..r.points)
                .map(|i| r.from + (r.to - r.from) * i as f64 / (r.points - 1) as f64)
                .collect(),
        }
    }

    pub fn check(&self, field: &str) -> Result<(), String> {
        let values = self.values();
        if values.is_empty() {
            return Err(format!("{field}: sweep is empty"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(format!("{field}: sweep contains a non-finite value"));
        }
        Ok(())
    }
}

fn default_k_points() -> usize {
    DEFAULT_K_POINTS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalesRow {
    pub material: String,
    pub wavelength_um: f64,
}

/// Recoil-unit conversion for (material, wavelength) pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalesTable {
    /// Materials file; the shipped table when absent.
    #[serde(default)]
    pub materials: Option<PathBuf>,
    pub rows: Vec<ScalesRow>,
    /// Emitter coupling `g_0/2π` in GHz, to report `g_0/Ω_r` and `Γ_0`.
    #[serde(default)]
    pub coupling_ghz: Option<f64>,
}

/// Slow-light miniband of a static lattice against its depth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinibandScan {
    #[serde(default)]
    pub materials: Option<PathBuf>,
    pub material: String,
    pub lattice_period_um: f64,
    pub acoustic_frequency_ghz: f64,
    /// `V_st/h` in GHz.
    pub depths_ghz: Sweep,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ScalesParams {
    Table(ScalesTable),
    Miniband(MinibandScan),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bands1dParams {
    pub lattice: LatticeSpec1D,
    #[serde(default = "default_k_points")]
    pub k_points: usize,
    /// Mark resonances at this detuning.
    #[serde(default)]
    pub detuning: Option<f64>,
    /// Only branches with quasi-energies inside this window are written.
    pub energy_window: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    VA,
    Omega,
    Detuning,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rates1dParams {
    pub lattice: LatticeSpec1D,
    pub detuning: f64,
    pub sweep: SweepParameter,
    pub values: Sweep,
    /// `g_0/Ω_r`; only used for the Markov-validity check and absolute rates.
    #[serde(default)]
    pub coupling: f64,
    #[serde(default = "default_k_points")]
    pub k_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DmapParams {
    pub axis: MapAxis,
    pub fixed: f64,
    pub detunings: Sweep,
    pub parameters: Sweep,
    #[serde(default = "default_k_points")]
    pub k_points: usize,
    #[serde(default)]
    pub coupling: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Domain {
    /// Grid centre; the first emitter when absent.
    #[serde(default)]
    pub centre: Option<f64>,
    pub half_width: f64,
    pub dx: f64,
    #[serde(default)]
    pub absorber: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuasiStaticSpec {
    pub table_points: usize,
    pub v_a_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Snapshots {
    pub interval: f64,
    #[serde(default = "one")]
    pub decimation: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecaySimParams {
    pub emitter: EmitterSpec,
    #[serde(default)]
    pub pulses: Vec<PulseSpec>,
    #[serde(default)]
    pub statics: Vec<StaticLattice>,
    pub domain: Domain,
    pub duration: f64,
    /// Fixed step; `0.45/max|H|` when absent.
    #[serde(default)]
    pub dt: Option<f64>,
    pub record_interval: f64,
    /// Compare with the Markovian model driven by tabulated Floquet rates.
    #[serde(default)]
    pub quasistatic: Option<QuasiStaticSpec>,
    /// Compare with the Born-Markov and effective-mass superlattice rates.
    #[serde(default)]
    pub superlattice_rates: bool,
    /// Fit an exponential rate to the exact population on this window.
    #[serde(default)]
    pub fit_window: Option<[f64; 2]>,
    #[serde(default)]
    pub snapshots: Option<Snapshots>,
}

/// Time-dependent switch-on of the acoustic wave under continuous drive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntangleRamp {
    pub protocol: RampProtocol,
}

/// Separation-averaged steady-state concurrence over detuning and `V_a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntangleMap {
    pub omega: f64,
    pub coupling: f64,
    pub gamma_ng: f64,
    pub rabi_over_gamma: f64,
    pub detunings: Sweep,
    pub potentials: Sweep,
    pub separations: Sweep,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum EntangleParams {
    Ramp(EntangleRamp),
    Map(EntangleMap),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FullModel {
    pub domain: Domain,
    #[serde(default)]
    pub dt: Option<f64>,
}

/// Two emitters and one gaussian pulse: moving-cavity model, optionally
/// against the full model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConveyorTransfer {
    pub pulse: PulseSpec,
    pub separation: f64,
    pub coupling: f64,
    /// Emitter detuning; the lowest bound-state energy when absent.
    #[serde(default)]
    pub detuning: Option<f64>,
    #[serde(default)]
    pub bound_grid: BoundStateGrid,
    pub cavity_dt: f64,
    /// Run length; until the pulse centre is as far past the receiver
    /// as it started before the sender when absent.
    #[serde(default)]
    pub duration: Option<f64>,
    pub record_interval: f64,
    #[serde(default)]
    pub full_model: Option<FullModel>,
}

/// Final transfer over pulse amplitudes and widths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConveyorScan {
    pub spec: TransferScanSpec,
    pub potentials: Sweep,
    pub widths: Sweep,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ConveyorParams {
    Transfer(ConveyorTransfer),
    Scan(ConveyorScan),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bands2dParams {
    pub lattice: LatticeSpec2D,
    /// Sheet samples per axis over the first zone.
    pub k_points: usize,
    #[serde(default)]
    pub detuning: Option<f64>,
    #[serde(default)]
    pub contour_grid: ContourGrid,
    /// Also write the polar emission pattern with this many bins.
    #[serde(default)]
    pub polar_bins: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Emission2dParams {
    pub lattice: LatticeSpec2D,
    pub detuning: f64,
    /// `g` with `λ = 1`.
    pub coupling: f64,
    pub bins: usize,
    #[serde(default)]
    pub contour_grid: ContourGrid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Radial {
    /// Direction of `R` in radians.
    pub angle: f64,
    pub distances: Sweep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrmapParams {
    pub lattice: LatticeSpec2D,
    pub detuning: f64,
    pub xs: Sweep,
    pub ys: Sweep,
    #[serde(default)]
    pub gamma_ng: f64,
    #[serde(default)]
    pub contour_grid: ContourGrid,
    #[serde(default)]
    pub radial: Option<Radial>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Job {
    Scales(ScalesParams),
    Bands1d(Bands1dParams),
    Rates1d(Rates1dParams),
    Dmap(DmapParams),
    DecaySim(DecaySimParams),
    Entangle(EntangleParams),
    Conveyor(ConveyorParams),
    Bands2d(Bands2dParams),
    Emission2d(Emission2dParams),
    Corrmap(CorrmapParams),
}

impl Job {
    pub fn subcommand(&self) -> Subcommand {
        match self {
            Job::Scales(_) => Subcommand::Scales,
            Job::Bands1d(_) => Subcommand::Bands1d,
            Job::Rates1d(_) => Subcommand::Rates1d,
            Job::Dmap(_) => Subcommand::Dmap,
            Job::DecaySim(_) => Subcommand::DecaySim,
            Job::Entangle(_) => Subcommand::Entangle,
            Job::Conveyor(_) => Subcommand::Conveyor,
            Job::Bands2d(_) => Subcommand::Bands2d,
            Job::Emission2d(_) => Subcommand::Emission2d,
            Job::Corrmap(_) => Subcommand::Corrmap,
        }
    }

    pub fn params_json(&self) -> Value {
        let v = match self {
            Job::Scales(p) => serde_json::to_value(p),
            Job::Bands1d(p) => serde_json::to_value(p),
            Job::Rates1d(p) => serde_json::to_value(p),
            Job::Dmap(p) => serde_json::to_value(p),
            Job::DecaySim(p) => serde_json::to_value(p),
            Job::Entangle(p) => serde_json::to_value(p),
            Job::Conveyor(p) => serde_json::to_value(p),
            Job::Bands2d(p) => serde_json::to_value(p),
            Job::Emission2d(p) => serde_json::to_value(p),
            Job::Corrmap(p) => serde_json::to_value(p),
        };
        v.expect("parameter blocks serialize to JSON")
    }

    fn parse(subcommand: Subcommand, params: Value) -> Result<Self, CliError> {
        Ok(match subcommand {
            Subcommand::Scales => {
                let (m, body) = mode(params)?;
                Job::Scales(match m.as_str() {
                    "table" => ScalesParams::Table(typed(body)?),
                    "miniband" => ScalesParams::Miniband(typed(body)?),
                    other => return Err(unknown_mode(other, "table, miniband")),
                })
            }
            Subcommand::Bands1d => Job::Bands1d(typed(params)?),
            Subcommand::Rates1d => Job::Rates1d(typed(params)?),
            Subcommand::Dmap => Job::Dmap(typed(params)?),
            Subcommand::DecaySim => Job::DecaySim(typed(params)?),
            Subcommand::Entangle => {
                let (m, body) = mode(params)?;
                Job::Entangle(match m.as_str() {
                    "ramp" => EntangleParams::Ramp(typed(body)?),
                    "map" => EntangleParams::Map(typed(body)?),
                    other => return Err(unknown_mode(other, "ramp, map")),
                })
            }
            Subcommand::Conveyor => {
                let (m, body) = mode(params)?;
                Job::Conveyor(match m.as_str() {
                    "transfer" => ConveyorParams::Transfer(typed(body)?),
                    "scan" => ConveyorParams::Scan(typed(body)?),
                    other => return Err(unknown_mode(other, "transfer, scan")),
                })
            }
            Subcommand::Bands2d => Job::Bands2d(typed(params)?),
            Subcommand::Emission2d => Job::Emission2d(typed(params)?),
            Subcommand::Corrmap => Job::Corrmap(typed(params)?),
        })
    }
}

/// Split `{"mode": m, ...}` into `m` and the remaining fields.
fn mode(params: Value) -> Result<(String, Value), CliError> {
    let schema = |message: &str| CliError::Schema {
        path: "params.mode".into(),
        message: message.into(),
    };
    let Value::Object(mut fields) = params else {
        return Err(CliError::Schema {
            path: "params".into(),
            message: "expected an object".into(),
        });
    };
    let m = match fields.remove("mode") {
        Some(Value::String(m)) => m,
        Some(_) => return Err(schema("expected a string")),
        None => return Err(schema("missing field `mode`")),
    };
    Ok((m, Value::Object(fields)))
}

fn unknown_mode(mode: &str, expected: &str) -> CliError {
    CliError::Schema {
        path: "params.mode".into(),
        message: format!("unknown mode `{mode}`, expected one of {expected}"),
    }
}

fn typed<T: DeserializeOwned>(params: Value) -> Result<T, CliError> {
    serde_path_to_error::deserialize(params).map_err(|e| {
        let inner = e.path().to_string();
        let path = if inner == "." { "params".to_string() } else { format!("params.{inner}") };
        CliError::Schema {
            path,
            message: e.into_inner().to_string(),
        }
    })
}

/// Top-level keys of a config file.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    subcommand: Option<Subcommand>,
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    out: Option<PathBuf>,
    #[serde(default)]
    params: Option<Value>,
}

/// A fully explicit run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub name: String,
    pub out: Option<PathBuf>,
    pub preset: Option<String>,
    pub job: Job,
}

impl RunConfig {
    pub fn new(name: &str, job: Job) -> Self {
        Self {
            name: name.to_string(),
            out: None,
            preset: None,
            job,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let mut de = serde_json::Deserializer::from_str(text);
        let raw: RawConfig = serde_path_to_error::deserialize(&mut de).map_err(|e| CliError::Schema {
            path: e.path().to_string(),
            message: e.into_inner().to_string(),
        })?;
        let subcommand = raw.subcommand.ok_or(CliError::NoSubcommand)?;
        let params = raw.params.ok_or_else(|| CliError::Schema {
            path: "params".into(),
            message: "missing parameter block".into(),
        })?;
        let name = raw.name.unwrap_or_else(|| subcommand.as_str().to_string());
        if name.is_empty() || name.contains(['/', '\\']) {
            return Err(CliError::Schema {
                path: "name".into(),
                message: format!("`{name}` is not a plain file name"),
            });
        }
        Ok(Self {
            name,
            out: raw.out,
            preset: None,
            job: Job::parse(subcommand, params)?,
        })
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// The explicit JSON form, which parses back to the same run.
    pub fn to_json(&self) -> Value {
        let mut map = serde_json::Map::new();
        map.insert("subcommand".into(), Value::String(self.job.subcommand().as_str().into()));
        map.insert("name".into(), Value::String(self.name.clone()));
        if let Some(out) = &self.out {
            map.insert("out".into(), serde_json::to_value(out).expect("paths serialize"));
        }
        map.insert("params".into(), self.job.params_json());
        Value::Object(map)
    }
}

/// Material table from `path`, or the shipped one.
pub fn load_materials(path: Option<&Path>) -> Result<Vec<MaterialSpec>, CliError> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p).map_err(|source| CliError::Io {
            path: p.to_path_buf(),
            source,
        })?,
        None => BUILTIN_MATERIALS.to_string(),
    };
    let mut de = serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| CliError::Schema {
        path: format!("params.materials{}", e.path()),
        message: e.into_inner().to_string(),
    })
}

pub fn find_material(materials: &[MaterialSpec], name: &str) -> Result<MaterialSpec, CliError> {
    materials.iter().find(|m| m.name == name).cloned().ok_or_else(|| CliError::Schema {
        path: "params.material".into(),
        message: format!("unknown material `{name}`"),
    })
}
