//! JSON experiment configurations: schema-validated before any computation,
//! unknown keys rejected.

use serde::Deserialize;
use std::path::{Path, PathBuf};

use torus_vortex::energy::default_q0;
use torus_vortex::green::GreenTable;
use torus_vortex::torus::{TorusPoint, VortexConfiguration};

/// Errors carrying the JSON path of the offending key where possible.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GreenSpec {
    pub n_table: usize,
    pub cutoff_radius: f64,
    #[serde(default)]
    pub cache_path: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VortexSpec {
    pub x: f64,
    pub y: f64,
    pub d: i32,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Q0Spec {
    Keyword(String),
    Explicit([f64; 2]),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OdeConfig {
    pub lambda: f64,
    pub dt: f64,
    pub t_max: f64,
    pub vortices: Vec<VortexSpec>,
    #[serde(default)]
    pub q0: Option<Q0Spec>,
    #[serde(default)]
    pub collision_stop_radius: Option<f64>,
    pub output_dir: PathBuf,
    pub green: GreenSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymConfig {
    pub mode: String,
    pub alpha0: f64,
    pub beta0: f64,
    pub lambda: f64,
    pub dt: f64,
    pub t_max: f64,
    #[serde(default)]
    pub collision_stop_radius: Option<f64>,
    pub output_dir: PathBuf,
    pub green: GreenSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdeConfig {
    pub lambda: f64,
    pub epsilon: f64,
    pub grid_n: usize,
    pub dt: f64,
    pub t_max: f64,
    pub vortices: Vec<VortexSpec>,
    #[serde(default)]
    pub q0: Option<Q0Spec>,
    pub output_dir: PathBuf,
    pub green: GreenSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    pub lambda: f64,
    pub epsilons: Vec<f64>,
    pub grid_n: usize,
    pub dt: f64,
    pub t_max: f64,
    pub vortices: Vec<VortexSpec>,
    #[serde(default)]
    pub q0: Option<Q0Spec>,
    pub output_dir: PathBuf,
    pub green: GreenSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GreenConfig {
    pub green: GreenSpec,
    pub output_dir: PathBuf,
}

pub fn load_json(path: &Path) -> Result<serde_json::Value, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| ConfigError(format!("invalid JSON: {e}")))
}

pub fn parse_command(v: &serde_json::Value) -> Result<String, ConfigError> {
    v.get("command")
        .and_then(|c| c.as_str())
        .map(str::to_owned)
        .ok_or_else(|| ConfigError("missing key 'command'".into()))
}

pub fn parse<T: for<'de> Deserialize<'de>>(
    v: &serde_json::Value,
    expect_command: &str,
) -> Result<T, ConfigError> {
    let cmd = parse_command(v)?;
    if cmd != expect_command {
        return Err(ConfigError(format!(
            "at 'command': config declares '{cmd}' but the subcommand is '{expect_command}'"
        )));
    }
    let mut v = v.clone();
    v.as_object_mut()
        .ok_or_else(|| ConfigError("config must be a JSON object".into()))?
        .remove("command");
    serde_json::from_value(v).map_err(|e| ConfigError(format!("at {e}")))
}

/// Build the vortex configuration from the spec list and q0 handling;
/// explicit q0 must satisfy the coset constraint within 1e-9.
pub fn build_configuration(
    vortices: &[VortexSpec],
    q0: &Option<Q0Spec>,
) -> Result<VortexConfiguration, ConfigError> {
    if vortices.is_empty() {
        return Err(ConfigError("at 'vortices': list must be nonempty".into()));
    }
    let positions: Vec<TorusPoint> = vortices.iter().map(|v| TorusPoint::new(v.x, v.y)).collect();
    let degrees: Vec<i32> = vortices.iter().map(|v| v.d).collect();
    let q = match q0 {
        None => default_q0(&positions, &degrees),
        Some(Q0Spec::Keyword(s)) if s == "auto" => default_q0(&positions, &degrees),
        Some(Q0Spec::Keyword(s)) => {
            return Err(ConfigError(format!(
                "at 'q0': expected \"auto\" or [qx, qy], got \"{s}\""
            )))
        }
        Some(Q0Spec::Explicit(q)) => *q,
    };
    VortexConfiguration::new(positions, degrees, q)
        .map_err(|e| ConfigError(format!("at 'vortices'/'q0': {e}")))
}

/// Load the Green table: from `cache_override` or `spec.cache_path` when
/// the file exists, otherwise build (and save when a path was given).
pub fn obtain_table(
    spec: &GreenSpec,
    cache_override: Option<&Path>,
) -> Result<GreenTable, Box<dyn std::error::Error>> {
    let cache = cache_override.or(spec.cache_path.as_deref());
    if let Some(path) = cache {
        if path.exists() {
            return Ok(GreenTable::read_cache(path)?);
        }
    }
    let table = GreenTable::build(spec.n_table, spec.cutoff_radius)?;
    if let Some(path) = cache {
        table.write_cache(path)?;
    }
    Ok(table)
}
