//! Config ingestion: TOML with explicit units on every physical quantity
//! (e.g. `delta_p = "1.0 Gamma"`, `w0 = "1.5 mm"`), normalized to the
//! internal unit system, plus the built-in figure presets.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::{GridSpec, ParamSet};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("failed to parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("bad quantity {value:?} for {key}: {reason}")]
    BadQuantity { key: String, value: String, reason: String },
    #[error("unknown preset {0:?} (expected landscape, groundstate, oscillation, or splitting)")]
    UnknownPreset(String),
    #[error("bad override {0:?} (expected key=value with a dotted key path)")]
    BadOverride(String),
    #[error(transparent)]
    Params(#[from] crate::params::ParamError),
    #[error("i/o error reading config: {0}")]
    Io(#[from] std::io::Error),
}

/// Physical quantity kinds accepted by the unit parser.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    /// Angular rate in rad/s; `Gamma` multiples resolved by the caller.
    Rate,
    /// Length in metres.
    Length,
    /// Angle in radians.
    Angle,
    /// Dimensionless value; no unit token allowed.
    Plain,
    /// Time in units of 1/Γ (internal).
    GammaTime,
}

/// Parse `"<number> <unit>"`. `gamma` is the already-resolved Γ in rad/s,
/// needed for `Gamma`-relative rates. Frequency units (MHz, kHz, Hz) denote
/// linear frequency and are converted with a 2π factor; `rad/s` is literal.
pub fn parse_quantity(key: &str, raw: &str, kind: Kind, gamma: f64) -> Result<f64, ConfigError> {
    let err = |reason: &str| ConfigError::BadQuantity {
        key: key.to_string(),
        value: raw.to_string(),
        reason: reason.to_string(),
    };
    let mut it = raw.split_whitespace();
    let num: f64 = it
        .next()
        .ok_or_else(|| err("empty"))?
        .parse()
        .map_err(|_| err("not a number"))?;
    let unit = it.next().unwrap_or("");
    if it.next().is_some() {
        return Err(err("trailing tokens"));
    }
    let tau = std::f64::consts::TAU;
    match (kind, unit) {
        (Kind::Plain, "") => Ok(num),
        (Kind::Rate, "Gamma") => Ok(num * gamma),
        (Kind::Rate, "rad/s") => Ok(num),
        (Kind::Rate, "MHz") => Ok(num * tau * 1e6),
        (Kind::Rate, "kHz") => Ok(num * tau * 1e3),
        (Kind::Rate, "Hz") => Ok(num * tau),
        (Kind::Length, "m") => Ok(num),
        (Kind::Length, "mm") => Ok(num * 1e-3),
        (Kind::Length, "um") => Ok(num * 1e-6),
        (Kind::Length, "nm") => Ok(num * 1e-9),
        (Kind::Angle, "rad") => Ok(num),
        (Kind::Angle, "pi") => Ok(num * std::f64::consts::PI),
        (Kind::GammaTime, "1/Gamma") => Ok(num),
        (Kind::Plain, _) => Err(err("dimensionless quantity must not carry a unit")),
        (_, "") => Err(err("missing unit")),
        _ => Err(err("unknown unit for this quantity")),
    }
}

/// Serialized config layout (all physical values carry unit strings).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Config {
    pub physics: Physics,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub evolution: EvolutionSection,
}

/// Run-control knobs for the time-evolution modes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvolutionSection {
    /// Total evolution time for trajectory modes, μs.
    #[serde(default = "default_t_total")]
    pub t_total_us: f64,
    /// Coherent-state displacement for evolve modes.
    #[serde(default = "default_z0")]
    pub z0: String,
    /// Observable sampling cadence, μs.
    #[serde(default = "default_sample")]
    pub sample_every_us: f64,
    /// Shape-change tolerance (per 1/Γ) for relaxation modes.
    #[serde(default = "default_tol")]
    pub relax_tol: f64,
    /// Step budget for relaxation modes.
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
}

fn default_t_total() -> f64 {
    100.0
}
fn default_z0() -> String {
    "0.5 mm".into()
}
fn default_sample() -> f64 {
    0.5
}
fn default_tol() -> f64 {
    1e-4
}
fn default_max_steps() -> usize {
    2_000_000
}

impl Default for EvolutionSection {
    fn default() -> Self {
        EvolutionSection {
            t_total_us: default_t_total(),
            z0: default_z0(),
            sample_every_us: default_sample(),
            relax_tol: default_tol(),
            max_steps: default_max_steps(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Physics {
    #[serde(default = "default_gamma")]
    pub gamma: String,
    pub omega: String,
    pub alpha: f64,
    pub phi: String,
    pub delta_p: String,
    pub w0: String,
    pub xi: f64,
    pub length: String,
    #[serde(default = "default_lambda")]
    pub lambda: String,
}

fn default_gamma() -> String {
    "6.0 MHz".into()
}

fn default_lambda() -> String {
    "780 nm".into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridSection {
    #[serde(default = "default_nz")]
    pub nz: usize,
    #[serde(default = "default_ny")]
    pub ny: usize,
    /// Half extent of the z window; defaults to 4·w0 when absent.
    #[serde(default)]
    pub z_half_extent: Option<String>,
    #[serde(default = "default_dt")]
    pub dt: String,
}

fn default_nz() -> usize {
    256
}
fn default_ny() -> usize {
    128
}
fn default_dt() -> String {
    "0.05 1/Gamma".into()
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection { nz: default_nz(), ny: default_ny(), z_half_extent: None, dt: default_dt() }
    }
}

impl Config {
    pub fn from_str(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self, ConfigError> {
        Self::from_str(&std::fs::read_to_string(path)?)
    }

    /// Resolve unit strings into a validated SI ParamSet.
    pub fn to_params(&self) -> Result<ParamSet, ConfigError> {
        let p = &self.physics;
        let gamma = parse_quantity("physics.gamma", &p.gamma, Kind::Rate, f64::NAN)?;
        if !gamma.is_finite() {
            return Err(ConfigError::BadQuantity {
                key: "physics.gamma".into(),
                value: p.gamma.clone(),
                reason: "gamma may not be Gamma-relative".into(),
            });
        }
        let w0 = parse_quantity("physics.w0", &p.w0, Kind::Length, gamma)?;
        let z_half_extent = match &self.grid.z_half_extent {
            Some(s) => parse_quantity("grid.z_half_extent", s, Kind::Length, gamma)? * 1e3, // mm
            None => 4.0 * w0 * 1e3,
        };
        let params = ParamSet {
            gamma,
            omega: parse_quantity("physics.omega", &p.omega, Kind::Rate, gamma)?,
            alpha: p.alpha,
            phi: parse_quantity("physics.phi", &p.phi, Kind::Angle, gamma)?,
            delta_p: parse_quantity("physics.delta_p", &p.delta_p, Kind::Rate, gamma)?,
            w0,
            xi: p.xi,
            medium_length: parse_quantity("physics.length", &p.length, Kind::Length, gamma)?,
            lambda_p: parse_quantity("physics.lambda", &p.lambda, Kind::Length, gamma)?,
            lambda_c: parse_quantity("physics.lambda", &p.lambda, Kind::Length, gamma)?,
            grid: GridSpec {
                nz: self.grid.nz,
                ny: self.grid.ny,
                z_half_extent,
                dt: parse_quantity("grid.dt", &self.grid.dt, Kind::GammaTime, gamma)?,
            },
        };
        params.validate()?;
        Ok(params)
    }

    /// Apply a `key=value` override with a dotted key path, e.g.
    /// `physics.delta_p=1.0 Gamma` or `grid.nz=512`.
    pub fn apply_override(&mut self, spec: &str) -> Result<(), ConfigError> {
        let (key, value) = spec
            .split_once('=')
            .ok_or_else(|| ConfigError::BadOverride(spec.to_string()))?;
        let mut doc: toml::Value =
            toml::Value::try_from(&*self).map_err(|_| ConfigError::BadOverride(spec.to_string()))?;
        let mut node = &mut doc;
        let parts: Vec<&str> = key.trim().split('.').collect();
        for part in &parts[..parts.len() - 1] {
            node = node
                .get_mut(part)
                .ok_or_else(|| ConfigError::BadOverride(spec.to_string()))?;
        }
        let leaf = parts.last().unwrap();
        let existing = node.get(leaf);
        let new_value = match existing {
            Some(toml::Value::Float(_)) => toml::Value::Float(
                value.trim().parse().map_err(|_| ConfigError::BadOverride(spec.to_string()))?,
            ),
            Some(toml::Value::Integer(_)) => toml::Value::Integer(
                value.trim().parse().map_err(|_| ConfigError::BadOverride(spec.to_string()))?,
            ),
            _ => toml::Value::String(value.trim().to_string()),
        };
        node.as_table_mut()
            .ok_or_else(|| ConfigError::BadOverride(spec.to_string()))?
            .insert(leaf.to_string(), new_value);
        *self = doc.try_into().map_err(ConfigError::Parse)?;
        Ok(())
    }

    /// SHA-256 of the canonical (sorted-key JSON) form: stable under key
    /// reordering in the source file.
    pub fn canonical_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let json = serde_json::to_value(self).expect("config serializes");
        let canon = serde_json::to_string(&sorted(json)).expect("canonical form");
        let digest = Sha256::digest(canon.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn sorted(v: serde_json::Value) -> serde_json::Value {
    match v {
        serde_json::Value::Object(map) => {
            let mut entries: Vec<_> = map.into_iter().map(|(k, v)| (k, sorted(v))).collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            serde_json::Value::Object(entries.into_iter().collect())
        }
        serde_json::Value::Array(items) => {
            serde_json::Value::Array(items.into_iter().map(sorted).collect())
        }
        other => other,
    }
}

/// Built-in parameter presets matching the four reproduction recipes.
pub fn preset(name: &str) -> Result<Config, ConfigError> {
    let base = |w0: &str, xi: f64, delta_p: &str, phi: &str| Config {
        physics: Physics {
            gamma: default_gamma(),
            omega: "3.0 Gamma".into(),
            alpha: -0.25,
            phi: phi.into(),
            delta_p: delta_p.into(),
            w0: w0.into(),
            xi,
            length: "5.0 mm".into(),
            lambda: default_lambda(),
        },
        grid: GridSection::default(),
        evolution: EvolutionSection::default(),
    };
    match name {
        "landscape" => Ok(base("1.0 mm", 80.0, "0.0 Gamma", "0.0 rad")),
        "groundstate" => Ok(base("1.0 mm", 80.0, "0.0 Gamma", "0.0 rad")),
        "oscillation" => Ok(base("1.5 mm", 80.0, "1.0 Gamma", "0.0 rad")),
        "splitting" => Ok(base("1.5 mm", 200.0, "1.0 Gamma", "0.0 rad")),
        other => Err(ConfigError::UnknownPreset(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const SAMPLE: &str = r#"
[physics]
gamma = "6.0 MHz"
omega = "3.0 Gamma"
alpha = -0.25
phi = "0.12 pi"
delta_p = "1.0 Gamma"
w0 = "1.5 mm"
xi = 200.0
length = "5.0 mm"

[grid]
nz = 128
ny = 64
dt = "0.1 1/Gamma"
"#;

    #[test]
    fn sample_config_round_trips_to_params() {
        let cfg = Config::from_str(SAMPLE).unwrap();
        let p = cfg.to_params().unwrap();
        assert_relative_eq!(p.gamma, std::f64::consts::TAU * 6e6);
        assert_relative_eq!(p.delta_p, p.gamma);
        assert_relative_eq!(p.phi, 0.12 * std::f64::consts::PI);
        assert_relative_eq!(p.w0, 1.5e-3);
        assert_eq!(p.grid.nz, 128);
        assert_relative_eq!(p.grid.z_half_extent, 6.0); // 4·w0 in mm
        assert_relative_eq!(p.grid.dt, 0.1);
    }

    #[test]
    fn unit_errors_are_reported() {
        assert!(parse_quantity("k", "1.5 parsec", Kind::Length, 1.0).is_err());
        assert!(parse_quantity("k", "1.5", Kind::Length, 1.0).is_err());
        assert!(parse_quantity("k", "1.5 mm", Kind::Plain, 1.0).is_err());
        assert!(parse_quantity("k", "x mm", Kind::Length, 1.0).is_err());
        assert_relative_eq!(parse_quantity("k", "0.5 pi", Kind::Angle, 1.0).unwrap(), std::f64::consts::PI / 2.0);
    }

    #[test]
    fn invalid_alpha_fails_validation() {
        let mut cfg = Config::from_str(SAMPLE).unwrap();
        cfg.physics.alpha = -1.5;
        assert!(matches!(cfg.to_params(), Err(ConfigError::Params(_))));
    }

    #[test]
    fn hash_stable_under_key_reordering() {
        let reordered = r#"
[grid]
dt = "0.1 1/Gamma"
ny = 64
nz = 128

[physics]
xi = 200.0
length = "5.0 mm"
w0 = "1.5 mm"
delta_p = "1.0 Gamma"
phi = "0.12 pi"
alpha = -0.25
omega = "3.0 Gamma"
gamma = "6.0 MHz"
"#;
        let a = Config::from_str(SAMPLE).unwrap();
        let b = Config::from_str(reordered).unwrap();
        assert_eq!(a.canonical_hash(), b.canonical_hash());
        let mut c = a.clone();
        c.physics.alpha = -0.3;
        assert_ne!(a.canonical_hash(), c.canonical_hash());
    }

    #[test]
    fn overrides_apply_by_dotted_path() {
        let mut cfg = preset("oscillation").unwrap();
        cfg.apply_override("physics.delta_p=2.0 Gamma").unwrap();
        cfg.apply_override("grid.nz=512").unwrap();
        cfg.apply_override("physics.alpha=-0.3").unwrap();
        let p = cfg.to_params().unwrap();
        assert_relative_eq!(p.delta_p, 2.0 * p.gamma);
        assert_eq!(p.grid.nz, 512);
        assert_relative_eq!(p.alpha, -0.3);
        assert!(cfg.apply_override("nonsense").is_err());
        assert!(cfg.apply_override("physics.unknown.deep=1").is_err());
    }

    #[test]
    fn presets_validate() {
        for name in ["landscape", "groundstate", "oscillation", "splitting"] {
            let p = preset(name).unwrap().to_params().unwrap();
            p.internal().unwrap();
        }
        assert!(preset("fig9").is_err());
    }
}
