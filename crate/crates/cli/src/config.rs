use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub const DEFAULT_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_MODE_COUNT: usize = 10;

/// Experiment configuration, read from TOML. After [`Config::resolve`] every
/// defaulted field is filled in and paths are absolute.
#[derive(Debug, Clone, PartialEq, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub waveguide: Option<Waveguide>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub packet: Option<Packet>,
    /// Second packet of a separable biphoton.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub packet2: Option<Packet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub biphoton: Option<Biphoton>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub single: Option<SingleScan>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair: Option<PairScan>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<Bounds>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeName {
    Rectangle,
    Disk,
    Raster,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    Analytic,
    Fd,
}

/// Either a direct `mass` or a cross-section whose `mode`-th cutoff is used.
#[derive(Debug, Clone, PartialEq, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Waveguide {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<ShapeName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raster: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<Solver>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PacketFamily {
    Gaussian,
    Table,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Packet {
    pub family: PacketFamily,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    /// `[re, im]`
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalize: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BiphotonFamily {
    Separable,
    GaussianCorrelated,
    Yls,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Biphoton {
    pub family: BiphotonFamily,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pump_center: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pump_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relative_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pump_scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

/// A list of values or an evenly spaced range.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum Values {
    List(Vec<f64>),
    Range {
        start: f64,
        stop: f64,
        count: usize,
        #[serde(default)]
        spacing: Spacing,
    },
}

impl Values {
    pub fn values(&self) -> Vec<f64> {
        match *self {
            Values::List(ref v) => v.clone(),
            Values::Range {
                start,
                stop,
                count,
                spacing,
            } => {
                if count == 1 {
                    return vec![start];
                }
                (0..count)
                    .map(|i| {
                        let s = i as f64 / (count - 1) as f64;
                        match spacing {
                            Spacing::Linear => start + (stop - start) * s,
                            Spacing::Log => (start.ln() + (stop.ln() - start.ln()) * s).exp(),
                        }
                    })
                    .collect()
            }
        }
    }

    fn check(&self) -> Result<(), String> {
        match *self {
            Values::List(ref v) if v.is_empty() => Err("value list is empty".into()),
            Values::List(ref v) if v.iter().any(|x| !x.is_finite()) => Err("value list has a non-finite entry".into()),
            Values::List(_) => Ok(()),
            Values::Range {
                start,
                stop,
                count,
                spacing,
            } => {
                if count == 0 {
                    Err("range count must be at least 1".into())
                } else if !(start.is_finite() && stop.is_finite()) {
                    Err("range bounds must be finite".into())
                } else if spacing == Spacing::Log && !(start > 0.0 && stop > 0.0) {
                    Err("log-spaced range needs positive bounds".into())
                } else {
                    Ok(())
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SingleScan {
    pub times: Values,
    pub z: Values,
    /// Frame velocity of the stationary-phase comparison.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ray_times: Option<Values>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PairScan {
    pub t1: f64,
    pub t2: f64,
    pub z1: Values,
    pub z2: Values,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile_v1: Option<Values>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile_v2: Option<Values>,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub universal: Option<Universal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lightcone: Option<Lightcone>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Universal {
    pub velocities: Values,
    pub times: Values,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature_max_time: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t0_points: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecaySourceName {
    Single,
    Biphoton,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Lightcone {
    pub source: DecaySourceName,
    /// `[z, t]` of the second detector for biphoton scans.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frozen: Option<[f64; 2]>,
    pub rays: Vec<RayConfig>,
    pub orders: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RayConfig {
    pub t: f64,
    pub z: Values,
}

/// A configuration problem, anchored to a line of the file when possible.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: PathBuf,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "{}:{line}: {}", self.path.display(), self.message),
            None => write!(f, "{}: {}", self.path.display(), self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// 1-based line of `key = ...` inside `[section]` (dotted for nested tables),
/// or of the section header itself when `key` is empty.
pub fn locate(text: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    let mut header_line = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if let Some(name) = line.strip_prefix("[[").and_then(|l| l.strip_suffix("]]")) {
            current = name.trim().to_string();
            if current == section && header_line.is_none() {
                header_line = Some(i + 1);
            }
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = name.trim().to_string();
            if current == section {
                header_line = Some(i + 1);
            }
            continue;
        }
        if current == section && !key.is_empty() {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    header_line
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

pub struct Loaded {
    pub config: Config,
    pub text: String,
    pub path: PathBuf,
}

impl Loaded {
    pub fn error(&self, section: &str, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError {
            path: self.path.clone(),
            line: locate(&self.text, section, key),
            message: message.into(),
        }
    }
}

pub fn load(path: &Path) -> Result<Loaded, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        path: path.to_path_buf(),
        line: None,
        message: format!("cannot read config: {e}"),
    })?;
    let config: Config = toml::from_str(&text).map_err(|e| ConfigError {
        path: path.to_path_buf(),
        line: e.span().map(|s| line_of_offset(&text, s.start)),
        message: e.message().to_string(),
    })?;
    Ok(Loaded {
        config,
        text,
        path: path.to_path_buf(),
    })
}

fn finite(x: Option<f64>) -> bool {
    x.is_some_and(f64::is_finite)
}

fn positive(x: Option<f64>) -> bool {
    x.is_some_and(|v| v.is_finite() && v > 0.0)
}

impl Loaded {
    /// Fills defaults, makes paths absolute and checks the invariants that
    /// do not depend on the subcommand.
    pub fn resolve(&self, out_override: Option<&Path>) -> Result<Config, ConfigError> {
        let mut c = self.config.clone();
        let base = std::path::absolute(&self.path)
            .ok()
            .and_then(|p| p.parent().map(Path::to_path_buf))
            .unwrap_or_default();
        let absolute = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base.join(p) };

        c.output = Some(match out_override {
            Some(p) => p.to_path_buf(),
            None => absolute(c.output.as_deref().unwrap_or(Path::new("out"))),
        });
        let tol = c.tolerance.unwrap_or(DEFAULT_TOLERANCE);
        if !(tol > 0.0 && tol < 1.0) {
            return Err(self.error("", "tolerance", format!("tolerance must lie in (0, 1), got {tol}")));
        }
        c.tolerance = Some(tol);

        if let Some(w) = c.waveguide.as_mut() {
            match (w.mass, w.shape) {
                (Some(_), Some(_)) => {
                    return Err(self.error(
                        "waveguide",
                        "mass",
                        "specify exactly one mass source: either `mass` or `shape`",
                    ))
                }
                (None, None) => {
                    return Err(self.error("waveguide", "", "specify a mass source: `mass` or `shape`"));
                }
                (Some(m), None) => {
                    if !(m.is_finite() && m > 0.0) {
                        return Err(self.error("waveguide", "mass", format!("mass must be positive, got {m}")));
                    }
                }
                (None, Some(shape)) => {
                    match shape {
                        ShapeName::Rectangle => {
                            if !positive(w.a) || !positive(w.b) {
                                return Err(self.error("waveguide", "shape", "rectangle needs positive `a` and `b`"));
                            }
                        }
                        ShapeName::Disk => {
                            if !positive(w.radius) {
                                return Err(self.error("waveguide", "shape", "disk needs a positive `radius`"));
                            }
                        }
                        ShapeName::Raster => match &w.raster {
                            Some(p) => w.raster = Some(absolute(p)),
                            None => return Err(self.error("waveguide", "shape", "raster needs a `raster` file")),
                        },
                    }
                    let mode = w.mode.unwrap_or(1);
                    if mode == 0 {
                        return Err(self.error("waveguide", "mode", "mode index is 1-based"));
                    }
                    w.mode = Some(mode);
                    let solver = w.solver.unwrap_or(if shape == ShapeName::Raster {
                        Solver::Fd
                    } else {
                        Solver::Analytic
                    });
                    if solver == Solver::Analytic && shape == ShapeName::Raster {
                        return Err(self.error("waveguide", "solver", "raster cross-sections need solver = \"fd\""));
                    }
                    w.solver = Some(solver);
                    if solver == Solver::Fd && !positive(w.spacing) {
                        return Err(self.error("waveguide", "spacing", "the fd solver needs a positive `spacing`"));
                    }
                    let count = w.count.unwrap_or(DEFAULT_MODE_COUNT.max(mode));
                    if count < mode {
                        return Err(self.error("waveguide", "count", format!("count {count} is below mode {mode}")));
                    }
                    w.count = Some(count);
                }
            }
        }

        for (name, packet) in [("packet", c.packet.as_mut()), ("packet2", c.packet2.as_mut())] {
            let Some(p) = packet else { continue };
            match p.family {
                PacketFamily::Gaussian => {
                    if !finite(p.center) {
                        return Err(self.error(name, "family", "gaussian packet needs `center`"));
                    }
                    if !positive(p.width) {
                        return Err(self.error(name, "width", "gaussian packet needs a positive `width`"));
                    }
                    p.amplitude = Some(p.amplitude.unwrap_or([1.0, 0.0]));
                }
                PacketFamily::Table => match &p.table {
                    Some(t) => p.table = Some(absolute(t)),
                    None => return Err(self.error(name, "family", "table packet needs a `table` file")),
                },
            }
            p.normalize = Some(p.normalize.unwrap_or(true));
        }

        if let Some(b) = c.biphoton.as_mut() {
            match b.family {
                BiphotonFamily::Separable => {
                    if c.packet.is_none() || c.packet2.is_none() {
                        return Err(self.error(
                            "biphoton",
                            "family",
                            "separable biphoton needs [packet] and [packet2]",
                        ));
                    }
                }
                BiphotonFamily::GaussianCorrelated => {
                    if !finite(b.pump_center) || !positive(b.pump_width) || !positive(b.relative_width) {
                        return Err(self.error(
                            "biphoton",
                            "family",
                            "gaussian_correlated needs `pump_center`, positive `pump_width` and `relative_width`",
                        ));
                    }
                }
                BiphotonFamily::Yls => {
                    if !positive(b.pump_center) || !positive(b.pump_width) {
                        return Err(self.error(
                            "biphoton",
                            "family",
                            "yls needs positive `pump_center` and `pump_width`",
                        ));
                    }
                    b.pump_scale = Some(b.pump_scale.unwrap_or(b.pump_center.unwrap_or(1.0)));
                    if !positive(b.pump_scale) {
                        return Err(self.error("biphoton", "pump_scale", "pump_scale must be positive"));
                    }
                }
            }
            b.scale = Some(b.scale.unwrap_or(1.0));
        }

        if let Some(s) = &c.single {
            self.values("single", "times", &s.times)?;
            self.values("single", "z", &s.z)?;
            if let Some(r) = &s.ray_times {
                self.values("single", "ray_times", r)?;
                if s.velocity.is_none() {
                    return Err(self.error("single", "ray_times", "ray_times needs a frame `velocity`"));
                }
            }
            if let Some(v) = s.velocity {
                if !(v.abs() < 1.0) {
                    return Err(self.error("single", "velocity", format!("velocity must satisfy |v| < 1, got {v}")));
                }
            }
        }
        if let Some(p) = &c.pair {
            self.values("pair", "z1", &p.z1)?;
            self.values("pair", "z2", &p.z2)?;
            if !(p.t1.is_finite() && p.t2.is_finite()) {
                return Err(self.error("pair", "t1", "pair times must be finite"));
            }
            for (key, v) in [("profile_v1", &p.profile_v1), ("profile_v2", &p.profile_v2)] {
                if let Some(v) = v {
                    self.values("pair", key, v)?;
                }
            }
        }
        if let Some(b) = c.bounds.as_mut() {
            if let Some(u) = b.universal.as_mut() {
                self.values("bounds.universal", "velocities", &u.velocities)?;
                self.values("bounds.universal", "times", &u.times)?;
                u.tolerance = Some(u.tolerance.unwrap_or(1e-6));
                u.quadrature_max_time = Some(u.quadrature_max_time.unwrap_or(1000.0));
                u.t0_points = Some(u.t0_points.unwrap_or(waveguide_photons::bounds::T0_GRID_POINTS));
            }
            if let Some(l) = &b.lightcone {
                if l.rays.is_empty() {
                    return Err(self.error("bounds.lightcone", "rays", "at least one ray is required"));
                }
                for r in &l.rays {
                    self.values("bounds.lightcone.rays", "z", &r.z)?;
                }
                if l.orders.is_empty() {
                    return Err(self.error("bounds.lightcone", "orders", "at least one order is required"));
                }
                if l.source == DecaySourceName::Biphoton && l.frozen.is_none() {
                    return Err(self.error("bounds.lightcone", "source", "biphoton source needs a `frozen` detector"));
                }
            }
        }
        Ok(c)
    }

    fn values(&self, section: &str, key: &str, v: &Values) -> Result<(), ConfigError> {
        v.check().map_err(|m| self.error(section, key, format!("`{key}`: {m}")))
    }
}
