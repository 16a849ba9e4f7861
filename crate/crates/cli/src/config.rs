//! Experiment configuration files.
//!
//! The format is a small INI dialect: `[section]` headers, `key = value`
//! pairs, `#` comments and blank lines. Unknown sections or keys are hard
//! errors that report the line number and suggest the nearest valid key, so
//! typos never silently fall back to defaults.
//!
//! ```text
//! [experiment]
//! name = flat_slowdown
//! epsilon = 0.1
//!
//! [grid]
//! nx = 512
//! ny = 384
//! ```
//!
//! Only `[experiment] name` is mandatory; every other knob has an
//! experiment-specific default.

use std::fmt::Write as _;
use std::path::PathBuf;

use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("missing mandatory key: [experiment] name")]
    MissingExperiment,
    #[error("{0}")]
    Invalid(String),
}

/// Interface shape override.
#[derive(Clone, Debug, Default)]
pub struct WallConfig {
    pub kind: Option<String>,
    pub radius: Option<f64>,
    pub power: Option<f64>,
    pub amplitude: Option<f64>,
}

/// Magnetic potential override.
#[derive(Clone, Debug, Default)]
pub struct PotentialConfig {
    pub kind: Option<String>,
    pub b0: Option<f64>,
    pub b1: Option<f64>,
    pub b2: Option<f64>,
    pub flux: Option<f64>,
    pub core: Option<f64>,
    pub x_c: Option<f64>,
    pub period: Option<f64>,
}

/// Grid override (partial; unset fields keep the experiment default).
#[derive(Clone, Debug, Default)]
pub struct GridConfig {
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub x0: Option<f64>,
    pub x1: Option<f64>,
    pub y0: Option<f64>,
    pub y1: Option<f64>,
}

/// Output selection.
#[derive(Clone, Debug)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    /// Number of field snapshots over the run (0 disables them).
    pub snapshots: usize,
    pub observables: bool,
    pub track: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: None,
            snapshots: 0,
            observables: true,
            track: true,
        }
    }
}

/// Fully parsed configuration file.
#[derive(Clone, Debug, Default)]
pub struct Config {
    pub experiment: String,
    pub epsilon: Option<f64>,
    pub t_end: Option<f64>,
    pub dt: Option<f64>,
    pub cadence: Option<f64>,
    pub sigma: Option<f64>,
    pub gauge_q: Option<f64>,
    pub component: Option<usize>,
    pub wall: WallConfig,
    pub potential: PotentialConfig,
    pub grid: GridConfig,
    pub output: OutputConfig,
}

const SECTIONS: &[&str] = &["experiment", "wall", "potential", "grid", "output"];
const EXPERIMENT_KEYS: &[&str] = &[
    "name", "epsilon", "t_end", "dt", "cadence", "sigma", "gauge_q", "component",
];
const WALL_KEYS: &[&str] = &["kind", "radius", "power", "amplitude"];
const POTENTIAL_KEYS: &[&str] = &["kind", "b0", "b1", "b2", "flux", "core", "x_c", "period"];
const GRID_KEYS: &[&str] = &["nx", "ny", "x0", "x1", "y0", "y1"];
const OUTPUT_KEYS: &[&str] = &["dir", "snapshots", "observables", "track"];

/// Plain Levenshtein distance, used for "did you mean" suggestions.
fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    for (i, &ca) in a.iter().enumerate() {
        let mut cur = vec![i + 1];
        for (j, &cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur.push(sub.min(prev[j + 1] + 1).min(cur[j] + 1));
        }
        prev = cur;
    }
    prev[b.len()]
}

fn suggest(word: &str, candidates: &[&str]) -> String {
    candidates
        .iter()
        .map(|c| (edit_distance(word, c), *c))
        .min()
        .filter(|(d, _)| *d <= 3)
        .map(|(_, c)| format!(" (did you mean `{c}`?)"))
        .unwrap_or_default()
}

fn parse_f64(line: usize, key: &str, value: &str) -> Result<f64, ConfigError> {
    value.parse().map_err(|_| ConfigError::Parse {
        line,
        message: format!("key `{key}` needs a number, got `{value}`"),
    })
}

fn parse_usize(line: usize, key: &str, value: &str) -> Result<usize, ConfigError> {
    value.parse().map_err(|_| ConfigError::Parse {
        line,
        message: format!("key `{key}` needs a non-negative integer, got `{value}`"),
    })
}

fn parse_bool(line: usize, key: &str, value: &str) -> Result<bool, ConfigError> {
    match value {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(ConfigError::Parse {
            line,
            message: format!("key `{key}` needs true/false, got `{value}`"),
        }),
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Config, ConfigError> {
        let mut cfg = Config::default();
        let mut section: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let stripped = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            }
            .trim();
            if stripped.is_empty() {
                continue;
            }
            if let Some(name) = stripped.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or(ConfigError::Parse {
                    line,
                    message: format!("unterminated section header `{stripped}`"),
                })?;
                if !SECTIONS.contains(&name) {
                    return Err(ConfigError::Parse {
                        line,
                        message: format!(
                            "unknown section `[{name}]`{}",
                            suggest(name, SECTIONS)
                        ),
                    });
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = stripped.split_once('=').ok_or(ConfigError::Parse {
                line,
                message: format!("expected `key = value`, got `{stripped}`"),
            })?;
            let key = key.trim();
            let value = value.trim();
            let section = section.as_deref().ok_or(ConfigError::Parse {
                line,
                message: format!("key `{key}` appears before any [section] header"),
            })?;
            cfg.apply(section, key, value, line)?;
        }
        if cfg.experiment.is_empty() {
            return Err(ConfigError::MissingExperiment);
        }
        Ok(cfg)
    }

    fn apply(
        &mut self,
        section: &str,
        key: &str,
        value: &str,
        line: usize,
    ) -> Result<(), ConfigError> {
        let unknown = |keys: &[&str]| ConfigError::Parse {
            line,
            message: format!(
                "unknown key `{key}` in [{section}]{}",
                suggest(key, keys)
            ),
        };
        match section {
            "experiment" => match key {
                "name" => self.experiment = value.to_string(),
                "epsilon" => self.epsilon = Some(parse_f64(line, key, value)?),
                "t_end" => self.t_end = Some(parse_f64(line, key, value)?),
                "dt" => self.dt = Some(parse_f64(line, key, value)?),
                "cadence" => self.cadence = Some(parse_f64(line, key, value)?),
                "sigma" => self.sigma = Some(parse_f64(line, key, value)?),
                "gauge_q" => self.gauge_q = Some(parse_f64(line, key, value)?),
                "component" => self.component = Some(parse_usize(line, key, value)?),
                _ => return Err(unknown(EXPERIMENT_KEYS)),
            },
            "wall" => match key {
                "kind" => self.wall.kind = Some(value.to_string()),
                "radius" => self.wall.radius = Some(parse_f64(line, key, value)?),
                "power" => self.wall.power = Some(parse_f64(line, key, value)?),
                "amplitude" => self.wall.amplitude = Some(parse_f64(line, key, value)?),
                _ => return Err(unknown(WALL_KEYS)),
            },
            "potential" => match key {
                "kind" => self.potential.kind = Some(value.to_string()),
                "b0" => self.potential.b0 = Some(parse_f64(line, key, value)?),
                "b1" => self.potential.b1 = Some(parse_f64(line, key, value)?),
                "b2" => self.potential.b2 = Some(parse_f64(line, key, value)?),
                "flux" => self.potential.flux = Some(parse_f64(line, key, value)?),
                "core" => self.potential.core = Some(parse_f64(line, key, value)?),
                "x_c" => self.potential.x_c = Some(parse_f64(line, key, value)?),
                "period" => self.potential.period = Some(parse_f64(line, key, value)?),
                _ => return Err(unknown(POTENTIAL_KEYS)),
            },
            "grid" => match key {
                "nx" => self.grid.nx = Some(parse_usize(line, key, value)?),
                "ny" => self.grid.ny = Some(parse_usize(line, key, value)?),
                "x0" => self.grid.x0 = Some(parse_f64(line, key, value)?),
                "x1" => self.grid.x1 = Some(parse_f64(line, key, value)?),
                "y0" => self.grid.y0 = Some(parse_f64(line, key, value)?),
                "y1" => self.grid.y1 = Some(parse_f64(line, key, value)?),
                _ => return Err(unknown(GRID_KEYS)),
            },
            "output" => match key {
                "dir" => self.output.dir = Some(PathBuf::from(value)),
                "snapshots" => self.output.snapshots = parse_usize(line, key, value)?,
                "observables" => self.output.observables = parse_bool(line, key, value)?,
                "track" => self.output.track = parse_bool(line, key, value)?,
                _ => return Err(unknown(OUTPUT_KEYS)),
            },
            _ => unreachable!("section already validated"),
        }
        Ok(())
    }

    /// Canonical text of every set value, in a fixed order; two configs with
    /// the same effective content render identically.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "experiment.name={}", self.experiment);
        let mut num = |k: &str, v: Option<f64>| {
            if let Some(v) = v {
                let _ = writeln!(s, "{k}={v:?}");
            }
        };
        num("experiment.epsilon", self.epsilon);
        num("experiment.t_end", self.t_end);
        num("experiment.dt", self.dt);
        num("experiment.cadence", self.cadence);
        num("experiment.sigma", self.sigma);
        num("experiment.gauge_q", self.gauge_q);
        if let Some(c) = self.component {
            let _ = writeln!(s, "experiment.component={c}");
        }
        if let Some(k) = &self.wall.kind {
            let _ = writeln!(s, "wall.kind={k}");
        }
        let mut num = |k: &str, v: Option<f64>| {
            if let Some(v) = v {
                let _ = writeln!(s, "{k}={v:?}");
            }
        };
        num("wall.radius", self.wall.radius);
        num("wall.power", self.wall.power);
        num("wall.amplitude", self.wall.amplitude);
        if let Some(k) = &self.potential.kind {
            let _ = writeln!(s, "potential.kind={k}");
        }
        let mut num = |k: &str, v: Option<f64>| {
            if let Some(v) = v {
                let _ = writeln!(s, "{k}={v:?}");
            }
        };
        num("potential.b0", self.potential.b0);
        num("potential.b1", self.potential.b1);
        num("potential.b2", self.potential.b2);
        num("potential.flux", self.potential.flux);
        num("potential.core", self.potential.core);
        num("potential.x_c", self.potential.x_c);
        num("potential.period", self.potential.period);
        if let Some(n) = self.grid.nx {
            let _ = writeln!(s, "grid.nx={n}");
        }
        if let Some(n) = self.grid.ny {
            let _ = writeln!(s, "grid.ny={n}");
        }
        let mut num = |k: &str, v: Option<f64>| {
            if let Some(v) = v {
                let _ = writeln!(s, "{k}={v:?}");
            }
        };
        num("grid.x0", self.grid.x0);
        num("grid.x1", self.grid.x1);
        num("grid.y0", self.grid.y0);
        num("grid.y1", self.grid.y1);
        if let Some(d) = &self.output.dir {
            let _ = writeln!(s, "output.dir={}", d.display());
        }
        let _ = writeln!(s, "output.snapshots={}", self.output.snapshots);
        let _ = writeln!(s, "output.observables={}", self.output.observables);
        let _ = writeln!(s, "output.track={}", self.output.track);
        s
    }

    /// SHA-256 of the canonical rendering, recorded in the run summary so a
    /// result can always be traced back to its exact configuration.
    pub fn sha256(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
