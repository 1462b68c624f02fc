//! TOML run configuration: parsing, `--set` overrides and validation.

use std::fmt;
use std::str::FromStr;

use bioeco_core::econ::EconParams;
use bioeco_core::simulate::SimConfig;
use bioeco_core::{ModelParams, State};
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::CliError;

pub const MODEL_SYMBOLS: [&str; 11] = ["r", "k", "p", "a", "m", "d", "e", "q1", "q2", "E1", "E2"];
pub const ECON_SYMBOLS: [&str; 5] = ["p1", "p2", "c1", "c2", "delta"];

const SECTIONS: [(&str, &[&str]); 7] = [
    ("model", &MODEL_SYMBOLS),
    ("econ", &ECON_SYMBOLS),
    (
        "sim",
        &[
            "t_end",
            "x0",
            "y0",
            "rel_tol",
            "abs_tol",
            "max_step",
            "transient_fraction",
        ],
    ),
    ("hopf", &["m_lo", "m_hi", "grid_points"]),
    ("sweep", &["m"]),
    ("check", &["seed"]),
    ("output", &["path", "format"]),
];
const TOP_LEVEL: [&str; 1] = ["command"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Equilibria,
    Stability,
    Simulate,
    Hopf,
    Bionomic,
    Optimal,
    Sweep,
    Check,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Equilibria => "equilibria",
            Command::Stability => "stability",
            Command::Simulate => "simulate",
            Command::Hopf => "hopf",
            Command::Bionomic => "bionomic",
            Command::Optimal => "optimal",
            Command::Sweep => "sweep",
            Command::Check => "check",
        }
    }

    /// Model symbols the command cannot run without.
    fn required_model_symbols(self) -> &'static [&'static str] {
        match self {
            Command::Check => &[],
            // the refuge coefficient is the scanned variable
            Command::Hopf | Command::Sweep => {
                &["r", "k", "p", "a", "d", "e", "q1", "q2", "E1", "E2"]
            }
            _ => &MODEL_SYMBOLS,
        }
    }

    fn needs_econ(self) -> bool {
        matches!(self, Command::Bionomic | Command::Optimal)
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q2: Option<f64>,
    #[serde(rename = "E1", skip_serializing_if = "Option::is_none")]
    pub e1: Option<f64>,
    #[serde(rename = "E2", skip_serializing_if = "Option::is_none")]
    pub e2: Option<f64>,
}

impl ModelSection {
    fn get(&self, symbol: &str) -> Option<f64> {
        match symbol {
            "r" => self.r,
            "k" => self.k,
            "p" => self.p,
            "a" => self.a,
            "m" => self.m,
            "d" => self.d,
            "e" => self.e,
            "q1" => self.q1,
            "q2" => self.q2,
            "E1" => self.e1,
            "E2" => self.e2,
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EconSection {
    pub p1: f64,
    pub p2: f64,
    pub c1: f64,
    pub c2: f64,
    pub delta: f64,
}

fn default_t_end() -> f64 {
    1000.0
}
fn default_x0() -> f64 {
    60.0
}
fn default_y0() -> f64 {
    15.0
}
fn default_tol() -> f64 {
    1e-9
}
fn default_transient() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSection {
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_x0")]
    pub x0: f64,
    #[serde(default = "default_y0")]
    pub y0: f64,
    #[serde(default = "default_tol")]
    pub rel_tol: f64,
    #[serde(default = "default_tol")]
    pub abs_tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_step: Option<f64>,
    #[serde(default = "default_transient")]
    pub transient_fraction: f64,
}

impl Default for SimSection {
    fn default() -> Self {
        Self {
            t_end: default_t_end(),
            x0: default_x0(),
            y0: default_y0(),
            rel_tol: default_tol(),
            abs_tol: default_tol(),
            max_step: None,
            transient_fraction: default_transient(),
        }
    }
}

fn default_grid_points() -> usize {
    40
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HopfSection {
    pub m_lo: f64,
    pub m_hi: f64,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSection {
    pub m: Vec<f64>,
}

fn default_seed() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSection {
    #[serde(default = "default_seed")]
    pub seed: u64,
}

impl Default for CheckSection {
    fn default() -> Self {
        Self {
            seed: default_seed(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub econ: Option<EconSection>,
    #[serde(default)]
    pub sim: SimSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hopf: Option<HopfSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub check: CheckSection,
    #[serde(default)]
    pub output: OutputSection,
}

/// Parses configuration text with no overrides.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    parse_with_overrides(text, &[])
}

/// Parses configuration text, applies `key=value` overrides, rejects
/// unknown keys and fills defaults.
pub fn parse_with_overrides(text: &str, overrides: &[String]) -> Result<RunConfig, CliError> {
    let mut table: Table = text
        .parse()
        .map_err(|e: toml::de::Error| CliError::Parse(e.to_string()))?;
    for item in overrides {
        apply_override(&mut table, item)?;
    }
    check_keys(&table)?;
    RunConfig::deserialize(Value::Table(table)).map_err(|e| CliError::Parse(e.to_string()))
}

fn check_keys(table: &Table) -> Result<(), CliError> {
    for (key, value) in table {
        if TOP_LEVEL.contains(&key.as_str()) {
            continue;
        }
        let Some((_, allowed)) = SECTIONS.iter().find(|(name, _)| name == key) else {
            return Err(CliError::UnknownKey(key.clone()));
        };
        let Value::Table(inner) = value else {
            return Err(CliError::Parse(format!("`{key}` must be a table")));
        };
        if let Some(bad) = inner.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(CliError::UnknownKey(format!("{key}.{bad}")));
        }
    }
    Ok(())
}

/// Applies `section.key=value`, or `symbol=value` for a model or economic
/// symbol. Values use TOML syntax; bare words are taken as strings.
pub fn apply_override(table: &mut Table, item: &str) -> Result<(), CliError> {
    let (path, raw) = item.split_once('=').ok_or_else(|| {
        CliError::Parse(format!("override `{item}` is not of the form key=value"))
    })?;
    let path = path.trim();
    let (section, key) = match path.split_once('.') {
        Some((s, k)) => (s.to_string(), k.to_string()),
        None if MODEL_SYMBOLS.contains(&path) => ("model".to_string(), path.to_string()),
        None if ECON_SYMBOLS.contains(&path) => ("econ".to_string(), path.to_string()),
        None if TOP_LEVEL.contains(&path) => {
            table.insert(path.to_string(), parse_value(raw));
            return Ok(());
        }
        None => return Err(CliError::UnknownKey(path.to_string())),
    };
    let entry = table
        .entry(section.clone())
        .or_insert_with(|| Value::Table(Table::new()));
    let Value::Table(inner) = entry else {
        return Err(CliError::Parse(format!("`{section}` must be a table")));
    };
    inner.insert(key, parse_value(raw));
    Ok(())
}

fn parse_value(raw: &str) -> Value {
    let raw = raw.trim();
    let wrapped = format!("v = {raw}");
    match wrapped.parse::<Table>() {
        Ok(mut t) => t
            .remove("v")
            .unwrap_or_else(|| Value::String(raw.to_string())),
        Err(_) => Value::String(raw.to_string()),
    }
}

impl FromStr for RunConfig {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_config(s)
    }
}

impl RunConfig {
    /// Serializes back to TOML text.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes to TOML")
    }

    pub fn require(&self, command: Command) -> Result<(), CliError> {
        for symbol in command.required_model_symbols() {
            if self.model.get(symbol).is_none() {
                return Err(CliError::MissingSymbol {
                    symbol: format!("model.{symbol}"),
                    command,
                });
            }
        }
        if command.needs_econ() && self.econ.is_none() {
            return Err(CliError::MissingSymbol {
                symbol: "econ".into(),
                command,
            });
        }
        if command == Command::Hopf && self.hopf.is_none() {
            return Err(CliError::MissingSymbol {
                symbol: "hopf".into(),
                command,
            });
        }
        if command == Command::Sweep && self.sweep.is_none() {
            return Err(CliError::MissingSymbol {
                symbol: "sweep.m".into(),
                command,
            });
        }
        Ok(())
    }

    /// Model parameters; `m` defaults to zero for commands that scan it.
    pub fn model_params(&self) -> Result<ModelParams, CliError> {
        let get = |s: &str| {
            self.model.get(s).ok_or_else(|| CliError::MissingSymbol {
                symbol: format!("model.{s}"),
                command: self.command.unwrap_or(Command::Equilibria),
            })
        };
        let params = ModelParams {
            r: get("r")?,
            k: get("k")?,
            p: get("p")?,
            a: get("a")?,
            m: self.model.m.unwrap_or(0.0),
            d: get("d")?,
            e: get("e")?,
            q1: get("q1")?,
            q2: get("q2")?,
            effort1: get("E1")?,
            effort2: get("E2")?,
        };
        params.validate().map_err(CliError::InvalidValue)?;
        Ok(params)
    }

    pub fn econ_params(&self) -> Result<EconParams, CliError> {
        let s = self.econ.as_ref().ok_or_else(|| CliError::MissingSymbol {
            symbol: "econ".into(),
            command: self.command.unwrap_or(Command::Bionomic),
        })?;
        let econ = EconParams {
            p1: s.p1,
            p2: s.p2,
            c1: s.c1,
            c2: s.c2,
            delta: s.delta,
        };
        econ.validate().map_err(CliError::InvalidValue)?;
        Ok(econ)
    }

    pub fn sim_config(&self) -> Result<SimConfig, CliError> {
        let cfg = SimConfig {
            t_end: self.sim.t_end,
            rel_tol: self.sim.rel_tol,
            abs_tol: self.sim.abs_tol,
            max_step: self.sim.max_step,
            transient_fraction: self.sim.transient_fraction,
        };
        cfg.validate().map_err(CliError::InvalidValue)?;
        Ok(cfg)
    }

    pub fn initial_state(&self) -> State {
        State::new(self.sim.x0, self.sim.y0)
    }
}
