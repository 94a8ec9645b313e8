use crate::error::{Error, Result};
use crate::experiments::Law;
use crate::rng::GENERATOR_ID;
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Real,
    Int,
    Reals,
    Ints,
    Law,
    Laws,
    Path,
    Text,
    Flag,
}

impl Kind {
    pub fn value_name(self) -> &'static str {
        match self {
            Kind::Real => "REAL",
            Kind::Int => "INT",
            Kind::Reals => "REAL,...",
            Kind::Ints => "INT,...",
            Kind::Law => "LAW",
            Kind::Laws => "LAW,...",
            Kind::Path => "FILE",
            Kind::Text => "TEXT",
            Kind::Flag => "BOOL",
        }
    }
}

/// One subcommand parameter; the same key names the flag and the config entry.
#[derive(Debug, Clone, Copy)]
pub struct ParamSpec {
    pub key: &'static str,
    pub kind: Kind,
    /// Textual default, parsed like any other value; `None` means unset.
    pub default: Option<&'static str>,
    pub help: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ParamValue {
    Real(f64),
    Int(u64),
    Reals(Vec<f64>),
    Ints(Vec<u64>),
    Law(Law),
    Laws(Vec<Law>),
    Path(Option<PathBuf>),
    Text(String),
    Flag(bool),
}

fn split_list(text: &str) -> impl Iterator<Item = &str> {
    text.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn parse_real(s: &str) -> std::result::Result<f64, String> {
    s.parse::<f64>()
        .map_err(|_| format!("`{s}` is not a real number"))
}

fn parse_int(s: &str) -> std::result::Result<u64, String> {
    s.parse::<u64>()
        .map_err(|_| format!("`{s}` is not a non-negative integer"))
}

impl ParamValue {
    pub fn parse(kind: Kind, text: &str) -> std::result::Result<Self, String> {
        let text = text.trim();
        Ok(match kind {
            Kind::Real => ParamValue::Real(parse_real(text)?),
            Kind::Int => ParamValue::Int(parse_int(text)?),
            Kind::Reals => ParamValue::Reals(
                split_list(text)
                    .map(parse_real)
                    .collect::<std::result::Result<_, _>>()?,
            ),
            Kind::Ints => ParamValue::Ints(
                split_list(text)
                    .map(parse_int)
                    .collect::<std::result::Result<_, _>>()?,
            ),
            Kind::Law => ParamValue::Law(text.parse().map_err(|e: Error| e.to_string())?),
            Kind::Laws => ParamValue::Laws(
                split_list(text)
                    .map(|s| s.parse::<Law>().map_err(|e| e.to_string()))
                    .collect::<std::result::Result<_, _>>()?,
            ),
            Kind::Path => ParamValue::Path(if text.is_empty() {
                None
            } else {
                Some(PathBuf::from(text))
            }),
            Kind::Text => ParamValue::Text(text.to_string()),
            Kind::Flag => ParamValue::Flag(match text {
                "true" | "yes" | "1" => true,
                "false" | "no" | "0" => false,
                _ => return Err(format!("`{text}` is not a boolean")),
            }),
        })
    }

    fn unset(kind: Kind) -> Self {
        match kind {
            Kind::Reals => ParamValue::Reals(Vec::new()),
            Kind::Ints => ParamValue::Ints(Vec::new()),
            Kind::Laws => ParamValue::Laws(Vec::new()),
            Kind::Path => ParamValue::Path(None),
            Kind::Flag => ParamValue::Flag(false),
            _ => ParamValue::Text(String::new()),
        }
    }
}

/// Parsed `key = value` config file. Blank lines and `#` comments are
/// skipped; a repeated key is an error.
#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    entries: BTreeMap<String, (usize, String)>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((k, v)) = content.split_once('=') else {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected key = value, got `{content}`"),
                });
            };
            let key = k.trim().to_string();
            if key.is_empty() {
                return Err(Error::Parse {
                    line,
                    msg: "empty key".into(),
                });
            }
            if entries
                .insert(key.clone(), (line, v.trim().to_string()))
                .is_some()
            {
                return Err(Error::Parse {
                    line,
                    msg: format!("duplicate key `{key}`"),
                });
            }
        }
        Ok(ConfigFile { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn get(&self, key: &str) -> Option<(usize, &str)> {
        self.entries.get(key).map(|(l, v)| (*l, v.as_str()))
    }

    /// Reject keys that are neither subcommand parameters nor `allowed` globals.
    pub fn check_keys(&self, specs: &[ParamSpec], allowed: &[&str]) -> Result<()> {
        for (key, (line, _)) in &self.entries {
            if !specs.iter().any(|s| s.key == key) && !allowed.contains(&key.as_str()) {
                return Err(Error::Parse {
                    line: *line,
                    msg: format!("unknown key `{key}`"),
                });
            }
        }
        Ok(())
    }
}

/// Fully resolved configuration of one run; embedded in the JSON summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub params: BTreeMap<String, ParamValue>,
    pub seed: u64,
    pub generator_id: String,
    pub output_dir: PathBuf,
}

impl RunConfig {
    /// Resolve every parameter as flag > config file > default.
    pub fn resolve(
        command: &str,
        specs: &[ParamSpec],
        flags: &BTreeMap<String, String>,
        file: &ConfigFile,
        seed: u64,
        output_dir: PathBuf,
    ) -> Result<Self> {
        let mut params = BTreeMap::new();
        for spec in specs {
            let value = if let Some(text) = flags.get(spec.key) {
                ParamValue::parse(spec.kind, text)
                    .map_err(|m| Error::Domain(format!("--{}: {m}", spec.key)))?
            } else if let Some((line, text)) = file.get(spec.key) {
                ParamValue::parse(spec.kind, text).map_err(|msg| Error::Parse {
                    line,
                    msg: format!("{}: {msg}", spec.key),
                })?
            } else if let Some(text) = spec.default {
                ParamValue::parse(spec.kind, text)
                    .map_err(|m| Error::Domain(format!("default of {}: {m}", spec.key)))?
            } else {
                ParamValue::unset(spec.kind)
            };
            params.insert(spec.key.to_string(), value);
        }
        Ok(RunConfig {
            command: command.to_string(),
            params,
            seed,
            generator_id: GENERATOR_ID.to_string(),
            output_dir,
        })
    }

    fn get(&self, key: &str) -> Result<&ParamValue> {
        self.params
            .get(key)
            .ok_or_else(|| Error::Domain(format!("no parameter `{key}`")))
    }

    fn mismatch(&self, key: &str, want: &str) -> Error {
        Error::Domain(format!("parameter `{key}` is not {want}"))
    }

    pub fn real(&self, key: &str) -> Result<f64> {
        match self.get(key)? {
            ParamValue::Real(v) => Ok(*v),
            _ => Err(self.mismatch(key, "a real")),
        }
    }

    pub fn int(&self, key: &str) -> Result<usize> {
        match self.get(key)? {
            ParamValue::Int(v) => usize::try_from(*v).map_err(|_| {
                Error::capacity(format!("{key} = {v} does not fit in memory indices"))
            }),
            _ => Err(self.mismatch(key, "an integer")),
        }
    }

    pub fn reals(&self, key: &str) -> Result<Vec<f64>> {
        match self.get(key)? {
            ParamValue::Reals(v) => Ok(v.clone()),
            _ => Err(self.mismatch(key, "a list of reals")),
        }
    }

    pub fn ints(&self, key: &str) -> Result<Vec<usize>> {
        match self.get(key)? {
            ParamValue::Ints(v) => Ok(v.iter().map(|&x| x as usize).collect()),
            _ => Err(self.mismatch(key, "a list of integers")),
        }
    }

    pub fn law(&self, key: &str) -> Result<Law> {
        match self.get(key)? {
            ParamValue::Law(v) => Ok(*v),
            _ => Err(self.mismatch(key, "a law")),
        }
    }

    pub fn laws(&self, key: &str) -> Result<Vec<Law>> {
        match self.get(key)? {
            ParamValue::Laws(v) => Ok(v.clone()),
            _ => Err(self.mismatch(key, "a list of laws")),
        }
    }

    pub fn path(&self, key: &str) -> Result<Option<PathBuf>> {
        match self.get(key)? {
            ParamValue::Path(v) => Ok(v.clone()),
            _ => Err(self.mismatch(key, "a path")),
        }
    }

    pub fn text(&self, key: &str) -> Result<String> {
        match self.get(key)? {
            ParamValue::Text(v) => Ok(v.clone()),
            _ => Err(self.mismatch(key, "text")),
        }
    }

    pub fn flag(&self, key: &str) -> Result<bool> {
        match self.get(key)? {
            ParamValue::Flag(v) => Ok(*v),
            _ => Err(self.mismatch(key, "a boolean")),
        }
    }
}
