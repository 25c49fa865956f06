//! Flag resolution with optional key=value config files.
//!
//! Every flag has a config-file key identical to its long name. Values given
//! on the command line win over the config file; built-in defaults apply
//! last. The resolved values are recorded in order and written out as the
//! run manifest, which is itself a valid config file, so a past run can be
//! reproduced with `--config <manifest>`.

use std::collections::HashMap;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Keys written by the manifest machinery that a config loader must skip.
const RESERVED_KEYS: [&str; 3] = ["command", "version", "wall_time_s"];

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or config contents; exit code 2.
    Usage(String),
    /// Failure while doing the work; exit code 1.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => m,
        }
    }
}

impl From<dga_impute::Error> for CliError {
    fn from(e: dga_impute::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

/// Resolves flags against a config file and records the outcome for the
/// manifest.
pub struct Resolver {
    file: HashMap<String, String>,
    /// Keys seen in the config file, to reject unknown ones at the end.
    unclaimed: Vec<String>,
    resolved: Vec<(String, String)>,
}

impl Resolver {
    pub fn new(config_path: Option<&Path>) -> Result<Self, CliError> {
        let mut file = HashMap::new();
        let mut unclaimed = Vec::new();
        if let Some(path) = config_path {
            let text = fs::read_to_string(path).map_err(|e| {
                CliError::Usage(format!("cannot read config {}: {e}", path.display()))
            })?;
            for (ix, line) in text.lines().enumerate() {
                let trimmed = line.split('#').next().unwrap_or("").trim();
                if trimmed.is_empty() {
                    continue;
                }
                let (key, value) = trimmed.split_once('=').ok_or_else(|| {
                    CliError::Usage(format!(
                        "config {} line {}: expected key=value, got {trimmed:?}",
                        path.display(),
                        ix + 1
                    ))
                })?;
                let key = key.trim().to_string();
                if RESERVED_KEYS.contains(&key.as_str()) {
                    continue;
                }
                unclaimed.push(key.clone());
                file.insert(key, value.trim().to_string());
            }
        }
        Ok(Resolver {
            file,
            unclaimed,
            resolved: Vec::new(),
        })
    }

    fn claim(&mut self, key: &str) {
        self.unclaimed.retain(|k| k != key);
    }

    fn from_file<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: Display,
    {
        match self.file.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|e| {
                CliError::Usage(format!("config key {key}: cannot parse {raw:?}: {e}"))
            }),
        }
    }

    /// Flag wins, then config file, then the default.
    pub fn value<T: FromStr + Display>(
        &mut self,
        key: &str,
        flag: Option<T>,
        default: T,
    ) -> Result<T, CliError>
    where
        T::Err: Display,
    {
        self.claim(key);
        let v = match flag {
            Some(v) => v,
            None => self.from_file(key)?.unwrap_or(default),
        };
        self.resolved.push((key.to_string(), v.to_string()));
        Ok(v)
    }

    pub fn required_path(&mut self, key: &str, flag: Option<PathBuf>) -> Result<PathBuf, CliError> {
        self.claim(key);
        let v = match flag {
            Some(v) => v,
            None => self
                .from_file::<String>(key)?
                .map(PathBuf::from)
                .ok_or_else(|| {
                    CliError::Usage(format!(
                        "missing required option --{key} (or config key {key})"
                    ))
                })?,
        };
        self.resolved
            .push((key.to_string(), v.display().to_string()));
        Ok(v)
    }

    pub fn optional_path(
        &mut self,
        key: &str,
        flag: Option<PathBuf>,
    ) -> Result<Option<PathBuf>, CliError> {
        self.claim(key);
        let v = match flag {
            Some(v) => Some(v),
            None => self.from_file::<String>(key)?.map(PathBuf::from),
        };
        if let Some(v) = &v {
            self.resolved
                .push((key.to_string(), v.display().to_string()));
        }
        Ok(v)
    }

    /// Rejects config keys no flag claimed (catches typos and manifests of
    /// a different command).
    pub fn finish(&self) -> Result<(), CliError> {
        if let Some(key) = self.unclaimed.first() {
            return Err(CliError::Usage(format!(
                "config contains unknown key {key:?} for this command"
            )));
        }
        Ok(())
    }

    /// Writes the manifest: command, artifact version, every resolved
    /// key=value in resolution order, and the wall time.
    pub fn write_manifest(
        &self,
        command: &str,
        path: &Path,
        wall_time_s: f64,
    ) -> Result<(), CliError> {
        let mut out = String::new();
        out.push_str(&format!("command={command}\n"));
        out.push_str(&format!("version={}\n", env!("CARGO_PKG_VERSION")));
        for (k, v) in &self.resolved {
            out.push_str(&format!("{k}={v}\n"));
        }
        out.push_str(&format!("wall_time_s={wall_time_s}\n"));
        fs::write(path, out)?;
        Ok(())
    }
}
