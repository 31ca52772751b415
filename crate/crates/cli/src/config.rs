//! `key = value` settings merged from a config file and command-line flags.
//!
//! Every key has exactly one flag, spelled in kebab case (`rel_tol` is
//! `--rel-tol`). Flags win over the file. Relative paths from a file resolve
//! against the file's directory; relative paths from flags against the
//! working directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Arg, ArgAction, ArgMatches, Command};
use nalgebra::DVector;

use crate::failure::Failure;

#[derive(Debug, Clone, Copy)]
pub struct Key {
    pub name: &'static str,
    pub help: &'static str,
    pub switch: bool,
}

const fn key(name: &'static str, help: &'static str) -> Key {
    Key { name, help, switch: false }
}

const fn switch(name: &'static str, help: &'static str) -> Key {
    Key { name, help, switch: true }
}

pub const GENERATE: &[Key] = &[
    key("seed", "seed of the random system [42]"),
    key("n", "state dimension [2]"),
    key("m", "input channels [1]"),
    key("p", "output channels [1]"),
    key("dt", "sample period of the dataset [1e-3]"),
    key("duration", "dataset length in seconds [10]"),
    key("input", "dataset input: multisine | constant [multisine]"),
    key("frequencies", "sinusoids per input channel [6]"),
    key("x0", "initial state of the dataset, comma separated [0]"),
    key("order", "jet order L [lag]"),
    key("shifts", "shift count M [suggested from m, L, n]"),
    key("period", "shift period T [duration / 2M, snapped to dt]"),
    key("horizon", "simulation horizon of the target run [2]"),
    key("step", "simulation step [dt]"),
    key("target_seed", "seed of the target multisine [7]"),
    key("target_frequencies", "sinusoids per target channel [4]"),
    key("target_x0", "initial state of the target run, comma separated [0]"),
    key("mode", "simulation mode written to problem.txt [explicit]"),
    key("out_dir", "output directory [.]"),
];

const DATA: &[Key] = &[
    key("jet", "jet CSV of the dataset"),
    key("data", "raw `t,u..,y..` CSV, differentiated when no jet is given"),
    key("derivative_method", "derivative estimator for `data` [central4]"),
    key("n", "state dimension"),
    key("order", "jet order L"),
    key("shifts", "shift count M [suggested from m, L, n]"),
    key("period", "shift period T"),
    key("rel_tol", "relative singular value threshold [1e-8]"),
    key("probes", "informativity probe count [20]"),
];

pub const CHECK_ONLY: &[Key] = &[key("report", "informativity CSV to write")];

pub const SIMULATE_ONLY: &[Key] = &[
    key("target", "jet CSV `t,u0_1..` of the target input, simulation time"),
    key("horizon", "simulation horizon"),
    key("step", "RK4 step [data dt]"),
    key("mode", "explicit | implicit_lsq [explicit]"),
    key("init_tol", "initial-condition residual tolerance [1e-6]"),
    key("stage_tol", "implicit stage residual tolerance [1e-6]"),
    key("start", "data time mapped to simulation time zero [data start]"),
    key("y_init", "output derivatives at zero: `y0;y1;..`, channels comma separated"),
    key("u_init", "input derivatives at zero, same layout [from target]"),
    key("out", "result CSV to write [result.csv]"),
    key("truth", "oracle output CSV, for the summary and the plot"),
    key("plot", "SVG plot to write"),
    switch("force", "skip the informativity check"),
];

pub const COMPARE: &[Key] = &[
    key("result", "result CSV of a simulation"),
    key("truth", "reference output CSV"),
    key("out", "text file for the metrics"),
];

/// Keys that a generated problem file may contain without being read by
/// every command.
const SHARED: &[Key] = &[key("model", "model file")];

pub fn check_keys() -> Vec<Key> {
    DATA.iter().chain(CHECK_ONLY).copied().collect()
}

pub fn simulate_keys() -> Vec<Key> {
    DATA.iter().chain(SIMULATE_ONLY).copied().collect()
}

fn known(name: &str) -> bool {
    [GENERATE, DATA, CHECK_ONLY, SIMULATE_ONLY, COMPARE, SHARED]
        .iter()
        .any(|keys| keys.iter().any(|k| k.name == name))
}

fn flag(name: &str) -> String {
    name.replace('_', "-")
}

/// Adds `--config` and one flag per key.
pub fn command(name: &'static str, about: &'static str, keys: &[Key]) -> Command {
    let mut cmd = Command::new(name).about(about).arg(
        Arg::new("config")
            .long("config")
            .value_name("FILE")
            .help("key = value settings file"),
    );
    for k in keys {
        let arg = Arg::new(k.name).long(flag(k.name)).help(k.help);
        cmd = cmd.arg(if k.switch {
            arg.action(ArgAction::SetTrue)
        } else {
            arg.value_name("VALUE")
        });
    }
    cmd
}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    /// Directory that relative paths resolve against.
    base: PathBuf,
    origin: String,
}

#[derive(Debug, Default)]
pub struct Settings {
    entries: BTreeMap<String, Entry>,
}

impl Settings {
    pub fn from_matches(matches: &ArgMatches, keys: &[Key]) -> Result<Self, Failure> {
        let mut settings = Settings::default();
        if let Some(path) = matches.get_one::<String>("config") {
            settings.load_file(Path::new(path))?;
        }
        for k in keys {
            let value = if k.switch {
                matches.get_flag(k.name).then(|| "true".to_string())
            } else {
                matches.get_one::<String>(k.name).cloned()
            };
            if let Some(value) = value {
                settings.entries.insert(
                    k.name.to_string(),
                    Entry { value, base: PathBuf::new(), origin: format!("--{}", flag(k.name)) },
                );
            }
        }
        Ok(settings)
    }

    fn load_file(&mut self, path: &Path) -> Result<(), Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let origin = format!("{}:{}", path.display(), idx + 1);
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Failure::parse(format!("{origin}: expected `key = value`")))?;
            let name = k.trim().replace('-', "_");
            if !known(&name) {
                return Err(Failure::validation(format!("{origin}: unknown key `{name}`")));
            }
            self.entries.insert(
                name,
                Entry { value: v.trim().to_string(), base: base.clone(), origin },
            );
        }
        Ok(())
    }

    pub fn raw(&self, name: &str) -> Option<&str> {
        self.entries.get(name).map(|e| e.value.as_str())
    }

    fn invalid(&self, name: &str, why: impl std::fmt::Display) -> Failure {
        let origin = self.entries.get(name).map_or("default", |e| e.origin.as_str());
        Failure::validation(format!("`{name}` ({origin}): {why}"))
    }

    pub fn get<T: FromStr>(&self, name: &str) -> Result<Option<T>, Failure>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(name)
            .map(|v| v.parse::<T>().map_err(|e| self.invalid(name, format!("`{v}`: {e}"))))
            .transpose()
    }

    pub fn get_or<T: FromStr>(&self, name: &str, default: T) -> Result<T, Failure>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.get(name)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, name: &str) -> Result<T, Failure>
    where
        T::Err: std::fmt::Display,
    {
        self.get(name)?
            .ok_or_else(|| Failure::validation(format!("missing setting `{name}` (flag --{})", flag(name))))
    }

    pub fn positive(&self, name: &str, default: Option<f64>) -> Result<f64, Failure> {
        let value = match default {
            Some(d) => self.get_or(name, d)?,
            None => self.require(name)?,
        };
        if !(value.is_finite() && value > 0.0) {
            return Err(self.invalid(name, "must be a positive number"));
        }
        Ok(value)
    }

    pub fn path(&self, name: &str) -> Option<PathBuf> {
        self.entries.get(name).map(|e| e.base.join(&e.value))
    }

    pub fn flag(&self, name: &str) -> Result<bool, Failure> {
        self.get_or(name, false)
    }

    /// Comma-separated numbers.
    pub fn vector(&self, name: &str) -> Result<Option<DVector<f64>>, Failure> {
        self.raw(name)
            .map(|v| parse_vector(v).map_err(|e| self.invalid(name, e)))
            .transpose()
    }

    /// Semicolon-separated vectors.
    pub fn vectors(&self, name: &str) -> Result<Option<Vec<DVector<f64>>>, Failure> {
        self.raw(name)
            .map(|v| {
                v.split(';')
                    .map(parse_vector)
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| self.invalid(name, e))
            })
            .transpose()
    }
}

fn parse_vector(text: &str) -> Result<DVector<f64>, String> {
    let values = text
        .split(',')
        .map(|s| {
            let s = s.trim();
            match s.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(format!("`{s}` is not a finite number")),
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DVector::from_vec(values))
}

pub fn format_vector(v: &DVector<f64>) -> String {
    v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(",")
}
