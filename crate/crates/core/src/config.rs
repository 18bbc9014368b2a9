//! Run configuration and the `key=value` configuration file.

use std::path::PathBuf;
use std::str::FromStr;

use crate::ecmg::Interpolation;
use crate::error::{Error, Result};
use crate::grid::GridLevel;
use crate::report::Format;

/// Solution method of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    EcmgJcg,
    EcmgCg,
    VCycle,
    WCycle,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::EcmgJcg, Method::EcmgCg, Method::VCycle, Method::WCycle];

    pub fn name(self) -> &'static str {
        match self {
            Method::EcmgJcg => "ecmg_jcg",
            Method::EcmgCg => "ecmg_cg",
            Method::VCycle => "vcycle",
            Method::WCycle => "wcycle",
        }
    }

    pub fn is_cascade(self) -> bool {
        matches!(self, Method::EcmgJcg | Method::EcmgCg)
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown method {s:?}")))
    }
}

impl FromStr for Interpolation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "serendipity" => Ok(Interpolation::Serendipity),
            "lagrange27" => Ok(Interpolation::Lagrange27),
            _ => Err(Error::Config(format!("unknown interpolation {s:?}"))),
        }
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "text" => Ok(Format::Text),
            _ => Err(Error::Config(format!("unknown format {s:?}"))),
        }
    }
}

/// Finest-level node count allowed without `allow_large`: a 128³ grid.
pub const DESK_NODE_LIMIT: usize = 129 * 129 * 129;

/// Rough bytes per node held by a run: the 27-point matrix of every level
/// plus a dozen work vectors.
const BYTES_PER_NODE: usize = 27 * 12 * 8 / 7 + 12 * 8;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: String,
    pub method: Method,
    /// Coarsest cells per axis; the problem's default when `None`.
    pub coarsest: Option<[usize; 3]>,
    pub levels: usize,
    pub eps: f64,
    /// Interpolation inside coarse cells for the cascade's initial guesses.
    pub interpolation: Interpolation,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub threads: Option<usize>,
    pub allow_large: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            problem: "p1".into(),
            method: Method::EcmgJcg,
            coarsest: None,
            levels: 5,
            eps: 1e-8,
            interpolation: Interpolation::Serendipity,
            out: None,
            format: Format::Csv,
            threads: None,
            allow_large: false,
        }
    }
}

/// Parses `NX,NY,NZ`.
pub fn parse_cells(s: &str) -> Result<[usize; 3]> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let bad = || Error::Config(format!("expected NX,NY,NZ, got {s:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let mut c = [0; 3];
    for (ci, p) in c.iter_mut().zip(&parts) {
        *ci = p.parse().map_err(|_| bad())?;
    }
    Ok(c)
}

fn parse_bool(s: &str) -> Result<bool> {
    match s {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("expected a boolean, got {s:?}"))),
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::Config(format!("eps {} must lie in (0, 1)", self.eps)));
        }
        if self.method.is_cascade() && self.levels < 3 {
            return Err(Error::Config(format!("{} needs at least 3 levels", self.method.name())));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be positive".into()));
        }
        Ok(())
    }

    /// Refuses grids above desk scale unless `allow_large` is set.
    pub fn check_size(&self, finest: &GridLevel) -> Result<()> {
        let n = finest.node_count();
        let gib = (n * BYTES_PER_NODE) as f64 / (1u64 << 30) as f64;
        if n > DESK_NODE_LIMIT && !self.allow_large {
            return Err(Error::Config(format!(
                "finest grid {} has {n} nodes (about {gib:.1} GiB); pass --allow-large to run it",
                finest.mesh_label()
            )));
        }
        Ok(())
    }

    /// Applies one `key=value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let num = |what: &str| Error::Config(format!("bad {what} value {value:?}"));
        match key {
            "problem" => self.problem = value.to_string(),
            "method" => self.method = value.parse()?,
            "coarsest" => self.coarsest = Some(parse_cells(value)?),
            "levels" => self.levels = value.parse().map_err(|_| num(key))?,
            "eps" => self.eps = value.parse().map_err(|_| num(key))?,
            "interp" | "interpolation" => self.interpolation = value.parse()?,
            "out" => self.out = Some(PathBuf::from(value)),
            "format" => self.format = value.parse()?,
            "threads" => self.threads = Some(value.parse().map_err(|_| num(key))?),
            "allow_large" | "allow-large" => self.allow_large = parse_bool(value)?,
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Reads `key=value` lines on top of the defaults. Blank lines and lines
    /// starting with `#` are skipped.
    pub fn from_file_contents(text: &str) -> Result<Self> {
        let mut c = RunConfig::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value", n + 1)))?;
            c.set(k.trim(), v.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", n + 1)))?;
        }
        Ok(c)
    }
}
