//! Run configuration, loadable from TOML and overridable by CLI flags.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::spaces::FunctionSpace;
use crate::weights::WeightSpec;

/// Inclusive integer range `k0..k1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct KRange {
    pub k0: i32,
    pub k1: i32,
}

impl KRange {
    pub fn new(k0: i32, k1: i32) -> Result<Self> {
        if k0 > k1 {
            return Err(invalid(format!("empty range {k0}..{k1}")));
        }
        Ok(Self { k0, k1 })
    }

    pub fn values(&self) -> impl Iterator<Item = i32> {
        self.k0..=self.k1
    }
}

fn split_range(s: &str) -> Result<(&str, &str)> {
    s.split_once("..").ok_or_else(|| Error::Parse(format!("range `{s}`, expected k0..k1")))
}

fn parse_num<T: FromStr>(s: &str) -> Result<T> {
    s.trim().parse().map_err(|_| Error::Parse(format!("number `{s}`")))
}

impl FromStr for KRange {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = split_range(s)?;
        KRange::new(parse_num(a)?, parse_num(b)?)
    }
}

impl fmt::Display for KRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.k0, self.k1)
    }
}

impl TryFrom<String> for KRange {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<KRange> for String {
    fn from(r: KRange) -> String {
        r.to_string()
    }
}

/// Truncation radii `eps = 2^{-k}`: every `k` in `k0..k1`, or `k0, 2k0, 4k0, …`
/// up to `k1` with the `:doubling` suffix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct EpsSweep {
    pub k0: u64,
    pub k1: u64,
    pub doubling: bool,
}

impl EpsSweep {
    pub fn new(k0: u64, k1: u64, doubling: bool) -> Result<Self> {
        if k0 == 0 || k0 > k1 {
            return Err(invalid(format!("eps sweep needs 1 <= k0 <= k1, got {k0}..{k1}")));
        }
        Ok(Self { k0, k1, doubling })
    }

    pub fn values(&self) -> Vec<u64> {
        if self.doubling {
            std::iter::successors(Some(self.k0), |k| k.checked_mul(2)).take_while(|k| *k <= self.k1).collect()
        } else {
            (self.k0..=self.k1).collect()
        }
    }
}

impl Default for EpsSweep {
    fn default() -> Self {
        Self { k0: 3, k1: 1 << 20, doubling: true }
    }
}

impl FromStr for EpsSweep {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (body, doubling) = match s.strip_suffix(":doubling") {
            Some(b) => (b, true),
            None => (s, false),
        };
        let (a, b) = split_range(body)?;
        EpsSweep::new(parse_num(a)?, parse_num(b)?, doubling)
    }
}

impl fmt::Display for EpsSweep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}{}", self.k0, self.k1, if self.doubling { ":doubling" } else { "" })
    }
}

impl TryFrom<String> for EpsSweep {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<EpsSweep> for String {
    fn from(r: EpsSweep) -> String {
        r.to_string()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
    #[default]
    Both,
}

impl Format {
    pub fn csv(&self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    pub fn json(&self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "both" => Ok(Format::Both),
            _ => Err(Error::Parse(format!("format `{s}`, expected csv, json or both"))),
        }
    }
}

/// Every knob of a run. Field names match the CLI flags.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct Config {
    pub p: f64,
    pub n: usize,
    pub space: Vec<FunctionSpace>,
    /// Scales `a = 2^{-k}`.
    pub scales: KRange,
    pub eps_sweep: EpsSweep,
    /// Lattice depth of the maximal-operator family below each tested cube.
    pub family_level: u32,
    pub grid_level: u32,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub w: WeightSpec,
    pub sigma: WeightSpec,
    pub alpha: f64,
    pub beta: f64,
    /// Exponent of the Neugebauer condition.
    pub r: f64,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            p: 1.5,
            n: 1,
            space: Vec::new(),
            scales: KRange { k0: 0, k1: 24 },
            eps_sweep: EpsSweep::default(),
            family_level: 3,
            grid_level: 1,
            out: None,
            format: Format::Both,
            w: WeightSpec::TheoremW,
            sigma: WeightSpec::TheoremSigma,
            alpha: 0.5,
            beta: 0.0,
            r: 2.0,
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0 && self.p.is_finite()) {
            return Err(invalid(format!("exponent p must lie in (1, inf), got {}", self.p)));
        }
        if self.n == 0 {
            return Err(invalid("dimension must be at least 1"));
        }
        Ok(())
    }

    /// Spaces to test, falling back to the default pair.
    pub fn spaces_or_default(&self) -> Result<Vec<FunctionSpace>> {
        if !self.space.is_empty() {
            return Ok(self.space.clone());
        }
        let pp = crate::weights::conjugate_exponent(self.p);
        Ok(vec![FunctionSpace::lebesgue(pp)?, FunctionSpace::orlicz_bump(pp, pp - 0.5)?])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_parse() {
        assert_eq!("0..24".parse::<KRange>().unwrap(), KRange { k0: 0, k1: 24 });
        assert!("5..2".parse::<KRange>().is_err());
        let e: EpsSweep = "3..40".parse().unwrap();
        assert_eq!(e.values().len(), 38);
        let e: EpsSweep = "3..100:doubling".parse().unwrap();
        assert_eq!(e.values(), vec![3, 6, 12, 24, 48, 96]);
        assert_eq!(e.to_string(), "3..100:doubling");
        assert!("0..4".parse::<EpsSweep>().is_err());
    }

    #[test]
    fn toml_round_trip() {
        let text = r#"
            p = 1.5
            space = ["lebesgue:r=3", "orlicz:pprime=3,gamma=2.5"]
            scales = "0..12"
            eps-sweep = "3..40"
            format = "json"
        "#;
        let c = Config::from_toml(text).unwrap();
        assert_eq!(c.space.len(), 2);
        assert_eq!(c.scales, KRange { k0: 0, k1: 12 });
        assert_eq!(c.format, Format::Json);
        assert_eq!(c.n, 1);
        assert_eq!(Config::from_toml(&c.to_toml().unwrap()).unwrap(), c);
        assert!(Config::from_toml("bogus = 1").is_err());
    }
}
