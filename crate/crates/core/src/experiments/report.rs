//! Report types and their CSV/JSON output.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::Format;
use super::trend::{fit_series, verdict, Fit, SeriesPoint, Verdict};
use crate::conditions::ChainCheck;
use crate::error::{Error, Result};
use crate::geometry::GridParams;

pub const LIBRARY_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Parameters a series was produced with.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub p: f64,
    pub n: usize,
    pub spaces: Vec<String>,
    pub weights: Vec<String>,
    pub family_level: u32,
    pub grid_level: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub tag: String,
    pub params: Params,
    /// What the abscissa measures, e.g. `1+log(2/a)`.
    pub abscissa: String,
    pub series: Vec<SeriesPoint>,
    pub fit: Option<Fit>,
    pub verdict: Verdict,
    pub expected: Option<Verdict>,
}

impl SweepReport {
    /// Fits the series and applies the verdict rule.
    pub fn new(tag: impl Into<String>, params: Params, abscissa: impl Into<String>, series: Vec<SeriesPoint>) -> Self {
        let fit = fit_series(&series);
        let v = verdict(&series);
        Self { tag: tag.into(), params, abscissa: abscissa.into(), series, fit, verdict: v, expected: None }
    }

    pub fn expecting(mut self, v: Verdict) -> Self {
        self.expected = Some(v);
        self
    }

    pub fn meets_expectation(&self) -> bool {
        self.expected.is_none_or(|e| e == self.verdict)
    }

    /// Abscissas strictly increasing or strictly decreasing.
    pub fn is_monotone(&self) -> bool {
        let inc = self.series.windows(2).all(|w| w[1].abscissa > w[0].abscissa);
        let dec = self.series.windows(2).all(|w| w[1].abscissa < w[0].abscissa);
        inc || dec
    }
}

/// `(analytic Mσ)^p w / σ` at sampled radii.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointwiseTable {
    pub radii: Vec<f64>,
    pub ratios: Vec<f64>,
    pub max_rel_deviation: f64,
}

/// Numeric over analytic `Mσ` at two family refinement levels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowTable {
    pub levels: [u32; 2],
    pub radii: Vec<f64>,
    pub coarse: Vec<f64>,
    pub fine: Vec<f64>,
    pub window: [f64; 2],
    pub max_drift: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dichotomy {
    pub space: String,
    pub bump: Verdict,
    pub weak_testing: Verdict,
    /// False when `X'` is only equivalent to the associate space (Orlicz).
    pub exact_associate: bool,
    /// At least one of the two is a divergent trend.
    pub satisfied: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub space: String,
    pub checks: Vec<ChainCheck>,
    pub violations: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Status {
    pub expected_met: bool,
    /// Tags of inconclusive series.
    pub needs_refinement: Vec<String>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub experiment: String,
    pub library_version: String,
    pub params: Params,
    pub grid: GridParams,
    pub pointwise: Option<PointwiseTable>,
    pub windows: Option<WindowTable>,
    pub series: Vec<SweepReport>,
    pub dichotomy: Vec<Dichotomy>,
    pub chains: Vec<ChainReport>,
    pub status: Status,
}

impl ReportBundle {
    pub fn new(experiment: impl Into<String>, params: Params, grid: GridParams) -> Self {
        Self {
            experiment: experiment.into(),
            library_version: LIBRARY_VERSION.to_string(),
            params,
            grid,
            pointwise: None,
            windows: None,
            series: Vec::new(),
            dichotomy: Vec::new(),
            chains: Vec::new(),
            status: Status::default(),
        }
    }

    pub fn find(&self, tag: &str) -> Option<&SweepReport> {
        self.series.iter().find(|s| s.tag == tag)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// File-name-safe form of a tag.
pub fn file_stem(tag: &str) -> String {
    let mut out = String::with_capacity(tag.len());
    for c in tag.chars() {
        if c.is_ascii_alphanumeric() || c == '.' || c == '_' {
            out.push(c);
        } else if !out.ends_with('-') {
            out.push('-');
        }
    }
    out.trim_matches('-').to_string()
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile_in(dir, path)?;
    tmp.1.write_all(bytes)?;
    tmp.1.sync_all()?;
    drop(tmp.1);
    std::fs::rename(&tmp.0, path).inspect_err(|_| {
        let _ = std::fs::remove_file(&tmp.0);
    })?;
    Ok(())
}

fn tempfile_in(dir: &Path, target: &Path) -> Result<(PathBuf, std::fs::File)> {
    let name = target.file_name().and_then(|s| s.to_str()).unwrap_or("report");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let f = std::fs::OpenOptions::new().write(true).create(true).truncate(true).open(&tmp)?;
    Ok((tmp, f))
}

pub fn series_csv(series: &[SeriesPoint]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["abscissa", "value", "divergent"])?;
    for p in series {
        w.write_record([p.abscissa.to_string(), p.value.to_string(), p.divergent.to_string()])?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

pub fn read_series_csv(path: &Path) -> Result<Vec<SeriesPoint>> {
    let mut r = csv::Reader::from_path(path)?;
    let headers = r.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["abscissa", "value", "divergent"] {
        return Err(Error::Parse(format!("CSV header of {}", path.display())));
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let field = |i: usize| rec.get(i).ok_or_else(|| Error::Parse("short CSV row".into()));
        out.push(SeriesPoint {
            abscissa: field(0)?.parse().map_err(|_| Error::Parse("abscissa".into()))?,
            value: field(1)?.parse().map_err(|_| Error::Parse("value".into()))?,
            divergent: field(2)?.parse().map_err(|_| Error::Parse("divergent flag".into()))?,
        });
    }
    Ok(out)
}

/// Write one CSV per series and/or one JSON document into `dir`.
///
/// Returns the written paths. Each file is replaced atomically.
pub fn emit_report(bundle: &ReportBundle, dir: &Path, format: Format) -> Result<Vec<PathBuf>> {
    if bundle.series.is_empty() {
        return Err(Error::EmptyBundle);
    }
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    if format.csv() {
        for s in &bundle.series {
            let path = dir.join(format!("{}.csv", file_stem(&s.tag)));
            write_atomic(&path, &series_csv(&s.series)?)?;
            written.push(path);
        }
    }
    if format.json() {
        let path = dir.join(format!("{}.json", file_stem(&bundle.experiment)));
        write_atomic(&path, bundle.to_json()?.as_bytes())?;
        written.push(path);
    }
    Ok(written)
}
