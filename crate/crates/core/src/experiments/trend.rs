//! Least-squares trend fits and the bounded/divergent verdict rule.

use serde::{Deserialize, Serialize};

/// Minimum `R²` for a divergent trend.
pub const DIVERGENT_R2: f64 = 0.99;
/// Minimum `max/min` span for a divergent trend.
pub const DIVERGENT_SPAN: f64 = 4.0;
/// Maximum fitted relative increase over the second half for a bounded trend.
pub const BOUNDED_RISE: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub abscissa: f64,
    pub value: f64,
    pub divergent: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    BoundedTrend,
    DivergentTrend,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::BoundedTrend => "bounded-trend",
            Verdict::DivergentTrend => "divergent-trend",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// Finite points used.
    pub points: usize,
}

/// Ordinary least squares `y ≈ slope·x + intercept`; `None` below 2 points.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<Fit> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .map(|(x, y)| (*x, *y))
        .collect();
    let m = pts.len();
    if m < 2 {
        return None;
    }
    let mf = m as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / mf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / mf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Some(Fit { slope, intercept: my - slope * mx, r2, points: m })
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

/// Fit over the finite points of a series.
pub fn fit_series(series: &[SeriesPoint]) -> Option<Fit> {
    let xs: Vec<f64> = series.iter().map(|p| p.abscissa).collect();
    let ys: Vec<f64> = series.iter().map(|p| p.value).collect();
    linear_fit(&xs, &ys)
}

/// The verdict rule.
///
/// * fewer than 3 finite points: inconclusive;
/// * divergent-trend: slope > 0, `R² >= 0.99` and `max/min >= 4` over the finite points;
/// * bounded-trend: no divergent points, and the line fitted to the second half
///   rises by at most 10% of that half's median across it;
/// * otherwise inconclusive.
pub fn verdict(series: &[SeriesPoint]) -> Verdict {
    let finite: Vec<SeriesPoint> =
        series.iter().copied().filter(|p| p.value.is_finite() && p.abscissa.is_finite()).collect();
    if finite.len() < 3 {
        return Verdict::Inconclusive;
    }
    let fit = fit_series(&finite);
    let max = finite.iter().map(|p| p.value).fold(f64::NEG_INFINITY, f64::max);
    let min = finite.iter().map(|p| p.value).fold(f64::INFINITY, f64::min);
    if let Some(fit) = fit {
        if fit.slope > 0.0 && fit.r2 >= DIVERGENT_R2 && min > 0.0 && max / min >= DIVERGENT_SPAN {
            return Verdict::DivergentTrend;
        }
    }
    if series.iter().any(|p| p.divergent || !p.value.is_finite()) {
        return Verdict::Inconclusive;
    }
    let half = &finite[finite.len() / 2..];
    let half = if half.len() < 2 { &finite[finite.len() - 2..] } else { half };
    let Some(hfit) = fit_series(half) else {
        return Verdict::Inconclusive;
    };
    let mut vals: Vec<f64> = half.iter().map(|p| p.value).collect();
    let med = median(&mut vals);
    let span = half.last().expect("nonempty").abscissa - half[0].abscissa;
    let rise = hfit.slope * span;
    if med > 0.0 && rise <= BOUNDED_RISE * med {
        Verdict::BoundedTrend
    } else {
        Verdict::Inconclusive
    }
}
