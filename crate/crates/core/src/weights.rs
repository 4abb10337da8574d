//! Closed-form weights that depend on `|x|_max` only.
//!
//! Every weight here has the log profile
//!
//! ```text
//! ln w(e^t) = scale + power·t + outer·ln(1 + t_+) + inner·ln(1 + t_-) + abs·ln(1 + |t|)
//! ```
//!
//! which is closed under `v ↦ v^{-1/(p-1)}`, so duals stay in closed form.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::func::{Function, Phi, RadialProfile};
use crate::geometry::{box_radial_integral, max_norm, Cutoff, Integral, Region};

static KINK_AT_ONE: [f64; 1] = [1.0];

/// `max(ln t, 0)`.
pub fn log_plus(t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(invalid(format!("log_plus needs t > 0, got {t}")));
    }
    Ok(t.ln().max(0.0))
}

/// `p' = p/(p-1)`.
pub fn conjugate_exponent(p: f64) -> f64 {
    p / (p - 1.0)
}

fn check_p(p: f64) -> Result<()> {
    if p > 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("exponent p must lie in (1, inf), got {p}")))
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n >= 1 {
        Ok(())
    } else {
        Err(invalid("dimension must be at least 1"))
    }
}

/// Which closed-form family a weight came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "family")]
pub enum WeightKind {
    Constant { c: f64 },
    TheoremW { p: f64 },
    TheoremSigma { p: f64 },
    PowerLog { alpha: f64, beta: f64 },
    AnalyticMSigma { p: f64 },
    /// `|x|_max^{exponent}`.
    Power { exponent: f64 },
    /// Obtained from another weight by a power map.
    Derived,
}

/// Coefficients of the log profile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
struct LogProfile {
    scale: f64,
    power: f64,
    outer: f64,
    inner: f64,
    abs: f64,
}

impl LogProfile {
    const ZERO: LogProfile = LogProfile { scale: 0.0, power: 0.0, outer: 0.0, inner: 0.0, abs: 0.0 };

    fn eval(&self, t: f64) -> f64 {
        let mut v = self.scale + self.power * t;
        if self.outer != 0.0 && t > 0.0 {
            v += self.outer * t.ln_1p();
        }
        if self.inner != 0.0 && t < 0.0 {
            v += self.inner * (-t).ln_1p();
        }
        if self.abs != 0.0 {
            v += self.abs * t.abs().ln_1p();
        }
        v
    }

    fn times(&self, e: f64) -> LogProfile {
        let m = |c: f64| if c == 0.0 { 0.0 } else { c * e };
        LogProfile {
            scale: m(self.scale),
            power: m(self.power),
            outer: m(self.outer),
            inner: m(self.inner),
            abs: m(self.abs),
        }
    }

    fn is_constant(&self) -> bool {
        self.power == 0.0 && self.outer == 0.0 && self.inner == 0.0 && self.abs == 0.0
    }
}

/// A nonnegative weight `x ↦ g(|x|_max)` on `R^n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Weight {
    dim: usize,
    kind: WeightKind,
    profile: LogProfile,
}

impl Weight {
    fn build(dim: usize, kind: WeightKind, profile: LogProfile) -> Self {
        Self { dim, kind, profile }
    }

    pub fn constant(dim: usize, c: f64) -> Result<Self> {
        check_dim(dim)?;
        if !(c >= 0.0) || c.is_nan() {
            return Err(invalid(format!("constant weight must be nonnegative, got {c}")));
        }
        Ok(Self::build(dim, WeightKind::Constant { c }, LogProfile { scale: c.ln(), ..LogProfile::ZERO }))
    }

    /// `|x|_max^{exponent}`.
    pub fn power(dim: usize, exponent: f64) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self::build(dim, WeightKind::Power { exponent }, LogProfile { power: exponent, ..LogProfile::ZERO }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    /// `w(x)`; the origin maps to `+inf` for every non-constant weight.
    pub fn eval_at(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        Ok(Function::eval(self, x))
    }

    /// As [`Weight::eval_at`], but the origin is an error.
    pub fn eval_checked(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        if max_norm(x) == 0.0 && !self.profile.is_constant() {
            return Err(Error::Origin);
        }
        Ok(Function::eval(self, x))
    }

    /// `w^e` pointwise (`0^e = inf` for `e < 0`).
    pub fn powf(&self, e: f64) -> Weight {
        Self::build(self.dim, WeightKind::Derived, self.profile.times(e))
    }

    /// Pointwise product `w · u`.
    pub fn mul(&self, other: &Weight) -> Result<Weight> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        let (a, b) = (self.profile, other.profile);
        Ok(Self::build(
            self.dim,
            WeightKind::Derived,
            LogProfile {
                scale: a.scale + b.scale,
                power: a.power + b.power,
                outer: a.outer + b.outer,
                inner: a.inner + b.inner,
                abs: a.abs + b.abs,
            },
        ))
    }

    /// `∫_{Q(0,a), |x|_max >= eps} w`.
    pub fn origin_integral(&self, a: f64, cutoff: Cutoff) -> Integral {
        let h = 0.5 * a;
        let region = Region { lo: vec![-h; self.dim], hi: vec![h; self.dim] };
        self.integrate(&region, &Phi::identity(), cutoff)
    }

    /// Short descriptor such as `theorem-sigma:p=1.5`.
    pub fn descriptor(&self) -> String {
        match &self.kind {
            WeightKind::Constant { c } => format!("constant:c={c}"),
            WeightKind::TheoremW { p } => format!("theorem-w:p={p}"),
            WeightKind::TheoremSigma { p } => format!("theorem-sigma:p={p}"),
            WeightKind::PowerLog { alpha, beta } => format!("power-log:alpha={alpha},beta={beta}"),
            WeightKind::AnalyticMSigma { p } => format!("analytic-m-sigma:p={p}"),
            WeightKind::Power { exponent } => format!("power:exponent={exponent}"),
            WeightKind::Derived => "derived".to_string(),
        }
    }
}

impl RadialProfile for Weight {
    fn ln_value(&self, t: f64) -> f64 {
        self.profile.eval(t)
    }

    fn value(&self, r: f64) -> f64 {
        if r == 0.0 {
            return if self.profile.is_constant() { self.profile.scale.exp() } else { f64::INFINITY };
        }
        self.profile.eval(r.ln()).exp()
    }

    fn kinks(&self) -> &[f64] {
        if self.profile.outer != 0.0 || self.profile.inner != 0.0 || self.profile.abs != 0.0 {
            &KINK_AT_ONE
        } else {
            &[]
        }
    }
}

impl Function for Weight {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64]) -> f64 {
        RadialProfile::value(self, max_norm(x))
    }

    fn integrate(&self, region: &Region, phi: &Phi, cutoff: Cutoff) -> Integral {
        if self.profile.is_constant() {
            let region = region.clone();
            let vol = region.volume() - region.volume_within(cutoff.value());
            let v = phi.ln_apply(self.profile.scale).exp();
            return Integral::exact(if vol > 0.0 { v * vol } else { 0.0 });
        }
        box_radial_integral(region, &|t| phi.ln_apply(self.profile.eval(t)), cutoff, self.kinks())
    }
}

/// `σ = v^{-1/(p-1)}` pointwise, with `0 ↦ inf` and `inf ↦ 0`.
pub fn sigma_from_v(v: &Weight, p: f64) -> Result<Weight> {
    check_p(p)?;
    Ok(v.powf(-1.0 / (p - 1.0)))
}

/// `v = σ^{-(p-1)}`, the inverse of [`sigma_from_v`].
pub fn v_from_sigma(sigma: &Weight, p: f64) -> Result<Weight> {
    check_p(p)?;
    Ok(sigma.powf(-(p - 1.0)))
}

/// The counterexample pair
/// `w = |x|^{n(p-1)} / (1 + log_+|x|)^p`, `σ = 1 / (|x|^n (1 + log_+ 1/|x|)^{p'})`.
pub fn theorem_weights(p: f64, n: usize) -> Result<(Weight, Weight)> {
    check_p(p)?;
    check_dim(n)?;
    let nf = n as f64;
    let w = Weight::build(
        n,
        WeightKind::TheoremW { p },
        LogProfile { power: nf * (p - 1.0), outer: -p, ..LogProfile::ZERO },
    );
    let sigma = Weight::build(
        n,
        WeightKind::TheoremSigma { p },
        LogProfile { power: -nf, inner: -conjugate_exponent(p), ..LogProfile::ZERO },
    );
    Ok((w, sigma))
}

/// `(1 + |log 1/|x||) / (|x|^n (1 + log_+ 1/|x|)^{p'})`, the closed form `Mσ` is
/// comparable to.
pub fn analytic_m_sigma(p: f64, n: usize) -> Result<Weight> {
    check_p(p)?;
    check_dim(n)?;
    Ok(Weight::build(
        n,
        WeightKind::AnalyticMSigma { p },
        LogProfile { power: -(n as f64), inner: -conjugate_exponent(p), abs: 1.0, ..LogProfile::ZERO },
    ))
}

/// `1 / (|x|^α (1 + log_+ 1/|x|)^β)` with `0 < α < n`.
pub fn power_log_sigma(alpha: f64, beta: f64, n: usize) -> Result<Weight> {
    check_dim(n)?;
    if !(alpha > 0.0 && alpha < n as f64) {
        return Err(invalid(format!("alpha must lie in (0, {n}), got {alpha}")));
    }
    Ok(power_log_unchecked(alpha, beta, n))
}

/// Same profile without the local-integrability restriction on `alpha`.
pub(crate) fn power_log_unchecked(alpha: f64, beta: f64, n: usize) -> Weight {
    Weight::build(
        n,
        WeightKind::PowerLog { alpha, beta },
        LogProfile { power: -alpha, inner: -beta, ..LogProfile::ZERO },
    )
}

/// Weight family selected by name, e.g. `power-log:alpha=0.5,beta=0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum WeightSpec {
    TheoremW,
    TheoremSigma,
    PowerLog { alpha: f64, beta: f64 },
    Constant { c: f64 },
}

impl WeightSpec {
    pub fn build(&self, p: f64, n: usize) -> Result<Weight> {
        match self {
            WeightSpec::TheoremW => Ok(theorem_weights(p, n)?.0),
            WeightSpec::TheoremSigma => Ok(theorem_weights(p, n)?.1),
            WeightSpec::PowerLog { alpha, beta } => power_log_sigma(*alpha, *beta, n),
            WeightSpec::Constant { c } => Weight::constant(n, *c),
        }
    }
}

pub(crate) fn parse_params(body: &str, allowed: &[&str]) -> Result<Vec<(String, f64)>> {
    let mut out = Vec::new();
    for item in body.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("parameter `{item}` (expected key=value)")))?;
        let k = k.trim();
        if !allowed.contains(&k) {
            return Err(Error::Parse(format!("unknown parameter `{k}`")));
        }
        let v: f64 = v.trim().parse().map_err(|_| Error::Parse(format!("number `{}`", v.trim())))?;
        out.push((k.to_string(), v));
    }
    Ok(out)
}

pub(crate) fn param(params: &[(String, f64)], key: &str) -> Option<f64> {
    params.iter().rev().find(|(k, _)| k == key).map(|(_, v)| *v)
}

impl FromStr for WeightSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, body) = s.split_once(':').unwrap_or((s, ""));
        match name.trim() {
            "theorem-w" => {
                parse_params(body, &[])?;
                Ok(WeightSpec::TheoremW)
            }
            "theorem-sigma" => {
                parse_params(body, &[])?;
                Ok(WeightSpec::TheoremSigma)
            }
            "power-log" => {
                let ps = parse_params(body, &["alpha", "beta"])?;
                let alpha = param(&ps, "alpha").ok_or_else(|| Error::Parse("power-log needs alpha".into()))?;
                Ok(WeightSpec::PowerLog { alpha, beta: param(&ps, "beta").unwrap_or(0.0) })
            }
            "constant" => {
                let ps = parse_params(body, &["c"])?;
                Ok(WeightSpec::Constant { c: param(&ps, "c").unwrap_or(1.0) })
            }
            other => Err(Error::Parse(format!("weight family `{other}`"))),
        }
    }
}

impl fmt::Display for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightSpec::TheoremW => write!(f, "theorem-w"),
            WeightSpec::TheoremSigma => write!(f, "theorem-sigma"),
            WeightSpec::PowerLog { alpha, beta } => write!(f, "power-log:alpha={alpha},beta={beta}"),
            WeightSpec::Constant { c } => write!(f, "constant:c={c}"),
        }
    }
}

impl TryFrom<String> for WeightSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<WeightSpec> for String {
    fn from(w: WeightSpec) -> String {
        w.to_string()
    }
}
