//! Lebesgue and Orlicz spaces, averages over cubes and associate spaces.
//!
//! Cube averages use the normalized measure `dx/|Q|`, which is what the
//! dilation `τ_{ℓ(Q)}(f χ_Q)` produces for rearrangement-invariant norms.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::func::{Function, Phi};
use crate::geometry::{Cube, Cutoff, Integral, Region};
use crate::weights::{param, parse_params};

const ROOT_TOL: f64 = 1e-12;
const LUX_TOL: f64 = 1e-10;
const BRACKET_CAP: f64 = 1e12;

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 35.0 {
        z + (-z).exp()
    } else if z < -35.0 {
        z.exp()
    } else {
        z.exp().ln_1p()
    }
}

/// `ln softplus(z)`, accurate for very negative `z`.
fn ln_softplus(z: f64) -> f64 {
    if z < -35.0 {
        z
    } else {
        softplus(z).ln()
    }
}

/// `e^z / (1 + e^z)`.
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Convex increasing `A` with `A(0) = 0` and `A(t)/t → ∞`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "family")]
pub enum YoungFunction {
    /// `coef · t^q`, `q > 1`.
    Power { q: f64, coef: f64 },
    /// `t^{p'} log^γ(1 + t)`, `p' > 1`, `γ >= 0`.
    Bump { pprime: f64, gamma: f64 },
    /// Legendre conjugate `sup_t (s t - A(t))` of the inner function.
    Conjugate(Box<YoungFunction>),
}

impl YoungFunction {
    pub fn power(q: f64) -> Result<Self> {
        Self::scaled_power(q, 1.0)
    }

    pub fn scaled_power(q: f64, coef: f64) -> Result<Self> {
        if !(q > 1.0 && q.is_finite()) {
            return Err(invalid(format!("power Young function needs q > 1, got {q}")));
        }
        if !(coef > 0.0 && coef.is_finite()) {
            return Err(invalid(format!("coefficient must be positive, got {coef}")));
        }
        Ok(YoungFunction::Power { q, coef })
    }

    pub fn bump(pprime: f64, gamma: f64) -> Result<Self> {
        if !(pprime > 1.0 && pprime.is_finite()) {
            return Err(invalid(format!("bump needs p' > 1, got {pprime}")));
        }
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(invalid(format!("bump needs gamma >= 0, got {gamma}")));
        }
        Ok(YoungFunction::Bump { pprime, gamma })
    }

    /// The Legendre conjugate; conjugating twice returns the original.
    pub fn conjugate(&self) -> YoungFunction {
        match self {
            YoungFunction::Power { q, coef } => {
                // Ā(s) = (q-1) c (s/(cq))^{q'}, again a scaled power.
                let qp = q / (q - 1.0);
                let c2 = (q - 1.0) * coef * (coef * q).powf(-qp);
                YoungFunction::Power { q: qp, coef: c2 }
            }
            YoungFunction::Conjugate(inner) => (**inner).clone(),
            other => YoungFunction::Conjugate(Box::new(other.clone())),
        }
    }

    /// `ln A(e^z)`.
    pub fn ln_eval_exp(&self, z: f64) -> f64 {
        match self {
            YoungFunction::Power { q, coef } => coef.ln() + q * z,
            YoungFunction::Bump { pprime, gamma } => {
                if *gamma == 0.0 {
                    pprime * z
                } else {
                    pprime * z + gamma * ln_softplus(z)
                }
            }
            YoungFunction::Conjugate(inner) => inner.ln_conjugate_exp(z).unwrap_or(f64::NAN),
        }
    }

    /// `A(t)` for `t >= 0`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(invalid(format!("Young function argument must be >= 0, got {t}")));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        let v = self.ln_eval_exp(t.ln());
        if v.is_nan() {
            return Err(Error::RootNotFound(format!("conjugate at {t}")));
        }
        Ok(v.exp())
    }

    /// `(ln A'(e^τ), d/dτ ln A'(e^τ))`.
    fn ln_derivative(&self, tau: f64) -> Result<(f64, f64)> {
        match self {
            YoungFunction::Power { q, coef } => Ok(((coef * q).ln() + (q - 1.0) * tau, q - 1.0)),
            YoungFunction::Bump { pprime, gamma } => {
                let (pp, g) = (*pprime, *gamma);
                if g == 0.0 {
                    return Ok((pp.ln() + (pp - 1.0) * tau, pp - 1.0));
                }
                // A'(t) = t^{p'-1} L^{γ-1} (p' L + γ t/(1+t)),  L = ln(1+t)
                let l = softplus(tau);
                let ln_l = ln_softplus(tau);
                let s = sigmoid(tau);
                let inner = pp * l + g * s;
                let h = (pp - 1.0) * tau + (g - 1.0) * ln_l + inner.ln();
                let dl_over_l = if tau < -35.0 { 1.0 } else { s / l };
                let dh = (pp - 1.0) + (g - 1.0) * dl_over_l + (pp * s + g * s * (1.0 - s)) / inner;
                Ok((h, dh))
            }
            YoungFunction::Conjugate(inner) => {
                // Ā'(s) = (A')^{-1}(s)
                let tau = inner.solve_derivative(tau)?;
                let (_, dh) = inner.ln_derivative(tau)?;
                Ok((tau, 1.0 / dh))
            }
        }
    }

    /// Solve `ln A'(e^τ) = σ` for `τ` (monotone in `τ`).
    fn solve_derivative(&self, sigma: f64) -> Result<f64> {
        let h = |tau: f64| self.ln_derivative(tau).map(|(v, d)| (v - sigma, d));
        let (_, d0) = h(0.0)?;
        let mut tau = {
            let (v0, _) = h(0.0)?;
            -v0 / d0.max(1e-3)
        };
        // bracket
        let mut lo = tau;
        let mut hi = tau;
        let mut step = 1.0;
        while h(lo)?.0 > 0.0 {
            lo -= step;
            step *= 2.0;
            if step > 1e6 {
                return Err(Error::RootNotFound(format!("no lower bracket for A' = e^{sigma}")));
            }
        }
        step = 1.0;
        while h(hi)?.0 < 0.0 {
            hi += step;
            step *= 2.0;
            if step > 1e6 {
                return Err(Error::RootNotFound(format!("no upper bracket for A' = e^{sigma}")));
            }
        }
        tau = tau.clamp(lo, hi);
        for _ in 0..200 {
            let (v, d) = h(tau)?;
            if v == 0.0 {
                return Ok(tau);
            }
            if v > 0.0 {
                hi = tau;
            } else {
                lo = tau;
            }
            let mut next = tau - v / d;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = 0.5 * (lo + hi);
            }
            if (next - tau).abs() <= ROOT_TOL * (1.0 + tau.abs()) || hi - lo <= ROOT_TOL * (1.0 + tau.abs()) {
                return Ok(next);
            }
            tau = next;
        }
        Err(Error::RootNotFound(format!("Newton iteration for A' = e^{sigma}")))
    }

    /// `ln Ā(e^σ)` where `Ā` is the conjugate of `self`.
    fn ln_conjugate_exp(&self, sigma: f64) -> Result<f64> {
        if let YoungFunction::Power { .. } = self {
            return Ok(self.conjugate().ln_eval_exp(sigma));
        }
        if let YoungFunction::Conjugate(inner) = self {
            return Ok(inner.ln_eval_exp(sigma));
        }
        let tau = self.solve_derivative(sigma)?;
        // Ā(s) = s t - A(t) = s t (1 - A(t)/(s t)), t = e^τ, s = A'(t)
        let ratio = (self.ln_eval_exp(tau) - sigma - tau).exp();
        Ok(sigma + tau + (-ratio.min(1.0)).ln_1p())
    }

    /// `Ā(s) = sup_{t >= 0} (s t - A(t))`.
    pub fn conjugate_at(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) {
            return Err(invalid(format!("conjugate argument must be >= 0, got {s}")));
        }
        if s == 0.0 {
            return Ok(0.0);
        }
        Ok(self.ln_conjugate_exp(s.ln())?.exp())
    }

    /// `A^{-1}(y)` by bisection in log form.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        if !(y >= 0.0) {
            return Err(invalid("inverse needs y >= 0"));
        }
        if y == 0.0 {
            return Ok(0.0);
        }
        let target = y.ln();
        let (mut lo, mut hi) = (-1.0, 1.0);
        while self.ln_eval_exp(lo) > target {
            lo *= 2.0;
        }
        while self.ln_eval_exp(hi) < target {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.ln_eval_exp(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 * (1.0 + mid.abs()) {
                break;
            }
        }
        Ok((0.5 * (lo + hi)).exp())
    }
}

/// `A(t)`.
pub fn young_eval(a: &YoungFunction, t: f64) -> Result<f64> {
    a.eval(t)
}

/// `Ā(s)`.
pub fn young_conjugate(a: &YoungFunction, s: f64) -> Result<f64> {
    a.conjugate_at(s)
}

/// A concrete Banach function space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum FunctionSpace {
    Lebesgue { r: f64 },
    Orlicz { young: YoungFunction },
}

/// An `X`-average; `divergent` marks a norm that is infinite as far as the
/// quadrature and bracketing can tell (then `value` is the last finite
/// lower estimate, or `inf`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormValue {
    pub value: f64,
    pub divergent: bool,
}

impl NormValue {
    pub fn finite(value: f64) -> Self {
        Self { value, divergent: false }
    }
}

impl FunctionSpace {
    pub fn lebesgue(r: f64) -> Result<Self> {
        if !(r >= 1.0 && r.is_finite()) {
            return Err(invalid(format!("Lebesgue exponent must lie in [1, inf), got {r}")));
        }
        Ok(FunctionSpace::Lebesgue { r })
    }

    pub fn orlicz(young: YoungFunction) -> Self {
        FunctionSpace::Orlicz { young }
    }

    /// Orlicz space of `t^{p'} log^γ(1+t)`.
    pub fn orlicz_bump(pprime: f64, gamma: f64) -> Result<Self> {
        Ok(FunctionSpace::Orlicz { young: YoungFunction::bump(pprime, gamma)? })
    }

    /// Whether [`FunctionSpace::associate`] is exact (Lebesgue) or only
    /// equivalent up to a factor 2 (Orlicz).
    pub fn exact_associate(&self) -> bool {
        matches!(self, FunctionSpace::Lebesgue { .. })
    }

    /// `L^r ↦ L^{r'}` and `L^A ↦ L^{Ā}`.
    pub fn associate(&self) -> Result<FunctionSpace> {
        match self {
            FunctionSpace::Lebesgue { r } => {
                if *r <= 1.0 {
                    return Err(invalid("associate spaces are only formed for r in (1, inf)"));
                }
                Ok(FunctionSpace::Lebesgue { r: r / (r - 1.0) })
            }
            FunctionSpace::Orlicz { young } => Ok(FunctionSpace::Orlicz { young: young.conjugate() }),
        }
    }

    /// `‖f‖_{X,Q}` under `dx/|Q|`, restricted to `|x|_max >= eps`.
    pub fn norm_on_cube(&self, f: &dyn Function, q: &Cube, cutoff: Cutoff) -> Result<NormValue> {
        self.norm_on_region(f, &q.region(), q.volume(), cutoff)
    }

    /// Norm of `f χ_region` under `dx/mass`.
    pub fn norm_on_region(
        &self,
        f: &dyn Function,
        region: &Region,
        mass: f64,
        cutoff: Cutoff,
    ) -> Result<NormValue> {
        if f.dim() != region.dim() {
            return Err(Error::DimensionMismatch { expected: region.dim(), got: f.dim() });
        }
        match self {
            FunctionSpace::Lebesgue { r } => {
                let int = f.integrate(region, &Phi::power(*r), cutoff);
                let v = (int.value / mass).powf(1.0 / r);
                Ok(NormValue { value: if int.value.is_finite() { v } else { f64::INFINITY }, divergent: !int.converged })
            }
            FunctionSpace::Orlicz { young } => luxemburg(f, region, mass, young, cutoff),
        }
    }
}

/// `inf{λ > 0 : mass^{-1} ∫ A(|f|/λ) <= A(1)}`.
///
/// The modular is normalized by `A(1)` so that constants have norm equal to
/// themselves; this changes the norm only up to a constant factor.
fn luxemburg(f: &dyn Function, region: &Region, mass: f64, young: &YoungFunction, cutoff: Cutoff) -> Result<NormValue> {
    let level = young.ln_eval_exp(0.0);
    let avg = f.integrate(region, &Phi::identity(), cutoff);
    if avg.value == 0.0 && avg.converged {
        return Ok(NormValue::finite(0.0));
    }
    // g(μ) = ln(modular at λ = e^μ); decreasing, root wanted.
    let g = |mu: f64| -> f64 {
        let phi = Phi::young(young).scale_ln(-mu);
        let int: Integral = f.integrate(region, &phi, cutoff);
        if !int.converged || !int.value.is_finite() {
            f64::INFINITY
        } else if int.value <= 0.0 {
            f64::NEG_INFINITY
        } else {
            (int.value / mass).ln() - level
        }
    };
    let start = if avg.value.is_finite() && avg.value > 0.0 {
        (2.0 * avg.value / mass).ln()
    } else {
        0.0
    };
    let cap = start + BRACKET_CAP.ln();
    let mut hi = start;
    let mut g_hi = g(hi);
    while g_hi > 0.0 {
        if hi >= cap {
            return Ok(NormValue { value: f64::INFINITY, divergent: true });
        }
        // an infinite modular stays infinite under dilation (Δ2), so jump ahead
        let jump = if g_hi.is_infinite() { 1e4f64.ln() } else { 4f64.ln() };
        hi = (hi + jump).min(cap);
        g_hi = g(hi);
    }
    let floor = f64::MIN_POSITIVE.ln();
    let mut lo = hi - 4f64.ln();
    let mut g_lo = g(lo);
    while g_lo < 0.0 {
        if lo <= floor {
            return Ok(NormValue::finite(0.0));
        }
        hi = lo;
        g_hi = g_lo;
        lo = (lo - 4f64.ln()).max(floor);
        g_lo = g(lo);
    }
    if g_hi == 0.0 {
        return Ok(NormValue::finite(hi.exp()));
    }
    // Illinois-accelerated bisection on ln λ.
    let mut side = 0i8;
    let (mut flo, mut fhi) = (g_lo, g_hi);
    for _ in 0..200 {
        let width = hi - lo;
        if width <= LUX_TOL {
            break;
        }
        let mut mid = if flo.is_finite() && fhi.is_finite() && flo != fhi {
            (lo * fhi - hi * flo) / (fhi - flo)
        } else {
            0.5 * (lo + hi)
        };
        if !(mid > lo && mid < hi) {
            mid = 0.5 * (lo + hi);
        }
        let gm = g(mid);
        if gm == 0.0 || gm.abs() <= 0.1 * LUX_TOL {
            return Ok(NormValue::finite(mid.exp()));
        }
        if gm > 0.0 {
            lo = mid;
            flo = gm;
            if side == 1 {
                fhi *= 0.5;
            }
            side = 1;
        } else {
            hi = mid;
            fhi = gm;
            if side == -1 {
                flo *= 0.5;
            }
            side = -1;
        }
    }
    Ok(NormValue::finite((0.5 * (lo + hi)).exp()))
}

/// `‖f‖_{L¹,Q}`, which equals the integral average `|Q|^{-1} ∫_Q |f|`.
pub fn x_average_l1_consistency(f: &dyn Function, q: &Cube) -> Result<f64> {
    let l1 = FunctionSpace::Lebesgue { r: 1.0 };
    let v = l1.norm_on_cube(f, q, Cutoff::NONE)?;
    if v.divergent {
        return Err(Error::NonConvergent { estimate: v.value });
    }
    Ok(v.value)
}

impl FromStr for FunctionSpace {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, body) = s.split_once(':').unwrap_or((s, ""));
        match name.trim() {
            "lebesgue" => {
                let ps = parse_params(body, &["r"])?;
                let r = param(&ps, "r").ok_or_else(|| Error::Parse("lebesgue needs r".into()))?;
                FunctionSpace::lebesgue(r)
            }
            "orlicz" => {
                let ps = parse_params(body, &["pprime", "gamma", "q", "coef"])?;
                if let Some(q) = param(&ps, "q") {
                    if param(&ps, "pprime").is_some() || param(&ps, "gamma").is_some() {
                        return Err(Error::Parse("orlicz takes either q or pprime/gamma".into()));
                    }
                    let coef = param(&ps, "coef").unwrap_or(1.0);
                    return Ok(FunctionSpace::Orlicz { young: YoungFunction::scaled_power(q, coef)? });
                }
                if param(&ps, "coef").is_some() {
                    return Err(Error::Parse("orlicz coef goes with q".into()));
                }
                let pp = param(&ps, "pprime").ok_or_else(|| Error::Parse("orlicz needs pprime".into()))?;
                FunctionSpace::orlicz_bump(pp, param(&ps, "gamma").unwrap_or(0.0))
            }
            "orlicz-conjugate" => {
                let inner: FunctionSpace = format!("orlicz:{body}").parse()?;
                inner.associate()
            }
            other => Err(Error::Parse(format!("space `{other}`"))),
        }
    }
}

impl fmt::Display for FunctionSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionSpace::Lebesgue { r } => write!(f, "lebesgue:r={r}"),
            FunctionSpace::Orlicz { young } => match young {
                YoungFunction::Power { q, coef } if *coef == 1.0 => write!(f, "orlicz:q={q}"),
                YoungFunction::Power { q, coef } => write!(f, "orlicz:q={q},coef={coef}"),
                YoungFunction::Bump { pprime, gamma } => write!(f, "orlicz:pprime={pprime},gamma={gamma}"),
                YoungFunction::Conjugate(inner) => match &**inner {
                    YoungFunction::Bump { pprime, gamma } => {
                        write!(f, "orlicz-conjugate:pprime={pprime},gamma={gamma}")
                    }
                    other => write!(f, "orlicz-conjugate:{other:?}"),
                },
            },
        }
    }
}

impl TryFrom<String> for FunctionSpace {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<FunctionSpace> for String {
    fn from(x: FunctionSpace) -> String {
        x.to_string()
    }
}
