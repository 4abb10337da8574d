//! Quadrature for integrands that depend on `|x|_max` only.
//!
//! Over any box `B`, `∫_B g(|x|_max) dx = ∫_0^∞ g(r) V_B'(r) dr` where
//! `V_B(r) = |B ∩ Q(0, 2r)|` is a product of clipped interval lengths and
//! therefore piecewise polynomial in `r`. Each polynomial piece is integrated
//! in the variable `u = log(1/r)` with composite Gauss–Legendre panels whose
//! width grows geometrically towards the origin; near the origin the
//! integrand is evaluated entirely in log form, so profiles with
//! `r^{-s} (log)^t` singularities are resolved down to arbitrarily small radii.

use std::f64::consts::PI;
use std::sync::OnceLock;

use super::{Cutoff, Region};
use crate::error::{Error, Result};
use crate::func::RadialProfile;

const PANEL_REL_TOL: f64 = 1e-11;
const TAIL_REL_TOL: f64 = 1e-11;
const MAX_DEPTH: u32 = 18;
const UNIT_PANELS: usize = 4;
const MAX_PANELS: usize = 90;
const U_BUDGET: f64 = 1.0e15;

/// Gauss–Legendre rule on `[-1, 1]`, nodes in ascending order.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(m: usize) -> Self {
        assert!(m >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; m];
        let mut weights = vec![0.0; m];
        let mf = m as f64;
        for i in 0..m.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(m, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(m, x);
            if d.is_finite() {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            weights[i] = w;
            nodes[m - 1 - i] = x;
            weights[m - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let h = 0.5 * (b - a);
        let c = 0.5 * (a + b);
        self.nodes.iter().zip(&self.weights).map(move |(x, w)| (c + h * x, h * w))
    }

    pub fn integrate(&self, f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64) -> f64 {
        let mut s = NeumaierSum::default();
        for (x, w) in self.mapped(a, b) {
            s.add(w * f(x));
        }
        s.value()
    }
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if m == 1 {
        return (x, 1.0);
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

pub(crate) fn gl20() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(20))
}

/// Compensated (Neumaier) summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        if self.sum.is_finite() {
            self.sum + self.comp
        } else {
            self.sum
        }
    }
}

/// Result of a quadrature: the estimate and whether it met its tolerance.
/// A non-converged result carries the last (partial) estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub converged: bool,
}

impl Integral {
    pub fn exact(value: f64) -> Self {
        Self { value, converged: true }
    }

    pub fn into_result(self) -> Result<f64> {
        if self.converged {
            Ok(self.value)
        } else {
            Err(Error::NonConvergent { estimate: self.value })
        }
    }
}

fn adaptive(
    f: &mut dyn FnMut(f64) -> f64,
    a: f64,
    b: f64,
    whole: f64,
    depth: u32,
    floor: f64,
    out: &mut NeumaierSum,
) -> bool {
    let rule = gl20();
    let m = 0.5 * (a + b);
    let left = rule.integrate(f, a, m);
    let right = rule.integrate(f, m, b);
    let halves = left + right;
    if !halves.is_finite() {
        out.add(halves);
        return false;
    }
    let diff = (whole - halves).abs();
    // The log-form integrand at `u` carries absolute log error ~ u·ε, so no
    // panel can be resolved more finely than that.
    let rel = PANEL_REL_TOL.max(8.0 * f64::EPSILON * a.abs().max(b.abs()));
    if diff <= rel * halves.abs() || diff <= floor || diff < f64::MIN_POSITIVE {
        out.add(left);
        out.add(right);
        return true;
    }
    if depth == 0 || !(m > a && b > m) {
        out.add(left);
        out.add(right);
        return false;
    }
    let l_ok = adaptive(f, a, m, left, depth - 1, floor, out);
    let r_ok = adaptive(f, m, b, right, depth - 1, floor, out);
    l_ok && r_ok
}

/// `∫_{ua}^{ub} G(u) du` for nonnegative `G`, `ub` possibly infinite.
///
/// Panels have unit width for the first few, then widths double. The loop
/// stops early once the geometric tail estimate from two consecutive
/// decaying panels is negligible.
pub(crate) fn integrate_u(g: &mut dyn FnMut(f64) -> f64, ua: f64, ub: f64) -> Integral {
    let rule = gl20();
    let mut total = NeumaierSum::default();
    let mut converged = true;
    let mut prev: Option<f64> = None;
    let mut lo = ua;
    let mut k = 0usize;
    loop {
        let width = if k < UNIT_PANELS { 1.0 } else { lo - ua };
        let hi = (lo + width).min(ub);
        if !(hi > lo) {
            break;
        }
        let whole = rule.integrate(g, lo, hi);
        let mut panel = NeumaierSum::default();
        // Error relative to the running total: late panels carry rounding
        // noise from the log-form integrand but contribute negligibly.
        let floor = PANEL_REL_TOL * total.value().abs();
        let ok = adaptive(g, lo, hi, whole, MAX_DEPTH, floor, &mut panel);
        let c = panel.value();
        total.add(c);
        if !c.is_finite() {
            return Integral { value: total.value(), converged: false };
        }
        converged &= ok;
        if hi >= ub {
            break;
        }
        if let Some(p) = prev {
            if p > 0.0 && c >= 0.0 {
                let q = c / p;
                if q < 0.95 {
                    let tail = c * q / (1.0 - q);
                    if tail <= TAIL_REL_TOL * total.value().abs() {
                        break;
                    }
                }
            } else if p == 0.0 && c == 0.0 && k >= UNIT_PANELS {
                break;
            }
        }
        prev = Some(c);
        lo = hi;
        k += 1;
        if lo - ua > U_BUDGET || k >= MAX_PANELS {
            return Integral { value: total.value(), converged: false };
        }
    }
    Integral { value: total.value(), converged }
}

fn clipped_len(lo: f64, hi: f64, r: f64) -> f64 {
    (hi.min(r) - lo.max(-r)).max(0.0)
}

/// `V_B'(r)` for the box `B`.
fn volume_derivative(region: &Region, r: f64) -> f64 {
    let n = region.dim();
    let mut total = 0.0;
    for i in 0..n {
        let (lo, hi) = (region.lo[i], region.hi[i]);
        if clipped_len(lo, hi, r) <= 0.0 {
            return 0.0;
        }
        let d = (r < hi) as u8 as f64 + (-r > lo) as u8 as f64;
        if d == 0.0 {
            continue;
        }
        let mut prod = d;
        for j in 0..n {
            if j != i {
                prod *= clipped_len(region.lo[j], region.hi[j], r);
            }
        }
        total += prod;
    }
    total
}

/// `∫_{B, |x|_max >= eps} g(|x|_max) dx` where `ln_g(t) = ln g(e^t)`.
///
/// `extra_breaks` lists radii where `g` is not smooth (e.g. `r = 1` for
/// `log_+` profiles); they become panel boundaries.
pub fn box_radial_integral(
    region: &Region,
    ln_g: &dyn Fn(f64) -> f64,
    cutoff: Cutoff,
    extra_breaks: &[f64],
) -> Integral {
    if region.is_empty() {
        return Integral::exact(0.0);
    }
    let n = region.dim();
    let ln_eps = cutoff.ln_radius();
    let outer = region
        .lo
        .iter()
        .zip(&region.hi)
        .map(|(l, h)| l.abs().max(h.abs()))
        .fold(0.0_f64, f64::max);
    let inner = region
        .lo
        .iter()
        .zip(&region.hi)
        .map(|(l, h)| if *l > 0.0 { *l } else if *h < 0.0 { -h } else { 0.0 })
        .fold(0.0_f64, f64::max);
    if ln_eps >= outer.ln() {
        return Integral::exact(0.0);
    }

    let mut breaks: Vec<f64> = region
        .lo
        .iter()
        .chain(&region.hi)
        .map(|v| v.abs())
        .chain(extra_breaks.iter().copied())
        .filter(|b| *b > 0.0 && *b < outer)
        .collect();
    breaks.push(outer);
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup();

    let mut total = NeumaierSum::default();
    let mut converged = true;

    if region.contains_origin() {
        // Below the first breakpoint V'(r) = n c r^{n-1}.
        let first = breaks[0];
        if ln_eps < first.ln() {
            let c: f64 = region
                .lo
                .iter()
                .zip(&region.hi)
                .map(|(l, h)| (*h > 0.0) as u8 as f64 + (*l < 0.0) as u8 as f64)
                .product();
            let ln_nc = (n as f64 * c).ln();
            let nf = n as f64;
            let mut g = |u: f64| (ln_g(-u) - nf * u + ln_nc).exp();
            let part = integrate_u(&mut g, -first.ln(), -ln_eps);
            total.add(part.value);
            converged &= part.converged;
        }
    }

    for w in breaks.windows(2) {
        let (r0, r1) = (w[0], w[1]);
        if r1 <= inner {
            continue;
        }
        let ln_lo = r0.ln().max(ln_eps);
        let ln_hi = r1.ln();
        if ln_lo >= ln_hi {
            continue;
        }
        let mut g = |u: f64| {
            let r = (-u).exp();
            let v = volume_derivative(region, r);
            if v == 0.0 {
                0.0
            } else {
                (ln_g(-u)).exp() * v * r
            }
        };
        let part = integrate_u(&mut g, -ln_hi, -ln_lo);
        total.add(part.value);
        converged &= part.converged;
        if !part.value.is_finite() {
            break;
        }
    }
    Integral { value: total.value(), converged }
}

/// `∫_{Q(0,a) \ Q(0, 2 eps)} g(|x|_max) dx` in dimension `n`.
pub fn radial_integral<P: RadialProfile + ?Sized>(g: &P, a: f64, n: usize, eps: f64) -> Result<f64> {
    radial_integral_cutoff(g, a, n, Cutoff::radius(eps)).into_result()
}

/// As [`radial_integral`], with a log-form cutoff and the raw [`Integral`].
pub fn radial_integral_cutoff<P: RadialProfile + ?Sized>(
    g: &P,
    a: f64,
    n: usize,
    cutoff: Cutoff,
) -> Integral {
    let half = 0.5 * a;
    let region = Region { lo: vec![-half; n], hi: vec![half; n] };
    box_radial_integral(&region, &|t| g.ln_value(t), cutoff, g.kinks())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::func::{FnProfile, LnProfile};

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let rule = GaussLegendre::new(7);
        // degree 13 polynomial
        let v = rule.integrate(&mut |x| x.powi(12) + 3.0 * x.powi(5) + 1.0, -1.0, 1.0);
        assert!((v - (2.0 / 13.0 + 2.0)).abs() < 1e-14);
        let w: f64 = rule.mapped(0.0, 3.0).map(|(_, w)| w).sum();
        assert!((w - 3.0).abs() < 1e-14);
    }

    #[test]
    fn neumaier_recovers_cancellation() {
        let mut s = NeumaierSum::default();
        for v in [1.0, 1e100, 1.0, -1e100] {
            s.add(v);
        }
        assert_eq!(s.value(), 2.0);
    }

    #[test]
    fn unit_profile_gives_cube_volume() {
        let one = FnProfile(|_r: f64| 1.0);
        let v = radial_integral(&one, 1.0, 2, 0.0).unwrap();
        assert!((v - 1.0).abs() < 1e-12, "{v}");
        let v = radial_integral(&one, 3.0, 3, 0.0).unwrap();
        assert!((v - 27.0).abs() < 1e-10, "{v}");
    }

    #[test]
    fn truncated_log_divergent_profile() {
        // Q(0,1) minus Q(0,e), e = 2^-20: 2^n n [log(1 + log(2/e)) - log(1 + log 2)], n = 1
        let g = FnProfile(|r: f64| 1.0 / (r * (1.0 + (1.0 / r).ln())));
        let eps = 2f64.powi(-20);
        let v = radial_integral(&g, 1.0, 1, 0.5 * eps).unwrap();
        let oracle = 2.0 * ((1.0 + (2.0 / eps).ln()).ln() - (1.0 + 2f64.ln()).ln());
        assert!((v - oracle).abs() < 1e-9, "{v} vs {oracle}");
    }

    #[test]
    fn divergent_profile_is_flagged() {
        // r^{-1}(1 + log 1/r)^{-1}: the untruncated integral diverges.
        let g = LnProfile(|t: f64| -t - (1.0 + (-t).max(0.0)).ln());
        let res = radial_integral(&g, 1.0, 1, 0.0);
        assert!(matches!(res, Err(Error::NonConvergent { .. })));
        // power divergence
        let g = LnProfile(|t: f64| -1.5 * t);
        assert!(radial_integral(&g, 1.0, 1, 0.0).is_err());
    }

    #[test]
    fn off_center_box_constant() {
        let region = Region::new(vec![0.25, -1.0], vec![2.0, 0.5]).unwrap();
        let v = box_radial_integral(&region, &|_| 0.0, Cutoff::NONE, &[]);
        assert!(v.converged);
        assert!((v.value - region.volume()).abs() < 1e-12);
        // with a cutoff, subtract the part inside Q(0, 2 eps)
        let v = box_radial_integral(&region, &|_| 0.0, Cutoff::radius(0.5), &[]);
        let expect = region.volume() - region.volume_within(0.5);
        assert!((v.value - expect).abs() < 1e-12, "{} {}", v.value, expect);
    }

    #[test]
    fn empty_region_is_zero() {
        let region = Region::new(vec![1.0], vec![1.0]).unwrap();
        let v = box_radial_integral(&region, &|_| 0.0, Cutoff::NONE, &[]);
        assert_eq!(v, Integral::exact(0.0));
    }
}
