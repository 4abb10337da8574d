//! Estimators for the weight conditions.
//!
//! Suprema over cubes are taken over finite families and outer integrals are
//! sampled, so every estimate is a lower bound of the quantity it names.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::experiments::trend::{verdict, SeriesPoint, Verdict};
use crate::func::{cube_average, Function, Phi, Pow, RadialProfile, Radial, Restrict};
use crate::geometry::{
    build_family, outer_nodes, point_anchors, Cube, CubeFamily, Cutoff, FamilyParams, GridParams,
    NeumaierSum, OuterNode, PointAnchors, Region,
};
use crate::maximal::maximal_field;
use crate::spaces::{FunctionSpace, NormValue};
use crate::weights::{conjugate_exponent, theorem_weights, Weight};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConditionTag {
    Ap,
    Neugebauer,
    Bump,
    Sawyer,
    WeakTesting,
    FujiiWilson,
    StrongBound,
    Annulus,
}

impl ConditionTag {
    pub const ALL: [ConditionTag; 8] = [
        ConditionTag::Ap,
        ConditionTag::Neugebauer,
        ConditionTag::Bump,
        ConditionTag::Sawyer,
        ConditionTag::WeakTesting,
        ConditionTag::FujiiWilson,
        ConditionTag::StrongBound,
        ConditionTag::Annulus,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ConditionTag::Ap => "ap",
            ConditionTag::Neugebauer => "neugebauer",
            ConditionTag::Bump => "bump",
            ConditionTag::Sawyer => "sawyer",
            ConditionTag::WeakTesting => "weak-testing",
            ConditionTag::FujiiWilson => "fujii-wilson",
            ConditionTag::StrongBound => "strong-bound",
            ConditionTag::Annulus => "annulus",
        }
    }
}

impl fmt::Display for ConditionTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ConditionTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .find(|t| t.as_str() == s)
            .copied()
            .ok_or_else(|| Error::Parse(format!("condition tag `{s}`")))
    }
}

/// A lower bound for a condition's supremum or ratio, with its witness.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionEstimate {
    pub tag: ConditionTag,
    pub value: f64,
    /// Cube attaining the value (the tested cube for ratio conditions).
    pub witness: Option<Cube>,
    pub divergent: bool,
    /// Cubes in the family the supremum ran over.
    pub family_size: usize,
    /// Outer quadrature nodes, zero when no outer integral is involved.
    pub nodes: usize,
    pub grid: Option<GridParams>,
}

impl ConditionEstimate {
    fn new(tag: ConditionTag) -> Self {
        Self { tag, value: 0.0, witness: None, divergent: false, family_size: 0, nodes: 0, grid: None }
    }
}

/// Maximal-operator family built around a tested cube.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    /// Dyadic lattice down to sidelength `ℓ(Q) 2^{-level}`.
    pub level: u32,
    pub per_octave: u32,
    /// Cubes added for each outer sample point.
    pub point_anchors: PointAnchors,
}

impl Default for FamilySpec {
    fn default() -> Self {
        Self { level: 3, per_octave: 1, point_anchors: PointAnchors::Refined(0) }
    }
}

impl FamilySpec {
    pub fn with_level(level: u32) -> Self {
        Self { level, ..Self::default() }
    }

    /// `Q` itself plus a lattice on the double of `Q`.
    pub fn around(&self, q: &Cube) -> Result<CubeFamily> {
        let k_top = q.side().log2().ceil() as i32 + 1;
        let region = Cube::new(q.center().to_vec(), 2.0 * q.side())?.region();
        build_family(&FamilyParams {
            dim: q.dim(),
            k_min: k_top - 1 - self.level as i32,
            k_max: k_top,
            per_octave: self.per_octave,
            lattice_step: 0.5,
            domain: Some(region),
            anchors: vec![q.clone()],
            point_anchors: self.point_anchors,
        })
    }

    fn for_nodes(&self, q: &Cube, pts: &[Vec<f64>]) -> Result<CubeFamily> {
        self.around(q)?.augmented(pts)
    }
}

fn check_p(p: f64) -> Result<()> {
    if p > 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("exponent p must lie in (1, inf), got {p}")))
    }
}

/// Scan a family for the largest per-cube value.
fn sup_over_family(
    tag: ConditionTag,
    family: &CubeFamily,
    mut per_cube: impl FnMut(&Cube) -> Result<NormValue>,
) -> Result<ConditionEstimate> {
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let mut est = ConditionEstimate::new(tag);
    est.family_size = family.len();
    est.value = f64::NEG_INFINITY;
    for q in family.iter() {
        let v = per_cube(&q)?;
        if v.divergent {
            est.value = f64::INFINITY;
            est.divergent = true;
            est.witness = Some(q);
            return Ok(est);
        }
        if v.value > est.value {
            est.value = v.value;
            est.witness = Some(q);
        }
    }
    Ok(est)
}

fn avg(f: &dyn Function, q: &Cube) -> NormValue {
    let a = cube_average(f, q, Cutoff::NONE);
    NormValue { value: a.value, divergent: !a.converged || !a.value.is_finite() }
}

/// `sup_Q (avg_Q w)(avg_Q σ)^{p-1}`.
pub fn ap_constant(w: &dyn Function, sigma: &dyn Function, p: f64, family: &CubeFamily) -> Result<ConditionEstimate> {
    check_p(p)?;
    sup_over_family(ConditionTag::Ap, family, |q| {
        let (a, b) = (avg(w, q), avg(sigma, q));
        Ok(NormValue { value: a.value * b.value.powf(p - 1.0), divergent: a.divergent || b.divergent })
    })
}

/// `sup_Q (avg_Q w^r)^{1/r} (avg_Q σ^r)^{(p-1)/r}`.
pub fn neugebauer_constant(
    w: &dyn Function,
    sigma: &dyn Function,
    p: f64,
    r: f64,
    family: &CubeFamily,
) -> Result<ConditionEstimate> {
    check_p(p)?;
    if !(r >= 1.0 && r.is_finite()) {
        return Err(invalid(format!("Neugebauer exponent must be >= 1, got {r}")));
    }
    let (wr, sr) = (Pow::new(w, r), Pow::new(sigma, r));
    sup_over_family(ConditionTag::Neugebauer, family, |q| {
        let (a, b) = (avg(&wr, q), avg(&sr, q));
        Ok(NormValue {
            value: a.value.powf(1.0 / r) * b.value.powf((p - 1.0) / r),
            divergent: a.divergent || b.divergent,
        })
    })
}

/// `sup_Q (avg_Q w) ‖σ^{1/p'}‖_{X,Q}^p`, norms on `|x|_max >= eps`.
pub fn bump_constant(
    w: &dyn Function,
    sigma: &dyn Function,
    p: f64,
    x: &FunctionSpace,
    family: &CubeFamily,
    cutoff: Cutoff,
) -> Result<ConditionEstimate> {
    check_p(p)?;
    let s = Pow::new(sigma, 1.0 / conjugate_exponent(p));
    sup_over_family(ConditionTag::Bump, family, |q| {
        let a = avg(w, q);
        let nv = x.norm_on_cube(&s, q, cutoff)?;
        Ok(NormValue { value: a.value * nv.value.powf(p), divergent: a.divergent || nv.divergent })
    })
}

fn positive_integral(f: &dyn Function, q: &Cube) -> Result<f64> {
    let int = f.integrate(&q.region(), &Phi::identity(), Cutoff::NONE);
    if !int.converged || !int.value.is_finite() {
        return Err(Error::Degenerate(format!("integral over the cube is not finite ({})", int.value)));
    }
    if int.value <= 0.0 {
        return Err(Error::Degenerate("integral over the cube vanishes".into()));
    }
    Ok(int.value)
}

fn node_points(nodes: &[OuterNode]) -> Vec<Vec<f64>> {
    nodes.iter().map(|nd| nd.point.clone()).collect()
}

/// `Σ weight · exp(ln_integrand)` over the nodes; `None` when a value is divergent.
fn sampled_integral(nodes: &[OuterNode], ln_integrand: impl Fn(usize) -> Option<f64>) -> Option<f64> {
    let mut s = NeumaierSum::default();
    for (i, nd) in nodes.iter().enumerate() {
        let v = ln_integrand(i)?;
        s.add(nd.weight * v.exp());
    }
    Some(s.value())
}

fn ratio_estimate(
    tag: ConditionTag,
    q: &Cube,
    family: &CubeFamily,
    nodes: &[OuterNode],
    grid: &GridParams,
    numerator: Option<f64>,
    denominator: f64,
) -> ConditionEstimate {
    let mut est = ConditionEstimate::new(tag);
    est.witness = Some(q.clone());
    est.family_size = family.len();
    est.nodes = nodes.len();
    est.grid = Some(*grid);
    match numerator {
        Some(v) => est.value = v / denominator,
        None => {
            est.value = f64::INFINITY;
            est.divergent = true;
        }
    }
    est
}

/// `∫_Q w (M(χ_Q σ))^p / ∫_Q σ`.
pub fn sawyer_ratio(
    w: &dyn Function,
    sigma: &dyn Function,
    p: f64,
    q: &Cube,
    family: &FamilySpec,
    grid: &GridParams,
) -> Result<ConditionEstimate> {
    check_p(p)?;
    let den = positive_integral(sigma, q)?;
    let nodes = outer_nodes(q, grid);
    let pts = node_points(&nodes);
    let fam = family.for_nodes(q, &pts)?;
    let f = Restrict::to_cube(sigma, q);
    let field = maximal_field(&f, &pts, &fam, None, Cutoff::NONE)?;
    let num = sampled_integral(&nodes, |i| {
        let m = &field[i];
        if m.divergent {
            return None;
        }
        Some(w.eval(&pts[i]).ln() + p * m.value.ln())
    });
    Ok(ratio_estimate(ConditionTag::Sawyer, q, &fam, &nodes, grid, num, den))
}

/// `∫_Q (M_{X'}(σ^{1/p} χ_Q))^p / ∫_Q σ`, norms on `|x|_max >= eps`.
pub fn weak_testing_ratio(
    sigma: &dyn Function,
    p: f64,
    xprime: &FunctionSpace,
    q: &Cube,
    family: &FamilySpec,
    grid: &GridParams,
    cutoff: Cutoff,
) -> Result<ConditionEstimate> {
    check_p(p)?;
    let den = positive_integral(sigma, q)?;
    let nodes = outer_nodes(q, grid);
    let pts = node_points(&nodes);
    let fam = family.for_nodes(q, &pts)?;
    let root = Pow::new(sigma, 1.0 / p);
    let f = Restrict::to_cube(&root, q);
    let field = maximal_field(&f, &pts, &fam, Some(xprime), cutoff)?;
    let num = sampled_integral(&nodes, |i| (!field[i].divergent).then(|| p * field[i].value.ln()));
    Ok(ratio_estimate(ConditionTag::WeakTesting, q, &fam, &nodes, grid, num, den))
}

/// `∫_Q M(σ χ_Q) / ∫_Q σ`.
pub fn fujii_wilson_ratio(
    sigma: &dyn Function,
    q: &Cube,
    family: &FamilySpec,
    grid: &GridParams,
) -> Result<ConditionEstimate> {
    let den = positive_integral(sigma, q)?;
    let nodes = outer_nodes(q, grid);
    let pts = node_points(&nodes);
    let fam = family.for_nodes(q, &pts)?;
    let f = Restrict::to_cube(sigma, q);
    let field = maximal_field(&f, &pts, &fam, None, Cutoff::NONE)?;
    let num = sampled_integral(&nodes, |i| (!field[i].divergent).then(|| field[i].value.ln()));
    Ok(ratio_estimate(ConditionTag::FujiiWilson, q, &fam, &nodes, grid, num, den))
}

/// Radial step function `Σ_{k<levels} 2^{k n / 2} χ_{|x|_max <= 2^{-k-1}}`.
#[derive(Clone, Debug)]
pub struct LacunaryProfile {
    levels: u32,
    dim: usize,
    kinks: Vec<f64>,
}

impl LacunaryProfile {
    pub fn new(levels: u32, dim: usize) -> Self {
        let kinks = (0..levels).map(|k| 2f64.powi(-(k as i32) - 1)).collect();
        Self { levels, dim, kinks }
    }
}

impl RadialProfile for LacunaryProfile {
    fn ln_value(&self, t: f64) -> f64 {
        let r = t.exp();
        let mut v = 0.0;
        for k in 0..self.levels {
            if r <= 2f64.powi(-(k as i32) - 1) {
                v += 2f64.powf(k as f64 * self.dim as f64 / 2.0);
            }
        }
        v.ln()
    }

    fn kinks(&self) -> &[f64] {
        &self.kinks
    }
}

/// Default test battery: an origin box, an off-center box, a radial
/// power singularity in `L^p` and a lacunary sum, all supported in `Q(0,1)`.
pub fn default_battery(n: usize, p: f64) -> Result<Vec<Box<dyn Function>>> {
    check_p(p)?;
    let unit = Cube::origin(n, 1.0)?.region();
    let mut off = unit.clone();
    off.lo.iter_mut().for_each(|v| *v = 0.25);
    off.hi.iter_mut().for_each(|v| *v = 0.5);
    let power = Weight::power(n, -(n as f64) / (2.0 * p))?;
    Ok(vec![
        Box::new(crate::func::StepFunction::indicator(&unit, 1.0)?),
        Box::new(crate::func::StepFunction::indicator(&off, 1.0)?),
        Box::new(OwnedRestrict { inner: Box::new(power), region: unit }),
        Box::new(Radial::new(n, LacunaryProfile::new(8, n))),
    ])
}

struct OwnedRestrict {
    inner: Box<dyn Function>,
    region: Region,
}

impl Function for OwnedRestrict {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        Restrict::new(self.inner.as_ref(), self.region.clone()).eval(x)
    }

    fn integrate(&self, region: &Region, phi: &Phi, cutoff: Cutoff) -> crate::geometry::Integral {
        self.inner.integrate(&region.intersect(&self.region), phi, cutoff)
    }
}

/// Strong-bound estimate together with its domain-extension series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrongBound {
    pub estimate: ConditionEstimate,
    /// `(ln R, ratio)` for the battery member with the largest final ratio.
    pub series: Vec<SeriesPoint>,
    pub verdict: Verdict,
}

/// `max_f ∫_{Q(0,2R)} (M_{X'} f)^p / ∫ f^p` over a battery, for growing `R`.
///
/// Only a lower bound for the operator norm on `L^p`: the battery is finite
/// and the domain truncated. The divergent flag is set when the final
/// ratios grow along `R` according to the trend rule.
pub fn strong_bound_estimate(
    xprime: &FunctionSpace,
    p: f64,
    battery: &[&dyn Function],
    radii: &[f64],
    family: &FamilySpec,
    grid: &GridParams,
) -> Result<StrongBound> {
    check_p(p)?;
    if battery.is_empty() {
        return Err(Error::Degenerate("empty test battery".into()));
    }
    if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(invalid("domain radii must be positive"));
    }
    let n = battery[0].dim();
    let r_max = radii.iter().copied().fold(0.0, f64::max);
    let whole = Cube::origin(n, 2.0 * r_max)?.region();
    let support = Cube::origin(n, 1.0)?;
    let mut best: Option<(f64, Vec<SeriesPoint>)> = None;
    let mut any_nonzero = false;
    let mut total_nodes = 0;
    let mut family_size = 0;
    for f in battery {
        if f.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, got: f.dim() });
        }
        let den = f.integrate(&whole, &Phi::power(p), Cutoff::NONE);
        if !(den.value > 0.0) {
            continue;
        }
        if !den.converged || !den.value.is_finite() {
            return Err(Error::Degenerate("battery member is not in L^p".into()));
        }
        any_nonzero = true;
        let mut series = Vec::with_capacity(radii.len());
        for &r in radii {
            let q = Cube::origin(n, 2.0 * r)?;
            let nodes = outer_nodes(&q, grid);
            let pts = node_points(&nodes);
            let fam = family.around(&support)?.with_anchors(point_anchors(&pts, PointAnchors::Diagonal))?;
            let field = maximal_field(*f, &pts, &fam, Some(xprime), Cutoff::NONE)?;
            let num = sampled_integral(&nodes, |i| (!field[i].divergent).then(|| p * field[i].value.ln()));
            total_nodes = total_nodes.max(nodes.len());
            family_size = family_size.max(fam.len());
            let (value, divergent) = match num {
                Some(v) => (v / den.value, false),
                None => (f64::INFINITY, true),
            };
            series.push(SeriesPoint { abscissa: r.ln(), value, divergent });
        }
        let last = series.last().map(|s| s.value).unwrap_or(0.0);
        if best.as_ref().is_none_or(|(b, _)| last > *b) {
            best = Some((last, series));
        }
    }
    if !any_nonzero {
        return Err(Error::Degenerate("every battery member vanishes".into()));
    }
    let (value, series) = best.expect("nonzero member");
    let v = verdict(&series);
    let mut estimate = ConditionEstimate::new(ConditionTag::StrongBound);
    estimate.value = value;
    estimate.divergent = v == Verdict::DivergentTrend || !value.is_finite();
    estimate.nodes = total_nodes;
    estimate.family_size = family_size;
    estimate.grid = Some(*grid);
    Ok(StrongBound { estimate, series, verdict: v })
}

/// `‖χ_{Q(0,1) \ Q(0,a/2)}(y) |y|_max^{-n/p}‖_{X'}` (global norm).
pub fn annulus_norm(xprime: &FunctionSpace, a: f64, p: f64, n: usize) -> Result<NormValue> {
    check_p(p)?;
    if !(a > 0.0 && a <= 2.0) {
        return Err(invalid(format!("annulus scale must lie in (0, 2], got {a}")));
    }
    let g = Weight::power(n, -(n as f64) / p)?;
    let unit = Cube::origin(n, 1.0)?;
    xprime.norm_on_region(&g, &unit.region(), 1.0, Cutoff::radius(0.25 * a))
}

/// Both sides of the lower-bound chain for the weak-testing numerator on `Q(0,a)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainCheck {
    pub a: f64,
    /// `∫_{Q(0,a)} (M_{X'}(σ^{1/p} χ_{Q(0,a)}))^p` over diagonal anchors.
    pub lhs: f64,
    /// `2^{-(p'+n)} ‖annulus‖_{X'}^p ∫_{Q(0,a)} σ`.
    pub rhs: f64,
    pub holds: bool,
}

/// Check the chain `LHS >= 2^{-(p'+n)} · annulus_norm^p · ∫_{Q(0,a)} σ` for the
/// counterexample `σ`. The left side only uses the cubes `Q(0, 2|x|_max)`.
pub fn lower_bound_chain(xprime: &FunctionSpace, a: f64, p: f64, n: usize, grid: &GridParams) -> Result<ChainCheck> {
    let (_, sigma) = theorem_weights(p, n)?;
    if !(a > 0.0 && a < 2.0) {
        return Err(invalid(format!("scale must lie in (0, 2), got {a}")));
    }
    let q = Cube::origin(n, a)?;
    let nodes = outer_nodes(&q, grid);
    let pts = node_points(&nodes);
    let fam = build_family(&FamilyParams::anchors_only(n, point_anchors(&pts, PointAnchors::Diagonal), PointAnchors::None))?;
    let root = Pow::new(&sigma, 1.0 / p);
    let f = Restrict::to_cube(&root, &q);
    let field = maximal_field(&f, &pts, &fam, Some(xprime), Cutoff::NONE)?;
    let lhs = sampled_integral(&nodes, |i| (!field[i].divergent).then(|| p * field[i].value.ln())).unwrap_or(f64::INFINITY);
    let ann = annulus_norm(xprime, a, p, n)?;
    let mass = positive_integral(&sigma, &q)?;
    let pp = conjugate_exponent(p);
    let rhs = 2f64.powf(-(pp + n as f64)) * ann.value.powf(p) * mass;
    Ok(ChainCheck { a, lhs, rhs, holds: lhs >= rhs })
}

/// `∫_{Q(0,1) \ Q(0,ε)} σ^{1/p'} |x|_max^{-n/p} dx` for the counterexample `σ`.
pub fn duality_pairing(p: f64, n: usize, eps: f64) -> Result<f64> {
    let (_, sigma) = theorem_weights(p, n)?;
    let g = sigma.powf(1.0 / conjugate_exponent(p)).mul(&Weight::power(n, -(n as f64) / p)?)?;
    g.origin_integral(1.0, Cutoff::radius(0.5 * eps)).into_result()
}
