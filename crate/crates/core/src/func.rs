//! Evaluable functions on `R^n` and integrals of `Φ(|f|)` over boxes.
//!
//! Every integrand used by the library has the shape `Φ(|f(x)|)` with
//! `Φ(s) = Outer(c · s^e)`, where `Outer` is either the identity or a Young
//! function. [`Phi`] carries that map in log form so that singular radial
//! functions can be integrated without overflow.

use crate::geometry::{
    box_radial_integral, max_norm, Cube, Cutoff, Integral, NeumaierSum, Region,
};
use crate::spaces::YoungFunction;

/// A nonnegative function of `r = |x|_max`, given in log form.
pub trait RadialProfile {
    /// `ln g(e^t)`; `-inf` where `g` vanishes.
    fn ln_value(&self, t: f64) -> f64;

    /// `g(r)` for `r > 0`.
    fn value(&self, r: f64) -> f64 {
        self.ln_value(r.ln()).exp()
    }

    /// Radii where the profile is not smooth.
    fn kinks(&self) -> &[f64] {
        &[]
    }
}

/// Profile from a plain closure `r ↦ g(r)`.
pub struct FnProfile<F>(pub F);

impl<F: Fn(f64) -> f64> RadialProfile for FnProfile<F> {
    fn ln_value(&self, t: f64) -> f64 {
        (self.0)(t.exp()).ln()
    }

    fn value(&self, r: f64) -> f64 {
        (self.0)(r)
    }
}

/// Profile from a log-form closure `t ↦ ln g(e^t)`.
pub struct LnProfile<F>(pub F);

impl<F: Fn(f64) -> f64> RadialProfile for LnProfile<F> {
    fn ln_value(&self, t: f64) -> f64 {
        (self.0)(t)
    }
}

#[derive(Clone, Copy, Debug)]
pub enum Outer<'a> {
    Identity,
    Young(&'a YoungFunction),
}

/// `Φ(s) = Outer(e^{shift} s^{slope})`, evaluated as `ln Φ` from `ln s`.
#[derive(Clone, Copy, Debug)]
pub struct Phi<'a> {
    slope: f64,
    shift: f64,
    outer: Outer<'a>,
}

impl<'a> Phi<'a> {
    pub fn identity() -> Phi<'static> {
        Phi { slope: 1.0, shift: 0.0, outer: Outer::Identity }
    }

    /// `s ↦ s^r`.
    pub fn power(r: f64) -> Phi<'static> {
        Phi { slope: r, shift: 0.0, outer: Outer::Identity }
    }

    /// `s ↦ A(s)`.
    pub fn young(a: &'a YoungFunction) -> Phi<'a> {
        Phi { slope: 1.0, shift: 0.0, outer: Outer::Young(a) }
    }

    /// `s ↦ Φ(s^e)`.
    pub fn pow(self, e: f64) -> Phi<'a> {
        Phi { slope: self.slope * e, ..self }
    }

    /// `s ↦ Φ(c s)` for `c > 0`.
    pub fn scale(self, c: f64) -> Phi<'a> {
        self.scale_ln(c.ln())
    }

    /// `s ↦ Φ(e^{ln_c} s)`.
    pub fn scale_ln(self, ln_c: f64) -> Phi<'a> {
        Phi { shift: self.shift + self.slope * ln_c, ..self }
    }

    /// `ln Φ(e^{ln_s})`.
    pub fn ln_apply(&self, ln_s: f64) -> f64 {
        if ln_s == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        let z = self.slope * ln_s + self.shift;
        match self.outer {
            Outer::Identity => z,
            Outer::Young(a) => a.ln_eval_exp(z),
        }
    }

    /// `Φ(s)` for `s >= 0`.
    pub fn apply(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        if matches!(self.outer, Outer::Identity) && self.shift == 0.0 {
            return s.powf(self.slope);
        }
        self.ln_apply(s.ln()).exp()
    }
}

/// A nonnegative function on `R^n` that can be integrated over boxes.
pub trait Function: Send + Sync {
    fn dim(&self) -> usize;

    /// `|f(x)|`; may be `+inf` on a null set.
    fn eval(&self, x: &[f64]) -> f64;

    /// `∫_{region ∩ {|x|_max >= eps}} Φ(|f|) dx`.
    fn integrate(&self, region: &Region, phi: &Phi, cutoff: Cutoff) -> Integral;
}

/// `|Q|^{-1} ∫_{Q, |x|_max >= eps} |f|`.
pub fn cube_average(f: &dyn Function, cube: &Cube, cutoff: Cutoff) -> Integral {
    let int = f.integrate(&cube.region(), &Phi::identity(), cutoff);
    Integral { value: int.value / cube.volume(), converged: int.converged }
}

/// A function of `|x|_max` only.
pub struct Radial<P> {
    dim: usize,
    profile: P,
}

impl<P: RadialProfile> Radial<P> {
    pub fn new(dim: usize, profile: P) -> Self {
        Self { dim, profile }
    }

    pub fn profile(&self) -> &P {
        &self.profile
    }
}

impl<P: RadialProfile + Send + Sync> Function for Radial<P> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let r = max_norm(x);
        if r == 0.0 {
            return f64::INFINITY;
        }
        self.profile.value(r)
    }

    fn integrate(&self, region: &Region, phi: &Phi, cutoff: Cutoff) -> Integral {
        box_radial_integral(
            region,
            &|t| phi.ln_apply(self.profile.ln_value(t)),
            cutoff,
            self.profile.kinks(),
        )
    }
}

/// Piecewise constant function on a uniform grid of boxes, zero outside.
#[derive(Clone, Debug)]
pub struct StepFunction {
    lo: Vec<f64>,
    hi: Vec<f64>,
    cells: Vec<usize>,
    values: Vec<f64>,
}

impl StepFunction {
    /// `values` are listed lexicographically, last axis fastest.
    pub fn grid(lo: Vec<f64>, hi: Vec<f64>, cells: Vec<usize>, values: Vec<f64>) -> crate::Result<Self> {
        let n = lo.len();
        if n == 0 || hi.len() != n || cells.len() != n {
            return Err(crate::error::invalid("grid bounds and cell counts must share a dimension"));
        }
        if lo.iter().zip(&hi).any(|(l, h)| !(h > l)) || cells.contains(&0) {
            return Err(crate::error::invalid("grid must have positive extent and cell counts"));
        }
        if values.len() != cells.iter().product::<usize>() {
            return Err(crate::error::invalid("one value per grid cell is required"));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(crate::error::invalid("step values must be finite and nonnegative"));
        }
        Ok(Self { lo, hi, cells, values })
    }

    /// `c · χ_B`.
    pub fn indicator(region: &Region, c: f64) -> crate::Result<Self> {
        let n = region.dim();
        Self::grid(region.lo.clone(), region.hi.clone(), vec![1; n], vec![c])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Same grid, values mapped through `g`.
    pub fn map(&self, g: impl Fn(f64) -> f64) -> crate::Result<Self> {
        Self::grid(
            self.lo.clone(),
            self.hi.clone(),
            self.cells.clone(),
            self.values.iter().map(|v| g(*v)).collect(),
        )
    }

    /// Pointwise product of two functions on the same grid.
    pub fn product(&self, other: &StepFunction) -> crate::Result<Self> {
        if self.lo != other.lo || self.hi != other.hi || self.cells != other.cells {
            return Err(crate::error::invalid("step functions live on different grids"));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        Self::grid(self.lo.clone(), self.hi.clone(), self.cells.clone(), values)
    }

    fn width(&self, i: usize) -> f64 {
        (self.hi[i] - self.lo[i]) / self.cells[i] as f64
    }

    fn cell_region(&self, mut lin: usize) -> Region {
        let n = self.lo.len();
        let mut lo = vec![0.0; n];
        let mut hi = vec![0.0; n];
        for i in (0..n).rev() {
            let k = lin % self.cells[i];
            lin /= self.cells[i];
            let w = self.width(i);
            lo[i] = self.lo[i] + k as f64 * w;
            hi[i] = if k + 1 == self.cells[i] { self.hi[i] } else { self.lo[i] + (k + 1) as f64 * w };
        }
        Region { lo, hi }
    }
}

impl Function for StepFunction {
    fn dim(&self) -> usize {
        self.lo.len()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let mut lin = 0usize;
        for (i, &xi) in x.iter().enumerate() {
            if xi < self.lo[i] || xi > self.hi[i] {
                return 0.0;
            }
            let k = (((xi - self.lo[i]) / self.width(i)).floor() as usize).min(self.cells[i] - 1);
            lin = lin * self.cells[i] + k;
        }
        self.values[lin]
    }

    fn integrate(&self, region: &Region, phi: &Phi, cutoff: Cutoff) -> Integral {
        let eps = cutoff.value();
        let mut total = NeumaierSum::default();
        for (lin, &v) in self.values.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let part = self.cell_region(lin).intersect(region);
            if part.is_empty() {
                continue;
            }
            let vol = part.volume() - part.volume_within(eps);
            if vol > 0.0 {
                total.add(phi.apply(v) * vol);
            }
        }
        Integral::exact(total.value())
    }
}

/// `f · χ_B`.
pub struct Restrict<'a> {
    inner: &'a dyn Function,
    region: Region,
}

impl<'a> Restrict<'a> {
    pub fn new(inner: &'a dyn Function, region: Region) -> Self {
        Self { inner, region }
    }

    pub fn to_cube(inner: &'a dyn Function, cube: &Cube) -> Self {
        Self::new(inner, cube.region())
    }
}

impl Function for Restrict<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        if self.region.contains(x) {
            self.inner.eval(x)
        } else {
            0.0
        }
    }

    fn integrate(&self, region: &Region, phi: &Phi, cutoff: Cutoff) -> Integral {
        self.inner.integrate(&region.intersect(&self.region), phi, cutoff)
    }
}

/// `|f|^e`.
pub struct Pow<'a> {
    inner: &'a dyn Function,
    exponent: f64,
}

impl<'a> Pow<'a> {
    pub fn new(inner: &'a dyn Function, exponent: f64) -> Self {
        Self { inner, exponent }
    }
}

impl Function for Pow<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.inner.eval(x).powf(self.exponent)
    }

    fn integrate(&self, region: &Region, phi: &Phi, cutoff: Cutoff) -> Integral {
        self.inner.integrate(region, &phi.pow(self.exponent), cutoff)
    }
}

/// `c · f` for `c > 0`.
pub struct Scaled<'a> {
    inner: &'a dyn Function,
    factor: f64,
}

impl<'a> Scaled<'a> {
    pub fn new(inner: &'a dyn Function, factor: f64) -> Self {
        Self { inner, factor }
    }
}

impl Function for Scaled<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.factor * self.inner.eval(x)
    }

    fn integrate(&self, region: &Region, phi: &Phi, cutoff: Cutoff) -> Integral {
        if self.factor == 0.0 {
            return Integral::exact(0.0);
        }
        self.inner.integrate(region, &phi.scale(self.factor), cutoff)
    }
}

/// `f · χ_{|x|_max >= eps}`.
pub struct Truncated<'a> {
    inner: &'a dyn Function,
    cutoff: Cutoff,
}

impl<'a> Truncated<'a> {
    pub fn new(inner: &'a dyn Function, cutoff: Cutoff) -> Self {
        Self { inner, cutoff }
    }
}

impl Function for Truncated<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        if max_norm(x).ln() < self.cutoff.ln_radius() {
            0.0
        } else {
            self.inner.eval(x)
        }
    }

    fn integrate(&self, region: &Region, phi: &Phi, cutoff: Cutoff) -> Integral {
        self.inner.integrate(region, phi, cutoff.max(self.cutoff))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_composes_in_log_form() {
        let phi = Phi::power(2.0).scale(3.0).pow(0.5);
        // s ↦ (3 s^{1/2})^2 = 9 s
        assert!((phi.apply(4.0) - 36.0).abs() < 1e-12);
        assert_eq!(phi.apply(0.0), 0.0);
    }

    #[test]
    fn step_function_integral_and_eval() {
        let f = StepFunction::grid(vec![0.0], vec![2.0], vec![2], vec![1.0, 3.0]).unwrap();
        assert_eq!(f.eval(&[0.5]), 1.0);
        assert_eq!(f.eval(&[1.5]), 3.0);
        assert_eq!(f.eval(&[2.5]), 0.0);
        let whole = Region::new(vec![-1.0], vec![3.0]).unwrap();
        let v = f.integrate(&whole, &Phi::power(2.0), Cutoff::NONE);
        assert!((v.value - 10.0).abs() < 1e-14);
        // cutoff removes [0, 0.5)
        let v = f.integrate(&whole, &Phi::identity(), Cutoff::radius(0.5));
        assert!((v.value - 3.5).abs() < 1e-14);
    }

    #[test]
    fn restrict_and_truncate() {
        let one = Radial::new(1, FnProfile(|_| 1.0));
        let half = Restrict::new(&one, Region::new(vec![0.0], vec![1.0]).unwrap());
        let q = Cube::origin(1, 2.0).unwrap();
        let avg = cube_average(&half, &q, Cutoff::NONE);
        assert!((avg.value - 0.5).abs() < 1e-12);
        let t = Truncated::new(&one, Cutoff::radius(0.5));
        let avg = cube_average(&t, &q, Cutoff::NONE);
        assert!((avg.value - 0.5).abs() < 1e-12);
        assert_eq!(t.eval(&[0.25]), 0.0);
    }

    #[test]
    fn scaled_and_pow_commute_with_integration() {
        let f = Radial::new(2, FnProfile(|r: f64| 1.0 + r));
        let g = Scaled::new(&f, 2.0);
        let h = Pow::new(&g, 2.0);
        let q = Cube::origin(2, 1.0).unwrap();
        let direct = f.integrate(&q.region(), &Phi::power(2.0), Cutoff::NONE).value * 4.0;
        let composed = h.integrate(&q.region(), &Phi::identity(), Cutoff::NONE).value;
        assert!((direct - composed).abs() < 1e-11 * direct);
    }
}
