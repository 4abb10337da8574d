//! Sample points and weights for outer integrals `∫_Q F(x) dx` of functions
//! that can only be evaluated pointwise (maximal functions).
//!
//! Nodes are graded geometrically towards the origin, where every integrand
//! of interest is singular. Sampling stops at a floor radius, so the rule
//! integrates over `Q` minus a tiny cube around the origin; for nonnegative
//! integrands the result is a lower bound of the full integral.

use serde::{Deserialize, Serialize};

use super::quadrature::GaussLegendre;
use super::Cube;

/// Refinement of the outer sampling grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridParams {
    pub level: u32,
    /// `log2` of the smallest sampled radius; defaults to `-floor(900/n)`,
    /// the deepest level at which `r^{-n}` singular profiles stay finite.
    pub min_log2_radius: Option<i32>,
}

impl Default for GridParams {
    fn default() -> Self {
        Self { level: 1, min_log2_radius: None }
    }
}

impl GridParams {
    pub fn new(level: u32) -> Self {
        Self { level, min_log2_radius: None }
    }

    fn nodes_per_panel(&self) -> usize {
        4 + 2 * self.level as usize
    }

    fn unit_panels(&self) -> usize {
        12 + 4 * self.level as usize
    }

    fn floor_radius(&self, n: usize) -> f64 {
        let k = self.min_log2_radius.unwrap_or(-((900 / n.max(1)) as i32));
        2f64.powi(k)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OuterNode {
    pub point: Vec<f64>,
    pub weight: f64,
}

/// Panels in `u = log(1/r)` from `u0` to `u1`: unit widths first, then doubling.
fn u_panels(u0: f64, u1: f64, unit: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut lo = u0;
    let mut k = 0;
    while lo < u1 {
        let width = if k < unit { 1.0 } else { lo - u0 };
        let hi = (lo + width).min(u1);
        out.push((lo, hi));
        lo = hi;
        k += 1;
    }
    out
}

/// Nodes `(r, w)` with `Σ w h(r) ≈ ∫_{a}^{b} h(r) dr`, graded towards `a`.
fn graded_segment(a: f64, b: f64, floor: f64, grid: &GridParams, rule: &GaussLegendre) -> Vec<(f64, f64)> {
    let a = a.max(floor);
    if !(b > a) {
        return Vec::new();
    }
    let mut out = Vec::new();
    for (lo, hi) in u_panels(-b.ln(), -a.ln(), grid.unit_panels()) {
        for (u, w) in rule.mapped(lo, hi) {
            let r = (-u).exp();
            out.push((r, w * r));
        }
    }
    out
}

/// One-dimensional rule for `[lo, hi]`, split at the origin when it is interior.
fn axis_rule(lo: f64, hi: f64, floor: f64, grid: &GridParams, rule: &GaussLegendre) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    if lo < 0.0 && hi > 0.0 {
        for (r, w) in graded_segment(0.0, -lo, floor, grid, rule) {
            out.push((-r, w));
        }
        out.extend(graded_segment(0.0, hi, floor, grid, rule));
    } else if hi <= 0.0 {
        for (r, w) in graded_segment(-hi, -lo, floor, grid, rule) {
            out.push((-r, w));
        }
    } else {
        out.extend(graded_segment(lo, hi, floor, grid, rule));
    }
    out
}

/// Quadrature nodes for `∫_Q F`.
///
/// Origin-centered cubes use max-norm shells: `∫_Q F = ∫_0^{ℓ/2} ∮_{|x|_max=r} F dS dr`,
/// with a tensor Gauss rule on each of the `2n` faces. Other cubes use a tensor
/// product of graded one-dimensional rules.
pub fn outer_nodes(cube: &Cube, grid: &GridParams) -> Vec<OuterNode> {
    let n = cube.dim();
    let rule = GaussLegendre::new(grid.nodes_per_panel());
    let floor = grid.floor_radius(n);
    let mut out = Vec::new();
    if cube.is_origin_centered() {
        let radial = graded_segment(0.0, 0.5 * cube.side(), floor, grid, &rule);
        if n == 1 {
            for &(r, w) in &radial {
                out.push(OuterNode { point: vec![-r], weight: w });
                out.push(OuterNode { point: vec![r], weight: w });
            }
            return out;
        }
        let face: Vec<(f64, f64)> = rule.mapped(-1.0, 1.0).collect();
        for &(r, w) in &radial {
            for axis in 0..n {
                for sign in [-1.0, 1.0] {
                    let mut idx = vec![0usize; n - 1];
                    'face: loop {
                        let mut point = Vec::with_capacity(n);
                        let mut weight = w;
                        let mut k = 0;
                        for d in 0..n {
                            if d == axis {
                                point.push(sign * r);
                            } else {
                                let (y, wy) = face[idx[k]];
                                point.push(r * y);
                                weight *= r * wy;
                                k += 1;
                            }
                        }
                        out.push(OuterNode { point, weight });
                        let mut d = n - 1;
                        loop {
                            if d == 0 {
                                break 'face;
                            }
                            d -= 1;
                            idx[d] += 1;
                            if idx[d] < face.len() {
                                break;
                            }
                            idx[d] = 0;
                        }
                    }
                }
            }
        }
        return out;
    }
    let region = cube.region();
    let axes: Vec<Vec<(f64, f64)>> =
        (0..n).map(|i| axis_rule(region.lo[i], region.hi[i], floor, grid, &rule)).collect();
    if axes.iter().any(|a| a.is_empty()) {
        return out;
    }
    let mut idx = vec![0usize; n];
    'tensor: loop {
        let point: Vec<f64> = (0..n).map(|i| axes[i][idx[i]].0).collect();
        let weight: f64 = (0..n).map(|i| axes[i][idx[i]].1).product();
        out.push(OuterNode { point, weight });
        let mut d = n;
        loop {
            if d == 0 {
                break 'tensor;
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < axes[d].len() {
                break;
            }
            idx[d] = 0;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn integrate(cube: &Cube, grid: &GridParams, f: impl Fn(&[f64]) -> f64) -> f64 {
        outer_nodes(cube, grid).iter().map(|nd| nd.weight * f(&nd.point)).sum()
    }

    #[test]
    fn weights_sum_to_volume() {
        let grid = GridParams::default();
        for q in [
            Cube::origin(1, 2.0).unwrap(),
            Cube::origin(2, 0.5).unwrap(),
            Cube::new(vec![0.25], 0.5).unwrap(),
            Cube::new(vec![3.0, -1.0], 1.0).unwrap(),
            Cube::new(vec![0.1, 0.2], 1.0).unwrap(),
        ] {
            let v = integrate(&q, &grid, |_| 1.0);
            assert!((v - q.volume()).abs() < 1e-9 * q.volume(), "{q:?}: {v}");
        }
    }

    #[test]
    fn singular_integrand_on_shells() {
        // ∫_{Q(0,1)} |x|_max^{-1/2} dx in 2-D = 8 ∫_0^{1/2} r^{1/2} dr
        let grid = GridParams::new(2);
        let q = Cube::origin(2, 1.0).unwrap();
        let v = integrate(&q, &grid, |x| crate::geometry::max_norm(x).powf(-0.5));
        let exact = 8.0 * (2.0 / 3.0) * 0.5f64.powf(1.5);
        assert!((v - exact).abs() < 1e-8, "{v} vs {exact}");
    }

    #[test]
    fn floor_is_respected() {
        let grid = GridParams { level: 0, min_log2_radius: Some(-10) };
        let nodes = outer_nodes(&Cube::origin(1, 1.0).unwrap(), &grid);
        assert!(nodes.iter().all(|nd| nd.point[0].abs() >= 2f64.powi(-10) * (1.0 - 1e-12)));
    }
}
