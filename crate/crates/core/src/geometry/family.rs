//! Finite cube families standing in for "all cubes".
//!
//! A family is an ordered list: explicit anchor cubes first, then an optional
//! dyadic lattice enumerated by ascending sidelength and lexicographic
//! center index. Membership queries return indices in family order, so the
//! first maximizer is always the one reported.

use serde::{Deserialize, Serialize};

use super::{max_norm, Cube, Region};
use crate::error::{invalid, Error, Result};

const MAX_LATTICE_CUBES: u128 = 50_000_000;

/// How sample points are turned into extra anchor cubes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "rule", content = "level")]
pub enum PointAnchors {
    /// No point-dependent cubes.
    None,
    /// Only `Q(0, 2|x|_max)` for each point `x`.
    Diagonal,
    /// `Q(0, 2|x|_max)`, `Q(x, 2|x|_max)` and, for `level >= 1`, cubes of
    /// sidelength `2|x|_max · 2^{j/2^level}` (`-2^level <= j <= 2^{level+1}`)
    /// placed so that `x` sits at every offset `i/2^level` along each axis.
    Refined(u32),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyParams {
    pub dim: usize,
    pub k_min: i32,
    pub k_max: i32,
    /// Sidelengths per octave: `2^{k + j/per_octave}`.
    pub per_octave: u32,
    /// Lattice step as a fraction of the sidelength.
    pub lattice_step: f64,
    /// Region that lattice centers must lie in; `None` disables the lattice.
    pub domain: Option<Region>,
    pub anchors: Vec<Cube>,
    pub point_anchors: PointAnchors,
}

impl FamilyParams {
    /// Anchors only, no lattice.
    pub fn anchors_only(dim: usize, anchors: Vec<Cube>, point_anchors: PointAnchors) -> Self {
        Self {
            dim,
            k_min: 0,
            k_max: 0,
            per_octave: 1,
            lattice_step: 1.0,
            domain: None,
            anchors,
            point_anchors,
        }
    }

    /// `Q(0, 2^{-j})` for `j in j_min..=j_max`.
    pub fn origin_anchors(dim: usize, j_min: i32, j_max: i32) -> Vec<Cube> {
        (j_min..=j_max)
            .map(|j| Cube::origin(dim, 2f64.powi(-j)).expect("positive side"))
            .collect()
    }
}

#[derive(Clone, Debug)]
struct LatticeScale {
    side: f64,
    step: f64,
    lo: Vec<i64>,
    hi: Vec<i64>,
    offset: usize,
}

impl LatticeScale {
    fn count(&self) -> usize {
        self.lo.iter().zip(&self.hi).map(|(l, h)| (h - l + 1).max(0) as usize).product()
    }
}

/// A finite, ordered set of cubes.
#[derive(Clone, Debug)]
pub struct CubeFamily {
    dim: usize,
    anchors: Vec<Cube>,
    scales: Vec<LatticeScale>,
    lattice_len: usize,
    point_anchors: PointAnchors,
}

/// Deterministically enumerate the family described by `params`.
pub fn build_family(params: &FamilyParams) -> Result<CubeFamily> {
    if params.dim == 0 {
        return Err(invalid("dimension must be positive"));
    }
    if params.k_min > params.k_max {
        return Err(invalid(format!("k_min {} > k_max {}", params.k_min, params.k_max)));
    }
    if !(params.lattice_step > 0.0 && params.lattice_step.is_finite()) {
        return Err(invalid("lattice step must be positive"));
    }
    if params.per_octave == 0 {
        return Err(invalid("per_octave must be at least 1"));
    }
    for a in &params.anchors {
        if a.dim() != params.dim {
            return Err(Error::DimensionMismatch { expected: params.dim, got: a.dim() });
        }
    }
    let mut scales = Vec::new();
    let mut lattice_len = 0usize;
    if let Some(domain) = &params.domain {
        if domain.dim() != params.dim {
            return Err(Error::DimensionMismatch { expected: params.dim, got: domain.dim() });
        }
        let m = params.per_octave as i32;
        let mut total: u128 = 0;
        for k in params.k_min..=params.k_max {
            let subs = if k == params.k_max { 1 } else { m };
            for j in 0..subs {
                let side = 2f64.powf(k as f64 + j as f64 / m as f64);
                let step = params.lattice_step * side;
                let mut lo = Vec::with_capacity(params.dim);
                let mut hi = Vec::with_capacity(params.dim);
                for i in 0..params.dim {
                    let (l, h) = index_range(domain.lo[i], domain.hi[i], step);
                    lo.push(l);
                    hi.push(h);
                }
                let scale = LatticeScale { side, step, lo, hi, offset: lattice_len };
                let c = scale.count();
                total += c as u128;
                if total > MAX_LATTICE_CUBES {
                    return Err(invalid("cube family lattice is too large"));
                }
                lattice_len += c;
                if c > 0 {
                    scales.push(scale);
                }
            }
        }
    }
    if params.anchors.is_empty() && lattice_len == 0 {
        return Err(Error::EmptyFamily);
    }
    Ok(CubeFamily {
        dim: params.dim,
        anchors: params.anchors.clone(),
        scales,
        lattice_len,
        point_anchors: params.point_anchors,
    })
}

/// Integer range `{m : lo <= m * step <= hi}`.
fn index_range(lo: f64, hi: f64, step: f64) -> (i64, i64) {
    let mut a = (lo / step).ceil() as i64;
    while ((a - 1) as f64) * step >= lo {
        a -= 1;
    }
    while (a as f64) * step < lo {
        a += 1;
    }
    let mut b = (hi / step).floor() as i64;
    while ((b + 1) as f64) * step <= hi {
        b += 1;
    }
    while (b as f64) * step > hi {
        b -= 1;
    }
    (a, b)
}

impl CubeFamily {
    /// The family `{q}`.
    pub fn single(q: Cube) -> Result<CubeFamily> {
        build_family(&FamilyParams::anchors_only(q.dim(), vec![q], PointAnchors::None))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.anchors.len() + self.lattice_len
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn anchors(&self) -> &[Cube] {
        &self.anchors
    }

    pub fn point_anchor_rule(&self) -> PointAnchors {
        self.point_anchors
    }

    /// Cube at position `idx` in family order.
    pub fn get(&self, idx: usize) -> Option<Cube> {
        if idx < self.anchors.len() {
            return Some(self.anchors[idx].clone());
        }
        let li = idx - self.anchors.len();
        let scale = self.scales.iter().rev().find(|s| s.offset <= li)?;
        let mut rem = li - scale.offset;
        if rem >= scale.count() {
            return None;
        }
        let mut center = vec![0.0; self.dim];
        for i in (0..self.dim).rev() {
            let width = (scale.hi[i] - scale.lo[i] + 1) as usize;
            let m = scale.lo[i] + (rem % width) as i64;
            rem /= width;
            center[i] = m as f64 * scale.step;
        }
        Some(Cube::new(center, scale.side).expect("lattice cube is valid"))
    }

    pub fn iter(&self) -> impl Iterator<Item = Cube> + '_ {
        (0..self.len()).map(move |i| self.get(i).expect("index in range"))
    }

    /// Indices (ascending, i.e. in family order) of the cubes containing `x`.
    pub fn containing(&self, x: &[f64]) -> Result<Vec<usize>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        let mut out: Vec<usize> = self
            .anchors
            .iter()
            .enumerate()
            .filter(|(_, q)| q.contains_unchecked(x))
            .map(|(i, _)| i)
            .collect();
        let base = self.anchors.len();
        for scale in &self.scales {
            let half = 0.5 * scale.side;
            let mut ranges = Vec::with_capacity(self.dim);
            let mut empty = false;
            for (i, &xi) in x.iter().enumerate() {
                let a = (((xi - half) / scale.step).floor() as i64 - 1).max(scale.lo[i]);
                let b = (((xi + half) / scale.step).ceil() as i64 + 1).min(scale.hi[i]);
                let ok: Vec<i64> =
                    (a..=b).filter(|&m| (xi - m as f64 * scale.step).abs() <= half).collect();
                if ok.is_empty() {
                    empty = true;
                    break;
                }
                ranges.push(ok);
            }
            if empty {
                continue;
            }
            // lexicographic product, last axis fastest
            let mut idx = vec![0usize; self.dim];
            'odometer: loop {
                let mut lin = 0usize;
                for i in 0..self.dim {
                    let width = (scale.hi[i] - scale.lo[i] + 1) as usize;
                    lin = lin * width + (ranges[i][idx[i]] - scale.lo[i]) as usize;
                }
                out.push(base + scale.offset + lin);
                let mut d = self.dim;
                loop {
                    if d == 0 {
                        break 'odometer;
                    }
                    d -= 1;
                    idx[d] += 1;
                    if idx[d] < ranges[d].len() {
                        break;
                    }
                    idx[d] = 0;
                }
            }
        }
        Ok(out)
    }

    /// A new family with `extra` appended to the anchor list.
    pub fn with_anchors(&self, extra: Vec<Cube>) -> Result<CubeFamily> {
        for a in &extra {
            if a.dim() != self.dim {
                return Err(Error::DimensionMismatch { expected: self.dim, got: a.dim() });
            }
        }
        let mut fam = self.clone();
        fam.anchors.extend(extra);
        Ok(fam)
    }

    /// The family augmented with the point anchors its rule prescribes.
    pub fn augmented(&self, points: &[Vec<f64>]) -> Result<CubeFamily> {
        self.with_anchors(point_anchors(points, self.point_anchors))
    }
}

fn push_new(out: &mut Vec<Cube>, seen: &mut std::collections::HashSet<Vec<u64>>, q: Cube) {
    let mut key: Vec<u64> = q.center().iter().map(|c| c.to_bits()).collect();
    key.push(q.side().to_bits());
    if seen.insert(key) {
        out.push(q);
    }
}

/// Anchor cubes generated from sample points, without repeats; points at
/// the origin are skipped.
pub fn point_anchors(points: &[Vec<f64>], rule: PointAnchors) -> Vec<Cube> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    if rule == PointAnchors::None {
        return out;
    }
    for x in points {
        let r = max_norm(x);
        if !(r > 0.0 && r.is_finite()) {
            continue;
        }
        let n = x.len();
        let side = 2.0 * r;
        push_new(&mut out, &mut seen, Cube::origin(n, side).expect("positive side"));
        let PointAnchors::Refined(level) = rule else {
            continue;
        };
        push_new(&mut out, &mut seen, Cube::new(x.clone(), side).expect("positive side"));
        if level == 0 {
            continue;
        }
        let m = 1i64 << level.min(10);
        let mf = m as f64;
        let mut offsets = vec![0i64; n];
        for j in -m..=2 * m {
            let ell = side * 2f64.powf(j as f64 / mf);
            offsets.iter_mut().for_each(|o| *o = 0);
            loop {
                let center: Vec<f64> = x
                    .iter()
                    .zip(&offsets)
                    .map(|(xi, &t)| xi + (0.5 - t as f64 / mf) * ell)
                    .collect();
                push_new(&mut out, &mut seen, Cube::new(center, ell).expect("positive side"));
                let mut d = 0;
                while d < n {
                    offsets[d] += 1;
                    if offsets[d] <= m {
                        break;
                    }
                    offsets[d] = 0;
                    d += 1;
                }
                if d == n {
                    break;
                }
            }
        }
    }
    out
}
