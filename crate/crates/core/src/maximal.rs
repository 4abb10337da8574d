//! Maximal operators `M` and `M_X` over finite cube families.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::func::{cube_average, Function};
use crate::geometry::{Cube, CubeFamily, Cutoff};
use crate::spaces::{FunctionSpace, NormValue};

/// `sup` over the family cubes containing `point`, with its first maximizer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaximalEstimate {
    pub point: Vec<f64>,
    pub value: f64,
    /// Index of the maximizing cube in family order.
    pub argmax: usize,
    pub cube: Cube,
    /// Number of family cubes containing the point.
    pub candidates: usize,
    pub divergent: bool,
}

fn cube_value(
    f: &dyn Function,
    q: &Cube,
    space: Option<&FunctionSpace>,
    cutoff: Cutoff,
) -> Result<NormValue> {
    match space {
        None => {
            let avg = cube_average(f, q, cutoff);
            Ok(NormValue { value: avg.value, divergent: !avg.converged })
        }
        Some(x) => x.norm_on_cube(f, q, cutoff),
    }
}

fn select(
    x: &[f64],
    family: &CubeFamily,
    indices: &[usize],
    mut value_of: impl FnMut(usize) -> Result<NormValue>,
) -> Result<MaximalEstimate> {
    if indices.is_empty() {
        return Err(Error::NoContainingCube);
    }
    let mut best: Option<(usize, f64)> = None;
    let mut divergent = false;
    for &i in indices {
        let v = value_of(i)?;
        divergent |= v.divergent;
        if best.is_none_or(|(_, b)| v.value > b) {
            best = Some((i, v.value));
        }
    }
    let (argmax, value) = best.expect("nonempty");
    Ok(MaximalEstimate {
        point: x.to_vec(),
        value: if divergent { f64::INFINITY } else { value },
        argmax,
        cube: family.get(argmax).expect("index from family"),
        candidates: indices.len(),
        divergent,
    })
}

/// `M f(x)` over `family`, averages taken on `|y|_max >= eps`.
pub fn maximal_at(f: &dyn Function, x: &[f64], family: &CubeFamily, cutoff: Cutoff) -> Result<MaximalEstimate> {
    check_dims(f, x, family)?;
    let idx = family.containing(x)?;
    select(x, family, &idx, |i| cube_value(f, &family.get(i).expect("index"), None, cutoff))
}

/// `M_X f(x)` over `family`.
pub fn maximal_x_at(
    f: &dyn Function,
    x: &[f64],
    family: &CubeFamily,
    space: &FunctionSpace,
    cutoff: Cutoff,
) -> Result<MaximalEstimate> {
    check_dims(f, x, family)?;
    let idx = family.containing(x)?;
    select(x, family, &idx, |i| cube_value(f, &family.get(i).expect("index"), Some(space), cutoff))
}

fn check_dims(f: &dyn Function, x: &[f64], family: &CubeFamily) -> Result<()> {
    if x.len() != family.dim() {
        return Err(Error::DimensionMismatch { expected: family.dim(), got: x.len() });
    }
    if f.dim() != family.dim() {
        return Err(Error::DimensionMismatch { expected: family.dim(), got: f.dim() });
    }
    Ok(())
}

/// The point operator at every point, sharing per-cube values.
///
/// Each cube value is computed once and reused; since the value of a cube
/// does not depend on the point, the result equals mapping the point
/// operator bit for bit.
pub fn maximal_field(
    f: &dyn Function,
    points: &[Vec<f64>],
    family: &CubeFamily,
    space: Option<&FunctionSpace>,
    cutoff: Cutoff,
) -> Result<Vec<MaximalEstimate>> {
    let mut lists = Vec::with_capacity(points.len());
    for x in points {
        check_dims(f, x, family)?;
        lists.push(family.containing(x)?);
    }
    let mut cache: HashMap<usize, NormValue> = HashMap::new();
    let mut out = Vec::with_capacity(points.len());
    for (x, idx) in points.iter().zip(&lists) {
        let est = select(x, family, idx, |i| {
            if let Some(v) = cache.get(&i) {
                return Ok(*v);
            }
            let v = cube_value(f, &family.get(i).expect("index"), space, cutoff)?;
            cache.insert(i, v);
            Ok(v)
        })?;
        out.push(est);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::func::StepFunction;
    use crate::geometry::{build_family, FamilyParams, PointAnchors, Region};
    use crate::weights::Weight;

    fn unit_family() -> CubeFamily {
        build_family(&FamilyParams {
            dim: 1,
            k_min: -3,
            k_max: 1,
            per_octave: 1,
            lattice_step: 0.25,
            domain: Some(Region::new(vec![-2.0], vec![2.0]).unwrap()),
            anchors: vec![Cube::new(vec![0.5], 1.0).unwrap()],
            point_anchors: PointAnchors::None,
        })
        .unwrap()
    }

    #[test]
    fn indicator_of_member_cube() {
        let fam = unit_family();
        let f = StepFunction::indicator(&Region::new(vec![0.0], vec![1.0]).unwrap(), 1.0).unwrap();
        let m = maximal_at(&f, &[0.3], &fam, Cutoff::NONE).unwrap();
        assert!((m.value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn constants_are_fixed() {
        let fam = unit_family();
        let c = Weight::constant(1, 2.5).unwrap();
        for x in [-1.0, 0.0, 0.7] {
            assert!((maximal_at(&c, &[x], &fam, Cutoff::NONE).unwrap().value - 2.5).abs() < 1e-14);
            let x2 = FunctionSpace::orlicz_bump(3.0, 2.5).unwrap();
            let v = maximal_x_at(&c, &[x], &fam, &x2, Cutoff::NONE).unwrap().value;
            assert!((v - 2.5).abs() < 1e-9, "{v}");
        }
    }

    #[test]
    fn outside_family_errors() {
        let fam = unit_family();
        let c = Weight::constant(1, 1.0).unwrap();
        assert!(matches!(maximal_at(&c, &[10.0], &fam, Cutoff::NONE), Err(Error::NoContainingCube)));
        assert!(matches!(maximal_at(&c, &[0.0, 0.0], &fam, Cutoff::NONE), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn field_equals_point_operator() {
        let fam = unit_family();
        let f = StepFunction::grid(vec![-2.0], vec![2.0], vec![8], vec![0.0, 1.0, 3.0, 0.5, 2.0, 0.0, 4.0, 1.0]).unwrap();
        let pts: Vec<Vec<f64>> = (0..50).map(|i| vec![-1.9 + 0.077 * i as f64]).collect();
        let field = maximal_field(&f, &pts, &fam, None, Cutoff::NONE).unwrap();
        for (x, e) in pts.iter().zip(&field) {
            assert_eq!(&maximal_at(&f, x, &fam, Cutoff::NONE).unwrap(), e);
        }
    }
}
