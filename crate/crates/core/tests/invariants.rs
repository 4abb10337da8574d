use proptest::prelude::*;

use weightlab::conditions::{annulus_norm, ap_constant, bump_constant};
use weightlab::func::{cube_average, Pow, StepFunction};
use weightlab::geometry::{build_family, Cube, CubeFamily, Cutoff, FamilyParams, GaussLegendre, PointAnchors, Region};
use weightlab::maximal::{maximal_at, maximal_x_at};
use weightlab::spaces::{young_conjugate, young_eval, FunctionSpace, YoungFunction};
use weightlab::weights::{analytic_m_sigma, conjugate_exponent, sigma_from_v, theorem_weights, v_from_sigma, Weight};

const LO: f64 = -1.5;
const HI: f64 = 1.5;

fn step(values: Vec<f64>) -> StepFunction {
    let cells = values.len();
    StepFunction::grid(vec![LO], vec![HI], vec![cells], values).unwrap()
}

fn values(cells: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![1 => Just(0.0), 4 => 0.0..5.0f64], cells)
}

fn pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..7).prop_flat_map(|c| (values(c), values(c)))
}

fn space() -> impl Strategy<Value = FunctionSpace> {
    prop_oneof![
        (1.0..4.0f64).prop_map(|r| FunctionSpace::lebesgue(r).unwrap()),
        (1.5..4.0f64, 0.1..3.0f64).prop_map(|(pp, g)| FunctionSpace::orlicz_bump(pp, pp - 1.0 + g).unwrap()),
        (1.5..4.0f64, 0.1..3.0f64)
            .prop_map(|(pp, g)| FunctionSpace::orlicz_bump(pp, pp - 1.0 + g).unwrap().associate().unwrap()),
    ]
}

fn family() -> CubeFamily {
    build_family(&FamilyParams {
        dim: 1,
        k_min: -3,
        k_max: 1,
        per_octave: 1,
        lattice_step: 0.5,
        domain: Some(Region::new(vec![-2.0], vec![2.0]).unwrap()),
        anchors: vec![],
        point_anchors: PointAnchors::None,
    })
    .unwrap()
}

fn unit() -> Cube {
    Cube::origin(1, 1.0).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norms_are_homogeneous(x in space(), v in values(5), c in 0.01..100.0f64) {
        let f = step(v);
        let q = Cube::new(vec![0.2], 2.5).unwrap();
        let a = x.norm_on_cube(&f, &q, Cutoff::NONE).unwrap().value;
        let b = x.norm_on_cube(&f.map(|t| c * t).unwrap(), &q, Cutoff::NONE).unwrap().value;
        prop_assert!(close(b, c * a, 1e-8), "{b} vs {}", c * a);
    }

    #[test]
    fn norms_grow_as_truncation_shrinks(x in space(), k1 in 1.0..30.0f64, extra in 0.0..30.0f64) {
        let (_, sigma) = theorem_weights(1.5, 1).unwrap();
        let f = Pow::new(&sigma, 1.0 / 3.0);
        let wide = x.norm_on_cube(&f, &unit(), Cutoff::dyadic(k1)).unwrap();
        let narrow = x.norm_on_cube(&f, &unit(), Cutoff::dyadic(k1 + extra)).unwrap();
        prop_assert!(narrow.divergent || narrow.value >= wide.value * (1.0 - 1e-9));
    }

    #[test]
    fn constants_have_unit_norm(x in space(), c in 0.1..10.0f64) {
        let f = Weight::constant(1, c).unwrap();
        let q = Cube::new(vec![-0.7], 0.3).unwrap();
        prop_assert!(close(x.norm_on_cube(&f, &q, Cutoff::NONE).unwrap().value, c, 1e-9));
    }

    #[test]
    fn holder_inequality_with_young_constant((fv, gv) in pair(), pp in 1.5..4.0f64, g in 0.1..3.0f64) {
        let young = YoungFunction::bump(pp, pp - 1.0 + g).unwrap();
        let k = young_eval(&young, 1.0).unwrap() + young_conjugate(&young, 1.0).unwrap();
        let x = FunctionSpace::orlicz(young);
        let (f, g) = (step(fv), step(gv));
        let q = unit();
        let pairing = cube_average(&f.product(&g).unwrap(), &q, Cutoff::NONE).value;
        let nf = x.norm_on_cube(&f, &q, Cutoff::NONE).unwrap().value;
        let ng = x.associate().unwrap().norm_on_cube(&g, &q, Cutoff::NONE).unwrap().value;
        prop_assert!(pairing <= k * nf * ng * (1.0 + 1e-9));
    }

    #[test]
    fn power_young_function_gives_lebesgue_norm(v in values(6), r in 1.0..5.0f64, coef in 0.1..10.0f64) {
        let f = step(v);
        let q = Cube::new(vec![0.1], 2.0).unwrap();
        let leb = FunctionSpace::lebesgue(r).unwrap().norm_on_cube(&f, &q, Cutoff::NONE).unwrap().value;
        let orl = FunctionSpace::orlicz(YoungFunction::scaled_power(r, coef).unwrap());
        let orl = orl.norm_on_cube(&f, &q, Cutoff::NONE).unwrap().value;
        prop_assert!(close(orl, leb, 1e-8), "{orl} vs {leb}");
    }

    #[test]
    fn larger_family_gives_larger_maximal_function(v in values(5), x in -1.9..1.9f64, side in 0.01..3.0f64) {
        let f = step(v);
        let small = family();
        let big = small.with_anchors(vec![Cube::new(vec![x], side).unwrap()]).unwrap();
        let a = maximal_at(&f, &[x], &small, Cutoff::NONE).unwrap().value;
        let b = maximal_at(&f, &[x], &big, Cutoff::NONE).unwrap().value;
        prop_assert!(b >= a);
    }

    #[test]
    fn maximal_operator_is_sublinear((fv, gv) in pair(), x in -1.9..1.9f64, sp in space()) {
        let sum: Vec<f64> = fv.iter().zip(&gv).map(|(a, b)| a + b).collect();
        let fam = family();
        let m = |v: Vec<f64>| maximal_x_at(&step(v), &[x], &fam, &sp, Cutoff::NONE).unwrap().value;
        let (mf, mg, ms) = (m(fv), m(gv), m(sum));
        prop_assert!(ms <= (mf + mg) * (1.0 + 1e-9), "{ms} > {mf} + {mg}");
    }

    #[test]
    fn origin_averages_scale_like_the_power(alpha in -0.9..2.0f64, side in 1e-6..1e6f64, t in 1e-3..1e3f64) {
        let w = Weight::power(1, alpha).unwrap();
        let a = cube_average(&w, &Cube::origin(1, side).unwrap(), Cutoff::NONE).value;
        let b = cube_average(&w, &Cube::origin(1, t * side).unwrap(), Cutoff::NONE).value;
        prop_assert!(close(b, t.powf(alpha) * a, 1e-9));
    }

    #[test]
    fn off_center_integrals_match_tensor_quadrature(
        cx in -3.0..3.0f64, cy in -3.0..3.0f64, side in 0.05..1.0f64, alpha in -1.5..1.5f64,
    ) {
        let c = [cx, cy];
        prop_assume!(c.iter().all(|v| v.abs() > side));
        let w = Weight::power(2, alpha).unwrap();
        let q = Cube::new(c.to_vec(), side).unwrap();
        let got = cube_average(&w, &q, Cutoff::NONE).value;
        let gl = GaussLegendre::new(24);
        let h = side / 2.0;
        let split = |lo: f64, hi: f64, at: [f64; 2]| {
            let mut cuts = vec![lo, hi];
            cuts.extend(at.iter().flat_map(|t| [-t.abs(), t.abs()]).filter(|t| (lo..hi).contains(t)));
            cuts.sort_by(f64::total_cmp);
            cuts
        };
        let mut sum = 0.0;
        for seg in split(cx - h, cx + h, [cy - h, cy + h]).windows(2) {
            for panel in 0..8 {
                let width = (seg[1] - seg[0]) / 8.0;
                let x0 = seg[0] + width * panel as f64;
                for (x, wx) in gl.mapped(x0, x0 + width) {
                    for ys in split(cy - h, cy + h, [x, x]).windows(2) {
                        sum += wx * gl.integrate(&mut |y| x.abs().max(y.abs()).powf(alpha), ys[0], ys[1]);
                    }
                }
            }
        }
        prop_assert!(close(got, sum / (side * side), 1e-10), "{got} vs {}", sum / (side * side));
    }

    #[test]
    fn annulus_norm_adds_over_shells(p in 1.2..4.0f64, k in 0i32..30, n in 1usize..3) {
        let x = FunctionSpace::lebesgue(p).unwrap();
        let a = 2f64.powi(-k - 1);
        let inner = annulus_norm(&x, 2.0 * a, p, n).unwrap().value.powf(p);
        let outer = annulus_norm(&x, a, p, n).unwrap().value.powf(p);
        let shell = n as f64 * 2f64.powi(n as i32) * 2f64.ln();
        prop_assert!(outer > inner);
        prop_assert!(close(outer - inner, shell, 1e-8), "{} vs {shell}", outer - inner);
    }

    #[test]
    fn space_descriptors_round_trip(x in space(), q in 1.01..6.0f64, coef in 0.1..10.0f64) {
        prop_assert_eq!(x.to_string().parse::<FunctionSpace>().unwrap(), x.clone());
        let scaled = FunctionSpace::orlicz(YoungFunction::scaled_power(q, coef).unwrap());
        prop_assert_eq!(scaled.to_string().parse::<FunctionSpace>().unwrap(), scaled);
    }

    #[test]
    fn sigma_and_v_are_inverse(p in 1.1..5.0f64, x in 1e-8..1e8f64, alpha in -0.5..0.9f64) {
        let v = Weight::power(1, alpha).unwrap();
        let back = v_from_sigma(&sigma_from_v(&v, p).unwrap(), p).unwrap();
        prop_assert!(close(back.eval_at(&[x]).unwrap(), v.eval_at(&[x]).unwrap(), 1e-12));
    }

    #[test]
    fn theorem_weights_satisfy_the_pointwise_identity(p in 1.1..5.0f64, n in 1usize..4, r in -40.0..40.0f64) {
        let (w, sigma) = theorem_weights(p, n).unwrap();
        let m = analytic_m_sigma(p, n).unwrap();
        let mut x = vec![0.0; n];
        x[0] = 2f64.powf(r);
        let lhs = m.eval_at(&x).unwrap().powf(p) * w.eval_at(&x).unwrap();
        prop_assert!(close(lhs, sigma.eval_at(&x).unwrap(), 1e-9));
    }

    #[test]
    fn bump_in_conjugate_lebesgue_is_ap(p in 1.2..4.0f64, a in -0.9..2.0f64, b in -0.9..2.0f64) {
        let w = Weight::power(1, a).unwrap();
        let sigma = Weight::power(1, b).unwrap();
        let fam = build_family(&FamilyParams::anchors_only(
            1,
            vec![unit(), Cube::new(vec![0.75], 0.5).unwrap(), Cube::new(vec![-3.0], 2.0).unwrap()],
            PointAnchors::None,
        ))
        .unwrap();
        let x = FunctionSpace::lebesgue(conjugate_exponent(p)).unwrap();
        let bump = bump_constant(&w, &sigma, p, &x, &fam, Cutoff::NONE).unwrap().value;
        let ap = ap_constant(&w, &sigma, p, &fam).unwrap().value;
        prop_assert!(close(bump, ap, 1e-8), "{bump} vs {ap}");
    }
}
