//! Acceptance criteria A1–A10, one PASS/FAIL line each.
//!
//! Runs as a plain binary so every line is printed; exits non-zero if any
//! criterion fails. Runtime budgets assume the optimized test profile.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use weightlab::conditions::{fujii_wilson_ratio, lower_bound_chain, sawyer_ratio, FamilySpec};
use weightlab::experiments::trend::{linear_fit, verdict, SeriesPoint, Verdict};
use weightlab::experiments::{m_sigma_windows, pointwise_table, weak_testing_sweep, Config, KRange};
use weightlab::func::{cube_average, Pow, StepFunction};
use weightlab::geometry::{build_family, Cube, Cutoff, FamilyParams, GridParams, PointAnchors, Region};
use weightlab::maximal::{maximal_at, maximal_field, maximal_x_at};
use weightlab::spaces::{young_conjugate, young_eval, FunctionSpace, YoungFunction};
use weightlab::weights::{power_log_sigma, theorem_weights};
use weightlab::conditions::{annulus_norm, duality_pairing};

type Check = Result<String, String>;

fn ensure(ok: bool, msg: String) -> Check {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn log_spaced(lo: f64, hi: f64, m: usize) -> Vec<f64> {
    (0..m).map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (m - 1) as f64).exp()).collect()
}

fn a1() -> Check {
    let radii = log_spaced(2f64.powi(-20), 2f64.powi(20), 10_000);
    let mut worst = 0.0f64;
    for p in [1.5, 2.0, 3.0] {
        for n in [1, 2] {
            let t = pointwise_table(p, n, &radii).map_err(|e| e.to_string())?;
            worst = worst.max(t.max_rel_deviation);
        }
    }
    ensure(worst <= 1e-9, format!("max |(M σ)^p w/σ - 1| = {worst:.2e} over 6 (p, n) pairs"))
}

fn a2() -> Check {
    let radii: Vec<f64> = (-32..=32).map(|j| 2f64.powf(j as f64 / 2.0)).collect();
    let t = m_sigma_windows(1.5, 1, &radii, [4, 5]).map_err(|e| e.to_string())?;
    let [lo, hi] = t.window;
    let positive = t.fine.iter().chain(&t.coarse).all(|v| v.is_finite() && *v > 0.0);
    ensure(
        positive && hi / lo <= 10.0 && t.max_drift < 0.05,
        format!("window [{lo:.4}, {hi:.4}], ratio {:.3}, drift {:.2}% between levels 4 and 5", hi / lo, 100.0 * t.max_drift),
    )
}

fn a3() -> Check {
    let p = 1.5;
    let (w, s) = theorem_weights(p, 1).unwrap();
    let grid = GridParams::default();
    let fam = FamilySpec::default();
    let mut origin = Vec::new();
    for k in 0..=12 {
        let q = Cube::origin(1, 2f64.powi(-k)).unwrap();
        origin.push(sawyer_ratio(&w, &s, p, &q, &fam, &grid).map_err(|e| e.to_string())?.value);
    }
    let mut all = origin.clone();
    for j in 0..10 {
        let side = 2f64.powi(-j);
        for center in [0.5 * side, -1.5 * side] {
            let q = Cube::new(vec![center], side).unwrap();
            all.push(sawyer_ratio(&w, &s, p, &q, &fam, &grid).map_err(|e| e.to_string())?.value);
        }
    }
    let mut sorted = all.clone();
    sorted.sort_by(f64::total_cmp);
    let median = 0.5 * (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2]);
    let spread_ok = all.iter().all(|v| *v <= 10.0 * median && *v >= median / 10.0);
    let ks: Vec<f64> = (0..=12).map(f64::from).collect();
    let slope = linear_fit(&ks, &origin).unwrap().slope;
    ensure(
        spread_ok && slope.abs() < 0.02 * median,
        format!(
            "33 cubes, ratios in [{:.4}, {:.4}], median {median:.4}, slope vs k {slope:.2e}",
            sorted[0],
            sorted[sorted.len() - 1]
        ),
    )
}

fn a4() -> Check {
    let cfg = Config { p: 1.5, scales: KRange { k0: 0, k1: 20 }, ..Config::default() };
    let (_, s) = theorem_weights(1.5, 1).unwrap();
    let lp = FunctionSpace::lebesgue(1.5).unwrap();
    let r = weak_testing_sweep(&s, &lp, &cfg).map_err(|e| e.to_string())?;
    let fit = r.fit.ok_or("no fit")?;
    let vals: Vec<f64> = r.series.iter().map(|p| p.value).collect();
    let span = vals.iter().copied().fold(0.0, f64::max) / vals.iter().copied().fold(f64::INFINITY, f64::min);
    ensure(
        fit.slope > 0.0 && fit.r2 >= 0.99 && span >= 4.0 && r.verdict == Verdict::DivergentTrend,
        format!("slope {:.4} vs 1+log(2/a), R2 {:.5}, span {span:.2}x", fit.slope, fit.r2),
    )
}

fn a5() -> Check {
    let (_, s) = theorem_weights(1.5, 1).unwrap();
    let f = Pow::new(&s, 1.0 / 3.0);
    let x = FunctionSpace::orlicz_bump(3.0, 2.5).unwrap();
    let q = Cube::origin(1, 1.0).unwrap();
    let mut norms = Vec::new();
    for k in 3..=40 {
        let v = x.norm_on_cube(&f, &q, Cutoff::dyadic(k as f64)).map_err(|e| e.to_string())?;
        norms.push(v.value);
    }
    let increasing = norms.windows(2).all(|w| w[1] > w[0]);
    let growth = norms[37] / norms[2];
    ensure(
        increasing && growth > 3.0,
        format!(
            "strictly increasing: {increasing}; norm(k=40)/norm(k=5) = {:.6}/{:.6} = {growth:.4} (required > 3)",
            norms[37], norms[2]
        ),
    )
}

fn a6() -> Check {
    let p = 1.5;
    let grid = GridParams::default();
    let xprimes = [
        FunctionSpace::lebesgue(p).unwrap(),
        FunctionSpace::orlicz_bump(3.0, 2.5).unwrap().associate().unwrap(),
    ];
    let mut checks = 0;
    let mut violations = Vec::new();
    let mut tightest = f64::INFINITY;
    for xp in &xprimes {
        for k in 0..=12 {
            let c = lower_bound_chain(xp, 2f64.powi(-k), p, 1, &grid).map_err(|e| e.to_string())?;
            checks += 1;
            tightest = tightest.min(c.lhs / c.rhs);
            if !c.holds {
                violations.push(format!("{xp} k={k}"));
            }
        }
    }
    ensure(
        violations.is_empty(),
        format!("{checks} checks, {} violations {violations:?}, min lhs/rhs {tightest:.3}", violations.len()),
    )
}

fn a7() -> Check {
    let (_, s) = theorem_weights(2.0, 1).unwrap();
    let mass = s.origin_integral(2.0, Cutoff::NONE).into_result().map_err(|e| e.to_string())?;
    let l2 = FunctionSpace::lebesgue(2.0).unwrap();
    let ann = annulus_norm(&l2, 2f64.powi(-10), 2.0, 1).map_err(|e| e.to_string())?.value;
    let ann_exact = (2.0 * 2048f64.ln()).sqrt();
    let eps = 2f64.powi(-20);
    let trunc = duality_pairing(2.0, 1, eps).map_err(|e| e.to_string())?;
    let trunc_exact = 2.0 * ((1.0 + 21.0 * 2f64.ln()).ln() - (1.0 + 2f64.ln()).ln());
    ensure(
        (mass - 2.0).abs() < 1e-6 && (ann - ann_exact).abs() < 1e-6 && (trunc - trunc_exact).abs() < 1e-6,
        format!("∫σ = {mass:.10}, annulus = {ann:.10} ({ann_exact:.10}), truncated = {trunc:.10} ({trunc_exact:.10})"),
    )
}

fn a8() -> Check {
    let s = power_log_sigma(0.5, 0.0, 1).unwrap();
    let grid = GridParams::default();
    let fam = FamilySpec::default();
    let mut series = Vec::new();
    for k in 0..=12 {
        let q = Cube::origin(1, 2f64.powi(-k)).unwrap();
        let v = fujii_wilson_ratio(&s, &q, &fam, &grid).map_err(|e| e.to_string())?.value;
        series.push(SeriesPoint { abscissa: 1.0 + (k + 1) as f64 * 2f64.ln(), value: v, divergent: false });
    }
    let max = series.iter().map(|p| p.value).fold(0.0, f64::max);
    let min = series.iter().map(|p| p.value).fold(f64::INFINITY, f64::min);
    let v = verdict(&series);
    ensure(max / min <= 4.0 && v == Verdict::BoundedTrend, format!("ratios in [{min:.6}, {max:.6}], verdict {v}"))
}

fn random_step(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> StepFunction {
    let cells = rng.gen_range(1..8);
    random_step_on(rng, lo, hi, cells)
}

fn random_step_on(rng: &mut ChaCha8Rng, lo: f64, hi: f64, cells: usize) -> StepFunction {
    let values = (0..cells).map(|_| if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.0..5.0) }).collect();
    StepFunction::grid(vec![lo], vec![hi], vec![cells], values).unwrap()
}

fn a9() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let fam = build_family(&FamilyParams {
        dim: 1,
        k_min: -3,
        k_max: 1,
        per_octave: 1,
        lattice_step: 0.5,
        domain: Some(Region::new(vec![-2.0], vec![2.0]).unwrap()),
        anchors: vec![],
        point_anchors: PointAnchors::None,
    })
    .unwrap();
    let cubes: Vec<Cube> = fam.iter().collect();
    let l1 = FunctionSpace::lebesgue(1.0).unwrap();
    let mut notes = Vec::new();

    // M_{L^1} = M, fast path = exhaustive enumeration
    let mut exact_mismatch = 0;
    let mut enum_mismatch = 0;
    let mut root_err = 0.0f64;
    for _ in 0..100 {
        let f = random_step(&mut rng, -1.5, 1.5);
        let pts: Vec<Vec<f64>> = (0..8).map(|_| vec![rng.gen_range(-1.9..1.9)]).collect();
        let fast = maximal_field(&f, &pts, &fam, None, Cutoff::NONE).unwrap();
        for (x, m) in pts.iter().zip(&fast) {
            let mx = maximal_x_at(&f, x, &fam, &l1, Cutoff::NONE).unwrap();
            if mx.value.to_bits() != m.value.to_bits() {
                exact_mismatch += 1;
            }
            let brute = cubes
                .iter()
                .filter(|q| q.contains(x).unwrap())
                .map(|q| cube_average(&f, q, Cutoff::NONE).value)
                .fold(f64::NEG_INFINITY, f64::max);
            if brute.to_bits() != m.value.to_bits() {
                enum_mismatch += 1;
            }
            let p = rng.gen_range(1.1..4.0);
            let lp = FunctionSpace::lebesgue(p).unwrap();
            let root = Pow::new(&f, 1.0 / p);
            let mp = maximal_x_at(&root, x, &fam, &lp, Cutoff::NONE).unwrap().value.powf(p);
            let direct = maximal_at(&f, x, &fam, Cutoff::NONE).unwrap().value;
            if direct > 0.0 {
                root_err = root_err.max(rel(mp, direct));
            } else {
                root_err = root_err.max(mp);
            }
        }
    }
    notes.push(format!("M_L1 mismatches {exact_mismatch}, enumeration mismatches {enum_mismatch}, M_Lp root err {root_err:.1e}"));
    let mut ok = exact_mismatch == 0 && enum_mismatch == 0 && root_err < 1e-8;

    // Hölder with K = A(1) + Ā(1) (1 for Lebesgue)
    let q = Cube::origin(1, 3.0).unwrap();
    let bump = YoungFunction::bump(3.0, 2.5).unwrap();
    let k_orlicz = young_eval(&bump, 1.0).unwrap() + young_conjugate(&bump, 1.0).unwrap();
    let pairs = [
        (FunctionSpace::lebesgue(3.0).unwrap(), 1.0),
        (FunctionSpace::orlicz(bump.clone()), k_orlicz),
    ];
    let mut worst_holder = 0.0f64;
    for _ in 0..300 {
        let cells = rng.gen_range(1..8);
        let f = random_step_on(&mut rng, -1.5, 1.5, cells);
        let g = random_step_on(&mut rng, -1.5, 1.5, cells);
        let fg = f.product(&g).unwrap();
        let pair = cube_average(&fg, &q, Cutoff::NONE).value;
        for (x, k) in &pairs {
            let Ok(xp) = x.associate() else { continue };
            let nf = x.norm_on_cube(&f, &q, Cutoff::NONE).unwrap().value;
            let ng = xp.norm_on_cube(&g, &q, Cutoff::NONE).unwrap().value;
            if nf * ng > 0.0 {
                worst_holder = worst_holder.max(pair / (k * nf * ng));
            }
        }
    }
    notes.push(format!("Hölder max pairing/(K‖f‖‖g‖) {worst_holder:.4}"));
    ok &= worst_holder <= 1.0 + 1e-9;

    // homogeneity, monotonicity, truncation on 10^3 cases
    let spaces = [
        FunctionSpace::lebesgue(1.0).unwrap(),
        FunctionSpace::lebesgue(2.5).unwrap(),
        FunctionSpace::orlicz_bump(3.0, 2.5).unwrap(),
        FunctionSpace::orlicz_bump(3.0, 2.5).unwrap().associate().unwrap(),
    ];
    let (_, sigma) = theorem_weights(1.5, 1).unwrap();
    let sigma_root = Pow::new(&sigma, 1.0 / 3.0);
    let mut failures = 0;
    for case in 0..1000 {
        let x = &spaces[case % spaces.len()];
        let f = random_step(&mut rng, -1.5, 1.5);
        let c = rng.gen_range(0.01..100.0);
        let nf = x.norm_on_cube(&f, &q, Cutoff::NONE).unwrap().value;
        let ncf = x.norm_on_cube(&f.map(|v| c * v).unwrap(), &q, Cutoff::NONE).unwrap().value;
        let lift = rng.gen_range(0.0..1.0);
        let bigger = f.map(|v| v + lift).unwrap();
        let nb = x.norm_on_cube(&bigger, &q, Cutoff::NONE).unwrap().value;
        let homog = if nf > 0.0 { rel(ncf, c * nf) < 1e-8 } else { ncf == 0.0 };
        let mono = nb >= nf * (1.0 - 1e-9);
        let e1 = 2f64.powi(-rng.gen_range(1..30));
        let e2 = e1 * rng.gen_range(0.0..1.0);
        let qs = Cube::origin(1, 1.0).unwrap();
        let t1 = x.norm_on_cube(&sigma_root, &qs, Cutoff::radius(e1)).unwrap();
        let t2 = x.norm_on_cube(&sigma_root, &qs, Cutoff::radius(e2.max(1e-300))).unwrap();
        let trunc = t2.divergent || t2.value >= t1.value * (1.0 - 1e-9);
        if !(homog && mono && trunc) {
            failures += 1;
        }
    }
    notes.push(format!("randomized invariant failures {failures}/1000"));
    ok &= failures == 0;
    ensure(ok, notes.join("; "))
}

fn a10() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = Command::new(env!("CARGO_BIN_EXE_weightlab"))
        .args(["verify-theorem", "--p", "1.5", "--n", "1", "--space", "lebesgue:r=3"])
        .args(["--space", "orlicz:pprime=3,gamma=2.5", "--format", "json", "--out"])
        .arg(dir.path())
        .output()
        .map_err(|e| e.to_string())?;
    let code = out.status.code();
    let text = std::fs::read_to_string(dir.path().join("verify-theorem.json")).map_err(|e| e.to_string())?;
    let doc: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let sawyer = doc["series"].as_array().and_then(|s| s.iter().find(|r| r["tag"] == "sawyer")).ok_or("no sawyer series")?;
    let sawyer_ok = sawyer["verdict"] == "bounded-trend";
    let mut lines = Vec::new();
    let mut dich_ok = true;
    for d in doc["dichotomy"].as_array().ok_or("no dichotomy")? {
        let one = d["bump"] == "divergent-trend" || d["weak_testing"] == "divergent-trend";
        dich_ok &= one;
        lines.push(format!("{}: bump {}, weak-testing {}", d["space"], d["bump"], d["weak_testing"]));
    }
    ensure(
        code == Some(0) && sawyer_ok && dich_ok && lines.len() == 2,
        format!("exit {code:?}, sawyer {}, {}", sawyer["verdict"], lines.join("; ")),
    )
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Check, Duration);
    let criteria: [Criterion; 10] = [
        ("A1", a1, Duration::from_secs(1)),
        ("A2", a2, Duration::from_secs(30)),
        ("A3", a3, Duration::from_secs(120)),
        ("A4", a4, Duration::from_secs(120)),
        ("A5", a5, Duration::from_secs(60)),
        ("A6", a6, Duration::from_secs(120)),
        ("A7", a7, Duration::from_secs(1)),
        ("A8", a8, Duration::from_secs(60)),
        ("A9", a9, Duration::from_secs(120)),
        ("A10", a10, Duration::from_secs(300)),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, run, budget) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| f == name) {
            continue;
        }
        let t = Instant::now();
        let result = run();
        let elapsed = t.elapsed();
        let (pass, detail) = match result {
            Ok(d) if elapsed <= budget => (true, d),
            Ok(d) => (false, format!("{d}; over budget {budget:?}")),
            Err(d) => (false, d),
        };
        failed += usize::from(!pass);
        println!("{name:<4} {}  {:>8.2}s  {detail}", if pass { "PASS" } else { "FAIL" }, elapsed.as_secs_f64());
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
