//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::{E, PI};
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use whlab::gridfn::{Grid, SampledFunction};
use whlab::operators::{fejer_ladder, gaussian_kernel, recover_kernel, spectral_radius_to, Direction, RecoveryConfig, WienerHopfOperator};
use whlab::spaces::{luxemburg_norm, OrliczFunction, SpaceSpec, Weight};
use whlab::spectra::{certificate_batch, polar_lattice, separation_factor, AnnulusBounds, CertificateKind, WindowLadder};
use whlab::vector::{random_unit_vector, vector_spectral_radius, vectorize_certificate};
use whlab_cli::config::parse_config;
use whlab_cli::experiments::run_experiment;
use whlab_cli::report::{Outcome, Verdict};

struct Check {
    ok: bool,
    detail: String,
}

impl Check {
    fn new(ok: bool, detail: impl Into<String>) -> Self {
        Self { ok, detail: detail.into() }
    }
}

fn run_json(doc: Value) -> Outcome {
    let config = parse_config(&doc.to_string()).unwrap_or_else(|e| panic!("config rejected: {e}"));
    run_experiment(&config, Path::new(".")).unwrap_or_else(|e| panic!("experiment failed: {e}"))
}

fn verdicts<'a>(out: &'a Outcome, prefix: &str) -> Vec<&'a Verdict> {
    out.verdicts.iter().filter(|v| v.invariant.starts_with(prefix)).collect()
}

fn failing(out: &Outcome, prefixes: &[&str]) -> Vec<String> {
    let mut bad = vec![];
    for p in prefixes {
        let vs = verdicts(out, p);
        if vs.is_empty() {
            bad.push(format!("{p} missing"));
        }
        bad.extend(vs.iter().filter(|v| !v.pass).map(|v| format!("{}={:e}", v.invariant, v.measured)));
    }
    bad
}

fn weight_json(name: &str) -> Value {
    match name {
        "const" => json!({ "family": "constant" }),
        "exp(1)" => json!({ "family": "exponential", "beta": 1.0 }),
        "zigzag(1)" => json!({ "family": "dyadic_zigzag", "beta": 1.0 }),
        _ => unreachable!(),
    }
}

fn operator_json(name: &str) -> Value {
    match name {
        "S1" => json!({ "kind": "shift", "by": 1.0 }),
        "gaussian" => json!({ "kind": "gaussian", "centre": 1.0, "width": 0.5 }),
        "bump" => json!({ "kind": "bump", "centre": 1.0, "radius": 0.5 }),
        _ => unreachable!(),
    }
}

fn symbol_config(op: &str, w: &str, span: f64, controls: bool) -> Value {
    json!({
        "space": { "weight": weight_json(w) },
        "grid": { "span": span, "step": 0.01 },
        "operator": operator_json(op),
        "experiment": { "kind": "symbol", "levels": 5, "probes": 5, "controls": controls },
        "seed": 7
    })
}

fn representation() -> Check {
    let mut worst: f64 = 0.0;
    let mut slowest: f64 = 0.0;
    let mut bad = vec![];
    for op in ["S1", "gaussian", "bump"] {
        for w in ["const", "exp(1)", "zigzag(1)"] {
            let start = Instant::now();
            let out = run_json(symbol_config(op, w, 80.0, false));
            let secs = start.elapsed().as_secs_f64();
            slowest = slowest.max(secs);
            let levels = verdicts(&out, "representation_residual");
            for v in &levels {
                worst = worst.max(v.measured);
                if v.measured > 1e-5 || !v.measured.is_finite() {
                    bad.push(format!("{op}/{w} {}={:e}", v.invariant, v.measured));
                }
            }
            if levels.is_empty() {
                bad.push(format!("{op}/{w}: no levels"));
            }
            if secs > 30.0 {
                bad.push(format!("{op}/{w}: {secs:.1}s"));
            }
        }
    }
    Check::new(bad.is_empty(), format!("worst residual {worst:e}, slowest pair {slowest:.2}s {bad:?}"))
}

fn strip_bound() -> Check {
    let mut bad = vec![];
    let mut detail = vec![];
    for op in ["gaussian", "bump"] {
        let flat = run_json(symbol_config(op, "const", 40.0, false));
        bad.extend(failing(&flat, &["strip_bound_tightness", "strip_bound_ratio"]));
        let zig = run_json(symbol_config(op, "zigzag(1)", 40.0, false));
        bad.extend(failing(&zig, &["strip_bound_ratio"]));
        let tight = verdicts(&flat, "strip_bound_tightness").first().map(|v| v.measured).unwrap_or(f64::NAN);
        let ratio = verdicts(&zig, "strip_bound_ratio").first().map(|v| v.measured).unwrap_or(f64::NAN);
        detail.push(format!("{op}: |sup-norm|/norm {tight:e}, zigzag ratio {ratio:.6}"));
    }
    Check::new(bad.is_empty(), format!("{} {bad:?}", detail.join("; ")))
}

fn annulus() -> Check {
    let w = Weight::dyadic_zigzag(1.0);
    let space = SpaceSpec::l2(w.clone());
    let bounds = AnnulusBounds::from_weight(&w, 2.0);
    let ladder = WindowLadder::default();
    let radii = [0.2, 0.5, 1.0 / E, 0.6, 1.0, E.sqrt(), E, 1.2 * E];
    let lambdas = polar_lattice(&radii, 8);
    let certs = certificate_batch(&lambdas, &space, &bounds, &ladder).expect("certificates");
    let mut bad = vec![];
    let mut worst_inside: f64 = 0.0;
    for c in &certs {
        let expect_inside = c.modulus >= 1.0 / E * (1.0 - 1e-12) && c.modulus <= E * (1.0 + 1e-12);
        match (&c.kind, expect_inside) {
            (CertificateKind::Inside { residual, .. }, true) => {
                worst_inside = worst_inside.max(*residual);
                if *residual > 5e-2 {
                    bad.push(format!("|λ|={:.4} residual {residual:e}", c.modulus));
                }
            }
            (CertificateKind::Outside { .. }, false) => {}
            _ => bad.push(format!("|λ|={:.4} is {}", c.modulus, c.status())),
        }
    }
    let sep = separation_factor(&certs).unwrap_or(0.0);
    if sep < 10.0 {
        bad.push(format!("separation {sep:e}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let u = random_unit_vector(2, &mut rng);
    let mismatched = certs
        .iter()
        .filter(|c| vectorize_certificate((*c).clone(), &space, &ladder, &u).expect("vector certificate").status() != c.status())
        .count();
    if mismatched > 0 {
        bad.push(format!("{mismatched} d=2 verdicts differ"));
    }
    Check::new(
        bad.is_empty(),
        format!("{} points, worst inside residual {worst_inside:e}, separation {sep:.1}, d=2 mismatches {mismatched} {bad:?}", certs.len()),
    )
}

fn radii() -> Check {
    let mut bad = vec![];
    let zz = Weight::dyadic_zigzag(1.0);
    let f = spectral_radius_to(&zz, Direction::Forward, 64).estimate;
    let b = spectral_radius_to(&zz, Direction::Backward, 64).estimate;
    for (name, v) in [("zigzag forward", f), ("zigzag backward", b)] {
        if !(0.98 * E..=1.02 * E).contains(&v) {
            bad.push(format!("{name} {v}"));
        }
    }
    let ex = Weight::exponential(1.0);
    let ef = spectral_radius_to(&ex, Direction::Forward, 64).estimate;
    let eb = spectral_radius_to(&ex, Direction::Backward, 64).estimate;
    if (ef - E).abs() > 1e-10 || (eb - 1.0 / E).abs() > 1e-10 {
        bad.push(format!("exp(1) ({ef}, {eb})"));
    }
    let mut worst: f64 = 0.0;
    for w in [&zz, &ex] {
        for d in [2, 5] {
            let r = vector_spectral_radius(w, 2.0, d, 9).expect("vector radius");
            let gap = (r.forward - r.scalar_forward).abs().max((r.backward - r.scalar_backward).abs());
            worst = worst.max(gap);
            if gap > 1e-6 {
                bad.push(format!("{} d={d} gap {gap:e}", w.name()));
            }
        }
    }
    Check::new(bad.is_empty(), format!("zigzag ({f:.6}, {b:.6}), exp(1) ({ef:.12}, {eb:.12}), vector gap {worst:e} {bad:?}"))
}

fn cutoff() -> Check {
    let mut bad = vec![];
    let mut detail = vec![];
    for (eps, c0, eta0, delta) in [(0.1, 2.0, 5.0, 1.0), (0.01, 1.0, 10.0, 0.5)] {
        let out = run_json(json!({ "experiment": { "kind": "cutoff", "epsilon": eps, "c0": c0, "eta0": eta0, "delta": delta } }));
        let get = |n: &str| verdicts(&out, n).first().map(|v| v.measured).unwrap_or(f64::NAN);
        let (outside, total, peak) = (get("cutoff_outside_mass"), get("cutoff_total_mass"), get("cutoff_peak_deviation"));
        if !(outside <= eps / c0) {
            bad.push(format!("ε={eps}: outside mass {outside:e}"));
        }
        if !(total <= 2.0 * (2.0 * PI).sqrt() + 1e-6) {
            bad.push(format!("ε={eps}: total mass {total}"));
        }
        if !(peak <= 1e-9) {
            bad.push(format!("ε={eps}: ||f(t0)|-1| {peak:e}"));
        }
        detail.push(format!("ε={eps}: outside {outside:.3e}, total {total:.6}, peak dev {peak:.1e}"));
    }
    Check::new(bad.is_empty(), format!("{} {bad:?}", detail.join("; ")))
}

/// `exp(-1/(u(1-u)))` on `(0, 1)`.
fn bump_profile(u: f64) -> f64 {
    if u <= 0.0 || u >= 1.0 {
        0.0
    } else {
        (-1.0 / (u * (1.0 - u))).exp()
    }
}

/// `(φ ∗ θ_n)(t)` for the normal density `φ = N(c, s²)` by composite
/// Simpson quadrature over the mollifier support `[0, 1/n]`.
fn smoothed_gaussian(t: f64, c: f64, s: f64, n: f64) -> f64 {
    let m = 4000;
    let width = 1.0 / n;
    let dx = width / m as f64;
    let phi = |x: f64| (-(x - c).powi(2) / (2.0 * s * s)).exp() / (s * (2.0 * PI).sqrt());
    let simpson = |g: &dyn Fn(f64) -> f64| {
        (0..=m)
            .map(|k| {
                let w = if k == 0 || k == m { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
                w * g(k as f64 * dx)
            })
            .sum::<f64>()
            * dx
            / 3.0
    };
    let mass = simpson(&|y| bump_profile(y / width));
    simpson(&|y| phi(t - y) * bump_profile(y / width)) / mass
}

fn kernel_recovery() -> Check {
    let h = 0.001;
    let (c, s) = (1.0, 0.5);
    let space = SpaceSpec::unweighted_l2();
    let t = WienerHopfOperator::kernel(gaussian_kernel(c, s, h).expect("kernel"), space.clone()).as_black_box();
    let grid = Grid::new(0.0, h, 14001).expect("grid");
    let config = RecoveryConfig {
        window: (-4.0, 6.0),
        second_probe_offset: 1.0,
        tolerance: 1e-4,
    };
    let r = recover_kernel(&t, &grid, 100, 4.0, &config).expect("recovery");
    let peak = r.kernel.max_abs();
    let err = r
        .kernel
        .grid()
        .points()
        .zip(r.kernel.values())
        .map(|(x, v)| (v - C64::new(smoothed_gaussian(x, c, s, 100.0), 0.0)).norm())
        .fold(0.0, f64::max);

    let hf = 0.01;
    let tf = WienerHopfOperator::kernel(gaussian_kernel(0.5, 0.5, hf).expect("kernel"), space);
    let f = SampledFunction::from_real_fn(Grid::new(0.0, hf, 1001).expect("grid"), |x| (-(x - 5.0).powi(2)).exp()).expect("probe");
    let ladder = fejer_ladder(&tf, &f, &[4.0, 16.0, 64.0, 256.0, 1024.0, 4096.0], 20.0).expect("ladder");
    let monotone = ladder.windows(2).all(|p| p[1].1 < p[0].1);
    let last = ladder.last().map(|p| p.1).unwrap_or(f64::NAN);

    let ok = err <= 1e-3 && r.mismatch <= 1e-4 && monotone && last <= 1e-3;
    let rungs: Vec<String> = ladder.iter().map(|(n, e)| format!("{n}:{e:.1e}")).collect();
    Check::new(
        ok,
        format!(
            "max |φ_n - φ∗θ_n| {err:.2e} (peak {peak:.3}), two-probe mismatch {:.1e}, Fejér ladder [{}] monotone={monotone}",
            r.mismatch,
            rungs.join(", ")
        ),
    )
}

fn vector_symbol() -> Check {
    let out = run_json(json!({
        "space": { "weight": { "family": "exponential", "beta": 1.0 } },
        "grid": { "span": 20.0, "step": 0.01 },
        "experiment": { "kind": "vector-symbol", "dim": 3, "matrix": { "kind": "random_kernel", "seed": 5 } },
        "seed": 11
    }));
    let bad = failing(&out, &["scalarization_identity", "vector_representation_residual"]);
    let scal = verdicts(&out, "scalarization_identity").first().map(|v| v.measured).unwrap_or(f64::NAN);
    let rep = verdicts(&out, "vector_representation_residual").iter().map(|v| v.measured).fold(0.0, f64::max);
    let pairs = out.details.pointer("/scalarization/pairs").and_then(Value::as_array).map(Vec::len).unwrap_or(0);
    let ok = bad.is_empty() && scal <= 1e-8 && rep <= 1e-5 && pairs == 9;
    Check::new(ok, format!("scalarization max error {scal:e} over {pairs} pairs, representation {rep:e} {bad:?}"))
}

fn five_by_five() -> Check {
    let out = run_json(json!({
        "grid": { "span": 20.0, "step": 0.01 },
        "experiment": { "kind": "vector-symbol", "dim": 5, "matrix": { "kind": "shift", "by": 1.0 }, "weight": { "kind": "five_by_five" } }
    }));
    let bad = failing(&out, &["weight_admissible", "shift_symbol_closed_form"]);
    let err = verdicts(&out, "shift_symbol_closed_form").first().map(|v| v.measured).unwrap_or(f64::NAN);
    let strip = out.details.pointer("/report/strip").cloned().unwrap_or(Value::Null);
    Check::new(bad.is_empty() && err <= 1e-6, format!("closed-form error {err:e} on strip {strip} {bad:?}"))
}

/// `(∫ |f|^p)^{1/p}` by the trapezoid rule.
fn trapezoid_lp(f: &SampledFunction, p: f64) -> f64 {
    let v = f.values();
    let n = v.len();
    let sum: f64 = v.iter().enumerate().map(|(k, z)| if k == 0 || k == n - 1 { 0.5 } else { 1.0 } * z.norm().powf(p)).sum();
    (sum * f.grid().step()).powf(1.0 / p)
}

fn orlicz() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let grid = Grid::new(0.0, 0.01, 1001).expect("grid");
    let mut worst: f64 = 0.0;
    for p in [1.0, 1.5, 2.0, 3.0] {
        for _ in 0..50 {
            let bumps: Vec<(f64, f64, f64, f64)> = (0..3)
                .map(|_| (rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0), rng.random_range(1.0..9.0), rng.random_range(0.2..2.0)))
                .collect();
            let f = SampledFunction::from_fn(grid, |x| {
                bumps.iter().map(|&(re, im, c, s)| C64::new(re, im) * (-((x - c) / s).powi(2)).exp()).sum()
            })
            .expect("function");
            let lux = luxemburg_norm(&f, &OrliczFunction::Power { p }, None).expect("luxemburg");
            let lp = trapezoid_lp(&f, p);
            worst = worst.max((lux - lp).abs() / lp);
        }
    }
    Check::new(worst <= 1e-8, format!("worst relative gap {worst:e} over 200 functions"))
}

fn determinism_and_controls() -> Check {
    let mut bad = vec![];
    let out = run_json(symbol_config("gaussian", "zigzag(1)", 40.0, true));
    bad.extend(failing(&out, &["control_corrupted_symbol_rejected", "control_non_analytic_table_rejected", "analyticity_cauchy_riemann"]));

    let dir = tempfile::tempdir().expect("tempdir");
    let cfg = dir.path().join("config.json");
    std::fs::write(&cfg, serde_json::to_string_pretty(&symbol_config("gaussian", "zigzag(1)", 40.0, true)).unwrap()).unwrap();
    let a = whlab_cli::run(&cfg, Some(&dir.path().join("a")), None).expect("first run");
    let b = whlab_cli::run(&cfg, Some(&dir.path().join("b")), None).expect("second run");
    let ra = std::fs::read(a.out_dir.join("report.json")).unwrap();
    let rb = std::fs::read(b.out_dir.join("report.json")).unwrap();
    if ra != rb {
        bad.push("report.json differs between runs".into());
    }
    let c = whlab_cli::run(&cfg, Some(&dir.path().join("c")), Some(8)).expect("reseeded run");
    let rc = std::fs::read(c.out_dir.join("report.json")).unwrap();
    if rc == ra {
        bad.push("seed override did not change the report".into());
    }
    Check::new(bad.is_empty(), format!("controls rejected, {} identical report bytes {bad:?}", ra.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("representation", representation),
        ("strip bound", strip_bound),
        ("annulus dichotomy", annulus),
        ("spectral radii", radii),
        ("cut-off", cutoff),
        ("kernel recovery", kernel_recovery),
        ("vector symbol", vector_symbol),
        ("5x5 weight", five_by_five),
        ("orlicz", orlicz),
        ("determinism and controls", determinism_and_controls),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let c = check();
        if !c.ok {
            failed += 1;
        }
        println!(
            "criterion {:>2} {name}: {} ({:.1}s) {}",
            i + 1,
            if c.ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            c.detail
        );
    }
    println!("acceptance: {}/10 criteria pass", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
