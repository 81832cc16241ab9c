//! Acceptance run: every criterion prints one PASS/FAIL line. The process
//! exits nonzero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

use maxlab::convergence::convergence_order;
use maxlab::diffeo::{coefficient_transform, fd_jacobian, parse_diffeo, Diffeomorphism};
use maxlab::experiment::{self, ExperimentConfig, RunOutput, RunReport};
use maxlab::fields::{
    parse_coefficient, pointwise_trace_identities, CoefficientField, FieldKind, VectorField,
};
use maxlab::geometry::{ebc_radius_with, weingarten, DomainPatch, EbcSearch, Graph, GraphFunction};
use maxlab::matalg::{lemma31_sweep, random_complex_matrix, unitary_invariance_sweep};
use maxlab::quadrature::QuadratureSpec;
use maxlab::rng::{seeded, trial_rng};
use maxlab::{CMat3, Mat2, Mat3, Vec2, Vec3};
use rand::RngExt;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(format!("{name}.toml"))
}

fn run_config(name: &str) -> RunOutput {
    let cfg = ExperimentConfig::load(&config_path(name)).expect("shipped config parses");
    experiment::run(&cfg).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn failures(r: &RunReport) -> String {
    let bad: Vec<String> = r
        .failed_rows()
        .map(|row| format!("{}={:e}", row.name, row.value))
        .collect();
    bad.join(", ")
}

fn rows_matching<'a>(r: &'a RunReport, prefix: &'a str) -> impl Iterator<Item = f64> + 'a {
    r.rows
        .iter()
        .filter(move |row| row.name.starts_with(prefix))
        .map(|row| row.value)
}

fn lemma31_monte_carlo() -> Verdict {
    let t = Instant::now();
    let sweep = lemma31_sweep(1_000_000, 20_261_018).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let inv = unitary_invariance_sweep(10_000, 20_261_018);
    verdict(
        sweep.min_normalized >= -1e-10 && secs < 60.0 && inv <= 1e-10,
        format!(
            "10^6 trials min normalized residual {:.3e} in {secs:.1} s, unitary deviation {inv:.1e}",
            sweep.min_normalized
        ),
    )
}

fn trace_identities() -> Verdict {
    let mut rng = seeded(2);
    let basket = FieldKind::basket();
    let mut worst = 0.0f64;
    let mut worst_lib = 0.0f64;
    for k in 0..10_000u64 {
        let u: CMat3 = if k % 2 == 0 {
            let mut r = trial_rng(2, k);
            random_complex_matrix(&mut r, 10.0)
        } else {
            let x = Vec3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            basket[(k / 2) as usize % basket.len()].jacobian(&x)
        };
        // u[(i, j)] = ∂ⱼvᵢ
        let grad: f64 = u.iter().map(|z| z.norm_sqr()).sum();
        let rot = (u[(2, 1)] - u[(1, 2)]).norm_sqr()
            + (u[(0, 2)] - u[(2, 0)]).norm_sqr()
            + (u[(1, 0)] - u[(0, 1)]).norm_sqr();
        let uu_star = (u * u.adjoint()).trace();
        let u_ubar = (u * u.conjugate()).trace();
        let e1 = (grad - uu_star.re).abs().max(uu_star.im.abs());
        let e2 = (grad - rot - u_ubar.re).abs().max(u_ubar.im.abs());
        worst = worst.max(e1).max(e2);
        let lib = pointwise_trace_identities(&u);
        worst_lib = worst_lib
            .max((lib[0] - lib[1]).abs())
            .max((lib[2] - lib[3]).abs());
    }
    verdict(
        worst <= 1e-12 && worst_lib <= 1e-12,
        format!("10^4 samples, oracle error {worst:.1e}, library error {worst_lib:.1e}"),
    )
}

/// `sin x₁ cos 2x₂ + 0.3 x₁x₂²`, value only.
#[derive(Debug)]
struct Wavy;

impl Graph for Wavy {
    fn value(&self, x: &Vec2) -> f64 {
        x[0].sin() * (2.0 * x[1]).cos() + 0.3 * x[0] * x[1] * x[1]
    }

    fn lipschitz(&self, _radius: f64) -> f64 {
        f64::INFINITY
    }
}

fn wavy_hessian(x: &Vec2) -> Mat2 {
    let (s, c) = x[0].sin_cos();
    let (s2, c2) = (2.0 * x[1]).sin_cos();
    let off = -2.0 * c * s2 + 0.6 * x[1];
    Mat2::new(-s * c2, off, off, -4.0 * s * c2 + 0.6 * x[0])
}

fn weingarten_exactness() -> Verdict {
    let phi = GraphFunction::parse("paraboloid").unwrap();
    let a = weingarten(&phi, &Vec2::zeros());
    let exact_err = (a - Mat3::from_diagonal(&Vec3::new(1.0, 1.0, 0.0))).amax();
    let x = Vec2::new(0.3, -0.2);
    let oracle = wavy_hessian(&x);
    let hs = [0.08, 0.04, 0.02, 0.01];
    let errs: Vec<f64> = hs
        .iter()
        .map(|&h| {
            let g = GraphFunction::new(Wavy).without_oracles(h);
            (g.hessian(&x) - oracle).norm()
        })
        .collect();
    let order = convergence_order(&hs, &errs).unwrap();
    verdict(
        exact_err <= 1e-12 && order >= 1.9,
        format!("A(0) error {exact_err:.1e}, FD Hessian order {order:.3}"),
    )
}

fn refinement_summary(r: &RunReport) -> String {
    let order = rows_matching(r, "order").fold(f64::INFINITY, f64::min);
    let finest = rows_matching(r, "relative_residual").fold(0.0, f64::max);
    format!("min order {order:.2}, worst finest relative residual {finest:.1e}")
}

fn gaffney_identity() -> Verdict {
    let flat = run_config("gaffney-flat").report;
    let para = run_config("gaffney-paraboloid").report;
    verdict(
        flat.pass && para.pass,
        format!(
            "flat: {}; paraboloid: {} {}",
            refinement_summary(&flat),
            refinement_summary(&para),
            failures(&flat) + &failures(&para)
        ),
    )
}

fn electric_identity() -> Verdict {
    let r = run_config("electric").report;
    let cp = &r.details["critical_point"];
    let samples = cp["samples"].as_u64().unwrap_or(0);
    verdict(
        r.pass && samples >= 10_000,
        format!(
            "{}; K min {:.3e} and closed-form error {:.1e} over {samples} samples {}",
            refinement_summary(&r),
            cp["min_k"].as_f64().unwrap_or(f64::NAN),
            cp["max_closed_form_error"].as_f64().unwrap_or(f64::NAN),
            failures(&r)
        ),
    )
}

/// Simpson on `[0, 1]` with `n` (even) intervals.
fn simpson(f: impl Fn(f64) -> f64, n: usize) -> f64 {
    let h = 1.0 / n as f64;
    let mut s = f(0.0) + f(1.0);
    for i in 1..n {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn bump(r: f64) -> f64 {
    if r >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - r * r)).exp()
    }
}

fn mollification_family() -> Verdict {
    let out = run_config("mollify-abs");
    let r = &out.report;
    let d = &r.details;
    let get = |k: &str| d[k].as_f64().unwrap_or(f64::NAN);
    let (m, k, m1) = (get("shift_m"), get("lipschitz_k"), get("first_abs_moment"));
    // First absolute moment of the normalised bump on the unit disc.
    let m1_oracle = simpson(|r| r * r * bump(r), 20_000) / simpson(|r| r * bump(r), 20_000);
    let lips = rows_matching(r, "lipschitz").fold(0.0, f64::max);
    let mono = rows_matching(r, "monotonicity").fold(f64::INFINITY, f64::min);
    let gaps: Vec<(f64, f64)> = r
        .rows
        .iter()
        .filter(|row| row.name.starts_with("union_gap"))
        .map(|row| {
            let alpha: f64 = row.name.rsplit('=').next().unwrap().parse().unwrap();
            (alpha, row.value)
        })
        .collect();
    let slope =
        gaps.iter().map(|(a, g)| a * g).sum::<f64>() / gaps.iter().map(|(a, _)| a * a).sum::<f64>();
    let rate = m + k * m1;
    let alphas: Vec<f64> = gaps.iter().map(|g| g.0).collect();
    let pass = r.pass
        && alphas == [0.05, 0.1, 0.2, 0.4]
        && (m1 - m1_oracle).abs() <= 1e-8
        && lips <= 1.0 + 1e-6
        && mono >= m - k * m1 - 1e-8
        && (slope / rate - 1.0).abs() <= 0.2;
    verdict(
        pass,
        format!(
            "max Lipschitz {lips:.6}, min dφ/dα {mono:.4} vs floor {:.4}, slope {slope:.4} vs {rate:.4}, m1 {m1:.10} (oracle {m1_oracle:.10}) {}",
            m - k * m1,
            failures(r)
        ),
    )
}

fn ebc_point(name: &str, search: &EbcSearch) -> (maxlab::geometry::EbcResult, Duration) {
    let patch = DomainPatch::new(
        GraphFunction::parse(name).unwrap(),
        1.0,
        2.0,
        QuadratureSpec::default(),
    );
    let t = Instant::now();
    let r = ebc_radius_with(&patch, Vec2::zeros(), search).unwrap();
    (r, t.elapsed())
}

fn external_ball() -> Verdict {
    let search = EbcSearch::new(5.0, 1e-4);
    // Osculating sphere of x₃ = −|x'|²/2 at its vertex: radius 1/κ with κ = 1.
    let oracle = 1.0;
    let (cap, t1) = ebc_point("cap", &search);
    let (wedge, t2) = ebc_point("wedge 1", &search);
    let (flat, t3) = ebc_point("flat", &search);
    let (para, t4) = ebc_point("paraboloid", &search);
    let slowest = [t1, t2, t3, t4].into_iter().max().unwrap().as_secs_f64();
    verdict(
        (cap.radius - oracle).abs() <= 0.02
            && !cap.capped
            && wedge.radius <= 0.01
            && flat.capped
            && slowest < 5.0,
        format!(
            "cap R(0) {:.5}, wedge R(0) {:.1e}, flat capped {}, paraboloid (domain above convex graph) capped {}, slowest point {slowest:.2} s",
            cap.radius, wedge.radius, flat.capped, para.capped
        ),
    )
}

fn transformation_laws() -> Verdict {
    let affine = run_config("pullback-affine").report;
    let cusp = run_config("pullback-cusp").report;
    let pick = |r: &RunReport, n: &str| rows_matching(r, n).next().unwrap_or(f64::NAN);
    verdict(
        affine.pass && cusp.pass,
        format!(
            "affine rot {:.1e} div {:.1e}; cusp (FD second derivatives) rot {:.1e} div {:.1e}; functoriality {:.1e} {}",
            pick(&affine, "rot_law"),
            pick(&affine, "div_law"),
            pick(&cusp, "rot_law"),
            pick(&cusp, "div_law"),
            pick(&affine, "functoriality").max(pick(&cusp, "functoriality")),
            failures(&affine) + &failures(&cusp)
        ),
    )
}

fn coefficient_transform_check() -> Verdict {
    let mut rng = seeded(9);
    let samples: Vec<Vec3> = (0..200)
        .map(|_| {
            let r = rng.random_range(0.1..1.0);
            let t = rng.random_range(0.0..std::f64::consts::TAU);
            Vec3::new(r * t.cos(), r * t.sin(), rng.random_range(0.0..2.0))
        })
        .collect();
    let id: Arc<dyn CoefficientField> = parse_coefficient("identity").unwrap();
    let scaled =
        coefficient_transform(parse_diffeo("scale 2").unwrap(), id.clone(), &samples).unwrap();
    let half_exact = samples
        .iter()
        .all(|x| scaled.value(&(x * 2.0)) == Mat3::identity() * 0.5);

    // s̃(ψ(x)) = Dψ Dψᵀ / |det Dψ| for s = I, with Dψ from differences of ψ.
    let cusp = parse_diffeo("cusp32").unwrap();
    let st = coefficient_transform(cusp.clone(), id, &samples).unwrap();
    let mut oracle_err = 0.0f64;
    let mut min_eig = f64::INFINITY;
    for x in &samples {
        let d = fd_jacobian(cusp.as_ref(), x, 1e-5).transpose();
        let oracle = d * d.transpose() / d.determinant().abs();
        let v = st.value(&cusp.forward(x));
        oracle_err = oracle_err.max((v - oracle).norm() / oracle.norm());
        min_eig = min_eig.min(v.symmetric_eigenvalues().min());
    }
    let cusp_run = run_config("pullback-cusp").report;
    let eq: Vec<f64> = rows_matching(&cusp_run, "norm_equivalence").collect();
    let within = cusp_run
        .rows
        .iter()
        .filter(|r| r.name.starts_with("norm_equivalence") || r.name.starts_with("transformed"))
        .all(|r| r.pass);
    verdict(
        half_exact && oracle_err <= 1e-6 && min_eig > 0.0 && eq.len() == 10 && within,
        format!(
            "2x gives I/2 exactly: {half_exact}; cusp s̃ min eigenvalue {min_eig:.3e}, oracle error {oracle_err:.1e}; {} basket ratios within bound, worst spread {:.3}",
            eq.len(),
            eq.iter().copied().fold(0.0, f64::max)
        ),
    )
}

fn estimate_sweeps() -> Verdict {
    let t = Instant::now();
    let r = run_config("sweep-paraboloid").report;
    let secs = t.elapsed().as_secs_f64();
    let variation = rows_matching(&r, "variation").fold(0.0, f64::max);
    let invalid = rows_matching(&r, "invalid_fraction").fold(0.0, f64::max);
    let cone = run_config("sweep-cone").report;
    let cone_var = rows_matching(&cone, "variation").fold(0.0, f64::max);
    verdict(
        r.pass && secs < 600.0,
        format!(
            "paraboloid family worst variation {variation:.4}, invalid fraction {invalid:.2}, {secs:.1} s (cone family {cone_var:.4}) {}",
            failures(&r)
        ),
    )
}

fn w23_probe() -> Verdict {
    let c32 = run_config("w23-cusp32").report;
    let c12 = run_config("w23-cusp12").report;
    // ∫|D²ψ|³ = 2π·h·(45/16)^{3/2}·∫₀¹ r^{-1/2} dr on the unit-height patch.
    let oracle = 2.0 * std::f64::consts::PI * (45.0f64 / 16.0).powf(1.5) * 2.0;
    let finest = c32.details["probes"]
        .as_array()
        .and_then(|p| p.last())
        .and_then(|p| p["int_d2_cubed"].as_f64())
        .unwrap_or(f64::NAN);
    let growth: Vec<f64> = c12.details["growth_ratios"]
        .as_array()
        .map(|g| g.iter().filter_map(|v| v.as_f64()).collect())
        .unwrap_or_default();
    let change = rows_matching(&c32, "successive_change")
        .next()
        .unwrap_or(f64::NAN);
    verdict(
        c32.pass
            && c12.pass
            && (finest / oracle - 1.0).abs() < 0.05
            && !growth.is_empty()
            && growth.iter().all(|g| *g > 2.0),
        format!(
            "cusp32 last change {change:.2e}, integral {finest:.3} vs {oracle:.3}; cusp12 growth per level {:?}",
            growth.iter().map(|g| (g * 100.0).round() / 100.0).collect::<Vec<_>>()
        ),
    )
}

fn determinism() -> Verdict {
    let names = [
        "lemma31",
        "ebc-cap",
        "ebc-wedge",
        "mollify-abs",
        "gaffney-paraboloid",
        "electric",
        "pullback-cusp",
        "sweep-paraboloid",
        "w23-cusp32",
    ];
    let mut differing = Vec::new();
    for name in names {
        let mut a = run_config(name);
        let mut b = run_config(name);
        for r in [&mut a.report, &mut b.report] {
            r.wall_time_s = 0.0;
            r.timestamp_unix = 0;
        }
        let csv = |o: &RunOutput| {
            let mut buf = Vec::new();
            o.report.write_csv(&mut buf).unwrap();
            buf
        };
        if a.report.to_json().unwrap() != b.report.to_json().unwrap()
            || a.artifacts != b.artifacts
            || csv(&a) != csv(&b)
        {
            differing.push(name);
        }
    }
    verdict(
        differing.is_empty(),
        format!(
            "{} experiments rerun, differing: {differing:?}",
            names.len()
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 12] = [
        ("trace inequality Monte Carlo", lemma31_monte_carlo),
        ("pointwise trace identities", trace_identities),
        ("Weingarten exactness", weingarten_exactness),
        ("Gaffney identity", gaffney_identity),
        ("electric identity", electric_identity),
        ("mollification family", mollification_family),
        ("external ball condition", external_ball),
        ("transformation laws", transformation_laws),
        ("coefficient transform", coefficient_transform_check),
        ("estimate sweeps", estimate_sweeps),
        ("W2,3 probe", w23_probe),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.into_iter().enumerate() {
        let t = Instant::now();
        let v = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            verdict(false, format!("panicked: {msg}"))
        });
        if !v.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {}: {name} [{:.1} s] {}",
            i + 1,
            if v.pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64(),
            v.detail
        );
    }
    println!("acceptance: {} of 12 criteria pass", 12 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
