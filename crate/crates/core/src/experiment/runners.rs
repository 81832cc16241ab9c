use std::sync::Arc;

use rand::RngExt;
use rayon::prelude::*;
use serde_json::json;

use super::config::{ExperimentConfig, ExperimentKind};
use super::report::{CheckRow, Comparison, OrderRow};
use super::Artifact;
use crate::convergence::convergence_order;
use crate::diffeo::{
    coefficient_transform, norm_equivalence_probe, pullback_field, rot_transform_residual,
    successive_changes, w23_membership_probe, Compose, Diffeo, DiffeoKind, FdSecond,
    DIFFEO_FD_STEP,
};
use crate::fields::{
    critical_point_probe, electric_identity, fit_i3_constant, gaffney_residual, parse_coefficient,
    parse_field, Coefficient, Field, FieldKind,
};
use crate::geometry::{ebc_radius_with, DomainPatch, EbcSearch, GraphFunction};
use crate::matalg::{lemma31_sweep, unitary_invariance_sweep};
use crate::maxwell::{cell_fields, estimate_sweep, SweepMode, SweepOptions, WeightedL2Spec};
use crate::mollify::{family_checks, union_slope, SmoothingFamily};
use crate::quadrature::QuadratureSpec;
use crate::rng::seeded;
use crate::{diffeo::div_transform_residual, Error, Result, Vec2, Vec3};

/// Residuals below this are treated as exact when fitting orders.
const ROUNDOFF_FLOOR: f64 = 1e-13;

#[derive(Default)]
pub(super) struct Outcome {
    pub rows: Vec<CheckRow>,
    pub orders: Vec<OrderRow>,
    pub details: serde_json::Value,
    pub artifacts: Vec<Artifact>,
}

pub(super) fn dispatch(cfg: &ExperimentConfig) -> Result<Outcome> {
    match cfg.kind {
        ExperimentKind::Lemma31 => lemma31(cfg),
        ExperimentKind::Ebc => ebc(cfg),
        ExperimentKind::Mollify => mollify(cfg),
        ExperimentKind::Gaffney => gaffney(cfg),
        ExperimentKind::Electric => electric(cfg),
        ExperimentKind::Pullback => pullback(cfg),
        ExperimentKind::EstimateSweep => sweep(cfg),
        ExperimentKind::W23probe => w23(cfg),
    }
}

fn patch(cfg: &ExperimentConfig, resolution: usize) -> Result<DomainPatch> {
    let quad =
        QuadratureSpec::new(resolution, cfg.quadrature.order).with_fd_step(cfg.quadrature.fd_step);
    quad.validate()?;
    let p = DomainPatch::new(
        GraphFunction::parse(&cfg.domain.name)?,
        cfg.domain.rho,
        cfg.domain.height(),
        quad,
    );
    p.self_test()?;
    Ok(p)
}

fn coefficient(name: Option<&String>, default: &str) -> Result<Coefficient> {
    parse_coefficient(name.map_or(default, String::as_str))
}

/// Configured basket with labels, or the default generators.
fn basket(cfg: &ExperimentConfig, default: Option<&[&str]>) -> Result<Vec<(String, Field)>> {
    let names: Vec<String> = match (&cfg.fields.basket, default) {
        (Some(b), _) => b.clone(),
        (None, Some(d)) => d.iter().map(|s| s.to_string()).collect(),
        (None, None) => FieldKind::basket().iter().map(|k| k.to_string()).collect(),
    };
    names
        .into_iter()
        .map(|n| parse_field(&n).map(|f| (n, f)))
        .collect()
}

fn csv_artifact(
    file: &str,
    header: &[&str],
    records: impl IntoIterator<Item = Vec<String>>,
) -> Result<Artifact> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in records {
        w.write_record(&r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(Artifact {
        file: file.into(),
        bytes,
    })
}

fn sorted_alphas(cfg: &ExperimentConfig) -> Vec<f64> {
    let mut a = cfg
        .params
        .alphas
        .clone()
        .unwrap_or_else(|| vec![0.4, 0.2, 0.1, 0.05]);
    a.sort_by(f64::total_cmp);
    a
}

/// Order of `err` against `h`, ignoring levels already at roundoff. When
/// fewer than two levels remain the residual is exact and the order is
/// reported as infinite.
fn fitted_order(h: &[f64], err: &[f64]) -> Result<f64> {
    let (hs, es): (Vec<f64>, Vec<f64>) = h
        .iter()
        .zip(err)
        .filter(|(_, e)| **e > ROUNDOFF_FLOOR)
        .map(|(a, b)| (*a, *b))
        .unzip();
    if es.len() < 2 {
        return Ok(f64::INFINITY);
    }
    convergence_order(&hs, &es)
}

fn lemma31(cfg: &ExperimentConfig) -> Result<Outcome> {
    let trials = cfg.params.trials.unwrap_or(1000);
    let sweep = lemma31_sweep(trials, cfg.seed)?;
    let inv = unitary_invariance_sweep(cfg.params.unitary_trials.unwrap_or(1000), cfg.seed);
    Ok(Outcome {
        rows: vec![
            CheckRow::new(
                "min_normalized_residual",
                "matalg::lemma31_sweep",
                sweep.min_normalized,
                Comparison::Ge,
                -cfg.tolerance("residual", 1e-10),
            ),
            CheckRow::new(
                "unitary_invariance",
                "matalg::unitary_invariance_sweep",
                inv,
                Comparison::Le,
                cfg.tolerance("invariance", 1e-10),
            ),
        ],
        details: json!({ "sweep": sweep, "unitary_max_deviation": inv }),
        ..Default::default()
    })
}

fn ebc(cfg: &ExperimentConfig) -> Result<Outcome> {
    let p = &cfg.params;
    let patch = patch(cfg, cfg.resolutions()[0])?;
    let search = EbcSearch::new(p.r_max.unwrap_or(5.0), p.tol.unwrap_or(1e-4));
    let points = p.points.clone().unwrap_or_else(|| vec![[0.0, 0.0]]);
    let min_radius = p.min_radius.unwrap_or(1e-2);
    let mut rows = Vec::new();
    let mut results = Vec::new();
    for pt in &points {
        let r = ebc_radius_with(&patch, Vec2::new(pt[0], pt[1]), &search)?;
        let at = format!("({}, {})", pt[0], pt[1]);
        rows.push(CheckRow::new(
            format!("radius {at}"),
            "geometry::ebc_radius",
            r.radius,
            Comparison::Ge,
            min_radius,
        ));
        if let Some(e) = p.expected_radius {
            rows.push(CheckRow::new(
                format!("radius_error {at}"),
                "geometry::ebc_radius",
                (r.radius - e).abs(),
                Comparison::Le,
                cfg.tolerance("radius", 0.02),
            ));
        }
        if let Some(want) = p.expect_capped {
            let (cmp, bound) = if want {
                (Comparison::Ge, 1.0)
            } else {
                (Comparison::Le, 0.0)
            };
            rows.push(CheckRow::new(
                format!("capped {at}"),
                "geometry::ebc_radius",
                f64::from(u8::from(r.capped)),
                cmp,
                bound,
            ));
        }
        results.push(r);
    }
    let csv = csv_artifact(
        "ebc.csv",
        &["x1", "x2", "x3", "radius", "capped"],
        results.iter().map(|r| {
            vec![
                format!("{:e}", r.point[0]),
                format!("{:e}", r.point[1]),
                format!("{:e}", r.point[2]),
                format!("{:e}", r.radius),
                r.capped.to_string(),
            ]
        }),
    )?;
    Ok(Outcome {
        rows,
        details: json!({ "search": search, "results": results }),
        artifacts: vec![csv],
        ..Default::default()
    })
}

fn mollify(cfg: &ExperimentConfig) -> Result<Outcome> {
    let p = &cfg.params;
    let family = SmoothingFamily::new(
        GraphFunction::parse(&cfg.domain.name)?,
        cfg.domain.rho,
        p.margin.unwrap_or(0.1),
        sorted_alphas(cfg),
    )?;
    let report = family_checks(&family, p.samples.unwrap_or(200), cfg.seed)?;
    let mut rows: Vec<CheckRow> = report
        .rows
        .iter()
        .map(|r| {
            let cmp = match r.check_name.as_str() {
                "lipschitz" | "union_gap" => Comparison::Le,
                "nesting" => Comparison::Gt,
                _ => Comparison::Ge,
            };
            let mut row = CheckRow::new(
                format!("{} alpha={}", r.check_name, r.alpha),
                "mollify::family_checks",
                r.worst_value,
                cmp,
                r.threshold,
            );
            row.pass = r.pass;
            row
        })
        .collect();
    let slope = union_slope(&report);
    let rate = family.union_rate();
    rows.push(CheckRow::new(
        "union_slope_relative_error",
        "mollify::union_slope",
        (slope / rate - 1.0).abs(),
        Comparison::Le,
        cfg.tolerance("union_slope", 0.2),
    ));
    let mut buf = Vec::new();
    report.write_csv(&mut buf)?;
    Ok(Outcome {
        rows,
        details: json!({
            "shift_m": family.shift_m,
            "shift_degenerate": family.shift_degenerate,
            "lipschitz_k": family.lipschitz_k,
            "first_abs_moment": family.kernel.first_abs_moment,
            "growth_floor": family.growth_floor(),
            "union_rate": rate,
            "union_slope": slope,
            "witnesses": report.rows.iter().filter(|r| !r.pass).collect::<Vec<_>>(),
        }),
        artifacts: vec![Artifact {
            file: "family.csv".into(),
            bytes: buf,
        }],
        ..Default::default()
    })
}

fn refinement_rows(
    cfg: &ExperimentConfig,
    label: &str,
    source: &str,
    res: &[usize],
    rel: &[f64],
    out: &mut Outcome,
) -> Result<()> {
    let h: Vec<f64> = res.iter().map(|&r| 1.0 / r as f64).collect();
    out.rows.push(CheckRow::new(
        format!("relative_residual {label}"),
        source,
        *rel.last().expect("nonempty resolutions"),
        Comparison::Le,
        cfg.tolerance("relative_residual", 1e-4),
    ));
    if res.len() >= 2 {
        let order = fitted_order(&h, rel)?;
        out.rows.push(CheckRow::new(
            format!("order {label}"),
            "convergence::convergence_order",
            order,
            Comparison::Ge,
            cfg.tolerance("order", 1.0),
        ));
        out.orders.push(OrderRow {
            name: label.into(),
            h,
            err: rel.to_vec(),
            order,
        });
    }
    Ok(())
}

fn gaffney(cfg: &ExperimentConfig) -> Result<Outcome> {
    let res = cfg.resolutions();
    let patches = res
        .iter()
        .map(|&r| patch(cfg, r))
        .collect::<Result<Vec<_>>>()?;
    let id = parse_coefficient("identity")?;
    let spec = WeightedL2Spec::new(id.clone(), id);
    let mut out = Outcome::default();
    let mut records = Vec::new();
    let mut details = Vec::new();
    for (label, g) in basket(cfg, Some(&["trig", "mixed", "cplx"]))? {
        let (_, w) = cell_fields(&g, SweepMode::Magnetic, &spec, &patches[0])?;
        let reports = patches
            .iter()
            .map(|p| gaffney_residual(w.as_ref(), p))
            .collect::<Result<Vec<_>>>()?;
        let rel: Vec<f64> = reports.iter().map(|r| r.relative()).collect();
        refinement_rows(
            cfg,
            &label,
            "fields::gaffney_residual",
            &res,
            &rel,
            &mut out,
        )?;
        for (r, rep) in res.iter().zip(&reports) {
            records.push(vec![
                label.clone(),
                r.to_string(),
                format!("{:e}", rep.lhs),
                format!("{:e}", rep.grad_sq),
                format!("{:e}", rep.surface),
                format!("{:e}", rep.residual),
                format!("{:e}", rep.relative()),
            ]);
        }
        details.push(json!({ "field": label, "reports": reports }));
    }
    out.artifacts.push(csv_artifact(
        "identity.csv",
        &[
            "field",
            "resolution",
            "lhs",
            "grad_sq",
            "surface",
            "residual",
            "relative",
        ],
        records,
    )?);
    out.details = json!({ "fields": details });
    Ok(out)
}

fn electric(cfg: &ExperimentConfig) -> Result<Outcome> {
    let res = cfg.resolutions();
    let patches = res
        .iter()
        .map(|&r| patch(cfg, r))
        .collect::<Result<Vec<_>>>()?;
    let s = coefficient(cfg.coefficient.name.as_ref(), "aniso")?;
    let spec = WeightedL2Spec::new(s.clone(), s.clone());
    spec.check(&patches[0])?;
    let constant = patches[0]
        .volume_nodes()
        .iter()
        .all(|n| s.derivative(&n.x).iter().all(|d| d.norm() == 0.0));
    let delta = cfg.params.delta.unwrap_or(0.5);
    let mut out = Outcome::default();
    let mut records = Vec::new();
    let mut finest = Vec::new();
    let mut details = Vec::new();
    for (label, g) in basket(cfg, Some(&["trig", "mixed", "cplx"]))? {
        let (u, _) = cell_fields(&g, SweepMode::Electric, &spec, &patches[0])?;
        let reports: Vec<_> = patches
            .iter()
            .map(|p| electric_identity(u.as_ref(), s.as_ref(), p))
            .collect();
        if constant {
            let rel: Vec<f64> = reports.iter().map(|r| r.relative()).collect();
            refinement_rows(
                cfg,
                &label,
                "fields::electric_identity",
                &res,
                &rel,
                &mut out,
            )?;
        } else if res.len() >= 3 {
            // The defect converges to a nonzero limit; fit successive changes.
            let diffs: Vec<f64> = reports
                .windows(2)
                .map(|w| (w[1].defect - w[0].defect).abs() / w[1].lhs.abs().max(1.0))
                .collect();
            let h: Vec<f64> = res[..res.len() - 1]
                .iter()
                .map(|&r| 1.0 / r as f64)
                .collect();
            let order = fitted_order(&h, &diffs)?;
            out.rows.push(CheckRow::new(
                format!("defect_order {label}"),
                "convergence::convergence_order",
                order,
                Comparison::Ge,
                cfg.tolerance("order", 1.0),
            ));
            out.orders.push(OrderRow {
                name: label.clone(),
                h,
                err: diffs,
                order,
            });
        }
        for (r, rep) in res.iter().zip(&reports) {
            records.push(vec![
                label.clone(),
                r.to_string(),
                format!("{:e}", rep.lhs),
                format!("{:e}", rep.grad_sq),
                format!("{:e}", rep.surface_k),
                format!("{:e}", rep.defect),
                format!("{:e}", rep.relative()),
            ]);
        }
        finest.push(*reports.last().expect("nonempty resolutions"));
        details.push(json!({ "field": label, "reports": reports }));
    }
    if !constant {
        out.rows.push(CheckRow::new(
            format!("i3_constant delta={delta}"),
            "fields::fit_i3_constant",
            fit_i3_constant(&finest, delta),
            Comparison::Le,
            cfg.tolerance("c_budget", 100.0),
        ));
    }
    let probe = critical_point_probe(cfg.params.k_samples.unwrap_or(10_000), cfg.seed);
    let k_tol = cfg.tolerance("k_min", 1e-12);
    out.rows.extend([
        CheckRow::new(
            "critical_point_k_min",
            "fields::critical_point_probe",
            probe.min_k,
            Comparison::Ge,
            -k_tol,
        ),
        CheckRow::new(
            "critical_point_k_imag",
            "fields::critical_point_probe",
            probe.max_imag,
            Comparison::Le,
            k_tol,
        ),
        CheckRow::new(
            "critical_point_closed_form_error",
            "fields::critical_point_probe",
            probe.max_closed_form_error,
            Comparison::Le,
            cfg.tolerance("closed_form", 1e-10),
        ),
    ]);
    out.artifacts.push(csv_artifact(
        "identity.csv",
        &[
            "field",
            "resolution",
            "lhs",
            "grad_sq",
            "surface_k",
            "defect",
            "relative",
        ],
        records,
    )?);
    out.details = json!({
        "constant_coefficient": constant,
        "fields": details,
        "critical_point": probe,
    });
    Ok(out)
}

/// Volume points of `patch` with `|x'| ≥ ρ/10`.
fn off_axis_samples(patch: &DomainPatch, n: usize, seed: u64) -> Vec<Vec3> {
    let mut rng = seeded(seed);
    (0..n)
        .map(|_| {
            let r = patch.rho * rng.random_range(0.1..0.95);
            let t = rng.random_range(0.0..std::f64::consts::TAU);
            let xp = Vec2::new(r * t.cos(), r * t.sin());
            let s = rng.random_range(0.02..0.98);
            Vec3::new(xp[0], xp[1], patch.graph.value(&xp) + s * patch.height)
        })
        .collect()
}

fn max_over<T: Sync>(items: &[T], f: impl Fn(&T) -> Result<f64> + Sync + Send) -> Result<f64> {
    let v = items.par_iter().map(f).collect::<Result<Vec<f64>>>()?;
    Ok(v.into_iter().fold(0.0, f64::max))
}

fn pullback(cfg: &ExperimentConfig) -> Result<Outcome> {
    let p = &cfg.params;
    let kind: DiffeoKind = p.diffeo.as_deref().unwrap_or("cusp32").parse()?;
    let exact: Diffeo = Arc::new(kind);
    let psi: Diffeo = if p.force_fd.unwrap_or(false) {
        Arc::new(FdSecond {
            inner: exact,
            h: DIFFEO_FD_STEP,
        })
    } else {
        exact
    };
    let src = patch(cfg, cfg.resolutions()[0])?;
    let s = coefficient(cfg.coefficient.name.as_ref(), "varaniso")?;
    let fields = basket(cfg, None)?;
    let pts = off_axis_samples(&src, p.samples.unwrap_or(200), cfg.seed);
    let pairs: Vec<(usize, usize)> = (0..fields.len())
        .flat_map(|i| (0..pts.len()).map(move |j| (i, j)))
        .collect();

    let rot = max_over(&pairs, |&(i, j)| {
        rot_transform_residual(&psi, &fields[i].1, &pts[j])
    })?;
    let div = max_over(&pairs, |&(i, j)| {
        div_transform_residual(&psi, &s, &fields[i].1, &pts[j])
    })?;

    let second: Diffeo = Arc::new(DiffeoKind::Poly { a: 0.5, b: 0.3 });
    let comp: Diffeo = Arc::new(Compose {
        outer: psi.clone(),
        inner: second.clone(),
    });
    let near_axis = |y: Vec3| y[0].hypot(y[1]) < 0.05 * src.rho;
    let func = max_over(&pairs, |&(i, j)| {
        let x = pts[j];
        if near_axis(comp.forward(&x)) || near_axis(second.forward(&x)) {
            return Ok(0.0);
        }
        let v = &fields[i].1;
        let lhs = pullback_field(comp.clone(), v.clone());
        let rhs = pullback_field(second.clone(), pullback_field(psi.clone(), v.clone()));
        Ok((lhs.value(&x) - rhs.value(&x)).norm())
    })?;

    let min_eig = match coefficient_transform(psi.clone(), s.clone(), &pts) {
        Ok(t) => t.beta.0,
        Err(Error::Degenerate(_)) => 0.0,
        Err(e) => return Err(e),
    };
    let mut rows = vec![
        CheckRow::new(
            "rot_law_residual",
            "diffeo::rot_transform_residual",
            rot,
            Comparison::Le,
            cfg.tolerance("rot", 1e-6),
        ),
        CheckRow::new(
            "div_law_residual",
            "diffeo::div_transform_residual",
            div,
            Comparison::Le,
            cfg.tolerance("div", 1e-6),
        ),
        CheckRow::new(
            "functoriality",
            "diffeo::pullback_field",
            func,
            Comparison::Le,
            cfg.tolerance("functoriality", 1e-10),
        ),
        CheckRow::new(
            "transformed_coefficient_min_eigenvalue",
            "diffeo::coefficient_transform",
            min_eig,
            Comparison::Gt,
            0.0,
        ),
    ];

    let mut equivalence = Vec::new();
    if let Some(dst_name) = &p.dst_domain {
        let dst = DomainPatch::new(
            GraphFunction::parse(dst_name)?,
            p.dst_rho.unwrap_or(cfg.domain.rho),
            p.dst_height.unwrap_or(cfg.domain.height()),
            src.quad,
        );
        dst.validate()?;
        for (label, v) in &fields {
            let r = norm_equivalence_probe(&psi, &s, v, &src, &dst)?;
            let spread = [r.ratio_f, r.ratio_sob]
                .iter()
                .map(|q| q.max(1.0 / q))
                .fold(0.0, f64::max);
            rows.push(CheckRow::new(
                format!("norm_equivalence {label}"),
                "diffeo::norm_equivalence_probe",
                spread,
                Comparison::Le,
                r.bound_c,
            ));
            equivalence.push(json!({ "field": label, "probe": r }));
        }
    }
    Ok(Outcome {
        rows,
        details: json!({
            "diffeo": psi.name(),
            "samples": pts.len(),
            "norm_equivalence": equivalence,
        }),
        ..Default::default()
    })
}

fn sweep(cfg: &ExperimentConfig) -> Result<Outcome> {
    let p = &cfg.params;
    let res = cfg.resolutions();
    let base = patch(cfg, *res.last().expect("nonempty resolutions"))?;
    let family = SmoothingFamily::new(
        base.graph.clone(),
        cfg.domain.rho,
        p.margin.unwrap_or(0.1),
        sorted_alphas(cfg),
    )?;
    let c = &cfg.coefficient;
    let eps = coefficient(c.epsilon.as_ref().or(c.name.as_ref()), "varaniso")?;
    let mu = coefficient(c.mu.as_ref().or(c.name.as_ref()), "varaniso")?;
    let spec = WeightedL2Spec::new(eps, mu);
    let basket: Vec<Field> = basket(cfg, None)?.into_iter().map(|(_, f)| f).collect();
    let opts = SweepOptions {
        height: cfg.domain.height(),
        ..SweepOptions::new(cfg.domain.rho, base.quad)
    };
    let modes: Vec<SweepMode> = match &p.modes {
        Some(m) => m.iter().map(|s| s.parse()).collect::<Result<_>>()?,
        None => vec![
            SweepMode::Magnetic,
            SweepMode::Electric,
            SweepMode::Extended,
        ],
    };
    let mut out = Outcome::default();
    let mut details = serde_json::Map::new();
    for mode in modes {
        let report = estimate_sweep(&family, &spec, &basket, mode, &opts)?;
        let name = mode.to_string();
        out.rows.push(CheckRow::new(
            format!("variation {name}"),
            "maxwell::estimate_sweep",
            report.variation(),
            Comparison::Lt,
            cfg.tolerance("variation", 2.0),
        ));
        out.rows.push(CheckRow::new(
            format!("invalid_fraction {name}"),
            "maxwell::estimate_sweep",
            report.invalid_fraction(),
            Comparison::Le,
            cfg.tolerance("invalid_fraction", 0.1),
        ));
        let mut buf = Vec::new();
        report.write_csv(&mut buf)?;
        out.artifacts.push(Artifact {
            file: format!("sweep-{name}.csv"),
            bytes: buf,
        });
        details.insert(name, report.summary_json());
    }
    out.details = json!({
        "shift_m": family.shift_m,
        "lipschitz_k": family.lipschitz_k,
        "modes": details,
    });
    Ok(out)
}

fn w23(cfg: &ExperimentConfig) -> Result<Outcome> {
    let kind: DiffeoKind = cfg.params.diffeo.as_deref().unwrap_or("cusp32").parse()?;
    let patch = patch(cfg, cfg.resolutions()[0])?;
    let levels = cfg
        .params
        .levels
        .clone()
        .unwrap_or_else(|| vec![6, 8, 10, 12]);
    let probes: Vec<_> = levels
        .iter()
        .map(|&l| w23_membership_probe(&kind, &patch, l))
        .collect();
    let changes = successive_changes(&probes);
    let growth: Vec<f64> = probes
        .windows(2)
        .map(|w| w[1].int_d2_cubed / w[0].int_d2_cubed)
        .collect();
    let last = *levels.last().expect("validated levels");
    let rows = vec![CheckRow::new(
        format!("successive_change level={last}"),
        "diffeo::w23_membership_probe",
        *changes.last().expect("at least two levels"),
        Comparison::Le,
        cfg.tolerance("convergence", 0.05),
    )];
    let csv = csv_artifact(
        "w23.csv",
        &["level", "sup_j", "int_d2_cubed"],
        probes.iter().map(|p| {
            vec![
                p.level.to_string(),
                format!("{:e}", p.sup_j),
                format!("{:e}", p.int_d2_cubed),
            ]
        }),
    )?;
    Ok(Outcome {
        rows,
        details: json!({
            "diffeo": kind.to_string(),
            "probes": probes,
            "successive_changes": changes,
            "growth_ratios": growth,
        }),
        artifacts: vec![csv],
        ..Default::default()
    })
}
