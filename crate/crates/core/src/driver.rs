//! Configuration ingestion, check orchestration, and report/export emission.
//!
//! A `RunConfig` fully describes a run: ambient metric, immersion, screen
//! recipe, named vector fields, grid, tolerances, and seed. Reports are
//! deterministic: identical (config, seed) yields byte-identical bodies.

use crate::ambient::{AmbientManifold, GrwSpec, VectorField};
use crate::analysis::{self, Verdict};
use crate::expr::ExpressionField;
use crate::frame::{FrameField, FrameRecipe};
use crate::immersion::NullImmersion;
use crate::shape::{FrameVec, ShapeEngine, SplitField};
use crate::tolerances::Tolerances;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DriverError {
    #[error("config error: {0}")]
    Config(String),
    #[error("config error at {path}: {message}")]
    ConfigAt { path: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("config parse error: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Geom(#[from] crate::ambient::GeomError),
    #[error(transparent)]
    Immersion(#[from] crate::immersion::ImmersionError),
    #[error(transparent)]
    Expr(#[from] crate::expr::ParseError),
    #[error("unknown check name: {0}")]
    UnknownCheck(String),
    #[error("unknown export array: {0}")]
    UnknownArray(String),
}

/// Ambient manifold description: either an explicit metric (lower-triangle
/// keys `g00`, `g10`, `g11`, ...) or a GRW warped product.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum AmbientSpec {
    Metric {
        coords: Vec<String>,
        metric: BTreeMap<String, String>,
        #[serde(default)]
        signature_points: Vec<Vec<f64>>,
    },
    Grw {
        interval: [f64; 2],
        warp: String,
        fiber_coords: Vec<String>,
        fiber_metric: BTreeMap<String, String>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ImmersionSpec {
    pub params: Vec<String>,
    pub components: Vec<String>,
    pub domain: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScreenSpec {
    Rigging {
        zeta: Vec<String>,
    },
    /// Frame adapted to the named CC field.
    FromCc {
        field: String,
    },
    Explicit {
        zeta: Vec<String>,
        screen: Vec<Vec<String>>,
    },
    GrwGraph,
    Gauge {
        inner: Box<ScreenSpec>,
        factor: String,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub name: String,
    pub ambient: AmbientSpec,
    pub immersion: ImmersionSpec,
    pub screen: ScreenSpec,
    /// Named vector fields (ambient components). The field named "cc" is the
    /// designated closed conformal field; "angle_ref" overrides the
    /// constant-angle reference (defaults to "cc").
    #[serde(default)]
    pub fields: BTreeMap<String, Vec<String>>,
    pub grid: Vec<usize>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub checks: Vec<String>,
}

pub const ALL_CHECKS: &[&str] = &[
    "validate_frame",
    "shape_invariants",
    "umbilic",
    "constant_angle",
    "gauge_invariance",
    "qc_fit",
    "qc_screen",
    "components",
    "codazzi",
    "nonmetric",
    "eqgrads",
    "cpd",
    "principal",
    "geodesic",
    "flat_screen",
    "cmc",
];

pub fn load_config(path: &std::path::Path, strict: bool) -> Result<RunConfig, DriverError> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text, strict)
}

pub fn parse_config(text: &str, strict: bool) -> Result<RunConfig, DriverError> {
    // The schema itself always rejects unknown keys; `strict` additionally
    // insists that every requested check name is known up front.
    let cfg: RunConfig = serde_json::from_str(text)?;
    validate_config(&cfg, strict)?;
    Ok(cfg)
}

fn validate_config(cfg: &RunConfig, strict: bool) -> Result<(), DriverError> {
    if let AmbientSpec::Metric { coords, metric, .. } = &cfg.ambient {
        let dim = coords.len();
        let mut expected = Vec::new();
        for i in 0..dim {
            for j in 0..=i {
                expected.push(format!("g{i}{j}"));
            }
        }
        for key in metric.keys() {
            if !expected.contains(key) {
                return Err(DriverError::ConfigAt {
                    path: format!("ambient.metric.{key}"),
                    message: format!("unknown metric key (expected one of {expected:?})"),
                });
            }
        }
        for key in &expected {
            if !metric.contains_key(key) {
                return Err(DriverError::ConfigAt {
                    path: format!("ambient.metric.{key}"),
                    message: "missing lower-triangle metric entry".into(),
                });
            }
        }
    }
    if cfg.immersion.params.len() != cfg.immersion.domain.len()
        || cfg.immersion.params.len() != cfg.grid.len()
    {
        return Err(DriverError::ConfigAt {
            path: "immersion".into(),
            message: "params, domain, and grid must have equal lengths".into(),
        });
    }
    if strict {
        for c in &cfg.checks {
            if !ALL_CHECKS.contains(&c.as_str()) {
                return Err(DriverError::UnknownCheck(c.clone()));
            }
        }
    }
    Ok(())
}

pub fn build_ambient(
    spec: &AmbientSpec,
    extra_points: &[Vec<f64>],
) -> Result<AmbientManifold, DriverError> {
    match spec {
        AmbientSpec::Metric {
            coords,
            metric,
            signature_points,
        } => {
            let dim = coords.len();
            let coord_refs: Vec<&str> = coords.iter().map(|s| s.as_str()).collect();
            let mut tri = Vec::new();
            for i in 0..dim {
                for j in 0..=i {
                    let key = format!("g{i}{j}");
                    let src = metric.get(&key).ok_or_else(|| DriverError::ConfigAt {
                        path: format!("ambient.metric.{key}"),
                        message: "missing entry".into(),
                    })?;
                    tri.push(ExpressionField::parse(src, &coord_refs)?);
                }
            }
            let mut pts = signature_points.clone();
            pts.extend(extra_points.iter().cloned());
            Ok(AmbientManifold::new(&coord_refs, tri, pts)?)
        }
        AmbientSpec::Grw {
            interval,
            warp,
            fiber_coords,
            fiber_metric,
        } => {
            let refs: Vec<&str> = fiber_coords.iter().map(|s| s.as_str()).collect();
            let k = refs.len();
            let mut tri = Vec::new();
            for i in 0..k {
                for j in 0..=i {
                    let key = format!("g{i}{j}");
                    let src = fiber_metric.get(&key).ok_or_else(|| DriverError::ConfigAt {
                        path: format!("ambient.fiber_metric.{key}"),
                        message: "missing entry".into(),
                    })?;
                    tri.push(ExpressionField::parse(src, &refs)?);
                }
            }
            for key in fiber_metric.keys() {
                let mut ok = false;
                for i in 0..k {
                    for j in 0..=i {
                        if *key == format!("g{i}{j}") {
                            ok = true;
                        }
                    }
                }
                if !ok {
                    return Err(DriverError::ConfigAt {
                        path: format!("ambient.fiber_metric.{key}"),
                        message: "unknown fiber metric key".into(),
                    });
                }
            }
            let spec = GrwSpec {
                interval: (interval[0], interval[1]),
                warp: ExpressionField::parse(warp, &["t"])?,
                fiber_coords: fiber_coords.clone(),
                fiber_metric: tri,
            };
            Ok(spec.assemble(extra_points.to_vec())?)
        }
    }
}

/// Builds the immersion, running the ambient signature check on a few points
/// of the actual surface.
pub fn build_immersion(cfg: &RunConfig) -> Result<NullImmersion, DriverError> {
    let param_refs: Vec<&str> = cfg.immersion.params.iter().map(|s| s.as_str()).collect();
    let comp_refs: Vec<&str> = cfg.immersion.components.iter().map(|s| s.as_str()).collect();
    let domain: Vec<(f64, f64)> = cfg.immersion.domain.iter().map(|d| (d[0], d[1])).collect();
    // First pass without extra signature points to locate the surface.
    let ambient0 = build_ambient(&cfg.ambient, &[])?;
    let probe = NullImmersion::parse(
        ambient0,
        &param_refs,
        &comp_refs,
        domain.clone(),
        cfg.grid.clone(),
    )?;
    let pts = probe.grid_points();
    let mut sig = Vec::new();
    for idx in [0, pts.len() / 2, pts.len().saturating_sub(1)] {
        if let Some(u) = pts.get(idx) {
            sig.push(probe.ambient_point(u));
        }
    }
    let ambient = build_ambient(&cfg.ambient, &sig)?;
    Ok(NullImmersion::parse(
        ambient,
        &param_refs,
        &comp_refs,
        domain,
        cfg.grid.clone(),
    )?)
}

pub fn build_field(
    imm: &NullImmersion,
    cfg: &RunConfig,
    name: &str,
) -> Result<VectorField, DriverError> {
    let sources = cfg.fields.get(name).ok_or_else(|| DriverError::ConfigAt {
        path: format!("fields.{name}"),
        message: "field not defined".into(),
    })?;
    let refs: Vec<&str> = sources.iter().map(|s| s.as_str()).collect();
    Ok(VectorField::parse(&imm.ambient, &refs)?)
}

pub fn build_recipe(
    imm: &NullImmersion,
    cfg: &RunConfig,
    spec: &ScreenSpec,
) -> Result<FrameRecipe, DriverError> {
    Ok(match spec {
        ScreenSpec::Rigging { zeta } => {
            let refs: Vec<&str> = zeta.iter().map(|s| s.as_str()).collect();
            FrameRecipe::Rigging {
                zeta: VectorField::parse(&imm.ambient, &refs)?,
            }
        }
        ScreenSpec::FromCc { field } => FrameRecipe::FromCc {
            z: build_field(imm, cfg, field)?,
        },
        ScreenSpec::Explicit { zeta, screen } => {
            let zrefs: Vec<&str> = zeta.iter().map(|s| s.as_str()).collect();
            let mut fields = Vec::new();
            for comps in screen {
                let refs: Vec<&str> = comps.iter().map(|s| s.as_str()).collect();
                fields.push(VectorField::parse(&imm.ambient, &refs)?);
            }
            FrameRecipe::Explicit {
                zeta: VectorField::parse(&imm.ambient, &zrefs)?,
                screen: fields,
            }
        }
        ScreenSpec::GrwGraph => FrameRecipe::GrwGraph,
        ScreenSpec::Gauge { inner, factor } => {
            let params = imm.params();
            FrameRecipe::Gauge {
                inner: Box::new(build_recipe(imm, cfg, inner)?),
                factor: ExpressionField::parse(factor, &params)?,
            }
        }
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub verdict: Verdict,
    pub max: f64,
    pub mean: f64,
    pub p95: f64,
    /// Per-grid-point residuals in grid order, when the check is pointwise.
    pub residuals: Vec<f64>,
    pub detail: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub name: String,
    pub version: String,
    pub config_sha256: String,
    pub seed: u64,
    pub checks: Vec<CheckReport>,
}

impl Report {
    pub fn any_failed(&self) -> bool {
        self.checks.iter().any(|c| c.verdict == Verdict::Fail)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }
}

fn stats(residuals: &[f64]) -> (f64, f64, f64) {
    if residuals.is_empty() {
        return (0.0, 0.0, 0.0);
    }
    let max = residuals.iter().cloned().fold(0.0, f64::max);
    let mean = residuals.iter().sum::<f64>() / residuals.len() as f64;
    let mut sorted = residuals.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let idx = ((residuals.len() as f64 * 0.95).ceil() as usize).clamp(1, residuals.len()) - 1;
    (max, mean, sorted[idx])
}

fn check_from_residuals(name: &str, residuals: Vec<f64>, tol: f64) -> CheckReport {
    let (max, mean, p95) = stats(&residuals);
    CheckReport {
        name: name.into(),
        verdict: if max <= tol {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        max,
        mean,
        p95,
        residuals,
        detail: serde_json::Value::Null,
        error: None,
    }
}

fn inapplicable(name: &str, why: &str) -> CheckReport {
    CheckReport {
        name: name.into(),
        verdict: Verdict::Inapplicable,
        max: 0.0,
        mean: 0.0,
        p95: 0.0,
        residuals: vec![],
        detail: serde_json::Value::Null,
        error: Some(why.into()),
    }
}

fn errored(name: &str, err: String) -> CheckReport {
    CheckReport {
        name: name.into(),
        verdict: Verdict::Fail,
        max: f64::NAN,
        mean: f64::NAN,
        p95: f64::NAN,
        residuals: vec![],
        detail: serde_json::Value::Null,
        error: Some(err),
    }
}

/// Runs the requested checks (all configured checks when `check_names` is
/// empty) and assembles the deterministic report.
pub fn run(cfg: &RunConfig, check_names: &[String]) -> Result<Report, DriverError> {
    let imm = build_immersion(cfg)?;
    let recipe = build_recipe(&imm, cfg, &cfg.screen)?;
    let frame = FrameField::new(&imm, recipe.clone());
    let eng = ShapeEngine::new(&frame);
    let grid = imm.grid_points();
    let tols = &cfg.tolerances;

    let names: Vec<String> = if !check_names.is_empty() {
        check_names.to_vec()
    } else if !cfg.checks.is_empty() {
        cfg.checks.clone()
    } else {
        ALL_CHECKS.iter().map(|s| s.to_string()).collect()
    };

    let cc_field = || build_field(&imm, cfg, "cc");
    let angle_field = || {
        if cfg.fields.contains_key("angle_ref") {
            build_field(&imm, cfg, "angle_ref")
        } else {
            build_field(&imm, cfg, "cc")
        }
    };

    let mut checks = Vec::new();
    for name in &names {
        let report = match name.as_str() {
            "validate_frame" => {
                let mut residuals = Vec::with_capacity(grid.len());
                let mut err = None;
                for u in &grid {
                    match frame.validate(u) {
                        Ok(r) => residuals.push(r.max()),
                        Err(e) => {
                            err = Some(e.to_string());
                            break;
                        }
                    }
                }
                match err {
                    Some(e) => errored(name, e),
                    None => check_from_residuals(name, residuals, tols.exact),
                }
            }
            "shape_invariants" => {
                let mut residuals = Vec::with_capacity(grid.len());
                let mut err = None;
                for u in &grid {
                    match eng.shape_operators(u) {
                        Ok(s) => {
                            let n = s.screen_dim();
                            let mut worst: f64 = s.a_n_screen_residual;
                            for i in 0..n {
                                worst = worst.max(s.b_xi[i].abs());
                                for j in 0..n {
                                    worst = worst
                                        .max((s.b[(i, j)] - s.b[(j, i)]).abs())
                                        .max((s.b[(i, j)] - s.a_star[(j, i)]).abs())
                                        .max((s.c[(i, j)] - s.a_n[(j, i)]).abs())
                                        .max((s.a_star[(i, j)] - s.a_star[(j, i)]).abs());
                                }
                            }
                            worst = worst.max(s.b_xi[n].abs());
                            residuals.push(worst);
                        }
                        Err(e) => {
                            err = Some(e.to_string());
                            break;
                        }
                    }
                }
                match err {
                    Some(e) => errored(name, e),
                    None => check_from_residuals(name, residuals, tols.fd),
                }
            }
            "umbilic" => match grid
                .iter()
                .map(|u| eng.shape_operators(u))
                .collect::<Result<Vec<_>, _>>()
            {
                Ok(shapes) => {
                    let rep = analysis::umbilic_classifier(&shapes, tols);
                    CheckReport {
                        name: name.clone(),
                        verdict: Verdict::Pass,
                        max: 0.0,
                        mean: 0.0,
                        p95: 0.0,
                        residuals: vec![],
                        detail: serde_json::to_value(&rep).unwrap(),
                        error: None,
                    }
                }
                Err(e) => errored(name, e.to_string()),
            },
            "constant_angle" => match angle_field() {
                Ok(v) => match analysis::constant_angle_test(&frame, &v, &grid, tols) {
                    Ok(rep) => CheckReport {
                        name: name.clone(),
                        verdict: rep.verdict,
                        max: rep.q_spread,
                        mean: rep.q_mean,
                        p95: rep.q_spread,
                        residuals: rep.samples.iter().map(|s| s.q).collect(),
                        detail: serde_json::json!({
                            "q_mean": rep.q_mean,
                            "q_spread": rep.q_spread,
                            "ratio_spread": rep.ratio_spread,
                            "normalized_spread": rep.normalized_spread,
                            "identity_max": rep.identity_max,
                            "criteria_agree": rep.criteria_agree,
                        }),
                        error: None,
                    },
                    Err(e) => errored(name, e.to_string()),
                },
                Err(e) => inapplicable(name, &e.to_string()),
            },
            "gauge_invariance" => match angle_field() {
                Ok(v) => match analysis::gauge_invariance_check(
                    &imm, &recipe, &v, &grid, 20, cfg.seed, tols,
                ) {
                    Ok(dev) => check_from_residuals(name, vec![dev], tols.exact),
                    Err(e) => errored(name, e.to_string()),
                },
                Err(e) => inapplicable(name, &e.to_string()),
            },
            "qc_fit" => {
                let mut residuals = Vec::new();
                let mut phis = Vec::new();
                let mut psis = Vec::new();
                let mut non_unique = false;
                let mut err = None;
                for u in &grid {
                    match eng.shape_operators(u) {
                        Ok(s) => {
                            let fit = analysis::quasi_conformal_fit(&s, tols);
                            residuals.push(fit.residual);
                            phis.push(fit.phi);
                            psis.push(fit.psi);
                            non_unique |= fit.non_unique;
                        }
                        Err(e) => {
                            err = Some(e.to_string());
                            break;
                        }
                    }
                }
                match err {
                    Some(e) => errored(name, e),
                    None => {
                        let mut rep = check_from_residuals(name, residuals, tols.fd);
                        rep.detail = serde_json::json!({
                            "phi": phis,
                            "psi": psis,
                            "non_unique": non_unique,
                        });
                        rep
                    }
                }
            }
            "qc_screen" => match cc_field() {
                Ok(z) => match analysis::cc_screen_theorem_check(&imm, &z, &grid, tols) {
                    Ok(rep) => CheckReport {
                        name: name.clone(),
                        verdict: rep.verdict,
                        max: rep.qc_max.max(rep.tau_max).max(rep.theta_deriv_max),
                        mean: 0.0,
                        p95: 0.0,
                        residuals: vec![],
                        detail: serde_json::to_value(&rep).unwrap(),
                        error: None,
                    },
                    Err(e) => errored(name, e.to_string()),
                },
                Err(e) => inapplicable(name, &e.to_string()),
            },
            "components" => match cc_field() {
                Ok(z) => {
                    let mut residuals = Vec::new();
                    let mut err = None;
                    for u in &grid {
                        match eng.components_residual(&z, u) {
                            Ok(r) => residuals.push(r.a.max(r.b).max(r.c)),
                            Err(e) => {
                                err = Some(e.to_string());
                                break;
                            }
                        }
                    }
                    match err {
                        Some(e) => errored(name, e),
                        None => check_from_residuals(name, residuals, tols.fd),
                    }
                }
                Err(e) => inapplicable(name, &e.to_string()),
            },
            "codazzi" | "nonmetric" => {
                // Argument triples over the frame basis: all screen triples
                // plus ξ in each slot that tolerates it.
                let n = imm.screen_dim();
                let mut vecs = vec![FrameVec::Xi];
                for i in 0..n {
                    vecs.push(FrameVec::Screen(i));
                }
                let mut residuals = Vec::with_capacity(grid.len());
                let mut err = None;
                for u in &grid {
                    let mut worst: f64 = 0.0;
                    'outer: for &x in &vecs {
                        for &y in &vecs {
                            for &w in &vecs {
                                let r = if name == "codazzi" {
                                    eng.codazzi_residual(u, x, y, w)
                                } else {
                                    eng.nonmetric_residual(u, x, y, w)
                                };
                                match r {
                                    Ok(v) => worst = worst.max(v),
                                    Err(e) => {
                                        err = Some(e.to_string());
                                        break 'outer;
                                    }
                                }
                            }
                        }
                    }
                    if err.is_some() {
                        break;
                    }
                    residuals.push(worst);
                }
                let tol = if name == "codazzi" {
                    10.0 * tols.fd
                } else {
                    tols.fd
                };
                match err {
                    Some(e) => errored(name, e),
                    None => check_from_residuals(name, residuals, tol),
                }
            }
            "eqgrads" => match cc_field() {
                Ok(z) => match analysis::screen_gradient_check(&eng, &z, &grid, tols) {
                    Ok(rep) => CheckReport {
                        name: name.clone(),
                        verdict: rep.verdict,
                        max: rep.residual,
                        mean: rep.residual,
                        p95: rep.residual,
                        residuals: vec![],
                        detail: serde_json::to_value(&rep).unwrap(),
                        error: None,
                    },
                    Err(analysis::AnalysisError::NullField { u }) => {
                        inapplicable(name, &format!("field is null at {u:?}"))
                    }
                    Err(e) => errored(name, e.to_string()),
                },
                Err(e) => inapplicable(name, &e.to_string()),
            },
            "cpd" | "principal" => match cc_field() {
                Ok(z) => match analysis::cpd_test(&eng, &z, &grid, tols) {
                    Ok(rep) => CheckReport {
                        name: name.clone(),
                        verdict: rep.verdict,
                        max: if name == "cpd" {
                            rep.eigen_residual.max(rep.orthogonal_deriv_max)
                        } else {
                            rep.lambda_vs_predicted
                        },
                        mean: rep.lambda_mean,
                        p95: 0.0,
                        residuals: vec![],
                        detail: serde_json::to_value(&rep).unwrap(),
                        error: None,
                    },
                    Err(analysis::AnalysisError::ZstarVanishes { u }) => {
                        inapplicable(name, &format!("screen part vanishes at {u:?}"))
                    }
                    Err(e) => errored(name, e.to_string()),
                },
                Err(e) => inapplicable(name, &e.to_string()),
            },
            "geodesic" => match cc_field() {
                Ok(z) => match analysis::geodesic_direction_check(&eng, &z, &grid, tols) {
                    Ok(rep) => CheckReport {
                        name: name.clone(),
                        verdict: rep.verdict,
                        max: rep.geodesic_residual.max(rep.lambda_identity),
                        mean: 0.0,
                        p95: 0.0,
                        residuals: vec![],
                        detail: serde_json::to_value(&rep).unwrap(),
                        error: None,
                    },
                    Err(analysis::AnalysisError::ZstarVanishes { u }) => {
                        inapplicable(name, &format!("screen part vanishes at {u:?}"))
                    }
                    Err(e) => errored(name, e.to_string()),
                },
                Err(e) => inapplicable(name, &e.to_string()),
            },
            "flat_screen" => match cc_field() {
                Ok(z) => {
                    if imm.screen_dim() != 2 {
                        inapplicable(name, "requires screen dimension 2")
                    } else {
                        match analysis::flat_screen_check(&eng, &z, &grid, tols) {
                            Ok(rep) => CheckReport {
                                name: name.clone(),
                                verdict: rep.verdict,
                                max: rep.residuals.iter().cloned().fold(0.0, f64::max),
                                mean: 0.0,
                                p95: 0.0,
                                residuals: rep.residuals.to_vec(),
                                detail: serde_json::to_value(&rep).unwrap(),
                                error: None,
                            },
                            Err(e) => errored(name, e.to_string()),
                        }
                    }
                }
                Err(e) => inapplicable(name, &e.to_string()),
            },
            "cmc" => {
                if imm.screen_dim() != 2 {
                    inapplicable(name, "requires screen dimension 2")
                } else {
                    match analysis::cmc_cc_check(&eng, &grid, tols) {
                        Ok(rep) => CheckReport {
                            name: name.clone(),
                            verdict: rep.verdict,
                            max: rep
                                .wk_residual
                                .max(rep.cond1_residual)
                                .max(rep.cond2_residual),
                            mean: 0.0,
                            p95: 0.0,
                            residuals: vec![],
                            detail: serde_json::to_value(&rep).unwrap(),
                            error: None,
                        },
                        Err(e) => errored(name, e.to_string()),
                    }
                }
            }
            other => return Err(DriverError::UnknownCheck(other.into())),
        };
        checks.push(report);
    }

    Ok(Report {
        name: cfg.name.clone(),
        version: env!("CARGO_PKG_VERSION").into(),
        config_sha256: config_hash(cfg),
        seed: cfg.seed,
        checks,
    })
}

pub fn config_hash(cfg: &RunConfig) -> String {
    let canonical = serde_json::to_string(cfg).expect("config serialization");
    let mut hasher = Sha256::new();
    hasher.update(canonical.as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes per-grid-point plot data as CSV plus a sidecar `<path>.schema.json`
/// documenting the columns. Residual columns come from pointwise checks in
/// the report.
pub fn export_plotdata(
    cfg: &RunConfig,
    report: &Report,
    path: &std::path::Path,
) -> Result<(), DriverError> {
    let imm = build_immersion(cfg)?;
    let recipe = build_recipe(&imm, cfg, &cfg.screen)?;
    let frame = FrameField::new(&imm, recipe);
    let grid = imm.grid_points();

    let mut header: Vec<String> = Vec::new();
    for p in imm.params() {
        header.push(format!("param_{p}"));
    }
    for c in imm.ambient.coords() {
        header.push(format!("x_{c}"));
    }
    let dim = imm.ambient.dim();
    for k in 0..dim {
        header.push(format!("xi_{k}"));
    }
    for k in 0..dim {
        header.push(format!("n_{k}"));
    }
    for i in 0..imm.screen_dim() {
        for k in 0..dim {
            header.push(format!("screen{i}_{k}"));
        }
    }
    let pointwise: Vec<&CheckReport> = report
        .checks
        .iter()
        .filter(|c| c.residuals.len() == grid.len())
        .collect();
    for c in &pointwise {
        header.push(format!("residual_{}", c.name));
    }

    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for (row, u) in grid.iter().enumerate() {
        let s = frame
            .sample(u)
            .map_err(|e| DriverError::Config(format!("frame sample failed: {e}")))?;
        let mut cells: Vec<String> = Vec::with_capacity(header.len());
        for v in u {
            cells.push(format!("{v:.17e}"));
        }
        for v in &s.x {
            cells.push(format!("{v:.17e}"));
        }
        for v in s.xi.iter() {
            cells.push(format!("{v:.17e}"));
        }
        for v in s.transversal.iter() {
            cells.push(format!("{v:.17e}"));
        }
        for e in &s.screen {
            for v in e.iter() {
                cells.push(format!("{v:.17e}"));
            }
        }
        for c in &pointwise {
            cells.push(format!("{:.17e}", c.residuals[row]));
        }
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    std::fs::write(path, out)?;

    let schema = serde_json::json!({
        "version": 1,
        "columns": header,
        "rows": grid.len(),
        "config_sha256": report.config_sha256,
    });
    let schema_path = path.with_extension("schema.json");
    std::fs::write(&schema_path, serde_json::to_string_pretty(&schema)?)?;
    Ok(())
}

/// Splits a pointwise field for export consumers; kept public for the Python
/// bindings.
pub fn split_at(
    frame: &FrameField,
    z: &VectorField,
    u: &[f64],
) -> Result<SplitField, DriverError> {
    let s = frame
        .sample(u)
        .map_err(|e| DriverError::Config(e.to_string()))?;
    Ok(crate::shape::split_field(&s, &z.eval(&s.x)))
}
