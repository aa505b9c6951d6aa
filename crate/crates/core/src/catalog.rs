//! Built-in worked examples: named surfaces with frames, reference fields,
//! expected outcomes, and grids. Every entry is expressed as a `RunConfig`
//! so it can be dumped, edited, and re-ingested through the same schema the
//! CLI accepts.

use crate::analysis::Verdict;
use crate::driver::{AmbientSpec, ImmersionSpec, RunConfig, ScreenSpec};
use crate::expr::ExpressionField;
use serde::Serialize;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("unknown catalog entry: {0}")]
    UnknownEntry(String),
    #[error("unknown warp profile: {0}")]
    UnknownWarp(String),
    #[error(transparent)]
    Expr(#[from] crate::expr::ParseError),
}

/// Expected verdict of one check under one named screen.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Expectation {
    pub screen: String,
    pub check: String,
    pub verdict: Verdict,
}

/// An alternative screen for an entry, with the checks that make sense
/// under it.
#[derive(Debug, Clone, Serialize)]
pub struct ScreenVariant {
    pub name: String,
    pub spec: ScreenSpec,
    pub checks: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CatalogEntry {
    pub name: String,
    pub description: String,
    /// Configuration under the canonical screen.
    pub base: RunConfig,
    pub variants: Vec<ScreenVariant>,
    pub notes: Vec<String>,
    pub expectations: Vec<Expectation>,
}

impl CatalogEntry {
    pub fn screen_names(&self) -> Vec<&str> {
        let mut out = vec!["canonical"];
        out.extend(self.variants.iter().map(|v| v.name.as_str()));
        out
    }

    /// Config for the named screen ("canonical" or a variant name).
    pub fn config_for(&self, screen: &str) -> Option<RunConfig> {
        if screen == "canonical" {
            return Some(self.base.clone());
        }
        let v = self.variants.iter().find(|v| v.name == screen)?;
        let mut cfg = self.base.clone();
        cfg.name = format!("{}#{}", self.name, v.name);
        cfg.screen = v.spec.clone();
        cfg.checks = v.checks.clone();
        Some(cfg)
    }
}

pub const ENTRY_NAMES: &[&str] = &[
    "minkowski_null_hyperplane",
    "minkowski_null_hyperplane_4d",
    "light_cone_2d",
    "grw_null_graph_flat",
    "grw_transnormal_graph_cosh",
    "grw_transnormal_graph_ads",
    "de_sitter_cmc",
];

pub fn names() -> Vec<&'static str> {
    ENTRY_NAMES.to_vec()
}

fn metric_map(entries: &[(&str, &str)]) -> BTreeMap<String, String> {
    entries
        .iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

fn minkowski_metric(dim: usize) -> BTreeMap<String, String> {
    let mut m = BTreeMap::new();
    for i in 0..dim {
        for j in 0..=i {
            let v = if i != j {
                "0"
            } else if i == 0 {
                "-1"
            } else {
                "1"
            };
            m.insert(format!("g{i}{j}"), v.to_string());
        }
    }
    m
}

fn expect(screen: &str, check: &str, verdict: Verdict) -> Expectation {
    Expectation {
        screen: screen.into(),
        check: check.into(),
        verdict,
    }
}

fn pass_all(screen: &str, checks: &[&str]) -> Vec<Expectation> {
    checks
        .iter()
        .map(|c| expect(screen, c, Verdict::Pass))
        .collect()
}

/// Components of the light-cone screen section with constant transversal
/// tilt. The parameter `rho` is the tilt magnitude: g(N, d/dt) = -(1+rho^2)/2,
/// and rho -> 0 recovers the rigging screen direction after normalization.
pub fn cone_tilted_screen(rho: f64) -> Vec<String> {
    vec![
        "1".into(),
        format!("(x*{rho} - y)/({rho}*sqrt(x^2 + y^2))"),
        format!("(x + y*{rho})/({rho}*sqrt(x^2 + y^2))"),
    ]
}

/// Transnormal data for a warp profile: a fiber metric and a function f with
/// |grad f| = warp(f), whose null graph t = f sits in the GRW product.
#[derive(Debug, Clone, Serialize)]
pub struct TransnormalDefaults {
    pub warp: String,
    pub interval: [f64; 2],
    pub fiber_coords: Vec<String>,
    pub fiber_metric: BTreeMap<String, String>,
    pub f: String,
    pub f_domain: Vec<[f64; 2]>,
    pub grid: Vec<usize>,
}

/// Profiles keyed by warp: "flat" (warp 1, planar level sets), "cosh"
/// (de Sitter ambient, tube level sets in the round fiber), "cos" (anti-de
/// Sitter ambient, tube level sets in the hyperbolic fiber).
pub fn transnormal_defaults(profile: &str) -> Result<TransnormalDefaults, CatalogError> {
    match profile {
        "flat" => Ok(TransnormalDefaults {
            warp: "1".into(),
            interval: [-3.0, 3.0],
            fiber_coords: strings(&["x", "y"]),
            fiber_metric: metric_map(&[("g00", "1"), ("g10", "0"), ("g11", "1")]),
            f: "x".into(),
            f_domain: vec![[-2.0, 2.0], [-2.0, 2.0]],
            grid: vec![16, 16],
        }),
        "cosh" => Ok(TransnormalDefaults {
            warp: "cosh(t)".into(),
            interval: [-3.0, 3.0],
            fiber_coords: strings(&["r", "p", "q"]),
            // Round 3-sphere in tube coordinates about a great circle; r is
            // the distance from the circle, so |grad r| = 1.
            fiber_metric: metric_map(&[
                ("g00", "1"),
                ("g10", "0"),
                ("g11", "cos(r)^2"),
                ("g20", "0"),
                ("g21", "0"),
                ("g22", "sin(r)^2"),
            ]),
            // asinh(tan r): f' = sec r = cosh(f).
            f: "log(tan(r) + sqrt(tan(r)^2 + 1))".into(),
            f_domain: vec![[0.3, 1.2], [0.1, 3.0], [0.1, 3.0]],
            grid: vec![6, 6, 6],
        }),
        "cos" => Ok(TransnormalDefaults {
            warp: "cos(t)".into(),
            interval: [-std::f64::consts::FRAC_PI_2 + 0.1, std::f64::consts::FRAC_PI_2 - 0.1],
            fiber_coords: strings(&["r", "p", "q"]),
            // Hyperbolic 3-space in Fermi coordinates about a geodesic.
            fiber_metric: metric_map(&[
                ("g00", "1"),
                ("g10", "0"),
                ("g11", "cosh(r)^2"),
                ("g20", "0"),
                ("g21", "0"),
                ("g22", "sinh(r)^2"),
            ]),
            // asin(tanh r): f' = sech r = cos(f).
            f: "asin(tanh(r))".into(),
            f_domain: vec![[0.3, 1.2], [0.1, 3.0], [0.1, 3.0]],
            grid: vec![6, 6, 6],
        }),
        other => Err(CatalogError::UnknownWarp(other.into())),
    }
}

/// Max over a sample grid of | |grad f| - warp(f) | for the profile's fiber
/// metric; zero (to round-off) certifies the transnormal identity.
pub fn transnormal_residual(
    td: &TransnormalDefaults,
    samples_per_axis: usize,
) -> Result<f64, CatalogError> {
    let refs: Vec<&str> = td.fiber_coords.iter().map(|s| s.as_str()).collect();
    let k = refs.len();
    let mut tri = Vec::new();
    for i in 0..k {
        for j in 0..=i {
            let src = &td.fiber_metric[&format!("g{i}{j}")];
            tri.push(ExpressionField::parse(src, &refs)?);
        }
    }
    let f = ExpressionField::parse(&td.f, &refs)?;
    let warp = ExpressionField::parse(&td.warp, &["t"])?;

    let mut worst: f64 = 0.0;
    let mut point = vec![0.0; k];
    let mut index = vec![0usize; k];
    loop {
        for (a, idx) in index.iter().enumerate() {
            let (lo, hi) = (td.f_domain[a][0], td.f_domain[a][1]);
            let s = if samples_per_axis > 1 {
                *idx as f64 / (samples_per_axis - 1) as f64
            } else {
                0.5
            };
            point[a] = lo + s * (hi - lo);
        }
        let mut g = nalgebra::DMatrix::zeros(k, k);
        let mut t = 0;
        for i in 0..k {
            for j in 0..=i {
                let v = tri[t].eval(&point);
                g[(i, j)] = v;
                g[(j, i)] = v;
                t += 1;
            }
        }
        let grad = nalgebra::DVector::from_vec(f.gradient(&point));
        let ginv = g.try_inverse().expect("fiber metric invertible");
        let norm = (&grad.transpose() * &ginv * &grad)[(0, 0)].sqrt();
        let rho_f = warp.eval(&[f.eval(&point)]);
        worst = worst.max((norm - rho_f).abs());

        let mut a = 0;
        loop {
            if a == k {
                return Ok(worst);
            }
            index[a] += 1;
            if index[a] < samples_per_axis {
                break;
            }
            index[a] = 0;
            a += 1;
        }
    }
}

fn grw_graph_entry(
    name: &str,
    description: &str,
    profile: &str,
    checks: &[&str],
    expectations: Vec<Expectation>,
    notes: Vec<String>,
) -> Result<CatalogEntry, CatalogError> {
    let td = transnormal_defaults(profile)?;
    let mut components = vec![td.f.clone()];
    components.extend(td.fiber_coords.iter().cloned());
    let dim = td.fiber_coords.len() + 1;
    let mut cc = vec![td.warp.clone()];
    cc.extend(std::iter::repeat("0".to_string()).take(dim - 1));
    let mut fields = BTreeMap::new();
    fields.insert("cc".to_string(), cc);
    Ok(CatalogEntry {
        name: name.into(),
        description: description.into(),
        base: RunConfig {
            name: name.into(),
            ambient: AmbientSpec::Grw {
                interval: td.interval,
                warp: td.warp.clone(),
                fiber_coords: td.fiber_coords.clone(),
                fiber_metric: td.fiber_metric.clone(),
            },
            immersion: ImmersionSpec {
                params: td.fiber_coords.clone(),
                components,
                domain: td.f_domain.clone(),
            },
            screen: ScreenSpec::GrwGraph,
            fields,
            grid: td.grid.clone(),
            tolerances: Default::default(),
            seed: 0,
            checks: strings(checks),
        },
        variants: vec![],
        notes,
        expectations,
    })
}

pub fn entry(name: &str) -> Result<CatalogEntry, CatalogError> {
    match name {
        "minkowski_null_hyperplane" => {
            let checks = [
                "validate_frame",
                "shape_invariants",
                "umbilic",
                "constant_angle",
                "gauge_invariance",
                "components",
                "codazzi",
                "nonmetric",
                "eqgrads",
            ];
            let mut fields = BTreeMap::new();
            fields.insert("cc".to_string(), strings(&["1", "0", "0"]));
            Ok(CatalogEntry {
                name: name.into(),
                description: "Null hyperplane t = x in 3d Minkowski space; totally geodesic, \
                              vanishing light-cone curvature terms."
                    .into(),
                base: RunConfig {
                    name: name.into(),
                    ambient: AmbientSpec::Metric {
                        coords: strings(&["t", "x", "y"]),
                        metric: minkowski_metric(3),
                        signature_points: vec![],
                    },
                    immersion: ImmersionSpec {
                        params: strings(&["u", "v"]),
                        components: strings(&["u", "u", "v"]),
                        domain: vec![[-2.0, 2.0], [-2.0, 2.0]],
                    },
                    screen: ScreenSpec::Rigging {
                        zeta: strings(&["1", "0", "0"]),
                    },
                    fields,
                    grid: vec![16, 16],
                    tolerances: Default::default(),
                    seed: 0,
                    checks: strings(&checks),
                },
                variants: vec![],
                notes: vec![
                    "The ambient curvature vanishes identically, so the Codazzi residual is \
                     pure finite-difference noise and stays at round-off level."
                        .into(),
                ],
                expectations: pass_all("canonical", &checks),
            })
        }
        "minkowski_null_hyperplane_4d" => {
            let canonical_checks = [
                "validate_frame",
                "shape_invariants",
                "umbilic",
                "constant_angle",
                "components",
                "codazzi",
            ];
            let tilted_checks = [
                "validate_frame",
                "shape_invariants",
                "constant_angle",
                "components",
                "cpd",
                "principal",
                "geodesic",
                "flat_screen",
            ];
            let mut fields = BTreeMap::new();
            fields.insert("cc".to_string(), strings(&["1", "0", "0", "0"]));
            let mut expectations = pass_all("canonical", &canonical_checks);
            expectations.extend(pass_all("tilted", &tilted_checks));
            Ok(CatalogEntry {
                name: name.into(),
                description: "Null hyperplane t = x in 4d Minkowski space. The tilted variant \
                              uses a constant screen not containing the spatial slice, so the \
                              parallel field d/dt acquires a nonzero screen part while every \
                              shape operator still vanishes."
                    .into(),
                base: RunConfig {
                    name: name.into(),
                    ambient: AmbientSpec::Metric {
                        coords: strings(&["t", "x", "y", "z"]),
                        metric: minkowski_metric(4),
                        signature_points: vec![],
                    },
                    immersion: ImmersionSpec {
                        params: strings(&["u", "v", "w"]),
                        components: strings(&["u", "u", "v", "w"]),
                        domain: vec![[-2.0, 2.0], [-2.0, 2.0], [-2.0, 2.0]],
                    },
                    screen: ScreenSpec::Rigging {
                        zeta: strings(&["1", "0", "0", "0"]),
                    },
                    fields,
                    // Everything is constant on this entry; a coarse grid
                    // keeps the triple-loop curvature checks cheap.
                    grid: vec![4, 4, 4],
                    tolerances: Default::default(),
                    seed: 0,
                    checks: strings(&canonical_checks),
                },
                variants: vec![ScreenVariant {
                    name: "tilted".into(),
                    spec: ScreenSpec::Explicit {
                        zeta: strings(&["1", "0", "0", "0"]),
                        screen: vec![
                            strings(&["0.6", "0.6", "1", "0"]),
                            strings(&["0.3", "0.3", "0", "1"]),
                        ],
                    },
                    checks: strings(&tilted_checks),
                }],
                notes: vec![
                    "Tilted screen transversal satisfies g(N, d/dt) = -0.725 < -1/2; the \
                     screen trace of the tilt operator vanishes, which is exactly the \
                     flat-screen hypothesis."
                        .into(),
                ],
                expectations,
            })
        }
        "light_cone_2d" => {
            let canonical_checks = [
                "validate_frame",
                "shape_invariants",
                "umbilic",
                "constant_angle",
                "gauge_invariance",
                "components",
                "codazzi",
                "nonmetric",
                "qc_screen",
                "eqgrads",
            ];
            let tilted_checks = [
                "validate_frame",
                "constant_angle",
                "components",
                "cpd",
                "principal",
                "geodesic",
            ];
            let mut fields = BTreeMap::new();
            fields.insert("cc".to_string(), strings(&["1", "0", "0"]));
            let mut expectations = pass_all("canonical", &canonical_checks);
            expectations.extend(pass_all("tilted", &tilted_checks));
            Ok(CatalogEntry {
                name: name.into(),
                description: "Future light cone in 3d Minkowski space in polar parameters \
                              (r, th) -> (r, r cos th, r sin th); totally umbilical with \
                              principal curvature 1/r."
                    .into(),
                base: RunConfig {
                    name: name.into(),
                    ambient: AmbientSpec::Metric {
                        coords: strings(&["t", "x", "y"]),
                        metric: minkowski_metric(3),
                        signature_points: vec![],
                    },
                    immersion: ImmersionSpec {
                        params: strings(&["r", "th"]),
                        components: strings(&["r", "r*cos(th)", "r*sin(th)"]),
                        domain: vec![[0.5, 3.0], [0.1, 5.9]],
                    },
                    screen: ScreenSpec::Rigging {
                        zeta: strings(&["1", "0", "0"]),
                    },
                    fields,
                    grid: vec![16, 16],
                    tolerances: Default::default(),
                    seed: 0,
                    checks: strings(&canonical_checks),
                },
                variants: vec![ScreenVariant {
                    name: "tilted".into(),
                    spec: ScreenSpec::Explicit {
                        zeta: strings(&["1", "0", "0"]),
                        screen: vec![cone_tilted_screen(1.0)],
                    },
                    checks: strings(&tilted_checks),
                }],
                notes: vec![
                    "The tilted screen keeps g(N, d/dt) constant (= -1 at tilt 1), so the \
                     cone has constant angle with respect to d/dt under it while the \
                     reference field gains a nonzero screen part."
                        .into(),
                    "As the tilt parameter goes to 0 the normalized tilted section converges \
                     to the canonical rigging screen direction."
                        .into(),
                ],
                expectations,
            })
        }
        "grw_null_graph_flat" => grw_graph_entry(
            name,
            "Null graph t = x over the flat fiber plane (warp 1); a null hyperplane seen \
             through the graph frame, totally geodesic.",
            "flat",
            &[
                "validate_frame",
                "shape_invariants",
                "umbilic",
                "constant_angle",
                "components",
            ],
            pass_all(
                "canonical",
                &[
                    "validate_frame",
                    "shape_invariants",
                    "umbilic",
                    "constant_angle",
                    "components",
                ],
            ),
            vec![],
        ),
        "grw_transnormal_graph_cosh" => grw_graph_entry(
            name,
            "Null graph of the transnormal function asinh(tan r) over tube coordinates on \
             the round 3-sphere fiber, warp cosh(t) (de Sitter ambient). Level sets are \
             non-umbilic tori, so the screen shape operator has distinct eigenvalues and \
             the quasi-conformal fit is unique.",
            "cosh",
            &[
                "validate_frame",
                "shape_invariants",
                "constant_angle",
                "qc_fit",
                "qc_screen",
                "components",
            ],
            pass_all(
                "canonical",
                &[
                    "validate_frame",
                    "shape_invariants",
                    "constant_angle",
                    "qc_fit",
                    "qc_screen",
                    "components",
                ],
            ),
            vec![
                "Expected quasi-conformal pair: phi = 1, psi = sqrt(2) tanh(t) along the \
                 graph."
                    .into(),
            ],
        ),
        "grw_transnormal_graph_ads" => grw_graph_entry(
            name,
            "Null graph of the transnormal function asin(tanh r) over Fermi coordinates on \
             the hyperbolic 3-space fiber, warp cos(t) (anti-de Sitter ambient), time \
             interval clamped inside (-pi/2, pi/2).",
            "cos",
            &[
                "validate_frame",
                "shape_invariants",
                "constant_angle",
                "qc_fit",
                "components",
            ],
            pass_all(
                "canonical",
                &[
                    "validate_frame",
                    "shape_invariants",
                    "constant_angle",
                    "qc_fit",
                    "components",
                ],
            ),
            vec![
                "Expected quasi-conformal pair: phi = 1, psi = -sqrt(2) tan(t) along the \
                 graph."
                    .into(),
            ],
        ),
        "de_sitter_cmc" => {
            let checks = [
                "validate_frame",
                "shape_invariants",
                "umbilic",
                "cmc",
                "codazzi",
                "components",
            ];
            let mut fields = BTreeMap::new();
            fields.insert("cc".to_string(), strings(&["cosh(t)", "0", "0", "0"]));
            Ok(CatalogEntry {
                name: name.into(),
                description: "Totally geodesic (hence null-CMC) hypersurface chi = \
                              acos(tanh t) in the global de Sitter chart \
                              -dt^2 + cosh(t)^2 (dchi^2 + sin(chi)^2 dOmega^2)."
                    .into(),
                base: RunConfig {
                    name: name.into(),
                    ambient: AmbientSpec::Metric {
                        coords: strings(&["t", "chi", "th", "ph"]),
                        metric: metric_map(&[
                            ("g00", "-1"),
                            ("g10", "0"),
                            ("g11", "cosh(t)^2"),
                            ("g20", "0"),
                            ("g21", "0"),
                            ("g22", "cosh(t)^2*sin(chi)^2"),
                            ("g30", "0"),
                            ("g31", "0"),
                            ("g32", "0"),
                            ("g33", "cosh(t)^2*sin(chi)^2*sin(th)^2"),
                        ]),
                        signature_points: vec![],
                    },
                    immersion: ImmersionSpec {
                        params: strings(&["t", "th", "ph"]),
                        components: strings(&["t", "acos(tanh(t))", "th", "ph"]),
                        domain: vec![[-1.0, 1.0], [0.4, 2.7], [0.1, 3.0]],
                    },
                    screen: ScreenSpec::Rigging {
                        zeta: strings(&["1", "0", "0", "0"]),
                    },
                    fields,
                    // Nested derivative checks make each point expensive;
                    // the surface is homogeneous enough that a coarse grid
                    // already exercises every term.
                    grid: vec![4, 4, 3],
                    tolerances: Default::default(),
                    seed: 0,
                    checks: strings(&checks),
                },
                variants: vec![],
                notes: vec![
                    "Null mean curvature vanishes identically; the CMC checker's \
                     curvature-dependent conditions are then vacuous and only the \
                     derivative bound on the principal curvature is informative."
                        .into(),
                ],
                expectations: pass_all("canonical", &checks),
            })
        }
        other => Err(CatalogError::UnknownEntry(other.into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driver;
    use crate::frame::{FrameField, FrameRecipe};

    #[test]
    fn entries_round_trip_through_config_schema() {
        for name in names() {
            let e = entry(name).unwrap();
            for screen in e.screen_names() {
                let cfg = e.config_for(screen).unwrap();
                let json = serde_json::to_string(&cfg).unwrap();
                let back = driver::parse_config(&json, true).unwrap();
                assert_eq!(cfg, back, "{name}#{screen}");
            }
        }
    }

    #[test]
    fn every_entry_frame_validates_on_its_grid() {
        for name in names() {
            let e = entry(name).unwrap();
            for screen in e.screen_names() {
                let cfg = e.config_for(screen).unwrap();
                let imm = driver::build_immersion(&cfg).unwrap();
                let recipe = driver::build_recipe(&imm, &cfg, &cfg.screen).unwrap();
                let frame = FrameField::new(&imm, recipe);
                let mut worst: f64 = 0.0;
                for u in imm.grid_points() {
                    let r = frame
                        .validate(&u)
                        .unwrap_or_else(|err| panic!("{name}#{screen} at {u:?}: {err}"));
                    worst = worst.max(r.max());
                }
                assert!(worst < 1e-9, "{name}#{screen}: frame residual {worst:.3e}");
            }
        }
    }

    #[test]
    fn transnormal_identities_hold() {
        for profile in ["flat", "cosh", "cos"] {
            let td = transnormal_defaults(profile).unwrap();
            let res = transnormal_residual(&td, 9).unwrap();
            assert!(res < 1e-9, "{profile}: |grad f| - warp(f) = {res:.3e}");
        }
    }

    #[test]
    fn small_tilt_recovers_rigging_screen() {
        let e = entry("light_cone_2d").unwrap();
        let cfg = e.base.clone();
        let imm = driver::build_immersion(&cfg).unwrap();
        let rig = FrameField::new(&imm, driver::build_recipe(&imm, &cfg, &cfg.screen).unwrap());

        let rho = 1e-4;
        let tilt_sources = cone_tilted_screen(rho);
        let refs: Vec<&str> = tilt_sources.iter().map(|s| s.as_str()).collect();
        let section = crate::ambient::VectorField::parse(&imm.ambient, &refs).unwrap();
        let tilted = FrameField::new(
            &imm,
            FrameRecipe::Explicit {
                zeta: crate::ambient::VectorField::parse(&imm.ambient, &["1", "0", "0"]).unwrap(),
                screen: vec![section],
            },
        );

        for u in [[1.0, 0.7], [2.0, 2.4], [2.8, 4.1]] {
            let a = rig.sample(&u).unwrap();
            let b = tilted.sample(&u).unwrap();
            let dot = a.inner(&a.screen[0], &b.screen[0]).abs();
            assert!((dot - 1.0).abs() < 1e-3, "alignment {dot} at {u:?}");
        }
    }

    #[test]
    fn unknown_entry_is_an_error() {
        assert!(matches!(
            entry("nope"),
            Err(CatalogError::UnknownEntry(_))
        ));
    }

    #[test]
    fn expectations_reference_declared_screens_and_checks() {
        for name in names() {
            let e = entry(name).unwrap();
            let screens = e.screen_names();
            for exp in &e.expectations {
                assert!(screens.contains(&exp.screen.as_str()), "{name}: {exp:?}");
                assert!(
                    driver::ALL_CHECKS.contains(&exp.check.as_str()),
                    "{name}: {exp:?}"
                );
                let cfg = e.config_for(&exp.screen).unwrap();
                assert!(
                    cfg.checks.iter().any(|c| c == &exp.check),
                    "{name}#{}: expectation {} not in configured checks",
                    exp.screen,
                    exp.check
                );
            }
        }
    }
}
