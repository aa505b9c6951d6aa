//! End-to-end acceptance gate: twelve numbered criteria over the built-in
//! catalog, each printing a single pass/fail line. Tolerances are pinned
//! here on purpose; loosening them is a reviewable change.

use nullframe::ambient::AmbientManifold;
use nullframe::analysis::{self, Verdict};
use nullframe::catalog;
use nullframe::driver::{self, RunConfig};
use nullframe::frame::FrameField;
use nullframe::immersion::NullImmersion;
use nullframe::shape::{shape_azperp, split_field, ShapeEngine};
use nullframe::tolerances::Tolerances;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

struct Gate {
    results: Vec<(String, bool)>,
}

impl Gate {
    fn new() -> Self {
        Gate {
            results: Vec::new(),
        }
    }

    fn record(&mut self, number: u32, name: &str, ok: bool, detail: &str) {
        let line = format!(
            "criterion {number:02} {name}: {} ({detail})",
            if ok { "PASS" } else { "FAIL" }
        );
        println!("{line}");
        self.results.push((line, ok));
    }

    fn finish(self) {
        let failed: Vec<&str> = self
            .results
            .iter()
            .filter(|(_, ok)| !ok)
            .map(|(l, _)| l.as_str())
            .collect();
        assert!(failed.is_empty(), "failed criteria:\n{}", failed.join("\n"));
    }
}

fn build(cfg: &RunConfig) -> (NullImmersion, nullframe::frame::FrameRecipe) {
    let imm = driver::build_immersion(cfg).expect("immersion");
    let recipe = driver::build_recipe(&imm, cfg, &cfg.screen).expect("recipe");
    (imm, recipe)
}

fn entry_cfg(name: &str, screen: &str) -> RunConfig {
    catalog::entry(name)
        .expect("entry")
        .config_for(screen)
        .expect("screen")
}

#[test]
fn acceptance() {
    let suite_start = Instant::now();
    let tols = Tolerances::default();
    let mut gate = Gate::new();

    // 1. Frame validity on the light cone: six residuals at every grid point.
    {
        let cfg = entry_cfg("light_cone_2d", "canonical");
        let (imm, recipe) = build(&cfg);
        let frame = FrameField::new(&imm, recipe);
        let t0 = Instant::now();
        let mut worst: f64 = 0.0;
        for u in imm.grid_points() {
            worst = worst.max(frame.validate(&u).expect("validate").max());
        }
        let dt = t0.elapsed();
        gate.record(
            1,
            "frame-validity",
            worst <= 1e-9 && dt.as_secs_f64() <= 1.0,
            &format!("max residual {worst:.2e}, {dt:.2?}"),
        );
    }

    // 2. Quasi-conformal fit on the de Sitter null graph: (phi, psi) must
    // equal (1, sqrt(2) tanh t) and the screen relation must close.
    {
        let cfg = entry_cfg("grw_transnormal_graph_cosh", "canonical");
        let (imm, recipe) = build(&cfg);
        let frame = FrameField::new(&imm, recipe);
        let eng = ShapeEngine::new(&frame);
        let mut rel: f64 = 0.0;
        let mut sqc: f64 = 0.0;
        let mut non_unique = false;
        for u in imm.grid_points() {
            let shape = eng.shape_operators(&u).expect("shape");
            let fit = analysis::quasi_conformal_fit(&shape, &tols);
            non_unique |= fit.non_unique;
            let t = shape.frame.x[0];
            let psi_exp = std::f64::consts::SQRT_2 * t.tanh();
            rel = rel
                .max((fit.phi - 1.0).abs())
                .max((fit.psi - psi_exp).abs() / psi_exp.abs());
            let n = shape.screen_dim();
            for i in 0..n {
                for j in 0..n {
                    let lhs = (shape.a_n[(i, j)] - shape.a_star[(i, j)])
                        / std::f64::consts::SQRT_2;
                    let rhs = if i == j { t.tanh() } else { 0.0 };
                    sqc = sqc.max((lhs - rhs).abs());
                }
            }
        }
        gate.record(
            2,
            "quasi-conformal-grw",
            rel <= 1e-5 && sqc <= 1e-5 && !non_unique,
            &format!("fit rel err {rel:.2e}, relation residual {sqc:.2e}"),
        );
    }

    // 3. Screen quasi-conformality of the frame adapted to a CC field, on a
    // parallel field over the hyperplane and the conformal field over the
    // de Sitter graph.
    {
        let mut worst: f64 = 0.0;
        for name in ["minkowski_null_hyperplane", "grw_transnormal_graph_cosh"] {
            let cfg = entry_cfg(name, "canonical");
            let (imm, _) = build(&cfg);
            let z = driver::build_field(&imm, &cfg, "cc").expect("cc");
            let rep = analysis::cc_screen_theorem_check(&imm, &z, &imm.grid_points(), &tols)
                .expect("cc_screen");
            worst = worst.max(rep.qc_max).max(rep.tau_max);
        }
        gate.record(
            3,
            "adapted-screen-quasi-conformal",
            worst <= 1e-5,
            &format!("max QC/tau residual {worst:.2e}"),
        );
    }

    // 4. Component identities of a CC field (tangent/radical/transversal
    // parts) on every entry.
    {
        let mut worst: f64 = 0.0;
        let mut worst_at = String::new();
        for name in catalog::names() {
            let cfg = entry_cfg(name, "canonical");
            let (imm, recipe) = build(&cfg);
            let frame = FrameField::new(&imm, recipe);
            let eng = ShapeEngine::new(&frame);
            let z = driver::build_field(&imm, &cfg, "cc").expect("cc");
            for u in imm.grid_points() {
                let r = eng.components_residual(&z, &u).expect("components");
                let m = r.a.max(r.b).max(r.c);
                if m > worst {
                    worst = m;
                    worst_at = name.to_string();
                }
            }
        }
        gate.record(
            4,
            "cc-component-identities",
            worst <= 1e-5,
            &format!("max residual {worst:.2e} ({worst_at})"),
        );
    }

    // 5. Constant angle under the tilted cone screen, gauge invariance of q
    // over 20 random gauges, and agreement of the three equivalent
    // constancy criteria everywhere.
    {
        let cfg = entry_cfg("light_cone_2d", "tilted");
        let (imm, recipe) = build(&cfg);
        let frame = FrameField::new(&imm, recipe.clone());
        let v = driver::build_field(&imm, &cfg, "cc").expect("cc");
        let grid = imm.grid_points();
        let rep = analysis::constant_angle_test(&frame, &v, &grid, &tols).expect("angle");
        let dev = analysis::gauge_invariance_check(&imm, &recipe, &v, &grid, 20, 42, &tols)
            .expect("gauge");
        let mut agree = rep.criteria_agree;
        for name in catalog::names() {
            let entry = catalog::entry(name).unwrap();
            for screen in entry.screen_names() {
                let cfg = entry.config_for(screen).unwrap();
                let (imm, recipe) = build(&cfg);
                let frame = FrameField::new(&imm, recipe);
                let v = driver::build_field(&imm, &cfg, "cc").expect("cc");
                let r = analysis::constant_angle_test(&frame, &v, &imm.grid_points(), &tols)
                    .expect("angle");
                agree &= r.criteria_agree;
            }
        }
        gate.record(
            5,
            "constant-angle-and-gauge",
            rep.q_spread <= 1e-9 && dev <= 1e-9 && agree,
            &format!(
                "q spread {:.2e}, gauge deviation {dev:.2e}, criteria agree {agree}",
                rep.q_spread
            ),
        );
    }

    // 6. Canonical principal direction: Z* is an eigenvector of the tilt
    // operator with the predicted eigenvalue; for parallel Z the operator
    // kills Z*.
    {
        let mut eig: f64 = 0.0;
        let mut lam: f64 = 0.0;
        let mut azp: f64 = 0.0;
        for (name, screen) in [
            ("light_cone_2d", "tilted"),
            ("minkowski_null_hyperplane_4d", "tilted"),
        ] {
            let cfg = entry_cfg(name, screen);
            let (imm, recipe) = build(&cfg);
            let frame = FrameField::new(&imm, recipe);
            let eng = ShapeEngine::new(&frame);
            let z = driver::build_field(&imm, &cfg, "cc").expect("cc");
            let grid = imm.grid_points();
            let rep = analysis::cpd_test(&eng, &z, &grid, &tols).expect("cpd");
            eig = eig.max(rep.eigen_residual);
            lam = lam.max(rep.lambda_vs_predicted);
            for u in &grid {
                let shape = eng.shape_operators(u).expect("shape");
                let s = &shape.frame;
                let split = split_field(s, &z.eval(&s.x));
                let v = shape_azperp(&shape, &split, &split.zstar_coeffs);
                azp = azp.max(s.inner(&v, &v).abs().sqrt());
            }
        }
        gate.record(
            6,
            "canonical-principal-direction",
            eig <= 1e-5 && lam <= 1e-5 && azp <= 1e-6,
            &format!("eigen {eig:.2e}, lambda {lam:.2e}, parallel-Z image {azp:.2e}"),
        );
    }

    // 7. The unit screen direction of Z* is geodesic and its eigenvalue
    // matches the derivative identity, wherever the principal-direction
    // test passes.
    {
        let mut geo: f64 = 0.0;
        let mut lam: f64 = 0.0;
        let mut all_pass = true;
        for (name, screen) in [
            ("light_cone_2d", "tilted"),
            ("minkowski_null_hyperplane_4d", "tilted"),
        ] {
            let cfg = entry_cfg(name, screen);
            let (imm, recipe) = build(&cfg);
            let frame = FrameField::new(&imm, recipe);
            let eng = ShapeEngine::new(&frame);
            let z = driver::build_field(&imm, &cfg, "cc").expect("cc");
            let grid = imm.grid_points();
            let cpd = analysis::cpd_test(&eng, &z, &grid, &tols).expect("cpd");
            all_pass &= cpd.verdict == Verdict::Pass;
            let rep = analysis::geodesic_direction_check(&eng, &z, &grid, &tols).expect("geo");
            geo = geo.max(rep.geodesic_residual);
            lam = lam.max(rep.lambda_identity);
        }
        gate.record(
            7,
            "geodesic-direction",
            all_pass && geo <= 1e-5 && lam <= 1e-5,
            &format!("geodesic {geo:.2e}, lambda identity {lam:.2e}"),
        );
    }

    // 8. Codazzi equation: finite-difference budget on curved entries,
    // round-off on totally geodesic hyperplanes.
    {
        let mut curved: f64 = 0.0;
        for name in ["light_cone_2d", "de_sitter_cmc"] {
            let cfg = entry_cfg(name, "canonical");
            let rep = driver::run(&cfg, &["codazzi".into()]).expect("run");
            curved = curved.max(rep.checks[0].max);
        }
        let mut flat: f64 = 0.0;
        for name in ["minkowski_null_hyperplane", "minkowski_null_hyperplane_4d"] {
            let cfg = entry_cfg(name, "canonical");
            let rep = driver::run(&cfg, &["codazzi".into()]).expect("run");
            flat = flat.max(rep.checks[0].max);
        }
        gate.record(
            8,
            "codazzi",
            curved <= 1e-4 && flat <= 1e-9,
            &format!("curved {curved:.2e}, hyperplanes {flat:.2e}"),
        );
    }

    // 9. Spaceform curvature identities over 200 seeded random triples.
    {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mink = AmbientManifold::minkowski(&["t", "x", "y"]);
        let pts: Vec<Vec<f64>> = (0..40)
            .map(|_| (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect())
            .collect();
        let r_flat = mink
            .spaceform_residual(0.0, &pts, 5, &mut rng)
            .expect("spaceform");

        let ds_cfg = entry_cfg("de_sitter_cmc", "canonical");
        let ds = driver::build_ambient(&ds_cfg.ambient, &[]).expect("ambient");
        let ranges = [(-1.0, 1.0), (0.5, 2.6), (0.4, 2.7), (0.1, 3.0)];
        let pts: Vec<Vec<f64>> = (0..40)
            .map(|_| ranges.iter().map(|&(a, b)| rng.gen_range(a..b)).collect())
            .collect();
        let r_ds = ds.spaceform_residual(1.0, &pts, 5, &mut rng).expect("spaceform");
        gate.record(
            9,
            "spaceform-identities",
            r_flat <= 1e-9 && r_ds <= 1e-6,
            &format!("c=0 {r_flat:.2e}, c=1 {r_ds:.2e}"),
        );
    }

    // 10. Flat-screen theorem on the tilted 4d hyperplane: the screen
    // connection annihilates the adapted basis.
    {
        let cfg = entry_cfg("minkowski_null_hyperplane_4d", "tilted");
        let (imm, recipe) = build(&cfg);
        let frame = FrameField::new(&imm, recipe);
        let eng = ShapeEngine::new(&frame);
        let z = driver::build_field(&imm, &cfg, "cc").expect("cc");
        let rep =
            analysis::flat_screen_check(&eng, &z, &imm.grid_points(), &tols).expect("flat");
        let worst = rep.residuals.iter().cloned().fold(0.0_f64, f64::max);
        gate.record(
            10,
            "flat-screen",
            rep.verdict == Verdict::Pass && worst <= 1e-5,
            &format!("max connection residual {worst:.2e}"),
        );
    }

    // 11. Null CMC rigidity data on the de Sitter H=0 surface, invariant
    // under constant rescaling of the comparison function.
    {
        let cfg = entry_cfg("de_sitter_cmc", "canonical");
        let (imm, recipe) = build(&cfg);
        let frame = FrameField::new(&imm, recipe);
        let eng = ShapeEngine::new(&frame);
        let grid = imm.grid_points();
        let rep = analysis::cmc_cc_check(&eng, &grid, &tols).expect("cmc");
        let scaled =
            analysis::cmc_cc_check_scaled(&eng, &grid, &tols, 3.0).expect("cmc scaled");
        let worst = rep
            .wk_residual
            .max(rep.cond1_residual)
            .max(rep.cond2_residual);
        gate.record(
            11,
            "cmc",
            rep.verdict == Verdict::Pass && worst <= 1e-5 && scaled.verdict == rep.verdict,
            &format!(
                "W-derivative {:.2e}, conditions {:.2e}/{:.2e}, rescaling verdict {:?}",
                rep.wk_residual, rep.cond1_residual, rep.cond2_residual, scaled.verdict
            ),
        );
    }

    // 12. Determinism of the full suite: two complete runs with the same
    // seed must serialize to identical bytes, inside the time budget.
    {
        let golden = || {
            let mut out = String::new();
            for name in catalog::names() {
                let entry = catalog::entry(name).unwrap();
                for screen in entry.screen_names() {
                    let cfg = entry.config_for(screen).unwrap();
                    out.push_str(&driver::run(&cfg, &[]).expect("run").to_json());
                    out.push('\n');
                }
            }
            out
        };
        let a = golden();
        let b = golden();
        let elapsed = suite_start.elapsed();
        gate.record(
            12,
            "determinism",
            a == b && elapsed.as_secs_f64() <= 60.0,
            &format!(
                "bodies identical: {}, suite time {elapsed:.1?}",
                a == b
            ),
        );
    }

    gate.finish();
}
