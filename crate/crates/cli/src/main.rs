//! `nullframe`: command line front end for the null-frame geometry engine.
//!
//! Exit codes: 0 all checks passed, 1 at least one check failed, 2 invalid
//! configuration or arguments, 3 internal error.

use clap::{Args, Parser, Subcommand, ValueEnum};
use nullframe::catalog;
use nullframe::driver::{self, DriverError, RunConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "nullframe", version, about = "Null hypersurface frame and shape calculus")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Run configuration (JSON); `nullframe catalog dump <entry>` emits the
    /// same schema.
    #[arg(long)]
    config: PathBuf,
    /// Override the exact-arithmetic tolerance.
    #[arg(long)]
    tol_exact: Option<f64>,
    /// Override the finite-difference tolerance.
    #[arg(long)]
    tol_fd: Option<f64>,
    /// Override the seed used for randomized sub-checks.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the grid, e.g. "16x16" or "8x6x6".
    #[arg(long)]
    grid: Option<String>,
    /// Reject configs that request unknown check names.
    #[arg(long)]
    strict: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Validate the null frame at every grid point.
    Validate(Common),
    /// Compute shape operators and verify their algebraic invariants.
    Shape(Common),
    /// Constant-angle and gauge-invariance analysis.
    Angle(Common),
    /// Verify one of the named lemmas or theorems.
    Verify {
        #[arg(long, value_enum)]
        lemma: Lemma,
        #[command(flatten)]
        common: Common,
    },
    /// Inspect the built-in catalog.
    Catalog {
        #[command(subcommand)]
        action: CatalogCmd,
    },
    /// Export per-point frame data and residuals as CSV (plus a schema
    /// sidecar).
    Export {
        #[command(flatten)]
        common: Common,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum CatalogCmd {
    /// List entry names.
    List,
    /// Print the run configuration of an entry as JSON.
    Dump {
        name: String,
        /// Screen to select ("canonical" or a variant name).
        #[arg(long, default_value = "canonical")]
        screen: String,
    },
}

#[derive(Copy, Clone, ValueEnum)]
enum Lemma {
    Components,
    Codazzi,
    Eqgrads,
    Cpd,
    Principal,
    QcScreen,
    FlatScreen,
    Cmc,
    Nonmetric,
}

impl Lemma {
    fn checks(self) -> Vec<String> {
        let name = match self {
            Lemma::Components => "components",
            Lemma::Codazzi => "codazzi",
            Lemma::Eqgrads => "eqgrads",
            Lemma::Cpd => "cpd",
            Lemma::Principal => "principal",
            Lemma::QcScreen => "qc_screen",
            Lemma::FlatScreen => "flat_screen",
            Lemma::Cmc => "cmc",
            Lemma::Nonmetric => "nonmetric",
        };
        vec![name.to_string()]
    }
}

const EXIT_FAIL: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

fn is_config_error(e: &DriverError) -> bool {
    matches!(
        e,
        DriverError::Config(_)
            | DriverError::ConfigAt { .. }
            | DriverError::Io(_)
            | DriverError::Json(_)
            | DriverError::Expr(_)
            | DriverError::UnknownCheck(_)
    )
}

fn load(common: &Common) -> Result<RunConfig, u8> {
    let mut cfg = driver::load_config(&common.config, common.strict).map_err(|e| {
        eprintln!("error: {e}");
        if is_config_error(&e) {
            EXIT_CONFIG
        } else {
            EXIT_INTERNAL
        }
    })?;
    if let Some(t) = common.tol_exact {
        cfg.tolerances.exact = t;
    }
    if let Some(t) = common.tol_fd {
        cfg.tolerances.fd = t;
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(spec) = &common.grid {
        let counts: Result<Vec<usize>, _> = spec.split('x').map(str::parse).collect();
        match counts {
            Ok(c) if c.len() == cfg.immersion.params.len() && c.iter().all(|&n| n >= 2) => {
                cfg.grid = c;
            }
            _ => {
                eprintln!(
                    "error: --grid expects {} axis counts >= 2 joined by 'x', got {spec:?}",
                    cfg.immersion.params.len()
                );
                return Err(EXIT_CONFIG);
            }
        }
    }
    Ok(cfg)
}

fn run_checks(common: &Common, checks: &[String]) -> u8 {
    let cfg = match load(common) {
        Ok(c) => c,
        Err(code) => return code,
    };
    match driver::run(&cfg, checks) {
        Ok(report) => {
            println!("{}", report.to_json());
            if report.any_failed() {
                EXIT_FAIL
            } else {
                0
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            if is_config_error(&e) {
                EXIT_CONFIG
            } else {
                EXIT_INTERNAL
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.cmd {
        Cmd::Validate(common) => run_checks(&common, &["validate_frame".into()]),
        Cmd::Shape(common) => {
            run_checks(&common, &["shape_invariants".into(), "umbilic".into()])
        }
        Cmd::Angle(common) => run_checks(
            &common,
            &["constant_angle".into(), "gauge_invariance".into()],
        ),
        Cmd::Verify { lemma, common } => run_checks(&common, &lemma.checks()),
        Cmd::Catalog { action } => match action {
            CatalogCmd::List => {
                for name in catalog::names() {
                    let entry = catalog::entry(name).expect("known entry");
                    println!("{name}  (screens: {})", entry.screen_names().join(", "));
                }
                0
            }
            CatalogCmd::Dump { name, screen } => match catalog::entry(&name) {
                Ok(entry) => match entry.config_for(&screen) {
                    Some(cfg) => {
                        println!(
                            "{}",
                            serde_json::to_string_pretty(&cfg).expect("serialize config")
                        );
                        0
                    }
                    None => {
                        eprintln!(
                            "error: entry {name} has no screen {screen:?} (available: {})",
                            entry.screen_names().join(", ")
                        );
                        EXIT_CONFIG
                    }
                },
                Err(e) => {
                    eprintln!("error: {e}");
                    EXIT_CONFIG
                }
            },
        },
        Cmd::Export { common, out } => {
            let cfg = match load(&common) {
                Ok(c) => c,
                Err(code) => return ExitCode::from(code),
            };
            match driver::run(&cfg, &[]).and_then(|report| {
                driver::export_plotdata(&cfg, &report, &out).map(|_| report)
            }) {
                Ok(report) => {
                    eprintln!("wrote {} and schema sidecar", out.display());
                    if report.any_failed() {
                        EXIT_FAIL
                    } else {
                        0
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    if is_config_error(&e) {
                        EXIT_CONFIG
                    } else {
                        EXIT_INTERNAL
                    }
                }
            }
        }
    };
    ExitCode::from(code)
}
