#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::io::{self, Read};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use blaschke::factorizer::{residual, verification_grid};
use blaschke::report::{self, AnalysisReport, FactorOutput};
use blaschke::{compose, json, product, BlaschkeProduct, ComplexPoint, Config, Error, ErrorKind};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

/// Factor finite Blaschke products through the monodromy of their inverse branches.
#[derive(Parser)]
#[command(name = "blaschke", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Print machine-readable JSON instead of a text summary.
    #[arg(long, global = true)]
    json: bool,
    /// Indent JSON output.
    #[arg(long, global = true)]
    pretty: bool,
    /// Residual a factorization must meet to be reported.
    #[arg(long, global = true, value_name = "X", allow_negative_numbers = true)]
    tol: Option<f64>,
    /// Seed for verification samples and random products.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Angles per verification radius.
    #[arg(long, global = true, value_name = "N")]
    grid: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Critical data, monodromy, group structure and all factorizations.
    Analyze { file: PathBuf },
    /// Only the factorizations.
    Factor { file: PathBuf },
    /// Write outer ∘ inner.
    Compose {
        outer: PathBuf,
        inner: PathBuf,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Seeded random product with zeros uniform in |z| <= radius.
    Random {
        #[arg(long)]
        degree: usize,
        /// Zeros are drawn from the disk of this radius.
        #[arg(long, default_value_t = 0.8)]
        radius: f64,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Check that outer ∘ inner reproduces the product on the verification grid.
    Verify {
        product: PathBuf,
        outer: PathBuf,
        inner: PathBuf,
    },
}

#[derive(Serialize)]
struct Verification {
    residual: f64,
    tolerance: f64,
    passed: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let mut cfg = Config {
        seed: cli.global.seed,
        ..Config::default()
    };
    if let Some(tol) = cli.global.tol {
        cfg.residual = tol;
    }
    if let Some(grid) = cli.global.grid {
        cfg.grid = grid;
    }
    match run(&cli, &cfg) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(e.kind()))
        }
    }
}

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::InvalidInput => 1,
        ErrorKind::Numerical => 2,
        ErrorKind::Declined => 3,
    }
}

fn run(cli: &Cli, cfg: &Config) -> Result<ExitCode, Error> {
    let g = &cli.global;
    if cfg.grid == 0 || !(cfg.residual > 0.0) {
        return Err(Error::InvalidInput {
            field: "--tol/--grid".into(),
            message: "must be positive".into(),
        });
    }
    match &cli.command {
        Command::Analyze { file } => {
            let b = read_product(file)?;
            let r = report::analyze(&b, cfg)?;
            if g.json {
                println!("{}", json::to_string(&r, g.pretty));
            } else {
                print_analysis(&r);
            }
        }
        Command::Factor { file } => {
            let b = read_product(file)?;
            let r = report::factor(&b, cfg)?;
            if g.json {
                println!("{}", json::to_string(&r, g.pretty));
            } else {
                print_factorizations(&r);
            }
        }
        Command::Compose { outer, inner, output } => {
            let product = compose(&read_product(outer)?, &read_product(inner)?, cfg)?;
            emit_product(&product, output.as_deref(), g.pretty)?;
        }
        Command::Random { degree, radius, output } => {
            let product = product::random(*degree, cfg.seed, *radius)?;
            emit_product(&product, output.as_deref(), g.pretty)?;
        }
        Command::Verify { product, outer, inner } => {
            let b = read_product(product)?;
            let j = read_product(outer)?;
            let i = read_product(inner)?;
            if j.degree() * i.degree() != b.degree() {
                return Err(Error::InvalidInput {
                    field: "outer/inner".into(),
                    message: format!(
                        "degrees {} x {} do not multiply to {}",
                        j.degree(),
                        i.degree(),
                        b.degree()
                    ),
                });
            }
            let r = residual(&b, &j, &i, &verification_grid(cfg))?;
            let v = Verification {
                residual: r,
                tolerance: cfg.residual,
                passed: r <= cfg.residual,
            };
            if g.json {
                println!("{}", json::to_string(&v, g.pretty));
            } else {
                println!(
                    "{}: residual {:.3e} (tolerance {:.1e})",
                    if v.passed { "ok" } else { "FAILED" },
                    r,
                    cfg.residual
                );
            }
            if !v.passed {
                return Ok(ExitCode::from(2));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn read_product(path: &Path) -> Result<BlaschkeProduct, Error> {
    let field = path.display().to_string();
    let text = if path == Path::new("-") {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(|e| Error::InvalidInput {
            field: "<stdin>".into(),
            message: e.to_string(),
        })?;
        s
    } else {
        fs::read_to_string(path).map_err(|e| Error::InvalidInput {
            field: field.clone(),
            message: e.to_string(),
        })?
    };
    BlaschkeProduct::from_json_str(&text).map_err(|e| match e {
        Error::InvalidInput { field: inner, message } => Error::InvalidInput {
            field: format!("{field}: {inner}"),
            message,
        },
        other => other,
    })
}

fn emit_product(b: &BlaschkeProduct, output: Option<&Path>, pretty: bool) -> Result<(), Error> {
    let text = json::to_string(b, pretty);
    match output {
        Some(path) => fs::write(path, text + "\n").map_err(|e| Error::InvalidInput {
            field: path.display().to_string(),
            message: e.to_string(),
        }),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn fmt_point(z: ComplexPoint) -> String {
    format!("{:.6}{:+.6}i", z.re, z.im)
}

fn fmt_product(b: &BlaschkeProduct) -> String {
    let zeros: Vec<String> = b.zeros().iter().map(|z| fmt_point(*z)).collect();
    format!("lambda {}  zeros [{}]", fmt_point(b.lambda()), zeros.join(", "))
}

fn fmt_blocks(blocks: &[Vec<usize>]) -> String {
    blocks
        .iter()
        .map(|b| {
            let labels: Vec<String> = b.iter().map(|i| i.to_string()).collect();
            format!("{{{}}}", labels.join(","))
        })
        .collect()
}

fn print_analysis(r: &AnalysisReport) {
    println!("degree {}", r.degree);
    println!("critical values: {}", r.critical_values.len());
    println!("base point {}", fmt_point(r.monodromy.base_point));
    println!("monodromy generators:");
    for (g, v) in r.monodromy.generators.iter().zip(&r.monodromy.punctures) {
        println!("  {g}  around {}", fmt_point(*v));
    }
    println!(
        "group order {}{}{}",
        r.group.order,
        if r.group.transitive { ", transitive" } else { "" },
        if r.group.abelian { ", abelian" } else { "" }
    );
    match r.normal_subgroups.orders() {
        Some(orders) => {
            let orders: Vec<String> = orders.iter().map(|o| o.to_string()).collect();
            println!("normal subgroup orders: {}", orders.join(" "));
        }
        None => println!("normal subgroups: group too large to enumerate"),
    }
    println!("nontrivial block systems: {}", r.block_systems.len());
    for s in &r.block_systems {
        println!("  size {}: {}", s.block_size, fmt_blocks(&s.blocks));
    }
    print_list(&r.factorizations, &r.errors);
}

fn print_factorizations(r: &FactorOutput) {
    println!("degree {}", r.degree);
    print_list(&r.factorizations, &r.errors);
}

fn print_list(fs: &[report::FactorizationSummary], errors: &[report::SystemFailure]) {
    if fs.is_empty() && errors.is_empty() {
        println!("no nontrivial factorizations");
    } else {
        println!("factorizations: {}", fs.len());
    }
    for (k, f) in fs.iter().enumerate() {
        println!(
            "  [{}] inner degree {}, outer degree {}, residual {:.3e}, blocks {}",
            k + 1,
            f.block_size,
            f.block_count,
            f.residual,
            fmt_blocks(&f.block_system)
        );
        println!("      outer: {}", fmt_product(&f.outer));
        println!("      inner: {}", fmt_product(&f.inner));
    }
    for e in errors {
        println!("  failed for blocks {}: {}", fmt_blocks(&e.block_system), e.message);
    }
}
