use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nospill_core::driver::{self, exit, AppError, SolveOptions};
use nospill_core::format::{self, DeltaFile, PairsFile, PencilFile, ProblemFile};
use nospill_core::numerics::CMatrix;
use nospill_core::random::{RandomClass, RandomSpec};
use nospill_core::reproduce::{reproduce, ExampleId, Reproduction};

#[derive(Parser)]
#[command(name = "nospill", version, about = "No-spillover updates of structured matrix pencils")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute (ΔM, ΔK) for a problem file and certify it.
    Solve {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Use the unstructured update (needs the fixed pair).
        #[arg(long)]
        unstructured: bool,
        /// Treat eigenvalues as quadratic values z with λ = z².
        #[arg(long)]
        quadratic: bool,
        /// Override the residual and structure tolerances.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Certify given updates against a pencil and deflating pairs.
    Verify {
        #[arg(long)]
        pencil: PathBuf,
        #[arg(long)]
        delta: PathBuf,
        /// Pairs file; may be repeated, earlier files take precedence.
        #[arg(long, required = true)]
        pairs: Vec<PathBuf>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Rerun a worked example: herm-6.1, odd-6.2, even-6.3 or shh-7.
    Reproduce {
        id: String,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Write a random problem and, next to it, its hidden fixed pair.
    Random {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        class: String,
        #[arg(long)]
        out: PathBuf,
        /// Definite variant (hermitian, star-odd, star-even).
        #[arg(long)]
        definite: bool,
    },
}

fn fail(e: AppError) -> i32 {
    eprintln!("error: {e}");
    e.exit_code()
}

fn hidden_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.fixed.json"))
}

fn run(cli: Cli) -> Result<i32, AppError> {
    match cli.command {
        Command::Solve { input, out, unstructured, quadratic, tol } => {
            let problem: ProblemFile = format::read(&input)?;
            let solved = driver::solve(&problem, SolveOptions { unstructured, quadratic, tol })?;
            format::write(&out, &solved.file())?;
            let c = &solved.certificate;
            println!("method: {}", solved.result.provenance.method);
            println!("target residual: {:.3e}", c.target_residual.rel);
            if let Some(s) = &c.spillover_residual {
                println!("spillover residual: {:.3e}", s.rel);
            }
            for f in &c.failures {
                println!("FAIL {f}");
            }
            println!("certificate: {}", if c.pass { "pass" } else { "fail" });
            Ok(solved.exit_code())
        }
        Command::Verify { pencil, delta, pairs, tol } => {
            let pencil: PencilFile = format::read(&pencil)?;
            let delta: DeltaFile = format::read(&delta)?;
            let mut merged = PairsFile { format: format::FORMAT_VERSION, ..PairsFile::default() };
            for p in &pairs {
                merged = merged.merge(format::read(p)?);
            }
            let cert = driver::verify(&pencil, &delta, &merged, tol)?;
            print!("{}", format::emit(&cert));
            Ok(if cert.pass { exit::PASS } else { exit::CERTIFICATE_FAILED })
        }
        Command::Reproduce { id, json } => {
            let Some(id) = ExampleId::parse(&id) else {
                eprintln!("error: unknown example {id:?}; expected one of herm-6.1, odd-6.2, even-6.3, shh-7");
                return Ok(exit::SCHEMA);
            };
            let r = reproduce(id)?;
            if json {
                print!("{}", format::emit(&r));
            } else {
                print_reproduction(&r);
            }
            Ok(exit::PASS)
        }
        Command::Random { seed, n, p, class, out, definite } => {
            let Some(class) = RandomClass::parse(&class) else {
                eprintln!("error: BadParameters: unknown class {class:?}");
                return Ok(exit::MATH);
            };
            let (problem, hidden) = driver::random_files(&RandomSpec { seed, n, p, class, definite })?;
            let hp = hidden_path(&out);
            format::write(&out, &problem)?;
            format::write(&hp, &hidden)?;
            println!("wrote {} and {}", out.display(), hp.display());
            Ok(exit::PASS)
        }
    }
}

fn print_matrix(label: &str, a: &CMatrix) {
    println!("{label}");
    for i in 0..a.nrows() {
        let row: Vec<String> = (0..a.ncols())
            .map(|j| format!("{:>11.5} {:+.5}i", a[(i, j)].re, a[(i, j)].im))
            .collect();
        println!("  {}", row.join("  "));
    }
}

fn print_reproduction(r: &Reproduction) {
    println!("example {}", r.id.name());
    print_matrix("DeltaM computed", &r.result.delta_m);
    print_matrix("DeltaM printed", &r.printed_dm);
    print_matrix("DeltaK computed", &r.result.delta_k);
    print_matrix("DeltaK printed", &r.printed_dk);
    println!("max relative deviation DeltaM: {:.3e}", r.deviation_dm);
    println!("max relative deviation DeltaK: {:.3e}", r.deviation_dk);
    println!("spillover: {:.4e} (printed {:.4e})", r.spillover, r.printed_spillover);
    println!("target residual: {:.4e}", r.target_residual);
    for (name, v) in &r.structure {
        println!("structure {name}: {v:.3e}");
    }
    for (name, v) in &r.definiteness {
        println!("min eigenvalue {name}: {v:.3e}");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = run(cli).unwrap_or_else(fail);
    ExitCode::from(code as u8)
}
