use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::builder::PossibleValuesParser;
use clap::{Parser, Subcommand};
use hydroham_cli::report::{DensityEntry, ExpandReport, Report};
use hydroham_cli::system_file::SystemFile;
use hydroham_core::lax::{is_quasihomogeneous, match_density};
use hydroham_core::oassoc::{build_bundle, run_case, OAssocBundle, OAssocError, CASES};

#[derive(Parser)]
#[command(name = "hydroham", version, about = "Exact checks of Hamiltonian structures for hydrodynamic-type systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification case on the built-in oriented associativity data.
    Verify {
        #[arg(long, value_parser = PossibleValuesParser::new(CASES.iter().copied().chain(["all"])))]
        case: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Include wall-clock seconds per check.
        #[arg(long)]
        timings: bool,
    },
    /// Expand the generating function of conserved densities on one branch.
    Expand {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        branch: u8,
        #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=4))]
        depth: u8,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a system file.
    Check {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        timings: bool,
    },
}

const EXIT_FAILED: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_BUNDLE: u8 = 3;

fn emit(text: &str, out: Option<&Path>) -> Result<(), u8> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| {
            eprintln!("error: cannot write {}: {e}", p.display());
            EXIT_INPUT
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn bundle() -> Result<OAssocBundle, u8> {
    build_bundle().map_err(|e| {
        eprintln!("error: {e}");
        EXIT_BUNDLE
    })
}

fn runtime(e: OAssocError) -> u8 {
    eprintln!("error: {e}");
    match e {
        OAssocError::UnknownCase(_) => EXIT_INPUT,
        _ => EXIT_BUNDLE,
    }
}

fn verify(case: &str, out: Option<&Path>, timings: bool) -> Result<bool, u8> {
    let b = bundle()?;
    let r = run_case(&b, case).map_err(runtime)?;
    let report = Report::from_case(&b, &r, timings);
    emit(&report.to_json(), out)?;
    Ok(report.met)
}

fn expand(branch: usize, depth: usize, out: Option<&Path>) -> Result<bool, u8> {
    let b = bundle()?;
    let k = branch - 1;
    let g = b.expand_branch(k, depth).map_err(runtime)?;
    let space = &b.system_u.space;
    let print = |e| space.print(&b.ws_u, e);
    let mut densities = vec![DensityEntry {
        order: -1,
        text: b.ws_u.names()[k].clone(),
        x_weight: Some(0),
        printed_match: None,
    }];
    for (i, h) in g.h.iter().enumerate() {
        let printed_match = if i == 0 {
            let printed = b.printed_density(k, "u2").map_err(runtime)?;
            let m = match_density(space, h, &printed).map_err(|e| runtime(e.into()))?;
            Some(m.as_str().to_string())
        } else {
            None
        };
        densities.push(DensityEntry {
            order: i as i32,
            text: print(h),
            x_weight: (0..=2 * depth as u32 + 4).find(|&w| is_quasihomogeneous(h, w)),
            printed_match,
        });
    }
    let report = ExpandReport {
        command: "expand".into(),
        branch,
        depth,
        met: g.leading_residual.is_zero() && g.order_residuals.iter().all(|r| r.is_zero()),
        leading_residual: print(&g.leading_residual),
        recursion_coefficient: b.ws_u.print(&g.linear),
        densities,
        order_residuals: g.order_residuals.iter().map(print).collect(),
    };
    emit(&report.to_json(), out)?;
    Ok(report.met)
}

fn check(file: &Path, out: Option<&Path>, timings: bool) -> Result<bool, u8> {
    let text = std::fs::read_to_string(file).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", file.display());
        EXIT_INPUT
    })?;
    let loaded = SystemFile::from_toml(&text).and_then(|f| f.load()).map_err(|e| {
        eprintln!("error: {}: {e}", file.display());
        EXIT_INPUT
    })?;
    let t = Instant::now();
    let report = loaded.run(&file.display().to_string(), timings);
    if timings {
        eprintln!("checked in {:.2}s", t.elapsed().as_secs_f64());
    }
    emit(&report.to_json(), out)?;
    Ok(report.met)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Verify { case, out, timings } => verify(case, out.as_deref(), *timings),
        Command::Expand { branch, depth, out } => expand(*branch as usize, *depth as usize, out.as_deref()),
        Command::Check { file, out, timings } => check(file, out.as_deref(), *timings),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAILED),
        Err(code) => ExitCode::from(code),
    }
}
