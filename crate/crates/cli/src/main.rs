use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, anyhow};
use clap::{Parser, Subcommand, ValueEnum};
use modalkit_core::nosignal::{
    RequirementIvVerdict, build_system, forced_zero_cells, mobit_anchors, pr_box_check,
    relaxed_unique_table, requirement_iv_verdict, solve, symbolic_cells,
};
use modalkit_core::verifiers::{
    ColoringProblem, coloring_parity_certificate, find_colorings, find_local_models,
    local_model_candidates, mobit_triangle,
};
use modalkit_core::{
    DEFAULT_ENUM_CAP, MobitScenario, PrimeField, enumerate_effects_capped,
    enumerate_measurements_capped,
};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "modalkit",
    version,
    about = "Exact modal quantum theory over prime finite fields"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Write the output to a file instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Print the joint possibility table of the two-mobit singlet.
    Table {
        /// Field modulus (prime).
        #[arg(long, default_value_t = 2)]
        p: u64,
    },
    /// Search a coloring instance for valid green sets.
    Coloring {
        /// JSON instance file; defaults to the built-in mobit triangle.
        #[arg(long, value_name = "FILE")]
        file: Option<PathBuf>,
    },
    /// Search for deterministic local models of the singlet table.
    Localmodels {
        /// Field modulus (prime).
        #[arg(long, default_value_t = 2)]
        p: u64,
    },
    /// Analyze no-signaling probability assignments for the singlet table.
    Nosignal {
        /// Field modulus (prime).
        #[arg(long, default_value_t = 2)]
        p: u64,
        /// Also print the symbolic cell grid.
        #[arg(long)]
        symbolic: bool,
    },
    /// List the canonical effects and measurements of a system.
    Enumerate {
        /// Field modulus (prime).
        #[arg(long, default_value_t = 2)]
        p: u64,
        /// System dimension.
        #[arg(long, default_value_t = 2)]
        dim: usize,
    },
}

/// Failure reasons mapped to exit codes: usage and input problems exit 2,
/// internal cross-check mismatches exit 1.
enum Failure {
    Usage(anyhow::Error),
    Verification(anyhow::Error),
}

fn usage<T, E: Into<anyhow::Error>>(result: Result<T, E>) -> Result<T, Failure> {
    result.map_err(|e| Failure::Usage(e.into()))
}

fn internal<T, E: Into<anyhow::Error>>(result: Result<T, E>) -> Result<T, Failure> {
    result.map_err(|e| Failure::Verification(e.into()))
}

fn unsupported_csv() -> Failure {
    Failure::Usage(anyhow!("csv output is not available for this subcommand"))
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String, Failure> {
    let mut text = internal(serde_json::to_string_pretty(value))?;
    text.push('\n');
    Ok(text)
}

fn field_for(p: u64) -> Result<PrimeField, Failure> {
    usage(PrimeField::new(p))
}

fn run_table(p: u64, format: Format) -> Result<String, Failure> {
    field_for(p)?;
    let scenario = usage(MobitScenario::new(p))?;
    let table = internal(scenario.table())?;
    match format {
        Format::Text => Ok(table.render_text()),
        Format::Csv => Ok(table.render_csv()),
        Format::Json => to_json(&table),
    }
}

fn run_coloring(file: Option<&PathBuf>, format: Format) -> Result<String, Failure> {
    let problem = match file {
        None => mobit_triangle(),
        Some(path) => {
            let text = usage(
                fs::read_to_string(path)
                    .with_context(|| format!("reading instance file {}", path.display())),
            )?;
            usage(
                serde_json::from_str::<ColoringProblem>(&text)
                    .with_context(|| format!("parsing instance file {}", path.display())),
            )?
        }
    };
    let colorings = usage(find_colorings(&problem))?;
    let certificate = usage(coloring_parity_certificate(&problem))?;
    let candidates = 1u128 << problem.vertices.len();

    // Cross-check the search result against the independent certificate.
    if certificate.is_some() && !colorings.is_empty() {
        return Err(Failure::Verification(anyhow!(
            "parity certificate claims infeasibility but {} colorings were found",
            colorings.len()
        )));
    }
    for c in &colorings {
        if !c.satisfies(&problem) {
            return Err(Failure::Verification(anyhow!(
                "search returned an invalid coloring {:?}",
                c.green_vertices(&problem)
            )));
        }
    }

    match format {
        Format::Csv => Err(unsupported_csv()),
        Format::Json => to_json(&json!({
            "problem": problem,
            "candidates": candidates,
            "colorings": colorings
                .iter()
                .map(|c| c.green_vertices(&problem))
                .collect::<Vec<_>>(),
            "parity_certificate": certificate,
        })),
        Format::Text => {
            let mut out = format!(
                "instance: {} vertices, {} edges, {} green per edge\n{} of {} candidate colorings valid\n",
                problem.vertices.len(),
                problem.edges.len(),
                problem.green_count,
                colorings.len(),
                candidates,
            );
            for c in &colorings {
                out.push_str(&format!("green: {}\n", c.green_vertices(&problem).join(", ")));
            }
            if let Some(w) = &certificate {
                out.push_str(&format!("parity certificate: {}\n", w.explain()));
            }
            Ok(out)
        }
    }
}

fn run_localmodels(p: u64, format: Format) -> Result<String, Failure> {
    field_for(p)?;
    let scenario = usage(MobitScenario::new(p))?;
    let table = internal(scenario.table())?;
    let candidates = local_model_candidates(&table);
    let models = internal(find_local_models(&table))?;
    for m in &models {
        if !internal(m.is_consistent_with(&table))? {
            return Err(Failure::Verification(anyhow!(
                "search returned an inconsistent local model"
            )));
        }
    }

    match format {
        Format::Csv => Err(unsupported_csv()),
        Format::Json => to_json(&json!({
            "p": p,
            "candidates": candidates,
            "models": models,
        })),
        Format::Text => {
            let mut out = format!(
                "{} of {} local deterministic models consistent\n",
                models.len(),
                candidates
            );
            for m in &models {
                let side = |pairs: &[(String, String)]| {
                    pairs
                        .iter()
                        .map(|(m, o)| format!("{m}={o}"))
                        .collect::<Vec<_>>()
                        .join(" ")
                };
                out.push_str(&format!(
                    "side1: {}; side2: {}\n",
                    side(m.side1()),
                    side(m.side2())
                ));
            }
            Ok(out)
        }
    }
}

fn run_nosignal(p: u64, symbolic: bool, format: Format) -> Result<String, Failure> {
    field_for(p)?;
    let scenario = usage(MobitScenario::new(p))?;
    let table = internal(scenario.table())?;
    let sys = internal(build_system(&table))?;
    let space = internal(solve(&sys))?;
    let symbolic_table = internal(symbolic_cells(&sys, &space, &mobit_anchors()))?;
    let forced = internal(forced_zero_cells(&sys, &space))?;
    let verdict = internal(requirement_iv_verdict(&sys, &space))?;
    let relaxed = internal(relaxed_unique_table(&sys, &space, &forced))?;
    // The relaxed table must satisfy the probability and marginal
    // requirements against the possibility table it came from.
    internal(relaxed.check_requirements(&table))?;
    let pr_box = internal(pr_box_check(&relaxed, ["X", "Y"], ["X", "Z"]))?;

    match format {
        Format::Csv => Ok(if symbolic {
            symbolic_table.render_csv()
        } else {
            relaxed.render_csv()
        }),
        Format::Json => {
            let symbolic_grid: Vec<Vec<String>> = (0..sys.rows().len() * 2)
                .map(|r| (0..sys.cols().len() * 2).map(|c| symbolic_table.cell_text(r, c)).collect())
                .collect();
            to_json(&json!({
                "p": p,
                "cells": sys.cells().len(),
                "equations": sys.equation_count(),
                "dimension": space.dimension(),
                "parameters": symbolic_table.params(),
                "symbolic": symbolic_grid,
                "forced_zero_cells": forced,
                "requirement_iv": verdict,
                "relaxed_table": relaxed,
                "pr_box": pr_box,
            }))
        }
        Format::Text => {
            let mut out = format!(
                "no-signaling analysis of the singlet table over GF({p})\n\
                 cells: {}, equations: {}\n\
                 solution space dimension {} (parameters {})\n",
                sys.cells().len(),
                sys.equation_count(),
                space.dimension(),
                symbolic_table.params().join(", "),
            );
            if symbolic {
                out.push_str("symbolic table:\n");
                out.push_str(&symbolic_table.render_text());
            }
            let forced_list = forced
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(" ");
            out.push_str(&format!("forced zero cells: {forced_list}\n"));
            match &verdict {
                RequirementIvVerdict::Violated { witnesses } => {
                    out.push_str(&format!(
                        "Requirement IV: VIOLATED ({} cells)\n",
                        witnesses.len()
                    ));
                }
                RequirementIvVerdict::Satisfiable => {
                    out.push_str("Requirement IV: satisfiable\n");
                }
            }
            out.push_str("relaxed table (forced cells set to zero, unique):\n");
            out.push_str(&relaxed.render_text());
            match &pr_box {
                Some(report) => out.push_str(&format!(
                    "PR box: YES, CHSH = {} (rows {}; cols {}; negated ({},{}))\n",
                    report.chsh,
                    report.rows.join(","),
                    report.cols.join(","),
                    report.negated.0,
                    report.negated.1,
                )),
                None => out.push_str("PR box: NO\n"),
            }
            Ok(out)
        }
    }
}

fn enum_cap() -> Result<u64, Failure> {
    match std::env::var("MODALKIT_ENUM_CAP") {
        Err(_) => Ok(DEFAULT_ENUM_CAP),
        Ok(text) => usage(
            text.parse::<u64>()
                .with_context(|| format!("MODALKIT_ENUM_CAP must be an integer, got {text:?}")),
        ),
    }
}

fn run_enumerate(p: u64, dim: usize, format: Format) -> Result<String, Failure> {
    let field = field_for(p)?;
    let cap = enum_cap()?;
    let effects = usage(enumerate_effects_capped(field, dim, cap))?;
    let measurements = usage(enumerate_measurements_capped(field, dim, cap))?;

    match format {
        Format::Csv => Err(unsupported_csv()),
        Format::Json => to_json(&json!({
            "p": p,
            "dim": dim,
            "effects": effects,
            "measurements": measurements,
        })),
        Format::Text => {
            let mut out = format!("effects over GF({p}) in dimension {dim}: {}\n", effects.len());
            for e in &effects {
                out.push_str(&format!("{e}\n"));
            }
            out.push_str(&format!("measurements: {}\n", measurements.len()));
            for m in &measurements {
                let outcomes = m
                    .outcomes()
                    .map(|(label, effect)| format!("{label}={effect}"))
                    .collect::<Vec<_>>()
                    .join(" ");
                out.push_str(&format!("{}: {outcomes}\n", m.label()));
            }
            Ok(out)
        }
    }
}

fn run(cli: &Cli) -> Result<String, Failure> {
    match &cli.command {
        Command::Table { p } => run_table(*p, cli.format),
        Command::Coloring { file } => run_coloring(file.as_ref(), cli.format),
        Command::Localmodels { p } => run_localmodels(*p, cli.format),
        Command::Nosignal { p, symbolic } => run_nosignal(*p, *symbolic, cli.format),
        Command::Enumerate { p, dim } => run_enumerate(*p, *dim, cli.format),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let output = match run(&cli) {
        Ok(output) => output,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
        Err(Failure::Verification(e)) => {
            eprintln!("verification failure: {e:#}");
            return ExitCode::from(1);
        }
    };
    match &cli.out {
        None => {
            print!("{output}");
            ExitCode::SUCCESS
        }
        Some(path) => match fs::write(path, &output) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: writing {}: {e}", path.display());
                ExitCode::from(2)
            }
        },
    }
}
