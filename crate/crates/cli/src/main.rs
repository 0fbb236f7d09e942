//! `arimoto`: channel capacity and convergence-rate analysis from the command line.

mod failure;
mod io;
mod pipeline;
mod report;
mod reproduce;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use failure::Failure;
use pipeline::{AnalyzeSettings, EvalPoint, Settings};

#[derive(Parser)]
#[command(
    name = "arimoto",
    version,
    about = "Channel capacity and Arimoto convergence-rate analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Capacity, optimal input and output distributions of a channel.
    Capacity {
        input: PathBuf,
        #[command(flatten)]
        tol: TolArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Local analysis at the optimum, predicted rate and measured convergence.
    Analyze {
        input: PathBuf,
        /// Interior starting distribution, comma separated (default uniform).
        #[arg(long, value_delimiter = ',')]
        init: Option<Vec<f64>>,
        #[arg(long, default_value_t = 500)]
        iters: usize,
        #[arg(long, value_enum, default_value_t = EvalPoint::Refined)]
        eval_point: EvalPoint,
        /// Include the Hessians in the report.
        #[arg(long)]
        hessians: bool,
        #[command(flatten)]
        tol: TolArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Recompute the worked examples on the built-in fixtures.
    Reproduce {
        /// Examples to run: a list (4,6) or a range (4..8). Default: all.
        #[arg(long, value_parser = parse_examples)]
        examples: Option<ExampleSet>,
        #[arg(long)]
        quiet: bool,
    },
}

#[derive(Args)]
struct TolArgs {
    /// Weight above which an input counts as used (defaults to --tol-equal
    /// when only that is given, otherwise 1e-6).
    #[arg(long)]
    tol_support: Option<f64>,
    /// Divergence gap below which an unused input counts as tied (default 1e-6).
    #[arg(long)]
    tol_equal: Option<f64>,
}

impl TolArgs {
    fn settings(&self) -> Settings {
        Settings {
            tol_support: self.tol_support.or(self.tol_equal).unwrap_or(1e-6),
            tol_equal: self.tol_equal.unwrap_or(1e-6),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Emit {
    Human,
    Json,
    Csv,
}

#[derive(Args)]
struct OutArgs {
    /// Format written to stdout.
    #[arg(long, value_enum, default_value_t = Emit::Human)]
    emit: Emit,
    /// Also write the JSON report (and curve CSV) into this directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Print nothing to stdout.
    #[arg(long)]
    quiet: bool,
}

#[derive(Clone, Debug)]
struct ExampleSet(Vec<u8>);

fn parse_examples(s: &str) -> Result<ExampleSet, String> {
    let one = |t: &str| -> Result<u8, String> {
        let n: u8 = t
            .trim()
            .parse()
            .map_err(|_| format!("{t:?} is not an example number"))?;
        if (4..=8).contains(&n) {
            Ok(n)
        } else {
            Err(format!("example {n} does not exist (choose from 4 to 8)"))
        }
    };
    let mut out = Vec::new();
    for part in s.split(',') {
        match part.split_once("..") {
            Some((a, b)) => {
                let (a, b) = (one(a)?, one(b.trim_start_matches('='))?);
                if a > b {
                    return Err(format!("empty range {part}"));
                }
                out.extend(a..=b);
            }
            None => out.push(one(part)?),
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(ExampleSet(out))
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("reports serialize") + "\n"
}

fn emit(out: &OutArgs, human: String, json_text: &str, csv: Option<&str>) {
    if out.quiet {
        return;
    }
    match out.emit {
        Emit::Human => print!("{human}"),
        Emit::Json => print!("{json_text}"),
        Emit::Csv => print!("{}", csv.unwrap_or_default()),
    }
}

fn write_outputs(
    dir: &Path,
    name: &str,
    json_text: &str,
    csv: Option<&str>,
) -> Result<(), Failure> {
    io::write_file(dir, &format!("{name}.json"), json_text)?;
    if let Some(csv) = csv {
        io::write_file(dir, &format!("{name}.curve.csv"), csv)?;
    }
    Ok(())
}

fn capacity_csv(r: &report::CapacityReport) -> String {
    let mut s = String::from("i,lambda_star,divergence\n");
    for (i, (l, d)) in r
        .solution
        .lambda_star
        .iter()
        .zip(&r.solution.divergences)
        .enumerate()
    {
        s.push_str(&format!("{},{l:.16e},{d:.16e}\n", i + 1));
    }
    s
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Capacity { input, tol, out } => {
            let file = io::read_channel(&input)?;
            let r = pipeline::capacity(&file, &tol.settings())?;
            let text = json(&r);
            let csv = capacity_csv(&r);
            if let Some(dir) = &out.out_dir {
                write_outputs(dir, &r.name, &text, None)?;
            }
            emit(&out, r.render(), &text, Some(&csv));
        }
        Command::Analyze {
            input,
            init,
            iters,
            eval_point,
            hessians,
            tol,
            out,
        } => {
            let file = io::read_channel(&input)?;
            let settings = AnalyzeSettings {
                tolerances: tol.settings(),
                init,
                iters,
                eval_point,
                hessians,
            };
            let a = pipeline::analyze_channel(&file, &settings)?;
            let text = json(&a.report);
            if let Some(dir) = &out.out_dir {
                write_outputs(dir, &a.report.name, &text, a.curve.as_deref())?;
            }
            emit(&out, a.report.render(), &text, a.curve.as_deref());
        }
        Command::Reproduce { examples, quiet } => {
            let examples = examples.map_or_else(|| (4..=8).collect(), |e| e.0);
            let rows = reproduce::run(&examples);
            let failed = rows.iter().filter(|r| !r.pass).count();
            if !quiet {
                for r in &rows {
                    println!("{}", r.line());
                }
                println!("{} of {} rows pass", rows.len() - failed, rows.len());
            }
            if failed > 0 {
                return Err(Failure::Reproduction(failed, rows.len()));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
