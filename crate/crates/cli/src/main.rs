use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sslevel3_cli::{list, run, Config, Report};

#[derive(Parser)]
#[command(name = "sslevel3", version, about = "Verify level-3 and deformation claims for y^2 + y = x^3 over F4")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Args)]
struct Opts {
    /// 2-adic precision k of W_k(F4)
    #[arg(long = "padic-precision", value_name = "k", default_value_t = Config::default().k, global = true)]
    k: u32,
    /// a1-adic truncation m
    #[arg(long = "a1-truncation", value_name = "m", default_value_t = Config::default().m, global = true)]
    m: u32,
    /// series order N
    #[arg(long = "series-order", value_name = "N", default_value_t = Config::default().n, global = true)]
    n: u32,
    #[arg(long, value_enum, global = true)]
    format: Option<Format>,
    #[arg(long, value_enum, default_value_t = Switch::On, global = true)]
    parallel: Switch,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Subcommand)]
enum Command {
    /// Run the named checks, or all of them
    Verify { checks: Vec<String> },
    /// List the check catalog
    List,
    /// Run every check and print the report (JSON unless --format text)
    Report,
}

fn emit(report: &Report, format: Format) -> ExitCode {
    match format {
        Format::Text => print!("{}", report.to_text()),
        Format::Json => println!("{}", report.to_json()),
    }
    ExitCode::from(report.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let o = &cli.opts;
    let config = Config {
        k: o.k,
        m: o.m,
        n: o.n,
    };
    let parallel = o.parallel == Switch::On;
    let (names, format) = match &cli.command {
        Command::List => {
            let entries = list();
            if o.format == Some(Format::Json) {
                let v: Vec<_> = entries
                    .iter()
                    .map(|(name, anchor)| serde_json::json!({ "name": name, "anchor": anchor }))
                    .collect();
                println!("{}", serde_json::to_string_pretty(&v).expect("serializes"));
            } else {
                let width = entries.iter().map(|(n, _)| n.len()).max().unwrap_or(0);
                for (name, anchor) in entries {
                    println!("{name:<width$}  {anchor}");
                }
            }
            return ExitCode::SUCCESS;
        }
        Command::Verify { checks } => (checks.clone(), o.format.unwrap_or(Format::Text)),
        Command::Report => (Vec::new(), o.format.unwrap_or(Format::Json)),
    };
    match run(&names, config, parallel) {
        Ok(report) => emit(&report, format),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
