mod args;
mod commands;
mod output;

use std::io::Write;
use std::process::ExitCode;

use anyhow::Result;
use clap::Parser;

use args::{Cli, Command, Format};
use output::{Manifest, OutDir};

fn verb(c: &Command) -> &'static str {
    match c {
        Command::Gen(_) => "gen",
        Command::Check(_) => "check",
        Command::Eval(_) => "eval",
        Command::Featmap(_) => "featmap",
        Command::Synthdb(_) => "synthdb",
        Command::Classify(_) => "classify",
        Command::Verify(_) => "verify",
        Command::Report => "report",
    }
}

fn dispatch(cli: &Cli, out: Option<&mut OutDir>) -> Result<commands::Outcome> {
    let c = &cli.common;
    match &cli.command {
        Command::Gen(a) => commands::gen(a, c),
        Command::Check(a) => commands::check(a, c),
        Command::Eval(a) => commands::eval(a, c),
        Command::Featmap(a) => commands::featmap(a, c, out),
        Command::Synthdb(a) => commands::synthdb(a, c, out),
        Command::Classify(a) => commands::classify(a, c, out),
        Command::Verify(a) => commands::verify(a, c, out),
        Command::Report => commands::report(c),
    }
}

fn finish(cli: &Cli, argv: &[String], out: &mut OutDir, outcome: &commands::Outcome) -> Result<()> {
    let name = verb(&cli.command);
    let ext = if cli.common.format == Format::Json { "json" } else { "txt" };
    let primary = format!("{name}.{ext}");
    if !out.written().contains(&primary) {
        out.write(&primary, outcome.body.as_bytes())?;
    }
    let manifest = Manifest {
        tool: "diffinv",
        version: env!("CARGO_PKG_VERSION"),
        argv,
        verb: name,
        seed: cli.common.seed,
        threads: cli.common.threads,
        inputs: &outcome.inputs,
        outputs: out.written().to_vec(),
        passed: outcome.passed,
        timestamp_unix: output::timestamp(),
    };
    out.write("manifest.json", (serde_json::to_string_pretty(&manifest)? + "\n").as_bytes())
}

fn run(cli: &Cli, argv: &[String]) -> Result<bool> {
    if let Some(n) = cli.common.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global()?;
    }
    let mut out = cli.common.out.as_deref().map(OutDir::open).transpose()?;
    let result = dispatch(cli, out.as_mut()).and_then(|o| {
        if let Some(dir) = out.as_mut() {
            finish(cli, argv, dir, &o)?;
        }
        Ok(o)
    });
    match result {
        Ok(o) => {
            std::io::stdout().write_all(o.body.as_bytes())?;
            Ok(o.passed)
        }
        Err(e) => {
            if let Some(dir) = out {
                dir.discard();
            }
            Err(e)
        }
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse_from(&argv);
    match run(&cli, &argv) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
