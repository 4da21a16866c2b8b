use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use memevo::config::{Formulation, ScenarioConfig, StabilityConfig};
use memevo::io::write_json;
use memevo::scenario::{builtin_decay_config, run_config, verify_suite, Verdict, SUITES};
use memevo::{Error, Result};

#[derive(Parser)]
#[command(name = "memevo", version, about = "Evolution equations with memory in three formulations")]
struct Cli {
    /// Scenario file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; defaults to the config's `output.dir`, else `out`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for the per-mode loops.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the formulation named in the config.
    Simulate,
    /// Run every formulation the initial source allows and compare them.
    Compare,
    /// State run with decay fit and Lyapunov margins.
    Decay,
    /// Run a verification suite, or `all`; nonzero exit on any failure.
    Verify { suite: String },
    /// Write the full record of a gallery example.
    Gallery { name: String },
}

fn load(path: &Option<PathBuf>) -> Result<Option<(ScenarioConfig, PathBuf)>> {
    let Some(p) = path else { return Ok(None) };
    let cfg = ScenarioConfig::load(p)?;
    let base = p.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(Some((cfg, base)))
}

fn need(cfg: Option<(ScenarioConfig, PathBuf)>) -> Result<(ScenarioConfig, PathBuf)> {
    cfg.ok_or_else(|| Error::Config("this command needs --config".into()))
}

fn print<T: serde::Serialize>(v: &T) {
    println!("{}", serde_json::to_string_pretty(v).unwrap_or_default());
}

fn run(cli: Cli) -> Result<bool> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    let cfg = load(&cli.config)?;
    let out = cli.out.clone().or_else(|| cfg.as_ref().map(|(c, _)| c.output.dir.clone())).unwrap_or_else(|| PathBuf::from("out"));
    match cli.command {
        Command::Simulate | Command::Compare => {
            let (c, base) = need(cfg)?;
            let form = if matches!(cli.command, Command::Compare) { Formulation::CompareAll } else { c.run.formulation };
            let s = run_config(&c, &base, form, c.stability.as_ref(), &out)?;
            print(&s);
            Ok(s.pass)
        }
        Command::Decay => {
            let (c, base) = cfg.unwrap_or_else(|| (builtin_decay_config(40.0, 2e-3), PathBuf::new()));
            let stab = c.stability.clone().unwrap_or(StabilityConfig { delta: 1.0, beta: None });
            let s = run_config(&c, &base, Formulation::State, Some(&stab), &out)?;
            print(&s);
            Ok(s.pass)
        }
        Command::Verify { suite } => {
            let names: Vec<&str> = if suite == "all" { SUITES.to_vec() } else { vec![suite.as_str()] };
            let mut verdicts: Vec<Verdict> = Vec::new();
            for name in names {
                let v = verify_suite(name, cfg.as_ref().map(|(c, b)| (c, b.as_path())), &out.join(name))?;
                eprintln!("{} {name}", if v.pass { "PASS" } else { "FAIL" });
                verdicts.push(v);
            }
            write_json(&out.join("verdict.json"), &verdicts)?;
            print(&verdicts.iter().map(|v| (&v.suite, v.pass)).collect::<Vec<_>>());
            Ok(verdicts.iter().all(|v| v.pass))
        }
        Command::Gallery { name } => {
            if !["exnn", "kappa", "cantor", "exinj", "muntz"].contains(&name.as_str()) {
                return Err(Error::Config(format!("unknown gallery example `{name}`; known: exnn, kappa, cantor, exinj, muntz")));
            }
            let v = verify_suite(&name, None, &out)?;
            write_json(&out.join(format!("{name}.json")), &v.details)?;
            print(&v.details);
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("memevo: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
