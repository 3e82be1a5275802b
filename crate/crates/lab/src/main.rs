use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qka_core::{Bits, Outcome, PositionPolicy, ProtocolKind};
use qka_lab::scenario::{parse_pair, parse_policy, parse_protocol, protocol_name};
use qka_lab::{probe, replay, run_campaign, stats, AdversaryKind, ForgeKind, LabError, ScenarioConfig};

#[derive(Parser)]
#[command(name = "qka-lab", version, about = "Circular multiparty quantum key agreement simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One seeded run; writes the transcript as JSON.
    Run {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Transcript path.
        #[arg(long, default_value = "transcript.json")]
        out: PathBuf,
    },
    /// Many runs with seeds seed, seed+1, ...; writes one CSV row.
    Montecarlo {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// CSV path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Detection probabilities and information gain of an entangling probe.
    AnalyzeProbe {
        /// a1r,a1i,a2r,a2i,a3r,a3i,a4r,a4i
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        /// Sixteen reals row by row, or "identity".
        #[arg(long, default_value = "identity", allow_hyphen_values = true)]
        gram: String,
    },
    /// Replays the reference worked example and counterfeit attack.
    ReproducePaper,
}

#[derive(Args)]
struct ScenarioArgs {
    #[arg(long, default_value = "secure", value_parser = |s: &str| parse_protocol(s).map_err(|e| e.to_string()))]
    protocol: ProtocolKind,
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long, default_value_t = 4)]
    m: usize,
    #[arg(long, default_value_t = 1)]
    ell: usize,
    /// Decoys per transmission; payload length when absent.
    #[arg(long)]
    d: Option<usize>,
    /// Tolerated decoy error rate.
    #[arg(long, default_value_t = 0.0)]
    threshold: f64,
    /// none, collusive2, strategy1 or intercept-resend.
    #[arg(long, default_value = "none", value_parser = |s: &str| s.parse::<AdversaryKind>().map_err(|e| e.to_string()))]
    adversary: AdversaryKind,
    /// Colluder ids, e.g. 1,3.
    #[arg(long, value_parser = |s: &str| parse_pair(s).map_err(|e| e.to_string()))]
    colluders: Option<(u32, u32)>,
    /// uniform, z or x.
    #[arg(long, default_value = "uniform", value_parser = |s: &str| s.parse::<ForgeKind>().map_err(|e| e.to_string()))]
    forge: ForgeKind,
    /// Key-control target over logical key positions.
    #[arg(long, value_parser = |s: &str| s.parse::<Bits>().map_err(|e| e.to_string()))]
    target: Option<Bits>,
    /// Tapped link FROM,TO for intercept-resend; 0 is the server.
    #[arg(long, value_parser = |s: &str| parse_pair(s).map_err(|e| e.to_string()))]
    channel: Option<(u32, u32)>,
    /// Only tap this circle's sequence.
    #[arg(long, conflicts_with = "all_circles")]
    circle: Option<u32>,
    /// Tap every sequence crossing the link.
    #[arg(long)]
    all_circles: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// uniform or last.
    #[arg(long, default_value = "uniform", value_parser = |s: &str| parse_policy(s).map_err(|e| e.to_string()))]
    policy: PositionPolicy,
}

impl ScenarioArgs {
    fn into_config(self, trials: usize) -> ScenarioConfig {
        ScenarioConfig {
            protocol: self.protocol,
            n: self.n,
            m: self.m,
            ell: self.ell,
            decoys: self.d,
            threshold: self.threshold,
            adversary: self.adversary,
            colluders: self.colluders,
            forge: self.forge,
            target: self.target,
            channel: self.channel,
            tap_circle: self.circle,
            tap_all_circles: self.all_circles,
            seed: self.seed,
            trials,
            policy: self.policy,
            debug_states: qka_lab::debug_states_from_env(),
        }
    }
}

fn cmd_run(cfg: ScenarioConfig, out: PathBuf) -> Result<(), LabError> {
    cfg.validate()?;
    let spec = cfg.adversary_spec()?;
    let report = cfg.run_trial(spec.as_ref(), 0)?;
    let mut w = BufWriter::new(File::create(&out)?);
    serde_json::to_writer_pretty(&mut w, &report)?;
    w.flush()?;

    println!("protocol {} n={} m={} ell={} seed={}", protocol_name(cfg.protocol), cfg.n, cfg.m, cfg.ell, cfg.seed);
    match &report.outcome {
        Outcome::Completed { keys } => {
            println!("completed");
            for (p, k) in keys {
                println!("  {p}: {k}");
            }
        }
        Outcome::Aborted { phase, circle, hop, reason, detector } => {
            println!("aborted in {phase:?} on circle {circle} hop {hop}, detected by {detector}: {reason}");
        }
    }
    if let Some(shadow) = &report.shadow {
        for (victim, key) in &shadow.stolen {
            println!("  colluders hold key of {victim}: {}", key.bits);
        }
    }
    if let Some(spec) = &spec {
        println!("attack {}: {}", spec.name(), if spec.succeeded(&report) { "succeeded" } else { "failed" });
    }
    println!("transcript written to {}", out.display());
    Ok(())
}

fn cmd_montecarlo(cfg: ScenarioConfig, out: Option<PathBuf>) -> Result<(), LabError> {
    let s = run_campaign(&cfg)?;
    match out {
        Some(path) => stats::write_csv(BufWriter::new(File::create(path)?), &cfg, &s),
        None => stats::write_csv(io::stdout().lock(), &cfg, &s),
    }
}

fn cmd_analyze_probe(alpha: &str, gram: &str) -> Result<(), LabError> {
    let report = probe::analyze(probe::parse_alpha(alpha)?, probe::parse_gram(gram)?)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn cmd_reproduce() -> Result<bool, LabError> {
    let results = replay::reproduce()?;
    let mut all = true;
    for (group, a) in &results {
        let mark = if a.passed { "PASS" } else { "FAIL" };
        println!("{mark} [{group}] {}: expected {}, found {}", a.name, a.expected, a.found);
        all &= a.passed;
    }
    let passed = results.iter().filter(|(_, a)| a.passed).count();
    println!("{passed}/{} assertions passed", results.len());
    Ok(all)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Command::Run { scenario, out } => cmd_run(scenario.into_config(1), out).map(|_| true),
        Command::Montecarlo { scenario, trials, out } => {
            cmd_montecarlo(scenario.into_config(trials), out).map(|_| true)
        }
        Command::AnalyzeProbe { alpha, gram } => cmd_analyze_probe(&alpha, &gram).map(|_| true),
        Command::ReproducePaper => cmd_reproduce(),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
