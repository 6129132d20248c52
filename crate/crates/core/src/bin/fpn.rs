use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fpn::certify::certify_effective_distance;
use fpn::circuit::{build_memory_circuit, NoisyCircuit};
use fpn::code::{resolve_code, Basis};
use fpn::decode::DecoderOptions;
use fpn::dem::{extract_hypergraph, DecodingHypergraph, Renorm};
use fpn::experiment::{make_decoder, rows_to_csv, run_experiment, BerRow, DecoderKind, ExperimentConfig};
use fpn::layout::{build_fpn, build_naive_layout, layout_metrics, FpnLayout};
use fpn::schedule::{schedule_layout, verify_fpn_schedule, CnotSchedule, TimingModel};
use fpn::sim::{check_determinism, decode_batch, estimate_ber, sample, SyndromeBatch};
use fpn::{Error, Result};

/// Flag-proxy network toolkit: layouts, schedules, noisy circuits, decoding and certificates.
#[derive(Parser)]
#[command(name = "fpn", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a layout (naive or flag-proxy network) for a code.
    Build {
        /// Code JSON file or generator spec (rotated:D, toric:D, color:D).
        #[arg(long)]
        code: String,
        /// Degree budget of the flag-proxy network; omit for the flagless naive layout.
        #[arg(long)]
        degree_budget: Option<usize>,
        #[arg(long)]
        no_sharing: bool,
        /// Check the code distance by brute force when loading a file.
        #[arg(long)]
        verify_distance: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Schedule the CNOTs of a layout and verify the result.
    Schedule {
        #[arg(long)]
        layout: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Lower a layout and schedule into a noisy memory-experiment circuit.
    Circuit {
        #[arg(long)]
        layout: PathBuf,
        #[arg(long)]
        schedule: PathBuf,
        #[arg(long)]
        rounds: usize,
        #[arg(long, value_parser = parse_basis)]
        basis: Basis,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Extract the decoding hypergraph of a circuit.
    Dem {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sample detector, flag and observable bits.
    Sample {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decode sampled shots; writes one CSV row per shot.
    Decode {
        #[arg(long)]
        dem: PathBuf,
        #[arg(long)]
        shots: PathBuf,
        #[command(flatten)]
        dec: DecoderArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate the logical error rate of a circuit, or run a whole experiment config.
    Ber {
        /// Experiment config (JSON); runs every stage for each p.
        #[arg(long, conflicts_with_all = ["circuit", "trials", "seed"])]
        config: Option<PathBuf>,
        #[arg(long, required_unless_present = "config")]
        circuit: Option<PathBuf>,
        #[command(flatten)]
        dec: DecoderArgs,
        #[arg(long, required_unless_present = "config")]
        trials: Option<usize>,
        #[arg(long, required_unless_present = "config")]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Certify that no combination of up to w faults defeats the decoder.
    Certify {
        #[arg(long)]
        circuit: PathBuf,
        #[command(flatten)]
        dec: DecoderArgs,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        w: u8,
        /// Sample this many fault pairs when w = 2 has more.
        #[arg(long)]
        pair_budget: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print architectural metrics of a layout as JSON.
    Metrics {
        #[arg(long)]
        layout: PathBuf,
    },
}

#[derive(Args)]
struct DecoderArgs {
    #[arg(long, default_value = "mwpm", value_parser = parse_decoder)]
    decoder: DecoderKind,
    #[arg(long, default_value = "paper", value_parser = parse_renorm)]
    renorm: Renorm,
    /// Decode as if no flag ever fired.
    #[arg(long)]
    ignore_flags: bool,
}

impl DecoderArgs {
    fn options(&self) -> DecoderOptions {
        DecoderOptions { use_flags: !self.ignore_flags, renorm: self.renorm }
    }
}

fn parse_basis(s: &str) -> std::result::Result<Basis, String> {
    match s {
        "X" | "x" => Ok(Basis::X),
        "Z" | "z" => Ok(Basis::Z),
        _ => Err(format!("expected X or Z, got {s:?}")),
    }
}

fn parse_decoder(s: &str) -> std::result::Result<DecoderKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_renorm(s: &str) -> std::result::Result<Renorm, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io { path: path.into(), source: e })
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::Io { path: path.into(), source: e })
}

fn load_circuit(path: &Path) -> Result<NoisyCircuit> {
    NoisyCircuit::from_text(&read(path)?)
}

fn load_dem(path: &Path) -> Result<DecodingHypergraph> {
    DecodingHypergraph::from_json(&read(path)?)
}

/// Outcome of a subcommand that ran to completion: whether its check passed.
type Outcome = Result<bool>;

fn run(cmd: Cmd) -> Outcome {
    match cmd {
        Cmd::Build { code, degree_budget, no_sharing, verify_distance, out } => {
            let code = resolve_code(&code, verify_distance)?;
            let layout = match degree_budget {
                None => build_naive_layout(&code),
                Some(d) => build_fpn(&code, d, !no_sharing)?,
            };
            write(&out, layout.to_json())?;
            Ok(true)
        }
        Cmd::Schedule { layout, out } => {
            let layout = FpnLayout::from_json(&read(&layout)?)?;
            let schedule = schedule_layout(&layout)?;
            let violations = verify_fpn_schedule(&schedule, &layout);
            for v in &violations {
                eprintln!("violation: {v}");
            }
            write(&out, schedule.to_json(&TimingModel::default()))?;
            Ok(violations.is_empty())
        }
        Cmd::Circuit { layout, schedule, rounds, basis, p, out } => {
            let layout = FpnLayout::from_json(&read(&layout)?)?;
            let schedule = CnotSchedule::from_json(&read(&schedule)?)?;
            let circuit = build_memory_circuit(&layout, &schedule, rounds, basis, p)?;
            check_determinism(&circuit.without_noise(), 8, 0)?;
            write(&out, circuit.to_text())?;
            Ok(true)
        }
        Cmd::Dem { circuit, out } => {
            let hg = extract_hypergraph(&load_circuit(&circuit)?)?;
            let ambiguous = hg.ambiguous_pairs();
            if !ambiguous.is_empty() {
                eprintln!("{} hyperedge pairs share detectors and flags but flip different observables", ambiguous.len());
            }
            write(&out, hg.to_json())?;
            Ok(true)
        }
        Cmd::Sample { circuit, trials, seed, out } => {
            if trials == 0 {
                return Err(Error::Validation("trials must be at least 1".into()));
            }
            write(&out, sample(&load_circuit(&circuit)?, trials, seed).to_bytes())?;
            Ok(true)
        }
        Cmd::Decode { dem, shots, dec, out } => {
            let hg = load_dem(&dem)?;
            let bytes = std::fs::read(&shots).map_err(|e| Error::Io { path: shots.clone(), source: e })?;
            let batch = SyndromeBatch::from_bytes(&bytes)?;
            if batch.detectors.cols() != hg.detectors.len() || batch.flags.cols() != hg.flag_bits.len() {
                return Err(Error::Validation("shot widths do not match the hypergraph".into()));
            }
            let decoder = make_decoder(dec.decoder, &hg, dec.options())?;
            let results = decode_batch(&batch, decoder.as_ref());
            let bits = |f: &dyn Fn(usize) -> bool| -> String {
                (0..batch.observables.cols()).map(|o| if f(o) { '1' } else { '0' }).collect()
            };
            let mut csv = String::from("shot,failed,predicted,observed,correct\n");
            let mut wrong = 0usize;
            for (t, r) in results.iter().enumerate() {
                let predicted = bits(&|o| r.frames.len() > o && r.frames.get(o));
                let observed = bits(&|o| batch.observables.get(t, o));
                let correct = !r.failed && predicted == observed;
                wrong += !correct as usize;
                csv.push_str(&format!("{t},{},{predicted},{observed},{}\n", r.failed as u8, correct as u8));
            }
            eprintln!("{wrong} of {} shots decoded incorrectly", results.len());
            write(&out, csv)?;
            Ok(true)
        }
        Cmd::Ber { config: Some(config), out, .. } => {
            let mut cfg = ExperimentConfig::from_json(&read(&config)?)?;
            if out.is_some() {
                cfg.csv = out;
            }
            let result = run_experiment(&cfg)?;
            if cfg.csv.is_none() {
                print!("{}", rows_to_csv(&result.rows));
            }
            Ok(true)
        }
        Cmd::Ber { circuit, dec, trials, seed, out, .. } => {
            let (Some(circuit), Some(trials), Some(seed)) = (circuit, trials, seed) else {
                unreachable!("clap enforces these without --config")
            };
            if trials == 0 {
                return Err(Error::Validation("trials must be at least 1".into()));
            }
            let circuit = load_circuit(&circuit)?;
            let hg = extract_hypergraph(&circuit)?;
            let decoder = make_decoder(dec.decoder, &hg, dec.options())?;
            let r = estimate_ber(&circuit, decoder.as_ref(), trials, seed);
            let csv = rows_to_csv(&[BerRow::new(circuit.p, circuit.rounds, &r)]);
            match out {
                Some(path) => write(&path, csv)?,
                None => print!("{csv}"),
            }
            Ok(true)
        }
        Cmd::Certify { circuit, dec, w, pair_budget, seed, out } => {
            let circuit = load_circuit(&circuit)?;
            let hg = extract_hypergraph(&circuit)?;
            let decoder = make_decoder(dec.decoder, &hg, dec.options())?;
            let cert = certify_effective_distance(&circuit, decoder.as_ref(), w as usize, pair_budget, seed)?;
            let json = cert.to_json();
            match out {
                Some(path) => write(&path, json)?,
                None => println!("{json}"),
            }
            eprintln!("certificate w={w}: {}", if cert.pass { "pass" } else { "fail" });
            Ok(cert.pass)
        }
        Cmd::Metrics { layout } => {
            let layout = FpnLayout::from_json(&read(&layout)?)?;
            println!("{}", serde_json::to_string_pretty(&layout_metrics(&layout)).expect("metrics serialize"));
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli.cmd) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
