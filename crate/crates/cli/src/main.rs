use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use fockforge::cores::{amplitude, BasisSpec, CoreKind};
use fockforge::device::{Device, SimOptions};
use fockforge::measurement::{ket_label, ProbabilityBins, Readout};
use fockforge::modes::ModeMap;
use fockforge::samplers::{histogram, sample, SampleConfig, SamplerKind};
use fockforge::{Error, Ket, State};

mod bench;

const DECIMALS: usize = 9;

#[derive(Parser)]
#[command(name = "fockforge", version, about = "Linear-optical circuit simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Transform the device input and run the detection pipeline.
    Run {
        device: PathBuf,
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Single transition amplitude from the device input ket to `ket`.
    Amp {
        device: PathBuf,
        /// Output occupations, e.g. `1,0,1` or `[1,0,1]`.
        ket: String,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Draw output samples without computing the full distribution.
    Sample {
        device: PathBuf,
        #[arg(long, default_value = "clifford")]
        method: String,
        #[arg(long = "n", default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        burn_in: usize,
        #[arg(long, default_value_t = 10)]
        thinning: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Accumulate a density matrix over independent runs.
    Ensemble {
        device: PathBuf,
        #[arg(long, default_value_t = 1000)]
        runs: u64,
        /// Drop labels whose diagonal share of the trace is below this.
        #[arg(long, default_value_t = 0.0)]
        truncate: f64,
        /// Normalize by the trace instead of the run count.
        #[arg(long)]
        renormalize: bool,
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Timings on random unitary circuits.
    Bench(bench::BenchArgs),
    /// Check a device file without simulating it.
    Validate { device: PathBuf },
}

#[derive(Args)]
struct SimArgs {
    #[arg(long, default_value = "direct")]
    core: String,
    /// `full`, `restricted` or `file=<kets.json>`.
    #[arg(long, default_value = "full")]
    basis: String,
    #[arg(long, value_enum, default_value_t = Switch::On)]
    losses: Switch,
    #[arg(long)]
    keep_loss_modes: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Runs per bin for dark counts and dead time.
    #[arg(long, default_value_t = 1000)]
    trials: usize,
}

#[derive(Args)]
struct OutArgs {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

/// Exit 2: the input is invalid. Exit 3: the numerics failed.
enum Failure {
    Invalid(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Gain(_) | Error::ZeroNorm | Error::Sampler(_) | Error::DegeneratePacket { .. } => {
                Failure::Numerical(e.to_string())
            }
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    if let Ok(v) = std::env::var("FOCKFORGE_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: FOCKFORGE_THREADS must be a positive integer");
                return ExitCode::from(2);
            }
        }
    }
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("numerical failure: {m}");
            ExitCode::from(3)
        }
    }
}

fn dispatch(cmd: Command) -> CliResult<()> {
    match cmd {
        Command::Run { device, sim, out } => cmd_run(&device, &sim, &out),
        Command::Amp { device, ket, out } => cmd_amp(&device, &ket, &out),
        Command::Sample {
            device,
            method,
            n,
            seed,
            burn_in,
            thinning,
            out,
        } => {
            let cfg = SampleConfig {
                nsamples: n,
                seed,
                burn_in,
                thinning,
            };
            cmd_sample(&device, &method, &cfg, &out)
        }
        Command::Ensemble {
            device,
            runs,
            truncate,
            renormalize,
            sim,
            out,
        } => cmd_ensemble(&device, runs, truncate, renormalize, &sim, &out),
        Command::Bench(args) => {
            let report = bench::run(&args)?;
            emit(&args.out, &report)
        }
        Command::Validate { device } => {
            let d = load(&device)?;
            let circuit = d.circuit()?;
            let input = d.input()?;
            let photons = input.terms().next().map(|(_, k)| k.photons()).unwrap_or(0);
            println!(
                "ok: {} channels, {} modes, {} packets, {} input photons, {} detectors{}",
                d.nchannels(),
                circuit.nmodes(),
                d.packets().nbase(),
                photons,
                d.detectors().len(),
                if d.has_sources() { ", stochastic sources" } else { "" }
            );
            Ok(())
        }
    }
}

fn load(path: &Path) -> CliResult<Device> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
    Device::from_json(&text).map_err(|e| match Failure::from(e) {
        Failure::Invalid(m) => Failure::Invalid(format!("{}: {m}", path.display())),
        f => f,
    })
}

fn parse_basis(s: &str) -> CliResult<BasisSpec> {
    match s {
        "full" => Ok(BasisSpec::Full),
        "restricted" => Ok(BasisSpec::Restricted),
        _ => {
            let path = s
                .strip_prefix("file=")
                .ok_or_else(|| Failure::Invalid(format!("unknown basis '{s}'")))?;
            let text =
                fs::read_to_string(path).map_err(|e| Failure::Invalid(format!("{path}: {e}")))?;
            let kets: Vec<Vec<u8>> = serde_json::from_str(&text)
                .map_err(|e| Failure::Invalid(format!("{path}: {e}")))?;
            Ok(BasisSpec::UserList(kets.into_iter().map(Ket::new).collect()))
        }
    }
}

fn sim_options(a: &SimArgs) -> CliResult<SimOptions> {
    Ok(SimOptions {
        core: a.core.parse::<CoreKind>()?,
        basis: parse_basis(&a.basis)?,
        losses: a.losses == Switch::On,
        keep_loss_modes: a.keep_loss_modes,
        trials: a.trials,
        seed: a.seed,
    })
}

fn emit(out: &OutArgs, text: &str) -> CliResult<()> {
    match &out.out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Invalid(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn fmt(x: f64) -> String {
    format!("{x:.DECIMALS$}")
}

fn state_json(s: &State) -> Value {
    Value::Array(
        s.to_records()
            .into_iter()
            .map(|r| json!({"ket": r.ket, "re": r.re, "im": r.im}))
            .collect(),
    )
}

fn state_text(s: &State, modes: Option<&ModeMap>) -> String {
    let mut out = String::new();
    for (a, k) in s.sorted_terms() {
        let label = match modes {
            Some(m) if m.polarized() || m.npackets() > 1 => ket_label(&k, m),
            _ => fockforge::measurement::compact(&k),
        };
        let sign = if a.im < 0.0 { '-' } else { '+' };
        out.push_str(&format!("{label}: {} {sign} {} j\n", fmt(a.re), fmt(a.im.abs())));
    }
    out
}

fn bins_json(b: &ProbabilityBins) -> Value {
    Value::Array(
        b.iter()
            .map(|(k, p)| json!({"ket": k.as_slice(), "label": b.label(k), "p": p}))
            .collect(),
    )
}

fn cmd_run(path: &Path, sim: &SimArgs, out: &OutArgs) -> CliResult<()> {
    let d = load(path)?;
    let opts = sim_options(sim)?;
    let r = d.run(&opts)?;
    let success = r.success;
    let text = match out.format {
        Format::Json => {
            let v = json!({
                "output": state_json(&r.output),
                "post_selected": r.post_selected.as_ref().map(state_json),
                "bins": bins_json(&r.bins),
                "success_probability": success,
            });
            serde_json::to_string_pretty(&v).expect("json") + "\n"
        }
        Format::Csv => {
            eprintln!("success probability: {}", fmt(success));
            r.bins.to_csv()
        }
        Format::Text => {
            let mut s = String::new();
            if let Some(ps) = &r.post_selected {
                s.push_str("post-selected state:\n");
                s.push_str(&state_text(ps, Some(&r.out_modes)));
            }
            s.push_str("outcome probabilities:\n");
            for (k, p) in r.bins.iter() {
                s.push_str(&format!("{}: {}\n", r.bins.label(k), fmt(p)));
            }
            s.push_str(&format!("success probability: {}\n", fmt(success)));
            s
        }
    };
    emit(out, &text)
}

fn parse_ket(s: &str) -> CliResult<Ket> {
    let body = s.trim().trim_start_matches('[').trim_end_matches(']');
    body.split(',')
        .map(|x| x.trim().parse::<u8>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map(Ket::new)
        .map_err(|e| Failure::Invalid(format!("ket '{s}': {e}")))
}

fn single_ket(d: &Device) -> CliResult<Ket> {
    let input = d.input()?;
    if input.len() != 1 || d.has_sources() {
        return Err(Failure::Invalid("this command needs a single-ket input without sources".into()));
    }
    let ket = input.terms().next().map(|(_, k)| k.clone()).expect("one term");
    Ok(ket)
}

fn cmd_amp(path: &Path, ket: &str, out: &OutArgs) -> CliResult<()> {
    let d = load(path)?;
    let input = single_ket(&d)?;
    let output = parse_ket(ket)?;
    let a = amplitude(&input, &output, &d.circuit()?.matrix())?;
    let text = match out.format {
        Format::Json => format!("{}\n", json!({"ket": output.as_slice(), "re": a.re, "im": a.im, "p": a.norm_sqr()})),
        Format::Csv => format!("ket,re,im,probability\n\"{}\",{},{},{}\n", output, fmt(a.re), fmt(a.im), fmt(a.norm_sqr())),
        Format::Text => format!("{}: {} {} {} j\n", output, fmt(a.re), if a.im < 0.0 { '-' } else { '+' }, fmt(a.im.abs())),
    };
    emit(out, &text)
}

fn cmd_sample(path: &Path, method: &str, cfg: &SampleConfig, out: &OutArgs) -> CliResult<()> {
    let d = load(path)?;
    let input = single_ket(&d)?;
    let kind: SamplerKind = method.parse()?;
    let samples = sample(kind, &input, &d.circuit()?.matrix(), cfg)?;
    let hist = histogram(&samples);
    let n = samples.len() as f64;
    let text = match out.format {
        Format::Json => {
            let rows: Vec<Value> = hist
                .iter()
                .map(|(k, &c)| json!({"ket": k.as_slice(), "count": c, "frequency": c as f64 / n}))
                .collect();
            serde_json::to_string_pretty(&json!({"method": method, "samples": samples.len(), "histogram": rows}))
                .expect("json")
                + "\n"
        }
        _ => {
            let mut s = String::from("ket,count,frequency\n");
            for (k, &c) in &hist {
                s.push_str(&format!("\"{}\",{},{}\n", fockforge::measurement::compact(k), c, fmt(c as f64 / n)));
            }
            s
        }
    };
    emit(out, &text)
}

fn cmd_ensemble(path: &Path, runs: u64, truncate: f64, renormalize: bool, sim: &SimArgs, out: &OutArgs) -> CliResult<()> {
    if runs == 0 {
        return Err(Failure::Invalid("--runs must be at least 1".into()));
    }
    let d = load(path)?;
    let opts = sim_options(sim)?;
    let dm = d.ensemble(runs, &opts)?;
    let dm = if truncate > 0.0 { dm.truncated(truncate) } else { dm }.sorted();
    let readout = if renormalize { Readout::Trace } else { Readout::Runs };
    let modes = d.ensemble_modes();
    let text = match out.format {
        Format::Text => dm.listing(&modes, readout, DECIMALS)?,
        Format::Json => {
            let m = dm.matrix(readout)?;
            let n = dm.dim();
            let re: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| m[(i, j)].re).collect()).collect();
            let im: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| m[(i, j)].im).collect()).collect();
            let labels: Vec<Value> = dm
                .labels()
                .iter()
                .map(|k| json!({"ket": k.as_slice(), "label": ket_label(k, &modes)}))
                .collect();
            serde_json::to_string_pretty(&json!({
                "runs": dm.runs(),
                "accepted_fraction": dm.trace() / dm.runs() as f64,
                "labels": labels,
                "re": re,
                "im": im,
            }))
            .expect("json")
                + "\n"
        }
        Format::Csv => {
            let m = dm.matrix(readout)?;
            let labels: Vec<String> = dm.labels().iter().map(|k| ket_label(k, &modes)).collect();
            let mut s = String::from("row,col,re,im\n");
            for (i, a) in labels.iter().enumerate() {
                for (j, b) in labels.iter().enumerate() {
                    s.push_str(&format!("\"{a}\",\"{b}\",{},{}\n", fmt(m[(i, j)].re), fmt(m[(i, j)].im)));
                }
            }
            s
        }
    };
    emit(out, &text)
}
