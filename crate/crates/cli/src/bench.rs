use std::time::Instant;

use clap::Args;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use fockforge::cores::{amplitude, transform, BasisSpec, CoreKind};
use fockforge::linalg::random_unitary;
use fockforge::{Ket, State};

use crate::{fmt, CliResult, Failure, Format, OutArgs};

#[derive(Args)]
pub struct BenchArgs {
    /// Full-distribution rows as `photons:channels`, comma separated.
    #[arg(long, default_value = "2:4,3:6,4:8,5:10,6:12,7:14")]
    grid: String,
    /// Single-amplitude rows, same syntax.
    #[arg(long, default_value = "10:20,15:30,20:40")]
    amp: String,
    /// `direct`, `glynn` or `all`.
    #[arg(long, default_value = "all")]
    core: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    pub out: OutArgs,
}

pub struct Timing {
    pub task: &'static str,
    pub core: CoreKind,
    pub basis: &'static str,
    pub photons: usize,
    pub channels: usize,
    pub seconds: f64,
    pub terms: usize,
}

fn parse_grid(s: &str) -> CliResult<Vec<(usize, usize)>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|row| {
            let (n, l) = row
                .split_once(':')
                .ok_or_else(|| Failure::Invalid(format!("grid row '{row}' is not n:l")))?;
            let parse = |x: &str| {
                x.trim()
                    .parse::<usize>()
                    .map_err(|e| Failure::Invalid(format!("grid row '{row}': {e}")))
            };
            let (n, l) = (parse(n)?, parse(l)?);
            if n > l || l == 0 {
                return Err(Failure::Invalid(format!("grid row '{row}' needs 0 < photons <= channels")));
            }
            Ok((n, l))
        })
        .collect()
}

fn input_ket(n: usize, l: usize) -> Ket {
    Ket::new((0..l).map(|i| u8::from(i < n)).collect())
}

/// Timings for every grid row, core and basis, then the single-amplitude rows (Glynn).
pub fn timings(grid: &[(usize, usize)], amps: &[(usize, usize)], cores: &[CoreKind], seed: u64) -> CliResult<Vec<Timing>> {
    let mut out = Vec::new();
    for (row, &(n, l)) in grid.iter().enumerate() {
        let u = random_unitary(l, &mut ChaCha8Rng::seed_from_u64(seed.wrapping_add(row as u64)));
        let input = State::from_ket(input_ket(n, l));
        for &core in cores {
            for (name, basis) in [("full", BasisSpec::Full), ("restricted", BasisSpec::Restricted)] {
                let t0 = Instant::now();
                let s = transform(&input, &u, core, &basis)?;
                out.push(Timing {
                    task: "distribution",
                    core,
                    basis: name,
                    photons: n,
                    channels: l,
                    seconds: t0.elapsed().as_secs_f64(),
                    terms: s.len(),
                });
            }
        }
    }
    for (row, &(n, l)) in amps.iter().enumerate() {
        let u = random_unitary(l, &mut ChaCha8Rng::seed_from_u64(seed.wrapping_add(1000 + row as u64)));
        let input = input_ket(n, l);
        let output = Ket::new((0..l).map(|i| u8::from(i >= l - n)).collect());
        let t0 = Instant::now();
        amplitude(&input, &output, &u)?;
        out.push(Timing {
            task: "amplitude",
            core: CoreKind::Glynn,
            basis: "-",
            photons: n,
            channels: l,
            seconds: t0.elapsed().as_secs_f64(),
            terms: 1,
        });
    }
    Ok(out)
}

pub fn run(args: &BenchArgs) -> CliResult<String> {
    let cores = match args.core.as_str() {
        "all" => vec![CoreKind::Glynn, CoreKind::Direct],
        c => vec![c.parse::<CoreKind>()?],
    };
    let rows = timings(&parse_grid(&args.grid)?, &parse_grid(&args.amp)?, &cores, args.seed)?;
    let core_name = |c: CoreKind| match c {
        CoreKind::Direct => "direct",
        CoreKind::Glynn => "glynn",
    };
    Ok(match args.out.format {
        Format::Json => {
            let v: Vec<_> = rows
                .iter()
                .map(|t| {
                    json!({"task": t.task, "core": core_name(t.core), "basis": t.basis,
                           "photons": t.photons, "channels": t.channels,
                           "seconds": t.seconds, "terms": t.terms})
                })
                .collect();
            serde_json::to_string_pretty(&v).expect("json") + "\n"
        }
        Format::Csv => {
            let mut s = String::from("task,core,basis,photons,channels,seconds,terms\n");
            for t in &rows {
                s.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    t.task,
                    core_name(t.core),
                    t.basis,
                    t.photons,
                    t.channels,
                    fmt(t.seconds),
                    t.terms
                ));
            }
            s
        }
        Format::Text => {
            let mut s = format!(
                "{:<13} {:<7} {:<10} {:>3} {:>3} {:>14} {:>9}\n",
                "task", "core", "basis", "n", "l", "seconds", "terms"
            );
            for t in &rows {
                s.push_str(&format!(
                    "{:<13} {:<7} {:<10} {:>3} {:>3} {:>14} {:>9}\n",
                    t.task,
                    core_name(t.core),
                    t.basis,
                    t.photons,
                    t.channels,
                    fmt(t.seconds),
                    t.terms
                ));
            }
            s
        }
    })
}
