//! Command-line frontend.
//!
//! Exit status: 0 on success, 1 on usage errors, 2 on invalid parameters,
//! 3 when a resource guard rejects the request.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bounds::{self, ball_volume_exact, ball_volume_log2, biguint_log2};
use crate::capability::exact_capability_profile;
use crate::error::{Error, Result};
use crate::montecarlo::{self, estimate_correctable_fraction, threshold_sweep, DEFAULT_SEED};
use crate::par::Workers;
use crate::rmcode::build_rm;

#[derive(Debug, Parser)]
#[command(name = "rmcap", version, about = "Error-correction capability of Reed-Muller codes")]
pub struct Cli {
    /// Output file (default: stdout).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format; each subcommand has its own default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Worker threads (1 = sequential, 0 or absent = all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Code construction and weight enumeration.
    #[command(subcommand)]
    Code(CodeCommand),
    /// Coset-leader classification: exact profiles and Monte Carlo.
    #[command(subcommand)]
    Capability(CapabilityCommand),
    /// Threshold formulas and numeric bounds.
    #[command(subcommand)]
    Bounds(BoundsCommand),
}

#[derive(Debug, Args, Clone, Copy)]
pub struct CodeArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub r: u32,
}

#[derive(Debug, Subcommand)]
pub enum CodeCommand {
    /// Parameters n, r, k, d_min, length.
    Info(CodeArgs),
    /// Weight distribution by full enumeration.
    Weights(CodeArgs),
}

#[derive(Debug, Args)]
pub struct McArgs {
    #[command(flatten)]
    pub code: CodeArgs,
    /// Threshold constant; the weight is t_c = floor(delta(c)).
    #[arg(long, conflicts_with = "t", required_unless_present = "t")]
    pub c: Option<f64>,
    /// Explicit error weight.
    #[arg(long)]
    pub t: Option<u64>,
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub code: CodeArgs,
    /// Explicit list of c values.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["c_min", "c_max", "c_step"])]
    pub c: Vec<f64>,
    #[arg(long, requires_all = ["c_max", "c_step"])]
    pub c_min: Option<f64>,
    #[arg(long)]
    pub c_max: Option<f64>,
    #[arg(long)]
    pub c_step: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum CapabilityCommand {
    /// Exact eps_C(t) for every weight (n <= 5).
    Exact(CodeArgs),
    /// Monte Carlo fraction of unambiguously correctable errors at one weight.
    Mc(McArgs),
    /// Monte Carlo fractions at t_c over a range of c.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub code: CodeArgs,
    #[arg(long)]
    pub c: f64,
    /// Exponent slack for the far-codeword term (default: half the admissible maximum).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Use this dimension in place of C(n, r) under the square root.
    #[arg(long)]
    pub k_dim: Option<u64>,
}

#[derive(Debug, Args)]
pub struct CertificateArgs {
    #[command(flatten)]
    pub code: CodeArgs,
    #[arg(long)]
    pub c: f64,
    #[arg(long)]
    pub alpha: f64,
}

#[derive(Debug, Args)]
pub struct VolumeArgs {
    /// Word length N.
    #[arg(long)]
    pub len: u64,
    /// Radius.
    #[arg(long)]
    pub t: u64,
}

#[derive(Debug, Subcommand)]
pub enum BoundsCommand {
    /// Threshold, ball volumes and certificate exponents.
    Eval(EvalArgs),
    /// Validated certificate exponents.
    Certificate(CertificateArgs),
    /// Hamming ball volume sum_{i <= t} C(N, i).
    Volume(VolumeArgs),
}

/// Parses `args`, runs the command and returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let workers = Workers::from_threads(cli.threads);
    let mut sink: Box<dyn Write> = match &cli.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    execute(&cli.command, cli.format, workers, &mut sink)?;
    sink.flush()?;
    Ok(())
}

/// Runs one command, writing its output to `out`.
pub fn execute(command: &Command, format: Option<Format>, workers: Workers, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Code(CodeCommand::Info(a)) => {
            let code = build_rm(a.n, a.r)?;
            let info = code.info();
            match format.unwrap_or(Format::Json) {
                Format::Json => write_json(out, &info),
                Format::Csv => {
                    writeln!(out, "n,r,k,d_min,length")?;
                    writeln!(out, "{},{},{},{},{}", info.n, info.r, info.k, info.d_min, info.length)?;
                    Ok(())
                }
            }
        }
        Command::Code(CodeCommand::Weights(a)) => {
            let code = build_rm(a.n, a.r)?;
            let dist = code.weight_distribution(workers)?;
            match format.unwrap_or(Format::Csv) {
                Format::Csv => {
                    writeln!(out, "weight,count")?;
                    for (w, c) in dist.support() {
                        writeln!(out, "{w},{c}")?;
                    }
                    Ok(())
                }
                Format::Json => {
                    #[derive(Serialize)]
                    struct Weights {
                        n: u32,
                        r: u32,
                        counts: std::collections::BTreeMap<usize, u64>,
                        far_count: u64,
                    }
                    let far_count = dist.count_far(code.vars(), code.top_degree_count());
                    write_json(
                        out,
                        &Weights {
                            n: a.n,
                            r: a.r,
                            counts: dist.support().collect(),
                            far_count,
                        },
                    )
                }
            }
        }
        Command::Capability(CapabilityCommand::Exact(a)) => {
            let code = build_rm(a.n, a.r)?;
            let profile = exact_capability_profile(&code, workers)?;
            match format.unwrap_or(Format::Csv) {
                Format::Csv => Ok(profile.write_csv(out)?),
                Format::Json => write_json(out, &profile.summary()),
            }
        }
        Command::Capability(CapabilityCommand::Mc(a)) => {
            let code = build_rm(a.code.n, a.code.r)?;
            let est = match (a.c, a.t) {
                (Some(c), _) => threshold_sweep(&code, &[c], a.trials, a.seed, workers)?.remove(0),
                (None, Some(t)) => estimate_correctable_fraction(&code, t, a.trials, a.seed, workers)?,
                (None, None) => return Err(Error::param("one of --c or --t is required")),
            };
            write_estimates(out, format, &[est])
        }
        Command::Capability(CapabilityCommand::Sweep(a)) => {
            let code = build_rm(a.code.n, a.code.r)?;
            let cs = sweep_values(a)?;
            let rows = threshold_sweep(&code, &cs, a.trials, a.seed, workers)?;
            write_estimates(out, format, &rows)
        }
        Command::Bounds(BoundsCommand::Eval(a)) => {
            let report = bounds::evaluate(a.c, a.code.n, a.code.r, a.alpha, a.k_dim)?;
            write_json(out, &report)
        }
        Command::Bounds(BoundsCommand::Certificate(a)) => {
            let cert = bounds::theorem1_certificate(a.c, a.code.n, a.code.r, a.alpha)?;
            write_json(out, &cert)
        }
        Command::Bounds(BoundsCommand::Volume(a)) => {
            #[derive(Serialize)]
            struct Volume {
                len: u64,
                t: u64,
                log2_volume: f64,
                #[serde(skip_serializing_if = "Option::is_none")]
                log2_exact: Option<f64>,
                #[serde(skip_serializing_if = "Option::is_none")]
                exact: Option<String>,
            }
            let log2_volume = ball_volume_log2(a.len, a.t)?;
            let big = if a.len <= 1 << 16 { Some(ball_volume_exact(a.len, a.t)?) } else { None };
            write_json(
                out,
                &Volume {
                    len: a.len,
                    t: a.t,
                    log2_volume,
                    log2_exact: big.as_ref().map(biguint_log2),
                    exact: big.filter(|_| a.len <= 1 << 12).map(|b| b.to_string()),
                },
            )
        }
    }
}

fn sweep_values(a: &SweepArgs) -> Result<Vec<f64>> {
    if !a.c.is_empty() {
        return Ok(a.c.clone());
    }
    let (Some(lo), Some(hi), Some(step)) = (a.c_min, a.c_max, a.c_step) else {
        return Err(Error::param("give --c or all of --c-min, --c-max, --c-step"));
    };
    if !(step > 0.0 && lo <= hi) {
        return Err(Error::param("need c-min <= c-max and c-step > 0"));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| lo + step * i as f64).collect())
}

fn write_estimates(out: &mut dyn Write, format: Option<Format>, rows: &[montecarlo::McEstimate]) -> Result<()> {
    match format.unwrap_or(Format::Csv) {
        Format::Csv => Ok(montecarlo::write_csv(rows, out)?),
        Format::Json => write_json(out, &rows),
    }
}

fn write_json<T: Serialize + ?Sized>(out: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> Result<String> {
        let cli = Cli::try_parse_from(std::iter::once("rmcap").chain(args.iter().copied())).unwrap();
        let mut buf = Vec::new();
        execute(&cli.command, cli.format, Workers::from_threads(cli.threads), &mut buf)?;
        Ok(String::from_utf8(buf).unwrap())
    }

    #[test]
    fn code_info_json() {
        let v: serde_json::Value = serde_json::from_str(&run_args(&["code", "info", "--n", "4", "--r", "2"]).unwrap()).unwrap();
        assert_eq!(v["k"], 11);
        assert_eq!(v["d_min"], 4);
        assert_eq!(v["length"], 16);
    }

    #[test]
    fn code_weights_csv() {
        let out = run_args(&["code", "weights", "--n", "3", "--r", "1"]).unwrap();
        assert_eq!(out, "weight,count\n0,1\n4,14\n8,1\n");
    }

    #[test]
    fn capability_exact_csv_and_json() {
        let out = run_args(&["capability", "exact", "--n", "3", "--r", "1"]).unwrap();
        assert!(out.contains("\n2,28,7,7,28\n"));
        let out = run_args(&["capability", "exact", "--n", "3", "--r", "1", "--format", "json"]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["covering_radius"], 2);
        assert_eq!(v["t_C"], 1);
        assert_eq!(v["leader_weight_census"]["2"], 7);
    }

    #[test]
    fn bounds_eval_json() {
        let out = run_args(&["bounds", "eval", "--n", "3", "--r", "1", "--c", "1"]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!((v["delta"].as_f64().unwrap() - 1.1159462).abs() < 1e-6);
        for key in ["c", "n", "r", "lambda", "delta", "t_c", "log2_vol_exact", "log2_vol_asymptotic", "e_left", "e_right"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
    }

    #[test]
    fn sweep_range_and_seed_column() {
        let out = run_args(&[
            "capability", "sweep", "--n", "6", "--r", "1", "--c-min", "0.5", "--c-max", "1.5", "--c-step", "0.5",
            "--trials", "50", "--seed", "9",
        ])
        .unwrap();
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("6,1,1.50000000000,"));
        assert!(lines.iter().skip(1).all(|l| l.ends_with(",9")));
    }

    #[test]
    fn mc_requires_c_or_t() {
        assert!(Cli::try_parse_from(["rmcap", "capability", "mc", "--n", "4", "--r", "1"]).is_err());
        assert!(Cli::try_parse_from(["rmcap", "capability", "mc", "--n", "4", "--r", "1", "--c", "1", "--t", "2"]).is_err());
        let out = run_args(&["capability", "mc", "--n", "4", "--r", "1", "--t", "1", "--trials", "20"]).unwrap();
        assert!(out.lines().nth(1).unwrap().starts_with("4,1,,1,20,20,"));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(main_with_args(["rmcap", "code", "info", "--n", "3", "--r", "5"]), 2);
        assert_eq!(main_with_args(["rmcap", "capability", "exact", "--n", "6", "--r", "1"]), 3);
        assert_eq!(main_with_args(["rmcap", "frobnicate"]), 1);
        assert_eq!(main_with_args(["rmcap", "--help"]), 0);
    }

    #[test]
    fn volume_json() {
        let v: serde_json::Value =
            serde_json::from_str(&run_args(&["bounds", "volume", "--len", "8", "--t", "2"]).unwrap()).unwrap();
        assert_eq!(v["exact"], "37");
    }
}
