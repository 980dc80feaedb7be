//! Command-line front end: encoding/decoding EPQ containers and
//! reproducing the model/quantizer analysis tables as CSV.

use clap::{Parser, Subcommand};
use epq::cli::{self, CliError, EncodeArgs, PredictEvalKind, RdCurveArgs};
use epq::codec::{ColorSpace, Profile};
use epq::quantizer::RdPower;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "epq", version, about = "Experimental DCT image codec with exponential-power coefficient models")]
struct Args {
    /// Seed for any randomized step (all commands are deterministic given it).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// key=value config file; explicit flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a PGM/PPM image into an .epq container.
    Encode {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Quality 1..=100 (JPEG-style table scaling).
        #[arg(long)]
        quality: Option<u8>,
        /// none | mu | mu-sigma | mu-sigma-zigzag | vh | v+h | h-only
        #[arg(long)]
        profile: Option<String>,
        /// rgb | ycbcr (color images only)
        #[arg(long)]
        colorspace: Option<String>,
        /// Embed the model set in the container header.
        #[arg(long)]
        embed_models: bool,
    },
    /// Decode an .epq container back to PGM/PPM.
    Decode {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Write per-(channel, position) bits/value statistics as CSV.
        #[arg(long)]
        stats: Option<PathBuf>,
    },
    /// Fit per-position distribution parameters over a corpus directory.
    FitEpd {
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// grid | fixed | fixed=V
        #[arg(long, default_value = "grid")]
        kappa: String,
        /// Also write the per-position shape/likelihood grid as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Empirical-CDF deviation curves under a fixed shape.
    DiagnoseCdf {
        corpus: PathBuf,
        #[arg(long)]
        kappa: f64,
        #[arg(long)]
        out: PathBuf,
        /// Rows kept per coefficient position.
        #[arg(long, default_value_t = 101)]
        points: usize,
    },
    /// Rate-distortion sweep of a quantization density.
    RdCurve {
        /// epd:kappa,sigma (location 0)
        #[arg(long)]
        dist: String,
        /// Domain as a,b
        #[arg(long, allow_hyphen_values = true)]
        range: String,
        /// Quantizer sizes: "1..32", "1..31:2" or comma list.
        #[arg(long = "N-list")]
        n_list: String,
        /// uniform | optimal | rd:lambda
        #[arg(long)]
        density: String,
        /// Error power for the density optimization: 1 | 2.
        #[arg(long, default_value_t = 2)]
        p: u8,
        #[arg(long)]
        out: PathBuf,
    },
    /// Savings tables and width scans for the prediction models.
    PredictEval {
        corpus: PathBuf,
        /// Semicolon list: zigzag;boundary-mu;boundary-sigma;reduced;scan:j1,k1,j2,k2[:window]
        #[arg(long)]
        profile: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sigma-ladder report: nodes, widths, penalties, tail codes.
    BuildLadder {
        #[arg(long = "E", default_value_t = 1.0 / 300.0)]
        e: f64,
        #[arg(long, default_value_t = 0.1)]
        sigma_start: f64,
        #[arg(long, default_value_t = 256.0)]
        sigma_max: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Full-codec profile ladder over a corpus (bits/pixel per stage).
    PipelineEval {
        corpus: PathBuf,
        #[arg(long)]
        quality: Option<u8>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a deterministic synthetic corpus.
    SynthCorpus {
        dir: PathBuf,
        #[arg(long, default_value_t = 24)]
        count: usize,
        #[arg(long, default_value_t = 256)]
        size: usize,
        #[arg(long, default_value_t = 1)]
        channels: usize,
    },
}

fn lookup<'a>(config: &'a [(String, String)], key: &str) -> Option<&'a str> {
    config.iter().rev().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
}

fn parse_profile(s: &str) -> Result<Profile, CliError> {
    Profile::parse(s).ok_or_else(|| CliError::BadArg(format!("profile {s}")))
}

fn parse_colorspace(s: &str) -> Result<ColorSpace, CliError> {
    match s {
        "rgb" => Ok(ColorSpace::Rgb),
        "ycbcr" => Ok(ColorSpace::YCbCr),
        _ => Err(CliError::BadArg(format!("colorspace {s}"))),
    }
}

fn run(args: Args) -> Result<(), CliError> {
    let config = match &args.config {
        Some(p) => cli::read_config(p)?,
        None => Vec::new(),
    };
    let seed = args.seed;
    match args.command {
        Command::Encode { input, output, quality, profile, colorspace, embed_models } => {
            let quality = quality
                .or_else(|| lookup(&config, "quality").and_then(|v| v.parse().ok()))
                .unwrap_or(50);
            let profile = match profile.as_deref().or_else(|| lookup(&config, "profile")) {
                Some(s) => parse_profile(s)?,
                None => Profile::MuSigma,
            };
            let colorspace = match colorspace.as_deref().or_else(|| lookup(&config, "colorspace")) {
                Some(s) => parse_colorspace(s)?,
                None => ColorSpace::YCbCr,
            };
            cli::cmd_encode(&EncodeArgs { input, output, quality, profile, colorspace, embed_models })
        }
        Command::Decode { input, output, stats } => cli::cmd_decode(&input, &output, stats.as_deref()),
        Command::FitEpd { corpus, out, kappa, csv } => {
            let policy = cli::parse_kappa_policy(&kappa)?;
            cli::cmd_fit_epd(&corpus, &out, csv.as_deref(), policy)
        }
        Command::DiagnoseCdf { corpus, kappa, out, points } => {
            cli::cmd_diagnose_cdf(&corpus, kappa, &out, points)
        }
        Command::RdCurve { dist, range, n_list, density, p, out } => {
            let (a, b) = range
                .split_once(',')
                .and_then(|(a, b)| Some((a.parse::<f64>().ok()?, b.parse::<f64>().ok()?)))
                .ok_or_else(|| CliError::BadArg(format!("range {range}")))?;
            let power = match p {
                1 => RdPower::P1,
                2 => RdPower::P2,
                _ => return Err(CliError::BadArg("p must be 1 or 2".into())),
            };
            cli::cmd_rd_curve(&RdCurveArgs {
                dist: cli::parse_dist(&dist)?,
                range: (a, b),
                n_list: cli::parse_n_list(&n_list)?,
                density: cli::parse_density_choice(&density)?,
                power,
                out,
            })
        }
        Command::PredictEval { corpus, profile, out } => {
            let kinds: Vec<PredictEvalKind> = profile
                .split(';')
                .map(cli::parse_predict_eval)
                .collect::<Result<_, _>>()?;
            cli::cmd_predict_eval(&corpus, &kinds, &out)
        }
        Command::BuildLadder { e, sigma_start, sigma_max, out } => {
            cli::cmd_build_ladder(e, sigma_start, sigma_max, &out)
        }
        Command::PipelineEval { corpus, quality, out } => {
            let quality = quality
                .or_else(|| lookup(&config, "quality").and_then(|v| v.parse().ok()))
                .unwrap_or(50);
            cli::cmd_pipeline_eval(&corpus, quality, &out)
        }
        Command::SynthCorpus { dir, count, size, channels } => {
            cli::cmd_synth_corpus(&dir, count, size, channels, seed)
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
