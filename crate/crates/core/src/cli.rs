//! Implementations behind the `epq` command-line tool: encoding/decoding
//! files, model fitting, and the CSV-producing analysis commands.
//!
//! Every command is deterministic given its inputs and `--seed`; corpus
//! loops can fan out across images when `EPQ_THREADS` allows it, with
//! results merged in index order so the output bytes never depend on the
//! thread count.

use crate::codec::{
    decode_image, encode_image, evaluate_pipeline, quality_table, CodecConfig,
    CodecError, ColorSpace, Profile, DEFAULT_STAGES,
};
use crate::epd::{epd_mle, EpdError, EpdParams, KappaPolicy, MuPolicy};
use crate::image_io::{load_pnm, save_pnm, Image, ImageError};
use crate::predict::{
    conditional_width_scan, fit_sigma_zigzag, laplace_log_loss, savings_bits, zigzag_log_loss,
    PredictError, SIGMA_MIN,
};
use crate::quantizer::{
    density_distortion_optimal, density_rd, eval_rd, nodes_from_density, Density, QuantDensity,
    QuantError, RdPower,
};
use crate::sigma_ladder::{
    build_ladder, cell_width, entropy, golomb_optimal_m, golomb_penalty, lsb_flush_penalty,
    penalty_coeff,
};
use crate::synth::synth_corpus;
use crate::transform::{dct2_forward, partition_and_pad, pos_index, zigzag, Block};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Image {
        path: String,
        #[source]
        source: ImageError,
    },
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Epd(#[from] EpdError),
    #[error(transparent)]
    Predict(#[from] PredictError),
    #[error(transparent)]
    Quant(#[from] QuantError),
    #[error("io: {0}")]
    Io(String),
    #[error("invalid argument: {0}")]
    BadArg(String),
    #[error("no images found under {0}")]
    EmptyCorpus(String),
}

fn io_err(e: std::io::Error) -> CliError {
    CliError::Io(e.to_string())
}

// ---------------------------------------------------------------------------
// Small CSV sink
// ---------------------------------------------------------------------------

/// Deterministic CSV with a header row.
pub struct Csv {
    out: String,
    columns: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self { out: header.join(",") + "\n", columns: header.len() }
    }

    pub fn row(&mut self, fields: &[String]) {
        debug_assert_eq!(fields.len(), self.columns);
        self.out.push_str(&fields.join(","));
        self.out.push('\n');
    }

    pub fn finish(self) -> String {
        self.out
    }
}

fn fnum(v: f64) -> String {
    // shortest representation that parses back to the same f64
    format!("{v}")
}

/// Write to a path, or stdout when the path is "-".
pub fn write_output(path: &Path, content: &str) -> Result<(), CliError> {
    if path.as_os_str() == "-" {
        print!("{content}");
        Ok(())
    } else {
        std::fs::write(path, content).map_err(io_err)
    }
}

// ---------------------------------------------------------------------------
// Corpus handling
// ---------------------------------------------------------------------------

/// All .pgm/.ppm images under a directory, sorted by file name.
pub fn load_corpus(dir: &Path) -> Result<Vec<Image>, CliError> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io_err)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .map(|e| e.eq_ignore_ascii_case("pgm") || e.eq_ignore_ascii_case("ppm"))
                .unwrap_or(false)
        })
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::EmptyCorpus(dir.display().to_string()));
    }
    let images = par_map(&paths, |p| {
        load_pnm(p).map_err(|e| CliError::Image { path: p.display().to_string(), source: e })
    });
    images.into_iter().collect()
}

/// Fan a per-item computation out over up to EPQ_THREADS threads; results
/// are returned in input order.
pub fn par_map<T: Sync, R: Send, F: Fn(&T) -> R + Sync>(items: &[T], f: F) -> Vec<R> {
    let threads = std::env::var("EPQ_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or(1)
        .clamp(1, 64);
    if threads <= 1 || items.len() <= 1 {
        return items.iter().map(&f).collect();
    }
    let mut results: Vec<Option<R>> = (0..items.len()).map(|_| None).collect();
    let chunk = items.len().div_ceil(threads);
    std::thread::scope(|scope| {
        for (slot_chunk, item_chunk) in results.chunks_mut(chunk).zip(items.chunks(chunk)) {
            let f = &f;
            scope.spawn(move || {
                for (slot, item) in slot_chunk.iter_mut().zip(item_chunk) {
                    *slot = Some(f(item));
                }
            });
        }
    });
    results.into_iter().map(|r| r.expect("filled")).collect()
}

/// Every 8×8 DCT block of every image (luma plane for color input).
fn corpus_dct_blocks(images: &[Image]) -> Result<Vec<Block>, CliError> {
    let per_image = par_map(images, |img| {
        let planes = crate::image_io::to_planes(img, img.channels == 3);
        let grid = partition_and_pad(&planes[0]).expect("nonempty image");
        grid.blocks.iter().map(dct2_forward).collect::<Vec<Block>>()
    });
    Ok(per_image.into_iter().flatten().collect())
}

// ---------------------------------------------------------------------------
// encode / decode
// ---------------------------------------------------------------------------

pub struct EncodeArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    pub quality: u8,
    pub profile: Profile,
    pub colorspace: ColorSpace,
    pub embed_models: bool,
}

pub fn cmd_encode(args: &EncodeArgs) -> Result<(), CliError> {
    let img = load_pnm(&args.input)
        .map_err(|e| CliError::Image { path: args.input.display().to_string(), source: e })?;
    let config = CodecConfig {
        colorspace: args.colorspace,
        quality: args.quality,
        profile: args.profile,
        embed_models: args.embed_models,
        ..CodecConfig::default()
    };
    let bytes = encode_image(&img, &config, None)?;
    std::fs::write(&args.output, bytes).map_err(io_err)
}

pub fn cmd_decode(input: &Path, output: &Path, stats: Option<&Path>) -> Result<(), CliError> {
    let bytes = std::fs::read(input).map_err(io_err)?;
    let (img, dec_stats) = decode_image(&bytes)?;
    save_pnm(output, &img)
        .map_err(|e| CliError::Image { path: output.display().to_string(), source: e })?;
    if let Some(stats_path) = stats {
        let mut csv = Csv::new(&["channel", "j", "k", "bits_per_value", "payload_bytes"]);
        let blocks = (img.width.div_ceil(8) * img.height.div_ceil(8)) as f64;
        for (ch, bits) in dec_stats.bits_by_pos.iter().enumerate() {
            for j in 1..=8usize {
                for k in 1..=8usize {
                    csv.row(&[
                        ch.to_string(),
                        j.to_string(),
                        k.to_string(),
                        fnum(bits[pos_index(j, k)] / blocks),
                        dec_stats.payload_bytes[ch].to_string(),
                    ]);
                }
            }
        }
        write_output(stats_path, &csv.finish())?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// fit-epd
// ---------------------------------------------------------------------------

/// κ policy accepted on the command line: "grid", "fixed" (κ=1) or
/// "fixed=V".
pub fn parse_kappa_policy(s: &str) -> Result<KappaPolicy, CliError> {
    if s == "grid" {
        return Ok(KappaPolicy::Grid);
    }
    if s == "fixed" {
        return Ok(KappaPolicy::Fixed(1.0));
    }
    if let Some(v) = s.strip_prefix("fixed=") {
        let k: f64 = v.parse().map_err(|_| CliError::BadArg(format!("kappa value {v}")))?;
        if k <= 0.0 {
            return Err(CliError::BadArg("kappa must be positive".into()));
        }
        return Ok(KappaPolicy::Fixed(k));
    }
    Err(CliError::BadArg(format!("kappa policy {s} (expected grid|fixed|fixed=V)")))
}

/// Per-position EPD fits over a corpus, written as a little-endian f32
/// table (magic, schema, then 64 × (κ, σ, μ)), plus the log-likelihood
/// grid CSV.
pub fn cmd_fit_epd(
    dir: &Path,
    out_models: &Path,
    csv_out: Option<&Path>,
    policy: KappaPolicy,
) -> Result<(), CliError> {
    let images = load_corpus(dir)?;
    let blocks = corpus_dct_blocks(&images)?;
    let mut csv = Csv::new(&["j", "k", "kappa", "bits"]);
    let mut table = Vec::with_capacity(64 * 3);
    for j in 1..=8usize {
        for k in 1..=8usize {
            let idx = pos_index(j, k);
            let values: Vec<f64> = blocks.iter().map(|b| b[idx]).collect();
            let mu_policy = if (j, k) == (1, 1) { MuPolicy::SampleMean } else { MuPolicy::Fixed(0.0) };
            // likelihood profile over the coarse κ grid; the bits column is
            // the mean coding cost −lg ρ, so the best shape is the minimum
            let mut kappa = 0.1;
            while kappa <= 3.0 + 1e-9 {
                if let Ok(fit) = epd_mle(&values, mu_policy, KappaPolicy::Fixed(kappa)) {
                    csv.row(&[j.to_string(), k.to_string(), fnum(kappa), fnum(-fit.mean_log2_likelihood)]);
                }
                kappa += 0.05;
            }
            let fit = epd_mle(&values, mu_policy, policy)?;
            table.push(fit.params.kappa() as f32);
            table.push(fit.params.sigma() as f32);
            table.push(fit.params.mu() as f32);
        }
    }
    let mut bytes = Vec::with_capacity(8 + 4 * table.len());
    bytes.extend_from_slice(b"EPQF");
    bytes.extend_from_slice(&2u32.to_le_bytes());
    for v in table {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    std::fs::write(out_models, bytes).map_err(io_err)?;
    if let Some(p) = csv_out {
        write_output(p, &csv.finish())?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// diagnose-cdf
// ---------------------------------------------------------------------------

/// Empirical-CDF deviation curves per coefficient position under a fixed
/// shape κ, subsampled to `points` rows per position.
pub fn cmd_diagnose_cdf(dir: &Path, kappa: f64, out: &Path, points: usize) -> Result<(), CliError> {
    if kappa <= 0.0 {
        return Err(CliError::BadArg("kappa must be positive".into()));
    }
    let images = load_corpus(dir)?;
    let blocks = corpus_dct_blocks(&images)?;
    let mut csv = Csv::new(&["j", "k", "rank_fraction", "deviation"]);
    for &(j, k) in zigzag().iter() {
        let idx = pos_index(j, k);
        let values: Vec<f64> = blocks.iter().map(|b| b[idx]).collect();
        let fit = epd_mle(&values, MuPolicy::Fixed(0.0), KappaPolicy::Fixed(kappa))?;
        let diag = crate::epd::cdf_diagnostic(&values, &fit.params)?;
        let step = (diag.len() / points.max(1)).max(1);
        for (_, &(frac, dev)) in diag.iter().enumerate().filter(|(i, _)| i % step == 0) {
            csv.row(&[j.to_string(), k.to_string(), fnum(frac), fnum(dev)]);
        }
    }
    write_output(out, &csv.finish())
}

// ---------------------------------------------------------------------------
// rd-curve
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub enum DensityChoice {
    Uniform,
    Optimal,
    Rd(f64),
}

pub fn parse_density_choice(s: &str) -> Result<DensityChoice, CliError> {
    if s == "uniform" {
        return Ok(DensityChoice::Uniform);
    }
    if s == "optimal" {
        return Ok(DensityChoice::Optimal);
    }
    if let Some(l) = s.strip_prefix("rd:") {
        let lambda: f64 = l.parse().map_err(|_| CliError::BadArg(format!("lambda {l}")))?;
        if lambda < 0.0 {
            return Err(CliError::BadArg("lambda must be nonnegative".into()));
        }
        return Ok(DensityChoice::Rd(lambda));
    }
    Err(CliError::BadArg(format!("density {s} (expected uniform|optimal|rd:lambda)")))
}

/// Parse "epd:kappa,sigma" into a zero-centered distribution.
pub fn parse_dist(s: &str) -> Result<EpdParams, CliError> {
    let body = s.strip_prefix("epd:").ok_or_else(|| CliError::BadArg(format!("dist {s}")))?;
    let mut it = body.split(',');
    let kappa: f64 = it
        .next()
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| CliError::BadArg("dist kappa".into()))?;
    let sigma: f64 = it
        .next()
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| CliError::BadArg("dist sigma".into()))?;
    if it.next().is_some() {
        return Err(CliError::BadArg("dist takes exactly kappa,sigma".into()));
    }
    EpdParams::new(kappa, sigma, 0.0).map_err(CliError::Epd)
}

/// Parse an N list like "1..32", "1..31:2" or "1,3,9".
pub fn parse_n_list(s: &str) -> Result<Vec<usize>, CliError> {
    let mut out = Vec::new();
    for part in s.split(',') {
        if let Some((a, rest)) = part.split_once("..") {
            let (b, step) = match rest.split_once(':') {
                Some((b, st)) => (b, st.parse().map_err(|_| CliError::BadArg(format!("step in {part}")))?),
                None => (rest, 1usize),
            };
            let a: usize = a.parse().map_err(|_| CliError::BadArg(format!("range start {part}")))?;
            let b: usize = b.parse().map_err(|_| CliError::BadArg(format!("range end {part}")))?;
            if a == 0 || b < a || step == 0 {
                return Err(CliError::BadArg(format!("bad range {part}")));
            }
            out.extend((a..=b).step_by(step));
        } else {
            let n: usize = part.parse().map_err(|_| CliError::BadArg(format!("N {part}")))?;
            if n == 0 {
                return Err(CliError::BadArg("N must be ≥ 1".into()));
            }
            out.push(n);
        }
    }
    Ok(out)
}

pub struct RdCurveArgs {
    pub dist: EpdParams,
    pub range: (f64, f64),
    pub n_list: Vec<usize>,
    pub density: DensityChoice,
    pub power: RdPower,
    pub out: PathBuf,
}

/// Rate-distortion sweep of a quantization density over quantizer sizes.
pub fn rd_curve_table(args: &RdCurveArgs) -> Result<String, CliError> {
    let rho = Density::Epd(args.dist);
    let (lo, hi) = args.range;
    if hi <= lo {
        return Err(CliError::BadArg("range must satisfy a < b".into()));
    }
    let qd: QuantDensity = match args.density {
        DensityChoice::Uniform => QuantDensity::from_fn(lo, hi, |_| 1.0)?,
        DensityChoice::Optimal => {
            let p = if args.power == RdPower::P1 { 1.0 } else { 2.0 };
            density_distortion_optimal(&rho, p, Some((lo, hi)))?
        }
        DensityChoice::Rd(lambda) => density_rd(&rho, lambda, args.power, Some((lo, hi)))?,
    };
    let mut csv = Csv::new(&["N", "rate_bits", "distortion"]);
    for &n in &args.n_list {
        let rd = eval_rd(&rho, &nodes_from_density(&qd, n));
        csv.row(&[n.to_string(), fnum(rd.rate), fnum(rd.distortion)]);
    }
    Ok(csv.finish())
}

pub fn cmd_rd_curve(args: &RdCurveArgs) -> Result<(), CliError> {
    let table = rd_curve_table(args)?;
    write_output(&args.out, &table)
}

// ---------------------------------------------------------------------------
// predict-eval
// ---------------------------------------------------------------------------

/// One requested evaluation of the prediction models.
#[derive(Debug, Clone, PartialEq)]
pub enum PredictEvalKind {
    /// In-block zigzag width prediction: per-position log-loss savings.
    Zigzag,
    /// Between-block μ prediction: per-position MSE savings in bits.
    BoundaryMu,
    /// Between-block σ prediction: per-position log-loss savings over a
    /// constant residue width.
    BoundarySigma,
    /// Reduced width predictors: mean log-loss per mode vs the full model.
    Reduced,
    /// Conditional width scan between two zigzag AC positions.
    Scan { from: (usize, usize), to: (usize, usize), window: usize },
}

pub fn parse_predict_eval(s: &str) -> Result<PredictEvalKind, CliError> {
    match s {
        "zigzag" => return Ok(PredictEvalKind::Zigzag),
        "boundary-mu" => return Ok(PredictEvalKind::BoundaryMu),
        "boundary-sigma" => return Ok(PredictEvalKind::BoundarySigma),
        "reduced" => return Ok(PredictEvalKind::Reduced),
        _ => {}
    }
    if let Some(body) = s.strip_prefix("scan:") {
        let nums: Vec<usize> = body
            .split([',', ':'])
            .map(|v| v.parse::<usize>().map_err(|_| CliError::BadArg(format!("scan spec {s}"))))
            .collect::<Result<_, _>>()?;
        if nums.len() == 4 || nums.len() == 5 {
            let window = if nums.len() == 5 { nums[4] } else { 5000 };
            return Ok(PredictEvalKind::Scan {
                from: (nums[0], nums[1]),
                to: (nums[2], nums[3]),
                window,
            });
        }
    }
    Err(CliError::BadArg(format!(
        "profile {s} (expected zigzag|boundary-mu|boundary-sigma|reduced|scan:j1,k1,j2,k2[:window])"
    )))
}

/// Savings tables for the prediction models fitted on a corpus. Rows are
/// (record, j, k, x, value); unused fields print as 0.
pub fn predict_eval_table(images: &[Image], kinds: &[PredictEvalKind]) -> Result<String, CliError> {
    let blocks = corpus_dct_blocks(images)?;
    let mut csv = Csv::new(&["record", "j", "k", "x", "value"]);

    for kind in kinds {
        match kind {
            PredictEvalKind::Zigzag => {
                let models = fit_sigma_zigzag(&blocks)?;
                let order = zigzag();
                // per-position log-loss delta
                for (i, &(j, k)) in order.iter().enumerate() {
                    let idx = pos_index(j, k);
                    let values: Vec<f64> = blocks.iter().map(|b| b[idx]).collect();
                    let const_sigma =
                        (values.iter().map(|v| v.abs()).sum::<f64>() / values.len() as f64).max(SIGMA_MIN);
                    let mut feat = vec![0.0; i];
                    let sigmas: Vec<f64> = blocks
                        .iter()
                        .map(|b| {
                            for (t, &(ja, ka)) in order.iter().take(i).enumerate() {
                                feat[t] = b[pos_index(ja, ka)].abs();
                            }
                            models[i].eval(&feat).unwrap().max(SIGMA_MIN)
                        })
                        .collect();
                    let bits_const = laplace_log_loss(&values, &vec![const_sigma; values.len()]);
                    let bits_pred = laplace_log_loss(&values, &sigmas);
                    csv.row(&[
                        "zigzag-saving".into(),
                        j.to_string(),
                        k.to_string(),
                        fnum(0.0),
                        fnum(bits_const - bits_pred),
                    ]);
                }
                let (c, p) = zigzag_log_loss(&blocks, &models);
                csv.row(&["zigzag-mean-saving".into(), "0".into(), "0".into(), fnum(0.0), fnum(c - p)]);
            }
            PredictEvalKind::BoundaryMu | PredictEvalKind::BoundarySigma => {
                let mut samples = Vec::new();
                for img in images {
                    let planes = crate::image_io::to_planes(img, img.channels == 3);
                    collect_boundary_samples(&planes[0], &mut samples);
                }
                let models = crate::predict::fit_boundary_models(&samples)?;
                let ctx: Vec<_> = samples.iter().filter(|s| s.has_context).collect();
                for j in 1..=8usize {
                    for k in 1..=8usize {
                        let idx = pos_index(j, k);
                        if *kind == PredictEvalKind::BoundaryMu {
                            let mean: f64 =
                                ctx.iter().map(|s| s.coeffs[idx]).sum::<f64>() / ctx.len() as f64;
                            let var: f64 = ctx
                                .iter()
                                .map(|s| (s.coeffs[idx] - mean).powi(2))
                                .sum::<f64>()
                                / ctx.len() as f64;
                            let mse: f64 = ctx
                                .iter()
                                .map(|s| {
                                    let e = s.coeffs[idx] - models.mu[idx].eval(&s.features).unwrap();
                                    e * e
                                })
                                .sum::<f64>()
                                / ctx.len() as f64;
                            let saving = savings_bits(var.max(1e-12), mse.max(1e-12)).unwrap_or(0.0);
                            csv.row(&[
                                "boundary-mu-saving".into(),
                                j.to_string(),
                                k.to_string(),
                                fnum(0.0),
                                fnum(saving),
                            ]);
                        } else {
                            let res: Vec<f64> = ctx
                                .iter()
                                .map(|s| s.coeffs[idx] - models.mu[idx].eval(&s.features).unwrap())
                                .collect();
                            let const_sigma = (res.iter().map(|r| r.abs()).sum::<f64>()
                                / res.len() as f64)
                                .max(SIGMA_MIN);
                            let sigmas: Vec<f64> = ctx
                                .iter()
                                .map(|s| {
                                    let abs: Vec<f64> = s.features.iter().map(|f| f.abs()).collect();
                                    models.sigma[idx].eval(&abs).unwrap().max(SIGMA_MIN)
                                })
                                .collect();
                            let bits_const = laplace_log_loss(&res, &vec![const_sigma; res.len()]);
                            let bits_pred = laplace_log_loss(&res, &sigmas);
                            csv.row(&[
                                "boundary-sigma-saving".into(),
                                j.to_string(),
                                k.to_string(),
                                fnum(0.0),
                                fnum(bits_const - bits_pred),
                            ]);
                        }
                    }
                }
            }
            PredictEvalKind::Reduced => {
                let mut samples = Vec::new();
                for img in images {
                    let planes = crate::image_io::to_planes(img, img.channels == 3);
                    collect_boundary_samples(&planes[0], &mut samples);
                }
                let boundary = crate::predict::fit_boundary_models(&samples)?;
                let ctx: Vec<_> = samples.iter().filter(|s| s.has_context).collect();
                let modes = [
                    ("full", None),
                    ("vh", Some(crate::predict::SigmaFeatureMode::Vh)),
                    ("v+h", Some(crate::predict::SigmaFeatureMode::VPlusH)),
                    ("h-only", Some(crate::predict::SigmaFeatureMode::HOnly)),
                ];
                for (name, mode) in modes {
                    let reduced = mode
                        .map(|m| crate::predict::sigma_feature_model(&samples, &boundary, m))
                        .transpose()?;
                    let mut bits = 0.0;
                    let mut count = 0usize;
                    for s in &ctx {
                        let abs: [f64; 16] = std::array::from_fn(|i| s.features[i].abs());
                        for idx in 0..64 {
                            let r = s.coeffs[idx] - boundary.mu[idx].eval(&s.features).unwrap();
                            let sigma = match &reduced {
                                None => boundary.sigma[idx].eval(&abs).unwrap().max(SIGMA_MIN),
                                Some(m) => m.sigma_at(idx, &abs),
                            };
                            bits += (2.0 * sigma).log2()
                                + r.abs() / sigma * std::f64::consts::LOG2_E;
                            count += 1;
                        }
                    }
                    csv.row(&[
                        format!("reduced-log-loss-{name}"),
                        "0".into(),
                        "0".into(),
                        fnum(0.0),
                        fnum(bits / count as f64),
                    ]);
                }
            }
            PredictEvalKind::Scan { from, to, window } => {
                let a = pos_index(from.0, from.1);
                let b = pos_index(to.0, to.1);
                let pairs: Vec<(f64, f64)> = blocks.iter().map(|bl| (bl[a], bl[b])).collect();
                let scan = conditional_width_scan(&pairs, (*window).min(pairs.len()), false)?;
                for p in scan {
                    csv.row(&[
                        format!("scan-{}{}-{}{}", from.0, from.1, to.0, to.1),
                        from.0.to_string(),
                        from.1.to_string(),
                        fnum(p.c1_mean),
                        fnum(p.sigma),
                    ]);
                }
            }
        }
    }
    Ok(csv.finish())
}

fn collect_boundary_samples(plane: &crate::transform::Plane, out: &mut Vec<crate::predict::BoundarySample>) {
    use crate::transform::{dct1, N};
    let grid = partition_and_pad(plane).expect("nonempty image");
    let mut coeffs = grid.clone();
    for b in coeffs.blocks.iter_mut() {
        *b = dct2_forward(b);
    }
    for by in 0..grid.blocks_y {
        for bx in 0..grid.blocks_x {
            let mut features = [0.0; 16];
            let mut has = false;
            if bx > 0 {
                let left = grid.block(bx - 1, by);
                let col: [f64; N] = std::array::from_fn(|r| left[r * N + (N - 1)]);
                features[..8].copy_from_slice(&dct1(&col));
                has = true;
            }
            if by > 0 {
                let top = grid.block(bx, by - 1);
                let row: [f64; N] = std::array::from_fn(|c| top[(N - 1) * N + c]);
                features[8..].copy_from_slice(&dct1(&row));
                has = true;
            }
            out.push(crate::predict::BoundarySample {
                features,
                has_context: has,
                coeffs: *coeffs.block(bx, by),
            });
        }
    }
}

pub fn cmd_predict_eval(dir: &Path, kinds: &[PredictEvalKind], out: &Path) -> Result<(), CliError> {
    let images = load_corpus(dir)?;
    let table = predict_eval_table(&images, kinds)?;
    write_output(out, &table)
}

// ---------------------------------------------------------------------------
// build-ladder
// ---------------------------------------------------------------------------

/// Ladder report: node positions, widths, entropies and tail-code
/// penalties.
pub fn build_ladder_table(penalty_e: f64, sigma_start: f64, sigma_max: f64) -> String {
    let ladder = build_ladder(sigma_start, sigma_max, penalty_e);
    let mut csv = Csv::new(&[
        "index",
        "sigma",
        "width",
        "penalty_coeff",
        "entropy_bits",
        "golomb_m",
        "golomb_penalty",
        "pow2_golomb_penalty",
        "flush_m",
        "flush_penalty",
    ]);
    for i in 0..ladder.len() {
        let s = ladder.node(i);
        let m_opt = golomb_optimal_m(s);
        let m_pow2 = (1u64 << ladder.escape_golomb_m(i)) as f64;
        let flush_m = if s > 8.0 { (s / 8.0).log2().round().max(0.0) as u32 } else { 0 };
        csv.row(&[
            i.to_string(),
            fnum(s),
            fnum(cell_width(s, penalty_e)),
            fnum(penalty_coeff(s)),
            fnum(entropy(s)),
            fnum(m_opt),
            fnum(golomb_penalty(s, m_opt.max(1.0))),
            fnum(golomb_penalty(s, m_pow2.max(1.0))),
            flush_m.to_string(),
            fnum(lsb_flush_penalty(s, flush_m)),
        ]);
    }
    csv.finish()
}

pub fn cmd_build_ladder(penalty_e: f64, sigma_start: f64, sigma_max: f64, out: &Path) -> Result<(), CliError> {
    if !(penalty_e > 0.0 && sigma_max > sigma_start && sigma_start > 0.0) {
        return Err(CliError::BadArg("need E > 0 and 0 < sigma-start < sigma-max".into()));
    }
    write_output(out, &build_ladder_table(penalty_e, sigma_start, sigma_max))
}

// ---------------------------------------------------------------------------
// pipeline-eval / synth-corpus
// ---------------------------------------------------------------------------

/// Full-codec profile ladder over a corpus: mean bits/pixel per stage plus
/// per-position bits.
pub fn pipeline_eval_table(images: &[Image], quality: u8) -> Result<String, CliError> {
    let evals = evaluate_pipeline(images, quality, &DEFAULT_STAGES)?;
    let mut csv = Csv::new(&["stage", "j", "k", "bits"]);
    for e in &evals {
        csv.row(&[format!("{}:total_bpp", e.label), "0".into(), "0".into(), fnum(e.bits_per_pixel)]);
        for j in 1..=8usize {
            for k in 1..=8usize {
                csv.row(&[
                    e.label.clone(),
                    j.to_string(),
                    k.to_string(),
                    fnum(e.bits_by_pos[pos_index(j, k)]),
                ]);
            }
        }
    }
    Ok(csv.finish())
}

pub fn cmd_pipeline_eval(dir: &Path, quality: u8, out: &Path) -> Result<(), CliError> {
    let images = load_corpus(dir)?;
    let table = pipeline_eval_table(&images, quality)?;
    write_output(out, &table)
}

/// Generate a synthetic corpus into a directory (PGM or PPM files).
pub fn cmd_synth_corpus(
    dir: &Path,
    count: usize,
    size: usize,
    channels: usize,
    seed: u64,
) -> Result<(), CliError> {
    if channels != 1 && channels != 3 {
        return Err(CliError::BadArg("channels must be 1 or 3".into()));
    }
    std::fs::create_dir_all(dir).map_err(io_err)?;
    let images = synth_corpus(count, size, size, channels, seed);
    let ext = if channels == 1 { "pgm" } else { "ppm" };
    for (i, img) in images.iter().enumerate() {
        let path = dir.join(format!("synth_{i:03}.{ext}"));
        save_pnm(&path, img)
            .map_err(|e| CliError::Image { path: path.display().to_string(), source: e })?;
    }
    Ok(())
}

/// Report on quality-table scaling (helper for documentation and tests).
pub fn quality_table_summary(quality: u8) -> String {
    let t = quality_table(quality);
    let mut s = String::new();
    for j in 0..8 {
        for k in 0..8 {
            let _ = write!(s, "{:4}", t[j * 8 + k]);
        }
        s.push('\n');
    }
    s
}

// ---------------------------------------------------------------------------
// config file
// ---------------------------------------------------------------------------

/// Simple key=value config file; later flags override these values.
pub fn read_config(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let text = std::fs::read_to_string(path).map_err(io_err)?;
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::BadArg(format!("config line {}: expected key=value", ln + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantizer::{eval_rd, nodes_from_density};

    #[test]
    fn n_list_parsing() {
        assert_eq!(parse_n_list("3").unwrap(), vec![3]);
        assert_eq!(parse_n_list("1..5").unwrap(), vec![1, 2, 3, 4, 5]);
        assert_eq!(parse_n_list("1..7:2").unwrap(), vec![1, 3, 5, 7]);
        assert_eq!(parse_n_list("1,4,2..3").unwrap(), vec![1, 4, 2, 3]);
        assert!(parse_n_list("0").is_err());
        assert!(parse_n_list("5..2").is_err());
        assert!(parse_n_list("x").is_err());
    }

    #[test]
    fn dist_and_density_parsing() {
        let d = parse_dist("epd:0.5,2").unwrap();
        assert_eq!((d.kappa(), d.sigma(), d.mu()), (0.5, 2.0, 0.0));
        assert!(parse_dist("epd:0.5").is_err());
        assert!(parse_dist("norm:1,1").is_err());
        assert!(matches!(parse_density_choice("uniform").unwrap(), DensityChoice::Uniform));
        assert!(matches!(parse_density_choice("rd:2.5").unwrap(), DensityChoice::Rd(l) if l == 2.5));
        assert!(parse_density_choice("rd:-1").is_err());
    }

    #[test]
    fn kappa_policy_parsing() {
        assert!(matches!(parse_kappa_policy("grid").unwrap(), KappaPolicy::Grid));
        assert!(matches!(parse_kappa_policy("fixed").unwrap(), KappaPolicy::Fixed(k) if k == 1.0));
        assert!(matches!(parse_kappa_policy("fixed=0.5").unwrap(), KappaPolicy::Fixed(k) if k == 0.5));
        assert!(parse_kappa_policy("fixed=-1").is_err());
        assert!(parse_kappa_policy("other").is_err());
    }

    #[test]
    fn rd_curve_matches_library_oracle() {
        let args = RdCurveArgs {
            dist: EpdParams::new(1.0, 1.0, 0.0).unwrap(),
            range: (-10.0, 10.0),
            n_list: vec![3],
            density: DensityChoice::Uniform,
            power: RdPower::P2,
            out: PathBuf::from("-"),
        };
        let table = rd_curve_table(&args).unwrap();
        let line = table.lines().nth(1).unwrap();
        let fields: Vec<&str> = line.split(',').collect();
        let rho = Density::Epd(args.dist);
        let qd = QuantDensity::from_fn(-10.0, 10.0, |_| 1.0).unwrap();
        let rd = eval_rd(&rho, &nodes_from_density(&qd, 3));
        assert_eq!(fields[0], "3");
        assert!((fields[1].parse::<f64>().unwrap() - rd.rate).abs() < 1e-12);
        assert!((fields[2].parse::<f64>().unwrap() - rd.distortion).abs() < 1e-12);
    }

    #[test]
    fn ladder_table_has_rows() {
        let table = build_ladder_table(1.0 / 300.0, 0.1, 50.0);
        let lines: Vec<&str> = table.lines().collect();
        assert!(lines.len() > 10);
        assert!(lines[0].starts_with("index,sigma,width"));
    }

    #[test]
    fn config_parsing() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("epq.conf");
        std::fs::write(&p, "# comment\nquality = 80\nprofile=mu\n\n").unwrap();
        let cfg = read_config(&p).unwrap();
        assert_eq!(cfg, vec![("quality".into(), "80".into()), ("profile".into(), "mu".into())]);
        std::fs::write(&p, "bad line").unwrap();
        assert!(read_config(&p).is_err());
    }

    #[test]
    fn predict_eval_parse() {
        assert!(matches!(parse_predict_eval("zigzag").unwrap(), PredictEvalKind::Zigzag));
        match parse_predict_eval("scan:1,2,1,3:4000").unwrap() {
            PredictEvalKind::Scan { from, to, window } => {
                assert_eq!((from, to, window), ((1, 2), (1, 3), 4000));
            }
            _ => panic!(),
        }
        assert!(parse_predict_eval("bogus").is_err());
    }
}
