//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (visible with `cargo test --test acceptance --
//! --nocapture`). Tolerances are fixed here, not tuned at runtime.

use epq::coder::{decode_stream, encode_stream, CodingTable, PRECISION};
use epq::codec::{
    decode_image_traced, encode_image, encode_image_traced, evaluate_pipeline, CodecConfig,
    ColorSpace, DEFAULT_STAGES,
};
use epq::epd::{
    epd_mle, laplace_quant_entropy, laplace_quant_mse, EpdParams, KappaPolicy, MuPolicy,
};
use epq::image_io::to_planes;
use epq::predict::{cca, fit_sigma_zigzag, zigzag_log_loss, GramSystem};
use epq::quantizer::{
    asymptotic_distortion, density_distortion_optimal, density_rd, eval_rd, nodes_from_density,
    Density, QuantDensity, RdPower,
};
use epq::sigma_ladder::{
    build_ladder, cell_width, cross_entropy, entropy, geometric_probs, golomb_optimal_m,
    golomb_penalty, lsb_flush_penalty, penalty_coeff, table_half_width,
};
use epq::synth::synth_corpus;
use epq::transform::{dct2_forward, partition_and_pad, pos_index, zigzag};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LOG2_E: f64 = std::f64::consts::LOG2_E;

fn report(id: &str, pass: bool, detail: &str) -> bool {
    println!("criterion {id}: {} — {detail}", if pass { "PASS" } else { "FAIL" });
    pass
}

fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, n: usize) -> f64 {
    if a >= b {
        return 0.0;
    }
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

// ---------------------------------------------------------------------------
// 1. closed-form oracles
// ---------------------------------------------------------------------------

#[test]
fn criterion_01_closed_form_oracles() {
    // Laplace quantization MSE against cell-by-cell Simpson quadrature
    let mut worst_mse = 0.0f64;
    for step in 0..17 {
        let delta = 0.01 * (100.0f64 / 0.01).powf(step as f64 / 16.0);
        let pdf = |x: f64| 0.5 * (-x.abs()).exp();
        let mut mse = 0.0;
        let reach = 40.0f64;
        let i_max = (reach / delta).ceil() as i64;
        for i in -i_max..=i_max {
            let node = i as f64 * delta;
            let (a, b) = ((node - 0.5 * delta).max(-reach), (node + 0.5 * delta).min(reach));
            if a < b {
                // resolution scales with the cell width; split at zero so
                // the integrand stays smooth
                let n = (((b - a) * 4000.0) as usize).clamp(400, 400_000) & !1;
                let g = |x: f64| (x - node) * (x - node) * pdf(x);
                if a < 0.0 && b > 0.0 {
                    mse += simpson(&g, a, 0.0, n) + simpson(&g, 0.0, b, n);
                } else {
                    mse += simpson(&g, a, b, n);
                }
            }
        }
        worst_mse = worst_mse.max((mse - laplace_quant_mse(1.0, delta)).abs());
    }

    // quantized-entropy closed form against the direct sum
    let mut worst_h = 0.0f64;
    for step in 0..17 {
        let delta = 0.01 * (100.0f64 / 0.01).powf(step as f64 / 16.0);
        let p0 = 1.0 - (-0.5 * delta).exp();
        let s = (0.5 * delta).sinh();
        let lg_s = s.log2();
        let mut h = -p0 * p0.log2();
        for i in 1..=10_000i64 {
            let p = (-(i as f64) * delta).exp() * s;
            if p == 0.0 {
                break;
            }
            h -= 2.0 * p * (lg_s - i as f64 * delta * LOG2_E);
        }
        worst_h = worst_h.max((h - laplace_quant_entropy(delta)).abs());
    }

    // table cross-entropy closed form against the direct sum
    let mut worst_x = 0.0f64;
    for &(sp, sq) in &[(0.3, 0.4), (1.0, 1.1), (5.0, 4.0), (40.0, 55.0)] {
        let tp = geometric_probs(sp, 40_000.min(table_half_width(sp) * 64));
        let lg_sinh_q = (1.0f64 / (2.0 * sq)).sinh().log2();
        let p0q = 1.0 - (-1.0f64 / (2.0 * sq)).exp();
        let mut h = -(tp.probs[tp.symbol_for(0) as usize]) * p0q.log2();
        for x in 1..=tp.x_max {
            let p = tp.probs[tp.symbol_for(x) as usize];
            h -= 2.0 * p * (lg_sinh_q - x as f64 / sq * LOG2_E);
        }
        worst_x = worst_x.max((h - cross_entropy(sp, sq)).abs());
    }

    let pass = worst_mse < 1e-8 && worst_h < 1e-9 && worst_x < 1e-9;
    assert!(report(
        "01 closed-form-oracles",
        pass,
        &format!("mse err {worst_mse:.2e}, entropy err {worst_h:.2e}, cross-entropy err {worst_x:.2e}")
    ));
}

// ---------------------------------------------------------------------------
// 2. EPD identities
// ---------------------------------------------------------------------------

#[test]
fn criterion_02_epd_identities() {
    let var_half = EpdParams::new(0.5, 1.0, 0.0).unwrap().variance();
    let var_one = EpdParams::new(1.0, 1.0, 0.0).unwrap().variance();
    let var_two = EpdParams::new(2.0, 1.0, 0.0).unwrap().variance();
    let laplace_h = EpdParams::new(1.0, 1.0, 0.0).unwrap().diff_entropy_bits();
    let gauss_h = EpdParams::new(2.0, 1.0, 0.0).unwrap().diff_entropy_bits();
    let laplace_expect = (2.0 * std::f64::consts::E).log2();
    let gauss_expect = 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).log2();
    let pass = (var_half - 7.5).abs() < 1e-9
        && (var_one - 2.0).abs() < 1e-9
        && (var_two - 1.0).abs() < 1e-9
        && (laplace_h - laplace_expect).abs() < 1e-9
        && (gauss_h - gauss_expect).abs() < 1e-9;
    assert!(report(
        "02 epd-identities",
        pass,
        &format!(
            "variances ({var_half:.10}, {var_one:.10}, {var_two:.10}), entropies ({laplace_h:.10}, {gauss_h:.10})"
        )
    ));
}

// ---------------------------------------------------------------------------
// 3. MLE recovery
// ---------------------------------------------------------------------------

#[test]
fn criterion_03_mle_recovery() {
    let truth = EpdParams::new(0.5, 1.0, 0.0).unwrap();
    let mut passes = 0;
    for seed in 0..20u64 {
        let samples = truth.sample(100_000, 1000 + seed);
        let fit = epd_mle(&samples, MuPolicy::Fixed(0.0), KappaPolicy::Grid).unwrap();
        if (fit.params.kappa() - 0.5).abs() <= 0.05 && (fit.params.sigma() - 1.0).abs() <= 0.05 {
            passes += 1;
        }
    }
    assert!(report("03 mle-recovery", passes >= 19, &format!("{passes}/20 repetitions recovered")));
}

// ---------------------------------------------------------------------------
// 4. penalty math
// ---------------------------------------------------------------------------

#[test]
fn criterion_04_penalty_math() {
    let mut worst = 0.0f64;
    for &sigma in &[0.5f64, 2.0, 10.0, 50.0] {
        let eps = 1e-3 * sigma.max(1.0);
        let fd = (cross_entropy(sigma, sigma + eps) + cross_entropy(sigma, sigma - eps)
            - 2.0 * entropy(sigma))
            / (2.0 * eps * eps);
        worst = worst.max((fd / penalty_coeff(sigma) - 1.0).abs());
    }
    let asym = (penalty_coeff(50.0) / (LOG2_E / 5000.0) - 1.0).abs();
    let pass = worst < 0.01 && asym < 0.01;
    assert!(report(
        "04 penalty-math",
        pass,
        &format!("worst finite-difference rel err {worst:.4}, asymptote rel err {asym:.4}")
    ));
}

// ---------------------------------------------------------------------------
// 5. Golomb and flush penalties
// ---------------------------------------------------------------------------

#[test]
fn criterion_05_golomb() {
    // re-derive the optimal coefficient at Σ = 50 by golden section
    let sigma = 50.0f64;
    let h = |m: f64| 1.0 / -(-m / sigma).exp_m1() + m.log2();
    let (mut a, mut b) = (1.0f64, 400.0f64);
    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let (mut x1, mut x2) = (b - phi * (b - a), a + phi * (b - a));
    while b - a > 1e-10 {
        if h(x1) > h(x2) {
            a = x1;
            x1 = x2;
            x2 = a + phi * (b - a);
        } else {
            b = x2;
            x2 = x1;
            x1 = b - phi * (b - a);
        }
    }
    let coeff = 0.5 * (a + b) / sigma;
    let coeff_err = (coeff / 0.66794 - 1.0).abs();

    let pen200 = golomb_penalty(200.0, golomb_optimal_m(200.0));
    let pen_ok = (pen200 - 0.027).abs() <= 0.005;

    let mut flush_ok = true;
    let mut s = 8.0f64;
    while s <= 512.0 {
        let m = (s / 8.0).log2().round().max(0.0) as u32;
        if lsb_flush_penalty(s, m) > 1.0 / 300.0 + 1e-12 {
            flush_ok = false;
        }
        s *= 1.01;
    }

    let pass = coeff_err < 0.001 && pen_ok && flush_ok;
    assert!(report(
        "05 golomb",
        pass,
        &format!("coefficient {coeff:.6} (rel err {coeff_err:.2e}), penalty(200) {pen200:.4}, flush ok: {flush_ok}")
    ));
}

// ---------------------------------------------------------------------------
// 6. sigma ladder
// ---------------------------------------------------------------------------

#[test]
fn criterion_06a_ladder_mean_cell_penalty() {
    // Mean cross-entropy penalty per ladder cell under uniform-in-cell
    // Monte Carlo, compared against the budget E with 25% tolerance.
    let e = 1.0 / 300.0;
    let ladder = build_ladder(0.1, 200.0, e);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst_ratio_lo = f64::INFINITY;
    let mut worst_ratio_hi = 0.0f64;
    let mut all_within = true;
    for i in 0..ladder.len() {
        let node = ladder.node(i);
        if !(1.0..=200.0).contains(&node) {
            continue;
        }
        let w = cell_width(node, e);
        let mut mean = 0.0;
        let n = 20_000;
        for _ in 0..n {
            let s = node + w * (rng.gen::<f64>() - 0.5);
            mean += cross_entropy(s, node) - entropy(s);
        }
        mean /= n as f64;
        let ratio = mean / e;
        worst_ratio_lo = worst_ratio_lo.min(ratio);
        worst_ratio_hi = worst_ratio_hi.max(ratio);
        if !(0.75..=1.25).contains(&ratio) {
            all_within = false;
        }
    }
    assert!(report(
        "06a ladder-mean-cell-penalty",
        all_within,
        &format!("mean/E ranged {worst_ratio_lo:.3}..{worst_ratio_hi:.3} across cells (tolerance 0.75..1.25)")
    ));
}

#[test]
fn criterion_06b_ladder_size_scaling() {
    let e = 1.0 / 300.0;
    let small = build_ladder(0.1, 25.0, e).len() as i64;
    let large = build_ladder(0.1, 200.0, e).len() as i64;
    let diff = large - 2 * small;
    assert!(report(
        "06b ladder-size-scaling",
        diff.abs() <= 1,
        &format!("count(200) = {large}, 2 x count(25) = {}", 2 * small)
    ));
}

// ---------------------------------------------------------------------------
// 7. quantizer properties
// ---------------------------------------------------------------------------

#[test]
fn criterion_07_quantizer_properties() {
    // optimality ratio ρ/q^{p+1} constant at tabulation knots
    let rho = Density::Epd(EpdParams::new(2.0, 1.0, 0.0).unwrap());
    let qd = density_distortion_optimal(&rho, 2.0, Some((-8.0, 8.0))).unwrap();
    let (xs, q) = qd.grid();
    let mut ratio_err = 0.0f64;
    let mut base = None;
    for i in 0..xs.len() {
        let r = rho.pdf(xs[i]);
        if r > 1e-12 {
            let ratio = r / q[i].powi(3);
            let b = *base.get_or_insert(ratio);
            ratio_err = ratio_err.max((ratio / b - 1.0).abs());
        }
    }

    // zero-integral perturbations never reduce the distortion functional
    let base_d = asymptotic_distortion(&rho, &qd, 2.0).unwrap();
    let h = xs[1] - xs[0];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut perturb_ok = true;
    for _ in 0..20 {
        let center = rng.gen_range(-4.0..4.0);
        let width = rng.gen_range(0.3..1.5);
        let mut bump: Vec<f64> = xs.iter().map(|&x| (-((x - center) / width).powi(2)).exp()).collect();
        let total_bump: f64 = bump.iter().sum::<f64>() * h;
        let mean = total_bump / (xs[xs.len() - 1] - xs[0]);
        for v in bump.iter_mut() {
            *v -= mean;
        }
        let eps = 1e-3;
        let perturbed: Vec<f64> = q.iter().zip(&bump).map(|(&qi, &bi)| (qi + eps * bi).max(1e-12)).collect();
        let norm: f64 = perturbed.iter().sum::<f64>() * h;
        let mut d = 0.0;
        for i in 0..xs.len() {
            let r = rho.pdf(xs[i]);
            if r > 1e-300 {
                let w = if i == 0 || i == xs.len() - 1 { 0.5 } else { 1.0 };
                d += w * r / (perturbed[i] / norm).powi(2) * h;
            }
        }
        if d < base_d - 1e-9 {
            perturb_ok = false;
        }
    }

    // λ = 0 rate-distortion density equals the distortion-optimal one
    let lap = Density::Epd(EpdParams::new(1.0, 1.0, 0.0).unwrap());
    let a = density_rd(&lap, 0.0, RdPower::P1, Some((-15.0, 15.0))).unwrap();
    let b = density_distortion_optimal(&lap, 1.0, Some((-15.0, 15.0))).unwrap();
    let (_, qa) = a.grid();
    let (_, qb) = b.grid();
    let lambda_zero_err = qa
        .iter()
        .zip(qb.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0f64, f64::max);

    // even-N dominance for the κ = 1/2 shape on [−10, 10]
    let heavy = Density::Epd(EpdParams::new(0.5, 1.0, 0.0).unwrap());
    let uqd = QuantDensity::from_fn(-10.0, 10.0, |_| 1.0).unwrap();
    let pts: Vec<_> = (1..=31).map(|n| eval_rd(&heavy, &nodes_from_density(&uqd, n))).collect();
    let mut dominance = true;
    for even in (2..=30usize).step_by(2) {
        let e = &pts[even - 1];
        let dominated = (1..=31).step_by(2).any(|odd| {
            let o = &pts[odd - 1];
            o.rate <= e.rate + 1e-12
                && o.distortion <= e.distortion + 1e-12
                && (o.rate < e.rate - 1e-9 || o.distortion < e.distortion - 1e-9)
        });
        if !dominated {
            dominance = false;
        }
    }

    let pass = ratio_err < 1e-6 && perturb_ok && lambda_zero_err < 1e-9 && dominance;
    assert!(report(
        "07 quantizer-properties",
        pass,
        &format!(
            "ratio err {ratio_err:.2e}, perturbations ok: {perturb_ok}, λ=0 err {lambda_zero_err:.2e}, dominance: {dominance}"
        )
    ));
}

// ---------------------------------------------------------------------------
// 8. stream coder
// ---------------------------------------------------------------------------

#[test]
fn criterion_08_coder() {
    let sigmas = [0.7, 3.0, 17.0, 80.0];
    let specs: Vec<_> = sigmas.iter().map(|&s| geometric_probs(s, table_half_width(s))).collect();
    let tables: Vec<CodingTable> = specs
        .iter()
        .map(|sp| CodingTable::from_probs(&sp.probs, PRECISION).unwrap())
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let n = 1_000_000usize;
    let mut stream = Vec::with_capacity(n);
    // inverse-CDF draws from each table's integer distribution
    let cdfs: Vec<Vec<f64>> = specs
        .iter()
        .map(|sp| {
            let mut acc = 0.0;
            sp.probs
                .iter()
                .map(|p| {
                    acc += p;
                    acc
                })
                .collect()
        })
        .collect();
    for _ in 0..n {
        let tid = rng.gen_range(0..tables.len()) as u16;
        let u: f64 = rng.gen();
        let sym = cdfs[tid as usize].partition_point(|&c| c < u) as u16;
        let sym = sym.min(tables[tid as usize].num_symbols() as u16 - 1);
        stream.push((sym, tid));
    }
    let bytes = encode_stream(&stream, &tables);
    let ids: Vec<u16> = stream.iter().map(|&(_, t)| t).collect();
    let decoded = decode_stream(&bytes, &ids, &tables).unwrap();
    let round_trip = decoded == stream.iter().map(|&(s, _)| s).collect::<Vec<_>>();

    let ideal: f64 = stream.iter().map(|&(s, t)| tables[t as usize].cost_bits(s)).sum();
    let gap = (bytes.len() as f64 * 8.0 - ideal) / n as f64;
    let pass = round_trip && gap <= 0.01;
    assert!(report(
        "08 coder",
        pass,
        &format!("round trip: {round_trip}, efficiency gap {gap:.6} bits/symbol")
    ));
}

// ---------------------------------------------------------------------------
// 9. codec
// ---------------------------------------------------------------------------

#[test]
fn criterion_09_codec() {
    let corpus = synth_corpus(5, 128, 128, 1, 0xC0DE);
    let models = epq::codec::models_from_images(&corpus, ColorSpace::Rgb).unwrap();

    let mut reencode_ok = true;
    let mut mirror_ok = true;
    for img in &corpus {
        let config = CodecConfig {
            colorspace: ColorSpace::Rgb,
            quality: 50,
            embed_models: true,
            ..CodecConfig::default()
        };
        let bytes = encode_image(img, &config, Some(&models)).unwrap();
        let (decoded, _) = epq::codec::decode_image(&bytes).unwrap();
        let bytes2 = encode_image(&decoded, &config, Some(&models)).unwrap();
        let (decoded2, _) = epq::codec::decode_image(&bytes2).unwrap();
        let bytes3 = encode_image(&decoded2, &config, Some(&models)).unwrap();
        if bytes2 != bytes3 {
            reencode_ok = false;
        }

        let mut enc_trace = Vec::new();
        let _ = encode_image_traced(img, &config, Some(&models), Some(&mut enc_trace)).unwrap();
        let mut dec_trace = Vec::new();
        decode_image_traced(&bytes, None, Some(&mut dec_trace)).unwrap();
        if enc_trace != dec_trace {
            mirror_ok = false;
        }
    }

    // quality monotonicity in rate and distortion
    let img = &corpus[0];
    let rate_mse = |quality: u8| {
        let config = CodecConfig { colorspace: ColorSpace::Rgb, quality, ..CodecConfig::default() };
        let (_, sizes, _) = encode_image_traced(img, &config, Some(&models), None).unwrap();
        let bytes = encode_image(img, &config, Some(&models)).unwrap();
        let (decoded, _) = epq::codec::decode_image_with_models(&bytes, Some(&models)).unwrap();
        let mse: f64 = img
            .data
            .iter()
            .zip(decoded.data.iter())
            .map(|(&a, &b)| (a as f64 - b as f64).powi(2))
            .sum::<f64>()
            / img.data.len() as f64;
        (sizes.iter().sum::<usize>(), mse)
    };
    let (r50, d50) = rate_mse(50);
    let (r95, d95) = rate_mse(95);
    let monotone = r95 > r50 && d95 < d50;

    let pass = reencode_ok && mirror_ok && monotone;
    assert!(report(
        "09 codec",
        pass,
        &format!(
            "re-encode fixed point: {reencode_ok}, mirror: {mirror_ok}, q95 vs q50: rate {r95}>{r50}, mse {d95:.3}<{d50:.3}"
        )
    ));
}

// ---------------------------------------------------------------------------
// 10. corpus-level model gains
// ---------------------------------------------------------------------------

#[test]
fn criterion_10_model_gains() {
    // (a), (b) on a 20-image 8-bit grayscale corpus
    let gray = synth_corpus(20, 192, 192, 1, 0xA11);
    let mut blocks = Vec::new();
    for img in &gray {
        let plane = &to_planes(img, false)[0];
        blocks.extend(partition_and_pad(plane).unwrap().blocks.iter().map(dct2_forward));
    }

    // (a) mean AC log-likelihood gain of κ = 1/2 over κ = 1
    let mut gain = 0.0;
    for &(j, k) in zigzag().iter() {
        let idx = pos_index(j, k);
        let values: Vec<f64> = blocks.iter().map(|b| b[idx]).collect();
        let half = epd_mle(&values, MuPolicy::Fixed(0.0), KappaPolicy::Fixed(0.5)).unwrap();
        let one = epd_mle(&values, MuPolicy::Fixed(0.0), KappaPolicy::Fixed(1.0)).unwrap();
        gain += half.mean_log2_likelihood - one.mean_log2_likelihood;
    }
    gain /= 63.0;

    // (b) zigzag width-prediction saving
    let models = fit_sigma_zigzag(&blocks).unwrap();
    let (bits_const, bits_pred) = zigzag_log_loss(&blocks, &models);
    let saving = bits_const - bits_pred;

    // (c) profile ladder strictly monotone on the color twin corpus
    let color = synth_corpus(20, 192, 192, 3, 0xA11);
    let evals = evaluate_pipeline(&color, 50, &DEFAULT_STAGES).unwrap();
    let ordering: Vec<f64> = evals.iter().map(|e| e.bits_per_pixel).collect();
    let monotone = ordering.windows(2).all(|w| w[1] < w[0]);

    let pass = gain >= 0.05 && saving >= 0.25 && monotone;
    assert!(report(
        "10 model-gains",
        pass,
        &format!(
            "kappa-1/2 gain {gain:.3} bits/value, zigzag saving {saving:.3} bits/value, stage bpp {ordering:?}"
        )
    ));
}

// ---------------------------------------------------------------------------
// 11. CCA
// ---------------------------------------------------------------------------

fn planted_data(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gauss = move || {
        let (u1, u2): (f64, f64) = (rng.gen_range(1e-12..1.0), rng.gen());
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    };
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let shared = gauss();
        x.push((0..5).map(|i| 0.8 * shared * (1.0 + 0.1 * i as f64) + gauss()).collect());
        y.push((0..5).map(|i| 0.6 * shared * (1.0 - 0.05 * i as f64) + gauss()).collect());
    }
    (x, y)
}

/// Randomized search oracle: alternating maximization of the sample
/// correlation from random unit starts (no eigensolver involved).
fn random_search_first_corr(x: &[Vec<f64>], y: &[Vec<f64>], restarts: usize, seed: u64) -> f64 {
    let n = x.len() as f64;
    let (dx, dy) = (x[0].len(), y[0].len());
    let mean = |rows: &[Vec<f64>], d: usize| -> Vec<f64> {
        let mut m = vec![0.0; d];
        for r in rows {
            for i in 0..d {
                m[i] += r[i];
            }
        }
        m.iter().map(|v| v / n).collect()
    };
    let mx = mean(x, dx);
    let my = mean(y, dy);
    let project = |rows: &[Vec<f64>], w: &[f64], m: &[f64]| -> Vec<f64> {
        rows.iter()
            .map(|r| r.iter().zip(w).zip(m.iter()).map(|((v, wi), mi)| (v - mi) * wi).sum())
            .collect()
    };
    let corr = |a: &[f64], b: &[f64]| -> f64 {
        let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
        for (p, q) in a.iter().zip(b) {
            sxy += p * q;
            sxx += p * p;
            syy += q * q;
        }
        sxy / (sxx.sqrt() * syy.sqrt())
    };
    let best_dir = |rows: &[Vec<f64>], m: &[f64], target: &[f64]| -> Vec<f64> {
        let d = rows[0].len();
        let mut g = GramSystem::new(d, 1);
        for (r, &t) in rows.iter().zip(target) {
            let centered: Vec<f64> = r.iter().zip(m.iter()).map(|(v, mi)| v - mi).collect();
            g.add(&centered, &[t]);
        }
        let all: Vec<usize> = (0..d).collect();
        g.solve_subset(0, &all).unwrap().0
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: f64 = 0.0;
    for _ in 0..restarts {
        let mut a: Vec<f64> = (0..dx).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for _ in 0..40 {
            let px = project(x, &a, &mx);
            let b = best_dir(y, &my, &px);
            let py = project(y, &b, &my);
            a = best_dir(x, &mx, &py);
            best = best.max(corr(&project(x, &a, &mx), &py));
        }
    }
    best
}

#[test]
fn criterion_11_cca() {
    let (x, y) = planted_data(4000, 0xCCA);
    let res = cca(&x, &y, 3).unwrap();
    let oracle = random_search_first_corr(&x, &y, 25, 0xFACE);
    let corr_err = (res.pairs[0].2 - oracle).abs();

    // invertible affine reparameterization of X
    let t = [
        [1.2, 0.3, 0.0, 0.0, 0.1],
        [0.0, 0.9, -0.2, 0.0, 0.0],
        [0.0, 0.0, 1.5, 0.4, 0.0],
        [0.2, 0.0, 0.0, 0.8, 0.0],
        [0.0, 0.1, 0.0, 0.0, 1.1],
    ];
    let xt: Vec<Vec<f64>> = x
        .iter()
        .map(|r| {
            (0..5)
                .map(|i| t[i].iter().zip(r).map(|(a, b)| a * b).sum::<f64>() + 2.0 * i as f64)
                .collect()
        })
        .collect();
    let res_t = cca(&xt, &y, 3).unwrap();
    let affine_err = res
        .pairs
        .iter()
        .zip(res_t.pairs.iter())
        .map(|(a, b)| (a.2 - b.2).abs())
        .fold(0.0f64, f64::max);

    let pass = corr_err < 1e-3 && affine_err < 1e-8;
    assert!(report(
        "11 cca",
        pass,
        &format!("first correlation {:.6} vs oracle {oracle:.6} (err {corr_err:.2e}), affine err {affine_err:.2e}", res.pairs[0].2)
    ));
}
