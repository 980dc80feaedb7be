//! Deterministic synthetic test images with natural-image-like DCT
//! statistics: smooth large-scale shading, spatially clustered contrast
//! (scale mixing makes the AC marginals heavy-tailed), band-limited
//! texture, and occasional step edges.

use crate::image_io::Image;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Smooth random field: bilinear interpolation of coarse control points,
/// values in [0,1].
fn smooth_field(w: usize, h: usize, cell: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let gw = w.div_ceil(cell) + 2;
    let gh = h.div_ceil(cell) + 2;
    let ctrl: Vec<f64> = (0..gw * gh).map(|_| rng.gen()).collect();
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        let fy = y as f64 / cell as f64;
        let gy = fy.floor() as usize;
        let ty = fy - gy as f64;
        for x in 0..w {
            let fx = x as f64 / cell as f64;
            let gx = fx.floor() as usize;
            let tx = fx - gx as f64;
            let v00 = ctrl[gy * gw + gx];
            let v10 = ctrl[gy * gw + gx + 1];
            let v01 = ctrl[(gy + 1) * gw + gx];
            let v11 = ctrl[(gy + 1) * gw + gx + 1];
            let top = v00 * (1.0 - tx) + v10 * tx;
            let bot = v01 * (1.0 - tx) + v11 * tx;
            out.push(top * (1.0 - ty) + bot * ty);
        }
    }
    out
}

/// One grayscale luma field with natural-like statistics, values in [0,1].
fn synth_luma(w: usize, h: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let shading = smooth_field(w, h, 96, rng);
    let shading2 = smooth_field(w, h, 40, rng);
    // log-contrast field: lognormal local activity, spatially clustered
    let log_contrast = smooth_field(w, h, 48, rng);
    // per-block activity jitter on top of the smooth field
    let bw = w.div_ceil(8);
    let bh = h.div_ceil(8);
    let block_jitter: Vec<f64> = (0..bw * bh).map(|_| rng.gen_range(-0.5..0.5)).collect();

    // band-limited texture: white noise with a one-pole smoothing pass in
    // both directions
    let mut noise: Vec<f64> = (0..w * h).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let alpha = 0.55;
    for y in 0..h {
        for x in 1..w {
            noise[y * w + x] = alpha * noise[y * w + x] + (1.0 - alpha) * noise[y * w + x - 1];
        }
    }
    for x in 0..w {
        for y in 1..h {
            noise[y * w + x] = alpha * noise[y * w + x] + (1.0 - alpha) * noise[(y - 1) * w + x];
        }
    }

    // a few rectangles produce hard step edges
    let mut edges = vec![0.0; w * h];
    for _ in 0..6 {
        let x0 = rng.gen_range(0..w);
        let y0 = rng.gen_range(0..h);
        let x1 = (x0 + rng.gen_range(w / 8..w / 2)).min(w);
        let y1 = (y0 + rng.gen_range(h / 8..h / 2)).min(h);
        let v = rng.gen_range(-0.16..0.16);
        for y in y0..y1 {
            for x in x0..x1 {
                edges[y * w + x] += v;
            }
        }
    }

    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let jitter = block_jitter[(y / 8) * bw + (x / 8)];
            let contrast = (1.25 * (log_contrast[i] - 0.5) * 2.0 + jitter).exp() * 0.05;
            let v = 0.25 + 0.45 * shading[i] + 0.12 * (shading2[i] - 0.5) + contrast * noise[i] + edges[i];
            out.push(v.clamp(0.0, 1.0));
        }
    }
    out
}

/// Deterministic synthetic image; channels ∈ {1, 3}. Color images keep
/// the channels strongly correlated through a shared luma field.
pub fn synth_image(width: usize, height: usize, channels: usize, seed: u64) -> Image {
    assert!(channels == 1 || channels == 3);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let luma = synth_luma(width, height, &mut rng);
    let to_u8 = |v: f64| (v * 255.0).round().clamp(0.0, 255.0) as u8;
    if channels == 1 {
        return Image::new(width, height, 1, luma.iter().map(|&v| to_u8(v)).collect());
    }
    // slowly varying chroma riding on the shared luma
    let tint_a = smooth_field(width, height, 128, &mut rng);
    let tint_b = smooth_field(width, height, 128, &mut rng);
    let mut data = Vec::with_capacity(width * height * 3);
    for i in 0..width * height {
        let l = luma[i];
        let a = 0.12 * (tint_a[i] - 0.5);
        let b = 0.12 * (tint_b[i] - 0.5);
        data.push(to_u8(l + a));
        data.push(to_u8(l - 0.4 * a - 0.4 * b));
        data.push(to_u8(l + b));
    }
    Image::new(width, height, 3, data)
}

/// Smooth shading only: no texture, no edges. Calibrates models on
/// low-activity content.
pub fn synth_smooth_image(width: usize, height: usize, channels: usize, seed: u64) -> Image {
    assert!(channels == 1 || channels == 3);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5300d7);
    let a = smooth_field(width, height, 96, &mut rng);
    let b = smooth_field(width, height, 48, &mut rng);
    let to_u8 = |v: f64| (v * 255.0).round().clamp(0.0, 255.0) as u8;
    let luma: Vec<f64> = (0..width * height)
        .map(|i| (0.2 + 0.55 * a[i] + 0.08 * (b[i] - 0.5)).clamp(0.0, 1.0))
        .collect();
    if channels == 1 {
        Image::new(width, height, 1, luma.iter().map(|&v| to_u8(v)).collect())
    } else {
        let mut data = Vec::with_capacity(width * height * 3);
        for &l in &luma {
            data.push(to_u8(l));
            data.push(to_u8(l));
            data.push(to_u8(l));
        }
        Image::new(width, height, 3, data)
    }
}

/// A deterministic corpus: image i uses seed base_seed + i. Every fourth
/// image is smooth-only so models stay calibrated on flat content.
pub fn synth_corpus(count: usize, width: usize, height: usize, channels: usize, base_seed: u64) -> Vec<Image> {
    (0..count)
        .map(|i| {
            let seed = base_seed + i as u64;
            if i % 4 == 3 {
                synth_smooth_image(width, height, channels, seed)
            } else {
                synth_image(width, height, channels, seed)
            }
        })
        .collect()
}
