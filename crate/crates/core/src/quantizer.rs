//! Flexible quantization through quantization density functions: a
//! nonnegative density q integrating to 1 whose inverse CDF on the regular
//! lattice (i−1/2)/N places the N quantization nodes.
//!
//! Distortion-optimal densities are q ∝ ρ^{1/(p+1)}; joint rate-distortion
//! optimization with multipliers (μ, λ) gives q = √(μρ+λ²ρ²) − λρ for
//! p = 1 and the positive root of q³ + 2λρq² − μρ = 0 for p = 2.

use crate::epd::{EpdParams, RateDistortionPoint};
use thiserror::Error;

/// Knot count of the tabulation grid (4096 cells).
const GRID_KNOTS: usize = 4097;
/// Half-width of the default tabulation domain in σ units.
const DOMAIN_SIGMAS: f64 = 20.0;

#[derive(Debug, Error, PartialEq)]
pub enum QuantError {
    #[error("density must be positive somewhere on the domain")]
    DegenerateDensity,
    #[error("normalization failed: reached multiplier limit with ∫q = {achieved}")]
    NormalizationFailed { achieved: f64 },
    #[error("quantization density vanishes where the data density is positive")]
    DivergentFunctional,
    #[error("error power p must be ≥ 1, got {0}")]
    InvalidPower(f64),
}

// ---------------------------------------------------------------------------
// Data densities
// ---------------------------------------------------------------------------

/// A model density ρ: either an analytic exponential power distribution or
/// a tabulated density on a uniform grid (linearly interpolated, zero
/// outside its domain).
#[derive(Debug, Clone)]
pub enum Density {
    Epd(EpdParams),
    Table { x_lo: f64, x_hi: f64, ps: Vec<f64> },
}

impl Density {
    pub fn table(x_lo: f64, x_hi: f64, ps: Vec<f64>) -> Self {
        assert!(x_hi > x_lo && ps.len() >= 2);
        // normalize to integrate to 1 over the domain (trapezoid)
        let h = (x_hi - x_lo) / (ps.len() - 1) as f64;
        let total: f64 = trapezoid(&ps, h);
        assert!(total > 0.0);
        Density::Table { x_lo, x_hi, ps: ps.into_iter().map(|p| p / total).collect() }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match self {
            Density::Epd(p) => p.pdf(x),
            Density::Table { x_lo, x_hi, ps } => {
                if x < *x_lo || x > *x_hi {
                    return 0.0;
                }
                let h = (x_hi - x_lo) / (ps.len() - 1) as f64;
                let t = (x - x_lo) / h;
                let i = (t.floor() as usize).min(ps.len() - 2);
                let f = t - i as f64;
                ps[i] * (1.0 - f) + ps[i + 1] * f
            }
        }
    }

    /// Suggested tabulation domain.
    pub fn domain(&self) -> (f64, f64) {
        match self {
            Density::Epd(p) => (p.mu() - DOMAIN_SIGMAS * p.sigma(), p.mu() + DOMAIN_SIGMAS * p.sigma()),
            Density::Table { x_lo, x_hi, .. } => (*x_lo, *x_hi),
        }
    }

    /// Probability of [a, b]; infinite bounds allowed.
    pub fn segment_prob(&self, a: f64, b: f64) -> f64 {
        match self {
            Density::Epd(p) => {
                let ca = if a == f64::NEG_INFINITY { 0.0 } else { p.cdf(a) };
                let cb = if b == f64::INFINITY { 1.0 } else { p.cdf(b) };
                (cb - ca).max(0.0)
            }
            Density::Table { x_lo, x_hi, .. } => {
                let (a, b) = (a.max(*x_lo), b.min(*x_hi));
                if a >= b {
                    return 0.0;
                }
                self.integrate(a, b, |_, p| p)
            }
        }
    }

    /// ∫_a^b (x − c)² ρ dx; infinite bounds allowed.
    pub fn segment_sq_err(&self, a: f64, b: f64, c: f64) -> f64 {
        match self {
            Density::Epd(p) => {
                // clip unbounded ends where the mass is already negligible
                let lo = if a == f64::NEG_INFINITY { f64::NEG_INFINITY } else { a };
                let hi = if b == f64::INFINITY { f64::INFINITY } else { b };
                p.segment_sq_err(lo, hi, c)
            }
            Density::Table { x_lo, x_hi, .. } => {
                let (a, b) = (a.max(*x_lo), b.min(*x_hi));
                if a >= b {
                    return 0.0;
                }
                self.integrate(a, b, |x, p| (x - c) * (x - c) * p)
            }
        }
    }

    /// Simpson integration of f(x, ρ(x)) for tabulated densities.
    fn integrate<F: Fn(f64, f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let n = 4096;
        let h = (b - a) / n as f64;
        let g = |x: f64| f(x, self.pdf(x));
        let mut s = g(a) + g(b);
        for i in 1..n {
            s += g(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }
}

fn trapezoid(ys: &[f64], h: f64) -> f64 {
    let inner: f64 = ys[1..ys.len() - 1].iter().sum();
    (inner + 0.5 * (ys[0] + ys[ys.len() - 1])) * h
}

// ---------------------------------------------------------------------------
// Monotone cubic interpolation (Fritsch–Carlson)
// ---------------------------------------------------------------------------

/// Monotone piecewise-cubic interpolant through strictly increasing data.
#[derive(Debug, Clone)]
struct Pchip {
    xs: Vec<f64>,
    ys: Vec<f64>,
    ds: Vec<f64>,
}

impl Pchip {
    fn new(xs: Vec<f64>, ys: Vec<f64>) -> Self {
        let n = xs.len();
        debug_assert!(n >= 2);
        let mut deltas = Vec::with_capacity(n - 1);
        for i in 0..n - 1 {
            deltas.push((ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]));
        }
        let mut ds = vec![0.0; n];
        ds[0] = deltas[0];
        ds[n - 1] = deltas[n - 2];
        for i in 1..n - 1 {
            let (d0, d1) = (deltas[i - 1], deltas[i]);
            if d0 * d1 <= 0.0 {
                ds[i] = 0.0;
            } else {
                let (h0, h1) = (xs[i] - xs[i - 1], xs[i + 1] - xs[i]);
                let w1 = 2.0 * h1 + h0;
                let w2 = h1 + 2.0 * h0;
                ds[i] = (w1 + w2) / (w1 / d0 + w2 / d1);
            }
        }
        Self { xs, ys, ds }
    }

    fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let i = match self.xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(i) => return self.ys[i],
            Err(i) => i - 1,
        };
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (d0, d1) = (self.ds[i] * h, self.ds[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        y0 * (2.0 * t3 - 3.0 * t2 + 1.0) + d0 * (t3 - 2.0 * t2 + t) + y1 * (-2.0 * t3 + 3.0 * t2)
            + d1 * (t3 - t2)
    }
}

// ---------------------------------------------------------------------------
// Quantization densities
// ---------------------------------------------------------------------------

/// A tabulated quantization density on [x_lo, x_hi]: values q(x) on a
/// uniform grid with its CDF Q (Q(x_lo)=0, Q(x_hi)=1) and monotone cubic
/// interpolation for both Q and Q^{-1}.
#[derive(Debug, Clone)]
pub struct QuantDensity {
    pub x_lo: f64,
    pub x_hi: f64,
    xs: Vec<f64>,
    q: Vec<f64>,
    cum: Vec<f64>,
    fwd: Pchip,
    inv: Pchip,
}

impl QuantDensity {
    /// Tabulate a raw (unnormalized, nonnegative) density function and
    /// normalize it to integrate to 1 over the domain. Per-cell Simpson is
    /// used for the cumulative, so the function is sampled at cell
    /// midpoints too.
    pub fn from_fn<F: Fn(f64) -> f64>(x_lo: f64, x_hi: f64, f: F) -> Result<Self, QuantError> {
        assert!(x_hi > x_lo);
        let n = GRID_KNOTS;
        let h = (x_hi - x_lo) / (n - 1) as f64;
        let xs: Vec<f64> = (0..n).map(|i| x_lo + i as f64 * h).collect();
        let q_raw: Vec<f64> = xs.iter().map(|&x| f(x).max(0.0)).collect();
        let mut cum = vec![0.0; n];
        for i in 0..n - 1 {
            let mid = f(xs[i] + 0.5 * h).max(0.0);
            cum[i + 1] = cum[i] + h / 6.0 * (q_raw[i] + 4.0 * mid + q_raw[i + 1]);
        }
        let total = cum[n - 1];
        if !(total > 0.0 && total.is_finite()) {
            return Err(QuantError::DegenerateDensity);
        }
        let q: Vec<f64> = q_raw.iter().map(|v| v / total).collect();
        let cum: Vec<f64> = cum.iter().map(|v| v / total).collect();

        let fwd = Pchip::new(xs.clone(), cum.clone());
        // strictly increasing subsequence for the inverse; flat stretches
        // carry less than one ulp of mass
        let mut inv_u = vec![cum[0]];
        let mut inv_x = vec![xs[0]];
        for i in 1..n {
            if cum[i] > *inv_u.last().unwrap() {
                inv_u.push(cum[i]);
                inv_x.push(xs[i]);
            }
        }
        if inv_u.len() < 2 {
            return Err(QuantError::DegenerateDensity);
        }
        let inv = Pchip::new(inv_u, inv_x);
        Ok(Self { x_lo, x_hi, xs, q, cum, fwd, inv })
    }

    pub fn grid(&self) -> (&[f64], &[f64]) {
        (&self.xs, &self.q)
    }

    /// Interpolated density value.
    pub fn q_at(&self, x: f64) -> f64 {
        if x < self.x_lo || x > self.x_hi {
            return 0.0;
        }
        let h = (self.x_hi - self.x_lo) / (self.xs.len() - 1) as f64;
        let t = (x - self.x_lo) / h;
        let i = (t.floor() as usize).min(self.xs.len() - 2);
        let f = t - i as f64;
        self.q[i] * (1.0 - f) + self.q[i + 1] * f
    }

    /// Q(x) = ∫_{x_lo}^x q, clamped to [0,1].
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.x_lo {
            0.0
        } else if x >= self.x_hi {
            1.0
        } else {
            self.fwd.eval(x).clamp(0.0, 1.0)
        }
    }

    /// Q^{-1}(u) for u in [0,1].
    pub fn inv_cdf(&self, u: f64) -> f64 {
        if u <= 0.0 {
            self.x_lo
        } else if u >= 1.0 {
            self.x_hi
        } else {
            self.inv.eval(u).clamp(self.x_lo, self.x_hi)
        }
    }

    /// ∫ q dx over the domain (1 by construction, up to rounding).
    pub fn total_mass(&self) -> f64 {
        self.cum[self.cum.len() - 1]
    }
}

/// Error power for the rate-distortion density.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RdPower {
    P1,
    P2,
}

/// Distortion-optimal quantization density q ∝ ρ^{1/(p+1)}.
///
/// For an EPD input this is again an EPD, with scale σ_q = σ·(p+1)^{1/κ}
/// (the density flattens, so the scale grows).
pub fn density_distortion_optimal(
    rho: &Density,
    p: f64,
    domain: Option<(f64, f64)>,
) -> Result<QuantDensity, QuantError> {
    if p < 1.0 {
        return Err(QuantError::InvalidPower(p));
    }
    let (lo, hi) = domain.unwrap_or_else(|| rho.domain());
    match rho {
        Density::Epd(params) => {
            let scaled = EpdParams::new(
                params.kappa(),
                params.sigma() * (p + 1.0).powf(1.0 / params.kappa()),
                params.mu(),
            )
            .expect("valid scaled params");
            QuantDensity::from_fn(lo, hi, |x| scaled.pdf(x))
        }
        Density::Table { .. } => QuantDensity::from_fn(lo, hi, |x| rho.pdf(x).powf(1.0 / (p + 1.0))),
    }
}

/// Rate-distortion quantization density for multiplier λ ≥ 0, with the
/// normalization multiplier μ solved by bisection so that ∫q = 1.
///
/// λ = 0 reduces to the distortion-optimal density; large λ drives q
/// toward the uniform density on the domain.
pub fn density_rd(
    rho: &Density,
    lambda: f64,
    p: RdPower,
    domain: Option<(f64, f64)>,
) -> Result<QuantDensity, QuantError> {
    assert!(lambda >= 0.0);
    let (lo, hi) = domain.unwrap_or_else(|| rho.domain());

    let q_point = |mu: f64, rx: f64| -> f64 {
        if rx <= 0.0 {
            return 0.0;
        }
        match p {
            RdPower::P1 => {
                // stable quotient form of √(μρ+λ²ρ²) − λρ
                let disc = (mu * rx + lambda * lambda * rx * rx).sqrt();
                mu * rx / (disc + lambda * rx)
            }
            RdPower::P2 => {
                // positive root of q³ + 2λρ q² − μρ = 0 (sign change checked:
                // negative at 0, nonnegative at (μρ)^{1/3})
                let target = mu * rx;
                let mut q = target.cbrt();
                for _ in 0..80 {
                    let f = q * q * q + 2.0 * lambda * rx * q * q - target;
                    let fp = 3.0 * q * q + 4.0 * lambda * rx * q;
                    if fp <= 0.0 {
                        break;
                    }
                    let next = (q - f / fp).max(0.0);
                    if (next - q).abs() <= 1e-15 * q.max(1e-300) {
                        q = next;
                        break;
                    }
                    q = next;
                }
                q
            }
        }
    };

    let h = (hi - lo) / 8192.0;
    let mass = |mu: f64| -> f64 {
        let mut s = 0.0;
        for i in 0..8192 {
            let a = lo + i as f64 * h;
            let qa = q_point(mu, rho.pdf(a));
            let qm = q_point(mu, rho.pdf(a + 0.5 * h));
            let qb = q_point(mu, rho.pdf(a + h));
            s += h / 6.0 * (qa + 4.0 * qm + qb);
        }
        s
    };

    // bracket the normalization multiplier
    let mut mu_hi = 1.0;
    let mut reached = mass(mu_hi);
    while reached < 1.0 {
        mu_hi *= 2.0;
        if mu_hi > 1e300 {
            return Err(QuantError::NormalizationFailed { achieved: reached });
        }
        reached = mass(mu_hi);
    }
    let mut mu_lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (mu_lo + mu_hi);
        let m = mass(mid);
        if (m - 1.0).abs() <= 1e-10 {
            mu_lo = mid;
            mu_hi = mid;
            break;
        }
        if m < 1.0 {
            mu_lo = mid;
        } else {
            mu_hi = mid;
        }
    }
    let mu = 0.5 * (mu_lo + mu_hi);
    QuantDensity::from_fn(lo, hi, |x| q_point(mu, rho.pdf(x)))
}

// ---------------------------------------------------------------------------
// Finite quantizers
// ---------------------------------------------------------------------------

/// N ascending quantization nodes with midpoint region boundaries.
#[derive(Debug, Clone)]
pub struct QuantizerN {
    nodes: Vec<f64>,
    bounds: Vec<f64>,
}

impl QuantizerN {
    pub fn from_nodes(nodes: Vec<f64>) -> Self {
        assert!(!nodes.is_empty());
        debug_assert!(nodes.windows(2).all(|w| w[1] >= w[0]));
        let bounds = nodes.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        Self { nodes, bounds }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.bounds
    }

    /// Index (0-based) of the region containing x; values beyond the
    /// domain clamp to the extreme regions.
    pub fn quantize(&self, x: f64) -> usize {
        self.bounds.partition_point(|&b| b < x)
    }

    /// Reconstruction node of a region index.
    pub fn dequantize(&self, index: usize) -> f64 {
        self.nodes[index.min(self.nodes.len() - 1)]
    }
}

/// Place N nodes at Q^{-1}((i − 1/2)/N) for i = 1..N.
pub fn nodes_from_density(qd: &QuantDensity, n: usize) -> QuantizerN {
    assert!(n >= 1);
    let nodes = (1..=n).map(|i| qd.inv_cdf((i as f64 - 0.5) / n as f64)).collect();
    QuantizerN::from_nodes(nodes)
}

/// Rate (region-probability entropy) and distortion (mean squared error)
/// of a quantizer against ρ; tails beyond the extreme boundaries belong to
/// the extreme regions.
pub fn eval_rd(rho: &Density, quant: &QuantizerN) -> RateDistortionPoint {
    let n = quant.len();
    let mut rate = 0.0;
    let mut dist = 0.0;
    for i in 0..n {
        let a = if i == 0 { f64::NEG_INFINITY } else { quant.bounds[i - 1] };
        let b = if i == n - 1 { f64::INFINITY } else { quant.bounds[i] };
        let prob = rho.segment_prob(a, b);
        if prob > 0.0 {
            rate -= prob * prob.log2();
        }
        dist += rho.segment_sq_err(a, b, quant.nodes[i]);
    }
    RateDistortionPoint { rate, distortion: dist }
}

/// Asymptotic distortion functional 𝒟 = ∫ ρ/q^p dx; 𝒟/N^p approximates
/// the finite-N distortion.
pub fn asymptotic_distortion(rho: &Density, qd: &QuantDensity, p: f64) -> Result<f64, QuantError> {
    let (xs, q) = qd.grid();
    let h = xs[1] - xs[0];
    let mut acc = 0.0;
    for i in 0..xs.len() {
        let r = rho.pdf(xs[i]);
        if r <= 1e-300 {
            continue;
        }
        if q[i] <= 1e-200 {
            if r > 1e-12 {
                return Err(QuantError::DivergentFunctional);
            }
            continue;
        }
        let w = if i == 0 || i == xs.len() - 1 { 0.5 } else { 1.0 };
        acc += w * r / q[i].powf(p) * h;
    }
    Ok(acc)
}

/// Asymptotic rate functional ℋ = ∫ ρ lg(q/ρ) dx (≤ 0, zero only at
/// q = ρ); ℋ + lg N approximates the finite-N rate.
pub fn asymptotic_entropy(rho: &Density, qd: &QuantDensity) -> Result<f64, QuantError> {
    let (xs, q) = qd.grid();
    let h = xs[1] - xs[0];
    let mut acc = 0.0;
    for i in 0..xs.len() {
        let r = rho.pdf(xs[i]);
        if r <= 1e-300 {
            continue;
        }
        if q[i] <= 1e-200 {
            if r > 1e-12 {
                return Err(QuantError::DivergentFunctional);
            }
            continue;
        }
        let w = if i == 0 || i == xs.len() - 1 { 0.5 } else { 1.0 };
        acc += w * r * (q[i] / r).log2() * h;
    }
    Ok(acc)
}
