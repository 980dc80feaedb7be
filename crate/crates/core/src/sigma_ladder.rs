//! Discretization of the normalized width Σ = σ/q into a finite ladder of
//! entropy-coding tables, with closed-form cross-entropy penalties, plus
//! the Golomb and LSB-flush tail codes.
//!
//! A unit-step quantized Laplace of width Σ has the two-sided geometric
//! law p₀ = 1 − e^{−1/(2Σ)}, p_x = e^{−|x|/Σ} sinh(1/(2Σ)). Coding a
//! Σ_p-distributed stream with the table for Σ_q costs the cross entropy
//! h(Σ_p, Σ_q); the ladder spaces its nodes so that the quadratic penalty
//! D(Σ)·ε² stays within the accepted budget E.

use crate::coder::{BitReader, BitWriter, CoderError};

const LOG2_E: f64 = std::f64::consts::LOG2_E;

/// Numerically-found optimal Golomb parameter ratio M/Σ for the geometric
/// tail of a quantized Laplace distribution.
pub const GOLOMB_M_COEFF: f64 = 0.66794;

/// Default accepted cross-entropy penalty: 0.01 bits/pixel across three
/// channels.
pub const DEFAULT_PENALTY_E: f64 = 1.0 / 300.0;

/// Largest central alphabet half-width of a table; beyond it the tail is
/// folded into the escape symbols. Keeps the integer-rounding KL of every
/// table under 1e-3 bits at 14-bit precision.
pub const MAX_TABLE_HALF_WIDTH: i64 = 512;

/// Two-sided geometric symbol probabilities for one Σ, with the tails
/// beyond ±x_max folded into two escape symbols.
///
/// Symbol layout: index 0 = low escape, 1..=2·x_max+1 = values
/// −x_max..=x_max, last = high escape.
#[derive(Debug, Clone)]
pub struct GeometricTable {
    pub sigma: f64,
    pub x_max: i64,
    pub probs: Vec<f64>,
}

impl GeometricTable {
    pub fn num_symbols(&self) -> usize {
        self.probs.len()
    }

    /// Symbol index for a quantized value, escapes for |v| > x_max.
    pub fn symbol_for(&self, v: i64) -> u16 {
        if v < -self.x_max {
            0
        } else if v > self.x_max {
            (self.probs.len() - 1) as u16
        } else {
            (v + self.x_max + 1) as u16
        }
    }

    /// Value carried directly by a symbol; `None` for the escapes.
    pub fn value_for(&self, symbol: u16) -> Option<i64> {
        let s = symbol as i64;
        if s == 0 || s == self.probs.len() as i64 - 1 {
            None
        } else {
            Some(s - self.x_max - 1)
        }
    }

    pub fn is_low_escape(&self, symbol: u16) -> bool {
        symbol == 0
    }

    pub fn is_high_escape(&self, symbol: u16) -> bool {
        symbol as usize == self.probs.len() - 1
    }
}

/// Central probability p₀ = 1 − e^{−1/(2Σ)}.
fn p_zero(sigma: f64) -> f64 {
    -(-1.0 / (2.0 * sigma)).exp_m1()
}

/// Off-center probability p_x = e^{−|x|/Σ} sinh(1/(2Σ)).
fn p_at(sigma: f64, x: i64) -> f64 {
    debug_assert!(x != 0);
    (-(x.abs() as f64) / sigma).exp() * (1.0 / (2.0 * sigma)).sinh()
}

/// One-sided tail mass Σ_{x>k} p_x = sinh(1/(2Σ)) e^{−(k+1)/Σ}/(1−e^{−1/Σ}).
fn tail_mass(sigma: f64, k: i64) -> f64 {
    let one_minus_a = -(-1.0 / sigma).exp_m1();
    (1.0 / (2.0 * sigma)).sinh() * (-((k + 1) as f64) / sigma).exp() / one_minus_a
}

/// Central alphabet half-width for Σ: smallest k with per-side folded tail
/// below 2^{−17}, capped at [`MAX_TABLE_HALF_WIDTH`].
pub fn table_half_width(sigma: f64) -> i64 {
    let target = (2.0f64).powi(-17);
    let a_ln = -1.0 / sigma;
    let one_minus_a = -a_ln.exp_m1();
    let s = (1.0 / (2.0 * sigma)).sinh();
    // solve s · a^{k+1} / (1−a) < target for k
    let k = ((target * one_minus_a / s).ln() / a_ln - 1.0).ceil() as i64;
    k.clamp(1, MAX_TABLE_HALF_WIDTH)
}

/// Build the folded two-sided geometric table for Σ.
pub fn geometric_probs(sigma: f64, x_max: i64) -> GeometricTable {
    assert!(sigma > 0.0 && x_max >= 1);
    let mut probs = Vec::with_capacity(2 * x_max as usize + 3);
    probs.push(tail_mass(sigma, x_max));
    for v in -x_max..=x_max {
        probs.push(if v == 0 { p_zero(sigma) } else { p_at(sigma, v) });
    }
    probs.push(tail_mass(sigma, x_max));
    debug_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    GeometricTable { sigma, x_max, probs }
}

/// Cross entropy h(Σ_p, Σ_q) in bits over the full (unfolded) alphabet,
/// evaluated in closed form through the geometric sums.
pub fn cross_entropy(sigma_p: f64, sigma_q: f64) -> f64 {
    assert!(sigma_p > 0.0 && sigma_q > 0.0);
    let s_p = (1.0 / (2.0 * sigma_p)).sinh();
    let a_p = (-1.0 / sigma_p).exp();
    let one_minus_ap = -(-1.0 / sigma_p).exp_m1();
    let lg_sq = (1.0 / (2.0 * sigma_q)).sinh().log2();
    let lg_aq = -LOG2_E / sigma_q;
    let sum_p = a_p / one_minus_ap; // Σ_{x≥1} a^x
    let sum_xp = a_p / (one_minus_ap * one_minus_ap); // Σ_{x≥1} x a^x
    let p0p = p_zero(sigma_p);
    -p0p * p_zero(sigma_q).log2() - 2.0 * s_p * (sum_p * lg_sq + sum_xp * lg_aq)
}

/// Shannon entropy of the quantized-Laplace table: h(Σ, Σ).
pub fn entropy(sigma: f64) -> f64 {
    cross_entropy(sigma, sigma)
}

/// Quadratic penalty coefficient D(Σ) of h(Σ, Σ+ε) − h(Σ, Σ) ≈ D(Σ) ε²,
/// with asymptote lg(e)/(2Σ²).
pub fn penalty_coeff(sigma: f64) -> f64 {
    assert!(sigma > 0.0);
    let e_half = (0.5 / sigma).exp();
    let e_one = (1.0 / sigma).exp();
    let e_three_half = (1.5 / sigma).exp();
    let em1 = (1.0 / sigma).exp_m1();
    let num = 3.0 * e_half + e_one + e_three_half - 1.0;
    let den = 8.0 * em1 * em1 * sigma.powi(4);
    num / den * LOG2_E
}

/// Ladder cell width w(Σ) = ∛(24E/D(Σ)) for penalty budget E.
pub fn cell_width(sigma: f64, penalty_e: f64) -> f64 {
    assert!(sigma > 0.0 && penalty_e > 0.0);
    (24.0 * penalty_e / penalty_coeff(sigma)).cbrt()
}

/// Ascending Σ nodes spaced by the width recurrence, one coding table per
/// node. Table ids are the node indices.
#[derive(Debug, Clone)]
pub struct SigmaLadder {
    pub penalty_e: f64,
    pub sigma_max: f64,
    nodes: Vec<f64>,
}

/// Run the recurrence Σ_{i+1} = Σ_i + w(Σ_i) from Σ_start until Σ_max is
/// covered.
pub fn build_ladder(sigma_start: f64, sigma_max: f64, penalty_e: f64) -> SigmaLadder {
    assert!(sigma_max > sigma_start && sigma_start > 0.0 && penalty_e > 0.0);
    let mut nodes = vec![sigma_start];
    while *nodes.last().unwrap() < sigma_max {
        let last = *nodes.last().unwrap();
        nodes.push(last + cell_width(last, penalty_e));
    }
    SigmaLadder { penalty_e, sigma_max, nodes }
}

impl SigmaLadder {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn node(&self, idx: usize) -> f64 {
        self.nodes[idx]
    }

    /// Index of the node nearest to Σ; clamps beyond the ends.
    pub fn lookup(&self, sigma: f64) -> usize {
        assert!(sigma > 0.0);
        match self.nodes.binary_search_by(|n| n.partial_cmp(&sigma).unwrap()) {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) if i == self.nodes.len() => self.nodes.len() - 1,
            Err(i) => {
                if sigma - self.nodes[i - 1] <= self.nodes[i] - sigma {
                    i - 1
                } else {
                    i
                }
            }
        }
    }

    /// Symbol table for one node, tails folded per [`table_half_width`].
    pub fn table_spec(&self, idx: usize) -> GeometricTable {
        let sigma = self.nodes[idx];
        geometric_probs(sigma, table_half_width(sigma))
    }

    /// Power-of-two Golomb exponent used for this node's escape excess.
    pub fn escape_golomb_m(&self, idx: usize) -> u32 {
        let m_opt = golomb_optimal_m(self.nodes[idx]);
        m_opt.max(1.0).log2().round().max(0.0) as u32
    }
}

/// Optimal real-valued Golomb parameter for the geometric tail of width Σ.
pub fn golomb_optimal_m(sigma: f64) -> f64 {
    assert!(sigma > 0.0);
    GOLOMB_M_COEFF * sigma
}

/// Entropy of the one-sided geometric Pr(x) = a^x (1−a), a = e^{−1/Σ}.
fn geometric_entropy(sigma: f64) -> f64 {
    let a = (-1.0 / sigma).exp();
    let one_minus_a = -(-1.0 / sigma).exp_m1();
    -one_minus_a.log2() - a * a.log2() / one_minus_a
}

/// Golomb-code penalty in bits over the geometric entropy:
/// h(M) = 1/(1−a^M) + lg M, minus h₀.
pub fn golomb_penalty(sigma: f64, m: f64) -> f64 {
    assert!(sigma > 0.0 && m >= 1.0);
    let one_minus_am = -(-m / sigma).exp_m1();
    let h = 1.0 / one_minus_am + m.log2();
    h - geometric_entropy(sigma)
}

/// LSB-flush penalty in bits for flushing m raw bits (M = 2^m):
/// h = lg M − a^M M lg(a)/(1−a^M) − lg(1−a^M), minus h₀.
pub fn lsb_flush_penalty(sigma: f64, m: u32) -> f64 {
    assert!(sigma > 0.0);
    let big_m = (1u64 << m) as f64;
    let am = (-big_m / sigma).exp();
    let one_minus_am = -(-big_m / sigma).exp_m1();
    let lg_a = -LOG2_E / sigma;
    let h = big_m.log2() - am * big_m * lg_a / one_minus_am - one_minus_am.log2();
    h - geometric_entropy(sigma)
}

/// Golomb-encode x ≥ 0 with power-of-two parameter M = 2^m: unary
/// quotient (ones, zero-terminated), then m remainder bits.
pub fn golomb_encode(x: u64, m: u32, out: &mut BitWriter) {
    let q = x >> m;
    for _ in 0..q {
        out.put_bit(true);
    }
    out.put_bit(false);
    out.put_bits(x & ((1u64 << m) - 1), m);
}

/// Inverse of [`golomb_encode`].
pub fn golomb_decode(m: u32, input: &mut BitReader) -> Result<u64, CoderError> {
    let mut q = 0u64;
    while input.get_bit()? {
        q += 1;
    }
    let r = input.get_bits(m)?;
    Ok((q << m) | r)
}
