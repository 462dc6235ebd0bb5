//! Polar encoding over `F = [[1,0],[1,1]]` and successive cancellation decoding.
//!
//! Coordinates follow `x = u·F^{⊗n}` with no bit-reversal permutation. Index
//! `i` of `u` is the `i`-th synthesized bit channel in decoding order, and the
//! construction module produces information sets in the same order.

use crate::error::{invalid, Result};

/// Largest LLR magnitude fed to the check-node `tanh`.
pub const LLR_CLAMP: f64 = 40.0;

/// An `(N, K, info set)` polar code.
///
/// `info_set` holds 0-based indices into `u`, sorted ascending. The design
/// parameters are carried along for serialization only.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarCode {
    log_n: u32,
    info_set: Vec<usize>,
    frozen: Vec<bool>,
    design_snr: f64,
    mixture_eps: f64,
}

impl PolarCode {
    /// Builds a code from an explicit information set (0-based indices, any order).
    pub fn new(log_n: u32, info_set: &[usize], design_snr: f64, mixture_eps: f64) -> Result<Self> {
        if log_n > 24 {
            return Err(invalid(format!("log2 blocklength {log_n} too large")));
        }
        let n = 1usize << log_n;
        let mut frozen = vec![true; n];
        for &i in info_set {
            if i >= n {
                return Err(invalid(format!("info index {i} out of range for N={n}")));
            }
            if !frozen[i] {
                return Err(invalid(format!("duplicate info index {i}")));
            }
            frozen[i] = false;
        }
        let mut sorted = info_set.to_vec();
        sorted.sort_unstable();
        Ok(Self {
            log_n,
            info_set: sorted,
            frozen,
            design_snr,
            mixture_eps,
        })
    }

    pub fn log_n(&self) -> u32 {
        self.log_n
    }

    /// Blocklength `N = 2^n`.
    pub fn n(&self) -> usize {
        self.frozen.len()
    }

    /// Number of information bits `K`.
    pub fn k(&self) -> usize {
        self.info_set.len()
    }

    pub fn rate(&self) -> f64 {
        self.k() as f64 / self.n() as f64
    }

    /// Information positions, 0-based and ascending.
    pub fn info_set(&self) -> &[usize] {
        &self.info_set
    }

    /// `true` at frozen positions.
    pub fn frozen_mask(&self) -> &[bool] {
        &self.frozen
    }

    pub fn design_snr(&self) -> f64 {
        self.design_snr
    }

    pub fn mixture_eps(&self) -> f64 {
        self.mixture_eps
    }
}

/// One soft decoder input: an LLR `ln P(0)/P(1)` or an erasure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Soft {
    Llr(f64),
    Erased,
}

impl Soft {
    /// Erasures carry no information and decode as LLR 0.
    pub fn llr(self) -> f64 {
        match self {
            Soft::Llr(v) => v,
            Soft::Erased => 0.0,
        }
    }
}

fn check_bits(bits: &[u8], what: &str) -> Result<()> {
    match bits.iter().position(|&b| b > 1) {
        Some(i) => Err(invalid(format!("{what} has non-binary value at index {i}"))),
        None => Ok(()),
    }
}

/// In-place `u ← u·F^{⊗n}` over GF(2). Length must be a power of two.
pub fn transform_in_place(bits: &mut [u8]) -> Result<()> {
    let n = bits.len();
    if !n.is_power_of_two() {
        return Err(invalid(format!("length {n} is not a power of two")));
    }
    check_bits(bits, "input")?;
    butterfly(bits);
    Ok(())
}

/// Returns `u·F^{⊗n}` over GF(2).
pub fn transform(u: &[u8]) -> Result<Vec<u8>> {
    let mut x = u.to_vec();
    transform_in_place(&mut x)?;
    Ok(x)
}

fn butterfly(x: &mut [u8]) {
    let n = x.len();
    let mut half = 1;
    while half < n {
        for block in x.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter()) {
                *a ^= *b;
            }
        }
        half *= 2;
    }
}

/// Places `message` on the information set (j-th bit on the j-th smallest
/// index), zeros elsewhere, and transforms.
pub fn encode(message: &[u8], code: &PolarCode) -> Result<Vec<u8>> {
    if message.len() != code.k() {
        return Err(invalid(format!(
            "message length {} does not match K={}",
            message.len(),
            code.k()
        )));
    }
    check_bits(message, "message")?;
    let mut u = vec![0u8; code.n()];
    for (&pos, &bit) in code.info_set.iter().zip(message) {
        u[pos] = bit;
    }
    butterfly(&mut u);
    Ok(u)
}

/// Check-node update `2·atanh(tanh(a/2)·tanh(b/2))`.
#[inline]
pub fn check_node(a: f64, b: f64) -> f64 {
    let ta = (0.5 * a.clamp(-LLR_CLAMP, LLR_CLAMP)).tanh();
    let tb = (0.5 * b.clamp(-LLR_CLAMP, LLR_CLAMP)).tanh();
    (2.0 * (ta * tb).atanh()).clamp(-LLR_CLAMP, LLR_CLAMP)
}

/// Variable-node update given the partial-sum bit of the upper branch.
#[inline]
pub fn variable_node(a: f64, b: f64, upper_bit: u8) -> f64 {
    if upper_bit == 0 {
        b + a
    } else {
        b - a
    }
}

/// Hard decision: LLR 0 decodes to bit 0.
#[inline]
fn hard_decision(llr: f64) -> u8 {
    u8::from(llr < 0.0)
}

/// Successive cancellation decoding. Returns the `K` information bits.
pub fn sc_decode(observation: &[Soft], code: &PolarCode) -> Result<Vec<u8>> {
    let llr = soft_to_llr(observation, code.n())?;
    let u = sc_decode_llr(&llr, code.frozen_mask(), |_, llr, frozen| {
        if frozen {
            0
        } else {
            hard_decision(llr)
        }
    });
    Ok(code.info_set.iter().map(|&i| u[i]).collect())
}

pub(crate) fn soft_to_llr(observation: &[Soft], n: usize) -> Result<Vec<f64>> {
    if observation.len() != n {
        return Err(invalid(format!(
            "observation length {} does not match N={n}",
            observation.len()
        )));
    }
    observation
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let v = s.llr();
            if v.is_nan() {
                Err(invalid(format!("NaN LLR at index {i}")))
            } else {
                Ok(v)
            }
        })
        .collect()
}

/// SC over raw LLRs with a caller-supplied decision rule
/// `decide(index, decision_llr, is_frozen) -> bit`. Returns the full `û`.
///
/// `llr.len()` must equal `frozen.len()` and be a power of two.
pub fn sc_decode_llr<D>(llr: &[f64], frozen: &[bool], mut decide: D) -> Vec<u8>
where
    D: FnMut(usize, f64, bool) -> u8,
{
    let n = llr.len();
    assert_eq!(n, frozen.len());
    assert!(n.is_power_of_two());
    let mut u = vec![0u8; n];
    let mut x = vec![0u8; n];
    let mut scratch = vec![0.0f64; n];
    sc_node(llr, frozen, 0, &mut u, &mut x, &mut scratch, &mut decide);
    u
}

fn sc_node<D>(
    llr: &[f64],
    frozen: &[bool],
    offset: usize,
    u: &mut [u8],
    x: &mut [u8],
    scratch: &mut [f64],
    decide: &mut D,
) where
    D: FnMut(usize, f64, bool) -> u8,
{
    let n = llr.len();
    if n == 1 {
        let bit = decide(offset, llr[0], frozen[0]);
        u[0] = bit;
        x[0] = bit;
        return;
    }
    let h = n / 2;
    let (child, rest) = scratch.split_at_mut(h);
    let (upper, lower) = llr.split_at(h);
    for ((c, &a), &b) in child.iter_mut().zip(upper).zip(lower) {
        *c = check_node(a, b);
    }
    let (u_a, u_b) = u.split_at_mut(h);
    let (x_a, x_b) = x.split_at_mut(h);
    sc_node(child, &frozen[..h], offset, u_a, x_a, rest, decide);
    for (((c, &a), &b), &bit) in child.iter_mut().zip(upper).zip(lower).zip(x_a.iter()) {
        *c = variable_node(a, b, bit);
    }
    sc_node(child, &frozen[h..], offset + h, u_b, x_b, rest, decide);
    for (a, &b) in x_a.iter_mut().zip(x_b.iter()) {
        *a ^= b;
    }
}
