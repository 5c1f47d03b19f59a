//! Polar codes over the binary erasure channel.
//!
//! Construction uses the exact erasure-channel Bhattacharyya recursion,
//! encoding computes `x = u · G_n` (with `G_n = B_n F_n`), and decoding is
//! successive cancellation over the erasure alphabet `{0, 1, ?}`. A free
//! index whose estimate is erased is a block error; no guessing is done.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::gf2::{g_matrix, reverse_bits, IndexSet};

/// One channel output symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sym {
    Zero,
    One,
    Erased,
}

impl Sym {
    pub fn from_bit(b: u8) -> Self {
        if b & 1 == 1 {
            Sym::One
        } else {
            Sym::Zero
        }
    }

    pub fn bit(self) -> Option<u8> {
        match self {
            Sym::Zero => Some(0),
            Sym::One => Some(1),
            Sym::Erased => None,
        }
    }

    #[inline]
    fn xor_bit(self, b: u8) -> Sym {
        match self {
            Sym::Erased => Sym::Erased,
            s if b & 1 == 0 => s,
            Sym::Zero => Sym::One,
            Sym::One => Sym::Zero,
        }
    }
}

/// Check-node combine: erased if either operand is erased, else `a ⊕ b`.
#[inline]
pub fn check_combine(a: Sym, b: Sym) -> Sym {
    match (a.bit(), b.bit()) {
        (Some(x), Some(y)) => Sym::from_bit(x ^ y),
        _ => Sym::Erased,
    }
}

/// Variable-node combine given the already-decided partial sum `u`:
/// `b` if known, else `a ⊕ u` if `a` known, else erased.
#[inline]
pub fn variable_combine(a: Sym, b: Sym, u: u8) -> Sym {
    if b != Sym::Erased {
        b
    } else {
        a.xor_bit(u)
    }
}

/// Erasure-channel output word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ErasureWord(pub Vec<Sym>);

impl ErasureWord {
    pub fn from_bits(bits: &[u8]) -> Self {
        ErasureWord(bits.iter().map(|&b| Sym::from_bit(b)).collect())
    }

    /// Copies `codeword` and erases the positions (0-based) where `erase` is true.
    pub fn erase(codeword: &[u8], erase: impl Fn(usize) -> bool) -> Self {
        ErasureWord(
            codeword
                .iter()
                .enumerate()
                .map(|(i, &b)| if erase(i) { Sym::Erased } else { Sym::from_bit(b) })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn erasures(&self) -> usize {
        self.0.iter().filter(|&&s| s == Sym::Erased).count()
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eps) {
        return invalid(format!("erasure probability {eps} outside [0, 1]"));
    }
    Ok(())
}

fn check_level(n: u32) -> Result<usize> {
    if n > 20 {
        return invalid(format!("level {n} too large"));
    }
    Ok(1 << n)
}

/// Erasure-channel Bhattacharyya parameters of the `2^n` synthesized
/// bit-channels: start from `[eps]` and replace each `v` by the adjacent
/// pair `(2v − v², v²)`.
pub fn bhattacharyya_vector(n: u32, eps: f64) -> Result<Vec<f64>> {
    check_eps(eps)?;
    check_level(n)?;
    let mut z = vec![eps];
    for _ in 0..n {
        z = z.iter().flat_map(|&v| [2.0 * v - v * v, v * v]).collect();
    }
    Ok(z)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolarCode {
    n: u32,
    frozen: IndexSet,
    frozen_values: Vec<u8>,
    z_scores: Vec<f64>,
    /// `is_frozen[i]` for 0-based index `i`.
    is_frozen: Vec<bool>,
    /// Position in `frozen_values` for each frozen 0-based index.
    frozen_slot: Vec<usize>,
}

/// Freezes the `N − k` indices with the largest erasure-channel score;
/// ties freeze the smaller index.
pub fn construct(n: u32, eps: f64, k: usize, frozen_values: &[u8]) -> Result<PolarCode> {
    let z = bhattacharyya_vector(n, eps)?;
    let size = z.len();
    if k > size {
        return invalid(format!("K = {k} exceeds block length {size}"));
    }
    if frozen_values.len() != size - k {
        return invalid(format!(
            "{} frozen values supplied for {} frozen indices",
            frozen_values.len(),
            size - k
        ));
    }
    let mut order: Vec<usize> = (0..size).collect();
    order.sort_by(|&a, &b| z[b].total_cmp(&z[a]).then(a.cmp(&b)));
    let frozen = IndexSet::new(size, order[..size - k].iter().map(|i| i + 1))?;
    PolarCode::build(n, frozen, frozen_values.to_vec(), z)
}

/// Rate-`k/N` code with all-zero frozen values.
pub fn construct_zero_frozen(n: u32, eps: f64, k: usize) -> Result<PolarCode> {
    let size = check_level(n)?;
    if k > size {
        return invalid(format!("K = {k} exceeds block length {size}"));
    }
    construct(n, eps, k, &vec![0; size - k])
}

impl PolarCode {
    /// Code with an explicit frozen set; scores are the erasure-channel
    /// values at `eps`.
    pub fn with_frozen(n: u32, eps: f64, frozen: IndexSet, frozen_values: Vec<u8>) -> Result<Self> {
        let z = bhattacharyya_vector(n, eps)?;
        if frozen.universe() != z.len() {
            return invalid("frozen set universe does not match block length");
        }
        if frozen_values.len() != frozen.len() {
            return invalid("one frozen value per frozen index is required");
        }
        Self::build(n, frozen, frozen_values, z)
    }

    fn build(n: u32, frozen: IndexSet, frozen_values: Vec<u8>, z_scores: Vec<f64>) -> Result<Self> {
        if frozen_values.iter().any(|&b| b > 1) {
            return invalid("frozen values must be bits");
        }
        let size = z_scores.len();
        let mut is_frozen = vec![false; size];
        let mut frozen_slot = vec![usize::MAX; size];
        for (slot, i) in frozen.iter().enumerate() {
            is_frozen[i - 1] = true;
            frozen_slot[i - 1] = slot;
        }
        Ok(PolarCode {
            n,
            frozen,
            frozen_values,
            z_scores,
            is_frozen,
            frozen_slot,
        })
    }

    pub fn level(&self) -> u32 {
        self.n
    }

    pub fn block_length(&self) -> usize {
        self.z_scores.len()
    }

    /// Number of information bits `K`.
    pub fn info_len(&self) -> usize {
        self.block_length() - self.frozen.len()
    }

    pub fn rate(&self) -> f64 {
        self.info_len() as f64 / self.block_length() as f64
    }

    pub fn frozen(&self) -> &IndexSet {
        &self.frozen
    }

    pub fn free(&self) -> IndexSet {
        self.frozen.complement()
    }

    pub fn frozen_values(&self) -> &[u8] {
        &self.frozen_values
    }

    pub fn z_scores(&self) -> &[f64] {
        &self.z_scores
    }

    pub fn is_frozen(&self, index0: usize) -> bool {
        self.is_frozen[index0]
    }

    /// Sum of scores over free indices: the union bound on block error.
    pub fn union_bound(&self) -> f64 {
        self.z_scores
            .iter()
            .zip(&self.is_frozen)
            .filter(|(_, &f)| !f)
            .map(|(z, _)| z)
            .sum()
    }

    /// Full input vector `u`: info bits at free indices, frozen values elsewhere.
    pub fn assemble(&self, info: &[u8]) -> Result<Vec<u8>> {
        if info.len() != self.info_len() {
            return invalid(format!("expected {} info bits, got {}", self.info_len(), info.len()));
        }
        let mut info_it = info.iter();
        Ok((0..self.block_length())
            .map(|i| {
                if self.is_frozen[i] {
                    self.frozen_values[self.frozen_slot[i]]
                } else {
                    *info_it.next().expect("length checked") & 1
                }
            })
            .collect())
    }

    /// Extracts the info bits from a full input vector.
    pub fn info_of(&self, u: &[u8]) -> Vec<u8> {
        u.iter()
            .zip(&self.is_frozen)
            .filter(|(_, &f)| !f)
            .map(|(&b, _)| b)
            .collect()
    }
}

/// In-place `w ← w · F_n` over GF(2).
pub fn butterfly_in_place(w: &mut [u8]) {
    let size = w.len();
    debug_assert!(size.is_power_of_two());
    let mut half = size / 2;
    while half >= 1 {
        for block in (0..size).step_by(2 * half) {
            for i in block..block + half {
                w[i] ^= w[i + half];
            }
        }
        half /= 2;
    }
}

/// `u · G_n` via the butterfly: `(u · F_n)` read out in bit-reversed order.
pub fn encode(code: &PolarCode, info: &[u8]) -> Result<Vec<u8>> {
    let mut w = code.assemble(info)?;
    butterfly_in_place(&mut w);
    let n = code.level();
    Ok((0..w.len()).map(|j| w[reverse_bits(j, n)]).collect())
}

/// `u · G_n` by dense matrix multiplication.
pub fn encode_reference(code: &PolarCode, info: &[u8]) -> Result<Vec<u8>> {
    let u = code.assemble(info)?;
    if code.level() == 0 {
        return Ok(u);
    }
    g_matrix(code.level())?.left_mul_vec(&u)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScOutcome {
    Decoded(Vec<u8>),
    /// First free index (1-based) whose estimate was erased.
    Failure { index: usize },
}

impl ScOutcome {
    pub fn info(&self) -> Option<&[u8]> {
        match self {
            ScOutcome::Decoded(bits) => Some(bits),
            ScOutcome::Failure { .. } => None,
        }
    }
}

/// Per-level working buffers for the recursive decoder.
struct Scratch {
    syms: Vec<Vec<Sym>>,
    sums: Vec<Vec<u8>>,
    u_hat: Vec<u8>,
}

impl Scratch {
    fn new(n: u32) -> Self {
        Scratch {
            syms: (0..=n).map(|l| vec![Sym::Erased; 1 << l]).collect(),
            sums: (0..=n).map(|l| vec![0; 1 << l]).collect(),
            u_hat: Vec::with_capacity(1 << n),
        }
    }

    /// Decodes the subtree whose input sits in `syms[level]`; partial sums
    /// land in `sums[level]`. Errors with the 1-based failing index.
    fn node(&mut self, code: &PolarCode, level: usize, offset: usize) -> std::result::Result<(), usize> {
        if level == 0 {
            let bit = if code.is_frozen[offset] {
                code.frozen_values[code.frozen_slot[offset]]
            } else {
                self.syms[0][0].bit().ok_or(offset + 1)?
            };
            self.sums[0][0] = bit;
            self.u_hat.push(bit);
            return Ok(());
        }
        let half = 1 << (level - 1);
        let (lower, upper) = self.syms.split_at_mut(level);
        let (input, child) = (&upper[0], &mut lower[level - 1]);
        for i in 0..half {
            child[i] = check_combine(input[i], input[i + half]);
        }
        self.node(code, level - 1, offset)?;
        {
            let (lower, upper) = self.sums.split_at_mut(level);
            upper[0][..half].copy_from_slice(&lower[level - 1]);
        }
        {
            let (lower, upper) = self.syms.split_at_mut(level);
            let (input, child) = (&upper[0], &mut lower[level - 1]);
            let left = &self.sums[level][..half];
            for i in 0..half {
                child[i] = variable_combine(input[i], input[i + half], left[i]);
            }
        }
        self.node(code, level - 1, offset + half)?;
        let (lower, upper) = self.sums.split_at_mut(level);
        let (out, right) = (&mut upper[0], &lower[level - 1]);
        for i in 0..half {
            out[i] ^= right[i];
        }
        out[half..2 * half].copy_from_slice(&right[..half]);
        Ok(())
    }
}

/// Successive-cancellation decoding over the erasure alphabet.
pub fn sc_decode(code: &PolarCode, received: &ErasureWord) -> Result<ScOutcome> {
    let size = code.block_length();
    if received.len() != size {
        return invalid(format!("received word has length {}, expected {size}", received.len()));
    }
    let n = code.level();
    let mut scratch = Scratch::new(n);
    // The recursion runs on the natural-order kernel, so undo the bit reversal.
    for (k, slot) in scratch.syms[n as usize].iter_mut().enumerate() {
        *slot = received.0[reverse_bits(k, n)];
    }
    Ok(match scratch.node(code, n as usize, 0) {
        Ok(()) => ScOutcome::Decoded(code.info_of(&scratch.u_hat)),
        Err(index) => ScOutcome::Failure { index },
    })
}

/// Monte-Carlo block-error estimate with a 95% Wilson interval.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeEstimate {
    pub trials: u64,
    pub failures: u64,
    pub p_hat: f64,
    pub ci95_halfwidth: f64,
    pub seed: u64,
}

const Z95: f64 = 1.959_963_984_540_054;

impl PeEstimate {
    pub fn new(trials: u64, failures: u64, seed: u64) -> Self {
        let t = trials as f64;
        let p = failures as f64 / t;
        let z2 = Z95 * Z95;
        let half = Z95 * (p * (1.0 - p) / t + z2 / (4.0 * t * t)).sqrt() / (1.0 + z2 / t);
        PeEstimate {
            trials,
            failures,
            p_hat: p,
            ci95_halfwidth: half,
            seed,
        }
    }
}

/// Draws one trial: random info bits, then one uniform per code symbol.
/// Erasures are `uniform < eps`, so raising `eps` only adds erasures.
fn run_trial(code: &PolarCode, eps: f64, seed: u64, trial: u64) -> Result<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    let info: Vec<u8> = (0..code.info_len()).map(|_| rng.gen::<bool>() as u8).collect();
    let codeword = encode(code, &info)?;
    let draws: Vec<f64> = (0..codeword.len()).map(|_| rng.gen::<f64>()).collect();
    let received = ErasureWord::erase(&codeword, |i| draws[i] < eps);
    Ok(match sc_decode(code, &received)? {
        ScOutcome::Decoded(bits) => bits != info,
        ScOutcome::Failure { .. } => true,
    })
}

/// Block-error rate of SC decoding on an erasure channel. Trial `t` uses
/// the stream `(seed, t)`, so the result does not depend on scheduling.
pub fn simulate_block_error(code: &PolarCode, eps: f64, trials: u64, seed: u64) -> Result<PeEstimate> {
    check_eps(eps)?;
    if trials == 0 {
        return invalid("at least one trial is required");
    }
    let failures = (0..trials)
        .into_par_iter()
        .map(|t| run_trial(code, eps, seed, t).map(u64::from))
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(PeEstimate::new(trials, failures, seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z_small_cases() {
        assert_eq!(bhattacharyya_vector(1, 0.5).unwrap(), [0.75, 0.25]);
        assert_eq!(bhattacharyya_vector(2, 0.5).unwrap(), [0.9375, 0.5625, 0.4375, 0.0625]);
        assert!(bhattacharyya_vector(3, 0.0).unwrap().iter().all(|&z| z == 0.0));
        assert!(bhattacharyya_vector(3, 1.0).unwrap().iter().all(|&z| z == 1.0));
        assert!(bhattacharyya_vector(2, 1.5).is_err());
        assert!(bhattacharyya_vector(2, -0.1).is_err());
    }

    #[test]
    fn construct_examples() {
        let c = construct(1, 0.5, 1, &[0]).unwrap();
        assert_eq!(c.frozen().members(), [1]);
        let c = construct(2, 0.5, 2, &[0, 0]).unwrap();
        assert_eq!(c.frozen().members(), [1, 2]);
        let c = construct(3, 0.3, 8, &[]).unwrap();
        assert!(c.frozen().is_empty());
        assert_eq!(c.rate(), 1.0);
    }

    #[test]
    fn construct_ties_freeze_smaller_index() {
        // eps = 0 gives all-zero scores, so every comparison is a tie.
        let c = construct(3, 0.0, 5, &[0, 0, 0]).unwrap();
        assert_eq!(c.frozen().members(), [1, 2, 3]);
    }

    #[test]
    fn construct_size_mismatch() {
        assert!(construct(2, 0.5, 5, &[]).is_err());
        assert!(construct(2, 0.5, 2, &[0]).is_err());
        assert!(construct(2, 0.5, 2, &[0, 2]).is_err());
    }

    #[test]
    fn encode_n2_example() {
        let c = construct(1, 0.5, 1, &[0]).unwrap();
        assert_eq!(encode(&c, &[1]).unwrap(), [1, 1]);
        assert_eq!(encode_reference(&c, &[1]).unwrap(), [1, 1]);
        assert!(encode(&c, &[1, 0]).is_err());
    }

    #[test]
    fn encode_zero_is_zero() {
        let c = construct_zero_frozen(5, 0.4, 11).unwrap();
        assert!(encode(&c, &[0; 11]).unwrap().iter().all(|&b| b == 0));
    }

    #[test]
    fn decode_n2_with_erasure() {
        let c = construct(1, 0.5, 1, &[0]).unwrap();
        let rx = ErasureWord(vec![Sym::One, Sym::Erased]);
        assert_eq!(sc_decode(&c, &rx).unwrap(), ScOutcome::Decoded(vec![1]));
    }

    #[test]
    fn all_erased_fails_at_first_free() {
        let c = construct_zero_frozen(3, 0.5, 4).unwrap();
        let first_free = c.free().members()[0];
        let rx = ErasureWord(vec![Sym::Erased; 8]);
        assert_eq!(sc_decode(&c, &rx).unwrap(), ScOutcome::Failure { index: first_free });
    }

    #[test]
    fn decode_length_mismatch() {
        let c = construct_zero_frozen(2, 0.5, 2).unwrap();
        assert!(sc_decode(&c, &ErasureWord(vec![Sym::Zero; 3])).is_err());
    }

    #[test]
    fn nonzero_frozen_values_roundtrip() {
        let c = construct(3, 0.5, 4, &[1, 0, 1, 1]).unwrap();
        let info = [1, 0, 0, 1];
        let x = encode(&c, &info).unwrap();
        assert_eq!(x, encode_reference(&c, &info).unwrap());
        assert_eq!(sc_decode(&c, &ErasureWord::from_bits(&x)).unwrap(), ScOutcome::Decoded(info.to_vec()));
    }

    #[test]
    fn extreme_channels() {
        let c = construct_zero_frozen(4, 0.5, 6).unwrap();
        assert_eq!(simulate_block_error(&c, 0.0, 200, 3).unwrap().p_hat, 0.0);
        assert_eq!(simulate_block_error(&c, 1.0, 200, 3).unwrap().p_hat, 1.0);
        assert!(simulate_block_error(&c, 0.5, 0, 3).is_err());
    }

    #[test]
    fn wilson_interval_shape() {
        let e = PeEstimate::new(100, 0, 0);
        assert!(e.ci95_halfwidth > 0.0 && e.ci95_halfwidth < 0.03);
        let e = PeEstimate::new(10_000, 5000, 0);
        assert!((e.ci95_halfwidth - 0.0098).abs() < 1e-4);
    }
}
