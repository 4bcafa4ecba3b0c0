use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::toeplitz::{gf2_rank, ToeplitzHash, ToeplitzSeed};
use crate::error::{Error, Result};
use crate::metrics::JointDistribution;

pub const MAX_RAW_BITS: usize = 24;
pub const MAX_KEY_BITS: usize = 12;
/// Sample QBER above which the protocol aborts.
pub const ABORT_THRESHOLD: f64 = 0.11;
/// Largest number of (Eve pattern, Alice string) branches enumerated.
pub const ENUMERATION_LIMIT: u128 = 1 << 26;
/// Largest dense joint table materialised.
pub const TABLE_LIMIT: u128 = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EcMode {
    None,
    /// Alice publishes the parity of each of `parity_bits` contiguous blocks
    /// of her key positions; Eve records them.
    ParityReveal { parity_bits: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolConfig {
    pub raw_bits: usize,
    pub sample_fraction: f64,
    pub key_bits: usize,
    pub ec_mode: EcMode,
    pub pa_seed: ToeplitzSeed,
    pub rng_seed: u64,
}

impl ProtocolConfig {
    /// Config whose Toeplitz seed is expanded from `pa_seed` to the longest
    /// length any sifting outcome can need (`raw_bits + key_bits - 1`).
    pub fn with_seeded_hash(raw_bits: usize, key_bits: usize, pa_seed: u64, rng_seed: u64) -> Self {
        ProtocolConfig {
            raw_bits,
            sample_fraction: 0.0,
            key_bits,
            ec_mode: EcMode::None,
            pa_seed: ToeplitzSeed::from_u64(pa_seed, (raw_bits + key_bits).saturating_sub(1)),
            rng_seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.raw_bits == 0 || self.raw_bits > MAX_RAW_BITS {
            return Err(Error::InvalidConfig(format!("raw_bits {} outside 1..={MAX_RAW_BITS}", self.raw_bits)));
        }
        if self.key_bits == 0 || self.key_bits > MAX_KEY_BITS {
            return Err(Error::InvalidConfig(format!("key_bits {} outside 1..={MAX_KEY_BITS}", self.key_bits)));
        }
        if !(0.0..1.0).contains(&self.sample_fraction) {
            return Err(Error::InvalidConfig(format!("sample_fraction {} outside [0, 1)", self.sample_fraction)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttackKind {
    None,
    /// Measure in a random basis and resend the outcome.
    InterceptResend,
    /// Read the bit without disturbing it (a classical tap).
    ClassicalCopy,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackModel {
    pub kind: AttackKind,
    /// Fraction of positions attacked.
    pub fraction: f64,
}

impl AttackModel {
    pub const NONE: AttackModel = AttackModel { kind: AttackKind::None, fraction: 0.0 };

    pub fn intercept_resend(fraction: f64) -> Self {
        AttackModel { kind: AttackKind::InterceptResend, fraction }
    }

    pub fn classical_copy(fraction: f64) -> Self {
        AttackModel { kind: AttackKind::ClassicalCopy, fraction }
    }

    /// Probability that Eve learns a sifted bit exactly.
    fn known_probability(&self) -> f64 {
        match self.kind {
            AttackKind::None => 0.0,
            // she picks the announced basis half of the time
            AttackKind::InterceptResend => self.fraction / 2.0,
            AttackKind::ClassicalCopy => self.fraction,
        }
    }

    /// Probability that Bob's sifted bit differs from Alice's.
    fn error_probability(&self) -> f64 {
        match self.kind {
            AttackKind::InterceptResend => self.fraction / 4.0,
            AttackKind::None | AttackKind::ClassicalCopy => 0.0,
        }
    }
}

/// Basis choices and the resulting position sets. `false` is the Z basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SiftLayout {
    pub alice_bases: Vec<bool>,
    pub bob_bases: Vec<bool>,
    pub sifted: Vec<usize>,
    pub sample: Vec<usize>,
    pub key_positions: Vec<usize>,
}

/// Derandomises basis choices and sample selection from `rng_seed`.
pub fn sift(config: &ProtocolConfig) -> Result<SiftLayout> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let alice_bases: Vec<bool> = (0..config.raw_bits).map(|_| rng.random()).collect();
    let bob_bases: Vec<bool> = (0..config.raw_bits).map(|_| rng.random()).collect();
    let sifted: Vec<usize> = (0..config.raw_bits).filter(|&i| alice_bases[i] == bob_bases[i]).collect();
    let sample_size = (config.sample_fraction * sifted.len() as f64).floor() as usize;
    let mut shuffled = sifted.clone();
    shuffled.shuffle(&mut rng);
    let mut sample = shuffled[..sample_size].to_vec();
    let mut key_positions = shuffled[sample_size..].to_vec();
    sample.sort_unstable();
    key_positions.sort_unstable();
    Ok(SiftLayout { alice_bases, bob_bases, sifted, sample, key_positions })
}

/// Exact outcome of one protocol configuration under one attack.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolRun {
    /// `P(K_G = k, Y_E = y)`; outcome columns with zero mass are dropped.
    pub joint: JointDistribution,
    /// Key-position indices whose parities were published.
    pub leaked_parities: Vec<Vec<usize>>,
    pub layout: SiftLayout,
    /// Expected error fraction on the sampled positions.
    pub qber_estimate: f64,
    /// Per-position error probability on sifted bits.
    pub sifted_error_rate: f64,
    /// `qber_estimate > ABORT_THRESHOLD`.
    pub abort: bool,
    /// Probability that the observed sample QBER exceeds the threshold.
    pub abort_probability: f64,
    pub toeplitz_rank: usize,
    /// `sum_y max_x P(X = x, Y_E = y)` for the key-position string `X` before hashing.
    pub sifted_guessing_probability: f64,
}

impl ProtocolRun {
    pub fn key_bits(&self) -> usize {
        self.joint.keys().trailing_zeros() as usize
    }

    /// `H_min(X | Y_E)` of the pre-hash string.
    pub fn sifted_min_entropy(&self) -> f64 {
        -self.sifted_guessing_probability.log2()
    }
}

pub fn run_bb84(config: &ProtocolConfig, attack: &AttackModel) -> Result<ProtocolRun> {
    run(config, attack, true)
}

/// Single-threaded enumeration; bitwise identical to [`run_bb84`].
pub fn run_bb84_serial(config: &ProtocolConfig, attack: &AttackModel) -> Result<ProtocolRun> {
    run(config, attack, false)
}

/// Gathers the bits of `value` selected by `mask` into the low bits.
fn extract_bits(value: u64, mask: u64) -> u64 {
    let mut out = 0u64;
    let mut bit = 0;
    let mut m = mask;
    while m != 0 {
        let low = m & m.wrapping_neg();
        if value & low != 0 {
            out |= 1 << bit;
        }
        bit += 1;
        m ^= low;
    }
    out
}

fn binomial_upper_tail(trials: usize, p: f64, threshold: f64) -> f64 {
    if trials == 0 {
        return 0.0;
    }
    let mut total = 0.0;
    let mut coeff = 1.0f64;
    for j in 0..=trials {
        if j as f64 / trials as f64 > threshold {
            total += coeff * p.powi(j as i32) * (1.0 - p).powi((trials - j) as i32);
        }
        coeff = coeff * (trials - j) as f64 / (j + 1) as f64;
    }
    total.min(1.0)
}

struct PatternBlock {
    probs: Vec<f64>,
    columns: usize,
}

fn run(config: &ProtocolConfig, attack: &AttackModel, parallel: bool) -> Result<ProtocolRun> {
    if !(0.0..=1.0).contains(&attack.fraction) {
        return Err(Error::InvalidConfig(format!("attack fraction {} outside [0, 1]", attack.fraction)));
    }
    let layout = sift(config)?;
    let m = layout.key_positions.len();
    let l = config.key_bits;
    if l > m {
        return Err(Error::KeyLongerThanSifted { key_bits: l, available: m });
    }
    let parity_bits = match config.ec_mode {
        EcMode::None => 0,
        EcMode::ParityReveal { parity_bits } => parity_bits,
    };
    if parity_bits > m {
        return Err(Error::InvalidConfig(format!("{parity_bits} parity blocks over {m} key positions")));
    }

    let q = attack.known_probability();
    let patterns: Vec<u64> = if q == 0.0 {
        vec![0]
    } else if q == 1.0 {
        vec![(1u64 << m) - 1]
    } else {
        (0..1u64 << m).collect()
    };
    let strings = 1u128 << m;
    let enumeration = patterns.len() as u128 * strings;
    if enumeration > ENUMERATION_LIMIT {
        return Err(Error::EnumerationTooLarge { size: enumeration, limit: ENUMERATION_LIMIT });
    }
    let keys = 1usize << l;
    let table: u128 = patterns.iter().map(|s| 1u128 << (s.count_ones() as usize + parity_bits)).sum::<u128>()
        * keys as u128;
    if table > TABLE_LIMIT {
        return Err(Error::EnumerationTooLarge { size: table, limit: TABLE_LIMIT });
    }

    let hash = ToeplitzHash::new(&config.pa_seed, m, l)?;
    let blocks: Vec<Vec<usize>> = (0..parity_bits).map(|b| (b * m / parity_bits..(b + 1) * m / parity_bits).collect()).collect();
    let parity_masks: Vec<u64> = blocks.iter().map(|blk| blk.iter().fold(0u64, |acc, &j| acc | 1 << j)).collect();
    let string_weight = 0.5f64.powi(m as i32);

    let enumerate_pattern = |&known: &u64| -> PatternBlock {
        let weight = q.powi(known.count_ones() as i32) * (1.0 - q).powi((m as u32 - known.count_ones()) as i32);
        let columns = 1usize << (known.count_ones() as usize + parity_bits);
        let mut counts = vec![0u32; columns * keys];
        for a in 0..1u64 << m {
            let parities = parity_masks.iter().fold(0u64, |acc, &mask| (acc << 1) | ((a & mask).count_ones() & 1) as u64);
            let column = ((extract_bits(a, known) << parity_bits) | parities) as usize;
            counts[column * keys + hash.apply(a)] += 1;
        }
        let w = weight * string_weight;
        let mut probs = Vec::new();
        let mut live = 0;
        for column in counts.chunks_exact(keys) {
            if column.iter().any(|&c| c > 0) {
                probs.extend(column.iter().map(|&c| c as f64 * w));
                live += 1;
            }
        }
        PatternBlock { probs, columns: live }
    };

    let pieces: Vec<PatternBlock> = if parallel {
        patterns.par_iter().map(enumerate_pattern).collect()
    } else {
        patterns.iter().map(enumerate_pattern).collect()
    };

    // Each (pattern, column) cell holds one equiprobable string class, so its
    // max over the pre-hash string is the per-string weight.
    let mut sifted_guess = 0.0;
    for (s, piece) in patterns.iter().zip(&pieces) {
        let weight = q.powi(s.count_ones() as i32) * (1.0 - q).powi((m as u32 - s.count_ones()) as i32);
        sifted_guess += weight * string_weight * piece.columns as f64;
    }
    let outcomes: usize = pieces.iter().map(|p| p.columns).sum();
    let mut probs = Vec::with_capacity(outcomes * keys);
    for piece in pieces {
        probs.extend(piece.probs);
    }
    let joint = JointDistribution::new(keys, outcomes, probs)?;

    let error_rate = attack.error_probability();
    let sample_size = layout.sample.len();
    let qber_estimate = if sample_size > 0 { error_rate } else { 0.0 };
    Ok(ProtocolRun {
        joint,
        leaked_parities: blocks,
        qber_estimate,
        sifted_error_rate: error_rate,
        abort: qber_estimate > ABORT_THRESHOLD,
        abort_probability: binomial_upper_tail(sample_size, error_rate, ABORT_THRESHOLD),
        toeplitz_rank: gf2_rank(hash.rows()),
        sifted_guessing_probability: sifted_guess,
        layout,
    })
}
