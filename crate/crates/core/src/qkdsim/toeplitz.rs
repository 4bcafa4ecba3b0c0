use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Diagonal-constant description of an `l x n` binary Toeplitz matrix:
/// entry `(i, j)` is `bits[j + l - 1 - i]`, so `n + l - 1` bits are used.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToeplitzSeed {
    bits: Vec<bool>,
}

impl ToeplitzSeed {
    pub fn new(bits: Vec<bool>) -> Self {
        ToeplitzSeed { bits }
    }

    /// `len` pseudo-random bits from a ChaCha8 stream keyed by `seed`.
    pub fn from_u64(seed: u64, len: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ToeplitzSeed { bits: (0..len).map(|_| rng.random::<bool>()).collect() }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    fn check(&self, input: usize, output: usize) -> Result<()> {
        if output > input {
            return Err(Error::OutputTooLong { output, input });
        }
        let needed = (input + output).saturating_sub(1);
        if self.bits.len() < needed {
            return Err(Error::SeedTooShort { needed, found: self.bits.len() });
        }
        Ok(())
    }

    fn entry(&self, output: usize, row: usize, col: usize) -> bool {
        self.bits[col + output - 1 - row]
    }
}

/// Hashes `bits` to `l` output bits by multiplying with the seed's Toeplitz matrix over GF(2).
pub fn privacy_amplify(bits: &[bool], seed: &ToeplitzSeed, l: usize) -> Result<Vec<bool>> {
    seed.check(bits.len(), l)?;
    Ok((0..l)
        .map(|i| bits.iter().enumerate().fold(false, |acc, (j, &b)| acc ^ (b & seed.entry(l, i, j))))
        .collect())
}

/// Bit-packed Toeplitz hash for inputs of up to 64 bits. Input position `j`
/// is bit `j` of the word; the output is a big-endian key index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToeplitzHash {
    input_len: usize,
    rows: Vec<u64>,
}

impl ToeplitzHash {
    pub fn new(seed: &ToeplitzSeed, input_len: usize, output_len: usize) -> Result<Self> {
        if input_len > 64 {
            return Err(Error::InvalidConfig(format!("packed hash supports at most 64 input bits, got {input_len}")));
        }
        seed.check(input_len, output_len)?;
        let rows = (0..output_len)
            .map(|i| (0..input_len).filter(|&j| seed.entry(output_len, i, j)).fold(0u64, |m, j| m | 1 << j))
            .collect();
        Ok(ToeplitzHash { input_len, rows })
    }

    pub fn input_len(&self) -> usize {
        self.input_len
    }

    pub fn output_len(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    pub fn apply(&self, input: u64) -> usize {
        self.rows.iter().fold(0usize, |k, row| (k << 1) | (row & input).count_ones() as usize & 1)
    }

    pub fn rank(&self) -> usize {
        gf2_rank(&self.rows)
    }
}

/// Rank over GF(2) of bit-packed row vectors.
pub fn gf2_rank(rows: &[u64]) -> usize {
    let mut basis: Vec<u64> = Vec::new();
    for &row in rows {
        let mut v = row;
        for &b in &basis {
            v = v.min(v ^ b);
        }
        if v != 0 {
            basis.push(v);
            basis.sort_unstable_by(|a, b| b.cmp(a));
        }
    }
    basis.len()
}
