use crate::error::{Error, Result};
use crate::metrics::ClassicalDistribution;

/// Largest message length checked exhaustively by [`verify_perfect_secrecy`].
pub const MAX_PAD_BITS: u32 = 12;

/// Bitwise XOR of message and key.
pub fn one_time_pad(message: &[bool], key: &[bool]) -> Result<Vec<bool>> {
    if message.len() != key.len() {
        return Err(Error::LengthMismatch { left: message.len(), right: key.len() });
    }
    Ok(message.iter().zip(key).map(|(x, k)| x ^ k).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecrecyCheck {
    pub is_perfect: bool,
    /// `max_{x, y : P(y) > 0} |P(x | y) - P(x)|`.
    pub max_deviation: f64,
}

/// Exhaustively tabulates `P(X | Y)` for `Y = X xor K` with independent key
/// and plaintext, both indexed as `m`-bit integers.
pub fn verify_perfect_secrecy(key: &ClassicalDistribution, plaintext: &ClassicalDistribution) -> Result<SecrecyCheck> {
    let n = key.len();
    if plaintext.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: plaintext.len() });
    }
    if !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    if n.trailing_zeros() > MAX_PAD_BITS {
        return Err(Error::SupportTooLarge { size: n, limit: 1 << MAX_PAD_BITS });
    }
    let (pk, px) = (key.probs(), plaintext.probs());
    let mut worst = 0.0f64;
    for y in 0..n {
        let py: f64 = (0..n).map(|x| px[x] * pk[x ^ y]).sum();
        if py <= 0.0 {
            continue;
        }
        for x in 0..n {
            worst = worst.max((px[x] * pk[x ^ y] / py - px[x]).abs());
        }
    }
    Ok(SecrecyCheck { is_perfect: worst <= 1e-12, max_deviation: worst })
}
