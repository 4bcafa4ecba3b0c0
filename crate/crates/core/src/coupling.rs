//! Couplings of classical distributions and non-uniformity witnesses.
//!
//! [`maximal_coupling`] realises the equality `Pr[x != x'] = delta(P, Q)`;
//! [`interpretation_counterexample`] builds key distributions in which every
//! key is biased although `delta` to uniform is only `eps`.

use crate::error::{Error, Result};
use crate::metrics::{variational_distance, ClassicalDistribution, CLASSICAL_TOLERANCE};

/// Largest key length evaluated exhaustively.
pub const MAX_EXHAUSTIVE_BITS: u32 = 20;

/// Target accuracy of the bias bisection on `delta`.
pub const BISECTION_TOLERANCE: f64 = 1e-9;

/// Joint distribution on `n x n` outcomes, row-major: `joint[x * n + x']`.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    n: usize,
    joint: Vec<f64>,
}

impl Coupling {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, x: usize, x_prime: usize) -> f64 {
        self.joint[x * self.n + x_prime]
    }

    pub fn row_marginal(&self) -> Vec<f64> {
        self.joint.chunks_exact(self.n).map(|r| r.iter().sum()).collect()
    }

    pub fn column_marginal(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.n];
        for row in self.joint.chunks_exact(self.n) {
            for (acc, v) in m.iter_mut().zip(row) {
                *acc += v;
            }
        }
        m
    }

    /// Independent coupling `P (x) Q`.
    pub fn product(p: &ClassicalDistribution, q: &ClassicalDistribution) -> Result<Self> {
        check_sizes(p, q)?;
        let n = p.len();
        let joint = p.probs().iter().flat_map(|a| q.probs().iter().map(move |b| a * b)).collect();
        Ok(Coupling { n, joint })
    }

    /// North-west-corner transport plan after permuting rows and columns by
    /// the given orders. Every such plan has marginals `P` and `Q`.
    pub fn transport_plan(
        p: &ClassicalDistribution,
        q: &ClassicalDistribution,
        row_order: &[usize],
        col_order: &[usize],
    ) -> Result<Self> {
        check_sizes(p, q)?;
        let n = p.len();
        if row_order.len() != n || col_order.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: row_order.len().min(col_order.len()) });
        }
        let mut supply: Vec<f64> = row_order.iter().map(|&i| p.probs()[i]).collect();
        let mut demand: Vec<f64> = col_order.iter().map(|&j| q.probs()[j]).collect();
        let mut joint = vec![0.0; n * n];
        let (mut r, mut c) = (0, 0);
        while r < n && c < n {
            let moved = supply[r].min(demand[c]);
            joint[row_order[r] * n + col_order[c]] += moved;
            supply[r] -= moved;
            demand[c] -= moved;
            // advance the exhausted side; the last row or column absorbs the rest
            if r == n - 1 || (c < n - 1 && supply[r] > demand[c]) {
                c += 1;
            } else {
                r += 1;
            }
        }
        Ok(Coupling { n, joint })
    }

    /// Pointwise mixture `w * self + (1 - w) * other`; marginals are preserved
    /// when both couplings share them.
    pub fn mix(&self, other: &Coupling, w: f64) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: other.n });
        }
        let joint = self.joint.iter().zip(&other.joint).map(|(a, b)| w * a + (1.0 - w) * b).collect();
        Ok(Coupling { n: self.n, joint })
    }
}

fn check_sizes(p: &ClassicalDistribution, q: &ClassicalDistribution) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch { expected: p.len(), found: q.len() });
    }
    Ok(())
}

/// Diagonal `min(P, Q)` plus the product of normalised residuals off the diagonal.
pub fn maximal_coupling(p: &ClassicalDistribution, q: &ClassicalDistribution) -> Result<Coupling> {
    check_sizes(p, q)?;
    let n = p.len();
    let mut joint = vec![0.0; n * n];
    let mut rest_p = vec![0.0; n];
    let mut rest_q = vec![0.0; n];
    for x in 0..n {
        let (a, b) = (p.probs()[x], q.probs()[x]);
        let m = a.min(b);
        joint[x * n + x] = m;
        rest_p[x] = a - m;
        rest_q[x] = b - m;
    }
    let mass_q: f64 = rest_q.iter().sum();
    if mass_q > 0.0 {
        // rest_p and rest_q have disjoint supports, so the diagonal is untouched
        for x in 0..n {
            if rest_p[x] == 0.0 {
                continue;
            }
            for y in 0..n {
                if rest_q[y] > 0.0 {
                    joint[x * n + y] += rest_p[x] * rest_q[y] / mass_q;
                }
            }
        }
    }
    Ok(Coupling { n, joint })
}

/// `Pr[x != x'] = 1 - sum_x joint[x][x]`.
pub fn mismatch_probability(c: &Coupling) -> f64 {
    let diag: f64 = (0..c.n).map(|x| c.get(x, x)).sum();
    (1.0 - diag).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonuniformityWitness {
    pub key_index: usize,
    pub probability: f64,
    /// `probability / 2^-l`.
    pub excess_ratio: f64,
    pub delta_to_uniform: f64,
}

pub fn nonuniformity_witness(p: &ClassicalDistribution) -> Result<NonuniformityWitness> {
    let n = p.len();
    if !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    let (key_index, probability) = p.argmax();
    let delta = variational_distance(p, &ClassicalDistribution::uniform(n))?;
    let excess_ratio = probability * n as f64;
    // delta > 0 forces some key above 2^-l; below the tolerance it is rounding
    assert!(delta <= CLASSICAL_TOLERANCE || excess_ratio > 1.0, "non-uniform distribution without an excess key");
    Ok(NonuniformityWitness { key_index, probability, excess_ratio, delta_to_uniform: delta })
}

/// I.i.d. key bits, each 0 with probability `1/2 + bias`, big-endian indexing.
pub fn product_bias_distribution(key_bits: u32, bias: f64) -> Result<ClassicalDistribution> {
    if key_bits == 0 || key_bits > MAX_EXHAUSTIVE_BITS {
        return Err(Error::InvalidConfig(format!("key_bits {key_bits} outside 1..={MAX_EXHAUSTIVE_BITS}")));
    }
    if !(-0.5..=0.5).contains(&bias) {
        return Err(Error::InvalidConfig(format!("bias {bias} outside [-1/2, 1/2]")));
    }
    let (zero, one) = (0.5 + bias, 0.5 - bias);
    let n = 1usize << key_bits;
    let probs = (0..n)
        .map(|k| {
            let ones = k.count_ones() as i32;
            zero.powi(key_bits as i32 - ones) * one.powi(ones)
        })
        .collect();
    Ok(ClassicalDistribution::new_normalized(probs))
}

/// delta(P_b, U) grouped by Hamming weight.
fn product_bias_delta(key_bits: u32, bias: f64) -> f64 {
    let l = key_bits as i32;
    let u = 0.5f64.powi(l);
    let (zero, one) = (0.5 + bias, 0.5 - bias);
    let mut binom = 1.0f64;
    let mut total = 0.0;
    for w in 0..=l {
        total += binom * (zero.powi(l - w) * one.powi(w) - u).abs();
        binom = binom * (l - w) as f64 / (w + 1) as f64;
    }
    0.5 * total
}

/// A product-bias key distribution at variational distance `eps` from uniform,
/// found by bisection on the per-bit bias.
pub fn interpretation_counterexample(
    key_bits: u32,
    eps: f64,
) -> Result<(ClassicalDistribution, NonuniformityWitness)> {
    if key_bits == 0 || key_bits > MAX_EXHAUSTIVE_BITS {
        return Err(Error::InvalidConfig(format!("key_bits {key_bits} outside 1..={MAX_EXHAUSTIVE_BITS}")));
    }
    let ceiling = 1.0 - 0.5f64.powi(key_bits as i32);
    if !(eps > 0.0 && eps < ceiling) {
        return Err(Error::EpsOutOfRange { eps, range: format!("(0, {ceiling})") });
    }
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let d = product_bias_delta(key_bits, mid);
        if (d - eps).abs() <= BISECTION_TOLERANCE * 1e-3 {
            lo = mid;
            hi = mid;
            break;
        }
        if d < eps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let p = product_bias_distribution(key_bits, 0.5 * (lo + hi))?;
    let witness = nonuniformity_witness(&p)?;
    Ok((p, witness))
}
