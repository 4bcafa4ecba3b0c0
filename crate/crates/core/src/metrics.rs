//! Distances, entropies and guessing probabilities.
//!
//! Quantum quantities act on [`DensityOperator`]s and [`CQState`]s; the
//! classical ones act on [`ClassicalDistribution`] and [`JointDistribution`],
//! the latter being what the BB84 enumerator produces.

use minilp::{ComparisonOp, OptimizationDirection, Problem};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::qstate::{cq_assemble, CQState, DensityOperator};

/// Sum-to-one tolerance for classical distributions.
pub const CLASSICAL_TOLERANCE: f64 = 1e-12;

/// Sum-to-one tolerance for enumerated joint distributions.
pub const JOINT_TOLERANCE: f64 = 1e-9;

/// Largest joint table the smoothing LP will accept.
pub const SMOOTHING_SUPPORT_LIMIT: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalDistribution {
    probs: Vec<f64>,
}

impl ClassicalDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        if let Some(p) = probs.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidDistribution(format!("entry {p} is negative or non-finite")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > CLASSICAL_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("entries sum to {total}")));
        }
        Ok(ClassicalDistribution { probs })
    }

    /// Rescales nonnegative weights to unit mass.
    pub fn new_normalized(weights: Vec<f64>) -> Self {
        let total: f64 = weights.iter().sum();
        ClassicalDistribution { probs: weights.into_iter().map(|w| w / total).collect() }
    }

    pub fn uniform(n: usize) -> Self {
        ClassicalDistribution { probs: vec![1.0 / n as f64; n] }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Largest probability and its index; ties go to the lowest index.
    pub fn argmax(&self) -> (usize, f64) {
        let mut best = (0, self.probs[0]);
        for (i, &p) in self.probs.iter().enumerate().skip(1) {
            if p > best.1 {
                best = (i, p);
            }
        }
        best
    }

    pub fn entropy(&self) -> f64 {
        linalg::entropy_bits(&self.probs)
    }

    /// Diagonal embedding as a CQ state with a trivial (one-dimensional)
    /// eavesdropper system. Support size must be a power of two.
    pub fn to_cq_state(&self) -> Result<CQState> {
        let n = self.probs.len();
        if !n.is_power_of_two() || n < 2 {
            return Err(Error::NotPowerOfTwo(n));
        }
        let trivial = DensityOperator::maximally_mixed(1);
        CQState::new(n.trailing_zeros(), self.probs.iter().map(|&p| (p, trivial.clone())).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ExactEigen,
    Classical,
    Helstrom,
    PgmBound,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::ExactEigen => "exact_eigen",
            Method::Classical => "classical",
            Method::Helstrom => "helstrom",
            Method::PgmBound => "pgm_bound",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricResult {
    pub value: f64,
    pub log2_value: f64,
    pub method: Method,
    /// Upper bound on the true optimum when `value` is only achievable
    /// (pretty-good-measurement case): `2^-l + d`.
    pub upper_bound: Option<f64>,
}

impl MetricResult {
    fn new(value: f64, method: Method) -> Self {
        let value = value.clamp(0.0, 1.0);
        MetricResult { value, log2_value: value.log2(), method, upper_bound: None }
    }
}

/// 1/2 ||rho - sigma||_1 from the spectrum of the Hermitian difference.
pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<MetricResult> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: sigma.dim() });
    }
    let diff = rho.matrix() - sigma.matrix();
    Ok(MetricResult::new(0.5 * linalg::trace_norm(&diff), Method::ExactEigen))
}

pub fn variational_distance(p: &ClassicalDistribution, q: &ClassicalDistribution) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch { expected: p.len(), found: q.len() });
    }
    Ok(0.5 * p.probs.iter().zip(&q.probs).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// Distance between a CQ state and the ideal `rho_U (x) rho_E`.
pub fn distance_to_ideal(cq: &CQState) -> Result<f64> {
    Ok(trace_distance(&cq_assemble(cq)?, &cq.ideal_state()?)?.value)
}

/// Holevo quantity `S(rho_E) - sum_k p(k) S(rho_E^k)` in bits, clamped at 0.
pub fn holevo_chi(cq: &CQState) -> f64 {
    let mixed = cq.eve_state().entropy();
    let average: f64 = cq.entries().iter().filter(|(p, _)| *p > 0.0).map(|(p, r)| p * r.entropy()).sum();
    (mixed - average).max(0.0)
}

const COMMUTE_TOLERANCE: f64 = 1e-10;

/// Eve's optimal probability of guessing the key from her system.
///
/// Commuting ensembles and binary ensembles are solved exactly. Otherwise the
/// pretty-good-measurement success probability is returned (an achievable
/// value, so a lower bound on the optimum) alongside the upper bound `2^-l + d`.
pub fn guessing_probability(cq: &CQState) -> Result<MetricResult> {
    if let Some(value) = commuting_guess(cq) {
        return Ok(MetricResult::new(value, Method::Classical));
    }
    if cq.key_count() == 2 {
        let (p0, r0) = &cq.entries()[0];
        let (p1, r1) = &cq.entries()[1];
        let diff = r0.matrix().map(|z| z * *p0) - r1.matrix().map(|z| z * *p1);
        let value = 0.5 * (1.0 + linalg::trace_norm(&diff));
        return Ok(MetricResult::new(value, Method::Helstrom));
    }
    let mut result = MetricResult::new(pretty_good_guess(cq), Method::PgmBound);
    let d = distance_to_ideal(cq)?;
    result.upper_bound = Some((1.0 / cq.key_count() as f64 + d).min(1.0));
    Ok(result)
}

fn commuting_guess(cq: &CQState) -> Option<f64> {
    let dim = cq.eve_dim();
    let live: Vec<&(f64, DensityOperator)> = cq.entries().iter().filter(|(p, _)| *p > 0.0).collect();
    if dim == 1 {
        return Some(live.iter().map(|(p, _)| *p).fold(0.0, f64::max));
    }
    for (i, a) in live.iter().enumerate() {
        for b in &live[i + 1..] {
            if linalg::commutator_norm(a.1.matrix(), b.1.matrix()) > COMMUTE_TOLERANCE {
                return None;
            }
        }
    }
    // A generic combination of a commuting family shares its eigenbasis.
    for salt in [0.0, 0.37, 0.71] {
        let mut combo = CMatrix::zeros(dim, dim);
        for (k, (_, rho)) in live.iter().enumerate() {
            let w = ((k as f64 + 1.0) * 0.618_033_988_749_895 + salt).fract() + 0.5;
            combo += rho.matrix().map(|z| z * w);
        }
        let basis = linalg::hermitian_eigen(&combo).vectors;
        let mut diagonalises = true;
        let mut columns = vec![0.0f64; dim];
        for (p, rho) in &live {
            let d = basis.adjoint() * rho.matrix() * &basis;
            for i in 0..dim {
                for j in 0..dim {
                    if i != j && d[(i, j)].norm() > 1e-8 {
                        diagonalises = false;
                    }
                }
                columns[i] = columns[i].max(p * d[(i, i)].re);
            }
        }
        if diagonalises {
            return Some(columns.iter().sum());
        }
    }
    None
}

fn pretty_good_guess(cq: &CQState) -> f64 {
    let avg = cq.eve_state();
    let eig = linalg::hermitian_eigen(avg.matrix());
    let inv_sqrt = linalg::spectral_map(&eig, |l| if l > 1e-14 { 1.0 / l.sqrt() } else { 0.0 });
    cq.entries()
        .iter()
        .filter(|(p, _)| *p > 0.0)
        .map(|(p, rho)| {
            let weighted = rho.matrix().map(|z| z * *p);
            let povm = &inv_sqrt * &weighted * &inv_sqrt;
            let product = &weighted * povm;
            (0..product.nrows()).map(|i| product[(i, i)].re).sum::<f64>()
        })
        .sum()
}

/// Classical joint distribution `P(K = k, Y = y)` stored column-major by outcome:
/// entry `(k, y)` lives at `y * keys + k`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    keys: usize,
    outcomes: usize,
    probs: Vec<f64>,
}

impl JointDistribution {
    pub fn new(keys: usize, outcomes: usize, probs: Vec<f64>) -> Result<Self> {
        if keys == 0 || outcomes == 0 || probs.len() != keys * outcomes {
            return Err(Error::DimensionMismatch { expected: keys * outcomes, found: probs.len() });
        }
        if let Some(p) = probs.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidDistribution(format!("entry {p} is negative or non-finite")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > JOINT_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("joint sums to {total}")));
        }
        Ok(JointDistribution { keys, outcomes, probs })
    }

    /// Joint of a key with no side information.
    pub fn without_side_information(p: &ClassicalDistribution) -> Self {
        JointDistribution { keys: p.len(), outcomes: 1, probs: p.probs.clone() }
    }

    pub fn keys(&self) -> usize {
        self.keys
    }

    pub fn outcomes(&self) -> usize {
        self.outcomes
    }

    pub fn get(&self, key: usize, outcome: usize) -> f64 {
        self.probs[outcome * self.keys + key]
    }

    pub fn column(&self, outcome: usize) -> &[f64] {
        &self.probs[outcome * self.keys..(outcome + 1) * self.keys]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[f64]> {
        self.probs.chunks_exact(self.keys)
    }

    pub fn key_marginal(&self) -> ClassicalDistribution {
        let mut m = vec![0.0; self.keys];
        for col in self.columns() {
            for (acc, p) in m.iter_mut().zip(col) {
                *acc += p;
            }
        }
        ClassicalDistribution::new_normalized(m)
    }

    pub fn outcome_marginal(&self) -> Vec<f64> {
        self.columns().map(|c| c.iter().sum()).collect()
    }

    /// `sum_y max_k P(k, y)`.
    pub fn guessing_probability(&self) -> f64 {
        self.columns().map(|c| c.iter().copied().fold(0.0, f64::max)).sum()
    }

    /// Conditional min-entropy `-log2 sum_y max_k P(k, y)`.
    pub fn min_entropy(&self) -> f64 {
        -self.guessing_probability().log2()
    }

    /// Classical form of `1/2 || rho_KY - rho_U (x) rho_Y ||_1`.
    pub fn distance_to_ideal(&self) -> f64 {
        let u = 1.0 / self.keys as f64;
        0.5 * self
            .columns()
            .map(|c| {
                let py: f64 = c.iter().sum();
                c.iter().map(|p| (p - py * u).abs()).sum::<f64>()
            })
            .sum::<f64>()
    }

    /// `H(K) + H(Y) - H(K, Y)`.
    pub fn mutual_information(&self) -> f64 {
        let hk = self.key_marginal().entropy();
        let hy = linalg::entropy_bits(&self.outcome_marginal());
        let hky = linalg::entropy_bits(&self.probs);
        (hk + hy - hky).max(0.0)
    }

    /// `H(Y) - sum_k p(k) H(Y | K = k)`, the Holevo quantity of the diagonal
    /// ensemble. Equal to the mutual information; computed by a separate route.
    pub fn holevo_chi(&self) -> f64 {
        let hy = linalg::entropy_bits(&self.outcome_marginal());
        let pk = self.key_marginal();
        let mut conditional = 0.0;
        for (k, &p) in pk.probs().iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            let row: Vec<f64> = (0..self.outcomes).map(|y| self.get(k, y) / p).collect();
            conditional += p * linalg::entropy_bits(&row);
        }
        (hy - conditional).max(0.0)
    }

    /// Diagonal embedding `rho_E^k = diag(P(y | k))`. Keys with zero weight
    /// get the outcome marginal as a placeholder state.
    pub fn to_cq_state(&self) -> Result<CQState> {
        if !self.keys.is_power_of_two() || self.keys < 2 {
            return Err(Error::NotPowerOfTwo(self.keys));
        }
        let py = self.outcome_marginal();
        let pk = self.key_marginal();
        let mut entries = Vec::with_capacity(self.keys);
        for (k, &p) in pk.probs().iter().enumerate() {
            let row: Vec<f64> = if p > 0.0 {
                (0..self.outcomes).map(|y| self.get(k, y) / p).collect()
            } else {
                py.clone()
            };
            let total: f64 = row.iter().sum();
            let row: Vec<f64> = row.iter().map(|x| x / total).collect();
            entries.push((p, DensityOperator::diagonal(&row)?));
        }
        CQState::new(self.keys.trailing_zeros(), entries)
    }
}

/// Classical smooth min-entropy `max_{P' : delta(P, P') <= eps} H_min(K|Y)_{P'}`.
///
/// The smoothing ball uses the variational distance over normalised joint
/// distributions. Solved as the linear program
/// `min sum_y t_y` s.t. `t_y >= P'(k,y)`, `sum |P - P'| <= 2 eps`, `sum P' = 1`.
pub fn smooth_min_entropy(joint: &JointDistribution, eps: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::EpsOutOfRange { eps, range: "[0, 1)".into() });
    }
    let size = joint.probs.len();
    if size > SMOOTHING_SUPPORT_LIMIT {
        return Err(Error::SupportTooLarge { size, limit: SMOOTHING_SUPPORT_LIMIT });
    }
    if eps == 0.0 {
        return Ok(joint.min_entropy());
    }
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let free = (0.0, f64::INFINITY);
    let peaks: Vec<_> = (0..joint.outcomes).map(|_| lp.add_var(1.0, free)).collect();
    let smoothed: Vec<_> = (0..size).map(|_| lp.add_var(0.0, free)).collect();
    let slack: Vec<_> = (0..size).map(|_| lp.add_var(0.0, free)).collect();
    for (i, &p) in joint.probs.iter().enumerate() {
        let (x, u, t) = (smoothed[i], slack[i], peaks[i / joint.keys]);
        lp.add_constraint(&[(t, 1.0), (x, -1.0)], ComparisonOp::Ge, 0.0);
        lp.add_constraint(&[(u, 1.0), (x, -1.0)], ComparisonOp::Ge, -p);
        lp.add_constraint(&[(u, 1.0), (x, 1.0)], ComparisonOp::Ge, p);
    }
    let budget: Vec<_> = slack.iter().map(|&u| (u, 1.0)).collect();
    lp.add_constraint(budget.as_slice(), ComparisonOp::Le, 2.0 * eps);
    let mass: Vec<_> = smoothed.iter().map(|&x| (x, 1.0)).collect();
    lp.add_constraint(mass.as_slice(), ComparisonOp::Eq, 1.0);
    let solution = lp.solve().map_err(|e| Error::Solver(e.to_string()))?;
    let guess = solution.objective().max(1.0 / joint.keys as f64);
    // the smoothing ball contains P itself
    Ok((-guess.log2()).max(joint.min_entropy()))
}
