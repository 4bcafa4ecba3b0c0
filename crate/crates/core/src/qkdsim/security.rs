use super::bb84::ProtocolRun;
use crate::coupling::{nonuniformity_witness, NonuniformityWitness};
use crate::metrics::{variational_distance, ClassicalDistribution, CLASSICAL_TOLERANCE};

/// Distances below this are treated as zero by [`SecurityReport::lemma1_holds`].
pub const DISTANCE_FLOOR: f64 = 1e-6;
/// Mutual information below this counts as independence.
pub const INFORMATION_FLOOR: f64 = 1e-9;

/// Everything derived from one run's exact joint distribution. Eve's record
/// is classical, so all quantum quantities reduce to their diagonal forms.
#[derive(Debug, Clone, PartialEq)]
pub struct SecurityReport {
    pub key_bits: usize,
    /// `1/2 || rho_KE - rho_U (x) rho_E ||_1`.
    pub trace_distance: f64,
    /// `sum_y max_k P(k, y)`.
    pub guessing_probability: f64,
    /// `2^-l`.
    pub uniform_guess: f64,
    /// `2^-l + d`.
    pub guess_upper_bound: f64,
    /// `2^-l + d - P_guess`, nonnegative whenever the bound holds.
    pub guess_bound_residual: f64,
    pub holevo_chi: f64,
    pub mutual_information: f64,
    pub key_delta_to_uniform: f64,
    pub witness: NonuniformityWitness,
    /// `H_min(K_G | Y_E)`.
    pub key_min_entropy: f64,
    /// `H_min(X | Y_E)` of the string entering privacy amplification.
    pub sifted_min_entropy: f64,
    /// `1/2 sqrt(2^{l - H_min(X | Y_E)})`.
    pub leftover_hash_bound: f64,
    pub abort: bool,
    pub abort_probability: f64,
    pub qber_estimate: f64,
}

impl SecurityReport {
    /// `d > 0` implies a non-uniform key or correlation with Eve.
    pub fn lemma1_holds(&self) -> bool {
        self.trace_distance <= DISTANCE_FLOOR
            || self.key_delta_to_uniform > CLASSICAL_TOLERANCE
            || self.mutual_information > INFORMATION_FLOOR
    }
}

pub fn evaluate_security(run: &ProtocolRun) -> SecurityReport {
    let joint = &run.joint;
    let l = run.key_bits();
    let d = joint.distance_to_ideal();
    let guess = joint.guessing_probability();
    let uniform_guess = 1.0 / joint.keys() as f64;
    let marginal = joint.key_marginal();
    let delta = variational_distance(&marginal, &ClassicalDistribution::uniform(joint.keys()))
        .expect("marginal has 2^l entries");
    let witness = nonuniformity_witness(&marginal).expect("2^l keys");
    let sifted_min_entropy = run.sifted_min_entropy();
    SecurityReport {
        key_bits: l,
        trace_distance: d,
        guessing_probability: guess,
        uniform_guess,
        guess_upper_bound: uniform_guess + d,
        guess_bound_residual: uniform_guess + d - guess,
        holevo_chi: joint.holevo_chi(),
        mutual_information: joint.mutual_information(),
        key_delta_to_uniform: delta,
        witness,
        key_min_entropy: joint.min_entropy(),
        sifted_min_entropy,
        leftover_hash_bound: 0.5 * ((l as f64 - sifted_min_entropy) / 2.0).exp2(),
        abort: run.abort,
        abort_probability: run.abort_probability,
        qber_estimate: run.qber_estimate,
    }
}
