//! Desk-scale BB84 with exact enumeration of the eavesdropper's record.
//!
//! [`run_bb84`] never samples the distribution it reports: every branch of
//! Alice's bits and Eve's per-position outcome is enumerated, so the joint
//! `P(K_G, Y_E)` and everything [`evaluate_security`] derives from it is exact.

mod bb84;
mod otp;
mod security;
mod toeplitz;

pub use bb84::{
    run_bb84, run_bb84_serial, sift, AttackKind, AttackModel, EcMode, ProtocolConfig, ProtocolRun, SiftLayout,
    ABORT_THRESHOLD, ENUMERATION_LIMIT, MAX_KEY_BITS, MAX_RAW_BITS, TABLE_LIMIT,
};
pub use otp::{one_time_pad, verify_perfect_secrecy, SecrecyCheck, MAX_PAD_BITS};
pub use security::{evaluate_security, SecurityReport};
pub use toeplitz::{gf2_rank, privacy_amplify, ToeplitzHash, ToeplitzSeed};
