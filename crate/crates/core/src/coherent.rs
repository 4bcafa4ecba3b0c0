//! Coherent-state discrimination for masked wiretap channels.
//!
//! Signals are handled only through exact inner products
//! `<a|b> = exp(-|a|^2/2 - |b|^2/2 + conj(a) b)`, never through a truncated
//! photon-number basis, so arbitrarily bright amplitudes are fine.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::metrics::ClassicalDistribution;

pub const MAX_CONSTELLATION: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentSignal {
    amplitude: Complex64,
}

impl CoherentSignal {
    pub fn new(amplitude: Complex64) -> Result<Self> {
        if !amplitude.re.is_finite() || !amplitude.im.is_finite() {
            return Err(Error::InvalidConfig(format!("non-finite amplitude {amplitude}")));
        }
        Ok(CoherentSignal { amplitude })
    }

    pub fn real(x: f64) -> Result<Self> {
        Self::new(Complex64::new(x, 0.0))
    }

    pub fn amplitude(&self) -> Complex64 {
        self.amplitude
    }

    pub fn mean_photon_number(&self) -> f64 {
        self.amplitude.norm_sqr()
    }
}

pub fn inner_product(a: &CoherentSignal, b: &CoherentSignal) -> Complex64 {
    let exponent = -0.5 * a.mean_photon_number() - 0.5 * b.mean_photon_number() + a.amplitude.conj() * b.amplitude;
    exponent.exp()
}

/// `|<a|b>|^2 = exp(-|a - b|^2)`.
pub fn overlap(a: &CoherentSignal, b: &CoherentSignal) -> f64 {
    (-(a.amplitude - b.amplitude).norm_sqr()).exp()
}

/// Minimum error probability for two pure coherent states,
/// `1/2 (1 - sqrt(1 - 4 p0 p1 |<a|b>|^2))`.
pub fn helstrom_binary(a: &CoherentSignal, b: &CoherentSignal, priors: (f64, f64)) -> Result<f64> {
    let (p0, p1) = priors;
    if !(p0 >= 0.0 && p1 >= 0.0) || (p0 + p1 - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidDistribution(format!("priors ({p0}, {p1})")));
    }
    let x = (4.0 * p0 * p1 * overlap(a, b)).min(1.0);
    // 1 - sqrt(1 - x) written to survive x ~ e^-100
    Ok(0.5 * x / (1.0 + (1.0 - x).sqrt()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    signals: Vec<CoherentSignal>,
    priors: ClassicalDistribution,
}

impl Constellation {
    pub fn new(signals: Vec<CoherentSignal>, priors: ClassicalDistribution) -> Result<Self> {
        if signals.is_empty() || signals.len() != priors.len() {
            return Err(Error::DimensionMismatch { expected: signals.len(), found: priors.len() });
        }
        Ok(Constellation { signals, priors })
    }

    pub fn uniform(signals: Vec<CoherentSignal>) -> Result<Self> {
        let n = signals.len();
        Self::new(signals, ClassicalDistribution::uniform(n.max(1)))
    }

    /// `M` signals `alpha e^{2 pi i k / M}` with `|alpha|^2 = mean_photon_number`.
    pub fn phase_shift_keyed(m: usize, mean_photon_number: f64) -> Result<Self> {
        if m == 0 || !(mean_photon_number >= 0.0) {
            return Err(Error::InvalidConfig(format!("PSK with M = {m}, |alpha|^2 = {mean_photon_number}")));
        }
        let r = mean_photon_number.sqrt();
        let signals = (0..m)
            .map(|k| CoherentSignal::new(Complex64::from_polar(r, std::f64::consts::TAU * k as f64 / m as f64)))
            .collect::<Result<Vec<_>>>()?;
        Self::uniform(signals)
    }

    pub fn len(&self) -> usize {
        self.signals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signals.is_empty()
    }

    pub fn signals(&self) -> &[CoherentSignal] {
        &self.signals
    }

    pub fn priors(&self) -> &ClassicalDistribution {
        &self.priors
    }

    /// Largest pairwise distance between amplitudes.
    pub fn diameter(&self) -> f64 {
        let mut d = 0.0f64;
        for (i, a) in self.signals.iter().enumerate() {
            for b in &self.signals[i + 1..] {
                d = d.max((a.amplitude - b.amplitude).norm());
            }
        }
        d
    }

    /// Prior-weighted Gram matrix `sqrt(p_i p_j) <a_i|a_j>`.
    pub fn weighted_gram(&self) -> CMatrix {
        let p = self.priors.probs();
        let m = self.len();
        CMatrix::from_fn(m, m, |i, j| inner_product(&self.signals[i], &self.signals[j]) * (p[i] * p[j]).sqrt())
    }

    /// Uniform priors and a circulant Gram matrix: the geometrically uniform
    /// case in which the square-root measurement is optimal.
    pub fn is_symmetric(&self) -> bool {
        let m = self.len();
        let p = self.priors.probs();
        if p.iter().any(|&x| (x - 1.0 / m as f64).abs() > 1e-12) {
            return false;
        }
        let g = |i: usize, j: usize| inner_product(&self.signals[i], &self.signals[j]);
        (0..m).all(|i| (0..m).all(|j| (g(i, j) - g(0, (j + m - i) % m)).norm() <= 1e-12))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaskingMethod {
    /// Closed-form optimum (M <= 2).
    Exact,
    /// Square-root measurement on a symmetric constellation, which is optimal there.
    SrmOptimal,
    /// Square-root measurement elsewhere; an achievable error, not the minimum.
    SrmApproximation,
}

impl MaskingMethod {
    pub fn label(self) -> &'static str {
        match self {
            MaskingMethod::Exact => "helstrom",
            MaskingMethod::SrmOptimal => "srm_optimal",
            MaskingMethod::SrmApproximation => "srm_approximation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaskingError {
    pub value: f64,
    pub method: MaskingMethod,
}

/// Square-root-measurement success probability `sum_i ((G^{1/2})_ii)^2`.
fn srm_success(c: &Constellation) -> f64 {
    let eig = linalg::hermitian_eigen(&c.weighted_gram());
    let root = linalg::spectral_map(&eig, |l| l.max(0.0).sqrt());
    (0..c.len()).map(|i| root[(i, i)].norm_sqr()).sum()
}

/// Eve's error probability when discriminating the full masked constellation.
pub fn mary_masking_error(c: &Constellation) -> Result<MaskingError> {
    let m = c.len();
    if m > MAX_CONSTELLATION {
        return Err(Error::ConstellationTooLarge { size: m, limit: MAX_CONSTELLATION });
    }
    match m {
        1 => Ok(MaskingError { value: 0.0, method: MaskingMethod::Exact }),
        2 => {
            let p = c.priors.probs();
            let value = helstrom_binary(&c.signals[0], &c.signals[1], (p[0], p[1]))?;
            Ok(MaskingError { value, method: MaskingMethod::Exact })
        }
        _ => {
            let value = (1.0 - srm_success(c)).clamp(0.0, 1.0);
            let method = if c.is_symmetric() { MaskingMethod::SrmOptimal } else { MaskingMethod::SrmApproximation };
            Ok(MaskingError { value, method })
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRow {
    pub channel: &'static str,
    pub feature: &'static str,
    pub error_probability: f64,
    pub method: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaskedChannelReport {
    pub bob: ChannelRow,
    pub eve: ChannelRow,
}

/// Legitimate receiver versus eavesdropper on a key-masked constellation.
///
/// With the key, the receiver only separates the antipodal pair
/// `(i, i + M/2)` selected by the key; without it, every signal is a candidate.
pub fn masked_channel_report(c: &Constellation, bob_key_known: bool) -> Result<MaskedChannelReport> {
    let eve_error = mary_masking_error(c)?;
    let eve = ChannelRow {
        channel: "alice_eve",
        feature: "quantum_effect",
        error_probability: eve_error.value,
        method: eve_error.method.label(),
    };
    let m = c.len();
    let bob = if !bob_key_known {
        ChannelRow { channel: "alice_bob", feature: "quantum_effect", ..eve.clone() }
    } else if m == 1 {
        ChannelRow { channel: "alice_bob", feature: "classical", error_probability: 0.0, method: "helstrom" }
    } else {
        if m % 2 != 0 {
            return Err(Error::UnpairedConstellation(m));
        }
        let p = c.priors.probs();
        let half = m / 2;
        let mut error = 0.0;
        for i in 0..half {
            let w = p[i] + p[i + half];
            if w > 0.0 {
                error += w * helstrom_binary(&c.signals[i], &c.signals[i + half], (p[i] / w, p[i + half] / w))?;
            }
        }
        ChannelRow { channel: "alice_bob", feature: "classical", error_probability: error, method: "helstrom" }
    };
    Ok(MaskedChannelReport { bob, eve })
}
