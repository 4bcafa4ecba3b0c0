//! Scalar security-bound calculators.
//!
//! Probabilities such as `2^-10000` underflow `f64`, so every bound is carried
//! as a base-2 logarithm ([`LogProb`]) and only rendered in decimal at the end.

use std::f64::consts::{LN_2, LOG10_2};
use std::fmt;

use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::metrics::ClassicalDistribution;

/// A probability stored as its base-2 logarithm.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LogProb {
    log2: f64,
}

impl LogProb {
    pub const ZERO: LogProb = LogProb { log2: f64::NEG_INFINITY };
    pub const ONE: LogProb = LogProb { log2: 0.0 };

    pub fn from_log2(log2: f64) -> Self {
        LogProb { log2 }
    }

    pub fn from_prob(p: f64) -> Self {
        LogProb { log2: p.log2() }
    }

    /// `2^-bits`, exact in the exponent.
    pub fn pow2_neg(bits: u64) -> Self {
        LogProb { log2: -(bits as f64) }
    }

    pub fn log2(self) -> f64 {
        self.log2
    }

    pub fn log10(self) -> f64 {
        self.log2 * LOG10_2
    }

    /// Linear value; underflows to zero below about `2^-1074`.
    pub fn value(self) -> f64 {
        self.log2.exp2()
    }

    /// `log2(2^a + 2^b)` without leaving the log domain.
    pub fn add(self, other: LogProb) -> LogProb {
        let (hi, lo) = if self.log2 >= other.log2 { (self.log2, other.log2) } else { (other.log2, self.log2) };
        if lo == f64::NEG_INFINITY {
            return LogProb { log2: hi };
        }
        LogProb { log2: hi + ((lo - hi).exp2()).ln_1p() / LN_2 }
    }

    pub fn powf(self, exponent: f64) -> LogProb {
        if exponent == 0.0 {
            return LogProb::ONE;
        }
        LogProb { log2: self.log2 * exponent }
    }

    /// Decimal scientific rendering at four significant digits, e.g. `5.012e-3011`.
    pub fn render(self) -> String {
        render_log10(self.log10())
    }
}

impl fmt::Display for LogProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl From<f64> for LogProb {
    fn from(p: f64) -> Self {
        LogProb::from_prob(p)
    }
}

/// A (large) count stored as its base-2 logarithm.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LogCount {
    log2: f64,
}

impl LogCount {
    pub fn log2(self) -> f64 {
        self.log2
    }

    pub fn log10(self) -> f64 {
        self.log2 * LOG10_2
    }

    pub fn value(self) -> f64 {
        self.log2.exp2()
    }

    pub fn render(self) -> String {
        render_log10(self.log10())
    }
}

fn render_log10(log10: f64) -> String {
    if log10 == f64::NEG_INFINITY {
        return "0".into();
    }
    if !log10.is_finite() {
        return format!("{log10}");
    }
    let mut exponent = log10.floor();
    let mut mantissa = 10f64.powf(log10 - exponent);
    let rounded: f64 = format!("{mantissa:.3}").parse().unwrap_or(mantissa);
    if rounded >= 10.0 {
        mantissa = rounded / 10.0;
        exponent += 1.0;
    } else {
        mantissa = rounded;
    }
    format!("{mantissa:.3}e{}", exponent as i64)
}

fn check_unit(eps: f64) -> Result<()> {
    if (0.0..=1.0).contains(&eps) {
        Ok(())
    } else {
        Err(Error::EpsOutOfRange { eps, range: "[0, 1]".into() })
    }
}

/// Success probability of guessing a uniform `key_bits`-bit key: `2^-key_bits`.
pub fn shannon_requirement(key_bits: u64) -> LogProb {
    LogProb::pow2_neg(key_bits)
}

/// Number of keys an exhaustive search must try: `2^key_bits`.
pub fn brute_force_count(key_bits: u64) -> LogCount {
    LogCount { log2: key_bits as f64 }
}

/// Averaged guessing bound `eps + 2^-key_bits`.
pub fn avg_guess_bound(eps: f64, key_bits: u64) -> Result<LogProb> {
    check_unit(eps)?;
    Ok(LogProb::from_prob(eps).add(LogProb::pow2_neg(key_bits)))
}

/// Individual guessing bound `eps_avg^{1/3} + 2^-key_bits`, obtained from an
/// averaged distance bound by applying Markov's inequality twice.
pub fn individual_guess_bound(eps_avg: f64, key_bits: u64) -> Result<LogProb> {
    check_unit(eps_avg)?;
    Ok(LogProb::from_prob(eps_avg).powf(1.0 / 3.0).add(LogProb::pow2_neg(key_bits)))
}

/// Key distribution attaining the averaged bound with equality: key 0 has
/// probability `2^-l + eps`, the remaining mass is spread evenly.
pub fn extremal_distribution(eps: f64, key_bits: u32) -> Result<ClassicalDistribution> {
    if key_bits == 0 || key_bits > 24 {
        return Err(Error::InvalidConfig(format!("key_bits {key_bits} outside 1..=24")));
    }
    let n = 1usize << key_bits;
    let u = 1.0 / n as f64;
    let ceiling = 1.0 - u;
    if !(0.0..=ceiling).contains(&eps) {
        return Err(Error::EpsOutOfRange { eps, range: format!("[0, {ceiling}]") });
    }
    let mut probs = vec![u - eps / (n - 1) as f64; n];
    probs[0] = u + eps;
    if eps == ceiling {
        probs[1..].fill(0.0);
    }
    ClassicalDistribution::new(probs)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaMinimum {
    pub delta: f64,
    pub argmin_eps: f64,
}

/// Grid minimisation of `1/2 sqrt(2^{l - H(eps')}) + eps'` over the supplied
/// smoothing parameters. Ties keep the smallest `eps'`.
pub fn tomamichel_delta(key_bits: f64, grid: &[f64], hmin_curve: impl Fn(f64) -> f64) -> Result<DeltaMinimum> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut best: Option<DeltaMinimum> = None;
    for &eps in grid {
        if !(0.0..=0.5).contains(&eps) {
            return Err(Error::EpsOutOfRange { eps, range: "[0, 0.5]".into() });
        }
        let delta = 0.5 * ((key_bits - hmin_curve(eps)) / 2.0).exp2() + eps;
        if best.is_none_or(|b| delta < b.delta) {
            best = Some(DeltaMinimum { delta, argmin_eps: eps });
        }
    }
    Ok(best.expect("grid is non-empty"))
}

/// Distance bound after accounting for aborted runs: `(1 - p_abort) delta`.
pub fn abort_adjust(delta: f64, p_abort: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_abort) {
        return Err(Error::InvalidConfig(format!("p_abort {p_abort} outside [0, 1]")));
    }
    Ok((1.0 - p_abort) * delta)
}

/// Standard normal upper tail `Q(s) = 1/2 erfc(s / sqrt 2)`.
pub fn gaussian_tail(s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::InvalidConfig(format!("tail argument {s} must be nonnegative")));
    }
    Ok(0.5 * erfc(s / std::f64::consts::SQRT_2))
}

/// Solves `Q(s) = eps` by Newton iteration on `ln Q`, which is concave, so the
/// iterates approach the root monotonically after the first step.
pub fn gaussian_tail_inverse(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(Error::EpsOutOfRange { eps, range: "(0, 0.5]".into() });
    }
    if eps == 0.5 {
        return Ok(0.0);
    }
    let target = eps.ln();
    let density = |s: f64| (-0.5 * s * s).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut s = (-2.0 * eps.ln()).sqrt();
    for _ in 0..100 {
        let q = 0.5 * erfc(s / std::f64::consts::SQRT_2);
        let step = (q.ln() - target) * q / density(s);
        let next = (s + step).max(0.0);
        if (next - s).abs() <= 1e-15 * s.max(1.0) {
            return Ok(next);
        }
        s = next;
    }
    Ok(s)
}

/// Distance bound from the phase-error decoding probability: `sqrt(2 P_phase)`, clamped to 1.
pub fn phase_error_to_distance(p_phase: f64) -> Result<f64> {
    check_unit(p_phase)?;
    Ok((2.0 * p_phase).sqrt().min(1.0))
}

/// Upper confidence limit on the phase error rate of the unsampled bits.
///
/// `p_shift` is the realised error rate outside the sample `(k - c) / (N - n)`;
/// `p_shift_hat` is the normal-approximation limit `c/n + s sqrt(r(1-r)/n)` with
/// `s = Q^{-1}(eps_hs)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseErrorEstimate {
    pub sample_errors: u64,
    pub total_errors: u64,
    pub p_shift: f64,
    pub p_shift_hat: f64,
    pub eps_hs: f64,
    pub s: f64,
}

impl PhaseErrorEstimate {
    pub fn new(sample_errors: u64, sample_size: u64, total_errors: u64, total_size: u64, eps_hs: f64) -> Result<Self> {
        if sample_size == 0 || sample_size >= total_size {
            return Err(Error::InvalidConfig(format!(
                "sample size {sample_size} must be in 1..{total_size}"
            )));
        }
        if sample_errors > sample_size || total_errors > total_size || sample_errors > total_errors {
            return Err(Error::InvalidConfig("error counts inconsistent with sizes".into()));
        }
        if total_errors - sample_errors > total_size - sample_size {
            return Err(Error::InvalidConfig("more unsampled errors than unsampled bits".into()));
        }
        if !(eps_hs > 0.0 && eps_hs < 1.0) {
            return Err(Error::EpsOutOfRange { eps: eps_hs, range: "(0, 1)".into() });
        }
        let s = if eps_hs <= 0.5 { gaussian_tail_inverse(eps_hs)? } else { 0.0 };
        let rate = sample_errors as f64 / sample_size as f64;
        let p_shift_hat = (rate + s * (rate * (1.0 - rate) / sample_size as f64).sqrt()).min(1.0);
        let p_shift = (total_errors - sample_errors) as f64 / (total_size - sample_size) as f64;
        Ok(PhaseErrorEstimate { sample_errors, total_errors, p_shift, p_shift_hat, eps_hs, s })
    }

    /// Whether the confidence limit covers the realised rate.
    pub fn covers(&self) -> bool {
        self.p_shift_hat >= self.p_shift
    }
}

/// Key-estimation comparison: the individual guessing bound available from a
/// distance bound versus the requirement for a uniform key.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Table1 {
    pub eps: f64,
    pub key_bits: u64,
    pub present_qkd: LogProb,
    pub requirement: LogProb,
}

pub fn build_table1(eps: f64, key_bits: u64) -> Result<Table1> {
    Ok(Table1 {
        eps,
        key_bits,
        present_qkd: individual_guess_bound(eps, key_bits)?,
        requirement: shannon_requirement(key_bits),
    })
}

impl Table1 {
    pub fn to_csv(&self) -> String {
        format!(
            "row,present_qkd_log10,requirement_log10,present_qkd,requirement\nkey_estimation,{},{},{},{}\n",
            self.present_qkd.log10(),
            self.requirement.log10(),
            self.present_qkd.render(),
            self.requirement.render()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::variational_distance;

    #[test]
    fn shannon_requirement_examples() {
        assert_eq!(shannon_requirement(1).value(), 0.5);
        let r = shannon_requirement(10_000);
        assert_eq!(r.log2(), -10_000.0);
        assert!((r.log10() + 3010.2999566).abs() < 1e-6);
        assert!((shannon_requirement(256).log10() + 77.0637).abs() < 1e-4);
    }

    #[test]
    fn brute_force_examples() {
        assert_eq!(brute_force_count(1).value(), 2.0);
        assert_eq!(brute_force_count(10).value(), 1024.0);
        assert!((brute_force_count(256).log10() - 77.0637).abs() < 1e-4);
    }

    #[test]
    fn avg_guess_examples() {
        assert_eq!(avg_guess_bound(0.0, 4).unwrap().log2(), -4.0);
        let b = avg_guess_bound(1e-10, 10_000).unwrap();
        assert!((b.log10() + 10.0).abs() < 1e-12);
        assert!((avg_guess_bound(0.1, 2).unwrap().value() - 0.35).abs() < 1e-15);
        assert!(avg_guess_bound(1.5, 2).is_err());
    }

    #[test]
    fn individual_guess_examples() {
        let b = individual_guess_bound(1e-10, 10_000).unwrap();
        assert!((b.value() - 4.6416e-4).abs() < 1e-8);
        assert!((b.log10() + 10.0 / 3.0).abs() < 1e-12);
        assert_eq!(individual_guess_bound(0.0, 7).unwrap().log2(), -7.0);
        let b = individual_guess_bound(1e-3, 64).unwrap();
        assert!((b.value() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn extremal_examples() {
        assert_eq!(extremal_distribution(0.0, 3).unwrap(), ClassicalDistribution::uniform(8));
        let p = extremal_distribution(0.1, 2).unwrap();
        assert!((p.probs()[0] - 0.35).abs() < 1e-15);
        for &x in &p.probs()[1..] {
            assert!((x - 0.65 / 3.0).abs() < 1e-15);
        }
        let d = variational_distance(&p, &ClassicalDistribution::uniform(4)).unwrap();
        assert!((d - 0.1).abs() < 1e-15);
        assert_eq!(extremal_distribution(0.5, 1).unwrap().probs(), &[1.0, 0.0]);
        assert!(extremal_distribution(0.6, 1).is_err());
    }

    #[test]
    fn tomamichel_examples() {
        let grid: Vec<f64> = (0..=50).map(|i| i as f64 * 0.01).collect();
        let m = tomamichel_delta(100.0, &grid, |_| 100.0).unwrap();
        assert_eq!(m.delta, 0.5);
        assert_eq!(m.argmin_eps, 0.0);
        let m = tomamichel_delta(100.0, &grid, |_| 160.0).unwrap();
        assert!((m.delta - 0.5 * 2f64.powi(-30)).abs() < 1e-24);
        assert!((m.delta - 4.66e-10).abs() < 1e-12);
        assert_eq!(tomamichel_delta(1.0, &[], |_| 0.0), Err(Error::EmptyGrid));
    }

    #[test]
    fn tomamichel_matches_dense_grid() {
        // H(eps') = l + 40 + 200 eps': objective 1/2 2^{-20 - 100 eps'} + eps'.
        let l = 64.0;
        let curve = |e: f64| l + 40.0 + 200.0 * e;
        let coarse: Vec<f64> = (0..=500).map(|i| i as f64 * 0.001).collect();
        let m = tomamichel_delta(l, &coarse, curve).unwrap();
        let mut brute = (f64::INFINITY, 0.0);
        for i in 0..=500_000 {
            let e = i as f64 * 1e-6;
            let v = 0.5 * ((l - curve(e)) / 2.0).exp2() + e;
            if v < brute.0 {
                brute = (v, e);
            }
        }
        assert!(m.delta >= brute.0);
        assert!(m.delta - brute.0 < 1e-3);
    }

    #[test]
    fn abort_examples() {
        assert_eq!(abort_adjust(0.3, 0.0).unwrap(), 0.3);
        assert_eq!(abort_adjust(0.3, 1.0).unwrap(), 0.0);
        assert!((abort_adjust(2e-10, 0.5).unwrap() - 1e-10).abs() < 1e-25);
    }

    fn simpson_tail(s: f64) -> f64 {
        let upper = s + 40.0;
        let n = 200_000;
        let h = (upper - s) / n as f64;
        let f = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mut acc = f(s) + f(upper);
        for i in 1..n {
            acc += f(s + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        acc * h / 3.0
    }

    #[test]
    fn gaussian_tail_examples() {
        assert_eq!(gaussian_tail(0.0).unwrap(), 0.5);
        let q3 = gaussian_tail(3.0).unwrap();
        assert!((q3 - simpson_tail(3.0)).abs() < 1e-12);
        assert!((q3 - 1.3499e-3).abs() < 1e-7);
        let q = gaussian_tail(10.5).unwrap();
        assert!((q / simpson_tail(10.5) - 1.0).abs() < 1e-8);
        assert!((q - 4.3e-26).abs() < 0.1e-26);
        let s = gaussian_tail_inverse(4e-26).unwrap();
        assert!((s - 10.5).abs() < 0.05);
        assert!(gaussian_tail_inverse(0.6).is_err());
        assert!(gaussian_tail_inverse(0.0).is_err());
    }

    #[test]
    fn phase_error_examples() {
        assert_eq!(phase_error_to_distance(0.0).unwrap(), 0.0);
        assert_eq!(phase_error_to_distance(0.5).unwrap(), 1.0);
        assert!((phase_error_to_distance(5e-21).unwrap() - 1e-10).abs() < 1e-22);
    }

    #[test]
    fn phase_error_estimate() {
        let e = PhaseErrorEstimate::new(30, 1000, 300, 10_000, 1e-6).unwrap();
        assert!((e.s - gaussian_tail_inverse(1e-6).unwrap()).abs() < 1e-15);
        assert!((e.p_shift - 270.0 / 9000.0).abs() < 1e-15);
        assert!(e.p_shift_hat > 0.03 && e.p_shift_hat <= 1.0);
        assert!(e.covers());
        assert!(PhaseErrorEstimate::new(5, 10, 3, 100, 0.1).is_err());
    }

    #[test]
    fn table1_examples() {
        let t = build_table1(1e-10, 10_000).unwrap();
        assert!((t.present_qkd.log10() + 3.33).abs() < 0.01);
        assert!((t.requirement.log10() + 3010.3).abs() < 0.01);
        let t = build_table1(0.0, 20).unwrap();
        assert_eq!(t.present_qkd, t.requirement);
        let t = build_table1(1e-30, 256).unwrap();
        assert!((t.present_qkd.log10() + 10.0).abs() < 1e-12);
        assert!((t.requirement.log10() + 77.06).abs() < 0.01);
        assert!(t.to_csv().starts_with("row,present_qkd_log10"));
    }

    #[test]
    fn rendering() {
        assert_eq!(LogProb::from_prob(0.35).render(), "3.500e-1");
        assert_eq!(shannon_requirement(10_000).render(), "5.012e-3011");
        assert_eq!(LogProb::from_prob(9.99999e-5).render(), "1.000e-4");
        assert_eq!(LogProb::ZERO.render(), "0");
    }
}
