//! One runner per subcommand: read parameters, compute, fill a [`Report`].

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use qkd_audit_core::bounds::{
    abort_adjust, avg_guess_bound, brute_force_count, build_table1, gaussian_tail, gaussian_tail_inverse,
    individual_guess_bound, phase_error_to_distance, shannon_requirement,
};
use qkd_audit_core::coherent::{masked_channel_report, mary_masking_error, ChannelRow, CoherentSignal, Constellation};
use qkd_audit_core::coupling::{interpretation_counterexample, maximal_coupling, mismatch_probability, nonuniformity_witness, NonuniformityWitness};
use qkd_audit_core::metrics::{
    guessing_probability, holevo_chi, smooth_min_entropy, trace_distance, variational_distance, ClassicalDistribution,
    JointDistribution, Method,
};
use qkd_audit_core::qkdsim::{evaluate_security, run_bb84, AttackKind, AttackModel, EcMode, ProtocolConfig};
use qkd_audit_core::qstate::{cq_assemble, DEFAULT_DIM_CAP};
use qkd_audit_core::{sample, Error};

use crate::error::CliError;
use crate::report::{log_count, log_prob, quantity, real, reals, Report};
use crate::scenario::Params;

const CLASSICAL_EVE: &str =
    "eavesdropper record is classical (measurement outcomes and public parities); quantum-memory attacks are out of scope";
const ILLUSTRATIVE: &str = "protocol parameters are an illustrative desk-scale instance, not a deployed configuration";

fn witness_json(w: &NonuniformityWitness) -> Value {
    json!({
        "delta_to_uniform": real(w.delta_to_uniform),
        "excess_ratio": quantity(w.excess_ratio),
        "key_index": w.key_index,
        "probability": quantity(w.probability),
    })
}

pub fn metrics(p: &mut Params) -> Result<Report, CliError> {
    let mut r = Report::new("metrics");
    let model = p.choice("model", &["random_cq", "joint"])?;
    r.config("model", model);
    match model {
        "random_cq" => {
            let key_bits: u32 = p.required("key_bits")?;
            let eve_dim: usize = p.required("eve_dim")?;
            let uniform_keys: bool = p.optional("uniform_keys", true)?;
            let seed: u64 = p.optional("rng_seed", 0)?;
            if key_bits == 0 || eve_dim == 0 {
                return Err(CliError::Schema { key: "key_bits".into(), reason: "key_bits and eve_dim must be positive".into() });
            }
            let requested = 1usize.checked_shl(key_bits).and_then(|k| k.checked_mul(eve_dim)).unwrap_or(usize::MAX);
            if key_bits > 12 || requested > DEFAULT_DIM_CAP {
                return Err(Error::DimensionOverflow { requested, cap: DEFAULT_DIM_CAP }.into());
            }
            r.config("key_bits", key_bits);
            r.config("eve_dim", eve_dim);
            r.config("uniform_keys", uniform_keys);
            r.config("rng_seed", seed);

            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let cq = if uniform_keys {
                sample::random_uniform_cq_state(&mut rng, key_bits, eve_dim)
            } else {
                sample::random_cq_state(&mut rng, key_bits, eve_dim)
            };
            let rho = cq_assemble(&cq)?;
            let d = trace_distance(&rho, &cq.ideal_state()?)?;
            let decoupled = trace_distance(&rho, &cq.decoupled_state()?)?;
            let chi = holevo_chi(&cq);
            let guess = guessing_probability(&cq)?;
            let uniform = 1.0 / cq.key_count() as f64;
            r.result("trace_distance", json!({ "linear": real(d.value), "log2": real(d.log2_value), "method": d.method.label() }));
            r.result("decoupled_distance", json!({ "linear": real(decoupled.value), "log2": real(decoupled.log2_value), "method": decoupled.method.label() }));
            r.result("holevo_chi", quantity(chi));
            r.result(
                "guessing_probability",
                json!({
                    "linear": real(guess.value),
                    "log2": real(guess.log2_value),
                    "method": guess.method.label(),
                    "upper_bound": guess.upper_bound.map(quantity),
                }),
            );
            r.result("key_marginal", reals(&cq.key_marginal()));
            r.result("holevo_bound_decoupled", json!({ "holds": 2.0 * decoupled.value.powi(2) <= chi + 1e-9, "two_d_squared": real(2.0 * decoupled.value.powi(2)) }));
            r.result("holevo_bound_ideal", json!({ "holds": 2.0 * d.value.powi(2) <= chi + 1e-9, "two_d_squared": real(2.0 * d.value.powi(2)) }));
            let residual = uniform + d.value - guess.value;
            r.result(
                "guess_bound",
                json!({ "bound": quantity(uniform + d.value), "exact_method": guess.method != Method::PgmBound, "residual": real(residual) }),
            );
            if !uniform_keys {
                r.notes.push("with a non-uniform key prior the Holevo bound applies to the decoupled distance only");
            }
        }
        _ => {
            let keys: usize = p.required("keys")?;
            let outcomes: usize = p.optional("outcomes", 1)?;
            let probs: Vec<f64> = p.list("probs")?;
            let eps: Vec<f64> = p.optional_list("smoothing_eps")?.unwrap_or_default();
            r.config("keys", keys);
            r.config("outcomes", outcomes);
            r.config("probs", reals(&probs));
            r.config("smoothing_eps", reals(&eps));
            let joint = JointDistribution::new(keys, outcomes, probs)?;
            r.result("guessing_probability", quantity(joint.guessing_probability()));
            r.result("min_entropy", real(joint.min_entropy()));
            r.result("distance_to_ideal", quantity(joint.distance_to_ideal()));
            r.result("mutual_information", quantity(joint.mutual_information()));
            r.result("holevo_chi", quantity(joint.holevo_chi()));
            r.result("key_marginal", reals(joint.key_marginal().probs()));
            let smoothing = eps
                .iter()
                .map(|&e| Ok(json!({ "eps": real(e), "smooth_min_entropy": real(smooth_min_entropy(&joint, e)?) })))
                .collect::<Result<Vec<_>, CliError>>()?;
            r.result("smoothing", smoothing);
        }
    }
    Ok(r)
}

pub fn coupling(p: &mut Params) -> Result<Report, CliError> {
    let mut r = Report::new("coupling");
    let model = p.choice("model", &["pair", "counterexample"])?;
    r.config("model", model);
    match model {
        "pair" => {
            let pp: Vec<f64> = p.list("p")?;
            let qq: Vec<f64> = p.list("q")?;
            r.config("p", reals(&pp));
            r.config("q", reals(&qq));
            let (pd, qd) = (ClassicalDistribution::new(pp)?, ClassicalDistribution::new(qq)?);
            let delta = variational_distance(&pd, &qd)?;
            let c = maximal_coupling(&pd, &qd)?;
            let max_err = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            r.result("variational_distance", quantity(delta));
            r.result("mismatch_probability", quantity(mismatch_probability(&c)));
            r.result("row_marginal_error", real(max_err(&c.row_marginal(), pd.probs())));
            r.result("column_marginal_error", real(max_err(&c.column_marginal(), qd.probs())));
            let rows: Vec<Value> = (0..c.n()).map(|x| reals(&(0..c.n()).map(|y| c.get(x, y)).collect::<Vec<_>>())).collect();
            r.result("coupling", rows);
            if pd.len().is_power_of_two() {
                r.result("witness_p", witness_json(&nonuniformity_witness(&pd)?));
            }
        }
        _ => {
            let key_bits: u32 = p.required("key_bits")?;
            let eps: f64 = p.required("eps")?;
            r.config("key_bits", key_bits);
            r.config("eps", real(eps));
            let (dist, w) = interpretation_counterexample(key_bits, eps)?;
            let uniform = 1.0 / dist.len() as f64;
            let least = dist.probs().iter().copied().fold(1.0, f64::min);
            r.result("witness", witness_json(&w));
            r.result("max_probability", quantity(w.probability));
            r.result("min_probability", quantity(least));
            r.result("uniform_probability", quantity(uniform));
            r.result("delta_error", real((w.delta_to_uniform - eps).abs()));
            r.notes.push("product-bias keys: every key deviates from uniform while the distance stays eps");
        }
    }
    Ok(r)
}

pub fn bounds(p: &mut Params) -> Result<Report, CliError> {
    let mut r = Report::new("bounds");
    let eps: f64 = p.required("eps")?;
    let key_bits: u64 = p.required("key_bits")?;
    let eps_hs: Option<f64> = p.optional_opt("eps_hs")?;
    let p_phase: Option<f64> = p.optional_opt("p_phase")?;
    let p_abort: Option<f64> = p.optional_opt("p_abort")?;
    r.config("eps", real(eps));
    r.config("key_bits", key_bits);
    r.config("eps_hs", eps_hs.map(real));
    r.config("p_phase", p_phase.map(real));
    r.config("p_abort", p_abort.map(real));
    if key_bits == 0 {
        return Err(CliError::Schema { key: "key_bits".into(), reason: "must be at least 1".into() });
    }
    r.result("shannon_requirement", log_prob(shannon_requirement(key_bits)));
    r.result("brute_force_count", log_count(brute_force_count(key_bits)));
    r.result("avg_guess_bound", log_prob(avg_guess_bound(eps, key_bits)?));
    r.result("individual_guess_bound", log_prob(individual_guess_bound(eps, key_bits)?));
    if let Some(e) = eps_hs {
        let s = gaussian_tail_inverse(e)?;
        r.result("gaussian_tail_inverse", json!({ "eps": quantity(e), "s": real(s), "tail_at_s": quantity(gaussian_tail(s)?) }));
    }
    if let Some(pp) = p_phase {
        r.result("phase_error_distance", quantity(phase_error_to_distance(pp)?));
    }
    if let Some(pa) = p_abort {
        r.result("abort_adjusted_distance", quantity(abort_adjust(eps, pa)?));
    }
    Ok(r)
}

pub fn table1(p: &mut Params) -> Result<Report, CliError> {
    let mut r = Report::new("table1");
    let eps: f64 = p.required("eps")?;
    let key_bits: u64 = p.required("key_bits")?;
    r.config("eps", real(eps));
    r.config("key_bits", key_bits);
    if key_bits == 0 {
        return Err(CliError::Schema { key: "key_bits".into(), reason: "must be at least 1".into() });
    }
    let t = build_table1(eps, key_bits)?;
    r.result("present_qkd", log_prob(t.present_qkd));
    r.result("requirement", log_prob(t.requirement));
    r.result("gap_log10", real(t.present_qkd.log10() - t.requirement.log10()));
    r.csv = Some(t.to_csv());
    Ok(r)
}

pub fn bb84(p: &mut Params) -> Result<Report, CliError> {
    let mut r = Report::new("bb84");
    let raw_bits: usize = p.required("raw_bits")?;
    let key_bits: usize = p.required("key_bits")?;
    let sample_fraction: f64 = p.optional("sample_fraction", 0.0)?;
    let ec = p.choice("ec_mode", &["none", "parity_reveal"])?;
    let parity_bits: usize = if ec == "parity_reveal" { p.required("parity_bits")? } else { 0 };
    let pa_seed: u64 = p.required("pa_seed")?;
    let rng_seed: u64 = p.optional("rng_seed", 0)?;
    let attack = p.choice("attack", &["none", "intercept_resend", "classical_copy"])?;
    let fraction: f64 = if attack == "none" { p.optional("attack_fraction", 0.0)? } else { p.required("attack_fraction")? };
    for (k, v) in [("raw_bits", json!(raw_bits)), ("key_bits", json!(key_bits)), ("sample_fraction", real(sample_fraction))] {
        r.config(k, v);
    }
    r.config("ec_mode", ec);
    r.config("parity_bits", parity_bits);
    r.config("pa_seed", pa_seed);
    r.config("rng_seed", rng_seed);
    r.config("attack", attack);
    r.config("attack_fraction", real(fraction));

    let config = ProtocolConfig {
        sample_fraction,
        ec_mode: if ec == "none" { EcMode::None } else { EcMode::ParityReveal { parity_bits } },
        ..ProtocolConfig::with_seeded_hash(raw_bits, key_bits, pa_seed, rng_seed)
    };
    let kind = match attack {
        "none" => AttackKind::None,
        "intercept_resend" => AttackKind::InterceptResend,
        _ => AttackKind::ClassicalCopy,
    };
    let run = run_bb84(&config, &AttackModel { kind, fraction })?;
    let s = evaluate_security(&run);
    r.result(
        "layout",
        json!({
            "key_positions": run.layout.key_positions,
            "sample_positions": run.layout.sample,
            "sifted_positions": run.layout.sifted,
            "toeplitz_rank": run.toeplitz_rank,
            "leaked_parity_blocks": run.leaked_parities,
        }),
    );
    r.result("trace_distance", quantity(s.trace_distance));
    r.result("guessing_probability", quantity(s.guessing_probability));
    r.result("uniform_guess", quantity(s.uniform_guess));
    r.result("guess_upper_bound", quantity(s.guess_upper_bound));
    r.result("guess_bound_residual", real(s.guess_bound_residual));
    r.result("holevo_chi", quantity(s.holevo_chi));
    r.result("mutual_information", quantity(s.mutual_information));
    r.result("key_delta_to_uniform", quantity(s.key_delta_to_uniform));
    r.result("witness", witness_json(&s.witness));
    r.result("key_min_entropy", real(s.key_min_entropy));
    r.result("sifted_min_entropy", real(s.sifted_min_entropy));
    r.result("leftover_hash_bound", quantity(s.leftover_hash_bound));
    r.result("abort", s.abort);
    r.result("abort_probability", quantity(s.abort_probability));
    r.result("qber_estimate", real(s.qber_estimate));
    r.result("sifted_error_rate", real(run.sifted_error_rate));
    r.result("lemma1_holds", s.lemma1_holds());
    r.result("eve_outcomes", run.joint.outcomes());
    r.notes.push(CLASSICAL_EVE);
    r.notes.push(ILLUSTRATIVE);
    Ok(r)
}

fn channel_json(row: &ChannelRow) -> Value {
    json!({
        "channel": row.channel,
        "error_probability": quantity(row.error_probability),
        "feature": row.feature,
        "method": row.method,
    })
}

fn parse_amplitude(item: &str) -> Option<Complex64> {
    let (re, im) = item.split_once(':').unwrap_or((item, "0"));
    Some(Complex64::new(re.trim().parse().ok()?, im.trim().parse().ok()?))
}

pub fn coherent(p: &mut Params) -> Result<Report, CliError> {
    let mut r = Report::new("coherent");
    let shape = p.choice("constellation", &["psk", "custom"])?;
    let bob_key_known: bool = p.optional("bob_key_known", true)?;
    r.config("constellation", shape);
    r.config("bob_key_known", bob_key_known);
    let c = match shape {
        "psk" => {
            let m: usize = p.required("m")?;
            let n: f64 = p.required("mean_photon_number")?;
            r.config("m", m);
            r.config("mean_photon_number", real(n));
            Constellation::phase_shift_keyed(m, n)?
        }
        _ => {
            let items: Vec<String> = p.list("amplitudes")?;
            let amps = items
                .iter()
                .map(|s| parse_amplitude(s).ok_or_else(|| CliError::Schema { key: "amplitudes".into(), reason: format!("cannot parse '{s}' as re:im") }))
                .collect::<Result<Vec<_>, _>>()?;
            let priors: Option<Vec<f64>> = p.optional_list("priors")?;
            r.config("amplitudes", amps.iter().map(|a| json!([real(a.re), real(a.im)])).collect::<Vec<_>>());
            r.config("priors", priors.as_deref().map(reals));
            let signals = amps.into_iter().map(CoherentSignal::new).collect::<Result<Vec<_>, _>>()?;
            match priors {
                Some(pr) => Constellation::new(signals, ClassicalDistribution::new(pr)?)?,
                None => Constellation::uniform(signals)?,
            }
        }
    };
    let e = mary_masking_error(&c)?;
    r.result("masking_error", json!({ "linear": real(e.value), "log2": real(e.value.log2()), "method": e.method.label() }));
    r.result("prior_guess_error", quantity(1.0 - c.priors().argmax().1));
    r.result("diameter", real(c.diameter()));
    r.result("symmetric", c.is_symmetric());
    let report = masked_channel_report(&c, bob_key_known)?;
    r.result("channels", vec![channel_json(&report.bob), channel_json(&report.eve)]);
    Ok(r)
}
