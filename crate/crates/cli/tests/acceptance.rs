//! Acceptance suite: one PASS/FAIL line per criterion, each with a pinned
//! tolerance and a runtime budget. Run with `--nocapture` to see the lines.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qkd_audit_core::bounds::{
    extremal_distribution, gaussian_tail_inverse, individual_guess_bound, phase_error_to_distance, shannon_requirement,
};
use qkd_audit_core::coherent::{helstrom_binary, mary_masking_error, overlap, CoherentSignal, Constellation};
use qkd_audit_core::coupling::{maximal_coupling, mismatch_probability, Coupling};
use qkd_audit_core::metrics::{guessing_probability, holevo_chi, trace_distance, variational_distance, ClassicalDistribution};
use qkd_audit_core::qkdsim::{
    evaluate_security, run_bb84, sift, verify_perfect_secrecy, AttackModel, EcMode, ProtocolConfig, ToeplitzHash,
};
use qkd_audit_core::qstate::cq_assemble;
use qkd_audit_core::sample;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn table1_reproduction() -> Outcome {
    let present = individual_guess_bound(1e-10, 10_000).unwrap();
    let requirement = shannon_requirement(10_000);
    let pass = (present.log10() - -3.33).abs() <= 0.01
        && requirement.log2() == -10_000.0
        && (requirement.log10() - -3010.3).abs() <= 0.01;
    check(pass, format!("present 10^{:.4}, requirement 2^{} = 10^{:.4}", present.log10(), requirement.log2(), requirement.log10()))
}

fn gaussian_tail_consistency() -> Outcome {
    let s = gaussian_tail_inverse(4e-26).unwrap();
    check((10.45..=10.55).contains(&s), format!("s(4e-26) = {s:.6}"))
}

fn phase_error_bound() -> Outcome {
    let d = phase_error_to_distance(5e-21).unwrap();
    check(((d - 1e-10) / 1e-10).abs() <= 0.01, format!("d = {d:e}"))
}

fn guessing_bound_tightness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..200 {
        let l: u32 = rng.random_range(1..=12);
        let u = 0.5f64.powi(l as i32);
        let eps = rng.random::<f64>() * (1.0 - u);
        let p = extremal_distribution(eps, l).unwrap();
        let delta = variational_distance(&p, &ClassicalDistribution::uniform(1 << l)).unwrap();
        let peak = p.argmax().1;
        let g = guessing_probability(&p.to_cq_state().unwrap()).unwrap().value;
        worst.0 = worst.0.max((delta - eps).abs());
        worst.1 = worst.1.max((peak - (eps + u)).abs());
        worst.2 = worst.2.max((g - (eps + u)).abs());
    }
    let pass = worst.0 <= 1e-12 && worst.1 <= 1e-12 && worst.2 <= 1e-9;
    check(pass, format!("max |delta - eps| {:e}, max |P_max - eps - 2^-l| {:e}, max guess error {:e}", worst.0, worst.1, worst.2))
}

fn coupling_lemma() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut marginal_err, mut attain_err, mut worst_slack) = (0.0f64, 0.0f64, f64::INFINITY);
    for _ in 0..1000 {
        let n = rng.random_range(1..=64);
        let p = sample::random_distribution(&mut rng, n);
        let q = if rng.random() { sample::random_sparse_distribution(&mut rng, n) } else { sample::random_distribution(&mut rng, n) };
        let delta = variational_distance(&p, &q).unwrap();
        let c = maximal_coupling(&p, &q).unwrap();
        for (x, y) in c.row_marginal().iter().zip(p.probs()).chain(c.column_marginal().iter().zip(q.probs())) {
            marginal_err = marginal_err.max((x - y).abs());
        }
        attain_err = attain_err.max((mismatch_probability(&c) - delta).abs());

        let mut rows: Vec<usize> = (0..n).collect();
        let mut cols = rows.clone();
        rows.shuffle(&mut rng);
        cols.shuffle(&mut rng);
        let plan = Coupling::transport_plan(&p, &q, &rows, &cols).unwrap();
        let alternative = plan.mix(&Coupling::product(&p, &q).unwrap(), rng.random()).unwrap();
        worst_slack = worst_slack.min(mismatch_probability(&alternative) - delta);
    }
    let pass = marginal_err <= 1e-12 && attain_err <= 1e-12 && worst_slack >= -1e-12;
    check(pass, format!("marginal error {marginal_err:e}, |mismatch - delta| {attain_err:e}, min alternative slack {worst_slack:e}"))
}

fn holevo_property_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut worst_ideal, mut worst_decoupled) = (f64::INFINITY, f64::INFINITY);
    for i in 0..1000 {
        let l = 1 + (i % 3) as u32;
        let de = 1 + (i / 3) % 4;
        // uniform key register, distance to rho_U (x) rho_E
        let cq = sample::random_uniform_cq_state(&mut rng, l, de);
        let d = trace_distance(&cq_assemble(&cq).unwrap(), &cq.ideal_state().unwrap()).unwrap().value;
        worst_ideal = worst_ideal.min(holevo_chi(&cq) + 1e-9 - 2.0 * d * d);
        // arbitrary prior, distance to rho_K (x) rho_E
        let cq = sample::random_cq_state(&mut rng, l, de);
        let d = trace_distance(&cq_assemble(&cq).unwrap(), &cq.decoupled_state().unwrap()).unwrap().value;
        worst_decoupled = worst_decoupled.min(holevo_chi(&cq) + 1e-9 - 2.0 * d * d);
    }
    check(
        worst_ideal >= 0.0 && worst_decoupled >= 0.0,
        format!("min (chi + 1e-9 - 2d^2): uniform keys {worst_ideal:e}, any prior vs decoupled {worst_decoupled:e}"),
    )
}

fn protocol(raw: usize, l: usize, pa: u64, rng: u64, sample_fraction: f64, ec: EcMode) -> ProtocolConfig {
    ProtocolConfig { sample_fraction, ec_mode: ec, ..ProtocolConfig::with_seeded_hash(raw, l, pa, rng) }
}

fn lemma1_dichotomy() -> Outcome {
    let attacks = [
        AttackModel::NONE,
        AttackModel::intercept_resend(0.1),
        AttackModel::intercept_resend(0.5),
        AttackModel::intercept_resend(1.0),
        AttackModel::classical_copy(0.25),
        AttackModel::classical_copy(1.0),
    ];
    let (mut runs, mut capped, mut short, mut violations, mut positive) = (0, 0, 0, 0, 0);
    for rng in 0..8u64 {
        for (raw, l) in [(8usize, 2usize), (12, 4), (16, 6), (16, 3)] {
            for ec in [EcMode::None, EcMode::ParityReveal { parity_bits: 2 }] {
                let c = protocol(raw, l, rng * 31 + raw as u64, rng, 0.2, ec);
                for attack in &attacks {
                    match run_bb84(&c, attack) {
                        Ok(run) => {
                            let r = evaluate_security(&run);
                            runs += 1;
                            positive += (r.trace_distance > 1e-6) as usize;
                            violations += (!r.lemma1_holds()) as usize;
                        }
                        Err(e) if e.is_cap() => capped += 1,
                        Err(_) => short += 1,
                    }
                }
            }
        }
    }
    let ideal = (0..1000u64)
        .map(|pa| protocol(12, 4, pa, 1, 0.25, EcMode::None))
        .find(|c| {
            let m = sift(c).unwrap().key_positions.len();
            m >= 4 && ToeplitzHash::new(&c.pa_seed, m, 4).unwrap().rank() == 4
        })
        .unwrap();
    let d0 = evaluate_security(&run_bb84(&ideal, &AttackModel::NONE).unwrap()).trace_distance;
    check(
        violations == 0 && runs > 100 && positive > 0 && d0 <= 1e-9,
        format!("{runs} runs ({positive} with d > 1e-6; skipped {capped} over the cap, {short} with too few sifted bits), {violations} violations; no-attack d = {d0:e}"),
    )
}

fn leftover_hash_bound() -> Outcome {
    let attack = AttackModel::intercept_resend(0.25);
    let rng = 1u64;
    let seeds = 1000;
    let mut runs = Vec::with_capacity(seeds);
    for pa in 0..seeds as u64 {
        let run = run_bb84(&protocol(12, 4, pa, rng, 0.0, EcMode::None), &attack).unwrap();
        runs.push((run.toeplitz_rank, evaluate_security(&run)));
    }
    let mean = runs.iter().map(|(_, r)| r.trace_distance).sum::<f64>() / seeds as f64;
    let bound = runs[0].1.leftover_hash_bound;
    let same_string = runs.iter().all(|(_, r)| r.leftover_hash_bound == bound);
    // Markov over seeds: at most a (mean d)^(2/3) fraction may exceed this
    let markov = mean.cbrt() + 1.0 / 16.0;
    let above: Vec<usize> = runs.iter().filter(|(_, r)| r.guessing_probability > markov).map(|(rank, _)| *rank).collect();
    let fraction = above.len() as f64 / seeds as f64;
    check(
        same_string && mean <= bound + 1e-6 && fraction <= mean.powf(2.0 / 3.0) && above.iter().all(|&rank| rank < 4),
        format!(
            "mean d {mean:.6} over {seeds} seeds vs bound {bound:.6}; {} seeds above (mean d)^(1/3) + 2^-4 (hash ranks {above:?}, Markov allows {:.3})",
            above.len(),
            mean.powf(2.0 / 3.0)
        ),
    )
}

/// Helstrom error from the 2x2 Gram representation `|0> = (1, 0)`,
/// `|1> = (c, sqrt(1 - |c|^2))` and the closed-form eigenvalues of `p0 P0 - p1 P1`.
fn gram_oracle(c: Complex64, p0: f64, p1: f64) -> f64 {
    let s = (1.0 - c.norm_sqr()).max(0.0).sqrt();
    let (a, b, d) = (p0 - p1 * c.norm_sqr(), -p1 * c * s, -p1 * s * s);
    let tr = a + d;
    let det = a * d - b.norm_sqr();
    let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
    let norm = ((tr + disc) / 2.0).abs() + ((tr - disc) / 2.0).abs();
    0.5 * (1.0 - norm)
}

fn helstrom_values() -> Outcome {
    let a = CoherentSignal::real(0.0).unwrap();
    let b = CoherentSignal::real(1.0).unwrap();
    let e = helstrom_binary(&a, &b, (0.5, 0.5)).unwrap();
    let c = Complex64::new((-0.5f64).exp(), 0.0);
    let oracle = gram_oracle(c, 0.5, 0.5);
    let same = helstrom_binary(&a, &a, (0.5, 0.5)).unwrap();
    let closed = 0.5 * (1.0 - (1.0 - (-1f64).exp()).sqrt());
    let pass = (e - oracle).abs() <= 1e-5 && (e - closed).abs() <= 1e-12 && same == 0.5 && (overlap(&a, &b) - (-1f64).exp()).abs() < 1e-15;
    check(pass, format!("|delta|^2 = 1: {e:.7} (oracle {oracle:.7}, closed form {closed:.7}); delta = 0: {same}"))
}

fn masking_asymptote() -> Outcome {
    let mut last = (f64::INFINITY, 0.0f64);
    let mut monotone = true;
    let mut n = 1.0f64;
    while n >= 1e-6 * (1.0 - 1e-12) {
        let c = Constellation::phase_shift_keyed(4, n).unwrap();
        let e = mary_masking_error(&c).unwrap().value;
        monotone &= c.diameter() < last.0 && e >= last.1;
        last = (c.diameter(), e);
        n /= 10f64.sqrt();
    }
    check(monotone && (last.1 - 0.75).abs() <= 1e-3, format!("monotone sweep {monotone}; P_e at |alpha|^2 = 1e-6: {:.7}", last.1))
}

fn perfect_secrecy_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut uniform_ok, mut worst_uniform, mut weakest_leak) = (true, 0.0f64, f64::INFINITY);
    for m in 1..=8u32 {
        let n = 1usize << m;
        let key = ClassicalDistribution::uniform(n);
        for plain in [ClassicalDistribution::uniform(n), sample::random_distribution(&mut rng, n), sample::random_sparse_distribution(&mut rng, n)] {
            let check = verify_perfect_secrecy(&key, &plain).unwrap();
            uniform_ok &= check.is_perfect;
            worst_uniform = worst_uniform.max(check.max_deviation);
        }
        let skewed = verify_perfect_secrecy(&extremal_distribution(0.1, m).unwrap(), &ClassicalDistribution::uniform(n)).unwrap();
        uniform_ok &= !skewed.is_perfect;
        weakest_leak = weakest_leak.min(skewed.max_deviation);
    }
    check(
        uniform_ok && worst_uniform <= 1e-12 && weakest_leak > 1e-3,
        format!("uniform key max deviation {worst_uniform:e}; extremal key min deviation {weakest_leak:.6}"),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let scenarios = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let mut names: Vec<_> = std::fs::read_dir(&scenarios).unwrap().map(|e| e.unwrap().path()).collect();
    names.sort();
    let (mut identical, mut total) = (0, 0);
    for path in names {
        let stem = path.file_stem().unwrap().to_str().unwrap().to_string();
        let kind = stem.split('_').next().unwrap().to_string();
        let mut outputs = Vec::new();
        for round in 0..2 {
            let out = dir.path().join(format!("{stem}-{round}"));
            let status = Command::new(env!("CARGO_BIN_EXE_qkd-audit"))
                .args([kind.as_str(), "--scenario"])
                .arg(&path)
                .arg("--out")
                .arg(&out)
                .output()
                .unwrap()
                .status;
            let report = std::fs::read(out.join("report.json")).ok();
            let table = std::fs::read(out.join("table.csv")).ok();
            outputs.push((status.code(), report, table));
        }
        total += 1;
        identical += (outputs[0] == outputs[1]) as usize;
    }
    check(identical == total && total >= 10, format!("{identical}/{total} scenarios byte-identical across two runs"))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome, Duration); 12] = [
        ("table 1 reproduction", table1_reproduction, Duration::from_millis(1)),
        ("gaussian-tail consistency", gaussian_tail_consistency, Duration::from_millis(1)),
        ("phase-error bound", phase_error_bound, Duration::from_millis(1)),
        ("guessing-bound tightness", guessing_bound_tightness, Duration::from_secs(5)),
        ("coupling lemma", coupling_lemma, Duration::from_secs(10)),
        ("holevo property suite", holevo_property_suite, Duration::from_secs(30)),
        ("nonuniformity/independence dichotomy", lemma1_dichotomy, Duration::from_secs(60)),
        ("leftover-hash empirical bound", leftover_hash_bound, Duration::from_secs(120)),
        ("helstrom values", helstrom_values, Duration::from_millis(1)),
        ("masking asymptote", masking_asymptote, Duration::from_secs(1)),
        ("perfect-secrecy oracle", perfect_secrecy_oracle, Duration::from_secs(10)),
        ("determinism", determinism, Duration::from_secs(120)),
    ];
    let mut failed = Vec::new();
    for (i, (name, f, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let elapsed = start.elapsed();
        let pass = outcome.pass && elapsed <= *budget;
        println!(
            "[{}] {:>2}. {name}: {} ({:.3?}, budget {:?})",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            outcome.detail,
            elapsed,
            budget
        );
        if !pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
