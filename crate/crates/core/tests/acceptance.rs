//! Acceptance suite: one `[PASS]`/`[FAIL]` line per criterion.
//!
//! Runs as a plain binary so every line is printed; exits nonzero if any
//! criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use rand::seq::SliceRandom;
use tpuzzle_core::diagnostics::{hardness_experiment, single_block_scan, HardnessConfig, SingleBlockConfig};
use tpuzzle_core::landscape::{
    classify, concentration_experiment, gap_delta, heatmap_experiment, instance_seed, is_unimodal, puzzle_map, shells,
    shell_means, sliding_step, ConcentrationConfig, HeatmapConfig,
};
use tpuzzle_core::optimizer::robustness::{robustness_experiment, RobustnessConfig};
use tpuzzle_core::optimizer::scaling::{scaling_experiment, Method, ScalingConfig};
use tpuzzle_core::optimizer::{hill_climb, HillClimbOptions};
use tpuzzle_core::qsvt::{build_commuting_basis, fit_qsp_phases, verify_cayley_equivalence, VerifyOptions};
use tpuzzle_core::rng::stream;
use tpuzzle_core::{build_rotation_instance, Bitstring, InstanceParams, LossKind, Result, RotationParams};

const SEED: u64 = 2024;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome { pass, detail: detail.into() })
}

fn convergence(n: usize, loss: LossKind) -> Result<Outcome> {
    let mut cfg = ScalingConfig::new(vec![n], Method::Hill);
    cfg.instances = 20;
    cfg.runs_per_instance = 3;
    cfg.loss = loss;
    cfg.seed = SEED;
    let (records, _) = scaling_experiment(&cfg)?;
    let ok = records.iter().filter(|r| r.success && r.final_loss < 1e-10 && r.sweeps <= n).count();
    let worst = records.iter().map(|r| r.sweeps).max().unwrap_or(0);
    outcome(ok == records.len(), format!("{ok}/{} runs converged, max sweeps {worst} (D={n})", records.len()))
}

fn c1() -> Result<Outcome> {
    let t0 = Instant::now();
    let mut o = convergence(8, LossKind::Fidelity)?;
    o.detail.push_str(&format!(", {:.1}s", t0.elapsed().as_secs_f64()));
    Ok(o)
}

fn c2() -> Result<Outcome> {
    let mut cfg = ScalingConfig::new(vec![4, 6, 8, 10], Method::Hill);
    cfg.seed = SEED;
    let (_, rows) = scaling_experiment(&cfg)?;
    let mut pass = true;
    let mut parts = Vec::new();
    for r in &rows {
        let rel = r.f_evals.mean / r.reference - 1.0;
        pass &= rel.abs() <= 0.30;
        parts.push(format!("n={} mean {:.2} vs {:.2} ({:+.1}%)", r.n, r.f_evals.mean, r.reference, 100.0 * rel));
    }
    outcome(pass, parts.join("; "))
}

fn c3() -> Result<Outcome> {
    let mut cfg = ScalingConfig::new(vec![6, 8, 10], Method::Random);
    cfg.instances = 10;
    cfg.runs_per_instance = 20;
    cfg.seed = SEED;
    let (_, rows) = scaling_experiment(&cfg)?;
    let mut pass = true;
    let mut parts = Vec::new();
    for r in &rows {
        let rel = r.f_evals.mean / r.reference - 1.0;
        pass &= rel.abs() <= 0.15 && r.f_evals.count >= 200;
        parts.push(format!("D={} mean {:.1} vs {:.1} ({:+.1}%, {} trials)", r.n, r.f_evals.mean, r.reference, 100.0 * rel, r.f_evals.count));
    }
    outcome(pass, parts.join("; "))
}

fn heatmap(betas: Vec<f64>) -> Result<Vec<tpuzzle_core::landscape::HeatmapRow>> {
    heatmap_experiment(&HeatmapConfig { n: 6, d: 6, betas, instances: 6, k_factor: 4, seed: SEED, loss: LossKind::Fidelity })
}

fn c4() -> Result<Outcome> {
    let rows = heatmap(vec![0.005, 0.01, 0.25])?;
    let at = |b: f64| rows.iter().find(|r| r.beta == b).unwrap().non_unimodal;
    outcome(
        at(0.25) == 0.0,
        format!("non-unimodal fraction {:.3} at beta=0.25; reported: {:.3} at 0.005, {:.3} at 0.01", at(0.25), at(0.005), at(0.01)),
    )
}

fn c5() -> Result<Outcome> {
    let rows = heatmap(vec![0.05, 0.2, 0.6])?;
    let pass = rows.iter().all(|r| r.non_separable == 1.0 && r.non_monotonic == 1.0);
    let parts: Vec<String> = rows
        .iter()
        .map(|r| format!("beta={} non-separable {:.2} non-monotonic {:.2}", r.beta, r.non_separable, r.non_monotonic))
        .collect();
    outcome(pass, parts.join("; "))
}

fn robustness(sizes: Vec<usize>, loss: LossKind) -> Result<Outcome> {
    let mut cfg = RobustnessConfig::new(sizes.clone(), vec![0.02, 0.1]);
    cfg.loss = loss;
    cfg.seed = SEED;
    let (_, rows) = robustness_experiment(&cfg)?;
    let rate = |n: usize, s: f64| rows.iter().find(|r| r.n == n && r.sigma == s).unwrap().success_rate;
    let mut pass = true;
    let mut parts = Vec::new();
    for &n in &sizes {
        let (lo, hi) = (rate(n, 0.02), rate(n, 0.1));
        pass &= lo == 1.0 && hi < lo;
        parts.push(format!("n={n} success {lo:.2} at sigma=0.02, {hi:.2} at sigma=0.1"));
    }
    outcome(pass, parts.join("; "))
}

fn c6() -> Result<Outcome> {
    robustness(vec![6, 8], LossKind::Fidelity)
}

fn c7() -> Result<Outcome> {
    let cfg = ConcentrationConfig { sizes: vec![6, 8, 10], beta: 0.2, instances: 10, k_factor: 4, seed: SEED, loss: LossKind::Fidelity };
    let (_, rows) = concentration_experiment(&cfg)?;
    let ds: Vec<f64> = rows.iter().map(|r| r.delta_s.mean).collect();
    let gaps: Vec<f64> = rows.iter().map(|r| r.delta_gap.mean).collect();
    let ratio = ds.iter().cloned().fold(f64::MIN, f64::max) / ds.iter().cloned().fold(f64::MAX, f64::min);
    let decreasing = gaps.windows(2).all(|w| w[1] < w[0]);
    outcome(ratio <= 2.0 && decreasing, format!("Delta_S means {ds:.4?} (max/min {ratio:.3}); delta means [{}]", gaps.iter().map(|g| format!("{g:.3e}")).collect::<Vec<_>>().join(", ")))
}

fn c8() -> Result<Outcome> {
    let cfg = HardnessConfig { sizes: vec![4, 6, 8], beta: 0.2, instances: 5, k_factor: 4, seed: SEED, magic_samples: 0 };
    let (_, rows) = hardness_experiment(&cfg)?;
    let purity: Vec<f64> = rows.iter().map(|r| r.purity_excess.mean).collect();
    let magic: Vec<f64> = rows.iter().map(|r| r.magic.mean).collect();
    let pass = purity.windows(2).all(|w| w[1] < w[0]) && magic.windows(2).all(|w| w[1] > w[0]);
    outcome(pass, format!("purity excess {purity:.4?}; stabilizer norm {magic:.3?}"))
}

fn c9() -> Result<Outcome> {
    let betas: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
    let cfg = SingleBlockConfig { n: 8, k: 4 * 64, betas, instances: 20, seed: SEED, renyi_profile: false, clifford_samples: 0, clifford_depth: 5 };
    let rows = single_block_scan(&cfg)?;
    let mad = rows.iter().map(|r| (r.loss.mean - r.reference).abs()).sum::<f64>() / rows.len() as f64;
    let worst = rows.iter().map(|r| (r.loss.mean - r.reference).abs()).fold(0.0, f64::max);
    outcome(mad <= 0.1, format!("mean |l - closed form| = {mad:.4} over {} beta points (max {worst:.4})", rows.len()))
}

fn c10a() -> Result<Outcome> {
    let basis = build_commuting_basis(2, 2, &mut stream(SEED, &[0xB5]))?;
    let v = verify_cayley_equivalence(&basis, 0.5, 4, VerifyOptions::default())?;
    outcome(v.deviation <= 1e-4, format!("block deviation {:.3e} (fit error {:.3e})", v.deviation, v.fit_error))
}

fn c10b() -> Result<Outcome> {
    let p = fit_qsp_phases(0.75, 4, 2001)?;
    outcome(p.fit_error <= 1e-5, format!("fit error {:.3e} at beta=0.75, d=4 (tolerance 1e-5)", p.fit_error))
}

fn c11() -> Result<Outcome> {
    let mut ok = 0;
    let mut sweeps = Vec::new();
    for i in 0..10 {
        let p = RotationParams { rows: 4, cols: 4, d: 8, sigma_rot1: 0.25, sigma_rot2: 0.4, l_v: 2, cz_enabled: true, seed: instance_seed(SEED, 16, i) };
        let inst = build_rotation_instance(&p)?;
        let puzzle = inst.compile()?;
        let mut ev = puzzle.evaluator(LossKind::Fidelity);
        let mut t = hill_climb(|s| ev.loss(s), &Bitstring::zeros(8), HillClimbOptions::default())?;
        if t.judge(&inst.s_star()) && t.sweep_count() <= 8 {
            ok += 1;
        }
        sweeps.push(t.sweep_count());
    }
    outcome(ok >= 9, format!("{ok}/10 instances reached 1...1 within D sweeps; sweeps {sweeps:?}"))
}

fn c12() -> Result<Outcome> {
    let a = convergence(6, LossKind::Parity)?;
    let b = robustness(vec![6], LossKind::Parity)?;
    outcome(a.pass && b.pass, format!("convergence: {}; noise: {}", a.detail, b.detail))
}

/// Cross-module checks on real puzzle maps: unimodal maps are solved from
/// every start, and both telescoping identities hold.
fn c13() -> Result<Outcome> {
    let mut unimodal = 0;
    let mut worst_tele: f64 = 0.0;
    let mut failures = 0;
    for (b, beta) in [0.05, 0.2, 0.6].into_iter().enumerate() {
        for i in 0..4 {
            let n = 3 + 3 * (i % 2);
            let params = InstanceParams::square(n, beta, instance_seed(SEED, n, 10 * b + i));
            let (map, s_star) = puzzle_map(&params, LossKind::Fidelity)?;
            let m = shell_means(&map, &s_star);
            worst_tele = worst_tele.max((sliding_step(&map, &s_star) - (m[n] - m[0]) / n as f64).abs());
            let mut mid = shells(&map, &s_star).swap_remove(n.div_ceil(2));
            mid.shuffle(&mut stream(SEED, &[b as u64, i as u64]));
            let (lo, hi) = mid.iter().fold((f64::MAX, f64::MIN), |a, &v| (a.0.min(v), a.1.max(v)));
            worst_tele = worst_tele.max((gap_delta(&map, &s_star)? - (hi - lo) / (mid.len() - 1) as f64).abs());
            if is_unimodal(&map) {
                unimodal += 1;
                let target = classify(&map, &s_star).argmin;
                for x in 0..1u64 << n {
                    let t = hill_climb(|s| Ok(map.get(s)), &Bitstring::from_index(n, x), HillClimbOptions::default())?;
                    if t.final_string() != &target || t.sweep_count() > n + 1 {
                        failures += 1;
                    }
                }
            }
        }
    }
    outcome(
        failures == 0 && worst_tele <= 1e-12,
        format!("{unimodal} unimodal maps, {failures} failed starts; telescoping residual {worst_tele:.1e}; module properties run in the proptest targets"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, &str, fn() -> Result<Outcome>); 14] = [
        ("1", "convergence n=D=8", c1),
        ("2", "adaptive scaling", c2),
        ("3", "non-adaptive scaling", c3),
        ("4", "unimodality", c4),
        ("5", "non-separability and non-monotonicity", c5),
        ("6", "noise robustness", c6),
        ("7", "concentration statistics", c7),
        ("8", "hardness", c8),
        ("9", "single-block loss", c9),
        ("10a", "QSVT block equivalence", c10a),
        ("10b", "QSP fit error", c10b),
        ("11", "large-scale rotation analog", c11),
        ("12", "parity-loss variant", c12),
        ("13", "cross-module properties", c13),
    ];
    let mut failed = 0;
    for (id, name, run) in criteria {
        let t0 = Instant::now();
        let (pass, detail) = match run() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!("[{}] {id} {name}: {detail} [{:.1}s]", if pass { "PASS" } else { "FAIL" }, t0.elapsed().as_secs_f64());
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
