//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.

use std::time::Instant;

use ortholab::experiments::{
    self, bound_chain, dyadic_schedule, run_boundedness_scan, run_coefficient_criteria, run_decay_check,
    run_sharpness_scan, stabilizes, ScanConfig,
};
use ortholab::functionals::{u_n, u_n_direct};
use ortholab::{sampling, sharpness_ramp, BasisIndex, BvFunction, DSequence, SystemKind, WeightPlan};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const STEERED: [SystemKind; 2] = [SystemKind::Trigonometric, SystemKind::WalshPaley];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn orthonormality() -> Outcome {
    let mut worst: f64 = 0.0;
    for system in SystemKind::ALL {
        for k in BasisIndex::up_to(64) {
            for l in BasisIndex::up_to(64) {
                let target = if k == l { 1.0 } else { 0.0 };
                worst = worst.max((system.inner_product(k, l) - target).abs());
            }
        }
    }
    outcome(worst <= 1e-10, format!("max |G - I| = {worst:.2e} over k, l <= 64, three systems"))
}

fn decomposition_identity() -> Outcome {
    let report = experiments::lemma_check(20240611, 200, 1e-8);
    outcome(
        report.passed(),
        format!(
            "{} cases, {} failures, max |lhs - sum| / (1 + |lhs|) = {:.2e}",
            report.cases, report.failures, report.max_scaled_residual
        ),
    )
}

fn dual_path() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(1..=128);
        let f = sampling::random_function(&mut rng, 8);
        let plan = sampling::random_plan(&mut rng, n);
        let system = sampling::random_system(&mut rng);
        let a = u_n(&f, &plan, system, n).unwrap();
        let b = u_n_direct(&f, &plan, system, n).unwrap();
        worst = worst.max((a - b).abs() / a.abs().max(b.abs()).max(1.0));
    }
    outcome(worst <= 1e-9, format!("100 cases, max relative gap {worst:.2e}"))
}

fn primitive_decay_envelope() -> Outcome {
    let maxima: Vec<f64> = STEERED.iter().map(|&s| run_decay_check(s, 1024).unwrap().max_scaled).collect();
    outcome(
        maxima.iter().all(|&m| m <= 2.0),
        format!("max k sup|Phi_k| (k <= 1024): trig {:.6}, walsh {:.6}, bound 2", maxima[0], maxima[1]),
    )
}

fn primitive_decay_trig_constant() -> Outcome {
    let table = run_decay_check(SystemKind::Trigonometric, 1024).unwrap();
    let worst = table.rows.iter().filter(|r| r.k >= 2).max_by(|a, b| a.scaled.total_cmp(&b.scaled)).unwrap();
    outcome(
        table.max_scaled <= 0.68,
        format!("trig max k sup|Phi_k| = {:.6} at k = {}, bound 0.68", table.max_scaled, worst.k),
    )
}

fn kernel_boundedness() -> Outcome {
    let schedule = dyadic_schedule(4096);
    let mut lines = Vec::new();
    let mut pass = true;
    for system in STEERED {
        let chains: Vec<_> =
            schedule.iter().map(|&n| bound_chain(&WeightPlan::canonical(), system, n).unwrap()).collect();
        let b: Vec<f64> = chains.iter().map(|c| c.b_n).collect();
        let stable = stabilizes(&schedule, &b, 512);
        let chain_ok = chains.iter().all(|c| c.holds());
        pass &= stable && chain_ok;
        let head = b[..schedule.iter().filter(|&&n| n <= 512).count()].iter().copied().fold(0.0, f64::max);
        let all = b.iter().copied().fold(0.0, f64::max);
        lines.push(format!(
            "{}: max B_n {all:.6} vs {head:.6} up to 512 ({}), chain {}",
            system.short_name(),
            if stable { "stable" } else { "growing" },
            if chain_ok { "holds" } else { "broken" }
        ));
    }
    outcome(pass, lines.join("; "))
}

fn functional_boundedness() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    for system in STEERED {
        let config = ScanConfig::new(system, WeightPlan::canonical());
        let scan = run_boundedness_scan(&config).unwrap();
        for named in &config.functions {
            let rows: Vec<_> = scan.table.rows_for(&named.name).collect();
            let ns: Vec<usize> = rows.iter().map(|r| r.report.n).collect();
            let u: Vec<f64> = rows.iter().map(|r| r.report.u_n).collect();
            let max_u = u.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
            let bound = scan.envelope(&named.function);
            let ok = stabilizes(&ns, &u, 512) && max_u <= bound;
            pass &= ok;
            lines.push(format!(
                "{}/{}: max|U_n| {max_u:.4} <= M {bound:.4}{}",
                system.short_name(),
                named.name,
                if ok { "" } else { " FAILED" }
            ));
        }
    }
    outcome(pass, lines.join("; "))
}

fn sharpness_mechanics() -> Outcome {
    let mut worst_a1: f64 = 0.0;
    let mut norms_ok = true;
    let mut slack_ok = true;
    let mut rows = 0;
    for system in STEERED {
        let config = ScanConfig::new(system, WeightPlan::canonical()).with_functions(vec![]);
        let scan = run_sharpness_scan(&config).unwrap();
        for r in &scan.records {
            rows += 1;
            worst_a1 = worst_a1.max((r.a1 + r.prefix_at_argmax).abs());
            norms_ok &= sharpness_ramp(r.n, r.argmax_i).unwrap().norm_a().unwrap().a_norm == 2.0;
            slack_ok &= r.u_n_fn.abs() >= r.b_n - r.slack && r.slack <= r.a2_envelope + r.a3_envelope;
        }
    }
    outcome(
        worst_a1 <= 1e-12 && norms_ok && slack_ok,
        format!(
            "{rows} rows: max |A1 + P(i_n/n)| {worst_a1:.2e}, norm 2 {}, slack within envelopes {}",
            norms_ok, slack_ok
        ),
    )
}

fn coefficient_sum_tail() -> Outcome {
    let plan = WeightPlan::new(DSequence::Unit, ortholab::ASequence::InverseK);
    let config = ScanConfig::new(SystemKind::Trigonometric, plan).with_schedule(vec![128, 256, 512, 1024]);
    let report = run_coefficient_criteria(&BvFunction::identity(), &config).unwrap();
    let s = &report.weighted_partial_sums;
    let inc: Vec<f64> = s.windows(2).map(|w| w[1] - w[0]).collect();
    let strict = inc.windows(2).all(|w| w[1] < w[0]);
    outcome(strict, format!("doubling increments {:?}", inc.iter().map(|v| format!("{v:.4e}")).collect::<Vec<_>>()))
}

fn scan_fingerprint() -> String {
    let mut out = String::new();
    for system in SystemKind::ALL {
        let config = ScanConfig::new(system, WeightPlan::canonical()).with_schedule(dyadic_schedule(1024));
        let scan = run_boundedness_scan(&config).unwrap();
        out += &serde_json::to_string(&scan).unwrap();
        let sharp = run_sharpness_scan(&config).unwrap();
        out += &serde_json::to_string(&sharp).unwrap();
        out += &serde_json::to_string(&experiments::bound_chain(&config.plan, system, 1024).unwrap()).unwrap();
    }
    out += &serde_json::to_string(&experiments::lemma_check(3, 50, 1e-8)).unwrap();
    out
}

fn determinism() -> Outcome {
    let runs: Vec<String> = [1, 4, 4]
        .iter()
        .map(|&threads| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(scan_fingerprint)
        })
        .collect();
    let same = runs.windows(2).all(|w| w[0] == w[1]);
    outcome(same, format!("scans with 1, 4, 4 threads: {} bytes each, identical {same}", runs[0].len()))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("orthonormality", orthonormality),
        ("three-term identity", decomposition_identity),
        ("dual-path functional", dual_path),
        ("primitive decay, envelope 2", primitive_decay_envelope),
        ("primitive decay, trig constant 0.68", primitive_decay_trig_constant),
        ("kernel boundedness and bound chain", kernel_boundedness),
        ("functional boundedness", functional_boundedness),
        ("sharpness mechanics", sharpness_mechanics),
        ("coefficient-sum tail decay", coefficient_sum_tail),
        ("determinism across thread counts", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let result = check();
        failed += usize::from(!result.pass);
        println!(
            "{} {name}: {} ({:.1}s)",
            if result.pass { "PASS" } else { "FAIL" },
            result.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
