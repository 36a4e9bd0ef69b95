use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ortholab::decomposition::max_interval_abs_mass;
use ortholab::experiments::{run_boundedness_scan, NamedFunction, ScanConfig};
use ortholab::functionals::{grid_point, q_n_prefix_integral, u_n, u_n_direct};
use ortholab::quadrature::CompositeRule;
use ortholab::{
    decompose, sampling, sharpness_ramp, BasisIndex, BvFunction, CoefficientTable, Kernel, SystemKind, WeightPlan,
    WeightedKernel,
};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn system() -> impl Strategy<Value = SystemKind> {
    prop::sample::select(SystemKind::ALL.to_vec())
}

/// Discontinuities of `φ_k` (none for trig).
fn element_breaks(system: SystemKind, k: BasisIndex) -> Vec<f64> {
    system.step_breakpoints(k).unwrap_or_default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn primitive_matches_quadrature(system in system(), k in 1usize..=512, x in 0.0f64..=1.0) {
        let k = BasisIndex::new(k).unwrap();
        let rule = CompositeRule::new(8, 2048);
        let breaks = element_breaks(system, k);
        let oracle = rule.integrate(|t| system.eval(k, t).unwrap(), 0.0, x, &breaks);
        prop_assert!((system.primitive(k, x).unwrap() - oracle).abs() <= 1e-8);
        let second = rule.integrate(|t| system.primitive(k, t).unwrap(), 0.0, x, &breaks);
        prop_assert!((system.second_primitive(k, x).unwrap() - second).abs() <= 1e-8);
    }

    #[test]
    fn dual_path_functional(seed: u64) {
        let mut rng = rng(seed);
        let n = rng.random_range(1..=128);
        let f = sampling::random_function(&mut rng, 8);
        let plan = sampling::random_plan(&mut rng, n);
        let system = sampling::random_system(&mut rng);
        let a = u_n(&f, &plan, system, n).unwrap();
        let b = u_n_direct(&f, &plan, system, n).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0), "{a} vs {b}");
    }

    #[test]
    fn total_variation_is_subadditive(seed: u64) {
        let mut rng = rng(seed);
        let f = sampling::random_function(&mut rng, 8);
        let g = sampling::random_function(&mut rng, 8);
        let sum = f.add(&g);
        prop_assert!(sum.total_variation() <= f.total_variation() + g.total_variation() + 1e-12);
        for x in [0.0, 0.1, 0.5, 0.99, 1.0] {
            let expected = f.eval(x).unwrap() + g.eval(x).unwrap();
            prop_assert!((sum.eval(x).unwrap() - expected).abs() <= 1e-12);
        }
    }

    #[test]
    fn bessel_inequality(seed: u64, system in system()) {
        let f = sampling::random_function(&mut rng(seed), 6);
        let table = CoefficientTable::new(&f, system, 256);
        let energy: f64 = table.values().iter().map(|c| c * c).sum();
        prop_assert!(energy <= f.square_integral() + 1e-10);
    }

    #[test]
    fn b_n_is_robust_to_summation_order(seed: u64, system in system(), n in 2usize..=128) {
        let mut rng = rng(seed);
        let plan = sampling::random_plan(&mut rng, n);
        let weights = plan.weights(n).unwrap();
        let (b, _) = WeightedKernel::new(&plan, system, n).unwrap().prefix_grid().b_n().unwrap();
        let mut order: Vec<usize> = (1..=n).collect();
        order.shuffle(&mut rng);
        let shuffled = (0..=n)
            .map(|i| {
                let x = grid_point(i, n);
                order.iter().map(|&k| weights[k - 1] * system.primitive(BasisIndex::new(k).unwrap(), x).unwrap()).sum::<f64>()
            })
            .fold(0.0, |m: f64, v| m.max(v.abs()));
        prop_assert!((b - shuffled).abs() <= 1e-10);
    }

    #[test]
    fn ramp_a1_is_one_prefix_value(seed: u64, system in system(), n in 2usize..=256) {
        let mut rng = rng(seed);
        let i = rng.random_range(1..n);
        let plan = sampling::random_plan(&mut rng, n);
        let ramp = sharpness_ramp(n, i).unwrap();
        prop_assert_eq!(ramp.norm_a().unwrap().a_norm, 2.0);
        let kernel = Kernel::weighted(&plan, system, n).unwrap();
        let r = decompose(&ramp, &kernel, n).unwrap();
        prop_assert!((r.a1 + kernel.primitive(grid_point(i, n))).abs() <= 1e-12);
    }

    #[test]
    fn a2_bound_chain(seed: u64) {
        let mut rng = rng(seed);
        let n = rng.random_range(1..=64);
        let f = sampling::random_function(&mut rng, 6);
        let plan = sampling::random_plan(&mut rng, n);
        let system = sampling::random_system(&mut rng);
        let weighted = WeightedKernel::new(&plan, system, n).unwrap();
        let norm = weighted.square_integral().sqrt();
        let kernel = Kernel::weighted(&plan, system, n).unwrap();
        let variation = f.total_variation();
        let a2 = decompose(&f, &kernel, n).unwrap().a2;
        let mass = max_interval_abs_mass(&kernel, n);
        prop_assert!(a2.abs() <= variation * mass * (1.0 + 1e-9) + 1e-12, "{a2} vs {}", variation * mass);
        prop_assert!(mass <= norm / (n as f64).sqrt() * (1.0 + 1e-9) + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn exact_integration_matches_quadrature(seed: u64, system in system(), k in 1usize..=256) {
        let f = sampling::random_function(&mut rng(seed), 6);
        let k = BasisIndex::new(k).unwrap();
        let mut breaks = element_breaks(system, k);
        breaks.extend(f.interior_breakpoints());
        let rule = CompositeRule::new(8, 10_000);
        let oracle = rule.integrate(|x| f.eval(x).unwrap() * system.eval(k, x).unwrap(), 0.0, 1.0, &breaks);
        prop_assert!((f.integrate_against(system, k) - oracle).abs() <= 1e-8);
    }

    #[test]
    fn three_term_identity(seed: u64) {
        let mut rng = rng(seed);
        let f = sampling::random_function(&mut rng, 6);
        let kernel = sampling::random_kernel(&mut rng, 64);
        let n = rng.random_range(1..=64);
        let r = decompose(&f, &kernel, n).unwrap();
        prop_assert!(r.holds(1e-8), "residual {}", r.residual());
    }
}

#[test]
fn gram_matrix_is_identity() {
    for system in SystemKind::ALL {
        for k in BasisIndex::up_to(64) {
            for l in BasisIndex::up_to(64) {
                let target = if k == l { 1.0 } else { 0.0 };
                assert!((system.inner_product(k, l) - target).abs() <= 1e-10, "{system:?} {k:?} {l:?}");
            }
        }
    }
}

#[test]
fn parseval_is_exact_for_dyadic_steps() {
    // Step functions on the 2^-8 grid lie in the span of the first 256 step elements.
    let mut rng = rng(11);
    let cuts: Vec<f64> = (1..256).map(|m| m as f64 / 256.0).collect();
    let values: Vec<f64> = (0..256).map(|_| rng.random_range(-1.0..1.0)).collect();
    let f = BvFunction::steps(&cuts, &values).unwrap();
    for system in [SystemKind::WalshPaley, SystemKind::Haar] {
        let energy: f64 = CoefficientTable::new(&f, system, 256).values().iter().map(|c| c * c).sum();
        assert!((energy - f.square_integral()).abs() <= 1e-12, "{system:?}");
    }
}

#[test]
fn scan_b_n_matches_prefix_integrals() {
    for system in SystemKind::ALL {
        let config = ScanConfig::new(system, WeightPlan::canonical())
            .with_schedule(vec![2, 3, 16, 50, 128])
            .with_functions(vec![NamedFunction::new("x", BvFunction::identity())]);
        let scan = run_boundedness_scan(&config).unwrap();
        for row in &scan.table.rows {
            let n = row.report.n;
            let values: Vec<f64> = (0..=n)
                .map(|i| q_n_prefix_integral(&config.plan, system, n, grid_point(i, n)).unwrap().abs())
                .collect();
            let max = values.iter().copied().fold(0.0, f64::max);
            assert!((row.report.b_n - max).abs() <= 1e-12);
            assert_eq!(values.iter().position(|&v| v == max).unwrap(), row.report.argmax_i);
        }
    }
}

#[test]
fn bound_chain_on_every_dyadic_n() {
    for system in [SystemKind::Trigonometric, SystemKind::WalshPaley] {
        for n in ortholab::experiments::dyadic_schedule(1024) {
            let chain = ortholab::experiments::bound_chain(&WeightPlan::canonical(), system, n).unwrap();
            assert!(chain.holds(), "{chain:?}");
        }
    }
}

#[test]
fn every_ramp_has_a_norm_two() {
    for n in 2..=1024 {
        for i in 1..n {
            let report = sharpness_ramp(n, i).unwrap().norm_a().unwrap();
            assert_eq!((report.sup_norm, report.variation), (1.0, 1.0), "n = {n}, i = {i}");
        }
    }
}
