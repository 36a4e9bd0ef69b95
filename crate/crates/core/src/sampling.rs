//! Seeded random test cases: functions, plans and kernels.

use rand::Rng;

use crate::decomposition::Kernel;
use crate::functionals::{ASequence, DSequence, WeightPlan};
use crate::ons::{BasisIndex, SystemKind};
use crate::piecewise::{BvFunction, Segment};

pub fn random_system(rng: &mut impl Rng) -> SystemKind {
    SystemKind::ALL[rng.random_range(0..3)]
}

/// Up to `max_segments` affine pieces with independent jumps. Breakpoints are
/// rounded to multiples of `2^-20` half the time so that cases where they hit
/// grid and dyadic points exactly are well represented.
pub fn random_function(rng: &mut impl Rng, max_segments: usize) -> BvFunction {
    let count = rng.random_range(1..=max_segments);
    let mut cuts: Vec<f64> = (1..count)
        .map(|_| {
            let x: f64 = rng.random_range(0.01..0.99);
            if rng.random_bool(0.5) {
                (x * 1048576.0).round() / 1048576.0
            } else {
                x
            }
        })
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut edges = vec![0.0];
    edges.extend(cuts);
    edges.push(1.0);
    let segments = edges
        .windows(2)
        .map(|w| Segment {
            left: w[0],
            right: w[1],
            slope: rng.random_range(-3.0..3.0),
            intercept: rng.random_range(-2.0..2.0),
        })
        .collect();
    BvFunction::new(segments, rng.random_range(-2.0..2.0)).expect("sorted cuts give a valid tiling")
}

/// Continuous piecewise-affine function through random knots.
pub fn random_continuous_function(rng: &mut impl Rng, max_knots: usize) -> BvFunction {
    let count = rng.random_range(0..=max_knots);
    let mut xs: Vec<f64> = (0..count).map(|_| rng.random_range(0.01..0.99)).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs.insert(0, 0.0);
    xs.push(1.0);
    let ys: Vec<f64> = xs.iter().map(|_| rng.random_range(-2.0..2.0)).collect();
    BvFunction::from_knots(&xs, &ys).expect("sorted knots")
}

/// Plan whose custom lists cover `n` indices.
pub fn random_plan(rng: &mut impl Rng, n: usize) -> WeightPlan {
    let d = match rng.random_range(0..3) {
        0 => DSequence::Unit,
        1 => DSequence::Maximal,
        _ => DSequence::Custom((0..n).map(|_| rng.random_range(-2.0..2.0)).collect()),
    };
    let a = match rng.random_range(0..3) {
        0 => ASequence::InverseK,
        1 => ASequence::InverseSqrtKLog,
        _ => ASequence::Custom((1..=n).map(|k| rng.random_range(-1.0..1.0) / k as f64).collect()),
    };
    WeightPlan::new(d, a)
}

/// A single basis element or a weighted kernel with at most `max_terms` terms.
pub fn random_kernel(rng: &mut impl Rng, max_terms: usize) -> Kernel {
    let system = random_system(rng);
    let terms = rng.random_range(1..=max_terms);
    if rng.random_bool(0.5) {
        Kernel::basis(system, BasisIndex::new(terms).unwrap())
    } else {
        Kernel::weighted(&random_plan(rng, terms), system, terms).expect("plan covers its terms")
    }
}
