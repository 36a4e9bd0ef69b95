//! Summation-by-parts split of `∫₀¹ f h` over the grid `i/n`:
//!
//! ```text
//! ∫ f h = Σ_{i<n} (f(i/n) - f((i+1)/n)) H(i/n)          (a1)
//!       + Σ_{i≤n} ∫_{I_i} (f(x) - f(i/n)) h(x) dx        (a2)
//!       + f(1) H(1)                                      (a3)
//! ```
//!
//! with `H(x) = ∫₀ˣ h` and `I_i = [(i-1)/n, i/n]`, plus the ramp test
//! functions that turn a large grid prefix integral into a large functional
//! value.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::functionals::{grid_point, CoefficientTable, PrefixGrid, WeightPlan, WeightedKernel};
use crate::ons::{BasisIndex, Element, SystemKind};
use crate::piecewise::{BvFunction, Segment};
use crate::quadrature::CompositeRule;

/// A kernel `h` with closed-form first and second primitives.
#[derive(Clone, Debug)]
pub enum Kernel {
    Basis { system: SystemKind, k: BasisIndex },
    Weighted(WeightedKernel),
}

impl Kernel {
    pub fn basis(system: SystemKind, k: BasisIndex) -> Self {
        Self::Basis { system, k }
    }

    pub fn weighted(plan: &WeightPlan, system: SystemKind, n: usize) -> Result<Self> {
        Ok(Self::Weighted(WeightedKernel::new(plan, system, n)?))
    }

    pub fn system(&self) -> SystemKind {
        match self {
            Self::Basis { system, .. } => *system,
            Self::Weighted(q) => q.system(),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            Self::Basis { system, k } => Element::decode(*system, *k).eval(x),
            Self::Weighted(q) => q.value(x),
        }
    }

    /// `H(x) = ∫₀ˣ h`.
    pub fn primitive(&self, x: f64) -> f64 {
        match self {
            Self::Basis { system, k } => Element::decode(*system, *k).primitive(x),
            Self::Weighted(q) => q.primitive_at(x),
        }
    }

    /// `∫₀ˣ H`.
    pub fn second_primitive(&self, x: f64) -> f64 {
        match self {
            Self::Basis { system, k } => Element::decode(*system, *k).second_primitive(x),
            Self::Weighted(q) => q.second_primitive_at(x),
        }
    }

    /// `∫₀¹ f h` through the Fourier coefficients of `f`.
    pub fn integrate(&self, f: &BvFunction) -> f64 {
        match self {
            Self::Basis { system, k } => f.integrate_against(*system, *k),
            Self::Weighted(q) => CoefficientTable::new(f, q.system(), q.n()).pair(q.weights()),
        }
    }

    /// Finest dyadic level on which a step kernel is constant.
    fn dyadic_level(&self) -> Option<u32> {
        let elements: Vec<Element> = match self {
            Self::Basis { system, k } => vec![Element::decode(*system, *k)],
            Self::Weighted(q) => BasisIndex::up_to(q.n())
                .zip(q.weights())
                .filter(|(_, w)| **w != 0.0)
                .map(|(k, _)| Element::decode(q.system(), k))
                .collect(),
        };
        elements.iter().try_fold(0, |acc, e| e.dyadic_level().map(|r| acc.max(r)))
    }

    fn grid(&self, n: usize) -> Vec<f64> {
        (0..=n).into_par_iter().map(|i| self.primitive(grid_point(i, n))).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecompositionResult {
    pub n: usize,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    /// `∫₀¹ f h`, computed independently of the three terms.
    pub lhs: f64,
}

impl DecompositionResult {
    pub fn residual(&self) -> f64 {
        (self.lhs - (self.a1 + self.a2 + self.a3)).abs()
    }

    /// Whether `|lhs - (a1 + a2 + a3)| ≤ tol (1 + |lhs|)`.
    pub fn holds(&self, tol: f64) -> bool {
        self.residual() <= tol * (1.0 + self.lhs.abs())
    }
}

pub fn decompose(f: &BvFunction, kernel: &Kernel, n: usize) -> Result<DecompositionResult> {
    if n == 0 {
        return Err(Error::Config("decomposition grid needs n >= 1".into()));
    }
    let grid = kernel.grid(n);
    let (a1, a2, a3) = three_terms(f, kernel, &grid);
    Ok(DecompositionResult { n, a1, a2, a3, lhs: kernel.integrate(f) })
}

/// The three terms given `H` at the grid points `i/n`, `i = 0..=n`.
pub(crate) fn three_terms(f: &BvFunction, kernel: &Kernel, grid: &[f64]) -> (f64, f64, f64) {
    let n = grid.len() - 1;
    let fv: Vec<f64> = (0..=n).map(|i| f.value(grid_point(i, n))).collect();
    let a1 = (1..n).map(|i| (fv[i] - fv[i + 1]) * grid[i]).sum();
    let a3 = fv[n] * grid[n];

    let breaks: Vec<f64> = f.interior_breakpoints().collect();
    let pieces: Vec<f64> = (1..=n)
        .into_par_iter()
        .map(|i| {
            let (lo, hi) = (grid_point(i - 1, n), grid_point(i, n));
            let from = breaks.partition_point(|&b| b <= lo);
            let to = breaks.partition_point(|&b| b < hi);
            let mut edges = Vec::with_capacity(to - from + 2);
            edges.push((lo, grid[i - 1]));
            edges.extend(breaks[from..to].iter().map(|&b| (b, kernel.primitive(b))));
            edges.push((hi, grid[i]));
            let second = |x: f64| kernel.second_primitive(x);
            let mut total = 0.0;
            for w in edges.windows(2) {
                let ((a, pa), (b, pb)) = (w[0], w[1]);
                let s: &Segment = &f.segments()[f.segment_index(a)];
                // ∫_a^b (s x + c) h = s ([x H] - [∫H]) + c [H]
                if s.slope != 0.0 {
                    total += s.slope * (b * pb - a * pa - (second(b) - second(a)));
                }
                total += s.intercept * (pb - pa);
            }
            total - fv[i] * (grid[i] - grid[i - 1])
        })
        .collect();
    let a2 = pieces.iter().sum();
    (a1, a2, a3)
}

/// `max_i ∫_{I_i} |h|`: exact cell sums for step kernels, a fine composite
/// Gauss-Legendre rule for trigonometric ones.
pub fn max_interval_abs_mass(kernel: &Kernel, n: usize) -> f64 {
    match kernel.dyadic_level() {
        Some(level) => {
            let cells = 1u64 << level;
            (1..=n)
                .map(|i| {
                    let (lo, hi) = (grid_point(i - 1, n), grid_point(i, n));
                    let first = (lo * cells as f64).floor() as u64;
                    let last = ((hi * cells as f64).ceil() as u64).min(cells);
                    (first..last)
                        .map(|c| {
                            let a = (c as f64 / cells as f64).max(lo);
                            let b = ((c + 1) as f64 / cells as f64).min(hi);
                            if a < b {
                                kernel.value(a).abs() * (b - a)
                            } else {
                                0.0
                            }
                        })
                        .sum::<f64>()
                })
                .fold(0.0, f64::max)
        }
        None => {
            let rule = CompositeRule::new(8, 64 * n);
            (1..=n)
                .map(|i| rule.integrate(|x| kernel.value(x).abs(), grid_point(i - 1, n), grid_point(i, n), &[]))
                .fold(0.0, f64::max)
        }
    }
}

/// The continuous ramp that is 0 up to `i/n`, 1 from `(i+1)/n`, linear in
/// between.
pub fn sharpness_ramp(n: usize, i: usize) -> Result<BvFunction> {
    if n < 2 || i == 0 || i >= n {
        return Err(Error::RampIndex { n, i });
    }
    let (lo, hi) = (grid_point(i, n), grid_point(i + 1, n));
    let slope = 1.0 / (hi - lo);
    let mut segments = vec![
        Segment { left: 0.0, right: lo, slope: 0.0, intercept: 0.0 },
        // intercept = -(slope * lo) makes the ramp exactly 0 at lo.
        Segment { left: lo, right: hi, slope, intercept: -(slope * lo) },
    ];
    if hi < 1.0 {
        segments.push(Segment { left: hi, right: 1.0, slope: 0.0, intercept: 1.0 });
    }
    BvFunction::new(segments, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SharpnessRecord {
    pub n: usize,
    pub b_n: f64,
    pub argmax_i: usize,
    /// `U_n(f_n)` for the ramp at the maximizing index.
    pub u_n_fn: f64,
    /// `b_n - |u_n_fn|`.
    pub slack: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    /// `∫₀^{i_n/n} Q_n`.
    pub prefix_at_argmax: f64,
    /// `V(f_n) n^{-1/2} ‖Q_n‖₂`, an upper bound for `|a2|`.
    pub a2_envelope: f64,
    /// `|f_n(1)| |∫₀¹ Q_n|`, equal to `|a3|`.
    pub a3_envelope: f64,
}

impl SharpnessRecord {
    pub fn residual(&self) -> f64 {
        (self.u_n_fn - (self.a1 + self.a2 + self.a3)).abs()
    }
}

pub fn sharpness_lower_bound(plan: &WeightPlan, system: SystemKind, n: usize) -> Result<SharpnessRecord> {
    if n < 2 {
        return Err(Error::Degenerate(n));
    }
    let kernel = WeightedKernel::new(plan, system, n)?;
    let grid = kernel.prefix_grid();
    sharpness_from_grid(kernel, &grid)
}

pub(crate) fn sharpness_from_grid(kernel: WeightedKernel, grid: &PrefixGrid) -> Result<SharpnessRecord> {
    let n = kernel.n();
    let (b_n, argmax_i) = grid.b_n()?;
    let ramp = sharpness_ramp(n, argmax_i)?;
    let u_n_fn = CoefficientTable::new(&ramp, kernel.system(), n).pair(kernel.weights());
    let a2_envelope = ramp.total_variation() * (kernel.square_integral() / n as f64).sqrt();
    let kernel = Kernel::Weighted(kernel);
    let (a1, a2, a3) = three_terms(&ramp, &kernel, &grid.values);
    Ok(SharpnessRecord {
        n,
        b_n,
        argmax_i,
        u_n_fn,
        slack: b_n - u_n_fn.abs(),
        a1,
        a2,
        a3,
        prefix_at_argmax: grid.values[argmax_i],
        a2_envelope,
        a3_envelope: ramp.value_at_1().abs() * grid.values[n].abs(),
    })
}
