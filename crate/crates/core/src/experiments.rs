//! Scan runners behind the command-line tool.
//!
//! Every runner parallelizes over schedule entries and assembles rows in
//! schedule order; each row is computed with a fixed summation order, so the
//! output does not depend on the number of worker threads.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::decomposition::{decompose, sharpness_from_grid, three_terms, Kernel, SharpnessRecord};
use crate::error::{Error, Result};
use crate::functionals::{
    mr_partial_sums, weighted_coeff_partial_sums, CoefficientTable, PrefixGrid, WeightPlan, WeightedKernel,
};
use crate::ons::{BasisIndex, SystemKind};
use crate::piecewise::BvFunction;
use crate::sampling;

/// Relative growth below which a running maximum counts as stabilized.
pub const STABILIZATION_MARGIN: f64 = 0.05;

/// Envelope for `k sup|Φ_k|` asserted for the trigonometric and Walsh systems.
pub const DECAY_ENVELOPE: f64 = 2.0;

pub const CSV_COLUMNS: [&str; 10] = ["n", "u_n", "b_n", "argmax_i", "a1", "a2", "a3", "residual", "slack", "function"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NamedFunction {
    pub name: String,
    pub function: BvFunction,
}

impl NamedFunction {
    pub fn new(name: impl Into<String>, function: BvFunction) -> Self {
        Self { name: name.into(), function }
    }
}

/// `x`, a ramp from 0 at 0.3 to 1 at 0.7, and a two-jump step.
pub fn builtin_functions() -> Vec<NamedFunction> {
    vec![
        NamedFunction::new("x", BvFunction::identity()),
        NamedFunction::new("ramp", BvFunction::from_knots(&[0.0, 0.3, 0.7, 1.0], &[0.0, 0.0, 1.0, 1.0]).unwrap()),
        NamedFunction::new("two_step", BvFunction::steps(&[1.0 / 3.0, 2.0 / 3.0], &[0.0, 1.0, -0.5]).unwrap()),
    ]
}

/// `2, 4, ..., 2^⌊log₂ n_max⌋`.
pub fn dyadic_schedule(n_max: usize) -> Vec<usize> {
    std::iter::successors(Some(2usize), |n| n.checked_mul(2)).take_while(|&n| n <= n_max).collect()
}

#[derive(Clone, Debug)]
pub struct ScanConfig {
    pub system: SystemKind,
    pub plan: WeightPlan,
    pub schedule: Vec<usize>,
    pub functions: Vec<NamedFunction>,
    pub output_format: OutputFormat,
    pub tolerance: f64,
}

impl ScanConfig {
    /// Dyadic schedule up to 4096, built-in functions, CSV, tolerance `1e-8`.
    pub fn new(system: SystemKind, plan: WeightPlan) -> Self {
        Self {
            system,
            plan,
            schedule: dyadic_schedule(4096),
            functions: builtin_functions(),
            output_format: OutputFormat::Csv,
            tolerance: 1e-8,
        }
    }

    pub fn with_schedule(mut self, schedule: Vec<usize>) -> Self {
        self.schedule = schedule;
        self
    }

    pub fn with_functions(mut self, functions: Vec<NamedFunction>) -> Self {
        self.functions = functions;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.schedule.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Config("schedule must be strictly increasing".into()));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::Config(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if self.schedule.first() == Some(&0) {
            return Err(Error::Config("schedule entries must be positive".into()));
        }
        if let Some(&n_max) = self.schedule.last() {
            self.plan.covers(n_max)?;
        }
        Ok(())
    }

    fn validate_grid_schedule(&self) -> Result<()> {
        self.validate()?;
        match self.schedule.first() {
            Some(&n) if n < 2 => Err(Error::Degenerate(n)),
            _ => Ok(()),
        }
    }

    fn n_max(&self) -> usize {
        self.schedule.last().copied().unwrap_or(0)
    }
}

/// One row of a functional scan.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FunctionalReport {
    pub n: usize,
    pub u_n: f64,
    pub b_n: f64,
    pub argmax_i: usize,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    /// `|u_n - (a1 + a2 + a3)|`.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanRow {
    pub function: String,
    #[serde(flatten)]
    pub report: FunctionalReport,
    pub slack: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ScanTable {
    pub rows: Vec<ScanRow>,
}

/// Shortest round-trip representation, scientific outside `[1e-4, 1e6)`.
fn fmt_f64(v: f64) -> String {
    if v == 0.0 || (1e-4..1e6).contains(&v.abs()) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

impl ScanTable {
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(CSV_COLUMNS)?;
        for row in &self.rows {
            let r = &row.report;
            writer.write_record([
                r.n.to_string(),
                fmt_f64(r.u_n),
                fmt_f64(r.b_n),
                r.argmax_i.to_string(),
                fmt_f64(r.a1),
                fmt_f64(r.a2),
                fmt_f64(r.a3),
                fmt_f64(r.residual),
                row.slack.map(fmt_f64).unwrap_or_default(),
                row.function.clone(),
            ])?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    /// Rows of one function, in schedule order.
    pub fn rows_for<'a>(&'a self, function: &'a str) -> impl Iterator<Item = &'a ScanRow> + 'a {
        self.rows.iter().filter(move |r| r.function == function)
    }
}

/// Kernel-level quantities per schedule point, shared by all functions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KernelStats {
    pub n: usize,
    pub b_n: f64,
    pub argmax_i: usize,
    /// `‖Q_n‖₂ = (Σ w_k²)^{1/2}`.
    pub l2_norm: f64,
    /// `∫₀¹ Q_n`.
    pub total_integral: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundednessFlag {
    pub function: String,
    pub first_half_max: f64,
    pub last_half_max: f64,
    /// Heuristic: `max |U_n|` over `n > n_max/2` exceeds the maximum over
    /// `n ≤ n_max/2` by less than 5%. Not a proof of boundedness.
    pub bounded: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundednessScan {
    pub system: SystemKind,
    pub table: ScanTable,
    pub kernels: Vec<KernelStats>,
    pub flags: Vec<BoundednessFlag>,
    /// Largest `residual / (1 + |u_n|)` over the table.
    pub max_scaled_residual: f64,
    pub identity_ok: bool,
}

impl BoundednessScan {
    /// `V(f) max B_n + V(f) max n^{-1/2} ‖Q_n‖₂ + |f(1)| max |∫ Q_n|` over the
    /// scanned `n`, which dominates every `|U_n(f)|` in the scan.
    pub fn envelope(&self, f: &BvFunction) -> f64 {
        let variation = f.total_variation();
        let max_b = self.kernels.iter().map(|k| k.b_n).fold(0.0, f64::max);
        let max_a2 = self.kernels.iter().map(|k| k.l2_norm / (k.n as f64).sqrt()).fold(0.0, f64::max);
        let max_a3 = self.kernels.iter().map(|k| k.total_integral.abs()).fold(0.0, f64::max);
        variation * max_b + variation * max_a2 + f.value_at_1().abs() * max_a3
    }
}

/// Maxima of `|v|` over `n ≤ n_max/2` and over `n > n_max/2`; `None` unless
/// both halves of the range are populated.
fn half_maxima(ns: &[usize], values: &[f64]) -> Option<(f64, f64)> {
    let half = *ns.last()? / 2;
    let max = |keep: &dyn Fn(usize) -> bool| {
        ns.iter().zip(values).filter(|(n, _)| keep(**n)).map(|(_, v)| v.abs()).reduce(f64::max)
    };
    Some((max(&|n| n <= half)?, max(&|n| n > half)?))
}

/// Whether `max_{n ≤ n_max} |v_n|` exceeds `max_{n ≤ cut} |v_n|` by less than
/// [`STABILIZATION_MARGIN`] (relative).
pub fn stabilizes(ns: &[usize], values: &[f64], cut: usize) -> bool {
    let head = ns.iter().zip(values).filter(|(n, _)| **n <= cut).fold(0.0, |m: f64, (_, v)| m.max(v.abs()));
    let all = values.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    all <= head * (1.0 + STABILIZATION_MARGIN)
}

struct GridPoint {
    kernel: Kernel,
    grid: PrefixGrid,
    stats: KernelStats,
}

fn grid_point_for(plan: &WeightPlan, system: SystemKind, n: usize) -> Result<GridPoint> {
    let kernel = WeightedKernel::new(plan, system, n)?;
    let grid = kernel.prefix_grid();
    let (b_n, argmax_i) = grid.b_n()?;
    let stats =
        KernelStats { n, b_n, argmax_i, l2_norm: kernel.square_integral().sqrt(), total_integral: grid.values[n] };
    Ok(GridPoint { kernel: Kernel::Weighted(kernel), grid, stats })
}

pub fn run_boundedness_scan(config: &ScanConfig) -> Result<BoundednessScan> {
    config.validate_grid_schedule()?;
    let n_max = config.n_max();
    let tables: Vec<CoefficientTable> =
        config.functions.iter().map(|f| CoefficientTable::new(&f.function, config.system, n_max)).collect();

    let per_n: Vec<(KernelStats, Vec<ScanRow>)> = config
        .schedule
        .par_iter()
        .map(|&n| {
            let point = grid_point_for(&config.plan, config.system, n)?;
            let Kernel::Weighted(q) = &point.kernel else { unreachable!() };
            let rows = config
                .functions
                .iter()
                .zip(&tables)
                .map(|(named, coefficients)| {
                    let u_n = coefficients.pair(q.weights());
                    let (a1, a2, a3) = three_terms(&named.function, &point.kernel, &point.grid.values);
                    ScanRow {
                        function: named.name.clone(),
                        report: FunctionalReport {
                            n,
                            u_n,
                            b_n: point.stats.b_n,
                            argmax_i: point.stats.argmax_i,
                            a1,
                            a2,
                            a3,
                            residual: (u_n - (a1 + a2 + a3)).abs(),
                        },
                        slack: None,
                    }
                })
                .collect();
            Ok((point.stats, rows))
        })
        .collect::<Result<_>>()?;

    let mut kernels = Vec::with_capacity(per_n.len());
    let mut rows = Vec::new();
    for (stats, r) in per_n {
        kernels.push(stats);
        rows.extend(r);
    }
    let table = ScanTable { rows };

    let flags = config
        .functions
        .iter()
        .map(|named| {
            let values: Vec<f64> = table.rows_for(&named.name).map(|r| r.report.u_n).collect();
            let halves = half_maxima(&config.schedule, &values);
            BoundednessFlag {
                function: named.name.clone(),
                first_half_max: halves.map_or(0.0, |h| h.0),
                last_half_max: halves.map_or(0.0, |h| h.1),
                bounded: halves.map(|(first, last)| last <= first * (1.0 + STABILIZATION_MARGIN)),
            }
        })
        .collect();
    let max_scaled_residual =
        table.rows.iter().map(|r| r.report.residual / (1.0 + r.report.u_n.abs())).fold(0.0, f64::max);
    Ok(BoundednessScan {
        system: config.system,
        table,
        kernels,
        flags,
        identity_ok: max_scaled_residual <= config.tolerance,
        max_scaled_residual,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayRow {
    pub k: usize,
    pub primitive_sup: f64,
    /// `k · primitive_sup`.
    pub scaled: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayTable {
    pub system: SystemKind,
    pub rows: Vec<DecayRow>,
    /// `max_{k ≥ 2} k sup|Φ_k|`.
    pub max_scaled: f64,
    /// `Some` for the systems expected to satisfy `k sup|Φ_k| ≤ 2`.
    pub envelope_ok: Option<bool>,
}

impl DecayTable {
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(["k", "primitive_sup", "k_times_sup"])?;
        for row in &self.rows {
            writer.write_record([row.k.to_string(), fmt_f64(row.primitive_sup), fmt_f64(row.scaled)])?;
        }
        writer.flush()?;
        Ok(())
    }
}

pub fn run_decay_check(system: SystemKind, k_max: usize) -> Result<DecayTable> {
    if k_max < 2 {
        return Err(Error::Config(format!("k_max must be at least 2, got {k_max}")));
    }
    let rows: Vec<DecayRow> = (1..=k_max)
        .into_par_iter()
        .map(|k| {
            let primitive_sup = system.primitive_sup(BasisIndex::new(k).unwrap());
            DecayRow { k, primitive_sup, scaled: k as f64 * primitive_sup }
        })
        .collect();
    let max_scaled = rows[1..].iter().map(|r| r.scaled).fold(0.0, f64::max);
    let envelope_ok = match system {
        SystemKind::Haar => None,
        _ => Some(max_scaled <= DECAY_ENVELOPE),
    };
    Ok(DecayTable { system, rows, max_scaled, envelope_ok })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SharpnessScan {
    pub system: SystemKind,
    pub table: ScanTable,
    pub records: Vec<SharpnessRecord>,
    /// Least-squares slope of `ln b_n` against `ln n` over the top half of the
    /// schedule.
    pub growth_exponent: Option<f64>,
    pub max_slack: Option<f64>,
    /// Every row satisfies `slack ≤ a2_envelope + a3_envelope`.
    pub slack_within_envelopes: bool,
}

fn log_log_slope(points: &[(usize, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        points.iter().filter(|(_, b)| *b > 0.0).map(|&(n, b)| ((n as f64).ln(), b.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / m, pts.iter().map(|p| p.1).sum::<f64>() / m);
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

pub fn run_sharpness_scan(config: &ScanConfig) -> Result<SharpnessScan> {
    config.validate_grid_schedule()?;
    let records: Vec<SharpnessRecord> = config
        .schedule
        .par_iter()
        .map(|&n| {
            let kernel = WeightedKernel::new(&config.plan, config.system, n)?;
            let grid = kernel.prefix_grid();
            sharpness_from_grid(kernel, &grid)
        })
        .collect::<Result<_>>()?;
    let rows = records
        .iter()
        .map(|r| ScanRow {
            function: "ramp".into(),
            report: FunctionalReport {
                n: r.n,
                u_n: r.u_n_fn,
                b_n: r.b_n,
                argmax_i: r.argmax_i,
                a1: r.a1,
                a2: r.a2,
                a3: r.a3,
                residual: r.residual(),
            },
            slack: Some(r.slack),
        })
        .collect();
    let top: Vec<(usize, f64)> = records[records.len() / 2..].iter().map(|r| (r.n, r.b_n)).collect();
    let max_slack = records.iter().map(|r| r.slack).reduce(f64::max);
    let slack_within_envelopes = records.iter().all(|r| r.slack <= r.a2_envelope + r.a3_envelope);
    Ok(SharpnessScan {
        system: config.system,
        table: ScanTable { rows },
        growth_exponent: log_log_slope(&top),
        max_slack,
        slack_within_envelopes,
        records,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CriteriaFlags {
    /// Increments of the weighted coefficient sum between consecutive
    /// schedule entries never grow.
    pub tail_decay: bool,
    /// Same for the Menshov-Rademacher sum of `c_k = d_k C_k(f)`.
    pub mr_tail_decay: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriteriaReport {
    pub system: SystemKind,
    pub schedule: Vec<usize>,
    /// `Σ_{k≤N} d_k² C_k² ln² k` at each schedule entry `N`.
    pub weighted_partial_sums: Vec<f64>,
    /// `Σ_{k≤N} (d_k C_k)² log₂² k` at each schedule entry `N`.
    pub mr_partial_sums: Vec<f64>,
    pub criteria_met: CriteriaFlags,
}

fn increments_non_increasing(values: &[f64]) -> bool {
    let increments: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    increments.windows(2).all(|w| w[1] <= w[0])
}

pub fn run_coefficient_criteria(f: &BvFunction, config: &ScanConfig) -> Result<CriteriaReport> {
    config.validate()?;
    let n_max = config.n_max();
    let table = CoefficientTable::new(f, config.system, n_max);
    let weighted = weighted_coeff_partial_sums(table.values(), &config.plan)?;
    let scaled: Vec<f64> =
        table.values().iter().enumerate().map(|(i, c)| config.plan.d.get(i + 1).unwrap() * c).collect();
    let mr = mr_partial_sums(&scaled);
    let pick = |sums: &[f64]| config.schedule.iter().map(|&n| sums[n - 1]).collect::<Vec<_>>();
    let (weighted_partial_sums, mr_partial_sums) = (pick(&weighted), pick(&mr));
    Ok(CriteriaReport {
        system: config.system,
        schedule: config.schedule.clone(),
        criteria_met: CriteriaFlags {
            tail_decay: increments_non_increasing(&weighted_partial_sums),
            mr_tail_decay: increments_non_increasing(&mr_partial_sums),
        },
        weighted_partial_sums,
        mr_partial_sums,
    })
}

/// The three quantities of the uniform-primitive-decay bound on `B_n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundChain {
    pub n: usize,
    pub b_n: f64,
    /// `max_{x ∈ [0,1]} |∫₀ˣ Q_n|`.
    pub sup_prefix: f64,
    /// `C (Σ a_k²)^{1/2} (Σ d_k² ln²k / k²)^{1/2}` with
    /// `C = max_{2≤k≤n} k sup|Φ_k|`.
    pub cauchy_bound: f64,
}

impl BoundChain {
    pub fn holds(&self) -> bool {
        self.b_n <= self.sup_prefix && self.sup_prefix <= self.cauchy_bound
    }
}

pub fn bound_chain(plan: &WeightPlan, system: SystemKind, n: usize) -> Result<BoundChain> {
    let kernel = WeightedKernel::new(plan, system, n)?;
    let grid = kernel.prefix_grid();
    let (b_n, _) = grid.b_n()?;
    let sup_prefix = sup_abs_prefix(&kernel, &grid);
    let constant = (2..=n).map(|k| k as f64 * system.primitive_sup(BasisIndex::new(k).unwrap())).fold(0.0, f64::max);
    let a_sq: f64 = (1..=n).map(|k| plan.a.get(k).unwrap().powi(2)).sum();
    let d_sq: f64 = (1..=n)
        .map(|k| {
            let t = plan.d.get(k).unwrap() * (k as f64).ln() / k as f64;
            t * t
        })
        .sum();
    Ok(BoundChain { n, b_n, sup_prefix, cauchy_bound: constant * a_sq.sqrt() * d_sq.sqrt() })
}

/// `max_x |P(x)|` for `P = ∫₀ˣ Q_n`. Step kernels have piecewise-linear
/// primitives, so the maximum sits on the finest dyadic grid. Trigonometric
/// primitives are sampled on a grid four times finer than `1/n` and the best
/// samples refined by golden-section search.
fn sup_abs_prefix(kernel: &WeightedKernel, grid: &PrefixGrid) -> f64 {
    let n = kernel.n();
    let on_grid = grid.values.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    let dyadic = (1..=n)
        .filter(|&k| kernel.weights()[k - 1] != 0.0)
        .map(|k| crate::ons::Element::decode(kernel.system(), BasisIndex::new(k).unwrap()).dyadic_level())
        .try_fold(0u32, |acc, r| r.map(|r| acc.max(r)));
    match dyadic {
        Some(level) => {
            let cells = 1usize << level;
            (0..=cells)
                .into_par_iter()
                .map(|m| kernel.primitive_at(m as f64 / cells as f64).abs())
                .reduce(|| 0.0, f64::max)
                .max(on_grid)
        }
        None => {
            let samples = 4 * n;
            let h = 1.0 / samples as f64;
            let values: Vec<f64> =
                (0..=samples).into_par_iter().map(|m| kernel.primitive_at(m as f64 * h).abs()).collect();
            let mut order: Vec<usize> = (0..values.len()).collect();
            order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
            order
                .iter()
                .take(8)
                .map(|&m| {
                    let centre = m as f64 * h;
                    golden_max(|x| kernel.primitive_at(x).abs(), (centre - h).max(0.0), (centre + h).min(1.0))
                        .max(values[m])
                })
                .fold(on_grid, f64::max)
        }
    }
}

fn golden_max(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut g1, mut g2) = (g(x1), g(x2));
    for _ in 0..80 {
        if g1 < g2 {
            lo = x1;
            x1 = x2;
            g1 = g2;
            x2 = lo + ratio * (hi - lo);
            g2 = g(x2);
        } else {
            hi = x2;
            x2 = x1;
            g2 = g1;
            x1 = hi - ratio * (hi - lo);
            g1 = g(x1);
        }
    }
    g1.max(g2)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LemmaCheckReport {
    pub seed: u64,
    pub cases: usize,
    pub failures: usize,
    /// Largest `|lhs - (a1 + a2 + a3)| / (1 + |lhs|)`.
    pub max_scaled_residual: f64,
}

impl LemmaCheckReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Checks the three-term identity on `cases` seeded random `(f, h, n ≤ 64)`.
pub fn lemma_check(seed: u64, cases: usize, tolerance: f64) -> LemmaCheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inputs: Vec<(BvFunction, Kernel, usize)> = (0..cases)
        .map(|_| {
            use rand::Rng;
            let f = sampling::random_function(&mut rng, 6);
            let kernel = sampling::random_kernel(&mut rng, 64);
            (f, kernel, rng.random_range(1..=64))
        })
        .collect();
    let residuals: Vec<f64> = inputs
        .par_iter()
        .map(|(f, h, n)| {
            let r = decompose(f, h, *n).expect("n >= 1");
            r.residual() / (1.0 + r.lhs.abs())
        })
        .collect();
    LemmaCheckReport {
        seed,
        cases,
        failures: residuals.iter().filter(|&&r| r.is_nan() || r > tolerance).count(),
        max_scaled_residual: residuals.iter().copied().fold(0.0, f64::max),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::{ASequence, DSequence};

    #[test]
    fn dyadic_schedule_defaults() {
        assert_eq!(dyadic_schedule(4096).len(), 12);
        assert_eq!(dyadic_schedule(4096)[0], 2);
        assert_eq!(dyadic_schedule(100), vec![2, 4, 8, 16, 32, 64]);
        assert!(dyadic_schedule(1).is_empty());
    }

    #[test]
    fn constant_function_scan_is_flat_and_bounded() {
        let config = ScanConfig::new(SystemKind::Trigonometric, WeightPlan::canonical())
            .with_schedule(dyadic_schedule(256))
            .with_functions(vec![NamedFunction::new("one", BvFunction::constant(1.0))]);
        let scan = run_boundedness_scan(&config).unwrap();
        assert!(scan.table.rows.iter().all(|r| r.report.u_n.abs() < 1e-14));
        assert_eq!(scan.flags[0].bounded, Some(true));
        assert!(scan.identity_ok);
    }

    #[test]
    fn empty_schedule() {
        let config = ScanConfig::new(SystemKind::Haar, WeightPlan::canonical()).with_schedule(vec![]);
        let scan = run_boundedness_scan(&config).unwrap();
        assert!(scan.table.rows.is_empty());
        assert!(scan.flags.iter().all(|f| f.bounded.is_none()));
    }

    #[test]
    fn config_validation() {
        let base = ScanConfig::new(SystemKind::Haar, WeightPlan::canonical());
        assert!(run_boundedness_scan(&base.clone().with_schedule(vec![4, 2])).is_err());
        assert!(run_boundedness_scan(&base.clone().with_schedule(vec![1, 2])).is_err());
        let mut bad = base.clone();
        bad.tolerance = 0.0;
        assert!(bad.validate().is_err());
        let short =
            ScanConfig::new(SystemKind::Haar, WeightPlan::new(DSequence::Unit, ASequence::Custom(vec![1.0; 8])))
                .with_schedule(vec![4, 16]);
        assert!(matches!(short.validate(), Err(Error::InsufficientWeights { .. })));
    }

    #[test]
    fn zero_plan_sharpness_is_all_zero() {
        let plan = WeightPlan::new(DSequence::Maximal, ASequence::Custom(vec![0.0; 64]));
        let scan =
            run_sharpness_scan(&ScanConfig::new(SystemKind::Trigonometric, plan).with_schedule(dyadic_schedule(64)))
                .unwrap();
        for r in &scan.records {
            assert_eq!((r.b_n, r.u_n_fn, r.slack), (0.0, 0.0, 0.0));
        }
        assert_eq!(scan.growth_exponent, None);
    }

    #[test]
    fn decay_first_row_and_errors() {
        for system in SystemKind::ALL {
            let table = run_decay_check(system, 16).unwrap();
            assert_eq!(table.rows[0].primitive_sup, 1.0);
        }
        assert!(run_decay_check(SystemKind::Haar, 1).is_err());
        assert_eq!(run_decay_check(SystemKind::Haar, 8).unwrap().envelope_ok, None);
    }

    #[test]
    fn criteria_trivial_cases() {
        let plan = WeightPlan::new(DSequence::Unit, ASequence::InverseK);
        let config = ScanConfig::new(SystemKind::Trigonometric, plan.clone()).with_schedule(dyadic_schedule(512));
        let report = run_coefficient_criteria(&BvFunction::constant(1.0), &config).unwrap();
        assert!(report.weighted_partial_sums.iter().all(|&s| s < 1e-25));
        assert!(report.criteria_met.tail_decay);
        let single = ScanConfig::new(SystemKind::Trigonometric, plan).with_schedule(vec![1]);
        let report = run_coefficient_criteria(&BvFunction::identity(), &single).unwrap();
        assert_eq!(report.weighted_partial_sums, vec![0.0]);
        assert_eq!(report.mr_partial_sums, vec![0.0]);
    }

    #[test]
    fn lemma_check_passes() {
        let report = lemma_check(7, 40, 1e-8);
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn csv_header_is_fixed() {
        let table = ScanTable::default();
        assert_eq!(table.to_csv_string().unwrap().trim(), CSV_COLUMNS.join(","));
    }

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(usize, f64)> = [8usize, 16, 32, 64].iter().map(|&n| (n, 3.0 * (n as f64).powf(0.5))).collect();
        assert!((log_log_slope(&pts).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(log_log_slope(&pts[..1]), None);
    }
}
