//! Weight plans, the weighted kernel `Q_n(x) = Σ_{k≤n} d_k a_k ln(k) φ_k(x)`,
//! the functionals `U_n(f) = ∫ f Q_n`, the grid statistic `B_n`, and the
//! coefficient sums.
//!
//! Summation always runs over `k = 1..=n` in increasing order so that results
//! do not depend on how work is scheduled.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ons::{check_unit, BasisIndex, Element, SystemKind};
use crate::piecewise::BvFunction;

/// Default `length_hint` for plans without custom lists.
pub const DEFAULT_LENGTH_HINT: usize = 4096;

/// The `d` sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SequenceSpec", into = "SequenceSpec")]
pub enum DSequence {
    /// `d_k = 1`.
    Unit,
    /// `d_k = √k / ln²(k+1)`, the largest growth the kernel hypothesis allows.
    Maximal,
    Custom(Vec<f64>),
}

/// The square-summable `a` sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SequenceSpec", into = "SequenceSpec")]
pub enum ASequence {
    /// `a_k = 1/k`.
    InverseK,
    /// `a_k = 1/(√k ln(k+1))`.
    InverseSqrtKLog,
    Custom(Vec<f64>),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum SequenceSpec {
    Named(String),
    Values(Vec<f64>),
}

impl TryFrom<SequenceSpec> for DSequence {
    type Error = Error;

    fn try_from(spec: SequenceSpec) -> Result<Self> {
        match spec {
            SequenceSpec::Named(name) => match name.as_str() {
                "unit" => Ok(Self::Unit),
                "maximal" => Ok(Self::Maximal),
                other => Err(Error::Config(format!("unknown d sequence `{other}`"))),
            },
            SequenceSpec::Values(v) => Ok(Self::Custom(v)),
        }
    }
}

impl From<DSequence> for SequenceSpec {
    fn from(d: DSequence) -> Self {
        match d {
            DSequence::Unit => Self::Named("unit".into()),
            DSequence::Maximal => Self::Named("maximal".into()),
            DSequence::Custom(v) => Self::Values(v),
        }
    }
}

impl TryFrom<SequenceSpec> for ASequence {
    type Error = Error;

    fn try_from(spec: SequenceSpec) -> Result<Self> {
        match spec {
            SequenceSpec::Named(name) => match name.as_str() {
                "inverse_k" => Ok(Self::InverseK),
                "inverse_sqrtk_log" => Ok(Self::InverseSqrtKLog),
                other => Err(Error::Config(format!("unknown a sequence `{other}`"))),
            },
            SequenceSpec::Values(v) => Ok(Self::Custom(v)),
        }
    }
}

impl From<ASequence> for SequenceSpec {
    fn from(a: ASequence) -> Self {
        match a {
            ASequence::InverseK => Self::Named("inverse_k".into()),
            ASequence::InverseSqrtKLog => Self::Named("inverse_sqrtk_log".into()),
            ASequence::Custom(v) => Self::Values(v),
        }
    }
}

fn ln_squared_next(k: usize) -> f64 {
    let l = ((k + 1) as f64).ln();
    l * l
}

impl DSequence {
    pub fn get(&self, k: usize) -> Option<f64> {
        match self {
            Self::Unit => Some(1.0),
            Self::Maximal => Some((k as f64).sqrt() / ln_squared_next(k)),
            Self::Custom(v) => v.get(k - 1).copied(),
        }
    }

    fn available(&self) -> Option<usize> {
        match self {
            Self::Custom(v) => Some(v.len()),
            _ => None,
        }
    }
}

impl ASequence {
    pub fn get(&self, k: usize) -> Option<f64> {
        match self {
            Self::InverseK => Some(1.0 / k as f64),
            Self::InverseSqrtKLog => Some(1.0 / ((k as f64).sqrt() * ((k + 1) as f64).ln())),
            Self::Custom(v) => v.get(k - 1).copied(),
        }
    }

    fn available(&self) -> Option<usize> {
        match self {
            Self::Custom(v) => Some(v.len()),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightPlan {
    pub d: DSequence,
    pub a: ASequence,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    length_hint: Option<usize>,
}

/// Recorded constants of a plan over `k ≤ n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PlanProfile {
    pub n: usize,
    /// `Σ a_k²`.
    pub a_square_sum: f64,
    /// `max |d_k| ln²(k+1) / √k`.
    pub admissibility: f64,
}

impl WeightPlan {
    pub fn new(d: DSequence, a: ASequence) -> Self {
        Self { d, a, length_hint: None }
    }

    /// Maximal `d` with `a_k = 1/k`.
    pub fn canonical() -> Self {
        Self::new(DSequence::Maximal, ASequence::InverseK)
    }

    pub fn with_length_hint(mut self, hint: usize) -> Self {
        self.length_hint = Some(hint);
        self
    }

    /// Number of indices the plan is meant to cover: the explicit hint, else
    /// the shortest custom list, else [`DEFAULT_LENGTH_HINT`].
    pub fn length_hint(&self) -> usize {
        self.length_hint
            .or_else(|| match (self.d.available(), self.a.available()) {
                (Some(x), Some(y)) => Some(x.min(y)),
                (x, y) => x.or(y),
            })
            .unwrap_or(DEFAULT_LENGTH_HINT)
    }

    pub fn covers(&self, n: usize) -> Result<()> {
        for available in [self.d.available(), self.a.available()].into_iter().flatten() {
            if available < n {
                return Err(Error::InsufficientWeights { needed: n, available });
            }
        }
        Ok(())
    }

    /// `d_k a_k ln k`.
    pub fn weight(&self, k: BasisIndex) -> Result<f64> {
        self.covers(k.get())?;
        let k = k.get();
        Ok(self.d.get(k).unwrap() * self.a.get(k).unwrap() * (k as f64).ln())
    }

    /// `[d_k a_k ln k for k in 1..=n]`.
    pub fn weights(&self, n: usize) -> Result<Vec<f64>> {
        self.covers(n)?;
        Ok((1..=n).map(|k| self.d.get(k).unwrap() * self.a.get(k).unwrap() * (k as f64).ln()).collect())
    }

    pub fn admissibility_statistic(&self, n: usize) -> Result<f64> {
        self.covers(n)?;
        Ok(match self.d {
            // |d_k| ln²(k+1)/√k ≡ 1 by construction.
            DSequence::Maximal => 1.0,
            _ => (1..=n)
                .map(|k| self.d.get(k).unwrap().abs() * ln_squared_next(k) / (k as f64).sqrt())
                .fold(0.0, f64::max),
        })
    }

    pub fn profile(&self, n: usize) -> Result<PlanProfile> {
        self.covers(n)?;
        let a_square_sum = (1..=n).map(|k| self.a.get(k).unwrap().powi(2)).sum();
        Ok(PlanProfile { n, a_square_sum, admissibility: self.admissibility_statistic(n)? })
    }
}

/// `Q_n` for a fixed plan, system and `n`.
#[derive(Clone, Debug)]
pub struct WeightedKernel {
    system: SystemKind,
    weights: Vec<f64>,
    elements: Vec<Element>,
}

impl WeightedKernel {
    pub fn new(plan: &WeightPlan, system: SystemKind, n: usize) -> Result<Self> {
        Ok(Self::from_weights(system, plan.weights(n)?))
    }

    /// Kernel `Σ weights[k-1] φ_k`.
    pub fn from_weights(system: SystemKind, weights: Vec<f64>) -> Self {
        let elements = BasisIndex::up_to(weights.len()).map(|k| Element::decode(system, k)).collect();
        Self { system, weights, elements }
    }

    pub fn system(&self) -> SystemKind {
        self.system
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn terms(&self) -> impl Iterator<Item = (f64, Element)> + '_ {
        self.weights.iter().copied().zip(self.elements.iter().copied()).filter(|(w, _)| *w != 0.0)
    }

    pub(crate) fn value(&self, x: f64) -> f64 {
        self.terms().map(|(w, e)| w * e.eval(x)).sum()
    }

    pub(crate) fn primitive_at(&self, x: f64) -> f64 {
        self.terms().map(|(w, e)| w * e.primitive(x)).sum()
    }

    pub(crate) fn second_primitive_at(&self, x: f64) -> f64 {
        self.terms().map(|(w, e)| w * e.second_primitive(x)).sum()
    }

    /// `Q_n(x)`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        check_unit(x)?;
        Ok(self.value(x))
    }

    /// `∫₀ˣ Q_n`.
    pub fn prefix_integral(&self, x: f64) -> Result<f64> {
        check_unit(x)?;
        Ok(self.primitive_at(x))
    }

    /// `∫₀ˣ ∫₀ᵘ Q_n`.
    pub fn second_prefix_integral(&self, x: f64) -> Result<f64> {
        check_unit(x)?;
        Ok(self.second_primitive_at(x))
    }

    /// `∫₀¹ Q_n² = Σ w_k²` by orthonormality.
    pub fn square_integral(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum()
    }

    /// Prefix integrals at the grid points `i/n`, `i = 0..=n`.
    pub fn prefix_grid(&self) -> PrefixGrid {
        let n = self.n();
        let values = (0..=n).into_par_iter().map(|i| self.primitive_at(grid_point(i, n))).collect();
        PrefixGrid { values }
    }

    /// `∫₀¹ f Q_n` computed from the kernel's primitives: on each segment,
    /// `∫ (s x + c) Q = s ([x P] - [Ψ]) + c [P]`.
    pub fn integrate_direct(&self, f: &BvFunction) -> f64 {
        f.segments()
            .iter()
            .map(|s| {
                let (a, b) = (s.left, s.right);
                let (pa, pb) = (self.primitive_at(a), self.primitive_at(b));
                let (qa, qb) = (self.second_primitive_at(a), self.second_primitive_at(b));
                s.slope * (b * pb - a * pa - (qb - qa)) + s.intercept * (pb - pa)
            })
            .sum()
    }
}

/// `i / n` as used for every grid evaluation.
pub fn grid_point(i: usize, n: usize) -> f64 {
    i as f64 / n as f64
}

/// `P(i/n)` for `i = 0..=n`.
#[derive(Clone, Debug, PartialEq)]
pub struct PrefixGrid {
    pub values: Vec<f64>,
}

impl PrefixGrid {
    pub fn n(&self) -> usize {
        self.values.len() - 1
    }

    /// `max_{1≤i<n} |P(i/n)|` and the smallest maximizing `i`.
    pub fn b_n(&self) -> Result<(f64, usize)> {
        let n = self.n();
        if n < 2 {
            return Err(Error::Degenerate(n));
        }
        let mut best = (self.values[1].abs(), 1);
        for i in 2..n {
            let v = self.values[i].abs();
            if v > best.0 {
                best = (v, i);
            }
        }
        Ok(best)
    }
}

/// Fourier coefficients `C_1..C_n` of one function in one system.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientTable {
    system: SystemKind,
    values: Vec<f64>,
}

impl CoefficientTable {
    pub fn new(f: &BvFunction, system: SystemKind, n: usize) -> Self {
        let mut table = Self { system, values: Vec::new() };
        table.extend_to(f, n);
        table
    }

    /// Computes the missing coefficients up to `n`; `f` must be the function
    /// the table was built for.
    pub fn extend_to(&mut self, f: &BvFunction, n: usize) {
        let start = self.values.len() + 1;
        if n < start {
            return;
        }
        let system = self.system;
        let fresh: Vec<f64> =
            (start..=n).into_par_iter().map(|k| f.integrate_against(system, BasisIndex::new(k).unwrap())).collect();
        self.values.extend(fresh);
    }

    pub fn system(&self) -> SystemKind {
        self.system
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `C_k` for `k = 1..=len`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `Σ_{k≤n} w_k C_k`.
    pub fn pair(&self, weights: &[f64]) -> f64 {
        assert!(weights.len() <= self.values.len(), "coefficient table too short");
        weights.iter().zip(&self.values).map(|(w, c)| w * c).sum()
    }
}

/// `C_k(f) = ∫₀¹ f φ_k`.
pub fn fourier_coefficient(f: &BvFunction, system: SystemKind, k: BasisIndex) -> f64 {
    f.integrate_against(system, k)
}

/// `Q_n(x)`.
pub fn q_n_eval(plan: &WeightPlan, system: SystemKind, n: usize, x: f64) -> Result<f64> {
    WeightedKernel::new(plan, system, n)?.eval(x)
}

/// `∫₀ˣ Q_n = Σ d_k a_k ln k Φ_k(x)`.
pub fn q_n_prefix_integral(plan: &WeightPlan, system: SystemKind, n: usize, x: f64) -> Result<f64> {
    WeightedKernel::new(plan, system, n)?.prefix_integral(x)
}

/// `B_n = max_{1≤i<n} |∫₀^{i/n} Q_n|` with the smallest maximizing index.
pub fn b_n(plan: &WeightPlan, system: SystemKind, n: usize) -> Result<(f64, usize)> {
    if n < 2 {
        return Err(Error::Degenerate(n));
    }
    WeightedKernel::new(plan, system, n)?.prefix_grid().b_n()
}

/// `U_n(f) = Σ_{k≤n} d_k a_k ln k C_k(f)`.
pub fn u_n(f: &BvFunction, plan: &WeightPlan, system: SystemKind, n: usize) -> Result<f64> {
    let weights = plan.weights(n)?;
    Ok(CoefficientTable::new(f, system, n).pair(&weights))
}

/// `U_n(f)` by integrating `f` against the kernel's primitives directly.
pub fn u_n_direct(f: &BvFunction, plan: &WeightPlan, system: SystemKind, n: usize) -> Result<f64> {
    Ok(WeightedKernel::new(plan, system, n)?.integrate_direct(f))
}

/// Running sums `S(N) = Σ_{k≤N} d_k² C_k² ln² k` for `N = 1..=n`.
pub fn weighted_coeff_partial_sums(coefficients: &[f64], plan: &WeightPlan) -> Result<Vec<f64>> {
    let n = coefficients.len();
    plan.covers(n)?;
    let mut acc = 0.0;
    Ok(coefficients
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let k = i + 1;
            let term = plan.d.get(k).unwrap() * c * (k as f64).ln();
            acc += term * term;
            acc
        })
        .collect())
}

/// `Σ_{k≤n} d_k² C_k(f)² ln² k`.
pub fn weighted_coeff_sum(f: &BvFunction, plan: &WeightPlan, system: SystemKind, n: usize) -> Result<f64> {
    plan.covers(n)?;
    let table = CoefficientTable::new(f, system, n);
    Ok(weighted_coeff_partial_sums(table.values(), plan)?.last().copied().unwrap_or(0.0))
}

/// `Σ c_n² (log₂ n)²`, indices starting at 1.
pub fn mr_sum(c: &[f64]) -> f64 {
    mr_partial_sums(c).last().copied().unwrap_or(0.0)
}

pub fn mr_partial_sums(c: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    c.iter()
        .enumerate()
        .map(|(i, v)| {
            let term = v * ((i + 1) as f64).log2();
            acc += term * term;
            acc
        })
        .collect()
}
