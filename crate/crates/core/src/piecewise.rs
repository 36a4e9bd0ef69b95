//! Piecewise-affine functions with finitely many jumps.
//!
//! A [`BvFunction`] is a list of segments tiling `[0, 1)`; on segment
//! `[left, right)` the function is `slope * x + intercept` (global `x`, not
//! relative to `left`). The function is right-continuous and takes the
//! separately stored `value_at_1` at `x = 1`.

use std::f64::consts::{SQRT_2, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ons::{check_unit, merge_sorted, BasisIndex, Element, SystemKind};

/// Relative size below which a jump is treated as rounding noise.
const CONTINUITY_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub left: f64,
    pub right: f64,
    pub slope: f64,
    pub intercept: f64,
}

impl Segment {
    pub fn at(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }

    /// `∫_a^b (slope x + intercept) dx`.
    fn integral(&self, a: f64, b: f64) -> f64 {
        (b - a) * (0.5 * self.slope * (a + b) + self.intercept)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFunction", into = "RawFunction")]
pub struct BvFunction {
    segments: Vec<Segment>,
    value_at_1: f64,
}

/// Wire format: `{"segments": [[left, right, slope, intercept], ...], "value_at_1": v}`.
#[derive(Serialize, Deserialize)]
struct RawFunction {
    segments: Vec<[f64; 4]>,
    value_at_1: f64,
}

impl TryFrom<RawFunction> for BvFunction {
    type Error = Error;

    fn try_from(raw: RawFunction) -> Result<Self> {
        let segments = raw
            .segments
            .into_iter()
            .map(|[left, right, slope, intercept]| Segment { left, right, slope, intercept })
            .collect();
        Self::new(segments, raw.value_at_1)
    }
}

impl From<BvFunction> for RawFunction {
    fn from(f: BvFunction) -> Self {
        Self {
            segments: f.segments.iter().map(|s| [s.left, s.right, s.slope, s.intercept]).collect(),
            value_at_1: f.value_at_1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormReport {
    pub variation: f64,
    pub sup_norm: f64,
    pub a_norm: f64,
}

impl BvFunction {
    pub fn new(segments: Vec<Segment>, value_at_1: f64) -> Result<Self> {
        let malformed = |msg: String| Err(Error::MalformedFunction(msg));
        let (Some(first), Some(last)) = (segments.first(), segments.last()) else {
            return malformed("no segments".into());
        };
        if first.left != 0.0 {
            return malformed(format!("first segment starts at {} instead of 0", first.left));
        }
        if last.right != 1.0 {
            return malformed(format!("last segment ends at {} instead of 1", last.right));
        }
        for (i, s) in segments.iter().enumerate() {
            if ![s.left, s.right, s.slope, s.intercept].iter().all(|v| v.is_finite()) {
                return malformed(format!("segment {i} has a non-finite entry"));
            }
            if s.left >= s.right {
                return malformed(format!("segment {i} is empty or reversed: [{}, {})", s.left, s.right));
            }
        }
        if let Some(i) = segments.windows(2).position(|w| w[0].right != w[1].left) {
            return malformed(format!("segments {i} and {} do not abut", i + 1));
        }
        if !value_at_1.is_finite() {
            return malformed("value_at_1 is not finite".into());
        }
        Ok(Self { segments, value_at_1 })
    }

    /// Continuous interpolant through `(x_i, y_i)`; `xs` must start at 0, end
    /// at 1 and be strictly increasing.
    pub fn from_knots(xs: &[f64], ys: &[f64]) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(Error::MalformedFunction("need at least two matching knots".into()));
        }
        let segments = xs
            .windows(2)
            .zip(ys.windows(2))
            .map(|(x, y)| {
                let slope = (y[1] - y[0]) / (x[1] - x[0]);
                Segment { left: x[0], right: x[1], slope, intercept: y[0] - slope * x[0] }
            })
            .collect();
        Self::new(segments, ys[ys.len() - 1])
    }

    pub fn constant(c: f64) -> Self {
        Self { segments: vec![Segment { left: 0.0, right: 1.0, slope: 0.0, intercept: c }], value_at_1: c }
    }

    /// `f(x) = x`.
    pub fn identity() -> Self {
        Self { segments: vec![Segment { left: 0.0, right: 1.0, slope: 1.0, intercept: 0.0 }], value_at_1: 1.0 }
    }

    /// Piecewise-constant function taking `values[i]` on `[cuts[i-1], cuts[i])`.
    pub fn steps(cuts: &[f64], values: &[f64]) -> Result<Self> {
        if values.len() != cuts.len() + 1 {
            return Err(Error::MalformedFunction("need one more value than cuts".into()));
        }
        let mut edges = Vec::with_capacity(cuts.len() + 2);
        edges.push(0.0);
        edges.extend_from_slice(cuts);
        edges.push(1.0);
        let segments = edges
            .windows(2)
            .zip(values)
            .map(|(w, &v)| Segment { left: w[0], right: w[1], slope: 0.0, intercept: v })
            .collect();
        Self::new(segments, values[values.len() - 1])
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn value_at_1(&self) -> f64 {
        self.value_at_1
    }

    /// Interior segment boundaries.
    pub fn interior_breakpoints(&self) -> impl Iterator<Item = f64> + '_ {
        self.segments[1..].iter().map(|s| s.left)
    }

    pub(crate) fn segment_index(&self, x: f64) -> usize {
        self.segments.partition_point(|s| s.right <= x).min(self.segments.len() - 1)
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        check_unit(x)?;
        Ok(self.value(x))
    }

    pub(crate) fn value(&self, x: f64) -> f64 {
        if x >= 1.0 {
            self.value_at_1
        } else {
            self.segments[self.segment_index(x)].at(x)
        }
    }

    /// Jumps `(x, f(x) - f(x-))` at interior breakpoints and at `x = 1`.
    fn jumps(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let interior = self.segments.windows(2).map(|w| (w[1].left, w[1].at(w[1].left) - w[0].at(w[0].right)));
        let last = self.segments[self.segments.len() - 1];
        interior.chain(std::iter::once((1.0, self.value_at_1 - last.at(1.0))))
    }

    /// `∫₀¹ |f'|` over the affine pieces, jumps excluded.
    fn derivative_mass(&self) -> f64 {
        self.segments.iter().map(|s| s.slope.abs() * (s.right - s.left)).sum()
    }

    pub fn total_variation(&self) -> f64 {
        self.derivative_mass() + self.jumps().map(|(_, j)| j.abs()).sum::<f64>()
    }

    /// Supremum of `|f|`, counting left limits.
    pub fn sup_norm(&self) -> f64 {
        self.segments
            .iter()
            .flat_map(|s| [s.at(s.left).abs(), s.at(s.right).abs()])
            .fold(self.value_at_1.abs(), f64::max)
    }

    pub fn norm_a(&self) -> Result<NormReport> {
        for (at, jump) in self.jumps() {
            let scale = 1.0 + self.value(at).abs();
            if jump.abs() > CONTINUITY_TOLERANCE * scale {
                return Err(Error::NotAbsolutelyContinuous { at, jump });
            }
        }
        // For continuous f both terms are determined by the knot values. Reading
        // each knot off the segment that starts there keeps values such as a
        // ramp's 0 and 1 exact, where `slope * length` would round.
        let knots: Vec<f64> =
            self.segments.iter().map(|s| s.at(s.left)).chain(std::iter::once(self.value_at_1)).collect();
        let sup_norm = knots.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        let variation = knots.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>();
        Ok(NormReport { variation, sup_norm, a_norm: sup_norm + variation })
    }

    /// `∫₀¹ f²`.
    pub fn square_integral(&self) -> f64 {
        self.segments
            .iter()
            .map(|s| {
                let (a, b) = (s.at(s.left), s.at(s.right));
                (s.right - s.left) * (a * a + a * b + b * b) / 3.0
            })
            .sum()
    }

    /// Pointwise sum on the merged partition.
    pub fn add(&self, other: &Self) -> Self {
        let edges = merge_sorted(
            &self.segments.iter().map(|s| s.left).chain([1.0]).collect::<Vec<_>>(),
            &other.segments.iter().map(|s| s.left).chain([1.0]).collect::<Vec<_>>(),
        );
        let segments = edges
            .windows(2)
            .map(|w| {
                let (p, q) = (&self.segments[self.segment_index(w[0])], &other.segments[other.segment_index(w[0])]);
                Segment { left: w[0], right: w[1], slope: p.slope + q.slope, intercept: p.intercept + q.intercept }
            })
            .collect();
        Self { segments, value_at_1: self.value_at_1 + other.value_at_1 }
    }

    /// `∫₀¹ f φ_k`.
    pub fn integrate_against(&self, system: SystemKind, k: BasisIndex) -> f64 {
        let element = Element::decode(system, k);
        self.segments.iter().map(|s| segment_against(s, s.left, s.right, element)).sum()
    }
}

/// `∫_a^b (slope x + intercept) φ(x) dx` for `[a, b]` inside the segment.
fn segment_against(s: &Segment, a: f64, b: f64, element: Element) -> f64 {
    match element {
        Element::Constant => s.integral(a, b),
        Element::Cos { m } => {
            // ∫ (sx+c) cos(wx) = (sx+c) sin(wx)/w + s cos(wx)/w²
            let w = TAU * m as f64;
            let anti = |x: f64| {
                let theta = TAU * (m as f64 * x).fract();
                s.at(x) * theta.sin() / w + s.slope * theta.cos() / (w * w)
            };
            SQRT_2 * (anti(b) - anti(a))
        }
        Element::Sin { m } => {
            // ∫ (sx+c) sin(wx) = -(sx+c) cos(wx)/w + s sin(wx)/w²
            let w = TAU * m as f64;
            let anti = |x: f64| {
                let theta = TAU * (m as f64 * x).fract();
                -s.at(x) * theta.cos() / w + s.slope * theta.sin() / (w * w)
            };
            SQRT_2 * (anti(b) - anti(a))
        }
        Element::Walsh { .. } | Element::Haar { .. } => {
            // Walk the element's step cells overlapping [a, b).
            let level = element.dyadic_level().unwrap();
            let cells = (1u64 << level) as f64;
            let (lo, hi) = element.support_cells();
            let first = ((a * cells).floor() as u64).max(lo);
            let last = ((b * cells).ceil() as u64).min(hi);
            (first..last)
                .map(|cell| {
                    let left = (cell as f64 / cells).max(a);
                    let right = ((cell + 1) as f64 / cells).min(b);
                    if left < right {
                        element.cell_value(cell) * s.integral(left, right)
                    } else {
                        0.0
                    }
                })
                .sum()
        }
    }
}
