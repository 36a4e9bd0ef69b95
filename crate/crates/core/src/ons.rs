//! The three orthonormal systems on `[0, 1]` with exact point values and
//! exact first and second primitives.
//!
//! Library indices are 1-based:
//!
//! * trigonometric: `k = 1` is the constant `1`, `k = 2m` is `√2 cos(2πmx)`,
//!   `k = 2m + 1` is `√2 sin(2πmx)`;
//! * Walsh-Paley: `k` is the Walsh function of Paley order `k - 1`, i.e. the
//!   product of the Rademacher functions selected by the binary digits of
//!   `k - 1`;
//! * Haar: `k = 1` is the constant `1`, `k = 2^j + i` (`1 <= i <= 2^j`) is
//!   `2^{j/2}` on the left half and `-2^{j/2}` on the right half of
//!   `[(i-1)/2^j, i/2^j)`.
//!
//! Step systems are right-continuous on `[0, 1)`; at `x = 1` they take their
//! left limit.

use std::f64::consts::{SQRT_2, TAU};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    Trigonometric,
    WalshPaley,
    Haar,
}

impl SystemKind {
    pub const ALL: [SystemKind; 3] = [Self::Trigonometric, Self::WalshPaley, Self::Haar];

    pub fn is_step(self) -> bool {
        !matches!(self, Self::Trigonometric)
    }

    /// Short name used on the command line and in file names.
    pub fn short_name(self) -> &'static str {
        match self {
            Self::Trigonometric => "trig",
            Self::WalshPaley => "walsh",
            Self::Haar => "haar",
        }
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for SystemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "trig" | "trigonometric" => Ok(Self::Trigonometric),
            "walsh" | "walsh_paley" | "walsh-paley" => Ok(Self::WalshPaley),
            "haar" => Ok(Self::Haar),
            other => Err(Error::Config(format!("unknown system `{other}`"))),
        }
    }
}

/// A 1-based index into an orthonormal system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisIndex(usize);

impl BasisIndex {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            Err(Error::InvalidIndex(k))
        } else {
            Ok(Self(k))
        }
    }

    pub const fn get(self) -> usize {
        self.0
    }

    /// Indices `1..=n`.
    pub fn up_to(n: usize) -> impl DoubleEndedIterator<Item = BasisIndex> {
        (1..=n).map(BasisIndex)
    }
}

impl TryFrom<usize> for BasisIndex {
    type Error = Error;

    fn try_from(k: usize) -> Result<Self> {
        Self::new(k)
    }
}

impl fmt::Display for BasisIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

pub(crate) fn check_unit(x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Domain(x))
    }
}

/// Decoded basis element.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Element {
    Constant,
    Cos {
        m: u64,
    },
    Sin {
        m: u64,
    },
    /// Walsh function of Paley order `n >= 1`.
    Walsh {
        n: u64,
    },
    /// Haar function at `level` `j` and 0-based position `pos` in `0..2^j`.
    Haar {
        level: u32,
        pos: u64,
    },
}

impl Element {
    pub(crate) fn decode(system: SystemKind, k: BasisIndex) -> Self {
        let k = k.get() as u64;
        match system {
            SystemKind::Trigonometric => match k {
                1 => Self::Constant,
                k if k % 2 == 0 => Self::Cos { m: k / 2 },
                k => Self::Sin { m: k / 2 },
            },
            SystemKind::WalshPaley => match k - 1 {
                0 => Self::Constant,
                n => Self::Walsh { n },
            },
            SystemKind::Haar => match k {
                1 => Self::Constant,
                k => {
                    let level = (k - 1).ilog2();
                    Self::Haar { level, pos: k - 1 - (1 << level) }
                }
            },
        }
    }

    /// Resolution `r` such that the element is constant on every cell
    /// `[m 2^-r, (m+1) 2^-r)`; `None` for the non-constant trigonometric
    /// elements.
    pub(crate) fn dyadic_level(self) -> Option<u32> {
        match self {
            Self::Constant => Some(0),
            Self::Walsh { n } => Some(bit_len(n)),
            Self::Haar { level, .. } => Some(level + 1),
            Self::Cos { .. } | Self::Sin { .. } => None,
        }
    }

    /// Range of cells at [`Self::dyadic_level`] outside of which the element
    /// vanishes.
    pub(crate) fn support_cells(self) -> (u64, u64) {
        match self {
            Self::Haar { pos, .. } => (2 * pos, 2 * pos + 2),
            other => (0, 1u64 << other.dyadic_level().unwrap_or(0)),
        }
    }

    /// Value on cell `cell` at [`Self::dyadic_level`]. Step elements only.
    pub(crate) fn cell_value(self, cell: u64) -> f64 {
        match self {
            Self::Constant => 1.0,
            Self::Walsh { n } => walsh_on_cell(n, cell, bit_len(n)),
            Self::Haar { level, pos } => {
                let height = haar_height(level);
                if cell == 2 * pos {
                    height
                } else if cell == 2 * pos + 1 {
                    -height
                } else {
                    0.0
                }
            }
            Self::Cos { .. } | Self::Sin { .. } => unreachable!("not a step element"),
        }
    }

    pub(crate) fn eval(self, x: f64) -> f64 {
        match self {
            Self::Constant => 1.0,
            Self::Cos { m } => SQRT_2 * phase(m, x).cos(),
            Self::Sin { m } => SQRT_2 * phase(m, x).sin(),
            Self::Walsh { .. } | Self::Haar { .. } => {
                let r = self.dyadic_level().unwrap();
                self.cell_value(cell_of(x, r))
            }
        }
    }

    /// `∫₀ˣ φ`.
    pub(crate) fn primitive(self, x: f64) -> f64 {
        match self {
            Self::Constant => x,
            Self::Cos { m } => SQRT_2 * phase(m, x).sin() / omega(m),
            Self::Sin { m } => SQRT_2 * one_minus_cos(phase(m, x)) / omega(m),
            Self::Walsh { n } => {
                let (lower, block, offset, half) = walsh_block(n, x);
                let sign = if offset == 0.0 { 0.0 } else { walsh_paley(lower, block) };
                sign * tent(offset, half)
            }
            Self::Haar { level, pos } => {
                let (offset, half) = haar_offset(level, pos, x);
                haar_height(level) * tent(offset, half)
            }
        }
    }

    /// `∫₀ˣ ∫₀ᵘ φ(t) dt du`.
    pub(crate) fn second_primitive(self, x: f64) -> f64 {
        match self {
            Self::Constant => 0.5 * x * x,
            Self::Cos { m } => {
                let w = omega(m);
                SQRT_2 * one_minus_cos(phase(m, x)) / (w * w)
            }
            Self::Sin { m } => {
                let w = omega(m);
                SQRT_2 * (x / w - phase(m, x).sin() / (w * w))
            }
            Self::Walsh { n } => {
                // Each full block of length 2h contributes c_b h^2; summing the
                // block signs is 2^j times the lower-order primitive at the
                // block start.
                let (lower, block, offset, half) = walsh_block(n, x);
                let before = if lower == 0 { block } else { Element::Walsh { n: lower }.primitive(block) };
                let sign = if offset == 0.0 { 0.0 } else { walsh_paley(lower, block) };
                0.5 * half * before + sign * tent_area(offset, half)
            }
            Self::Haar { level, pos } => {
                let (offset, half) = haar_offset(level, pos, x);
                haar_height(level) * tent_area(offset, half)
            }
        }
    }
}

fn bit_len(n: u64) -> u32 {
    u64::BITS - n.leading_zeros()
}

fn omega(m: u64) -> f64 {
    TAU * m as f64
}

/// `2πmx` reduced modulo `2π`.
fn phase(m: u64, x: f64) -> f64 {
    TAU * (m as f64 * x).fract()
}

fn one_minus_cos(theta: f64) -> f64 {
    let s = (0.5 * theta).sin();
    2.0 * s * s
}

fn haar_height(level: u32) -> f64 {
    ((1u64 << level) as f64).sqrt()
}

/// Index of the level-`r` cell containing `x`; `x = 1` maps to the last cell.
pub(crate) fn cell_of(x: f64, r: u32) -> u64 {
    let cells = 1u64 << r;
    ((x * cells as f64) as u64).min(cells - 1)
}

fn walsh_on_cell(n: u64, cell: u64, bits: u32) -> f64 {
    // Rademacher factor r_j reads binary digit j+1 of x, which is bit
    // (bits - 1 - j) of the cell index.
    let mut parity = 0u64;
    let mut rest = n;
    while rest != 0 {
        let j = rest.trailing_zeros();
        parity ^= (cell >> (bits - 1 - j)) & 1;
        rest &= rest - 1;
    }
    if parity == 0 {
        1.0
    } else {
        -1.0
    }
}

fn walsh_paley(n: u64, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let bits = bit_len(n);
    walsh_on_cell(n, cell_of(x, bits), bits)
}

/// Splits `w_n` as `r_j · w_lower` and locates `x` inside its block of length
/// `2^-j` on which `w_lower` is constant. Returns `(lower, block_start,
/// offset, half_block)`; at `x = 1` the block start is 1 and the offset 0.
fn walsh_block(n: u64, x: f64) -> (u64, f64, f64, f64) {
    let top = bit_len(n) - 1;
    let blocks = (1u64 << top) as f64;
    let block = (x * blocks).floor().min(blocks) / blocks;
    (n - (1 << top), block, x - block, 0.5 / blocks)
}

fn haar_offset(level: u32, pos: u64, x: f64) -> (f64, f64) {
    let width = 1.0 / (1u64 << level) as f64;
    let start = pos as f64 * width;
    ((x - start).clamp(0.0, width), 0.5 * width)
}

/// Tent of height `half` on `[0, 2 half]`.
fn tent(t: f64, half: f64) -> f64 {
    half - (t - half).abs()
}

/// `∫₀ᵗ tent`.
fn tent_area(t: f64, half: f64) -> f64 {
    if t <= half {
        0.5 * t * t
    } else {
        let rest = 2.0 * half - t;
        half * half - 0.5 * rest * rest
    }
}

impl SystemKind {
    /// `φ_k(x)`.
    pub fn eval(self, k: BasisIndex, x: f64) -> Result<f64> {
        check_unit(x)?;
        Ok(Element::decode(self, k).eval(x))
    }

    /// `Φ_k(x) = ∫₀ˣ φ_k`, exact in closed form.
    pub fn primitive(self, k: BasisIndex, x: f64) -> Result<f64> {
        check_unit(x)?;
        Ok(Element::decode(self, k).primitive(x))
    }

    /// `∫₀ˣ Φ_k`, exact in closed form.
    pub fn second_primitive(self, k: BasisIndex, x: f64) -> Result<f64> {
        check_unit(x)?;
        Ok(Element::decode(self, k).second_primitive(x))
    }

    /// `sup_{x ∈ [0,1]} |Φ_k(x)|`.
    ///
    /// Trigonometric elements use the closed-form peak of the primitive; step
    /// elements take the maximum over their breakpoints, where the
    /// piecewise-linear primitive attains its extrema.
    pub fn primitive_sup(self, k: BasisIndex) -> f64 {
        let element = Element::decode(self, k);
        match element {
            Element::Cos { m } => SQRT_2 / omega(m),
            Element::Sin { m } => 2.0 * SQRT_2 / omega(m),
            _ if self == Self::Trigonometric => 1.0,
            _ => breakpoints_of(element).into_iter().map(|x| element.primitive(x).abs()).fold(0.0, f64::max),
        }
    }

    /// Partition of `[0, 1]` on which a step element is constant.
    pub fn step_breakpoints(self, k: BasisIndex) -> Result<Vec<f64>> {
        if !self.is_step() {
            return Err(Error::UnsupportedSystem);
        }
        Ok(breakpoints_of(Element::decode(self, k)))
    }

    /// Exact `⟨φ_k, φ_l⟩`: closed-form product-to-sum integrals for the
    /// trigonometric system, cell-by-cell step integration otherwise.
    pub fn inner_product(self, k: BasisIndex, l: BasisIndex) -> f64 {
        let (p, q) = (Element::decode(self, k), Element::decode(self, l));
        match self {
            Self::Trigonometric => trig_inner(p, q),
            _ => {
                let grid = merge_sorted(&breakpoints_of(p), &breakpoints_of(q));
                grid.windows(2).map(|w| p.eval(w[0]) * q.eval(w[0]) * (w[1] - w[0])).sum()
            }
        }
    }
}

fn breakpoints_of(element: Element) -> Vec<f64> {
    match element {
        Element::Haar { level, pos } => {
            let width = 1.0 / (1u64 << level) as f64;
            let start = pos as f64 * width;
            let mut points = vec![0.0, start, start + 0.5 * width, start + width, 1.0];
            points.dedup();
            points
        }
        other => {
            let cells = 1u64 << other.dyadic_level().expect("step element");
            (0..=cells).map(|m| m as f64 / cells as f64).collect()
        }
    }
}

pub(crate) fn merge_sorted(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) if x <= y => {
                i += 1;
                if x == y {
                    j += 1;
                }
                x
            }
            (_, Some(&y)) => {
                j += 1;
                y
            }
            (Some(&x), None) => {
                i += 1;
                x
            }
            (None, None) => unreachable!(),
        };
        out.push(next);
    }
    out
}

fn trig_inner(p: Element, q: Element) -> f64 {
    // (amplitude, is_sine, frequency)
    let parts = |e: Element| match e {
        Element::Constant => (1.0, false, 0i64),
        Element::Cos { m } => (SQRT_2, false, m as i64),
        Element::Sin { m } => (SQRT_2, true, m as i64),
        _ => unreachable!("trigonometric element"),
    };
    let mean_cos = |f: i64| if f == 0 { 1.0 } else { (TAU * f as f64).sin() / (TAU * f as f64) };
    let mean_sin = |f: i64| if f == 0 { 0.0 } else { one_minus_cos(TAU * f as f64) / (TAU * f as f64) };
    let ((ap, sp, fp), (aq, sq, fq)) = (parts(p), parts(q));
    let half = 0.5 * ap * aq;
    match (sp, sq) {
        (false, false) => half * (mean_cos(fp - fq) + mean_cos(fp + fq)),
        (true, true) => half * (mean_cos(fp - fq) - mean_cos(fp + fq)),
        (true, false) => half * (mean_sin(fp + fq) + mean_sin(fp - fq)),
        (false, true) => half * (mean_sin(fq + fp) + mean_sin(fq - fp)),
    }
}
