use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Relative tolerance in `(0, 1]`.
///
/// Besides the float value the threshold carries its exact dyadic form
/// `mantissa / 2^shift`, which lets integer images evaluate the closed
/// deviation test without rounding.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Threshold {
    value: f64,
    mantissa: u64,
    shift: u32,
}

impl Threshold {
    pub fn new(value: f64) -> Result<Self> {
        if !(value > 0.0 && value <= 1.0) {
            return Err(Error::Config(format!("threshold must lie in (0, 1], got {value}")));
        }
        let bits = value.to_bits();
        let biased = ((bits >> 52) & 0x7ff) as i32;
        let fraction = bits & ((1u64 << 52) - 1);
        let (mut mantissa, mut exponent) = if biased == 0 {
            (fraction, -1074)
        } else {
            (fraction | (1u64 << 52), biased - 1075)
        };
        while mantissa & 1 == 0 && exponent < 0 {
            mantissa >>= 1;
            exponent += 1;
        }
        // value <= 1 keeps the exponent non-positive once the mantissa is odd or 1
        Ok(Self {
            value,
            mantissa,
            shift: (-exponent) as u32,
        })
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    /// Exact test `diff <= value * scaled`.
    #[inline]
    pub(crate) fn admits_exact(&self, diff: u128, scaled: u128) -> bool {
        if diff == 0 {
            return true;
        }
        if self.shift >= 128 || diff.leading_zeros() < self.shift {
            // diff * 2^shift >= 2^128, beyond any reachable right-hand side
            return false;
        }
        let rhs = scaled.saturating_mul(u128::from(self.mantissa));
        (diff << self.shift) <= rhs
    }
}

/// Divisor used for the directional moment over `λ + 1` ray samples.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Normalization {
    /// Divide by the number of samples, `λ + 1`.
    #[default]
    Count,
    /// Divide by `λ`, as the moment formula is printed.
    Literal,
}

impl Normalization {
    #[inline]
    pub fn divisor(self, length: usize) -> u64 {
        match self {
            Normalization::Count => length as u64 + 1,
            Normalization::Literal => length as u64,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Normalization::Count => "count",
            Normalization::Literal => "literal",
        }
    }
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "count" => Ok(Normalization::Count),
            "literal" => Ok(Normalization::Literal),
            other => Err(Error::Config(format!("unknown normalization '{other}'"))),
        }
    }
}

pub const DEFAULT_TAU: f64 = 0.30;
pub const DEFAULT_DIRECTIONS: usize = 32;

/// Parameters of the coherence-length computation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalysisConfig {
    pub tau: Threshold,
    pub directions: usize,
    pub normalization: Normalization,
    /// Upper bound on ray length; `None` uses the image diagonal.
    pub r_max_cap: Option<usize>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            tau: Threshold::new(DEFAULT_TAU).expect("default tau is valid"),
            directions: DEFAULT_DIRECTIONS,
            normalization: Normalization::Count,
            r_max_cap: None,
        }
    }
}

impl AnalysisConfig {
    pub fn new(tau: f64, normalization: Normalization) -> Result<Self> {
        Ok(Self {
            tau: Threshold::new(tau)?,
            normalization,
            ..Self::default()
        })
    }

    pub fn with_directions(mut self, directions: usize) -> Self {
        self.directions = directions;
        self
    }

    pub fn with_r_max_cap(mut self, cap: Option<usize>) -> Self {
        self.r_max_cap = cap;
        self
    }

    /// Ray length limit for an image of the given size.
    pub fn r_max(&self, height: usize, width: usize) -> usize {
        let diagonal = default_r_max(height, width);
        match self.r_max_cap {
            Some(cap) => diagonal.min(cap),
            None => diagonal,
        }
    }
}

/// `ceil(sqrt(h^2 + w^2))`, computed in integers.
pub fn default_r_max(height: usize, width: usize) -> usize {
    let sq = (height * height + width * width) as u64;
    let mut root = (sq as f64).sqrt() as u64;
    while root * root > sq {
        root -= 1;
    }
    while root * root < sq {
        root += 1;
    }
    (root as usize).max(1)
}
