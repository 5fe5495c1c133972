//! Support, defect and directional defect maps.
//!
//! A direction is *eligible* at a pixel when the pixel has a local length
//! along it and the direction has a non-empty support in the average
//! diagram. Every per-pixel sum below runs over eligible directions only.

use crate::error::{Error, Result};
use crate::field::{AverageCld, LocalField};

fn check_shape(expected: (usize, usize), actual: (usize, usize)) -> Result<()> {
    if expected != actual {
        return Err(Error::ShapeMismatch { expected, actual });
    }
    Ok(())
}

fn check_band(name: &str, value: f64) -> Result<()> {
    if !(value.is_finite() && value > 0.0) {
        return Err(Error::Config(format!("{name} must be positive, got {value}")));
    }
    Ok(())
}

/// `(k, local length, average length)` for the eligible directions of a pixel.
pub fn eligible<'a>(
    field: &'a LocalField,
    avg: &'a AverageCld,
    (row, col): (usize, usize),
) -> impl Iterator<Item = (usize, u32, f64)> + 'a {
    field
        .pixel(row, col)
        .iter()
        .enumerate()
        .filter_map(move |(d, &l)| match (l, avg.mean(d + 1)) {
            (0, _) | (_, None) => None,
            (l, Some(mean)) => Some((d + 1, l, mean)),
        })
}

/// Fraction of directions with a defined length at each pixel.
#[derive(Clone, Debug, PartialEq)]
pub struct SupportField {
    height: usize,
    width: usize,
    directions: usize,
    counts: Vec<u32>,
}

impl SupportField {
    pub fn dimensions(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn directions(&self) -> usize {
        self.directions
    }

    pub fn count(&self, row: usize, col: usize) -> u32 {
        self.counts[row * self.width + col]
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        f64::from(self.count(row, col)) / self.directions as f64
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }
}

pub fn support_map(field: &LocalField) -> SupportField {
    let (height, width) = field.dimensions();
    let counts = field
        .raw()
        .chunks_exact(field.directions())
        .map(|px| px.iter().filter(|&&l| l != 0).count() as u32)
        .collect();
    SupportField {
        height,
        width,
        directions: field.directions(),
        counts,
    }
}

/// Whether `length` falls in the closed band `[mean(1 - τ'), mean(1 + τ')]`.
#[inline]
pub fn directional_success(length: u32, mean: f64, tau_prime: f64) -> bool {
    let l = f64::from(length);
    l >= mean * (1.0 - tau_prime) && l <= mean * (1.0 + tau_prime)
}

/// Per-pixel conformity `Ψ = 2·conforming/eligible - 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct DefectField {
    height: usize,
    width: usize,
    tau: f64,
    tau_prime: f64,
    conforming: Vec<u32>,
    eligible: Vec<u32>,
}

impl DefectField {
    pub fn dimensions(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn thresholds(&self) -> (f64, f64) {
        (self.tau, self.tau_prime)
    }

    /// `(conforming, eligible)` direction counts at a pixel.
    pub fn counts(&self, row: usize, col: usize) -> (u32, u32) {
        let idx = row * self.width + col;
        (self.conforming[idx], self.eligible[idx])
    }

    /// `Ψ` in `[-1, 1]`, `None` where no direction is eligible.
    pub fn psi(&self, row: usize, col: usize) -> Option<f64> {
        match self.counts(row, col) {
            (_, 0) => None,
            (c, e) => Some(2.0 * f64::from(c) / f64::from(e) - 1.0),
        }
    }

    pub fn values(&self) -> Vec<Option<f64>> {
        (0..self.height)
            .flat_map(|r| (0..self.width).map(move |c| (r, c)))
            .map(|(r, c)| self.psi(r, c))
            .collect()
    }
}

pub fn defect_map(field: &LocalField, avg: &AverageCld, tau_prime: f64) -> Result<DefectField> {
    check_band("tau-prime", tau_prime)?;
    let (height, width) = field.dimensions();
    let mut conforming = Vec::with_capacity(height * width);
    let mut eligible_counts = Vec::with_capacity(height * width);
    for row in 0..height {
        for col in 0..width {
            let (mut c, mut e) = (0u32, 0u32);
            for (_, l, mean) in eligible(field, avg, (row, col)) {
                e += 1;
                c += u32::from(directional_success(l, mean, tau_prime));
            }
            conforming.push(c);
            eligible_counts.push(e);
        }
    }
    Ok(DefectField {
        height,
        width,
        tau: field.config().tau.value(),
        tau_prime,
        conforming,
        eligible: eligible_counts,
    })
}

/// `Q = Σ (l - l̄)²` over the eligible directions.
pub fn raw_square_sum(field: &LocalField, avg: &AverageCld, pixel: (usize, usize)) -> Option<f64> {
    let mut any = false;
    let q = eligible(field, avg, pixel).fold(0.0, |acc, (_, l, mean)| {
        any = true;
        let d = f64::from(l) - mean;
        acc + d * d
    });
    any.then_some(q)
}

/// `ρ`: mean average length over mean local length, both over eligible directions.
pub fn scale_factor(field: &LocalField, avg: &AverageCld, pixel: (usize, usize)) -> Option<f64> {
    let (mut mean_sum, mut local_sum) = (0.0, 0u64);
    for (_, l, mean) in eligible(field, avg, pixel) {
        mean_sum += mean;
        local_sum += u64::from(l);
    }
    (local_sum > 0).then(|| mean_sum / local_sum as f64)
}

/// `σ = n / eligible`.
pub fn direction_count_factor(field: &LocalField, avg: &AverageCld, pixel: (usize, usize)) -> Option<f64> {
    let e = eligible(field, avg, pixel).count();
    (e > 0).then(|| field.directions() as f64 / e as f64)
}

/// Integer view of the average diagram: `weight_k = l̄_k · denominator`
/// exactly, with `denominator` the lcm of the present cardinalities.
#[derive(Debug)]
struct ExactAverages {
    denominator: u128,
    weights: Vec<u128>,
}

impl ExactAverages {
    const LIMIT: u128 = 1 << 48;

    fn new(avg: &AverageCld) -> Option<Self> {
        let mut denominator: u128 = 1;
        for k in 1..=avg.directions() {
            let card = u128::from(avg.cardinality(k));
            if card == 0 {
                continue;
            }
            denominator = denominator / gcd(denominator, card) * card;
            if denominator > Self::LIMIT {
                return None;
            }
        }
        let weights = (1..=avg.directions())
            .map(|k| match avg.cardinality(k) {
                0 => 0,
                card => u128::from(avg.length_sum(k)) * (denominator / u128::from(card)),
            })
            .collect();
        Some(Self { denominator, weights })
    }

    /// `Σ (ρ l_k - l̄_k)²` as an exact ratio, or `None` on overflow.
    fn shape_sum(&self, lengths: &[u32]) -> Option<f64> {
        let (mut weight_sum, mut local_sum) = (0i128, 0i128);
        for (&l, &w) in lengths.iter().zip(&self.weights) {
            if l != 0 && w != 0 {
                weight_sum = weight_sum.checked_add(w as i128)?;
                local_sum += i128::from(l);
            }
        }
        // ρ l_k - l̄_k = (W l_k - L w_k) / (L D)
        let mut squares: u128 = 0;
        for (&l, &w) in lengths.iter().zip(&self.weights) {
            if l != 0 && w != 0 {
                let term = weight_sum
                    .checked_mul(i128::from(l))?
                    .checked_sub(local_sum.checked_mul(w as i128)?)?;
                let sq = term.unsigned_abs().checked_mul(term.unsigned_abs())?;
                squares = squares.checked_add(sq)?;
            }
        }
        let scale = local_sum as f64 * self.denominator as f64;
        Some(squares as f64 / (scale * scale))
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn shape_sum_float(field: &LocalField, avg: &AverageCld, pixel: (usize, usize)) -> f64 {
    let rho = scale_factor(field, avg, pixel).expect("eligible direction present");
    eligible(field, avg, pixel).fold(0.0, |acc, (_, l, mean)| {
        let d = rho * f64::from(l) - mean;
        acc + d * d
    })
}

fn normalized_with(
    field: &LocalField,
    avg: &AverageCld,
    exact: Option<&ExactAverages>,
    pixel: (usize, usize),
) -> Option<f64> {
    let sigma = direction_count_factor(field, avg, pixel)?;
    let sum = exact
        .and_then(|e| e.shape_sum(field.pixel(pixel.0, pixel.1)))
        .unwrap_or_else(|| shape_sum_float(field, avg, pixel));
    Some(sigma * sum)
}

/// `Q̃ = σ Σ (ρ l - l̄)²`, insensitive to a uniform rescaling of the local diagram.
///
/// Evaluated as an exact integer ratio whenever the average diagram's common
/// denominator allows it, so proportional diagrams give exactly zero.
pub fn normalized_square_sum(field: &LocalField, avg: &AverageCld, pixel: (usize, usize)) -> Option<f64> {
    let exact = ExactAverages::new(avg);
    normalized_with(field, avg, exact.as_ref(), pixel)
}

/// Denominator used for `⟨Q̃⟩`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum QMean {
    /// Average over pixels where `Q̃` is defined.
    #[default]
    DefinedPixels,
    /// Divide by the total pixel count, treating undefined pixels as zero.
    AllPixels,
}

/// `Q̃` per pixel and the band flag `δ`.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionalDefectField {
    height: usize,
    width: usize,
    tau: f64,
    tau_second: f64,
    q_mean_mode: QMean,
    q: Vec<Option<f64>>,
    mean_q: f64,
    defined: usize,
}

impl DirectionalDefectField {
    pub fn dimensions(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn thresholds(&self) -> (f64, f64) {
        (self.tau, self.tau_second)
    }

    pub fn q_mean_mode(&self) -> QMean {
        self.q_mean_mode
    }

    pub fn q(&self, row: usize, col: usize) -> Option<f64> {
        self.q[row * self.width + col]
    }

    pub fn mean_q(&self) -> f64 {
        self.mean_q
    }

    /// Number of pixels with a defined `Q̃`.
    pub fn defined_count(&self) -> usize {
        self.defined
    }

    /// Closed acceptance band `[⟨Q̃⟩(1 - τ''), ⟨Q̃⟩(1 + τ'')]`.
    pub fn band(&self) -> (f64, f64) {
        (
            self.mean_q * (1.0 - self.tau_second),
            self.mean_q * (1.0 + self.tau_second),
        )
    }

    /// `δ`: whether `Q̃` lies inside the band, `None` where undefined.
    pub fn delta(&self, row: usize, col: usize) -> Option<bool> {
        let (lo, hi) = self.band();
        self.q(row, col).map(|q| q >= lo && q <= hi)
    }
}

pub fn directional_defect_map(
    field: &LocalField,
    avg: &AverageCld,
    tau_second: f64,
    q_mean_mode: QMean,
) -> Result<DirectionalDefectField> {
    check_band("tau-second", tau_second)?;
    let (height, width) = field.dimensions();
    let exact = ExactAverages::new(avg);
    let q: Vec<Option<f64>> = (0..height)
        .flat_map(|r| (0..width).map(move |c| (r, c)))
        .map(|px| normalized_with(field, avg, exact.as_ref(), px))
        .collect();
    let defined = q.iter().filter(|v| v.is_some()).count();
    if defined == 0 {
        return Err(Error::Degenerate("no pixel has an eligible direction".into()));
    }
    let total: f64 = q.iter().flatten().sum();
    let mean_q = match q_mean_mode {
        QMean::DefinedPixels => total / defined as f64,
        QMean::AllPixels => total / (height * width) as f64,
    };
    Ok(DirectionalDefectField {
        height,
        width,
        tau: field.config().tau.value(),
        tau_second,
        q_mean_mode,
        q,
        mean_q,
        defined,
    })
}

/// The two layers superimposed in the mixed map.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedMap {
    pub defect: DefectField,
    pub directional: DirectionalDefectField,
}

pub fn mixed_map(defect: DefectField, directional: DirectionalDefectField) -> Result<MixedMap> {
    check_shape(defect.dimensions(), directional.dimensions())?;
    Ok(MixedMap { defect, directional })
}
