//! Per-pixel coherence lengths and their per-direction averages.

use crate::config::AnalysisConfig;
use crate::error::{Error, Result};

/// Local coherence length for every pixel and direction.
///
/// Lengths are stored pixel-major with the directions of one pixel
/// contiguous. A stored zero marks a direction where no length exists.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalField {
    height: usize,
    width: usize,
    directions: usize,
    r_max: usize,
    config: AnalysisConfig,
    lengths: Vec<u32>,
}

impl LocalField {
    pub(crate) fn from_raw(
        height: usize,
        width: usize,
        r_max: usize,
        config: AnalysisConfig,
        lengths: Vec<u32>,
    ) -> Self {
        debug_assert_eq!(lengths.len(), height * width * config.directions);
        Self {
            height,
            width,
            directions: config.directions,
            r_max,
            config,
            lengths,
        }
    }

    /// Builds a field from explicit entries, `entries[(row * width + col) * n + k - 1]`.
    pub fn from_entries(height: usize, width: usize, config: AnalysisConfig, entries: &[Option<u32>]) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::Dimension { height, width });
        }
        let n = config.directions;
        if entries.len() != height * width * n {
            return Err(Error::Config(format!(
                "expected {} entries, got {}",
                height * width * n,
                entries.len()
            )));
        }
        if entries.contains(&Some(0)) {
            return Err(Error::Config("coherence lengths must be at least 1".into()));
        }
        let lengths = entries.iter().map(|e| e.unwrap_or(0)).collect();
        let r_max = config.r_max(height, width);
        Ok(Self::from_raw(height, width, r_max, config, lengths))
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn directions(&self) -> usize {
        self.directions
    }

    pub fn r_max(&self) -> usize {
        self.r_max
    }

    pub fn config(&self) -> &AnalysisConfig {
        &self.config
    }

    /// Length at `(row, col)` along direction `k` in `1..=n`.
    #[inline]
    pub fn get(&self, row: usize, col: usize, k: usize) -> Option<u32> {
        match self.lengths[(row * self.width + col) * self.directions + k - 1] {
            0 => None,
            l => Some(l),
        }
    }

    /// Raw lengths of one pixel, index `k - 1`, zero where undefined.
    #[inline]
    pub fn pixel(&self, row: usize, col: usize) -> &[u32] {
        let start = (row * self.width + col) * self.directions;
        &self.lengths[start..start + self.directions]
    }

    /// Number of directions with a defined length at `(row, col)`.
    pub fn defined_count(&self, row: usize, col: usize) -> usize {
        self.pixel(row, col).iter().filter(|&&l| l != 0).count()
    }

    pub fn raw(&self) -> &[u32] {
        &self.lengths
    }
}

/// Average local coherence length per direction over its support.
#[derive(Clone, Debug, PartialEq)]
pub struct AverageCld {
    config: AnalysisConfig,
    sums: Vec<u64>,
    cards: Vec<u64>,
}

impl AverageCld {
    pub fn directions(&self) -> usize {
        self.cards.len()
    }

    pub fn config(&self) -> &AnalysisConfig {
        &self.config
    }

    /// Mean length for direction `k`, `None` when its support is empty.
    pub fn mean(&self, k: usize) -> Option<f64> {
        match self.cards[k - 1] {
            0 => None,
            card => Some(self.sums[k - 1] as f64 / card as f64),
        }
    }

    /// Number of pixels where direction `k` has a defined length.
    pub fn cardinality(&self, k: usize) -> u64 {
        self.cards[k - 1]
    }

    /// Sum of the defined lengths along direction `k`.
    pub fn length_sum(&self, k: usize) -> u64 {
        self.sums[k - 1]
    }

    pub fn is_present(&self, k: usize) -> bool {
        self.cards[k - 1] > 0
    }

    pub fn present_count(&self) -> usize {
        self.cards.iter().filter(|&&c| c > 0).count()
    }

    pub fn means(&self) -> Vec<Option<f64>> {
        (1..=self.directions()).map(|k| self.mean(k)).collect()
    }

    /// `max / min` over the present directions.
    pub fn anisotropy(&self) -> Option<f64> {
        let present: Vec<f64> = self.means().into_iter().flatten().collect();
        let max = present.iter().copied().reduce(f64::max)?;
        let min = present.iter().copied().reduce(f64::min)?;
        Some(max / min)
    }
}

/// Averages the defined lengths of each direction with exact integer sums.
pub fn average_cld(field: &LocalField) -> AverageCld {
    let n = field.directions;
    let mut sums = vec![0u64; n];
    let mut cards = vec![0u64; n];
    for pixel in field.lengths.chunks_exact(n) {
        for (d, &l) in pixel.iter().enumerate() {
            if l != 0 {
                sums[d] += u64::from(l);
                cards[d] += 1;
            }
        }
    }
    AverageCld {
        config: field.config,
        sums,
        cards,
    }
}
