//! Local coherence lengths.
//!
//! For a pixel and direction the coherence length is the smallest ray length
//! `λ >= 1` whose directional moment lies within relative distance `τ` of the
//! global mean. The walker here keeps a running sum along each ray and stops
//! at the first admissible `λ`; [`crate::oracle`] recomputes every sum from
//! scratch and must agree with it exactly.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::config::AnalysisConfig;
use crate::directions::DirectionTable;
use crate::error::{Error, Result};
use crate::field::LocalField;
use crate::image::{Brightness, GlobalMean, Image};

/// How the per-pixel work is scheduled.
///
/// `Parallel` runs on the current rayon pool; without the `parallel` feature
/// it falls back to the sequential loop. The output never depends on it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// Exact sum of the brightness samples `r = 0..=length` along direction `k`.
pub fn ray_sum<P: Brightness>(
    img: &Image<P>,
    table: &DirectionTable,
    (row, col): (usize, usize),
    k: usize,
    length: usize,
) -> Result<P::Sum> {
    let extent = table.ray_extent(img.height(), img.width(), row, col, k);
    if length > extent {
        return Err(Error::OutOfBounds {
            row,
            col,
            k,
            length,
            extent,
        });
    }
    let sum = table.offsets(k)[..=length].iter().fold(P::ZERO, |acc, &(di, dj)| {
        let i = (row as isize + di as isize) as usize;
        let j = (col as isize + dj as isize) as usize;
        P::accumulate(acc, img.get(i, j))
    });
    Ok(sum)
}

/// Directional first-order moment: the ray sum divided by `λ + 1` (count) or
/// `λ` (literal).
pub fn local_moment<P: Brightness>(
    img: &Image<P>,
    table: &DirectionTable,
    pixel: (usize, usize),
    k: usize,
    length: usize,
    config: &AnalysisConfig,
) -> Result<f64> {
    if length == 0 {
        return Err(Error::Config("moment length must be at least 1".into()));
    }
    let sum = ray_sum(img, table, pixel, k, length)?;
    Ok(P::sum_to_f64(sum) / config.normalization.divisor(length) as f64)
}

/// Coherence length at a single pixel and direction, `None` when no ray
/// length inside the image passes the threshold.
pub fn local_coherence_length<P: Brightness>(
    img: &Image<P>,
    mean: &GlobalMean<P>,
    table: &DirectionTable,
    (row, col): (usize, usize),
    k: usize,
    config: &AnalysisConfig,
) -> Option<u32> {
    walk(img, mean, table.offsets(k), row, col, config)
}

#[inline]
fn walk<P: Brightness>(
    img: &Image<P>,
    mean: &GlobalMean<P>,
    offsets: &[(i32, i32)],
    row: usize,
    col: usize,
    config: &AnalysisConfig,
) -> Option<u32> {
    let (h, w) = (img.height() as isize, img.width() as isize);
    let (row, col) = (row as isize, col as isize);
    let mut sum = P::accumulate(P::ZERO, img.get(row as usize, col as usize));
    for (r, &(di, dj)) in offsets.iter().enumerate().skip(1) {
        let i = row + di as isize;
        let j = col + dj as isize;
        if i < 0 || i >= h || j < 0 || j >= w {
            return None;
        }
        sum = P::accumulate(sum, img.get(i as usize, j as usize));
        let divisor = config.normalization.divisor(r);
        if P::within(sum, divisor, mean.total, mean.count, config.tau) {
            return Some(r as u32);
        }
    }
    None
}

pub(crate) fn prepare<P: Brightness>(
    img: &Image<P>,
    config: &AnalysisConfig,
) -> Result<(GlobalMean<P>, DirectionTable)> {
    let mean = img.global_mean();
    if mean.is_zero() {
        return Err(Error::Degenerate("global mean brightness is zero".into()));
    }
    let table = DirectionTable::new(config.directions, config.r_max(img.height(), img.width()))?;
    Ok((mean, table))
}

/// Coherence lengths for every pixel and direction.
pub fn compute_local_field<P: Brightness>(img: &Image<P>, config: &AnalysisConfig) -> Result<LocalField> {
    compute_local_field_with(img, config, Execution::default())
}

pub fn compute_local_field_with<P: Brightness>(
    img: &Image<P>,
    config: &AnalysisConfig,
    execution: Execution,
) -> Result<LocalField> {
    let (mean, table) = prepare(img, config)?;
    let n = table.count();
    let width = img.width();
    let mut lengths = vec![0u32; img.height() * width * n];

    let fill_row = |row: usize, out: &mut [u32]| {
        for (col, cell) in out.chunks_exact_mut(n).enumerate() {
            for (d, slot) in cell.iter_mut().enumerate() {
                *slot = walk(img, &mean, table.offsets(d + 1), row, col, config).unwrap_or(0);
            }
        }
    };

    match execution {
        #[cfg(feature = "parallel")]
        Execution::Parallel => lengths
            .par_chunks_mut(width * n)
            .enumerate()
            .for_each(|(row, out)| fill_row(row, out)),
        _ => lengths
            .chunks_mut(width * n)
            .enumerate()
            .for_each(|(row, out)| fill_row(row, out)),
    }

    Ok(LocalField::from_raw(
        img.height(),
        width,
        table.r_max(),
        *config,
        lengths,
    ))
}
