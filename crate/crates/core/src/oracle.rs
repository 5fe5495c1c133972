//! Brute-force reference for the local coherence field.
//!
//! Every candidate `λ` is tested by recomputing the full ray sum, and the
//! admissible range is bounded by an explicit [`DirectionTable::ray_extent`]
//! walk. Quadratic in the ray extent; meant for testing the fast engine.

use crate::config::AnalysisConfig;
use crate::directions::DirectionTable;
use crate::engine::{prepare, ray_sum};
use crate::error::Result;
use crate::field::LocalField;
use crate::image::{Brightness, GlobalMean, Image};

pub fn oracle_coherence_length<P: Brightness>(
    img: &Image<P>,
    mean: &GlobalMean<P>,
    table: &DirectionTable,
    (row, col): (usize, usize),
    k: usize,
    config: &AnalysisConfig,
) -> Option<u32> {
    let extent = table.ray_extent(img.height(), img.width(), row, col, k);
    (1..=extent)
        .find(|&lambda| {
            let sum = ray_sum(img, table, (row, col), k, lambda).expect("lambda within extent");
            P::within(
                sum,
                config.normalization.divisor(lambda),
                mean.total,
                mean.count,
                config.tau,
            )
        })
        .map(|lambda| lambda as u32)
}

pub fn oracle_local_field<P: Brightness>(img: &Image<P>, config: &AnalysisConfig) -> Result<LocalField> {
    let (mean, table) = prepare(img, config)?;
    let n = table.count();
    let mut lengths = Vec::with_capacity(img.height() * img.width() * n);
    for row in 0..img.height() {
        for col in 0..img.width() {
            for k in 1..=n {
                lengths.push(oracle_coherence_length(img, &mean, &table, (row, col), k, config).unwrap_or(0));
            }
        }
    }
    Ok(LocalField::from_raw(
        img.height(),
        img.width(),
        table.r_max(),
        *config,
        lengths,
    ))
}
