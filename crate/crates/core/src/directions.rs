//! Direction set and digital ray offsets.
//!
//! Direction `k` (1-based, `1..=n`) has angle `θ_k = k·2π/n` and visits the
//! pixels `(row + Δi_k(r), col + Δj_k(r))` for `r = 0, 1, 2, …` with
//! `Δi_k(r) = round(r cos θ_k)` and `Δj_k(r) = round(r sin θ_k)`, rounding
//! half away from zero. `θ = 0` points along increasing rows.
//!
//! Cosines are evaluated only on the first quadrant and the other three are
//! obtained by exact sign swaps, so advancing `k` by `n/4` rotates every
//! offset `(Δi, Δj)` to `(-Δj, Δi)` bit-for-bit.

use std::f64::consts::TAU;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct DirectionTable {
    count: usize,
    r_max: usize,
    angles: Vec<f64>,
    // [k - 1][r] for r in 0..=r_max
    offsets: Vec<(i32, i32)>,
}

impl DirectionTable {
    pub fn new(count: usize, r_max: usize) -> Result<Self> {
        if count < 4 || !count.is_multiple_of(4) {
            return Err(Error::Config(format!(
                "direction count must be a positive multiple of 4, got {count}"
            )));
        }
        if r_max == 0 {
            return Err(Error::Config("maximum ray length must be at least 1".into()));
        }
        let quarter = count / 4;
        let mut angles = Vec::with_capacity(count);
        let mut offsets = Vec::with_capacity(count * (r_max + 1));
        for k in 1..=count {
            angles.push(k as f64 * TAU / count as f64);
            let (cos, sin) = quadrant_cos_sin(k, count, quarter);
            offsets.extend((0..=r_max).map(|r| {
                let r = r as f64;
                ((r * cos).round() as i32, (r * sin).round() as i32)
            }));
        }
        Ok(Self {
            count,
            r_max,
            angles,
            offsets,
        })
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn r_max(&self) -> usize {
        self.r_max
    }

    /// Angle of direction `k` in radians.
    pub fn angle(&self, k: usize) -> f64 {
        self.angles[k - 1]
    }

    /// Offsets of direction `k` for `r = 0..=r_max`.
    #[inline]
    pub fn offsets(&self, k: usize) -> &[(i32, i32)] {
        let stride = self.r_max + 1;
        &self.offsets[(k - 1) * stride..k * stride]
    }

    /// Direction index after a quarter turn, in `1..=count`.
    pub fn quarter_turn(&self, k: usize) -> usize {
        (k - 1 + self.count / 4) % self.count + 1
    }

    /// Longest `λ <= r_max` such that every sample `r = 0..=λ` of the ray from
    /// `(row, col)` along `k` lies inside a `height x width` image.
    pub fn ray_extent(&self, height: usize, width: usize, row: usize, col: usize, k: usize) -> usize {
        let (row, col) = (row as i64, col as i64);
        let (h, w) = (height as i64, width as i64);
        self.offsets(k)
            .iter()
            .skip(1)
            .take_while(|&&(di, dj)| {
                let (i, j) = (row + i64::from(di), col + i64::from(dj));
                i >= 0 && i < h && j >= 0 && j < w
            })
            .count()
    }
}

fn quadrant_cos_sin(k: usize, count: usize, quarter: usize) -> (f64, f64) {
    let within = k % quarter;
    let (c, s) = if within == 0 {
        (1.0, 0.0)
    } else {
        let phi = within as f64 * TAU / count as f64;
        (phi.cos(), phi.sin())
    };
    match (k / quarter) % 4 {
        0 => (c, s),
        1 => (-s, c),
        2 => (-c, -s),
        _ => (s, -c),
    }
}
