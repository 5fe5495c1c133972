//! Synthetic test scenes: constant fields, stripes, chessboards with an
//! optional flipped cell, and seeded dots on a uniform background.

use cldmap_core::GrayImage;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    /// Brightness changes from column to column.
    Vertical,
    /// Brightness changes from row to row.
    Horizontal,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Scene {
    Constant {
        value: u8,
    },
    Stripes {
        period: usize,
        low: u8,
        high: u8,
        orientation: Orientation,
    },
    Chessboard {
        cell: usize,
        low: u8,
        high: u8,
        /// Zero-based `(cell row, cell col)` whose colors are swapped.
        defect: Option<(usize, usize)>,
    },
    Dots {
        background: u8,
        value: u8,
        radius: usize,
        count: usize,
        seed: u64,
    },
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

impl Scene {
    fn validate(&self, height: usize, width: usize) -> Result<(), CliError> {
        if height == 0 || width == 0 {
            return Err(usage("image dimensions must be positive"));
        }
        let smaller = height.min(width);
        match *self {
            Scene::Constant { .. } => Ok(()),
            Scene::Stripes {
                period, orientation, ..
            } => {
                let span = match orientation {
                    Orientation::Vertical => width,
                    Orientation::Horizontal => height,
                };
                if period < 2 || period > span {
                    return Err(usage(format!("stripe period {period} must lie in 2..={span}")));
                }
                Ok(())
            }
            Scene::Chessboard { cell, defect, .. } => {
                if cell == 0 || cell > smaller {
                    return Err(usage(format!("cell size {cell} must lie in 1..={smaller}")));
                }
                if let Some((r, c)) = defect {
                    let (rows, cols) = (height.div_ceil(cell), width.div_ceil(cell));
                    if r >= rows || c >= cols {
                        return Err(usage(format!("defect cell ({r}, {c}) outside the {rows}x{cols} board")));
                    }
                }
                Ok(())
            }
            Scene::Dots { radius, .. } => {
                if 2 * radius + 1 > smaller {
                    return Err(usage(format!(
                        "dot radius {radius} does not fit a {height}x{width} image"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn render(&self, height: usize, width: usize) -> Result<GrayImage, CliError> {
        self.validate(height, width)?;
        let img = match *self {
            Scene::Constant { value } => GrayImage::constant(height, width, value),
            Scene::Stripes {
                period,
                low,
                high,
                orientation,
            } => GrayImage::from_fn(height, width, |r, c| {
                let t = match orientation {
                    Orientation::Vertical => c,
                    Orientation::Horizontal => r,
                };
                if t % period < period / 2 {
                    low
                } else {
                    high
                }
            }),
            Scene::Chessboard {
                cell,
                low,
                high,
                defect,
            } => GrayImage::from_fn(height, width, |r, c| {
                let (cr, cc) = (r / cell, c / cell);
                let flipped = defect == Some((cr, cc));
                if ((cr + cc) % 2 == 0) != flipped {
                    high
                } else {
                    low
                }
            }),
            Scene::Dots {
                background,
                value,
                radius,
                count,
                seed,
            } => {
                let centers = dot_centers(height, width, count, seed);
                let r2 = (radius * radius) as isize;
                GrayImage::from_fn(height, width, |r, c| {
                    let hit = centers.iter().any(|&(cr, cc)| {
                        let (dr, dc) = (r as isize - cr as isize, c as isize - cc as isize);
                        dr * dr + dc * dc <= r2
                    });
                    if hit {
                        value
                    } else {
                        background
                    }
                })
            }
        };
        Ok(img?)
    }
}

/// Dot centers drawn uniformly from the image with a seeded ChaCha8 stream.
pub fn dot_centers(height: usize, width: usize, count: usize, seed: u64) -> Vec<(usize, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (rng.random_range(0..height), rng.random_range(0..width)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_scene() {
        let img = Scene::Constant { value: 100 }.render(64, 64).unwrap();
        assert!(img.pixels().iter().all(|&p| p == 100));
    }

    #[test]
    fn chessboard_defect_flips_one_cell() {
        let plain = Scene::Chessboard {
            cell: 8,
            low: 0,
            high: 255,
            defect: None,
        }
        .render(64, 64)
        .unwrap();
        let flawed = Scene::Chessboard {
            cell: 8,
            low: 0,
            high: 255,
            defect: Some((3, 4)),
        }
        .render(64, 64)
        .unwrap();
        for r in 0..64 {
            for c in 0..64 {
                let inside = (24..32).contains(&r) && (32..40).contains(&c);
                assert_eq!(plain.get(r, c) != flawed.get(r, c), inside);
            }
        }
        assert_eq!(plain.get(0, 0), 255);
        assert_eq!(plain.get(0, 8), 0);
    }

    #[test]
    fn stripes_follow_period() {
        let img = Scene::Stripes {
            period: 8,
            low: 100,
            high: 150,
            orientation: Orientation::Vertical,
        }
        .render(4, 16)
        .unwrap();
        let row: Vec<u8> = (0..16).map(|c| img.get(2, c)).collect();
        assert_eq!(&row[..8], &[100, 100, 100, 100, 150, 150, 150, 150]);
        assert_eq!(&row[..8], &row[8..]);
        let img = Scene::Stripes {
            period: 2,
            low: 1,
            high: 2,
            orientation: Orientation::Horizontal,
        }
        .render(4, 3)
        .unwrap();
        assert_eq!(img.get(0, 2), 1);
        assert_eq!(img.get(1, 0), 2);
    }

    #[test]
    fn dots_are_seeded() {
        let scene = Scene::Dots {
            background: 128,
            value: 255,
            radius: 2,
            count: 10,
            seed: 7,
        };
        let a = scene.render(64, 64).unwrap();
        let b = scene.render(64, 64).unwrap();
        assert_eq!(a, b);
        assert!(a.pixels().contains(&255));
        let other = Scene::Dots {
            background: 128,
            value: 255,
            radius: 2,
            count: 10,
            seed: 8,
        };
        assert_ne!(a, other.render(64, 64).unwrap());
    }

    #[test]
    fn invalid_geometry() {
        let big = Scene::Chessboard {
            cell: 65,
            low: 0,
            high: 255,
            defect: None,
        };
        assert_eq!(big.render(64, 64).unwrap_err().exit_code(), 2);
        let off = Scene::Chessboard {
            cell: 8,
            low: 0,
            high: 255,
            defect: Some((8, 0)),
        };
        assert_eq!(off.render(64, 64).unwrap_err().exit_code(), 2);
        let stripes = Scene::Stripes {
            period: 1,
            low: 0,
            high: 1,
            orientation: Orientation::Vertical,
        };
        assert!(stripes.render(8, 8).is_err());
        let dots = Scene::Dots {
            background: 0,
            value: 1,
            radius: 4,
            count: 1,
            seed: 0,
        };
        assert!(dots.render(8, 8).is_err());
    }
}
