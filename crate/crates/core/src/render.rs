//! Colored overlays and the polar coherence length diagram.
//!
//! Overlays keep the source brightness in all three channels and add a
//! colored component on top, clamped at 255. The directional defect layer
//! replaces flagged pixels with pure yellow instead.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::io::Cursor;

use image::{ImageEncoder, Rgb, RgbImage};

use crate::error::{Error, Result};
use crate::field::AverageCld;
use crate::image::{div_round_half_away, GrayImage};
use crate::maps::{DefectField, DirectionalDefectField, MixedMap, SupportField};

pub type OverlayImage = RgbImage;

pub const YELLOW: Rgb<u8> = Rgb([255, 255, 0]);

fn check_shape(img: &GrayImage, actual: (usize, usize)) -> Result<()> {
    if img.dimensions() != actual {
        return Err(Error::ShapeMismatch {
            expected: img.dimensions(),
            actual,
        });
    }
    Ok(())
}

fn gray_base(img: &GrayImage) -> OverlayImage {
    RgbImage::from_fn(img.width() as u32, img.height() as u32, |x, y| {
        let g = img.get(y as usize, x as usize);
        Rgb([g, g, g])
    })
}

fn add(base: u8, amount: u64) -> u8 {
    (u64::from(base) + amount).min(255) as u8
}

/// Blue channel raised by `round(255·φ)`.
pub fn render_support_overlay(img: &GrayImage, smap: &SupportField) -> Result<OverlayImage> {
    check_shape(img, smap.dimensions())?;
    let n = smap.directions() as u64;
    let mut out = gray_base(img);
    for (x, y, px) in out.enumerate_pixels_mut() {
        let count = u64::from(smap.count(y as usize, x as usize));
        px.0[2] = add(px.0[2], div_round_half_away(255 * count, n));
    }
    Ok(out)
}

fn tint_defect(px: &mut Rgb<u8>, conforming: u32, eligible: u32) {
    if eligible == 0 {
        return;
    }
    let (c2, e) = (2 * u64::from(conforming), u64::from(eligible));
    // 255·|Ψ| with Ψ = (2c - e) / e
    if c2 > e {
        px.0[1] = add(px.0[1], div_round_half_away(255 * (c2 - e), e));
    } else if c2 < e {
        px.0[0] = add(px.0[0], div_round_half_away(255 * (e - c2), e));
    }
}

/// Green for `Ψ > 0`, red for `Ψ < 0`, untouched where `Ψ` is zero or undefined.
pub fn render_defect_overlay(img: &GrayImage, dmap: &DefectField) -> Result<OverlayImage> {
    check_shape(img, dmap.dimensions())?;
    let mut out = gray_base(img);
    for (x, y, px) in out.enumerate_pixels_mut() {
        let (c, e) = dmap.counts(y as usize, x as usize);
        tint_defect(px, c, e);
    }
    Ok(out)
}

fn paint_flags(out: &mut OverlayImage, ddmap: &DirectionalDefectField) {
    for (x, y, px) in out.enumerate_pixels_mut() {
        if ddmap.delta(y as usize, x as usize) == Some(true) {
            *px = YELLOW;
        }
    }
}

/// Pixels with `δ = 1` in yellow.
pub fn render_ddmap_overlay(img: &GrayImage, ddmap: &DirectionalDefectField) -> Result<OverlayImage> {
    check_shape(img, ddmap.dimensions())?;
    let mut out = gray_base(img);
    paint_flags(&mut out, ddmap);
    Ok(out)
}

/// Defect tint first, then yellow flags on top.
pub fn render_mixed_overlay(img: &GrayImage, mixed: &MixedMap) -> Result<OverlayImage> {
    let mut out = render_defect_overlay(img, &mixed.defect)?;
    check_shape(img, mixed.directional.dimensions())?;
    paint_flags(&mut out, &mixed.directional);
    Ok(out)
}

/// Encodes an overlay as a non-interlaced 8-bit RGB PNG.
pub fn encode_png(overlay: &OverlayImage) -> Result<Vec<u8>> {
    let mut bytes = Cursor::new(Vec::new());
    image::codecs::png::PngEncoder::new(&mut bytes)
        .write_image(
            overlay.as_raw(),
            overlay.width(),
            overlay.height(),
            image::ExtendedColorType::Rgb8,
        )
        .map_err(|e| Error::Format(e.to_string()))?;
    Ok(bytes.into_inner())
}

/// Drawing coordinates rounded to a thousandth of a pixel.
fn coord(v: f64) -> f64 {
    let r = (v * 1000.0).round() / 1000.0;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Vertex of direction `k` in a `size`-pixel drawing, or `None` if missing.
///
/// Direction `k` sits at `k·360/n` degrees counterclockwise from the
/// drawing's +x axis, at a radius scaled so the longest mean reaches
/// `0.45·size`.
pub fn polar_vertices(avg: &AverageCld, size: u32) -> Result<Vec<Option<(f64, f64)>>> {
    let means = avg.means();
    let longest = means
        .iter()
        .flatten()
        .copied()
        .reduce(f64::max)
        .ok_or_else(|| Error::Degenerate("every direction has an empty support".into()))?;
    let n = means.len();
    let center = f64::from(size) / 2.0;
    let scale = 0.45 * f64::from(size) / longest;
    Ok(means
        .iter()
        .enumerate()
        .map(|(d, mean)| {
            mean.map(|m| {
                let angle = (d + 1) as f64 * TAU / n as f64;
                let radius = m * scale;
                (
                    coord(center + radius * angle.cos()),
                    coord(center - radius * angle.sin()),
                )
            })
        })
        .collect())
}

fn points(vertices: &[(f64, f64)]) -> String {
    vertices
        .iter()
        .map(|(x, y)| format!("{x},{y}"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Runs of consecutive present directions, wrapping around.
fn runs(vertices: &[Option<(f64, f64)>]) -> Vec<Vec<(f64, f64)>> {
    let n = vertices.len();
    let Some(gap) = vertices.iter().position(Option::is_none) else {
        return vec![vertices.iter().flatten().copied().collect()];
    };
    let mut out = Vec::new();
    let mut current = Vec::new();
    for step in 1..=n {
        match vertices[(gap + step) % n] {
            Some(v) => current.push(v),
            None if !current.is_empty() => out.push(std::mem::take(&mut current)),
            None => {}
        }
    }
    if !current.is_empty() {
        out.push(current);
    }
    out
}

/// SVG 1.1 polar plot of the average diagram.
pub fn render_polar_svg(avg: &AverageCld, size: u32) -> Result<String> {
    let vertices = polar_vertices(avg, size)?;
    let config = avg.config();
    let s = f64::from(size);
    let c = s / 2.0;
    let outer = coord(0.45 * s);
    let font = coord((s / 40.0).max(8.0));

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
    let _ = writeln!(svg, "<title>Coherence length diagram</title>");
    let _ = writeln!(
        svg,
        "<desc>tau={} n_d={} normalization={} r_max_cap={}; 0 degrees = increasing image rows, angles counterclockwise with k</desc>",
        config.tau.value(),
        config.directions,
        config.normalization,
        config.r_max_cap.map_or_else(|| "none".to_string(), |v| v.to_string()),
    );
    let _ = writeln!(
        svg,
        r#"<rect x="0" y="0" width="{size}" height="{size}" fill="white"/>"#
    );
    let _ = writeln!(
        svg,
        r##"<g stroke="#bbbbbb" stroke-width="1" fill="none"><line x1="{lo}" y1="{c}" x2="{hi}" y2="{c}"/><line x1="{c}" y1="{lo}" x2="{c}" y2="{hi}"/><circle cx="{c}" cy="{c}" r="{outer}" stroke-dasharray="4 4"/></g>"##,
        lo = coord(c - outer),
        hi = coord(c + outer),
    );
    for run in runs(&vertices) {
        if run.len() == 1 {
            let (x, y) = run[0];
            let _ = writeln!(svg, r##"<circle class="cld" cx="{x}" cy="{y}" r="2" fill="#1f4e9e"/>"##);
        } else if run.len() == vertices.len() {
            let _ = writeln!(
                svg,
                r##"<polygon class="cld" points="{}" fill="#1f4e9e" fill-opacity="0.15" stroke="#1f4e9e" stroke-width="2"/>"##,
                points(&run)
            );
        } else {
            let _ = writeln!(
                svg,
                r##"<polyline class="cld" points="{}" fill="none" stroke="#1f4e9e" stroke-width="2"/>"##,
                points(&run)
            );
        }
    }
    let _ = writeln!(
        svg,
        r#"<g font-family="sans-serif" font-size="{font}" fill="black"><text x="{x0}" y="{y0}" text-anchor="start">0° (+row)</text><text x="{c}" y="{y1}" text-anchor="middle">90° (+col)</text><text x="{m}" y="{l1}">τ = {tau}</text><text x="{m}" y="{l2}">n_d = {n}</text><text x="{m}" y="{l3}">normalization: {norm}</text></g>"#,
        x0 = coord(c + outer + 2.0).min(coord(s - 5.0 * font)),
        y0 = coord(c - 4.0),
        y1 = coord(c - outer - 4.0).max(font),
        m = coord(font / 2.0),
        l1 = coord(font * 1.2),
        l2 = coord(font * 2.4),
        l3 = coord(s - font / 2.0),
        tau = config.tau.value(),
        n = config.directions,
        norm = config.normalization,
    );
    svg.push_str("</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::AnalysisConfig;
    use crate::field::{average_cld, LocalField};
    use crate::maps::{defect_map, directional_defect_map, mixed_map, support_map, QMean};

    fn single_pixel(lengths: &[Option<u32>]) -> (LocalField, AverageCld) {
        let config = AnalysisConfig::default().with_directions(lengths.len());
        let field = LocalField::from_entries(1, 1, config, lengths).unwrap();
        let avg = average_cld(&field);
        (field, avg)
    }

    #[test]
    fn support_colors() {
        let img = GrayImage::new(1, 3, vec![0, 77, 100]).unwrap();
        let mut entries = vec![Some(1); 4];
        entries.extend([None; 4]);
        entries.extend([Some(1), Some(1), None, None]);
        let config = AnalysisConfig::default().with_directions(4);
        let field = LocalField::from_entries(1, 3, config, &entries).unwrap();
        let out = render_support_overlay(&img, &support_map(&field)).unwrap();
        assert_eq!(out.get_pixel(0, 0).0, [0, 0, 255]);
        assert_eq!(out.get_pixel(1, 0).0, [77, 77, 77]);
        assert_eq!(out.get_pixel(2, 0).0, [100, 100, 228]);
    }

    #[test]
    fn defect_colors() {
        // pixel 0 conforming everywhere, pixel 1 nowhere, pixel 2 has no support
        let entries = [
            Some(2),
            Some(2),
            Some(2),
            Some(2),
            Some(40),
            Some(40),
            Some(40),
            Some(40),
            None,
            None,
            None,
            None,
        ];
        let config = AnalysisConfig::default().with_directions(4);
        let field = LocalField::from_entries(1, 3, config, &entries).unwrap();
        let avg = average_cld(&field);
        // means are 21; neither 2 nor 40 falls in [10.5, 31.5]
        let d = defect_map(&field, &avg, 0.5).unwrap();
        let img = GrayImage::new(1, 3, vec![0, 0, 90]).unwrap();
        let out = render_defect_overlay(&img, &d).unwrap();
        assert_eq!(out.get_pixel(0, 0).0, [255, 0, 0]);
        assert_eq!(out.get_pixel(2, 0).0, [90, 90, 90]);

        let d = defect_map(&field, &avg, 0.95).unwrap();
        let out = render_defect_overlay(&img, &d).unwrap();
        assert_eq!(out.get_pixel(0, 0).0, [0, 255, 0]);
        assert_eq!(out.get_pixel(1, 0).0, [0, 255, 0]);
    }

    #[test]
    fn zero_psi_untouched() {
        let mut px = Rgb([10, 10, 10]);
        tint_defect(&mut px, 2, 4);
        assert_eq!(px.0, [10, 10, 10]);
        tint_defect(&mut px, 3, 4);
        assert_eq!(px.0, [10, 138, 10]);
    }

    #[test]
    fn ddmap_and_mixed_colors() {
        let entries = [Some(1); 8];
        let config = AnalysisConfig::default().with_directions(4);
        let field = LocalField::from_entries(1, 2, config, &entries).unwrap();
        let avg = average_cld(&field);
        let dd = directional_defect_map(&field, &avg, 0.5, QMean::DefinedPixels).unwrap();
        let img = GrayImage::new(1, 2, vec![0, 0]).unwrap();
        let out = render_ddmap_overlay(&img, &dd).unwrap();
        assert!(out.pixels().all(|p| *p == YELLOW));

        let d = defect_map(&field, &avg, 0.5).unwrap();
        let mixed = mixed_map(d, dd).unwrap();
        let out = render_mixed_overlay(&img, &mixed).unwrap();
        assert!(out.pixels().all(|p| *p == YELLOW));
    }

    #[test]
    fn overlay_shape_mismatch() {
        let (field, _) = single_pixel(&[Some(1); 4]);
        let img = GrayImage::constant(2, 2, 0).unwrap();
        assert!(render_support_overlay(&img, &support_map(&field)).is_err());
    }

    #[test]
    fn regular_polygon_for_isotropic() {
        let (_, avg) = single_pixel(&[Some(3); 32]);
        let vertices = polar_vertices(&avg, 200).unwrap();
        for v in vertices.iter().flatten() {
            let r = ((v.0 - 100.0).powi(2) + (v.1 - 100.0).powi(2)).sqrt();
            assert!((r - 90.0).abs() < 2e-3);
        }
        assert_eq!(vertices[31], Some((190.0, 100.0)));
        assert_eq!(vertices[7], Some((100.0, 10.0)));
        let svg = render_polar_svg(&avg, 200).unwrap();
        assert_eq!(svg.matches("<polygon").count(), 1);
        assert!(!svg.contains("<polyline"));
        assert!(svg.contains("τ = 0.3"));
        assert!(svg.contains("n_d = 32"));
        assert!(svg.contains("normalization: count"));
    }

    #[test]
    fn gap_breaks_polyline() {
        let mut lengths = vec![Some(3); 32];
        lengths[10] = None;
        let (_, avg) = single_pixel(&lengths);
        let svg = render_polar_svg(&avg, 200).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(!svg.contains("<polygon"));
        let pts = svg.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
        assert_eq!(pts.split(' ').count(), 31);
    }

    #[test]
    fn isolated_vertices_become_markers() {
        let lengths = [Some(2), None, Some(2), None];
        let (_, avg) = single_pixel(&lengths);
        let svg = render_polar_svg(&avg, 100).unwrap();
        assert_eq!(svg.matches(r#"<circle class="cld""#).count(), 2);
    }

    #[test]
    fn all_missing_is_degenerate() {
        let (_, avg) = single_pixel(&[None; 4]);
        assert!(matches!(render_polar_svg(&avg, 100), Err(Error::Degenerate(_))));
    }

    #[test]
    fn radii_follow_means() {
        let lengths: Vec<Option<u32>> = (1..=8).map(Some).collect();
        let (_, avg) = single_pixel(&lengths);
        let vertices = polar_vertices(&avg, 400).unwrap();
        let radii: Vec<f64> = vertices
            .iter()
            .flatten()
            .map(|(x, y)| ((x - 200.0).powi(2) + (y - 200.0).powi(2)).sqrt())
            .collect();
        assert!(radii.windows(2).all(|w| w[0] < w[1]));
        assert!((radii[7] - 180.0).abs() < 2e-3);
    }

    #[test]
    fn png_is_deterministic() {
        let img = GrayImage::from_fn(5, 7, |r, c| (r * 40 + c) as u8).unwrap();
        let a = encode_png(&gray_base(&img)).unwrap();
        let b = encode_png(&gray_base(&img)).unwrap();
        assert_eq!(a, b);
        let decoded = image::load_from_memory(&a).unwrap().to_rgb8();
        assert_eq!(decoded, gray_base(&img));
    }
}
