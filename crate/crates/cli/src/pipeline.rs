use std::fs;
use std::path::{Path, PathBuf};

use cldmap_core::image::decode_image;
use cldmap_core::render::{
    encode_png, render_ddmap_overlay, render_defect_overlay, render_mixed_overlay, render_polar_svg,
    render_support_overlay,
};
use cldmap_core::{
    average_cld, compute_local_field, defect_map, directional_defect_map, mixed_map, support_map, AnalysisConfig,
    GrayImage, Normalization, QMean,
};
use image::ImageEncoder;

use crate::error::CliError;
use crate::export::{sha256_hex, CldExport, GeneratorRecord, InputRecord, Parameters, RunManifest};
use crate::generate::Scene;

pub const DEFAULT_TAU_PRIME: f64 = 0.50;
/// A working default with no canonical value behind it.
pub const DEFAULT_TAU_SECOND: f64 = 0.50;
pub const DEFAULT_SVG_SIZE: u32 = 512;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, clap::ValueEnum)]
pub enum MapKind {
    Cld,
    Smap,
    Dmap,
    Ddmap,
    Mmap,
}

impl MapKind {
    pub const ALL: [MapKind; 5] = [
        MapKind::Cld,
        MapKind::Smap,
        MapKind::Dmap,
        MapKind::Ddmap,
        MapKind::Mmap,
    ];
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum ExportFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug)]
pub struct AnalyzeOptions {
    pub input: PathBuf,
    pub out_dir: PathBuf,
    pub tau: f64,
    pub tau_prime: f64,
    pub tau_second: f64,
    pub directions: usize,
    pub normalization: Normalization,
    pub r_max: Option<usize>,
    pub literal_q_mean: bool,
    pub maps: Vec<MapKind>,
    pub format: ExportFormat,
    pub threads: Option<usize>,
    pub svg_size: u32,
}

impl AnalyzeOptions {
    pub fn new(input: impl Into<PathBuf>, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            input: input.into(),
            out_dir: out_dir.into(),
            tau: cldmap_core::config::DEFAULT_TAU,
            tau_prime: DEFAULT_TAU_PRIME,
            tau_second: DEFAULT_TAU_SECOND,
            directions: cldmap_core::config::DEFAULT_DIRECTIONS,
            normalization: Normalization::Count,
            r_max: None,
            literal_q_mean: false,
            maps: MapKind::ALL.to_vec(),
            format: ExportFormat::Json,
            threads: None,
            svg_size: DEFAULT_SVG_SIZE,
        }
    }
}

/// Headline numbers printed after a run.
#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub anisotropy: Option<f64>,
    pub defined_fraction: f64,
    pub mean_q: f64,
    pub outputs: Vec<String>,
}

impl std::fmt::Display for Summary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let aniso = self.anisotropy.map_or_else(|| "n/a".to_string(), |a| format!("{a:.4}"));
        write!(
            f,
            "anisotropy={aniso} defined_fraction={:.4} mean_q={:.6} outputs={}",
            self.defined_fraction,
            self.mean_q,
            self.outputs.join(",")
        )
    }
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), CliError> {
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|source| CliError::Output {
        path: path.display().to_string(),
        source,
    })
}

fn with_threads<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match threads {
        None => Ok(job()),
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Internal(e.to_string()))?;
            Ok(pool.install(job))
        }
    }
}

/// Runs the full analysis of one image and writes the requested artifacts
/// plus `manifest.json` into `out_dir`.
pub fn analyze(opts: &AnalyzeOptions) -> Result<Summary, CliError> {
    let bytes = fs::read(&opts.input).map_err(|source| cldmap_core::Error::Input {
        path: opts.input.clone(),
        source,
    })?;
    let img = decode_image(&bytes)?;
    let config = AnalysisConfig::new(opts.tau, opts.normalization)?
        .with_directions(opts.directions)
        .with_r_max_cap(opts.r_max);
    if opts.r_max == Some(0) {
        return Err(CliError::Usage("--r-max must be at least 1".into()));
    }
    if opts.maps.is_empty() {
        return Err(CliError::Usage("--maps must name at least one map".into()));
    }
    let q_mode = if opts.literal_q_mean {
        QMean::AllPixels
    } else {
        QMean::DefinedPixels
    };

    let field = with_threads(opts.threads, || compute_local_field(&img, &config))??;
    let avg = average_cld(&field);
    let dmap = defect_map(&field, &avg, opts.tau_prime)?;
    let ddmap = directional_defect_map(&field, &avg, opts.tau_second, q_mode)?;
    let export = CldExport::new(&field, &avg, &ddmap, img.global_mean().value());

    fs::create_dir_all(&opts.out_dir).map_err(|source| CliError::Output {
        path: opts.out_dir.display().to_string(),
        source,
    })?;

    let mut maps = opts.maps.clone();
    maps.sort();
    maps.dedup();
    let mut artifacts: Vec<(String, Vec<u8>)> = Vec::new();
    for kind in maps {
        match kind {
            MapKind::Cld => {
                let svg = render_polar_svg(&avg, opts.svg_size)?;
                match opts.format {
                    ExportFormat::Json => artifacts.push(("cld.json".into(), export.to_json().into_bytes())),
                    ExportFormat::Csv => artifacts.push(("cld.csv".into(), export.to_csv().into_bytes())),
                }
                artifacts.push(("cld.svg".into(), svg.into_bytes()));
            }
            MapKind::Smap => {
                let overlay = render_support_overlay(&img, &support_map(&field))?;
                artifacts.push(("smap.png".into(), encode_png(&overlay)?));
            }
            MapKind::Dmap => {
                let overlay = render_defect_overlay(&img, &dmap)?;
                artifacts.push(("dmap.png".into(), encode_png(&overlay)?));
            }
            MapKind::Ddmap => {
                let overlay = render_ddmap_overlay(&img, &ddmap)?;
                artifacts.push(("ddmap.png".into(), encode_png(&overlay)?));
            }
            MapKind::Mmap => {
                let mixed = mixed_map(dmap.clone(), ddmap.clone())?;
                let overlay = render_mixed_overlay(&img, &mixed)?;
                artifacts.push(("mmap.png".into(), encode_png(&overlay)?));
            }
        }
    }

    let mut manifest = RunManifest::new("analyze");
    manifest.input = Some(InputRecord {
        path: opts.input.display().to_string(),
        sha256: sha256_hex(&bytes),
    });
    manifest.parameters = Some(Parameters {
        tau: opts.tau,
        tau_prime: opts.tau_prime,
        tau_second: opts.tau_second,
        directions: opts.directions,
        normalization: opts.normalization.to_string(),
        r_max_cap: opts.r_max,
        r_max: field.r_max(),
        literal_q_mean: opts.literal_q_mean,
        format: match opts.format {
            ExportFormat::Json => "json".into(),
            ExportFormat::Csv => "csv".into(),
        },
    });
    manifest.outputs = artifacts.iter().map(|(name, _)| name.clone()).collect();

    // manifest first, so no artifact exists without one
    write_file(&opts.out_dir, "manifest.json", manifest.to_json().as_bytes())?;
    for (name, bytes) in &artifacts {
        write_file(&opts.out_dir, name, bytes)?;
    }

    let mut outputs = manifest.outputs;
    outputs.push("manifest.json".into());
    Ok(Summary {
        anisotropy: avg.anisotropy(),
        defined_fraction: export.defined_pixel_fraction,
        mean_q: ddmap.mean_q(),
        outputs,
    })
}

/// Encodes a grayscale image as PNG, or binary PGM when the path ends in `.pgm`.
pub fn encode_gray(img: &GrayImage, path: &Path) -> Result<Vec<u8>, CliError> {
    let is_pgm = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("pgm"));
    let luma = img.to_luma8();
    let mut out = Vec::new();
    let written = if is_pgm {
        use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
        PnmEncoder::new(&mut out)
            .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
            .write_image(luma.as_raw(), luma.width(), luma.height(), image::ExtendedColorType::L8)
    } else {
        image::codecs::png::PngEncoder::new(&mut out).write_image(
            luma.as_raw(),
            luma.width(),
            luma.height(),
            image::ExtendedColorType::L8,
        )
    };
    written.map_err(|e| CliError::Internal(e.to_string()))?;
    Ok(out)
}

/// Renders a scene, writes it, and writes `<stem>.manifest.json` beside it.
pub fn generate(scene: &Scene, height: usize, width: usize, output: &Path) -> Result<PathBuf, CliError> {
    let img = scene.render(height, width)?;
    let bytes = encode_gray(&img, output)?;
    let dir = output
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|source| CliError::Output {
        path: dir.display().to_string(),
        source,
    })?;
    let file_name = output
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| CliError::Usage(format!("invalid output path {}", output.display())))?;
    let stem = output.file_stem().and_then(|s| s.to_str()).unwrap_or(file_name);
    let manifest_name = format!("{stem}.manifest.json");

    let mut manifest = RunManifest::new("generate");
    manifest.generator = Some(GeneratorRecord {
        scene: scene.clone(),
        height,
        width,
        sha256: sha256_hex(&bytes),
    });
    manifest.outputs = vec![file_name.to_string()];
    write_file(dir, &manifest_name, manifest.to_json().as_bytes())?;
    write_file(dir, file_name, &bytes)?;
    Ok(dir.join(manifest_name))
}
