use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cldmap::pipeline::{DEFAULT_SVG_SIZE, DEFAULT_TAU_PRIME, DEFAULT_TAU_SECOND};
use cldmap::{AnalyzeOptions, CliError, ExportFormat, MapKind, Orientation, Scene};
use cldmap_core::Normalization;

#[derive(Parser, Debug)]
#[command(
    name = "cldmap",
    version,
    about = "Coherence length diagrams and defect maps of grayscale images"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute the coherence length diagram and the derived maps of an image.
    Analyze(AnalyzeArgs),
    /// Write a synthetic test image.
    Generate(GenerateArgs),
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
enum NormalizationArg {
    /// Divide the ray sum by the number of samples.
    Count,
    /// Divide the ray sum by the ray length.
    Literal,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    /// PNG or PGM input image.
    input: PathBuf,

    /// Relative tolerance for the local coherence length.
    #[arg(long, default_value_t = cldmap_core::config::DEFAULT_TAU)]
    tau: f64,

    /// Band half-width for the defect map.
    #[arg(long, default_value_t = DEFAULT_TAU_PRIME)]
    tau_prime: f64,

    /// Band half-width for the directional defect map, relative to the mean Q̃.
    /// There is no established value; the default of 0.5 is arbitrary.
    #[arg(long, default_value_t = DEFAULT_TAU_SECOND)]
    tau_second: f64,

    /// Number of ray directions, a multiple of 4.
    #[arg(long, default_value_t = cldmap_core::config::DEFAULT_DIRECTIONS)]
    directions: usize,

    #[arg(long, value_enum, default_value = "count")]
    normalization: NormalizationArg,

    /// Cap on the ray length (default: image diagonal).
    #[arg(long)]
    r_max: Option<usize>,

    /// Average Q̃ over all pixels instead of the pixels where it is defined.
    #[arg(long)]
    literal_q_mean: bool,

    /// Artifacts to write.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "cld,smap,dmap,ddmap,mmap")]
    maps: Vec<MapKind>,

    #[arg(long, default_value = ".")]
    out_dir: PathBuf,

    /// Worker threads (default: hardware parallelism). Never changes the output.
    #[arg(long, env = "CLDMAP_THREADS")]
    threads: Option<usize>,

    /// Format of the diagram export.
    #[arg(long, value_enum, default_value = "json")]
    format: ExportFormat,

    /// Side length of the polar diagram in pixels.
    #[arg(long, default_value_t = DEFAULT_SVG_SIZE)]
    svg_size: u32,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[command(subcommand)]
    scene: SceneArgs,

    #[arg(long, global = true, default_value_t = 64)]
    height: usize,

    #[arg(long, global = true, default_value_t = 64)]
    width: usize,

    /// Output file; `.pgm` writes binary PGM, anything else PNG.
    #[arg(short, long, global = true, default_value = "scene.png")]
    output: PathBuf,
}

#[derive(Subcommand, Debug)]
enum SceneArgs {
    /// Uniform brightness.
    Constant {
        #[arg(long, default_value_t = 100)]
        value: u8,
    },
    /// Parallel bands of two brightness levels.
    Stripes {
        #[arg(long, default_value_t = 8)]
        period: usize,
        #[arg(long, default_value_t = 100)]
        low: u8,
        #[arg(long, default_value_t = 150)]
        high: u8,
        #[arg(long, value_enum, default_value = "vertical")]
        orientation: Orientation,
    },
    /// Chessboard, optionally with one cell's colors swapped.
    Chessboard {
        #[arg(long, default_value_t = 8)]
        cell: usize,
        #[arg(long, default_value_t = 0)]
        low: u8,
        #[arg(long, default_value_t = 255)]
        high: u8,
        /// Zero-based cell coordinates `ROW,COL` of the flipped cell.
        #[arg(long, value_parser = parse_cell)]
        defect: Option<(usize, usize)>,
    },
    /// Disks of one brightness scattered on a uniform background.
    Dots {
        #[arg(long, default_value_t = 128)]
        background: u8,
        #[arg(long, default_value_t = 255)]
        value: u8,
        #[arg(long, default_value_t = 2)]
        radius: usize,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

fn parse_cell(s: &str) -> Result<(usize, usize), String> {
    let (r, c) = s.split_once(',').ok_or("expected ROW,COL")?;
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| e.to_string());
    Ok((parse(r)?, parse(c)?))
}

impl From<SceneArgs> for Scene {
    fn from(args: SceneArgs) -> Self {
        match args {
            SceneArgs::Constant { value } => Scene::Constant { value },
            SceneArgs::Stripes {
                period,
                low,
                high,
                orientation,
            } => Scene::Stripes {
                period,
                low,
                high,
                orientation,
            },
            SceneArgs::Chessboard {
                cell,
                low,
                high,
                defect,
            } => Scene::Chessboard {
                cell,
                low,
                high,
                defect,
            },
            SceneArgs::Dots {
                background,
                value,
                radius,
                count,
                seed,
            } => Scene::Dots {
                background,
                value,
                radius,
                count,
                seed,
            },
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze(args) => {
            let mut opts = AnalyzeOptions::new(args.input, args.out_dir);
            opts.tau = args.tau;
            opts.tau_prime = args.tau_prime;
            opts.tau_second = args.tau_second;
            opts.directions = args.directions;
            opts.normalization = match args.normalization {
                NormalizationArg::Count => Normalization::Count,
                NormalizationArg::Literal => Normalization::Literal,
            };
            opts.r_max = args.r_max;
            opts.literal_q_mean = args.literal_q_mean;
            opts.maps = args.maps;
            opts.format = args.format;
            opts.threads = args.threads;
            opts.svg_size = args.svg_size;
            let summary = cldmap::analyze(&opts)?;
            println!("{summary}");
        }
        Command::Generate(args) => {
            let manifest = cldmap::generate(&args.scene.into(), args.height, args.width, &args.output)?;
            println!("wrote {} ({})", args.output.display(), manifest.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cldmap: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
