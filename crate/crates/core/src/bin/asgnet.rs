use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use asgnet::fixture::{synthetic_episode, FixtureSpec};
use asgnet::io::{write_tensor, Tensor};
use asgnet::pipeline::{compare_masks, run_pipeline, RunManifest, ShotPaths};
use asgnet::{Error, SgcConfig};

const EXIT_USAGE: u8 = 1;
const EXIT_IO: u8 = 2;
const EXIT_VALIDATION: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "asgnet",
    version,
    about = "Superpixel-guided prototypes and guided allocation on feature tensors"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Cluster support shots into prototypes and allocate them to a query.
    Run {
        /// Support shot as FEATURE,MASK tensor paths; repeat for k shots.
        #[arg(long = "shot", value_name = "FEATURE,MASK", required = true, value_parser = parse_shot)]
        shots: Vec<ShotPaths>,
        /// Query feature tensor.
        #[arg(long)]
        query: PathBuf,
        /// Average foreground area per seed, in pixels.
        #[arg(long = "s-sp", default_value_t = 100)]
        s_sp: usize,
        /// Maximum prototypes per shot.
        #[arg(long = "n-max", default_value_t = 5)]
        n_max: usize,
        /// Clustering iterations.
        #[arg(long, default_value_t = 5)]
        iters: usize,
        /// Spatial weighting factor [default: sqrt(s-sp)].
        #[arg(long)]
        r: Option<f64>,
        /// Projection weights, an out x (2c+1) f32 tensor.
        #[arg(long)]
        proj: Option<PathBuf>,
        /// Projection bias, an out x 1 f32 tensor.
        #[arg(long = "proj-bias", requires = "proj")]
        proj_bias: Option<PathBuf>,
        /// Also write similarity planes as CSV.
        #[arg(long)]
        csv: bool,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Print IoU and FB-IoU between two mask tensors.
    Compare { pred: PathBuf, gt: PathBuf },
    /// Write a seeded synthetic episode (support/query features and masks).
    Fixture {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        shots: usize,
        #[arg(long, default_value_t = 8)]
        channels: usize,
        #[arg(long, default_value_t = 32)]
        size: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_shot(s: &str) -> Result<ShotPaths, String> {
    let (feature, mask) = s
        .split_once(',')
        .ok_or_else(|| format!("expected FEATURE,MASK, got {s:?}"))?;
    Ok(ShotPaths {
        feature: feature.into(),
        mask: mask.into(),
    })
}

fn write_fixture(
    seed: u64,
    shots: usize,
    channels: usize,
    size: usize,
    out: PathBuf,
) -> asgnet::Result<()> {
    let spec = FixtureSpec {
        channels,
        height: size,
        width: size,
        ..FixtureSpec::default()
    };
    let episode = synthetic_episode(seed, shots, &spec)?;
    std::fs::create_dir_all(&out)?;
    for (k, (feat, mask)) in episode.support.iter().enumerate() {
        write_tensor(out.join(format!("support_{k}.asgt")), &Tensor::from(feat))?;
        write_tensor(
            out.join(format!("support_{k}_mask.asgt")),
            &Tensor::from(mask),
        )?;
        println!("support_{k}: N_m={}", mask.count());
    }
    write_tensor(out.join("query.asgt"), &Tensor::from(&episode.query))?;
    write_tensor(
        out.join("query_mask.asgt"),
        &Tensor::from(&episode.query_mask),
    )?;
    Ok(())
}

fn execute(command: Command) -> asgnet::Result<()> {
    match command {
        Command::Run {
            shots,
            query,
            s_sp,
            n_max,
            iters,
            r,
            proj,
            proj_bias,
            csv,
            out,
        } => {
            let mut config = SgcConfig::new(s_sp, n_max, iters);
            if let Some(r) = r {
                config = config.with_spatial_factor(r);
            }
            let manifest = RunManifest {
                shots,
                query,
                config,
                projection: proj,
                projection_bias: proj_bias,
                out_dir: out,
                csv,
            };
            let report = run_pipeline(&manifest)?;
            print!("{report}");
        }
        Command::Compare { pred, gt } => print!("{}", compare_masks(pred, gt)?),
        Command::Fixture {
            seed,
            shots,
            channels,
            size,
            out,
        } => write_fixture(seed, shots, channels, size, out)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::InvalidConfig(_) | Error::NonPositiveFactor(_) => EXIT_USAGE,
                ref e if e.is_io() => EXIT_IO,
                _ => EXIT_VALIDATION,
            })
        }
    }
}
