use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use swimlab_cli::recipes::{run_recipe, RECIPES};
use swimlab_cli::{load_config, run, Overrides, Report, RunError, Stage};

#[derive(Parser)]
#[command(name = "swimlab", version, about = "Phase-coherent wave-field imaging")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Number of animation frames.
    #[arg(long)]
    frames: Option<usize>,
    /// Seed replacing the config's `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; outputs do not depend on this.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct WithConfig {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand)]
enum Command {
    /// Acquire the field and write the point cloud.
    Simulate(WithConfig),
    /// Acquire and render the image and dot graph.
    Render(WithConfig),
    /// Acquire and write an animation of the wave advancing.
    Animate(WithConfig),
    /// Acquire and measure wavelength, speed or fringe spacing.
    Analyze(WithConfig),
    /// Sweep the feedback bulb through a camera's view.
    Sightfield(WithConfig),
    /// Run a bundled reproduction.
    Recipe {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(RECIPES.iter().map(|r| r.name)))]
        name: String,
        #[command(flatten)]
        common: Common,
    },
}

fn execute(command: Command) -> Result<Report, RunError> {
    let (stage, with) = match command {
        Command::Recipe { name, common } => {
            let overrides = Overrides { seed: common.seed, frames: common.frames };
            return in_pool(common.workers, || run_recipe(&name, &common.out, &overrides));
        }
        Command::Simulate(w) => (Stage::Simulate, w),
        Command::Render(w) => (Stage::Render, w),
        Command::Animate(w) => (Stage::Animate, w),
        Command::Analyze(w) => (Stage::Analyze, w),
        Command::Sightfield(w) => (Stage::Sightfield, w),
    };
    let overrides = Overrides { seed: with.common.seed, frames: with.common.frames };
    let cfg = load_config(&with.config, &overrides)?;
    in_pool(with.common.workers, || run(&cfg, stage, &with.common.out))
}

fn in_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> Result<T, RunError> + Send) -> Result<T, RunError> {
    match workers {
        None => f(),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| RunError::new(swimlab_cli::ErrorKind::Config, e))?;
            pool.install(f)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(report) => {
            print!("{}", report.to_text());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
