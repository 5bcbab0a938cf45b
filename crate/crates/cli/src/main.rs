//! `envest`: estimate environment lighting from reference images, render with an
//! estimated map, and visualize photometric error.
//!
//! Exit codes: 0 on success (estimation converged), 2 when estimation stopped at the
//! round cap, 1 on invalid input or any other failure.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use envest_core::io::SceneConfig;

#[derive(Debug, Parser)]
#[command(name = "envest", version, about = "Environment-light estimation for reconstructed scenes")]
struct Cli {
    /// Worker threads for tracing. Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Log warnings and errors only.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit an environment map to the reference views of a scene config.
    Estimate(EstimateArgs),
    /// Render every view of a scene config under a given environment map.
    Render(RenderArgs),
    /// Scaled absolute difference between a reference and a render.
    Errmap(ErrmapArgs),
}

/// Overrides shared by `estimate` and `render`; unset flags keep the config's values.
#[derive(Debug, Args)]
struct TraceArgs {
    /// Polar rings of the environment discretization [config default: 9].
    #[arg(long)]
    rings: Option<usize>,
    /// Path vertices that receive light samples (1 = direct light only).
    #[arg(long)]
    bounces: Option<usize>,
    /// Tracer RNG seed [config default: 0].
    #[arg(long)]
    seed: Option<u64>,
    /// Light samples per path vertex.
    #[arg(long)]
    light_samples: Option<usize>,
}

impl TraceArgs {
    fn apply(&self, cfg: &mut SceneConfig) {
        if let Some(r) = self.rings {
            cfg.rings = r;
        }
        if let Some(b) = self.bounces {
            cfg.trace.max_bounces = b;
        }
        if let Some(s) = self.seed {
            cfg.trace.rng_seed = s;
        }
        if let Some(n) = self.light_samples {
            cfg.trace.env_samples_per_vertex = n;
        }
    }
}

#[derive(Debug, Args)]
struct EstimateArgs {
    /// Scene config JSON, or the manifest.json of an earlier run.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; created only once estimation has succeeded.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    trace: TraceArgs,
    /// Samples per pixel when tracing Jacobians [config default: 64].
    #[arg(long)]
    spp: Option<usize>,
    /// Activation weight α; calibrated from the first round when unset.
    #[arg(long)]
    alpha: Option<f64>,
    /// Activation weight β [config default: 10].
    #[arg(long)]
    beta: Option<f64>,
    /// Cauchy scale, in units of the reference's 99th percentile [config default: 0.05].
    #[arg(long)]
    cauchy_c: Option<f64>,
    /// Maximum sequential Monte Carlo rounds [config default: 10].
    #[arg(long)]
    max_smc: Option<usize>,
    /// Multiplier applied to error maps.
    #[arg(long, default_value_t = 1.5)]
    error_scale: f64,
}

impl EstimateArgs {
    fn apply(&self, cfg: &mut SceneConfig) {
        self.trace.apply(cfg);
        if let Some(s) = self.spp {
            cfg.trace.samples_per_pixel = s;
        }
        if let Some(a) = self.alpha {
            cfg.objective.alpha = Some(a);
        }
        if let Some(b) = self.beta {
            cfg.objective.beta = b;
        }
        if let Some(c) = self.cauchy_c {
            cfg.objective.cauchy_scale = c;
        }
        if let Some(m) = self.max_smc {
            cfg.objective.max_smc_iters = m;
        }
    }
}

#[derive(Debug, Args)]
struct RenderArgs {
    /// Scene config JSON, or the manifest.json of an earlier run.
    #[arg(long)]
    config: PathBuf,
    /// Environment map JSON. Defaults to the map named by a manifest passed as --config.
    #[arg(long)]
    env: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    trace: TraceArgs,
    /// Samples per pixel [default: 1024, or the value recorded in a render manifest].
    #[arg(long)]
    spp: Option<usize>,
}

#[derive(Debug, Args)]
struct ErrmapArgs {
    /// Reference image (.pfm or .png).
    reference: PathBuf,
    /// Rendered image (.pfm or .png).
    render: PathBuf,
    /// Output image; the extension picks PFM or PNG.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1.5)]
    scale: f64,
    /// Validity mask for the reference; pixels that are zero in every channel become black.
    #[arg(long)]
    mask: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    env_logger::Builder::new()
        .filter_level(if cli.quiet { log::LevelFilter::Warn } else { log::LevelFilter::Info })
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("envest: error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> envest_core::Result<ExitCode> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(envest_core::Error::InvalidParameter("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| envest_core::Error::InvalidParameter(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Estimate(a) => commands::estimate(&a),
        Command::Render(a) => commands::render(&a),
        Command::Errmap(a) => commands::errmap(&a),
    }
}
