use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use risdepth::depthmap::{Interp, Window};
use risdepth::pipeline::{self, RunOptions, RunReport};
use risdepth::Error;

/// RIS-aided FMCW scene depth simulator.
#[derive(Debug, Parser)]
#[command(name = "risdepth", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a sweep and estimate the depth map.
    Run {
        config: PathBuf,
        /// Noise seed; overrides the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (default: available parallelism).
        #[arg(long)]
        workers: Option<usize>,
        /// Also write the sensing matrix here.
        #[arg(long, value_name = "PATH")]
        z_dump: Option<PathBuf>,
        /// Skip the sweep and process this sensing-matrix dump.
        #[arg(long, value_name = "PATH")]
        replay: Option<PathBuf>,
        /// Resample the depth map to WxH.
        #[arg(long, value_name = "WxH", value_parser = pipeline::parse_size)]
        upscale: Option<(usize, usize)>,
        #[arg(long, value_parser = ["rect", "hann"])]
        window: Option<String>,
        #[arg(long, value_parser = ["nearest", "bilinear"])]
        interp: Option<String>,
    },
    /// List every constraint violation in a config without running it.
    Validate { config: PathBuf },
}

fn error_json(e: &Error) -> String {
    let mut obj = serde_json::json!({
        "error": e.kind(),
        "message": e.to_string(),
    });
    if let Error::InvalidConfig(v) = e {
        obj["violations"] = serde_json::json!(v);
    }
    obj.to_string()
}

fn summary(r: &RunReport) -> String {
    let d = &r.outcome.derived;
    let s = &r.setup;
    let m = r.outcome.codebook.len();
    let mut out = String::new();
    let mut row = |k: &str, v: String| {
        let _ = writeln!(out, "{k:<24} {v}");
    };
    row("bandwidth", format!("{:.3} GHz", d.bandwidth_hz / 1e9));
    row(
        "range resolution",
        format!("{:.2} cm", d.range_resolution_m * 100.0),
    );
    row("max range", format!("{:.2} m", d.max_range_m));
    row("chirp rate", format!("{:.2} kHz", d.chirp_rate_hz / 1e3));
    row(
        "depth map rate",
        format!("{:.3} Hz", d.depth_map_rate_hz(m)),
    );
    row(
        "RIS elements",
        format!("{}x{}", s.geometry.n_h, s.geometry.n_v),
    );
    row(
        "codebook size",
        format!("{m} ({}x{})", s.grid.nbar_h(), s.grid.nbar_v()),
    );
    row("feed distance", format!("{:.4} m", r.outcome.delta1));
    row("paths", s.paths.len().to_string());
    row("seed", r.outcome.seed.to_string());
    if let Some(mt) = r.outcome.metrics {
        row("RMSE", format!("{:.4} m", mt.rmse));
        row("MAE", format!("{:.4} m", mt.mae));
    }
    if let (Some(mt), Some((w, h))) = (r.outcome.upscaled_metrics, s.upscale) {
        row(&format!("RMSE @ {w}x{h}"), format!("{:.4} m", mt.rmse));
        row(&format!("MAE @ {w}x{h}"), format!("{:.4} m", mt.mae));
    }
    if !r.outcome.targets.is_empty() {
        let _ = writeln!(
            out,
            "\n{:>6} {:>9} {:>10} {:>10} {:>10}",
            "target", "pixel", "truth_m", "est_m", "error_m"
        );
        for t in &r.outcome.targets {
            let _ = writeln!(
                out,
                "{:>6} {:>9} {:>10.4} {:>10.4} {:>10.4}",
                t.id,
                format!("{},{}", t.row, t.col),
                t.truth_m,
                t.estimate_m,
                t.error_m
            );
        }
    }
    out
}

fn run(config: &Path, opts: RunOptions) -> Result<(), Error> {
    eprintln!("risdepth: running {}", config.display());
    let report = pipeline::run(config, &opts)?;
    for w in &report.outcome.warnings {
        eprintln!("risdepth: warning: {w}");
    }
    for p in &report.artifacts {
        eprintln!("risdepth: wrote {}", p.display());
    }
    print!("{}", summary(&report));
    Ok(())
}

fn validate(config: &Path) -> Result<bool, Error> {
    let cfg = pipeline::load_config(config)?;
    let base = config.parent().unwrap_or(Path::new("."));
    let violations = pipeline::validate(&cfg, base);
    if violations.is_empty() {
        println!("ok");
    }
    for v in &violations {
        println!("violation: {v}");
    }
    Ok(violations.is_empty())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            seed,
            workers,
            z_dump,
            replay,
            upscale,
            window,
            interp,
        } => {
            let opts = RunOptions {
                seed,
                workers,
                z_dump,
                replay,
                upscale,
                window: window.map(|w| w.parse::<Window>().expect("restricted by clap")),
                interp: interp.map(|i| i.parse::<Interp>().expect("restricted by clap")),
            };
            run(&config, opts).map(|_| true)
        }
        Command::Validate { config } => validate(&config),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("{}", error_json(&e));
            ExitCode::FAILURE
        }
    }
}
