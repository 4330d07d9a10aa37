use std::error::Error;
use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use zonecap_core::generation::GeneratorBackendKind;
use zonecap_core::imaging::{decode_png, encode_png};
use zonecap_core::lasso::Point;
use zonecap_eval::input::{read_participants, read_summaries, scores_by_group};
use zonecap_eval::{anova_from_raw, anova_from_summary, sus_mean, AnovaResult};
use zonecap_server::pipeline::{run_pipeline, PipelineOptions};
use zonecap_server::{App, ServerConfig};

#[derive(Parser)]
#[command(name = "zonecap", version, about = "Zone capture to 3D asset service")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP API.
    Serve {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides `bind` from the config and environment.
        #[arg(long)]
        bind: Option<String>,
    },
    /// Capture, isolate, generate and export from a single image.
    Pipeline(PipelineArgs),
    /// Usability-study statistics.
    Eval {
        #[command(subcommand)]
        command: EvalCommand,
    },
    /// Write the synthetic demo frame as PNG.
    Synth {
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long)]
    image: PathBuf,
    /// Zone vertices as `x,y;x,y;...`. Without it the red line in the image is used.
    #[arg(long, conflicts_with = "all")]
    zone_points: Option<String>,
    /// Segment the whole frame.
    #[arg(long)]
    all: bool,
    #[arg(long, value_enum, default_value_t = Backend::Stub)]
    backend: Backend,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    target_vertices: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Backend {
    Stub,
    External,
}

#[derive(Subcommand)]
enum EvalCommand {
    /// SUS scores per group and overall from a participant CSV.
    Sus {
        #[arg(long)]
        csv: PathBuf,
    },
    /// One-way ANOVA over groups from a participant CSV or a summary JSON.
    Anova {
        #[arg(long, conflicts_with = "summary", required_unless_present = "summary")]
        csv: Option<PathBuf>,
        #[arg(long)]
        summary: Option<PathBuf>,
    },
}

type AnyResult<T> = Result<T, Box<dyn Error>>;

fn open(path: &Path) -> AnyResult<File> {
    File::open(path).map_err(|e| format!("cannot open {}: {e}", path.display()).into())
}

fn print_json<T: Serialize>(value: &T) -> AnyResult<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn parse_points(text: &str) -> AnyResult<Vec<Point>> {
    text.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|pair| {
            let (x, y) = pair.split_once(',').ok_or_else(|| format!("`{pair}` is not `x,y`"))?;
            Ok((x.trim().parse()?, y.trim().parse()?))
        })
        .collect()
}

async fn serve(config: Option<PathBuf>, bind: Option<String>) -> AnyResult<()> {
    let mut cfg = ServerConfig::load(config.as_deref())?;
    if let Some(bind) = bind {
        cfg.bind = bind;
    }
    let listener = tokio::net::TcpListener::bind(&cfg.bind).await?;
    eprintln!("zonecap listening on http://{}", listener.local_addr()?);
    let shutdown = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    zonecap_server::serve_on(listener, App::new(cfg), shutdown).await?;
    Ok(())
}

fn pipeline(args: PipelineArgs) -> AnyResult<()> {
    let mut cfg = ServerConfig::load(args.config.as_deref())?;
    if let Some(n) = args.target_vertices {
        cfg.mesh.target_vertices = n;
        cfg.validate()?;
    }
    let bytes = std::fs::read(&args.image).map_err(|e| format!("cannot read {}: {e}", args.image.display()))?;
    let frame = decode_png(&bytes)?;
    let opts = PipelineOptions {
        zone: args.zone_points.as_deref().map(parse_points).transpose()?,
        all: args.all,
        backend: match args.backend {
            Backend::Stub => GeneratorBackendKind::Stub,
            Backend::External => GeneratorBackendKind::External,
        },
        out_dir: args.out,
    };
    let report = run_pipeline(&frame, &cfg, &opts)?;
    print_json(&report)?;
    if report.objects.iter().any(|o| o.error.is_some()) {
        return Err("some objects failed to generate".into());
    }
    Ok(())
}

#[derive(Serialize)]
struct GroupScore {
    group: String,
    n: usize,
    mean: f64,
}

#[derive(Serialize)]
struct SusReport {
    participants: usize,
    mean: Option<f64>,
    groups: Vec<GroupScore>,
}

fn eval(command: EvalCommand) -> AnyResult<()> {
    match command {
        EvalCommand::Sus { csv } => {
            let participants = read_participants(open(&csv)?)?;
            let responses: Vec<_> = participants.iter().map(|p| p.response.clone()).collect();
            let groups = scores_by_group(&participants)
                .into_iter()
                .map(|(group, s)| GroupScore { group, n: s.len(), mean: s.iter().sum::<f64>() / s.len() as f64 })
                .collect();
            print_json(&SusReport { participants: participants.len(), mean: sus_mean(&responses), groups })
        }
        EvalCommand::Anova { csv, summary } => {
            let result: AnovaResult = match (csv, summary) {
                (Some(csv), _) => {
                    let groups: Vec<Vec<f64>> =
                        scores_by_group(&read_participants(open(&csv)?)?).into_iter().map(|(_, s)| s).collect();
                    anova_from_raw(&groups)?
                }
                (None, Some(path)) => {
                    let summaries =
                        read_summaries(open(&path)?)?.iter().map(|s| s.to_summary()).collect::<Result<Vec<_>, _>>()?;
                    anova_from_summary(&summaries)?
                }
                (None, None) => return Err("either --csv or --summary is required".into()),
            };
            print_json(&result)
        }
    }
}

fn run(cli: Cli) -> AnyResult<()> {
    match cli.command {
        Command::Serve { config, bind } => {
            tokio::runtime::Builder::new_multi_thread().enable_all().build()?.block_on(serve(config, bind))
        }
        Command::Pipeline(args) => pipeline(args),
        Command::Eval { command } => eval(command),
        Command::Synth { out } => {
            std::fs::write(&out, encode_png(&zonecap_core::scene::demo_scene().render())?)?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
