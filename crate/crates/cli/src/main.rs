use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dialogforge::backend::{API_KEY_ENV, BASE_URL_ENV};
use dialogforge::RenderOptions;
use dialogforge_cli::{
    cmd_batch, cmd_filter, cmd_flow, cmd_generate, cmd_print, cmd_star_run, Failure, Overrides,
    RunSpec,
};
use tracing_subscriber::EnvFilter;

#[derive(Parser)]
#[command(
    name = "dialogforge",
    version,
    about = "Generate, inspect and analyse synthetic dialogs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SpecArgs {
    /// Run file (JSON).
    #[arg(long)]
    spec: PathBuf,
    /// Output directory, overriding the run file.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_turns: Option<usize>,
    #[arg(long, env = BASE_URL_ENV)]
    base_url: Option<String>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long, env = API_KEY_ENV, hide_env_values = true)]
    api_key: Option<String>,
}

impl SpecArgs {
    fn load(&self) -> Result<RunSpec, Failure> {
        let mut spec = RunSpec::load(&self.spec)?;
        spec.apply(&Overrides {
            base_url: self.base_url.clone(),
            model: self.model.clone(),
            api_key: self.api_key.clone(),
            seed: self.seed,
            max_turns: self.max_turns,
            output: self.output.clone(),
        });
        Ok(spec)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one dialog and write it as JSON.
    Generate {
        #[command(flatten)]
        spec: SpecArgs,
        /// Output file; defaults to <output>/dialog.json.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also print the rendered dialog.
        #[arg(long)]
        print: bool,
    },
    /// Run n dialogs with ids 0..n and seeds seed+i.
    Batch {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Simulate dialogs for scenarios of a dataset root.
    StarRun {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        root: PathBuf,
        #[arg(long, num_args = 0..)]
        ids: Vec<u64>,
    },
    /// Pretty-print a dialog file (.json or .txt).
    Print {
        file: PathBuf,
        #[arg(long)]
        scenario: bool,
        #[arg(long)]
        orchestration: bool,
        #[arg(long)]
        color: bool,
    },
    /// List dialog files matching length and content filters.
    Filter {
        pattern: String,
        #[arg(long, default_value_t = 0)]
        min_turns: usize,
        #[arg(long)]
        contains: Option<String>,
    },
    /// Export the action-transition graph of a corpus as DOT.
    Flow {
        pattern: String,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<i32, Failure> {
    match cli.command {
        Command::Generate { spec, out, print } => {
            let spec = spec.load()?;
            let (path, dialog) = cmd_generate(&spec, out.as_deref())?;
            if print {
                print!(
                    "{}",
                    dialogforge::render_dialog(&dialog, RenderOptions::default())
                );
            }
            eprintln!("wrote {}", path.display());
        }
        Command::Batch { spec, n, workers } => {
            let spec = spec.load()?;
            let paths = cmd_batch(&spec, n, workers)?;
            eprintln!(
                "wrote {} dialogs to {}",
                paths.len(),
                spec.output_dir().display()
            );
        }
        Command::StarRun { spec, root, ids } => {
            let spec = spec.load()?;
            let report = cmd_star_run(&root, &ids, &spec)?;
            for path in &report.written {
                eprintln!("wrote {}", path.display());
            }
            for (id, e) in &report.failed {
                eprintln!("error: scenario {id}: {e}");
            }
            return Ok(report.exit_code());
        }
        Command::Print {
            file,
            scenario,
            orchestration,
            color,
        } => {
            let text = cmd_print(
                &file,
                RenderOptions {
                    show_scenario: scenario,
                    show_orchestration: orchestration,
                    color,
                },
            )?;
            print!("{text}");
        }
        Command::Filter {
            pattern,
            min_turns,
            contains,
        } => {
            let paths = cmd_filter(&pattern, min_turns, contains.as_deref())?;
            for p in &paths {
                println!("{}", p.display());
            }
            let mut summary = format!(
                "Found {} dialogues with at least {min_turns} turns",
                paths.len()
            );
            if let Some(c) = &contains {
                summary.push_str(&format!(" mentioning {c:?}"));
            }
            eprintln!("{summary}");
        }
        Command::Flow {
            pattern,
            k,
            seed,
            out,
        } => {
            cmd_flow(&pattern, k, seed, &out)?;
            eprintln!("wrote {}", out.display());
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("warn")),
        )
        .with_writer(std::io::stderr)
        .init();
    let code = match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
