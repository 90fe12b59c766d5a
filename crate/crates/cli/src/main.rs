use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tracing_subscriber::EnvFilter;

use resultline_cli::server::{shutdown_signal, Server};
use resultline_cli::{audit_tail, load_config, load_results, load_students, open_store, CliError, IngestReport};
use resultline_core::clock::{Seconds, Timestamp};
use resultline_core::sim::{run_script, Script, SimConfig, DEFAULT_SCRIPT_START};
use resultline_core::{Gateway, GatewayConfig, RecordsStore};

/// SMS result-checking gateway: operator tool.
#[derive(Debug, Parser)]
#[command(name = "resultline", version)]
struct Cli {
    /// Directory holding students.tsv, results.tsv, messages.log and audit.log.
    #[arg(long, global = true, env = "RESULTLINE_DATA_DIR")]
    data_dir: Option<PathBuf>,

    /// Gateway config file (`key = value` lines).
    #[arg(long, global = true, env = "RESULTLINE_CONFIG")]
    config: Option<PathBuf>,

    /// Seed for question selection; overrides the config file.
    #[arg(long, global = true, env = "RESULTLINE_SEED")]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the gateway and the simulated SMSC over HTTP.
    Serve {
        #[arg(long, env = "RESULTLINE_PORT", default_value_t = 8080)]
        port: u16,
        #[arg(long, env = "RESULTLINE_HOST", default_value = "127.0.0.1")]
        host: IpAddr,
    },
    /// Upsert student bio-data and security questions from CSV.
    LoadStudents { file: PathBuf },
    /// Upsert course results from CSV.
    LoadResults { file: PathBuf },
    /// Print the last N audit entries.
    AuditTail {
        #[arg(short, long, default_value_t = 20)]
        n: usize,
    },
    /// Replay a script on a virtual clock and print the transcript.
    ///
    /// The store under --data-dir is read but never written.
    RunScript {
        file: PathBuf,
        /// Start time of the virtual clock (RFC 3339).
        #[arg(long)]
        start: Option<Timestamp>,
        /// Seconds between a submit and delivery to the gateway.
        #[arg(long, default_value_t = 0)]
        latency: u64,
    },
}

fn data_dir(cli: &Cli) -> Result<&Path, CliError> {
    cli.data_dir
        .as_deref()
        .ok_or_else(|| CliError::Usage("--data-dir (or RESULTLINE_DATA_DIR) is required".into()))
}

fn print_report(report: &IngestReport) {
    for (line, reason) in &report.rejects {
        eprintln!("line {line}: {reason}");
    }
    println!("{report}");
}

fn ingest(
    cli: &Cli,
    config: &GatewayConfig,
    load: fn(&mut RecordsStore, &Path) -> Result<IngestReport, CliError>,
    file: &Path,
) -> Result<(), CliError> {
    let mut store = open_store(data_dir(cli)?, config)?;
    let report = load(&mut store, file)?;
    store.sync_all()?;
    print_report(&report);
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = load_config(cli.config.as_deref(), cli.seed)?;
    match &cli.command {
        Command::Serve { port, host } => {
            let store = open_store(data_dir(&cli)?, &config)?;
            let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::io("runtime", e))?;
            runtime.block_on(async {
                let server = Server::bind(SocketAddr::new(*host, *port), Gateway::new(config, store)).await?;
                println!("listening on http://{}", server.local_addr()?);
                let _ = std::io::stdout().flush();
                server.run(shutdown_signal()).await
            })
        }
        Command::LoadStudents { file } => ingest(&cli, &config, load_students, file),
        Command::LoadResults { file } => ingest(&cli, &config, load_results, file),
        Command::AuditTail { n } => {
            for line in audit_tail(data_dir(&cli)?, *n)? {
                println!("{line}");
            }
            Ok(())
        }
        Command::RunScript { file, start, latency } => {
            let text = std::fs::read_to_string(file).map_err(|e| CliError::io(file, e))?;
            let script = Script::parse(&text)?;
            let store = match &cli.data_dir {
                Some(dir) => open_store(dir, &config)?.fork_data(),
                None => RecordsStore::in_memory(config.auth.challenge_width),
            };
            let sim = SimConfig {
                latency: Seconds(*latency),
            };
            let start = start.unwrap_or(DEFAULT_SCRIPT_START);
            let out = run_script(Gateway::new(config, store), &script, start, sim)?;
            print!("{}", out.transcript);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_env("RESULTLINE_LOG").unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
