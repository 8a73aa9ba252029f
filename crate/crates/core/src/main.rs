use std::fs::File;
use std::io::{BufWriter, Write};
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use busview::api;
use busview::ingest::{self, AlignOptions, InputPaths, DEFAULT_CAPACITY_THRESHOLD};
use busview::server::{self, ServerOptions};
use busview::synth::{self, SynthConfig};
use busview::Store;

/// Bus adherence and ridership analytics.
#[derive(Parser)]
#[command(name = "busview", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse, validate, and align raw files into a snapshot.
    Ingest(IngestArgs),
    /// Write a seeded synthetic corpus.
    Synth(SynthArgs),
    /// Write one API response body to a file.
    Export(ExportArgs),
    /// Serve the JSON API (and optionally the UI) from a snapshot.
    Serve(ServeArgs),
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long)]
    adherence: PathBuf,
    #[arg(long)]
    counts: PathBuf,
    #[arg(long)]
    fares: PathBuf,
    #[arg(long)]
    network: PathBuf,
    /// Snapshot to write.
    #[arg(long)]
    out: PathBuf,
    /// Boardings above this are flagged as over capacity.
    #[arg(long, default_value_t = DEFAULT_CAPACITY_THRESHOLD)]
    max_boardings: u32,
    /// Tab-separated log of every rejected line.
    #[arg(long)]
    reject_log: Option<PathBuf>,
    /// Validation report as a flat JSON object.
    #[arg(long)]
    report_json: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 4)]
    routes: u32,
    /// Stops per route.
    #[arg(long, default_value_t = 20)]
    stops: u32,
    #[arg(long, default_value_t = 30)]
    days: u32,
    #[arg(long, default_value_t = 24)]
    trips_per_day: u32,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum What {
    Stops,
    Routes,
    Route,
    Search,
    Calendar,
    TripGrid,
    StopDay,
    Fares,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    snapshot: PathBuf,
    #[arg(long, value_enum)]
    what: What,
    /// `stop` or `route` (calendar).
    #[arg(long)]
    scope: Option<String>,
    /// Scope id (calendar) or route id (route).
    #[arg(long)]
    id: Option<String>,
    /// `adherence` or `ridership` (calendar).
    #[arg(long)]
    metric: Option<String>,
    #[arg(long)]
    from: Option<String>,
    #[arg(long)]
    to: Option<String>,
    /// Route id (trip-grid).
    #[arg(long)]
    route: Option<String>,
    /// Stop id (stop-day, fares).
    #[arg(long)]
    stop: Option<String>,
    /// Service date (trip-grid, stop-day).
    #[arg(long)]
    date: Option<String>,
    /// Search text.
    #[arg(long)]
    q: Option<String>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long)]
    snapshot: PathBuf,
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    bind: IpAddr,
    /// Send `Access-Control-Allow-Origin: *`.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    cors: bool,
    /// Directory of built UI assets to serve at `/`.
    #[arg(long)]
    ui: Option<PathBuf>,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn cmd_ingest(args: IngestArgs) -> Result<ExitCode> {
    let paths = InputPaths {
        adherence: args.adherence,
        counts: args.counts,
        fares: args.fares,
        network: args.network,
    };
    let options = AlignOptions {
        capacity_threshold: args.max_boardings,
    };
    let outcome = ingest::ingest_files(&paths, &options)?;
    println!("{}", outcome.report);

    if let Some(path) = &args.reject_log {
        ingest::write_reject_log(create(path)?, &outcome.rejected)
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    if let Some(path) = &args.report_json {
        let mut out = create(path)?;
        serde_json::to_writer_pretty(&mut out, &outcome.report.to_flat_json())?;
        writeln!(out)?;
        out.flush()?;
    }

    let accepted = outcome.report.adherence.accepted;
    let store = Store::build(outcome.network, outcome.events, outcome.fares)?;
    store
        .save_snapshot(&args.out)
        .with_context(|| format!("cannot write snapshot {}", args.out.display()))?;
    if accepted == 0 {
        eprintln!("no adherence records accepted");
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_synth(args: SynthArgs) -> Result<ExitCode> {
    let cfg = SynthConfig::new(args.seed, args.routes, args.stops, args.days, args.trips_per_day);
    let summary = synth::write_corpus(&cfg, &args.out)?;
    println!(
        "wrote {} adherence, {} count, {} fare rows to {}",
        summary.adherence_rows,
        summary.count_rows,
        summary.fare_rows,
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

/// Builds the request path and query an export corresponds to.
fn export_request(args: &ExportArgs) -> (String, String) {
    let mut query = form_urlencoded::Serializer::new(String::new());
    let mut add = |key: &str, value: &Option<String>| {
        if let Some(v) = value {
            query.append_pair(key, v);
        }
    };
    let path = match args.what {
        What::Stops => "/api/stops".to_string(),
        What::Routes => "/api/routes".to_string(),
        What::Route => {
            let id = args.id.as_deref().unwrap_or("");
            let encoded: String = form_urlencoded::byte_serialize(id.as_bytes()).collect();
            format!("/api/routes/{}", encoded.replace('+', "%20"))
        }
        What::Search => {
            add("q", &args.q);
            "/api/search".to_string()
        }
        What::Calendar => {
            add("scope", &args.scope);
            add("id", &args.id);
            add("metric", &args.metric);
            add("from", &args.from);
            add("to", &args.to);
            "/api/calendar".to_string()
        }
        What::TripGrid => {
            add("route", &args.route);
            add("date", &args.date);
            "/api/trip-grid".to_string()
        }
        What::StopDay => {
            add("stop", &args.stop);
            add("date", &args.date);
            "/api/stop-day".to_string()
        }
        What::Fares => {
            add("stop", &args.stop);
            "/api/fares".to_string()
        }
    };
    (path, query.finish())
}

fn cmd_export(args: ExportArgs) -> Result<ExitCode> {
    let store = Store::load_snapshot(&args.snapshot)
        .with_context(|| format!("cannot load snapshot {}", args.snapshot.display()))?;
    let (path, query) = export_request(&args);
    let body = match api::handle(&store, &path, &query) {
        Ok(body) => body,
        Err(err) => {
            eprintln!("error: {err}");
            return Ok(ExitCode::from(1));
        }
    };
    match &args.out {
        Some(file) => {
            let mut out = create(file)?;
            out.write_all(&body)?;
            out.flush()?;
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(&body)?;
            out.flush()?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_serve(args: ServeArgs) -> Result<ExitCode> {
    let store = Store::load_snapshot(&args.snapshot)
        .with_context(|| format!("cannot load snapshot {}", args.snapshot.display()))?;
    let addr = SocketAddr::new(args.bind, args.port);
    let options = ServerOptions {
        cors: args.cors,
        ui_dir: args.ui,
    };
    let runtime = tokio::runtime::Runtime::new()?;
    eprintln!("listening on http://{addr}");
    runtime.block_on(server::serve(Arc::new(store), addr, &options))?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ingest(a) => cmd_ingest(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Export(a) => cmd_export(a),
        Command::Serve(a) => cmd_serve(a),
    };
    result.unwrap_or_else(|err| {
        eprintln!("error: {err:#}");
        ExitCode::from(1)
    })
}
