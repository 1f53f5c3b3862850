use std::io::{self, BufReader, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use gridlayers::formula::{print_ref, RefSpec};
use gridlayers::scene::ArcToggles;
use gridlayers::session::{load_document, parse_ref, serve_stdio, serve_websocket, Session};
use gridlayers::tasks::TaskScript;
use gridlayers::{CellAddress, Workbook};

#[derive(Parser)]
#[command(name = "gridlayers", version, about = "Spreadsheet engine with layered overlays")]
struct Cli {
    /// Output style.
    #[arg(long, value_enum, global = true, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    /// One `key=value` record per line.
    Machine,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the value of a cell.
    Eval { workbook: PathBuf, cell: String },
    /// Print layered precedent edges of a cell.
    Deps {
        workbook: PathBuf,
        cell: String,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..))]
        depth: u32,
    },
    /// Replay a task script and compare against its expected end state.
    Replay { script: PathBuf },
    /// Run a session over stdio or a WebSocket port.
    Serve(ServeArgs),
}

#[derive(Args)]
#[command(group(ArgGroup::new("transport").required(true).args(["stdio", "port"])))]
struct ServeArgs {
    #[arg(long)]
    stdio: bool,
    #[arg(long)]
    port: Option<u16>,
    /// Workbook to open; an empty one otherwise.
    #[arg(long)]
    workbook: Option<PathBuf>,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Cmd::Eval { workbook, cell } => eval(&workbook, &cell, cli.format),
        Cmd::Deps { workbook, cell, depth } => deps(&workbook, &cell, depth as usize, cli.format),
        Cmd::Replay { script } => replay(&script, cli.format),
        Cmd::Serve(args) => serve(&args, cli.format),
    };
    match result {
        Ok(code) => code,
        Err(message) => {
            eprintln!("gridlayers: {message}");
            ExitCode::from(1)
        }
    }
}

fn open(path: &Path) -> Result<(Workbook, ArcToggles), String> {
    let doc = load_document(path).map_err(|(_, detail)| detail)?;
    let wb = doc.to_workbook().map_err(|e| format!("{}: {e}", path.display()))?;
    Ok((wb, doc.toggles))
}

fn cell_arg(wb: &Workbook, text: &str) -> Result<CellAddress, String> {
    match parse_ref(text, &wb.context(0))? {
        RefSpec::Cell(a) if a.sheet < wb.sheet_count() => Ok(a),
        RefSpec::Cell(_) => Err(format!("`{text}` names no sheet of the workbook")),
        _ => Err(format!("`{text}` is not a single cell")),
    }
}

fn eval(path: &Path, cell: &str, format: Format) -> Result<ExitCode, String> {
    let (wb, _) = open(path)?;
    let addr = cell_arg(&wb, cell)?;
    let value = wb.get_value(addr);
    match format {
        Format::Text => println!("{value}"),
        Format::Machine => println!("cell={} value={value}", name(&wb, addr, 0)),
    }
    Ok(ExitCode::SUCCESS)
}

fn name(wb: &Workbook, addr: CellAddress, home: usize) -> String {
    print_ref(&RefSpec::Cell(addr), &wb.context(home))
}

fn deps(path: &Path, cell: &str, depth: usize, format: Format) -> Result<ExitCode, String> {
    let (wb, _) = open(path)?;
    let addr = cell_arg(&wb, cell)?;
    let mut out = io::stdout().lock();
    for (i, level) in wb.precedents_closure(addr, depth).iter().enumerate() {
        for (from, to) in level {
            let (from, to) = (name(&wb, *from, addr.sheet), name(&wb, *to, addr.sheet));
            let line = match format {
                Format::Text => format!("{} {from} -> {to}", i + 1),
                Format::Machine => format!("level={} from={from} to={to}", i + 1),
            };
            writeln!(out, "{line}").map_err(|e| e.to_string())?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn replay(path: &Path, format: Format) -> Result<ExitCode, String> {
    let script = TaskScript::load(path).map_err(|e| e.to_string())?;
    let report = script.replay().map_err(|e| e.to_string())?;
    match format {
        Format::Text => println!("{report}"),
        Format::Machine => {
            let status = if report.passed { "pass" } else { "fail" };
            let variant = report.variant.as_deref().unwrap_or("-");
            println!(
                "task={} variant={variant} status={status} events={} mutations={}",
                report.name, report.events, report.mutations
            );
            for d in &report.diffs {
                println!("diff={d}");
            }
        }
    }
    Ok(if report.passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn serve(args: &ServeArgs, format: Format) -> Result<ExitCode, String> {
    let mut session = match &args.workbook {
        Some(path) => {
            let (wb, toggles) = open(path)?;
            Session::new(wb, toggles)
        }
        None => Session::new(Workbook::new(), ArcToggles::default()),
    };
    if args.stdio {
        let stdin = BufReader::new(io::stdin());
        let mut stdout = io::stdout().lock();
        serve_stdio(&mut session, stdin, &mut stdout).map_err(|e| e.to_string())?;
        return Ok(ExitCode::SUCCESS);
    }
    let port = args.port.unwrap_or_default();
    let listener = TcpListener::bind((args.host.as_str(), port))
        .map_err(|e| format!("cannot bind {}:{port}: {e}", args.host))?;
    let local = listener.local_addr().map_err(|e| e.to_string())?;
    match format {
        Format::Text => println!("listening on ws://{local}"),
        Format::Machine => println!("port={}", local.port()),
    }
    io::stdout().flush().map_err(|e| e.to_string())?;
    serve_websocket(&mut session, &listener, None).map_err(|e| e.to_string())?;
    Ok(ExitCode::SUCCESS)
}
