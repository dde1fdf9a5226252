use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use qsp_core::diagrams::DiagramFile;
use qsp_core::harness::{self, Report, Source};
use qsp_core::QspError;

#[derive(Parser)]
#[command(name = "qsp", version, about = "Quantum symmetric pair checks")]
struct Cli {
    /// Also write the JSON output here.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Add wall-clock runtime to reports (makes output nondeterministic).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Satake diagrams.
    Diagram {
        #[command(subcommand)]
        cmd: DiagramCmd,
    },
    /// Irreducible modules.
    Rep {
        #[command(subcommand)]
        cmd: RepCmd,
    },
    /// Universal R-matrix on V⊗W.
    Rmatrix {
        #[arg(long)]
        algebra: String,
        #[arg(long, allow_hyphen_values = true)]
        v: String,
        #[arg(long, allow_hyphen_values = true)]
        w: String,
        #[arg(long)]
        q: f64,
    },
    /// Coideal parameters.
    Coideal {
        #[command(subcommand)]
        cmd: CoidealCmd,
    },
    /// K-matrix η on χ_t ⊙ V.
    Kmatrix {
        #[arg(long)]
        diagram: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        #[arg(long, allow_hyphen_values = true)]
        rep: String,
        #[arg(long)]
        q: f64,
    },
    /// Cyclotomic KZ monodromy.
    Kz {
        #[command(subcommand)]
        cmd: KzCmd,
    },
    /// The rank-one twisted double.
    Vogan {
        #[command(subcommand)]
        cmd: VoganCmd,
    },
    /// Verification suites.
    Verify {
        #[command(subcommand)]
        cmd: VerifyCmd,
    },
}

#[derive(Subcommand)]
enum DiagramCmd {
    Check {
        #[arg(long)]
        file: PathBuf,
    },
    List {
        #[arg(long = "type")]
        typ: String,
        #[arg(long)]
        rank: usize,
    },
}

#[derive(Subcommand)]
enum RepCmd {
    Build {
        #[arg(long)]
        algebra: String,
        #[arg(long, allow_hyphen_values = true)]
        weight: String,
        #[arg(long)]
        q: f64,
    },
}

#[derive(Subcommand)]
enum CoidealCmd {
    Validate {
        #[arg(long)]
        diagram: PathBuf,
        /// Comma separated, one per white vertex.
        #[arg(long, allow_hyphen_values = true)]
        c: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        s: Option<String>,
        #[arg(long)]
        q: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Su2,
}

#[derive(Subcommand)]
enum KzCmd {
    Psi {
        #[arg(long)]
        config: PathBuf,
    },
    Verify {
        #[arg(long, value_enum, default_value = "su2")]
        suite: Suite,
        #[arg(long)]
        q: f64,
    },
}

#[derive(Subcommand)]
enum VoganCmd {
    EMatrix {
        #[arg(long, allow_hyphen_values = true)]
        r: f64,
        #[arg(long)]
        q: f64,
        #[arg(long, default_value_t = 20)]
        levels: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SourceArg {
    Coideal,
    Kz,
    Vogan,
}

#[derive(Subcommand)]
enum VerifyCmd {
    RankOne {
        #[arg(long, default_value_t = 0.7)]
        q: f64,
        #[arg(long, allow_hyphen_values = true)]
        r: f64,
        #[arg(long, default_value_t = 20)]
        levels: usize,
    },
    Axioms {
        #[arg(long, value_enum)]
        source: SourceArg,
        #[arg(long, default_value_t = 0.7)]
        q: f64,
    },
    Kz {
        #[arg(long, default_value_t = 0.7)]
        q: f64,
    },
    #[command(name = "appendixB")]
    AppendixB {
        #[arg(long)]
        diagram: PathBuf,
        #[arg(long, default_value_t = 0.7)]
        q: f64,
    },
    Characters {
        #[arg(long)]
        diagram: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        #[arg(long, default_value_t = 0.7)]
        q: f64,
    },
}

fn read_json(path: &Path) -> qsp_core::Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| QspError::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| QspError::Input(format!("{}: {e}", path.display())))
}

fn read_diagram(path: &Path) -> qsp_core::Result<DiagramFile> {
    serde_json::from_value(read_json(path)?).map_err(|e| QspError::Input(format!("{}: {e}", path.display())))
}

enum Output {
    Report(Report),
    Plain(Value),
}

fn run(cmd: Cmd) -> qsp_core::Result<Output> {
    use Output::{Plain, Report as R};
    Ok(match cmd {
        Cmd::Diagram { cmd: DiagramCmd::Check { file } } => R(harness::diagram_check(&read_diagram(&file)?)?),
        Cmd::Diagram { cmd: DiagramCmd::List { typ, rank } } => Plain(harness::diagram_list(&typ, rank)?),
        Cmd::Rep { cmd: RepCmd::Build { algebra, weight, q } } => R(harness::rep_build(&algebra, &weight, q)?),
        Cmd::Rmatrix { algebra, v, w, q } => R(harness::rmatrix_report(&algebra, &v, &w, q)?),
        Cmd::Coideal { cmd: CoidealCmd::Validate { diagram, c, s, q } } => {
            R(harness::coideal_validate(&read_diagram(&diagram)?, c.as_deref(), s.as_deref(), q)?)
        }
        Cmd::Kmatrix { diagram, t, rep, q } => R(harness::kmatrix_report(&read_diagram(&diagram)?, t, &rep, q)?),
        Cmd::Kz { cmd: KzCmd::Psi { config } } => R(harness::kz_psi_report(&read_json(&config)?)?),
        Cmd::Kz { cmd: KzCmd::Verify { suite: Suite::Su2, q } } => R(harness::kz_suite(q)?),
        Cmd::Vogan { cmd: VoganCmd::EMatrix { r, q, levels } } => R(harness::vogan_e_matrix(r, q, levels)?),
        Cmd::Verify { cmd } => R(match cmd {
            VerifyCmd::RankOne { q, r, levels } => harness::run_rank_one(q, r, levels)?,
            VerifyCmd::Axioms { source, q } => harness::axioms(
                match source {
                    SourceArg::Coideal => Source::Coideal,
                    SourceArg::Kz => Source::Kz,
                    SourceArg::Vogan => Source::Vogan,
                },
                q,
            )?,
            VerifyCmd::Kz { q } => harness::kz_suite(q)?,
            VerifyCmd::AppendixB { diagram, q } => harness::z_elements_report(&read_diagram(&diagram)?, q)?,
            VerifyCmd::Characters { diagram, t, q } => harness::characters_report(&read_diagram(&diagram)?, t, q)?,
        }),
    })
}

fn error_kind(e: &QspError) -> &'static str {
    match e {
        QspError::Input(_) => "input",
        QspError::Resource(_) => "resource",
        QspError::Degenerate(_) => "degenerate",
        QspError::Resonant(_) => "resonant",
        QspError::Accuracy(_) => "accuracy",
        QspError::NoSolution(_) => "no_solution",
        QspError::Ambiguous { .. } => "ambiguous",
        QspError::Internal(_) => "internal",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let (value, code) = match run(cli.cmd) {
        Ok(Output::Report(mut r)) => {
            if cli.timing {
                r.runtime_ms = Some(start.elapsed().as_secs_f64() * 1e3);
            }
            let code = if r.pass() { 0 } else { 1 };
            (r.to_json(), code)
        }
        Ok(Output::Plain(v)) => (v, 0),
        Err(e) => {
            eprintln!("qsp: {e}");
            let v = json!({"error": {"kind": error_kind(&e), "message": e.to_string()}, "pass": false});
            (harness::sorted(v), e.exit_code())
        }
    };
    let text = serde_json::to_string_pretty(&value).expect("JSON values serialize");
    // a closed pipe is not worth a panic
    if writeln!(std::io::stdout().lock(), "{text}").is_err() {
        return ExitCode::from(3);
    }
    if let Some(path) = cli.out {
        if let Err(e) = std::fs::write(&path, format!("{text}\n")) {
            eprintln!("qsp: cannot write {}: {e}", path.display());
            return ExitCode::from(3);
        }
    }
    ExitCode::from(code as u8)
}
