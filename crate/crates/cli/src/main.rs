//! `rdfstar`: validate, unfold, query and summarize Turtle* files.
//!
//! Exit status is 0 on success, 1 when an input is malformed or a query is
//! rejected, and 2 for I/O failures and usage errors.

mod render;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rdfstar::model::{Iri, StarGraph, DEFAULT_MAX_NESTING};
use rdfstar::reify::unfold_graph;
use rdfstar::sparql::prepare_query;
use rdfstar::turtle::{
    serialize_ntriples, serialize_turtlestar, ParseResult, TermFormatter, TurtleStarParser,
};
use rdfstar::vocab::rdf;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(
    name = "rdfstar",
    version,
    about = "Work with RDF* graphs and SPARQL* queries"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    options: Options,
}

#[derive(Debug, Args)]
struct Options {
    /// Write output to PATH instead of standard output
    #[arg(short, long, value_name = "PATH", global = true)]
    output: Option<PathBuf>,
    /// Base IRI for resolving relative IRIs in data files
    #[arg(long, value_name = "IRI", global = true, value_parser = parse_iri)]
    base: Option<Iri>,
    /// Maximum nesting depth of embedded triples in data files
    #[arg(long, value_name = "N", global = true, default_value_t = DEFAULT_MAX_NESTING)]
    max_nesting: usize,
    /// Suppress warnings and the validation report
    #[arg(short, long, global = true)]
    quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse Turtle* files and report triple counts
    Validate {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Replace embedded triples by reification and write plain RDF
    Unfold {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = UnfoldFormat::TurtleStar)]
        format: UnfoldFormat,
    },
    /// Evaluate a SPARQL* SELECT query over a Turtle* file
    Query {
        data: PathBuf,
        query: PathBuf,
        #[arg(long, value_enum, default_value_t = QueryFormat::Tsv)]
        format: QueryFormat,
    },
    /// Count asserted, metadata and embedded triples
    Stats { file: PathBuf },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum UnfoldFormat {
    TurtleStar,
    Ntriples,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum QueryFormat {
    Tsv,
    Json,
}

fn parse_iri(s: &str) -> Result<Iri, String> {
    Iri::new(s).map_err(|e| e.to_string())
}

enum Failure {
    Input(String),
    Io(String),
}

impl Failure {
    fn io(path: &Path, e: io::Error) -> Self {
        Failure::Io(format!("{}: {e}", path.display()))
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| match e.kind() {
        io::ErrorKind::InvalidData => {
            Failure::Input(format!("{}: not valid UTF-8", path.display()))
        }
        _ => Failure::io(path, e),
    })
}

fn load(path: &Path, options: &Options) -> Result<ParseResult, Failure> {
    let text = read(path)?;
    let mut parser = TurtleStarParser::new().with_max_nesting(options.max_nesting);
    if let Some(base) = &options.base {
        parser = parser.with_base(base.clone());
    }
    let parsed = parser
        .parse(&text)
        .map_err(|e| Failure::Input(format!("{}: parse error at {e}", path.display())))?;
    if !options.quiet {
        for d in &parsed.diagnostics {
            eprintln!("{}:{d}", path.display());
        }
    }
    Ok(parsed)
}

fn emit(text: &str, options: &Options) -> Result<(), Failure> {
    match &options.output {
        Some(path) => fs::write(path, text).map_err(|e| Failure::io(path, e)),
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|()| stdout.flush())
                .map_err(|e| Failure::Io(format!("standard output: {e}")))
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let options = &cli.options;
    match &cli.command {
        Command::Validate { files } => {
            let mut report = String::new();
            for path in files {
                let parsed = load(path, options)?;
                if files.len() > 1 {
                    report.push_str(&format!("{}: ", path.display()));
                }
                report.push_str(&render::summary(&parsed.graph));
                report.push('\n');
            }
            if !options.quiet {
                emit(&report, options)?;
            }
            Ok(())
        }
        Command::Unfold { file, format } => {
            let parsed = load(file, options)?;
            let (plain, _) = unfold_graph(&parsed.graph);
            let text = match format {
                UnfoldFormat::Ntriples => serialize_ntriples(plain.iter())
                    .expect("unfolded graphs have no embedded triples"),
                UnfoldFormat::TurtleStar => {
                    let mut prefixes = parsed.prefixes.clone();
                    if !prefixes.values().any(|ns| ns.as_str() == rdf::NAMESPACE) {
                        prefixes
                            .entry("rdf".to_owned())
                            .or_insert_with(|| Iri::new(rdf::NAMESPACE).expect("valid IRI"));
                    }
                    let graph: StarGraph = plain.iter().cloned().collect();
                    serialize_turtlestar(&graph, &prefixes)
                }
            };
            emit(&text, options)
        }
        Command::Query {
            data,
            query,
            format,
        } => {
            let parsed = load(data, options)?;
            let text = read(query)?;
            let prepared = prepare_query(&text)
                .map_err(|e| Failure::Input(format!("{}: {e}", query.display())))?;
            let results = prepared.execute(&parsed.graph.freeze());
            let out = match format {
                QueryFormat::Tsv => render::tsv(&results, &TermFormatter::new(&parsed.prefixes)),
                QueryFormat::Json => render::json(&results),
            };
            emit(&out, options)
        }
        Command::Stats { file } => {
            let parsed = load(file, options)?;
            emit(&render::stats(&parsed.graph), options)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(message)) => {
            eprintln!("rdfstar: {message}");
            ExitCode::from(1)
        }
        Err(Failure::Io(message)) => {
            eprintln!("rdfstar: {message}");
            ExitCode::from(2)
        }
    }
}
