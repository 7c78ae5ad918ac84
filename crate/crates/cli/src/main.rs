//! `ising-nbw`: partition functions, correlations, duality checks and walk
//! series for Ising models on embedded graphs, plus the verification suites.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use ising_nbw::geometry::HomologyClass;
use ising_nbw::ising::{self, CorrelationReport, DualityReport, PartitionReport};
use ising_nbw::methods::{backend, EvalContext, MethodRegistry, SeriesBackend};
use ising_nbw::verify::{CheckResult, SuiteContext, SuiteRegistry};
use ising_nbw::walks::{WalkSeries, DEFAULT_MAX_LEN, MAX_LEN_CAP};
use ising_nbw::{load_graph, EmbeddedGraph, Error};

#[derive(Parser, Debug)]
#[command(
    name = "ising-nbw",
    version,
    about = "Ising models on embedded graphs through non-backtracking walk sums"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct Common {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Threads used by walk enumeration.
    #[arg(long, default_value_t = 1, global = true)]
    workers: usize,
    /// Longest walk kept in truncated series.
    #[arg(long, default_value_t = DEFAULT_MAX_LEN, global = true)]
    max_len: usize,
    /// How walk series are evaluated: `enumerate` or `operator`.
    #[arg(long, default_value = "operator", global = true)]
    backend: String,
    /// Numeric tolerance for agreement checks.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Partition function by one or all methods.
    Partition {
        graph: PathBuf,
        /// `bruteforce`, `hte`, `walks` or `all`.
        #[arg(long, default_value = "all")]
        method: String,
    },
    /// Spin-spin correlation between two vertices (by id).
    Correlate { graph: PathBuf, a: i64, b: i64 },
    /// Open-walk sum against the primal/dual correlation ratio (plane only).
    Duality { graph: PathBuf, a: i64, b: i64 },
    /// Closed-walk series S_n per homology sector.
    WalkSeries {
        graph: PathBuf,
        /// Sector bit string such as `01`, or `all`.
        #[arg(long, default_value = "all")]
        sector: String,
    },
    /// Run the invariant suites.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated suite names, or `all`.
        #[arg(long, default_value = "all")]
        suites: String,
        /// Drop the turning signs in the cancellation suite (negative control).
        #[arg(long)]
        inject_sign_bug: bool,
    },
}

#[derive(Debug)]
enum Failure {
    Core(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn kind(&self) -> &'static str {
        match self {
            Failure::Core(e) => e.kind(),
            Failure::Io(_) => "IoError",
        }
    }
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Core(Error::CapExceeded { .. }) => 3,
            Failure::Core(Error::AdjacentUnsupported(..)) => 4,
            _ => 2,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Io(m) => f.write_str(m),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

#[derive(Serialize)]
struct Conventions {
    generators: &'static str,
    sector_signs: &'static str,
    eta_tie_breaking: &'static str,
    closure_orientation: &'static str,
    normalization: &'static str,
}

const CONVENTIONS: Conventions = Conventions {
    generators: "cut lines on the sides of the fundamental domain; a walk's winding (wx, wy) counts its signed period wraps",
    sector_signs: "sector bits (a, b) pair with a walk as a*wx + b*wy; sector 00 enters with sign -1, the others with +1",
    eta_tie_breaking: "fewest dual edges, then lexicographically smallest crossed edge ids, avoiding edges at a and b when possible",
    closure_orientation: "b -> corner of b in b* -> along eta reversed, keeping each face boundary on the right -> corner of a in a* -> a",
    normalization: "value is Z / (2^|V| prod cosh L); full_value is Z",
};

#[derive(Serialize)]
struct Provenance {
    tool_version: &'static str,
    input: Option<String>,
    input_sha256: Option<String>,
    conventions: Conventions,
}

fn provenance(input: Option<(&Path, &[u8])>) -> Provenance {
    Provenance {
        tool_version: env!("CARGO_PKG_VERSION"),
        input: input.map(|(p, _)| p.display().to_string()),
        input_sha256: input.map(|(_, bytes)| Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()),
        conventions: CONVENTIONS,
    }
}

#[derive(Serialize)]
struct Document<T: Serialize> {
    command: &'static str,
    provenance: Provenance,
    result: T,
}

struct Loaded {
    graph: EmbeddedGraph,
    path: PathBuf,
    bytes: Vec<u8>,
}

impl Loaded {
    fn read(path: &Path) -> CliResult<Loaded> {
        let bytes = std::fs::read(path).map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
        let text = String::from_utf8(bytes.clone()).map_err(|_| Error::Schema("input is not UTF-8".into()))?;
        Ok(Loaded {
            graph: load_graph(&text)?,
            path: path.to_path_buf(),
            bytes,
        })
    }
    fn provenance(&self) -> Provenance {
        provenance(Some((&self.path, &self.bytes)))
    }
    fn vertex(&self, id: i64) -> CliResult<usize> {
        self.graph
            .vertex_index(id)
            .ok_or_else(|| Error::Precondition(format!("no vertex with id {id}")).into())
    }
}

/// Rows of a CSV table: a header and records.
struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

fn emit<T: Serialize>(format: Format, doc: &Document<T>, table: impl FnOnce() -> Table) -> CliResult<()> {
    let out = std::io::stdout();
    let mut out = out.lock();
    let io = |e: std::io::Error| Failure::Io(e.to_string());
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, doc).map_err(|e| Failure::Io(e.to_string()))?;
            writeln!(out).map_err(io)?;
        }
        Format::Csv => {
            let t = table();
            let mut w = csv::Writer::from_writer(&mut out);
            let csv_err = |e: csv::Error| Failure::Io(e.to_string());
            w.write_record(&t.header).map_err(csv_err)?;
            for r in &t.rows {
                w.write_record(r).map_err(csv_err)?;
            }
            w.flush().map_err(io)?;
        }
    }
    Ok(())
}

fn check_common(c: &Common) -> CliResult<Box<dyn SeriesBackend>> {
    if c.max_len > MAX_LEN_CAP {
        return Err(Error::CapExceeded {
            what: "maxLen",
            value: c.max_len,
            cap: MAX_LEN_CAP,
        }
        .into());
    }
    if let Some(t) = c.tolerance {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Precondition(format!("tolerance must be positive, got {t}")).into());
        }
    }
    if c.workers == 0 {
        return Err(Error::Precondition("workers must be at least 1".into()).into());
    }
    Ok(backend(&c.backend, c.workers)?)
}

#[derive(Serialize)]
struct Agreement {
    max_relative_difference: f64,
    tolerance: f64,
    agree: bool,
}

#[derive(Serialize)]
struct PartitionResult {
    max_len: usize,
    backend: &'static str,
    methods: Vec<PartitionReport>,
    agreement: Option<Agreement>,
}

fn series_rows(method: &str, series: &WalkSeries, rows: &mut Vec<Vec<String>>) {
    for (n, s) in series.terms.iter().enumerate().skip(1) {
        rows.push(vec![
            method.to_string(),
            "S_n".into(),
            series.alpha.to_string(),
            n.to_string(),
            format!("{s:e}"),
        ]);
    }
}

fn partition(c: &Common, graph: &Path, method: &str) -> CliResult<()> {
    let be = check_common(c)?;
    let input = Loaded::read(graph)?;
    let registry = MethodRegistry::standard();
    let ctx = EvalContext {
        max_len: c.max_len,
        backend: be.as_ref(),
    };
    let mut methods = Vec::new();
    for m in registry.select(method)? {
        methods.push(m.evaluate(&input.graph, &ctx)?);
    }
    let agreement = (methods.len() > 1).then(|| {
        let base = methods[0].full_value;
        let diff = methods
            .iter()
            .map(|r| (r.full_value - base).abs() / base.abs())
            .fold(0.0, f64::max);
        let tolerance = c.tolerance.unwrap_or(1e-6);
        Agreement {
            max_relative_difference: diff,
            tolerance,
            agree: diff <= tolerance,
        }
    });
    let doc = Document {
        command: "partition",
        provenance: input.provenance(),
        result: PartitionResult {
            max_len: c.max_len,
            backend: be.name(),
            methods,
            agreement,
        },
    };
    emit(c.format, &doc, || {
        let mut rows = Vec::new();
        for r in &doc.result.methods {
            rows.push(vec![
                r.method.into(),
                "value".into(),
                String::new(),
                String::new(),
                format!("{:e}", r.value),
            ]);
            rows.push(vec![
                r.method.into(),
                "full_value".into(),
                String::new(),
                String::new(),
                format!("{:e}", r.full_value),
            ]);
            if let Some(t) = &r.truncation {
                rows.push(vec![
                    r.method.into(),
                    "error_bound".into(),
                    String::new(),
                    t.max_len.to_string(),
                    format!("{:e}", t.error_bound),
                ]);
            }
            for s in &r.sectors {
                series_rows(r.method, &s.series, &mut rows);
            }
        }
        Table {
            header: vec!["method", "quantity", "sector", "n", "value"],
            rows,
        }
    })
}

#[derive(Serialize)]
struct CorrelateResult {
    walks: CorrelationReport,
    bruteforce: Option<f64>,
    discrepancy: Option<f64>,
}

fn correlate(c: &Common, graph: &Path, a: i64, b: i64) -> CliResult<()> {
    let be = check_common(c)?;
    let input = Loaded::read(graph)?;
    let (ia, ib) = (input.vertex(a)?, input.vertex(b)?);
    let walks = ising::correlation_walks(&input.graph, ia, ib, c.max_len, be.as_ref())?;
    let bruteforce = if input.graph.num_vertices() <= ising::BRUTE_VERTEX_CAP {
        Some(ising::correlation_bruteforce(&input.graph, ia, ib)?)
    } else {
        None
    };
    let discrepancy = bruteforce.map(|x| (x - walks.value).abs());
    let doc = Document {
        command: "correlate",
        provenance: input.provenance(),
        result: CorrelateResult {
            walks,
            bruteforce,
            discrepancy,
        },
    };
    emit(c.format, &doc, || {
        let r = &doc.result;
        let opt = |x: Option<f64>| x.map(|v| format!("{v:e}")).unwrap_or_default();
        let eta: Vec<String> = r.walks.eta_edges.iter().map(|e| e.to_string()).collect();
        Table {
            header: vec!["a", "b", "walks", "bruteforce", "discrepancy", "max_len", "eta_edges"],
            rows: vec![vec![
                a.to_string(),
                b.to_string(),
                format!("{:e}", r.walks.value),
                opt(r.bruteforce),
                opt(r.discrepancy),
                r.walks.max_len.to_string(),
                eta.join(" "),
            ]],
        }
    })
}

fn duality(c: &Common, graph: &Path, a: i64, b: i64) -> CliResult<()> {
    let be = check_common(c)?;
    let input = Loaded::read(graph)?;
    let (ia, ib) = (input.vertex(a)?, input.vertex(b)?);
    let r: DualityReport = ising::duality_ratio(&input.graph, ia, ib, c.max_len, be.as_ref())?;
    let doc = Document {
        command: "duality",
        provenance: input.provenance(),
        result: r,
    };
    emit(c.format, &doc, || {
        let r = &doc.result;
        Table {
            header: vec![
                "a",
                "b",
                "a_star",
                "b_star",
                "walk_sum",
                "ratio",
                "constant",
                "discrepancy",
            ],
            rows: vec![vec![
                a.to_string(),
                b.to_string(),
                r.a_star.to_string(),
                r.b_star.to_string(),
                format!("{:e}", r.walk_sum),
                format!("{:e}", r.ratio),
                format!("{:e}", r.constant),
                format!("{:e}", r.discrepancy),
            ]],
        }
    })
}

fn walk_series(c: &Common, graph: &Path, sector: &str) -> CliResult<()> {
    let be = check_common(c)?;
    let input = Loaded::read(graph)?;
    let g = &input.graph;
    let classes = if sector == "all" {
        HomologyClass::all(g.genus())
    } else {
        let alpha = HomologyClass::parse(sector)?;
        if alpha.genus() != g.genus() {
            return Err(Error::GenusMismatch {
                class: alpha.genus(),
                surface: g.genus(),
            }
            .into());
        }
        vec![alpha]
    };
    let k = g.tanh_couplings();
    let series = classes
        .iter()
        .map(|alpha| be.closed_series(g, &k, alpha, c.max_len))
        .collect::<Result<Vec<_>, _>>()?;
    let doc = Document {
        command: "walk-series",
        provenance: input.provenance(),
        result: series,
    };
    emit(c.format, &doc, || {
        let mut rows = Vec::new();
        for s in &doc.result {
            for n in 1..=s.max_len {
                rows.push(vec![
                    s.alpha.to_string(),
                    n.to_string(),
                    format!("{:e}", s.terms[n]),
                    format!("{:e}", s.partial(n)),
                ]);
            }
        }
        Table {
            header: vec!["sector", "n", "s_n", "partial_sum"],
            rows,
        }
    })
}

#[derive(Serialize)]
struct VerifyResult {
    seed: u64,
    suites: Vec<String>,
    passed: usize,
    failed: usize,
    checks: Vec<CheckResult>,
}

fn verify(c: &Common, seed: u64, suites: &str, inject_sign_bug: bool) -> CliResult<bool> {
    check_common(c)?;
    let registry = SuiteRegistry::standard();
    let names: Vec<String> = if suites == "all" {
        registry.names().into_iter().map(String::from).collect()
    } else {
        suites
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect()
    };
    let ctx = SuiteContext {
        seed,
        inject_sign_bug,
        tolerance: c.tolerance,
        workers: c.workers,
    };
    let checks = registry.run(&names, &ctx)?;
    let passed = checks.iter().filter(|r| r.passed).count();
    let failed = checks.len() - passed;
    let doc = Document {
        command: "verify",
        provenance: provenance(None),
        result: VerifyResult {
            seed,
            suites: names,
            passed,
            failed,
            checks,
        },
    };
    emit(c.format, &doc, || Table {
        header: vec!["suite", "check", "passed", "detail"],
        rows: doc
            .result
            .checks
            .iter()
            .map(|r| {
                vec![
                    r.suite.to_string(),
                    r.name.clone(),
                    r.passed.to_string(),
                    r.detail.clone(),
                ]
            })
            .collect(),
    })?;
    Ok(failed == 0)
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: ErrorDetail<'a>,
}

#[derive(Serialize)]
struct ErrorDetail<'a> {
    kind: &'a str,
    message: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let c = &cli.common;
    let outcome = match &cli.command {
        Command::Partition { graph, method } => partition(c, graph, method).map(|_| true),
        Command::Correlate { graph, a, b } => correlate(c, graph, *a, *b).map(|_| true),
        Command::Duality { graph, a, b } => duality(c, graph, *a, *b).map(|_| true),
        Command::WalkSeries { graph, sector } => walk_series(c, graph, sector).map(|_| true),
        Command::Verify {
            seed,
            suites,
            inject_sign_bug,
        } => verify(c, *seed, suites, *inject_sign_bug),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            let body = ErrorBody {
                error: ErrorDetail {
                    kind: f.kind(),
                    message: f.to_string(),
                },
            };
            // stdout may already be closed (for example by a pipe)
            let _ = writeln!(
                std::io::stdout(),
                "{}",
                serde_json::to_string(&body).expect("error body serializes")
            );
            eprintln!("error: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
