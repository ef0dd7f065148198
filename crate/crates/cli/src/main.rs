use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use conjcount::coding::{find_stabilization_depth, length_spectrum, CodingData, StabilizationOptions};
use conjcount::counting::{
    douma_compare, guillope_constant, residual_report, Counter, CountReport, DEFAULT_BUDGET,
};
use conjcount::graph::{build_presentation, parse_graph, MetricGraph};
use conjcount::transfer::{beta_prime, build_transfer, linspace, solve_entropy, wielandt_scan};
use conjcount::words::{ConjClassSpec, Word};
use conjcount::{Error, ErrorKind};

#[derive(Parser, Debug)]
#[command(name = "conjcount", version, about = "Orbit counting for free groups acting on metric trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the graph hypotheses and print a summary
    Validate(Common),
    /// Stabilization depth and the increment table
    Stabilize(Common),
    /// Volume entropy and transfer-system sizes
    Entropy(Common),
    /// Spectral-radius bounds along Re s = h
    Scan {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: Grid,
    },
    /// Closed-geodesic length spectrum with the lattice verdict
    Geodesics {
        #[command(flatten)]
        common: Common,
        /// Longest cyclic word considered
        #[arg(long, default_value_t = 6)]
        max_len: usize,
    },
    /// Exact counts of all group elements
    Count {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: Grid,
    },
    /// Exact counts in a conjugacy class
    Conj {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: Grid,
        #[arg(long)]
        word: String,
        /// Recompute every element's displacement directly
        #[arg(long)]
        verify: bool,
    },
    /// Asymptotic constants of the full and class counts
    Constants {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        word: Option<String>,
    },
    /// Class counts against powers of q on a unit regular graph
    Douma {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        word: String,
        #[arg(long, default_value_t = 20)]
        nmax: usize,
    },
    /// Full pipeline in one bundle
    Report {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "a")]
        word: String,
        /// Largest radius of the full count
        #[arg(long = "T", default_value_t = 12.0)]
        t: f64,
    },
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Graph file
    graph: PathBuf,
    /// Base vertex, overriding the file
    #[arg(long)]
    base: Option<String>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Extra word lengths checked past the stabilization depth
    #[arg(long, default_value_t = 3)]
    margin: usize,
    /// Entropy root tolerance on |β(h) - 1|
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// Work budget in search nodes
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct Grid {
    /// Single radius (or frequency for `scan`)
    #[arg(long = "T")]
    t: Option<f64>,
    #[arg(long)]
    tmin: Option<f64>,
    #[arg(long)]
    tmax: Option<f64>,
    #[arg(long, default_value_t = 64)]
    steps: usize,
}

impl Grid {
    fn points(&self) -> Result<Vec<f64>, Error> {
        match (self.t, self.tmin, self.tmax) {
            (Some(t), None, None) => Ok(vec![t]),
            (None, Some(a), Some(b)) if a <= b && self.steps > 0 => Ok(linspace(a, b, self.steps)),
            _ => Err(Error::InvalidInput(
                "give either --T or --tmin and --tmax with --tmin ≤ --tmax and --steps ≥ 1".into(),
            )),
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

/// Command output: the canonical JSON value plus an optional flat table.
struct Output {
    json: Value,
    table: Option<(Vec<&'static str>, Vec<Vec<String>>)>,
}

impl Output {
    fn json(json: Value) -> Output {
        Output { json, table: None }
    }

    fn with_table(mut self, header: Vec<&'static str>, rows: Vec<Vec<String>>) -> Output {
        self.table = Some((header, rows));
        self
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn fixture_id(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn load_graph(c: &Common) -> Result<MetricGraph, Error> {
    let text = fs::read_to_string(&c.graph)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", c.graph.display())))?;
    let graph = parse_graph(&text)?;
    match &c.base {
        None => Ok(graph),
        Some(name) => {
            let v = graph
                .vertex_index(name)
                .ok_or_else(|| Error::InvalidInput(format!("unknown base vertex `{name}`")))?;
            graph.with_base(v)
        }
    }
}

fn load_coding(c: &Common) -> Result<CodingData, Error> {
    let pres = build_presentation(&load_graph(c)?);
    let opts = StabilizationOptions {
        margin: c.margin,
        seed: c.seed,
        ..StabilizationOptions::default()
    };
    find_stabilization_depth(&pres, &opts)
}

fn load_counter(c: &Common) -> Result<Counter, Error> {
    Counter::new(load_coding(c)?, c.budget)
}

fn parse_word(text: &str, rank: usize) -> Result<Word, Error> {
    let w = Word::parse(text, rank)?;
    if w.is_identity() {
        return Err(Error::InvalidInput("the class word must not be the identity".into()));
    }
    Ok(w)
}

fn report_table(r: &CountReport) -> Vec<Vec<String>> {
    (0..r.t.len())
        .map(|i| vec![r.t[i].to_string(), r.counts[i].to_string(), r.predicted[i].to_string(), r.ratio[i].to_string()])
        .collect()
}

fn validate(c: &Common) -> Result<Output, Error> {
    let g = load_graph(c)?;
    Ok(Output::json(json!({
        "vertices": g.vertex_count(),
        "edges": g.edge_count(),
        "rank": g.rank(),
        "base": g.vertex_name(g.base()),
        "unit_length": g.is_unit_length(),
        "regular_degree": g.regular_degree(),
        "canonical": g.to_text(),
    })))
}

fn stabilize(c: &Common) -> Result<Output, Error> {
    let coding = load_coding(c)?;
    let rows = coding.r_rows();
    let positivity = coding.eventual_positivity(4 * coding.depth());
    let json = json!({
        "depth": coding.depth(),
        "increment_depth": coding.increment_depth(),
        "margin": coding.margin(),
        "samples": coding.samples(),
        "max_abs_r": coding.max_abs_r(),
        "positivity_block": positivity.map(|p| p.block),
        "positivity_delta": positivity.map(|p| p.delta),
        "r_table": rows.iter().map(|(w, r)| json!({"word": w.to_string(), "r": r})).collect::<Vec<_>>(),
    });
    let table = rows.iter().map(|(w, r)| vec![w.to_string(), r.to_string()]).collect();
    Ok(Output::json(json).with_table(vec!["word", "r"], table))
}

fn entropy(c: &Common) -> Result<Output, Error> {
    let coding = load_coding(c)?;
    let ts = build_transfer(&coding);
    let sol = solve_entropy(&ts, c.tol)?;
    Ok(Output::json(json!({
        "h": sol.h,
        "beta_at_h": sol.beta_at_h,
        "beta_prime": sol.beta_prime,
        "bisection_steps": sol.bisection_steps,
        "newton_steps": sol.newton_steps,
        "depth": coding.depth(),
        "states": ts.state_count(),
        "long_states": ts.long_count(),
        "arcs": ts.arcs().count(),
    })))
}

fn scan(c: &Common, grid: &Grid) -> Result<Output, Error> {
    let ts = build_transfer(&load_coding(c)?);
    let h = solve_entropy(&ts, c.tol)?.h;
    let rows = wielandt_scan(&ts, h, &grid.points()?)?;
    let table = rows
        .iter()
        .map(|r| vec![r.t.to_string(), r.lower.to_string(), r.upper.to_string(), r.flag.to_string()])
        .collect();
    Ok(Output::json(json!({"h": h, "rows": to_value(&rows)})).with_table(vec!["t", "lower", "upper", "flag"], table))
}

fn geodesics(c: &Common, max_len: usize) -> Result<Output, Error> {
    let spectrum = length_spectrum(&load_coding(c)?, max_len)?;
    let table = spectrum
        .classes
        .iter()
        .map(|e| vec![e.id.to_string(), e.word.clone(), e.length.to_string()])
        .collect();
    Ok(Output::json(to_value(&spectrum)).with_table(vec!["id", "word", "length"], table))
}

fn count(c: &Common, grid: &Grid) -> Result<Output, Error> {
    let counter = load_counter(c)?;
    let report = counter.full_report(&fixture_id(&c.graph), &grid.points()?)?;
    let table = report_table(&report);
    Ok(Output::json(to_value(&report)).with_table(vec!["T", "count", "predicted", "ratio"], table))
}

fn conj(c: &Common, grid: &Grid, word: &str, verify: bool) -> Result<Output, Error> {
    let counter = load_counter(c)?;
    let w = parse_word(word, counter.coding().rank())?;
    let radii = grid.points()?;
    if verify {
        counter.count_class_many(&ConjClassSpec::new(&w)?, &radii, true)?;
    }
    let report = counter.class_report(&fixture_id(&c.graph), &w, &radii)?;
    let table = report_table(&report);
    Ok(Output::json(to_value(&report)).with_table(vec!["T", "count", "predicted", "ratio"], table))
}

fn constants(c: &Common, word: Option<&str>) -> Result<Output, Error> {
    let counter = load_counter(c)?;
    let bp = beta_prime(counter.transfer(), counter.perron());
    let g = guillope_constant(counter.perron(), bp);
    let class = match word {
        Some(text) => {
            let w = parse_word(text, counter.coding().rank())?;
            let cc = counter.class_constant(&ConjClassSpec::new(&w)?);
            json!({"word": w.to_string(), "residue": cc.residue, "c": cc.c})
        }
        None => Value::Null,
    };
    Ok(Output::json(json!({
        "h": counter.h(),
        "beta_prime": bp,
        "c0": g.c0,
        "lead": g.lead,
        "class": class,
        "arithmeticity": to_value(counter.arithmeticity()),
        "pruning": to_value(&counter.pruning()),
    })))
}

fn douma(c: &Common, word: &str, nmax: usize) -> Result<Output, Error> {
    let counter = load_counter(c)?;
    let w = parse_word(word, counter.coding().rank())?;
    let table = douma_compare(&counter, &ConjClassSpec::new(&w)?, nmax)?;
    let rows = table
        .rows
        .iter()
        .map(|r| vec![r.n.to_string(), r.count.to_string(), r.ratio.to_string()])
        .collect();
    Ok(Output::json(to_value(&table)).with_table(vec!["n", "count", "ratio"], rows))
}

fn report(c: &Common, word: &str, t: f64) -> Result<Output, Error> {
    let counter = load_counter(c)?;
    let fixture = fixture_id(&c.graph);
    let coding = counter.coding();
    let ts = counter.transfer();
    let w = parse_word(word, coding.rank())?;
    let full_radii = linspace(0.0, t, 49);
    let full = counter.full_report(&fixture, &full_radii)?;
    let class_radii = linspace(0.0, 2.0 * t, 49);
    let class = counter.class_report(&fixture, &w, &class_radii)?;
    let scan = wielandt_scan(ts, counter.h(), &linspace(0.25, 25.0, 64))?;
    let spectrum = length_spectrum(coding, 6)?;
    let graph = coding.presentation().graph();
    Ok(Output::json(json!({
        "graph": {
            "vertices": graph.vertex_count(),
            "edges": graph.edge_count(),
            "rank": graph.rank(),
            "canonical": graph.to_text(),
        },
        "coding": {
            "depth": coding.depth(),
            "increment_depth": coding.increment_depth(),
            "margin": coding.margin(),
            "samples": coding.samples(),
        },
        "entropy": to_value(counter.entropy()),
        "transfer": {"states": ts.state_count(), "long_states": ts.long_count(), "arcs": ts.arcs().count()},
        "scan": to_value(&scan),
        "spectrum": to_value(&spectrum),
        "full": to_value(&full),
        "class": to_value(&class),
        "class_residuals": to_value(&residual_report(&class)),
    })))
}

fn run(cli: &Cli) -> Result<(Output, Common, &'static str), Error> {
    let (out, common, name) = match &cli.command {
        Command::Validate(c) => (validate(c)?, c, "validate"),
        Command::Stabilize(c) => (stabilize(c)?, c, "stabilize"),
        Command::Entropy(c) => (entropy(c)?, c, "entropy"),
        Command::Scan { common, grid } => (scan(common, grid)?, common, "scan"),
        Command::Geodesics { common, max_len } => (geodesics(common, *max_len)?, common, "geodesics"),
        Command::Count { common, grid } => (count(common, grid)?, common, "count"),
        Command::Conj {
            common,
            grid,
            word,
            verify,
        } => (conj(common, grid, word, *verify)?, common, "conj"),
        Command::Constants { common, word } => (constants(common, word.as_deref())?, common, "constants"),
        Command::Douma { common, word, nmax } => (douma(common, word, *nmax)?, common, "douma"),
        Command::Report { common, word, t } => (report(common, word, *t)?, common, "report"),
    };
    Ok((out, common.clone(), name))
}

fn render(out: Output, c: &Common, command: &str) -> Result<String, Error> {
    let fixture = fixture_id(&c.graph);
    match (c.format, out.table) {
        (Format::Csv, Some((header, rows))) => {
            let mut s = format!("# command={command} fixture={fixture} seed={}\n{}\n", c.seed, header.join(","));
            for row in rows {
                s.push_str(&row.join(","));
                s.push('\n');
            }
            Ok(s)
        }
        (Format::Csv, None) => Err(Error::InvalidInput(format!("`{command}` has no CSV form; use --format json"))),
        (Format::Json, _) => {
            let doc = json!({
                "command": command,
                "fixture": fixture,
                "seed": c.seed,
                "result": out.json,
            });
            Ok(serde_json::to_string_pretty(&doc).expect("serializable") + "\n")
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e.kind() {
        ErrorKind::Input => 1,
        ErrorKind::Resource => 2,
        ErrorKind::Invariant => 3,
    }
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
    let result = run(&cli).and_then(|(out, common, name)| {
        let text = render(out, &common, name)?;
        match &common.out {
            Some(path) => fs::write(path, text)
                .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display()))),
            None => {
                let _ = std::io::stdout().write_all(text.as_bytes());
                Ok(())
            }
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
