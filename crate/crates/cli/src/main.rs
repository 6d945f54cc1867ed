use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use isalsr::experiments::{self, metric_studies, properties, scalability, search_space, Check};
use isalsr::report::{self, Format, Table};
use isalsr_core::benchmarks::{benchmark, Split};
use isalsr_core::canonical::{canonical, CanonError, CanonicalRequest, SearchMode};
use isalsr_core::generators::{random_dag_seeded, random_string, BASE_SEED};
use isalsr_core::isomorphism::count_automorphisms;
use isalsr_core::metric::levenshtein;
use isalsr_core::{d2s, isomorphic, s2d, LabeledDag, OperationSet};

/// Exit status for a canonical search that ran out of time.
const EXIT_TIMEOUT: u8 = 2;
/// Exit status for a graph with no valid encoding.
const EXIT_UNENCODABLE: u8 = 3;

#[derive(Parser)]
#[command(name = "isalsr", version, about = "Instruction-string encodings of expression DAGs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Opset {
    Full,
    Commutative,
}

impl Opset {
    fn get(self) -> OperationSet {
        match self {
            Opset::Full => OperationSet::full(),
            Opset::Commutative => OperationSet::commutative(),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Pruned,
    Exhaustive,
}

#[derive(Clone, Copy, ValueEnum)]
enum SplitArg {
    Train,
    Test,
}

#[derive(Args)]
struct GraphArg {
    /// Instruction string, or path to a DAG JSON file.
    input: String,
    #[arg(long, default_value_t = 1)]
    vars: usize,
    #[arg(long, value_enum, default_value_t = Opset::Full)]
    opset: Opset,
}

impl GraphArg {
    fn load(&self) -> Result<LabeledDag> {
        load_graph(&self.input, self.vars, self.opset.get())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Decode an instruction string and print the DAG.
    Decode(GraphArg),
    /// Greedy encoding of a DAG file.
    Encode { dag: PathBuf },
    /// Greedy encode then decode, and compare.
    Roundtrip(GraphArg),
    /// Canonical string of a string or DAG file.
    Canon {
        #[command(flatten)]
        graph: GraphArg,
        #[arg(long, value_enum, default_value_t = Mode::Pruned)]
        mode: Mode,
        /// Seconds.
        #[arg(long, default_value_t = 2.0)]
        timeout: f64,
        #[arg(long)]
        strip_var_inputs: bool,
    },
    /// Isomorphism test between two DAG files.
    Iso { first: PathBuf, second: PathBuf },
    #[command(subcommand)]
    Metric(MetricCommand),
    #[command(subcommand)]
    Gen(GenCommand),
    #[command(subcommand)]
    Bench(BenchCommand),
    /// Run an experiment suite.
    Exp {
        #[arg(value_enum)]
        suite: Suite,
        #[command(flatten)]
        opts: ExpOpts,
    },
}

#[derive(Subcommand)]
enum MetricCommand {
    /// Levenshtein distance and edit script.
    Dist { first: String, second: String },
    /// Distance-1 neighbourhood report as CSV.
    Neigh {
        string: String,
        #[arg(long, default_value_t = 1)]
        vars: usize,
        #[arg(long, default_value_t = 5.0)]
        timeout: f64,
    },
}

#[derive(Subcommand)]
enum GenCommand {
    /// Random DAG as JSON.
    Dag {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        sample: usize,
        #[arg(long, env = "ISALSR_SEED", default_value_t = BASE_SEED)]
        seed: u64,
    },
    /// Random instruction string.
    String {
        #[arg(long, default_value_t = 20)]
        max_tokens: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, env = "ISALSR_SEED", default_value_t = BASE_SEED)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Structure and encodings of a benchmark.
    Show { name: String },
    /// Sampled dataset as CSV.
    Data {
        name: String,
        #[arg(long, value_enum, default_value_t = SplitArg::Train)]
        split: SplitArg,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Properties,
    SearchSpace,
    Scalability,
    ShortestPath,
    Neighbourhood,
}

#[derive(Args)]
struct ExpOpts {
    /// Full-size parameters instead of the desk presets.
    #[arg(long)]
    paper_scale: bool,
    #[arg(long, env = "ISALSR_SEED", default_value_t = BASE_SEED)]
    seed: u64,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, default_value = "results")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    strip_var_inputs: bool,
}

fn load_graph(input: &str, m: usize, opset: OperationSet) -> Result<LabeledDag> {
    let path = Path::new(input);
    if input.ends_with(".json") || path.is_file() {
        return read_dag(path);
    }
    s2d(input, m, &opset).with_context(|| format!("decoding '{input}'"))
}

fn read_dag(path: &Path) -> Result<LabeledDag> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    LabeledDag::from_json_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn describe(label: &str, dag: &LabeledDag) {
    println!("{label}: {}", dag.to_infix());
    println!("{}", dag.to_json_string());
}

fn seconds(s: f64) -> Result<Duration> {
    Duration::try_from_secs_f64(s).with_context(|| format!("bad timeout {s}"))
}

fn run() -> Result<ExitCode> {
    match Cli::parse().command {
        Command::Decode(g) => describe("infix", &g.load()?),
        Command::Encode { dag } => {
            let d = read_dag(&dag)?;
            println!("{}", d2s(&d)?);
        }
        Command::Roundtrip(g) => {
            let d = g.load()?;
            let w = d2s(&d)?;
            let back = s2d(&w, d.num_vars(), &g.opset.get())?;
            let ok = isomorphic(&d, &back).is_some();
            println!("{} {w}", if ok { "PASS" } else { "FAIL" });
            describe("original", &d);
            describe("decoded", &back);
            if !ok {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Canon { graph, mode, timeout, strip_var_inputs } => {
            let d = graph.load()?;
            let mode = match mode {
                Mode::Pruned => SearchMode::Pruned,
                Mode::Exhaustive => SearchMode::Exhaustive,
            };
            let req = CanonicalRequest::new(&d, mode)
                .deadline(seconds(timeout)?)
                .normalize_var_inputs(strip_var_inputs);
            match canonical(&req) {
                Ok(r) => {
                    println!("{}", r.string);
                    println!("length {} elapsed {:.3} ms branches {}", r.string.len(), r.elapsed.as_secs_f64() * 1e3, r.branch_count);
                }
                Err(e @ CanonError::Timeout { .. }) => {
                    eprintln!("{e}");
                    return Ok(ExitCode::from(EXIT_TIMEOUT));
                }
                Err(e @ CanonError::Unencodable(_)) => {
                    eprintln!("{e}");
                    return Ok(ExitCode::from(EXIT_UNENCODABLE));
                }
            }
        }
        Command::Iso { first, second } => match isomorphic(&read_dag(&first)?, &read_dag(&second)?) {
            Some(w) => {
                let pairs: Vec<String> = w.0.iter().enumerate().map(|(a, b)| format!("{a}->{b}")).collect();
                println!("{}", pairs.join(" "));
            }
            None => {
                println!("NOT ISOMORPHIC");
                return Ok(ExitCode::FAILURE);
            }
        },
        Command::Metric(MetricCommand::Dist { first, second }) => {
            let (d, script) = levenshtein(&first, &second);
            println!("{d}");
            println!("{script}");
        }
        Command::Metric(MetricCommand::Neigh { string, vars, timeout }) => {
            let study = metric_studies::run_neighbourhood_of(&string, vars, seconds(timeout)?);
            print!("{}", report::to_csv(&study)?);
        }
        Command::Gen(GenCommand::Dag { k, m, sample, seed }) => {
            let d = random_dag_seeded(k, m, isalsr_core::generators::dag_seed(seed, k, m, sample));
            println!("{}", d.to_json_string());
        }
        Command::Gen(GenCommand::String { max_tokens, m, seed }) => {
            match random_string(max_tokens, m, &OperationSet::full(), seed) {
                Some(r) => println!("{}", r.text),
                None => bail!("seed {seed} gives a string without internal nodes"),
            }
        }
        Command::Bench(BenchCommand::Show { name }) => {
            let b = benchmark(&name)?;
            let d = &b.dag;
            println!("{} {:?}: {}", b.name, b.suite, b.formula);
            println!("vars {} nodes {} edges {} depth {}", b.m, d.len(), d.edge_count(), d.depth());
            println!("automorphisms {}", count_automorphisms(d));
            println!("greedy    {}", d2s(d)?);
            let req = CanonicalRequest::new(d, SearchMode::Pruned).deadline(Duration::from_secs(60));
            match canonical(&req) {
                Ok(r) => println!("canonical {} (length {})", r.string, r.string.len()),
                Err(e) => println!("canonical: {e}"),
            }
            println!("{}", d.to_json_string());
        }
        Command::Bench(BenchCommand::Data { name, split, out }) => {
            let b = benchmark(&name)?;
            let data = b.sample(match split {
                SplitArg::Train => Split::Train,
                SplitArg::Test => Split::Test,
            });
            let mut w = csv::Writer::from_writer(Vec::new());
            let mut header: Vec<String> = (0..b.m).map(|i| format!("x{i}")).collect();
            header.push("y".into());
            w.write_record(&header)?;
            for (x, y) in data.inputs.iter().zip(&data.targets) {
                let mut rec: Vec<String> = x.iter().map(f64::to_string).collect();
                rec.push(y.to_string());
                w.write_record(&rec)?;
            }
            let bytes = w.into_inner().map_err(|e| e.into_error())?;
            match out {
                Some(p) => fs::write(&p, bytes).with_context(|| format!("writing {}", p.display()))?,
                None => print!("{}", String::from_utf8(bytes)?),
            }
        }
        Command::Exp { suite, opts } => {
            let checks = run_suite(suite, &opts)?;
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if !experiments::all_passed(&checks) {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn emit<T: Table + serde::Serialize>(opts: &ExpOpts, name: &str, table: &T) -> Result<()> {
    match opts.format {
        Format::Csv => report::write_csv(&opts.out.join(format!("{name}.csv")), table)?,
        Format::Json => report::write_json(&opts.out.join(format!("{name}.json")), name, table)?,
    }
    Ok(())
}

fn run_suite(suite: Suite, opts: &ExpOpts) -> Result<Vec<Check>> {
    match suite {
        Suite::Properties => {
            let mut cfg = if opts.paper_scale {
                properties::PropertiesConfig::full_scale()
            } else {
                properties::PropertiesConfig::desk()
            };
            cfg.seed = opts.seed;
            cfg.workers = opts.workers;
            cfg.strip_var_inputs = opts.strip_var_inputs;
            let r = properties::run_properties(&cfg);
            if opts.format == Format::Json {
                report::write_json(&opts.out.join("properties.json"), "properties", &r)?;
            } else {
                report::write_csv(&opts.out.join("properties_summary.csv"), &properties::Summary(&r))?;
                report::write_csv(&opts.out.join("properties_samples.csv"), &properties::Samples(&r))?;
            }
            for row in &r.summary {
                println!(
                    "m={} valid {} p1 {} p2 {} p4 {} p3 {}/{} (timeouts {}, unencodable {}) [{:.5}, {:.5}]",
                    row.m, row.valid, row.p1_pass, row.p2_pass, row.p4_pass, row.p3_pass, row.p3_eval,
                    row.p3_timeout, row.p3_unencodable, row.p3_lo, row.p3_hi
                );
            }
            Ok(properties::checks(&r))
        }
        Suite::SearchSpace => {
            let mut cfg = if opts.paper_scale {
                search_space::SearchSpaceConfig::full_scale()
            } else {
                search_space::SearchSpaceConfig::desk()
            };
            cfg.seed = opts.seed;
            cfg.workers = opts.workers;
            let r = search_space::run_search_space(&cfg);
            if opts.format == Format::Json {
                report::write_json(&opts.out.join("search_space.json"), "search_space", &r)?;
            } else {
                emit(opts, "search_space", &r)?;
            }
            for (k, m, n) in &r.shortfalls {
                println!("k={k} m={m}: only {n} unique DAGs");
            }
            Ok(search_space::checks(&r))
        }
        Suite::Scalability => {
            let mut cfg = if opts.paper_scale {
                scalability::ScalabilityConfig::full_scale()
            } else {
                scalability::ScalabilityConfig::desk()
            };
            cfg.seed = opts.seed;
            cfg.workers = opts.workers;
            let r = scalability::run_scalability(&cfg);
            if opts.format == Format::Json {
                report::write_json(&opts.out.join("scalability.json"), "scalability", &r)?;
            } else {
                report::write_csv(&opts.out.join("scalability_summary.csv"), &scalability::Summaries(&r))?;
                report::write_csv(&opts.out.join("scalability_runs.csv"), &scalability::Runs(&r))?;
            }
            for s in &r.summary {
                let ms = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.3}"));
                println!(
                    "k={} m={} exhaustive {} ms ({} timeouts) pruned {} ms ({} timeouts) speedup {} agree {}/{}",
                    s.k, s.m, ms(s.exhaustive_median_ms), s.exhaustive_timeouts, ms(s.pruned_median_ms),
                    s.pruned_timeouts, ms(s.speedup), s.agree, s.compared
                );
            }
            Ok(scalability::checks(&r))
        }
        Suite::ShortestPath => {
            let r = metric_studies::run_shortest_path(Duration::from_secs(5));
            emit(opts, "shortest_path", &r)?;
            for row in &r.rows {
                println!("{} {} | {} -> {}: {}", row.pair, row.canonical1, row.canonical2, row.script, row.distance);
            }
            Ok(metric_studies::shortest_path_checks(&r))
        }
        Suite::Neighbourhood => {
            let r = metric_studies::run_neighbourhood(Duration::from_secs(5));
            emit(opts, "neighbourhood", &r)?;
            print!("{}", report::to_csv(&r)?);
            Ok(metric_studies::neighbourhood_checks(&r))
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
