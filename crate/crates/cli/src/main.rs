use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use liftcount::arith::{render, to_decimal};
use liftcount::cq::{cq_wfomc, gamma_reduce, QueryHypergraph};
use liftcount::fo2::{wfomc_fo2_with, Fo2Config};
use liftcount::ground::{brute_wfomc, count_models, wfomc_direct, OracleConfig};
use liftcount::logic::analyze::qs4_relation;
use liftcount::logic::{analyze, parse_inferring, Formula, WeightedVocabulary};
use liftcount::reductions::{
    mln_direct, mln_probability, reduce_arity, remove_equality, remove_negation, scott_reduce,
    skolemize, MlnModel, TransformResult,
};
use liftcount::special::{benchmark_corpus, wfomc_qs4, ClosedForm};
use liftcount::{Error, Rational};

#[derive(Parser)]
#[command(name = "liftcount", version, about = "Exact weighted first-order model counting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Weighted model count of a sentence
    Wfomc(CountArgs),
    /// Model count of a sentence (all weights 1)
    Fomc(CountArgs),
    /// Apply one reduction and print the result with its weights
    Transform(TransformArgs),
    /// Probability of a query in a Markov logic network
    Mln(MlnArgs),
    /// Decide gamma-acyclicity of a conjunctive query
    GammaCheck(GammaArgs),
    /// Compare methods on n = 0..max-n
    Verify(VerifyArgs),
    /// List the bundled corpus, optionally with model counts
    Corpus(CorpusArgs),
}

#[derive(Args)]
struct Input {
    #[arg(short = 'f', long = "formula")]
    formula: PathBuf,
    #[arg(short = 'w', long = "weights")]
    weights: Option<PathBuf>,
}

#[derive(Args)]
struct CountArgs {
    #[command(flatten)]
    input: Input,
    #[arg(short = 'n')]
    n: usize,
    /// auto, brute, lineage, fo2, cq, qs4 or closed:<name>
    #[arg(long, default_value = "auto")]
    method: String,
    /// Per-variable domain sizes for conjunctive queries, e.g. x=3,y=5
    #[arg(long)]
    domains: Option<String>,
    /// Also print a decimal approximation with this many digits
    #[arg(long)]
    decimal: Option<usize>,
    #[arg(long)]
    cap: Option<usize>,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Transformation {
    #[arg(long)]
    skolemize: bool,
    #[arg(long)]
    remove_negation: bool,
    #[arg(long)]
    remove_equality: bool,
    #[arg(long)]
    scott: bool,
    #[arg(long)]
    reduce_arity: bool,
}

#[derive(Args)]
struct TransformArgs {
    #[command(flatten)]
    input: Input,
    #[command(flatten)]
    which: Transformation,
}

#[derive(Args)]
struct MlnArgs {
    #[arg(short = 'm', long = "mln")]
    mln: PathBuf,
    #[arg(short = 'q', long = "query")]
    query: PathBuf,
    #[arg(short = 'w', long = "weights")]
    weights: Option<PathBuf>,
    #[arg(short = 'n')]
    n: usize,
    /// direct or reduction
    #[arg(long, default_value = "reduction")]
    method: String,
    #[arg(long)]
    decimal: Option<usize>,
    #[arg(long)]
    cap: Option<usize>,
}

#[derive(Args)]
struct GammaArgs {
    #[arg(short = 'q', long = "query")]
    query: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, default_value_t = 3)]
    max_n: usize,
    /// Comma-separated methods; defaults to fo2,brute for two-variable input
    #[arg(long)]
    methods: Option<String>,
    #[arg(long)]
    cap: Option<usize>,
}

#[derive(Args)]
struct CorpusArgs {
    /// Count models of each sentence at this domain size
    #[arg(short = 'n')]
    n: Option<usize>,
    #[arg(long)]
    cap: Option<usize>,
}

enum Failure {
    Engine(Error),
    Io(String),
    Mismatch,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Engine(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Engine(Error::OutOfScope(_) | Error::NotGammaAcyclic(_)) => 3,
            Failure::Engine(Error::ResourceCap { .. }) => 4,
            Failure::Engine(_) | Failure::Io(_) => 2,
            Failure::Mismatch => 5,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Engine(e) => write!(f, "{e}"),
            Failure::Io(m) => write!(f, "{m}"),
            Failure::Mismatch => write!(f, "methods disagree"),
        }
    }
}

type Outcome<T = ()> = std::result::Result<T, Failure>;

fn read(path: &Path) -> Outcome<String> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn load(input: &Input) -> Outcome<(Formula, WeightedVocabulary)> {
    let (phi, _) = parse_inferring(&read(&input.formula)?)?;
    let mut vocab = match &input.weights {
        Some(p) => WeightedVocabulary::from_json(&read(p)?)?,
        None => WeightedVocabulary::new(),
    };
    vocab.extend_unit(&phi.relations())?;
    Ok((phi, vocab))
}

fn oracle(cap: Option<usize>) -> OracleConfig {
    cap.map_or_else(OracleConfig::default, OracleConfig::with_cap)
}

fn parse_domains(text: &str) -> Outcome<BTreeMap<String, u64>> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|item| {
            let (v, n) = item
                .split_once('=')
                .ok_or_else(|| Failure::Io(format!("--domains: expected var=size, got `{item}`")))?;
            let n = n
                .trim()
                .parse::<u64>()
                .map_err(|_| Failure::Io(format!("--domains: bad size in `{item}`")))?;
            Ok((v.trim().to_string(), n))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
enum Method {
    Auto,
    Brute,
    Lineage,
    Fo2,
    Cq,
    Qs4,
    Closed(ClosedForm),
}

impl Method {
    fn parse(name: &str) -> Outcome<Method> {
        Ok(match name {
            "auto" => Method::Auto,
            "brute" => Method::Brute,
            "lineage" => Method::Lineage,
            "fo2" => Method::Fo2,
            "cq" => Method::Cq,
            "qs4" => Method::Qs4,
            other => match other.strip_prefix("closed:") {
                Some(c) => Method::Closed(ClosedForm::from_name(c)?),
                None => return Err(Failure::Io(format!("unknown method `{other}`"))),
            },
        })
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Auto => write!(f, "auto"),
            Method::Brute => write!(f, "brute"),
            Method::Lineage => write!(f, "lineage"),
            Method::Fo2 => write!(f, "fo2"),
            Method::Cq => write!(f, "cq"),
            Method::Qs4 => write!(f, "qs4"),
            Method::Closed(c) => write!(f, "closed:{}", c.name()),
        }
    }
}

struct Job<'a> {
    phi: &'a Formula,
    vocab: &'a WeightedVocabulary,
    n: usize,
    domains: &'a BTreeMap<String, u64>,
    config: &'a OracleConfig,
}

fn run(method: &Method, job: &Job) -> liftcount::Result<Rational> {
    if !job.domains.is_empty() && !matches!(method, Method::Cq | Method::Auto) {
        return Err(Error::Invalid("--domains only applies to the cq method".into()));
    }
    match method {
        Method::Brute => wfomc_direct(job.phi, job.n, job.vocab, job.config),
        Method::Lineage => brute_wfomc(job.phi, job.n, job.vocab, job.config),
        Method::Fo2 => {
            let cfg = Fo2Config {
                oracle: job.config.clone(),
                ..Fo2Config::default()
            };
            wfomc_fo2_with(job.phi, job.n, job.vocab, &cfg)
        }
        Method::Cq => cq_wfomc(job.phi, job.n as u64, job.vocab, job.domains),
        Method::Qs4 => {
            let s = qs4_relation(job.phi)
                .ok_or_else(|| Error::OutOfScope("sentence is not Q_S4".into()))?;
            let mut total = Rational::from_integer(1.into());
            for r in job.vocab.relations() {
                if r.symbol.name == s {
                    total *= wfomc_qs4(job.n, &r.w, &r.wbar);
                } else {
                    let tuples = (job.n as u64).pow(r.symbol.arity as u32);
                    total *= liftcount::arith::pow(&(&r.w + &r.wbar), tuples);
                }
            }
            Ok(total)
        }
        Method::Closed(c) => {
            let (expected, _) = parse_inferring(c.sentence())?;
            if *job.phi != expected {
                return Err(Error::OutOfScope(format!(
                    "closed form {} counts `{}`",
                    c.name(),
                    c.sentence()
                )));
            }
            let extra: Vec<_> = job
                .vocab
                .relations()
                .iter()
                .filter(|r| !expected.relations().contains_key(&r.symbol.name))
                .collect();
            if !extra.is_empty() {
                return Err(Error::OutOfScope("closed forms take no extra relations".into()));
            }
            Ok(c.evaluate(job.n as u64, job.vocab))
        }
        Method::Auto => auto(job),
    }
}

/// Most specialised method first; a method that declines passes the
/// sentence on.
fn auto(job: &Job) -> liftcount::Result<Rational> {
    let declined = |e: &Error| {
        matches!(
            e,
            Error::OutOfScope(_) | Error::NotGammaAcyclic(_) | Error::Invalid(_) | Error::ResourceCap { .. }
        )
    };
    let class = analyze(job.phi);
    if !job.domains.is_empty() {
        return run(&Method::Cq, job);
    }
    if class.qs4 {
        return run(&Method::Qs4, job);
    }
    if class.cq_without_self_joins {
        match run(&Method::Cq, job) {
            Err(e) if declined(&e) => {}
            other => return other,
        }
    }
    if class.fo2 {
        match run(&Method::Fo2, job) {
            Err(e) if declined(&e) => {}
            other => return other,
        }
    }
    match run(&Method::Lineage, job) {
        Err(Error::ResourceCap { limit, actual, .. }) => Err(Error::OutOfScope(format!(
            "no lifted method applies and grounding needs {actual} variables (cap {limit})"
        ))),
        other => other,
    }
}

fn print_value(q: &Rational, decimal: Option<usize>) {
    println!("{}", render(q));
    if let Some(d) = decimal {
        println!("{}", to_decimal(q, d));
    }
}

fn count(args: &CountArgs, unit: bool) -> Outcome {
    let (phi, mut vocab) = load(&args.input)?;
    if unit {
        let names: Vec<String> = vocab.relations().iter().map(|r| r.symbol.name.clone()).collect();
        for name in names {
            vocab.set_weights(&name, Rational::from_integer(1.into()), Rational::from_integer(1.into()))?;
        }
    }
    let domains = match &args.domains {
        Some(d) => parse_domains(d)?,
        None => BTreeMap::new(),
    };
    let config = oracle(args.cap);
    let method = Method::parse(&args.method)?;
    let job = Job {
        phi: &phi,
        vocab: &vocab,
        n: args.n,
        domains: &domains,
        config: &config,
    };
    print_value(&run(&method, &job)?, args.decimal);
    Ok(())
}

fn transform(args: &TransformArgs) -> Outcome {
    let (phi, vocab) = load(&args.input)?;
    let t = &args.which;
    let out: TransformResult = if t.skolemize {
        skolemize(&phi, &vocab)?
    } else if t.remove_negation {
        remove_negation(&phi, &vocab)?
    } else if t.remove_equality {
        remove_equality(&phi, &vocab)?.0
    } else if t.scott {
        scott_reduce(&phi, &vocab)?
    } else {
        reduce_arity(&phi, &vocab)?
    };
    println!("{}", out.formula);
    println!("{}", out.vocab.to_json());
    Ok(())
}

/// Lifted when possible, grounded otherwise.
fn best_count(phi: &Formula, vocab: &WeightedVocabulary, n: usize, config: &OracleConfig) -> liftcount::Result<Rational> {
    let cfg = Fo2Config {
        oracle: config.clone(),
        ..Fo2Config::default()
    };
    match wfomc_fo2_with(phi, n, vocab, &cfg) {
        Err(Error::OutOfScope(_) | Error::ResourceCap { .. }) => brute_wfomc(phi, n, vocab, config),
        other => other,
    }
}

fn mln(args: &MlnArgs) -> Outcome {
    let (model, symbols) = MlnModel::parse(&read(&args.mln)?)?;
    let (query, _) = parse_inferring(&read(&args.query)?)?;
    let mut vocab = match &args.weights {
        Some(p) => WeightedVocabulary::from_json(&read(p)?)?,
        None => WeightedVocabulary::new(),
    };
    for s in symbols {
        vocab.extend_unit(&BTreeMap::from([(s.name, s.arity)]))?;
    }
    vocab.extend_unit(&query.relations())?;
    let config = oracle(args.cap);
    let value = match args.method.as_str() {
        "direct" => mln_direct(&model, &query, args.n, &vocab, &config)?,
        "reduction" => mln_probability(&model, &query, &vocab, |f, v| best_count(f, v, args.n, &config))?,
        other => return Err(Failure::Io(format!("unknown MLN method `{other}`"))),
    };
    print_value(&value, args.decimal);
    Ok(())
}

fn gamma_check(args: &GammaArgs) -> Outcome {
    let (query, symbols) = parse_inferring(&read(&args.query)?)?;
    let probs = symbols
        .into_iter()
        .map(|s| (s.name, Rational::from_integer(1.into())))
        .collect();
    let h = QueryHypergraph::from_formula(&query, &probs, 1, &BTreeMap::new())?;
    match gamma_reduce(&h) {
        Ok(trace) => {
            println!("gamma-acyclic");
            for step in trace {
                println!("  {step}");
            }
        }
        Err(Error::NotGammaAcyclic(state)) => {
            println!("not gamma-acyclic");
            println!("  stalled at {state}");
            let seps = h.separators();
            if !seps.is_empty() {
                println!("  separator variable(s): {}", seps.join(", "));
            }
        }
        Err(e) => return Err(e.into()),
    }
    Ok(())
}

fn verify(args: &VerifyArgs) -> Outcome {
    let (phi, vocab) = load(&args.input)?;
    let names = match &args.methods {
        Some(m) => m.clone(),
        None if analyze(&phi).fo2 => "fo2,brute".into(),
        None => "auto,brute".into(),
    };
    let methods: Vec<Method> = names
        .split(',')
        .map(|m| Method::parse(m.trim()))
        .collect::<Outcome<_>>()?;
    let config = oracle(args.cap);
    let domains = BTreeMap::new();
    let mut mismatch = false;
    println!("n\t{}\tstatus", methods.iter().map(|m| m.to_string()).collect::<Vec<_>>().join("\t"));
    for n in 0..=args.max_n {
        let job = Job {
            phi: &phi,
            vocab: &vocab,
            n,
            domains: &domains,
            config: &config,
        };
        let mut cells = Vec::new();
        let mut values = Vec::new();
        for m in &methods {
            match run(m, &job) {
                Ok(v) => {
                    cells.push(render(&v));
                    values.push(v);
                }
                Err(Error::ResourceCap { .. }) => cells.push("skipped".into()),
                Err(e) => return Err(e.into()),
            }
        }
        let agree = values.windows(2).all(|w| w[0] == w[1]);
        mismatch |= !agree;
        let status = match (agree, values.len()) {
            (false, _) => "MISMATCH",
            (true, 0 | 1) => "unchecked",
            (true, _) => "ok",
        };
        println!("{n}\t{}\t{status}", cells.join("\t"));
    }
    if mismatch {
        Err(Failure::Mismatch)
    } else {
        Ok(())
    }
}

fn corpus(args: &CorpusArgs) -> Outcome {
    let config = oracle(args.cap);
    for (name, phi) in benchmark_corpus() {
        match args.n {
            None => println!("{name}\t{phi}"),
            Some(n) => {
                let vocab = WeightedVocabulary::unit(
                    phi.relations()
                        .into_iter()
                        .map(|(r, a)| liftcount::logic::RelationSymbol::new(r, a)),
                )?;
                match count_models(&phi, n, &vocab, &config) {
                    Ok(c) => println!("{name}\t{c}"),
                    Err(Error::ResourceCap { .. }) => println!("{name}\tskipped"),
                    Err(e) => return Err(e.into()),
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Wfomc(a) => count(a, false),
        Command::Fomc(a) => count(a, true),
        Command::Transform(a) => transform(a),
        Command::Mln(a) => mln(a),
        Command::GammaCheck(a) => gamma_check(a),
        Command::Verify(a) => verify(a),
        Command::Corpus(a) => corpus(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if !matches!(f, Failure::Mismatch) {
                eprintln!("error: {f}");
            }
            ExitCode::from(f.code())
        }
    }
}
