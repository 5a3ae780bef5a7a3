use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use displacer_core::displacer::QueryTemplate;
use displacer_core::harness::datasets::{self, gold_by_input};
use displacer_core::harness::world::{self, gen_synthetic_world, SyntheticWorldSpec};
use displacer_core::harness::{
    run_gender, run_parts, run_query, run_rank_probability, run_sat, run_sswr, sweep_neighbors, AnalogyMode,
    ExperimentReport, HarnessError, QueryMode, RunConfig, StorePaths, Stores, CAPITAL_TEMPLATE, GENDER_TEMPLATE,
    PARTS_TEMPLATE,
};
use displacer_core::kb::QueryExpr;
use displacer_core::SearchMode;

const EXIT_DATA: u8 = 2;
const EXIT_CONFIG: u8 = 3;

/// Answer knowledge-base queries for terms the KB does not cover, using
/// displacement vectors in a word embedding space.
#[derive(Parser, Debug)]
#[command(name = "displacer", version)]
struct Cli {
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a query against the KB or by displacement from covered neighbors.
    Query {
        #[command(flatten)]
        common: Common,
        /// Query text, e.g. "(capitalCity ?X Germany)".
        query: String,
        /// kb, hybrid-single or hybrid-multi.
        #[arg(long, default_value = "kb")]
        mode: QueryMode,
        /// Constant to displace from when the query has several.
        #[arg(long)]
        term: Option<String>,
    },
    /// Classify names by the gender of nearby names known to the KB.
    Gender {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        template: TemplateArgs,
        /// CSV of `name,gender` rows [default: <world>/names.csv].
        #[arg(long)]
        names: Option<PathBuf>,
        /// majority or label-vector.
        #[arg(long)]
        mode: Option<String>,
    },
    /// Leave-one-out table of the rank at which the true answer appears.
    RankProb {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        template: TemplateArgs,
        /// Extra condition on the input variable, e.g. "(isa ?X Country)".
        #[arg(long)]
        domain: Option<String>,
        /// Nearest-neighbor search: exact or approximate.
        #[arg(long)]
        mode: Option<SearchMode>,
    },
    /// Multi-answer displacement over a machine list.
    Parts {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        template: TemplateArgs,
        /// One machine term per line [default: <world>/machines.txt].
        #[arg(long)]
        machines: Option<PathBuf>,
        /// Gold TSV for precision [default: <world>/gold.tsv when present].
        #[arg(long)]
        gold: Option<PathBuf>,
        /// Nearest-neighbor search: exact or approximate.
        #[arg(long)]
        mode: Option<SearchMode>,
    },
    /// Four-term analogy accuracy per category.
    Sswr {
        #[command(flatten)]
        common: Common,
        /// `: category` headers and `a b c d` lines [default: <world>/sswr.txt].
        #[arg(long)]
        file: Option<PathBuf>,
        /// dsvs, kb or combined.
        #[arg(long, default_value = "combined")]
        mode: AnalogyMode,
    },
    /// Open-ended SAT-style analogies scored against gold and alternates.
    Sat {
        #[command(flatten)]
        common: Common,
        /// SAT item file [default: <world>/sat.txt].
        #[arg(long)]
        file: Option<PathBuf>,
        /// dsvs, kb or combined.
        #[arg(long, default_value = "combined")]
        mode: AnalogyMode,
    },
    /// Rank tables across a range of neighbor counts.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        template: TemplateArgs,
        #[arg(long)]
        domain: Option<String>,
        #[arg(long)]
        min: Option<usize>,
        #[arg(long)]
        max: Option<usize>,
        /// Nearest-neighbor search: exact or approximate.
        #[arg(long)]
        mode: Option<SearchMode>,
    },
    /// Write a synthetic world with planted relations.
    GenWorld {
        /// capitals, gender, machines, analogy or demo.
        #[arg(long, default_value = "demo")]
        preset: String,
        /// TOML world spec; replaces the preset.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Directory written by gen-world; supplies default store and dataset paths.
    #[arg(long)]
    world: Option<PathBuf>,
    #[arg(long)]
    kb: Option<PathBuf>,
    /// word2vec text format.
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// TSV: term, concept, part of speech, number.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Flat key = value file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one setting, e.g. --set n_neighbors=5.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Write the report as JSON lines here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TemplateArgs {
    /// Query with an input and an answer variable.
    #[arg(long)]
    template: Option<String>,
    #[arg(long, requires = "template")]
    input_var: Option<String>,
    #[arg(long, requires = "template")]
    answer_var: Option<String>,
}

#[derive(Debug)]
struct ConfigError(String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn config_err(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

impl TemplateArgs {
    fn resolve(&self, default: (&str, &str, &str)) -> Result<QueryTemplate> {
        let text = self.template.as_deref().unwrap_or(default.0);
        let input = self.input_var.as_deref().unwrap_or(default.1);
        let answer = self.answer_var.as_deref().unwrap_or(default.2);
        QueryTemplate::parse(text, input.trim_start_matches('?'), answer.trim_start_matches('?'))
            .map_err(|e| config_err(format!("template: {e}")))
    }
}

impl Common {
    fn run_config(&self, search: Option<SearchMode>) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path)
                .map_err(|e| config_err(format!("cannot read config {}: {e}", path.display())))?;
            cfg.apply_str(&text)
                .map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        }
        for kv in &self.overrides {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| config_err(format!("--set expects KEY=VALUE, got {kv:?}")))?;
            cfg.set(k.trim(), v.trim())
                .map_err(|e| config_err(format!("--set {kv}: {e}")))?;
        }
        if let Some(seed) = self.seed {
            cfg.pipeline.seed = seed;
        }
        if let Some(mode) = search {
            cfg.search_mode = mode;
        }
        cfg.validate().map_err(|e| config_err(e.to_string()))?;
        Ok(cfg)
    }

    fn store_paths(&self) -> Result<StorePaths> {
        let base = self.world.as_ref().map(StorePaths::in_world_dir);
        let pick = |explicit: &Option<PathBuf>, from_world: Option<&PathBuf>, flag: &str| {
            explicit
                .clone()
                .or_else(|| from_world.cloned())
                .ok_or_else(|| config_err(format!("missing --{flag} (or --world)")))
        };
        Ok(StorePaths {
            kb: pick(&self.kb, base.as_ref().map(|b| &b.kb), "kb")?,
            embeddings: pick(&self.embeddings, base.as_ref().map(|b| &b.embeddings), "embeddings")?,
            lexicon: pick(&self.lexicon, base.as_ref().map(|b| &b.lexicon), "lexicon")?,
        })
    }

    fn stores(&self, cfg: &RunConfig) -> Result<Stores> {
        let paths = self.store_paths()?;
        log::info!("loading stores: {paths:?}");
        let mut stores = Stores::load(&paths, cfg)?;
        if let Some(w) = &self.world {
            stores.source = format!("synthetic world {}", w.display());
        }
        log::info!(
            "loaded {} facts, {} vectors, {} lexicon entries",
            stores.kb.fact_count(),
            stores.space.len(),
            stores.lexicon.len()
        );
        Ok(stores)
    }

    /// An explicit dataset path, or the named file inside `--world`.
    fn dataset(&self, explicit: &Option<PathBuf>, file: &str, flag: &str) -> Result<PathBuf> {
        explicit
            .clone()
            .or_else(|| self.world.as_ref().map(|w| w.join(file)))
            .ok_or_else(|| config_err(format!("missing --{flag} (or --world)")))
    }

    fn emit(&self, out: &mut impl Write, report: &ExperimentReport) -> Result<()> {
        out.write_all(report.summary_table().as_bytes())?;
        if let Some(path) = &self.out {
            let file = fs::File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
            report.write_jsonl(std::io::BufWriter::new(file))?;
            log::info!("report written to {}", path.display());
        }
        Ok(())
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn parse_domain(text: &Option<String>) -> Result<Option<QueryExpr>> {
    text.as_deref()
        .map(|d| QueryExpr::parse(d).map_err(|e| config_err(format!("domain: {e}"))))
        .transpose()
}

fn run(cli: Cli) -> Result<()> {
    let mut stdout = std::io::stdout().lock();
    match cli.command {
        Command::Query {
            common,
            query,
            mode,
            term,
        } => {
            let cfg = common.run_config(None)?;
            let stores = common.stores(&cfg)?;
            let answers = run_query(&stores, &query, mode, term.as_deref(), &cfg)?;
            if answers.is_empty() {
                writeln!(stdout, "no answers")?;
            }
            for (i, a) in answers.iter().enumerate() {
                match (a.score, a.support) {
                    (Some(score), Some(support)) => writeln!(
                        stdout,
                        "{:>3}. {}\tscore={score:.4}\tsupport={support}",
                        i + 1,
                        a.answer
                    )?,
                    _ => writeln!(stdout, "{:>3}. {}", i + 1, a.answer)?,
                }
            }
            if let Some(path) = &common.out {
                let mut f = std::io::BufWriter::new(fs::File::create(path)?);
                for a in &answers {
                    serde_json::to_writer(&mut f, a)?;
                    writeln!(f)?;
                }
            }
        }
        Command::Gender {
            common,
            template,
            names,
            mode,
        } => {
            let mut common = common;
            if let Some(m) = mode {
                common.overrides.push(format!("classify_mode={m}"));
            }
            let cfg = common.run_config(None)?;
            let t = template.resolve(GENDER_TEMPLATE)?;
            let rows = datasets::parse_names(&read(&common.dataset(&names, world::NAMES_FILE, "names")?)?)?;
            let stores = common.stores(&cfg)?;
            common.emit(&mut stdout, &run_gender(&stores, &rows, &t, &cfg)?)?;
        }
        Command::RankProb {
            common,
            template,
            domain,
            mode,
        } => {
            let cfg = common.run_config(mode)?;
            let t = template.resolve(CAPITAL_TEMPLATE)?;
            let domain = parse_domain(&domain)?;
            let stores = common.stores(&cfg)?;
            common.emit(&mut stdout, &run_rank_probability(&stores, &t, domain.as_ref(), &cfg)?)?;
        }
        Command::Parts {
            common,
            template,
            machines,
            gold,
            mode,
        } => {
            let cfg = common.run_config(mode)?;
            let t = template.resolve(PARTS_TEMPLATE)?;
            let list =
                datasets::parse_machine_list(&read(&common.dataset(&machines, world::MACHINES_FILE, "machines")?)?)?;
            let gold_path = gold.or_else(|| {
                common
                    .world
                    .as_ref()
                    .map(|w| w.join(world::GOLD_FILE))
                    .filter(|p| p.exists())
            });
            let gold = match gold_path {
                Some(p) => Some(gold_by_input(&datasets::parse_gold(&read(&p)?)?, "parts")),
                None => None,
            };
            let stores = common.stores(&cfg)?;
            common.emit(&mut stdout, &run_parts(&stores, &list, gold.as_ref(), &t, &cfg)?)?;
        }
        Command::Sswr { common, file, mode } => {
            let cfg = common.run_config(None)?;
            let items = datasets::parse_sswr(&read(&common.dataset(&file, world::SSWR_FILE, "file")?)?)?;
            let stores = common.stores(&cfg)?;
            common.emit(&mut stdout, &run_sswr(&stores, &items, mode, &cfg)?)?;
        }
        Command::Sat { common, file, mode } => {
            let cfg = common.run_config(None)?;
            let items = datasets::parse_sat(&read(&common.dataset(&file, world::SAT_FILE, "file")?)?)?;
            let stores = common.stores(&cfg)?;
            common.emit(&mut stdout, &run_sat(&stores, &items, mode, &cfg)?)?;
        }
        Command::Sweep {
            common,
            template,
            domain,
            min,
            max,
            mode,
        } => {
            let cfg = common.run_config(mode)?;
            let t = template.resolve(CAPITAL_TEMPLATE)?;
            let domain = parse_domain(&domain)?;
            let range = min.unwrap_or(cfg.sweep_min)..=max.unwrap_or(cfg.sweep_max);
            let stores = common.stores(&cfg)?;
            common.emit(
                &mut stdout,
                &sweep_neighbors(&stores, &t, domain.as_ref(), range, &cfg)?,
            )?;
        }
        Command::GenWorld {
            preset,
            spec,
            seed,
            out,
        } => {
            let mut spec = match spec {
                Some(path) => {
                    let text = fs::read_to_string(&path)
                        .map_err(|e| config_err(format!("cannot read spec {}: {e}", path.display())))?;
                    SyntheticWorldSpec::from_toml(&text)?
                }
                None => SyntheticWorldSpec::preset(&preset, 0)?,
            };
            if let Some(s) = seed {
                spec.seed = s;
            }
            let generated = gen_synthetic_world(&spec)?;
            generated
                .write_to(&out)
                .with_context(|| format!("cannot write world to {}", out.display()))?;
            for name in generated.files.keys() {
                writeln!(stdout, "{}", out.join(name).display())?;
            }
        }
    }
    Ok(())
}

fn is_broken_pipe(err: &anyhow::Error) -> bool {
    err.chain().any(|c| {
        c.downcast_ref::<std::io::Error>()
            .is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
    })
}

/// The error chain, dropping causes already quoted by their parent.
fn describe(err: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in err.chain() {
        let msg = cause.to_string();
        if !out.contains(&msg) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&msg);
        }
    }
    out
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let config = err.downcast_ref::<ConfigError>().is_some()
        || err.downcast_ref::<HarnessError>().is_some_and(HarnessError::is_config);
    if config {
        EXIT_CONFIG
    } else {
        EXIT_DATA
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}
