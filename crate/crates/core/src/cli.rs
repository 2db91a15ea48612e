//! Command-line front end: `stats`, `embed`, `eval`, `bench`, `weights-plot`.
//!
//! Every setting resolves as command-line flag, then `--config` file
//! (`key=value` lines, keys spelled like the long flags), then default.

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use crate::common_component::{first_principal_component_with, format_component, remove_common_component, PcaOptions};
use crate::corpus_stats::{tokenize, CorpusStats, CorpusStatsBuilder, DocTermStats, SplitPolicy, TermStatsOptions, TokenizerConfig};
use crate::embedder::{embed_batch, read_embeddings, write_embeddings, write_skip_report, EmbeddingForm, FormKind};
use crate::evaluation::{evaluate, read_pairs, write_scored, EvalResult};
use crate::harness::{corpus_stats_for, run_k_sweep, GroupedCorpus, MatrixOptions, ResultTable, VariationSpec};
use crate::vector_store::{load_vectors, VectorFormat, VectorStore};
use crate::weighting::{emit_weight_curves, log_grid, write_curves_csv, WeightKind, WeightScheme, DEFAULT_SIF_A, DEFAULT_SUBSAMPLE_T};

#[derive(Debug, Parser)]
#[command(name = "docembed", version, about = "Corpus-aware document embeddings and ROC AUC benchmarks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Count corpus term and document frequencies and write a stats file
    Stats(RunArgs),
    /// Embed the documents of a corpus
    Embed(RunArgs),
    /// Score a pair file against an embeddings file and report ROC AUC
    Eval(RunArgs),
    /// Run the embedding-variation matrix over a grouped corpus
    Bench(RunArgs),
    /// Emit weight-function curves as CSV
    WeightsPlot(RunArgs),
}

#[derive(Debug, Default, Clone, Args)]
pub struct RunArgs {
    /// key=value settings file; command-line flags take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Word vectors file
    #[arg(long)]
    pub vectors: Option<PathBuf>,
    /// word2vec-text or glove-text
    #[arg(long)]
    pub format: Option<String>,
    /// Corpus: one document per line, a directory of .txt files, or (bench)
    /// a grouped corpus directory / TSV
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Corpus stats file
    #[arg(long)]
    pub stats: Option<PathBuf>,
    /// Pair CSV `doc_a,doc_b,label`
    #[arg(long)]
    pub pairs: Option<PathBuf>,
    /// Embeddings file written by `embed`
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// sum, center or delta
    #[arg(long)]
    pub form: Option<String>,
    /// Center form: only words with corpus frequency at least this enter the center
    #[arg(long)]
    pub center_threshold: Option<f64>,
    /// idf, sif, subsample or unit
    #[arg(long)]
    pub scheme: Option<String>,
    /// Remove the first principal component
    #[arg(long)]
    pub pca: bool,
    /// Mean-center before extracting the principal component
    #[arg(long)]
    pub pca_center: bool,
    /// Use min-max rescaled idf as the idf weight
    #[arg(long)]
    pub idf_scaled: bool,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    /// Source documents per benchmark document; a list such as `1,2,5` or a range `1..20`
    #[arg(long)]
    pub k: Option<String>,
    #[arg(long)]
    pub docs_per_group: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub pair_budget: Option<usize>,
    /// `all`, `idf-table`, or comma-separated names like `idf-delta-pca`
    #[arg(long)]
    pub variations: Option<String>,
    /// Comma-separated corpus frequencies for weights-plot
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Keep token case
    #[arg(long)]
    pub no_lowercase: bool,
    /// non-alphanumeric or whitespace
    #[arg(long)]
    pub split: Option<String>,
    #[arg(long)]
    pub min_token_len: Option<usize>,
    /// Count out-of-vocabulary tokens in document length
    #[arg(long)]
    pub oov_in_denominator: bool,
}

/// Fully resolved settings for one command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub vectors: Option<PathBuf>,
    pub format: VectorFormat,
    pub corpus: Option<PathBuf>,
    pub stats: Option<PathBuf>,
    pub pairs: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub tokenizer: TokenizerConfig,
    pub oov_in_denominator: bool,
    pub form: FormKind,
    pub center_threshold: Option<f64>,
    pub scheme: WeightKind,
    pub pca: bool,
    pub pca_center: bool,
    pub idf_scaled: bool,
    pub a: f64,
    pub t: f64,
    pub ks: Vec<usize>,
    pub docs_per_group: usize,
    pub seed: u64,
    pub pair_budget: Option<usize>,
    pub variations: Vec<VariationSpec>,
    pub grid: Vec<f64>,
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            vectors: None,
            format: VectorFormat::default(),
            corpus: None,
            stats: None,
            pairs: None,
            embeddings: None,
            out: None,
            tokenizer: TokenizerConfig::default(),
            oov_in_denominator: false,
            form: FormKind::Sum,
            center_threshold: None,
            scheme: WeightKind::Idf,
            pca: false,
            pca_center: false,
            idf_scaled: false,
            a: DEFAULT_SIF_A,
            t: DEFAULT_SUBSAMPLE_T,
            ks: vec![1],
            docs_per_group: 250,
            seed: 0,
            pair_budget: None,
            variations: VariationSpec::all(),
            grid: log_grid(1e-7, 1e-1, 100),
            threads: None,
        }
    }
}

struct ConfigFile(HashMap<String, String>);

impl ConfigFile {
    fn load(path: Option<&Path>) -> Result<Self> {
        let mut map = HashMap::new();
        if let Some(path) = path {
            let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
            for (i, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (k, v) = line
                    .split_once('=')
                    .ok_or_else(|| anyhow!("{}:{}: expected key=value", path.display(), i + 1))?;
                map.insert(k.trim().replace('_', "-"), v.trim().to_string());
            }
        }
        Ok(ConfigFile(map))
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.0
            .get(key)
            .map(|v| v.parse::<T>().map_err(|e| anyhow!("config {key}={v:?}: {e}")))
            .transpose()
    }

    fn flag(&self, cli: bool, key: &str) -> Result<bool> {
        Ok(cli || self.get::<bool>(key)?.unwrap_or(false))
    }
}

fn pick<T>(cli: Option<T>, file: Option<T>, default: T) -> T {
    cli.or(file).unwrap_or(default)
}

fn parse_value<T: FromStr>(s: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.parse::<T>().map_err(|e| anyhow!("{s:?}: {e}"))
}

/// `1,2,5` or `1..20` (inclusive).
pub fn parse_k_list(s: &str) -> Result<Vec<usize>> {
    let ks: Vec<usize> = if let Some((lo, hi)) = s.split_once("..") {
        let (lo, hi): (usize, usize) = (parse_value(lo.trim())?, parse_value(hi.trim())?);
        (lo..=hi).collect()
    } else {
        s.split(',').map(|k| parse_value(k.trim())).collect::<Result<_>>()?
    };
    if ks.is_empty() || ks.contains(&0) {
        bail!("k values must be positive, got {s:?}");
    }
    Ok(ks)
}

pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|g| parse_value(g.trim())).collect()
}

impl RunConfig {
    pub fn resolve(args: &RunArgs) -> Result<Self> {
        let file = ConfigFile::load(args.config.as_deref())?;
        let d = RunConfig::default();
        let path = |cli: &Option<PathBuf>, key: &str| -> Result<Option<PathBuf>> {
            Ok(cli.clone().or(file.get::<PathBuf>(key)?))
        };
        let string = |cli: &Option<String>, key: &str| -> Result<Option<String>> {
            Ok(cli.clone().or(file.get::<String>(key)?))
        };

        let format = match string(&args.format, "format")? {
            Some(s) => s.parse()?,
            None => d.format,
        };
        let split = match string(&args.split, "split")? {
            Some(s) => s.parse()?,
            None => SplitPolicy::default(),
        };
        let lowercase = !file.flag(args.no_lowercase, "no-lowercase")?;
        let tokenizer = TokenizerConfig {
            lowercase,
            split_policy: split,
            min_token_len: pick(args.min_token_len, file.get("min-token-len")?, d.tokenizer.min_token_len),
        };
        let form = match string(&args.form, "form")? {
            Some(s) => s.parse()?,
            None => d.form,
        };
        let scheme = match string(&args.scheme, "scheme")? {
            Some(s) => s.parse()?,
            None => d.scheme,
        };
        let ks = match string(&args.k, "k")? {
            Some(s) => parse_k_list(&s)?,
            None => d.ks,
        };
        let variations = match string(&args.variations, "variations")? {
            Some(s) => VariationSpec::parse_list(&s)?,
            None => d.variations,
        };
        let grid = match string(&args.grid, "grid")? {
            Some(s) => parse_grid(&s)?,
            None => d.grid,
        };
        let cfg = RunConfig {
            vectors: path(&args.vectors, "vectors")?,
            format,
            corpus: path(&args.corpus, "corpus")?,
            stats: path(&args.stats, "stats")?,
            pairs: path(&args.pairs, "pairs")?,
            embeddings: path(&args.embeddings, "embeddings")?,
            out: path(&args.out, "out")?,
            tokenizer,
            oov_in_denominator: file.flag(args.oov_in_denominator, "oov-in-denominator")?,
            form,
            center_threshold: args.center_threshold.or(file.get("center-threshold")?),
            scheme,
            pca: file.flag(args.pca, "pca")?,
            pca_center: file.flag(args.pca_center, "pca-center")?,
            idf_scaled: file.flag(args.idf_scaled, "idf-scaled")?,
            a: pick(args.a, file.get("a")?, d.a),
            t: pick(args.t, file.get("t")?, d.t),
            ks,
            docs_per_group: pick(args.docs_per_group, file.get("docs-per-group")?, d.docs_per_group),
            seed: pick(args.seed, file.get("seed")?, d.seed),
            pair_budget: args.pair_budget.or(file.get("pair-budget")?),
            variations,
            grid,
            threads: args.threads.or(file.get("threads")?),
        };
        cfg.weight_scheme().validate()?;
        if cfg.threads == Some(0) {
            bail!("--threads must be at least 1");
        }
        Ok(cfg)
    }

    pub fn weight_scheme(&self) -> WeightScheme {
        WeightScheme {
            kind: self.scheme,
            a: self.a,
            t: self.t,
            scaled_idf: self.idf_scaled,
        }
    }

    fn matrix_options(&self) -> MatrixOptions {
        MatrixOptions {
            tokenizer: self.tokenizer.clone(),
            term_options: TermStatsOptions { oov_in_denominator: self.oov_in_denominator },
            a: self.a,
            t: self.t,
            idf_scaled: self.idf_scaled,
            pca_center: self.pca_center,
        }
    }

    /// Runs `f` on a pool sized by `threads`, or the global pool.
    pub fn with_threads<T: Send>(&self, f: impl FnOnce() -> T + Send) -> Result<T> {
        match self.threads {
            Some(n) => {
                let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build()?;
                Ok(pool.install(f))
            }
            None => Ok(f()),
        }
    }
}

fn require<'a>(p: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
    let p = p.as_deref().ok_or_else(|| anyhow!("missing required --{flag}"))?;
    Ok(p)
}

fn existing<'a>(p: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
    let p = require(p, flag)?;
    if !p.exists() {
        bail!("--{flag} path {} does not exist", p.display());
    }
    Ok(p)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Documents of a docs-per-line file (ids are 1-based line numbers) or a
/// directory of `.txt` files (ids are file stems, sorted).
pub fn read_documents(path: &Path) -> Result<Vec<(String, String)>> {
    if path.is_dir() {
        let mut files: Vec<PathBuf> = fs::read_dir(path)
            .with_context(|| format!("listing {}", path.display()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "txt"))
            .collect();
        files.sort();
        files
            .into_iter()
            .map(|f| {
                let text = fs::read_to_string(&f).with_context(|| format!("reading {}", f.display()))?;
                Ok((f.file_stem().unwrap().to_string_lossy().into_owned(), text))
            })
            .collect()
    } else {
        let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        BufReader::new(file)
            .lines()
            .enumerate()
            .map(|(i, l)| {
                let l = l.with_context(|| format!("{}:{}", path.display(), i + 1))?;
                Ok(((i + 1).to_string(), l))
            })
            .collect()
    }
}

fn load_stats(path: &Path) -> Result<CorpusStats> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    CorpusStats::read_from(BufReader::new(f)).with_context(|| format!("reading stats {}", path.display()))
}

fn load_store(cfg: &RunConfig) -> Result<VectorStore> {
    let path = existing(&cfg.vectors, "vectors")?;
    let store = load_vectors(path, cfg.format, None).with_context(|| format!("loading {}", path.display()))?;
    Ok(store.normalize()?)
}

pub fn cmd_stats(cfg: &RunConfig) -> Result<CorpusStats> {
    let corpus = existing(&cfg.corpus, "corpus")?;
    let out = require(&cfg.out, "out")?;
    let mut builder = CorpusStatsBuilder::new();
    if corpus.is_dir() {
        for (_, text) in read_documents(corpus)? {
            builder.add_document(tokenize(&text, &cfg.tokenizer));
        }
    } else {
        let f = File::open(corpus).with_context(|| format!("opening {}", corpus.display()))?;
        for (i, line) in BufReader::new(f).lines().enumerate() {
            let line = line.with_context(|| format!("{}:{}", corpus.display(), i + 1))?;
            builder.add_document(tokenize(&line, &cfg.tokenizer));
        }
    }
    let stats = builder.build();
    let mut w = create(out)?;
    stats.write_to(&mut w)?;
    Ok(stats)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbedSummary {
    pub embedded: usize,
    pub skipped: usize,
    pub component: Option<Vec<f64>>,
}

pub fn cmd_embed(cfg: &RunConfig) -> Result<EmbedSummary> {
    let corpus_path = existing(&cfg.corpus, "corpus")?;
    let out = require(&cfg.out, "out")?;
    let store = load_store(cfg)?;
    let docs = read_documents(corpus_path)?;
    let tokenized: Vec<(String, Vec<String>)> =
        docs.into_iter().map(|(id, text)| (id, tokenize(&text, &cfg.tokenizer))).collect();
    let stats = match &cfg.stats {
        Some(_) => load_stats(existing(&cfg.stats, "stats")?)?,
        None => CorpusStats::from_documents(tokenized.iter().map(|(_, t)| t)),
    };
    let opts = TermStatsOptions { oov_in_denominator: cfg.oov_in_denominator };
    let form = EmbeddingForm { kind: cfg.form, center_threshold: cfg.center_threshold };
    let scheme = cfg.weight_scheme();

    let (batch, component) = cfg.with_threads(|| -> Result<_> {
        let doc_stats: Vec<DocTermStats> = tokenized
            .iter()
            .map(|(id, t)| DocTermStats::with_options(id.clone(), t, &stats, &store, opts))
            .collect();
        let mut batch = embed_batch(&doc_stats, &form, &scheme, &store, &stats)?;
        let mut component = None;
        if cfg.pca {
            let rows: Vec<&[f64]> = batch.embeddings.iter().map(|e| e.vector.as_slice()).collect();
            let pc = first_principal_component_with(&rows, &PcaOptions { center: cfg.pca_center, ..Default::default() })?;
            batch.embeddings = remove_common_component(std::mem::take(&mut batch.embeddings), &pc)?;
            component = Some(pc);
        }
        Ok((batch, component))
    })??;

    write_embeddings(&batch.embeddings, create(out)?)?;
    write_skip_report(&batch.skipped, create(&with_suffix(out, ".skipped.csv"))?)?;
    if let Some(pc) = &component {
        let mut w = create(&with_suffix(out, ".pc"))?;
        writeln!(w, "{}", format_component(pc))?;
        w.flush()?;
    }
    Ok(EmbedSummary {
        embedded: batch.embeddings.len(),
        skipped: batch.skipped.len(),
        component: component.map(|p| p.vector),
    })
}

pub fn cmd_eval(cfg: &RunConfig) -> Result<EvalResult> {
    let emb_path = existing(&cfg.embeddings, "embeddings")?;
    let pairs_path = existing(&cfg.pairs, "pairs")?;
    let f = File::open(emb_path).with_context(|| format!("opening {}", emb_path.display()))?;
    let embeddings: HashMap<String, Vec<f64>> = read_embeddings(BufReader::new(f))
        .with_context(|| format!("reading {}", emb_path.display()))?
        .into_iter()
        .collect();
    let f = File::open(pairs_path).with_context(|| format!("opening {}", pairs_path.display()))?;
    let pairs = read_pairs(f).with_context(|| format!("reading {}", pairs_path.display()))?;

    let (result, scored) = cfg.with_threads(|| evaluate(&embeddings, &pairs))??;
    if let Some(out) = &cfg.out {
        write_scored(&scored.rows, create(out)?)?;
    }
    Ok(result)
}

pub fn cmd_bench(cfg: &RunConfig) -> Result<ResultTable> {
    let corpus_path = existing(&cfg.corpus, "corpus")?;
    let out = require(&cfg.out, "out")?;
    let store = load_store(cfg)?;
    let corpus = GroupedCorpus::load(corpus_path)?;
    let options = cfg.matrix_options();

    let table = cfg.with_threads(|| -> Result<ResultTable> {
        let stats = match &cfg.stats {
            Some(_) => load_stats(existing(&cfg.stats, "stats")?)?,
            None => corpus_stats_for(&corpus, &cfg.tokenizer),
        };
        Ok(run_k_sweep(
            &corpus,
            &cfg.ks,
            cfg.docs_per_group,
            cfg.seed,
            cfg.pair_budget,
            &store,
            &stats,
            &cfg.variations,
            &options,
        )?)
    })??;

    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut w = create(&out.join("results.csv"))?;
    table.write_csv(&mut w)?;
    w.flush()?;
    let mut w = create(&out.join("results.md"))?;
    table.write_markdown(&mut w)?;
    w.flush()?;
    let mut w = create(&out.join("lengths.csv"))?;
    table.write_lengths_csv(&mut w)?;
    w.flush()?;
    let mut w = create(&out.join("lengths.md"))?;
    table.write_lengths_markdown(&mut w)?;
    w.flush()?;
    Ok(table)
}

pub fn cmd_weights_plot(cfg: &RunConfig) -> Result<()> {
    let stats = load_stats(existing(&cfg.stats, "stats")?)?;
    let schemes = [
        WeightScheme::new(WeightKind::Idf),
        WeightScheme::sif(cfg.a),
        WeightScheme::subsample(cfg.t),
    ];
    let rows = emit_weight_curves(&stats, &schemes, &cfg.grid)?;
    match &cfg.out {
        Some(out) => write_curves_csv(&rows, create(out)?)?,
        None => write_curves_csv(&rows, io::stdout().lock())?,
    }
    Ok(())
}

/// Runs a parsed command line; summaries go to stdout, diagnostics to stderr.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Stats(a) => {
            let stats = cmd_stats(&RunConfig::resolve(&a)?)?;
            println!("D={} N_c={} |V|={}", stats.doc_count(), stats.total_tokens(), stats.vocabulary_size());
        }
        Command::Embed(a) => {
            let s = cmd_embed(&RunConfig::resolve(&a)?)?;
            eprintln!("embedded {} documents, skipped {}", s.embedded, s.skipped);
        }
        Command::Eval(a) => {
            let r = cmd_eval(&RunConfig::resolve(&a)?)?;
            println!("auc: {:.4}", r.auc);
            println!("positives: {}", r.positives);
            println!("negatives: {}", r.negatives);
            println!("skipped_pairs: {}", r.skipped_pairs);
        }
        Command::Bench(a) => {
            let table = cmd_bench(&RunConfig::resolve(&a)?)?;
            for (row, col, msg) in table.errors() {
                eprintln!("k={row} {col}: {msg}");
            }
            table.write_markdown(io::stdout().lock())?;
        }
        Command::WeightsPlot(a) => cmd_weights_plot(&RunConfig::resolve(&a)?)?,
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_lists() {
        assert_eq!(parse_k_list("1..4").unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(parse_k_list("2, 5").unwrap(), vec![2, 5]);
        assert!(parse_k_list("0..2").is_err());
        assert!(parse_k_list("x").is_err());
    }

    #[test]
    fn grid_parsing() {
        assert!(parse_grid("").unwrap().is_empty());
        assert_eq!(parse_grid("1e-4,0.5").unwrap(), vec![1e-4, 0.5]);
    }

    #[test]
    fn precedence_flag_over_file_over_default() {
        let dir = tempfile::tempdir().unwrap();
        let conf = dir.path().join("run.conf");
        fs::write(&conf, "# settings\nseed=7\na=0.001\nscheme=sif\npca=true\ndocs_per_group=3\n").unwrap();
        let args = RunArgs { config: Some(conf), seed: Some(9), ..Default::default() };
        let cfg = RunConfig::resolve(&args).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.a, 0.001);
        assert_eq!(cfg.scheme, WeightKind::Sif);
        assert!(cfg.pca);
        assert_eq!(cfg.docs_per_group, 3);
        assert_eq!(cfg.t, DEFAULT_SUBSAMPLE_T);
        assert_eq!(cfg.form, FormKind::Sum);
    }

    #[test]
    fn rejects_bad_values() {
        let args = RunArgs { a: Some(-1.0), ..Default::default() };
        assert!(RunConfig::resolve(&args).is_err());
        let args = RunArgs { form: Some("mean".into()), ..Default::default() };
        assert!(RunConfig::resolve(&args).is_err());
        let args = RunArgs { threads: Some(0), ..Default::default() };
        assert!(RunConfig::resolve(&args).is_err());
    }
}
