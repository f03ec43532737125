use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};

use phonosim::data::{Language, LexiconLayout};
use phonosim::embedding::{self, EmbeddingMatrix, TrainConfig};
use phonosim::evaluation::{
    self, JudgmentSet, PunPairSet, REFERENCE_PAIR_SCORES,
};
use phonosim::inventory::Inventory;
use phonosim::lexicon::{sample_indices, strip_stress, Lexicon, ParseOptions, Pronunciation};
use phonosim::manifest::RunManifest;
use phonosim::similarity::{self, PreparedLexicon, SimilarityConfig};
use phonosim::{Error, Result};

/// Phonetic word similarity, embedding training and evaluation.
#[derive(Parser, Debug)]
#[command(name = "phonosim", version)]
struct Cli {
    #[command(flatten)]
    global: Global,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Bundled language: en or hi.
    #[arg(long, global = true, default_value = "en")]
    lang: String,

    /// Feature table overriding the bundled one.
    #[arg(long, global = true)]
    inventory: Option<PathBuf>,

    /// Lexicon overriding the bundled one.
    #[arg(long, global = true)]
    lexicon: Option<PathBuf>,

    /// Lexicon layout: cmu or plain. Defaults to the language's layout.
    #[arg(long, global = true)]
    lexicon_format: Option<String>,

    /// Keep only headwords made of letters, apostrophes, hyphens and periods
    #[arg(long, global = true)]
    plain_headwords: bool,

    /// Worker threads; 1 forces the single-worker paths.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Args, Debug, Clone)]
struct SimFlags {
    /// Non-diagonal penalty.
    #[arg(long, default_value_t = 2.5)]
    penalty: f64,

    /// Align single phonemes instead of bigrams (implies --no-vowel-weight).
    #[arg(long)]
    unigram: bool,

    #[arg(long)]
    no_vowel_weight: bool,
}

impl SimFlags {
    fn config(&self) -> Result<SimilarityConfig> {
        let config = if self.unigram {
            SimilarityConfig::unigram(self.penalty)
        } else {
            SimilarityConfig::bigram(self.penalty, !self.no_vowel_weight)
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Similarity of two words.
    Sim {
        a: String,
        b: String,
        /// Treat both arguments as space-separated phoneme sequences.
        #[arg(long)]
        phones: bool,
        #[command(flatten)]
        sim: SimFlags,
    },
    /// Rank every headword by similarity to one word.
    Scan {
        word: String,
        #[arg(long)]
        phones: bool,
        #[arg(long, default_value_t = 10)]
        top: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        sim: SimFlags,
    },
    /// Train word vectors.
    Train {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 50)]
        dim: usize,
        #[arg(long, default_value_t = 20)]
        epochs: usize,
        /// Pairs drawn per epoch for each headword.
        #[arg(long, default_value_t = 50)]
        pairs_per_word: usize,
        #[arg(long, default_value_t = 1024)]
        batch_size: usize,
        #[arg(long, default_value_t = 0.4)]
        lr: f64,
        #[arg(long, default_value_t = 0.001)]
        final_lr: f64,
        #[arg(long, default_value_t = 0.001)]
        self_pairs: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Train on this many headwords drawn with the seed.
        #[arg(long)]
        subset: Option<usize>,
        #[command(flatten)]
        sim: SimFlags,
    },
    /// Nearest neighbours of words in an embedding.
    Nn {
        #[arg(required = true)]
        words: Vec<String>,
        #[arg(long)]
        emb: PathBuf,
        #[arg(long, default_value_t = 10)]
        top: usize,
    },
    /// Solve a : b :: c : ? in an embedding.
    Analogy {
        a: String,
        b: String,
        c: String,
        #[arg(long)]
        emb: PathBuf,
        #[arg(long, default_value_t = 5)]
        top: usize,
        /// Allow a, b and c among the answers.
        #[arg(long)]
        keep_inputs: bool,
    },
    /// Run the judgment-correlation and pun benchmarks.
    Eval {
        /// Judgment-set files.
        #[arg(long, num_args = 1..)]
        vitz: Vec<PathBuf>,
        /// Pun pair file.
        #[arg(long)]
        pun: Option<PathBuf>,
        /// Comma-separated penalties for a sweep over the judgment sets.
        #[arg(long, value_delimiter = ',')]
        sweep: Vec<f64>,
        #[arg(long)]
        emb: Option<PathBuf>,
        /// Random pairs for the pun baseline.
        #[arg(long, default_value_t = 10_000)]
        random: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Time full-lexicon scans.
    Bench {
        #[arg(long, default_value_t = 5)]
        repeat: usize,
        #[arg(long, default_value = "sinking")]
        query: String,
        /// Only scan the first N headwords.
        #[arg(long)]
        limit: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Failure mapped onto an exit code: 2 for bad input, 1 otherwise.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_user_error() { 2 } else { 1 },
            message: e.to_string(),
        }
    }
}

fn user(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.global.threads {
        if threads == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

struct Context {
    language: Language,
    inventory_path: PathBuf,
    lexicon_path: PathBuf,
    layout: LexiconLayout,
    options: ParseOptions,
}

impl Context {
    fn new(global: &Global) -> CliResult<Self> {
        let language: Language = global.lang.parse()?;
        let layout = match global.lexicon_format.as_deref() {
            None => language.lexicon_layout(),
            Some("cmu") => LexiconLayout::Cmu,
            Some("plain") => LexiconLayout::Plain,
            Some(other) => return Err(user(format!("unknown lexicon format {other:?}"))),
        };
        Ok(Context {
            language,
            inventory_path: global
                .inventory
                .clone()
                .unwrap_or_else(|| language.feature_table()),
            lexicon_path: global
                .lexicon
                .clone()
                .unwrap_or_else(|| language.default_lexicon()),
            layout,
            options: ParseOptions {
                plain_headwords_only: global.plain_headwords,
            },
        })
    }

    fn inventory(&self) -> Result<Arc<Inventory>> {
        Inventory::load(&self.inventory_path, self.language.code()).map(Arc::new)
    }

    fn lexicon(&self) -> Result<Lexicon> {
        let inventory = self.inventory()?;
        match self.layout {
            LexiconLayout::Cmu => Lexicon::load_cmu(&self.lexicon_path, inventory, self.options),
            LexiconLayout::Plain => Lexicon::load_plain(&self.lexicon_path, inventory, self.options),
        }
    }

    fn inputs(&self, manifest: &mut RunManifest) -> Result<()> {
        manifest.add_input(&self.inventory_path)?;
        manifest.add_input(&self.lexicon_path)?;
        manifest.set("lang", self.language);
        Ok(())
    }

    /// Explicit phonemes, with CMU stress marks tolerated.
    fn phones(&self, text: &str, inventory: &Inventory) -> Result<Pronunciation> {
        let symbols: Vec<&str> = text
            .split_whitespace()
            .map(|s| match self.layout {
                LexiconLayout::Cmu => strip_stress(s),
                LexiconLayout::Plain => s,
            })
            .collect();
        Pronunciation::parse(&symbols.join(" "), inventory)
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let ctx = Context::new(&cli.global)?;
    let threads = cli
        .global
        .threads
        .unwrap_or_else(rayon::current_num_threads);
    match cli.command {
        Command::Sim { a, b, phones, sim } => cmd_sim(&ctx, &a, &b, phones, &sim),
        Command::Scan {
            word,
            phones,
            top,
            out,
            sim,
        } => cmd_scan(&ctx, &word, phones, top, out.as_deref(), &sim),
        Command::Train {
            out,
            dim,
            epochs,
            pairs_per_word,
            batch_size,
            lr,
            final_lr,
            self_pairs,
            seed,
            subset,
            sim,
        } => {
            let config = TrainConfig {
                dim,
                epochs,
                pairs_per_word,
                batch_size,
                learning_rate: lr,
                final_learning_rate: final_lr,
                self_pair_fraction: self_pairs,
                seed,
            };
            cmd_train(&ctx, &out, &config, subset, &sim, threads)
        }
        Command::Nn { words, emb, top } => cmd_nn(&words, &emb, top),
        Command::Analogy {
            a,
            b,
            c,
            emb,
            top,
            keep_inputs,
        } => cmd_analogy(&a, &b, &c, &emb, top, keep_inputs),
        Command::Eval {
            vitz,
            pun,
            sweep,
            emb,
            random,
            seed,
            out_dir,
        } => cmd_eval(&ctx, &vitz, pun.as_deref(), &sweep, emb.as_deref(), random, seed, &out_dir),
        Command::Bench {
            repeat,
            query,
            limit,
            out,
        } => cmd_bench(&ctx, repeat, &query, limit, out.as_deref(), threads),
    }
}

fn primary<'a>(lexicon: &'a Lexicon, word: &str) -> CliResult<&'a Pronunciation> {
    lexicon
        .lookup(word)
        .first()
        .ok_or_else(|| Error::UnknownWord(word.to_owned()).into())
}

fn emit(text: &str, out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Error::io(path, e))?,
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(Error::from)?;
        }
    }
    Ok(())
}

fn cmd_sim(ctx: &Context, a: &str, b: &str, phones: bool, flags: &SimFlags) -> CliResult<()> {
    let config = flags.config()?;
    let score = if phones {
        let inventory = ctx.inventory()?;
        let pa = ctx.phones(a, &inventory)?;
        let pb = ctx.phones(b, &inventory)?;
        similarity::word_similarity(&pa, &pb, &config, &inventory)?
    } else {
        let lexicon = ctx.lexicon()?;
        let pa = primary(&lexicon, a)?;
        let pb = primary(&lexicon, b)?;
        similarity::word_similarity(pa, pb, &config, lexicon.inventory())?
    };
    println!("{score:.4}");
    Ok(())
}

fn scan_tsv(ranked: &[(String, f64)], top: usize) -> String {
    let mut text = String::new();
    for (word, score) in ranked.iter().take(top) {
        let _ = writeln!(text, "{word}\t{score:.4}");
    }
    text
}

fn cmd_scan(ctx: &Context, word: &str, phones: bool, top: usize, out: Option<&Path>, flags: &SimFlags) -> CliResult<()> {
    let started = Instant::now();
    let config = flags.config()?;
    let lexicon = ctx.lexicon()?;
    let query = if phones {
        ctx.phones(word, lexicon.inventory())?
    } else {
        primary(&lexicon, word)?.clone()
    };
    let ranked = similarity::similarity_scan(&query, &lexicon, &config)?;
    emit(&scan_tsv(&ranked, top), out)?;
    if let Some(out) = out {
        let mut manifest = RunManifest::new("scan");
        ctx.inputs(&mut manifest)?;
        manifest
            .set("query", word)
            .set("top", top)
            .set("similarity", config);
        manifest.wall_time = started.elapsed();
        manifest.write_for(out)?;
    }
    Ok(())
}

fn cmd_train(ctx: &Context, out: &Path, config: &TrainConfig, subset: Option<usize>, flags: &SimFlags, threads: usize) -> CliResult<()> {
    let started = Instant::now();
    let similarity = flags.config()?;
    let mut lexicon = ctx.lexicon()?;
    if let Some(n) = subset {
        if n == 0 || n > lexicon.len() {
            return Err(user(format!(
                "--subset {n} outside 1..={}",
                lexicon.len()
            )));
        }
        lexicon = lexicon.subset(&sample_indices(lexicon.len(), n, config.seed));
    }
    let (matrix, history) = embedding::train_with_history(&lexicon, &similarity, config)?;
    matrix.save(out)?;

    let mut manifest = RunManifest::new("train");
    ctx.inputs(&mut manifest)?;
    manifest.seed = Some(config.seed);
    manifest
        .set("similarity", similarity)
        .set("words", lexicon.len())
        .set("dim", config.dim)
        .set("epochs", config.epochs)
        .set("pairs_per_word", config.pairs_per_word)
        .set("batch_size", config.batch_size)
        .set("learning_rate", config.learning_rate)
        .set("final_learning_rate", config.final_learning_rate)
        .set("self_pair_fraction", config.self_pair_fraction)
        .set("subset", subset.map_or("all".to_owned(), |n| n.to_string()))
        .set("threads", threads)
        .set("fingerprint", matrix.fingerprint())
        .set(
            "final_epoch_loss",
            format!("{:.6}", history.epoch_loss.last().copied().unwrap_or(f64::NAN)),
        );
    manifest.wall_time = started.elapsed();
    manifest.write_for(out)?;
    eprintln!(
        "trained {} words x {} dims, final epoch loss {:.6}",
        matrix.len(),
        matrix.dim(),
        history.epoch_loss.last().copied().unwrap_or(f64::NAN)
    );
    Ok(())
}

fn cmd_nn(words: &[String], emb: &Path, top: usize) -> CliResult<()> {
    if top == 0 {
        return Err(user("--top must be at least 1"));
    }
    let emb = EmbeddingMatrix::load(emb)?;
    let mut text = String::new();
    for word in words {
        let i = emb
            .index_of(word)
            .ok_or_else(|| Error::UnknownWord(word.clone()))?;
        for (neighbour, cos) in embedding::nearest(emb.row(i), &emb, top, &HashSet::new())? {
            let _ = writeln!(text, "{word}\t{neighbour}\t{cos:.4}");
        }
    }
    emit(&text, None)
}

fn cmd_analogy(a: &str, b: &str, c: &str, emb: &Path, top: usize, keep_inputs: bool) -> CliResult<()> {
    if top == 0 {
        return Err(user("--top must be at least 1"));
    }
    let emb = EmbeddingMatrix::load(emb)?;
    let mut text = String::new();
    for (word, cos) in embedding::analogy(a, b, c, &emb, top, !keep_inputs)? {
        let _ = writeln!(text, "{word}\t{cos:.4}");
    }
    emit(&text, None)
}

#[allow(clippy::too_many_arguments)]
fn cmd_eval(
    ctx: &Context,
    vitz: &[PathBuf],
    pun: Option<&Path>,
    sweep: &[f64],
    emb_path: Option<&Path>,
    random: usize,
    seed: u64,
    out_dir: &Path,
) -> CliResult<()> {
    let started = Instant::now();
    if vitz.is_empty() && pun.is_none() {
        return Err(user("nothing to evaluate: pass --vitz and/or --pun"));
    }
    if pun.is_some() && emb_path.is_none() {
        return Err(user("--pun needs --emb"));
    }
    if !sweep.is_empty() && vitz.is_empty() {
        return Err(user("--sweep needs --vitz"));
    }
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let lexicon = ctx.lexicon()?;
    let emb = emb_path.map(EmbeddingMatrix::load).transpose()?;
    let mut manifest = RunManifest::new("eval");
    ctx.inputs(&mut manifest)?;
    manifest.seed = Some(seed);
    let mut summary = String::new();

    if !vitz.is_empty() {
        let sets = vitz
            .iter()
            .map(|p| {
                manifest.add_input(p)?;
                JudgmentSet::load(p)
            })
            .collect::<Result<Vec<_>>>()?;
        let scorers = [
            SimilarityConfig::unigram(1.0),
            SimilarityConfig::bigram(1.0, false),
            SimilarityConfig::bigram(2.5, false),
            SimilarityConfig::bigram(2.5, true),
        ];
        let mut text = String::from("scorer");
        for set in &sets {
            let _ = write!(text, "\t{}", set.standard_word);
        }
        text.push('\n');
        let mut rows: Vec<(String, Vec<f64>)> = Vec::new();
        for config in &scorers {
            rows.push((
                config.to_string(),
                evaluation::vitz_eval(&sets, evaluation::lexicon_scorer(&lexicon, config))?,
            ));
        }
        let mut rows: Vec<(String, Vec<Option<f64>>)> = rows
            .into_iter()
            .map(|(name, rs)| (name, rs.into_iter().map(Some).collect()))
            .collect();
        if let Some(emb) = &emb {
            // Sets naming a word the embedding lacks are reported as NA.
            let per_set = sets
                .iter()
                .map(|set| match evaluation::vitz_eval(std::slice::from_ref(set), evaluation::embedding_scorer(emb)) {
                    Ok(r) => Ok(Some(r[0])),
                    Err(Error::UnknownWord(_)) => Ok(None),
                    Err(e) => Err(e),
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push((format!("cosine:{}", emb.fingerprint()), per_set));
        }
        for (name, rs) in &rows {
            text.push_str(name);
            for r in rs {
                match r {
                    Some(r) => {
                        let _ = write!(text, "\t{r:.4}");
                    }
                    None => text.push_str("\tNA"),
                }
            }
            text.push('\n');
        }
        write_file(&out_dir.join("vitz.tsv"), &text)?;
        summary.push_str(&text);

        if !sweep.is_empty() {
            let rows = evaluation::penalty_sweep(&sets, &lexicon, sweep)?;
            write_file(&out_dir.join("sweep.tsv"), &evaluation::sweep_tsv(&rows, &sets))?;
            manifest.set(
                "sweep",
                sweep.iter().map(f64::to_string).collect::<Vec<_>>().join(","),
            );
        }
    }

    if let (Some(pun), Some(emb)) = (pun, &emb) {
        manifest.add_input(pun)?;
        manifest.add_input(emb_path.unwrap_or(Path::new("")))?;
        let mut pairs = PunPairSet::load(pun)?;
        pairs.retain_in_lexicon(&lexicon);
        let report = evaluation::pun_eval(&pairs, emb)?;
        let baseline = evaluation::random_baseline(emb, random, seed)?;

        let config = SimilarityConfig::default();
        let mut text = String::from("word1\tword2\tcosine\tword_similarity\n");
        for (a, b, cos) in &report.pairs {
            let ws = evaluation::lexicon_scorer(&lexicon, &config)(a, b)?;
            let _ = writeln!(text, "{a}\t{b}\t{cos:.4}\t{ws:.4}");
        }
        write_file(&out_dir.join("puns.tsv"), &text)?;
        write_file(&out_dir.join("pun_histogram.tsv"), &report.stats.histogram.to_tsv())?;
        write_file(&out_dir.join("random_histogram.tsv"), &baseline.histogram.to_tsv())?;

        let mut pun_summary = report.summary();
        let _ = write!(
            pun_summary,
            "random_pairs\t{}\nrandom_mean\t{:.4}\nrandom_variance\t{:.4}\n",
            baseline.count, baseline.mean, baseline.variance
        );
        pun_summary.push_str("\nreference\tword1\tword2\texpected_baseline\texpected\tcosine\n");
        for (a, b, other, expected) in REFERENCE_PAIR_SCORES {
            let ours = emb
                .cosine_words(a, b)
                .map_or("NA".to_owned(), |c| format!("{c:.4}"));
            let _ = writeln!(pun_summary, "reference\t{a}\t{b}\t{other:.4}\t{expected:.4}\t{ours}");
        }
        write_file(&out_dir.join("pun_summary.tsv"), &pun_summary)?;
        summary.push_str(&pun_summary);
        manifest.set("random_pairs", random);
    }

    manifest.wall_time = started.elapsed();
    manifest.write_for(out_dir.join("eval"))?;
    emit(&summary, None)
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e).into())
}

fn bench_header() -> &'static str {
    "words\trepeat\tmean_secs\tmin_secs\tmax_secs"
}

fn cmd_bench(ctx: &Context, repeat: usize, query: &str, limit: Option<usize>, out: Option<&Path>, threads: usize) -> CliResult<()> {
    if repeat == 0 {
        return Err(user("--repeat must be at least 1"));
    }
    let started = Instant::now();
    let mut lexicon = ctx.lexicon()?;
    let query = primary(&lexicon, query)?.clone();
    if let Some(n) = limit {
        let n = n.min(lexicon.len());
        lexicon = lexicon.subset(&(0..n).collect::<Vec<_>>());
    }
    let config = SimilarityConfig::default();

    // One untimed scan so thread start-up and first-touch page faults stay
    // out of the figures.
    let prepared = PreparedLexicon::new(&lexicon, config)?;
    std::hint::black_box(similarity::scan_prepared(&query, &lexicon, &prepared)?);

    let mut times = Vec::with_capacity(repeat);
    for _ in 0..repeat {
        let t = Instant::now();
        // Preparing the element sequences is part of the measured scan.
        let prepared = PreparedLexicon::new(&lexicon, config)?;
        let ranked = similarity::scan_prepared(&query, &lexicon, &prepared)?;
        times.push(t.elapsed());
        std::hint::black_box(ranked);
    }
    let secs: Vec<f64> = times.iter().map(Duration::as_secs_f64).collect();
    let mean = secs.iter().sum::<f64>() / secs.len() as f64;
    let min = secs.iter().copied().fold(f64::INFINITY, f64::min);
    let max = secs.iter().copied().fold(0.0, f64::max);
    let text = format!(
        "{}\n{}\t{repeat}\t{mean:.6}\t{min:.6}\t{max:.6}\n",
        bench_header(),
        lexicon.len()
    );
    emit(&text, out)?;
    if let Some(out) = out {
        let mut manifest = RunManifest::new("bench");
        ctx.inputs(&mut manifest)?;
        manifest
            .set("repeat", repeat)
            .set("threads", threads)
            .set("similarity", config);
        manifest.wall_time = started.elapsed();
        manifest.write_for(out)?;
    }
    Ok(())
}
