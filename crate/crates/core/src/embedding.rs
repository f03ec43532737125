//! Dense word vectors whose dot products approximate word similarity.
//!
//! Training minimizes `Σ (vᵢ·vⱼ − Mᵢⱼ)²` over sampled index pairs with plain
//! minibatch SGD. `Mᵢⱼ` is computed when a pair is drawn and never stored, so
//! memory stays linear in the vocabulary.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::inventory::Inventory;
use crate::lexicon::Lexicon;
use crate::similarity::{PreparedLexicon, SimilarityConfig};

/// Symmetric target values for index pairs.
pub trait Targets: Sync {
    fn len(&self) -> usize;

    fn target(&self, i: usize, j: usize) -> f64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Targets for PreparedLexicon {
    fn len(&self) -> usize {
        PreparedLexicon::len(self)
    }

    fn target(&self, i: usize, j: usize) -> f64 {
        self.score(i, j)
    }
}

/// Similarity of the primary pronunciations of headwords `i` and `j`.
pub fn target_similarity(i: usize, j: usize, prepared: &PreparedLexicon) -> f64 {
    prepared.score(i, j)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub dim: usize,
    pub epochs: usize,
    /// Pairs drawn per epoch, per word. Every pair touches two rows, so each
    /// word takes part in about twice this many pairs per epoch.
    pub pairs_per_word: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Learning rate reached, linearly, at the last step.
    pub final_learning_rate: f64,
    pub self_pair_fraction: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 50,
            epochs: 20,
            pairs_per_word: 50,
            batch_size: 1024,
            learning_rate: 0.4,
            final_learning_rate: 0.001,
            self_pair_fraction: 0.001,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self, words: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if words == 0 {
            return bad("cannot train on an empty lexicon".into());
        }
        if self.dim == 0 || self.epochs == 0 || self.batch_size == 0 || self.pairs_per_word == 0 {
            return bad("dim, epochs, pairs per word and batch size must be positive".into());
        }
        if self.dim > words {
            return bad(format!("dim {} exceeds vocabulary size {words}", self.dim));
        }
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.learning_rate) || !positive(self.final_learning_rate) {
            return bad("learning rates must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.self_pair_fraction) {
            return bad(format!(
                "self pair fraction {} outside [0, 1]",
                self.self_pair_fraction
            ));
        }
        Ok(())
    }
}

/// Identifies the similarity function an embedding was trained against.
pub fn fingerprint(inventory: &Inventory, config: &SimilarityConfig) -> String {
    let mut hasher = Sha256::new();
    hasher.update(inventory.language().as_bytes());
    hasher.update(b"\n");
    hasher.update(inventory.to_table().as_bytes());
    hasher.update(config.to_string().as_bytes());
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(16);
    for byte in &digest[..8] {
        let _ = write!(hex, "{byte:02x}");
    }
    format!("{config}@{hex}")
}

/// Squared-error loss of one pair and its gradient contributions.
///
/// Adds `∂/∂vᵢ` to `grad_i` and `∂/∂vⱼ` to `grad_j`; for `i = j` the caller
/// passes the same row for both and both halves land on it.
#[inline]
fn pair_gradient(vi: &[f64], vj: &[f64], target: f64, mut add: impl FnMut(usize, f64, f64)) -> f64 {
    let residual = dot(vi, vj) - target;
    let scale = 2.0 * residual;
    for k in 0..vi.len() {
        add(k, scale * vj[k], scale * vi[k]);
    }
    residual * residual
}

/// Loss `Σ (vᵢ·vⱼ − t)²` over `pairs` and its full gradient with respect to
/// the row-major `vectors`.
pub fn batch_gradient(vectors: &[f64], dim: usize, pairs: &[(usize, usize, f64)]) -> (f64, Vec<f64>) {
    let mut grad = vec![0.0; vectors.len()];
    let mut loss = 0.0;
    for &(i, j, target) in pairs {
        let vi = &vectors[i * dim..(i + 1) * dim];
        let vj = &vectors[j * dim..(j + 1) * dim];
        let mut gi = vec![0.0; dim];
        let mut gj = vec![0.0; dim];
        loss += pair_gradient(vi, vj, target, |k, a, b| {
            gi[k] += a;
            gj[k] += b;
        });
        for k in 0..dim {
            grad[i * dim + k] += gi[k];
            grad[j * dim + k] += gj[k];
        }
    }
    (loss, grad)
}

/// Per-epoch mean squared error of the sampled pairs.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainHistory {
    pub epoch_loss: Vec<f64>,
}

pub fn train(lexicon: &Lexicon, similarity: &SimilarityConfig, config: &TrainConfig) -> Result<EmbeddingMatrix> {
    train_with_history(lexicon, similarity, config).map(|(m, _)| m)
}

pub fn train_with_history(lexicon: &Lexicon, similarity: &SimilarityConfig, config: &TrainConfig) -> Result<(EmbeddingMatrix, TrainHistory)> {
    config.validate(lexicon.len())?;
    let prepared = PreparedLexicon::new(lexicon, *similarity)?;
    let (vectors, history) = fit(&prepared, config)?;
    let matrix = EmbeddingMatrix::new(
        lexicon.words().to_vec(),
        config.dim,
        vectors,
        fingerprint(lexicon.inventory(), similarity),
    )?;
    Ok((matrix, history))
}

/// Fits row-major `targets.len() × dim` vectors to `targets`.
///
/// Pair sampling is sequential from a seeded ChaCha stream; only target
/// evaluation is spread across threads, so results are identical for any
/// pool size.
pub fn fit(targets: &dyn Targets, config: &TrainConfig) -> Result<(Vec<f64>, TrainHistory)> {
    let k = targets.len();
    config.validate(k)?;
    let dim = config.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let bound = 1.0 / (dim as f64).sqrt();
    let mut vectors: Vec<f64> = (0..k * dim).map(|_| rng.gen_range(-bound..=bound)).collect();

    let epoch_pairs = config.pairs_per_word * k;
    let total_pairs = config.epochs * epoch_pairs;
    let mut seen = 0usize;
    let mut step = 0usize;
    let mut history = TrainHistory::default();
    let mut batch: Vec<(usize, usize, f64)> = Vec::with_capacity(config.batch_size);
    let mut accum = SparseGradient::new(dim);

    for _ in 0..config.epochs {
        let mut epoch_loss = 0.0;
        let mut remaining = epoch_pairs;
        while remaining > 0 {
            let size = remaining.min(config.batch_size);
            remaining -= size;
            batch.clear();
            for _ in 0..size {
                let (i, j) = sample_pair(&mut rng, k, config.self_pair_fraction);
                batch.push((i, j, 0.0));
            }
            batch.par_iter_mut().for_each(|(i, j, t)| *t = targets.target(*i, *j));

            let progress = seen as f64 / total_pairs as f64;
            let lr = config.learning_rate + (config.final_learning_rate - config.learning_rate) * progress;
            let loss = accum.apply(&mut vectors, &batch, lr);
            if !loss.is_finite() {
                return Err(Error::Diverged { step });
            }
            epoch_loss += loss;
            seen += size;
            step += 1;
        }
        history.epoch_loss.push(epoch_loss / epoch_pairs as f64);
    }
    Ok((vectors, history))
}

fn sample_pair(rng: &mut impl Rng, k: usize, self_fraction: f64) -> (usize, usize) {
    let i = rng.gen_range(0..k);
    if k == 1 || rng.gen::<f64>() < self_fraction {
        return (i, i);
    }
    let mut j = rng.gen_range(0..k - 1);
    if j >= i {
        j += 1;
    }
    (i, j)
}

/// Gradient accumulator over the rows a batch touches.
///
/// Each row moves by the mean of the pair gradients that reach it, so a row
/// drawn many times in one batch (small vocabularies) takes the same size of
/// step as a row drawn once.
struct SparseGradient {
    dim: usize,
    slots: HashMap<usize, usize>,
    rows: Vec<usize>,
    hits: Vec<u32>,
    grad: Vec<f64>,
}

impl SparseGradient {
    fn new(dim: usize) -> Self {
        SparseGradient {
            dim,
            slots: HashMap::new(),
            rows: Vec::new(),
            hits: Vec::new(),
            grad: Vec::new(),
        }
    }

    fn slot(&mut self, row: usize) -> usize {
        let dim = self.dim;
        let slot = *self.slots.entry(row).or_insert_with(|| {
            self.rows.push(row);
            self.hits.push(0);
            self.grad.resize(self.grad.len() + dim, 0.0);
            self.rows.len() - 1
        });
        self.hits[slot] += 1;
        slot
    }

    /// Evaluates the batch at the current parameters, then takes one step.
    fn apply(&mut self, vectors: &mut [f64], batch: &[(usize, usize, f64)], lr: f64) -> f64 {
        let dim = self.dim;
        self.slots.clear();
        self.rows.clear();
        self.hits.clear();
        self.grad.clear();
        let mut loss = 0.0;
        for &(i, j, target) in batch {
            let si = self.slot(i) * dim;
            let sj = self.slot(j) * dim;
            let vi = &vectors[i * dim..(i + 1) * dim];
            let vj = &vectors[j * dim..(j + 1) * dim];
            let grad = &mut self.grad;
            loss += pair_gradient(vi, vj, target, |k, a, b| {
                grad[si + k] += a;
                grad[sj + k] += b;
            });
        }
        for (slot, &row) in self.rows.iter().enumerate() {
            let g = &self.grad[slot * dim..(slot + 1) * dim];
            let step = lr / f64::from(self.hits[slot]);
            for (v, g) in vectors[row * dim..(row + 1) * dim].iter_mut().zip(g) {
                *v -= step * g;
            }
        }
        loss
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Cosine similarity, clamped to `[-1, 1]`.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    let (uu, vv) = (dot(u, u), dot(v, v));
    if uu == 0.0 || vv == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((dot(u, v) / (uu * vv).sqrt()).clamp(-1.0, 1.0))
}

/// A `k × dim` matrix of word vectors, rows in lexicon order.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingMatrix {
    words: Vec<String>,
    dim: usize,
    vectors: Vec<f64>,
    fingerprint: String,
    index: HashMap<String, usize>,
}

impl EmbeddingMatrix {
    pub fn new(words: Vec<String>, dim: usize, vectors: Vec<f64>, fingerprint: String) -> Result<Self> {
        if dim == 0 || vectors.len() != words.len() * dim {
            return Err(Error::EmbeddingFormat(format!(
                "{} values do not form {} rows of dimension {dim}",
                vectors.len(),
                words.len()
            )));
        }
        if let Some(bad) = vectors.iter().position(|v| !v.is_finite()) {
            return Err(Error::EmbeddingFormat(format!(
                "non-finite component in row {}",
                bad / dim
            )));
        }
        if fingerprint.is_empty() || fingerprint.contains(char::is_whitespace) {
            return Err(Error::EmbeddingFormat(format!("invalid fingerprint {fingerprint:?}")));
        }
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if w.is_empty() || w.contains(char::is_whitespace) {
                return Err(Error::EmbeddingFormat(format!("invalid word {w:?}")));
            }
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::EmbeddingFormat(format!("duplicate word {w:?}")));
            }
        }
        Ok(EmbeddingMatrix {
            words,
            dim,
            vectors,
            fingerprint,
            index,
        })
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.vectors
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index
            .get(word)
            .or_else(|| self.index.get(&word.to_lowercase()))
            .copied()
    }

    pub fn vector(&self, word: &str) -> Option<&[f64]> {
        self.index_of(word).map(|i| self.row(i))
    }

    fn require(&self, word: &str) -> Result<usize> {
        self.index_of(word)
            .ok_or_else(|| Error::UnknownWord(word.to_owned()))
    }

    pub fn cosine_words(&self, a: &str, b: &str) -> Result<f64> {
        cosine(self.row(self.require(a)?), self.row(self.require(b)?))
    }

    pub fn write(&self, out: impl Write) -> Result<()> {
        let mut out = BufWriter::new(out);
        writeln!(out, "{} {} {}", self.len(), self.dim, self.fingerprint)?;
        let mut line = String::new();
        for (i, word) in self.words.iter().enumerate() {
            line.clear();
            line.push_str(word);
            for v in self.row(i) {
                let _ = write!(line, " {v:.6}");
            }
            line.push('\n');
            out.write_all(line.as_bytes())?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write(file)
    }

    pub fn read(reader: impl Read) -> Result<Self> {
        let bad = |msg: String| Error::EmbeddingFormat(msg);
        let mut lines = BufReader::new(reader).lines();
        let header = lines.next().ok_or_else(|| bad("empty file".into()))??;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let [count, dim, fingerprint] = fields[..] else {
            return Err(bad(format!("header {header:?} is not \"k d fingerprint\"")));
        };
        let count: usize = count.parse().map_err(|_| bad(format!("bad word count {count:?}")))?;
        let dim: usize = dim.parse().map_err(|_| bad(format!("bad dimension {dim:?}")))?;
        if dim == 0 {
            return Err(bad("dimension must be positive".into()));
        }

        let mut words = Vec::with_capacity(count);
        let mut vectors = Vec::with_capacity(count * dim);
        for (n, line) in lines.enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let row = n + 2;
            if words.len() == count {
                return Err(bad(format!("line {row}: more rows than the header's {count}")));
            }
            let mut tokens = line.split(' ');
            let word = tokens.next().unwrap_or_default();
            let before = vectors.len();
            for token in tokens {
                let v: f64 = token
                    .parse()
                    .map_err(|_| bad(format!("line {row}: bad number {token:?}")))?;
                vectors.push(v);
            }
            if vectors.len() - before != dim {
                return Err(bad(format!(
                    "line {row}: expected {dim} components, found {}",
                    vectors.len() - before
                )));
            }
            words.push(word.to_owned());
        }
        if words.len() != count {
            return Err(bad(format!(
                "header declares {count} rows but file has {}",
                words.len()
            )));
        }
        EmbeddingMatrix::new(words, dim, vectors, fingerprint.to_owned())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(file)
    }
}

/// The `n` rows most cosine-similar to `query`, best first, ties by row order.
/// Rows in `exclude` and all-zero rows are skipped.
pub fn nearest(query: &[f64], emb: &EmbeddingMatrix, n: usize, exclude: &HashSet<usize>) -> Result<Vec<(String, f64)>> {
    if query.len() != emb.dim() {
        return Err(Error::InvalidConfig(format!(
            "query has dimension {}, embedding has {}",
            query.len(),
            emb.dim()
        )));
    }
    if dot(query, query) == 0.0 {
        return Err(Error::ZeroVector);
    }
    let mut scored: Vec<(usize, f64)> = (0..emb.len())
        .into_par_iter()
        .filter(|i| !exclude.contains(i))
        .filter_map(|i| cosine(query, emb.row(i)).ok().map(|c| (i, c)))
        .collect();
    scored.sort_unstable_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scored.truncate(n);
    Ok(scored
        .into_iter()
        .map(|(i, c)| (emb.words()[i].clone(), c))
        .collect())
}

/// Ranked answers to `a : b :: c : ?`, i.e. the words nearest to
/// `V(b) − V(a) + V(c)`.
pub fn analogy(a: &str, b: &str, c: &str, emb: &EmbeddingMatrix, n: usize, exclude_inputs: bool) -> Result<Vec<(String, f64)>> {
    let ia = emb.require(a)?;
    let ib = emb.require(b)?;
    let ic = emb.require(c)?;
    let query: Vec<f64> = emb
        .row(ib)
        .iter()
        .zip(emb.row(ia))
        .zip(emb.row(ic))
        .map(|((vb, va), vc)| vb - va + vc)
        .collect();
    let exclude: HashSet<usize> = if exclude_inputs {
        [ia, ib, ic].into_iter().collect()
    } else {
        HashSet::new()
    };
    nearest(&query, emb, n, &exclude)
}
