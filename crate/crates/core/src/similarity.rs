//! Word similarity by feature-Jaccard alignment.
//!
//! Each word becomes a sequence of elements, either single phonemes or
//! overlapping bigrams padded with `BEG`/`END`. Element similarity is the
//! Jaccard index of the element feature sets, optionally vowel-weighted:
//! when both bigrams end in the same vowel the score is raised to its square
//! root, otherwise it is squared.
//!
//! Word similarity accumulates element scores through the table
//!
//! ```text
//! d[0][0] = S(a0, b0)
//! d[i][0] = d[i-1][0] + S(ai, b0)
//! d[0][j] = d[0][j-1] + S(a0, bj)
//! d[i][j] = S(ai, bj) + d[i-1][j-1]                       if S(ai, bj) = 1
//!         = S(ai, bj) / p + min(d[i-1][j], d[i][j-1])     otherwise
//! ```
//!
//! and normalizes `d[n-1][m-1]` by `max(n, m)`. The boundary row and column
//! carry no penalty, and the diagonal predecessor is reachable only through
//! an exact match. With `p >= 2` the result lies in `[0, 1]`.

use std::cell::RefCell;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::inventory::{jaccard_nonempty, FeatureSet, Inventory, PhonemeId};
use crate::lexicon::{Lexicon, Pronunciation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GramMode {
    Unigram,
    Bigram,
}

/// How the two non-diagonal predecessors are combined.
///
/// `Min` is the standard recurrence. `Max` exists for experiments only.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum PathCombine {
    #[default]
    Min,
    Max,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimilarityConfig {
    pub gram_mode: GramMode,
    /// Non-diagonal penalty, at least 1.
    pub penalty: f64,
    /// Only valid together with [`GramMode::Bigram`].
    pub vowel_weighted: bool,
    pub combine: PathCombine,
}

impl Default for SimilarityConfig {
    fn default() -> Self {
        SimilarityConfig {
            gram_mode: GramMode::Bigram,
            penalty: 2.5,
            vowel_weighted: true,
            combine: PathCombine::Min,
        }
    }
}

impl SimilarityConfig {
    pub fn unigram(penalty: f64) -> Self {
        SimilarityConfig {
            gram_mode: GramMode::Unigram,
            penalty,
            vowel_weighted: false,
            combine: PathCombine::Min,
        }
    }

    pub fn bigram(penalty: f64, vowel_weighted: bool) -> Self {
        SimilarityConfig {
            gram_mode: GramMode::Bigram,
            penalty,
            vowel_weighted,
            combine: PathCombine::Min,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.penalty.is_finite() && self.penalty >= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "penalty must be a finite number >= 1, got {}",
                self.penalty
            )));
        }
        if self.vowel_weighted && self.gram_mode != GramMode::Bigram {
            return Err(Error::InvalidConfig(
                "vowel weighting requires bigram mode".into(),
            ));
        }
        Ok(())
    }
}

/// Compact single-token form, e.g. `bigram-vw-p2.5`.
impl fmt::Display for SimilarityConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mode = match self.gram_mode {
            GramMode::Unigram => "unigram",
            GramMode::Bigram => "bigram",
        };
        write!(f, "{mode}")?;
        if self.vowel_weighted {
            write!(f, "-vw")?;
        }
        write!(f, "-p{}", self.penalty)?;
        if self.combine == PathCombine::Max {
            write!(f, "-max")?;
        }
        Ok(())
    }
}

impl FromStr for SimilarityConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(format!("cannot parse similarity config {s:?}"));
        let mut parts = s.split('-');
        let gram_mode = match parts.next() {
            Some("unigram") => GramMode::Unigram,
            Some("bigram") => GramMode::Bigram,
            _ => return Err(bad()),
        };
        let mut cfg = SimilarityConfig {
            gram_mode,
            penalty: f64::NAN,
            vowel_weighted: false,
            combine: PathCombine::Min,
        };
        for part in parts {
            match part {
                "vw" => cfg.vowel_weighted = true,
                "max" => cfg.combine = PathCombine::Max,
                p if p.starts_with('p') => cfg.penalty = p[1..].parse().map_err(|_| bad())?,
                _ => return Err(bad()),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// A pair of adjacent phones and the union of their features.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bigram {
    pub first: PhonemeId,
    pub second: PhonemeId,
    pub features: FeatureSet,
    second_is_vowel: bool,
}

impl Bigram {
    pub fn new(first: PhonemeId, second: PhonemeId, inventory: &Inventory) -> Self {
        let a = inventory.phoneme(first);
        let b = inventory.phoneme(second);
        Bigram {
            first,
            second,
            features: a.features.union(b.features),
            second_is_vowel: b.is_vowel,
        }
    }

    pub fn ends_in_vowel(&self) -> bool {
        self.second_is_vowel
    }
}

/// `(BEG,a1), (a1,a2), ..., (an,END)`; one longer than the pronunciation.
pub fn to_bigram_sequence(pronunciation: &[PhonemeId], inventory: &Inventory) -> Result<Vec<Bigram>> {
    if pronunciation.is_empty() {
        return Err(Error::EmptyPronunciation);
    }
    let padded: Vec<PhonemeId> = std::iter::once(inventory.beg())
        .chain(pronunciation.iter().copied())
        .chain(std::iter::once(inventory.end()))
        .collect();
    Ok(padded
        .windows(2)
        .map(|w| Bigram::new(w[0], w[1], inventory))
        .collect())
}

pub fn bigram_similarity(x: &Bigram, y: &Bigram) -> f64 {
    // Bigram feature sets always hold at least the features of one real phone.
    jaccard_nonempty(x.features.bits(), y.features.bits())
}

pub fn vowel_weighted_similarity(x: &Bigram, y: &Bigram) -> f64 {
    vowel_weight(
        bigram_similarity(x, y),
        x.second_is_vowel && x.second == y.second,
    )
}

#[inline(always)]
fn vowel_weight(s: f64, same_vowel_ending: bool) -> f64 {
    if same_vowel_ending {
        s.sqrt()
    } else {
        s * s
    }
}

/// One alignment unit in its hot-loop form.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Element {
    features: u128,
    tail: u16,
    tail_vowel: bool,
}

impl From<&Bigram> for Element {
    fn from(b: &Bigram) -> Self {
        Element {
            features: b.features.bits(),
            tail: b.second.0,
            tail_vowel: b.second_is_vowel,
        }
    }
}

pub(crate) fn elements(pronunciation: &[PhonemeId], inventory: &Inventory, mode: GramMode) -> Result<Vec<Element>> {
    match mode {
        GramMode::Bigram => Ok(to_bigram_sequence(pronunciation, inventory)?
            .iter()
            .map(Element::from)
            .collect()),
        GramMode::Unigram => {
            if pronunciation.is_empty() {
                return Err(Error::EmptyPronunciation);
            }
            Ok(pronunciation
                .iter()
                .map(|&id| {
                    let p = inventory.phoneme(id);
                    Element {
                        features: p.features.bits(),
                        tail: id.0,
                        tail_vowel: p.is_vowel,
                    }
                })
                .collect())
        }
    }
}

trait ElementScore {
    fn score(a: &Element, b: &Element) -> f64;
}

struct Plain;
struct VowelWeighted;

impl ElementScore for Plain {
    #[inline(always)]
    fn score(a: &Element, b: &Element) -> f64 {
        jaccard_nonempty(a.features, b.features)
    }
}

impl ElementScore for VowelWeighted {
    #[inline(always)]
    fn score(a: &Element, b: &Element) -> f64 {
        vowel_weight(
            jaccard_nonempty(a.features, b.features),
            a.tail_vowel && a.tail == b.tail,
        )
    }
}

/// Fills `cells` (row-major, `a.len()` rows by `b.len()` columns) and
/// returns the number of cells written.
fn fill<S: ElementScore>(a: &[Element], b: &[Element], penalty: f64, combine: PathCombine, cells: &mut Vec<f64>) -> usize {
    let (n, m) = (a.len(), b.len());
    cells.clear();
    cells.resize(n * m, 0.0);
    let mut written = 0;

    cells[0] = S::score(&a[0], &b[0]);
    written += 1;
    for j in 1..m {
        cells[j] = cells[j - 1] + S::score(&a[0], &b[j]);
        written += 1;
    }
    for i in 1..n {
        let row = i * m;
        let up = row - m;
        cells[row] = cells[up] + S::score(&a[i], &b[0]);
        written += 1;
        for j in 1..m {
            let s = S::score(&a[i], &b[j]);
            cells[row + j] = if s == 1.0 {
                s + cells[up + j - 1]
            } else {
                let (top, left) = (cells[up + j], cells[row + j - 1]);
                let best = match combine {
                    PathCombine::Min => top.min(left),
                    PathCombine::Max => top.max(left),
                };
                s / penalty + best
            };
            written += 1;
        }
    }
    written
}

fn fill_for(a: &[Element], b: &[Element], config: &SimilarityConfig, cells: &mut Vec<f64>) -> usize {
    if config.vowel_weighted {
        fill::<VowelWeighted>(a, b, config.penalty, config.combine, cells)
    } else {
        fill::<Plain>(a, b, config.penalty, config.combine, cells)
    }
}

thread_local! {
    static SCRATCH: RefCell<Vec<f64>> = const { RefCell::new(Vec::new()) };
}

/// Normalized alignment score of two non-empty element sequences.
pub(crate) fn align(a: &[Element], b: &[Element], config: &SimilarityConfig) -> f64 {
    debug_assert!(!a.is_empty() && !b.is_empty());
    SCRATCH.with_borrow_mut(|cells| {
        fill_for(a, b, config, cells);
        cells[a.len() * b.len() - 1] / a.len().max(b.len()) as f64
    })
}

/// The accumulated-score table for one word pair, kept for inspection.
#[derive(Clone, Debug)]
pub struct AlignmentTable {
    rows: usize,
    cols: usize,
    cells: Vec<f64>,
    cells_filled: usize,
}

impl AlignmentTable {
    pub fn fill(a: &Pronunciation, b: &Pronunciation, config: &SimilarityConfig, inventory: &Inventory) -> Result<Self> {
        config.validate()?;
        let a = elements(a.phonemes(), inventory, config.gram_mode)?;
        let b = elements(b.phonemes(), inventory, config.gram_mode)?;
        let mut cells = Vec::new();
        let cells_filled = fill_for(&a, &b, config, &mut cells);
        Ok(AlignmentTable {
            rows: a.len(),
            cols: b.len(),
            cells,
            cells_filled,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.rows && j < self.cols);
        self.cells[i * self.cols + j]
    }

    /// Number of cell writes performed while filling.
    pub fn cells_filled(&self) -> usize {
        self.cells_filled
    }

    /// The final cell divided by the longer sequence length.
    pub fn score(&self) -> f64 {
        self.cells[self.cells.len() - 1] / self.rows.max(self.cols) as f64
    }
}

/// Word similarity of two pronunciations under `config`.
pub fn word_similarity(a: &Pronunciation, b: &Pronunciation, config: &SimilarityConfig, inventory: &Inventory) -> Result<f64> {
    config.validate()?;
    let a = elements(a.phonemes(), inventory, config.gram_mode)?;
    let b = elements(b.phonemes(), inventory, config.gram_mode)?;
    Ok(align(&a, &b, config))
}

/// Element sequences for the primary pronunciation of every headword,
/// stored contiguously so that repeated scoring does no allocation.
#[derive(Clone, Debug)]
pub struct PreparedLexicon {
    config: SimilarityConfig,
    offsets: Vec<usize>,
    elements: Vec<Element>,
}

impl PreparedLexicon {
    pub fn new(lexicon: &Lexicon, config: SimilarityConfig) -> Result<Self> {
        config.validate()?;
        let inventory = lexicon.inventory();
        let mut offsets = Vec::with_capacity(lexicon.len() + 1);
        let mut all = Vec::new();
        offsets.push(0);
        for i in 0..lexicon.len() {
            all.extend(elements(lexicon.primary(i).phonemes(), inventory, config.gram_mode)?);
            offsets.push(all.len());
        }
        Ok(PreparedLexicon {
            config,
            offsets,
            elements: all,
        })
    }

    pub fn config(&self) -> &SimilarityConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn word(&self, i: usize) -> &[Element] {
        &self.elements[self.offsets[i]..self.offsets[i + 1]]
    }

    /// Similarity of headwords `i` and `j`.
    pub fn score(&self, i: usize, j: usize) -> f64 {
        align(self.word(i), self.word(j), &self.config)
    }

    fn score_elements(&self, query: &[Element], j: usize) -> f64 {
        align(query, self.word(j), &self.config)
    }
}

/// Scores `query` against the primary pronunciation of every headword.
///
/// Results are sorted by descending score, ties by word. Work is spread over
/// the current rayon pool; the output does not depend on the split.
pub fn similarity_scan(query: &Pronunciation, lexicon: &Lexicon, config: &SimilarityConfig) -> Result<Vec<(String, f64)>> {
    let prepared = PreparedLexicon::new(lexicon, *config)?;
    scan_prepared(query, lexicon, &prepared)
}

pub fn scan_prepared(query: &Pronunciation, lexicon: &Lexicon, prepared: &PreparedLexicon) -> Result<Vec<(String, f64)>> {
    let query = elements(query.phonemes(), lexicon.inventory(), prepared.config.gram_mode)?;
    let scores: Vec<f64> = (0..prepared.len())
        .into_par_iter()
        .map(|j| prepared.score_elements(&query, j))
        .collect();
    let mut ranked: Vec<(String, f64)> = lexicon.words().iter().cloned().zip(scores).collect();
    ranked.par_sort_unstable_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(ranked)
}

/// Convenience wrapper binding an inventory and a config.
#[derive(Clone, Debug)]
pub struct Scorer {
    inventory: Arc<Inventory>,
    config: SimilarityConfig,
}

impl Scorer {
    pub fn new(inventory: Arc<Inventory>, config: SimilarityConfig) -> Result<Self> {
        config.validate()?;
        Ok(Scorer { inventory, config })
    }

    pub fn config(&self) -> &SimilarityConfig {
        &self.config
    }

    pub fn score(&self, a: &Pronunciation, b: &Pronunciation) -> Result<f64> {
        word_similarity(a, b, &self.config, &self.inventory)
    }
}
