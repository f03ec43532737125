//! Benchmarks: correlation with human similarity judgments, and the cosine
//! distribution of heterographic pun pairs.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::embedding::{cosine, EmbeddingMatrix};
use crate::error::{Error, Result};
use crate::lexicon::Lexicon;
use crate::similarity::{word_similarity, SimilarityConfig};

/// Pearson product-moment correlation.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::Statistics(format!(
            "length mismatch: {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::Statistics("need at least two observations".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Statistics("zero variance".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Human ratings of a standard word against comparison words, scaled to
/// `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct JudgmentSet {
    pub standard_word: String,
    pub comparisons: Vec<(String, f64)>,
}

/// Highest rating on the survey scale.
pub const RATING_SCALE_MAX: f64 = 4.0;

impl JudgmentSet {
    /// Reads a standard word on the first data line, then
    /// `word<TAB>rating` rows with ratings on the 0–4 scale.
    pub fn read(reader: impl Read) -> Result<Self> {
        let mut standard = None;
        let mut comparisons = Vec::new();
        for (n, line) in BufReader::new(reader).lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let malformed = |message: String| Error::Malformed { line: n + 1, message };
            if standard.is_none() {
                if line.contains(char::is_whitespace) {
                    return Err(malformed("first line must hold only the standard word".into()));
                }
                standard = Some(line.to_lowercase());
                continue;
            }
            let (word, rating) = line
                .split_once('\t')
                .ok_or_else(|| malformed("expected word<TAB>rating".into()))?;
            let rating: f64 = rating
                .trim()
                .parse()
                .map_err(|_| malformed(format!("bad rating {rating:?}")))?;
            if !(0.0..=RATING_SCALE_MAX).contains(&rating) {
                return Err(malformed(format!("rating {rating} outside 0-4")));
            }
            comparisons.push((word.trim().to_lowercase(), rating / RATING_SCALE_MAX));
        }
        let standard_word = standard.ok_or_else(|| Error::Malformed {
            line: 0,
            message: "no standard word".into(),
        })?;
        Ok(JudgmentSet {
            standard_word,
            comparisons,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::read(fs::File::open(path).map_err(|e| Error::io(path, e))?)
    }

    pub fn human_scores(&self) -> Vec<f64> {
        self.comparisons.iter().map(|(_, s)| *s).collect()
    }
}

/// Pearson r between `score(standard, comparison)` and the human ratings,
/// one value per set.
pub fn vitz_eval<F>(sets: &[JudgmentSet], mut score: F) -> Result<Vec<f64>>
where
    F: FnMut(&str, &str) -> Result<f64>,
{
    sets.iter()
        .map(|set| {
            let predicted = set
                .comparisons
                .iter()
                .map(|(word, _)| score(&set.standard_word, word))
                .collect::<Result<Vec<_>>>()?;
            pearson(&predicted, &set.human_scores())
        })
        .collect()
}

/// Word-similarity scorer over primary pronunciations.
pub fn lexicon_scorer<'a>(lexicon: &'a Lexicon, config: &'a SimilarityConfig) -> impl FnMut(&str, &str) -> Result<f64> + 'a {
    move |a, b| {
        let pa = lexicon
            .lookup(a)
            .first()
            .ok_or_else(|| Error::UnknownWord(a.to_owned()))?;
        let pb = lexicon
            .lookup(b)
            .first()
            .ok_or_else(|| Error::UnknownWord(b.to_owned()))?;
        word_similarity(pa, pb, config, lexicon.inventory())
    }
}

/// Cosine scorer over embedding rows.
pub fn embedding_scorer(emb: &EmbeddingMatrix) -> impl FnMut(&str, &str) -> Result<f64> + '_ {
    move |a, b| emb.cosine_words(a, b)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub penalty: f64,
    pub per_set: Vec<f64>,
    pub mean: f64,
}

/// Correlation of the bigram, vowel-weighted scorer at each penalty.
pub fn penalty_sweep(sets: &[JudgmentSet], lexicon: &Lexicon, penalties: &[f64]) -> Result<Vec<SweepRow>> {
    penalties
        .iter()
        .map(|&penalty| {
            let config = SimilarityConfig::bigram(penalty, true);
            config.validate()?;
            let per_set = vitz_eval(sets, lexicon_scorer(lexicon, &config))?;
            let mean = per_set.iter().sum::<f64>() / per_set.len().max(1) as f64;
            Ok(SweepRow {
                penalty,
                per_set,
                mean,
            })
        })
        .collect()
}

pub fn sweep_tsv(rows: &[SweepRow], sets: &[JudgmentSet]) -> String {
    let mut out = String::from("penalty\tmean_r");
    for set in sets {
        let _ = write!(out, "\t{}", set.standard_word);
    }
    out.push('\n');
    for row in rows {
        let _ = write!(out, "{}\t{:.4}", row.penalty, row.mean);
        for r in &row.per_set {
            let _ = write!(out, "\t{r:.4}");
        }
        out.push('\n');
    }
    out
}

/// Deduplicated word pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PunPairSet {
    pub pairs: Vec<(String, String)>,
}

impl PunPairSet {
    /// Reads `word1<TAB>word2` rows. Pairs are lower-cased and deduplicated
    /// as unordered pairs, keeping the first occurrence.
    pub fn read(reader: impl Read) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut pairs = Vec::new();
        for (n, line) in BufReader::new(reader).lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (a, b) = line.split_once('\t').ok_or_else(|| Error::Malformed {
                line: n + 1,
                message: "expected word1<TAB>word2".into(),
            })?;
            let (a, b) = (a.trim().to_lowercase(), b.trim().to_lowercase());
            let key = if a <= b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
            if seen.insert(key) {
                pairs.push((a, b));
            }
        }
        Ok(PunPairSet { pairs })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::read(fs::File::open(path).map_err(|e| Error::io(path, e))?)
    }

    /// Keeps the pairs whose words both have pronunciations.
    pub fn retain_in_lexicon(&mut self, lexicon: &Lexicon) {
        self.pairs
            .retain(|(a, b)| !lexicon.lookup(a).is_empty() && !lexicon.lookup(b).is_empty());
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Expected cosine scores for a few pun pairs:
/// `(word1, word2, baseline-embedding score, reference score)`.
/// Kept for side-by-side display only.
pub const REFERENCE_PAIR_SCORES: [(&str, &str, f64, f64); 10] = [
    ("mutter", "mother", -0.0123, 0.8993),
    ("loin", "learn", -0.0885, 0.8119),
    ("truffle", "trouble", 0.1365, 0.9629),
    ("soul", "sell", 0.0738, 0.7642),
    ("sole", "sell", 0.0738, 0.7605),
    ("eight", "eat", 0.7196, 0.4352),
    ("allege", "ledge", 0.7149, 0.4172),
    ("ache", "egg", 0.7734, 0.4580),
    ("engels", "angle", 0.8318, 0.4986),
    ("bullion", "bull", 0.7814, 0.4128),
];

pub const HISTOGRAM_BINS: usize = 40;

/// Equal-width histogram over `[-1, 1]`; 1.0 falls in the last bin.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Histogram {
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn new(values: &[f64]) -> Self {
        let mut counts = vec![0; HISTOGRAM_BINS];
        for &v in values {
            counts[Self::bin(v)] += 1;
        }
        Histogram { counts }
    }

    fn bin(value: f64) -> usize {
        let scaled = ((value.clamp(-1.0, 1.0) + 1.0) / 2.0 * HISTOGRAM_BINS as f64).floor();
        (scaled as usize).min(HISTOGRAM_BINS - 1)
    }

    pub fn bin_edges(index: usize) -> (f64, f64) {
        let width = 2.0 / HISTOGRAM_BINS as f64;
        (-1.0 + index as f64 * width, -1.0 + (index + 1) as f64 * width)
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("bin_low\tbin_high\tcount\n");
        for (i, c) in self.counts.iter().enumerate() {
            let (lo, hi) = Self::bin_edges(i);
            let _ = writeln!(out, "{lo:.2}\t{hi:.2}\t{c}");
        }
        out
    }
}

/// Mean, population variance and histogram of a sample.
#[derive(Clone, Debug, PartialEq)]
pub struct DistributionStats {
    pub count: usize,
    pub mean: f64,
    pub variance: f64,
    pub histogram: Histogram,
}

impl DistributionStats {
    pub fn new(values: &[f64]) -> Self {
        let count = values.len();
        let (mean, variance) = if count == 0 {
            (f64::NAN, f64::NAN)
        } else {
            let n = count as f64;
            let mean = values.iter().sum::<f64>() / n;
            let variance = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            (mean, variance)
        };
        DistributionStats {
            count,
            mean,
            variance,
            histogram: Histogram::new(values),
        }
    }
}

/// Outcome of a pun-pair evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    /// Scored pairs, sorted by descending cosine.
    pub pairs: Vec<(String, String, f64)>,
    /// Pairs dropped because a word has no vector.
    pub skipped: usize,
    pub stats: DistributionStats,
    pub fingerprint: String,
}

impl EvalReport {
    pub fn pairs_tsv(&self) -> String {
        let mut out = String::from("word1\tword2\tcosine\n");
        for (a, b, c) in &self.pairs {
            let _ = writeln!(out, "{a}\t{b}\t{c:.4}");
        }
        out
    }

    pub fn summary(&self) -> String {
        format!(
            "embedding\t{}\nscored\t{}\nskipped\t{}\nmean\t{:.4}\nvariance\t{:.4}\n",
            self.fingerprint, self.stats.count, self.skipped, self.stats.mean, self.stats.variance
        )
    }
}

pub fn pun_eval(pairs: &PunPairSet, emb: &EmbeddingMatrix) -> Result<EvalReport> {
    let mut scored = Vec::with_capacity(pairs.len());
    let mut skipped = 0;
    for (a, b) in &pairs.pairs {
        match emb.cosine_words(a, b) {
            Ok(c) => scored.push((a.clone(), b.clone(), c)),
            Err(Error::UnknownWord(_)) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    let values: Vec<f64> = scored.iter().map(|p| p.2).collect();
    let stats = DistributionStats::new(&values);
    scored.sort_by(|x, y| y.2.total_cmp(&x.2).then_with(|| (&x.0, &x.1).cmp(&(&y.0, &y.1))));
    Ok(EvalReport {
        pairs: scored,
        skipped,
        stats,
        fingerprint: emb.fingerprint().to_owned(),
    })
}

/// Cosine statistics over `n` seeded uniform pairs of distinct rows.
pub fn random_baseline(emb: &EmbeddingMatrix, n: usize, seed: u64) -> Result<DistributionStats> {
    if n == 0 {
        return Err(Error::InvalidConfig("random baseline needs n >= 1".into()));
    }
    if emb.len() < 2 {
        return Err(Error::InvalidConfig("random baseline needs two or more words".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(n);
    while values.len() < n {
        let i = rng.gen_range(0..emb.len());
        let j = rng.gen_range(0..emb.len());
        if i == j {
            continue;
        }
        if let Ok(c) = cosine(emb.row(i), emb.row(j)) {
            values.push(c);
        }
    }
    Ok(DistributionStats::new(&values))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pearson_examples() {
        let xs = [1.0, 2.0, 3.0, 5.0];
        assert!((pearson(&xs, &xs).unwrap() - 1.0).abs() < 1e-15);
        let neg: Vec<f64> = xs.iter().map(|x| -x).collect();
        assert!((pearson(&xs, &neg).unwrap() + 1.0).abs() < 1e-15);
        // dx = (-1, 0, 1), dy = (-7/3, -1/3, 8/3): sxy = 5, sxx = 2,
        // syy = 114/9, so r = 5 / sqrt(228/9) = 15 / sqrt(228).
        let r = pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 7.0]).unwrap();
        assert!((r - 15.0 / 228f64.sqrt()).abs() < 1e-12);
        assert!((r - 0.9934).abs() < 1e-4);
    }

    #[test]
    fn pearson_errors() {
        assert!(pearson(&[1.0, 1.0], &[1.0, 2.0]).is_err());
        assert!(pearson(&[1.0, 2.0], &[1.0]).is_err());
        assert!(pearson(&[1.0], &[1.0]).is_err());
    }

    fn set() -> JudgmentSet {
        JudgmentSet::read("# demo\nsit\nsat\t3\nbit\t2.5\ndog\t0\n".as_bytes()).unwrap()
    }

    #[test]
    fn judgment_file_scales_ratings() {
        let s = set();
        assert_eq!(s.standard_word, "sit");
        assert_eq!(s.human_scores(), [0.75, 0.625, 0.0]);
        assert!(JudgmentSet::read("sit\nsat\t5\n".as_bytes()).is_err());
        assert!(JudgmentSet::read("sit\nsat 3\n".as_bytes()).is_err());
        assert!(JudgmentSet::read("".as_bytes()).is_err());
    }

    #[test]
    fn vitz_eval_self_and_constant() {
        let sets = [set()];
        let s = &sets[0];
        let r = vitz_eval(&sets, |_, w| {
            Ok(s.comparisons.iter().find(|(c, _)| c == w).unwrap().1)
        })
        .unwrap();
        assert!((r[0] - 1.0).abs() < 1e-12);
        assert!(vitz_eval(&sets, |_, _| Ok(0.5)).is_err());
        assert!(matches!(
            vitz_eval(&sets, |_, w| Err(Error::UnknownWord(w.into()))),
            Err(Error::UnknownWord(_))
        ));
    }

    #[test]
    fn pun_pairs_dedup_unordered_case_insensitive() {
        let text = "# c\nMutter\tmother\nmother\tmutter\nsole\tsell\nsole\tSELL\n";
        let set = PunPairSet::read(text.as_bytes()).unwrap();
        assert_eq!(
            set.pairs,
            [("mutter".into(), "mother".into()), ("sole".into(), "sell".into())]
        );
        assert!(PunPairSet::read("a b\n".as_bytes()).is_err());
    }

    #[test]
    fn histogram_covers_closed_interval() {
        let h = Histogram::new(&[-1.0, -0.99, 0.0, 0.999, 1.0]);
        assert_eq!(h.counts.len(), HISTOGRAM_BINS);
        assert_eq!(h.total(), 5);
        assert_eq!(h.counts[0], 2);
        assert_eq!(h.counts[20], 1);
        assert_eq!(h.counts[39], 2);
        assert_eq!(Histogram::bin_edges(0), (-1.0, -0.95));
    }

    #[test]
    fn pun_eval_and_baseline() {
        let emb = EmbeddingMatrix::new(
            ["aa", "bb", "cc"].map(String::from).to_vec(),
            2,
            vec![1.0, 0.0, 0.9, 0.1, -1.0, 0.2],
            "t@0".into(),
        )
        .unwrap();
        let pairs = PunPairSet::read("aa\taa\naa\tbb\naa\tzz\n".as_bytes()).unwrap();
        let report = pun_eval(&pairs, &emb).unwrap();
        assert_eq!(report.skipped, 1);
        assert_eq!(report.stats.count, 2);
        assert_eq!(report.stats.histogram.total(), 2);
        assert_eq!(report.pairs[0], ("aa".into(), "aa".into(), 1.0));

        assert!(random_baseline(&emb, 0, 1).is_err());
        let a = random_baseline(&emb, 50, 7).unwrap();
        let b = random_baseline(&emb, 50, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.count, 50);
    }
}
