//! Phoneme inventories: the mapping from transcription symbols to
//! articulatory feature sets, and the bit-parallel set kernel used by every
//! similarity computation.
//!
//! A feature table is plain UTF-8 text with one phoneme per line:
//!
//! ```text
//! # comment
//! R   apr alv
//! AA  bck low unr vwl
//! ```
//!
//! Features are numbered in order of first appearance. Two dummy phones,
//! `BEG` and `END`, are always added with the singleton features `beg` and
//! `end`; they pad bigram sequences at word boundaries.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use crate::error::{Error, Result};

/// Maximum number of distinct features an inventory may use, including the
/// reserved `beg` and `end`.
pub const MAX_FEATURES: usize = 128;

pub const BEG_SYMBOL: &str = "BEG";
pub const END_SYMBOL: &str = "END";
pub const BEG_FEATURE: &str = "beg";
pub const END_FEATURE: &str = "end";
/// Marker feature that makes a phoneme a vowel.
pub const VOWEL_FEATURE: &str = "vwl";

/// A set of features, one bit per feature of the owning inventory.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct FeatureSet(u128);

impl FeatureSet {
    pub const EMPTY: FeatureSet = FeatureSet(0);

    pub const fn from_bits(bits: u128) -> Self {
        FeatureSet(bits)
    }

    pub const fn bits(self) -> u128 {
        self.0
    }

    pub fn singleton(index: usize) -> Self {
        assert!(index < MAX_FEATURES, "feature index {index} out of range");
        FeatureSet(1u128 << index)
    }

    pub fn insert(&mut self, index: usize) {
        *self = self.union(Self::singleton(index));
    }

    pub fn contains(self, index: usize) -> bool {
        index < MAX_FEATURES && self.0 & (1u128 << index) != 0
    }

    #[inline]
    pub const fn union(self, other: Self) -> Self {
        FeatureSet(self.0 | other.0)
    }

    #[inline]
    pub const fn intersection(self, other: Self) -> Self {
        FeatureSet(self.0 & other.0)
    }

    #[inline]
    pub const fn len(self) -> u32 {
        self.0.count_ones()
    }

    pub const fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Feature indices in ascending order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                return None;
            }
            let index = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            Some(index)
        })
    }
}

impl fmt::Debug for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl FromIterator<usize> for FeatureSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut set = FeatureSet::EMPTY;
        for index in iter {
            set.insert(index);
        }
        set
    }
}

/// Jaccard similarity |a ∩ b| / |a ∪ b|.
///
/// Fails when both sets are empty.
pub fn jaccard(a: FeatureSet, b: FeatureSet) -> Result<f64> {
    let union = a.union(b).len();
    if union == 0 {
        return Err(Error::EmptyFeatureSets);
    }
    Ok(f64::from(a.intersection(b).len()) / f64::from(union))
}

/// Jaccard kernel for the alignment hot loop. Callers guarantee that at
/// least one set is non-empty.
#[inline(always)]
pub(crate) fn jaccard_nonempty(a: u128, b: u128) -> f64 {
    debug_assert!(a | b != 0);
    f64::from((a & b).count_ones()) / f64::from((a | b).count_ones())
}

/// Index of a phoneme within its [`Inventory`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PhonemeId(pub(crate) u16);

impl PhonemeId {
    pub fn index(self) -> usize {
        usize::from(self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Feature {
    pub code: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Phoneme {
    pub symbol: String,
    pub features: FeatureSet,
    pub is_vowel: bool,
}

/// An immutable, validated phoneme → feature mapping for one language.
#[derive(Clone, Debug)]
pub struct Inventory {
    language: String,
    features: Vec<Feature>,
    phonemes: Vec<Phoneme>,
    by_symbol: HashMap<String, PhonemeId>,
    beg: PhonemeId,
    end: PhonemeId,
}

impl Inventory {
    pub fn load(path: impl AsRef<Path>, language: &str) -> Result<Self> {
        let path = path.as_ref();
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(file, language).map_err(|e| match e {
            Error::Stream(source) => Error::io(path, source),
            other => other,
        })
    }

    pub fn from_reader(reader: impl Read, language: &str) -> Result<Self> {
        let mut builder = Builder::default();
        for (number, line) in BufReader::new(reader).lines().enumerate() {
            builder.add_line(number + 1, &line?)?;
        }
        builder.finish(language)
    }

    pub fn parse_str(text: &str, language: &str) -> Result<Self> {
        Self::from_reader(text.as_bytes(), language)
    }

    pub fn language(&self) -> &str {
        &self.language
    }

    /// Ordered feature universe, including `beg` and `end`.
    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn feature_index(&self, code: &str) -> Option<usize> {
        self.features.iter().position(|f| f.code == code)
    }

    /// All phonemes including the two dummy phones.
    pub fn phonemes(&self) -> &[Phoneme] {
        &self.phonemes
    }

    pub fn id(&self, symbol: &str) -> Option<PhonemeId> {
        self.by_symbol.get(symbol).copied()
    }

    pub fn phoneme(&self, id: PhonemeId) -> &Phoneme {
        &self.phonemes[id.index()]
    }

    pub fn get(&self, symbol: &str) -> Option<&Phoneme> {
        self.id(symbol).map(|id| self.phoneme(id))
    }

    pub fn beg(&self) -> PhonemeId {
        self.beg
    }

    pub fn end(&self) -> PhonemeId {
        self.end
    }

    pub fn is_dummy(&self, id: PhonemeId) -> bool {
        id == self.beg || id == self.end
    }

    /// Renders the table back into the feature-table format. Dummy phones are
    /// omitted since loading re-adds them.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        for phoneme in &self.phonemes[..self.phonemes.len() - 2] {
            out.push_str(&phoneme.symbol);
            for index in phoneme.features.iter() {
                out.push(' ');
                out.push_str(&self.features[index].code);
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Default)]
struct Builder {
    features: Vec<Feature>,
    feature_ids: HashMap<String, usize>,
    phonemes: Vec<Phoneme>,
    by_symbol: HashMap<String, PhonemeId>,
}

impl Builder {
    fn add_line(&mut self, number: usize, line: &str) -> Result<()> {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            return Ok(());
        }
        let mut tokens = line.split_whitespace();
        let symbol = tokens.next().unwrap_or_default();
        if symbol == BEG_SYMBOL || symbol == END_SYMBOL {
            return Err(Error::Malformed {
                line: number,
                message: format!("{symbol} is reserved for the word-boundary phone"),
            });
        }
        if self.by_symbol.contains_key(symbol) {
            return Err(Error::DuplicatePhoneme {
                line: number,
                symbol: symbol.to_owned(),
            });
        }

        let mut features = FeatureSet::EMPTY;
        for code in tokens {
            if code == BEG_FEATURE || code == END_FEATURE {
                return Err(Error::Malformed {
                    line: number,
                    message: format!("feature {code:?} is reserved"),
                });
            }
            if !is_feature_code(code) {
                return Err(Error::Malformed {
                    line: number,
                    message: format!("invalid feature code {code:?}"),
                });
            }
            features.insert(self.feature(code)?);
        }
        if features.is_empty() {
            return Err(Error::Malformed {
                line: number,
                message: format!("phoneme {symbol:?} has no features"),
            });
        }
        self.push(symbol, features)
    }

    fn feature(&mut self, code: &str) -> Result<usize> {
        if let Some(&index) = self.feature_ids.get(code) {
            return Ok(index);
        }
        let index = self.features.len();
        // Two slots stay free for beg/end.
        if index + 2 >= MAX_FEATURES {
            return Err(Error::TooManyFeatures {
                count: index + 3,
                limit: MAX_FEATURES,
            });
        }
        self.features.push(Feature {
            code: code.to_owned(),
        });
        self.feature_ids.insert(code.to_owned(), index);
        Ok(index)
    }

    fn push(&mut self, symbol: &str, features: FeatureSet) -> Result<()> {
        let id = u16::try_from(self.phonemes.len())
            .map(PhonemeId)
            .map_err(|_| Error::InvalidConfig("too many phonemes".into()))?;
        let is_vowel = self
            .feature_ids
            .get(VOWEL_FEATURE)
            .is_some_and(|&v| features.contains(v));
        self.phonemes.push(Phoneme {
            symbol: symbol.to_owned(),
            features,
            is_vowel,
        });
        self.by_symbol.insert(symbol.to_owned(), id);
        Ok(())
    }

    fn finish(mut self, language: &str) -> Result<Inventory> {
        if self.phonemes.is_empty() {
            return Err(Error::NoPhonemes);
        }
        let beg_feature = self.features.len();
        self.features.push(Feature {
            code: BEG_FEATURE.to_owned(),
        });
        self.features.push(Feature {
            code: END_FEATURE.to_owned(),
        });
        self.push(BEG_SYMBOL, FeatureSet::singleton(beg_feature))?;
        self.push(END_SYMBOL, FeatureSet::singleton(beg_feature + 1))?;
        let beg = self.by_symbol[BEG_SYMBOL];
        let end = self.by_symbol[END_SYMBOL];
        Ok(Inventory {
            language: language.to_owned(),
            features: self.features,
            phonemes: self.phonemes,
            by_symbol: self.by_symbol,
            beg,
            end,
        })
    }
}

fn is_feature_code(code: &str) -> bool {
    code.chars()
        .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}
