//! Pronunciation dictionaries.
//!
//! Two layouts are accepted:
//!
//! * CMU 0.7b: `WORD  PH PH ...`, `;;;` comment lines, alternate
//!   pronunciations as `WORD(1)`, vowels carrying a trailing stress digit.
//! * Plain: `word<TAB>ph ph ...`, `#` comment lines, no stress marks.
//!
//! Words are lower-cased and kept in file order; that order indexes the rows
//! of any embedding trained from the lexicon.

use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, LineError, Result};
use crate::inventory::{Inventory, PhonemeId};

/// A stress-free phoneme sequence, resolved against an inventory.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Pronunciation(Vec<PhonemeId>);

impl Pronunciation {
    pub fn new(phonemes: Vec<PhonemeId>) -> Result<Self> {
        if phonemes.is_empty() {
            return Err(Error::EmptyPronunciation);
        }
        Ok(Pronunciation(phonemes))
    }

    /// Resolves whitespace-separated symbols. Stress digits are not stripped.
    pub fn parse(symbols: &str, inventory: &Inventory) -> Result<Self> {
        let ids = symbols
            .split_whitespace()
            .map(|s| resolve(s, inventory))
            .collect::<Result<Vec<_>>>()?;
        Self::new(ids)
    }

    pub fn phonemes(&self) -> &[PhonemeId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols<'a>(&'a self, inventory: &'a Inventory) -> impl Iterator<Item = &'a str> + 'a {
        self.0
            .iter()
            .map(move |&id| inventory.phoneme(id).symbol.as_str())
    }

    pub fn display(&self, inventory: &Inventory) -> String {
        self.symbols(inventory).collect::<Vec<_>>().join(" ")
    }
}

fn resolve(symbol: &str, inventory: &Inventory) -> Result<PhonemeId> {
    match inventory.id(symbol) {
        Some(id) if !inventory.is_dummy(id) => Ok(id),
        _ => Err(Error::UnknownPhoneme(symbol.to_owned())),
    }
}

/// Removes a CMU stress mark (a trailing 0, 1 or 2).
pub fn strip_stress(symbol: &str) -> &str {
    match symbol.as_bytes().last() {
        Some(b'0' | b'1' | b'2') if symbol.len() > 1 => &symbol[..symbol.len() - 1],
        _ => symbol,
    }
}

/// True for headwords made only of letters, apostrophes, hyphens and periods.
pub fn is_plain_headword(word: &str) -> bool {
    !word.is_empty()
        && word
            .chars()
            .all(|c| c.is_alphabetic() || matches!(c, '\'' | '-' | '.'))
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ParseOptions {
    /// Drop headwords rejected by [`is_plain_headword`].
    pub plain_headwords_only: bool,
}

/// Fraction of entry lines that may fail validation before a parse is
/// rejected outright.
pub const MAX_BAD_LINE_FRACTION: f64 = 0.001;

#[derive(Clone, Debug)]
pub struct Lexicon {
    inventory: Arc<Inventory>,
    words: Vec<String>,
    entries: Vec<Vec<Pronunciation>>,
    index: HashMap<String, usize>,
    entry_lines: usize,
    rejected: Vec<LineError>,
}

#[derive(Clone, Copy)]
enum Layout {
    Cmu,
    Plain,
}

impl Lexicon {
    pub fn load_cmu(path: impl AsRef<Path>, inventory: Arc<Inventory>, options: ParseOptions) -> Result<Self> {
        let path = path.as_ref();
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::parse_cmu(file, inventory, options)
    }

    pub fn load_plain(path: impl AsRef<Path>, inventory: Arc<Inventory>, options: ParseOptions) -> Result<Self> {
        let path = path.as_ref();
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::parse_plain(file, inventory, options)
    }

    pub fn parse_cmu(reader: impl Read, inventory: Arc<Inventory>, options: ParseOptions) -> Result<Self> {
        Self::parse(reader, inventory, options, Layout::Cmu)
    }

    pub fn parse_plain(reader: impl Read, inventory: Arc<Inventory>, options: ParseOptions) -> Result<Self> {
        Self::parse(reader, inventory, options, Layout::Plain)
    }

    /// Builds a lexicon from already-resolved entries, in the given order.
    pub fn from_entries(
        inventory: Arc<Inventory>,
        entries: impl IntoIterator<Item = (String, Pronunciation)>,
    ) -> Self {
        let mut lexicon = Self::empty(inventory);
        for (word, pronunciation) in entries {
            lexicon.entry_lines += 1;
            lexicon.push(word.to_lowercase(), pronunciation);
        }
        lexicon
    }

    fn empty(inventory: Arc<Inventory>) -> Self {
        Lexicon {
            inventory,
            words: Vec::new(),
            entries: Vec::new(),
            index: HashMap::new(),
            entry_lines: 0,
            rejected: Vec::new(),
        }
    }

    fn parse(reader: impl Read, inventory: Arc<Inventory>, options: ParseOptions, layout: Layout) -> Result<Self> {
        let mut lexicon = Self::empty(inventory);
        let mut raw = Vec::new();
        let mut reader = BufReader::new(reader);
        let mut number = 0;
        loop {
            raw.clear();
            if reader.read_until(b'\n', &mut raw)? == 0 {
                break;
            }
            number += 1;
            // CMU 0.7b carries a handful of Latin-1 bytes.
            let line = String::from_utf8_lossy(&raw);
            let line = line.trim_end_matches(['\n', '\r']);
            if line.trim().is_empty() || is_comment(line, layout) {
                continue;
            }
            lexicon.entry_lines += 1;
            match lexicon.parse_line(line, layout) {
                Ok((word, pronunciation)) => {
                    if options.plain_headwords_only && !is_plain_headword(&word) {
                        continue;
                    }
                    lexicon.push(word, pronunciation);
                }
                Err(message) => lexicon.rejected.push(LineError { line: number, message }),
            }
        }

        let bad = lexicon.rejected.len();
        if bad > 0 && bad as f64 > MAX_BAD_LINE_FRACTION * lexicon.entry_lines as f64 {
            return Err(Error::TooManyBadLines {
                bad,
                total: lexicon.entry_lines,
                errors: lexicon.rejected,
            });
        }
        Ok(lexicon)
    }

    fn parse_line(&self, line: &str, layout: Layout) -> std::result::Result<(String, Pronunciation), String> {
        let (head, phones) = match layout {
            Layout::Cmu => {
                let mut parts = line.trim().splitn(2, char::is_whitespace);
                (parts.next().unwrap_or_default(), parts.next().unwrap_or_default())
            }
            Layout::Plain => line
                .split_once('\t')
                .ok_or_else(|| "expected word<TAB>phonemes".to_owned())?,
        };
        let word = match layout {
            Layout::Cmu => strip_variant(head),
            Layout::Plain => head.trim(),
        };
        if word.is_empty() {
            return Err("missing headword".to_owned());
        }
        let ids = phones
            .split_whitespace()
            .map(|token| {
                let symbol = match layout {
                    Layout::Cmu => strip_stress(token),
                    Layout::Plain => token,
                };
                resolve(symbol, &self.inventory).map_err(|e| e.to_string())
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let pronunciation = Pronunciation::new(ids).map_err(|_| format!("{word:?} has no phonemes"))?;
        Ok((word.to_lowercase(), pronunciation))
    }

    fn push(&mut self, word: String, pronunciation: Pronunciation) {
        match self.index.get(&word) {
            Some(&i) => self.entries[i].push(pronunciation),
            None => {
                self.index.insert(word.clone(), self.words.len());
                self.words.push(word);
                self.entries.push(vec![pronunciation]);
            }
        }
    }

    pub fn inventory(&self) -> &Arc<Inventory> {
        &self.inventory
    }

    /// Headwords in file order.
    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Number of non-comment lines read, i.e. pronunciation entries before
    /// variants were folded.
    pub fn entry_lines(&self) -> usize {
        self.entry_lines
    }

    /// Total number of pronunciations kept.
    pub fn pronunciation_count(&self) -> usize {
        self.entries.iter().map(Vec::len).sum()
    }

    /// Lines skipped because they failed validation.
    pub fn rejected(&self) -> &[LineError] {
        &self.rejected
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(&word.to_lowercase()).copied()
    }

    /// All pronunciations of `word` (case-insensitive); empty when absent.
    pub fn lookup(&self, word: &str) -> &[Pronunciation] {
        self.index_of(word).map_or(&[], |i| &self.entries[i])
    }

    pub fn primary(&self, index: usize) -> &Pronunciation {
        &self.entries[index][0]
    }

    pub fn pronunciations(&self, index: usize) -> &[Pronunciation] {
        &self.entries[index]
    }

    /// A new lexicon holding the given headwords (by index), in the order given.
    pub fn subset(&self, indices: &[usize]) -> Lexicon {
        let mut lexicon = Self::empty(Arc::clone(&self.inventory));
        for &i in indices {
            for p in &self.entries[i] {
                lexicon.entry_lines += 1;
                lexicon.push(self.words[i].clone(), p.clone());
            }
        }
        lexicon
    }

    /// Writes every pronunciation in the plain layout.
    pub fn write_plain(&self, mut out: impl Write) -> Result<()> {
        for (word, prons) in self.words.iter().zip(&self.entries) {
            for p in prons {
                writeln!(out, "{word}\t{}", p.display(&self.inventory))?;
            }
        }
        Ok(())
    }
}

/// `n` distinct indices below `len`, drawn with `seed`, in ascending order.
pub fn sample_indices(len: usize, n: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut all: Vec<usize> = (0..len).collect();
    let (chosen, _) = all.partial_shuffle(&mut rng, n.min(len));
    let mut chosen = chosen.to_vec();
    chosen.sort_unstable();
    chosen
}

fn is_comment(line: &str, layout: Layout) -> bool {
    match layout {
        Layout::Cmu => line.starts_with(";;;"),
        Layout::Plain => line.starts_with('#'),
    }
}

/// `WORD(2)` → `WORD`.
fn strip_variant(head: &str) -> &str {
    if let Some(open) = head.rfind('(') {
        let inner = &head[open + 1..];
        if open > 0 && inner.len() > 1 && inner.ends_with(')') && inner[..inner.len() - 1].bytes().all(|b| b.is_ascii_digit()) {
            return &head[..open];
        }
    }
    head
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inventory() -> Arc<Inventory> {
        let table = "S vls alv frc\nIH fnt smh unr vwl\nNG vel nas\nK vls vel stp\nAH cnt mid unr vwl\nEY fnt lmd smh unr vwl\nM blb nas\n";
        Arc::new(Inventory::parse_str(table, "en").unwrap())
    }

    fn hindi() -> Arc<Inventory> {
        Arc::new(Inventory::parse_str("k cons hi back\na syl son vwl\nm cons lab nas\n", "hi").unwrap())
    }

    #[test]
    fn strips_stress_and_lowercases() {
        let inv = inventory();
        let lex = Lexicon::parse_cmu("SINKING  S IH1 NG K IH0 NG\n".as_bytes(), inv.clone(), ParseOptions::default()).unwrap();
        let prons = lex.lookup("sinking");
        assert_eq!(prons.len(), 1);
        assert_eq!(prons[0].display(&inv), "S IH NG K IH NG");
        assert_eq!(lex.lookup("SINKING"), prons);
    }

    #[test]
    fn comments_are_skipped() {
        let lex = Lexicon::parse_cmu(";;; comment\n".as_bytes(), inventory(), ParseOptions::default()).unwrap();
        assert!(lex.is_empty());
        assert_eq!(lex.entry_lines(), 0);
    }

    #[test]
    fn variants_fold_into_headword() {
        let inv = inventory();
        let lex = Lexicon::parse_cmu("A  AH0\nA(1)  EY1\n".as_bytes(), inv.clone(), ParseOptions::default()).unwrap();
        assert_eq!(lex.len(), 1);
        let shown: Vec<_> = lex.lookup("a").iter().map(|p| p.display(&inv)).collect();
        assert_eq!(shown, ["AH", "EY"]);
        assert_eq!(lex.entry_lines(), 2);
    }

    #[test]
    fn variant_suffix_rules() {
        assert_eq!(strip_variant("A(1)"), "A");
        assert_eq!(strip_variant("WORD(12)"), "WORD");
        assert_eq!(strip_variant("(PAREN"), "(PAREN");
        assert_eq!(strip_variant("X()"), "X()");
        assert_eq!(strip_variant("X(A)"), "X(A)");
    }

    #[test]
    fn stress_only_trailing_012() {
        assert_eq!(strip_stress("AA1"), "AA");
        assert_eq!(strip_stress("AH0"), "AH");
        assert_eq!(strip_stress("ER2"), "ER");
        assert_eq!(strip_stress("AA3"), "AA3");
        assert_eq!(strip_stress("K"), "K");
        assert_eq!(strip_stress("0"), "0");
    }

    #[test]
    fn plain_format() {
        let inv = hindi();
        let lex = Lexicon::parse_plain("kam\tk a m\nkam\tk a\n".as_bytes(), inv.clone(), ParseOptions::default()).unwrap();
        let shown: Vec<_> = lex.lookup("kam").iter().map(|p| p.display(&inv)).collect();
        assert_eq!(shown, ["k a m", "k a"]);
    }

    #[test]
    fn unknown_phoneme_is_collected() {
        let err = Lexicon::parse_plain("kam\tk a m\nkaz\tk a zz\n".as_bytes(), hindi(), ParseOptions::default()).unwrap_err();
        match err {
            Error::TooManyBadLines { bad, total, errors } => {
                assert_eq!((bad, total), (1, 2));
                assert_eq!(errors[0].line, 2);
                assert!(errors[0].message.contains("\"zz\""));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rare_bad_lines_are_tolerated() {
        let mut text = String::new();
        for i in 0..2000 {
            text.push_str(&format!("w{i}\tk a m\n"));
        }
        text.push_str("bad\tk zz\n");
        let lex = Lexicon::parse_plain(text.as_bytes(), hindi(), ParseOptions::default()).unwrap();
        assert_eq!(lex.len(), 2000);
        assert_eq!(lex.rejected().len(), 1);
        assert_eq!(lex.rejected()[0].line, 2001);
    }

    #[test]
    fn dummy_phones_are_not_valid_entries() {
        assert!(Lexicon::parse_plain("x\tBEG k\n".as_bytes(), hindi(), ParseOptions::default()).is_err());
    }

    #[test]
    fn lookup_misses() {
        let lex = Lexicon::parse_plain("kam\tk a m\n".as_bytes(), hindi(), ParseOptions::default()).unwrap();
        assert!(lex.lookup("").is_empty());
        assert!(lex.lookup("zzzzqq").is_empty());
    }

    #[test]
    fn headword_filter() {
        let inv = inventory();
        let text = "SING  S IH1 NG\n\"QUOTE  K\n";
        let all = Lexicon::parse_cmu(text.as_bytes(), inv.clone(), ParseOptions::default()).unwrap();
        assert_eq!(all.len(), 2);
        let filtered = Lexicon::parse_cmu(text.as_bytes(), inv, ParseOptions { plain_headwords_only: true }).unwrap();
        assert_eq!(filtered.words(), ["sing"]);
        assert!(is_plain_headword("o'clock"));
        assert!(is_plain_headword("a."));
        assert!(!is_plain_headword("2nd"));
    }
}
