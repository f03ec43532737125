//! Reference implementations used as test oracles.
//!
//! Nothing here touches the library's bitsets or DP tables: feature sets are
//! `BTreeSet<String>` read straight from the data file, and the alignment is a
//! memoized recursion over 1-based indices.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::PathBuf;
use std::sync::{Arc, OnceLock};

use phonosim::data::Language;
use phonosim::lexicon::Lexicon;

pub type Features = BTreeSet<String>;

pub fn data_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(rel)
}

pub fn english() -> &'static Lexicon {
    static LEX: OnceLock<Lexicon> = OnceLock::new();
    LEX.get_or_init(|| Language::English.load_lexicon().expect("bundled English lexicon"))
}

pub fn english_arc() -> Arc<phonosim::inventory::Inventory> {
    english().inventory().clone()
}

/// Symbol -> feature codes, read independently of `Inventory`.
pub fn feature_table(rel: &str) -> BTreeMap<String, Features> {
    let text = std::fs::read_to_string(data_path(rel)).expect("feature table");
    let mut table = BTreeMap::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let symbol = tokens.next().unwrap().to_owned();
        table.insert(symbol, tokens.map(str::to_owned).collect());
    }
    table.insert("BEG".into(), BTreeSet::from(["beg".to_owned()]));
    table.insert("END".into(), BTreeSet::from(["end".to_owned()]));
    table
}

pub fn english_table() -> &'static BTreeMap<String, Features> {
    static TABLE: OnceLock<BTreeMap<String, Features>> = OnceLock::new();
    TABLE.get_or_init(|| feature_table("en/features.txt"))
}

pub fn set_jaccard(a: &Features, b: &Features) -> f64 {
    let inter = a.intersection(b).count();
    let union = a.union(b).count();
    assert!(union > 0, "jaccard of two empty sets");
    inter as f64 / union as f64
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Mode {
    Unigram,
    Bigram,
    VowelWeighted,
}

struct Unit {
    features: Features,
    tail: String,
    tail_vowel: bool,
}

fn units(symbols: &[&str], table: &BTreeMap<String, Features>, mode: Mode) -> Vec<Unit> {
    let phone = |s: &str| table.get(s).unwrap_or_else(|| panic!("unknown symbol {s}")).clone();
    if mode == Mode::Unigram {
        return symbols
            .iter()
            .map(|s| {
                let features = phone(s);
                Unit { tail_vowel: features.contains("vwl"), features, tail: s.to_string() }
            })
            .collect();
    }
    let mut padded = vec!["BEG"];
    padded.extend_from_slice(symbols);
    padded.push("END");
    padded
        .windows(2)
        .map(|w| {
            let second = phone(w[1]);
            Unit {
                tail_vowel: second.contains("vwl"),
                features: phone(w[0]).union(&second).cloned().collect(),
                tail: w[1].to_string(),
            }
        })
        .collect()
}

fn unit_score(x: &Unit, y: &Unit, mode: Mode) -> f64 {
    let s = set_jaccard(&x.features, &y.features);
    match mode {
        Mode::VowelWeighted if x.tail_vowel && x.tail == y.tail => s.sqrt(),
        Mode::VowelWeighted => s * s,
        _ => s,
    }
}

/// Word similarity by direct recursion on the defining recurrence.
pub fn oracle_similarity(a: &[&str], b: &[&str], mode: Mode, p: f64, table: &BTreeMap<String, Features>) -> f64 {
    let ua = units(a, table, mode);
    let ub = units(b, table, mode);
    let (n, m) = (ua.len(), ub.len());
    let s = |i: usize, j: usize| unit_score(&ua[i - 1], &ub[j - 1], mode);
    let mut memo = HashMap::new();
    fn d(i: usize, j: usize, p: f64, s: &dyn Fn(usize, usize) -> f64, memo: &mut HashMap<(usize, usize), f64>) -> f64 {
        if let Some(&v) = memo.get(&(i, j)) {
            return v;
        }
        let v = if i == 1 && j == 1 {
            s(1, 1)
        } else if i == 1 {
            d(1, j - 1, p, s, memo) + s(1, j)
        } else if j == 1 {
            d(i - 1, 1, p, s, memo) + s(i, 1)
        } else {
            let here = s(i, j);
            if here == 1.0 {
                here + d(i - 1, j - 1, p, s, memo)
            } else {
                here / p + d(i - 1, j, p, s, memo).min(d(i, j - 1, p, s, memo))
            }
        };
        memo.insert((i, j), v);
        v
    }
    d(n, m, p, &s, &mut memo) / n.max(m) as f64
}

pub fn symbols(lex: &Lexicon, index: usize) -> Vec<&str> {
    lex.primary(index).symbols(lex.inventory()).collect()
}

/// Deterministic xorshift for choosing test samples without the library's RNG stack.
pub struct XorShift(pub u64);

impl XorShift {
    pub fn next(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next() % n as u64) as usize
    }

    pub fn unit(&mut self) -> f64 {
        (self.next() >> 11) as f64 / (1u64 << 53) as f64
    }
}
