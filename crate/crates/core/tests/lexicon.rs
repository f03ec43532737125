mod common;

use std::fmt::Write as _;
use std::sync::Arc;

use common::{data_path, english, english_arc};
use phonosim::data::Language;
use phonosim::lexicon::{Lexicon, ParseOptions};
use phonosim::Error;

fn symbols(lex: &Lexicon, word: &str) -> Vec<String> {
    lex.lookup(word)
        .iter()
        .map(|p| p.display(lex.inventory()))
        .collect()
}

#[test]
fn sinking_is_stress_stripped() {
    let raw = std::fs::read_to_string(data_path("en/cmudict-0.7b.txt")).unwrap();
    let line = raw.lines().find(|l| l.starts_with("SINKING  ")).unwrap();
    assert_eq!(line, "SINKING  S IH1 NG K IH0 NG");
    assert_eq!(symbols(english(), "sinking"), ["S IH NG K IH NG"]);
    assert_eq!(symbols(english(), "SiNkInG"), ["S IH NG K IH NG"]);
}

#[test]
fn variants_fold_into_the_headword() {
    assert_eq!(symbols(english(), "a"), ["AH", "EY"]);
    assert!(english().lookup("a(1)").is_empty());
}

#[test]
fn absent_and_empty_lookups() {
    assert!(english().lookup("").is_empty());
    assert!(english().lookup("zzzzqq").is_empty());
}

#[test]
fn bundled_dictionary_is_large_and_clean() {
    let lex = english();
    assert!(lex.len() > 120_000, "{} headwords", lex.len());
    assert!(lex.entry_lines() > 130_000);
    assert!(lex.rejected().is_empty(), "{:?}", &lex.rejected()[..1]);
    assert_eq!(lex.pronunciation_count(), lex.entry_lines());
}

#[test]
fn plain_round_trip_of_full_dictionary() {
    let lex = english();
    let mut buf = Vec::new();
    lex.write_plain(&mut buf).unwrap();
    let back = Lexicon::parse_plain(&buf[..], english_arc(), ParseOptions::default()).unwrap();
    assert_eq!(back.words(), lex.words());
    for i in 0..lex.len() {
        assert_eq!(back.pronunciations(i), lex.pronunciations(i));
    }
    let mut again = Vec::new();
    back.write_plain(&mut again).unwrap();
    assert_eq!(buf, again);
}

#[test]
fn comments_are_skipped() {
    let text = ";;; a comment\nCAT  K AE1 T\n";
    let lex = Lexicon::parse_cmu(text.as_bytes(), english_arc(), ParseOptions::default()).unwrap();
    assert_eq!(lex.words(), ["cat"]);
    assert_eq!(lex.entry_lines(), 1);
}

#[test]
fn plain_format_on_hindi_sample() {
    let hindi = Language::Hindi.load_lexicon().unwrap();
    assert_eq!(symbols(&hindi, "kam"), ["k a m"]);
    assert!(hindi.rejected().is_empty());
}

#[test]
fn duplicate_plain_lines_append_in_order() {
    let inv = Language::Hindi.load_inventory().unwrap();
    let lex = Lexicon::parse_plain("kam\tk a m\nkam\tk a\n".as_bytes(), inv, ParseOptions::default()).unwrap();
    assert_eq!(symbols(&lex, "kam"), ["k a m", "k a"]);
}

#[test]
fn rare_bad_lines_are_collected() {
    let inv = Language::Hindi.load_inventory().unwrap();
    let mut text = String::new();
    for i in 0..1500 {
        writeln!(text, "w{i}\tk a m").unwrap();
    }
    text.push_str("bad\tk zz m\n");
    let lex = Lexicon::parse_plain(text.as_bytes(), inv, ParseOptions::default()).unwrap();
    assert_eq!(lex.len(), 1500);
    assert_eq!(lex.rejected().len(), 1);
    assert_eq!(lex.rejected()[0].line, 1501);
    assert!(lex.rejected()[0].message.contains("zz"));
}

#[test]
fn frequent_bad_lines_fail_the_parse() {
    let inv = Language::Hindi.load_inventory().unwrap();
    let err = Lexicon::parse_plain("kam\tk a m\nbad\tzz\n".as_bytes(), inv, ParseOptions::default()).unwrap_err();
    assert!(matches!(err, Error::TooManyBadLines { bad: 1, total: 2, .. }), "{err}");
}

#[test]
fn english_dictionary_against_hindi_inventory_is_rejected() {
    let inv = Language::Hindi.load_inventory().unwrap();
    let err = Lexicon::load_cmu(data_path("en/cmudict-0.7b.txt"), inv, ParseOptions::default()).unwrap_err();
    assert!(matches!(err, Error::TooManyBadLines { .. }));
}

#[test]
fn headword_filter_drops_punctuated_entries() {
    let text = "CAT  K AE1 T\nCAT'S  K AE1 T S\nA.  EY1\nR&B  AA1 R AH0 N B IY1\n";
    let all = Lexicon::parse_cmu(text.as_bytes(), english_arc(), ParseOptions::default()).unwrap();
    let plain = Lexicon::parse_cmu(text.as_bytes(), Arc::clone(&english_arc()), ParseOptions { plain_headwords_only: true }).unwrap();
    assert_eq!(all.len(), 4);
    assert_eq!(plain.words(), ["cat", "cat's", "a."]);
}
