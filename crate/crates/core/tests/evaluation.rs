mod common;

use common::{english, XorShift};
use phonosim::embedding::EmbeddingMatrix;
use phonosim::evaluation::{
    lexicon_scorer, pearson, penalty_sweep, pun_eval, random_baseline, sweep_tsv, vitz_eval, Histogram, JudgmentSet,
    PunPairSet,
    HISTOGRAM_BINS,
};
use phonosim::similarity::SimilarityConfig;
use phonosim::Error;

/// Textbook two-pass Pearson r.
fn reference_pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let vx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let vy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

fn synthetic_set() -> JudgmentSet {
    let text = "sinking\nthinking\t3.6\nsinging\t2.8\nsink\t2.5\nlinking\t2.9\ncat\t0.2\nbanana\t0.4\nsyncopate\t1.1\n";
    JudgmentSet::read(text.as_bytes()).unwrap()
}

#[test]
fn pearson_examples() {
    let xs = [1.0, 2.0, 3.0];
    assert!((pearson(&xs, &xs).unwrap() - 1.0).abs() < 1e-15);
    let neg: Vec<f64> = xs.iter().map(|x| -x).collect();
    assert!((pearson(&xs, &neg).unwrap() + 1.0).abs() < 1e-15);
    let r = pearson(&xs, &[2.0, 4.0, 7.0]).unwrap();
    assert!((r - reference_pearson(&xs, &[2.0, 4.0, 7.0])).abs() < 1e-12);
    assert!((r - 15.0 / 228f64.sqrt()).abs() < 1e-4);
    assert!(pearson(&xs, &[1.0, 1.0, 1.0]).is_err());
    assert!(pearson(&xs, &[1.0, 2.0]).is_err());
    assert!(pearson(&[1.0], &[2.0]).is_err());
}

#[test]
fn pearson_matches_reference_on_random_samples() {
    let mut rng = XorShift(4);
    for _ in 0..200 {
        let n = 2 + rng.below(30);
        let xs: Vec<f64> = (0..n).map(|_| rng.unit()).collect();
        let ys: Vec<f64> = (0..n).map(|_| rng.unit() * 3.0 - 1.0).collect();
        let r = pearson(&xs, &ys).unwrap();
        assert!((r - reference_pearson(&xs, &ys)).abs() < 1e-12);
        assert!((-1.0..=1.0).contains(&r));
    }
}

#[test]
fn judgment_ratings_are_scaled() {
    let set = synthetic_set();
    assert_eq!(set.standard_word, "sinking");
    assert_eq!(set.comparisons[0], ("thinking".to_owned(), 0.9));
    assert!(JudgmentSet::read("sinking\nthinking\t5\n".as_bytes()).is_err());
    assert!(JudgmentSet::read("sinking\nthinking 3\n".as_bytes()).is_err());
    assert!(JudgmentSet::read("".as_bytes()).is_err());
}

#[test]
fn vitz_eval_against_itself_and_constants() {
    let set = synthetic_set();
    let sets = [set.clone()];
    let human = |_: &str, w: &str| Ok(set.comparisons.iter().find(|(c, _)| c == w).unwrap().1);
    let r = vitz_eval(&sets, human).unwrap();
    assert!((r[0] - 1.0).abs() < 1e-12);
    assert!(vitz_eval(&sets, |_, _| Ok(0.5)).is_err());
}

#[test]
fn vitz_eval_names_missing_words() {
    let set = JudgmentSet::read("sinking\nthinking\t3\nqzxqzx\t1\n".as_bytes()).unwrap();
    let cfg = SimilarityConfig::default();
    let err = vitz_eval(&[set], lexicon_scorer(english(), &cfg)).unwrap_err();
    assert!(matches!(err, Error::UnknownWord(ref w) if w == "qzxqzx"), "{err}");
}

#[test]
fn sweep_is_continuous_in_penalty() {
    let sets = [synthetic_set()];
    let rows = penalty_sweep(&sets, english(), &[2.5, 2.5 + 1e-6]).unwrap();
    assert_eq!(rows.len(), 2);
    assert!((rows[0].mean - rows[1].mean).abs() < 1e-6);
    let one = penalty_sweep(&sets, english(), &[3.0]).unwrap();
    assert_eq!(one.len(), 1);
    assert_eq!(sweep_tsv(&one, &sets).lines().count(), 2);
    assert!(penalty_sweep(&sets, english(), &[0.5]).is_err());
}

#[test]
fn pun_pairs_deduplicate_unordered_and_case_insensitive() {
    let text = "Mutter\tmother\nmother\tmutter\nMUTTER\tMOTHER\ntruffle\ttrouble\nqzxqzx\tcat\n";
    let mut set = PunPairSet::read(text.as_bytes()).unwrap();
    assert_eq!(set.len(), 3);
    assert_eq!(set.pairs[0], ("mutter".to_owned(), "mother".to_owned()));
    set.retain_in_lexicon(english());
    assert_eq!(set.len(), 2);
}

fn tiny_embedding() -> EmbeddingMatrix {
    EmbeddingMatrix::new(
        vec!["a".into(), "b".into(), "c".into(), "d".into()],
        2,
        vec![1.0, 0.0, 0.8, 0.6, 0.0, 1.0, -1.0, 0.1],
        "fp".into(),
    )
    .unwrap()
}

#[test]
fn pun_eval_counts_and_histogram() {
    let emb = tiny_embedding();
    let pairs = PunPairSet::read("a\ta\na\tb\nc\td\nzz\ta\n".as_bytes()).unwrap();
    let report = pun_eval(&pairs, &emb).unwrap();
    assert_eq!(report.skipped, 1);
    assert_eq!(report.stats.count, 3);
    assert_eq!(report.stats.histogram.total(), 3);
    assert_eq!(report.pairs[0], ("a".to_owned(), "a".to_owned(), 1.0));
    assert!(report.pairs.windows(2).all(|w| w[0].2 >= w[1].2));
    assert_eq!(report.fingerprint, "fp");
}

#[test]
fn histogram_covers_the_closed_interval() {
    let h = Histogram::new(&[-1.0, -0.999, 0.0, 0.999, 1.0]);
    assert_eq!(h.counts.len(), HISTOGRAM_BINS);
    assert_eq!(h.counts[0], 2);
    assert_eq!(h.counts[HISTOGRAM_BINS - 1], 2);
    assert_eq!(h.total(), 5);
    assert_eq!(Histogram::bin_edges(0).0, -1.0);
    assert!((Histogram::bin_edges(HISTOGRAM_BINS - 1).1 - 1.0).abs() < 1e-12);
}

#[test]
fn random_baseline_is_seeded() {
    let emb = tiny_embedding();
    assert!(random_baseline(&emb, 0, 1).is_err());
    let a = random_baseline(&emb, 500, 9).unwrap();
    let b = random_baseline(&emb, 500, 9).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.count, 500);
    assert_ne!(a, random_baseline(&emb, 500, 10).unwrap());
}
