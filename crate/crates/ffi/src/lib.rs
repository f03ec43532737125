//! C interface to `phonosim`.
//!
//! Every function returns a [`PhonosimStatus`]; results come back through
//! out-pointers. On failure, [`phonosim_last_error`] describes what went wrong
//! on the calling thread. Handles are opaque and must be released with the
//! matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::sync::Arc;

use phonosim::data::Language;
use phonosim::embedding::{self, EmbeddingMatrix, TrainConfig};
use phonosim::inventory::Inventory;
use phonosim::lexicon::{strip_stress, Lexicon, ParseOptions, Pronunciation};
use phonosim::similarity::{word_similarity, SimilarityConfig};
use phonosim::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhonosimStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    UnknownWord = 5,
    UnknownPhoneme = 6,
    InvalidConfig = 7,
    Diverged = 8,
    ZeroVector = 9,
    BufferTooSmall = 10,
    Internal = 11,
}

impl From<&Error> for PhonosimStatus {
    fn from(err: &Error) -> Self {
        match err {
            Error::Io { .. } | Error::Stream(_) => PhonosimStatus::Io,
            Error::UnknownWord(_) => PhonosimStatus::UnknownWord,
            Error::UnknownPhoneme(_) | Error::EmptyPronunciation => PhonosimStatus::UnknownPhoneme,
            Error::InvalidConfig(_) | Error::EmptyFeatureSets | Error::Statistics(_) => PhonosimStatus::InvalidConfig,
            Error::Diverged { .. } => PhonosimStatus::Diverged,
            Error::ZeroVector => PhonosimStatus::ZeroVector,
            _ => PhonosimStatus::Parse,
        }
    }
}

/// Similarity settings. `bigram = false` ignores `vowel_weighted`.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct PhonosimSimilarityConfig {
    pub bigram: bool,
    pub vowel_weighted: bool,
    pub penalty: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct PhonosimTrainConfig {
    pub dim: usize,
    pub epochs: usize,
    pub pairs_per_word: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub final_learning_rate: f64,
    pub self_pair_fraction: f64,
    pub seed: u64,
}

/// A pronunciation dictionary together with its phoneme inventory.
pub struct PhonosimLexicon(Lexicon);

pub struct PhonosimEmbedding(EmbeddingMatrix);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: String) {
    let message = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = message);
}

fn fail(status: PhonosimStatus, message: impl Into<String>) -> PhonosimStatus {
    set_last_error(message.into());
    status
}

type Outcome = Result<(), PhonosimStatus>;

fn guard(body: impl FnOnce() -> Outcome) -> PhonosimStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_last_error(String::new());
            PhonosimStatus::Ok
        }
        Ok(Err(status)) => status,
        Err(_) => fail(PhonosimStatus::Internal, "internal panic"),
    }
}

fn check<T>(result: phonosim::Result<T>) -> Result<T, PhonosimStatus> {
    result.map_err(|err| fail(PhonosimStatus::from(&err), err.to_string()))
}

unsafe fn text<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, PhonosimStatus> {
    if ptr.is_null() {
        return Err(fail(PhonosimStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| fail(PhonosimStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn deref<'a, T>(ptr: *const T, what: &str) -> Result<&'a T, PhonosimStatus> {
    ptr.as_ref().ok_or_else(|| fail(PhonosimStatus::NullArgument, format!("{what} is null")))
}

unsafe fn write<T>(out: *mut T, value: T) -> Outcome {
    if out.is_null() {
        return Err(fail(PhonosimStatus::NullArgument, "output pointer is null"));
    }
    out.write(value);
    Ok(())
}

fn pronunciation(symbols: &str, inventory: &Inventory) -> Result<Pronunciation, PhonosimStatus> {
    let symbols: Vec<&str> = symbols
        .split_whitespace()
        .map(|s| if inventory.id(s).is_some() { s } else { strip_stress(s) })
        .collect();
    check(Pronunciation::parse(&symbols.join(" "), inventory))
}

fn similarity_config(config: &PhonosimSimilarityConfig) -> Result<SimilarityConfig, PhonosimStatus> {
    let cfg = if config.bigram {
        SimilarityConfig::bigram(config.penalty, config.vowel_weighted)
    } else {
        SimilarityConfig::unigram(config.penalty)
    };
    check(cfg.validate())?;
    Ok(cfg)
}

/// Message for the last failed call on this thread, or an empty string.
/// Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn phonosim_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

#[no_mangle]
pub extern "C" fn phonosim_similarity_config_default() -> PhonosimSimilarityConfig {
    let d = SimilarityConfig::default();
    PhonosimSimilarityConfig { bigram: true, vowel_weighted: d.vowel_weighted, penalty: d.penalty }
}

#[no_mangle]
pub extern "C" fn phonosim_train_config_default() -> PhonosimTrainConfig {
    let d = TrainConfig::default();
    PhonosimTrainConfig {
        dim: d.dim,
        epochs: d.epochs,
        pairs_per_word: d.pairs_per_word,
        batch_size: d.batch_size,
        learning_rate: d.learning_rate,
        final_learning_rate: d.final_learning_rate,
        self_pair_fraction: d.self_pair_fraction,
        seed: d.seed,
    }
}

/// Loads the bundled dictionary for `language` (`"en"` or `"hi"`).
///
/// # Safety
/// `language` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn phonosim_lexicon_load_language(
    language: *const c_char,
    out: *mut *mut PhonosimLexicon,
) -> PhonosimStatus {
    guard(|| {
        let language: Language = check(text(language, "language")?.parse())?;
        let lexicon = check(language.load_lexicon())?;
        write(out, Box::into_raw(Box::new(PhonosimLexicon(lexicon))))
    })
}

/// Loads a feature table and a dictionary from disk. `cmu_layout` selects the
/// CMU dictionary layout; otherwise one `word<TAB>phones` entry per line.
///
/// # Safety
/// String arguments must be NUL-terminated and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn phonosim_lexicon_load(
    feature_table: *const c_char,
    dictionary: *const c_char,
    language: *const c_char,
    cmu_layout: bool,
    out: *mut *mut PhonosimLexicon,
) -> PhonosimStatus {
    guard(|| {
        let table = PathBuf::from(text(feature_table, "feature table path")?);
        let dictionary = PathBuf::from(text(dictionary, "dictionary path")?);
        let inventory = Arc::new(check(Inventory::load(table, text(language, "language")?))?);
        let lexicon = if cmu_layout {
            Lexicon::load_cmu(dictionary, inventory, ParseOptions::default())
        } else {
            Lexicon::load_plain(dictionary, inventory, ParseOptions::default())
        };
        write(out, Box::into_raw(Box::new(PhonosimLexicon(check(lexicon)?))))
    })
}

/// # Safety
/// `lexicon` must come from a `phonosim_lexicon_load*` call, or be null.
#[no_mangle]
pub unsafe extern "C" fn phonosim_lexicon_free(lexicon: *mut PhonosimLexicon) {
    if !lexicon.is_null() {
        drop(Box::from_raw(lexicon));
    }
}

/// Number of headwords, or 0 for a null handle.
///
/// # Safety
/// `lexicon` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn phonosim_lexicon_len(lexicon: *const PhonosimLexicon) -> usize {
    lexicon.as_ref().map_or(0, |l| l.0.len())
}

/// Similarity of the first pronunciations of two headwords.
///
/// # Safety
/// Handles and strings must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn phonosim_word_similarity(
    lexicon: *const PhonosimLexicon,
    a: *const c_char,
    b: *const c_char,
    config: *const PhonosimSimilarityConfig,
    out: *mut f64,
) -> PhonosimStatus {
    guard(|| {
        let lex = &deref(lexicon, "lexicon")?.0;
        let cfg = similarity_config(deref(config, "config")?)?;
        let first = |word: &str| {
            lex.lookup(word)
                .first()
                .ok_or_else(|| fail(PhonosimStatus::UnknownWord, format!("unknown word {word:?}")))
        };
        let (pa, pb) = (first(text(a, "first word")?)?, first(text(b, "second word")?)?);
        write(out, check(word_similarity(pa, pb, &cfg, lex.inventory()))?)
    })
}

/// Similarity of two space-separated phoneme strings, e.g. `"K AE1 T"`.
/// Stress digits are dropped from symbols the inventory does not know.
///
/// # Safety
/// Handles and strings must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn phonosim_phones_similarity(
    lexicon: *const PhonosimLexicon,
    a: *const c_char,
    b: *const c_char,
    config: *const PhonosimSimilarityConfig,
    out: *mut f64,
) -> PhonosimStatus {
    guard(|| {
        let inv = deref(lexicon, "lexicon")?.0.inventory();
        let cfg = similarity_config(deref(config, "config")?)?;
        let pa = pronunciation(text(a, "first pronunciation")?, inv)?;
        let pb = pronunciation(text(b, "second pronunciation")?, inv)?;
        write(out, check(word_similarity(&pa, &pb, &cfg, inv))?)
    })
}

/// Trains an embedding over every headword of `lexicon`.
///
/// # Safety
/// Handles and config pointers must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn phonosim_embedding_train(
    lexicon: *const PhonosimLexicon,
    similarity: *const PhonosimSimilarityConfig,
    train: *const PhonosimTrainConfig,
    out: *mut *mut PhonosimEmbedding,
) -> PhonosimStatus {
    guard(|| {
        let lex = &deref(lexicon, "lexicon")?.0;
        let sim = similarity_config(deref(similarity, "similarity config")?)?;
        let t = deref(train, "train config")?;
        let cfg = TrainConfig {
            dim: t.dim,
            epochs: t.epochs,
            pairs_per_word: t.pairs_per_word,
            batch_size: t.batch_size,
            learning_rate: t.learning_rate,
            final_learning_rate: t.final_learning_rate,
            self_pair_fraction: t.self_pair_fraction,
            seed: t.seed,
        };
        let emb = check(embedding::train(lex, &sim, &cfg))?;
        write(out, Box::into_raw(Box::new(PhonosimEmbedding(emb))))
    })
}

/// # Safety
/// `path` must be NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn phonosim_embedding_load(path: *const c_char, out: *mut *mut PhonosimEmbedding) -> PhonosimStatus {
    guard(|| {
        let emb = check(EmbeddingMatrix::load(text(path, "path")?))?;
        write(out, Box::into_raw(Box::new(PhonosimEmbedding(emb))))
    })
}

/// # Safety
/// `embedding` must be a live handle; `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn phonosim_embedding_save(embedding: *const PhonosimEmbedding, path: *const c_char) -> PhonosimStatus {
    guard(|| {
        let emb = &deref(embedding, "embedding")?.0;
        check(emb.save(text(path, "path")?))
    })
}

/// # Safety
/// `embedding` must come from this library, or be null.
#[no_mangle]
pub unsafe extern "C" fn phonosim_embedding_free(embedding: *mut PhonosimEmbedding) {
    if !embedding.is_null() {
        drop(Box::from_raw(embedding));
    }
}

/// # Safety
/// `embedding` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn phonosim_embedding_len(embedding: *const PhonosimEmbedding) -> usize {
    embedding.as_ref().map_or(0, |e| e.0.len())
}

/// # Safety
/// `embedding` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn phonosim_embedding_dim(embedding: *const PhonosimEmbedding) -> usize {
    embedding.as_ref().map_or(0, |e| e.0.dim())
}

/// Copies the vector of `word` into `buffer`, which holds `capacity` doubles.
/// Fails with `BUFFER_TOO_SMALL` when `capacity` is below the dimension.
///
/// # Safety
/// `buffer` must be writable for `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn phonosim_embedding_vector(
    embedding: *const PhonosimEmbedding,
    word: *const c_char,
    buffer: *mut f64,
    capacity: usize,
) -> PhonosimStatus {
    guard(|| {
        let emb = &deref(embedding, "embedding")?.0;
        let word = text(word, "word")?;
        let v = emb
            .vector(word)
            .ok_or_else(|| fail(PhonosimStatus::UnknownWord, format!("unknown word {word:?}")))?;
        if capacity < v.len() {
            return Err(fail(
                PhonosimStatus::BufferTooSmall,
                format!("buffer holds {capacity} values, need {}", v.len()),
            ));
        }
        if buffer.is_null() {
            return Err(fail(PhonosimStatus::NullArgument, "buffer is null"));
        }
        std::ptr::copy_nonoverlapping(v.as_ptr(), buffer, v.len());
        Ok(())
    })
}

/// # Safety
/// Handles and strings must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn phonosim_embedding_cosine(
    embedding: *const PhonosimEmbedding,
    a: *const c_char,
    b: *const c_char,
    out: *mut f64,
) -> PhonosimStatus {
    guard(|| {
        let emb = &deref(embedding, "embedding")?.0;
        write(out, check(emb.cosine_words(text(a, "first word")?, text(b, "second word")?))?)
    })
}
