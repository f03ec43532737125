//! Phonetic word similarity and phonetic word embeddings.
//!
//! Words are compared by aligning their phoneme (or phoneme-bigram)
//! sequences, scoring each aligned pair by the Jaccard index of their
//! articulatory feature sets. The resulting similarity can be used directly
//! or distilled into dense vectors.
//!
//! ```no_run
//! use phonosim::{data::Language, similarity::{word_similarity, SimilarityConfig}};
//!
//! let lexicon = Language::English.load_lexicon().unwrap();
//! let a = &lexicon.lookup("sinking")[0];
//! let b = &lexicon.lookup("thinking")[0];
//! let score = word_similarity(a, b, &SimilarityConfig::default(), lexicon.inventory()).unwrap();
//! println!("{score:.4}");
//! ```

pub mod data;
pub mod embedding;
pub mod error;
pub mod evaluation;
pub mod inventory;
pub mod lexicon;
pub mod manifest;
pub mod similarity;

pub use error::{Error, Result};
