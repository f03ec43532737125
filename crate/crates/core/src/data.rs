//! Locations of the bundled feature tables and lexicons.
//!
//! The data directory defaults to the one shipped with the crate and can be
//! moved with the `PHONOSIM_DATA_DIR` environment variable.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::inventory::Inventory;
use crate::lexicon::{Lexicon, ParseOptions};

pub const DATA_DIR_ENV: &str = "PHONOSIM_DATA_DIR";

pub fn data_dir() -> PathBuf {
    std::env::var_os(DATA_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/data")))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LexiconLayout {
    Cmu,
    Plain,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Language {
    English,
    Hindi,
}

impl Language {
    pub fn code(self) -> &'static str {
        match self {
            Language::English => "en",
            Language::Hindi => "hi",
        }
    }

    pub fn feature_table(self) -> PathBuf {
        data_dir().join(self.code()).join("features.txt")
    }

    pub fn default_lexicon(self) -> PathBuf {
        let name = match self {
            Language::English => "cmudict-0.7b.txt",
            Language::Hindi => "lexicon-sample.tsv",
        };
        data_dir().join(self.code()).join(name)
    }

    pub fn lexicon_layout(self) -> LexiconLayout {
        match self {
            Language::English => LexiconLayout::Cmu,
            Language::Hindi => LexiconLayout::Plain,
        }
    }

    pub fn load_inventory(self) -> Result<Arc<Inventory>> {
        Inventory::load(self.feature_table(), self.code()).map(Arc::new)
    }

    pub fn load_lexicon(self) -> Result<Lexicon> {
        let inventory = self.load_inventory()?;
        let path = self.default_lexicon();
        match self.lexicon_layout() {
            LexiconLayout::Cmu => Lexicon::load_cmu(path, inventory, ParseOptions::default()),
            LexiconLayout::Plain => Lexicon::load_plain(path, inventory, ParseOptions::default()),
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Language {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "en" => Ok(Language::English),
            "hi" => Ok(Language::Hindi),
            other => Err(Error::InvalidConfig(format!("unknown language {other:?}"))),
        }
    }
}
