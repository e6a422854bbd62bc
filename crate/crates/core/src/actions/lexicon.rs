//! Offline synonym/hypernym lexicon backing the dictionary operator (a1).

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

/// Lexicon shipped with the crate; covers every noun the scene generator uses.
pub const BUILTIN_LEXICON: &str = include_str!("../../data/lexicon.tsv");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub token: String,
    pub visual: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LexiconEntry {
    pub synonyms: Vec<Candidate>,
    pub hypernyms: Vec<Candidate>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Lexicon {
    entries: BTreeMap<String, LexiconEntry>,
}

fn split_list(field: &str) -> Vec<String> {
    field
        .split('|')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_lowercase)
        .collect()
}

impl Lexicon {
    pub fn builtin() -> Self {
        Self::parse(BUILTIN_LEXICON, Path::new("<builtin lexicon>")).expect("builtin lexicon parses")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Parses `term<TAB>synonyms<TAB>hypernyms<TAB>visual_flags` lines. Lists
    /// are `|`-separated; the flags align with synonyms followed by hypernyms.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let err = |msg: String| Error::Parse {
                path: origin.to_path_buf(),
                line: idx + 1,
                msg,
            };
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 4 {
                return Err(err(format!("expected 4 tab-separated columns, found {}", cols.len())));
            }
            let term = cols[0].trim().to_lowercase();
            if term.is_empty() {
                return Err(err("empty term".into()));
            }
            let syn = split_list(cols[1]);
            let hyp = split_list(cols[2]);
            let flags = split_list(cols[3]);
            if flags.len() != syn.len() + hyp.len() {
                return Err(err(format!(
                    "{} visual flags for {} candidates",
                    flags.len(),
                    syn.len() + hyp.len()
                )));
            }
            let mut flags = flags.into_iter().map(|f| match f.as_str() {
                "1" => Ok(true),
                "0" => Ok(false),
                other => Err(err(format!("visual flag must be 0 or 1, got {other:?}"))),
            });
            let mut take = |tokens: Vec<String>| -> Result<Vec<Candidate>> {
                tokens
                    .into_iter()
                    .map(|token| {
                        let visual = flags.next().expect("flag count checked")?;
                        Ok(Candidate { token, visual })
                    })
                    .collect()
            };
            let synonyms = take(syn)?;
            let hypernyms = take(hyp)?;
            entries.insert(term, LexiconEntry { synonyms, hypernyms });
        }
        Ok(Lexicon { entries })
    }

    pub fn get(&self, term: &str) -> Option<&LexiconEntry> {
        self.entries.get(&term.trim().to_lowercase())
    }

    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Lexicographically smallest visual candidate different from `noun`.
    pub fn visual_alias(&self, noun: &str) -> Option<&str> {
        let noun = noun.trim().to_lowercase();
        let entry = self.entries.get(&noun)?;
        entry
            .synonyms
            .iter()
            .chain(&entry.hypernyms)
            .filter(|c| c.visual && c.token != noun)
            .map(|c| c.token.as_str())
            .min()
    }
}
