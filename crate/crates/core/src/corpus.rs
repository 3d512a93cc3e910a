//! Sentence-length profiles of plain-text corpora.
//!
//! A sentence of `l` words is the observation `e_l`; a corpus becomes the
//! histogram of its sentence lengths, with lengths above `k` clipped into the
//! last bucket. Sentences end at a terminator (`.`, `!`, `?`, `…` by default)
//! that is followed by whitespace or the end of input; text after the last
//! terminator forms a final sentence. A word is a maximal run of
//! non-whitespace characters containing at least one alphanumeric character.
//! Abbreviations are not special-cased.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simplex::{rebin_groups, Policy, ProbVector};

/// Bucket count used when none is given.
pub const DEFAULT_K: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizationRules {
    pub terminators: Vec<char>,
}

impl Default for TokenizationRules {
    fn default() -> Self {
        Self {
            terminators: vec!['.', '!', '?', '\u{2026}'],
        }
    }
}

/// Sentence-length histogram. `counts[j]` holds sentences of `j + 1` words
/// (the last bucket also holds everything longer).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ProfileRepr")]
pub struct CorpusProfile {
    pub name: String,
    pub k: usize,
    pub counts: Vec<u64>,
    pub total_sentences: u64,
}

#[derive(Deserialize)]
struct ProfileRepr {
    name: String,
    k: usize,
    counts: Vec<u64>,
    total_sentences: u64,
}

impl TryFrom<ProfileRepr> for CorpusProfile {
    type Error = Error;

    fn try_from(r: ProfileRepr) -> Result<Self> {
        if r.k == 0 || r.counts.len() != r.k {
            return Err(Error::field(
                "counts",
                format!("expected {} buckets, got {}", r.k, r.counts.len()),
            ));
        }
        if r.counts.iter().sum::<u64>() != r.total_sentences {
            return Err(Error::field(
                "total_sentences",
                "does not equal the sum of counts",
            ));
        }
        Ok(CorpusProfile {
            name: r.name,
            k: r.k,
            counts: r.counts,
            total_sentences: r.total_sentences,
        })
    }
}

impl CorpusProfile {
    pub fn empty(name: impl Into<String>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::field("k", "must be at least 1"));
        }
        Ok(Self {
            name: name.into(),
            k,
            counts: vec![0; k],
            total_sentences: 0,
        })
    }

    /// Record a sentence of `words` words (`words >= 1`).
    pub fn record(&mut self, words: usize) {
        debug_assert!(words >= 1);
        self.counts[words.min(self.k) - 1] += 1;
        self.total_sentences += 1;
    }

    /// Count-wise addition; associative and commutative.
    pub fn merge(&mut self, other: &CorpusProfile) -> Result<()> {
        if other.k != self.k {
            return Err(Error::DimensionMismatch {
                left: self.k,
                right: other.k,
            });
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.total_sentences += other.total_sentences;
        Ok(())
    }

    /// The same histogram with adjacent buckets merged into `new_k` groups.
    pub fn rebinned(&self, new_k: usize) -> Result<Self> {
        let counts = rebin_groups(self.k, new_k)?
            .into_iter()
            .map(|r| self.counts[r].iter().sum())
            .collect();
        Ok(Self {
            name: self.name.clone(),
            k: new_k,
            counts,
            total_sentences: self.total_sentences,
        })
    }
}

/// Normalized counts.
pub fn profile_to_reference(p: &CorpusProfile) -> Result<ProbVector> {
    if p.total_sentences == 0 {
        return Err(Error::EmptyCorpus);
    }
    ProbVector::new(
        p.counts.iter().map(|&c| c as f64).collect(),
        Policy::Normalize,
    )
}

/// Outcome of [`ingest`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ingested {
    pub profile: CorpusProfile,
    /// Bytes that were not valid UTF-8 and were read as U+FFFD.
    pub invalid_bytes: u64,
}

struct Tokenizer<'a> {
    rules: &'a TokenizationRules,
    profile: CorpusProfile,
    in_token: bool,
    token_has_alnum: bool,
    words: usize,
    after_terminator: bool,
}

impl Tokenizer<'_> {
    fn feed(&mut self, c: char) {
        if c.is_whitespace() {
            self.end_token();
            if self.after_terminator {
                self.end_sentence();
            }
            self.after_terminator = false;
            return;
        }
        self.in_token = true;
        self.token_has_alnum |= c.is_alphanumeric();
        self.after_terminator = self.rules.terminators.contains(&c);
    }

    fn end_token(&mut self) {
        if self.in_token && self.token_has_alnum {
            self.words += 1;
        }
        self.in_token = false;
        self.token_has_alnum = false;
    }

    fn end_sentence(&mut self) {
        if self.words > 0 {
            self.profile.record(self.words);
        }
        self.words = 0;
    }

    fn finish(mut self) -> CorpusProfile {
        self.end_token();
        self.end_sentence();
        self.profile
    }
}

const CHUNK: usize = 64 * 1024;

/// Build a profile from a byte stream, reading it in fixed-size chunks.
pub fn ingest<R: Read>(
    mut input: R,
    name: &str,
    k: usize,
    rules: &TokenizationRules,
) -> Result<Ingested> {
    let mut tok = Tokenizer {
        rules,
        profile: CorpusProfile::empty(name, k)?,
        in_token: false,
        token_has_alnum: false,
        words: 0,
        after_terminator: false,
    };
    let mut invalid_bytes = 0u64;
    let mut buf = vec![0u8; CHUNK];
    // Bytes of a UTF-8 sequence split across chunk boundaries.
    let mut carry = 0usize;
    loop {
        let read = input.read(&mut buf[carry..])?;
        let eof = read == 0;
        let mut data = &buf[..carry + read];
        loop {
            match std::str::from_utf8(data) {
                Ok(s) => {
                    s.chars().for_each(|c| tok.feed(c));
                    data = &[];
                    break;
                }
                Err(e) => {
                    let (valid, rest) = data.split_at(e.valid_up_to());
                    std::str::from_utf8(valid)
                        .expect("prefix is valid")
                        .chars()
                        .for_each(|c| tok.feed(c));
                    match e.error_len() {
                        Some(len) => {
                            invalid_bytes += len as u64;
                            tok.feed('\u{FFFD}');
                            data = &rest[len..];
                        }
                        None if eof => {
                            invalid_bytes += rest.len() as u64;
                            tok.feed('\u{FFFD}');
                            data = &[];
                            break;
                        }
                        None => {
                            data = rest;
                            break;
                        }
                    }
                }
            }
        }
        let leftover = data.len();
        let start = carry + read - leftover;
        buf.copy_within(start..start + leftover, 0);
        carry = leftover;
        if eof {
            break;
        }
    }
    let profile = tok.finish();
    if profile.total_sentences == 0 {
        return Err(Error::EmptyCorpus);
    }
    Ok(Ingested {
        profile,
        invalid_bytes,
    })
}
