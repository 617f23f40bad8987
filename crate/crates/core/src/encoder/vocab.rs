use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::EncoderError;
use crate::features::BehavioralFeatures;

pub const PAD_ID: u32 = 0;
pub const UNK_ID: u32 = 100;
pub const BOS_ID: u32 = 101;
pub const EOS_ID: u32 = 102;
pub const FIRST_CONTENT_ID: u32 = 103;
/// Content ids stay below this bound; feature ids start here.
pub const FEATURE_BASE: u32 = 31_000;
pub const FEATURE_BAND: u32 = 1_000;
pub const FEATURE_SLOTS: usize = 5;
pub const MAX_CONTENT_TOKENS: usize = 128;
/// Largest number of content tokens a vocabulary may hold.
pub const MAX_VOCAB_TOKENS: usize = (FEATURE_BASE - FIRST_CONTENT_ID) as usize - 1;

/// Lowercased runs of letters/digits, plus each `#` and `@` as its own token.
pub fn word_tokens(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for c in text.chars() {
        if c.is_alphanumeric() {
            current.extend(c.to_lowercase());
            continue;
        }
        if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
        if c == '#' || c == '@' {
            tokens.push(c.to_string());
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    ids: BTreeMap<String, u32>,
}

impl Vocabulary {
    /// Counts tokens over `texts`; tokens seen at least `min_freq` times get
    /// ids from 103 upwards by descending frequency, ties alphabetical.
    pub fn build<'a>(
        texts: impl IntoIterator<Item = &'a str>,
        min_freq: usize,
    ) -> Result<Self, EncoderError> {
        let mut counts: HashMap<String, usize> = HashMap::new();
        for text in texts {
            for tok in word_tokens(text) {
                *counts.entry(tok).or_insert(0) += 1;
            }
        }
        let mut kept: Vec<(String, usize)> = counts
            .into_iter()
            .filter(|&(_, c)| c >= min_freq.max(1))
            .collect();
        if kept.len() > MAX_VOCAB_TOKENS {
            return Err(EncoderError::VocabularyOverflow {
                tokens: kept.len(),
                limit: MAX_VOCAB_TOKENS,
            });
        }
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let ids = kept
            .into_iter()
            .enumerate()
            .map(|(i, (tok, _))| (tok, FIRST_CONTENT_ID + i as u32))
            .collect();
        Ok(Vocabulary { ids })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Id of `token`, or UNK.
    pub fn id(&self, token: &str) -> u32 {
        self.ids.get(token).copied().unwrap_or(UNK_ID)
    }

    /// One past the largest content id.
    pub fn content_bound(&self) -> u32 {
        FIRST_CONTENT_ID + self.ids.len() as u32
    }

    /// `token<TAB>id` lines in id order.
    pub fn export_tsv(&self) -> String {
        let mut pairs: Vec<_> = self.ids.iter().collect();
        pairs.sort_by_key(|(_, &id)| id);
        let mut out = String::new();
        for (tok, id) in pairs {
            let _ = writeln!(out, "{tok}\t{id}");
        }
        out
    }
}

/// `[BOS, content..., (feature block), EOS]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenSequence {
    pub ids: Vec<u32>,
}

impl TokenSequence {
    pub fn has_features(&self) -> bool {
        self.ids.iter().any(|&id| id >= FEATURE_BASE)
    }

    /// Ids between the markers, excluding any feature block.
    pub fn content(&self) -> &[u32] {
        let inner = &self.ids[1..self.ids.len().saturating_sub(1).max(1)];
        let end = inner
            .iter()
            .position(|&id| id >= FEATURE_BASE)
            .unwrap_or(inner.len());
        &inner[..end]
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

pub fn tokenize(text: &str, vocab: &Vocabulary) -> TokenSequence {
    let mut ids = Vec::with_capacity(MAX_CONTENT_TOKENS + 2);
    ids.push(BOS_ID);
    ids.extend(
        word_tokens(text)
            .iter()
            .take(MAX_CONTENT_TOKENS)
            .map(|t| vocab.id(t)),
    );
    ids.push(EOS_ID);
    TokenSequence { ids }
}

/// Offset-encoded ids for the five behavioral features, each clamped to its
/// band of 1000: sentiment 31xxx, words 32xxx, chars 33xxx, hashtags 34xxx,
/// mentions 35xxx.
pub fn feature_token_ids(feats: &BehavioralFeatures) -> [u32; FEATURE_SLOTS] {
    let values = [
        feats.sentiment_code as usize,
        feats.word_count,
        feats.char_count,
        feats.hashtag_count,
        feats.mention_count,
    ];
    let mut ids = [0u32; FEATURE_SLOTS];
    for (slot, (id, v)) in ids.iter_mut().zip(values).enumerate() {
        let clamped = v.min((FEATURE_BAND - 1) as usize) as u32;
        *id = FEATURE_BASE + slot as u32 * FEATURE_BAND + clamped;
    }
    ids
}

/// Inserts the feature block immediately before the closing EOS.
pub fn inject_features(
    seq: &TokenSequence,
    feats: &BehavioralFeatures,
) -> Result<TokenSequence, EncoderError> {
    if seq.has_features() {
        return Err(EncoderError::AlreadyInjected);
    }
    if seq.ids.len() < 2 || seq.ids[0] != BOS_ID || seq.ids[seq.ids.len() - 1] != EOS_ID {
        return Err(EncoderError::MalformedSequence);
    }
    let mut ids = seq.ids.clone();
    let eos = ids.pop().expect("checked length");
    ids.extend_from_slice(&feature_token_ids(feats));
    ids.push(eos);
    Ok(TokenSequence { ids })
}
