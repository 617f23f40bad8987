use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

const BUILTIN_STOPWORDS: &str = include_str!("../../data/stopwords.txt");

pub fn default_stopwords() -> BTreeSet<String> {
    BUILTIN_STOPWORDS
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stemmer {
    #[default]
    RuleBasedSuffix,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessConfig {
    pub stopwords: BTreeSet<String>,
    pub min_len: usize,
    pub stemmer: Stemmer,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            stopwords: default_stopwords(),
            min_len: 2,
            stemmer: Stemmer::RuleBasedSuffix,
        }
    }
}

/// Suffix rules, tried in order; the first matching suffix is the only one
/// considered.
const RULES: &[(&str, &str)] = &[
    ("sses", "ss"),
    ("ies", "y"),
    ("ing", ""),
    ("ed", ""),
    ("ly", ""),
    ("es", ""),
    ("s", ""),
];
const MIN_STEM: usize = 3;

/// Strips one inflectional suffix, keeping at least three letters of stem.
pub fn stem(word: &str) -> String {
    for &(suffix, replacement) in RULES {
        let Some(base) = word.strip_suffix(suffix) else {
            continue;
        };
        if suffix == "s" && (base.ends_with('s') || base.ends_with('u') || base.ends_with('i')) {
            return word.to_string();
        }
        if base.chars().count() < MIN_STEM {
            return word.to_string();
        }
        return format!("{base}{replacement}");
    }
    word.to_string()
}

/// Lowercases, splits on every non-letter, drops stopwords and short
/// tokens, then stems.
pub fn preprocess_topic_text(text: &str, config: &PreprocessConfig) -> Vec<String> {
    let lower = text.to_lowercase();
    lower
        .split(|c: char| !c.is_alphabetic())
        .filter(|t| !t.is_empty())
        .filter(|t| t.chars().count() >= config.min_len.max(1))
        .filter(|t| !config.stopwords.contains(*t))
        .map(|t| match config.stemmer {
            Stemmer::RuleBasedSuffix => stem(t),
            Stemmer::None => t.to_string(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pesticide_headline() {
        let toks = preprocess_topic_text(
            "India spraying pesticides at night to prevent COVID19.",
            &PreprocessConfig::default(),
        );
        assert_eq!(
            toks,
            vec!["india", "spray", "pesticid", "night", "prevent", "covid"]
        );
    }

    #[test]
    fn empty_and_stopword_only() {
        let cfg = PreprocessConfig::default();
        assert!(preprocess_topic_text("", &cfg).is_empty());
        assert!(preprocess_topic_text("THE the The", &cfg).is_empty());
    }

    #[test]
    fn stemmer_rules() {
        assert_eq!(stem("classes"), "class");
        assert_eq!(stem("stories"), "story");
        assert_eq!(stem("reported"), "report");
        assert_eq!(stem("quickly"), "quick");
        assert_eq!(stem("virus"), "virus");
        assert_eq!(stem("class"), "class");
        assert_eq!(stem("analysis"), "analysis");
        assert_eq!(stem("cases"), "cas");
        assert_eq!(stem("sing"), "sing");
        assert_eq!(stem("bed"), "bed");
    }

    #[test]
    fn unstemmed_option() {
        let cfg = PreprocessConfig {
            stemmer: Stemmer::None,
            ..PreprocessConfig::default()
        };
        assert_eq!(
            preprocess_topic_text("Masks, masks!", &cfg),
            vec!["masks", "masks"]
        );
    }
}
