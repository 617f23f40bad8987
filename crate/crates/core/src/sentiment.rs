//! Five-class sentiment labels, the Concern Index and the two-proportion
//! significance test comparing fake and real posts.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Corpus;

#[derive(Debug, Error)]
pub enum SentimentError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("lexicon line {line}: expected `word<TAB>integer`")]
    MalformedLexicon { line: usize },
    #[error("row {row}: unknown sentiment class `{value}`")]
    UnknownLabel { row: usize, value: String },
    #[error("duplicate label for id `{0}`")]
    DuplicateId(String),
    #[error("no sentiment label for {} post(s): {}", .0.len(), .0.join(", "))]
    MissingLabels(Vec<String>),
    #[error("{0} news has no non-neutral posts (T = 0)")]
    EmptyClass(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SentimentLabel {
    VeryNegative,
    Negative,
    Neutral,
    Positive,
    VeryPositive,
}

impl SentimentLabel {
    pub const ALL: [SentimentLabel; 5] = [
        SentimentLabel::VeryNegative,
        SentimentLabel::Negative,
        SentimentLabel::Neutral,
        SentimentLabel::Positive,
        SentimentLabel::VeryPositive,
    ];

    /// Numeric code used as a behavioral feature: 0, 2 or 4.
    pub fn code(self) -> u8 {
        match self {
            SentimentLabel::VeryNegative | SentimentLabel::Negative => 0,
            SentimentLabel::Neutral => 2,
            SentimentLabel::Positive | SentimentLabel::VeryPositive => 4,
        }
    }

    /// Maps a summed lexicon score onto a class.
    pub fn from_score(score: i64) -> Self {
        match score {
            s if s <= -4 => SentimentLabel::VeryNegative,
            s if s < 0 => SentimentLabel::Negative,
            0 => SentimentLabel::Neutral,
            s if s < 4 => SentimentLabel::Positive,
            _ => SentimentLabel::VeryPositive,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SentimentLabel::VeryNegative => "Very Negative",
            SentimentLabel::Negative => "Negative",
            SentimentLabel::Neutral => "Neutral",
            SentimentLabel::Positive => "Positive",
            SentimentLabel::VeryPositive => "Very Positive",
        }
    }
}

impl fmt::Display for SentimentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SentimentLabel {
    type Err = String;

    /// Accepts the class names case-insensitively, with or without the
    /// space (`Very Negative`, `very_negative`, `VeryNegative`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .chars()
            .filter(|c| !matches!(c, ' ' | '_' | '-'))
            .flat_map(char::to_lowercase)
            .collect();
        match key.as_str() {
            "verynegative" => Ok(SentimentLabel::VeryNegative),
            "negative" => Ok(SentimentLabel::Negative),
            "neutral" => Ok(SentimentLabel::Neutral),
            "positive" => Ok(SentimentLabel::Positive),
            "verypositive" => Ok(SentimentLabel::VeryPositive),
            _ => Err(s.to_string()),
        }
    }
}

/// Something that assigns a sentiment class to a post.
pub trait SentimentBackend: Sync {
    fn classify(&self, id: &str, text: &str) -> Result<SentimentLabel, SentimentError>;
}

/// Signed word list; a document scores the sum of its token weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    weights: HashMap<String, i64>,
}

const BUILTIN_LEXICON: &str = include_str!("../data/lexicon.tsv");

impl Lexicon {
    pub fn builtin() -> Self {
        Self::parse(BUILTIN_LEXICON).expect("bundled lexicon is well-formed")
    }

    pub fn load(path: &Path) -> Result<Self, SentimentError> {
        let content = std::fs::read_to_string(path).map_err(|source| SentimentError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&content)
    }

    /// `word<TAB>weight` per line; blank lines are skipped.
    pub fn parse(content: &str) -> Result<Self, SentimentError> {
        let mut weights = HashMap::new();
        for (i, line) in content.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let bad = || SentimentError::MalformedLexicon { line: i + 1 };
            let (word, weight) = line.split_once('\t').ok_or_else(bad)?;
            let weight: i64 = weight.trim().parse().map_err(|_| bad())?;
            let word = word.trim().to_lowercase();
            if word.is_empty() {
                return Err(bad());
            }
            weights.insert(word, weight);
        }
        Ok(Lexicon { weights })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weight(&self, word: &str) -> i64 {
        self.weights.get(word).copied().unwrap_or(0)
    }

    pub fn score(&self, text: &str) -> i64 {
        lexicon_tokens(text).map(|t| self.weight(&t)).sum()
    }
}

/// Lowercased runs of letters, digits and apostrophes.
fn lexicon_tokens(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !(c.is_alphanumeric() || c == '\''))
        .filter(|t| !t.is_empty())
        .map(|t| t.trim_matches('\'').to_lowercase())
        .filter(|t| !t.is_empty())
}

impl SentimentBackend for Lexicon {
    fn classify(&self, _id: &str, text: &str) -> Result<SentimentLabel, SentimentError> {
        Ok(SentimentLabel::from_score(self.score(text)))
    }
}

/// Pre-computed labels keyed by post id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExternalLabels {
    pub labels: BTreeMap<String, SentimentLabel>,
}

impl SentimentBackend for ExternalLabels {
    fn classify(&self, id: &str, _text: &str) -> Result<SentimentLabel, SentimentError> {
        self.labels
            .get(id)
            .copied()
            .ok_or_else(|| SentimentError::MissingLabels(vec![id.to_string()]))
    }
}

pub fn classify_sentiment(
    id: &str,
    text: &str,
    backend: &dyn SentimentBackend,
) -> Result<SentimentLabel, SentimentError> {
    backend.classify(id, text)
}

/// Labels every post; missing external labels are reported together.
pub fn classify_corpus(
    corpus: &Corpus,
    backend: &dyn SentimentBackend,
) -> Result<Vec<SentimentLabel>, SentimentError> {
    let mut labels = Vec::with_capacity(corpus.len());
    let mut missing = Vec::new();
    for post in corpus.posts() {
        match backend.classify(&post.id, &post.text) {
            Ok(l) => labels.push(l),
            Err(SentimentError::MissingLabels(ids)) => missing.extend(ids),
            Err(e) => return Err(e),
        }
    }
    if missing.is_empty() {
        Ok(labels)
    } else {
        Err(SentimentError::MissingLabels(missing))
    }
}

/// Reads a CSV with header `id,label`.
pub fn load_external_labels(path: &Path) -> Result<ExternalLabels, SentimentError> {
    let content = std::fs::read_to_string(path).map_err(|source| SentimentError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_external_labels(&content)
}

pub fn parse_external_labels(content: &str) -> Result<ExternalLabels, SentimentError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(content.as_bytes());
    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim().eq_ignore_ascii_case(name))
    };
    let id_col = col("id").unwrap_or(0);
    let label_col = col("label").unwrap_or(1);
    let mut labels = BTreeMap::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 1;
        let id = record.get(id_col).unwrap_or("").trim().to_string();
        let raw = record.get(label_col).unwrap_or("");
        let label = raw.parse().map_err(|_| SentimentError::UnknownLabel {
            row,
            value: raw.to_string(),
        })?;
        if labels.insert(id.clone(), label).is_some() {
            return Err(SentimentError::DuplicateId(id));
        }
    }
    Ok(ExternalLabels { labels })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentimentDistribution {
    pub very_negative: u64,
    pub negative: u64,
    pub neutral: u64,
    pub positive: u64,
    pub very_positive: u64,
}

impl SentimentDistribution {
    pub fn new(counts: [u64; 5]) -> Self {
        let [very_negative, negative, neutral, positive, very_positive] = counts;
        SentimentDistribution {
            very_negative,
            negative,
            neutral,
            positive,
            very_positive,
        }
    }

    pub fn from_labels<'a>(labels: impl IntoIterator<Item = &'a SentimentLabel>) -> Self {
        let mut d = Self::default();
        for &l in labels {
            d.add(l);
        }
        d
    }

    pub fn add(&mut self, label: SentimentLabel) {
        *self.slot(label) += 1;
    }

    fn slot(&mut self, label: SentimentLabel) -> &mut u64 {
        match label {
            SentimentLabel::VeryNegative => &mut self.very_negative,
            SentimentLabel::Negative => &mut self.negative,
            SentimentLabel::Neutral => &mut self.neutral,
            SentimentLabel::Positive => &mut self.positive,
            SentimentLabel::VeryPositive => &mut self.very_positive,
        }
    }

    pub fn get(&self, label: SentimentLabel) -> u64 {
        match label {
            SentimentLabel::VeryNegative => self.very_negative,
            SentimentLabel::Negative => self.negative,
            SentimentLabel::Neutral => self.neutral,
            SentimentLabel::Positive => self.positive,
            SentimentLabel::VeryPositive => self.very_positive,
        }
    }

    /// Very negative + negative.
    pub fn negatives(&self) -> u64 {
        self.very_negative + self.negative
    }

    /// Positive + very positive.
    pub fn positives(&self) -> u64 {
        self.positive + self.very_positive
    }

    pub fn total(&self) -> u64 {
        SentimentLabel::ALL.iter().map(|&l| self.get(l)).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcernReport {
    pub n: u64,
    pub p: u64,
    pub concern_index: f64,
}

/// N / (N + P + 1), neutral posts excluded.
pub fn concern_index(dist: &SentimentDistribution) -> ConcernReport {
    let n = dist.negatives();
    let p = dist.positives();
    ConcernReport {
        n,
        p,
        concern_index: n as f64 / (n + p + 1) as f64,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rounding {
    #[default]
    FullPrecision,
    /// Rounds the proportions to two decimals and the standard error to
    /// five before forming the ratio, as in the published arithmetic.
    TwoDecimal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignificanceResult {
    pub rounding: Rounding,
    pub n_f: u64,
    pub t_f: u64,
    pub n_r: u64,
    pub t_r: u64,
    pub c_f: f64,
    pub c_r: f64,
    pub c_t: f64,
    pub std_diff: f64,
    pub z_score: f64,
    pub p_value: f64,
}

fn round_to(x: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    (x * scale).round() / scale
}

/// Two-tailed standard-normal tail mass beyond |z|.
pub fn two_tailed_p(z: f64) -> f64 {
    libm::erfc(z.abs() / std::f64::consts::SQRT_2)
}

/// Pooled two-proportion z-test on the negative share of non-neutral posts
/// (here without the +1 of the Concern Index denominator).
pub fn concern_significance(
    fake: &SentimentDistribution,
    real: &SentimentDistribution,
    rounding: Rounding,
) -> Result<SignificanceResult, SentimentError> {
    let (n_f, n_r) = (fake.negatives(), real.negatives());
    let t_f = n_f + fake.positives();
    let t_r = n_r + real.positives();
    if t_f == 0 {
        return Err(SentimentError::EmptyClass("fake"));
    }
    if t_r == 0 {
        return Err(SentimentError::EmptyClass("real"));
    }
    let mut c_f = n_f as f64 / t_f as f64;
    let mut c_r = n_r as f64 / t_r as f64;
    let mut c_t = (n_f + n_r) as f64 / (t_f + t_r) as f64;
    if rounding == Rounding::TwoDecimal {
        c_f = round_to(c_f, 2);
        c_r = round_to(c_r, 2);
        c_t = round_to(c_t, 2);
    }
    let pooled = c_t * (1.0 - c_t);
    let mut std_diff = (pooled / t_f as f64 + pooled / t_r as f64).sqrt();
    if rounding == Rounding::TwoDecimal {
        std_diff = round_to(std_diff, 5);
    }
    let diff = (c_f - c_r).abs();
    let z_score = if diff == 0.0 { 0.0 } else { diff / std_diff };
    Ok(SignificanceResult {
        rounding,
        n_f,
        t_f,
        n_r,
        t_r,
        c_f,
        c_r,
        c_t,
        std_diff,
        z_score,
        p_value: two_tailed_p(z_score),
    })
}
