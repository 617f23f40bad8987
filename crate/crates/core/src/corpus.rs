//! Labeled post corpora: loading, descriptive statistics and stratified
//! fold planning.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{extract_tags, normalize_tag, BehavioralFeatures};
use crate::rng;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("malformed JSON on line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("row {row}: missing field `{field}`")]
    MissingField { row: usize, field: String },
    #[error("row {row}: unknown label value `{value}`")]
    UnknownLabel { row: usize, value: String },
    #[error("duplicate post id `{0}`")]
    DuplicateId(String),
    #[error("{features} feature records for {posts} posts")]
    LengthMismatch { posts: usize, features: usize },
    #[error("fold count must be at least 2, got {0}")]
    InvalidFoldCount(usize),
    #[error("k = {k} exceeds the {count} posts labeled {label}")]
    TooFewPerLabel {
        k: usize,
        label: Label,
        count: usize,
    },
    #[error("post `{0}` has no fold assignment")]
    UnassignedPost(String),
    #[error("fold index {fold} out of range for k = {k}")]
    FoldOutOfRange { fold: usize, k: usize },
    #[error("test fraction must lie in (0, 1), got {0}")]
    InvalidFraction(f64),
}

/// Class label of a post. `Fake` is the positive class everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    Fake,
    Real,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::Fake, Label::Real];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Fake => "fake",
            Label::Real => "real",
        }
    }

    /// +1 for Fake, -1 for Real.
    pub fn sign(self) -> f64 {
        match self {
            Label::Fake => 1.0,
            Label::Real => -1.0,
        }
    }

    pub fn other(self) -> Label {
        match self {
            Label::Fake => Label::Real,
            Label::Real => Label::Fake,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fake" => Ok(Label::Fake),
            "real" => Ok(Label::Real),
            other => Err(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Post {
    pub id: String,
    pub text: String,
    pub label: Label,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

impl Post {
    pub fn new(id: impl Into<String>, text: impl Into<String>, label: Label) -> Self {
        Post {
            id: id.into(),
            text: text.into(),
            label,
            source: None,
        }
    }
}

/// An ordered, immutable collection of posts with unique ids.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    name: String,
    posts: Vec<Post>,
}

impl Corpus {
    pub fn new(name: impl Into<String>, posts: Vec<Post>) -> Result<Self, CorpusError> {
        let mut seen = HashSet::with_capacity(posts.len());
        for post in &posts {
            if !seen.insert(post.id.as_str()) {
                return Err(CorpusError::DuplicateId(post.id.clone()));
            }
        }
        Ok(Corpus {
            name: name.into(),
            posts,
        })
    }

    /// Builds a corpus from `(text, label)` pairs with ids `0`, `1`, ...
    pub fn from_texts<S: Into<String>>(
        name: impl Into<String>,
        items: impl IntoIterator<Item = (S, Label)>,
    ) -> Self {
        let posts = items
            .into_iter()
            .enumerate()
            .map(|(i, (text, label))| Post::new(i.to_string(), text, label))
            .collect();
        Corpus {
            name: name.into(),
            posts,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn posts(&self) -> &[Post] {
        &self.posts
    }

    pub fn len(&self) -> usize {
        self.posts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.posts.is_empty()
    }

    pub fn labels(&self) -> Vec<Label> {
        self.posts.iter().map(|p| p.label).collect()
    }

    pub fn count(&self, label: Label) -> usize {
        self.posts.iter().filter(|p| p.label == label).count()
    }

    /// Indices of posts carrying `label`, in corpus order.
    pub fn indices_of(&self, label: Label) -> Vec<usize> {
        self.posts
            .iter()
            .enumerate()
            .filter(|(_, p)| p.label == label)
            .map(|(i, _)| i)
            .collect()
    }

    /// A new corpus made of the posts at `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Corpus {
        Corpus {
            name: self.name.clone(),
            posts: indices.iter().map(|&i| self.posts[i].clone()).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Jsonl,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "jsonl" | "ndjson" => Ok(Format::Jsonl),
            other => Err(format!("unknown corpus format `{other}`")),
        }
    }
}

/// Field names and label vocabulary used when reading a corpus file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub text_field: String,
    pub label_field: String,
    /// Records without this field (or with it empty) get their zero-based
    /// row index as id.
    pub id_field: Option<String>,
    pub source_field: Option<String>,
    /// Raw label value (matched case-insensitively after trimming) to label.
    pub labels: BTreeMap<String, Label>,
}

impl Default for Schema {
    fn default() -> Self {
        Schema {
            text_field: "text".into(),
            label_field: "label".into(),
            id_field: Some("id".into()),
            source_field: None,
            labels: default_label_table(),
        }
    }
}

pub fn default_label_table() -> BTreeMap<String, Label> {
    [
        ("fake", Label::Fake),
        ("real", Label::Real),
        ("1", Label::Fake),
        ("0", Label::Real),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

impl Schema {
    fn label(&self, row: usize, raw: &str) -> Result<Label, CorpusError> {
        let key = raw.trim().to_lowercase();
        self.labels
            .get(&key)
            .copied()
            .ok_or_else(|| CorpusError::UnknownLabel {
                row,
                value: raw.to_string(),
            })
    }
}

struct RawRecord {
    id: Option<String>,
    text: String,
    label: String,
    source: Option<String>,
}

/// Reads a labeled corpus. Rows are numbered from 1 in error messages.
pub fn load_corpus(path: &Path, format: Format, schema: &Schema) -> Result<Corpus, CorpusError> {
    let content = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_corpus(&name, &content, format, schema)
}

/// Parses corpus content already held in memory.
pub fn parse_corpus(
    name: &str,
    content: &str,
    format: Format,
    schema: &Schema,
) -> Result<Corpus, CorpusError> {
    let records = match format {
        Format::Csv => read_csv(content, schema)?,
        Format::Jsonl => read_jsonl(content, schema)?,
    };
    let mut posts = Vec::with_capacity(records.len());
    for (index, rec) in records.into_iter().enumerate() {
        let row = index + 1;
        let label = schema.label(row, &rec.label)?;
        let id = match rec.id {
            Some(id) if !id.is_empty() => id,
            _ => index.to_string(),
        };
        posts.push(Post {
            id,
            text: rec.text,
            label,
            source: rec.source.filter(|s| !s.is_empty()),
        });
    }
    Corpus::new(name, posts)
}

fn read_csv(content: &str, schema: &Schema) -> Result<Vec<RawRecord>, CorpusError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(content.as_bytes());
    let headers = reader.headers()?.clone();
    let column = |name: &str| headers.iter().position(|h| h.trim() == name);
    let text_col = column(&schema.text_field).ok_or_else(|| CorpusError::MissingField {
        row: 0,
        field: schema.text_field.clone(),
    })?;
    let label_col = column(&schema.label_field).ok_or_else(|| CorpusError::MissingField {
        row: 0,
        field: schema.label_field.clone(),
    })?;
    let id_col = schema.id_field.as_deref().and_then(column);
    let source_col = schema.source_field.as_deref().and_then(column);

    let mut out = Vec::new();
    for record in reader.records() {
        let record = record?;
        let get = |col: usize| record.get(col).unwrap_or("").to_string();
        out.push(RawRecord {
            id: id_col.map(get),
            text: get(text_col),
            label: get(label_col),
            source: source_col.map(get),
        });
    }
    Ok(out)
}

fn read_jsonl(content: &str, schema: &Schema) -> Result<Vec<RawRecord>, CorpusError> {
    let scalar = |v: &serde_json::Value| -> Option<String> {
        match v {
            serde_json::Value::String(s) => Some(s.clone()),
            serde_json::Value::Number(n) => Some(n.to_string()),
            serde_json::Value::Bool(b) => Some(b.to_string()),
            _ => None,
        }
    };
    let mut out = Vec::new();
    for (line_no, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = out.len() + 1;
        let value: serde_json::Value =
            serde_json::from_str(line).map_err(|source| CorpusError::Json {
                line: line_no + 1,
                source,
            })?;
        let field = |name: &str| value.get(name).and_then(scalar);
        let text = field(&schema.text_field).ok_or_else(|| CorpusError::MissingField {
            row,
            field: schema.text_field.clone(),
        })?;
        let label = field(&schema.label_field).ok_or_else(|| CorpusError::MissingField {
            row,
            field: schema.label_field.clone(),
        })?;
        out.push(RawRecord {
            id: schema.id_field.as_deref().and_then(field),
            text,
            label,
            source: schema.source_field.as_deref().and_then(field),
        });
    }
    Ok(out)
}

/// Word count: maximal runs of non-whitespace characters.
pub fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

/// Character count: Unicode scalar values of the raw text, spaces included.
pub fn char_count(text: &str) -> usize {
    text.chars().count()
}

/// Aggregates for the posts of one label.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LabelStats {
    pub posts: usize,
    pub mean_words: f64,
    pub mean_chars: f64,
    /// Set when there are no posts and the means are reported as 0.
    pub empty: bool,
    pub hashtag_total: usize,
    pub hashtag_unique: usize,
    pub mention_total: usize,
    pub mention_unique: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub total_posts: usize,
    pub fake: LabelStats,
    pub real: LabelStats,
    pub rows_with_hashtags: usize,
    pub rows_with_mentions: usize,
    pub rows_with_both: usize,
}

impl CorpusStats {
    pub fn for_label(&self, label: Label) -> &LabelStats {
        match label {
            Label::Fake => &self.fake,
            Label::Real => &self.real,
        }
    }
}

/// Table-style statistics. `features` must be aligned one-to-one with the
/// posts; tag totals come from the feature records, unique counts from the
/// distinct normalized tags of each label.
pub fn corpus_stats(
    corpus: &Corpus,
    features: &[BehavioralFeatures],
) -> Result<CorpusStats, CorpusError> {
    if corpus.len() != features.len() {
        return Err(CorpusError::LengthMismatch {
            posts: corpus.len(),
            features: features.len(),
        });
    }
    let mut stats = CorpusStats {
        total_posts: corpus.len(),
        ..Default::default()
    };
    for label in Label::ALL {
        let mut words = 0usize;
        let mut chars = 0usize;
        let mut hashtags = BTreeSet::new();
        let mut mentions = BTreeSet::new();
        let mut s = LabelStats::default();
        for (post, feat) in corpus.posts().iter().zip(features) {
            if post.label != label {
                continue;
            }
            s.posts += 1;
            words += feat.word_count;
            chars += feat.char_count;
            s.hashtag_total += feat.hashtag_count;
            s.mention_total += feat.mention_count;
            let tags = extract_tags(&post.text);
            hashtags.extend(tags.hashtags.iter().map(|t| normalize_tag(t)));
            mentions.extend(tags.mentions.iter().map(|t| normalize_tag(t)));
        }
        hashtags.remove("");
        mentions.remove("");
        s.hashtag_unique = hashtags.len();
        s.mention_unique = mentions.len();
        s.empty = s.posts == 0;
        if !s.empty {
            s.mean_words = words as f64 / s.posts as f64;
            s.mean_chars = chars as f64 / s.posts as f64;
        }
        match label {
            Label::Fake => stats.fake = s,
            Label::Real => stats.real = s,
        }
    }
    for feat in features {
        let h = feat.hashtag_count > 0;
        let m = feat.mention_count > 0;
        stats.rows_with_hashtags += h as usize;
        stats.rows_with_mentions += m as usize;
        stats.rows_with_both += (h && m) as usize;
    }
    Ok(stats)
}

/// Assignment of every post id to one of `k` folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    pub assignments: BTreeMap<String, usize>,
}

impl FoldPlan {
    pub fn fold_of(&self, id: &str) -> Option<usize> {
        self.assignments.get(id).copied()
    }

    /// Fold index of every post, in corpus order.
    pub fn fold_vector(&self, corpus: &Corpus) -> Result<Vec<usize>, CorpusError> {
        corpus
            .posts()
            .iter()
            .map(|p| {
                let fold = self
                    .fold_of(&p.id)
                    .ok_or_else(|| CorpusError::UnassignedPost(p.id.clone()))?;
                if fold >= self.k {
                    return Err(CorpusError::FoldOutOfRange { fold, k: self.k });
                }
                Ok(fold)
            })
            .collect()
    }

    /// `(train, test)` corpus indices for holding out `fold`.
    pub fn split(
        &self,
        corpus: &Corpus,
        fold: usize,
    ) -> Result<(Vec<usize>, Vec<usize>), CorpusError> {
        if fold >= self.k {
            return Err(CorpusError::FoldOutOfRange { fold, k: self.k });
        }
        let folds = self.fold_vector(corpus)?;
        let (test, train): (Vec<usize>, Vec<usize>) =
            (0..corpus.len()).partition(|&i| folds[i] == fold);
        Ok((train, test))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("fold plan serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

/// Stratified k-fold plan: within each label the posts are shuffled with a
/// seeded generator and dealt round-robin. Dealing for the second label
/// continues from the fold where the first one stopped, which keeps fold
/// sizes within one item of each other.
pub fn make_folds(corpus: &Corpus, k: usize, seed: u64) -> Result<FoldPlan, CorpusError> {
    if k < 2 {
        return Err(CorpusError::InvalidFoldCount(k));
    }
    for label in Label::ALL {
        let count = corpus.count(label);
        if count < k {
            return Err(CorpusError::TooFewPerLabel { k, label, count });
        }
    }
    let mut rng = rng::seeded(seed);
    let mut assignments = BTreeMap::new();
    let mut next = 0usize;
    for label in Label::ALL {
        let mut idx = corpus.indices_of(label);
        idx.shuffle(&mut rng);
        for i in idx {
            assignments.insert(corpus.posts()[i].id.clone(), next);
            next = (next + 1) % k;
        }
    }
    Ok(FoldPlan {
        k,
        seed,
        assignments,
    })
}

/// Stratified hold-out split returning `(train, test)` indices. Each label
/// contributes `round(test_fraction * count)` posts to the test side.
pub fn train_test_split(
    corpus: &Corpus,
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>), CorpusError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(CorpusError::InvalidFraction(test_fraction));
    }
    let mut rng = rng::seeded(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for label in Label::ALL {
        let mut idx = corpus.indices_of(label);
        idx.shuffle(&mut rng);
        let n_test = (test_fraction * idx.len() as f64).round() as usize;
        test.extend_from_slice(&idx[..n_test]);
        train.extend_from_slice(&idx[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}
