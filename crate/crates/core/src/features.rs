//! Hashtag and mention handling, behavioral feature records and tag
//! elimination.
//!
//! A tag is a sigil (`#` or `@`) immediately followed by a maximal run of
//! letters, digits or underscores. The sigil itself is not part of the
//! returned tag text.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{char_count, word_count, Corpus, Label};
use crate::sentiment::SentimentLabel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TagKind {
    Hashtag,
    Mention,
}

impl TagKind {
    pub fn sigil(self) -> char {
        match self {
            TagKind::Hashtag => '#',
            TagKind::Mention => '@',
        }
    }

    fn from_sigil(c: char) -> Option<TagKind> {
        match c {
            '#' => Some(TagKind::Hashtag),
            '@' => Some(TagKind::Mention),
            _ => None,
        }
    }

    pub fn plural(self) -> &'static str {
        match self {
            TagKind::Hashtag => "hashtags",
            TagKind::Mention => "mentions",
        }
    }
}

fn is_tag_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct TagSpan {
    kind: TagKind,
    /// Byte offset of the sigil.
    start: usize,
    /// Byte offset one past the last tag character.
    end: usize,
}

fn tag_spans(text: &str) -> Vec<TagSpan> {
    let mut spans = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some((start, c)) = chars.next() {
        let Some(kind) = TagKind::from_sigil(c) else {
            continue;
        };
        let mut end = start + c.len_utf8();
        while let Some(&(i, next)) = chars.peek() {
            if !is_tag_char(next) {
                break;
            }
            end = i + next.len_utf8();
            chars.next();
        }
        if end > start + c.len_utf8() {
            spans.push(TagSpan { kind, start, end });
        }
    }
    spans
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Tags {
    pub hashtags: Vec<String>,
    pub mentions: Vec<String>,
}

/// Raw hashtags and mentions in order of appearance, duplicates kept.
pub fn extract_tags(text: &str) -> Tags {
    let mut tags = Tags::default();
    for span in tag_spans(text) {
        let body = text[span.start + 1..span.end].to_string();
        match span.kind {
            TagKind::Hashtag => tags.hashtags.push(body),
            TagKind::Mention => tags.mentions.push(body),
        }
    }
    tags
}

/// Lowercases and drops everything that is not a letter or digit, so
/// `Covid_19` and `covid19` compare equal.
pub fn normalize_tag(tag: &str) -> String {
    tag.chars()
        .flat_map(char::to_lowercase)
        .filter(|c| c.is_alphanumeric())
        .collect()
}

/// Per-post numeric record fed to the SVM and to feature-token injection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct BehavioralFeatures {
    pub word_count: usize,
    pub char_count: usize,
    pub hashtag_count: usize,
    pub mention_count: usize,
    /// 0 for (very) negative, 2 for neutral, 4 for (very) positive.
    pub sentiment_code: u8,
}

impl BehavioralFeatures {
    pub const DIM: usize = 5;

    /// `[sentiment, words, chars, hashtags, mentions]` as reals.
    pub fn to_vector(&self) -> Vec<f64> {
        vec![
            self.sentiment_code as f64,
            self.word_count as f64,
            self.char_count as f64,
            self.hashtag_count as f64,
            self.mention_count as f64,
        ]
    }
}

pub fn extract_features(text: &str, sentiment: SentimentLabel) -> BehavioralFeatures {
    let tags = extract_tags(text);
    BehavioralFeatures {
        word_count: word_count(text),
        char_count: char_count(text),
        hashtag_count: tags.hashtags.len(),
        mention_count: tags.mentions.len(),
        sentiment_code: sentiment.code(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum EliminationMode {
    #[default]
    None,
    DropHashtags,
    DropMentions,
    DropBoth,
}

impl EliminationMode {
    pub const ALL: [EliminationMode; 4] = [
        EliminationMode::None,
        EliminationMode::DropHashtags,
        EliminationMode::DropMentions,
        EliminationMode::DropBoth,
    ];

    fn drops(self, kind: TagKind) -> bool {
        matches!(
            (self, kind),
            (EliminationMode::DropBoth, _)
                | (EliminationMode::DropHashtags, TagKind::Hashtag)
                | (EliminationMode::DropMentions, TagKind::Mention)
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EliminationMode::None => "none",
            EliminationMode::DropHashtags => "hashtags",
            EliminationMode::DropMentions => "mentions",
            EliminationMode::DropBoth => "both",
        }
    }
}

impl FromStr for EliminationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "none" => Ok(EliminationMode::None),
            "hashtags" | "drophashtags" => Ok(EliminationMode::DropHashtags),
            "mentions" | "dropmentions" => Ok(EliminationMode::DropMentions),
            "both" | "dropboth" => Ok(EliminationMode::DropBoth),
            other => Err(format!("unknown elimination mode `{other}`")),
        }
    }
}

/// Deletes every eliminated tag (sigil and word). The whitespace around a
/// deletion collapses to one space, or disappears at the start or end of
/// the text. Everything else is left untouched.
pub fn eliminate(text: &str, mode: EliminationMode) -> String {
    if mode == EliminationMode::None {
        return text.to_string();
    }
    let spans: Vec<TagSpan> = tag_spans(text)
        .into_iter()
        .filter(|s| mode.drops(s.kind))
        .collect();
    if spans.is_empty() {
        return text.to_string();
    }
    let mut out = String::with_capacity(text.len());
    let mut cursor = 0;
    for span in spans {
        out.push_str(&text[cursor..span.start]);
        let kept = out.trim_end().len();
        let ws_left = kept < out.len();
        out.truncate(kept);
        let rest = &text[span.end..];
        let trimmed = rest.trim_start();
        let ws_right = trimmed.len() < rest.len();
        cursor = span.end + (rest.len() - trimmed.len());
        if !out.is_empty() && !trimmed.is_empty() && (ws_left || ws_right) {
            out.push(' ');
        }
    }
    out.push_str(&text[cursor..]);
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagCount {
    pub tag: String,
    pub count: usize,
}

/// Normalized tags ranked by count (descending, ties alphabetical).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagFrequencyTable {
    pub kind: TagKind,
    pub label: Option<Label>,
    /// Distinct tags before truncation.
    pub distinct: usize,
    pub entries: Vec<TagCount>,
}

impl TagFrequencyTable {
    pub fn from_counts(
        kind: TagKind,
        label: Option<Label>,
        counts: &BTreeMap<String, usize>,
        top_n: usize,
    ) -> Self {
        let mut entries: Vec<TagCount> = counts
            .iter()
            .filter(|(_, &c)| c > 0)
            .map(|(t, &c)| TagCount {
                tag: t.clone(),
                count: c,
            })
            .collect();
        // BTreeMap iteration is already alphabetical; a stable sort keeps it
        // as the tie-break.
        entries.sort_by_key(|e| std::cmp::Reverse(e.count));
        let distinct = entries.len();
        entries.truncate(top_n);
        TagFrequencyTable {
            kind,
            label,
            distinct,
            entries,
        }
    }

    pub fn total(&self) -> usize {
        self.entries.iter().map(|e| e.count).sum()
    }
}

/// Occurrence counts of normalized tags over the posts matching `label`.
/// Tags that normalize to the empty string are not counted.
pub fn tag_counts(corpus: &Corpus, kind: TagKind, label: Option<Label>) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    for post in corpus.posts() {
        if label.is_some_and(|l| l != post.label) {
            continue;
        }
        let tags = extract_tags(&post.text);
        let raw = match kind {
            TagKind::Hashtag => tags.hashtags,
            TagKind::Mention => tags.mentions,
        };
        for tag in raw {
            let norm = normalize_tag(&tag);
            if !norm.is_empty() {
                *counts.entry(norm).or_insert(0) += 1;
            }
        }
    }
    counts
}

pub fn tag_frequency(
    corpus: &Corpus,
    kind: TagKind,
    label: Option<Label>,
    top_n: usize,
) -> TagFrequencyTable {
    TagFrequencyTable::from_counts(kind, label, &tag_counts(corpus, kind, label), top_n)
}

/// Tags used by posts of `label` and never by posts of the other label.
pub fn exclusive_tags(
    corpus: &Corpus,
    kind: TagKind,
    label: Label,
    top_n: usize,
) -> TagFrequencyTable {
    let mut own = tag_counts(corpus, kind, Some(label));
    let other = tag_counts(corpus, kind, Some(label.other()));
    own.retain(|tag, _| !other.contains_key(tag));
    TagFrequencyTable::from_counts(kind, Some(label), &own, top_n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const FIG11: &str =
        "Washington Examiner Editor Loses Head Up His Ass #washington #josephbiden #covid19";

    #[test]
    fn extracts_headline_hashtags() {
        let tags = extract_tags(FIG11);
        assert_eq!(tags.hashtags, vec!["washington", "josephbiden", "covid19"]);
        assert!(tags.mentions.is_empty());
    }

    #[test]
    fn extracts_mentions_and_hashtags() {
        let text = "The allocation of vaccines is proposed to be rolled out in two phases- @DrTedros #COVID19";
        let tags = extract_tags(text);
        assert_eq!(tags.hashtags, vec!["COVID19"]);
        assert_eq!(tags.mentions, vec!["DrTedros"]);
        assert_eq!(extract_tags(""), Tags::default());
    }

    #[test]
    fn tag_grammar_edges() {
        let tags = extract_tags("## #_x_ #a.b @ @@m #é1 x#y");
        assert_eq!(tags.hashtags, vec!["_x_", "a", "é1", "y"]);
        assert_eq!(tags.mentions, vec!["m"]);
    }

    #[test]
    fn normalizes_table_one_examples() {
        assert_eq!(normalize_tag("Covid_19"), "covid19");
        assert_eq!(normalize_tag("CoronaVirusFacts"), "coronavirusfacts");
        assert_eq!(normalize_tag("NYCLockdown"), "nyclockdown");
        assert_eq!(normalize_tag("covid19"), "covid19");
        assert_eq!(normalize_tag("___"), "");
    }

    #[test]
    fn headline_features() {
        let f = extract_features(FIG11, SentimentLabel::Negative);
        assert_eq!(
            f,
            BehavioralFeatures {
                word_count: 11,
                char_count: 82,
                hashtag_count: 3,
                mention_count: 0,
                sentiment_code: 0
            }
        );
        assert_eq!(
            extract_features("", SentimentLabel::Neutral),
            BehavioralFeatures {
                sentiment_code: 2,
                ..Default::default()
            }
        );
        assert_eq!(
            extract_features("a @b #c", SentimentLabel::VeryPositive),
            BehavioralFeatures {
                word_count: 3,
                char_count: 7,
                hashtag_count: 1,
                mention_count: 1,
                sentiment_code: 4
            }
        );
    }

    #[test]
    fn elimination_examples() {
        assert_eq!(
            eliminate("go #covid19 now", EliminationMode::DropHashtags),
            "go now"
        );
        assert_eq!(
            eliminate("go #covid19 now", EliminationMode::DropMentions),
            "go #covid19 now"
        );
        assert_eq!(
            eliminate("go #covid19 now", EliminationMode::None),
            "go #covid19 now"
        );
        assert_eq!(eliminate("#a  go  @b", EliminationMode::DropBoth), "go");
        assert_eq!(
            eliminate("go #a #b\tnow", EliminationMode::DropHashtags),
            "go now"
        );
        assert_eq!(eliminate("x#y.z", EliminationMode::DropHashtags), "x.z");
        assert_eq!(
            eliminate("keep  this #gone", EliminationMode::DropHashtags),
            "keep  this"
        );
    }

    #[test]
    fn frequency_table_orders_and_truncates() {
        let c = Corpus::from_texts("c", [("#a #a #b", Label::Fake)]);
        let t = tag_frequency(&c, TagKind::Hashtag, None, 30);
        let pairs: Vec<_> = t
            .entries
            .iter()
            .map(|e| (e.tag.as_str(), e.count))
            .collect();
        assert_eq!(pairs, vec![("a", 2), ("b", 1)]);

        let c = Corpus::from_texts("c", [("#z #y #x #Y", Label::Fake)]);
        let t = tag_frequency(&c, TagKind::Hashtag, Some(Label::Fake), 2);
        let tags: Vec<_> = t.entries.iter().map(|e| e.tag.as_str()).collect();
        assert_eq!(tags, vec!["y", "x"]);
        assert_eq!(t.distinct, 3);
    }

    #[test]
    fn exclusive_tags_are_set_difference() {
        let c = Corpus::from_texts(
            "c",
            [
                ("#trump #covid19 #wuhan", Label::Fake),
                ("#Covid_19 #wearamask", Label::Real),
            ],
        );
        let fake_only = exclusive_tags(&c, TagKind::Hashtag, Label::Fake, 30);
        let tags: Vec<_> = fake_only.entries.iter().map(|e| e.tag.as_str()).collect();
        assert_eq!(tags, vec!["trump", "wuhan"]);
        let real_only = exclusive_tags(&c, TagKind::Hashtag, Label::Real, 30);
        assert_eq!(real_only.entries[0].tag, "wearamask");
        assert_eq!(real_only.entries.len(), 1);
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(s in "\\PC*") {
            let once = normalize_tag(&s);
            prop_assert_eq!(normalize_tag(&once), once);
        }

        #[test]
        fn none_is_identity(s in "\\PC*") {
            prop_assert_eq!(eliminate(&s, EliminationMode::None), s);
        }

        #[test]
        fn drop_both_leaves_no_tags(s in "[a-z#@_ .\t]{0,40}") {
            let out = eliminate(&s, EliminationMode::DropBoth);
            prop_assert_eq!(extract_tags(&out), Tags::default());
        }

        #[test]
        fn drop_one_kind_keeps_the_other(s in "[ab#@_ ]{0,40}") {
            let out = eliminate(&s, EliminationMode::DropHashtags);
            prop_assert!(extract_tags(&out).hashtags.is_empty());
            prop_assert_eq!(extract_tags(&out).mentions, extract_tags(&s).mentions);
        }

        #[test]
        fn counts_match_extraction(s in "\\PC{0,60}") {
            let f = extract_features(&s, SentimentLabel::Neutral);
            let t = extract_tags(&s);
            prop_assert_eq!(f.hashtag_count, t.hashtags.len());
            prop_assert_eq!(f.mention_count, t.mentions.len());
        }
    }
}
