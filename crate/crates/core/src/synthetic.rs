//! Seeded synthetic corpora with known structure, used by the test suites
//! and handy for trying the CLI without a real dataset.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::corpus::{Corpus, Label, Post};
use crate::rng;

const ONSETS: &[char] = &['b', 'd', 'f', 'g', 'k', 'm', 'n', 'p', 'r', 't', 'v', 'z'];
const VOWELS: &[char] = &['a', 'o', 'u'];
const CODAS: &[char] = &['b', 'k', 'm', 'n', 'p', 'r', 't'];

/// Distinct pronounceable letter-only words. They avoid `e`, `i`, `y` and a
/// final `s`, so stopword removal and suffix stemming leave them unchanged.
pub fn pseudo_words(n: usize) -> Vec<String> {
    let mut out = Vec::with_capacity(n);
    'outer: for a in ONSETS {
        for v in VOWELS {
            for b in ONSETS {
                for w in VOWELS {
                    for c in CODAS {
                        if out.len() == n {
                            break 'outer;
                        }
                        out.push([*a, *v, *b, *w, *c].iter().collect());
                    }
                }
            }
        }
    }
    assert_eq!(
        out.len(),
        n,
        "at most {} pseudo-words",
        ONSETS.len().pow(2) * VOWELS.len().pow(2) * CODAS.len()
    );
    out
}

/// `topics` disjoint vocabularies of `words_per_topic` words each.
pub fn topic_vocabularies(topics: usize, words_per_topic: usize) -> Vec<Vec<String>> {
    pseudo_words(topics * words_per_topic)
        .chunks(words_per_topic)
        .map(<[String]>::to_vec)
        .collect()
}

/// Documents generated from single topics, `docs_per_topic` per topic.
///
/// With `full_cover` every document contains each word of its topic once;
/// `extra` further words are then drawn uniformly from the same vocabulary
/// and the document is shuffled. Returns the documents and their generating
/// topic.
pub fn topic_documents(
    vocabs: &[Vec<String>],
    docs_per_topic: usize,
    full_cover: bool,
    extra: usize,
    seed: u64,
) -> (Vec<Vec<String>>, Vec<usize>) {
    let mut rng = rng::seeded(seed);
    let mut docs = Vec::new();
    let mut topics = Vec::new();
    for _ in 0..docs_per_topic {
        for (t, vocab) in vocabs.iter().enumerate() {
            let mut doc: Vec<String> = if full_cover {
                vocab.clone()
            } else {
                Vec::new()
            };
            doc.extend((0..extra).map(|_| vocab.choose(&mut rng).expect("non-empty").clone()));
            doc.shuffle(&mut rng);
            docs.push(doc);
            topics.push(t);
        }
    }
    (docs, topics)
}

/// A corpus where labels are separable both by vocabulary and by behavioral
/// features: fake posts are short and carry hashtags, real posts are long
/// and carry mentions.
pub fn separable_corpus(per_label: usize, seed: u64) -> Corpus {
    let mut rng = rng::seeded(seed);
    let vocab = topic_vocabularies(2, 15);
    let mut posts = Vec::with_capacity(2 * per_label);
    for i in 0..per_label {
        for label in Label::ALL {
            let (words, tags): (usize, Vec<String>) = match label {
                Label::Fake => (
                    rng.gen_range(5..=8),
                    vec!["#hoax".into(), "#plandemic".into()],
                ),
                Label::Real => (
                    rng.gen_range(14..=18),
                    vec!["@health".into(), "@ministry".into()],
                ),
            };
            let pool = &vocab[(label == Label::Real) as usize];
            let mut text: Vec<String> = (0..words)
                .map(|_| pool.choose(&mut rng).expect("non-empty").clone())
                .collect();
            text.extend(tags);
            posts.push(Post::new(
                format!("{}{i}", label.as_str()),
                text.join(" "),
                label,
            ));
        }
    }
    Corpus::new("separable", posts).expect("ids are unique")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topics::{preprocess_topic_text, PreprocessConfig};

    #[test]
    fn pseudo_words_survive_preprocessing() {
        let words = pseudo_words(300);
        let text = words.join(" ");
        assert_eq!(
            preprocess_topic_text(&text, &PreprocessConfig::default()),
            words
        );
    }

    #[test]
    fn topic_documents_are_seeded() {
        let v = topic_vocabularies(3, 5);
        assert_eq!(
            topic_documents(&v, 4, true, 3, 9),
            topic_documents(&v, 4, true, 3, 9)
        );
        let (docs, topics) = topic_documents(&v, 4, true, 3, 9);
        assert_eq!(docs.len(), 12);
        for (d, &t) in docs.iter().zip(&topics) {
            assert_eq!(d.len(), 8);
            assert!(d.iter().all(|w| v[t].contains(w)));
        }
    }

    #[test]
    fn separable_corpus_is_balanced() {
        let c = separable_corpus(10, 1);
        assert_eq!(c.count(Label::Fake), 10);
        assert_eq!(c.count(Label::Real), 10);
    }
}
