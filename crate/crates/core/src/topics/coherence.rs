use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::TopicError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coherence {
    pub per_topic: Vec<f64>,
    pub mean: f64,
}

/// UMass coherence of each topic's first `top_n` words against `docs`:
/// `Σ_{m>l} log((D(w_m, w_l) + 1) / D(w_l))`, where `D` counts documents.
/// Pairs whose higher-ranked word occurs in no document are skipped.
pub fn umass_coherence(
    topics: &[Vec<String>],
    docs: &[Vec<String>],
    top_n: usize,
) -> Result<Coherence, TopicError> {
    if top_n < 2 {
        return Err(TopicError::TopNTooSmall { top_n, min: 2 });
    }
    if docs.is_empty() {
        return Err(TopicError::NoDocuments);
    }
    let wanted: BTreeSet<&str> = topics
        .iter()
        .flat_map(|t| t.iter().take(top_n))
        .map(String::as_str)
        .collect();
    let mut postings: BTreeMap<&str, Vec<usize>> =
        wanted.iter().map(|&w| (w, Vec::new())).collect();
    for (d, doc) in docs.iter().enumerate() {
        let seen: BTreeSet<&str> = doc.iter().map(String::as_str).collect();
        for w in seen {
            if let Some(list) = postings.get_mut(w) {
                list.push(d);
            }
        }
    }
    let co = |a: &[usize], b: &[usize]| {
        let (mut i, mut j, mut n) = (0, 0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        n
    };
    let per_topic: Vec<f64> = topics
        .iter()
        .map(|topic| {
            let words: Vec<&[usize]> = topic
                .iter()
                .take(top_n)
                .map(|w| postings[w.as_str()].as_slice())
                .collect();
            let mut score = 0.0;
            for m in 1..words.len() {
                for l in 0..m {
                    let d_l = words[l].len();
                    if d_l == 0 {
                        continue;
                    }
                    score += ((co(words[m], words[l]) + 1) as f64 / d_l as f64).ln();
                }
            }
            score
        })
        .collect();
    let mean = if per_topic.is_empty() {
        0.0
    } else {
        per_topic.iter().sum::<f64>() / per_topic.len() as f64
    };
    Ok(Coherence { per_topic, mean })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    #[test]
    fn always_together() {
        let docs = vec![w("mask vaccine"); 10];
        let c = umass_coherence(&[w("mask vaccine")], &docs, 10).unwrap();
        assert!((c.per_topic[0] - 1.1f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn never_together() {
        let mut docs = vec![w("mask"); 10];
        docs.extend(vec![w("vaccine"); 5]);
        let c = umass_coherence(&[w("mask vaccine")], &docs, 10).unwrap();
        assert!((c.per_topic[0] - 0.1f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn absent_word_pair_is_skipped() {
        let docs = vec![w("other")];
        let c = umass_coherence(&[w("ghost other")], &docs, 2).unwrap();
        assert_eq!(c.per_topic, vec![0.0]);
        assert_eq!(c.mean, 0.0);
        let c = umass_coherence(&[w("other ghost")], &docs, 2).unwrap();
        assert_eq!(c.per_topic, vec![0.0]);
    }

    #[test]
    fn top_n_contract() {
        assert_eq!(
            umass_coherence(&[w("a b")], &[w("a")], 1),
            Err(TopicError::TopNTooSmall { top_n: 1, min: 2 })
        );
        assert_eq!(
            umass_coherence(&[w("a b")], &[], 2),
            Err(TopicError::NoDocuments)
        );
    }
}
