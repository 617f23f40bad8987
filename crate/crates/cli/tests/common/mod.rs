#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

use infodemic::synthetic::{separable_corpus, topic_documents, topic_vocabularies};
use infodemic::{Corpus, Label};

pub const BIN: &str = env!("CARGO_BIN_EXE_infodemic");

pub struct Run {
    pub status: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn infodemic(args: &[&str]) -> Run {
    let out = Command::new(BIN).args(args).output().expect("binary runs");
    Run {
        status: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

pub fn read_json(path: &Path) -> serde_json::Value {
    let text = std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    serde_json::from_str(&text).unwrap()
}

pub fn write_corpus(path: &Path, corpus: &Corpus) {
    let mut w = csv::Writer::from_path(path).unwrap();
    w.write_record(["id", "text", "label"]).unwrap();
    for p in corpus.posts() {
        w.write_record([p.id.as_str(), p.text.as_str(), p.label.as_str()])
            .unwrap();
    }
    w.flush().unwrap();
}

/// Small encoder, short training and a reduced topic sweep so that the
/// end-to-end commands finish in seconds.
pub const FAST_CONFIG: &str = r#"
folds = 5
embed_dim = 16
hidden_dim = 16
learning_rate = 0.3
epochs = 8
batch_size = 8
init_scale = 0.5
k_min = 3
k_max = 8
lda_iterations = 200
latent_dim = 8
ae_learning_rate = 0.01
ae_epochs = 100
kmeans_restarts = 10
"#;

/// Writes `FAST_CONFIG` with the keys of `extra` laid over it.
pub fn write_config(dir: &Path, extra: &str) -> PathBuf {
    let mut table: toml::Table = FAST_CONFIG.parse().unwrap();
    table.extend(extra.parse::<toml::Table>().unwrap());
    let path = dir.join("run.toml");
    std::fs::write(&path, toml::to_string(&table).unwrap()).unwrap();
    path
}

pub fn separable_fixture(dir: &Path) -> PathBuf {
    let path = dir.join("separable.csv");
    write_corpus(&path, &separable_corpus(40, 7));
    path
}

/// Fake posts come from generators 0..6 and real posts from 3..9, so three
/// of the six topics of each class are shared.
pub fn six_topic_fixture(dir: &Path, seed: u64) -> PathBuf {
    let vocabs = topic_vocabularies(9, 12);
    let (fake, _) = topic_documents(&vocabs[..6], 20, true, 6, seed);
    let (real, _) = topic_documents(&vocabs[3..], 20, true, 6, seed + 1);
    let items = fake
        .iter()
        .map(|d| (d.join(" "), Label::Fake))
        .chain(real.iter().map(|d| (d.join(" "), Label::Real)));
    let path = dir.join("six_topics.csv");
    write_corpus(&path, &Corpus::from_texts("six_topics", items));
    path
}

/// Per-class sentiment counts in the order very negative, negative, neutral,
/// positive, very positive.
pub const SURVEY_FAKE: [usize; 5] = [2512, 247, 240, 503, 578];
pub const SURVEY_REAL: [usize; 5] = [1794, 553, 677, 716, 740];
const CLASSES: [&str; 5] = [
    "very negative",
    "negative",
    "neutral",
    "positive",
    "very positive",
];

/// A corpus of 4,080 fake and 4,480 real posts with an external sentiment
/// label file matching the published per-class counts.
pub fn survey_fixture(dir: &Path) -> (PathBuf, PathBuf) {
    let corpus = dir.join("survey.csv");
    let labels = dir.join("survey_sentiment.csv");
    let mut c = csv::Writer::from_path(&corpus).unwrap();
    let mut l = csv::Writer::from_path(&labels).unwrap();
    c.write_record(["id", "text", "label"]).unwrap();
    l.write_record(["id", "label"]).unwrap();
    let mut n = 0;
    for (label, counts) in [("fake", SURVEY_FAKE), ("real", SURVEY_REAL)] {
        for (class, &count) in CLASSES.iter().zip(&counts) {
            for _ in 0..count {
                let id = format!("p{n}");
                c.write_record([id.as_str(), "placeholder post", label])
                    .unwrap();
                l.write_record([id.as_str(), class]).unwrap();
                n += 1;
            }
        }
    }
    c.flush().unwrap();
    l.flush().unwrap();
    (corpus, labels)
}

/// Two prediction files and a gold file over 8,560 items: 6,514 items where
/// both models are right, 191 where both are wrong, and the rest where only
/// the first model is right.
pub fn ensemble_fixture(dir: &Path) -> (PathBuf, PathBuf, PathBuf) {
    let paths = ["preds_a.csv", "preds_b.csv", "gold.csv"].map(|n| dir.join(n));
    let mut w: Vec<csv::Writer<std::fs::File>> = paths
        .iter()
        .map(|p| csv::Writer::from_path(p).unwrap())
        .collect();
    for wr in &mut w {
        wr.write_record(["id", "label"]).unwrap();
    }
    for i in 0..8560 {
        let gold = if i % 3 == 0 { Label::Real } else { Label::Fake };
        let (a, b) = match i {
            0..=6513 => (gold, gold),
            6514..=6704 => (gold.other(), gold.other()),
            _ => (gold, gold.other()),
        };
        let id = format!("item{i}");
        for (wr, l) in w.iter_mut().zip([a, b, gold]) {
            wr.write_record([id.as_str(), l.as_str()]).unwrap();
        }
    }
    for wr in &mut w {
        wr.flush().unwrap();
    }
    let [a, b, g] = paths;
    (a, b, g)
}

/// Names and contents of every `.json` file in `dir` except the manifest.
pub fn json_outputs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .filter(|p| p.file_name().unwrap() != "manifest.json")
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    out.sort();
    out
}
