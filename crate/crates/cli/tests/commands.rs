mod common;

use common::*;
use tempfile::tempdir;

#[test]
fn stats_on_empty_corpus() {
    let dir = tempdir().unwrap();
    let input = dir.path().join("empty.csv");
    std::fs::write(&input, "id,text,label\n").unwrap();
    let out = dir.path().join("out");
    let run = infodemic(&[
        "stats",
        "--input",
        path_str(&input),
        "--out",
        path_str(&out),
    ]);
    assert_eq!(run.status, 0, "{}", run.stderr);
    let stats = read_json(&out.join("stats.json"));
    assert_eq!(stats["schema_version"], 1);
    assert_eq!(stats["stats"]["total_posts"], 0);
    assert_eq!(stats["stats"]["fake"]["mean_words"], 0.0);
    assert_eq!(stats["stats"]["fake"]["empty"], true);
    let csv = std::fs::read_to_string(out.join("hashtags_fake_top30.csv")).unwrap();
    assert_eq!(csv.trim(), "tag,count");
    let svg = std::fs::read_to_string(out.join("hashtags_fake_top30.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
}

#[test]
fn stats_tables_are_truncated_and_listed() {
    let dir = tempdir().unwrap();
    let input = dir.path().join("many.csv");
    let mut text = String::from("id,text,label\n");
    for i in 0..50 {
        text.push_str(&format!(
            "{i},post #tag{i} #shared @user{i},{}\n",
            if i % 2 == 0 { "fake" } else { "real" }
        ));
    }
    std::fs::write(&input, text).unwrap();
    let out = dir.path().join("out");
    let run = infodemic(&[
        "stats",
        "--input",
        path_str(&input),
        "--out",
        path_str(&out),
    ]);
    assert_eq!(run.status, 0, "{}", run.stderr);
    for name in [
        "hashtags_fake_top30.csv",
        "hashtags_real_top30.csv",
        "mentions_fake_top30.csv",
        "mentions_real_top30.csv",
        "hashtags_fake_only.csv",
        "hashtags_real_only.csv",
    ] {
        let rows = std::fs::read_to_string(out.join(name))
            .unwrap()
            .lines()
            .count()
            - 1;
        assert!(rows <= 30, "{name} has {rows} rows");
        assert!(out.join(name.replace(".csv", ".svg")).exists());
    }
    let only = std::fs::read_to_string(out.join("hashtags_fake_only.csv")).unwrap();
    assert!(!only.contains("shared"));
    let manifest = read_json(&out.join("manifest.json"));
    let files: Vec<&str> = manifest["files"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f.as_str().unwrap())
        .collect();
    assert_eq!(files.len(), 13);
    for f in &files {
        assert!(out.join(f).exists(), "{f}");
    }
    let on_disk = std::fs::read_dir(&out).unwrap().count();
    assert_eq!(
        on_disk,
        files.len() + 1,
        "no stray files besides the manifest"
    );
}

#[test]
fn concern_on_survey_labels() {
    let dir = tempdir().unwrap();
    let (corpus, labels) = survey_fixture(dir.path());
    let out = dir.path().join("out");
    let cfg = dir.path().join("c.toml");
    std::fs::write(
        &cfg,
        format!(
            "sentiment = \"external\"\nsentiment_labels = {:?}\n",
            path_str(&labels)
        ),
    )
    .unwrap();
    let run = infodemic(&[
        "concern",
        "--config",
        path_str(&cfg),
        "--input",
        path_str(&corpus),
        "--out",
        path_str(&out),
    ]);
    assert_eq!(run.status, 0, "{}", run.stderr);
    let r = read_json(&out.join("concern.json"));
    let ci = |c: &str| r[c]["concern"]["concern_index"].as_f64().unwrap();
    assert_eq!((ci("fake") * 100.0).round(), 72.0);
    assert_eq!((ci("real") * 100.0).round(), 62.0);
    let z = r["two_decimal"]["z_score"].as_f64().unwrap();
    assert_eq!((z * 10.0).round(), 93.0);
    assert!(r["two_decimal"]["p_value"].as_f64().unwrap() < 1e-5);
    let zf = r["full_precision"]["z_score"].as_f64().unwrap();
    assert!((9.40..=9.42).contains(&zf), "{zf}");
}

#[test]
fn concern_lists_missing_external_ids() {
    let dir = tempdir().unwrap();
    let corpus = dir.path().join("c.csv");
    std::fs::write(&corpus, "id,text,label\na,x,fake\nb,y,real\nc,z,real\n").unwrap();
    let labels = dir.path().join("l.csv");
    std::fs::write(&labels, "id,label\na,negative\n").unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(
        &cfg,
        format!(
            "sentiment = \"external\"\nsentiment_labels = {:?}\n",
            path_str(&labels)
        ),
    )
    .unwrap();
    let out = dir.path().join("out");
    let run = infodemic(&[
        "concern",
        "--config",
        path_str(&cfg),
        "--input",
        path_str(&corpus),
        "--out",
        path_str(&out),
    ]);
    assert_ne!(run.status, 0);
    let line: serde_json::Value = serde_json::from_str(run.stderr.trim()).unwrap();
    let msg = line["error"].as_str().unwrap();
    assert!(msg.contains('b') && msg.contains('c'), "{msg}");
    assert_eq!(line["stage"], "sentiment");
}

#[test]
fn errors_are_one_json_line() {
    let dir = tempdir().unwrap();
    let run = infodemic(&[
        "stats",
        "--input",
        "/nonexistent/posts.csv",
        "--out",
        path_str(dir.path()),
    ]);
    assert_eq!(run.status, 1);
    assert_eq!(run.stderr.trim().lines().count(), 1);
    let line: serde_json::Value = serde_json::from_str(run.stderr.trim()).unwrap();
    assert!(line["error"].as_str().unwrap().contains("nonexistent"));

    let run = infodemic(&["stats", "--no-such-flag"]);
    assert_eq!(run.status, 2);
    assert!(serde_json::from_str::<serde_json::Value>(run.stderr.trim()).is_ok());

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "sede = 3\n").unwrap();
    let run = infodemic(&["stats", "--config", path_str(&bad)]);
    assert_eq!(run.status, 1);
    let line: serde_json::Value = serde_json::from_str(run.stderr.trim()).unwrap();
    assert_eq!(line["stage"], "config");
}

#[test]
fn flags_override_config_file() {
    let dir = tempdir().unwrap();
    let input = separable_fixture(dir.path());
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "seed = 1\nout = \"ignored\"\n").unwrap();
    let out = dir.path().join("out");
    let run = infodemic(&[
        "stats",
        "--config",
        path_str(&cfg),
        "--input",
        path_str(&input),
        "--out",
        path_str(&out),
        "--seed",
        "9",
    ]);
    assert_eq!(run.status, 0, "{}", run.stderr);
    let manifest = read_json(&out.join("manifest.json"));
    assert_eq!(manifest["config"]["seed"], 9);
    assert_eq!(manifest["command"], "stats");
}

#[test]
fn train_eval_on_separable_corpus() {
    let dir = tempdir().unwrap();
    let input = separable_fixture(dir.path());
    let cfg = write_config(dir.path(), "");
    let out = dir.path().join("out");
    let run = infodemic(&[
        "train-eval",
        "--config",
        path_str(&cfg),
        "--input",
        path_str(&input),
        "--out",
        path_str(&out),
        "--sweep",
    ]);
    assert_eq!(run.status, 0, "{}", run.stderr);
    let enc = read_json(&out.join("encoder_cv.json"))["mean_accuracy"]
        .as_f64()
        .unwrap();
    let svm = read_json(&out.join("svm_cv.json"))["mean_accuracy"]
        .as_f64()
        .unwrap();
    assert!(enc >= 0.95, "encoder {enc}");
    assert!(svm >= 0.95, "svm {svm}");
    let ens = read_json(&out.join("ensemble.json"));
    assert_eq!(ens["n_total"], 80);
    assert!(ens["agreed_accuracy"].as_f64().unwrap() >= enc.max(svm));

    let sweep = read_json(&out.join("sweep.json"));
    let modes: Vec<&str> = sweep["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["elimination"].as_str().unwrap())
        .collect();
    assert_eq!(modes, ["none", "hashtags", "mentions", "both"]);

    let preds = std::fs::read_to_string(out.join("predictions_svm.csv")).unwrap();
    assert_eq!(preds.lines().next(), Some("id,label,fold"));
    assert_eq!(preds.lines().count(), 81);
    for f in [
        "encoder_model.json",
        "svm_model.json",
        "vocab.tsv",
        "folds.json",
    ] {
        assert!(out.join(f).exists(), "{f}");
    }
    let model = read_json(&out.join("encoder_model.json"));
    assert_eq!(model["schema_version"], 1);
    let text = std::fs::read_to_string(out.join("encoder_model.json")).unwrap();
    let loaded = infodemic::encoder::EncoderModel::from_json(&text).unwrap();
    let seq = loaded.encode("anything at all", None).unwrap();
    assert!(loaded.predict(&seq).is_ok());
    let text = std::fs::read_to_string(out.join("svm_model.json")).unwrap();
    assert!(infodemic::models::SvmModel::from_json(&text).is_ok());
}

#[test]
fn train_eval_with_injection() {
    let dir = tempdir().unwrap();
    let input = separable_fixture(dir.path());
    let cfg = write_config(dir.path(), "inject = true\nelimination = \"both\"\n");
    let out = dir.path().join("out");
    let run = infodemic(&[
        "train-eval",
        "--config",
        path_str(&cfg),
        "--input",
        path_str(&input),
        "--out",
        path_str(&out),
    ]);
    assert_eq!(run.status, 0, "{}", run.stderr);
    let enc = read_json(&out.join("encoder_cv.json"));
    assert_eq!(enc["options"]["inject"], true);
    assert_eq!(enc["options"]["elimination"], "both");
}

#[test]
fn topics_picks_six_in_both_classes() {
    let dir = tempdir().unwrap();
    let input = six_topic_fixture(dir.path(), 3);
    let cfg = write_config(dir.path(), "");
    let out = dir.path().join("out");
    let run = infodemic(&[
        "topics",
        "--config",
        path_str(&cfg),
        "--input",
        path_str(&input),
        "--out",
        path_str(&out),
    ]);
    assert_eq!(run.status, 0, "{}", run.stderr);
    for label in ["fake", "real"] {
        let r = read_json(&out.join(format!("topics_{label}.json")));
        assert_eq!(r["best_k"], 6, "{label}: {}", r["coherence_by_k"]);
        assert_eq!(r["coherence_by_k"].as_array().unwrap().len(), 6);
        assert_eq!(r["report"]["clusters"].as_array().unwrap().len(), 6);
        assert!(out.join(format!("topics_{label}_cluster5.csv")).exists());
    }
    let sim = read_json(&out.join("similarity.json"));
    assert_eq!(sim["values"].as_array().unwrap().len(), 6);
    assert_eq!(sim["fake_topics_overlapping"], 3);
}

#[test]
fn topics_single_class_omits_similarity() {
    let dir = tempdir().unwrap();
    let input = dir.path().join("one.csv");
    let mut text = String::from("id,text,label\n");
    let words = infodemic::synthetic::pseudo_words(24);
    for i in 0..40 {
        let topic = &words[(i % 3) * 8..(i % 3) * 8 + 8];
        text.push_str(&format!("{i},{},fake\n", topic.join(" ")));
    }
    std::fs::write(&input, text).unwrap();
    let cfg = write_config(dir.path(), "k_min = 2\nk_max = 4\n");
    let out = dir.path().join("out");
    let run = infodemic(&[
        "topics",
        "--config",
        path_str(&cfg),
        "--input",
        path_str(&input),
        "--out",
        path_str(&out),
    ]);
    assert_eq!(run.status, 0, "{}", run.stderr);
    assert!(out.join("topics_fake.json").exists());
    assert!(!out.join("topics_real.json").exists());
    assert!(!out.join("similarity.json").exists());
}

#[test]
fn ensemble_from_prediction_files() {
    let dir = tempdir().unwrap();
    let (a, b, gold) = ensemble_fixture(dir.path());
    let out = dir.path().join("out");
    let run = infodemic(&[
        "ensemble",
        "--preds-a",
        path_str(&a),
        "--preds-b",
        path_str(&b),
        "--gold",
        path_str(&gold),
        "--out",
        path_str(&out),
    ]);
    assert_eq!(run.status, 0, "{}", run.stderr);
    let r = read_json(&out.join("ensemble.json"));
    assert_eq!(r["n_total"], 8560);
    assert_eq!(r["n_agreed"], 6705);
    assert_eq!(r["n_agreed_correct"], 6514);
    assert!((r["agreed_accuracy"].as_f64().unwrap() - 0.9715).abs() < 1e-4);
    assert!((r["coverage"].as_f64().unwrap() - 0.7833).abs() < 1e-4);
}

#[test]
fn ensemble_rejects_missing_prediction() {
    let dir = tempdir().unwrap();
    let gold = dir.path().join("gold.csv");
    std::fs::write(&gold, "id,label\nx,fake\ny,real\n").unwrap();
    let a = dir.path().join("a.csv");
    std::fs::write(&a, "id,label\nx,fake\ny,real\n").unwrap();
    let b = dir.path().join("b.csv");
    std::fs::write(&b, "id,label\nx,fake\n").unwrap();
    let run = infodemic(&[
        "ensemble",
        "--preds-a",
        path_str(&a),
        "--preds-b",
        path_str(&b),
        "--gold",
        path_str(&gold),
        "--out",
        path_str(&dir.path().join("o")),
    ]);
    assert_eq!(run.status, 1);
    assert!(run.stderr.contains("`y`"), "{}", run.stderr);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempdir().unwrap();
    let sep = separable_fixture(dir.path());
    let six = six_topic_fixture(dir.path(), 5);
    let cfg = write_config(dir.path(), "k_min = 5\nk_max = 7\n");
    for (cmd, input) in [("train-eval", &sep), ("topics", &six)] {
        let runs: Vec<_> = ["a", "b"]
            .iter()
            .map(|tag| {
                let out = dir.path().join(format!("{cmd}_{tag}"));
                let run = infodemic(&[
                    cmd,
                    "--config",
                    path_str(&cfg),
                    "--input",
                    path_str(input),
                    "--out",
                    path_str(&out),
                ]);
                assert_eq!(run.status, 0, "{}", run.stderr);
                json_outputs(&out)
            })
            .collect();
        assert!(!runs[0].is_empty());
        assert_eq!(runs[0], runs[1], "{cmd}");
    }
}
