use std::process::Command;

fn ctxscope(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_ctxscope"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

#[test]
fn gen_then_build_small_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.json");
    let bundle = dir.path().join("b.json");
    let c = corpus.to_str().unwrap();
    let b = bundle.to_str().unwrap();
    let out = ctxscope(&["gen", "--seed", "1", "--employees", "20", "--items", "120", "--dup-rate", "0.1", "--out", c]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = ctxscope(&["build", "--corpus", c, "--out", b, "--k", "7", "--seed", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let bundle: serde_json::Value = serde_json::from_slice(&std::fs::read(&bundle).unwrap()).unwrap();
    assert_eq!(bundle["topics"].as_array().unwrap().len(), 7);
    assert_eq!(bundle["schema_version"], 1);
}

#[test]
fn corrupt_corpus_fails_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.json");
    let bundle = dir.path().join("b.json");
    std::fs::write(&corpus, "{\"schema_version\": 1, \"employees\": [").unwrap();
    let out = ctxscope(&["build", "--corpus", corpus.to_str().unwrap(), "--out", bundle.to_str().unwrap()]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 1"), "{stderr}");
    assert!(!bundle.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn invalid_gen_config_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("c.json");
    let out = ctxscope(&["gen", "--employees", "0", "--items", "5", "--out", out_path.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(!out_path.exists());
}

#[test]
fn too_many_topics_names_the_stage() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.json");
    let c = corpus.to_str().unwrap();
    assert!(ctxscope(&["gen", "--employees", "3", "--items", "4", "--out", c]).status.success());
    let out = ctxscope(&["build", "--corpus", c, "--out", dir.path().join("b.json").to_str().unwrap(), "--k", "7"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("topics"));
}
