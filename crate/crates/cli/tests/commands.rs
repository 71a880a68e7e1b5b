use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dialseg::corpus::io::{read_corpus_dir, read_segmentation_dir};
use dialseg::llm::{parse_and_validate, SftRecord, SftTask, TemplateId};
use dialseg::Document;

fn toy() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/toy")
}

fn dialseg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dialseg")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = dialseg(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn s(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

fn records(path: &Path) -> Vec<SftRecord> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn corpus() -> Vec<Document> {
    read_corpus_dir(&toy().join("corpus")).unwrap()
}

#[test]
fn emit_sft_writes_two_valid_records_per_document() {
    let dir = tempfile::tempdir().unwrap();
    let (c, g) = (s(&toy().join("corpus")), s(&toy().join("gold")));
    ok(&["emit-sft", "--corpus", &c, "--gold", &g, "--seed", "3", "--out", &s(dir.path())]);
    let recs = records(&dir.path().join("sft.jsonl"));
    let docs = corpus();
    assert_eq!(recs.len(), 2 * docs.len());
    for r in &recs {
        let doc = docs.iter().find(|d| d.id() == r.doc_id).unwrap();
        let template = match r.task {
            SftTask::Segment => TemplateId::Segmentation,
            SftTask::Restore => TemplateId::Restoration,
        };
        let parsed = parse_and_validate(&r.completion, doc, template, None);
        assert!(parsed.is_ok(), "{}: {:?}", r.doc_id, parsed.err());
    }
}

#[test]
fn emit_sft_leave_out_drops_the_source() {
    let dir = tempfile::tempdir().unwrap();
    let (c, g) = (s(&toy().join("corpus")), s(&toy().join("gold")));
    ok(&["emit-sft", "--corpus", &c, "--gold", &g, "--leave-out", "opus", "--out", &s(dir.path())]);
    let recs = records(&dir.path().join("sft.jsonl"));
    assert!(!recs.is_empty());
    assert!(recs.iter().all(|r| !r.doc_id.starts_with("opus")));
}

#[test]
fn corrupt_with_unit_pmf_reproduces_gold() {
    let dir = tempfile::tempdir().unwrap();
    let g = toy().join("gold");
    ok(&["corrupt", "--gold", &s(&g), "--pmf", "1,0,0,0", "--out", &s(dir.path())]);
    let drafts = read_segmentation_dir(dir.path()).unwrap();
    let gold = read_segmentation_dir(&g).unwrap();
    assert_eq!(drafts.len(), gold.len());
    for (id, d) in &drafts {
        assert_eq!(d.segments.len(), gold[id].segments.len(), "{id}");
        for (a, b) in d.segments.iter().zip(&gold[id].segments) {
            assert_eq!(a.line_ids, b.line_ids, "{id}");
        }
    }
}

#[test]
fn corrupt_is_deterministic_for_a_seed() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let g = s(&toy().join("gold"));
    ok(&["corrupt", "--gold", &g, "--seed", "11", "--out", &s(a.path())]);
    ok(&["corrupt", "--gold", &g, "--seed", "11", "--out", &s(b.path())]);
    assert_eq!(read_segmentation_dir(a.path()).unwrap(), read_segmentation_dir(b.path()).unwrap());
}

#[test]
fn ablate_writes_one_set_per_row() {
    let dir = tempfile::tempdir().unwrap();
    let (c, g) = (s(&toy().join("corpus")), s(&toy().join("gold")));
    let table = ok(&[
        "ablate", "--corpus", &c, "--gold", &g, "--leave-out", "opus", "--leave-out", "podcast", "--out",
        &s(dir.path()),
    ]);
    for label in ["All train data", "w/o OPUS", "w/o Podcasts"] {
        assert!(table.contains(label), "{label} missing from\n{table}");
    }
    let all = records(&dir.path().join("all/sft.jsonl"));
    let no_opus = records(&dir.path().join("without_opus/sft.jsonl"));
    assert_eq!(all.len(), 2 * corpus().len());
    assert!(no_opus.iter().all(|r| !r.doc_id.starts_with("opus")));
    assert!(no_opus.len() < all.len());
}

#[test]
fn ablate_rejects_unknown_result_label() {
    let dir = tempfile::tempdir().unwrap();
    let (c, g) = (s(&toy().join("corpus")), s(&toy().join("gold")));
    let out = dialseg(&[
        "ablate", "--corpus", &c, "--gold", &g, "--result", "w/o Nothing=x.json", "--out", &s(dir.path()),
    ]);
    assert!(!out.status.success());
}

#[test]
fn run_fails_on_missing_gold_before_segmenting() {
    let dir = tempfile::tempdir().unwrap();
    let empty_gold = dir.path().join("gold");
    std::fs::create_dir(&empty_gold).unwrap();
    let out_dir = dir.path().join("out");
    let config = format!(
        "corpus = {c:?}\ngold = {g:?}\noutput_dir = {o:?}\nsplit = \"train\"\n\n[[segmenters]]\nname = \"Single\"\nmethod = \"single_segment\"\n",
        c = s(&toy().join("corpus")),
        g = s(&empty_gold),
        o = s(&out_dir),
    );
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, config).unwrap();
    let out = dialseg(&["run", "--config", &s(&cfg)]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("gold"));
    assert!(!out_dir.join("predictions").exists());
}

#[test]
fn run_config_is_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let mut reports = Vec::new();
    for dir in [a.path(), b.path()] {
        let config = format!(
            "corpus = {c:?}\ngold = {g:?}\nsplit_manifest = {m:?}\noutput_dir = {o:?}\nseed = 7\n\n\
             [[segmenters]]\nname = \"TextTiling\"\nmethod = \"texttiling\"\nparams = {{ block_size = 3 }}\n\n\
             [[segmenters]]\nname = \"C99\"\nmethod = \"c99\"\n",
            c = s(&toy().join("corpus")),
            g = s(&toy().join("gold")),
            m = s(&toy().join("split.json")),
            o = s(&dir.join("out")),
        );
        let cfg = dir.join("run.toml");
        std::fs::write(&cfg, config).unwrap();
        ok(&["run", "--config", &s(&cfg)]);
        reports.push(std::fs::read(dir.join("out/report.json")).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
}
