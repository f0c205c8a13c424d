use std::path::Path;

use instab_core::ingest::{ingest_repository, write_commit_log, SourceFilter};
use instab_core::pipeline::{
    self, run_pipeline, validate_artifacts, PipelineConfig, PipelineError, EXIT_NO_TRANSITION, EXIT_OK,
};
use instab_testkit::{cathedral_only_project, evolving_project};

fn config(repo: &Path, out: &Path) -> PipelineConfig {
    PipelineConfig {
        project: "fixture".into(),
        repo_path: Some(repo.to_path_buf()),
        output_dir: out.to_path_buf(),
        ..Default::default()
    }
}

fn tree(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = walkdir::WalkDir::new(root)
        .into_iter()
        .filter_map(Result::ok)
        .filter(|e| e.file_type().is_file())
        .map(|e| {
            let rel = e.path().strip_prefix(root).unwrap().to_string_lossy().into_owned();
            (rel, std::fs::read(e.path()).unwrap())
        })
        .collect();
    out.sort();
    out
}

#[test]
fn evolving_project_finds_a_transition() {
    let tmp = tempfile::tempdir().unwrap();
    let repo = evolving_project(&tmp.path().join("repo"));
    let out = tmp.path().join("out");
    let outcome = run_pipeline(&config(&repo, &out)).unwrap();
    assert_eq!(outcome.exit_code(), EXIT_OK);
    assert!(outcome.transition.found);
    assert_eq!(outcome.releases, 8);

    for f in [
        "commits.jsonl",
        "windows.csv",
        "transition.json",
        "releases.json",
        "diffs.json",
        "change_rates.csv",
        "series.csv",
        "correlation.json",
        "forecast.json",
        "hotspots.json",
        "plot.csv",
        "plot.svg",
        "report.json",
        "graphs/000-v0.1.json",
        "snapshots/007-v0.8.json",
        "metrics/003-v0.4.csv",
    ] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    let checks = validate_artifacts(&out).unwrap();
    assert!(checks.len() > 30);
    assert!(checks.iter().all(|c| c.ok()), "{checks:?}");

    // Artifacts never embed the temporary location.
    let tmp_str = tmp.path().to_string_lossy().into_owned();
    for (name, bytes) in tree(&out) {
        assert!(
            !String::from_utf8_lossy(&bytes).contains(&tmp_str),
            "{name} embeds an absolute path"
        );
    }
}

#[test]
fn runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let repo = evolving_project(&tmp.path().join("repo"));
    run_pipeline(&config(&repo, &tmp.path().join("a"))).unwrap();
    run_pipeline(&config(&repo, &tmp.path().join("b"))).unwrap();
    assert_eq!(tree(&tmp.path().join("a")), tree(&tmp.path().join("b")));
}

#[test]
fn cathedral_only_history_exits_with_no_transition() {
    let tmp = tempfile::tempdir().unwrap();
    let repo = cathedral_only_project(&tmp.path().join("repo"));
    let out = tmp.path().join("out");
    let outcome = run_pipeline(&config(&repo, &out)).unwrap();
    assert!(!outcome.transition.found);
    assert_eq!(outcome.exit_code(), EXIT_NO_TRANSITION);
    let t: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("transition.json")).unwrap()).unwrap();
    assert_eq!(t["found"], false);
    assert!(validate_artifacts(&out).unwrap().iter().all(|c| c.ok()));
}

#[test]
fn unwritable_output_is_fatal() {
    let tmp = tempfile::tempdir().unwrap();
    let repo = evolving_project(&tmp.path().join("repo"));
    let blocker = tmp.path().join("file");
    std::fs::write(&blocker, "not a directory").unwrap();
    let err = run_pipeline(&config(&repo, &blocker.join("out"))).unwrap_err();
    assert!(matches!(err, PipelineError::Io { .. }), "{err}");
}

#[test]
fn commit_log_alone_runs_history_stages() {
    let tmp = tempfile::tempdir().unwrap();
    let repo = evolving_project(&tmp.path().join("repo"));
    let log = ingest_repository(&repo, &SourceFilter::java()).unwrap();
    let log_path = tmp.path().join("log.jsonl");
    let mut bytes = Vec::new();
    write_commit_log(&log, &mut bytes).unwrap();
    std::fs::write(&log_path, &bytes).unwrap();

    let from_repo = run_pipeline(&config(&repo, &tmp.path().join("full"))).unwrap();
    let out = tmp.path().join("log-only");
    let cfg = PipelineConfig {
        project: "fixture".into(),
        commit_log: Some(log_path),
        output_dir: out.clone(),
        ..Default::default()
    };
    let outcome = run_pipeline(&cfg).unwrap();
    assert_eq!(outcome.releases, 0);
    assert_eq!(outcome.transition, from_repo.transition);
    let files: Vec<String> = tree(&out).into_iter().map(|(n, _)| n).collect();
    assert_eq!(
        files,
        ["commits.jsonl", "report.json", "transition.json", "windows.csv"]
    );
    assert_eq!(std::fs::read(out.join("commits.jsonl")).unwrap(), bytes);
    assert_eq!(
        std::fs::read(out.join("windows.csv")).unwrap(),
        std::fs::read(tmp.path().join("full/windows.csv")).unwrap()
    );
}

#[test]
fn stages_need_their_inputs() {
    let tmp = tempfile::tempdir().unwrap();
    let repo = evolving_project(&tmp.path().join("repo"));
    let out = tmp.path().join("out");
    std::fs::create_dir_all(&out).unwrap();
    let cfg = config(&repo, &out);
    assert!(matches!(
        pipeline::stage_phases(&cfg),
        Err(PipelineError::MissingArtifact(_))
    ));
    pipeline::stage_ingest(&cfg).unwrap();
    pipeline::stage_phases(&cfg).unwrap();
    assert!(matches!(
        pipeline::stage_metrics(&cfg),
        Err(PipelineError::MissingArtifact(_))
    ));
    pipeline::stage_releases(&cfg).unwrap();
    pipeline::stage_deps(&cfg).unwrap();
    pipeline::stage_metrics(&cfg).unwrap();
    pipeline::stage_correlate(&cfg).unwrap();
    pipeline::stage_predict(&cfg).unwrap();
    pipeline::stage_report(&cfg).unwrap();

    // Staged execution matches a single run.
    run_pipeline(&config(&repo, &tmp.path().join("whole"))).unwrap();
    assert_eq!(tree(&out), tree(&tmp.path().join("whole")));
}

#[test]
fn conflicting_inputs_are_rejected() {
    let cfg = PipelineConfig {
        repo_path: Some("a".into()),
        commit_log: Some("b".into()),
        ..Default::default()
    };
    assert!(matches!(run_pipeline(&cfg), Err(PipelineError::Config(_))));
    assert!(matches!(
        run_pipeline(&PipelineConfig::default()),
        Err(PipelineError::Config(_))
    ));
}

#[test]
fn validate_flags_corrupt_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let repo = evolving_project(&tmp.path().join("repo"));
    let out = tmp.path().join("out");
    run_pipeline(&config(&repo, &out)).unwrap();
    std::fs::write(out.join("metrics/002-v0.3.csv"), "package,ca\n").unwrap();
    std::fs::remove_file(out.join("plot.svg")).unwrap();
    let bad: Vec<String> = validate_artifacts(&out)
        .unwrap()
        .into_iter()
        .filter(|c| !c.ok())
        .map(|c| c.path)
        .collect();
    assert_eq!(bad, ["metrics/002-v0.3.csv", "plot.svg"]);
}
