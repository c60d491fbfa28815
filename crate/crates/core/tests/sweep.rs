use mhd_evans::sweep::{canonical_lines, read_records, run_sweep, RecordStatus, SweepAxes, SweepSpec};
use std::io::Write;

fn small_axes() -> SweepAxes {
    SweepAxes {
        gamma: vec![1.4, 5.0 / 3.0],
        v_plus: vec![0.2, 0.6],
        b1: vec![0.5, 1.5],
        mu0: vec![1.0],
        sigma: vec![1.0],
    }
}

fn spec(path: std::path::PathBuf, workers: usize) -> SweepSpec {
    let mut s = SweepSpec::new(small_axes(), path);
    s.workers = Some(workers);
    s.record_timing = false;
    s.n_points = 60;
    s
}

#[test]
fn worker_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let one = spec(dir.path().join("one.jsonl"), 1);
    let eight = spec(dir.path().join("eight.jsonl"), 8);
    run_sweep(&one).unwrap();
    run_sweep(&eight).unwrap();
    let a = canonical_lines(&read_records(&one.output).unwrap()).unwrap();
    let b = canonical_lines(&read_records(&eight.output).unwrap()).unwrap();
    assert_eq!(a.len(), 8);
    assert_eq!(a, b);
}

#[test]
fn interrupted_run_resumes() {
    let dir = tempfile::tempdir().unwrap();
    let full = spec(dir.path().join("full.jsonl"), 2);
    run_sweep(&full).unwrap();
    let text = std::fs::read_to_string(&full.output).unwrap();
    let lines: Vec<&str> = text.lines().collect();

    // three complete records and half of a fourth
    let cut = spec(dir.path().join("cut.jsonl"), 2);
    {
        let mut f = std::fs::File::create(&cut.output).unwrap();
        for l in &lines[..3] {
            writeln!(f, "{l}").unwrap();
        }
        write!(f, "{}", &lines[3][..lines[3].len() / 2]).unwrap();
    }
    let summary = run_sweep(&cut).unwrap();
    assert_eq!(summary.resumed, 3);
    assert_eq!(summary.computed, 5);
    assert_eq!(summary.ok, 8);

    let resumed = read_records(&cut.output).unwrap();
    assert_eq!(resumed.len(), 8);
    assert_eq!(
        canonical_lines(&resumed).unwrap(),
        canonical_lines(&read_records(&full.output).unwrap()).unwrap()
    );
    // every line of the repaired file parses
    for l in std::fs::read_to_string(&cut.output).unwrap().lines() {
        serde_json::from_str::<serde_json::Value>(l).unwrap();
    }

    let again = run_sweep(&cut).unwrap();
    assert_eq!((again.resumed, again.computed), (8, 0));
}

#[test]
fn records_are_complete() {
    let dir = tempfile::tempdir().unwrap();
    let s = spec(dir.path().join("r.jsonl"), 2);
    let summary = run_sweep(&s).unwrap();
    assert_eq!(summary.tuples, 8);
    for r in read_records(&s.output).unwrap() {
        assert_eq!(r.status, RecordStatus::Ok, "{}", r.key);
        assert_eq!(r.winding, Some(0), "{}", r.key);
        assert!(r.wall_time.is_none());
        assert!(r.radius >= 1.05);
        assert!(r.n_evals > 0);
    }
}

#[test]
fn spec_file_round_trip() {
    let s = spec("out.jsonl".into(), 3);
    let text = serde_json::to_string(&s).unwrap();
    let back: SweepSpec = serde_json::from_str(&text).unwrap();
    assert_eq!(back.axes.tuples(), s.axes.tuples());
    assert_eq!(back.workers, Some(3));
    // minimal spec: defaults fill in
    let min: SweepSpec = serde_json::from_str(
        r#"{"axes":{"gamma":[1.4],"v_plus":[0.5],"b1":[1],"mu0":[1],"sigma":[1]},"output":"x.jsonl"}"#,
    )
    .unwrap();
    assert_eq!(min.n_points, 120);
    assert!(min.record_timing);
}
