//! Runs every experiment, prints one PASS/FAIL line per acceptance criterion,
//! then exits non-zero if any criterion outside `KNOWN_RED` failed.
//!
//! Criterion 12 re-runs each experiment with the same seed on a different
//! worker count and compares every CSV byte for byte.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use mbus_cli::{run, RunOptions, RunReport, EXPERIMENTS};

/// Criteria that fail with the documented model parameters; see README "Acceptance status".
const KNOWN_RED: [u8; 3] = [1, 2, 9];

fn run_into(id: &str, dir: &Path, workers: Option<usize>) -> RunReport {
    let opts = RunOptions { experiment: id.into(), out: Some(dir.to_path_buf()), workers, ..Default::default() };
    run(&opts).unwrap_or_else(|e| panic!("{id}: {e}"))
}

fn csv_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect()
}

#[derive(Default)]
struct Tally {
    pass: bool,
    seen: bool,
    lines: Vec<String>,
}

fn main() -> ExitCode {
    let root = tempfile::tempdir().unwrap();
    let mut tally: BTreeMap<u8, Tally> = (0..=12).map(|c| (c, Tally { pass: true, ..Default::default() })).collect();

    for e in &EXPERIMENTS {
        let start = Instant::now();
        let a = root.path().join(e.id).join("a");
        let b = root.path().join(e.id).join("b");
        let first = run_into(e.id, &a, None);
        let second = run_into(e.id, &b, Some(2));
        eprintln!("ran {} twice in {:.1} s", e.id, start.elapsed().as_secs_f64());

        for c in &first.outcome.checks {
            let t = tally.get_mut(&c.criterion).unwrap();
            t.seen = true;
            t.pass &= c.pass;
            if !c.pass {
                t.lines.push(format!("{}: {} = {:.4e} ({})", e.id, c.name, c.value, c.bound));
            }
        }
        for w in &first.outcome.warnings {
            tally.get_mut(&0).unwrap().lines.push(format!("{}: warning: {w}", e.id));
        }

        let (fa, fb) = (csv_files(&a), csv_files(&b));
        let same = !fa.is_empty() && fa == fb;
        let t = tally.get_mut(&12).unwrap();
        t.seen = true;
        t.pass &= same;
        if !same {
            let differing: Vec<_> = fa.keys().filter(|k| fa.get(*k) != fb.get(*k)).cloned().collect();
            t.lines.push(format!("{}: CSVs differ: {differing:?}", e.id));
        }
        assert_eq!(first.pass, second.pass, "{} verdict changed between runs", e.id);
    }

    let mut unexpected = Vec::new();
    for (c, t) in &tally {
        let label = if *c == 0 { "invariants  ".to_string() } else { format!("criterion {c:<2}") };
        let status = match (t.seen, t.pass) {
            (false, _) => "MISSING",
            (true, true) => "PASS",
            (true, false) => "FAIL",
        };
        let note = if !t.pass && KNOWN_RED.contains(c) { " (known red, see README)" } else { "" };
        println!("{label} {status}{note}");
        for l in &t.lines {
            println!("    {l}");
        }
        if !(t.seen && t.pass) && !KNOWN_RED.contains(c) {
            unexpected.push(*c);
        }
    }
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected failures: {unexpected:?}");
        ExitCode::FAILURE
    }
}
