//! Pins output file names, CSV column schemas and the manifest layout.

use std::fs;
use std::path::Path;

use updown_runner::config::{parse_config, ScenarioId};
use updown_runner::output::{write_run, Format};
use updown_runner::scenarios::run;

fn golden(name: &str) -> String {
    fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)).unwrap()
}

fn run_into(id: ScenarioId, dir: &Path) {
    let text = id.default_config().unwrap();
    let mut config = parse_config(text).unwrap();
    if let Some(f3) = config.fig3.as_mut() {
        f3.scan_points = 101;
    }
    let out = run(&config).unwrap();
    write_run(&dir.join(id.as_str()), Format::Csv, &out, text, config.rng_seed).unwrap();
}

#[test]
fn csv_schemas() {
    let dir = tempfile::tempdir().unwrap();
    let mut listing = String::new();
    for id in [ScenarioId::Fig3, ScenarioId::Fig4, ScenarioId::Fig5] {
        run_into(id, dir.path());
        let sub = dir.path().join(id.as_str());
        let mut names: Vec<String> = fs::read_dir(&sub)
            .unwrap()
            .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
            .filter(|n| n.ends_with(".csv"))
            .collect();
        names.sort();
        for n in names {
            let body = fs::read_to_string(sub.join(&n)).unwrap();
            listing.push_str(&format!("{id}/{n}: {}\n", body.lines().next().unwrap()));
        }
    }
    assert_eq!(listing, golden("schemas.txt"));
}

#[test]
fn budget_table_and_manifest_layout() {
    let dir = tempfile::tempdir().unwrap();
    run_into(ScenarioId::Fig4, dir.path());
    let sub = dir.path().join("fig4");
    assert_eq!(fs::read_to_string(sub.join("budget.csv")).unwrap(), golden("fig4_budget.csv"));

    let manifest = fs::read_to_string(sub.join("manifest")).unwrap();
    let keys: String = manifest
        .lines()
        .filter(|l| !l.is_empty())
        .map(|l| format!("{}\n", l.split(" = ").next().unwrap()))
        .collect();
    assert_eq!(keys, golden("fig4_manifest_keys.txt"));
    assert!(!manifest.to_lowercase().contains("time"), "manifest must not carry timestamps");
}
