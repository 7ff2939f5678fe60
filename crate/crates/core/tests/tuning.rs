//! Tuning pipeline driven by a scripted clock, plus table persistence.

use std::collections::HashMap;

use mpmm::timing::{Clock, Probe};
use mpmm::tuner::{
    extract_threshold, load_table, save_table, tune_one_with, tune_sweep_with, LookupSource,
    SelectionMode, SweepEvent, TuningConfig, TuningTable,
};
use mpmm::{AlgorithmChoice, Error, PrecisionSpec, Result};

/// Deterministic times: a slice costs `per_row[n_min] * rows`; full runs
/// come from a closure of (algorithm, n).
struct Scripted<F: FnMut(Probe) -> f64> {
    time: F,
    calls: HashMap<&'static str, usize>,
}

impl<F: FnMut(Probe) -> f64> Clock for Scripted<F> {
    fn measure(&mut self, probe: Probe, run: &mut dyn FnMut()) -> Result<f64> {
        run();
        let kind = match probe {
            Probe::Slice { .. } => "slice",
            Probe::Full(_) => "full",
        };
        *self.calls.entry(kind).or_default() += 1;
        let t = (self.time)(probe);
        mpmm::timing::check_elapsed(probe, t)
    }
}

fn cfg(dims: Vec<usize>) -> TuningConfig {
    TuningConfig {
        dims,
        block_candidates: vec![4, 8, 16],
        thread_counts: vec![1],
        strassen_cutoff: 8,
        ..Default::default()
    }
}

#[test]
fn equal_times_pick_block() {
    let mut clock = Scripted {
        time: |_| 1.0,
        calls: HashMap::new(),
    };
    let out = tune_one_with(PrecisionSpec::DD, 16, 1, &cfg(vec![16]), &mut clock).unwrap();
    // Equal slice times: n_min = 4 times 8 of 16 rows and predicts 2 s;
    // 8 and 16 both time all rows and tie, so the smaller wins.
    assert_eq!(out.result.best_n_min, 8);
    assert_eq!(out.result.winner, AlgorithmChoice::Block { n_min: 8 });
    assert_eq!(out.records.len(), 3);
    assert!(out.result.is_consistent());
}

#[test]
fn prediction_scales_slice_time() {
    // Slice time proportional to rows, with candidate 8 cheapest per row.
    let time = |p: Probe| match p {
        Probe::Slice { n_min, rows } => rows as f64 * if n_min == 8 { 0.01 } else { 0.02 },
        Probe::Full(AlgorithmChoice::Block { .. }) => 0.33,
        Probe::Full(_) => 1.0,
    };
    let mut clock = Scripted {
        time,
        calls: HashMap::new(),
    };
    let out = tune_one_with(PrecisionSpec::DD, 32, 1, &cfg(vec![32]), &mut clock).unwrap();
    let r = out.result;
    assert_eq!(r.best_n_min, 8);
    // 16 slice rows out of 32.
    assert!((r.prediction_time_s - 0.16).abs() < 1e-15);
    assert!((r.predicted_s - 0.32).abs() < 1e-15);
    assert!((r.rel_diff - (0.33 - 0.32) / 0.33).abs() < 1e-15);
    assert_eq!(r.winner, AlgorithmChoice::Block { n_min: 8 });
    assert_eq!(clock.calls["slice"], 3);
    assert_eq!(clock.calls["full"], 3);
}

#[test]
fn exhaustive_mode_times_every_candidate() {
    let time = |p: Probe| match p {
        Probe::Full(AlgorithmChoice::Block { n_min }) => 1.0 + (n_min as f64 - 8.0).abs(),
        _ => 5.0,
    };
    let mut clock = Scripted {
        time,
        calls: HashMap::new(),
    };
    let c = TuningConfig {
        mode: SelectionMode::Exhaustive,
        ..cfg(vec![32])
    };
    let out = tune_one_with(PrecisionSpec::DD, 32, 1, &c, &mut clock).unwrap();
    assert_eq!(out.result.best_n_min, 8);
    assert_eq!(out.exhaustive.len(), 3);
    assert_eq!(out.result.rel_diff, 0.0);
    // Three block sizes plus simple and Strassen.
    assert_eq!(clock.calls["full"], 5);
    assert!(!clock.calls.contains_key("slice"));
}

#[test]
fn sweep_finds_threshold_and_records_gaps() {
    // Strassen wins from n = 24 up; n = 20 reports a zero time. With the
    // single candidate 16 the slice covers all rows for n <= 32, which
    // tells the clock the current n.
    let mut current_n = 0usize;
    let time = move |p: Probe| match p {
        Probe::Slice { rows, .. } => {
            current_n = rows;
            0.001 * rows as f64
        }
        Probe::Full(AlgorithmChoice::Strassen { .. }) if current_n >= 24 => 0.5,
        Probe::Full(AlgorithmChoice::Block { .. }) if current_n == 20 => 0.0,
        Probe::Full(_) => 1.0,
    };
    let mut clock = Scripted {
        time,
        calls: HashMap::new(),
    };
    let c = TuningConfig {
        simple_max_n: Some(16),
        block_candidates: vec![16],
        ..cfg(vec![8, 16, 20, 24, 32])
    };
    let mut events = 0;
    let mut gap_events = 0;
    let table = tune_sweep_with(&c, &mut clock, |e| {
        events += 1;
        if let SweepEvent::Gap(_) = e {
            gap_events += 1;
        }
    })
    .unwrap();
    assert_eq!((events, gap_events), (5, 1));
    assert_eq!(table.gaps.len(), 1);
    assert_eq!(table.gaps[0].n, 20);
    assert!(matches!(
        tune_one_with(
            PrecisionSpec::DD,
            20,
            1,
            &c,
            &mut Scripted {
                time: |_| 0.0,
                calls: HashMap::new()
            }
        ),
        Err(Error::Measurement(_))
    ));
    let ns: Vec<usize> = table.rows.iter().map(|r| r.n).collect();
    assert_eq!(ns, vec![8, 16, 24, 32]);
    assert!(table.rows[0].simple_time_s.is_some());
    assert!(table.rows[3].simple_time_s.is_none());
    assert_eq!(table.threshold(PrecisionSpec::DD, 1), Some(24));
    assert_eq!(
        extract_threshold(&table.rows, PrecisionSpec::DD, 1),
        Some(24)
    );
    assert!(table.thresholds_consistent());
    assert!(table.rows.iter().all(|r| r.is_consistent()));
    assert!(table.total_tuning_time_s > 0.0);

    let path = std::env::temp_dir().join(format!("mpmm-sweep-{}.tbl", std::process::id()));
    save_table(&table, &path).unwrap();
    let back = load_table(&path).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert_eq!(back, table);
}

#[test]
fn real_sweep_on_small_grid() {
    let c = TuningConfig {
        precisions: vec![PrecisionSpec::DD, PrecisionSpec::ap(80).unwrap()],
        dims: vec![16, 24],
        thread_counts: vec![1, 2],
        ..cfg(vec![])
    };
    let mut clock = mpmm::timing::WallClock::default();
    let table = tune_sweep_with(&c, &mut clock, |_| {}).unwrap();
    assert_eq!(table.rows.len(), 8);
    assert!(table.gaps.is_empty());
    assert_eq!(table.thresholds.len(), 4);
    assert!(table.rows.iter().all(|r| r.is_consistent()));
    assert_eq!(TuningTable::from_text(&table.to_text()).unwrap(), table);
}

#[test]
fn reference_fixture_parses_and_re_emits() {
    let text = include_str!("fixtures/xeon_reference.tbl");
    let table = TuningTable::from_text(text).unwrap();
    assert_eq!(table.to_text(), text);
    assert_eq!(table.rows.len(), 16);
    assert!(table.thresholds_consistent());

    let dd1 = &table.rows[0];
    assert_eq!(
        (dd1.prec, dd1.n, dd1.threads, dd1.best_n_min),
        (PrecisionSpec::DD, 1024, 1, 64)
    );
    assert_eq!(dd1.block_time_s, 45.97);
    assert_eq!(dd1.prediction_time_s, 5.77);
    assert_eq!(dd1.predicted_s, 46.1);
    assert_eq!(format!("{:.2}%", dd1.rel_diff * 100.0), "0.28%");
    assert_eq!(dd1.strassen_time_s, 25.54);
    assert_eq!(
        dd1.winner,
        AlgorithmChoice::Strassen {
            cutoff: 64,
            leaf_n_min: 64
        }
    );

    let ap128 = PrecisionSpec::ap(128).unwrap();
    let hit = table.lookup_best(ap128, 1024, 2);
    assert_eq!(hit.choice, AlgorithmChoice::Block { n_min: 32 });
    assert_eq!(hit.source, LookupSource::Exact);
    let ap1024 = PrecisionSpec::ap(1024).unwrap();
    assert_eq!(table.lookup_best(ap1024, 1024, 1).choice.name(), "strassen");
    let above = table.lookup_best(PrecisionSpec::DD, 2048, 1);
    assert_eq!(above.source, LookupSource::Threshold(1024));
    assert!(table.lookup_best(PrecisionSpec::DD, 512, 1).is_fallback());
    assert!(table.rows.iter().all(|r| r.is_consistent()));
}

#[test]
fn empty_table_round_trips() {
    let t = TuningTable::default();
    assert_eq!(TuningTable::from_text(&t.to_text()).unwrap(), t);
}
