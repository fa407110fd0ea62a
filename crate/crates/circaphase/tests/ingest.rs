use std::io::BufReader;

use circaphase::csv_io::{parse_csv, write_csv, CsvLayout};
use circaphase::dam::{parse_dam, write_dam};
use circaphase::scenario::{generate, Scenario};
use circaphase_core::synth::{generate_activity, Protocol, SynthSpec};
use circaphase_core::{light_at, TraceGroup};
use proptest::prelude::*;

#[test]
fn generated_incubators_survive_the_monitor_format() {
    let scenario = Scenario::table1(99);
    let dir = tempfile::tempdir().unwrap();
    for g in generate(&scenario).unwrap().iter().take(3) {
        let path = dir.path().join(format!("{}.txt", g.incubator.label));
        let f = std::fs::File::create(&path).unwrap();
        write_dam(std::io::BufWriter::new(f), &g.cohort.group, &g.protocol.schedule).unwrap();
        let f = std::fs::File::open(&path).unwrap();
        let dam = parse_dam(BufReader::new(f), &g.incubator.label, "file").unwrap();
        assert!(dam.gaps.is_empty());
        assert!(dam.warnings.is_empty());
        let n = g.cohort.group.len();
        assert_eq!(dam.group.len(), 32);
        for (orig, back) in g.cohort.group.traces.iter().zip(&dam.group.traces[..n]) {
            assert_eq!(orig.values, back.values);
            assert_eq!(orig.bin_minutes, back.bin_minutes);
            assert_eq!(orig.t0, back.t0);
        }
        assert!(dam.group.traces[n..].iter().all(|t| t.values.iter().all(|v| *v == 0.0)));
        // light state agrees at every bin midpoint
        for i in 0..g.protocol.n_bins() {
            let t = (i as f64 + 0.5) / 60.0;
            assert_eq!(
                light_at(&g.protocol.schedule, t).round(),
                light_at(&dam.schedule, t),
                "bin {i}"
            );
        }
    }
}

#[test]
fn corrupted_export_reimports_exactly() {
    let (t, _) = generate_activity(&SynthSpec::default(), &Protocol::dd(2, 1), "f").unwrap();
    let noisy = circaphase_core::synth::corrupt(&t, 10.0, 4).unwrap();
    let group = TraceGroup::new("g", vec![noisy]).unwrap();
    let mut buf = Vec::new();
    write_csv(&mut buf, &group).unwrap();
    assert!(String::from_utf8_lossy(&buf).contains('e'));
    let back = parse_csv(buf.as_slice(), &CsvLayout::default(), "g", "mem").unwrap();
    assert_eq!(back, group);
}

fn small_monitor(bins: usize) -> (TraceGroup, Vec<u8>) {
    let traces = (0..4)
        .map(|c| {
            let values = (0..bins).map(|i| ((i * 7 + c * 3) % 5) as f64).collect();
            circaphase_core::ActivityTrace::new(format!("m-{c}"), "2024-03-01T00:00:00", 1, values).unwrap()
        })
        .collect();
    let group = TraceGroup::new("m", traces).unwrap();
    let mut buf = Vec::new();
    write_dam(&mut buf, &group, &circaphase_core::LightSchedule::dark()).unwrap();
    (group, buf)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dropped_readings_are_always_reported(
        bins in 5usize..200,
        drops in prop::collection::btree_set(2usize..199, 0..20),
    ) {
        let (group, buf) = small_monitor(bins);
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        // the first two readings fix the bin width and the last fixes the extent
        let dropped: Vec<usize> = drops.into_iter().filter(|d| *d < bins - 1).collect();
        let kept: String = lines
            .iter()
            .enumerate()
            .filter(|(i, _)| !dropped.contains(i))
            .map(|(_, l)| format!("{l}\n"))
            .collect();
        let dam = parse_dam(kept.as_bytes(), "m", "mem").unwrap();
        prop_assert_eq!(dam.group.traces[0].len(), bins);
        let missing: usize = dam.gaps.iter().map(|g| g.missing_bins).sum();
        prop_assert_eq!(missing, dropped.len());
        for (c, orig) in group.traces.iter().enumerate() {
            for (i, v) in dam.group.traces[c].values.iter().enumerate() {
                let expected = if dropped.contains(&i) { 0.0 } else { orig.values[i] };
                prop_assert_eq!(*v, expected);
            }
        }
        for g in &dam.gaps {
            prop_assert!((g.first_bin..g.first_bin + g.missing_bins).all(|b| dropped.contains(&b)));
        }
    }
}
