use melab::formats::{
    labeling_table, loop_system_to_spec, measure_to_json, parse_measure, parse_shift_spec, read_shift_spec,
    shift_spec_to_json,
};
use melab::{corpus, LabError};
use melab_core::entropy::{gurevich_entropy_truncation, loop_counts_entropy};
use melab_core::recoding::build_loop_system;
use melab_core::{ShiftSpec, Vertex};

#[test]
fn corpus_graphs_round_trip_through_json() {
    for (name, g) in corpus::graphs() {
        let spec = ShiftSpec::Finite(g);
        let back = parse_shift_spec(&shift_spec_to_json(&spec)).unwrap();
        assert_eq!(back, spec, "{name}");
    }
}

#[test]
fn corpus_measures_round_trip_through_json() {
    for (name, _, mu) in corpus::measures().unwrap() {
        let back = parse_measure(&measure_to_json(&mu)).unwrap();
        assert_eq!(back.support(), mu.support(), "{name}");
        for &u in mu.support() {
            for &v in mu.support() {
                assert!((back.transition(u, v) - mu.transition(u, v)).abs() < 1e-15, "{name}");
            }
        }
    }
}

#[test]
fn exported_loop_system_keeps_the_entropy() {
    let g = corpus::graph("hub5").unwrap();
    let ls = build_loop_system(&g, 0, 60).unwrap();
    let spec = loop_system_to_spec(&ls).unwrap();
    let text = shift_spec_to_json(&spec);
    let ShiftSpec::Loops(lc) = parse_shift_spec(&text).unwrap() else {
        panic!("loops document expected");
    };
    let spectral = gurevich_entropy_truncation(&ShiftSpec::Finite(g), 1, 1e-9).unwrap().value;
    let renewal = loop_counts_entropy(&lc, 1e-12).unwrap().value;
    assert!((spectral - renewal).abs() < 1e-6);
    let rows = labeling_table(&ls, 3).unwrap();
    let level2: Vec<&String> = rows.iter().filter(|r| r.0 == 2).map(|r| &r.2).collect();
    // interiors of length 2 at the hub: 0 x y 0
    assert!(level2.iter().all(|w| w.starts_with("0,") && w.ends_with(",0")));
    assert_eq!(level2.len(), ls.count_u64(2).unwrap() as usize);
}

#[test]
fn file_errors_name_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("neg.json");
    std::fs::write(&p, r#"{"type": "loops", "counts": [1, -2]}"#).unwrap();
    let err = read_shift_spec(&p).unwrap_err();
    assert!(matches!(err, LabError::Parse { .. }));
    assert!(err.to_string().contains("neg.json"));
    assert_eq!(err.exit_code(), 1);
    let missing = read_shift_spec(&dir.path().join("missing.json")).unwrap_err();
    assert!(matches!(missing, LabError::Io { .. }));
}

#[test]
fn empty_shift_is_rejected() {
    let err = parse_shift_spec(r#"{"type": "finite", "vertices": 3, "edges": [[0, 1], [1, 0]]}"#).unwrap_err();
    assert!(err.to_string().contains("no outgoing edge"));
    let zero: Vec<Vertex> = Vec::new();
    assert!(parse_shift_spec(&format!(r#"{{"type": "finite", "vertices": 0, "edges": {zero:?}}}"#)).is_err());
}
