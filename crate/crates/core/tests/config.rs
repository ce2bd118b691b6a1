use impdde::config::{load_spec, parse_spec, spec_to_json, ConfigError};
use impdde::{solve, ImpulseSchedule, StepControl};

const CONFIG: &str = r#"{
  "dim": 2,
  "terms": [
    {"coefficient": [[0.6, -0.3], [0.2, 0.4]], "delay": {"lag": 0.5}},
    {"coefficient": [{"t": 0.0, "matrix": [[1, 0], [0, 1]]}, {"t": 1.0, "matrix": [[0, 0], [0, 0]]}],
     "delay": {"lag": 0.0}}
  ],
  "impulses": {"points": [0.75, 1.6], "matrices": [[[0.5, 0.1], [0, -0.8]], [[1.2, 0], [0.3, 0.5]]],
               "offsets": [[0.1, -0.2], [0, 0.3]]},
  "forcing": [{"t": 0.0, "value": [1, 0]}, {"t": 0.6, "value": [0, -0.5]}],
  "phi": [0.2, -0.4],
  "x0": [1.0, 0.5],
  "horizon": 2.5
}"#;

#[test]
fn file_round_trip_preserves_solution() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("system.json");
    std::fs::write(&path, CONFIG).unwrap();
    let spec = load_spec(&path).unwrap();
    assert!(matches!(&spec.impulses, ImpulseSchedule::Explicit(list) if list.len() == 2));

    let canonical = spec_to_json(&spec);
    let again = parse_spec(&canonical).unwrap();
    assert_eq!(spec, again);
    assert_eq!(canonical, spec_to_json(&again));

    let ctl = StepControl::new(1e-2).unwrap();
    assert_eq!(
        solve(&spec, &ctl).unwrap().to_csv(),
        solve(&again, &ctl).unwrap().to_csv()
    );
}

#[test]
fn errors_are_classified() {
    assert!(matches!(
        load_spec("/definitely/not/here.json"),
        Err(ConfigError::Io { .. })
    ));
    assert!(matches!(
        parse_spec("{\"dim\": 1,"),
        Err(ConfigError::Parse { .. })
    ));
    let err = parse_spec(r#"{"dim": 2, "horizon": 1, "x0": [1]}"#).unwrap_err();
    assert!(
        matches!(err, ConfigError::Schema { ref field, .. } if field == "x0"),
        "{err}"
    );
}
