use std::path::PathBuf;

use qtg_core::formats::{from_json, load_instance, parse_instance, to_json, Format, FormatOptions};
use qtg_core::{Error, ProblemKind};

fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(rel)
}

#[test]
fn json_fixtures_parse_and_round_trip() {
    for (file, kind, n, d) in [
        ("instances/qkp_small.json", ProblemKind::Qkp, 6, 1),
        ("instances/qkp_sparse.json", ProblemKind::Qkp, 8, 1),
        ("instances/mdkp_small.json", ProblemKind::Mdkp, 7, 2),
    ] {
        let inst = parse_instance(fixture(file), Format::Json).unwrap();
        assert_eq!((inst.kind(), inst.n(), inst.d()), (kind, n, d));
        assert_eq!(from_json(&to_json(&inst), "round-trip").unwrap(), inst);
    }
}

#[test]
fn orlib_fixture_carries_its_optimum() {
    let loaded = load_instance(fixture("orlib/mknap_tiny.txt"), Format::Orlib, &FormatOptions::default()).unwrap();
    assert_eq!(loaded.instance.name(), "mknap_tiny");
    assert_eq!(loaded.instance.capacities(), &[12, 11]);
    assert_eq!(loaded.known_optimum, Some(25));
    let opt = qtg_core::baseline::exact_optimum(&loaded.instance, 24).unwrap();
    assert_eq!(Some(opt.profit()), loaded.known_optimum);
}

#[test]
fn missing_files_report_the_path() {
    let err = parse_instance(fixture("instances/nope.json"), Format::Json).unwrap_err();
    assert!(matches!(err, Error::Io { .. }));
    assert!(err.to_string().contains("nope.json"));
}

#[test]
fn shipped_cost_models_load() {
    use qtg_core::resources::CostModel;
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../cost_models");
    assert_eq!(CostModel::load(root.join("default.toml")).unwrap(), CostModel::default());
    let heavy = CostModel::load(root.join("toffoli_heavy.toml")).unwrap();
    assert_eq!((heavy.toffoli_cycles, heavy.measurement_cycles, heavy.single_qubit_cycles), (4, 10, 1));
    assert!(matches!(CostModel::from_toml_str("toffoli_cycles = 0"), Err(Error::CostModel(_))));
    assert!(CostModel::from_toml_str("t_gate = 3").is_err());
}
