use lart::synthgen::{generate, Scenario, ScenarioConfig};
use lart::{detect, GroundTruth, LartConfig, LartError, Multiplex, Partition};

#[test]
fn generated_instance_survives_files() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generate(&ScenarioConfig::new(Scenario::S4, 11)).unwrap();

    let net = dir.path().join("net.txt");
    inst.multiplex.write(&net).unwrap();
    assert_eq!(Multiplex::read(&net).unwrap(), inst.multiplex);

    let truth = dir.path().join("truth.txt");
    inst.truth.write(&truth).unwrap();
    assert_eq!(GroundTruth::read(&truth).unwrap(), inst.truth);

    let det = detect(&inst.multiplex, &LartConfig::default()).unwrap();
    let part = dir.path().join("part.txt");
    det.partition.write(&part).unwrap();
    assert_eq!(Partition::read(&part).unwrap(), det.partition);
}

#[test]
fn missing_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let err = Multiplex::read(dir.path().join("absent.txt")).unwrap_err();
    assert!(matches!(err, LartError::Io { .. }));
}

#[test]
fn bad_line_reports_its_number() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.txt");
    std::fs::write(&path, "layers=1 nodes=3\n0 0 1\n0 1 x\n").unwrap();
    match Multiplex::read(&path).unwrap_err() {
        LartError::Parse { line, .. } => assert_eq!(line, 3),
        other => panic!("unexpected error {other}"),
    }
}
