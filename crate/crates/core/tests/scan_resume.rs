use posmap::bloch_scan::{scan, ScanGrid};
use posmap::positivity::SearchSettings;
use posmap::Error;

fn settings() -> SearchSettings {
    SearchSettings {
        restarts: 6,
        seed: 99,
        ..Default::default()
    }
}

#[test]
fn interrupted_scan_resumes_to_identical_grid() {
    let mut full = ScanGrid::new(6, 3, 6, 4, settings()).unwrap();
    let stats = scan(&mut full, None, None).unwrap();
    // Two pole rows plus 6 x 2 interior points.
    assert_eq!(stats.evaluated, 2 + 12);
    assert_eq!(stats.remaining, 0);

    let dir = tempfile::tempdir().unwrap();
    let ckpt = dir.path().join("grid.json");
    let mut partial = ScanGrid::resume_or_new(&ckpt, 6, 3, 6, 4, settings()).unwrap();
    let stats = scan(&mut partial, Some(&ckpt), Some(5)).unwrap();
    assert_eq!(stats.evaluated, 5);
    assert!(stats.remaining > 0);
    drop(partial);

    let on_disk = ScanGrid::load(&ckpt).unwrap();
    assert_eq!(on_disk.pending(), stats.remaining);
    let mut resumed = ScanGrid::resume_or_new(&ckpt, 6, 3, 6, 4, settings()).unwrap();
    let stats = scan(&mut resumed, Some(&ckpt), None).unwrap();
    assert_eq!(stats.evaluated, 14 - 5);
    assert_eq!(resumed, full);
    assert_eq!(
        serde_json::to_string(&ScanGrid::load(&ckpt).unwrap()).unwrap(),
        serde_json::to_string(&full).unwrap()
    );

    // A finished grid is left alone.
    let stats = scan(&mut resumed, Some(&ckpt), None).unwrap();
    assert_eq!(stats.evaluated, 0);
    assert!(!dir.path().join("grid.json.tmp").exists());
}

#[test]
fn poles_share_one_value() {
    let mut g = ScanGrid::new(6, 3, 6, 3, settings()).unwrap();
    scan(&mut g, None, Some(2)).unwrap();
    for j in [0, 2] {
        let first = g.get(0, j).unwrap();
        for i in 1..6 {
            assert_eq!(g.get(i, j).unwrap(), first);
        }
    }
    assert!((0..6).all(|i| g.get(i, 1).is_none()));
}

#[test]
fn mismatched_checkpoint_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let ckpt = dir.path().join("grid.json");
    ScanGrid::new(6, 3, 6, 4, settings()).unwrap().save(&ckpt).unwrap();
    let other = SearchSettings {
        seed: 1,
        ..settings()
    };
    assert!(matches!(
        ScanGrid::resume_or_new(&ckpt, 6, 3, 6, 4, other),
        Err(Error::InvalidState(_))
    ));
    assert!(ScanGrid::resume_or_new(&ckpt, 9, 3, 6, 4, settings()).is_err());
}

#[test]
fn csv_export() {
    let mut g = ScanGrid::new(6, 3, 3, 3, settings()).unwrap();
    scan(&mut g, None, None).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("grid.csv");
    g.export_csv(&path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "phi,theta,lambda_max,converged");
    assert_eq!(lines.len(), 1 + 9);
    for line in &lines[1..] {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), 4);
        let lam: f64 = cols[2].parse().unwrap();
        assert!((0.0..=6.0).contains(&lam));
        assert!(cols[3] == "true" || cols[3] == "false");
    }
}
