use std::path::PathBuf;

use lvolterra::export::{export_trajectory, write_trajectory_csv};
use lvolterra::gen::{named_operator, NamedOperator};
use lvolterra::trajectory::{simulate, SimulationOptions};
use lvolterra::{HeredityTensor, LVolterraOperator, OperatorDocument, SimplexPoint};

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(format!("{name}.op"))
}

fn orbit_rows(name: NamedOperator, x0: SimplexPoint<f64>, steps: usize) -> Vec<Vec<String>> {
    let op = LVolterraOperator::new(named_operator(name)).unwrap();
    let mut opts = SimulationOptions::new(steps);
    opts.detect_cycles = false;
    let traj = simulate(&op, &x0, &opts).unwrap();
    let mut buf = Vec::new();
    write_trajectory_csv(&traj, &mut buf).unwrap();
    let mut rdr = csv::Reader::from_reader(buf.as_slice());
    rdr.records().map(|r| r.unwrap().iter().map(String::from).collect()).collect()
}

#[test]
fn goldens_match_named_operators_and_round_trip() {
    for name in NamedOperator::ALL {
        let text = std::fs::read_to_string(golden(name.name())).unwrap();
        let doc = OperatorDocument::parse(&text).unwrap();
        assert_eq!(doc.to_text(), text, "{name}");
        let p: HeredityTensor<f64> = doc.to_tensor().unwrap();
        assert_eq!(p, named_operator::<f64>(name), "{name}");
    }
}

#[test]
fn identity_one_step_gives_two_identical_rows() {
    let rows = orbit_rows(NamedOperator::Identity, SimplexPoint::new(vec![0.2, 0.3, 0.5]).unwrap(), 1);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][1..], rows[1][1..]);
}

#[test]
fn c1_vertex_cycle_rows_alternate_exactly() {
    let rows = orbit_rows(NamedOperator::C1, SimplexPoint::vertex(3, 1), 4);
    assert_eq!(rows.len(), 5);
    let one = format!("{:.16e}", 1.0);
    let zero = format!("{:.16e}", 0.0);
    for (n, row) in rows.iter().enumerate() {
        let (a, b) = if n % 2 == 0 { (&one, &zero) } else { (&zero, &one) };
        assert_eq!(row[2], *a);
        assert_eq!(row[3], *b);
        assert_eq!(row[1], zero);
    }
}

#[test]
fn w1_rows_sum_to_one() {
    let rows = orbit_rows(NamedOperator::W1, SimplexPoint::uniform(3), 300);
    for row in rows {
        let s: f64 = row[1..].iter().map(|v| v.parse::<f64>().unwrap()).sum();
        assert!((s - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn export_errors_name_the_path() {
    let op = LVolterraOperator::new(named_operator::<f64>(NamedOperator::W1)).unwrap();
    let traj = simulate(&op, &SimplexPoint::uniform(3), &SimulationOptions::new(2)).unwrap();
    let err = export_trajectory(&traj, &PathBuf::from("/nonexistent/dir/x.csv")).unwrap_err();
    assert!(err.to_string().contains("/nonexistent/dir/x.csv"));
}
