//! CSV export of recorded orbits.

use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::scalar::Real;
use crate::trajectory::Trajectory;

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("trajectory has no points")]
    Empty,
    #[error("ternary coordinates need m = 3, got m = {0}")]
    NotTernary(usize),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

fn full(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> ExportError + '_ {
    move |source| ExportError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

/// Header `step,x_1,...,x_m`, one row per recorded point, 17 significant digits.
pub fn write_trajectory_csv<T: Real, W: Write>(traj: &Trajectory<T>, out: W) -> Result<(), csv::Error> {
    let m = traj.points.first().map_or(0, |p| p.dim());
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["step".to_string()];
    header.extend((1..=m).map(|i| format!("x_{i}")));
    w.write_record(&header)?;
    for (step, p) in traj.steps.iter().zip(&traj.points) {
        let mut row = vec![step.to_string()];
        row.extend(p.coords().iter().map(|c| full(c.as_f64())));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Barycentric-to-plane map `u = x_2 + x_3/2`, `v = (√3/2) x_3`.
pub fn ternary_coordinates(x: &[f64]) -> (f64, f64) {
    (x[1] + 0.5 * x[2], 3f64.sqrt() / 2.0 * x[2])
}

pub fn write_ternary_csv<T: Real, W: Write>(traj: &Trajectory<T>, out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["step", "u", "v"])?;
    for (step, p) in traj.steps.iter().zip(&traj.points) {
        let x: Vec<f64> = p.coords().iter().map(|c| c.as_f64()).collect();
        let (u, v) = ternary_coordinates(&x);
        w.write_record([step.to_string(), full(u), full(v)])?;
    }
    w.flush()?;
    Ok(())
}

fn create(path: &Path) -> Result<std::fs::File, ExportError> {
    std::fs::File::create(path).map_err(|source| ExportError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn export_trajectory<T: Real>(traj: &Trajectory<T>, path: &Path) -> Result<(), ExportError> {
    if traj.points.is_empty() {
        return Err(ExportError::Empty);
    }
    write_trajectory_csv(traj, create(path)?).map_err(csv_err(path))
}

pub fn export_ternary<T: Real>(traj: &Trajectory<T>, path: &Path) -> Result<(), ExportError> {
    let m = traj.points.first().ok_or(ExportError::Empty)?.dim();
    if m != 3 {
        return Err(ExportError::NotTernary(m));
    }
    write_ternary_csv(traj, create(path)?).map_err(csv_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ternary_corners() {
        assert_eq!(ternary_coordinates(&[1.0, 0.0, 0.0]), (0.0, 0.0));
        assert_eq!(ternary_coordinates(&[0.0, 1.0, 0.0]), (1.0, 0.0));
        let (u, v) = ternary_coordinates(&[0.0, 0.0, 1.0]);
        assert_eq!(u, 0.5);
        assert!((v - 0.866_025_403_784_438_6).abs() < 1e-16);
    }

    #[test]
    fn full_precision_round_trips() {
        let v = 2.0 / 11.0;
        assert_eq!(full(v).parse::<f64>().unwrap(), v);
    }
}
