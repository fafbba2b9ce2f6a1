use crate::error::{Error, Result};
use crate::signal::SensorFrame;
use std::io::Write;
use std::path::Path;

const COLUMNS: [&str; 6] = ["t", "torque", "acc_x", "pitch", "acc_z", "slip"];

/// A parsed telemetry log: the frames that survived ingestion filtering and
/// the number of rows dropped for carrying an impossible slip value.
#[derive(Debug, Clone)]
pub struct SensorLog {
    pub frames: Vec<SensorFrame>,
    pub dropped_outliers: usize,
}

/// Read a telemetry CSV (`t,torque,acc_x,pitch,acc_z,slip` header, plain
/// decimal floats, LF or CRLF). Rows whose slip falls outside `[0, 100]`
/// are dropped and counted rather than rejected; a non-increasing timestamp
/// is a hard error.
pub fn load_sensor_csv(path: impl AsRef<Path>) -> Result<SensorLog> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    parse_sensor_csv(&text, &path.display().to_string())
}

fn parse_sensor_csv(text: &str, path: &str) -> Result<SensorLog> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| Error::Format {
        path: path.into(),
        line: None,
        msg: "empty file".into(),
    })?;
    let names: Vec<&str> = header.trim_end_matches('\r').split(',').map(str::trim).collect();
    let mut index = [0usize; 6];
    for (slot, col) in COLUMNS.iter().enumerate() {
        index[slot] = names
            .iter()
            .position(|n| n == col)
            .ok_or_else(|| Error::Format {
                path: path.into(),
                line: Some(1),
                msg: format!("missing column '{col}'"),
            })?;
    }

    let mut frames = Vec::new();
    let mut dropped = 0usize;
    let mut last_t: Option<f64> = None;
    for (lineno, raw) in lines {
        let line = raw.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != names.len() {
            return Err(Error::Format {
                path: path.into(),
                line: Some(lineno + 1),
                msg: format!("expected {} cells, found {}", names.len(), cells.len()),
            });
        }
        let mut vals = [0.0f64; 6];
        for (slot, &col_idx) in index.iter().enumerate() {
            vals[slot] = cells[col_idx].parse().map_err(|_| Error::Format {
                path: path.into(),
                line: Some(lineno + 1),
                msg: format!("non-numeric value '{}' in column '{}'", cells[col_idx], COLUMNS[slot]),
            })?;
        }
        let t = vals[0];
        if let Some(prev) = last_t {
            if t <= prev {
                return Err(Error::Format {
                    path: path.into(),
                    line: Some(lineno + 1),
                    msg: format!("time not strictly increasing ({prev} then {t})"),
                });
            }
        }
        last_t = Some(t);
        let slip = vals[5];
        if !(0.0..=100.0).contains(&slip) {
            dropped += 1;
            continue;
        }
        frames.push(SensorFrame {
            t,
            torque: vals[1],
            acc_x: vals[2],
            pitch: vals[3],
            acc_z: vals[4],
            slip,
        });
    }
    Ok(SensorLog {
        frames,
        dropped_outliers: dropped,
    })
}

/// Write frames in the same format `load_sensor_csv` reads.
pub fn write_sensor_csv(path: impl AsRef<Path>, frames: &[SensorFrame]) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut w = std::io::BufWriter::new(file);
    let io_err = |e: std::io::Error| Error::io(path.display().to_string(), e);
    writeln!(w, "{}", COLUMNS.join(",")).map_err(io_err)?;
    for f in frames {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            f.t, f.torque, f.acc_x, f.pitch, f.acc_z, f.slip
        )
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_well_formed_rows() {
        let log = parse_sensor_csv(
            "t,torque,acc_x,pitch,acc_z,slip\n0.0,1.5,0.1,0.2,0.3,10\n0.01,1.6,0.0,0.1,0.2,40\n0.02,1.4,0.2,0.0,0.1,70\n",
            "test",
        )
        .unwrap();
        assert_eq!(log.frames.len(), 3);
        assert_eq!(log.dropped_outliers, 0);
        assert_eq!(log.frames[1].torque, 1.6);
        assert_eq!(log.frames[2].slip, 70.0);
    }

    #[test]
    fn drops_and_counts_slip_outliers() {
        let log = parse_sensor_csv(
            "t,torque,acc_x,pitch,acc_z,slip\n0.0,1,0,0,0,150\n0.01,1,0,0,0,50\n",
            "test",
        )
        .unwrap();
        assert_eq!(log.frames.len(), 1);
        assert_eq!(log.dropped_outliers, 1);
    }

    #[test]
    fn missing_column_is_named() {
        let err = parse_sensor_csv("t,acc_x,pitch,acc_z,slip\n", "test").unwrap_err();
        assert!(err.to_string().contains("torque"), "{err}");
    }

    #[test]
    fn non_numeric_cell_reports_line() {
        let err = parse_sensor_csv(
            "t,torque,acc_x,pitch,acc_z,slip\n0.0,1,0,0,0,10\n0.01,abc,0,0,0,10\n",
            "test",
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 3") && msg.contains("torque"), "{msg}");
    }

    #[test]
    fn time_must_strictly_increase() {
        let err = parse_sensor_csv(
            "t,torque,acc_x,pitch,acc_z,slip\n0.0,1,0,0,0,10\n0.0,1,0,0,0,10\n",
            "test",
        );
        assert!(err.is_err());
    }

    #[test]
    fn accepts_crlf_and_column_reordering() {
        let log = parse_sensor_csv(
            "slip,t,torque,acc_x,pitch,acc_z\r\n20,0.0,3,0.1,0.2,0.3\r\n",
            "test",
        )
        .unwrap();
        assert_eq!(log.frames[0].slip, 20.0);
        assert_eq!(log.frames[0].torque, 3.0);
    }

    #[test]
    fn round_trip_through_temp_file() {
        let frames = vec![
            SensorFrame {
                t: 0.0,
                torque: 1.25,
                acc_x: -0.5,
                pitch: 0.125,
                acc_z: 2.0,
                slip: 15.5,
            },
            SensorFrame {
                t: 0.01,
                torque: -2.5,
                acc_x: 0.75,
                pitch: -0.25,
                acc_z: 1.0,
                slip: 85.0,
            },
        ];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("log.csv");
        write_sensor_csv(&path, &frames).unwrap();
        let log = load_sensor_csv(&path).unwrap();
        assert_eq!(log.frames, frames);
    }
}
