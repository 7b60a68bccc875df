//! CSV formats.
//!
//! Drive logs: header `t,dist_left,dist_right,v_lon[,lane_id]`, one tour
//! per file, rows sorted by `t`. Empty or non-finite distances mark the
//! sample invalid; anything unparseable is a schema error.
//!
//! Profiles: header `t,x`.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::model::{DriveLogSample, OffsetSeries};

const REQUIRED: [&str; 4] = ["t", "dist_left", "dist_right", "v_lon"];

fn schema(row: usize, column: &str, message: impl Into<String>) -> Error {
    Error::Schema {
        row,
        column: column.to_string(),
        message: message.into(),
    }
}

/// Parse a drive log. Row numbers in errors count the header as row 1.
pub fn read_drive_log<R: Read>(reader: R) -> Result<Vec<DriveLogSample>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let index = |name: &str| headers.iter().position(|h| h == name);
    let mut cols = [0usize; 4];
    for (slot, name) in cols.iter_mut().zip(REQUIRED) {
        *slot = index(name).ok_or_else(|| schema(1, name, "missing column"))?;
    }
    let lane_col = index("lane_id");

    let mut out = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 2;
        let record = record?;
        let field = |c: usize| record.get(c).unwrap_or("");
        let number = |c: usize, name: &str| -> Result<f64> {
            field(c)
                .parse::<f64>()
                .map_err(|_| schema(row, name, format!("not a number: {:?}", field(c))))
        };
        let distance = |c: usize, name: &str| -> Result<f64> {
            if field(c).is_empty() {
                Ok(f64::NAN)
            } else {
                number(c, name)
            }
        };
        let t = number(cols[0], "t")?;
        if !t.is_finite() {
            return Err(schema(row, "t", "must be finite"));
        }
        let lane_id = match lane_col.map(field) {
            None | Some("") => None,
            Some(s) => Some(
                s.parse::<i64>()
                    .map_err(|_| schema(row, "lane_id", format!("not an integer: {s:?}")))?,
            ),
        };
        out.push(DriveLogSample {
            t,
            dist_left: distance(cols[1], "dist_left")?,
            dist_right: distance(cols[2], "dist_right")?,
            v_lon: number(cols[3], "v_lon")?,
            lane_id,
        });
    }
    Ok(out)
}

pub fn write_drive_log<W: Write>(writer: W, samples: &[DriveLogSample]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let with_lane = samples.iter().any(|s| s.lane_id.is_some());
    if with_lane {
        w.write_record(["t", "dist_left", "dist_right", "v_lon", "lane_id"])?;
    } else {
        w.write_record(REQUIRED)?;
    }
    for s in samples {
        let mut rec = vec![
            s.t.to_string(),
            s.dist_left.to_string(),
            s.dist_right.to_string(),
            s.v_lon.to_string(),
        ];
        if with_lane {
            rec.push(s.lane_id.map(|l| l.to_string()).unwrap_or_default());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_profile<W: Write>(writer: W, series: &OffsetSeries) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["t", "x"])?;
    for (t, x) in series.times().zip(&series.values) {
        // i * dt carries roundoff (0.6000000000000001); nanosecond precision is plenty
        let t = (t * 1e9).round() / 1e9;
        w.write_record([t.to_string(), x.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_minimal_schema() {
        let text = "t,dist_left,dist_right,v_lon\n0,1.8,1.8,100\n0.2,1.0,2.6,90\n";
        let log = read_drive_log(text.as_bytes()).unwrap();
        assert_eq!(log.len(), 2);
        assert_eq!(log[1].dist_right, 2.6);
        assert_eq!(log[0].lane_id, None);
    }

    #[test]
    fn reads_lane_ids_in_any_column_order() {
        let text = "lane_id,v_lon,t,dist_right,dist_left\n2,100,0,1.8,1.8\n,100,0.2,1.8,1.8\n";
        let log = read_drive_log(text.as_bytes()).unwrap();
        assert_eq!(log[0].lane_id, Some(2));
        assert_eq!(log[1].lane_id, None);
        assert_eq!(log[1].t, 0.2);
    }

    #[test]
    fn missing_distance_marks_invalid() {
        let text = "t,dist_left,dist_right,v_lon\n0,,1.8,100\n0.2,-0.3,1.8,100\n";
        let log = read_drive_log(text.as_bytes()).unwrap();
        assert!(!log[0].is_valid());
        assert!(!log[1].is_valid());
    }

    #[test]
    fn schema_errors_name_row_and_column() {
        let text = "t,dist_left,dist_right\n0,1,1\n";
        match read_drive_log(text.as_bytes()) {
            Err(Error::Schema { row, column, .. }) => {
                assert_eq!((row, column.as_str()), (1, "v_lon"))
            }
            other => panic!("unexpected {other:?}"),
        }
        let text = "t,dist_left,dist_right,v_lon\n0,1,1,100\n0.2,1,abc,100\n";
        match read_drive_log(text.as_bytes()) {
            Err(Error::Schema { row, column, .. }) => {
                assert_eq!((row, column.as_str()), (3, "dist_right"))
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_file_has_no_samples() {
        let log = read_drive_log("t,dist_left,dist_right,v_lon\n".as_bytes()).unwrap();
        assert!(log.is_empty());
    }

    #[test]
    fn drive_log_round_trip() {
        let samples = crate::synthetic::offsets_to_log(&[0.0, 0.1234567890123, -0.31], 0.2, 3.6);
        let mut buf = Vec::new();
        write_drive_log(&mut buf, &samples).unwrap();
        assert_eq!(read_drive_log(buf.as_slice()).unwrap(), samples);
    }

    #[test]
    fn profile_format() {
        let mut buf = Vec::new();
        write_profile(
            &mut buf,
            &OffsetSeries::new(0.2, vec![0.0, 0.125, 0.0, -0.5]),
        )
        .unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "t,x\n0,0\n0.2,0.125\n0.4,0\n0.6,-0.5\n"
        );
    }
}
