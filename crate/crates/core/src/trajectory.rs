//! Piecewise-linear summary-statistic trajectories: interpolation, sup-distance,
//! and a round-trippable CSV format.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::CoreError;
use crate::summary::{euclidean, Schema, SummaryVec};

/// Number of evaluation points used by [`sup_distance`] when none is given.
pub const DEFAULT_SUP_GRID: usize = 1000;

/// A time-indexed sequence of summary vectors, interpreted as the piecewise-linear
/// interpolation through its sample points. Times start at 0 and strictly increase.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    schema: Schema,
    times: Vec<f64>,
    /// Row-major sample matrix, `times.len() × schema.len()`.
    data: Vec<f64>,
}

impl Trajectory {
    /// Builds a trajectory from per-time rows, validating the time grid, row
    /// lengths, and finiteness of every entry.
    pub fn from_rows(
        schema: Schema,
        times: Vec<f64>,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self, CoreError> {
        if times.is_empty() {
            return Err(CoreError::InvalidTimeGrid("no sample points".into()));
        }
        if times[0] != 0.0 {
            return Err(CoreError::InvalidTimeGrid(format!(
                "first time must be 0, got {}",
                times[0]
            )));
        }
        for w in times.windows(2) {
            if !(w[1] > w[0]) {
                return Err(CoreError::InvalidTimeGrid(format!(
                    "times must strictly increase, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(CoreError::NonFinite("trajectory time".into()));
        }
        if rows.len() != times.len() {
            return Err(CoreError::LengthMismatch {
                expected: times.len(),
                got: rows.len(),
            });
        }
        let ncols = schema.len();
        let mut data = Vec::with_capacity(rows.len() * ncols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != ncols {
                return Err(CoreError::LengthMismatch {
                    expected: ncols,
                    got: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(CoreError::NonFinite(format!("row at t={}", times[i])));
            }
            data.extend_from_slice(row);
        }
        Ok(Self {
            schema,
            times,
            data,
        })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees at least one sample
    }

    /// Final recorded time.
    pub fn t_max(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Sample row at index `i`.
    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.schema.len();
        &self.data[i * n..(i + 1) * n]
    }

    /// Final recorded summary vector.
    pub fn endpoint(&self) -> SummaryVec {
        SummaryVec::new(self.schema.clone(), self.row(self.len() - 1).to_vec())
            .expect("stored rows are validated")
    }

    /// Keeps every `stride`-th sample (always retaining the first and last).
    pub fn thin(&self, stride: usize) -> Trajectory {
        let stride = stride.max(1);
        let last = self.len() - 1;
        let mut times = Vec::new();
        let mut rows = Vec::new();
        for i in (0..self.len()).step_by(stride) {
            times.push(self.times[i]);
            rows.push(self.row(i).to_vec());
        }
        if *times.last().unwrap() < self.times[last] {
            times.push(self.times[last]);
            rows.push(self.row(last).to_vec());
        }
        Trajectory::from_rows(self.schema.clone(), times, rows).expect("thinning preserves validity")
    }

    /// Linear interpolation at time `t ∈ [0, t_max]`.
    pub fn interpolate(&self, t: f64) -> Result<SummaryVec, CoreError> {
        let values = self.interpolate_raw(t)?;
        SummaryVec::new(self.schema.clone(), values)
    }

    fn interpolate_raw(&self, t: f64) -> Result<Vec<f64>, CoreError> {
        let t_max = self.t_max();
        if !t.is_finite() || t < 0.0 || t > t_max {
            return Err(CoreError::TimeOutOfRange { t, t_max });
        }
        // partition_point returns the first index with times[i] > t.
        let hi = self.times.partition_point(|&x| x <= t);
        if hi == self.times.len() {
            return Ok(self.row(self.len() - 1).to_vec());
        }
        if hi == 0 {
            return Ok(self.row(0).to_vec());
        }
        let lo = hi - 1;
        let (t0, t1) = (self.times[lo], self.times[hi]);
        if t == t0 {
            return Ok(self.row(lo).to_vec());
        }
        let w = (t - t0) / (t1 - t0);
        let a = self.row(lo);
        let b = self.row(hi);
        Ok(a.iter()
            .zip(b)
            .map(|(x, y)| x + w * (y - x))
            .collect())
    }
}

/// Maximum Euclidean distance between two trajectories over `[t0, t1]`, evaluated
/// on a uniform grid of `grid_points` times (both interpolated linearly).
pub fn sup_distance_on_grid(
    a: &Trajectory,
    b: &Trajectory,
    t0: f64,
    t1: f64,
    grid_points: usize,
) -> Result<f64, CoreError> {
    if a.schema() != b.schema() {
        return Err(CoreError::SchemaMismatch(format!(
            "{} vs {}",
            a.schema(),
            b.schema()
        )));
    }
    let cover = a.t_max().min(b.t_max());
    if !(t1 > t0) || t0 < 0.0 || t1 > cover {
        return Err(CoreError::InvalidWindow {
            t0,
            t1,
            reason: format!("window must satisfy 0 <= t0 < t1 <= {cover}"),
        });
    }
    let n = grid_points.max(2);
    let mut sup = 0.0f64;
    for i in 0..n {
        let t = t0 + (t1 - t0) * i as f64 / (n - 1) as f64;
        let x = a.interpolate_raw(t)?;
        let y = b.interpolate_raw(t)?;
        sup = sup.max(euclidean(&x, &y));
    }
    Ok(sup)
}

/// [`sup_distance_on_grid`] with the default 1000-point grid.
pub fn sup_distance(a: &Trajectory, b: &Trajectory, t0: f64, t1: f64) -> Result<f64, CoreError> {
    sup_distance_on_grid(a, b, t0, t1, DEFAULT_SUP_GRID)
}

/// Formats a float with 17 significant digits, enough for exact f64 round-trips.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `t,<coord names...>` then one row per sample, 17 significant digits each.
pub fn write_csv<W: Write>(traj: &Trajectory, mut w: W) -> std::io::Result<()> {
    write!(w, "t")?;
    for name in traj.schema().names() {
        write!(w, ",{name}")?;
    }
    writeln!(w)?;
    for i in 0..traj.len() {
        write!(w, "{}", format_f64(traj.times()[i]))?;
        for v in traj.row(i) {
            write!(w, ",{}", format_f64(*v))?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// CSV serialization as a string (used for in-memory comparisons and stdout).
pub fn write_csv_string(traj: &Trajectory) -> String {
    let mut buf = Vec::new();
    write_csv(traj, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("csv output is ASCII")
}

/// Writes the CSV to a file, annotating I/O errors with the path.
pub fn write_csv_path(traj: &Trajectory, path: &Path) -> Result<(), CoreError> {
    let file = File::create(path).map_err(|source| CoreError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut w = BufWriter::new(file);
    write_csv(traj, &mut w).map_err(|source| CoreError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Reads a trajectory written by [`write_csv`].
pub fn read_csv<R: BufRead>(r: R) -> Result<Trajectory, CoreError> {
    let mut lines = r.lines().enumerate();
    let (_, header) = lines.next().ok_or(CoreError::CsvParse {
        line: 1,
        msg: "empty file".into(),
    })?;
    let header = header.map_err(|e| CoreError::CsvParse {
        line: 1,
        msg: e.to_string(),
    })?;
    let mut cols = header.split(',');
    match cols.next() {
        Some("t") => {}
        other => {
            return Err(CoreError::CsvParse {
                line: 1,
                msg: format!("first column must be 't', got {other:?}"),
            })
        }
    }
    let schema = Schema::new(cols.map(str::to_owned));
    let mut times = Vec::new();
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let line = line.map_err(|e| CoreError::CsvParse {
            line: idx + 1,
            msg: e.to_string(),
        })?;
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let parse = |s: Option<&str>, what: &str| -> Result<f64, CoreError> {
            let s = s.ok_or(CoreError::CsvParse {
                line: idx + 1,
                msg: format!("missing {what}"),
            })?;
            s.parse::<f64>().map_err(|e| CoreError::CsvParse {
                line: idx + 1,
                msg: format!("bad {what} '{s}': {e}"),
            })
        };
        times.push(parse(fields.next(), "time")?);
        let mut row = Vec::with_capacity(schema.len());
        for j in 0..schema.len() {
            row.push(parse(fields.next(), &format!("column {}", j + 2))?);
        }
        if fields.next().is_some() {
            return Err(CoreError::CsvParse {
                line: idx + 1,
                msg: "extra columns".into(),
            });
        }
        rows.push(row);
    }
    Trajectory::from_rows(schema, times, rows)
}

/// Reads a trajectory CSV from a file, annotating I/O errors with the path.
pub fn read_csv_path(path: &Path) -> Result<Trajectory, CoreError> {
    let file = File::open(path).map_err(|source| CoreError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_csv(BufReader::new(file))
}
