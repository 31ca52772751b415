//! CSV formats for trajectories, jets and tables.
//!
//! Every file has a header row whose first column is `t`; sample times must be
//! strictly increasing and equispaced to within `1e-9 dt`. Numbers are written
//! in the shortest round-trip exponent form, so output is byte-stable.

use std::io::{Read, Write};

use nalgebra::DMatrix;

use crate::signals::{JetTrajectory, SignalJet, TimeGrid, Trajectory};
use crate::{Error, Result};

/// Column names (without `t`), grid and values of an equispaced table.
#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<String>,
    pub grid: TimeGrid,
    /// `columns.len() x grid.count()`.
    pub values: DMatrix<f64>,
}

impl Table {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Trajectory made of the named columns, in order.
    pub fn trajectory(&self, names: &[&str]) -> Result<Trajectory> {
        let mut values = DMatrix::zeros(names.len(), self.grid.count());
        for (r, name) in names.iter().enumerate() {
            let c = self
                .column_index(name)
                .ok_or_else(|| Error::Dimension(format!("no column `{name}`")))?;
            values.set_row(r, &self.values.row(c));
        }
        Trajectory::new(self.grid, values)
    }

    /// Trajectory of every column whose name starts with `prefix`.
    pub fn prefixed(&self, prefix: &str) -> Result<Trajectory> {
        let names: Vec<&str> = self
            .columns
            .iter()
            .filter(|c| c.starts_with(prefix))
            .map(String::as_str)
            .collect();
        if names.is_empty() {
            return Err(Error::Dimension(format!("no columns start with `{prefix}`")));
        }
        self.trajectory(&names)
    }
}

fn csv_line(record: &csv::StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

/// Reads any `t,...` table.
pub fn read_table<R: Read>(input: R) -> Result<Table> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header = reader.headers()?.clone();
    if header.get(0) != Some("t") || header.len() < 2 {
        return Err(Error::Parse {
            line: 1,
            msg: "header must start with `t` followed by at least one column".into(),
        });
    }
    let columns: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut times = Vec::new();
    let mut data = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::Parse { line, msg: e.to_string() }
        })?;
        let line = csv_line(&record);
        for (j, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|e| Error::Parse {
                line,
                msg: format!("column {}: `{field}`: {e}", j + 1),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse { line, msg: format!("column {}: non-finite value", j + 1) });
            }
            if j == 0 {
                times.push((v, line));
            } else {
                data.push(v);
            }
        }
    }
    if times.len() < 2 {
        return Err(Error::Parse { line: 0, msg: "need at least two sample rows".into() });
    }
    let t0 = times[0].0;
    let dt = (times[times.len() - 1].0 - t0) / (times.len() - 1) as f64;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Parse { line: times[1].1, msg: "sample times must increase".into() });
    }
    for (k, &(t, line)) in times.iter().enumerate() {
        if (t - (t0 + k as f64 * dt)).abs() > 1e-9 * dt {
            return Err(Error::Parse { line, msg: format!("time {t} breaks the uniform spacing {dt}") });
        }
    }
    let grid = TimeGrid::new(t0, dt, times.len())?;
    let values = DMatrix::from_column_slice(columns.len(), times.len(), &data);
    Ok(Table { columns, grid, values })
}

/// Writes a `t,...` table from trajectories sharing one grid.
pub fn write_table<W: Write>(columns: &[String], parts: &[&Trajectory], out: W) -> Result<()> {
    let grid = *parts
        .first()
        .ok_or_else(|| Error::Dimension("nothing to write".into()))?
        .grid();
    let width: usize = parts.iter().map(|p| p.channels()).sum();
    if width != columns.len() {
        return Err(Error::Dimension(format!("{} column names for {width} channels", columns.len())));
    }
    if parts.iter().any(|p| !p.grid().same_as(&grid)) {
        return Err(Error::GridMismatch("table columns use different grids".into()));
    }
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(std::iter::once("t").chain(columns.iter().map(String::as_str)))?;
    let mut row = Vec::with_capacity(width + 1);
    for k in 0..grid.count() {
        row.clear();
        row.push(format!("{:e}", grid.time(k)));
        for part in parts {
            row.extend(part.sample(k).iter().map(|v| format!("{v:e}")));
        }
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

/// Reads `t,ch1,..,chq` into a trajectory with its channel names.
pub fn read_trajectory_csv<R: Read>(input: R) -> Result<(Vec<String>, Trajectory)> {
    let table = read_table(input)?;
    let traj = Trajectory::new(table.grid, table.values)?;
    Ok((table.columns, traj))
}

pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, names: &[String], out: W) -> Result<()> {
    write_table(names, &[traj], out)
}

/// `prefix1..prefixq`.
pub fn channel_names(prefix: &str, count: usize) -> Vec<String> {
    (1..=count).map(|j| format!("{prefix}{j}")).collect()
}

/// Header of a jet CSV: `u0_1.., uL_*, y0_1.., yL_*`.
pub fn jet_columns(order: usize, inputs: usize, outputs: usize) -> Vec<String> {
    let mut cols = Vec::new();
    for (sym, width) in [("u", inputs), ("y", outputs)] {
        for i in 0..=order {
            cols.extend((1..=width).map(|j| format!("{sym}{i}_{j}")));
        }
    }
    cols
}

pub fn write_jet_csv<W: Write>(jet: &JetTrajectory, out: W) -> Result<()> {
    let cols = jet_columns(jet.order(), jet.inputs(), jet.outputs());
    let parts: Vec<&Trajectory> = jet.layers().map(|(_, _, l)| l).collect();
    write_table(&cols, &parts, out)
}

/// Parses the `u<i>_<j>` / `y<i>_<j>` header produced by [`write_jet_csv`].
pub fn read_jet_csv<R: Read>(input: R) -> Result<JetTrajectory> {
    let table = read_table(input)?;
    let mut widths = [0usize; 2];
    let mut order = 0;
    for name in &table.columns {
        let (sym, rest) = name.split_at(1.min(name.len()));
        let parsed = rest.split_once('_').and_then(|(i, j)| Some((i.parse::<usize>().ok()?, j.parse::<usize>().ok()?)));
        let (Some(slot), Some((i, j))) = (["u", "y"].iter().position(|s| *s == sym), parsed) else {
            return Err(Error::Parse { line: 1, msg: format!("unexpected jet column `{name}`") });
        };
        order = order.max(i);
        widths[slot] = widths[slot].max(j);
    }
    let expected = jet_columns(order, widths[0], widths[1]);
    if expected != table.columns {
        return Err(Error::Parse {
            line: 1,
            msg: format!("jet header must read `t,{}`", expected.join(",")),
        });
    }
    let mut layers = [Vec::new(), Vec::new()];
    let mut row = 0;
    for (slot, width) in widths.iter().enumerate() {
        for _ in 0..=order {
            let vals = table.values.rows(row, *width).into_owned();
            layers[slot].push(Trajectory::new(table.grid, vals)?);
            row += width;
        }
    }
    let [u, y] = layers;
    JetTrajectory::new(SignalJet::new(u)?, SignalJet::new(y)?)
}

/// Writes one signal jet with columns `<symbol><i>_<j>`.
pub fn write_signal_jet_csv<W: Write>(jet: &SignalJet, symbol: &str, out: W) -> Result<()> {
    let mut cols = Vec::new();
    for i in 0..=jet.order() {
        cols.extend((1..=jet.channels()).map(|j| format!("{symbol}{i}_{j}")));
    }
    let parts: Vec<&Trajectory> = jet.layers().iter().collect();
    write_table(&cols, &parts, out)
}

/// Reads the `<symbol><i>_<j>` columns of a table as a signal jet.
pub fn signal_jet_from_table(table: &Table, symbol: &str) -> Result<SignalJet> {
    let mut layers = Vec::new();
    for i in 0.. {
        let trajectory = match table.prefixed(&format!("{symbol}{i}_")) {
            Ok(t) => t,
            Err(_) if i > 0 => break,
            Err(e) => return Err(e),
        };
        layers.push(trajectory);
    }
    SignalJet::new(layers)
}
