use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::format::sig9;

pub const RECORD_HEADER: [&str; 17] = [
    "t",
    "v_wind",
    "omega_ref",
    "omega_rot",
    "e",
    "s",
    "tau_gen",
    "tau_aero",
    "d",
    "d_hat",
    "zeta",
    "lambda",
    "cp",
    "p_gen",
    "p_aero_opt",
    "stability_margin",
    "zeta_cond",
];

/// One recorded simulation step. Values are taken at the start of the step;
/// `tau_gen` is the torque held over it.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunRow {
    pub t: f64,
    pub v_wind: f64,
    pub omega_ref: f64,
    pub omega_rot: f64,
    pub e: f64,
    pub s: f64,
    pub tau_gen: f64,
    pub tau_aero: f64,
    pub d: f64,
    pub d_hat: f64,
    pub zeta: f64,
    pub lambda: f64,
    pub cp: f64,
    pub p_gen: f64,
    pub p_aero_opt: f64,
    pub stability_margin: f64,
    pub zeta_cond: bool,
}

impl RunRow {
    fn values(&self) -> [f64; 17] {
        [
            self.t,
            self.v_wind,
            self.omega_ref,
            self.omega_rot,
            self.e,
            self.s,
            self.tau_gen,
            self.tau_aero,
            self.d,
            self.d_hat,
            self.zeta,
            self.lambda,
            self.cp,
            self.p_gen,
            self.p_aero_opt,
            self.stability_margin,
            if self.zeta_cond { 1.0 } else { 0.0 },
        ]
    }

    fn from_values(v: &[f64; 17]) -> Self {
        Self {
            t: v[0],
            v_wind: v[1],
            omega_ref: v[2],
            omega_rot: v[3],
            e: v[4],
            s: v[5],
            tau_gen: v[6],
            tau_aero: v[7],
            d: v[8],
            d_hat: v[9],
            zeta: v[10],
            lambda: v[11],
            cp: v[12],
            p_gen: v[13],
            p_aero_opt: v[14],
            stability_margin: v[15],
            zeta_cond: v[16] != 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values().iter().all(|v| v.is_finite())
    }
}

/// Time series of a closed-loop run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunRecord {
    pub rows: Vec<RunRow>,
}

impl RunRecord {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, f: impl Fn(&RunRow) -> f64) -> Vec<f64> {
        self.rows.iter().map(f).collect()
    }

    pub fn write_csv_to<W: Write>(&self, w: W) -> std::io::Result<()> {
        let mut w = BufWriter::new(w);
        writeln!(w, "{}", RECORD_HEADER.join(","))?;
        let mut line = String::with_capacity(256);
        for row in &self.rows {
            line.clear();
            for (i, v) in row.values().iter().enumerate() {
                if i > 0 {
                    line.push(',');
                }
                line.push_str(&sig9(*v));
            }
            writeln!(w, "{line}")?;
        }
        w.flush()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv_to(file).map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = csv::Reader::from_reader(file);
        let headers = reader.headers()?.clone();
        if headers.iter().ne(RECORD_HEADER.iter().copied()) {
            return Err(Error::Ingest {
                row: 1,
                reason: "unexpected run record header".into(),
            });
        }
        let mut rows = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let row = i as u64 + 2;
            let rec = rec?;
            let mut values = [0.0; 17];
            for (slot, field) in values.iter_mut().zip(rec.iter()) {
                *slot = field.parse().map_err(|_| Error::Ingest {
                    row,
                    reason: format!("`{field}` is not a number"),
                })?;
            }
            rows.push(RunRow::from_values(&values));
        }
        Ok(Self { rows })
    }
}
