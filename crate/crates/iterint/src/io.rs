//! File formats for tableaus and integral sets.
//!
//! Tableaus have two containers:
//!
//! * the binary form of [`Tableau::to_bytes`], a magic prefix, a format
//!   version, the header `(q, p, seed, stream)` and the raw IEEE-754 bits
//!   of `W₁`, `x` and `y`; it round-trips bit-exactly;
//! * a CSV form with a two-line header
//!   (`format,version,q,p,seed,stream`) followed by one row per entry
//!   under the columns `kind,j,r,value`, where `kind` is `w1`, `x` or `y`
//!   and `r` is the 1-based mode index (0 for `w1`). Values are printed
//!   in shortest round-trip notation, so this form is also exact.
//!
//! Integral sets are emitted as CSV rows
//! `path_id,h,entity,indices,value` with `entity ∈ {dw, i2, i3}` and
//! space-separated zero-based `indices`.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use iterint_core::fourier_tableau::{Tableau, TABLEAU_VERSION};
use iterint_core::integrals::IntegralSet;

use crate::error::{Error, Result};

/// Format tag on the first data line of a tableau CSV.
pub const TABLEAU_CSV_FORMAT: &str = "iterint-tableau";

/// Writes the binary container.
pub fn write_tableau_binary(path: &Path, t: &Tableau) -> Result<()> {
    fs::write(path, t.to_bytes())?;
    Ok(())
}

/// Reads the binary container.
pub fn read_tableau_binary(path: &Path) -> Result<Tableau> {
    Ok(Tableau::from_bytes(&fs::read(path)?)?)
}

/// Writes the CSV container to any sink.
pub fn write_tableau_csv<W: Write>(sink: W, t: &Tableau) -> Result<()> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(sink);
    w.write_record(["format", "version", "q", "p", "seed", "stream"])?;
    w.write_record([
        TABLEAU_CSV_FORMAT.to_string(),
        TABLEAU_VERSION.to_string(),
        t.q.to_string(),
        t.p.to_string(),
        t.seed.to_string(),
        t.stream.to_string(),
    ])?;
    w.write_record(["kind", "j", "r", "value"])?;
    for j in 0..t.q {
        w.write_record(["w1".to_string(), j.to_string(), "0".to_string(), format!("{:?}", t.w1[j])])?;
    }
    for (kind, data) in [("x", &t.x), ("y", &t.y)] {
        for j in 0..t.q {
            for r in 1..=t.p {
                w.write_record([kind.to_string(), j.to_string(), r.to_string(), format!("{:?}", data[j * t.p + r - 1])])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, what: &str) -> Result<T> {
    rec.get(i)
        .ok_or_else(|| Error::Format(format!("missing {what}")))?
        .trim()
        .parse()
        .map_err(|_| Error::Format(format!("invalid {what}: {:?}", rec.get(i))))
}

/// Reads the CSV container from any source.
pub fn read_tableau_csv<R: Read>(source: R) -> Result<Tableau> {
    let mut r = csv::ReaderBuilder::new().flexible(true).has_headers(false).from_reader(source);
    let mut records = r.records();
    let mut next = |what: &str| -> Result<csv::StringRecord> {
        records.next().ok_or_else(|| Error::Format(format!("missing {what}")))?.map_err(Error::from)
    };
    let head = next("header")?;
    if head.iter().collect::<Vec<_>>() != ["format", "version", "q", "p", "seed", "stream"] {
        return Err(Error::Format("not a tableau CSV header".into()));
    }
    let meta = next("header values")?;
    if meta.get(0) != Some(TABLEAU_CSV_FORMAT) {
        return Err(Error::Format("not a tableau CSV".into()));
    }
    let version: u32 = field(&meta, 1, "version")?;
    if version != TABLEAU_VERSION {
        return Err(Error::Format(format!("unsupported tableau version {version}")));
    }
    let q: usize = field(&meta, 2, "q")?;
    let p: usize = field(&meta, 3, "p")?;
    let seed: u64 = field(&meta, 4, "seed")?;
    let stream: u64 = field(&meta, 5, "stream")?;
    if next("column header")?.iter().collect::<Vec<_>>() != ["kind", "j", "r", "value"] {
        return Err(Error::Format("bad tableau column header".into()));
    }
    let mut t = Tableau::from_parts(q, p, vec![0.0; q], vec![0.0; q * p], vec![0.0; q * p])?;
    let mut seen = vec![false; q * (2 * p + 1)];
    for rec in records {
        let rec = rec?;
        let kind = rec.get(0).unwrap_or("");
        let j: usize = field(&rec, 1, "j")?;
        let r: usize = field(&rec, 2, "r")?;
        let v: f64 = field(&rec, 3, "value")?;
        if j >= q {
            return Err(Error::Format(format!("row index j = {j} out of range")));
        }
        let slot = match kind {
            "w1" if r == 0 => {
                t.w1[j] = v;
                j
            }
            "x" | "y" if (1..=p).contains(&r) => {
                let k = j * p + r - 1;
                if kind == "x" {
                    t.x[k] = v;
                    q + k
                } else {
                    t.y[k] = v;
                    q + q * p + k
                }
            }
            _ => return Err(Error::Format(format!("bad tableau row ({kind}, {j}, {r})"))),
        };
        if std::mem::replace(&mut seen[slot], true) {
            return Err(Error::Format(format!("duplicate tableau row ({kind}, {j}, {r})")));
        }
    }
    if !seen.iter().all(|&s| s) {
        return Err(Error::Format("tableau CSV is missing entries".into()));
    }
    t.seed = seed;
    t.stream = stream;
    Ok(t)
}

/// One row of the integral-set CSV.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct IntegralRow {
    pub path_id: u64,
    pub h: f64,
    pub entity: String,
    pub indices: String,
    pub value: f64,
}

/// Rows describing `set` for path `path_id`.
pub fn integral_rows(path_id: u64, set: &IntegralSet) -> Vec<IntegralRow> {
    let q = set.q;
    let row = |entity: &str, idx: &[usize], value: f64| IntegralRow {
        path_id,
        h: set.h,
        entity: entity.to_string(),
        indices: idx.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" "),
        value,
    };
    let mut out = Vec::with_capacity(q + q * q + q * q * q);
    for j in 0..q {
        out.push(row("dw", &[j], set.dw[j]));
    }
    for j in 0..q {
        for k in 0..q {
            out.push(row("i2", &[j, k], set.i2_at(j, k)));
        }
    }
    for j in 0..q {
        for k in 0..q {
            for l in 0..q {
                out.push(row("i3", &[j, k, l], set.i3_at(j, k, l)));
            }
        }
    }
    out
}

/// Writes integral sets as CSV, one block of rows per `(path_id, set)`.
pub fn write_integral_csv<W: Write>(sink: W, sets: &[(u64, IntegralSet)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    for (id, set) in sets {
        for row in integral_rows(*id, set) {
            w.serialize(row)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads integral-set CSV rows.
pub fn read_integral_csv<R: Read>(source: R) -> Result<Vec<IntegralRow>> {
    let mut r = csv::Reader::from_reader(source);
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}
