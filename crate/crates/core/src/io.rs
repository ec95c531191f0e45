//! Versioned CSV files: a `# schema: name/vN` line followed by a header row.

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::optimizers::{ArchiveEntry, HvPoint, IsresTracePoint, Outcome};

pub const ARCHIVE_SCHEMA: &str = "archive/v1";
pub const ARCHIVE_COLUMNS: [&str; 13] = [
    "gen",
    "eval_id",
    "phiAm",
    "fWing",
    "R",
    "idMotor",
    "gammaTr",
    "mbsd",
    "lhd",
    "miffs",
    "aht",
    "feasible",
    "violation",
];

/// An in-memory CSV table with its schema tag.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub schema: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// Shortest text that parses back to the same value; NaN and infinities
/// use Rust's spellings.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

impl CsvTable {
    pub fn new(schema: &str, headers: &[&str]) -> Self {
        CsvTable { schema: schema.into(), headers: headers.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn push_f64(&mut self, row: &[f64]) {
        self.push(row.iter().map(|v| fmt_f64(*v)).collect());
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# schema: {}", self.schema)?;
        let mut cw = csv::Writer::from_writer(w);
        cw.write_record(&self.headers)?;
        for r in &self.rows {
            cw.write_record(r)?;
        }
        cw.flush()?;
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let f = File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        self.write_to(std::io::BufWriter::new(f))
    }

    pub fn read_from<R: Read>(r: R) -> Result<Self> {
        let mut br = BufReader::new(r);
        let mut first = String::new();
        br.read_line(&mut first)?;
        let schema = first
            .trim()
            .strip_prefix("# schema:")
            .map(|s| s.trim().to_string())
            .ok_or_else(|| Error::Io("missing '# schema:' line".into()))?;
        let mut cr = csv::Reader::from_reader(br);
        let headers = cr.headers()?.iter().map(str::to_string).collect();
        let rows = cr.records().map(|r| Ok(r?.iter().map(str::to_string).collect())).collect::<Result<_>>()?;
        Ok(CsvTable { schema, headers, rows })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let f = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::read_from(f)
    }

    pub fn expect_schema(&self, schema: &str) -> Result<()> {
        if self.schema == schema {
            Ok(())
        } else {
            Err(Error::Io(format!("expected schema {schema}, found {}", self.schema)))
        }
    }

    pub fn column(&self, name: &str) -> Result<usize> {
        self.headers.iter().position(|h| h == name).ok_or_else(|| Error::Io(format!("missing column '{name}'")))
    }
}

fn parse_cell<T: std::str::FromStr>(s: &str, row: usize, col: &str) -> Result<T> {
    s.trim().parse().map_err(|_| Error::Io(format!("row {row}, column {col}: cannot parse '{s}'")))
}

pub fn archive_table(entries: &[ArchiveEntry]) -> CsvTable {
    let mut t = CsvTable::new(ARCHIVE_SCHEMA, &ARCHIVE_COLUMNS);
    for e in entries {
        let mut row = vec![e.gen.to_string(), e.eval_id.to_string()];
        row.extend(e.x.iter().map(|v| fmt_f64(*v)));
        row.extend((0..4).map(|k| fmt_f64(e.outcome.extras.get(k).copied().unwrap_or(f64::NAN))));
        row.push(if e.outcome.feasible { "1".into() } else { "0".into() });
        row.push(fmt_f64(e.outcome.violation));
        t.push(row);
    }
    t
}

pub fn write_archive(path: &Path, entries: &[ArchiveEntry]) -> Result<()> {
    archive_table(entries).write(path)
}

/// Reads an archive back. Optimised-objective values are not stored
/// separately, so `objectives` is left empty and the four metrics land in
/// `extras`.
pub fn read_archive(path: &Path) -> Result<Vec<ArchiveEntry>> {
    archive_from_table(&CsvTable::read(path)?)
}

pub fn archive_from_table(t: &CsvTable) -> Result<Vec<ArchiveEntry>> {
    t.expect_schema(ARCHIVE_SCHEMA)?;
    let idx: Vec<usize> = ARCHIVE_COLUMNS.iter().map(|c| t.column(c)).collect::<Result<_>>()?;
    t.rows
        .iter()
        .enumerate()
        .map(|(r, row)| {
            let f = |k: usize| parse_cell::<f64>(&row[idx[k]], r + 1, ARCHIVE_COLUMNS[k]);
            let feasible = match row[idx[11]].trim() {
                "1" | "true" => true,
                "0" | "false" => false,
                other => return Err(Error::Io(format!("row {}: bad feasible flag '{other}'", r + 1))),
            };
            Ok(ArchiveEntry {
                gen: parse_cell(&row[idx[0]], r + 1, "gen")?,
                eval_id: parse_cell(&row[idx[1]], r + 1, "eval_id")?,
                x: (2..7).map(f).collect::<Result<_>>()?,
                outcome: Outcome {
                    objectives: Vec::new(),
                    violation: f(12)?,
                    feasible,
                    extras: (7..11).map(f).collect::<Result<_>>()?,
                },
            })
        })
        .collect()
}

pub fn hv_trace_table(trace: &[HvPoint]) -> CsvTable {
    let mut t = CsvTable::new("moea-trace/v1", &["gen", "evaluations", "hypervolume", "feasible_in_population"]);
    for p in trace {
        t.push(vec![
            p.gen.to_string(),
            p.evaluations.to_string(),
            fmt_f64(p.hypervolume),
            p.feasible_in_population.to_string(),
        ]);
    }
    t
}

pub fn isres_trace_table(trace: &[IsresTracePoint]) -> CsvTable {
    let mut t = CsvTable::new(
        "isres-trace/v1",
        &["gen", "evaluations", "best_objective", "best_violation", "success_rate", "step_multiplier"],
    );
    for p in trace {
        t.push(vec![
            p.gen.to_string(),
            p.evaluations.to_string(),
            fmt_f64(p.best_objective),
            fmt_f64(p.best_violation),
            fmt_f64(p.success_rate),
            fmt_f64(p.step_multiplier),
        ]);
    }
    t
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut w = std::io::BufWriter::new(f);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    Ok(())
}
