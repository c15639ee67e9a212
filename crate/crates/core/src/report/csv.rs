//! CSV form of a run: one row per level, plus a trailing comment when the run
//! did not complete.

use std::io::Write;

use crate::driver::IterationRecord;
use crate::error::{Error, Result};

pub const HEADER: [&str; 12] = [
    "level",
    "n_elements",
    "n_dofs",
    "eta",
    "zeta",
    "product",
    "combined",
    "goal_value",
    "goal_error",
    "n_marked",
    "strategy",
    "theta",
];

const INCOMPLETE: &str = "# incomplete: ";

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

pub fn write_records<W: Write>(mut out: W, records: &[IterationRecord], failure: Option<&str>) -> Result<()> {
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(HEADER).map_err(csv_err)?;
        for r in records {
            w.write_record([
                r.level.to_string(),
                r.n_elements.to_string(),
                r.n_dofs.to_string(),
                format!("{:e}", r.eta),
                format!("{:e}", r.zeta),
                format!("{:e}", r.product),
                format!("{:e}", r.combined),
                format!("{:e}", r.goal_value),
                r.goal_error.map(|e| format!("{e:e}")).unwrap_or_default(),
                r.n_marked.to_string(),
                r.strategy.to_string(),
                r.theta.to_string(),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
    }
    if let Some(msg) = failure {
        writeln!(out, "{INCOMPLETE}{}", msg.replace('\n', " "))?;
    }
    Ok(())
}

pub fn records_to_string(records: &[IterationRecord], failure: Option<&str>) -> String {
    let mut buf = Vec::new();
    write_records(&mut buf, records, failure).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("CSV output is UTF-8")
}

/// Records of a CSV file and the failure message of an incomplete run.
#[derive(Clone, Debug, PartialEq)]
pub struct ParsedRun {
    pub records: Vec<IterationRecord>,
    pub failure: Option<String>,
}

fn field<T: std::str::FromStr>(row: &csv::StringRecord, k: usize, line: usize) -> Result<T> {
    let raw = row.get(k).unwrap_or("");
    raw.parse()
        .map_err(|_| Error::Parse(format!("line {line}: invalid {} value {raw:?}", HEADER[k])))
}

pub fn parse_records(text: &str) -> Result<ParsedRun> {
    let failure = text.lines().find_map(|l| l.strip_prefix(INCOMPLETE)).map(str::to_owned);
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header = reader.headers().map_err(csv_err)?;
    if header.iter().ne(HEADER) {
        return Err(Error::Parse(format!("unexpected header {:?}", header.iter().collect::<Vec<_>>())));
    }
    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(csv_err)?;
        let line = i + 2;
        let goal_error = match row.get(8).unwrap_or("") {
            "" => None,
            _ => Some(field(&row, 8, line)?),
        };
        records.push(IterationRecord {
            level: field(&row, 0, line)?,
            n_elements: field(&row, 1, line)?,
            n_dofs: field(&row, 2, line)?,
            eta: field(&row, 3, line)?,
            zeta: field(&row, 4, line)?,
            product: field(&row, 5, line)?,
            combined: field(&row, 6, line)?,
            goal_value: field(&row, 7, line)?,
            goal_error,
            n_marked: field(&row, 9, line)?,
            strategy: field(&row, 10, line)?,
            theta: field(&row, 11, line)?,
        });
    }
    Ok(ParsedRun { records, failure })
}
