//! Long-format choice CSV: one row per (individual, task, alternative).
//!
//! Required columns are `individual_id`, `task_id`, `alt_id` (1-based) and
//! `chosen`; `available` is optional and defaults to 1. Every other column
//! is a numeric attribute. Alternatives missing from a task are treated as
//! unavailable.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use choquet_probit_core::dataset::{ChoiceDataset, ChoiceTask};

use crate::error::{CliError, CliResult};

const RESERVED: [&str; 5] = ["individual_id", "task_id", "alt_id", "chosen", "available"];

struct Row {
    line: u64,
    alt: usize,
    chosen: bool,
    available: bool,
    values: Vec<f64>,
}

struct TaskRows {
    individual: u64,
    task: u64,
    rows: Vec<Row>,
}

pub fn read_dataset(path: &Path) -> CliResult<ChoiceDataset> {
    let file = std::fs::File::open(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    parse_dataset(file, &path.display().to_string())
}

pub fn parse_dataset<R: Read>(reader: R, origin: &str) -> CliResult<ChoiceDataset> {
    let at = |line: u64, message: String| CliError::DataAt {
        path: origin.to_string(),
        line,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| at(1, e.to_string()))?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let mut required = [0usize; 4];
    for (slot, name) in required.iter_mut().zip(&RESERVED[..4]) {
        *slot = find(name).ok_or_else(|| at(1, format!("missing required column `{name}`")))?;
    }
    let [c_ind, c_task, c_alt, c_chosen] = required;
    let c_avail = find("available");
    let attr_cols: Vec<usize> = (0..headers.len())
        .filter(|&i| !RESERVED.contains(&&headers[i]))
        .collect();
    let column_names: Vec<String> = attr_cols.iter().map(|&i| headers[i].to_string()).collect();
    for (k, name) in column_names.iter().enumerate() {
        if name.is_empty() {
            return Err(at(1, format!("column {} has an empty name", attr_cols[k] + 1)));
        }
        if column_names[..k].contains(name) {
            return Err(at(1, format!("duplicate column `{name}`")));
        }
    }

    let mut tasks: Vec<TaskRows> = Vec::new();
    let mut index: HashMap<(u64, u64), usize> = HashMap::new();
    let mut n_alternatives = 0usize;
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            at(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let cell = |c: usize| record.get(c).unwrap_or("");
        let int = |c: usize| -> CliResult<u64> {
            cell(c)
                .parse::<u64>()
                .map_err(|_| at(line, format!("column `{}`: expected a non-negative integer, got `{}`", &headers[c], cell(c))))
        };
        let flag = |c: usize| -> CliResult<bool> {
            match cell(c) {
                "1" => Ok(true),
                "0" => Ok(false),
                other => Err(at(line, format!("column `{}`: expected 0 or 1, got `{other}`", &headers[c]))),
            }
        };
        let individual = int(c_ind)?;
        let task = int(c_task)?;
        let alt = int(c_alt)? as usize;
        if alt == 0 {
            return Err(at(line, "column `alt_id`: alternatives are numbered from 1".into()));
        }
        let chosen = flag(c_chosen)?;
        let available = match c_avail {
            Some(c) => flag(c)?,
            None => true,
        };
        let mut values = Vec::with_capacity(attr_cols.len());
        for &c in &attr_cols {
            let raw = cell(c);
            let v = if raw.is_empty() && !available {
                0.0
            } else {
                raw.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| at(line, format!("column `{}`: expected a finite number, got `{raw}`", &headers[c])))?
            };
            values.push(v);
        }
        let slot = *index.entry((individual, task)).or_insert_with(|| {
            tasks.push(TaskRows {
                individual,
                task,
                rows: Vec::new(),
            });
            tasks.len() - 1
        });
        if let Some(prev) = tasks[slot].rows.iter().find(|r| r.alt == alt - 1) {
            return Err(at(
                line,
                format!(
                    "duplicate row for individual {individual}, task {task}, alternative {alt} (first on line {})",
                    prev.line
                ),
            ));
        }
        n_alternatives = n_alternatives.max(alt);
        tasks[slot].rows.push(Row {
            line,
            alt: alt - 1,
            chosen,
            available,
            values,
        });
    }
    if tasks.is_empty() {
        return Err(CliError::Data(format!("{origin}: no data rows")));
    }

    let nc = column_names.len();
    let mut out = Vec::with_capacity(tasks.len());
    for t in tasks {
        let chosen: Vec<&Row> = t.rows.iter().filter(|r| r.chosen).collect();
        let first_line = t.rows[0].line;
        let chosen = match chosen.as_slice() {
            [] => {
                return Err(at(
                    first_line,
                    format!("individual {}, task {}: no chosen alternative", t.individual, t.task),
                ))
            }
            [one] => one,
            [a, b, ..] => {
                return Err(at(
                    b.line,
                    format!(
                        "individual {}, task {}: more than one chosen alternative (also line {})",
                        t.individual, t.task, a.line
                    ),
                ))
            }
        };
        if !chosen.available {
            return Err(at(
                chosen.line,
                format!("individual {}, task {}: chosen alternative is unavailable", t.individual, t.task),
            ));
        }
        let mut available = vec![false; n_alternatives];
        let mut values = vec![0.0; n_alternatives * nc];
        for r in &t.rows {
            available[r.alt] = r.available;
            values[r.alt * nc..(r.alt + 1) * nc].copy_from_slice(&r.values);
        }
        out.push(ChoiceTask {
            individual: t.individual,
            task: t.task,
            available,
            values,
            chosen: chosen.alt,
        });
    }
    ChoiceDataset::new(column_names, n_alternatives, out).map_err(|e| CliError::Data(format!("{origin}: {e}")))
}

pub fn write_dataset(path: &Path, data: &ChoiceDataset) -> CliResult<()> {
    let file = std::fs::File::create(path).map_err(CliError::io(path))?;
    let mut w = std::io::BufWriter::new(file);
    write_dataset_to(&mut w, data).map_err(CliError::io(path))?;
    w.flush().map_err(CliError::io(path))
}

/// Writes every alternative of every task, unavailable ones included, with
/// shortest round-trip float formatting.
pub fn write_dataset_to<W: Write>(w: W, data: &ChoiceDataset) -> std::io::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let mut header: Vec<&str> = RESERVED.to_vec();
    header.extend(data.column_names.iter().map(String::as_str));
    wtr.write_record(&header)?;
    let nc = data.n_columns();
    let mut record: Vec<String> = Vec::with_capacity(header.len());
    for t in &data.tasks {
        for a in 0..data.n_alternatives {
            record.clear();
            record.push(t.individual.to_string());
            record.push(t.task.to_string());
            record.push((a + 1).to_string());
            record.push(u8::from(t.chosen == a).to_string());
            record.push(u8::from(t.available[a]).to_string());
            record.extend((0..nc).map(|c| t.value(nc, a, c).to_string()));
            wtr.write_record(&record)?;
        }
    }
    wtr.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> CliResult<ChoiceDataset> {
        parse_dataset(s.as_bytes(), "test.csv")
    }

    #[test]
    fn missing_alternative_is_unavailable() {
        let d = parse(
            "individual_id,task_id,alt_id,chosen,x\n\
             1,1,1,1,2.5\n\
             1,1,3,0,4\n",
        )
        .unwrap();
        assert_eq!(d.n_alternatives, 3);
        assert_eq!(d.tasks[0].available, vec![true, false, true]);
        assert_eq!(d.tasks[0].chosen, 0);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse("individual_id,task_id,alt_id,chosen,x\n1,1,1,1,abc\n").unwrap_err();
        assert!(matches!(e, CliError::DataAt { line: 2, .. }), "{e}");
        let e = parse("individual_id,task_id,alt_id,chosen,x\n1,1,1,1,1\n1,1,1,0,2\n").unwrap_err();
        assert!(matches!(e, CliError::DataAt { line: 3, .. }), "{e}");
        assert_eq!(e.exit_code(), crate::error::exit::DATA);
    }
}
