//! Text persistence for tuning tables. Times are stored as hexadecimal
//! floats so a load/save cycle reproduces the file byte for byte.
//!
//! ```text
//! mpmmtune v1
//! # free-form comment
//! total <total_s> <selection_s>
//! <prec> <n> <threads> <best_nmin> <t_block> <t_predphase> <t_predicted> <reldiff> <t_simple|-> <t_strassen> <winner>
//! threshold <prec> <threads> <n|none>
//! gap <prec> <n> <threads> <reason>
//! ```
//!
//! `<prec>` is written as `kind,bits`, e.g. `dd,106` or `ap,128`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{Gap, Threshold, TuningResult, TuningTable};
use crate::error::{Error, Result};
use crate::matmul::AlgorithmChoice;
use crate::mpscalar::hex::{format_f64, parse_f64};
use crate::mpscalar::PrecisionSpec;

pub const TABLE_MAGIC: &str = "mpmmtune";
const VERSION: &str = "v1";

impl TuningTable {
    pub fn to_text(&self) -> String {
        let mut s = format!("{TABLE_MAGIC} {VERSION}\n");
        for c in &self.comments {
            let _ = writeln!(s, "# {c}");
        }
        let _ = writeln!(
            s,
            "total {} {}",
            format_f64(self.total_tuning_time_s),
            format_f64(self.selection_phase_s)
        );
        for r in &self.rows {
            let simple = r.simple_time_s.map_or_else(|| "-".to_string(), format_f64);
            let _ = writeln!(
                s,
                "{} {} {} {} {} {} {} {} {} {} {}",
                r.prec,
                r.n,
                r.threads,
                r.best_n_min,
                format_f64(r.block_time_s),
                format_f64(r.prediction_time_s),
                format_f64(r.predicted_s),
                format_f64(r.rel_diff),
                simple,
                format_f64(r.strassen_time_s),
                r.winner
            );
        }
        for t in &self.thresholds {
            let n = t.n.map_or_else(|| "none".to_string(), |n| n.to_string());
            let _ = writeln!(s, "threshold {} {} {n}", t.prec, t.threads);
        }
        for g in &self.gaps {
            let reason = g.reason.replace(['\n', '\r'], " ");
            let _ = writeln!(s, "gap {} {} {} {reason}", g.prec, g.n, g.threads);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        match lines.next() {
            Some((_, header)) => {
                let mut it = header.split_whitespace();
                if it.next() != Some(TABLE_MAGIC) {
                    return Err(Error::format(1, "not a tuning table"));
                }
                match (it.next(), it.next()) {
                    (Some(VERSION), None) => {}
                    (Some(v), None) => {
                        return Err(Error::format(1, format!("unsupported version {v:?}")))
                    }
                    _ => return Err(Error::format(1, "malformed header")),
                }
            }
            None => return Err(Error::format(0, "empty table file")),
        }

        let mut table = TuningTable::default();
        let mut saw_total = false;
        for (ln, line) in lines {
            if let Some(c) = line.strip_prefix('#') {
                table
                    .comments
                    .push(c.strip_prefix(' ').unwrap_or(c).to_string());
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let (tag, rest) = match line.split_once(' ') {
                Some((t @ ("total" | "threshold" | "gap"), rest)) => (t, rest),
                _ => ("row", line),
            };
            let fields: Vec<&str> = rest.split_whitespace().collect();
            let p = Fields {
                ln,
                fields: &fields,
            };
            match tag {
                "total" => {
                    p.expect_len(2)?;
                    table.total_tuning_time_s = p.float(0)?;
                    table.selection_phase_s = p.float(1)?;
                    saw_total = true;
                }
                "row" => {
                    p.expect_len(11)?;
                    let row = TuningResult {
                        prec: p.prec(0)?,
                        n: p.int(1)?,
                        threads: p.int(2)?,
                        best_n_min: p.int(3)?,
                        block_time_s: p.float(4)?,
                        prediction_time_s: p.float(5)?,
                        predicted_s: p.float(6)?,
                        rel_diff: p.float(7)?,
                        simple_time_s: match fields[8] {
                            "-" => None,
                            _ => Some(p.float(8)?),
                        },
                        strassen_time_s: p.float(9)?,
                        winner: fields[10]
                            .parse::<AlgorithmChoice>()
                            .map_err(|e| Error::format(ln, e.to_string()))?,
                    };
                    table.rows.push(row);
                }
                "threshold" => {
                    p.expect_len(3)?;
                    table.thresholds.push(Threshold {
                        prec: p.prec(0)?,
                        threads: p.int(1)?,
                        n: match fields[2] {
                            "none" => None,
                            _ => Some(p.int(2)?),
                        },
                    });
                }
                "gap" => {
                    if fields.len() < 3 {
                        return Err(Error::format(ln, "gap needs precision, n and threads"));
                    }
                    let reason = rest.splitn(4, ' ').nth(3).unwrap_or("").to_string();
                    table.gaps.push(Gap {
                        prec: p.prec(0)?,
                        n: p.int(1)?,
                        threads: p.int(2)?,
                        reason,
                    });
                }
                _ => unreachable!(),
            }
        }
        if !saw_total {
            return Err(Error::format(0, "missing total line"));
        }
        Ok(table)
    }
}

struct Fields<'a> {
    ln: usize,
    fields: &'a [&'a str],
}

impl Fields<'_> {
    fn expect_len(&self, n: usize) -> Result<()> {
        if self.fields.len() == n {
            Ok(())
        } else {
            Err(Error::format(
                self.ln,
                format!("expected {n} fields, found {}", self.fields.len()),
            ))
        }
    }

    fn int(&self, i: usize) -> Result<usize> {
        self.fields[i]
            .parse()
            .map_err(|_| Error::format(self.ln, format!("bad integer {:?}", self.fields[i])))
    }

    fn float(&self, i: usize) -> Result<f64> {
        parse_f64(self.fields[i])
            .map_err(|_| Error::format(self.ln, format!("bad hex float {:?}", self.fields[i])))
    }

    fn prec(&self, i: usize) -> Result<PrecisionSpec> {
        self.fields[i]
            .parse()
            .map_err(|_| Error::format(self.ln, format!("bad precision {:?}", self.fields[i])))
    }
}

pub fn save_table(table: &TuningTable, path: &Path) -> Result<()> {
    fs::write(path, table.to_text())?;
    Ok(())
}

pub fn load_table(path: &Path) -> Result<TuningTable> {
    TuningTable::from_text(&fs::read_to_string(path)?)
}
