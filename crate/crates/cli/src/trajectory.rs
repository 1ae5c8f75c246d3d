//! Trajectory files: one row per parameter value, then the breakpoints.
//!
//! ```text
//! kind flow
//! columns t v1 v2
//! row 0.0000000000000000e+00 1.0000000000000000e+00 -1.0000000000000000e+00
//! row 1.0000000000000000e+00 0.0000000000000000e+00 0.0000000000000000e+00
//! breakpoints 1
//! 1.0000000000000000e+00
//! ```

use std::fmt::Write;

use crate::error::CliError;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryFile {
    pub kind: String,
    pub parameter: String,
    pub vertex_names: Vec<String>,
    /// Parameter value followed by one value per vertex.
    pub rows: Vec<Vec<f64>>,
    pub breakpoints: Vec<f64>,
}

impl TrajectoryFile {
    pub fn parameters(&self) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(|r| r[0])
    }

    pub fn row_at(&self, parameter: f64) -> Option<&[f64]> {
        self.rows.iter().find(|r| r[0] == parameter).map(|r| &r[1..])
    }

    pub fn check(&self) -> Result<(), String> {
        for (k, row) in self.rows.iter().enumerate() {
            if row.len() != self.vertex_names.len() + 1 {
                return Err(format!("row {k} has {} columns, expected {}", row.len(), self.vertex_names.len() + 1));
            }
            if k > 0 && row[0] <= self.rows[k - 1][0] {
                return Err(format!("parameter column is not strictly increasing at row {k}"));
            }
        }
        Ok(())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        writeln!(out, "kind {}", self.kind).unwrap();
        writeln!(out, "columns {} {}", self.parameter, self.vertex_names.join(" ")).unwrap();
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
            writeln!(out, "row {}", cells.join(" ")).unwrap();
        }
        writeln!(out, "breakpoints {}", self.breakpoints.len()).unwrap();
        for &b in &self.breakpoints {
            writeln!(out, "{}", fmt_f64(b)).unwrap();
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let bad = |reason: String| CliError::parse("trajectory", reason);
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let kind = lines
            .next()
            .and_then(|l| l.strip_prefix("kind "))
            .ok_or_else(|| bad("missing kind line".into()))?
            .trim()
            .to_string();
        let columns = lines
            .next()
            .and_then(|l| l.strip_prefix("columns "))
            .ok_or_else(|| bad("missing columns line".into()))?;
        let mut names = columns.split_whitespace().map(str::to_string);
        let parameter = names.next().ok_or_else(|| bad("empty columns line".into()))?;
        let vertex_names: Vec<String> = names.collect();
        let number = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("{s:?}: {e}")));
        let mut rows = Vec::new();
        let mut breakpoints = Vec::new();
        while let Some(line) = lines.next() {
            if let Some(rest) = line.strip_prefix("row ") {
                rows.push(rest.split_whitespace().map(number).collect::<Result<Vec<_>, _>>()?);
            } else if let Some(rest) = line.strip_prefix("breakpoints ") {
                let count: usize = rest.trim().parse().map_err(|e| bad(format!("breakpoint count: {e}")))?;
                for _ in 0..count {
                    let value = lines.next().ok_or_else(|| bad("truncated breakpoint block".into()))?;
                    breakpoints.push(number(value.trim())?);
                }
            } else {
                return Err(bad(format!("unexpected line {line:?}")));
            }
        }
        let file = TrajectoryFile {
            kind,
            parameter,
            vertex_names,
            rows,
            breakpoints,
        };
        file.check().map_err(bad)?;
        Ok(file)
    }
}
