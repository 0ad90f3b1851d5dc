//! Median tables over a result store.

use std::collections::BTreeMap;
use std::io::Write;

use falqon::stats::{median, Metric};
use falqon::RunRecord;

use crate::error::{BenchError, Result};
use crate::methods::MethodSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub method: String,
    /// `None` for the row aggregating every depth.
    pub depth: Option<usize>,
    pub n_cells: usize,
    pub median_p_success: f64,
    pub median_e1: f64,
    pub median_e2: f64,
}

impl SummaryRow {
    fn from_records(method: &str, depth: Option<usize>, records: &[&RunRecord]) -> Self {
        let med = |metric: Metric| {
            let values: Vec<f64> = records.iter().map(|r| metric.of(r)).collect();
            median(&values).expect("rows are built from non-empty groups")
        };
        Self {
            method: method.to_string(),
            depth,
            n_cells: records.len(),
            median_p_success: med(Metric::PSuccess),
            median_e1: med(Metric::E1),
            median_e2: med(Metric::E2),
        }
    }

    pub fn median(&self, metric: Metric) -> f64 {
        match metric {
            Metric::PSuccess => self.median_p_success,
            Metric::E1 => self.median_e1,
            Metric::E2 => self.median_e2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    /// One row per method over all (instance, depth) cells.
    pub overall: Vec<SummaryRow>,
    /// One row per (method, depth).
    pub per_depth: Vec<SummaryRow>,
}

/// Medians per method, overall and per depth. Methods appear in first-seen
/// order of `records`.
pub fn summarize(records: &[RunRecord]) -> Result<Summary> {
    if records.is_empty() {
        return Err(BenchError::EmptyStore);
    }
    let mut order: Vec<&str> = Vec::new();
    let mut by_method: BTreeMap<&str, Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        if !by_method.contains_key(r.method.as_str()) {
            order.push(&r.method);
        }
        by_method.entry(&r.method).or_default().push(r);
    }
    let mut overall = Vec::new();
    let mut per_depth = Vec::new();
    for method in order {
        let rs = &by_method[method];
        overall.push(SummaryRow::from_records(method, None, rs));
        let mut depths: BTreeMap<usize, Vec<&RunRecord>> = BTreeMap::new();
        for r in rs {
            depths.entry(r.depth).or_default().push(r);
        }
        for (d, group) in depths {
            per_depth.push(SummaryRow::from_records(method, Some(d), &group));
        }
    }
    Ok(Summary { overall, per_depth })
}

fn label(method: &str) -> String {
    method
        .parse::<MethodSpec>()
        .map(|m| m.label())
        .unwrap_or_else(|_| method.to_string())
}

impl Summary {
    pub fn overall_row(&self, method: &str) -> Option<&SummaryRow> {
        self.overall.iter().find(|r| r.method == method)
    }

    pub fn depth_row(&self, method: &str, depth: usize) -> Option<&SummaryRow> {
        self.per_depth
            .iter()
            .find(|r| r.method == method && r.depth == Some(depth))
    }

    /// Overall and per-depth rows; the overall rows carry depth `all`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "method",
            "label",
            "depth",
            "n_cells",
            "median_p_success",
            "median_e1",
            "median_e2",
        ])?;
        for row in self.overall.iter().chain(&self.per_depth) {
            let depth = row
                .depth
                .map_or_else(|| "all".to_string(), |d| d.to_string());
            w.write_record([
                row.method.clone(),
                label(&row.method),
                depth,
                row.n_cells.to_string(),
                format!("{:e}", row.median_p_success),
                format!("{:e}", row.median_e1),
                format!("{:e}", row.median_e2),
            ])?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    /// Overall medians as an aligned text table, E1 in units of 1e-3 and E2
    /// in units of 1e-4.
    pub fn to_text(&self) -> String {
        let header = [
            "Method",
            "Med P_succ",
            "Med E1 x1e-3",
            "Med E2 x1e-4",
            "Cells",
        ];
        let rows: Vec<[String; 5]> = self
            .overall
            .iter()
            .map(|r| {
                [
                    label(&r.method),
                    format!("{:.3e}", r.median_p_success),
                    format!("{:.3}", r.median_e1 * 1e3),
                    format!("{:.3}", r.median_e2 * 1e4),
                    r.n_cells.to_string(),
                ]
            })
            .collect();
        let mut widths = header.map(str::len);
        for row in &rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let mut out = String::new();
        let mut push_row = |cells: &[String]| {
            let line: Vec<String> = cells
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    if i == 0 {
                        format!("{c:<w$}", w = widths[0])
                    } else {
                        format!("{c:>w$}", w = widths[i])
                    }
                })
                .collect();
            out.push_str(line.join("  ").trim_end());
            out.push('\n');
        };
        push_row(&header.map(String::from));
        push_row(&widths.map(|w| "-".repeat(w)));
        for row in &rows {
            push_row(row);
        }
        out
    }
}

/// Long-format CSV: one row per (method, depth, instance, metric).
pub fn write_tidy_csv<W: Write>(records: &[RunRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["method", "depth", "instance", "metric", "value"])?;
    for r in records {
        for metric in Metric::ALL {
            w.write_record([
                r.method.clone(),
                r.depth.to_string(),
                r.instance.to_string(),
                metric.name().to_string(),
                format!("{:e}", metric.of(r)),
            ])?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(method: &str, instance: usize, depth: usize, p: f64, n: u64) -> RunRecord {
        RunRecord::new(method, instance, depth, p, n, 0, vec![]).unwrap()
    }

    #[test]
    fn single_record() {
        let r = rec("falqon-fo", 0, 2, 0.5, 4);
        let s = summarize(std::slice::from_ref(&r)).unwrap();
        let row = s.overall_row("falqon-fo").unwrap();
        assert_eq!(
            (row.median_p_success, row.median_e1, row.median_e2),
            (r.p_success, r.e1, r.e2)
        );
        assert_eq!(s.depth_row("falqon-fo", 2).unwrap().n_cells, 1);
    }

    #[test]
    fn even_counts_average_the_middle() {
        let rs = vec![
            rec("a", 0, 1, 0.1, 1),
            rec("a", 1, 1, 0.4, 1),
            rec("a", 2, 2, 0.2, 1),
            rec("a", 3, 2, 0.3, 1),
        ];
        let s = summarize(&rs).unwrap();
        assert!((s.overall_row("a").unwrap().median_p_success - 0.25).abs() < 1e-15);
        assert!((s.depth_row("a", 1).unwrap().median_p_success - 0.25).abs() < 1e-15);
        assert!((s.depth_row("a", 2).unwrap().median_p_success - 0.25).abs() < 1e-15);
        assert!(summarize(&[]).is_err());
    }

    #[test]
    fn outputs() {
        let rs = vec![
            rec("falqon-fo", 0, 1, 0.1, 1),
            rec("opt-falqon-fo", 0, 1, 0.2, 30),
        ];
        let s = summarize(&rs).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let csv = String::from_utf8(buf).unwrap();
        assert_eq!(csv.lines().count(), 5);
        assert!(csv.contains("opt-falqon-fo,Optimal FALQON FO,all,1,"));
        let text = s.to_text();
        assert!(text
            .lines()
            .nth(3)
            .unwrap()
            .starts_with("Optimal FALQON FO"));
        let mut buf = Vec::new();
        write_tidy_csv(&rs, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 7);
    }
}
