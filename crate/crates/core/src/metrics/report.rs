use std::fmt::Write as _;

use super::EvalReport;

/// The five Table-style columns, already in percent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableRow {
    pub f1_real: f64,
    pub f1_fake: f64,
    pub accuracy: f64,
    pub eer: f64,
    pub auc: f64,
}

impl From<&EvalReport> for TableRow {
    fn from(r: &EvalReport) -> Self {
        Self {
            f1_real: 100.0 * r.f1_real,
            f1_fake: 100.0 * r.f1_fake,
            accuracy: 100.0 * r.accuracy,
            eer: 100.0 * r.eer,
            auc: 100.0 * r.auc,
        }
    }
}

/// `name & f1_real & f1_fake & accuracy & eer & auc`, one decimal each.
pub fn render_table_row(name: &str, row: &TableRow) -> String {
    format!(
        "{name} & {:.1} & {:.1} & {:.1} & {:.1} & {:.1}",
        row.f1_real, row.f1_fake, row.accuracy, row.eer, row.auc
    )
}

/// Stable `key: value` rendering of a report. Percentages use one decimal.
pub fn render_report(r: &EvalReport) -> String {
    let row = TableRow::from(r);
    let c = &r.confusion;
    let mut out = String::new();
    let members = if r.member_ids.is_empty() {
        "-".to_string()
    } else {
        r.member_ids.join(",")
    };
    let _ = writeln!(out, "member_ids: {members}");
    let _ = writeln!(out, "f1_real: {:.1}", row.f1_real);
    let _ = writeln!(out, "f1_fake: {:.1}", row.f1_fake);
    let _ = writeln!(out, "accuracy: {:.1}", row.accuracy);
    let _ = writeln!(out, "eer: {:.1}", row.eer);
    let _ = writeln!(out, "auc: {:.1}", row.auc);
    let _ = writeln!(out, "threshold: {}", r.threshold);
    let _ = writeln!(out, "confusion: tp={} fp={} tn={} fn={}", c.tp, c.fp, c.tn, c.fn_);
    let _ = writeln!(out, "n_real: {}", r.n_real);
    let _ = writeln!(out, "n_fake: {}", r.n_fake);
    let warnings = if r.warnings.is_empty() {
        "none".to_string()
    } else {
        r.warnings.join("; ")
    };
    let _ = writeln!(out, "warnings: {warnings}");
    out
}
