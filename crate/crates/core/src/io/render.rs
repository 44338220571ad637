//! Report rendering. JSON keys are sorted; rationals are strings.

use serde_json::{json, Map, Value};

use crate::report::{CheckReport, ReportValue, Verdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Json,
}

fn value_pairs(pairs: &[(String, ReportValue)]) -> Value {
    Value::Array(
        pairs
            .iter()
            .map(|(s, v)| json!({ "state": s, "value": v.to_string() }))
            .collect(),
    )
}

fn param_map(params: &[(String, String)]) -> Value {
    Value::Object(
        params
            .iter()
            .map(|(k, v)| (k.clone(), Value::String(v.clone())))
            .collect(),
    )
}

fn padded(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in rows {
        let cells: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, s)| format!("{s:<w$}", w = widths[c]))
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}

pub fn render_report(report: &CheckReport, format: Format) -> String {
    match format {
        Format::Json => {
            let mut obj = Map::new();
            obj.insert("kind".into(), json!(report.kind));
            obj.insert("verdict".into(), json!(report.verdict.to_string()));
            if let Verdict::VerifiedUpToHorizon { horizon } = report.verdict {
                obj.insert("horizon".into(), json!(horizon));
            }
            obj.insert("fixed_point".into(), json!(report.fixed_point));
            obj.insert("parameters".into(), param_map(&report.parameters));
            obj.insert("bound".into(), value_pairs(&report.bound));
            if let Some(reference) = &report.reference {
                obj.insert("reference".into(), value_pairs(reference));
            }
            let violations = report
                .violations
                .iter()
                .map(|v| {
                    let mut o = Map::new();
                    o.insert("state".into(), json!(v.state));
                    o.insert("expected".into(), json!(v.expected));
                    o.insert("actual".into(), json!(v.actual));
                    if let Some(d) = &v.detail {
                        o.insert("detail".into(), json!(d));
                    }
                    Value::Object(o)
                })
                .collect();
            obj.insert("violations".into(), Value::Array(violations));
            let mut s = serde_json::to_string_pretty(&Value::Object(obj)).expect("json values serialize");
            s.push('\n');
            s
        }
        Format::Text => {
            let mut out = format!("kind: {}\nverdict: {}", report.kind, report.verdict);
            if let Verdict::VerifiedUpToHorizon { horizon } = report.verdict {
                out.push_str(&format!(" (horizon {horizon})"));
            }
            out.push('\n');
            if !report.parameters.is_empty() {
                let ps: Vec<String> = report.parameters.iter().map(|(k, v)| format!("{k}={v}")).collect();
                out.push_str(&format!("parameters: {}\n", ps.join(" ")));
            }
            out.push_str(&format!("fixed point: {}\n", if report.fixed_point { "yes" } else { "no" }));
            let mut header = vec!["state".to_string(), "bound".to_string()];
            if report.reference.is_some() {
                header.push("reference".into());
            }
            let mut rows = vec![header];
            for (i, (s, v)) in report.bound.iter().enumerate() {
                let mut row = vec![s.clone(), v.to_string()];
                if let Some(r) = &report.reference {
                    row.push(r.get(i).map(|(_, v)| v.to_string()).unwrap_or_default());
                }
                rows.push(row);
            }
            out.push_str(&padded(&rows));
            if !report.violations.is_empty() {
                out.push_str(&format!("violations: {}\n", report.violations.len()));
                for v in &report.violations {
                    out.push_str(&format!(
                        "  {}: image {} does not dominate {}",
                        v.state, v.expected, v.actual
                    ));
                    if let Some(d) = &v.detail {
                        out.push_str(&format!(" ({d})"));
                    }
                    out.push('\n');
                }
            }
            out
        }
    }
}

/// A titled table: `header` names the columns of each row.
pub fn render_table(
    kind: &str,
    params: &[(String, String)],
    header: &[&str],
    rows: &[Vec<String>],
    format: Format,
) -> String {
    match format {
        Format::Json => {
            let rows: Vec<Value> = rows
                .iter()
                .map(|r| {
                    Value::Object(
                        header
                            .iter()
                            .zip(r)
                            .map(|(h, v)| (h.to_string(), Value::String(v.clone())))
                            .collect(),
                    )
                })
                .collect();
            let mut s = serde_json::to_string_pretty(&json!({
                "kind": kind,
                "parameters": param_map(params),
                "rows": rows,
            }))
            .expect("json values serialize");
            s.push('\n');
            s
        }
        Format::Text => {
            let mut out = format!("# {kind}");
            for (k, v) in params {
                out.push_str(&format!(" {k}={v}"));
            }
            out.push('\n');
            let mut all = vec![header.iter().map(|h| h.to_string()).collect::<Vec<_>>()];
            all.extend(rows.iter().cloned());
            out.push_str(&padded(&all));
            out
        }
    }
}
