use std::io::Write;

use serde::Serialize;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Fixed 17-significant-digit float formatting for CSV cells.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn row(cells: &[f64]) -> String {
    cells.iter().map(|&x| num(x)).collect::<Vec<_>>().join(",")
}

/// `#`-prefixed metadata lines heading every CSV.
pub fn csv_header<P: Serialize>(
    out: &mut dyn Write,
    command: &str,
    params: &P,
    columns: &[String],
) -> anyhow::Result<()> {
    writeln!(out, "# polyring {VERSION}")?;
    writeln!(out, "# command: {command}")?;
    writeln!(out, "# params: {}", serde_json::to_string(params)?)?;
    writeln!(out, "{}", columns.join(","))?;
    Ok(())
}

/// JSON document with the common `command`, `params` and `version` fields
/// merged ahead of the command-specific body.
pub fn document<P: Serialize, B: Serialize>(
    command: &str,
    params: &P,
    body: &B,
) -> anyhow::Result<serde_json::Value> {
    let mut doc = serde_json::Map::new();
    doc.insert("command".into(), command.into());
    doc.insert("version".into(), VERSION.into());
    doc.insert("params".into(), serde_json::to_value(params)?);
    match serde_json::to_value(body)? {
        serde_json::Value::Object(fields) => doc.extend(fields),
        other => {
            doc.insert("result".into(), other);
        }
    }
    Ok(serde_json::Value::Object(doc))
}

pub fn write_json(out: &mut dyn Write, value: &serde_json::Value) -> anyhow::Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}
