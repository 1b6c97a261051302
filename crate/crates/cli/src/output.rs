use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

/// Opens `--output` or stdout.
pub fn sink(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Configuration block attached to every artifact.
pub fn config_value<A: Serialize>(command: &str, args: &A) -> serde_json::Result<Value> {
    let mut v = serde_json::to_value(args)?;
    if let Value::Object(map) = &mut v {
        map.insert("command".into(), json!(command));
        map.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    }
    Ok(v)
}

pub fn write_json(out: &mut dyn Write, value: &Value) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    out.flush()
}

/// CSV files start with one `# config: {...}` comment line.
pub fn write_csv_header(out: &mut dyn Write, config: &Value) -> io::Result<()> {
    writeln!(out, "# config: {config}")
}

/// Quotes a CSV field when it holds a separator or a quote.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
