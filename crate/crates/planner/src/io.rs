//! Model files, JSON reports and episode streams.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use efe_core::model::{validate_model, Model};
use efe_core::RawModel;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{PlannerError, Result};

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PlannerError + '_ {
    move |source| PlannerError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|source| PlannerError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

/// Pretty JSON with a trailing newline.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn create_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => std::fs::create_dir_all(dir).map_err(io_err(path)),
        _ => Ok(()),
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    create_parent(path)?;
    std::fs::write(path, text).map_err(io_err(path))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    write_text(path, &to_json_string(value)?)
}

/// One compact JSON document per line.
pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    create_parent(path)?;
    let file = File::create(path).map_err(io_err(path))?;
    let mut out = BufWriter::new(file);
    for item in items {
        serde_json::to_writer(&mut out, item)?;
        out.write_all(b"\n").map_err(io_err(path))?;
    }
    out.flush().map_err(io_err(path))
}

pub fn read_model(path: &Path) -> Result<Model> {
    let raw: RawModel = read_json(path)?;
    Ok(validate_model(&raw)?)
}

pub fn write_model(path: &Path, model: &Model) -> Result<()> {
    write_json(path, &model.to_raw())
}

/// CSV text preceded by a `# <schema>` line.
pub fn csv_with_schema<T: Serialize>(schema: &str, rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    let body = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
    let mut out = format!("# {schema}\n");
    out.push_str(&String::from_utf8(body).expect("csv output is utf-8"));
    Ok(out)
}
