//! Embedding and judgment file formats.
//!
//! Embeddings are stored either in the `W1KPEMB1` binary container or as CSV.
//! The binary layout (all integers little-endian):
//!
//! ```text
//! b"W1KPEMB1"            8 bytes magic
//! n: u32, dim: u32       row count and dimension
//! n * dim f32            row-major values
//! m: u32                 byte length of the trailer
//! m bytes of UTF-8 JSON  {"ids": [...], "provenance": "..."}
//! ```
//!
//! The CSV form has a header `id,v0,...,v{dim-1}` and one row per image.
//! Judgments are JSON lines, one record per line; blank lines are skipped.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    EmbeddingSet, GradedJudgment, JudgmentKind, JudgmentRecords, Numbered, TripletJudgment,
};

pub const EMBEDDING_MAGIC: &[u8; 8] = b"W1KPEMB1";

#[derive(Serialize, Deserialize)]
struct Trailer {
    ids: Vec<String>,
    #[serde(default)]
    provenance: String,
}

/// Reads an embedding file, detecting the binary container by its magic and
/// falling back to CSV otherwise.
pub fn read_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingSet> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let context = path.display().to_string();
    if bytes.starts_with(EMBEDDING_MAGIC) {
        decode_binary(&bytes, &context)
    } else if looks_like_csv(&bytes) {
        decode_csv(&bytes, &context)
    } else {
        Err(Error::format(
            context,
            "byte 0",
            "missing W1KPEMB1 magic and not a CSV file with an `id` header",
        ))
    }
}

fn looks_like_csv(bytes: &[u8]) -> bool {
    let bytes = bytes.strip_prefix(b"\xEF\xBB\xBF").unwrap_or(bytes);
    bytes.starts_with(b"id,")
}

/// Writes `set`, choosing CSV when the path ends in `.csv` and the binary
/// container otherwise.
pub fn write_embeddings(set: &EmbeddingSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let bytes = if is_csv {
        encode_csv(set)?
    } else {
        encode_binary(set)?
    };
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Serializes to the binary container.
pub fn encode_binary(set: &EmbeddingSet) -> Result<Vec<u8>> {
    let n = u32::try_from(set.len())
        .map_err(|_| Error::validation("too many rows for the binary format"))?;
    let dim = u32::try_from(set.dim())
        .map_err(|_| Error::validation("dimension too large for the binary format"))?;
    let trailer = serde_json::to_vec(&Trailer {
        ids: set.ids().to_vec(),
        provenance: set.provenance().to_owned(),
    })
    .expect("trailer serialization cannot fail");
    let m = u32::try_from(trailer.len())
        .map_err(|_| Error::validation("id trailer too large for the binary format"))?;

    let mut out = Vec::with_capacity(8 + 8 + set.as_flat().len() * 4 + 4 + trailer.len());
    out.extend_from_slice(EMBEDDING_MAGIC);
    out.extend_from_slice(&n.to_le_bytes());
    out.extend_from_slice(&dim.to_le_bytes());
    for v in set.as_flat() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&m.to_le_bytes());
    out.extend_from_slice(&trailer);
    Ok(out)
}

/// Parses the binary container. Errors name the byte offset at fault.
pub fn decode_binary(bytes: &[u8], context: &str) -> Result<EmbeddingSet> {
    let fail = |offset: usize, msg: String| Error::format(context, format!("byte {offset}"), msg);
    let read_u32 = |offset: usize, what: &str| -> Result<u32> {
        bytes
            .get(offset..offset + 4)
            .map(|b| u32::from_le_bytes(b.try_into().unwrap()))
            .ok_or_else(|| fail(offset, format!("file truncated while reading {what}")))
    };

    if !bytes.starts_with(EMBEDDING_MAGIC) {
        return Err(fail(0, "bad magic, expected W1KPEMB1".into()));
    }
    let n = read_u32(8, "row count")? as usize;
    let dim = read_u32(12, "dimension")? as usize;
    let value_bytes = n
        .checked_mul(dim)
        .and_then(|c| c.checked_mul(4))
        .ok_or_else(|| fail(8, format!("header {n}x{dim} overflows")))?;
    let values_end = 16usize
        .checked_add(value_bytes)
        .filter(|&end| end <= bytes.len())
        .ok_or_else(|| {
            fail(
                16,
                format!(
                    "header declares {n}x{dim} floats ({value_bytes} bytes) but only {} bytes follow",
                    bytes.len().saturating_sub(16)
                ),
            )
        })?;
    let data: Vec<f32> = bytes[16..values_end]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();

    let m = read_u32(values_end, "trailer length")? as usize;
    let trailer_start = values_end + 4;
    let trailer_end = trailer_start
        .checked_add(m)
        .filter(|&end| end <= bytes.len())
        .ok_or_else(|| fail(trailer_start, format!("trailer of {m} bytes is truncated")))?;
    if trailer_end != bytes.len() {
        return Err(fail(
            trailer_end,
            format!(
                "{} unexpected bytes after trailer",
                bytes.len() - trailer_end
            ),
        ));
    }
    let trailer: Trailer =
        serde_json::from_slice(&bytes[trailer_start..trailer_end]).map_err(|e| {
            fail(
                trailer_start + e.column().saturating_sub(1),
                format!("bad trailer JSON: {e}"),
            )
        })?;
    if trailer.ids.len() != n {
        return Err(fail(
            trailer_start,
            format!("trailer lists {} ids for {n} rows", trailer.ids.len()),
        ));
    }
    EmbeddingSet::from_flat(trailer.ids, dim, data, trailer.provenance)
}

/// Serializes to CSV. `f32` values are written in shortest round-trip form so
/// that reading them back is bit-exact.
pub fn encode_csv(set: &EmbeddingSet) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["id".to_owned()];
    header.extend((0..set.dim()).map(|i| format!("v{i}")));
    let csv_err = |e: csv::Error| Error::validation(format!("CSV encoding failed: {e}"));
    w.write_record(&header).map_err(csv_err)?;
    for (id, row) in set.ids().iter().zip(set.rows()) {
        let mut rec = Vec::with_capacity(row.len() + 1);
        rec.push(id.clone());
        rec.extend(row.iter().map(|v| v.to_string()));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.into_inner()
        .map_err(|e| Error::validation(format!("CSV encoding failed: {e}")))
}

/// Parses the CSV form. Errors name the offending line.
pub fn decode_csv(bytes: &[u8], context: &str) -> Result<EmbeddingSet> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let header = reader
        .headers()
        .map_err(|e| Error::format(context, "line 1", e.to_string()))?
        .clone();
    let dim = header.len().saturating_sub(1);
    let header_ok = header.get(0) == Some("id")
        && dim >= 1
        && header
            .iter()
            .skip(1)
            .enumerate()
            .all(|(i, h)| h == format!("v{i}"));
    if !header_ok {
        return Err(Error::format(
            context,
            "line 1",
            "header must be `id,v0,...,v{dim-1}`",
        ));
    }

    let mut ids = Vec::new();
    let mut data = Vec::new();
    for result in reader.records() {
        let record = result.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::format(context, format!("line {line}"), e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let mut fields = record.iter();
        ids.push(fields.next().unwrap_or_default().to_owned());
        for (col, field) in fields.enumerate() {
            let v: f32 = field.parse().map_err(|_| {
                Error::format(
                    context,
                    format!("line {line}"),
                    format!("column v{col}: {field:?} is not a number"),
                )
            })?;
            data.push(v);
        }
    }
    EmbeddingSet::from_flat(ids, dim, data, "").map_err(|e| match e {
        Error::Validation(msg) => Error::Validation(format!("{context}: {msg}")),
        other => other,
    })
}

/// Reads newline-delimited JSON judgments of the given kind.
pub fn read_judgments(path: impl AsRef<Path>, kind: JudgmentKind) -> Result<JudgmentRecords> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_judgments(BufReader::new(file), kind).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

/// Parses JSON-lines judgments from any reader.
pub fn parse_judgments(reader: impl BufRead, kind: JudgmentKind) -> Result<JudgmentRecords> {
    match kind {
        JudgmentKind::Graded => {
            parse_lines(reader, GradedJudgment::validate).map(JudgmentRecords::Graded)
        }
        JudgmentKind::Triplet => {
            parse_lines(reader, TripletJudgment::validate).map(JudgmentRecords::Triplet)
        }
    }
}

fn parse_lines<T: serde::de::DeserializeOwned>(
    reader: impl BufRead,
    validate: impl Fn(&T) -> Result<()>,
) -> Result<Vec<Numbered<T>>> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io("<judgments>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: T = serde_json::from_str(&line).map_err(|e| Error::Record {
            line: line_no,
            message: e.to_string(),
        })?;
        validate(&record).map_err(|e| Error::Record {
            line: line_no,
            message: match e {
                Error::Validation(m) => m,
                other => other.to_string(),
            },
        })?;
        out.push(Numbered {
            line: line_no,
            record,
        });
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct PairsManifest {
    pairs: Vec<(String, String)>,
}

/// Reads a pair manifest `{"pairs": [["id_a", "id_b"], ...]}`. Other
/// top-level keys are ignored.
pub fn read_pairs_manifest(path: impl AsRef<Path>) -> Result<Vec<(String, String)>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let manifest: PairsManifest = serde_json::from_str(&text).map_err(|e| {
        Error::format(
            path.display().to_string(),
            format!("line {}", e.line()),
            e.to_string(),
        )
    })?;
    Ok(manifest.pairs)
}

/// Resolves id pairs to row indices of `set`.
pub fn resolve_pairs(
    set: &EmbeddingSet,
    pairs: &[(String, String)],
) -> Result<Vec<(usize, usize)>> {
    let index = set.index();
    pairs
        .iter()
        .enumerate()
        .map(|(p, (a, b))| {
            let get = |id: &String| {
                index.get(id.as_str()).copied().ok_or_else(|| {
                    Error::validation(format!("pair {p} references unknown image id {id:?}"))
                })
            };
            let (i, j) = (get(a)?, get(b)?);
            if i == j {
                return Err(Error::validation(format!("pair {p} repeats image {a:?}")));
            }
            Ok((i, j))
        })
        .collect()
}

/// Writes records as JSON lines.
pub fn write_jsonl<T: Serialize>(records: &[T], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    for r in records {
        serde_json::to_writer(&mut buf, r).expect("record serialization cannot fail");
        buf.push(b'\n');
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&buf).map_err(|e| Error::io(path, e))
}
