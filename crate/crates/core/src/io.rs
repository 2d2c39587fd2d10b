//! File formats.
//!
//! * Images: 8-bit PNG (gray or RGB; alpha is dropped) and the raw `.hat`
//!   tensor format, which stores f32 values verbatim:
//!   `"HAT1"`, then height, width, channels as u32 LE, then
//!   `height·width·channels` f32 LE values in `(y, x, c)` order.
//! * CSV: error tables (`corruption,severity,error`), predictions
//!   (`image_id,true_label,pred_label`), labels (`image_id,label`) and
//!   single-column score lists (optional `score` header).
//! * Configuration: flat JSON objects with [`AugmentConfig`] field names.
//!
//! Every writer goes through a temporary file in the destination directory
//! followed by a rename. Loaders reject malformed lines instead of skipping them.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Cursor, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hybrid::AugmentConfig;
use crate::image::ImageTensor;
use crate::metrics::CorruptionErrorTable;

pub const HAT_MAGIC: &[u8; 4] = b"HAT1";
const HAT_HEADER_LEN: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    Png,
    Hat,
}

impl ImageFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        match path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .as_deref()
        {
            Some("png") => Ok(ImageFormat::Png),
            Some("hat") => Ok(ImageFormat::Hat),
            _ => Err(Error::UnsupportedFormat(format!(
                "{}: expected a .png or .hat file",
                path.display()
            ))),
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Writes `bytes` to a temporary sibling of `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn encode_hat(x: &ImageTensor) -> Vec<u8> {
    let (h, w, c) = x.shape();
    let mut out = Vec::with_capacity(HAT_HEADER_LEN + 4 * x.data().len());
    out.extend_from_slice(HAT_MAGIC);
    for dim in [h, w, c] {
        out.extend_from_slice(&(dim as u32).to_le_bytes());
    }
    for v in x.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_hat(bytes: &[u8]) -> Result<ImageTensor> {
    if bytes.len() < HAT_HEADER_LEN || &bytes[..4] != HAT_MAGIC {
        return Err(Error::Format("not a HAT1 tensor file".into()));
    }
    let dim = |i: usize| {
        u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().unwrap()) as usize
    };
    let (h, w, c) = (dim(0), dim(1), dim(2));
    let expected = h
        .checked_mul(w)
        .and_then(|n| n.checked_mul(c))
        .and_then(|n| n.checked_mul(4))
        .and_then(|n| n.checked_add(HAT_HEADER_LEN));
    if expected != Some(bytes.len()) {
        return Err(Error::Format(format!(
            "HAT1 header says {h}x{w}x{c} but file holds {} bytes",
            bytes.len()
        )));
    }
    let data = bytes[HAT_HEADER_LEN..]
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
        .collect();
    ImageTensor::new(h, w, c, data).map_err(|e| Error::Format(e.to_string()))
}

pub fn decode_png(bytes: &[u8]) -> Result<ImageTensor> {
    let corrupt = |e: png::DecodingError| Error::Format(format!("PNG decode failed: {e}"));
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::EXPAND);
    let mut reader = decoder.read_info().map_err(corrupt)?;
    if reader.info().bit_depth == png::BitDepth::Sixteen {
        return Err(Error::UnsupportedFormat("16-bit PNG".into()));
    }
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::Format("PNG too large".into()))?;
    let mut buf = vec![0u8; size];
    let frame = reader.next_frame(&mut buf).map_err(corrupt)?;
    let (h, w) = (frame.height as usize, frame.width as usize);
    let (src_channels, channels) = match frame.color_type {
        png::ColorType::Grayscale => (1, 1),
        png::ColorType::GrayscaleAlpha => (2, 1),
        png::ColorType::Rgb => (3, 3),
        png::ColorType::Rgba => (4, 3),
        png::ColorType::Indexed => {
            return Err(Error::UnsupportedFormat("unexpanded palette PNG".into()))
        }
    };
    if frame.bit_depth != png::BitDepth::Eight {
        return Err(Error::UnsupportedFormat(format!(
            "PNG bit depth {:?}",
            frame.bit_depth
        )));
    }
    let mut data = Vec::with_capacity(h * w * channels);
    for row in buf[..frame.buffer_size()].chunks_exact(frame.line_size) {
        for px in row[..w * src_channels].chunks_exact(src_channels) {
            data.extend(px[..channels].iter().map(|&v| f32::from(v) / 255.0));
        }
    }
    ImageTensor::new(h, w, channels, data)
}

/// 8-bit PNG of `clamp(x + offset, 0, 1)`, quantized with `round(v·255)`.
pub fn encode_png(x: &ImageTensor, offset: f32) -> Result<Vec<u8>> {
    let (h, w, c) = x.shape();
    let pixels: Vec<u8> = x
        .data()
        .iter()
        .map(|&v| ((v + offset).clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect();
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, w as u32, h as u32);
        enc.set_color(if c == 1 {
            png::ColorType::Grayscale
        } else {
            png::ColorType::Rgb
        });
        enc.set_depth(png::BitDepth::Eight);
        let fail = |e: png::EncodingError| Error::Format(format!("PNG encode failed: {e}"));
        let mut writer = enc.write_header().map_err(fail)?;
        writer.write_image_data(&pixels).map_err(fail)?;
        writer.finish().map_err(fail)?;
    }
    Ok(out)
}

/// Loads a `.png` (values `v/255`) or `.hat` (verbatim) image.
pub fn load_image(path: &Path) -> Result<ImageTensor> {
    let format = ImageFormat::from_path(path)?;
    let bytes = read(path)?;
    let decoded = match format {
        ImageFormat::Png => decode_png(&bytes),
        ImageFormat::Hat => decode_hat(&bytes),
    };
    decoded.map_err(|e| match e {
        Error::Format(msg) => Error::Format(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Saves `x` by extension. PNG applies `offset` and clamps; `.hat` stores
/// exact values and ignores `offset`.
pub fn save_image(x: &ImageTensor, path: &Path, offset: f32) -> Result<()> {
    let bytes = match ImageFormat::from_path(path)? {
        ImageFormat::Png => encode_png(x, offset)?,
        ImageFormat::Hat => encode_hat(x),
    };
    write_atomic(path, &bytes)
}

/// Image files (`.png` / `.hat`) directly inside `dir`, sorted by file name.
pub fn list_images(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_file() && ImageFormat::from_path(&path).is_ok() {
            paths.push(path);
        }
    }
    paths.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    Ok(paths)
}

/// `<root>/<corruption>/<severity>/<image_id>.png`, the public layout of
/// corrupted test sets.
pub fn corrupted_image_path(root: &Path, corruption: &str, severity: u8, image_id: &str) -> PathBuf {
    root.join(corruption)
        .join(severity.to_string())
        .join(format!("{image_id}.png"))
}

/// Data lines of a CSV with a required header, as `(line number, fields)`.
fn csv_rows<'a>(
    text: &'a str,
    header: &str,
    path: &Path,
) -> Result<Vec<(usize, Vec<&'a str>)>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == header => {}
        other => {
            return Err(Error::Format(format!(
                "{}: expected header '{header}', found '{}'",
                path.display(),
                other.map(|(_, h)| h).unwrap_or("")
            )))
        }
    }
    let width = header.split(',').count();
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != width {
            return Err(Error::Format(format!(
                "{}:{}: expected {width} fields, found {}",
                path.display(),
                i + 1,
                fields.len()
            )));
        }
        rows.push((i + 1, fields));
    }
    Ok(rows)
}

fn parse_field<T: std::str::FromStr>(value: &str, what: &str, path: &Path, line: usize) -> Result<T> {
    value.parse().map_err(|_| {
        Error::Format(format!(
            "{}:{line}: cannot parse {what} from '{value}'",
            path.display()
        ))
    })
}

pub fn parse_error_table(text: &str, path: &Path) -> Result<CorruptionErrorTable> {
    let mut table = CorruptionErrorTable::new();
    for (line, f) in csv_rows(text, "corruption,severity,error", path)? {
        let severity: u8 = parse_field(f[1], "severity", path, line)?;
        let error: f64 = parse_field(f[2], "error", path, line)?;
        table
            .insert(f[0], severity, error)
            .map_err(|e| Error::Format(format!("{}:{line}: {e}", path.display())))?;
    }
    Ok(table)
}

pub fn load_error_table(path: &Path) -> Result<CorruptionErrorTable> {
    parse_error_table(&read_text(path)?, path)
}

pub fn save_error_table(table: &CorruptionErrorTable, path: &Path) -> Result<()> {
    let mut out = String::from("corruption,severity,error\n");
    for (name, severity, error) in table.iter() {
        out.push_str(&format!("{name},{severity},{error}\n"));
    }
    write_atomic(path, out.as_bytes())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PredictionRecord {
    pub image_id: String,
    pub true_label: i64,
    pub pred_label: i64,
}

pub fn load_predictions(path: &Path) -> Result<Vec<PredictionRecord>> {
    let text = read_text(path)?;
    csv_rows(&text, "image_id,true_label,pred_label", path)?
        .into_iter()
        .map(|(line, f)| {
            Ok(PredictionRecord {
                image_id: f[0].to_owned(),
                true_label: parse_field(f[1], "true_label", path, line)?,
                pred_label: parse_field(f[2], "pred_label", path, line)?,
            })
        })
        .collect()
}

pub fn save_predictions(records: &[PredictionRecord], path: &Path) -> Result<()> {
    let mut out = String::from("image_id,true_label,pred_label\n");
    for r in records {
        out.push_str(&format!("{},{},{}\n", r.image_id, r.true_label, r.pred_label));
    }
    write_atomic(path, out.as_bytes())
}

/// `image_id → label`; duplicate ids are format errors.
pub fn load_labels(path: &Path) -> Result<BTreeMap<String, i64>> {
    let text = read_text(path)?;
    let mut labels = BTreeMap::new();
    for (line, f) in csv_rows(&text, "image_id,label", path)? {
        let label = parse_field(f[1], "label", path, line)?;
        if labels.insert(f[0].to_owned(), label).is_some() {
            return Err(Error::Format(format!(
                "{}:{line}: duplicate image_id '{}'",
                path.display(),
                f[0]
            )));
        }
    }
    Ok(labels)
}

pub fn save_labels<'a>(labels: impl IntoIterator<Item = (&'a str, i64)>, path: &Path) -> Result<()> {
    let mut out = String::from("image_id,label\n");
    for (id, label) in labels {
        out.push_str(&format!("{id},{label}\n"));
    }
    write_atomic(path, out.as_bytes())
}

/// One finite score per line, optionally preceded by a `score` header.
pub fn load_scores(path: &Path) -> Result<Vec<f64>> {
    let text = read_text(path)?;
    let mut scores = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line == "score") {
            continue;
        }
        let v: f64 = parse_field(line, "score", path, i + 1)?;
        if !v.is_finite() {
            return Err(Error::Format(format!("{}:{}: non-finite score", path.display(), i + 1)));
        }
        scores.push(v);
    }
    Ok(scores)
}

pub fn load_config(path: &Path) -> Result<AugmentConfig> {
    let cfg: AugmentConfig = serde_json::from_str(&read_text(path)?)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Format(format!("cannot serialize report: {e}")))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}
