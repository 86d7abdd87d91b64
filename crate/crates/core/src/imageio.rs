//! File formats: disparity input, stixel records and overlay rendering.
//!
//! Disparity maps are read from binary graymaps (`P5`, 8 or 16 bit,
//! big-endian samples) or from a plain-text matrix with one image row per
//! line. In both, a raw sample equal to the invalid value marks a missing
//! measurement, and every other sample maps to `raw / scale`.
//!
//! Stixel records are whitespace-separated text, one stixel per line:
//!
//! ```text
//! frame column x0 width vb vt class disparity cost
//! ```
//!
//! `x0` and `width` are in original image pixels, `vb`/`vt` are model rows
//! (0 = bottom image row), `class` is `ground`, `object` or `sky`. Lines
//! starting with `#` are comments. A line `frame <id>` declares a frame that
//! may have no records (used by ground-truth files).

use std::collections::BTreeSet;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Result, StixelError};
use crate::model::StixelClass;
use crate::preprocess::{DisparityImage, INVALID};
use crate::solver::StixelColumn;

pub const RECORD_HEADER: &str = "# frame column x0 width vb vt class disparity cost";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DisparityFormat {
    Graymap,
    TextMatrix,
}

/// Header of a parsed disparity file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisparityFileHeader {
    pub format: DisparityFormat,
    pub width: usize,
    pub height: usize,
    pub max_value: u32,
    pub scale: f64,
    pub invalid_value: f64,
}

fn check_scale(scale: f64) -> Result<()> {
    if scale > 0.0 && scale.is_finite() {
        Ok(())
    } else {
        Err(StixelError::param(
            "disparity_scale",
            format!("must be positive, got {scale}"),
        ))
    }
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderCursor<'_> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u64> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(StixelError::parse(start, format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| StixelError::parse(start, format!("{what} out of range")))
    }
}

fn parse_graymap(
    bytes: &[u8],
    scale: f64,
    invalid_value: f64,
) -> Result<(DisparityImage, DisparityFileHeader)> {
    let mut cur = HeaderCursor { bytes, pos: 2 };
    let width = cur.number("width")? as usize;
    let height = cur.number("height")? as usize;
    let max_value = cur.number("maximum value")?;
    if width == 0 || height == 0 {
        return Err(StixelError::parse(
            cur.pos,
            format!("dimensions must be positive, got {width}x{height}"),
        ));
    }
    if max_value == 0 || max_value > 65535 {
        return Err(StixelError::parse(
            cur.pos,
            format!("maximum value {max_value} outside 1..=65535"),
        ));
    }
    if cur.pos >= bytes.len() || !bytes[cur.pos].is_ascii_whitespace() {
        return Err(StixelError::parse(
            cur.pos,
            "expected whitespace after header",
        ));
    }
    let start = cur.pos + 1;
    let bytes_per_sample = if max_value < 256 { 1 } else { 2 };
    let needed = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(bytes_per_sample))
        .ok_or_else(|| StixelError::parse(start, "image dimensions overflow"))?;
    let payload = &bytes[start..];
    if payload.len() < needed {
        return Err(StixelError::parse(
            bytes.len(),
            format!(
                "truncated payload: expected {needed} bytes after offset {start}, found {}",
                payload.len()
            ),
        ));
    }
    let data = payload[..needed]
        .chunks_exact(bytes_per_sample)
        .map(|s| {
            let raw = if bytes_per_sample == 1 {
                s[0] as u32
            } else {
                u16::from_be_bytes([s[0], s[1]]) as u32
            };
            if raw as f64 == invalid_value {
                INVALID
            } else {
                (raw as f64 / scale) as f32
            }
        })
        .collect();
    let header = DisparityFileHeader {
        format: DisparityFormat::Graymap,
        width,
        height,
        max_value: max_value as u32,
        scale,
        invalid_value,
    };
    Ok((DisparityImage::new(width, height, data)?, header))
}

fn parse_text_matrix(
    bytes: &[u8],
    scale: f64,
    invalid_value: f64,
) -> Result<(DisparityImage, DisparityFileHeader)> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| StixelError::parse(e.valid_up_to(), "text matrix is not UTF-8"))?;
    let mut width = None;
    let mut data = Vec::new();
    let mut height = 0;
    let mut max_raw: f64 = 0.0;
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let line_start = offset;
        offset += line.len();
        let content = line.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let mut n = 0;
        for tok in content.split_whitespace() {
            let tok_offset = line_start + (tok.as_ptr() as usize - line.as_ptr() as usize);
            let raw: f64 = tok
                .parse()
                .map_err(|_| StixelError::parse(tok_offset, format!("invalid sample `{tok}`")))?;
            data.push(if raw == invalid_value {
                INVALID
            } else {
                max_raw = max_raw.max(raw);
                (raw / scale) as f32
            });
            n += 1;
        }
        match width {
            None => width = Some(n),
            Some(w) if w != n => {
                return Err(StixelError::parse(
                    line_start,
                    format!("row has {n} samples, expected {w}"),
                ));
            }
            _ => {}
        }
        height += 1;
    }
    let width = width.ok_or_else(|| StixelError::parse(0, "empty text matrix"))?;
    let header = DisparityFileHeader {
        format: DisparityFormat::TextMatrix,
        width,
        height,
        max_value: max_raw.min(u32::MAX as f64) as u32,
        scale,
        invalid_value,
    };
    Ok((DisparityImage::new(width, height, data)?, header))
}

/// Parses a disparity map from memory, detecting the format from the magic.
pub fn parse_disparity(
    bytes: &[u8],
    scale: f64,
    invalid_value: f64,
) -> Result<(DisparityImage, DisparityFileHeader)> {
    check_scale(scale)?;
    if bytes.starts_with(b"P5") {
        parse_graymap(bytes, scale, invalid_value)
    } else {
        parse_text_matrix(bytes, scale, invalid_value)
    }
}

pub fn load_disparity(
    path: impl AsRef<Path>,
    scale: f64,
    invalid_value: f64,
) -> Result<DisparityImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| StixelError::from(e).in_file(path))?;
    parse_disparity(&bytes, scale, invalid_value)
        .map(|(img, _)| img)
        .map_err(|e| e.in_file(path))
}

fn encode_raw(d: f32, scale: f64, invalid_value: u16) -> Result<u16> {
    if d.is_nan() {
        return Ok(invalid_value);
    }
    let raw = (d as f64 * scale).round().clamp(0.0, 65535.0) as u16;
    if raw == invalid_value {
        return Err(StixelError::param(
            "invalid_value",
            format!("disparity {d} encodes to the invalid value {invalid_value}"),
        ));
    }
    Ok(raw)
}

/// Encodes a disparity map as a 16-bit binary graymap.
pub fn write_graymap<W: Write>(
    mut w: W,
    img: &DisparityImage,
    scale: f64,
    invalid_value: u16,
) -> Result<()> {
    check_scale(scale)?;
    write!(w, "P5\n{} {}\n65535\n", img.width(), img.height())?;
    let mut buf = Vec::with_capacity(img.data().len() * 2);
    for &d in img.data() {
        buf.extend_from_slice(&encode_raw(d, scale, invalid_value)?.to_be_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

/// Writes raw samples `d * scale` as a text matrix.
pub fn write_text_matrix<W: Write>(
    mut w: W,
    img: &DisparityImage,
    scale: f64,
    invalid_value: f64,
) -> Result<()> {
    check_scale(scale)?;
    for row in 0..img.height() {
        let line: Vec<String> = img
            .row(row)
            .iter()
            .map(|&d| {
                if d.is_nan() {
                    format!("{invalid_value}")
                } else {
                    format!("{}", d as f64 * scale)
                }
            })
            .collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    Ok(())
}

pub fn save_graymap(
    path: impl AsRef<Path>,
    img: &DisparityImage,
    scale: f64,
    invalid_value: u16,
) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| StixelError::from(e).in_file(path))?;
    let mut w = BufWriter::new(file);
    write_graymap(&mut w, img, scale, invalid_value)?;
    w.flush()?;
    Ok(())
}

/// One stixel line of a record file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StixelRecord {
    pub frame: u64,
    pub column: usize,
    pub x0: usize,
    pub width: usize,
    pub vb: usize,
    pub vt: usize,
    pub class: StixelClass,
    pub disparity: f64,
    pub cost: f64,
}

impl StixelRecord {
    pub fn height(&self) -> usize {
        self.vt - self.vb + 1
    }

    pub fn area(&self) -> usize {
        self.height() * self.width
    }
}

/// Contents of a record file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RecordSet {
    /// Every frame id that was declared or has records.
    pub frames: BTreeSet<u64>,
    pub records: Vec<StixelRecord>,
}

impl RecordSet {
    pub fn push(&mut self, record: StixelRecord) {
        self.frames.insert(record.frame);
        self.records.push(record);
    }

    pub fn frame(&self, frame: u64) -> impl Iterator<Item = &StixelRecord> + '_ {
        self.records.iter().filter(move |r| r.frame == frame)
    }
}

/// Converts solver output to records, ordered by (column, vb).
pub fn records_from_columns(
    frame: u64,
    cols: &[StixelColumn],
    stixel_width: usize,
) -> Vec<StixelRecord> {
    let mut out: Vec<StixelRecord> = cols
        .iter()
        .flat_map(|c| {
            c.stixels.iter().map(move |s| StixelRecord {
                frame,
                column: c.index,
                x0: c.index * stixel_width,
                width: stixel_width,
                vb: s.vb,
                vt: s.vt,
                class: s.class,
                disparity: s.disparity,
                cost: s.cost,
            })
        })
        .collect();
    out.sort_by_key(|r| (r.column, r.vb));
    out
}

pub fn write_record<W: Write>(mut w: W, r: &StixelRecord) -> Result<()> {
    writeln!(
        w,
        "{} {} {} {} {} {} {} {} {}",
        r.frame, r.column, r.x0, r.width, r.vb, r.vt, r.class, r.disparity, r.cost
    )?;
    Ok(())
}

/// Writes the stixels of one frame.
pub fn write_stixels<W: Write>(
    mut w: W,
    frame: u64,
    cols: &[StixelColumn],
    stixel_width: usize,
) -> Result<()> {
    for r in records_from_columns(frame, cols, stixel_width) {
        write_record(&mut w, &r)?;
    }
    Ok(())
}

/// Writes a whole record set, declaring frames that have no records.
pub fn write_records<W: Write>(mut w: W, set: &RecordSet) -> Result<()> {
    writeln!(w, "{RECORD_HEADER}")?;
    let with_records: BTreeSet<u64> = set.records.iter().map(|r| r.frame).collect();
    for f in set.frames.difference(&with_records) {
        writeln!(w, "frame {f}")?;
    }
    for r in &set.records {
        write_record(&mut w, r)?;
    }
    Ok(())
}

fn field<T: std::str::FromStr>(tok: Option<&str>, name: &str, offset: usize) -> Result<T> {
    let tok = tok.ok_or_else(|| StixelError::parse(offset, format!("missing field `{name}`")))?;
    tok.parse()
        .map_err(|_| StixelError::parse(offset, format!("invalid {name} `{tok}`")))
}

pub fn read_records<R: Read>(r: R) -> Result<RecordSet> {
    let mut set = RecordSet::default();
    let mut offset = 0;
    for line in BufReader::new(r).lines() {
        let line = line?;
        let line_offset = offset;
        offset += line.len() + 1;
        let content = line.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let mut toks = content.split_whitespace();
        if content.starts_with("frame") {
            toks.next();
            let id = field(toks.next(), "frame", line_offset)?;
            if toks.next().is_some() {
                return Err(StixelError::parse(
                    line_offset,
                    "trailing fields after frame declaration",
                ));
            }
            set.frames.insert(id);
            continue;
        }
        let rec = StixelRecord {
            frame: field(toks.next(), "frame", line_offset)?,
            column: field(toks.next(), "column", line_offset)?,
            x0: field(toks.next(), "x0", line_offset)?,
            width: field(toks.next(), "width", line_offset)?,
            vb: field(toks.next(), "vb", line_offset)?,
            vt: field(toks.next(), "vt", line_offset)?,
            class: field(toks.next(), "class", line_offset)?,
            disparity: field(toks.next(), "disparity", line_offset)?,
            cost: field(toks.next(), "cost", line_offset)?,
        };
        if toks.next().is_some() {
            return Err(StixelError::parse(line_offset, "too many fields"));
        }
        if rec.vb > rec.vt || rec.width == 0 {
            return Err(StixelError::parse(line_offset, "malformed stixel span"));
        }
        set.push(rec);
    }
    Ok(set)
}

pub fn load_records(path: impl AsRef<Path>) -> Result<RecordSet> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| StixelError::from(e).in_file(path))?;
    read_records(file).map_err(|e| e.in_file(path))
}

pub fn save_records(path: impl AsRef<Path>, set: &RecordSet) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| StixelError::from(e).in_file(path))?;
    let mut w = BufWriter::new(file);
    write_records(&mut w, set)?;
    w.flush()?;
    Ok(())
}

pub const SKY_COLOR: [u8; 3] = [0, 0, 255];
pub const BORDER_COLOR: [u8; 3] = [255, 255, 255];

/// Green (far) to red (near) ramp over `t` in `[0, 1]`.
pub fn ramp_color(t: f64) -> [u8; 3] {
    let t = t.clamp(0.0, 1.0);
    [
        (255.0 * t).round() as u8,
        (255.0 * (1.0 - t)).round() as u8,
        0,
    ]
}

/// Gray level of a disparity sample; invalid samples are black.
pub fn source_intensity(d: f32, d_range: usize) -> u8 {
    if d.is_nan() {
        0
    } else {
        (d as f64 / (d_range - 1) as f64 * 255.0)
            .round()
            .clamp(0.0, 255.0) as u8
    }
}

/// Colors stixels over the disparity image as an RGB buffer of the same size.
///
/// Ground keeps the source intensity, sky is blue and objects follow the ramp
/// normalized over the object disparities present in the frame. The top row of
/// every stixel with another stixel above it is drawn as a white border.
pub fn render_overlay(
    img: &DisparityImage,
    cols: &[StixelColumn],
    stixel_width: usize,
    d_range: usize,
) -> Vec<u8> {
    let (w, h) = (img.width(), img.height());
    let mut rgb: Vec<u8> = img
        .data()
        .iter()
        .flat_map(|&d| [source_intensity(d, d_range); 3])
        .collect();

    let objects = cols
        .iter()
        .flat_map(|c| &c.stixels)
        .filter(|s| s.class == StixelClass::Object)
        .map(|s| s.disparity);
    let (lo, hi) = objects.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), d| {
        (lo.min(d), hi.max(d))
    });

    for col in cols {
        let x0 = col.index * stixel_width;
        let x1 = (x0 + stixel_width).min(w);
        for s in &col.stixels {
            let color = match s.class {
                StixelClass::Ground => None,
                StixelClass::Sky => Some(SKY_COLOR),
                StixelClass::Object => Some(ramp_color(if hi > lo {
                    (s.disparity - lo) / (hi - lo)
                } else {
                    1.0
                })),
            };
            for v in s.vb..=s.vt.min(h - 1) {
                let row = h - 1 - v;
                let px = if v == s.vt && s.vt + 1 < h {
                    Some(BORDER_COLOR)
                } else {
                    color
                };
                if let Some(px) = px {
                    for x in x0..x1 {
                        let i = (row * w + x) * 3;
                        rgb[i..i + 3].copy_from_slice(&px);
                    }
                }
            }
        }
    }
    rgb
}

pub fn write_pixmap<W: Write>(mut w: W, width: usize, height: usize, rgb: &[u8]) -> Result<()> {
    write!(w, "P6\n{width} {height}\n255\n")?;
    w.write_all(rgb)?;
    Ok(())
}

pub fn save_overlay(
    path: impl AsRef<Path>,
    img: &DisparityImage,
    cols: &[StixelColumn],
    stixel_width: usize,
    d_range: usize,
) -> Result<()> {
    let path = path.as_ref();
    let rgb = render_overlay(img, cols, stixel_width, d_range);
    let file = fs::File::create(path).map_err(|e| StixelError::from(e).in_file(path))?;
    let mut w = BufWriter::new(file);
    write_pixmap(&mut w, img.width(), img.height(), &rgb)?;
    w.flush()?;
    Ok(())
}
