//! Minimal PGM (portable graymap) reader and writer.
//!
//! Handles the two standard flavors: P2 (ASCII) and P5 (binary), with
//! `#` comments between header tokens and sample depth up to 16 bits
//! (P5 stores two-byte samples big-endian when maxval > 255). Errors
//! carry the byte offset where parsing stopped.

use thiserror::Error;

#[derive(Debug, Clone)]
pub struct ImageGrid {
    pub width: usize,
    pub height: usize,
    pub maxval: u32,
    /// Row-major, top row first.
    pub samples: Vec<u16>,
}

#[derive(Debug, Error)]
pub enum PgmError {
    #[error("byte {offset}: not a PGM file (expected P2 or P5 magic)")]
    BadMagic { offset: usize },
    #[error("byte {offset}: expected {what}, found '{found}'")]
    BadToken {
        offset: usize,
        what: &'static str,
        found: String,
    },
    #[error("byte {offset}: {what} is missing (file ends inside the header)")]
    MissingHeader { offset: usize, what: &'static str },
    #[error("byte {offset}: maxval {maxval} outside 1..=65535")]
    BadMaxval { offset: usize, maxval: u64 },
    #[error("byte {offset}: raster truncated ({have} of {need} samples present)")]
    Truncated {
        offset: usize,
        have: usize,
        need: usize,
    },
    #[error("byte {offset}: sample {value} exceeds maxval {maxval}")]
    SampleRange {
        offset: usize,
        value: u64,
        maxval: u32,
    },
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    /// Next whitespace-delimited token, with the offset where it starts.
    fn token(&mut self, what: &'static str) -> Result<(usize, &'a [u8]), PgmError> {
        self.skip_space_and_comments();
        if self.pos >= self.bytes.len() {
            return Err(PgmError::MissingHeader {
                offset: self.pos,
                what,
            });
        }
        let start = self.pos;
        while self.pos < self.bytes.len()
            && !self.bytes[self.pos].is_ascii_whitespace()
            && self.bytes[self.pos] != b'#'
        {
            self.pos += 1;
        }
        Ok((start, &self.bytes[start..self.pos]))
    }

    fn uint(&mut self, what: &'static str) -> Result<(usize, u64), PgmError> {
        let (offset, tok) = self.token(what)?;
        let text = std::str::from_utf8(tok).unwrap_or("<binary>");
        match text.parse::<u64>() {
            Ok(v) => Ok((offset, v)),
            Err(_) => Err(PgmError::BadToken {
                offset,
                what,
                found: text.to_string(),
            }),
        }
    }
}

pub fn load_pgm(bytes: &[u8]) -> Result<ImageGrid, PgmError> {
    let mut cur = Cursor { bytes, pos: 0 };
    let (magic_off, magic) = cur.token("magic number")?;
    let binary = match magic {
        b"P2" => false,
        b"P5" => true,
        _ => return Err(PgmError::BadMagic { offset: magic_off }),
    };
    let (woff, width) = cur.uint("width")?;
    let (hoff, height) = cur.uint("height")?;
    if width == 0 || height == 0 || width.saturating_mul(height) > (1 << 34) {
        return Err(PgmError::BadToken {
            offset: if width == 0 { woff } else { hoff },
            what: "positive image dimensions",
            found: format!("{width}x{height}"),
        });
    }
    let (moff, maxval) = cur.uint("maxval")?;
    if maxval == 0 || maxval > 65535 {
        return Err(PgmError::BadMaxval {
            offset: moff,
            maxval,
        });
    }
    let (width, height, maxval) = (width as usize, height as usize, maxval as u32);
    let need = width * height;
    let mut samples = Vec::with_capacity(need);

    if binary {
        // Raster starts after exactly one whitespace byte past maxval.
        if cur.pos < bytes.len() && bytes[cur.pos].is_ascii_whitespace() {
            cur.pos += 1;
        }
        let per = if maxval > 255 { 2 } else { 1 };
        for i in 0..need {
            let at = cur.pos + i * per;
            if at + per > bytes.len() {
                return Err(PgmError::Truncated {
                    offset: bytes.len(),
                    have: i,
                    need,
                });
            }
            let v = if per == 2 {
                ((bytes[at] as u32) << 8) | bytes[at + 1] as u32
            } else {
                bytes[at] as u32
            };
            if v > maxval {
                return Err(PgmError::SampleRange {
                    offset: at,
                    value: v as u64,
                    maxval,
                });
            }
            samples.push(v as u16);
        }
    } else {
        for i in 0..need {
            cur.skip_space_and_comments();
            if cur.pos >= bytes.len() {
                return Err(PgmError::Truncated {
                    offset: bytes.len(),
                    have: i,
                    need,
                });
            }
            let (off, v) = cur.uint("sample")?;
            if v > maxval as u64 {
                return Err(PgmError::SampleRange {
                    offset: off,
                    value: v,
                    maxval,
                });
            }
            samples.push(v as u16);
        }
    }

    Ok(ImageGrid {
        width,
        height,
        maxval,
        samples,
    })
}

/// ASCII encoding, rows wrapped to keep lines short.
pub fn write_p2(image: &ImageGrid) -> Vec<u8> {
    let mut out = format!("P2\n{} {}\n{}\n", image.width, image.height, image.maxval);
    for row in image.samples.chunks(image.width) {
        for chunk in row.chunks(16) {
            let line: Vec<String> = chunk.iter().map(|v| v.to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
    }
    out.into_bytes()
}

/// Binary encoding; two bytes per sample (big-endian) when maxval > 255.
pub fn write_p5(image: &ImageGrid) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n{}\n", image.width, image.height, image.maxval).into_bytes();
    if image.maxval > 255 {
        for &v in &image.samples {
            out.extend_from_slice(&v.to_be_bytes());
        }
    } else {
        out.extend(image.samples.iter().map(|&v| v as u8));
    }
    out
}
