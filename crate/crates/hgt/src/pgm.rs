//! Binary PGM (P5) parsing and writing.
//!
//! Only 8-bit binary PGM is accepted: magic `P5`, decimal width, height and
//! a maxval of 255, with `#` comments allowed between header tokens. The
//! parser is defensive about untrusted input: it never allocates from header
//! values, only from bytes actually present.

use std::fmt;
use std::io::{self, Read, Write};
use std::path::Path;

use thiserror::Error;

/// 8-bit grayscale image, row-major pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self, PgmError> {
        if width == 0 || height == 0 {
            return Err(PgmError::ZeroDimension);
        }
        let expected = width as usize * height as usize;
        if pixels.len() != expected {
            return Err(PgmError::Truncated { expected, found: pixels.len() });
        }
        Ok(Self { width, height, pixels })
    }

    pub fn from_fn(width: u32, height: u32, f: impl Fn(u32, u32) -> u8) -> Self {
        assert!(width > 0 && height > 0);
        let mut pixels = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self { width, height, pixels }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> u8 {
        debug_assert!(x < self.width && y < self.height);
        self.pixels[y as usize * self.width as usize + x as usize]
    }
}

impl fmt::Display for GrayImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{} grayscale", self.width, self.height)
    }
}

#[derive(Debug, Error)]
pub enum PgmError {
    #[error("unsupported format (expected binary PGM magic \"P5\"{})", match .found {
        Some(m) => format!(", found {m:?}"),
        None => String::new(),
    })]
    UnsupportedFormat { found: Option<String> },

    #[error("malformed header: {0}")]
    MalformedHeader(&'static str),

    #[error("unsupported maxval {0} (only 255 is supported)")]
    UnsupportedMaxval(u32),

    #[error("image has a zero dimension")]
    ZeroDimension,

    #[error("truncated pixel data: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },

    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

struct HeaderCursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> HeaderCursor<'a> {
    /// Skips whitespace and `#` comments (terminated by newline).
    fn skip_separators(&mut self) {
        while self.pos < self.data.len() {
            match self.data[self.pos] {
                b' ' | b'\t' | b'\r' | b'\n' | 0x0b | 0x0c => self.pos += 1,
                b'#' => {
                    while self.pos < self.data.len() && self.data[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                _ => return,
            }
        }
    }

    fn read_u32(&mut self) -> Result<u32, PgmError> {
        self.skip_separators();
        let start = self.pos;
        while self.pos < self.data.len() && self.data[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(PgmError::MalformedHeader("expected a decimal header field"));
        }
        if self.pos - start > 9 {
            return Err(PgmError::MalformedHeader("header field too large"));
        }
        let mut value: u32 = 0;
        for &b in &self.data[start..self.pos] {
            value = value * 10 + u32::from(b - b'0');
        }
        Ok(value)
    }
}

/// Parses an in-memory binary PGM (P5, maxval 255).
pub fn parse_pgm(data: &[u8]) -> Result<GrayImage, PgmError> {
    if data.len() < 2 {
        return Err(PgmError::UnsupportedFormat { found: None });
    }
    if &data[..2] != b"P5" {
        let magic = String::from_utf8_lossy(&data[..2]).into_owned();
        return Err(PgmError::UnsupportedFormat { found: Some(magic) });
    }
    let mut cur = HeaderCursor { data, pos: 2 };
    let width = cur.read_u32()?;
    let height = cur.read_u32()?;
    let maxval = cur.read_u32()?;
    if maxval != 255 {
        return Err(PgmError::UnsupportedMaxval(maxval));
    }
    if width == 0 || height == 0 {
        return Err(PgmError::ZeroDimension);
    }
    // Exactly one whitespace byte separates the header from the raster.
    match data.get(cur.pos) {
        Some(b' ' | b'\t' | b'\r' | b'\n' | 0x0b | 0x0c) => cur.pos += 1,
        Some(_) => return Err(PgmError::MalformedHeader("missing raster separator")),
        None => return Err(PgmError::Truncated { expected: 1, found: 0 }),
    }
    let expected = width as usize * height as usize;
    let raster = &data[cur.pos..];
    if raster.len() < expected {
        return Err(PgmError::Truncated { expected, found: raster.len() });
    }
    GrayImage::new(width, height, raster[..expected].to_vec())
}

/// Reads and parses a binary PGM file.
pub fn load_pgm(path: impl AsRef<Path>) -> Result<GrayImage, PgmError> {
    let mut data = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut data)?;
    parse_pgm(&data)
}

/// Writes a binary PGM (P5, maxval 255).
pub fn write_pgm<W: Write>(img: &GrayImage, mut w: W) -> io::Result<()> {
    write!(w, "P5\n{} {}\n255\n", img.width, img.height)?;
    w.write_all(&img.pixels)
}

pub fn save_pgm(img: &GrayImage, path: impl AsRef<Path>) -> io::Result<()> {
    let mut out = Vec::new();
    write_pgm(img, &mut out)?;
    std::fs::write(path, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_p5() {
        let data = b"P5\n2 2\n255\n\x00\x80\xff\x40";
        let img = parse_pgm(data).unwrap();
        assert_eq!(img.width(), 2);
        assert_eq!(img.height(), 2);
        assert_eq!(img.pixels(), &[0, 128, 255, 64]);
        assert_eq!(img.get(1, 1), 64);
    }

    #[test]
    fn parses_comments_and_odd_whitespace() {
        let data = b"P5 # binary pgm\n# another comment\n 3\t1 #w\n255 \x01\x02\x03";
        let img = parse_pgm(data).unwrap();
        assert_eq!((img.width(), img.height()), (3, 1));
        assert_eq!(img.pixels(), &[1, 2, 3]);
    }

    #[test]
    fn rejects_ascii_pgm() {
        let err = parse_pgm(b"P2\n2 2\n255\n0 1 2 3\n").unwrap_err();
        assert!(matches!(err, PgmError::UnsupportedFormat { .. }));
    }

    #[test]
    fn rejects_header_only_file() {
        let err = parse_pgm(b"P5\n4 4\n255\n").unwrap_err();
        assert!(matches!(err, PgmError::Truncated { expected: 16, found: 0 }));
        let err = parse_pgm(b"P5\n4 4\n255").unwrap_err();
        assert!(matches!(err, PgmError::Truncated { .. }));
    }

    #[test]
    fn rejects_bad_maxval_and_dims() {
        assert!(matches!(
            parse_pgm(b"P5\n2 2\n65535\n\x00\x00\x00\x00"),
            Err(PgmError::UnsupportedMaxval(65535))
        ));
        assert!(matches!(parse_pgm(b"P5\n0 2\n255\n"), Err(PgmError::ZeroDimension)));
        assert!(matches!(
            parse_pgm(b"P5\n2 x\n255\n"),
            Err(PgmError::MalformedHeader(_))
        ));
    }

    #[test]
    fn truncated_raster_reports_counts() {
        let err = parse_pgm(b"P5\n2 2\n255\n\x01\x02").unwrap_err();
        assert!(matches!(err, PgmError::Truncated { expected: 4, found: 2 }));
    }

    #[test]
    fn roundtrip() {
        let img = GrayImage::from_fn(5, 3, |x, y| (x * 50 + y * 17) as u8);
        let mut buf = Vec::new();
        write_pgm(&img, &mut buf).unwrap();
        let again = parse_pgm(&buf).unwrap();
        assert_eq!(img, again);
    }

    #[test]
    fn oversized_header_is_rejected_without_allocation() {
        // Huge dimensions with no raster behind them must error out cleanly.
        let data = b"P5\n999999999 999999999\n255\n\x00";
        assert!(matches!(parse_pgm(data), Err(PgmError::Truncated { .. })));
    }
}
