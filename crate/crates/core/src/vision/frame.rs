use std::io::{self, Read, Write};

use super::VisionError;

/// Row-major 8-bit grayscale image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl Frame {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, VisionError> {
        if pixels.len() != width * height {
            return Err(VisionError::SizeMismatch {
                expected: width * height,
                actual: pixels.len(),
            });
        }
        Ok(Self { width, height, pixels })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Self { width, height, pixels: vec![value; width * height] }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.pixels[y * self.width + x] = v;
    }

    pub fn is_empty(&self) -> bool {
        self.width == 0 || self.height == 0
    }

    /// Binary PGM (P5, maxval 255).
    pub fn write_pgm<W: Write>(&self, mut out: W) -> io::Result<()> {
        write!(out, "P5\n{} {}\n255\n", self.width, self.height)?;
        out.write_all(&self.pixels)
    }

    pub fn to_pgm_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(self.pixels.len() + 16);
        self.write_pgm(&mut buf).expect("writing to a Vec cannot fail");
        buf
    }
}

/// Interleaved 8-bit RGB image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbFrame {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

/// A decoded PNM file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PnmImage {
    Gray(Frame),
    Rgb(RgbFrame),
}

fn next_token(data: &[u8], pos: &mut usize) -> Result<String, VisionError> {
    loop {
        while *pos < data.len() && data[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < data.len() && data[*pos] == b'#' {
            while *pos < data.len() && data[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < data.len() && !data[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return Err(VisionError::Pnm("unexpected end of header".into()));
    }
    Ok(String::from_utf8_lossy(&data[start..*pos]).into_owned())
}

fn header_number(data: &[u8], pos: &mut usize) -> Result<usize, VisionError> {
    let tok = next_token(data, pos)?;
    tok.parse()
        .map_err(|_| VisionError::Pnm(format!("bad header number `{tok}`")))
}

/// Decode binary PGM (P5) or PPM (P6) with maxval 255.
pub fn decode_pnm(data: &[u8]) -> Result<PnmImage, VisionError> {
    let mut pos = 0;
    let magic = next_token(data, &mut pos)?;
    let channels = match magic.as_str() {
        "P5" => 1,
        "P6" => 3,
        other => return Err(VisionError::Pnm(format!("unsupported magic `{other}`"))),
    };
    let width = header_number(data, &mut pos)?;
    let height = header_number(data, &mut pos)?;
    let maxval = header_number(data, &mut pos)?;
    if maxval != 255 {
        return Err(VisionError::Pnm(format!("maxval {maxval} unsupported")));
    }
    // Exactly one whitespace byte separates the header from the raster.
    pos += 1;
    let len = width * height * channels;
    let raster = data
        .get(pos..pos + len)
        .ok_or_else(|| VisionError::Pnm("truncated raster".into()))?
        .to_vec();
    Ok(if channels == 1 {
        PnmImage::Gray(Frame { width, height, pixels: raster })
    } else {
        PnmImage::Rgb(RgbFrame { width, height, pixels: raster })
    })
}

pub fn read_pnm<R: Read>(mut input: R) -> Result<PnmImage, VisionError> {
    let mut data = Vec::new();
    input
        .read_to_end(&mut data)
        .map_err(|e| VisionError::Pnm(e.to_string()))?;
    decode_pnm(&data)
}
