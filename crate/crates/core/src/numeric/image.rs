use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Row-major grayscale image; origin at the upper-left corner, x rightward, y downward.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Image {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Image(format!("empty image {width}x{height}")));
        }
        if data.len() != width * height {
            return Err(Error::Image(format!("{} samples for {width}x{height}", data.len())));
        }
        Ok(Image { width, height, data })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Image { width, height, data: vec![0.0; width * height] }
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Image { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.width + x] = v;
    }

    /// Sample with mirror reflection about the edge pixels (-1 maps to 1).
    pub fn get_reflect(&self, x: isize, y: isize) -> f64 {
        self.get(reflect_index(x, self.width), reflect_index(y, self.height))
    }

    pub fn row(&self, y: usize) -> &[f64] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> Result<Image> {
        if x0 + w > self.width || y0 + h > self.height || w == 0 || h == 0 {
            return Err(Error::Image(format!(
                "crop {w}x{h} at ({x0},{y0}) outside {}x{}",
                self.width, self.height
            )));
        }
        Ok(Image::from_fn(w, h, |x, y| self.get(x0 + x, y0 + y)))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Image {
        Image { width: self.width, height: self.height, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    /// Linear rescale so that the sample range becomes [0, 1]; constant images become 0.
    pub fn normalized(&self) -> Image {
        let (lo, hi) = self.min_max();
        if hi > lo {
            self.map(|v| (v - lo) / (hi - lo))
        } else {
            self.map(|_| 0.0)
        }
    }
}

pub fn reflect_index(i: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let period = 2 * (n as isize - 1);
    let mut k = i.rem_euclid(period);
    if k >= n as isize {
        k = period - k;
    }
    k as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgmFormat {
    /// Binary, one or two bytes per sample depending on maxval.
    Binary,
    /// Plain ASCII.
    Plain,
}

/// Integer samples plus the declared maximum value.
#[derive(Debug, Clone, PartialEq)]
pub struct Pgm {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    pub samples: Vec<u16>,
}

impl Pgm {
    pub fn to_image(&self) -> Image {
        Image { width: self.width, height: self.height, data: self.samples.iter().map(|&v| v as f64).collect() }
    }

    /// Quantize `img` linearly from [lo, hi] onto [0, maxval].
    pub fn quantize(img: &Image, lo: f64, hi: f64, maxval: u16) -> Pgm {
        let span = if hi > lo { hi - lo } else { 1.0 };
        let samples = img
            .data
            .iter()
            .map(|&v| (((v - lo) / span).clamp(0.0, 1.0) * maxval as f64).round() as u16)
            .collect();
        Pgm { width: img.width, height: img.height, maxval, samples }
    }

    /// Inverse of [`Pgm::quantize`].
    pub fn dequantize(&self, lo: f64, hi: f64) -> Image {
        let span = if hi > lo { hi - lo } else { 0.0 };
        let m = self.maxval as f64;
        Image {
            width: self.width,
            height: self.height,
            data: self.samples.iter().map(|&v| lo + v as f64 / m * span).collect(),
        }
    }

    pub fn encode(&self, format: PgmFormat) -> Vec<u8> {
        let mut out = Vec::new();
        let magic = if format == PgmFormat::Binary { "P5" } else { "P2" };
        write!(out, "{magic}\n{} {}\n{}\n", self.width, self.height, self.maxval).unwrap();
        match format {
            PgmFormat::Binary => {
                for &v in &self.samples {
                    if self.maxval < 256 {
                        out.push(v as u8);
                    } else {
                        out.extend_from_slice(&v.to_be_bytes());
                    }
                }
            }
            PgmFormat::Plain => {
                for row in self.samples.chunks(self.width) {
                    let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                    writeln!(out, "{}", line.join(" ")).unwrap();
                }
            }
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Pgm> {
        let mut r = BufReader::new(bytes);
        let magic = next_token(&mut r)?;
        let width: usize = parse_header(&next_token(&mut r)?)?;
        let height: usize = parse_header(&next_token(&mut r)?)?;
        let maxval: u16 = parse_header(&next_token(&mut r)?)?;
        if width == 0 || height == 0 || maxval == 0 {
            return Err(Error::Image("degenerate PGM header".into()));
        }
        let n = width * height;
        let samples = match magic.as_str() {
            "P5" => {
                let bpp = if maxval < 256 { 1 } else { 2 };
                let mut buf = vec![0u8; n * bpp];
                r.read_exact(&mut buf).map_err(|_| Error::Image("truncated PGM raster".into()))?;
                if bpp == 1 {
                    buf.into_iter().map(u16::from).collect()
                } else {
                    buf.chunks(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect()
                }
            }
            "P2" => {
                let mut v = Vec::with_capacity(n);
                for _ in 0..n {
                    v.push(parse_header(&next_token(&mut r)?)?);
                }
                v
            }
            other => return Err(Error::Image(format!("unsupported magic {other:?}"))),
        };
        if samples.iter().any(|&s| s > maxval) {
            return Err(Error::Image("sample exceeds maxval".into()));
        }
        Ok(Pgm { width, height, maxval, samples })
    }

    pub fn read(path: &Path) -> Result<Pgm> {
        let bytes = std::fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Pgm::decode(&bytes)
    }

    pub fn write(&self, path: &Path, format: PgmFormat) -> Result<()> {
        std::fs::write(path, self.encode(format)).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }
}

fn parse_header<T: std::str::FromStr>(tok: &str) -> Result<T> {
    tok.parse().map_err(|_| Error::Image(format!("bad PGM field {tok:?}")))
}

/// Whitespace-delimited token, skipping `#` comments; consumes exactly one trailing
/// whitespace byte so a binary raster starts right after.
fn next_token(r: &mut impl BufRead) -> Result<String> {
    let mut tok = String::new();
    let mut byte = [0u8; 1];
    loop {
        if r.read(&mut byte)? == 0 {
            if tok.is_empty() {
                return Err(Error::Image("unexpected end of PGM".into()));
            }
            return Ok(tok);
        }
        let c = byte[0];
        if c == b'#' && tok.is_empty() {
            let mut line = Vec::new();
            r.read_until(b'\n', &mut line)?;
            continue;
        }
        if c.is_ascii_whitespace() {
            if tok.is_empty() {
                continue;
            }
            return Ok(tok);
        }
        tok.push(c as char);
    }
}

/// Read any supported PGM and return samples scaled to [0, 1] by maxval.
pub fn read_pgm_unit(path: &Path) -> Result<Image> {
    let p = Pgm::read(path)?;
    let m = p.maxval as f64;
    Ok(p.to_image().map(|v| v / m))
}
