//! Raster and pattern files, matching-pursuit decomposition of rasters into
//! Gaussian atoms, and synthetic face/digit test images.
//!
//! Everything here works in `f64`.

mod mp;
mod synthetic;

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

pub use mp::{matching_pursuit, DictionarySpec, PursuitResult};
pub use synthetic::{
    digit_pattern, digit_raster, face_pattern, face_raster, SYNTHETIC_EXTENT, SYNTHETIC_SIZE,
};

use crate::atoms::{Atom, Pattern};
use crate::error::{Error, Result};
use crate::linalg::Vec2;
use crate::raster::RasterImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RasterFormat {
    /// Binary (P5) on save; P2 and P5 both load.
    Pgm,
    /// Headerless comma-separated rows, top row first.
    Csv,
}

impl RasterFormat {
    /// Format implied by a file extension.
    pub fn from_path(path: &Path) -> Result<Self> {
        match path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .as_deref()
        {
            Some("pgm") => Ok(Self::Pgm),
            Some("csv") => Ok(Self::Csv),
            _ => Err(Error::Parse(format!(
                "cannot infer raster format of {}",
                path.display()
            ))),
        }
    }
}

impl std::str::FromStr for RasterFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pgm" => Ok(Self::Pgm),
            "csv" => Ok(Self::Csv),
            other => Err(Error::Parse(format!("unknown raster format '{other}'"))),
        }
    }
}

/// Loads a raster covering `[-extent, extent]²`. PGM samples are scaled to
/// `[0, 1]` by the file's maxval.
pub fn load_raster(path: &Path, format: RasterFormat, extent: f64) -> Result<RasterImage> {
    let bytes = fs::read(path)?;
    match format {
        RasterFormat::Pgm => parse_pgm(&bytes, extent),
        RasterFormat::Csv => parse_csv_raster(
            std::str::from_utf8(&bytes).map_err(|e| Error::Parse(e.to_string()))?,
            extent,
        ),
    }
}

/// PGM output quantizes to 8 bits after clamping into `[0, 1]`; CSV keeps
/// every digit.
pub fn save_raster(img: &RasterImage, path: &Path, format: RasterFormat) -> Result<()> {
    let bytes = match format {
        RasterFormat::Pgm => encode_pgm(img),
        RasterFormat::Csv => encode_csv_raster(img).into_bytes(),
    };
    fs::write(path, bytes)?;
    Ok(())
}

/// Splits a PGM header into its tokens, skipping `#` comments, and returns
/// the offset just past the single whitespace byte that ends it.
fn pgm_header(bytes: &[u8]) -> Result<(Vec<String>, usize)> {
    let mut tokens = Vec::new();
    let mut i = 0;
    while tokens.len() < 4 {
        while i < bytes.len() && bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if i < bytes.len() && bytes[i] == b'#' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        while i < bytes.len() && !bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if start == i {
            return Err(Error::Parse("truncated PGM header".into()));
        }
        tokens.push(String::from_utf8_lossy(&bytes[start..i]).into_owned());
    }
    Ok((tokens, i + 1))
}

fn parse_pgm(bytes: &[u8], extent: f64) -> Result<RasterImage> {
    let (tokens, body) = pgm_header(bytes)?;
    let magic = tokens[0].as_str();
    if magic != "P2" && magic != "P5" {
        return Err(Error::Parse(format!(
            "unsupported PGM magic '{magic}' (only grayscale P2/P5)"
        )));
    }
    let num = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::Parse(format!("bad PGM header field '{s}'")))
    };
    let (width, height, maxval) = (num(&tokens[1])?, num(&tokens[2])?, num(&tokens[3])?);
    if maxval == 0 || maxval > 65535 {
        return Err(Error::Parse(format!("PGM maxval {maxval} out of range")));
    }
    let n = width * height;
    let samples: Vec<usize> = if magic == "P2" {
        let text = std::str::from_utf8(bytes.get(body..).unwrap_or(&[]))
            .map_err(|e| Error::Parse(e.to_string()))?;
        text.split_ascii_whitespace()
            .map(num)
            .collect::<Result<_>>()?
    } else {
        let data = bytes.get(body..).unwrap_or(&[]);
        if maxval < 256 {
            data.iter().map(|&b| b as usize).collect()
        } else {
            data.chunks_exact(2)
                .map(|c| ((c[0] as usize) << 8) | c[1] as usize)
                .collect()
        }
    };
    if samples.len() != n {
        return Err(Error::Parse(format!(
            "PGM declares {n} samples, found {}",
            samples.len()
        )));
    }
    if let Some(bad) = samples.iter().find(|&&s| s > maxval) {
        return Err(Error::Parse(format!(
            "PGM sample {bad} exceeds maxval {maxval}"
        )));
    }
    let pixels = samples
        .into_iter()
        .map(|s| s as f64 / maxval as f64)
        .collect();
    RasterImage::new(width, height, extent, pixels)
}

fn encode_pgm(img: &RasterImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend(
        img.pixels
            .iter()
            .map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8),
    );
    out
}

fn parse_csv_raster(text: &str, extent: f64) -> Result<RasterImage> {
    let mut pixels = Vec::new();
    let mut width = None;
    let mut height = 0;
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let row: Vec<f64> = line
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad CSV value '{}'", s.trim())))
            })
            .collect::<Result<_>>()?;
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(Error::Parse(format!(
                    "CSV row {} has {} columns, expected {w}",
                    height + 1,
                    row.len()
                )))
            }
            _ => {}
        }
        pixels.extend(row);
        height += 1;
    }
    let width = width.ok_or_else(|| Error::Parse("empty CSV raster".into()))?;
    RasterImage::new(width, height, extent, pixels)
}

fn encode_csv_raster(img: &RasterImage) -> String {
    let mut out = String::new();
    for row in img.pixels.chunks(img.width) {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub const PATTERN_CSV_HEADER: &str = "coeff,psi,tau_x,tau_y,sigma_x,sigma_y";

/// One atom per row under [`PATTERN_CSV_HEADER`], shortest round-trip digits.
pub fn pattern_to_csv(p: &Pattern) -> String {
    let mut out = String::from(PATTERN_CSV_HEADER);
    out.push('\n');
    for a in p.atoms() {
        let s = a.sigma();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            a.coeff,
            a.psi(),
            a.tau.x,
            a.tau.y,
            s.x,
            s.y
        );
    }
    out
}

pub fn pattern_from_csv(text: &str) -> Result<Pattern> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty pattern file".into()))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols != PATTERN_CSV_HEADER.split(',').collect::<Vec<_>>() {
        return Err(Error::Parse(format!(
            "pattern header must be '{PATTERN_CSV_HEADER}'"
        )));
    }
    let mut atoms = Vec::new();
    for (n, line) in lines.enumerate() {
        let v: Vec<f64> = line
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("row {}: bad value '{}'", n + 1, s.trim())))
            })
            .collect::<Result<_>>()?;
        if v.len() != 6 {
            return Err(Error::Parse(format!(
                "row {}: expected 6 values, got {}",
                n + 1,
                v.len()
            )));
        }
        atoms.push(Atom::new(
            v[0],
            v[1],
            Vec2::new(v[2], v[3]),
            Vec2::new(v[4], v[5]),
        )?);
    }
    Pattern::new(atoms)
}

pub fn load_pattern(path: &Path) -> Result<Pattern> {
    pattern_from_csv(&fs::read_to_string(path)?)
}

pub fn save_pattern(p: &Pattern, path: &Path) -> Result<()> {
    fs::write(path, pattern_to_csv(p))?;
    Ok(())
}
