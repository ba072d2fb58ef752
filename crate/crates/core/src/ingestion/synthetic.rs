//! Procedural stand-ins for a face photograph and a handwritten "5".

use crate::atoms::Pattern;
use crate::error::Result;
use crate::linalg::Vec2;
use crate::raster::{RasterImage, RasterShape};

use super::mp::{matching_pursuit, DictionarySpec};

pub const SYNTHETIC_SIZE: usize = 32;
pub const SYNTHETIC_EXTENT: f64 = 1.0;

fn render(f: impl Fn(f64, f64) -> f64) -> RasterImage {
    let shape =
        RasterShape::square(SYNTHETIC_SIZE, SYNTHETIC_EXTENT).expect("valid synthetic shape");
    let mut img = RasterImage::zeros(shape);
    for j in 0..shape.height {
        for i in 0..shape.width {
            img.set(i, j, f(shape.x_at(i), shape.y_at(j)));
        }
    }
    img
}

fn smoothstep_inside(d: f64, soft: f64) -> f64 {
    1.0 / (1.0 + (d / soft).exp())
}

fn blob(x: f64, y: f64, cx: f64, cy: f64, rx: f64, ry: f64) -> f64 {
    (-((x - cx) / rx).powi(2) - ((y - cy) / ry).powi(2)).exp()
}

/// Oval head with darker eyes, nose shadow and mouth, values in `[0, 1]`.
pub fn face_raster() -> RasterImage {
    render(|x, y| {
        let head = ((x / 0.62).powi(2) + ((y + 0.02) / 0.82).powi(2)).sqrt() - 1.0;
        let mut v = 0.7 * smoothstep_inside(head, 0.04);
        let hair = ((x / 0.66).powi(2) + ((y - 0.3) / 0.55).powi(2)).sqrt() - 1.0;
        v -= 0.35 * smoothstep_inside(hair, 0.05) * smoothstep_inside(0.45 - y, 0.05);
        v -= 0.45 * (blob(x, y, -0.24, 0.18, 0.1, 0.05) + blob(x, y, 0.24, 0.18, 0.1, 0.05));
        v -= 0.15 * blob(x, y, 0.0, -0.05, 0.05, 0.14);
        let mouth = blob(x, y, 0.0, -0.38, 0.2, 0.04) * (1.0 - 0.5 * (x / 0.2).powi(2)).max(0.0);
        v -= 0.35 * mouth;
        v.clamp(0.0, 1.0)
    })
}

fn segment_distance(p: Vec2<f64>, a: Vec2<f64>, b: Vec2<f64>) -> f64 {
    let ab = b - a;
    let s = ((p - a).dot(ab) / ab.norm_sq()).clamp(0.0, 1.0);
    (p - a - ab.scale(s)).norm()
}

/// A "5" drawn with a soft pen of width ~0.1, ink 1 on a 0 background.
pub fn digit_raster() -> RasterImage {
    let mut path = vec![
        Vec2::new(0.38, 0.62),
        Vec2::new(-0.3, 0.62),
        Vec2::new(-0.36, 0.1),
    ];
    // Bowl: clockwise arc around (0, -0.22).
    let (cx, cy, r) = (0.0, -0.22, 0.36);
    for k in 0..=24 {
        let a = 2.2 - k as f64 * (2.2 + 2.5) / 24.0;
        path.push(Vec2::new(cx + r * a.cos(), cy + r * a.sin()));
    }
    render(move |x, y| {
        let p = Vec2::new(x, y);
        let d = path
            .windows(2)
            .map(|w| segment_distance(p, w[0], w[1]))
            .fold(f64::INFINITY, f64::min);
        (-(d / 0.07).powi(2)).exp()
    })
}

/// 50-atom matching-pursuit approximation of [`face_raster`].
pub fn face_pattern() -> Result<Pattern> {
    let img = face_raster();
    Ok(matching_pursuit(&img, &DictionarySpec::default_for(img.shape()), 50)?.pattern)
}

/// 20-atom matching-pursuit approximation of [`digit_raster`].
pub fn digit_pattern() -> Result<Pattern> {
    let img = digit_raster();
    Ok(matching_pursuit(&img, &DictionarySpec::default_for(img.shape()), 20)?.pattern)
}
