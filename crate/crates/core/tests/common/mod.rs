//! Synthetic test scenes shared by the integration suites.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use recolour::{PixelMatrix, RgbColor};

pub const BACKGROUND: [f64; 3] = [0.96, 0.96, 0.95];
pub const ORANGE: [f64; 3] = [0.95, 0.45, 0.05];
pub const PINK: [f64; 3] = [0.9, 0.35, 0.6];
pub const NAVY: [f64; 3] = [0.1, 0.15, 0.45];
pub const GREEN: [f64; 3] = [0.0, 1.0, 0.0];

fn mix(a: [f64; 3], b: [f64; 3], t: f64) -> [f64; 3] {
    [0, 1, 2].map(|c| a[c] * (1.0 - t) + b[c] * t)
}

/// Coverage of a pixel by a soft-edged shape given its signed distance (negative inside).
fn coverage(signed_distance: f64) -> f64 {
    (0.5 - signed_distance).clamp(0.0, 1.0)
}

/// A detergent-bottle style product shot: near-white backdrop, an orange bottle
/// with a pink ring logo and a navy label band, anti-aliased edges and shading.
/// Pixel values are quantised to 8 bits like a decoded photograph.
pub fn product_shot(width: usize, height: usize, seed: u64) -> PixelMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h) = (width as f64, height as f64);
    let (cx, cy) = (0.5 * w, 0.55 * h);
    let (rx, ry) = (0.28 * w, 0.38 * h);
    let ring_r = 0.12 * w.min(h);
    let ring_t = 0.03 * w.min(h);
    PixelMatrix::from_fn(width, height, |x, y| {
        let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
        let mut c = BACKGROUND;
        let body = ((px - cx) / rx).hypot((py - cy) / ry);
        let inside = coverage((body - 1.0) * rx.min(ry));
        if inside > 0.0 {
            let shade = 0.8 + 0.2 * (1.0 - ((px - cx) / rx).abs());
            let mut bottle = ORANGE.map(|v| v * shade);
            let band = coverage(((py - (cy + 0.2 * ry)).abs() - 0.06 * h).max(-1e9));
            bottle = mix(bottle, NAVY, band);
            let ring = ((px - cx).hypot(py - (cy - 0.15 * ry)) - ring_r).abs() - ring_t;
            bottle = mix(bottle, PINK, coverage(ring));
            c = mix(c, bottle, inside);
        }
        let noise: f64 = rng.gen_range(-0.01..0.01);
        c.map(|v| ((v + noise).clamp(0.0, 1.0) * 255.0).round() / 255.0)
    })
    .unwrap()
}

/// Random scene: a few solid or shaded shapes of random colours over a random
/// backdrop, quantised to 8 bits.
pub fn random_scene(width: usize, height: usize, seed: u64) -> PixelMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let backdrop: [f64; 3] = [rng.gen(), rng.gen(), rng.gen()];
    let shapes: Vec<([f64; 3], f64, f64, f64)> = (0..rng.gen_range(1..6))
        .map(|_| {
            (
                [rng.gen(), rng.gen(), rng.gen()],
                rng.gen_range(0.0..width as f64),
                rng.gen_range(0.0..height as f64),
                rng.gen_range(0.1..0.4) * width.min(height) as f64,
            )
        })
        .collect();
    PixelMatrix::from_fn(width, height, |x, y| {
        let mut c = backdrop;
        for (colour, sx, sy, r) in &shapes {
            let d = (x as f64 - sx).hypot(y as f64 - sy) - r;
            c = mix(c, *colour, coverage(d));
        }
        let noise: f64 = rng.gen_range(-0.02..0.02);
        c.map(|v| ((v + noise).clamp(0.0, 1.0) * 255.0).round() / 255.0)
    })
    .unwrap()
}

pub fn random_target(seed: u64) -> RgbColor {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    RgbColor::new(rng.gen(), rng.gen(), rng.gen())
}

/// `k` solid, well separated patches in vertical stripes of equal area.
pub fn patches(size: usize, colours: &[[f64; 3]]) -> PixelMatrix {
    let k = colours.len();
    PixelMatrix::from_fn(size, size, |x, y| colours[((y * size + x) * k) / (size * size)]).unwrap()
}
