//! Conversions between companded sRGB in [0, 1], linear RGB and CIE L\*a\*b\*
//! (D65 white, 2° observer).

use serde::{Deserialize, Serialize};

use crate::pixels::Pixels;
use crate::scalar::Scalar;

/// Non-linear (companded) sRGB triple, channels nominally in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Rgb<T> {
    pub r: T,
    pub g: T,
    pub b: T,
}

/// CIE L\*a\*b\* triple.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Lab<T> {
    pub l: T,
    pub a: T,
    pub b: T,
}

impl<T: Scalar> Rgb<T> {
    pub const fn new(r: T, g: T, b: T) -> Self {
        Self { r, g, b }
    }

    pub fn from_array([r, g, b]: [T; 3]) -> Self {
        Self { r, g, b }
    }

    pub fn to_array(self) -> [T; 3] {
        [self.r, self.g, self.b]
    }

    pub fn from_u8([r, g, b]: [u8; 3]) -> Self {
        let s = |v: u8| T::from_u8(v).unwrap() / T::lit(255.0);
        Self::new(s(r), s(g), s(b))
    }

    pub fn to_u8(self) -> [u8; 3] {
        self.to_array().map(quantise)
    }

    pub fn clamped(self) -> Self {
        Self::from_array(self.to_array().map(clamp_unit))
    }

    /// Parses `#RRGGBB` (the leading `#` is optional).
    pub fn from_hex(s: &str) -> Option<Self> {
        let hex = s.strip_prefix('#').unwrap_or(s);
        if hex.len() != 6 || !hex.bytes().all(|b| b.is_ascii_hexdigit()) {
            return None;
        }
        let byte = |i: usize| u8::from_str_radix(&hex[i..i + 2], 16).ok();
        Some(Self::from_u8([byte(0)?, byte(2)?, byte(4)?]))
    }

    pub fn to_hex(self) -> String {
        let [r, g, b] = self.to_u8();
        format!("#{r:02X}{g:02X}{b:02X}")
    }
}

impl<T: Scalar> Lab<T> {
    pub const fn new(l: T, a: T, b: T) -> Self {
        Self { l, a, b }
    }

    pub fn from_array([l, a, b]: [T; 3]) -> Self {
        Self { l, a, b }
    }

    pub fn to_array(self) -> [T; 3] {
        [self.l, self.a, self.b]
    }

    /// Radius in the a\*b\* plane.
    pub fn chroma(self) -> T {
        self.a.hypot(self.b)
    }
}

/// Rounds a [0, 1] value to the nearest 8-bit code, clamping first.
pub fn quantise<T: Scalar>(v: T) -> u8 {
    let v = clamp_unit(v) * T::lit(255.0);
    v.round().to_u8().unwrap_or(if v > T::zero() { 255 } else { 0 })
}

#[inline]
fn clamp_unit<T: Scalar>(v: T) -> T {
    if v.is_nan() {
        return T::zero();
    }
    v.max(T::zero()).min(T::one())
}

const RGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
];

const XYZ_TO_RGB: [[f64; 3]; 3] = [
    [3.2404548360214087, -1.5371388501025751, -0.498531546868481],
    [-0.9692663898756538, 1.876010928842491, 0.04155608234667355],
    [0.05564341960421367, -0.20402585426769818, 1.057225162457929],
];

// Row sums of RGB_TO_XYZ, so that every grey maps to a* = b* = 0.
const WHITE_D65: [f64; 3] = [0.95047, 1.0000001, 1.08883];

// CIE constants in their exact rational form.
const EPSILON: f64 = 216.0 / 24389.0;
const KAPPA: f64 = 24389.0 / 27.0;

/// Channels of linear RGB beyond this distance outside [0, 1] count as clamped.
const GAMUT_SLACK: f64 = 1e-9;

#[inline]
pub fn srgb_to_linear<T: Scalar>(v: T) -> T {
    if v <= T::lit(0.04045) {
        v / T::lit(12.92)
    } else {
        ((v + T::lit(0.055)) / T::lit(1.055)).powf(T::lit(2.4))
    }
}

#[inline]
pub fn linear_to_srgb<T: Scalar>(v: T) -> T {
    if v <= T::lit(0.0031308) {
        v * T::lit(12.92)
    } else if v >= T::one() {
        T::one()
    } else {
        T::lit(1.055) * v.powf(T::lit(1.0 / 2.4)) - T::lit(0.055)
    }
}

#[inline]
fn mul3<T: Scalar>(m: &[[f64; 3]; 3], v: [T; 3]) -> [T; 3] {
    let row = |r: &[f64; 3]| T::lit(r[0]) * v[0] + T::lit(r[1]) * v[1] + T::lit(r[2]) * v[2];
    [row(&m[0]), row(&m[1]), row(&m[2])]
}

#[inline]
fn lab_f<T: Scalar>(t: T) -> T {
    if t > T::lit(EPSILON) {
        t.cbrt()
    } else {
        (T::lit(KAPPA) * t + T::lit(16.0)) / T::lit(116.0)
    }
}

#[inline]
fn lab_f_inv<T: Scalar>(f: T) -> T {
    let cube = f * f * f;
    if cube > T::lit(EPSILON) {
        cube
    } else {
        (T::lit(116.0) * f - T::lit(16.0)) / T::lit(KAPPA)
    }
}

pub fn rgb_to_lab<T: Scalar>(c: Rgb<T>) -> Lab<T> {
    let linear = c.to_array().map(srgb_to_linear);
    let xyz = mul3(&RGB_TO_XYZ, linear);
    let [x, y, z] = [0, 1, 2].map(|i| xyz[i] / T::lit(WHITE_D65[i]));
    let (fx, fy, fz) = (lab_f(x), lab_f(y), lab_f(z));
    // The linear segment keeps black at exactly L = 0.
    let l = if y > T::lit(EPSILON) {
        T::lit(116.0) * fy - T::lit(16.0)
    } else {
        T::lit(KAPPA) * y
    };
    Lab::new(l, T::lit(500.0) * (fx - fy), T::lit(200.0) * (fy - fz))
}

/// Result of an inverse conversion; `clamped` is set when the exact inverse fell
/// outside the sRGB gamut and at least one channel had to be clipped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GamutMapped<T> {
    pub rgb: Rgb<T>,
    pub clamped: bool,
}

pub fn lab_to_rgb<T: Scalar>(c: Lab<T>) -> GamutMapped<T> {
    let fy = (c.l + T::lit(16.0)) / T::lit(116.0);
    let fx = fy + c.a / T::lit(500.0);
    let fz = fy - c.b / T::lit(200.0);
    let y = if c.l > T::lit(KAPPA * EPSILON) {
        fy * fy * fy
    } else {
        c.l / T::lit(KAPPA)
    };
    let xyz = [lab_f_inv(fx), y, lab_f_inv(fz)];
    let xyz = [0, 1, 2].map(|i| xyz[i] * T::lit(WHITE_D65[i]));
    let linear = mul3(&XYZ_TO_RGB, xyz);

    let slack = T::lit(GAMUT_SLACK);
    let clamped = linear
        .iter()
        .any(|&v| !v.is_finite() || v < -slack || v > T::one() + slack);
    let rgb = linear.map(|v| clamp_unit(linear_to_srgb(clamp_unit(v))));
    GamutMapped {
        rgb: Rgb::from_array(rgb),
        clamped,
    }
}

/// Row-wise [`rgb_to_lab`]. Input rows are clamped to [0, 1] before conversion.
pub fn image_to_lab<T: Scalar>(img: &Pixels<T>) -> Pixels<T> {
    img.map(|p| rgb_to_lab(Rgb::from_array(p.map(clamp_unit))).to_array())
}
