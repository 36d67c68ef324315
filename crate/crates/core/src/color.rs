//! Colour triples, the RGB/CIELAB conversions and the working-space scaling
//! used by clustering, estimation and recolouring.

use std::fmt;

use crate::Scalar;

/// Colour space of a buffer or warp.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ColorSpace {
    Rgb,
    Lab,
}

impl ColorSpace {
    pub fn as_str(self) -> &'static str {
        match self {
            ColorSpace::Rgb => "rgb",
            ColorSpace::Lab => "lab",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rgb" => Some(ColorSpace::Rgb),
            "lab" => Some(ColorSpace::Lab),
            _ => None,
        }
    }
}

impl fmt::Display for ColorSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A point in a three-channel colour space.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ColorTriple<T>(pub [T; 3]);

impl<T: Scalar> ColorTriple<T> {
    #[inline]
    pub fn new(c0: T, c1: T, c2: T) -> Self {
        Self([c0, c1, c2])
    }

    #[inline]
    pub fn splat(v: T) -> Self {
        Self([v; 3])
    }

    #[inline]
    pub fn sub(self, o: Self) -> Self {
        Self([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }

    #[inline]
    pub fn add(self, o: Self) -> Self {
        Self([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }

    #[inline]
    pub fn scale(self, s: T) -> Self {
        Self([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }

    #[inline]
    pub fn norm_sq(self) -> T {
        self.0[0] * self.0[0] + self.0[1] * self.0[1] + self.0[2] * self.0[2]
    }

    #[inline]
    pub fn dist_sq(self, o: Self) -> T {
        self.sub(o).norm_sq()
    }

    #[inline]
    pub fn max_abs_diff(self, o: Self) -> T {
        let d = self.sub(o);
        d.0[0].abs().max(d.0[1].abs()).max(d.0[2].abs())
    }

    /// Per-channel clamp to `[0, 1]`.
    #[inline]
    pub fn clamp_unit(self) -> Self {
        let c = |v: T| v.max(T::zero()).min(T::one());
        Self([c(self.0[0]), c(self.0[1]), c(self.0[2])])
    }

    pub fn cast<U: Scalar>(self) -> ColorTriple<U> {
        ColorTriple(self.0.map(|v| U::lit(v.as_f64())))
    }
}

impl<T> From<[T; 3]> for ColorTriple<T> {
    fn from(v: [T; 3]) -> Self {
        Self(v)
    }
}

// sRGB primaries, D65. White is the row sum so that (1,1,1) lands exactly on a = b = 0.
const RGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.412453, 0.357580, 0.180423],
    [0.212671, 0.715160, 0.072169],
    [0.019334, 0.119193, 0.950227],
];
const XYZ_TO_RGB: [[f64; 3]; 3] = [
    [3.240481343200526, -1.5371515162713185, -0.4985363261688878],
    [-0.9692549499965682, 1.8759900014898907, 0.04155592655829284],
    [
        0.05564663913517716,
        -0.20404133836651123,
        1.0573110696453443,
    ],
];

fn white<T: Scalar>() -> [T; 3] {
    RGB_TO_XYZ.map(|row| T::lit(row[0] + row[1] + row[2]))
}

#[inline]
fn srgb_to_linear<T: Scalar>(v: T) -> T {
    if v <= T::lit(0.04045) {
        v / T::lit(12.92)
    } else {
        ((v + T::lit(0.055)) / T::lit(1.055)).powf(T::lit(2.4))
    }
}

#[inline]
fn linear_to_srgb<T: Scalar>(v: T) -> T {
    if v <= T::lit(0.0031308) {
        v * T::lit(12.92)
    } else {
        T::lit(1.055) * v.powf(T::lit(1.0 / 2.4)) - T::lit(0.055)
    }
}

const LAB_EPS: f64 = 216.0 / 24389.0;
const LAB_KAPPA: f64 = 24389.0 / 27.0;

#[inline]
fn lab_f<T: Scalar>(t: T) -> T {
    if t > T::lit(LAB_EPS) {
        t.cbrt()
    } else {
        (T::lit(LAB_KAPPA) * t + T::lit(16.0)) / T::lit(116.0)
    }
}

#[inline]
fn lab_f_inv<T: Scalar>(f: T) -> T {
    let f3 = f * f * f;
    if f3 > T::lit(LAB_EPS) {
        f3
    } else {
        (T::lit(116.0) * f - T::lit(16.0)) / T::lit(LAB_KAPPA)
    }
}

fn mat_mul<T: Scalar>(m: &[[f64; 3]; 3], v: [T; 3]) -> [T; 3] {
    m.map(|row| T::lit(row[0]) * v[0] + T::lit(row[1]) * v[1] + T::lit(row[2]) * v[2])
}

/// sRGB in `[0, 1]` to CIELAB (D65), with L in `[0, 100]`.
pub fn rgb_to_lab<T: Scalar>(c: ColorTriple<T>) -> ColorTriple<T> {
    let lin = c.0.map(srgb_to_linear);
    let xyz = mat_mul(&RGB_TO_XYZ, lin);
    let w = white::<T>();
    let fx = lab_f(xyz[0] / w[0]);
    let fy = lab_f(xyz[1] / w[1]);
    let fz = lab_f(xyz[2] / w[2]);
    ColorTriple([
        T::lit(116.0) * fy - T::lit(16.0),
        T::lit(500.0) * (fx - fy),
        T::lit(200.0) * (fy - fz),
    ])
}

/// CIELAB (D65) to sRGB; out-of-gamut results are clamped to `[0, 1]`.
pub fn lab_to_rgb<T: Scalar>(c: ColorTriple<T>) -> ColorTriple<T> {
    let [l, a, b] = c.0;
    let fy = (l + T::lit(16.0)) / T::lit(116.0);
    let fx = fy + a / T::lit(500.0);
    let fz = fy - b / T::lit(200.0);
    let w = white::<T>();
    let xyz = [
        lab_f_inv(fx) * w[0],
        lab_f_inv(fy) * w[1],
        lab_f_inv(fz) * w[2],
    ];
    let lin = mat_mul(&XYZ_TO_RGB, xyz);
    ColorTriple(lin.map(|v| linear_to_srgb(v.max(T::zero()).min(T::one()))))
}

/// CIELAB to the unit-cube working scale: `L/100`, `(a+128)/255`, `(b+128)/255`.
#[inline]
pub fn lab_to_working<T: Scalar>(c: ColorTriple<T>) -> ColorTriple<T> {
    ColorTriple([
        c.0[0] / T::lit(100.0),
        (c.0[1] + T::lit(128.0)) / T::lit(255.0),
        (c.0[2] + T::lit(128.0)) / T::lit(255.0),
    ])
}

#[inline]
pub fn working_to_lab<T: Scalar>(c: ColorTriple<T>) -> ColorTriple<T> {
    ColorTriple([
        c.0[0] * T::lit(100.0),
        c.0[1] * T::lit(255.0) - T::lit(128.0),
        c.0[2] * T::lit(255.0) - T::lit(128.0),
    ])
}

/// Map a normalised RGB triple into the working coordinates of `space`.
#[inline]
pub fn rgb_to_working<T: Scalar>(c: ColorTriple<T>, space: ColorSpace) -> ColorTriple<T> {
    match space {
        ColorSpace::Rgb => c,
        ColorSpace::Lab => lab_to_working(rgb_to_lab(c)),
    }
}

/// Map working coordinates of `space` back to RGB, clamped to `[0, 1]`.
#[inline]
pub fn working_to_rgb<T: Scalar>(c: ColorTriple<T>, space: ColorSpace) -> ColorTriple<T> {
    match space {
        ColorSpace::Rgb => c.clamp_unit(),
        ColorSpace::Lab => lab_to_rgb(working_to_lab(c)),
    }
}
