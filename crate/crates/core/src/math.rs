//! Small float and 2-vector helpers; `core` has no `sqrt`.

pub type Vec2 = [f64; 2];

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn dot(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn scale(s: f64, a: Vec2) -> Vec2 {
    [s * a[0], s * a[1]]
}

#[inline]
pub fn add(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] + b[0], a[1] + b[1]]
}

#[inline]
pub fn sub(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn norm(a: Vec2) -> f64 {
    sqrt(dot(a, a))
}

/// Sum in index order. Kept explicit so every reduction in the crate has the
/// same, reproducible association.
#[inline]
pub fn ordered_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = 0.0;
    for v in values {
        acc += v;
    }
    acc
}
