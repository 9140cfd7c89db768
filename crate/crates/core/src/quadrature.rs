//! Symmetric triangle quadrature rules (Dunavant), in barycentric
//! coordinates with weights summing to one. Integrals are `|T| Σ w_q g(x_q)`.

use crate::mesh::{Mesh, Point2};

#[derive(Debug, Clone, Copy)]
pub struct TriangleRule {
    pub degree: u32,
    pub points: &'static [([f64; 3], f64)],
}

const A4: f64 = 0.445_948_490_915_965;
const B4: f64 = 0.091_576_213_509_771;

/// Six points, exact for degree 4. Used for loads and data oscillation.
pub const DEGREE_4: TriangleRule = TriangleRule {
    degree: 4,
    points: &[
        ([1.0 - 2.0 * A4, A4, A4], 0.223_381_589_678_011),
        ([A4, 1.0 - 2.0 * A4, A4], 0.223_381_589_678_011),
        ([A4, A4, 1.0 - 2.0 * A4], 0.223_381_589_678_011),
        ([1.0 - 2.0 * B4, B4, B4], 0.109_951_743_655_322),
        ([B4, 1.0 - 2.0 * B4, B4], 0.109_951_743_655_322),
        ([B4, B4, 1.0 - 2.0 * B4], 0.109_951_743_655_322),
    ],
};

const A6: f64 = 0.249_286_745_170_910;
const B6: f64 = 0.063_089_014_491_502;
const C6: [f64; 2] = [0.310_352_451_033_784, 0.636_502_499_121_399];
const W6: [f64; 3] = [0.116_786_275_726_379, 0.050_844_906_370_207, 0.082_851_075_618_374];

/// Twelve points, exact for degree 6. Used for energy errors.
pub const DEGREE_6: TriangleRule = TriangleRule {
    degree: 6,
    points: &[
        ([1.0 - 2.0 * A6, A6, A6], W6[0]),
        ([A6, 1.0 - 2.0 * A6, A6], W6[0]),
        ([A6, A6, 1.0 - 2.0 * A6], W6[0]),
        ([1.0 - 2.0 * B6, B6, B6], W6[1]),
        ([B6, 1.0 - 2.0 * B6, B6], W6[1]),
        ([B6, B6, 1.0 - 2.0 * B6], W6[1]),
        ([1.0 - C6[0] - C6[1], C6[0], C6[1]], W6[2]),
        ([1.0 - C6[0] - C6[1], C6[1], C6[0]], W6[2]),
        ([C6[0], 1.0 - C6[0] - C6[1], C6[1]], W6[2]),
        ([C6[1], 1.0 - C6[0] - C6[1], C6[0]], W6[2]),
        ([C6[0], C6[1], 1.0 - C6[0] - C6[1]], W6[2]),
        ([C6[1], C6[0], 1.0 - C6[0] - C6[1]], W6[2]),
    ],
};

const A8: f64 = 0.459_292_588_292_723;
const B8: f64 = 0.170_569_307_751_760;
const C8: f64 = 0.050_547_228_317_031;
const D8: [f64; 2] = [0.263_112_829_634_638, 0.728_492_392_955_404];
const W8: [f64; 5] = [
    0.144_315_607_677_787,
    0.095_091_634_267_285,
    0.103_217_370_534_718,
    0.032_458_497_623_198,
    0.027_230_314_174_435,
];

/// Sixteen points, exact for degree 8.
pub const DEGREE_8: TriangleRule = TriangleRule {
    degree: 8,
    points: &[
        ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], W8[0]),
        ([1.0 - 2.0 * A8, A8, A8], W8[1]),
        ([A8, 1.0 - 2.0 * A8, A8], W8[1]),
        ([A8, A8, 1.0 - 2.0 * A8], W8[1]),
        ([1.0 - 2.0 * B8, B8, B8], W8[2]),
        ([B8, 1.0 - 2.0 * B8, B8], W8[2]),
        ([B8, B8, 1.0 - 2.0 * B8], W8[2]),
        ([1.0 - 2.0 * C8, C8, C8], W8[3]),
        ([C8, 1.0 - 2.0 * C8, C8], W8[3]),
        ([C8, C8, 1.0 - 2.0 * C8], W8[3]),
        ([1.0 - D8[0] - D8[1], D8[0], D8[1]], W8[4]),
        ([1.0 - D8[0] - D8[1], D8[1], D8[0]], W8[4]),
        ([D8[0], 1.0 - D8[0] - D8[1], D8[1]], W8[4]),
        ([D8[1], 1.0 - D8[0] - D8[1], D8[0]], W8[4]),
        ([D8[0], D8[1], 1.0 - D8[0] - D8[1]], W8[4]),
        ([D8[1], D8[0], 1.0 - D8[0] - D8[1]], W8[4]),
    ],
};

impl TriangleRule {
    /// `∫_T g` for a function of the physical point and the barycentric
    /// coordinates.
    pub fn integrate<F>(&self, mesh: &Mesh, t: usize, mut g: F) -> f64
    where
        F: FnMut(Point2, [f64; 3]) -> f64,
    {
        let mut acc = 0.0;
        for &(bary, w) in self.points {
            acc += w * g(mesh.map_point(t, bary), bary);
        }
        acc * mesh.area(t)
    }
}
