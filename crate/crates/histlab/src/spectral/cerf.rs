//! Complex error functions for the packet overlap integrals.
//!
//! Everything reduces to the Faddeeva function w(z) = exp(-z^2) erfc(-iz)
//! on the closed upper half-plane, where it is bounded. We evaluate it with
//! the rational expansion of Weideman, SIAM J. Numer. Anal. 31 (1994) 1497,
//! at N = 64 terms; over the arguments the coefficient formulas produce this
//! is accurate to a few ulp.

use num_complex::Complex64;

/// Scale of the conformal map, L = sqrt(N / sqrt(2)) at N = 64.
const WEIDEMAN_L: f64 = 6.727171322029716;

const FRAC_1_SQRT_PI: f64 = 0.5641895835477563;

/// Polynomial coefficients of the expansion, highest power first (the first
/// entry multiplies Z^63). Computed from the cosine transform in the
/// reference in 40-digit arithmetic, rounded once to f64.
const WEIDEMAN_A: [f64; 64] = [
    1.0625704737059217e-25,
    -3.8986025202042375e-24,
    -7.484637169248439e-25,
    2.3168416601698317e-23,
    7.321447266416389e-24,
    -1.394130892737621e-22,
    -7.537122943132364e-23,
    8.42888248582555e-22,
    7.433530541080805e-22,
    -5.0471304131517485e-21,
    -6.940136829850447e-21,
    2.9174379786718096e-20,
    6.149871930842994e-20,
    -1.5472486941171385e-19,
    -5.169096040481817e-19,
    6.574531101955934e-19,
    4.08234842655728e-18,
    -8.880797783194235e-19,
    -2.95525501907965e-17,
    -2.4968655020769235e-17,
    1.8477915085919803e-16,
    4.1064650026220555e-16,
    -8.280264038694036e-16,
    -4.275539258001627e-15,
    -1.8642615086864697e-16,
    3.2958274392640907e-14,
    5.907593814636791e-14,
    -1.5478473543021312e-13,
    -7.920276268418266e-13,
    -3.939378486675605e-13,
    5.832530451810028e-12,
    1.7501500704141682e-11,
    -6.470682197000131e-12,
    -1.7560603223913899e-10,
    -4.5339144965634184e-10,
    2.443478742000767e-10,
    5.186955729352611e-09,
    1.5926813922559445e-08,
    7.435710778898551e-09,
    -1.3610261241789774e-07,
    -6.650424120602941e-07,
    -1.5547722781997578e-06,
    -7.564244109515164e-08,
    1.7901801586126486e-05,
    0.0001022700679891566,
    0.00039627451039808795,
    0.0012549788049982824,
    0.0034602079481074717,
    0.008565381413175881,
    0.019380399024538288,
    0.04055284652958028,
    0.07911655067602581,
    0.1447785997358642,
    0.24963969994535568,
    0.4070443030398737,
    0.6293868343374368,
    0.9249760252638087,
    1.2944377517175163,
    1.7275060857871172,
    2.20125657128641,
    2.680732639559084,
    3.1224481894020366,
    3.4804961039850415,
    3.7141697931977022,
];

/// Faddeeva function w(z) for Im z >= 0.
pub(crate) fn faddeeva(z: Complex64) -> Complex64 {
    debug_assert!(z.im >= 0.0, "faddeeva needs the upper half-plane");
    // d = L - iz has |d| >= L for Im z >= 0, so nothing here degenerates.
    let d = Complex64::new(WEIDEMAN_L + z.im, -z.re);
    let big_z = Complex64::new(WEIDEMAN_L - z.im, z.re) / d;
    let mut p = Complex64::new(0.0, 0.0);
    for &c in WEIDEMAN_A.iter() {
        p = p * big_z + c;
    }
    2.0 * p / (d * d) + FRAC_1_SQRT_PI / d
}

/// Scaled complementary error function erfcx(w) = exp(w^2) erfc(w), Re w >= 0.
pub(crate) fn erfcx(w: Complex64) -> Complex64 {
    // erfcx(w) = w(iw); Re w >= 0 puts iw in the upper half-plane.
    faddeeva(Complex64::new(-w.im, w.re))
}

/// exp(-y^2) erf(x + iy) for x >= 0, stable for arbitrarily large |y|.
///
/// erf(x + iy) itself grows like exp(y^2), so the product is computed via
/// erfcx to keep every factor bounded: exp(-y^2) - exp(-x^2 - 2ixy) erfcx(x + iy).
pub(crate) fn scaled_erf(x: f64, y: f64) -> Complex64 {
    debug_assert!(x >= 0.0, "scaled_erf needs Re >= 0");
    let front = Complex64::from_polar(f64::exp(-x * x), -2.0 * x * y);
    Complex64::new(f64::exp(-y * y), 0.0) - front * erfcx(Complex64::new(x, y))
}
