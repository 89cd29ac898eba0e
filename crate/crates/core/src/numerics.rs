// SPDX-License-Identifier: Apache-2.0

//! Small numerical kernels: Gauss–Hermite rules, adaptive Gauss–Kronrod,
//! golden-section search, Richardson-extrapolated derivatives and stream
//! seeding.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Gauss–Hermite rule for the weight e^{−x²}.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    /// Nodes by Newton iteration on the orthonormal Hermite recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        const PIM4: f64 = 0.751_125_544_464_942_5; // π^{-1/4}
        let nf = n as f64;
        let mut x = vec![0.0; n];
        let mut w = vec![0.0; n];
        let m = n.div_ceil(2);
        let mut z = 0.0f64;
        for i in 0..m {
            z = match i {
                0 => (2.0 * nf + 1.0).sqrt() - 1.855_75 * (2.0 * nf + 1.0).powf(-0.166_67),
                1 => z - 1.14 * nf.powf(0.426) / z,
                2 => 1.86 * z - 0.86 * x[0],
                3 => 1.91 * z - 0.91 * x[1],
                _ => 2.0 * z - x[i - 2],
            };
            let mut pp = 0.0;
            for _ in 0..100 {
                let (mut p1, mut p2) = (PIM4, 0.0);
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
                }
                pp = (2.0 * nf).sqrt() * p2;
                let dz = p1 / pp;
                z -= dz;
                if dz.abs() <= 1e-15 * z.abs().max(1.0) {
                    break;
                }
            }
            x[i] = z;
            x[n - 1 - i] = -z;
            w[i] = 2.0 / (pp * pp);
            w[n - 1 - i] = w[i];
        }
        GaussHermite { nodes: x, weights: w }
    }

    /// ∫∫ e^{−x²−y²} f(x, y) dx dy on the tensor grid.
    pub fn integrate_2d(&self, mut f: impl FnMut(f64, f64) -> f64) -> f64 {
        let mut total = 0.0;
        for (&y, &wy) in self.nodes.iter().zip(&self.weights) {
            let mut row = 0.0;
            for (&x, &wx) in self.nodes.iter().zip(&self.weights) {
                row += wx * f(x, y);
            }
            total += wy * row;
        }
        total
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn gk15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub fn relative_error(&self) -> f64 {
        if self.value == 0.0 {
            if self.error == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            self.error / self.value.abs()
        }
    }
}

/// Globally adaptive Gauss–Kronrod (7/15) over [a, b], starting from
/// `panels` equal sub-intervals.
pub fn adaptive_gk(
    f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    panels: usize,
    rel_tol: f64,
    abs_tol: f64,
) -> Estimate {
    let width = (b - a) / panels as f64;
    let breaks: Vec<f64> = (0..=panels)
        .map(|i| if i == panels { b } else { a + width * i as f64 })
        .collect();
    adaptive_gk_breaks(f, &breaks, rel_tol, abs_tol)
}

/// As [`adaptive_gk`] with the initial panels given by sorted `breaks`.
pub fn adaptive_gk_breaks(
    mut f: impl FnMut(f64) -> f64,
    breaks: &[f64],
    rel_tol: f64,
    abs_tol: f64,
) -> Estimate {
    const MAX_PANELS: usize = 20_000;
    let mut heap = BinaryHeap::new();
    let (mut value, mut error) = (0.0, 0.0);
    for w in breaks.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let (v, e) = gk15(&mut f, lo, hi);
        value += v;
        error += e;
        heap.push(Panel { a: lo, b: hi, value: v, error: e });
    }
    while error > abs_tol.max(rel_tol * value.abs()) && heap.len() < MAX_PANELS {
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        let (v1, e1) = gk15(&mut f, worst.a, mid);
        let (v2, e2) = gk15(&mut f, mid, worst.b);
        value += v1 + v2 - worst.value;
        error += e1 + e2 - worst.error;
        heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2 });
    }
    // Re-sum to shed accumulated cancellation in the running totals.
    let (value, error) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
    Estimate { value, error }
}

/// Maximizes `f` over [lo, hi] by golden-section search in ln x.
/// Returns (argmax, max).
pub fn golden_max_log(f: impl Fn(f64) -> f64, lo: f64, hi: f64, rel_tol: f64) -> (f64, f64) {
    let invphi = (5f64.sqrt() - 1.0) / 2.0;
    let g = |u: f64| f(u.exp());
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let mut c = b - invphi * (b - a);
    let mut d = a + invphi * (b - a);
    let (mut fc, mut fd) = (g(c), g(d));
    // ln-space width below rel_tol means a relative accuracy of rel_tol in x.
    while (b - a).abs() > rel_tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = g(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = g(d);
        }
    }
    let u = 0.5 * (a + b);
    (u.exp(), g(u))
}

/// f''(x) by central differences at steps h and h/2 with one Richardson step.
pub fn second_derivative(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    let f0 = f(x);
    let d = |h: f64| (f(x + h) - 2.0 * f0 + f(x - h)) / (h * h);
    (4.0 * d(0.5 * h) - d(h)) / 3.0
}

/// f'(x) by central differences with one Richardson step.
pub fn first_derivative(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    let d = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
    (4.0 * d(0.5 * h) - d(h)) / 3.0
}

/// Seed of the `index`-th independent random stream under a run seed:
/// splitmix64(seed) XOR index.
pub fn stream_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    (z ^ (z >> 31)) ^ index
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn hermite_moments() {
        for n in [1usize, 2, 5, 20, 64, 80] {
            let gh = GaussHermite::new(n);
            let w0: f64 = gh.weights.iter().sum();
            assert_relative_eq!(w0, PI.sqrt(), max_relative = 1e-13);
            if n >= 3 {
                let m2: f64 = gh.nodes.iter().zip(&gh.weights).map(|(x, w)| w * x * x).sum();
                assert_relative_eq!(m2, PI.sqrt() / 2.0, max_relative = 1e-13);
                let m4: f64 = gh.nodes.iter().zip(&gh.weights).map(|(x, w)| w * x.powi(4)).sum();
                assert_relative_eq!(m4, 0.75 * PI.sqrt(), max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn hermite_two_point_rule() {
        let gh = GaussHermite::new(2);
        assert_relative_eq!(gh.nodes[0].abs(), 0.5f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(gh.weights[0], PI.sqrt() / 2.0, max_relative = 1e-14);
    }

    #[test]
    fn hermite_cosine() {
        // ∫ e^{-x²} cos(ax) = √π e^{-a²/4}
        let gh = GaussHermite::new(80);
        let a = 2.5;
        let v: f64 = gh.nodes.iter().zip(&gh.weights).map(|(x, w)| w * (a * x).cos()).sum();
        assert_relative_eq!(v, PI.sqrt() * (-a * a / 4.0f64).exp(), max_relative = 1e-12);
    }

    #[test]
    fn kronrod_narrow_peak() {
        let s: f64 = 1e-3;
        let est = adaptive_gk(|x| (-(x * x) / (s * s)).exp(), -8.0, 8.0, 16, 1e-12, 0.0);
        assert_relative_eq!(est.value, PI.sqrt() * s, max_relative = 1e-11);
        assert!(est.relative_error() < 1e-11);
    }

    #[test]
    fn golden_finds_peak() {
        let (x, fx) = golden_max_log(|x: f64| -(x.ln() - 0.3).powi(2), 1e-2, 1e2, 1e-9);
        assert_relative_eq!(x, 0.3f64.exp(), max_relative = 1e-6);
        assert!(fx <= 0.0);
    }

    #[test]
    fn derivatives() {
        assert_relative_eq!(second_derivative(|x: f64| x.sin(), 0.4, 1e-2), -(0.4f64.sin()), max_relative = 1e-8);
        assert_relative_eq!(first_derivative(|x: f64| x.exp(), 0.4, 1e-2), 0.4f64.exp(), max_relative = 1e-9);
    }
}
