//! Quadrature rules: Gauss–Legendre on intervals, adaptive Gauss–Kronrod,
//! and symmetric rules on triangles.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// A Gauss–Legendre rule mapped to an arbitrary interval.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        let (nodes, weights) = gauss_legendre(n);
        Self { nodes, weights }
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes.iter().zip(&self.weights).map(move |(x, w)| (mid + half * x, w * half))
    }
}

const K15_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const K15_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
const G7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod_panel<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut k = K15_WEIGHTS[7] * fc;
    let mut g = G7_WEIGHTS[3] * fc;
    for i in 0..7 {
        let dx = half * K15_NODES[i];
        let s = f(mid - dx) + f(mid + dx);
        k += K15_WEIGHTS[i] * s;
        if i % 2 == 1 {
            g += G7_WEIGHTS[i / 2] * s;
        }
    }
    (k * half, ((k - g) * half).abs())
}

/// Adaptive Gauss–Kronrod (7/15) integration to a relative tolerance.
///
/// Returns the integral estimate and the accumulated error estimate.
pub fn adaptive_kronrod<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    max_panels: usize,
) -> (f64, f64) {
    let (v, e) = kronrod_panel(&mut f, a, b);
    let mut panels = vec![(a, b, v, e)];
    loop {
        let total: f64 = panels.iter().map(|p| p.2).sum();
        let err: f64 = panels.iter().map(|p| p.3).sum();
        if err <= rel_tol * total.abs() || panels.len() >= max_panels {
            return (total, err);
        }
        // split the worst panel
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (pa, pb, _, _) = panels.swap_remove(idx);
        let pm = 0.5 * (pa + pb);
        let (v1, e1) = kronrod_panel(&mut f, pa, pm);
        let (v2, e2) = kronrod_panel(&mut f, pm, pb);
        panels.push((pa, pm, v1, e1));
        panels.push((pm, pb, v2, e2));
    }
}

/// A quadrature rule on the reference triangle, given as barycentric
/// coordinates and weights summing to one.
#[derive(Debug, Clone, Copy)]
pub struct TriangleRule {
    pub points: &'static [[f64; 3]],
    pub weights: &'static [f64],
}

/// Symmetric 3-point rule, exact for quadratics.
pub const TRIANGLE_3: TriangleRule = TriangleRule {
    points: &[
        [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0],
        [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
        [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
    ],
    weights: &[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
};

const R7_A1: f64 = 0.059_715_871_789_769_82;
const R7_B1: f64 = 0.470_142_064_105_115_1;
const R7_A2: f64 = 0.797_426_985_353_087_3;
const R7_B2: f64 = 0.101_286_507_323_456_3;
const R7_W1: f64 = 0.132_394_152_788_506_2;
const R7_W2: f64 = 0.125_939_180_544_827_1;

/// Radon's 7-point rule, exact for quintics.
pub const TRIANGLE_7: TriangleRule = TriangleRule {
    points: &[
        [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
        [R7_A1, R7_B1, R7_B1],
        [R7_B1, R7_A1, R7_B1],
        [R7_B1, R7_B1, R7_A1],
        [R7_A2, R7_B2, R7_B2],
        [R7_B2, R7_A2, R7_B2],
        [R7_B2, R7_B2, R7_A2],
    ],
    weights: &[0.225, R7_W1, R7_W1, R7_W1, R7_W2, R7_W2, R7_W2],
};

/// Centroid rule.
pub const TRIANGLE_1: TriangleRule = TriangleRule {
    points: &[[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]],
    weights: &[1.0],
};

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for n in 1..=20 {
            let rule = GaussLegendre::new(n);
            for k in 0..(2 * n) {
                let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                let v = rule.integrate(-1.0, 1.0, |x| x.powi(k as i32));
                assert!((v - exact).abs() < 1e-13, "n={n} k={k}: {v} vs {exact}");
            }
        }
    }

    #[test]
    fn kronrod_handles_endpoint_behaviour() {
        let (v, _) = adaptive_kronrod(|x: f64| x.sqrt(), 0.0, 1.0, 1e-12, 200);
        assert!((v - 2.0 / 3.0).abs() < 1e-11);
        let (v, _) = adaptive_kronrod(|x: f64| (-x * x).exp(), 0.0, 10.0, 1e-13, 200);
        assert!((v - 0.5 * std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    fn check_rule(rule: TriangleRule, degree: i32) {
        // integrate x^i y^j over the reference triangle (0,0),(1,0),(0,1);
        // exact value i! j! / (i + j + 2)!
        let fact = |n: i32| (1..=n).map(|k| k as f64).product::<f64>();
        for i in 0..=degree {
            for j in 0..=(degree - i) {
                let exact = fact(i) * fact(j) / fact(i + j + 2);
                let approx: f64 = rule
                    .points
                    .iter()
                    .zip(rule.weights)
                    .map(|(b, w)| w * 0.5 * b[1].powi(i) * b[2].powi(j))
                    .sum();
                assert!((approx - exact).abs() < 1e-14, "degree {i},{j}");
            }
        }
        assert!((rule.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn triangle_rules_are_exact_to_their_degree() {
        check_rule(TRIANGLE_1, 1);
        check_rule(TRIANGLE_3, 2);
        check_rule(TRIANGLE_7, 5);
    }
}
