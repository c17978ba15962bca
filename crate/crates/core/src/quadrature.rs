//! Gauss rules on the unit interval and the reference triangle.

use std::f64::consts::PI;

/// Gauss-Legendre rule mapped to `[0, 1]`, exact for polynomials of degree
/// `2 * points - 1`.
#[derive(Debug, Clone)]
pub struct LineRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl LineRule {
    pub fn gauss(points: usize) -> Self {
        assert!(points > 0);
        let mut nodes = Vec::with_capacity(points);
        let mut weights = Vec::with_capacity(points);
        for i in 0..points {
            // Newton on P_n from the Chebyshev-like initial guess
            let mut x = (PI * (i as f64 + 0.75) / (points as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(points, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    let (_, d) = legendre_with_derivative(points, x);
                    dp = d;
                    break;
                }
            }
            nodes.push(0.5 * (1.0 - x));
            weights.push(1.0 / ((1.0 - x * x) * dp * dp));
        }
        // ascending order on [0, 1]
        Self {
            points: nodes,
            weights,
        }
    }

    /// Smallest Gauss rule exact for polynomials of the given degree.
    pub fn with_degree(degree: usize) -> Self {
        Self::gauss(degree / 2 + 1)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Value and derivative of the Legendre polynomial `P_n` at `x` in `[-1, 1]`.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    (p1, n * (x * p1 - p0) / (x * x - 1.0))
}

/// Legendre polynomial `P_j(2s - 1)` shifted to `[0, 1]`.
pub fn shifted_legendre(j: usize, s: f64) -> f64 {
    match j {
        0 => 1.0,
        1 => 2.0 * s - 1.0,
        _ => {
            let x = 2.0 * s - 1.0;
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=j {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            p1
        }
    }
}

/// Quadrature on the reference triangle `(0,0), (1,0), (0,1)`.
///
/// Points are stored as barycentric coordinates `(1 - x - y, x, y)`; weights
/// sum to the reference area `1/2`.
#[derive(Debug, Clone)]
pub struct TriangleRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    degree: usize,
}

impl TriangleRule {
    /// Collapsed (Duffy) tensor Gauss rule exact to the requested degree.
    pub fn with_degree(degree: usize) -> Self {
        // after the collapse x = a, y = b (1 - a) the integrand gains one
        // degree in a from the jacobian (1 - a)
        let line_a = LineRule::with_degree(degree + 1);
        let line_b = LineRule::with_degree(degree);
        let mut points = Vec::with_capacity(line_a.len() * line_b.len());
        let mut weights = Vec::with_capacity(points.capacity());
        for (a, wa) in line_a.points.iter().zip(&line_a.weights) {
            for (b, wb) in line_b.points.iter().zip(&line_b.weights) {
                let x = *a;
                let y = b * (1.0 - a);
                points.push([1.0 - x - y, x, y]);
                weights.push(wa * wb * (1.0 - a));
            }
        }
        Self {
            points,
            weights,
            degree,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Reference (Cartesian) coordinates of quadrature point `q`.
    pub fn reference_point(&self, q: usize) -> [f64; 2] {
        [self.points[q][1], self.points[q][2]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `∫_T x^a y^b = a! b! / (a + b + 2)!` on the reference triangle.
    fn monomial_integral(a: u32, b: u32) -> f64 {
        let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
        fact(a) * fact(b) / fact(a + b + 2)
    }

    #[test]
    fn gauss_line_integrates_to_degree() {
        for n in 1..8 {
            let rule = LineRule::gauss(n);
            assert!(rule.weights.iter().all(|&w| w > 0.0));
            for d in 0..(2 * n) {
                let approx: f64 = rule
                    .points
                    .iter()
                    .zip(&rule.weights)
                    .map(|(x, w)| w * x.powi(d as i32))
                    .sum();
                let exact = 1.0 / (d as f64 + 1.0);
                assert!((approx - exact).abs() < 1e-14, "n={n} d={d}");
            }
        }
    }

    #[test]
    fn triangle_rule_exactness() {
        for degree in 0..=9 {
            let rule = TriangleRule::with_degree(degree);
            assert!(rule.weights.iter().all(|&w| w > 0.0));
            let total: f64 = rule.weights.iter().sum();
            assert!((total - 0.5).abs() < 1e-15);
            for a in 0..=degree as u32 {
                for b in 0..=(degree as u32 - a) {
                    let approx: f64 = (0..rule.len())
                        .map(|q| {
                            let [x, y] = rule.reference_point(q);
                            rule.weights[q] * x.powi(a as i32) * y.powi(b as i32)
                        })
                        .sum();
                    let exact = monomial_integral(a, b);
                    assert!(
                        (approx - exact).abs() < 1e-15,
                        "degree {degree}: x^{a} y^{b}"
                    );
                }
            }
        }
    }

    #[test]
    fn points_inside_triangle() {
        let rule = TriangleRule::with_degree(6);
        for p in &rule.points {
            assert!(p.iter().all(|&l| l > 0.0 && l < 1.0));
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn shifted_legendre_orthogonal() {
        let rule = LineRule::gauss(6);
        for i in 0..4 {
            for j in 0..4 {
                let ip: f64 = rule
                    .points
                    .iter()
                    .zip(&rule.weights)
                    .map(|(s, w)| w * shifted_legendre(i, *s) * shifted_legendre(j, *s))
                    .sum();
                let expected = if i == j { 1.0 / (2 * i + 1) as f64 } else { 0.0 };
                assert!((ip - expected).abs() < 1e-14);
            }
        }
    }
}
