//! Real polynomials and isolation of their real roots on an interval.
//!
//! Roots are bracketed by the critical points of the polynomial (found
//! recursively from the derivative) and refined by bisection, so every
//! simple root inside the interval is found. Even-multiplicity roots show up
//! as critical points where the polynomial is numerically zero.

use alloc::vec::Vec;

/// Polynomial with coefficients in ascending order of degree.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Poly { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// Sum of `|cᵢ|·|x|ⁱ`, the natural scale for rounding error in [`Self::eval`].
    pub fn magnitude(&self, x: f64) -> f64 {
        let ax = x.abs();
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * ax + c.abs())
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() == 1 {
            return Poly::new(Vec::from([0.0]));
        }
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * i as f64)
                .collect(),
        )
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = alloc::vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new(
            (0..n)
                .map(|i| {
                    self.coeffs.get(i).copied().unwrap_or(0.0)
                        - other.coeffs.get(i).copied().unwrap_or(0.0)
                })
                .collect(),
        )
    }

    /// Substitute `x = scale·s`, returning the polynomial in `s`.
    pub fn rescaled(&self, scale: f64) -> Poly {
        let mut factor = 1.0;
        Poly::new(
            self.coeffs
                .iter()
                .map(|&c| {
                    let v = c * factor;
                    factor *= scale;
                    v
                })
                .collect(),
        )
    }

    /// All real roots in `[lo, hi]`, ascending.
    pub fn real_roots(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut roots = Vec::new();
        if self.degree() == 0 {
            return roots;
        }
        if self.degree() == 1 {
            let r = -self.coeffs[0] / self.coeffs[1];
            if r >= lo && r <= hi {
                roots.push(r);
            }
            return roots;
        }
        let mut knots = Vec::with_capacity(self.degree() + 1);
        knots.push(lo);
        knots.extend(self.derivative().real_roots(lo, hi));
        knots.push(hi);

        let near_zero = |x: f64| self.eval(x).abs() <= 1e-12 * self.magnitude(x);
        for (k, w) in knots.windows(2).enumerate() {
            let (a, b) = (w[0], w[1]);
            let (fa, fb) = (self.eval(a), self.eval(b));
            if k == 0 && near_zero(a) {
                roots.push(a);
            }
            if (fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0) {
                roots.push(bisect(self, a, b, fa));
            }
            if near_zero(b) {
                roots.push(b);
            }
        }
        roots.sort_by(f64::total_cmp);
        roots.dedup_by(|x, y| (*x - *y).abs() <= 1e-13 * (1.0 + y.abs()));
        roots
    }
}

fn bisect(p: &Poly, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = p.eval(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}
