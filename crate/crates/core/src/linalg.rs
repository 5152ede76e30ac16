//! Small fixed-size helpers shared by the solver and noise modules.

use nalgebra::{Matrix2, Matrix4};

use crate::Complex64;

/// Solve `a·x = b` for a 4×4 real system by Gaussian elimination with
/// partial pivoting. Returns `None` when a pivot vanishes.
pub fn solve4(mut a: [[f64; 4]; 4], mut b: [f64; 4]) -> Option<[f64; 4]> {
    for col in 0..4 {
        let pivot = (col..4)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap_or(col);
        if a[pivot][col] == 0.0 || !a[pivot][col].is_finite() {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..4 {
            let factor = a[row][col] / a[col][col];
            for k in col..4 {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = [0.0; 4];
    for row in (0..4).rev() {
        let mut acc = b[row];
        for k in row + 1..4 {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// The two-mode symplectic form `Ω = J ⊕ J`, `J = [[0, 1], [-1, 0]]`, in the
/// quadrature ordering `(X⁺_A, X⁻_A, X⁺_B, X⁻_B)`.
pub fn symplectic_form() -> Matrix4<f64> {
    Matrix4::new(
        0.0, 1.0, 0.0, 0.0, //
        -1.0, 0.0, 0.0, 0.0, //
        0.0, 0.0, 0.0, 1.0, //
        0.0, 0.0, -1.0, 0.0,
    )
}

/// Maximum absolute column sum.
pub fn norm1(m: &Matrix4<Complex64>) -> f64 {
    (0..4)
        .map(|j| (0..4).map(|i| m[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn rotation(theta: f64) -> Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(c, -s, s, c)
}

/// Block-diagonal embedding `a ⊕ b`.
pub fn block_diag(a: &Matrix2<f64>, b: &Matrix2<f64>) -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(a);
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(b);
    m
}

/// Symmetric eigen-decomposition of a real symmetric 2×2 matrix
/// `[[a, b], [b, d]]`: returns `(λ₁, λ₂, φ)` with
/// `M = R(φ)·diag(λ₁, λ₂)·R(φ)ᵀ`.
pub fn sym2_eigen(a: f64, b: f64, d: f64) -> (f64, f64, f64) {
    let phi = 0.5 * (2.0 * b).atan2(a - d);
    let mean = 0.5 * (a + d);
    let radius = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    (mean + radius, mean - radius, phi)
}

/// Singular value decomposition of a real 2×2 matrix using proper rotations
/// only: returns `(φ, σ₁, σ₂, θ)` with `M = R(φ)·diag(σ₁, σ₂)·R(θ)`, where
/// `σ₁ ≥ |σ₂|` and `σ₂` carries the sign of `det M`.
pub fn svd2_proper(m: &Matrix2<f64>) -> (f64, f64, f64, f64) {
    let e = 0.5 * (m[(0, 0)] + m[(1, 1)]);
    let f = 0.5 * (m[(0, 0)] - m[(1, 1)]);
    let g = 0.5 * (m[(1, 0)] + m[(0, 1)]);
    let h = 0.5 * (m[(1, 0)] - m[(0, 1)]);
    let q = (e * e + h * h).sqrt();
    let r = (f * f + g * g).sqrt();
    let a1 = g.atan2(f);
    let a2 = h.atan2(e);
    let theta = 0.5 * (a2 - a1);
    let phi = 0.5 * (a2 + a1);
    (phi, q + r, q - r, theta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve4_matches_nalgebra() {
        let a = [
            [4.0, 1.0, -2.0, 0.5],
            [1.0, 3.0, 0.0, 1.0],
            [0.0, 2.0, 5.0, -1.0],
            [1.0, 0.0, 1.0, 2.0],
        ];
        let b = [1.0, -2.0, 0.5, 3.0];
        let x = solve4(a, b).unwrap();
        let m = Matrix4::from_fn(|i, j| a[i][j]);
        let y = m.lu().solve(&nalgebra::Vector4::from(b)).unwrap();
        for i in 0..4 {
            assert!((x[i] - y[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn solve4_rejects_singular() {
        let a = [[1.0, 2.0, 0.0, 0.0], [2.0, 4.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]];
        assert!(solve4(a, [1.0; 4]).is_none());
    }

    #[test]
    fn svd2_reconstructs() {
        for m in [
            Matrix2::new(0.3, -1.2, 0.7, 2.0),
            Matrix2::new(-1.0, 0.0, 0.0, 3.0),
            Matrix2::new(0.0, 1.0, 1.0, 0.0),
        ] {
            let (phi, s1, s2, theta) = svd2_proper(&m);
            let back = rotation(phi) * Matrix2::new(s1, 0.0, 0.0, s2) * rotation(theta);
            assert!((back - m).abs().max() < 1e-14, "{m} vs {back}");
            assert!(s1 >= s2.abs() - 1e-15);
        }
    }

    #[test]
    fn sym2_eigen_reconstructs() {
        let (l1, l2, phi) = sym2_eigen(2.0, 0.4, 0.5);
        let r = rotation(phi);
        let back = r * Matrix2::new(l1, 0.0, 0.0, l2) * r.transpose();
        assert!((back - Matrix2::new(2.0, 0.4, 0.4, 0.5)).abs().max() < 1e-14);
    }
}
