//! Local rotation-and-squeeze operations on the two output modes.

use nalgebra::{Matrix2, Matrix4};

use crate::linalg::{block_diag, rotation};
use crate::CorrelationMatrix;

/// `R(theta_out)·diag(eʳ, e⁻ʳ)·R(theta_in)` acting on one mode's `(X⁺, X⁻)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ModeOperation {
    pub theta_in: f64,
    pub r: f64,
    pub theta_out: f64,
}

impl ModeOperation {
    pub fn matrix(&self) -> Matrix2<f64> {
        let squeeze = Matrix2::new(self.r.exp(), 0.0, 0.0, (-self.r).exp());
        rotation(self.theta_out) * squeeze * rotation(self.theta_in)
    }
}

/// A product `S_A ⊕ S_B` of single-mode symplectic maps.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LocalSymplectic {
    pub mode_a: ModeOperation,
    pub mode_b: ModeOperation,
}

impl LocalSymplectic {
    pub fn identity() -> Self {
        LocalSymplectic::default()
    }

    /// From `[θin_A, r_A, θout_A, θin_B, r_B, θout_B]`.
    pub fn from_params(p: &[f64; 6]) -> Self {
        LocalSymplectic {
            mode_a: ModeOperation { theta_in: p[0], r: p[1], theta_out: p[2] },
            mode_b: ModeOperation { theta_in: p[3], r: p[4], theta_out: p[5] },
        }
    }

    pub fn params(&self) -> [f64; 6] {
        let (a, b) = (self.mode_a, self.mode_b);
        [a.theta_in, a.r, a.theta_out, b.theta_in, b.r, b.theta_out]
    }

    pub fn matrix(&self) -> Matrix4<f64> {
        block_diag(&self.mode_a.matrix(), &self.mode_b.matrix())
    }
}

/// `S·C·Sᵀ`.
pub fn apply_local_symplectic(c: &CorrelationMatrix, s: &LocalSymplectic) -> CorrelationMatrix {
    let m = s.matrix();
    CorrelationMatrix { matrix: m * c.matrix * m.transpose(), ..*c }
}
