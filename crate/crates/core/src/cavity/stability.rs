use core::fmt;

use nalgebra::Matrix4;

use super::{CavityParams, SteadyStateBranch};
use crate::Complex64;

/// Eigenvalues whose real part lies within this distance of zero are marginal.
pub const MARGINAL_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StabilityClass {
    Stable,
    /// A real eigenvalue of the drift matrix is negative.
    UnstableSaddle,
    /// A complex-conjugate pair has negative real part (Hopf-type).
    SelfPulsing,
}

impl StabilityClass {
    pub fn as_str(self) -> &'static str {
        match self {
            StabilityClass::Stable => "stable",
            StabilityClass::UnstableSaddle => "saddle",
            StabilityClass::SelfPulsing => "self_pulsing",
        }
    }
}

impl fmt::Display for StabilityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stability {
    pub class: StabilityClass,
    /// The least-damped eigenvalue sits within [`MARGINAL_TOLERANCE`] of the
    /// imaginary axis; `class` then reflects only which side it fell on.
    pub marginal: bool,
    /// Smallest real part over the drift-matrix spectrum.
    pub min_real_part: f64,
}

impl Stability {
    pub fn is_stable(&self) -> bool {
        self.class == StabilityClass::Stable && !self.marginal
    }

    /// Label used in sweep output.
    pub fn label(&self) -> &'static str {
        if self.marginal {
            "marginal"
        } else {
            self.class.as_str()
        }
    }
}

/// Which stable-branch structure a drive point has.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    MonoStable,
    BiStablePair,
    /// Stable solutions with a complex fundamental amplitude.
    OutOfPhase,
    /// No stable steady state (self-pulsation or only unstable branches).
    NoStable,
}

impl Regime {
    pub fn of(branches: &[SteadyStateBranch]) -> Regime {
        let stable: alloc::vec::Vec<_> = branches.iter().filter(|b| b.is_stable()).collect();
        match stable.len() {
            0 => Regime::NoStable,
            _ if stable.iter().any(|b| b.is_out_of_phase()) => Regime::OutOfPhase,
            1 => Regime::MonoStable,
            _ => Regime::BiStablePair,
        }
    }
}

/// Drift matrix `M(0)` of the quadrature fluctuations, ordered
/// `(X⁺_a, X⁻_a, X⁺_b, X⁻_b)`; the fluctuations obey `ẋ = −M(0)·x + inputs`.
///
/// It is also the Jacobian of the steady-state equations in
/// `(Re α, Im α, Re β, Im β)`.
pub fn drift_matrix(params: &CavityParams, branch: &SteadyStateBranch) -> Matrix4<f64> {
    drift_matrix_at(params, branch.alpha, branch.beta)
}

pub fn drift_matrix_at(params: &CavityParams, alpha: Complex64, beta: Complex64) -> Matrix4<f64> {
    let eps = params.epsilon();
    let (ka, kb) = (params.kappa_a(), params.kappa_b());
    let a = ka - eps * beta.re;
    let a_prime = ka + eps * beta.re;
    let b = -eps * beta.im;
    let c = -eps * alpha.re;
    let d = -eps * alpha.im;
    Matrix4::new(
        a, b, c, d, //
        b, a_prime, -d, c, //
        -c, d, kb, 0.0, //
        -d, -c, 0.0, kb,
    )
}

pub fn classify_stability(drift: &Matrix4<f64>) -> Stability {
    let eigenvalues = drift.complex_eigenvalues();
    let least = eigenvalues
        .iter()
        .copied()
        .min_by(|x, y| x.re.total_cmp(&y.re))
        .unwrap_or_default();
    let scale = 1.0 + least.norm();
    let complex_pair = least.im.abs() > 1e-12 * scale;
    let marginal = least.re.abs() <= MARGINAL_TOLERANCE;
    let class = if least.re > MARGINAL_TOLERANCE {
        StabilityClass::Stable
    } else if complex_pair {
        StabilityClass::SelfPulsing
    } else {
        StabilityClass::UnstableSaddle
    };
    Stability { class, marginal, min_real_part: least.re }
}
