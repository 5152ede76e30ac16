//! Linearised quadrature noise of the output fields.
//!
//! In the frequency domain the intracavity quadratures satisfy
//! `M(ω)·x = L1·x_in1 + L2·x_in2`, and the coupler-port outputs are
//! `x_out = L1·x − x_in1`, with `L1`, `L2` the diagonal coupling matrices of
//! the coupler and loss ports. All input ports carry vacuum.

use nalgebra::{Matrix4, Vector4};

use crate::cavity::{BranchId, CavityParams, StabilityClass, SteadyStateBranch};
use crate::linalg::{norm1, symplectic_form};
use crate::{Complex64, Error, Result};

/// Inversions with a 1-norm condition estimate above this are refused.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Frequency-domain system matrix, laid out as
///
/// ```text
/// [  A   B   C   D ]
/// [  B   A′ −D   C ]
/// [ −C   D   E   0 ]
/// [ −D  −C   0   E ]
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct SystemMatrix {
    pub omega: f64,
    pub a: Complex64,
    pub a_prime: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
    pub e: Complex64,
    pub matrix: Matrix4<Complex64>,
}

pub fn system_matrix(params: &CavityParams, branch: &SteadyStateBranch, omega: f64) -> SystemMatrix {
    let eps = params.epsilon();
    let (alpha_abs, theta_alpha) = (branch.alpha.norm(), branch.theta_alpha());
    let (beta_abs, theta_beta) = (branch.beta.norm(), branch.theta_beta());
    let shift = Complex64::new(0.0, -omega);

    let a = Complex64::from(params.kappa_a() - eps * beta_abs * theta_beta.cos()) + shift;
    let a_prime = Complex64::from(params.kappa_a() + eps * beta_abs * theta_beta.cos()) + shift;
    let b = Complex64::from(-eps * beta_abs * theta_beta.sin());
    let c = Complex64::from(-eps * alpha_abs * theta_alpha.cos());
    let d = Complex64::from(-eps * alpha_abs * theta_alpha.sin());
    let e = Complex64::from(params.kappa_b()) + shift;
    let zero = Complex64::from(0.0);
    let matrix = Matrix4::new(
        a, b, c, d, //
        b, a_prime, -d, c, //
        -c, d, e, zero, //
        -d, -c, zero, e,
    );
    SystemMatrix { omega, a, a_prime, b, c, d, e, matrix }
}

/// Linear maps from the coupler-port (`t1`) and loss-port (`t2`) input
/// quadratures to the coupler-port output quadratures.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputTransfer {
    pub omega: f64,
    pub t1: Matrix4<Complex64>,
    pub t2: Matrix4<Complex64>,
}

fn coupling_diagonal(rate_a: f64, rate_b: f64) -> Matrix4<Complex64> {
    let (sa, sb) = ((2.0 * rate_a).sqrt(), (2.0 * rate_b).sqrt());
    Matrix4::from_diagonal(&Vector4::new(sa, sa, sb, sb).map(Complex64::from))
}

pub fn output_transfer(params: &CavityParams, branch: &SteadyStateBranch, omega: f64) -> Result<OutputTransfer> {
    let m = system_matrix(params, branch, omega).matrix;
    let singular = |condition| Error::SingularSystem { omega, branch: branch.id, condition };
    let inverse = m.lu().try_inverse().ok_or_else(|| singular(f64::INFINITY))?;
    let condition = norm1(&m) * norm1(&inverse);
    if !(condition.is_finite() && condition < CONDITION_LIMIT) {
        return Err(singular(condition));
    }
    let l1 = coupling_diagonal(params.kappa_a1(), params.kappa_b1());
    let l2 = coupling_diagonal(params.kappa_a2(), params.kappa_b2());
    let t1 = l1 * inverse * l1 - Matrix4::identity();
    let t2 = l1 * inverse * l2;
    Ok(OutputTransfer { omega, t1, t2 })
}

/// Symmetrised second moments of the coupler-port output quadratures
/// `(X⁺_A, X⁻_A, X⁺_B, X⁻_B)`; vacuum has unit variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationMatrix {
    pub matrix: Matrix4<f64>,
    pub omega: f64,
    pub branch: Option<BranchId>,
}

impl CorrelationMatrix {
    /// Symmetrises `matrix` on construction.
    pub fn new(matrix: Matrix4<f64>) -> Self {
        CorrelationMatrix { matrix: 0.5 * (matrix + matrix.transpose()), omega: 0.0, branch: None }
    }

    pub fn vacuum() -> Self {
        CorrelationMatrix::new(Matrix4::identity())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }

    /// Symplectic eigenvalues `ν₋ ≤ ν₊`, from the invariants
    /// `Δ = det A + det B + 2 det K` and `det C`.
    pub fn symplectic_eigenvalues(&self) -> [f64; 2] {
        let m = &self.matrix;
        let det_a = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        let det_b = m[(2, 2)] * m[(3, 3)] - m[(2, 3)] * m[(3, 2)];
        let det_k = m[(0, 2)] * m[(1, 3)] - m[(0, 3)] * m[(1, 2)];
        let delta = det_a + det_b + 2.0 * det_k;
        let det = m.determinant();
        let disc = (delta * delta - 4.0 * det).max(0.0).sqrt();
        let hi = (0.5 * (delta + disc)).max(0.0);
        let lo = if hi > 0.0 { det.max(0.0) / hi } else { 0.0 };
        [lo.sqrt(), hi.sqrt()]
    }

    /// Symplectic eigenvalues computed as the moduli of the spectrum of `Ω·C`.
    /// Slower than [`Self::symplectic_eigenvalues`]; used as its cross-check.
    pub fn symplectic_eigenvalues_by_spectrum(&self) -> [f64; 2] {
        let spectrum = (symplectic_form() * self.matrix).complex_eigenvalues();
        let mut moduli = [0.0; 4];
        for (m, z) in moduli.iter_mut().zip(spectrum.iter()) {
            *m = z.im.abs();
        }
        moduli.sort_by(f64::total_cmp);
        [0.5 * (moduli[0] + moduli[1]), 0.5 * (moduli[2] + moduli[3])]
    }

    /// Heisenberg bound: smallest symplectic eigenvalue at least `1 − 1e-9`.
    pub fn is_physical(&self) -> bool {
        self.symplectic_eigenvalues()[0] >= 1.0 - 1e-9
    }
}

/// Output correlation matrix `Re[T1·T1ᴴ + T2·T2ᴴ]` on a stable branch.
pub fn output_correlation(params: &CavityParams, branch: &SteadyStateBranch, omega: f64) -> Result<CorrelationMatrix> {
    if !branch.is_stable() {
        let stability = if branch.stability.class == StabilityClass::Stable {
            // Marginal on the stable side.
            StabilityClass::UnstableSaddle
        } else {
            branch.stability.class
        };
        return Err(Error::UnstableBranch { branch: branch.id, stability });
    }
    let transfer = output_transfer(params, branch, omega)?;
    let spectrum = transfer.t1 * transfer.t1.adjoint() + transfer.t2 * transfer.t2.adjoint();
    let mut c = CorrelationMatrix::new(spectrum.map(|z| z.re));
    c.omega = omega;
    c.branch = Some(branch.id);
    Ok(c)
}
