//! Classical steady states of the two-mode cavity and their stability.
//!
//! The intracavity amplitudes obey
//!
//! ```text
//! α̇ = −κ_a α + ε α* β + √(2κ_a1) α_in
//! β̇ = −κ_b β − ½ ε α² + √(2κ_b1) β_in
//! ```
//!
//! and drives are normalised to the SHG self-pulsation amplitude and the OPO
//! threshold amplitude.

mod solver;
mod stability;

use core::fmt;


use crate::{Complex64, Error, Result};

pub use solver::steady_states;
pub use stability::{classify_stability, drift_matrix, drift_matrix_at, Regime, Stability, StabilityClass};

/// Decay rates and nonlinear coupling of the cavity.
///
/// Subscript `1` is the input/output coupler, `2` the loss port.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityParams {
    kappa_a1: f64,
    kappa_a2: f64,
    kappa_b1: f64,
    kappa_b2: f64,
    epsilon: f64,
}

impl CavityParams {
    pub fn new(kappa_a1: f64, kappa_a2: f64, kappa_b1: f64, kappa_b2: f64, epsilon: f64) -> Result<Self> {
        for (name, value) in [
            ("kappa_a1", kappa_a1),
            ("kappa_a2", kappa_a2),
            ("kappa_b1", kappa_b1),
            ("kappa_b2", kappa_b2),
            ("epsilon", epsilon),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParams { name, value });
            }
        }
        Ok(CavityParams { kappa_a1, kappa_a2, kappa_b1, kappa_b2, epsilon })
    }

    /// The same cavity with no nonlinear coupling. Only meaningful as a
    /// reference system: the vacuum-in/vacuum-out limit.
    pub fn linear(kappa_a1: f64, kappa_a2: f64, kappa_b1: f64, kappa_b2: f64) -> Result<Self> {
        let mut p = CavityParams::new(kappa_a1, kappa_a2, kappa_b1, kappa_b2, 1.0)?;
        p.epsilon = 0.0;
        Ok(p)
    }

    pub fn kappa_a1(&self) -> f64 {
        self.kappa_a1
    }
    pub fn kappa_a2(&self) -> f64 {
        self.kappa_a2
    }
    pub fn kappa_b1(&self) -> f64 {
        self.kappa_b1
    }
    pub fn kappa_b2(&self) -> f64 {
        self.kappa_b2
    }
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Total fundamental decay rate `κ_a1 + κ_a2`.
    pub fn kappa_a(&self) -> f64 {
        self.kappa_a1 + self.kappa_a2
    }

    /// Total harmonic decay rate `κ_b1 + κ_b2`.
    pub fn kappa_b(&self) -> f64 {
        self.kappa_b1 + self.kappa_b2
    }

    pub fn is_linear(&self) -> bool {
        self.epsilon == 0.0
    }
}

impl Default for CavityParams {
    /// κ_a1 = 1, κ_a2 = 0.01, κ_b1 = 10, κ_b2 = 0.1, ε = 1.
    fn default() -> Self {
        CavityParams { kappa_a1: 1.0, kappa_a2: 0.01, kappa_b1: 10.0, kappa_b2: 0.1, epsilon: 1.0 }
    }
}

/// Drive amplitudes at which the SHG steady state starts to self-pulse
/// (`alpha_c`) and at which the OPO reaches threshold (`beta_c`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalAmplitudes {
    pub alpha_c: f64,
    pub beta_c: f64,
}

pub fn critical_amplitudes(params: &CavityParams) -> CriticalAmplitudes {
    let (ka, kb, eps) = (params.kappa_a(), params.kappa_b(), params.epsilon);
    let alpha_c = (2.0 * ka + kb) * (2.0 * kb * (ka + kb)).sqrt() / (eps * (2.0 * params.kappa_a1).sqrt());
    let beta_c = ka * kb / (eps * (2.0 * params.kappa_b1).sqrt());
    CriticalAmplitudes { alpha_c, beta_c }
}

/// A drive point in both raw and critical-amplitude-normalised form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrivePoint {
    alpha_in: Complex64,
    beta_in: Complex64,
    critical: CriticalAmplitudes,
}

/// Real signed drives; the sign carries the 0/π phase.
pub fn make_drive(params: &CavityParams, alpha_d: f64, beta_d: f64) -> DrivePoint {
    let critical = critical_amplitudes(params);
    DrivePoint {
        alpha_in: Complex64::new(alpha_d * critical.alpha_c, 0.0),
        beta_in: Complex64::new(beta_d * critical.beta_c, 0.0),
        critical,
    }
}

impl DrivePoint {
    /// Drive with arbitrary complex raw amplitudes.
    pub fn from_raw(params: &CavityParams, alpha_in: Complex64, beta_in: Complex64) -> Self {
        DrivePoint { alpha_in, beta_in, critical: critical_amplitudes(params) }
    }

    pub fn alpha_in(&self) -> Complex64 {
        self.alpha_in
    }
    pub fn beta_in(&self) -> Complex64 {
        self.beta_in
    }

    /// Normalised fundamental drive; the real part for complex drives.
    pub fn alpha_d(&self) -> f64 {
        self.alpha_in.re / self.critical.alpha_c
    }

    pub fn beta_d(&self) -> f64 {
        self.beta_in.re / self.critical.beta_c
    }

    pub fn critical(&self) -> CriticalAmplitudes {
        self.critical
    }

    /// True when both drive phases are 0 or π.
    pub fn is_real(&self) -> bool {
        self.alpha_in.im == 0.0 && self.beta_in.im == 0.0
    }

    /// The mirrored drive `(−α_d, β_d)`.
    pub fn mirrored(&self) -> Self {
        DrivePoint { alpha_in: -self.alpha_in, ..*self }
    }
}

/// Position of a branch in the sorted branch list of its drive point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BranchId(pub u8);

impl fmt::Display for BranchId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "b{}", self.0)
    }
}

/// One classical steady state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStateBranch {
    pub id: BranchId,
    pub alpha: Complex64,
    pub beta: Complex64,
    pub stability: Stability,
    /// Max-norm of the steady-state equation mismatch, each equation divided
    /// by its mode's total decay rate.
    pub residual: f64,
}

impl SteadyStateBranch {
    /// Build a branch from given amplitudes, computing its residual against
    /// `drive` and its stability.
    pub fn from_amplitudes(
        params: &CavityParams,
        drive: &DrivePoint,
        id: BranchId,
        alpha: Complex64,
        beta: Complex64,
    ) -> Self {
        let residual = steady_state_residual(params, drive, alpha, beta);
        let stability = classify_stability(&drift_matrix_at(params, alpha, beta));
        SteadyStateBranch { id, alpha, beta, stability, residual }
    }

    pub fn theta_alpha(&self) -> f64 {
        phase(self.alpha)
    }

    pub fn theta_beta(&self) -> f64 {
        phase(self.beta)
    }

    pub fn is_stable(&self) -> bool {
        self.stability.is_stable()
    }

    /// Complex fundamental amplitude (the "out-of-phase" solutions).
    pub fn is_out_of_phase(&self) -> bool {
        self.alpha.im.abs() > 1e-9 * (1.0 + self.alpha.norm())
    }
}

/// Argument in `(−π, π]`; zero for a zero amplitude.
pub(crate) fn phase(z: Complex64) -> f64 {
    if z.re == 0.0 && z.im == 0.0 {
        return 0.0;
    }
    let im = if z.im == 0.0 { 0.0 } else { z.im };
    let t = im.atan2(z.re);
    if t <= -core::f64::consts::PI {
        core::f64::consts::PI
    } else {
        t
    }
}

pub fn steady_state_residual(params: &CavityParams, drive: &DrivePoint, alpha: Complex64, beta: Complex64) -> f64 {
    let a0 = drive.alpha_in * (2.0 * params.kappa_a1).sqrt();
    let b0 = drive.beta_in * (2.0 * params.kappa_b1).sqrt();
    let eps = params.epsilon;
    let ra = alpha * params.kappa_a() - alpha.conj() * beta * eps - a0;
    let rb = beta * params.kappa_b() + alpha * alpha * (0.5 * eps) - b0;
    (ra.norm() / params.kappa_a()).max(rb.norm() / params.kappa_b())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_positive_or_non_finite() {
        assert!(matches!(
            CavityParams::new(0.0, 0.01, 10.0, 0.1, 1.0),
            Err(Error::InvalidParams { name: "kappa_a1", .. })
        ));
        assert!(CavityParams::new(1.0, -0.01, 10.0, 0.1, 1.0).is_err());
        assert!(CavityParams::new(1.0, 0.01, f64::NAN, 0.1, 1.0).is_err());
        assert!(CavityParams::new(1.0, 0.01, 10.0, 0.1, f64::INFINITY).is_err());
    }

    #[test]
    fn totals_are_sums() {
        let p = CavityParams::new(0.7, 0.2, 3.0, 0.4, 2.0).unwrap();
        assert_eq!(p.kappa_a(), 0.7 + 0.2);
        assert_eq!(p.kappa_b(), 3.0 + 0.4);
    }

    #[test]
    fn critical_amplitudes_reference_values() {
        let c = critical_amplitudes(&CavityParams::default());
        // (2κa+κb)·√(2κb(κa+κb))/(ε√(2κa1)) = 12.12·√224.422/√2
        assert!((c.alpha_c - 128.386_788_722_204_6).abs() < 1e-9);
        // κaκb/(ε√(2κb1)) = 10.201/√20
        assert!((c.beta_c - 2.281_012_943_847_535).abs() < 1e-12);
    }

    #[test]
    fn doubling_coupling_halves_critical_amplitudes() {
        let p = CavityParams::default();
        let q = CavityParams::new(1.0, 0.01, 10.0, 0.1, 2.0).unwrap();
        let (a, b) = (critical_amplitudes(&p), critical_amplitudes(&q));
        assert_eq!(b.alpha_c, 0.5 * a.alpha_c);
        assert_eq!(b.beta_c, 0.5 * a.beta_c);
    }

    #[test]
    fn drive_normalisation_round_trip() {
        let p = CavityParams::default();
        let d = make_drive(&p, 0.0, 0.0);
        assert_eq!(d.alpha_in(), Complex64::new(0.0, 0.0));
        assert_eq!(d.beta_in(), Complex64::new(0.0, 0.0));

        let d = make_drive(&p, 1.0, 0.0);
        assert!((d.alpha_in().re - 128.386_788_722_204_6).abs() < 1e-9);

        let d = make_drive(&p, -0.1, 0.0);
        assert!((d.alpha_in().re + 12.838_678_872_220_46).abs() < 1e-10);
        assert!((phase(d.alpha_in()) - core::f64::consts::PI).abs() < 1e-15);
        assert!((d.alpha_d() + 0.1).abs() < 1e-15);
        assert!(d.is_real());
    }

    #[test]
    fn phase_is_in_half_open_interval() {
        assert_eq!(phase(Complex64::new(-1.0, -0.0)), core::f64::consts::PI);
        assert_eq!(phase(Complex64::new(0.0, 0.0)), 0.0);
        assert!((phase(Complex64::new(0.0, -2.0)) + core::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }
}
