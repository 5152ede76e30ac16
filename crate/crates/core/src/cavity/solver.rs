//! Root finding for the steady-state equations.
//!
//! Two independent routes produce the root set and must agree:
//!
//! * damped Newton iterations in `(Re α, Im α, Re β, Im β)` from a fixed
//!   16 × 16 × 8 grid of starts;
//! * elimination of β, after which `n = |α|²` solves a univariate quintic and
//!   α follows linearly from `n`. The degenerate circle where that linear
//!   solve is singular is handled in closed form.

use alloc::vec::Vec;
use core::f64::consts::TAU;


use super::{phase, BranchId, CavityParams, DrivePoint, SteadyStateBranch};
use crate::linalg::solve4;
use crate::poly::Poly;
use crate::{Complex64, Error, Result};

/// Certified branches must satisfy the equations to this residual.
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;

/// Roots closer than this in `(Re α, Im α, Re β, Im β)` are the same branch.
pub const DEDUP_DISTANCE: f64 = 1e-6;

const MAGNITUDE_STARTS: usize = 16;
const PHASE_STARTS: usize = 16;
const BETA_PHASE_STARTS: usize = 8;
const NEWTON_MAX_ITERATIONS: usize = 80;

type State = [f64; 4];

struct SteadySystem {
    ka: f64,
    kb: f64,
    eps: f64,
    /// √(2κ_a1)·α_in
    a0: Complex64,
    /// √(2κ_b1)·β_in
    b0: Complex64,
}

impl SteadySystem {
    fn new(params: &CavityParams, drive: &DrivePoint) -> Self {
        SteadySystem {
            ka: params.kappa_a(),
            kb: params.kappa_b(),
            eps: params.epsilon(),
            a0: drive.alpha_in() * (2.0 * params.kappa_a1()).sqrt(),
            b0: drive.beta_in() * (2.0 * params.kappa_b1()).sqrt(),
        }
    }

    fn equations(&self, x: &State) -> State {
        let [ar, ai, br, bi] = *x;
        let e = self.eps;
        [
            self.ka * ar - e * (ar * br + ai * bi) - self.a0.re,
            self.ka * ai - e * (ar * bi - ai * br) - self.a0.im,
            self.kb * br + 0.5 * e * (ar * ar - ai * ai) - self.b0.re,
            self.kb * bi + e * ar * ai - self.b0.im,
        ]
    }

    fn residual(&self, x: &State) -> f64 {
        let f = self.equations(x);
        (f[0].hypot(f[1]) / self.ka).max(f[2].hypot(f[3]) / self.kb)
    }

    fn jacobian(&self, x: &State) -> [[f64; 4]; 4] {
        let [ar, ai, br, bi] = *x;
        let e = self.eps;
        [
            [self.ka - e * br, -e * bi, -e * ar, -e * ai],
            [-e * bi, self.ka + e * br, e * ai, -e * ar],
            [e * ar, -e * ai, self.kb, 0.0],
            [e * ai, e * ar, 0.0, self.kb],
        ]
    }

    fn beta_from_alpha(&self, alpha: Complex64) -> Complex64 {
        (self.b0 - alpha * alpha * (0.5 * self.eps)) / self.kb
    }

    /// Upper bound on |α| over all solutions: with u = κ_aκ_b + ½ε²|α|²,
    /// any root satisfies ½ε²|α|³ < |v||α| + |c|, which fails beyond
    /// max(2√|v|/ε, (4|c|/ε²)^⅓).
    fn alpha_bound(&self) -> f64 {
        let v = self.eps * self.b0.norm();
        let c = self.kb * self.a0.norm();
        let e2 = self.eps * self.eps;
        (2.0 * v.sqrt() / self.eps).max((4.0 * c / e2).cbrt())
    }

    /// Damped Newton from `x`; returns the root if it certifies.
    fn newton(&self, mut x: State) -> Option<State> {
        let mut f = self.equations(&x);
        let mut norm = sq_norm(&f);
        for _ in 0..NEWTON_MAX_ITERATIONS {
            if norm.sqrt() < 1e-15 * (1.0 + self.a0.norm() + self.b0.norm()) {
                break;
            }
            let step = solve4(self.jacobian(&x), [-f[0], -f[1], -f[2], -f[3]])?;
            let mut t = 1.0;
            let mut accepted = false;
            while t > 1e-6 {
                let trial = [x[0] + t * step[0], x[1] + t * step[1], x[2] + t * step[2], x[3] + t * step[3]];
                let ft = self.equations(&trial);
                let nt = sq_norm(&ft);
                if nt < norm || (nt == norm && t == 1.0) {
                    x = trial;
                    f = ft;
                    norm = nt;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        (x.iter().all(|v| v.is_finite()) && self.residual(&x) < RESIDUAL_TOLERANCE).then_some(x)
    }

    fn polish_alpha(&self, alpha: Complex64) -> Option<State> {
        let beta = self.beta_from_alpha(alpha);
        self.newton([alpha.re, alpha.im, beta.re, beta.im])
    }

    fn multistart_roots(&self) -> Vec<State> {
        let radius = 3.0 * self.alpha_bound().max(1.0);
        let mut roots = Vec::new();
        for i in 0..MAGNITUDE_STARTS {
            let rho = radius * i as f64 / (MAGNITUDE_STARTS - 1) as f64;
            for j in 0..PHASE_STARTS {
                let alpha = Complex64::from_polar(rho, TAU * j as f64 / PHASE_STARTS as f64);
                let beta0 = self.beta_from_alpha(alpha);
                for k in 0..BETA_PHASE_STARTS {
                    let beta = beta0 * Complex64::from_polar(1.0, TAU * k as f64 / BETA_PHASE_STARTS as f64);
                    if let Some(root) = self.newton([alpha.re, alpha.im, beta.re, beta.im]) {
                        insert_unique(&mut roots, root);
                    }
                }
                if rho == 0.0 {
                    // Every phase of a zero magnitude is the same start.
                    break;
                }
            }
        }
        roots
    }

    fn eliminated_roots(&self) -> Vec<State> {
        // α·u − v·α* = c with u = κ_aκ_b + ½ε²n, v = ε·b0, c = κ_b·a0, n = |α|².
        let c = self.a0 * self.kb;
        let v = self.b0 * self.eps;
        let u0 = self.ka * self.kb;
        let u1 = 0.5 * self.eps * self.eps;
        let (c2, v2) = (c.norm_sqr(), v.norm_sqr());
        let cross = (v * c.conj() * c.conj()).re;

        // q(n) = u² − |v|²
        let q = Poly::new(alloc::vec![u0 * u0 - v2, 2.0 * u0 * u1, u1 * u1]);
        // |u·c + v·c*|² = (u² + |v|²)|c|² + 2u·Re(v c*²)
        let rhs = Poly::new(alloc::vec![
            c2 * (u0 * u0 + v2) + 2.0 * u0 * cross,
            c2 * 2.0 * u0 * u1 + 2.0 * u1 * cross,
            c2 * u1 * u1,
        ]);
        let p = Poly::new(alloc::vec![0.0, 1.0]).mul(&q.mul(&q)).sub(&rhs);

        let bound = self.alpha_bound();
        let n_max = (bound * bound).max(1e-300) * 1.05;
        let mut roots = Vec::new();
        for s in p.rescaled(n_max).real_roots(0.0, 1.0) {
            let n = s * n_max;
            let u = u0 + u1 * n;
            let den = u * u - v2;
            if den == 0.0 {
                continue;
            }
            let alpha = (c * u + v * c.conj()) / den;
            if let Some(root) = self.polish_alpha(alpha) {
                insert_unique(&mut roots, root);
            }
        }

        // Degenerate circle u = |v|: with α = e^{iφ/2}·z and φ = arg v the
        // equation reads 2i|v|·Im z = c·e^{−iφ/2}, so Im z is fixed and
        // Re z = ±√(n₀ − (Im z)²).
        let vn = v2.sqrt();
        if vn > 0.0 && vn >= u0 {
            let n0 = (vn - u0) / u1;
            let half = Complex64::from_polar(1.0, 0.5 * v.arg());
            let c_rot = c * half.conj();
            if c_rot.re.abs() <= 1e-9 * (1.0 + c.norm()) {
                let im_z = c_rot.im / (2.0 * vn);
                let rest = n0 - im_z * im_z;
                if rest >= 0.0 {
                    let re_z = rest.sqrt();
                    for sign in [1.0, -1.0] {
                        let alpha = half * Complex64::new(sign * re_z, im_z);
                        if let Some(root) = self.polish_alpha(alpha) {
                            insert_unique(&mut roots, root);
                        }
                    }
                }
            }
        }
        roots
    }
}

fn sq_norm(f: &State) -> f64 {
    f.iter().map(|v| v * v).sum()
}

fn distance(a: &State, b: &State) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn insert_unique(roots: &mut Vec<State>, root: State) {
    if roots.iter().all(|r| distance(r, &root) > DEDUP_DISTANCE) {
        roots.push(root);
    }
}

/// Each root of `a` has a partner in `b`. Near folds two routes can resolve a
/// nearly double root as one or two points, so the match is looser than the
/// dedup distance.
fn covered_by(a: &[State], b: &[State]) -> bool {
    a.iter().all(|x| {
        let scale = 1.0 + x.iter().map(|v| v.abs()).fold(0.0, f64::max);
        b.iter().any(|y| distance(x, y) <= 1e-4 * scale)
    })
}

/// All steady states for `drive`, sorted by |α| and then by arg α.
pub fn steady_states(params: &CavityParams, drive: &DrivePoint) -> Result<Vec<SteadyStateBranch>> {
    let system = SteadySystem::new(params, drive);
    let fail = |reason| Error::NonConvergence { alpha_d: drive.alpha_d(), beta_d: drive.beta_d(), reason };

    let found = if params.is_linear() {
        // With ε = 0 the modes decouple and the unique root is explicit.
        let alpha = system.a0 / system.ka;
        system.polish_alpha(alpha).into_iter().collect()
    } else {
        system.multistart_roots()
    };
    if !params.is_linear() {
        let eliminated = system.eliminated_roots();
        if !covered_by(&found, &eliminated) {
            return Err(fail("multi-start root not reproduced by elimination"));
        }
        if !covered_by(&eliminated, &found) {
            return Err(fail("elimination root missed by multi-start"));
        }
    }
    if found.is_empty() {
        return Err(fail("no root certified"));
    }

    let mut amplitudes: Vec<(Complex64, Complex64)> = found
        .iter()
        .map(|x| (Complex64::new(x[0], x[1]), Complex64::new(x[2], x[3])))
        .collect();
    amplitudes.sort_by(|(a, _), (b, _)| {
        let key = |z: &Complex64| (z.norm() * 1e8).round();
        key(a).total_cmp(&key(b)).then(phase(*a).total_cmp(&phase(*b)))
    });
    Ok(amplitudes
        .into_iter()
        .enumerate()
        .map(|(i, (alpha, beta))| SteadyStateBranch::from_amplitudes(params, drive, BranchId(i as u8), alpha, beta))
        .collect())
}
