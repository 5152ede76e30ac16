//! EPR and inseparability measures of two-mode Gaussian correlation matrices.
//!
//! Conventions: vacuum variance is 1, both measures are entangled below 1,
//! and decibel values are `−10·log₁₀(x)` so that stronger entanglement is a
//! larger positive number.

use nalgebra::{Matrix2, Matrix4};

use crate::cavity::{BranchId, CavityParams, DrivePoint, SteadyStateBranch};
use crate::linalg::{block_diag, rotation, svd2_proper, sym2_eigen};
use crate::nelder_mead::{minimize, NelderMeadOptions};
use crate::quadrature::output_correlation;
use crate::symplectic::LocalSymplectic;
use crate::{CorrelationMatrix, Error, Result};

/// Variances within this of the vacuum level count as vacuum.
pub const DEGENERACY_TOLERANCE: f64 = 1e-9;

pub const OPTIMIZER_STARTS: usize = 32;
pub const MAX_SQUEEZE: f64 = 5.0;

pub fn to_db(x: f64) -> f64 {
    // `+ 0.0` turns the −0 of an exact vacuum into 0.
    -10.0 * x.log10() + 0.0
}

pub fn from_db(db: f64) -> f64 {
    10f64.powf(-db / 10.0)
}

/// Product of the conditional variances of mode A given mode B,
/// `(C⁺⁺_aa − (C⁺⁺_ab)²/C⁺⁺_bb)·(C⁻⁻_aa − (C⁻⁻_ab)²/C⁻⁻_bb)`.
pub fn epr(c: &CorrelationMatrix) -> Result<f64> {
    let m = &c.matrix;
    for variance in [m[(2, 2)], m[(3, 3)]] {
        if variance <= 1e-12 {
            return Err(Error::DegenerateConditioner { variance });
        }
    }
    Ok(conditional_product(m))
}

fn conditional_product(m: &Matrix4<f64>) -> f64 {
    (m[(0, 0)] - m[(0, 2)] * m[(0, 2)] / m[(2, 2)]) * (m[(1, 1)] - m[(1, 3)] * m[(1, 3)] / m[(3, 3)])
}

/// The smaller of the two conditioning directions (A given B, B given A).
/// Diagnostic only; [`epr`] is the measure.
pub fn epr_either_direction(c: &CorrelationMatrix) -> Result<f64> {
    let a_given_b = epr(c)?;
    let swap = nalgebra::Matrix4::new(
        0.0, 0.0, 1.0, 0.0, //
        0.0, 0.0, 0.0, 1.0, //
        1.0, 0.0, 0.0, 0.0, //
        0.0, 1.0, 0.0, 0.0,
    );
    let swapped = CorrelationMatrix { matrix: swap * c.matrix * swap, ..*c };
    Ok(a_given_b.min(epr(&swapped)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EprOptimum {
    pub value: f64,
    pub witness: LocalSymplectic,
    /// `S·C·Sᵀ` for the witness `S`.
    pub transformed: CorrelationMatrix,
    pub starts: usize,
    /// Starts whose final value lies within 1e-6 (relative) of the best.
    pub agreeing: usize,
    /// Spread of the best three start values, relative to the best.
    pub top3_spread: f64,
}

struct Blocks {
    a: Matrix2<f64>,
    b: Matrix2<f64>,
    k: Matrix2<f64>,
}

impl Blocks {
    fn of(m: &Matrix4<f64>) -> Self {
        Blocks {
            a: m.fixed_view::<2, 2>(0, 0).into_owned(),
            b: m.fixed_view::<2, 2>(2, 2).into_owned(),
            k: m.fixed_view::<2, 2>(0, 2).into_owned(),
        }
    }

    fn epr_after(&self, s: &LocalSymplectic) -> f64 {
        let sa = s.mode_a.matrix();
        let sb = s.mode_b.matrix();
        let a = sa * self.a * sa.transpose();
        let b = sb * self.b * sb.transpose();
        let k = sa * self.k * sb.transpose();
        (a[(0, 0)] - k[(0, 0)] * k[(0, 0)] / b[(0, 0)]) * (a[(1, 1)] - k[(1, 1)] * k[(1, 1)] / b[(1, 1)])
    }
}

/// Rotation angles are π-periodic for the measure; squeezes are clamped.
fn canonical(p: &[f64; 6]) -> [f64; 6] {
    let pi = core::f64::consts::PI;
    let angle = |t: f64| t - pi * (t / pi).floor();
    [angle(p[0]), p[1].clamp(-MAX_SQUEEZE, MAX_SQUEEZE), angle(p[2]), angle(p[3]), p[4].clamp(-MAX_SQUEEZE, MAX_SQUEEZE), angle(p[5])]
}

fn radical_inverse(mut index: usize, base: usize) -> f64 {
    let mut result = 0.0;
    let mut f = 1.0 / base as f64;
    while index > 0 {
        result += f * (index % base) as f64;
        index /= base;
        f /= base as f64;
    }
    result
}

/// Start `0` is the identity; the rest are Halton points with angles in
/// `[0, π)` and squeezes in `[−1, 1]`.
fn start_point(i: usize) -> [f64; 6] {
    if i == 0 {
        return [0.0; 6];
    }
    let h: [f64; 6] = core::array::from_fn(|d| radical_inverse(i, [2, 3, 5, 7, 11, 13][d]));
    let pi = core::f64::consts::PI;
    [pi * h[0], 2.0 * h[1] - 1.0, pi * h[2], pi * h[3], 2.0 * h[4] - 1.0, pi * h[5]]
}

/// Minimise [`epr`] over local rotation–squeeze–rotation operations.
pub fn optimize_epr(c: &CorrelationMatrix) -> Result<EprOptimum> {
    optimize_epr_with_starts(c, OPTIMIZER_STARTS)
}

pub fn optimize_epr_with_starts(c: &CorrelationMatrix, starts: usize) -> Result<EprOptimum> {
    let raw = epr(c)?;
    let blocks = Blocks::of(&c.matrix);
    let objective = |p: &[f64; 6]| blocks.epr_after(&LocalSymplectic::from_params(&canonical(p)));
    let options = NelderMeadOptions::default();

    let mut finals = alloc::vec::Vec::with_capacity(starts);
    let mut best: Option<([f64; 6], f64)> = None;
    for i in 0..starts.max(1) {
        let m = minimize(objective, start_point(i), &options);
        finals.push(m.value);
        if best.map_or(true, |(_, v)| m.value < v) {
            best = Some((m.x, m.value));
        }
    }
    let (mut x, mut value) = best.unwrap_or(([0.0; 6], raw));
    let polished = minimize(objective, x, &NelderMeadOptions { initial_step: 0.01, ..options });
    if polished.value < value {
        x = polished.x;
        value = polished.value;
    }

    finals.sort_by(f64::total_cmp);
    let reference = finals[0].min(value);
    let agreeing = finals.iter().filter(|&&v| v - reference <= 1e-6 * reference.abs()).count();
    let top3_spread = (finals[finals.len().min(3) - 1] - reference) / reference.abs();
    if agreeing < 2 && starts > 1 {
        return Err(Error::OptimizerStall { best: value, agreeing, starts });
    }

    let mut witness = LocalSymplectic::from_params(&canonical(&x));
    if !(value < raw - 1e-12 * raw.abs()) {
        witness = LocalSymplectic::identity();
        value = raw;
    }
    let transformed = crate::symplectic::apply_local_symplectic(c, &witness);
    Ok(EprOptimum { value, witness, transformed, starts, agreeing, top3_spread })
}

/// A correlation matrix brought to standard form II by local operations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StandardForm {
    pub matrix: CorrelationMatrix,
    /// The local symplectic map `S` with `matrix = S·C·Sᵀ`.
    pub transform: Matrix4<f64>,
    /// A local mode is at the vacuum level (or the squeeze conditions have no
    /// solution); `matrix` is then only in standard form I.
    pub degenerate: bool,
}

/// Map a positive-definite 2×2 block to `√det·𝟙` with a symplectic matrix.
fn normalise_block(block: &Matrix2<f64>) -> (Matrix2<f64>, f64) {
    let (l1, l2, phi) = sym2_eigen(block[(0, 0)], 0.5 * (block[(0, 1)] + block[(1, 0)]), block[(1, 1)]);
    let d = (l1 * l2).sqrt();
    let scale = Matrix2::new((d / l1).sqrt(), 0.0, 0.0, (d / l2).sqrt());
    (scale * rotation(phi).transpose(), d)
}

pub fn standard_form(c: &CorrelationMatrix) -> StandardForm {
    let blocks = Blocks::of(&c.matrix);
    let (sa, n) = normalise_block(&blocks.a);
    let (sb, m) = normalise_block(&blocks.b);
    let k = sa * blocks.k * sb.transpose();
    let (phi, c1, c2, theta) = svd2_proper(&k);
    let first = block_diag(&(rotation(-phi) * sa), &(rotation(theta) * sb));

    let finish = |s: Matrix4<f64>, degenerate| StandardForm {
        matrix: CorrelationMatrix { matrix: s * c.matrix * s.transpose(), ..*c },
        transform: s,
        degenerate,
    };

    if n - 1.0 <= DEGENERACY_TOLERANCE || m - 1.0 <= DEGENERACY_TOLERANCE {
        return finish(first, true);
    }
    // Local squeezes diag(√r₁, 1/√r₁) ⊕ diag(√r₂, 1/√r₂). The second
    // condition fixes x = r₁r₂; the first is monotone in s = ln r₁.
    let root_nm = (n * m).sqrt();
    let (gap1, gap2) = (root_nm - c1.abs(), root_nm - c2.abs());
    if !(gap1 > 0.0 && gap2 > 0.0) {
        return finish(first, true);
    }
    let x = gap2 / gap1;
    let g = |s: f64| {
        let t = s.exp();
        (n * t - 1.0) * (m * t / x - 1.0) - (n / t - 1.0) * (m * x / t - 1.0)
    };
    let mut lo = (-n.ln()).max((x / m).ln());
    let mut hi = n.ln().min((m * x).ln());
    if !(lo < hi) {
        return finish(first, true);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r1 = (0.5 * (lo + hi)).exp();
    let r2 = x / r1;
    let squeeze = Matrix4::from_diagonal(&nalgebra::Vector4::new(r1.sqrt(), 1.0 / r1.sqrt(), r2.sqrt(), 1.0 / r2.sqrt()));
    finish(squeeze * first, false)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inseparability {
    pub value: f64,
    /// A required variance sat at the vacuum level; `value` is then 1.
    pub degenerate: bool,
    /// `|k⁺ − k⁻|`, zero for an exact standard form II.
    pub k_mismatch: f64,
}

/// Product-form degree of inseparability of a matrix in standard form II,
/// `√(C_I⁺·C_I⁻)/(k² + k⁻²)`.
pub fn inseparability(c: &CorrelationMatrix) -> Inseparability {
    let m = &c.matrix;
    let quadrature = |i: usize| (m[(i, i)], m[(i + 2, i + 2)], m[(i, i + 2)]);
    let (ap, bp, cp) = quadrature(0);
    let (am, bm, cm) = quadrature(1);
    if [ap, bp, am, bm].iter().any(|&v| v - 1.0 <= DEGENERACY_TOLERANCE) {
        return Inseparability { value: 1.0, degenerate: true, k_mismatch: 0.0 };
    }
    let weighted = |a: f64, b: f64, c: f64| {
        let ratio = ((b - 1.0) / (a - 1.0)).sqrt();
        ratio * a + b / ratio - 2.0 * c.abs()
    };
    let ci_plus = weighted(ap, bp, cp);
    let ci_minus = weighted(am, bm, cm);
    let k_plus = ((bp - 1.0) / (ap - 1.0)).powf(0.25);
    let k_minus = ((bm - 1.0) / (am - 1.0)).powf(0.25);
    let k2 = k_plus * k_plus;
    Inseparability {
        value: (ci_plus * ci_minus).sqrt() / (k2 + 1.0 / k2),
        degenerate: false,
        k_mismatch: (k_plus - k_minus).abs(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntanglementReport {
    pub drive: DrivePoint,
    pub branch: BranchId,
    pub omega: f64,
    pub correlation: CorrelationMatrix,
    pub epsilon_raw: f64,
    pub epsilon_opt: f64,
    pub epsilon_opt_db: f64,
    pub insep: f64,
    pub insep_db: f64,
    pub optimizer_witness: LocalSymplectic,
    pub standard_form_matrix: CorrelationMatrix,
    /// [`epr`] evaluated on `standard_form_matrix`: an independent route to
    /// `epsilon_opt`.
    pub epsilon_standard_form: f64,
    pub insep_degenerate: bool,
    pub entangled: bool,
}

pub fn report(params: &CavityParams, drive: &DrivePoint, branch: &SteadyStateBranch, omega: f64) -> Result<EntanglementReport> {
    let correlation = output_correlation(params, branch, omega)?;
    report_from_correlation(drive, branch.id, &correlation)
}

/// Measures for a correlation matrix obtained elsewhere.
pub fn report_from_correlation(drive: &DrivePoint, branch: BranchId, correlation: &CorrelationMatrix) -> Result<EntanglementReport> {
    let epsilon_raw = epr(correlation)?;
    let optimum = optimize_epr(correlation)?;
    let standard = standard_form(correlation);
    let insep = inseparability(&standard.matrix);
    Ok(EntanglementReport {
        drive: *drive,
        branch,
        omega: correlation.omega,
        correlation: *correlation,
        epsilon_raw,
        epsilon_opt: optimum.value,
        epsilon_opt_db: to_db(optimum.value),
        insep: insep.value,
        insep_db: to_db(insep.value),
        optimizer_witness: optimum.witness,
        standard_form_matrix: standard.matrix,
        epsilon_standard_form: conditional_product(&standard.matrix.matrix),
        insep_degenerate: insep.degenerate,
        entangled: insep.value < 1.0,
    })
}
