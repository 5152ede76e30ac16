//! Drive-space sweeps: lines, 2-D maps and constant-power polar paths.
//!
//! A sweep is a list of independent [`SweepPoint`]s. [`evaluate_point`] turns
//! one point into its records; [`run_sweep`] does this sequentially, and
//! callers that want concurrency can map [`evaluate_point`] over
//! [`sweep_points`] themselves and concatenate in point order.

use alloc::vec::Vec;
use core::f64::consts::PI;


use crate::cavity::{make_drive, steady_states, BranchId, CavityParams, Stability, SteadyStateBranch};
use crate::entanglement::{report, EntanglementReport};
use crate::{critical_amplitudes, Complex64, Error, ErrorCode, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepKind {
    Map2D,
    /// Fundamental drive only, `β_d = 0`.
    LineShg,
    /// Harmonic drive only, `α_d = 0`.
    LineOpo,
    Polar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum BranchPolicy {
    /// One record per steady state.
    #[default]
    AllBranches,
    /// Right half-map (`α_d ≥ 0`) shows the stable branch with `Re α ≥ 0`,
    /// the left half the one with `Re α < 0`.
    FoldBySign,
    /// The stable branch with the smallest optimised EPR product.
    MaxEntanglement,
}

/// `points` equally spaced values from `start` to `stop` inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridAxis {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl GridAxis {
    pub fn new(start: f64, stop: f64, points: usize) -> Self {
        GridAxis { start, stop, points }
    }

    pub fn single(value: f64) -> Self {
        GridAxis { start: value, stop: value, points: 1 }
    }

    /// `points` angles `2πi/points`, the full circle without its endpoint.
    pub fn circle(points: usize) -> Self {
        let points = points.max(1);
        GridAxis { start: 0.0, stop: 2.0 * PI * (points - 1) as f64 / points as f64, points }
    }

    pub fn step(&self) -> f64 {
        if self.points > 1 {
            (self.stop - self.start) / (self.points - 1) as f64
        } else {
            0.0
        }
    }

    /// Computed as a weighted mean so that a range symmetric about zero
    /// yields exactly negated values at mirrored indices.
    pub fn value(&self, i: usize) -> f64 {
        if self.points <= 1 {
            return self.start;
        }
        let n = (self.points - 1) as f64;
        let i = i as f64;
        (self.start * (n - i) + self.stop * i) / n
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.value(i)).collect()
    }

    fn validate(&self) -> Result<()> {
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(Error::InvalidSweep("range bounds must be finite"));
        }
        if self.points == 0 {
            return Err(Error::InvalidSweep("a range needs at least one point"));
        }
        if self.points > 1 && !(self.step() > 0.0) {
            return Err(Error::InvalidSweep("range step must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub kind: SweepKind,
    pub alpha_d: GridAxis,
    pub beta_d: GridAxis,
    /// Total input power in units of the OPO threshold power (polar only).
    pub xi: f64,
    /// Path angle `θ_R` (polar only).
    pub theta: GridAxis,
    pub omega: f64,
    pub branch_policy: BranchPolicy,
}

pub const DEFAULT_MAP_POINTS: usize = 201;
pub const DEFAULT_MAP_EXTENT: f64 = 2.0;
pub const DEFAULT_THETA_STEPS: usize = 720;

impl SweepSpec {
    pub fn map(alpha_d: GridAxis, beta_d: GridAxis) -> Self {
        SweepSpec {
            kind: SweepKind::Map2D,
            alpha_d,
            beta_d,
            xi: 0.0,
            theta: GridAxis::single(0.0),
            omega: 0.0,
            branch_policy: BranchPolicy::AllBranches,
        }
    }

    /// 201×201 over `[−2, 2]²`.
    pub fn default_map() -> Self {
        let axis = GridAxis::new(-DEFAULT_MAP_EXTENT, DEFAULT_MAP_EXTENT, DEFAULT_MAP_POINTS);
        Self::map(axis, axis)
    }

    pub fn line_shg(alpha_d: GridAxis) -> Self {
        SweepSpec { kind: SweepKind::LineShg, beta_d: GridAxis::single(0.0), ..Self::map(alpha_d, alpha_d) }
    }

    pub fn line_opo(beta_d: GridAxis) -> Self {
        SweepSpec { kind: SweepKind::LineOpo, alpha_d: GridAxis::single(0.0), ..Self::map(beta_d, beta_d) }
    }

    pub fn polar(xi: f64, theta_steps: usize) -> Self {
        SweepSpec {
            kind: SweepKind::Polar,
            xi,
            theta: GridAxis::circle(theta_steps),
            branch_policy: BranchPolicy::MaxEntanglement,
            ..Self::map(GridAxis::single(0.0), GridAxis::single(0.0))
        }
    }

    pub fn with_policy(self, branch_policy: BranchPolicy) -> Self {
        SweepSpec { branch_policy, ..self }
    }

    pub fn with_omega(self, omega: f64) -> Self {
        SweepSpec { omega, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.omega.is_finite() {
            return Err(Error::InvalidSweep("omega must be finite"));
        }
        if self.branch_policy == BranchPolicy::FoldBySign && self.kind != SweepKind::Map2D {
            return Err(Error::InvalidSweep("fold branch policy is only defined for maps"));
        }
        match self.kind {
            SweepKind::Map2D => {
                self.alpha_d.validate()?;
                self.beta_d.validate()
            }
            SweepKind::LineShg => self.alpha_d.validate(),
            SweepKind::LineOpo => self.beta_d.validate(),
            SweepKind::Polar => {
                if !(self.xi.is_finite() && self.xi > 0.0) {
                    return Err(Error::InvalidSweep("polar sweeps need a positive total power"));
                }
                self.theta.validate()
            }
        }
    }

    pub fn len(&self) -> usize {
        match self.kind {
            SweepKind::Map2D => self.alpha_d.points * self.beta_d.points,
            SweepKind::LineShg => self.alpha_d.points,
            SweepKind::LineOpo => self.beta_d.points,
            SweepKind::Polar => self.theta.points,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A point on the constant-total-power path
/// `α_d = (β_c/α_c)·√(2ξ)·sin θ_R`, `β_d = √ξ·cos θ_R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarPoint {
    pub theta_r: f64,
    /// Fraction of the input power in the harmonic, `cos² θ_R`.
    pub r: f64,
    pub alpha_d: f64,
    pub beta_d: f64,
    pub xi: f64,
}

impl PolarPoint {
    pub fn new(params: &CavityParams, xi: f64, theta_r: f64) -> Self {
        let crit = critical_amplitudes(params);
        let (s, c) = theta_r.sin_cos();
        PolarPoint {
            theta_r,
            r: c * c,
            alpha_d: crit.beta_c / crit.alpha_c * (2.0 * xi).sqrt() * s,
            beta_d: xi.sqrt() * c,
            xi,
        }
    }

    /// `½|α_in|² + |β_in|²`, which equals `ξ·β_c²` along the path.
    pub fn input_power(&self, params: &CavityParams) -> f64 {
        let d = make_drive(params, self.alpha_d, self.beta_d);
        0.5 * d.alpha_in().norm_sqr() + d.beta_in().norm_sqr()
    }

    /// `|β_in|² / (½|α_in|² + |β_in|²)` from the drives themselves.
    pub fn splitting_from_drive(&self, params: &CavityParams) -> f64 {
        make_drive(params, self.alpha_d, self.beta_d).beta_in().norm_sqr() / self.input_power(params)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub index: usize,
    pub alpha_d: f64,
    pub beta_d: f64,
    pub polar: Option<PolarPoint>,
}

/// Points in emission order; maps are row-major with `β_d` as the row.
pub fn sweep_points(params: &CavityParams, spec: &SweepSpec) -> Vec<SweepPoint> {
    let plain = |index, alpha_d, beta_d| SweepPoint { index, alpha_d, beta_d, polar: None };
    match spec.kind {
        SweepKind::Map2D => {
            let (a, b) = (spec.alpha_d.values(), spec.beta_d.values());
            b.iter()
                .flat_map(|&bd| a.iter().map(move |&ad| (ad, bd)))
                .enumerate()
                .map(|(i, (ad, bd))| plain(i, ad, bd))
                .collect()
        }
        SweepKind::LineShg => spec.alpha_d.values().into_iter().enumerate().map(|(i, ad)| plain(i, ad, 0.0)).collect(),
        SweepKind::LineOpo => spec.beta_d.values().into_iter().enumerate().map(|(i, bd)| plain(i, 0.0, bd)).collect(),
        SweepKind::Polar => spec
            .theta
            .values()
            .into_iter()
            .enumerate()
            .map(|(index, theta)| {
                let p = PolarPoint::new(params, spec.xi, theta);
                SweepPoint { index, alpha_d: p.alpha_d, beta_d: p.beta_d, polar: Some(p) }
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchSummary {
    pub id: BranchId,
    pub stability: Stability,
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl From<&SteadyStateBranch> for BranchSummary {
    fn from(b: &SteadyStateBranch) -> Self {
        BranchSummary { id: b.id, stability: b.stability, alpha: b.alpha, beta: b.beta }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measures {
    pub eps_raw: f64,
    pub eps_opt: f64,
    pub eps_opt_db: f64,
    pub insep: f64,
    pub insep_db: f64,
    pub insep_degenerate: bool,
}

impl From<&EntanglementReport> for Measures {
    fn from(r: &EntanglementReport) -> Self {
        Measures {
            eps_raw: r.epsilon_raw,
            eps_opt: r.epsilon_opt,
            eps_opt_db: r.epsilon_opt_db,
            insep: r.insep,
            insep_db: r.insep_db,
            insep_degenerate: r.insep_degenerate,
        }
    }
}

/// One emitted row. Either `measures` is present or `error` says why not.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunRecord {
    pub index: usize,
    pub alpha_d: f64,
    pub beta_d: f64,
    pub polar: Option<PolarPoint>,
    pub branch: Option<BranchSummary>,
    pub measures: Option<Measures>,
    pub error: Option<ErrorCode>,
}

impl RunRecord {
    fn new(point: &SweepPoint) -> Self {
        RunRecord {
            index: point.index,
            alpha_d: point.alpha_d,
            beta_d: point.beta_d,
            polar: point.polar,
            branch: None,
            measures: None,
            error: None,
        }
    }

    fn with_branch(point: &SweepPoint, branch: &SteadyStateBranch, measured: Option<Result<EntanglementReport>>) -> Self {
        let mut record = RunRecord { branch: Some(branch.into()), ..Self::new(point) };
        match measured {
            None => record.error = Some(ErrorCode::UnstableBranch),
            Some(Ok(r)) => record.measures = Some((&r).into()),
            Some(Err(e)) => record.error = Some(e.code()),
        }
        record
    }

    pub fn r(&self) -> Option<f64> {
        self.polar.map(|p| p.r)
    }

    /// The record carries an error that is a genuine computational failure
    /// rather than an unstable or self-pulsing point.
    pub fn is_failure(&self) -> bool {
        self.error.is_some_and(ErrorCode::is_failure)
    }
}

/// Pick the measured branch with the smallest `ε_o`; errors only win when
/// nothing measured successfully.
fn best_of<'a>(
    candidates: impl Iterator<Item = (&'a SteadyStateBranch, Result<EntanglementReport>)>,
) -> Option<(&'a SteadyStateBranch, Result<EntanglementReport>)> {
    let mut best: Option<(&SteadyStateBranch, Result<EntanglementReport>)> = None;
    for (b, r) in candidates {
        let better = match (&best, &r) {
            (None, _) => true,
            (Some((_, Err(_))), Ok(_)) => true,
            (Some((_, Ok(old))), Ok(new)) => new.epsilon_opt < old.epsilon_opt,
            _ => false,
        };
        if better {
            best = Some((b, r));
        }
    }
    best
}

/// Records for one sweep point under `policy`.
pub fn evaluate_point(params: &CavityParams, point: &SweepPoint, omega: f64, policy: BranchPolicy) -> Vec<RunRecord> {
    let drive = make_drive(params, point.alpha_d, point.beta_d);
    let branches = match steady_states(params, &drive) {
        Ok(b) => b,
        Err(e) => return alloc::vec![RunRecord { error: Some(e.code()), ..RunRecord::new(point) }],
    };
    let with_report = |b: &SteadyStateBranch| {
        let measured = b.is_stable().then(|| report(params, &drive, b, omega));
        RunRecord::with_branch(point, b, measured)
    };
    let select = |allowed: &dyn Fn(&SteadyStateBranch) -> bool| {
        let stable = branches.iter().filter(|b| b.is_stable() && allowed(b));
        match best_of(stable.map(|b| (b, report(params, &drive, b, omega)))) {
            Some((b, r)) => RunRecord::with_branch(point, b, Some(r)),
            None => {
                // Keep the classical state visible: report the first branch.
                let mut record = match branches.first() {
                    Some(b) => RunRecord::with_branch(point, b, None),
                    None => RunRecord::new(point),
                };
                record.error = Some(ErrorCode::NoStableBranch);
                record
            }
        }
    };
    match policy {
        BranchPolicy::AllBranches => branches.iter().map(with_report).collect(),
        BranchPolicy::MaxEntanglement => alloc::vec![select(&|_| true)],
        BranchPolicy::FoldBySign => {
            let right = point.alpha_d >= 0.0;
            alloc::vec![select(&|b: &SteadyStateBranch| (b.alpha.re >= 0.0) == right)]
        }
    }
}

/// Evaluate every point in order. Fails only on an invalid spec.
pub fn run_sweep(params: &CavityParams, spec: &SweepSpec) -> Result<Vec<RunRecord>> {
    spec.validate()?;
    Ok(sweep_points(params, spec)
        .iter()
        .flat_map(|p| evaluate_point(params, p, spec.omega, spec.branch_policy))
        .collect())
}

/// Constant-power path over `θ_R ∈ [0, 2π)`, most entangled stable branch.
pub fn run_polar(params: &CavityParams, xi: f64, theta_steps: usize) -> Result<Vec<RunRecord>> {
    run_sweep(params, &SweepSpec::polar(xi, theta_steps))
}

/// Most entangled stable branch at one drive point, if any measures.
pub fn best_report(params: &CavityParams, alpha_d: f64, beta_d: f64, omega: f64) -> Option<EntanglementReport> {
    let drive = make_drive(params, alpha_d, beta_d);
    let branches = steady_states(params, &drive).ok()?;
    let measured = branches.iter().filter(|b| b.is_stable()).map(|b| (b, report(params, &drive, b, omega)));
    match best_of(measured)? {
        (_, Ok(r)) => Some(r),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub x: f64,
    pub value: f64,
}

const GOLDEN_ITERATIONS: usize = 80;

/// Maximum of `f` located by scanning the samples `(xs, values)` and then
/// golden-section search between the neighbours of the best sample. The
/// refined peak is never worse than the best sample. Non-finite values are
/// ignored.
pub fn refine_peak(xs: &[f64], values: &[f64], mut f: impl FnMut(f64) -> f64) -> Option<Peak> {
    let (i, &best) = values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .max_by(|a, b| a.1.total_cmp(b.1))?;
    let mut peak = Peak { x: xs[i], value: best };
    let (mut lo, mut hi) = (xs[i.saturating_sub(1)], xs[(i + 1).min(xs.len() - 1)]);
    if lo > hi {
        core::mem::swap(&mut lo, &mut hi);
    }
    let mut g = |x: f64| {
        let v = f(x);
        if v.is_finite() {
            if v > peak.value {
                peak = Peak { x, value: v };
            }
            v
        } else {
            f64::NEG_INFINITY
        }
    };
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (g(c), g(d));
    for _ in 0..GOLDEN_ITERATIONS {
        if b - a <= 1e-12 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = g(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = g(d);
        }
    }
    Some(peak)
}
