//! Measurements over kinetic states: the scaled energy and its dissipation
//! bookkeeping, interface sets and their Hausdorff drift, transition
//! counting, per-layer energy certificates, and exit times.
//!
//! Everything here is a pure function of its inputs (the two trajectory
//! observers only accumulate), so all operations are safe to call
//! concurrently on shared states.

use thiserror::Error;

use crate::kinetics::{reconstruct, Grid1D, KineticState, Observer, SchemeParams};
use crate::potential::{compute_c0_default, DampingSpec, PotentialError, PotentialSpec};

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error("band must satisfy -1 < lo <= hi < 1, got [{lo}, {hi}]")]
    BadBand { lo: f64, hi: f64 },
    #[error("hysteresis must lie in (0, 1), got {value}")]
    BadHysteresis { value: f64 },
    #[error("{name} must be positive and finite, got {value}")]
    BadParameter { name: &'static str, value: f64 },
    #[error("sample count {got} does not match grid cells {expected}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("interval [{lo}, {hi}] is invalid (needs finite lo <= hi)")]
    BadInterval { lo: f64, hi: f64 },
    #[error("invalid step profile: {reason}")]
    BadProfile { reason: String },
    #[error("certificate windows are not admissible: {reason}")]
    NotAdmissible { reason: String },
    #[error("no sample on the {side} side of jump {jump} has the expected sign")]
    NoWellSideSample { jump: f64, side: &'static str },
    #[error("certificate requires a profile with at least one jump")]
    ProfileHasNoJumps,
    #[error("trajectory has no samples")]
    EmptySamples,
    #[error("initial interface is empty; exit time is undefined")]
    EmptyInitialInterface,
    #[error(transparent)]
    Potential(#[from] PotentialError),
}

// ═══════════════════════════════════════════════════════════════════
// Energy
// ═══════════════════════════════════════════════════════════════════

/// Decomposition of the scaled energy
/// E_ε = ∫ τ/(2ε)·u_t² + ε/2·u_x² + F(u)/ε.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct EnergyReport {
    pub t: f64,
    pub kinetic: f64,
    pub gradient: f64,
    pub potential: f64,
    /// E_ε: kinetic + gradient + potential.
    pub total_scaled: f64,
    /// ε·E_ε, the unscaled physical energy.
    pub total_unscaled: f64,
}

/// Centered differences with one-sided stencils at the two wall cells
/// (where the fields are flat under no-flux walls).
pub(crate) fn gradient_samples(u: &[f64], dx: f64) -> Vec<f64> {
    let m = u.len();
    let mut g = Vec::with_capacity(m);
    for j in 0..m {
        let d = if j == 0 {
            (u[1] - u[0]) / dx
        } else if j == m - 1 {
            (u[m - 1] - u[m - 2]) / dx
        } else {
            (u[j + 1] - u[j - 1]) / (2.0 * dx)
        };
        g.push(d);
    }
    g
}

pub(crate) fn energy_of_fields(
    u: &[f64],
    u_t: &[f64],
    t: f64,
    grid: &Grid1D,
    params: &SchemeParams,
    pot: &PotentialSpec,
) -> EnergyReport {
    let eps = params.epsilon();
    let tau = params.tau();
    let ux = gradient_samples(u, grid.dx());
    let kin: Vec<f64> = u_t.iter().map(|w| tau / (2.0 * eps) * w * w).collect();
    let grd: Vec<f64> = ux.iter().map(|g| 0.5 * eps * g * g).collect();
    let pot_density: Vec<f64> = u.iter().map(|&v| pot.energy_density(v) / eps).collect();
    let kinetic = grid.integrate(&kin);
    let gradient = grid.integrate(&grd);
    let potential = grid.integrate(&pot_density);
    let total_scaled = kinetic + gradient + potential;
    EnergyReport {
        t,
        kinetic,
        gradient,
        potential,
        total_scaled,
        total_unscaled: eps * total_scaled,
    }
}

/// Scaled energy of a state, with u_t recovered from the flux relation
/// u_t = f(u) − γ·v_x (no time differencing needed).
pub fn energy(state: &KineticState, params: &SchemeParams, pot: &PotentialSpec) -> EnergyReport {
    let f = reconstruct(state, params, pot);
    let grid = state.grid();
    energy_of_fields(&f.u, &f.u_t, state.t(), &grid, params, pot)
}

// ═══════════════════════════════════════════════════════════════════
// Dissipation bookkeeping
// ═══════════════════════════════════════════════════════════════════

/// One accumulated sample of the running energy balance.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct DissipationSample {
    pub t: f64,
    pub total_scaled: f64,
    /// ε⁻¹·∫₀ᵗ ∫ g(u)·u_t² dx ds accumulated so far.
    pub expenditure: f64,
}

/// Trajectory observer accumulating both sides of the energy identity
///
///   E_ε(0) − E_ε(T) = ε⁻¹ ∫₀ᵀ ∫ g(u)·u_t² dx dt.
///
/// The time integral uses the trapezoid rule over the observed states.
/// [`DissipationTracker::residual`] is the absolute defect between the two
/// sides; it shrinks under mesh refinement and bounds how far the sampled
/// energies may sit from exact monotone decay.
pub struct DissipationTracker<'a> {
    params: &'a SchemeParams,
    pot: &'a PotentialSpec,
    damping: &'a DampingSpec,
    prev: Option<(f64, f64, f64)>, // (t, damped rate, raw rate)
    expenditure: f64,
    kinetic_expenditure: f64,
    first: Option<EnergyReport>,
    last: Option<EnergyReport>,
    max_increase: f64,
    samples: Vec<DissipationSample>,
}

impl<'a> DissipationTracker<'a> {
    pub fn new(
        params: &'a SchemeParams,
        pot: &'a PotentialSpec,
        damping: &'a DampingSpec,
    ) -> Self {
        Self {
            params,
            pot,
            damping,
            prev: None,
            expenditure: 0.0,
            kinetic_expenditure: 0.0,
            first: None,
            last: None,
            max_increase: 0.0,
            samples: Vec::new(),
        }
    }

    /// ε⁻¹·∫∫ g(u)·u_t² accumulated over the observed span.
    pub fn expenditure(&self) -> f64 {
        self.expenditure
    }

    /// ∫∫ u_t² (no damping weight, no ε scaling); the quantity bounded by
    /// the damping floor: σ·ε⁻¹·∫∫u_t² ≤ expenditure side of the identity.
    pub fn kinetic_expenditure(&self) -> f64 {
        self.kinetic_expenditure
    }

    pub fn first(&self) -> Option<EnergyReport> {
        self.first
    }

    pub fn last(&self) -> Option<EnergyReport> {
        self.last
    }

    /// Largest increase E_ε(t_{n+1}) − E_ε(t_n) over consecutive observed
    /// states; 0 for perfectly monotone decay.
    pub fn max_increase(&self) -> f64 {
        self.max_increase
    }

    /// |expenditure − (E_ε(0) − E_ε(T))|, the discrete defect of the
    /// energy identity over the observed span.
    pub fn residual(&self) -> f64 {
        match (self.first, self.last) {
            (Some(e0), Some(et)) => {
                (self.expenditure - (e0.total_scaled - et.total_scaled)).abs()
            }
            _ => 0.0,
        }
    }

    pub fn samples(&self) -> &[DissipationSample] {
        &self.samples
    }
}

impl Observer for DissipationTracker<'_> {
    fn on_state(&mut self, state: &KineticState) {
        let grid = state.grid();
        let f = reconstruct(state, self.params, self.pot);
        let damped: Vec<f64> = f
            .u
            .iter()
            .zip(&f.u_t)
            .map(|(&u, &w)| self.damping.g(u) * w * w)
            .collect();
        let raw: Vec<f64> = f.u_t.iter().map(|&w| w * w).collect();
        let damped_rate = grid.integrate(&damped);
        let raw_rate = grid.integrate(&raw);
        let t = state.t();
        if let Some((t0, d0, r0)) = self.prev {
            let dt = t - t0;
            self.expenditure += 0.5 * dt * (d0 + damped_rate) / self.params.epsilon();
            self.kinetic_expenditure += 0.5 * dt * (r0 + raw_rate);
        }
        self.prev = Some((t, damped_rate, raw_rate));

        let report = energy_of_fields(&f.u, &f.u_t, t, &grid, self.params, self.pot);
        if let Some(prev) = self.last {
            let inc = report.total_scaled - prev.total_scaled;
            if inc > self.max_increase {
                self.max_increase = inc;
            }
        }
        if self.first.is_none() {
            self.first = Some(report);
        }
        self.last = Some(report);
        self.samples.push(DissipationSample {
            t,
            total_scaled: report.total_scaled,
            expenditure: self.expenditure,
        });
    }
}

// ═══════════════════════════════════════════════════════════════════
// Interval sets and Hausdorff distance
// ═══════════════════════════════════════════════════════════════════

/// A finite union of disjoint closed intervals (points are degenerate
/// intervals), kept sorted.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalSet {
    ivs: Vec<(f64, f64)>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        Self { ivs: Vec::new() }
    }

    /// Normalizes: sorts and merges overlapping or touching intervals.
    pub fn from_intervals(
        intervals: impl IntoIterator<Item = (f64, f64)>,
    ) -> Result<Self, DiagnosticsError> {
        let mut ivs: Vec<(f64, f64)> = Vec::new();
        for (lo, hi) in intervals {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(DiagnosticsError::BadInterval { lo, hi });
            }
            ivs.push((lo, hi));
        }
        ivs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(ivs.len());
        for (lo, hi) in ivs {
            match merged.last_mut() {
                Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
                _ => merged.push((lo, hi)),
            }
        }
        Ok(Self { ivs: merged })
    }

    pub fn from_points(points: &[f64]) -> Result<Self, DiagnosticsError> {
        Self::from_intervals(points.iter().map(|&x| (x, x)))
    }

    pub fn is_empty(&self) -> bool {
        self.ivs.is_empty()
    }

    pub fn components(&self) -> &[(f64, f64)] {
        &self.ivs
    }

    pub fn contains(&self, x: f64) -> bool {
        self.distance_to(x) == 0.0
    }

    /// Distance from a point to the set (`∞` if empty).
    pub fn distance_to(&self, x: f64) -> f64 {
        if self.ivs.is_empty() {
            return f64::INFINITY;
        }
        // First component with lo > x.
        let idx = self.ivs.partition_point(|iv| iv.0 <= x);
        let mut best = f64::INFINITY;
        if idx > 0 {
            let (_, hi) = self.ivs[idx - 1];
            best = best.min((x - hi).max(0.0));
        }
        if idx < self.ivs.len() {
            best = best.min(self.ivs[idx].0 - x);
        }
        best
    }

    /// sup_{x ∈ self} dist(x, other), exact for interval unions: the sup is
    /// attained either at a component endpoint of `self` or at a midpoint
    /// of a gap of `other` (where the distance-to-`other` tent peaks), so
    /// scanning those candidates suffices.
    fn directed_sup(&self, other: &IntervalSet) -> f64 {
        let mut best = 0.0f64;
        for &(lo, hi) in &self.ivs {
            best = best.max(other.distance_to(lo));
            best = best.max(other.distance_to(hi));
        }
        for w in other.ivs.windows(2) {
            let mid = 0.5 * (w[0].1 + w[1].0);
            if self.contains(mid) {
                best = best.max(other.distance_to(mid));
            }
        }
        best
    }
}

/// Hausdorff distance between interval unions; `Undefined` when either
/// set is empty (callers treat that as exceeding every threshold).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HausdorffDistance {
    Finite(f64),
    Undefined,
}

impl HausdorffDistance {
    /// Whether the distance exceeds `delta`; an undefined distance always
    /// does.
    pub fn exceeds(&self, delta: f64) -> bool {
        match self {
            HausdorffDistance::Finite(d) => *d > delta,
            HausdorffDistance::Undefined => true,
        }
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            HausdorffDistance::Finite(d) => Some(*d),
            HausdorffDistance::Undefined => None,
        }
    }
}

/// Exact Hausdorff distance: max of the two directed sup-inf distances.
pub fn hausdorff(a: &IntervalSet, b: &IntervalSet) -> HausdorffDistance {
    if a.is_empty() || b.is_empty() {
        return HausdorffDistance::Undefined;
    }
    HausdorffDistance::Finite(a.directed_sup(b).max(b.directed_sup(a)))
}

// ═══════════════════════════════════════════════════════════════════
// Interface extraction and transition counting
// ═══════════════════════════════════════════════════════════════════

/// The preimage u⁻¹([K_lo, K_hi]) of the piecewise-linear interpolant,
/// with the sign-changing crossings counted and bracketed.
#[derive(Clone, Debug)]
pub struct InterfaceReport {
    pub k_lo: f64,
    pub k_hi: f64,
    /// Maximal intervals where the interpolant lies inside the band.
    pub intervals: IntervalSet,
    /// Number of intervals crossed from below K_lo to above K_hi or
    /// vice versa.
    pub count: usize,
    /// The (x_i, y_i) endpoints of each counted crossing, in order.
    pub layer_points: Vec<(f64, f64)>,
}

fn validate_band(k_lo: f64, k_hi: f64) -> Result<(), DiagnosticsError> {
    if !(-1.0 < k_lo && k_lo <= k_hi && k_hi < 1.0) {
        return Err(DiagnosticsError::BadBand { lo: k_lo, hi: k_hi });
    }
    Ok(())
}

fn check_shape(len: usize, grid: &Grid1D) -> Result<(), DiagnosticsError> {
    if len != grid.cells() {
        return Err(DiagnosticsError::ShapeMismatch {
            expected: grid.cells(),
            got: len,
        });
    }
    Ok(())
}

/// Which side of the band a value sits on.
#[derive(Clone, Copy, PartialEq)]
enum Side {
    Below,
    Above,
}

/// Computes the interface of the sampled field with respect to the band
/// K = [K_lo, K_hi]. Segment endpoints are located by inverse linear
/// interpolation between adjacent cell centers; the report is restricted
/// to [x_0, x_{M−1}] (the interpolant's support).
pub fn interface_set(
    u: &[f64],
    grid: &Grid1D,
    k_lo: f64,
    k_hi: f64,
) -> Result<InterfaceReport, DiagnosticsError> {
    validate_band(k_lo, k_hi)?;
    check_shape(u.len(), grid)?;
    let m = u.len();
    let mut raw: Vec<(f64, f64)> = Vec::new();
    for j in 0..m - 1 {
        let (u0, u1) = (u[j], u[j + 1]);
        let (x0, x1) = (grid.node(j), grid.node(j + 1));
        let slice = if u0 == u1 {
            if k_lo <= u0 && u0 <= k_hi {
                Some((0.0, 1.0))
            } else {
                None
            }
        } else {
            let d = u1 - u0;
            let (s_enter, s_exit) = if d > 0.0 {
                ((k_lo - u0) / d, (k_hi - u0) / d)
            } else {
                ((k_hi - u0) / d, (k_lo - u0) / d)
            };
            let s0 = s_enter.max(0.0);
            let s1 = s_exit.min(1.0);
            (s0 <= s1).then_some((s0, s1))
        };
        if let Some((s0, s1)) = slice {
            // Map s = 0 and s = 1 to the exact node coordinates so that
            // contiguous segments share bit-identical endpoints and merge.
            let map = |s: f64| {
                if s == 0.0 {
                    x0
                } else if s == 1.0 {
                    x1
                } else {
                    x0 + s * grid.dx()
                }
            };
            raw.push((map(s0), map(s1)));
        }
    }
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (lo, hi) in raw {
        match merged.last_mut() {
            Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
            _ => merged.push((lo, hi)),
        }
    }

    // Classify each maximal interval by the nearest out-of-band samples on
    // either side. Between two maximal intervals there is always at least
    // one out-of-band node (a linear segment cannot leave and re-enter the
    // band), so the first out-of-band node encountered is the right one.
    let first_node_left_of = |x: f64| -> Option<usize> {
        let mut lo_i = 0usize;
        let mut hi_i = m;
        while lo_i < hi_i {
            let mid = (lo_i + hi_i) / 2;
            if grid.node(mid) < x {
                lo_i = mid + 1;
            } else {
                hi_i = mid;
            }
        }
        lo_i.checked_sub(1)
    };
    let in_band = |v: f64| k_lo <= v && v <= k_hi;
    let side_of = |v: f64| if v < k_lo { Side::Below } else { Side::Above };

    let mut count = 0;
    let mut layer_points = Vec::new();
    for &(lo, hi) in &merged {
        let mut left = first_node_left_of(lo);
        while let Some(j) = left {
            if in_band(u[j]) {
                left = j.checked_sub(1);
            } else {
                break;
            }
        }
        let left_side = left.map(|j| side_of(u[j]));

        let mut right = {
            // First node with coordinate > hi.
            let mut lo_i = 0usize;
            let mut hi_i = m;
            while lo_i < hi_i {
                let mid = (lo_i + hi_i) / 2;
                if grid.node(mid) <= hi {
                    lo_i = mid + 1;
                } else {
                    hi_i = mid;
                }
            }
            (lo_i < m).then_some(lo_i)
        };
        while let Some(j) = right {
            if in_band(u[j]) {
                right = (j + 1 < m).then_some(j + 1);
            } else {
                break;
            }
        }
        let right_side = right.map(|j| side_of(u[j]));

        if let (Some(a), Some(b)) = (left_side, right_side) {
            if a != b {
                count += 1;
                layer_points.push((lo, hi));
            }
        }
    }

    Ok(InterfaceReport {
        k_lo,
        k_hi,
        intervals: IntervalSet { ivs: merged },
        count,
        layer_points,
    })
}

/// Counts alternating well-to-well crossings by a two-state automaton:
/// a transition is registered each time the samples pass from
/// ≤ −hysteresis to ≥ +hysteresis or vice versa, scanning left to right.
pub fn transition_count(
    u: &[f64],
    grid: &Grid1D,
    hysteresis: f64,
) -> Result<usize, DiagnosticsError> {
    if !(hysteresis > 0.0 && hysteresis < 1.0) {
        return Err(DiagnosticsError::BadHysteresis { value: hysteresis });
    }
    check_shape(u.len(), grid)?;
    let mut count = 0;
    let mut last: Option<Side> = None;
    for &v in u {
        let side = if v >= hysteresis {
            Some(Side::Above)
        } else if v <= -hysteresis {
            Some(Side::Below)
        } else {
            None
        };
        if let Some(s) = side {
            if let Some(prev) = last {
                if prev != s {
                    count += 1;
                }
            }
            last = Some(s);
        }
    }
    Ok(count)
}

/// Trajectory observer recording (t, interface set) every `stride` states.
pub struct InterfaceTracker {
    k_lo: f64,
    k_hi: f64,
    stride: usize,
    seen: usize,
    samples: Vec<(f64, IntervalSet)>,
}

impl InterfaceTracker {
    pub fn new(k_lo: f64, k_hi: f64, stride: usize) -> Result<Self, DiagnosticsError> {
        validate_band(k_lo, k_hi)?;
        Ok(Self {
            k_lo,
            k_hi,
            stride: stride.max(1),
            seen: 0,
            samples: Vec::new(),
        })
    }

    pub fn samples(&self) -> &[(f64, IntervalSet)] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<(f64, IntervalSet)> {
        self.samples
    }
}

impl Observer for InterfaceTracker {
    fn on_state(&mut self, state: &KineticState) {
        if self.seen % self.stride == 0 {
            let grid = state.grid();
            let report = interface_set(&state.u(), &grid, self.k_lo, self.k_hi)
                .expect("band validated at construction, shape fixed by state");
            self.samples.push((state.t(), report.intervals));
        }
        self.seen += 1;
    }
}

// ═══════════════════════════════════════════════════════════════════
// Step profiles
// ═══════════════════════════════════════════════════════════════════

/// A piecewise-constant ±1 profile with N interior jumps; the limit object
/// the solution is measured against.
#[derive(Clone, Debug, PartialEq)]
pub struct StepProfile {
    jumps: Vec<f64>,
    start_sign: f64,
    domain: (f64, f64),
}

impl StepProfile {
    /// `start_sign` (±1) is the value on (a, γ₁); jumps must be strictly
    /// increasing and interior to the domain. A profile with no jumps is
    /// the constant ±1.
    pub fn new(
        jumps: Vec<f64>,
        start_sign: f64,
        domain: (f64, f64),
    ) -> Result<Self, DiagnosticsError> {
        let (a, b) = domain;
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(DiagnosticsError::BadProfile {
                reason: format!("domain [{a}, {b}] is not a finite interval"),
            });
        }
        if start_sign != 1.0 && start_sign != -1.0 {
            return Err(DiagnosticsError::BadProfile {
                reason: format!("start_sign must be +1 or -1, got {start_sign}"),
            });
        }
        for w in jumps.windows(2) {
            if !(w[0] < w[1]) {
                return Err(DiagnosticsError::BadProfile {
                    reason: format!("jumps not strictly increasing at {} >= {}", w[0], w[1]),
                });
            }
        }
        if let (Some(&first), Some(&last)) = (jumps.first(), jumps.last()) {
            if first <= a || last >= b {
                return Err(DiagnosticsError::BadProfile {
                    reason: format!("jumps must be interior to ({a}, {b})"),
                });
            }
        }
        Ok(Self {
            jumps,
            start_sign,
            domain,
        })
    }

    pub fn jumps(&self) -> &[f64] {
        &self.jumps
    }

    pub fn start_sign(&self) -> f64 {
        self.start_sign
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    /// Number of discontinuities N.
    pub fn transitions(&self) -> usize {
        self.jumps.len()
    }

    /// Profile value at x; right-continuous at jumps.
    pub fn value_at(&self, x: f64) -> f64 {
        let crossed = self.jumps.partition_point(|&g| g <= x);
        if crossed % 2 == 0 {
            self.start_sign
        } else {
            -self.start_sign
        }
    }

    /// The jump locations as a degenerate interval set.
    pub fn interface(&self) -> IntervalSet {
        IntervalSet::from_points(&self.jumps).expect("jumps are finite")
    }
}

/// ∫ |u − v| dx against the profile v, by midpoint quadrature; cells whose
/// center sits exactly on a jump take the right side (the profile's
/// continuity convention), an O(dx) ambiguity below every tolerance used.
pub fn l1_distance_to_profile(
    u: &[f64],
    grid: &Grid1D,
    profile: &StepProfile,
) -> Result<f64, DiagnosticsError> {
    check_shape(u.len(), grid)?;
    let dev: Vec<f64> = u
        .iter()
        .zip(grid.nodes())
        .map(|(&uj, x)| (uj - profile.value_at(x)).abs())
        .collect();
    Ok(grid.integrate(&dev))
}

// ═══════════════════════════════════════════════════════════════════
// Layer certificates
// ═══════════════════════════════════════════════════════════════════

/// Evidence for one layer: the bracketing sample points on the two
/// well sides and the energy the layer carries.
#[derive(Clone, Copy, Debug)]
pub struct LayerReport {
    pub jump: f64,
    /// Sample in (jump − 2δ, jump) on the expected-sign side minimizing F.
    pub x: f64,
    pub f_at_x: f64,
    /// Sample in (jump, jump + 2δ) on the expected-sign side minimizing F.
    pub y: f64,
    pub f_at_y: f64,
    /// ∫ₓʸ [ε/2·u_x² + F(u)/ε], trapezoid over the sample range.
    pub energy: f64,
}

/// Aggregate lower-bound certificate for an N-layer state.
#[derive(Clone, Debug)]
pub struct LayerCertificate {
    pub layers: Vec<LayerReport>,
    pub total_energy: f64,
    pub c0: f64,
    /// Σ layer energies − N·c₀. The theory prices each layer at c₀ minus
    /// an O(ε) deficit, so a valid layered state keeps this above −O(ε).
    pub margin: f64,
}

/// Certifies that each jump of `profile` is flanked by near-well samples
/// of the correct signs and measures the energy each layer carries.
///
/// Admissibility requires the 2·l·delta neighborhoods of the jumps to be
/// pairwise disjoint and interior to the domain; the search windows
/// themselves span (γ_i − 2δ, γ_i) and (γ_i, γ_i + 2δ).
pub fn layer_certificate(
    u: &[f64],
    grid: &Grid1D,
    pot: &PotentialSpec,
    profile: &StepProfile,
    epsilon: f64,
    l: u32,
    delta: f64,
) -> Result<LayerCertificate, DiagnosticsError> {
    check_shape(u.len(), grid)?;
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(DiagnosticsError::BadParameter {
            name: "epsilon",
            value: epsilon,
        });
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(DiagnosticsError::BadParameter {
            name: "delta",
            value: delta,
        });
    }
    let jumps = profile.jumps();
    if jumps.is_empty() {
        return Err(DiagnosticsError::ProfileHasNoJumps);
    }
    let radius = 2.0 * f64::from(l.max(1)) * delta;
    let (a, b) = (grid.a(), grid.b());
    if jumps[0] - radius <= a || jumps[jumps.len() - 1] + radius >= b {
        return Err(DiagnosticsError::NotAdmissible {
            reason: format!("jump neighborhoods of radius {radius} touch the domain walls"),
        });
    }
    for w in jumps.windows(2) {
        if w[0] + radius >= w[1] - radius {
            return Err(DiagnosticsError::NotAdmissible {
                reason: format!(
                    "neighborhoods of jumps {} and {} overlap at radius {radius}",
                    w[0], w[1]
                ),
            });
        }
    }

    let ux = gradient_samples(u, grid.dx());
    let dx = grid.dx();
    // Sample index range covering (lo, hi) strictly.
    let nodes_in = |lo: f64, hi: f64| -> Vec<usize> {
        (0..u.len())
            .filter(|&j| {
                let x = grid.node(j);
                lo < x && x < hi
            })
            .collect()
    };
    // Minimal F among correct-sign samples; ties go to the sample farthest
    // from the jump, keeping the bracket as deep in the wells as possible.
    let argmin_f = |candidates: &[usize], sign: f64, gamma: f64| -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64, f64)> = None; // (j, F, |x − γ|)
        for &j in candidates {
            if u[j] * sign > 0.0 {
                let fv = pot.energy_density(u[j]);
                let dist = (grid.node(j) - gamma).abs();
                let better = match best {
                    None => true,
                    Some((_, bf, bd)) => fv < bf || (fv == bf && dist > bd),
                };
                if better {
                    best = Some((j, fv, dist));
                }
            }
        }
        best.map(|(j, fv, _)| (j, fv))
    };

    let mut layers = Vec::with_capacity(jumps.len());
    let mut total_energy = 0.0;
    for (i, &gamma) in jumps.iter().enumerate() {
        let left_sign = profile.start_sign() * if i % 2 == 0 { 1.0 } else { -1.0 };
        let right_sign = -left_sign;
        let (jx, f_at_x) = argmin_f(&nodes_in(gamma - 2.0 * delta, gamma), left_sign, gamma)
            .ok_or(DiagnosticsError::NoWellSideSample {
                jump: gamma,
                side: "left",
            })?;
        let (jy, f_at_y) = argmin_f(&nodes_in(gamma, gamma + 2.0 * delta), right_sign, gamma)
            .ok_or(DiagnosticsError::NoWellSideSample {
                jump: gamma,
                side: "right",
            })?;
        // Trapezoid over [x_jx, x_jy] of the static energy density.
        let density = |j: usize| 0.5 * epsilon * ux[j] * ux[j] + pot.energy_density(u[j]) / epsilon;
        let mut sum = 0.5 * (density(jx) + density(jy));
        for j in jx + 1..jy {
            sum += density(j);
        }
        let energy = sum * dx;
        total_energy += energy;
        layers.push(LayerReport {
            jump: gamma,
            x: grid.node(jx),
            f_at_x,
            y: grid.node(jy),
            f_at_y,
            energy,
        });
    }
    let c0 = compute_c0_default(pot)?;
    let margin = total_energy - jumps.len() as f64 * c0;
    Ok(LayerCertificate {
        layers,
        total_energy,
        c0,
        margin,
    })
}

// ═══════════════════════════════════════════════════════════════════
// Exit times
// ═══════════════════════════════════════════════════════════════════

/// Outcome of the interface-drift stopping time over a sampled trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExitOutcome {
    /// First sampled time at which the interface drifted further than δ₁
    /// (in Hausdorff distance) from the initial interface.
    Exceeded { t: f64 },
    /// Never exceeded; carries the last sampled time and the largest
    /// distance seen.
    WithinHorizon { horizon: f64, max_distance: f64 },
}

/// First sampled time t with hausdorff(I(t), I(0)) > delta1, given the
/// recorded (t, interface) series; a vanished interface counts as an
/// exceedance. Errors if the initial interface is empty (the stopping
/// time would be vacuous).
pub fn exit_time(
    samples: &[(f64, IntervalSet)],
    delta1: f64,
) -> Result<ExitOutcome, DiagnosticsError> {
    if !(delta1 > 0.0 && delta1.is_finite()) {
        return Err(DiagnosticsError::BadParameter {
            name: "delta1",
            value: delta1,
        });
    }
    let Some((_, initial)) = samples.first() else {
        return Err(DiagnosticsError::EmptySamples);
    };
    if initial.is_empty() {
        return Err(DiagnosticsError::EmptyInitialInterface);
    }
    let mut max_distance = 0.0f64;
    let mut horizon = samples[0].0;
    for (t, set) in samples {
        let d = hausdorff(set, initial);
        if d.exceeds(delta1) {
            return Ok(ExitOutcome::Exceeded { t: *t });
        }
        if let Some(v) = d.finite() {
            max_distance = max_distance.max(v);
        }
        horizon = *t;
    }
    Ok(ExitOutcome::WithinHorizon {
        horizon,
        max_distance,
    })
}
