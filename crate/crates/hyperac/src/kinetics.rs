//! The kinetic discretization: two counter-propagating densities α and β
//! advected one cell per step, with a reversal probability q = λ·dt and a
//! half-weighted reaction source. Their sum u = α + β solves the damped
//! wave equation τ·u_tt + g(u)·u_t = ε²·u_xx + f(u) in the relaxation
//! regime, and the walls reflect: no mass leaves the interval.
//!
//! The time step is always slaved to the mesh via dt = dx/γ, so transport
//! is exact along characteristics; the CFL-type constraint is q ≤ 1,
//! i.e. dx ≤ 2√τ·ε.

use thiserror::Error;

use crate::potential::{PotentialSpec, ScalarFn};

#[derive(Debug, Error)]
pub enum KineticsError {
    #[error("domain needs finite a < b, got [{a}, {b}]")]
    BadDomain { a: f64, b: f64 },
    #[error("grid needs at least 2 cells, got {cells}")]
    TooFewCells { cells: usize },
    #[error("{name} must be positive and finite, got {value}")]
    BadParameter { name: &'static str, value: f64 },
    #[error(
        "dx = {dx:.6e} exceeds the admissible 2*sqrt(tau)*epsilon = {max_dx:.6e}; \
         use at least {min_cells} cells"
    )]
    Inadmissible {
        dx: f64,
        max_dx: f64,
        min_cells: usize,
    },
    #[error("state has {got} samples but the grid has {expected} cells")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("state time must be finite and nonnegative, got {t}")]
    BadTime { t: f64 },
    #[error("non-finite value in cell {cell} (x = {x}) at t = {t}: numerical blow-up")]
    BlowUp { cell: usize, x: f64, t: f64 },
    #[error("horizon {horizon} precedes the state time {t}")]
    HorizonBeforeState { horizon: f64, t: f64 },
}

/// Uniform cell-centered grid on [a, b]: x_j = a + (j + ½)·dx.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid1D {
    a: f64,
    b: f64,
    cells: usize,
    dx: f64,
}

impl Grid1D {
    pub fn new(a: f64, b: f64, cells: usize) -> Result<Self, KineticsError> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(KineticsError::BadDomain { a, b });
        }
        if cells < 2 {
            return Err(KineticsError::TooFewCells { cells });
        }
        let dx = (b - a) / cells as f64;
        Ok(Self { a, b, cells, dx })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Center of cell j.
    pub fn node(&self, j: usize) -> f64 {
        self.a + (j as f64 + 0.5) * self.dx
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.cells).map(|j| self.node(j))
    }

    /// Midpoint quadrature: each cell-centered sample represents one cell
    /// of width dx, so ∫ ≈ Σ v_j·dx. This covers the full interval [a, b]
    /// (a trapezoid over the nodes alone would miss the two half-cells at
    /// the walls) and is exact for odd and periodic integrands sampled on
    /// the symmetric node set.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        values.iter().sum::<f64>() * self.dx
    }
}

/// Derived step parameters: reversal rate λ = 1/(2τ), speed γ = ε/√τ,
/// step dt = dx/γ, reversal probability q = λ·dt, persistence p = 1 − q.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchemeParams {
    epsilon: f64,
    tau: f64,
    lambda: f64,
    gamma: f64,
    dt: f64,
    p: f64,
    q: f64,
}

impl SchemeParams {
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Pure-transport test mode: λ = 0 (p = 1), so densities advect and
    /// reflect without reversing. This corresponds to no finite τ and is
    /// excluded from physics presets; epsilon and tau are reported as
    /// infinite.
    pub fn transport(gamma: f64, grid: &Grid1D) -> Result<Self, KineticsError> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(KineticsError::BadParameter {
                name: "gamma",
                value: gamma,
            });
        }
        Ok(Self {
            epsilon: f64::INFINITY,
            tau: f64::INFINITY,
            lambda: 0.0,
            gamma,
            dt: grid.dx() / gamma,
            p: 1.0,
            q: 0.0,
        })
    }
}

/// Derives the scheme parameters for (ε, τ) on a grid, enforcing the
/// admissibility bound q ≤ 1, i.e. dx ≤ 2√τ·ε.
pub fn derive_params(epsilon: f64, tau: f64, grid: &Grid1D) -> Result<SchemeParams, KineticsError> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(KineticsError::BadParameter {
            name: "epsilon",
            value: epsilon,
        });
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(KineticsError::BadParameter {
            name: "tau",
            value: tau,
        });
    }
    let max_dx = 2.0 * tau.sqrt() * epsilon;
    // The boundary case dx = 2√τ·ε (q = 1, full reversal) is admissible;
    // the relative slack only absorbs rounding in dx = (b−a)/M.
    if grid.dx() > max_dx * (1.0 + 1e-12) {
        let min_cells = ((grid.b() - grid.a()) / max_dx).ceil() as usize;
        return Err(KineticsError::Inadmissible {
            dx: grid.dx(),
            max_dx,
            min_cells,
        });
    }
    let lambda = 1.0 / (2.0 * tau);
    let gamma = epsilon / tau.sqrt();
    let dt = grid.dx() / gamma;
    let mut q = (lambda * dt).min(1.0);
    // Round-trip through p so that p + q == 1 holds exactly in floating
    // point; the stepper's discrete conservation law depends on it.
    let p = 1.0 - q;
    q = 1.0 - p;
    Ok(SchemeParams {
        epsilon,
        tau,
        lambda,
        gamma,
        dt,
        p,
        q,
    })
}

/// The pair of direction densities at one time level.
#[derive(Clone, Debug, PartialEq)]
pub struct KineticState {
    alpha: Vec<f64>,
    beta: Vec<f64>,
    t: f64,
    grid: Grid1D,
}

impl KineticState {
    pub fn new(
        grid: Grid1D,
        alpha: Vec<f64>,
        beta: Vec<f64>,
        t: f64,
    ) -> Result<Self, KineticsError> {
        if alpha.len() != grid.cells() {
            return Err(KineticsError::ShapeMismatch {
                expected: grid.cells(),
                got: alpha.len(),
            });
        }
        if beta.len() != grid.cells() {
            return Err(KineticsError::ShapeMismatch {
                expected: grid.cells(),
                got: beta.len(),
            });
        }
        if !(t.is_finite() && t >= 0.0) {
            return Err(KineticsError::BadTime { t });
        }
        Ok(Self {
            alpha,
            beta,
            t,
            grid,
        })
    }

    /// Builds the state from field samples u and v via α = (u+v)/2,
    /// β = (u−v)/2.
    pub fn from_u_v(grid: Grid1D, u: &[f64], v: &[f64], t: f64) -> Result<Self, KineticsError> {
        if u.len() != v.len() {
            return Err(KineticsError::ShapeMismatch {
                expected: u.len(),
                got: v.len(),
            });
        }
        let alpha: Vec<f64> = u.iter().zip(v).map(|(u, v)| 0.5 * (u + v)).collect();
        let beta: Vec<f64> = u.iter().zip(v).map(|(u, v)| 0.5 * (u - v)).collect();
        Self::new(grid, alpha, beta, t)
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn grid(&self) -> Grid1D {
        self.grid
    }

    /// The field u = α + β.
    pub fn u(&self) -> Vec<f64> {
        self.alpha
            .iter()
            .zip(&self.beta)
            .map(|(a, b)| a + b)
            .collect()
    }

    /// Total mass Σ(α_j + β_j); conserved exactly by transport and
    /// reflection (only the reaction source changes it).
    pub fn mass(&self) -> f64 {
        self.alpha.iter().sum::<f64>() + self.beta.iter().sum::<f64>()
    }
}

/// Initial profile u₀ and velocity u₁ as closures, plus a label.
#[derive(Clone)]
pub struct InitialData {
    u0: ScalarFn,
    u1: ScalarFn,
    description: String,
}

impl InitialData {
    pub fn new(u0: ScalarFn, u1: ScalarFn, description: impl Into<String>) -> Self {
        Self {
            u0,
            u1,
            description: description.into(),
        }
    }

    pub fn u0(&self, x: f64) -> f64 {
        (self.u0)(x)
    }

    pub fn u1(&self, x: f64) -> f64 {
        (self.u1)(x)
    }

    pub fn description(&self) -> &str {
        &self.description
    }
}

/// Residual of the compatibility condition ∫ₐᵇ [f(u₀) − u₁] ds, evaluated
/// by midpoint quadrature on the cell centers. A nonzero residual means
/// the reflecting walls cannot exactly balance the initial flux; callers
/// decide whether to warn.
pub fn check_compatibility(data: &InitialData, grid: &Grid1D, pot: &PotentialSpec) -> f64 {
    let h: Vec<f64> = grid
        .nodes()
        .map(|x| pot.reaction(data.u0(x)) - data.u1(x))
        .collect();
    grid.integrate(&h)
}

/// Transforms (u₀, u₁) into the kinetic pair at t = 0:
///
///   α₀(x_j) = ½(u₀(x_j) + I_j/γ),  β₀(x_j) = ½(u₀(x_j) − I_j/γ),
///
/// where I_j = ∫ₐ^{x_j} [f(u₀) − u₁] ds by cumulative trapezoid with
/// I(a) = 0 (the first panel spans the half-cell a → x₀).
pub fn build_initial_state(
    data: &InitialData,
    grid: &Grid1D,
    params: &SchemeParams,
    pot: &PotentialSpec,
) -> KineticState {
    let m = grid.cells();
    let mut alpha = Vec::with_capacity(m);
    let mut beta = Vec::with_capacity(m);
    let h = |x: f64| pot.reaction(data.u0(x)) - data.u1(x);
    let mut prev_x = grid.a();
    let mut prev_h = h(prev_x);
    let mut acc = 0.0;
    for j in 0..m {
        let x = grid.node(j);
        let hj = h(x);
        acc += 0.5 * (prev_h + hj) * (x - prev_x);
        let w = acc / params.gamma();
        let u0 = data.u0(x);
        alpha.push(0.5 * (u0 + w));
        beta.push(0.5 * (u0 - w));
        prev_x = x;
        prev_h = hj;
    }
    KineticState {
        alpha,
        beta,
        t: 0.0,
        grid: *grid,
    }
}

/// One explicit step. Interior cells advect upwind with reversal:
///
///   α_j⁺ = p·α_{j−1} + q·β_{j−1} + ½dt·f(u_{j−1})   (j ≥ 1)
///   β_j⁺ = p·β_{j+1} + q·α_{j+1} + ½dt·f(u_{j+1})   (j ≤ M−2)
///
/// At the walls the inflow is the same cell's outgoing density, reflected:
/// α₀⁺ sources from (β₀, α₀) and β_{M−1}⁺ from (α_{M−1}, β_{M−1}). This
/// realizes α(a) = β(a), β(b) = α(b) and conserves Σ(α+β) exactly when
/// f ≡ 0.
pub fn step(
    state: &KineticState,
    params: &SchemeParams,
    pot: &PotentialSpec,
) -> Result<KineticState, KineticsError> {
    let m = state.grid.cells();
    let (p, q) = (params.p(), params.q());
    let half_dt = 0.5 * params.dt();
    let a = &state.alpha;
    let b = &state.beta;
    // Source term at the upwind cell, shared by the α- and β-updates.
    let src: Vec<f64> = (0..m).map(|j| half_dt * pot.reaction(a[j] + b[j])).collect();

    let mut alpha = Vec::with_capacity(m);
    let mut beta = Vec::with_capacity(m);
    alpha.push(p * b[0] + q * a[0] + src[0]);
    for j in 1..m {
        alpha.push(p * a[j - 1] + q * b[j - 1] + src[j - 1]);
    }
    for j in 0..m - 1 {
        beta.push(p * b[j + 1] + q * a[j + 1] + src[j + 1]);
    }
    beta.push(p * a[m - 1] + q * b[m - 1] + src[m - 1]);

    let t = state.t + params.dt();
    for (j, (av, bv)) in alpha.iter().zip(&beta).enumerate() {
        if !(av.is_finite() && bv.is_finite()) {
            return Err(KineticsError::BlowUp {
                cell: j,
                x: state.grid.node(j),
                t,
            });
        }
    }
    Ok(KineticState {
        alpha,
        beta,
        t,
        grid: state.grid,
    })
}

/// Field samples recovered from a kinetic state.
#[derive(Clone, Debug)]
pub struct ReconstructedFields {
    /// u = α + β.
    pub u: Vec<f64>,
    /// v = α − β (the flux variable).
    pub v: Vec<f64>,
    /// u_t = f(u) − γ·v_x, with v_x by centered differences (one-sided at
    /// the two wall cells).
    pub u_t: Vec<f64>,
}

pub fn reconstruct(
    state: &KineticState,
    params: &SchemeParams,
    pot: &PotentialSpec,
) -> ReconstructedFields {
    let m = state.grid.cells();
    let dx = state.grid.dx();
    let gamma = params.gamma();
    let u: Vec<f64> = state.u();
    let v: Vec<f64> = state
        .alpha
        .iter()
        .zip(&state.beta)
        .map(|(a, b)| a - b)
        .collect();
    let mut u_t = Vec::with_capacity(m);
    for j in 0..m {
        let vx = if j == 0 {
            (v[1] - v[0]) / dx
        } else if j == m - 1 {
            (v[m - 1] - v[m - 2]) / dx
        } else {
            (v[j + 1] - v[j - 1]) / (2.0 * dx)
        };
        u_t.push(pot.reaction(u[j]) - gamma * vx);
    }
    ReconstructedFields { u, v, u_t }
}

/// Read-only trajectory callback; invoked on the initial state and after
/// every step. Observers must not mutate the state they see.
pub trait Observer {
    fn on_state(&mut self, state: &KineticState);
}

/// Steps until t ≥ horizon, feeding each state (including the initial one)
/// to the observers. The loop crosses the horizon rather than shortening
/// the final step: dt stays slaved to dx throughout, so the final time can
/// overshoot by at most one dt. Deterministic: identical inputs give
/// bit-identical trajectories.
pub fn run(
    state: KineticState,
    params: &SchemeParams,
    pot: &PotentialSpec,
    horizon: f64,
    observers: &mut [&mut dyn Observer],
) -> Result<KineticState, KineticsError> {
    if horizon < state.t {
        return Err(KineticsError::HorizonBeforeState {
            horizon,
            t: state.t,
        });
    }
    let mut state = state;
    for obs in observers.iter_mut() {
        obs.on_state(&state);
    }
    // Relative guard so accumulated rounding in t never costs a spurious
    // extra step when the horizon is an exact multiple of dt.
    let stop = horizon - 1e-6 * params.dt();
    while state.t < stop {
        state = step(&state, params, pot)?;
        for obs in observers.iter_mut() {
            obs.on_state(&state);
        }
    }
    Ok(state)
}
