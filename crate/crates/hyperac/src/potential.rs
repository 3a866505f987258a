//! Double-well potentials, damping laws, and the constants they induce.
//!
//! A [`PotentialSpec`] bundles the energy density `F`, the reaction term
//! `f = -F'`, and `f'` as plain closures; consistency between them is
//! test-enforced rather than derived symbolically. The wells are fixed at
//! ±1. [`compute_c0`] and [`psi`] evaluate the variational quantities that
//! price a single transition layer.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Shared scalar function. `Arc` so specs clone cheaply and cross threads.
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Tolerance for the well conditions F(±1) = f(±1) = 0 at construction.
pub const WELL_TOL: f64 = 1e-12;

/// Default Simpson panel count for [`compute_c0`] and [`psi`].
///
/// √F is smooth here: F vanishes only quadratically at ±1, so √F behaves
/// like |1 ∓ u| near the endpoints and Simpson keeps its full order.
pub const DEFAULT_PANELS: usize = 2048;

/// Interior mesh size for the sampled positivity check of F on (−1, 1).
/// Odd so the mesh contains u = 0 exactly, where spurious third wells of
/// even potentials sit.
const POSITIVITY_SAMPLES: usize = 1023;

#[derive(Debug, Error)]
pub enum PotentialError {
    #[error("potential '{name}': |{what}({well})| = {value:e} exceeds {WELL_TOL:e}")]
    WellValue {
        name: String,
        what: &'static str,
        well: f64,
        value: f64,
    },
    #[error("potential '{name}': F''({well}) = {curvature:e} is not positive")]
    WellCurvature {
        name: String,
        well: f64,
        curvature: f64,
    },
    #[error("potential '{name}': F({at}) = {value:e} is not positive inside (-1, 1)")]
    NotPositiveInside { name: String, at: f64, value: f64 },
    #[error("F({at}) = {value:e} is negative at a quadrature node")]
    NegativeAtNode { at: f64, value: f64 },
    #[error("quadrature needs at least 2 panels, got {panels}")]
    TooFewPanels { panels: usize },
    #[error("constant damping must be positive, got {value}")]
    NonPositiveDamping { value: f64 },
    #[error("relaxation damping 1 - {tau}*f'(u) dips to {min:e} at u = {at}; needs a positive lower bound")]
    DampingVanishes { tau: f64, min: f64, at: f64 },
}

/// A bistable potential with equal-depth wells at ±1.
///
/// Carries `F`, `f = -F'`, and `f'` as independent closures.
#[derive(Clone)]
pub struct PotentialSpec {
    name: String,
    f_energy: ScalarFn,
    reaction: ScalarFn,
    reaction_prime: ScalarFn,
}

impl fmt::Debug for PotentialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PotentialSpec")
            .field("name", &self.name)
            .finish_non_exhaustive()
    }
}

impl PotentialSpec {
    /// Builds a spec and validates the well structure:
    /// F(±1) and f(±1) vanish to [`WELL_TOL`], F''(±1) > 0 (probed through
    /// f'), and F > 0 on an interior sample mesh of (−1, 1).
    pub fn new(
        name: impl Into<String>,
        f_energy: ScalarFn,
        reaction: ScalarFn,
        reaction_prime: ScalarFn,
    ) -> Result<Self, PotentialError> {
        let spec = Self::raw_unchecked(name, f_energy, reaction, reaction_prime);
        for well in [-1.0, 1.0] {
            let fv = spec.energy_density(well);
            if fv.abs() > WELL_TOL {
                return Err(PotentialError::WellValue {
                    name: spec.name,
                    what: "F",
                    well,
                    value: fv,
                });
            }
            let rv = spec.reaction(well);
            if rv.abs() > WELL_TOL {
                return Err(PotentialError::WellValue {
                    name: spec.name,
                    what: "f",
                    well,
                    value: rv,
                });
            }
            // F'' = -f'; the wells must be genuine minima.
            let curvature = -spec.reaction_prime(well);
            if !(curvature > 0.0) {
                return Err(PotentialError::WellCurvature {
                    name: spec.name,
                    well,
                    curvature,
                });
            }
        }
        let h = 2.0 / (POSITIVITY_SAMPLES + 1) as f64;
        for k in 1..=POSITIVITY_SAMPLES {
            let s = -1.0 + k as f64 * h;
            let v = spec.energy_density(s);
            if !(v > 0.0) {
                return Err(PotentialError::NotPositiveInside {
                    name: spec.name,
                    at: s,
                    value: v,
                });
            }
        }
        Ok(spec)
    }

    /// Builds a spec with no validation. For degenerate test stubs
    /// (e.g. F ≡ 0) that deliberately bypass the well checks.
    pub fn raw_unchecked(
        name: impl Into<String>,
        f_energy: ScalarFn,
        reaction: ScalarFn,
        reaction_prime: ScalarFn,
    ) -> Self {
        Self {
            name: name.into(),
            f_energy,
            reaction,
            reaction_prime,
        }
    }

    /// The standard quartic well F(u) = ¼(u²−1)², f(u) = u − u³.
    pub fn quartic() -> Self {
        Self::new(
            "quartic",
            Arc::new(|u: f64| 0.25 * (u * u - 1.0) * (u * u - 1.0)),
            Arc::new(|u: f64| u - u * u * u),
            Arc::new(|u: f64| 1.0 - 3.0 * u * u),
        )
        .expect("quartic well is valid by construction")
    }

    /// Energy density F(u).
    pub fn energy_density(&self, u: f64) -> f64 {
        (self.f_energy)(u)
    }

    /// Reaction term f(u) = −F′(u).
    pub fn reaction(&self, u: f64) -> f64 {
        (self.reaction)(u)
    }

    /// Derivative f′(u).
    pub fn reaction_prime(&self, u: f64) -> f64 {
        (self.reaction_prime)(u)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// The two equilibria; fixed at (−1, +1) by normalization.
    pub fn wells(&self) -> (f64, f64) {
        (-1.0, 1.0)
    }
}

/// Damping coefficient g(u) with a certified positive lower bound.
#[derive(Clone)]
pub struct DampingSpec {
    g: ScalarFn,
    sigma: f64,
    variant: DampingVariant,
}

/// How the damping was built; kept for reporting.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DampingVariant {
    Constant(f64),
    /// g(u) = 1 − τ·f′(u), the damping under which the equation becomes
    /// a relaxed gradient flow of the reaction term.
    Relaxation(f64),
}

/// Mesh on [−3, 3] used to certify the damping lower bound by sampling.
const DAMPING_SAMPLES: usize = 1200;

impl fmt::Debug for DampingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DampingSpec")
            .field("sigma", &self.sigma)
            .field("variant", &self.variant)
            .finish_non_exhaustive()
    }
}

impl DampingSpec {
    /// Constant damping g ≡ value > 0.
    pub fn constant(value: f64) -> Result<Self, PotentialError> {
        if !(value > 0.0) {
            return Err(PotentialError::NonPositiveDamping { value });
        }
        Ok(Self {
            g: Arc::new(move |_| value),
            sigma: value,
            variant: DampingVariant::Constant(value),
        })
    }

    /// Relaxation damping g(u) = 1 − τ·f′(u).
    ///
    /// The lower bound sigma is the sampled minimum of g over [−3, 3];
    /// construction fails if it is not positive. For the quartic well
    /// the minimum sits at u = 0 and equals 1 − τ, so τ < 1 is required.
    pub fn relaxation(pot: &PotentialSpec, tau: f64) -> Result<Self, PotentialError> {
        let fprime = pot.reaction_prime.clone();
        let g = move |u: f64| 1.0 - tau * fprime(u);
        let mut min = f64::INFINITY;
        let mut argmin = 0.0;
        for k in 0..=DAMPING_SAMPLES {
            let u = -3.0 + 6.0 * k as f64 / DAMPING_SAMPLES as f64;
            let v = g(u);
            if v < min {
                min = v;
                argmin = u;
            }
        }
        if !(min > 0.0) {
            return Err(PotentialError::DampingVanishes {
                tau,
                min,
                at: argmin,
            });
        }
        Ok(Self {
            g: Arc::new(g),
            sigma: min,
            variant: DampingVariant::Relaxation(tau),
        })
    }

    pub fn g(&self, u: f64) -> f64 {
        (self.g)(u)
    }

    /// Certified lower bound: g(u) ≥ sigma on the sampled range.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn variant(&self) -> DampingVariant {
        self.variant
    }
}

/// Composite Simpson over [lo, hi] with `panels` parabolic panels
/// (2·panels subintervals). The integrand may reject a node.
fn simpson(
    lo: f64,
    hi: f64,
    panels: usize,
    eval: impl Fn(f64) -> Result<f64, PotentialError>,
) -> Result<f64, PotentialError> {
    if panels < 2 {
        return Err(PotentialError::TooFewPanels { panels });
    }
    let n = 2 * panels;
    let h = (hi - lo) / n as f64;
    let mut sum = eval(lo)? + eval(hi)?;
    for k in 1..n {
        let x = lo + k as f64 * h;
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * eval(x)?;
    }
    Ok(sum * h / 3.0)
}

/// The minimal energy of one transition layer: c₀ = √2 ∫₋₁¹ √F(s) ds.
///
/// Composite Simpson with `panels` panels; errors if F is negative at a
/// quadrature node. For the quartic well this equals 2√2/3.
pub fn compute_c0(pot: &PotentialSpec, panels: usize) -> Result<f64, PotentialError> {
    let integral = simpson(-1.0, 1.0, panels, |s| {
        let v = pot.energy_density(s);
        if v < 0.0 {
            Err(PotentialError::NegativeAtNode { at: s, value: v })
        } else {
            Ok(v.sqrt())
        }
    })?;
    Ok(std::f64::consts::SQRT_2 * integral)
}

/// [`compute_c0`] at the default panel count.
pub fn compute_c0_default(pot: &PotentialSpec) -> Result<f64, PotentialError> {
    compute_c0(pot, DEFAULT_PANELS)
}

/// Ψ(u) = ∫₀ᵘ √(2F(s)) ds, the layer-energy antiderivative.
///
/// Nondecreasing in u since the integrand is nonnegative; Ψ(1) − Ψ(−1)
/// equals c₀.
pub fn psi(pot: &PotentialSpec, u: f64) -> Result<f64, PotentialError> {
    let eval = |s: f64| {
        let v = pot.energy_density(s);
        if v < 0.0 {
            Err(PotentialError::NegativeAtNode { at: s, value: v })
        } else {
            Ok((2.0 * v).sqrt())
        }
    };
    if u == 0.0 {
        Ok(0.0)
    } else if u > 0.0 {
        simpson(0.0, u, DEFAULT_PANELS, eval)
    } else {
        Ok(-simpson(u, 0.0, DEFAULT_PANELS, eval)?)
    }
}
