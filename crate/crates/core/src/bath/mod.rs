//! First-principles check of the quasi-boson reduction.
//!
//! A single cavity at `ω_c` couples to a continuum with density of states
//! `ρ(ω)` and coupling `η(ω)`. Eliminating the continuum gives the complex
//! frequency `ω_c + δω_c − iγ` with
//!
//! ```text
//! γ     = π ρ(ω_c) |η(ω_c)|²
//! δω_c  = P∫ ρ(ω)|η(ω)|² / (ω_c − ω) dω
//! ```
//!
//! Here the continuum is discretized on a midpoint grid, the cavity-plus-bath
//! Hamiltonian is diagonalized exactly ([`universe`]) and the decay rate and
//! frequency shift read off the cavity survival amplitude are compared with
//! the two formulas above.
//!
//! Downstream code keeps the bare `ω_c`; `δω_c` is a diagnostic only.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::params::ArrayParams;

pub mod universe;

pub use universe::{
    dominant_frequency_shift, fit_decay, linear_time_grid, survival_probability, UniverseSpectrum,
};

/// Minimum band width, in units of the golden-rule rate, for a decay fit.
pub const MIN_WIDTH_OVER_GAMMA: f64 = 100.0;

/// `2γ/ω_c` above which the quasi-boson commutator is flagged unreliable.
pub const QUASI_BOSON_WARNING_THRESHOLD: f64 = 0.01;

/// A real function of frequency on the bath band.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectralShape {
    Flat(f64),
    /// `intercept + slope·ω`.
    LinearTilt {
        intercept: f64,
        slope: f64,
    },
    /// Piecewise-linear interpolation through `(ω, value)` nodes sorted by
    /// `ω`; constant beyond the end nodes.
    Tabulated(Vec<(f64, f64)>),
}

impl SpectralShape {
    pub fn eval(&self, omega: f64) -> f64 {
        match self {
            SpectralShape::Flat(v) => *v,
            SpectralShape::LinearTilt { intercept, slope } => intercept + slope * omega,
            SpectralShape::Tabulated(nodes) => interpolate(nodes, omega),
        }
    }

    fn check(&self, name: &str) -> Result<()> {
        if let SpectralShape::Tabulated(nodes) = self {
            if nodes.len() < 2 {
                return Err(Error::InvalidBath(format!(
                    "{name}: table needs at least 2 nodes"
                )));
            }
            if !nodes.windows(2).all(|w| w[0].0 < w[1].0) {
                return Err(Error::InvalidBath(format!(
                    "{name}: table frequencies must be strictly increasing"
                )));
            }
        }
        Ok(())
    }
}

fn interpolate(nodes: &[(f64, f64)], omega: f64) -> f64 {
    let (first, last) = (nodes[0], nodes[nodes.len() - 1]);
    if omega <= first.0 {
        return first.1;
    }
    if omega >= last.0 {
        return last.1;
    }
    let i = nodes.partition_point(|n| n.0 <= omega);
    let (a, b) = (nodes[i - 1], nodes[i]);
    a.1 + (b.1 - a.1) * (omega - a.0) / (b.0 - a.0)
}

/// Continuum coupled to a cavity at `omega_c`.
#[derive(Debug, Clone, PartialEq)]
pub struct BathSpec {
    pub omega_c: f64,
    pub density: SpectralShape,
    pub coupling: SpectralShape,
    pub omega_min: f64,
    pub omega_max: f64,
}

impl BathSpec {
    /// Flat band of width `width` centred on `omega_c` with `ρ|η|² = γ/π`.
    pub fn flat(omega_c: f64, gamma: f64, width: f64) -> Self {
        Self {
            omega_c,
            density: SpectralShape::Flat(gamma / PI),
            coupling: SpectralShape::Flat(1.0),
            omega_min: omega_c - width / 2.0,
            omega_max: omega_c + width / 2.0,
        }
    }

    /// `ρ|η|² = slope·ω` on `[omega_min, omega_max]`.
    pub fn tilt(omega_c: f64, slope: f64, omega_min: f64, omega_max: f64) -> Self {
        Self {
            omega_c,
            density: SpectralShape::LinearTilt {
                intercept: 0.0,
                slope,
            },
            coupling: SpectralShape::Flat(1.0),
            omega_min,
            omega_max,
        }
    }

    /// Tilted band centred on `omega_c` whose golden-rule rate is `gamma`.
    pub fn centred_tilt(omega_c: f64, gamma: f64, width: f64) -> Self {
        let slope = gamma / (PI * omega_c);
        Self::tilt(omega_c, slope, omega_c - width / 2.0, omega_c + width / 2.0)
    }

    /// `ρ(ω)·|η(ω)|²`.
    pub fn spectral_weight(&self, omega: f64) -> f64 {
        self.density.eval(omega) * self.coupling.eval(omega).powi(2)
    }

    pub fn band_width(&self) -> f64 {
        self.omega_max - self.omega_min
    }

    /// Structural invariants: `ω_min < ω_c < ω_max` and a finite,
    /// non-negative density on the band.
    pub fn validate(&self) -> Result<&Self> {
        if !(self.omega_min < self.omega_c && self.omega_c < self.omega_max) {
            return Err(Error::InvalidBath(format!(
                "band [{}, {}] does not contain omega_c = {}",
                self.omega_min, self.omega_max, self.omega_c
            )));
        }
        self.density.check("density")?;
        self.coupling.check("coupling")?;
        const PROBES: usize = 257;
        for i in 0..PROBES {
            let w = self.omega_min + self.band_width() * i as f64 / (PROBES - 1) as f64;
            let rho = self.density.eval(w);
            let weight = self.spectral_weight(w);
            if !(rho >= 0.0) || !weight.is_finite() {
                return Err(Error::InvalidBath(format!(
                    "density must be finite and non-negative on the band (ρ({w}) = {rho})"
                )));
            }
        }
        Ok(self)
    }

    /// [`BathSpec::validate`] plus the width needed to see exponential decay:
    /// `W ≥ 100·γ`.
    pub fn validate_for_decay(&self) -> Result<&Self> {
        self.validate()?;
        let gamma = golden_rule(self);
        if self.band_width() < MIN_WIDTH_OVER_GAMMA * gamma {
            return Err(Error::InvalidBath(format!(
                "band width {} is below {MIN_WIDTH_OVER_GAMMA}·γ = {}",
                self.band_width(),
                MIN_WIDTH_OVER_GAMMA * gamma
            )));
        }
        Ok(self)
    }
}

/// Finite set of bath oscillators standing in for the continuum.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteBath {
    /// Midpoints `ω_min + (m + ½)Δω`.
    pub mode_frequencies: Vec<f64>,
    /// `g_m = η(ω_m)·sqrt(ρ(ω_m)·Δω)`.
    pub mode_couplings: Vec<f64>,
    pub spacing: f64,
}

impl DiscreteBath {
    pub fn len(&self) -> usize {
        self.mode_frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mode_frequencies.is_empty()
    }

    /// `Σ|g_m|²`, the midpoint approximation of `∫ρ|η|²dω`.
    pub fn total_coupling(&self) -> f64 {
        self.mode_couplings.iter().map(|g| g * g).sum()
    }

    /// Time after which the discrete spectrum starts to revive, `2π/Δω`.
    pub fn recurrence_time(&self) -> f64 {
        2.0 * PI / self.spacing
    }
}

/// Midpoint-rule discretization of the continuum into `m_modes` oscillators.
pub fn discretize(spec: &BathSpec, m_modes: usize) -> Result<DiscreteBath> {
    spec.validate()?;
    if m_modes < 2 {
        return Err(Error::InvalidBath(format!(
            "need at least 2 bath modes, got {m_modes}"
        )));
    }
    let spacing = spec.band_width() / m_modes as f64;
    let mode_frequencies: Vec<f64> = (0..m_modes)
        .map(|m| spec.omega_min + (m as f64 + 0.5) * spacing)
        .collect();
    let mode_couplings = mode_frequencies
        .iter()
        .map(|&w| spec.coupling.eval(w) * (spec.density.eval(w) * spacing).sqrt())
        .collect();
    Ok(DiscreteBath {
        mode_frequencies,
        mode_couplings,
        spacing,
    })
}

/// Markovian decay rate `γ = π ρ(ω_c) |η(ω_c)|²`.
pub fn golden_rule(spec: &BathSpec) -> f64 {
    PI * spec.spectral_weight(spec.omega_c)
}

/// Principal value `P∫ ρ|η|²/(ω_c − ω) dω` over the bath band.
///
/// Inside the largest window `[ω_c − h, ω_c + h]` that fits in the band the
/// points are paired as `ω_c ± u`, which turns the integrand into the
/// regular function `(f(ω_c − u) − f(ω_c + u))/u`. The remainder of the band
/// is integrated directly. Both pieces use the composite midpoint rule, so
/// the error falls as the square of the step. `quadrature_points` is split
/// between the two pieces in proportion to their lengths.
pub fn lamb_shift(spec: &BathSpec, quadrature_points: usize) -> Result<f64> {
    spec.validate()?;
    let f = |w: f64| spec.spectral_weight(w);
    let wc = spec.omega_c;
    let below = wc - spec.omega_min;
    let above = spec.omega_max - wc;
    let half = below.min(above);
    let outside = spec.band_width() - 2.0 * half;
    let total = half + outside;
    let n_window = if outside > 0.0 {
        ((quadrature_points as f64) * half / total).round() as usize
    } else {
        quadrature_points
    };
    if n_window < 1 {
        return Err(Error::InvalidBath(format!(
            "omega_c = {wc} is too close to a band edge for a symmetric principal-value window \
             with {quadrature_points} points"
        )));
    }
    let du = half / n_window as f64;
    let window: f64 = (0..n_window)
        .map(|i| {
            let u = (i as f64 + 0.5) * du;
            (f(wc - u) - f(wc + u)) / u
        })
        .sum::<f64>()
        * du;

    let n_out = quadrature_points.saturating_sub(n_window).max(1);
    let rest = if outside > 0.0 {
        let (a, b) = if above > below {
            (wc + half, spec.omega_max)
        } else {
            (spec.omega_min, wc - half)
        };
        let dw = (b - a) / n_out as f64;
        (0..n_out)
            .map(|i| {
                let w = a + (i as f64 + 0.5) * dw;
                f(w) / (wc - w)
            })
            .sum::<f64>()
            * dw
    } else {
        0.0
    };
    Ok(window + rest)
}

/// `|[b, b†] − 1| = 2γ/ω_c`, i.e. `4/Q` with `Q = 2ω_c/γ`.
pub fn bosonicity_deviation(params: &ArrayParams) -> f64 {
    2.0 * params.gamma() / params.omega_c
}

/// True when [`bosonicity_deviation`] stays at or below
/// [`QUASI_BOSON_WARNING_THRESHOLD`].
pub fn quasi_boson_reliable(params: &ArrayParams) -> bool {
    bosonicity_deviation(params) <= QUASI_BOSON_WARNING_THRESHOLD
}
