//! Exact stationary scattering on the finite lossy chain.
//!
//! The `N` lossy sites obey
//!
//! ```text
//! ω e_j = ω_eff e_j − α ω_eff (e_{j−1} + e_{j+1}),   j = 1..N,
//! ```
//!
//! and are embedded between two semi-infinite lossless chains with the same
//! `ω_c` and `α`. In the leads the amplitudes are exact plane waves
//! `e^{ikjL}`, where `k` solves the lead recurrence
//! `ω = ω_c − 2αω_c·cos(kL)`; with this sign `e^{ikjL}` (`0 < kL < π`) moves
//! to the right. Each site is a 2×2 transfer matrix acting on
//! `(e_j, e_{j−1})`; the chain product is kept normalized and the scale is
//! carried as a logarithm.
//!
//! The result is compared against the product formula of
//! [`crate::transport::total_transmission`].

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::params::ArrayParams;
use crate::transport::{open_band_grid, total_transmission, wavevector_of};
use Incidence::{FromLeft, FromRight};

/// Below this `|sin kL|` the result is flagged unreliable.
pub const EDGE_RELIABILITY: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleResult {
    pub r_total: Complex64,
    pub t_total: Complex64,
    /// `|t|^{2N}` from the product formula.
    pub t_product: f64,
    /// `| |t_total|² − t_product | / t_product`.
    pub relative_deviation: f64,
    /// False within [`EDGE_RELIABILITY`] of a band edge.
    pub reliable: bool,
}

impl OracleResult {
    pub fn t_exact(&self) -> f64 {
        self.t_total.norm_sqr()
    }

    pub fn flux(&self) -> f64 {
        self.r_total.norm_sqr() + self.t_total.norm_sqr()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Incidence {
    FromLeft,
    FromRight,
}

/// Amplitude pair `(e_{j+1}, e_j)` stored as `exp(log_scale)·unit`.
#[derive(Debug, Clone, Copy)]
struct ScaledPair {
    unit: [Complex64; 2],
    log_scale: f64,
}

impl ScaledPair {
    fn new(v: [Complex64; 2]) -> Self {
        let mut pair = Self {
            unit: v,
            log_scale: 0.0,
        };
        pair.renormalize();
        pair
    }

    fn renormalize(&mut self) {
        let norm = self.unit[0].norm().max(self.unit[1].norm());
        if norm > 0.0 && norm.is_finite() {
            self.unit = self.unit.map(|z| z / norm);
            self.log_scale += norm.ln();
        }
    }

    /// Site transfer matrix `[[a, −1], [1, 0]]`: `(e_j, e_{j−1}) ↦ (e_{j+1}, e_j)`.
    fn forward(&mut self, a: Complex64) {
        let [cur, prev] = self.unit;
        self.unit = [a * cur - prev, cur];
        self.renormalize();
    }

    /// Inverse matrix `[[0, 1], [−1, a]]`: `(e_{j+1}, e_j) ↦ (e_j, e_{j−1})`.
    fn backward(&mut self, a: Complex64) {
        let [next, cur] = self.unit;
        self.unit = [cur, a * cur - next];
        self.renormalize();
    }
}

/// Solves `x0·c0 + x1·c1 = rhs`.
fn solve2(c0: [Complex64; 2], c1: [Complex64; 2], rhs: [Complex64; 2]) -> Option<[Complex64; 2]> {
    let det = c0[0] * c1[1] - c1[0] * c0[1];
    if det.norm() == 0.0 || !det.is_finite() {
        return None;
    }
    Some([
        (rhs[0] * c1[1] - c1[0] * rhs[1]) / det,
        (c0[0] * rhs[1] - rhs[0] * c0[1]) / det,
    ])
}

/// `exp(−log_scale)/z` without forming the scale itself.
fn inverse_rescaled(z: Complex64, log_scale: f64) -> Complex64 {
    Complex64::from_polar((-z.norm().ln() - log_scale).exp(), -z.arg())
}

/// Global `(r, t)` for a chain with per-site recurrence coefficients
/// `a_j` at sites `1..=len`, between lossless leads with wavevector `kl`
/// (`e^{ikj}` right-moving).
///
/// The amplitudes are propagated from the outgoing side towards the
/// incoming side, where the physical solution is the growing one: start from
/// a unit transmitted wave, transfer it across the chain, split the result
/// into incident and reflected lead waves and divide by the incident part.
fn solve_chain(
    coefficients: &[Complex64],
    kl: f64,
    incidence: Incidence,
) -> Option<(Complex64, Complex64)> {
    let n = coefficients.len() as f64;
    let wave = |from: f64, sign: f64| {
        [
            Complex64::from_polar(1.0, sign * (from + 1.0) * kl),
            Complex64::from_polar(1.0, sign * from * kl),
        ]
    };
    let (pair, incident, reflected) = match incidence {
        FromLeft => {
            // (e_{N+1}, e_N) = e^{ik(N+1)}, e^{ikN}  →  (e_1, e_0).
            let mut pair = ScaledPair::new(wave(n, 1.0));
            for &a in coefficients.iter().rev() {
                pair.backward(a);
            }
            (pair, wave(0.0, 1.0), wave(0.0, -1.0))
        }
        FromRight => {
            // (e_1, e_0) = e^{−ik}, 1  →  (e_{N+1}, e_N).
            let mut pair = ScaledPair::new(wave(0.0, -1.0));
            for &a in coefficients {
                pair.forward(a);
            }
            (pair, wave(n, -1.0), wave(n, 1.0))
        }
    };
    let [inc, refl] = solve2(incident, reflected, pair.unit)?;
    if inc.norm() == 0.0 {
        return None;
    }
    Some((refl / inc, inverse_rescaled(inc, pair.log_scale)))
}

/// Lead wavevector of the lossless lead at `ω`, right-moving branch.
fn lead_wavevector(omega: f64, params: &ArrayParams) -> Result<f64> {
    // The recurrence has hopping −αω_c, so the lead band reads
    // ω = ω_c − 2αω_c cos kL: reflect the transport wavevector.
    let kl_band = wavevector_of(omega, params)?;
    if kl_band.sin().abs() < f64::EPSILON {
        return Err(Error::BandEdge { omega });
    }
    Ok(std::f64::consts::PI - kl_band)
}

fn chain_coefficients(omega: f64, params: &ArrayParams) -> Result<Vec<Complex64>> {
    if params.alpha == 0.0 {
        return Err(Error::DecoupledChain);
    }
    let omega_eff = params.derive_rates().omega_eff;
    let a = (omega_eff - omega) / (omega_eff * params.alpha);
    Ok(vec![a; params.n_cavities])
}

/// Global reflection and transmission amplitudes of the whole array.
pub fn chain_amplitudes(
    omega: f64,
    params: &ArrayParams,
    incidence: Incidence,
) -> Result<(Complex64, Complex64)> {
    let coefficients = chain_coefficients(omega, params)?;
    let kl = lead_wavevector(omega, params)?;
    solve_chain(&coefficients, kl, incidence).ok_or(Error::BandEdge { omega })
}

pub fn exact_scattering(omega: f64, params: &ArrayParams) -> Result<OracleResult> {
    let (r_total, t_total) = chain_amplitudes(omega, params, FromLeft)?;
    let t_product = total_transmission(omega, params)?;
    let relative_deviation = if t_product > 0.0 {
        (t_total.norm_sqr() - t_product).abs() / t_product
    } else {
        f64::INFINITY
    };
    let kl = wavevector_of(omega, params)?;
    Ok(OracleResult {
        r_total,
        t_total,
        t_product,
        relative_deviation,
        reliable: kl.sin().abs() >= EDGE_RELIABILITY,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviationRow {
    pub omega: f64,
    pub t_exact: f64,
    pub t_product: f64,
    pub deviation: f64,
    pub reliable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviationTable {
    pub rows: Vec<DeviationRow>,
    /// Largest deviation over reliable rows.
    pub max_deviation: f64,
    /// Largest deviation with `|ω − ω_c| ≤ αω_c`.
    pub max_mid_band_deviation: f64,
}

/// Exact versus product-formula transmission across the open band.
pub fn deviation_sweep(params: &ArrayParams, n_points: usize) -> Result<DeviationTable> {
    if n_points < 2 {
        return Err(Error::InvalidParams(format!(
            "deviation sweep needs at least 2 points, got {n_points}"
        )));
    }
    let rows = open_band_grid(params, n_points)
        .par_iter()
        .map(|&omega| {
            exact_scattering(omega, params).map(|res| DeviationRow {
                omega,
                t_exact: res.t_exact(),
                t_product: res.t_product,
                deviation: res.relative_deviation,
                reliable: res.reliable,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let half_mid = params.alpha * params.omega_c;
    let max_over = |keep: &dyn Fn(&DeviationRow) -> bool| {
        rows.iter()
            .filter(|r| keep(r))
            .map(|r| r.deviation)
            .fold(0.0, f64::max)
    };
    let max_deviation = max_over(&|r| r.reliable);
    let max_mid_band_deviation = max_over(&|r| (r.omega - params.omega_c).abs() <= half_mid);
    Ok(DeviationTable {
        rows,
        max_deviation,
        max_mid_band_deviation,
    })
}
