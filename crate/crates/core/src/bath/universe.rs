//! Exact single-excitation dynamics of one cavity coupled to a discrete bath.
//!
//! The Hamiltonian is the real symmetric arrowhead matrix
//!
//! ```text
//! ⎡ ω_c  g_1 … g_M ⎤
//! ⎢ g_1  ω_1       ⎥
//! ⎢  ⋮       ⋱     ⎥
//! ⎣ g_M        ω_M ⎦
//! ```
//!
//! Its eigenvalues are the roots of the secular function
//! `f(λ) = λ − ω_c − Σ g_m²/(λ − ω_m)`, one strictly between each pair of
//! adjacent bath frequencies plus one below and one above the bath band.
//! Eigenvectors follow in closed form, `v ∝ (1, g_m/(λ − ω_m))`. Each root is
//! stored as an offset from its nearest bath frequency so that the small
//! differences `λ − ω_m` keep full relative precision.

use num_complex::Complex64;

use super::DiscreteBath;
use crate::error::{Error, Result};

const MAX_ROOT_ITERATIONS: usize = 200;
const MIN_FIT_SAMPLES: usize = 8;

#[derive(Debug, Clone, Copy)]
struct Root {
    /// Index into the coupled poles the offset is measured from.
    anchor: usize,
    /// `λ − pole[anchor]`.
    offset: f64,
}

/// Diagonalized cavity-plus-bath Hamiltonian.
#[derive(Debug, Clone)]
pub struct UniverseSpectrum {
    omega_c: f64,
    /// Bath frequencies with non-zero coupling, ascending.
    poles: Vec<f64>,
    couplings: Vec<f64>,
    /// Number of modes in the original bath, including decoupled ones.
    bath_len: usize,
    roots: Vec<Root>,
    /// Cavity component `⟨c|v⟩` of each eigenvector.
    cavity_components: Vec<f64>,
}

impl UniverseSpectrum {
    pub fn diagonalize(omega_c: f64, bath: &DiscreteBath) -> Result<Self> {
        if bath.mode_frequencies.len() != bath.mode_couplings.len() {
            return Err(Error::Diagonalization(
                "bath frequencies and couplings differ in length".into(),
            ));
        }
        if !omega_c.is_finite()
            || bath
                .mode_frequencies
                .iter()
                .chain(&bath.mode_couplings)
                .any(|x| !x.is_finite())
        {
            return Err(Error::Diagonalization("non-finite matrix entry".into()));
        }
        // Uncoupled modes are eigenvectors on their own and never populated.
        let (poles, couplings): (Vec<f64>, Vec<f64>) = bath
            .mode_frequencies
            .iter()
            .zip(&bath.mode_couplings)
            .filter(|(_, g)| **g != 0.0)
            .map(|(w, g)| (*w, *g))
            .unzip();
        if !poles.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Diagonalization(
                "coupled bath frequencies must be distinct and ascending".into(),
            ));
        }

        let mut spectrum = Self {
            omega_c,
            poles,
            couplings,
            bath_len: bath.len(),
            roots: Vec::new(),
            cavity_components: Vec::new(),
        };
        spectrum.roots = spectrum.secular_roots()?;
        spectrum.cavity_components = spectrum
            .roots
            .iter()
            .map(|&root| {
                let s: f64 = spectrum
                    .couplings
                    .iter()
                    .enumerate()
                    .map(|(i, g)| (g / spectrum.gap(root, i)).powi(2))
                    .sum();
                1.0 / (1.0 + s).sqrt()
            })
            .collect();
        Ok(spectrum)
    }

    /// `λ − pole[i]` evaluated from the anchored offset.
    fn gap(&self, root: Root, i: usize) -> f64 {
        root.offset + (self.poles[root.anchor] - self.poles[i])
    }

    /// Secular function times `Π|λ − ω_j|` over the poles bounding the
    /// search interval, so the result stays finite on its closed ends.
    /// `bounds` pairs each such pole with the sign of `λ − ω_j` inside the
    /// interval.
    fn bracketed_secular(&self, anchor: usize, offset: f64, bounds: &[(usize, f64)]) -> f64 {
        let root = Root { anchor, offset };
        let lambda_minus_wc = (self.poles[anchor] - self.omega_c) + offset;
        let factor: f64 = bounds
            .iter()
            .map(|&(j, _)| self.gap(root, j).abs())
            .product();
        let mut value = lambda_minus_wc * factor;
        for (i, g) in self.couplings.iter().enumerate() {
            let g2 = g * g;
            if let Some(&(_, sign)) = bounds.iter().find(|(j, _)| *j == i) {
                let others: f64 = bounds
                    .iter()
                    .filter(|(j, _)| *j != i)
                    .map(|&(j, _)| self.gap(root, j).abs())
                    .product();
                // −g²/(λ − ω_i) · |λ − ω_i| = −g²·sign(λ − ω_i)
                value -= g2 * others * sign;
            } else {
                value -= g2 / self.gap(root, i) * factor;
            }
        }
        value
    }

    fn secular_roots(&self) -> Result<Vec<Root>> {
        let k = self.poles.len();
        if k == 0 {
            return Ok(vec![Root {
                anchor: usize::MAX,
                offset: 0.0,
            }]);
        }
        let spread: f64 = self.couplings.iter().map(|g| g * g).sum::<f64>().sqrt();
        let mut roots = Vec::with_capacity(k + 1);

        // Below the band: λ ∈ (min(ω_c, ω_1) − ‖g‖ − margin, ω_1).
        let low = self.poles[0].min(self.omega_c) - spread;
        let margin = 1e-12 * (1.0 + low.abs());
        let lo = (low - margin) - self.poles[0];
        roots.push(Root {
            anchor: 0,
            offset: self.find_root(0, lo, 0.0, &[(0, -1.0)])?,
        });
        for i in 0..k - 1 {
            let width = self.poles[i + 1] - self.poles[i];
            roots.push(Root {
                anchor: i,
                offset: self.find_root(i, 0.0, width, &[(i, 1.0), (i + 1, -1.0)])?,
            });
        }
        let last = k - 1;
        let high = self.poles[last].max(self.omega_c) + spread;
        let margin = 1e-12 * (1.0 + high.abs());
        let hi = (high + margin) - self.poles[last];
        roots.push(Root {
            anchor: last,
            offset: self.find_root(last, 0.0, hi, &[(last, 1.0)])?,
        });
        Ok(roots)
    }

    /// Illinois-modified regula falsi for the sign change of the smooth
    /// bracketed secular function on `[lo, hi]` (offsets from `anchor`).
    fn find_root(
        &self,
        anchor: usize,
        mut lo: f64,
        mut hi: f64,
        bounds: &[(usize, f64)],
    ) -> Result<f64> {
        let h = |x: f64| self.bracketed_secular(anchor, x, bounds);
        let (mut f_lo, mut f_hi) = (h(lo), h(hi));
        if f_lo == 0.0 {
            return Ok(lo);
        }
        if f_hi == 0.0 {
            return Ok(hi);
        }
        if f_lo.signum() == f_hi.signum() || !f_lo.is_finite() || !f_hi.is_finite() {
            return Err(Error::Diagonalization(format!(
                "secular function does not change sign near pole {anchor}"
            )));
        }
        let mut side = 0i8;
        for _ in 0..MAX_ROOT_ITERATIONS {
            let x = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
            let x = if x > lo && x < hi { x } else { 0.5 * (lo + hi) };
            let fx = h(x);
            if fx == 0.0 {
                return Ok(x);
            }
            if fx.signum() == f_lo.signum() {
                lo = x;
                f_lo = fx;
                if side == -1 {
                    f_hi *= 0.5;
                }
                side = -1;
            } else {
                hi = x;
                f_hi = fx;
                if side == 1 {
                    f_lo *= 0.5;
                }
                side = 1;
            }
            let scale = lo.abs().max(hi.abs());
            if hi - lo <= 4.0 * f64::EPSILON * scale {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    /// `λ_v − ω_c` for every eigenvector that overlaps the cavity.
    pub fn detunings(&self) -> Vec<f64> {
        self.roots.iter().map(|&r| self.detuning(r)).collect()
    }

    fn detuning(&self, root: Root) -> f64 {
        if root.anchor == usize::MAX {
            0.0
        } else {
            (self.poles[root.anchor] - self.omega_c) + root.offset
        }
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.detunings().iter().map(|d| self.omega_c + d).collect()
    }

    /// `|⟨c|v⟩|²`; sums to one.
    pub fn cavity_weights(&self) -> Vec<f64> {
        self.cavity_components.iter().map(|c| c * c).collect()
    }

    /// `⟨c|e^{−iHt}|c⟩·e^{iω_c t}`, i.e. in the frame rotating at `ω_c`.
    pub fn survival_amplitude(&self, t: f64) -> Complex64 {
        self.roots
            .iter()
            .zip(&self.cavity_components)
            .map(|(&r, c)| Complex64::from_polar(c * c, -self.detuning(r) * t))
            .sum()
    }

    pub fn survival_probability(&self, t: f64) -> f64 {
        self.survival_amplitude(t).norm_sqr()
    }

    /// Full state at time `t` (rotating frame), cavity first, then the
    /// coupled bath modes in ascending frequency.
    pub fn state_at(&self, t: f64) -> Vec<Complex64> {
        let phases: Vec<Complex64> = self
            .roots
            .iter()
            .zip(&self.cavity_components)
            .map(|(&r, c)| Complex64::from_polar(*c, -self.detuning(r) * t))
            .collect();
        let mut state = Vec::with_capacity(self.poles.len() + 1);
        state.push(
            phases
                .iter()
                .zip(&self.cavity_components)
                .map(|(p, c)| p * c)
                .sum(),
        );
        for (i, g) in self.couplings.iter().enumerate() {
            let amp: Complex64 = self
                .roots
                .iter()
                .zip(&self.cavity_components)
                .zip(&phases)
                .map(|((&r, c), p)| p * (g * c / self.gap(r, i)))
                .sum();
            state.push(amp);
        }
        state
    }

    /// `Σ_s |⟨s|ψ(t)⟩|²` over cavity and bath; one for a Hermitian universe.
    pub fn norm_at(&self, t: f64) -> f64 {
        self.state_at(t).iter().map(|z| z.norm_sqr()).sum()
    }

    /// Number of bath modes that were passed in, coupled or not.
    pub fn bath_len(&self) -> usize {
        self.bath_len
    }
}

/// `P(t) = |⟨c|e^{−iHt}|c⟩|²` on the given time grid.
pub fn survival_probability(
    omega_c: f64,
    bath: &DiscreteBath,
    time_grid: &[f64],
) -> Result<Vec<(f64, f64)>> {
    if time_grid.iter().any(|t| !(*t >= 0.0)) || !time_grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidBath(
            "time grid must be non-negative and increasing".into(),
        ));
    }
    let spectrum = UniverseSpectrum::diagonalize(omega_c, bath)?;
    Ok(time_grid
        .iter()
        .map(|&t| (t, spectrum.survival_probability(t)))
        .collect())
}

/// `n` equally spaced times on `[start, end]`.
pub fn linear_time_grid(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..n)
            .map(|i| start + (end - start) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Least-squares slope of `(x, y)`.
fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Amplitude decay rate from `P(t) ≈ A·e^{−2γt}`: minus half the
/// least-squares slope of `ln P`. Samples with `P ≤ 0` are skipped.
pub fn fit_decay(samples: &[(f64, f64)]) -> Result<f64> {
    let usable: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(t, p)| t.is_finite() && *p > 0.0 && p.is_finite())
        .map(|&(t, p)| (t, p.ln()))
        .collect();
    if usable.len() < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientSamples {
            required: MIN_FIT_SAMPLES,
            found: usable.len(),
        });
    }
    Ok(-0.5 * slope(&usable))
}

/// Frequency of the decaying pole relative to `ω_c`: minus the slope of the
/// unwrapped phase of the survival amplitude over `times`.
pub fn dominant_frequency_shift(spectrum: &UniverseSpectrum, times: &[f64]) -> Result<f64> {
    if times.len() < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientSamples {
            required: MIN_FIT_SAMPLES,
            found: times.len(),
        });
    }
    let mut unwrapped = Vec::with_capacity(times.len());
    let mut previous: Option<f64> = None;
    for &t in times {
        let mut phase = spectrum.survival_amplitude(t).arg();
        if let Some(prev) = previous {
            let two_pi = 2.0 * std::f64::consts::PI;
            phase += two_pi * ((prev - phase) / two_pi).round();
        }
        previous = Some(phase);
        unwrapped.push((t, phase));
    }
    Ok(-slope(&unwrapped))
}

#[cfg(test)]
mod tests {
    use super::super::{discretize, golden_rule, BathSpec};
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::{DMatrix, SymmetricEigen};

    fn dense_matrix(omega_c: f64, bath: &DiscreteBath) -> DMatrix<f64> {
        let m = bath.len();
        let mut h = DMatrix::zeros(m + 1, m + 1);
        h[(0, 0)] = omega_c;
        for i in 0..m {
            h[(i + 1, i + 1)] = bath.mode_frequencies[i];
            h[(0, i + 1)] = bath.mode_couplings[i];
            h[(i + 1, 0)] = bath.mode_couplings[i];
        }
        h
    }

    #[test]
    fn matches_dense_symmetric_eigensolver() {
        let spec = BathSpec::centred_tilt(1.0, 2e-3, 0.3);
        let bath = discretize(&spec, 200).unwrap();
        let universe = UniverseSpectrum::diagonalize(1.0, &bath).unwrap();
        let dense = SymmetricEigen::new(dense_matrix(1.0, &bath));
        let mut pairs: Vec<(f64, f64)> = dense
            .eigenvalues
            .iter()
            .zip(dense.eigenvectors.row(0).iter())
            .map(|(l, v)| (*l, v * v))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let ours: Vec<(f64, f64)> = universe
            .eigenvalues()
            .into_iter()
            .zip(universe.cavity_weights())
            .collect();
        assert_eq!(ours.len(), pairs.len());
        for (a, b) in ours.iter().zip(&pairs) {
            assert_abs_diff_eq!(a.0, b.0, epsilon = 1e-12);
            assert_abs_diff_eq!(a.1, b.1, epsilon = 1e-10);
        }
        for t in [0.0, 50.0, 700.0] {
            let exact = {
                let phases = dense
                    .eigenvalues
                    .map(|l| Complex64::from_polar(1.0, -(l - 1.0) * t));
                let row = dense.eigenvectors.row(0);
                (0..row.len())
                    .map(|v| phases[v] * row[v] * row[v])
                    .sum::<Complex64>()
            };
            assert!((exact - universe.survival_amplitude(t)).norm() < 1e-10);
        }
    }

    #[test]
    fn decoupled_cavity_never_decays() {
        let bath = DiscreteBath {
            mode_frequencies: vec![0.9, 1.0, 1.1],
            mode_couplings: vec![0.0; 3],
            spacing: 0.1,
        };
        let p = survival_probability(1.0, &bath, &[0.0, 1.0, 1e4]).unwrap();
        assert!(p.iter().all(|&(_, pt)| (pt - 1.0).abs() < 1e-15));
    }

    #[test]
    fn starts_fully_in_the_cavity() {
        let bath = discretize(&BathSpec::flat(1.0, 1e-3, 0.2), 500).unwrap();
        let universe = UniverseSpectrum::diagonalize(1.0, &bath).unwrap();
        assert_abs_diff_eq!(universe.survival_probability(0.0), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            universe.cavity_weights().iter().sum::<f64>(),
            1.0,
            epsilon = 1e-12
        );
        assert_eq!(universe.len(), 501);
    }

    #[test]
    fn flat_band_decays_exponentially() {
        let gamma = 1e-3;
        let bath = discretize(&BathSpec::flat(1.0, gamma, 200.0 * gamma), 2000).unwrap();
        let p = survival_probability(1.0, &bath, &[3.0 / gamma]).unwrap()[0].1;
        let expected = (-6.0f64).exp();
        assert!((p - expected).abs() / expected < 0.1, "P = {p}");
    }

    #[test]
    fn fit_recovers_synthetic_rates() {
        let gamma = 1e-3;
        let samples: Vec<(f64, f64)> = linear_time_grid(100.0, 3000.0, 40)
            .into_iter()
            .map(|t| (t, (-2.0 * gamma * t).exp()))
            .collect();
        assert_abs_diff_eq!(fit_decay(&samples).unwrap(), gamma, epsilon = 1e-12);
        let flat: Vec<(f64, f64)> = samples.iter().map(|&(t, _)| (t, 0.3)).collect();
        assert_eq!(fit_decay(&flat).unwrap(), 0.0);
        assert!(matches!(
            fit_decay(&samples[..7]),
            Err(Error::InsufficientSamples { found: 7, .. })
        ));
        let mut with_zeros = samples.clone();
        for s in with_zeros.iter_mut().take(35) {
            s.1 = 0.0;
        }
        assert!(fit_decay(&with_zeros).is_err());
    }

    #[test]
    fn norm_is_conserved() {
        let gamma = 1e-3;
        let bath = discretize(&BathSpec::flat(1.0, gamma, 200.0 * gamma), 800).unwrap();
        let universe = UniverseSpectrum::diagonalize(1.0, &bath).unwrap();
        for t in [0.0, 0.1 / gamma, 1.0 / gamma, 3.0 / gamma] {
            assert_abs_diff_eq!(universe.norm_at(t), 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn golden_rule_rate_emerges() {
        let gamma = 1e-3;
        let spec = BathSpec::flat(1.0, gamma, 200.0 * gamma);
        let bath = discretize(&spec, 1000).unwrap();
        let times = linear_time_grid(0.1 / gamma, 3.0 / gamma, 30);
        assert!(times.last().unwrap() < &(0.1 * bath.recurrence_time()));
        let fitted = fit_decay(&survival_probability(1.0, &bath, &times).unwrap()).unwrap();
        assert!(
            (fitted - golden_rule(&spec)).abs() / gamma < 0.02,
            "γ_fit = {fitted}"
        );
    }

    #[test]
    fn phase_slope_tracks_the_principal_value_shift() {
        let gamma = 1e-2;
        let tilt = BathSpec::centred_tilt(1.0, gamma, 200.0 * gamma);
        let expected = super::super::lamb_shift(&tilt, 10_000).unwrap();
        let bath = discretize(&tilt, 4000).unwrap();
        let universe = UniverseSpectrum::diagonalize(1.0, &bath).unwrap();
        let times = linear_time_grid(0.1 / gamma, 3.0 / gamma, 200);
        let measured = dominant_frequency_shift(&universe, &times).unwrap();
        assert!(
            (measured - expected).abs() <= 0.05 * expected.abs(),
            "measured {measured}, principal value {expected}"
        );

        let flat = discretize(&BathSpec::flat(1.0, gamma, 200.0 * gamma), 4000).unwrap();
        let universe = UniverseSpectrum::diagonalize(1.0, &flat).unwrap();
        assert!(dominant_frequency_shift(&universe, &times).unwrap().abs() < 1e-3 * gamma);
    }

    #[test]
    fn rejects_unsorted_time_grid_and_bad_entries() {
        let bath = discretize(&BathSpec::flat(1.0, 1e-3, 0.2), 10).unwrap();
        assert!(survival_probability(1.0, &bath, &[1.0, 0.5]).is_err());
        assert!(survival_probability(1.0, &bath, &[-1.0]).is_err());
        let mut broken = bath.clone();
        broken.mode_couplings[3] = f64::NAN;
        assert!(matches!(
            UniverseSpectrum::diagonalize(1.0, &broken),
            Err(Error::Diagonalization(_))
        ));
        let mut duplicate = bath;
        duplicate.mode_frequencies[4] = duplicate.mode_frequencies[3];
        assert!(UniverseSpectrum::diagonalize(1.0, &duplicate).is_err());
    }
}
