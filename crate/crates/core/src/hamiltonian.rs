//! Effective non-Hermitian tight-binding Hamiltonian of the lossy array.
//!
//! In the single-excitation sector the array Hamiltonian is the open-chain
//! tridiagonal matrix with every diagonal entry `ω_eff = ω_c − iγ` and every
//! off-diagonal entry `−α·ω_eff`. Its eigenvalues are known in closed form,
//!
//! ```text
//! λ_n = ω_eff·(1 − 2α·cos(nπ/(N+1))),   n = 1..N,
//! ```
//!
//! and the lossless band `ω_c + 2αω_c·cos(k_n L)` is the same set of real
//! parts (the cosines are symmetric about zero, so the sign of the hopping
//! only relabels the modes).
//!
//! The open chain is used throughout: the wavevectors `k_n = nπ/((N+1)L)`
//! are the hard-wall quantization. There is no ring variant.
//!
//! Dissipation enters only through `ω_eff`. Shifting the target eigenvalue
//! of the mode equation by `γ²` leaves the localized mode profiles (and thus
//! `α`) unchanged, which is why the hopping is simply `α·ω_eff`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::params::{ArrayParams, BandMode};

/// Largest dimension for which [`eigenfrequencies_dense`] is intended.
pub const DENSE_CHECK_MAX_DIM: usize = 200;

/// Uniform complex tridiagonal matrix (open chain, symmetric).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexTridiagonal {
    pub dimension: usize,
    pub diagonal: Complex64,
    pub off_diagonal: Complex64,
}

/// Eigenvalues sorted by ascending real part.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrum {
    pub eigenvalues: Vec<Complex64>,
}

impl ComplexSpectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn trace(&self) -> Complex64 {
        self.eigenvalues.iter().sum()
    }

    fn sorted(mut eigenvalues: Vec<Complex64>) -> Self {
        eigenvalues.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        Self { eigenvalues }
    }
}

/// The `N` standing-wave modes of the lossless chain, `n = 1..=N`.
pub fn mode_wavevectors(params: &ArrayParams) -> Vec<BandMode> {
    let n = params.n_cavities;
    let step = PI / ((n + 1) as f64 * params.period);
    (1..=n)
        .map(|index| {
            let wavevector = index as f64 * step;
            BandMode {
                index,
                wavevector,
                frequency: params.omega_c
                    * (1.0 + 2.0 * params.alpha * (wavevector * params.period).cos()),
            }
        })
        .collect()
}

impl ComplexTridiagonal {
    pub fn build_effective(params: &ArrayParams) -> Self {
        let omega_eff = params.derive_rates().omega_eff;
        Self {
            dimension: params.n_cavities,
            diagonal: omega_eff,
            off_diagonal: -omega_eff * params.alpha,
        }
    }

    /// Multiplies every entry by `s`.
    pub fn scaled(&self, s: Complex64) -> Self {
        Self {
            dimension: self.dimension,
            diagonal: self.diagonal * s,
            off_diagonal: self.off_diagonal * s,
        }
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.dimension;
        DMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
            0 => self.diagonal,
            1 => self.off_diagonal,
            _ => Complex64::new(0.0, 0.0),
        })
    }

    pub fn is_real_symmetric(&self) -> bool {
        self.diagonal.im == 0.0 && self.off_diagonal.im == 0.0
    }
}

pub fn build_effective(params: &ArrayParams) -> ComplexTridiagonal {
    ComplexTridiagonal::build_effective(params)
}

/// Closed-form spectrum `d + 2o·cos(nπ/(N+1))` of the uniform open chain.
pub fn eigenfrequencies(h: &ComplexTridiagonal) -> ComplexSpectrum {
    let n = h.dimension;
    let eigenvalues = (1..=n)
        .map(|m| {
            let c = (m as f64 * PI / (n + 1) as f64).cos();
            h.diagonal + h.off_diagonal * (2.0 * c)
        })
        .collect();
    ComplexSpectrum::sorted(eigenvalues)
}

/// General dense eigenvalues via complex Schur decomposition. Used as an
/// independent check of [`eigenfrequencies`].
pub fn eigenfrequencies_dense(h: &ComplexTridiagonal) -> Result<ComplexSpectrum> {
    if h.dimension == 0 {
        return Ok(ComplexSpectrum {
            eigenvalues: Vec::new(),
        });
    }
    let schur = nalgebra::Schur::try_new(h.to_dense(), 1e-15, 10_000)
        .ok_or_else(|| Error::Diagonalization("complex Schur iteration did not converge".into()))?;
    let (_, t) = schur.unpack();
    Ok(ComplexSpectrum::sorted(
        t.diagonal().iter().copied().collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn reference(n: usize) -> ArrayParams {
        ArrayParams::from_xi(n, 6.47e-4, 1.1e6)
    }

    #[test]
    fn single_cavity_sits_at_band_centre() {
        let modes = mode_wavevectors(&reference(1));
        assert_eq!(modes.len(), 1);
        assert_abs_diff_eq!(modes[0].wavevector, PI / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(modes[0].frequency, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn decoupled_cavities_are_degenerate() {
        let p = ArrayParams::new(7, 0.0, 1e6);
        assert!(mode_wavevectors(&p).iter().all(|m| m.frequency == 1.0));
    }

    #[test]
    fn three_site_band() {
        let p = ArrayParams::new(3, 3.235e-4, 1.1e6);
        let f: Vec<f64> = mode_wavevectors(&p).iter().map(|m| m.frequency).collect();
        let s = 2.0 * 3.235e-4 * std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(f[0], 1.0 + s, epsilon = 1e-15);
        assert_abs_diff_eq!(f[1], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(f[2], 1.0 - s, epsilon = 1e-15);
    }

    #[test]
    fn wavevectors_stay_inside_the_zone_and_band() {
        let p = ArrayParams::new(200, 0.01, 1e5).with_period(2.5);
        for m in mode_wavevectors(&p) {
            let kl = m.wavevector * p.period;
            assert!(kl > 0.0 && kl < PI);
            assert!(m.frequency >= 1.0 - 0.02 && m.frequency <= 1.0 + 0.02);
        }
    }

    #[test]
    fn lossless_matrix_is_real_symmetric() {
        let h = build_effective(&reference(4).lossless());
        assert!(h.is_real_symmetric());
        assert!(!build_effective(&reference(4)).is_real_symmetric());
    }

    #[test]
    fn experimental_matrix_entries() {
        let h = build_effective(&reference(60));
        assert_eq!(h.dimension, 60);
        assert_abs_diff_eq!(h.diagonal.re, 1.0);
        assert_abs_diff_eq!(h.diagonal.im, -1.8182e-6, epsilon = 1e-10);
        let dense = h.to_dense();
        assert_eq!(dense[(10, 11)], dense[(11, 10)]);
        assert_eq!(dense[(10, 12)], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn two_site_closed_form() {
        let p = ArrayParams::new(2, 0.1, 1e4);
        let w = p.derive_rates().omega_eff;
        let spec = eigenfrequencies(&build_effective(&p));
        let expected = [w * 0.9, w * 1.1];
        for (got, want) in spec.eigenvalues.iter().zip(expected) {
            assert!((got - want).norm() < 1e-15);
        }
    }

    #[test]
    fn two_site_lossless_values() {
        let spec = eigenfrequencies(&build_effective(&ArrayParams::new(2, 0.1, 1e4).lossless()));
        assert_abs_diff_eq!(spec.eigenvalues[0].re, 0.9, epsilon = 1e-15);
        assert_abs_diff_eq!(spec.eigenvalues[1].re, 1.1, epsilon = 1e-15);
    }

    #[test]
    fn lossy_eigenvalues_decay() {
        let p = ArrayParams::new(25, 0.2, 500.0);
        let g = p.gamma();
        for lambda in eigenfrequencies(&build_effective(&p)).eigenvalues {
            assert!(lambda.im < 0.0);
            assert!(lambda.im >= -g * (1.0 + 0.4) - 1e-15);
            assert!(lambda.im <= -g * (1.0 - 0.4) + 1e-15);
        }
    }

    #[test]
    fn dense_solver_agrees_with_closed_form() {
        for n in [1, 2, 3, 10, 37, 60, DENSE_CHECK_MAX_DIM] {
            let h = build_effective(&ArrayParams::new(n, 0.05, 300.0));
            let closed = eigenfrequencies(&h);
            let dense = eigenfrequencies_dense(&h).unwrap();
            assert_eq!(closed.len(), dense.len());
            for (a, b) in closed.eigenvalues.iter().zip(&dense.eigenvalues) {
                assert!((a - b).norm() < 1e-10, "N={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn eigenvalues_scale_linearly_with_omega_eff() {
        let h = build_effective(&ArrayParams::new(12, 0.1, 1e3));
        let base = eigenfrequencies_dense(&h).unwrap();
        for s in [Complex64::new(2.0, 0.0), Complex64::new(0.0, 1.0)] {
            let scaled = eigenfrequencies_dense(&h.scaled(s)).unwrap();
            let mut expected: Vec<Complex64> = base.eigenvalues.iter().map(|z| z * s).collect();
            expected.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
            for (a, b) in scaled.eigenvalues.iter().zip(&expected) {
                assert!((a - b).norm() < 1e-12, "s={s}: {a} vs {b}");
            }
        }
    }
}
