//! Analytic single-photon transport through the lossy array.
//!
//! A photon at in-band frequency `ω` carries the lattice wavevector
//! `kL = arccos((ω − ω_c)/(2αω_c))`. Each lossy site scatters it with
//!
//! ```text
//! r = (κ·cos kL − γ) / D
//! t = (ξ − iκ)·|sin kL| / D
//! D = (γ + ξ|sin kL| − κ·cos kL) − iκ|sin kL|
//! ```
//!
//! with `ξ = 2αω_c` and `κ = 2αγ`. The site-dependent phase `e^{2ikjL}` of
//! `r` is dropped; nothing computed here depends on it. The array transmits
//! `T = |t|^{2N}`, and at band centre, neglecting `κ`, `T_max = (1+γ/ξ)^{−2N}`.
//!
//! Out-of-band frequencies are errors, never silently `T = 0`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hamiltonian::mode_wavevectors;
use crate::params::ArrayParams;

/// Frequencies within this fraction of the half-bandwidth of an edge are
/// treated as sitting on it.
const EDGE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringAmplitudes {
    /// Local reflection amplitude, global phase stripped.
    pub r: Complex64,
    /// Local transmission amplitude.
    pub t: Complex64,
}

impl ScatteringAmplitudes {
    pub fn reflectance(&self) -> f64 {
        self.r.norm_sqr()
    }

    pub fn transmittance(&self) -> f64 {
        self.t.norm_sqr()
    }

    /// `|r|² + |t|²`; below one whenever the site loses energy.
    pub fn flux(&self) -> f64 {
        self.reflectance() + self.transmittance()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumKind {
    /// One point per resonant mode of the array.
    Discrete,
    /// Uniform grid across the open band interval.
    Continuous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionCurve {
    /// `(ω, T)` pairs with strictly increasing `ω`.
    pub points: Vec<(f64, f64)>,
    pub kind: SpectrumKind,
}

impl TransmissionCurve {
    /// Point with the largest transmission.
    pub fn peak(&self) -> Option<(f64, f64)> {
        self.points
            .iter()
            .copied()
            .max_by(|a, b| a.1.total_cmp(&b.1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxTransmission {
    /// `(1 + γ/ξ)^{−2N}`.
    pub exact: f64,
    /// `1/(1 + Nγ/ξ)²`.
    pub first_order: f64,
}

/// Inverts the lossless dispersion `ω = ω_c + 2αω_c·cos(kL)`; returns `kL`.
pub fn wavevector_of(omega: f64, params: &ArrayParams) -> Result<f64> {
    let half_width = params.xi();
    if half_width == 0.0 {
        return Err(Error::DecoupledChain);
    }
    let x = (omega - params.omega_c) / half_width;
    if !(x.abs() <= 1.0 + EDGE_SLACK) {
        let (lower, upper) = params.band();
        return Err(Error::OutOfBand {
            omega,
            lower,
            upper,
        });
    }
    if x.abs() >= 1.0 - EDGE_SLACK {
        // On the edge up to rounding of ω_c ± 2αω_c.
        return Ok(if x > 0.0 { 0.0 } else { std::f64::consts::PI });
    }
    Ok(x.acos())
}

/// Local amplitudes at one lossy site.
pub fn local_amplitudes(omega: f64, params: &ArrayParams) -> Result<ScatteringAmplitudes> {
    let kl = wavevector_of(omega, params)?;
    let rates = params.derive_rates();
    let (gamma, xi, kappa) = (rates.gamma, rates.xi, rates.kappa);
    let s = if kl == 0.0 || kl == std::f64::consts::PI {
        0.0
    } else {
        kl.sin().abs()
    };
    let c = kl.cos();
    let denom = Complex64::new(gamma + xi * s - kappa * c, -kappa * s);
    if denom.norm() == 0.0 {
        // Lossless band edge: the site no longer transmits.
        return Ok(ScatteringAmplitudes {
            r: Complex64::new(0.0, 0.0),
            t: Complex64::new(0.0, 0.0),
        });
    }
    Ok(ScatteringAmplitudes {
        r: Complex64::new(kappa * c - gamma, 0.0) / denom,
        t: Complex64::new(xi, -kappa) * s / denom,
    })
}

/// `T = |t|^{2N}`.
pub fn total_transmission(omega: f64, params: &ArrayParams) -> Result<f64> {
    let t2 = local_amplitudes(omega, params)?.transmittance();
    Ok(t2.powi(params.n_cavities as i32))
}

/// Frequencies `ω_lo + (i+1)·W/(n+1)`, `i = 0..n`, strictly inside the band.
pub fn open_band_grid(params: &ArrayParams, n_points: usize) -> Vec<f64> {
    let (lower, upper) = params.band();
    let step = (upper - lower) / (n_points + 1) as f64;
    (0..n_points)
        .map(|i| lower + (i + 1) as f64 * step)
        .collect()
}

pub fn spectrum(
    params: &ArrayParams,
    kind: SpectrumKind,
    n_points: usize,
) -> Result<TransmissionCurve> {
    let omegas: Vec<f64> = match kind {
        SpectrumKind::Discrete => {
            let mut w: Vec<f64> = mode_wavevectors(params)
                .iter()
                .map(|m| m.frequency)
                .collect();
            w.reverse();
            w
        }
        SpectrumKind::Continuous => {
            if n_points < 2 {
                return Err(Error::InvalidParams(format!(
                    "continuous spectrum needs at least 2 points, got {n_points}"
                )));
            }
            open_band_grid(params, n_points)
        }
    };
    let points = omegas
        .par_iter()
        .map(|&w| total_transmission(w, params).map(|t| (w, t)))
        .collect::<Result<Vec<_>>>()?;
    Ok(TransmissionCurve { points, kind })
}

pub fn t_max(params: &ArrayParams) -> MaxTransmission {
    let ratio = params.gamma() / params.xi();
    let n = params.n_cavities as f64;
    MaxTransmission {
        exact: (1.0 + ratio).powf(-2.0 * n),
        first_order: 1.0 / (1.0 + n * ratio).powi(2),
    }
}

/// Maximal transmission as a function of the array quality factor,
/// `T_max = 1/(1 + 1/ζ)²`. With `ζ = αQ/N` one has `Nγ/ξ = 1/ζ`, so this is
/// [`MaxTransmission::first_order`] written in `ζ`; large `ζ` means a
/// nearly transparent array.
pub fn t_max_from_zeta(zeta: f64) -> Result<f64> {
    if !(zeta > 0.0) {
        return Err(Error::InvalidParams(format!(
            "zeta > 0 violated (zeta = {zeta})"
        )));
    }
    Ok(1.0 / (1.0 + 1.0 / zeta).powi(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn reference(n: usize) -> ArrayParams {
        ArrayParams::from_xi(n, 6.47e-4, 1.1e6)
    }

    #[test]
    fn wavevector_landmarks() {
        let p = ArrayParams::new(10, 0.1, 1e4);
        assert_abs_diff_eq!(wavevector_of(1.0, &p).unwrap(), PI / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(wavevector_of(1.2, &p).unwrap(), 0.0, epsilon = 1e-7);
        assert_abs_diff_eq!(wavevector_of(0.8, &p).unwrap(), PI, epsilon = 1e-7);
        assert_abs_diff_eq!(wavevector_of(1.1, &p).unwrap(), PI / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn out_of_band_is_an_error() {
        let p = ArrayParams::new(10, 0.1, 1e4);
        assert!(matches!(
            wavevector_of(1.2001, &p),
            Err(Error::OutOfBand { .. })
        ));
        assert!(matches!(
            total_transmission(0.7, &p),
            Err(Error::OutOfBand { .. })
        ));
        assert!(matches!(
            wavevector_of(1.0, &ArrayParams::new(3, 0.0, 1e4)),
            Err(Error::DecoupledChain)
        ));
    }

    #[test]
    fn band_centre_local_transmission() {
        let p = reference(60);
        let r = p.derive_rates();
        let amps = local_amplitudes(1.0, &p).unwrap();
        let expected =
            (r.xi.powi(2) + r.kappa.powi(2)) / ((r.gamma + r.xi).powi(2) + r.kappa.powi(2));
        assert_abs_diff_eq!(amps.transmittance(), expected, epsilon = 1e-15);
        // Independent high-precision evaluation of the same expression.
        assert_abs_diff_eq!(amps.transmittance(), 0.994_403_257_104_920, epsilon = 1e-12);
    }

    #[test]
    fn band_edges_block_transmission() {
        let p = reference(60);
        let (lo, hi) = p.band();
        for w in [lo, hi] {
            let a = local_amplitudes(w, &p).unwrap();
            assert_eq!(a.t, Complex64::new(0.0, 0.0));
            assert_eq!(total_transmission(w, &p).unwrap(), 0.0);
        }
    }

    #[test]
    fn experimental_array_peak_transmission() {
        let p = reference(60);
        // (1 + γ/ξ)^{-120} evaluated at 30 digits: 0.714088909978523
        assert_abs_diff_eq!(
            total_transmission(1.0, &p).unwrap(),
            0.714_088_909_979_316,
            epsilon = 1e-9
        );
        let tm = t_max(&p);
        assert_abs_diff_eq!(tm.exact, 0.714_088_909_978_523, epsilon = 1e-9);
        assert_abs_diff_eq!(tm.first_order, 0.732_251_936_170_751, epsilon = 1e-9);
    }

    #[test]
    fn t_max_edge_cases() {
        let lossless = t_max(&reference(60).lossless());
        assert_eq!(lossless.exact, 1.0);
        assert_eq!(lossless.first_order, 1.0);
        // Nγ/ξ = 1: N = ξ/γ = αQ.
        let p = ArrayParams::new(100, 0.01, 1e4);
        assert_abs_diff_eq!(t_max(&p).first_order, 0.25, epsilon = 1e-15);
    }

    #[test]
    fn zeta_form() {
        assert_abs_diff_eq!(
            t_max_from_zeta(71.17).unwrap(),
            0.972_479_647_678_052,
            epsilon = 1e-12
        );
        assert_eq!(t_max_from_zeta(1.0).unwrap(), 0.25);
        assert_eq!(t_max_from_zeta(f64::INFINITY).unwrap(), 1.0);
        assert!(t_max_from_zeta(1e12).unwrap() > 1.0 - 1e-11);
        assert!(t_max_from_zeta(0.0).is_err());
        assert!(t_max_from_zeta(-2.0).is_err());
    }

    #[test]
    fn first_order_remainder_is_second_order() {
        let p = reference(60);
        let eps = 60.0 * p.gamma() / p.xi();
        let tm = t_max(&p);
        assert!((tm.exact - tm.first_order).abs() <= eps * eps * tm.first_order);
    }

    #[test]
    fn lossless_sites_are_transparent() {
        let p = reference(60).lossless();
        for w in open_band_grid(&p, 1000) {
            let a = local_amplitudes(w, &p).unwrap();
            assert!(a.r.norm() < 1e-12);
            assert!((a.t.norm() - 1.0).abs() < 1e-12);
            assert!((total_transmission(w, &p).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn discrete_spectrum_uses_mode_frequencies() {
        let p = ArrayParams::new(3, 0.01, 1e5);
        let curve = spectrum(&p, SpectrumKind::Discrete, 0).unwrap();
        assert_eq!(curve.points.len(), 3);
        let s = 0.02 * std::f64::consts::FRAC_1_SQRT_2;
        let w: Vec<f64> = curve.points.iter().map(|p| p.0).collect();
        assert_abs_diff_eq!(w[0], 1.0 - s, epsilon = 1e-15);
        assert_abs_diff_eq!(w[1], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(w[2], 1.0 + s, epsilon = 1e-15);
    }

    #[test]
    fn continuous_spectrum_shape() {
        let p = reference(60);
        assert!(spectrum(&p, SpectrumKind::Continuous, 1).is_err());
        let curve = spectrum(&p, SpectrumKind::Continuous, 801).unwrap();
        assert!(curve.points.windows(2).all(|w| w[0].0 < w[1].0));
        assert!(curve.points.iter().all(|&(_, t)| (0.0..=1.0).contains(&t)));
        // Outermost grid points sit at |sin kL| ≈ 0.05, where T has dropped
        // by two orders of magnitude and keeps falling towards the edge.
        let (first, last) = (curve.points[0].1, curve.points[800].1);
        assert!(first < 0.02 && last < 0.02, "edges {first} {last}");
        assert!(curve.points[0].1 < curve.points[1].1);
        assert!(curve.points[800].1 < curve.points[799].1);
        let (w_peak, _) = curve.peak().unwrap();
        let step = 2.0 * p.xi() / 802.0;
        assert!((w_peak - 1.0).abs() <= step);
    }

    /// Asymmetry produced by the κ·cos kL terms: to first order in κ,
    /// `ln T(ω_c+δ) − ln T(ω_c−δ) ≈ 4Nκ|cos kL|/(γ + ξ|sin kL|)`, which is
    /// `8N|cot kL|/Q` once `γ ≪ ξ|sin kL|`.
    #[test]
    fn asymmetry_follows_first_order_prediction() {
        let p = reference(60);
        let r = p.derive_rates();
        for w in open_band_grid(&p, 401).into_iter().filter(|&w| w > 1.0) {
            let kl = wavevector_of(w, &p).unwrap();
            let plus = total_transmission(w, &p).unwrap();
            let minus = total_transmission(2.0 - w, &p).unwrap();
            let predicted = 4.0 * 60.0 * r.kappa * kl.cos() / (r.gamma + r.xi * kl.sin());
            let measured = plus.ln() - minus.ln();
            assert!(
                (measured - predicted).abs() <= 1e-3 * predicted + 1e-12,
                "{w}: {measured} vs {predicted}"
            );
        }
    }

    proptest! {
        #[test]
        fn flux_never_exceeds_unity(
            alpha in 1e-4f64..0.45,
            q in 101.0f64..1e9,
            x in -0.999f64..0.999,
        ) {
            let p = ArrayParams::new(10, alpha, q);
            let w = 1.0 + x * p.xi();
            let a = local_amplitudes(w, &p).unwrap();
            prop_assert!(a.flux() < 1.0 - 1e-12 || (a.flux() <= 1.0 && p.gamma() < 1e-9));
            let lossless = local_amplitudes(w, &p.lossless()).unwrap();
            prop_assert!((lossless.flux() - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn zeta_identity(n in 1usize..1000, alpha in 1e-5f64..0.49, q in 101.0f64..1e9) {
            let p = ArrayParams::new(n, alpha, q);
            let a = t_max_from_zeta(p.derive_rates().zeta).unwrap();
            let b = t_max(&p).first_order;
            prop_assert!((a - b).abs() <= 1e-14 * b);
        }

        #[test]
        fn t_max_monotone(n in 1usize..500, alpha in 1e-4f64..0.4, q in 200.0f64..1e8) {
            let p = ArrayParams::new(n, alpha, q);
            let base = t_max(&p).exact;
            prop_assert!(t_max(&p.with_n_cavities(n + 1)).exact < base);
            prop_assert!(t_max(&p.with_q_factor(q / 1.5)).exact < base);
            let stronger = ArrayParams { alpha: alpha * 1.1, ..p };
            prop_assert!(t_max(&stronger).exact > base);
        }
    }
}
