//! Physical description of a coupled-cavity array and the rates derived from it.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Smallest quality factor for which the quasi-boson reduction is accepted.
pub const MIN_Q_FACTOR: f64 = 100.0;

/// Upper bound on the overlap integral; keeps the band `ω_c(1 ± 2α)` away
/// from zero frequency.
pub const MAX_ALPHA: f64 = 0.5;

/// A uniform array of `N` identical cavities.
///
/// `q_factor` may be `f64::INFINITY`, which describes the lossless array
/// (`γ = 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayParams {
    pub n_cavities: usize,
    pub omega_c: f64,
    pub alpha: f64,
    pub q_factor: f64,
    pub period: f64,
}

/// Rates that follow from [`ArrayParams`] alone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedRates {
    /// Cavity decay rate `γ = 2ω_c/Q`.
    pub gamma: f64,
    /// Hopping bandwidth scale `ξ = 2αω_c`.
    pub xi: f64,
    /// Dissipative hopping scale `κ = 2αγ`.
    pub kappa: f64,
    /// Quasi-boson frequency `ω_c − iγ`.
    pub omega_eff: Complex64,
    /// Array quality factor `ζ = αQ/N`.
    pub zeta: f64,
}

/// One standing-wave eigenmode of the open lossless chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandMode {
    /// Mode label `n` in `1..=N`.
    pub index: usize,
    /// `k_n = nπ/((N+1)L)`.
    pub wavevector: f64,
    /// `ω_c + 2αω_c·cos(k_n L)`.
    pub frequency: f64,
}

impl ArrayParams {
    /// Array with `ω_c = 1` and `L = 1`.
    pub fn new(n_cavities: usize, alpha: f64, q_factor: f64) -> Self {
        Self {
            n_cavities,
            omega_c: 1.0,
            alpha,
            q_factor,
            period: 1.0,
        }
    }

    /// Array specified by the hopping scale `ξ` instead of `α`; `ω_c = 1`.
    pub fn from_xi(n_cavities: usize, xi: f64, q_factor: f64) -> Self {
        Self::new(n_cavities, xi / 2.0, q_factor)
    }

    /// Same array with a different cavity frequency. `α` is kept, so `ξ`
    /// scales with `ω_c`.
    pub fn with_omega_c(self, omega_c: f64) -> Self {
        Self { omega_c, ..self }
    }

    pub fn with_period(self, period: f64) -> Self {
        Self { period, ..self }
    }

    pub fn with_n_cavities(self, n_cavities: usize) -> Self {
        Self { n_cavities, ..self }
    }

    pub fn with_q_factor(self, q_factor: f64) -> Self {
        Self { q_factor, ..self }
    }

    /// Lossless copy of the array (`Q = ∞`, so `γ = 0`).
    pub fn lossless(self) -> Self {
        self.with_q_factor(f64::INFINITY)
    }

    /// Checks every invariant and hands the parameters back unchanged.
    pub fn validate(self) -> Result<Self> {
        if self.n_cavities < 1 {
            return Err(Error::InvalidParams("n_cavities ≥ 1 violated".into()));
        }
        if !(self.omega_c > 0.0 && self.omega_c.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "omega_c > 0 violated (omega_c = {})",
                self.omega_c
            )));
        }
        if !(self.alpha > 0.0) {
            return Err(Error::InvalidParams(format!(
                "alpha > 0 violated (alpha = {})",
                self.alpha
            )));
        }
        if !(self.alpha < MAX_ALPHA) {
            return Err(Error::InvalidParams(format!(
                "alpha < 0.5 violated (alpha = {})",
                self.alpha
            )));
        }
        if !(self.q_factor > MIN_Q_FACTOR) {
            return Err(Error::InvalidParams(format!(
                "q_factor > 100 violated (q_factor = {})",
                self.q_factor
            )));
        }
        if !(self.period > 0.0 && self.period.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "period > 0 violated (period = {})",
                self.period
            )));
        }
        Ok(self)
    }

    /// `γ = 2ω_c/Q`. The factor 2 is the convention under which
    /// `T_max ≈ 1/(1 + N/(αQ))²`; it differs from the textbook `ω_c/(2γ)`.
    pub fn gamma(&self) -> f64 {
        2.0 * self.omega_c / self.q_factor
    }

    pub fn xi(&self) -> f64 {
        2.0 * self.alpha * self.omega_c
    }

    pub fn derive_rates(&self) -> DerivedRates {
        let gamma = self.gamma();
        DerivedRates {
            gamma,
            xi: self.xi(),
            kappa: 2.0 * self.alpha * gamma,
            omega_eff: Complex64::new(self.omega_c, -gamma),
            zeta: self.alpha * self.q_factor / self.n_cavities as f64,
        }
    }

    /// Closed band interval `[ω_c(1−2α), ω_c(1+2α)]`.
    pub fn band(&self) -> (f64, f64) {
        let half = self.xi();
        (self.omega_c - half, self.omega_c + half)
    }
}

/// Free-function form of [`ArrayParams::validate`].
pub fn validate(params: ArrayParams) -> Result<ArrayParams> {
    params.validate()
}

/// Free-function form of [`ArrayParams::derive_rates`].
pub fn derive_rates(params: &ArrayParams) -> DerivedRates {
    params.derive_rates()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn reference(n: usize) -> ArrayParams {
        ArrayParams::from_xi(n, 6.47e-4, 1.1e6)
    }

    #[test]
    fn experimental_parameters_validate() {
        let p = reference(60);
        assert_eq!(p.validate(), Ok(p));
        assert!((p.alpha - 3.235e-4).abs() < 1e-18);
    }

    #[test]
    fn rejects_each_broken_invariant() {
        let err = |p: ArrayParams| match p.validate() {
            Err(Error::InvalidParams(msg)) => msg,
            other => panic!("expected validation error, got {other:?}"),
        };
        assert!(err(reference(0)).contains("n_cavities ≥ 1"));
        assert!(err(ArrayParams::new(10, 0.6, 1e6)).contains("alpha < 0.5"));
        assert!(err(ArrayParams::new(10, 0.0, 1e6)).contains("alpha > 0"));
        assert!(err(ArrayParams::new(10, 0.1, 50.0)).contains("q_factor > 100"));
        assert!(err(reference(3).with_omega_c(-1.0)).contains("omega_c > 0"));
        assert!(err(reference(3).with_period(0.0)).contains("period > 0"));
        assert!(err(ArrayParams::new(10, f64::NAN, 1e6)).contains("alpha"));
    }

    #[test]
    fn infinite_q_is_the_lossless_array() {
        let p = reference(10).lossless().validate().unwrap();
        let r = p.derive_rates();
        assert_eq!(r.gamma, 0.0);
        assert_eq!(r.kappa, 0.0);
        assert_eq!(r.omega_eff.im, 0.0);
    }

    #[test]
    fn zeta_matches_reported_table() {
        for (n, zeta) in [(5, 71.17), (30, 11.86), (50, 7.117), (100, 3.559)] {
            let z = reference(n).derive_rates().zeta;
            assert!((z - zeta).abs() < 0.01, "N={n}: ζ={z}");
        }
    }

    #[test]
    fn decay_rate_uses_two_omega_over_q() {
        let g = reference(1).derive_rates().gamma;
        assert!((g - 2.0 / 1.1e6).abs() < 1e-20);
        assert!((g - 1.8182e-6).abs() < 1e-10);
    }

    #[test]
    fn omega_eff_imaginary_part_is_minus_gamma() {
        let r = reference(7).derive_rates();
        assert_eq!(r.omega_eff.im, -r.gamma);
        assert_eq!(r.omega_eff.re, 1.0);
    }

    proptest! {
        #[test]
        fn rates_scale_with_omega_c(
            n in 1usize..500,
            alpha in 1e-5f64..0.49,
            q in 101.0f64..1e9,
            exponent in -3i32..4,
        ) {
            // Powers of two keep the products exact.
            let s = 2f64.powi(exponent);
            let base = ArrayParams::new(n, alpha, q);
            let a = base.derive_rates();
            let b = base.with_omega_c(s).derive_rates();
            prop_assert_eq!(b.gamma, s * a.gamma);
            prop_assert_eq!(b.xi, s * a.xi);
            prop_assert_eq!(b.kappa, s * a.kappa);
            prop_assert_eq!(b.omega_eff, a.omega_eff * s);
            prop_assert_eq!(b.zeta, a.zeta);
        }

        #[test]
        fn kappa_over_xi_is_two_over_q(
            n in 1usize..500,
            alpha in 1e-5f64..0.49,
            q in 101.0f64..1e9,
            omega_c in 0.1f64..10.0,
        ) {
            let r = ArrayParams::new(n, alpha, q).with_omega_c(omega_c).derive_rates();
            let target = 2.0 / q;
            prop_assert!(((r.kappa / r.xi) - target).abs() <= 1e-15 * target);
            prop_assert!(((r.gamma / omega_c) - target).abs() <= 1e-15 * target);
            let identity = r.xi * r.gamma / omega_c;
            prop_assert!((r.kappa - identity).abs() <= 1e-15 * r.kappa);
        }
    }
}
