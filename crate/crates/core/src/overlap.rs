//! Nearest-neighbour coupling from localized cavity modes in one dimension.
//!
//! The scalar mode equation `φ'' + ε(x)ω²φ = 0` (with `c = 1`) is
//! discretized with second-order central differences and hard walls,
//! giving the generalized eigenproblem `−D₂φ = ω² ε₀ φ`. Scaling by
//! `ε₀^{-1/2}` turns it into a symmetric tridiagonal problem, solved here by
//! Sturm-sequence bisection for the eigenvalues and inverse iteration for
//! the eigenvectors. Of the well-resolved modes (at least ten grid points
//! per wavelength in the densest material), the one with the smallest
//! participation ratio is the defect mode.
//!
//! With `φ_j` normalized as `∫ε₀φ_j² dx = 1` and `φ_{j+1}` the same mode
//! translated by one array period,
//!
//! ```text
//! α = ∫ [ε₀(x) − ε(x)] φ_j(x) φ_{j+1}(x) dx
//! ```
//!
//! by the trapezoid rule. The sign of `φ_{j+1}` is chosen so the two modes
//! overlap positively (`∫φ_jφ_{j+1} ≥ 0`); only `|α|` is physical.
//!
//! [`GratingArray`] builds test structures: a sinusoidal Bragg grating whose
//! cavities are smooth phase slips, so the profile is `C^∞` and the finite
//! differences converge at second order.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Smallest grid accepted by [`solve_defect_mode`].
pub const MIN_GRID_POINTS: usize = 200;
/// Participation ratio at or above which a mode counts as extended.
pub const LOCALIZATION_THRESHOLD: f64 = 0.5;
/// Minimum grid points per wavelength for a mode to count as resolved.
pub const POINTS_PER_WAVELENGTH: f64 = 10.0;

const PERIODICITY_TOLERANCE: f64 = 1e-12;
const NORMALIZATION_TOLERANCE: f64 = 1e-6;
const INVERSE_ITERATIONS: usize = 3;

/// Single-cavity and array dielectric profiles sampled on one uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DielectricProfile1D {
    /// Position of the first sample.
    pub origin: f64,
    pub spacing: f64,
    /// `ε₀(x)`: one cavity.
    pub eps_single: Vec<f64>,
    /// `ε(x)`: the array, periodic with `period_cells`.
    pub eps_periodic: Vec<f64>,
    /// Array period in grid cells.
    pub period_cells: usize,
}

impl DielectricProfile1D {
    pub fn new(
        origin: f64,
        spacing: f64,
        eps_single: Vec<f64>,
        eps_periodic: Vec<f64>,
        period_cells: usize,
    ) -> Result<Self> {
        let profile = Self {
            origin,
            spacing,
            eps_single,
            eps_periodic,
            period_cells,
        };
        profile.validate()?;
        Ok(profile)
    }

    /// Builds a profile from sampled positions, checking that they are
    /// uniformly spaced and that `period` is a whole number of cells.
    pub fn from_samples(
        x: &[f64],
        eps_single: Vec<f64>,
        eps_periodic: Vec<f64>,
        period: f64,
    ) -> Result<Self> {
        if x.len() < 2 {
            return Err(Error::InvalidProfile("need at least two samples".into()));
        }
        let spacing = (x[x.len() - 1] - x[0]) / (x.len() - 1) as f64;
        if !(spacing > 0.0) {
            return Err(Error::InvalidProfile("positions must increase".into()));
        }
        for (i, xi) in x.iter().enumerate() {
            if (xi - (x[0] + i as f64 * spacing)).abs() > 1e-9 * spacing.max(xi.abs()) {
                return Err(Error::InvalidProfile(format!(
                    "grid is not uniform at sample {i} (x = {xi})"
                )));
            }
        }
        let cells = period / spacing;
        if !(cells >= 1.0) || (cells - cells.round()).abs() > 1e-6 {
            return Err(Error::InvalidProfile(format!(
                "period {period} is not a whole number of grid cells (spacing {spacing})"
            )));
        }
        Self::new(
            x[0],
            spacing,
            eps_single,
            eps_periodic,
            cells.round() as usize,
        )
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.eps_single.len();
        if self.eps_periodic.len() != p {
            return Err(Error::InvalidProfile(
                "eps_single and eps_periodic differ in length".into(),
            ));
        }
        if !(self.spacing > 0.0 && self.spacing.is_finite()) {
            return Err(Error::InvalidProfile(format!(
                "spacing {} must be positive",
                self.spacing
            )));
        }
        if self.period_cells == 0 {
            return Err(Error::InvalidProfile(
                "period must span at least one cell".into(),
            ));
        }
        if let Some((i, e)) = self
            .eps_single
            .iter()
            .chain(&self.eps_periodic)
            .enumerate()
            .find(|(_, e)| !(**e >= 1.0) || !e.is_finite())
        {
            return Err(Error::InvalidProfile(format!(
                "permittivity must be finite and ≥ 1 (sample {}: {e})",
                i % p
            )));
        }
        // Periodicity away from the outermost period at each end.
        let l = self.period_cells;
        if p > 3 * l {
            for i in l..p - 2 * l {
                let d = (self.eps_periodic[i + l] - self.eps_periodic[i]).abs();
                if d > PERIODICITY_TOLERANCE {
                    return Err(Error::InvalidProfile(format!(
                        "eps_periodic is not periodic with {l} cells at sample {i} (|Δε| = {d:e})"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.eps_single.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eps_single.is_empty()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.spacing
    }

    pub fn period(&self) -> f64 {
        self.period_cells as f64 * self.spacing
    }

    /// Same samples with every position moved by `offset`.
    pub fn translated(&self, offset: f64) -> Self {
        Self {
            origin: self.origin + offset,
            ..self.clone()
        }
    }
}

/// A localized eigenmode of the single-cavity profile.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalizedMode {
    /// `ω = sqrt(eigenvalue)` with `c = 1`.
    pub frequency: f64,
    /// Field samples on the full grid, zero at both walls, normalized so
    /// `∫ε₀φ²dx = 1`, largest lobe positive.
    pub profile: Vec<f64>,
    /// `(Σφ²)² / (n·Σφ⁴)` over the interior samples: about 2/3 for a
    /// standing wave, small for a localized mode.
    pub participation_ratio: f64,
}

impl LocalizedMode {
    /// The mode shifted right by `cells` samples, zero-filled on the left.
    pub fn translated(&self, cells: usize) -> Self {
        let n = self.profile.len();
        let mut profile = vec![0.0; n];
        if cells < n {
            profile[cells..].copy_from_slice(&self.profile[..n - cells]);
        }
        Self {
            profile,
            ..self.clone()
        }
    }
}

/// Participation ratio of a vector.
pub fn participation_ratio(values: &[f64]) -> f64 {
    let s2: f64 = values.iter().map(|v| v * v).sum();
    let s4: f64 = values.iter().map(|v| v.powi(4)).sum();
    if s4 == 0.0 {
        return 0.0;
    }
    s2 * s2 / (values.len() as f64 * s4)
}

/// Symmetric tridiagonal matrix with diagonal `d` and off-diagonal `e`.
struct SymTridiagonal {
    d: Vec<f64>,
    e: Vec<f64>,
}

impl SymTridiagonal {
    /// Number of eigenvalues strictly below `x` (Sturm count of the LDLᵀ
    /// pivots).
    fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.d.len() {
            let e2 = if i == 0 {
                0.0
            } else {
                self.e[i - 1] * self.e[i - 1]
            };
            q = self.d[i] - x - if i == 0 { 0.0 } else { e2 / q };
            if q == 0.0 {
                q = -f64::EPSILON * (self.d[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `k`-th smallest eigenvalue (0-based) inside `[lo, hi]`.
    fn eigenvalue(&self, k: usize, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Eigenvector for the eigenvalue `lambda` by inverse iteration.
    fn eigenvector(&self, lambda: f64) -> Vec<f64> {
        let n = self.d.len();
        let scale = self.d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        // Pseudo-random start, so no eigenvector is orthogonal to it.
        let mut y: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.5 * ((i as f64 * 0.618_033_988_75).fract() - 0.5))
            .collect();
        let shift = lambda + f64::EPSILON * scale;
        for _ in 0..INVERSE_ITERATIONS {
            y = solve_shifted(&self.d, &self.e, shift, &y);
            let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 || !norm.is_finite() {
                break;
            }
            y.iter_mut().for_each(|v| *v /= norm);
        }
        y
    }
}

/// Solves `(T − σI)y = b` for symmetric tridiagonal `T` by Gaussian
/// elimination with partial pivoting.
fn solve_shifted(d: &[f64], e: &[f64], sigma: f64, b: &[f64]) -> Vec<f64> {
    let n = d.len();
    if n == 1 {
        let p = d[0] - sigma;
        return vec![b[0] / if p == 0.0 { f64::EPSILON } else { p }];
    }
    // Row i holds (diag, upper, second upper) after elimination.
    let mut diag: Vec<f64> = d.iter().map(|v| v - sigma).collect();
    let mut upper: Vec<f64> = e.to_vec();
    upper.push(0.0);
    let mut upper2 = vec![0.0; n];
    let mut lower: Vec<f64> = e.to_vec();
    let mut rhs = b.to_vec();
    let tiny = f64::EPSILON * d.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    for i in 0..n - 1 {
        if lower[i].abs() > diag[i].abs() {
            // Swap rows i and i+1.
            let (a0, b0, c0) = (diag[i], upper[i], upper2[i]);
            let (a1, b1) = (lower[i], diag[i + 1]);
            let c1 = upper[i + 1];
            diag[i] = a1;
            upper[i] = b1;
            upper2[i] = c1;
            let m = a0 / a1;
            diag[i + 1] = b0 - m * b1;
            upper[i + 1] = c0 - m * c1;
            rhs.swap(i, i + 1);
            rhs[i + 1] -= m * rhs[i];
        } else {
            if diag[i] == 0.0 {
                diag[i] = tiny;
            }
            let m = lower[i] / diag[i];
            diag[i + 1] -= m * upper[i];
            upper[i + 1] -= m * upper2[i];
            rhs[i + 1] -= m * rhs[i];
        }
        lower[i] = 0.0;
    }
    if diag[n - 1] == 0.0 {
        diag[n - 1] = tiny;
    }
    let mut y = vec![0.0; n];
    for i in (0..n).rev() {
        let mut acc = rhs[i];
        if i + 1 < n {
            acc -= upper[i] * y[i + 1];
        }
        if i + 2 < n {
            acc -= upper2[i] * y[i + 2];
        }
        y[i] = acc / diag[i];
    }
    y
}

/// Trapezoid rule on the profile grid.
fn trapezoid(spacing: f64, values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    if v.len() < 2 {
        return 0.0;
    }
    let inner: f64 = v[1..v.len() - 1].iter().sum();
    spacing * (inner + 0.5 * (v[0] + v[v.len() - 1]))
}

/// The most localized well-resolved eigenmode of `eps_single`.
pub fn solve_defect_mode(profile: &DielectricProfile1D) -> Result<LocalizedMode> {
    profile.validate()?;
    let p = profile.len();
    if p < MIN_GRID_POINTS {
        return Err(Error::InvalidProfile(format!(
            "need at least {MIN_GRID_POINTS} grid points, got {p}"
        )));
    }
    let h = profile.spacing;
    let eps = &profile.eps_single[1..p - 1];
    let inv_h2 = 1.0 / (h * h);
    let matrix = SymTridiagonal {
        d: eps.iter().map(|e| 2.0 * inv_h2 / e).collect(),
        e: eps
            .windows(2)
            .map(|w| -inv_h2 / (w[0] * w[1]).sqrt())
            .collect(),
    };
    let eps_max = eps.iter().fold(1.0f64, |m, e| m.max(*e));
    // ω·sqrt(ε_max)·h ≤ 2π/POINTS_PER_WAVELENGTH
    let omega_cut = 2.0 * PI / (POINTS_PER_WAVELENGTH * h * eps_max.sqrt());
    let lambda_cut = omega_cut * omega_cut;
    let resolved = matrix.count_below(lambda_cut);

    let mut best: Option<(f64, f64, Vec<f64>)> = None;
    for k in 0..resolved {
        let lambda = matrix.eigenvalue(k, 0.0, lambda_cut);
        let y = matrix.eigenvector(lambda);
        let field: Vec<f64> = y.iter().zip(eps).map(|(v, e)| v / e.sqrt()).collect();
        let pr = participation_ratio(&field);
        if best.as_ref().is_none_or(|b| pr < b.1) {
            best = Some((lambda, pr, field));
        }
    }
    let Some((lambda, pr, field)) = best else {
        return Err(Error::NoLocalizedMode { best_ratio: 1.0 });
    };
    if pr >= LOCALIZATION_THRESHOLD {
        return Err(Error::NoLocalizedMode { best_ratio: pr });
    }

    let mut full = Vec::with_capacity(p);
    full.push(0.0);
    full.extend(field);
    full.push(0.0);
    let norm = trapezoid(
        h,
        full.iter().zip(&profile.eps_single).map(|(f, e)| e * f * f),
    );
    let peak = full
        .iter()
        .fold(0.0f64, |m, v| if v.abs() > m.abs() { *v } else { m });
    let scale = peak.signum() / norm.sqrt();
    full.iter_mut().for_each(|v| *v *= scale);
    Ok(LocalizedMode {
        frequency: lambda.sqrt(),
        profile: full,
        participation_ratio: pr,
    })
}

/// `∫ε₀φ²dx` with `ε₀` shifted right by `cells` (samples shifted in from
/// the left edge are taken as vacuum, `ε = 1`).
fn weighted_norm(profile: &DielectricProfile1D, mode: &[f64], cells: usize) -> f64 {
    let eps = |i: usize| {
        if i >= cells {
            profile.eps_single[i - cells]
        } else {
            1.0
        }
    };
    trapezoid(
        profile.spacing,
        mode.iter().enumerate().map(|(i, f)| eps(i) * f * f),
    )
}

/// Overlap integral `α = ∫(ε₀ − ε)φ_jφ_{j+1}dx`. `phi_j1` must be `phi_j`
/// translated by one array period (see [`LocalizedMode::translated`]).
pub fn overlap_alpha(
    profile: &DielectricProfile1D,
    phi_j: &LocalizedMode,
    phi_j1: &LocalizedMode,
) -> Result<f64> {
    profile.validate()?;
    let p = profile.len();
    if phi_j.profile.len() != p || phi_j1.profile.len() != p {
        return Err(Error::InvalidProfile(
            "mode and profile lengths differ".into(),
        ));
    }
    for (mode, cells) in [(phi_j, 0), (phi_j1, profile.period_cells)] {
        let norm = weighted_norm(profile, &mode.profile, cells);
        if (norm - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::NotNormalized { norm });
        }
    }
    let h = profile.spacing;
    let tails = trapezoid(
        h,
        phi_j
            .profile
            .iter()
            .zip(&phi_j1.profile)
            .map(|(a, b)| a * b),
    );
    let sign = if tails < 0.0 { -1.0 } else { 1.0 };
    let raw = trapezoid(
        h,
        (0..p).map(|i| {
            (profile.eps_single[i] - profile.eps_periodic[i]) * phi_j.profile[i] * phi_j1.profile[i]
        }),
    );
    Ok(sign * raw)
}

/// Convenience: solve the defect mode, translate it by one period and
/// evaluate [`overlap_alpha`]. Returns the mode and `α`.
pub fn coupling_from_profile(profile: &DielectricProfile1D) -> Result<(LocalizedMode, f64)> {
    let mode = solve_defect_mode(profile)?;
    let next = mode.translated(profile.period_cells);
    let alpha = overlap_alpha(profile, &mode, &next)?;
    Ok((mode, alpha))
}

/// Sinusoidal Bragg grating `ε̄ + Δε·cos(2πx/a + θ(x))` whose cavities are
/// smooth phase slips of `slip·π` in `θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GratingArray {
    pub mean_eps: f64,
    pub contrast: f64,
    /// Grating period `a`.
    pub grating_period: f64,
    /// Half-width of each phase slip, in units of length.
    pub slip_width: f64,
    /// Phase slip per cavity in units of π; 1 puts the mode mid-gap.
    pub slip: f64,
}

impl Default for GratingArray {
    fn default() -> Self {
        Self {
            mean_eps: 6.0,
            contrast: 4.0,
            grating_period: 1.0,
            slip_width: 0.5,
            slip: 1.0,
        }
    }
}

/// `C^∞` step rising from 0 at `u = −1` to 1 at `u = 1`.
fn smooth_step(u: f64) -> f64 {
    if u <= -1.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    let psi = |s: f64| if s > 0.0 { (-1.0 / s).exp() } else { 0.0 };
    let (a, b) = (psi(u + 1.0), psi(1.0 - u));
    a / (a + b)
}

impl GratingArray {
    /// Cavity spacing `(m − slip/2)·a`, the values for which a chain of
    /// slips is exactly periodic.
    pub fn cavity_period(&self, grating_periods: usize) -> f64 {
        (grating_periods as f64 - self.slip / 2.0) * self.grating_period
    }

    fn eps(&self, x: f64, theta: f64) -> f64 {
        self.mean_eps + self.contrast * (2.0 * PI * x / self.grating_period + theta).cos()
    }

    /// Samples both profiles on `[0, length_periods·a]` with
    /// `cells_per_grating` cells per grating period. The single cavity sits
    /// half an array period left of the domain centre, so the cavity and its
    /// right neighbour are placed symmetrically.
    pub fn profile(
        &self,
        length_periods: usize,
        cells_per_grating: usize,
        cavity_spacing: usize,
    ) -> Result<DielectricProfile1D> {
        let a = self.grating_period;
        let h = a / cells_per_grating as f64;
        let period = self.cavity_period(cavity_spacing);
        let cells = period / h;
        if !(period > 0.0) || (cells - cells.round()).abs() > 1e-9 {
            return Err(Error::InvalidProfile(format!(
                "cavity period {period} is not a whole number of cells of size {h}"
            )));
        }
        let length = length_periods as f64 * a;
        let n = length_periods * cells_per_grating + 1;
        let centre = 0.5 * length - 0.5 * period;
        let slip = self.slip * PI;
        let w = self.slip_width;
        let reach = (length / period).ceil() as i64 + 1;

        let mut eps_single = Vec::with_capacity(n);
        let mut eps_periodic = Vec::with_capacity(n);
        for i in 0..n {
            let x = i as f64 * h;
            eps_single.push(self.eps(x, slip * smooth_step((x - centre) / w)));
            // Counted from the central cavity, so both profiles agree
            // between its neighbours.
            let theta: f64 = (-reach..=reach)
                .map(|j| {
                    let s = smooth_step((x - centre - j as f64 * period) / w);
                    if j >= 0 {
                        s
                    } else {
                        s - 1.0
                    }
                })
                .sum::<f64>()
                * slip;
            eps_periodic.push(self.eps(x, theta));
        }
        DielectricProfile1D::new(0.0, h, eps_single, eps_periodic, cells.round() as usize)
    }
}
