//! Ingredients of the three-pulse cycle map and its application.
//!
//! One cycle acts on the ground-manifold density matrix as
//!
//! ```text
//! ρ ← U C ρ C U† + ζ F,   ζ = 1 − tr(C ρ C),
//! ```
//!
//! where C is multiplication by cos θ(x) (θ = ΩΔt/2 the local pulse area)
//! expressed in the trap eigenbasis, U = diag(e^{−iE_n νT_sep}) is the free
//! evolution during the separation time, and F is the feeding matrix: the
//! thermal reset distribution after an optical-pumping recoil kick.

use std::sync::Arc;

use ndarray::{s, Array2, Axis};
use num_complex::Complex64;

use crate::basis::{Grid, TrapBasis};
use crate::error::{Error, Result};
use crate::model::{AngularDistribution, DensityMatrix};
use crate::quadrature::gauss_legendre;

/// Local pulse area θ(x_j) = Ω(x_j)Δt/2.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseProfile {
    grid: Grid,
    areas: Vec<f64>,
}

impl PulseProfile {
    /// θ(x) = `area` everywhere.
    pub fn uniform(grid: &Grid, area: f64) -> Self {
        PulseProfile { grid: grid.clone(), areas: vec![area; grid.len()] }
    }

    pub fn from_areas(grid: &Grid, areas: Vec<f64>) -> Result<Self> {
        if areas.len() != grid.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), found: areas.len() });
        }
        Ok(PulseProfile { grid: grid.clone(), areas })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    pub fn cosines(&self) -> Vec<f64> {
        self.areas.iter().map(|t| t.cos()).collect()
    }
}

/// Doughnut profile θ(x) ∝ x^{2n} exp(−x²/2α²), scaled so its grid maximum is `peak`.
pub fn doughnut_profile(grid: &Grid, order: u32, width: f64, peak: f64) -> Result<PulseProfile> {
    if !(width.is_finite() && width > 0.0) {
        return Err(Error::InvalidArgument(format!("doughnut width {width} must be > 0")));
    }
    if !(peak.is_finite() && peak >= 0.0) {
        return Err(Error::InvalidArgument(format!("peak pulse area {peak} must be >= 0")));
    }
    let radius = width * (2.0 * order as f64).sqrt();
    if radius > grid.half_width() {
        return Err(Error::EmptyProfile { radius, half_width: grid.half_width() });
    }
    // Evaluated through the logarithm; x^{2n} for large n and |x| overflows otherwise.
    let exponent = 2.0 * order as f64;
    let logs: Vec<f64> = grid
        .points()
        .iter()
        .map(|&x| {
            let gauss = -0.5 * (x / width).powi(2);
            if order == 0 {
                gauss
            } else if x == 0.0 {
                f64::NEG_INFINITY
            } else {
                exponent * x.abs().ln() + gauss
            }
        })
        .collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return Err(Error::EmptyProfile { radius, half_width: grid.half_width() });
    }
    let areas = logs.iter().map(|&l| peak * (l - top).exp()).collect();
    Ok(PulseProfile { grid: grid.clone(), areas })
}

/// C_mn = h Σ_j ψ_m(x_j) cos θ(x_j) ψ_n(x_j).
pub fn cosine_operator(profile: &PulseProfile, basis: &TrapBasis) -> Result<Array2<f64>> {
    if !profile.grid().same_as(basis.grid()) {
        return Err(Error::GridMismatch);
    }
    Ok(weighted_overlap(basis, &profile.cosines()))
}

/// h Ψᵀ diag(w) Ψ, symmetrized.
fn weighted_overlap(basis: &TrapBasis, weights: &[f64]) -> Array2<f64> {
    let psi = basis.wavefunctions();
    let h = basis.grid().spacing();
    let mut scaled = psi.clone();
    for (mut row, &w) in scaled.axis_iter_mut(Axis(0)).zip(weights) {
        row *= w * h;
    }
    let m = psi.t().dot(&scaled);
    let mt = m.t().to_owned();
    (m + mt) * 0.5
}

/// Truncated Boltzmann weights p_n ∝ e^{−n/N}, summing to one over n < `basis_size`.
pub fn thermal_state(quanta: f64, basis_size: usize) -> Vec<f64> {
    if basis_size == 0 {
        return Vec::new();
    }
    if quanta <= 0.0 {
        let mut p = vec![0.0; basis_size];
        p[0] = 1.0;
        return p;
    }
    let raw: Vec<f64> = (0..basis_size).map(|n| (-(n as f64) / quanta).exp()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// Largest tolerated |tr F − 1| before Hermitization.
pub const TRUNCATION_GUARD: f64 = 1e-4;

/// F = ∫ du N(u) e^{ik_p(1+u)x} ρ_th e^{−ik_p(1+u)x}, with k_p = η/a₀, using
/// Gauss–Legendre in u and the grid quadrature for the kick matrix elements.
///
/// The result is Hermitized and rescaled to unit trace; the pre-scaling trace
/// must already lie within [`TRUNCATION_GUARD`] of one.
pub fn feeding_matrix(
    thermal: &[f64],
    lamb_dicke: f64,
    basis: &TrapBasis,
    distribution: AngularDistribution,
    quadrature_order: usize,
) -> Result<Array2<Complex64>> {
    let n = basis.dim();
    if thermal.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: thermal.len() });
    }
    let (nodes, weights) = gauss_legendre(quadrature_order)?;
    let xs = basis.grid().points();
    let mut re = Array2::<f64>::zeros((n, n));
    let mut im = Array2::<f64>::zeros((n, n));
    let mut cos_w = vec![0.0; xs.len()];
    let mut sin_w = vec![0.0; xs.len()];
    for (&u, &w) in nodes.iter().zip(&weights) {
        let q = lamb_dicke * (1.0 + u);
        for (j, &x) in xs.iter().enumerate() {
            let (s, c) = (q * x).sin_cos();
            cos_w[j] = c;
            sin_w[j] = s;
        }
        // D = R + iS with R, S real symmetric.
        let r = weighted_overlap(basis, &cos_w);
        let sm = weighted_overlap(basis, &sin_w);
        // RP and SP: scale column l by p_l.
        let mut rp = r.clone();
        let mut sp = sm.clone();
        for ((mut col_r, mut col_s), &p) in
            rp.axis_iter_mut(Axis(1)).zip(sp.axis_iter_mut(Axis(1))).zip(thermal)
        {
            col_r *= p;
            col_s *= p;
        }
        // D P D† = (RPR + SPS) + i(SPR − RPS), and RPS = (SPR)ᵀ.
        let weight = w * distribution.density(u);
        let real_part = rp.dot(&r) + sp.dot(&sm);
        let spr = sp.dot(&r);
        re.scaled_add(weight, &real_part);
        im.scaled_add(weight, &spr);
        im.scaled_add(-weight, &spr.t());
    }
    let trace: f64 = re.diag().sum();
    let deviation = (trace - 1.0).abs();
    if !(deviation <= TRUNCATION_GUARD) {
        return Err(Error::Truncation { deviation });
    }
    let mut f = Array2::from_shape_fn((n, n), |(i, j)| Complex64::new(re[[i, j]], im[[i, j]]));
    hermitize(&mut f);
    f.mapv_inplace(|z| z / trace);
    Ok(f)
}

/// ρ ← (ρ + ρ†)/2
fn hermitize(m: &mut Array2<Complex64>) {
    let n = m.nrows();
    for i in 0..n {
        m[[i, i]].im = 0.0;
        for j in i + 1..n {
            let avg = 0.5 * (m[[i, j]] + m[[j, i]].conj());
            m[[i, j]] = avg;
            m[[j, i]] = avg.conj();
        }
    }
}

/// Precomputed operators of one cooling configuration.
#[derive(Debug, Clone)]
pub struct CycleOperators {
    profile: Option<PulseProfile>,
    cosine: Array2<f64>,
    energies: Vec<f64>,
    feeding: Arc<Array2<Complex64>>,
    thermal: Arc<Vec<f64>>,
}

impl CycleOperators {
    pub const C_SPECTRUM_TOL: f64 = 1e-8;

    pub fn build(
        profile: PulseProfile,
        basis: &TrapBasis,
        thermal_quanta: f64,
        lamb_dicke: f64,
        distribution: AngularDistribution,
        quadrature_order: usize,
    ) -> Result<Self> {
        let thermal = thermal_state(thermal_quanta, basis.dim());
        let feeding = feeding_matrix(&thermal, lamb_dicke, basis, distribution, quadrature_order)?;
        let cosine = cosine_operator(&profile, basis)?;
        Ok(CycleOperators {
            profile: Some(profile),
            cosine,
            energies: basis.energies().to_vec(),
            feeding: Arc::new(feeding),
            thermal: Arc::new(thermal),
        })
    }

    /// Same energies, thermal state and feeding matrix with a new pulse profile.
    pub fn with_profile(&self, profile: PulseProfile, basis: &TrapBasis) -> Result<Self> {
        if basis.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: basis.dim() });
        }
        let cosine = cosine_operator(&profile, basis)?;
        Ok(CycleOperators { profile: Some(profile), cosine, ..self.clone() })
    }

    /// Assembles operators directly (no profile attached).
    pub fn from_parts(
        cosine: Array2<f64>,
        energies: Vec<f64>,
        feeding: Array2<Complex64>,
        thermal: Vec<f64>,
    ) -> Result<Self> {
        let n = energies.len();
        for found in [cosine.nrows(), cosine.ncols(), feeding.nrows(), feeding.ncols(), thermal.len()] {
            if found != n {
                return Err(Error::DimensionMismatch { expected: n, found });
            }
        }
        Ok(CycleOperators {
            profile: None,
            cosine,
            energies,
            feeding: Arc::new(feeding),
            thermal: Arc::new(thermal),
        })
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn profile(&self) -> Option<&PulseProfile> {
        self.profile.as_ref()
    }

    pub fn cosine(&self) -> &Array2<f64> {
        &self.cosine
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn feeding(&self) -> &Array2<Complex64> {
        &self.feeding
    }

    pub fn thermal(&self) -> &[f64] {
        &self.thermal
    }
}

/// Applies one full cycle at separation time `tsep` (= νT_sep, radians).
/// Returns the new state and the excitation probability ζ of this cycle.
pub fn apply_cycle(
    rho: &DensityMatrix,
    ops: &CycleOperators,
    tsep: f64,
) -> Result<(DensityMatrix, f64)> {
    let n = ops.dim();
    if rho.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: rho.dim() });
    }
    let c = ops.cosine();
    let m = rho.matrix();

    // σ = CρC on the real and imaginary parts, stacked so each product is one gemm.
    let mut parts = Array2::<f64>::zeros((n, 2 * n));
    for ((i, j), z) in m.indexed_iter() {
        parts[[i, j]] = z.re;
        parts[[i, j + n]] = z.im;
    }
    let left = c.dot(&parts);
    let mut stacked = Array2::<f64>::zeros((2 * n, n));
    stacked.slice_mut(s![..n, ..]).assign(&left.slice(s![.., ..n]));
    stacked.slice_mut(s![n.., ..]).assign(&left.slice(s![.., n..]));
    let sigma = stacked.dot(c);

    let zeta = 1.0 - sigma.slice(s![..n, ..]).diag().sum();
    if !(-1e-6..=1.0 + 1e-6).contains(&zeta) {
        return Err(Error::ExcitationOutOfRange(zeta));
    }

    let phases: Vec<Complex64> =
        ops.energies().iter().map(|&e| Complex64::from_polar(1.0, -e * tsep)).collect();
    let f = ops.feeding();
    let mut out = Array2::<Complex64>::zeros((n, n));
    for i in 0..n {
        for j in i..n {
            let s_ij = Complex64::new(sigma[[i, j]], sigma[[i + n, j]]);
            let s_ji = Complex64::new(sigma[[j, i]], sigma[[j + n, i]]);
            // Average with the mirrored element to keep ρ exactly Hermitian.
            let sym = 0.5 * (s_ij + s_ji.conj());
            let v = phases[i] * sym * phases[j].conj() + zeta * f[[i, j]];
            if i == j {
                out[[i, i]] = Complex64::new(v.re, 0.0);
            } else {
                out[[i, j]] = v;
                out[[j, i]] = v.conj();
            }
        }
    }
    Ok((DensityMatrix::from_matrix(out)?, zeta))
}

/// Distance of |f⟩ from satisfying the dark-state condition
/// ⟨x|e^{iH₀T}|f⟩ e^{iφ} = cos θ(x) ⟨x|f⟩: the grid norm of e^{iφ}a − b at the
/// minimizing phase, where e^{iφ} = ⟨a, b⟩/|⟨a, b⟩|.
pub fn dark_state_residual(
    state: &[Complex64],
    profile: &PulseProfile,
    basis: &TrapBasis,
    tsep: f64,
) -> Result<f64> {
    if !profile.grid().same_as(basis.grid()) {
        return Err(Error::GridMismatch);
    }
    if state.len() != basis.dim() {
        return Err(Error::DimensionMismatch { expected: basis.dim(), found: state.len() });
    }
    let norm = state.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::Unnormalized(norm));
    }
    let evolved: Vec<Complex64> = state
        .iter()
        .zip(basis.energies())
        .map(|(&c, &e)| c * Complex64::from_polar(1.0, e * tsep))
        .collect();
    let a = basis.to_position(&evolved)?;
    let f = basis.to_position(state)?;
    let h = basis.grid().spacing();
    let cosines = profile.cosines();
    let b: Vec<Complex64> = f.iter().zip(&cosines).map(|(f, c)| f * c).collect();
    let overlap: Complex64 = a.iter().zip(&b).map(|(a, b)| a.conj() * b).sum();
    let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { Complex64::new(1.0, 0.0) };
    let squared: f64 = a.iter().zip(&b).map(|(a, b)| (phase * a - b).norm_sqr()).sum();
    Ok((h * squared).sqrt())
}

/// Single-cycle excitation probabilities ζ_n = 1 − (C²)_nn of the first `count` levels.
pub fn reexcitation_rates(ops: &CycleOperators, count: usize) -> Result<Vec<f64>> {
    excitation_probabilities(ops.cosine(), count)
}

/// ζ_n = 1 − Σ_k C_nk² for the first `count` rows of a cosine operator.
pub fn excitation_probabilities(cosine: &Array2<f64>, count: usize) -> Result<Vec<f64>> {
    if count > cosine.nrows() {
        return Err(Error::InvalidArgument(format!(
            "requested {count} rates from a basis of {}",
            cosine.nrows()
        )));
    }
    Ok((0..count).map(|n| 1.0 - cosine.row(n).dot(&cosine.row(n))).collect())
}
