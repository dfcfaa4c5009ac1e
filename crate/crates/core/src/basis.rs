//! Position grid and trap eigenbases.
//!
//! Lengths are in a₀ (rms width of the harmonic ground state), energies in ħν.
//! The harmonic basis uses analytic Hermite functions; any other potential is
//! diagonalized with second-order finite differences and Dirichlet ends.

use ndarray::{Array1, Array2, Axis};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::SymTridiagonal;
use crate::model::{DensityMatrix, SimulationConfig, TrapKind};

/// Uniform grid on [−L, L].
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    points: Array1<f64>,
    half_width: f64,
    spacing: f64,
}

impl Grid {
    pub fn points(&self) -> &Array1<f64> {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Same half-width and point count.
    pub fn same_as(&self, other: &Grid) -> bool {
        self.len() == other.len() && self.half_width == other.half_width
    }
}

pub fn build_grid(half_width: f64, points: usize) -> Result<Grid> {
    if !(half_width.is_finite() && half_width > 0.0) {
        return Err(Error::InvalidArgument(format!("grid half-width {half_width} must be > 0")));
    }
    if points < 2 {
        return Err(Error::InvalidArgument(format!("grid needs at least 2 points, got {points}")));
    }
    let last = (points - 1) as f64;
    let xs = Array1::from_shape_fn(points, |j| -half_width + 2.0 * half_width * (j as f64) / last);
    Ok(Grid { points: xs, half_width, spacing: 2.0 * half_width / last })
}

/// Grid plus the lowest trap eigenpairs.
#[derive(Debug, Clone)]
pub struct TrapBasis {
    grid: Grid,
    energies: Array1<f64>,
    /// `wavefunctions[[j, n]] = ψ_n(x_j)`
    wavefunctions: Array2<f64>,
}

impl TrapBasis {
    pub const BOUNDARY_DECAY: f64 = 1e-6;

    fn new(grid: Grid, energies: Array1<f64>, wavefunctions: Array2<f64>) -> Result<Self> {
        let basis = TrapBasis { grid, energies, wavefunctions };
        basis.check_boundary_decay()?;
        Ok(basis)
    }

    /// Builds the basis a configuration asks for. A perturbed trap with ε = 0
    /// is the harmonic trap and gets the analytic basis.
    pub fn for_config(config: &SimulationConfig) -> Result<Self> {
        let spec = config.grid_spec();
        let grid = build_grid(spec.half_width, spec.points)?;
        match config.trap {
            TrapKind::Harmonic => harmonic_eigenbasis(&grid, config.basis_size),
            TrapKind::Perturbed { epsilon, .. } if epsilon == 0.0 => {
                harmonic_eigenbasis(&grid, config.basis_size)
            }
            TrapKind::Perturbed { epsilon, g } => {
                solve_potential_eigenbasis(&grid, epsilon, g, config.basis_size)
            }
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &Array1<f64> {
        &self.energies
    }

    pub fn wavefunctions(&self) -> &Array2<f64> {
        &self.wavefunctions
    }

    fn check_boundary_decay(&self) -> Result<()> {
        let m = self.grid.len();
        for (n, psi) in self.wavefunctions.axis_iter(Axis(1)).enumerate() {
            let peak = psi.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let edge = psi[0].abs().max(psi[m - 1].abs());
            let ratio = if peak > 0.0 { edge / peak } else { f64::INFINITY };
            if !(ratio < Self::BOUNDARY_DECAY) {
                return Err(Error::BoundaryDecay { state: n, ratio });
            }
        }
        Ok(())
    }

    /// max |h·ΨᵀΨ − I|
    pub fn orthonormality_error(&self) -> f64 {
        let gram = self.wavefunctions.t().dot(&self.wavefunctions) * self.grid.spacing();
        let mut worst = 0.0f64;
        for ((i, j), v) in gram.indexed_iter() {
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((v - want).abs());
        }
        worst
    }

    /// ⟨x_j|f⟩ for a state given by its eigenbasis coefficients.
    pub fn to_position(&self, coefficients: &[Complex64]) -> Result<Vec<Complex64>> {
        if coefficients.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: coefficients.len() });
        }
        Ok(self
            .wavefunctions
            .axis_iter(Axis(0))
            .map(|row| row.iter().zip(coefficients).map(|(psi, c)| c * psi).sum())
            .collect())
    }

    /// ⟨x_j|ρ|x_j⟩ on the grid.
    pub fn spatial_density(&self, rho: &DensityMatrix) -> Result<Vec<f64>> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: rho.dim() });
        }
        // The imaginary part of a Hermitian ρ is antisymmetric and drops out.
        let re = rho.matrix().mapv(|z| z.re);
        let t = self.wavefunctions.dot(&re);
        Ok(t.axis_iter(Axis(0))
            .zip(self.wavefunctions.axis_iter(Axis(0)))
            .map(|(a, b)| a.dot(&b))
            .collect())
    }
}

/// Normalized Hermite functions of H₀ = −d²/dx² + x²/4, E_n = n.
pub fn harmonic_eigenbasis(grid: &Grid, basis_size: usize) -> Result<TrapBasis> {
    if basis_size == 0 {
        return Err(Error::InvalidArgument("basis size must be positive".into()));
    }
    let mut psi = Array2::<f64>::zeros((grid.len(), basis_size));
    for (j, &x) in grid.points().iter().enumerate() {
        let mut row = psi.row_mut(j);
        hermite_functions(x, row.as_slice_mut().expect("row-major"));
    }
    let energies = Array1::from_shape_fn(basis_size, |n| n as f64);
    TrapBasis::new(grid.clone(), energies, psi)
}

const RESCALE: f64 = 1e150;

/// Fills `out[n] = ψ_n(x)` for the oscillator with unit rms ground width:
/// ψ_n(x) = 2^{−1/4} φ_n(x/√2), with φ_n the standard Hermite functions.
/// The recurrence carries a separate exponent so that high orders far in
/// the tail neither overflow nor underflow prematurely.
fn hermite_functions(x: f64, out: &mut [f64]) {
    let y = x / std::f64::consts::SQRT_2;
    let norm = std::f64::consts::PI.powf(-0.25) * 2f64.powf(-0.25);
    // out[n] * exp(log_scale - y²/2) is the true value.
    let mut log_scale = 0.0f64;
    let mut prev = 0.0;
    let mut cur = norm;
    let mut scales = Vec::with_capacity(out.len());
    for n in 0..out.len() {
        if n > 0 {
            let nf = n as f64;
            let next = (2.0 / nf).sqrt() * y * cur - ((nf - 1.0) / nf).sqrt() * prev;
            prev = cur;
            cur = next;
            if cur.abs() > RESCALE {
                cur /= RESCALE;
                prev /= RESCALE;
                log_scale += RESCALE.ln();
            }
        }
        out[n] = cur;
        scales.push(log_scale);
    }
    let gauss = -0.5 * y * y;
    for (v, s) in out.iter_mut().zip(scales) {
        *v *= (s + gauss).exp();
    }
}

/// Lowest eigenpairs of −d²/dx² + ¼[x² + ε x²/(1 + g x²)] by finite differences.
///
/// Eigenvectors are normalized under the grid quadrature and signed so that
/// ψ_n is positive at the first grid point where |ψ_n| exceeds half its maximum.
pub fn solve_potential_eigenbasis(
    grid: &Grid,
    epsilon: f64,
    g: f64,
    basis_size: usize,
) -> Result<TrapBasis> {
    if !(epsilon.is_finite() && epsilon >= 0.0) || !(g.is_finite() && g >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "potential parameters must be >= 0 (epsilon {epsilon}, g {g})"
        )));
    }
    if basis_size == 0 || basis_size > grid.len() {
        return Err(Error::InvalidArgument(format!(
            "basis size {basis_size} incompatible with {} grid points",
            grid.len()
        )));
    }
    let h = grid.spacing();
    let kinetic = 1.0 / (h * h);
    let diag: Vec<f64> = grid
        .points()
        .iter()
        .map(|&x| 2.0 * kinetic + 0.25 * (x * x + epsilon * x * x / (1.0 + g * x * x)))
        .collect();
    let off = vec![-kinetic; grid.len() - 1];
    let (values, mut vectors) = SymTridiagonal::new(diag, off).lowest_eigenpairs(basis_size)?;

    let scale = 1.0 / h.sqrt();
    for mut column in vectors.axis_iter_mut(Axis(1)) {
        column *= scale;
        let peak = column.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let anchor = column.iter().find(|v| v.abs() > 0.5 * peak).copied().unwrap_or(1.0);
        if anchor < 0.0 {
            column *= -1.0;
        }
    }
    TrapBasis::new(grid.clone(), Array1::from(values), vectors)
}

/// rms widths √(⟨x²⟩ − ⟨x⟩²) of the first `count` eigenstates.
pub fn eigenstate_widths(basis: &TrapBasis, count: usize) -> Result<Vec<f64>> {
    if count > basis.dim() {
        return Err(Error::InvalidArgument(format!(
            "requested {count} widths from a basis of {}",
            basis.dim()
        )));
    }
    let h = basis.grid().spacing();
    let xs = basis.grid().points();
    Ok((0..count)
        .map(|n| {
            let psi = basis.wavefunctions().column(n);
            let mut m0 = 0.0;
            let mut m1 = 0.0;
            let mut m2 = 0.0;
            for (&x, &p) in xs.iter().zip(psi.iter()) {
                let w = p * p;
                m0 += w;
                m1 += w * x;
                m2 += w * x * x;
            }
            let (m0, m1, m2) = (m0 * h, m1 * h, m2 * h);
            let mean = m1 / m0;
            (m2 / m0 - mean * mean).max(0.0).sqrt()
        })
        .collect())
}
