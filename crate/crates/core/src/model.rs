//! Configuration and shared domain types.
//!
//! Unit conventions used throughout the crate: ħ = m = ν = 1 for energies and
//! times (energies in ħν, times in 1/ν), and lengths in units of the rms width
//! of the harmonic ground state, a₀ = √(ħ/2mν). With this length unit the
//! Lamb–Dicke parameter is η = k a₀, the pumping wavevector is k_p = η/a₀, the
//! recoil energy is η²ħν, and the trap Hamiltonian reads H₀ = −d²/dx² + x²/4.

use std::fmt;

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Policy for the free-evolution time νT_sep of each cycle (radians).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum TsepPolicy {
    RandomUniform { lo: f64, hi: f64 },
    Fixed { value: f64 },
}

impl TsepPolicy {
    pub const DEFAULT_RANDOM: TsepPolicy = TsepPolicy::RandomUniform { lo: 0.1, hi: 1.1 };

    pub fn is_random(&self) -> bool {
        matches!(self, TsepPolicy::RandomUniform { .. })
    }
}

/// Confining potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum TrapKind {
    Harmonic,
    /// V(x) = ¼[x² + ε x²/(1 + g x²)] in ħν, with g in a₀⁻².
    Perturbed { epsilon: f64, g: f64 },
}

/// Angular distribution N(u) of the spontaneously emitted photon, u = cos ϑ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngularDistribution {
    /// N(u) = 1/2
    #[default]
    Flat,
    /// N(u) = 3/8 (1 + u²)
    Dipole,
}

impl AngularDistribution {
    pub fn density(&self, u: f64) -> f64 {
        match self {
            AngularDistribution::Flat => 0.5,
            AngularDistribution::Dipole => 0.375 * (1.0 + u * u),
        }
    }
}

/// Position grid: half-width L (a₀) and point count M.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub half_width: f64,
    pub points: usize,
}

impl GridSpec {
    pub const DEFAULT_POINTS: usize = 2048;

    /// Classical turning point of the highest retained harmonic level plus
    /// 25%, or plus 8 a₀ for small bases whose tails decay more slowly.
    pub fn default_for(basis_size: usize) -> Self {
        let turning = (4.0 * basis_size as f64 + 2.0).sqrt();
        GridSpec {
            half_width: (1.25 * turning).max(turning + 8.0),
            points: Self::DEFAULT_POINTS.max(4 * basis_size),
        }
    }
}

fn default_quadrature_order() -> usize {
    32
}

/// All physical and numerical parameters of one cooling run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    /// η = k a₀
    pub lamb_dicke: f64,
    /// N of the thermal reset distribution e^{−n/N}
    pub thermal_quanta: f64,
    /// Doughnut order n; the profile exponent is 2n.
    pub doughnut_order: u32,
    /// α, in units of a₀
    pub doughnut_width: f64,
    /// max over x of Ω(x)Δt/2
    pub peak_pulse_area: f64,
    pub tsep_policy: TsepPolicy,
    pub num_pulses: usize,
    pub trap: TrapKind,
    /// n_max, the number of retained trap levels
    pub basis_size: usize,
    /// Derived from `basis_size` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub angular_distribution: AngularDistribution,
    #[serde(default = "default_quadrature_order")]
    pub quadrature_order: usize,
    #[serde(default)]
    pub rng_seed: u64,
}

impl SimulationConfig {
    /// Basis size for η = 5, N = 25. The feeding matrix trips the truncation
    /// guard below about 455 levels; 480 leaves some margin.
    pub const BASIS_SIZE_ETA5: usize = 480;

    /// Harmonic trap, η = 5, N = 25, 2n = 4, α = 4, peak 0.6π, νT_sep ~ U[0.1, 1.1].
    pub fn reference_harmonic() -> Self {
        SimulationConfig {
            lamb_dicke: 5.0,
            thermal_quanta: 25.0,
            doughnut_order: 2,
            doughnut_width: 4.0,
            peak_pulse_area: 0.6 * std::f64::consts::PI,
            tsep_policy: TsepPolicy::DEFAULT_RANDOM,
            num_pulses: 2500,
            trap: TrapKind::Harmonic,
            basis_size: Self::BASIS_SIZE_ETA5,
            grid: None,
            angular_distribution: AngularDistribution::Flat,
            quadrature_order: default_quadrature_order(),
            rng_seed: 1,
        }
    }

    /// Localizing trap ε = 19×10⁵, g = 2000/a₀², doughnut 2n = 2, α = 8.
    pub fn reference_localized() -> Self {
        let basis_size = Self::BASIS_SIZE_ETA5;
        SimulationConfig {
            doughnut_order: 1,
            doughnut_width: 8.0,
            trap: TrapKind::Perturbed { epsilon: 19.0e5, g: 2000.0 },
            grid: Some(GridSpec {
                half_width: GridSpec::default_for(basis_size).half_width,
                points: 32768,
            }),
            basis_size,
            ..Self::reference_harmonic()
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn grid_spec(&self) -> GridSpec {
        self.grid.unwrap_or_else(|| GridSpec::default_for(self.basis_size))
    }

    /// Copy with the derived grid filled in.
    pub fn resolved(&self) -> Self {
        SimulationConfig { grid: Some(self.grid_spec()), ..self.clone() }
    }

    pub fn validate(&self) -> ValidationReport {
        validate(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

/// Outcome of [`validate`]: empty means valid.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn mentions(&self, field: &str) -> bool {
        self.violations.iter().any(|v| v.field == field)
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(self))
        }
    }

    fn push(&mut self, field: &str, message: impl Into<String>) {
        self.violations.push(Violation { field: field.to_string(), message: message.into() });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return write!(f, "valid");
        }
        let parts: Vec<String> =
            self.violations.iter().map(|v| format!("{}: {}", v.field, v.message)).collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// Checks every range invariant of the configuration and reports all failures.
pub fn validate(config: &SimulationConfig) -> ValidationReport {
    let mut report = ValidationReport::default();

    if !(config.lamb_dicke.is_finite() && config.lamb_dicke > 0.0) {
        report.push("lamb_dicke", "must be finite and > 0");
    }
    if !(config.thermal_quanta.is_finite() && config.thermal_quanta >= 0.0) {
        report.push("thermal_quanta", "must be finite and >= 0");
    }
    if !(config.doughnut_width.is_finite() && config.doughnut_width > 0.0) {
        report.push("doughnut_width", "must be finite and > 0");
    }
    if !(config.peak_pulse_area.is_finite() && config.peak_pulse_area >= 0.0) {
        report.push("peak_pulse_area", "must be finite and >= 0");
    }
    match config.tsep_policy {
        TsepPolicy::RandomUniform { lo, hi } => {
            if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo < hi) {
                report.push("tsep_policy", "random_uniform requires 0 < lo < hi");
            }
        }
        TsepPolicy::Fixed { value } => {
            if !value.is_finite() {
                report.push("tsep_policy", "fixed value must be finite");
            }
        }
    }
    if let TrapKind::Perturbed { epsilon, g } = config.trap {
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            report.push("trap", "epsilon must be finite and >= 0");
        }
        if !(g.is_finite() && g >= 0.0) {
            report.push("trap", "g must be finite and >= 0");
        }
    }
    if config.basis_size < 2 {
        report.push("basis_size", "must be >= 2");
    }
    let grid = config.grid_spec();
    if !(grid.half_width.is_finite() && grid.half_width > 0.0) {
        report.push("grid", "half_width must be finite and > 0");
    }
    if grid.points < 4 * config.basis_size {
        report.push(
            "grid",
            format!(
                "resolution rule violated: points ({}) must be >= 4 * basis_size ({})",
                grid.points,
                4 * config.basis_size
            ),
        );
    }
    if config.quadrature_order < 2 {
        report.push("quadrature_order", "must be >= 2");
    }
    report
}

/// Reduced ground-manifold density matrix ρ_g in the trap eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: Array2<Complex64>,
}

impl DensityMatrix {
    pub const HERMITIAN_TOL: f64 = 1e-12;
    pub const TRACE_TOL: f64 = 1e-10;
    pub const PSD_TOL: f64 = 1e-8;

    pub fn from_matrix(matrix: Array2<Complex64>) -> Result<Self> {
        let (rows, cols) = matrix.dim();
        if rows != cols {
            return Err(Error::DimensionMismatch { expected: rows, found: cols });
        }
        Ok(DensityMatrix { matrix })
    }

    /// Diagonal state with the given level populations.
    pub fn from_populations(populations: &[f64]) -> Self {
        let n = populations.len();
        let mut matrix = Array2::zeros((n, n));
        for (i, &p) in populations.iter().enumerate() {
            matrix[[i, i]] = Complex64::new(p, 0.0);
        }
        DensityMatrix { matrix }
    }

    /// Pure state |f⟩⟨f|.
    pub fn pure(amplitudes: &[Complex64]) -> Self {
        let n = amplitudes.len();
        let matrix = Array2::from_shape_fn((n, n), |(i, j)| amplitudes[i] * amplitudes[j].conj());
        DensityMatrix { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Array2<Complex64> {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diag().iter().map(|z| z.re).sum()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.matrix.diag().iter().map(|z| z.re).collect()
    }

    pub fn ground_population(&self) -> f64 {
        self.matrix[[0, 0]].re
    }

    /// trace(ρ²) = Σ|ρ_mn|² for Hermitian ρ.
    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.matrix[[i, j]] - self.matrix[[j, i]].conj()).norm());
            }
        }
        worst
    }

    /// Largest off-diagonal modulus.
    pub fn max_coherence(&self) -> f64 {
        let mut worst = 0.0f64;
        for ((i, j), z) in self.matrix.indexed_iter() {
            if i != j {
                worst = worst.max(z.norm());
            }
        }
        worst
    }

    /// Whether the smallest eigenvalue is at least −`tol`.
    pub fn is_positive_semidefinite(&self, tol: f64) -> bool {
        linalg::is_psd_within(&self.matrix, tol)
    }

    /// Lists every violated density-matrix invariant (Hermiticity, unit trace,
    /// positivity) at the tolerances above.
    pub fn invariant_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let herm = self.hermiticity_error();
        if !(herm < Self::HERMITIAN_TOL) {
            out.push(format!("hermiticity error {herm:.3e}"));
        }
        let trace = self.trace();
        if !((trace - 1.0).abs() < Self::TRACE_TOL) {
            out.push(format!("trace {trace:.15} differs from 1"));
        }
        if !self.is_positive_semidefinite(Self::PSD_TOL) {
            out.push("not positive semidefinite".to_string());
        }
        out
    }
}

/// Observables recorded after one cycle (pulse 0 is the initial state).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseRecord {
    pub pulse: usize,
    pub ground_population: f64,
    pub populations: Vec<f64>,
    /// Excitation probability ζ of the cycle that produced this state.
    pub zeta: f64,
    pub purity: f64,
}

impl PulseRecord {
    pub fn observe(pulse: usize, rho: &DensityMatrix, zeta: f64) -> Self {
        PulseRecord {
            pulse,
            ground_population: rho.ground_population(),
            populations: rho.populations(),
            zeta,
            purity: rho.purity(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub records: Vec<PulseRecord>,
    pub final_state: DensityMatrix,
}

impl Trajectory {
    pub fn ground_populations(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.ground_population).collect()
    }

    pub fn final_ground_population(&self) -> f64 {
        self.records.last().map(|r| r.ground_population).unwrap_or(f64::NAN)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_configs_are_valid() {
        assert!(validate(&SimulationConfig::reference_harmonic()).is_valid());
        assert!(validate(&SimulationConfig::reference_localized()).is_valid());
    }

    #[test]
    fn zero_width_is_rejected() {
        let config = SimulationConfig { doughnut_width: 0.0, ..SimulationConfig::reference_harmonic() };
        let report = validate(&config);
        assert!(!report.is_valid());
        assert!(report.mentions("doughnut_width"));
    }

    #[test]
    fn grid_resolution_rule() {
        let mut config = SimulationConfig::reference_harmonic();
        config.basis_size = 40;
        config.grid = Some(GridSpec { half_width: 20.0, points: 40 });
        let report = validate(&config);
        assert!(report.mentions("grid"));
        assert!(report.to_string().contains("resolution"));
    }

    #[test]
    fn reports_every_violation() {
        let config = SimulationConfig {
            lamb_dicke: -1.0,
            thermal_quanta: -2.0,
            tsep_policy: TsepPolicy::RandomUniform { lo: 1.0, hi: 0.5 },
            basis_size: 1,
            quadrature_order: 1,
            ..SimulationConfig::reference_harmonic()
        };
        let report = validate(&config);
        for field in ["lamb_dicke", "thermal_quanta", "tsep_policy", "basis_size", "quadrature_order"] {
            assert!(report.mentions(field), "{field} missing from {report}");
        }
    }

    #[test]
    fn json_round_trip_and_unknown_keys() {
        let config = SimulationConfig::reference_localized();
        let back = SimulationConfig::from_json(&config.to_json()).unwrap();
        assert_eq!(back, config);

        let mut value: serde_json::Value = serde_json::from_str(&config.to_json()).unwrap();
        value["temperature"] = serde_json::json!(3.0);
        let err = SimulationConfig::from_json(&value.to_string()).unwrap_err();
        assert!(err.to_string().contains("temperature"));
    }

    #[test]
    fn json_defaults() {
        let text = r#"{
            "lamb_dicke": 1.0, "thermal_quanta": 4.0, "doughnut_order": 1,
            "doughnut_width": 10.0, "peak_pulse_area": 1.8849555921538759,
            "tsep_policy": {"random_uniform": {"lo": 0.1, "hi": 1.1}},
            "num_pulses": 10, "trap": "harmonic", "basis_size": 60
        }"#;
        let config = SimulationConfig::from_json(text).unwrap();
        assert_eq!(config.quadrature_order, 32);
        assert_eq!(config.angular_distribution, AngularDistribution::Flat);
        assert_eq!(config.grid_spec().points, 2048);
        assert!(config.validate().is_valid());
    }

    #[test]
    fn density_matrix_checks() {
        let rho = DensityMatrix::from_populations(&[0.5, 0.3, 0.2]);
        assert!(rho.invariant_violations().is_empty());
        assert!((rho.purity() - 0.38).abs() < 1e-15);

        let bad = DensityMatrix::from_populations(&[1.2, -0.2]);
        let v = bad.invariant_violations();
        assert_eq!(v.len(), 1);
        assert!(v[0].contains("positive"));

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let pure = DensityMatrix::pure(&[Complex64::new(s, 0.0), Complex64::new(0.0, s)]);
        assert!(pure.invariant_violations().is_empty());
        assert!((pure.purity() - 1.0).abs() < 1e-14);
    }
}
