//! Run configuration: one TOML file with a section per subsystem. Every
//! field has a default, and the resolved configuration is embedded in every
//! JSON report.

use std::path::Path;

use coherence_core::dynamics::EmitterParams;
use coherence_core::noise::{LaserModel, SpectralDiffusionModel};
use coherence_core::protocols::{MichelsonGeometry, PleScan, RabiSweep};
use coherence_core::HbtConfig;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const DEFAULT_SEED: u64 = 20_231_115;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub out_dir: String,
    pub emitter: EmitterParams,
    pub diffusion: SpectralDiffusionModel,
    pub laser: LaserModel,
    pub hbt: HbtConfig,
    pub lifetime: LifetimeConfig,
    pub rabi: RabiConfig,
    pub ple: PleConfig,
    pub ramsey: RamseyConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            out_dir: "out".into(),
            emitter: EmitterParams::default(),
            diffusion: SpectralDiffusionModel::default(),
            laser: LaserModel::default(),
            hbt: HbtConfig::default(),
            lifetime: LifetimeConfig::default(),
            rabi: RabiConfig::default(),
            ple: PleConfig::default(),
            ramsey: RamseyConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LifetimeConfig {
    pub t_max_ns: f64,
    pub points: usize,
    pub peak_counts: f64,
}

impl Default for LifetimeConfig {
    fn default() -> Self {
        Self {
            t_max_ns: 12.0,
            points: 241,
            peak_counts: 1e6,
        }
    }
}

impl LifetimeConfig {
    pub fn grid(&self) -> Vec<f64> {
        linspace(0.0, self.t_max_ns, self.points)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RabiConfig {
    pub p_max_uw: f64,
    pub points: usize,
    pub shots: u64,
    pub background_fraction: f64,
    pub pulse_duration_ns: f64,
}

impl Default for RabiConfig {
    fn default() -> Self {
        let s = RabiSweep::default();
        Self {
            p_max_uw: 250.0,
            points: 151,
            shots: s.shots,
            background_fraction: s.background_fraction,
            pulse_duration_ns: s.pulse_duration_ns,
        }
    }
}

impl RabiConfig {
    pub fn powers(&self) -> Vec<f64> {
        linspace(0.0, self.p_max_uw, self.points)
    }

    pub fn sweep(&self) -> RabiSweep {
        RabiSweep {
            background_fraction: self.background_fraction,
            shots: self.shots,
            pulse_duration_ns: self.pulse_duration_ns,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PleConfig {
    pub half_span_ghz: f64,
    pub points: usize,
    pub power_uw: f64,
    pub psat_uw: f64,
    pub peak_counts: f64,
    /// Powers for the linewidth-versus-power series.
    pub series_powers_uw: Vec<f64>,
}

impl Default for PleConfig {
    fn default() -> Self {
        let s = PleScan::default();
        Self {
            half_span_ghz: 3.0,
            points: 241,
            power_uw: s.power_uw,
            psat_uw: s.psat_uw,
            peak_counts: s.peak_counts,
            series_powers_uw: vec![0.5, 1.0, 2.0, 4.41, 8.82, 17.64, 35.28],
        }
    }
}

impl PleConfig {
    pub fn detunings(&self) -> Vec<f64> {
        linspace(-self.half_span_ghz, self.half_span_ghz, self.points)
    }

    pub fn scan(&self) -> PleScan {
        PleScan {
            power_uw: self.power_uw,
            psat_uw: self.psat_uw,
            peak_counts: self.peak_counts,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RamseyConfig {
    /// Long-arm positions, in whole mirror steps from zero.
    pub delay_steps: usize,
    pub shots: u64,
    pub geometry: MichelsonGeometry,
    /// Fit a constant floor under the Gaussian envelope.
    pub envelope_floor: bool,
    /// Choose the wandering spread so the fitted T2* matches this value
    /// with homogeneous decay included. 0 disables calibration and uses
    /// `diffusion.sigma_rad_per_ns` as given.
    pub calibrate_t2_star_ns: f64,
}

impl Default for RamseyConfig {
    fn default() -> Self {
        Self {
            delay_steps: 12,
            shots: 10_000,
            geometry: MichelsonGeometry::default(),
            envelope_floor: false,
            calibrate_t2_star_ns: 0.0,
        }
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Schema(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serialisable")
    }

    /// Checks every section before any computation starts.
    pub fn validate(&self) -> Result<(), CliError> {
        let schema = |e: coherence_core::Error| CliError::Schema(e.to_string());
        self.emitter.validate().map_err(schema)?;
        self.diffusion.validate().map_err(schema)?;
        self.laser.validate().map_err(schema)?;
        self.hbt.validate().map_err(schema)?;
        self.rabi.sweep().validate().map_err(schema)?;
        self.ple.scan().validate().map_err(schema)?;
        self.ramsey.geometry.validate().map_err(schema)?;
        let positive = [
            ("lifetime.t_max_ns", self.lifetime.t_max_ns),
            ("lifetime.peak_counts", self.lifetime.peak_counts),
            ("rabi.p_max_uw", self.rabi.p_max_uw),
            ("ple.half_span_ghz", self.ple.half_span_ghz),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Schema(format!("{name} must be finite and > 0")));
            }
        }
        for (name, n) in [
            ("lifetime.points", self.lifetime.points),
            ("rabi.points", self.rabi.points),
            ("ple.points", self.ple.points),
        ] {
            if n < 8 {
                return Err(CliError::Schema(format!("{name} must be >= 8")));
            }
        }
        if self.ramsey.delay_steps < 5 {
            return Err(CliError::Schema("ramsey.delay_steps must be >= 5 for the envelope fit".into()));
        }
        if self.ramsey.shots == 0 {
            return Err(CliError::Schema("ramsey.shots must be >= 1".into()));
        }
        if !(self.ramsey.calibrate_t2_star_ns >= 0.0) {
            return Err(CliError::Schema("ramsey.calibrate_t2_star_ns must be >= 0".into()));
        }
        if self.ple.series_powers_uw.iter().any(|p| !(*p >= 0.0)) {
            return Err(CliError::Schema("ple.series_powers_uw must be >= 0".into()));
        }
        Ok(())
    }
}

/// Key descriptions for the annotated schema, `(section, key, text)`.
const DOCS: &[(&str, &str, &str)] = &[
    ("", "seed", "master seed for every random stream"),
    ("", "out_dir", "directory for CSV, JSON and SVG artifacts"),
    ("emitter", "t1_ns", "radiative lifetime, ns (inf disables decay)"),
    ("emitter", "nu0_ghz", "optical transition frequency, GHz"),
    ("emitter", "gamma_phi_per_ns", "pure-dephasing rate, 1/ns"),
    ("emitter", "alpha_rad_per_sqrt_uw", "pulse-area calibration alpha in Pe = sin^2(alpha sqrt(P)), rad/sqrt(uW)"),
    ("emitter", "eps_two_photon", "two-photon emission probability per pulse"),
    ("diffusion", "kind", "\"static-gaussian\" or \"ornstein-uhlenbeck\""),
    ("diffusion", "sigma_rad_per_ns", "spectral-wandering standard deviation, rad/ns"),
    ("diffusion", "tau_corr_ns", "wandering correlation time, ns (OU only)"),
    ("laser", "nu_center_ghz", "laser carrier frequency, GHz"),
    ("laser", "bandwidth_ghz", "shaped spectral FWHM, GHz"),
    ("laser", "coherence_time_ps", "field autocorrelation 1/e time, ps"),
    ("hbt", "rep_period_ns", "laser repetition period, ns (80 MHz)"),
    ("hbt", "n_pulses", "excitation pulses per HBT run"),
    ("hbt", "p1", "single-photon probability per pulse"),
    ("hbt", "p2", "two-photon probability per pulse"),
    ("hbt", "eta", "end-to-end detection efficiency"),
    ("hbt", "jitter_ns", "detector timing jitter (std), ns"),
    ("hbt", "bin_ns", "coincidence histogram bin width, ns"),
    ("hbt", "window_peaks", "side peaks each side of zero delay"),
    ("hbt", "t1_ns", "emission lifetime for photon timestamps, ns"),
    ("hbt", "source", "\"two-level\" or \"poissonian\""),
    ("lifetime", "t_max_ns", "end of the decay record, ns"),
    ("lifetime", "points", "time bins"),
    ("lifetime", "peak_counts", "expected counts in the first bin"),
    ("rabi", "p_max_uw", "largest pulse power, uW"),
    ("rabi", "points", "powers in the sweep"),
    ("rabi", "shots", "pulses averaged per power"),
    ("rabi", "background_fraction", "incoherent floor fraction in [0, 1)"),
    ("rabi", "pulse_duration_ns", "square pulse duration, ns"),
    ("ple", "half_span_ghz", "scan covers +/- this detuning, GHz"),
    ("ple", "points", "detunings in the scan"),
    ("ple", "power_uw", "excitation power, uW"),
    ("ple", "psat_uw", "saturation power, uW"),
    ("ple", "peak_counts", "expected counts at line centre"),
    ("ple", "series_powers_uw", "powers for the linewidth-vs-power series, uW"),
    ("ramsey", "delay_steps", "long-arm delays 0, 1, ..., n-1 mirror steps"),
    ("ramsey", "shots", "sequences averaged per short-arm position"),
    ("ramsey", "envelope_floor", "fit a constant floor under the Gaussian envelope"),
    ("ramsey", "calibrate_t2_star_ns", "if > 0, pick sigma so the fitted T2* equals this with T1 included, ns"),
    ("ramsey.geometry", "step_cm", "long-arm mirror step, cm (delay = 2 x step / c)"),
    ("ramsey.geometry", "scan_span_um", "short-arm scan length, um"),
    ("ramsey.geometry", "scan_points", "short-arm positions per interferogram"),
];

/// All defaults as TOML, each key preceded by a comment with its meaning and
/// unit. The output is itself a valid configuration.
pub fn annotated_schema() -> String {
    let plain = RunConfig::default().to_toml();
    let mut out = String::from("# coherence-lab run configuration (all values shown are defaults)\n");
    let mut section = String::new();
    for line in plain.lines() {
        let trimmed = line.trim();
        if trimmed.starts_with('[') {
            section = trimmed.trim_matches(|c| c == '[' || c == ']').to_string();
            out.push('\n');
        } else if let Some((key, _)) = trimmed.split_once(" = ") {
            if let Some((_, _, doc)) = DOCS.iter().find(|(s, k, _)| *s == section && *k == key) {
                out.push_str(&format!("# {doc}\n"));
            }
        }
        out.push_str(line);
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schema_round_trips_and_documents_every_key() {
        let text = annotated_schema();
        assert_eq!(RunConfig::from_toml(&text).unwrap(), RunConfig::default());
        assert!(text.contains("t1_ns = 1.95"));
        assert!(text.contains("rep_period_ns = 12.5"));
        let keys = text
            .lines()
            .filter(|l| l.contains(" = ") && !l.starts_with('#'))
            .count();
        let docs = text.lines().filter(|l| l.starts_with("# ")).count() - 1;
        assert_eq!(keys, docs);
    }

    #[test]
    fn unknown_keys_are_schema_errors() {
        let err = RunConfig::from_toml("[emitter]\nt1 = 2.0\n").unwrap_err();
        assert!(matches!(err, CliError::Schema(_)));
        let err = RunConfig::from_toml("[hbt]\neta = 0.0\n").unwrap_err();
        assert!(matches!(err, CliError::Schema(_)));
    }

    #[test]
    fn partial_config_keeps_other_defaults() {
        let cfg = RunConfig::from_toml("seed = 7\n[emitter]\nt1_ns = 2.5\n").unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.emitter.t1_ns, 2.5);
        assert_eq!(cfg.hbt, HbtConfig::default());
    }
}
