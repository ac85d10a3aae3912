//! Declarative experiment configuration (TOML).
//!
//! Every key has a default, unknown keys are rejected, and the resolved
//! document is written back as `manifest.toml` next to the results so a run
//! can be repeated from it.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use croqam::gfdm::Table1Column;
use croqam::psd::PsdSettings;
use croqam::ser::SerConfigId;
use croqam::{FilterFamily, PhaseMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subcommand {
    Verify,
    Ser,
    Psd,
    FilterDump,
}

impl Subcommand {
    pub fn as_str(&self) -> &'static str {
        match self {
            Subcommand::Verify => "verify",
            Subcommand::Ser => "ser",
            Subcommand::Psd => "psd",
            Subcommand::FilterDump => "filter-dump",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub run: RunSection,
    pub verify: VerifySection,
    pub ser: SerSection,
    pub psd: PsdSection,
    pub filter_dump: FilterDumpSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    /// Subcommand the document is meant for; filled in manifests.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subcommand: Option<Subcommand>,
    pub out_dir: PathBuf,
    pub seed: u64,
    /// Worker threads; omitted means one per core.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            subcommand: None,
            out_dir: PathBuf::from("results"),
            seed: 1,
            workers: None,
        }
    }
}

/// One pulse / phase-mode pairing for the orthogonality check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrthogonalityCase {
    pub filter: String,
    pub phase_mode: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySection {
    /// Roll-offs of the orthogonality check.
    pub rolloffs: Vec<f64>,
    /// Roll-offs of the conjugate-root ICI and power-Nyquist checks.
    pub identity_rolloffs: Vec<f64>,
    pub cases: Vec<OrthogonalityCase>,
    /// Grid of the orthogonality and ICI checks.
    pub subcarriers: usize,
    pub periods: usize,
    pub orthogonality_tol: f64,
    pub ici_tol: f64,
    pub nyquist_tol: f64,
    pub payloads: usize,
    pub roundtrip_tol: f64,
    pub xi_target_db: f64,
    pub xi_tol_db: f64,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self {
            rolloffs: vec![0.5, 1.0],
            identity_rolloffs: vec![0.25, 0.5, 0.75, 1.0],
            cases: vec![
                OrthogonalityCase {
                    filter: "RRC".into(),
                    phase_mode: "conventional".into(),
                },
                OrthogonalityCase {
                    filter: "CRRC".into(),
                    phase_mode: "cr".into(),
                },
            ],
            subcarriers: 16,
            periods: 8,
            orthogonality_tol: 1e-10,
            ici_tol: 1e-10,
            nyquist_tol: 1e-12,
            payloads: 100,
            roundtrip_tol: 1e-9,
            xi_target_db: 0.8,
            xi_tol_db: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SerSection {
    pub configs: Vec<String>,
    pub snr_start_db: f64,
    pub snr_stop_db: f64,
    pub snr_step_db: f64,
    pub trials: usize,
    pub theory: bool,
    /// Channel draws behind the reference curves; defaults to `trials`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theory_channels: Option<usize>,
}

impl Default for SerSection {
    fn default() -> Self {
        Self {
            configs: SerConfigId::ALL.iter().map(|c| c.to_string()).collect(),
            snr_start_db: 0.0,
            snr_stop_db: 40.0,
            snr_step_db: 2.0,
            trials: 2000,
            theory: true,
            theory_channels: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsdSection {
    pub configs: Vec<String>,
    pub blocks: usize,
    pub segment_len: usize,
    pub overlap: usize,
    pub inactive_per_edge: usize,
    pub guard_subsymbols: usize,
    pub tail_guard: bool,
    pub cp_length: usize,
    pub oob_margin: f64,
}

impl Default for PsdSection {
    fn default() -> Self {
        let s = PsdSettings::default();
        Self {
            configs: vec!["OQAM".into(), "CROQAM".into()],
            blocks: s.blocks,
            segment_len: s.segment_len,
            overlap: s.overlap,
            inactive_per_edge: s.inactive_per_edge,
            guard_subsymbols: s.guard_subsymbols,
            tail_guard: s.tail_guard,
            cp_length: s.cp_length,
            oob_margin: s.oob_margin,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterDumpSection {
    pub rolloff: f64,
    pub subcarriers: usize,
    pub bins_per_subcarrier: usize,
    /// Carrier offsets whose ICI responses are written as well.
    pub ici_shifts: Vec<isize>,
}

impl Default for FilterDumpSection {
    fn default() -> Self {
        Self {
            rolloff: 0.75,
            subcarriers: 8,
            bins_per_subcarrier: 16,
            ici_shifts: vec![1],
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config {path}: {source}")]
    Parse {
        path: PathBuf,
        source: toml::de::Error,
    },
    #[error("invalid config: {0}")]
    Invalid(String),
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        toml::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn snr_grid(&self) -> Result<Vec<f64>, ConfigError> {
        let s = &self.ser;
        if s.snr_step_db.is_nan() || s.snr_step_db <= 0.0 || s.snr_stop_db < s.snr_start_db {
            return Err(ConfigError::Invalid(format!(
                "SNR grid {}..{} step {} is empty",
                s.snr_start_db, s.snr_stop_db, s.snr_step_db
            )));
        }
        let count = ((s.snr_stop_db - s.snr_start_db) / s.snr_step_db + 1e-9).floor() as usize + 1;
        Ok((0..count)
            .map(|i| s.snr_start_db + i as f64 * s.snr_step_db)
            .collect())
    }

    pub fn ser_ids(&self) -> Result<Vec<SerConfigId>, ConfigError> {
        if self.ser.configs.is_empty() {
            return Err(ConfigError::Invalid("ser.configs is empty".into()));
        }
        self.ser
            .configs
            .iter()
            .map(|c| {
                c.parse()
                    .map_err(|e: croqam::Error| ConfigError::Invalid(e.to_string()))
            })
            .collect()
    }

    pub fn psd_columns(&self) -> Result<Vec<Table1Column>, ConfigError> {
        if self.psd.configs.is_empty() {
            return Err(ConfigError::Invalid("psd.configs is empty".into()));
        }
        self.psd
            .configs
            .iter()
            .map(|c| match c.to_ascii_uppercase().replace('-', "").as_str() {
                "QAM" => Ok(Table1Column::Qam),
                "OQAM" => Ok(Table1Column::Oqam),
                "CROQAM" => Ok(Table1Column::CrOqam),
                _ => Err(ConfigError::Invalid(format!("unknown PSD config '{c}'"))),
            })
            .collect()
    }

    pub fn psd_settings(&self) -> PsdSettings {
        let p = &self.psd;
        PsdSettings {
            blocks: p.blocks,
            segment_len: p.segment_len,
            overlap: p.overlap,
            inactive_per_edge: p.inactive_per_edge,
            guard_subsymbols: p.guard_subsymbols,
            tail_guard: p.tail_guard,
            cp_length: p.cp_length,
            oob_margin: p.oob_margin,
            seed: self.run.seed,
        }
    }

    pub fn orthogonality_cases(&self) -> Result<Vec<(FilterFamily, PhaseMode)>, ConfigError> {
        self.verify
            .cases
            .iter()
            .map(|c| {
                let family = c
                    .filter
                    .parse()
                    .map_err(|e: croqam::Error| ConfigError::Invalid(e.to_string()))?;
                let mode = c
                    .phase_mode
                    .parse()
                    .map_err(|e: croqam::Error| ConfigError::Invalid(e.to_string()))?;
                Ok((family, mode))
            })
            .collect()
    }
}
