//! Run configuration: TOML files, built-in presets and CLI overrides.
//!
//! Every subcommand has one section type. Its fields are all optional so
//! that layers can be merged: preset, then `--config` file, then flags.
//! Defaults fill whatever is still unset when the section is resolved.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use superres_core::analytics::Convention;

use crate::error::{CliError, CliResult};
use crate::grid::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ConventionArg {
    Physical,
    Effective,
}

impl From<ConventionArg> for Convention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Physical => Convention::Physical,
            ConventionArg::Effective => Convention::Effective,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum AmplitudeArg {
    /// Gaussian quadratures with standard deviation σ.
    Gaussian,
    /// Fixed amplitude Ω with uniform random phases.
    Bessel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum FisherParam {
    OmegaR,
    OmegaS,
    Sigma,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum SamplingArg {
    Binomial,
    PerShot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    /// Information vs additive floor ε.
    Floor,
    /// Information vs readout flip probability ε′.
    Readout,
    /// Dephasing ratio vs total time.
    Dephasing,
    /// Simulated OU floor vs drift strength σ_n.
    Ou,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum FamilyArg {
    Ramsey,
    BlockRegular,
    BlockIrregular,
}

macro_rules! section {
    ($(#[$m:meta])* $name:ident { $($(#[$fm:meta])* $field:ident : $ty:ty),* $(,)? }) => {
        $(#[$m])*
        #[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize, Args)]
        #[serde(deny_unknown_fields)]
        pub struct $name {
            $(
                $(#[$fm])*
                #[serde(default, skip_serializing_if = "Option::is_none")]
                pub $field: Option<$ty>,
            )*
        }

        impl $name {
            /// Fields set in `over` win.
            pub fn merge(self, over: Self) -> Self {
                $name { $($field: over.$field.or(self.$field)),* }
            }
        }
    };
}

section!(
    /// Transition probability along a detuning grid.
    ProbScanArgs {
        #[arg(long)] sigma_t: f64,
        #[arg(long)] omega_r_t: f64,
        #[arg(long)] delta_grid: Grid,
        #[arg(long, value_enum)] model: AmplitudeArg,
        #[arg(long, value_enum)] convention: ConventionArg,
        #[arg(long)] n_pulses: u32,
        /// Also simulate this many shots per grid point.
        #[arg(long)] shots: u64,
    }
);

section!(
    /// Fisher information along a detuning grid.
    FisherScanArgs {
        #[arg(long)] sigma_t: f64,
        #[arg(long)] omega_r_t: f64,
        #[arg(long)] delta_grid: Grid,
        #[arg(long, value_enum)] param: FisherParam,
        #[arg(long, value_enum)] convention: ConventionArg,
    }
);

section!(
    /// Replicated single-parameter MLE of ω_r.
    MleArgs {
        #[arg(long)] sigma_t: f64,
        #[arg(long)] omega_r_t: f64,
        /// Comma-separated δ_s t values.
        #[arg(long, value_delimiter = ',')] detunings: Vec<f64>,
        #[arg(long)] shots: u64,
        /// Comma-separated shot counts for a scaling study (overrides --shots).
        #[arg(long, value_delimiter = ',')] n_list: Vec<u64>,
        #[arg(long)] replicates: usize,
        #[arg(long, value_enum)] sampling: SamplingArg,
        #[arg(long)] lower: f64,
        #[arg(long)] upper: f64,
        #[arg(long)] n_pulses: u32,
        #[arg(long)] bins: usize,
    }
);

section!(
    /// Three-detuning joint estimation of (ω_r, ω_s, σ).
    MultiparamArgs {
        #[arg(long)] sigma_t: f64,
        #[arg(long)] omega_r_t: f64,
        /// Shots per detuning.
        #[arg(long)] shots: u64,
        #[arg(long, value_delimiter = ',')] n_list: Vec<u64>,
        #[arg(long)] replicates: usize,
        #[arg(long)] n_pulses: u32,
    }
);

section!(
    /// Noise-model sweeps.
    NoiseSweepArgs {
        #[arg(long, value_enum)] kind: NoiseKind,
        #[arg(long)] grid: Grid,
        #[arg(long)] sigma_t: f64,
        #[arg(long)] omega_r_t: f64,
        /// Dephasing rate in units of 1/t.
        #[arg(long)] kappa: f64,
        /// OU relaxation rate in units of 1/t.
        #[arg(long)] gamma_t: f64,
        #[arg(long)] shots: u64,
        #[arg(long, value_enum)] convention: ConventionArg,
    }
);

section!(
    /// Memory-register Fourier scheme.
    QftArgs {
        /// Samples per signal period.
        #[arg(long)] n: usize,
        /// Signal periods.
        #[arg(long)] m: usize,
        #[arg(long)] sigma_tau: f64,
        /// Grid of ω_r T.
        #[arg(long)] grid: Grid,
        #[arg(long)] draws: u64,
        /// Emit the Fourier spectrum of one draw at the first grid value.
        #[arg(long)] spectrum: bool,
    }
);

section!(
    /// Single-memory correlation scheme.
    CorrelationArgs {
        #[arg(long)] sigma_tau: f64,
        /// Window length τ in units of T.
        #[arg(long)] tau: f64,
        /// Signal periods in T.
        #[arg(long)] periods: u32,
        #[arg(long)] grid: Grid,
        #[arg(long)] draws: u64,
    }
);

section!(
    /// Superresolution criterion on a built-in family.
    CriterionArgs {
        #[arg(long, value_enum)] family: FamilyArg,
        #[arg(long)] delta_s_t: f64,
        #[arg(long)] sigma_t: f64,
        #[arg(long)] s_min: f64,
        #[arg(long)] s_max: f64,
        #[arg(long)] points: usize,
        /// Seed of the random block family.
        #[arg(long)] family_seed: u64,
        #[arg(long, value_enum)] convention: ConventionArg,
    }
);

/// A complete run description as stored in TOML files and records.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prob_scan: Option<ProbScanArgs>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fisher_scan: Option<FisherScanArgs>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mle: Option<MleArgs>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiparam: Option<MultiparamArgs>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_sweep: Option<NoiseSweepArgs>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qft: Option<QftArgs>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correlation: Option<CorrelationArgs>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub criterion: Option<CriterionArgs>,
}

impl RunConfig {
    pub fn from_toml(s: &str) -> CliResult<Self> {
        toml::from_str(s).map_err(|e| CliError::config(format!("unparsable config: {e}")))
    }

    pub fn to_toml(&self) -> CliResult<String> {
        toml::to_string(self).map_err(|e| CliError::Numerical(format!("config serialization failed: {e}")))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let s = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&s)
    }

    /// Fields set in `over` win; sections merge field by field.
    pub fn merge(self, over: RunConfig) -> RunConfig {
        fn m<T>(a: Option<T>, b: Option<T>, f: fn(T, T) -> T) -> Option<T> {
            match (a, b) {
                (Some(a), Some(b)) => Some(f(a, b)),
                (a, b) => b.or(a),
            }
        }
        RunConfig {
            seed: over.seed.or(self.seed),
            out: over.out.or(self.out),
            format: over.format.or(self.format),
            threads: over.threads.or(self.threads),
            prob_scan: m(self.prob_scan, over.prob_scan, ProbScanArgs::merge),
            fisher_scan: m(self.fisher_scan, over.fisher_scan, FisherScanArgs::merge),
            mle: m(self.mle, over.mle, MleArgs::merge),
            multiparam: m(self.multiparam, over.multiparam, MultiparamArgs::merge),
            noise_sweep: m(self.noise_sweep, over.noise_sweep, NoiseSweepArgs::merge),
            qft: m(self.qft, over.qft, QftArgs::merge),
            correlation: m(self.correlation, over.correlation, CorrelationArgs::merge),
            criterion: m(self.criterion, over.criterion, CriterionArgs::merge),
        }
    }
}

/// Names of the shipped presets.
pub const PRESETS: [&str; 6] = ["fig3b", "fig4", "fig5", "supp7", "qft", "correlation"];

pub fn preset(name: &str) -> CliResult<RunConfig> {
    let text = match name {
        "fig3b" => include_str!("../presets/fig3b.toml"),
        "fig4" => include_str!("../presets/fig4.toml"),
        "fig5" => include_str!("../presets/fig5.toml"),
        "supp7" => include_str!("../presets/supp7.toml"),
        "qft" => include_str!("../presets/qft.toml"),
        "correlation" => include_str!("../presets/correlation.toml"),
        _ => {
            return Err(CliError::config(format!(
                "unknown preset {name:?} (known: {})",
                PRESETS.join(", ")
            )))
        }
    };
    RunConfig::from_toml(text)
}
