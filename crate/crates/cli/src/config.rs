//! Run configuration: command-line flags merged over an optional TOML file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use convdiff_core::quadrature::GridConfig;
use convdiff_core::Epsilon;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Settings shared by every subcommand. Each is optional so that a config
/// file can supply what the command line leaves out.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Shared {
    /// Diffusion parameter ε in (0, 2)
    #[arg(long)]
    pub eps: Option<f64>,

    /// Truncation order N
    #[arg(long)]
    pub n: Option<usize>,

    /// Increasing truncation orders, comma separated
    #[arg(long, value_delimiter = ',')]
    pub n_list: Option<Vec<usize>>,

    /// Tolerance: a bare value sets the command's main tolerance, NAME=VALUE
    /// sets a named one; comma separated
    #[arg(long, value_delimiter = ',')]
    pub tol: Option<Vec<String>>,

    /// Seed for random test inputs
    #[arg(long)]
    pub seed: Option<u64>,

    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,

    #[arg(long, value_enum)]
    pub format: Option<Format>,

    /// Accept ε outside (0, 2)
    #[arg(long)]
    #[serde(rename = "allow_eps_out_of_range")]
    pub allow_eps_out_of_range: bool,

    /// Quadrature nodes per panel
    #[arg(long)]
    pub nodes_per_panel: Option<usize>,

    /// Ratio between consecutive graded panel widths
    #[arg(long)]
    pub grading_ratio: Option<f64>,

    /// Uniform panels between the graded zones
    #[arg(long)]
    pub panels: Option<usize>,

    /// TOML file with defaults for any of these settings; flags win
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

impl Shared {
    fn merged_over(self, file: Shared) -> Shared {
        Shared {
            eps: self.eps.or(file.eps),
            n: self.n.or(file.n),
            n_list: self.n_list.or(file.n_list),
            tol: self.tol.or(file.tol),
            seed: self.seed.or(file.seed),
            out: self.out.or(file.out),
            format: self.format.or(file.format),
            allow_eps_out_of_range: self.allow_eps_out_of_range || file.allow_eps_out_of_range,
            nodes_per_panel: self.nodes_per_panel.or(file.nodes_per_panel),
            grading_ratio: self.grading_ratio.or(file.grading_ratio),
            panels: self.panels.or(file.panels),
            config: self.config,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct QuadratureSettings {
    pub nodes_per_panel: usize,
    pub grading_ratio: f64,
    pub graded_levels: usize,
    pub uniform_panels: usize,
}

/// Fully resolved configuration, embedded in every output.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub epsilon: f64,
    pub n: usize,
    pub n_list: Vec<usize>,
    pub tolerances: BTreeMap<String, f64>,
    pub quadrature: QuadratureSettings,
    pub output_dir: PathBuf,
    pub format: Format,
    pub seed: u64,
    pub allow_eps_out_of_range: bool,
    /// command-specific parameters
    pub params: BTreeMap<String, serde_json::Value>,
}

/// Per-command defaults.
pub struct Defaults {
    pub command: &'static str,
    pub n: usize,
    pub n_list: &'static [usize],
    pub tolerances: &'static [(&'static str, f64)],
}

pub const DEFAULT_SEED: u64 = 20240917;
pub const DEFAULT_EPS: f64 = 1.0;

impl RunConfig {
    pub fn resolve(flags: Shared, defaults: &Defaults) -> Result<Self, CliError> {
        let shared = match &flags.config {
            Some(path) => flags.clone().merged_over(load_file(path)?),
            None => flags,
        };
        let epsilon = shared.eps.unwrap_or(DEFAULT_EPS);
        if !epsilon.is_finite() {
            return Err(CliError::Usage(format!("epsilon must be finite, got {epsilon}")));
        }
        if !shared.allow_eps_out_of_range {
            Epsilon::new(epsilon).map_err(|e| CliError::Usage(format!("{e} (pass --allow-eps-out-of-range to override)")))?;
        }
        let n = shared.n.unwrap_or(defaults.n);
        if n == 0 {
            return Err(CliError::Usage("N must be at least 1".into()));
        }
        let n_list = shared.n_list.unwrap_or_else(|| defaults.n_list.to_vec());
        if n_list.windows(2).any(|w| w[0] >= w[1]) || n_list.contains(&0) {
            return Err(CliError::Usage("--n-list must be strictly increasing positive integers".into()));
        }

        let mut tolerances: BTreeMap<String, f64> =
            defaults.tolerances.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        for entry in shared.tol.unwrap_or_default() {
            let (name, value) = match entry.split_once('=') {
                Some((k, v)) => (k.trim().to_string(), v),
                None => match defaults.tolerances.first() {
                    Some((k, _)) => (k.to_string(), entry.as_str()),
                    None => return Err(CliError::Usage(format!("{} takes no tolerance", defaults.command))),
                },
            };
            if !tolerances.contains_key(&name) {
                let known: Vec<&String> = tolerances.keys().collect();
                return Err(CliError::Usage(format!("unknown tolerance {name:?}; known: {known:?}")));
            }
            let v: f64 = value
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("bad tolerance value {value:?}")))?;
            if v.is_nan() || v <= 0.0 {
                return Err(CliError::Usage(format!("tolerance {name} must be positive")));
            }
            tolerances.insert(name, v);
        }

        let grid = GridConfig::for_epsilon(epsilon.clamp(1e-3, 2.0));
        let quadrature = QuadratureSettings {
            nodes_per_panel: shared.nodes_per_panel.unwrap_or(grid.nodes_per_panel),
            grading_ratio: shared.grading_ratio.unwrap_or(grid.grading_ratio),
            graded_levels: grid.graded_levels,
            uniform_panels: shared.panels.unwrap_or(grid.uniform_panels),
        };
        Ok(Self {
            command: defaults.command.to_string(),
            epsilon,
            n,
            n_list,
            tolerances,
            quadrature,
            output_dir: shared.out.unwrap_or_else(|| PathBuf::from(format!("convdiff-out/{}", defaults.command))),
            format: shared.format.unwrap_or(Format::Csv),
            seed: shared.seed.unwrap_or(DEFAULT_SEED),
            allow_eps_out_of_range: shared.allow_eps_out_of_range,
            params: BTreeMap::new(),
        })
    }

    pub fn eps(&self) -> Epsilon {
        if self.allow_eps_out_of_range {
            Epsilon::unchecked(self.epsilon)
        } else {
            Epsilon::new(self.epsilon).expect("validated on resolve")
        }
    }

    pub fn tol(&self, name: &str) -> f64 {
        self.tolerances[name]
    }

    pub fn grid(&self) -> GridConfig {
        GridConfig {
            nodes_per_panel: self.quadrature.nodes_per_panel,
            grading_ratio: self.quadrature.grading_ratio,
            graded_levels: self.quadrature.graded_levels,
            uniform_panels: self.quadrature.uniform_panels,
            ..GridConfig::default()
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) {
        self.params
            .insert(key.to_string(), serde_json::to_value(value).expect("serializable parameter"));
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("serializable config")
    }
}

fn load_file(path: &Path) -> Result<Shared, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    const DEFAULTS: Defaults = Defaults {
        command: "t",
        n: 8,
        n_list: &[],
        tolerances: &[("main", 1e-6), ("other", 1e-3)],
    };

    fn tol(entries: &[&str]) -> Result<RunConfig, CliError> {
        let flags = Shared {
            tol: Some(entries.iter().map(|s| s.to_string()).collect()),
            ..Shared::default()
        };
        RunConfig::resolve(flags, &DEFAULTS)
    }

    #[test]
    fn bare_tolerance_sets_the_primary_one() {
        let cfg = tol(&["1e-9", "other=0.5"]).unwrap();
        assert_eq!(cfg.tol("main"), 1e-9);
        assert_eq!(cfg.tol("other"), 0.5);
    }

    #[test]
    fn bad_tolerances_are_rejected() {
        for bad in [&["x=1"][..], &["-1"], &["main=abc"], &["0"]] {
            assert!(matches!(tol(bad), Err(CliError::Usage(_))), "{bad:?}");
        }
    }

    #[test]
    fn defaults_apply() {
        let cfg = RunConfig::resolve(Shared::default(), &DEFAULTS).unwrap();
        assert_eq!((cfg.n, cfg.epsilon, cfg.seed), (8, DEFAULT_EPS, DEFAULT_SEED));
        assert_eq!(cfg.output_dir, PathBuf::from("convdiff-out/t"));
        assert_eq!(cfg.grid(), GridConfig::default());
    }
}
