//! Simulation parameters and the flat TOML run-configuration file.
//!
//! ```toml
//! n_modes = 256
//! dt = 1e-6
//! t_final = 1.0
//! seed = 1
//! alpha = "white"            # "white" | "constant:<c>" | "table:<path>"
//! alpha_tail_sup_sq = 1.0    # sup_{k>N} alpha_k^2, required with "table:"
//! u_star = "sin"             # "sin" | "zero" | "coeffs:<path>"
//! sample_stride = 1000
//! im_variant = "corrected"   # or "paper_verbatim"
//! moment_constant = "reference"  # or "corrected"
//! ```
//!
//! Relative table paths are resolved against the directory of the config file.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::certify::ImVariant;
use crate::error::{Error, Result};
use crate::residual::MomentConstant;
use crate::spectral::SpectralField;

/// Noise spectrum: `Q e_k = α_k² e_k`.
#[derive(Debug, Clone, PartialEq)]
pub enum AlphaSpec {
    /// Space-time white noise, `α_k ≡ 1`.
    White,
    Constant(f64),
    /// Explicit `α_k` for the resolved modes plus a bound on `sup_{k>N} α_k²`.
    Table { values: Vec<f64>, tail_sup_sq: f64 },
}

impl AlphaSpec {
    /// `α_k` for a resolved mode `k`.
    pub fn alpha(&self, k: usize) -> f64 {
        match self {
            AlphaSpec::White => 1.0,
            AlphaSpec::Constant(c) => *c,
            AlphaSpec::Table {
                values,
                tail_sup_sq,
            } => values
                .get(k.wrapping_sub(1))
                .copied()
                .unwrap_or_else(|| tail_sup_sq.sqrt()),
        }
    }

    /// `sup_{k>N} α_k²`.
    pub fn tail_sup_sq(&self) -> f64 {
        match self {
            AlphaSpec::White => 1.0,
            AlphaSpec::Constant(c) => c * c,
            AlphaSpec::Table { tail_sup_sq, .. } => *tail_sup_sq,
        }
    }

    fn validate(&self, modes: usize) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x >= 0.0;
        match self {
            AlphaSpec::White => Ok(()),
            AlphaSpec::Constant(c) if ok(*c) => Ok(()),
            AlphaSpec::Constant(c) => Err(Error::InvalidConfig(format!(
                "noise amplitude must be finite and nonnegative, got {c}"
            ))),
            AlphaSpec::Table {
                values,
                tail_sup_sq,
            } => {
                if values.len() < modes {
                    return Err(Error::InvalidConfig(format!(
                        "alpha table has {} entries but n_modes = {modes}",
                        values.len()
                    )));
                }
                if !values.iter().copied().all(ok) || !ok(*tail_sup_sq) {
                    return Err(Error::InvalidConfig(
                        "alpha table entries and tail bound must be finite and nonnegative".into(),
                    ));
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for AlphaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlphaSpec::White => write!(f, "white"),
            AlphaSpec::Constant(c) => write!(f, "constant:{c}"),
            AlphaSpec::Table { values, .. } => write!(f, "table[{}]", values.len()),
        }
    }
}

/// Scheme parameters shared by every module.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    modes: usize,
    dt: f64,
    t_final: f64,
    steps: usize,
    alpha: AlphaSpec,
    u_star: SpectralField,
    seed: u64,
}

impl SimConfig {
    pub fn new(
        modes: usize,
        dt: f64,
        t_final: f64,
        alpha: AlphaSpec,
        u_star: SpectralField,
        seed: u64,
    ) -> Result<Self> {
        if modes == 0 {
            return Err(Error::InvalidConfig("n_modes must be at least 1".into()));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidConfig(format!("dt must be positive, got {dt}")));
        }
        if !(t_final.is_finite() && t_final > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "t_final must be positive, got {t_final}"
            )));
        }
        let ratio = t_final / dt;
        let steps = ratio.round();
        if steps < 1.0 || (ratio - steps).abs() > 1e-9 * steps {
            return Err(Error::InvalidConfig(format!(
                "t_final / dt = {ratio} is not a positive integer"
            )));
        }
        alpha.validate(modes)?;
        Ok(Self {
            modes,
            dt,
            t_final,
            steps: steps as usize,
            alpha,
            u_star,
            seed,
        })
    }

    /// `N`, the number of resolved Galerkin modes.
    pub fn modes(&self) -> usize {
        self.modes
    }

    /// `h`.
    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    /// `M = T/h`.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn alpha(&self) -> &AlphaSpec {
        &self.alpha
    }

    pub fn u_star(&self) -> &SpectralField {
        &self.u_star
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Same configuration with a different final time.
    pub fn with_t_final(&self, t_final: f64) -> Result<Self> {
        Self::new(
            self.modes,
            self.dt,
            t_final,
            self.alpha.clone(),
            self.u_star.clone(),
            self.seed,
        )
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }
}

/// Initial condition as written in the config file.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    /// `u⋆(x) = sin x = √(π/2) e_1`.
    Sin,
    Zero,
    Coefficients(Vec<f64>),
}

impl InitialCondition {
    pub fn to_field(&self) -> Result<SpectralField> {
        match self {
            InitialCondition::Sin => SpectralField::new(vec![(PI / 2.0).sqrt()]),
            InitialCondition::Zero => Ok(SpectralField::zeros(1)),
            InitialCondition::Coefficients(c) => SpectralField::new(c.clone()),
        }
    }
}

/// Options that affect how the bound is assembled, not the trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BoundOptions {
    #[serde(default)]
    pub im_variant: ImVariant,
    #[serde(default)]
    pub moment_constant: MomentConstant,
}

/// A parsed configuration file.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub sim: SimConfig,
    pub options: BoundOptions,
    pub sample_stride: usize,
    /// Sub-stream index used by `run`; batches override it per trajectory.
    pub stream: u64,
    echo: ConfigEcho,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigEcho {
    n_modes: usize,
    dt: f64,
    t_final: f64,
    seed: u64,
    #[serde(default)]
    stream: u64,
    #[serde(default = "default_alpha")]
    alpha: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha_tail_sup_sq: Option<f64>,
    #[serde(default = "default_u_star")]
    u_star: String,
    #[serde(default = "default_stride")]
    sample_stride: usize,
    #[serde(default)]
    im_variant: ImVariant,
    #[serde(default)]
    moment_constant: MomentConstant,
}

fn default_alpha() -> String {
    "white".into()
}

fn default_u_star() -> String {
    "sin".into()
}

fn default_stride() -> usize {
    1000
}

fn read_table(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let mut values = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("");
        for token in line.split(|c: char| c.is_whitespace() || c == ',') {
            if token.is_empty() {
                continue;
            }
            let v: f64 = token.parse().map_err(|_| {
                Error::InvalidConfig(format!("{}: cannot parse {token:?}", path.display()))
            })?;
            values.push(v);
        }
    }
    Ok(values)
}

fn resolve(base: &Path, p: &str) -> PathBuf {
    let p = Path::new(p);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_toml_str(&text, base)
    }

    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self> {
        let echo: ConfigEcho = toml::from_str(text)?;

        let alpha = match echo.alpha.as_str() {
            "white" => AlphaSpec::White,
            s if s.starts_with("constant:") => {
                let c: f64 = s["constant:".len()..].trim().parse().map_err(|_| {
                    Error::InvalidConfig(format!("cannot parse noise amplitude in {s:?}"))
                })?;
                AlphaSpec::Constant(c)
            }
            s if s.starts_with("table:") => {
                let values = read_table(&resolve(base_dir, s["table:".len()..].trim()))?;
                let tail_sup_sq = echo.alpha_tail_sup_sq.ok_or_else(|| {
                    Error::InvalidConfig("alpha table requires alpha_tail_sup_sq".into())
                })?;
                AlphaSpec::Table {
                    values,
                    tail_sup_sq,
                }
            }
            other => {
                return Err(Error::InvalidConfig(format!("unknown alpha spec {other:?}")));
            }
        };

        let initial = match echo.u_star.as_str() {
            "sin" => InitialCondition::Sin,
            "zero" => InitialCondition::Zero,
            s if s.starts_with("coeffs:") => InitialCondition::Coefficients(read_table(
                &resolve(base_dir, s["coeffs:".len()..].trim()),
            )?),
            other => {
                return Err(Error::InvalidConfig(format!("unknown u_star spec {other:?}")));
            }
        };

        if echo.sample_stride == 0 {
            return Err(Error::InvalidConfig("sample_stride must be at least 1".into()));
        }

        let sim = SimConfig::new(
            echo.n_modes,
            echo.dt,
            echo.t_final,
            alpha,
            initial.to_field()?,
            echo.seed,
        )?;
        Ok(Self {
            sim,
            options: BoundOptions {
                im_variant: echo.im_variant,
                moment_constant: echo.moment_constant,
            },
            sample_stride: echo.sample_stride,
            stream: echo.stream,
            echo,
        })
    }

    /// Builds a config in memory, as if read from a file with the given spec
    /// strings for the noise and initial condition.
    pub fn from_sim(sim: SimConfig, options: BoundOptions, sample_stride: usize) -> Self {
        let echo = ConfigEcho {
            n_modes: sim.modes(),
            dt: sim.dt(),
            t_final: sim.t_final(),
            seed: sim.seed(),
            stream: 0,
            alpha: sim.alpha().to_string(),
            alpha_tail_sup_sq: match sim.alpha() {
                AlphaSpec::Table { tail_sup_sq, .. } => Some(*tail_sup_sq),
                _ => None,
            },
            u_star: format!("coeffs[{}]", sim.u_star().modes()),
            sample_stride,
            im_variant: options.im_variant,
            moment_constant: options.moment_constant,
        };
        Self {
            sim,
            options,
            sample_stride: sample_stride.max(1),
            stream: 0,
            echo,
        }
    }

    /// Config as echoed into `summary.json`.
    pub fn echo(&self) -> serde_json::Value {
        let mut echo = self.echo.clone();
        echo.stream = self.stream;
        echo.seed = self.sim.seed();
        serde_json::to_value(echo).expect("plain data serializes")
    }

    /// SHA-256 over the echoed config plus the resolved noise table and
    /// initial coefficients, hex encoded.
    pub fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        let mut echo = self.echo.clone();
        echo.stream = 0;
        hasher.update(serde_json::to_vec(&echo).expect("plain data serializes"));
        if let AlphaSpec::Table { values, .. } = self.sim.alpha() {
            for v in values {
                hasher.update(v.to_le_bytes());
            }
        }
        for c in self.sim.u_star().coeffs() {
            hasher.update(c.to_le_bytes());
        }
        hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn with_stream(&self, stream: u64) -> Self {
        Self {
            stream,
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FINE: &str = r#"
        n_modes = 256
        dt = 1e-6
        t_final = 1.0
        seed = 7
    "#;

    #[test]
    fn parses_reference_config_with_defaults() {
        let cfg = RunConfig::from_toml_str(FINE, Path::new(".")).unwrap();
        assert_eq!(cfg.sim.modes(), 256);
        assert_eq!(cfg.sim.steps(), 1_000_000);
        assert_eq!(cfg.sim.alpha(), &AlphaSpec::White);
        assert_eq!(cfg.sample_stride, 1000);
        assert_eq!(cfg.options, BoundOptions::default());
        assert!((cfg.sim.u_star().coeff(1) - 1.253_314_137_315_500_3).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_parameters() {
        let bad = [
            "n_modes = 0\ndt = 0.1\nt_final = 1.0\nseed = 1",
            "n_modes = 4\ndt = -0.1\nt_final = 1.0\nseed = 1",
            "n_modes = 4\ndt = 0.3\nt_final = 1.0\nseed = 1",
            "n_modes = 4\ndt = 0.1\nt_final = 1.0\nseed = 1\nalpha = \"pink\"",
            "n_modes = 4\ndt = 0.1\nt_final = 1.0\nseed = 1\nbogus = 3",
            "n_modes = 4\ndt = 0.1\nt_final = 1.0\nseed = 1\nsample_stride = 0",
        ];
        for text in bad {
            assert!(RunConfig::from_toml_str(text, Path::new(".")).is_err(), "{text}");
        }
    }

    #[test]
    fn reads_tables_relative_to_config() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("alpha.txt"), "1.0 0.5\n0.25 # third\n").unwrap();
        std::fs::write(dir.path().join("u0.txt"), "0.0\n1.0\n0.0\n0.0\n0.3\n").unwrap();
        let text = r#"
            n_modes = 3
            dt = 0.01
            t_final = 0.1
            seed = 3
            alpha = "table:alpha.txt"
            alpha_tail_sup_sq = 0.0625
            u_star = "coeffs:u0.txt"
            im_variant = "paper_verbatim"
            moment_constant = "corrected"
        "#;
        let path = dir.path().join("run.toml");
        std::fs::write(&path, text).unwrap();
        let cfg = RunConfig::from_file(&path).unwrap();
        assert_eq!(cfg.sim.alpha().alpha(2), 0.5);
        assert_eq!(cfg.sim.alpha().tail_sup_sq(), 0.0625);
        assert_eq!(cfg.sim.u_star().modes(), 5);
        assert_eq!(cfg.options.im_variant, ImVariant::PaperVerbatim);
        assert_eq!(cfg.options.moment_constant, MomentConstant::Corrected);
        assert_eq!(cfg.sim.steps(), 10);
    }

    #[test]
    fn hash_ignores_stream_but_not_seed() {
        let a = RunConfig::from_toml_str(FINE, Path::new(".")).unwrap();
        assert_eq!(a.hash(), a.with_stream(3).hash());
        let b = RunConfig::from_toml_str(&FINE.replace("seed = 7", "seed = 8"), Path::new("."))
            .unwrap();
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
