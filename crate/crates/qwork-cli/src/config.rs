use anyhow::{bail, Context};
use num_complex::Complex64;
use qwork::dynamics::{Envelope, HamiltonianForm, TimeDependentHamiltonian};
use qwork::numkit::ComplexMatrix;
use qwork::quantum::{coherent_state, DensityMatrix, FockAlgebra, HermitianOperator};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: &str = "1";

/// Complex entry as a [re, im] pair.
pub type Centry = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: String,
    pub system: SystemConfig,
    pub hamiltonian: HamiltonianConfig,
    pub state: StateConfig,
    pub protocol: ProtocolConfig,
    pub analysis: AnalysisConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub dim: usize,
    pub hbar_eff: f64,
    pub mass: f64,
    pub omega0: f64,
    #[serde(default)]
    pub x_center: f64,
    #[serde(default)]
    pub p_center: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum HamiltonianConfig {
    Constant {
        matrix: Vec<Vec<Centry>>,
    },
    Quench {
        h0: Vec<Vec<Centry>>,
        h1: Vec<Vec<Centry>>,
        switch_time: f64,
    },
    LinearRampOscillator {
        omega1: f64,
    },
    PiecewiseTable {
        times: Vec<f64>,
        matrices: Vec<Vec<Vec<Centry>>>,
    },
    TwoLevelDrive {
        base: Vec<Vec<Centry>>,
        drive: Vec<Vec<Centry>>,
        envelope: EnvelopeConfig,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnvelopeConfig {
    Constant { value: f64 },
    HalfSine { amplitude: f64 },
    Table { times: Vec<f64>, values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateConfig {
    Coherent { alpha: Centry },
    Fock { n: usize },
    Mixture { parts: Vec<MixturePart> },
    Matrix { rows: Vec<Vec<Centry>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixturePart {
    pub weight: f64,
    pub state: StateConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolConfig {
    pub tau: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    pub povms: Vec<PovmChoice>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classical: Option<ClassicalConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub merge_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub align_tol: Option<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum PovmChoice {
    Tpm,
    Obs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalConfig {
    pub distribution: DistributionConfig,
    #[serde(default = "default_n_samples")]
    pub n_samples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bin_width: Option<f64>,
}

fn default_n_samples() -> usize {
    4096
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistributionConfig {
    Delta {
        x: f64,
        p: f64,
    },
    Gaussian {
        x: f64,
        p: f64,
        sigma_x: f64,
        sigma_p: f64,
    },
    Samples {
        points: Vec<[f64; 2]>,
        weights: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Axis values: drive amplitudes (result1) or hbar_eff values (result2).
    pub values: Vec<f64>,
}

impl ScenarioConfig {
    pub fn load(path: &std::path::Path) -> anyhow::Result<(Self, Vec<u8>)> {
        let bytes = std::fs::read(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let config: ScenarioConfig = serde_json::from_slice(&bytes)
            .with_context(|| format!("cannot parse config {}", path.display()))?;
        config.validate()?;
        Ok((config, bytes))
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            bail!(
                "unrecognized schema_version {:?} (expected {:?})",
                self.schema_version,
                SCHEMA_VERSION
            );
        }
        if self.system.dim < 2 {
            bail!("system.dim must be at least 2");
        }
        if !(self.system.hbar_eff > 0.0) || !(self.system.mass > 0.0) || !(self.system.omega0 > 0.0)
        {
            bail!("system.hbar_eff, mass, omega0 must be positive");
        }
        if !(self.protocol.tau > 0.0) {
            bail!("protocol.tau must be positive");
        }
        if self.analysis.povms.is_empty() {
            bail!("analysis.povms must name at least one protocol");
        }
        let dim = self.system.dim;
        let square = |m: &Vec<Vec<Centry>>, what: &str| -> anyhow::Result<()> {
            if m.len() != dim || m.iter().any(|r| r.len() != dim) {
                bail!("{what} must be a {dim}x{dim} matrix");
            }
            Ok(())
        };
        match &self.hamiltonian {
            HamiltonianConfig::Constant { matrix } => square(matrix, "hamiltonian.matrix")?,
            HamiltonianConfig::Quench { h0, h1, switch_time } => {
                square(h0, "hamiltonian.h0")?;
                square(h1, "hamiltonian.h1")?;
                if !(0.0..=self.protocol.tau).contains(switch_time) {
                    bail!("hamiltonian.switch_time outside [0, tau]");
                }
            }
            HamiltonianConfig::LinearRampOscillator { omega1 } => {
                if !(*omega1 > 0.0) {
                    bail!("hamiltonian.omega1 must be positive");
                }
            }
            HamiltonianConfig::PiecewiseTable { times, matrices } => {
                if times.len() != matrices.len() || times.is_empty() {
                    bail!("hamiltonian.times and matrices must be non-empty and equal length");
                }
                for m in matrices {
                    square(m, "hamiltonian.matrices entry")?;
                }
            }
            HamiltonianConfig::TwoLevelDrive { base, drive, .. } => {
                square(base, "hamiltonian.base")?;
                square(drive, "hamiltonian.drive")?;
            }
        }
        Ok(())
    }

    pub fn algebra(&self) -> anyhow::Result<FockAlgebra> {
        Ok(FockAlgebra::displaced(
            self.system.dim,
            self.system.hbar_eff,
            self.system.mass,
            self.system.omega0,
            self.system.x_center,
            self.system.p_center,
        )?)
    }

    pub fn hamiltonian(&self) -> anyhow::Result<TimeDependentHamiltonian> {
        let form = match &self.hamiltonian {
            HamiltonianConfig::Constant { matrix } => {
                HamiltonianForm::Constant(to_operator(matrix)?)
            }
            HamiltonianConfig::Quench { h0, h1, switch_time } => HamiltonianForm::Quench {
                h0: to_operator(h0)?,
                h1: to_operator(h1)?,
                switch_time: *switch_time,
            },
            HamiltonianConfig::LinearRampOscillator { omega1 } => {
                HamiltonianForm::LinearRampOscillator {
                    algebra: self.algebra()?,
                    omega1: *omega1,
                }
            }
            HamiltonianConfig::PiecewiseTable { times, matrices } => {
                HamiltonianForm::PiecewiseTable {
                    times: times.clone(),
                    matrices: matrices
                        .iter()
                        .map(|m| to_operator(m))
                        .collect::<anyhow::Result<_>>()?,
                }
            }
            HamiltonianConfig::TwoLevelDrive { base, drive, envelope } => {
                HamiltonianForm::TwoLevelDrive {
                    base: to_operator(base)?,
                    drive: to_operator(drive)?,
                    envelope: match envelope {
                        EnvelopeConfig::Constant { value } => Envelope::Constant(*value),
                        EnvelopeConfig::HalfSine { amplitude } => Envelope::HalfSine {
                            amplitude: *amplitude,
                        },
                        EnvelopeConfig::Table { times, values } => Envelope::Table {
                            times: times.clone(),
                            values: values.clone(),
                        },
                    },
                }
            }
        };
        Ok(TimeDependentHamiltonian::new(self.protocol.tau, form)?)
    }

    pub fn state(&self) -> anyhow::Result<DensityMatrix> {
        build_state(&self.state, self)
    }
}

fn build_state(state: &StateConfig, config: &ScenarioConfig) -> anyhow::Result<DensityMatrix> {
    let dim = config.system.dim;
    Ok(match state {
        StateConfig::Coherent { alpha } => {
            let algebra = config.algebra()?;
            coherent_state(Complex64::new(alpha[0], alpha[1]), &algebra)?
        }
        StateConfig::Fock { n } => {
            if *n >= dim {
                bail!("fock level {n} outside dimension {dim}");
            }
            let mut amps = vec![Complex64::new(0.0, 0.0); dim];
            amps[*n] = Complex64::new(1.0, 0.0);
            DensityMatrix::pure(&amps)?
        }
        StateConfig::Mixture { parts } => {
            let built: Vec<(f64, DensityMatrix)> = parts
                .iter()
                .map(|p| Ok((p.weight, build_state(&p.state, config)?)))
                .collect::<anyhow::Result<_>>()?;
            DensityMatrix::mixture(&built)?
        }
        StateConfig::Matrix { rows } => {
            if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                bail!("state.rows must be a {dim}x{dim} matrix");
            }
            DensityMatrix::from_matrix(to_matrix(rows))?
        }
    })
}

pub fn to_matrix(rows: &[Vec<Centry>]) -> ComplexMatrix {
    let n = rows.len();
    ComplexMatrix::from_fn(n, n, |j, k| Complex64::new(rows[j][k][0], rows[j][k][1]))
}

fn to_operator(rows: &[Vec<Centry>]) -> anyhow::Result<HermitianOperator> {
    Ok(HermitianOperator::new(to_matrix(rows), "energy")?)
}
