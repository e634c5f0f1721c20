use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::circuit::ExperimentBasis;
use crate::decoder::DecoderConfig;
use crate::error::{invalid, Result};
use crate::surgery::GraphPolicy;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Idle register and noisy blocks for `3·d_t` rounds, no surgery.
    Memory,
    /// Joint measurement by code surgery, optionally with the memory
    /// baseline for comparison.
    Surgery,
    /// Exhaustive distance audits of the deformed and spacetime codes.
    Audit,
    /// Exact 5-to-1 distillation sweep.
    Distill,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AuditInstance {
    /// Two distance-2 surface codes measuring `Z ⊗ Z`.
    Fig2,
    /// The register and noisy blocks of the config.
    Injection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistillGrid {
    pub q_min: f64,
    pub q_max: f64,
    pub q_points: usize,
    pub r_list: Vec<f64>,
}

impl Default for DistillGrid {
    fn default() -> Self {
        Self {
            q_min: 1e-3,
            q_max: 1e-2,
            q_points: 5,
            r_list: vec![0.0, 0.25, 0.5, 0.75, 1.0],
        }
    }
}

fn default_register() -> String {
    "bb18".into()
}

fn default_noisy() -> String {
    "surface:2".into()
}

fn default_targets() -> Vec<usize> {
    vec![0, 1]
}

fn default_d() -> usize {
    4
}

fn default_bases() -> Vec<ExperimentBasis> {
    vec![ExperimentBasis::Z, ExperimentBasis::X]
}

fn default_cap() -> usize {
    4
}

fn yes() -> bool {
    true
}

/// One experiment, as read from a JSON config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    /// Register code: `bb18`, `bb90` or `surface:<d>`.
    #[serde(default = "default_register")]
    pub register: String,
    /// Code of each noisy block; must encode one qubit.
    #[serde(default = "default_noisy")]
    pub noisy: String,
    /// Register logicals jointly measured with noisy blocks `0, 1, …`;
    /// `q` is their count.
    #[serde(default = "default_targets")]
    pub targets: Vec<usize>,
    #[serde(default = "default_d")]
    pub d_r: usize,
    #[serde(default = "default_d")]
    pub d_t: usize,
    #[serde(default)]
    pub p: Vec<f64>,
    #[serde(default)]
    pub shots: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_bases")]
    pub bases: Vec<ExperimentBasis>,
    #[serde(default)]
    pub policy: GraphPolicy,
    #[serde(default)]
    pub decoder: DecoderConfig,
    /// Probability per round of `x_0 ⊗ x_1` on the first two noisy blocks;
    /// an error source they share.
    #[serde(default)]
    pub shared_noise: f64,
    /// Surgery mode also runs the memory circuit and compares fits.
    #[serde(default = "yes")]
    pub baseline: bool,
    #[serde(default = "default_cap")]
    pub audit_cap: usize,
    #[serde(default = "default_audit_instance")]
    pub audit_instance: AuditInstance,
    #[serde(default)]
    pub distill: DistillGrid,
}

fn default_audit_instance() -> AuditInstance {
    AuditInstance::Fig2
}

impl ExperimentConfig {
    /// A config of `mode` with every other field at its default.
    pub fn new(mode: Mode) -> Self {
        serde_json::from_value(serde_json::json!({ "mode": mode })).expect("defaults deserialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn q(&self) -> usize {
        self.targets.len()
    }

    pub fn validate(&self) -> Result<()> {
        match self.mode {
            Mode::Memory | Mode::Surgery => {
                if self.p.is_empty() {
                    return Err(invalid("p list must not be empty"));
                }
                if let Some(p) = self.p.iter().find(|p| !(0.0..0.5).contains(*p)) {
                    return Err(invalid(format!("p = {p} outside [0, 0.5)")));
                }
                if self.shots == 0 {
                    return Err(invalid("shots must be at least 1"));
                }
                if self.bases.is_empty() || self.bases.contains(&ExperimentBasis::Both) {
                    return Err(invalid("bases must list z and/or x"));
                }
                if self.d_t == 0 || self.d_r == 0 {
                    return Err(invalid("d_t and d_r must be at least 1"));
                }
                if !(0.0..=1.0).contains(&self.shared_noise) {
                    return Err(invalid("shared_noise must lie in [0, 1]"));
                }
                if self.shared_noise > 0.0 && self.q() < 2 {
                    return Err(invalid("shared_noise needs at least two noisy blocks"));
                }
                if self.targets.is_empty() {
                    return Err(invalid("targets must not be empty"));
                }
            }
            Mode::Audit => {
                if self.d_t == 0 || self.d_r == 0 || self.audit_cap == 0 {
                    return Err(invalid("d_t, d_r and audit_cap must be at least 1"));
                }
            }
            Mode::Distill => {
                let g = &self.distill;
                if !(g.q_min > 0.0 && g.q_min <= g.q_max && g.q_max <= 1.0) || g.q_points == 0 || g.r_list.is_empty() {
                    return Err(invalid("distill grid needs 0 < q_min <= q_max <= 1, q_points >= 1 and a nonempty r_list"));
                }
                if g.r_list.iter().any(|r| !(0.0..=1.0).contains(r)) {
                    return Err(invalid("r values must lie in [0, 1]"));
                }
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON serialization.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Comment lines identifying the config, seed and library version.
    pub fn provenance(&self) -> String {
        format!(
            "# inject-core {}\n# config_sha256 {}\n# mode {}\n# seed {}\n",
            env!("CARGO_PKG_VERSION"),
            self.hash(),
            serde_json::to_value(self.mode).expect("mode serializes").as_str().unwrap_or_default(),
            self.seed
        )
    }
}
