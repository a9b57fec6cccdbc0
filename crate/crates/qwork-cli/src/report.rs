use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub distributions: Vec<DistributionSummary>,
    pub criteria: Vec<CriteriaSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classicality: Option<serde_json::Value>,
    pub distances: Vec<DistanceEntry>,
    pub provenance: Provenance,
}

#[derive(Debug, Serialize)]
pub struct DistributionSummary {
    pub name: String,
    pub atom_count: usize,
    pub mean: f64,
    pub second_moment: f64,
    pub total_mass: f64,
}

#[derive(Debug, Serialize)]
pub struct CriteriaSummary {
    pub protocol: String,
    pub completeness_residual: f64,
    pub min_effect_eigenvalue: f64,
    pub first_law_operator_residual: f64,
    pub first_law_state_gap: f64,
}

#[derive(Debug, Serialize)]
pub struct DistanceEntry {
    pub pair: String,
    pub l1: f64,
}

#[derive(Debug, Serialize)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
    pub tool_version: String,
    pub step_certificates: Vec<StepCertificate>,
}

#[derive(Debug, Serialize)]
pub struct StepCertificate {
    pub steps: usize,
    pub unitarity_residual: f64,
    pub richardson_gap: f64,
}
