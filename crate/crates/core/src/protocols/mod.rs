//! Distillation protocols, each as an exact simulation and as a closed-form
//! recursion: qudit BBPSSW, the single-step generalized beam-splitter
//! protocol, and bilateral-CNOT distillation of conserving pairs.

mod bbpssw;
mod conserving;
mod maps;
mod oambs;

pub use bbpssw::{bbpssw_step_analytic, bbpssw_step_density, bbpssw_step_sim, BBPSSW_MAX_DIM};
pub use conserving::{
    conserving_step_analytic, conserving_step_density, conserving_step_sim, CONSERVING_MAX_DIM,
};
pub use maps::{
    acceleration_check, bbpssw_analytic, bbpssw_fidelity, bbpssw_m2, bbpssw_odds, bbpssw_success,
    conserving_fidelity, conserving_success, fixed_points, iterate_map, oambs_fidelity,
    oambs_literal_fidelity, oambs_odds, oambs_success, RecursionMap,
};
pub use oambs::{
    oambs_step, oambs_step_analytic, oambs_step_full, oambs_step_grouped, oambs_step_sim,
    OAMBS_FULL_MAX_DIM, OAMBS_GROUPED_MAX_DIM,
};

use std::fmt;
use std::str::FromStr;

use crate::algebra::{DensityMatrix, Dim, PureState, WeightedEnsemble, SIM_TOL};
use crate::error::{domain, Error, Result};
use crate::gates::{bell, BellWeights};

/// Classical acceptance condition applied to the rotated-basis outcomes of
/// the beam-splitter protocol.
///
/// With Alice's outcomes `m_1..m_{D-1}` and Bob's `n_1..n_{D-1}`, the
/// surviving pair is `|Psi_si>` where `s = sum(m_d + n_d) mod D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum AcceptanceRule {
    /// Accept iff `s = 0`.
    SumZero,
    /// Accept every outcome and undo the phase with `phase_z(s)` on Alice's qudit.
    #[default]
    Corrected,
    /// Accept iff `m_d = n_d` for every measured channel.
    LiteralCoincidence,
}

impl AcceptanceRule {
    pub const ALL: [AcceptanceRule; 3] = [
        AcceptanceRule::SumZero,
        AcceptanceRule::Corrected,
        AcceptanceRule::LiteralCoincidence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AcceptanceRule::SumZero => "sum-zero",
            AcceptanceRule::Corrected => "corrected",
            AcceptanceRule::LiteralCoincidence => "literal",
        }
    }
}

impl fmt::Display for AcceptanceRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AcceptanceRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sum-zero" => Ok(AcceptanceRule::SumZero),
            "corrected" => Ok(AcceptanceRule::Corrected),
            "literal" | "literal-coincidence" => Ok(AcceptanceRule::LiteralCoincidence),
            other => domain(format!("unknown acceptance rule '{other}'")),
        }
    }
}

/// How a step was evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EngineKind {
    /// Closed-form recursion.
    Analytic,
    /// Full state-vector enumeration of every ensemble branch.
    Enumeration,
    /// Beam-splitter enumeration with outcomes grouped by phase class.
    Grouped,
    /// Dense density-matrix evolution.
    DensityMatrix,
}

/// Result of one distillation step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub f_in: f64,
    /// Fidelity of the accepted, renormalized pair with the target state.
    pub f_out: f64,
    /// Total accepted probability mass.
    pub p_success: f64,
    /// Mass discarded by post-selection or rejected outcomes.
    pub p_reject: f64,
    /// Renormalized weights of the output over the input family.
    pub weights_out: BellWeights,
    /// Accepted (unnormalized) mass on each family member.
    pub unnormalized: Vec<f64>,
    /// Accepted mass traced to crossed input branches, when the engine can
    /// attribute mass to branches.
    pub crossed_weight: Option<f64>,
    pub rule: Option<AcceptanceRule>,
    pub engine: EngineKind,
}

/// Representations able to report `<t|rho|t>` for the accepted pair.
pub(crate) trait Overlap {
    fn overlap(&self, target: &PureState) -> Result<f64>;
}

impl Overlap for WeightedEnsemble {
    fn overlap(&self, target: &PureState) -> Result<f64> {
        self.fidelity(target)
    }
}

impl Overlap for DensityMatrix {
    fn overlap(&self, target: &PureState) -> Result<f64> {
        self.fidelity(target)
    }
}

/// Renormalized family weights from measured accepted masses. The masses
/// must already account for the whole accepted state within `SIM_TOL`.
pub(crate) fn family_weights(masses: &[f64], p_success: f64) -> Result<BellWeights> {
    if !(p_success > 0.0) {
        return domain("no probability mass was accepted");
    }
    let q: Vec<f64> = masses.iter().map(|m| (m / p_success).max(0.0)).collect();
    let s: f64 = q.iter().sum();
    if (s - 1.0).abs() > SIM_TOL {
        return domain(format!(
            "accepted state leaves the input family (weights sum to {s})"
        ));
    }
    BellWeights::normalize(q)
}

/// Accepted mass on each shift label `i < len`, summed over phase labels
/// `k`: the weight of `|Psi_ki>` for any `k`.
pub(crate) fn shift_masses<O: Overlap>(state: &O, len: usize, dim: Dim) -> Result<Vec<f64>> {
    (0..len)
        .map(|i| {
            dim.values()
                .map(|k| state.overlap(&bell(k, i, dim)?))
                .sum::<Result<f64>>()
        })
        .collect()
}
