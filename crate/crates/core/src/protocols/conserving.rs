//! Distillation of angular-momentum conserving pairs with a bilateral CNOT,
//! keeping the round only when both target qudits read 0.

use super::maps::{conserving_fidelity, conserving_success};
use super::{family_weights, EngineKind, Overlap, StepOutcome};
use crate::algebra::{Dim, WeightedEnsemble};
use crate::error::{resource, Result};
use crate::gates::{
    bilateral_cnot, check_fidelity, cnot_operator, conserving_mixture, conserving_states,
    BellWeights,
};

/// Largest `D` for the two-pair ensemble simulation.
pub const CONSERVING_MAX_DIM: usize = 6;
const DENSITY_MAX_DIM: usize = 4;

const ALICE: (usize, usize) = (0, 2);
const BOB: (usize, usize) = (1, 3);
const TARGETS: [usize; 2] = [2, 3];

fn check(f: f64, dim: Dim, max: usize) -> Result<()> {
    check_fidelity(f)?;
    if dim.get() > max {
        return resource(format!(
            "conserving-pair simulation limited to D <= {max}, got {dim}"
        ));
    }
    Ok(())
}

fn outcome<O: Overlap>(
    accepted: &O,
    f: f64,
    dim: Dim,
    p_success: f64,
    p_reject: f64,
    engine: EngineKind,
) -> Result<StepOutcome> {
    let (phi_c, psi_nc) = conserving_states(dim)?;
    let masses = vec![accepted.overlap(&phi_c)?, accepted.overlap(&psi_nc)?];
    Ok(StepOutcome {
        f_in: f,
        f_out: masses[0] / p_success,
        p_success,
        p_reject,
        weights_out: family_weights(&masses, p_success)?,
        unnormalized: masses,
        crossed_weight: None,
        rule: None,
        engine,
    })
}

/// One round on `rho ⊗ rho`, `rho = F |Phi_C><Phi_C| + (1-F) |Psi_NC><Psi_NC|`,
/// simulated over the four product branches.
///
/// `crossed_weight` is the accepted mass coming from the mixed branches
/// `Phi_C ⊗ Psi_NC` and `Psi_NC ⊗ Phi_C`.
pub fn conserving_step_sim(f: f64, dim: Dim) -> Result<StepOutcome> {
    check(f, dim, CONSERVING_MAX_DIM)?;
    let rho = conserving_mixture(f, dim)?;
    let mut accepted = Vec::new();
    let (mut p_success, mut p_reject, mut crossed) = (0.0, 0.0, 0.0);
    for (i, first) in rho.branches().iter().enumerate() {
        for (j, second) in rho.branches().iter().enumerate() {
            let joint = first.tensor(second)?;
            if joint.weight() == 0.0 {
                continue;
            }
            let evolved = bilateral_cnot(&joint, ALICE, BOB)?;
            for b in evolved.measure(&TARGETS)? {
                if b.outcome == [0, 0] {
                    p_success += b.state.weight();
                    if i != j {
                        crossed += b.state.weight();
                    }
                    accepted.push(b.state);
                } else {
                    p_reject += b.state.weight();
                }
            }
        }
    }
    let ens = WeightedEnsemble::new(accepted)?;
    let mut out = outcome(&ens, f, dim, p_success, p_reject, EngineKind::Enumeration)?;
    out.crossed_weight = Some(crossed);
    Ok(out)
}

/// The same round as a dense density matrix on all four qudits.
pub fn conserving_step_density(f: f64, dim: Dim) -> Result<StepOutcome> {
    check(f, dim, DENSITY_MAX_DIM)?;
    let rho = conserving_mixture(f, dim)?.to_density();
    let cx = cnot_operator(dim)?;
    let evolved = rho
        .tensor(&rho)?
        .conjugate_local(&cx, &[ALICE.0, ALICE.1])?
        .conjugate_local(&cx, &[BOB.0, BOB.1])?;
    let total = evolved.trace();
    let kept = evolved.project(|x| x[TARGETS[0]] == 0 && x[TARGETS[1]] == 0);
    let p_success = kept.trace();
    let reduced = kept.partial_trace(&[0, 1])?;
    outcome(
        &reduced,
        f,
        dim,
        p_success,
        total - p_success,
        EngineKind::DensityMatrix,
    )
}

/// Closed form: accepted masses `F^2/D` on `|Phi_C>` and
/// `(1-F)^2/(D(D-1))` on `|Psi_NC>`.
pub fn conserving_step_analytic(f: f64, dim: Dim) -> Result<StepOutcome> {
    check_fidelity(f)?;
    let d = dim.get() as f64;
    let unnormalized = vec![f * f / d, (1.0 - f) * (1.0 - f) / (d * (d - 1.0))];
    let p_success = conserving_success(f, dim);
    let f_out = conserving_fidelity(f, dim);
    Ok(StepOutcome {
        f_in: f,
        f_out,
        p_success,
        p_reject: 1.0 - p_success,
        weights_out: BellWeights::normalize(vec![f_out, 1.0 - f_out])?,
        unnormalized,
        crossed_weight: Some(0.0),
        rule: None,
        engine: EngineKind::Analytic,
    })
}
