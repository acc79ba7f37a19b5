use super::maps::{bbpssw_analytic, bbpssw_success};
use super::{family_weights, shift_masses, EngineKind, Overlap, StepOutcome};
use crate::algebra::{Dim, WeightedEnsemble};
use crate::error::{domain, resource, Result};
use crate::gates::{bell, bell_mixture, bilateral_cnot, cnot_operator, BellWeights};

/// Largest `D` for the two-pair ensemble simulation (`D^4` amplitudes).
pub const BBPSSW_MAX_DIM: usize = 6;
/// Largest `D` for the two-pair density-matrix route (`D^4 x D^4`).
const DENSITY_MAX_DIM: usize = 4;

// Register order: a1 b1 a2 b2. Pair 1 controls, pair 2 is the target.
const ALICE: (usize, usize) = (0, 2);
const BOB: (usize, usize) = (1, 3);
const TARGETS: [usize; 2] = [2, 3];

fn check(q: &BellWeights, dim: Dim, max: usize) -> Result<()> {
    if dim.get() > max {
        return resource(format!(
            "BBPSSW simulation limited to D <= {max}, got {dim}"
        ));
    }
    if q.len() > dim.get() {
        return domain(format!("{} weights exceed D = {dim}", q.len()));
    }
    Ok(())
}

fn outcome<O: Overlap>(
    accepted: &O,
    q: &BellWeights,
    dim: Dim,
    p_success: f64,
    p_reject: f64,
    engine: EngineKind,
) -> Result<StepOutcome> {
    let masses = shift_masses(accepted, q.len(), dim)?;
    let f_out = accepted.overlap(&bell(0, 0, dim)?)? / p_success;
    Ok(StepOutcome {
        f_in: q.fidelity(),
        f_out,
        p_success,
        p_reject,
        weights_out: family_weights(&masses, p_success)?,
        unnormalized: masses,
        crossed_weight: None,
        rule: None,
        engine,
    })
}

/// One BBPSSW round on `rho ⊗ rho`, `rho = sum_i q_i |Psi_0i><Psi_0i|`,
/// simulated branch by branch.
///
/// Bilateral CNOT from pair 1 onto pair 2, both target qudits measured in
/// the computational basis, accepted when Alice and Bob agree.
pub fn bbpssw_step_sim(q: &BellWeights, dim: Dim) -> Result<StepOutcome> {
    check(q, dim, BBPSSW_MAX_DIM)?;
    let pairs = bell_mixture(q, dim)?;
    let mut accepted = Vec::new();
    let mut p_success = 0.0;
    let mut p_reject = 0.0;
    let mut crossed = 0.0;
    for (i, first) in pairs.branches().iter().enumerate() {
        for (j, second) in pairs.branches().iter().enumerate() {
            let joint = first.tensor(second)?;
            if joint.weight() == 0.0 {
                continue;
            }
            let evolved = bilateral_cnot(&joint, ALICE, BOB)?;
            for b in evolved.measure(&TARGETS)? {
                if b.outcome[0] == b.outcome[1] {
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
    let mut out = outcome(&ens, q, dim, p_success, p_reject, EngineKind::Enumeration)?;
    out.crossed_weight = Some(crossed);
    Ok(out)
}

/// The same round evolved as a dense density matrix on all four qudits.
pub fn bbpssw_step_density(q: &BellWeights, dim: Dim) -> Result<StepOutcome> {
    check(q, dim, DENSITY_MAX_DIM)?;
    let rho = bell_mixture(q, dim)?.to_density();
    let cx = cnot_operator(dim)?;
    let evolved = rho
        .tensor(&rho)?
        .conjugate_local(&cx, &[ALICE.0, ALICE.1])?
        .conjugate_local(&cx, &[BOB.0, BOB.1])?;
    let total = evolved.trace();
    let kept = evolved.project(|x| x[TARGETS[0]] == x[TARGETS[1]]);
    let p_success = kept.trace();
    let reduced = kept.partial_trace(&[0, 1])?;
    outcome(
        &reduced,
        q,
        dim,
        p_success,
        total - p_success,
        EngineKind::DensityMatrix,
    )
}

/// Closed-form round: `q'_i = q_i^2 / sum q_j^2`, success `sum q_j^2`.
pub fn bbpssw_step_analytic(q: &BellWeights) -> Result<StepOutcome> {
    let weights_out = bbpssw_analytic(q.as_slice())?;
    let p_success = bbpssw_success(q.as_slice());
    Ok(StepOutcome {
        f_in: q.fidelity(),
        f_out: weights_out.fidelity(),
        p_success,
        p_reject: 1.0 - p_success,
        unnormalized: q.as_slice().iter().map(|x| x * x).collect(),
        weights_out,
        crossed_weight: None,
        rule: None,
        engine: EngineKind::Analytic,
    })
}
