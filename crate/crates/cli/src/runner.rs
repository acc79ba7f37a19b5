//! Turns a protocol, an input and an engine choice into report rows.

use oam_distill::algebra::Dim;
use oam_distill::gates::BellWeights;
use oam_distill::protocols::*;
use rayon::prelude::*;

use crate::args::{Engine, Protocol};
use crate::report::ReportRow;
use crate::CliError;

/// Starting point of a run.
#[derive(Debug, Clone, PartialEq)]
pub enum Input {
    Fidelity(f64),
    Weights(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub protocol: Protocol,
    pub dim: usize,
    pub input: Input,
    /// Ignored outside the beam-splitter protocol.
    pub rule: AcceptanceRule,
    pub steps: u32,
    pub engine: Engine,
}

/// State carried between rounds.
enum Carry {
    Bell(BellWeights),
    Conserving(f64),
}

impl Carry {
    fn f(&self) -> f64 {
        match self {
            Carry::Bell(q) => q.fidelity(),
            Carry::Conserving(f) => *f,
        }
    }
}

fn step(
    protocol: Protocol,
    carry: &Carry,
    dim: Dim,
    rule: AcceptanceRule,
    simulate: bool,
) -> oam_distill::Result<StepOutcome> {
    match (protocol, carry) {
        (Protocol::Bbpssw, Carry::Bell(q)) if simulate => bbpssw_step_sim(q, dim),
        (Protocol::Bbpssw, Carry::Bell(q)) => {
            if q.len() > dim.get() {
                return Err(oam_distill::Error::Domain(format!(
                    "{} weights exceed D = {dim}",
                    q.len()
                )));
            }
            bbpssw_step_analytic(q)
        }
        (Protocol::Oambs, Carry::Bell(q)) if simulate => oambs_step(q, dim, rule),
        (Protocol::Oambs, Carry::Bell(q)) => oambs_step_analytic(q, dim, rule),
        (Protocol::Conserving, Carry::Conserving(f)) if simulate => conserving_step_sim(*f, dim),
        (Protocol::Conserving, Carry::Conserving(f)) => conserving_step_analytic(*f, dim),
        _ => unreachable!("carry matches protocol by construction"),
    }
}

pub fn run(spec: &RunSpec) -> Result<Vec<ReportRow>, CliError> {
    let dim = Dim::new(spec.dim)?;
    if spec.protocol == Protocol::Oambs
        && spec.rule == AcceptanceRule::LiteralCoincidence
        && spec.steps > 1
    {
        return Err(CliError::Usage(
            "the literal rule leaves a state outside the Bell-diagonal family; use --steps 1"
                .into(),
        ));
    }
    let mut carry = match (&spec.input, spec.protocol) {
        (Input::Fidelity(f), Protocol::Conserving) => {
            if !(0.0..=1.0).contains(f) {
                return Err(CliError::Usage(format!("fidelity {f} outside [0, 1]")));
            }
            Carry::Conserving(*f)
        }
        (Input::Weights(_), Protocol::Conserving) => {
            return Err(CliError::Usage(
                "conserving pairs take --fidelity, not --weights".into(),
            ))
        }
        (Input::Fidelity(f), _) => Carry::Bell(BellWeights::isotropic(*f, dim)?),
        (Input::Weights(w), _) => Carry::Bell(BellWeights::new(w.clone())?),
    };
    let rule_name = match spec.protocol {
        Protocol::Oambs => spec.rule.name(),
        _ => "-",
    };
    let mut rows = Vec::with_capacity(spec.steps as usize);
    for k in 1..=spec.steps {
        let f_in = carry.f();
        let (primary, residual) = match spec.engine {
            Engine::Analytic => (step(spec.protocol, &carry, dim, spec.rule, false)?, None),
            Engine::Enumerate => (step(spec.protocol, &carry, dim, spec.rule, true)?, None),
            Engine::Both => {
                let sim = step(spec.protocol, &carry, dim, spec.rule, true)?;
                let ana = step(spec.protocol, &carry, dim, spec.rule, false)?;
                let r = (sim.f_out - ana.f_out)
                    .abs()
                    .max((sim.p_success - ana.p_success).abs());
                (sim, Some(r))
            }
        };
        rows.push(ReportRow {
            protocol: spec.protocol.name().into(),
            dim: spec.dim,
            rule: rule_name.into(),
            engine: spec.engine.name().into(),
            step: k,
            f_in,
            f_out: primary.f_out,
            p_success: primary.p_success,
            residual,
        });
        carry = match carry {
            Carry::Bell(_) => Carry::Bell(primary.weights_out),
            Carry::Conserving(_) => Carry::Conserving(primary.f_out),
        };
    }
    Ok(rows)
}

/// Grid order: protocol, then `D`, then `F`. Points run in parallel; rows
/// come back in grid order.
pub fn sweep(specs: &[RunSpec]) -> Result<Vec<ReportRow>, CliError> {
    let results: Vec<Result<Vec<ReportRow>, CliError>> = specs.par_iter().map(run).collect();
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(protocol: Protocol, f: f64, engine: Engine) -> RunSpec {
        RunSpec {
            protocol,
            dim: 3,
            input: Input::Fidelity(f),
            rule: AcceptanceRule::Corrected,
            steps: 1,
            engine,
        }
    }

    #[test]
    fn both_engines_report_residual() {
        let rows = run(&spec(Protocol::Oambs, 0.5, Engine::Both)).unwrap();
        assert_eq!(rows.len(), 1);
        assert!((rows[0].f_out - 0.8).abs() < 1e-9);
        assert!(rows[0].residual.unwrap() < 1e-9);
        assert_eq!(rows[0].rule, "corrected");
    }

    #[test]
    fn steps_chain_outputs() {
        let mut s = spec(Protocol::Bbpssw, 0.5, Engine::Analytic);
        s.steps = 3;
        let rows = run(&s).unwrap();
        assert_eq!(rows.len(), 3);
        for w in rows.windows(2) {
            assert_eq!(w[1].f_in, w[0].f_out);
        }
        assert_eq!(rows[0].rule, "-");
    }

    #[test]
    fn literal_refuses_chaining() {
        let mut s = spec(Protocol::Oambs, 0.5, Engine::Analytic);
        s.rule = AcceptanceRule::LiteralCoincidence;
        s.steps = 2;
        assert!(matches!(run(&s), Err(CliError::Usage(_))));
    }

    #[test]
    fn sweep_keeps_grid_order() {
        let specs: Vec<RunSpec> = [0.9, 0.1, 0.5]
            .iter()
            .map(|&f| spec(Protocol::Conserving, f, Engine::Enumerate))
            .collect();
        let rows = sweep(&specs).unwrap();
        let f_in: Vec<f64> = rows.iter().map(|r| r.f_in).collect();
        assert_eq!(f_in, vec![0.9, 0.1, 0.5]);
    }
}
