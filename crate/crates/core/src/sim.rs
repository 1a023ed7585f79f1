//! Seeded simulation: each step fires a transition or applies a rule, chosen
//! uniformly among everything currently possible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dpo::{applicable_occurrences, transform, DpoError};
use crate::format::Model;
use crate::matching::{NetMorphism, Occurrence};
use crate::net::{NetError, PTNet};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Event {
    Fire {
        transition: String,
        before: Vec<String>,
        after: Vec<String>,
    },
    Transform {
        rule: String,
        occurrence: NetMorphism,
        before: Vec<String>,
        after: Vec<String>,
    },
}

impl Event {
    fn digests(&self) -> (&[String], &[String]) {
        match self {
            Event::Fire { before, after, .. } | Event::Transform { before, after, .. } => (before, after),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub seed: u64,
    pub steps: usize,
    pub events: Vec<Event>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("step {step}: unknown rule `{rule}`")]
    UnknownRule { step: usize, rule: String },
    #[error("step {step}: marking digest differs from the trace")]
    Mismatch { step: usize },
    #[error("step {step}: {source}")]
    Net { step: usize, source: NetError },
    #[error("step {step}: {source}")]
    Dpo { step: usize, source: DpoError },
}

/// One possible move.
enum Choice<'a> {
    Fire(&'a str),
    Transform(usize, Occurrence),
}

fn choices<'a>(net: &'a PTNet, model: &Model) -> Vec<Choice<'a>> {
    let mut out: Vec<Choice> = net
        .enabled_transitions()
        .into_iter()
        // Capacity is checked after firing.
        .filter(|t| net.fire(t).is_ok())
        .map(Choice::Fire)
        .collect();
    for (i, rule) in model.rules.iter().enumerate() {
        out.extend(
            applicable_occurrences(rule, net)
                .into_iter()
                .map(|o| Choice::Transform(i, o)),
        );
    }
    out
}

/// Runs up to `steps` steps, stopping early when nothing is possible.
pub fn simulate(model: &Model, steps: usize, seed: u64) -> Result<(Trace, PTNet), SimError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut net = model.net.clone();
    let mut events = Vec::new();
    for step in 0..steps {
        let mut options = choices(&net, model);
        if options.is_empty() {
            break;
        }
        let before = net.marking().digest();
        let pick = options.swap_remove(rng.gen_range(0..options.len()));
        let (next, event) = match pick {
            Choice::Fire(t) => {
                let next = net.fire(t).map_err(|source| SimError::Net { step, source })?;
                let after = next.marking().digest();
                let event = Event::Fire { transition: t.to_string(), before, after };
                (next, event)
            }
            Choice::Transform(i, o) => {
                let rule = &model.rules[i];
                let next = transform(&net, rule, &o)
                    .map_err(|source| SimError::Dpo { step, source })?
                    .result;
                let event = Event::Transform {
                    rule: rule.name().to_string(),
                    occurrence: o.into_morphism(),
                    before,
                    after: next.marking().digest(),
                };
                (next, event)
            }
        };
        net = next;
        events.push(event);
    }
    Ok((Trace { seed, steps, events }, net))
}

/// Re-executes a trace, checking every recorded digest.
pub fn replay(model: &Model, trace: &Trace) -> Result<PTNet, SimError> {
    let mut net = model.net.clone();
    for (step, event) in trace.events.iter().enumerate() {
        let (before, after) = event.digests();
        if net.marking().digest() != before {
            return Err(SimError::Mismatch { step });
        }
        net = match event {
            Event::Fire { transition, .. } => {
                net.fire(transition).map_err(|source| SimError::Net { step, source })?
            }
            Event::Transform { rule, occurrence, .. } => {
                let r = model
                    .rules
                    .iter()
                    .find(|r| r.name() == rule)
                    .ok_or_else(|| SimError::UnknownRule { step, rule: rule.clone() })?;
                let o = Occurrence::new(r.lhs(), &net, occurrence.clone())
                    .map_err(|e| SimError::Dpo { step, source: e.into() })?;
                transform(&net, r, &o)
                    .map_err(|source| SimError::Dpo { step, source })?
                    .result
            }
        };
        if net.marking().digest() != after {
            return Err(SimError::Mismatch { step });
        }
    }
    Ok(net)
}
