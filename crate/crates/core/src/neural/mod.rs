//! Small fully connected ReLU networks trained with plain SGD, the two
//! losses of neural fictitious self-play and frozen target copies.

mod mlp;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{LegalMask, NUM_ACTIONS};
use crate::memory::{BehaviourTuple, Transition};

pub use mlp::{Gradients, Mlp, NetInput, Workspace};

/// Floor on log-probabilities inside the policy loss.
pub const LOG_PROB_FLOOR: f64 = -30.0;

#[derive(Debug, Error)]
pub enum NeuralError {
    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("{0} loss is not finite")]
    NonFinite(&'static str),
    #[error("empty batch")]
    EmptyBatch,
    #[error("bad checkpoint: {0}")]
    BadCheckpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SgdConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
}

/// Softmax over the legal entries of `logits`; illegal actions get exactly 0.
pub fn masked_softmax(logits: &[f64], legal: LegalMask) -> [f64; NUM_ACTIONS] {
    assert!(!legal.is_empty(), "softmax needs a legal action");
    let max = legal.iter().map(|a| logits[a.index()]).fold(f64::NEG_INFINITY, f64::max);
    let mut p = [0.0; NUM_ACTIONS];
    let mut sum = 0.0;
    for a in legal.iter() {
        let e = (logits[a.index()] - max).exp();
        p[a.index()] = e;
        sum += e;
    }
    for v in &mut p {
        *v /= sum;
    }
    p
}

/// Action distribution of a policy network at one information state.
pub fn policy_distribution<I: NetInput + ?Sized>(net: &Mlp, input: &I, legal: LegalMask) -> [f64; NUM_ACTIONS] {
    masked_softmax(&net.forward(input), legal)
}

/// Largest legal entry and its index; ties go to the lowest index.
pub fn masked_argmax(values: &[f64], legal: LegalMask) -> (usize, f64) {
    let mut best = (usize::MAX, f64::NEG_INFINITY);
    for a in legal.iter().map(|a| a.index()) {
        if best.0 == usize::MAX || values[a] > best.1 {
            best = (a, values[a]);
        }
    }
    assert!(best.0 != usize::MAX, "argmax needs a legal action");
    best
}

/// Frozen copy of a Q-network used for TD targets.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetParams {
    net: Mlp,
    staleness: u64,
}

impl TargetParams {
    pub fn new(source: &Mlp) -> Self {
        TargetParams { net: source.clone(), staleness: 0 }
    }

    pub fn net(&self) -> &Mlp {
        &self.net
    }

    /// Updates of the source network since the last refit.
    pub fn staleness(&self) -> u64 {
        self.staleness
    }

    pub fn tick(&mut self) {
        self.staleness += 1;
    }

    pub fn refit(&mut self, source: &Mlp) {
        self.net.clone_from(source);
        self.staleness = 0;
    }

    pub(crate) fn from_parts(net: Mlp, staleness: u64) -> Self {
        TargetParams { net, staleness }
    }
}

/// Mean squared TD error of `net` on `batch` and its gradient. Targets are
/// `r + max_{a' legal} Q_target(s', a')`, or `r` at the end of the hand.
pub fn q_loss_and_gradients(net: &Mlp, target: &Mlp, batch: &[&Transition]) -> (f64, Gradients) {
    let mut grads = net.zero_gradients();
    let mut ws = net.workspace();
    let mut tws = target.workspace();
    let scale = 1.0 / batch.len() as f64;
    let mut loss = 0.0;
    let mut d_out = vec![0.0; net.output_width()];
    for t in batch {
        let y = match &t.next {
            Some((next, legal)) => t.reward + masked_argmax(target.forward_with(next, &mut tws), *legal).1,
            None => t.reward,
        };
        let a = t.action as usize;
        let err = net.forward_with(&t.state, &mut ws)[a] - y;
        loss += err * err * scale;
        d_out.fill(0.0);
        d_out[a] = 2.0 * err * scale;
        net.backward(&t.state, &d_out, &mut ws, &mut grads);
    }
    (loss, grads)
}

/// Mean negative log-likelihood of the recorded actions under the masked
/// softmax, and its gradient.
pub fn policy_loss_and_gradients(net: &Mlp, batch: &[&BehaviourTuple]) -> (f64, Gradients) {
    let mut grads = net.zero_gradients();
    let mut ws = net.workspace();
    let scale = 1.0 / batch.len() as f64;
    let mut loss = 0.0;
    let mut d_out = vec![0.0; net.output_width()];
    for t in batch {
        let a = t.action as usize;
        let legal = t.legal;
        let p = masked_softmax(net.forward_with(&t.state, &mut ws), legal);
        let logp = p[a].ln();
        d_out.fill(0.0);
        if logp > LOG_PROB_FLOOR {
            loss -= logp * scale;
            for j in legal.iter().map(|x| x.index()) {
                d_out[j] = (p[j] - f64::from(j == a)) * scale;
            }
        } else {
            // clamped: constant loss, no gradient
            loss -= LOG_PROB_FLOOR * scale;
        }
        net.backward(&t.state, &d_out, &mut ws, &mut grads);
    }
    (loss, grads)
}

/// One SGD step on the TD loss; returns the loss before the step.
pub fn q_update(
    net: &mut Mlp,
    target: &mut TargetParams,
    batch: &[&Transition],
    cfg: &SgdConfig,
) -> Result<f64, NeuralError> {
    if batch.is_empty() {
        return Err(NeuralError::EmptyBatch);
    }
    let (loss, grads) = q_loss_and_gradients(net, &target.net, batch);
    if !loss.is_finite() {
        return Err(NeuralError::NonFinite("Q"));
    }
    net.apply_gradients(&grads, cfg.learning_rate);
    target.tick();
    Ok(loss)
}

/// One SGD step on the policy log loss; returns the loss before the step.
pub fn policy_update(net: &mut Mlp, batch: &[&BehaviourTuple], cfg: &SgdConfig) -> Result<f64, NeuralError> {
    if batch.is_empty() {
        return Err(NeuralError::EmptyBatch);
    }
    let (loss, grads) = policy_loss_and_gradients(net, batch);
    if !loss.is_finite() {
        return Err(NeuralError::NonFinite("policy"));
    }
    net.apply_gradients(&grads, cfg.learning_rate);
    Ok(loss)
}

pub fn refit_target(net: &Mlp, target: &mut TargetParams) {
    target.refit(net);
}
