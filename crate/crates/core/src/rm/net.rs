//! Dual-head MLP: forward pass, loss and hand-written backward pass.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{FEATURE_DIM, NUM_ACTIONS};

pub const DEFAULT_HIDDEN: usize = 64;

/// Parameters stored as one flat buffer in file order: layer1 weights
/// (hidden × input, row-major) and biases, layer2, policy head, reward head.
#[derive(Debug, Clone, PartialEq)]
pub struct RmWeights {
    hidden: usize,
    params: Vec<f32>,
}

/// Offsets of each tensor inside the flat buffer.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Layout {
    pub w1: usize,
    pub b1: usize,
    pub w2: usize,
    pub b2: usize,
    pub wp: usize,
    pub bp: usize,
    pub wr: usize,
    pub br: usize,
    pub len: usize,
}

impl Layout {
    pub fn new(hidden: usize) -> Self {
        let (i, h, a) = (FEATURE_DIM, hidden, NUM_ACTIONS);
        let w1 = 0;
        let b1 = w1 + h * i;
        let w2 = b1 + h;
        let b2 = w2 + h * h;
        let wp = b2 + h;
        let bp = wp + a * h;
        let wr = bp + a;
        let br = wr + h;
        Layout {
            w1,
            b1,
            w2,
            b2,
            wp,
            bp,
            wr,
            br,
            len: br + 1,
        }
    }
}

impl RmWeights {
    pub fn zeros(hidden: usize) -> Self {
        RmWeights {
            hidden,
            params: vec![0.0; Layout::new(hidden).len],
        }
    }

    pub fn from_params(hidden: usize, params: Vec<f32>) -> Result<Self> {
        if hidden == 0 {
            return Err(Error::validation("hidden width must be positive"));
        }
        let want = Layout::new(hidden).len;
        if params.len() != want {
            return Err(Error::validation(format!(
                "expected {want} parameters for hidden width {hidden}, got {}",
                params.len()
            )));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("model parameter"));
        }
        Ok(RmWeights { hidden, params })
    }

    pub fn from_f64(hidden: usize, params: &[f64]) -> Result<Self> {
        Self::from_params(hidden, params.iter().map(|&p| p as f32).collect())
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn params(&self) -> &[f32] {
        &self.params
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.params.iter().map(|&p| f64::from(p)).collect()
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn forward(&self, z: &[f64; FEATURE_DIM]) -> Result<RmOutput> {
        check_features(z)?;
        Ok(forward_f64(&self.to_f64(), self.hidden, z).output())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmOutput {
    pub policy: [f64; NUM_ACTIONS],
    pub reward: f64,
}

pub(crate) fn check_features(z: &[f64; FEATURE_DIM]) -> Result<()> {
    if z.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite("weak-unit feature"))
    }
}

/// Activations kept for the backward pass.
pub(crate) struct Trace {
    pub h1: Vec<f64>,
    pub h2: Vec<f64>,
    pub policy: [f64; NUM_ACTIONS],
    pub log_policy: [f64; NUM_ACTIONS],
    pub reward: f64,
}

impl Trace {
    fn output(&self) -> RmOutput {
        RmOutput {
            policy: self.policy,
            reward: self.reward,
        }
    }
}

fn affine(p: &[f64], w: usize, b: usize, rows: usize, x: &[f64], out: &mut [f64]) {
    let cols = x.len();
    for r in 0..rows {
        let row = &p[w + r * cols..w + (r + 1) * cols];
        out[r] = p[b + r] + row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
    }
}

pub(crate) fn forward_f64(p: &[f64], hidden: usize, z: &[f64; FEATURE_DIM]) -> Trace {
    let l = Layout::new(hidden);
    let mut h1 = vec![0.0; hidden];
    affine(p, l.w1, l.b1, hidden, z, &mut h1);
    h1.iter_mut().for_each(|v| *v = v.tanh());
    let mut h2 = vec![0.0; hidden];
    affine(p, l.w2, l.b2, hidden, &h1, &mut h2);
    h2.iter_mut().for_each(|v| *v = v.tanh());
    let mut logits = [0.0; NUM_ACTIONS];
    affine(p, l.wp, l.bp, NUM_ACTIONS, &h2, &mut logits);
    let mut rpre = [0.0];
    affine(p, l.wr, l.br, 1, &h2, &mut rpre);

    let hi = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e = logits.map(|v| (v - hi).exp());
    let total: f64 = e.iter().sum();
    let log_z = hi + total.ln();
    let log_policy = logits.map(|v| v - log_z);
    let policy = e.map(|v| v / total);
    Trace {
        h1,
        h2,
        policy,
        log_policy,
        reward: sigmoid(rpre[0]),
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `KL(p || q)` in nats over strictly positive `q`.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(&pi, _)| pi > 0.0)
        .map(|(&pi, &qi)| pi * (pi.ln() - qi.ln()))
        .sum::<f64>()
        .max(0.0)
}

/// Weights of the three loss terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub beta: f64,
    pub gamma: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights { beta: 1.0, gamma: 0.1 }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta >= 0.0 && self.beta.is_finite() && self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::validation(format!(
                "beta and gamma must be finite and >= 0 (got {} and {})",
                self.beta, self.gamma
            )));
        }
        Ok(())
    }
}

/// One training example: the weak unit before the step, the action taken
/// (successor), the observed reward, its distillation weight and the
/// posterior transition row over the seven successors.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub z: [f64; FEATURE_DIM],
    pub successor: usize,
    pub reward: f64,
    pub weight: f64,
    pub prior: [f64; NUM_ACTIONS],
}

impl Sample {
    pub fn validate(&self) -> Result<()> {
        check_features(&self.z)?;
        if self.successor >= NUM_ACTIONS {
            return Err(Error::validation(format!("successor index {} out of range", self.successor)));
        }
        if !self.reward.is_finite() || !self.weight.is_finite() {
            return Err(Error::NonFinite("sample reward or weight"));
        }
        if self.prior.iter().any(|&q| !(q > 0.0 && q.is_finite())) {
            return Err(Error::validation("posterior row has a zero or invalid entry"));
        }
        Ok(())
    }
}

/// Loss split into its three (already weighted) terms.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LossParts {
    pub distill: f64,
    pub reward: f64,
    pub markov: f64,
}

impl LossParts {
    pub fn total(&self) -> f64 {
        self.distill + self.reward + self.markov
    }
}

fn check_batch(batch: &[Sample]) -> Result<()> {
    if batch.is_empty() {
        return Err(Error::validation("empty batch"));
    }
    batch.iter().try_for_each(Sample::validate)
}

pub(crate) fn loss_f64(p: &[f64], hidden: usize, batch: &[Sample], lw: &LossWeights) -> LossParts {
    let n = batch.len() as f64;
    let mut parts = LossParts::default();
    for s in batch {
        let tr = forward_f64(p, hidden, &s.z);
        parts.distill -= s.weight * tr.log_policy[s.successor];
        parts.reward += (tr.reward - s.reward).powi(2);
        parts.markov += kl_divergence(&tr.policy, &s.prior);
    }
    LossParts {
        distill: parts.distill / n,
        reward: lw.beta * parts.reward / n,
        markov: lw.gamma * parts.markov / n,
    }
}

/// Gradient of the total loss with respect to the flat parameter vector,
/// together with the loss itself.
pub(crate) fn grad_f64(p: &[f64], hidden: usize, batch: &[Sample], lw: &LossWeights) -> (LossParts, Vec<f64>) {
    let l = Layout::new(hidden);
    let n = batch.len() as f64;
    let mut g = vec![0.0; l.len];
    let mut parts = LossParts::default();
    let mut dh2 = vec![0.0; hidden];
    let mut da2 = vec![0.0; hidden];
    let mut da1 = vec![0.0; hidden];
    for s in batch {
        let tr = forward_f64(p, hidden, &s.z);
        let kl = kl_divergence(&tr.policy, &s.prior);
        parts.distill -= s.weight * tr.log_policy[s.successor];
        parts.reward += (tr.reward - s.reward).powi(2);
        parts.markov += kl;

        // d loss / d logits
        let mut dlog = [0.0; NUM_ACTIONS];
        for k in 0..NUM_ACTIONS {
            let onehot = if k == s.successor { 1.0 } else { 0.0 };
            let d_distill = s.weight * (tr.policy[k] - onehot);
            let d_kl = tr.policy[k] * (tr.log_policy[k] - s.prior[k].ln() - kl);
            dlog[k] = (d_distill + lw.gamma * d_kl) / n;
        }
        let drpre = 2.0 * lw.beta * (tr.reward - s.reward) * tr.reward * (1.0 - tr.reward) / n;

        // heads
        dh2.iter_mut().for_each(|v| *v = 0.0);
        for k in 0..NUM_ACTIONS {
            g[l.bp + k] += dlog[k];
            let row = l.wp + k * hidden;
            for j in 0..hidden {
                g[row + j] += dlog[k] * tr.h2[j];
                dh2[j] += p[row + j] * dlog[k];
            }
        }
        g[l.br] += drpre;
        for j in 0..hidden {
            g[l.wr + j] += drpre * tr.h2[j];
            dh2[j] += p[l.wr + j] * drpre;
        }

        // layer 2
        for j in 0..hidden {
            da2[j] = dh2[j] * (1.0 - tr.h2[j] * tr.h2[j]);
        }
        da1.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..hidden {
            g[l.b2 + j] += da2[j];
            let row = l.w2 + j * hidden;
            for i in 0..hidden {
                g[row + i] += da2[j] * tr.h1[i];
                da1[i] += p[row + i] * da2[j];
            }
        }

        // layer 1
        for i in 0..hidden {
            let d = da1[i] * (1.0 - tr.h1[i] * tr.h1[i]);
            g[l.b1 + i] += d;
            let row = l.w1 + i * FEATURE_DIM;
            for f in 0..FEATURE_DIM {
                g[row + f] += d * s.z[f];
            }
        }
    }
    let parts = LossParts {
        distill: parts.distill / n,
        reward: lw.beta * parts.reward / n,
        markov: lw.gamma * parts.markov / n,
    };
    (parts, g)
}

/// Loss of `w` on `batch`.
pub fn rm_loss(w: &RmWeights, batch: &[Sample], lw: &LossWeights) -> Result<LossParts> {
    check_batch(batch)?;
    lw.validate()?;
    Ok(loss_f64(&w.to_f64(), w.hidden, batch, lw))
}

/// Analytic gradient, evaluated in 64-bit arithmetic on the widened weights.
pub fn rm_grad(w: &RmWeights, batch: &[Sample], lw: &LossWeights) -> Result<Vec<f64>> {
    check_batch(batch)?;
    lw.validate()?;
    Ok(grad_f64(&w.to_f64(), w.hidden, batch, lw).1)
}

/// Same as [`rm_grad`] for a 64-bit parameter vector.
pub fn rm_grad_f64(params: &[f64], hidden: usize, batch: &[Sample], lw: &LossWeights) -> Result<Vec<f64>> {
    check_batch(batch)?;
    lw.validate()?;
    if params.len() != Layout::new(hidden).len {
        return Err(Error::validation("parameter vector does not match hidden width"));
    }
    Ok(grad_f64(params, hidden, batch, lw).1)
}

/// Same as [`rm_loss`] for a 64-bit parameter vector.
pub fn rm_loss_f64(params: &[f64], hidden: usize, batch: &[Sample], lw: &LossWeights) -> Result<LossParts> {
    check_batch(batch)?;
    lw.validate()?;
    if params.len() != Layout::new(hidden).len {
        return Err(Error::validation("parameter vector does not match hidden width"));
    }
    Ok(loss_f64(params, hidden, batch, lw))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(v: f64) -> [f64; FEATURE_DIM] {
        let mut z = [v; FEATURE_DIM];
        z[FEATURE_DIM - 1] = 1.0;
        z
    }

    #[test]
    fn zero_weights_are_uniform() {
        let w = RmWeights::zeros(DEFAULT_HIDDEN);
        assert_eq!(w.num_params(), 20 * 64 + 64 + 64 * 64 + 64 + 7 * 64 + 7 + 64 + 1);
        let out = w.forward(&z(0.3)).unwrap();
        for p in out.policy {
            assert!((p - 1.0 / 7.0).abs() < 1e-15);
        }
        assert_eq!(out.reward, 0.5);
    }

    #[test]
    fn non_finite_features_rejected() {
        let mut x = z(0.0);
        x[3] = f64::NAN;
        assert!(RmWeights::zeros(8).forward(&x).is_err());
    }

    #[test]
    fn distillation_of_uniform_policy_is_ln7() {
        let s = Sample {
            z: z(0.1),
            successor: 2,
            reward: 0.5,
            weight: 1.0,
            prior: [1.0 / 7.0; 7],
        };
        let parts = rm_loss(&RmWeights::zeros(16), &[s], &LossWeights::default()).unwrap();
        assert!((parts.distill - 7f64.ln()).abs() < 1e-12);
        assert!((parts.distill - 1.9459).abs() < 1e-4);
        assert_eq!(parts.reward, 0.0);
        assert!(parts.markov.abs() < 1e-15);
    }

    #[test]
    fn zero_prior_entry_rejected() {
        let mut prior = [1.0 / 6.0; 7];
        prior[4] = 0.0;
        let s = Sample {
            z: z(0.1),
            successor: 0,
            reward: 0.5,
            weight: 1.0,
            prior,
        };
        assert!(rm_loss(&RmWeights::zeros(4), &[s], &LossWeights::default()).is_err());
    }

    #[test]
    fn kl_properties() {
        let p = [0.2, 0.3, 0.5];
        assert_eq!(kl_divergence(&p, &p), 0.0);
        assert!(kl_divergence(&p, &[0.5, 0.3, 0.2]) > 0.0);
    }
}
