//! The semi-symbolic layer.
//!
//! A single tanh unit whose bias is derived from its own weights:
//!
//! ```text
//! y    = tanh(sum_i w_i * x_i + bias)
//! bias = delta * (max_i |w_i| - sum_i |w_i|)
//! ```
//!
//! With saturated weights and `delta = +1` the unit computes the conjunction
//! of its (possibly negated) inputs; with `delta = -1` the disjunction. The
//! sign of `w_i` selects whether `x_i` or `-x_i` participates. Truth values
//! are bipolar: `-1` false, `+1` true, `0` unknown.

use crate::error::{Error, Result};

/// Weight magnitude that saturates tanh for symbolic use (`tanh(6) ≈ 0.99999`).
pub const SATURATED_WEIGHT: f64 = 6.0;

/// Layer weights, one per input slot. Always finite.
#[derive(Debug, Clone, PartialEq)]
pub struct SlWeights(Vec<f64>);

impl SlWeights {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        check_finite(&w)?;
        Ok(Self(w))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// Semantic gate selector, `delta` in `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateSelector(f64);

impl GateSelector {
    pub const CONJUNCTIVE: GateSelector = GateSelector(1.0);
    pub const DISJUNCTIVE: GateSelector = GateSelector(-1.0);

    pub fn new(delta: f64) -> Result<Self> {
        if !delta.is_finite() {
            return Err(Error::NonFinite {
                index: 0,
                value: delta,
            });
        }
        if delta.abs() > 1.0 {
            return Err(Error::Config(format!("gate selector {delta} outside [-1, 1]")));
        }
        Ok(Self(delta))
    }

    /// Conjunctive gate of the given magnitude.
    pub fn conjunctive(magnitude: f64) -> Result<Self> {
        Self::new(magnitude.abs())
    }

    /// Disjunctive gate of the given magnitude.
    pub fn disjunctive(magnitude: f64) -> Result<Self> {
        Self::new(-magnitude.abs())
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// A bipolar truth value clamped to `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct TruthValue(f64);

impl TruthValue {
    pub const FALSE: TruthValue = TruthValue(-1.0);
    pub const UNKNOWN: TruthValue = TruthValue(0.0);
    pub const TRUE: TruthValue = TruthValue(1.0);

    /// Clamps into `[-1, 1]`. NaN maps to unknown.
    pub fn new(x: f64) -> Self {
        if x.is_nan() {
            Self(0.0)
        } else {
            Self(x.clamp(-1.0, 1.0))
        }
    }

    pub fn from_bool(b: bool) -> Self {
        if b {
            Self::TRUE
        } else {
            Self::FALSE
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Strictly positive outputs read as true.
    pub fn is_true(self) -> bool {
        self.0 > 0.0
    }
}

fn check_finite(w: &[f64]) -> Result<()> {
    match w.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite {
            index,
            value: w[index],
        }),
        None => Ok(()),
    }
}

/// `delta * (max |w| - sum |w|)`, zero for empty and singleton weights.
pub fn sl_bias(w: &SlWeights, delta: GateSelector) -> f64 {
    bias_raw(w.as_slice(), delta.value())
}

/// Checked variant of [`sl_bias`] over a raw slice.
pub fn sl_bias_checked(w: &[f64], delta: f64) -> Result<f64> {
    check_finite(w)?;
    Ok(bias_raw(w, delta))
}

#[inline]
pub(crate) fn bias_raw(w: &[f64], delta: f64) -> f64 {
    let mut max = 0.0f64;
    let mut sum = 0.0f64;
    for v in w {
        let a = v.abs();
        sum += a;
        if a > max {
            max = a;
        }
    }
    delta * (max - sum)
}

/// Index of the first weight attaining `max |w|`, if any weight exists.
#[inline]
pub(crate) fn argmax_abs(w: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in w.iter().enumerate() {
        let a = v.abs();
        match best {
            Some((_, m)) if a <= m => {}
            _ => best = Some((i, a)),
        }
    }
    best.map(|(i, _)| i)
}

#[inline]
pub(crate) fn sign0(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Adds the gradient of `bias_raw(w, delta)` scaled by `g` into `grad_w`.
///
/// Only the argmax index escapes the `-1` factor; zero weights receive nothing.
#[inline]
pub(crate) fn accumulate_bias_grad(w: &[f64], delta: f64, g: f64, grad_w: &mut [f64]) {
    let arg = argmax_abs(w);
    for (i, (gw, wi)) in grad_w.iter_mut().zip(w).enumerate() {
        let indicator = if Some(i) == arg { 1.0 } else { 0.0 };
        *gw += g * delta * sign0(*wi) * (indicator - 1.0);
    }
}

fn check_len(x: &[TruthValue], w: &SlWeights) -> Result<()> {
    if x.len() != w.len() {
        return Err(Error::Shape {
            what: "semi-symbolic input",
            expected: w.len(),
            actual: x.len(),
        });
    }
    Ok(())
}

/// Forward pass of a single semi-symbolic unit.
pub fn sl_forward(x: &[TruthValue], w: &SlWeights, delta: GateSelector) -> Result<TruthValue> {
    check_len(x, w)?;
    let pre: f64 = x
        .iter()
        .zip(w.as_slice())
        .map(|(xi, wi)| xi.value() * wi)
        .sum::<f64>()
        + sl_bias(w, delta);
    Ok(TruthValue(pre.tanh()))
}

/// Gradients of one unit with respect to its inputs and weights.
#[derive(Debug, Clone, PartialEq)]
pub struct SlGradients {
    pub grad_x: Vec<f64>,
    pub grad_w: Vec<f64>,
}

/// Backward pass of [`sl_forward`] given the upstream derivative `dL/dy`.
///
/// `delta` is a constant. The bias path uses `sign(0) = 0` and routes the
/// `max` subgradient to the lowest index attaining it.
pub fn sl_backward(
    x: &[TruthValue],
    w: &SlWeights,
    delta: GateSelector,
    upstream: f64,
) -> Result<SlGradients> {
    let y = sl_forward(x, w, delta)?.value();
    let g = upstream * (1.0 - y * y);
    let ws = w.as_slice();
    let grad_x = ws.iter().map(|wi| g * wi).collect();
    let mut grad_w: Vec<f64> = x.iter().map(|xi| g * xi.value()).collect();
    accumulate_bias_grad(ws, delta.value(), g, &mut grad_w);
    Ok(SlGradients { grad_x, grad_w })
}
