//! Grünwald–Letnikov fractional differintegral with short-memory truncation:
//!
//! ```text
//! D^a e(t_k) ~ dt^-a * sum_{j=0}^{L-1} w_j e(t_{k-j}),   w_0 = 1,
//! w_j = w_{j-1} * (1 - (a + 1) / j)
//! ```
//!
//! `a = 1` gives the backward difference, `a = -1` the rectangle-rule
//! integral over the last `L` samples, `a = 0` the identity.

use crate::scalar::{lit, Scalar};

/// First `len` GL binomial weights for order `order`.
pub fn gl_weights<T: Scalar>(order: T, len: usize) -> Vec<T> {
    let mut w = Vec::with_capacity(len);
    if len == 0 {
        return w;
    }
    w.push(T::one());
    for j in 1..len {
        let prev = w[j - 1];
        w.push(prev * (T::one() - (order + T::one()) / lit(j as f64)));
    }
    w
}

/// Evaluates the truncated GL sum over `history` (oldest first, newest
/// last), using at most the newest `memory_len` samples.
pub fn gl_fractional_op<T: Scalar>(history: &[T], order: T, dt_s: T, memory_len: usize) -> T {
    let n = history.len().min(memory_len);
    let w = gl_weights(order, n);
    let sum = history
        .iter()
        .rev()
        .take(n)
        .zip(&w)
        .fold(T::zero(), |acc, (&e, &wj)| acc + wj * e);
    sum * dt_s.powf(-order)
}

/// Sliding-window error history shared by the fractional operators.
///
/// Samples are written twice into a buffer of length `2L`, so the newest
/// `L` samples are always one contiguous slice in chronological order.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorHistory<T> {
    buf: Vec<T>,
    head: usize,
    len: usize,
    memory_len: usize,
    /// Steps since the last non-zero sample entered the window.
    quiet_steps: usize,
}

impl<T: Scalar> ErrorHistory<T> {
    pub fn new(memory_len: usize) -> Self {
        let memory_len = memory_len.max(1);
        ErrorHistory {
            buf: vec![T::zero(); 2 * memory_len],
            head: 0,
            len: 0,
            memory_len,
            quiet_steps: usize::MAX,
        }
    }

    pub fn push(&mut self, e: T) {
        self.buf[self.head] = e;
        self.buf[self.head + self.memory_len] = e;
        self.head = (self.head + 1) % self.memory_len;
        self.len = (self.len + 1).min(self.memory_len);
        if e != T::zero() {
            self.quiet_steps = 0;
        } else {
            self.quiet_steps = self.quiet_steps.saturating_add(1);
        }
    }

    /// Window in chronological order, zero-padded at the old end until
    /// `memory_len` samples have been seen.
    pub fn window(&self) -> &[T] {
        &self.buf[self.head..self.head + self.memory_len]
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn memory_len(&self) -> usize {
        self.memory_len
    }

    pub fn latest(&self) -> T {
        let w = self.window();
        w[w.len() - 1]
    }

    /// True when every sample in the window is exactly zero.
    pub fn all_zero(&self) -> bool {
        self.quiet_steps >= self.memory_len
    }
}

/// GL operator with weights and the `dt^-a` scale precomputed. Trailing
/// weights that are exactly zero (integer orders) are dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct GlKernel<T> {
    pub order: T,
    /// Weights reversed: `rev[i]` multiplies the sample `i` places from the
    /// old end of the active tail.
    rev: Vec<T>,
    scale: T,
}

impl<T: Scalar> GlKernel<T> {
    pub fn new(order: T, dt_s: T, memory_len: usize) -> Self {
        let mut w = gl_weights(order, memory_len.max(1));
        while w.len() > 1 && w[w.len() - 1] == T::zero() {
            w.pop();
        }
        w.reverse();
        GlKernel {
            order,
            rev: w,
            scale: dt_s.powf(-order),
        }
    }

    pub fn apply(&self, history: &ErrorHistory<T>) -> T {
        if history.all_zero() {
            return T::zero();
        }
        let window = history.window();
        let tail = &window[window.len() - self.rev.len()..];
        let sum = tail
            .iter()
            .zip(&self.rev)
            .fold(T::zero(), |acc, (&e, &w)| acc + w * e);
        sum * self.scale
    }

    pub fn active_len(&self) -> usize {
        self.rev.len()
    }
}
