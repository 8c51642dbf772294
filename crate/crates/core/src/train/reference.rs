//! Double-double (≈32 significant digits) forward pass used as the
//! finite-difference reference for gradient checks.
//!
//! It shares nothing with the f64 inference or backprop paths beyond reading
//! the network's parameters.

use std::ops::{Add, Mul, Neg, Sub};

use crate::mlp::{Activation, Network};

/// Unevaluated sum `hi + lo` with `|lo| ≤ ulp(hi)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Dd {
    hi: f64,
    lo: f64,
}

const LN2: Dd = Dd {
    hi: std::f64::consts::LN_2,
    lo: 2.3190468138462996e-17,
};

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub(crate) const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub(crate) fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    /// Exact sum of two doubles.
    #[cfg(test)]
    fn sum(a: f64, b: f64) -> Self {
        let (hi, lo) = two_sum(a, b);
        Dd { hi, lo }
    }

    pub(crate) fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    fn scale_pow2(self, k: i32) -> Self {
        let f = 2f64.powi(k);
        Dd {
            hi: self.hi * f,
            lo: self.lo * f,
        }
    }

    fn recip(self) -> Self {
        Dd::ONE / self
    }

    fn exp(self) -> Self {
        if self.hi > 709.0 {
            return Dd::from_f64(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Dd::ZERO;
        }
        let k = (self.hi / LN2.hi).round();
        let r = (self - LN2 * Dd::from_f64(k)).scale_pow2(-10);
        // |r| < 4e-4, so 12 Taylor terms are far below the working precision.
        let mut term = Dd::ONE;
        let mut sum = Dd::ONE;
        for n in 1..=12 {
            term = term * r / Dd::from_f64(n as f64);
            sum = sum + term;
        }
        let mut e = sum;
        for _ in 0..10 {
            e = e * e;
        }
        e.scale_pow2(k as i32)
    }

    pub(crate) fn tanh(self) -> Self {
        if self.hi < 0.0 {
            return -(-self).tanh();
        }
        if self.hi > 40.0 {
            return Dd::ONE;
        }
        if self.hi == 0.0 {
            return Dd::ZERO;
        }
        // tanh x = (e^{2x} - 1) / (e^{2x} + 1)
        let e = (self + self).exp();
        (e - Dd::ONE) * (e + Dd::ONE).recip()
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, b: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (hi, lo) = quick_two_sum(s1, s2 + t2);
        Dd { hi, lo }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, b: Dd) -> Dd {
        let (p1, p2) = two_prod(self.hi, b.hi);
        let p2 = p2 + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p1, p2);
        Dd { hi, lo }
    }
}

impl std::ops::Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b * Dd::from_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b * Dd::from_f64(q2);
        let q3 = r.hi / b.hi;
        let (q1, q2) = quick_two_sum(q1, q2);
        Dd { hi: q1, lo: q2 } + Dd::from_f64(q3)
    }
}

fn activate(act: Activation, z: Dd) -> Dd {
    match act {
        Activation::Linear => z,
        Activation::Tanh => z.tanh(),
    }
}

/// Pre-activations and outputs of every layer; `outputs[0]` is the input.
pub(crate) struct Trace {
    pre: Vec<Vec<Dd>>,
    outputs: Vec<Vec<Dd>>,
}

/// Full forward pass in double-double.
pub(crate) fn forward(net: &Network, input: &[f64]) -> Trace {
    let topo = net.topology();
    let sizes = topo.sizes();
    let mut pre = vec![Vec::new()];
    let mut outputs = vec![input.iter().map(|&x| Dd::from_f64(x)).collect::<Vec<_>>()];
    for (l, &act) in topo.activations().iter().enumerate() {
        let (n_in, n_out) = (sizes[l], sizes[l + 1]);
        let w = net.weights(l);
        let src = &outputs[l];
        let z: Vec<Dd> = (0..n_out)
            .map(|j| {
                let mut acc = net.biases(l).map_or(Dd::ZERO, |b| Dd::from_f64(b[j]));
                for i in 0..n_in {
                    acc = acc + Dd::from_f64(w[j * n_in + i]) * src[i];
                }
                acc
            })
            .collect();
        outputs.push(z.iter().map(|&v| activate(act, v)).collect());
        pre.push(z);
    }
    Trace { pre, outputs }
}

/// Which parameter to perturb.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Param {
    /// Transition `l`, destination `j`, source `i`.
    Weight { l: usize, j: usize, i: usize },
    /// Layer `l + 1`, unit `j`.
    Bias { l: usize, j: usize },
}

/// Network output with one parameter shifted by `delta`, reusing the
/// unperturbed trace for every layer upstream of the change.
pub(crate) fn perturbed_output(net: &Network, base: &Trace, param: Param, delta: f64) -> Dd {
    let topo = net.topology();
    let sizes = topo.sizes();
    let acts = topo.activations();
    let (l, j, dz) = match param {
        Param::Weight { l, j, i } => (l, j, Dd::from_f64(delta) * base.outputs[l][i]),
        Param::Bias { l, j } => (l, j, Dd::from_f64(delta)),
    };
    let mut cur = base.outputs[l + 1].clone();
    cur[j] = activate(acts[l], base.pre[l + 1][j] + dz);
    for m in l + 1..acts.len() {
        let (n_in, n_out) = (sizes[m], sizes[m + 1]);
        let w = net.weights(m);
        cur = (0..n_out)
            .map(|k| {
                let mut acc = net.biases(m).map_or(Dd::ZERO, |b| Dd::from_f64(b[k]));
                for i in 0..n_in {
                    acc = acc + Dd::from_f64(w[k * n_in + i]) * cur[i];
                }
                activate(acts[m], acc)
            })
            .collect();
    }
    cur[0]
}

/// Central difference of `½(y - target)²` with respect to `param`.
pub(crate) fn central_difference(
    net: &Network,
    base: &Trace,
    param: Param,
    target: f64,
    step: f64,
) -> f64 {
    let t = Dd::from_f64(target);
    let loss = |y: Dd| {
        let e = y - t;
        e * e * Dd::from_f64(0.5)
    };
    let plus = loss(perturbed_output(net, base, param, step));
    let minus = loss(perturbed_output(net, base, param, -step));
    ((plus - minus) / Dd::from_f64(2.0 * step)).to_f64()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_beats_f64() {
        // (1 + 2^-60) - 1 is lost in f64 but kept here.
        let a = Dd::sum(1.0, 2f64.powi(-60));
        let d = a - Dd::ONE;
        assert_eq!(d.to_f64(), 2f64.powi(-60));
        let third = Dd::ONE / Dd::from_f64(3.0);
        let back = third * Dd::from_f64(3.0) - Dd::ONE;
        assert!(back.to_f64().abs() < 1e-30);
    }

    #[test]
    fn exp_and_tanh_match_f64_and_identities() {
        for x in [-20.0, -3.3, -0.5, -1e-8, 0.0, 1e-8, 0.25, 1.0, 7.5, 30.0] {
            let e = Dd::from_f64(x).exp();
            assert!(
                (e.to_f64() - x.exp()).abs() <= 4.0 * f64::EPSILON * x.exp(),
                "exp {x}"
            );
            let t = Dd::from_f64(x).tanh();
            assert!(
                (t.to_f64() - x.tanh()).abs() <= 4.0 * f64::EPSILON,
                "tanh {x}"
            );
        }
        // exp(a) · exp(-a) = 1 to well beyond double precision.
        let a = Dd::sum(1.3, 1e-20);
        let prod = a.exp() * (-a).exp() - Dd::ONE;
        assert!(prod.to_f64().abs() < 1e-27, "{}", prod.to_f64());
        // Saturated tanh keeps its tiny distance from 1.
        let t = Dd::from_f64(15.0).tanh();
        let gap = (Dd::ONE - t).to_f64();
        let expected = 2.0 * (-30f64).exp() / (1.0 + (-30f64).exp());
        assert!(
            (gap - expected).abs() < 1e-10 * expected,
            "{gap} vs {expected}"
        );
    }
}
