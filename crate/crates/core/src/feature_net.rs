//! Per-feature shape network: one hidden layer, two logistic units, scalar in and out.
//!
//! `f(x) = w2[0]·σ(w1[0]·x + b1[0]) + w2[1]·σ(w1[1]·x + b1[1]) + b2`
//!
//! Besides the value, the module exposes the input slope `f'(x)` and the
//! parameter gradients of both `f` and `f'`. The slope gradient is what the
//! monotonicity penalties differentiate through.

use rand::Rng;
use serde::{Deserialize, Serialize};

/// Number of trainable scalars in one feature network.
pub const PARAMS_PER_NET: usize = 7;

/// Hidden units per feature network.
pub const HIDDEN_UNITS: usize = 2;

/// Numerically stable logistic function.
#[inline]
pub fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Parameters of a single feature network.
///
/// Flat layout used by [`FeatureNetParams::to_array`] and the gradient
/// routines: `[w1[0], w1[1], b1[0], b1[1], w2[0], w2[1], b2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureNetParams {
    pub w1: [f64; HIDDEN_UNITS],
    pub b1: [f64; HIDDEN_UNITS],
    pub w2: [f64; HIDDEN_UNITS],
    pub b2: f64,
}

impl Default for FeatureNetParams {
    fn default() -> Self {
        Self::zeros()
    }
}

impl FeatureNetParams {
    pub const fn zeros() -> Self {
        Self {
            w1: [0.0; HIDDEN_UNITS],
            b1: [0.0; HIDDEN_UNITS],
            w2: [0.0; HIDDEN_UNITS],
            b2: 0.0,
        }
    }

    /// Weights uniform on [-1, 1], biases zero.
    pub fn init<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut p = Self::zeros();
        for k in 0..HIDDEN_UNITS {
            p.w1[k] = rng.random_range(-1.0..=1.0);
            p.w2[k] = rng.random_range(-1.0..=1.0);
        }
        p
    }

    pub fn to_array(&self) -> [f64; PARAMS_PER_NET] {
        [
            self.w1[0], self.w1[1], self.b1[0], self.b1[1], self.w2[0], self.w2[1], self.b2,
        ]
    }

    pub fn from_array(a: &[f64; PARAMS_PER_NET]) -> Self {
        Self {
            w1: [a[0], a[1]],
            b1: [a[2], a[3]],
            w2: [a[4], a[5]],
            b2: a[6],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    /// `f(x)`.
    pub fn forward(&self, x: f64) -> f64 {
        let mut out = self.b2;
        for k in 0..HIDDEN_UNITS {
            out += self.w2[k] * logistic(self.w1[k] * x + self.b1[k]);
        }
        out
    }

    /// `f'(x) = Σ w2·w1·σ'(z)`.
    pub fn input_derivative(&self, x: f64) -> f64 {
        let mut out = 0.0;
        for k in 0..HIDDEN_UNITS {
            let s = logistic(self.w1[k] * x + self.b1[k]);
            out += self.w2[k] * self.w1[k] * s * (1.0 - s);
        }
        out
    }

    /// Gradient of `f(x)` with respect to the seven parameters.
    pub fn param_gradient(&self, x: f64) -> [f64; PARAMS_PER_NET] {
        let mut g = [0.0; PARAMS_PER_NET];
        for k in 0..HIDDEN_UNITS {
            let s = logistic(self.w1[k] * x + self.b1[k]);
            let ds = s * (1.0 - s);
            g[k] = self.w2[k] * ds * x;
            g[2 + k] = self.w2[k] * ds;
            g[4 + k] = s;
        }
        g[6] = 1.0;
        g
    }

    /// Gradient of `f'(x)` with respect to the seven parameters. The `b2`
    /// component is always zero.
    pub fn mixed_gradient(&self, x: f64) -> [f64; PARAMS_PER_NET] {
        let mut g = [0.0; PARAMS_PER_NET];
        for k in 0..HIDDEN_UNITS {
            let s = logistic(self.w1[k] * x + self.b1[k]);
            let ds = s * (1.0 - s);
            let dds = ds * (1.0 - 2.0 * s);
            g[k] = self.w2[k] * (ds + self.w1[k] * x * dds);
            g[2 + k] = self.w2[k] * self.w1[k] * dds;
            g[4 + k] = self.w1[k] * ds;
        }
        g
    }

    /// Value, slope and both parameter gradients in one pass.
    pub(crate) fn value_and_param_gradient(&self, x: f64) -> (f64, [f64; PARAMS_PER_NET]) {
        let mut g = [0.0; PARAMS_PER_NET];
        let mut out = self.b2;
        for k in 0..HIDDEN_UNITS {
            let s = logistic(self.w1[k] * x + self.b1[k]);
            let ds = s * (1.0 - s);
            out += self.w2[k] * s;
            g[k] = self.w2[k] * ds * x;
            g[2 + k] = self.w2[k] * ds;
            g[4 + k] = s;
        }
        g[6] = 1.0;
        (out, g)
    }

    /// Upper bound on `|f(x)|` over all x.
    pub fn value_bound(&self) -> f64 {
        self.w2[0].abs() + self.w2[1].abs() + self.b2.abs()
    }

    /// Upper bound on `|f'(x)|` over all x.
    pub fn slope_bound(&self) -> f64 {
        (self.w2[0] * self.w1[0]).abs() / 4.0 + (self.w2[1] * self.w1[1]).abs() / 4.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    // Straight-line evaluator used as an independent oracle.
    fn oracle_forward(a: &[f64; 7], x: f64) -> f64 {
        let s0 = 1.0 / (1.0 + (-(a[0] * x + a[2])).exp());
        let s1 = 1.0 / (1.0 + (-(a[1] * x + a[3])).exp());
        a[4] * s0 + a[5] * s1 + a[6]
    }

    fn oracle_slope(a: &[f64; 7], x: f64) -> f64 {
        let h = 1e-5;
        (oracle_forward(a, x + h) - oracle_forward(a, x - h)) / (2.0 * h)
    }

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-3)
    }

    fn unit(w1: f64, w2: f64) -> FeatureNetParams {
        FeatureNetParams {
            w1: [w1, 0.0],
            b1: [0.0, 0.0],
            w2: [w2, 0.0],
            b2: 0.0,
        }
    }

    #[test]
    fn zero_net_is_zero() {
        assert_eq!(FeatureNetParams::zeros().forward(1.7), 0.0);
    }

    #[test]
    fn constant_units_sum_to_one() {
        let p = FeatureNetParams {
            w2: [1.0, 1.0],
            ..FeatureNetParams::zeros()
        };
        for x in [-3.0, 0.0, 12.5] {
            assert_eq!(p.forward(x), 1.0);
            assert_eq!(p.input_derivative(x), 0.0);
        }
    }

    #[test]
    fn single_unit_at_origin() {
        let p = unit(1.0, 1.0);
        assert_eq!(p.forward(0.0), 0.5);
        assert_eq!(p.input_derivative(0.0), 0.25);
    }

    #[test]
    fn forward_matches_straight_line_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = FeatureNetParams::init(&mut rng);
        let a = FeatureNetParams {
            b1: [0.3, -0.7],
            b2: 0.2,
            ..p
        }
        .to_array();
        let q = FeatureNetParams::from_array(&a);
        for i in 0..11 {
            let x = -2.5 + 0.5 * i as f64;
            assert!((q.forward(x) - oracle_forward(&a, x)).abs() < 1e-14);
        }
    }

    #[test]
    fn slope_matches_central_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = FeatureNetParams::init(&mut rng);
        let a = p.to_array();
        assert!(rel_err(p.input_derivative(0.3), oracle_slope(&a, 0.3)) < 1e-6);
    }

    #[test]
    fn bias_gradients_are_fixed() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = FeatureNetParams::init(&mut rng);
        for x in [-1.0, 0.2, 4.0] {
            let g = p.param_gradient(x);
            assert_eq!(g[6], 1.0);
            assert_eq!(g[4], logistic(p.w1[0] * x + p.b1[0]));
            assert_eq!(g[5], logistic(p.w1[1] * x + p.b1[1]));
            assert_eq!(p.mixed_gradient(x)[6], 0.0);
        }
    }

    #[test]
    fn zero_inner_weights_kill_output_weight_slope_gradient() {
        let p = FeatureNetParams {
            w1: [0.0, 0.0],
            b1: [0.4, -1.0],
            w2: [0.7, -0.3],
            b2: 1.0,
        };
        let g = p.mixed_gradient(0.9);
        assert_eq!(g[4], 0.0);
        assert_eq!(g[5], 0.0);
    }

    fn params_strategy() -> impl Strategy<Value = [f64; 7]> {
        prop::array::uniform7(-2.0f64..2.0)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn slope_is_finite_difference_of_value(a in params_strategy(), x in -3.0f64..3.0) {
            let p = FeatureNetParams::from_array(&a);
            let h = 1e-5;
            let fd = (p.forward(x + h) - p.forward(x - h)) / (2.0 * h);
            prop_assert!(rel_err(p.input_derivative(x), fd) < 1e-5);
        }

        #[test]
        fn param_gradients_match_finite_differences(a in params_strategy(), x in -3.0f64..3.0) {
            let p = FeatureNetParams::from_array(&a);
            let g = p.param_gradient(x);
            let gm = p.mixed_gradient(x);
            let h = 1e-6;
            for i in 0..PARAMS_PER_NET {
                let mut up = a;
                let mut dn = a;
                up[i] += h;
                dn[i] -= h;
                let pu = FeatureNetParams::from_array(&up);
                let pd = FeatureNetParams::from_array(&dn);
                let fd = (pu.forward(x) - pd.forward(x)) / (2.0 * h);
                let fdm = (pu.input_derivative(x) - pd.input_derivative(x)) / (2.0 * h);
                prop_assert!(rel_err(g[i], fd) < 1e-5, "param {} {} vs {}", i, g[i], fd);
                prop_assert!(rel_err(gm[i], fdm) < 1e-5, "mixed {} {} vs {}", i, gm[i], fdm);
            }
        }

        #[test]
        fn value_and_slope_are_bounded(a in params_strategy(), x in -50.0f64..50.0) {
            let p = FeatureNetParams::from_array(&a);
            prop_assert!(p.forward(x).abs() <= p.value_bound() + 1e-12);
            prop_assert!(p.input_derivative(x).abs() <= p.slope_bound() + 1e-12);
        }
    }
}
