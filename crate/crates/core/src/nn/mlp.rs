use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense ReLU network; the last layer is linear.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    sizes: Vec<usize>,
    /// `weights[l]` is `sizes[l+1] × sizes[l]`, row-major.
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
}

impl MlpParams {
    pub fn seeded<R: Rng>(sizes: &[usize], rng: &mut R) -> Self {
        assert!(sizes.len() >= 2, "an MLP needs input and output sizes");
        let mut weights = Vec::with_capacity(sizes.len() - 1);
        let mut biases = Vec::with_capacity(sizes.len() - 1);
        for w in sizes.windows(2) {
            weights.push((0..w[0] * w[1]).map(|_| rng.random_range(-0.5..=0.5)).collect());
            biases.push((0..w[1]).map(|_| rng.random_range(-0.5..=0.5)).collect());
        }
        MlpParams { sizes: sizes.to_vec(), weights, biases }
    }

    pub fn zeros(sizes: &[usize]) -> Self {
        assert!(sizes.len() >= 2, "an MLP needs input and output sizes");
        MlpParams {
            sizes: sizes.to_vec(),
            weights: sizes.windows(2).map(|w| vec![0.0; w[0] * w[1]]).collect(),
            biases: sizes.windows(2).map(|w| vec![0.0; w[1]]).collect(),
        }
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().expect("non-empty")
    }

    pub fn last_bias_mut(&mut self) -> &mut [f64] {
        self.biases.last_mut().expect("non-empty")
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.sizes[0]);
        let last = self.weights.len() - 1;
        let mut cur = x.to_vec();
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let (inp, out) = (self.sizes[l], self.sizes[l + 1]);
            let mut next = b.clone();
            for (o, nv) in next.iter_mut().enumerate() {
                let row = &w[o * inp..(o + 1) * inp];
                for (wi, xi) in row.iter().zip(&cur) {
                    *nv += wi * xi;
                }
                if l < last && *nv < 0.0 {
                    *nv = 0.0;
                }
            }
            debug_assert_eq!(next.len(), out);
            cur = next;
        }
        cur
    }

    pub fn check_input(&self, len: usize, what: &str) -> Result<()> {
        if len != self.sizes[0] {
            return Err(Error::Shape(format!("{what}: MLP expects {} inputs, got {len}", self.sizes[0])));
        }
        Ok(())
    }
}

/// Square weight matrix applied as `x ↦ xW`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Linear {
    d: usize,
    w: Vec<f64>,
}

impl Linear {
    pub fn seeded<R: Rng>(d: usize, rng: &mut R) -> Self {
        Linear { d, w: (0..d * d).map(|_| rng.random_range(-0.5..=0.5)).collect() }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let d = self.d;
        let mut out = vec![0.0; d];
        for (xr, row) in x.iter().zip(self.w.chunks_exact(d)) {
            for (o, w) in out.iter_mut().zip(row) {
                *o += xr * w;
            }
        }
        out
    }
}
