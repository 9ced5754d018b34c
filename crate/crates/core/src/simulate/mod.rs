//! Ground-truth processes and preprocessing: VAR(1) generation, low-pass
//! and band-pass filters, and prewhitening.

mod filter;
mod prewhiten;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{Partition, TimeSeriesMatrix};

pub use filter::{
    butterworth_bandpass, butterworth_design, filter_apply, filter_row, filtfilt_row, fir_ls_design, DesignedFilter,
    FilterKind, FilterSpec, Sos,
};
pub use prewhiten::{prewhiten, PrewhitenModel, Prewhitened};

/// First-order VAR with diagonal coefficient blocks and unit-variance
/// Gaussian innovations. Rows are generated as x (k), y (l), w (c).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarSpec {
    #[serde(default = "one")]
    pub k: usize,
    #[serde(default = "one")]
    pub l: usize,
    #[serde(default)]
    pub c: usize,
    #[serde(default = "default_phi_x")]
    pub phi_x: f64,
    #[serde(default = "default_phi_y")]
    pub phi_y: f64,
    #[serde(default = "default_phi_w")]
    pub phi_w: f64,
    /// Coefficient of `y_i(t-1)` in `x_i(t)`; zero under the null.
    #[serde(default)]
    pub phi_xy: f64,
    #[serde(default = "default_length")]
    pub length: usize,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
}

fn one() -> usize {
    1
}
fn default_phi_x() -> f64 {
    0.3
}
fn default_phi_y() -> f64 {
    -0.8
}
fn default_phi_w() -> f64 {
    0.4
}
fn default_length() -> usize {
    512
}
fn default_burn_in() -> usize {
    1000
}

impl Default for VarSpec {
    fn default() -> Self {
        Self {
            k: 1,
            l: 1,
            c: 0,
            phi_x: default_phi_x(),
            phi_y: default_phi_y(),
            phi_w: default_phi_w(),
            phi_xy: 0.0,
            length: default_length(),
            burn_in: default_burn_in(),
        }
    }
}

impl VarSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("phi_x", self.phi_x), ("phi_y", self.phi_y), ("phi_w", self.phi_w)] {
            if !(v.abs() < 1.0) {
                return Err(Error::Config(format!("{name} = {v} is not stationary")));
            }
        }
        if !self.phi_xy.is_finite() {
            return Err(Error::Config("phi_xy must be finite".into()));
        }
        if self.k == 0 || self.l == 0 {
            return Err(Error::Config("k and l must be at least 1".into()));
        }
        if self.length < 2 {
            return Err(Error::Config("length must be at least 2".into()));
        }
        Ok(())
    }

    pub fn partition(&self) -> Partition {
        Partition::contiguous(self.k, self.l, self.c)
    }
}

/// Simulates the VAR(1) process of `spec`, discarding the burn-in.
pub fn var_simulate(spec: &VarSpec, seed: u64) -> Result<TimeSeriesMatrix> {
    var_simulate_with(spec, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn var_simulate_with<R: Rng + ?Sized>(spec: &VarSpec, rng: &mut R) -> Result<TimeSeriesMatrix> {
    spec.validate()?;
    let (k, l, c) = (spec.k, spec.l, spec.c);
    let m = k + l + c;
    let phi: Vec<f64> = std::iter::repeat_n(spec.phi_x, k)
        .chain(std::iter::repeat_n(spec.phi_y, l))
        .chain(std::iter::repeat_n(spec.phi_w, c))
        .collect();
    let total = spec.burn_in + spec.length;
    let mut rows = vec![Vec::with_capacity(spec.length); m];
    let mut state = vec![0.0; m];
    for step in 0..total {
        let prev = state.clone();
        for i in 0..m {
            let a: f64 = StandardNormal.sample(rng);
            state[i] = phi[i] * prev[i] + a;
        }
        if spec.phi_xy != 0.0 {
            for i in 0..k.min(l) {
                state[i] += spec.phi_xy * prev[k + i];
            }
        }
        if step >= spec.burn_in {
            for (row, v) in rows.iter_mut().zip(&state) {
                row.push(*v);
            }
        }
    }
    TimeSeriesMatrix::from_rows(rows)
}
