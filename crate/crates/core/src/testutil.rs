use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn white(n: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    (0..n).map(|_| StandardNormal.sample(&mut r)).collect()
}

/// ARMA series `x(t) = sum ar_i x(t-i) + e(t) + sum ma_i e(t-i)` after a
/// 500-sample burn-in.
pub fn arma(ar: &[f64], ma: &[f64], n: usize, seed: u64) -> Vec<f64> {
    let burn = 500;
    let e = white(n + burn, seed);
    let mut x = vec![0.0; n + burn];
    for t in 0..n + burn {
        let mut v = e[t];
        for (i, a) in ar.iter().enumerate() {
            if t > i {
                v += a * x[t - i - 1];
            }
        }
        for (i, m) in ma.iter().enumerate() {
            if t > i {
                v += m * e[t - i - 1];
            }
        }
        x[t] = v;
    }
    x.split_off(burn)
}
