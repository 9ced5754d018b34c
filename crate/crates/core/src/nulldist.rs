//! Null distributions: the Monte-Carlo Λ* law and the verdict record shared by
//! every test.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default Monte-Carlo sample count for Λ* nulls.
pub const DEFAULT_NULL_SAMPLES: usize = 100_000;
/// Smallest sample count accepted by [`LambdaStarNull::build`].
pub const MIN_NULL_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NullFamily {
    #[serde(alias = "t")]
    StudentT,
    F,
    #[serde(alias = "chi2")]
    ChiSquare,
    LambdaStar,
}

impl NullFamily {
    pub const ALL: [NullFamily; 4] =
        [NullFamily::StudentT, NullFamily::F, NullFamily::ChiSquare, NullFamily::LambdaStar];

    pub fn label(self) -> &'static str {
        match self {
            NullFamily::StudentT => "t",
            NullFamily::F => "f",
            NullFamily::ChiSquare => "chi2",
            NullFamily::LambdaStar => "lambda_star",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "t" | "student_t" => Ok(NullFamily::StudentT),
            "f" => Ok(NullFamily::F),
            "chi2" | "chi_square" | "chisquare" => Ok(NullFamily::ChiSquare),
            "lambda_star" | "lambda" | "lambdastar" => Ok(NullFamily::LambdaStar),
            other => Err(Error::Config(format!("unknown null family '{other}'"))),
        }
    }
}

impl std::fmt::Display for NullFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Outcome of one test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestVerdict {
    pub statistic: f64,
    pub p_value: f64,
    pub dof_used: Vec<f64>,
    pub null_family: NullFamily,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl TestVerdict {
    pub fn new(null_family: NullFamily, statistic: f64, p_value: f64, dof_used: Vec<f64>) -> Self {
        Self { statistic, p_value: p_value.clamp(0.0, 1.0), dof_used, null_family, warnings: Vec::new() }
    }
}

fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // (0, 1]
    1.0 - rng.random::<f64>()
}

/// Gamma(shape, 1) draw. Marsaglia-Tsang squeeze for `shape >= 1`, the
/// `U^(1/a)` boost below that, and `Z^2/2` for shape one half.
pub fn gamma_sample<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    if shape == 0.5 {
        let z: f64 = StandardNormal.sample(rng);
        return 0.5 * z * z;
    }
    if shape < 1.0 {
        let g = gamma_sample(shape + 1.0, rng);
        return g * open_unit(rng).powf(1.0 / shape);
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x: f64 = StandardNormal.sample(rng);
        let v = 1.0 + c * x;
        if v <= 0.0 {
            continue;
        }
        let v = v * v * v;
        let u = open_unit(rng);
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 || u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

/// Beta(a, b) draw as `G_a / (G_a + G_b)`.
pub fn beta_sample<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    let ga = gamma_sample(a, rng);
    let gb = gamma_sample(b, rng);
    ga / (ga + gb)
}

/// Monte-Carlo law of a product of independent `Beta(n_i/2, 1/2)` variates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaStarNull {
    pub dof: Vec<f64>,
    pub seed: u64,
    samples: Vec<f64>,
}

impl LambdaStarNull {
    pub fn build(dof: &[f64], samples: usize, seed: u64) -> Result<Self> {
        check_dof(dof)?;
        if samples < MIN_NULL_SAMPLES {
            return Err(Error::Config(format!("Λ* null needs at least {MIN_NULL_SAMPLES} samples, got {samples}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out: Vec<f64> = (0..samples).map(|_| product_draw(dof, &mut rng)).collect();
        out.sort_by(f64::total_cmp);
        Ok(Self { dof: dof.to_vec(), seed, samples: out })
    }

    /// Sorted Monte-Carlo samples.
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Left-tail p-value `(1 + #{samples <= statistic}) / (M + 1)`.
    pub fn pvalue(&self, statistic: f64) -> f64 {
        let below = self.samples.partition_point(|&s| s <= statistic);
        (1 + below) as f64 / (self.samples.len() + 1) as f64
    }

    /// Empirical CDF at `x`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.samples.partition_point(|&s| s <= x) as f64 / self.samples.len() as f64
    }
}

fn check_dof(dof: &[f64]) -> Result<()> {
    if dof.is_empty() {
        return Err(Error::InvalidInput("Λ* null needs at least one factor".into()));
    }
    let bad: Vec<usize> =
        dof.iter().enumerate().filter(|(_, &n)| !(n > 0.0 && n.is_finite())).map(|(i, _)| i).collect();
    if !bad.is_empty() {
        return Err(Error::InsufficientEffectiveSamples {
            terms: bad.iter().map(|i| format!("factor {}", i + 1)).collect(),
            dof: bad.iter().map(|&i| dof[i]).collect(),
        });
    }
    Ok(())
}

fn product_draw<R: Rng + ?Sized>(dof: &[f64], rng: &mut R) -> f64 {
    dof.iter().map(|&n| beta_sample(0.5 * n, 0.5, rng)).product()
}

/// Λ* p-value without storing the null: counts draws at or below the
/// statistic. Identical in distribution to building the null and calling
/// [`LambdaStarNull::pvalue`], but `O(M)` memory-free.
pub fn lambda_star_pvalue(dof: &[f64], statistic: f64, samples: usize, seed: u64) -> Result<f64> {
    check_dof(dof)?;
    if samples < MIN_NULL_SAMPLES {
        return Err(Error::Config(format!("Λ* null needs at least {MIN_NULL_SAMPLES} samples, got {samples}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let below = (0..samples).filter(|_| product_draw(dof, &mut rng) <= statistic).count();
    Ok((1 + below) as f64 / (samples + 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::{beta_cdf, f_sf, ks_uniform};
    use approx::assert_abs_diff_eq;

    fn moments(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        (m, xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0))
    }

    #[test]
    fn beta_sample_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d: Vec<f64> = (0..100_000).map(|_| beta_sample(5.0, 0.5, &mut rng)).collect();
        assert_abs_diff_eq!(moments(&d).0, 5.0 / 5.5, epsilon = 0.005);

        let h: Vec<f64> = (0..100_000).map(|_| beta_sample(0.5, 0.5, &mut rng)).collect();
        assert_abs_diff_eq!(moments(&h).1, 0.125, epsilon = 0.005);

        let u: Vec<f64> = (0..100_000).map(|_| beta_sample(1.0, 1.0, &mut rng)).collect();
        assert!(ks_uniform(&u).0 < 0.006);
    }

    #[test]
    fn gamma_sample_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for shape in [0.3, 0.5, 1.0, 2.5, 40.0] {
            let g: Vec<f64> = (0..50_000).map(|_| gamma_sample(shape, &mut rng)).collect();
            let (m, v) = moments(&g);
            assert!((m - shape).abs() < 4.0 * (shape / 50_000.0f64).sqrt(), "shape {shape}: mean {m}");
            assert!((v - shape).abs() < 0.05 * shape + 0.01, "shape {shape}: var {v}");
        }
    }

    #[test]
    fn single_factor_matches_beta_cdf() {
        let m = 100_000;
        let null = LambdaStarNull::build(&[10.0], m, 3).unwrap();
        let mut sup: f64 = 0.0;
        for i in 1..1000 {
            let x = 0.4 + 0.6 * i as f64 / 1000.0;
            sup = sup.max((null.cdf(x) - beta_cdf(x, 5.0, 0.5).unwrap()).abs());
        }
        assert!(sup < 1.36 / (m as f64).sqrt(), "sup distance {sup}");
    }

    #[test]
    fn two_factor_mean() {
        let m = 100_000;
        let null = LambdaStarNull::build(&[10.0, 10.0], m, 4).unwrap();
        let (mean, var) = moments(null.samples());
        let target = (10.0f64 / 11.0).powi(2);
        assert!((mean - target).abs() < 3.0 * (var / m as f64).sqrt());
        assert!(null.samples().iter().all(|&s| s > 0.0 && s <= 1.0));
        assert!(null.samples().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn pvalue_edges_and_errors() {
        let null = LambdaStarNull::build(&[20.0, 7.5], 10_000, 5).unwrap();
        assert!(null.pvalue(1.0) > 0.999);
        assert_abs_diff_eq!(null.pvalue(0.0), 1.0 / 10_001.0);
        assert!(matches!(
            LambdaStarNull::build(&[5.0, -1.0], 10_000, 1),
            Err(Error::InsufficientEffectiveSamples { .. })
        ));
        assert!(LambdaStarNull::build(&[5.0], 100, 1).is_err());
    }

    #[test]
    fn rebuild_is_bit_identical() {
        let a = LambdaStarNull::build(&[12.3, 40.0], 10_000, 77).unwrap();
        let b = LambdaStarNull::build(&[12.3, 40.0], 10_000, 77).unwrap();
        assert_eq!(a.samples(), b.samples());
    }

    #[test]
    fn streaming_pvalue_matches_built_null() {
        let dof = [30.0, 11.0, 4.5];
        let null = LambdaStarNull::build(&dof, 20_000, 9).unwrap();
        for s in [0.2, 0.5, 0.7, 0.9] {
            assert_eq!(null.pvalue(s), lambda_star_pvalue(&dof, s, 20_000, 9).unwrap());
        }
    }

    #[test]
    fn pvalues_are_uniform_under_the_null() {
        let dof = [15.0, 40.0];
        let null = LambdaStarNull::build(&dof, 10_000, 10).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let ps: Vec<f64> = (0..10_000).map(|_| null.pvalue(product_draw(&dof, &mut rng))).collect();
        assert!(ks_uniform(&ps).0 < 0.02);
    }

    #[test]
    fn pvalue_is_monotone() {
        let null = LambdaStarNull::build(&[9.0, 3.0], 10_000, 12).unwrap();
        let mut prev = 0.0;
        for i in 0..=1000 {
            let p = null.pvalue(i as f64 / 1000.0);
            assert!(p >= prev);
            prev = p;
        }
    }

    #[test]
    fn single_factor_agrees_with_modified_f() {
        let n = 37.5;
        let m = 100_000;
        let null = LambdaStarNull::build(&[n], m, 13).unwrap();
        let dkw = 1.36 / (m as f64).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..1000 {
            let r2: f64 = 0.3 * rng.random::<f64>();
            let f = n * r2 / (1.0 - r2);
            let pf = f_sf(f, 1.0, n).unwrap();
            assert!((null.pvalue(1.0 - r2) - pf).abs() < 2.0 * dkw);
        }
    }
}
