use approx::assert_abs_diff_eq;
use ndarray::Array2;
use proptest::prelude::*;

use super::*;
use crate::linreg::partial_correlation;
use crate::series::{Partition, TimeSeriesMatrix};
use crate::special::{chi2_sf, f_sf, t_two_sided};
use crate::testutil::{arma, white};

fn opts() -> MeasureOptions {
    MeasureOptions { null_samples: 10_000, ..MeasureOptions::default() }
}

fn random_matrix(m: usize, t: usize, seed: u64) -> TimeSeriesMatrix {
    let rows: Vec<Vec<f64>> = (0..m).map(|i| arma(&[0.2 * i as f64 - 0.3], &[], t, seed * 100 + i as u64)).collect();
    TimeSeriesMatrix::from_rows(rows).unwrap()
}

#[test]
fn zero_correlation_gives_p_one() {
    let x: Vec<f64> = (0..16).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    let y: Vec<f64> = (0..16).map(|i| if (i / 2) % 2 == 0 { 1.0 } else { -1.0 }).collect();
    let r = pearson_test_modified(&x, &y, Tails::Two, &opts()).unwrap();
    assert_abs_diff_eq!(r.value, 0.0, epsilon = 1e-15);
    let v = &r.verdicts[&NullFamily::StudentT];
    assert_abs_diff_eq!(v.statistic, 0.0, epsilon = 1e-12);
    assert_abs_diff_eq!(v.p_value, 1.0, epsilon = 1e-12);
}

#[test]
fn iid_pairs_match_the_classical_t_test() {
    let t = 512;
    let mut diff = 0.0;
    let trials = 300;
    for s in 0..trials {
        let x = white(t, 2 * s);
        let y = white(t, 2 * s + 1);
        let res = pearson_test_modified(&x, &y, Tails::Two, &opts()).unwrap();
        let r = res.value;
        let nu = (t - 2) as f64;
        let classical = t_two_sided(r * (nu / (1.0 - r * r)).sqrt(), nu).unwrap();
        diff += (res.p_value(NullFamily::StudentT).unwrap() - classical).abs();
    }
    assert!(diff / (trials as f64) < 0.01, "mean |dp| = {}", diff / trials as f64);
}

#[test]
fn squared_t_is_the_f_test() {
    for s in 0..20 {
        let x = arma(&[0.5], &[], 200, s);
        let y: Vec<f64> = arma(&[0.2], &[], 200, s + 50).iter().zip(&x).map(|(a, b)| a + 0.1 * b).collect();
        let w = Array2::from_shape_vec((1, 200), white(200, s + 99)).unwrap();
        let r = partial_corr_test_modified(&x, &y, &w, Tails::Two, &opts()).unwrap();
        let pt = r.p_value(NullFamily::StudentT).unwrap();
        let pf = r.p_value(NullFamily::F).unwrap();
        assert_abs_diff_eq!(pt, pf, epsilon = 1e-9);
        assert_eq!(r.terms[0].conditioning_dim, 1);
    }
}

#[test]
fn one_sided_tails_split_the_two_sided_p() {
    let x = white(100, 1);
    let y: Vec<f64> = white(100, 2).iter().zip(&x).map(|(a, b)| a + 0.2 * b).collect();
    let two = pearson_test_modified(&x, &y, Tails::Two, &opts()).unwrap();
    let up = pearson_test_modified(&x, &y, Tails::Upper, &opts()).unwrap();
    let lo = pearson_test_modified(&x, &y, Tails::Lower, &opts()).unwrap();
    let (p2, pu, pl) = (
        two.p_value(NullFamily::StudentT).unwrap(),
        up.p_value(NullFamily::StudentT).unwrap(),
        lo.p_value(NullFamily::StudentT).unwrap(),
    );
    assert_abs_diff_eq!(pu + pl, 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(2.0 * pu.min(pl), p2, epsilon = 1e-12);
}

#[test]
fn empty_conditioning_reduces_to_pearson() {
    let x = arma(&[0.3], &[], 256, 3);
    let y = arma(&[-0.8], &[], 256, 4);
    let a = pearson_test_modified(&x, &y, Tails::Two, &opts()).unwrap();
    let b = partial_corr_test_modified(&x, &y, &Array2::zeros((0, 256)), Tails::Two, &opts()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn exhausted_dof_is_an_error() {
    let t = 64;
    let x = arma(&[0.98], &[], t, 7);
    let y = arma(&[0.98], &[], t, 8);
    let w_rows: Vec<f64> = (0..60).flat_map(|i| white(t, 100 + i)).collect();
    let w = Array2::from_shape_vec((60, t), w_rows).unwrap();
    let err = partial_corr_test_modified(&x, &y, &w, Tails::Two, &opts()).unwrap_err();
    assert!(matches!(err, crate::Error::InsufficientEffectiveSamples { .. }), "{err:?}");
}

#[test]
fn bivariate_mi_is_a_function_of_r() {
    let m = random_matrix(2, 300, 1);
    let r = partial_correlation(m.row(0), m.row(1), &Array2::zeros((0, 300))).unwrap();
    let res = mi_gaussian(&m, &Partition::contiguous(1, 1, 0), &opts()).unwrap();
    assert_abs_diff_eq!(res.value, -0.5 * (1.0 - r * r).ln(), epsilon = 1e-12);
    assert_abs_diff_eq!(-0.5 * (1.0f64 - 0.25).ln(), 0.143_841_036_225_890_2, epsilon = 1e-15);
    assert_eq!(res.terms.len(), 1);
    assert!(res.verdicts.contains_key(&NullFamily::F));
}

#[test]
fn mi_tests_agree_without_autocorrelation() {
    let t = 512;
    let m = TimeSeriesMatrix::from_rows(vec![white(t, 1), white(t, 2)]).unwrap();
    let res = mi_gaussian(&m, &Partition::contiguous(1, 1, 0), &opts()).unwrap();
    let pl = res.p_value(NullFamily::LambdaStar).unwrap();
    let pc = res.p_value(NullFamily::ChiSquare).unwrap();
    let pf = res.p_value(NullFamily::F).unwrap();
    assert!((pl - pf).abs() < 0.05 && (pc - pf).abs() < 0.01, "{pl} {pc} {pf}");
}

#[test]
fn mi_chain_matches_direct_form() {
    for seed in 0..20 {
        let m = random_matrix(7, 120, seed);
        let res = mi_gaussian(&m, &Partition::contiguous(2, 3, 2), &opts()).unwrap();
        assert_eq!(res.terms.len(), 6);
        let direct = res.direct_value.unwrap();
        let prod: f64 = res.terms.iter().map(|t| 1.0 - t.partial_corr.powi(2)).product();
        assert_abs_diff_eq!((-2.0 * direct).exp(), prod, epsilon = 1e-10);
        assert_abs_diff_eq!(res.value, direct, epsilon = 1e-10);
        let dims: Vec<usize> = res.terms.iter().map(|t| t.conditioning_dim).collect();
        assert_eq!(dims, vec![2, 3, 4, 3, 4, 5]);
    }
}

#[test]
fn mi_chain_is_order_invariant() {
    let m = random_matrix(6, 150, 9);
    let a = mi_gaussian(&m, &Partition::new(vec![0, 1], vec![2, 3, 4], vec![5]), &opts()).unwrap();
    let b = mi_gaussian(&m, &Partition::new(vec![0, 1], vec![4, 2, 3], vec![5]), &opts()).unwrap();
    assert_abs_diff_eq!(a.value, b.value, epsilon = 1e-10);
    assert_ne!(a.terms[0].partial_corr, b.terms[0].partial_corr);
}

#[test]
fn conditional_mi_with_empty_w_is_mi() {
    let m = random_matrix(3, 200, 4);
    let a = mi_gaussian(&m, &Partition::new(vec![0], vec![1, 2], vec![]), &opts()).unwrap();
    let sub = m.select_rows(&[0, 1, 2]).unwrap();
    let b = mi_gaussian(&sub, &Partition::contiguous(1, 2, 0), &opts()).unwrap();
    assert_abs_diff_eq!(a.value, b.value, epsilon = 1e-12);
}

#[test]
fn gc_single_term_and_duality() {
    let m = random_matrix(2, 400, 5);
    let res = granger_causality(&m, &Partition::contiguous(1, 1, 0), 2, 1, &opts()).unwrap();
    assert_eq!(res.terms.len(), 1);
    let r = res.terms[0].partial_corr;
    assert_abs_diff_eq!(res.value, -(1.0 - r * r).ln(), epsilon = 1e-12);
    assert_abs_diff_eq!(res.value, res.direct_value.unwrap(), epsilon = 1e-10);
    assert_eq!(res.n_obs, 398);
    assert_eq!(res.terms[0].conditioning_dim, 2);

    for seed in 0..20 {
        let m = random_matrix(5, 150, 10 + seed);
        let res = granger_causality(&m, &Partition::contiguous(2, 2, 1), 2, 3, &opts()).unwrap();
        assert_eq!(res.terms.len(), 12);
        assert_abs_diff_eq!(res.value, res.direct_value.unwrap(), epsilon = 1e-10);
        // (g, h, j) = (2, 2, 3): (g-1) + kp + c + (h-1)q + (j-1)
        assert_eq!(res.terms[11].indices, vec![2, 2, 3]);
        assert_eq!(res.terms[11].conditioning_dim, 1 + 4 + 1 + 3 + 2);
        assert!(!res.verdicts.contains_key(&NullFamily::F));
    }
}

#[test]
fn gc_is_twice_the_conditional_mi_on_the_lag() {
    let t = 300;
    let p = 3;
    let m = random_matrix(2, t, 6);
    let gc = granger_causality(&m, &Partition::contiguous(1, 1, 0), p, 1, &opts()).unwrap();
    let x = m.row(0);
    let y = m.row(1);
    let mut rows = vec![x[p..].to_vec(), y[p - 1..t - 1].to_vec()];
    for u in 1..=p {
        rows.push(x[p - u..t - u].to_vec());
    }
    let aligned = TimeSeriesMatrix::from_rows(rows).unwrap();
    let cmi = mi_gaussian(&aligned, &Partition::contiguous(1, 1, p), &opts()).unwrap();
    assert_abs_diff_eq!(gc.value, 2.0 * cmi.value, epsilon = 1e-10);
}

#[test]
fn classical_formulas() {
    let dims = TestDims { n_obs: 512, k: 1, l: 1, c: 0, p: 0, q: 0 };
    let chi = classical_test(MeasureKind::MutualInformation, NullFamily::ChiSquare, 0.01, &dims).unwrap();
    assert_abs_diff_eq!(chi.statistic, 10.24, epsilon = 1e-12);
    assert_abs_diff_eq!(chi.p_value, chi2_sf(10.24, 1.0).unwrap(), epsilon = 1e-15);

    let g = TestDims { n_obs: 500, k: 1, l: 2, c: 1, p: 3, q: 4 };
    let f = classical_test(MeasureKind::GrangerCausality, NullFamily::F, 0.05, &g).unwrap();
    let expected = (500.0 - 13.0) / 8.0 * (0.05f64.exp() - 1.0);
    assert_abs_diff_eq!(f.statistic, expected, epsilon = 1e-12);
    assert_abs_diff_eq!(f.p_value, f_sf(expected, 8.0, 487.0).unwrap(), epsilon = 1e-15);
    let c2 = classical_test(MeasureKind::GrangerCausality, NullFamily::ChiSquare, 0.05, &g).unwrap();
    assert_eq!(c2.dof_used, vec![8.0]);

    let multi = TestDims { k: 2, ..g };
    assert!(classical_test(MeasureKind::GrangerCausality, NullFamily::F, 0.05, &multi).is_err());
    assert!(classical_test(MeasureKind::MutualInformation, NullFamily::LambdaStar, 0.1, &dims).is_err());
}

#[test]
fn f_and_chi2_converge_for_large_t() {
    let t = 1_000_000;
    let dims = TestDims { n_obs: t, k: 1, l: 3, c: 2, p: 0, q: 0 };
    for stat in [0.5, 2.0, 5.0, 9.0, 14.0] {
        // MI value giving the chi-square statistic `stat`
        let mi = stat / (2.0 * t as f64);
        let pc = classical_test(MeasureKind::MutualInformation, NullFamily::ChiSquare, mi, &dims).unwrap();
        let pf = classical_test(MeasureKind::MutualInformation, NullFamily::F, mi, &dims).unwrap();
        assert!((pc.p_value - pf.p_value).abs() < 0.005);
    }
}

#[test]
fn ais_on_white_noise_and_ar1() {
    let w = white(10_000, 1);
    assert!(active_information_storage(&w, 5).unwrap() < 0.002);
    assert_eq!(ais_embedding_select(&w, 10, 0.05).unwrap(), 0);

    let hits =
        (0..50).filter(|&s| ais_embedding_select(&arma(&[0.3], &[], 10_000, 500 + s), 10, 0.05).unwrap() == 1).count();
    assert!(hits >= 45, "order 1 selected in {hits} of 50 trials");
}

#[test]
fn ais_increments_telescope() {
    let x = arma(&[0.5, 0.2], &[], 2000, 3);
    let alpha = crate::linreg::partial_autocorrelation(&x, 6).unwrap();
    let d = ais_increments(&x, 6).unwrap();
    for u in 0..6 {
        assert_abs_diff_eq!(d[u], -0.5 * (1.0 - alpha[u] * alpha[u]).ln(), epsilon = 1e-12);
    }
    assert_abs_diff_eq!(d.iter().sum::<f64>(), active_information_storage(&x, 6).unwrap(), epsilon = 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn measures_are_nonnegative_and_affine_invariant(
        seed in 0u64..10_000,
        scales in proptest::collection::vec(0.1f64..10.0, 4),
        shifts in proptest::collection::vec(-100.0f64..100.0, 4),
    ) {
        let m = random_matrix(4, 100, seed);
        let part = Partition::contiguous(1, 2, 1);
        let cheap = MeasureOptions { tests: vec![NullFamily::ChiSquare], ..opts() };
        let a = mi_gaussian(&m, &part, &cheap).unwrap();
        let g = granger_causality(&m, &part, 2, 2, &cheap).unwrap();
        prop_assert!(a.value >= -1e-10 && g.value >= -1e-10);

        let rows: Vec<Vec<f64>> = (0..4)
            .map(|i| m.row(i).iter().map(|v| scales[i] * v + shifts[i]).collect())
            .collect();
        let s = TimeSeriesMatrix::from_rows(rows).unwrap();
        let b = mi_gaussian(&s, &part, &cheap).unwrap();
        let h = granger_causality(&s, &part, 2, 2, &cheap).unwrap();
        prop_assert!((a.value - b.value).abs() < 1e-10);
        prop_assert!((g.value - h.value).abs() < 1e-10);
    }
}
