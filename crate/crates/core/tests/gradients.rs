mod common;

use common::*;
use epiclust::nn::*;
use rand::Rng;

const POINTS: usize = 100;

#[test]
fn dense_matches_finite_differences() {
    let err = dense_error(POINTS, 1);
    assert!(err < 1e-6, "{err}");
}

#[test]
fn conv_matches_finite_differences_at_every_dilation() {
    for d in 1..=6 {
        let err = conv_error(d, POINTS, 10 + d as u64);
        assert!(err < 1e-6, "dilation {d}: {err}");
    }
}

#[test]
fn batch_norm_matches_finite_differences() {
    let err = batch_norm_error(POINTS, 2);
    assert!(err < 1e-4, "{err}");
}

#[test]
fn relu_matches_finite_differences_off_the_kink() {
    assert!(relu_error(POINTS, 3) < 1e-6);
}

#[test]
fn pinball_matches_finite_differences_off_the_kink() {
    let err = pinball_error(POINTS, 4);
    assert!(err < 1e-6, "{err}");
}

#[test]
fn embedding_matches_finite_differences() {
    assert!(embedding_error(POINTS, 5) < 1e-6);
}

#[test]
fn full_net_matches_finite_differences() {
    let report = net_gradient(20, 20, 6);
    assert!(report.max_rel_error < 1e-3, "{}", report.max_rel_error);
    assert!(report.kinks_skipped * 10 < report.coordinates, "{} kinks", report.kinks_skipped);
    assert!(report.max_pre_norm_bias_slope < 1e-6, "{}", report.max_pre_norm_bias_slope);
}

#[test]
fn conv_is_causal() {
    let mut r = rng(7);
    for d in 1..=6 {
        let params = ConvParams::init(2, 3, 4, d, &mut r);
        let x = Tensor::matrix(12, 3, uniform(&mut r, 36)).unwrap();
        let base = conv1d_causal(&x, &params).unwrap();
        for t in 0..12 {
            let mut bumped = x.clone();
            bumped.row_mut(t)[r.gen_range(0..3)] += 1.0;
            let out = conv1d_causal(&bumped, &params).unwrap();
            for s in 0..t {
                assert_eq!(out.row(s), base.row(s), "dilation {d}: input {t} moved output {s}");
            }
            assert_ne!(out.row(t), base.row(t));
        }
    }
}

#[test]
fn batch_norm_output_is_centred() {
    let mut r = rng(8);
    for _ in 0..20 {
        let x = Tensor::matrix(16, 5, uniform(&mut r, 80).iter().map(|v| v * 50.0 + 3.0).collect()).unwrap();
        let mut state = BatchNormState::new(5);
        let (y, _) = batch_norm(&x, &mut state, Mode::Train).unwrap();
        for c in 0..5 {
            let mean = (0..16).map(|b| y.get2(b, c)).sum::<f64>() / 16.0;
            assert!(mean.abs() < 1e-10, "{mean}");
        }
    }
}

#[test]
fn adam_is_bitwise_deterministic() {
    let mut r = rng(9);
    let init = uniform(&mut r, 50);
    let grads: Vec<Vec<f64>> = (0..10).map(|_| uniform(&mut r, 50)).collect();
    let run = || {
        let mut p = init.clone();
        let mut adam = AdamState::new(0.001);
        for g in &grads {
            adam.step(&mut [p.as_mut_slice()], &[g.as_slice()]).unwrap();
        }
        p
    };
    let (a, b) = (run(), run());
    assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
}
