//! Objective formulas. Each takes a point of any length the function allows.

use std::f64::consts::{E, PI};

use super::data::*;

pub fn shekel(x: &[f64], m: usize) -> f64 {
    -(0..m)
        .map(|j| {
            let d: f64 = (0..4).map(|k| (x[k] - SHEKEL_A[j][k]).powi(2)).sum();
            1.0 / (d + SHEKEL_C[j])
        })
        .sum::<f64>()
}

fn hartman<const N: usize>(x: &[f64], a: &[[f64; N]; 4], p: &[[f64; N]; 4]) -> f64 {
    -(0..4)
        .map(|i| {
            let inner: f64 = (0..N).map(|j| a[i][j] * (x[j] - p[i][j]).powi(2)).sum();
            HARTMAN_ALPHA[i] * (-inner).exp()
        })
        .sum::<f64>()
}

pub fn hartman3(x: &[f64]) -> f64 {
    hartman(x, &HARTMAN3_A, &HARTMAN3_P)
}

pub fn hartman6(x: &[f64]) -> f64 {
    hartman(x, &HARTMAN6_A, &HARTMAN6_P)
}

pub fn branin(x: &[f64]) -> f64 {
    let (x1, x2) = (x[0], x[1]);
    let b = 5.1 / (4.0 * PI * PI);
    let c = 5.0 / PI;
    let t = 1.0 / (8.0 * PI);
    (x2 - b * x1 * x1 + c * x1 - 6.0).powi(2) + 10.0 * (1.0 - t) * x1.cos() + 10.0
}

pub fn goldstein_price(x: &[f64]) -> f64 {
    let (x1, x2) = (x[0], x[1]);
    let a = 1.0
        + (x1 + x2 + 1.0).powi(2)
            * (19.0 - 14.0 * x1 + 3.0 * x1 * x1 - 14.0 * x2 + 6.0 * x1 * x2 + 3.0 * x2 * x2);
    let b = 30.0
        + (2.0 * x1 - 3.0 * x2).powi(2)
            * (18.0 - 32.0 * x1 + 12.0 * x1 * x1 + 48.0 * x2 - 36.0 * x1 * x2 + 27.0 * x2 * x2);
    a * b
}

pub fn six_hump_camel(x: &[f64]) -> f64 {
    let (x1, x2) = (x[0], x[1]);
    (4.0 - 2.1 * x1 * x1 + x1.powi(4) / 3.0) * x1 * x1 + x1 * x2 + (-4.0 + 4.0 * x2 * x2) * x2 * x2
}

pub fn shubert(x: &[f64]) -> f64 {
    x.iter()
        .map(|&xk| (1..=5).map(|i| i as f64 * ((i as f64 + 1.0) * xk + i as f64).cos()).sum::<f64>())
        .product()
}

pub fn ackley(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let sq: f64 = x.iter().map(|v| v * v).sum();
    let cs: f64 = x.iter().map(|v| (2.0 * PI * v).cos()).sum();
    20.0 + E - 20.0 * (-0.2 * (sq / n).sqrt()).exp() - (cs / n).exp()
}

pub fn dixon_price(x: &[f64]) -> f64 {
    (x[0] - 1.0).powi(2)
        + (1..x.len())
            .map(|i| (i + 1) as f64 * (2.0 * x[i] * x[i] - x[i - 1]).powi(2))
            .sum::<f64>()
}

pub fn griewank(x: &[f64]) -> f64 {
    let s: f64 = x.iter().map(|v| v * v).sum::<f64>() / 4000.0;
    let p: f64 = x
        .iter()
        .enumerate()
        .map(|(i, v)| (v / ((i + 1) as f64).sqrt()).cos())
        .product();
    s - p + 1.0
}

pub fn levy(x: &[f64]) -> f64 {
    let w: Vec<f64> = x.iter().map(|v| 1.0 + (v - 1.0) / 4.0).collect();
    let n = w.len();
    let mut f = (PI * w[0]).sin().powi(2);
    for wi in &w[..n - 1] {
        f += (wi - 1.0).powi(2) * (1.0 + 10.0 * (PI * wi + 1.0).sin().powi(2));
    }
    f + (w[n - 1] - 1.0).powi(2) * (1.0 + (2.0 * PI * w[n - 1]).sin().powi(2))
}

pub fn michalewicz(x: &[f64]) -> f64 {
    -x.iter()
        .enumerate()
        .map(|(i, &v)| v.sin() * ((i + 1) as f64 * v * v / PI).sin().powi(20))
        .sum::<f64>()
}

/// Sums over complete groups of four; trailing coordinates do not enter.
pub fn powell(x: &[f64]) -> f64 {
    x.chunks_exact(4)
        .map(|c| {
            (c[0] + 10.0 * c[1]).powi(2)
                + 5.0 * (c[2] - c[3]).powi(2)
                + (c[1] - 2.0 * c[2]).powi(4)
                + 10.0 * (c[0] - c[3]).powi(4)
        })
        .sum()
}

pub fn rastrigin(x: &[f64]) -> f64 {
    10.0 * x.len() as f64 + x.iter().map(|v| v * v - 10.0 * (2.0 * PI * v).cos()).sum::<f64>()
}

pub fn rosenbrock(x: &[f64]) -> f64 {
    x.windows(2)
        .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (w[0] - 1.0).powi(2))
        .sum()
}

pub fn schwefel(x: &[f64]) -> f64 {
    418.9829 * x.len() as f64 - x.iter().map(|v| v * v.abs().sqrt().sin()).sum::<f64>()
}

pub fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

pub fn sum_squares(x: &[f64]) -> f64 {
    x.iter().enumerate().map(|(i, v)| (i + 1) as f64 * v * v).sum()
}

pub fn trid(x: &[f64]) -> f64 {
    x.iter().map(|v| (v - 1.0).powi(2)).sum::<f64>() - x.windows(2).map(|w| w[0] * w[1]).sum::<f64>()
}

pub fn zakharov(x: &[f64]) -> f64 {
    let s1: f64 = x.iter().map(|v| v * v).sum();
    let s2: f64 = x.iter().enumerate().map(|(i, v)| 0.5 * (i + 1) as f64 * v).sum();
    s1 + s2.powi(2) + s2.powi(4)
}
