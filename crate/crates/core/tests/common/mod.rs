//! Shared helpers for the integration suites.
#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Point of the open disc of radius `r` in C^d.
pub fn disc(d: usize, r: f64) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((0.0..1.0f64, 0.0..(2.0 * PI)), d).prop_map(move |v| {
        v.into_iter()
            .map(|(s, t)| Complex64::from_polar(r * s.sqrt(), t))
            .collect()
    })
}

/// Unit vector in C^n with every coordinate bounded away from zero.
pub fn sphere(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((0.2..1.0f64, 0.0..(2.0 * PI)), n).prop_map(|v| {
        let z: Vec<Complex64> = v
            .into_iter()
            .map(|(r, t)| Complex64::from_polar(r, t))
            .collect();
        let norm = z.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        z.into_iter().map(|a| a / norm).collect()
    })
}

fn ln_fact(n: u32) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

/// Reference diagonal `Σ_{w·α = k} |x^α|² (|α|+d)! / (π^d α!)`, summed in
/// log space. Written independently of the library oracle.
pub fn naive_szego_diag(weights: &[u32], k: u32, x: &[Complex64]) -> f64 {
    let d = weights.len() as u32 - 1;
    let mut total = 0.0;
    let mut alpha = vec![0u32; weights.len()];
    fn rec(
        j: usize,
        left: u32,
        w: &[u32],
        alpha: &mut Vec<u32>,
        x: &[Complex64],
        d: u32,
        total: &mut f64,
    ) {
        if j == w.len() - 1 {
            if left % w[j] != 0 {
                return;
            }
            alpha[j] = left / w[j];
            let size: u32 = alpha.iter().sum();
            let mut l = ln_fact(size + d) - d as f64 * PI.ln();
            for (a, z) in alpha.iter().zip(x) {
                l += *a as f64 * z.norm_sqr().ln() - ln_fact(*a);
            }
            *total += l.exp();
            return;
        }
        for a in 0..=left / w[j] {
            alpha[j] = a;
            rec(j + 1, left - a * w[j], w, alpha, x, d, total);
        }
    }
    rec(0, k, weights, &mut alpha, x, d, &mut total);
    total
}

/// Moment map of weights (1,2) at slice coordinate `n`.
pub fn phi_w12(n: Complex64) -> f64 {
    let s = n.norm_sqr();
    let u = if s == 0.0 {
        1.0
    } else {
        (-1.0 + (1.0 + 4.0 * s).sqrt()) / (2.0 * s)
    };
    u + 2.0 * u * u * s
}

pub fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

/// `hlc.point` for a single frame coordinate, zero in the others.
pub fn psi_point(h: &eqbtq_core::Hlc, v: Complex64) -> Vec<Complex64> {
    let mut coords = vec![Complex64::new(0.0, 0.0); h.frame.len()];
    coords[0] = v;
    h.point(&coords)
}
