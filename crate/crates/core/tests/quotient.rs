mod common;

use common::{c, disc, phi_w12, rel};
use eqbtq_core::{AdmissibleSymbol, HamiltonianCircleModel, PolarizedScalar, QuotientChart};
use proptest::prelude::*;

fn setup(weights: &[u32]) -> (HamiltonianCircleModel, QuotientChart) {
    let m = HamiltonianCircleModel::weighted_projective(weights).unwrap();
    let q = m
        .quotient_chart(&vec![c(0.0, 0.0); weights.len() - 1])
        .unwrap();
    (m, q)
}

fn worst(a: &PolarizedScalar, b: &PolarizedScalar, pts: &[Vec<num_complex::Complex64>]) -> f64 {
    pts.iter()
        .map(|p| rel(a.value(p).unwrap(), b.value(p).unwrap()))
        .fold(0.0, f64::max)
}

fn symbols(d: usize, m: &HamiltonianCircleModel) -> Vec<PolarizedScalar> {
    vec![
        AdmissibleSymbol::coordinate_density(d + 1, 1).to_affine_kernel(),
        m.phi().clone(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn sphere_lift_is_unit_and_matches_moment_map(n in disc(1, 2.0)) {
        let (_, q) = setup(&[1, 2]);
        let x = q.sphere_point(&n).unwrap();
        let norm: f64 = x.iter().map(|z| z.norm_sqr()).sum();
        prop_assert!((norm - 1.0).abs() < 1e-13);
        let phi = x[0].norm_sqr() + 2.0 * x[1].norm_sqr();
        prop_assert!((phi - phi_w12(n[0])).abs() < 1e-12);
    }

    #[test]
    fn moment_map_is_invariant(z in disc(2, 1.0), theta in 0.0..6.3f64) {
        let m = HamiltonianCircleModel::weighted_projective(&[1, 1, 2]).unwrap();
        let a = m.phi().value(&z).unwrap();
        let b = m.phi().value(&m.rotate(&z, theta)).unwrap();
        prop_assert!((a - b).norm() < 1e-12);
    }

    #[test]
    fn gradient_transfers_with_factor_phi(n in disc(2, 0.8)) {
        for w in [&[1u32, 2][..], &[1, 1, 2]] {
            let (m, q) = setup(w);
            let pts = vec![n[..w.len() - 1].to_vec()];
            for f in symbols(w.len() - 1, &m) {
                let direct = q.grad_norm_sq(&q.transport(&f)).unwrap();
                let via = q.transport(&m.grad_norm_sq_n(&f).unwrap());
                prop_assert!(worst(&direct, &via, &pts) < 1e-7);
            }
        }
    }

    #[test]
    fn poisson_transfers_with_factor_phi(n in disc(2, 0.8)) {
        let (m, q) = setup(&[1, 1, 2]);
        let f = AdmissibleSymbol::pair_re(3, 0, 1).to_affine_kernel();
        let g = AdmissibleSymbol::pair_im(3, 0, 1).to_affine_kernel();
        let direct = q.poisson_bracket(&q.transport(&f), &q.transport(&g)).unwrap();
        let via = q.transport(&m.poisson_n(&f, &g).unwrap());
        prop_assert!(worst(&direct, &via, &[n]) < 1e-7);
    }

    #[test]
    fn laplacian_transfer_with_slice_term(n in disc(2, 0.8)) {
        for w in [&[1u32, 2][..], &[1, 1, 2]] {
            let (m, q) = setup(w);
            let pts = vec![n[..w.len() - 1].to_vec()];
            for f in symbols(w.len() - 1, &m) {
                let direct = q.laplacian(&q.transport(&f)).unwrap();
                let via = q.transport(&m.laplacian_n_corrected(&f).unwrap());
                prop_assert!(worst(&direct, &via, &pts) < 1e-7);
            }
        }
    }
}

#[test]
#[ignore = "the plain law Δ_N = Φ Δ_M misses -(d/2)<grad Φ, grad f>; see laplacian_transfer_with_slice_term"]
fn laplacian_transfer_plain_law() {
    let pts: Vec<Vec<_>> = (0..20)
        .map(|i| vec![c(0.04 * i as f64, -0.02 * i as f64)])
        .collect();
    let (m, q) = setup(&[1, 2]);
    let f = m.phi().clone();
    let direct = q.laplacian(&q.transport(&f)).unwrap();
    let via = q.transport(&m.laplacian_n(&f).unwrap());
    assert!(worst(&direct, &via, &pts) < 1e-7);
}

#[test]
fn quotient_of_standard_model_is_fubini_study() {
    let (_, q) = setup(&[1, 1]);
    let rho = q.scalar_curvature().unwrap();
    for p in [[c(0.0, 0.0)], [c(0.7, -0.4)]] {
        assert!((rho.value(&p).unwrap() - 2.0).norm() < 1e-10);
    }
}
