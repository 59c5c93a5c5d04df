mod common;

use common::{c, disc};
use eqbtq_core::KahlerChart;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn fubini_study_curvature_is_constant(z1 in disc(1, 3.0), z2 in disc(2, 2.0)) {
        // ϱ = d(d+1) on CP^d
        let r1 = KahlerChart::fubini_study(1).scalar_curvature().unwrap().value(&z1).unwrap();
        let r2 = KahlerChart::fubini_study(2).scalar_curvature().unwrap().value(&z2).unwrap();
        prop_assert!((r1 - 2.0).norm() < 1e-10);
        prop_assert!((r2 - 6.0).norm() < 1e-10);
    }

    #[test]
    fn laplacian_of_potential_is_dimension(z in disc(2, 1.5)) {
        // G^{b̄a} ∂_a∂_b̄ Ξ = tr(G^{-1} G)
        for chart in [KahlerChart::flat(2), KahlerChart::fubini_study(2), KahlerChart::product_fubini_study(2)] {
            let v = chart.laplacian(chart.potential()).unwrap().value(&z).unwrap();
            prop_assert!((v - 2.0).norm() < 1e-11);
        }
    }

    #[test]
    fn metric_is_positive(z in disc(2, 3.0)) {
        let m = KahlerChart::fubini_study(2).metric_at(&z).unwrap();
        prop_assert!(m.min_eigenvalue > 0.0);
    }

    #[test]
    fn diastasis_vanishes_on_diagonal_only(z in disc(2, 1.0), w in disc(2, 1.0)) {
        let chart = KahlerChart::fubini_study(2);
        prop_assert!(chart.diastasis(&z, &z).unwrap().abs() < 1e-13);
        prop_assert!(chart.diastasis(&z, &w).unwrap() >= -1e-13);
    }

    #[test]
    fn poisson_bracket_is_antisymmetric(z in disc(2, 0.9)) {
        let chart = KahlerChart::fubini_study(2);
        let f = eqbtq_core::AdmissibleSymbol::pair_re(3, 0, 1).to_affine_kernel();
        let g = eqbtq_core::AdmissibleSymbol::pair_im(3, 1, 2).to_affine_kernel();
        let a = chart.poisson_bracket(&f, &g).unwrap().value(&z).unwrap();
        let b = chart.poisson_bracket(&g, &f).unwrap().value(&z).unwrap();
        prop_assert!((a + b).norm() < 1e-12);
    }
}

#[test]
fn flat_curvature_vanishes() {
    let r = KahlerChart::flat(2).scalar_curvature().unwrap();
    assert!(r.value(&[c(0.4, 0.2), c(-1.0, 0.5)]).unwrap().norm() < 1e-14);
}
