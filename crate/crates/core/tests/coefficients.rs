mod common;

use std::f64::consts::PI;

use common::{c, disc, phi_w12, rel};
use eqbtq_core::coefficients::{
    commutator_leading, commutator_leading_base, s0, s1_closed_form, toeplitz_s1_closed_form,
    toeplitz_table,
};
use eqbtq_core::{
    fit_coefficients, AdmissibleSymbol, CoefficientTable, EnglisOperators, HamiltonianCircleModel,
    KahlerChart, Precision, QuotientChart, WeightedProjectiveOracle,
};
use proptest::prelude::*;

fn chart(weights: &[u32]) -> QuotientChart {
    let m = HamiltonianCircleModel::weighted_projective(weights).unwrap();
    m.quotient_chart(&vec![c(0.0, 0.0); weights.len() - 1])
        .unwrap()
}

fn table(q: &QuotientChart) -> CoefficientTable {
    CoefficientTable::build(q, &EnglisOperators::standard(), 1).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn leading_coefficient_is_inverse_power_of_phi(n in disc(1, 2.0)) {
        let q = chart(&[1, 2]);
        let v = s0(&q).real_value(&n).unwrap();
        prop_assert!((v - phi_w12(n[0]).powi(-2)).abs() < 1e-12 * v);
    }

    #[test]
    fn s1_recursion_matches_closed_form(n in disc(2, 0.9)) {
        for w in [&[1u32, 2][..], &[1, 1, 2]] {
            let q = chart(w);
            let p = &n[..w.len() - 1];
            let t = table(&q);
            let a = t.s(1).unwrap().value(p).unwrap();
            let b = s1_closed_form(&q).unwrap().value(p).unwrap();
            prop_assert!(rel(a, b) < 1e-9);
        }
    }

    #[test]
    fn toeplitz_s1_recursion_matches_closed_form(n in disc(1, 0.9)) {
        let q = chart(&[1, 2]);
        let t = table(&q);
        let f = q.symbol_kernel(&AdmissibleSymbol::coordinate_density(2, 1)).unwrap();
        let rec = toeplitz_table(&t, &f, &EnglisOperators::standard(), 1).unwrap();
        let cf = toeplitz_s1_closed_form(&q, &f).unwrap();
        prop_assert!(rel(rec[1].value(&n).unwrap(), cf.value(&n).unwrap()) < 1e-9);
    }

    #[test]
    fn commutator_coefficient_two_routes(n in disc(2, 0.8)) {
        let q = chart(&[1, 1, 2]);
        let (fs, gs) = (AdmissibleSymbol::pair_re(3, 0, 1), AdmissibleSymbol::pair_im(3, 0, 1));
        let lead = commutator_leading(&q, &q.symbol_kernel(&fs).unwrap(), &q.symbol_kernel(&gs).unwrap()).unwrap();
        let base = commutator_leading_base(&q, &fs.to_affine_kernel(), &gs.to_affine_kernel()).unwrap();
        prop_assert!(rel(lead.value(&n).unwrap(), q.transport(&base).value(&n).unwrap()) < 1e-9);
    }
}

#[test]
fn subleading_term_on_projective_line_is_half_curvature() {
    let m = HamiltonianCircleModel::trivial(KahlerChart::fubini_study(1));
    let q = m.quotient_chart(&[c(0.0, 0.0)]).unwrap();
    let t = table(&q);
    for p in [[c(0.0, 0.0)], [c(1.3, -0.4)]] {
        assert!((t.s(1).unwrap().value(&p).unwrap() - 1.0).norm() < 1e-10);
    }
}

#[test]
fn coefficients_match_oracle_fit_off_the_sweep_points() {
    let q = chart(&[1, 2]);
    let t = table(&q);
    let o = WeightedProjectiveOracle::new(&[1, 2], Precision::Extended).unwrap();
    let ks: Vec<f64> = (0..16).map(|i| 100.0 + 20.0 * i as f64).collect();
    for n in [[c(0.0, 0.0)], [c(-0.3, -0.9)], [c(1.5, 0.2)]] {
        let x = q.sphere_point(&n).unwrap();
        let v: Vec<f64> = ks
            .iter()
            .map(|&k| o.szego_diag(k as i64, &x).unwrap() * PI / k)
            .collect();
        let fit = fit_coefficients(&ks, &v, 3).unwrap();
        let (a, b) = (
            s0(&q).real_value(&n).unwrap(),
            t.s(1).unwrap().real_value(&n).unwrap(),
        );
        assert!((fit.coeffs[0] - a).abs() < 1e-6 * a.abs());
        assert!((fit.coeffs[1] - b).abs() < 1e-3 * b.abs());
    }
}
