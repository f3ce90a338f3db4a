mod common;

use proptest::prelude::*;

use univcode::channels::{bsc, classical_embed, s2mac, CQChannel};
use univcode::infomeasure::{
    cond_mi, holevo_mi, mac_cond_mi, petz_renyi_div, renyi_cmi, renyi_mi_sibson, sibson_optimal_sigma, vn_entropy, Dist, MacTerm, MarkovTriple,
};
use univcode::qmat::{tensor, weighted_sum, DensityMat, HermMat};

const LN2: f64 = std::f64::consts::LN_2;

#[test]
fn entropy_examples() {
    assert!(vn_entropy(&DensityMat::basis(3, 1)).value.abs() < 1e-12);
    assert!((vn_entropy(&DensityMat::maximally_mixed(2)).bits() - 1.0).abs() < 1e-12);
    let h = vn_entropy(&DensityMat::diag(&[0.25, 0.75]).unwrap()).bits();
    assert!((h - common::h2_bits(0.25)).abs() < 1e-12);
    assert!((h - 0.811278).abs() < 1e-6);
}

#[test]
fn holevo_examples() {
    let mut r = common::rng(4);
    let rho = common::random_state(&mut r, 2);
    let flat = CQChannel::new(vec![rho.clone(), rho.clone(), rho]).unwrap();
    assert!(holevo_mi(&Dist::uniform(3), &flat).unwrap().value.abs() < 1e-12);

    let id = classical_embed(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
    assert!((holevo_mi(&Dist::uniform(2), &id).unwrap().bits() - 1.0).abs() < 1e-12);

    let i = holevo_mi(&Dist::uniform(2), &bsc(0.1).unwrap()).unwrap().bits();
    assert!((i - (1.0 - common::h2_bits(0.1))).abs() < 1e-9);
    assert!((i - 0.531004).abs() < 1e-6);

    assert!(holevo_mi(&Dist::uniform(3), &id).is_err());
}

#[test]
fn conditional_examples() {
    let half = MarkovTriple::product(Dist::uniform(2), Dist::uniform(2));
    let mac = s2mac();
    assert!((mac_cond_mi(&half, &mac, MacTerm::BGivenAT).unwrap().bits() - 1.0).abs() < 1e-12);
    assert!(mac_cond_mi(&half, &mac, MacTerm::AGivenT).unwrap().value.abs() < 1e-12);

    let mut r = common::rng(5);
    let w = common::random_cq(&mut r, 3, 2);
    let p = common::random_dist(&mut r, 3);
    let collapsed = MarkovTriple::bcd(Dist::uniform(1), vec![p.clone()]).unwrap();
    let a = cond_mi(&collapsed, &w).unwrap().value;
    assert!((a - holevo_mi(&p, &w).unwrap().value).abs() < 1e-12);
}

#[test]
fn petz_examples() {
    let mut r = common::rng(6);
    let rho = common::random_state(&mut r, 3);
    assert!(petz_renyi_div(&rho, &rho, 0.5).unwrap().value.abs() < 1e-12);

    let pure = DensityMat::diag(&[1.0, 0.0]).unwrap();
    let mixed = DensityMat::maximally_mixed(2);
    assert!((petz_renyi_div(&pure, &mixed, 2.0).unwrap().value - LN2).abs() < 1e-12);

    let other = DensityMat::diag(&[0.0, 1.0]).unwrap();
    assert!(petz_renyi_div(&pure, &other, 2.0).unwrap().is_infinite());

    assert!(petz_renyi_div(&pure, &mixed, 1.0).is_err());
    assert!(petz_renyi_div(&pure, &mixed, 0.0).is_err());
    assert!(petz_renyi_div(&pure, &mixed, -0.5).is_err());
}

#[test]
fn sibson_examples() {
    let mut r = common::rng(7);
    let rho = common::random_state(&mut r, 2);
    let flat = CQChannel::new(vec![rho.clone(), rho]).unwrap();
    for a in [0.3, 0.7, 1.5, 3.0] {
        assert!(renyi_mi_sibson(&Dist::uniform(2), &flat, a).unwrap().value.abs() < 1e-12);
    }

    let w = common::random_cq(&mut r, 3, 2);
    let p = common::random_dist(&mut r, 3);
    let near = renyi_mi_sibson(&p, &w, 1.0 - 1e-4).unwrap().value;
    assert!((near - holevo_mi(&p, &w).unwrap().value).abs() < 1e-3);

    let b = bsc(0.1).unwrap();
    let states: Vec<_> = b.states().iter().map(|s| s.herm().matrix().clone()).collect();
    let oracle = common::brute_sibson(&[0.5, 0.5], &states, 0.5);
    let got = renyi_mi_sibson(&Dist::uniform(2), &b, 0.5).unwrap().value;
    assert!((got - oracle).abs() < 1e-6, "{got} vs {oracle}");
}

#[test]
fn conditional_renyi_examples() {
    let mut r = common::rng(8);
    let w = common::random_cq(&mut r, 2, 2);
    let p = common::random_dist(&mut r, 2);
    let single = MarkovTriple::bcd(Dist::uniform(1), vec![p.clone()]).unwrap();
    for a in [0.4, 0.8, 1.3] {
        let lhs = renyi_cmi(&single, &w, a).unwrap().value;
        let rhs = renyi_mi_sibson(&p, &w, a).unwrap().value;
        assert!((lhs - rhs).abs() < 1e-12);
    }

    let joint = MarkovTriple::bcd(common::random_dist(&mut r, 2), vec![common::random_dist(&mut r, 2), common::random_dist(&mut r, 2)]).unwrap();
    let c = cond_mi(&joint, &w).unwrap().value;
    for a in [1.0 - 1e-4, 1.0 + 1e-4] {
        assert!((renyi_cmi(&joint, &w, a).unwrap().value - c).abs() < 1e-3);
    }

    let states: Vec<_> = w.states().iter().map(|s| s.herm().matrix().clone()).collect();
    let pxu: Vec<Vec<f64>> = joint.p_a_t.iter().map(|d| d.probs().to_vec()).collect();
    for a in [0.5, 1.5] {
        let oracle = common::brute_renyi_cmi(joint.p_t.probs(), &pxu, &states, a);
        let got = renyi_cmi(&joint, &w, a).unwrap().value;
        assert!((got - oracle).abs() < 1e-5, "alpha {a}: {got} vs {oracle}");
    }
}

/// `Σ_x P(x) |x⟩⟨x| ⊗ A_x` as a density matrix.
fn classical_quantum(p: &[f64], parts: &[HermMat]) -> DensityMat {
    let k = p.len();
    let blocks: Vec<HermMat> = (0..k)
        .map(|x| {
            let mut e = vec![0.0; k];
            e[x] = 1.0;
            tensor(&HermMat::diag(&e), &parts[x]).unwrap()
        })
        .collect();
    DensityMat::new(weighted_sum(k * parts[0].dim(), p.iter().copied().zip(blocks.iter()))).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn petz_is_monotone_in_alpha(seed in any::<u64>(), d in 1usize..=3) {
        let mut r = common::rng(seed);
        let rho = common::random_state(&mut r, d);
        let sigma = common::random_state(&mut r, d);
        let vals: Vec<f64> = [0.3, 0.5, 0.8, 1.2, 2.0].iter().map(|&a| petz_renyi_div(&rho, &sigma, a).unwrap().value).collect();
        prop_assert!(vals.windows(2).all(|w| w[0] <= w[1] + 1e-8), "{:?}", vals);
    }

    #[test]
    fn sibson_is_bounded(seed in any::<u64>(), nx in 1usize..=3, d in 1usize..=3, alpha in 0.1f64..4.0) {
        prop_assume!((alpha - 1.0).abs() > 1e-3);
        let mut r = common::rng(seed);
        let w = common::random_cq(&mut r, nx, d);
        let p = common::random_dist(&mut r, nx);
        let v = renyi_mi_sibson(&p, &w, alpha).unwrap().value;
        prop_assert!(v >= -1e-9 && v <= (nx as f64).ln() + 1e-9);
    }

    #[test]
    fn sibson_minimizer_certificate(seed in any::<u64>(), nx in 1usize..=3, alpha in 0.2f64..3.0) {
        prop_assume!((alpha - 1.0).abs() > 1e-3);
        let mut r = common::rng(seed);
        let w = common::random_cq(&mut r, nx, 2);
        let p = common::random_dist(&mut r, nx);
        let sigma = sibson_optimal_sigma(&p, &w, alpha).unwrap();
        let joint = classical_quantum(p.probs(), &w.states().iter().map(|s| s.herm().clone()).collect::<Vec<_>>());
        let product = classical_quantum(p.probs(), &vec![sigma.herm().clone(); nx]);
        let plugged = petz_renyi_div(&joint, &product, alpha).unwrap().value;
        let closed = renyi_mi_sibson(&p, &w, alpha).unwrap().value;
        prop_assert!((plugged - closed).abs() <= 1e-8);
    }

    #[test]
    fn singleton_condition_matches_sibson(seed in any::<u64>(), nx in 1usize..=3, alpha in 0.2f64..3.0) {
        prop_assume!((alpha - 1.0).abs() > 1e-3);
        let mut r = common::rng(seed);
        let w = common::random_cq(&mut r, nx, 2);
        let p = common::random_dist(&mut r, nx);
        let single = MarkovTriple::bcd(Dist::uniform(1), vec![p.clone()]).unwrap();
        let lhs = renyi_cmi(&single, &w, alpha).unwrap().value;
        let rhs = renyi_mi_sibson(&p, &w, alpha).unwrap().value;
        prop_assert!((lhs - rhs).abs() <= 1e-12);
    }
}
