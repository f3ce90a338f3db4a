mod common;

use std::collections::HashMap;

use proptest::prelude::*;

use univcode::types::{
    enum_types, pack_mac, pack_mac_sized, pack_single, pack_single_sized, pack_superposition, pack_superposition_sized, shell_members, stabilizer_average,
    type_class_lower_bound, verify_orbit_bounds, verify_packing, CondType, PackedCode, PermGroupHandle, TypeVec,
};

fn binomial(n: u128, k: u128) -> u128 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

fn ln_multinomial(counts: &[usize]) -> f64 {
    ln_factorial(counts.iter().sum()) - counts.iter().map(|&c| ln_factorial(c)).sum::<f64>()
}

fn column(seqs: &[&[usize]], i: usize) -> Vec<usize> {
    seqs.iter().map(|s| s[i]).collect()
}

/// Worst `count / (|T_V(base)| exp(-gap))` over the joint types of `others` with `base`.
fn brute_margin(base: &[&[usize]], others: &[Vec<&[usize]>], gap: f64) -> f64 {
    let mut shells: HashMap<Vec<(Vec<usize>, Vec<usize>)>, usize> = HashMap::new();
    for o in others {
        let mut pairs: Vec<(Vec<usize>, Vec<usize>)> = (0..base[0].len()).map(|i| (column(base, i), column(o, i))).collect();
        pairs.sort();
        *shells.entry(pairs).or_default() += 1;
    }
    shells
        .iter()
        .map(|(pairs, &count)| {
            let mut rows: HashMap<&Vec<usize>, HashMap<&Vec<usize>, usize>> = HashMap::new();
            for (a, b) in pairs {
                *rows.entry(a).or_default().entry(b).or_default() += 1;
            }
            let shell: f64 = rows.values().map(|r| ln_multinomial(&r.values().copied().collect::<Vec<_>>())).sum();
            count as f64 / (shell - gap).exp()
        })
        .fold(0.0, f64::max)
}

fn h_of(seq: &[usize]) -> f64 {
    let k = seq.iter().max().unwrap() + 1;
    let counts: Vec<f64> = (0..k).map(|s| seq.iter().filter(|&&x| x == s).count() as f64 / seq.len() as f64).collect();
    common::h_nats(&counts)
}

fn h_given(given: &[usize], seq: &[usize]) -> f64 {
    let pairs: Vec<usize> = given.iter().zip(seq).map(|(g, s)| g * 16 + s).collect();
    h_of(&pairs) - h_of(given)
}

fn oracle_single(code: &PackedCode) -> f64 {
    let nf = code.n as f64;
    let words = &code.codewords;
    let gap = nf * (h_of(&words[0]) - code.rates[0]);
    (0..words.len())
        .map(|i| {
            let others: Vec<Vec<&[usize]>> = words.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, w)| vec![w.as_slice()]).collect();
            brute_margin(&[&words[i]], &others, gap)
        })
        .fold(0.0, f64::max)
}

fn oracle_superposition(code: &PackedCode) -> [f64; 3] {
    let nf = code.n as f64;
    let per = code.codewords.len() / code.clouds.len();
    let sat = |j: usize, k: usize| code.codewords[j * per + k].as_slice();
    let (hu, hx) = (h_of(&code.clouds[0]), h_given(&code.clouds[0], sat(0, 0)));
    let (ru, rx) = (code.rates[0], code.rates[1]);
    let mut out = [0.0f64; 3];
    for j in 0..code.clouds.len() {
        let u = code.clouds[j].as_slice();
        let others: Vec<Vec<&[usize]>> = (0..code.clouds.len()).filter(|&i| i != j).map(|i| vec![code.clouds[i].as_slice()]).collect();
        out[0] = out[0].max(brute_margin(&[u], &others, nf * (hu - ru)));
        for k in 0..per {
            let x = sat(j, k);
            let same: Vec<Vec<&[usize]>> = (0..per).filter(|&i| i != k).map(|i| vec![sat(j, i)]).collect();
            out[1] = out[1].max(brute_margin(&[u, x], &same, nf * (hx - rx)));
            let far: Vec<Vec<&[usize]>> = (0..code.clouds.len())
                .filter(|&i| i != j)
                .flat_map(|i| (0..per).map(move |k2| (i, k2)))
                .map(|(i, k2)| vec![code.clouds[i].as_slice(), sat(i, k2)])
                .collect();
            out[2] = out[2].max(brute_margin(&[u, x], &far, nf * (hu + hx - ru - rx)));
        }
    }
    out
}

fn oracle_mac(code: &PackedCode) -> [f64; 3] {
    let nf = code.n as f64;
    let t = code.t_sequence.as_slice();
    let (aw, bw) = (&code.codewords, &code.b_codewords);
    let (ha, hb) = (h_given(t, &aw[0]), h_given(t, &bw[0]));
    let (ra, rb) = (code.rates[0], code.rates[1]);
    let mut out = [0.0f64; 3];
    for (ia, a) in aw.iter().enumerate() {
        for (ib, b) in bw.iter().enumerate() {
            let base: [&[usize]; 3] = [a, b, t];
            let pairs: Vec<Vec<&[usize]>> = aw
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != ia)
                .flat_map(|(_, a2)| bw.iter().enumerate().filter(|(k, _)| *k != ib).map(move |(_, b2)| vec![a2.as_slice(), b2.as_slice()]))
                .collect();
            out[0] = out[0].max(brute_margin(&base, &pairs, nf * (ha + hb - ra - rb)));
            let bs: Vec<Vec<&[usize]>> = bw.iter().enumerate().filter(|(k, _)| *k != ib).map(|(_, w)| vec![w.as_slice()]).collect();
            out[1] = out[1].max(brute_margin(&base, &bs, nf * (hb - rb)));
            let as_: Vec<Vec<&[usize]>> = aw.iter().enumerate().filter(|(i, _)| *i != ia).map(|(_, w)| vec![w.as_slice()]).collect();
            out[2] = out[2].max(brute_margin(&base, &as_, nf * (ha - ra)));
        }
    }
    out
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + b.abs())
}

fn half_half(n: usize) -> TypeVec {
    TypeVec::new(vec![n / 2, n - n / 2]).unwrap()
}

fn balanced_cond() -> CondType {
    CondType::new(half_half(8), vec![half_half(4), half_half(4)]).unwrap()
}

#[test]
fn enumeration_matches_stars_and_bars() {
    for n in 1..=20usize {
        for k in 1..=4usize {
            let types = enum_types(n, k).unwrap();
            assert_eq!(types.len() as u128, binomial((n + k - 1) as u128, (k - 1) as u128));
            assert!(types.iter().all(|t| t.counts.len() == k && t.counts.iter().sum::<usize>() == n));
            let mut seen: Vec<_> = types.iter().map(|t| t.counts.clone()).collect();
            seen.sort();
            seen.dedup();
            assert_eq!(seen.len(), types.len());
        }
    }
}

#[test]
fn enumeration_examples() {
    let mut small: Vec<_> = enum_types(2, 2).unwrap().into_iter().map(|t| t.counts).collect();
    small.sort();
    assert_eq!(small, vec![vec![0, 2], vec![1, 1], vec![2, 0]]);
    assert_eq!(enum_types(4, 2).unwrap().len(), 5);
    assert!(enum_types(0, 2).is_err());

    let uniform = half_half(4);
    assert!((uniform.class_size_ln().exp() - 6.0).abs() < 1e-9);
    let bound = (4.0 * std::f64::consts::LN_2).exp() / 25.0;
    assert!((type_class_lower_bound(&uniform) - bound).abs() < 1e-12);
    assert!(6.0 >= bound);
}

#[test]
fn single_packing_examples() {
    let ty = half_half(8);
    let lone = pack_single(8, &ty, 0.2, 1.0, 3).unwrap();
    assert_eq!(lone.codewords.len(), 1);
    assert!(lone.margins.values().all(|&m| m == 0.0));
    assert!(lone.passes());
    assert_eq!(verify_packing(&lone).unwrap(), lone.margins);
    assert_eq!(TypeVec::of_sequence(&lone.codewords[0], 2).unwrap(), ty);

    let code = pack_single_sized(8, &ty, 8, 0.6, 5).unwrap();
    assert_eq!(code.codewords.len(), 8);
    assert!(code.passes());
    assert!(code.codewords.iter().all(|w| TypeVec::of_sequence(w, 2).unwrap() == ty));
    assert!(close(code.margins["codeword"], oracle_single(&code)));

    assert!(pack_single(8, &ty, std::f64::consts::LN_2, 0.0, 1).is_err());
    assert!(pack_single(8, &ty, 1.0, 0.0, 1).is_err());
}

#[test]
fn superposition_packing_examples() {
    let joint = balanced_cond();
    let lone = pack_superposition(8, &joint, 0.2, 0.2, 1.0, 1).unwrap();
    assert_eq!(lone.message_counts(), vec![1, 1]);
    assert!(lone.passes());

    let code = pack_superposition_sized(8, &joint, [2, 2], 0.6, 0.6, 7).unwrap();
    assert_eq!(code.message_counts(), vec![2, 2]);
    assert!(code.passes());
    for (j, u) in code.clouds.iter().enumerate() {
        for k in 0..2 {
            assert_eq!(CondType::of_pair(u, code.satellite(j, k), 2, 2).unwrap(), joint);
        }
    }
    let o = oracle_superposition(&code);
    assert!(close(code.margins["cloud"], o[0]) && close(code.margins["satellite"], o[1]) && close(code.margins["joint"], o[2]));
    assert_eq!(verify_packing(&code).unwrap(), code.margins);

    for j in 0..2 {
        for k in 0..2 {
            let r = verify_orbit_bounds(&code, &[j, k]).unwrap();
            assert!(r.holds, "{:?}", r.ratios);
            assert!(r.ratios.values().all(|&v| v <= 1.0 + 1e-9));
        }
    }
}

#[test]
fn mac_packing_examples() {
    let t = [0, 0, 0, 0, 1, 1, 1, 1];
    let cond = balanced_cond();
    let code = pack_mac_sized(&t, &cond, &cond, [2, 2], 0.65, 0.65, 11).unwrap();
    assert!(code.passes());
    for w in code.codewords.iter().chain(&code.b_codewords) {
        assert_eq!(CondType::of_pair(&t, w, 2, 2).unwrap(), cond);
    }
    let o = oracle_mac(&code);
    assert!(close(code.margins["pair"], o[0]) && close(code.margins["b_given_a"], o[1]) && close(code.margins["a_given_b"], o[2]));
    assert_eq!(verify_packing(&code).unwrap(), code.margins);

    // one symbol of T: codewords are plain type-class members
    let flat = CondType::new(TypeVec::new(vec![8]).unwrap(), vec![half_half(8)]).unwrap();
    let code = pack_mac_sized(&[0; 8], &flat, &flat, [2, 2], 0.65, 0.65, 2).unwrap();
    assert!(code.passes());
    assert!(code.codewords.iter().chain(&code.b_codewords).all(|w| TypeVec::of_sequence(w, 2).unwrap() == half_half(8)));
    let o = oracle_mac(&code);
    assert!(close(code.margins["pair"], o[0]));

    let unsorted = [1, 0, 0, 0, 1, 1, 1, 0];
    assert!(pack_mac(&unsorted, &cond, &cond, 0.1, 0.1, 1.0, 1).is_err());
}

fn swap(x: &[usize], i: usize, j: usize) -> Vec<usize> {
    let mut y = x.to_vec();
    y.swap(i, j);
    y
}

#[test]
fn orbit_bound_examples() {
    let x = vec![0, 0, 0, 0, 1, 1, 1, 1];
    let lone = PackedCode::single_from_codewords(vec![x.clone()], 0.2, 1.0).unwrap();
    let r = verify_orbit_bounds(&lone, &[0]).unwrap();
    assert!(r.holds && r.ratios.values().all(|&v| v == 0.0));

    let mut words = vec![x.clone()];
    for i in 0..4 {
        for j in 4..8 {
            words.push(swap(&x, i, j));
        }
    }
    let rate = (words.len() as f64).ln() / 8.0;
    let clustered = PackedCode::single_from_codewords(words, rate, 0.0).unwrap();
    assert!(!clustered.passes());
    let r = verify_orbit_bounds(&clustered, &[0]).unwrap();
    assert!(!r.holds);
    // count 16 on a shell of size 16, against M = 17 and exp(-n H) = 2^-8
    assert!((r.ratios["codeword"] - 256.0 / 17.0).abs() < 1e-9);
}

#[test]
fn stabilizer_average_is_constant_on_shells() {
    let ty = half_half(8);
    let code = pack_single_sized(8, &ty, 8, 0.6, 5).unwrap();
    let x = code.codewords[0].as_slice();
    let book: Vec<Vec<Vec<usize>>> = code.codewords.iter().map(|w| vec![w.clone()]).collect();
    for other in &code.codewords[1..] {
        let v = CondType::of_pair(x, other, 2, 2).unwrap();
        let shell = shell_members(x, &v).unwrap();
        assert!((shell.len() as f64 - v.shell_size_ln().exp()).abs() < 1e-6);
        let hits = shell.iter().filter(|s| code.codewords.contains(s)).count() as f64;
        let expect = hits / shell.len() as f64 / code.codewords.len() as f64;
        for member in [&shell[0], &shell[shell.len() / 2], shell.last().unwrap()] {
            let avg = stabilizer_average(&[x], &book, &[member]).unwrap();
            assert!((avg - expect).abs() < 1e-12);
        }
    }

    let g = PermGroupHandle::stabilizer(&[x]).unwrap();
    assert!(g.fixes_base());
    assert_eq!(g.elements().unwrap().len(), 576);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn packed_codes_reverify(seed in 0u64..1000, size in 2usize..=6) {
        let ty = half_half(8);
        if let Ok(code) = pack_single_sized(8, &ty, size, 0.6, seed) {
            prop_assert_eq!(verify_packing(&code).unwrap(), code.margins.clone());
            prop_assert!(close(code.margins["codeword"], oracle_single(&code)));
            prop_assert!(code.passes());
        }
    }

    #[test]
    fn type_of_sequence_round_trips(counts in proptest::collection::vec(0usize..5, 1..4)) {
        prop_assume!(counts.iter().sum::<usize>() > 0);
        let ty = TypeVec::new(counts.clone()).unwrap();
        let seq = ty.sorted_sequence();
        prop_assert_eq!(TypeVec::of_sequence(&seq, counts.len()).unwrap(), ty.clone());
        prop_assert!(ty.class_size_ln().exp() >= type_class_lower_bound(&ty) - 1e-9);
    }
}
