//! Schur-Weyl machinery at small block lengths and the universal decoders built
//! from it.
//!
//! The isotypic projectors of `(C^d)^{⊗n}` are central idempotents of the
//! symmetric group algebra, `P_λ = (dim λ / n!) Σ_g χ_λ(g) U_g`, with characters
//! from the Murnaghan–Nakayama rule evaluated once per conjugacy class.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channels::{BCDPair, CQChannel, MACChannel};
use crate::error::{Error, Result};
use crate::qmat::{check_dim, eigh, factor_permutation_map, permute_factors, tensor_all, CMat, DensityMat, HermMat};
use crate::types::{PackedCode, Setting};

/// Upper bound on `n! * d^n`, the work of one group-sum projector build.
pub const MAX_GROUP_WORK: usize = 50_000_000;
/// Decoders work with dense matrices on `d^n`; beyond this they are refused.
pub const MAX_DECODER_DIM: usize = 1024;
const TIE_TOL: f64 = 1e-10;
const COMMUTE_TOL: f64 = 1e-8;
const CLUSTER_TOL: f64 = 1e-8;
const S_SUPPORT_TOL: f64 = 1e-10;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

// ---------------------------------------------------------------------------
// Partitions and characters

/// Partitions of `n` into at most `max_rows` parts, in reverse lexicographic order.
pub fn partitions(n: usize, max_rows: usize) -> Vec<Vec<usize>> {
    fn rec(left: usize, cap: usize, rows: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        if rows == 0 {
            return;
        }
        for part in (1..=cap.min(left)).rev() {
            cur.push(part);
            rec(left - part, part, rows - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, max_rows, &mut Vec::new(), &mut out);
    out
}

/// `χ_λ(μ)` by repeated rim-hook removal, on the beta-set (abacus) encoding of `λ`.
pub fn character(lambda: &[usize], mu: &[usize]) -> i64 {
    let len = lambda.len();
    let beta: Vec<usize> = lambda.iter().enumerate().map(|(i, &p)| p + len - 1 - i).collect();
    mn(&beta, mu)
}

fn mn(beta: &[usize], mu: &[usize]) -> i64 {
    let Some((&k, rest)) = mu.split_first() else {
        return 1;
    };
    let mut total = 0;
    for (i, &b) in beta.iter().enumerate() {
        if b < k || beta.contains(&(b - k)) {
            continue;
        }
        let between = beta.iter().filter(|&&x| x > b - k && x < b).count();
        let mut next = beta.to_vec();
        next[i] = b - k;
        let sign = if between % 2 == 0 { 1 } else { -1 };
        total += sign * mn(&next, rest);
    }
    total
}

fn cycle_type(perm: &[usize]) -> Vec<usize> {
    let mut seen = vec![false; perm.len()];
    let mut out = Vec::new();
    for s in 0..perm.len() {
        if seen[s] {
            continue;
        }
        let mut len = 0;
        let mut i = s;
        while !seen[i] {
            seen[i] = true;
            i = perm[i];
            len += 1;
        }
        out.push(len);
    }
    out.sort_unstable_by(|a, b| b.cmp(a));
    out
}

/// Heap's algorithm; visits all `n!` permutations.
fn for_each_permutation(n: usize, mut f: impl FnMut(&[usize])) {
    let mut p: Vec<usize> = (0..n).collect();
    let mut stack = vec![0usize; n];
    f(&p);
    let mut i = 1;
    while i < n {
        if stack[i] < i {
            if i % 2 == 0 {
                p.swap(0, i);
            } else {
                p.swap(stack[i], i);
            }
            f(&p);
            stack[i] += 1;
            i = 1;
        } else {
            stack[i] = 0;
            i += 1;
        }
    }
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

fn check_group_work(n: usize, d: usize) -> Result<usize> {
    let dim = d.checked_pow(n as u32).ok_or(Error::SizeCap(usize::MAX))?;
    check_dim(dim)?;
    let work = factorial(n).saturating_mul(dim);
    if work > MAX_GROUP_WORK {
        return Err(Error::SizeCap(work));
    }
    Ok(dim)
}

// ---------------------------------------------------------------------------
// Isotypic decomposition and the universal state

#[derive(Clone, Debug)]
pub struct IsotypicBlock {
    pub partition: Vec<usize>,
    pub projector: HermMat,
    pub block_dim: usize,
}

#[derive(Clone, Debug)]
pub struct IsotypicDecomp {
    pub n: usize,
    pub d: usize,
    pub blocks: Vec<IsotypicBlock>,
}

impl IsotypicDecomp {
    /// Largest entry of `Σ P_λ - I` and of `P_λ P_μ` for `λ ≠ μ`.
    pub fn completeness_error(&self) -> f64 {
        let dim = self.d.pow(self.n as u32);
        let mut sum = HermMat::zeros(dim);
        for b in &self.blocks {
            sum = &sum + &b.projector;
        }
        let mut worst = sum.max_abs_diff(&HermMat::identity(dim));
        for (i, a) in self.blocks.iter().enumerate() {
            for b in &self.blocks[i + 1..] {
                let prod = a.projector.matrix() * b.projector.matrix();
                worst = worst.max(prod.iter().map(|z| z.norm()).fold(0.0, f64::max));
            }
        }
        worst
    }
}

pub fn isotypic(n: usize, d: usize) -> Result<IsotypicDecomp> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidParameter("n and d must be positive".into()));
    }
    let dim = check_group_work(n, d)?;
    let lambdas = partitions(n, d);
    let classes = partitions(n, n);
    let table: HashMap<Vec<usize>, Vec<f64>> = classes
        .iter()
        .map(|mu| (mu.clone(), lambdas.iter().map(|l| character(l, mu) as f64).collect()))
        .collect();
    let mut acc = vec![DMatrix::<f64>::zeros(dim, dim); lambdas.len()];
    for_each_permutation(n, |g| {
        let chi = &table[&cycle_type(g)];
        let map = factor_permutation_map(d, g);
        for (l, m) in acc.iter_mut().enumerate() {
            if chi[l] != 0.0 {
                for (i, &j) in map.iter().enumerate() {
                    m[(j, i)] += chi[l];
                }
            }
        }
    });
    let identity: Vec<usize> = vec![1; n];
    let order = factorial(n) as f64;
    let blocks = lambdas
        .iter()
        .zip(acc)
        .map(|(lambda, m)| {
            let dim_lambda = character(lambda, &identity) as f64;
            let projector = HermMat::new(m.map(|x| c(x * dim_lambda / order)))?;
            let block_dim = projector.trace().round() as usize;
            Ok(IsotypicBlock { partition: lambda.clone(), projector, block_dim })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(IsotypicDecomp { n, d, blocks: blocks.into_iter().filter(|b| b.block_dim > 0).collect() })
}

/// Equal mixture of the normalized isotypic projectors.
#[derive(Clone, Debug)]
pub struct UniversalState {
    pub mat: DensityMat,
}

impl UniversalState {
    /// Largest entry of `[ρ, U_τ]` over the adjacent transpositions `τ`.
    pub fn permutation_defect(&self, n: usize, d: usize) -> Result<f64> {
        let mut worst = 0.0f64;
        for k in 0..n.saturating_sub(1) {
            let mut perm: Vec<usize> = (0..n).collect();
            perm.swap(k, k + 1);
            let moved = permute_factors(self.mat.herm(), d, &perm)?;
            worst = worst.max(moved.max_abs_diff(self.mat.herm()));
        }
        Ok(worst)
    }
}

fn univ_cache() -> &'static Mutex<HashMap<(usize, usize), HermMat>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), HermMat>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn univ_matrix(n: usize, d: usize) -> Result<HermMat> {
    if let Some(m) = univ_cache().lock().expect("cache lock").get(&(n, d)) {
        return Ok(m.clone());
    }
    let iso = isotypic(n, d)?;
    let dim = d.pow(n as u32);
    let w = 1.0 / iso.blocks.len() as f64;
    let mut acc = HermMat::zeros(dim);
    for b in &iso.blocks {
        acc = &acc + &b.projector.scale(w / b.block_dim as f64);
    }
    univ_cache().lock().expect("cache lock").insert((n, d), acc.clone());
    Ok(acc)
}

pub fn rho_univ(n: usize, d: usize) -> Result<UniversalState> {
    Ok(UniversalState { mat: DensityMat::new(univ_matrix(n, d)?)? })
}

/// Tensor product of universal states, one per group of equal symbols, moved back
/// to the positions where the symbols occur.
pub fn rho_of_word(word: &[usize], d: usize) -> Result<DensityMat> {
    let n = word.len();
    if n == 0 {
        return Err(Error::InvalidParameter("empty word".into()));
    }
    check_dim(d.checked_pow(n as u32).ok_or(Error::SizeCap(usize::MAX))?)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| word[i]);
    let mut factors = Vec::new();
    let mut start = 0;
    while start < n {
        let sym = word[order[start]];
        let len = order[start..].iter().take_while(|&&i| word[i] == sym).count();
        factors.push(univ_matrix(len, d)?);
        start += len;
    }
    let sorted = tensor_all(&factors)?;
    DensityMat::new(permute_factors(&sorted, d, &order)?)
}

// ---------------------------------------------------------------------------
// Commuting families

/// Orthonormal basis diagonalizing every operator in `ops`, which must commute, with
/// the diagonal of each operator in that basis.
struct CommonBasis {
    vectors: CMat,
    values: Vec<Vec<f64>>,
}

fn mixing_weights(count: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    (0..count).map(|_| rng.gen_range(1.0..2.0)).collect()
}

fn scale_of(m: &HermMat) -> f64 {
    m.matrix().iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE)
}

fn common_basis(ops: &[&HermMat]) -> Result<CommonBasis> {
    let dim = ops[0].dim();
    let weights = mixing_weights(ops.len());
    let mut mix = HermMat::zeros(dim);
    for (w, op) in weights.iter().zip(ops) {
        mix = &mix + &op.scale(w / scale_of(op));
    }
    let e = eigh(&mix);
    let mut vectors = e.vectors;
    let mut start = 0;
    while start < dim {
        let mut end = start + 1;
        while end < dim && e.values[end] - e.values[end - 1] <= CLUSTER_TOL {
            end += 1;
        }
        if end - start > 1 {
            refine_cluster(&mut vectors, start, end, ops);
        }
        start = end;
    }
    let mut values = Vec::with_capacity(ops.len());
    for op in ops {
        let rotated = vectors.adjoint() * op.matrix() * &vectors;
        let off = (0..dim)
            .flat_map(|i| (0..dim).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| rotated[(i, j)].norm())
            .fold(0.0, f64::max);
        if off > COMMUTE_TOL * scale_of(op).max(1.0) {
            return Err(Error::Numerical(format!("operators do not commute (off-diagonal {off:.3e})")));
        }
        values.push((0..dim).map(|i| rotated[(i, i)].re).collect());
    }
    Ok(CommonBasis { vectors, values })
}

/// Diagonalizes each operator in turn on a degenerate cluster of the mixed operator.
fn refine_cluster(vectors: &mut CMat, start: usize, end: usize, ops: &[&HermMat]) {
    let sub = vectors.columns(start, end - start).into_owned();
    let mut basis = sub;
    for op in ops {
        let restricted = HermMat::symmetrized(basis.adjoint() * op.matrix() * &basis);
        let e = eigh(&restricted);
        basis = &basis * e.vectors;
    }
    vectors.columns_mut(start, end - start).copy_from(&basis);
}

impl CommonBasis {
    /// Indicator of `a - c b >= 0` per basis vector, ties included.
    fn geq(&self, a: usize, b: usize, c: f64) -> Vec<bool> {
        self.values[a].iter().zip(&self.values[b]).map(|(&x, &y)| x - c * y >= -TIE_TOL).collect()
    }

    fn projector(&self, mask: &[bool]) -> HermMat {
        let mut kept = self.vectors.clone();
        for (k, &on) in mask.iter().enumerate() {
            if !on {
                kept.column_mut(k).fill(c(0.0));
            }
        }
        HermMat::symmetrized(&kept * self.vectors.adjoint())
    }
}

fn and(a: &[bool], b: &[bool]) -> Vec<bool> {
    a.iter().zip(b).map(|(&x, &y)| x && y).collect()
}

// ---------------------------------------------------------------------------
// Decoders

/// Positive numbers added to the rates in the decoder thresholds
/// `C1 = exp(n (R_B + r_b))` and `C2 = exp(n (R_A + r_a))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecoderSlacks {
    pub r_a: f64,
    pub r_b: f64,
}

impl Default for DecoderSlacks {
    fn default() -> Self {
        DecoderSlacks { r_a: 0.01, r_b: 0.01 }
    }
}

/// Square-root measurement. `elements[m]` decodes message `m`; `erasure` is the
/// projector onto the kernel of `Σ projections`, so that the whole family sums to
/// the identity.
#[derive(Clone, Debug)]
pub struct DecoderPOVM {
    pub elements: Vec<HermMat>,
    pub erasure: HermMat,
    /// The projections the square-root measurement was built from.
    pub projections: Vec<HermMat>,
}

impl DecoderPOVM {
    pub fn trivial(dim: usize) -> Self {
        DecoderPOVM {
            elements: vec![HermMat::identity(dim)],
            erasure: HermMat::zeros(dim),
            projections: vec![HermMat::identity(dim)],
        }
    }

    pub fn from_projections(projections: Vec<HermMat>) -> Result<Self> {
        let dim = projections.first().map(|p| p.dim()).ok_or_else(|| Error::InvalidParameter("no messages".into()))?;
        if projections.len() == 1 {
            return Ok(Self::trivial(dim));
        }
        let mut s = HermMat::zeros(dim);
        for p in &projections {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: p.dim() });
            }
            s = &s + p;
        }
        let e = eigh(&s);
        let cut = S_SUPPORT_TOL * e.values.last().copied().unwrap_or(0.0).max(1.0);
        let inv_sqrt = e.apply(|l| if l > cut { 1.0 / l.sqrt() } else { 0.0 });
        let kernel = e.apply(|l| if l > cut { 0.0 } else { 1.0 });
        let elements = projections.iter().map(|p| p.sandwich(&inv_sqrt)).collect();
        Ok(DecoderPOVM { elements, erasure: kernel, projections })
    }

    pub fn dim(&self) -> usize {
        self.erasure.dim()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Largest entry of `Σ D_m + E - I`.
    pub fn completeness_error(&self) -> f64 {
        let mut sum = self.erasure.clone();
        for d in &self.elements {
            sum = &sum + d;
        }
        sum.max_abs_diff(&HermMat::identity(self.dim()))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.elements.iter().chain([&self.erasure]).map(|d| d.min_eigenvalue()).fold(f64::INFINITY, f64::min)
    }

    pub fn validate(&self) -> Result<()> {
        let gap = self.completeness_error();
        if gap > 1e-8 {
            return Err(Error::Numerical(format!("POVM sums to identity only within {gap:.3e}")));
        }
        let lo = self.min_eigenvalue();
        if lo < -1e-9 {
            return Err(Error::Numerical(format!("POVM element with eigenvalue {lo:.3e}")));
        }
        Ok(())
    }
}

fn code_rates(code: &PackedCode) -> Result<(f64, f64)> {
    match code.rates.as_slice() {
        [ra, rb] => Ok((*ra, *rb)),
        _ => Err(Error::InvalidParameter("code needs two rates".into())),
    }
}

fn check_decoder_dim(d: usize, n: usize) -> Result<usize> {
    let dim = d.checked_pow(n as u32).ok_or(Error::SizeCap(usize::MAX))?;
    if dim > MAX_DECODER_DIM {
        return Err(Error::SizeCap(dim));
    }
    Ok(dim)
}

fn joint_labels(outer: &[usize], inner: &[usize], inner_size: usize) -> Vec<usize> {
    outer.iter().zip(inner).map(|(&o, &i)| o * inner_size + i).collect()
}

/// Decoders of the two receivers of a superposition code: receiver Y over pairs
/// `(j, k)` flattened as `j * K + k`, receiver Z over clouds `j`.
pub fn build_bcd_decoders(pair: &BCDPair, code: &PackedCode, slacks: DecoderSlacks) -> Result<(DecoderPOVM, DecoderPOVM)> {
    if code.setting != Setting::Superposition {
        return Err(Error::InvalidParameter("BCD decoders need a superposition code".into()));
    }
    let n = code.n;
    let (ru, rx) = code_rates(code)?;
    let c1 = (n as f64 * (rx + slacks.r_b)).exp();
    let c2 = (n as f64 * (ru + slacks.r_a)).exp();
    let kx = pair.input_size();
    let (dy, dz) = (pair.w_y.out_dim(), pair.w_z.out_dim());
    check_decoder_dim(dy, n)?;
    check_decoder_dim(dz, n)?;
    let k_count = code.satellites_per_cloud();

    let univ_y = univ_matrix(n, dy)?;
    let mut pis_y = Vec::with_capacity(code.codewords.len());
    for (j, u) in code.clouds.iter().enumerate() {
        let rho_u = rho_of_word(u, dy)?.into_herm();
        for k in 0..k_count {
            let rho_x = rho_of_word(&joint_labels(u, code.satellite(j, k), kx), dy)?.into_herm();
            let basis = common_basis(&[&rho_x, &rho_u, &univ_y])?;
            pis_y.push(basis.projector(&and(&basis.geq(0, 1, c1), &basis.geq(1, 2, c2))));
        }
    }
    let univ_z = univ_matrix(n, dz)?;
    let mut pis_z = Vec::with_capacity(code.clouds.len());
    for u in &code.clouds {
        let rho_u = rho_of_word(u, dz)?.into_herm();
        let basis = common_basis(&[&rho_u, &univ_z])?;
        pis_z.push(basis.projector(&basis.geq(0, 1, c2)));
    }
    Ok((DecoderPOVM::from_projections(pis_y)?, DecoderPOVM::from_projections(pis_z)?))
}

/// Square-root measurement for a single-sender code over `{ρ_x ≥ exp(n (R + r_a)) ρ_Univ}`.
pub fn build_single_decoder(w: &CQChannel, code: &PackedCode, slacks: DecoderSlacks) -> Result<DecoderPOVM> {
    if code.setting != Setting::Single {
        return Err(Error::InvalidParameter("single decoder needs a single-sender code".into()));
    }
    let n = code.n;
    let d = w.out_dim();
    check_decoder_dim(d, n)?;
    let rate = code.rates.first().copied().unwrap_or(0.0);
    let threshold = (n as f64 * (rate + slacks.r_a)).exp();
    let univ = univ_matrix(n, d)?;
    let mut pis = Vec::with_capacity(code.codewords.len());
    for x in &code.codewords {
        let rho_x = rho_of_word(x, d)?.into_herm();
        let basis = common_basis(&[&rho_x, &univ])?;
        pis.push(basis.projector(&basis.geq(0, 1, threshold)));
    }
    DecoderPOVM::from_projections(pis)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MacMode {
    /// Square-root measurement over `Π^(1) Π^(2)`.
    Joint,
    /// One measurement per sender, from `Π^(1) Π^(3)` and `Π^(4) Π^(3)`.
    Separate,
    /// Square-root measurement over `Π^(1) Π^(3)`.
    Alt,
}

#[derive(Clone, Debug)]
pub enum MacDecoders {
    /// Over pairs `(j, k)` flattened as `j * M_B + k`.
    Joint(DecoderPOVM),
    Separate { a: DecoderPOVM, b: DecoderPOVM },
}

/// Products of the per-message projections of a MAC code.
struct MacProjections {
    /// `Π^(1) Π^(2)`
    joint: HermMat,
    /// `Π^(1) Π^(3)`
    alt: HermMat,
    /// `Π^(4) Π^(3)`, only for separate decoding
    a_side: Option<HermMat>,
}

struct MacContext<'a> {
    code: &'a PackedCode,
    d: usize,
    a_size: usize,
    b_size: usize,
    c1: f64,
    c2: f64,
    univ: HermMat,
}

impl<'a> MacContext<'a> {
    fn new(code: &'a PackedCode, mac: &MACChannel, slacks: DecoderSlacks) -> Result<Self> {
        if code.setting != Setting::Mac {
            return Err(Error::InvalidParameter("MAC decoders need a MAC code".into()));
        }
        let n = code.n;
        let d = mac.out_dim();
        check_decoder_dim(d, n)?;
        let (ra, rb) = code_rates(code)?;
        let univ = rho_of_word(&code.t_sequence, d)?.into_herm();
        Ok(MacContext {
            code,
            d,
            a_size: mac.a_size(),
            b_size: mac.b_size(),
            c1: (n as f64 * (rb + slacks.r_b)).exp(),
            c2: (n as f64 * (ra + slacks.r_a)).exp(),
            univ,
        })
    }

    /// Common eigenbases of `(ρ_ab, ρ_a, ρ_T)` and `(ρ_ab, ρ_b, ρ_T)`, all words
    /// labelled jointly with the time-sharing sequence.
    fn bases(&self, j: usize, k: usize, with_b: bool) -> Result<(CommonBasis, Option<CommonBasis>)> {
        let t = &self.code.t_sequence;
        let ta = joint_labels(t, &self.code.codewords[j], self.a_size);
        let tb = joint_labels(t, &self.code.b_codewords[k], self.b_size);
        let tab = joint_labels(&ta, &self.code.b_codewords[k], self.b_size);
        let rho_ab = rho_of_word(&tab, self.d)?.into_herm();
        let rho_a = rho_of_word(&ta, self.d)?.into_herm();
        let basis_a = common_basis(&[&rho_ab, &rho_a, &self.univ])?;
        let basis_b = if with_b {
            let rho_b = rho_of_word(&tb, self.d)?.into_herm();
            Some(common_basis(&[&rho_ab, &rho_b, &self.univ])?)
        } else {
            None
        };
        Ok((basis_a, basis_b))
    }

    fn projections(&self, j: usize, k: usize, with_b: bool) -> Result<MacProjections> {
        let (ba, bb) = self.bases(j, k, with_b)?;
        let m1 = ba.geq(0, 1, self.c1);
        let m2 = ba.geq(1, 2, self.c2);
        let m3 = ba.geq(0, 2, self.c1 * self.c2);
        let a_side = bb.map(|b| b.projector(&and(&b.geq(0, 1, self.c2), &b.geq(0, 2, self.c1 * self.c2))));
        Ok(MacProjections { joint: ba.projector(&and(&m1, &m2)), alt: ba.projector(&and(&m1, &m3)), a_side })
    }
}

pub fn build_mac_decoders(mac: &MACChannel, code: &PackedCode, slacks: DecoderSlacks, mode: MacMode) -> Result<MacDecoders> {
    let ctx = MacContext::new(code, mac, slacks)?;
    let (ma, mb) = (code.codewords.len(), code.b_codewords.len());
    match mode {
        MacMode::Joint | MacMode::Alt => {
            let mut pis = Vec::with_capacity(ma * mb);
            for j in 0..ma {
                for k in 0..mb {
                    let p = ctx.projections(j, k, false)?;
                    pis.push(if mode == MacMode::Joint { p.joint } else { p.alt });
                }
            }
            Ok(MacDecoders::Joint(DecoderPOVM::from_projections(pis)?))
        }
        MacMode::Separate => {
            let dim = ctx.univ.dim();
            let mut sum_a = vec![HermMat::zeros(dim); ma];
            let mut sum_b = vec![HermMat::zeros(dim); mb];
            for j in 0..ma {
                for k in 0..mb {
                    let p = ctx.projections(j, k, true)?;
                    sum_b[k] = &sum_b[k] + &p.alt;
                    sum_a[j] = &sum_a[j] + p.a_side.as_ref().expect("requested");
                }
            }
            Ok(MacDecoders::Separate { a: DecoderPOVM::from_projections(sum_a)?, b: DecoderPOVM::from_projections(sum_b)? })
        }
    }
}

/// Largest Frobenius norm of `[Π^(1)_{j,k}, Π^(4)_{j,k}]` over the messages of a
/// MAC code.
pub fn noncommutation_witness(mac: &MACChannel, code: &PackedCode, slacks: DecoderSlacks) -> Result<f64> {
    let ctx = MacContext::new(code, mac, slacks)?;
    let mut worst = 0.0f64;
    for j in 0..code.codewords.len() {
        for k in 0..code.b_codewords.len() {
            let (ba, bb) = ctx.bases(j, k, true)?;
            let bb = bb.expect("requested");
            let p1 = ba.projector(&ba.geq(0, 1, ctx.c1));
            let p4 = bb.projector(&bb.geq(0, 1, ctx.c2));
            let comm = p1.matrix() * p4.matrix() - p4.matrix() * p1.matrix();
            worst = worst.max(comm.norm());
        }
    }
    Ok(worst)
}

/// `D_{j,k} = (D^B_k)^{1/2} D^A_j (D^B_k)^{1/2}`, flattened as `j * M_B + k`.
pub fn convert_separate_to_joint(povm_a: &DecoderPOVM, povm_b: &DecoderPOVM) -> Result<DecoderPOVM> {
    let dim = povm_a.dim();
    if povm_b.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: povm_b.dim() });
    }
    let roots = povm_b.elements.iter().map(crate::qmat::psd_sqrt).collect::<Result<Vec<_>>>()?;
    let mut elements = Vec::with_capacity(povm_a.len() * povm_b.len());
    for da in &povm_a.elements {
        for r in &roots {
            elements.push(da.sandwich(r));
        }
    }
    let mut sum = HermMat::zeros(dim);
    for e in &elements {
        sum = &sum + e;
    }
    let erasure = &HermMat::identity(dim) - &sum;
    Ok(DecoderPOVM { elements, erasure, projections: vec![] })
}

// ---------------------------------------------------------------------------
// Error probabilities

fn check_shape(sent: &[HermMat], povm: &DecoderPOVM, targets: &[usize]) -> Result<()> {
    if sent.len() != targets.len() {
        return Err(Error::DimensionMismatch { expected: targets.len(), got: sent.len() });
    }
    if let Some(bad) = sent.iter().find(|s| s.dim() != povm.dim()) {
        return Err(Error::DimensionMismatch { expected: povm.dim(), got: bad.dim() });
    }
    if let Some(&t) = targets.iter().find(|&&t| t >= povm.len()) {
        return Err(Error::DimensionMismatch { expected: povm.len(), got: t + 1 });
    }
    Ok(())
}

/// Average of `1 - Tr W_i D_{targets[i]}` over the sent states.
pub fn error_probability_with_targets(sent: &[HermMat], targets: &[usize], povm: &DecoderPOVM) -> Result<f64> {
    check_shape(sent, povm, targets)?;
    if sent.is_empty() {
        return Ok(0.0);
    }
    let total: f64 = sent.iter().zip(targets).map(|(w, &t)| 1.0 - w.inner(&povm.elements[t])).sum();
    Ok((total / sent.len() as f64).clamp(0.0, 1.0))
}

/// Average error when message `m` is sent as `sent[m]`.
pub fn error_probability(sent: &[HermMat], povm: &DecoderPOVM) -> Result<f64> {
    let targets: Vec<usize> = (0..sent.len()).collect();
    error_probability_with_targets(sent, &targets, povm)
}

/// Output states of receiver Y and Z for every `(j, k)` of a superposition code.
pub fn bcd_sent_states(pair: &BCDPair, code: &PackedCode) -> Result<(Vec<HermMat>, Vec<HermMat>)> {
    let y = code.codewords.iter().map(|x| pair.w_y.product_state(x)).collect::<Result<Vec<_>>>()?;
    let z = code.codewords.iter().map(|x| pair.w_z.product_state(x)).collect::<Result<Vec<_>>>()?;
    Ok((y, z))
}

/// `(ε_Y, ε_Z)` of a superposition code under the given decoders.
pub fn bcd_error_probabilities(pair: &BCDPair, code: &PackedCode, povm_y: &DecoderPOVM, povm_z: &DecoderPOVM) -> Result<(f64, f64)> {
    let (y, z) = bcd_sent_states(pair, code)?;
    let k_count = code.satellites_per_cloud().max(1);
    let clouds: Vec<usize> = (0..z.len()).map(|m| m / k_count).collect();
    Ok((error_probability(&y, povm_y)?, error_probability_with_targets(&z, &clouds, povm_z)?))
}

/// `W_{a(j), b(k)}` flattened as `j * M_B + k`.
pub fn mac_sent_states(mac: &MACChannel, code: &PackedCode) -> Result<Vec<HermMat>> {
    let mut out = Vec::with_capacity(code.codewords.len() * code.b_codewords.len());
    for a in &code.codewords {
        for b in &code.b_codewords {
            out.push(mac.product_state(a, b)?);
        }
    }
    Ok(out)
}

/// Error summary of a MAC decoder. For separate decoding `eps_a` and `eps_b` are the
/// per-sender errors and `eps` is the error of the converted joint measurement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MacErrors {
    pub eps: f64,
    pub eps_a: Option<f64>,
    pub eps_b: Option<f64>,
}

pub fn mac_error_probabilities(mac: &MACChannel, code: &PackedCode, decoders: &MacDecoders) -> Result<MacErrors> {
    let sent = mac_sent_states(mac, code)?;
    match decoders {
        MacDecoders::Joint(p) => Ok(MacErrors { eps: error_probability(&sent, p)?, eps_a: None, eps_b: None }),
        MacDecoders::Separate { a, b } => {
            let mb = code.b_codewords.len();
            let ta: Vec<usize> = (0..sent.len()).map(|m| m / mb).collect();
            let tb: Vec<usize> = (0..sent.len()).map(|m| m % mb).collect();
            let eps_a = error_probability_with_targets(&sent, &ta, a)?;
            let eps_b = error_probability_with_targets(&sent, &tb, b)?;
            let joint = convert_separate_to_joint(a, b)?;
            Ok(MacErrors { eps: error_probability(&sent, &joint)?, eps_a: Some(eps_a), eps_b: Some(eps_b) })
        }
    }
}

/// `ε_A + ε_B + 2 sqrt(ε_B)`.
pub fn gentle_bound(eps_a: f64, eps_b: f64) -> f64 {
    eps_a + eps_b + 2.0 * eps_b.max(0.0).sqrt()
}

/// Exact error next to the two terms of the square-root measurement bound
/// `ε <= 2 miss + 4 false_alarm`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HnReport {
    pub eps: f64,
    pub miss: f64,
    pub false_alarm: f64,
    pub holds: bool,
}

pub fn hayashi_nagaoka_check(sent: &[HermMat], povm: &DecoderPOVM) -> Result<HnReport> {
    let eps = error_probability(sent, povm)?;
    if povm.projections.len() != sent.len() {
        return Err(Error::DimensionMismatch { expected: sent.len(), got: povm.projections.len() });
    }
    let m = sent.len() as f64;
    let mut miss = 0.0;
    let mut false_alarm = 0.0;
    for (i, w) in sent.iter().enumerate() {
        miss += 1.0 - w.inner(&povm.projections[i]);
        for (l, p) in povm.projections.iter().enumerate() {
            if l != i {
                false_alarm += w.inner(p);
            }
        }
    }
    let (miss, false_alarm) = (miss / m, false_alarm / m);
    Ok(HnReport { eps, miss, false_alarm, holds: eps <= 2.0 * miss + 4.0 * false_alarm + 1e-10 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_counts() {
        assert_eq!(partitions(4, 4).len(), 5);
        assert_eq!(partitions(6, 2).len(), 4);
        assert_eq!(partitions(5, 1), vec![vec![5]]);
    }

    #[test]
    fn small_character_table() {
        // S_3: rows (3), (2,1), (1,1,1); columns 1^3, 2+1, 3.
        let classes = [vec![1, 1, 1], vec![2, 1], vec![3]];
        let table: Vec<Vec<i64>> = [vec![3], vec![2, 1], vec![1, 1, 1]]
            .iter()
            .map(|l| classes.iter().map(|m| character(l, m)).collect())
            .collect();
        assert_eq!(table, vec![vec![1, 1, 1], vec![2, 0, -1], vec![1, -1, 1]]);
    }

    #[test]
    fn permutation_count() {
        let mut count = 0;
        for_each_permutation(4, |_| count += 1);
        assert_eq!(count, 24);
    }

    #[test]
    fn qubit_pairs_split_three_one() {
        let iso = isotypic(2, 2).unwrap();
        let dims: Vec<usize> = iso.blocks.iter().map(|b| b.block_dim).collect();
        assert_eq!(dims, vec![3, 1]);
        assert!(iso.completeness_error() < 1e-9);
    }

    #[test]
    fn word_with_distinct_symbols_is_maximally_mixed() {
        let r = rho_of_word(&[0, 1], 2).unwrap();
        assert!(r.herm().max_abs_diff(&HermMat::identity(4).scale(0.25)) < 1e-12);
    }

    #[test]
    fn single_message_decoder_is_identity() {
        let p = DecoderPOVM::from_projections(vec![HermMat::zeros(4)]).unwrap();
        assert_eq!(p.elements[0], HermMat::identity(4));
        p.validate().unwrap();
    }
}
