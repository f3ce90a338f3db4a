//! Method of types: type and conditional-type classes, packing codebooks built by
//! random draws plus expurgation, and exact checks of the packing and
//! stabilizer-orbit inequalities.
//!
//! Sequences are `Vec<usize>` over alphabets `0..k`. Every check is exhaustive over
//! conditional types: a shell `T_V(x)` contributes only when it meets the codebook,
//! so it suffices to bucket the other codewords by their joint type with `x`.

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest number of types, codewords or candidates any routine will materialize.
pub const MAX_ENUMERATION: usize = 1_000_000;
/// Seeds tried by the packing constructors before giving up.
pub const PACK_ATTEMPTS: usize = 50;
const MARGIN_TOL: f64 = 1e-9;
const MAX_PAIR_WORK: usize = 250_000;

/// Symbol counts of a sequence of length `n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TypeVec {
    pub n: usize,
    pub counts: Vec<usize>,
}

impl TypeVec {
    pub fn new(counts: Vec<usize>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::InvalidParameter("a type needs a nonempty alphabet".into()));
        }
        Ok(TypeVec { n: counts.iter().sum(), counts })
    }

    pub fn of_sequence(seq: &[usize], alphabet: usize) -> Result<Self> {
        let mut counts = vec![0; alphabet];
        for &s in seq {
            *counts
                .get_mut(s)
                .ok_or_else(|| Error::InvalidParameter(format!("symbol {s} outside alphabet of size {alphabet}")))? += 1;
        }
        TypeVec::new(counts)
    }

    pub fn alphabet_size(&self) -> usize {
        self.counts.len()
    }

    pub fn probs(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64 / self.n as f64).collect()
    }

    /// Empirical entropy in nats.
    pub fn entropy(&self) -> f64 {
        entropy_of_counts(&self.counts)
    }

    /// `ln |T_P|`.
    pub fn class_size_ln(&self) -> f64 {
        multinomial_ln(&self.counts)
    }

    /// The sorted representative `0^{c_0} 1^{c_1} ...`.
    pub fn sorted_sequence(&self) -> Vec<usize> {
        self.counts.iter().enumerate().flat_map(|(s, &c)| std::iter::repeat(s).take(c)).collect()
    }
}

/// Conditional type: for each base symbol, the type of the second sequence on the
/// positions carrying that symbol. Equivalently a joint type with marginal `base`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CondType {
    pub base: TypeVec,
    pub rows: Vec<TypeVec>,
}

impl CondType {
    pub fn new(base: TypeVec, rows: Vec<TypeVec>) -> Result<Self> {
        if rows.len() != base.alphabet_size() {
            return Err(Error::DimensionMismatch { expected: base.alphabet_size(), got: rows.len() });
        }
        let k = rows[0].alphabet_size();
        for (x, r) in rows.iter().enumerate() {
            if r.n != base.counts[x] || r.alphabet_size() != k {
                return Err(Error::InvalidParameter(format!("row {x} does not match base count {}", base.counts[x])));
            }
        }
        Ok(CondType { base, rows })
    }

    /// Joint type of `(x_i, y_i)` read as a conditional type of `y` given `x`.
    pub fn of_pair(x: &[usize], y: &[usize], kx: usize, ky: usize) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch { expected: x.len(), got: y.len() });
        }
        let mut rows = vec![vec![0usize; ky]; kx];
        for (&a, &b) in x.iter().zip(y) {
            if a >= kx || b >= ky {
                return Err(Error::InvalidParameter("symbol outside alphabet".into()));
            }
            rows[a][b] += 1;
        }
        let rows: Vec<TypeVec> = rows.into_iter().map(TypeVec::new).collect::<Result<_>>()?;
        let base = TypeVec::new(rows.iter().map(|r| r.n).collect())?;
        CondType::new(base, rows)
    }

    pub fn output_size(&self) -> usize {
        self.rows[0].alphabet_size()
    }

    /// `ln |T_V(x)|` for any `x` of the base type.
    pub fn shell_size_ln(&self) -> f64 {
        self.rows.iter().map(|r| multinomial_ln(&r.counts)).sum()
    }

    /// Conditional entropy `H(Y|X)` of the joint type, in nats.
    pub fn cond_entropy(&self) -> f64 {
        let n = self.base.n as f64;
        self.rows.iter().map(|r| r.n as f64 / n * r.entropy()).sum()
    }

    /// Entropy of the joint type.
    pub fn joint_entropy(&self) -> f64 {
        self.base.entropy() + self.cond_entropy()
    }

    /// Whether `V(y|x) = delta_{x,y}` (same alphabets only).
    pub fn is_identical(&self) -> bool {
        self.rows.iter().enumerate().all(|(x, r)| r.counts.iter().enumerate().all(|(y, &c)| c == 0 || x == y))
    }

    /// Sorted base sequence and a matching second sequence, block by block.
    pub fn sorted_pair(&self) -> (Vec<usize>, Vec<usize>) {
        let x = self.base.sorted_sequence();
        let y = self.rows.iter().flat_map(|r| r.sorted_sequence()).collect();
        (x, y)
    }
}

fn entropy_of_counts(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n as f64;
            -p * p.ln()
        })
        .sum()
}

fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

fn multinomial_ln(counts: &[usize]) -> f64 {
    ln_factorial(counts.iter().sum()) - counts.iter().map(|&c| ln_factorial(c)).sum::<f64>()
}

fn binomial(n: usize, k: usize) -> Option<usize> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
        if r > usize::MAX as u128 {
            return None;
        }
    }
    Some(r as usize)
}

/// Number of types of length `n` over `k` symbols, `C(n+k-1, k-1)`.
pub fn type_count(n: usize, k: usize) -> Option<usize> {
    if k == 0 {
        return Some(0);
    }
    binomial(n + k - 1, k - 1)
}

/// All compositions of `n` into `alphabet_size` parts, in lexicographic order.
pub fn enum_types(n: usize, alphabet_size: usize) -> Result<Vec<TypeVec>> {
    if n == 0 || alphabet_size == 0 {
        return Err(Error::InvalidParameter("need n >= 1 and a nonempty alphabet".into()));
    }
    let count = type_count(n, alphabet_size).ok_or(Error::SizeCap(usize::MAX))?;
    if count > MAX_ENUMERATION {
        return Err(Error::SizeCap(count));
    }
    let mut out = Vec::with_capacity(count);
    let mut cur = vec![0usize; alphabet_size];
    fn rec(i: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<TypeVec>) {
        if i + 1 == cur.len() {
            cur[i] = left;
            out.push(TypeVec { n: cur.iter().sum(), counts: cur.clone() });
            return;
        }
        for c in (0..=left).rev() {
            cur[i] = c;
            rec(i + 1, left - c, cur, out);
        }
    }
    rec(0, n, &mut cur, &mut out);
    Ok(out)
}

/// Codebook size `ceil(exp(n R - c n^{3/4}))`.
pub fn codebook_size(n: usize, rate: f64, slack: f64) -> Result<usize> {
    if !(rate.is_finite() && slack.is_finite()) || rate < 0.0 || slack < 0.0 {
        return Err(Error::InvalidParameter("rate and slack must be finite and nonnegative".into()));
    }
    let v = (n as f64 * rate - slack * (n as f64).powf(0.75)).exp().ceil();
    if v < 1.0 {
        return Err(Error::Precondition(format!(
            "codebook size rounds to {v}; lower the slack exponent or raise the rate"
        )));
    }
    if v > MAX_ENUMERATION as f64 {
        return Err(Error::SizeCap(v.min(usize::MAX as f64) as usize));
    }
    Ok(v as usize)
}

/// Slack exponent `c` for which a codebook of `size` words at `rate` satisfies
/// `1/size <= exp(-n R + c n^{3/4})`.
fn implied_slack(n: usize, rate: f64, size: usize) -> f64 {
    ((n as f64 * rate - (size as f64).ln()) / (n as f64).powf(0.75)).max(0.0)
}

// ---------------------------------------------------------------------------
// Shell bookkeeping

fn pack_symbols(parts: &[&[usize]], i: usize) -> usize {
    parts.iter().fold(0usize, |acc, p| (acc << 16) | p[i])
}

/// Joint-type key of a tuple of base sequences against a tuple of other sequences.
fn shell_key(base: &[&[usize]], other: &[&[usize]]) -> Vec<(usize, usize, usize)> {
    let n = base[0].len();
    let mut m: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for i in 0..n {
        *m.entry((pack_symbols(base, i), pack_symbols(other, i))).or_default() += 1;
    }
    m.into_iter().map(|((a, b), c)| (a, b, c)).collect()
}

fn shell_ln(key: &[(usize, usize, usize)]) -> f64 {
    let mut rows: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &(a, _, c) in key {
        rows.entry(a).or_default().push(c);
    }
    rows.values().map(|r| multinomial_ln(r)).sum()
}

/// One family of packing inequalities evaluated around one base point.
struct ShellCheck {
    /// `n (H - R)`
    exponent: f64,
    worst: f64,
    /// Identifiers of members in violating shells.
    blamed: Vec<usize>,
}

impl ShellCheck {
    fn new(exponent: f64) -> Self {
        ShellCheck { exponent, worst: 0.0, blamed: Vec::new() }
    }

    fn run<'a>(&mut self, base: &[&[usize]], others: impl Iterator<Item = (usize, Vec<&'a [usize]>)>) -> bool {
        let mut shells: HashMap<Vec<(usize, usize, usize)>, Vec<usize>> = HashMap::new();
        for (id, seqs) in others {
            shells.entry(shell_key(base, &seqs)).or_default().push(id);
        }
        let mut violated = false;
        for (key, ids) in shells {
            let margin = ((ids.len() as f64).ln() - shell_ln(&key) + self.exponent).exp();
            self.worst = self.worst.max(margin);
            if margin > 1.0 + MARGIN_TOL {
                violated = true;
                self.blamed.extend(ids);
            }
        }
        violated
    }
}

// ---------------------------------------------------------------------------
// Codes

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Setting {
    Single,
    Superposition,
    Mac,
}

/// A packed codebook with its certificate.
///
/// * single: `codewords` are the `x(j)`.
/// * superposition: `clouds` are the `u(j)`, and `codewords` lists the satellites
///   `x(j,k)` cloud by cloud.
/// * mac: `codewords` are the `a(j)`, `b_codewords` the `b(k)`, both conditioned on
///   `t_sequence`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PackedCode {
    pub setting: Setting,
    pub n: usize,
    pub codewords: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub clouds: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub b_codewords: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub t_sequence: Vec<usize>,
    /// Rates in nats: `[R]`, `[R_U, R_X]` or `[R_A, R_B]`.
    pub rates: Vec<f64>,
    /// The constant `c` in the `exp(-c n^{3/4})` size discount.
    pub slack: f64,
    /// Worst ratio of left to right side per inequality family; at most one.
    pub margins: BTreeMap<String, f64>,
    pub seed: u64,
}

impl PackedCode {
    /// A single-terminal code from explicit codewords, certified by the verifier.
    pub fn single_from_codewords(codewords: Vec<Vec<usize>>, rate: f64, slack: f64) -> Result<Self> {
        let n = codewords.first().map(|c| c.len()).ok_or_else(|| Error::InvalidParameter("empty codebook".into()))?;
        let mut code = PackedCode {
            setting: Setting::Single,
            n,
            codewords,
            clouds: vec![],
            b_codewords: vec![],
            t_sequence: vec![],
            rates: vec![rate],
            slack,
            margins: BTreeMap::new(),
            seed: 0,
        };
        check_same_type(&code.codewords)?;
        code.margins = verify_packing(&code)?;
        Ok(code)
    }

    /// Number of satellites per cloud (superposition codes).
    pub fn satellites_per_cloud(&self) -> usize {
        if self.clouds.is_empty() {
            0
        } else {
            self.codewords.len() / self.clouds.len()
        }
    }

    pub fn satellite(&self, j: usize, k: usize) -> &[usize] {
        &self.codewords[j * self.satellites_per_cloud() + k]
    }

    /// Message counts per terminal: `[M]`, `[M_U, M_X]` or `[M_A, M_B]`.
    pub fn message_counts(&self) -> Vec<usize> {
        match self.setting {
            Setting::Single => vec![self.codewords.len()],
            Setting::Superposition => vec![self.clouds.len(), self.satellites_per_cloud()],
            Setting::Mac => vec![self.codewords.len(), self.b_codewords.len()],
        }
    }

    pub fn passes(&self) -> bool {
        self.margins.values().all(|&m| m <= 1.0 + MARGIN_TOL)
    }
}

fn check_same_type(words: &[Vec<usize>]) -> Result<()> {
    let k = words.iter().flatten().copied().max().unwrap_or(0) + 1;
    let t0 = TypeVec::of_sequence(&words[0], k)?;
    for w in words {
        if TypeVec::of_sequence(w, k)? != t0 {
            return Err(Error::InvalidParameter("codewords must share one type".into()));
        }
    }
    Ok(())
}

fn entropy_of_seq(seq: &[usize]) -> f64 {
    let k = seq.iter().max().map_or(1, |m| m + 1);
    TypeVec::of_sequence(seq, k).map(|t| t.entropy()).unwrap_or(0.0)
}

fn cond_entropy_of(given: &[usize], seq: &[usize]) -> f64 {
    let kx = given.iter().max().map_or(1, |m| m + 1);
    let ky = seq.iter().max().map_or(1, |m| m + 1);
    CondType::of_pair(given, seq, kx, ky).map(|v| v.cond_entropy()).unwrap_or(0.0)
}

// ---------------------------------------------------------------------------
// Verification

struct SingleReport {
    check: ShellCheck,
    blame: Vec<usize>,
}

fn check_single(words: &[Vec<usize>], n: usize, rate: f64) -> SingleReport {
    let h = entropy_of_seq(&words[0]);
    let mut check = ShellCheck::new(n as f64 * (h - rate));
    let mut blame = vec![0usize; words.len()];
    for (i, x) in words.iter().enumerate() {
        let start = check.blamed.len();
        let others = words.iter().enumerate().filter(|(j, _)| *j != i).map(|(j, w)| (j, vec![w.as_slice()]));
        if check.run(&[x], others) {
            blame[i] += 1;
        }
        for &j in &check.blamed[start..] {
            blame[j] += 1;
        }
    }
    SingleReport { check, blame }
}

struct SuperReport {
    cloud: ShellCheck,
    satellite: ShellCheck,
    joint: ShellCheck,
    cloud_blame: Vec<usize>,
    sat_blame: Vec<Vec<usize>>,
}

/// With `staged`, later families are skipped once an earlier one has a violation,
/// which is all the expurgation loop needs.
fn check_superposition(clouds: &[Vec<usize>], sats: &[Vec<Vec<usize>>], n: usize, rate_u: f64, rate_x: f64, staged: bool) -> SuperReport {
    let h_u = entropy_of_seq(&clouds[0]);
    let h_x_u = cond_entropy_of(&clouds[0], &sats[0][0]);
    let nf = n as f64;
    let mut cloud = ShellCheck::new(nf * (h_u - rate_u));
    let mut satellite = ShellCheck::new(nf * (h_x_u - rate_x));
    let mut joint = ShellCheck::new(nf * (h_u + h_x_u - rate_u - rate_x));
    let mut cloud_blame = vec![0usize; clouds.len()];
    let mut sat_blame: Vec<Vec<usize>> = sats.iter().map(|s| vec![0; s.len()]).collect();
    let kx: usize = sats.iter().map(|s| s.len()).max().unwrap_or(1);

    for (j, u) in clouds.iter().enumerate() {
        let start = cloud.blamed.len();
        let others = clouds.iter().enumerate().filter(|(i, _)| *i != j).map(|(i, w)| (i, vec![w.as_slice()]));
        if cloud.run(&[u], others) {
            cloud_blame[j] += 1;
        }
        for &i in &cloud.blamed[start..] {
            cloud_blame[i] += 1;
        }
    }
    if staged && !cloud.blamed.is_empty() {
        return SuperReport { cloud, satellite, joint, cloud_blame, sat_blame };
    }
    for (j, u) in clouds.iter().enumerate() {
        for (k, x) in sats[j].iter().enumerate() {
            let start = satellite.blamed.len();
            let others = sats[j].iter().enumerate().filter(|(i, _)| *i != k).map(|(i, w)| (i, vec![w.as_slice()]));
            if satellite.run(&[u, x], others) {
                sat_blame[j][k] += 1;
            }
            for &i in &satellite.blamed[start..] {
                sat_blame[j][i] += 1;
            }
        }
    }
    if staged && !satellite.blamed.is_empty() {
        return SuperReport { cloud, satellite, joint, cloud_blame, sat_blame };
    }
    for (j, u) in clouds.iter().enumerate() {
        for (k, x) in sats[j].iter().enumerate() {
            let start = joint.blamed.len();
            let others = clouds
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != j)
                .flat_map(|(i, u2)| sats[i].iter().enumerate().map(move |(k2, x2)| (i * kx + k2, vec![u2.as_slice(), x2.as_slice()])));
            if joint.run(&[u, x], others) {
                sat_blame[j][k] += 1;
            }
            for &id in &joint.blamed[start..] {
                sat_blame[id / kx][id % kx] += 1;
            }
        }
    }
    SuperReport { cloud, satellite, joint, cloud_blame, sat_blame }
}

struct MacReport {
    pair: ShellCheck,
    b_given_a: ShellCheck,
    a_given_b: ShellCheck,
    a_blame: Vec<usize>,
    b_blame: Vec<usize>,
}

fn check_mac(t: &[usize], a_words: &[Vec<usize>], b_words: &[Vec<usize>], n: usize, rate_a: f64, rate_b: f64, staged: bool) -> MacReport {
    let h_a = cond_entropy_of(t, &a_words[0]);
    let h_b = cond_entropy_of(t, &b_words[0]);
    let nf = n as f64;
    let mut pair = ShellCheck::new(nf * (h_a + h_b - rate_a - rate_b));
    let mut b_given_a = ShellCheck::new(nf * (h_b - rate_b));
    let mut a_given_b = ShellCheck::new(nf * (h_a - rate_a));
    let mut a_blame = vec![0usize; a_words.len()];
    let mut b_blame = vec![0usize; b_words.len()];
    let kb = b_words.len();
    for (ia, a) in a_words.iter().enumerate() {
        for (ib, b) in b_words.iter().enumerate() {
            let base: [&[usize]; 3] = [a, b, t];
            let start = b_given_a.blamed.len();
            let others = b_words.iter().enumerate().filter(|(k, _)| *k != ib).map(|(k, w)| (k, vec![w.as_slice()]));
            if b_given_a.run(&base, others) {
                b_blame[ib] += 1;
            }
            for &k in &b_given_a.blamed[start..] {
                b_blame[k] += 1;
            }
            let start = a_given_b.blamed.len();
            let others = a_words.iter().enumerate().filter(|(i, _)| *i != ia).map(|(i, w)| (i, vec![w.as_slice()]));
            if a_given_b.run(&base, others) {
                a_blame[ia] += 1;
            }
            for &i in &a_given_b.blamed[start..] {
                a_blame[i] += 1;
            }
        }
    }
    if staged && !(a_given_b.blamed.is_empty() && b_given_a.blamed.is_empty()) {
        return MacReport { pair, b_given_a, a_given_b, a_blame, b_blame };
    }
    for (ia, a) in a_words.iter().enumerate() {
        for (ib, b) in b_words.iter().enumerate() {
            let base: [&[usize]; 3] = [a, b, t];
            let start = pair.blamed.len();
            let others = a_words.iter().enumerate().filter(|(i, _)| *i != ia).flat_map(|(i, a2)| {
                b_words.iter().enumerate().filter(|(k, _)| *k != ib).map(move |(k, b2)| (i * kb + k, vec![a2.as_slice(), b2.as_slice()]))
            });
            if pair.run(&base, others) {
                a_blame[ia] += 1;
                b_blame[ib] += 1;
            }
            for &id in &pair.blamed[start..] {
                a_blame[id / kb] += 1;
                b_blame[id % kb] += 1;
            }
        }
    }
    MacReport { pair, b_given_a, a_given_b, a_blame, b_blame }
}

/// Guards the quadratic joint checks against pools that would take minutes.
fn check_pair_work(items: usize) -> Result<()> {
    if items.saturating_mul(items) > MAX_PAIR_WORK {
        return Err(Error::SizeCap(items));
    }
    Ok(())
}

fn rate_at(code: &PackedCode, i: usize) -> Result<f64> {
    code.rates.get(i).copied().ok_or_else(|| Error::InvalidParameter(format!("code is missing rate #{i}")))
}

/// Recomputes every packing inequality of `code` from scratch and returns the worst
/// margin (left side over right side) per family.
pub fn verify_packing(code: &PackedCode) -> Result<BTreeMap<String, f64>> {
    let mut m = BTreeMap::new();
    match code.setting {
        Setting::Single => {
            let r = check_single(&code.codewords, code.n, rate_at(code, 0)?);
            m.insert("codeword".to_string(), r.check.worst);
        }
        Setting::Superposition => {
            let (clouds, sats) = split_superposition(code)?;
            let r = check_superposition(&clouds, &sats, code.n, rate_at(code, 0)?, rate_at(code, 1)?, false);
            m.insert("cloud".to_string(), r.cloud.worst);
            m.insert("satellite".to_string(), r.satellite.worst);
            m.insert("joint".to_string(), r.joint.worst);
        }
        Setting::Mac => {
            let r = check_mac(&code.t_sequence, &code.codewords, &code.b_codewords, code.n, rate_at(code, 0)?, rate_at(code, 1)?, false);
            m.insert("pair".to_string(), r.pair.worst);
            m.insert("b_given_a".to_string(), r.b_given_a.worst);
            m.insert("a_given_b".to_string(), r.a_given_b.worst);
        }
    }
    Ok(m)
}

fn split_superposition(code: &PackedCode) -> Result<(Vec<Vec<usize>>, Vec<Vec<Vec<usize>>>)> {
    let per = code.satellites_per_cloud();
    if per == 0 || per * code.clouds.len() != code.codewords.len() {
        return Err(Error::InvalidParameter("satellite count is not a multiple of the cloud count".into()));
    }
    Ok((code.clouds.clone(), code.codewords.chunks(per).map(|c| c.to_vec()).collect()))
}

// ---------------------------------------------------------------------------
// Sampling

/// Up to `want` distinct random words of the same composition as `base`, permuting
/// only inside each block of positions listed in `blocks`.
fn draw_distinct(base: &[usize], blocks: &[Vec<usize>], want: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut misses = 0;
    while out.len() < want && misses < 200 * want.max(1) {
        let mut w = base.to_vec();
        for block in blocks {
            let mut vals: Vec<usize> = block.iter().map(|&i| w[i]).collect();
            vals.shuffle(rng);
            for (&i, v) in block.iter().zip(vals) {
                w[i] = v;
            }
        }
        if seen.insert(w.clone()) {
            out.push(w);
            misses = 0;
        } else {
            misses += 1;
        }
    }
    out
}

fn positions_by_symbol(seq: &[usize]) -> Vec<Vec<usize>> {
    let k = seq.iter().max().map_or(0, |m| m + 1);
    let mut blocks = vec![Vec::new(); k];
    for (i, &s) in seq.iter().enumerate() {
        blocks[s].push(i);
    }
    blocks
}

fn class_size(ln: f64) -> usize {
    if ln > (MAX_ENUMERATION as f64).ln() {
        MAX_ENUMERATION
    } else {
        ln.exp().round() as usize
    }
}

fn oversample(m: usize) -> usize {
    (2 * m).max(m + 4)
}

fn argmax(blame: &[usize]) -> Option<usize> {
    let (i, &b) = blame.iter().enumerate().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))?;
    (b > 0).then_some(i)
}

fn failure(reason: String) -> Error {
    Error::PackingFailed { attempts: PACK_ATTEMPTS, reason }
}

// ---------------------------------------------------------------------------
// Single terminal

/// Packing codebook in the type class of `ty` with size `ceil(exp(nR - c n^{3/4}))`.
pub fn pack_single(n: usize, ty: &TypeVec, rate: f64, slack: f64, seed: u64) -> Result<PackedCode> {
    let size = codebook_size(n, rate, slack)?;
    pack_single_inner(n, ty, size, rate, slack, seed)
}

/// Same construction with an explicit codebook size; the recorded slack is the
/// smallest one consistent with `size` and `rate`.
pub fn pack_single_sized(n: usize, ty: &TypeVec, size: usize, rate: f64, seed: u64) -> Result<PackedCode> {
    pack_single_inner(n, ty, size, rate, implied_slack(n, rate, size), seed)
}

fn pack_single_inner(n: usize, ty: &TypeVec, size: usize, rate: f64, slack: f64, seed: u64) -> Result<PackedCode> {
    if ty.n != n {
        return Err(Error::DimensionMismatch { expected: n, got: ty.n });
    }
    if !(rate < ty.entropy()) {
        return Err(Error::Precondition(format!("rate {rate} must be below the type entropy {}", ty.entropy())));
    }
    check_pair_work(oversample(size))?;
    if size == 0 || size > class_size(ty.class_size_ln()) {
        return Err(Error::Precondition(format!("cannot place {size} distinct words in the type class")));
    }
    let base = ty.sorted_sequence();
    let blocks = vec![(0..n).collect::<Vec<_>>()];
    let mut worst = String::new();
    for attempt in 0..PACK_ATTEMPTS as u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt));
        let mut words = if size == 1 { vec![base.clone()] } else { draw_distinct(&base, &blocks, oversample(size), &mut rng) };
        loop {
            if words.len() < size {
                break;
            }
            let r = check_single(&words, n, rate);
            match argmax(&r.blame) {
                None => {
                    words.truncate(size);
                    let mut code = PackedCode {
                        setting: Setting::Single,
                        n,
                        codewords: words,
                        clouds: vec![],
                        b_codewords: vec![],
                        t_sequence: vec![],
                        rates: vec![rate],
                        slack,
                        margins: BTreeMap::new(),
                        seed: seed.wrapping_add(attempt),
                    };
                    code.margins = verify_packing(&code)?;
                    return Ok(code);
                }
                Some(i) => {
                    worst = format!("codeword inequality, worst margin {:.4}", r.check.worst);
                    words.remove(i);
                }
            }
        }
    }
    Err(failure(worst))
}

// ---------------------------------------------------------------------------
// Superposition

/// Cloud centers in the class of `joint.base` and satellites in the conditional
/// classes given each center.
pub fn pack_superposition(n: usize, joint: &CondType, rate_u: f64, rate_x: f64, slack: f64, seed: u64) -> Result<PackedCode> {
    let mu = codebook_size(n, rate_u, slack)?;
    let mx = codebook_size(n, rate_x, slack)?;
    pack_superposition_inner(n, joint, [mu, mx], [rate_u, rate_x], slack, seed)
}

pub fn pack_superposition_sized(n: usize, joint: &CondType, sizes: [usize; 2], rate_u: f64, rate_x: f64, seed: u64) -> Result<PackedCode> {
    let slack = implied_slack(n, rate_u, sizes[0]).max(implied_slack(n, rate_x, sizes[1]));
    pack_superposition_inner(n, joint, sizes, [rate_u, rate_x], slack, seed)
}

fn pack_superposition_inner(n: usize, joint: &CondType, sizes: [usize; 2], rates: [f64; 2], slack: f64, seed: u64) -> Result<PackedCode> {
    if joint.base.n != n {
        return Err(Error::DimensionMismatch { expected: n, got: joint.base.n });
    }
    let (h_u, h_x_u) = (joint.base.entropy(), joint.cond_entropy());
    if !(rates[0] < h_u) || !(rates[1] < h_x_u) {
        return Err(Error::Precondition(format!("need R_U < {h_u} and R_X < {h_x_u}")));
    }
    let [mu, mx] = sizes;
    check_pair_work(oversample(mu) * oversample(mx))?;
    if mu == 0 || mx == 0 || mu > class_size(joint.base.class_size_ln()) || mx > class_size(joint.shell_size_ln()) {
        return Err(Error::Precondition("requested sizes exceed the type classes".into()));
    }
    let (u_base, x_base) = joint.sorted_pair();
    let mut worst = String::new();
    for attempt in 0..PACK_ATTEMPTS as u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt));
        // Each cloud is a random rearrangement of the sorted joint pair, so its first
        // satellite already has the joint type; the rest permute within u-blocks.
        let want = if mu == 1 { 1 } else { oversample(mu).min(class_size(joint.base.class_size_ln())) };
        let mut clouds: Vec<Vec<usize>> = Vec::new();
        let mut sats: Vec<Vec<Vec<usize>>> = Vec::new();
        let mut seen = HashSet::new();
        let mut misses = 0;
        while clouds.len() < want && misses < 200 * want {
            let mut order: Vec<usize> = (0..n).collect();
            if mu > 1 {
                order.shuffle(&mut rng);
            }
            let u: Vec<usize> = order.iter().map(|&i| u_base[i]).collect();
            if !seen.insert(u.clone()) {
                misses += 1;
                continue;
            }
            let x0: Vec<usize> = order.iter().map(|&i| x_base[i]).collect();
            let blocks = positions_by_symbol(&u);
            let xs = if mx == 1 { vec![x0] } else { draw_distinct(&x0, &blocks, oversample(mx), &mut rng) };
            if xs.len() >= mx {
                clouds.push(u);
                sats.push(xs);
            }
        }
        loop {
            if clouds.len() < mu {
                break;
            }
            let r = check_superposition(&clouds, &sats, n, rates[0], rates[1], true);
            if let Some(j) = argmax(&r.cloud_blame) {
                worst = format!("cloud inequality, worst margin {:.4}", r.cloud.worst);
                clouds.remove(j);
                sats.remove(j);
                continue;
            }
            let flat: Vec<usize> = r.sat_blame.iter().flatten().copied().collect();
            if let Some(id) = argmax(&flat) {
                worst = format!(
                    "satellite/joint inequalities, worst margins {:.4}/{:.4}",
                    r.satellite.worst, r.joint.worst
                );
                let mut j = 0;
                let mut rest = id;
                while rest >= sats[j].len() {
                    rest -= sats[j].len();
                    j += 1;
                }
                sats[j].remove(rest);
                if sats[j].len() < mx {
                    clouds.remove(j);
                    sats.remove(j);
                }
                continue;
            }
            clouds.truncate(mu);
            let codewords = sats.into_iter().take(mu).flat_map(|s| s.into_iter().take(mx)).collect();
            let mut code = PackedCode {
                setting: Setting::Superposition,
                n,
                codewords,
                clouds,
                b_codewords: vec![],
                t_sequence: vec![],
                rates: rates.to_vec(),
                slack,
                margins: BTreeMap::new(),
                seed: seed.wrapping_add(attempt),
            };
            for j in 0..mu {
                for k in 0..mx {
                    let v = CondType::of_pair(&code.clouds[j], code.satellite(j, k), joint.base.alphabet_size(), joint.output_size())?;
                    assert_eq!(&v, joint, "satellite left its conditional type class");
                }
            }
            code.margins = verify_packing(&code)?;
            return Ok(code);
        }
    }
    Err(failure(worst))
}

// ---------------------------------------------------------------------------
// Multiple access

fn check_sorted_blocks(t: &[usize]) -> Result<()> {
    if t.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Precondition("t-sequence must be sorted into constant blocks".into()));
    }
    Ok(())
}

/// Independent A- and B-codebooks in the conditional type classes given the sorted
/// anchor `t_sequence`.
#[allow(clippy::too_many_arguments)]
pub fn pack_mac(t_sequence: &[usize], a_given_t: &CondType, b_given_t: &CondType, rate_a: f64, rate_b: f64, slack: f64, seed: u64) -> Result<PackedCode> {
    let n = t_sequence.len();
    let ma = codebook_size(n, rate_a, slack)?;
    let mb = codebook_size(n, rate_b, slack)?;
    pack_mac_inner(t_sequence, a_given_t, b_given_t, [ma, mb], [rate_a, rate_b], slack, seed)
}

#[allow(clippy::too_many_arguments)]
pub fn pack_mac_sized(t_sequence: &[usize], a_given_t: &CondType, b_given_t: &CondType, sizes: [usize; 2], rate_a: f64, rate_b: f64, seed: u64) -> Result<PackedCode> {
    let n = t_sequence.len();
    let slack = implied_slack(n, rate_a, sizes[0]).max(implied_slack(n, rate_b, sizes[1]));
    pack_mac_inner(t_sequence, a_given_t, b_given_t, sizes, [rate_a, rate_b], slack, seed)
}

fn pack_mac_inner(t: &[usize], a_t: &CondType, b_t: &CondType, sizes: [usize; 2], rates: [f64; 2], slack: f64, seed: u64) -> Result<PackedCode> {
    check_sorted_blocks(t)?;
    let n = t.len();
    let t_type = TypeVec::of_sequence(t, a_t.base.alphabet_size())?;
    if t_type != a_t.base || t_type != b_t.base {
        return Err(Error::InvalidParameter("conditional types must have the t-sequence's type as base".into()));
    }
    let (h_a, h_b) = (a_t.cond_entropy(), b_t.cond_entropy());
    if !(rates[0] < h_a) || !(rates[1] < h_b) {
        return Err(Error::Precondition(format!("need R_A < {h_a} and R_B < {h_b}")));
    }
    let [ma, mb] = sizes;
    check_pair_work(oversample(ma) * oversample(mb))?;
    if ma == 0 || mb == 0 || ma > class_size(a_t.shell_size_ln()) || mb > class_size(b_t.shell_size_ln()) {
        return Err(Error::Precondition("requested sizes exceed the conditional type classes".into()));
    }
    let blocks = positions_by_symbol(t);
    let a_base = a_t.sorted_pair().1;
    let b_base = b_t.sorted_pair().1;
    let mut worst = String::new();
    for attempt in 0..PACK_ATTEMPTS as u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt));
        let mut a = if ma == 1 { vec![a_base.clone()] } else { draw_distinct(&a_base, &blocks, oversample(ma), &mut rng) };
        let mut b = if mb == 1 { vec![b_base.clone()] } else { draw_distinct(&b_base, &blocks, oversample(mb), &mut rng) };
        loop {
            if a.len() < ma || b.len() < mb {
                break;
            }
            let r = check_mac(t, &a, &b, n, rates[0], rates[1], true);
            let (ia, ib) = (argmax(&r.a_blame), argmax(&r.b_blame));
            match (ia, ib) {
                (None, None) => {
                    a.truncate(ma);
                    b.truncate(mb);
                    let mut code = PackedCode {
                        setting: Setting::Mac,
                        n,
                        codewords: a,
                        clouds: vec![],
                        b_codewords: b,
                        t_sequence: t.to_vec(),
                        rates: rates.to_vec(),
                        slack,
                        margins: BTreeMap::new(),
                        seed: seed.wrapping_add(attempt),
                    };
                    code.margins = verify_packing(&code)?;
                    return Ok(code);
                }
                _ => {
                    worst = format!(
                        "pair/b-given-a/a-given-b margins {:.4}/{:.4}/{:.4}",
                        r.pair.worst, r.b_given_a.worst, r.a_given_b.worst
                    );
                    let sa = ia.map_or(0, |i| r.a_blame[i]);
                    let sb = ib.map_or(0, |i| r.b_blame[i]);
                    if sa >= sb {
                        a.remove(ia.expect("positive blame"));
                    } else {
                        b.remove(ib.expect("positive blame"));
                    }
                }
            }
        }
    }
    Err(failure(worst))
}

// ---------------------------------------------------------------------------
// Stabilizers and orbit averages

/// Stabilizer of one or more sequences inside the symmetric group, described by
/// adjacent transpositions within each class of positions carrying the same tuple
/// of symbols.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PermGroupHandle {
    pub base: Vec<Vec<usize>>,
    pub generators: Vec<(usize, usize)>,
    /// Position classes; the group is the product of their symmetric groups.
    pub classes: Vec<Vec<usize>>,
}

impl PermGroupHandle {
    pub fn stabilizer(base: &[&[usize]]) -> Result<Self> {
        let n = base.first().map_or(0, |s| s.len());
        if base.iter().any(|s| s.len() != n) {
            return Err(Error::InvalidParameter("base sequences differ in length".into()));
        }
        let mut classes: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        for i in 0..n {
            classes.entry(base.iter().map(|s| s[i]).collect()).or_default().push(i);
        }
        let classes: Vec<Vec<usize>> = classes.into_values().collect();
        let generators = classes.iter().flat_map(|c| c.windows(2).map(|w| (w[0], w[1]))).collect();
        Ok(PermGroupHandle { base: base.iter().map(|s| s.to_vec()).collect(), generators, classes })
    }

    /// `ln |S|`.
    pub fn order_ln(&self) -> f64 {
        self.classes.iter().map(|c| ln_factorial(c.len())).sum()
    }

    pub fn fixes_base(&self) -> bool {
        self.generators.iter().all(|&(i, j)| self.base.iter().all(|s| s[i] == s[j]))
    }

    /// Every element of the group as a position map `g` with `(g.x)_i = x_{g_i}`.
    /// Only for small groups.
    pub fn elements(&self) -> Result<Vec<Vec<usize>>> {
        if self.order_ln() > (MAX_ENUMERATION as f64).ln() {
            return Err(Error::SizeCap(class_size(self.order_ln())));
        }
        let n = self.base.first().map_or(0, |s| s.len());
        let mut out: Vec<Vec<usize>> = vec![(0..n).collect()];
        for class in &self.classes {
            let perms = permutations(class);
            let mut next = Vec::with_capacity(out.len() * perms.len());
            for g in &out {
                for p in &perms {
                    let mut h = g.clone();
                    for (&from, &to) in class.iter().zip(p) {
                        h[from] = g[to];
                    }
                    next.push(h);
                }
            }
            out = next;
        }
        Ok(out)
    }
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, head);
            out.push(p);
        }
    }
    out
}

/// Applies a position map to a sequence.
pub fn permute_sequence(g: &[usize], seq: &[usize]) -> Vec<usize> {
    g.iter().map(|&i| seq[i]).collect()
}

/// Worst ratio, per family, of the stabilizer-averaged codebook probability to the
/// product-distribution probability times `exp(k c n^{3/4})`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitReport {
    pub ratios: BTreeMap<String, f64>,
    pub holds: bool,
}

/// Orbit-average bounds around the codeword(s) selected by `target`:
/// `[i]` for single codes, `[j, k]` for superposition, `[j_a, k_b]` for MAC.
///
/// Because the stabilizer maps each shell `T_V` onto itself and acts transitively on
/// it, the average equals `|T_V ∩ M| / (|T_V| |M|)` for every point of the shell.
pub fn verify_orbit_bounds(code: &PackedCode, target: &[usize]) -> Result<OrbitReport> {
    let n = code.n;
    let nf = n as f64;
    let disc = code.slack * nf.powf(0.75);
    let mut ratios = BTreeMap::new();
    let shell_ratio = |base: &[&[usize]], members: Vec<Vec<&[usize]>>, log_norm: f64, log_bound: f64| -> f64 {
        let mut shells: HashMap<Vec<(usize, usize, usize)>, usize> = HashMap::new();
        for m in members {
            *shells.entry(shell_key(base, &m)).or_default() += 1;
        }
        shells
            .iter()
            .map(|(key, &c)| ((c as f64).ln() - shell_ln(key) - log_norm - log_bound).exp())
            .fold(0.0, f64::max)
    };
    let idx = |i: usize| target.get(i).copied().ok_or_else(|| Error::InvalidParameter("target index missing".into()));
    match code.setting {
        Setting::Single => {
            let i = idx(0)?;
            let x = code.codewords.get(i).ok_or_else(|| Error::InvalidParameter("target out of range".into()))?;
            let h = entropy_of_seq(x);
            let members = code.codewords.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, w)| vec![w.as_slice()]).collect();
            let m = code.codewords.len() as f64;
            ratios.insert("codeword".into(), shell_ratio(&[x], members, m.ln(), -nf * h + disc));
        }
        Setting::Superposition => {
            let (j, k) = (idx(0)?, idx(1)?);
            let per = code.satellites_per_cloud();
            if j >= code.clouds.len() || k >= per {
                return Err(Error::InvalidParameter("target out of range".into()));
            }
            let u = code.clouds[j].as_slice();
            let x = code.satellite(j, k);
            let h_u = entropy_of_seq(u);
            let h_x_u = cond_entropy_of(u, x);
            let (mu, mx) = (code.clouds.len() as f64, per as f64);
            let other_clouds = (0..code.clouds.len())
                .filter(|&i| i != j)
                .flat_map(|i| (0..per).map(move |k2| (i, k2)))
                .map(|(i, k2)| vec![code.clouds[i].as_slice(), code.satellite(i, k2)])
                .collect();
            ratios.insert("other_cloud".into(), shell_ratio(&[u, x], other_clouds, (mu * mx).ln(), -nf * (h_u + h_x_u) + 2.0 * disc));
            let same_cloud = (0..per).filter(|&i| i != k).map(|i| vec![code.satellite(j, i)]).collect();
            ratios.insert("same_cloud".into(), shell_ratio(&[u, x], same_cloud, mx.ln(), -nf * h_x_u + disc));
        }
        Setting::Mac => {
            let (ia, ib) = (idx(0)?, idx(1)?);
            if ia >= code.codewords.len() || ib >= code.b_codewords.len() {
                return Err(Error::InvalidParameter("target out of range".into()));
            }
            let t = code.t_sequence.as_slice();
            let a = code.codewords[ia].as_slice();
            let b = code.b_codewords[ib].as_slice();
            let h_a = cond_entropy_of(t, a);
            let h_b = cond_entropy_of(t, b);
            let (ma, mb) = (code.codewords.len() as f64, code.b_codewords.len() as f64);
            let base: [&[usize]; 3] = [a, b, t];
            let pairs = (0..code.codewords.len())
                .filter(|&i| i != ia)
                .flat_map(|i| (0..code.b_codewords.len()).filter(move |&k| k != ib).map(move |k| (i, k)))
                .map(|(i, k)| vec![code.codewords[i].as_slice(), code.b_codewords[k].as_slice()])
                .collect();
            ratios.insert("pair".into(), shell_ratio(&base, pairs, (ma * mb).ln(), -nf * (h_a + h_b) + 2.0 * disc));
            let bs = (0..code.b_codewords.len()).filter(|&k| k != ib).map(|k| vec![code.b_codewords[k].as_slice()]).collect();
            ratios.insert("same_a".into(), shell_ratio(&base, bs, mb.ln(), -nf * h_b + disc));
            let as_ = (0..code.codewords.len()).filter(|&i| i != ia).map(|i| vec![code.codewords[i].as_slice()]).collect();
            ratios.insert("same_b".into(), shell_ratio(&base, as_, ma.ln(), -nf * h_a + disc));
        }
    }
    let holds = ratios.values().all(|&r| r <= 1.0 + MARGIN_TOL);
    Ok(OrbitReport { ratios, holds })
}

/// Stabilizer average of the uniform codebook distribution at `point`, by explicit
/// enumeration of the stabilizer of `base` (small `n` only). Sequences in `code` and
/// `point` are tuples aligned position by position.
pub fn stabilizer_average(base: &[&[usize]], codebook: &[Vec<Vec<usize>>], point: &[&[usize]]) -> Result<f64> {
    let group = PermGroupHandle::stabilizer(base)?;
    let elements = group.elements()?;
    let set: HashSet<Vec<Vec<usize>>> = codebook.iter().cloned().collect();
    let m = codebook.len() as f64;
    let hits = elements
        .iter()
        .filter(|g| {
            let moved: Vec<Vec<usize>> = point.iter().map(|s| permute_sequence(g, s)).collect();
            set.contains(&moved)
        })
        .count();
    Ok(hits as f64 / elements.len() as f64 / m)
}

/// Lower bound on `|T_P|` from the uniform-distribution argument:
/// `exp(n H(P)) / (n+1)^{|X|}`.
pub fn type_class_lower_bound(ty: &TypeVec) -> f64 {
    (ty.n as f64 * ty.entropy()).exp() / ((ty.n + 1) as f64).powi(ty.alphabet_size() as i32)
}

/// `sum_i |p_i - q_i|`, used to compare a type with a target distribution.
pub fn l1_distance(ty: &TypeVec, target: &[f64]) -> f64 {
    ty.probs().iter().zip(target).map(|(a, b)| (a - b).abs()).sum()
}

/// Sequences whose pairing with `base` has conditional type `v` (exhaustive, small only).
pub fn shell_members(base: &[usize], v: &CondType) -> Result<Vec<Vec<usize>>> {
    if v.shell_size_ln() > (MAX_ENUMERATION as f64).ln() {
        return Err(Error::SizeCap(class_size(v.shell_size_ln())));
    }
    let blocks = positions_by_symbol(base);
    let mut out: Vec<Vec<usize>> = vec![vec![0; base.len()]];
    for (sym, block) in blocks.iter().enumerate() {
        let row = v.rows.get(sym).ok_or_else(|| Error::DimensionMismatch { expected: blocks.len(), got: v.rows.len() })?;
        let fills = distinct_arrangements(&row.sorted_sequence());
        let mut next = Vec::with_capacity(out.len() * fills.len());
        for w in &out {
            for f in &fills {
                let mut w = w.clone();
                for (&i, &s) in block.iter().zip(f) {
                    w[i] = s;
                }
                next.push(w);
            }
        }
        out = next;
    }
    Ok(out)
}

fn distinct_arrangements(sorted: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = sorted.to_vec();
    loop {
        out.push(cur.clone());
        // next lexicographic permutation
        let Some(i) = (0..cur.len().saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
            break;
        };
        let j = (i + 1..cur.len()).rev().find(|&j| cur[j] > cur[i]).expect("successor exists");
        cur.swap(i, j);
        cur[i + 1..].reverse();
    }
    out
}
