//! Finite channel models and the builders for the worked example families.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qmat::{tensor_all, DensityMat, HermMat};

const ROW_TOL: f64 = 1e-9;

/// Classical input alphabet mapped to density matrices on a common output space.
#[derive(Clone, Debug, PartialEq)]
pub struct CQChannel {
    out_dim: usize,
    states: Vec<DensityMat>,
}

impl CQChannel {
    pub fn new(states: Vec<DensityMat>) -> Result<Self> {
        let out_dim = states
            .first()
            .map(|s| s.dim())
            .ok_or_else(|| Error::InvalidParameter("channel needs at least one input symbol".into()))?;
        if let Some(bad) = states.iter().find(|s| s.dim() != out_dim) {
            return Err(Error::DimensionMismatch { expected: out_dim, got: bad.dim() });
        }
        Ok(CQChannel { out_dim, states })
    }

    pub fn input_size(&self) -> usize {
        self.states.len()
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn state(&self, x: usize) -> &DensityMat {
        &self.states[x]
    }

    pub fn states(&self) -> &[DensityMat] {
        &self.states
    }

    /// `W_{x_1} ⊗ ... ⊗ W_{x_n}`.
    pub fn product_state(&self, word: &[usize]) -> Result<HermMat> {
        let factors = word
            .iter()
            .map(|&x| self.checked(x).map(|s| s.herm().clone()))
            .collect::<Result<Vec<_>>>()?;
        tensor_all(&factors)
    }

    fn checked(&self, x: usize) -> Result<&DensityMat> {
        self.states
            .get(x)
            .ok_or_else(|| Error::InvalidParameter(format!("input symbol {x} out of range")))
    }
}

/// Two-sender channel; `states[a * b_size + b]` is `W_{a,b}`.
#[derive(Clone, Debug, PartialEq)]
pub struct MACChannel {
    a_size: usize,
    b_size: usize,
    out_dim: usize,
    states: Vec<DensityMat>,
}

impl MACChannel {
    pub fn new(a_size: usize, b_size: usize, states: Vec<DensityMat>) -> Result<Self> {
        if a_size == 0 || b_size == 0 {
            return Err(Error::InvalidParameter("alphabets must be nonempty".into()));
        }
        if states.len() != a_size * b_size {
            return Err(Error::DimensionMismatch { expected: a_size * b_size, got: states.len() });
        }
        let out_dim = states[0].dim();
        if let Some(bad) = states.iter().find(|s| s.dim() != out_dim) {
            return Err(Error::DimensionMismatch { expected: out_dim, got: bad.dim() });
        }
        Ok(MACChannel { a_size, b_size, out_dim, states })
    }

    pub fn a_size(&self) -> usize {
        self.a_size
    }

    pub fn b_size(&self) -> usize {
        self.b_size
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn state(&self, a: usize, b: usize) -> &DensityMat {
        &self.states[a * self.b_size + b]
    }

    pub fn states(&self) -> &[DensityMat] {
        &self.states
    }

    pub fn product_state(&self, a_word: &[usize], b_word: &[usize]) -> Result<HermMat> {
        if a_word.len() != b_word.len() {
            return Err(Error::DimensionMismatch { expected: a_word.len(), got: b_word.len() });
        }
        if a_word.iter().any(|&a| a >= self.a_size) || b_word.iter().any(|&b| b >= self.b_size) {
            return Err(Error::InvalidParameter("input symbol out of range".into()));
        }
        let factors: Vec<HermMat> =
            a_word.iter().zip(b_word).map(|(&a, &b)| self.state(a, b).herm().clone()).collect();
        tensor_all(&factors)
    }

    /// The same channel viewed as a c-q channel on the pair alphabet.
    pub fn as_pair_channel(&self) -> CQChannel {
        CQChannel { out_dim: self.out_dim, states: self.states.clone() }
    }
}

/// Broadcast pair: receiver Y decodes both messages, receiver Z only the common one.
#[derive(Clone, Debug, PartialEq)]
pub struct BCDPair {
    pub w_y: CQChannel,
    pub w_z: CQChannel,
}

impl BCDPair {
    pub fn new(w_y: CQChannel, w_z: CQChannel) -> Result<Self> {
        if w_y.input_size() != w_z.input_size() {
            return Err(Error::DimensionMismatch { expected: w_y.input_size(), got: w_z.input_size() });
        }
        Ok(BCDPair { w_y, w_z })
    }

    pub fn input_size(&self) -> usize {
        self.w_y.input_size()
    }
}

/// Finite family of channels sharing input alphabets; output dimensions may differ.
#[derive(Clone, Debug, PartialEq)]
pub enum CompoundFamily {
    Bcd(Vec<BCDPair>),
    Mac(Vec<MACChannel>),
}

impl CompoundFamily {
    pub fn bcd(members: Vec<BCDPair>) -> Result<Self> {
        let first = members.first().ok_or_else(|| Error::InvalidParameter("empty family".into()))?;
        let x = first.input_size();
        if let Some(bad) = members.iter().find(|m| m.input_size() != x) {
            return Err(Error::DimensionMismatch { expected: x, got: bad.input_size() });
        }
        Ok(CompoundFamily::Bcd(members))
    }

    pub fn mac(members: Vec<MACChannel>) -> Result<Self> {
        let first = members.first().ok_or_else(|| Error::InvalidParameter("empty family".into()))?;
        let (a, b) = (first.a_size(), first.b_size());
        for m in &members {
            if m.a_size() != a || m.b_size() != b {
                return Err(Error::InvalidParameter("family members must share alphabet sizes".into()));
            }
        }
        Ok(CompoundFamily::Mac(members))
    }

    pub fn len(&self) -> usize {
        match self {
            CompoundFamily::Bcd(m) => m.len(),
            CompoundFamily::Mac(m) => m.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn mac_members(&self) -> Result<&[MACChannel]> {
        match self {
            CompoundFamily::Mac(m) => Ok(m),
            CompoundFamily::Bcd(_) => Err(Error::InvalidParameter("expected a MAC family".into())),
        }
    }

    pub fn bcd_members(&self) -> Result<&[BCDPair]> {
        match self {
            CompoundFamily::Bcd(m) => Ok(m),
            CompoundFamily::Mac(_) => Err(Error::InvalidParameter("expected a BCD family".into())),
        }
    }
}

fn check_stochastic_row(row: &[f64]) -> Result<()> {
    if row.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
        return Err(Error::InvalidDistribution(format!("negative or non-finite entry in {row:?}")));
    }
    let s: f64 = row.iter().sum();
    if (s - 1.0).abs() > ROW_TOL {
        return Err(Error::InvalidDistribution(format!("row sums to {s}")));
    }
    Ok(())
}

/// Diagonal embedding of a classical transition matrix given as one row per input.
pub fn classical_embed(transition: &[Vec<f64>]) -> Result<CQChannel> {
    let states = transition
        .iter()
        .map(|row| {
            check_stochastic_row(row)?;
            DensityMat::diag(row)
        })
        .collect::<Result<Vec<_>>>()?;
    CQChannel::new(states)
}

/// Classical MAC from `f(a, b)` giving the output distribution.
pub fn classical_mac(a_size: usize, b_size: usize, f: impl Fn(usize, usize) -> Vec<f64>) -> Result<MACChannel> {
    let mut states = Vec::with_capacity(a_size * b_size);
    for a in 0..a_size {
        for b in 0..b_size {
            let row = f(a, b);
            check_stochastic_row(&row)?;
            states.push(DensityMat::diag(&row)?);
        }
    }
    MACChannel::new(a_size, b_size, states)
}

pub fn bsc(p: f64) -> Result<CQChannel> {
    classical_embed(&[vec![1.0 - p, p], vec![p, 1.0 - p]])
}

fn point_mass(size: usize, k: usize) -> Vec<f64> {
    let mut v = vec![0.0; size];
    v[k] = 1.0;
    v
}

/// Binary sum channel `Y = A xor B`.
pub fn s2mac() -> MACChannel {
    classical_mac(2, 2, |a, b| point_mass(2, a ^ b)).expect("deterministic rows are stochastic")
}

/// Binary entropy in bits.
pub fn h2(p: f64) -> f64 {
    let term = |q: f64| if q <= 0.0 || q >= 1.0 { 0.0 } else { -q * q.log2() };
    term(p) + term(1.0 - p)
}

/// Solves `h2(p) = target` for `p` in `[0, 1/2]` by bisection; `target` is in bits.
pub fn h2_inverse(target: f64) -> f64 {
    let (mut lo, mut hi) = (0.0_f64, 0.5_f64);
    if target <= 0.0 {
        return 0.0;
    }
    if target >= 1.0 {
        return 0.5;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h2(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Noise level of the example-1 binary symmetric components, `h(p0) = 1/2` bit.
pub fn example1_noise() -> f64 {
    h2_inverse(0.5)
}

/// Two-member family: the sum channel and a pair of independent BSC(p0) copies of
/// both inputs (output index `y_a * 2 + y_b`).
pub fn build_example1() -> CompoundFamily {
    let p0 = example1_noise();
    let flip = |x: usize, y: usize| if x == y { 1.0 - p0 } else { p0 };
    let noisy = classical_mac(2, 2, |a, b| {
        (0..4).map(|y| flip(a, y >> 1) * flip(b, y & 1)).collect()
    })
    .expect("product of stochastic rows");
    CompoundFamily::Mac(vec![s2mac(), noisy])
}

/// Two-member family of deterministic binary MACs: member 0 is OR, member 1 is AND.
pub fn build_example2() -> CompoundFamily {
    let or = classical_mac(2, 2, |a, b| point_mass(2, a | b)).expect("deterministic");
    let and = classical_mac(2, 2, |a, b| point_mass(2, a & b)).expect("deterministic");
    CompoundFamily::Mac(vec![or, and])
}

fn tilt_state(rho: &DensityMat, phi: f64) -> Result<DensityMat> {
    let d = rho.dim();
    if d == 0 || !d.is_power_of_two() {
        return Err(Error::InvalidParameter(format!("output dimension {d} is not a qubit product")));
    }
    let m = rho.herm().matrix();
    for i in 0..d {
        for j in 0..d {
            if i != j && m[(i, j)].norm() > 1e-12 {
                return Err(Error::InvalidParameter("tilt needs diagonal (classical) outputs".into()));
            }
        }
    }
    let qubits = d.trailing_zeros() as usize;
    let zero = [Complex64::new(phi.cos(), 0.0), Complex64::new(phi.sin(), 0.0)];
    let one = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
    let mut acc = HermMat::zeros(d);
    for y in 0..d {
        let p = m[(y, y)].re;
        if p == 0.0 {
            continue;
        }
        let mut v = vec![Complex64::new(1.0, 0.0)];
        for q in (0..qubits).rev() {
            let bit = (y >> q) & 1;
            let f = if bit == 0 { &zero } else { &one };
            v = v.iter().flat_map(|a| f.iter().map(move |b| a * b)).collect();
        }
        acc = &acc + &HermMat::projector(&v).scale(p);
    }
    DensityMat::new(acc)
}

/// Replaces classical outcome 0 of every qubit factor by `cos(phi)|0> + sin(phi)|1>`
/// and keeps outcome 1 as `|1>`.
pub fn build_quantum_tilt(base: &CompoundFamily, phi: f64) -> Result<CompoundFamily> {
    let tilt_cq = |w: &CQChannel| -> Result<CQChannel> {
        CQChannel::new(w.states().iter().map(|s| tilt_state(s, phi)).collect::<Result<_>>()?)
    };
    match base {
        CompoundFamily::Mac(members) => {
            let out = members
                .iter()
                .map(|m| {
                    let states = m.states().iter().map(|s| tilt_state(s, phi)).collect::<Result<_>>()?;
                    MACChannel::new(m.a_size(), m.b_size(), states)
                })
                .collect::<Result<Vec<_>>>()?;
            CompoundFamily::mac(out)
        }
        CompoundFamily::Bcd(members) => {
            let out = members
                .iter()
                .map(|p| BCDPair::new(tilt_cq(&p.w_y)?, tilt_cq(&p.w_z)?))
                .collect::<Result<Vec<_>>>()?;
            CompoundFamily::bcd(out)
        }
    }
}

/// Member 0 outputs `W_a`, member 1 outputs `W_b`.
pub fn build_channel_swap(w: &CQChannel) -> CompoundFamily {
    let k = w.input_size();
    let pick = |first: bool| {
        let mut states = Vec::with_capacity(k * k);
        for a in 0..k {
            for b in 0..k {
                states.push(w.state(if first { a } else { b }).clone());
            }
        }
        MACChannel::new(k, k, states).expect("square grid of valid states")
    };
    CompoundFamily::Mac(vec![pick(true), pick(false)])
}
