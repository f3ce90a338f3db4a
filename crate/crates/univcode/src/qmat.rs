//! Hermitian and density matrices over complex numbers.
//!
//! Storage and the eigen solver come from nalgebra. Tensor products use the
//! index convention `i_a * dim(b) + i_b`, so factor 0 is the most significant
//! digit of a basis index.

use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;

/// Largest matrix dimension accepted anywhere in the crate.
pub const MAX_DIM: usize = 1 << 14;
/// Eigenvalues down to this value are clipped to zero instead of rejected.
pub const PSD_TOL: f64 = 1e-9;
const HERM_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-9;
/// Eigenvalues at or below this (relative to the spectral radius) are outside the support.
pub const SUPPORT_TOL: f64 = 1e-12;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn check_dim(d: usize) -> Result<()> {
    if d > MAX_DIM {
        Err(Error::SizeCap(d))
    } else {
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HermMat(CMat);

impl HermMat {
    /// Validates hermiticity and stores the exactly symmetrized matrix.
    pub fn new(m: CMat) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
        }
        check_dim(m.nrows())?;
        let scale = m.iter().map(|z| z.norm()).fold(1.0_f64, f64::max);
        let dev = (&m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if dev > HERM_TOL * scale {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Self::symmetrized(m))
    }

    /// Symmetrizes without validation; for matrices Hermitian by construction.
    pub(crate) fn symmetrized(m: CMat) -> Self {
        let h = (&m + m.adjoint()) * c(0.5);
        HermMat(h)
    }

    pub fn zeros(d: usize) -> Self {
        HermMat(CMat::zeros(d, d))
    }

    pub fn identity(d: usize) -> Self {
        HermMat(CMat::identity(d, d))
    }

    pub fn diag(values: &[f64]) -> Self {
        let d = values.len();
        HermMat(CMat::from_fn(d, d, |i, j| if i == j { c(values[i]) } else { c(0.0) }))
    }

    /// Builds a Hermitian matrix from real entries given row by row.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidParameter("matrix rows must form a square".into()));
        }
        Self::new(CMat::from_fn(d, d, |i, j| c(rows[i][j])))
    }

    pub fn from_complex_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidParameter("matrix rows must form a square".into()));
        }
        Self::new(CMat::from_fn(d, d, |i, j| rows[i][j]))
    }

    /// Rank-one projector onto a (not necessarily normalized) vector.
    pub fn projector(v: &[Complex64]) -> Self {
        let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let d = v.len();
        HermMat(CMat::from_fn(d, d, |i, j| v[i] * v[j].conj() / norm2))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.0
    }

    pub fn into_matrix(self) -> CMat {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        HermMat(&self.0 * c(s))
    }

    /// `Re Tr(self * other)`.
    pub fn inner(&self, other: &HermMat) -> f64 {
        // Tr(AB) = sum_ij A_ij B_ji and B_ji = conj(B_ij) for Hermitian B.
        self.0.iter().zip(other.0.iter()).map(|(a, b)| (a * b.conj()).re).sum()
    }

    pub fn eigh(&self) -> Eigh {
        eigh(self)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigh().values.first().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigh().values.last().copied().unwrap_or(0.0)
    }

    /// `U self U^dagger`.
    pub fn conj_by(&self, u: &CMat) -> Self {
        Self::symmetrized(u * &self.0 * u.adjoint())
    }

    /// `x self x` for Hermitian `x`.
    pub fn sandwich(&self, x: &HermMat) -> Self {
        Self::symmetrized(&x.0 * &self.0 * &x.0)
    }

    pub fn max_abs_diff(&self, other: &HermMat) -> f64 {
        (&self.0 - &other.0).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

impl<'a> Add<&'a HermMat> for &'a HermMat {
    type Output = HermMat;
    fn add(self, rhs: &HermMat) -> HermMat {
        HermMat(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a HermMat> for &'a HermMat {
    type Output = HermMat;
    fn sub(self, rhs: &HermMat) -> HermMat {
        HermMat(&self.0 - &rhs.0)
    }
}

impl Mul<f64> for &HermMat {
    type Output = HermMat;
    fn mul(self, s: f64) -> HermMat {
        self.scale(s)
    }
}

/// Spectral decomposition with eigenvalues in ascending order; column `k` of
/// `vectors` belongs to `values[k]`.
#[derive(Clone, Debug)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl Eigh {
    /// `sum_k f(lambda_k) |v_k><v_k|`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> HermMat {
        let d = self.values.len();
        let mut scaled = self.vectors.clone();
        for (k, &lam) in self.values.iter().enumerate() {
            let fk = c(f(lam));
            for i in 0..d {
                scaled[(i, k)] *= fk;
            }
        }
        HermMat::symmetrized(&scaled * self.vectors.adjoint())
    }

    fn support_cut(&self) -> f64 {
        let radius = self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        SUPPORT_TOL * radius.max(1.0)
    }
}

pub fn eigh(a: &HermMat) -> Eigh {
    let d = a.dim();
    if d == 0 {
        return Eigh { values: vec![], vectors: CMat::zeros(0, 0) };
    }
    let mut order: Vec<usize> = (0..d).collect();
    let is_diagonal = (0..d).all(|i| (0..d).all(|j| i == j || a.0[(i, j)] == c(0.0)));
    if is_diagonal {
        let diag: Vec<f64> = (0..d).map(|i| a.0[(i, i)].re).collect();
        order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
        let values = order.iter().map(|&i| diag[i]).collect();
        let vectors = CMat::from_fn(d, d, |r, k| if r == order[k] { c(1.0) } else { c(0.0) });
        return Eigh { values, vectors };
    }
    let se = nalgebra::SymmetricEigen::new(a.0.clone());
    order.sort_by(|&i, &j| se.eigenvalues[i].total_cmp(&se.eigenvalues[j]));
    let values = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(d, d, |r, k| se.eigenvectors[(r, order[k])]);
    Eigh { values, vectors }
}

fn psd_eigh(a: &HermMat) -> Result<Eigh> {
    let e = eigh(a);
    if let Some(&lo) = e.values.first() {
        if lo < -PSD_TOL {
            return Err(Error::NotPsd(lo));
        }
    }
    Ok(e)
}

/// `a^alpha` on the support of a PSD matrix; zero eigenvalues stay zero for every
/// exponent, so `alpha = 0` gives the support projector.
pub fn mat_pow(a: &HermMat, alpha: f64) -> Result<HermMat> {
    let e = psd_eigh(a)?;
    let cut = e.support_cut();
    Ok(e.apply(|l| if l > cut { l.powf(alpha) } else { 0.0 }))
}

/// Natural logarithm on the support; the kernel maps to zero.
pub fn mat_log(a: &HermMat) -> Result<HermMat> {
    let e = psd_eigh(a)?;
    let cut = e.support_cut();
    Ok(e.apply(|l| if l > cut { l.ln() } else { 0.0 }))
}

pub fn psd_sqrt(a: &HermMat) -> Result<HermMat> {
    mat_pow(a, 0.5)
}

/// Moore-Penrose inverse square root.
pub fn pinv_sqrt(a: &HermMat) -> Result<HermMat> {
    mat_pow(a, -0.5)
}

pub fn support_projector(a: &HermMat) -> Result<HermMat> {
    mat_pow(a, 0.0)
}

/// Von Neumann entropy in nats.
pub fn entropy(rho: &HermMat) -> Result<f64> {
    let e = psd_eigh(rho)?;
    Ok(e.values.iter().filter(|&&l| l > 0.0).map(|&l| -l * l.ln()).sum())
}

/// Checks `a <= b` in operator order: returns whether the smallest eigenvalue of
/// `b - a` is at least `-tol`, together with that eigenvalue.
pub fn op_leq(a: &HermMat, b: &HermMat, tol: f64) -> Result<(bool, f64)> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: b.dim() });
    }
    let lo = (b - a).min_eigenvalue();
    Ok((lo >= -tol, lo))
}

pub fn tensor(a: &HermMat, b: &HermMat) -> Result<HermMat> {
    check_dim(a.dim() * b.dim())?;
    Ok(HermMat(a.0.kronecker(&b.0)))
}

pub fn tensor_all(factors: &[HermMat]) -> Result<HermMat> {
    factors.iter().try_fold(1usize, |acc, f| {
        let d = acc.saturating_mul(f.dim());
        check_dim(d).map(|_| d)
    })?;
    let mut out = HermMat::identity(1);
    for f in factors {
        out = HermMat(out.0.kronecker(&f.0));
    }
    Ok(out)
}

fn digits(mut idx: usize, dims: &[usize], out: &mut [usize]) {
    for k in (0..dims.len()).rev() {
        out[k] = idx % dims[k];
        idx /= dims[k];
    }
}

fn undigits(ds: &[usize], dims: &[usize]) -> usize {
    ds.iter().zip(dims).fold(0, |acc, (&x, &d)| acc * d + x)
}

/// Traces out every factor not listed in `keep`. The kept factors retain their
/// relative order.
pub fn partial_trace(a: &HermMat, dims: &[usize], keep: &[usize]) -> Result<HermMat> {
    let total: usize = dims.iter().product();
    if total != a.dim() {
        return Err(Error::DimensionMismatch { expected: total, got: a.dim() });
    }
    if keep.iter().any(|&k| k >= dims.len()) || keep.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("keep must list increasing factor indices".into()));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
    let kdims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let tdims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
    let dk: usize = kdims.iter().product();
    let dt: usize = tdims.iter().product();
    let mut out = CMat::zeros(dk, dk);
    let mut full = vec![0usize; dims.len()];
    let mut kd = vec![0usize; keep.len()];
    let mut td = vec![0usize; traced.len()];
    let index = |kdig: &[usize], tdig: &[usize], full: &mut Vec<usize>| {
        for (p, &k) in keep.iter().enumerate() {
            full[k] = kdig[p];
        }
        for (p, &t) in traced.iter().enumerate() {
            full[t] = tdig[p];
        }
        undigits(full, dims)
    };
    let mut kd2 = vec![0usize; keep.len()];
    for i in 0..dk {
        digits(i, &kdims, &mut kd);
        for j in 0..dk {
            digits(j, &kdims, &mut kd2);
            let mut acc = c(0.0);
            for t in 0..dt {
                digits(t, &tdims, &mut td);
                let r = index(&kd, &td, &mut full);
                let s = index(&kd2, &td, &mut full);
                acc += a.0[(r, s)];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(HermMat::symmetrized(out))
}

/// Moves tensor factor `k` of an `n`-fold product of `d`-dimensional spaces to
/// position `perm[k]`.
pub fn permute_factors(a: &HermMat, d: usize, perm: &[usize]) -> Result<HermMat> {
    let n = perm.len();
    let dims = vec![d; n];
    let total: usize = dims.iter().product();
    if total != a.dim() {
        return Err(Error::DimensionMismatch { expected: total, got: a.dim() });
    }
    let map = factor_permutation_map(d, perm);
    let mut out = CMat::zeros(total, total);
    for i in 0..total {
        for j in 0..total {
            out[(map[i], map[j])] = a.0[(i, j)];
        }
    }
    Ok(HermMat(out))
}

/// Basis index permutation induced by moving factor `k` to position `perm[k]`.
pub fn factor_permutation_map(d: usize, perm: &[usize]) -> Vec<usize> {
    let n = perm.len();
    let dims = vec![d; n];
    let total: usize = dims.iter().product();
    let mut src = vec![0usize; n];
    let mut dst = vec![0usize; n];
    (0..total)
        .map(|i| {
            digits(i, &dims, &mut src);
            for k in 0..n {
                dst[perm[k]] = src[k];
            }
            undigits(&dst, &dims)
        })
        .collect()
}

/// Unit-trace positive semidefinite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMat(HermMat);

impl DensityMat {
    pub fn new(h: HermMat) -> Result<Self> {
        let lo = h.min_eigenvalue();
        if lo < -PSD_TOL {
            return Err(Error::NotPsd(lo));
        }
        let tr = h.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::BadTrace(tr));
        }
        Ok(DensityMat(h))
    }

    pub fn from_matrix(m: CMat) -> Result<Self> {
        Self::new(HermMat::new(m)?)
    }

    pub fn pure(v: &[Complex64]) -> Result<Self> {
        let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if norm2 <= 0.0 {
            return Err(Error::InvalidParameter("zero state vector".into()));
        }
        Ok(DensityMat(HermMat::projector(v)))
    }

    pub fn basis(d: usize, k: usize) -> Self {
        let mut p = vec![0.0; d];
        p[k] = 1.0;
        DensityMat(HermMat::diag(&p))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        DensityMat(HermMat::identity(d).scale(1.0 / d as f64))
    }

    pub fn diag(p: &[f64]) -> Result<Self> {
        Self::new(HermMat::diag(p))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn herm(&self) -> &HermMat {
        &self.0
    }

    pub fn into_herm(self) -> HermMat {
        self.0
    }

    /// Convex mixture; weights must be a probability vector.
    pub fn mixture(weights: &[f64], states: &[&DensityMat]) -> Result<Self> {
        let d = states.first().map(|s| s.dim()).unwrap_or(1);
        let mut acc = HermMat::zeros(d);
        for (w, s) in weights.iter().zip(states) {
            if s.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, got: s.dim() });
            }
            acc = &acc + &s.0.scale(*w);
        }
        Self::new(acc)
    }
}

/// Mixture of Hermitian matrices without validation.
pub fn weighted_sum<'a>(d: usize, terms: impl IntoIterator<Item = (f64, &'a HermMat)>) -> HermMat {
    let mut acc = CMat::zeros(d, d);
    for (w, m) in terms {
        if w != 0.0 {
            acc += &m.0 * c(w);
        }
    }
    HermMat(acc)
}
