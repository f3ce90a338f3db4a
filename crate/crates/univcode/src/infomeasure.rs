//! Entropic quantities of classical-quantum ensembles.
//!
//! Everything here is computed in nats; [`Measure`] carries the unit so callers
//! can convert at the boundary.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::channels::{CQChannel, MACChannel};
use crate::error::{Error, Result};
use crate::qmat::{eigh, mat_pow, weighted_sum, DensityMat, Eigh, HermMat, SUPPORT_TOL};

const DIST_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    Bits,
    Nats,
}

impl Unit {
    pub fn from_nats(self, v: f64) -> f64 {
        match self {
            Unit::Nats => v,
            Unit::Bits => v / LN_2,
        }
    }

    pub fn to_nats(self, v: f64) -> f64 {
        match self {
            Unit::Nats => v,
            Unit::Bits => v * LN_2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Unit::Bits => "bits",
            Unit::Nats => "nats",
        }
    }
}

/// A value with its unit; may be `+inf` for divergences with a support mismatch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Measure {
    pub value: f64,
    pub unit: Unit,
}

impl Measure {
    pub fn nats(value: f64) -> Self {
        Measure { value, unit: Unit::Nats }
    }

    pub fn to(self, unit: Unit) -> Self {
        Measure { value: unit.from_nats(self.unit.to_nats(self.value)), unit }
    }

    pub fn bits(self) -> f64 {
        self.to(Unit::Bits).value
    }

    pub fn is_infinite(&self) -> bool {
        self.value.is_infinite()
    }
}

/// Probability vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Dist(Vec<f64>);

impl Dist {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty".into()));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidDistribution(format!("negative or non-finite entry in {probs:?}")));
        }
        let s: f64 = probs.iter().sum();
        if (s - 1.0).abs() > DIST_TOL {
            return Err(Error::InvalidDistribution(format!("sums to {s}")));
        }
        Ok(Dist(probs))
    }

    /// Normalizes nonnegative weights.
    pub fn normalized(weights: &[f64]) -> Result<Self> {
        let s: f64 = weights.iter().sum();
        if !(s > 0.0) {
            return Err(Error::InvalidDistribution("weights sum to zero".into()));
        }
        Dist::new(weights.iter().map(|w| w / s).collect())
    }

    pub fn uniform(k: usize) -> Self {
        Dist(vec![1.0 / k as f64; k])
    }

    pub fn point(k: usize, at: usize) -> Self {
        let mut v = vec![0.0; k];
        v[at] = 1.0;
        Dist(v)
    }

    /// Binary distribution `(1 - p1, p1)`.
    pub fn binary(p1: f64) -> Result<Self> {
        Dist::new(vec![1.0 - p1, p1])
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entropy(&self) -> f64 {
        self.0.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.ln()).sum()
    }
}

impl TryFrom<Vec<f64>> for Dist {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Dist::new(v)
    }
}

impl From<Dist> for Vec<f64> {
    fn from(d: Dist) -> Vec<f64> {
        d.0
    }
}

/// Joint law of `A - T - B` stored as `(P_T, P_{A|T}, P_{B|T})`.
///
/// A broadcast input law `P_{UX}` is stored with `T = U`, `A = X` and a
/// one-letter `B`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkovTriple {
    pub p_t: Dist,
    pub p_a_t: Vec<Dist>,
    pub p_b_t: Vec<Dist>,
}

impl MarkovTriple {
    pub fn new(p_t: Dist, p_a_t: Vec<Dist>, p_b_t: Vec<Dist>) -> Result<Self> {
        let t = p_t.len();
        if p_a_t.len() != t || p_b_t.len() != t {
            return Err(Error::InvalidDistribution("one conditional row per value of T required".into()));
        }
        let (a, b) = (p_a_t[0].len(), p_b_t[0].len());
        if p_a_t.iter().any(|d| d.len() != a) || p_b_t.iter().any(|d| d.len() != b) {
            return Err(Error::InvalidDistribution("conditional rows of unequal length".into()));
        }
        Ok(MarkovTriple { p_t, p_a_t, p_b_t })
    }

    /// Independent inputs without time sharing.
    pub fn product(p_a: Dist, p_b: Dist) -> Self {
        MarkovTriple { p_t: Dist::point(1, 0), p_a_t: vec![p_a], p_b_t: vec![p_b] }
    }

    /// Broadcast input law from `P_U` and `P_{X|U}`.
    pub fn bcd(p_u: Dist, p_x_u: Vec<Dist>) -> Result<Self> {
        let ones = vec![Dist::point(1, 0); p_u.len()];
        Self::new(p_u, p_x_u, ones)
    }

    pub fn t_size(&self) -> usize {
        self.p_t.len()
    }

    pub fn a_size(&self) -> usize {
        self.p_a_t[0].len()
    }

    pub fn b_size(&self) -> usize {
        self.p_b_t[0].len()
    }

    /// Marginal of A (or X in the broadcast reading).
    pub fn marginal_a(&self) -> Dist {
        let mut m = vec![0.0; self.a_size()];
        for (pt, row) in self.p_t.probs().iter().zip(&self.p_a_t) {
            for (acc, p) in m.iter_mut().zip(row.probs()) {
                *acc += pt * p;
            }
        }
        Dist(m)
    }
}

/// Density operator together with its spectral decomposition.
#[derive(Clone, Debug)]
pub struct Spectral {
    pub mat: HermMat,
    pub eig: Eigh,
}

impl Spectral {
    pub fn new(mat: HermMat) -> Self {
        let eig = eigh(&mat);
        Spectral { mat, eig }
    }

    fn cut(&self) -> f64 {
        let r = self.eig.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        SUPPORT_TOL * r.max(1.0)
    }

    fn power(&self, alpha: f64) -> HermMat {
        let cut = self.cut();
        self.eig.apply(|l| if l > cut { l.powf(alpha) } else { 0.0 })
    }

    fn entropy(&self) -> f64 {
        self.eig.values.iter().filter(|&&l| l > 0.0).map(|&l| -l * l.ln()).sum()
    }
}

/// Branches `u` with weights `P(u)`, each holding weighted states `(P(x|u), W_{u,x})`.
///
/// This one shape covers the Holevo information, its conditional versions and the
/// corresponding Rényi quantities of every broadcast and MAC term.
#[derive(Clone, Debug)]
pub struct CondEnsemble {
    dim: usize,
    branches: Vec<(f64, Vec<(f64, Spectral)>)>,
}

impl CondEnsemble {
    pub fn new(dim: usize) -> Self {
        CondEnsemble { dim, branches: Vec::new() }
    }

    /// Adds a branch; zero-weight branches and items are dropped.
    pub fn push_branch(&mut self, weight: f64, items: Vec<(f64, HermMat)>) {
        if weight <= 0.0 {
            return;
        }
        let items: Vec<(f64, Spectral)> =
            items.into_iter().filter(|(p, _)| *p > 0.0).map(|(p, m)| (p, Spectral::new(m))).collect();
        if !items.is_empty() {
            self.branches.push((weight, items));
        }
    }

    /// `sum_u P(u) [ S(sum_x P(x|u) W) - sum_x P(x|u) S(W) ]` in nats.
    pub fn holevo(&self) -> f64 {
        self.branches
            .iter()
            .map(|(pu, items)| {
                let avg = weighted_sum(self.dim, items.iter().map(|(p, s)| (*p, &s.mat)));
                let outer = Spectral::new(avg).entropy();
                let inner: f64 = items.iter().map(|(p, s)| p * s.entropy()).sum();
                pu * (outer - inner)
            })
            .sum()
    }

    /// `(alpha/(alpha-1)) log sum_u P(u) Tr (sum_x P(x|u) W^alpha)^{1/alpha}`.
    ///
    /// `alpha = 1` gives [`Self::holevo`]; `alpha = 0` gives the limiting value
    /// `-log max_u lambda_max(sum_x P(x|u) Pi_W)` with `Pi_W` the support projector.
    pub fn renyi(&self, alpha: f64) -> f64 {
        if alpha == 1.0 {
            return self.holevo();
        }
        if alpha == 0.0 {
            let top = self
                .branches
                .iter()
                .map(|(_, items)| {
                    let supp: Vec<HermMat> = items.iter().map(|(_, s)| s.power(0.0)).collect();
                    let a = weighted_sum(self.dim, items.iter().map(|(p, _)| *p).zip(supp.iter()));
                    a.max_eigenvalue()
                })
                .fold(0.0_f64, f64::max);
            return -top.ln();
        }
        let branch_logs: Vec<f64> = self
            .branches
            .iter()
            .map(|(pu, items)| {
                let pows: Vec<HermMat> = items.iter().map(|(_, s)| s.power(alpha)).collect();
                let a = weighted_sum(self.dim, items.iter().map(|(p, _)| *p).zip(pows.iter()));
                let e = eigh(&a);
                let cut = SUPPORT_TOL * e.values.last().copied().unwrap_or(0.0).abs().max(1.0);
                let logs: Vec<f64> = e.values.iter().filter(|&&l| l > cut).map(|l| l.ln() / alpha).collect();
                pu.ln() + log_sum_exp(&logs)
            })
            .collect();
        alpha / (alpha - 1.0) * log_sum_exp(&branch_logs)
    }
}

pub(crate) fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0) || alpha == 1.0 || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("Renyi order must be positive and different from 1, got {alpha}")));
    }
    Ok(())
}

fn check_size(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

pub fn vn_entropy(rho: &DensityMat) -> Measure {
    Measure::nats(Spectral::new(rho.herm().clone()).entropy())
}

fn sibson_ensemble(p: &Dist, w: &CQChannel) -> Result<CondEnsemble> {
    check_size(w.input_size(), p.len())?;
    let mut ens = CondEnsemble::new(w.out_dim());
    ens.push_branch(1.0, p.probs().iter().zip(w.states()).map(|(&px, s)| (px, s.herm().clone())).collect());
    Ok(ens)
}

pub fn holevo_mi(p: &Dist, w: &CQChannel) -> Result<Measure> {
    Ok(Measure::nats(sibson_ensemble(p, w)?.holevo()))
}

/// `(1/(alpha-1)) log Tr rho^alpha sigma^{1-alpha}`, `+inf` on support mismatch.
pub fn petz_renyi_div(rho: &DensityMat, sigma: &DensityMat, alpha: f64) -> Result<Measure> {
    check_alpha(alpha)?;
    check_size(rho.dim(), sigma.dim())?;
    if alpha > 1.0 {
        let supp = mat_pow(sigma.herm(), 0.0)?;
        let outside = rho.herm() - &rho.herm().sandwich(&supp);
        if outside.trace().abs() > 1e-12 {
            return Ok(Measure::nats(f64::INFINITY));
        }
    }
    let q = mat_pow(rho.herm(), alpha)?.inner(&mat_pow(sigma.herm(), 1.0 - alpha)?);
    if q <= 0.0 {
        return Ok(Measure::nats(f64::INFINITY));
    }
    Ok(Measure::nats(q.ln() / (alpha - 1.0)))
}

/// Sibson-type Rényi mutual information of the ensemble `{P(x), W_x}`.
pub fn renyi_mi_sibson(p: &Dist, w: &CQChannel, alpha: f64) -> Result<Measure> {
    check_alpha(alpha)?;
    Ok(Measure::nats(sibson_ensemble(p, w)?.renyi(alpha)))
}

/// The optimal second argument of the Sibson minimization, `(sum_x P(x) W_x^alpha)^{1/alpha}` normalized.
pub fn sibson_optimal_sigma(p: &Dist, w: &CQChannel, alpha: f64) -> Result<DensityMat> {
    check_alpha(alpha)?;
    check_size(w.input_size(), p.len())?;
    let pows = w.states().iter().map(|s| mat_pow(s.herm(), alpha)).collect::<Result<Vec<_>>>()?;
    let a = weighted_sum(w.out_dim(), p.probs().iter().copied().zip(pows.iter()));
    let root = mat_pow(&a, 1.0 / alpha)?;
    let tr = root.trace();
    DensityMat::new(root.scale(1.0 / tr))
}

/// Which information quantity of a broadcast input law to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BcdTerm {
    /// `I(U;Y)`
    U,
    /// `I(X;Y|U)`
    XGivenU,
    /// `I(X;Y)` with the marginal of X
    X,
}

/// Ensemble behind a broadcast quantity; `joint` reads as `P_{UX}`.
pub fn bcd_ensemble(joint: &MarkovTriple, w: &CQChannel, term: BcdTerm) -> Result<CondEnsemble> {
    check_size(w.input_size(), joint.a_size())?;
    let d = w.out_dim();
    let mut ens = CondEnsemble::new(d);
    let states: Vec<&HermMat> = w.states().iter().map(|s| s.herm()).collect();
    match term {
        BcdTerm::U => {
            let items = joint
                .p_t
                .probs()
                .iter()
                .zip(&joint.p_a_t)
                .map(|(&pu, px)| (pu, weighted_sum(d, px.probs().iter().copied().zip(states.iter().copied()))))
                .collect();
            ens.push_branch(1.0, items);
        }
        BcdTerm::XGivenU => {
            for (&pu, px) in joint.p_t.probs().iter().zip(&joint.p_a_t) {
                ens.push_branch(pu, px.probs().iter().zip(&states).map(|(&p, s)| (p, (*s).clone())).collect());
            }
        }
        BcdTerm::X => {
            let m = joint.marginal_a();
            ens.push_branch(1.0, m.probs().iter().zip(&states).map(|(&p, s)| (p, (*s).clone())).collect());
        }
    }
    Ok(ens)
}

/// `I(X;Y|U)` of the broadcast reading of `joint`.
pub fn cond_mi(joint: &MarkovTriple, w: &CQChannel) -> Result<Measure> {
    Ok(Measure::nats(bcd_ensemble(joint, w, BcdTerm::XGivenU)?.holevo()))
}

/// Conditional Rényi mutual information `I_alpha(X;Y|U)` in the closed form
/// `(1/(alpha-1)) log (sum_u P(u) Tr(sum_x P(x|u) W_x^alpha)^{1/alpha})^alpha`.
pub fn renyi_cmi(joint: &MarkovTriple, w: &CQChannel, alpha: f64) -> Result<Measure> {
    check_alpha(alpha)?;
    Ok(Measure::nats(bcd_ensemble(joint, w, BcdTerm::XGivenU)?.renyi(alpha)))
}

/// Conditional information terms of a MAC under `A - T - B`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MacTerm {
    /// `I(A;Y|T)`, B averaged out
    AGivenT,
    /// `I(B;Y|T)`, A averaged out
    BGivenT,
    /// `I(A;Y|BT)`
    AGivenBT,
    /// `I(B;Y|AT)`
    BGivenAT,
    /// `I(AB;Y|T)`
    ABGivenT,
}

pub fn mac_ensemble(joint: &MarkovTriple, mac: &MACChannel, term: MacTerm) -> Result<CondEnsemble> {
    check_size(mac.a_size(), joint.a_size())?;
    check_size(mac.b_size(), joint.b_size())?;
    let d = mac.out_dim();
    let w = |a: usize, b: usize| mac.state(a, b).herm();
    let mut ens = CondEnsemble::new(d);
    for (t, &pt) in joint.p_t.probs().iter().enumerate() {
        if pt <= 0.0 {
            continue;
        }
        let pa = joint.p_a_t[t].probs();
        let pb = joint.p_b_t[t].probs();
        match term {
            MacTerm::AGivenT => {
                let items = (0..pa.len())
                    .map(|a| (pa[a], weighted_sum(d, (0..pb.len()).map(|b| (pb[b], w(a, b))))))
                    .collect();
                ens.push_branch(pt, items);
            }
            MacTerm::BGivenT => {
                let items = (0..pb.len())
                    .map(|b| (pb[b], weighted_sum(d, (0..pa.len()).map(|a| (pa[a], w(a, b))))))
                    .collect();
                ens.push_branch(pt, items);
            }
            MacTerm::BGivenAT => {
                for a in 0..pa.len() {
                    ens.push_branch(pt * pa[a], (0..pb.len()).map(|b| (pb[b], w(a, b).clone())).collect());
                }
            }
            MacTerm::AGivenBT => {
                for b in 0..pb.len() {
                    ens.push_branch(pt * pb[b], (0..pa.len()).map(|a| (pa[a], w(a, b).clone())).collect());
                }
            }
            MacTerm::ABGivenT => {
                let mut items = Vec::with_capacity(pa.len() * pb.len());
                for a in 0..pa.len() {
                    for b in 0..pb.len() {
                        items.push((pa[a] * pb[b], w(a, b).clone()));
                    }
                }
                ens.push_branch(pt, items);
            }
        }
    }
    Ok(ens)
}

pub fn mac_cond_mi(joint: &MarkovTriple, mac: &MACChannel, term: MacTerm) -> Result<Measure> {
    Ok(Measure::nats(mac_ensemble(joint, mac, term)?.holevo()))
}

pub fn mac_renyi_cmi(joint: &MarkovTriple, mac: &MACChannel, term: MacTerm, alpha: f64) -> Result<Measure> {
    check_alpha(alpha)?;
    Ok(Measure::nats(mac_ensemble(joint, mac, term)?.renyi(alpha)))
}
