//! Reference implementations shared by the integration tests. Nothing here calls
//! into the library's optimizers or closed forms.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use univcode::channels::CQChannel;
use univcode::infomeasure::Dist;
use univcode::qmat::{CMat, DensityMat};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, d: usize) -> CMat {
    DMatrix::from_fn(d, d, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

/// Full-rank mixed state `A A† / Tr` with a small identity admixture.
pub fn random_state(rng: &mut ChaCha8Rng, d: usize) -> DensityMat {
    let a = random_matrix(rng, d);
    let mut m = &a * a.adjoint();
    for i in 0..d {
        m[(i, i)] += Complex64::new(0.05, 0.0);
    }
    let tr = m.trace().re;
    DensityMat::from_matrix(m.unscale(tr)).unwrap()
}

pub fn random_cq(rng: &mut ChaCha8Rng, nx: usize, d: usize) -> CQChannel {
    CQChannel::new((0..nx).map(|_| random_state(rng, d)).collect()).unwrap()
}

pub fn random_probs(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.iter().map(|x| x / s).collect()
}

pub fn random_dist(rng: &mut ChaCha8Rng, k: usize) -> Dist {
    Dist::new(random_probs(rng, k)).unwrap()
}

pub fn h_nats(p: &[f64]) -> f64 {
    p.iter().filter(|&&q| q > 0.0).map(|&q| -q * q.ln()).sum()
}

pub fn h2_bits(p: f64) -> f64 {
    h_nats(&[p, 1.0 - p]) / std::f64::consts::LN_2
}

/// `I(X;Y)` in nats for input law `p` and row-stochastic `w`.
pub fn classical_mi(p: &[f64], w: &[Vec<f64>]) -> f64 {
    let ny = w[0].len();
    let q: Vec<f64> = (0..ny).map(|y| p.iter().zip(w).map(|(px, row)| px * row[y]).sum()).collect();
    let mut total = 0.0;
    for (px, row) in p.iter().zip(w) {
        for (y, &wy) in row.iter().enumerate() {
            if *px > 0.0 && wy > 0.0 {
                total += px * wy * (wy / q[y]).ln();
            }
        }
    }
    total
}

fn hooks(lambda: &[usize]) -> Vec<(i64, usize)> {
    let mut out = Vec::new();
    for (i, &row) in lambda.iter().enumerate() {
        for j in 0..row {
            let arm = row - j - 1;
            let leg = lambda[i + 1..].iter().filter(|&&r| r > j).count();
            out.push((j as i64 - i as i64, arm + leg + 1));
        }
    }
    out
}

/// Dimension of the symmetric-group irrep, by the hook length formula.
pub fn hook_dim(lambda: &[usize]) -> u64 {
    let n: usize = lambda.iter().sum();
    let fact: u64 = (1..=n as u64).product();
    fact / hooks(lambda).iter().map(|&(_, h)| h as u64).product::<u64>()
}

/// Dimension of the unitary-group irrep, by the hook content formula.
pub fn unitary_dim(lambda: &[usize], d: usize) -> u64 {
    let (num, den) = hooks(lambda).iter().fold((1i64, 1i64), |(a, b), &(c, h)| (a * (d as i64 + c), b * h as i64));
    (num / den) as u64
}

pub fn powm(m: &CMat, alpha: f64) -> CMat {
    let e = m.clone().symmetric_eigen();
    // negative powers of a vanishing eigenvalue blow up instead of dropping out
    let vals = e.eigenvalues.map(|l| match (l > 1e-14, alpha < 0.0) {
        (true, _) => Complex64::new(l.powf(alpha), 0.0),
        (false, true) => Complex64::new(1e-14f64.powf(alpha), 0.0),
        (false, false) => Complex64::new(0.0, 0.0),
    });
    &e.eigenvectors * DMatrix::from_diagonal(&vals) * e.eigenvectors.adjoint()
}

pub fn trace_re(m: &CMat) -> f64 {
    m.trace().re
}

/// Plain Nelder-Mead with restarts from the incumbent.
pub fn nelder_mead(f: &dyn Fn(&[f64]) -> f64, x0: &[f64], step: f64, iterations: usize) -> (Vec<f64>, f64) {
    let k = x0.len();
    let mut best = (x0.to_vec(), f(x0));
    for round in 0..4 {
        let scale = step / (1 << (2 * round)) as f64;
        let mut simplex: Vec<(Vec<f64>, f64)> = vec![best.clone()];
        for i in 0..k {
            let mut x = best.0.clone();
            x[i] += scale;
            let fx = f(&x);
            simplex.push((x, fx));
        }
        for _ in 0..iterations {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let centroid: Vec<f64> = (0..k).map(|i| simplex[..k].iter().map(|p| p.0[i]).sum::<f64>() / k as f64).collect();
            let worst = simplex[k].clone();
            let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&worst.0).map(|(c, w)| c + t * (c - w)).collect() };
            let xr = along(1.0);
            let fr = f(&xr);
            if fr < simplex[0].1 {
                let xe = along(2.0);
                let fe = f(&xe);
                simplex[k] = if fe < fr { (xe, fe) } else { (xr, fr) };
            } else if fr < simplex[k - 1].1 {
                simplex[k] = (xr, fr);
            } else {
                let xc = along(if fr < worst.1 { 0.5 } else { -0.5 });
                let fc = f(&xc);
                if fc < worst.1.min(fr) {
                    simplex[k] = (xc, fc);
                } else {
                    let lead = simplex[0].0.clone();
                    for p in simplex.iter_mut().skip(1) {
                        p.0 = lead.iter().zip(&p.0).map(|(a, b)| a + 0.5 * (b - a)).collect();
                        p.1 = f(&p.0);
                    }
                }
            }
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[0].1 < best.1 {
            best = simplex[0].clone();
        }
    }
    best
}

/// Qubit state from four unconstrained reals through a Cholesky factor.
pub fn qubit_from_params(x: &[f64]) -> CMat {
    let l = DMatrix::from_row_slice(2, 2, &[Complex64::new(x[0], 0.0), Complex64::new(0.0, 0.0), Complex64::new(x[2], x[3]), Complex64::new(x[1], 0.0)]);
    let m = &l * l.adjoint();
    let tr = m.trace().re;
    m.unscale(tr)
}

fn multistart(f: &dyn Fn(&[f64]) -> f64, dim: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let mut best = f64::INFINITY;
    for restart in 0..6 {
        let x0: Vec<f64> = (0..dim).map(|i| if restart == 0 { if i % 4 < 2 { 1.0 } else { 0.0 } } else { r.gen_range(-1.5..1.5) }).collect();
        let (_, v) = nelder_mead(f, &x0, 0.3, 1500);
        best = best.min(v);
    }
    best
}

/// `min_σ D_α(ρ_XY ‖ ρ_X ⊗ σ)` for qubit outputs, by direct search over σ.
pub fn brute_sibson(p: &[f64], states: &[CMat], alpha: f64) -> f64 {
    let powered: Vec<CMat> = states.iter().map(|w| powm(w, alpha)).collect();
    let f = |x: &[f64]| {
        let s = powm(&qubit_from_params(x), 1.0 - alpha);
        let q: f64 = p.iter().zip(&powered).map(|(px, w)| px * trace_re(&(w * &s))).sum();
        if q <= 0.0 {
            return f64::INFINITY;
        }
        q.ln() / (alpha - 1.0)
    };
    multistart(&f, 4, 11)
}

/// `min_{Q_U, σ_u} D_α(ρ_UXY ‖ Σ_u Q(u) |u⟩⟨u| ⊗ ρ_{X|u} ⊗ σ_u)` for qubit outputs.
pub fn brute_renyi_cmi(p_u: &[f64], p_x_u: &[Vec<f64>], states: &[CMat], alpha: f64) -> f64 {
    let powered: Vec<CMat> = states.iter().map(|w| powm(w, alpha)).collect();
    let nu = p_u.len();
    let f = |x: &[f64]| {
        let logits = &x[..nu - 1];
        let z: f64 = 1.0 + logits.iter().map(|l| l.exp()).sum::<f64>();
        let q: Vec<f64> = std::iter::once(1.0 / z).chain(logits.iter().map(|l| l.exp() / z)).collect();
        let mut total = 0.0;
        for u in 0..nu {
            let s = powm(&qubit_from_params(&x[nu - 1 + 4 * u..nu - 1 + 4 * u + 4]), 1.0 - alpha);
            let inner: f64 = p_x_u[u].iter().zip(&powered).map(|(px, w)| px * trace_re(&(w * &s))).sum();
            total += p_u[u].powf(alpha) * q[u].powf(1.0 - alpha) * inner;
        }
        if total <= 0.0 {
            return f64::INFINITY;
        }
        total.ln() / (alpha - 1.0)
    };
    multistart(&f, nu - 1 + 4 * nu, 13)
}

/// `max_{s ∈ [0,1]} s (I_{1-s} - offset)` on a uniform grid of step 1e-4, then a
/// 1e-6 grid around the best point. Returns `(s, value)`.
pub fn dense_s_max(info: &dyn Fn(f64) -> f64, offset: f64) -> (f64, f64) {
    let g = |s: f64| if s == 0.0 { 0.0 } else { s * (info(1.0 - s) - offset) };
    let mut best = (0.0, 0.0);
    for i in 1..=10_000 {
        let s = i as f64 * 1e-4;
        let v = g(s);
        if v > best.1 {
            best = (s, v);
        }
    }
    let centre = best.0;
    for i in -100i32..=100 {
        let s = (centre + i as f64 * 1e-6).clamp(0.0, 1.0);
        let v = g(s);
        if v > best.1 {
            best = (s, v);
        }
    }
    best
}
