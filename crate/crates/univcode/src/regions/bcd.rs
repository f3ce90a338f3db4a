use crate::channels::BCDPair;
use crate::error::Result;
use crate::infomeasure::{bcd_ensemble, BcdTerm, Dist, MarkovTriple, Unit};
use crate::optim::nelder_mead;

use super::mac::{directions, simplex_grid};
use super::{OptGrid, Region2D};

const MAX_GRID_POINTS: usize = 50_000;
const REFINE_DIRECTIONS: usize = 9;
const REFINE_STARTS: usize = 4;

/// Rectangle corner `(min_theta min(I(U;Y), I(U;Z)), min_theta I(X;Y|U))`.
fn corner(members: &[BCDPair], law: &MarkovTriple) -> Result<[f64; 2]> {
    let mut a = f64::INFINITY;
    let mut b = f64::INFINITY;
    for m in members {
        let uy = bcd_ensemble(law, &m.w_y, BcdTerm::U)?.holevo();
        let uz = bcd_ensemble(law, &m.w_z, BcdTerm::U)?.holevo();
        let xy = bcd_ensemble(law, &m.w_y, BcdTerm::XGivenU)?.holevo();
        a = a.min(uy).min(uz);
        b = b.min(xy);
    }
    Ok([a.max(0.0), b.max(0.0)])
}

fn law(p_u: &[f64], p_x_u: &[Vec<f64>]) -> Result<MarkovTriple> {
    MarkovTriple::bcd(Dist::new(p_u.to_vec())?, p_x_u.iter().map(|p| Dist::new(p.clone())).collect::<Result<_>>()?)
}

/// Every `P_{UX}` with `|U| <= 2` on a simplex grid, coarsened when the count would
/// explode for larger input alphabets.
fn grid_laws(x_size: usize, step: f64) -> Vec<(Vec<f64>, Vec<Vec<f64>>)> {
    let mut step = step;
    loop {
        let gx = simplex_grid(x_size, step);
        let gu = simplex_grid(2, step);
        if gx.len() * gx.len() * gu.len() <= MAX_GRID_POINTS || step >= 0.5 {
            let mut out = Vec::new();
            for x in &gx {
                out.push((vec![1.0], vec![x.clone()]));
            }
            for pu in gu.iter().filter(|p| p[0] > 0.0 && p[1] > 0.0) {
                for (i, x0) in gx.iter().enumerate() {
                    for x1 in &gx[i + 1..] {
                        out.push((pu.clone(), vec![x0.clone(), x1.clone()]));
                    }
                }
            }
            return out;
        }
        step = (step * 2.0).min(0.5);
    }
}

fn params_to_law(y: &[f64], t: usize, x: usize) -> Option<(Vec<f64>, Vec<Vec<f64>>)> {
    let norm = |v: &[f64]| -> Option<Vec<f64>> {
        let s: f64 = v.iter().map(|z| z.abs()).sum();
        (s > 0.0).then(|| v.iter().map(|z| z.abs() / s).collect())
    };
    let pu = norm(&y[..t])?;
    let px = (0..t).map(|u| norm(&y[t + u * x..t + (u + 1) * x])).collect::<Option<Vec<_>>>()?;
    Some((pu, px))
}

pub(super) fn region(members: &[BCDPair], grid: &OptGrid) -> Result<Region2D> {
    let x_size = members[0].input_size();
    let laws = grid_laws(x_size, grid.simplex_step);
    let mut scored = Vec::with_capacity(laws.len());
    for (pu, px) in laws {
        let c = corner(members, &law(&pu, &px)?)?;
        scored.push((pu, px, c));
    }
    let mut points: Vec<[f64; 2]> = scored.iter().map(|s| s.2).collect();

    if grid.refine_rounds > 0 {
        let t = grid.t_card;
        for w in directions(REFINE_DIRECTIONS) {
            let score = |c: [f64; 2]| w[0] * c[0] + w[1] * c[1];
            let mut order: Vec<usize> = (0..scored.len()).collect();
            order.sort_by(|&i, &j| score(scored[j].2).total_cmp(&score(scored[i].2)).then(i.cmp(&j)));
            for &i in order.iter().take(REFINE_STARTS) {
                let (pu, px, _) = &scored[i];
                let mut x0 = vec![0.0; t * (1 + x_size)];
                for u in 0..t {
                    let src = u.min(pu.len() - 1);
                    x0[u] = if u < pu.len() { pu[u] } else { 0.0 } + 0.02;
                    for k in 0..x_size {
                        x0[t + u * x_size + k] = px[src][k] + 0.02;
                    }
                }
                let objective = |y: &[f64]| -> f64 {
                    params_to_law(y, t, x_size)
                        .and_then(|(pu, px)| law(&pu, &px).ok())
                        .and_then(|l| corner(members, &l).ok())
                        .map_or(0.0, |c| -score(c))
                };
                let (y, _) = nelder_mead(objective, &x0, 0.1, grid.refine_rounds);
                if let Some((pu, px)) = params_to_law(&y, t, x_size) {
                    points.push(corner(members, &law(&pu, &px)?)?);
                }
            }
        }
    }
    Ok(Region2D::from_points(&points, Unit::Nats))
}

/// Cross-check form with the sum constraint: union of
/// `{R_A <= min(I(U;Y), I(U;Z)), R_A + R_B <= I(X;Y)}` over the same grid, no refinement.
pub fn region_bcd_sum_variant(pair: &BCDPair, grid: &OptGrid) -> Result<Region2D> {
    grid.validate()?;
    let mut points = Vec::new();
    for (pu, px) in grid_laws(pair.input_size(), grid.simplex_step) {
        let l = law(&pu, &px)?;
        let a = corner(std::slice::from_ref(pair), &l)?[0];
        let total = bcd_ensemble(&l, &pair.w_y, BcdTerm::X)?.holevo().max(0.0);
        points.push([a.min(total), (total - a).max(0.0)]);
        points.push([0.0, total]);
    }
    Ok(Region2D::from_points(&points, Unit::Nats))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_contains_single_letter_laws() {
        let laws = grid_laws(2, 0.5);
        assert_eq!(laws.iter().filter(|l| l.0.len() == 1).count(), 3);
        assert!(laws.iter().all(|(pu, px)| pu.len() == px.len()));
    }

    #[test]
    fn params_roundtrip() {
        let (pu, px) = params_to_law(&[1.0, 3.0, 1.0, 1.0, -2.0, 2.0], 2, 2).unwrap();
        assert_eq!(pu, vec![0.25, 0.75]);
        assert_eq!(px, vec![vec![0.5, 0.5], vec![0.5, 0.5]]);
    }
}
