//! Two-dimensional rate regions for broadcast (degraded message sets) and
//! multiple-access channels, plain and compound.
//!
//! All regions are inner approximations: unions over finitely many input laws,
//! closed under convex hull and under lowering either rate.

mod bcd;
mod curves;
mod mac;
mod polygon;

use serde::{Deserialize, Serialize};

use crate::channels::{BCDPair, CompoundFamily, MACChannel};
use crate::error::{Error, Result};
use crate::infomeasure::{Measure, Unit};

pub use bcd::region_bcd_sum_variant;
pub use curves::{
    example1_curves, example1_hi1, example1_hi2, example2_curves, example2_exact, example2_input_scan, example2_lower_bound, f1_slope_scan,
    Example1Row, Example2Row, InputScanRow, SlopeRow,
};
pub use polygon::Region2D;

use mac::{directions, trace_region, Pool, Shape};

const DIRECTIONS: usize = 37;

/// Search effort for region computations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptGrid {
    /// Largest alphabet allowed for the time-sharing (or auxiliary) variable.
    pub t_card: usize,
    /// Resolution of the grid on every probability simplex.
    pub simplex_step: f64,
    /// Nelder–Mead iterations per local refinement; zero disables refinement.
    pub refine_rounds: usize,
}

impl Default for OptGrid {
    fn default() -> Self {
        OptGrid { t_card: 4, simplex_step: 1.0 / 16.0, refine_rounds: 200 }
    }
}

impl OptGrid {
    pub fn new(t_card: usize, simplex_step: f64, refine_rounds: usize) -> Result<Self> {
        let g = OptGrid { t_card, simplex_step, refine_rounds };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.t_card < 1 {
            return Err(Error::InvalidParameter("t_card must be at least 1".into()));
        }
        if !(self.simplex_step > 0.0 && self.simplex_step <= 0.5) {
            return Err(Error::InvalidParameter(format!("simplex_step {} outside (0, 0.5]", self.simplex_step)));
        }
        Ok(())
    }
}

pub fn region_bcd(pair: &BCDPair, grid: &OptGrid) -> Result<Region2D> {
    grid.validate()?;
    bcd::region(std::slice::from_ref(pair), grid)
}

pub fn region_compound_bcd(fam: &CompoundFamily, grid: &OptGrid) -> Result<Region2D> {
    grid.validate()?;
    bcd::region(fam.bcd_members()?, grid)
}

fn mac_region(members: &[MACChannel], shapes: &[Shape], grid: &OptGrid) -> Result<Region2D> {
    grid.validate()?;
    let mut pool = Pool::grid(members, grid.simplex_step)?;
    let dirs = directions(DIRECTIONS);
    let mut points = Vec::new();
    for &shape in shapes {
        points.extend(trace_region(&mut pool, shape, grid, &dirs)?);
    }
    Ok(Region2D::from_points(&points, Unit::Nats))
}

/// Union of pentagons over product inputs (time sharing comes from the hull).
pub fn region_mac(mac: &MACChannel, grid: &OptGrid) -> Result<Region2D> {
    mac_region(std::slice::from_ref(mac), &[Shape::Pentagon], grid)
}

/// Union over `A - T - B` of pentagons whose three bounds take the worst member.
/// Corner points are traced too; each lies in the pentagon of its own input law.
pub fn region_compound_mac(fam: &CompoundFamily, grid: &OptGrid) -> Result<Region2D> {
    mac_region(fam.mac_members()?, &[Shape::CornerA, Shape::CornerB, Shape::Pentagon], grid)
}

/// Hull of the two corner-point families, one per decoding order.
pub fn region_corner_union(fam: &CompoundFamily, grid: &OptGrid) -> Result<Region2D> {
    mac_region(fam.mac_members()?, &[Shape::CornerA, Shape::CornerB], grid)
}

/// Sum-rate figures of a compound MAC family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RQuantities {
    /// Best sum rate reachable with successive decoding.
    pub r1: Measure,
    /// Best sum rate in the compound region.
    pub r2: Measure,
    /// Best worst-case joint information `min_theta I(AB;Y|T)`.
    pub r3: Measure,
}

pub fn r_quantities(fam: &CompoundFamily, grid: &OptGrid) -> Result<RQuantities> {
    grid.validate()?;
    let members = fam.mac_members()?;
    let mut pool = Pool::grid(members, grid.simplex_step)?;
    let w = [1.0, 1.0];
    let mut best = |shape: Shape| -> Result<f64> {
        pool.refine(shape, w, grid.t_card, grid.refine_rounds)?;
        Ok(pool.support(shape, w, grid.t_card)?.value)
    };
    let r1 = best(Shape::CornerA)?.max(best(Shape::CornerB)?);
    let r2 = best(Shape::Pentagon)?;
    let r3 = best(Shape::SumOnly)?;
    Ok(RQuantities { r1: Measure::nats(r1), r2: Measure::nats(r2), r3: Measure::nats(r3) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{build_example1, s2mac};

    #[test]
    fn grid_validation() {
        assert!(OptGrid::new(0, 0.1, 0).is_err());
        assert!(OptGrid::new(2, 0.6, 0).is_err());
        assert!(OptGrid::new(2, 0.5, 0).is_ok());
    }

    #[test]
    fn s2mac_is_unit_triangle() {
        let g = OptGrid { refine_rounds: 0, ..OptGrid::default() };
        let r = region_mac(&s2mac(), &g).unwrap().in_unit(Unit::Bits);
        let tri = Region2D::from_points(&[[1.0, 0.0], [0.0, 1.0]], Unit::Bits);
        assert!(r.hausdorff(&tri) < 1e-8, "{:?}", r.vertices);
    }

    #[test]
    fn example1_sum_rates() {
        let g = OptGrid { refine_rounds: 0, ..OptGrid::default() };
        let q = r_quantities(&build_example1(), &g).unwrap();
        assert!((q.r1.bits() - 0.75).abs() < 1e-3, "{}", q.r1.bits());
        assert!((q.r2.bits() - 1.0).abs() < 1e-3, "{}", q.r2.bits());
        assert!((q.r3.bits() - 1.0).abs() < 1e-3, "{}", q.r3.bits());
    }
}
