//! The pseudo-distance a dyadic family induces on its leaves.
//!
//! Two points are as far apart as the measure of the smallest cube
//! containing both. This is an ultrametric up to a factor: it vanishes
//! only within a single leaf, and balls of the metric are (unions of)
//! cubes, which makes the space Ahlfors-regular of dimension 1 with
//! constants tied to the inheritance coefficient.

use crate::family::{ancestor_at, CubeRef, DyadicFamily};
use thiserror::Error;

/// Walk both cubes up to a common level, then climb in lockstep until
/// they agree. For `a == b` this returns the cube itself; for distinct
/// same-level cubes it returns a strict ancestor.
pub fn smallest_common_ancestor(family: &dyn DyadicFamily, a: CubeRef, b: CubeRef) -> CubeRef {
    let level = a.level.min(b.level);
    let mut a = ancestor_at(family, a, level);
    let mut b = ancestor_at(family, b, level);
    while a != b {
        a = family.parent(a).expect("distinct cubes must meet at the root");
        b = family.parent(b).expect("distinct cubes must meet at the root");
    }
    a
}

/// Measure of the smallest common ancestor. Total on all cube pairs:
/// nested or equal pairs get the measure of the outer cube.
pub fn cube_distance(family: &dyn DyadicFamily, a: CubeRef, b: CubeRef) -> f64 {
    family.measure(smallest_common_ancestor(family, a, b))
}

/// A point of the space, identified with the deepest-level cube
/// containing it. A finite family cannot separate points any finer.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct LeafPoint(CubeRef);

impl LeafPoint {
    pub fn new(family: &dyn DyadicFamily, index: usize) -> Self {
        let level = family.max_level();
        assert!(
            index < family.level_size(level),
            "leaf index {index} out of range"
        );
        LeafPoint(CubeRef::new(level, index))
    }

    pub fn cube(&self) -> CubeRef {
        self.0
    }
}

/// Zero for points sharing a leaf, otherwise the measure of the smallest
/// cube containing both.
pub fn point_distance(family: &dyn DyadicFamily, x: LeafPoint, y: LeafPoint) -> f64 {
    if x == y {
        0.0
    } else {
        cube_distance(family, x.cube(), y.cube())
    }
}

#[derive(Debug, Error)]
pub enum BallError {
    #[error(
        "radius {radius} does not exceed the leaf measure {leaf_measure}; \
         the family cannot resolve a ball this small"
    )]
    ResolutionExhausted { radius: f64, leaf_measure: f64 },
}

/// The ball of radius `r` around `x`: the largest cube containing `x`
/// with measure strictly below `r`, or the root when even the whole
/// space is smaller than `r`. Radii at or below the leaf measure cannot
/// be resolved and are an error.
pub fn ball(family: &dyn DyadicFamily, x: LeafPoint, r: f64) -> Result<CubeRef, BallError> {
    let mut cube = x.cube();
    if !(r > family.measure(cube)) {
        return Err(BallError::ResolutionExhausted {
            radius: r,
            leaf_measure: family.measure(cube),
        });
    }
    while let Some(up) = family.parent(cube) {
        if family.measure(up) < r {
            cube = up;
        } else {
            return Ok(cube);
        }
    }
    Ok(cube) // reached the root: measure 1 < r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::ExplicitFamily;
    use crate::grid::{GridFamily, GridKind};

    #[test]
    fn sibling_quarters_are_half_apart() {
        // Uniform binary family of depth 2: leaves are the four quarters.
        let fam = GridFamily::new(GridKind::Bands, 2).unwrap();
        let q = |k| CubeRef::new(2, k);
        // [0,1/4) and [1/4,1/2) meet first in [0,1/2).
        assert_eq!(cube_distance(&fam, q(0), q(1)), 0.5);
        // [1/4,1/2) and [1/2,3/4) only meet in the whole space.
        assert_eq!(cube_distance(&fam, q(1), q(2)), 1.0);
        // Nested pair: the outer cube wins.
        assert_eq!(cube_distance(&fam, CubeRef::new(1, 0), q(1)), 0.5);
        assert_eq!(cube_distance(&fam, q(3), q(3)), 0.25);
    }

    #[test]
    fn uneven_family_distances() {
        let fam = ExplicitFamily::from_levels(vec![
            vec![(1.0, vec![0, 1])],
            vec![(0.6, vec![0, 1]), (0.4, vec![2, 3])],
            vec![(0.3, vec![]), (0.3, vec![]), (0.2, vec![]), (0.2, vec![])],
        ])
        .unwrap();
        let x = |k| LeafPoint::new(&fam, k);
        // Grandchildren of the 0.6 cube are 0.6 apart.
        assert_eq!(point_distance(&fam, x(0), x(1)), 0.6);
        // Cousins only meet at the root.
        assert_eq!(point_distance(&fam, x(1), x(2)), 1.0);
        assert_eq!(point_distance(&fam, x(2), x(2)), 0.0);
    }

    #[test]
    fn ball_picks_largest_cube_strictly_inside_radius() {
        let fam = GridFamily::new(GridKind::Bands, 3).unwrap();
        let x = LeafPoint::new(&fam, 0); // leaf measure 1/8
        // Strictness: at r = 0.5 the level-1 cube (measure 0.5) is too big.
        assert_eq!(ball(&fam, x, 0.5).unwrap(), CubeRef::new(2, 0));
        assert_eq!(ball(&fam, x, 0.500001).unwrap(), CubeRef::new(1, 0));
        // Radius above the whole space: the root.
        assert_eq!(ball(&fam, x, 1.5).unwrap(), CubeRef::new(0, 0));
        assert_eq!(ball(&fam, x, 0.2).unwrap(), CubeRef::new(3, 0));
        // At or below leaf measure: unresolvable.
        assert!(ball(&fam, x, 0.125).is_err());
        assert!(ball(&fam, x, 0.01).is_err());
    }

    #[test]
    fn ball_measure_sandwich() {
        // For B*leaf < r < 1: r/B <= measure(ball) < r.
        let fam = GridFamily::new(GridKind::Squares, 4).unwrap();
        let b = fam.inheritance_coefficient();
        let leaf = 1.0 / fam.level_size(4) as f64;
        let x = LeafPoint::new(&fam, 37);
        let mut r = b * leaf * 1.01;
        while r < 1.0 {
            let mu = fam.measure(ball(&fam, x, r).unwrap());
            assert!(mu < r, "mu={mu} r={r}");
            assert!(mu >= r / b - 1e-15, "mu={mu} r/B={}", r / b);
            r *= 1.37;
        }
    }
}
