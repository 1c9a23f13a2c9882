//! Built-in dyadic families on the unit square, addressed by index
//! arithmetic so no per-cube storage is ever materialized.
//!
//! Three geometries, differing in how a cell splits when the level
//! increments:
//!
//! * `Squares`: 2^j x 2^j congruent squares, four offspring each (B=4);
//! * `Parabolic`: 4^j x 2^j cells of size 4^-j x 2^-j — twice as fast
//!   in x as in y, eight offspring each (B=8);
//! * `Bands`: 2^j full-height vertical bands, two offspring each (B=2).
//!
//! Cells at level j are numbered row-major: index = ky * nx + kx with
//! kx running along x. Offspring are ordered x-major within the parent
//! (all x-splits of the lower y half first).

use crate::family::{CubeRef, DyadicFamily, FamilyError};
use crate::haar::HaarFunction;
use std::fmt;
use thiserror::Error;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum GridKind {
    Squares,
    Parabolic,
    Bands,
}

impl GridKind {
    /// Offspring count = inheritance coefficient.
    pub fn branching(self) -> usize {
        match self {
            GridKind::Squares => 4,
            GridKind::Parabolic => 8,
            GridKind::Bands => 2,
        }
    }

    /// x- and y-subdivision factors per level.
    fn split(self) -> (usize, usize) {
        match self {
            GridKind::Squares => (2, 2),
            GridKind::Parabolic => (4, 2),
            GridKind::Bands => (2, 1),
        }
    }

    pub fn parse(name: &str) -> Option<GridKind> {
        match name {
            "squares" => Some(GridKind::Squares),
            "parabolic" => Some(GridKind::Parabolic),
            "bands" => Some(GridKind::Bands),
            _ => None,
        }
    }
}

impl fmt::Display for GridKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            GridKind::Squares => "squares",
            GridKind::Parabolic => "parabolic",
            GridKind::Bands => "bands",
        };
        write!(f, "{name}")
    }
}

/// Axis-aligned half-open cell `[x0,x1) x [y0,y1)` in the unit square.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellRect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct GridFamily {
    kind: GridKind,
    max_level: usize,
}

impl GridFamily {
    /// `max_level` is the leaf level. Bounded so cube counts stay exact
    /// in both usize and f64 arithmetic.
    pub fn new(kind: GridKind, max_level: usize) -> Result<Self, FamilyError> {
        let bits_per_level = match kind {
            GridKind::Squares => 2,
            GridKind::Parabolic => 3,
            GridKind::Bands => 1,
        };
        if max_level * bits_per_level > 52 {
            return Err(FamilyError::Structure(format!(
                "{kind} family at {max_level} levels overflows exact cell counts"
            )));
        }
        Ok(GridFamily { kind, max_level })
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    /// Cells per axis at `level`: (nx, ny).
    pub fn grid_dims(&self, level: usize) -> (usize, usize) {
        let (sx, sy) = self.kind.split();
        (sx.pow(level as u32), sy.pow(level as u32))
    }

    /// (kx, ky) of a cube within its level grid.
    pub fn coords(&self, cube: CubeRef) -> (usize, usize) {
        let (nx, _) = self.grid_dims(cube.level);
        (cube.index % nx, cube.index / nx)
    }

    pub fn cube_at(&self, level: usize, kx: usize, ky: usize) -> CubeRef {
        let (nx, ny) = self.grid_dims(level);
        assert!(kx < nx && ky < ny, "cell ({kx},{ky}) outside {nx}x{ny} grid");
        CubeRef::new(level, ky * nx + kx)
    }

    /// Geometric footprint of a cube in the unit square.
    pub fn cell_rect(&self, cube: CubeRef) -> CellRect {
        let (nx, ny) = self.grid_dims(cube.level);
        let (kx, ky) = self.coords(cube);
        CellRect {
            x0: kx as f64 / nx as f64,
            x1: (kx + 1) as f64 / nx as f64,
            y0: ky as f64 / ny as f64,
            y1: (ky + 1) as f64 / ny as f64,
        }
    }

    /// Natural base for log-coefficient plots: the branching factor, so
    /// that level-j cells have log-measure exactly -j.
    pub fn default_log_base(&self) -> f64 {
        self.kind.branching() as f64
    }

    /// Deepest level whose cells cover whole pixels of a width x height
    /// image on each axis. Squares additionally require a square image.
    pub fn max_image_level(&self, width: usize, height: usize) -> usize {
        let tz = |v: usize| v.trailing_zeros() as usize;
        let cap = match self.kind {
            GridKind::Squares => tz(width).min(tz(height)),
            GridKind::Parabolic => (tz(width) / 2).min(tz(height)),
            GridKind::Bands => tz(width),
        };
        cap.min(self.max_level)
    }
}

impl DyadicFamily for GridFamily {
    fn max_level(&self) -> usize {
        self.max_level
    }

    fn level_size(&self, level: usize) -> usize {
        assert!(level <= self.max_level, "level {level} out of range");
        let (nx, ny) = self.grid_dims(level);
        nx * ny
    }

    fn measure(&self, cube: CubeRef) -> f64 {
        1.0 / self.level_size(cube.level) as f64
    }

    fn offspring_count(&self, cube: CubeRef) -> usize {
        if cube.level == self.max_level {
            0
        } else {
            self.kind.branching()
        }
    }

    fn offspring(&self, cube: CubeRef, i: usize) -> CubeRef {
        assert!(i < self.offspring_count(cube), "offspring {i} out of range");
        let (sx, sy) = self.kind.split();
        let (kx, ky) = self.coords(cube);
        let (dx, dy) = (i % sx, i / sx);
        self.cube_at(cube.level + 1, kx * sx + dx, ky * sy + dy)
    }

    fn parent(&self, cube: CubeRef) -> Option<CubeRef> {
        if cube.level == 0 {
            return None;
        }
        let (sx, sy) = self.kind.split();
        let (kx, ky) = self.coords(cube);
        Some(self.cube_at(cube.level - 1, kx / sx, ky / sy))
    }

    fn inheritance_coefficient(&self) -> f64 {
        self.kind.branching() as f64
    }
}

/// The three closed-form wavelet shapes used for single-template
/// analysis, one per built-in geometry. Each splits its cube into two
/// measure-equal halves along x and takes the values +-measure^{-1/2}:
///
/// * `I` on squares: sign by x-half of the 2x2 offspring block;
/// * `II` on parabolic cells: the 4 x-slices pair up, lower two +;
/// * `III` on bands: + on the left offspring, - on the right.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TemplateKind {
    I,
    II,
    III,
}

impl TemplateKind {
    pub fn child_count(self) -> usize {
        match self {
            TemplateKind::I => 4,
            TemplateKind::II => 8,
            TemplateKind::III => 2,
        }
    }

    fn sign(self, i: usize) -> f64 {
        let plus = match self {
            TemplateKind::I => i % 2 == 0,
            TemplateKind::II => i % 4 < 2,
            TemplateKind::III => i == 0,
        };
        if plus {
            1.0
        } else {
            -1.0
        }
    }

    /// The geometry this template is native to.
    pub fn native_kind(self) -> GridKind {
        match self {
            TemplateKind::I => GridKind::Squares,
            TemplateKind::II => GridKind::Parabolic,
            TemplateKind::III => GridKind::Bands,
        }
    }

    pub fn for_grid(kind: GridKind) -> TemplateKind {
        match kind {
            GridKind::Squares => TemplateKind::I,
            GridKind::Parabolic => TemplateKind::II,
            GridKind::Bands => TemplateKind::III,
        }
    }

    pub fn parse(name: &str) -> Option<TemplateKind> {
        match name {
            "I" => Some(TemplateKind::I),
            "II" => Some(TemplateKind::II),
            "III" => Some(TemplateKind::III),
            _ => None,
        }
    }
}

impl fmt::Display for TemplateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            TemplateKind::I => "I",
            TemplateKind::II => "II",
            TemplateKind::III => "III",
        };
        write!(f, "{name}")
    }
}

#[derive(Debug, Error)]
pub enum TemplateError {
    #[error("template {kind} needs {expected} offspring, {cube} has {found}")]
    ChildCountMismatch {
        kind: TemplateKind,
        cube: CubeRef,
        expected: usize,
        found: usize,
    },
    #[error(
        "template {kind} on {cube}: its sign halves carry measures {plus} and {minus}; \
         templates need measure-balanced halves"
    )]
    UnbalancedHalves {
        kind: TemplateKind,
        cube: CubeRef,
        plus: f64,
        minus: f64,
    },
}

/// Instantiate a template on one cube of any family whose offspring
/// structure fits: the offspring count must match and the two sign
/// halves must carry equal measure (automatic on the template's native
/// grid, where the result is a genuine unit-norm zero-mean wavelet with
/// amplitude measure^{-1/2}).
pub fn template_for_cube(
    family: &dyn DyadicFamily,
    kind: TemplateKind,
    cube: CubeRef,
) -> Result<HaarFunction, TemplateError> {
    let n = family.offspring_count(cube);
    if n != kind.child_count() {
        return Err(TemplateError::ChildCountMismatch {
            kind,
            cube,
            expected: kind.child_count(),
            found: n,
        });
    }
    let mu = family.measure(cube);
    let mut plus = 0.0;
    let mut minus = 0.0;
    for i in 0..n {
        let w = family.measure(family.offspring(cube, i));
        if kind.sign(i) > 0.0 {
            plus += w;
        } else {
            minus += w;
        }
    }
    if (plus - minus).abs() > 1e-12 * mu {
        return Err(TemplateError::UnbalancedHalves {
            kind,
            cube,
            plus,
            minus,
        });
    }
    let amp = 1.0 / mu.sqrt();
    Ok(HaarFunction {
        support: cube,
        lambda: 1,
        values: (0..n).map(|i| kind.sign(i) * amp).collect(),
    })
}

/// Template on cube (j,k) of a built-in grid.
pub fn template_wavelet(
    family: &GridFamily,
    kind: TemplateKind,
    level: usize,
    index: usize,
) -> Result<HaarFunction, TemplateError> {
    template_for_cube(family, kind, CubeRef::new(level, index))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{validate_family, ROOT};
    use crate::haar::{build_cube_basis, haar_inner_product};

    #[test]
    fn all_kinds_validate() {
        for (kind, depth) in [
            (GridKind::Squares, 4),
            (GridKind::Parabolic, 3),
            (GridKind::Bands, 6),
        ] {
            let fam = GridFamily::new(kind, depth).unwrap();
            let report = validate_family(&fam, 1e-9);
            assert!(report.ok, "{kind}: {:?}", report.violations);
            assert!((report.computed_b - kind.branching() as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn level_shapes() {
        let sq = GridFamily::new(GridKind::Squares, 3).unwrap();
        assert_eq!(sq.level_size(2), 16);
        assert_eq!(sq.grid_dims(2), (4, 4));
        let pb = GridFamily::new(GridKind::Parabolic, 3).unwrap();
        assert_eq!(pb.level_size(2), 64);
        assert_eq!(pb.grid_dims(2), (16, 4));
        let bd = GridFamily::new(GridKind::Bands, 3).unwrap();
        assert_eq!(bd.level_size(3), 8);
        assert_eq!(bd.grid_dims(3), (8, 1));
    }

    #[test]
    fn offspring_order_is_x_major() {
        let sq = GridFamily::new(GridKind::Squares, 2).unwrap();
        let q = sq.cube_at(1, 1, 0);
        let kids: Vec<(usize, usize)> = (0..4).map(|i| sq.coords(sq.offspring(q, i))).collect();
        assert_eq!(kids, vec![(2, 0), (3, 0), (2, 1), (3, 1)]);

        let pb = GridFamily::new(GridKind::Parabolic, 2).unwrap();
        let q = pb.cube_at(1, 2, 1);
        let kids: Vec<(usize, usize)> = (0..8).map(|i| pb.coords(pb.offspring(q, i))).collect();
        assert_eq!(
            kids,
            vec![
                (8, 2),
                (9, 2),
                (10, 2),
                (11, 2),
                (8, 3),
                (9, 3),
                (10, 3),
                (11, 3)
            ]
        );

        let bd = GridFamily::new(GridKind::Bands, 2).unwrap();
        let q = bd.cube_at(1, 1, 0);
        let kids: Vec<usize> = (0..2).map(|i| bd.offspring(q, i).index).collect();
        assert_eq!(kids, vec![2, 3]);
    }

    #[test]
    fn parent_inverts_offspring() {
        for kind in [GridKind::Squares, GridKind::Parabolic, GridKind::Bands] {
            let fam = GridFamily::new(kind, 3).unwrap();
            for j in 0..3 {
                for k in 0..fam.level_size(j) {
                    let q = CubeRef::new(j, k);
                    for i in 0..fam.offspring_count(q) {
                        assert_eq!(fam.parent(fam.offspring(q, i)), Some(q));
                    }
                }
            }
            assert_eq!(fam.parent(ROOT), None);
        }
    }

    #[test]
    fn cell_rects_tile_the_square() {
        let pb = GridFamily::new(GridKind::Parabolic, 2).unwrap();
        let r = pb.cell_rect(pb.cube_at(1, 3, 1));
        assert_eq!(r, CellRect { x0: 0.75, x1: 1.0, y0: 0.5, y1: 1.0 });
        // Area equals measure.
        let area = (r.x1 - r.x0) * (r.y1 - r.y0);
        assert!((area - pb.measure(pb.cube_at(1, 3, 1))).abs() < 1e-15);
    }

    #[test]
    fn template_on_native_grid_is_unit_haar() {
        let cases = [
            (GridKind::Squares, TemplateKind::I),
            (GridKind::Parabolic, TemplateKind::II),
            (GridKind::Bands, TemplateKind::III),
        ];
        for (gk, tk) in cases {
            let fam = GridFamily::new(gk, 3).unwrap();
            for (j, k) in [(0, 0), (1, 1), (2, 3)] {
                let t = template_wavelet(&fam, tk, j, k).unwrap();
                assert!(t.integral(&fam).abs() < 1e-12);
                assert!((t.norm_squared(&fam) - 1.0).abs() < 1e-12);
                // Amplitude is measure^{-1/2}.
                let amp = 1.0 / fam.measure(CubeRef::new(j, k)).sqrt();
                assert!((t.values[0] - amp).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn band_template_values() {
        // On bands level 1, the template is +-sqrt(2).
        let fam = GridFamily::new(GridKind::Bands, 3).unwrap();
        let t = template_wavelet(&fam, TemplateKind::III, 1, 0).unwrap();
        let s2 = 2.0f64.sqrt();
        assert!((t.values[0] - s2).abs() < 1e-12);
        assert!((t.values[1] + s2).abs() < 1e-12);
    }

    #[test]
    fn template_lies_in_the_cube_basis_span() {
        // Projecting the template onto the cube's wavelets reproduces it:
        // sum of <t, psi>^2 equals |t|^2 = 1.
        let cases = [
            (GridKind::Squares, TemplateKind::I),
            (GridKind::Parabolic, TemplateKind::II),
            (GridKind::Bands, TemplateKind::III),
        ];
        for (gk, tk) in cases {
            let fam = GridFamily::new(gk, 2).unwrap();
            let cube = CubeRef::new(1, 1);
            let t = template_wavelet(&fam, tk, 1, 1).unwrap();
            let basis = build_cube_basis(&fam, cube);
            let energy: f64 = basis
                .haars
                .iter()
                .map(|h| {
                    let ip = haar_inner_product(&fam, &t, h);
                    ip * ip
                })
                .sum();
            assert!(
                (energy - 1.0).abs() < 1e-10,
                "{gk}/{tk}: projected energy {energy}"
            );
        }
    }

    #[test]
    fn template_rejects_wrong_geometry() {
        let bands = GridFamily::new(GridKind::Bands, 2).unwrap();
        assert!(matches!(
            template_wavelet(&bands, TemplateKind::I, 0, 0),
            Err(TemplateError::ChildCountMismatch { .. })
        ));
    }

    #[test]
    fn template_rejects_unbalanced_measures() {
        use crate::family::ExplicitFamily;
        let fam = ExplicitFamily::from_levels(vec![
            vec![(1.0, vec![0, 1])],
            vec![(0.7, vec![]), (0.3, vec![])],
        ])
        .unwrap();
        assert!(matches!(
            template_for_cube(&fam, TemplateKind::III, ROOT),
            Err(TemplateError::UnbalancedHalves { .. })
        ));
    }

    #[test]
    fn image_level_caps() {
        let sq = GridFamily::new(GridKind::Squares, 12).unwrap();
        assert_eq!(sq.max_image_level(1024, 1024), 10);
        let pb = GridFamily::new(GridKind::Parabolic, 12).unwrap();
        assert_eq!(pb.max_image_level(4096, 64), 6);
        let bd = GridFamily::new(GridKind::Bands, 12).unwrap();
        assert_eq!(bd.max_image_level(4096, 64), 12);
    }
}
