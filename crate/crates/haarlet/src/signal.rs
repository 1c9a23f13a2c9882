//! Pixelated signals: piecewise-constant functions given by their means
//! on the cells of one level of a dyadic family.
//!
//! A signal fixes everything coarser than its own level: integrals over
//! cubes aggregate exactly along the hierarchy, so means, wavelet
//! coefficients and regularity functionals at shallower levels are all
//! computed from one bottom-up pass that is cached on first use.

use crate::family::{ancestor_at, offspring_position, CubeRef, DyadicFamily};
use crate::grid::GridFamily;
use crate::numfmt::sig6;
use crate::pgm::ImageGrid;
use std::f64::consts::PI;
use std::io::{self, Write};
use std::sync::OnceLock;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SignalError {
    #[error("geometry: {0}")]
    Geometry(String),
    #[error("cube at level {cube_level} is below the signal resolution {signal_level}")]
    LevelTooDeep {
        cube_level: usize,
        signal_level: usize,
    },
    #[error("tabulated field carries {got} values, level {level} has {expected} cells")]
    TabulatedLength {
        level: usize,
        expected: usize,
        got: usize,
    },
    #[error("midpoint quadrature needs at least one sample per axis")]
    QuadZero,
}

/// Cell means at one level, plus a lazily built cache of cube integrals
/// for every coarser level. A signal belongs to the family it is first
/// queried against; mixing families with coincidentally equal level
/// sizes is a logic error the cache cannot detect.
#[derive(Debug)]
pub struct Signal {
    pub level: usize,
    pub cell_means: Vec<f64>,
    integrals: OnceLock<Vec<Vec<f64>>>,
}

impl Clone for Signal {
    fn clone(&self) -> Self {
        Signal {
            level: self.level,
            cell_means: self.cell_means.clone(),
            integrals: OnceLock::new(),
        }
    }
}

impl Signal {
    pub fn from_cell_means(level: usize, cell_means: Vec<f64>) -> Signal {
        Signal {
            level,
            cell_means,
            integrals: OnceLock::new(),
        }
    }

    /// Integrals of the signal over every cube at levels 0..=level,
    /// indexed `[level][index]`. Built once, bottom-up.
    pub fn integrals(&self, family: &dyn DyadicFamily) -> &[Vec<f64>] {
        self.integrals.get_or_init(|| {
            assert_eq!(
                self.cell_means.len(),
                family.level_size(self.level),
                "signal has {} cells, family level {} has {}",
                self.cell_means.len(),
                self.level,
                family.level_size(self.level)
            );
            let mut ints: Vec<Vec<f64>> = (0..=self.level)
                .map(|j| vec![0.0; family.level_size(j)])
                .collect();
            for k in 0..self.cell_means.len() {
                ints[self.level][k] =
                    self.cell_means[k] * family.measure(CubeRef::new(self.level, k));
            }
            for j in (0..self.level).rev() {
                for k in 0..family.level_size(j) {
                    let q = CubeRef::new(j, k);
                    let mut acc = 0.0;
                    for i in 0..family.offspring_count(q) {
                        acc += ints[j + 1][family.offspring(q, i).index];
                    }
                    ints[j][k] = acc;
                }
            }
            ints
        })
    }

    /// Integral of the signal over one cube.
    pub fn integral(&self, family: &dyn DyadicFamily, cube: CubeRef) -> Result<f64, SignalError> {
        if cube.level > self.level {
            return Err(SignalError::LevelTooDeep {
                cube_level: cube.level,
                signal_level: self.level,
            });
        }
        Ok(self.integrals(family)[cube.level][cube.index])
    }

    /// Mean of the signal over one cube (integral / measure).
    pub fn cube_mean(&self, family: &dyn DyadicFamily, cube: CubeRef) -> Result<f64, SignalError> {
        Ok(self.integral(family, cube)? / family.measure(cube))
    }

    /// Means of all cubes at one level.
    pub fn level_means(&self, family: &dyn DyadicFamily, level: usize) -> Result<Vec<f64>, SignalError> {
        if level > self.level {
            return Err(SignalError::LevelTooDeep {
                cube_level: level,
                signal_level: self.level,
            });
        }
        let ints = &self.integrals(family)[level];
        Ok((0..ints.len())
            .map(|k| ints[k] / family.measure(CubeRef::new(level, k)))
            .collect())
    }

    /// Re-pixelate at a coarser level. Coefficients of wavelets that both
    /// resolutions determine are unchanged by this.
    pub fn coarsen(&self, family: &dyn DyadicFamily, level: usize) -> Result<Signal, SignalError> {
        Ok(Signal::from_cell_means(level, self.level_means(family, level)?))
    }

    /// Dump the leaf cells as CSV: `index,measure,mean`.
    pub fn write_csv(&self, family: &dyn DyadicFamily, out: &mut dyn Write) -> io::Result<()> {
        writeln!(out, "index,measure,mean")?;
        for k in 0..self.cell_means.len() {
            let mu = family.measure(CubeRef::new(self.level, k));
            writeln!(out, "{k},{},{}", sig6(mu), sig6(self.cell_means[k]))?;
        }
        Ok(())
    }
}

/// Test patterns and exactly representable fields.
///
/// The oscillatory trio lives on the unit square with gray values in
/// [0, 255]: a vertical sinusoidal grating, its diagonal counterpart,
/// and the grating cut off at a vertical line. The remaining kinds are
/// resolved exactly through the family structure rather than sampled.
#[derive(Debug, Clone)]
pub enum AnalyticField {
    /// 127.5 (1 + sin 20 pi x): ten grating periods across the square.
    F1,
    /// 127.5 (1 + sin 20 pi (x + y)): the same grating rotated 45 degrees.
    F2,
    /// F1 restricted to the slab x <= b_i, zero beyond; cutoffs b_1..b_5
    /// are 1/8, 1/4, 1/2, 3/4, 7/8.
    G(usize),
    Constant(f64),
    /// Indicator of one cube.
    Indicator(CubeRef),
    /// A wavelet of the family itself (Gram-Schmidt, given lambda).
    Haar { support: CubeRef, lambda: usize },
    /// Explicit leaf means, passed through untouched.
    Tabulated(Vec<f64>),
}

pub const G_CUTOFFS: [f64; 5] = [0.125, 0.25, 0.5, 0.75, 0.875];

impl AnalyticField {
    /// Pointwise value; only the closed-form kinds support this.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            AnalyticField::F1 => 127.5 * (1.0 + (20.0 * PI * x).sin()),
            AnalyticField::F2 => 127.5 * (1.0 + (20.0 * PI * (x + y)).sin()),
            AnalyticField::G(i) => {
                if x <= G_CUTOFFS[i - 1] {
                    127.5 * (1.0 + (20.0 * PI * x).sin())
                } else {
                    0.0
                }
            }
            AnalyticField::Constant(c) => *c,
            other => panic!("{other:?} has no pointwise form; sample it through the family"),
        }
    }

    /// Parse the CLI spelling: F1, F2, G1..G5, constant:<value>.
    pub fn parse(text: &str) -> Result<AnalyticField, String> {
        match text {
            "F1" => return Ok(AnalyticField::F1),
            "F2" => return Ok(AnalyticField::F2),
            _ => {}
        }
        if let Some(rest) = text.strip_prefix('G') {
            if let Ok(i) = rest.parse::<usize>() {
                if (1..=5).contains(&i) {
                    return Ok(AnalyticField::G(i));
                }
            }
            return Err(format!("unknown field '{text}' (G takes 1..5)"));
        }
        if let Some(v) = text.strip_prefix("constant:") {
            return v
                .parse::<f64>()
                .map(AnalyticField::Constant)
                .map_err(|e| format!("bad constant value '{v}': {e}"));
        }
        Err(format!(
            "unknown field '{text}'; expected F1, F2, G1..G5 or constant:<value>"
        ))
    }

    /// Mean of F1 over a cell [a,b] x [c,d] in closed form; the
    /// quadrature oracle for tests.
    pub fn f1_exact_cell_mean(a: f64, b: f64) -> f64 {
        let w = 20.0 * PI;
        127.5 * (1.0 + ((w * a).cos() - (w * b).cos()) / (w * (b - a)))
    }
}

/// Pixelate a field on the cells of one level of a built-in grid.
///
/// Closed-form fields use a quad x quad midpoint rule per cell; the
/// structural kinds (constant, indicator, wavelet, tabulated) are exact
/// whatever `quad` says.
pub fn sample_field(
    field: &AnalyticField,
    grid: &GridFamily,
    level: usize,
    quad: usize,
) -> Result<Signal, SignalError> {
    if level > grid.max_level() {
        return Err(SignalError::Geometry(format!(
            "level {level} beyond family depth {}",
            grid.max_level()
        )));
    }
    let cells = grid.level_size(level);

    let means = match field {
        AnalyticField::Constant(c) => vec![*c; cells],
        AnalyticField::Tabulated(v) => {
            if v.len() != cells {
                return Err(SignalError::TabulatedLength {
                    level,
                    expected: cells,
                    got: v.len(),
                });
            }
            v.clone()
        }
        AnalyticField::Indicator(cube) => {
            let mut means = vec![0.0; cells];
            if cube.level <= level {
                for (k, m) in means.iter_mut().enumerate() {
                    let q = CubeRef::new(level, k);
                    if ancestor_at(grid, q, cube.level) == *cube {
                        *m = 1.0;
                    }
                }
            } else {
                // The indicator is finer than the cells: only the cell
                // containing it sees it, diluted by the measure ratio.
                let host = ancestor_at(grid, *cube, level);
                means[host.index] = grid.measure(*cube) / grid.measure(host);
            }
            means
        }
        AnalyticField::Haar { support, lambda } => {
            if support.level + 1 > level {
                return Err(SignalError::Geometry(format!(
                    "wavelet on {support} is constant only from level {}; \
                     cells at level {level} cannot carry it",
                    support.level + 1
                )));
            }
            let basis = crate::haar::build_cube_basis(grid, *support);
            let h = basis
                .haars
                .get(lambda - 1)
                .unwrap_or_else(|| panic!("{support} has no wavelet lambda={lambda}"))
                .clone();
            let mut means = vec![0.0; cells];
            for (k, m) in means.iter_mut().enumerate() {
                let q = CubeRef::new(level, k);
                if ancestor_at(grid, q, support.level) == *support {
                    let step = ancestor_at(grid, q, support.level + 1);
                    *m = h.values[offspring_position(grid, *support, step)];
                }
            }
            means
        }
        AnalyticField::F1 | AnalyticField::F2 | AnalyticField::G(_) => {
            if quad == 0 {
                return Err(SignalError::QuadZero);
            }
            let q = quad as f64;
            let mut means = Vec::with_capacity(cells);
            for k in 0..cells {
                let r = grid.cell_rect(CubeRef::new(level, k));
                let (wx, wy) = (r.x1 - r.x0, r.y1 - r.y0);
                let mut acc = 0.0;
                for t in 0..quad {
                    let y = r.y0 + (t as f64 + 0.5) * wy / q;
                    for s in 0..quad {
                        let x = r.x0 + (s as f64 + 0.5) * wx / q;
                        acc += field.eval(x, y);
                    }
                }
                means.push(acc / (q * q));
            }
            means
        }
    };
    Ok(Signal::from_cell_means(level, means))
}

/// Block-average an image onto the cells of one level. Every cell must
/// cover a whole number of pixels on each axis; squares additionally
/// need a square image so cells stay square in pixel space.
pub fn image_to_signal(
    image: &ImageGrid,
    grid: &GridFamily,
    level: usize,
) -> Result<Signal, SignalError> {
    if level > grid.max_level() {
        return Err(SignalError::Geometry(format!(
            "level {level} beyond family depth {}",
            grid.max_level()
        )));
    }
    let (nx, ny) = grid.grid_dims(level);
    if grid.kind() == crate::grid::GridKind::Squares && image.width != image.height {
        return Err(SignalError::Geometry(format!(
            "square cells need a square image, got {}x{}",
            image.width, image.height
        )));
    }
    if image.width % nx != 0 {
        return Err(SignalError::Geometry(format!(
            "width {} is not divisible by the {} cells along x at level {}",
            image.width, nx, level
        )));
    }
    if image.height % ny != 0 {
        return Err(SignalError::Geometry(format!(
            "height {} is not divisible by the {} cells along y at level {}",
            image.height, ny, level
        )));
    }
    let (bx, by) = (image.width / nx, image.height / ny);
    let mut means = vec![0.0; nx * ny];
    for ky in 0..ny {
        for kx in 0..nx {
            let mut acc = 0.0;
            for r in ky * by..(ky + 1) * by {
                for c in kx * bx..(kx + 1) * bx {
                    acc += image.samples[r * image.width + c] as f64;
                }
            }
            means[ky * nx + kx] = acc / (bx * by) as f64;
        }
    }
    Ok(Signal::from_cell_means(level, means))
}
