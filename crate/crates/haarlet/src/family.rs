//! Dyadic partition families on a probability space.
//!
//! A family is a sequence of finite partitions of a measure-one space,
//! one per level. Level 0 holds the whole space as a single cube; each
//! cube at level j+1 sits inside exactly one cube at level j (its
//! parent), and each non-leaf cube splits into at least two offspring
//! whose measures add up to its own. A single constant B bounds both
//! the parent/child measure ratio and the offspring count.

use serde::Deserialize;
use std::fmt;
use thiserror::Error;

/// Address of one cube: scale level `level` and position `index` within
/// that level. Indices run 0..level_size(level); level 0 has index 0 only.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct CubeRef {
    pub level: usize,
    pub index: usize,
}

impl CubeRef {
    pub fn new(level: usize, index: usize) -> Self {
        CubeRef { level, index }
    }
}

impl fmt::Display for CubeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q({},{})", self.level, self.index)
    }
}

/// The whole space.
pub const ROOT: CubeRef = CubeRef { level: 0, index: 0 };

/// Nested hierarchy of finite partitions with bounded inheritance.
///
/// Implementations must keep offspring order stable: `offspring(q, i)`
/// for `i` in `0..offspring_count(q)` is the canonical child order used
/// everywhere downstream (basis construction, templates, coefficients).
///
/// Methods panic on out-of-range cube references; operations that can
/// fail for in-range inputs return `Result` instead.
pub trait DyadicFamily {
    /// Deepest level carried by this family (leaf level).
    fn max_level(&self) -> usize;

    /// Number of cubes at `level`.
    fn level_size(&self, level: usize) -> usize;

    /// Measure of the cube, strictly positive; the root has measure 1.
    fn measure(&self, cube: CubeRef) -> f64;

    /// Number of offspring. Zero exactly when `cube.level == max_level()`.
    fn offspring_count(&self, cube: CubeRef) -> usize;

    /// The `i`-th offspring in canonical order.
    fn offspring(&self, cube: CubeRef, i: usize) -> CubeRef;

    /// The cube one level up containing this one; `None` for the root.
    fn parent(&self, cube: CubeRef) -> Option<CubeRef>;

    /// Declared inheritance coefficient B >= 2: measure(parent) <=
    /// B * measure(child) and offspring counts stay within [2, B].
    fn inheritance_coefficient(&self) -> f64;

    /// gamma = 1 - 1/B, the per-level decay factor for descendant
    /// measures: a descendant l levels down has measure <= gamma^l
    /// times its ancestor's.
    fn decay_ratio(&self) -> f64 {
        1.0 - 1.0 / self.inheritance_coefficient()
    }

    fn root(&self) -> CubeRef {
        ROOT
    }

    fn is_leaf(&self, cube: CubeRef) -> bool {
        cube.level == self.max_level()
    }

    /// Total cube count across all levels.
    fn total_cubes(&self) -> usize {
        (0..=self.max_level()).map(|j| self.level_size(j)).sum()
    }
}

/// Walk `cube` up to `level` (which must be <= cube.level).
pub fn ancestor_at(family: &dyn DyadicFamily, mut cube: CubeRef, level: usize) -> CubeRef {
    assert!(
        level <= cube.level,
        "ancestor_at: target level {} above cube level {}",
        level,
        cube.level
    );
    while cube.level > level {
        cube = family
            .parent(cube)
            .expect("non-root cube must have a parent");
    }
    cube
}

/// Position of `child` within its parent's offspring list.
pub fn offspring_position(family: &dyn DyadicFamily, parent: CubeRef, child: CubeRef) -> usize {
    let n = family.offspring_count(parent);
    for i in 0..n {
        if family.offspring(parent, i) == child {
            return i;
        }
    }
    panic!("{child} is not an offspring of {parent}");
}

/// The minimal inheritance coefficient the measures actually support:
/// the largest parent/child measure ratio across the family, floored at
/// the theoretical minimum of 2. Constants derived from B are sharpest
/// with this value rather than a declared upper bound.
pub fn computed_inheritance(family: &dyn DyadicFamily) -> f64 {
    let mut b: f64 = 2.0;
    for j in 0..family.max_level() {
        for k in 0..family.level_size(j) {
            let q = CubeRef::new(j, k);
            let mu = family.measure(q);
            for i in 0..family.offspring_count(q) {
                let ratio = mu / family.measure(family.offspring(q, i));
                if ratio.is_finite() {
                    b = b.max(ratio);
                }
            }
        }
    }
    b
}

// Axiom identifiers used in validation reports. These strings are part of
// the CLI output protocol (`validate` prints one per violated axiom) and
// must not be reworded.
pub const AXIOM_PARTITION: &str = "2.1.b-partition";
pub const AXIOM_POSITIVE: &str = "2.1.c-positive";
pub const AXIOM_NESTING: &str = "2.1.d-nesting";
pub const AXIOM_INHERITANCE: &str = "2.1.e-inheritance";
pub const AXIOM_ADDITIVITY: &str = "2.2.1-additivity";

/// One failed axiom check, tied to the cube where it was detected.
#[derive(Debug, Clone)]
pub struct Violation {
    pub axiom: &'static str,
    pub cube: CubeRef,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}: {}", self.axiom, self.cube, self.detail)
    }
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
    /// Minimal valid inheritance coefficient: the largest parent/child
    /// measure ratio actually present (at least 2 in a valid family).
    pub computed_b: f64,
    /// 1 - 1/computed_b.
    pub computed_gamma: f64,
}

/// Check every family axiom against every cube.
///
/// `tol` is the absolute tolerance for the sum checks (level measures
/// summing to 1) and the relative tolerance for offspring additivity.
/// `computed_b` is reported even when validation fails, as long as
/// measures are finite.
pub fn validate_family(family: &dyn DyadicFamily, tol: f64) -> ValidationReport {
    let mut violations = Vec::new();
    let b_declared = family.inheritance_coefficient();
    let max_level = family.max_level();
    let mut computed_b: f64 = 1.0;

    if family.level_size(0) != 1 {
        violations.push(Violation {
            axiom: AXIOM_PARTITION,
            cube: ROOT,
            detail: format!("level 0 must hold exactly one cube, found {}", family.level_size(0)),
        });
    }
    if b_declared < 2.0 - tol {
        violations.push(Violation {
            axiom: AXIOM_INHERITANCE,
            cube: ROOT,
            detail: format!("inheritance coefficient {} is below 2", b_declared),
        });
    }

    for j in 0..=max_level {
        let mut level_sum = 0.0;
        for k in 0..family.level_size(j) {
            let q = CubeRef::new(j, k);
            let mu = family.measure(q);
            level_sum += mu;

            if !(mu > 0.0) || !mu.is_finite() {
                violations.push(Violation {
                    axiom: AXIOM_POSITIVE,
                    cube: q,
                    detail: format!("measure {mu} is not strictly positive"),
                });
                continue;
            }

            if j == max_level {
                continue;
            }
            let n = family.offspring_count(q);
            if n < 2 {
                // A single offspring would coincide with its parent, so the
                // nesting could not be strict.
                violations.push(Violation {
                    axiom: AXIOM_NESTING,
                    cube: q,
                    detail: format!("only {n} offspring; strict nesting needs at least 2"),
                });
                continue;
            }
            if (n as f64) > b_declared + tol {
                violations.push(Violation {
                    axiom: AXIOM_INHERITANCE,
                    cube: q,
                    detail: format!("{n} offspring exceeds inheritance coefficient {b_declared}"),
                });
            }

            let mut child_sum = 0.0;
            for i in 0..n {
                let c = family.offspring(q, i);
                let mu_c = family.measure(c);
                child_sum += mu_c;
                if family.parent(c) != Some(q) {
                    violations.push(Violation {
                        axiom: AXIOM_NESTING,
                        cube: c,
                        detail: format!("parent link does not point back to {q}"),
                    });
                }
                if !(mu_c > 0.0) || !mu_c.is_finite() {
                    continue; // reported above when its own level is scanned
                }
                if mu_c >= mu {
                    violations.push(Violation {
                        axiom: AXIOM_NESTING,
                        cube: c,
                        detail: format!(
                            "offspring measure {mu_c} is not strictly below parent measure {mu}"
                        ),
                    });
                }
                let ratio = mu / mu_c;
                if ratio.is_finite() {
                    computed_b = computed_b.max(ratio);
                }
                if ratio > b_declared * (1.0 + tol) {
                    violations.push(Violation {
                        axiom: AXIOM_INHERITANCE,
                        cube: c,
                        detail: format!(
                            "parent/child measure ratio {ratio} exceeds coefficient {b_declared}"
                        ),
                    });
                }
            }
            if (child_sum - mu).abs() > tol * mu.abs().max(1.0) {
                violations.push(Violation {
                    axiom: AXIOM_ADDITIVITY,
                    cube: q,
                    detail: format!("offspring measures sum to {child_sum}, parent has {mu}"),
                });
            }
        }
        if (level_sum - 1.0).abs() > tol {
            violations.push(Violation {
                axiom: AXIOM_PARTITION,
                cube: CubeRef::new(j, 0),
                detail: format!("level {j} measures sum to {level_sum}, expected 1"),
            });
        }
    }

    ValidationReport {
        ok: violations.is_empty(),
        violations,
        computed_b,
        computed_gamma: 1.0 - 1.0 / computed_b,
    }
}

#[derive(Debug, Error)]
pub enum FamilyError {
    #[error("family JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("family structure: {0}")]
    Structure(String),
}

#[derive(Debug, Clone)]
struct Node {
    measure: f64,
    children: Vec<usize>,
    parent: Option<usize>,
}

/// A family given by an explicit table of levels, typically loaded from
/// JSON of the shape
/// `{"levels": [[{"measure": 1.0, "children": [0, 1]}], [...], ...]}`
/// where `children` lists indices into the next level. The inheritance
/// coefficient is computed from the measures (largest parent/child ratio,
/// floored at 2).
pub struct ExplicitFamily {
    levels: Vec<Vec<Node>>,
    b: f64,
}

#[derive(Deserialize)]
struct RawFamily {
    levels: Vec<Vec<RawCube>>,
}

#[derive(Deserialize)]
struct RawCube {
    measure: f64,
    #[serde(default)]
    children: Vec<usize>,
}

impl ExplicitFamily {
    pub fn from_json(text: &str) -> Result<Self, FamilyError> {
        let raw: RawFamily = serde_json::from_str(text)?;
        let levels = raw
            .levels
            .into_iter()
            .map(|lv| lv.into_iter().map(|c| (c.measure, c.children)).collect())
            .collect();
        Self::from_levels(levels)
    }

    /// Build from `(measure, children)` rows per level, resolving parent
    /// links. Structural requirements checked here (axiom checks live in
    /// `validate_family`): one root, every non-final-level cube's children
    /// in range, and every next-level cube claimed by exactly one parent.
    pub fn from_levels(levels: Vec<Vec<(f64, Vec<usize>)>>) -> Result<Self, FamilyError> {
        if levels.is_empty() {
            return Err(FamilyError::Structure("no levels".into()));
        }
        if levels[0].len() != 1 {
            return Err(FamilyError::Structure(format!(
                "level 0 must hold exactly one cube, found {}",
                levels[0].len()
            )));
        }
        let last = levels.len() - 1;
        let mut nodes: Vec<Vec<Node>> = levels
            .iter()
            .map(|lv| {
                lv.iter()
                    .map(|(m, ch)| Node {
                        measure: *m,
                        children: ch.clone(),
                        parent: None,
                    })
                    .collect()
            })
            .collect();

        for j in 0..=last {
            let next_size = if j < last { nodes[j + 1].len() } else { 0 };
            let mut claimed = vec![false; next_size];
            for k in 0..nodes[j].len() {
                let children = nodes[j][k].children.clone();
                if j == last {
                    if !children.is_empty() {
                        return Err(FamilyError::Structure(format!(
                            "cube ({j},{k}) on the final level lists children"
                        )));
                    }
                    continue;
                }
                for &c in &children {
                    if c >= next_size {
                        return Err(FamilyError::Structure(format!(
                            "cube ({j},{k}) lists child {c}, but level {} has {} cubes",
                            j + 1,
                            next_size
                        )));
                    }
                    if claimed[c] {
                        return Err(FamilyError::Structure(format!(
                            "cube ({},{}) is claimed by two parents",
                            j + 1,
                            c
                        )));
                    }
                    claimed[c] = true;
                    nodes[j + 1][c].parent = Some(k);
                }
            }
            if let Some(orphan) = claimed.iter().position(|&c| !c) {
                return Err(FamilyError::Structure(format!(
                    "cube ({},{orphan}) has no parent",
                    j + 1
                )));
            }
        }

        // Minimal coefficient consistent with the measures; never below the
        // theoretical floor of 2.
        let mut b: f64 = 2.0;
        for j in 0..last {
            for node in &nodes[j] {
                for &c in &node.children {
                    let ratio = node.measure / nodes[j + 1][c].measure;
                    if ratio.is_finite() {
                        b = b.max(ratio);
                    }
                }
            }
        }

        Ok(ExplicitFamily { levels: nodes, b })
    }

    fn node(&self, cube: CubeRef) -> &Node {
        &self.levels[cube.level][cube.index]
    }
}

impl DyadicFamily for ExplicitFamily {
    fn max_level(&self) -> usize {
        self.levels.len() - 1
    }

    fn level_size(&self, level: usize) -> usize {
        self.levels[level].len()
    }

    fn measure(&self, cube: CubeRef) -> f64 {
        self.node(cube).measure
    }

    fn offspring_count(&self, cube: CubeRef) -> usize {
        self.node(cube).children.len()
    }

    fn offspring(&self, cube: CubeRef, i: usize) -> CubeRef {
        CubeRef::new(cube.level + 1, self.node(cube).children[i])
    }

    fn parent(&self, cube: CubeRef) -> Option<CubeRef> {
        self.node(cube).parent.map(|k| CubeRef::new(cube.level - 1, k))
    }

    fn inheritance_coefficient(&self) -> f64 {
        self.b
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uneven_family() -> ExplicitFamily {
        // Root splits 0.75/0.25; the heavy child splits evenly.
        ExplicitFamily::from_levels(vec![
            vec![(1.0, vec![0, 1])],
            vec![(0.75, vec![0, 1]), (0.25, vec![2, 3])],
            vec![(0.375, vec![]), (0.375, vec![]), (0.125, vec![]), (0.125, vec![])],
        ])
        .unwrap()
    }

    #[test]
    fn uneven_split_validates_with_computed_b_4() {
        let fam = uneven_family();
        let report = validate_family(&fam, 1e-9);
        assert!(report.ok, "unexpected violations: {:?}", report.violations);
        // The 1.0 -> 0.25 edge forces B = 4 even though counts are all 2.
        assert!((report.computed_b - 4.0).abs() < 1e-12);
        assert!((report.computed_gamma - 0.75).abs() < 1e-12);
        assert!((fam.inheritance_coefficient() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn additivity_violation_is_flagged() {
        let fam = ExplicitFamily::from_levels(vec![
            vec![(1.0, vec![0, 1])],
            vec![(0.6, vec![]), (0.5, vec![])],
        ])
        .unwrap();
        let report = validate_family(&fam, 1e-9);
        assert!(!report.ok);
        assert!(report.violations.iter().any(|v| v.axiom == AXIOM_ADDITIVITY));
        // 0.6 + 0.5 = 1.1 also breaks the level partition sum.
        assert!(report.violations.iter().any(|v| v.axiom == AXIOM_PARTITION));
    }

    #[test]
    fn nonpositive_measure_is_flagged() {
        let fam = ExplicitFamily::from_levels(vec![
            vec![(1.0, vec![0, 1])],
            vec![(1.0, vec![]), (0.0, vec![])],
        ])
        .unwrap();
        let report = validate_family(&fam, 1e-9);
        assert!(report.violations.iter().any(|v| v.axiom == AXIOM_POSITIVE));
        // The sibling carrying the full parent measure breaks strict nesting.
        assert!(report.violations.iter().any(|v| v.axiom == AXIOM_NESTING));
    }

    #[test]
    fn single_offspring_breaks_nesting() {
        let fam = ExplicitFamily::from_levels(vec![
            vec![(1.0, vec![0])],
            vec![(1.0, vec![])],
        ])
        .unwrap();
        let report = validate_family(&fam, 1e-9);
        assert!(report.violations.iter().any(|v| v.axiom == AXIOM_NESTING));
    }

    #[test]
    fn json_round_trip_and_links() {
        let fam = ExplicitFamily::from_json(
            r#"{"levels": [
                [{"measure": 1.0, "children": [0, 1, 2]}],
                [{"measure": 0.5}, {"measure": 0.3}, {"measure": 0.2}]
            ]}"#,
        )
        .unwrap();
        assert_eq!(fam.max_level(), 1);
        assert_eq!(fam.level_size(1), 3);
        let q = CubeRef::new(1, 1);
        assert_eq!(fam.parent(q), Some(ROOT));
        assert_eq!(fam.offspring(ROOT, 2), CubeRef::new(1, 2));
        // 1.0 / 0.2 = 5 dominates the count of 3.
        assert!((fam.inheritance_coefficient() - 5.0).abs() < 1e-12);
        assert!(validate_family(&fam, 1e-9).ok);
    }

    #[test]
    fn orphan_and_double_claim_are_structural_errors() {
        let orphan = ExplicitFamily::from_levels(vec![
            vec![(1.0, vec![0])],
            vec![(0.5, vec![]), (0.5, vec![])],
        ]);
        assert!(matches!(orphan, Err(FamilyError::Structure(_))));

        let doubled = ExplicitFamily::from_levels(vec![
            vec![(1.0, vec![0, 0])],
            vec![(1.0, vec![])],
        ]);
        assert!(matches!(doubled, Err(FamilyError::Structure(_))));
    }

    #[test]
    fn descendant_decay_follows_gamma() {
        let fam = uneven_family();
        let gamma = fam.decay_ratio();
        // Every grandchild measure must sit below gamma^2.
        for k in 0..fam.level_size(2) {
            let mu = fam.measure(CubeRef::new(2, k));
            assert!(mu <= gamma * gamma + 1e-12, "mu={mu} gamma^2={}", gamma * gamma);
        }
    }
}
