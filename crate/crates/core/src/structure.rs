//! The combinatorial self-similar structure and its analytic weights.
//!
//! A structure is the blueprint from which every lattice level is built:
//! `N` cells, a boundary vertex set `F` (each label is the fixed point of
//! one cell), gluing rules identifying boundary vertices of distinct cells,
//! a base conductance form on `F`, a base mass, and the energy/measure
//! scaling weights `alpha` and `beta` subject to hypothesis (H).

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Relative tolerance for hypothesis (H) and the beta sum.
pub const WEIGHT_TOL: f64 = 1e-12;

/// A boundary label together with the 1-based index of the cell whose
/// fixed point it is.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryLabel {
    pub label: String,
    pub cell: usize,
}

/// An identification `(cell i, label z) ~ (cell j, label z')` between
/// boundary vertices of two distinct level-1 copies.
///
/// Cells are 1-based; labels are indices into `boundary_labels`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Gluing {
    pub a: (usize, usize),
    pub b: (usize, usize),
}

/// Combinatorial blueprint of a finitely ramified self-similar lattice.
#[derive(Clone, Debug)]
pub struct SelfSimilarStructure {
    /// Number of cells N >= 2.
    pub cell_count: usize,
    /// Ordered boundary labels, k >= 2 of them.
    pub boundary_labels: Vec<BoundaryLabel>,
    /// Identifications between boundary vertices of distinct cells.
    pub gluings: Vec<Gluing>,
    /// Symmetric k x k conductance matrix a_{z,z'}, zero diagonal.
    pub conductances: Vec<Vec<f64>>,
    /// Strictly positive base mass b(z) per label.
    pub base_mass: Vec<f64>,
    /// Energy scaling weights, each in (0,1).
    pub alpha: Vec<f64>,
    /// Measure scaling weights, each in (0,1), summing to 1.
    pub beta: Vec<f64>,
    /// The common value gamma = (alpha_i beta_i)^{-1} under hypothesis (H).
    pub gamma: f64,
}

/// One validation failure: a stable rule id plus a human message.
#[derive(Clone, Debug)]
pub struct Violation {
    pub rule: &'static str,
    pub message: String,
}

/// Quantities derived during validation.
#[derive(Clone, Copy, Debug)]
pub struct Derived {
    pub gamma: f64,
    /// Uniform norm bound K: every level-n eigenvalue lies in [-K, 0].
    pub norm_bound: f64,
}

/// Result of [`validate_structure`]; failures are entries, not faults.
#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
    pub derived: Option<Derived>,
    /// Informational notes that do not fail validation.
    pub notes: Vec<String>,
}

impl SelfSimilarStructure {
    /// Number of boundary labels k.
    pub fn boundary_size(&self) -> usize {
        self.boundary_labels.len()
    }

    pub fn label_index(&self, name: &str) -> Option<usize> {
        self.boundary_labels.iter().position(|l| l.label == name)
    }
}

/// Canonical test fixtures.
///
/// `"interval"`: the unit interval, N = 2, F = {q0@1, q1@2}, one gluing,
/// unit conductance, b = (1/2, 1/2), alpha = beta = (1/2, 1/2).
/// `"sg3"`: the 3-cell Sierpinski gasket, F = {q1@1, q2@2, q3@3}, pairwise
/// gluings, unit conductances, b = (1/3,..), alpha = (3/5,..), beta = (1/3,..).
pub fn builtin_structure(name: &str) -> Result<SelfSimilarStructure> {
    match name {
        "interval" => Ok(SelfSimilarStructure {
            cell_count: 2,
            boundary_labels: vec![
                BoundaryLabel { label: "q0".to_string(), cell: 1 },
                BoundaryLabel { label: "q1".to_string(), cell: 2 },
            ],
            gluings: vec![Gluing { a: (1, 1), b: (2, 0) }],
            conductances: vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            base_mass: vec![0.5, 0.5],
            alpha: vec![0.5, 0.5],
            beta: vec![0.5, 0.5],
            gamma: 4.0,
        }),
        "sg3" => {
            let third = 1.0 / 3.0;
            let mut gluings = Vec::new();
            for i in 1..=3usize {
                for j in (i + 1)..=3 {
                    // copy i's vertex q_j ~ copy j's vertex q_i
                    gluings.push(Gluing { a: (i, j - 1), b: (j, i - 1) });
                }
            }
            let mut conductances = vec![vec![1.0; 3]; 3];
            for (z, row) in conductances.iter_mut().enumerate() {
                row[z] = 0.0;
            }
            Ok(SelfSimilarStructure {
                cell_count: 3,
                boundary_labels: (1..=3)
                    .map(|i| BoundaryLabel { label: format!("q{i}"), cell: i })
                    .collect(),
                gluings,
                conductances,
                base_mass: vec![third; 3],
                alpha: vec![0.6; 3],
                beta: vec![third; 3],
                gamma: 5.0,
            })
        }
        other => Err(Error::UnknownName(other.to_string())),
    }
}

/// Check every structural invariant; on success populate gamma and the
/// norm bound K.
pub fn validate_structure(s: &SelfSimilarStructure) -> ValidationReport {
    let mut violations = Vec::new();
    let mut notes = Vec::new();
    let n = s.cell_count;
    let k = s.boundary_size();

    if n < 2 {
        violations.push(Violation {
            rule: "CellCount",
            message: format!("need at least 2 cells, got {n}"),
        });
    }
    if k < 2 {
        violations.push(Violation {
            rule: "BoundarySize",
            message: format!("need at least 2 boundary labels, got {k}"),
        });
    }
    if s.alpha.len() != n || s.beta.len() != n {
        violations.push(Violation {
            rule: "WeightArity",
            message: format!(
                "alpha/beta must have {n} entries, got {}/{}",
                s.alpha.len(),
                s.beta.len()
            ),
        });
    }
    if s.base_mass.len() != k || s.conductances.len() != k
        || s.conductances.iter().any(|row| row.len() != k)
    {
        violations.push(Violation {
            rule: "BoundaryArity",
            message: "mass/conductance arity does not match boundary labels".to_string(),
        });
    }
    if !violations.is_empty() {
        return ValidationReport { ok: false, violations, derived: None, notes };
    }

    for (i, label) in s.boundary_labels.iter().enumerate() {
        if label.cell == 0 || label.cell > n {
            violations.push(Violation {
                rule: "LabelCell",
                message: format!("label `{}` tagged with cell {} outside 1..={n}", label.label, label.cell),
            });
        }
        for other in &s.boundary_labels[..i] {
            if other.label == label.label {
                violations.push(Violation {
                    rule: "DuplicateLabel",
                    message: format!("label `{}` appears twice", label.label),
                });
            }
            if other.cell == label.cell {
                violations.push(Violation {
                    rule: "DuplicateFixedPoint",
                    message: format!(
                        "labels `{}` and `{}` both claim the fixed point of cell {}",
                        other.label, label.label, label.cell
                    ),
                });
            }
        }
    }

    for (i, &a) in s.alpha.iter().enumerate() {
        if !(a > 0.0 && a < 1.0) {
            violations.push(Violation {
                rule: "AlphaRange",
                message: format!("alpha_{} = {a} not in (0,1)", i + 1),
            });
        }
    }
    let mut beta_sum = 0.0;
    for (i, &b) in s.beta.iter().enumerate() {
        if !(b > 0.0 && b < 1.0) {
            violations.push(Violation {
                rule: "BetaRange",
                message: format!("beta_{} = {b} not in (0,1)", i + 1),
            });
        }
        beta_sum += b;
    }
    if libm::fabs(beta_sum - 1.0) > WEIGHT_TOL {
        violations.push(Violation {
            rule: "BetaSum",
            message: format!("beta must sum to 1, got {beta_sum}"),
        });
    }

    // Hypothesis (H): alpha_i beta_i constant, gamma the common inverse.
    let products: Vec<f64> = s.alpha.iter().zip(&s.beta).map(|(a, b)| a * b).collect();
    let p0 = products[0];
    if p0 > 0.0 {
        for (i, &p) in products.iter().enumerate().skip(1) {
            if libm::fabs(p - p0) > WEIGHT_TOL * libm::fabs(p0) {
                violations.push(Violation {
                    rule: "HypothesisH",
                    message: format!(
                        "beta must be proportional to 1/alpha: alpha_1 beta_1 = {p0}, alpha_{} beta_{} = {p}",
                        i + 1,
                        i + 1
                    ),
                });
            }
        }
    }
    let gamma = 1.0 / p0;
    if gamma.is_finite() && libm::fabs(s.gamma - gamma) > WEIGHT_TOL * libm::fabs(gamma) {
        violations.push(Violation {
            rule: "GammaConsistent",
            message: format!("stored gamma {} differs from (alpha_1 beta_1)^-1 = {gamma}", s.gamma),
        });
    }

    for (z, &b) in s.base_mass.iter().enumerate() {
        if !(b > 0.0) {
            violations.push(Violation {
                rule: "MassPositive",
                message: format!("base mass of `{}` must be > 0, got {b}", s.boundary_labels[z].label),
            });
        }
    }
    for z in 0..k {
        for z2 in 0..k {
            let a = s.conductances[z][z2];
            if a < 0.0 || !a.is_finite() {
                violations.push(Violation {
                    rule: "ConductanceRange",
                    message: format!("a({},{}) = {a} must be a finite nonnegative real",
                        s.boundary_labels[z].label, s.boundary_labels[z2].label),
                });
            }
            if libm::fabs(a - s.conductances[z2][z]) > 0.0 {
                violations.push(Violation {
                    rule: "ConductanceSymmetric",
                    message: format!("a({0},{1}) != a({1},{0})",
                        s.boundary_labels[z].label, s.boundary_labels[z2].label),
                });
            }
            if z == z2 && a != 0.0 {
                violations.push(Violation {
                    rule: "ConductanceDiagonal",
                    message: format!("a({0},{0}) must be 0", s.boundary_labels[z].label),
                });
            }
        }
    }

    for g in &s.gluings {
        for (cell, label) in [g.a, g.b] {
            if cell == 0 || cell > n {
                violations.push(Violation {
                    rule: "GluingCell",
                    message: format!("gluing references cell {cell} outside 1..={n}"),
                });
            }
            if label >= k {
                violations.push(Violation {
                    rule: "GluingLabel",
                    message: format!("gluing references label index {label} outside the boundary set"),
                });
            }
        }
        if g.a.0 == g.b.0 {
            violations.push(Violation {
                rule: "SelfGluing",
                message: format!("gluing identifies cell {} with itself", g.a.0),
            });
        }
    }
    if !violations.is_empty() {
        return ValidationReport { ok: false, violations, derived: None, notes };
    }

    // Irreducibility of A: strictly positive conductances connect F.
    if !conductance_connected(s) {
        violations.push(Violation {
            rule: "NotIrreducible",
            message: "the graph of strictly positive conductances on F is disconnected".to_string(),
        });
    }

    // Level-1 connectivity of the glued graph.
    if !level1_connected(s) {
        violations.push(Violation {
            rule: "Level1Disconnected",
            message: "the level-1 glued graph is disconnected".to_string(),
        });
    }

    for cell in 1..=n {
        if !s.boundary_labels.iter().any(|l| l.cell == cell) {
            notes.push(format!("cell {cell} contributes no boundary label; accepted (level-1 connected)"));
        }
    }

    let ok = violations.is_empty();
    let derived = if ok {
        Some(Derived { gamma, norm_bound: crate::operator::norm_bound(s) })
    } else {
        None
    };
    ValidationReport { ok, violations, derived, notes }
}

fn conductance_connected(s: &SelfSimilarStructure) -> bool {
    let k = s.boundary_size();
    let mut dsu = Dsu::new(k);
    for z in 0..k {
        for z2 in (z + 1)..k {
            if s.conductances[z][z2] > 0.0 {
                dsu.union(z, z2);
            }
        }
    }
    dsu.component_count() == 1
}

fn level1_connected(s: &SelfSimilarStructure) -> bool {
    // N copies of F, intra-copy edges from positive conductances, plus
    // the gluing identifications.
    let n = s.cell_count;
    let k = s.boundary_size();
    let mut dsu = Dsu::new(n * k);
    for c in 0..n {
        for z in 0..k {
            for z2 in (z + 1)..k {
                if s.conductances[z][z2] > 0.0 {
                    dsu.union(c * k + z, c * k + z2);
                }
            }
        }
    }
    for g in &s.gluings {
        dsu.union((g.a.0 - 1) * k + g.a.1, (g.b.0 - 1) * k + g.b.1);
    }
    dsu.component_count() == 1
}

/// Plain union-find with path halving.
pub(crate) struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    pub(crate) fn new(n: usize) -> Self {
        Dsu { parent: (0..n).collect() }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Union keeping the smaller index as root.
    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }

    fn component_count(&mut self) -> usize {
        let n = self.parent.len();
        (0..n).filter(|&i| self.find(i) == i).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_validate() {
        for name in ["interval", "sg3"] {
            let s = builtin_structure(name).unwrap();
            let report = validate_structure(&s);
            assert!(report.ok, "{name}: {:?}", report.violations);
        }
    }

    #[test]
    fn interval_gamma_is_four() {
        let s = builtin_structure("interval").unwrap();
        let report = validate_structure(&s);
        let derived = report.derived.unwrap();
        assert!((derived.gamma - 4.0).abs() < 1e-12);
    }

    #[test]
    fn sg3_gamma_is_five() {
        let s = builtin_structure("sg3").unwrap();
        let derived = validate_structure(&s).derived.unwrap();
        assert!((derived.gamma - 5.0).abs() < 1e-12);
    }

    #[test]
    fn unknown_builtin() {
        assert!(matches!(builtin_structure("carpet"), Err(Error::UnknownName(_))));
    }

    #[test]
    fn broken_hypothesis_h_fails() {
        let mut s = builtin_structure("interval").unwrap();
        s.beta = vec![0.3, 0.7];
        let report = validate_structure(&s);
        assert!(!report.ok);
        assert!(report.violations.iter().any(|v| v.rule == "HypothesisH"));
    }

    #[test]
    fn zero_conductance_not_irreducible() {
        let mut s = builtin_structure("interval").unwrap();
        s.conductances = vec![vec![0.0, 0.0], vec![0.0, 0.0]];
        let report = validate_structure(&s);
        assert!(report.violations.iter().any(|v| v.rule == "NotIrreducible"));
    }

    #[test]
    fn rescaling_mass_and_conductance_keeps_verdict() {
        for name in ["interval", "sg3"] {
            let mut s = builtin_structure(name).unwrap();
            for b in &mut s.base_mass {
                *b *= 7.25;
            }
            for row in &mut s.conductances {
                for a in row {
                    *a *= 0.125;
                }
            }
            assert!(validate_structure(&s).ok);
        }
    }

    #[test]
    fn gamma_below_one_is_allowed() {
        // (H) does not require gamma > 1: alpha = (0.9, 0.9), beta = (1/2, 1/2)
        // gives gamma = 1/0.45 > 1; push alpha high enough and gamma < 1/0.45
        // stays valid as long as (H) holds.
        let mut s = builtin_structure("interval").unwrap();
        s.alpha = vec![0.9, 0.9];
        s.gamma = 1.0 / (0.9 * 0.5);
        assert!(validate_structure(&s).ok);
    }
}
