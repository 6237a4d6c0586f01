//! Finite-level densities of states, the exact expectation identity, N-D
//! replication and deficiency, interlacing, and cross-word comparisons.
//!
//! The sharpest check here is the expectation identity: averaging the
//! weighted spectral measures of the embedded base vertices over all blow-up
//! words reproduces `N^{-n} nu_<n>` atom-for-atom, exactly at finite n. It
//! couples the gluing, the mass aggregation, the assembly scaling and the
//! eigensolver, so a defect anywhere shows up as a nonzero discrepancy.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use libm::fabs;

use crate::error::Result;
use crate::lattice::{build_level, embed_base, generate_words, BlowupWord, LatticeLevel, WordMode};
use crate::operator::assemble_level;
use crate::spectra::{
    counting_measure, max_atom_discrepancy, nd_measure_from_subspace, nd_spectral_measure_delta,
    nd_subspace, solve_dirichlet, solve_neumann, spectral_measure_delta, BoundaryKind,
    PointMeasure,
};
use crate::structure::SelfSimilarStructure;
use crate::{Caps, Tolerances};

/// One pass/fail line of a report.
#[derive(Clone, Debug)]
pub struct Verdict {
    pub check: &'static str,
    pub level: usize,
    pub discrepancy: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub detail: String,
}

/// Summary of one level's measure.
#[derive(Clone, Debug)]
pub struct LevelRecord {
    pub n: usize,
    pub total_mass: f64,
    pub atom_count: usize,
    /// Lévy distance to the previous record's measure, when there is one.
    pub distance_to_previous: Option<f64>,
}

/// Records plus verdicts from one analysis run.
#[derive(Clone, Debug, Default)]
pub struct ConvergenceReport {
    pub records: Vec<LevelRecord>,
    pub verdicts: Vec<Verdict>,
}

impl ConvergenceReport {
    pub fn pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }
}

/// N^n as a float, exact for every feasible level.
fn npow(n_cells: usize, n: usize) -> f64 {
    (n_cells as u64).pow(n as u32) as f64
}

fn record(n: usize, m: &PointMeasure, distance_to_previous: Option<f64>) -> LevelRecord {
    LevelRecord {
        n,
        total_mass: m.total_mass(),
        atom_count: m.atoms.len(),
        distance_to_previous,
    }
}

/// `N^{-n} nu_<n>` for the chosen boundary condition. The word is the
/// constant one; under hypothesis (H) the spectrum is word-invariant.
pub fn density_of_states(
    s: &SelfSimilarStructure,
    n: usize,
    bc: BoundaryKind,
    caps: &Caps,
    tols: &Tolerances,
) -> Result<PointMeasure> {
    let level = Arc::new(build_level(s, n, caps)?);
    let op = assemble_level(s, level, &BlowupWord::constant(n))?;
    let d = match bc {
        BoundaryKind::Neumann => solve_neumann(&op, caps)?,
        BoundaryKind::Dirichlet => solve_dirichlet(&op, caps)?,
    };
    let scale = 1.0 / npow(s.cell_count, n);
    Ok(counting_measure(&d, scale, tols.cluster))
}

/// `N^{-n} nu^ND_<n>`.
pub fn nd_density(
    s: &SelfSimilarStructure,
    n: usize,
    caps: &Caps,
    tols: &Tolerances,
) -> Result<PointMeasure> {
    let level = Arc::new(build_level(s, n, caps)?);
    let op = assemble_level(s, level, &BlowupWord::constant(n))?;
    let nd = nd_subspace(&op, caps, tols)?;
    let scale = 1.0 / npow(s.cell_count, n);
    Ok(nd_measure_from_subspace(&nd, scale, tols.cluster))
}

/// Shared state of one expectation-identity sweep. The level is built once;
/// per-word contributions are independent, so callers may compute them in
/// any order (or in parallel) as long as [`IdentitySweep::finish`] receives
/// them in word order — the ordered fold keeps the float result identical
/// across schedules.
pub struct IdentitySweep {
    s: SelfSimilarStructure,
    level: Arc<LatticeLevel>,
    caps: Caps,
    tols: Tolerances,
    nd: bool,
}

impl IdentitySweep {
    pub fn prepare(
        s: &SelfSimilarStructure,
        n: usize,
        nd: bool,
        caps: &Caps,
        tols: &Tolerances,
    ) -> Result<IdentitySweep> {
        let level = Arc::new(build_level(s, n, caps)?);
        Ok(IdentitySweep { s: s.clone(), level, caps: *caps, tols: *tols, nd })
    }

    pub fn level(&self) -> &Arc<LatticeLevel> {
        &self.level
    }

    /// `sum_z (b_0(z) / b_n(x_z)^2) sigma(delta_{x_z})` for one word, where
    /// `x_z` carries label z of the embedded base set.
    pub fn word_contribution(&self, w: &BlowupWord) -> Result<PointMeasure> {
        let op = assemble_level(&self.s, self.level.clone(), w)?;
        let embedded = embed_base(&self.level, w)?;
        let mut acc = PointMeasure::empty(self.tols.cluster);
        if self.nd {
            let nd = nd_subspace(&op, &self.caps, &self.tols)?;
            for (z, &x) in embedded.iter().enumerate() {
                let m = nd_spectral_measure_delta(&op, &nd, x, self.tols.cluster)?;
                acc = acc.merged_with(&m.scaled(self.s.base_mass[z] / (op.b[x] * op.b[x])));
            }
        } else {
            let d = solve_neumann(&op, &self.caps)?;
            for (z, &x) in embedded.iter().enumerate() {
                let m = spectral_measure_delta(&op, &d, x, self.tols.cluster)?;
                acc = acc.merged_with(&m.scaled(self.s.base_mass[z] / (op.b[x] * op.b[x])));
            }
        }
        Ok(acc)
    }

    /// Average the per-word contributions (in word order) and compare with
    /// `N^{-n} nu_<n>`.
    pub fn finish(&self, contributions: &[PointMeasure]) -> Result<ConvergenceReport> {
        let n = self.level.n;
        let mut lhs = PointMeasure::empty(self.tols.cluster);
        for c in contributions {
            lhs = lhs.merged_with(c);
        }
        let lhs = lhs.scaled(1.0 / contributions.len().max(1) as f64);

        let rhs = if self.nd {
            nd_density(&self.s, n, &self.caps, &self.tols)?
        } else {
            density_of_states(&self.s, n, BoundaryKind::Neumann, &self.caps, &self.tols)?
        };
        let (disc, detail) = max_atom_discrepancy(&lhs, &rhs, self.tols.matching);
        let tolerance = 1e-9 * rhs.total_mass();
        Ok(ConvergenceReport {
            records: alloc::vec![record(n, &rhs, None)],
            verdicts: alloc::vec![Verdict {
                check: if self.nd { "nd-identity" } else { "identity" },
                level: n,
                discrepancy: disc,
                tolerance,
                pass: disc <= tolerance,
                detail,
            }],
        })
    }
}

fn verify_identity(
    s: &SelfSimilarStructure,
    n: usize,
    mode: WordMode,
    nd: bool,
    caps: &Caps,
    tols: &Tolerances,
) -> Result<ConvergenceReport> {
    let sweep = IdentitySweep::prepare(s, n, nd, caps, tols)?;
    let words = generate_words(s, n, mode, caps)?;
    let contributions = words
        .iter()
        .map(|w| sweep.word_contribution(w))
        .collect::<Result<Vec<_>>>()?;
    sweep.finish(&contributions)
}

/// Enumerate or sample words and check the exact expectation identity
/// `avg_w sum_z (b_0/b_n^2) sigma(delta) = N^{-n} nu^+_<n>`.
pub fn verify_state_density_identity(
    s: &SelfSimilarStructure,
    n: usize,
    mode: WordMode,
    caps: &Caps,
    tols: &Tolerances,
) -> Result<ConvergenceReport> {
    verify_identity(s, n, mode, false, caps, tols)
}

/// The same identity with the N-D spectral measures against `N^{-n} nu^ND`.
pub fn verify_nd_identity(
    s: &SelfSimilarStructure,
    n: usize,
    mode: WordMode,
    caps: &Caps,
    tols: &Tolerances,
) -> Result<ConvergenceReport> {
    verify_identity(s, n, mode, true, caps, tols)
}

/// Atom-wise replication check between two N-D counting measures: every
/// atom of the lower level must reappear with multiplicity at least
/// `n_cells` times its own.
pub fn check_replication(
    lo: &PointMeasure,
    hi: &PointMeasure,
    n_cells: usize,
    level: usize,
    match_tol: f64,
) -> Verdict {
    let mut worst = 0.0f64;
    let mut detail = String::new();
    for &(l, m) in &lo.atoms {
        let found: f64 = hi
            .atoms
            .iter()
            .filter(|&&(lh, _)| fabs(lh - l) <= match_tol)
            .map(|&(_, mh)| mh)
            .sum();
        let short = n_cells as f64 * m - found;
        if short > worst {
            worst = short;
            detail = format!(
                "atom at {l}: level-{level} multiplicity {m}, next level carries {found} < {}",
                n_cells as f64 * m
            );
        }
    }
    Verdict {
        check: "replication",
        level,
        discrepancy: worst,
        tolerance: 0.5,
        pass: worst <= 0.5,
        detail,
    }
}

/// `nu^ND_<n+1> >= N nu^ND_<n>` as measures.
pub fn verify_nd_replication(
    s: &SelfSimilarStructure,
    n: usize,
    caps: &Caps,
    tols: &Tolerances,
) -> Result<ConvergenceReport> {
    let lo = nd_density(s, n, caps, tols)?.scaled(npow(s.cell_count, n));
    let hi = nd_density(s, n + 1, caps, tols)?.scaled(npow(s.cell_count, n + 1));
    let verdict = check_replication(&lo, &hi, s.cell_count, n, tols.matching);
    Ok(ConvergenceReport {
        records: alloc::vec![record(n, &lo, None), record(n + 1, &hi, None)],
        verdicts: alloc::vec![verdict],
    })
}

/// Number of atoms (with multiplicity) at positions `>= x - tol`.
fn count_ge(m: &PointMeasure, x: f64) -> f64 {
    m.atoms.iter().filter(|&&(p, _)| p >= x).map(|&(_, w)| w).sum()
}

/// `sup_l |#{Neumann >= l} - #{Dirichlet >= l}| <= |F|`, evaluated at
/// midpoints between clustered eigenvalue positions (raw positions jitter
/// inside degenerate clusters and would inflate the gap).
pub fn interlacing_check(
    s: &SelfSimilarStructure,
    n: usize,
    caps: &Caps,
    tols: &Tolerances,
) -> Result<ConvergenceReport> {
    let level = Arc::new(build_level(s, n, caps)?);
    let op = assemble_level(s, level, &BlowupWord::constant(n))?;
    let nm = counting_measure(&solve_neumann(&op, caps)?, 1.0, tols.cluster);
    let dm = counting_measure(&solve_dirichlet(&op, caps)?, 1.0, tols.cluster);

    let mut positions: Vec<f64> = nm.atoms.iter().chain(&dm.atoms).map(|&(p, _)| p).collect();
    positions.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    // a Neumann and a Dirichlet cluster at the same eigenvalue differ by
    // round-off; midpoints between them would land inside the joint cluster
    positions.dedup_by(|b, a| *b - *a < tols.cluster);
    let mut test_points = alloc::vec![positions.first().copied().unwrap_or(0.0) - 1.0];
    for w in positions.windows(2) {
        test_points.push(0.5 * (w[0] + w[1]));
    }
    test_points.push(positions.last().copied().unwrap_or(0.0) + 1.0);

    let bound = s.boundary_size() as f64;
    let mut worst = 0.0f64;
    let mut at = 0.0;
    for &l in &test_points {
        let gap = fabs(count_ge(&nm, l) - count_ge(&dm, l));
        if gap > worst {
            worst = gap;
            at = l;
        }
    }
    Ok(ConvergenceReport {
        records: alloc::vec![record(n, &nm, None)],
        verdicts: alloc::vec![Verdict {
            check: "interlacing",
            level: n,
            discrepancy: worst,
            tolerance: bound,
            pass: worst <= bound + 0.5,
            detail: format!("max counting gap {worst} at lambda = {at}"),
        }],
    })
}

/// The deficiency sequence `d_n = (|V_n| - dim E^ND_<n>) / N^n`, n = 1..n_max.
pub fn nd_deficiency(
    s: &SelfSimilarStructure,
    n_max: usize,
    caps: &Caps,
    tols: &Tolerances,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let level = Arc::new(build_level(s, n, caps)?);
        let vcount = level.vertex_count();
        let op = assemble_level(s, level, &BlowupWord::constant(n))?;
        let dim = nd_subspace(&op, caps, tols)?.dim();
        out.push((vcount - dim) as f64 / npow(s.cell_count, n));
    }
    Ok(out)
}

/// Directed Hausdorff distance `sup_{a in from} inf_{b in to} |a - b|`;
/// infinity when `to` is empty but `from` is not.
fn directed_hausdorff(from: &[f64], to: &[f64]) -> f64 {
    from.iter()
        .map(|&a| {
            to.iter()
                .map(|&b| fabs(a - b))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

fn hausdorff(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    directed_hausdorff(a, b).max(directed_hausdorff(b, a))
}

/// Compare supports of the embedded-vertex spectral measures across words:
/// the max pairwise Hausdorff distance is reported, and every per-word
/// support must sit inside supp `nu^+_<n>` (asserted at `match_tol`).
pub fn spectrum_overlap(
    s: &SelfSimilarStructure,
    n: usize,
    words: &[BlowupWord],
    caps: &Caps,
    tols: &Tolerances,
) -> Result<ConvergenceReport> {
    let level = Arc::new(build_level(s, n, caps)?);
    let eps = 1e-12;
    let mut supports: Vec<Vec<f64>> = Vec::with_capacity(words.len());
    for w in words {
        let op = assemble_level(s, level.clone(), w)?;
        let d = solve_neumann(&op, caps)?;
        let embedded = embed_base(&level, w)?;
        let mut acc = PointMeasure::empty(tols.cluster);
        for &x in &embedded {
            let m = spectral_measure_delta(&op, &d, x, tols.cluster)?;
            acc = acc.merged_with(&m);
        }
        supports.push(acc.support(eps));
    }

    let nu = density_of_states(s, n, BoundaryKind::Neumann, caps, tols)?;
    let nu_support = nu.support(eps);

    let mut max_pairwise = 0.0f64;
    for i in 0..supports.len() {
        for j in (i + 1)..supports.len() {
            max_pairwise = max_pairwise.max(hausdorff(&supports[i], &supports[j]));
        }
    }
    let mut containment = 0.0f64;
    for sup in &supports {
        containment = containment.max(directed_hausdorff(sup, &nu_support));
    }
    Ok(ConvergenceReport {
        records: alloc::vec![record(n, &nu, None)],
        verdicts: alloc::vec![
            Verdict {
                check: "overlap-containment",
                level: n,
                discrepancy: containment,
                tolerance: tols.matching,
                pass: containment <= tols.matching,
                detail: format!("support(sigma) vs support(nu) over {} words", words.len()),
            },
            Verdict {
                check: "overlap-hausdorff",
                level: n,
                discrepancy: max_pairwise,
                tolerance: f64::INFINITY,
                pass: true,
                detail: String::from("max pairwise Hausdorff distance (reported only)"),
            },
        ],
    })
}

/// Per-level DOS summaries with Lévy distances between consecutive levels.
pub fn dos_report(
    s: &SelfSimilarStructure,
    levels: &[usize],
    bc: BoundaryKind,
    caps: &Caps,
    tols: &Tolerances,
) -> Result<ConvergenceReport> {
    let mut records = Vec::with_capacity(levels.len());
    let mut prev: Option<PointMeasure> = None;
    for &n in levels {
        let m = density_of_states(s, n, bc, caps, tols)?;
        let dist = prev.as_ref().map(|p| crate::spectra::levy_distance(p, &m));
        records.push(record(n, &m, dist));
        prev = Some(m);
    }
    Ok(ConvergenceReport { records, verdicts: Vec::new() })
}
