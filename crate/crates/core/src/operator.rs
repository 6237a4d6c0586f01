//! Assembly of the level-n form `A_<n>`, the masses `b_<n>` and the
//! word-independent masses `btilde_<n>`, and the Neumann/Dirichlet pencils.
//!
//! Per cell word `(j_1..j_n)` a copy of the base form is added with
//! coefficient `alpha_{w_1}..alpha_{w_n} / (alpha_{j_1}..alpha_{j_n})`; the
//! mass carries `beta_{w_1}^{-1}..beta_{w_n}^{-1} beta_{j_1}..beta_{j_n}`.
//! Products are accumulated in log-space and exponentiated once per cell.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::lattice::{BlowupWord, LatticeLevel, RawAddress};
use crate::structure::SelfSimilarStructure;

/// The base form on `F`: `A0 f(x) = -sum_y a_{x,y}(f(y)-f(x))`, plus the
/// base mass vector.
#[derive(Clone, Debug)]
pub struct BaseForm {
    pub a0: Vec<Vec<f64>>,
    pub b0: Vec<f64>,
}

/// Sparse symmetric matrix in merged coordinate form, sorted by (row, col).
#[derive(Clone, Debug)]
pub struct SparseSym {
    dim: usize,
    entries: Vec<(u32, u32, f64)>,
}

impl SparseSym {
    /// Merge duplicate coordinates of a triplet list.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(u32, u32, f64)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut entries: Vec<(u32, u32, f64)> = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            match entries.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => entries.push((r, c, v)),
            }
        }
        SparseSym { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(u32, u32, f64)] {
        &self.entries
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for &(r, c, v) in &self.entries {
            y[r as usize] += v * x[c as usize];
        }
    }

    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.entries
            .iter()
            .map(|&(r, c, v)| v * x[r as usize] * x[c as usize])
            .sum()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; self.dim]; self.dim];
        for &(r, c, v) in &self.entries {
            m[r as usize][c as usize] = v;
        }
        m
    }

    /// Restriction to the rows and columns listed in `keep` (ascending).
    pub fn restrict(&self, keep: &[usize]) -> SparseSym {
        let mut pos = vec![usize::MAX; self.dim];
        for (i, &v) in keep.iter().enumerate() {
            pos[v] = i;
        }
        let entries = self
            .entries
            .iter()
            .filter_map(|&(r, c, v)| {
                let (pr, pc) = (pos[r as usize], pos[c as usize]);
                (pr != usize::MAX && pc != usize::MAX).then_some((pr as u32, pc as u32, v))
            })
            .collect();
        SparseSym { dim: keep.len(), entries }
    }
}

/// The pencil `(A_<n>, diag b_<n>)` realizing the Neumann operator at
/// level n, for one blow-up word.
#[derive(Clone, Debug)]
pub struct LevelOperator {
    pub level: Arc<LatticeLevel>,
    pub a: SparseSym,
    /// Vertex masses b_<n>.
    pub b: Vec<f64>,
    /// Word-independent masses with b_<n> = omega_scale * btilde_<n>.
    pub btilde: Vec<f64>,
    pub word: BlowupWord,
    /// The scalar beta_{w_1}^{-1} .. beta_{w_n}^{-1}.
    pub omega_scale: f64,
}

/// The Dirichlet pencil: rows/columns restricted to interior vertices.
#[derive(Clone, Debug)]
pub struct DirichletPencil {
    pub a: SparseSym,
    pub b: Vec<f64>,
    /// Full-level vertex index of each interior position.
    pub interior: Vec<usize>,
}

/// `A0[x][x] = sum_y a_{x,y}`, `A0[x][y] = -a_{x,y}`; `b0` is the base mass.
pub fn assemble_base(s: &SelfSimilarStructure) -> BaseForm {
    let k = s.boundary_size();
    let mut a0 = vec![vec![0.0; k]; k];
    for x in 0..k {
        for y in 0..k {
            if x != y {
                let a = s.conductances[x][y];
                a0[x][y] = -a;
                a0[x][x] += a;
            }
        }
    }
    BaseForm { a0, b0: s.base_mass.clone() }
}

/// Assemble `(A_<n>, b_<n>, btilde_<n>)` on a built level for one word.
pub fn assemble_level(
    s: &SelfSimilarStructure,
    level: Arc<LatticeLevel>,
    w: &BlowupWord,
) -> Result<LevelOperator> {
    let n = level.n;
    if w.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: w.len() });
    }
    let k = s.boundary_size();
    let log_alpha: Vec<f64> = s.alpha.iter().map(|&a| libm::log(a)).collect();
    let log_beta: Vec<f64> = s.beta.iter().map(|&b| libm::log(b)).collect();
    let sum_log_alpha_w: f64 = w.letters.iter().map(|&c| log_alpha[c as usize - 1]).sum();
    let sum_log_beta_w: f64 = w.letters.iter().map(|&c| log_beta[c as usize - 1]).sum();
    let omega_scale = libm::exp(-sum_log_beta_w);

    let vcount = level.vertex_count();
    let mut triplets = Vec::new();
    let mut btilde = vec![0.0; vcount];

    // Iterate cell words in lexicographic order; empty word when n = 0.
    let mut cell = vec![1u8; n];
    loop {
        let sum_log_alpha_c: f64 = cell.iter().map(|&c| log_alpha[c as usize - 1]).sum();
        let sum_log_beta_c: f64 = cell.iter().map(|&c| log_beta[c as usize - 1]).sum();
        let coef = libm::exp(sum_log_alpha_w - sum_log_alpha_c);
        let beta_cell = libm::exp(sum_log_beta_c);

        let ids: Vec<usize> = (0..k)
            .map(|z| {
                level
                    .vertex_index(&RawAddress { word: cell.clone(), label: z as u8 })
                    .expect("cell address must exist")
            })
            .collect();
        for z in 0..k {
            btilde[ids[z]] += beta_cell * s.base_mass[z];
            for z2 in (z + 1)..k {
                let a = s.conductances[z][z2];
                if a > 0.0 {
                    let v = coef * a;
                    let (u, u2) = (ids[z] as u32, ids[z2] as u32);
                    triplets.push((u, u, v));
                    triplets.push((u2, u2, v));
                    triplets.push((u, u2, -v));
                    triplets.push((u2, u, -v));
                }
            }
        }

        // next cell word
        let mut pos = n;
        loop {
            if pos == 0 {
                let b = btilde.iter().map(|&t| omega_scale * t).collect();
                return Ok(LevelOperator {
                    level,
                    a: SparseSym::from_triplets(vcount, triplets),
                    b,
                    btilde,
                    word: w.clone(),
                    omega_scale,
                });
            }
            pos -= 1;
            if cell[pos] < s.cell_count as u8 {
                cell[pos] += 1;
                break;
            }
            cell[pos] = 1;
        }
    }
}

/// Restrict the Neumann pencil to interior vertices.
pub fn restrict_dirichlet(op: &LevelOperator) -> Result<DirichletPencil> {
    let interior = op.level.interior();
    if interior.is_empty() {
        return Err(Error::EmptyInterior);
    }
    let a = op.a.restrict(&interior);
    let b = interior.iter().map(|&v| op.b[v]).collect();
    Ok(DirichletPencil { a, b, interior })
}

/// The uniform norm bound K: the largest generalized eigenvalue of
/// `(A0, diag b0)`. Every level-n Neumann/Dirichlet eigenvalue lies in
/// `[-K, 0]` under hypothesis (H).
pub fn norm_bound(s: &SelfSimilarStructure) -> f64 {
    let base = assemble_base(s);
    let k = s.boundary_size();
    let mut m = vec![vec![0.0; k]; k];
    for x in 0..k {
        for y in 0..k {
            m[x][y] = base.a0[x][y] / libm::sqrt(base.b0[x] * base.b0[y]);
        }
    }
    let (theta, _) = crate::eigh::eigh(&m);
    theta.last().copied().unwrap_or(0.0).max(0.0)
}
