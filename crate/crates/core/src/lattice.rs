//! Glued vertex sets `F_<n>`, their boundaries, cell decomposition, and the
//! word-dependent embedding of the base set `F` into `F_<n>`.
//!
//! A raw address is a cell word `(j_1..j_n)` (coarse to fine, 1-based) plus
//! a boundary label. Gluing identifies raw addresses; the canonical address
//! of a vertex is the lexicographically least member of its class, which
//! makes vertex identity deterministic across runs and platforms.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::structure::{Dsu, SelfSimilarStructure};
use crate::Caps;

/// A cell word plus a boundary label index. Words store 1-based cell
/// letters, coarse to fine.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RawAddress {
    pub word: Vec<u8>,
    pub label: u8,
}

/// A finite prefix of a blow-up sequence, letters in `1..=N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlowupWord {
    pub letters: Vec<u8>,
    /// RNG seed when the word was sampled.
    pub seed: Option<u64>,
}

impl BlowupWord {
    pub fn new(letters: Vec<u8>) -> Self {
        BlowupWord { letters, seed: None }
    }

    /// The all-ones word of length n. Under hypothesis (H) the level-n
    /// spectrum does not depend on the word, so this is the default pick.
    pub fn constant(n: usize) -> Self {
        BlowupWord { letters: vec![1; n], seed: None }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }
}

/// The glued vertex set `F_<n>` with canonical addresses.
#[derive(Clone, Debug)]
pub struct LatticeLevel {
    pub n: usize,
    /// Canonical addresses, ascending; the vertex index is the position here.
    pub vertices: Vec<RawAddress>,
    /// Per vertex, every raw address identified to it.
    pub labelings: Vec<Vec<RawAddress>>,
    /// Vertex index of the boundary vertex `(m,..,m,q_m)` per label.
    pub boundary: Vec<usize>,
    index: BTreeMap<RawAddress, usize>,
}

impl LatticeLevel {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertex_index(&self, raw: &RawAddress) -> Option<usize> {
        self.index.get(raw).copied()
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary.contains(&v)
    }

    /// Indices of interior vertices, ascending.
    pub fn interior(&self) -> Vec<usize> {
        (0..self.vertex_count()).filter(|v| !self.is_boundary(*v)).collect()
    }
}

/// Build `F_<n>` by recursive copy-and-glue.
///
/// Level n is N copies of level n-1; the boundary vertex `(m^{n-1}, q_m)` of
/// copy i is identified with the matching vertex of copy j for every gluing
/// `((i, q), (j, q'))`.
pub fn build_level(s: &SelfSimilarStructure, n: usize, caps: &Caps) -> Result<LatticeLevel> {
    let k = s.boundary_size();
    let mut level = LatticeLevel {
        n: 0,
        vertices: (0..k).map(|z| RawAddress { word: Vec::new(), label: z as u8 }).collect(),
        labelings: (0..k)
            .map(|z| vec![RawAddress { word: Vec::new(), label: z as u8 }])
            .collect(),
        boundary: (0..k).collect(),
        index: (0..k)
            .map(|z| (RawAddress { word: Vec::new(), label: z as u8 }, z))
            .collect(),
    };
    if level.vertex_count() > caps.vertex_cap {
        return Err(Error::SizeCapExceeded { requested: level.vertex_count(), cap: caps.vertex_cap });
    }
    for step in 1..=n {
        level = glue_step(s, &level, step, caps)?;
    }
    Ok(level)
}

fn glue_step(
    s: &SelfSimilarStructure,
    prev: &LatticeLevel,
    step: usize,
    caps: &Caps,
) -> Result<LatticeLevel> {
    let n_cells = s.cell_count;
    let pc = prev.vertex_count();
    let next_count = n_cells * pc - s.gluings.len();
    if next_count > caps.vertex_cap {
        return Err(Error::SizeCapExceeded { requested: next_count, cap: caps.vertex_cap });
    }

    // Provisional id of copy c's vertex v is c*pc + v.
    let mut dsu = Dsu::new(n_cells * pc);
    for g in &s.gluings {
        let va = prev.boundary[g.a.1];
        let vb = prev.boundary[g.b.1];
        dsu.union((g.a.0 - 1) * pc + va, (g.b.0 - 1) * pc + vb);
    }

    // Collect classes; the labeling of a merged vertex is the union of the
    // prefixed labelings of its members.
    let mut class_members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for id in 0..n_cells * pc {
        class_members.entry(dsu.find(id)).or_default().push(id);
    }
    debug_assert_eq!(class_members.len(), next_count);

    let mut entries: Vec<(RawAddress, Vec<RawAddress>)> = Vec::with_capacity(next_count);
    for members in class_members.values() {
        let mut labelings = Vec::new();
        for &id in members {
            let copy = (id / pc) as u8 + 1;
            let v = id % pc;
            for raw in &prev.labelings[v] {
                let mut word = Vec::with_capacity(step);
                word.push(copy);
                word.extend_from_slice(&raw.word);
                labelings.push(RawAddress { word, label: raw.label });
            }
        }
        labelings.sort();
        entries.push((labelings[0].clone(), labelings));
    }
    entries.sort_by(|a, b| a.0.cmp(&b.0));

    let mut vertices = Vec::with_capacity(next_count);
    let mut labelings = Vec::with_capacity(next_count);
    let mut index = BTreeMap::new();
    for (i, (canon, labs)) in entries.into_iter().enumerate() {
        for raw in &labs {
            index.insert(raw.clone(), i);
        }
        vertices.push(canon);
        labelings.push(labs);
    }

    // Boundary vertex for label q_m (cell tag m) sits at (m,..,m,q_m).
    let boundary = s
        .boundary_labels
        .iter()
        .enumerate()
        .map(|(z, l)| {
            let raw = RawAddress { word: vec![l.cell as u8; step], label: z as u8 };
            *index.get(&raw).expect("boundary address must exist")
        })
        .collect();

    Ok(LatticeLevel { n: step, vertices, labelings, boundary, index })
}

/// Map each boundary label z to the vertex carrying `F_<0>` inside `F_<n>`:
/// the cell address is the reversed word `(w_n, .., w_1)`.
pub fn embed_base(level: &LatticeLevel, w: &BlowupWord) -> Result<Vec<usize>> {
    if w.len() != level.n {
        return Err(Error::LengthMismatch { expected: level.n, got: w.len() });
    }
    let mut word: Vec<u8> = w.letters.clone();
    word.reverse();
    let k = level.boundary.len();
    Ok((0..k)
        .map(|z| {
            let raw = RawAddress { word: word.clone(), label: z as u8 };
            level.vertex_index(&raw).expect("embedded address must exist")
        })
        .collect())
}

/// Boundary labels surviving the whole chain `∂F_<n> ∩ ∂F_<n-1> ∩ ..`:
/// label q_m persists from level i-1 to i iff w_i = m, so the result is
/// empty unless the word is constant.
pub fn boundary_persistence(s: &SelfSimilarStructure, w: &BlowupWord) -> Vec<usize> {
    s.boundary_labels
        .iter()
        .enumerate()
        .filter(|(_, l)| w.letters.iter().all(|&c| c as usize == l.cell))
        .map(|(z, _)| z)
        .collect()
}

/// Word generation mode.
#[derive(Clone, Copy, Debug)]
pub enum WordMode {
    /// All N^n words in lexicographic order.
    Enumerate,
    /// `count` iid uniform words, reproducible from `seed`.
    Sample { count: usize, seed: u64 },
}

pub fn generate_words(
    s: &SelfSimilarStructure,
    n: usize,
    mode: WordMode,
    caps: &Caps,
) -> Result<Vec<BlowupWord>> {
    let n_cells = s.cell_count as u8;
    match mode {
        WordMode::Enumerate => {
            let total = (s.cell_count as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
            if total > caps.word_cap as u128 {
                return Err(Error::SizeCapExceeded {
                    requested: total.min(usize::MAX as u128) as usize,
                    cap: caps.word_cap,
                });
            }
            let mut words = Vec::with_capacity(total as usize);
            let mut letters = vec![1u8; n];
            loop {
                words.push(BlowupWord { letters: letters.clone(), seed: None });
                // increment the base-N counter, most significant digit first
                let mut pos = n;
                loop {
                    if pos == 0 {
                        return Ok(words);
                    }
                    pos -= 1;
                    if letters[pos] < n_cells {
                        letters[pos] += 1;
                        break;
                    }
                    letters[pos] = 1;
                }
            }
        }
        WordMode::Sample { count, seed } => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let words = (0..count)
                .map(|_| BlowupWord {
                    letters: (0..n).map(|_| uniform_letter(&mut rng, n_cells)).collect(),
                    seed: Some(seed),
                })
                .collect();
            Ok(words)
        }
    }
}

/// Unbiased uniform letter in 1..=n via rejection sampling.
fn uniform_letter(rng: &mut impl RngCore, n: u8) -> u8 {
    let n = n as u64;
    let zone = (1u64 << 32) / n * n;
    loop {
        let v = rng.next_u32() as u64;
        if v < zone {
            return (v % n) as u8 + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::builtin_structure;

    fn caps() -> Caps {
        Caps::default()
    }

    #[test]
    fn level_zero_is_the_boundary_set() {
        for name in ["interval", "sg3"] {
            let s = builtin_structure(name).unwrap();
            let level = build_level(&s, 0, &caps()).unwrap();
            assert_eq!(level.vertex_count(), s.boundary_size());
            assert_eq!(level.boundary, (0..s.boundary_size()).collect::<Vec<_>>());
        }
    }

    #[test]
    fn interval_level_one() {
        let s = builtin_structure("interval").unwrap();
        let level = build_level(&s, 1, &caps()).unwrap();
        assert_eq!(level.vertex_count(), 3);
        // boundary = canonical forms of (1,q0) and (2,q1)
        let left = level.vertex_index(&RawAddress { word: vec![1], label: 0 }).unwrap();
        let right = level.vertex_index(&RawAddress { word: vec![2], label: 1 }).unwrap();
        assert_eq!(level.boundary, vec![left, right]);
        // the glued center: (1,q1) ~ (2,q0), canonical is (1,q1)
        let c1 = level.vertex_index(&RawAddress { word: vec![1], label: 1 }).unwrap();
        let c2 = level.vertex_index(&RawAddress { word: vec![2], label: 0 }).unwrap();
        assert_eq!(c1, c2);
        assert_eq!(level.vertices[c1], RawAddress { word: vec![1], label: 1 });
    }

    #[test]
    fn sg3_level_one() {
        let s = builtin_structure("sg3").unwrap();
        let level = build_level(&s, 1, &caps()).unwrap();
        assert_eq!(level.vertex_count(), 6);
        assert_eq!(level.boundary.len(), 3);
    }

    #[test]
    fn vertex_count_closed_forms() {
        let s = builtin_structure("interval").unwrap();
        for n in 0..=6 {
            let level = build_level(&s, n, &caps()).unwrap();
            assert_eq!(level.vertex_count(), (1 << n) + 1, "interval n={n}");
        }
        let s = builtin_structure("sg3").unwrap();
        for n in 0..=5 {
            let level = build_level(&s, n, &caps()).unwrap();
            assert_eq!(level.vertex_count(), 3 * (3usize.pow(n as u32) + 1) / 2, "sg3 n={n}");
        }
    }

    #[test]
    fn labelings_partition_raw_addresses() {
        for name in ["interval", "sg3"] {
            let s = builtin_structure(name).unwrap();
            for n in 0..=3 {
                let level = build_level(&s, n, &caps()).unwrap();
                let total: usize = level.labelings.iter().map(|l| l.len()).sum();
                let expected = s.cell_count.pow(n as u32) * s.boundary_size();
                assert_eq!(total, expected);
                let mut all: Vec<_> = level.labelings.iter().flatten().collect();
                all.sort();
                all.dedup();
                assert_eq!(all.len(), expected, "raw addresses must not repeat");
            }
        }
    }

    #[test]
    fn boundary_vertices_have_constant_word_labelings() {
        let s = builtin_structure("sg3").unwrap();
        let level = build_level(&s, 3, &caps()).unwrap();
        for (z, &v) in level.boundary.iter().enumerate() {
            let m = s.boundary_labels[z].cell as u8;
            for raw in &level.labelings[v] {
                assert!(raw.word.iter().all(|&c| c == m));
                assert_eq!(raw.label, z as u8);
            }
        }
    }

    #[test]
    fn embed_interval_level_two() {
        let s = builtin_structure("interval").unwrap();
        let level = build_level(&s, 2, &caps()).unwrap();
        let w = BlowupWord::new(vec![1, 2]);
        let embedded = embed_base(&level, &w).unwrap();
        // F_0 sits at cell address (w_2, w_1) = (2, 1)
        assert_eq!(
            embedded[0],
            level.vertex_index(&RawAddress { word: vec![2, 1], label: 0 }).unwrap()
        );
        assert_eq!(
            embedded[1],
            level.vertex_index(&RawAddress { word: vec![2, 1], label: 1 }).unwrap()
        );
    }

    #[test]
    fn embed_level_zero_is_identity() {
        let s = builtin_structure("sg3").unwrap();
        let level = build_level(&s, 0, &caps()).unwrap();
        let embedded = embed_base(&level, &BlowupWord::new(Vec::new())).unwrap();
        assert_eq!(embedded, vec![0, 1, 2]);
    }

    #[test]
    fn embed_length_mismatch() {
        let s = builtin_structure("interval").unwrap();
        let level = build_level(&s, 2, &caps()).unwrap();
        let err = embed_base(&level, &BlowupWord::new(vec![1])).unwrap_err();
        assert_eq!(err, Error::LengthMismatch { expected: 2, got: 1 });
    }

    #[test]
    fn embedded_images_split_by_last_letter() {
        // words differing in w_n land in different top-level cells
        let s = builtin_structure("sg3").unwrap();
        let level = build_level(&s, 2, &caps()).unwrap();
        let a = embed_base(&level, &BlowupWord::new(vec![1, 2])).unwrap();
        let b = embed_base(&level, &BlowupWord::new(vec![1, 3])).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_ne!(x, y);
        }
    }

    #[test]
    fn persistence_examples() {
        let s = builtin_structure("interval").unwrap();
        assert_eq!(boundary_persistence(&s, &BlowupWord::new(vec![1, 1, 1])), vec![0]);
        assert!(boundary_persistence(&s, &BlowupWord::new(vec![1, 2])).is_empty());
        let s = builtin_structure("sg3").unwrap();
        assert_eq!(boundary_persistence(&s, &BlowupWord::new(vec![2, 2])), vec![1]);
    }

    #[test]
    fn enumerate_lexicographic() {
        let s = builtin_structure("interval").unwrap();
        let words = generate_words(&s, 2, WordMode::Enumerate, &caps()).unwrap();
        let letters: Vec<_> = words.iter().map(|w| w.letters.clone()).collect();
        assert_eq!(letters, vec![vec![1, 1], vec![1, 2], vec![2, 1], vec![2, 2]]);
        let s = builtin_structure("sg3").unwrap();
        let words = generate_words(&s, 1, WordMode::Enumerate, &caps()).unwrap();
        assert_eq!(words.len(), 3);
    }

    #[test]
    fn sampling_is_reproducible() {
        let s = builtin_structure("sg3").unwrap();
        let a = generate_words(&s, 4, WordMode::Sample { count: 5, seed: 7 }, &caps()).unwrap();
        let b = generate_words(&s, 4, WordMode::Sample { count: 5, seed: 7 }, &caps()).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|w| w.seed == Some(7)));
        assert!(a.iter().flat_map(|w| &w.letters).all(|&c| (1..=3).contains(&c)));
    }

    #[test]
    fn caps_fail_fast() {
        let s = builtin_structure("sg3").unwrap();
        let err = build_level(&s, 9, &caps()).unwrap_err();
        assert!(matches!(err, Error::SizeCapExceeded { .. }));
        let err = generate_words(&s, 12, WordMode::Enumerate, &caps()).unwrap_err();
        assert!(matches!(err, Error::SizeCapExceeded { .. }));
    }
}
