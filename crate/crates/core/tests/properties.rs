//! Property tests over randomly weighted structures satisfying (H):
//! N cells with the complete pairwise gluing pattern, random conductances
//! and masses, random alpha with beta proportional to 1/alpha.

use std::sync::Arc;

use proptest::collection::vec;
use proptest::prelude::*;

use fractal_spectra_core::lattice::{build_level, generate_words, WordMode};
use fractal_spectra_core::operator::{assemble_level, norm_bound};
use fractal_spectra_core::spectra::solve_neumann;
use fractal_spectra_core::structure::{validate_structure, BoundaryLabel, Gluing, SelfSimilarStructure};
use fractal_spectra_core::{BlowupWord, Caps};

fn structures() -> impl Strategy<Value = SelfSimilarStructure> {
    (2usize..=3)
        .prop_flat_map(|n| {
            (
                Just(n),
                vec(0.2f64..0.8, n),
                vec(0.1f64..3.0, n),
                vec(0.5f64..2.0, n * (n - 1) / 2),
            )
        })
        .prop_map(|(n, alpha, mass, conds)| {
            // beta proportional to 1/alpha, normalized: hypothesis (H)
            let inv: Vec<f64> = alpha.iter().map(|a| 1.0 / a).collect();
            let total: f64 = inv.iter().sum();
            let beta: Vec<f64> = inv.iter().map(|v| v / total).collect();
            let mut gluings = Vec::new();
            let mut conductances = vec![vec![0.0; n]; n];
            let mut e = 0;
            for i in 1..=n {
                for j in (i + 1)..=n {
                    gluings.push(Gluing { a: (i, j - 1), b: (j, i - 1) });
                    conductances[i - 1][j - 1] = conds[e];
                    conductances[j - 1][i - 1] = conds[e];
                    e += 1;
                }
            }
            let gamma = 1.0 / (alpha[0] * beta[0]);
            SelfSimilarStructure {
                cell_count: n,
                boundary_labels: (1..=n)
                    .map(|i| BoundaryLabel { label: format!("q{i}"), cell: i })
                    .collect(),
                gluings,
                conductances,
                base_mass: mass,
                alpha,
                beta,
                gamma,
            }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn generated_structures_validate(s in structures()) {
        let report = validate_structure(&s);
        prop_assert!(report.ok, "{:?}", report.violations);
        prop_assert!((report.derived.unwrap().gamma - s.gamma).abs() < 1e-9 * s.gamma);
    }

    #[test]
    fn validation_invariant_under_rescaling(s in structures(), c in 0.1f64..10.0, c2 in 0.1f64..10.0) {
        let mut r = s.clone();
        for b in &mut r.base_mass {
            *b *= c;
        }
        for row in &mut r.conductances {
            for a in row {
                *a *= c2;
            }
        }
        prop_assert_eq!(validate_structure(&s).ok, validate_structure(&r).ok);
    }

    #[test]
    fn eigenvalues_within_norm_bound(s in structures()) {
        let caps = Caps::default();
        let k = norm_bound(&s);
        let level = Arc::new(build_level(&s, 2, &caps).unwrap());
        let op = assemble_level(&s, level, &BlowupWord::constant(2)).unwrap();
        let d = solve_neumann(&op, &caps).unwrap();
        for l in d.lambdas {
            prop_assert!(l <= 1e-9 * k && l >= -k * (1.0 + 1e-9), "{l} outside [-{k}, 0]");
        }
    }

    #[test]
    fn spectrum_word_invariant_under_h(s in structures()) {
        let caps = Caps::default();
        let k = norm_bound(&s);
        let level = Arc::new(build_level(&s, 2, &caps).unwrap());
        let words = generate_words(&s, 2, WordMode::Enumerate, &caps).unwrap();
        let mut reference: Option<Vec<f64>> = None;
        for w in &words {
            let op = assemble_level(&s, level.clone(), w).unwrap();
            let lambdas = solve_neumann(&op, &caps).unwrap().lambdas;
            match &reference {
                None => reference = Some(lambdas),
                Some(r) => {
                    for (a, b) in r.iter().zip(&lambdas) {
                        prop_assert!((a - b).abs() <= 1e-9 * k, "{a} vs {b}");
                    }
                }
            }
        }
    }

    #[test]
    fn mass_splits_into_scale_times_btilde(s in structures(), letters in vec(1usize..=2, 3)) {
        let caps = Caps::default();
        let word = BlowupWord::new(
            letters.iter().map(|&c| (c.min(s.cell_count)) as u8).collect(),
        );
        let level = Arc::new(build_level(&s, 3, &caps).unwrap());
        let op = assemble_level(&s, level, &word).unwrap();
        for (b, t) in op.b.iter().zip(&op.btilde) {
            prop_assert_eq!(*b, op.omega_scale * t);
        }
        // btilde is word-independent
        let level = Arc::new(build_level(&s, 3, &caps).unwrap());
        let op2 = assemble_level(&s, level, &BlowupWord::constant(3)).unwrap();
        for (t, t2) in op.btilde.iter().zip(&op2.btilde) {
            prop_assert_eq!(*t, *t2);
        }
    }

    #[test]
    fn labelings_partition_all_raw_addresses(s in structures(), n in 0usize..=3) {
        let level = build_level(&s, n, &Caps::default()).unwrap();
        let total: usize = level.labelings.iter().map(|l| l.len()).sum();
        prop_assert_eq!(total, s.cell_count.pow(n as u32) * s.boundary_size());
    }
}
