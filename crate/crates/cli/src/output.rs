//! CSV and JSON artifacts. Every numeric artifact embeds the tolerances
//! and the seed used, so a file is interpretable on its own; formatting is
//! plain `{}` (shortest round-trip), which keeps artifacts byte-identical
//! across runs.

use std::fmt::Write as _;

use fractal_spectra_core::analysis::ConvergenceReport;
use fractal_spectra_core::operator::LevelOperator;
use fractal_spectra_core::spectra::PointMeasure;
use fractal_spectra_core::Tolerances;
use serde_json::{json, Value};

#[derive(Clone, Copy, Debug)]
pub struct Provenance {
    pub tols: Tolerances,
    pub seed: Option<u64>,
}

fn provenance_header(out: &mut String, p: &Provenance) {
    let _ = writeln!(
        out,
        "# cluster_tol={} residual_tol={} match_tol={}",
        p.tols.cluster, p.tols.residual, p.tols.matching
    );
    match p.seed {
        Some(seed) => {
            let _ = writeln!(out, "# seed={seed}");
        }
        None => {
            let _ = writeln!(out, "# seed=none");
        }
    }
}

/// `lambda,weight,kind` rows, largest eigenvalue first.
pub fn spectrum_csv(blocks: &[(Option<usize>, &PointMeasure, &str)], p: &Provenance) -> String {
    let mut out = String::new();
    provenance_header(&mut out, p);
    out.push_str("lambda,weight,kind\n");
    for (level, m, kind) in blocks {
        if let Some(n) = level {
            let _ = writeln!(out, "# level={n}");
        }
        for &(l, w) in m.atoms.iter().rev() {
            let _ = writeln!(out, "{l},{w},{kind}");
        }
    }
    out
}

/// `row,col,value` triplets of the assembled form.
pub fn triplet_csv(op: &LevelOperator, p: &Provenance) -> String {
    let mut out = String::new();
    provenance_header(&mut out, p);
    out.push_str("row,col,value\n");
    for &(r, c, v) in op.a.entries() {
        let _ = writeln!(out, "{r},{c},{v}");
    }
    out
}

/// `index,b,btilde` masses of the assembled level.
pub fn mass_csv(op: &LevelOperator, p: &Provenance) -> String {
    let mut out = String::new();
    provenance_header(&mut out, p);
    out.push_str("index,b,btilde\n");
    for (i, (b, t)) in op.b.iter().zip(&op.btilde).enumerate() {
        let _ = writeln!(out, "{i},{b},{t}");
    }
    out
}

pub fn report_json(report: &ConvergenceReport, p: &Provenance) -> Value {
    json!({
        "pass": report.pass(),
        "verdicts": report.verdicts.iter().map(|v| json!({
            "check": v.check,
            "level": v.level,
            "discrepancy": v.discrepancy,
            "tolerance": v.tolerance,
            "pass": v.pass,
            "detail": v.detail,
        })).collect::<Vec<_>>(),
        "records": report.records.iter().map(|r| json!({
            "n": r.n,
            "total_mass": r.total_mass,
            "atom_count": r.atom_count,
            "distance_to_previous": r.distance_to_previous,
        })).collect::<Vec<_>>(),
        "tolerances": tolerances_json(&p.tols),
        "seed": p.seed,
    })
}

pub fn tolerances_json(t: &Tolerances) -> Value {
    json!({
        "cluster": t.cluster,
        "residual": t.residual,
        "matching": t.matching,
    })
}

pub fn validation_json(r: &fractal_spectra_core::ValidationReport) -> Value {
    json!({
        "ok": r.ok,
        "violations": r.violations.iter().map(|v| json!({
            "rule": v.rule,
            "message": v.message,
        })).collect::<Vec<_>>(),
        "derived": r.derived.map(|d| json!({
            "gamma": d.gamma,
            "norm_bound": d.norm_bound,
        })),
        "notes": r.notes,
    })
}

/// A plot script adjacent to a spectrum CSV.
pub fn gnuplot_script(csv_name: &str) -> String {
    format!(
        "set datafile separator ','\n\
         set xlabel 'lambda'\n\
         set ylabel 'weight'\n\
         set style data impulses\n\
         plot '{csv_name}' skip 1 using 1:2 notitle\n\
         pause -1\n"
    )
}
