//! Argument grammar and dispatch. Exit codes: 0 pass, 1 verdict failure,
//! 2 usage error, 3 computational error (caps, solver); errors go to stderr
//! as JSON objects.

use std::fs;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;

use fractal_spectra_core::analysis::{
    dos_report, interlacing_check, nd_deficiency, spectrum_overlap, verify_nd_replication,
    IdentitySweep,
};
use fractal_spectra_core::lattice::{build_level, embed_base, generate_words, WordMode};
use fractal_spectra_core::operator::{assemble_level, norm_bound};
use fractal_spectra_core::spectra::{
    counting_measure, nd_measure_from_subspace, nd_subspace, solve_dirichlet, solve_neumann,
    BoundaryKind,
};
use fractal_spectra_core::structure::{builtin_structure, validate_structure};
use fractal_spectra_core::{BlowupWord, Caps, SelfSimilarStructure, Tolerances};

use crate::config::parse_structure;
use crate::output::{
    gnuplot_script, mass_csv, report_json, spectrum_csv, tolerances_json, triplet_csv,
    validation_json, Provenance,
};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VERDICT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_COMPUTATIONAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "fractal-spectra", version, about = "Finite-level spectra of blown-up self-similar lattices")]
pub struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Threads for word sweeps; results are independent of this.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Override the eigenvalue clustering tolerance.
    #[arg(long, global = true)]
    cluster_tol: Option<f64>,
    /// Override the N-D boundary-residual tolerance.
    #[arg(long, global = true)]
    residual_tol: Option<f64>,
    /// Override the atom matching tolerance.
    #[arg(long, global = true)]
    match_tol: Option<f64>,
}

#[derive(Args, Debug)]
struct Source {
    /// Structure config file (JSON).
    file: Option<PathBuf>,
    /// Built-in fixture name (interval | sg3) instead of a file.
    #[arg(long, conflicts_with = "file")]
    builtin: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Validate a structure config; exit 0 iff ok.
    Validate {
        #[command(flatten)]
        src: Source,
    },
    /// Build the level-n vertex set and print its summary as JSON.
    Build {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        level: usize,
        /// Blow-up word, e.g. 1,2,1; enables the embedded-base report.
        #[arg(long)]
        word: Option<String>,
    },
    /// Assemble the level pencil; write triplet and mass CSVs.
    Assemble {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        level: usize,
        #[arg(long)]
        word: Option<String>,
        #[arg(long)]
        out: PathBuf,
        /// Mass CSV path; defaults to <out>.mass.csv.
        #[arg(long)]
        mass_out: Option<PathBuf>,
    },
    /// Solve one level's pencil and emit the clustered spectrum.
    Spectrum {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        level: usize,
        #[arg(long)]
        dirichlet: bool,
        #[arg(long)]
        word: Option<String>,
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Also write a plot script next to the CSV.
        #[arg(long, requires = "csv")]
        gnuplot: bool,
    },
    /// Densities of states N^-n nu_n over a range of levels.
    Dos {
        #[command(flatten)]
        src: Source,
        /// Levels, either a..b (inclusive) or a comma list.
        #[arg(long)]
        levels: String,
        #[arg(long)]
        dirichlet: bool,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long, requires = "csv")]
        gnuplot: bool,
    },
    /// Neumann-Dirichlet eigenvalues at one level.
    Nd {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        level: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run one of the paper-level checks; exit 0 iff the verdict passes.
    Verify {
        what: Check,
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        level: usize,
        /// Sweep all N^n words.
        #[arg(long, conflicts_with_all = ["samples", "seed"])]
        enumerate: bool,
        /// Sample this many words instead of enumerating.
        #[arg(long, requires = "seed")]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Check {
    /// Exact expectation identity for the density of states.
    Identity,
    /// The same identity for the N-D density.
    NdIdentity,
    /// nu^ND_(n+1) >= N nu^ND_n.
    Replication,
    /// Neumann/Dirichlet counting-function gap <= |F|.
    Interlacing,
    /// Deficiency sequence d_1..d_n (reported; no pass/fail).
    Deficiency,
    /// Per-word spectral supports against supp nu.
    Overlap,
}

/// A dispatch failure carrying its exit code and a JSON description.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub error: serde_json::Value,
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, error: json!({"error": "usage", "message": msg.into()}) }
    }

    fn computational(kind: &str, msg: impl Into<String>) -> Self {
        Failure {
            code: EXIT_COMPUTATIONAL,
            error: json!({"error": kind, "message": msg.into()}),
        }
    }
}

impl From<fractal_spectra_core::Error> for Failure {
    fn from(e: fractal_spectra_core::Error) -> Self {
        use fractal_spectra_core::Error as E;
        let kind = match &e {
            E::SizeCapExceeded { .. } => "SizeCapExceeded",
            E::UnknownName(_) => "UnknownName",
            _ => "Computational",
        };
        Failure::computational(kind, e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::computational("Io", e.to_string())
    }
}

/// Size caps, overridable through FRACTAL_SPECTRA_CAP.
pub fn caps_from_env() -> Result<Caps, Failure> {
    match std::env::var("FRACTAL_SPECTRA_CAP") {
        Ok(v) => {
            let cap: usize = v
                .parse()
                .map_err(|_| Failure::usage(format!("FRACTAL_SPECTRA_CAP={v} is not a size")))?;
            let default = Caps::default();
            Ok(Caps {
                vertex_cap: cap,
                word_cap: cap,
                dense_cap: cap.min(default.dense_cap),
            })
        }
        Err(_) => Ok(Caps::default()),
    }
}

pub fn run(cli: Cli) -> i32 {
    match dispatch(cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("{}", f.error);
            f.code
        }
    }
}

fn load_structure(src: &Source) -> Result<SelfSimilarStructure, Failure> {
    match (&src.file, &src.builtin) {
        (Some(path), None) => {
            let text = fs::read_to_string(path)?;
            parse_structure(&text)
                .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
        }
        (None, Some(name)) => Ok(builtin_structure(name)?),
        _ => Err(Failure::usage("give exactly one of <file> or --builtin")),
    }
}

fn tolerances(cli_cluster: Option<f64>, cli_residual: Option<f64>, cli_match: Option<f64>, s: &SelfSimilarStructure) -> Tolerances {
    let mut t = Tolerances::from_norm_bound(norm_bound(s));
    if let Some(c) = cli_cluster {
        t.cluster = c;
    }
    if let Some(r) = cli_residual {
        t.residual = r;
    }
    if let Some(m) = cli_match {
        t.matching = m;
    }
    t
}

fn parse_word(text: &str, n: usize, n_cells: usize) -> Result<BlowupWord, Failure> {
    let letters = text
        .split(',')
        .map(|p| p.trim().parse::<u8>())
        .collect::<Result<Vec<u8>, _>>()
        .map_err(|_| Failure::usage(format!("word `{text}` is not a comma list of letters")))?;
    if letters.len() != n {
        return Err(Failure::usage(format!(
            "word has {} letters but the level is {n}",
            letters.len()
        )));
    }
    if let Some(&c) = letters.iter().find(|&&c| c == 0 || c as usize > n_cells) {
        return Err(Failure::usage(format!("letter {c} outside 1..={n_cells}")));
    }
    Ok(BlowupWord::new(letters))
}

fn parse_levels(text: &str) -> Result<Vec<usize>, Failure> {
    let bad = || Failure::usage(format!("levels `{text}` is neither a..b nor a comma list"));
    if let Some((a, b)) = text.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        Ok((a..=b).collect())
    } else {
        let levels = text
            .split(',')
            .map(|p| p.trim().parse::<usize>())
            .collect::<Result<Vec<usize>, _>>()
            .map_err(|_| bad())?;
        if levels.windows(2).any(|w| w[1] <= w[0]) || levels.is_empty() {
            return Err(bad());
        }
        Ok(levels)
    }
}

fn word_or_constant(word: &Option<String>, n: usize, s: &SelfSimilarStructure) -> Result<BlowupWord, Failure> {
    match word {
        Some(text) => parse_word(text, n, s.cell_count),
        None => Ok(BlowupWord::constant(n)),
    }
}

fn thread_pool(jobs: Option<usize>) -> Result<rayon::ThreadPool, Failure> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Failure::computational("ThreadPool", e.to_string()))
}

fn write_artifact(path: &PathBuf, text: &str) -> Result<(), Failure> {
    fs::write(path, text)?;
    Ok(())
}

fn dispatch(cli: Cli) -> Result<i32, Failure> {
    let caps = caps_from_env()?;
    match cli.cmd {
        Cmd::Validate { src } => {
            let s = load_structure(&src)?;
            let report = validate_structure(&s);
            println!("{}", validation_json(&report));
            Ok(if report.ok { EXIT_PASS } else { EXIT_VERDICT })
        }

        Cmd::Build { src, level, word } => {
            let s = load_structure(&src)?;
            let lv = build_level(&s, level, &caps)?;
            let mut out = json!({
                "n": level,
                "vertex_count": lv.vertex_count(),
                "boundary": lv.boundary,
                "interior_count": lv.interior().len(),
            });
            if let Some(text) = &word {
                let w = parse_word(text, level, s.cell_count)?;
                out["embedded_base"] = json!(embed_base(&lv, &w)?);
            }
            println!("{out}");
            Ok(EXIT_PASS)
        }

        Cmd::Assemble { src, level, word, out, mass_out } => {
            let s = load_structure(&src)?;
            let t = tolerances(cli.cluster_tol, cli.residual_tol, cli.match_tol, &s);
            let w = word_or_constant(&word, level, &s)?;
            let lv = Arc::new(build_level(&s, level, &caps)?);
            let op = assemble_level(&s, lv, &w)?;
            let prov = Provenance { tols: t, seed: None };
            write_artifact(&out, &triplet_csv(&op, &prov))?;
            let mass_path = mass_out.unwrap_or_else(|| {
                let mut p = out.as_os_str().to_owned();
                p.push(".mass.csv");
                PathBuf::from(p)
            });
            write_artifact(&mass_path, &mass_csv(&op, &prov))?;
            println!(
                "{}",
                json!({
                    "vertex_count": op.a.dim(),
                    "entries": op.a.entries().len(),
                    "omega_scale": op.omega_scale,
                    "out": out,
                    "mass_out": mass_path,
                })
            );
            Ok(EXIT_PASS)
        }

        Cmd::Spectrum { src, level, dirichlet, word, csv, gnuplot } => {
            let s = load_structure(&src)?;
            let t = tolerances(cli.cluster_tol, cli.residual_tol, cli.match_tol, &s);
            let w = word_or_constant(&word, level, &s)?;
            let lv = Arc::new(build_level(&s, level, &caps)?);
            let op = assemble_level(&s, lv, &w)?;
            let (d, kind) = if dirichlet {
                (solve_dirichlet(&op, &caps)?, "dirichlet")
            } else {
                (solve_neumann(&op, &caps)?, "neumann")
            };
            let m = counting_measure(&d, 1.0, t.cluster);
            let prov = Provenance { tols: t, seed: None };
            let text = spectrum_csv(&[(None, &m, kind)], &prov);
            match &csv {
                Some(path) => {
                    write_artifact(path, &text)?;
                    if gnuplot {
                        let name = path.file_name().unwrap_or_default().to_string_lossy();
                        let script = path.with_extension("gp");
                        write_artifact(&script, &gnuplot_script(&name))?;
                    }
                    println!(
                        "{}",
                        json!({"atoms": m.atoms.len(), "total_mass": m.total_mass(), "csv": path})
                    );
                }
                None => print!("{text}"),
            }
            Ok(EXIT_PASS)
        }

        Cmd::Dos { src, levels, dirichlet, csv, gnuplot } => {
            let s = load_structure(&src)?;
            let t = tolerances(cli.cluster_tol, cli.residual_tol, cli.match_tol, &s);
            let levels = parse_levels(&levels)?;
            let bc = if dirichlet { BoundaryKind::Dirichlet } else { BoundaryKind::Neumann };
            let report = dos_report(&s, &levels, bc, &caps, &t)?;
            let prov = Provenance { tols: t, seed: None };
            if let Some(path) = &csv {
                let mut blocks = Vec::new();
                let measures: Vec<_> = levels
                    .iter()
                    .map(|&n| {
                        fractal_spectra_core::density_of_states(&s, n, bc, &caps, &t)
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                for (n, m) in levels.iter().zip(&measures) {
                    blocks.push((Some(*n), m, bc.as_str()));
                }
                write_artifact(path, &spectrum_csv(&blocks, &prov))?;
                if gnuplot {
                    let name = path.file_name().unwrap_or_default().to_string_lossy();
                    write_artifact(&path.with_extension("gp"), &gnuplot_script(&name))?;
                }
            }
            println!("{}", report_json(&report, &prov));
            Ok(EXIT_PASS)
        }

        Cmd::Nd { src, level, csv } => {
            let s = load_structure(&src)?;
            let t = tolerances(cli.cluster_tol, cli.residual_tol, cli.match_tol, &s);
            let lv = Arc::new(build_level(&s, level, &caps)?);
            let op = assemble_level(&s, lv, &BlowupWord::constant(level))?;
            let nd = nd_subspace(&op, &caps, &t)?;
            let m = nd_measure_from_subspace(&nd, 1.0, t.cluster);
            let prov = Provenance { tols: t, seed: None };
            if let Some(path) = &csv {
                write_artifact(path, &spectrum_csv(&[(Some(level), &m, "nd")], &prov))?;
            }
            println!(
                "{}",
                json!({
                    "level": level,
                    "dim": nd.dim(),
                    "atoms": m.atoms.iter().map(|&(l, w)| json!([l, w])).collect::<Vec<_>>(),
                    "tolerances": tolerances_json(&t),
                })
            );
            Ok(EXIT_PASS)
        }

        Cmd::Verify { what, src, level, enumerate, samples, seed } => {
            let s = load_structure(&src)?;
            let t = tolerances(cli.cluster_tol, cli.residual_tol, cli.match_tol, &s);
            let mode = match (enumerate, samples) {
                (true, None) => Some(WordMode::Enumerate),
                (false, Some(count)) => Some(WordMode::Sample {
                    count,
                    seed: seed.expect("clap enforces --seed with --samples"),
                }),
                (false, None) => None,
                (true, Some(_)) => unreachable!("clap forbids --enumerate with --samples"),
            };
            let needs_mode = matches!(what, Check::Identity | Check::NdIdentity | Check::Overlap);
            if needs_mode && mode.is_none() {
                return Err(Failure::usage("this check needs --enumerate or --samples k --seed s"));
            }
            let prov = Provenance { tols: t, seed };

            let report = match what {
                Check::Identity | Check::NdIdentity => {
                    let nd = matches!(what, Check::NdIdentity);
                    let sweep = IdentitySweep::prepare(&s, level, nd, &caps, &t)?;
                    let words = generate_words(&s, level, mode.unwrap(), &caps)?;
                    let pool = thread_pool(cli.jobs)?;
                    // indexed parallel map collects in word order, so the
                    // ordered fold in finish() sees the same sequence for
                    // every --jobs value
                    let contributions = pool.install(|| {
                        words
                            .par_iter()
                            .map(|w| sweep.word_contribution(w))
                            .collect::<Result<Vec<_>, _>>()
                    })?;
                    sweep.finish(&contributions)?
                }
                Check::Replication => verify_nd_replication(&s, level, &caps, &t)?,
                Check::Interlacing => interlacing_check(&s, level, &caps, &t)?,
                Check::Deficiency => {
                    let d = nd_deficiency(&s, level, &caps, &t)?;
                    println!(
                        "{}",
                        json!({
                            "pass": true,
                            "deficiency": d,
                            "tolerances": tolerances_json(&t),
                            "seed": seed,
                        })
                    );
                    return Ok(EXIT_PASS);
                }
                Check::Overlap => {
                    let words = generate_words(&s, level, mode.unwrap(), &caps)?;
                    spectrum_overlap(&s, level, &words, &caps, &t)?
                }
            };
            println!("{}", report_json(&report, &prov));
            Ok(if report.pass() { EXIT_PASS } else { EXIT_VERDICT })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn levels_grammar() {
        assert_eq!(parse_levels("1..4").unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(parse_levels("2,3,5").unwrap(), vec![2, 3, 5]);
        assert!(parse_levels("5..2").is_err());
        assert!(parse_levels("3,2").is_err());
        assert!(parse_levels("x").is_err());
    }

    #[test]
    fn word_grammar() {
        let w = parse_word("1,2,1", 3, 2).unwrap();
        assert_eq!(w.letters, vec![1, 2, 1]);
        assert!(parse_word("1,2", 3, 2).is_err());
        assert!(parse_word("1,3", 2, 2).is_err());
        assert!(parse_word("a,b", 2, 2).is_err());
    }

    #[test]
    fn cap_env_shrinks_dense_cap() {
        // parsed value caps everything; dense cap never grows past default
        std::env::set_var("FRACTAL_SPECTRA_CAP", "50");
        let caps = caps_from_env().unwrap();
        std::env::remove_var("FRACTAL_SPECTRA_CAP");
        assert_eq!(caps.vertex_cap, 50);
        assert_eq!(caps.word_cap, 50);
        assert_eq!(caps.dense_cap, 50);
    }
}
