//! Command-line access to the exact tree-automorphism engine: element
//! queries, subgroup reports, and the verification suite.
//!
//! Exit codes: 0 success, 1 check failure, 2 usage or parse error,
//! 3 resource refusal (budget or unbounded-presentation errors).

use clap::{Parser, Subcommand};
use grigcalc::catalog;
use grigcalc::closure::subgroup_lattice_over_b_with_budget;
use grigcalc::presentation::{act_vertex, portrait_of, section, GroupPresentation};
use grigcalc::presets::{ggs, grigorchuk, load_group, save_group, GgsVector};
use grigcalc::quotient::{index_at_level, orbits_on_level};
use grigcalc::registry::{grig_registry, RistEmbeddingRegistry};
use grigcalc::subgroups::{classify, nr_tree_estimate, NrStatus, SubgroupSpec};
use grigcalc::verification::run_suite;
use grigcalc::vertex::Vertex;
use grigcalc::word::parse_word;
use grigcalc::wordproblem::{element_order, is_trivial, OrderResult};
use grigcalc::{Budget, Error};
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "grigcalc", version, about = "Exact computations in self-similar groups of rooted-tree automorphisms")]
struct Cli {
    /// Group preset: `grigorchuk`, `ggs:p:e0,e1,…`, or a definition file path.
    #[arg(long, global = true, default_value = "grigorchuk")]
    group: String,
    /// Emit structured JSON instead of plain text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a single element given as a word.
    Element {
        #[command(subcommand)]
        cmd: ElementCmd,
    },
    /// Reports about a finitely generated subgroup.
    Subgroup {
        #[command(subcommand)]
        cmd: SubgroupCmd,
    },
    /// Print a built-in subgroup as a spec file.
    Catalog {
        #[command(subcommand)]
        cmd: CatalogCmd,
    },
    /// Print the active group presentation in the definition file format.
    Group,
    /// Run the verification suite.
    Verify {
        /// Only run checks whose name contains this substring.
        #[arg(long)]
        only: Option<String>,
    },
}

#[derive(Subcommand)]
enum ElementCmd {
    /// Image of a vertex under the element.
    Eval {
        word: String,
        #[arg(long)]
        vertex: String,
    },
    /// Section of the element at a vertex.
    Section {
        word: String,
        #[arg(long)]
        vertex: String,
    },
    /// Portrait labels down to a depth.
    Portrait {
        word: String,
        #[arg(long)]
        depth: usize,
    },
    /// Exact triviality via the section-closure engine.
    Trivial { word: String },
    /// Exact order search up to a cap.
    Order {
        word: String,
        #[arg(long)]
        cap: Option<u64>,
    },
}

#[derive(Subcommand)]
enum SubgroupCmd {
    /// Orbit partition on a level.
    Orbits {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        level: usize,
    },
    /// Index of the subgroup in an ambient group at a level.
    Index {
        #[arg(long)]
        spec: PathBuf,
        /// Ambient subgroup spec file; the whole group when omitted.
        #[arg(long = "in")]
        ambient: Option<PathBuf>,
        #[arg(long)]
        level: usize,
    },
    /// Check level transitivity up to a level.
    Transitive {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 8)]
        max_level: usize,
    },
    /// Non-rigidity-tree estimate.
    NrTree {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 2)]
        depth: usize,
        #[arg(long, default_value_t = 6)]
        max_level: usize,
    },
    /// Two-sided classification evidence.
    Classify {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 6)]
        max_level: usize,
    },
    /// The lattice of subgroups over the normal closure of b.
    LatticeOverB,
}

#[derive(Subcommand)]
enum CatalogCmd {
    /// Write a named built-in subgroup spec to stdout.
    Export { name: String },
    /// List the available names.
    List,
}

fn load_preset(spec: &str) -> Result<GroupPresentation, Error> {
    if spec == "grigorchuk" {
        return Ok(grigorchuk());
    }
    if let Some(rest) = spec.strip_prefix("ggs:") {
        let mut parts = rest.splitn(2, ':');
        let p: u64 = parts
            .next()
            .unwrap_or_default()
            .parse()
            .map_err(|_| Error::Precondition(format!("bad GGS prime in `{spec}`")))?;
        let e: Vec<i64> = parts
            .next()
            .unwrap_or_default()
            .split(',')
            .map(|t| t.trim().parse::<i64>())
            .collect::<Result<_, _>>()
            .map_err(|_| Error::Precondition(format!("bad GGS vector in `{spec}`")))?;
        return ggs(&GgsVector::new(p, &e)?);
    }
    load_group(std::path::Path::new(spec))
}

fn registry_for(g: &GroupPresentation) -> RistEmbeddingRegistry {
    grig_registry(g, 2).unwrap_or_else(|_| RistEmbeddingRegistry::new(Vec::new()))
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Parse { .. }
        | Error::UnknownGenerator(_)
        | Error::InvalidPresentation(_)
        | Error::Precondition(_)
        | Error::Io(_) => 2,
        Error::BudgetExceeded(_) | Error::Unbounded(_) | Error::SearchExhausted(_) => 3,
        Error::Certification(_) => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode, Error> {
    let g = load_preset(&cli.group)?;
    match &cli.command {
        Command::Element { cmd } => run_element(cmd, &g, cli.json),
        Command::Subgroup { cmd } => run_subgroup(cmd, &g, cli.json),
        Command::Catalog { cmd } => run_catalog(cmd, &g),
        Command::Group => {
            print!("{}", save_group(&g));
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { only } => run_verify(only.as_deref(), cli.json),
    }
}

fn run_element(cmd: &ElementCmd, g: &GroupPresentation, json: bool) -> Result<ExitCode, Error> {
    match cmd {
        ElementCmd::Eval { word, vertex } => {
            let w = parse_word(word, g)?;
            let v = Vertex::parse(vertex, g.degree())?;
            let image = act_vertex(&w, &v, g);
            if json {
                println!("{}", json!({ "op": "eval", "vertex": v.to_string(), "image": image.to_string() }));
            } else {
                println!("{image}");
            }
        }
        ElementCmd::Section { word, vertex } => {
            let w = parse_word(word, g)?;
            let v = Vertex::parse(vertex, g.degree())?;
            let s = section(&w, &v, g);
            if json {
                println!("{}", json!({ "op": "section", "vertex": v.to_string(), "section": s.display(g) }));
            } else {
                println!("{}", s.display(g));
            }
        }
        ElementCmd::Portrait { word, depth } => {
            let w = parse_word(word, g)?;
            let p = portrait_of(&w, *depth, g);
            if json {
                let mut labels = serde_json::Map::new();
                for level in 0..p.depth() {
                    for v in Vertex::level(level, g.degree()) {
                        labels.insert(v.to_string(), json!(p.label(&v).cycle_string()));
                    }
                }
                println!("{}", json!({ "op": "portrait", "depth": depth, "labels": labels }));
            } else {
                for level in 0..p.depth() {
                    for v in Vertex::level(level, g.degree()) {
                        println!("{v}: {}", p.label(&v).cycle_string());
                    }
                }
            }
        }
        ElementCmd::Trivial { word } => {
            let w = parse_word(word, g)?;
            let t = is_trivial(&w, g)?;
            if json {
                println!("{}", json!({ "op": "trivial", "trivial": t }));
            } else {
                println!("{t}");
            }
        }
        ElementCmd::Order { word, cap } => {
            let w = parse_word(word, g)?;
            let cap = cap.unwrap_or(Budget::from_env().order_cap);
            match element_order(&w, g, cap)? {
                OrderResult::Finite(k) => {
                    if json {
                        println!("{}", json!({ "op": "order", "order": k }));
                    } else {
                        println!("{k}");
                    }
                }
                OrderResult::Unresolved { cap } => {
                    if json {
                        println!("{}", json!({ "op": "order", "order": null, "cap": cap }));
                    } else {
                        println!("unresolved (cap {cap})");
                    }
                }
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn read_spec(path: &PathBuf, g: &GroupPresentation) -> Result<SubgroupSpec, Error> {
    SubgroupSpec::parse_spec_file(&std::fs::read_to_string(path)?, g)
}

fn run_subgroup(cmd: &SubgroupCmd, g: &GroupPresentation, json: bool) -> Result<ExitCode, Error> {
    match cmd {
        SubgroupCmd::Orbits { spec, level } => {
            let h = read_spec(spec, g)?;
            let orbits = orbits_on_level(&h.generators, *level, g);
            if json {
                println!(
                    "{}",
                    json!({ "op": "orbits", "subgroup": h.name, "level": level, "count": orbits.len(), "orbits": orbits })
                );
            } else {
                println!("{} orbits at level {level}", orbits.len());
                for o in &orbits {
                    let verts: Vec<String> = o
                        .iter()
                        .map(|&c| Vertex::decode(c, *level, g.degree()).to_string())
                        .collect();
                    println!("  {{{}}}", verts.join(", "));
                }
            }
        }
        SubgroupCmd::Index { spec, ambient, level } => {
            let h = read_spec(spec, g)?;
            let upper = match ambient {
                Some(path) => read_spec(path, g)?.generators,
                None => g.generator_words(),
            };
            let idx = index_at_level(&upper, &h.generators, *level, g)?;
            if json {
                println!(
                    "{}",
                    json!({ "op": "index", "subgroup": h.name, "level": level, "index": idx.to_string() })
                );
            } else {
                println!("{idx}");
            }
        }
        SubgroupCmd::Transitive { spec, max_level } => {
            let h = read_spec(spec, g)?;
            let mut first_failure = None;
            for n in 1..=*max_level {
                if orbits_on_level(&h.generators, n, g).len() != 1 {
                    first_failure = Some(n);
                    break;
                }
            }
            if json {
                println!(
                    "{}",
                    json!({ "op": "transitive", "subgroup": h.name, "max_level": max_level, "transitive": first_failure.is_none(), "first_intransitive_level": first_failure })
                );
            } else {
                match first_failure {
                    None => println!("transitive at levels 1..{max_level}"),
                    Some(n) => println!("intransitive at level {n}"),
                }
            }
        }
        SubgroupCmd::NrTree { spec, depth, max_level } => {
            let h = read_spec(spec, g)?;
            let registry = registry_for(g);
            let report = nr_tree_estimate(&h, &registry, *depth, *max_level, 3, g)?;
            if json {
                let rows: Vec<_> = report
                    .per_vertex
                    .iter()
                    .map(|r| {
                        json!({
                            "vertex": r.vertex.to_string(),
                            "status": status_str(r.status),
                            "indices": r.index_sequence.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
                            "exact_witness": r.exact_witness,
                        })
                    })
                    .collect();
                println!(
                    "{}",
                    json!({ "op": "nr-tree", "subgroup": h.name, "depth": depth, "max_level": max_level, "vertices": rows })
                );
            } else {
                for r in &report.per_vertex {
                    let seq: Vec<String> =
                        r.index_sequence.iter().map(|x| x.to_string()).collect();
                    println!("{}: {} indices=[{}]", r.vertex, status_str(r.status), seq.join(", "));
                }
            }
        }
        SubgroupCmd::Classify { spec, max_level } => {
            let h = read_spec(spec, g)?;
            let registry = registry_for(g);
            let report = classify(&h, *max_level, &registry, g)?;
            if json {
                println!(
                    "{}",
                    json!({
                        "op": "classify",
                        "subgroup": report.name,
                        "verdict": report.verdict.as_str(),
                        "orbit_counts": report.orbit_counts,
                        "indices": report.index_sequence.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
                        "finite_index_evidence": report.finite_index_evidence,
                        "transversal_level": report.transversal_level,
                        "trivial_rist_vertex": report.trivial_rist_vertex.as_ref().map(|v| v.to_string()),
                        "nr_action_transitive": report.nr_action_transitive,
                        "projection_consistency": report.projection_consistency,
                    })
                );
            } else {
                println!("verdict: {}", report.verdict.as_str());
                println!("orbit counts: {:?}", report.orbit_counts);
                let seq: Vec<String> =
                    report.index_sequence.iter().map(|x| x.to_string()).collect();
                println!("index sequence: [{}]", seq.join(", "));
                println!("finite-index evidence: {}", report.finite_index_evidence);
                println!("transversal level: {:?}", report.transversal_level);
                if let Some(v) = &report.trivial_rist_vertex {
                    println!("trivial rigid stabilizer at: {v}");
                }
            }
        }
        SubgroupCmd::LatticeOverB => {
            let report = subgroup_lattice_over_b_with_budget(g, Budget::from_env().setwise)?;
            if json {
                println!(
                    "{}",
                    json!({
                        "op": "lattice-over-b",
                        "subgroup_count": report.subgroup_count,
                        "index_multiset": report.index_multiset,
                        "quotient_dihedral8": report.quotient_dihedral8,
                        "rows": report.row_matches.iter().map(|(n, i)| json!({ "name": n, "member": i })).collect::<Vec<_>>(),
                        "conjugate_pairs": report.conjugate_pairs.iter().map(|(n, i, j)| json!({ "name": n, "member": i, "partner": j })).collect::<Vec<_>>(),
                    })
                );
            } else {
                println!("{} subgroups over B", report.subgroup_count);
                println!("index multiset: {:?}", report.index_multiset);
                println!("quotient dihedral of order 8: {}", report.quotient_dihedral8);
                for (name, idx) in &report.row_matches {
                    println!("  {name} -> member {idx}");
                }
                for (name, idx, partner) in &report.conjugate_pairs {
                    println!("  conjugate pair: {name} (member {idx}) <-> member {partner}");
                }
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn status_str(s: NrStatus) -> &'static str {
    match s {
        NrStatus::RistCertified => "rist-certified",
        NrStatus::InfiniteIndexEvidence => "infinite-index-evidence",
        NrStatus::Unknown => "unknown",
    }
}

fn run_catalog(cmd: &CatalogCmd, g: &GroupPresentation) -> Result<ExitCode, Error> {
    let names = [
        "b", "k", "h", "j02", "j05", "j15", "j15-alt", "s230", "s240", "wl", "wl-alt", "wp",
    ];
    match cmd {
        CatalogCmd::List => {
            for n in names {
                println!("{n}");
            }
            Ok(ExitCode::SUCCESS)
        }
        CatalogCmd::Export { name } => {
            let spec = match name.as_str() {
                "b" => catalog::b_subgroup(g),
                "k" => catalog::k_subgroup(g),
                "h" => catalog::h_stabilizer(g),
                "j02" => catalog::j02(g),
                "j05" => catalog::j05(g),
                "j15" => catalog::j15(g),
                "j15-alt" => catalog::j15_alt(g),
                "s230" => catalog::s230(g),
                "s240" => catalog::s240(g),
                "wl" => catalog::wl(g),
                "wl-alt" => catalog::wl_alt(g),
                "wp" => {
                    let registry = grig_registry(g, 2)?;
                    catalog::wp(g, &registry)?
                }
                other => {
                    return Err(Error::Precondition(format!(
                        "unknown catalog name `{other}`; see `catalog list`"
                    )))
                }
            };
            print!("{}", spec.to_spec_file(g));
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn run_verify(only: Option<&str>, json: bool) -> Result<ExitCode, Error> {
    let results = run_suite(only);
    let mut all_pass = true;
    if json {
        let rows: Vec<_> = results
            .iter()
            .map(|r| json!({ "name": r.name, "passed": r.passed, "witness": r.witness, "millis": r.millis }))
            .collect();
        all_pass = results.iter().all(|r| r.passed);
        println!("{}", json!({ "op": "verify", "checks": rows, "all_passed": all_pass }));
    } else {
        for r in &results {
            let status = if r.passed { "PASS" } else { "FAIL" };
            println!("{status} {:<28} {:>6} ms  {}", r.name, r.millis, r.witness);
            all_pass &= r.passed;
        }
        println!(
            "{} checks, {}",
            results.len(),
            if all_pass { "all passed" } else { "FAILURES PRESENT" }
        );
    }
    Ok(if all_pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
