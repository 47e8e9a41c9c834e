//! Command-line front end: one verb per library operation, exact rationals
//! everywhere, deterministic output.
//!
//! Exit codes: 0 on success, 1 on a structured domain error (cap exceeded,
//! invalid element, vertex not fixed, ...), 2 on a usage error. Rationals
//! print as `num/den` in tables and as `{"num": "...", "den": "..."}` pairs
//! of decimal strings in JSON; every JSON document carries the schema tag
//! `"cantor/1"`. Identical invocations produce byte-identical output.

use cantor::catalog::{
    build_example, catalog_names, chain_compatibility, CatalogEntry, ChainCompatibility,
    ExampleParams,
};
use cantor::dynamics::{
    certify_nondegenerate, degeneracy_scan, density_profile, fixed_vertex_count,
    lqa_witness_search, moved_ratio_below, replay_bound, CertificateRoute, CertifyOutcome,
    DegeneracyVerdict,
};
use cantor::graph::{schreier_level_graph, schreier_metric, stabilizer_schreier_ball, SchreierGraph};
use cantor::irs::{atomicity_report, irs_empirical, AtomicityTrend};
use cantor::measure::boundary_metric;
use cantor::word::parse_digits;
use cantor::{
    BoundaryPrefix, Error, GeneratedAction, Letter, Limits, SphericalIndex, Vertex,
};
use clap::{Args, Parser, Subcommand};
use num::{BigInt, BigRational};
use serde_json::{json, Value};
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Parser)]
#[command(name = "cantor", version, about = "Exact finite-depth computation with group actions on tree boundaries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Emit JSON instead of a table.
    #[arg(long, global = true)]
    json: bool,
    /// Write output to a file instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Largest materializable level size (also via CANTOR_LEVEL_CAP).
    #[arg(long, global = true, value_name = "N")]
    level_cap: Option<u64>,
}

/// Selects a catalog action; most verbs start from one.
#[derive(Args)]
struct ExampleArgs {
    /// Catalog entry name (see `cantor catalog list`).
    #[arg(long)]
    example: String,
    /// Constant arity, for the entries on a constant-arity tree.
    #[arg(long, alias = "d", value_name = "D")]
    arity: Option<u64>,
    /// Index override: `D`, `geo:n1,..:r`, or `ep:n1,..:c1,..`.
    #[arg(long, value_name = "INDEX")]
    index: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// List the catalog or check an entry's facts.
    Catalog {
        #[command(subcommand)]
        action: CatalogCmd,
    },
    /// Apply a word of generators to a vertex.
    Apply {
        #[command(flatten)]
        example: ExampleArgs,
        /// Word over generator names, rightmost letter applied first,
        /// e.g. "a b^-1" (use "e" for the identity).
        #[arg(long)]
        word: String,
        /// Comma-separated digits, e.g. "0,1,0" ("e" for the root).
        #[arg(long, default_value = "e")]
        vertex: String,
    },
    /// Print the action table of a generator's section at a vertex.
    Section {
        #[command(flatten)]
        example: ExampleArgs,
        /// Generator name.
        #[arg(long)]
        gen: String,
        /// Vertex whose section to tabulate.
        #[arg(long)]
        vertex: String,
        /// Levels of the section to tabulate.
        #[arg(long, default_value_t = 2)]
        depth: usize,
    },
    /// Enumerate the word ball of the action.
    Ball {
        #[command(flatten)]
        example: ExampleArgs,
        /// Maximum word length.
        #[arg(long)]
        radius: usize,
        /// Level down to which words are compared for deduplication.
        #[arg(long, default_value_t = 16)]
        dedup_depth: usize,
    },
    /// Orbit of a vertex under the generators.
    Orbit {
        #[command(flatten)]
        example: ExampleArgs,
        #[arg(long)]
        vertex: String,
    },
    /// Ball words fixing a boundary prefix.
    Stabilizer {
        #[command(flatten)]
        example: ExampleArgs,
        /// Boundary prefix to stabilize, e.g. "0,0,0,0".
        #[arg(long)]
        point: String,
        #[arg(long)]
        radius: usize,
        /// Deduplication depth for the ball (defaults to the point's depth).
        #[arg(long)]
        dedup_depth: Option<usize>,
    },
    /// Build a Schreier graph (level orbit, or stabilizer ball at a point).
    Schreier {
        #[command(flatten)]
        example: ExampleArgs,
        /// Level-orbit mode: the level to act on.
        #[arg(long, conflicts_with_all = ["center", "radius"])]
        level: Option<usize>,
        /// Basepoint vertex for level mode (defaults to all zeros).
        #[arg(long, requires = "level")]
        basepoint: Option<String>,
        /// Stabilizer-ball mode: the center prefix.
        #[arg(long, requires = "radius")]
        center: Option<String>,
        /// Stabilizer-ball mode: the graph radius around the center.
        #[arg(long, requires = "center")]
        radius: Option<usize>,
        /// Emit DOT instead of a table.
        #[arg(long, conflicts_with = "json")]
        dot: bool,
    },
    /// Exact fixed/moved measure fractions.
    Fixratio {
        #[command(flatten)]
        example: ExampleArgs,
        /// Generator to analyse (defaults to the entry's distinguished one).
        #[arg(long)]
        gen: Option<String>,
        /// Whole-level mode: count fixed vertices at this level.
        #[arg(long)]
        level: Option<usize>,
        /// Cylinder mode: moved fraction below this vertex.
        #[arg(long, conflicts_with = "level")]
        vertex: Option<String>,
        /// ex45_c sugar: use the branch vertex 0^(2^k - 1) 1.
        #[arg(long, conflicts_with_all = ["level", "vertex"])]
        k: Option<u32>,
        /// ex44_c sugar: use the branch vertex 0^l 1.
        #[arg(long, conflicts_with_all = ["level", "vertex", "k"])]
        l: Option<usize>,
        /// Levels to resolve below the vertex in cylinder mode.
        #[arg(long)]
        probe: Option<usize>,
    },
    /// Scan fixed vertices for cylinders refuting a uniform moved bound.
    Scan {
        #[command(flatten)]
        example: ExampleArgs,
        #[arg(long)]
        gen: String,
        #[arg(long, default_value_t = 6)]
        max_level: usize,
        #[arg(long, default_value_t = 12)]
        probe: usize,
        /// Bound to refute, as `num/den`.
        #[arg(long)]
        threshold: String,
    },
    /// Certify a uniform moved-measure lower bound for a generator.
    Certify {
        #[command(flatten)]
        example: ExampleArgs,
        #[arg(long)]
        gen: String,
        /// Also replay the certificate against this many random fixed vertices.
        #[arg(long)]
        replay: Option<u64>,
        /// Deepest level replay samples from.
        #[arg(long, default_value_t = 8)]
        replay_level: usize,
        /// Probe depth for replay ratio checks.
        #[arg(long, default_value_t = 24)]
        probe: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Search the word ball for locally-quasi-analytic violations.
    Lqa {
        #[command(flatten)]
        example: ExampleArgs,
        #[arg(long)]
        radius: usize,
        /// Identity-window depth a witness must hold for.
        #[arg(long)]
        window: usize,
        /// Deepest witness level to scan (defaults to the window).
        #[arg(long)]
        max_level: Option<usize>,
    },
    /// Build 2^n orbit points with pairwise distinct stabilizer word sets.
    Distinct {
        #[command(flatten)]
        example: ExampleArgs,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        radius: usize,
        #[arg(long)]
        depth: usize,
    },
    /// Fixed-measure density of cylinders along a boundary prefix.
    Density {
        #[command(flatten)]
        example: ExampleArgs,
        #[arg(long)]
        gen: String,
        /// Boundary prefix whose cylinders are profiled.
        #[arg(long)]
        point: String,
        /// Comma-separated cylinder levels, e.g. "1,2,4,8".
        #[arg(long)]
        levels: String,
        #[arg(long, default_value_t = 8)]
        probe: usize,
    },
    /// Sample boundary points and tabulate stabilizer Schreier-ball classes.
    Irs {
        #[command(flatten)]
        example: ExampleArgs,
        /// Number of sampled points.
        #[arg(long)]
        n: usize,
        /// Sampled prefix depth.
        #[arg(long)]
        depth: usize,
        /// Ball radius for the class invariant.
        #[arg(long, conflicts_with = "radii")]
        radius: Option<usize>,
        /// Atomicity mode: strictly increasing radii, e.g. "2,3,4,5".
        #[arg(long)]
        radii: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Dominant-class threshold for the atomicity verdict, as `num/den`.
        #[arg(long, default_value = "99/100")]
        threshold: String,
        /// Emit the dominant class representative as DOT.
        #[arg(long, conflicts_with_all = ["json", "radii"])]
        dot: bool,
    },
    /// Distances: between boundary points, or between Schreier graphs.
    Metric {
        #[command(subcommand)]
        action: MetricCmd,
    },
    /// Alternating-divisibility compatibility of two arity sequences.
    Chains {
        /// First index: `D`, `geo:n1,..:r`, or `ep:n1,..:c1,..`.
        #[arg(long)]
        a: String,
        /// Second index, same syntax.
        #[arg(long)]
        b: String,
        #[arg(long, default_value_t = 32)]
        horizon: usize,
    },
}

#[derive(Subcommand)]
enum CatalogCmd {
    /// Names, indices, generators, and summaries of all entries.
    List,
    /// Re-derive an entry's facts and report pass/fail.
    Facts {
        name: String,
        /// Check a single fact instead of all of them.
        #[arg(long)]
        fact: Option<String>,
        #[arg(long, alias = "d", value_name = "D")]
        arity: Option<u64>,
        #[arg(long, value_name = "INDEX")]
        index: Option<String>,
    },
    /// Emit an entry's generator definitions as JSON.
    Export {
        name: String,
        #[arg(long, alias = "d", value_name = "D")]
        arity: Option<u64>,
        #[arg(long, value_name = "INDEX")]
        index: Option<String>,
    },
}

#[derive(Subcommand)]
enum MetricCmd {
    /// Ultrametric distance between two boundary prefixes.
    Boundary {
        #[command(flatten)]
        example: ExampleArgs,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
    },
    /// Ball-agreement distance between two stabilizer-type Schreier graphs.
    Schreier {
        #[command(flatten)]
        example: ExampleArgs,
        /// First graph: level-orbit mode.
        #[arg(long, conflicts_with_all = ["center", "center2"])]
        level: Option<usize>,
        /// Second graph: level-orbit mode.
        #[arg(long, requires = "level")]
        level2: Option<usize>,
        /// First graph: stabilizer ball at this center.
        #[arg(long, requires_all = ["center2", "radius"])]
        center: Option<String>,
        /// Second graph: stabilizer ball at this center.
        #[arg(long)]
        center2: Option<String>,
        /// Ball radius for the stabilizer-ball mode.
        #[arg(long)]
        radius: Option<usize>,
        /// Largest ball radius compared before giving an upper bound.
        #[arg(long, default_value_t = 8)]
        r_max: usize,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(), // clap prints and exits 2 (0 for --help/--version)
    };
    let mut limits = Limits::from_env();
    if let Some(cap) = cli.level_cap {
        limits.level_cap = cap.max(1);
    }
    let emit = Emit { json: cli.json, out: cli.out.clone() };
    match run(cli.command, &limits, &emit) {
        Ok(()) => std::process::exit(0),
        Err(e) => {
            eprintln!("cantor: {e}");
            std::process::exit(1);
        }
    }
}

/// Output plumbing: a table string or a schema-tagged JSON document, to
/// stdout or a file.
struct Emit {
    json: bool,
    out: Option<PathBuf>,
}

impl Emit {
    fn payload(&self, text: String, json: Value) -> Result<(), Error> {
        let body = if self.json {
            let doc = match json {
                Value::Object(map) => {
                    let mut tagged = serde_json::Map::with_capacity(map.len() + 1);
                    tagged.insert("schema".into(), Value::String("cantor/1".into()));
                    tagged.extend(map);
                    Value::Object(tagged)
                }
                other => other,
            };
            let mut s = serde_json::to_string_pretty(&doc)?;
            s.push('\n');
            s
        } else {
            text
        };
        self.write(body)
    }

    /// Raw output (DOT), bypassing the table/JSON switch.
    fn write(&self, body: String) -> Result<(), Error> {
        match &self.out {
            Some(path) => std::fs::write(path, body).map_err(Error::from),
            None => {
                print!("{body}");
                Ok(())
            }
        }
    }
}

fn run(command: Command, limits: &Limits, emit: &Emit) -> Result<(), Error> {
    match command {
        Command::Catalog { action } => run_catalog(action, limits, emit),
        Command::Apply { example, word, vertex } => {
            let entry = build(&example)?;
            let w = parse_word(&entry.action, &word)?;
            let v = Vertex::new(&entry.index, parse_digits(&vertex)?)?;
            let image = entry.action.apply_word_to_vertex(&w, &v)?;
            emit.payload(
                format!("{} . {} = {}\n", entry.action.word_to_string(&w), v, image),
                json!({
                    "example": entry.name,
                    "word": entry.action.word_to_string(&w),
                    "vertex": v,
                    "image": image,
                }),
            )
        }
        Command::Section { example, gen, vertex, depth } => {
            let entry = build(&example)?;
            let g = generator(&entry, &gen)?;
            let v = Vertex::new(&entry.index, parse_digits(&vertex)?)?;
            let section = g.section(&v)?;
            let index = section.index().clone();
            let mut rows = Vec::new();
            for level in 1..=depth {
                index.level_size_capped(level, limits.level_cap)?;
                for digits in enumerate_level(&index, level)? {
                    let from = Vertex::new(&index, digits.clone())?;
                    let to = Vertex::new(&index, section.apply(&digits)?)?;
                    rows.push((from, to));
                }
            }
            let mut text = format!("section of {gen} at {v}, levels 1..={depth}\n");
            for (from, to) in &rows {
                text.push_str(&format!("  {from} -> {to}\n"));
            }
            emit.payload(
                text,
                json!({
                    "example": entry.name,
                    "gen": gen,
                    "vertex": v,
                    "depth": depth,
                    "rows": rows.iter().map(|(f, t)| json!({"from": f, "to": t})).collect::<Vec<_>>(),
                }),
            )
        }
        Command::Ball { example, radius, dedup_depth } => {
            let entry = build(&example)?;
            let ball = entry.action.ball(radius, dedup_depth, limits)?;
            let words: Vec<String> =
                ball.words().map(|w| entry.action.word_to_string(w)).collect();
            let mut text = format!(
                "word ball: radius {radius}, {} elements, deduplication {} (depth {dedup_depth})\n",
                ball.len(),
                if ball.exact { "exact" } else { "at scale" },
            );
            for w in &words {
                text.push_str(&format!("  {w}\n"));
            }
            emit.payload(
                text,
                json!({
                    "example": entry.name,
                    "radius": radius,
                    "dedup_depth": dedup_depth,
                    "exact": ball.exact,
                    "count": ball.len(),
                    "words": words,
                }),
            )
        }
        Command::Orbit { example, vertex } => {
            let entry = build(&example)?;
            let v = Vertex::new(&entry.index, parse_digits(&vertex)?)?;
            let orbit = entry.action.orbit_of_vertex(&v, limits)?;
            let mut text = format!("orbit of {v}: {} vertices\n", orbit.len());
            for u in &orbit {
                text.push_str(&format!("  {u}\n"));
            }
            emit.payload(
                text,
                json!({
                    "example": entry.name,
                    "vertex": v,
                    "size": orbit.len(),
                    "orbit": orbit,
                }),
            )
        }
        Command::Stabilizer { example, point, radius, dedup_depth } => {
            let entry = build(&example)?;
            let x = BoundaryPrefix::new(&entry.index, parse_digits(&point)?)?;
            let dedup = dedup_depth.unwrap_or_else(|| x.depth().max(1));
            let ball = entry.action.ball(radius, dedup, limits)?;
            let stab = entry.action.stabilizer_in_ball(&ball, &x)?;
            let words: Vec<String> =
                stab.iter().map(|&i| entry.action.word_to_string(ball.word(i))).collect();
            let mut text = format!(
                "stabilizer of {x} in the radius-{radius} ball: {} of {} words\n",
                words.len(),
                ball.len(),
            );
            for w in &words {
                text.push_str(&format!("  {w}\n"));
            }
            emit.payload(
                text,
                json!({
                    "example": entry.name,
                    "point": x,
                    "radius": radius,
                    "dedup_depth": dedup,
                    "ball_size": ball.len(),
                    "count": words.len(),
                    "words": words,
                }),
            )
        }
        Command::Schreier { example, level, basepoint, center, radius, dot } => {
            let entry = build(&example)?;
            let graph = match (level, center) {
                (Some(level), None) => {
                    let base = match basepoint {
                        Some(s) => Some(Vertex::new(&entry.index, parse_digits(&s)?)?),
                        None => None,
                    };
                    schreier_level_graph(&entry.action, level, base.as_ref(), limits)?
                }
                (None, Some(center)) => {
                    let x = BoundaryPrefix::new(&entry.index, parse_digits(&center)?)?;
                    stabilizer_schreier_ball(
                        &entry.action,
                        &x,
                        radius.expect("clap enforces --radius with --center"),
                        limits,
                    )?
                }
                _ => {
                    return Err(Error::Unsupported(
                        "pick one mode: --level L, or --center X --radius R".into(),
                    ))
                }
            };
            if dot {
                return emit.write(graph.to_dot());
            }
            emit.payload(graph_summary(&graph), graph_json(&entry.name, &graph))
        }
        Command::Fixratio { example, gen, level, vertex, k, l, probe } => {
            run_fixratio(example, gen, level, vertex, k, l, probe, limits, emit)
        }
        Command::Scan { example, gen, max_level, probe, threshold } => {
            let entry = build(&example)?;
            let g = generator(&entry, &gen)?;
            let threshold = parse_ratio(&threshold)?;
            let report = degeneracy_scan(g, max_level, probe, &threshold, limits)?;
            let mut text = format!(
                "scanned {} fixed-vertex classes to level {max_level} (probe {probe}, {} unresolved)\n",
                report.classes_scanned, report.unresolved,
            );
            if let Some(m) = &report.minimum_exact {
                text.push_str(&format!(
                    "smallest exact moved fraction: {} below {} (level {})\n",
                    fmt_ratio(&m.ratio),
                    m.vertex,
                    m.level,
                ));
            }
            match &report.verdict {
                DegeneracyVerdict::Refutes { witness } => text.push_str(&format!(
                    "refutes alpha >= {}: cylinder {} moves exactly {}\n",
                    fmt_ratio(&report.threshold),
                    witness.vertex,
                    fmt_ratio(&witness.ratio),
                )),
                DegeneracyVerdict::NoVerdict => text.push_str(&format!(
                    "no cylinder below {} found at this scale (not a certificate)\n",
                    fmt_ratio(&report.threshold),
                )),
            }
            let mut doc = serde_json::to_value(&report)?;
            tag_example(&mut doc, &entry.name);
            emit.payload(text, doc)
        }
        Command::Certify { example, gen, replay, replay_level, probe, seed } => {
            let entry = build(&example)?;
            let g = generator(&entry, &gen)?;
            let outcome = certify_nondegenerate(g, limits)?;
            let mut text = match &outcome {
                CertifyOutcome::Certified { certificate } => format!(
                    "certified: alpha = {} via {}\n",
                    fmt_ratio(&certificate.alpha),
                    fmt_route(&certificate.route),
                ),
                CertifyOutcome::NotCertified { reason } => format!("not certified: {reason}\n"),
            };
            let mut doc = serde_json::to_value(&outcome)?;
            tag_example(&mut doc, &entry.name);
            if let (Some(samples), CertifyOutcome::Certified { certificate }) = (replay, &outcome) {
                let report =
                    replay_bound(g, &certificate.alpha, samples, replay_level, probe, seed, limits)?;
                text.push_str(&format!(
                    "replay: {}/{} sampled fixed vertices met the bound ({} trivial sections, {} unresolved, {} failures)\n",
                    report.checked, report.samples, report.trivial_sections, report.unresolved,
                    report.failures,
                ));
                if let Value::Object(map) = &mut doc {
                    map.insert("replay".into(), serde_json::to_value(&report)?);
                }
            }
            emit.payload(text, doc)
        }
        Command::Lqa { example, radius, window, max_level } => {
            let entry = build(&example)?;
            let max_level = max_level.unwrap_or(window);
            let witnesses = lqa_witness_search(&entry.action, radius, window, max_level, limits)?;
            let mut text = format!(
                "radius {radius}, window {window}, levels 0..={max_level}: {} witness(es)\n",
                witnesses.len(),
            );
            for w in &witnesses {
                text.push_str(&format!(
                    "  {} is the identity below {} for {} levels but moves below {}\n",
                    w.element, w.identity_region, w.window, w.active_region,
                ));
            }
            if witnesses.is_empty() {
                text.push_str("  no ball element vanishes on a cylinder at this scale\n");
            }
            emit.payload(
                text,
                json!({
                    "example": entry.name,
                    "radius": radius,
                    "window": window,
                    "max_level": max_level,
                    "witnesses": witnesses,
                }),
            )
        }
        Command::Distinct { example, n, radius, depth } => {
            let entry = build(&example)?;
            let report = distinct_tree(&entry, n, radius, depth, limits)?;
            emit.payload(report.0, report.1)
        }
        Command::Density { example, gen, point, levels, probe } => {
            let entry = build(&example)?;
            let g = generator(&entry, &gen)?;
            let x = BoundaryPrefix::new(&entry.index, parse_digits(&point)?)?;
            let levels = parse_levels(&levels)?;
            let profile = density_profile(g, &x, &levels, probe, limits)?;
            let mut text = format!("fixed-measure density along {x} (probe {probe})\n");
            for p in &profile {
                text.push_str(&format!(
                    "  level {:>3} cylinder {}: {} {}\n",
                    p.level,
                    p.vertex,
                    fmt_bound_kind(&p.fixed_fraction),
                    fmt_ratio(&p.fixed_fraction.value),
                ));
            }
            emit.payload(
                text,
                json!({
                    "example": entry.name,
                    "gen": gen,
                    "point": x,
                    "probe_depth": probe,
                    "profile": profile,
                }),
            )
        }
        Command::Irs { example, n, depth, radius, radii, seed, threshold, dot } => {
            let entry = build(&example)?;
            match radii {
                Some(radii) => {
                    let radii = parse_levels(&radii)?;
                    let threshold = parse_ratio(&threshold)?;
                    let report =
                        atomicity_report(&entry.action, n, depth, &radii, seed, &threshold, limits)?;
                    let mut text = format!(
                        "atomicity probe: {n} samples, depth {depth}, seed {seed}\n  radius  classes  max frequency\n",
                    );
                    for row in &report.table {
                        text.push_str(&format!(
                            "  {:>6}  {:>7}  {}\n",
                            row.radius,
                            row.class_count,
                            fmt_ratio(&row.max_frequency),
                        ));
                    }
                    text.push_str(&format!("verdict ({}): {}\n", report.basis, fmt_trend(&report.verdict)));
                    let mut doc = serde_json::to_value(&report)?;
                    tag_example(&mut doc, &entry.name);
                    emit.payload(text, doc)
                }
                None => {
                    let radius = radius.ok_or_else(|| {
                        Error::Unsupported("pick one mode: --radius R, or --radii R1,R2,..".into())
                    })?;
                    let report = irs_empirical(&entry.action, n, depth, radius, seed, limits)?;
                    if dot {
                        return emit.write(report.classes[0].representative.to_dot());
                    }
                    let mut text = format!(
                        "{n} samples at depth {depth}, radius {radius}, seed {seed}: {} class(es)\n",
                        report.classes.len(),
                    );
                    for class in &report.classes {
                        text.push_str(&format!(
                            "  {}  x{:<6} frequency {}\n",
                            &class.hash[..12],
                            class.count,
                            fmt_ratio(&class.frequency),
                        ));
                    }
                    let mut doc = serde_json::to_value(&report)?;
                    tag_example(&mut doc, &entry.name);
                    emit.payload(text, doc)
                }
            }
        }
        Command::Metric { action } => run_metric(action, limits, emit),
        Command::Chains { a, b, horizon } => {
            let a = parse_index(&a)?;
            let b = parse_index(&b)?;
            let outcome = chain_compatibility(&a, &b, horizon)?;
            let text = match &outcome {
                ChainCompatibility::Compatible { interleaving } => {
                    let links: Vec<String> =
                        interleaving.iter().map(|(i, j)| format!("({i},{j})")).collect();
                    format!("compatible: alternating divisibility sustained, links {}\n", links.join(" "))
                }
                ChainCompatibility::Incompatible { prime } => format!(
                    "incompatible: prime {prime} divides one sequence's products and never the other's\n",
                ),
                ChainCompatibility::Undetermined { horizon } => {
                    format!("undetermined at horizon {horizon}\n")
                }
            };
            let mut doc = serde_json::to_value(&outcome)?;
            if let Value::Object(map) = &mut doc {
                map.insert("horizon".into(), json!(horizon));
            }
            emit.payload(text, doc)
        }
    }
}

fn run_catalog(action: CatalogCmd, limits: &Limits, emit: &Emit) -> Result<(), Error> {
    match action {
        CatalogCmd::List => {
            let mut rows = Vec::new();
            for name in catalog_names() {
                let entry = build_example(name, &ExampleParams::default())?;
                rows.push(json!({
                    "name": entry.name,
                    "index": fmt_index(&entry.index),
                    "generators": entry.action.generator_names(),
                    "summary": entry.summary,
                    "facts": entry.facts.iter().map(|f| f.id).collect::<Vec<_>>(),
                }));
            }
            let mut text = String::new();
            for row in &rows {
                text.push_str(&format!(
                    "{:<10} {:<22} [{}]  {}\n",
                    row["name"].as_str().unwrap(),
                    row["index"].as_str().unwrap(),
                    row["generators"].as_array().unwrap().iter().map(|g| g.as_str().unwrap()).collect::<Vec<_>>().join(", "),
                    row["summary"].as_str().unwrap(),
                ));
            }
            emit.payload(text, json!({ "entries": rows }))
        }
        CatalogCmd::Facts { name, fact, arity, index } => {
            let entry = build(&ExampleArgs { example: name, arity, index })?;
            let reports = match fact {
                Some(id) => vec![entry.check_fact(&id, limits)?],
                None => entry.check_all_facts(limits)?,
            };
            let mut text = String::new();
            for r in &reports {
                text.push_str(&format!(
                    "[{}] {:<28} {}\n         {}\n",
                    if r.passed { "pass" } else { "FAIL" },
                    r.id,
                    r.description,
                    r.detail,
                ));
            }
            emit.payload(
                text,
                json!({
                    "example": entry.name,
                    "index": fmt_index(&entry.index),
                    "all_passed": reports.iter().all(|r| r.passed),
                    "facts": reports,
                }),
            )
        }
        CatalogCmd::Export { name, arity, index } => {
            let entry = build(&ExampleArgs { example: name, arity, index })?;
            let defs: Vec<Value> = entry
                .definitions
                .iter()
                .map(|(n, def)| Ok(json!({ "name": n, "definition": serde_json::to_value(def)? })))
                .collect::<Result<_, Error>>()?;
            let doc = json!({
                "example": entry.name,
                "index": entry.index,
                "generators": defs,
            });
            // The export is a JSON artifact either way.
            let mut pretty = serde_json::to_string_pretty(&doc)?;
            pretty.push('\n');
            emit.payload(pretty, doc)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn run_fixratio(
    example: ExampleArgs,
    gen: Option<String>,
    level: Option<usize>,
    vertex: Option<String>,
    k: Option<u32>,
    l: Option<usize>,
    probe: Option<usize>,
    limits: &Limits,
    emit: &Emit,
) -> Result<(), Error> {
    let entry = build(&example)?;
    // The branch-vertex sugar pins down the distinguished generator and a
    // probe window deep enough for an exact answer.
    let (gen, target, probe) = match (k, l) {
        (Some(k), None) => {
            if entry.name != "ex45_c" {
                return Err(Error::Unsupported(
                    "--k addresses the doubling branch vertices of 'ex45_c'".into(),
                ));
            }
            let v = cantor::catalog::doubling_graft_vertex(&entry.index, k)?;
            (gen.unwrap_or_else(|| "c".into()), Some(v), probe.unwrap_or((1 << k) + 2))
        }
        (None, Some(l)) => {
            if entry.name != "ex44_c" {
                return Err(Error::Unsupported(
                    "--l addresses the ladder branch vertices of 'ex44_c'".into(),
                ));
            }
            let v = cantor::catalog::ladder_graft_vertex(&entry.index, l)?;
            (gen.unwrap_or_else(|| "c".into()), Some(v), probe.unwrap_or(4))
        }
        _ => {
            let gen = gen.ok_or_else(|| {
                Error::Unsupported("pick a generator with --gen (or use --k / --l sugar)".into())
            })?;
            let target = match vertex {
                Some(s) => Some(Vertex::new(&entry.index, parse_digits(&s)?)?),
                None => None,
            };
            (gen, target, probe.unwrap_or(8))
        }
    };
    let g = generator(&entry, &gen)?;
    match (level, target) {
        (Some(level), None) => {
            let count = fixed_vertex_count(g, level, limits)?;
            let fixed_ratio = count.fixed_fraction();
            let nonfixed = count.nonfixed_fraction();
            emit.payload(
                format!(
                    "level {level}: {} of {} vertices fixed (fraction fixed {}, fraction moved {})\n",
                    count.fixed,
                    count.total,
                    fmt_ratio(&fixed_ratio),
                    fmt_ratio(&nonfixed),
                ),
                json!({
                    "example": entry.name,
                    "gen": gen,
                    "level": level,
                    "fixed": count.fixed.to_string(),
                    "total": count.total.to_string(),
                    "fixed_ratio": ratio_json(&fixed_ratio),
                    "nonfixed_ratio": ratio_json(&nonfixed),
                }),
            )
        }
        (None, Some(v)) => {
            let bound = moved_ratio_below(g, &v, probe, limits)?;
            emit.payload(
                format!(
                    "moved fraction below {v} (probe {probe}): {} {}\n",
                    fmt_bound_kind(&bound),
                    fmt_ratio(&bound.value),
                ),
                json!({
                    "example": entry.name,
                    "gen": gen,
                    "vertex": v,
                    "probe_depth": probe,
                    "kind": bound.kind,
                    "ratio": ratio_json(&bound.value),
                }),
            )
        }
        (None, None) => Err(Error::Unsupported(
            "pick a mode: --level L for a whole level, or --vertex V (or --k/--l) for a cylinder"
                .into(),
        )),
        (Some(_), Some(_)) => Err(Error::Unsupported(
            "--level and --vertex are alternatives, not a combination".into(),
        )),
    }
}

fn run_metric(action: MetricCmd, limits: &Limits, emit: &Emit) -> Result<(), Error> {
    match action {
        MetricCmd::Boundary { example, x, y } => {
            let entry = build(&example)?;
            let x = BoundaryPrefix::new(&entry.index, parse_digits(&x)?)?;
            let y = BoundaryPrefix::new(&entry.index, parse_digits(&y)?)?;
            let distance = boundary_metric(&x, &y);
            let text = match &distance {
                cantor::measure::BoundaryDistance::Resolved { distance, first_difference_level } => {
                    format!(
                        "{x} vs {y}: distance exactly {} (first difference at level {first_difference_level})\n",
                        fmt_ratio(distance),
                    )
                }
                cantor::measure::BoundaryDistance::IndistinguishableAtDepth { depth, bound } => {
                    format!(
                        "{x} vs {y}: all digits agree through depth {depth}; distance at most {}\n",
                        fmt_ratio(bound),
                    )
                }
            };
            let mut doc = serde_json::to_value(&distance)?;
            tag_example(&mut doc, &entry.name);
            emit.payload(text, doc)
        }
        MetricCmd::Schreier { example, level, level2, center, center2, radius, r_max } => {
            let entry = build(&example)?;
            let (a, b) = match (level, level2, center, center2) {
                (Some(l1), Some(l2), None, None) => (
                    schreier_level_graph(&entry.action, l1, None, limits)?,
                    schreier_level_graph(&entry.action, l2, None, limits)?,
                ),
                (None, None, Some(c1), Some(c2)) => {
                    let radius = radius.ok_or_else(|| {
                        Error::Unsupported("--center mode needs --radius".into())
                    })?;
                    let x = BoundaryPrefix::new(&entry.index, parse_digits(&c1)?)?;
                    let y = BoundaryPrefix::new(&entry.index, parse_digits(&c2)?)?;
                    (
                        stabilizer_schreier_ball(&entry.action, &x, radius, limits)?,
                        stabilizer_schreier_ball(&entry.action, &y, radius, limits)?,
                    )
                }
                _ => {
                    return Err(Error::Unsupported(
                        "pick one mode: --level L1 --level2 L2, or --center X --center2 Y --radius R"
                            .into(),
                    ))
                }
            };
            let distance = schreier_metric(&a, &b, r_max)?;
            let text = match &distance {
                cantor::graph::SchreierDistance::Resolved { distance, agreement_radius } => format!(
                    "distance exactly {}: pointed balls agree to radius {agreement_radius} and differ at {}\n",
                    fmt_ratio(distance),
                    agreement_radius + 1,
                ),
                cantor::graph::SchreierDistance::IndistinguishableAtRadius { radius, bound } => {
                    format!(
                        "pointed balls agree at every radius up to {radius}; distance at most {}\n",
                        fmt_ratio(bound),
                    )
                }
            };
            let mut doc = serde_json::to_value(&distance)?;
            tag_example(&mut doc, &entry.name);
            emit.payload(text, doc)
        }
    }
}

fn distinct_tree(
    entry: &CatalogEntry,
    n: usize,
    radius: usize,
    depth: usize,
    limits: &Limits,
) -> Result<(String, Value), Error> {
    let report = cantor::dynamics::distinct_stabilizer_tree(&entry.action, radius, depth, n, limits)?;
    let mut text = format!(
        "{} orbit points at depth {depth} with pairwise distinct radius-{radius} stabilizer sets ({})\n",
        report.points.len(),
        if report.verified { "all pairs separated" } else { "NOT fully verified" },
    );
    for (label, point) in report.labels.iter().zip(&report.points) {
        text.push_str(&format!("  {label}: {point}\n"));
    }
    text.push_str(&format!("{} separated pair(s) via {} split element(s)\n", report.pairs.len(), report.splits.len()));
    let mut doc = serde_json::to_value(&report)?;
    tag_example(&mut doc, &entry.name);
    Ok((text, doc))
}

// ---- argument parsing helpers ----

fn build(args: &ExampleArgs) -> Result<CatalogEntry, Error> {
    let index = match &args.index {
        Some(s) => Some(parse_index(s)?),
        None => None,
    };
    build_example(&args.example, &ExampleParams { arity: args.arity, index })
}

fn generator<'a>(
    entry: &'a CatalogEntry,
    name: &str,
) -> Result<&'a cantor::TreeAutomorphism, Error> {
    entry.generator(name).ok_or_else(|| {
        Error::InvalidElement(format!(
            "'{}' has no generator named '{name}' (it has: {})",
            entry.name,
            entry.action.generator_names().join(", "),
        ))
    })
}

/// Index syntax: a bare integer for a constant index, `geo:n1,n2,..:r` for a
/// geometric one, `ep:n1,n2,..:c1,c2,..` for an eventually periodic one.
fn parse_index(s: &str) -> Result<SphericalIndex, Error> {
    let s = s.trim();
    if let Ok(d) = s.parse::<u64>() {
        return SphericalIndex::constant(d);
    }
    let bad = || Error::Parse(format!("bad index '{s}' (want D, geo:n1,..:r, or ep:n1,..:c1,..)"));
    let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
    let (first, second) = rest.split_once(':').ok_or_else(bad)?;
    let list = |part: &str| -> Result<Vec<u64>, Error> {
        part.split(',')
            .map(|x| x.trim().parse::<u64>().map_err(|_| bad()))
            .collect()
    };
    match kind {
        "geo" => SphericalIndex::geometric(list(first)?, second.trim().parse().map_err(|_| bad())?),
        "ep" => SphericalIndex::eventually_periodic(list(first)?, list(second)?),
        _ => Err(bad()),
    }
}

/// A rational as `num/den`, or a bare integer.
fn parse_ratio(s: &str) -> Result<BigRational, Error> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad rational '{s}' (want num/den or an integer)"));
    match s.split_once('/') {
        Some((num, den)) => {
            let num = BigInt::from_str(num.trim()).map_err(|_| bad())?;
            let den = BigInt::from_str(den.trim()).map_err(|_| bad())?;
            if den == BigInt::from(0) {
                return Err(bad());
            }
            Ok(BigRational::new(num, den))
        }
        None => Ok(BigRational::from(BigInt::from_str(s).map_err(|_| bad())?)),
    }
}

fn parse_levels(s: &str) -> Result<Vec<usize>, Error> {
    s.split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad level '{part}' in '{s}'")))
        })
        .collect()
}

/// Word syntax: whitespace-separated generator names, `^-1` for inverses,
/// `e` for the identity. The rightmost letter applies first.
fn parse_word(action: &GeneratedAction, s: &str) -> Result<Vec<Letter>, Error> {
    let s = s.trim();
    if s.is_empty() || s == "e" {
        return Ok(vec![]);
    }
    s.split_whitespace()
        .map(|token| {
            let (name, inverse) = match token.strip_suffix("^-1") {
                Some(name) => (name, true),
                None => (token, false),
            };
            let gen = action
                .generator_names()
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| {
                    Error::InvalidElement(format!(
                        "unknown generator '{name}' (have: {})",
                        action.generator_names().join(", "),
                    ))
                })?;
            Ok(Letter { gen, inverse })
        })
        .collect()
}

fn enumerate_level(index: &SphericalIndex, level: usize) -> Result<Vec<Vec<u64>>, Error> {
    let mut out = vec![vec![]];
    for lvl in 1..=level {
        let arity = index.arity(lvl)?;
        let mut next = Vec::with_capacity(out.len() * arity as usize);
        for path in &out {
            for d in 0..arity {
                let mut p = path.clone();
                p.push(d);
                next.push(p);
            }
        }
        out = next;
    }
    Ok(out)
}

// ---- formatting helpers ----

fn fmt_ratio(r: &BigRational) -> String {
    if r.denom() == &BigInt::from(1) {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn ratio_json(r: &BigRational) -> Value {
    json!({ "num": r.numer().to_string(), "den": r.denom().to_string() })
}

fn fmt_bound_kind(bound: &cantor::dynamics::RatioBound) -> &'static str {
    match bound.kind {
        cantor::dynamics::BoundKind::Exact => "exactly",
        cantor::dynamics::BoundKind::AtLeast => "at least",
        cantor::dynamics::BoundKind::AtMost => "at most",
    }
}

fn fmt_index(index: &SphericalIndex) -> String {
    match index {
        SphericalIndex::EventuallyPeriodic { prefix, cycle } => {
            if prefix.is_empty() && cycle.len() == 1 {
                format!("constant {}", cycle[0])
            } else {
                format!("ep {prefix:?} then {cycle:?}")
            }
        }
        SphericalIndex::Geometric { prefix, ratio } => format!("geo {prefix:?} x{ratio}"),
    }
}

fn fmt_route(route: &CertificateRoute) -> String {
    match route {
        CertificateRoute::Vacuous { reason } => format!("vacuous bound ({reason})"),
        CertificateRoute::FreeAction => "a free action".into(),
        CertificateRoute::FinitaryExact { fixed_vertices_checked, depth } => format!(
            "an exact minimum over {fixed_vertices_checked} fixed vertices (finite element of depth {depth})",
        ),
        CertificateRoute::SectionClosure { arity, sections } => format!(
            "per-section moved-depth bounds over a {}-section closure on the {arity}-regular tree",
            sections.len(),
        ),
        CertificateRoute::UniformDepth { arity_bound, depth_bound, sections } => format!(
            "a uniform depth bound {depth_bound} over {} sections against arity bound {arity_bound}",
            sections.len(),
        ),
    }
}

fn fmt_trend(trend: &AtomicityTrend) -> String {
    match trend {
        AtomicityTrend::AtomCandidate { stabilized_at } => format!(
            "dominant class frequency stabilized at {} — consistent with an atom",
            fmt_ratio(stabilized_at),
        ),
        AtomicityTrend::NonAtomicTrend => {
            "dominant class frequency strictly decreasing — consistent with no atoms".into()
        }
        AtomicityTrend::Inconclusive => "inconclusive at these radii".into(),
    }
}

fn graph_summary(graph: &SchreierGraph) -> String {
    format!(
        "{:?}: {} vertices, {} labeled edges, basepoint {}\ncanonical hash {}\n",
        graph.kind,
        graph.vertex_labels.len(),
        graph.edges.len(),
        graph.vertex_labels[graph.basepoint],
        graph.canonical_hash(),
    )
}

fn graph_json(example: &str, graph: &SchreierGraph) -> Value {
    json!({
        "example": example,
        "graph": graph,
        "canonical_hash": graph.canonical_hash(),
    })
}

fn tag_example(doc: &mut Value, example: &str) {
    if let Value::Object(map) = doc {
        let mut tagged = serde_json::Map::with_capacity(map.len() + 1);
        tagged.insert("example".into(), Value::String(example.into()));
        tagged.extend(std::mem::take(map));
        *map = tagged;
    }
}
