//! Command-line front end: parse a system spec, run one analysis, emit
//! reports and graphics.
//!
//! Exit codes are scriptable: 0 for success or a positive verdict, 10 for
//! a negative verdict with a witness, 20 for inconclusive-by-ambiguity,
//! 30 for inconclusive-by-resource-limit, 2 for validation errors.

use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graph::{self, cycle_to_dot, DendriteOutcome, DendriteWitness, TreeCheck};
use crate::input::{parse_spec, SystemSpec};
use crate::intersection::{self, FiVerdict};
use crate::order;
use crate::report::{self, SvgScene};
use crate::slope::{self, ParamMatch};
use crate::word::Word;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 10;
pub const EXIT_INCONCLUSIVE: i32 = 20;
pub const EXIT_RESOURCE: i32 = 30;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "fractopo",
    about = "Topology analysis of planar self-similar sets",
    version
)]
pub struct Cli {
    /// Path to the system spec (JSON).
    #[arg(long, short)]
    pub spec: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Certify the finite-intersection property and list clusters.
    Fi {
        /// Final tolerance of the certification schedule.
        #[arg(long)]
        tol: Option<f64>,
        /// Write the cluster list as JSON here.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Build the level-n intersection graph.
    Graph {
        #[arg(long, default_value_t = 1)]
        level: usize,
        /// Write GraphViz DOT here (stdout when omitted).
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Decide the dendrite criterion.
    Dendrite {
        #[arg(long, default_value_t = 3)]
        max_level: usize,
        /// Write the cycle witness as DOT here when the verdict is negative.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Order analysis at a point or of a piece.
    Order {
        /// Point as "x,y".
        #[arg(long, conflicts_with = "piece")]
        point: Option<String>,
        /// Piece multiindex, e.g. "5" or "12".
        #[arg(long)]
        piece: Option<String>,
    },
    /// Window-constant estimate M_a.
    Zerner {
        #[arg(long)]
        a: f64,
        #[arg(long, default_value_t = 8)]
        depth: usize,
    },
    /// Slope parameters at a cluster or for a period word.
    Slope {
        /// Cluster index into the `fi` cluster list.
        #[arg(long, conflicts_with = "period")]
        cluster: Option<usize>,
        /// Period word: analyze arcs at fix(S_word).
        #[arg(long)]
        period: Option<String>,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
    },
    /// Render the attractor (and clusters) as SVG.
    Render {
        #[arg(long)]
        svg: PathBuf,
        #[arg(long)]
        eps: f64,
        /// Also dump the raw cover as a portable bitmap.
        #[arg(long)]
        pbm: Option<PathBuf>,
        /// Overlay the invariant arcs of this period word.
        #[arg(long)]
        period: Option<String>,
    },
    /// Full pipeline report as JSON.
    Report {
        #[arg(long)]
        json: PathBuf,
        #[arg(long, default_value_t = 2)]
        max_level: usize,
    },
}

/// Entry point for the binary: runs and exits with the scriptable code.
pub fn run() -> ! {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(classify_error(&e));
        }
    }
}

fn classify_error(e: &Error) -> i32 {
    match e {
        Error::Resource { .. } => EXIT_RESOURCE,
        Error::Inconclusive(_) => EXIT_INCONCLUSIVE,
        Error::Validation(_) | Error::LetterOutOfRange { .. } | Error::InvalidSystem(_) => {
            EXIT_USAGE
        }
        _ => 1,
    }
}

/// Run one command against a spec file and return the exit code.
pub fn execute(cli: &Cli) -> Result<i32> {
    let text = fs::read_to_string(&cli.spec)?;
    let spec = parse_spec(&text)?;
    let system = spec.to_system()?;

    match &cli.command {
        Command::Fi { tol, json } => {
            let tol = tol.unwrap_or_else(|| spec.fi_tol());
            let fi = intersection::fi_report(&system, tol)?;
            let summary = report::analyze_fi_only(&spec, &fi);
            println!("{}", summary.trim_end());
            if let Some(path) = json {
                fs::write(path, report_fi_json(&spec, &fi))?;
            }
            Ok(match fi.verdict {
                FiVerdict::Certified { .. } => EXIT_OK,
                FiVerdict::NotFi { .. } => EXIT_NEGATIVE,
                FiVerdict::Likely { .. } => EXIT_INCONCLUSIVE,
            })
        }
        Command::Graph { level, dot } => {
            let fi = intersection::fi_report(&system, spec.fi_tol())?;
            let g = graph::build_graph(&system, *level, &fi)?;
            let text = g.to_dot(&format!("gamma{level}"));
            match dot {
                Some(path) => fs::write(path, &text)?,
                None => print!("{text}"),
            }
            println!(
                "level {level}: {} pieces, {} intersection points, {} edges, {}",
                g.white_count(),
                g.black_count(),
                g.edge_count(),
                match graph::is_tree(&g) {
                    TreeCheck::Tree => "tree".to_string(),
                    TreeCheck::Disconnected => "disconnected".to_string(),
                    TreeCheck::NotTree(c) => format!("cycle of length {}", c.len()),
                }
            );
            Ok(EXIT_OK)
        }
        Command::Dendrite { max_level, dot } => {
            let fi = intersection::fi_report(&system, spec.fi_tol())?;
            let verdict = graph::dendrite_verdict_with_fi(&system, *max_level, &fi)?;
            match verdict.outcome {
                DendriteOutcome::Dendrite => {
                    println!(
                        "dendrite: intersection graphs are trees through level {}",
                        verdict.checked_levels
                    );
                    Ok(EXIT_OK)
                }
                DendriteOutcome::NotDendrite => {
                    if let Some(DendriteWitness::Cycle { level, vertices }) = &verdict.witness {
                        println!(
                            "not a dendrite: cycle of length {} in the level-{level} graph",
                            vertices.len()
                        );
                        let g = graph::build_graph(&system, *level, &fi)?;
                        let witness_dot = cycle_to_dot(&g, vertices);
                        match dot {
                            Some(path) => fs::write(path, &witness_dot)?,
                            None => print!("{witness_dot}"),
                        }
                    }
                    Ok(EXIT_NEGATIVE)
                }
                DendriteOutcome::Inconclusive => {
                    println!(
                        "inconclusive: {}",
                        verdict.note.as_deref().unwrap_or("no verdict")
                    );
                    Ok(EXIT_INCONCLUSIVE)
                }
            }
        }
        Command::Order { point, piece } => {
            let fi = intersection::fi_report(&system, spec.fi_tol())?;
            match (point, piece) {
                (Some(text), None) => {
                    let x = parse_point(text)?;
                    let report = order::order_report(&system, x, &fi, 1e-9)?;
                    println!("{}", serde_json::to_string_pretty(&report)?);
                    Ok(if report.inconsistencies.is_empty() {
                        EXIT_OK
                    } else {
                        EXIT_INCONCLUSIVE
                    })
                }
                (None, Some(text)) => {
                    let word = Word::parse(text)?;
                    let report = order::order_report_piece(&system, &word, &fi, 1e-9)?;
                    println!("{}", serde_json::to_string_pretty(&report)?);
                    Ok(if report.inconsistencies.is_empty() {
                        EXIT_OK
                    } else {
                        EXIT_INCONCLUSIVE
                    })
                }
                _ => Err(Error::Validation(
                    "order needs exactly one of --point or --piece".into(),
                )),
            }
        }
        Command::Zerner { a, depth } => {
            let estimate = order::zerner_constant(&system, *a, *depth)?;
            println!("{}", serde_json::to_string_pretty(&estimate)?);
            Ok(if estimate.stabilized {
                EXIT_OK
            } else {
                EXIT_INCONCLUSIVE
            })
        }
        Command::Slope {
            cluster,
            period,
            tol,
        } => match (cluster, period) {
            (Some(index), None) => {
                let fi = intersection::fi_report(&system, spec.fi_tol())?;
                let clusters = fi.merged_clusters();
                let cl = clusters.get(*index).ok_or_else(|| {
                    Error::Validation(format!(
                        "cluster {index} out of range (have {})",
                        clusters.len()
                    ))
                })?;
                let outcome = slope::parameter_match(&system, cl, *tol)?;
                print_param_match(&outcome)?;
                Ok(match outcome {
                    ParamMatch::Matched { .. } => EXIT_OK,
                    ParamMatch::Mismatched { .. } => EXIT_NEGATIVE,
                    ParamMatch::Inconclusive { .. } => EXIT_INCONCLUSIVE,
                })
            }
            (None, Some(text)) => {
                let word = Word::parse(text)?;
                let arms = slope::arcs_at_period(&system, &word, spec.arc_eps())?;
                let rows: Vec<report::SlopeArmJson> = arms
                    .iter()
                    .map(|(label, est)| report::SlopeArmJson {
                        arm: label.clone(),
                        lambda: est.lambda,
                        winding: est.winding,
                        delta_arg: est.delta_arg,
                        log_lip: est.log_lip,
                        residual: est.residual,
                    })
                    .collect();
                println!("{}", serde_json::to_string_pretty(&rows)?);
                Ok(EXIT_OK)
            }
            _ => Err(Error::Validation(
                "slope needs exactly one of --cluster or --period".into(),
            )),
        },
        Command::Render {
            svg,
            eps,
            pbm,
            period,
        } => {
            let mut scene = SvgScene::attractor(&system, *eps)?;
            if let Some(path) = pbm {
                fs::write(path, scene.covers[0].pbm_string())?;
            }
            let fi = intersection::fi_report(&system, spec.fi_tol())?;
            scene = scene.with_clusters(
                fi.merged_clusters()
                    .iter()
                    .map(|cl| (cl.center, cl.radius)),
            );
            if let Some(text) = period {
                let word = Word::parse(text)?;
                for (_, arc) in slope::arcs_with_labels(&system, &word, spec.arc_eps())? {
                    scene = scene.with_arc(&arc);
                }
            }
            fs::write(svg, scene.to_svg())?;
            println!("wrote {}", svg.display());
            Ok(EXIT_OK)
        }
        Command::Report { json, max_level } => {
            let analysis = report::analyze(&spec, *max_level)?;
            fs::write(json, report::to_json_string(&analysis))?;
            println!("wrote {}", json.display());
            Ok(EXIT_OK)
        }
    }
}

fn parse_point(text: &str) -> Result<Complex64> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(Error::Validation(format!("point must be \"x,y\", got {text:?}")));
    }
    let x: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| Error::Validation(format!("bad x coordinate {:?}", parts[0])))?;
    let y: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| Error::Validation(format!("bad y coordinate {:?}", parts[1])))?;
    Ok(Complex64::new(x, y))
}

fn print_param_match(outcome: &ParamMatch) -> Result<()> {
    match outcome {
        ParamMatch::Matched { lambda, arms } => {
            println!("matched: lambda = {lambda:.9} across {} arm(s)", arms.len());
            for (label, est) in arms {
                println!(
                    "  {label}: lambda {:.9}, winding {}, residual {:.6}",
                    est.lambda, est.winding, est.residual
                );
            }
        }
        ParamMatch::Mismatched { arms } => {
            println!("MISMATCH at certified input (diagnostic, not averaged):");
            for (label, est) in arms {
                println!(
                    "  {label}: lambda {:.9}, winding {}, residual {:.6}",
                    est.lambda, est.winding, est.residual
                );
            }
        }
        ParamMatch::Inconclusive { reason } => println!("inconclusive: {reason}"),
    }
    Ok(())
}

fn report_fi_json(spec: &SystemSpec, fi: &intersection::FiReport) -> String {
    let mut text = serde_json::to_string_pretty(&report::fi_json_value(spec, fi))
        .expect("fi serialization");
    text.push('\n');
    text
}
