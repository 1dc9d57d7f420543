//! Command-line dispatch: argument parsing, subcommands and exit codes.

use crate::complex3::{bundled, GluedComplex3};
use crate::fsym::{normalization_residual, tetrahedral_residual, verify_pentagon, FSymbolTable, RepData};
use crate::group::FiniteGroup;
use crate::kitaev::{self, GroundOptions, RankMethod};
use crate::lattice::{Honeycomb, Site};
use crate::report::RunReport;
use crate::ribbon::{self, RibbonOperator};
use crate::state::{algebra_residuals, Basis, StateVector, DEFAULT_BUDGET};
use crate::stringnet::{duality_compare_bp, OmegaData, PairSelection, StringNet, StringOperator, StringPath};
use crate::tv::{self, BoundaryWeights, CylinderComplex};
use crate::{Error, Result, C64};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use std::time::Instant;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "topoforge", version, about = "Lattice gauge models and state sums for finite groups")]
pub struct Cli {
    /// Print one JSON object instead of `key = value` lines.
    #[arg(long, global = true)]
    pub json: bool,
    /// Worker threads for parallel reductions.
    #[arg(long, global = true, env = "TOPOFORGE_THREADS")]
    pub threads: Option<usize>,
    /// Threshold for pass/fail checks.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tolerance: f64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GroupArg {
    /// One of Z<n>, S3, D4.
    #[arg(long)]
    pub group: String,
}

#[derive(Args, Debug, Clone)]
pub struct LatticeArgs {
    /// Torus size as `L1xL2`.
    #[arg(long, alias = "lattice", default_value = "2x2")]
    pub torus: String,
    /// Seed for sampled pairs, random states and random ribbons
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Group table, conjugacy classes, irreps and anyon count.
    Group {
        #[command(flatten)]
        g: GroupArg,
    },
    /// F-symbol table and its consistency checks.
    Fsym {
        #[command(flatten)]
        g: GroupArg,
        #[arg(long)]
        check_pentagon: bool,
        /// Print every nonzero entry.
        #[arg(long)]
        dump: bool,
        /// Add this real amount to one generic entry before checking.
        #[arg(long)]
        corrupt: Option<f64>,
    },
    /// Quantum double model: ground-space dimension and constraint algebra.
    Kitaev {
        #[command(flatten)]
        g: GroupArg,
        #[command(flatten)]
        lat: LatticeArgs,
        /// Ground-space dimension against the anyon count (default when no check is named).
        #[arg(long)]
        ground_dim: bool,
        /// Largest basis dimension handled by the direct trace
        #[arg(long, default_value_t = DEFAULT_BUDGET as u64)]
        budget: u64,
        /// Fall back to a randomized rank estimate when the budget is exceeded.
        #[arg(long)]
        randomized: bool,
        /// Check commutators, idempotence and adjoints of A(v), B_1(p).
        #[arg(long)]
        check_constraints: bool,
        /// Basis states for the constraint check; 0 means all.
        #[arg(long, default_value_t = 0)]
        samples: usize,
    },
    /// String-net model: plaquette projector algebra and string operators.
    Stringnet {
        #[command(flatten)]
        g: GroupArg,
        #[command(flatten)]
        lat: LatticeArgs,
        /// Compare the Fourier-side B_1(p) with the F-symbol operator on every plaquette.
        #[arg(long)]
        check_duality: bool,
        /// Sampled pairs per plaquette for the duality check; 0 means exhaustive.
        #[arg(long, default_value_t = 0)]
        samples: usize,
        /// Check commutators, idempotence and adjoints of the B_p (default when no check is named).
        #[arg(long)]
        check_projectors: bool,
        /// Random admissible basis states for the projector check.
        #[arg(long, default_value_t = 40)]
        states: usize,
        /// Vertex sequence of a string path, comma separated.
        #[arg(long, conflicts_with = "loop_plaquette")]
        path: Option<String>,
        /// Use the clockwise boundary of this plaquette as the string path.
        #[arg(long = "loop")]
        loop_plaquette: Option<usize>,
        /// String types, comma separated.
        #[arg(long, default_value = "1")]
        types: String,
        /// File with Ω matrices; 1×1 identities when absent.
        #[arg(long)]
        omega: Option<String>,
        /// Matrix entry `row,col` kept on open paths.
        #[arg(long, default_value = "0,0")]
        endpoint: String,
    },
    /// Ribbon operators: closed-ribbon identity and endpoint locality.
    Ribbon {
        #[command(flatten)]
        g: GroupArg,
        #[command(flatten)]
        lat: LatticeArgs,
        /// Sites `plaquette:vertex`, comma separated.
        #[arg(long)]
        path: Option<String>,
        /// Ribbon labels `h,g`.
        #[arg(long, default_value = "1,0")]
        pair: String,
        /// Apply the ribbon to a ground state and locate the excitations.
        #[arg(long)]
        check_endpoints: bool,
        /// Closed-ribbon identity around `--plaquette` (default when nothing else is requested).
        #[arg(long)]
        check_closed: bool,
        #[arg(long, default_value_t = 0)]
        plaquette: usize,
        /// Group element of the closed ribbon.
        #[arg(long, default_value_t = 0)]
        flux: usize,
        /// Sampled pairs for the identity check; 0 means exhaustive.
        #[arg(long, default_value_t = 0)]
        samples: usize,
        /// Number of random open ribbons for the locality check.
        #[arg(long, default_value_t = 0)]
        random: usize,
        /// Triangles per random ribbon.
        #[arg(long, default_value_t = 5)]
        length: usize,
    },
    /// Turaev-Viro state sum of a closed or colored complex.
    Tv {
        #[command(flatten)]
        g: GroupArg,
        /// Path to a complex, or a bundled name.
        #[arg(long)]
        complex: String,
        /// File of `color <t>.<a><b> <label>` lines overriding the complex's own.
        #[arg(long)]
        boundary: Option<String>,
        /// Largest number of label assignments the sum may visit
        #[arg(long, default_value_t = tv::TV_BUDGET as u64)]
        budget: u64,
        /// Boundary weighting: signed half-edge factors, or the vertex-edge rule
        #[arg(long, value_enum, default_value_t = WeightsArg::HalfEdge)]
        weights: WeightsArg,
    },
    /// Dijkgraaf-Witten count of flat colorings.
    Dw {
        #[command(flatten)]
        g: GroupArg,
        #[arg(long)]
        complex: String,
        /// Largest number of group colorings to enumerate
        #[arg(long, default_value_t = tv::DW_BUDGET as u64)]
        budget: u64,
        /// Also evaluate the state sum and compare.
        #[arg(long)]
        check_tv: bool,
    },
    /// Plaquette projector against cylinder amplitudes.
    CylinderCheck {
        #[command(flatten)]
        g: GroupArg,
        #[command(flatten)]
        lat: LatticeArgs,
        /// Plaquette order, comma separated; repeat for several orders.
        #[arg(long)]
        order: Vec<String>,
        /// Sampled pairs; 0 means exhaustive.
        #[arg(long, default_value_t = 0)]
        samples: usize,
        /// Twist one interior face gluing before comparing.
        #[arg(long)]
        corrupt_gluing: Option<usize>,
    },
    /// Fourier-side B_1(p) against the F-symbol plaquette operator.
    Duality {
        #[command(flatten)]
        g: GroupArg,
        #[command(flatten)]
        lat: LatticeArgs,
        #[arg(long, default_value_t = 0)]
        plaquette: usize,
        /// Sampled pairs; 0 means exhaustive.
        #[arg(long, default_value_t = 0)]
        samples: usize,
        #[arg(long)]
        corrupt: Option<f64>,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightsArg {
    HalfEdge,
    VertexEdge,
}

/// Exit code and the text written to standard output and standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn error_code(e: &Error) -> i32 {
    match e {
        Error::BudgetExceeded { .. } => EXIT_BUDGET,
        Error::UnknownGroup(_) | Error::InvalidParameter(_) | Error::Parse { .. } => EXIT_USAGE,
        _ => EXIT_FAIL,
    }
}

pub fn dispatch<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let text = e.render().to_string();
            return if code == EXIT_PASS {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    if let Some(n) = cli.threads {
        // the global pool can only be set once per process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let start = Instant::now();
    match run(&cli) {
        Ok(mut r) => {
            r.wall_time = start.elapsed().as_secs_f64();
            let stdout = if cli.json {
                format!("{}\n", r.to_json())
            } else {
                r.to_text()
            };
            Outcome {
                code: if r.passed() { EXIT_PASS } else { EXIT_FAIL },
                stdout,
                stderr: String::new(),
            }
        }
        Err(e) => Outcome {
            code: error_code(&e),
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}

fn parse_list(s: &str, what: &str) -> Result<Vec<usize>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse().map_err(|_| Error::InvalidParameter(format!("bad {what} entry '{t}'"))))
        .collect()
}

fn parse_lattice(s: &str) -> Result<Honeycomb> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| Error::InvalidParameter(format!("lattice '{s}' is not L1xL2")))?;
    let l1 = a.trim().parse().map_err(|_| Error::InvalidParameter(format!("bad lattice size '{a}'")))?;
    let l2 = b.trim().parse().map_err(|_| Error::InvalidParameter(format!("bad lattice size '{b}'")))?;
    Honeycomb::torus(l1, l2)
}

fn load_complex(name: &str) -> Result<GluedComplex3> {
    match std::fs::read_to_string(name) {
        Ok(text) => GluedComplex3::parse(&text),
        Err(e) => match bundled(std::path::Path::new(name).file_name().and_then(|f| f.to_str()).unwrap_or(name)) {
            Some(text) => GluedComplex3::parse(text),
            None => Err(Error::InvalidParameter(format!("cannot read complex '{name}': {e}"))),
        },
    }
}

fn read_file(path: &str) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::InvalidParameter(format!("cannot read '{path}': {e}")))
}

fn selection(samples: usize, seed: u64) -> PairSelection {
    if samples == 0 {
        PairSelection::Exhaustive
    } else {
        PairSelection::Sampled { count: samples, seed }
    }
}

fn table(data: &RepData, corrupt: Option<f64>) -> FSymbolTable {
    match corrupt {
        Some(d) => data.f.corrupted(data.f.generic_entry(), C64::new(d, 0.0)),
        None => data.f.clone(),
    }
}

fn run(cli: &Cli) -> Result<RunReport> {
    let tol = cli.tolerance;
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    match &cli.command {
        Command::Group { g } => run_group(&g.group),
        Command::Fsym {
            g,
            check_pentagon,
            dump,
            corrupt,
        } => run_fsym(&g.group, *check_pentagon, *dump, *corrupt, tol),
        Command::Kitaev {
            g,
            lat,
            ground_dim,
            budget,
            randomized,
            check_constraints,
            samples,
        } => {
            let group = FiniteGroup::build(&g.group)?;
            let h = parse_lattice(&lat.torus)?;
            let mut r = RunReport::new("kitaev");
            r.param("group", group.name());
            r.param("torus", lat.torus.as_str());
            r.param("budget", *budget);
            r.param("randomized", *randomized);
            let opts = GroundOptions {
                budget: *budget as u128,
                randomized: *randomized,
                seed: lat.seed,
            };
            let oracle = group.commuting_pair_orbit_count();
            r.exact("anyon_count", oracle);
            if *ground_dim || !*check_constraints {
                let gd = kitaev::ground_space_dimension(&group, &h, opts)?;
                r.exact("ground_dimension", gd.dimension);
                r.float("ground_trace", gd.raw, tol);
                r.exact(
                    "method",
                    match gd.method {
                        RankMethod::Trace => "trace",
                        RankMethod::Randomized { .. } => "randomized",
                    },
                );
                // the anyon count is the torus degeneracy
                r.check_equal("ground_dimension_matches_anyons", gd.dimension as f64, oracle as f64);
            }
            if *check_constraints {
                let sel = if *samples == 0 { None } else { Some((*samples, lat.seed)) };
                let a = kitaev::constraint_algebra(&group, &h, sel, *budget as u128)?;
                r.exact("constraint_states", a.states);
                r.check_below("commutator", a.commutator, tol);
                r.check_below("idempotence", a.idempotence, tol);
                r.check_below("self_adjoint", a.adjoint, tol);
            }
            Ok(r)
        }
        Command::Stringnet {
            g,
            lat,
            check_duality,
            samples,
            check_projectors,
            states,
            path,
            loop_plaquette,
            types,
            omega,
            endpoint,
        } => {
            let checks = StringnetChecks {
                duality: *check_duality,
                samples: *samples,
                projectors: *check_projectors || !(*check_duality || path.is_some() || loop_plaquette.is_some()),
                states: *states,
            };
            run_stringnet(&g.group, lat, checks, path.as_deref(), *loop_plaquette, types, omega.as_deref(), endpoint, tol)
        }
        Command::Ribbon {
            g,
            lat,
            path,
            pair,
            check_endpoints,
            check_closed,
            plaquette,
            flux,
            samples,
            random,
            length,
        } => {
            let opts = RibbonArgs {
                path: path.as_deref(),
                pair,
                check_endpoints: *check_endpoints,
                check_closed: *check_closed || (path.is_none() && *random == 0),
                plaquette: *plaquette,
                flux: *flux,
                samples: *samples,
                random: *random,
                length: *length,
            };
            run_ribbon(&g.group, lat, &opts, tol)
        }
        Command::Tv {
            g,
            complex,
            boundary,
            budget,
            weights,
        } => {
            let data = RepData::build(&g.group)?;
            let mut cx = load_complex(complex)?;
            if let Some(file) = boundary {
                cx = cx.with_boundary_text(&read_file(file)?)?;
            }
            let mut r = RunReport::new("tv");
            r.param("group", g.group.as_str());
            r.param("complex", complex.as_str());
            r.param("budget", *budget);
            r.exact("tetrahedra", cx.num_tets());
            r.exact("vertices", cx.num_vertices);
            r.exact("edges", cx.num_edges);
            r.exact("orientable", cx.orientable);
            let z = if cx.is_closed() {
                tv::tv_closed(&cx, &data, &data.f, *budget as u128)?
            } else {
                let w = match weights {
                    WeightsArg::HalfEdge => BoundaryWeights::HalfEdge,
                    WeightsArg::VertexEdge => BoundaryWeights::VertexEdge,
                };
                r.param("weights", format!("{w:?}"));
                let col = tv::coloring_from_file(&cx, &data)?;
                tv::tv_boundary(&cx, &data, &data.f, &col, w, *budget as u128)?
            };
            r.float("Z", z.value.re, tol);
            r.float("Z_imag", z.value.im, tol);
            r.exact("nonzero_terms", z.terms);
            Ok(r)
        }
        Command::Dw {
            g,
            complex,
            budget,
            check_tv,
        } => {
            let data = RepData::build(&g.group)?;
            let cx = load_complex(complex)?;
            let mut r = RunReport::new("dw");
            r.param("group", g.group.as_str());
            r.param("complex", complex.as_str());
            r.param("budget", *budget);
            let z = tv::dw_value(&cx, &data.group, *budget as u128)?;
            r.float("Z", z, tol);
            if *check_tv {
                let t = tv::tv_closed(&cx, &data, &data.f, tv::TV_BUDGET)?;
                r.float("Z_tv", t.value.re, tol);
                r.check_below("tv_equals_dw", (t.value - C64::new(z, 0.0)).norm(), tol);
            }
            Ok(r)
        }
        Command::CylinderCheck {
            g,
            lat,
            order,
            samples,
            corrupt_gluing,
        } => {
            let data = RepData::build(&g.group)?;
            let h = parse_lattice(&lat.torus)?;
            let np = h.num_plaquettes();
            let orders: Vec<Vec<usize>> = if order.is_empty() {
                vec![(0..np).collect(), (0..np).rev().collect()]
            } else {
                order.iter().map(|o| parse_list(o, "order")).collect::<Result<_>>()?
            };
            let mut r = RunReport::new("cylinder-check");
            r.param("group", g.group.as_str());
            r.param("torus", lat.torus.as_str());
            r.param("orders", orders.iter().map(|o| json!(o)).collect::<Vec<_>>());
            r.param("samples", *samples);
            let mut cyls = orders
                .iter()
                .map(|o| tv::build_cylinder_complex(&h, o, 1))
                .collect::<Result<Vec<CylinderComplex>>>()?;
            if let Some(k) = corrupt_gluing {
                r.param("corrupt_gluing", *k);
                cyls = cyls.iter().map(|c| c.corrupted(*k)).collect::<Result<_>>()?;
            }
            let sn = StringNet::new(&data, &h)?;
            let sel = if *samples == 0 { None } else { Some((*samples, lat.seed)) };
            let cmp = tv::compare_projector(&sn, &cyls, BoundaryWeights::HalfEdge, sel)?;
            r.exact("tetrahedra", cyls[0].complex.num_tets());
            r.exact("pairs", cmp.pairs);
            r.exact("nonzero_pairs", cmp.nonzero);
            r.float("deviation", cmp.deviation, tol);
            r.float("order_spread", cmp.order_spread, tol);
            r.check_below("projector_equals_cylinder", cmp.deviation, tol);
            r.check_below("order_independence", cmp.order_spread, tol);
            Ok(r)
        }
        Command::Duality {
            g,
            lat,
            plaquette,
            samples,
            corrupt,
        } => {
            let data = RepData::build(&g.group)?;
            let h = parse_lattice(&lat.torus)?;
            if *plaquette >= h.num_plaquettes() {
                return Err(Error::InvalidParameter(format!("plaquette {plaquette} out of range")));
            }
            let f = table(&data, *corrupt);
            let mut r = RunReport::new("duality");
            r.param("group", g.group.as_str());
            r.param("torus", lat.torus.as_str());
            r.param("plaquette", *plaquette);
            r.param("samples", *samples);
            if let Some(d) = corrupt {
                r.param("corrupt", *d);
            }
            let sn = StringNet::with_table(&data, &f, &h)?;
            let dev = duality_compare_bp(&sn, *plaquette, selection(*samples, lat.seed));
            r.float("deviation", dev, tol);
            r.check_below("fourier_equals_six_j", dev, tol);
            Ok(r)
        }
    }
}

fn run_group(name: &str) -> Result<RunReport> {
    let data = RepData::build(name)?;
    let g = &data.group;
    let mut r = RunReport::new("group");
    r.param("group", name);
    r.exact("order", g.order());
    r.exact("abelian", g.is_abelian());
    r.exact("classes", g.conjugacy_classes().len());
    r.exact("irrep_dims", data.irreps.iter().map(|i| i.dim).collect::<Vec<_>>());
    r.exact("anyon_count", g.commuting_pair_orbit_count());
    r.check_equal("associative", g.is_associative() as u8 as f64, 1.0);
    let sum_sq: usize = data.irreps.iter().map(|i| i.dim * i.dim).sum();
    r.check_equal("dimension_sum", sum_sq as f64, g.order() as f64);
    let mut hom: f64 = 0.0;
    for irr in &data.irreps {
        for a in 0..g.order() {
            for b in 0..g.order() {
                let prod = &irr.matrices[a] * &irr.matrices[b];
                hom = hom.max(prod.max_abs_diff(&irr.matrices[g.mul(a, b)]));
            }
        }
    }
    r.check_below("irrep_homomorphism", hom, 1e-12);
    Ok(r)
}

fn run_fsym(name: &str, pentagon: bool, dump: bool, corrupt: Option<f64>, tol: f64) -> Result<RunReport> {
    let data = RepData::build(name)?;
    let f = table(&data, corrupt);
    let mut r = RunReport::new("fsym");
    r.param("group", name);
    if let Some(d) = corrupt {
        r.param("corrupt", d);
        r.param("corrupt_entry", f.generic_entry().to_vec());
    }
    r.exact("rank", f.rank());
    r.exact("kappa", data.kappa.iter().map(|&k| k as i64).collect::<Vec<_>>());
    if pentagon {
        let p = verify_pentagon(&f);
        r.float("pentagon_residual", p, tol);
        r.check_below("pentagon", p, tol);
    }
    let t = tetrahedral_residual(&f);
    let n = normalization_residual(&f);
    r.float("tetrahedral_residual", t, tol);
    r.float("normalization_residual", n, tol);
    r.check_below("tetrahedral", t, tol);
    r.check_below("normalization", n, tol);
    if dump {
        let k = f.rank();
        let mut count = 0;
        for idx in 0..k.pow(6) {
            let mut x = idx;
            let l: Vec<usize> = (0..6)
                .map(|_| {
                    let d = x % k;
                    x /= k;
                    d
                })
                .rev()
                .collect();
            let v = f.get(l[0], l[1], l[2], l[3], l[4], l[5]);
            if v.norm() > 1e-12 {
                count += 1;
                let key = format!("F[{},{},{},{},{},{}]", l[0], l[1], l[2], l[3], l[4], l[5]);
                r.exact(&key, vec![json!(v.re), json!(v.im)]);
            }
        }
        r.exact("nonzero_entries", count);
    }
    Ok(r)
}

struct StringnetChecks {
    duality: bool,
    samples: usize,
    projectors: bool,
    states: usize,
}

#[allow(clippy::too_many_arguments)]
fn run_stringnet(
    name: &str,
    lat: &LatticeArgs,
    checks: StringnetChecks,
    path: Option<&str>,
    loop_plaquette: Option<usize>,
    types: &str,
    omega: Option<&str>,
    endpoint: &str,
    tol: f64,
) -> Result<RunReport> {
    let data = RepData::build(name)?;
    let h = parse_lattice(&lat.torus)?;
    let sn = StringNet::new(&data, &h)?;
    let mut r = RunReport::new("stringnet");
    r.param("group", name);
    r.param("torus", lat.torus.as_str());
    let cols = sn.admissible_colorings();
    r.exact("admissible_colorings", cols.len());
    if checks.duality {
        r.param("samples", checks.samples);
        let dev = (0..h.num_plaquettes())
            .map(|p| duality_compare_bp(&sn, p, selection(checks.samples, lat.seed + p as u64)))
            .fold(0.0, f64::max);
        r.float("duality_deviation", dev, tol);
        r.check_below("fourier_equals_six_j", dev, tol);
    }
    if checks.projectors {
        r.param("states", checks.states);
        let mut rng = ChaCha8Rng::seed_from_u64(lat.seed);
        let keys: Vec<u128> = (0..checks.states)
            .map(|_| sn.pk.encode(cols.choose(&mut rng).unwrap()))
            .collect();
        let ops: Vec<Box<dyn Fn(&StateVector) -> StateVector + Sync>> = (0..h.num_plaquettes())
            .map(|p| {
                let sn = &sn;
                Box::new(move |s: &StateVector| sn.apply_bp(p, s)) as Box<dyn Fn(&StateVector) -> StateVector + Sync>
            })
            .collect();
        let a = algebra_residuals(&ops, Basis::Spin, &keys);
        r.check_below("bp_commutator", a.commutator, tol);
        r.check_below("bp_idempotence", a.idempotence, tol);
        r.check_below("bp_self_adjoint", a.adjoint, tol);
    }
    let sp = match (path, loop_plaquette) {
        (Some(path), _) => {
            let verts = parse_list(path, "path")?;
            r.param("path", verts.clone());
            Some(StringPath::from_vertices(&h, &verts)?)
        }
        (None, Some(p)) if p < h.num_plaquettes() => {
            r.param("loop", p);
            Some(StringPath::plaquette_cw(&h, p))
        }
        (None, Some(p)) => return Err(Error::InvalidParameter(format!("plaquette {p} out of range"))),
        (None, None) => None,
    };
    if let Some(sp) = sp {
        let types = parse_list(types, "types")?;
        if types.iter().any(|&t| t >= data.rank()) {
            return Err(Error::InvalidParameter("string type out of range".into()));
        }
        let om = match omega {
            Some(file) => {
                OmegaData::parse(&read_file(file)?, data.rank())?
            }
            None => OmegaData::identity(data.rank(), 1),
        };
        let ep = parse_list(endpoint, "endpoint")?;
        if ep.len() != 2 {
            return Err(Error::InvalidParameter("endpoint must be row,col".into()));
        }
        let closed = sp.is_closed(&h);
        let op = StringOperator {
            path: sp,
            types,
            omega: &om,
            endpoint: (ep[0], ep[1]),
        };
        let vac = StateVector::basis_state(Basis::Spin, sn.pk.encode(&vec![0; h.num_edges()]));
        let out = sn.apply_string_operator(&op, &vac)?;
        r.exact("closed_path", closed);
        r.float("string_norm", out.norm(), tol);
        r.exact("string_terms", out.amps.len());
        let bad = sn.vertex_violations(&out);
        r.exact("vertex_violations", bad.len());
        if closed {
            r.check_equal("closed_string_admissible", bad.len() as f64, 0.0);
        }
    }
    Ok(r)
}

struct RibbonArgs<'a> {
    path: Option<&'a str>,
    pair: &'a str,
    check_endpoints: bool,
    check_closed: bool,
    plaquette: usize,
    flux: usize,
    samples: usize,
    random: usize,
    length: usize,
}

fn parse_sites(s: &str) -> Result<Vec<Site>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            let bad = || Error::InvalidParameter(format!("bad site '{t}', expected plaquette:vertex"));
            let (p, v) = t.trim().split_once(':').ok_or_else(bad)?;
            Ok(Site::new(p.parse().map_err(|_| bad())?, v.parse().map_err(|_| bad())?))
        })
        .collect()
}

fn run_ribbon(name: &str, lat: &LatticeArgs, o: &RibbonArgs, tol: f64) -> Result<RunReport> {
    let data = RepData::build(name)?;
    let h = parse_lattice(&lat.torus)?;
    let mut r = RunReport::new("ribbon");
    r.param("group", name);
    r.param("torus", lat.torus.as_str());
    if o.check_closed {
        if o.plaquette >= h.num_plaquettes() || o.flux >= data.order() {
            return Err(Error::InvalidParameter("plaquette or flux out of range".into()));
        }
        r.param("plaquette", o.plaquette);
        r.param("flux", o.flux);
        r.param("samples", o.samples);
        let sn = StringNet::new(&data, &h)?;
        let dev = ribbon::closed_ribbon_identity_check(&sn, o.plaquette, o.flux, selection(o.samples, lat.seed))?;
        r.float("closed_ribbon_deviation", dev, tol);
        r.check_below("closed_ribbon_identity", dev, tol);
    }
    if o.path.is_none() && o.random == 0 {
        return Ok(r);
    }
    let (pk, gs) = ribbon::ground_setup(&data, &h)?;
    if let Some(path) = o.path {
        let sites = parse_sites(path)?;
        let hg = parse_list(o.pair, "pair")?;
        if hg.len() != 2 || hg.iter().any(|&x| x >= data.order()) {
            return Err(Error::InvalidParameter(format!("pair '{}' must be two group elements", o.pair)));
        }
        r.param("path", path);
        r.param("pair", hg.clone());
        let op = RibbonOperator::new(h.ribbon_strip(&sites)?, hg[0], hg[1])?;
        r.exact("triangles", op.strip.len());
        r.exact("closed", op.strip.is_closed());
        if o.check_endpoints {
            let rep = ribbon::endpoint_locality_check(&data.group, &h, &pk, &op, &gs)?;
            r.exact("excited_vertices", rep.excitations.vertices.clone());
            r.exact("excited_plaquettes", rep.excitations.plaquettes.clone());
            r.check_equal("excitations_at_endpoints", rep.passed as u8 as f64, 1.0);
        } else {
            let out = ribbon::apply(&data.group, &h, &pk, &op, &gs);
            r.float("image_norm", out.norm(), tol);
        }
    }
    if o.random > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(lat.seed);
        let mut failures = 0usize;
        for _ in 0..o.random {
            let strip = ribbon::random_open_strip(&h, o.length, &mut rng)?;
            let hh = rng.gen_range(1..data.order());
            let mut order: Vec<usize> = (0..data.order()).collect();
            order.shuffle(&mut rng);
            let mut ok = false;
            for gg in order {
                let op = RibbonOperator::new(strip.clone(), hh, gg)?;
                match ribbon::endpoint_locality_check(&data.group, &h, &pk, &op, &gs) {
                    Ok(rep) => {
                        ok = rep.passed && !rep.excitations.is_empty();
                        break;
                    }
                    Err(Error::ZeroResult) => continue,
                    Err(e) => return Err(e),
                }
            }
            if !ok {
                failures += 1;
            }
        }
        r.param("random", o.random);
        r.param("length", o.length);
        r.exact("locality_failures", failures);
        r.check_equal("endpoint_locality", failures as f64, 0.0);
    }
    Ok(r)
}
