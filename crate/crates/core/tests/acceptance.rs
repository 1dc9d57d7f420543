//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;
use topoforge::complex3::{bundled, GluedComplex3, BUNDLED};
use topoforge::fsym::{verify_pentagon, FSymbolTable, RepData};
use topoforge::group::FiniteGroup;
use topoforge::kitaev::{self, GroundOptions};
use topoforge::lattice::{Honeycomb, TrivalentGraph};
use topoforge::ribbon::{self, RibbonOperator};
use topoforge::state::{admissible_colorings, gauge_residual, to_group_basis, to_spin_basis, Basis, Packing, StateVector, DEFAULT_BUDGET};
use topoforge::stringnet::{duality_compare_bp, PairSelection, StringNet};
use topoforge::tv::{self, BoundaryWeights};
use topoforge::{Error, C64};

const GROUPS: [&str; 5] = ["Z2", "Z3", "Z4", "S3", "D4"];

struct Outcome {
    passed: bool,
    detail: String,
}

fn torus() -> Honeycomb {
    Honeycomb::torus(2, 2).unwrap()
}

fn closed(name: &str) -> GluedComplex3 {
    GluedComplex3::parse(bundled(name).unwrap()).unwrap()
}

fn pentagon_suite(tables: &[(&str, FSymbolTable)]) -> (bool, f64, f64) {
    let mut worst: f64 = 0.0;
    let mut slowest: f64 = 0.0;
    for (_, f) in tables {
        let t = Instant::now();
        worst = worst.max(verify_pentagon(f));
        slowest = slowest.max(t.elapsed().as_secs_f64());
    }
    (worst < 1e-9 && slowest < 10.0, worst, slowest)
}

fn c1() -> Outcome {
    let tables: Vec<(&str, FSymbolTable)> = GROUPS.iter().map(|g| (*g, RepData::build(g).unwrap().f)).collect();
    let (passed, worst, slowest) = pentagon_suite(&tables);
    Outcome {
        passed,
        detail: format!("max residual {worst:.2e} over {GROUPS:?}, slowest {slowest:.2}s"),
    }
}

fn c2() -> Outcome {
    let lat = torus();
    let mut worst: f64 = 0.0;
    let mut states = 0;
    for g in ["Z2", "Z3"] {
        let group = FiniteGroup::build(g).unwrap();
        let r = kitaev::constraint_algebra(&group, &lat, None, DEFAULT_BUDGET).unwrap();
        worst = worst.max(r.commutator).max(r.idempotence).max(r.adjoint);
        states += r.states;
    }
    Outcome {
        passed: worst < 1e-12,
        detail: format!("max residual {worst:.2e} on all {states} basis columns of Z2 and Z3"),
    }
}

fn c3() -> Outcome {
    let lat = torus();
    let mut ok = true;
    let mut parts = Vec::new();
    for (g, want) in [("Z2", 4), ("Z3", 9)] {
        let group = FiniteGroup::build(g).unwrap();
        let d = kitaev::ground_space_dimension(&group, &lat, GroundOptions::default()).unwrap();
        let orbits = group.commuting_pair_orbit_count();
        ok &= d.dimension == want && orbits == want;
        parts.push(format!("{g} dim {} orbits {orbits}", d.dimension));
    }
    let s3 = FiniteGroup::build("S3").unwrap();
    let orbits = s3.commuting_pair_orbit_count();
    let gated = matches!(
        kitaev::ground_space_dimension(&s3, &lat, GroundOptions::default()),
        Err(Error::BudgetExceeded { .. })
    );
    ok &= orbits == 8 && gated;
    parts.push(format!("S3 orbits {orbits}, direct trace gated: {gated}"));
    Outcome {
        passed: ok,
        detail: parts.join("; "),
    }
}

fn duality_deviation(f: &FSymbolTable, z2: &RepData, s3: &RepData) -> (f64, f64) {
    let lat = torus();
    let sn = StringNet::with_table(z2, f, &lat).unwrap();
    let mut dz2: f64 = 0.0;
    if f.rank() == 2 {
        for p in 0..lat.num_plaquettes() {
            dz2 = dz2.max(duality_compare_bp(&sn, p, PairSelection::Exhaustive));
        }
    }
    let sn = StringNet::with_table(s3, if f.rank() == 3 { f } else { &s3.f }, &lat).unwrap();
    let ds3 = duality_compare_bp(&sn, 0, PairSelection::Sampled { count: 200, seed: 4 });
    (dz2, ds3)
}

fn c4() -> Outcome {
    let z2 = RepData::build("Z2").unwrap();
    let s3 = RepData::build("S3").unwrap();
    let (dz2, ds3) = duality_deviation(&z2.f, &z2, &s3);
    Outcome {
        passed: dz2 < 1e-9 && ds3 < 1e-8,
        detail: format!("Z2 exhaustive {dz2:.2e}, S3 200 sampled pairs {ds3:.2e}"),
    }
}

fn c5() -> Outcome {
    let lat = torus();
    let d = RepData::build("Z2").unwrap();
    let sn = StringNet::new(&d, &lat).unwrap();
    let cyls: Vec<_> = [[0, 1, 2, 3], [2, 0, 3, 1]]
        .iter()
        .map(|o| tv::build_cylinder_complex(&lat, o, 1).unwrap())
        .collect();
    let r = tv::compare_projector(&sn, &cyls, BoundaryWeights::HalfEdge, None).unwrap();
    Outcome {
        passed: r.deviation < 1e-8 && r.order_spread < 1e-8 && r.nonzero > 0 && cyls[0].complex.gluings != cyls[1].complex.gluings,
        detail: format!(
            "Z2 {} pairs ({} nonzero), deviation {:.2e}, order spread {:.2e}",
            r.pairs, r.nonzero, r.deviation, r.order_spread
        ),
    }
}

fn c6() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut special: f64 = 0.0;
    for g in ["Z2", "S3"] {
        let d = RepData::build(g).unwrap();
        for name in BUNDLED {
            let cx = closed(name);
            let z = tv::tv_closed(&cx, &d, &d.f, tv::TV_BUDGET).unwrap().value;
            let dw = tv::dw_value(&cx, &d.group, tv::DW_BUDGET).unwrap();
            worst = worst.max((z - C64::new(dw, 0.0)).norm());
            let want = match name {
                "sphere_d4.tri" | "sphere_2t.tri" => Some(1.0 / d.order() as f64),
                "s2xs1.tri" => Some(1.0),
                _ => None,
            };
            if let Some(w) = want {
                special = special.max((z - C64::new(w, 0.0)).norm()).max((dw - w).abs());
            }
        }
    }
    Outcome {
        passed: worst < 1e-8 && special < 1e-8,
        detail: format!("max |TV - DW| {worst:.2e}, max deviation from 1/|G| and 1 {special:.2e}"),
    }
}

fn c7() -> Outcome {
    let mut worst: f64 = 0.0;
    let groups = ["Z2", "Z3", "Z4", "Z5", "Z6", "S3", "D4"];
    for g in groups {
        let d = RepData::build(g).unwrap();
        let a = tv::tv_closed(&closed("sphere_d4.tri"), &d, &d.f, tv::TV_BUDGET).unwrap().value;
        let b = tv::tv_closed(&closed("sphere_2t.tri"), &d, &d.f, tv::TV_BUDGET).unwrap().value;
        worst = worst.max((a - b).norm());
    }
    Outcome {
        passed: worst < 1e-8,
        detail: format!("max difference {worst:.2e} over {groups:?}"),
    }
}

fn ribbon_deviation(z2: &RepData, s3: &RepData, f: Option<&FSymbolTable>) -> (f64, f64) {
    let lat = torus();
    let sn = StringNet::with_table(z2, f.filter(|f| f.rank() == 2).unwrap_or(&z2.f), &lat).unwrap();
    let mut dz2: f64 = 0.0;
    for g in 0..2 {
        dz2 = dz2.max(ribbon::closed_ribbon_identity_check(&sn, 0, g, PairSelection::Exhaustive).unwrap());
    }
    let sn = StringNet::with_table(s3, f.filter(|f| f.rank() == 3).unwrap_or(&s3.f), &lat).unwrap();
    let mut ds3: f64 = 0.0;
    for g in 0..6 {
        let sel = PairSelection::Sampled { count: 40, seed: 10 + g as u64 };
        ds3 = ds3.max(ribbon::closed_ribbon_identity_check(&sn, 0, g, sel).unwrap());
    }
    (dz2, ds3)
}

fn c8() -> Outcome {
    let z2 = RepData::build("Z2").unwrap();
    let s3 = RepData::build("S3").unwrap();
    let (dz2, ds3) = ribbon_deviation(&z2, &s3, None);
    Outcome {
        passed: dz2 < 1e-9 && ds3 < 1e-8,
        detail: format!("Z2 exhaustive {dz2:.2e}, S3 sampled {ds3:.2e}"),
    }
}

fn c9() -> Outcome {
    let d = RepData::build("Z2").unwrap();
    let lat = torus();
    let (pk, gs) = ribbon::ground_setup(&d, &lat).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let n = 12;
    let mut good = 0;
    for k in 0..n {
        let strip = ribbon::random_open_strip(&lat, 3 + k % 5, &mut rng).unwrap();
        let ends = [strip.start, strip.end];
        let op = RibbonOperator::new(strip, 1, rng.gen_range(0..2)).unwrap();
        let rep = ribbon::endpoint_locality_check(&d.group, &lat, &pk, &op, &gs).unwrap();
        let ex = &rep.excitations;
        // flux h = 1 excites both end plaquettes, and nothing else may appear
        let exact_plaquettes = ex.plaquettes.len() == 2 && ends.iter().all(|s| ex.plaquettes.contains(&s.plaquette));
        if rep.passed && exact_plaquettes {
            good += 1;
        }
    }
    Outcome {
        passed: good == n,
        detail: format!("{good}/{n} random open ribbons excite only their end sites"),
    }
}

fn c10() -> Outcome {
    let d = RepData::build("Z2").unwrap();
    let lat = torus();
    let g = &lat.graph;
    let pk = Packing::for_model(&d, g).unwrap();
    let cols = admissible_colorings(g, &d.fusion);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut trip: f64 = 0.0;
    let mut gauge: f64 = 0.0;
    for _ in 0..100 {
        let mut s = StateVector::zero(Basis::Spin);
        for _ in 0..rng.gen_range(1..6) {
            let j = &cols[rng.gen_range(0..cols.len())];
            s.add(pk.encode(j), C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        }
        let grp = to_group_basis(&d, g, &s).unwrap();
        gauge = gauge.max(gauge_residual(&d, g, &grp).unwrap());
        let back = to_spin_basis(&d, g, &grp).unwrap();
        trip = trip.max(back.max_abs_diff(&s));
        let again = to_group_basis(&d, g, &back).unwrap();
        trip = trip.max(again.max_abs_diff(&grp));
    }
    let mut gram: f64 = 0.0;
    let theta = TrivalentGraph::theta();
    let cases: Vec<(RepData, &TrivalentGraph)> = vec![
        (RepData::build("Z2").unwrap(), &theta),
        (RepData::build("S3").unwrap(), &theta),
        (RepData::build("D4").unwrap(), &theta),
        (RepData::build("Z2").unwrap(), g),
    ];
    for (d, graph) in &cases {
        let pk = Packing::for_model(d, graph).unwrap();
        let vecs: Vec<StateVector> = admissible_colorings(graph, &d.fusion)
            .iter()
            .map(|j| to_group_basis(d, graph, &StateVector::basis_state(Basis::Spin, pk.encode(j))).unwrap())
            .collect();
        for (a, va) in vecs.iter().enumerate() {
            for (b, vb) in vecs.iter().enumerate() {
                let want = if a == b { 1.0 } else { 0.0 };
                gram = gram.max((va.inner(vb) - C64::new(want, 0.0)).norm());
            }
        }
    }
    Outcome {
        passed: trip < 1e-10 && gauge < 1e-10 && gram < 1e-9,
        detail: format!("round trip {trip:.2e}, gauge residual {gauge:.2e}, Gram deviation {gram:.2e}"),
    }
}

fn c11() -> Outcome {
    let z2 = RepData::build("Z2").unwrap();
    let s3 = RepData::build("S3").unwrap();
    let bad_z2 = z2.f.corrupted(z2.f.generic_entry(), C64::new(0.1, 0.0));
    let bad_s3 = s3.f.corrupted(s3.f.generic_entry(), C64::new(0.1, 0.0));
    let pent = verify_pentagon(&bad_z2).min(verify_pentagon(&bad_s3));
    let (dz2, _) = duality_deviation(&bad_z2, &z2, &s3);
    let (_, ds3) = duality_deviation(&bad_s3, &z2, &s3);
    let (rz2, _) = ribbon_deviation(&z2, &s3, Some(&bad_z2));
    let (_, rs3) = ribbon_deviation(&z2, &s3, Some(&bad_s3));
    let worst = pent.min(dz2).min(ds3).min(rz2).min(rs3);
    Outcome {
        passed: worst > 1e-3,
        detail: format!(
            "pentagon {pent:.2e}, duality Z2 {dz2:.2e} S3 {ds3:.2e}, closed ribbon Z2 {rz2:.2e} S3 {rs3:.2e}"
        ),
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("pentagon suite", c1),
        ("constraint algebra", c2),
        ("ground-space dimension", c3),
        ("magnetic duality", c4),
        ("projector equals cylinder amplitude", c5),
        ("state-sum Fourier duality", c6),
        ("triangulation independence", c7),
        ("closed-ribbon identity", c8),
        ("endpoint locality", c9),
        ("basis round trip", c10),
        ("mutation sanity", c11),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let tag = format!("criterion {:>2}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str()) || tag.contains(f.as_str())) {
            continue;
        }
        let t = Instant::now();
        let out = run();
        let secs = t.elapsed().as_secs_f64();
        println!(
            "{tag} {:<36} {} ({secs:.1}s): {}",
            name,
            if out.passed { "PASS" } else { "FAIL" },
            out.detail
        );
        if !out.passed {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
