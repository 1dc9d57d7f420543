//! Quantum double operators in the group-coloring basis.

use crate::error::{Error, Result};
use crate::group::FiniteGroup;
use crate::lattice::{Honeycomb, Site, TrivalentGraph};
use crate::state::{algebra_residuals, group_basis_size, AlgebraResiduals, Basis, Packing, StateVector, DEFAULT_BUDGET};
use crate::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// New color of edge `e` after acting with `g` at its endpoint `v`:
/// left multiplication toward the target, right multiplication by `g⁻¹` at the source.
#[inline]
fn gauge_edge(group: &FiniteGroup, graph: &TrivalentGraph, g: usize, e: usize, v: usize, x: usize) -> usize {
    let mut y = x;
    if graph.tgt[e] == v {
        y = group.mul(g, y);
    }
    if graph.src[e] == v {
        y = group.mul(y, group.inv(g));
    }
    y
}

pub fn apply_l(
    group: &FiniteGroup,
    graph: &TrivalentGraph,
    pk: &Packing,
    g: usize,
    edge: usize,
    vertex: usize,
    state: &StateVector,
) -> Result<StateVector> {
    if !graph.is_incident(edge, vertex) {
        return Err(Error::NotIncident { edge, vertex });
    }
    let mut out = StateVector::zero(state.basis);
    for (&k, &a) in &state.amps {
        let x = gauge_edge(group, graph, g, edge, vertex, pk.get(k, edge));
        out.add(pk.set(k, edge, x), a);
    }
    Ok(out)
}

/// Applies the gauge transformation by `g` at `v` to a single key.
#[inline]
pub fn gauge_key(group: &FiniteGroup, graph: &TrivalentGraph, pk: &Packing, g: usize, v: usize, mut k: u128) -> u128 {
    for &e in &graph.vedges[v] {
        let x = gauge_edge(group, graph, g, e, v, pk.get(k, e));
        k = pk.set(k, e, x);
    }
    k
}

/// Group average of the local gauge transformations at `v`.
pub fn apply_electric_a(group: &FiniteGroup, graph: &TrivalentGraph, pk: &Packing, v: usize, state: &StateVector) -> StateVector {
    let w = real(1.0 / group.order() as f64);
    let mut out = StateVector::zero(state.basis);
    for (&k, &a) in &state.amps {
        for g in 0..group.order() {
            out.add(gauge_key(group, graph, pk, g, v, k), a * w);
        }
    }
    out.prune()
}

/// Holonomy around `p` based at its base site: the ordered composition
/// `M_5 ⋯ M_0` of the boundary colors, inverted on reversed slots.
pub fn holonomy(group: &FiniteGroup, lat: &Honeycomb, pk: &Packing, p: usize, key: u128) -> usize {
    let mut acc = 0;
    for &(e, fwd) in lat.plaquette_boundary(p) {
        let x = pk.get(key, e);
        let m = if fwd { x } else { group.inv(x) };
        acc = group.mul(m, acc);
    }
    acc
}

/// Projector onto configurations whose holonomy around `p` equals `g`.
pub fn apply_magnetic_b(group: &FiniteGroup, lat: &Honeycomb, pk: &Packing, g: usize, p: usize, state: &StateVector) -> StateVector {
    let mut out = StateVector::zero(state.basis);
    for (&k, &a) in &state.amps {
        if holonomy(group, lat, pk, p, k) == g {
            out.amps.insert(k, a);
        }
    }
    out
}

/// Projector `T^g(j,p)`: the edge color must equal `g` when `p` lies to the
/// right of `j`, and `g⁻¹` when it lies to the left.
pub fn apply_t(group: &FiniteGroup, lat: &Honeycomb, pk: &Packing, g: usize, edge: usize, p: usize, state: &StateVector) -> Result<StateVector> {
    let want = if lat.right_of(edge) == p {
        g
    } else if lat.left_of(edge) == p {
        group.inv(g)
    } else {
        return Err(Error::InvalidGeometry(format!("edge {edge} does not bound plaquette {p}")));
    };
    let mut out = StateVector::zero(state.basis);
    for (&k, &a) in &state.amps {
        if pk.get(k, edge) == want {
            out.amps.insert(k, a);
        }
    }
    Ok(out)
}

/// `H = -Σ_v A(v) - Σ_p B_1(p)`.
pub fn apply_hamiltonian(group: &FiniteGroup, lat: &Honeycomb, pk: &Packing, state: &StateVector) -> StateVector {
    let mut out = StateVector::zero(state.basis);
    for v in 0..lat.num_vertices() {
        out.axpy(real(-1.0), &apply_electric_a(group, &lat.graph, pk, v, state));
    }
    for p in 0..lat.num_plaquettes() {
        out.axpy(real(-1.0), &apply_magnetic_b(group, lat, pk, 0, p, state));
    }
    out.prune()
}

/// Number of gauge transformations fixing a coloring (graph assumed connected).
pub fn stabilizer_size(group: &FiniteGroup, graph: &TrivalentGraph, colors: &[usize]) -> usize {
    let nv = graph.num_vertices();
    let mut count = 0;
    let mut h = vec![usize::MAX; nv];
    let mut stack = Vec::with_capacity(nv);
    'outer: for h0 in 0..group.order() {
        h.iter_mut().for_each(|x| *x = usize::MAX);
        h[0] = h0;
        stack.clear();
        stack.push(0);
        while let Some(v) = stack.pop() {
            for &e in &graph.vedges[v] {
                let g = colors[e];
                let (s, t) = (graph.src[e], graph.tgt[e]);
                // fixed iff h_t = g h_s g⁻¹
                let (w, need) = if s == v {
                    (t, group.mul(group.mul(g, h[v]), group.inv(g)))
                } else {
                    (s, group.mul(group.mul(group.inv(g), h[v]), g))
                };
                if h[w] == usize::MAX {
                    h[w] = need;
                    stack.push(w);
                } else if h[w] != need {
                    continue 'outer;
                }
            }
        }
        count += 1;
    }
    count
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankMethod {
    Trace,
    Randomized { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroundOptions {
    pub budget: u128,
    pub randomized: bool,
    pub seed: u64,
}

impl Default for GroundOptions {
    fn default() -> Self {
        GroundOptions {
            budget: DEFAULT_BUDGET,
            randomized: false,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundDimension {
    pub dimension: usize,
    pub raw: f64,
    pub method: RankMethod,
}

/// Rank of `Π_v A(v) Π_p B_1(p)`.
///
/// The trace is evaluated basis state by basis state: the plaquette part is
/// diagonal and `⟨c|Π_v A(v)|c⟩` is the fraction of gauge transformations
/// fixing `c`.
pub fn ground_space_dimension(group: &FiniteGroup, lat: &Honeycomb, opts: GroundOptions) -> Result<GroundDimension> {
    let ne = lat.num_edges();
    let n = match group_basis_size(group.order(), ne, opts.budget) {
        Ok(n) => n,
        Err(e) if opts.randomized => return randomized_rank(group, lat, opts).map_err(|_| e),
        Err(e) => return Err(e),
    };
    let pk = Packing::new(ne, group.order())?;
    let order = group.order();
    let chunk = 4096u128;
    let chunks = n.div_ceil(chunk);
    let fixed: u128 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut colors = vec![0usize; ne];
            let mut total: u128 = 0;
            for x in (c * chunk)..((c + 1) * chunk).min(n) {
                let mut y = x;
                for slot in colors.iter_mut() {
                    *slot = (y % order as u128) as usize;
                    y /= order as u128;
                }
                let key = pk.encode(&colors);
                if (0..lat.num_plaquettes()).all(|p| holonomy(group, lat, &pk, p, key) == 0) {
                    total += stabilizer_size(group, &lat.graph, &colors) as u128;
                }
            }
            total
        })
        .sum();
    let gauge = (order as f64).powi(lat.num_vertices() as i32);
    let raw = fixed as f64 / gauge;
    let dim = raw.round();
    if (raw - dim).abs() > 1e-6 {
        return Err(Error::NumericalInconsistency(format!("projector trace {raw} is not an integer")));
    }
    Ok(GroundDimension {
        dimension: dim as usize,
        raw,
        method: RankMethod::Trace,
    })
}

/// Flat colorings, sorted by key; aborts past `budget` entries.
pub fn flat_colorings(group: &FiniteGroup, lat: &Honeycomb, pk: &Packing, budget: u128) -> Result<Vec<u128>> {
    let ne = lat.num_edges();
    let mut ready: Vec<Vec<usize>> = vec![Vec::new(); ne];
    for p in 0..lat.num_plaquettes() {
        let last = lat.plaquette_boundary(p).iter().map(|s| s.0).max().unwrap();
        ready[last].push(p);
    }
    let mut out = Vec::new();
    let mut stack = vec![(0usize, 0u128)];
    while let Some((e, key)) = stack.pop() {
        if e == ne {
            out.push(key);
            if out.len() as u128 > budget {
                return Err(Error::BudgetExceeded {
                    needed: out.len() as u128,
                    budget,
                });
            }
            continue;
        }
        for g in 0..group.order() {
            let k = pk.set(key, e, g);
            if ready[e].iter().all(|&p| holonomy(group, lat, pk, p, k) == 0) {
                stack.push((e + 1, k));
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// Projects random vectors supported on flat colorings with `Π_v A(v)` and
/// counts independent images, doubling the sample count until it exceeds the rank.
fn randomized_rank(group: &FiniteGroup, lat: &Honeycomb, opts: GroundOptions) -> Result<GroundDimension> {
    let pk = Packing::new(lat.num_edges(), group.order())?;
    let flat = flat_colorings(group, lat, &pk, opts.budget)?;
    let index = |k: u128| flat.binary_search(&k).expect("gauge orbits preserve flatness");
    let order = group.order();
    let mut moves: Vec<Vec<usize>> = vec![Vec::with_capacity(order); flat.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut k = 4usize;
    loop {
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for _ in 0..k {
            let mut x: Vec<f64> = (0..flat.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            for v in 0..lat.num_vertices() {
                for (i, &key) in flat.iter().enumerate() {
                    moves[i].clear();
                    for g in 0..order {
                        moves[i].push(index(gauge_key(group, &lat.graph, &pk, g, v, key)));
                    }
                }
                let mut y = vec![0.0; flat.len()];
                for (i, m) in moves.iter().enumerate() {
                    for &t in m {
                        y[t] += x[i] / order as f64;
                    }
                }
                x = y;
            }
            for b in &basis {
                let dot: f64 = b.iter().zip(&x).map(|(a, c)| a * c).sum();
                x.iter_mut().zip(b).for_each(|(xi, bi)| *xi -= dot * bi);
            }
            let n = x.iter().map(|a| a * a).sum::<f64>().sqrt();
            if n > 1e-8 {
                x.iter_mut().for_each(|a| *a /= n);
                basis.push(x);
            }
        }
        if basis.len() < k {
            return Ok(GroundDimension {
                dimension: basis.len(),
                raw: basis.len() as f64,
                method: RankMethod::Randomized { seed: opts.seed },
            });
        }
        k *= 2;
        if k > flat.len() {
            return Err(Error::BudgetExceeded {
                needed: k as u128,
                budget: flat.len() as u128,
            });
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Excitations {
    pub vertices: Vec<usize>,
    pub plaquettes: Vec<usize>,
}

impl Excitations {
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty() && self.plaquettes.is_empty()
    }

    /// Every flagged vertex and plaquette belongs to one of `sites`.
    pub fn within(&self, sites: &[Site]) -> bool {
        self.vertices.iter().all(|v| sites.iter().any(|s| s.vertex == *v))
            && self.plaquettes.iter().all(|p| sites.iter().any(|s| s.plaquette == *p))
    }
}

pub fn excitation_sites(group: &FiniteGroup, lat: &Honeycomb, pk: &Packing, state: &StateVector) -> Result<Excitations> {
    assert_eq!(state.basis, Basis::Group);
    let nn = state.inner(state).re;
    if nn < 1e-24 {
        return Err(Error::ZeroState);
    }
    let mut ex = Excitations::default();
    for v in 0..lat.num_vertices() {
        let e = state.inner(&apply_electric_a(group, &lat.graph, pk, v, state)).re / nn;
        if e < 1.0 - 1e-9 {
            ex.vertices.push(v);
        }
    }
    for p in 0..lat.num_plaquettes() {
        let e = state.inner(&apply_magnetic_b(group, lat, pk, 0, p, state)).re / nn;
        if e < 1.0 - 1e-9 {
            ex.plaquettes.push(p);
        }
    }
    Ok(ex)
}

/// A normalized ground state: the projector applied to the identity coloring.
pub fn reference_ground_state(group: &FiniteGroup, lat: &Honeycomb, pk: &Packing) -> Result<StateVector> {
    let mut s = StateVector::basis_state(Basis::Group, 0);
    for v in 0..lat.num_vertices() {
        s = apply_electric_a(group, &lat.graph, pk, v, &s);
    }
    s.normalized()
}

/// Commutators, idempotence and self-adjointness of `{A(v)} ∪ {B_1(p)}` on every
/// group-basis state, or on `samples = (count, seed)` random ones.
pub fn constraint_algebra(group: &FiniteGroup, lat: &Honeycomb, samples: Option<(usize, u64)>, budget: u128) -> Result<AlgebraResiduals> {
    let ne = lat.num_edges();
    let pk = Packing::new(ne, group.order())?;
    let keys: Vec<u128> = match samples {
        None => {
            let n = group_basis_size(group.order(), ne, budget)?;
            (0..n)
                .map(|x| {
                    let mut y = x;
                    let colors: Vec<usize> = (0..ne)
                        .map(|_| {
                            let c = (y % group.order() as u128) as usize;
                            y /= group.order() as u128;
                            c
                        })
                        .collect();
                    pk.encode(&colors)
                })
                .collect()
        }
        Some((count, seed)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..count)
                .map(|_| pk.encode(&(0..ne).map(|_| rng.gen_range(0..group.order())).collect::<Vec<_>>()))
                .collect()
        }
    };
    let mut ops: Vec<Box<dyn Fn(&StateVector) -> StateVector + Sync + '_>> = Vec::new();
    for v in 0..lat.num_vertices() {
        let pk = pk.clone();
        ops.push(Box::new(move |s| apply_electric_a(group, &lat.graph, &pk, v, s)));
    }
    for p in 0..lat.num_plaquettes() {
        let pk = pk.clone();
        ops.push(Box::new(move |s| apply_magnetic_b(group, lat, &pk, 0, p, s)));
    }
    Ok(algebra_residuals(&ops, Basis::Group, &keys))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z2() -> (FiniteGroup, Honeycomb, Packing) {
        let g = FiniteGroup::build("Z2").unwrap();
        let lat = Honeycomb::torus(2, 2).unwrap();
        let pk = Packing::new(12, 2).unwrap();
        (g, lat, pk)
    }

    #[test]
    fn l_flips_z2_edge() {
        let (g, lat, pk) = z2();
        let s = StateVector::basis_state(Basis::Group, 0);
        let e = 5;
        let v = lat.graph.src[e];
        let t = apply_l(&g, &lat.graph, &pk, 1, e, v, &s).unwrap();
        assert_eq!(t.get(pk.set(0, e, 1)), C64::new(1.0, 0.0));
        let same = apply_l(&g, &lat.graph, &pk, 0, e, v, &s).unwrap();
        assert_eq!(same, s);
        let far = (0..8).find(|&w| !lat.graph.is_incident(e, w)).unwrap();
        assert!(matches!(apply_l(&g, &lat.graph, &pk, 1, e, far, &s), Err(Error::NotIncident { .. })));
    }

    #[test]
    fn magnetic_on_identity() {
        let (g, lat, pk) = z2();
        let s = StateVector::basis_state(Basis::Group, 0);
        assert_eq!(apply_magnetic_b(&g, &lat, &pk, 0, 2, &s), s);
        assert!(apply_magnetic_b(&g, &lat, &pk, 1, 2, &s).amps.is_empty());
    }

    #[test]
    fn ground_dimensions() {
        let lat = Honeycomb::torus(2, 2).unwrap();
        let d = |n: &str| ground_space_dimension(&FiniteGroup::build(n).unwrap(), &lat, GroundOptions::default());
        assert_eq!(d("Z2").unwrap().dimension, 4);
        assert!(matches!(d("S3"), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn randomized_rank_agrees() {
        let lat = Honeycomb::torus(2, 2).unwrap();
        let g = FiniteGroup::build("Z3").unwrap();
        let opts = GroundOptions {
            budget: 100_000,
            randomized: true,
            seed: 11,
        };
        let d = ground_space_dimension(&g, &lat, opts).unwrap();
        assert_eq!(d.dimension, 9);
        assert!(matches!(d.method, RankMethod::Randomized { .. }));
    }

    #[test]
    fn ground_state_has_no_excitations() {
        let (g, lat, pk) = z2();
        let gs = reference_ground_state(&g, &lat, &pk).unwrap();
        assert!(excitation_sites(&g, &lat, &pk, &gs).unwrap().is_empty());
        let e = 4;
        let flipped = apply_l(&g, &lat.graph, &pk, 1, e, lat.graph.src[e], &gs).unwrap();
        let ex = excitation_sites(&g, &lat, &pk, &flipped).unwrap();
        let mut want = vec![lat.left_of(e), lat.right_of(e)];
        want.sort();
        assert_eq!(ex.plaquettes, want);
        assert!(ex.vertices.is_empty());
    }

    #[test]
    fn constraint_algebra_small() {
        let lat = Honeycomb::torus(2, 2).unwrap();
        let z2 = FiniteGroup::build("Z2").unwrap();
        let r = constraint_algebra(&z2, &lat, None, DEFAULT_BUDGET).unwrap();
        assert_eq!(r.states, 4096);
        assert!(r.commutator < 1e-12 && r.idempotence < 1e-12 && r.adjoint < 1e-12, "{r:?}");
        let s3 = FiniteGroup::build("S3").unwrap();
        let r = constraint_algebra(&s3, &lat, Some((50, 2)), DEFAULT_BUDGET).unwrap();
        assert!(r.commutator < 1e-12 && r.idempotence < 1e-12 && r.adjoint < 1e-12, "{r:?}");
    }
}
