//! Sparse state vectors in the group-coloring and spin-network bases, and the
//! Fourier change of basis between them.

use crate::error::{Error, Result};
use crate::fsym::RepData;
use crate::kitaev;
use crate::lattice::TrivalentGraph;
use crate::rep::FusionData;
use crate::C64;
use std::collections::HashMap;

/// Amplitudes below this magnitude are dropped.
pub const PRUNE: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    Group,
    Spin,
}

/// Packs one small color per edge into a `u128` key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Packing {
    bits: u32,
    edges: usize,
}

impl Packing {
    /// `colors` is the number of distinct values an edge may take.
    pub fn new(edges: usize, colors: usize) -> Result<Self> {
        let bits = (usize::BITS - (colors.max(2) - 1).leading_zeros()).max(1);
        if bits as usize * edges > 128 {
            return Err(Error::InvalidParameter(format!(
                "{edges} edges with {colors} colors do not fit a 128-bit key"
            )));
        }
        Ok(Packing { bits, edges })
    }

    pub fn for_model(data: &RepData, graph: &TrivalentGraph) -> Result<Self> {
        Self::new(graph.num_edges(), data.order().max(data.rank()))
    }

    pub fn edges(&self) -> usize {
        self.edges
    }

    #[inline]
    pub fn get(&self, key: u128, e: usize) -> usize {
        ((key >> (self.bits as usize * e)) & ((1u128 << self.bits) - 1)) as usize
    }

    #[inline]
    pub fn set(&self, key: u128, e: usize, c: usize) -> u128 {
        let shift = self.bits as usize * e;
        let mask = ((1u128 << self.bits) - 1) << shift;
        (key & !mask) | ((c as u128) << shift)
    }

    pub fn encode(&self, colors: &[usize]) -> u128 {
        debug_assert_eq!(colors.len(), self.edges);
        colors
            .iter()
            .enumerate()
            .fold(0u128, |k, (e, &c)| k | ((c as u128) << (self.bits as usize * e)))
    }

    pub fn decode(&self, key: u128) -> Vec<usize> {
        (0..self.edges).map(|e| self.get(key, e)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub basis: Basis,
    pub amps: HashMap<u128, C64>,
}

impl StateVector {
    pub fn zero(basis: Basis) -> Self {
        StateVector {
            basis,
            amps: HashMap::new(),
        }
    }

    pub fn basis_state(basis: Basis, key: u128) -> Self {
        let mut s = Self::zero(basis);
        s.amps.insert(key, C64::new(1.0, 0.0));
        s
    }

    pub fn add(&mut self, key: u128, amp: C64) {
        *self.amps.entry(key).or_insert(C64::new(0.0, 0.0)) += amp;
    }

    pub fn get(&self, key: u128) -> C64 {
        self.amps.get(&key).copied().unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn prune(mut self) -> Self {
        self.amps.retain(|_, a| a.norm() >= PRUNE);
        self
    }

    pub fn scale(mut self, s: C64) -> Self {
        for a in self.amps.values_mut() {
            *a *= s;
        }
        self
    }

    /// `⟨self|other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        let (small, big, flip) = if self.amps.len() <= other.amps.len() {
            (self, other, false)
        } else {
            (other, self, true)
        };
        let s: C64 = small
            .amps
            .iter()
            .filter_map(|(k, a)| big.amps.get(k).map(|b| a.conj() * b))
            .sum();
        if flip {
            s.conj()
        } else {
            s
        }
    }

    pub fn norm(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(self) -> Result<Self> {
        let n = self.norm();
        if n < PRUNE {
            return Err(Error::ZeroState);
        }
        Ok(self.scale(C64::new(1.0 / n, 0.0)))
    }

    pub fn axpy(&mut self, s: C64, other: &StateVector) {
        for (k, a) in &other.amps {
            self.add(*k, s * a);
        }
    }

    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        let mut worst: f64 = 0.0;
        for (k, a) in &self.amps {
            worst = worst.max((a - other.get(*k)).norm());
        }
        for (k, b) in &other.amps {
            if !self.amps.contains_key(k) {
                worst = worst.max(b.norm());
            }
        }
        worst
    }
}

/// Worst deviations from a commuting family of orthogonal projectors.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AlgebraResiduals {
    pub commutator: f64,
    pub idempotence: f64,
    pub adjoint: f64,
    pub states: usize,
}

/// Checks `[O_i, O_j] = 0`, `O_i^2 = O_i` and `O_i = O_i^†` column by column on
/// the basis states `keys`.
pub fn algebra_residuals<F>(ops: &[F], basis: Basis, keys: &[u128]) -> AlgebraResiduals
where
    F: Fn(&StateVector) -> StateVector + Sync,
{
    use rayon::prelude::*;
    keys.par_iter()
        .map(|&x| {
            let e = StateVector::basis_state(basis, x);
            let y: Vec<StateVector> = ops.iter().map(|o| o(&e)).collect();
            let mut r = AlgebraResiduals {
                states: 1,
                ..Default::default()
            };
            for (i, o) in ops.iter().enumerate() {
                r.idempotence = r.idempotence.max(o(&y[i]).max_abs_diff(&y[i]));
                for (j, q) in ops.iter().enumerate().skip(i + 1) {
                    r.commutator = r.commutator.max(o(&y[j]).max_abs_diff(&q(&y[i])));
                }
                for (&z, a) in &y[i].amps {
                    let back = o(&StateVector::basis_state(basis, z)).get(x);
                    r.adjoint = r.adjoint.max((a - back.conj()).norm());
                }
            }
            r
        })
        .reduce(AlgebraResiduals::default, |a, b| AlgebraResiduals {
            commutator: a.commutator.max(b.commutator),
            idempotence: a.idempotence.max(b.idempotence),
            adjoint: a.adjoint.max(b.adjoint),
            states: a.states + b.states,
        })
}

/// Labels seen by the intertwiner at `v`: outgoing edges keep their label,
/// incoming edges contribute the dual.
pub fn vertex_labels(graph: &TrivalentGraph, fusion: &FusionData, j: &[usize], v: usize) -> [usize; 3] {
    std::array::from_fn(|k| {
        let e = graph.vedges[v][k];
        if graph.src[e] == v {
            j[e]
        } else {
            fusion.dual[j[e]]
        }
    })
}

pub fn is_admissible(graph: &TrivalentGraph, fusion: &FusionData, j: &[usize]) -> bool {
    (0..graph.num_vertices()).all(|v| {
        let [a, b, c] = vertex_labels(graph, fusion, j, v);
        fusion.admissible(a, b, c)
    })
}

/// All admissible irrep colorings in lexicographic order.
pub fn admissible_colorings(graph: &TrivalentGraph, fusion: &FusionData) -> Vec<Vec<usize>> {
    let ne = graph.num_edges();
    // vertices become checkable once their largest edge is assigned
    let mut ready: Vec<Vec<usize>> = vec![Vec::new(); ne];
    for v in 0..graph.num_vertices() {
        let last = *graph.vedges[v].iter().max().unwrap();
        ready[last].push(v);
    }
    let mut out = Vec::new();
    let mut cur = vec![0; ne];
    fn rec(
        e: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        graph: &TrivalentGraph,
        fusion: &FusionData,
        ready: &[Vec<usize>],
    ) {
        if e == cur.len() {
            out.push(cur.clone());
            return;
        }
        for c in 0..fusion.rank() {
            cur[e] = c;
            let ok = ready[e].iter().all(|&v| {
                let [a, b, x] = vertex_labels(graph, fusion, cur, v);
                fusion.admissible(a, b, x)
            });
            if ok {
                rec(e + 1, cur, out, graph, fusion, ready);
            }
        }
    }
    rec(0, &mut cur, &mut out, graph, fusion, &ready);
    out
}

/// Normalized spin-network wavefunction evaluated on a group coloring:
/// `Π_e sqrt(d_e/|G|) D^{j_e}(g_e)_{αβ}` contracted with the vertex intertwiners
/// (`β` at the source, `α` at the target).
pub fn fourier_overlap(data: &RepData, graph: &TrivalentGraph, j: &[usize], g: &[usize]) -> Result<C64> {
    if !is_admissible(graph, &data.fusion, j) {
        return Err(Error::NotAdmissible(j.to_vec()));
    }
    let ne = graph.num_edges();
    let nv = graph.num_vertices();
    let order = data.order() as f64;
    let tensors: Vec<_> = (0..nv)
        .map(|v| {
            let [a, b, c] = vertex_labels(graph, &data.fusion, j, v);
            data.intertwiner(a, b, c).expect("admissible")
        })
        .collect();
    let dims: Vec<usize> = j.iter().map(|&x| data.dim(x)).collect();
    // odometer over (alpha_e, beta_e) for every edge
    let mut idx = vec![(0usize, 0usize); ne];
    let mut total = C64::new(0.0, 0.0);
    loop {
        let mut term = C64::new(1.0, 0.0);
        for e in 0..ne {
            term *= data.irreps[j[e]].matrices[g[e]].get(idx[e].0, idx[e].1);
            if term.norm() == 0.0 {
                break;
            }
        }
        if term.norm() != 0.0 {
            for v in 0..nv {
                let leg = |k: usize| {
                    let e = graph.vedges[v][k];
                    if graph.src[e] == v {
                        idx[e].1
                    } else {
                        idx[e].0
                    }
                };
                term *= tensors[v].get(leg(0), leg(1), leg(2));
            }
            total += term;
        }
        let mut e = 0;
        loop {
            if e == ne {
                let norm: f64 = dims.iter().map(|&d| (d as f64 / order).sqrt()).product();
                return Ok(total * norm);
            }
            idx[e].1 += 1;
            if idx[e].1 == dims[e] {
                idx[e].1 = 0;
                idx[e].0 += 1;
                if idx[e].0 == dims[e] {
                    idx[e].0 = 0;
                    e += 1;
                    continue;
                }
            }
            break;
        }
    }
}

/// Number of group colorings, or `BudgetExceeded`.
pub fn group_basis_size(order: usize, edges: usize, budget: u128) -> Result<u128> {
    let mut n: u128 = 1;
    for _ in 0..edges {
        n = n.saturating_mul(order as u128);
        if n > budget {
            return Err(Error::BudgetExceeded { needed: n, budget });
        }
    }
    Ok(n)
}

fn digits(mut x: u128, base: usize, out: &mut [usize]) {
    for slot in out.iter_mut() {
        *slot = (x % base as u128) as usize;
        x /= base as u128;
    }
}

pub const DEFAULT_BUDGET: u128 = 1 << 21;

/// Expands a spin-network state over every group coloring.
pub fn to_group_basis(data: &RepData, graph: &TrivalentGraph, state: &StateVector) -> Result<StateVector> {
    assert_eq!(state.basis, Basis::Spin);
    let pk = Packing::for_model(data, graph)?;
    let n = group_basis_size(data.order(), graph.num_edges(), DEFAULT_BUDGET)?;
    let spins: Vec<(Vec<usize>, C64)> = state.amps.iter().map(|(k, a)| (pk.decode(*k), *a)).collect();
    let mut out = StateVector::zero(Basis::Group);
    let mut g = vec![0; graph.num_edges()];
    for x in 0..n {
        digits(x, data.order(), &mut g);
        let mut amp = C64::new(0.0, 0.0);
        for (j, a) in &spins {
            amp += a * fourier_overlap(data, graph, j, &g)?;
        }
        if amp.norm() >= PRUNE {
            out.amps.insert(pk.encode(&g), amp);
        }
    }
    Ok(out)
}

/// Max deviation of `state` from its image under every vertex projector.
pub fn gauge_residual(data: &RepData, graph: &TrivalentGraph, state: &StateVector) -> Result<f64> {
    let pk = Packing::for_model(data, graph)?;
    let mut worst: f64 = 0.0;
    for v in 0..graph.num_vertices() {
        let a = kitaev::apply_electric_a(&data.group, graph, &pk, v, state);
        worst = worst.max(a.max_abs_diff(state));
    }
    Ok(worst)
}

/// Coefficients `⟨S|ψ⟩` over all admissible spin networks; rejects
/// non-invariant input.
pub fn to_spin_basis(data: &RepData, graph: &TrivalentGraph, state: &StateVector) -> Result<StateVector> {
    assert_eq!(state.basis, Basis::Group);
    let res = gauge_residual(data, graph, state)?;
    if res > 1e-10 {
        return Err(Error::NotGaugeInvariant(res));
    }
    let pk = Packing::for_model(data, graph)?;
    let entries: Vec<(Vec<usize>, C64)> = state.amps.iter().map(|(k, a)| (pk.decode(*k), *a)).collect();
    let mut out = StateVector::zero(Basis::Spin);
    for j in admissible_colorings(graph, &data.fusion) {
        let mut c = C64::new(0.0, 0.0);
        for (g, a) in &entries {
            c += fourier_overlap(data, graph, &j, g)?.conj() * a;
        }
        if c.norm() >= PRUNE {
            out.amps.insert(pk.encode(&j), c);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packing_roundtrip() {
        let pk = Packing::new(12, 8).unwrap();
        let c = vec![7, 0, 3, 5, 1, 2, 6, 4, 0, 7, 7, 1];
        let k = pk.encode(&c);
        assert_eq!(pk.decode(k), c);
        assert_eq!(pk.get(pk.set(k, 3, 2), 3), 2);
        assert!(Packing::new(50, 8).is_err());
    }

    #[test]
    fn theta_colorings() {
        let data = RepData::build("Z2").unwrap();
        let cols = admissible_colorings(&TrivalentGraph::theta(), &data.fusion);
        assert_eq!(cols, vec![vec![0, 0, 0], vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]]);
    }

    #[test]
    fn theta_overlap_sign() {
        let data = RepData::build("Z2").unwrap();
        let th = TrivalentGraph::theta();
        let norm = 0.5f64.powf(1.5);
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    let x = fourier_overlap(&data, &th, &[1, 1, 0], &[a, b, c]).unwrap();
                    let sign = if (a + b) % 2 == 0 { 1.0 } else { -1.0 };
                    assert!((x - C64::new(sign * norm, 0.0)).norm() < 1e-14);
                }
            }
        }
        assert!(matches!(
            fourier_overlap(&data, &th, &[1, 0, 0], &[0, 0, 0]),
            Err(Error::NotAdmissible(_))
        ));
    }

    #[test]
    fn trivial_labels_give_uniform_overlap() {
        let data = RepData::build("S3").unwrap();
        let th = TrivalentGraph::theta();
        let x = fourier_overlap(&data, &th, &[0, 0, 0], &[3, 1, 5]).unwrap();
        assert!((x.re - 1.0 / 216f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn point_mass_is_not_invariant() {
        let data = RepData::build("Z2").unwrap();
        let th = TrivalentGraph::theta();
        let pk = Packing::for_model(&data, &th).unwrap();
        let s = StateVector::basis_state(Basis::Group, pk.encode(&[0, 0, 0]));
        assert!(matches!(to_spin_basis(&data, &th, &s), Err(Error::NotGaugeInvariant(_))));
    }
}
