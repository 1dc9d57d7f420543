//! Ribbon operators of the quantum double model.

use crate::error::{Error, Result};
use crate::fsym::RepData;
use crate::group::FiniteGroup;
use crate::kitaev::{self, Excitations};
use crate::lattice::{Honeycomb, RibbonStrip, Site, Triangle};
use crate::state::{to_group_basis, Basis, Packing, StateVector};
use crate::stringnet::{select_pairs, PairSelection, StringNet};
use crate::C64;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use std::collections::{BTreeMap, BTreeSet};

/// `Σ c_{hg} W^{(h,g)}` over a fixed strip.
#[derive(Debug, Clone, PartialEq)]
pub struct RibbonOperator {
    pub strip: RibbonStrip,
    pub coeffs: BTreeMap<(usize, usize), C64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriangleKind {
    Direct,
    Dual,
}

impl RibbonOperator {
    pub fn new(strip: RibbonStrip, h: usize, g: usize) -> Result<Self> {
        check_no_crossing(&strip)?;
        Ok(RibbonOperator {
            strip,
            coeffs: BTreeMap::from([((h, g), C64::new(1.0, 0.0))]),
        })
    }

    /// Operator with an arbitrary coefficient table.
    pub fn with_coeffs(strip: RibbonStrip, coeffs: BTreeMap<(usize, usize), C64>) -> Result<Self> {
        check_no_crossing(&strip)?;
        Ok(RibbonOperator { strip, coeffs })
    }
}

fn check_no_crossing(strip: &RibbonStrip) -> Result<()> {
    let mut edges: Vec<usize> = strip.triangles.iter().map(Triangle::edge).collect();
    edges.sort_unstable();
    if edges.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::CrossingUnsupported);
    }
    Ok(())
}

/// Single-triangle operator: `δ_{g,1} L^h(i,v)` for a direct triangle and
/// `T^{g⁻¹}(j,p)` for a dual one.
pub fn elementary_ribbon(lat: &Honeycomb, kind: TriangleKind, from: Site, to: Site, h: usize, g: usize) -> Result<RibbonOperator> {
    let strip = lat.ribbon_strip(&[from, to]).map_err(|e| Error::InvalidGeometry(e.to_string()))?;
    let got = match strip.triangles[0] {
        Triangle::Direct { .. } => TriangleKind::Direct,
        Triangle::Dual { .. } => TriangleKind::Dual,
    };
    if got != kind {
        return Err(Error::InvalidGeometry(format!("sites {from:?} -> {to:?} form a {got:?} triangle")));
    }
    RibbonOperator::new(strip, h, g)
}

/// Concatenation carrying the label `(h,g)`; the resulting operator equals
/// `Σ_{g1 g2 = g} W_a^{(h,g1)} W_b^{(g1⁻¹ h g1, g2)}`.
pub fn compose(a: &RibbonOperator, b: &RibbonOperator, h: usize, g: usize) -> Result<RibbonOperator> {
    if a.strip.end != b.strip.start {
        return Err(Error::NotConcatenable);
    }
    let mut triangles = a.strip.triangles.clone();
    triangles.extend(b.strip.triangles.iter().copied());
    let strip = RibbonStrip {
        triangles,
        start: a.strip.start,
        end: b.strip.end,
    };
    RibbonOperator::new(strip, h, g)
}

/// Group element carried by triangle `tri` on coloring `key`, if forced.
fn dual_element(group: &FiniteGroup, lat: &Honeycomb, pk: &Packing, tri: &Triangle, key: u128) -> Option<usize> {
    match *tri {
        Triangle::Direct { .. } => None,
        Triangle::Dual { edge, plaquette, .. } => {
            let x = pk.get(key, edge);
            // T^{g⁻¹}(j,p) demands x = g⁻¹ when p is right of j, x = g when left
            Some(if lat.right_of(edge) == plaquette { group.inv(x) } else { x })
        }
    }
}

/// `W^{(h,g)}` on one basis coloring: the dual triangles fix every `g_k`,
/// direct ones contribute `g_k = 1` and act with the conjugated `h_k`.
pub fn apply_single(group: &FiniteGroup, lat: &Honeycomb, pk: &Packing, strip: &RibbonStrip, h: usize, g: usize, key: u128) -> Option<u128> {
    let mut prefix = 0;
    let mut out = key;
    for tri in &strip.triangles {
        match *tri {
            Triangle::Direct { edge, vertex, .. } => {
                let hk = group.mul(group.mul(group.inv(prefix), h), prefix);
                let x = pk.get(out, edge);
                let y = if lat.graph.tgt[edge] == vertex {
                    group.mul(hk, x)
                } else {
                    group.mul(x, group.inv(hk))
                };
                out = pk.set(out, edge, y);
            }
            Triangle::Dual { .. } => {
                let gk = dual_element(group, lat, pk, tri, key).unwrap();
                prefix = group.mul(prefix, gk);
            }
        }
    }
    (prefix == g).then_some(out)
}

pub fn apply(group: &FiniteGroup, lat: &Honeycomb, pk: &Packing, op: &RibbonOperator, state: &StateVector) -> StateVector {
    assert_eq!(state.basis, Basis::Group);
    let entries: Vec<(u128, C64)> = state.amps.iter().map(|(k, a)| (*k, *a)).collect();
    let parts: Vec<Vec<(u128, C64)>> = entries
        .par_chunks(1024)
        .map(|chunk| {
            let mut v = Vec::new();
            for &(k, a) in chunk {
                for (&(h, g), &cf) in &op.coeffs {
                    if let Some(k2) = apply_single(group, lat, pk, &op.strip, h, g, k) {
                        v.push((k2, a * cf));
                    }
                }
            }
            v
        })
        .collect();
    let mut out = StateVector::zero(Basis::Group);
    for part in parts {
        for (k, a) in part {
            out.add(k, a);
        }
    }
    out.prune()
}

/// Dense matrix element check helper: the operator as a map on every basis state.
pub fn apply_to_basis(group: &FiniteGroup, lat: &Honeycomb, pk: &Packing, op: &RibbonOperator, key: u128) -> StateVector {
    apply(group, lat, pk, op, &StateVector::basis_state(Basis::Group, key))
}

/// Max deviation between `⟨S'|B_g(p)|S⟩` and `(1/|G|) Σ_j χ_j(g)* ⟨S'|B_p^j|S⟩`.
///
/// When the group basis fits the budget the left side comes from the
/// composed closed ribbon applied to expanded spin networks; otherwise from
/// the plaquette transfer ring.
pub fn closed_ribbon_identity_check(sn: &StringNet, p: usize, g: usize, sel: PairSelection) -> Result<f64> {
    let data = sn.data;
    let lat = sn.lat;
    let cols = sn.admissible_colorings();
    let pairs = select_pairs(sn, p, &cols, sel);
    let order = data.order() as f64;
    let chi: Vec<C64> = (0..data.rank()).map(|j| data.irreps[j].character[g].conj() / order).collect();
    let rhs = |a: usize, b: usize| -> C64 { (0..data.rank()).map(|j| chi[j] * sn.bp_s_element(j, p, &cols[a], &cols[b])).sum() };
    let exact = matches!(sel, PairSelection::Exhaustive)
        && crate::state::group_basis_size(data.order(), lat.num_edges(), crate::state::DEFAULT_BUDGET).is_ok();
    if exact {
        let gpk = Packing::new(lat.num_edges(), data.order())?;
        let op = RibbonOperator::new(lat.closed_strip(p), 0, g)?;
        let vecs: Vec<StateVector> = cols
            .par_iter()
            .map(|j| to_group_basis(data, &lat.graph, &StateVector::basis_state(Basis::Spin, sn.pk.encode(j))))
            .collect::<Result<_>>()?;
        let images: Vec<StateVector> = vecs.par_iter().map(|v| apply(&data.group, lat, &gpk, &op, v)).collect();
        Ok(pairs
            .par_iter()
            .map(|&(a, b)| (vecs[b].inner(&images[a]) - rhs(a, b)).norm())
            .reduce(|| 0.0, f64::max))
    } else {
        let ins = sn.delta_inserts(g);
        Ok(pairs
            .par_iter()
            .map(|&(a, b)| (sn.fourier_element(p, &cols[a], &cols[b], &ins) - rhs(a, b)).norm())
            .reduce(|| 0.0, f64::max))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalityReport {
    pub excitations: Excitations,
    pub ends: (Site, Site),
    pub passed: bool,
}

/// Applies the ribbon to a ground state and checks that excitations sit only
/// at the strip's end sites.
pub fn endpoint_locality_check(group: &FiniteGroup, lat: &Honeycomb, pk: &Packing, op: &RibbonOperator, ground: &StateVector) -> Result<LocalityReport> {
    let out = apply(group, lat, pk, op, ground);
    if out.norm() < 1e-12 {
        return Err(Error::ZeroResult);
    }
    let out = out.normalized()?;
    let ex = kitaev::excitation_sites(group, lat, pk, &out)?;
    let ends = (op.strip.start, op.strip.end);
    let passed = ex.within(&[ends.0, ends.1]);
    Ok(LocalityReport {
        excitations: ex,
        ends,
        passed,
    })
}

/// Random non-crossing open strip of `steps` triangles whose end site differs
/// from the start in both plaquette and vertex.
pub fn random_open_strip<R: Rng>(lat: &Honeycomb, steps: usize, rng: &mut R) -> Result<RibbonStrip> {
    if steps == 0 {
        return Err(Error::InvalidParameter("a ribbon needs at least one triangle".into()));
    }
    for _ in 0..1000 {
        let p = rng.gen_range(0..lat.num_plaquettes());
        let v = *lat.plaquette_vertices(p).choose(rng).unwrap();
        let mut sites = vec![Site::new(p, v)];
        let mut used = BTreeSet::new();
        while sites.len() <= steps {
            let cur = *sites.last().unwrap();
            let mut next: Vec<Site> = lat
                .vertex_plaquettes(cur.vertex)
                .iter()
                .filter(|&&q| q != cur.plaquette)
                .map(|&q| Site::new(q, cur.vertex))
                .collect();
            let verts = lat.plaquette_vertices(cur.plaquette);
            let i = verts.iter().position(|&w| w == cur.vertex).unwrap();
            next.push(Site::new(cur.plaquette, verts[(i + 1) % 6]));
            next.push(Site::new(cur.plaquette, verts[(i + 5) % 6]));
            next.retain(|&n| {
                lat.ribbon_strip(&[cur, n])
                    .map(|s| !used.contains(&s.triangles[0].edge()))
                    .unwrap_or(false)
            });
            let Some(&n) = next.choose(rng) else { break };
            used.insert(lat.ribbon_strip(&[cur, n])?.triangles[0].edge());
            sites.push(n);
        }
        let (a, b) = (sites[0], *sites.last().unwrap());
        if sites.len() == steps + 1 && a.plaquette != b.plaquette && a.vertex != b.vertex {
            return lat.ribbon_strip(&sites);
        }
    }
    Err(Error::InvalidGeometry(format!("no open strip of length {steps} found")))
}

/// Ground state and packing for ribbon experiments on a small torus.
pub fn ground_setup(data: &RepData, lat: &Honeycomb) -> Result<(Packing, StateVector)> {
    let pk = Packing::new(lat.num_edges(), data.order())?;
    let gs = kitaev::reference_ground_state(&data.group, lat, &pk)?;
    Ok((pk, gs))
}


#[cfg(test)]
mod identity_tests {
    use super::*;

    #[test]
    fn closed_ribbon_identity() {
        let lat = Honeycomb::torus(2, 2).unwrap();
        let d = RepData::build("Z2").unwrap();
        let sn = StringNet::new(&d, &lat).unwrap();
        for g in 0..2 {
            assert!(closed_ribbon_identity_check(&sn, 0, g, PairSelection::Exhaustive).unwrap() < 1e-9);
        }
        let d = RepData::build("S3").unwrap();
        let sn = StringNet::new(&d, &lat).unwrap();
        for g in 0..6 {
            let dev = closed_ribbon_identity_check(&sn, 1, g, PairSelection::Sampled { count: 40, seed: g as u64 }).unwrap();
            assert!(dev < 1e-8, "{g}: {dev}");
        }
    }

    #[test]
    fn z2_open_ribbons_are_local() {
        let d = RepData::build("Z2").unwrap();
        let lat = Honeycomb::torus(2, 2).unwrap();
        let (pk, gs) = ground_setup(&d, &lat).unwrap();
        let v = 0;
        let [p, q, _] = lat.vertex_plaquettes(v);
        let op = elementary_ribbon(&lat, TriangleKind::Direct, Site::new(p, v), Site::new(q, v), 1, 0).unwrap();
        let rep = endpoint_locality_check(&d.group, &lat, &pk, &op, &gs).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert_eq!(rep.excitations.plaquettes.len(), 2);
        let verts = lat.plaquette_vertices(p);
        let strip = lat.ribbon_strip(&[Site::new(p, verts[0]), Site::new(p, verts[1]), Site::new(p, verts[2])]).unwrap();
        let op = RibbonOperator::new(strip, 0, 1).unwrap();
        let rep = endpoint_locality_check(&d.group, &lat, &pk, &op, &gs).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert_eq!(rep.excitations.vertices.len(), 2);
        let closed = RibbonOperator::new(lat.closed_strip(p), 0, 0).unwrap();
        assert!(endpoint_locality_check(&d.group, &lat, &pk, &closed, &gs).unwrap().excitations.is_empty());
    }

    #[test]
    fn random_strips_are_local() {
        use rand::SeedableRng;
        let d = RepData::build("Z2").unwrap();
        let lat = Honeycomb::torus(2, 2).unwrap();
        let (pk, gs) = ground_setup(&d, &lat).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let strip = random_open_strip(&lat, 5, &mut rng).unwrap();
            assert!(!strip.is_closed());
            let op = RibbonOperator::new(strip, 1, 0).unwrap();
            let rep = endpoint_locality_check(&d.group, &lat, &pk, &op, &gs).unwrap();
            assert!(rep.passed && !rep.excitations.is_empty(), "{rep:?}");
        }
    }
}
