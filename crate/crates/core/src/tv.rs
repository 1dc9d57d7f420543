//! Turaev-Viro and Dijkgraaf-Witten state sums on glued complexes, and the
//! cylinder complex over a honeycomb torus.

use crate::complex3::{GluedComplex3, Gluing};
use crate::error::{Error, Result};
use crate::fsym::{FSymbolTable, RepData};
use crate::group::FiniteGroup;
use crate::lattice::Honeycomb;
use crate::stringnet::StringNet;
use crate::state::{Basis, StateVector};
use crate::C64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::{BTreeMap, HashMap};
use std::time::Instant;

pub const TV_BUDGET: u128 = 1 << 26;
pub const DW_BUDGET: u128 = 1 << 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TvValue {
    pub value: C64,
    /// Colorings with nonzero weight.
    pub terms: u64,
    pub seconds: f64,
}

/// Edge-class labels on the boundary, in class orientation.
pub type BoundaryColoring = BTreeMap<usize, usize>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundaryWeights {
    /// `|G|^{-(V_int + V_∂/2)} Π_int d_j Π_∂ v_j` with `v_j = κ_j d_j^{1/2}`; glues cylinders multiplicatively.
    #[default]
    HalfEdge,
    /// `|G|^{-V_int} Π_int d_j Π_∂ d_j^{-1/2} Π_{v∈∂} d_{j(v)}` with `j(v)` the
    /// single internal edge ending at boundary vertex `v`.
    VertexEdge,
}

struct Plan {
    free: Vec<usize>,
    /// `ready[0]` holds tets with no free edges, `ready[i+1]` those completed by `free[i]`.
    ready: Vec<Vec<usize>>,
    /// Weight of each label, per edge class.
    weight: Vec<Vec<f64>>,
}

fn plan(cx: &GluedComplex3, fixed: &BoundaryColoring, weight: Vec<Vec<f64>>) -> Plan {
    let free: Vec<usize> = (0..cx.num_edges).filter(|e| !fixed.contains_key(e)).collect();
    let mut pos = vec![usize::MAX; cx.num_edges];
    for (i, &e) in free.iter().enumerate() {
        pos[e] = i;
    }
    let mut ready = vec![Vec::new(); free.len() + 1];
    for t in 0..cx.num_tets() {
        let last = cx.eclass[t].iter().filter(|x| pos[x.0] != usize::MAX).map(|x| pos[x.0] + 1).max().unwrap_or(0);
        ready[last].push(t);
    }
    Plan { free, ready, weight }
}

fn tet_weight(f: &FSymbolTable, cx: &GluedComplex3, t: usize, col: &[usize]) -> C64 {
    let x: [usize; 6] = std::array::from_fn(|s| {
        let (c, al) = cx.eclass[t][s];
        if al {
            col[c]
        } else {
            f.dual[col[c]]
        }
    });
    // slots: 01 02 03 12 13 23
    f.symmetric(x[0], x[3], f.dual[x[1]], x[5], f.dual[x[2]], x[4])
}

struct Sum<'a> {
    f: &'a FSymbolTable,
    cx: &'a GluedComplex3,
    plan: &'a Plan,
    rank: usize,
}

impl Sum<'_> {
    fn rec(&self, i: usize, w: C64, col: &mut [usize], terms: &mut u64) -> C64 {
        if i == self.plan.free.len() {
            *terms += 1;
            return w;
        }
        let e = self.plan.free[i];
        let mut s = C64::new(0.0, 0.0);
        for lab in 0..self.rank {
            col[e] = lab;
            let mut ww = w * self.plan.weight[e][lab];
            for &t in &self.plan.ready[i + 1] {
                ww *= tet_weight(self.f, self.cx, t, col);
                if ww.norm() == 0.0 {
                    break;
                }
            }
            if ww.norm() != 0.0 {
                s += self.rec(i + 1, ww, col, terms);
            }
        }
        s
    }

    /// Parallel over label prefixes; partial sums are added in prefix order.
    fn run(&self, fixed: &BoundaryColoring) -> (C64, u64) {
        let mut col = vec![0usize; self.cx.num_edges];
        let mut base = C64::new(1.0, 0.0);
        for (&e, &lab) in fixed {
            col[e] = lab;
            base *= self.plan.weight[e][lab];
        }
        for &t in &self.plan.ready[0] {
            base *= tet_weight(self.f, self.cx, t, &col);
        }
        if base.norm() == 0.0 {
            return (base, 0);
        }
        let r = self.rank;
        let mut depth = 0;
        let mut units = 1usize;
        while depth < self.plan.free.len() && units < 256 {
            units *= r;
            depth += 1;
        }
        let parts: Vec<(C64, u64)> = (0..units)
            .into_par_iter()
            .map(|mut u| {
                let mut col = col.clone();
                let mut w = base;
                for i in 0..depth {
                    let e = self.plan.free[i];
                    let lab = u % r;
                    u /= r;
                    col[e] = lab;
                    w *= self.plan.weight[e][lab];
                    for &t in &self.plan.ready[i + 1] {
                        w *= tet_weight(self.f, self.cx, t, &col);
                    }
                    if w.norm() == 0.0 {
                        return (C64::new(0.0, 0.0), 0);
                    }
                }
                let mut terms = 0;
                let v = self.rec(depth, w, &mut col, &mut terms);
                (v, terms)
            })
            .collect();
        parts.into_iter().fold((C64::new(0.0, 0.0), 0), |a, b| (a.0 + b.0, a.1 + b.1))
    }
}

fn check_budget(base: usize, exp: usize, budget: u128) -> Result<()> {
    let mut n: u128 = 1;
    for _ in 0..exp {
        n = n.saturating_mul(base as u128);
        if n > budget {
            return Err(Error::BudgetExceeded { needed: n, budget });
        }
    }
    Ok(())
}

/// `Z = |G|^{-V} Σ Π_e d_{j_e} Π_tet G` for a closed complex.
pub fn tv_closed(cx: &GluedComplex3, data: &RepData, f: &FSymbolTable, budget: u128) -> Result<TvValue> {
    if !cx.is_closed() {
        return Err(Error::HasBoundary);
    }
    check_budget(data.rank(), cx.num_edges, budget)?;
    let start = Instant::now();
    let fixed = BoundaryColoring::new();
    let dims: Vec<f64> = (0..data.rank()).map(|j| data.dim(j) as f64).collect();
    let p = plan(cx, &fixed, vec![dims; cx.num_edges]);
    let (v, terms) = Sum { f, cx, plan: &p, rank: data.rank() }.run(&fixed);
    let norm = (data.order() as f64).powi(-(cx.num_vertices as i32));
    Ok(TvValue {
        value: v * norm,
        terms,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Boundary labels read from the complex's `color` lines.
pub fn coloring_from_file(cx: &GluedComplex3, data: &RepData) -> Result<BoundaryColoring> {
    let mut out = BoundaryColoring::new();
    for c in &cx.colors {
        if c.label >= data.rank() {
            return Err(Error::InvalidParameter(format!("label {} on line {} out of range", c.label, c.line)));
        }
        let (e, al) = cx.edge(c.tet, c.a, c.b);
        let lab = if al { c.label } else { data.dual(c.label) };
        if let Some(&old) = out.get(&e) {
            if old != lab {
                return Err(Error::InvalidParameter(format!("conflicting colors for edge class {e} (line {})", c.line)));
            }
        }
        out.insert(e, lab);
    }
    Ok(out)
}

fn check_boundary(cx: &GluedComplex3, data: &RepData, col: &BoundaryColoring) -> Result<()> {
    for &e in &cx.boundary_edges {
        match col.get(&e) {
            Some(&l) if l < data.rank() => {}
            Some(&l) => return Err(Error::InvalidParameter(format!("label {l} out of range"))),
            None => return Err(Error::InvalidParameter(format!("boundary edge class {e} has no label"))),
        }
    }
    if let Some(e) = col.keys().find(|e| !cx.boundary_edges.contains(e)) {
        return Err(Error::InvalidParameter(format!("edge class {e} is not on the boundary")));
    }
    for &(t, k) in &cx.boundary_faces {
        let vs: Vec<usize> = (0..4).filter(|&m| m != k).collect();
        let lab = |a: usize, b: usize| {
            let (e, al) = cx.edge(t, a, b);
            if al {
                col[&e]
            } else {
                data.dual(col[&e])
            }
        };
        let (x, y, z) = (lab(vs[0], vs[1]), lab(vs[1], vs[2]), lab(vs[0], vs[2]));
        if !data.fusion.admissible(x, y, data.dual(z)) {
            return Err(Error::InadmissibleBoundary(format!("face {k} of tet {t} carries ({x},{y},{z})")));
        }
    }
    Ok(())
}

/// Sum over internal labels with fixed boundary labels.
pub fn tv_boundary(cx: &GluedComplex3, data: &RepData, f: &FSymbolTable, col: &BoundaryColoring, weights: BoundaryWeights, budget: u128) -> Result<TvValue> {
    check_boundary(cx, data, col)?;
    let internal = cx.internal_edges();
    check_budget(data.rank(), internal.len(), budget)?;
    let start = Instant::now();
    let order = data.order() as f64;
    let nb = cx.boundary_vertices.len() as f64;
    let ni = cx.internal_vertex_count() as f64;
    let d: Vec<f64> = (0..data.rank()).map(|j| data.dim(j) as f64).collect();
    let pow = |x: f64| d.iter().map(|dj| dj.powf(x)).collect::<Vec<f64>>();
    let (weight, norm) = match weights {
        BoundaryWeights::HalfEdge => {
            let w = (0..cx.num_edges).map(|e| if cx.boundary_edges.contains(&e) { f.v.clone() } else { d.clone() }).collect();
            (w, order.powf(-(ni + nb / 2.0)))
        }
        BoundaryWeights::VertexEdge => {
            let mut ex: Vec<f64> = (0..cx.num_edges).map(|e| if cx.boundary_edges.contains(&e) { -0.5 } else { 1.0 }).collect();
            for (v, edges) in cx.internal_edges_at_boundary() {
                if edges.len() != 1 {
                    return Err(Error::StructureUnsupported(format!(
                        "boundary vertex {v} meets {} internal edges",
                        edges.len()
                    )));
                }
                ex[*edges.iter().next().unwrap()] += 1.0;
            }
            (ex.into_iter().map(pow).collect(), order.powf(-ni))
        }
    };
    let p = plan(cx, col, weight);
    let (v, terms) = Sum { f, cx, plan: &p, rank: data.rank() }.run(col);
    Ok(TvValue {
        value: v * norm,
        terms,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// `#{flat group colorings} / |G|^V`, with inverses on anti-aligned slots.
pub fn dw_value(cx: &GluedComplex3, group: &FiniteGroup, budget: u128) -> Result<f64> {
    if !cx.is_closed() {
        return Err(Error::HasBoundary);
    }
    check_budget(group.order(), cx.num_edges, budget)?;
    let ne = cx.num_edges;
    // faces as (tet, a, b, c) with a<b<c, checkable once their last class is set
    let mut ready: Vec<Vec<(usize, usize, usize, usize)>> = vec![Vec::new(); ne];
    for t in 0..cx.num_tets() {
        for k in 0..4 {
            let v: Vec<usize> = (0..4).filter(|&m| m != k).collect();
            let last = [(v[0], v[1]), (v[1], v[2]), (v[0], v[2])].iter().map(|&(a, b)| cx.edge(t, a, b).0).max().unwrap();
            ready[last].push((t, v[0], v[1], v[2]));
        }
    }
    fn rec(e: usize, col: &mut [usize], cx: &GluedComplex3, g: &FiniteGroup, ready: &[Vec<(usize, usize, usize, usize)>]) -> u64 {
        if e == col.len() {
            return 1;
        }
        let mut n = 0;
        for x in 0..g.order() {
            col[e] = x;
            let val = |col: &[usize], t: usize, a: usize, b: usize| {
                let (c, al) = cx.edge(t, a, b);
                if al {
                    col[c]
                } else {
                    g.inv(col[c])
                }
            };
            let ok = ready[e].iter().all(|&(t, a, b, c)| g.mul(val(col, t, a, b), val(col, t, b, c)) == val(col, t, a, c));
            if ok {
                n += rec(e + 1, col, cx, g, ready);
            }
        }
        n
    }
    // parallel over the first class
    let count: u64 = (0..group.order())
        .into_par_iter()
        .map(|x| {
            let mut col = vec![0; ne];
            col[0] = x;
            let ok = ready[0].iter().all(|&(t, a, b, c)| {
                let val = |a: usize, b: usize| {
                    let (cl, al) = cx.edge(t, a, b);
                    if al {
                        col[cl]
                    } else {
                        group.inv(col[cl])
                    }
                };
                group.mul(val(a, b), val(b, c)) == val(a, c)
            });
            if ok {
                rec(1, &mut col, cx, group, &ready)
            } else {
                0
            }
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    Ok(count as f64 / (group.order() as f64).powi(cx.num_vertices as i32))
}

/// Vertex tag of a cylinder tetrahedron: a plaquette at a time level.
pub type Tag = (usize, usize);

/// Triangulated `torus × [0, layers]` whose level slices are the dual triangulation.
#[derive(Debug, Clone)]
pub struct CylinderComplex {
    pub complex: GluedComplex3,
    pub tags: Vec<[Tag; 4]>,
    pub layers: usize,
    /// Tetrahedra of the prism over each honeycomb vertex, per layer.
    pub prisms: Vec<Vec<[usize; 3]>>,
}

#[derive(PartialEq, Eq, Hash, PartialOrd, Ord, Clone, Debug)]
enum FaceKey {
    Level(usize, usize),
    Quad(usize, Vec<Tag>),
    Inner(usize, Vec<Tag>),
}

/// One prism per dual triangle and layer, split into three tetrahedra by
/// raising its plaquette corners in `order`.
pub fn build_cylinder_complex(lat: &Honeycomb, order: &[usize], layers: usize) -> Result<CylinderComplex> {
    let np = lat.num_plaquettes();
    let mut pos = vec![usize::MAX; np];
    for (i, &p) in order.iter().enumerate() {
        if p >= np || pos[p] != usize::MAX {
            return Err(Error::InvalidParameter(format!("{order:?} is not an ordering of the {np} plaquettes")));
        }
        pos[p] = i;
    }
    if order.len() != np || layers == 0 {
        return Err(Error::InvalidParameter("need a full plaquette order and at least one layer".into()));
    }
    let mut tags: Vec<[Tag; 4]> = Vec::new();
    let mut faces: BTreeMap<FaceKey, Vec<(usize, usize)>> = BTreeMap::new();
    let mut prisms = vec![Vec::new(); layers];
    for (m, prism_row) in prisms.iter_mut().enumerate() {
        for v in 0..lat.num_vertices() {
            let mut ps = lat.vertex_plaquettes(v).to_vec();
            ps.sort_by_key(|&p| pos[p]);
            if ps[0] == ps[1] || ps[1] == ps[2] {
                return Err(Error::InvalidGeometry(format!("vertex {v} touches a plaquette twice")));
            }
            let (x, y, z) = (ps[0], ps[1], ps[2]);
            let (lo, hi) = (m, m + 1);
            let prism = [
                [(x, lo), (y, lo), (z, lo), (x, hi)],
                [(x, hi), (y, lo), (z, lo), (y, hi)],
                [(x, hi), (y, hi), (z, lo), (z, hi)],
            ];
            let base = tags.len();
            prism_row.push([base, base + 1, base + 2]);
            for (ti, tv) in prism.iter().enumerate() {
                for k in 0..4 {
                    let mut face: Vec<Tag> = (0..4).filter(|&i| i != k).map(|i| tv[i]).collect();
                    face.sort();
                    let lv: Vec<usize> = face.iter().map(|t| t.1).collect();
                    let mut pl: Vec<usize> = face.iter().map(|t| t.0).collect();
                    pl.sort();
                    pl.dedup();
                    let key = if lv.iter().all(|&l| l == lv[0]) {
                        FaceKey::Level(v, lv[0])
                    } else if pl.len() == 2 {
                        let e = lat.edge_between(v, pl[0], pl[1]).expect("adjacent plaquettes");
                        FaceKey::Quad(e, face)
                    } else {
                        FaceKey::Inner(v, face)
                    };
                    faces.entry(key).or_default().push((base + ti, k));
                }
            }
            tags.extend_from_slice(&prism);
        }
    }
    let mut gluings: Vec<[Option<Gluing>; 4]> = vec![[None; 4]; tags.len()];
    for (key, list) in &faces {
        match list.as_slice() {
            [_] => {}
            [(t1, k1), (t2, k2)] => {
                for &((a, ka), (b, kb)) in &[((*t1, *k1), (*t2, *k2)), ((*t2, *k2), (*t1, *k1))] {
                    let perm: [usize; 4] = std::array::from_fn(|m| {
                        if m == ka {
                            kb
                        } else {
                            tags[b].iter().position(|x| *x == tags[a][m]).expect("shared face")
                        }
                    });
                    gluings[a][ka] = Some(Gluing { tet: b, perm });
                }
            }
            _ => return Err(Error::InvalidGeometry(format!("face {key:?} shared by {} tetrahedra", list.len()))),
        }
    }
    let complex = GluedComplex3::from_gluings(gluings)?;
    Ok(CylinderComplex {
        complex,
        tags,
        layers,
        prisms,
    })
}

impl CylinderComplex {
    /// Class of the dual edge crossing honeycomb edge `e` at `level`, and whether
    /// the class runs from `right(e)` to `left(e)`.
    pub fn boundary_edge(&self, lat: &Honeycomb, level: usize, e: usize) -> (usize, bool) {
        let layer = if level == self.layers { level - 1 } else { level };
        let v = lat.graph.src[e];
        let (r, l) = ((lat.right_of(e), level), (lat.left_of(e), level));
        for &t in &self.prisms[layer][v] {
            let tg = &self.tags[t];
            if let (Some(a), Some(b)) = (tg.iter().position(|x| *x == r), tg.iter().position(|x| *x == l)) {
                return self.complex.edge(t, a, b);
            }
        }
        unreachable!("every prism contains its level triangles")
    }

    /// Boundary labels for honeycomb colorings at the bottom and top.
    pub fn coloring(&self, lat: &Honeycomb, data: &RepData, bottom: &[usize], top: &[usize]) -> BoundaryColoring {
        let mut out = BoundaryColoring::new();
        for (level, col) in [(0, bottom), (self.layers, top)] {
            for (e, &j) in col.iter().enumerate() {
                let (c, al) = self.boundary_edge(lat, level, e);
                out.insert(c, if al { j } else { data.dual(j) });
            }
        }
        out
    }

    /// Same tetrahedra, with one interior face gluing twisted by a transposition.
    pub fn corrupted(&self, which: usize) -> Result<CylinderComplex> {
        let cx = &self.complex;
        let mut candidates = Vec::new();
        for t in 0..cx.num_tets() {
            for k in 0..4 {
                if let Some(g) = cx.gluings[t][k] {
                    if (g.tet, g.perm[k]) > (t, k) {
                        candidates.push((t, k, g));
                    }
                }
            }
        }
        let mut tried = 0;
        for (t, k, g) in candidates.iter().cycle().skip(which % candidates.len()).take(candidates.len()) {
            let face: Vec<usize> = (0..4).filter(|&m| m != g.perm[*k]).collect();
            let mut perm = g.perm;
            for m in 0..4 {
                if perm[m] == face[0] {
                    perm[m] = face[1];
                } else if perm[m] == face[1] {
                    perm[m] = face[0];
                }
            }
            let mut gl = cx.gluings.clone();
            gl[*t][*k] = Some(Gluing { tet: g.tet, perm });
            let mut inv = [0; 4];
            for m in 0..4 {
                inv[perm[m]] = m;
            }
            gl[g.tet][g.perm[*k]] = Some(Gluing { tet: *t, perm: inv });
            tried += 1;
            if let Ok(c) = GluedComplex3::from_gluings(gl) {
                return Ok(CylinderComplex {
                    complex: c,
                    tags: self.tags.clone(),
                    layers: self.layers,
                    prisms: self.prisms.clone(),
                });
            }
        }
        Err(Error::InvalidGeometry(format!("no valid twisted gluing among {tried} candidates")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectorComparison {
    /// Max over pairs of `|⟨S1|Π_p B_p|S0⟩ - Z|`, over all orders.
    pub deviation: f64,
    /// Max over pairs of the spread between plaquette orders.
    pub order_spread: f64,
    pub pairs: usize,
    pub nonzero: usize,
}

/// Selection of `(bottom, top)` coloring pairs.
pub fn projector_pairs(sn: &StringNet, cols: &[Vec<usize>], samples: Option<(usize, u64)>) -> Vec<(usize, usize)> {
    match samples {
        None => (0..cols.len()).flat_map(|a| (0..cols.len()).map(move |b| (a, b))).collect(),
        Some((n, seed)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let index: HashMap<u128, usize> = cols.iter().enumerate().map(|(i, j)| (sn.pk.encode(j), i)).collect();
            let idx: Vec<usize> = (0..cols.len()).collect();
            (0..n)
                .map(|i| {
                    let a = *idx.choose(&mut rng).unwrap();
                    if i % 2 == 0 {
                        let img = sn.apply_all_bp(&StateVector::basis_state(Basis::Spin, sn.pk.encode(&cols[a])));
                        let mut keys: Vec<u128> = img.amps.keys().copied().collect();
                        keys.sort_unstable();
                        if let Some(k) = keys.choose(&mut rng) {
                            return (a, index[k]);
                        }
                    }
                    (a, *idx.choose(&mut rng).unwrap())
                })
                .collect()
        }
    }
}

/// Compares `⟨S1|Π_p B_p|S0⟩` with cylinder amplitudes for every order in `orders`.
pub fn compare_projector(sn: &StringNet, cylinders: &[CylinderComplex], weights: BoundaryWeights, samples: Option<(usize, u64)>) -> Result<ProjectorComparison> {
    let data = sn.data;
    let lat = sn.lat;
    let cols = sn.admissible_colorings();
    let pairs = projector_pairs(sn, &cols, samples);
    let mut images: HashMap<usize, StateVector> = HashMap::new();
    for &(a, _) in &pairs {
        images
            .entry(a)
            .or_insert_with(|| sn.apply_all_bp(&StateVector::basis_state(Basis::Spin, sn.pk.encode(&cols[a]))));
    }
    let rows: Vec<(f64, f64, bool)> = pairs
        .par_iter()
        .map(|&(a, b)| -> Result<(f64, f64, bool)> {
            let lhs = images[&a].get(sn.pk.encode(&cols[b]));
            let mut dev: f64 = 0.0;
            let mut vals = Vec::new();
            for cyl in cylinders {
                let col = cyl.coloring(lat, data, &cols[a], &cols[b]);
                let z = tv_boundary(&cyl.complex, data, sn.f, &col, weights, TV_BUDGET)?.value;
                dev = dev.max((z - lhs).norm());
                vals.push(z);
            }
            let spread = vals.iter().map(|z| (z - vals[0]).norm()).fold(0.0, f64::max);
            Ok((dev, spread, lhs.norm() > 1e-12))
        })
        .collect::<Result<_>>()?;
    Ok(ProjectorComparison {
        deviation: rows.iter().map(|r| r.0).fold(0.0, f64::max),
        order_spread: rows.iter().map(|r| r.1).fold(0.0, f64::max),
        pairs: rows.len(),
        nonzero: rows.iter().filter(|r| r.2).count(),
    })
}

/// Cylinder amplitudes over all admissible coloring pairs, as a dense matrix.
pub fn cylinder_matrix(sn: &StringNet, cyl: &CylinderComplex, cols: &[Vec<usize>]) -> Result<Vec<Vec<C64>>> {
    (0..cols.len())
        .into_par_iter()
        .map(|a| {
            (0..cols.len())
                .map(|b| {
                    let col = cyl.coloring(sn.lat, sn.data, &cols[a], &cols[b]);
                    Ok(tv_boundary(&cyl.complex, sn.data, sn.f, &col, BoundaryWeights::HalfEdge, TV_BUDGET)?.value)
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex3::{bundled, BUNDLED};

    fn closed(name: &str) -> GluedComplex3 {
        GluedComplex3::parse(bundled(name).unwrap()).unwrap()
    }

    #[test]
    fn sphere_values() {
        for (g, want) in [("Z2", 0.5), ("S3", 1.0 / 6.0)] {
            let d = RepData::build(g).unwrap();
            let z = tv_closed(&closed("sphere_d4"), &d, &d.f, TV_BUDGET).unwrap();
            assert!((z.value - C64::new(want, 0.0)).norm() < 1e-9, "{g}: {:?}", z.value);
        }
    }

    #[test]
    fn tv_equals_dw_on_bundled() {
        for g in ["Z2", "Z3", "Z4", "S3"] {
            let d = RepData::build(g).unwrap();
            for name in BUNDLED {
                let cx = closed(name);
                let tv = tv_closed(&cx, &d, &d.f, TV_BUDGET).unwrap().value;
                let dw = dw_value(&cx, &d.group, DW_BUDGET).unwrap();
                assert!((tv - C64::new(dw, 0.0)).norm() < 1e-8, "{g} {name}: {tv} vs {dw}");
            }
        }
    }

    #[test]
    fn cylinder_counts() {
        let lat = Honeycomb::torus(2, 2).unwrap();
        let a = build_cylinder_complex(&lat, &[0, 1, 2, 3], 1).unwrap();
        let b = build_cylinder_complex(&lat, &[2, 0, 3, 1], 1).unwrap();
        assert_eq!(a.complex.num_tets(), 24);
        assert_eq!(a.complex.boundary_faces.len(), 16);
        assert_eq!((a.complex.num_vertices, a.complex.num_edges), (8, 40));
        assert_ne!(a.complex.gluings, b.complex.gluings);
        let bfaces = |c: &CylinderComplex| {
            let mut v: Vec<Vec<Tag>> = c
                .complex
                .boundary_faces
                .iter()
                .map(|&(t, k)| {
                    let mut f: Vec<Tag> = (0..4).filter(|&m| m != k).map(|m| c.tags[t][m]).collect();
                    f.sort();
                    f
                })
                .collect();
            v.sort();
            v
        };
        assert_eq!(bfaces(&a), bfaces(&b));
        let d = RepData::build("Z2").unwrap();
        let col = a.coloring(&lat, &d, &[0; 12], &[0; 12]);
        assert!(matches!(
            tv_boundary(&a.complex, &d, &d.f, &col, BoundaryWeights::VertexEdge, TV_BUDGET),
            Err(Error::StructureUnsupported(_))
        ));
    }

    #[test]
    fn boundary_errors() {
        let d = RepData::build("Z2").unwrap();
        let cx = GluedComplex3::parse("tetrahedra 1\ntet 0 - - - -\n").unwrap();
        let mut col: BoundaryColoring = (0..6).map(|e| (e, 0)).collect();
        let z = tv_boundary(&cx, &d, &d.f, &col, BoundaryWeights::HalfEdge, TV_BUDGET).unwrap();
        assert_eq!(z.terms, 1);
        col.insert(0, 1);
        assert!(matches!(
            tv_boundary(&cx, &d, &d.f, &col, BoundaryWeights::HalfEdge, TV_BUDGET),
            Err(Error::InadmissibleBoundary(_))
        ));
        assert!(matches!(tv_closed(&cx, &d, &d.f, TV_BUDGET), Err(Error::HasBoundary)));
    }
}

#[cfg(test)]
mod cylinder_tests {
    use super::*;

    fn compare(g: &str, samples: Option<(usize, u64)>) -> ProjectorComparison {
        let lat = Honeycomb::torus(2, 2).unwrap();
        let d = RepData::build(g).unwrap();
        let sn = StringNet::new(&d, &lat).unwrap();
        let cyls: Vec<CylinderComplex> = [[0, 1, 2, 3], [3, 1, 0, 2]]
            .iter()
            .map(|o| build_cylinder_complex(&lat, o, 1).unwrap())
            .collect();
        compare_projector(&sn, &cyls, BoundaryWeights::HalfEdge, samples).unwrap()
    }

    #[test]
    fn z2_cylinder_is_projector() {
        let r = compare("Z2", None);
        assert!(r.deviation < 1e-9 && r.order_spread < 1e-9, "{r:?}");
        assert!(r.nonzero > 0);
    }

    #[test]
    fn z3_cylinder_is_projector() {
        let r = compare("Z3", Some((40, 3)));
        assert!(r.deviation < 1e-9, "{r:?}");
        assert!(r.nonzero > 0);
    }

    #[test]
    fn s3_cylinder_is_projector() {
        let r = compare("S3", Some((12, 5)));
        assert!(r.deviation < 1e-9 && r.order_spread < 1e-9, "{r:?}");
        assert!(r.nonzero > 0);
    }

    #[test]
    fn stacking_multiplies() {
        let lat = Honeycomb::torus(2, 2).unwrap();
        let d = RepData::build("Z2").unwrap();
        let sn = StringNet::new(&d, &lat).unwrap();
        let cols = sn.admissible_colorings();
        let one = build_cylinder_complex(&lat, &[0, 1, 2, 3], 1).unwrap();
        let m = cylinder_matrix(&sn, &one, &cols).unwrap();
        let two = build_cylinder_complex(&lat, &[0, 1, 2, 3], 2).unwrap();
        for (a, b) in [(0, 0), (0, 5), (3, 17), (31, 31)] {
            let sq: C64 = (0..cols.len()).map(|c| m[a][c] * m[c][b]).sum();
            assert!((sq - m[a][b]).norm() < 1e-9);
            let col = two.coloring(&lat, &d, &cols[a], &cols[b]);
            let z = tv_boundary(&two.complex, &d, &d.f, &col, BoundaryWeights::HalfEdge, 1 << 50).unwrap().value;
            assert!((z - sq).norm() < 1e-9, "{a} {b}: {z} vs {sq}");
        }
    }

    #[test]
    fn twisted_gluing_breaks_agreement() {
        let lat = Honeycomb::torus(2, 2).unwrap();
        let d = RepData::build("Z2").unwrap();
        let sn = StringNet::new(&d, &lat).unwrap();
        let cyl = build_cylinder_complex(&lat, &[0, 1, 2, 3], 1).unwrap();
        let bad = cyl.corrupted(0).unwrap();
        let r = compare_projector(&sn, &[bad], BoundaryWeights::HalfEdge, None).unwrap();
        assert!(r.deviation > 1e-3, "{r:?}");
    }
}
