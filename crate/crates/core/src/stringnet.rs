//! Levin-Wen operators in the spin-network basis.

use crate::error::{Error, Result};
use crate::fsym::{FSymbolTable, RepData};
use crate::lattice::{slot_end, slot_start, Honeycomb, Slot};
use crate::linalg::Mat;
use crate::state::{admissible_colorings, is_admissible, vertex_labels, Basis, Packing, StateVector, PRUNE};
use crate::C64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::HashMap;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// A honeycomb string-net model with a given F table.
#[derive(Clone)]
pub struct StringNet<'a> {
    pub data: &'a RepData,
    pub f: &'a FSymbolTable,
    pub lat: &'a Honeycomb,
    pub pk: Packing,
}

/// Labels of one plaquette read along its counterclockwise walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlaquetteLabels {
    /// Inner edge `k` oriented along the walk.
    pub inner: [usize; 6],
    /// External leg at the walk's vertex `k`, oriented away from it.
    pub legs: [usize; 6],
}

impl<'a> StringNet<'a> {
    pub fn new(data: &'a RepData, lat: &'a Honeycomb) -> Result<Self> {
        Self::with_table(data, &data.f, lat)
    }

    pub fn with_table(data: &'a RepData, f: &'a FSymbolTable, lat: &'a Honeycomb) -> Result<Self> {
        Ok(StringNet {
            data,
            f,
            lat,
            pk: Packing::for_model(data, &lat.graph)?,
        })
    }

    pub fn check_vertex(&self, j: &[usize], v: usize) -> bool {
        let [a, b, x] = vertex_labels(&self.lat.graph, &self.data.fusion, j, v);
        self.data.fusion.admissible(a, b, x)
    }

    pub fn is_admissible(&self, j: &[usize]) -> bool {
        is_admissible(&self.lat.graph, &self.data.fusion, j)
    }

    pub fn admissible_colorings(&self) -> Vec<Vec<usize>> {
        admissible_colorings(&self.lat.graph, &self.data.fusion)
    }

    fn oriented(&self, (e, fwd): Slot, j: &[usize]) -> usize {
        if fwd {
            j[e]
        } else {
            self.data.dual(j[e])
        }
    }

    fn leg_label(&self, v: usize, e: usize, j: &[usize]) -> usize {
        if self.lat.graph.src[e] == v {
            j[e]
        } else {
            self.data.dual(j[e])
        }
    }

    fn external_edge(&self, p: usize, v: usize) -> usize {
        let walk = self.lat.plaquette_boundary(p);
        *self.lat.graph.vedges[v]
            .iter()
            .find(|e| !walk.iter().any(|s| s.0 == **e))
            .expect("trivalent vertex has an external leg")
    }

    pub fn plaquette_labels(&self, p: usize, j: &[usize]) -> PlaquetteLabels {
        let walk = self.lat.plaquette_boundary(p);
        let verts = self.lat.plaquette_vertices(p);
        PlaquetteLabels {
            inner: std::array::from_fn(|k| self.oriented(walk[k], j)),
            legs: std::array::from_fn(|k| self.leg_label(verts[k], self.external_edge(p, verts[k]), j)),
        }
    }

    /// Six-F action of `B_p^s` on one basis coloring, as `(new coloring, amplitude)` pairs.
    pub fn bp_s_terms(&self, s: usize, p: usize, j: &[usize]) -> Vec<(Vec<usize>, C64)> {
        let walk = *self.lat.plaquette_boundary(p);
        let PlaquetteLabels { inner: u, legs } = self.plaquette_labels(p, j);
        let du = |x: usize| self.data.dual(x);
        let r = self.data.rank();
        let sd = du(s);
        let mut out = Vec::new();
        let mut up = [0usize; 6];
        // vertex k+1 sits between inner edges k and k+1
        let factor = |k: usize, up: &[usize; 6]| {
            let k1 = (k + 1) % 6;
            self.f.get(legs[k1], du(u[k]), u[k1], sd, up[k1], du(up[k]))
        };
        fn rec(
            k: usize,
            amp: C64,
            up: &mut [usize; 6],
            r: usize,
            factor: &dyn Fn(usize, &[usize; 6]) -> C64,
            out: &mut Vec<([usize; 6], C64)>,
        ) {
            if k == 6 {
                let a = amp * factor(5, up);
                if a.norm() > PRUNE {
                    out.push((*up, a));
                }
                return;
            }
            for x in 0..r {
                up[k] = x;
                let a = if k == 0 { amp } else { amp * factor(k - 1, up) };
                if a.norm() > PRUNE {
                    rec(k + 1, a, up, r, factor, out);
                }
            }
        }
        let mut raw = Vec::new();
        rec(0, c(1.0), &mut up, r, &factor, &mut raw);
        for (up, a) in raw {
            let mut jn = j.to_vec();
            for (k, &(e, fwd)) in walk.iter().enumerate() {
                jn[e] = if fwd { up[k] } else { du(up[k]) };
            }
            debug_assert!(self.is_admissible(&jn), "plaquette operator left the admissible subspace");
            out.push((jn, a));
        }
        out
    }

    fn apply_terms<F>(&self, state: &StateVector, terms: F) -> StateVector
    where
        F: Fn(&[usize]) -> Vec<(Vec<usize>, C64)> + Sync,
    {
        assert_eq!(state.basis, Basis::Spin);
        let entries: Vec<(&u128, &C64)> = state.amps.iter().collect();
        let merged = entries
            .par_iter()
            .fold(HashMap::new, |mut acc: HashMap<u128, C64>, (k, a)| {
                let j = self.pk.decode(**k);
                for (jn, t) in terms(&j) {
                    *acc.entry(self.pk.encode(&jn)).or_insert(c(0.0)) += **a * t;
                }
                acc
            })
            .reduce(HashMap::new, |mut x, y| {
                for (k, v) in y {
                    *x.entry(k).or_insert(c(0.0)) += v;
                }
                x
            });
        StateVector {
            basis: Basis::Spin,
            amps: merged,
        }
        .prune()
    }

    pub fn apply_bp_s(&self, s: usize, p: usize, state: &StateVector) -> StateVector {
        self.apply_terms(state, |j| self.bp_s_terms(s, p, j))
    }

    /// `B_p = Σ_s (d_s/|G|) B_p^s`.
    pub fn bp_terms(&self, p: usize, j: &[usize]) -> Vec<(Vec<usize>, C64)> {
        let order = self.data.order() as f64;
        let mut acc: HashMap<Vec<usize>, C64> = HashMap::new();
        for s in 0..self.data.rank() {
            let w = self.data.dim(s) as f64 / order;
            for (jn, a) in self.bp_s_terms(s, p, j) {
                *acc.entry(jn).or_insert(c(0.0)) += a * w;
            }
        }
        let mut v: Vec<_> = acc.into_iter().filter(|(_, a)| a.norm() > PRUNE).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }

    pub fn apply_bp(&self, p: usize, state: &StateVector) -> StateVector {
        self.apply_terms(state, |j| self.bp_terms(p, j))
    }

    /// `Π_p B_p` in plaquette index order.
    pub fn apply_all_bp(&self, state: &StateVector) -> StateVector {
        (0..self.lat.num_plaquettes()).fold(state.clone(), |s, p| self.apply_bp(p, &s))
    }

    /// Sum of vertex penalties and `-Σ_p B_p`; inadmissible components are
    /// penalized by one unit per violated vertex.
    pub fn apply_hamiltonian(&self, state: &StateVector) -> StateVector {
        let mut out = StateVector::zero(Basis::Spin);
        for (&k, &a) in &state.amps {
            let j = self.pk.decode(k);
            let good = (0..self.lat.num_vertices()).filter(|&v| self.check_vertex(&j, v)).count();
            out.add(k, a * c(-(good as f64)));
        }
        for p in 0..self.lat.num_plaquettes() {
            out.axpy(c(-1.0), &self.apply_bp(p, state));
        }
        out.prune()
    }

    /// `⟨S'|M|S⟩` for an operator diagonal in the group basis that depends
    /// only on the holonomy of `p`, written as `Σ_s w_s tr(X_s D^s(hol))`.
    ///
    /// The group sums are evaluated edge by edge around the plaquette as a
    /// ring of transfer matrices; edges off the plaquette pair the two
    /// networks' indices directly.
    pub fn fourier_element(&self, p: usize, j: &[usize], jp: &[usize], inserts: &[(usize, Mat, C64)]) -> C64 {
        let lat = self.lat;
        let graph = &lat.graph;
        let walk = *lat.plaquette_boundary(p);
        if (0..graph.num_edges()).any(|e| j[e] != jp[e] && !walk.iter().any(|s| s.0 == e)) {
            return c(0.0);
        }
        if !self.is_admissible(j) || !self.is_admissible(jp) {
            return c(0.0);
        }
        let data = self.data;
        let verts = lat.plaquette_vertices(p);
        // Q_k: vertex k with its external index summed; indices (in_ket, in_bra, out_ket, out_bra)
        let q: Vec<(usize, usize, usize, usize, Vec<C64>)> = (0..6)
            .map(|k| {
                let v = verts[k];
                let ein = walk[(k + 5) % 6].0;
                let eout = walk[k].0;
                let lk = vertex_labels(graph, &data.fusion, j, v);
                let lb = vertex_labels(graph, &data.fusion, jp, v);
                let tk = data.intertwiner(lk[0], lk[1], lk[2]).expect("admissible");
                let tb = data.intertwiner(lb[0], lb[1], lb[2]).expect("admissible");
                let slot = |e: usize| graph.slot_of(v, e).unwrap();
                let (si, so) = (slot(ein), slot(eout));
                let sx = 3 - si - so;
                let dk = [tk.dims.0, tk.dims.1, tk.dims.2];
                let db = [tb.dims.0, tb.dims.1, tb.dims.2];
                let (ki, ko, bi, bo) = (dk[si], dk[so], db[si], db[so]);
                let mut t = vec![c(0.0); ki * bi * ko * bo];
                for a in 0..ki {
                    for b in 0..bi {
                        for x in 0..ko {
                            for y in 0..bo {
                                let mut sum = c(0.0);
                                for z in 0..dk[sx] {
                                    let mut ik = [0; 3];
                                    ik[si] = a;
                                    ik[so] = x;
                                    ik[sx] = z;
                                    let mut ib = [0; 3];
                                    ib[si] = b;
                                    ib[so] = y;
                                    ib[sx] = z;
                                    sum += tk.get(ik[0], ik[1], ik[2]) * tb.get(ib[0], ib[1], ib[2]).conj();
                                }
                                t[((a * bi + b) * ko + x) * bo + y] = sum;
                            }
                        }
                    }
                }
                (ki, bi, ko, bo, t)
            })
            .collect();
        let group = &data.group;
        let mut total = c(0.0);
        for (s, x, w) in inserts {
            let s = *s;
            let ds = data.dim(s);
            let ds_irr = &data.irreps[s];
            // ring state: rows (a, ket, bra) at the current point, columns the starting index
            let (k0, b0) = (q[0].0, q[0].1);
            let n0 = ds * k0 * b0;
            let mut ring = vec![c(0.0); n0 * n0];
            for i in 0..n0 {
                ring[i * n0 + i] = c(1.0);
            }
            let mut rows = n0;
            for k in 0..6 {
                // vertex k
                let (ki, bi, ko, bo, ref t) = q[k];
                debug_assert_eq!(rows, ds * ki * bi);
                let nrows = ds * ko * bo;
                let mut next = vec![c(0.0); nrows * n0];
                for a in 0..ds {
                    for ik in 0..ki {
                        for ib in 0..bi {
                            let r = (a * ki + ik) * bi + ib;
                            for ok in 0..ko {
                                for ob in 0..bo {
                                    let qv = t[((ik * bi + ib) * ko + ok) * bo + ob];
                                    if qv.norm() == 0.0 {
                                        continue;
                                    }
                                    let nr = (a * ko + ok) * bo + ob;
                                    for col in 0..n0 {
                                        next[nr * n0 + col] += qv * ring[r * n0 + col];
                                    }
                                }
                            }
                        }
                    }
                }
                ring = next;
                rows = nrows;
                // edge k: from walk vertex k to k+1
                let (e, fwd) = walk[k];
                let (je, jpe) = (j[e], jp[e]);
                let (dj, djp) = (data.dim(je), data.dim(jpe));
                let (kn, bn) = (q[(k + 1) % 6].0, q[(k + 1) % 6].1);
                debug_assert_eq!((kn, bn), (dj, djp));
                let nrows = ds * kn * bn;
                let mut et = vec![c(0.0); nrows * rows];
                for g in 0..group.order() {
                    let m = if fwd { g } else { group.inv(g) };
                    let dsm = &ds_irr.matrices[m];
                    let dj_m = &data.irreps[je].matrices[g];
                    let djp_m = &data.irreps[jpe].matrices[g];
                    for a2 in 0..ds {
                        for a in 0..ds {
                            let sa = dsm.get(a2, a);
                            if sa.norm() == 0.0 {
                                continue;
                            }
                            for xs in 0..dj {
                                for xe in 0..dj {
                                    // β sits at the source, α at the target
                                    let dk = if fwd { dj_m.get(xe, xs) } else { dj_m.get(xs, xe) };
                                    if dk.norm() == 0.0 {
                                        continue;
                                    }
                                    for ys in 0..djp {
                                        for ye in 0..djp {
                                            let db = if fwd { djp_m.get(ye, ys) } else { djp_m.get(ys, ye) };
                                            let r_out = (a2 * kn + xe) * bn + ye;
                                            let r_in = (a * dj + xs) * djp + ys;
                                            et[r_out * rows + r_in] += sa * dk * db.conj();
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
                let mut next = vec![c(0.0); nrows * n0];
                for ro in 0..nrows {
                    for ri in 0..rows {
                        let ev = et[ro * rows + ri];
                        if ev.norm() == 0.0 {
                            continue;
                        }
                        for col in 0..n0 {
                            next[ro * n0 + col] += ev * ring[ri * n0 + col];
                        }
                    }
                }
                ring = next;
                rows = nrows;
            }
            debug_assert_eq!(rows, n0);
            let mut tr = c(0.0);
            for a0 in 0..ds {
                for a in 0..ds {
                    let xv = x.get(a0, a);
                    if xv.norm() == 0.0 {
                        continue;
                    }
                    for ik in 0..k0 {
                        for ib in 0..b0 {
                            let r = (a * k0 + ik) * b0 + ib;
                            let col = (a0 * k0 + ik) * b0 + ib;
                            tr += xv * ring[r * n0 + col];
                        }
                    }
                }
            }
            total += w * tr;
        }
        let order = data.order() as f64;
        let norm: f64 = walk
            .iter()
            .map(|&(e, _)| ((data.dim(j[e]) * data.dim(jp[e])) as f64).sqrt() / order)
            .product();
        total * norm
    }

    /// Insertions turning `fourier_element` into `⟨S'|B_g(p)|S⟩`.
    pub fn delta_inserts(&self, g: usize) -> Vec<(usize, Mat, C64)> {
        let order = self.data.order() as f64;
        let gi = self.data.group.inv(g);
        (0..self.data.rank())
            .map(|s| (s, self.data.irreps[s].matrices[gi].clone(), c(self.data.dim(s) as f64 / order)))
            .collect()
    }

    /// Insertion turning `fourier_element` into multiplication by `χ_s(hol)`.
    pub fn character_insert(&self, s: usize) -> Vec<(usize, Mat, C64)> {
        vec![(s, Mat::identity(self.data.dim(s)), c(1.0))]
    }

    /// Amplitude `⟨S'|B_p|S⟩` from the six-F operator.
    pub fn bp_element(&self, p: usize, j: &[usize], jp: &[usize]) -> C64 {
        self.bp_terms(p, j)
            .into_iter()
            .find(|(jn, _)| jn.as_slice() == jp)
            .map(|t| t.1)
            .unwrap_or(c(0.0))
    }

    pub fn bp_s_element(&self, s: usize, p: usize, j: &[usize], jp: &[usize]) -> C64 {
        self.bp_s_terms(s, p, j)
            .into_iter()
            .find(|(jn, _)| jn.as_slice() == jp)
            .map(|t| t.1)
            .unwrap_or(c(0.0))
    }

    /// Admissible colorings grouped by their labels off `p`.
    pub fn plaquette_sectors(&self, p: usize, colorings: &[Vec<usize>]) -> Vec<Vec<usize>> {
        let walk = self.lat.plaquette_boundary(p);
        let mut by: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
        for (i, j) in colorings.iter().enumerate() {
            let mut key = j.clone();
            for s in walk {
                key[s.0] = usize::MAX;
            }
            by.entry(key).or_default().push(i);
        }
        let mut v: Vec<_> = by.into_values().collect();
        v.sort();
        v
    }
}

/// Which pairs of admissible colorings a comparison visits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairSelection {
    /// Every ordered pair.
    Exhaustive,
    /// Random pairs agreeing off the plaquette.
    Sampled { count: usize, seed: u64 },
}

/// Pairs of coloring indices for a plaquette comparison.
pub fn select_pairs(sn: &StringNet, p: usize, colorings: &[Vec<usize>], sel: PairSelection) -> Vec<(usize, usize)> {
    match sel {
        PairSelection::Exhaustive => {
            let n = colorings.len();
            (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).collect()
        }
        PairSelection::Sampled { count, seed } => {
            let sectors = sn.plaquette_sectors(p, colorings);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let weights: Vec<&Vec<usize>> = sectors.iter().filter(|s| s.len() > 1).collect();
            let pool = if weights.is_empty() { sectors.iter().collect() } else { weights };
            (0..count)
                .map(|_| {
                    let sec = pool.choose(&mut rng).unwrap();
                    (*sec.choose(&mut rng).unwrap(), *sec.choose(&mut rng).unwrap())
                })
                .collect()
        }
    }
}

/// Max `|⟨S'|B_1(p)|S⟩_Fourier - ⟨S'|B_p|S⟩_six-F|` over the selected pairs.
pub fn duality_compare_bp(sn: &StringNet, p: usize, sel: PairSelection) -> f64 {
    let cols = sn.admissible_colorings();
    let pairs = select_pairs(sn, p, &cols, sel);
    let ins = sn.delta_inserts(0);
    pairs
        .par_iter()
        .map(|&(a, b)| {
            let lhs = sn.fourier_element(p, &cols[a], &cols[b], &ins);
            let rhs = sn.bp_element(p, &cols[a], &cols[b]);
            (lhs - rhs).norm()
        })
        .reduce(|| 0.0, f64::max)
}

/// Caller-supplied string matrices `Ω^{i'}_{s s' i}`, all of size `dim × dim`.
/// Missing entries are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaData {
    pub dim: usize,
    pub entries: HashMap<[usize; 4], Mat>,
}

impl OmegaData {
    /// `Ω^{i'}_{s s' i} = δ_{s s'} Id` for every label combination.
    pub fn identity(rank: usize, dim: usize) -> Self {
        let mut entries = HashMap::new();
        for ip in 0..rank {
            for s in 0..rank {
                for i in 0..rank {
                    entries.insert([ip, s, s, i], Mat::identity(dim));
                }
            }
        }
        OmegaData { dim, entries }
    }

    pub fn get(&self, ip: usize, s: usize, sp: usize, i: usize) -> Option<&Mat> {
        self.entries.get(&[ip, s, sp, i])
    }

    /// Parses `dim <m>` followed by blocks `omega <i'> <s> <s'> <i>` with
    /// `m*m` complex entries as `re im` pairs in row-major order.
    pub fn parse(text: &str, rank: usize) -> Result<Self> {
        let mut dim = None;
        let mut entries = HashMap::new();
        let mut pending: Option<([usize; 4], Vec<C64>, usize)> = None;
        let mut last_line = 0;
        let err = |line: usize, column: usize, message: String| Error::Parse { line, column, message };
        for (ln, raw) in text.lines().enumerate() {
            let line = ln + 1;
            last_line = line;
            let body = raw.split('#').next().unwrap();
            let mut tokens = Vec::new();
            let mut col = 0;
            for piece in body.split_inclusive(char::is_whitespace) {
                let t = piece.trim();
                if !t.is_empty() {
                    tokens.push((col + 1 + (piece.len() - piece.trim_start().len()), t));
                }
                col += piece.len();
            }
            if tokens.is_empty() {
                continue;
            }
            if let Some((labels, vals, start)) = pending.as_mut() {
                let m = dim.unwrap();
                if tokens.len() % 2 != 0 {
                    return Err(err(line, tokens.last().unwrap().0, "expected `re im` pairs".into()));
                }
                for pair in tokens.chunks(2) {
                    let re: f64 = pair[0].1.parse().map_err(|_| err(line, pair[0].0, format!("bad number `{}`", pair[0].1)))?;
                    let im: f64 = pair[1].1.parse().map_err(|_| err(line, pair[1].0, format!("bad number `{}`", pair[1].1)))?;
                    vals.push(C64::new(re, im));
                }
                if vals.len() > m * m {
                    return Err(err(line, 1, format!("block opened on line {start} has more than {} entries", m * m)));
                }
                if vals.len() == m * m {
                    let labels = *labels;
                    let vals = std::mem::take(vals);
                    if entries.insert(labels, Mat::from_rows(m, vals)).is_some() {
                        return Err(err(line, 1, format!("duplicate block {labels:?}")));
                    }
                    pending = None;
                }
                continue;
            }
            match tokens[0].1 {
                "dim" => {
                    if tokens.len() != 2 {
                        return Err(err(line, tokens[0].0, "expected `dim <m>`".into()));
                    }
                    let m: usize = tokens[1].1.parse().map_err(|_| err(line, tokens[1].0, "bad dimension".into()))?;
                    if m == 0 {
                        return Err(err(line, tokens[1].0, "dimension must be positive".into()));
                    }
                    dim = Some(m);
                }
                "omega" => {
                    if dim.is_none() {
                        return Err(err(line, tokens[0].0, "`dim` must come first".into()));
                    }
                    if tokens.len() != 5 {
                        return Err(err(line, tokens[0].0, "expected `omega <i'> <s> <s'> <i>`".into()));
                    }
                    let mut labels = [0; 4];
                    for (k, &(colno, t)) in tokens[1..].iter().enumerate() {
                        let x: usize = t.parse().map_err(|_| err(line, colno, format!("bad label `{t}`")))?;
                        if x >= rank {
                            return Err(err(line, colno, format!("label {x} out of range")));
                        }
                        labels[k] = x;
                    }
                    pending = Some((labels, Vec::new(), line));
                }
                other => return Err(err(line, tokens[0].0, format!("unknown directive `{other}`"))),
            }
        }
        if let Some((_, _, start)) = pending {
            return Err(err(last_line, 1, format!("block opened on line {start} is incomplete")));
        }
        let dim = dim.ok_or_else(|| err(1, 1, "missing `dim`".into()))?;
        Ok(OmegaData { dim, entries })
    }
}

/// An edge path in the honeycomb; closed when it ends where it starts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StringPath {
    pub slots: Vec<Slot>,
}

impl StringPath {
    /// Path through consecutive vertices.
    pub fn from_vertices(lat: &Honeycomb, verts: &[usize]) -> Result<Self> {
        if verts.len() < 2 {
            return Err(Error::NotAPath("a path needs at least two vertices".into()));
        }
        let g = &lat.graph;
        let mut slots = Vec::with_capacity(verts.len() - 1);
        for w in verts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if a >= g.num_vertices() || b >= g.num_vertices() {
                return Err(Error::NotAPath(format!("vertex out of range in {a}-{b}")));
            }
            let slot = g.vedges[a]
                .iter()
                .find_map(|&e| {
                    if g.src[e] == a && g.tgt[e] == b {
                        Some((e, true))
                    } else if g.tgt[e] == a && g.src[e] == b {
                        Some((e, false))
                    } else {
                        None
                    }
                })
                .ok_or_else(|| Error::NotAPath(format!("vertices {a} and {b} are not adjacent")))?;
            slots.push(slot);
        }
        let path = StringPath { slots };
        path.validate(lat)?;
        Ok(path)
    }

    /// Clockwise boundary of `p`.
    pub fn plaquette_cw(lat: &Honeycomb, p: usize) -> Self {
        let walk = lat.plaquette_boundary(p);
        StringPath {
            slots: walk.iter().rev().map(|&(e, f)| (e, !f)).collect(),
        }
    }

    pub fn plaquette_ccw(lat: &Honeycomb, p: usize) -> Self {
        StringPath {
            slots: lat.plaquette_boundary(p).to_vec(),
        }
    }

    pub fn is_closed(&self, lat: &Honeycomb) -> bool {
        slot_start(&lat.graph, self.slots[0]) == slot_end(&lat.graph, *self.slots.last().unwrap())
    }

    fn validate(&self, lat: &Honeycomb) -> Result<()> {
        let g = &lat.graph;
        for w in self.slots.windows(2) {
            if slot_end(g, w[0]) != slot_start(g, w[1]) {
                return Err(Error::NotAPath("consecutive edges do not meet".into()));
            }
        }
        let mut seen: Vec<usize> = self.slots.iter().map(|s| s.0).collect();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::NotAPath("path reuses an edge".into()));
        }
        Ok(())
    }

    /// Start and end vertices of an open path.
    pub fn endpoints(&self, lat: &Honeycomb) -> (usize, usize) {
        (
            slot_start(&lat.graph, self.slots[0]),
            slot_end(&lat.graph, *self.slots.last().unwrap()),
        )
    }
}

/// Turn-dependent string operator along `path` with types drawn from `types`.
///
/// Closed paths take the trace over the Ω matrix indices; open paths return
/// the `(row, col)` entry selected by `endpoint` (experimental).
pub struct StringOperator<'a> {
    pub path: StringPath,
    pub types: Vec<usize>,
    pub omega: &'a OmegaData,
    pub endpoint: (usize, usize),
}

#[derive(Clone, Copy)]
struct Corner {
    vertex: usize,
    /// Path positions of the incoming and outgoing edges.
    incoming: usize,
    outgoing: usize,
    left: bool,
    leg: usize,
}

impl<'a> StringNet<'a> {
    fn corners(&self, path: &StringPath, closed: bool) -> Result<Vec<Corner>> {
        let g = &self.lat.graph;
        let n = path.slots.len();
        let range: Vec<usize> = if closed { (0..n).collect() } else { (1..n).collect() };
        range
            .into_iter()
            .map(|k| {
                let incoming = (k + n - 1) % n;
                let (ein, eout) = (path.slots[incoming].0, path.slots[k].0);
                let v = slot_start(g, path.slots[k]);
                let left = self.lat.turns_left(v, ein, eout)?;
                let leg = *g.vedges[v].iter().find(|&&e| e != ein && e != eout).unwrap();
                Ok(Corner {
                    vertex: v,
                    incoming,
                    outgoing: k,
                    left,
                    leg,
                })
            })
            .collect()
    }

    /// Terms of the string operator acting on one coloring.
    pub fn string_terms(&self, op: &StringOperator, j: &[usize]) -> Result<Vec<(Vec<usize>, C64)>> {
        let om = op.omega;
        let m = om.dim;
        for (k, mat) in &om.entries {
            if mat.dim() != m {
                return Err(Error::ShapeMismatch(format!("omega block {k:?} is {}x{}, expected {m}x{m}", mat.dim(), mat.dim())));
            }
        }
        if !op.path.is_closed(self.lat) && (op.endpoint.0 >= m || op.endpoint.1 >= m) {
            return Err(Error::ShapeMismatch(format!("endpoint {:?} outside {m}x{m}", op.endpoint)));
        }
        let path = &op.path;
        let closed = path.is_closed(self.lat);
        let corners = self.corners(path, closed)?;
        let du = |x: usize| self.data.dual(x);
        let n = path.slots.len();
        let i: Vec<usize> = path.slots.iter().map(|&s| self.oriented(s, j)).collect();
        let legs: Vec<usize> = corners.iter().map(|cn| self.leg_label(cn.vertex, cn.leg, j)).collect();
        let v = &self.f.v;
        let r = self.data.rank();
        let nc = corners.len();
        // corner c owns type s_c; segment between corners c and c+1 is path edge corners[c].outgoing
        let mut out: HashMap<Vec<usize>, C64> = HashMap::new();
        let mut ip = vec![0usize; n];
        let mut s = vec![0usize; nc];
        let total = (r as u128).pow(n as u32) * (op.types.len() as u128).pow(nc as u32);
        if total > (1u128 << 26) {
            return Err(Error::BudgetExceeded {
                needed: total,
                budget: 1 << 26,
            });
        }
        let mut idx = vec![0usize; n + nc];
        let radix: Vec<usize> = std::iter::repeat(r).take(n).chain(std::iter::repeat(op.types.len()).take(nc)).collect();
        'outer: loop {
            for k in 0..n {
                ip[k] = idx[k];
            }
            for c_ in 0..nc {
                s[c_] = op.types[idx[n + c_]];
            }
            let mut amp = c(1.0);
            for (cn, cr) in corners.iter().enumerate() {
                let (a, b) = (cr.incoming, cr.outgoing);
                let sc = s[cn];
                let f = if cr.left {
                    self.f.get(legs[cn], du(i[b]), i[a], du(sc), ip[a], du(ip[b]))
                } else {
                    self.f.get(legs[cn], du(i[a]), i[b], sc, ip[b], du(ip[a]))
                };
                amp *= f;
                if amp.norm() == 0.0 {
                    break;
                }
            }
            if amp.norm() > PRUNE {
                let mut prod = Mat::identity(m);
                let mut zero = false;
                let segs = if closed { nc } else { nc.saturating_sub(1) };
                for cn in 0..segs {
                    let nx = (cn + 1) % nc;
                    let e = corners[cn].outgoing;
                    let (l0, l1) = (corners[cn].left, corners[nx].left);
                    let (sk, sk1) = (s[cn], s[nx]);
                    let w = v[i[e]] * v[sk] / v[ip[e]];
                    let factor = match (l0, l1) {
                        (false, true) => om.get(ip[e], sk, sk1, i[e]).map(|x| x.scale(c(w))),
                        (true, false) => om.get(ip[e], sk, sk1, i[e]).map(|x| x.conj().scale(c(w))),
                        _ => {
                            if sk == sk1 {
                                Some(Mat::identity(m))
                            } else {
                                None
                            }
                        }
                    };
                    match factor {
                        Some(fm) => prod = &prod * &fm,
                        None => {
                            zero = true;
                            break;
                        }
                    }
                }
                if !zero {
                    let t = if closed { prod.trace() } else { prod.get(op.endpoint.0, op.endpoint.1) };
                    let a = amp * t;
                    if a.norm() > PRUNE {
                        let mut jn = j.to_vec();
                        for (k, &(e, fwd)) in path.slots.iter().enumerate() {
                            jn[e] = if fwd { ip[k] } else { du(ip[k]) };
                        }
                        *out.entry(jn).or_insert(c(0.0)) += a;
                    }
                }
            }
            let mut d = 0;
            loop {
                if d == idx.len() {
                    break 'outer;
                }
                idx[d] += 1;
                if idx[d] < radix[d] {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
        }
        let mut v: Vec<_> = out.into_iter().filter(|(_, a)| a.norm() > PRUNE).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(v)
    }

    pub fn apply_string_operator(&self, op: &StringOperator, state: &StateVector) -> Result<StateVector> {
        let mut first_err = None;
        let mut terms: HashMap<u128, Vec<(Vec<usize>, C64)>> = HashMap::new();
        for &k in state.amps.keys() {
            match self.string_terms(op, &self.pk.decode(k)) {
                Ok(t) => {
                    terms.insert(k, t);
                }
                Err(e) => {
                    first_err = Some(e);
                    break;
                }
            }
        }
        if let Some(e) = first_err {
            return Err(e);
        }
        let mut out = StateVector::zero(Basis::Spin);
        for (k, a) in &state.amps {
            for (jn, t) in &terms[k] {
                out.add(self.pk.encode(jn), a * t);
            }
        }
        Ok(out.prune())
    }

    /// Vertices at which some component of `state` violates admissibility.
    pub fn vertex_violations(&self, state: &StateVector) -> Vec<usize> {
        let mut bad = vec![false; self.lat.num_vertices()];
        for &k in state.amps.keys() {
            let j = self.pk.decode(k);
            for (v, b) in bad.iter_mut().enumerate() {
                if !self.check_vertex(&j, v) {
                    *b = true;
                }
            }
        }
        bad.iter().enumerate().filter(|x| *x.1).map(|x| x.0).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(name: &str) -> (RepData, Honeycomb) {
        (RepData::build(name).unwrap(), Honeycomb::torus(2, 2).unwrap())
    }

    #[test]
    fn trivial_coloring_is_admissible() {
        let (d, lat) = setup("S3");
        let sn = StringNet::new(&d, &lat).unwrap();
        let j = vec![0; 12];
        assert!((0..8).all(|v| sn.check_vertex(&j, v)));
        let (d2, _) = setup("Z2");
        let sn2 = StringNet::new(&d2, &lat).unwrap();
        let mut j = vec![0; 12];
        j[3] = 1;
        let v = lat.graph.src[3];
        assert!(!sn2.check_vertex(&j, v));
    }

    #[test]
    fn trivial_type_is_identity() {
        let (d, lat) = setup("S3");
        let sn = StringNet::new(&d, &lat).unwrap();
        for j in sn.admissible_colorings().iter().step_by(97).take(20) {
            let t = sn.bp_s_terms(0, 1, j);
            assert_eq!(t.len(), 1);
            assert_eq!(&t[0].0, j);
            assert!((t[0].1 - c(1.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn z2_flips_plaquette() {
        let (d, lat) = setup("Z2");
        let sn = StringNet::new(&d, &lat).unwrap();
        let j = vec![0; 12];
        let t = sn.bp_s_terms(1, 2, &j);
        assert_eq!(t.len(), 1);
        let mut want = vec![0; 12];
        for s in lat.plaquette_boundary(2) {
            want[s.0] = 1;
        }
        assert_eq!(t[0].0, want);
        assert!((t[0].1 - c(1.0)).norm() < 1e-12);
    }

    #[test]
    fn bp_projector_and_commuting() {
        let (d, lat) = setup("S3");
        let sn = StringNet::new(&d, &lat).unwrap();
        let cols = sn.admissible_colorings();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut st = StateVector::zero(Basis::Spin);
        for j in cols.choose_multiple(&mut rng, 6) {
            st.add(sn.pk.encode(j), C64::new(rand::Rng::gen_range(&mut rng, -1.0..1.0), rand::Rng::gen_range(&mut rng, -1.0..1.0)));
        }
        let b = sn.apply_bp(0, &st);
        assert!(sn.apply_bp(0, &b).max_abs_diff(&b) < 1e-10);
        let ab = sn.apply_bp(1, &b);
        let ba = sn.apply_bp(0, &sn.apply_bp(1, &st));
        assert!(ab.max_abs_diff(&ba) < 1e-10);
    }

    #[test]
    fn cw_string_reproduces_bp_s() {
        for name in ["Z3", "S3"] {
            let (d, lat) = setup(name);
            let sn = StringNet::new(&d, &lat).unwrap();
            let om = OmegaData::identity(d.rank(), 1);
            let cols = sn.admissible_colorings();
            for s in 0..d.rank() {
                let op = StringOperator {
                    path: StringPath::plaquette_cw(&lat, 3),
                    types: vec![s],
                    omega: &om,
                    endpoint: (0, 0),
                };
                for j in cols.iter().step_by(cols.len() / 15 + 1) {
                    let a = sn.string_terms(&op, j).unwrap();
                    let b = sn.bp_s_terms(s, 3, j);
                    assert_eq!(a.len(), b.len());
                    let mut b = b;
                    b.sort_by(|x, y| x.0.cmp(&y.0));
                    for (x, y) in a.iter().zip(&b) {
                        assert_eq!(x.0, y.0);
                        assert!((x.1 - y.1).norm() < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn omega_parse_roundtrip() {
        let text = "# two by two\ndim 2\nomega 0 1 1 0\n1 0  0 0\n0 0  0 -1.5\n";
        let om = OmegaData::parse(text, 3).unwrap();
        let m = om.get(0, 1, 1, 0).unwrap();
        assert_eq!(m.get(1, 1), C64::new(0.0, -1.5));
        let bad = OmegaData::parse("dim 1\nomega 0 0 0 9\n1 0\n", 3).unwrap_err();
        assert!(matches!(bad, Error::Parse { line: 2, column: 13, .. }));
        assert!(matches!(OmegaData::parse("dim 2\nomega 0 0 0 0\n1 0\n", 3), Err(Error::Parse { .. })));
    }
}

#[cfg(test)]
mod duality_tests {
    use super::*;

    #[test]
    fn fourier_side_matches_six_f() {
        let lat = Honeycomb::torus(2, 2).unwrap();
        let z2 = RepData::build("Z2").unwrap();
        let sn = StringNet::new(&z2, &lat).unwrap();
        assert!(duality_compare_bp(&sn, 0, PairSelection::Exhaustive) < 1e-9);
        for name in ["Z3", "S3", "D4"] {
            let d = RepData::build(name).unwrap();
            let sn = StringNet::new(&d, &lat).unwrap();
            let dev = duality_compare_bp(&sn, 1, PairSelection::Sampled { count: 60, seed: 3 });
            assert!(dev < 1e-8, "{name}: {dev}");
        }
    }
}
