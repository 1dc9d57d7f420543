//! Oriented trivalent graphs, honeycomb tori, dual triangulations and ribbon strips.

use crate::error::{Error, Result};

/// Oriented graph with exactly three edge slots per vertex, listed counterclockwise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrivalentGraph {
    pub src: Vec<usize>,
    pub tgt: Vec<usize>,
    pub vedges: Vec<[usize; 3]>,
}

impl TrivalentGraph {
    /// Two vertices joined by three edges, all oriented 0 -> 1.
    pub fn theta() -> Self {
        TrivalentGraph {
            src: vec![0, 0, 0],
            tgt: vec![1, 1, 1],
            vedges: vec![[0, 1, 2], [0, 1, 2]],
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.vedges.len()
    }

    pub fn num_edges(&self) -> usize {
        self.src.len()
    }

    pub fn is_incident(&self, e: usize, v: usize) -> bool {
        self.src[e] == v || self.tgt[e] == v
    }

    /// Position of edge `e` in the counterclockwise slot list of `v`.
    pub fn slot_of(&self, v: usize, e: usize) -> Option<usize> {
        self.vedges[v].iter().position(|&x| x == e)
    }
}

/// One step of a plaquette boundary: edge index and whether its stored
/// orientation agrees with counterclockwise traversal.
pub type Slot = (usize, bool);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plaquette {
    pub walk: [Slot; 6],
    pub base: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Honeycomb {
    pub l1: usize,
    pub l2: usize,
    pub graph: TrivalentGraph,
    pub plaquettes: Vec<Plaquette>,
    left: Vec<usize>,
    right: Vec<usize>,
}

impl Honeycomb {
    pub fn torus(l1: usize, l2: usize) -> Result<Self> {
        if l1 < 2 || l2 < 2 {
            return Err(Error::InvalidParameter(format!(
                "torus dimensions must be at least 2, got {l1}x{l2}"
            )));
        }
        let wrap = |x: isize, y: isize| {
            let x = x.rem_euclid(l1 as isize) as usize;
            let y = y.rem_euclid(l2 as isize) as usize;
            x + l1 * y
        };
        let a = |x: isize, y: isize| 2 * wrap(x, y);
        let b = |x: isize, y: isize| 2 * wrap(x, y) + 1;
        let e = |x: isize, y: isize, t: usize| 3 * wrap(x, y) + t;
        let ne = 3 * l1 * l2;
        let nv = 2 * l1 * l2;
        let mut src = vec![0; ne];
        let mut tgt = vec![0; ne];
        for y in 0..l2 as isize {
            for x in 0..l1 as isize {
                src[e(x, y, 0)] = a(x, y);
                tgt[e(x, y, 0)] = b(x, y);
                src[e(x, y, 1)] = a(x, y);
                tgt[e(x, y, 1)] = b(x - 1, y);
                src[e(x, y, 2)] = a(x, y);
                tgt[e(x, y, 2)] = b(x, y - 1);
            }
        }
        let mut vedges = vec![[usize::MAX; 3]; nv];
        for ed in 0..ne {
            vedges[src[ed]][ed % 3] = ed;
            vedges[tgt[ed]][ed % 3] = ed;
        }
        let graph = TrivalentGraph { src, tgt, vedges };
        let mut plaquettes = Vec::with_capacity(l1 * l2);
        for y in 0..l2 as isize {
            for x in 0..l1 as isize {
                let walk = [
                    (e(x, y - 1, 1), false),
                    (e(x, y - 1, 0), true),
                    (e(x, y, 2), false),
                    (e(x, y, 1), true),
                    (e(x - 1, y, 0), false),
                    (e(x - 1, y, 2), true),
                ];
                let starts: Vec<usize> = walk.iter().map(|&s| slot_start(&graph, s)).collect();
                let k = (0..6).min_by_key(|&i| starts[i]).unwrap();
                let mut rot = walk;
                rot.rotate_left(k);
                plaquettes.push(Plaquette {
                    walk: rot,
                    base: starts[k],
                });
            }
        }
        let mut left = vec![usize::MAX; ne];
        let mut right = vec![usize::MAX; ne];
        for (p, pl) in plaquettes.iter().enumerate() {
            for &(ed, fwd) in &pl.walk {
                if fwd {
                    left[ed] = p;
                } else {
                    right[ed] = p;
                }
            }
        }
        Ok(Honeycomb {
            l1,
            l2,
            graph,
            plaquettes,
            left,
            right,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.graph.num_vertices()
    }

    pub fn num_edges(&self) -> usize {
        self.graph.num_edges()
    }

    pub fn num_plaquettes(&self) -> usize {
        self.plaquettes.len()
    }

    /// Counterclockwise boundary walk starting at the base site.
    pub fn plaquette_boundary(&self, p: usize) -> &[Slot; 6] {
        &self.plaquettes[p].walk
    }

    /// Plaquette lying to the left of the edge's stored orientation.
    pub fn left_of(&self, e: usize) -> usize {
        self.left[e]
    }

    pub fn right_of(&self, e: usize) -> usize {
        self.right[e]
    }

    /// The three plaquettes around a vertex, in the counterclockwise order of
    /// the wedges following each edge slot.
    pub fn vertex_plaquettes(&self, v: usize) -> [usize; 3] {
        let mut out = [0; 3];
        for (k, &e) in self.graph.vedges[v].iter().enumerate() {
            // the wedge counterclockwise after an outgoing edge lies to its left
            out[k] = if self.graph.src[e] == v { self.left[e] } else { self.right[e] };
        }
        out
    }

    pub fn plaquette_vertices(&self, p: usize) -> [usize; 6] {
        let w = &self.plaquettes[p].walk;
        std::array::from_fn(|k| slot_start(&self.graph, w[k]))
    }

    pub fn on_boundary(&self, p: usize, v: usize) -> bool {
        self.plaquette_vertices(p).contains(&v)
    }

    /// Honeycomb edge incident to `v` separating plaquettes `p` and `q`.
    pub fn edge_between(&self, v: usize, p: usize, q: usize) -> Option<usize> {
        self.graph.vedges[v].iter().copied().find(|&e| {
            (self.left[e] == p && self.right[e] == q) || (self.left[e] == q && self.right[e] == p)
        })
    }

    pub fn dual_triangulation(&self) -> DualGraph {
        let triangles = (0..self.num_vertices())
            .map(|v| DualTriangle {
                vertex: v,
                edges: self.graph.vedges[v],
                plaquettes: self.vertex_plaquettes(v),
            })
            .collect();
        let edges = (0..self.num_edges())
            .map(|e| DualEdge {
                edge: e,
                from: self.right[e],
                to: self.left[e],
            })
            .collect();
        DualGraph { triangles, edges }
    }

    /// Whether the walk turns left at the vertex joining `incoming` to `outgoing`.
    pub fn turns_left(&self, v: usize, incoming: usize, outgoing: usize) -> Result<bool> {
        let g = &self.graph;
        let (Some(a), Some(b)) = (g.slot_of(v, incoming), g.slot_of(v, outgoing)) else {
            return Err(Error::NotAPath(format!("edges {incoming},{outgoing} do not meet at {v}")));
        };
        if a == b {
            return Err(Error::NotAPath(format!("path reverses along edge {incoming}")));
        }
        Ok(a == (b + 1) % 3)
    }

    pub fn ribbon_strip(&self, sites: &[Site]) -> Result<RibbonStrip> {
        if sites.len() < 2 {
            return Err(Error::NotAPath("a strip needs at least two sites".into()));
        }
        for s in sites {
            if s.plaquette >= self.num_plaquettes() || s.vertex >= self.num_vertices() || !self.on_boundary(s.plaquette, s.vertex) {
                return Err(Error::InvalidGeometry(format!(
                    "vertex {} is not on plaquette {}",
                    s.vertex, s.plaquette
                )));
            }
        }
        let mut triangles = Vec::with_capacity(sites.len() - 1);
        for w in sites.windows(2) {
            let (a, b) = (w[0], w[1]);
            let tri = if a.vertex == b.vertex && a.plaquette != b.plaquette {
                let e = self.edge_between(a.vertex, a.plaquette, b.plaquette).ok_or_else(|| {
                    Error::NotAPath(format!("plaquettes {} and {} do not meet at an edge of {}", a.plaquette, b.plaquette, a.vertex))
                })?;
                Triangle::Direct {
                    edge: e,
                    vertex: a.vertex,
                    from: a,
                    to: b,
                }
            } else if a.plaquette == b.plaquette && a.vertex != b.vertex {
                let e = self.plaquettes[a.plaquette]
                    .walk
                    .iter()
                    .map(|s| s.0)
                    .find(|&e| {
                        let (s, t) = (self.graph.src[e], self.graph.tgt[e]);
                        (s == a.vertex && t == b.vertex) || (s == b.vertex && t == a.vertex)
                    })
                    .ok_or_else(|| Error::NotAPath(format!("vertices {} and {} are not adjacent on plaquette {}", a.vertex, b.vertex, a.plaquette)))?;
                Triangle::Dual {
                    edge: e,
                    plaquette: a.plaquette,
                    from: a,
                    to: b,
                }
            } else {
                return Err(Error::NotAPath(format!("sites {a:?} and {b:?} are not adjacent")));
            };
            triangles.push(tri);
        }
        Ok(RibbonStrip {
            triangles,
            start: sites[0],
            end: *sites.last().unwrap(),
        })
    }

    /// Six dual triangles around `p`, clockwise from its base site.
    pub fn closed_strip(&self, p: usize) -> RibbonStrip {
        let verts = self.plaquette_vertices(p);
        let mut sites: Vec<Site> = (0..6)
            .map(|k| Site {
                plaquette: p,
                vertex: verts[(6 - k) % 6],
            })
            .collect();
        sites.push(sites[0]);
        self.ribbon_strip(&sites).expect("plaquette boundary is a valid strip")
    }
}

pub fn slot_start(g: &TrivalentGraph, (e, fwd): Slot) -> usize {
    if fwd {
        g.src[e]
    } else {
        g.tgt[e]
    }
}

pub fn slot_end(g: &TrivalentGraph, (e, fwd): Slot) -> usize {
    if fwd {
        g.tgt[e]
    } else {
        g.src[e]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualTriangle {
    pub vertex: usize,
    pub edges: [usize; 3],
    pub plaquettes: [usize; 3],
}

/// Dual edge crossing a primal edge, from the plaquette on its right to the one on its left.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DualEdge {
    pub edge: usize,
    pub from: usize,
    pub to: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualGraph {
    pub triangles: Vec<DualTriangle>,
    pub edges: Vec<DualEdge>,
}

/// A plaquette together with a vertex on its boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Site {
    pub plaquette: usize,
    pub vertex: usize,
}

impl Site {
    pub fn new(plaquette: usize, vertex: usize) -> Self {
        Site { plaquette, vertex }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Triangle {
    /// Crosses `edge` while staying at `vertex`; carries a left multiplication.
    Direct { edge: usize, vertex: usize, from: Site, to: Site },
    /// Runs along `edge` inside `plaquette`; carries a projector.
    Dual { edge: usize, plaquette: usize, from: Site, to: Site },
}

impl Triangle {
    pub fn edge(&self) -> usize {
        match *self {
            Triangle::Direct { edge, .. } | Triangle::Dual { edge, .. } => edge,
        }
    }

    pub fn from(&self) -> Site {
        match *self {
            Triangle::Direct { from, .. } | Triangle::Dual { from, .. } => from,
        }
    }

    pub fn to(&self) -> Site {
        match *self {
            Triangle::Direct { to, .. } | Triangle::Dual { to, .. } => to,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RibbonStrip {
    pub triangles: Vec<Triangle>,
    pub start: Site,
    pub end: Site,
}

impl RibbonStrip {
    pub fn is_closed(&self) -> bool {
        self.start == self.end
    }

    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    /// Sites visited, including both ends.
    pub fn sites(&self) -> Vec<Site> {
        let mut s = vec![self.start];
        s.extend(self.triangles.iter().map(Triangle::to));
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        let h = Honeycomb::torus(2, 2).unwrap();
        assert_eq!((h.num_vertices(), h.num_edges(), h.num_plaquettes()), (8, 12, 4));
        let h = Honeycomb::torus(2, 3).unwrap();
        assert_eq!((h.num_vertices(), h.num_edges(), h.num_plaquettes()), (12, 18, 6));
        assert!(matches!(Honeycomb::torus(1, 2), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn walks_are_closed_with_distinct_edges() {
        for (l1, l2) in [(2, 2), (2, 3), (3, 4), (4, 4)] {
            let h = Honeycomb::torus(l1, l2).unwrap();
            let mut uses = vec![(0, 0); h.num_edges()];
            for p in 0..h.num_plaquettes() {
                let w = h.plaquette_boundary(p);
                for k in 0..6 {
                    assert_eq!(slot_end(&h.graph, w[k]), slot_start(&h.graph, w[(k + 1) % 6]));
                    if w[k].1 {
                        uses[w[k].0].0 += 1;
                    } else {
                        uses[w[k].0].1 += 1;
                    }
                }
                let mut es: Vec<usize> = w.iter().map(|s| s.0).collect();
                es.sort();
                es.dedup();
                assert_eq!(es.len(), 6);
                assert_eq!(h.plaquettes[p].base, *h.plaquette_vertices(p).iter().min().unwrap());
            }
            assert!(uses.iter().all(|&u| u == (1, 1)));
        }
    }

    #[test]
    fn counterclockwise_walks_turn_left() {
        let h = Honeycomb::torus(3, 3).unwrap();
        for p in 0..h.num_plaquettes() {
            let w = h.plaquette_boundary(p);
            for k in 0..6 {
                let v = slot_start(&h.graph, w[k]);
                assert!(h.turns_left(v, w[(k + 5) % 6].0, w[k].0).unwrap());
            }
        }
    }

    #[test]
    fn dual_triangles_match_vertices() {
        let h = Honeycomb::torus(2, 2).unwrap();
        let d = h.dual_triangulation();
        assert_eq!(d.triangles.len(), 8);
        assert_eq!(d.edges.len(), 12);
        for t in &d.triangles {
            for &e in &t.edges {
                assert!(h.graph.is_incident(e, t.vertex));
                let de = d.edges[e];
                assert!(t.plaquettes.contains(&de.from) && t.plaquettes.contains(&de.to));
            }
            for &p in &t.plaquettes {
                assert!(h.on_boundary(p, t.vertex));
            }
        }
    }

    #[test]
    fn strips() {
        let h = Honeycomb::torus(2, 2).unwrap();
        let c = h.closed_strip(0);
        assert!(c.is_closed());
        assert_eq!(c.len(), 6);
        let v = h.plaquettes[0].base;
        let ps = h.vertex_plaquettes(v);
        let s = h.ribbon_strip(&[Site::new(ps[0], v), Site::new(ps[1], v)]).unwrap();
        assert_eq!(s.len(), 1);
        assert!(matches!(s.triangles[0], Triangle::Direct { .. }));
        let far = (0..8).find(|&w| !h.on_boundary(ps[0], w)).unwrap();
        let q = (0..4).find(|&q| h.on_boundary(q, far)).unwrap();
        assert!(matches!(
            h.ribbon_strip(&[Site::new(ps[0], v), Site::new(q, far)]),
            Err(Error::NotAPath(_))
        ));
    }
}
