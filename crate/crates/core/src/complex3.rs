//! Tetrahedra glued along faces, with derived vertex and edge classes.

use crate::error::{Error, Result};
use std::collections::{BTreeMap, BTreeSet};

/// Edge slots of a tetrahedron, in class-numbering order.
pub const EDGE_SLOTS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

pub fn edge_slot(a: usize, b: usize) -> Option<(usize, bool)> {
    EDGE_SLOTS.iter().position(|&s| s == (a, b)).map(|i| (i, true)).or_else(|| EDGE_SLOTS.iter().position(|&s| s == (b, a)).map(|i| (i, false)))
}

/// Face `k` of one tetrahedron glued to tetrahedron `tet`, sending vertex `m` to `perm[m]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Gluing {
    pub tet: usize,
    pub perm: [usize; 4],
}

/// Boundary edge label fixed in the file, oriented from vertex `a` to `b` of `tet`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ColorLine {
    pub tet: usize,
    pub a: usize,
    pub b: usize,
    pub label: usize,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GluedComplex3 {
    pub gluings: Vec<[Option<Gluing>; 4]>,
    /// Vertex class of each tetrahedron corner.
    pub vclass: Vec<[usize; 4]>,
    pub num_vertices: usize,
    /// Edge class of each slot and whether the slot's `a → b` agrees with the class orientation.
    pub eclass: Vec<[(usize, bool); 6]>,
    pub num_edges: usize,
    pub boundary_faces: Vec<(usize, usize)>,
    pub boundary_edges: BTreeSet<usize>,
    pub boundary_vertices: BTreeSet<usize>,
    pub orientable: bool,
    pub colors: Vec<ColorLine>,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn union(parent: &mut [usize], a: usize, b: usize) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        parent[ra.max(rb)] = ra.min(rb);
    }
}

fn perm_sign(p: &[usize; 4]) -> i32 {
    let mut s = 1;
    for i in 0..4 {
        for j in i + 1..4 {
            if p[i] > p[j] {
                s = -s;
            }
        }
    }
    s
}

impl GluedComplex3 {
    pub fn num_tets(&self) -> usize {
        self.gluings.len()
    }

    pub fn is_closed(&self) -> bool {
        self.boundary_faces.is_empty()
    }

    pub fn internal_edges(&self) -> Vec<usize> {
        (0..self.num_edges).filter(|e| !self.boundary_edges.contains(e)).collect()
    }

    pub fn internal_vertex_count(&self) -> usize {
        self.num_vertices - self.boundary_vertices.len()
    }

    /// Builds and validates a complex from per-face gluings.
    pub fn from_gluings(gluings: Vec<[Option<Gluing>; 4]>) -> Result<Self> {
        let n = gluings.len();
        for (t, row) in gluings.iter().enumerate() {
            for (k, g) in row.iter().enumerate() {
                let Some(g) = g else { continue };
                if g.tet >= n {
                    return Err(Error::GluingInconsistent(format!("tet {t} face {k} refers to missing tet {}", g.tet)));
                }
                let mut seen = [false; 4];
                for &x in &g.perm {
                    if x > 3 || seen[x] {
                        return Err(Error::GluingInconsistent(format!("tet {t} face {k}: {:?} is not a permutation", g.perm)));
                    }
                    seen[x] = true;
                }
                let k2 = g.perm[k];
                if g.tet == t && k2 == k {
                    return Err(Error::GluingInconsistent(format!("tet {t} face {k} is glued to itself")));
                }
                let back = gluings[g.tet][k2].ok_or_else(|| {
                    Error::GluingInconsistent(format!("tet {t} face {k} glues to tet {} face {k2}, which is boundary", g.tet))
                })?;
                let ok = back.tet == t && (0..4).all(|m| back.perm[g.perm[m]] == m);
                if !ok {
                    return Err(Error::GluingInconsistent(format!(
                        "tet {t} face {k} and tet {} face {k2} disagree",
                        g.tet
                    )));
                }
            }
        }
        // vertices
        let mut vp: Vec<usize> = (0..4 * n).collect();
        for (t, row) in gluings.iter().enumerate() {
            for (k, g) in row.iter().enumerate() {
                let Some(g) = g else { continue };
                for m in (0..4).filter(|&m| m != k) {
                    union(&mut vp, 4 * t + m, 4 * g.tet + g.perm[m]);
                }
            }
        }
        let mut vnum: BTreeMap<usize, usize> = BTreeMap::new();
        let mut vclass = vec![[0; 4]; n];
        for t in 0..n {
            for m in 0..4 {
                let r = find(&mut vp, 4 * t + m);
                let next = vnum.len();
                vclass[t][m] = *vnum.entry(r).or_insert(next);
            }
        }
        // directed edge slots: node 12t + 2*slot + (0 aligned, 1 reversed)
        let node = |t: usize, a: usize, b: usize| {
            let (s, al) = edge_slot(a, b).unwrap();
            12 * t + 2 * s + usize::from(!al)
        };
        let mut ep: Vec<usize> = (0..12 * n).collect();
        for (t, row) in gluings.iter().enumerate() {
            for (k, g) in row.iter().enumerate() {
                let Some(g) = g else { continue };
                let face: Vec<usize> = (0..4).filter(|&m| m != k).collect();
                for i in 0..3 {
                    for j in 0..3 {
                        if i != j {
                            let (a, b) = (face[i], face[j]);
                            union(&mut ep, node(t, a, b), node(g.tet, g.perm[a], g.perm[b]));
                        }
                    }
                }
            }
        }
        let mut reps: Vec<usize> = Vec::new();
        let mut eclass = vec![[(0, true); 6]; n];
        for t in 0..n {
            for (s, &(a, b)) in EDGE_SLOTS.iter().enumerate() {
                let r = find(&mut ep, node(t, a, b));
                let rr = find(&mut ep, node(t, b, a));
                if r == rr {
                    return Err(Error::NonManifoldEdge(format!("edge {a}{b} of tet {t} is identified with its reverse")));
                }
                eclass[t][s] = match reps.iter().position(|&x| x == r) {
                    Some(i) => (i, true),
                    None => match reps.iter().position(|&x| x == rr) {
                        Some(i) => (i, false),
                        None => {
                            reps.push(r);
                            (reps.len() - 1, true)
                        }
                    },
                };
            }
        }
        let mut boundary_faces = Vec::new();
        let mut boundary_edges = BTreeSet::new();
        let mut boundary_vertices = BTreeSet::new();
        for (t, row) in gluings.iter().enumerate() {
            for k in 0..4 {
                if row[k].is_some() {
                    continue;
                }
                boundary_faces.push((t, k));
                for (s, &(a, b)) in EDGE_SLOTS.iter().enumerate() {
                    if a != k && b != k {
                        boundary_edges.insert(eclass[t][s].0);
                    }
                }
                for m in (0..4).filter(|&m| m != k) {
                    boundary_vertices.insert(vclass[t][m]);
                }
            }
        }
        // orientation signs: glued faces must induce opposite orientations
        let mut sign = vec![0i32; n];
        let mut orientable = true;
        for start in 0..n {
            if sign[start] != 0 {
                continue;
            }
            sign[start] = 1;
            let mut stack = vec![start];
            while let Some(t) = stack.pop() {
                for g in gluings[t].iter().flatten() {
                    let want = -sign[t] * perm_sign(&g.perm);
                    if sign[g.tet] == 0 {
                        sign[g.tet] = want;
                        stack.push(g.tet);
                    } else if sign[g.tet] != want {
                        orientable = false;
                    }
                }
            }
        }
        Ok(GluedComplex3 {
            gluings,
            vclass,
            num_vertices: vnum.len(),
            eclass,
            num_edges: reps.len(),
            boundary_faces,
            boundary_edges,
            boundary_vertices,
            orientable,
            colors: Vec::new(),
        })
    }

    /// Parses the line-oriented `.tri` format.
    pub fn parse(text: &str) -> Result<Self> {
        let err = |line: usize, column: usize, message: String| Error::Parse { line, column, message };
        let mut count: Option<usize> = None;
        let mut rows: Vec<Option<[Option<Gluing>; 4]>> = Vec::new();
        let mut colors = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = ln + 1;
            let tokens = tokenize(raw);
            if tokens.is_empty() {
                continue;
            }
            let (c0, head) = tokens[0];
            match head {
                "tetrahedra" => {
                    if count.is_some() {
                        return Err(err(line, c0, "duplicate `tetrahedra` line".into()));
                    }
                    if tokens.len() != 2 {
                        return Err(err(line, c0, "expected `tetrahedra <N>`".into()));
                    }
                    let n: usize = tokens[1].1.parse().map_err(|_| err(line, tokens[1].0, format!("bad count `{}`", tokens[1].1)))?;
                    if n == 0 {
                        return Err(err(line, tokens[1].0, "need at least one tetrahedron".into()));
                    }
                    count = Some(n);
                    rows = vec![None; n];
                }
                "tet" => {
                    let n = count.ok_or_else(|| err(line, c0, "`tetrahedra <N>` must come first".into()))?;
                    if tokens.len() != 6 {
                        return Err(err(line, c0, "expected `tet <i> <g0> <g1> <g2> <g3>`".into()));
                    }
                    let i: usize = tokens[1].1.parse().map_err(|_| err(line, tokens[1].0, format!("bad index `{}`", tokens[1].1)))?;
                    if i >= n {
                        return Err(err(line, tokens[1].0, format!("tetrahedron {i} out of range")));
                    }
                    if rows[i].is_some() {
                        return Err(err(line, tokens[1].0, format!("tetrahedron {i} listed twice")));
                    }
                    let mut row = [None; 4];
                    for k in 0..4 {
                        let (cc, tok) = tokens[2 + k];
                        if tok == "-" {
                            continue;
                        }
                        let (t, p) = tok.split_once(':').ok_or_else(|| err(line, cc, format!("expected `-` or `t:pppp`, got `{tok}`")))?;
                        let t: usize = t.parse().map_err(|_| err(line, cc, format!("bad target `{t}`")))?;
                        if t >= n {
                            return Err(err(line, cc, format!("target tetrahedron {t} out of range")));
                        }
                        let digits: Vec<usize> = p.chars().filter_map(|ch| ch.to_digit(10).map(|d| d as usize)).collect();
                        if digits.len() != 4 || p.len() != 4 || digits.iter().any(|&d| d > 3) {
                            return Err(err(line, cc + tok.find(':').unwrap() + 1, format!("bad permutation `{p}`")));
                        }
                        let perm = [digits[0], digits[1], digits[2], digits[3]];
                        let mut seen = [false; 4];
                        for &d in &perm {
                            if seen[d] {
                                return Err(err(line, cc + tok.find(':').unwrap() + 1, format!("`{p}` is not a permutation")));
                            }
                            seen[d] = true;
                        }
                        row[k] = Some(Gluing { tet: t, perm });
                    }
                    rows[i] = Some(row);
                }
                "color" => {
                    if count.is_none() {
                        return Err(err(line, c0, "`tetrahedra <N>` must come first".into()));
                    }
                    colors.push(color_line(line, &tokens, rows.len())?);
                }
                other => return Err(err(line, c0, format!("unknown directive `{other}`"))),
            }
        }
        let n = count.ok_or_else(|| err(1, 1, "missing `tetrahedra <N>`".into()))?;
        let mut gl = Vec::with_capacity(n);
        for (i, r) in rows.into_iter().enumerate() {
            gl.push(r.ok_or_else(|| err(text.lines().count().max(1), 1, format!("tetrahedron {i} is never listed")))?);
        }
        let mut cx = Self::from_gluings(gl)?;
        cx.check_colors(&colors)?;
        cx.colors = colors;
        Ok(cx)
    }

    fn check_colors(&self, colors: &[ColorLine]) -> Result<()> {
        for c in colors {
            let (s, _) = edge_slot(c.a, c.b).unwrap();
            if !self.boundary_edges.contains(&self.eclass[c.tet][s].0) {
                return Err(Error::Parse {
                    line: c.line,
                    column: 1,
                    message: format!("edge {}.{}{} is not on the boundary", c.tet, c.a, c.b),
                });
            }
        }
        Ok(())
    }

    /// Replaces the boundary colors with the `color` lines of a separate file.
    pub fn with_boundary_text(&self, text: &str) -> Result<Self> {
        let mut colors = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let tokens = tokenize(raw);
            match tokens.first() {
                None => continue,
                Some(&(_, "color")) => colors.push(color_line(ln + 1, &tokens, self.num_tets())?),
                Some(&(c0, other)) => {
                    return Err(Error::Parse {
                        line: ln + 1,
                        column: c0,
                        message: format!("expected `color`, got `{other}`"),
                    })
                }
            }
        }
        self.check_colors(&colors)?;
        let mut cx = self.clone();
        cx.colors = colors;
        Ok(cx)
    }

    /// Serializes back to the `.tri` format.
    pub fn to_text(&self) -> String {
        let mut s = format!("tetrahedra {}\n", self.num_tets());
        for (t, row) in self.gluings.iter().enumerate() {
            s.push_str(&format!("tet {t}"));
            for g in row {
                match g {
                    None => s.push_str(" -"),
                    Some(g) => s.push_str(&format!(" {}:{}{}{}{}", g.tet, g.perm[0], g.perm[1], g.perm[2], g.perm[3])),
                }
            }
            s.push('\n');
        }
        for c in &self.colors {
            s.push_str(&format!("color {}.{}{} {}\n", c.tet, c.a, c.b, c.label));
        }
        s
    }

    /// Class and orientation of the edge from corner `a` to corner `b` of `t`.
    pub fn edge(&self, t: usize, a: usize, b: usize) -> (usize, bool) {
        let (s, al) = edge_slot(a, b).expect("distinct corners");
        let (c, o) = self.eclass[t][s];
        (c, o == al)
    }

    /// Internal edge classes meeting each boundary vertex class.
    pub fn internal_edges_at_boundary(&self) -> BTreeMap<usize, BTreeSet<usize>> {
        let mut out: BTreeMap<usize, BTreeSet<usize>> = self.boundary_vertices.iter().map(|&v| (v, BTreeSet::new())).collect();
        for t in 0..self.num_tets() {
            for (s, &(a, b)) in EDGE_SLOTS.iter().enumerate() {
                let e = self.eclass[t][s].0;
                if self.boundary_edges.contains(&e) {
                    continue;
                }
                for m in [a, b] {
                    if let Some(set) = out.get_mut(&self.vclass[t][m]) {
                        set.insert(e);
                    }
                }
            }
        }
        out
    }
}

pub const SPHERE_D4: &str = include_str!("../data/sphere_d4.tri");
pub const SPHERE_2T: &str = include_str!("../data/sphere_2t.tri");
pub const S2XS1: &str = include_str!("../data/s2xs1.tri");
pub const RP3: &str = include_str!("../data/rp3.tri");

/// Whitespace-separated tokens with 1-based columns; `#` starts a comment.
fn tokenize(raw: &str) -> Vec<(usize, &str)> {
    let body = raw.split('#').next().unwrap();
    let mut tokens = Vec::new();
    let mut col = 0;
    for piece in body.split_inclusive(char::is_whitespace) {
        let t = piece.trim();
        if !t.is_empty() {
            tokens.push((col + 1 + piece.len() - piece.trim_start().len(), t));
        }
        col += piece.len();
    }
    tokens
}

fn color_line(line: usize, tokens: &[(usize, &str)], ntets: usize) -> Result<ColorLine> {
    let err = |column: usize, message: String| Error::Parse { line, column, message };
    if tokens.len() != 3 {
        return Err(err(tokens[0].0, "expected `color <t>.<a><b> <label>`".into()));
    }
    let (cc, tok) = tokens[1];
    let bad = || err(cc, format!("bad edge `{tok}`"));
    let (t, ab) = tok.split_once('.').ok_or_else(bad)?;
    let t: usize = t.parse().map_err(|_| bad())?;
    let d: Vec<usize> = ab.chars().filter_map(|ch| ch.to_digit(10).map(|x| x as usize)).collect();
    if ab.len() != 2 || d.len() != 2 || d[0] > 3 || d[1] > 3 || d[0] == d[1] || t >= ntets {
        return Err(bad());
    }
    let label: usize = tokens[2].1.parse().map_err(|_| err(tokens[2].0, format!("bad label `{}`", tokens[2].1)))?;
    Ok(ColorLine {
        tet: t,
        a: d[0],
        b: d[1],
        label,
        line,
    })
}

/// Bundled complexes by file name.
pub fn bundled(name: &str) -> Option<&'static str> {
    match name.trim_end_matches(".tri") {
        "sphere_d4" => Some(SPHERE_D4),
        "sphere_2t" => Some(SPHERE_2T),
        "s2xs1" => Some(S2XS1),
        "rp3" => Some(RP3),
        _ => None,
    }
}

pub const BUNDLED: [&str; 4] = ["sphere_d4.tri", "sphere_2t.tri", "s2xs1.tri", "rp3.tri"];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_of_four_simplex() {
        let cx = GluedComplex3::parse(SPHERE_D4).unwrap();
        assert_eq!((cx.num_tets(), cx.num_vertices, cx.num_edges), (5, 5, 10));
        assert!(cx.is_closed() && cx.orientable);
    }

    #[test]
    fn bundled_counts() {
        for (name, v, e) in [("sphere_2t", 4, 6), ("s2xs1", 1, 3), ("rp3", 1, 3)] {
            let cx = GluedComplex3::parse(bundled(name).unwrap()).unwrap();
            assert!(cx.is_closed() && cx.orientable, "{name}");
            assert_eq!((cx.num_vertices, cx.num_edges), (v, e), "{name}");
            assert_eq!(cx.num_vertices + 2, cx.num_edges, "{name}: Euler characteristic");
            assert_eq!(GluedComplex3::parse(&cx.to_text()).unwrap(), cx);
        }
    }

    #[test]
    fn single_tet() {
        let cx = GluedComplex3::parse("tetrahedra 1\ntet 0 - - - -\n").unwrap();
        assert_eq!(cx.boundary_edges.len(), 6);
        assert_eq!(cx.boundary_faces.len(), 4);
    }

    #[test]
    fn errors() {
        let self_glued = GluedComplex3::parse("tetrahedra 1\ntet 0 0:0123 - - -\n");
        assert!(matches!(self_glued, Err(Error::GluingInconsistent(_))));
        let one_sided = GluedComplex3::parse("tetrahedra 2\ntet 0 1:0123 - - -\ntet 1 - - - -\n");
        assert!(matches!(one_sided, Err(Error::GluingInconsistent(_))));
        let e = GluedComplex3::parse("tetrahedra 1\ntet 0 - - - 0:01x3\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, column: 15, .. }), "{e:?}");
        let e = GluedComplex3::parse("# c\n\ntet 0 - - - -\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, column: 1, .. }));
        // faces 0 and 1 of one tet glued so that edge 23 meets its reverse
        let e = GluedComplex3::parse("tetrahedra 1\ntet 0 0:1032 0:1032 - -\n").unwrap_err();
        assert!(matches!(e, Error::NonManifoldEdge(_)), "{e:?}");
    }
}
