//! Unitary irreps, characters, fusion coefficients and invariant tensors.

use crate::error::{Error, Result};
use crate::group::{d4_decompose, s3_permutations, FiniteGroup, GroupKind};
use crate::linalg::Mat;
use crate::C64;
use std::f64::consts::PI;

#[derive(Debug, Clone)]
pub struct Irrep {
    pub label: usize,
    pub dim: usize,
    pub matrices: Vec<Mat>,
    pub character: Vec<C64>,
}

impl Irrep {
    fn from_matrices(label: usize, matrices: Vec<Mat>) -> Self {
        let dim = matrices[0].dim();
        let character = matrices.iter().map(Mat::trace).collect();
        Irrep {
            label,
            dim,
            matrices,
            character,
        }
    }
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Complete list of inequivalent unitary irreps, label 0 trivial.
pub fn irreps(g: &FiniteGroup) -> Result<Vec<Irrep>> {
    let list = match g.kind() {
        GroupKind::Cyclic(n) => (0..n)
            .map(|k| {
                let mats = (0..n)
                    .map(|a| {
                        let phase = 2.0 * PI * (k * a) as f64 / n as f64;
                        Mat::from_rows(1, vec![C64::from_polar(1.0, phase)])
                    })
                    .collect();
                Irrep::from_matrices(k, mats)
            })
            .collect(),
        GroupKind::S3 => {
            let perms = s3_permutations();
            let sign = |p: &[usize; 3]| {
                let mut s = 1.0;
                for i in 0..3 {
                    for j in i + 1..3 {
                        if p[i] > p[j] {
                            s = -s;
                        }
                    }
                }
                s
            };
            let r2 = 2f64.sqrt();
            let r6 = 6f64.sqrt();
            let basis = [[1.0 / r2, -1.0 / r2, 0.0], [1.0 / r6, 1.0 / r6, -2.0 / r6]];
            let triv = perms.iter().map(|_| Mat::identity(1)).collect();
            let sgn = perms.iter().map(|p| Mat::from_rows(1, vec![c(sign(p))])).collect();
            let std = perms
                .iter()
                .map(|p| {
                    // permutation matrix P[p[i]][i] = 1, restricted to the sum-zero plane
                    let mut m = Mat::zeros(2);
                    for a in 0..2 {
                        for b in 0..2 {
                            let v: f64 = (0..3).map(|i| basis[a][p[i]] * basis[b][i]).sum();
                            m.set(a, b, c(v));
                        }
                    }
                    m
                })
                .collect();
            vec![
                Irrep::from_matrices(0, triv),
                Irrep::from_matrices(1, sgn),
                Irrep::from_matrices(2, std),
            ]
        }
        GroupKind::D4 => {
            let rot = Mat::from_rows(2, vec![c(0.0), c(-1.0), c(1.0), c(0.0)]);
            let refl = Mat::from_rows(2, vec![c(1.0), c(0.0), c(0.0), c(-1.0)]);
            let mut lists: Vec<Vec<Mat>> = vec![Vec::new(); 5];
            for a in 0..8 {
                let (k, m) = d4_decompose(a);
                let pm = |e: usize| if e % 2 == 0 { 1.0 } else { -1.0 };
                lists[0].push(Mat::identity(1));
                lists[1].push(Mat::from_rows(1, vec![c(pm(m))]));
                lists[2].push(Mat::from_rows(1, vec![c(pm(k))]));
                lists[3].push(Mat::from_rows(1, vec![c(pm(k + m))]));
                let mut x = Mat::identity(2);
                for _ in 0..k {
                    x = &x * &rot;
                }
                if m == 1 {
                    x = &x * &refl;
                }
                lists[4].push(x);
            }
            lists
                .into_iter()
                .enumerate()
                .map(|(l, mats)| Irrep::from_matrices(l, mats))
                .collect()
        }
    };
    validate_irreps(g, &list)?;
    Ok(list)
}

fn validate_irreps(g: &FiniteGroup, irr: &[Irrep]) -> Result<()> {
    let n = g.order();
    let fail = |m: String| Err(Error::NumericalInconsistency(m));
    let total: usize = irr.iter().map(|r| r.dim * r.dim).sum();
    if total != n {
        return fail(format!("sum of squared dimensions {total} != {n}"));
    }
    for r in irr {
        if r.matrices[0].max_abs_diff(&Mat::identity(r.dim)) > 1e-12 {
            return fail(format!("irrep {} is not unital", r.label));
        }
        for a in 0..n {
            let u = &r.matrices[a] * &r.matrices[a].adjoint();
            if u.max_abs_diff(&Mat::identity(r.dim)) > 1e-12 {
                return fail(format!("irrep {} not unitary", r.label));
            }
            for b in 0..n {
                let lhs = &r.matrices[a] * &r.matrices[b];
                if lhs.max_abs_diff(&r.matrices[g.mul(a, b)]) > 1e-12 {
                    return fail(format!("irrep {} not a homomorphism", r.label));
                }
            }
        }
    }
    Ok(())
}

/// Fusion data in the all-outgoing convention: `N(i,j,k)` is the multiplicity
/// of the trivial irrep in `i ⊗ j ⊗ k`.
#[derive(Debug, Clone)]
pub struct FusionData {
    rank: usize,
    n: Vec<u8>,
    pub dual: Vec<usize>,
    pub dims: Vec<usize>,
    pub d_total: usize,
}

impl FusionData {
    pub fn from_irreps(g: &FiniteGroup, irr: &[Irrep]) -> Result<Self> {
        let r = irr.len();
        let order = g.order();
        let mut dual = vec![usize::MAX; r];
        for j in 0..r {
            for k in 0..r {
                let same = (0..order).all(|a| (irr[k].character[a] - irr[j].character[a].conj()).norm() < 1e-9);
                if same {
                    dual[j] = k;
                    break;
                }
            }
            if dual[j] == usize::MAX {
                return Err(Error::NumericalInconsistency(format!("no dual for irrep {j}")));
            }
            let k = dual[j];
            let conj_ok = (0..order).all(|a| irr[k].matrices[a].max_abs_diff(&irr[j].matrices[a].conj()) < 1e-12);
            if !conj_ok {
                return Err(Error::NumericalInconsistency(format!(
                    "dual of irrep {j} is not its entrywise conjugate"
                )));
            }
        }
        let mut n = vec![0u8; r * r * r];
        for i in 0..r {
            for j in 0..r {
                for k in 0..r {
                    let s: C64 = (0..order)
                        .map(|a| irr[i].character[a] * irr[j].character[a] * irr[k].character[a])
                        .sum::<C64>()
                        / order as f64;
                    let rounded = s.re.round();
                    if (s - c(rounded)).norm() > 1e-9 || rounded < 0.0 {
                        return Err(Error::NumericalInconsistency(format!(
                            "character sum for ({i},{j},{k}) is {s}"
                        )));
                    }
                    n[(i * r + j) * r + k] = rounded as u8;
                }
            }
        }
        Ok(FusionData {
            rank: r,
            n,
            dual,
            dims: irr.iter().map(|x| x.dim).collect(),
            d_total: order,
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    #[inline]
    pub fn n(&self, i: usize, j: usize, k: usize) -> u8 {
        self.n[(i * self.rank + j) * self.rank + k]
    }

    #[inline]
    pub fn admissible(&self, i: usize, j: usize, k: usize) -> bool {
        self.n(i, j, k) > 0
    }

    pub fn is_multiplicity_free(&self) -> bool {
        self.n.iter().all(|&x| x <= 1)
    }
}

/// Unit-norm invariant tensor in `D^i ⊗ D^j ⊗ D^k`, row-major over `(a,b,c)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Intertwiner {
    pub labels: (usize, usize, usize),
    pub dims: (usize, usize, usize),
    pub tensor: Vec<C64>,
}

impl Intertwiner {
    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize) -> C64 {
        self.tensor[(a * self.dims.1 + b) * self.dims.2 + c]
    }

    pub fn scaled(&self, s: f64) -> Self {
        Intertwiner {
            labels: self.labels,
            dims: self.dims,
            tensor: self.tensor.iter().map(|z| z * s).collect(),
        }
    }

    /// `out[x,y,z] = self[z,x,y]`, i.e. the tensor of the triple `(j,k,i)`.
    fn rotate_left(&self) -> Self {
        let (di, dj, dk) = self.dims;
        let mut t = vec![c(0.0); di * dj * dk];
        for x in 0..dj {
            for y in 0..dk {
                for z in 0..di {
                    t[(x * dk + y) * di + z] = self.get(z, x, y);
                }
            }
        }
        Intertwiner {
            labels: (self.labels.1, self.labels.2, self.labels.0),
            dims: (dj, dk, di),
            tensor: t,
        }
    }

    /// Max deviation from invariance under the diagonal group action.
    pub fn invariance_residual(&self, irr: &[Irrep]) -> f64 {
        let (i, j, k) = self.labels;
        let (di, dj, dk) = self.dims;
        let mut worst: f64 = 0.0;
        for a in 0..irr[i].matrices.len() {
            let (mi, mj, mk) = (&irr[i].matrices[a], &irr[j].matrices[a], &irr[k].matrices[a]);
            for x in 0..di {
                for y in 0..dj {
                    for z in 0..dk {
                        let mut s = c(0.0);
                        for xp in 0..di {
                            for yp in 0..dj {
                                for zp in 0..dk {
                                    s += mi.get(x, xp) * mj.get(y, yp) * mk.get(z, zp) * self.get(xp, yp, zp);
                                }
                            }
                        }
                        worst = worst.max((s - self.get(x, y, z)).norm());
                    }
                }
            }
        }
        worst
    }

    pub fn norm_sqr(&self) -> f64 {
        self.tensor.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Group-average projector applied to basis tensors; the first column with
/// nonzero image is normalized and its first nonzero entry made real positive.
fn projected_invariant(g: &FiniteGroup, irr: &[Irrep], i: usize, j: usize, k: usize) -> Result<Intertwiner> {
    let (di, dj, dk) = (irr[i].dim, irr[j].dim, irr[k].dim);
    let dim = di * dj * dk;
    let order = g.order();
    for col in 0..dim {
        let (b, d, f) = (col / (dj * dk), (col / dk) % dj, col % dk);
        let mut v = vec![c(0.0); dim];
        for a in 0..order {
            let (mi, mj, mk) = (&irr[i].matrices[a], &irr[j].matrices[a], &irr[k].matrices[a]);
            for x in 0..di {
                for y in 0..dj {
                    for z in 0..dk {
                        v[(x * dj + y) * dk + z] += mi.get(x, b) * mj.get(y, d) * mk.get(z, f);
                    }
                }
            }
        }
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() / order as f64;
        if norm <= 1e-8 {
            continue;
        }
        let scale = 1.0 / (norm * order as f64);
        for z in v.iter_mut() {
            *z *= scale;
        }
        let first = *v.iter().find(|z| z.norm() > 1e-9).expect("nonzero vector");
        let phase = first.norm() / first;
        for z in v.iter_mut() {
            *z *= phase;
        }
        return Ok(Intertwiner {
            labels: (i, j, k),
            dims: (di, dj, dk),
            tensor: v,
        });
    }
    Err(Error::NumericalInconsistency(format!("no invariant for ({i},{j},{k})")))
}

/// Smallest cyclic rotation of a label triple.
pub fn cyclic_class(t: (usize, usize, usize)) -> (usize, usize, usize) {
    let rots = [t, (t.1, t.2, t.0), (t.2, t.0, t.1)];
    *rots.iter().min().unwrap()
}

/// Invariant tensor for an admissible triple. The tensor of the
/// lexicographically smallest rotation is computed and the others are
/// obtained by cycling axes, so the family is cyclically symmetric.
pub fn intertwiner(g: &FiniteGroup, irr: &[Irrep], fusion: &FusionData, t: (usize, usize, usize)) -> Result<Intertwiner> {
    let (i, j, k) = t;
    match fusion.n(i, j, k) {
        0 => return Err(Error::NotAdmissible(vec![i, j, k])),
        1 => {}
        _ => return Err(Error::MultiplicityUnsupported),
    }
    let base = cyclic_class(t);
    let mut x = projected_invariant(g, irr, base.0, base.1, base.2)?;
    while x.labels != t {
        x = x.rotate_left();
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(name: &str) -> (FiniteGroup, Vec<Irrep>, FusionData) {
        let g = FiniteGroup::build(name).unwrap();
        let irr = irreps(&g).unwrap();
        let f = FusionData::from_irreps(&g, &irr).unwrap();
        (g, irr, f)
    }

    #[test]
    fn dimensions() {
        let dims = |n: &str| setup(n).1.iter().map(|r| r.dim).collect::<Vec<_>>();
        assert_eq!(dims("Z2"), vec![1, 1]);
        assert_eq!(dims("S3"), vec![1, 1, 2]);
        assert_eq!(dims("D4"), vec![1, 1, 1, 1, 2]);
    }

    #[test]
    fn z2_characters() {
        let (_, irr, _) = setup("Z2");
        assert_eq!(irr[0].character, vec![c(1.0), c(1.0)]);
        assert!((irr[1].character[1] - c(-1.0)).norm() < 1e-15);
    }

    #[test]
    fn fusion_examples() {
        let (_, _, f) = setup("Z2");
        assert_eq!(f.n(1, 1, 0), 1);
        let (_, _, f) = setup("S3");
        assert_eq!(f.n(2, 2, 2), 1);
        for name in ["Z3", "S3", "D4"] {
            let (_, _, f) = setup(name);
            for j in 0..f.rank() {
                for k in 0..f.rank() {
                    assert_eq!(f.n(0, j, k), u8::from(k == f.dual[j]));
                }
            }
        }
    }

    #[test]
    fn intertwiner_examples() {
        let (g, irr, f) = setup("Z2");
        let x = intertwiner(&g, &irr, &f, (1, 1, 0)).unwrap();
        assert_eq!(x.tensor, vec![c(1.0)]);
        assert_eq!(intertwiner(&g, &irr, &f, (1, 0, 0)), Err(Error::NotAdmissible(vec![1, 0, 0])));

        let (g, irr, f) = setup("S3");
        let x = intertwiner(&g, &irr, &f, (2, 2, 0)).unwrap();
        assert!((x.norm_sqr() - 1.0).abs() < 1e-12);
        // the standard irrep is real orthogonal, so the invariant form is δ/√2
        let r = 0.5f64.sqrt();
        assert!((x.get(0, 0, 0) - c(r)).norm() < 1e-12);
        assert!((x.get(1, 1, 0) - c(r)).norm() < 1e-12);
        assert!(x.get(0, 1, 0).norm() < 1e-12);
    }

    #[test]
    fn cyclic_rotation_consistency() {
        let (g, irr, f) = setup("D4");
        let a = intertwiner(&g, &irr, &f, (1, 4, 4)).unwrap();
        let b = intertwiner(&g, &irr, &f, (4, 4, 1)).unwrap();
        for x in 0..1 {
            for y in 0..2 {
                for z in 0..2 {
                    assert_eq!(a.get(x, y, z), b.get(y, z, x));
                }
            }
        }
    }
}
