//! F-symbols from planar contraction of intertwiners, sign gauge fixing,
//! pentagon and tetrahedral-symmetry checks.

use crate::error::{Error, Result};
use crate::group::FiniteGroup;
use crate::rep::{cyclic_class, intertwiner, irreps, FusionData, Intertwiner, Irrep};
use crate::C64;
use rayon::prelude::*;
use std::collections::BTreeMap;

/// Six-label table `F^{ijm}_{kln}` with the vertex weights `v_j`.
#[derive(Debug, Clone)]
pub struct FSymbolTable {
    rank: usize,
    pub dual: Vec<usize>,
    pub v: Vec<f64>,
    admissible: Vec<bool>,
    f: Vec<C64>,
}

impl FSymbolTable {
    pub fn rank(&self) -> usize {
        self.rank
    }

    #[inline]
    fn idx(&self, t: [usize; 6]) -> usize {
        t.iter().fold(0, |acc, &x| acc * self.rank + x)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, m: usize, k: usize, l: usize, n: usize) -> C64 {
        self.f[self.idx([i, j, m, k, l, n])]
    }

    pub fn set(&mut self, labels: [usize; 6], value: C64) {
        let k = self.idx(labels);
        self.f[k] = value;
    }

    /// Adds `delta` to a single entry; used to check that verifiers are not vacuous.
    pub fn corrupted(&self, labels: [usize; 6], delta: C64) -> Self {
        let mut t = self.clone();
        let k = t.idx(labels);
        t.f[k] += delta;
        t
    }

    #[inline]
    pub fn admissible(&self, i: usize, j: usize, k: usize) -> bool {
        self.admissible[(i * self.rank + j) * self.rank + k]
    }

    /// Tetrahedrally symmetric symbol `F^{ijm}_{kln} / (v_m v_n)`.
    #[inline]
    pub fn symmetric(&self, i: usize, j: usize, m: usize, k: usize, l: usize, n: usize) -> C64 {
        self.get(i, j, m, k, l, n) / (self.v[m] * self.v[n])
    }

    /// Labels of the largest entry in magnitude among admissible sextuples
    /// with a nontrivial irrep everywhere possible; handy for mutation tests.
    pub fn generic_entry(&self) -> [usize; 6] {
        let r = self.rank;
        let mut best = [0; 6];
        let mut score = (0usize, 0.0f64);
        for k in 0..self.f.len() {
            if self.f[k].norm() < 1e-9 {
                continue;
            }
            let mut t = [0; 6];
            let mut x = k;
            for p in (0..6).rev() {
                t[p] = x % r;
                x /= r;
            }
            let nz = t.iter().filter(|&&y| y != 0).count();
            if (nz, self.f[k].norm()) > score {
                score = (nz, self.f[k].norm());
                best = t;
            }
        }
        best
    }
}

/// Max residual of the pentagon identity over all label assignments.
pub fn verify_pentagon(f: &FSymbolTable) -> f64 {
    let r = f.rank;
    let du = &f.dual;
    (0..r)
        .into_par_iter()
        .map(|j| {
            let mut worst: f64 = 0.0;
            for i in 0..r {
                for p in 0..r {
                    for m in 0..r {
                        for l in 0..r {
                            for q in 0..r {
                                for k in 0..r {
                                    for s in 0..r {
                                        for rr in 0..r {
                                            let mut lhs = C64::new(0.0, 0.0);
                                            for n in 0..r {
                                                lhs += f.get(m, l, q, k, du[p], n)
                                                    * f.get(j, i, p, m, n, du[s])
                                                    * f.get(j, du[s], n, l, k, du[rr]);
                                            }
                                            let rhs = f.get(j, i, p, du[q], k, du[rr]) * f.get(rr, i, du[q], m, l, du[s]);
                                            worst = worst.max((lhs - rhs).norm());
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
            worst
        })
        .reduce(|| 0.0, f64::max)
}

/// Max deviation among the tetrahedral relabelings
/// `F^{ijm}_{kln} = F^{lkm*}_{jin} = F^{jim}_{lkn*} = F^{imj}_{k*nl} v_m v_n / (v_j v_l)`.
pub fn tetrahedral_residual(f: &FSymbolTable) -> f64 {
    let r = f.rank;
    let du = &f.dual;
    let v = &f.v;
    let mut worst: f64 = 0.0;
    for t in 0..r.pow(6) {
        let mut x = t;
        let mut a = [0; 6];
        for p in (0..6).rev() {
            a[p] = x % r;
            x /= r;
        }
        let [i, j, m, k, l, n] = a;
        let base = f.get(i, j, m, k, l, n);
        let b = f.get(l, k, du[m], j, i, n);
        let c = f.get(j, i, m, l, k, du[n]);
        let e = f.get(i, m, j, du[k], n, l) * (v[m] * v[n] / (v[j] * v[l]));
        worst = worst.max((base - b).norm()).max((base - c).norm()).max((base - e).norm());
    }
    worst
}

/// Max deviation from `F^{ijk}_{j*i*0} = N_ijk v_k / (v_i v_j)`.
pub fn normalization_residual(f: &FSymbolTable) -> f64 {
    let r = f.rank;
    let du = &f.dual;
    let mut worst: f64 = 0.0;
    for i in 0..r {
        for j in 0..r {
            for k in 0..r {
                let want = if f.admissible(i, j, k) {
                    f.v[k] / (f.v[i] * f.v[j])
                } else {
                    0.0
                };
                worst = worst.max((f.get(i, j, k, du[j], du[i], 0) - want).norm());
            }
        }
    }
    worst
}

/// Everything downstream modules need about a group's representation theory.
#[derive(Debug, Clone)]
pub struct RepData {
    pub group: FiniteGroup,
    pub irreps: Vec<Irrep>,
    pub fusion: FusionData,
    inter: Vec<Option<Intertwiner>>,
    pub f: FSymbolTable,
    /// Sign choices made while fixing the gauge: `v_j / sqrt(d_j)` per label.
    pub kappa: Vec<i8>,
    /// Cyclic classes of intertwiners whose sign was flipped.
    pub flipped: Vec<(usize, usize, usize)>,
}

impl RepData {
    pub fn new(group: FiniteGroup) -> Result<Self> {
        let irr = irreps(&group)?;
        let fusion = FusionData::from_irreps(&group, &irr)?;
        if !fusion.is_multiplicity_free() {
            return Err(Error::MultiplicityUnsupported);
        }
        let r = fusion.rank();
        let mut inter = vec![None; r * r * r];
        for i in 0..r {
            for j in 0..r {
                for k in 0..r {
                    if fusion.admissible(i, j, k) {
                        inter[(i * r + j) * r + k] = Some(intertwiner(&group, &irr, &fusion, (i, j, k))?);
                    }
                }
            }
        }
        let mut data = RepData {
            f: build_table(&fusion, &inter, vec![1.0; r])?,
            group,
            irreps: irr,
            fusion,
            inter,
            kappa: vec![1; r],
            flipped: Vec::new(),
        };
        data.fix_gauge()?;
        Ok(data)
    }

    pub fn build(name: &str) -> Result<Self> {
        Self::new(FiniteGroup::build(name)?)
    }

    pub fn rank(&self) -> usize {
        self.fusion.rank()
    }

    pub fn dim(&self, j: usize) -> usize {
        self.fusion.dims[j]
    }

    pub fn dual(&self, j: usize) -> usize {
        self.fusion.dual[j]
    }

    pub fn order(&self) -> usize {
        self.group.order()
    }

    pub fn intertwiner(&self, i: usize, j: usize, k: usize) -> Option<&Intertwiner> {
        let r = self.rank();
        self.inter[(i * r + j) * r + k].as_ref()
    }

    /// Labels whose conjugate character equals their own.
    pub fn is_self_dual(&self, j: usize) -> bool {
        self.dual(j) == j
    }

    /// Chooses signs `v_j = ±sqrt(d_j)` and per-class intertwiner signs so that
    /// `F^{ijk}_{j*i*0} = v_k/(v_i v_j)` for every admissible triple.
    fn fix_gauge(&mut self) -> Result<()> {
        let r = self.rank();
        let du = self.fusion.dual.clone();
        let d: Vec<f64> = self.fusion.dims.iter().map(|&x| x as f64).collect();
        let mut triples = Vec::new();
        for i in 0..r {
            for j in 0..r {
                for k in 0..r {
                    if self.fusion.admissible(i, j, k) {
                        triples.push((i, j, k));
                    }
                }
            }
        }
        for bits in 0..(1u32 << (r - 1)) {
            // kappa_0 = 1; remaining signs enumerated with the last label varying fastest
            let kappa: Vec<f64> = (0..r)
                .map(|j| {
                    if j == 0 {
                        1.0
                    } else if bits >> (r - 1 - j) & 1 == 1 {
                        -1.0
                    } else {
                        1.0
                    }
                })
                .collect();
            let mut sig: BTreeMap<(usize, usize, usize), f64> = BTreeMap::new();
            let mut ok = true;
            for &(i, j, k) in &triples {
                let val = self.f.get(i, j, k, du[j], du[i], 0);
                let target = kappa[i] * kappa[j] * kappa[k] * d[k].sqrt() / (d[i] * d[j]).sqrt();
                let ratio = val / target;
                let sgn = ratio.re.signum();
                if (ratio - C64::new(sgn, 0.0)).norm() > 1e-9 {
                    ok = false;
                    break;
                }
                let c1 = cyclic_class((i, j, k));
                let c2 = cyclic_class((du[j], du[i], du[k]));
                if c1 == c2 {
                    if sgn < 0.0 {
                        ok = false;
                        break;
                    }
                    continue;
                }
                match (sig.get(&c1).copied(), sig.get(&c2).copied()) {
                    (Some(a), Some(b)) => {
                        if a * b * sgn < 0.0 {
                            ok = false;
                            break;
                        }
                    }
                    (Some(a), None) => {
                        sig.insert(c2, a * sgn);
                    }
                    (None, Some(b)) => {
                        sig.insert(c1, b * sgn);
                    }
                    (None, None) => {
                        sig.insert(c1, 1.0);
                        sig.insert(c2, sgn);
                    }
                }
            }
            if !ok {
                continue;
            }
            for slot in self.inter.iter_mut().flatten() {
                if let Some(&s) = sig.get(&cyclic_class(slot.labels)) {
                    if s < 0.0 {
                        *slot = slot.scaled(-1.0);
                    }
                }
            }
            self.flipped = sig.iter().filter(|(_, &s)| s < 0.0).map(|(c, _)| *c).collect();
            self.kappa = kappa.iter().map(|&x| x as i8).collect();
            let v: Vec<f64> = (0..r).map(|j| kappa[j] * d[j].sqrt()).collect();
            self.f = build_table(&self.fusion, &self.inter, v)?;
            let res = normalization_residual(&self.f);
            if res > 1e-9 {
                return Err(Error::NumericalInconsistency(format!(
                    "normalization residual {res:e} after gauge fixing"
                )));
            }
            return Ok(());
        }
        Err(Error::NumericalInconsistency("no sign gauge satisfies the normalization".into()))
    }
}

fn build_table(fusion: &FusionData, inter: &[Option<Intertwiner>], v: Vec<f64>) -> Result<FSymbolTable> {
    let r = fusion.rank();
    let du = &fusion.dual;
    let dims = &fusion.dims;
    // scaled vertex tensors W = V (d_a d_b d_c)^{1/4}
    let scaled: Vec<Option<Intertwiner>> = inter
        .iter()
        .map(|x| {
            x.as_ref().map(|t| {
                let (a, b, c) = t.labels;
                t.scaled(((dims[a] * dims[b] * dims[c]) as f64).powf(0.25))
            })
        })
        .collect();
    let w = |a: usize, b: usize, c: usize| scaled[(a * r + b) * r + c].as_ref();
    let mut f = vec![C64::new(0.0, 0.0); r.pow(6)];
    let mut idx = 0;
    for i in 0..r {
        for j in 0..r {
            for m in 0..r {
                for k in 0..r {
                    for l in 0..r {
                        for n in 0..r {
                            let cur = idx;
                            idx += 1;
                            let (Some(top), Some(bot), Some(left), Some(right)) =
                                (w(j, i, m), w(du[m], l, k), w(n, i, l), w(j, du[n], k))
                            else {
                                continue;
                            };
                            let (di, dj, dk, dl) = (dims[i], dims[j], dims[k], dims[l]);
                            let mut overlap = C64::new(0.0, 0.0);
                            let mut gram = 0.0;
                            for x in 0..di {
                                for y in 0..dj {
                                    for z in 0..dk {
                                        for ww in 0..dl {
                                            let mut lhs = C64::new(0.0, 0.0);
                                            for a in 0..dims[m] {
                                                lhs += top.get(y, x, a) * bot.get(a, ww, z);
                                            }
                                            let mut ch = C64::new(0.0, 0.0);
                                            for b in 0..dims[n] {
                                                ch += left.get(b, x, ww) * right.get(y, b, z);
                                            }
                                            overlap += ch.conj() * lhs;
                                            gram += ch.norm_sqr();
                                        }
                                    }
                                }
                            }
                            if gram < 1e-12 {
                                return Err(Error::NumericalInconsistency(format!(
                                    "singular channel for ({i},{j},{m},{k},{l},{n})"
                                )));
                            }
                            f[cur] = overlap / gram;
                        }
                    }
                }
            }
        }
    }
    let mut admissible = vec![false; r * r * r];
    for (t, slot) in admissible.iter_mut().enumerate() {
        *slot = fusion.n(t / (r * r), (t / r) % r, t % r) > 0;
    }
    Ok(FSymbolTable {
        rank: r,
        dual: du.clone(),
        v,
        admissible,
        f,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z2_table_is_all_ones_on_admissible() {
        let data = RepData::build("Z2").unwrap();
        let f = &data.f;
        for t in 0..64usize {
            let a: Vec<usize> = (0..6).rev().map(|p| (t >> p) & 1).collect();
            let adm = (a[0] ^ a[1] ^ a[2]) == 0
                && (a[3] ^ a[4] ^ a[2]) == 0
                && (a[0] ^ a[4] ^ a[5]) == 0
                && (a[1] ^ a[3] ^ a[5]) == 0;
            let want = if adm { 1.0 } else { 0.0 };
            assert!((f.get(a[0], a[1], a[2], a[3], a[4], a[5]) - want).norm() < 1e-12);
        }
    }

    #[test]
    fn trivial_recoupling_is_identity_like() {
        for name in ["Z3", "S3", "D4"] {
            let data = RepData::build(name).unwrap();
            assert!(normalization_residual(&data.f) < 1e-12, "{name}");
            assert!(tetrahedral_residual(&data.f) < 1e-12, "{name}");
        }
    }

    #[test]
    fn gauge_signs() {
        let s3 = RepData::build("S3").unwrap();
        assert_eq!(s3.kappa, vec![1, -1, 1]);
        let d4 = RepData::build("D4").unwrap();
        assert_eq!(d4.kappa, vec![1, -1, 1, 1, 1]);
        assert_eq!(d4.flipped, vec![(1, 3, 2)]);
        let z3 = RepData::build("Z3").unwrap();
        assert!(z3.kappa.iter().all(|&k| k == 1));
    }

    #[test]
    fn intertwiners_invariant_and_normalized() {
        for name in ["Z2", "Z3", "Z4", "S3", "D4"] {
            let data = RepData::build(name).unwrap();
            let r = data.rank();
            for i in 0..r {
                for j in 0..r {
                    for k in 0..r {
                        if let Some(x) = data.intertwiner(i, j, k) {
                            assert!(x.invariance_residual(&data.irreps) < 1e-10);
                            assert!((x.norm_sqr() - 1.0).abs() < 1e-12);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn corrupted_entry_breaks_pentagon() {
        let data = RepData::build("S3").unwrap();
        let bad = data.f.corrupted(data.f.generic_entry(), C64::new(0.1, 0.0));
        assert!(verify_pentagon(&bad) > 1e-3);
    }
}
