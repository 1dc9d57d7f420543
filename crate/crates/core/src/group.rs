//! Finite groups stored as explicit multiplication tables.

use crate::error::{Error, Result};

/// Concrete family a table was built from; irreps are constructed per family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupKind {
    Cyclic(usize),
    S3,
    D4,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    name: String,
    kind: GroupKind,
    order: usize,
    mult: Vec<usize>,
    inv: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConjugacyClass {
    pub representative: usize,
    pub members: Vec<usize>,
}

/// Permutations of {0,1,2} in lexicographic order; index 0 is the identity.
pub fn s3_permutations() -> [[usize; 3]; 6] {
    [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ]
}

/// D4 element `r^k s^m` is stored at index `k + 4m`.
pub fn d4_decompose(a: usize) -> (usize, usize) {
    (a % 4, a / 4)
}

impl FiniteGroup {
    /// Builds one of `Z<n>` (n >= 2), `S3`, `D4`.
    pub fn build(name: &str) -> Result<Self> {
        let name = name.trim();
        if let Some(rest) = name.strip_prefix('Z') {
            let n: usize = rest
                .parse()
                .map_err(|_| Error::UnknownGroup(name.to_string()))?;
            if n < 2 {
                return Err(Error::InvalidParameter(format!(
                    "cyclic group order must be at least 2, got {n}"
                )));
            }
            if n > 64 {
                return Err(Error::UnknownGroup(name.to_string()));
            }
            let mult = (0..n)
                .flat_map(|a| (0..n).map(move |b| (a + b) % n))
                .collect();
            return Self::from_table(name, GroupKind::Cyclic(n), n, mult);
        }
        match name {
            "S3" => {
                let perms = s3_permutations();
                let index = |p: [usize; 3]| perms.iter().position(|q| *q == p).unwrap();
                let mut mult = Vec::with_capacity(36);
                for p in &perms {
                    for q in &perms {
                        mult.push(index([p[q[0]], p[q[1]], p[q[2]]]));
                    }
                }
                Self::from_table("S3", GroupKind::S3, 6, mult)
            }
            "D4" => {
                let mut mult = Vec::with_capacity(64);
                for a in 0..8 {
                    for b in 0..8 {
                        let (k1, m1) = d4_decompose(a);
                        let (k2, m2) = d4_decompose(b);
                        let k = if m1 == 0 { (k1 + k2) % 4 } else { (k1 + 4 - k2) % 4 };
                        mult.push(k + 4 * ((m1 + m2) % 2));
                    }
                }
                Self::from_table("D4", GroupKind::D4, 8, mult)
            }
            _ => Err(Error::UnknownGroup(name.to_string())),
        }
    }

    fn from_table(name: &str, kind: GroupKind, order: usize, mult: Vec<usize>) -> Result<Self> {
        let bad = |msg: &str| Error::NumericalInconsistency(format!("{name}: {msg}"));
        if mult.len() != order * order || mult.iter().any(|&x| x >= order) {
            return Err(bad("malformed table"));
        }
        for g in 0..order {
            if mult[g] != g || mult[g * order] != g {
                return Err(bad("element 0 is not the identity"));
            }
        }
        let mut inv = vec![usize::MAX; order];
        for g in 0..order {
            for h in 0..order {
                if mult[g * order + h] == 0 {
                    inv[g] = h;
                }
            }
            if inv[g] == usize::MAX || mult[inv[g] * order + g] != 0 {
                return Err(bad("missing inverse"));
            }
        }
        let group = FiniteGroup {
            name: name.to_string(),
            kind,
            order,
            mult,
            inv,
        };
        if order <= 48 && !group.is_associative() {
            return Err(bad("not associative"));
        }
        Ok(group)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mult[a * self.order + b]
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inv[a]
    }

    pub fn conjugate(&self, k: usize, g: usize) -> usize {
        self.mul(self.mul(k, g), self.inv(k))
    }

    pub fn is_associative(&self) -> bool {
        let n = self.order;
        (0..n).all(|a| {
            (0..n).all(|b| (0..n).all(|c| self.mul(self.mul(a, b), c) == self.mul(a, self.mul(b, c))))
        })
    }

    pub fn is_abelian(&self) -> bool {
        let n = self.order;
        (0..n).all(|a| (0..n).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    /// Classes ordered by smallest member; members sorted.
    pub fn conjugacy_classes(&self) -> Vec<ConjugacyClass> {
        let n = self.order;
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for g in 0..n {
            if seen[g] {
                continue;
            }
            let mut members: Vec<usize> = (0..n).map(|k| self.conjugate(k, g)).collect();
            members.sort_unstable();
            members.dedup();
            for &m in &members {
                seen[m] = true;
            }
            out.push(ConjugacyClass {
                representative: g,
                members,
            });
        }
        out
    }

    /// Index of the class containing each element.
    pub fn class_index(&self) -> Vec<usize> {
        let mut idx = vec![0; self.order];
        for (c, class) in self.conjugacy_classes().iter().enumerate() {
            for &m in &class.members {
                idx[m] = c;
            }
        }
        idx
    }

    /// Orbits of commuting pairs under simultaneous conjugation.
    pub fn commuting_pair_orbit_count(&self) -> usize {
        let n = self.order;
        let mut seen = vec![false; n * n];
        let mut orbits = 0;
        for g in 0..n {
            for h in 0..n {
                if self.mul(g, h) != self.mul(h, g) || seen[g * n + h] {
                    continue;
                }
                orbits += 1;
                for k in 0..n {
                    seen[self.conjugate(k, g) * n + self.conjugate(k, h)] = true;
                }
            }
        }
        orbits
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z2_table() {
        let g = FiniteGroup::build("Z2").unwrap();
        assert_eq!(g.order(), 2);
        assert_eq!(g.mul(1, 1), 0);
    }

    #[test]
    fn degenerate_and_unknown() {
        assert!(matches!(FiniteGroup::build("Z0"), Err(Error::InvalidParameter(_))));
        assert!(matches!(FiniteGroup::build("Z1"), Err(Error::InvalidParameter(_))));
        assert!(matches!(FiniteGroup::build("Q8"), Err(Error::UnknownGroup(_))));
        assert!(matches!(FiniteGroup::build("Z9999"), Err(Error::UnknownGroup(_))));
    }

    #[test]
    fn s3_is_nonabelian_with_expected_classes() {
        let g = FiniteGroup::build("S3").unwrap();
        assert!(!g.is_abelian());
        let mut sizes: Vec<usize> = g.conjugacy_classes().iter().map(|c| c.members.len()).collect();
        sizes.sort();
        assert_eq!(sizes, vec![1, 2, 3]);
    }

    #[test]
    fn abelian_classes_are_singletons() {
        for name in ["Z2", "Z3", "Z4"] {
            let g = FiniteGroup::build(name).unwrap();
            assert_eq!(g.conjugacy_classes().len(), g.order());
        }
    }

    #[test]
    fn commuting_pairs() {
        let count = |s: &str| FiniteGroup::build(s).unwrap().commuting_pair_orbit_count();
        assert_eq!(count("Z2"), 4);
        assert_eq!(count("Z3"), 9);
        assert_eq!(count("S3"), 8);
        assert_eq!(count("D4"), 22);
    }

    #[test]
    fn d4_relation() {
        let g = FiniteGroup::build("D4").unwrap();
        let (r, s) = (1, 4);
        // s r s = r^-1
        assert_eq!(g.mul(g.mul(s, r), s), g.inv(r));
        assert!(!g.is_abelian());
    }
}
