//! Finite groups given by multiplication tables, their group algebras in the
//! left regular representation, and normal forms in amalgamated products of
//! two groups over a common subgroup.

use std::sync::Arc;

use serde::Deserialize;

use crate::algebra::{ConditionalExpectation, StarAlgebra};
use crate::error::{AmalgamError, Result};
use crate::linalg::{re, CMat};
use crate::fock::{fock_phi, lambda_word, FockSpace, ReducedWord};
use crate::module::Factor;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroup {
    table: Vec<Vec<usize>>,
    identity: usize,
    inverse: Vec<usize>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct GroupJson {
    pub order: usize,
    pub table: Vec<Vec<usize>>,
    #[serde(default)]
    pub subgroup: Vec<usize>,
}

impl FiniteGroup {
    /// `table[g][h]` is the index of `g h`.
    pub fn from_table(table: Vec<Vec<usize>>) -> Result<Self> {
        let n = table.len();
        if n == 0 {
            return Err(AmalgamError::Parse("empty multiplication table".into()));
        }
        for (g, row) in table.iter().enumerate() {
            if row.len() != n {
                return Err(AmalgamError::Parse(format!("row {g} has {} entries, expected {n}", row.len())));
            }
            if let Some(&bad) = row.iter().find(|&&x| x >= n) {
                return Err(AmalgamError::Parse(format!("entry {bad} in row {g} is out of range")));
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|g| table[e][g] == g && table[g][e] == g))
            .ok_or_else(|| AmalgamError::Structural("table has no identity element".into()))?;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(AmalgamError::Structural(format!(
                            "table is not associative at ({a}, {b}, {c})"
                        )));
                    }
                }
            }
        }
        let mut inverse = vec![0; n];
        for g in 0..n {
            inverse[g] = (0..n)
                .find(|&h| table[g][h] == identity)
                .ok_or_else(|| AmalgamError::Structural(format!("element {g} has no inverse")))?;
        }
        Ok(Self { table, identity, inverse })
    }

    pub fn from_json(g: &GroupJson) -> Result<Self> {
        if g.table.len() != g.order {
            return Err(AmalgamError::Parse(format!(
                "declared order {} but table has {} rows",
                g.order,
                g.table.len()
            )));
        }
        Self::from_table(g.table.clone())
    }

    pub fn cyclic(n: usize) -> Self {
        let table = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        Self::from_table(table).expect("cyclic group table")
    }

    /// Symmetric group on three letters. Elements are the permutations of
    /// `[0, 1, 2]` in lexicographic order, so index 0 is the identity and the
    /// even permutations are `{0, 3, 4}`.
    pub fn symmetric3() -> Self {
        let perms: Vec<[usize; 3]> =
            vec![[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let idx = |p: [usize; 3]| perms.iter().position(|q| *q == p).expect("permutation");
        let table = perms
            .iter()
            .map(|a| perms.iter().map(|b| idx([a[b[0]], a[b[1]], a[b[2]]])).collect())
            .collect();
        Self::from_table(table).expect("S3 table")
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, g: usize, h: usize) -> usize {
        self.table[g][h]
    }

    pub fn inv(&self, g: usize) -> usize {
        self.inverse[g]
    }

    pub fn check_subgroup(&self, h: &[usize]) -> Result<()> {
        if !h.contains(&self.identity) {
            return Err(AmalgamError::Structural("subgroup must contain the identity".into()));
        }
        for &a in h {
            if a >= self.order() {
                return Err(AmalgamError::Parse(format!("subgroup element {a} out of range")));
            }
            for &b in h {
                if !h.contains(&self.mul(a, self.inv(b))) {
                    return Err(AmalgamError::Structural("subset is not closed under a b^-1".into()));
                }
            }
        }
        Ok(())
    }

    /// `λ_g` on `ℓ²(G)`: `e_h -> e_{gh}`.
    pub fn regular(&self, g: usize) -> CMat {
        let n = self.order();
        let mut m = CMat::zeros(n, n);
        for h in 0..n {
            m[(self.mul(g, h), h)] = re(1.0);
        }
        m
    }

    /// Smallest-index representative of the right coset `H g`.
    pub fn right_coset_rep(&self, subgroup: &[usize], g: usize) -> usize {
        subgroup.iter().map(|&h| self.mul(h, g)).min().expect("nonempty subgroup")
    }
}

pub fn group_algebra(g: &FiniteGroup) -> Result<StarAlgebra> {
    let gens: Vec<CMat> = (0..g.order()).map(|x| g.regular(x)).collect();
    StarAlgebra::from_spanning(&gens)
}

/// `τ_H: Σ c_g λ_g -> Σ_{h ∈ H} c_h λ_h` from `C[G]` onto `C[H]`.
pub fn subgroup_expectation(g: &FiniteGroup, subgroup: &[usize]) -> Result<ConditionalExpectation> {
    g.check_subgroup(subgroup)?;
    let a = Arc::new(group_algebra(g)?);
    let hs: Vec<CMat> = subgroup.iter().map(|&h| g.regular(h)).collect();
    let b = Arc::new(StarAlgebra::from_spanning(&hs)?);
    let e = g.identity();
    let regs: Vec<(usize, CMat)> = subgroup.iter().map(|&h| (h, g.regular(h))).collect();
    ConditionalExpectation::from_fn(a, b, move |x| {
        let mut out = CMat::zeros(x.nrows(), x.ncols());
        for (h, lh) in &regs {
            out += lh * x[(*h, e)];
        }
        out
    })
}

/// Two groups with a common subgroup, identified through `subgroups[0][k]
/// <-> subgroups[1][k]`.
#[derive(Clone, Debug)]
pub struct Amalgam {
    pub groups: [FiniteGroup; 2],
    pub subgroups: [Vec<usize>; 2],
}

/// `h t_1 ... t_n` with `h` indexed in the common subgroup and each `t_j` a
/// nontrivial right-coset representative in the named factor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalForm {
    pub head: usize,
    pub reps: Vec<(usize, usize)>,
}

impl Amalgam {
    pub fn new(groups: [FiniteGroup; 2], subgroups: [Vec<usize>; 2]) -> Result<Self> {
        for i in 0..2 {
            groups[i].check_subgroup(&subgroups[i])?;
        }
        if subgroups[0].len() != subgroups[1].len() {
            return Err(AmalgamError::Structural("common subgroups have different orders".into()));
        }
        let (g0, g1) = (&groups[0], &groups[1]);
        for a in 0..subgroups[0].len() {
            for b in 0..subgroups[0].len() {
                let p0 = g0.mul(subgroups[0][a], subgroups[0][b]);
                let p1 = g1.mul(subgroups[1][a], subgroups[1][b]);
                let k0 = subgroups[0].iter().position(|&x| x == p0);
                let k1 = subgroups[1].iter().position(|&x| x == p1);
                if k0 != k1 {
                    return Err(AmalgamError::Structural(
                        "subgroup identification is not a homomorphism".into(),
                    ));
                }
            }
        }
        Ok(Self { groups, subgroups })
    }

    /// Same group twice, amalgamated over `subgroup`.
    pub fn doubled(g: FiniteGroup, subgroup: Vec<usize>) -> Result<Self> {
        Self::new([g.clone(), g], [subgroup.clone(), subgroup])
    }

    fn sub_index(&self, f: usize, g: usize) -> Option<usize> {
        self.subgroups[f].iter().position(|&x| x == g)
    }

    /// Normal form of the product of `(factor, element)` letters.
    pub fn normal_form(&self, word: &[(usize, usize)]) -> Result<NormalForm> {
        for &(f, g) in word {
            if f > 1 || g >= self.groups[f].order() {
                return Err(AmalgamError::Parameter(format!("letter ({f}, {g}) out of range")));
            }
        }
        // Reduce: merge neighbours from the same factor, absorb subgroup
        // letters into a neighbour.
        let mut letters: Vec<(usize, usize)> = word.to_vec();
        let mut head = self.sub_index(0, self.groups[0].identity()).expect("identity");
        loop {
            let mut changed = false;
            let mut i = 0;
            while i + 1 < letters.len() {
                let (f, a) = letters[i];
                let (f2, b) = letters[i + 1];
                if f == f2 {
                    letters[i] = (f, self.groups[f].mul(a, b));
                    letters.remove(i + 1);
                    changed = true;
                } else if let Some(k) = self.sub_index(f, a) {
                    let hb = self.subgroups[f2][k];
                    letters[i + 1] = (f2, self.groups[f2].mul(hb, b));
                    letters.remove(i);
                    changed = true;
                } else {
                    i += 1;
                }
            }
            if let Some(&(f, a)) = letters.last() {
                if letters.len() > 1 {
                    if let Some(k) = self.sub_index(f, a) {
                        let (f1, b) = letters[letters.len() - 2];
                        let n = letters.len();
                        letters[n - 2] = (f1, self.groups[f1].mul(b, self.subgroups[f1][k]));
                        letters.pop();
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        if letters.len() == 1 {
            let (f, a) = letters[0];
            if let Some(k) = self.sub_index(f, a) {
                letters.clear();
                head = k;
            }
        }
        // Right-to-left coset rewriting of the reduced word.
        let mut reps = Vec::with_capacity(letters.len());
        for &(f, g) in letters.iter().rev() {
            let grp = &self.groups[f];
            let x = grp.mul(g, self.subgroups[f][head]);
            let t = grp.right_coset_rep(&self.subgroups[f], x);
            let h = grp.mul(x, grp.inv(t));
            head = self.sub_index(f, h).expect("x t^-1 lies in the subgroup");
            reps.push((f, t));
        }
        reps.reverse();
        Ok(NormalForm { head, reps })
    }

    /// Factors for the Fock construction. The base is `C[H]` inside the
    /// regular representation of the first group.
    pub fn factors(&self) -> Result<(Arc<StarAlgebra>, Vec<Factor>)> {
        let phi0 = subgroup_expectation(&self.groups[0], &self.subgroups[0])?;
        let base = phi0.target().clone();
        let e0 = self.groups[0].identity();
        let mut factors = vec![Factor::same_ambient(phi0)?];
        let phi1 = subgroup_expectation(&self.groups[1], &self.subgroups[1])?;
        let images: Vec<CMat> = base
            .basis()
            .iter()
            .map(|beta| {
                let mut m = CMat::zeros(self.groups[1].order(), self.groups[1].order());
                for (k, &h0) in self.subgroups[0].iter().enumerate() {
                    m += self.groups[1].regular(self.subgroups[1][k]) * beta[(h0, e0)];
                }
                m
            })
            .collect();
        factors.push(Factor::new(phi1, &base, images)?);
        Ok((base, factors))
    }

    /// Predicted vacuum expectation of a word: `λ_h` on the base when the
    /// product lies in the common subgroup, zero otherwise.
    pub fn predicted_moment(&self, word: &[(usize, usize)]) -> Result<CMat> {
        let nf = self.normal_form(word)?;
        let g0 = &self.groups[0];
        if nf.reps.is_empty() {
            Ok(g0.regular(self.subgroups[0][nf.head]))
        } else {
            Ok(CMat::zeros(g0.order(), g0.order()))
        }
    }
}

/// `‖E(λ(g_1) ... λ(g_n)) - prediction‖` computed on the Fock module, whose
/// factors must be the ones produced by [`Amalgam::factors`].
pub fn compare_moments(fock: &Arc<FockSpace>, amalgam: &Amalgam, word: &[(usize, usize)]) -> Result<f64> {
    let letters = word
        .iter()
        .map(|&(f, g)| {
            if f > 1 || g >= amalgam.groups[f].order() {
                Err(AmalgamError::Parameter(format!("letter ({f}, {g}) out of range")))
            } else {
                Ok((f, amalgam.groups[f].regular(g)))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let op = lambda_word(fock, &ReducedWord::new(letters))?;
    let moment = fock_phi(&op)?;
    Ok((moment - amalgam.predicted_moment(word)?).norm())
}

/// Largest eigenvalue of the adjacency matrix of the path on `vertices`
/// vertices, by a dense real symmetric eigensolver.
pub fn path_graph_spectral_radius(vertices: usize) -> f64 {
    let adj = nalgebra::DMatrix::<f64>::from_fn(vertices, vertices, |i, j| if i.abs_diff(j) == 1 { 1.0 } else { 0.0 });
    adj.symmetric_eigenvalues().iter().copied().fold(0.0, f64::max)
}

/// Closed form `2 cos(π / (m + 1))` of the same quantity.
pub fn path_graph_closed_form(vertices: usize) -> f64 {
    2.0 * (std::f64::consts::PI / (vertices as f64 + 1.0)).cos()
}
