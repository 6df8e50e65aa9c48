//! Explicit finite expansions of `Φ_k` on reduced words and on `B`, as
//! rank-one operators on `E(→k)` plus `V_{p,ι}`-conjugated bowtie terms.
//!
//! A bowtie term `V_{p,ι}((θ_x M θ_y*) ⊗ 1_R)V_{p,ι}*` with `x ∈ S(w_x)`,
//! `y ∈ S(w_y)` and `M` on `E°_ι` acts from `S(w_y ι r)` to `S(w_x ι r)` for
//! every tail `r` of length `p - 1` starting off `ι`. `None` for `x` or `y`
//! stands for `η`.

use std::sync::Arc;

use super::concat::Concatenator;
use super::CompressedOperator;
use crate::error::{AmalgamError, Result};
use crate::fock::{elementary_tensor, words_of_length, FockSpace, ReducedWord, Word};
use crate::linalg::{identity, kron, kron_vec_identity, CMat, CVec};

/// Which line of the expansion a term comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TermKind {
    /// `θ_{x,y}` on `E(→k)`.
    RankOne,
    /// `θ_η 1 θ_y*`: the word annihilates completely.
    Annihilation,
    /// `θ_x 1 θ_η*`: the word creates completely.
    Creation,
    /// `θ_x 1 θ_y*` with both sides nonempty.
    Split,
    /// `θ_x P°aP° θ_y*` around one letter.
    Middle,
    /// `θ_η b θ_η*` for `b ∈ B`.
    Scalar,
}

#[derive(Clone, Debug)]
pub struct ExpansionTerm {
    pub kind: TermKind,
    /// `0` for rank-one terms.
    pub p: usize,
    pub iota: Option<usize>,
    pub matrix: CMat,
}

#[derive(Clone, Debug)]
pub struct Expansion {
    pub k: usize,
    /// Carrier dimension of `E(→k)`.
    pub dim: usize,
    pub terms: Vec<ExpansionTerm>,
}

impl Expansion {
    pub fn total(&self) -> CMat {
        self.sum(|_| true)
    }

    pub fn sum(&self, keep: impl Fn(&ExpansionTerm) -> bool) -> CMat {
        let mut out = CMat::zeros(self.dim, self.dim);
        for t in self.terms.iter().filter(|t| keep(t)) {
            out += &t.matrix;
        }
        out
    }
}

/// Carrier vector of `â_1 ⊗ ... ⊗ â_n` inside its own sector.
fn tensor_in_sector(fock: &FockSpace, letters: &[(usize, CMat)]) -> Result<(Word, CVec)> {
    let w = ReducedWord::new(letters.to_vec());
    let full = elementary_tensor(fock, &w)?;
    let word = w.indices();
    let s = fock.sector(&word).expect("sector of an elementary tensor");
    Ok((word, full.rows(s.offset, s.dim()).into_owned()))
}

/// `â_q* ⊗ ... ⊗ â_{j+1}*` for the letters `j+1..q` (1-based).
fn adjoint_tail(fock: &FockSpace, letters: &[(usize, CMat)], j: usize) -> Result<(Word, CVec)> {
    let rev: Vec<(usize, CMat)> = letters[j..].iter().rev().map(|(i, a)| (*i, a.adjoint())).collect();
    tensor_in_sector(fock, &rev)
}

/// Block of one bowtie term from `S(w_y ι r)` to `S(w_x ι r)`.
#[allow(clippy::too_many_arguments)]
fn bowtie_block(
    fock: &FockSpace,
    cat: &mut Concatenator,
    x: Option<(&Word, &CVec)>,
    y: Option<(&Word, &CVec)>,
    iota: usize,
    r: &[usize],
    middle: Option<&CMat>,
) -> Result<CMat> {
    let mut head = vec![iota];
    head.extend_from_slice(r);
    let hs = fock.sector(&head).ok_or(AmalgamError::Cap { word_len: head.len(), cap: fock.cap() })?;
    let dh = hs.dim();
    let n = match middle {
        None => identity(dh),
        Some(m) if r.is_empty() => m.clone(),
        Some(m) => {
            let dr = fock.sector(r).expect("tail").dim();
            &hs.j * kron(m, &identity(dr)) * &hs.j_pinv
        }
    };
    let left = match x {
        None => n,
        Some((wx, xv)) => cat.cat(wx, &head)? * kron_vec_identity(xv, dh) * n,
    };
    Ok(match y {
        None => left,
        Some((wy, yv)) => {
            let sy = &fock.sector(wy).expect("sector").module;
            let lh = hs.module.left_b_matrices().ok_or_else(|| {
                AmalgamError::Structural("sector has no left action of the base".into())
            })?;
            let mut ann = CMat::zeros(dh, sy.dim() * dh);
            for (g, l) in sy.inner_matrices().iter().zip(lh) {
                let row = CMat::from_row_slice(1, g.ncols(), (yv.adjoint() * g).as_slice());
                ann += kron(&row, l);
            }
            let pinv = cat.get(wy, &head)?.cat_pinv.clone();
            left * ann * pinv
        }
    })
}

/// The bowtie term amplified over all tails of length `p - 1`, on `E(→k)`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn amplified(
    fock: &Arc<FockSpace>,
    cat: &mut Concatenator,
    k: usize,
    p: usize,
    iota: usize,
    x: Option<(&Word, &CVec)>,
    y: Option<(&Word, &CVec)>,
    middle: Option<&CMat>,
) -> Result<CMat> {
    let dim = fock.prefix_dim(k);
    let mut out = CMat::zeros(dim, dim);
    let wx: Word = x.map(|(w, _)| w.clone()).unwrap_or_default();
    let wy: Word = y.map(|(w, _)| w.clone()).unwrap_or_default();
    for r in words_of_length(fock.num_factors(), p - 1) {
        if r.first() == Some(&iota) {
            continue;
        }
        let tail: Word = std::iter::once(iota).chain(r.iter().copied()).collect();
        let to: Word = wx.iter().chain(&tail).copied().collect();
        let from: Word = wy.iter().chain(&tail).copied().collect();
        if to.len() > k || from.len() > k {
            return Err(AmalgamError::Structural(format!("bowtie term leaves E(→{k}) at {to:?} <- {from:?}")));
        }
        let block = bowtie_block(fock, cat, x, y, iota, &r, middle)?;
        let t = fock.sector(&to).expect("sector");
        let f = fock.sector(&from).expect("sector");
        let mut view = out.view_mut((t.offset, f.offset), (t.dim(), f.dim()));
        view += block;
    }
    Ok(out)
}

/// All terms of the expansion of `Φ_k(a_1 ... a_q)`.
pub fn expand_phi_k_word(fock: &Arc<FockSpace>, word: &ReducedWord, k: usize, cat: &mut Concatenator) -> Result<Expansion> {
    word.check_reduced(fock, 1e-10)?;
    let q = word.len();
    if q == 0 {
        return Err(AmalgamError::Precondition("the empty word is a scalar; use the scalar expansion".into()));
    }
    if fock.cap() < k + q {
        return Err(AmalgamError::Truncation(format!("cap {} is below k + q = {}", fock.cap(), k + q)));
    }
    let a = &word.letters;
    let idx = word.indices();
    let (qi, ki) = (q as isize, k as isize);
    let dim = fock.prefix_dim(k);
    let mut terms = Vec::new();

    for j in (qi - ki).max(0) as usize..=q.min(k) {
        let (wx, x) = tensor_in_sector(fock, &a[..j])?;
        let (wy, y) = adjoint_tail(fock, a, j)?;
        let sx = fock.sector(&wx).expect("sector");
        let sy = fock.sector(&wy).expect("sector");
        let mut m = CMat::zeros(dim, dim);
        m.view_mut((sx.offset, sy.offset), (sx.dim(), sy.dim()))
            .copy_from(&sy.module.theta_to(&sx.module, &x, &y));
        terms.push(ExpansionTerm { kind: TermKind::RankOne, p: 0, iota: None, matrix: m });
    }

    let (wfull, full) = tensor_in_sector(fock, a)?;
    let (wstar, star) = adjoint_tail(fock, a, 0)?;
    for p in 1..=k.saturating_sub(q) {
        for iota in 0..fock.num_factors() {
            if iota != idx[0] {
                let m = amplified(fock, cat, k, p, iota, None, Some((&wstar, &star)), None)?;
                terms.push(ExpansionTerm { kind: TermKind::Annihilation, p, iota: Some(iota), matrix: m });
            }
            if iota != idx[q - 1] {
                let m = amplified(fock, cat, k, p, iota, Some((&wfull, &full)), None, None)?;
                terms.push(ExpansionTerm { kind: TermKind::Creation, p, iota: Some(iota), matrix: m });
            }
        }
    }

    let p_split = (ki - 1).min(ki - (qi + 1) / 2);
    for p in 1..=p_split.max(0) as usize {
        let pi = p as isize;
        for j in (pi + qi - ki).max(1)..=(qi - 1).min(ki - pi) {
            let j = j as usize;
            let (wx, x) = tensor_in_sector(fock, &a[..j])?;
            let (wy, y) = adjoint_tail(fock, a, j)?;
            for iota in 0..fock.num_factors() {
                if iota == idx[j - 1] || iota == idx[j] {
                    continue;
                }
                let m = amplified(fock, cat, k, p, iota, Some((&wx, &x)), Some((&wy, &y)), None)?;
                terms.push(ExpansionTerm { kind: TermKind::Split, p, iota: Some(iota), matrix: m });
            }
        }
    }

    for p in 1..=(ki - qi / 2).max(0) as usize {
        let pi = p as isize;
        for j in (pi + qi - ki).max(1)..=qi.min(ki - pi + 1) {
            let j = j as usize;
            let (iota, aj) = &a[j - 1];
            let fs = &fock.factors()[*iota];
            let middle = fs.w.adjoint() * fs.pi(aj)? * &fs.w;
            let x = if j > 1 { Some(tensor_in_sector(fock, &a[..j - 1])?) } else { None };
            let y = if j < q { Some(adjoint_tail(fock, a, j)?) } else { None };
            let m = amplified(
                fock,
                cat,
                k,
                p,
                *iota,
                x.as_ref().map(|(w, v)| (w, v)),
                y.as_ref().map(|(w, v)| (w, v)),
                Some(&middle),
            )?;
            terms.push(ExpansionTerm { kind: TermKind::Middle, p, iota: Some(*iota), matrix: m });
        }
    }
    Ok(Expansion { k, dim, terms })
}

/// All terms of the expansion of `Φ_k(b)`, `b ∈ B`.
pub fn expand_phi_k_scalar(fock: &Arc<FockSpace>, b: &CMat, k: usize, cat: &mut Concatenator) -> Result<Expansion> {
    if k > fock.cap() {
        return Err(AmalgamError::Parameter(format!("k = {k} exceeds the cap {}", fock.cap())));
    }
    let base = fock.base();
    if !base.algebra.contains(b, 1e-8) {
        return Err(AmalgamError::Domain("element is not in the base algebra".into()));
    }
    let coords = base.coords(b);
    let bq = fock.base_module();
    let bhat = &bq.j * &coords;
    let xi = bq.module.specified().expect("unit vector");
    let dim = fock.prefix_dim(k);
    let mut first = CMat::zeros(dim, dim);
    let d0 = bq.module.dim();
    first.view_mut((0, 0), (d0, d0)).copy_from(&bq.module.theta(&bhat, xi));
    let mut terms = vec![ExpansionTerm { kind: TermKind::RankOne, p: 0, iota: None, matrix: first }];
    for p in 1..=k {
        for iota in 0..fock.num_factors() {
            let middle = fock.factors()[iota].complement.left_b_from_coords(&coords)?;
            let m = amplified(fock, cat, k, p, iota, None, None, Some(&middle))?;
            terms.push(ExpansionTerm { kind: TermKind::Scalar, p, iota: Some(iota), matrix: m });
        }
    }
    Ok(Expansion { k, dim, terms })
}

/// `Φ_k(a_1 ... a_q)` assembled from its explicit expansion.
pub fn explicit_phi_k_word(
    fock: &Arc<FockSpace>,
    word: &ReducedWord,
    k: usize,
    cat: &mut Concatenator,
) -> Result<CompressedOperator> {
    let q = word.len();
    let matrix = if q == 0 {
        explicit_phi_k_scalar(fock, &fock.base().algebra.unit(), k, cat)?.matrix
    } else {
        expand_phi_k_word(fock, word, k, cat)?.total()
    };
    Ok(CompressedOperator { k, matrix, band_up: q, band_down: q })
}

/// `Φ_k(b)` assembled from its explicit expansion.
pub fn explicit_phi_k_scalar(fock: &Arc<FockSpace>, b: &CMat, k: usize, cat: &mut Concatenator) -> Result<CompressedOperator> {
    let matrix = expand_phi_k_scalar(fock, b, k, cat)?.total();
    Ok(CompressedOperator { k, matrix, band_up: 0, band_down: 0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cp_maps::compress_phi_k;
    use crate::examples::{example, Example};
    use crate::fock::{lambda_word, BlockOperator, FockSpace};
    use crate::linalg::{op_norm, C64};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_word(ex: &Example, letters: usize, q: usize, rng: &mut ChaCha8Rng) -> ReducedWord {
        let mut out = Vec::new();
        let mut prev = usize::MAX;
        for _ in 0..q {
            let mut i = rng.gen_range(0..letters);
            while i == prev {
                i = rng.gen_range(0..letters);
            }
            let c = &ex.centered[i.min(ex.centered.len() - 1)];
            let mut a = CMat::zeros(c[0].nrows(), c[0].ncols());
            for b in c {
                a += b * C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
            out.push((i, a));
            prev = i;
        }
        ReducedWord::new(out)
    }

    fn check(fock: &Arc<FockSpace>, w: &ReducedWord, k: usize) -> f64 {
        let mut cat = Concatenator::new(fock);
        let explicit = explicit_phi_k_word(fock, w, k, &mut cat).unwrap();
        let direct = compress_phi_k(&lambda_word(fock, w).unwrap(), k).unwrap();
        op_norm(&(explicit.matrix - direct.matrix))
    }

    #[test]
    fn expansion_matches_compression_on_two_factors() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for name in ["m2diag", "dinfty"] {
            let ex = example(name).unwrap();
            let fock = ex.fock(8).unwrap();
            for q in 1..=3 {
                let w = random_word(&ex, 2, q, &mut rng);
                for k in 1..=(8 - q).min(5) {
                    let err = check(&fock, &w, k);
                    assert!(err < 1e-8, "{name} q={q} k={k}: {err}");
                }
            }
        }
    }

    #[test]
    fn expansion_matches_compression_on_three_factors() {
        // Z2 * Z2 * Z2, where the split terms are nonempty.
        let ex = example("dinfty").unwrap();
        let f = ex.factors[0].clone();
        let fock = Arc::new(FockSpace::new(ex.base.clone(), vec![f.clone(), f.clone(), f], 7).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for q in 1..=3 {
            let w = random_word(&ex, 3, q, &mut rng);
            for k in 1..=(7 - q).min(4) {
                let mut cat = Concatenator::new(&fock);
                let e = expand_phi_k_word(&fock, &w, k, &mut cat).unwrap();
                if q >= 2 && k >= q {
                    assert!(e.terms.iter().any(|t| t.kind == TermKind::Split), "q={q} k={k}");
                }
                let err = check(&fock, &w, k);
                assert!(err < 1e-8, "q={q} k={k}: {err}");
            }
        }
    }

    #[test]
    fn scalar_expansion_matches_left_multiplication() {
        let ex = example("m2diag").unwrap();
        let fock = ex.fock(5).unwrap();
        let mut cat = Concatenator::new(&fock);
        for b in ex.base.algebra.basis() {
            for k in 0..=5 {
                let explicit = explicit_phi_k_scalar(&fock, b, k, &mut cat).unwrap();
                let lb = BlockOperator::from_parts(&fock, fock.left_base(&ex.base.coords(b)).unwrap(), 5, 0, 0, 0).unwrap();
                let direct = compress_phi_k(&lb, k).unwrap();
                assert!((explicit.matrix - direct.matrix).norm() < 1e-10);
            }
        }
        let one = explicit_phi_k_word(&fock, &ReducedWord::new(vec![]), 4, &mut cat).unwrap();
        assert!((one.matrix - identity(fock.prefix_dim(4))).norm() < 1e-10);
    }

    #[test]
    fn uncentered_words_are_rejected() {
        let ex = example("m2diag").unwrap();
        let fock = ex.fock(4).unwrap();
        let mut cat = Concatenator::new(&fock);
        let w = ReducedWord::new(vec![(0, ex.base.algebra.unit())]);
        assert!(matches!(explicit_phi_k_word(&fock, &w, 2, &mut cat), Err(AmalgamError::Precondition(_))));
    }
}
