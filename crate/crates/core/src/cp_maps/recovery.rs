//! The isometries `V_{p,k}: E -> E(→k) ⊗_B E`, the maps
//! `Θ_{p,k}(x) = V*(x ⊗ 1)V`, `Ψ_k = Θ_{⌊k/2⌋,k}` and the multipliers `R_n`.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::concat::Concatenator;
use super::{certified_columns, compress_phi_k, diagonal_part, CompressedOperator};
use crate::error::{AmalgamError, Result};
use crate::fock::{lambda_word, BlockOperator, FockSpace, ReducedWord, Word};
use crate::linalg::{identity, kron, op_norm, re, CMat};
use crate::module::{internal_tensor, QuotientModule};

/// Weights of the splittings of a length-`n` word: `(m, α)` means the term
/// `α (ζ_1 ... ζ_m) ⊗ (ζ_{m+1} ... ζ_n)`.
pub fn splits(n: usize, p: usize, k: usize) -> Vec<(usize, f64)> {
    let w = 1.0 / ((k - p) as f64).sqrt();
    if n <= p {
        vec![(n, 1.0)]
    } else if n <= k {
        let mut out: Vec<(usize, f64)> = (p..n).map(|m| (m, w)).collect();
        if n < k {
            out.push((n, ((k - n) as f64).sqrt() * w));
        }
        out
    } else {
        (p..k).map(|m| (m, w)).collect()
    }
}

#[derive(Clone, Debug)]
struct Piece {
    s: Word,
    t: Word,
    /// Index of the sector `st` in the Fock space.
    source: usize,
    tensor: QuotientModule,
    /// `α J_T Cat⁺_{s,t}`: carrier of `S(st)` to the carrier of `S(s) ⊗ S(t)`.
    embed: CMat,
    offset: usize,
}

/// `V_{p,k}` on the whole truncated Fock space. Every input sector is
/// handled exactly; the codomain is the direct sum of the tensor modules
/// `S(s) ⊗_B S(t)` that the splittings reach.
#[derive(Clone, Debug)]
pub struct RecoveryMap {
    fock: Arc<FockSpace>,
    pub p: usize,
    pub k: usize,
    pieces: Vec<Piece>,
    codomain_dim: usize,
}

impl RecoveryMap {
    pub fn new(fock: &Arc<FockSpace>, p: usize, k: usize, cat: &mut Concatenator) -> Result<Self> {
        if p >= k {
            return Err(AmalgamError::Parameter(format!("V_(p,k) needs p < k, got p = {p}, k = {k}")));
        }
        if k > fock.cap() {
            return Err(AmalgamError::Parameter(format!("k = {k} exceeds the cap {}", fock.cap())));
        }
        let mut pieces = Vec::new();
        let mut offset = 0;
        for (source, sec) in fock.sectors().iter().enumerate() {
            for (m, alpha) in splits(sec.len(), p, k) {
                let (s, t) = sec.word.split_at(m);
                let ms = &fock.sector(s).expect("prefix").module;
                let mt = &fock.sector(t).expect("suffix").module;
                let tensor = internal_tensor(ms, mt)?;
                let pair = cat.get(s, t)?;
                let embed = &tensor.j * &pair.cat_pinv * re(alpha);
                let dim = tensor.module.dim();
                pieces.push(Piece { s: s.to_vec(), t: t.to_vec(), source, tensor, embed, offset });
                offset += dim;
            }
        }
        Ok(Self { fock: fock.clone(), p, k, pieces, codomain_dim: offset })
    }

    pub fn fock(&self) -> &Arc<FockSpace> {
        &self.fock
    }

    pub fn codomain_dim(&self) -> usize {
        self.codomain_dim
    }

    /// The splittings `(s, t)` in the order of the codomain blocks.
    pub fn blocks(&self) -> Vec<(Word, Word)> {
        self.pieces.iter().map(|p| (p.s.clone(), p.t.clone())).collect()
    }

    /// Dense matrix of `V_{p,k}`.
    pub fn matrix(&self) -> CMat {
        let mut v = CMat::zeros(self.codomain_dim, self.fock.dim());
        for piece in &self.pieces {
            let src = &self.fock.sectors()[piece.source];
            v.view_mut((piece.offset, src.offset), piece.embed.shape()).copy_from(&piece.embed);
        }
        v
    }

    /// Codomain block of the splitting `(s, t)`, as `(offset, module)`.
    pub fn block_module(&self, s: &[usize], t: &[usize]) -> Option<(usize, &QuotientModule)> {
        self.pieces.iter().find(|p| p.s == s && p.t == t).map(|p| (p.offset, &p.tensor))
    }

    /// `‖V*V - 1‖`.
    pub fn isometry_defect(&self) -> f64 {
        let v = self.matrix();
        op_norm(&(v.adjoint() * &v - identity(self.fock.dim())))
    }

    /// `Θ_{p,k}(x) = V*(x ⊗ 1)V` for `x` on `E(→k)`. The result is exact on
    /// inputs of length at most `cap - band_up(x)`.
    pub fn theta(&self, x: &CompressedOperator) -> Result<BlockOperator> {
        if x.k != self.k || x.dim() != self.fock.prefix_dim(self.k) {
            return Err(AmalgamError::Dimension(format!(
                "operator on E(→{}) for a recovery map at k = {}",
                x.k, self.k
            )));
        }
        let fock = &self.fock;
        let mut by_tail: BTreeMap<&Word, Vec<&Piece>> = BTreeMap::new();
        for piece in &self.pieces {
            by_tail.entry(&piece.t).or_default().push(piece);
        }
        let mut out = CMat::zeros(fock.dim(), fock.dim());
        for (t, group) in by_tail {
            let dt = fock.sector(t).expect("tail").dim();
            let id_t = identity(dt);
            for b in &group {
                let sb = fock.sector(&b.s).expect("head");
                for a in &group {
                    let sa = fock.sector(&a.s).expect("head");
                    let xb = x.matrix.view((sa.offset, sb.offset), (sa.dim(), sb.dim()));
                    if xb.iter().all(|z| z.norm_sqr() == 0.0) {
                        continue;
                    }
                    let m = &a.tensor.j * kron(&xb.into_owned(), &id_t) * &b.tensor.j_pinv;
                    let block = a.embed.adjoint() * m * &b.embed;
                    let ua = &fock.sectors()[a.source];
                    let ub = &fock.sectors()[b.source];
                    let mut view = out.view_mut((ua.offset, ub.offset), (ua.dim(), ub.dim()));
                    view += block;
                }
            }
        }
        BlockOperator::from_parts(
            fock,
            out,
            fock.cap() as isize - x.band_up as isize,
            x.band_up,
            x.band_down,
            x.band_up + x.band_down,
        )
    }
}

/// `Θ_{p,k}(x)` with a freshly built `V_{p,k}`.
pub fn theta_pk(fock: &Arc<FockSpace>, x: &CompressedOperator, p: usize, cat: &mut Concatenator) -> Result<BlockOperator> {
    RecoveryMap::new(fock, p, x.k, cat)?.theta(x)
}

/// `Ψ_k = Θ_{⌊k/2⌋,k}`.
pub fn psi_k(fock: &Arc<FockSpace>, x: &CompressedOperator, cat: &mut Concatenator) -> Result<BlockOperator> {
    theta_pk(fock, x, x.k / 2, cat)
}

/// `R_n` for the diagonal `d`, from the splitting weights: `1` minus the
/// overlap of the splittings of lengths `n` and `n + d` shifted by `d`, with
/// first factors cut at `k`. Defined for every `0 <= n`, `0 <= n + d`,
/// `p < k`.
pub fn rn_value(n: usize, d: isize, p: usize, k: usize) -> f64 {
    let target = n as isize + d;
    if target < 0 || d == 0 {
        // The splittings are unit vectors, so the self-overlap is exactly 1.
        return 0.0;
    }
    let out = splits(target as usize, p, k);
    let mut overlap = 0.0;
    for (m, a) in splits(n, p, k) {
        let shifted = m as isize + d;
        if m > k || shifted < 0 || shifted > k as isize {
            continue;
        }
        if let Some((_, b)) = out.iter().find(|(m2, _)| *m2 as isize == shifted) {
            overlap += a * b;
        }
    }
    1.0 - overlap
}

fn check_region(n: usize, d: isize, p: usize, k: usize, q: usize) -> Result<()> {
    let q = q as isize;
    let ok = p as isize > 2 * q && (k as isize - p as isize) > 2 * q && d.abs() <= q && n as isize + d >= 0;
    if ok {
        Ok(())
    } else {
        Err(AmalgamError::Domain(format!(
            "R_n needs p > 2q, k - p > 2q, |d| <= q, n + d >= 0; got n = {n}, d = {d}, p = {p}, k = {k}, q = {q}"
        )))
    }
}

/// The multiplier `R_n` by cases. In the case `p < n + d <= k < n` the
/// value is `|d|/(k - p)`; [`rn_multiplier_as_printed`] keeps the other
/// reading of that case.
pub fn rn_multiplier(n: usize, d: isize, p: usize, k: usize, q: usize) -> Result<f64> {
    check_region(n, d, p, k, q)?;
    Ok(rn_cases(n, d, p, k, false))
}

/// Same as [`rn_multiplier`] but with `(-d - sqrt(k - n - d))/(k - p)` in
/// the case `p < n + d <= k < n`.
pub fn rn_multiplier_as_printed(n: usize, d: isize, p: usize, k: usize, q: usize) -> Result<f64> {
    check_region(n, d, p, k, q)?;
    Ok(rn_cases(n, d, p, k, true))
}

fn rn_cases(n: usize, d: isize, p: usize, k: usize, printed: bool) -> f64 {
    let (n, p, k) = (n as isize, p as isize, k as isize);
    let m = n + d;
    let kp = (k - p) as f64;
    let sq = |x: isize| (x as f64).sqrt();
    if n <= p && m <= p {
        0.0
    } else if n <= p && p < m && m <= k {
        1.0 - sq(k - m) / kp.sqrt()
    } else if m <= p && p < n && n <= k {
        1.0 - sq(k - n) / kp.sqrt()
    } else if p < n && n <= k && p < m && m <= k {
        ((k - n - d.min(0)) as f64 - sq(k - n) * sq(k - m)) / kp
    } else if p < n && n <= k && k < m {
        d as f64 / kp
    } else if p < m && m <= k && k < n {
        if printed {
            (-d as f64 - sq(k - m)) / kp
        } else {
            d.abs() as f64 / kp
        }
    } else {
        debug_assert!(k < n && k < m);
        d.abs() as f64 / kp
    }
}

/// `max |R_n|` over `|d| <= q` and `0 <= n, n + d <= n_max`.
pub fn sup_abs_rn(q: usize, p: usize, k: usize, n_max: usize) -> f64 {
    let q = q as isize;
    let mut sup: f64 = 0.0;
    for d in -q..=q {
        for n in 0..=n_max {
            if n as isize + d >= 0 {
                sup = sup.max(rn_value(n, d, p, k).abs());
            }
        }
    }
    sup
}

/// One `(d, n)` entry of the sector identity check.
#[derive(Clone, Debug)]
pub struct SectorRecord {
    pub d: isize,
    pub n: usize,
    pub rn: f64,
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct SectorIdentity {
    pub p: usize,
    pub k: usize,
    pub q: usize,
    pub records: Vec<SectorRecord>,
    pub max_residual: f64,
}

/// For `y = S_d(w)`, the Frobenius norm of
/// `(y - Θ_{p,k}Φ_k(y))|E(n) - R_n y|E(n)` for every `|d| <= q` and every
/// `n` up to `cap - q`.
pub fn verify_sector_identity(
    fock: &Arc<FockSpace>,
    word: &ReducedWord,
    p: usize,
    k: usize,
    cat: &mut Concatenator,
) -> Result<SectorIdentity> {
    sector_identity_with(fock, word, p, k, cat, rn_multiplier)
}

fn sector_identity_with(
    fock: &Arc<FockSpace>,
    word: &ReducedWord,
    p: usize,
    k: usize,
    cat: &mut Concatenator,
    multiplier: fn(usize, isize, usize, usize, usize) -> Result<f64>,
) -> Result<SectorIdentity> {
    let q = word.len();
    check_region(0, 0, p, k, q)?;
    if fock.cap() < k + q {
        return Err(AmalgamError::Truncation(format!(
            "cap {} is below k + q = {} needed for an exact check",
            fock.cap(),
            k + q
        )));
    }
    word.check_reduced(fock, 1e-10)?;
    let w = lambda_word(fock, word)?;
    let rec = RecoveryMap::new(fock, p, k, cat)?;
    let n_max = fock.cap() - q;
    let mut records = Vec::new();
    for d in -(q as isize)..=(q as isize) {
        let y = diagonal_part(&w, d);
        let back = rec.theta(&compress_phi_k(&y, k)?)?;
        let diff = &y.matrix - &back.matrix;
        for n in 0..=n_max {
            let cols = fock.length_range(n);
            let rn = if n as isize + d >= 0 { multiplier(n, d, p, k, q)? } else { 0.0 };
            let lhs = diff.columns(cols.start, cols.len());
            let rhs = y.matrix.columns(cols.start, cols.len()) * re(rn);
            records.push(SectorRecord { d, n, rn, residual: (lhs - rhs).norm() });
        }
    }
    let max_residual = records.iter().map(|r| r.residual).fold(0.0, f64::max);
    Ok(SectorIdentity { p, k, q, records, max_residual })
}

#[derive(Clone, Debug)]
pub struct ConvergenceRow {
    pub q: usize,
    pub k: usize,
    pub p: usize,
    pub sup_abs_rn: f64,
    pub norm_error: f64,
    pub bound: f64,
}

/// `‖a - Θ_{p,k}Φ_k(a)‖` on the certified inputs, with the bound
/// `(2q + 1) sup |R_n|`. `p = k / 2` gives `Ψ_k`.
pub fn convergence_row(a: &BlockOperator, q: usize, k: usize, p: usize, cat: &mut Concatenator) -> Result<ConvergenceRow> {
    let fock = a.fock();
    let back = theta_pk(fock, &compress_phi_k(a, k)?, p, cat)?;
    let exact = a.exact_upto.min(back.exact_upto);
    let cols = certified_columns(fock, exact);
    let diff = (&a.matrix - &back.matrix).columns(0, cols).into_owned();
    let sup = sup_abs_rn(q, p, k, exact.max(0) as usize);
    Ok(ConvergenceRow {
        q,
        k,
        p,
        sup_abs_rn: sup,
        norm_error: op_norm(&diff),
        bound: (2 * q + 1) as f64 * sup,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::example;
    use crate::linalg::{min_eigenvalue, random_matrix};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(name: &str, cap: usize) -> (crate::examples::Example, Arc<FockSpace>, Concatenator) {
        let ex = example(name).unwrap();
        let fock = ex.fock(cap).unwrap();
        let cat = Concatenator::new(&fock);
        (ex, fock, cat)
    }

    #[test]
    fn splitting_weights_are_normalized() {
        for k in 2..10 {
            for p in 1..k {
                for n in 0..15 {
                    let s: f64 = splits(n, p, k).iter().map(|(_, a)| a * a).sum();
                    assert!((s - 1.0).abs() < 1e-14, "{n} {p} {k}");
                }
            }
        }
    }

    #[test]
    fn v_is_an_isometry_and_sends_the_vacuum_to_its_square() {
        let (_, fock, mut cat) = setup("m2diag", 7);
        for k in 2..=5 {
            for p in 1..k {
                let v = RecoveryMap::new(&fock, p, k, &mut cat).unwrap();
                assert!(v.isometry_defect() < 1e-10, "{p} {k}");
            }
        }
        let v = RecoveryMap::new(&fock, 2, 4, &mut cat).unwrap();
        let (off, t) = v.block_module(&[], &[]).unwrap();
        let xi = fock.base_module().module.specified().unwrap().clone();
        let xx = crate::linalg::kron(&CMat::from_column_slice(xi.len(), 1, xi.as_slice()), &CMat::from_column_slice(xi.len(), 1, xi.as_slice()));
        let expected = &t.j * xx.column(0);
        let got = v.matrix() * fock.vacuum();
        assert!((got.rows(off, expected.len()) - &expected).norm() < 1e-12);
        assert!((got.norm() - 1.0).abs() < 1e-12);
        assert!(matches!(RecoveryMap::new(&fock, 4, 4, &mut cat), Err(AmalgamError::Parameter(_))));
    }

    #[test]
    fn short_words_pass_through_unsplit() {
        let (_, fock, mut cat) = setup("dinfty", 6);
        let v = RecoveryMap::new(&fock, 3, 5, &mut cat).unwrap();
        let vm = v.matrix();
        let sec = fock.sector(&[1, 0]).unwrap();
        let (off, _) = v.block_module(&[1, 0], &[]).unwrap();
        let col = vm.column(sec.offset);
        assert!((col.rows(off, 1).norm() - 1.0).abs() < 1e-12);
        assert!((col.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn theta_is_unital_and_recovers_the_base() {
        let (ex, fock, mut cat) = setup("m2diag", 8);
        let one = compress_phi_k(&BlockOperator::identity(&fock), 6).unwrap();
        for p in 1..6 {
            let t = theta_pk(&fock, &one, p, &mut cat).unwrap();
            assert!((t.matrix - identity(fock.dim())).norm() < 1e-10);
        }
        let b = ex.base.algebra.basis()[1].clone();
        let lb = BlockOperator::from_parts(&fock, fock.left_base(&ex.base.coords(&b)).unwrap(), 8, 0, 0, 0).unwrap();
        let back = psi_k(&fock, &compress_phi_k(&lb, 6).unwrap(), &mut cat).unwrap();
        assert!((back.matrix - &lb.matrix).norm() < 1e-10);
    }

    #[test]
    fn theta_preserves_positivity_with_amplification() {
        let (_, fock, mut cat) = setup("m2diag", 6);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let v = RecoveryMap::new(&fock, 2, 4, &mut cat).unwrap();
        // B-linear positive inputs: x* x for x = a compressed Fock operator.
        let a = fock.lambda(0, &(random_matrix(&mut rng, 2, 2))).unwrap();
        let c = fock.lambda(1, &(random_matrix(&mut rng, 2, 2))).unwrap();
        let x = compress_phi_k(&a, 4).unwrap();
        let y = compress_phi_k(&c, 4).unwrap();
        let mk = |m: CMat| CompressedOperator { k: 4, matrix: m, band_up: 1, band_down: 1 };
        let pos = v.theta(&mk(x.matrix.adjoint() * &x.matrix)).unwrap();
        assert!(min_eigenvalue(&pos.matrix) > -1e-8);
        // [x y]* [x y] as a 2x2 block positive element.
        let blocks = [[&x.matrix, &x.matrix], [&y.matrix, &y.matrix]];
        let mut amp = CMat::zeros(2 * fock.dim(), 2 * fock.dim());
        for i in 0..2 {
            for j in 0..2 {
                let m = blocks[0][i].adjoint() * blocks[0][j] + blocks[1][i].adjoint() * blocks[1][j];
                let t = v.theta(&mk(m)).unwrap();
                amp.view_mut((i * fock.dim(), j * fock.dim()), (fock.dim(), fock.dim())).copy_from(&t.matrix);
            }
        }
        assert!(min_eigenvalue(&amp) > -1e-8);
    }

    #[test]
    fn rn_cases_examples() {
        assert_eq!(rn_multiplier(3, 1, 7, 16, 2).unwrap(), 0.0);
        for n in 0..40 {
            assert!(rn_multiplier(n, 0, 7, 16, 2).unwrap().abs() < 1e-14);
        }
        assert!((rn_multiplier(30, -2, 7, 16, 2).unwrap() - 2.0 / 9.0).abs() < 1e-15);
        assert!(matches!(rn_multiplier(3, 1, 4, 16, 2), Err(AmalgamError::Domain(_))));
        assert!(matches!(rn_multiplier(0, -1, 7, 16, 2), Err(AmalgamError::Domain(_))));
    }

    #[test]
    fn printed_case_six_differs_off_the_boundary() {
        // p < n + d <= k < n with n + d < k
        let (n, d, p, k, q) = (17usize, -2isize, 7usize, 16usize, 2usize);
        let a = rn_multiplier(n, d, p, k, q).unwrap();
        let b = rn_multiplier_as_printed(n, d, p, k, q).unwrap();
        assert!((a - b).abs() > 0.1);
        assert!((a - rn_value(n, d, p, k)).abs() < 1e-15);
        // on n + d = k both readings agree
        let (n, d) = (18usize, -2isize);
        assert!((rn_multiplier(n, d, p, k, q).unwrap() - rn_multiplier_as_printed(n, d, p, k, q).unwrap()).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn cases_agree_with_the_splitting_overlap(q in 0usize..4, p_extra in 1usize..5, kp_extra in 1usize..5, n in 0usize..40, d_off in 0usize..8) {
            let p = 2 * q + p_extra;
            let k = p + 2 * q + kp_extra;
            let d = d_off as isize % (2 * q as isize + 1) - q as isize;
            prop_assume!(n as isize + d >= 0);
            let r = rn_multiplier(n, d, p, k, q).unwrap();
            prop_assert!((r - rn_value(n, d, p, k)).abs() < 1e-13);
        }
    }

    #[test]
    fn sector_identity_small() {
        let (ex, fock, mut cat) = setup("m2diag", 12);
        let w = ReducedWord::new(vec![(0, ex.centered[0][0].clone())]);
        let rec = verify_sector_identity(&fock, &w, 3, 8, &mut cat).unwrap();
        assert!(rec.max_residual < 1e-8, "{}", rec.max_residual);
        let bad = verify_sector_identity(&fock, &ReducedWord::new(vec![(0, ex.centered[0][0].clone()), (1, ex.centered[1][0].clone())]), 3, 10, &mut cat);
        assert!(matches!(bad, Err(AmalgamError::Domain(_))));
    }

    #[test]
    fn two_letter_word_and_the_printed_sixth_case() {
        let (_, fock, mut cat) = setup("m2diag", 17);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let ex = example("m2diag").unwrap();
        let letter = |rng: &mut ChaCha8Rng, i: usize| {
            let c = &ex.centered[i];
            let mut a = &c[0] * crate::linalg::C64::new(rng.gen(), rng.gen());
            a += &c[1] * crate::linalg::C64::new(rng.gen(), rng.gen());
            (i, a)
        };
        let w = ReducedWord::new(vec![letter(&mut rng, 0), letter(&mut rng, 1)]);
        let rec = verify_sector_identity(&fock, &w, 5, 12, &mut cat).unwrap();
        assert!(rec.max_residual < 1e-8, "{}", rec.max_residual);
        let printed = sector_identity_with(&fock, &w, 5, 12, &mut cat, rn_multiplier_as_printed).unwrap();
        let worst = printed.records.iter().max_by(|a, b| a.residual.total_cmp(&b.residual)).unwrap();
        assert!(worst.residual > 1e-2);
        assert!(worst.n > 12 && (worst.n as isize + worst.d) < 12, "{worst:?}");
    }

    #[test]
    fn b_elements_satisfy_the_identity_with_zero_multiplier() {
        let (_, fock, mut cat) = setup("m2diag", 8);
        let rec = verify_sector_identity(&fock, &ReducedWord::new(vec![]), 2, 5, &mut cat).unwrap();
        assert!(rec.max_residual < 1e-8);
    }
}
