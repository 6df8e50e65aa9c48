//! The algebras `Â_ι ⊆ L(E°_ι)`, the factorizations
//! `V_{p,ι}: L_{p,ι} ⊗ E°_ι ⊗ R_{p,ι} -> E(→k)` and the spans `D_p`.

use std::sync::Arc;

use rand::Rng;

use super::concat::Concatenator;
use super::expansion::amplified;
use super::span_membership;
use crate::error::{AmalgamError, Result};
use crate::fock::{words_of_length, FockSpace, Word};
use crate::linalg::{identity, kron, op_norm, random_vector, unvectorize, vectorize, CMat, OrthoBasis};
use crate::module::{internal_tensor, unit_vector, QuotientModule};

const SPAN_TOL: f64 = 1e-10;

/// The span generated by `{P° a P° : a ∈ A_ι}` and the rank-one operators on
/// `E°_ι`, closed under products.
#[derive(Clone, Debug)]
pub struct HatAlgebra {
    pub iota: usize,
    /// Carrier dimension of `E°_ι`.
    pub dim: usize,
    pub basis: OrthoBasis,
    /// The span of the `θ_{e_i,e_j}`.
    pub compact: OrthoBasis,
    /// At finite dimension the rank-one operators already exhaust the
    /// algebra, so the compressions of `A_ι` add nothing.
    pub degenerate: bool,
}

impl HatAlgebra {
    pub fn elements(&self) -> Vec<CMat> {
        self.basis.vectors().iter().map(|v| unvectorize(v, self.dim, self.dim)).collect()
    }

    pub fn unit_residual(&self) -> f64 {
        span_membership(&identity(self.dim), &self.basis)
    }

    /// Residual of `(P°a_1P°)(P°a_2P°) - P°a_1a_2P°` against the rank-one span.
    pub fn compact_correction(&self, fock: &FockSpace, a1: &CMat, a2: &CMat) -> Result<f64> {
        let fs = &fock.factors()[self.iota];
        let c = |a: &CMat| -> Result<CMat> { Ok(fs.w.adjoint() * fs.pi(a)? * &fs.w) };
        let defect = c(a1)? * c(a2)? - c(&(a1 * a2))?;
        Ok(span_membership(&defect, &self.compact))
    }
}

pub fn build_hat_algebra(fock: &FockSpace, iota: usize) -> Result<HatAlgebra> {
    let fs = fock
        .factors()
        .get(iota)
        .ok_or_else(|| AmalgamError::Parameter(format!("no factor with index {iota}")))?;
    let e = &fs.complement;
    let d = e.dim();
    let mut compact = OrthoBasis::new(d * d);
    for i in 0..d {
        for j in 0..d {
            compact.try_push(&vectorize(&e.theta(&unit_vector(d, i), &unit_vector(d, j))), SPAN_TOL);
        }
    }
    let mut basis = compact.clone();
    for a in fs.factor.algebra().basis() {
        basis.try_push(&vectorize(&(fs.w.adjoint() * fs.pi(a)? * &fs.w)), SPAN_TOL);
    }
    loop {
        let elems: Vec<CMat> = basis.vectors().iter().map(|v| unvectorize(v, d, d)).collect();
        let before = basis.dim();
        for x in &elems {
            basis.try_push(&vectorize(&x.adjoint()), SPAN_TOL);
            for y in &elems {
                basis.try_push(&vectorize(&(x * y)), SPAN_TOL);
            }
        }
        if basis.dim() == before {
            break;
        }
    }
    let degenerate = basis.dim() == compact.dim();
    Ok(HatAlgebra { iota, dim: d, basis, compact, degenerate })
}

/// Words indexing `L_{p,ι}`: the empty word (for `ηB`) and, when `p < k`,
/// the alternating words of length `1..=k-p` not ending in `ι`.
pub fn left_words(letters: usize, p: usize, k: usize, iota: usize) -> Vec<Word> {
    let mut out = vec![Vec::new()];
    for l in 1..=k.saturating_sub(p) {
        out.extend(words_of_length(letters, l).into_iter().filter(|w| w.last() != Some(&iota)));
    }
    out
}

/// Words indexing `R_{p,ι}`: the empty word when `p = 1`, else the
/// alternating words of length `p - 1` not starting with `ι`.
pub fn right_words(letters: usize, p: usize, iota: usize) -> Vec<Word> {
    words_of_length(letters, p - 1).into_iter().filter(|w| w.first() != Some(&iota)).collect()
}

#[derive(Clone, Debug)]
pub struct LrBlock {
    pub left: Word,
    pub right: Word,
    /// `(L_w ⊗ E°_ι) ⊗ R_r`.
    pub module: QuotientModule,
    pub offset: usize,
    /// Carrier of the block to the carrier of `S(w ι r)`.
    pub map: CMat,
}

/// `V_{p,ι}` assembled from the tensor modules of its domain summands.
#[derive(Clone, Debug)]
pub struct LrFactorization {
    fock: Arc<FockSpace>,
    pub p: usize,
    pub iota: usize,
    pub k: usize,
    pub blocks: Vec<LrBlock>,
    pub domain_dim: usize,
}

impl LrFactorization {
    /// Dense matrix from the domain to `E(→k)`.
    pub fn matrix(&self) -> CMat {
        let mut v = CMat::zeros(self.fock.prefix_dim(self.k), self.domain_dim);
        for b in &self.blocks {
            let word: Word = b.left.iter().chain(std::iter::once(&self.iota)).chain(&b.right).copied().collect();
            let s = self.fock.sector(&word).expect("range sector");
            v.view_mut((s.offset, b.offset), b.map.shape()).copy_from(&b.map);
        }
        v
    }

    pub fn isometry_defect(&self) -> f64 {
        let v = self.matrix();
        op_norm(&(v.adjoint() * &v - identity(self.domain_dim)))
    }

    /// Sectors `u` of length `p..=k` whose `p`-th letter from the end is `ι`.
    pub fn range_words(&self) -> Vec<Word> {
        self.fock
            .sectors()
            .iter()
            .filter(|s| s.len() >= self.p && s.len() <= self.k && s.word[s.len() - self.p] == self.iota)
            .map(|s| s.word.clone())
            .collect()
    }
}

pub fn build_lr_factorization(
    fock: &Arc<FockSpace>,
    p: usize,
    iota: usize,
    k: usize,
    cat: &mut Concatenator,
) -> Result<LrFactorization> {
    if p == 0 || p > k {
        return Err(AmalgamError::Parameter(format!("V_(p,ι) needs 1 <= p <= k, got p = {p}, k = {k}")));
    }
    if k > fock.cap() {
        return Err(AmalgamError::Parameter(format!("k = {k} exceeds the cap {}", fock.cap())));
    }
    let letters = fock.num_factors();
    let e = &fock
        .factors()
        .get(iota)
        .ok_or_else(|| AmalgamError::Parameter(format!("no factor with index {iota}")))?
        .complement;
    let mut blocks = Vec::new();
    let mut offset = 0;
    for w in left_words(letters, p, k, iota) {
        let lw = &fock.sector(&w).expect("left sector").module;
        let le = internal_tensor(lw, e)?;
        let mut wi = w.clone();
        wi.push(iota);
        let head = cat.cat(&w, &[iota])?;
        for r in right_words(letters, p, iota) {
            let rm = &fock.sector(&r).expect("right sector").module;
            let t = internal_tensor(&le.module, rm)?;
            let id_r = identity(rm.dim());
            let map = cat.cat(&wi, &r)? * kron(&head, &id_r) * kron(&le.j_pinv, &id_r) * &t.j_pinv;
            let dim = t.module.dim();
            blocks.push(LrBlock { left: w.clone(), right: r, module: t, offset, map });
            offset += dim;
        }
    }
    Ok(LrFactorization { fock: fock.clone(), p, iota, k, blocks, domain_dim: offset })
}

/// Orthonormal basis of `D_p ⊆ L(E(→k))`, spanned by the amplified bowtie
/// operators `θ_x X θ_y*` over carrier bases of `L_{p,ι}` and a basis of
/// `Â_ι`, for every `ι`.
#[derive(Clone, Debug)]
pub struct DpSpan {
    pub p: usize,
    pub k: usize,
    /// Side of the operators, `dim E(→k)`.
    pub side: usize,
    pub basis: OrthoBasis,
}

impl DpSpan {
    pub fn residual(&self, x: &CMat) -> f64 {
        span_membership(x, &self.basis)
    }

    pub fn element(&self, v: &crate::linalg::CVec) -> CMat {
        unvectorize(v, self.side, self.side)
    }

    /// A random unit-norm combination of the basis with Gaussian
    /// coefficients.
    pub fn random_element<R: Rng>(&self, rng: &mut R) -> CMat {
        let c = random_vector(rng, self.basis.dim());
        let mut out = crate::linalg::CVec::zeros(self.side * self.side);
        for (b, x) in self.basis.vectors().iter().zip(c.iter()) {
            out.axpy(*x, b, crate::linalg::C64::new(1.0, 0.0));
        }
        let n = out.norm();
        if n > 0.0 {
            out /= crate::linalg::re(n);
        }
        self.element(&out)
    }

    /// Largest residual of the adjoints of basis elements.
    pub fn adjoint_residual(&self) -> f64 {
        self.basis
            .vectors()
            .iter()
            .map(|v| self.residual(&self.element(v).adjoint()))
            .fold(0.0, f64::max)
    }
}

pub fn build_dp_span(
    fock: &Arc<FockSpace>,
    p: usize,
    k: usize,
    hats: &[HatAlgebra],
    cat: &mut Concatenator,
) -> Result<DpSpan> {
    if p == 0 || p > k || k > fock.cap() {
        return Err(AmalgamError::Parameter(format!("D_p needs 1 <= p <= k <= cap, got p = {p}, k = {k}")));
    }
    if hats.len() != fock.num_factors() {
        return Err(AmalgamError::Dimension("one hat algebra per factor is required".into()));
    }
    let side = fock.prefix_dim(k);
    let mut basis = OrthoBasis::new(side * side);
    for (iota, hat) in hats.iter().enumerate() {
        let words = left_words(fock.num_factors(), p, k, iota);
        let vectors: Vec<(Word, crate::linalg::CVec)> = words
            .iter()
            .flat_map(|w| {
                let d = fock.sector(w).expect("left sector").dim();
                (0..d).map(move |i| (w.clone(), unit_vector(d, i)))
            })
            .collect();
        for mid in hat.elements() {
            for (wx, x) in &vectors {
                for (wy, y) in &vectors {
                    let m = amplified(fock, cat, k, p, iota, Some((wx, x)), Some((wy, y)), Some(&mid))?;
                    basis.try_push(&vectorize(&m), SPAN_TOL);
                }
            }
        }
    }
    Ok(DpSpan { p, k, side, basis })
}

/// Span of all rank-one operators `θ_{e_i,e_j}` between sectors of `E(→k)`.
pub fn compact_span(fock: &FockSpace, k: usize) -> OrthoBasis {
    let side = fock.prefix_dim(k);
    let mut basis = OrthoBasis::new(side * side);
    let sectors: Vec<_> = fock.sectors().iter().filter(|s| s.len() <= k).collect();
    for to in &sectors {
        for from in &sectors {
            for i in 0..to.dim() {
                for j in 0..from.dim() {
                    let block = from.module.theta_to(&to.module, &unit_vector(to.dim(), i), &unit_vector(from.dim(), j));
                    let mut m = CMat::zeros(side, side);
                    m.view_mut((to.offset, from.offset), (to.dim(), from.dim())).copy_from(&block);
                    basis.try_push(&vectorize(&m), SPAN_TOL);
                }
            }
        }
    }
    basis
}

/// Union of several spans.
pub fn union_span(spans: &[&OrthoBasis]) -> OrthoBasis {
    let len = spans.first().map(|s| s.ambient_len()).unwrap_or(0);
    let mut out = OrthoBasis::new(len);
    for s in spans {
        for v in s.vectors() {
            out.try_push(v, SPAN_TOL);
        }
    }
    out
}
