//! The full Fock module of an amalgamated family, truncated at a word-length
//! cap, with the left creation/annihilation representations `λ_ι`.

use std::collections::HashMap;
use std::ops::Range;
use std::sync::Arc;

use crate::error::{AmalgamError, Result};
use crate::linalg::{identity, kron, kron_vec_identity, re, CMat, CVec};
use crate::module::{
    base_module, complement_of_cyclic, gns, internal_tensor, BaseAlgebra, Factor, HilbertModule,
    QuotientModule,
};

/// Alternating word `ι_1 ... ι_n` with `ι_j != ι_{j+1}`.
pub type Word = Vec<usize>;

pub fn is_alternating(w: &[usize]) -> bool {
    w.windows(2).all(|p| p[0] != p[1])
}

/// All alternating words of length `n` over `letters` letters, in
/// lexicographic order.
pub fn words_of_length(letters: usize, n: usize) -> Vec<Word> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let shorter = words_of_length(letters, n - 1);
    let mut out = Vec::new();
    for i in 0..letters {
        for rest in &shorter {
            if rest.first() != Some(&i) {
                let mut w = Vec::with_capacity(n);
                w.push(i);
                w.extend_from_slice(rest);
                out.push(w);
            }
        }
    }
    out
}

/// Everything the Fock construction needs about one factor.
#[derive(Clone, Debug)]
pub struct FactorSpace {
    pub factor: Factor,
    /// GNS module with its span maps (span = basis coordinates of `A`).
    pub gns: QuotientModule,
    /// `E°`, the complement of the cyclic vector.
    pub complement: HilbertModule,
    /// Isometric inclusion `E° -> E`.
    pub w: CMat,
    /// Isometry `B -> E`, `b -> ξ b`, from the base-module carrier.
    pub emb: CMat,
    pub xi: CVec,
}

impl FactorSpace {
    pub fn module(&self) -> &HilbertModule {
        &self.gns.module
    }

    /// `π(a)` on the GNS module.
    pub fn pi(&self, a: &CMat) -> Result<CMat> {
        self.gns.module.left_matrix(a)
    }

    /// The vector `â = π(a) ξ`.
    pub fn hat(&self, a: &CMat) -> Result<CVec> {
        Ok(self.pi(a)? * &self.xi)
    }
}

#[derive(Clone, Debug)]
pub struct Sector {
    pub word: Word,
    pub module: HilbertModule,
    /// For `|word| >= 2`: span `E°_{ι_1} ⊗ S(rest)` (Kronecker order) to carrier.
    pub j: CMat,
    pub j_pinv: CMat,
    pub offset: usize,
}

impl Sector {
    pub fn dim(&self) -> usize {
        self.module.dim()
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    pub fn range(&self) -> Range<usize> {
        self.offset..self.offset + self.dim()
    }
}

/// The Fock module truncated to words of length at most `cap`. Sectors are
/// ordered by length, then lexicographically, so every lower truncation is a
/// prefix of the carrier.
#[derive(Debug)]
pub struct FockSpace {
    base: Arc<BaseAlgebra>,
    factors: Vec<FactorSpace>,
    base_module: QuotientModule,
    cap: usize,
    sectors: Vec<Sector>,
    index: HashMap<Word, usize>,
    total: usize,
}

impl FockSpace {
    pub fn new(base: Arc<BaseAlgebra>, factors: Vec<Factor>, cap: usize) -> Result<Self> {
        if factors.is_empty() {
            return Err(AmalgamError::Parameter("at least one factor is required".into()));
        }
        let bq = base_module(base.clone())?;
        let mut spaces = Vec::with_capacity(factors.len());
        for f in factors {
            let q = gns(base.clone(), &f)?;
            let (complement, w) = complement_of_cyclic(&q.module)?;
            let xi = q.module.specified().cloned().expect("GNS vector");
            let e = &q.module;
            let mut emb = CMat::zeros(e.dim(), bq.module.dim());
            for k in 0..bq.module.dim() {
                let bk = bq.j_pinv.column(k).into_owned();
                emb.set_column(k, &(e.right_from_coords(&bk) * &xi));
            }
            spaces.push(FactorSpace { factor: f, gns: q, complement, w, emb, xi });
        }
        let letters = spaces.len();
        let mut sectors: Vec<Sector> = Vec::new();
        let mut index: HashMap<Word, usize> = HashMap::new();
        let mut offset = 0;
        for n in 0..=cap {
            for word in words_of_length(letters, n) {
                let (module, j, j_pinv) = match word.len() {
                    0 => {
                        let d = bq.module.dim();
                        (bq.module.clone(), identity(d), identity(d))
                    }
                    1 => {
                        let m = spaces[word[0]].complement.clone();
                        let d = m.dim();
                        (m, identity(d), identity(d))
                    }
                    _ => {
                        let rest: &Sector = &sectors[index[&word[1..].to_vec()]];
                        let q = internal_tensor(&spaces[word[0]].complement, &rest.module)?;
                        (q.module, q.j, q.j_pinv)
                    }
                };
                let dim = module.dim();
                index.insert(word.clone(), sectors.len());
                sectors.push(Sector { word, module, j, j_pinv, offset });
                offset += dim;
            }
        }
        Ok(Self { base, factors: spaces, base_module: bq, cap, sectors, index, total: offset })
    }

    pub fn base(&self) -> &Arc<BaseAlgebra> {
        &self.base
    }

    pub fn factors(&self) -> &[FactorSpace] {
        &self.factors
    }

    pub fn num_factors(&self) -> usize {
        self.factors.len()
    }

    pub fn base_module(&self) -> &QuotientModule {
        &self.base_module
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn sectors(&self) -> &[Sector] {
        &self.sectors
    }

    pub fn sector(&self, word: &[usize]) -> Option<&Sector> {
        self.index.get(word).map(|&i| &self.sectors[i])
    }

    pub fn sector_index(&self, word: &[usize]) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn dim(&self) -> usize {
        self.total
    }

    /// Carrier dimension of the words of length at most `k`.
    pub fn prefix_dim(&self, k: usize) -> usize {
        self.sectors.iter().filter(|s| s.len() <= k).map(|s| s.dim()).sum()
    }

    /// Carrier range of the words of length exactly `n`.
    pub fn length_range(&self, n: usize) -> Range<usize> {
        let lo = self.prefix_dim(n.saturating_sub(1));
        let lo = if n == 0 { 0 } else { lo };
        lo..self.prefix_dim(n)
    }

    /// The vacuum `Ω = 1̂ ∈ S(∅)`.
    pub fn vacuum(&self) -> CVec {
        let mut v = CVec::zeros(self.total);
        let s = self.base_module.module.specified().expect("unit vector");
        v.rows_mut(0, s.len()).copy_from(s);
        v
    }

    /// Longest word whose sector meets the support of `v`.
    pub fn support_len(&self, v: &CVec, tol: f64) -> Option<usize> {
        self.sectors
            .iter()
            .filter(|s| v.rows(s.offset, s.dim()).norm() > tol)
            .map(|s| s.len())
            .max()
    }

    /// Block-diagonal left action of `b ∈ B`.
    pub fn left_base(&self, b_coords: &CVec) -> Result<CMat> {
        let mut out = CMat::zeros(self.total, self.total);
        for s in &self.sectors {
            let block = s.module.left_b_from_coords(b_coords)?;
            out.view_mut((s.offset, s.offset), (s.dim(), s.dim())).copy_from(&block);
        }
        Ok(out)
    }

    /// Block-diagonal right action of `b ∈ B`.
    pub fn right_base(&self, b_coords: &CVec) -> CMat {
        let mut out = CMat::zeros(self.total, self.total);
        for s in &self.sectors {
            let block = s.module.right_from_coords(b_coords);
            out.view_mut((s.offset, s.offset), (s.dim(), s.dim())).copy_from(&block);
        }
        out
    }

    /// B-valued inner product of two carrier vectors, in base coordinates.
    pub fn inner_coords(&self, x: &CVec, y: &CVec) -> CVec {
        let mut out = CVec::zeros(self.base.dim());
        for s in &self.sectors {
            let xs = x.rows(s.offset, s.dim()).into_owned();
            let ys = y.rows(s.offset, s.dim()).into_owned();
            out += s.module.inner_coords(&xs, &ys);
        }
        out
    }

    /// `λ_ι(a)` compressed to the truncation. Components leaving the cap are
    /// dropped, so the result is exact on inputs of length at most `cap - 1`.
    pub fn lambda(self: &Arc<Self>, iota: usize, a: &CMat) -> Result<BlockOperator> {
        let fs = self
            .factors
            .get(iota)
            .ok_or_else(|| AmalgamError::Parameter(format!("no factor with index {iota}")))?;
        let alg = fs.factor.algebra();
        if a.nrows() != alg.ambient_dim() || a.ncols() != alg.ambient_dim() {
            return Err(AmalgamError::Dimension(format!(
                "element of size {}x{} for a factor acting on dimension {}",
                a.nrows(),
                a.ncols(),
                alg.ambient_dim()
            )));
        }
        if !alg.contains(a, 1e-8) {
            return Err(AmalgamError::Domain(format!("element is not in factor {iota}")));
        }
        let pi = fs.pi(a)?;
        let w = &fs.w;
        let wa = w.adjoint();
        let emb = &fs.emb;
        let v = &wa * &pi * &fs.xi;
        let phi_a = fs.factor.phi_coords(a);
        let w_pi_w = &wa * &pi * w;
        let mut m = CMat::zeros(self.total, self.total);
        let put = |m: &mut CMat, to: &Sector, from: &Sector, block: &CMat| {
            let mut view = m.view_mut((to.offset, from.offset), (to.dim(), from.dim()));
            view += block;
        };
        for from in &self.sectors {
            match from.word.first() {
                None => {
                    let to_empty = &self.sectors[0];
                    put(&mut m, to_empty, from, &(emb.adjoint() * &pi * emb));
                    if let Some(t) = self.sector(&[iota]) {
                        put(&mut m, t, from, &(&wa * &pi * emb));
                    }
                }
                Some(&first) if first != iota => {
                    put(&mut m, from, from, &from.module.left_b_from_coords(&phi_a)?);
                    let mut longer = vec![iota];
                    longer.extend_from_slice(&from.word);
                    if let Some(t) = self.sector(&longer) {
                        put(&mut m, t, from, &(&t.j * kron_vec_identity(&v, from.dim())));
                    }
                }
                Some(_) if from.len() == 1 => {
                    put(&mut m, from, from, &w_pi_w);
                    put(&mut m, &self.sectors[0], from, &(emb.adjoint() * &pi * w));
                }
                Some(_) => {
                    let rest = self.sector(&from.word[1..]).expect("suffix sector");
                    let same = &from.j * kron(&w_pi_w, &identity(rest.dim())) * &from.j_pinv;
                    put(&mut m, from, from, &same);
                    let dr = rest.dim();
                    let de = fs.complement.dim();
                    let mut down = CMat::zeros(dr, de * dr);
                    for i in 0..de {
                        let col = &pi * w.column(i);
                        let bi = fs.module().inner_coords(&fs.xi, &col);
                        let block = rest.module.left_b_from_coords(&bi)?;
                        down.view_mut((0, i * dr), (dr, dr)).copy_from(&block);
                    }
                    put(&mut m, rest, from, &(down * &from.j_pinv));
                }
            }
        }
        Ok(BlockOperator {
            fock: self.clone(),
            matrix: m,
            exact_upto: self.cap as isize - 1,
            band_up: 1,
            band_down: 1,
            word_len: 1,
            strict: false,
        })
    }
}

/// An operator on the truncated Fock module with bookkeeping of where the
/// truncation is exact: the matrix equals the compression of the untruncated
/// operator on inputs of length at most `exact_upto`.
#[derive(Clone, Debug)]
pub struct BlockOperator {
    fock: Arc<FockSpace>,
    pub matrix: CMat,
    pub exact_upto: isize,
    pub band_up: usize,
    pub band_down: usize,
    pub word_len: usize,
    /// When set, [`BlockOperator::apply`] refuses inputs outside the exact
    /// region.
    pub strict: bool,
}

impl BlockOperator {
    pub fn identity(fock: &Arc<FockSpace>) -> Self {
        Self {
            fock: fock.clone(),
            matrix: identity(fock.dim()),
            exact_upto: fock.cap() as isize,
            band_up: 0,
            band_down: 0,
            word_len: 0,
            strict: false,
        }
    }

    pub fn from_parts(
        fock: &Arc<FockSpace>,
        matrix: CMat,
        exact_upto: isize,
        band_up: usize,
        band_down: usize,
        word_len: usize,
    ) -> Result<Self> {
        if matrix.nrows() != fock.dim() || matrix.ncols() != fock.dim() {
            return Err(AmalgamError::Dimension(format!(
                "{}x{} matrix for a carrier of dimension {}",
                matrix.nrows(),
                matrix.ncols(),
                fock.dim()
            )));
        }
        Ok(Self { fock: fock.clone(), matrix, exact_upto, band_up, band_down, word_len, strict: false })
    }

    pub fn fock(&self) -> &Arc<FockSpace> {
        &self.fock
    }

    fn same_space(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.fock, &other.fock) {
            Ok(())
        } else {
            Err(AmalgamError::Structural("operators act on different Fock spaces".into()))
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.same_space(other)?;
        Ok(Self {
            fock: self.fock.clone(),
            matrix: &self.matrix * &other.matrix,
            exact_upto: other.exact_upto.min(self.exact_upto - other.band_up as isize),
            band_up: self.band_up + other.band_up,
            band_down: self.band_down + other.band_down,
            word_len: self.word_len + other.word_len,
            strict: self.strict || other.strict,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_space(other)?;
        Ok(Self {
            fock: self.fock.clone(),
            matrix: &self.matrix + &other.matrix,
            exact_upto: self.exact_upto.min(other.exact_upto),
            band_up: self.band_up.max(other.band_up),
            band_down: self.band_down.max(other.band_down),
            word_len: self.word_len.max(other.word_len),
            strict: self.strict || other.strict,
        })
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.matrix *= re(c);
        out
    }

    pub fn adjoint(&self) -> Self {
        Self {
            fock: self.fock.clone(),
            matrix: self.matrix.adjoint(),
            exact_upto: self.exact_upto - self.band_down as isize,
            band_up: self.band_down,
            band_down: self.band_up,
            word_len: self.word_len,
            strict: self.strict,
        }
    }

    pub fn with_strict(mut self, strict: bool) -> Self {
        self.strict = strict;
        self
    }

    /// Applies the operator; under `strict`, inputs supported on sectors past
    /// the exact region are rejected with the offending word.
    pub fn apply(&self, v: &CVec) -> Result<CVec> {
        if v.len() != self.fock.dim() {
            return Err(AmalgamError::Dimension(format!(
                "vector of length {} for a carrier of dimension {}",
                v.len(),
                self.fock.dim()
            )));
        }
        if self.strict {
            for s in self.fock.sectors() {
                if s.len() as isize > self.exact_upto && v.rows(s.offset, s.dim()).norm() > 0.0 {
                    return Err(AmalgamError::Truncation(format!(
                        "input has support on sector {:?} beyond the exact region (length <= {})",
                        s.word, self.exact_upto
                    )));
                }
            }
        }
        Ok(&self.matrix * v)
    }

    /// Block from sector `from` to sector `to`.
    pub fn block(&self, to: &[usize], from: &[usize]) -> Option<CMat> {
        let t = self.fock.sector(to)?;
        let f = self.fock.sector(from)?;
        Some(self.matrix.view((t.offset, f.offset), (t.dim(), f.dim())).into_owned())
    }
}

/// The vacuum expectation `E(T) = ⟨Ω, T Ω⟩ ∈ B`, as a base-algebra element.
pub fn fock_phi(t: &BlockOperator) -> Result<CMat> {
    if t.exact_upto < 0 {
        return Err(AmalgamError::Truncation(format!(
            "operator of word length {} is not exact on the vacuum at cap {}",
            t.word_len,
            t.fock().cap()
        )));
    }
    let f = t.fock();
    let omega = f.vacuum();
    let image = &t.matrix * &omega;
    Ok(f.base().element(&f.inner_coords(&omega, &image)))
}

/// A word `a_1 a_2 ... a_n` with `a_j` in factor `ι_j`.
#[derive(Clone, Debug)]
pub struct ReducedWord {
    pub letters: Vec<(usize, CMat)>,
}

impl ReducedWord {
    pub fn new(letters: Vec<(usize, CMat)>) -> Self {
        Self { letters }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn indices(&self) -> Word {
        self.letters.iter().map(|(i, _)| *i).collect()
    }

    /// Checks alternation and `φ_{ι_j}(a_j) = 0`.
    pub fn check_reduced(&self, fock: &FockSpace, tol: f64) -> Result<()> {
        if !is_alternating(&self.indices()) {
            return Err(AmalgamError::Precondition("consecutive letters from the same factor".into()));
        }
        for (pos, (i, a)) in self.letters.iter().enumerate() {
            let fs = fock
                .factors()
                .get(*i)
                .ok_or_else(|| AmalgamError::Parameter(format!("no factor with index {i}")))?;
            let phi = fs.factor.phi_coords(a).norm();
            if phi > tol * a.norm().max(1.0) {
                return Err(AmalgamError::Precondition(format!(
                    "letter {pos} is not centered (‖φ(a)‖ = {phi:e})"
                )));
            }
        }
        Ok(())
    }
}

/// `λ(a_1) ... λ(a_n)` as a block operator.
pub fn lambda_word(fock: &Arc<FockSpace>, word: &ReducedWord) -> Result<BlockOperator> {
    let mut out = BlockOperator::identity(fock);
    for (i, a) in &word.letters {
        out = out.compose(&fock.lambda(*i, a)?)?;
    }
    Ok(out)
}

/// `λ(a_1) ... λ(a_n) v`, applied right to left. Fails when the word is
/// longer than the cap allows for an exact answer on `v`.
pub fn apply_reduced_word(fock: &Arc<FockSpace>, word: &ReducedWord, v: &CVec) -> Result<CVec> {
    let start = fock.support_len(v, 0.0).unwrap_or(0);
    if start + word.len() > fock.cap() {
        return Err(AmalgamError::Cap { word_len: start + word.len(), cap: fock.cap() });
    }
    let mut out = v.clone();
    for (i, a) in word.letters.iter().rev() {
        out = &fock.lambda(*i, a)?.matrix * out;
    }
    Ok(out)
}

/// Result of the freeness test on one reduced word.
#[derive(Clone, Debug)]
pub struct FreenessRecord {
    pub indices: Word,
    /// `‖E(λ(a_1) ... λ(a_n))‖`.
    pub moment: f64,
    /// Distance of `λ(w) Ω` from the elementary tensor `â_1 ⊗ ... ⊗ â_n`.
    pub tensor_residual: f64,
}

/// Vacuum moment of a centered reduced word, which must vanish, together with
/// the check that the word creates the elementary tensor of its letters.
pub fn freeness_check(fock: &Arc<FockSpace>, word: &ReducedWord, tol: f64) -> Result<FreenessRecord> {
    word.check_reduced(fock, tol)?;
    let omega = fock.vacuum();
    let image = apply_reduced_word(fock, word, &omega)?;
    let moment = fock.base().element(&fock.inner_coords(&omega, &image)).norm();
    let expected = elementary_tensor(fock, word)?;
    Ok(FreenessRecord { indices: word.indices(), moment, tensor_residual: (image - expected).norm() })
}

/// The carrier vector of `P°â_1 ⊗ ... ⊗ P°â_n` in the sector of the word.
pub fn elementary_tensor(fock: &FockSpace, word: &ReducedWord) -> Result<CVec> {
    let mut out = CVec::zeros(fock.dim());
    if word.is_empty() {
        return Ok(fock.vacuum());
    }
    let idx = word.indices();
    let mut tail: Option<CVec> = None;
    for k in (0..word.len()).rev() {
        let (i, a) = &word.letters[k];
        let fs = &fock.factors()[*i];
        let v = fs.w.adjoint() * fs.hat(a)?;
        let sector = fock
            .sector(&idx[k..])
            .ok_or(AmalgamError::Cap { word_len: word.len(), cap: fock.cap() })?;
        tail = Some(match tail {
            None => v,
            Some(t) => &sector.j * kron(&col(&v), &col(&t)).column(0),
        });
    }
    let s = fock.sector(&idx).expect("sector");
    out.rows_mut(s.offset, s.dim()).copy_from(tail.as_ref().expect("nonempty"));
    Ok(out)
}

fn col(v: &CVec) -> CMat {
    CMat::from_column_slice(v.len(), 1, v.as_slice())
}
