//! Right Hilbert C*-modules over a finite-dimensional base algebra, realized on
//! a finite carrier `C^d` whose standard basis is orthonormal for the scalar
//! inner product `τ(⟨x, y⟩)`.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algebra::{
    canonical_trace, CheckResult, ConditionalExpectation, StarAlgebra, TraceState,
    ValidationReport,
};
use crate::error::{AmalgamError, Result};
use crate::linalg::{
    hermitian_eigen, identity, kron, min_eigenvalue, random_vector, rank, re, vectorize, CMat,
    CVec, MACHINE_EPS,
};

/// The base algebra `B` together with its faithful trace.
#[derive(Clone, Debug)]
pub struct BaseAlgebra {
    pub algebra: Arc<StarAlgebra>,
    pub trace: TraceState,
}

impl BaseAlgebra {
    pub fn new(algebra: Arc<StarAlgebra>) -> Result<Self> {
        let trace = canonical_trace(&algebra)?;
        Ok(Self { algebra, trace })
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn element(&self, coords: &CVec) -> CMat {
        self.algebra.element(coords)
    }

    pub fn coords(&self, b: &CMat) -> CVec {
        self.algebra.coords(b)
    }
}

/// One factor `(A, φ)` of an amalgamated product: the algebra, a conditional
/// expectation onto its copy of `B`, and the images of the base basis in `A`.
#[derive(Clone, Debug)]
pub struct Factor {
    algebra: Arc<StarAlgebra>,
    expectation: ConditionalExpectation,
    b_images: Vec<CMat>,
    // Base-algebra coordinates of φ(α_j), one column per basis element of A.
    phi_base: CMat,
}

impl Factor {
    /// Factor whose copy of `B` is literally the base algebra.
    pub fn same_ambient(expectation: ConditionalExpectation) -> Result<Self> {
        let images = expectation.target().basis().to_vec();
        let base = expectation.target().clone();
        Self::new(expectation, &base, images)
    }

    /// `b_images[m]` must be the image of the `m`-th base basis element under
    /// a unital *-isomorphism onto the range of `expectation`.
    pub fn new(
        expectation: ConditionalExpectation,
        base: &StarAlgebra,
        b_images: Vec<CMat>,
    ) -> Result<Self> {
        let a = expectation.source().clone();
        let target = expectation.target().clone();
        if b_images.len() != base.dim() || target.dim() != base.dim() {
            return Err(AmalgamError::Dimension(format!(
                "factor copy of the base has dimension {}, base has {}",
                target.dim(),
                base.dim()
            )));
        }
        for m in &b_images {
            if m.nrows() != a.ambient_dim() || m.ncols() != a.ambient_dim() {
                return Err(AmalgamError::Dimension("base image has wrong size".into()));
            }
        }
        let embed = |c: &CVec| {
            let mut out = CMat::zeros(a.ambient_dim(), a.ambient_dim());
            for (b, x) in b_images.iter().zip(c.iter()) {
                out += b * *x;
            }
            out
        };
        let mut worst: f64 = (embed(&base.coords(&base.unit())) - a.unit()).norm();
        for (i, bi) in base.basis().iter().enumerate() {
            worst = worst.max((embed(&base.coords(&bi.adjoint())) - b_images[i].adjoint()).norm());
            for (j, bj) in base.basis().iter().enumerate() {
                let lhs = embed(&base.coords(&(bi * bj)));
                worst = worst.max((lhs - &b_images[i] * &b_images[j]).norm());
            }
        }
        if worst > 1e-8 {
            return Err(AmalgamError::Structural(format!(
                "base embedding is not a unital *-homomorphism (residual {worst:e})"
            )));
        }
        // Change of coordinates from the factor's copy of B to the base basis.
        let mut t = CMat::zeros(base.dim(), base.dim());
        for (m, img) in b_images.iter().enumerate() {
            if target.residual(img) > 1e-8 {
                return Err(AmalgamError::Structural(
                    "base image lies outside the expectation's range".into(),
                ));
            }
            t.set_column(m, &target.coords(img));
        }
        let t_inv = t
            .try_inverse()
            .ok_or_else(|| AmalgamError::Structural("base embedding is not injective".into()))?;
        let phi_base = t_inv * expectation.map();
        Ok(Self { algebra: a, expectation, b_images, phi_base })
    }

    pub fn algebra(&self) -> &Arc<StarAlgebra> {
        &self.algebra
    }

    pub fn expectation(&self) -> &ConditionalExpectation {
        &self.expectation
    }

    pub fn b_images(&self) -> &[CMat] {
        &self.b_images
    }

    /// The copy of `b` (given in base coordinates) inside `A`.
    pub fn embed(&self, b_coords: &CVec) -> CMat {
        let n = self.algebra.ambient_dim();
        let mut out = CMat::zeros(n, n);
        for (b, x) in self.b_images.iter().zip(b_coords.iter()) {
            out += b * *x;
        }
        out
    }

    /// Base coordinates of `φ(a)`.
    pub fn phi_coords(&self, a: &CMat) -> CVec {
        &self.phi_base * self.algebra.coords(a)
    }
}

/// Left action of a concrete algebra through one matrix per basis element.
#[derive(Clone, Debug)]
pub struct LeftAction {
    pub algebra: Arc<StarAlgebra>,
    pub mats: Vec<CMat>,
}

impl LeftAction {
    pub fn matrix(&self, a: &CMat) -> CMat {
        self.matrix_from_coords(&self.algebra.coords(a))
    }

    pub fn matrix_from_coords(&self, c: &CVec) -> CMat {
        let d = self.mats.first().map(|m| m.nrows()).unwrap_or(0);
        let mut out = CMat::zeros(d, d);
        for (m, x) in self.mats.iter().zip(c.iter()) {
            out += m * *x;
        }
        out
    }

    fn conjugate(&self, j: &CMat, j_pinv: &CMat) -> Self {
        Self { algebra: self.algebra.clone(), mats: self.mats.iter().map(|m| j * m * j_pinv).collect() }
    }
}

#[derive(Clone, Debug)]
pub struct HilbertModule {
    base: Arc<BaseAlgebra>,
    dim: usize,
    inner: Vec<CMat>,
    right: Vec<CMat>,
    left_b: Option<Vec<CMat>>,
    left_a: Option<LeftAction>,
    specified: Option<CVec>,
}

/// Data of a module given on a spanning set: the B-valued Gram matrices
/// (coefficient of each base basis element), right action matrices and
/// optional left actions, all on the span coordinates.
#[derive(Clone, Debug)]
pub struct SpanData {
    pub gram: Vec<CMat>,
    pub right: Vec<CMat>,
    pub left_b: Option<Vec<CMat>>,
    pub left_a: Option<LeftAction>,
    pub specified: Option<CVec>,
}

/// A module built from a spanning set, with the maps between span
/// coordinates and the orthonormal carrier.
#[derive(Clone, Debug)]
pub struct QuotientModule {
    pub module: HilbertModule,
    /// Span coordinates to carrier coordinates.
    pub j: CMat,
    /// Carrier coordinates to span coordinates.
    pub j_pinv: CMat,
}

impl HilbertModule {
    /// Quotient of the span by the null space of the scalar Gram matrix,
    /// then orthonormalized. Eigenvalues at or below `cutoff` (default
    /// `n · eps · λ_max`) count as zero.
    pub fn from_span(base: Arc<BaseAlgebra>, data: SpanData, cutoff: Option<f64>) -> Result<QuotientModule> {
        let db = base.dim();
        if data.gram.len() != db || data.right.len() != db {
            return Err(AmalgamError::Dimension("one Gram and right-action matrix per base element".into()));
        }
        let n = data.gram.first().map(|g| g.nrows()).unwrap_or(0);
        let mut scalar = CMat::zeros(n, n);
        for (g, t) in data.gram.iter().zip(base.trace.basis_values()) {
            if g.nrows() != n || g.ncols() != n {
                return Err(AmalgamError::Dimension("Gram matrices must be square and equal-sized".into()));
            }
            scalar += g * *t;
        }
        let (vals, vecs) = hermitian_eigen(&scalar);
        let top = vals.first().cloned().unwrap_or(0.0).max(0.0);
        let cut = cutoff.unwrap_or(n.max(1) as f64 * MACHINE_EPS * top);
        let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > cut).collect();
        let d = keep.len();
        let mut j = CMat::zeros(d, n);
        let mut j_pinv = CMat::zeros(n, d);
        for (c, &i) in keep.iter().enumerate() {
            let s = vals[i].sqrt();
            let u = vecs.column(i);
            j_pinv.set_column(c, &(u * re(1.0 / s)));
            j.set_row(c, &(u.adjoint() * re(s)));
        }
        let module = HilbertModule {
            base,
            dim: d,
            inner: data.gram.iter().map(|g| j_pinv.adjoint() * g * &j_pinv).collect(),
            right: data.right.iter().map(|r| &j * r * &j_pinv).collect(),
            left_b: data.left_b.map(|ls| ls.iter().map(|l| &j * l * &j_pinv).collect()),
            left_a: data.left_a.map(|la| la.conjugate(&j, &j_pinv)),
            specified: data.specified.map(|v| &j * v),
        };
        Ok(QuotientModule { module, j, j_pinv })
    }

    pub fn base(&self) -> &Arc<BaseAlgebra> {
        &self.base
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn inner_matrices(&self) -> &[CMat] {
        &self.inner
    }

    pub fn right_matrices(&self) -> &[CMat] {
        &self.right
    }

    pub fn left_b_matrices(&self) -> Option<&[CMat]> {
        self.left_b.as_deref()
    }

    pub fn left_action(&self) -> Option<&LeftAction> {
        self.left_a.as_ref()
    }

    pub fn specified(&self) -> Option<&CVec> {
        self.specified.as_ref()
    }

    /// Base coordinates of `⟨x, y⟩`.
    pub fn inner_coords(&self, x: &CVec, y: &CVec) -> CVec {
        CVec::from_iterator(self.inner.len(), self.inner.iter().map(|g| x.dotc(&(g * y))))
    }

    pub fn inner(&self, x: &CVec, y: &CVec) -> CMat {
        self.base.element(&self.inner_coords(x, y))
    }

    pub fn right_from_coords(&self, c: &CVec) -> CMat {
        let mut out = CMat::zeros(self.dim, self.dim);
        for (r, x) in self.right.iter().zip(c.iter()) {
            out += r * *x;
        }
        out
    }

    /// Matrix of `x -> x b`.
    pub fn right_matrix(&self, b: &CMat) -> CMat {
        self.right_from_coords(&self.base.coords(b))
    }

    pub fn left_b_from_coords(&self, c: &CVec) -> Result<CMat> {
        let ls = self
            .left_b
            .as_ref()
            .ok_or_else(|| AmalgamError::Structural("module has no left action of the base".into()))?;
        let mut out = CMat::zeros(self.dim, self.dim);
        for (l, x) in ls.iter().zip(c.iter()) {
            out += l * *x;
        }
        Ok(out)
    }

    /// Matrix of `x -> b x`.
    pub fn left_b_matrix(&self, b: &CMat) -> Result<CMat> {
        self.left_b_from_coords(&self.base.coords(b))
    }

    /// Matrix of `x -> a x` for the attached left action.
    pub fn left_matrix(&self, a: &CMat) -> Result<CMat> {
        self.left_a
            .as_ref()
            .map(|la| la.matrix(a))
            .ok_or_else(|| AmalgamError::Structural("module has no left algebra action".into()))
    }

    /// The rank-one operator `θ_{x,y}: z -> x ⟨y, z⟩` from `self` to `target`
    /// with `x ∈ target`, `y ∈ self`.
    pub fn theta_to(&self, target: &HilbertModule, x: &CVec, y: &CVec) -> CMat {
        let mut out = CMat::zeros(target.dim, self.dim);
        for (g, r) in self.inner.iter().zip(&target.right) {
            let row = (g.adjoint() * y).adjoint();
            out += (r * x) * row;
        }
        out
    }

    pub fn theta(&self, x: &CVec, y: &CVec) -> CMat {
        self.theta_to(self, x, y)
    }

    /// Largest B-valued adjointness defect `‖⟨Tx, y⟩ - ⟨x, T* y⟩‖` over basis
    /// vectors, `T: self -> target`.
    pub fn adjointable_residual(&self, target: &HilbertModule, t: &CMat) -> f64 {
        let t_adj = t.adjoint();
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            let x = unit_vector(self.dim, i);
            for k in 0..target.dim {
                let y = unit_vector(target.dim, k);
                let lhs = target.inner_coords(&(t * &x), &y);
                let rhs = self.inner_coords(&x, &(&t_adj * &y));
                worst = worst.max((lhs - rhs).norm());
            }
        }
        worst
    }

    /// Checks the Hilbert-module axioms, the attached left actions and the
    /// scalar orthonormality of the carrier basis.
    pub fn validate(&self, tol: f64) -> ValidationReport {
        let d = self.dim;
        let b = &self.base.algebra;
        let mut checks = Vec::new();
        let mut push = |name: &str, measured: f64| {
            checks.push(CheckResult { name: name.into(), measured, threshold: tol, pass: measured < tol });
        };

        let mut herm: f64 = 0.0;
        let mut lin: f64 = 0.0;
        for i in 0..d {
            let x = unit_vector(d, i);
            for k in 0..d {
                let y = unit_vector(d, k);
                let xy = self.inner(&x, &y);
                herm = herm.max((xy.adjoint() - self.inner(&y, &x)).norm());
                for (m, bm) in b.basis().iter().enumerate() {
                    let lhs = self.inner(&x, &(&self.right[m] * &y));
                    lin = lin.max((lhs - &xy * bm).norm());
                }
            }
        }
        push("inner_hermitian", herm);
        push("inner_right_linear", lin);

        let mut rep: f64 = 0.0;
        for (i, bi) in b.basis().iter().enumerate() {
            for (j, bj) in b.basis().iter().enumerate() {
                let lhs = self.right_matrix(&(bi * bj));
                rep = rep.max((lhs - &self.right[j] * &self.right[i]).norm());
            }
        }
        rep = rep.max((self.right_matrix(&b.unit()) - identity(d)).norm());
        push("right_action", rep);

        let mut rng = ChaCha8Rng::seed_from_u64(0xd0d0);
        let mut neg: f64 = 0.0;
        for _ in 0..8 {
            let x = random_vector(&mut rng, d);
            neg = neg.max(-min_eigenvalue(&self.inner(&x, &x))).max(0.0);
        }
        push("inner_positive", neg);

        let mut scalar = CMat::zeros(d, d);
        for (g, t) in self.inner.iter().zip(self.base.trace.basis_values()) {
            scalar += g * *t;
        }
        push("carrier_orthonormal", (scalar - identity(d)).norm());

        if let Some(ls) = &self.left_b {
            let mut worst: f64 = 0.0;
            for (i, bi) in b.basis().iter().enumerate() {
                worst = worst.max(self.adjointable_residual(self, &ls[i]));
                for (j, bj) in b.basis().iter().enumerate() {
                    let prod = self.left_b_matrix(&(bi * bj)).unwrap_or_else(|_| CMat::zeros(d, d));
                    worst = worst.max((prod - &ls[i] * &ls[j]).norm());
                    worst = worst.max((&ls[i] * &self.right[j] - &self.right[j] * &ls[i]).norm());
                }
            }
            push("left_base_action", worst);
        }
        if let Some(la) = &self.left_a {
            let a = &la.algebra;
            let mut worst: f64 = 0.0;
            for (i, ai) in a.basis().iter().enumerate() {
                worst = worst.max(self.adjointable_residual(self, &la.mats[i]));
                worst = worst.max((la.matrix(&ai.adjoint()) - la.mats[i].adjoint()).norm());
                for (j, aj) in a.basis().iter().enumerate() {
                    worst = worst.max((la.matrix(&(ai * aj)) - &la.mats[i] * &la.mats[j]).norm());
                }
                for r in &self.right {
                    worst = worst.max((&la.mats[i] * r - r * &la.mats[i]).norm());
                }
            }
            worst = worst.max((la.matrix(&a.unit()) - identity(d)).norm());
            push("left_algebra_action", worst);
        }
        let pass = checks.iter().all(|c| c.pass);
        ValidationReport { checks, pass }
    }
}

pub fn unit_vector(n: usize, i: usize) -> CVec {
    let mut v = CVec::zeros(n);
    v[i] = re(1.0);
    v
}

/// `B` as a right module over itself, with specified vector `1`.
pub fn base_module(base: Arc<BaseAlgebra>) -> Result<QuotientModule> {
    let b = base.algebra.clone();
    let db = b.dim();
    let gram = (0..db)
        .map(|m| {
            CMat::from_fn(db, db, |i, j| b.coords(&(b.basis()[i].adjoint() * &b.basis()[j]))[m])
        })
        .collect();
    let data = SpanData {
        gram,
        right: b.basis().iter().map(|x| b.right_mult_matrix(x)).collect(),
        left_b: Some(b.basis().iter().map(|x| b.left_mult_matrix(x)).collect()),
        left_a: None,
        specified: Some(b.coords(&b.unit())),
    };
    HilbertModule::from_span(base, data, None)
}

/// The GNS module `E = A ⊗_φ B` of a factor with cyclic vector `ξ = 1̂`.
/// Fails with [`AmalgamError::GnsNotFaithful`] when the left representation
/// of `A` has a kernel.
pub fn gns(base: Arc<BaseAlgebra>, factor: &Factor) -> Result<QuotientModule> {
    let a = factor.algebra().clone();
    let n = a.dim();
    let db = base.dim();
    let phis: Vec<Vec<CVec>> = (0..n)
        .map(|i| (0..n).map(|j| factor.phi_coords(&(a.basis()[i].adjoint() * &a.basis()[j]))).collect())
        .collect();
    let gram = (0..db).map(|m| CMat::from_fn(n, n, |i, j| phis[i][j][m])).collect();
    let data = SpanData {
        gram,
        right: factor.b_images().iter().map(|x| a.right_mult_matrix(x)).collect(),
        left_b: Some(factor.b_images().iter().map(|x| a.left_mult_matrix(x)).collect()),
        left_a: Some(LeftAction {
            algebra: a.clone(),
            mats: a.basis().iter().map(|x| a.left_mult_matrix(x)).collect(),
        }),
        specified: Some(a.coords(&a.unit())),
    };
    let q = HilbertModule::from_span(base, data, None)?;
    let la = q.module.left_action().expect("left action attached");
    let d = q.module.dim();
    let mut stacked = CMat::zeros(d * d, n);
    for (k, m) in la.mats.iter().enumerate() {
        stacked.set_column(k, &vectorize(m));
    }
    let r = if d == 0 { 0 } else { rank(&stacked, 1e-9) };
    if r < n {
        return Err(AmalgamError::GnsNotFaithful { carrier_dim: d, kernel_dim: n - r });
    }
    Ok(q)
}

/// Orthogonal complement `E° = E ⊖ ξB` of the specified vector, with the
/// isometric inclusion `W: E° -> E`.
pub fn complement_of_cyclic(e: &HilbertModule) -> Result<(HilbertModule, CMat)> {
    let xi = e
        .specified()
        .ok_or_else(|| AmalgamError::Precondition("module has no specified vector".into()))?;
    let b = &e.base().algebra;
    let norm_defect = (e.inner(xi, xi) - b.unit()).norm();
    if norm_defect > 1e-8 {
        return Err(AmalgamError::Precondition(format!(
            "specified vector is not normalized: ‖⟨ξ, ξ⟩ - 1‖ = {norm_defect:e}"
        )));
    }
    let p = identity(e.dim()) - e.theta(xi, xi);
    let (vals, vecs) = hermitian_eigen(&p);
    let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > 0.5).collect();
    let mut w = CMat::zeros(e.dim(), keep.len());
    for (c, &i) in keep.iter().enumerate() {
        w.set_column(c, &vecs.column(i));
    }
    let wa = w.adjoint();
    let sub = HilbertModule {
        base: e.base.clone(),
        dim: keep.len(),
        inner: e.inner.iter().map(|g| &wa * g * &w).collect(),
        right: e.right.iter().map(|r| &wa * r * &w).collect(),
        left_b: e.left_b.as_ref().map(|ls| ls.iter().map(|l| &wa * l * &w).collect()),
        left_a: None,
        specified: None,
    };
    Ok((sub, w))
}

/// Interior tensor product `E ⊗_B F`. `F` must carry a left action of the
/// base; the result keeps the left actions of `E`. Span coordinates are
/// ordered with `E` outer: `e_i ⊗ f_j` has index `i · dim F + j`.
pub fn internal_tensor(e: &HilbertModule, f: &HilbertModule) -> Result<QuotientModule> {
    let lf = f
        .left_b
        .as_ref()
        .ok_or_else(|| AmalgamError::Structural("right tensor factor needs a left action of the base".into()))?;
    let db = e.base.dim();
    let gram = (0..db)
        .map(|n| {
            let mut g = CMat::zeros(e.dim * f.dim, e.dim * f.dim);
            for (em, l) in e.inner.iter().zip(lf.iter()) {
                g += kron(em, &(&f.inner[n] * l));
            }
            g
        })
        .collect();
    let id_e = identity(e.dim);
    let id_f = identity(f.dim);
    let data = SpanData {
        gram,
        right: f.right.iter().map(|r| kron(&id_e, r)).collect(),
        left_b: e.left_b.as_ref().map(|ls| ls.iter().map(|l| kron(l, &id_f)).collect()),
        left_a: e.left_a.as_ref().map(|la| LeftAction {
            algebra: la.algebra.clone(),
            mats: la.mats.iter().map(|m| kron(m, &id_f)).collect(),
        }),
        specified: None,
    };
    HilbertModule::from_span(e.base.clone(), data, None)
}
