//! Finite-dimensional C*-algebras as concrete matrix *-algebras, conditional
//! expectations onto unital subalgebras, and the faithful trace used to
//! scalarize B-valued inner products.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{AmalgamError, Result};
use crate::json::{matrix_to_json, MatrixJson};
use crate::linalg::{
    hermitian_eigen, hs_inner, identity, min_eigenvalue, null_space, op_norm, random_matrix, re,
    unvectorize, vectorize, CMat, CVec, OrthoBasis, C64,
};

/// Default tolerance for structural residuals.
pub const TOL_STRUCTURAL: f64 = 1e-10;
/// Default tolerance for operator-identity checks.
pub const TOL_IDENTITY: f64 = 1e-8;

/// A unital *-subalgebra of `M_n(C)` with a Hilbert–Schmidt orthonormal basis.
#[derive(Clone, Debug)]
pub struct StarAlgebra {
    ambient_dim: usize,
    basis: Vec<CMat>,
}

impl StarAlgebra {
    /// Smallest unital *-closed algebra containing `generators`.
    pub fn generate(generators: &[CMat]) -> Result<Self> {
        let n = check_square_family(generators)?;
        let mut span = OrthoBasis::new(n * n);
        let push = |span: &mut OrthoBasis, m: &CMat| {
            span.try_push(&vectorize(m), 1e-10);
        };
        push(&mut span, &identity(n));
        for g in generators {
            push(&mut span, g);
            push(&mut span, &g.adjoint());
        }
        // Products of basis elements until the span stops growing; pairs
        // already multiplied are skipped.
        let mut done = 0;
        loop {
            let current = span.dim();
            if done == current {
                break;
            }
            let mats: Vec<CMat> = span.vectors().iter().map(|v| unvectorize(v, n, n)).collect();
            for i in 0..current {
                for j in 0..current {
                    if i < done && j < done {
                        continue;
                    }
                    if span.dim() >= n * n {
                        break;
                    }
                    push(&mut span, &(&mats[i] * &mats[j]));
                }
                if i >= done {
                    push(&mut span, &mats[i].adjoint());
                }
            }
            done = current;
        }
        Ok(Self {
            ambient_dim: n,
            basis: span.vectors().iter().map(|v| unvectorize(v, n, n)).collect(),
        })
    }

    /// Algebra whose span is given; fails unless the span is already a unital
    /// *-algebra.
    pub fn from_spanning(matrices: &[CMat]) -> Result<Self> {
        let n = check_square_family(matrices)?;
        let mut span = OrthoBasis::new(n * n);
        for m in matrices {
            span.try_push(&vectorize(m), 1e-10);
        }
        let alg = Self {
            ambient_dim: n,
            basis: span.vectors().iter().map(|v| unvectorize(v, n, n)).collect(),
        };
        let closure = alg.closure_residual();
        if closure > 1e-8 {
            return Err(AmalgamError::Structural(format!(
                "span is not a unital *-algebra (residual {closure:e})"
            )));
        }
        Ok(alg)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[CMat] {
        &self.basis
    }

    pub fn unit(&self) -> CMat {
        identity(self.ambient_dim)
    }

    /// Hilbert–Schmidt coordinates of the orthogonal projection of `m`.
    pub fn coords(&self, m: &CMat) -> CVec {
        CVec::from_iterator(self.dim(), self.basis.iter().map(|b| hs_inner(b, m)))
    }

    pub fn element(&self, coords: &CVec) -> CMat {
        let mut out = CMat::zeros(self.ambient_dim, self.ambient_dim);
        for (b, c) in self.basis.iter().zip(coords.iter()) {
            out += b * *c;
        }
        out
    }

    /// Distance (Frobenius) from `m` to the span.
    pub fn residual(&self, m: &CMat) -> f64 {
        (m - self.element(&self.coords(m))).norm()
    }

    pub fn contains(&self, m: &CMat, tol: f64) -> bool {
        self.residual(m) <= tol * m.norm().max(1.0)
    }

    /// Largest span-projection residual of basis products, adjoints and the
    /// unit.
    pub fn closure_residual(&self) -> f64 {
        let mut worst = self.residual(&self.unit());
        for a in &self.basis {
            worst = worst.max(self.residual(&a.adjoint()));
            for b in &self.basis {
                worst = worst.max(self.residual(&(a * b)));
            }
        }
        worst
    }

    /// Numerical rank of the vectorized basis.
    pub fn basis_rank(&self) -> usize {
        let n2 = self.ambient_dim * self.ambient_dim;
        let mut m = CMat::zeros(n2, self.dim());
        for (j, b) in self.basis.iter().enumerate() {
            m.set_column(j, &vectorize(b));
        }
        crate::linalg::rank(&m, 1e-10)
    }

    /// Matrix (in basis coordinates) of `x -> a x`.
    pub fn left_mult_matrix(&self, a: &CMat) -> CMat {
        let mut m = CMat::zeros(self.dim(), self.dim());
        for (j, b) in self.basis.iter().enumerate() {
            m.set_column(j, &self.coords(&(a * b)));
        }
        m
    }

    /// Matrix (in basis coordinates) of `x -> x a`.
    pub fn right_mult_matrix(&self, a: &CMat) -> CMat {
        let mut m = CMat::zeros(self.dim(), self.dim());
        for (j, b) in self.basis.iter().enumerate() {
            m.set_column(j, &self.coords(&(b * a)));
        }
        m
    }

    pub fn to_json(&self) -> StarAlgebraJson {
        StarAlgebraJson {
            ambient_dim: self.ambient_dim,
            dim: self.dim(),
            basis: self.basis.iter().map(matrix_to_json).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StarAlgebraJson {
    pub ambient_dim: usize,
    pub dim: usize,
    pub basis: Vec<MatrixJson>,
}

fn check_square_family(ms: &[CMat]) -> Result<usize> {
    let first = ms
        .first()
        .ok_or_else(|| AmalgamError::Dimension("empty generator list".into()))?;
    let n = first.nrows();
    if n == 0 {
        return Err(AmalgamError::Dimension("zero-size matrix".into()));
    }
    for (i, m) in ms.iter().enumerate() {
        if m.nrows() != m.ncols() {
            return Err(AmalgamError::Dimension(format!(
                "generator {i} is {}x{}, not square",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.nrows() != n {
            return Err(AmalgamError::Dimension(format!(
                "generator {i} has size {}, expected {n}",
                m.nrows()
            )));
        }
    }
    Ok(n)
}

/// Faithful tracial state `τ(b) = Σ_r w_r tr(p_r b) / tr(p_r)` over the
/// minimal central projections `p_r` of `B`.
#[derive(Clone, Debug)]
pub struct TraceState {
    block_projections: Vec<CMat>,
    weights: Vec<f64>,
    basis_values: Vec<C64>,
}

impl TraceState {
    pub fn eval(&self, b: &CMat) -> C64 {
        self.block_projections
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| (p * b).trace() * re(*w) / p.trace())
            .sum()
    }

    /// `τ(β_m)` for the basis of the algebra the trace was built on.
    pub fn basis_values(&self) -> &[C64] {
        &self.basis_values
    }

    /// Value of τ on an element given in basis coordinates.
    pub fn eval_coords(&self, coords: &CVec) -> C64 {
        coords.iter().zip(&self.basis_values).map(|(c, t)| c * t).sum()
    }

    pub fn num_blocks(&self) -> usize {
        self.block_projections.len()
    }

    pub fn block_projections(&self) -> &[CMat] {
        &self.block_projections
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Uniformly weighted trace over the simple summands of `B`.
pub fn canonical_trace(b: &StarAlgebra) -> Result<TraceState> {
    for x in b.basis() {
        if b.residual(&x.adjoint()) > 1e-8 {
            return Err(AmalgamError::Structural("algebra is not *-closed".into()));
        }
    }
    let n = b.ambient_dim();
    let d = b.dim();
    // Center: coordinates x with Σ_i x_i [β_i, β_j] = 0 for every j.
    let mut system = CMat::zeros(d * n * n, d);
    for i in 0..d {
        for j in 0..d {
            let comm = &b.basis()[i] * &b.basis()[j] - &b.basis()[j] * &b.basis()[i];
            let v = vectorize(&comm);
            for (r, val) in v.iter().enumerate() {
                system[(j * n * n + r, i)] = *val;
            }
        }
    }
    let center = null_space(&system, 1e-9);
    let mut rng = ChaCha8Rng::seed_from_u64(0x7ace);
    let coeffs = random_matrix(&mut rng, center.ncols(), 1);
    let mut h = CMat::zeros(n, n);
    for c in 0..center.ncols() {
        let z = b.element(&center.column(c).into_owned());
        h += (&z + z.adjoint()) * re(coeffs[(c, 0)].re);
    }
    let (vals, vecs) = hermitian_eigen(&h);
    let spread = vals.first().unwrap_or(&0.0) - vals.last().unwrap_or(&0.0);
    let gap = 1e-6 * (spread.abs() + 1.0);
    let mut projections = Vec::new();
    let mut start = 0;
    for i in 1..=vals.len() {
        if i == vals.len() || (vals[i - 1] - vals[i]).abs() > gap {
            let mut p = CMat::zeros(n, n);
            for k in start..i {
                let v = vecs.column(k);
                p += v * v.adjoint();
            }
            projections.push(p);
            start = i;
        }
    }
    let r = projections.len();
    let weights = vec![1.0 / r as f64; r];
    let mut state = TraceState {
        block_projections: projections,
        weights,
        basis_values: Vec::new(),
    };
    state.basis_values = b.basis().iter().map(|x| state.eval(x)).collect();
    Ok(state)
}

/// A conditional expectation `A -> B` stored as a `dim B x dim A` matrix in
/// basis coordinates.
#[derive(Clone, Debug)]
pub struct ConditionalExpectation {
    source: Arc<StarAlgebra>,
    target: Arc<StarAlgebra>,
    map: CMat,
}

impl ConditionalExpectation {
    pub fn from_fn<F>(source: Arc<StarAlgebra>, target: Arc<StarAlgebra>, f: F) -> Result<Self>
    where
        F: Fn(&CMat) -> CMat,
    {
        if source.ambient_dim() != target.ambient_dim() {
            return Err(AmalgamError::Structural(
                "source and target live in different ambient spaces".into(),
            ));
        }
        for b in target.basis() {
            if source.residual(b) > 1e-8 {
                return Err(AmalgamError::Structural(
                    "target is not contained in the source span".into(),
                ));
            }
        }
        let mut map = CMat::zeros(target.dim(), source.dim());
        for (j, a) in source.basis().iter().enumerate() {
            let img = f(a);
            if target.residual(&img) > 1e-8 * img.norm().max(1.0) {
                return Err(AmalgamError::Structural(
                    "map does not take values in the target".into(),
                ));
            }
            map.set_column(j, &target.coords(&img));
        }
        Ok(Self { source, target, map })
    }

    /// `a -> tr(a)/n · 1`, onto `C·1`.
    pub fn normalized_trace(source: Arc<StarAlgebra>) -> Result<Self> {
        let n = source.ambient_dim();
        let scalars = Arc::new(StarAlgebra::generate(&[identity(n)])?);
        Self::from_fn(source, scalars, move |a| identity(n) * (a.trace() / re(n as f64)))
    }

    /// `a -> Σ p_i a p_i` for a complete family of orthogonal projections.
    pub fn compression(
        source: Arc<StarAlgebra>,
        target: Arc<StarAlgebra>,
        projections: Vec<CMat>,
    ) -> Result<Self> {
        Self::from_fn(source, target, move |a| {
            projections.iter().map(|p| p * a * p).fold(CMat::zeros(a.nrows(), a.ncols()), |s, x| s + x)
        })
    }

    pub fn source(&self) -> &Arc<StarAlgebra> {
        &self.source
    }

    pub fn target(&self) -> &Arc<StarAlgebra> {
        &self.target
    }

    pub fn map(&self) -> &CMat {
        &self.map
    }

    pub fn apply(&self, a: &CMat) -> CMat {
        self.target.element(&(&self.map * self.source.coords(a)))
    }

    /// Target-basis coordinates of `φ(a)`.
    pub fn apply_coords(&self, a: &CMat) -> CVec {
        &self.map * self.source.coords(a)
    }

    pub fn validate(&self, tol: f64) -> Result<ValidationReport> {
        validate_conditional_expectation(self, tol)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
    pub pass: bool,
}

impl ValidationReport {
    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn below(name: &str, measured: f64, tol: f64) -> CheckResult {
    CheckResult { name: name.into(), measured, threshold: tol, pass: measured < tol }
}

/// Checks idempotence, bimodularity, unitality, positivity (including one 2x2
/// amplification), contractivity and faithfulness.
pub fn validate_conditional_expectation(
    phi: &ConditionalExpectation,
    tol: f64,
) -> Result<ValidationReport> {
    let a_alg = phi.source();
    let b_alg = phi.target();
    for b in b_alg.basis() {
        if a_alg.residual(b) > 1e-8 {
            return Err(AmalgamError::Structural("target not contained in source".into()));
        }
    }
    let trace = canonical_trace(b_alg)?;
    let mut checks = Vec::new();

    let mut idem: f64 = 0.0;
    for a in a_alg.basis() {
        let once = phi.apply(a);
        idem = idem.max((phi.apply(&once) - &once).norm());
    }
    for b in b_alg.basis() {
        idem = idem.max((phi.apply(b) - b).norm());
    }
    checks.push(below("idempotent_onto_target", idem, tol));

    let range_rank = crate::linalg::rank(phi.map(), 1e-10);
    checks.push(below("range_equals_target", (b_alg.dim() - range_rank) as f64, 0.5));

    let mut bimod: f64 = 0.0;
    for b1 in b_alg.basis() {
        for a in a_alg.basis() {
            for b2 in b_alg.basis() {
                let lhs = phi.apply(&(b1 * a * b2));
                let rhs = b1 * phi.apply(a) * b2;
                bimod = bimod.max((lhs - rhs).norm());
            }
        }
    }
    checks.push(below("bimodular", bimod, tol));

    let unit = a_alg.unit();
    checks.push(below("unital", (phi.apply(&unit) - &unit).norm(), tol));

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut neg: f64 = 0.0;
    let mut contr: f64 = 0.0;
    let n = a_alg.ambient_dim();
    for _ in 0..8 {
        let a = a_alg.element(&random_matrix(&mut rng, a_alg.dim(), 1).column(0).into_owned());
        let img = phi.apply(&(a.adjoint() * &a));
        neg = neg.max(-min_eigenvalue(&img)).max(0.0);
        contr = contr.max(op_norm(&phi.apply(&a)) - op_norm(&a)).max(0.0);
        // 2x2 amplification: X in M_2(A), (φ ⊗ id)(X* X) must be positive.
        let entries: Vec<CMat> = (0..4)
            .map(|_| a_alg.element(&random_matrix(&mut rng, a_alg.dim(), 1).column(0).into_owned()))
            .collect();
        let mut x = CMat::zeros(2 * n, 2 * n);
        for (k, e) in entries.iter().enumerate() {
            let (r, c) = (k / 2, k % 2);
            x.view_mut((r * n, c * n), (n, n)).copy_from(e);
        }
        let xx = x.adjoint() * &x;
        let mut amp = CMat::zeros(2 * n, 2 * n);
        for r in 0..2 {
            for c in 0..2 {
                let block = xx.view((r * n, c * n), (n, n)).into_owned();
                amp.view_mut((r * n, c * n), (n, n)).copy_from(&phi.apply(&block));
            }
        }
        neg = neg.max(-min_eigenvalue(&amp)).max(0.0);
    }
    checks.push(below("positive", neg, tol));
    checks.push(below("contractive", contr, tol));

    let d = a_alg.dim();
    let mut gram = CMat::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let v = phi.apply(&(a_alg.basis()[i].adjoint() * &a_alg.basis()[j]));
            gram[(i, j)] = trace.eval(&v);
        }
    }
    let smallest = min_eigenvalue(&gram);
    checks.push(CheckResult {
        name: "faithful".into(),
        measured: smallest,
        threshold: tol,
        pass: smallest > tol,
    });

    let pass = checks.iter().all(|c| c.pass);
    Ok(ValidationReport { checks, pass })
}

/// Matrix units `E_ij` of `M_n`.
pub fn matrix_unit(n: usize, i: usize, j: usize) -> CMat {
    let mut m = CMat::zeros(n, n);
    m[(i, j)] = re(1.0);
    m
}

pub fn diagonal(entries: &[f64]) -> CMat {
    CMat::from_diagonal(&CVec::from_iterator(entries.len(), entries.iter().map(|&x| re(x))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn full_m2() -> Arc<StarAlgebra> {
        Arc::new(StarAlgebra::generate(&[matrix_unit(2, 0, 0), matrix_unit(2, 0, 1)]).unwrap())
    }

    fn diag2() -> Arc<StarAlgebra> {
        Arc::new(StarAlgebra::generate(&[diagonal(&[1.0, 0.0]), diagonal(&[0.0, 1.0])]).unwrap())
    }

    /// Brute-force closure oracle: keep multiplying every pair of spanning
    /// matrices (and adjoints) until the rank stops growing.
    fn brute_closure_dim(gens: &[CMat]) -> usize {
        let n = gens[0].nrows();
        let mut set: Vec<CMat> = vec![identity(n)];
        set.extend(gens.iter().cloned());
        set.extend(gens.iter().map(|g| g.adjoint()));
        let rank_of = |s: &[CMat]| {
            let mut m = CMat::zeros(n * n, s.len());
            for (j, x) in s.iter().enumerate() {
                m.set_column(j, &vectorize(x));
            }
            crate::linalg::rank(&m, 1e-10)
        };
        let mut r = rank_of(&set);
        loop {
            let snapshot = set.clone();
            for a in &snapshot {
                for b in &snapshot {
                    set.push(a * b);
                }
            }
            let r2 = rank_of(&set);
            if r2 == r {
                return r;
            }
            r = r2;
        }
    }

    #[test]
    fn scalars_generate_dimension_one() {
        let a = StarAlgebra::generate(&[identity(2)]).unwrap();
        assert_eq!(a.dim(), 1);
    }

    #[test]
    fn two_matrix_units_generate_full_algebra() {
        let gens = [matrix_unit(2, 0, 0), matrix_unit(2, 0, 1)];
        let oracle = brute_closure_dim(&gens);
        assert_eq!(oracle, 4);
        assert_eq!(StarAlgebra::generate(&gens).unwrap().dim(), oracle);
    }

    #[test]
    fn diagonal_algebra_is_already_closed() {
        let a = diag2();
        assert_eq!(a.dim(), 2);
        assert_eq!(a.basis_rank(), 2);
        assert!(a.closure_residual() < 1e-10);
    }

    #[test]
    fn closure_matches_brute_force_on_random_generator() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = random_matrix(&mut rng, 3, 3);
        let alg = StarAlgebra::generate(std::slice::from_ref(&g)).unwrap();
        assert_eq!(alg.dim(), brute_closure_dim(&[g]));
        assert!(alg.closure_residual() < 1e-10);
    }

    #[test]
    fn mismatched_generators_are_rejected() {
        let err = StarAlgebra::generate(&[identity(2), identity(3)]).unwrap_err();
        assert!(matches!(err, AmalgamError::Dimension(_)));
        let err = StarAlgebra::generate(&[CMat::zeros(2, 3)]).unwrap_err();
        assert!(matches!(err, AmalgamError::Dimension(_)));
    }

    #[test]
    fn trace_on_scalars_diagonal_and_full() {
        let c = StarAlgebra::generate(&[identity(2)]).unwrap();
        let t = canonical_trace(&c).unwrap();
        assert!((t.eval(&(identity(2) * re(3.0))) - re(3.0)).norm() < 1e-12);

        let d = diag2();
        let t = canonical_trace(&d).unwrap();
        assert_eq!(t.num_blocks(), 2);
        assert!((t.eval(&diagonal(&[2.0, 6.0])) - re(4.0)).norm() < 1e-12);

        let m = full_m2();
        let t = canonical_trace(&m).unwrap();
        assert_eq!(t.num_blocks(), 1);
        let x = CMat::from_fn(2, 2, |i, j| C64::new((i + 2 * j) as f64, 1.0));
        assert!((t.eval(&x) - x.trace() / re(2.0)).norm() < 1e-12);
    }

    #[test]
    fn trace_is_tracial_and_faithful() {
        let m = full_m2();
        let t = canonical_trace(&m).unwrap();
        for a in m.basis() {
            for b in m.basis() {
                assert!((t.eval(&(a * b)) - t.eval(&(b * a))).norm() < 1e-10);
            }
            assert!(t.eval(&(a.adjoint() * a)).re > 1e-10);
        }
        assert!((t.eval(&m.unit()) - re(1.0)).norm() < 1e-12);
    }

    #[test]
    fn trace_expectation_on_m2_passes() {
        let phi = ConditionalExpectation::normalized_trace(full_m2()).unwrap();
        let rep = phi.validate(TOL_STRUCTURAL).unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn diagonal_expectation_on_m2_passes() {
        let phi = ConditionalExpectation::compression(
            full_m2(),
            diag2(),
            vec![matrix_unit(2, 0, 0), matrix_unit(2, 1, 1)],
        )
        .unwrap();
        let rep = phi.validate(TOL_STRUCTURAL).unwrap();
        assert!(rep.pass, "{rep:?}");
        // Direct bimodularity on matrix units.
        for i in 0..2 {
            for j in 0..2 {
                let e = matrix_unit(2, i, j);
                let d1 = diagonal(&[2.0, -1.0]);
                let d2 = diagonal(&[0.5, 3.0]);
                let lhs = phi.apply(&(&d1 * &e * &d2));
                let rhs = &d1 * phi.apply(&e) * &d2;
                assert!((lhs - rhs).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn first_coordinate_expectation_fails_faithfulness() {
        let c2 = diag2();
        let scalars = Arc::new(StarAlgebra::generate(&[identity(2)]).unwrap());
        let phi = ConditionalExpectation::from_fn(c2, scalars, |a| identity(2) * a[(0, 0)]).unwrap();
        // a = (0, 1) has φ(a* a) = 0.
        let a = diagonal(&[0.0, 1.0]);
        assert!(phi.apply(&(a.adjoint() * &a)).norm() < 1e-14);
        let rep = phi.validate(TOL_STRUCTURAL).unwrap();
        assert!(!rep.pass);
        assert!(!rep.check("faithful").unwrap().pass);
        assert!(rep.check("bimodular").unwrap().pass);
        assert!(rep.check("positive").unwrap().pass);
    }

    #[test]
    fn target_outside_source_is_structural_error() {
        let d = diag2();
        let m = full_m2();
        let err = ConditionalExpectation::from_fn(d, m, |a| a.clone()).unwrap_err();
        assert!(matches!(err, AmalgamError::Structural(_)));
    }

    #[test]
    fn non_star_closed_span_has_no_trace() {
        let upper = StarAlgebra {
            ambient_dim: 2,
            basis: vec![identity(2) * re(1.0 / 2f64.sqrt()), matrix_unit(2, 0, 1)],
        };
        assert!(canonical_trace(&upper).is_err());
        assert!(StarAlgebra::from_spanning(&[identity(2), matrix_unit(2, 0, 1)]).is_err());
    }

    #[test]
    fn expectation_is_idempotent_and_contractive_on_random_elements() {
        let m = full_m2();
        let phi = ConditionalExpectation::compression(
            m.clone(),
            diag2(),
            vec![matrix_unit(2, 0, 0), matrix_unit(2, 1, 1)],
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let a = random_matrix(&mut rng, 2, 2);
            let once = phi.apply(&a);
            assert!((phi.apply(&once) - &once).norm() < 1e-10);
            assert!(op_norm(&once) <= op_norm(&a) + 1e-12);
        }
    }

    #[test]
    fn basis_products_stay_in_span() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let gens = [random_matrix(&mut rng, 4, 4) * diagonal(&[1.0, 1.0, 0.0, 0.0])];
        let alg = StarAlgebra::generate(&gens).unwrap();
        assert!(alg.closure_residual() < 1e-10);
    }
}
