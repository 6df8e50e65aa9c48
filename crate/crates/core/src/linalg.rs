//! Dense complex linear algebra helpers shared by every layer of the crate.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const MACHINE_EPS: f64 = f64::EPSILON;

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn zeros(r: usize, c: usize) -> CMat {
    CMat::zeros(r, c)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Kronecker product of a column vector with the identity, i.e. the matrix of
/// `z -> v ⊗ z`.
pub fn kron_vec_identity(v: &CVec, n: usize) -> CMat {
    let vm = CMat::from_column_slice(v.len(), 1, v.as_slice());
    vm.kronecker(&identity(n))
}

/// Frobenius (Hilbert–Schmidt) inner product `tr(a* b)`.
pub fn hs_inner(a: &CMat, b: &CMat) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Largest singular value, from the top eigenvalue of the smaller Gram
/// matrix. Empty matrices have norm zero.
pub fn op_norm(m: &CMat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    let gram = if m.nrows() < m.ncols() { m * m.adjoint() } else { m.adjoint() * m };
    hermitian_eigen(&gram).0[0].max(0.0).sqrt()
}

/// Eigen-decomposition of the Hermitian part of `m`, eigenvalues sorted in
/// decreasing order with matching eigenvector columns. Cyclic Jacobi
/// rotations keep the reconstruction error at a few ulps of `‖m‖`, also for
/// the clustered spectra produced by Gram matrices.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), zeros(0, 0));
    }
    let mut a = (m + m.adjoint()) * re(0.5);
    let mut v = identity(n);
    let scale = a.norm().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= 1e-17 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let g = a[(p, q)];
                let gabs = g.norm();
                if gabs <= 1e-300 {
                    continue;
                }
                let phase = g / gabs;
                let tau = (a[(q, q)].re - a[(p, p)].re) / (2.0 * gabs);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // Columns p, q of the unitary: (c, -s·conj(phase)) and
                // (s, c·conj(phase)).
                let u_pp = re(c);
                let u_qp = -phase.conj() * s;
                let u_pq = re(s);
                let u_qq = phase.conj() * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * u_pp + akq * u_qp;
                    a[(k, q)] = akp * u_pq + akq * u_qq;
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * u_pp + vkq * u_qp;
                    v[(k, q)] = vkp * u_pq + vkq * u_qq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = u_pp.conj() * apk + u_qp.conj() * aqk;
                    a[(q, k)] = u_pq.conj() * apk + u_qq.conj() * aqk;
                }
                a[(p, q)] = re(0.0);
                a[(q, p)] = re(0.0);
                a[(p, p)] = re(a[(p, p)].re);
                a[(q, q)] = re(a[(q, q)].re);
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.partial_cmp(&a[(i, i)].re).unwrap());
    let vals = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vecs = zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vecs.set_column(col, &v.column(i));
    }
    (vals, vecs)
}

/// Smallest eigenvalue of the Hermitian part; `+inf` for an empty matrix.
pub fn min_eigenvalue(m: &CMat) -> f64 {
    hermitian_eigen(m).0.last().cloned().unwrap_or(f64::INFINITY)
}

/// Orthonormal basis of the null space of `m`, via the eigenvectors of `m* m`
/// whose eigenvalue is below `tol²`.
pub fn null_space(m: &CMat, tol: f64) -> CMat {
    let gram = m.adjoint() * m;
    let (vals, vecs) = hermitian_eigen(&gram);
    let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] <= tol * tol).collect();
    let mut out = zeros(m.ncols(), keep.len());
    for (c, &i) in keep.iter().enumerate() {
        out.set_column(c, &vecs.column(i));
    }
    out
}

/// Numerical rank from the singular values, relative to the largest one.
pub fn rank(m: &CMat, rel_tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let top = sv.iter().cloned().fold(0.0, f64::max);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * top).count()
}

/// Columns of `m` with indices in `cols`.
pub fn select_columns(m: &CMat, cols: &[usize]) -> CMat {
    let mut out = zeros(m.nrows(), cols.len());
    for (c, &i) in cols.iter().enumerate() {
        out.set_column(c, &m.column(i));
    }
    out
}

pub fn random_matrix<R: Rng>(rng: &mut R, r: usize, c: usize) -> CMat {
    CMat::from_fn(r, c, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

pub fn random_vector<R: Rng>(rng: &mut R, n: usize) -> CVec {
    CVec::from_fn(n, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

/// An orthonormal family built by twice-iterated modified Gram–Schmidt.
#[derive(Clone, Debug)]
pub struct OrthoBasis {
    len: usize,
    vecs: Vec<CVec>,
}

impl OrthoBasis {
    pub fn new(len: usize) -> Self {
        Self { len, vecs: Vec::new() }
    }

    pub fn ambient_len(&self) -> usize {
        self.len
    }

    pub fn dim(&self) -> usize {
        self.vecs.len()
    }

    pub fn vectors(&self) -> &[CVec] {
        &self.vecs
    }

    fn reduce(&self, v: &CVec) -> CVec {
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &self.vecs {
                let c = b.dotc(&w);
                w.axpy(-c, b, C64::new(1.0, 0.0));
            }
        }
        w
    }

    /// Norm of the component of `v` orthogonal to the span.
    pub fn residual(&self, v: &CVec) -> f64 {
        self.reduce(v).norm()
    }

    /// Orthogonal projection of `v` onto the span.
    pub fn project(&self, v: &CVec) -> CVec {
        v - self.reduce(v)
    }

    /// Adds `v` when its orthogonal residual exceeds `tol * max(1, |v|)`.
    pub fn try_push(&mut self, v: &CVec, tol: f64) -> bool {
        assert_eq!(v.len(), self.len, "vector length mismatch");
        let w = self.reduce(v);
        let n = w.norm();
        if n > tol * v.norm().max(1.0) {
            self.vecs.push(w / re(n));
            true
        } else {
            false
        }
    }
}

pub fn vectorize(m: &CMat) -> CVec {
    CVec::from_column_slice(m.as_slice())
}

pub fn unvectorize(v: &CVec, r: usize, c: usize) -> CMat {
    CMat::from_column_slice(r, c, v.as_slice())
}
