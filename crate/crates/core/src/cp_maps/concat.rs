//! Concatenation isomorphisms `S(s) ⊗_B S(t) -> S(st)` between sectors.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{AmalgamError, Result};
use crate::fock::{is_alternating, FockSpace, Word};
use crate::linalg::{identity, kron, CMat};

/// Matrix of `x ⊗ y -> xy` on Kronecker span coordinates (`x` outer) and a
/// right inverse of it.
#[derive(Clone, Debug)]
pub struct CatPair {
    pub cat: CMat,
    pub cat_pinv: CMat,
}

/// Memoized concatenation maps of one Fock space.
#[derive(Debug)]
pub struct Concatenator {
    fock: Arc<FockSpace>,
    cache: HashMap<(Word, Word), Arc<CatPair>>,
}

impl Concatenator {
    pub fn new(fock: &Arc<FockSpace>) -> Self {
        Self { fock: fock.clone(), cache: HashMap::new() }
    }

    pub fn fock(&self) -> &Arc<FockSpace> {
        &self.fock
    }

    pub fn get(&mut self, s: &[usize], t: &[usize]) -> Result<Arc<CatPair>> {
        let key = (s.to_vec(), t.to_vec());
        if let Some(p) = self.cache.get(&key) {
            return Ok(p.clone());
        }
        let cat = self.build(s, t)?;
        let cat_pinv = right_inverse(&cat)?;
        let pair = Arc::new(CatPair { cat, cat_pinv });
        self.cache.insert(key, pair.clone());
        Ok(pair)
    }

    pub fn cat(&mut self, s: &[usize], t: &[usize]) -> Result<CMat> {
        Ok(self.get(s, t)?.cat.clone())
    }

    fn build(&mut self, s: &[usize], t: &[usize]) -> Result<CMat> {
        let mut st = s.to_vec();
        st.extend_from_slice(t);
        if !is_alternating(&st) {
            return Err(AmalgamError::Structural(format!("{s:?}{t:?} is not alternating")));
        }
        let fock = self.fock.clone();
        let target = fock.sector(&st).ok_or(AmalgamError::Cap { word_len: st.len(), cap: fock.cap() })?;
        let base = fock.base_module();
        let db = base.module.dim();
        if t.is_empty() {
            let src = fock.sector(s).expect("prefix sector");
            let ds = src.dim();
            let mut out = CMat::zeros(target.dim(), ds * db);
            for beta in 0..db {
                let r = src.module.right_from_coords(&base.j_pinv.column(beta).into_owned());
                for a in 0..ds {
                    out.set_column(a * db + beta, &r.column(a));
                }
            }
            return Ok(out);
        }
        if s.is_empty() {
            let dt = target.dim();
            let mut out = CMat::zeros(dt, db * dt);
            for beta in 0..db {
                let l = target.module.left_b_from_coords(&base.j_pinv.column(beta).into_owned())?;
                out.view_mut((0, beta * dt), (dt, dt)).copy_from(&l);
            }
            return Ok(out);
        }
        if s.len() == 1 {
            return Ok(target.j.clone());
        }
        let head = fock.sector(s).expect("prefix sector");
        let de = fock.factors()[s[0]].complement.dim();
        let dt = fock.sector(t).expect("suffix sector").dim();
        let inner = self.cat(&s[1..], t)?;
        Ok(&target.j * kron(&identity(de), &inner) * kron(&head.j_pinv, &identity(dt)))
    }
}

/// `m* (m m*)^{-1}` for a matrix of full row rank.
pub fn right_inverse(m: &CMat) -> Result<CMat> {
    let g = m * m.adjoint();
    let inv = g
        .cholesky()
        .map(|c| c.inverse())
        .ok_or_else(|| AmalgamError::Structural("map does not have full row rank".into()))?;
    Ok(m.adjoint() * inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::example;
    use crate::module::internal_tensor;

    #[test]
    fn concatenation_is_unitary_from_the_tensor_module() {
        for name in ["m2diag", "s3a3"] {
            let fock = example(name).unwrap().fock(4).unwrap();
            let mut c = Concatenator::new(&fock);
            for (s, t) in [(vec![], vec![0, 1]), (vec![1], vec![]), (vec![0], vec![1, 0]), (vec![1, 0], vec![1]), (vec![0, 1, 0], vec![])] {
                let ms = &fock.sector(&s).unwrap().module;
                let mt = &fock.sector(&t).unwrap().module;
                let q = internal_tensor(ms, mt).unwrap();
                let pair = c.get(&s, &t).unwrap();
                let u = &q.j * &pair.cat_pinv;
                let n = u.ncols();
                assert_eq!(u.nrows(), n, "{name} {s:?} {t:?}");
                assert!((u.adjoint() * &u - identity(n)).norm() < 1e-10, "{name} {s:?} {t:?}");
                // null vectors of the tensor module go to zero
                let lost = &pair.cat * (identity(q.j_pinv.nrows()) - &q.j_pinv * &q.j);
                assert!(lost.norm() < 1e-10, "{name} {s:?} {t:?}");
            }
        }
    }

    #[test]
    fn associativity_of_concatenation() {
        let fock = example("m2diag").unwrap().fock(4).unwrap();
        let mut c = Concatenator::new(&fock);
        let (r, s, t) = (vec![0], vec![1, 0], vec![1]);
        let d = |w: &[usize]| fock.sector(w).unwrap().dim();
        let left = c.cat(&[0, 1, 0], &t).unwrap() * kron(&c.cat(&r, &s).unwrap(), &identity(d(&t)));
        let right = c.cat(&r, &[1, 0, 1]).unwrap() * kron(&identity(d(&r)), &c.cat(&s, &t).unwrap());
        assert!((left - right).norm() < 1e-10);
    }

    #[test]
    fn non_alternating_concatenation_is_refused() {
        let fock = example("dinfty").unwrap().fock(3).unwrap();
        let mut c = Concatenator::new(&fock);
        assert!(matches!(c.get(&[0], &[0]), Err(AmalgamError::Structural(_))));
        assert!(matches!(c.get(&[0, 1], &[0, 1]), Err(AmalgamError::Cap { .. })));
    }
}
