//! Compressions `Φ_k` of the Fock representation to `E(→k)`, the recovery
//! maps `Θ_{p,k}` and `Ψ_k`, sector-length diagonals, the explicit expansion
//! of `Φ_k` on reduced words and the spans `D_p`.

pub mod concat;
pub mod expansion;
pub mod recovery;
pub mod spans;

use crate::error::{AmalgamError, Result};
use crate::fock::{BlockOperator, FockSpace};
use crate::linalg::{vectorize, CMat, OrthoBasis};

pub use concat::{CatPair, Concatenator};
pub use expansion::{expand_phi_k_scalar, expand_phi_k_word, explicit_phi_k_scalar, explicit_phi_k_word, Expansion, ExpansionTerm, TermKind};
pub use spans::{
    build_dp_span, build_hat_algebra, build_lr_factorization, compact_span, union_span, DpSpan, HatAlgebra, LrFactorization,
};
pub use recovery::{
    convergence_row, psi_k, rn_multiplier, rn_multiplier_as_printed, rn_value, sup_abs_rn, theta_pk,
    verify_sector_identity, ConvergenceRow, RecoveryMap, SectorIdentity,
};

/// An operator on `E(→k)`, stored on the prefix of the carrier of the Fock
/// space it was compressed from.
#[derive(Clone, Debug)]
pub struct CompressedOperator {
    pub k: usize,
    pub matrix: CMat,
    pub band_up: usize,
    pub band_down: usize,
}

impl CompressedOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// `Φ_k(x) = P(→k) x P(→k)`. Requires `x` to be exact on words of length
/// at most `k`.
pub fn compress_phi_k(x: &BlockOperator, k: usize) -> Result<CompressedOperator> {
    let fock = x.fock();
    if k > fock.cap() {
        return Err(AmalgamError::Parameter(format!("k = {k} exceeds the cap {}", fock.cap())));
    }
    if x.exact_upto < k as isize {
        return Err(AmalgamError::Truncation(format!(
            "operator is exact only up to length {}, compression to k = {k} needs more",
            x.exact_upto
        )));
    }
    let n = fock.prefix_dim(k);
    Ok(CompressedOperator {
        k,
        matrix: x.matrix.view((0, 0), (n, n)).into_owned(),
        band_up: x.band_up,
        band_down: x.band_down,
    })
}

/// `S_d(x) = Σ_n P_(n+d) x P_(n)`.
pub fn diagonal_part(x: &BlockOperator, d: isize) -> BlockOperator {
    let fock = x.fock();
    let mut m = CMat::zeros(fock.dim(), fock.dim());
    for to in fock.sectors() {
        for from in fock.sectors() {
            if to.len() as isize - from.len() as isize == d {
                let block = x.matrix.view((to.offset, from.offset), (to.dim(), from.dim()));
                m.view_mut((to.offset, from.offset), (to.dim(), from.dim())).copy_from(&block);
            }
        }
    }
    let mut out = x.clone();
    out.matrix = m;
    out.band_up = d.max(0) as usize;
    out.band_down = (-d).max(0) as usize;
    out
}

/// Orthogonal projection residual `‖x - proj(x)‖_HS` onto a span of
/// vectorized operators. An empty span gives `‖x‖`.
pub fn span_membership(x: &CMat, span: &OrthoBasis) -> f64 {
    span.residual(&vectorize(x))
}

/// Carrier columns of the words of length at most `n`.
pub fn certified_columns(fock: &FockSpace, n: isize) -> usize {
    if n < 0 {
        0
    } else {
        fock.prefix_dim(n as usize)
    }
}
