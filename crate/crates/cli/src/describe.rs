//! Serialized description of an example and its truncated Fock module.

use amalgam_core::examples::Example;
use amalgam_core::fock::FockSpace;
use amalgam_core::json::{matrix_to_json, MatrixJson};
use serde::Serialize;

#[derive(Serialize)]
pub struct AlgebraDescription {
    pub dim: usize,
    pub ambient_dim: usize,
    pub basis: Vec<MatrixJson>,
}

#[derive(Serialize)]
pub struct FactorDescription {
    pub algebra: AlgebraDescription,
    /// `φ` applied to each basis element of the algebra.
    pub expectation: Vec<MatrixJson>,
    pub centered: Vec<MatrixJson>,
    pub gns_dim: usize,
    pub complement_dim: usize,
}

#[derive(Serialize)]
pub struct SectorDescription {
    pub word: Vec<usize>,
    pub offset: usize,
    pub dim: usize,
}

#[derive(Serialize)]
pub struct ExampleDescription {
    pub name: String,
    pub cap: usize,
    pub base: AlgebraDescription,
    pub factors: Vec<FactorDescription>,
    pub carrier_dim: usize,
    pub sectors: Vec<SectorDescription>,
}

fn algebra(a: &amalgam_core::algebra::StarAlgebra) -> AlgebraDescription {
    AlgebraDescription {
        dim: a.basis().len(),
        ambient_dim: a.ambient_dim(),
        basis: a.basis().iter().map(matrix_to_json).collect(),
    }
}

pub fn describe(ex: &Example, fock: &FockSpace) -> ExampleDescription {
    let factors = fock
        .factors()
        .iter()
        .zip(&ex.centered)
        .map(|(fs, centered)| {
            let phi = fs.factor.expectation();
            FactorDescription {
                algebra: algebra(fs.factor.algebra()),
                expectation: fs.factor.algebra().basis().iter().map(|a| matrix_to_json(&phi.apply(a))).collect(),
                centered: centered.iter().map(matrix_to_json).collect(),
                gns_dim: fs.module().dim(),
                complement_dim: fs.complement.dim(),
            }
        })
        .collect();
    ExampleDescription {
        name: ex.name.clone(),
        cap: fock.cap(),
        base: algebra(&ex.base.algebra),
        factors,
        carrier_dim: fock.dim(),
        sectors: fock
            .sectors()
            .iter()
            .map(|s| SectorDescription { word: s.word.clone(), offset: s.offset, dim: s.dim() })
            .collect(),
    }
}
