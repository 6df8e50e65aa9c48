//! Built-in families used by the harness and the tests.

use std::sync::Arc;

use serde::Deserialize;

use crate::algebra::{diagonal, matrix_unit, ConditionalExpectation, StarAlgebra};
use crate::error::{AmalgamError, Result};
use crate::fock::FockSpace;
use crate::group::{Amalgam, FiniteGroup, GroupJson};
use crate::linalg::CMat;
use crate::module::{BaseAlgebra, Factor};

pub const EXAMPLE_NAMES: [&str; 3] = ["dinfty", "m2diag", "s3a3"];

#[derive(Clone, Debug)]
pub struct Example {
    pub name: String,
    pub base: Arc<BaseAlgebra>,
    pub factors: Vec<Factor>,
    /// Per factor, a basis of the centered elements `ker φ_ι`.
    pub centered: Vec<Vec<CMat>>,
    /// Per factor, a distinguished self-adjoint unitary, when there is one.
    pub unitaries: Vec<Option<CMat>>,
    pub amalgam: Option<Amalgam>,
}

impl Example {
    pub fn fock(&self, cap: usize) -> Result<Arc<FockSpace>> {
        Ok(Arc::new(FockSpace::new(self.base.clone(), self.factors.clone(), cap)?))
    }
}

pub fn example(name: &str) -> Result<Example> {
    match name {
        "dinfty" => dinfty(),
        "m2diag" => m2diag(),
        "s3a3" => s3a3(),
        other => Err(AmalgamError::UnknownExample(other.to_string())),
    }
}

/// Basis of the kernel of `φ` inside the factor algebra.
pub fn centered_basis(factor: &Factor) -> Vec<CMat> {
    let alg = factor.algebra();
    let mut out = Vec::new();
    let mut span = crate::linalg::OrthoBasis::new(alg.ambient_dim() * alg.ambient_dim());
    for a in alg.basis() {
        let phi = factor.embed(&factor.phi_coords(a));
        let c = a - phi;
        if span.try_push(&crate::linalg::vectorize(&c), 1e-10) {
            out.push(c);
        }
    }
    out
}

/// Two finite groups, each carrying the index list of its copy of the common
/// subgroup, matched position by position.
#[derive(Clone, Debug, Deserialize)]
pub struct AmalgamJson {
    #[serde(default)]
    pub name: Option<String>,
    pub groups: [GroupJson; 2],
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ExampleJson {
    Amalgam(AmalgamJson),
    Doubled(GroupJson),
}

/// Either an [`AmalgamJson`] or a single group with its subgroup, which is
/// amalgamated with a copy of itself.
pub fn from_json_str(text: &str) -> Result<Example> {
    let parsed: ExampleJson = serde_json::from_str(text).map_err(|e| AmalgamError::Parse(e.to_string()))?;
    let desc = match parsed {
        ExampleJson::Amalgam(a) => a,
        ExampleJson::Doubled(g) => AmalgamJson { name: None, groups: [g.clone(), g] },
    };
    let groups = [FiniteGroup::from_json(&desc.groups[0])?, FiniteGroup::from_json(&desc.groups[1])?];
    let subgroups = [desc.groups[0].subgroup.clone(), desc.groups[1].subgroup.clone()];
    let am = Amalgam::new(groups, subgroups)?;
    from_amalgam(desc.name.as_deref().unwrap_or("custom"), am)
}

/// The group algebra amalgam, with an involution outside the subgroup as the
/// distinguished unitary of each factor when one exists.
pub fn from_amalgam(name: &str, am: Amalgam) -> Result<Example> {
    let (base, factors) = am.factors()?;
    let unitaries = (0..2)
        .map(|f| {
            let g = &am.groups[f];
            (0..g.order())
                .find(|&x| !am.subgroups[f].contains(&x) && g.mul(x, x) == g.identity())
                .map(|x| g.regular(x))
        })
        .collect();
    from_factors(name, base, factors, unitaries, Some(am))
}

fn from_factors(name: &str, base: Arc<StarAlgebra>, factors: Vec<Factor>, unitaries: Vec<Option<CMat>>, amalgam: Option<Amalgam>) -> Result<Example> {
    let centered = factors.iter().map(centered_basis).collect();
    Ok(Example {
        name: name.to_string(),
        base: Arc::new(BaseAlgebra::new(base)?),
        factors,
        centered,
        unitaries,
        amalgam,
    })
}

/// `C[Z_2] * C[Z_2]` over `C`, i.e. the group algebra of the infinite dihedral
/// group.
pub fn dinfty() -> Result<Example> {
    let am = Amalgam::doubled(FiniteGroup::cyclic(2), vec![0])?;
    let (base, factors) = am.factors()?;
    let u = am.groups[0].regular(1);
    from_factors("dinfty", base, factors, vec![Some(u.clone()), Some(u)], Some(am))
}

/// Two copies of `M_2` amalgamated over the diagonal, each with the diagonal
/// compression.
pub fn m2diag() -> Result<Example> {
    let d = Arc::new(StarAlgebra::generate(&[diagonal(&[1.0, 0.0])])?);
    let m2 = Arc::new(StarAlgebra::generate(&[matrix_unit(2, 0, 1)])?);
    let phi = ConditionalExpectation::compression(
        m2,
        d.clone(),
        vec![matrix_unit(2, 0, 0), matrix_unit(2, 1, 1)],
    )?;
    let f = Factor::same_ambient(phi)?;
    let u = matrix_unit(2, 0, 1) + matrix_unit(2, 1, 0);
    from_factors("m2diag", d, vec![f.clone(), f], vec![Some(u.clone()), Some(u)], None)
}

/// `C[S_3] *_{C[A_3]} C[S_3]` with the subgroup expectations.
pub fn s3a3() -> Result<Example> {
    let am = Amalgam::doubled(FiniteGroup::symmetric3(), vec![0, 3, 4])?;
    let (base, factors) = am.factors()?;
    let t = am.groups[0].regular(1);
    from_factors("s3a3", base, factors, vec![Some(t.clone()), Some(t)], Some(am))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::TOL_STRUCTURAL;

    #[test]
    fn all_examples_build_and_validate() {
        for name in EXAMPLE_NAMES {
            let ex = example(name).unwrap();
            for f in &ex.factors {
                assert!(f.expectation().validate(TOL_STRUCTURAL).unwrap().pass, "{name}");
            }
            let fock = ex.fock(2).unwrap();
            for s in fock.sectors() {
                let rep = s.module.validate(1e-10);
                assert!(rep.pass, "{name} {:?} {:?}", s.word, rep.checks.iter().filter(|c| !c.pass).collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn centered_bases_have_expected_size() {
        assert_eq!(example("dinfty").unwrap().centered[0].len(), 1);
        assert_eq!(example("m2diag").unwrap().centered[0].len(), 2);
        assert_eq!(example("s3a3").unwrap().centered[1].len(), 3);
    }

    #[test]
    fn unknown_name_is_reported() {
        assert_eq!(example("nope").unwrap_err(), AmalgamError::UnknownExample("nope".into()));
    }

    #[test]
    fn json_description_matches_the_builtin() {
        let text = r#"{"name": "z2z2", "groups": [
            {"order": 2, "table": [[0, 1], [1, 0]], "subgroup": [0]},
            {"order": 2, "table": [[0, 1], [1, 0]], "subgroup": [0]}]}"#;
        let ex = from_json_str(text).unwrap();
        let builtin = dinfty().unwrap();
        assert_eq!(ex.name, "z2z2");
        assert_eq!(ex.unitaries, builtin.unitaries);
        assert_eq!(ex.fock(3).unwrap().dim(), builtin.fock(3).unwrap().dim());
        assert!(matches!(from_json_str("{"), Err(AmalgamError::Parse(_))));
        let single = from_json_str(r#"{"order": 2, "table": [[0, 1], [1, 0]], "subgroup": [0]}"#).unwrap();
        assert_eq!(single.unitaries, builtin.unitaries);
        let bad = text.replace(r#""subgroup": [0]}]"#, r#""subgroup": [0, 1]}]"#);
        assert!(from_json_str(&bad).is_err());
    }
}
