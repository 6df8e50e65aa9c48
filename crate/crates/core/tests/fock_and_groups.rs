use amalgam_core::cp_maps::compress_phi_k;
use amalgam_core::examples::{example, EXAMPLE_NAMES};
use amalgam_core::fock::{freeness_check, words_of_length, ReducedWord};
use amalgam_core::group::{compare_moments, path_graph_closed_form, path_graph_spectral_radius};
use amalgam_core::linalg::op_norm;

#[test]
fn centered_words_have_vanishing_moments() {
    for name in EXAMPLE_NAMES {
        let ex = example(name).unwrap();
        let fock = ex.fock(4).unwrap();
        for n in 1..=4 {
            for idx in words_of_length(2, n) {
                let w = ReducedWord::new(idx.iter().map(|&i| (i, ex.centered[i].last().unwrap().clone())).collect());
                let r = freeness_check(&fock, &w, 1e-10).unwrap();
                assert!(r.moment < 1e-10, "{name} {idx:?}: {}", r.moment);
                assert!(r.tensor_residual < 1e-10, "{name} {idx:?}");
            }
        }
    }
}

#[test]
fn group_moments_match_normal_forms() {
    for name in ["dinfty", "s3a3"] {
        let ex = example(name).unwrap();
        let am = ex.amalgam.clone().unwrap();
        let fock = ex.fock(4).unwrap();
        let outside: Vec<usize> = (0..am.groups[0].order()).filter(|g| !am.subgroups[0].contains(g)).collect();
        for idx in words_of_length(2, 4) {
            for &g in &outside {
                let word: Vec<(usize, usize)> = idx.iter().map(|&i| (i, g)).collect();
                assert!(compare_moments(&fock, &am, &word).unwrap() < 1e-10, "{name} {word:?}");
            }
        }
    }
}

#[test]
fn dihedral_compression_is_a_path_graph() {
    let ex = example("dinfty").unwrap();
    let k = 10;
    let fock = ex.fock(k + 1).unwrap();
    let u = ex.unitaries[0].clone().unwrap();
    let sum = fock.lambda(0, &u).unwrap().add(&fock.lambda(1, &u).unwrap()).unwrap();
    let norm = op_norm(&compress_phi_k(&sum, k).unwrap().matrix);
    assert!((norm - path_graph_closed_form(2 * k + 1)).abs() < 1e-8);
    assert!((norm - path_graph_spectral_radius(2 * k + 1)).abs() < 1e-8);
}
