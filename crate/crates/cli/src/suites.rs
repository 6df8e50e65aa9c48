//! The verification suites run by `verify`, in their reporting order.

use std::sync::Arc;
use std::time::Instant;

use amalgam_core::cp_maps::{
    build_dp_span, build_hat_algebra, build_lr_factorization, compact_span, compress_phi_k, convergence_row,
    expand_phi_k_word, explicit_phi_k_scalar, explicit_phi_k_word, span_membership, union_span, verify_sector_identity,
    Concatenator, RecoveryMap, TermKind,
};
use amalgam_core::examples::Example;
use amalgam_core::fock::{elementary_tensor, lambda_word, words_of_length, BlockOperator, FockSpace, ReducedWord};
use amalgam_core::group::{path_graph_closed_form, path_graph_spectral_radius};
use amalgam_core::linalg::{op_norm, vectorize, CMat};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{PPolicy, RunConfig};
use crate::error::Result;
use crate::record::{ConvergenceCsvRow, VerificationRecord};

pub struct Context {
    pub config: RunConfig,
    pub example: Example,
    pub fock: Arc<FockSpace>,
}

impl Context {
    pub fn new(config: RunConfig) -> Result<Self> {
        config.validate()?;
        let example = config.load_example()?;
        let fock = example.fock(config.k_big)?;
        Ok(Context { config, example, fock })
    }

    fn name(&self) -> &str {
        &self.example.name
    }

    fn record(&self, suite: &str, word_id: impl Into<String>, measured: f64, tol: f64) -> VerificationRecord {
        VerificationRecord::below(suite, self.name(), word_id, measured, tol)
    }
}

/// Words of length `q` used by the word suites, each tagged with an id.
/// `u*` words alternate the distinguished unitaries and have norm one, `c*`
/// words use the first centered basis element of each factor.
pub fn test_words(ex: &Example, q: usize) -> Vec<(String, ReducedWord)> {
    if q == 0 {
        return vec![("q0".to_string(), ReducedWord::new(Vec::new()))];
    }
    let nf = ex.factors.len();
    let mut out = Vec::new();
    for start in 0..nf.min(2) {
        let idx: Vec<usize> = (0..q).map(|j| (start + j) % nf).collect();
        if idx.iter().all(|&i| ex.unitaries[i].is_some()) {
            let letters = idx.iter().map(|&i| (i, ex.unitaries[i].clone().unwrap())).collect();
            out.push((format!("u{start}q{q}"), ReducedWord::new(letters)));
        }
        if idx.iter().all(|&i| !ex.centered[i].is_empty()) {
            let letters = idx.iter().map(|&i| (i, ex.centered[i][0].clone())).collect();
            out.push((format!("c{start}q{q}"), ReducedWord::new(letters)));
        }
    }
    out
}

/// The unit-norm words of [`test_words`], falling back to centered letters
/// scaled to norm one when a factor has no distinguished unitary.
pub fn unit_words(ex: &Example, q: usize) -> Vec<(String, ReducedWord)> {
    let words = test_words(ex, q);
    let unitary: Vec<_> = words.iter().filter(|(id, _)| !id.starts_with('c')).cloned().collect();
    if !unitary.is_empty() {
        return unitary;
    }
    words
        .into_iter()
        .map(|(id, w)| {
            let letters = w.letters.into_iter().map(|(i, a)| {
                let n = op_norm(&a);
                (i, a.map(|x| x / n))
            });
            (id, ReducedWord::new(letters.collect()))
        })
        .collect()
}

pub fn algebra_suite(ctx: &Context) -> Result<Vec<VerificationRecord>> {
    let tol = ctx.config.tol_structural;
    let mut out = Vec::new();
    for (i, fs) in ctx.fock.factors().iter().enumerate() {
        let t = Instant::now();
        let reports = [
            ("expectation", fs.factor.expectation().validate(tol)?),
            ("gns", fs.module().validate(tol)),
            ("complement", fs.complement.validate(tol)),
        ];
        let secs = t.elapsed().as_secs_f64();
        for (what, report) in reports {
            for c in report.checks {
                let mut r = ctx.record("algebra", format!("factor{i}/{what}/{}", c.name), c.measured, c.threshold);
                r.pass = c.pass;
                out.push(r.timed(secs));
            }
        }
    }
    Ok(out)
}

/// Every alternating word of centered basis elements up to the configured
/// length: the vacuum moment, and the distance of `λ(w)Ω` from the
/// elementary tensor. One record per length.
pub fn freeness_suite(ctx: &Context) -> Result<Vec<VerificationRecord>> {
    let fock = &ctx.fock;
    let ex = &ctx.example;
    let lambdas: Vec<Vec<CMat>> = ex
        .centered
        .iter()
        .enumerate()
        .map(|(i, basis)| basis.iter().map(|a| Ok(fock.lambda(i, a)?.matrix)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let omega = fock.vacuum();
    let max_len = ctx.config.max_word_len.min(fock.cap());
    let mut out = Vec::new();
    for n in 1..=max_len {
        let t = Instant::now();
        let (mut moment, mut tensor, mut count) = (0.0f64, 0.0f64, 0usize);
        for idx in words_of_length(ex.factors.len(), n) {
            let radices: Vec<usize> = idx.iter().map(|&i| ex.centered[i].len()).collect();
            for choice in mixed_radix(&radices) {
                let mut v = omega.clone();
                for (pos, &i) in idx.iter().enumerate().rev() {
                    v = &lambdas[i][choice[pos]] * v;
                }
                let letters = idx.iter().zip(&choice).map(|(&i, &c)| (i, ex.centered[i][c].clone())).collect();
                let expected = elementary_tensor(fock, &ReducedWord::new(letters))?;
                moment = moment.max(fock.base().element(&fock.inner_coords(&omega, &v)).norm());
                tensor = tensor.max((v - expected).norm());
                count += 1;
            }
        }
        let secs = t.elapsed().as_secs_f64();
        let tol = ctx.config.tol_structural;
        let id = format!("len{n}/{count}words");
        out.push(ctx.record("freeness", id.clone(), moment, tol).with_kpq(None, None, Some(n)).timed(secs));
        out.push(ctx.record("elementary_tensor", id, tensor, tol).with_kpq(None, None, Some(n)).timed(secs));
    }
    Ok(out)
}

fn mixed_radix(radices: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &r in radices {
        out = out.into_iter().flat_map(|prefix| (0..r).map(move |c| [prefix.clone(), vec![c]].concat())).collect();
    }
    out
}

/// `V_{p,k}` for all `p < k`, and the factorization isometries `V_{p,ι}`
/// with their cross products.
pub fn isometry_suite(ctx: &Context) -> Result<Vec<VerificationRecord>> {
    let fock = &ctx.fock;
    let tol = ctx.config.tol_structural;
    let nf = fock.num_factors();
    let per_k: Vec<Result<Vec<VerificationRecord>>> = ctx
        .config
        .ks
        .par_iter()
        .map(|&k| {
            let mut cat = Concatenator::new(fock);
            let mut out = Vec::new();
            for p in 1..k {
                let t = Instant::now();
                let defect = RecoveryMap::new(fock, p, k, &mut cat)?.isometry_defect();
                let r = ctx.record("isometry_V_pk", "", defect, tol);
                out.push(r.with_kpq(Some(k), Some(p), None).timed(t.elapsed().as_secs_f64()));
            }
            for p in 1..=k {
                let t = Instant::now();
                let lrs = (0..nf).map(|i| build_lr_factorization(fock, p, i, k, &mut cat)).collect::<std::result::Result<Vec<_>, _>>()?;
                let mats: Vec<CMat> = lrs.iter().map(|v| v.matrix()).collect();
                let mut cross = 0.0f64;
                for a in 0..nf {
                    for b in 0..nf {
                        if a != b {
                            cross = cross.max(op_norm(&(mats[a].adjoint() * &mats[b])));
                        }
                    }
                }
                let secs = t.elapsed().as_secs_f64();
                for (i, v) in lrs.iter().enumerate() {
                    let r = ctx.record("isometry_V_p_iota", format!("iota{i}"), v.isometry_defect(), tol);
                    out.push(r.with_kpq(Some(k), Some(p), None).timed(secs));
                }
                out.push(ctx.record("isometry_cross", "", cross, tol).with_kpq(Some(k), Some(p), None).timed(secs));
            }
            Ok(out)
        })
        .collect();
    flatten(per_k)
}

/// `(y - Θ_{p,k}Φ_k(y))|E(n) = R_n y|E(n)` for the diagonals of the test
/// words, over every admissible `(p, k)`. One record per `(word, k, p)`
/// holding the worst `(d, n)`.
pub fn sector_identity_suite(ctx: &Context) -> Result<Vec<VerificationRecord>> {
    let fock = &ctx.fock;
    let tasks: Vec<(usize, String, ReducedWord)> = ctx
        .config
        .qs
        .iter()
        .filter(|&&q| q > 0)
        .flat_map(|&q| test_words(&ctx.example, q).into_iter().map(move |(id, w)| (q, id, w)))
        .collect();
    let per_word: Vec<Result<Vec<VerificationRecord>>> = tasks
        .par_iter()
        .map(|(q, id, w)| {
            let q = *q;
            let mut cat = Concatenator::new(fock);
            let mut out = Vec::new();
            for &k in &ctx.config.ks {
                for p in (2 * q + 1)..k.saturating_sub(2 * q) {
                    let t = Instant::now();
                    let res = verify_sector_identity(fock, w, p, k, &mut cat)?;
                    let worst = res.records.iter().max_by(|a, b| a.residual.total_cmp(&b.residual));
                    let mut r = ctx.record("sector_identity", id.clone(), res.max_residual, ctx.config.tol_identity);
                    r = r.with_kpq(Some(k), Some(p), Some(q));
                    if let Some(wr) = worst {
                        r.d = Some(wr.d);
                        r.n = Some(wr.n);
                    }
                    out.push(r.timed(t.elapsed().as_secs_f64()));
                }
            }
            Ok(out)
        })
        .collect();
    flatten(per_word)
}

/// The explicit formulas for `Φ_k` against direct compression, on the test
/// words for `k ∈ ks` with `q < k`, and on a basis of `B`.
pub fn expansion_suite(ctx: &Context) -> Result<Vec<VerificationRecord>> {
    let fock = &ctx.fock;
    let tol = ctx.config.tol_identity;
    let tasks: Vec<(usize, String, ReducedWord)> = ctx
        .config
        .qs
        .iter()
        .filter(|&&q| q > 0)
        .flat_map(|&q| test_words(&ctx.example, q).into_iter().map(move |(id, w)| (q, id, w)))
        .collect();
    let per_word: Vec<Result<Vec<VerificationRecord>>> = tasks
        .par_iter()
        .map(|(q, id, w)| {
            let q = *q;
            let mut cat = Concatenator::new(fock);
            let lw = lambda_word(fock, w)?;
            let mut out = Vec::new();
            for &k in ctx.config.ks.iter().filter(|&&k| k > q && k + q <= fock.cap()) {
                let t = Instant::now();
                let diff = explicit_phi_k_word(fock, w, k, &mut cat)?.matrix - compress_phi_k(&lw, k)?.matrix;
                let r = ctx.record("expansion_word", id.clone(), diff.norm(), tol);
                out.push(r.with_kpq(Some(k), None, Some(q)).timed(t.elapsed().as_secs_f64()));
            }
            Ok(out)
        })
        .collect();
    let mut out = flatten(per_word)?;
    let mut cat = Concatenator::new(fock);
    let base = &ctx.example.base;
    for (bi, b) in base.algebra.basis().iter().enumerate() {
        let lb = BlockOperator::from_parts(fock, fock.left_base(&base.coords(b))?, fock.cap() as isize, 0, 0, 0)?;
        for &k in &ctx.config.ks {
            let t = Instant::now();
            let diff = explicit_phi_k_scalar(fock, b, k, &mut cat)?.matrix - compress_phi_k(&lb, k)?.matrix;
            let r = ctx.record("expansion_scalar", format!("b{bi}"), diff.norm(), tol);
            out.push(r.with_kpq(Some(k), None, Some(0)).timed(t.elapsed().as_secs_f64()));
        }
    }
    Ok(out)
}

/// Products of random elements of `D_{p1}` and `D_{p2}` against
/// `D_{min(p1,p2)}`, closure under adjoints, and membership of `Φ_k(w)` in
/// the span of the compacts and the `D_p`.
pub fn span_suite(ctx: &Context) -> Result<Vec<VerificationRecord>> {
    let fock = &ctx.fock;
    let k = ctx.config.dp_k;
    if k == 0 {
        return Ok(Vec::new());
    }
    let tol = ctx.config.tol_identity;
    let mut cat = Concatenator::new(fock);
    let t = Instant::now();
    let hats = (0..fock.num_factors()).map(|i| build_hat_algebra(fock, i)).collect::<std::result::Result<Vec<_>, _>>()?;
    let spans = (1..=k).map(|p| build_dp_span(fock, p, k, &hats, &mut cat)).collect::<std::result::Result<Vec<_>, _>>()?;
    let build_secs = t.elapsed().as_secs_f64();
    let mut out = Vec::new();
    for hat in &hats {
        let r = ctx.record("hat_unit", format!("iota{}{}", hat.iota, if hat.degenerate { "/degenerate" } else { "" }), hat.unit_residual(), tol);
        out.push(r.timed(build_secs));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.config.seed);
    for a in &spans {
        out.push(ctx.record("dp_adjoint", format!("dim{}", a.basis.dim()), a.adjoint_residual(), tol).with_kpq(Some(k), Some(a.p), None));
        for b in &spans {
            let t = Instant::now();
            let target = &spans[a.p.min(b.p) - 1];
            let mut worst = 0.0f64;
            for _ in 0..ctx.config.trials {
                let prod = a.random_element(&mut rng) * b.random_element(&mut rng);
                worst = worst.max(target.residual(&prod));
            }
            let r = ctx.record("dp_nesting", format!("p1={}/p2={}", a.p, b.p), worst, tol);
            out.push(r.with_kpq(Some(k), Some(a.p.min(b.p)), None).timed(t.elapsed().as_secs_f64()));
        }
    }
    let dp_union = union_span(&spans.iter().map(|s| &s.basis).collect::<Vec<_>>());
    let compacts = compact_span(fock, k);
    let full = union_span(&[&dp_union, &compacts]);
    for &q in ctx.config.qs.iter().filter(|&&q| q > 0 && k + q <= fock.cap()) {
        for (id, w) in test_words(&ctx.example, q) {
            let t = Instant::now();
            let phi = compress_phi_k(&lambda_word(fock, &w)?, k)?;
            let e = expand_phi_k_word(fock, &w, k, &mut cat)?;
            let rest = e.sum(|term| term.kind != TermKind::RankOne);
            let secs = t.elapsed().as_secs_f64();
            out.push(ctx.record("dp_membership", id.clone(), span_membership(&phi.matrix, &full), tol).with_kpq(Some(k), None, Some(q)).timed(secs));
            out.push(ctx.record("dp_membership_noncompact", id, dp_union.residual(&vectorize(&rest)), tol).with_kpq(Some(k), None, Some(q)).timed(secs));
        }
    }
    Ok(out)
}

/// Fock moments of alternating group words against the normal-form oracle.
pub fn group_suite(ctx: &Context) -> Result<Vec<VerificationRecord>> {
    let Some(am) = &ctx.example.amalgam else {
        return Ok(Vec::new());
    };
    let fock = &ctx.fock;
    let outside: Vec<Vec<usize>> =
        (0..2).map(|f| (0..am.groups[f].order()).filter(|g| !am.subgroups[f].contains(g)).collect()).collect();
    let lambdas: Vec<Vec<CMat>> = (0..2)
        .map(|f| (0..am.groups[f].order()).map(|g| Ok(fock.lambda(f, &am.groups[f].regular(g))?.matrix)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let omega = fock.vacuum();
    let mut out = Vec::new();
    for n in 1..=ctx.config.max_word_len.min(fock.cap()) {
        let t = Instant::now();
        let (mut worst, mut count) = (0.0f64, 0usize);
        for idx in words_of_length(2, n) {
            let radices: Vec<usize> = idx.iter().map(|&f| outside[f].len()).collect();
            for choice in mixed_radix(&radices) {
                let word: Vec<(usize, usize)> = idx.iter().zip(&choice).map(|(&f, &c)| (f, outside[f][c])).collect();
                let mut v = omega.clone();
                for &(f, g) in word.iter().rev() {
                    v = &lambdas[f][g] * v;
                }
                let moment = fock.base().element(&fock.inner_coords(&omega, &v));
                worst = worst.max((moment - am.predicted_moment(&word)?).norm());
                count += 1;
            }
        }
        let r = ctx.record("group_moments", format!("len{n}/{count}words"), worst, ctx.config.tol_structural);
        out.push(r.with_kpq(None, None, Some(n)).timed(t.elapsed().as_secs_f64()));
    }
    Ok(out)
}

/// When every sector is one-dimensional the compression of `λ(u_1) + λ(u_2)`
/// to `E(→k)` is the adjacency matrix of a path on `2k + 1` vertices.
pub fn path_graph_suite(ctx: &Context) -> Result<Vec<VerificationRecord>> {
    let fock = &ctx.fock;
    let ex = &ctx.example;
    let applies = ex.factors.len() == 2
        && ex.base.dim() == 1
        && fock.sectors().iter().all(|s| s.dim() == 1)
        && ex.unitaries.iter().all(Option::is_some);
    if !applies {
        return Ok(Vec::new());
    }
    let sum = fock.lambda(0, ex.unitaries[0].as_ref().unwrap())?.add(&fock.lambda(1, ex.unitaries[1].as_ref().unwrap())?)?;
    let mut out = Vec::new();
    for &k in ctx.config.ks.iter().filter(|&&k| k < fock.cap()) {
        let t = Instant::now();
        let norm = op_norm(&compress_phi_k(&sum, k)?.matrix);
        let m = 2 * k + 1;
        let dev = (norm - path_graph_closed_form(m)).abs().max((norm - path_graph_spectral_radius(m)).abs());
        let r = ctx.record("path_graph", format!("norm={norm:.12}"), dev, ctx.config.tol_identity);
        out.push(r.with_kpq(Some(k), None, Some(1)).timed(t.elapsed().as_secs_f64()));
    }
    Ok(out)
}

/// Convergence rows for the unit-norm words, for every `q` and `k`.
pub fn convergence_rows(ctx: &Context) -> Result<Vec<ConvergenceCsvRow>> {
    let fock = &ctx.fock;
    let tasks: Vec<(usize, String, ReducedWord)> = ctx
        .config
        .qs
        .iter()
        .flat_map(|&q| unit_words(&ctx.example, q).into_iter().map(move |(id, w)| (q, id, w)))
        .collect();
    let per_word: Vec<Result<Vec<ConvergenceCsvRow>>> = tasks
        .par_iter()
        .map(|(q, id, w)| {
            let mut cat = Concatenator::new(fock);
            let a = lambda_word(fock, w)?;
            ctx.config
                .ks
                .iter()
                .map(|&k| {
                    let p = ctx.config.p_policy.p_for(k);
                    let row = convergence_row(&a, *q, k, p, &mut cat)?;
                    Ok(ConvergenceCsvRow {
                        example: ctx.example.name.clone(),
                        word_id: id.clone(),
                        q: *q,
                        k,
                        p,
                        sup_abs_rn: row.sup_abs_rn,
                        norm_error: row.norm_error,
                        bound: row.bound,
                    })
                })
                .collect()
        })
        .collect();
    flatten(per_word)
}

/// Each row against its bound and, under the `half` policy, the error
/// nonincreasing in `k` per word.
pub fn convergence_suite(ctx: &Context, rows: &[ConvergenceCsvRow]) -> Vec<VerificationRecord> {
    let mut out = Vec::new();
    for r in rows {
        let mut rec = ctx.record("convergence", r.word_id.clone(), r.norm_error, r.bound);
        rec.pass = r.norm_error <= r.bound + 1e-12;
        out.push(rec.with_kpq(Some(r.k), Some(r.p), Some(r.q)));
    }
    if ctx.config.p_policy == PPolicy::Half {
        let mut ids: Vec<&str> = rows.iter().map(|r| r.word_id.as_str()).collect();
        ids.dedup();
        for id in ids {
            let mut errs: Vec<_> = rows.iter().filter(|r| r.word_id == id).map(|r| (r.k, r.norm_error, r.q)).collect();
            errs.sort_by_key(|e| e.0);
            let rise = errs.windows(2).map(|w| w[1].1 - w[0].1).fold(0.0, f64::max);
            let q = errs.first().map(|e| e.2);
            out.push(ctx.record("convergence_monotone", id, rise, 1e-12).with_kpq(None, None, q));
        }
    }
    out
}

fn flatten<T>(parts: Vec<Result<Vec<T>>>) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}
