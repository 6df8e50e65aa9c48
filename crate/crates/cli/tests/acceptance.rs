//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use amalgam_cli::suites::{self, Context};
use amalgam_cli::{RunConfig, VerificationRecord};

struct Outcome {
    pass: bool,
    detail: String,
}

fn context(example: &str, k_big: usize, ks: Vec<usize>, qs: Vec<usize>) -> Context {
    let mut c = RunConfig::new(example, ks, qs);
    c.k_big = k_big;
    c.dp_k = 0;
    Context::new(c).expect("valid configuration")
}

fn worst(records: &[VerificationRecord]) -> f64 {
    records.iter().map(|r| r.measured).fold(0.0, f64::max)
}

fn timed(limit_s: f64, f: impl FnOnce() -> Outcome) -> Outcome {
    let t = Instant::now();
    let mut out = f();
    let secs = t.elapsed().as_secs_f64();
    out.pass &= secs < limit_s;
    out.detail = format!("{}; {secs:.2}s (limit {limit_s}s)", out.detail);
    out
}

fn freeness() -> Outcome {
    timed(10.0, || {
        let mut all = Vec::new();
        for name in ["dinfty", "m2diag", "s3a3"] {
            let ctx = context(name, 8, vec![1], vec![0]);
            all.extend(suites::freeness_suite(&ctx).unwrap().into_iter().filter(|r| r.suite == "freeness"));
        }
        let m = worst(&all);
        Outcome {
            pass: m < 1e-10 && all.len() == 18,
            detail: format!("max |φ(a_1...a_n)| = {m:.2e} over lengths 1..6 on dinfty, m2diag, s3a3, K_big = 8"),
        }
    })
}

fn isometries() -> Outcome {
    timed(30.0, || {
        let mut all = Vec::new();
        for name in ["dinfty", "m2diag"] {
            let ctx = context(name, 12, (2..=12).collect(), vec![0]);
            all.extend(suites::isometry_suite(&ctx).unwrap());
        }
        let by = |s: &str| worst(&all.iter().filter(|r| r.suite == s).cloned().collect::<Vec<_>>());
        let (v, vi, cross) = (by("isometry_V_pk"), by("isometry_V_p_iota"), by("isometry_cross"));
        Outcome {
            pass: v.max(vi).max(cross) < 1e-10 && all.iter().all(|r| r.pass),
            detail: format!("‖V*V - 1‖ = {v:.2e} for p < k <= 12, ‖V_ι*V_ι - 1‖ = {vi:.2e}, cross = {cross:.2e}"),
        }
    })
}

fn sector_identity() -> Outcome {
    timed(300.0, || {
        let mut all = Vec::new();
        for name in ["dinfty", "m2diag"] {
            let ctx = context(name, 17, (1..=14).collect(), vec![1, 2, 3]);
            all.extend(suites::sector_identity_suite(&ctx).unwrap());
        }
        let covered = (1..=3).all(|q| all.iter().any(|r| r.q == Some(q)));
        let m = worst(&all);
        Outcome {
            pass: m < 1e-8 && covered,
            detail: format!("worst residual {m:.2e} over {} (word, p, k) cases, q = 1..3, k <= 14", all.len()),
        }
    })
}

fn convergence() -> Outcome {
    let mut pass = true;
    let mut ratios = Vec::new();
    for name in ["dinfty", "m2diag"] {
        let ctx = context(name, 29, (6..=24).collect(), vec![1, 2]);
        let rows = suites::convergence_rows(&ctx).unwrap();
        let mut ids: Vec<&str> = rows.iter().map(|r| r.word_id.as_str()).collect();
        ids.dedup();
        for id in ids {
            let errs: Vec<_> = rows.iter().filter(|r| r.word_id == id).collect();
            pass &= errs.windows(2).all(|w| w[1].k > w[0].k && w[1].norm_error <= w[0].norm_error + 1e-12);
            pass &= errs.iter().all(|r| r.norm_error > 0.0 && r.norm_error <= r.bound + 1e-12);
            let ratio = errs.last().unwrap().norm_error / errs[0].norm_error;
            pass &= ratio < 1.0 / 3.0;
            ratios.push(ratio);
        }
    }
    let worst_ratio = ratios.iter().copied().fold(0.0, f64::max);
    Outcome {
        pass: pass && !ratios.is_empty(),
        detail: format!("nonincreasing for k = 6..24, error(24)/error(6) <= {worst_ratio:.4} over {} words, within (2q+1) sup|R_n|", ratios.len()),
    }
}

fn expansion() -> Outcome {
    timed(120.0, || {
        let mut all = Vec::new();
        for name in ["dinfty", "m2diag"] {
            let ctx = context(name, 11, (1..=8).collect(), vec![1, 2, 3]);
            all.extend(suites::expansion_suite(&ctx).unwrap());
        }
        let covered = (1..=3).all(|q| ((q + 1)..=8).all(|k| all.iter().any(|r| r.q == Some(q) && r.k == Some(k))));
        let words = worst(&all.iter().filter(|r| r.suite == "expansion_word").cloned().collect::<Vec<_>>());
        let scalars = worst(&all.iter().filter(|r| r.suite == "expansion_scalar").cloned().collect::<Vec<_>>());
        Outcome {
            pass: words.max(scalars) < 1e-8 && covered,
            detail: format!("words {words:.2e} for q <= 3, k <= 8; B basis {scalars:.2e}"),
        }
    })
}

fn span_structure() -> Outcome {
    let mut c = RunConfig::new("m2diag", vec![6], vec![1, 2]);
    c.k_big = 8;
    c.dp_k = 6;
    let ctx = Context::new(c).unwrap();
    let all = suites::span_suite(&ctx).unwrap();
    let by = |s: &str| worst(&all.iter().filter(|r| r.suite == s).cloned().collect::<Vec<_>>());
    let (nest, member, noncompact) = (by("dp_nesting"), by("dp_membership"), by("dp_membership_noncompact"));
    let pairs = all.iter().filter(|r| r.suite == "dp_nesting").count();
    Outcome {
        pass: nest.max(member).max(noncompact) < 1e-8 && pairs == 36,
        detail: format!("D_p1 D_p2 in D_min: {nest:.2e} over {pairs} pairs at k = 6; Φ_k(w) membership {member:.2e}, without rank-one part {noncompact:.2e}"),
    }
}

fn group_oracle() -> Outcome {
    let mut all = Vec::new();
    for name in ["dinfty", "s3a3"] {
        let ctx = context(name, 6, vec![1], vec![0]);
        all.extend(suites::group_suite(&ctx).unwrap());
    }
    let m = worst(&all);
    Outcome {
        pass: m < 1e-10 && all.len() == 12,
        detail: format!("max deviation {m:.2e} over words up to length 6 on dinfty, s3a3"),
    }
}

fn path_graph() -> Outcome {
    let ctx = context("dinfty", 41, vec![10, 20, 40], vec![0]);
    let all = suites::path_graph_suite(&ctx).unwrap();
    let m = worst(&all);
    let norms: Vec<&str> = all.iter().map(|r| r.word_id.trim_start_matches("norm=")).collect();
    Outcome {
        pass: m < 1e-8 && all.len() == 3,
        detail: format!("‖Φ_K(λ(u1) + λ(u2))‖ = {} for K = 10, 20, 40; deviation {m:.2e}", norms.join(", ")),
    }
}

type Check = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let checks: [Check; 8] = [
        ("freeness", freeness),
        ("isometries", isometries),
        ("sector identity", sector_identity),
        ("convergence", convergence),
        ("expansion", expansion),
        ("span structure", span_structure),
        ("group oracle", group_oracle),
        ("path graph norm", path_graph),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        let out = check();
        println!("{} {name}: {}", if out.pass { "PASS" } else { "FAIL" }, out.detail);
        failed += usize::from(!out.pass);
    }
    println!("{} of {} criteria passed", checks.len() - failed, checks.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
