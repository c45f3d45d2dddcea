//! Acceptance suite: one PASS/FAIL line per criterion, with timings.
//! Exits nonzero if any criterion fails.

use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use muntz_embed::composition::{
    boundedness_test, check_alpha, direct_composition_integral, essential_norm_formula, pullback, Boundedness,
    FnExpr, FnPiece, MapSpec, PiecewiseFn,
};
use muntz_embed::constructions::{build_example1, build_example2, verify_example1};
use muntz_embed::embedding::{essential_norm_estimate, necessary_check};
use muntz_embed::measure::{default_eps_grid, DensityExpr, DensityPiece, Measure};
use muntz_embed::nsq::{gram_distance, nsq_product_bounds};
use muntz_embed::poly::MuntzPolynomial;
use muntz_embed::sequence::ExponentSequence;

mod common;

use common::{exact_l2_sq, projection_distance_sq};

type Check = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Check);

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn c1_gram_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0_f64;
    for _ in 0..200 {
        let n = rng.random_range(2..=6);
        let mut exps: Vec<f64> = Vec::new();
        while exps.len() < n {
            let g: f64 = rng.random_range(0.5..50.0);
            if exps.iter().all(|&e| (e - g).abs() > 1e-3) {
                exps.push(g);
            }
        }
        let d = gram_distance(exps[0], &exps[1..]).map_err(|e| e.to_string())?;
        let oracle = projection_distance_sq(exps[0], &exps[1..]).sqrt();
        worst = worst.max((d - oracle).abs() / oracle);
    }
    if worst <= 1e-10 {
        Ok(format!("max relative error {worst:.2e}"))
    } else {
        Err(format!("max relative error {worst:.2e}"))
    }
}

fn c2_gram_coefficient_bound() -> Check {
    let exps: Vec<f64> = (1..=6).map(|n| (n * n + 1) as f64).collect();
    let inv_d: Vec<f64> = (0..exps.len())
        .map(|m| {
            let others: Vec<f64> = exps.iter().enumerate().filter(|&(i, _)| i != m).map(|(_, &g)| g).collect();
            1.0 / gram_distance(exps[m], &others).unwrap()
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut min_slack = f64::INFINITY;
    for _ in 0..1000 {
        let coeffs: Vec<f64> = (0..exps.len()).map(|_| normal(&mut rng)).collect();
        let l2 = exact_l2_sq(&exps, &coeffs).sqrt();
        for m in 0..exps.len() {
            let slack = inv_d[m] * l2 + 1e-9 - coeffs[m].abs();
            min_slack = min_slack.min(slack);
        }
    }
    if min_slack >= 0.0 {
        Ok(format!("min slack {min_slack:.3e}"))
    } else {
        Err(format!("violated, slack {min_slack:.3e}"))
    }
}

fn c3_nsq_chain() -> Check {
    let mut min_slack = f64::INFINITY;
    for m in 1..=20 {
        let c = nsq_product_bounds(m).map_err(|e| e.to_string())?;
        for i in 0..3 {
            min_slack = min_slack.min(c.ln_part_bounds[i] - c.ln_parts[i]);
        }
        let product = 0.5 * (2.0 * (m * m) as f64 + 3.0).ln() + c.ln_part_bounds.iter().sum::<f64>();
        min_slack = min_slack.min(c.ln_stirling_bound - product);
        min_slack = min_slack.min(c.ln_coeff_bound_tilde - c.ln_stirling_bound);
        if !c.tilde_holds {
            return Err(format!("tilde bound fails at m = {m}"));
        }
    }
    let exps: Vec<f64> = (1..=6).map(|n| (n * n) as f64).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut min_factor = f64::INFINITY;
    for _ in 0..1000 {
        let coeffs: Vec<f64> = (0..exps.len()).map(|_| normal(&mut rng)).collect();
        let p = MuntzPolynomial::from_parts(&exps, &coeffs).map_err(|e| e.to_string())?;
        let l1 = p.l1_norm();
        for (m, a) in coeffs.iter().enumerate() {
            min_factor = min_factor.min(100f64.powi(m as i32 + 1) * l1 / a.abs());
        }
    }
    if min_slack >= 0.0 && min_factor >= 1.0 {
        Ok(format!("min log slack {min_slack:.3e}, min 100^m‖p‖₁/|a_m| = {min_factor:.3e}"))
    } else {
        Err(format!("log slack {min_slack:.3e}, factor {min_factor:.3e}"))
    }
}

fn random_sublinear(rng: &mut ChaCha8Rng) -> Measure {
    let mut mu = Measure::zero();
    for _ in 0..rng.random_range(0..=4) {
        let t = rng.random_range(0.0..0.999);
        let w = rng.random_range(0.01..1.0) * (1.0 - t);
        mu = mu.with_atom(t, w).unwrap();
    }
    let c = rng.random_range(0.1..2.0);
    let piece = if rng.random_bool(0.5) {
        DensityPiece::new(rng.random_range(0.0..0.99), 1.0, DensityExpr::Const(c), false)
    } else {
        DensityPiece::new(0.0, 1.0, DensityExpr::XPow { c, alpha: rng.random_range(0.0..5.0) }, false)
    };
    mu.with_piece(piece.unwrap()).unwrap()
}

fn c4_sublinear_embedding() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let grid = default_eps_grid();
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let mu = random_sublinear(&mut rng);
        let s = mu.sublinear_profile(&grid).map_err(|e| e.to_string())?.sublinear_norm_estimate;
        for k in 0..=6 {
            let l = 10f64.powi(k);
            let v = mu
                .integrate(|x| (l + 1.0) * x.powf(l), 1e-12)
                .map_err(|e| e.to_string())?;
            worst = worst.max(v / s);
        }
    }
    if worst <= 1.0 + 1e-6 {
        Ok(format!("max ∫(λ+1)x^λ dμ / ‖μ‖_S = {worst:.9}"))
    } else {
        Err(format!("ratio {worst:.9} exceeds 1 + 1e-6"))
    }
}

fn c5_elementary_lower_bound() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut min_slack = f64::INFINITY;
    for _ in 0..10_000 {
        let n = rng.random_range(1..=6);
        let mut exps: Vec<f64> = (0..n).map(|_| rng.random_range(1.0..40.0)).collect();
        exps.sort_by(f64::total_cmp);
        exps.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
        let coeffs: Vec<f64> = exps.iter().map(|_| normal(&mut rng)).collect();
        let p = MuntzPolynomial::from_parts(&exps, &coeffs).map_err(|e| e.to_string())?;
        let lb = p.elementary_lower_bound().map_err(|e| e.to_string())?;
        min_slack = min_slack.min(p.l1_norm() + 1e-10 - lb);
    }
    if min_slack >= 0.0 {
        Ok(format!("min slack {min_slack:.3e}"))
    } else {
        Err(format!("violated, slack {min_slack:.3e}"))
    }
}

fn c6_essential_norm_density_x() -> Check {
    let mu = Measure::from_density(0.0, 1.0, DensityExpr::Poly(vec![0.0, 1.0])).unwrap();
    let seq = ExponentSequence::geometric(1.0, 2.0);
    let e = essential_norm_estimate(&mu, &seq, 16, &[2, 4, 8, 16, 32, 64], 200, 7).map_err(|e| e.to_string())?;
    let last = e.table.last().unwrap();
    let msg = format!("estimate {:.6}, monomial on last tail {:.6}", e.estimate, last.monomial);
    if (e.estimate - 1.0).abs() <= 0.05 && last.monomial >= 0.95 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c7_tent_essential_norm() -> Check {
    let tent = MapSpec::new(PiecewiseFn::tent()).unwrap();
    let one = PiecewiseFn::constant(1.0);
    let cert = check_alpha(&tent, 1000).ok_or("tent fails condition (α)")?;
    let formula = essential_norm_formula(&tent, &one, &cert).map_err(|e| e.to_string())?;
    let mu = pullback(&tent, &one).map_err(|e| e.to_string())?;
    let seq = ExponentSequence::geometric(1.0, 2.0);
    let e = essential_norm_estimate(&mu, &seq, 16, &[2, 4, 8, 16, 32, 64], 200, 7).map_err(|e| e.to_string())?;
    let msg = format!("formula {formula}, estimate {:.6}", e.estimate);
    if formula == 1.0 && (0.9..=1.05).contains(&e.estimate) {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c8_logistic_unbounded() -> Check {
    let phi = MapSpec::new(PiecewiseFn::single(FnExpr::Poly(vec![0.0, 4.0, -4.0]))).unwrap();
    let witness = match boundedness_test(&phi) {
        Boundedness::Unbounded { witness, .. } => witness,
        other => return Err(format!("not flagged unbounded: {other:?}")),
    };
    let mu = pullback(&phi, &PiecewiseFn::constant(1.0)).map_err(|e| e.to_string())?;
    let c = necessary_check(&mu, &ExponentSequence::geometric(2.0, 2.0), 20).map_err(|e| e.to_string())?;
    let growth = c.table.last().unwrap().ratio / c.table[0].ratio;
    let msg = format!("witness {witness}, ratio growth {growth:.1}×");
    if (witness - 0.5).abs() < 1e-8 && growth >= 10.0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c9_example1() -> Check {
    let ex = build_example1(12).map_err(|e| e.to_string())?;
    let violations = verify_example1(&ex);
    let msg = format!(
        "c = {:.6}, max bounded integral {:.6}, C₁ = {:.6}, clause violations {}",
        ex.total_mass,
        ex.rows[2..].iter().map(|r| r.bounded_integral).fold(0.0, f64::max),
        ex.c1_fit,
        violations.len()
    );
    if ex.bounded_ok && ex.growth_ok && violations.is_empty() {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c10_example2() -> Check {
    let ex = build_example2(4).map_err(|e| e.to_string())?;
    let msg = format!(
        "‖μ‖_S = {:.9}, normalized ratios {:?}",
        ex.sublinear_norm,
        ex.rows.iter().map(|r| (r.normalized * 1e4).round() / 1e4).collect::<Vec<_>>()
    );
    let ok = ex.sublinear_norm <= PI * PI / 6.0 + 1e-6 && ex.band_ok && ex.ratio_nondecreasing && ex.span_ok;
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

/// A continuous piecewise-affine map through random nodes, or a scaled
/// logistic map.
fn random_map(rng: &mut ChaCha8Rng) -> PiecewiseFn {
    if rng.random_bool(0.3) {
        let b = rng.random_range(0.2..1.0);
        return PiecewiseFn::single(FnExpr::Poly(vec![0.0, 4.0 * b, -4.0 * b]));
    }
    let k = rng.random_range(1..=4);
    let mut xs: Vec<f64> = (0..k - 1).map(|_| rng.random_range(0.05..0.95)).collect();
    xs.sort_by(f64::total_cmp);
    let mut nodes = vec![0.0];
    nodes.extend(xs);
    nodes.push(1.0);
    let ys: Vec<f64> = nodes.iter().map(|_| rng.random_range(0.0..1.0)).collect();
    let pieces = nodes
        .windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| {
            let c1 = (y[1] - y[0]) / (x[1] - x[0]);
            FnPiece {
                a: x[0],
                b: x[1],
                expr: FnExpr::Affine { c0: y[0] - c1 * x[0], c1 },
            }
        })
        .collect();
    PiecewiseFn::new(pieces).unwrap()
}

fn c11_pullback_identity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let phi = MapSpec::new(random_map(&mut rng)).map_err(|e| e.to_string())?;
        let psi = PiecewiseFn::single(FnExpr::Affine {
            c0: rng.random_range(0.1..2.0),
            c1: rng.random_range(-0.1..1.0),
        });
        let l = rng.random_range(0.5..30.0);
        let mu = pullback(&phi, &psi).map_err(|e| e.to_string())?;
        let via = mu.integrate(|y| y.powf(l), 1e-10).map_err(|e| e.to_string())?;
        let direct = direct_composition_integral(&phi, &psi, |y| y.powf(l), 1e-12).map_err(|e| e.to_string())?;
        worst = worst.max((via - direct).abs());
    }
    if worst <= 1e-6 {
        Ok(format!("max |Δ| = {worst:.2e}"))
    } else {
        Err(format!("max |Δ| = {worst:.2e}"))
    }
}

fn c12_cli_determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p.to_str().unwrap().to_string()
    };
    let mu = write("mu.json", r#"{"atoms":[[0.5,0.25]],"density":{"pieces":[{"a":0,"b":1,"expr":"poly","params":[0,1]}]}}"#);
    let seq = write("seq.json", r#"{"kind":"geometric","lambda1":1,"q":2}"#);
    let tent = write(
        "tent.json",
        r#"{"pieces":[{"a":0,"b":0.5,"expr":"affine","params":[0,2]},{"a":0.5,"b":1,"expr":"affine","params":[2,-2]}]}"#,
    );
    let commands: Vec<Vec<&str>> = vec![
        vec!["analyze-sequence", "--seq", &seq, "--n-max", "40"],
        vec!["analyze-measure", "--measure", &mu],
        vec!["embed-estimate", "--seq", &seq, "--measure", &mu, "--degree", "8", "--seed", "7", "--m-max", "8"],
        vec!["essential-norm", "--seq", &seq, "--measure", &mu, "--degree", "6", "--seed", "7", "--m-max", "16"],
        vec!["kappa-table", "--seq", &seq, "--degree", "6", "--seed", "7", "--t-points", "5"],
        vec!["kappa-nsq", "--seq", "nsq", "--m-max", "20"],
        vec!["compose", "--phi", &tent],
        vec!["reproduce", "example1", "--n-max", "12"],
        vec!["reproduce", "example2", "--k-max", "4"],
    ];
    let bin = env!("CARGO_BIN_EXE_muntz-embed");
    for args in &commands {
        let mut outs = Vec::new();
        for run in 0..2 {
            let csv = dir.path().join(format!("t{run}.csv"));
            let mut full: Vec<String> = args.iter().map(|s| s.to_string()).collect();
            if args[0] != "compose" {
                full.extend(["--csv".to_string(), csv.to_str().unwrap().to_string()]);
            }
            let o = Command::new(bin).args(&full).output().map_err(|e| e.to_string())?;
            if !o.status.success() {
                return Err(format!("{} exited with {:?}", args[0], o.status.code()));
            }
            let table = std::fs::read(&csv).unwrap_or_default();
            outs.push((o.stdout, table));
        }
        if outs[0] != outs[1] {
            return Err(format!("{} output differs between runs", args[0]));
        }
    }
    Ok(format!("{} commands byte-identical across two runs", commands.len()))
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("Gram distance matches exact projection", Duration::from_secs(5), c1_gram_oracle),
        ("Gram coefficient bound on random polynomials", Duration::from_secs(30), c2_gram_coefficient_bound),
        ("n² bound chain and 100^m coefficient bound", Duration::from_secs(60), c3_nsq_chain),
        ("sublinear measures embed with constant ‖μ‖_S", Duration::from_secs(60), c4_sublinear_embedding),
        ("elementary lower bound below the L¹ norm", Duration::from_secs(60), c5_elementary_lower_bound),
        ("essential norm of density x is 1", Duration::from_secs(300), c6_essential_norm_density_x),
        ("tent map essential norm", Duration::from_secs(300), c7_tent_essential_norm),
        ("logistic map detected unbounded", Duration::from_secs(30), c8_logistic_unbounded),
        ("two-sequence discrete measure", Duration::from_secs(60), c9_example1),
        ("scaled Diracs at h_{p,q} maxima", Duration::from_secs(60), c10_example2),
        ("pullback integral identity", Duration::from_secs(60), c11_pullback_identity),
        ("CLI determinism", Duration::from_secs(300), c12_cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, limit, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let r = f();
        let dt = t.elapsed();
        let (ok, detail) = match r {
            Ok(d) if dt <= *limit => (true, d),
            Ok(d) => (false, format!("{d}; exceeded {limit:?}")),
            Err(d) => (false, d),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {:>2}: {} {name} ({:.2}s) — {detail}",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            dt.as_secs_f64()
        );
    }
    println!("acceptance: {}/{} passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
