//! Built-in cross-validation: runs the identity and consistency checks
//! end to end and prints one pass/fail line per check.

use std::process::ExitCode;

use odo_core::channels::{sample_seeded, FadingModel};
use odo_core::engine::{
    odo_by_numerical_derivative, odo_cascaded, odo_for_model, odo_generic, odo_mrc_rice,
    odo_rayleigh, odo_rice, odo_sc, odo_twdp, op_linear_approx, OperatingPoint,
};
use odo_core::montecarlo::{estimate_odo, EstimatorMethod};
use odo_core::specfun::{bessel_i_scaled, bessel_k, gauss_legendre, marcum_q, marcum_q_lower};
use odo_core::Result as CoreResult;

use crate::model_args::ValidateArgs;
use crate::{CliError, CliResult};

type CheckResult = Result<(), String>;
/// A closed-form δ evaluator, boxed so checks can swap implementations.
type ClosedForm = Box<dyn Fn(&OperatingPoint) -> CoreResult<f64>>;

struct Check {
    scope: &'static str,
    name: &'static str,
    run: Box<dyn Fn(u64) -> CheckResult>,
}

fn op(db: f64) -> OperatingPoint {
    OperatingPoint::new(1.7, db).expect("valid operating point")
}

fn coarse_grid() -> Vec<f64> {
    (0..15).map(|i| -10.0 + 5.0 * i as f64).collect()
}

fn fail_on_core<T>(r: CoreResult<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

/// Max relative gap between a closed-form δ and the numerical log-CDF
/// derivative over the given operating points. Exposed so the sensitivity
/// canary test can inject a perturbed closed form and watch the check trip.
pub(crate) fn derivative_agreement_gap(
    model: &FadingModel,
    closed_delta: &dyn Fn(&OperatingPoint) -> CoreResult<f64>,
    points_db: &[f64],
) -> Result<f64, String> {
    let mut worst: f64 = 0.0;
    for &db in points_db {
        let p = op(db);
        let closed = fail_on_core(closed_delta(&p))?;
        let fd = fail_on_core(odo_by_numerical_derivative(model, &p, 0.01))?;
        worst = worst.max(((fd - closed) / closed).abs());
    }
    Ok(worst)
}

fn checks() -> Vec<Check> {
    vec![
        Check {
            scope: "specfun",
            name: "gauss-legendre rule invariants",
            run: Box::new(|_| {
                for order in [16usize, 64, 256] {
                    let rule = fail_on_core(gauss_legendre(order))?;
                    let wsum: f64 = rule.weights().iter().sum();
                    if (wsum - 2.0).abs() > 1e-14 {
                        return Err(format!("order {order}: weights sum to {wsum}"));
                    }
                    let integral = rule.integrate(-1.0, 1.0, |x| x * x * x * x * x * x);
                    if (integral - 2.0 / 7.0).abs() > 1e-13 {
                        return Err(format!("order {order}: ∫x⁶ = {integral}"));
                    }
                }
                Ok(())
            }),
        },
        Check {
            scope: "specfun",
            name: "bessel wronskian identity",
            run: Box::new(|_| {
                let mut z: f64 = 0.05;
                while z <= 30.0 {
                    let ez = z.exp();
                    let i0 = fail_on_core(bessel_i_scaled(0, z))? * ez;
                    let i1 = fail_on_core(bessel_i_scaled(1, z))? * ez;
                    let k0 = fail_on_core(bessel_k(0, z))?;
                    let k1 = fail_on_core(bessel_k(1, z))?;
                    let gap = ((i0 * k1 + i1 * k0) * z - 1.0).abs();
                    if gap > 1e-10 {
                        return Err(format!("wronskian gap {gap:.2e} at z = {z}"));
                    }
                    z *= 2.1;
                }
                Ok(())
            }),
        },
        Check {
            scope: "specfun",
            name: "marcum upper+lower tails sum to one",
            run: Box::new(|_| {
                for n in [1u32, 2, 4] {
                    for a in [0.0, 1.0, 30f64.sqrt()] {
                        for b in [0.1, 1.0, 5.0] {
                            let q = fail_on_core(marcum_q(n, a, b))?;
                            let p = fail_on_core(marcum_q_lower(n, a, b))?;
                            if (q + p - 1.0).abs() > 2e-12 {
                                return Err(format!("Q+P = {} at N={n}, a={a:.3}, b={b}", q + p));
                            }
                        }
                    }
                }
                Ok(())
            }),
        },
        Check {
            scope: "channels",
            name: "pdf is the cdf derivative",
            run: Box::new(|_| {
                let models = [
                    FadingModel::rayleigh(),
                    FadingModel::rician(15.0).expect("valid"),
                    FadingModel::twdp(12.0, 0.7).expect("valid"),
                    FadingModel::cascaded(),
                ];
                for model in models {
                    for i in 0..6 {
                        let t = 10f64.powf(-2.0 + 2.4 * i as f64 / 5.0);
                        let h = 1e-5 * t;
                        let fd = (fail_on_core(model.cdf(t + h))?
                            - fail_on_core(model.cdf(t - h))?)
                            / (2.0 * h);
                        let pdf = fail_on_core(model.pdf(t))?;
                        if ((fd - pdf) / pdf).abs() > 1e-5 {
                            return Err(format!("{model:?} at t={t}: fd {fd} vs pdf {pdf}"));
                        }
                    }
                }
                Ok(())
            }),
        },
        Check {
            scope: "channels",
            name: "selection combining composes the cdf",
            run: Box::new(|_| {
                let base = FadingModel::rician(10.0).expect("valid");
                let sc = base.with_sc(4).expect("valid");
                for t in [0.05, 0.5, 2.0] {
                    let lhs = fail_on_core(sc.cdf(t))?;
                    let rhs = fail_on_core(base.cdf(t))?.powi(4);
                    if (lhs - rhs).abs() > 1e-15 * rhs.max(f64::MIN_POSITIVE) {
                        return Err(format!("t={t}: {lhs} vs {rhs}"));
                    }
                }
                Ok(())
            }),
        },
        Check {
            scope: "channels",
            name: "sampler means are normalized",
            run: Box::new(|seed| {
                let n = 100_000;
                let s = fail_on_core(sample_seeded(&FadingModel::rayleigh(), seed, n))?;
                let mean = s.iter().sum::<f64>() / n as f64;
                if (mean - 1.0).abs() > 4.0 / (n as f64).sqrt() {
                    return Err(format!("rayleigh sample mean {mean}"));
                }
                let mrc = FadingModel::rician(10.0)
                    .expect("valid")
                    .with_mrc(4)
                    .expect("valid");
                let s = fail_on_core(sample_seeded(&mrc, seed ^ 0xABCD, n))?;
                let mean = s.iter().sum::<f64>() / n as f64;
                if (mean - 4.0).abs() > 4.0 * 0.6 / (n as f64).sqrt() {
                    return Err(format!("MRC sample mean {mean}"));
                }
                Ok(())
            }),
        },
        Check {
            scope: "odo_engine",
            name: "generic quotient equals closed forms",
            run: Box::new(|_| {
                for db in coarse_grid() {
                    let p = op(db);
                    let models = [
                        FadingModel::rayleigh(),
                        FadingModel::rician(15.0).expect("valid"),
                        FadingModel::twdp(12.0, 0.7).expect("valid"),
                        FadingModel::cascaded(),
                        FadingModel::rician(10.0)
                            .expect("valid")
                            .with_mrc(4)
                            .expect("valid"),
                    ];
                    for model in models {
                        let generic = fail_on_core(odo_generic(&model, &p))?.delta;
                        let closed = fail_on_core(odo_for_model(&model, &p))?.delta;
                        let tol = if matches!(
                            model.kind(),
                            odo_core::channels::FadingKind::Twdp { .. }
                        ) {
                            1e-8
                        } else {
                            1e-10
                        };
                        if ((generic - closed) / closed).abs() > tol {
                            return Err(format!(
                                "{model:?} at {db} dB: generic {generic} vs closed {closed}"
                            ));
                        }
                    }
                }
                Ok(())
            }),
        },
        Check {
            scope: "odo_engine",
            name: "log-cdf derivative agreement (>= 10 dB)",
            run: Box::new(|_| {
                let points: Vec<f64> = coarse_grid().into_iter().filter(|&db| db >= 10.0).collect();
                let cases: Vec<(FadingModel, ClosedForm)> = vec![
                    (
                        FadingModel::rayleigh(),
                        Box::new(|p: &OperatingPoint| Ok(odo_rayleigh(p)?.delta)),
                    ),
                    (
                        FadingModel::rician(15.0).expect("valid"),
                        Box::new(|p: &OperatingPoint| Ok(odo_rice(15.0, p)?.delta)),
                    ),
                    (
                        FadingModel::cascaded(),
                        Box::new(|p: &OperatingPoint| Ok(odo_cascaded(p)?.delta)),
                    ),
                ];
                for (model, closed) in &cases {
                    let gap = derivative_agreement_gap(model, closed.as_ref(), &points)?;
                    if gap > 1e-6 {
                        return Err(format!("{model:?}: max relative gap {gap:.2e}"));
                    }
                }
                Ok(())
            }),
        },
        Check {
            scope: "odo_engine",
            name: "reduction identities (K=0, N=1, Δ=0, SC)",
            run: Box::new(|_| {
                for db in [0.0, 10.0, 25.0, 45.0] {
                    let p = op(db);
                    let ray = fail_on_core(odo_rayleigh(&p))?.delta;
                    let rice0 = fail_on_core(odo_rice(0.0, &p))?.delta;
                    if ((rice0 - ray) / ray).abs() > 1e-12 {
                        return Err(format!("rice(K=0) vs rayleigh at {db} dB"));
                    }
                    let rice = fail_on_core(odo_rice(15.0, &p))?;
                    let mrc1 = fail_on_core(odo_mrc_rice(15.0, 1, &p))?;
                    if ((mrc1.delta - rice.delta) / rice.delta).abs() > 1e-10 {
                        return Err(format!("mrc(N=1) vs rice at {db} dB"));
                    }
                    let twdp0 = fail_on_core(odo_twdp(15.0, 0.0, &p))?;
                    if ((twdp0.delta - rice.delta) / rice.delta).abs() > 1e-8 {
                        return Err(format!("twdp(Δ=0) vs rice at {db} dB"));
                    }
                    let sc = fail_on_core(odo_sc(&rice, 4))?;
                    if (sc.delta - 4.0 * rice.delta).abs() > 1e-10 * sc.delta {
                        return Err(format!("sc scaling at {db} dB"));
                    }
                }
                Ok(())
            }),
        },
        Check {
            scope: "odo_engine",
            name: "tangency and decade identities",
            run: Box::new(|_| {
                for db in [0.0, 10.0, 25.0] {
                    let p = op(db);
                    let r = fail_on_core(odo_rice(15.0, &p))?;
                    let line = op_linear_approx(&r, &p);
                    if ((line.op(db) - r.alpha0) / r.alpha0).abs() > 1e-12 {
                        return Err(format!("tangency off at {db} dB"));
                    }
                    if (r.delta * r.c_db_per_decade - 10.0).abs() > 1e-12 {
                        return Err(format!("delta·c_db != 10 at {db} dB"));
                    }
                }
                Ok(())
            }),
        },
        Check {
            scope: "odo_engine",
            name: "regime facts (K sweep, cascaded bounds, asymptotes)",
            run: Box::new(|_| {
                let peak = coarse_grid()
                    .into_iter()
                    .map(|db| odo_rice(15.0, &op(db)).map(|r| r.delta))
                    .collect::<CoreResult<Vec<_>>>()
                    .map_err(|e| e.to_string())?
                    .into_iter()
                    .fold(f64::MIN, f64::max);
                if peak <= 1.0 {
                    return Err(format!("K=15 never exceeds slope 1 (peak {peak})"));
                }
                let mut prev = 0.0;
                for db in coarse_grid() {
                    let d = fail_on_core(odo_rice(0.5, &op(db)))?.delta;
                    if d > 1.0 + 1e-9 || d < prev - 1e-12 {
                        return Err(format!("K=0.5 regime violated at {db} dB"));
                    }
                    prev = d;
                }
                if fail_on_core(odo_cascaded(&op(8.0)))?.delta >= 0.5 {
                    return Err("cascaded slope at 8 dB not below 0.5".into());
                }
                if fail_on_core(odo_cascaded(&op(20.0)))?.delta >= 0.75 {
                    return Err("cascaded slope at 20 dB not below 0.75".into());
                }
                let d60 = fail_on_core(odo_rice(15.0, &op(60.0)))?.delta;
                if (d60 - 1.0).abs() > 0.05 {
                    return Err(format!("rician K=15 delta(60 dB) = {d60}"));
                }
                Ok(())
            }),
        },
        Check {
            scope: "montecarlo",
            name: "estimates are deterministic",
            run: Box::new(|seed| {
                let model = FadingModel::rician(5.0).expect("valid");
                let p = op(8.0);
                let a = fail_on_core(estimate_odo(
                    &model,
                    &p,
                    50_000,
                    EstimatorMethod::LogCdfDiff,
                    seed,
                ))?;
                let b = fail_on_core(estimate_odo(
                    &model,
                    &p,
                    50_000,
                    EstimatorMethod::LogCdfDiff,
                    seed,
                ))?;
                if a != b {
                    return Err("two runs with one seed differ".into());
                }
                Ok(())
            }),
        },
        Check {
            scope: "montecarlo",
            name: "bootstrap interval coverage",
            run: Box::new(|seed| {
                let analytic = 0.5819767068693264;
                let w_th = 2f64.powf(1.7) - 1.0;
                let p = OperatingPoint::new(1.7, 10.0 * w_th.log10()).expect("valid");
                let mut hits = 0;
                for i in 0..20u64 {
                    let est = fail_on_core(estimate_odo(
                        &FadingModel::rayleigh(),
                        &p,
                        30_000,
                        EstimatorMethod::LogCdfDiff,
                        seed.wrapping_add(i),
                    ))?;
                    if est.ci_low <= analytic && analytic <= est.ci_high {
                        hits += 1;
                    }
                }
                if hits < 14 {
                    return Err(format!("coverage {hits}/20"));
                }
                Ok(())
            }),
        },
        Check {
            scope: "montecarlo",
            name: "plugin and diff estimators agree",
            run: Box::new(|seed| {
                let model = FadingModel::rician(5.0).expect("valid");
                let p = op(8.0);
                let diff = fail_on_core(estimate_odo(
                    &model,
                    &p,
                    100_000,
                    EstimatorMethod::LogCdfDiff,
                    seed,
                ))?;
                let plug = fail_on_core(estimate_odo(
                    &model,
                    &p,
                    100_000,
                    EstimatorMethod::PlugIn,
                    seed,
                ))?;
                if diff.ci_low.max(plug.ci_low) > diff.ci_high.min(plug.ci_high) {
                    return Err(format!(
                        "intervals disjoint: diff [{}, {}], plugin [{}, {}]",
                        diff.ci_low, diff.ci_high, plug.ci_low, plug.ci_high
                    ));
                }
                Ok(())
            }),
        },
    ]
}

pub fn run(args: &ValidateArgs) -> CliResult {
    let scope = args.scope.as_str();
    let known = ["all", "specfun", "channels", "odo_engine", "montecarlo"];
    if !known.contains(&scope) {
        return Err(CliError::Usage(format!(
            "unknown scope '{scope}' (expected one of {})",
            known.join(", ")
        )));
    }
    let mut failures = 0usize;
    let mut ran = 0usize;
    for check in checks() {
        if scope != "all" && scope != check.scope {
            continue;
        }
        ran += 1;
        match (check.run)(args.seed) {
            Ok(()) => println!("PASS  {:<11}  {}", check.scope, check.name),
            Err(detail) => {
                failures += 1;
                println!("FAIL  {:<11}  {}  [{detail}]", check.scope, check.name);
            }
        }
    }
    println!(
        "{} checks, {} failed (scope: {scope}, seed: {})",
        ran, failures, args.seed
    );
    if failures == 0 {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(1))
    }
}
