//! Single-point report: δ, α₀, c_dB, tangent line, optional MC estimate.

use std::process::ExitCode;

use odo_core::engine::{odo_for_model, op_linear_approx, OperatingPoint};
use odo_core::montecarlo::{estimate_odo_with, EmpiricalEstimate};

use crate::model_args::OdoArgs;
use crate::CliResult;

pub fn run(args: &OdoArgs) -> CliResult {
    let model = args.model.build()?;
    let op = OperatingPoint::new(args.rate, args.omega0_db)?;
    let result = odo_for_model(&model, &op)?;
    let tangent = op_linear_approx(&result, &op);

    let mc: Option<EmpiricalEstimate> = match args.mc.mc_samples {
        Some(n) => Some(estimate_odo_with(
            &model,
            &op,
            n,
            args.mc.method.into(),
            args.mc.seed,
            &args.mc.estimator_config(),
        )?),
        None => None,
    };

    if args.json {
        let report = serde_json::json!({
            "model": model,
            "R": args.rate,
            "omega0_db": args.omega0_db,
            "delta": result.delta,
            "alpha0": result.alpha0,
            "c_db": result.c_db_per_decade,
            "tangent": {
                "slope": tangent.slope_per_db,
                "anchor": {
                    "omega_db": tangent.anchor_db,
                    "log10_op": tangent.anchor_logop,
                },
            },
            "mc": mc,
        });
        println!(
            "{}",
            serde_json::to_string_pretty(&report).expect("serializable")
        );
    } else {
        println!(
            "model            {}",
            serde_json::to_string(&model).expect("serializable")
        );
        println!(
            "R                {} bits/s/Hz (W_th = {:.6})",
            args.rate, op.w_th
        );
        println!("omega0           {} dB", args.omega0_db);
        println!("delta (ODO)      {:.6}", result.delta);
        println!("alpha0 (OP)      {:.6e}", result.alpha0);
        println!("c_db per decade  {:.4} dB", result.c_db_per_decade);
        println!(
            "tangent          log10(OP) = {:.6} + {:.6}·(omega_db - {})",
            tangent.anchor_logop, tangent.slope_per_db, tangent.anchor_db
        );
        if let Some(est) = mc {
            println!(
                "mc delta         {:.6} [{:.6}, {:.6}] (n = {}, seed = {})",
                est.delta_hat, est.ci_low, est.ci_high, est.n_samples, est.seed
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}
