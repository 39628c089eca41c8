//! Distribution-level validation: pdf/cdf consistency, sampler agreement
//! with the analytic CDFs, combining identities, and the wire schema.

use odo_core::channels::{sample_seeded, FadingKind, FadingModel, GainDistribution, SampleStream};
use odo_core::OdoError;

/// One-sample KS critical value at the 1% level.
fn ks_critical(n: usize) -> f64 {
    1.6276 / (n as f64).sqrt()
}

/// Upper bound on the KS sup-distance of sorted samples against an analytic
/// CDF, evaluating the CDF only at every `step`-th order statistic. The
/// ECDF moves by at most step/n between checked points and the CDF is
/// monotone, so adding step/n makes the bound safe.
fn ks_upper_bound(sorted: &[f64], cdf: impl Fn(f64) -> f64, step: usize) -> f64 {
    let n = sorted.len();
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < n {
        let f = cdf(sorted[i]);
        d = d.max((f - i as f64 / n as f64).abs());
        d = d.max(((i + 1) as f64 / n as f64 - f).abs());
        i += step;
    }
    let f_last = cdf(sorted[n - 1]);
    d = d.max((1.0 - f_last).abs());
    d + step as f64 / n as f64
}

fn figure_models() -> Vec<(&'static str, FadingModel)> {
    let mut models: Vec<(&'static str, FadingModel)> = vec![
        ("rayleigh", FadingModel::rayleigh()),
        ("cascaded", FadingModel::cascaded()),
    ];
    for k in [0.1, 1.0, 5.0, 10.0, 15.0] {
        models.push(("rician", FadingModel::rician(k).unwrap()));
    }
    for k in [1.0, 10.0] {
        models.push(("sc", FadingModel::rician(k).unwrap().with_sc(4).unwrap()));
        models.push(("mrc", FadingModel::rician(k).unwrap().with_mrc(4).unwrap()));
    }
    for d in [0.0, 0.3, 0.7, 1.0] {
        models.push(("twdp", FadingModel::twdp(12.0, d).unwrap()));
    }
    models
}

#[test]
fn pdf_is_the_derivative_of_cdf() {
    for (name, model) in figure_models() {
        // 20-point log grid of gains over [0.01, 3]; above that the CDF
        // saturates toward 1 and differencing it in f64 has no signal left
        for i in 0..20 {
            let t = 10f64.powf(-2.0 + (3f64.log10() + 2.0) * i as f64 / 19.0);
            let h = 1e-5 * t;
            let fd = (model.cdf(t + h).unwrap() - model.cdf(t - h).unwrap()) / (2.0 * h);
            let pdf = model.pdf(t).unwrap();
            let rel = ((fd - pdf) / pdf).abs();
            assert!(
                rel < 1e-5,
                "{name} {model:?}: pdf/cdf mismatch at t={t}: fd={fd}, pdf={pdf}"
            );
        }
    }
}

#[test]
fn samplers_match_analytic_cdfs() {
    let n = 1_000_000;
    let crit = ks_critical(n);
    for (idx, (name, model)) in figure_models().into_iter().enumerate() {
        let mut s = sample_seeded(&model, 1000 + idx as u64, n).unwrap();
        s.sort_unstable_by(f64::total_cmp);
        let d = ks_upper_bound(&s, |t| model.cdf(t).unwrap(), 250);
        assert!(
            d < crit,
            "{name} {model:?}: KS bound {d:.3e} exceeds critical {crit:.3e}"
        );
    }
}

#[test]
fn sample_means_are_normalized() {
    let n = 1_000_000;
    // every base model is unit mean; 3σ tolerance from the gain variance
    let cases: Vec<(FadingModel, f64, f64)> = vec![
        (FadingModel::rayleigh(), 1.0, 1.0),
        (FadingModel::rician(15.0).unwrap(), 1.0, 0.14),
        (FadingModel::twdp(12.0, 0.7).unwrap(), 1.0, 0.35),
        (FadingModel::cascaded(), 1.0, 2.2),
        // MRC sums four unit-mean branches
        (
            FadingModel::rician(10.0).unwrap().with_mrc(4).unwrap(),
            4.0,
            0.6,
        ),
    ];
    for (i, (model, mean, sd)) in cases.into_iter().enumerate() {
        let s = sample_seeded(&model, 2000 + i as u64, n).unwrap();
        let m = s.iter().sum::<f64>() / n as f64;
        let tol = 3.0 * sd / (n as f64).sqrt();
        assert!(
            (m - mean).abs() < tol,
            "{model:?}: sample mean {m} vs {mean} (tol {tol})"
        );
    }
}

#[test]
fn twdp_with_zero_imbalance_is_rician() {
    let rice = FadingModel::rician(12.0).unwrap();
    let twdp = FadingModel::twdp(12.0, 0.0).unwrap();
    for i in 0..15 {
        let t = 10f64.powf(-2.0 + 2.5 * i as f64 / 14.0);
        let (pr, pt) = (rice.pdf(t).unwrap(), twdp.pdf(t).unwrap());
        let (cr, ct) = (rice.cdf(t).unwrap(), twdp.cdf(t).unwrap());
        assert!((pr - pt).abs() <= 1e-9 * pr.max(1.0), "pdf at t={t}");
        assert!((cr - ct).abs() <= 1e-9 * cr.max(1e-12), "cdf at t={t}");
    }

    // two-sample KS between TWDP(K=12, Δ=0) and Rician(K=12) draws, 1% level
    let n = 100_000;
    let mut a = sample_seeded(&twdp, 31, n).unwrap();
    let mut b = sample_seeded(&rice, 37, n).unwrap();
    a.sort_unstable_by(f64::total_cmp);
    b.sort_unstable_by(f64::total_cmp);
    let mut d: f64 = 0.0;
    let (mut i, mut j) = (0usize, 0usize);
    while i < n && j < n {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / n as f64).abs());
    }
    let crit = 1.6276 * (2.0 / n as f64).sqrt();
    assert!(d < crit, "two-sample KS {d:.4e} exceeds {crit:.4e}");
}

#[test]
fn base_point_examples() {
    // densities and CDFs at the pinned example points
    assert_eq!(FadingModel::rayleigh().pdf(0.0).unwrap(), 1.0);
    for t in [0.1, 1.0, 3.0] {
        let rice0 = FadingModel::rician(0.0).unwrap().pdf(t).unwrap();
        let ray = FadingModel::rayleigh().pdf(t).unwrap();
        assert!(((rice0 - ray) / ray).abs() < 1e-12, "t={t}");
    }
    for (_, model) in figure_models() {
        assert_eq!(model.cdf(0.0).unwrap(), 0.0, "{model:?}");
    }
}

#[test]
fn distributions_have_unit_mass_and_saturating_cdf() {
    // ∫ pdf = 1 by quadrature (substituting t = u² tames the cascaded
    // model's log singularity at the origin) and the CDF saturates
    let rule = odo_core::specfun::gauss_legendre(384).unwrap();
    for (name, model) in figure_models() {
        let t_end: f64 = 200.0;
        let mass = rule.integrate(0.0, 1.5, |u| model.pdf(u * u).unwrap() * 2.0 * u)
            + rule.integrate(1.5, t_end.sqrt(), |u| model.pdf(u * u).unwrap() * 2.0 * u);
        assert!((mass - 1.0).abs() < 1e-6, "{name} {model:?}: mass = {mass}");
        let tail = model.cdf(t_end).unwrap();
        assert!(
            (tail - 1.0).abs() < 1e-9,
            "{name} {model:?}: cdf(200) = {tail}"
        );
    }
}

#[test]
fn rician_cdf_matches_large_sample_ecdf_at_the_operating_gain() {
    // K = 15, R = 1.7, Ω₀ = 10 dB: ECDF of 10⁷ draws within 3 binomial SE
    let model = FadingModel::rician(15.0).unwrap();
    let t = (2f64.powf(1.7) - 1.0) / 10.0;
    let n = 10_000_000;
    let samples = sample_seeded(&model, 271, n).unwrap();
    let count = samples.iter().filter(|&&g| g <= t).count();
    let ecdf = count as f64 / n as f64;
    let cdf = model.cdf(t).unwrap();
    let se = (cdf * (1.0 - cdf) / n as f64).sqrt();
    assert!(
        (ecdf - cdf).abs() < 3.0 * se,
        "ecdf {ecdf:.6e} vs cdf {cdf:.6e} (3se = {:.2e})",
        3.0 * se
    );
}

#[test]
fn sc_composition_is_exact() {
    let base = FadingModel::rician(10.0).unwrap();
    let sc = base.with_sc(4).unwrap();
    for &t in &[0.01, 0.2, 1.0, 3.0] {
        let lhs = sc.cdf(t).unwrap();
        let rhs = base.cdf(t).unwrap().powi(4);
        assert!(
            (lhs - rhs).abs() <= 1e-15 * rhs.max(f64::MIN_POSITIVE),
            "t={t}: {lhs} vs {rhs}"
        );
    }
}

#[test]
fn invalid_models_are_rejected() {
    assert!(matches!(
        FadingModel::twdp(12.0, 0.7).unwrap().with_mrc(4),
        Err(OdoError::UnsupportedModel(_))
    ));
    assert!(FadingModel::cascaded().with_mrc(2).is_err());
    assert!(FadingModel::twdp(12.0, 1.5).is_err());
    assert!(FadingModel::twdp(-1.0, 0.5).is_err());
    assert!(FadingModel::rician(f64::NAN).is_err());
    assert!(FadingModel::rayleigh().pdf(-0.5).is_err());
    assert!(FadingModel::rayleigh().with_sc(0).is_err());
}

#[test]
fn model_json_schema_round_trips() {
    let model = FadingModel::rician(15.0).unwrap().with_mrc(4).unwrap();
    let json = serde_json::to_value(model).unwrap();
    assert_eq!(
        json,
        serde_json::json!({
            "kind": "rician",
            "K": 15.0,
            "delta": null,
            "combining": {"type": "mrc", "N": 4}
        })
    );
    let back: FadingModel = serde_json::from_value(json).unwrap();
    assert_eq!(back, model);

    let twdp = FadingModel::twdp(12.0, 0.3).unwrap();
    let back: FadingModel = serde_json::from_str(&serde_json::to_string(&twdp).unwrap()).unwrap();
    assert_eq!(back, twdp);

    // deserialization enforces the same validation as construction
    let bad = serde_json::json!({
        "kind": "twdp", "K": 12.0, "delta": 0.3,
        "combining": {"type": "mrc", "N": 4}
    });
    assert!(serde_json::from_value::<FadingModel>(bad).is_err());
}

#[test]
fn split_streams_are_independent_and_reproducible() {
    let model = FadingModel::rayleigh();
    let mut s1 = SampleStream::split(99, 1);
    let mut s2 = SampleStream::split(99, 1);
    for _ in 0..100 {
        assert_eq!(model.draw(&mut s1), model.draw(&mut s2));
    }
    // different stream indices decorrelate
    let a: Vec<f64> = {
        let mut s = SampleStream::split(99, 1);
        (0..1000).map(|_| model.draw(&mut s)).collect()
    };
    let b: Vec<f64> = {
        let mut s = SampleStream::split(99, 2);
        (0..1000).map(|_| model.draw(&mut s)).collect()
    };
    assert_ne!(a, b);
    // chunked parallel sampling equals itself across calls
    let x = sample_seeded(&model, 77, 200_000).unwrap();
    let y = sample_seeded(&model, 77, 200_000).unwrap();
    assert_eq!(x, y);
}

#[test]
fn gain_distribution_trait_matches_inherent_methods() {
    let model = FadingModel::twdp(12.0, 0.7).unwrap();
    let dist: &dyn GainDistribution = &model;
    assert_eq!(dist.support_min(), 0.0);
    assert_eq!(dist.cdf(0.4).unwrap(), model.cdf(0.4).unwrap());
    assert_eq!(dist.pdf(0.4).unwrap(), model.pdf(0.4).unwrap());
    assert!(matches!(model.kind(), FadingKind::Twdp { .. }));
    assert!(model.combining().is_none());
}
