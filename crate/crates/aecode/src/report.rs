//! JSON documents for the operator property checks.

use aecode_core::props::{product_polynomial_fits, symmetry_relations, FitOutcome, PairFit};
use aecode_core::{HalfInt, Result};
use serde_json::{json, Value as Json};

fn fit_json(f: &PairFit) -> Json {
    let (outcome, degree, coefficients) = match &f.outcome {
        FitOutcome::Fits(p) => ("fits", p.degree(), p.coefficients().iter().map(ToString::to_string).collect()),
        FitOutcome::StructurallyZero => ("structurally_zero", None, Vec::new()),
        FitOutcome::TooFewPoints => ("too_few_points", None, Vec::new()),
        FitOutcome::Fails => ("fails", None, Vec::new()),
    };
    json!({
        "a": f.a.to_string(),
        "b": f.b.to_string(),
        "degree_bound": f.degree_bound,
        "points": f.points,
        "outcome": outcome,
        "degree": degree,
        "coefficients": coefficients,
    })
}

/// Product-polynomial fits on `ell0` up to order `n` and the adjoint
/// symmetries for `J = 1..=j_max`.
pub fn props_report(ell0: HalfInt, n: i64, j_max: i64) -> Result<(bool, Json)> {
    let fits = product_polynomial_fits(ell0, n)?;
    let symmetries = symmetry_relations(j_max)?;
    let count = |name: &str| fits.iter().filter(|f| fit_json(f)["outcome"] == name).count();
    let passed = fits.iter().all(PairFit::ok) && symmetries.iter().all(|s| s.holds);
    let doc = json!({
        "ell0_times_2": ell0.twice(),
        "n": n,
        "passed": passed,
        "summary": {
            "pairs": fits.len(),
            "fits": count("fits"),
            "structurally_zero": count("structurally_zero"),
            "too_few_points": count("too_few_points"),
            "fails": count("fails"),
            "symmetry_checks": symmetries.len(),
            "symmetry_failures": symmetries.iter().filter(|s| !s.holds).count(),
        },
        "fits": fits.iter().map(fit_json).collect::<Vec<_>>(),
        "symmetries": symmetries
            .iter()
            .map(|s| json!({ "relation": s.relation, "j_times_2": s.j.twice(), "delta_m": s.delta_m, "holds": s.holds }))
            .collect::<Vec<_>>(),
    });
    Ok((passed, doc))
}
