use std::path::Path;

use nalgebra::Matrix3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use sicforge::io::{
    to_json_string, DensityMatrixJson, SearchStateJson, SicMeta, SicSetJson, SymbolJson, TensorJson,
    ResidualTable,
};
use sicforge::qmat::random::random_orthogonal;
use sicforge::qmat::{matrix_units, validate_density_matrix, ComplexMatrix, Spin};
use sicforge::qubitlab::{
    canonical_sic, casimir_check, intertwine, intertwining_closed_form_residuals, lie_structure, mub_report,
    qubit_closed_forms, QubitSicParam,
};
use sicforge::sic::{
    check_t_relations, higher_products, kernel_route_residuals, sic_scheme, triple_products, verify as verify_set, SicSet,
    VerificationReport, FIVE_PRODUCT_SAMPLES,
};
use sicforge::sicsearch::{build_candidate, optimize_with, sequential_rotations, GramFactors, SearchConfig};
use sicforge::spintomo::{continuous_scheme, fnr_directions, fnr_scheme, quadrature_grid, DEFAULT_DIRECTION_SEED};
use sicforge::starprod::{check_assoc3, check_assoc4, dual_kernel, kernel, symbol, Scheme};
use sicforge::{Error, Result};

use crate::manifest::ManifestBuilder;
use crate::{Method, SchemeKind};

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    VerifyFailed = 1,
    InputError = 2,
    NotConverged = 3,
}

const DEFAULT_TOL: f64 = 1e-10;

struct Outcome {
    status: Status,
    result: Value,
    residuals: ResidualTable,
}

/// Runs `body`, then writes the manifest whatever happened. Errors become
/// exit code 2, or 1 for sets that fail verification.
fn run(out: &Path, command: &str, config: Value, seed: Option<u64>, body: impl FnOnce() -> Result<Outcome>) -> Result<Status> {
    std::fs::create_dir_all(out)?;
    let manifest = ManifestBuilder::start(command, config, seed);
    let outcome = body().unwrap_or_else(|e| {
        eprintln!("error: {e}");
        let status = if matches!(e, Error::Unverified(_)) { Status::VerifyFailed } else { Status::InputError };
        Outcome { status, result: json!({ "error": e.to_string() }), residuals: ResidualTable::default() }
    });
    manifest.finish(out, outcome.status as u8, outcome.result, outcome.residuals)?;
    Ok(outcome.status)
}

fn write(out: &Path, name: &str, text: &str) -> Result<()> {
    std::fs::write(out.join(name), text)?;
    Ok(())
}

fn read_set(path: &Path) -> Result<SicSetJson> {
    SicSetJson::parse(&std::fs::read_to_string(path)?)
}

fn verification_rows(table: &mut ResidualTable, r: &VerificationReport) {
    for (name, value) in r.conditions() {
        table.push(name, value, Some(r.tolerance));
    }
    for (k, v) in r.trace_powers.iter().enumerate() {
        table.push(format!("trace_power_{}", k + 1), *v, Some(r.tolerance));
    }
    table.push("completeness", r.completeness, Some(r.tolerance));
}

fn print_table(table: &ResidualTable) {
    for row in &table.rows {
        let mark = match (row.tolerance, row.pass()) {
            (None, _) => "info",
            (_, true) => "ok",
            (_, false) => "FAIL",
        };
        println!("  {:<34} {:>10.3e}  {mark}", row.name, row.value);
    }
}

fn verify_body(path: &Path, tol: Option<f64>, out: &Path) -> Result<Outcome> {
    let file = read_set(path)?;
    let tol = tol.or(file.meta.tolerance).unwrap_or(DEFAULT_TOL);
    let report = verify_set(&file.matrices()?, tol)?;
    let mut table = ResidualTable::default();
    verification_rows(&mut table, &report);
    write(out, "residuals.csv", &table.to_csv())?;
    println!("verify {} (d = {}, tol {tol:e})", path.display(), file.dim);
    print_table(&table);
    println!("{}", if report.pass { "PASS" } else { "FAIL" });
    Ok(Outcome {
        status: if report.pass { Status::Ok } else { Status::VerifyFailed },
        result: json!({ "dim": file.dim, "pass": report.pass, "tolerance": tol, "max_residual": report.max_residual() }),
        residuals: table,
    })
}

pub fn verify(path: &Path, tol: Option<f64>, out: &Path) -> Result<Status> {
    let config = json!({ "path": path.display().to_string(), "tol": tol });
    run(out, "verify", config, None, || verify_body(path, tol, out))
}

pub fn search(
    dim: usize,
    method: Method,
    seed: u64,
    restarts: usize,
    budget: usize,
    tol: f64,
    out: &Path,
) -> Result<Status> {
    let cfg = SearchConfig { seed, restarts, max_iterations: budget, tol_obj: tol, verify_tol: tol, ..Default::default() };
    let method_name = match method {
        Method::Optimize => "optimize",
        Method::Sequential => "sequential",
    };
    let config = json!({ "dim": dim, "method": method_name, "search": &cfg });
    run(out, "search", config, Some(seed), || {
        if dim < 2 {
            return Err(Error::Invalid(format!("dimension must be at least 2, got {dim}")));
        }
        let gf = GramFactors::with_seed(dim, cfg.direction_seed)?;
        let state = match method {
            Method::Optimize => optimize_with(&gf, &cfg)?,
            Method::Sequential => sequential_rotations(&gf, &cfg)?,
        };
        let candidate = build_candidate(&gf, &state.qtilde)?;
        let report = verify_set(&candidate, tol)?;
        let meta = SicMeta { source: format!("search:{method_name}"), seed: Some(seed), tolerance: Some(tol) };
        write(out, "sic.json", &SicSetJson::from_matrices(&candidate, meta).to_json()?)?;
        write(out, "state.json", &to_json_string(&SearchStateJson::new(&state, method_name, &cfg))?)?;

        let mut table = ResidualTable::default();
        table.push("objective_gap", state.gap(), Some(tol));
        table.push("matrix_equation", state.residual_matrix_eq, None);
        verification_rows(&mut table, &report);
        if let Some(step) = state.failed_step {
            table.push(format!("failed_step_{step}"), state.step_residuals.last().copied().unwrap_or(f64::NAN), None);
        }
        write(out, "residuals.csv", &table.to_csv())?;

        let ok = state.converged && report.pass;
        println!(
            "search d = {dim} ({method_name}): objective {:.12} of {}, {} iterations, {}",
            state.objective,
            dim * dim,
            state.iterations,
            if ok { "converged" } else { "not converged" }
        );
        if let Some(step) = state.failed_step {
            println!("  sequential construction failed at step {step}");
        }
        Ok(Outcome {
            status: if ok { Status::Ok } else { Status::NotConverged },
            result: json!({
                "objective": state.objective,
                "converged": state.converged,
                "iterations": state.iterations,
                "restart_seed": state.seed,
                "verified": report.pass,
                "failed_step": state.failed_step,
            }),
            residuals: table,
        })
    })
}

pub fn kernels(path: &Path, tol: Option<f64>, out: &Path) -> Result<Status> {
    let config = json!({ "path": path.display().to_string(), "tol": tol });
    run(out, "kernels", config, None, || {
        let file = read_set(path)?;
        let tol = tol.or(file.meta.tolerance).unwrap_or(DEFAULT_TOL);
        let matrices = file.matrices()?;
        let report = verify_set(&matrices, tol)?;
        let mut table = ResidualTable::default();
        verification_rows(&mut table, &report);
        if !report.pass {
            write(out, "residuals.csv", &table.to_csv())?;
            print_table(&table);
            println!("input set fails verification at {tol:e}");
            return Ok(Outcome {
                status: Status::VerifyFailed,
                result: json!({ "verified": false, "tolerance": tol }),
                residuals: table,
            });
        }
        let set = SicSet::new(matrices, tol)?;
        let scheme = sic_scheme(&set);
        let k = kernel(&scheme);
        let kd = dual_kernel(&scheme);
        let t = triple_products(&set);
        write(out, "kernel.json", &to_json_string(&TensorJson::from_kernel(&k))?)?;
        write(out, "kernel_dual.json", &to_json_string(&TensorJson::from_kernel(&kd))?)?;
        write(out, "triple_products.json", &to_json_string(&TensorJson::from_triple_products(&t, scheme.label()))?)?;

        let id_tol = Some(10.0 * tol);
        table.push("assoc3", check_assoc3(&k), id_tol);
        table.push("assoc4", check_assoc4(&k), id_tol);
        table.push("assoc3_dual", check_assoc3(&kd), id_tol);
        table.push("assoc4_dual", check_assoc4(&kd), id_tol);
        let rel = check_t_relations(&t);
        table.push("t_symmetry", t.symmetry_residual(), id_tol);
        table.push("t_three_index", rel.three, id_tol);
        table.push("t_four_index_first", rel.four_first, id_tol);
        table.push("t_four_index_second", rel.four_second, id_tol);
        table.push("t_four_index_first_inverted_prefactor", rel.four_first_inverted_prefactor, None);
        table.push("t_four_index_second_inverted_prefactor", rel.four_second_inverted_prefactor, None);
        let h = higher_products(&set, FIVE_PRODUCT_SAMPLES, 1);
        table.push("four_product", h.four_product, id_tol);
        table.push("five_product", h.five_product, id_tol);
        let (kr, kdr) = kernel_route_residuals(&set);
        table.push("kernel_from_t", kr, id_tol);
        table.push("kernel_dual_from_t", kdr, id_tol);
        let lie = lie_structure(&set);
        table.push("lie_expansion", lie.residual, id_tol);
        table.push("lie_antisymmetry", lie.antisymmetry, id_tol);
        let mut result = json!({ "dim": set.dim(), "verified": true, "tolerance": tol });
        if set.dim() == 2 {
            let c = casimir_check(&set)?;
            table.push("casimir_c1", c.c1_norm, id_tol);
            table.push("casimir_c2_closed_form", c.c2_closed_form, id_tol);
            table.push("casimir_commutators", c.casimir_commutators, id_tol);
            for (k, v) in c.final_relation.iter().enumerate() {
                table.push(format!("final_relation_{}", k + 1), *v, id_tol);
            }
            result["lie_sign"] = json!(lie.qubit_sign.map(|s| s.0));
            result["h_plus_minus_coefficient"] = json!(c.h_plus_minus.0);
        }
        write(out, "residuals.csv", &table.to_csv())?;
        println!("kernels for {} (d = {})", path.display(), set.dim());
        print_table(&table);
        let pass = table.pass();
        println!("{}", if pass { "PASS" } else { "FAIL" });
        result["pass"] = json!(pass);
        Ok(Outcome { status: if pass { Status::Ok } else { Status::VerifyFailed }, result, residuals: table })
    })
}

fn build_scheme(kind: SchemeKind, dim: usize, sic: Option<&Path>) -> Result<Scheme> {
    let spin = Spin::from_dim(dim)?;
    match kind {
        SchemeKind::Sic => {
            let set = match sic {
                Some(path) => {
                    let file = read_set(path)?;
                    if file.dim != dim {
                        return Err(Error::DimensionMismatch { expected: dim, got: file.dim });
                    }
                    SicSet::new(file.matrices()?, file.meta.tolerance.unwrap_or(DEFAULT_TOL))?
                }
                None if dim == 2 => canonical_sic(),
                None => return Err(Error::Missing(format!("--sic file for the SIC scheme in dimension {dim}"))),
            };
            Ok(sic_scheme(&set))
        }
        SchemeKind::Spin => continuous_scheme(spin, 0),
        SchemeKind::Fnr => fnr_scheme(spin, &fnr_directions(spin, DEFAULT_DIRECTION_SEED)?),
        SchemeKind::Block => Ok(GramFactors::default_for(dim)?.block_scheme()),
    }
}

pub fn transform(
    state: &Path,
    from: SchemeKind,
    to: SchemeKind,
    sic: Option<&Path>,
    roundtrip: bool,
    tol: f64,
    out: &Path,
) -> Result<Status> {
    let config = json!({
        "state": state.display().to_string(),
        "from": format!("{from:?}").to_lowercase(),
        "to": format!("{to:?}").to_lowercase(),
        "sic": sic.map(|p| p.display().to_string()),
        "roundtrip": roundtrip,
        "tol": tol,
    });
    run(out, "transform", config, None, || {
        let rho: ComplexMatrix = DensityMatrixJson::parse(&std::fs::read_to_string(state)?)?;
        validate_density_matrix(&rho)?;
        let dim = rho.nrows();
        let src = build_scheme(from, dim, sic)?;
        let dst = build_scheme(to, dim, sic)?;
        let f = symbol(&rho, &src)?;
        let g = intertwine(&f, &src, &dst)?;
        write(out, "symbol.json", &to_json_string(&SymbolJson::new(&g, dst.points()))?)?;
        let mut table = ResidualTable::default();
        table.push("transform_vs_direct", g.max_abs_diff(&symbol(&rho, &dst)?), Some(tol));
        let mut result = json!({ "from": src.label(), "to": dst.label(), "points": dst.len() });
        if roundtrip {
            let err = intertwine(&g, &dst, &src)?.max_abs_diff(&f);
            table.push("roundtrip", err, Some(tol));
            result["roundtrip_error"] = json!(err);
            println!("round-trip error {err:.3e}");
        }
        write(out, "residuals.csv", &table.to_csv())?;
        println!("{} -> {}: {} values", src.label(), dst.label(), dst.len());
        let pass = table.pass();
        Ok(Outcome { status: if pass { Status::Ok } else { Status::VerifyFailed }, result, residuals: table })
    })
}

pub fn qubit_demo(tol: f64, out: &Path) -> Result<Status> {
    run(out, "qubit-demo", json!({ "tol": tol }), None, || {
        let t = Some(tol);
        let mut table = ResidualTable::default();
        let set = canonical_sic();
        let meta = SicMeta { source: "canonical".into(), seed: None, tolerance: Some(1e-12) };
        write(out, "sic.json", &SicSetJson::from_set(&set, meta).to_json()?)?;
        table.push("canonical_verify", set.verification().max_residual(), t);

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let q = random_orthogonal(3, &mut rng);
            let p = QubitSicParam::new(Matrix3::from_fn(|i, j| q[(i, j)]))?;
            worst = worst.max(verify_set(&p.projectors(), tol)?.max_residual());
        }
        table.push("random_r_verify", worst, t);

        let param = QubitSicParam::canonical();
        let forms = qubit_closed_forms(&param)?;
        table.push("t_closed_form", forms.t_residual, t);
        table.push("k_closed_form", forms.k_residual, t);
        table.push("k_dual_closed_form", forms.k_dual_residual, t);
        table.push("k_short_form", forms.k_short_form_residual, None);

        let half = Spin::from_twice(1);
        let sic = sic_scheme(&set);
        let spin = continuous_scheme(half, 0)?;
        let spin_dirs: Vec<_> = quadrature_grid(half, 0)?.into_iter().map(|(d, _)| d).collect();
        let ds = fnr_directions(half, DEFAULT_DIRECTION_SEED)?;
        let fnr = fnr_scheme(half, &ds)?;
        let closed = intertwining_closed_form_residuals(&param, &sic, &spin, &spin_dirs, &fnr, &ds.directions)?;
        for (name, v) in ["spin_to_sic", "sic_to_spin", "fnr_to_sic", "sic_to_fnr"].iter().zip(closed) {
            table.push(format!("intertwiner_{name}"), v, t);
        }
        let mut round: f64 = 0.0;
        for unit in matrix_units(2) {
            for other in [&spin, &fnr] {
                for (a, b) in [(&sic, other), (other, &sic)] {
                    let f = symbol(&unit, a)?;
                    round = round.max(intertwine(&intertwine(&f, a, b)?, b, a)?.max_abs_diff(&f));
                }
            }
        }
        table.push("intertwining_round_trip", round, t);

        let mub = mub_report();
        table.push("mub_intra", mub.intra.iter().fold(0.0, |a: f64, v| a.max(v.abs())), t);
        table.push("mub_cross", mub.cross_residual, t);
        table.push("mub_octahedron", mub.octahedron_residual, t);

        let lie = lie_structure(&set);
        table.push("lie_expansion", lie.residual, t);
        let c = casimir_check(&set)?;
        table.push("casimir_c1", c.c1_norm, t);
        table.push("casimir_c2_closed_form", c.c2_closed_form, t);
        for (k, v) in c.final_relation.iter().enumerate() {
            table.push(format!("final_relation_{}", k + 1), *v, t);
        }
        table.push("h_plus_minus_fit", c.h_plus_minus.1, t);

        write(out, "residuals.csv", &table.to_csv())?;
        println!("qubit checks (tol {tol:e})");
        print_table(&table);
        println!("orientation of the canonical set: {}", forms.orientation);
        println!("Lie sign: {:?}", lie.qubit_sign.map(|s| s.0));
        println!("[H+, H-] = {} H3", c.h_plus_minus.0);
        let pass = table.pass();
        println!("{}", if pass { "PASS" } else { "FAIL" });
        Ok(Outcome {
            status: if pass { Status::Ok } else { Status::VerifyFailed },
            result: json!({
                "orientation": forms.orientation,
                "lie_sign": lie.qubit_sign.map(|s| s.0),
                "h_plus_minus_coefficient": c.h_plus_minus.0,
                "mub_bloch": mub.bloch,
                "pass": pass,
            }),
            residuals: table,
        })
    })
}
