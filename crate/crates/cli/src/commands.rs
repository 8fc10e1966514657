//! Subcommand implementations. Each returns a [`Report`] holding the resolved
//! config, a JSON result and a human-readable table; rendering and exit
//! codes are decided by the binary.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Value};

use nilcurv_core::catalog;
use nilcurv_core::classification;
use nilcurv_core::curvature::{self, Curvature};
use nilcurv_core::deformation::{self, Extremal};
use nilcurv_core::exact;
use nilcurv_core::maxmin::{self, MaxMinConfig};
use nilcurv_core::sign_sets::{self, TwoPlane};
use nilcurv_core::NilpotentAlgebra;

use crate::acceptance::{self, CriterionId};
use crate::config::{self, input, CliError, RunConfig};

pub struct Report {
    pub config: RunConfig,
    pub result: Value,
    pub table: String,
    /// Set when a check performed by the command failed (exit code 1).
    pub failure: Option<String>,
}

#[derive(Serialize)]
struct Envelope<'a> {
    config: &'a RunConfig,
    result: &'a Value,
}

impl Report {
    fn ok(config: RunConfig, result: Value, table: String) -> Self {
        Report { config, result, table, failure: None }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&Envelope { config: &self.config, result: &self.result })
            .expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn render(&self) -> String {
        if self.config.json {
            self.to_json()
        } else {
            self.table.clone()
        }
    }
}

fn fmt_row(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.10}")).collect::<Vec<_>>().join("  ")
}

pub fn catalog_cmd(cfg: RunConfig, filter: Option<&str>, emit_dir: Option<&str>) -> Result<Report, CliError> {
    let entries = match filter {
        None => catalog::list_catalog(),
        Some(f) => catalog::list_filtered(f).ok_or_else(|| {
            CliError::Input(format!("unknown filter {f:?}; expected one of {}", catalog::FILTERS.join(", ")))
        })?,
    };
    if let Some(dir) = emit_dir {
        std::fs::create_dir_all(dir).map_err(input(dir))?;
    }
    let mut rows = Vec::new();
    let mut table = String::from("id                                  dim  class  center  two-step\n");
    for e in &entries {
        let file = emit_dir.map(|dir| {
            let stem: String =
                e.id().chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '=' { c } else { '_' }).collect();
            let stem = stem.trim_end_matches('_').to_string();
            std::path::Path::new(dir).join(format!("{stem}.json"))
        });
        if let Some(path) = &file {
            let mut text = e.algebra.to_json();
            text.push('\n');
            std::fs::write(path, text).map_err(input(&path.display().to_string()))?;
        }
        let f = &e.expected;
        let _ = writeln!(
            table,
            "{:<36}{:>3}{:>7}{:>8}  {}",
            e.id(),
            f.dim,
            f.nilpotency_class,
            f.center_dim,
            f.two_step
        );
        rows.push(json!({
            "id": e.id(),
            "key": e.key,
            "params": e.params,
            "expected": f,
            "file": file.map(|p| p.display().to_string()),
        }));
    }
    Ok(Report::ok(cfg, json!({ "entries": rows }), table))
}

pub fn check_cmd(cfg: RunConfig, alg: &NilpotentAlgebra) -> Result<Report, CliError> {
    let v = alg.validate();
    let center = alg.center().dim();
    let derived = alg.derived().dim();
    let result = json!({
        "dim": alg.dim(),
        "validation": v,
        "center_dim": center,
        "derived_dim": derived,
        "two_step": alg.is_two_step(),
    });
    let table = format!(
        "dim {}\njacobi {}\nnilpotent {} (class {:?})\nlower central series dims {:?}\ncenter dim {center}\nderived dim {derived}\ntwo-step {}\n",
        alg.dim(),
        v.jacobi_holds,
        v.nilpotent,
        v.nilpotency_class,
        v.series_dims,
        alg.is_two_step()
    );
    let failure = (!v.valid).then(|| {
        if v.jacobi_holds {
            "algebra is not nilpotent".to_string()
        } else {
            format!("Jacobi identity fails on {} basis triples", v.jacobi_violations.len())
        }
    });
    Ok(Report { config: cfg, result, table, failure })
}

fn require_valid(alg: &NilpotentAlgebra) -> Result<(), CliError> {
    let v = alg.validate();
    if v.valid {
        Ok(())
    } else {
        Err(CliError::Input(format!(
            "algebra is not a nilpotent Lie algebra (jacobi {}, nilpotent {})",
            v.jacobi_holds, v.nilpotent
        )))
    }
}

/// Default tolerance for the trace identity tr Ric = −¼Σ|[eᵢ,eⱼ]|².
pub const TRACE_TOL: f64 = 1e-10;

pub fn ric_cmd(cfg: RunConfig, alg: &NilpotentAlgebra, metric: Option<&str>) -> Result<Report, CliError> {
    require_valid(alg)?;
    let n = alg.dim();
    let g = config::load_metric(metric, n)?;
    let c = Curvature::new(alg, &g).map_err(input("metric"))?;
    let r = c.ricci_report();
    let trace: f64 = r.eigenvalues.iter().sum();
    let t = c.tensor();
    let mut bracket_sq = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                bracket_sq += t.get(i, j, k).powi(2);
            }
        }
    }
    let expected_trace = -0.25 * bracket_sq;
    let tol = cfg.tol.unwrap_or(TRACE_TOL);
    let trace_err = (trace - expected_trace).abs();
    let mut table = format!("Ricci eigenvalues (ascending)\n  {}\n", fmt_row(&r.eigenvalues));
    let _ = writeln!(table, "trace {trace:.12}  expected {expected_trace:.12}  |diff| {trace_err:.2e} (tol {tol:.0e})");
    let _ = writeln!(table, "max simple {}  min simple {}  (cluster tol {:.1e})", r.max_simple, r.min_simple, r.cluster_tol);
    let result = json!({
        "ricci": r,
        "trace": { "value": trace, "expected": expected_trace, "error": trace_err, "tol": tol },
    });
    let failure = (trace_err > tol).then(|| format!("trace identity off by {trace_err:e}"));
    Ok(Report { config: cfg, result, table, failure })
}

pub fn sect_cmd(cfg: RunConfig, alg: &NilpotentAlgebra, metric: Option<&str>, plane: &str) -> Result<Report, CliError> {
    require_valid(alg)?;
    let n = alg.dim();
    let g = config::load_metric(metric, n)?;
    let (x, y) = config::parse_plane(plane, n)?;
    let p = TwoPlane::new(&x, &y).map_err(input("plane"))?;
    let (xf, yf) = (p.x_f(), p.y_f());
    let c = Curvature::new(alg, &g).map_err(input("metric"))?;
    let k = c.sectional_k(&xf, &yf).map_err(input("plane"))?;
    let kappa = c.sectional_kappa(&xf, &yf).map_err(input("plane"))?;
    let tol = cfg.tol.unwrap_or(sign_sets::STRICT);
    let sign = if k > tol {
        "positive"
    } else if k < -tol {
        "negative"
    } else {
        "zero"
    };
    let table = format!("K(σ) = {k:.12}\nκ(x,y) = {kappa:.12}\nsign {sign} (tol {tol:.0e})\n");
    let result = json!({ "plane": p.to_json_value(), "K": k, "kappa": kappa, "sign": sign, "tol": tol });
    Ok(Report::ok(cfg, result, table))
}

/// Default tolerance on ‖2e^{−td}ric_t − Φ⁰‖∞ at the check time.
pub const LIMIT_TOL: f64 = 1e-6;

pub struct DeformArgs<'a> {
    pub spec: &'a str,
    pub t: Option<f64>,
    pub trace_csv: Option<&'a str>,
    pub min: bool,
}

pub fn deform_cmd(cfg: RunConfig, alg: &NilpotentAlgebra, args: &DeformArgs) -> Result<Report, CliError> {
    require_valid(alg)?;
    let spec = config::load_spec(args.spec, alg.dim())?;
    let lim = deformation::scaled_ricci_limit(alg, &spec).map_err(input("deformation"))?;
    let tol = cfg.tol.unwrap_or(LIMIT_TOL);
    let t = args.t.unwrap_or(40.0 / lim.gap);
    let err = deformation::limit_error(&lim, spec.lambdas(), t).map_err(input("deformation"))?;
    let phi0_eigs = curvature::sorted_symmetric_eigen(&lim.phi0_matrix()).0;
    let mut table = format!("d = {}  gap = {}\n", lim.d, lim.gap);
    let _ = writeln!(table, "‖2e^(-td) ric_t − Φ⁰‖∞ at t = {t}: {err:.3e} (tol {tol:.0e})");
    let _ = writeln!(table, "eig Φ⁰: {}", fmt_row(&phi0_eigs));
    let mut result = json!({
        "limit": lim,
        "phi0_eigenvalues": phi0_eigs,
        "limit_check": { "t": t, "error": err, "tol": tol },
        "block_eigenvalues": lim.block_eigenvalues(),
    });
    let mut failure = (err > tol).then(|| format!("limit error {err:e} exceeds {tol:e}"));
    if lim.block.is_some() {
        let mut cand = deformation::extremal_t(&lim).map_err(input("deformation"))?;
        if args.min {
            cand.extremal = Extremal::Min;
        }
        let _ = writeln!(table, "extremal T = {}", fmt_row(&cand.t));
        result["candidate"] = serde_json::to_value(&cand).expect("serializable");
        if !cand.zero && cand.simple {
            let grid = deformation::default_t_grid(spec.lambdas());
            let tr = deformation::convergence_check(alg, &spec, &cand, &grid).map_err(input("deformation"))?;
            let _ = writeln!(table, "projective distance on grid:");
            for r in &tr.rows {
                let _ = writeln!(table, "  t = {:>6}  d = {:.3e}", r.t, r.proj_distance);
            }
            let _ = writeln!(table, "converged from {:?} (tol {:.0e})", tr.converged_from, tr.tol);
            if let Some(path) = args.trace_csv {
                std::fs::write(path, tr.to_csv()).map_err(input(path))?;
            }
            if !tr.converged() && failure.is_none() {
                failure = Some(format!("extremal direction did not converge (final distance {:e})", tr.final_distance()));
            }
            result["trace"] = serde_json::to_value(&tr).expect("serializable");
        } else {
            let _ = writeln!(table, "candidate is zero or its eigenvalue is not simple; no trace");
        }
    }
    Ok(Report { config: cfg, result, table, failure })
}

pub fn signsets_cmd(
    cfg: RunConfig,
    alg: &NilpotentAlgebra,
    vector: Option<&str>,
    plane: Option<&str>,
) -> Result<Report, CliError> {
    require_valid(alg)?;
    let n = alg.dim();
    let seed = cfg.seed;
    let (result, table, failure) = match (vector, plane) {
        (Some(v), None) => {
            let x = config::parse_vector(v, n)?;
            let label = sign_sets::classify_ric_vector(alg, &x).map_err(input("vector"))?;
            let mut witnesses = Vec::new();
            let mut notes = Vec::new();
            let mut failure = None;
            if !exact::is_zero_vec(&x) && !alg.is_abelian() {
                if label != sign_sets::VectorLabel::GPos {
                    match sign_sets::find_positive_ric_witness(alg, &x, seed) {
                        Ok(w) => witnesses.push(w),
                        Err(e) => notes.push(format!("positive witness: {e}")),
                    }
                }
                if label == sign_sets::VectorLabel::Outside {
                    match sign_sets::find_negative_ric_witness(alg, &x, seed) {
                        Ok(w) => witnesses.push(w),
                        Err(e) => notes.push(format!("negative witness: {e}")),
                    }
                }
            }
            for w in &witnesses {
                if let Err(e) = w.verify(alg) {
                    failure = Some(format!("witness did not verify: {e}"));
                }
            }
            let mut table = format!("label {}\n", label.as_str());
            for w in &witnesses {
                let _ = writeln!(table, "witness {:?} value {:.6e} ({})", w.kind, w.value, w.source);
            }
            for note in &notes {
                let _ = writeln!(table, "{note}");
            }
            let result = json!({
                "labels": [label.as_str()],
                "witnesses": witnesses.iter().map(|w| w.to_json_value()).collect::<Vec<_>>(),
                "notes": notes,
                "strict_tol": sign_sets::STRICT,
            });
            (result, table, failure)
        }
        (None, Some(p)) => {
            let (x, y) = config::parse_plane(p, n)?;
            let sigma = TwoPlane::new(&x, &y).map_err(input("plane"))?;
            let labels = sign_sets::classify_plane(alg, &sigma).map_err(input("plane"))?;
            let (witness, note) = match sign_sets::plane_witness(alg, &sigma, seed) {
                Ok(w) => (w, None),
                Err(e) => (None, Some(e.to_string())),
            };
            let failure = witness.as_ref().and_then(|w| w.verify(alg).err()).map(|e| format!("witness did not verify: {e}"));
            let mut table = format!("labels {}\n", labels.labels().join(" "));
            if let Some(w) = &witness {
                let _ = writeln!(table, "witness {:?} value {:.6e} ({})", w.kind, w.value, w.source);
            }
            if let Some(n) = &note {
                let _ = writeln!(table, "{n}");
            }
            let result = json!({
                "labels": labels.labels(),
                "flags": labels,
                "g2_extension": labels.g2_extension.as_ref().map(|v| v.iter().map(exact::format_rational).collect::<Vec<_>>()),
                "witnesses": witness.iter().map(|w| w.to_json_value()).collect::<Vec<_>>(),
                "notes": note.into_iter().collect::<Vec<_>>(),
                "strict_tol": sign_sets::STRICT,
            });
            (result, table, failure)
        }
        _ => return Err(CliError::Input("give exactly one of --vector or --plane".into())),
    };
    Ok(Report { config: cfg, result, table, failure })
}

pub fn classify_cmd(cfg: RunConfig, alg: &NilpotentAlgebra) -> Result<Report, CliError> {
    require_valid(alg)?;
    let v = classification::classify(alg, cfg.samples, cfg.seed);
    let mut table = String::new();
    let _ = writeln!(table, "rk5 {} ({})", v.rk5.holds, v.rk5.status);
    let _ = writeln!(table, "rk7 {} ({})", v.rk7.holds, v.rk7.status);
    let _ = writeln!(table, "two-step {}", v.two_step);
    let _ = writeln!(table, "codim-1 abelian ideal {}", v.codim1_abelian.is_some());
    match &v.lemma6 {
        Ok(l) => {
            let _ = writeln!(table, "small-L class {:?} (max dim L {})", l.class, l.max_dim_l);
        }
        Err(e) => {
            let _ = writeln!(table, "small-L class: {e}");
        }
    }
    match &v.lemma7 {
        Ok(l) => {
            let _ = writeln!(table, "dim-L-5 classes {:?}", l.classes);
        }
        Err(e) => {
            let _ = writeln!(table, "dim-L-5 classes: {e}");
        }
    }
    let _ = writeln!(table, "closure of Ricci-maximal directions: case {:?}", v.expected_m_case);
    let result = serde_json::to_value(&v).expect("serializable");
    Ok(Report::ok(cfg, result, table))
}

pub fn maxmin_cmd(cfg: RunConfig, alg: &NilpotentAlgebra, resolution: f64, runs: usize) -> Result<Report, CliError> {
    require_valid(alg)?;
    let mc = MaxMinConfig { samples: cfg.samples, seed: cfg.seed, resolution, convergence_runs: runs };
    let r = maxmin::maxmin(alg, &mc);
    let mut table = format!("case {:?}\nRicci identically zero {}\n", r.case, r.ricci_identically_zero);
    for (name, side) in [("max", &r.max), ("min", &r.min)] {
        let c = &side.coverage;
        let _ = writeln!(
            table,
            "{name}: {} candidates ({} failures) via {:?}\n  coverage {}/{} probes at resolution {} ({:.1}%), max distance outside {:.1e}",
            side.generated,
            side.failures,
            side.constructions,
            c.covered,
            c.probes,
            c.resolution,
            100.0 * c.fraction,
            c.max_outside
        );
        for s in &side.convergence {
            let _ = writeln!(
                table,
                "  {}: final distance {:.2e}, converged from {:?} (tol {:.0e})",
                s.construction, s.final_distance, s.converged_from, s.tol
            );
        }
        for note in &side.notes {
            let _ = writeln!(table, "  {note}");
        }
    }
    let result = serde_json::to_value(&r).expect("serializable");
    Ok(Report::ok(cfg, result, table))
}

pub fn verify_paper_cmd(cfg: RunConfig, only: Option<&str>) -> Result<Report, CliError> {
    let ids = match only {
        None => CriterionId::ALL.to_vec(),
        Some(s) => CriterionId::parse_list(s).map_err(CliError::Input)?,
    };
    let results = acceptance::run_all(&ids, cfg.seed);
    let mut table = String::new();
    for r in &results {
        let _ = writeln!(table, "{}", r.line());
    }
    let failed: Vec<String> =
        results.iter().filter(|r| !r.passed || !r.within_budget()).map(|r| format!("{} {}", r.id, r.name)).collect();
    let _ = writeln!(table, "{} of {} criteria passed", results.len() - failed.len(), results.len());
    let result = json!({ "criteria": results, "all_passed": failed.is_empty() });
    let failure = (!failed.is_empty()).then(|| format!("failed: {}", failed.join(", ")));
    Ok(Report { config: cfg, result, table, failure })
}
