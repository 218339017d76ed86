//! Command pipelines and report emission. A report is one structured JSON
//! document: inputs echo, convention flags, parameters, results and
//! deterministic work counters (wall time is never written into reports so
//! identical inputs produce byte-identical output).

use crate::clifford::{self, CliffordRep};
use crate::expr::{self, Expr};
use crate::fields::{self, ModeFunction, QuadratureGrid};
use crate::geometry;
use crate::lambdarep::{self, CheckOptions, LambdaOperator};
use crate::liealg::{self, LieAlgebraModel};
use crate::linalg::Mat;
use crate::model::{self, FieldConfig, LoadedModel, ModeKind};
use crate::orbits;
use crate::ratio::{q_to_f64, Q};
use crate::semt;
use num_complex::Complex64;
use serde_json::{json, Map, Value};
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Validate,
    Geometry,
    Orbits,
    Casimirs,
    Defect,
    Lrep,
    Clifford,
    Fields,
    Semt,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Geometry => "geometry",
            Command::Orbits => "orbits",
            Command::Casimirs => "casimirs",
            Command::Defect => "defect",
            Command::Lrep => "lrep",
            Command::Clifford => "clifford",
            Command::Fields => "fields",
            Command::Semt => "semt",
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: Command,
    pub model_path: PathBuf,
    pub config_path: Option<PathBuf>,
    pub tol: f64,
    pub seed: u64,
    pub max_degree: u32,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Load(#[from] model::LoadError),
    #[error("{0}")]
    Structural(String),
}

/// Parsed `--config` document, shaped by the command that consumes it.
#[derive(Clone, Debug)]
pub enum CommandConfig {
    None,
    Fields(Box<FieldConfig>),
    Casimirs(model::CasimirsConfig),
}

impl CommandConfig {
    fn fields(&self) -> Option<&FieldConfig> {
        match self {
            CommandConfig::Fields(fc) => Some(fc),
            _ => None,
        }
    }
}

/// Load the config file in the shape the command expects.
pub fn load_config_for(
    command: Command,
    path: Option<&Path>,
) -> Result<CommandConfig, model::LoadError> {
    let Some(path) = path else {
        return Ok(CommandConfig::None);
    };
    Ok(match command {
        Command::Casimirs => CommandConfig::Casimirs(model::load_casimirs_config(path)?),
        _ => CommandConfig::Fields(Box::new(model::load_field_config(path)?)),
    })
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub report: Value,
    pub validation_failed: bool,
}

impl RunOutcome {
    /// Stable pretty rendering with a trailing newline.
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.report).expect("report serializes");
        s.push('\n');
        s
    }
}

fn q_str(x: &Q) -> Value {
    Value::String(x.to_string())
}

fn q_vec(xs: &[Q]) -> Value {
    Value::Array(xs.iter().map(q_str).collect())
}

fn q_mat(m: &Mat<Q>) -> Value {
    Value::Array(m.iter().map(|row| q_vec(row)).collect())
}

fn c64(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn c64_vec(zs: &[Complex64]) -> Value {
    Value::Array(zs.iter().map(|&z| c64(z)).collect())
}

fn c64_mat(m: &[Vec<Complex64>]) -> Value {
    Value::Array(m.iter().map(|row| c64_vec(row)).collect())
}

fn cmat(m: &clifford::CMat) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|r| Value::Array((0..m.ncols()).map(|c| c64(m[(r, c)])).collect()))
            .collect(),
    )
}

fn one_based(xs: &[usize]) -> Vec<usize> {
    xs.iter().map(|&i| i + 1).collect()
}

/// Run a command against a model file (and optional config file).
pub fn run(cfg: &RunConfig) -> Result<RunOutcome, RunError> {
    let loaded = model::load_model(&cfg.model_path)?;
    let config = load_config_for(cfg.command, cfg.config_path.as_deref())?;
    run_loaded(cfg, &loaded, &config)
}

/// Same as [`run`] but on pre-parsed documents (used by the bindings).
pub fn run_loaded(
    cfg: &RunConfig,
    loaded: &LoadedModel,
    config: &CommandConfig,
) -> Result<RunOutcome, RunError> {
    let field_config = config.fields();
    let model = &loaded.model;
    let mut results = Map::new();
    let mut counters = Map::new();
    let mut validation_failed = false;

    // Every command starts from a validated algebra.
    let validation = liealg::validate_algebra(model);
    if !validation.is_valid() && cfg.command != Command::Validate {
        let report =
            assemble(cfg, loaded, validation_report_value(model, &validation), counters, true);
        return Ok(RunOutcome { report, validation_failed: true });
    }

    match cfg.command {
        Command::Validate => {
            validation_failed = !validation.is_valid();
            results = match validation_report_value(model, &validation) {
                Value::Object(m) => m,
                _ => unreachable!(),
            };
        }
        Command::Geometry => {
            let metric_full = require_metric(loaded)?;
            match geometry::check_metric_invariance(model, metric_full) {
                Err(witnesses) => {
                    validation_failed = true;
                    results.insert("invariance_holds".into(), json!(false));
                    results.insert(
                        "invariance_witnesses".into(),
                        Value::Array(
                            witnesses
                                .iter()
                                .map(|(x, y, z)| json!([x + 1, y + 1, z + 1]))
                                .collect(),
                        ),
                    );
                }
                Ok(()) => {
                    results.insert("invariance_holds".into(), json!(true));
                    let metric = geometry::build_form_b(model, metric_full)
                        .map_err(|e| RunError::Structural(e.to_string()))?;
                    let conn = geometry::christoffel(model, &metric);
                    let curv = geometry::riemann(model, &conn, &metric);
                    results.insert("b_m".into(), q_mat(&metric.b_m));
                    results.insert("christoffel".into(), sparse_rank3(&conn.gamma));
                    results.insert("riemann".into(), sparse_rank4(&curv.riemann));
                    results.insert("ricci".into(), q_mat(&curv.ricci));
                    results.insert("scalar_curvature".into(), q_str(&curv.scalar));
                    let abs = if curv.scalar < Q::from_integer(0.into()) {
                        -curv.scalar.clone()
                    } else {
                        curv.scalar.clone()
                    };
                    results.insert("scalar_curvature_abs".into(), q_str(&abs));
                }
            }
        }
        Command::Orbits => {
            let ind = orbits::algebra_index(model, cfg.seed);
            results.insert("index".into(), json!(ind));
            let strata: Vec<Value> = orbits::stratify(model, cfg.seed)
                .iter()
                .map(|st| {
                    json!({
                        "s": st.s,
                        "orbit_dim": st.orbit_dim,
                        "witnesses": st.sample_points.iter().map(|p| q_vec(p)).collect::<Vec<_>>(),
                    })
                })
                .collect();
            results.insert("strata".into(), Value::Array(strata));
            let coord_ranks: Vec<Value> = (0..model.dim)
                .map(|i| {
                    let mut l = vec![Q::from_integer(0.into()); model.dim];
                    l[i] = Q::from_integer(1.into());
                    json!(orbits::orbit_rank(model, &l))
                })
                .collect();
            results.insert("coordinate_covector_ranks".into(), Value::Array(coord_ranks));
            counters.insert(
                "sample_covectors".into(),
                json!(orbits::sample_covectors(model, cfg.seed).len()),
            );
        }
        Command::Casimirs => {
            let cs = orbits::find_casimirs(model, cfg.max_degree, cfg.max_degree)
                .map_err(|e| RunError::Structural(e.to_string()))?;
            let all_verified = cs.iter().all(|c| orbits::verify_casimir(model, c).is_empty());
            results.insert(
                "casimirs".into(),
                Value::Array(
                    cs.iter()
                        .map(|c| json!({"polynomial": c.to_string(), "degree": c.degree()}))
                        .collect(),
                ),
            );
            results.insert("count".into(), json!(cs.len()));
            results.insert("reverified_exactly".into(), json!(all_verified));
            if let CommandConfig::Casimirs(cc) = config {
                if !cc.hyperplane_zeros.is_empty() {
                    if cc.hyperplane_zeros.iter().any(|&i| i == 0 || i > model.dim) {
                        return Err(RunError::Structural(
                            "hyperplane_zeros indices are 1-based and must be within dim".into(),
                        ));
                    }
                    let zeros: Vec<usize> = cc.hyperplane_zeros.iter().map(|&i| i - 1).collect();
                    let on = orbits::find_casimirs_on_hyperplane(
                        model,
                        cfg.max_degree,
                        cfg.max_degree,
                        &zeros,
                    )
                    .map_err(|e| RunError::Structural(e.to_string()))?;
                    results.insert(
                        "hyperplane_casimirs".into(),
                        json!({
                            "zeros": cc.hyperplane_zeros,
                            "casimirs": on.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                        }),
                    );
                }
            }
        }
        Command::Defect => {
            let r = orbits::defect(model, cfg.seed);
            results.insert("defect".into(), json!(r.defect));
            results.insert("sup_rank_full".into(), json!(r.sup_rank_full));
            results.insert("sup_rank_h_block".into(), json!(r.sup_rank_h_block));
            results.insert("witness_full".into(), q_vec(&r.witness_full));
            results.insert("witness_h_block".into(), q_vec(&r.witness_h_block));
        }
        Command::Lrep => {
            let outcome = run_lrep(cfg, loaded, field_config, &mut results, &mut counters)?;
            validation_failed = outcome;
        }
        Command::Clifford => {
            let metric_full = require_metric(loaded)?;
            let metric = geometry::build_form_b(model, metric_full)
                .map_err(|e| RunError::Structural(e.to_string()))?;
            let riemannian =
                field_config.map(|c| c.riemannian_clifford).unwrap_or(false);
            let spatial = clifford::spatial_form_from_metric(&metric.b_m, riemannian);
            let rep = CliffordRep::for_spacetime(spatial)
                .map_err(|e| RunError::Structural(e.to_string()))?;
            results.insert("rep_dim".into(), json!(rep.rep_dim()));
            results.insert(
                "anticommutation_residual".into(),
                json!(rep.anticommutation_residual()),
            );
            results.insert("gamma0".into(), cmat(&rep.gamma0));
            results.insert(
                "gammas".into(),
                Value::Array(rep.gammas.iter().map(cmat).collect()),
            );
            let conn = geometry::christoffel(model, &metric);
            let sc = clifford::spinor_connection(&conn, &rep)
                .map_err(|e| RunError::Structural(e.to_string()))?;
            results.insert(
                "spinor_connection".into(),
                Value::Array(sc.iter().map(cmat).collect()),
            );
            results.insert(
                "max_connection_trace".into(),
                json!(clifford::max_connection_trace(&sc)),
            );
        }
        Command::Fields => {
            validation_failed = run_fields(cfg, loaded, field_config, &mut results, &mut counters)?;
        }
        Command::Semt => {
            validation_failed = run_semt(cfg, loaded, field_config, &mut results, &mut counters)?;
        }
    }

    let report = assemble(cfg, loaded, Value::Object(results), counters, validation_failed);
    Ok(RunOutcome { report, validation_failed })
}

fn require_metric(loaded: &LoadedModel) -> Result<&Mat<Q>, RunError> {
    loaded
        .metric
        .as_ref()
        .ok_or_else(|| RunError::Structural("this command needs a `metric` in the model file".into()))
}

fn validation_report_value(model: &LieAlgebraModel, report: &liealg::ValidationReport) -> Value {
    let violations: Vec<Value> = report
        .violations
        .iter()
        .map(|v| {
            json!({
                "indices": v.indices_one_based(),
                "kind": match v {
                    liealg::Violation::Antisymmetry { .. } => "antisymmetry",
                    liealg::Violation::Jacobi { .. } => "jacobi",
                    liealg::Violation::SubalgebraClosure { .. } => "subalgebra_closure",
                },
                "message": v.to_string(),
            })
        })
        .collect();
    let traces = liealg::ad_trace_vector(model);
    json!({
        "valid": report.is_valid(),
        "violations": violations,
        "killing_form": q_mat(&liealg::killing_form(model)),
        "ad_traces": q_vec(&traces),
        "unimodular": traces.iter().all(|t| t == &Q::from_integer(0.into())),
    })
}

fn sparse_rank3(gamma: &[Mat<Q>]) -> Value {
    let mut out = Vec::new();
    for (a, mat) in gamma.iter().enumerate() {
        for (b, row) in mat.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                if v != &Q::from_integer(0.into()) {
                    out.push(json!({"a": a + 1, "b": b + 1, "c": c + 1, "value": v.to_string()}));
                }
            }
        }
    }
    Value::Array(out)
}

fn sparse_rank4(riemann: &[Vec<Mat<Q>>]) -> Value {
    let mut out = Vec::new();
    for (a, cube) in riemann.iter().enumerate() {
        for (b, mat) in cube.iter().enumerate() {
            for (c, row) in mat.iter().enumerate() {
                for (d, v) in row.iter().enumerate() {
                    if v != &Q::from_integer(0.into()) {
                        out.push(json!({
                            "a": a + 1, "b": b + 1, "c": c + 1, "d": d + 1,
                            "value": v.to_string(),
                        }));
                    }
                }
            }
        }
    }
    Value::Array(out)
}

struct OperatorSetup {
    ops: Vec<LambdaOperator>,
    bracket_sign: i32,
    transition_report: lambdarep::TransitionReport,
    beta: Option<Vec<Q>>,
    beta_applied: bool,
}

/// Validate the transition and build operators, honoring `bracket_sign` and
/// `apply_beta` from the config (falling back to the transition's declared
/// sign). Returns `None` when validation fails.
fn operator_setup(
    cfg: &RunConfig,
    loaded: &LoadedModel,
    field_config: Option<&FieldConfig>,
    casimirs: &[orbits::CasimirPolynomial],
) -> Result<(lambdarep::TransitionReport, Option<OperatorSetup>), RunError> {
    let transition = loaded.transition.as_ref().ok_or_else(|| {
        RunError::Structural("this command needs a `transition` in the model file".into())
    })?;
    let bracket_sign = field_config
        .and_then(|c| c.bracket_sign)
        .unwrap_or(loaded.transition_bracket_sign);
    let opts = CheckOptions { bracket_sign, tol: cfg.tol, seed: cfg.seed };
    let (report, validated) =
        lambdarep::validate_canonical_transition(&loaded.model, transition, casimirs, &opts)
            .map_err(|e| RunError::Structural(e.to_string()))?;
    let Some(validated) = validated else {
        return Ok((report, None));
    };
    let mut ops = lambdarep::build_operators(&validated);
    let apply_beta = field_config.map(|c| c.apply_beta).unwrap_or(false);
    let mut beta = None;
    let mut beta_applied = false;
    if let Some(pol) = &loaded.polarization {
        let b = lambdarep::quantum_shift_beta(&loaded.model, pol)
            .map_err(|e| RunError::Structural(e.to_string()))?;
        if apply_beta {
            ops = lambdarep::apply_beta_shift(&ops, &b);
            beta_applied = true;
        }
        beta = Some(b);
    } else if apply_beta {
        return Err(RunError::Structural(
            "apply_beta requires a `polarization` in the model file".into(),
        ));
    }
    Ok((
        report.clone(),
        Some(OperatorSetup { ops, bracket_sign, transition_report: report, beta, beta_applied }),
    ))
}

fn transition_report_value(r: &lambdarep::TransitionReport) -> Value {
    json!({
        "pass": r.pass,
        "structurally_zero": r.structurally_zero,
        "max_bracket_residual": r.max_bracket_residual,
        "base_bracket_residual": r.base_bracket_residual,
        "worst_pair": r.worst_pair.as_ref().map(|p| json!({
            "x": p.x + 1, "y": p.y + 1, "residual": p.residual,
        })),
        "base_point_residual": r.base_point_residual,
        "casimir_constancy": r.casimir_constancy.iter().map(|c| json!({
            "casimir": c.casimir,
            "value_at_lambda0": c.value_at_lambda0.to_string(),
            "max_deviation": c.max_deviation,
        })).collect::<Vec<_>>(),
        "bracket_sign": r.bracket_sign,
    })
}

fn run_lrep(
    cfg: &RunConfig,
    loaded: &LoadedModel,
    field_config: Option<&FieldConfig>,
    results: &mut Map<String, Value>,
    counters: &mut Map<String, Value>,
) -> Result<bool, RunError> {
    let model = &loaded.model;
    let casimirs = orbits::find_casimirs(model, cfg.max_degree, cfg.max_degree)
        .map_err(|e| RunError::Structural(e.to_string()))?;
    let (treport, setup) = operator_setup(cfg, loaded, field_config, &casimirs)?;
    results.insert("transition".into(), transition_report_value(&treport));
    let Some(setup) = setup else {
        return Ok(true);
    };
    let transition = loaded.transition.as_ref().unwrap();

    let ops_repr: Vec<Value> = setup
        .ops
        .iter()
        .enumerate()
        .map(|(x, op)| {
            json!({
                "element": x + 1,
                "coeffs": op.coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                "zeroth": op.zeroth.to_string(),
            })
        })
        .collect();
    results.insert("operators".into(), Value::Array(ops_repr));

    let opts = CheckOptions { bracket_sign: setup.bracket_sign, tol: cfg.tol, seed: cfg.seed };
    let creport = lambdarep::commutator_check(&setup.ops, model, &transition.lambda0, &opts);
    results.insert(
        "commutators".into(),
        json!({
            "closure_sign": creport.closure_sign,
            "max_residual": creport.max_residual,
            "pass": creport.pass,
            "pairs": creport.pairs.iter().map(|p| json!({
                "x": p.x + 1, "y": p.y + 1, "probe_residuals": p.probe_residuals,
            })).collect::<Vec<_>>(),
        }),
    );

    let casimir_rows: Vec<Value> = casimirs
        .iter()
        .map(|c| {
            let r = lambdarep::casimir_in_lambda_rep(c, &setup.ops, &transition.lambda0, &opts);
            let value_at_lambda0 = c.evaluate(&transition.lambda0);
            json!({
                "casimir": r.casimir,
                "constant": r.constant.map(c64),
                "is_constant": r.is_constant,
                "max_residual": r.max_residual,
                "classical_value_at_lambda0": value_at_lambda0.to_string(),
                "vanishes_at_lambda0": value_at_lambda0 == Q::from_integer(0.into()),
            })
        })
        .collect();
    let compatible = casimirs
        .iter()
        .all(|c| c.evaluate(&transition.lambda0) == Q::from_integer(0.into()));
    results.insert("casimirs_in_representation".into(), Value::Array(casimir_rows));
    results.insert("orbit_space_compatible".into(), json!(compatible));

    if let Some(pol) = &loaded.polarization {
        let preport = lambdarep::polarization_check(model, &transition.lambda0, pol);
        results.insert(
            "polarization".into(),
            json!({
                "pass": preport.pass,
                "closed": preport.closed,
                "expected_dim": preport.expected_dim,
                "actual_dim": preport.actual_dim,
                "isotropic": preport.isotropic,
            }),
        );
    }
    if let Some(beta) = &setup.beta {
        results.insert("beta".into(), q_vec(beta));
        results.insert("beta_applied".into(), json!(setup.beta_applied));
    }

    // anti-Hermiticity under the config quadrature, when one is supplied
    if let Some(fc) = field_config {
        if let Some((bounds, nodes)) = &fc.q_box {
            let grid = QuadratureGrid::simpson_box(bounds, nodes, fc.lambda_values.clone())
                .map_err(|e| RunError::Structural(e.to_string()))?;
            let r = lambdarep::anti_hermiticity_residual(
                &setup.ops,
                &grid.q_nodes,
                &grid.q_weights,
                &transition.lambda0,
            );
            results.insert("anti_hermiticity_residual".into(), json!(r));
            counters.insert("q_nodes".into(), json!(grid.q_nodes.len()));
        }
    }
    let failed = !creport.pass;
    Ok(failed)
}

struct ModeSetup {
    grid: QuadratureGrid,
    ops_m: Vec<LambdaOperator>,
    metric: Option<geometry::InvariantMetric>,
    curvature: Option<geometry::CurvatureData>,
    setup: OperatorSetup,
    spatial_dim: u32,
}

fn mode_setup(
    cfg: &RunConfig,
    loaded: &LoadedModel,
    fc: &FieldConfig,
) -> Result<Result<ModeSetup, lambdarep::TransitionReport>, RunError> {
    let model = &loaded.model;
    let (treport, setup) = operator_setup(cfg, loaded, Some(fc), &[])?;
    let Some(setup) = setup else {
        return Ok(Err(treport));
    };
    let m_indices = model.complement_m();
    let traces = liealg::ad_trace_vector(model);
    let (ops_m, _) = fields::restrict_to_m(&setup.ops, &traces, m_indices);
    let grid = match &fc.q_box {
        Some((bounds, nodes)) => {
            QuadratureGrid::simpson_box(bounds, nodes, fc.lambda_values.clone())
                .map_err(|e| RunError::Structural(e.to_string()))?
        }
        None => QuadratureGrid::point(fc.lambda_values.clone()),
    };
    let grid = match &fc.lambda_measure {
        Some((nodes, weights)) => grid.with_lambda_measure(nodes.clone(), weights.clone()),
        None => grid,
    };
    let (metric, curvature) = match &loaded.metric {
        Some(g) => {
            geometry::check_metric_invariance(model, g).map_err(|w| {
                RunError::Structural(format!("metric is not invariant ({} witnesses)", w.len()))
            })?;
            let metric = geometry::build_form_b(model, g)
                .map_err(|e| RunError::Structural(e.to_string()))?;
            let conn = geometry::christoffel(model, &metric);
            let curv = geometry::riemann(model, &conn, &metric);
            (Some(metric), Some(curv))
        }
        None => (None, None),
    };
    let spatial_dim = m_indices.len() as u32;
    Ok(Ok(ModeSetup { grid, ops_m, metric, curvature, setup, spatial_dim }))
}

fn scalar_curvature_for(fc: &FieldConfig, ms: &ModeSetup) -> Result<f64, RunError> {
    if let Some(r) = fc.scalar_curvature_override {
        return Ok(r);
    }
    match &ms.curvature {
        Some(c) => Ok(q_to_f64(&c.scalar)),
        None => Err(RunError::Structural(
            "scalar curvature needs a `metric` in the model file or an `R` override in the config"
                .into(),
        )),
    }
}

fn build_clifford(
    model: &LieAlgebraModel,
    fc: &FieldConfig,
    ms: &ModeSetup,
) -> Result<(CliffordRep, Vec<clifford::CMat>), RunError> {
    let metric = ms.metric.as_ref().ok_or_else(|| {
        RunError::Structural("spinor modes need a `metric` in the model file".into())
    })?;
    let spatial = clifford::spatial_form_from_metric(&metric.b_m, fc.riemannian_clifford);
    let rep =
        CliffordRep::for_spacetime(spatial).map_err(|e| RunError::Structural(e.to_string()))?;
    let conn = geometry::christoffel(model, metric);
    let sc = clifford::spinor_connection(&conn, &rep)
        .map_err(|e| RunError::Structural(e.to_string()))?;
    Ok((rep, sc))
}

fn parse_psi_components(psi: &[String]) -> Result<Vec<Expr>, RunError> {
    psi.iter()
        .map(|s| expr::parse(s).map_err(|e| RunError::Structural(e.to_string())))
        .collect()
}

fn run_fields(
    cfg: &RunConfig,
    loaded: &LoadedModel,
    field_config: Option<&FieldConfig>,
    results: &mut Map<String, Value>,
    counters: &mut Map<String, Value>,
) -> Result<bool, RunError> {
    let fc = field_config
        .ok_or_else(|| RunError::Structural("the fields command needs --config".into()))?;
    let ms = match mode_setup(cfg, loaded, fc)? {
        Ok(ms) => ms,
        Err(treport) => {
            results.insert("transition".into(), transition_report_value(&treport));
            return Ok(true);
        }
    };
    counters.insert("q_nodes".into(), json!(ms.grid.q_nodes.len()));
    counters.insert("lambda_nodes".into(), json!(ms.grid.lambda_nodes.len()));
    let model = &loaded.model;

    match fc.mode_kind {
        ModeKind::Scalar => {
            let r = scalar_curvature_for(fc, &ms)?;
            let (zeta, omega) = fields::kg_dispersion(fc.big_lambda, r, fc.mass, ms.spatial_dim)
                .map_err(|e| RunError::Structural(e.to_string()))?;
            results.insert(
                "dispersion".into(),
                json!({
                    "zeta": zeta,
                    "omega": omega,
                    "scalar_curvature": r,
                    "spatial_dim": ms.spatial_dim,
                }),
            );
            let psi = parse_psi_components(&fc.psi)?.remove(0);
            let mode = ModeFunction::scalar(
                psi,
                fc.big_lambda,
                fc.lambda_values.clone(),
                r,
                fc.mass,
                ms.spatial_dim,
            )
            .map_err(|e| RunError::Structural(e.to_string()))?;
            let (norm, unit) = fields::normalize_mode(&mode, &ms.grid)
                .map_err(|e| RunError::Structural(e.to_string()))?;
            results.insert("norm".into(), json!(norm));
            let metric = ms.metric.as_ref().ok_or_else(|| {
                RunError::Structural("laplace residual needs a `metric` in the model file".into())
            })?;
            let traces = liealg::ad_trace_vector(model);
            let traces_m: Vec<Q> =
                model.complement_m().iter().map(|&i| traces[i].clone()).collect();
            let lap =
                fields::laplace_residual(&unit, &ms.ops_m, &metric.b_m_inv, &traces_m, &ms.grid)
                    .map_err(|e| RunError::Structural(e.to_string()))?;
            results.insert("laplace_residual".into(), json!(lap));
            if !model.subalgebra_h().is_empty() {
                let hom =
                    fields::homogeneity_check(&unit, &ms.setup.ops, model.subalgebra_h(), &ms.grid)
                        .map_err(|e| RunError::Structural(e.to_string()))?;
                results.insert("homogeneity_residual".into(), json!(hom));
            }
        }
        ModeKind::Spinor => {
            let (rep, sc) = build_clifford(model, fc, &ms)?;
            results.insert("rep_dim".into(), json!(rep.rep_dim()));
            let comps = parse_psi_components(&fc.psi)?;
            let mode =
                ModeFunction::spinor(comps, fc.big_lambda, fc.lambda_values.clone());
            let (norm, unit) = fields::normalize_mode(&mode, &ms.grid)
                .map_err(|e| RunError::Structural(e.to_string()))?;
            results.insert("norm".into(), json!(norm));
            let r = fields::dirac_residual(&unit, &ms.ops_m, &rep, &sc, fc.mass, &ms.grid)
                .map_err(|e| RunError::Structural(e.to_string()))?;
            results.insert("dirac_residual".into(), json!(r));
            if !model.subalgebra_h().is_empty() {
                let hom =
                    fields::homogeneity_check(&unit, &ms.setup.ops, model.subalgebra_h(), &ms.grid)
                        .map_err(|e| RunError::Structural(e.to_string()))?;
                results.insert("homogeneity_residual".into(), json!(hom));
            }
        }
    }
    results.insert(
        "transition".into(),
        transition_report_value(&ms.setup.transition_report),
    );
    results.insert("beta_applied".into(), json!(ms.setup.beta_applied));
    Ok(false)
}

fn semt_report_value(r: &semt::SemtReport) -> Value {
    json!({
        "t00": c64(r.t00),
        "t0a": c64_vec(&r.t0a),
        "tab": c64_mat(&r.tab),
        "densities": r.densities.iter().map(|d| json!({
            "index": d.index,
            "t00": c64(d.t00),
            "t0a": c64_vec(&d.t0a),
            "tab": c64_mat(&d.tab),
        })).collect::<Vec<_>>(),
        "diagnostics": {
            "max_imag_t00": r.diagnostics.max_imag_t00,
            "max_imag_tab": r.diagnostics.max_imag_tab,
            "max_asymmetry_tab": r.diagnostics.max_asymmetry_tab,
            "t00_monotonicity": r.diagnostics.t00_monotonicity,
        },
    })
}

fn run_semt(
    cfg: &RunConfig,
    loaded: &LoadedModel,
    field_config: Option<&FieldConfig>,
    results: &mut Map<String, Value>,
    counters: &mut Map<String, Value>,
) -> Result<bool, RunError> {
    let fc = field_config
        .ok_or_else(|| RunError::Structural("the semt command needs --config".into()))?;
    let ms = match mode_setup(cfg, loaded, fc)? {
        Ok(ms) => ms,
        Err(treport) => {
            results.insert("transition".into(), transition_report_value(&treport));
            return Ok(true);
        }
    };
    counters.insert("q_nodes".into(), json!(ms.grid.q_nodes.len()));
    counters.insert("lambda_nodes".into(), json!(ms.grid.lambda_nodes.len()));
    let model = &loaded.model;

    match fc.mode_kind {
        ModeKind::Scalar => {
            let r = scalar_curvature_for(fc, &ms)?;
            let (zeta, omega) = fields::kg_dispersion(fc.big_lambda, r, fc.mass, ms.spatial_dim)
                .map_err(|e| RunError::Structural(e.to_string()))?;
            let zeta_tilde = fc.zeta_tilde.unwrap_or(zeta);
            let psi = parse_psi_components(&fc.psi)?.remove(0);
            let mode = ModeFunction::scalar(
                psi,
                fc.big_lambda,
                fc.lambda_values.clone(),
                r,
                fc.mass,
                ms.spatial_dim,
            )
            .map_err(|e| RunError::Structural(e.to_string()))?;
            let (norm, unit) = fields::normalize_mode(&mode, &ms.grid)
                .map_err(|e| RunError::Structural(e.to_string()))?;
            let ricci = ms
                .curvature
                .as_ref()
                .map(|c| c.ricci.clone())
                .unwrap_or_else(|| crate::linalg::zeros::<Q>(ms.ops_m.len(), ms.ops_m.len()));
            let report = semt::semt_scalar(&unit, &ms.ops_m, &ricci, zeta_tilde, &ms.grid)
                .map_err(|e| RunError::Structural(e.to_string()))?;
            results.insert("norm".into(), json!(norm));
            results.insert("omega".into(), json!(omega));
            results.insert("zeta_tilde".into(), json!(zeta_tilde));
            results.insert("semt".into(), semt_report_value(&report));
        }
        ModeKind::Spinor => {
            let (rep, sc) = build_clifford(model, fc, &ms)?;
            let mut modes = Vec::new();
            let comps = parse_psi_components(&fc.psi)?;
            modes.push(ModeFunction::spinor(comps, fc.big_lambda, fc.lambda_values.clone()));
            let mut weights = vec![1.0];
            for (comps, lam, w) in &fc.extra_modes {
                modes.push(ModeFunction::spinor(
                    parse_psi_components(comps)?,
                    *lam,
                    fc.lambda_values.clone(),
                ));
                weights.push(*w);
            }
            let mut grid = ms.grid.clone();
            grid.big_lambda_weights = weights;
            let mut norms = Vec::new();
            let mut units = Vec::new();
            for m in &modes {
                let (n, u) = fields::normalize_mode(m, &grid)
                    .map_err(|e| RunError::Structural(e.to_string()))?;
                norms.push(n);
                units.push(u);
            }
            let report = semt::semt_spinor(&units, &ms.ops_m, &rep, &sc, &grid)
                .map_err(|e| RunError::Structural(e.to_string()))?;
            results.insert("norms".into(), json!(norms));
            results.insert("rep_dim".into(), json!(rep.rep_dim()));
            results.insert("semt".into(), semt_report_value(&report));
            counters.insert("modes".into(), json!(units.len()));
        }
    }
    results.insert(
        "transition".into(),
        transition_report_value(&ms.setup.transition_report),
    );
    results.insert("beta_applied".into(), json!(ms.setup.beta_applied));
    Ok(false)
}

fn assemble(
    cfg: &RunConfig,
    loaded: &LoadedModel,
    results: Value,
    counters: Map<String, Value>,
    validation_failed: bool,
) -> Value {
    let model = &loaded.model;
    let entries: Vec<Value> = model
        .entries()
        .iter()
        .map(|e| {
            json!({
                "i": e.a + 1, "j": e.b + 1, "k": e.c + 1,
                "c": e.value.to_string(),
            })
        })
        .collect();
    json!({
        "schema_version": SCHEMA_VERSION,
        "command": cfg.command.name(),
        "inputs": {
            "model_path": cfg.model_path.display().to_string(),
            "config_path": cfg.config_path.as_ref().map(|p| p.display().to_string()),
            "model_name": model.name,
            "dim": model.dim,
            "basis_labels": model.basis_labels,
            "structure_constants": entries,
            "subalgebra": one_based(model.subalgebra_h()),
            "complement": one_based(model.complement_m()),
            "has_metric": loaded.metric.is_some(),
            "has_transition": loaded.transition.is_some(),
            "has_polarization": loaded.polarization.is_some(),
        },
        "conventions": {
            "poisson_bracket": "{f,g} = sum_a (df/dq_a dg/dp_a - df/dp_a dg/dq_a), scaled by bracket_sign",
            "ricci_contraction": "R_ab = R^c_acb",
            "scalar_contraction": "R = B^ab R_ab",
            "scalar_sign": "formula-verbatim (equals minus the Levi-Civita scalar on catalog fixtures)",
            "operator_closure_sign": "-bracket_sign",
            "clifford_spatial_form": "-B_m unless riemannian_clifford",
            "spinor_bar": "psi-bar = psi^dag gamma_0",
        },
        "parameters": {
            "tol": cfg.tol,
            "seed": cfg.seed,
            "max_degree": cfg.max_degree,
        },
        "status": if validation_failed { "validation_failed" } else { "ok" },
        "results": results,
        "counters": counters,
    })
}

/// Write the report next to stdout or into a file; returns the bytes.
pub fn emit(outcome: &RunOutcome, out: Option<&Path>) -> std::io::Result<String> {
    let text = outcome.to_json_string();
    match out {
        Some(path) => std::fs::write(path, &text)?,
        None => print!("{text}"),
    }
    Ok(text)
}
