//! Model and config ingestion: UTF-8 JSON documents with exact rationals
//! (integers or `"n/d"` strings). Errors carry path-like locators such as
//! `structure_constants[3].c`.

use crate::expr::{self, Expr};
use crate::lambdarep::CanonicalTransition;
use crate::liealg::LieAlgebraModel;
use crate::linalg::Mat;
use crate::ratio::{parse_rational, Q, QC};
use num_bigint::BigInt;
use serde_json::Value;
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid JSON in {path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("missing field at `{0}`")]
    Missing(String),
    #[error("expected {expected} at `{locator}`")]
    WrongType { locator: String, expected: &'static str },
    #[error("malformed rational at `{locator}`: {detail}")]
    MalformedRational { locator: String, detail: String },
    #[error("expression error at `{locator}`: {detail}")]
    BadExpression { locator: String, detail: String },
    #[error("model error: {0}")]
    Model(#[from] crate::liealg::ModelError),
    #[error("invalid value at `{locator}`: {detail}")]
    Invalid { locator: String, detail: String },
}

/// A borrowed JSON value together with the path used in error messages.
pub struct OwnedCursor<'a> {
    value: &'a Value,
    path: String,
}

impl<'a> OwnedCursor<'a> {
    pub fn root(value: &'a Value) -> Self {
        OwnedCursor { value, path: String::new() }
    }

    fn at(&self, seg: String) -> impl FnOnce(&'a Value) -> OwnedCursor<'a> {
        let base = if self.path.is_empty() {
            seg
        } else if seg.starts_with('[') {
            format!("{}{}", self.path, seg)
        } else {
            format!("{}.{}", self.path, seg)
        };
        move |value| OwnedCursor { value, path: base }
    }

    pub fn field(&self, name: &str) -> Result<OwnedCursor<'a>, LoadError> {
        self.opt_field(name).ok_or_else(|| {
            LoadError::Missing(if self.path.is_empty() {
                name.to_string()
            } else {
                format!("{}.{}", self.path, name)
            })
        })
    }

    pub fn opt_field(&self, name: &str) -> Option<OwnedCursor<'a>> {
        self.value.as_object()?.get(name).map(self.at(name.to_string()))
    }

    pub fn index(&self, i: usize) -> Result<OwnedCursor<'a>, LoadError> {
        self.value
            .as_array()
            .and_then(|a| a.get(i))
            .map(self.at(format!("[{i}]")))
            .ok_or_else(|| LoadError::Missing(format!("{}[{i}]", self.path)))
    }

    pub fn array(&self) -> Result<Vec<OwnedCursor<'a>>, LoadError> {
        let arr = self.value.as_array().ok_or_else(|| LoadError::WrongType {
            locator: self.path.clone(),
            expected: "array",
        })?;
        Ok((0..arr.len()).map(|i| self.index(i).unwrap()).collect())
    }

    pub fn as_usize(&self) -> Result<usize, LoadError> {
        self.value.as_u64().map(|v| v as usize).ok_or_else(|| LoadError::WrongType {
            locator: self.path.clone(),
            expected: "nonnegative integer",
        })
    }

    pub fn as_i64(&self) -> Result<i64, LoadError> {
        self.value.as_i64().ok_or_else(|| LoadError::WrongType {
            locator: self.path.clone(),
            expected: "integer",
        })
    }

    pub fn as_f64(&self) -> Result<f64, LoadError> {
        self.value.as_f64().ok_or_else(|| LoadError::WrongType {
            locator: self.path.clone(),
            expected: "number",
        })
    }

    pub fn as_bool(&self) -> Result<bool, LoadError> {
        self.value.as_bool().ok_or_else(|| LoadError::WrongType {
            locator: self.path.clone(),
            expected: "boolean",
        })
    }

    pub fn as_str(&self) -> Result<&'a str, LoadError> {
        self.value.as_str().ok_or_else(|| LoadError::WrongType {
            locator: self.path.clone(),
            expected: "string",
        })
    }

    /// Exact rational: a JSON integer or an `"n/d"` string. Non-integer
    /// floats are rejected to keep model arithmetic exact.
    pub fn rational(&self) -> Result<Q, LoadError> {
        match self.value {
            Value::Number(n) => {
                if let Some(i) = n.as_i64() {
                    Ok(Q::from_integer(BigInt::from(i)))
                } else {
                    Err(LoadError::MalformedRational {
                        locator: self.path.clone(),
                        detail: "non-integer numbers are not exact; use an \"n/d\" string".into(),
                    })
                }
            }
            Value::String(s) => parse_rational(s).map_err(|e| LoadError::MalformedRational {
                locator: self.path.clone(),
                detail: e.to_string(),
            }),
            _ => Err(LoadError::WrongType {
                locator: self.path.clone(),
                expected: "rational (integer or \"n/d\" string)",
            }),
        }
    }

    /// Complex rational: a plain rational, or a two-element `[re, im]` array.
    pub fn complex_rational(&self) -> Result<QC, LoadError> {
        if let Value::Array(a) = self.value {
            if a.len() != 2 {
                return Err(LoadError::Invalid {
                    locator: self.path.clone(),
                    detail: format!("complex rational needs [re, im], found {} entries", a.len()),
                });
            }
            let re = self.index(0)?.rational()?;
            let im = self.index(1)?.rational()?;
            return Ok(QC::new(re, im));
        }
        Ok(QC::from_q(self.rational()?))
    }

    pub fn expression(&self) -> Result<Expr, LoadError> {
        let text = self.as_str()?;
        expr::parse(text).map_err(|e| LoadError::BadExpression {
            locator: self.path.clone(),
            detail: e.to_string(),
        })
    }

    pub fn path(&self) -> &str {
        &self.path
    }
}

/// Everything a model file can carry.
#[derive(Clone, Debug)]
pub struct LoadedModel {
    pub model: LieAlgebraModel,
    pub metric: Option<Mat<Q>>,
    pub transition: Option<CanonicalTransition>,
    /// Poisson convention the transition table is written in (from the
    /// `transition.bracket_sign` field, default +1); a config-level
    /// `bracket_sign` overrides it.
    pub transition_bracket_sign: i32,
    pub polarization: Option<Vec<Vec<QC>>>,
}

fn read_json(path: &Path) -> Result<Value, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| LoadError::Json {
        path: path.display().to_string(),
        source,
    })
}

/// Load a model file; liealg structural invariants are enforced here, while
/// algebraic identities (Jacobi etc.) are reported by `validate_algebra`.
pub fn load_model(path: &Path) -> Result<LoadedModel, LoadError> {
    let doc = read_json(path)?;
    parse_model(&doc)
}

pub fn parse_model(doc: &Value) -> Result<LoadedModel, LoadError> {
    let root = OwnedCursor::root(doc);
    let name = root.opt_field("name").map(|c| c.as_str().map(str::to_owned)).transpose()?;
    let dim = root.field("dim")?.as_usize()?;
    let mut entries = Vec::new();
    for e in root.field("structure_constants")?.array()? {
        let i = e.field("i")?.as_usize()?;
        let j = e.field("j")?.as_usize()?;
        let k = e.field("k")?.as_usize()?;
        let c = e.field("c")?.rational()?;
        entries.push((i, j, k, c));
    }
    let mut subalgebra = Vec::new();
    if let Some(sub) = root.opt_field("subalgebra") {
        for s in sub.array()? {
            subalgebra.push(s.as_usize()?);
        }
    }
    let mut model = LieAlgebraModel::from_entries_one_based(
        name.as_deref().unwrap_or("model"),
        dim,
        &entries,
        &subalgebra,
    )?;
    if let Some(labels) = root.opt_field("basis_labels") {
        let labels: Result<Vec<String>, LoadError> =
            labels.array()?.iter().map(|l| l.as_str().map(str::to_owned)).collect();
        model = model.with_labels(labels?)?;
    }

    let metric = match root.opt_field("metric") {
        None => None,
        Some(m) => {
            let rows = m.array()?;
            if rows.len() != dim {
                return Err(LoadError::Invalid {
                    locator: m.path().to_string(),
                    detail: format!("metric must be {dim}x{dim}"),
                });
            }
            let mut out = Vec::with_capacity(dim);
            for row in rows {
                let cells = row.array()?;
                if cells.len() != dim {
                    return Err(LoadError::Invalid {
                        locator: row.path().to_string(),
                        detail: format!("metric row must have {dim} entries"),
                    });
                }
                let r: Result<Vec<Q>, LoadError> = cells.iter().map(|c| c.rational()).collect();
                out.push(r?);
            }
            Some(out)
        }
    };

    let mut transition_bracket_sign = 1;
    let transition = match root.opt_field("transition") {
        None => None,
        Some(t) => {
            let lambda0_cur = t.field("lambda0")?;
            let lambda0: Result<Vec<Q>, LoadError> =
                lambda0_cur.array()?.iter().map(|c| c.rational()).collect();
            let lambda0 = lambda0?;
            if let Some(sign) = t.opt_field("bracket_sign") {
                let v = sign.as_i64()?;
                if v != 1 && v != -1 {
                    return Err(LoadError::Invalid {
                        locator: sign.path().to_string(),
                        detail: "bracket_sign must be 1 or -1".into(),
                    });
                }
                transition_bracket_sign = v as i32;
            }
            let mut alpha = Vec::with_capacity(dim);
            let mut chi = Vec::with_capacity(dim);
            let mut n_pairs = None;
            for x in 1..=dim {
                let el = t.field(&x.to_string())?;
                let alphas: Result<Vec<Expr>, LoadError> =
                    el.field("alpha")?.array()?.iter().map(|a| a.expression()).collect();
                let alphas = alphas?;
                match n_pairs {
                    None => n_pairs = Some(alphas.len()),
                    Some(n) if n != alphas.len() => {
                        return Err(LoadError::Invalid {
                            locator: el.path().to_string(),
                            detail: format!(
                                "alpha length {} disagrees with earlier elements ({n})",
                                alphas.len()
                            ),
                        });
                    }
                    _ => {}
                }
                alpha.push(alphas);
                chi.push(el.field("chi")?.expression()?);
            }
            Some(CanonicalTransition {
                alpha,
                chi,
                lambda0,
                n_pairs: n_pairs.unwrap_or(0),
            })
        }
    };

    let polarization = match root.opt_field("polarization") {
        None => None,
        Some(p) => {
            let mut vectors = Vec::new();
            for vec_cur in p.array()? {
                let comps = vec_cur.array()?;
                if comps.len() != dim {
                    return Err(LoadError::Invalid {
                        locator: vec_cur.path().to_string(),
                        detail: format!("polarization vector must have {dim} components"),
                    });
                }
                let v: Result<Vec<QC>, LoadError> =
                    comps.iter().map(|c| c.complex_rational()).collect();
                vectors.push(v?);
            }
            Some(vectors)
        }
    };

    Ok(LoadedModel { model, metric, transition, transition_bracket_sign, polarization })
}

/// Config for the casimirs command: optional coordinate-hyperplane stratum
/// (1-based indices of the coordinates pinned to zero).
#[derive(Clone, Debug, Default)]
pub struct CasimirsConfig {
    pub hyperplane_zeros: Vec<usize>,
}

pub fn load_casimirs_config(path: &Path) -> Result<CasimirsConfig, LoadError> {
    let doc = read_json(path)?;
    parse_casimirs_config(&doc)
}

pub fn parse_casimirs_config(doc: &Value) -> Result<CasimirsConfig, LoadError> {
    let root = OwnedCursor::root(doc);
    let hyperplane_zeros = match root.opt_field("hyperplane_zeros") {
        None => Vec::new(),
        Some(c) => c.array()?.iter().map(|x| x.as_usize()).collect::<Result<_, _>>()?,
    };
    Ok(CasimirsConfig { hyperplane_zeros })
}

/// Tensor-product quadrature box: per-dimension bounds and node counts.
pub type QBox = (Vec<(f64, f64)>, Vec<usize>);
/// Discrete lambda measure: nodes and weights.
pub type LambdaMeasure = (Vec<Vec<f64>>, Vec<f64>);

/// Field-mode / SEMT configuration document.
#[derive(Clone, Debug)]
pub struct FieldConfig {
    pub mode_kind: ModeKind,
    /// Scalar expression, or the spinor component list.
    pub psi: Vec<String>,
    pub big_lambda: f64,
    pub mass: f64,
    pub lambda_values: Vec<f64>,
    pub zeta_tilde: Option<f64>,
    pub scalar_curvature_override: Option<f64>,
    pub q_box: Option<QBox>,
    pub lambda_measure: Option<LambdaMeasure>,
    /// Discretization of the Lambda measure: `(value, weight)` nodes. For
    /// spinor SEMT runs the main `psi` is instantiated once per node.
    pub big_lambda_measure: Option<Vec<(f64, f64)>>,
    /// Extra spinor modes `(components, Lambda, weight)`.
    pub extra_modes: Vec<(Vec<String>, f64, f64)>,
    pub bracket_sign: Option<i32>,
    pub apply_beta: bool,
    pub riemannian_clifford: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeKind {
    Scalar,
    Spinor,
}

pub fn load_field_config(path: &Path) -> Result<FieldConfig, LoadError> {
    let doc = read_json(path)?;
    parse_field_config(&doc)
}

pub fn parse_field_config(doc: &Value) -> Result<FieldConfig, LoadError> {
    let root = OwnedCursor::root(doc);
    let mode_kind = match root.field("mode")?.as_str()? {
        "scalar" => ModeKind::Scalar,
        "spinor" => ModeKind::Spinor,
        other => {
            return Err(LoadError::Invalid {
                locator: "mode".into(),
                detail: format!("expected \"scalar\" or \"spinor\", found \"{other}\""),
            })
        }
    };
    let psi_cur = root.field("psi")?;
    let psi: Vec<String> = if psi_cur.value.is_array() {
        psi_cur
            .array()?
            .iter()
            .map(|c| c.as_str().map(str::to_owned))
            .collect::<Result<_, _>>()?
    } else {
        vec![psi_cur.as_str()?.to_owned()]
    };
    // check expressions parse now, with locators
    if psi_cur.value.is_array() {
        for c in psi_cur.array()? {
            c.expression()?;
        }
    } else {
        psi_cur.expression()?;
    }
    let big_lambda = root.field("Lambda")?.as_f64()?;
    let mass = root.opt_field("m").map(|c| c.as_f64()).transpose()?.unwrap_or(0.0);
    let lambda_values: Vec<f64> = root
        .field("lambda_values")?
        .array()?
        .iter()
        .map(|c| c.as_f64())
        .collect::<Result<_, _>>()?;
    let zeta_tilde = root.opt_field("zeta_tilde").map(|c| c.as_f64()).transpose()?;
    let scalar_curvature_override = root.opt_field("R").map(|c| c.as_f64()).transpose()?;

    let mut q_box = None;
    let mut lambda_measure = None;
    if let Some(grids) = root.opt_field("grids") {
        if let Some(q) = grids.opt_field("q") {
            let bounds: Vec<(f64, f64)> = q
                .field("box")?
                .array()?
                .iter()
                .map(|b| -> Result<(f64, f64), LoadError> {
                    Ok((b.index(0)?.as_f64()?, b.index(1)?.as_f64()?))
                })
                .collect::<Result<_, _>>()?;
            let nodes_cur = q.field("nodes")?;
            let nodes: Vec<usize> = if nodes_cur.value.is_array() {
                nodes_cur.array()?.iter().map(|c| c.as_usize()).collect::<Result<_, _>>()?
            } else {
                vec![nodes_cur.as_usize()?; bounds.len()]
            };
            if nodes.len() != bounds.len() {
                return Err(LoadError::Invalid {
                    locator: nodes_cur.path().to_string(),
                    detail: "nodes must match the box dimension".into(),
                });
            }
            q_box = Some((bounds, nodes));
        }
        if let Some(lm) = grids.opt_field("lambda") {
            let mut nodes = Vec::new();
            let mut weights = Vec::new();
            for entry in lm.array()? {
                let values: Vec<f64> = entry
                    .field("values")?
                    .array()?
                    .iter()
                    .map(|c| c.as_f64())
                    .collect::<Result<_, _>>()?;
                nodes.push(values);
                weights.push(
                    entry.opt_field("weight").map(|c| c.as_f64()).transpose()?.unwrap_or(1.0),
                );
            }
            lambda_measure = Some((nodes, weights));
        }
    }

    let mut extra_modes = Vec::new();
    if let Some(modes) = root.opt_field("modes") {
        for m in modes.array()? {
            let comps: Vec<String> = m
                .field("psi")?
                .array()?
                .iter()
                .map(|c| c.as_str().map(str::to_owned))
                .collect::<Result<_, _>>()?;
            for c in m.field("psi")?.array()? {
                c.expression()?;
            }
            let lam = m.field("Lambda")?.as_f64()?;
            let w = m.opt_field("weight").map(|c| c.as_f64()).transpose()?.unwrap_or(1.0);
            extra_modes.push((comps, lam, w));
        }
    }

    let bracket_sign = match root.opt_field("bracket_sign") {
        None => None,
        Some(c) => {
            let v = c.as_i64()?;
            if v != 1 && v != -1 {
                return Err(LoadError::Invalid {
                    locator: c.path().to_string(),
                    detail: "bracket_sign must be 1 or -1".into(),
                });
            }
            Some(v as i32)
        }
    };
    let apply_beta =
        root.opt_field("apply_beta").map(|c| c.as_bool()).transpose()?.unwrap_or(false);
    let riemannian_clifford = root
        .opt_field("riemannian_clifford")
        .map(|c| c.as_bool())
        .transpose()?
        .unwrap_or(false);
    Ok(FieldConfig {
        mode_kind,
        psi,
        big_lambda,
        mass,
        lambda_values,
        zeta_tilde,
        scalar_curvature_override,
        q_box,
        lambda_measure,
        extra_modes,
        bracket_sign,
        apply_beta,
        riemannian_clifford,
    })
}
