//! Problem files: TOML with `[problem]`, one payload section and optional
//! `[params]`, `[subspace.<name>]`, `[connection]` and `[point]`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use msgeo::exterior::{Form, FormRecord, Vector};
use msgeo::field::{Connection, FieldTheoryProblem, HamiltonianProblem, ZStarJet};
use msgeo::forms::{CoordForm, CoordSpace};
use msgeo::multisymplectic::{model_space, ModelSpace, MultisymplecticSpace, Subspace};
use msgeo::symbolic::{parse, ParseContext, Poly, VarName};
use msgeo::Scalar;
use serde::Deserialize;

/// Input problem; `Display` gives the message printed before exit code 2.
#[derive(Debug)]
pub struct InputError(pub String);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn err<T>(msg: impl Into<String>) -> Result<T, InputError> {
    Err(InputError(msg.into()))
}

/// Rational written as an integer or as a `"p/q"` string.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum RawScalar {
    Int(i64),
    Text(String),
}

impl RawScalar {
    fn value(&self, at: &str) -> Result<Scalar, InputError> {
        match self {
            RawScalar::Int(v) => Ok(Scalar::from_int(*v)),
            RawScalar::Text(s) => s
                .parse()
                .map_err(|_| InputError(format!("{at}: `{s}` is not a rational"))),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    problem: Option<RawProblem>,
    lagrangian: Option<RawExpr>,
    hamiltonian: Option<RawExpr>,
    linear: Option<RawLinear>,
    form: Option<RawForm>,
    #[serde(default)]
    params: BTreeMap<String, RawScalar>,
    #[serde(default)]
    subspace: BTreeMap<String, RawSubspace>,
    connection: Option<RawConnection>,
    point: Option<ZStarJet>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    n: usize,
    m: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExpr {
    expr: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLinear {
    dim: Option<usize>,
    degree: Option<usize>,
    terms: Option<Vec<RawTerm>>,
    model: Option<RawModel>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerm {
    indices: Vec<usize>,
    coeff: RawScalar,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    n0: usize,
    k: usize,
    #[serde(default)]
    r: usize,
    /// Name of a `[subspace.*]` of `Q^n0` used as `E`.
    horizontal: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSubspace {
    basis: Vec<Vec<RawScalar>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConnection {
    y: Vec<Vec<String>>,
    z: Option<Vec<Vec<Vec<String>>>>,
    p: Option<Vec<Vec<Vec<String>>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawForm {
    coords: Vec<String>,
    degree: usize,
    #[serde(default)]
    terms: Vec<RawFormTerm>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFormTerm {
    d: Vec<String>,
    coeff: String,
}

/// Linear payload: the space and its named subspaces.
pub struct Linear {
    pub space: MultisymplecticSpace,
    pub model: Option<ModelSpace>,
    pub subspaces: BTreeMap<String, Subspace>,
}

pub enum Payload {
    Lagrangian(FieldTheoryProblem),
    Hamiltonian(HamiltonianProblem),
    Linear(Linear),
    Form(CoordForm),
    None,
}

pub struct ProblemFile {
    pub payload: Payload,
    pub connection: Option<Connection>,
    pub point: Option<ZStarJet>,
}

/// 1-based line of the first occurrence of `needle`, for messages.
fn line_of(text: &str, needle: &str) -> Option<usize> {
    text.lines().position(|l| l.contains(needle)).map(|i| i + 1)
}

fn located(text: &str, needle: &str, msg: String) -> InputError {
    match line_of(text, needle) {
        Some(l) => InputError(format!("line {l}: {msg}")),
        None => InputError(msg),
    }
}

pub fn load(path: &Path) -> Result<ProblemFile, InputError> {
    let text = std::fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    from_str(&text).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

pub fn from_str(text: &str) -> Result<ProblemFile, InputError> {
    let raw: RawFile = toml::from_str(text).map_err(|e| InputError(e.to_string().trim_end().to_string()))?;
    let payloads = [
        raw.lagrangian.is_some(),
        raw.hamiltonian.is_some(),
        raw.linear.is_some(),
        raw.form.is_some(),
    ];
    if payloads.iter().filter(|&&b| b).count() > 1 {
        return err("give only one of [lagrangian], [hamiltonian], [linear], [form]");
    }
    let dims = raw.problem.as_ref().map(|p| (p.n, p.m));
    let mut params = BTreeMap::new();
    for (k, v) in &raw.params {
        params.insert(k.clone(), v.value(&format!("params.{k}"))?);
    }
    let context = |n: usize, m: usize| -> Result<ParseContext, InputError> {
        let mut ctx = ParseContext::new(n, m);
        for k in params.keys() {
            ctx = ctx
                .with_param(k)
                .map_err(|e| located(text, k, format!("parameter `{k}`: {e}")))?;
        }
        Ok(ctx)
    };
    let need_dims = |what: &str| dims.ok_or_else(|| InputError(format!("[{what}] needs [problem] with n and m")));

    let payload = if let Some(l) = &raw.lagrangian {
        let (n, m) = need_dims("lagrangian")?;
        let e = parse(&l.expr, &context(n, m)?).map_err(|e| located(text, &l.expr, format!("[lagrangian] {e}")))?;
        Payload::Lagrangian(
            FieldTheoryProblem::new(n, m, e, params.clone()).map_err(|e| located(text, &l.expr, e.to_string()))?,
        )
    } else if let Some(h) = &raw.hamiltonian {
        let (n, m) = need_dims("hamiltonian")?;
        let e = parse(&h.expr, &context(n, m)?).map_err(|e| located(text, &h.expr, format!("[hamiltonian] {e}")))?;
        Payload::Hamiltonian(
            HamiltonianProblem::new(n, m, e, params.clone()).map_err(|e| located(text, &h.expr, e.to_string()))?,
        )
    } else if let Some(lin) = &raw.linear {
        Payload::Linear(linear(text, lin, &raw.subspace)?)
    } else if let Some(f) = &raw.form {
        Payload::Form(coord_form(text, f, &context(9, 9)?)?)
    } else {
        Payload::None
    };

    let connection = match &raw.connection {
        None => None,
        Some(c) => {
            let (n, m) = need_dims("connection")?;
            Some(connection(text, c, n, m, &context(n, m)?)?)
        }
    };
    if let (Some(pt), Some((n, m))) = (&raw.point, dims) {
        if pt.x.len() != n || pt.y.len() != m {
            return Err(located(
                text,
                "[point]",
                format!("[point] does not match n = {n}, m = {m}"),
            ));
        }
    }
    Ok(ProblemFile {
        payload,
        connection,
        point: raw.point,
    })
}

fn rows(text: &str, name: &str, raw: &[Vec<RawScalar>]) -> Result<Vec<Vec<Scalar>>, InputError> {
    raw.iter()
        .map(|r| r.iter().map(|x| x.value(&format!("subspace.{name}"))).collect())
        .collect::<Result<_, _>>()
        .map_err(|e| located(text, &format!("[subspace.{name}]"), e.0))
}

fn subspace(text: &str, name: &str, ambient: usize, raw: &RawSubspace) -> Result<Subspace, InputError> {
    let r = rows(text, name, &raw.basis)?;
    if r.iter().any(|row| row.len() != ambient) {
        return Err(located(
            text,
            &format!("[subspace.{name}]"),
            format!("subspace `{name}`: rows must have length {ambient}"),
        ));
    }
    Ok(Subspace::span(ambient, &r.into_iter().map(Vector).collect::<Vec<_>>()))
}

fn linear(text: &str, lin: &RawLinear, raw_subs: &BTreeMap<String, RawSubspace>) -> Result<Linear, InputError> {
    let mut subspaces = BTreeMap::new();
    let (space, model) = match (&lin.model, &lin.terms) {
        (Some(_), Some(_)) => return err("[linear]: give either `model` or `terms`, not both"),
        (None, None) => return err("[linear]: needs `model` or `dim`, `degree` and `terms`"),
        (Some(m), None) => {
            let e = match &m.horizontal {
                None => None,
                Some(name) => {
                    let raw = raw_subs
                        .get(name)
                        .ok_or_else(|| InputError(format!("[linear.model]: no subspace `{name}`")))?;
                    Some(subspace(text, name, m.n0, raw)?)
                }
            };
            let (model, space) =
                model_space(m.n0, m.k, m.r, e.as_ref()).map_err(|e| InputError(format!("[linear.model]: {e}")))?;
            subspaces.insert("V".to_string(), model.base_subspace());
            subspaces.insert("W".to_string(), model.form_subspace());
            if let Some(name) = &m.horizontal {
                // E lives in V; keep only the ambient lift under its name
                let lifted: Vec<Vector> = model
                    .horizontal
                    .basis()
                    .iter()
                    .map(|v| {
                        let mut x = v.0.clone();
                        x.resize(model.dim(), Scalar::zero());
                        Vector(x)
                    })
                    .collect();
                subspaces.insert(name.clone(), Subspace::span(model.dim(), &lifted));
            }
            (space, Some(model))
        }
        (None, Some(terms)) => {
            let (Some(dim), Some(degree)) = (lin.dim, lin.degree) else {
                return err("[linear]: `terms` needs `dim` and `degree`");
            };
            let recs: Vec<FormRecord> = terms
                .iter()
                .map(|t| {
                    Ok(FormRecord {
                        indices: t.indices.clone(),
                        coeff: t.coeff.value("linear.terms")?,
                    })
                })
                .collect::<Result<_, InputError>>()?;
            let form = Form::from_records(dim, degree, &recs).map_err(|e| InputError(format!("[linear]: {e}")))?;
            let space = MultisymplecticSpace::new(form).map_err(|e| InputError(format!("[linear]: {e}")))?;
            (space, None)
        }
    };
    let skip = lin.model.as_ref().and_then(|m| m.horizontal.clone());
    for (name, raw) in raw_subs {
        if Some(name) == skip.as_ref() {
            continue;
        }
        subspaces.insert(name.clone(), subspace(text, name, space.dim(), raw)?);
    }
    Ok(Linear {
        space,
        model,
        subspaces,
    })
}

fn expr(text: &str, s: &str, ctx: &ParseContext, what: &str) -> Result<Poly, InputError> {
    parse(s, ctx)
        .map(|e| e.to_poly())
        .map_err(|e| located(text, s, format!("{what}: {e}")))
}

fn connection(
    text: &str,
    raw: &RawConnection,
    n: usize,
    m: usize,
    ctx: &ParseContext,
) -> Result<Connection, InputError> {
    let grid2 = |g: &Vec<Vec<String>>| -> Result<Vec<Vec<Poly>>, InputError> {
        g.iter()
            .map(|r| r.iter().map(|s| expr(text, s, ctx, "[connection]")).collect())
            .collect()
    };
    let y = grid2(&raw.y)?;
    let c = match (&raw.z, &raw.p) {
        (Some(z), None) => Connection::OnZ {
            y,
            z: z.iter().map(&grid2).collect::<Result<_, _>>()?,
        },
        (None, Some(p)) => Connection::OnZStar {
            y,
            p: p.iter().map(&grid2).collect::<Result<_, _>>()?,
        },
        _ => return err("[connection]: give exactly one of `z` (on Z) or `p` (on Z*)"),
    };
    let (Connection::OnZ { y, z: rest } | Connection::OnZStar { y, p: rest }) = &c;
    let ok = y.len() == m
        && y.iter().all(|r| r.len() == n)
        && rest.len() == m
        && rest.iter().all(|g| g.len() == n && g.iter().all(|r| r.len() == n));
    if !ok {
        return err(format!(
            "[connection]: coefficient arrays must be m x n and m x n x n (n = {n}, m = {m})"
        ));
    }
    Ok(c)
}

fn coord_form(text: &str, raw: &RawForm, ctx: &ParseContext) -> Result<CoordForm, InputError> {
    let coords: Vec<VarName> = raw
        .coords
        .iter()
        .map(|c| {
            VarName::parse_coordinate(c).ok_or_else(|| located(text, c, format!("[form]: `{c}` is not a coordinate")))
        })
        .collect::<Result<_, _>>()?;
    let space = CoordSpace::new(coords).map_err(|e| InputError(format!("[form]: {e}")))?;
    let mut w = CoordForm::zero(&space, raw.degree);
    for t in &raw.terms {
        if t.d.len() != raw.degree {
            return Err(located(
                text,
                &t.coeff,
                format!("[form]: term has {} differentials, expected {}", t.d.len(), raw.degree),
            ));
        }
        let vs: Vec<VarName> =
            t.d.iter()
                .map(|c| {
                    VarName::parse_coordinate(c)
                        .ok_or_else(|| located(text, c, format!("[form]: `{c}` is not a coordinate")))
                })
                .collect::<Result<_, _>>()?;
        let c = expr(text, &t.coeff, ctx, "[form]")?;
        let term = CoordForm::monomial(&space, c, &vs).map_err(|e| located(text, &t.coeff, format!("[form]: {e}")))?;
        w = w.try_add(&term).map_err(|e| InputError(format!("[form]: {e}")))?;
    }
    Ok(w)
}
