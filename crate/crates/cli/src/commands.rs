use std::fmt::Write;
use std::path::Path;

use msgeo::field::{self, EquationSet, FieldTheoryProblem, HamiltonianProblem};
use msgeo::forms::{homotopy_operator, CoordFormRecord};
use msgeo::multisymplectic::{classify, darboux, darboux_horizontal, DarbouxRecord, ModelRecord, Subspace};
use serde_json::{json, Value};

use crate::problem::{load, InputError, Linear, Payload, ProblemFile};
use crate::Command;

pub struct Report {
    pub text: String,
    pub json: Value,
    /// False on a verification failure (exit code 1).
    pub ok: bool,
}

fn fail<T>(e: impl std::fmt::Display) -> Result<T, InputError> {
    Err(InputError(e.to_string()))
}

pub fn run(cmd: &Command) -> Result<Report, InputError> {
    let file = |p: &Path| load(p);
    match cmd {
        Command::Classify { file: f, subspace, l } => classify_cmd(&file(f)?, subspace, *l),
        Command::Darboux {
            file: f,
            subspace,
            horizontal,
            r,
        } => darboux_cmd(&file(f)?, subspace, horizontal.as_deref().zip(*r)),
        Command::El { file: f } => Ok(equations("el", &field::euler_lagrange(lagrangian(&file(f)?)?))),
        Command::DeDonder { file: f } => de_donder_cmd(&file(f)?),
        Command::Legendre { file: f } => legendre_cmd(&file(f)?),
        Command::Hamilton { file: f } => hamilton_cmd(&file(f)?),
        Command::Alpha { file: f } => alpha_cmd(&file(f)?),
        Command::Beta { file: f } => beta_cmd(&file(f)?),
        Command::Nl { file: f } => Ok(equations("nl", &field::n_l_equations(lagrangian(&file(f)?)?))),
        Command::Nh { file: f } => {
            let hp = hamiltonian(&file(f)?)?;
            Ok(equations("nh", &field::n_h_equations(&hp)))
        }
        Command::VerifyTriple {
            file: f,
            samples,
            seed,
            parallel,
        } => triple_cmd(&file(f)?, *samples, *seed, *parallel),
        Command::Homotopy { file: f } => homotopy_cmd(&file(f)?),
    }
}

fn lagrangian(f: &ProblemFile) -> Result<&FieldTheoryProblem, InputError> {
    match &f.payload {
        Payload::Lagrangian(p) => Ok(p),
        _ => fail("this command needs a [lagrangian] file"),
    }
}

/// The file's hamiltonian, or the one derived from its lagrangian.
fn hamiltonian(f: &ProblemFile) -> Result<HamiltonianProblem, InputError> {
    match &f.payload {
        Payload::Hamiltonian(h) => Ok(h.clone()),
        Payload::Lagrangian(p) => field::hamiltonian_from_lagrangian(p).or_else(fail),
        _ => fail("this command needs a [hamiltonian] or [lagrangian] file"),
    }
}

fn linear(f: &ProblemFile) -> Result<&Linear, InputError> {
    match &f.payload {
        Payload::Linear(l) => Ok(l),
        _ => fail("this command needs a [linear] file"),
    }
}

fn named<'a>(lin: &'a Linear, name: &str) -> Result<&'a Subspace, InputError> {
    lin.subspaces.get(name).ok_or_else(|| {
        let known: Vec<&str> = lin.subspaces.keys().map(String::as_str).collect();
        InputError(format!("no subspace `{name}` (known: {})", known.join(", ")))
    })
}

fn equations(command: &str, eqs: &EquationSet) -> Report {
    let rec = eqs.record();
    Report {
        text: eqs.to_string(),
        json: json!({
            "equations": rec.equations,
            "space": rec.space,
            "meta": { "command": command, "text": rec.text },
        }),
        ok: true,
    }
}

fn classify_cmd(f: &ProblemFile, name: &str, l: Option<usize>) -> Result<Report, InputError> {
    let lin = linear(f)?;
    let w = named(lin, name)?;
    let l = l.unwrap_or(lin.space.k());
    let c = classify(&lin.space, w, l).or_else(fail)?;
    let label = if c.lagrangian {
        "lagrangian"
    } else if c.isotropic {
        "isotropic"
    } else if c.coisotropic {
        "coisotropic"
    } else {
        "none"
    };
    let mut text = format!("{label}\n");
    for (k, v) in [
        ("isotropic", c.isotropic),
        ("coisotropic", c.coisotropic),
        ("lagrangian", c.lagrangian),
        ("multisymplectic", c.multisymplectic),
    ] {
        writeln!(text, "{k}: {v}").unwrap();
    }
    Ok(Report {
        text,
        json: json!({
            "command": "classify",
            "subspace": name,
            "dim": w.dim(),
            "l": l,
            "label": label,
            "flags": c,
            "model": lin.model.as_ref().map(ModelRecord::from),
        }),
        ok: true,
    })
}

fn darboux_cmd(f: &ProblemFile, name: &str, horizontal: Option<(&str, usize)>) -> Result<Report, InputError> {
    let lin = linear(f)?;
    let w = named(lin, name)?;
    let d = match horizontal {
        None => darboux(&lin.space, w),
        Some((e, r)) => darboux_horizontal(&lin.space, w, named(lin, e)?, r),
    }
    .or_else(fail)?;
    let pulls_back = d.pullback_identity_holds(&lin.space);
    let relations = d.relations_hold(&lin.space);
    let rec = DarbouxRecord::from(&d);
    let row = |r: &[msgeo::Scalar]| r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    let mut text = String::new();
    writeln!(
        text,
        "model: n0 = {}, k = {}, r = {}",
        d.model.base_dim, d.model.k, d.model.r
    )
    .unwrap();
    writeln!(text, "normalization: {}", d.normalization).unwrap();
    writeln!(text, "basis:").unwrap();
    for (i, v) in d.e_vectors().iter().enumerate() {
        writeln!(text, "  e{} = [{}]", i + 1, row(&v.0)).unwrap();
    }
    for (j, v) in d.f_vectors().iter().enumerate() {
        writeln!(text, "  f{} = [{}]", j + 1, row(&v.0)).unwrap();
    }
    writeln!(text, "psi:").unwrap();
    for r in &rec.psi {
        writeln!(text, "  [{}]", row(r)).unwrap();
    }
    writeln!(text, "pullback identity: {pulls_back}").unwrap();
    writeln!(text, "relations: {relations}").unwrap();
    Ok(Report {
        text,
        json: json!({
            "command": "darboux",
            "result": rec,
            "pullback_identity": pulls_back,
            "relations": relations,
        }),
        ok: pulls_back && relations,
    })
}

fn de_donder_cmd(f: &ProblemFile) -> Result<Report, InputError> {
    let p = lagrangian(f)?;
    let conn = f
        .connection
        .clone()
        .unwrap_or_else(|| field::Connection::generic_on_z(p.n, p.m));
    let r = field::de_donder_residuals(p, &conn).or_else(fail)?;
    let text = format!("first:\n{}second:\n{}", r.first, r.second);
    let all = r.all().record();
    Ok(Report {
        text,
        json: json!({
            "equations": all.equations,
            "space": all.space,
            "meta": { "command": "de-donder", "text": all.text, "first": r.first.len() },
        }),
        ok: true,
    })
}

fn legendre_cmd(f: &ProblemFile) -> Result<Report, InputError> {
    let p = lagrangian(f)?;
    let leg = field::legendre(p);
    let h = field::hamiltonian_from_lagrangian(p);
    let mut text = leg.to_string();
    match &h {
        Ok(hp) => writeln!(text, "H = {}", hp.hamiltonian).unwrap(),
        Err(e) => writeln!(text, "H: not derivable symbolically ({e})").unwrap(),
    }
    let maps: Vec<Value> = leg
        .leg_map()
        .iter()
        .map(|(v, e)| json!({ "var": v.to_string(), "expr": e.to_expr() }))
        .collect();
    Ok(Report {
        text,
        json: json!({
            "command": "legendre",
            "leg": maps,
            "hamiltonian": h.as_ref().ok().map(|hp| hp.hamiltonian.to_string()),
            "reason": h.as_ref().err().map(|e| e.to_string()),
        }),
        ok: true,
    })
}

fn hamilton_cmd(f: &ProblemFile) -> Result<Report, InputError> {
    let hp = hamiltonian(f)?;
    match &f.connection {
        Some(c @ field::Connection::OnZStar { .. }) => Ok(equations(
            "hamilton",
            &field::hamilton_de_donder_residuals(&hp, c).or_else(fail)?,
        )),
        Some(_) => fail("hamilton needs a connection on Z* (give `p`, not `z`)"),
        None => Ok(equations("hamilton", &field::hamilton_equations(&hp))),
    }
}

fn point(f: &ProblemFile) -> Result<&field::ZStarJet, InputError> {
    let pt = f
        .point
        .as_ref()
        .ok_or_else(|| InputError("this command needs a [point]".into()))?;
    pt.validate().or_else(fail)?;
    Ok(pt)
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(" ")
}

fn fmt_grid(v: &[Vec<f64>]) -> String {
    v.iter()
        .map(|r| format!("[{}]", fmt_list(r)))
        .collect::<Vec<_>>()
        .join(" ")
}

fn alpha_cmd(f: &ProblemFile) -> Result<Report, InputError> {
    let pt = point(f)?;
    let a = field::alpha_map(pt).or_else(fail)?;
    let text = format!(
        "x: {}\ny: {}\nz: {}\na: {}\nb: {}\n",
        fmt_list(&a.x),
        fmt_list(&a.y),
        fmt_grid(&a.z),
        fmt_list(&a.a),
        fmt_grid(&a.b)
    );
    Ok(Report {
        text,
        json: json!({ "command": "alpha", "image": a }),
        ok: true,
    })
}

fn beta_cmd(f: &ProblemFile) -> Result<Report, InputError> {
    let hp = hamiltonian(f)?;
    let pt = point(f)?;
    let b = field::beta_map(&hp, pt).or_else(fail)?;
    let text = format!(
        "x: {}\ny: {}\np: {}\na: {}\nb: {}\n",
        fmt_list(&b.x),
        fmt_list(&b.y),
        fmt_grid(&b.p),
        fmt_list(&b.a),
        fmt_grid(&b.b)
    );
    Ok(Report {
        text,
        json: json!({ "command": "beta", "image": b, "hamiltonian": hp.hamiltonian.to_string() }),
        ok: true,
    })
}

fn triple_cmd(f: &ProblemFile, samples: usize, seed: u64, parallel: bool) -> Result<Report, InputError> {
    let p = lagrangian(f)?;
    if samples == 0 {
        return fail("--samples must be positive");
    }
    let r = field::verify_triple(p, samples, seed, parallel).or_else(fail)?;
    let worst = r.samples.iter().fold(0.0_f64, |w, s| w.max(s.residual_max));
    let mut text = String::new();
    writeln!(text, "hamiltonian: {}", r.hamiltonian).unwrap();
    writeln!(text, "omega_identity: {}", r.omega_identity).unwrap();
    writeln!(text, "primitive_identity: {}", r.primitive_identity).unwrap();
    writeln!(text, "h_primitive_identity: {}", r.h_primitive_identity).unwrap();
    match r.homotopy_identity {
        Some(b) => writeln!(text, "homotopy_identity: {b}").unwrap(),
        None => writeln!(text, "homotopy_identity: n/a").unwrap(),
    }
    writeln!(text, "beta_consistent: {}", r.beta_consistent).unwrap();
    writeln!(text, "samples: {} (seed {})", r.samples.len(), r.seed).unwrap();
    writeln!(text, "max residual: {worst:e} (tolerance {:e})", r.tolerance).unwrap();
    writeln!(text, "result: {}", if r.passed { "pass" } else { "FAIL" }).unwrap();
    Ok(Report {
        text,
        ok: r.passed,
        json: json!({ "command": "verify-triple", "max_residual": worst, "report": r }),
    })
}

fn homotopy_cmd(f: &ProblemFile) -> Result<Report, InputError> {
    let w = match &f.payload {
        Payload::Form(w) => w,
        _ => return fail("homotopy needs a [form] file"),
    };
    let i = homotopy_operator(w).or_else(fail)?;
    let lhs = match w.degree() {
        0 => homotopy_operator(&w.d()).or_else(fail)?,
        _ => homotopy_operator(&w.d()).or_else(fail)?.try_add(&i.d()).or_else(fail)?,
    };
    let rhs = w.try_sub(&w.at_origin()).or_else(fail)?;
    let identity = lhs == rhs;
    let d_of_i = if w.degree() > 0 && w.d().is_zero() {
        Some(i.d() == *w)
    } else {
        None
    };
    let mut text = format!("I(w) = {i}\nidentity: {identity}\n");
    if let Some(b) = d_of_i {
        writeln!(text, "closed, d(I(w)) = w: {b}").unwrap();
    }
    Ok(Report {
        text,
        json: json!({
            "command": "homotopy",
            "primitive": CoordFormRecord::from(&i),
            "identity": identity,
            "exact": d_of_i,
        }),
        ok: identity,
    })
}
