use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use funcint::engine::{
    canonicalize, catalog, evaluate, evaluate_via_series_traced, instantiate_closed_form, parse, square_trick_expand, Bindings,
    ClosedForm,
};
use funcint::kernelalg::{load_field, LoadedField, QuadratureGrid};
use funcint::oracle::{run_case, BindingSource, VerificationCase, VerificationReport};
use funcint::wick::{carleman_check, count_pairings, enumerate_pairings_with_cap, measure_moment_with_cap};
use serde_json::{json, Value};

use crate::args::{Format, GlobalOpts, Route};
use crate::error::CliError;

/// Rendered output plus whether every check passed.
pub struct Outcome {
    pub text: String,
    pub ok: bool,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, ok: true }
    }
}

fn render(opts: &GlobalOpts, value: Value, text: String) -> String {
    match opts.format {
        Format::Json => serde_json::to_string_pretty(&value).expect("json serializes") + "\n",
        Format::Text => text,
    }
}

/// Loads `NAME=PATH` bindings; relative paths resolve against `base`.
pub fn load_bindings(specs: &[String], base: Option<&Path>) -> Result<Bindings, CliError> {
    let mut bindings = Bindings::new();
    let mut grid: Option<Arc<QuadratureGrid>> = None;
    for spec in specs {
        let (name, path) = spec
            .split_once('=')
            .filter(|(n, p)| !n.is_empty() && !p.is_empty())
            .ok_or_else(|| CliError::Usage(format!("binding '{spec}' is not NAME=PATH")))?;
        let path = match base {
            Some(b) if Path::new(path).is_relative() => b.join(path),
            _ => PathBuf::from(path),
        };
        let field = load_field(&path, grid.clone()).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        grid.get_or_insert_with(|| field.grid().clone());
        match field {
            LoadedField::Kernel(k) => {
                bindings.kernels.insert(name.to_string(), k);
            }
            LoadedField::Vector(v) => {
                bindings.vectors.insert(name.to_string(), v);
            }
        }
    }
    Ok(bindings)
}

fn binding_dim(b: &Bindings) -> Option<usize> {
    b.kernels.values().map(|k| k.dim()).chain(b.vectors.values().map(|v| v.grid().dim())).next()
}

pub fn eval(opts: &GlobalOpts, integral: &str, via: Route) -> Result<Outcome, CliError> {
    let ast = parse(integral)?;
    let qf = canonicalize(&ast)?;
    let mut trace: Vec<String> = Vec::new();
    let cf: ClosedForm = match via {
        Route::Catalog => evaluate(&qf)?,
        Route::Series => {
            let s = evaluate_via_series_traced(&qf)?;
            trace = s.trace;
            s.post_limit
        }
        Route::Square => {
            let t = square_trick_expand(&qf)?;
            trace = t.lines;
            t.result
        }
    };
    let bindings = load_bindings(&opts.binds, None)?;
    let dim = opts.dim.or_else(|| binding_dim(&bindings));
    let value = match dim {
        Some(d) => Some((d, instantiate_closed_form(&cf, &bindings, d)?)),
        None => None,
    };

    let assumptions: Vec<String> = cf.assumptions.iter().map(|a| a.to_string()).collect();
    let tags: Vec<String> = cf.residual_tags.iter().map(|t| t.to_string()).collect();
    let mut text = format!("{cf}\n");
    let none_or = |v: &[String]| if v.is_empty() { "none".to_string() } else { v.join(", ") };
    let _ = writeln!(text, "assumptions: {}", none_or(&assumptions));
    let _ = writeln!(text, "residual tags: {}", none_or(&tags));
    if let Some((d, z)) = value {
        let _ = writeln!(text, "value at D={d}: {:e}{:+e}i", z.re, z.im);
    }
    for line in &trace {
        let _ = writeln!(text, "  {line}");
    }
    let json = json!({
        "dsl": ast.to_string(),
        "closed_form": cf.to_string(),
        "assumptions": assumptions,
        "residual_tags": tags,
        "value": value.map(|(d, z)| json!({"dim": d, "re": z.re, "im": z.im})),
        "trace": trace,
    });
    Ok(Outcome::ok(render(opts, json, text)))
}

fn seed(opts: &GlobalOpts) -> Result<u64, CliError> {
    match std::env::var("FUNCINT_SEED") {
        Ok(s) => s.trim().parse().map_err(|_| CliError::Usage(format!("FUNCINT_SEED='{s}' is not an unsigned integer"))),
        Err(_) => Ok(opts.seed),
    }
}

fn custom_case(opts: &GlobalOpts, path: &Path, seed: u64) -> Result<VerificationCase, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let dsl = v.get("dsl").and_then(Value::as_str).ok_or_else(|| CliError::Input("case file needs a 'dsl' string".into()))?;
    let name = v.get("name").and_then(Value::as_str).unwrap_or("custom");
    let mut specs: Vec<String> = Vec::new();
    if let Some(map) = v.get("bindings").and_then(Value::as_object) {
        let sorted: BTreeMap<_, _> = map.iter().collect();
        for (k, p) in sorted {
            let p = p.as_str().ok_or_else(|| CliError::Input(format!("binding '{k}' must be a path string")))?;
            specs.push(format!("{k}={p}"));
        }
    }
    let bindings = load_bindings(&specs, path.parent())?;
    let dims: Vec<usize> = match v.get("dims").and_then(Value::as_array) {
        Some(a) => a.iter().map(|d| d.as_u64().map(|x| x as usize)).collect::<Option<_>>().ok_or_else(|| CliError::Input("'dims' must be integers".into()))?,
        None => binding_dim(&bindings).map(|d| vec![d]).unwrap_or_else(|| opts.dims.clone()),
    };
    let source = if specs.is_empty() { BindingSource::Random } else { BindingSource::Explicit(bindings) };
    Ok(VerificationCase {
        name: name.to_string(),
        dsl: dsl.to_string(),
        bindings: source,
        dims,
        tolerance: opts.tol,
        mc_samples: opts.mc_samples,
        seed,
    })
}

pub fn verify(opts: &GlobalOpts, selector: &str) -> Result<Outcome, CliError> {
    let seed = seed(opts)?;
    if opts.dims.is_empty() || opts.dims.contains(&0) {
        return Err(CliError::Usage("--dims must list positive dimensions".into()));
    }
    let mut cases: Vec<VerificationCase> = if selector.eq_ignore_ascii_case("all") {
        catalog().iter().filter_map(|c| VerificationCase::catalog(c.id, &opts.dims, opts.tol, opts.mc_samples, seed)).collect()
    } else if let Some(c) = VerificationCase::catalog(selector, &opts.dims, opts.tol, opts.mc_samples, seed) {
        vec![c]
    } else if Path::new(selector).is_file() {
        vec![custom_case(opts, Path::new(selector), seed)?]
    } else {
        return Err(CliError::Usage(format!("unknown case '{selector}': expected A..J, all, or a case file")));
    };
    if !opts.binds.is_empty() {
        let b = load_bindings(&opts.binds, None)?;
        for c in &mut cases {
            c.bindings = BindingSource::Explicit(b.clone());
        }
    }
    let reports: Vec<VerificationReport> = cases.iter().map(run_case).collect();
    let ok = reports.iter().all(VerificationReport::passed);
    let text = reports.iter().map(VerificationReport::to_text).collect::<Vec<_>>().join("\n");
    let json = if selector.eq_ignore_ascii_case("all") { json!(reports) } else { json!(reports[0]) };
    Ok(Outcome { text: render(opts, json, text), ok })
}

pub fn moments(opts: &GlobalOpts, order: u32, cap: u32) -> Result<Outcome, CliError> {
    let m = measure_moment_with_cap(order, cap)?;
    let mut text = format!("{m}\n");
    let _ = writeln!(text, "prefactor: {}", m.prefactor_text());
    let _ = writeln!(text, "terms: {}", m.terms.len());
    for t in m.term_texts() {
        let _ = writeln!(text, "  {t}");
    }
    let json = serde_json::to_value(&m).expect("moment serializes");
    Ok(Outcome::ok(render(opts, json, text)))
}

pub fn pairings(opts: &GlobalOpts, n: u32, list: bool, cap: u32) -> Result<Outcome, CliError> {
    let count = count_pairings(n)?;
    let listed = if list { Some(enumerate_pairings_with_cap(n, cap)?) } else { None };
    let mut text = format!("rho({n}) = {count}\n");
    for p in listed.iter().flatten() {
        let _ = writeln!(text, "  {p}");
    }
    let count_json = u64::try_from(&count).map(Value::from).unwrap_or_else(|_| Value::from(count.to_string()));
    let json = json!({
        "items": n,
        "count": count_json,
        "pairings": listed.map(|ps| ps.iter().map(|p| p.to_string()).collect::<Vec<_>>()),
    });
    Ok(Outcome::ok(render(opts, json, text)))
}

/// Upper bound on `--nmax`, keeping the termwise table in memory.
const CARLEMAN_NMAX_CAP: u64 = 10_000_000;

pub fn carleman(opts: &GlobalOpts, norm: f64, nmax: u64, full: bool) -> Result<Outcome, CliError> {
    if !(norm.is_finite() && norm > 0.0) {
        return Err(CliError::Usage(format!("--norm must be positive and finite, got {norm}")));
    }
    if nmax == 0 || nmax > CARLEMAN_NMAX_CAP {
        return Err(CliError::Usage(format!("--nmax must be in 1..={CARLEMAN_NMAX_CAP}, got {nmax}")));
    }
    let r = carleman_check(norm, nmax);
    let mut text = format!("|f| = {norm}, n_max = {nmax}\n");
    let _ = writeln!(text, "{:>10} {:>24} {:>24}", "n", "m_2n^(-1/2n)", "1/(2|f|sqrt(n))");
    let shown = |n: u64| full || n <= 10 || n == nmax || (n.is_multiple_of(10) && (n as f64).log10().fract() == 0.0);
    for n in (1..=nmax).filter(|&n| shown(n)) {
        let i = (n - 1) as usize;
        let _ = writeln!(text, "{n:>10} {:>24e} {:>24e}", r.terms[i], r.lower_bounds[i]);
    }
    let _ = writeln!(text, "partial sum: {:e}", r.partial_sum);
    let _ = writeln!(text, "bound sum: {:e}", r.bound_sum);
    let _ = writeln!(text, "termwise_ok: {}", r.termwise_ok);
    let json = serde_json::to_value(&r).expect("report serializes");
    Ok(Outcome::ok(render(opts, json, text)))
}
