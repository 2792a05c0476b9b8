use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use maxcomm::io::{
    emit_table_with_meta, meta_path, read_grid, table_json, write_grid, CubeRecord, GridEnvelope, Real, TableFormat,
    Tabular, WeightSidecar,
};
use maxcomm::lipschitz::{lip_profile, maximal_char_functional, sharp_char_functional};
use maxcomm::maximal::{self, OperatorOutput};
use maxcomm::verification::{
    build_corpus, estimate_operator_norm, refinement_experiment, stability_experiment, verify_a1_consistency,
    verify_commutator_identity, verify_converse_chain, verify_holder_monotonicity, verify_lemma21_pointwise,
    verify_lemma22_oscillation, verify_lemma24_domination, verify_lemma25_ratios, verify_mean_split,
    verify_operator_norms, verify_pointwise_domination, verify_restriction_identities, weight_label, Corpus,
    CorpusSizes, OperatorTag, RefinementConfig, StabilityConfig, VerificationReport,
};
use maxcomm::{Cube, CubeFamily, Error, Exponents, FamilyMode, Grid, GridFunction, Result, Weight};
use serde_json::{json, Value};

use crate::{
    Command, Common, ComputeArgs, CorpusArgs, CorpusSize, ExperimentArgs, FunctionalsArgs, NormsArgs, VerifyArgs,
};

const DEFAULT_P: f64 = 2.0;
const DEFAULT_BETA: f64 = 0.25;
const HOLDER_S: [f64; 5] = [1.0, 1.5, 2.0, 3.0, 4.0];
const SUITES: [&str; 12] = [
    "restriction",
    "domination",
    "mean-split",
    "converse",
    "holder",
    "commutator-identity",
    "a1",
    "lemma21",
    "lemma22",
    "lemma24",
    "lemma25",
    "operator-norms",
];

/// Runs a command; `Ok(false)` means a suite or experiment failed.
pub fn run(command: Command) -> Result<bool> {
    match command {
        Command::Compute(a) => compute(a),
        Command::Norms(a) => norms(a),
        Command::Functionals(a) => functionals(a),
        Command::Verify(a) => verify(a),
        Command::Experiment(a) => experiment(a),
        Command::Corpus(a) => corpus(a),
    }
}

fn usage(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

/// Validated settings shared by every command.
struct Setup {
    grid: Grid,
    family: CubeFamily,
    exps: Exponents,
    meta: BTreeMap<String, Value>,
}

impl Setup {
    /// `grid` comes from the input file when there is one.
    fn new(command: &str, c: &Common, grid: Option<Grid>) -> Result<Setup> {
        let grid = match grid {
            Some(g) => g,
            None => lattice(c)?,
        };
        let exps = exponents(c, grid.dim())?;
        if let Some(max) = c.max_points {
            if grid.len() > max {
                return Err(usage(format!("grid has {} points, more than --max-points {max}", grid.len())));
            }
        }
        init_threads(c.threads)?;
        let family = CubeFamily::new(grid, family_mode(c, &grid)?);
        let mut meta = BTreeMap::new();
        meta.insert("command".into(), json!(command));
        meta.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        meta.insert("seed".into(), json!(c.seed));
        meta.insert("threads".into(), json!(rayon::current_num_threads()));
        meta.insert("family".into(), json!(family.mode.to_string()));
        meta.insert("shape".into(), json!(grid.shape()));
        meta.insert("spacing".into(), json!(Real(grid.spacing())));
        meta.insert(
            "exponents".into(),
            json!({
                "n": exps.n,
                "p": Real(exps.p),
                "beta": Real(exps.beta),
                "q": Real(exps.q),
                "r": exps.r.map(Real),
                "s": exps.s.map(Real),
            }),
        );
        Ok(Setup { grid, family, exps, meta })
    }
}

fn lattice(c: &Common) -> Result<Grid> {
    let shape = c.shape.clone().unwrap_or_else(|| vec![c.n; c.dim]);
    let first = *shape.first().ok_or_else(|| usage("empty --shape"))?;
    Grid::new(&shape, c.h.unwrap_or(1.0 / first as f64))
}

fn exponents(c: &Common, dim: usize) -> Result<Exponents> {
    let (p, beta) = (c.p.unwrap_or(DEFAULT_P), c.beta.unwrap_or(DEFAULT_BETA));
    let mut e = match c.q {
        Some(q) => Exponents::with_q(p, beta, q, dim)?,
        None => Exponents::new(p, beta, dim)?,
    };
    if let Some(r) = c.r {
        e = e.with_r(r)?;
    }
    if let Some(s) = c.s {
        e = e.with_s(s)?;
    }
    Ok(e)
}

fn init_threads(threads: Option<usize>) -> Result<()> {
    if let Some(t) = threads {
        if t == 0 {
            return Err(usage("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| usage(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn family_mode(c: &Common, grid: &Grid) -> Result<FamilyMode> {
    let mode = FamilyMode::from_str(&c.family)?;
    let Some(budget) = c.max_cubes else { return Ok(mode) };
    let count = match mode {
        FamilyMode::All => CubeFamily::count_all(grid),
        FamilyMode::Dyadic => CubeFamily::dyadic(*grid).enumerate().len(),
        FamilyMode::Sampled { count, .. } => count,
    };
    if count <= budget {
        return Ok(mode);
    }
    let sampled = FamilyMode::Sampled { count: budget, seed: c.seed };
    eprintln!("warning: family `{mode}` has {count} cubes, more than --max-cubes {budget}; using `{sampled}`");
    Ok(sampled)
}

/// Reads a grid file. CSV files take their spacing from --h, or 1 / (points
/// along the first axis).
fn read_input(path: &Path, h: Option<f64>) -> Result<GridFunction> {
    let f = read_grid(path, h.unwrap_or(1.0))?;
    if h.is_some() || TableFormat::for_path(path) == TableFormat::Json {
        return Ok(f);
    }
    let grid = Grid::new(f.grid().shape(), 1.0 / f.grid().shape()[0] as f64)?;
    GridFunction::new(grid, f.into_values())
}

fn required_input(c: &Common) -> Result<GridFunction> {
    let path = c.input.as_ref().ok_or_else(|| usage("--input is required"))?;
    read_input(path, c.h)
}

fn weight_or_unit(path: Option<&PathBuf>, c: &Common, grid: Grid) -> Result<Weight> {
    match path {
        Some(p) => Weight::new(read_input(p, c.h)?),
        None => Ok(Weight::unit(grid)),
    }
}

fn output_format(c: &Common) -> Result<TableFormat> {
    match (&c.format, &c.output) {
        (Some(f), _) => f.parse(),
        (None, Some(path)) => Ok(TableFormat::for_path(path)),
        (None, None) => Ok(TableFormat::Json),
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, format!("{text}\n"))?;
    Ok(())
}

fn emit<T: Tabular + ?Sized>(table: &T, c: &Common, meta: &BTreeMap<String, Value>) -> Result<()> {
    let format = output_format(c)?;
    match &c.output {
        Some(path) => emit_table_with_meta(table, format, path, meta),
        None if format == TableFormat::Json => {
            println!("{}", table_json(table, meta)?);
            Ok(())
        }
        None => Err(usage("--format csv needs --output")),
    }
}

fn grid_json(f: &GridFunction, meta: &BTreeMap<String, Value>) -> Result<String> {
    let mut v = serde_json::to_value(GridEnvelope::new(f))?;
    if let Value::Object(m) = &mut v {
        m.insert("meta".into(), serde_json::to_value(meta)?);
    }
    Ok(serde_json::to_string_pretty(&v)?)
}

fn emit_grid(f: &GridFunction, c: &Common, meta: &BTreeMap<String, Value>) -> Result<()> {
    let format = output_format(c)?;
    match (&c.output, format) {
        (Some(path), TableFormat::Json) => write_text(path, &grid_json(f, meta)?),
        (Some(path), TableFormat::Csv) => {
            write_grid(path, f)?;
            write_text(&meta_path(path), &serde_json::to_string_pretty(meta)?)
        }
        (None, TableFormat::Json) => {
            println!("{}", grid_json(f, meta)?);
            Ok(())
        }
        (None, TableFormat::Csv) => Err(usage("--format csv needs --output")),
    }
}

fn compute(a: ComputeArgs) -> Result<bool> {
    let c = &a.common;
    let f = required_input(c)?;
    let s = Setup::new("compute", c, Some(*f.grid()))?;
    let symbol = || -> Result<GridFunction> {
        let path = a.symbol.as_ref().ok_or_else(|| usage(format!("--op {} needs --symbol", a.op)))?;
        read_input(path, c.h)
    };
    let with_argmax = |out: OperatorOutput| (out.values, out.argmax);
    let (values, argmax) = match a.op.as_str() {
        "maximal" | "M" => with_argmax(maximal::hl_maximal(&f, &s.family)?),
        "sharp" => with_argmax(maximal::sharp_maximal(&f, &s.family)?),
        "restricted" => {
            let spec = a.cube.as_ref().ok_or_else(|| usage("--op restricted needs --cube anchor…,side"))?;
            if spec.len() != s.grid.dim() + 1 {
                return Err(usage(format!("--cube needs {} entries", s.grid.dim() + 1)));
            }
            let q0 = Cube::new(&spec[..s.grid.dim()], spec[s.grid.dim()]);
            let out = maximal::restricted_maximal(&f, &q0, &s.family)?;
            let shape = vec![q0.side; s.grid.dim()];
            let grid = Grid::new(&shape, s.grid.spacing())?;
            (GridFunction::new(grid, out.values_on_q0())?, None)
        }
        "frac" | "fractional" => {
            let r = s.exps.r.ok_or_else(|| usage("--op frac needs --r"))?;
            let mu = weight_or_unit(a.weight.as_ref(), c, s.grid)?;
            with_argmax(maximal::weighted_fractional_maximal(&f, &mu, s.exps.beta, r, &s.family)?)
        }
        op => match OperatorTag::from_str(op)? {
            OperatorTag::MaximalCommutator => with_argmax(maximal::maximal_commutator(&symbol()?, &f, &s.family)?),
            OperatorTag::CommutatorMaximal => (maximal::commutator_maximal(&symbol()?, &f, &s.family)?, None),
            OperatorTag::CommutatorSharp => (maximal::commutator_sharp(&symbol()?, &f, &s.family)?, None),
            OperatorTag::FractionalMaximal => unreachable!("handled above"),
        },
    };
    let mut meta = s.meta;
    meta.insert("op".into(), json!(a.op));
    emit_grid(&values, c, &meta)?;
    if let Some(path) = &a.argmax {
        let cubes = argmax.ok_or_else(|| usage(format!("--op {} has no argmax", a.op)))?;
        let records: Vec<CubeRecord> = cubes.iter().map(|q| CubeRecord::new(q, s.grid.dim())).collect();
        write_text(path, &serde_json::to_string_pretty(&json!({ "argmax": records, "meta": meta }))?)?;
    }
    Ok(true)
}

fn norms(a: NormsArgs) -> Result<bool> {
    let c = &a.common;
    let op = OperatorTag::from_str(&a.op)?;
    let b = required_input(c)?;
    let s = Setup::new("norms", c, Some(*b.grid()))?;
    let mu = weight_or_unit(a.weight.as_ref(), c, s.grid)?;
    let sizes = CorpusSizes { functions: a.functions, ..CorpusSizes::default() };
    let corpus = build_corpus(c.seed, s.grid, sizes)?;
    let est = estimate_operator_norm(op, &b, &corpus.functions, &s.exps, &mu, &s.family)?;
    emit(&est, c, &s.meta)?;
    Ok(true)
}

fn functionals(a: FunctionalsArgs) -> Result<bool> {
    let c = &a.common;
    let b = required_input(c)?;
    let s = Setup::new("functionals", c, Some(*b.grid()))?;
    let mu = weight_or_unit(a.weight.as_ref(), c, s.grid)?;
    let e = &s.exps;
    let exponent = e.s.unwrap_or(e.p);
    let profile = match a.kind.as_str() {
        "lip" => lip_profile(&b, &mu, e.beta, e.p, &s.family)?,
        "maximal" => maximal_char_functional(&b, &mu, e.beta, exponent, &s.family)?,
        "sharp" => sharp_char_functional(&b, &mu, e.beta, exponent, &s.family)?,
        k => return Err(usage(format!("unknown --kind `{k}` (expected lip, maximal or sharp)"))),
    };
    let mut meta = s.meta;
    meta.insert("kind".into(), json!(a.kind));
    emit(&profile, c, &meta)?;
    Ok(true)
}

fn sizes(s: &CorpusSize) -> CorpusSizes {
    CorpusSizes { functions: s.functions, symbols: s.symbols, weights: s.weights }
}

/// Several suite reports written as one table.
struct Reports(Vec<VerificationReport>);

impl Tabular for Reports {
    fn kind(&self) -> &'static str {
        "reports"
    }

    fn csv_header(&self) -> Vec<String> {
        let mut h = vec!["suite".to_string()];
        h.extend(VerificationReport::new("").csv_header());
        h
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        self.0
            .iter()
            .flat_map(|r| {
                r.csv_rows().into_iter().map(|row| std::iter::once(r.suite.clone()).chain(row).collect())
            })
            .collect()
    }

    fn to_json(&self) -> Value {
        Value::Array(self.0.iter().map(Tabular::to_json).collect())
    }
}

fn run_suite(name: &str, corpus: &Corpus, s: &Setup) -> Result<VerificationReport> {
    let (fam, e) = (&s.family, &s.exps);
    let r = e.r.unwrap_or((1.0 + e.p) / 2.0);
    let over_weights = |title: &str, f: &dyn Fn(&Weight) -> Result<VerificationReport>| {
        let mut report = VerificationReport::new(title);
        for mu in &corpus.weights {
            report.merge(f(mu)?);
        }
        Ok::<_, Error>(report)
    };
    match name {
        "restriction" => verify_restriction_identities(corpus, fam),
        "domination" => verify_pointwise_domination(corpus, fam),
        "mean-split" => verify_mean_split(corpus, fam),
        "converse" => over_weights("converse_chain", &|mu| verify_converse_chain(corpus, fam, e, mu)),
        "holder" => verify_holder_monotonicity(corpus, fam, e.beta, &HOLDER_S),
        "commutator-identity" => {
            over_weights("commutator_identity", &|mu| verify_commutator_identity(corpus, fam, e, mu))
        }
        "a1" => verify_a1_consistency(corpus, fam),
        "lemma21" => verify_lemma21_pointwise(corpus, e.beta),
        "lemma22" => verify_lemma22_oscillation(corpus, fam, e.beta),
        "lemma24" => verify_lemma24_domination(corpus, fam, e.beta, r),
        "lemma25" => verify_lemma25_ratios(corpus, fam, e.beta, r),
        "operator-norms" => verify_operator_norms(corpus, fam, e),
        other => Err(usage(format!("unknown suite `{other}` (expected one of {} or all)", SUITES.join(", ")))),
    }
}

fn verify(a: VerifyArgs) -> Result<bool> {
    let c = &a.common;
    let s = Setup::new("verify", c, None)?;
    let names: Vec<&str> = if a.suite == "all" { SUITES.to_vec() } else { vec![a.suite.as_str()] };
    if let Some(bad) = names.iter().find(|n| !SUITES.contains(n)) {
        return Err(usage(format!("unknown suite `{bad}` (expected one of {} or all)", SUITES.join(", "))));
    }
    let corpus = build_corpus(c.seed, s.grid, sizes(&a.sizes))?;
    let reports = names.iter().map(|n| run_suite(n, &corpus, &s)).collect::<Result<Vec<_>>>()?;
    for r in &reports {
        eprintln!(
            "{}: {} ({} cases, {} failures)",
            r.suite,
            if r.passed() { "pass" } else { "FAIL" },
            r.cases,
            r.failure_count
        );
    }
    let passed = reports.iter().all(VerificationReport::passed);
    let mut meta = s.meta;
    meta.insert("suite".into(), json!(a.suite));
    emit(&Reports(reports), c, &meta)?;
    Ok(passed)
}

fn experiment(a: ExperimentArgs) -> Result<bool> {
    let c = &a.common;
    if c.dim != 1 || c.shape.as_ref().is_some_and(|s| s.len() != 1) {
        return Err(usage("experiments run on 1D lattices"));
    }
    let mut s = Setup::new("experiment", c, None)?;
    s.meta.insert("name".into(), json!(a.name));
    // Lattice and family flags do not apply; exponents apply only when given.
    for key in ["family", "shape", "spacing"] {
        s.meta.remove(key);
    }
    let explicit = c.p.is_some() || c.beta.is_some() || c.q.is_some() || c.r.is_some();
    match a.name.as_str() {
        "refinement" => {
            let mut config = RefinementConfig::new()?;
            if explicit {
                config.exponents = s.exps;
            }
            s.meta.insert("exponents".into(), exps_json(&config.exponents));
            let table = refinement_experiment(&config)?;
            emit(&table, c, &s.meta)?;
            Ok(table.report.passed())
        }
        "stability" => {
            let mut config = StabilityConfig::new(c.seed)?;
            if explicit {
                config.exponents = s.exps;
            }
            s.meta.insert("exponents".into(), exps_json(&config.exponents));
            let report = stability_experiment(&config)?;
            emit(&report, c, &s.meta)?;
            Ok(report.passed())
        }
        other => Err(usage(format!("unknown experiment `{other}` (expected refinement or stability)"))),
    }
}

fn exps_json(e: &Exponents) -> Value {
    json!({ "n": e.n, "p": Real(e.p), "beta": Real(e.beta), "q": Real(e.q), "r": e.r.map(Real), "s": e.s.map(Real) })
}

fn corpus(a: CorpusArgs) -> Result<bool> {
    let c = &a.common;
    let dir = c.output.as_ref().ok_or_else(|| usage("corpus needs --output DIR"))?;
    let s = Setup::new("corpus", c, None)?;
    let ext = match c.format.as_deref().map(TableFormat::from_str).transpose()? {
        Some(TableFormat::Csv) => "csv",
        _ => "json",
    };
    let corpus = build_corpus(c.seed, s.grid, sizes(&a.sizes))?;
    fs::create_dir_all(dir)?;
    for m in &corpus.functions {
        write_grid(&dir.join(format!("{}.{ext}", m.name)), &m.function)?;
    }
    for b in &corpus.symbols {
        write_grid(&dir.join(format!("{}.{ext}", b.name)), &b.function)?;
    }
    let mut labels = Vec::new();
    for (i, w) in corpus.weights.iter().enumerate() {
        let label = weight_label(i, w);
        write_grid(&dir.join(format!("{label}.{ext}")), w.function())?;
        let side = WeightSidecar::new(w, &s.family)?;
        write_text(&dir.join(format!("{label}.sidecar.json")), &serde_json::to_string_pretty(&side)?)?;
        labels.push(label);
    }
    let manifest = json!({
        "meta": s.meta,
        "functions": corpus.functions.iter().map(|m| m.name.clone()).collect::<Vec<_>>(),
        "symbols": corpus.symbols.iter().map(|b| json!({
            "name": b.name, "nonnegative": b.nonnegative, "lipschitz": b.lipschitz,
        })).collect::<Vec<_>>(),
        "weights": labels,
    });
    write_text(&dir.join("manifest.json"), &serde_json::to_string_pretty(&manifest)?)?;
    Ok(true)
}
