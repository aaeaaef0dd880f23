//! Command-line front end: every operation as a subcommand over manifest
//! files.

pub mod manifest;

use std::fmt::Display;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use gcov_core::amalgam::{
    self, check_3ul, check_n_property, check_su, generate_instance, solve_with_automorphism, stepup_problem, stepup_solve,
    subset_list, AmalgamError, AmalgamationProblem, AutomorphicProblem, InstanceSpec, RawEmbedding, TheoryKind,
};
use gcov_core::cover::{attach_to_base, build_cover, check_exact_sequence, cocycle_cover, is_split, CoverError};
use gcov_core::extension::{extend_groupoid, is_coboundary, CocycleData, ExtensionError, ExtensionInput};
use gcov_core::finstruct::{FiniteStructure, SearchLimits, StructureError};
use gcov_core::group::GroupError;
use gcov_core::groupoid::{collapse_trivial, ConcreteFunctor, FiniteGroupoid, GroupoidError, Section};
use gcov_core::linear::{
    code_flagged_line, code_point_set, code_subspace, decode_subspace, flag_dual, flag_tensor, root_torsor, Field, LinearError,
    Subspace,
};

use manifest::{Body, FunctorPayload, Manifest, Meta, SchemaError, StructurePayload, SubspacePayload};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Validate,
    Classify,
    Quotient,
    Collapse,
    Section,
    Extend,
    Cocycle,
    Coboundary,
    Cover,
    Attach,
    Exact,
    Split,
    AmalgamValidate,
    AmalgamSolve,
    AmalgamCheck,
    #[value(name = "3ul")]
    ThreeUl,
    AutoSolve,
    Stepup,
    Generate,
    CodeSubspace,
    DecodeSubspace,
    FlagTensor,
    CodeLine,
    CodePoints,
    RootTorsor,
    /// Runs the argument vectors of a batch manifest in order.
    Batch,
}

impl Command {
    fn name(self) -> String {
        self.to_possible_value().expect("no skipped variants").get_name().to_string()
    }
}

#[derive(Debug, Parser)]
#[command(name = "gcov", version, about = "Finite groupoids, covers, amalgamation problems and linear codes")]
struct Cli {
    command: Command,
    /// Input manifest.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Where to write the output manifest; stdout by default.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    naming_bound: Option<usize>,
    /// pure_set, vector_space or parity.
    #[arg(long)]
    theory: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    bound: Option<usize>,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    degree_cap: Option<usize>,
}

enum Failure {
    Schema(SchemaError),
    Domain { name: String, message: String },
    Io(String),
}

/// Error types whose variant name is reported to the user.
trait Named: Display {
    fn name(&self) -> &'static str;
}

macro_rules! named {
    ($($ty:ty),*) => {
        $(impl Named for $ty {
            fn name(&self) -> &'static str {
                self.kind()
            }
        })*
    };
}

named!(GroupoidError, ExtensionError, CoverError, StructureError, AmalgamError, LinearError);

impl Named for GroupError {
    fn name(&self) -> &'static str {
        "GroupError"
    }
}

impl<E: Named> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Domain { name: e.name().to_string(), message: e.to_string() }
    }
}

impl From<SchemaError> for Failure {
    fn from(e: SchemaError) -> Self {
        Failure::Schema(e)
    }
}

fn usage(pointer: &str, message: impl Into<String>) -> Failure {
    Failure::Schema(SchemaError::new(pointer, message))
}

fn limits() -> SearchLimits {
    SearchLimits::with_universe(512)
}

struct Output {
    body: Body,
    summary: String,
}

fn report(result: impl Serialize, summary: impl Into<String>) -> Output {
    let result = serde_json::to_value(result).expect("reports serialize");
    Output { body: Body::Report(result), summary: summary.into() }
}

fn wrong_kind(cmd: Command, m: &Manifest, wanted: &[&str]) -> Failure {
    usage("/kind", format!("{} expects {}, got {}", cmd.name(), wanted.join(" or "), m.kind()))
}

fn groupoid_and_functor(p: &FunctorPayload) -> Result<(FiniteGroupoid, ConcreteFunctor), Failure> {
    let g = FiniteGroupoid::validate(&p.groupoid)?;
    let f = ConcreteFunctor::from_raw(&g, &p.functor)?;
    Ok((g, f))
}

fn section_ids(g: &FiniteGroupoid, s: &Section) -> Value {
    let rows: Vec<Vec<u64>> = s.choice.iter().map(|row| row.iter().map(|&m| g.morphism(m).id).collect()).collect();
    json!({ "objects": (0..g.object_count()).map(|a| g.object_id(a)).collect::<Vec<_>>(), "choice": rows })
}

fn base_sorts(p: &StructurePayload) -> Result<Vec<String>, Failure> {
    let sorts = if p.base_sorts.is_empty() { p.cover.as_ref().map(|c| c.base_sorts.clone()).unwrap_or_default() } else { p.base_sorts.clone() };
    if sorts.is_empty() {
        return Err(usage("/payload/base_sorts", "no base sorts given and the structure is not an attached cover"));
    }
    Ok(sorts)
}

fn theory_arg(cli: &Cli) -> Result<TheoryKind, Failure> {
    let name = cli.theory.as_deref().ok_or_else(|| usage("", "--theory is required"))?;
    let mut t = TheoryKind::parse(name).ok_or_else(|| usage("", format!("unknown theory {name:?}")))?;
    if let (TheoryKind::VectorSpace { q, .. }, Some(given)) = (&mut t, cli.q) {
        *q = given;
    }
    Ok(t)
}

fn required(v: Option<usize>, flag: &str) -> Result<usize, Failure> {
    v.ok_or_else(|| usage("", format!("--{flag} is required")))
}

fn problem(m: &Manifest, cmd: Command) -> Result<AmalgamationProblem, Failure> {
    match &m.body {
        Body::Problem(raw) => Ok(AmalgamationProblem::from_raw(raw)?),
        _ => Err(wrong_kind(cmd, m, &["problem"])),
    }
}

fn field(q: usize) -> Result<Field, Failure> {
    Ok(Field::new(q)?)
}

fn validate(m: &Manifest) -> Result<Output, Failure> {
    let checked = match &m.body {
        Body::Groupoid(raw) => {
            let g = FiniteGroupoid::validate(raw)?;
            let (triples, _) = g.associativity_check();
            json!({ "objects": g.object_count(), "morphisms": g.morphism_count(), "associativity_triples": triples })
        }
        Body::Functor(p) => {
            let (g, f) = groupoid_and_functor(p)?;
            json!({ "objects": g.object_count(), "morphisms": g.morphism_count(), "faithful": f.is_faithful(&g) })
        }
        Body::Structure(p) => json!({ "size": FiniteStructure::from_raw(&p.structure)?.size() }),
        Body::Cocycle(raw) => {
            let d = CocycleData::from_raw(raw)?;
            json!({ "group_order": d.group().order(), "kernel_order": d.kernel().order(), "note": d.note() })
        }
        Body::Problem(raw) => {
            let p = AmalgamationProblem::from_raw(raw)?;
            p.validate()?;
            json!({ "dimension": p.n })
        }
        Body::Extension(raw) => {
            let input = ExtensionInput::from_raw(raw)?;
            json!({ "objects": input.base.object_count(), "supergroup_order": input.supergroup.order() })
        }
        Body::NormalSystem(p) => {
            let g = FiniteGroupoid::validate(&p.groupoid)?;
            p.system.resolve(&g)?;
            json!({})
        }
        Body::AutomorphicProblem(raw) => {
            AutomorphicProblem::from_raw(raw)?;
            json!({})
        }
        Body::Subspace(p) => json!({ "dim": Subspace::span(&field(p.q)?, p.ambient, &p.vectors)?.dim() }),
        Body::SubspaceCode(c) => json!({ "dim": decode_subspace(&field(c.q)?, c)?.dim() }),
        Body::FlaggedPair(p) => {
            let f = field(p.q)?;
            p.left.validate(&f)?;
            p.right.validate(&f)?;
            json!({})
        }
        Body::FlaggedLine(p) => {
            p.flag.validate(&field(p.q)?)?;
            json!({})
        }
        _ => json!({}),
    };
    let summary = format!("valid {}", m.kind());
    Ok(report(json!({ "kind": m.kind(), "valid": true, "checked": checked }), summary))
}

fn stepup_report(p: &AmalgamationProblem, n: usize) -> Result<Output, Failure> {
    let partial = if p.faces().keys().all(|u| (u.count_ones() as usize) < n) { p.clone() } else { stepup_problem(p, n)? };
    let sol = stepup_solve(&partial, n, limits())?;
    let all = subset_list((1u32 << p.n) - 1);
    let maps: Vec<RawEmbedding> =
        sol.maps.iter().map(|(&u, m)| RawEmbedding { from: subset_list(u), to: all.clone(), map: m.clone() }).collect();
    let closed: Vec<Value> = sol.closed.iter().map(|(&u, e)| json!({ "subset": subset_list(u), "elements": e })).collect();
    let summary = format!("step-up from faces of size < {n} to dimension {}: top of size {}", p.n, sol.top.size());
    Ok(report(json!({ "top": sol.top.to_raw(), "maps": maps, "closed": closed }), summary))
}

fn execute(cmd: Command, cli: &Cli, input: Option<&Manifest>) -> Result<Output, Failure> {
    let need = || input.ok_or_else(|| usage("", format!("{} needs --in", cmd.name())));
    match cmd {
        Command::Validate => validate(need()?),
        Command::Classify => {
            let m = need()?;
            let raw = match &m.body {
                Body::Groupoid(raw) => raw,
                Body::Functor(p) => &p.groupoid,
                _ => return Err(wrong_kind(cmd, m, &["groupoid", "functor"])),
            };
            let r = FiniteGroupoid::validate(raw)?.classify();
            let summary = format!("{} iso-classes, connected: {}", r.classes.len(), r.is_connected);
            Ok(report(r, summary))
        }
        Command::Quotient => {
            let m = need()?;
            let Body::NormalSystem(p) = &m.body else { return Err(wrong_kind(cmd, m, &["normal-system"])) };
            let g = FiniteGroupoid::validate(&p.groupoid)?;
            let (q, _) = g.quotient(&p.system)?;
            let summary = format!("quotient has {} morphisms (from {})", q.morphism_count(), g.morphism_count());
            Ok(Output { body: Body::Groupoid(q.to_raw()), summary })
        }
        Command::Collapse => {
            let m = need()?;
            let Body::Functor(p) = &m.body else { return Err(wrong_kind(cmd, m, &["functor"])) };
            let (g, f) = groupoid_and_functor(p)?;
            let c = collapse_trivial(&g, &f)?;
            let classes: Vec<Vec<(u64, usize)>> =
                c.classes.iter().map(|cl| cl.iter().map(|&(a, x)| (g.object_id(a), x)).collect()).collect();
            let summary = format!("collapsed onto a set of size {}", c.size());
            Ok(report(json!({ "size": c.size(), "classes": classes }), summary))
        }
        Command::Section => {
            let m = need()?;
            let (g, symmetry) = match &m.body {
                Body::Groupoid(raw) => (FiniteGroupoid::validate(raw)?, Vec::new()),
                Body::Functor(p) => (FiniteGroupoid::validate(&p.groupoid)?, Vec::new()),
                Body::Cocycle(raw) => {
                    let built = CocycleData::from_raw(raw)?.groupoid()?;
                    (built.groupoid, built.symmetry)
                }
                _ => return Err(wrong_kind(cmd, m, &["groupoid", "functor", "cocycle"])),
            };
            let s = g.find_coherent_section(&symmetry)?;
            let summary = if s.is_some() { "coherent section found" } else { "no coherent section" };
            Ok(report(json!({ "found": s.is_some(), "section": s.map(|s| section_ids(&g, &s)) }), summary))
        }
        Command::Extend => {
            let m = need()?;
            let Body::Extension(raw) = &m.body else { return Err(wrong_kind(cmd, m, &["extension"])) };
            let ext = extend_groupoid(&ExtensionInput::from_raw(raw)?)?;
            let summary = format!("extended groupoid with {} morphisms", ext.groupoid.morphism_count());
            Ok(Output { body: Body::Groupoid(ext.groupoid.to_raw()), summary })
        }
        Command::Cocycle => {
            let m = need()?;
            let Body::Cocycle(raw) = &m.body else { return Err(wrong_kind(cmd, m, &["cocycle"])) };
            let built = CocycleData::from_raw(raw)?.groupoid()?;
            let summary = format!(
                "cocycle groupoid with {} objects and {} morphisms",
                built.groupoid.object_count(),
                built.groupoid.morphism_count()
            );
            let payload = FunctorPayload { groupoid: built.groupoid.to_raw(), functor: built.functor.to_raw(&built.groupoid) };
            Ok(Output { body: Body::Functor(payload), summary })
        }
        Command::Coboundary => {
            let m = need()?;
            let Body::Cocycle(raw) = &m.body else { return Err(wrong_kind(cmd, m, &["cocycle"])) };
            let data = CocycleData::from_raw(raw)?;
            let b = is_coboundary(&data);
            let summary = if b.is_some() { "cocycle is a coboundary" } else { "cocycle is not a coboundary" };
            Ok(report(json!({ "coboundary": b.is_some(), "witness": b, "note": data.note() }), summary))
        }
        Command::Cover => {
            let m = need()?;
            let (structure, manifest) = match &m.body {
                Body::Functor(p) => {
                    let (g, f) = groupoid_and_functor(p)?;
                    let c = build_cover(&g, &f)?;
                    (c.structure, c.manifest)
                }
                Body::Cocycle(raw) => cocycle_cover(&CocycleData::from_raw(raw)?)?,
                _ => return Err(wrong_kind(cmd, m, &["functor", "cocycle"])),
            };
            let summary = format!("cover structure of size {}", structure.size());
            let payload = StructurePayload { structure: structure.to_raw(), base_sorts: manifest.base_sorts.clone(), cover: Some(manifest) };
            Ok(Output { body: Body::Structure(payload), summary })
        }
        Command::Attach => {
            let m = need()?;
            let Body::Attachment(p) = &m.body else { return Err(wrong_kind(cmd, m, &["attachment"])) };
            let g = FiniteGroupoid::validate(&p.groupoid)?;
            let f = ConcreteFunctor::from_raw(&g, &p.functor)?;
            let c = build_cover(&g, &f)?;
            let base = FiniteStructure::from_raw(&p.base)?;
            let (structure, manifest) = attach_to_base(&base, &c, &p.anchor)?;
            let summary = format!("attached cover of size {}", structure.size());
            let payload = StructurePayload { structure: structure.to_raw(), base_sorts: manifest.base_sorts.clone(), cover: Some(manifest) };
            Ok(Output { body: Body::Structure(payload), summary })
        }
        Command::Exact | Command::Split => {
            let m = need()?;
            let Body::Structure(p) = &m.body else { return Err(wrong_kind(cmd, m, &["structure"])) };
            let n = FiniteStructure::from_raw(&p.structure)?;
            let sorts = base_sorts(p)?;
            let r = if cmd == Command::Exact {
                check_exact_sequence(&n, &sorts, limits())?
            } else {
                is_split(&n, &sorts, cli.naming_bound, limits())?
            };
            let summary = format!(
                "|Aut(N)| = {}, kernel {}, image {}{}",
                r.total.order,
                r.kernel.order,
                r.image.order,
                r.split.map_or(String::new(), |s| format!(", split: {s}"))
            );
            let result = json!({
                "split": r.split,
                "almost_split": r.almost_split,
                "total": r.total.order,
                "kernel": r.kernel.order,
                "image": r.image.order,
                "exact": r.total.order == r.kernel.order * r.image.order,
                "details": r,
            });
            Ok(report(result, summary))
        }
        Command::AmalgamValidate => {
            let p = problem(need()?, cmd)?;
            p.validate()?;
            let summary = format!("valid {}-dimensional {} problem", p.n, p.theory.plugin().name());
            Ok(report(json!({ "valid": true, "dimension": p.n, "theory": p.theory, "max_face_size": p.max_face_size() }), summary))
        }
        Command::AmalgamSolve => {
            let p = problem(need()?, cmd)?;
            let set = amalgam::solve(&p, limits())?;
            let solutions: Vec<_> = set.solutions.iter().map(|s| s.to_raw(p.n)).collect();
            let summary = format!("{} solutions up to isomorphism over the faces", set.count());
            Ok(report(json!({ "count": set.count(), "candidates": set.candidates, "solutions": solutions }), summary))
        }
        Command::AmalgamCheck => {
            let theory = theory_arg(cli)?;
            let n = required(cli.n, "n")?;
            let bound = required(cli.bound, "bound")?;
            let r = check_n_property(&theory, n, bound, limits())?;
            let summary = format!("{n}-existence: {}, {n}-uniqueness: {} over {} instances", r.existence, r.uniqueness, r.instances);
            Ok(report(r, summary))
        }
        Command::ThreeUl => {
            let p = problem(need()?, cmd)?;
            if p.n != 3 {
                return Err(AmalgamError::DimensionMismatch { expected: 3, found: p.n }.into());
            }
            let set = amalgam::solve(&p, limits())?;
            let mut checks = Vec::new();
            for (i, sol) in set.solutions.iter().enumerate() {
                let three_ul = check_3ul(&p, sol, limits())?;
                let su = p.maximal_faces().into_iter().map(|u| check_su(&p, sol, u, limits())).collect::<Result<Vec<_>, _>>()?;
                checks.push(json!({ "solution": i, "three_ul": three_ul, "su": su }));
            }
            let summary = format!("{} solutions checked", set.count());
            Ok(report(json!({ "solutions": set.count(), "checks": checks }), summary))
        }
        Command::AutoSolve => {
            let m = need()?;
            let Body::AutomorphicProblem(raw) = &m.body else { return Err(wrong_kind(cmd, m, &["automorphic-problem"])) };
            let ap = AutomorphicProblem::from_raw(raw)?;
            let s = solve_with_automorphism(&ap, limits())?;
            let summary = format!("equivariant extension found on solution {}", s.index);
            Ok(report(s.to_raw(ap.problem.n), summary))
        }
        Command::Stepup => {
            let p = problem(need()?, cmd)?;
            stepup_report(&p, required(cli.n, "n")?)
        }
        Command::Generate => {
            let spec = match input {
                Some(m) => match &m.body {
                    Body::InstanceSpec(s) => s.clone(),
                    _ => return Err(wrong_kind(cmd, m, &["instance-spec"])),
                },
                None => {
                    let n = required(cli.n, "n")?;
                    match theory_arg(cli)? {
                        TheoryKind::PureSet => InstanceSpec::PureSet { n, base: 0, extras: None },
                        TheoryKind::VectorSpace { q, .. } => InstanceSpec::VectorSpace { q, dims: vec![1; n], base_dim: 0 },
                        TheoryKind::Parity => InstanceSpec::ParityCover { n, parity: None },
                    }
                }
            };
            let p = generate_instance(&spec)?;
            let summary = format!("generated a {}-dimensional {} problem", p.n, p.theory.plugin().name());
            Ok(Output { body: Body::Problem(p.to_raw()), summary })
        }
        Command::CodeSubspace => {
            let m = need()?;
            let Body::Subspace(s) = &m.body else { return Err(wrong_kind(cmd, m, &["subspace"])) };
            let f = field(s.q)?;
            let code = code_subspace(&f, &Subspace::span(&f, s.ambient, &s.vectors)?)?;
            let summary = format!("coded a {}-subspace of GF({})^{}", code.dim, s.q, s.ambient);
            Ok(Output { body: Body::SubspaceCode(code), summary })
        }
        Command::DecodeSubspace => {
            let m = need()?;
            let Body::SubspaceCode(c) = &m.body else { return Err(wrong_kind(cmd, m, &["subspace-code"])) };
            let u = decode_subspace(&field(c.q)?, c)?;
            let summary = format!("decoded a {}-subspace", u.dim());
            Ok(Output { body: Body::Subspace(SubspacePayload { q: c.q, ambient: u.ambient, vectors: u.basis }), summary })
        }
        Command::FlagTensor => {
            let m = need()?;
            let Body::FlaggedPair(p) = &m.body else { return Err(wrong_kind(cmd, m, &["flagged-pair"])) };
            let f = field(p.q)?;
            let t = flag_tensor(&f, &p.left, &p.right)?;
            let dims = t.chain_dims(&f);
            let summary = format!("flagged tensor product of dimension {}", t.dim());
            let result = json!({
                "tensor": t,
                "chain_dims": dims,
                "dual_left": flag_dual(&f, &p.left)?,
                "dual_right": flag_dual(&f, &p.right)?,
            });
            Ok(report(result, summary))
        }
        Command::CodeLine => {
            let m = need()?;
            let Body::FlaggedLine(p) = &m.body else { return Err(wrong_kind(cmd, m, &["flagged-line"])) };
            let f = field(p.q)?;
            let line = Subspace::span(&f, p.flag.dim(), &p.line)?;
            let code = code_flagged_line(&f, &line, &p.flag)?;
            let summary = format!("line lies in step {} and not in step {}", code.k + 1, code.k);
            Ok(report(code, summary))
        }
        Command::CodePoints => {
            let m = need()?;
            let Body::PointSet(p) = &m.body else { return Err(wrong_kind(cmd, m, &["point-set"])) };
            let f = field(p.q)?;
            let cap = cli.degree_cap.or(p.degree_cap).unwrap_or(p.n * (p.q - 1));
            let code = code_point_set(&f, p.n, &p.points, cap)?;
            let summary = format!("vanishing space of dimension {} at degree cap {cap} (complete: {})", code.vanishing.dim(), code.complete);
            Ok(report(code, summary))
        }
        Command::RootTorsor => {
            let f = field(required(cli.q, "q")?)?;
            let r = root_torsor(&f, required(cli.m, "m")?)?;
            let summary = format!("{} classes, |mu_{}| = {}", r.classes.len(), r.m, r.mu.len());
            Ok(report(r, summary))
        }
        Command::Batch => unreachable!("batch is dispatched separately"),
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn emit(manifest: &Manifest, out: Option<&PathBuf>, stdout: &mut dyn Write) -> Result<(), Failure> {
    let text = manifest.to_string_pretty() + "\n";
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display()))),
        None => stdout.write_all(text.as_bytes()).map_err(|e| Failure::Io(e.to_string())),
    }
}

fn read_input(cli: &Cli) -> Result<Option<(Manifest, String)>, Failure> {
    let Some(path) = &cli.input else { return Ok(None) };
    let bytes = std::fs::read(path).map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| usage("", "input is not UTF-8"))?;
    Ok(Some((Manifest::parse(&text)?, sha256_hex(&bytes))))
}

fn batch(m: &Manifest, stderr: &mut dyn Write) -> Result<(Output, i32), Failure> {
    let Body::Batch(p) = &m.body else { return Err(usage("/kind", format!("batch expects batch, got {}", m.kind()))) };
    let mut runs = Vec::new();
    let mut worst = 0;
    for args in &p.commands {
        let mut captured = Vec::new();
        let status = run_command(args, &mut captured, stderr);
        worst = worst.max(status);
        let output: Value = serde_json::from_slice(&captured).unwrap_or(Value::Null);
        runs.push(json!({ "args": args, "status": status, "output": output }));
    }
    let summary = format!("{} commands, worst exit status {worst}", runs.len());
    Ok((report(json!({ "runs": runs }), summary), worst))
}

fn failure_report(name: &str, message: &str, pointer: Option<&str>) -> Body {
    let mut error = json!({ "name": name, "message": message });
    if let Some(p) = pointer {
        error["pointer"] = json!(p);
    }
    Body::Report(json!({ "status": "error", "error": error }))
}

/// Runs one command. `args` excludes the program name. The JSON output goes
/// to `--out` or `stdout`; a one-line summary goes to `stderr`.
///
/// Returns `0` on success, `1` on a domain error and `2` on a schema or
/// usage error.
pub fn run_command(args: &[String], stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(std::iter::once("gcov".to_string()).chain(args.iter().cloned())) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            let _ = write!(stderr, "{e}");
            return 2;
        }
    };
    let command = cli.command.name();
    let mut sha = None;
    let result = read_input(&cli).and_then(|input| {
        sha = input.as_ref().map(|(_, h)| h.clone());
        let manifest = input.as_ref().map(|(m, _)| m);
        if cli.command == Command::Batch {
            let m = manifest.ok_or_else(|| usage("", "batch needs --in"))?;
            batch(m, stderr)
        } else {
            execute(cli.command, &cli, manifest).map(|o| (o, 0))
        }
    });
    let meta = |summary: String| Meta {
        tool: "gcov".into(),
        version: VERSION.into(),
        command: command.clone(),
        input_sha256: sha.clone(),
        summary,
    };
    let (manifest, status) = match result {
        Ok((out, status)) => {
            let body = match out.body {
                Body::Report(r) => Body::Report(json!({ "status": if status == 0 { "ok" } else { "failed" }, "result": r })),
                other => other,
            };
            (Manifest { body, meta: Some(meta(out.summary)) }, status)
        }
        Err(Failure::Schema(e)) => {
            let body = failure_report("SchemaError", &e.message, Some(&e.pointer));
            (Manifest { body, meta: Some(meta(format!("SchemaError {e}"))) }, 2)
        }
        Err(Failure::Domain { name, message }) => {
            let body = failure_report(&name, &message, None);
            (Manifest { body, meta: Some(meta(format!("{name}: {message}"))) }, 1)
        }
        Err(Failure::Io(message)) => {
            let body = failure_report("IoError", &message, None);
            (Manifest { body, meta: Some(meta(message)) }, 2)
        }
    };
    let summary = manifest.meta.as_ref().map(|m| m.summary.clone()).unwrap_or_default();
    let _ = writeln!(stderr, "{command}: {summary}");
    if let Err(Failure::Io(e)) = emit(&manifest, cli.out.as_ref(), stdout) {
        let _ = writeln!(stderr, "{e}");
        return 2;
    }
    status
}
