//! Verification pipelines over theory files and the reports they produce.

use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::algebroid::{
    closure_check, conserved_current_check, current_bracket, current_is_trivial, is_eom_symmetry,
    is_variational_symmetry, jacobi_check_a, reducibility_check, test_parameter_basis, GaugeParameter,
    VariationalVerdict, WeakVerdict,
};
use crate::bv::{ghost_number, ExtendedTheory, MasterCheck};
use crate::diffop::{helmholtz_check, is_noether, module_action, rho};
use crate::dsl::{parse_side_file, parse_theory, BlockKind, DslError, SideBlock};
use crate::jet::EvolutionaryField;
use crate::kernel::{render::render_jet, Expr, Kind, Schema};
use crate::random::Sampler;
use crate::theory::Theory;
use crate::weak::{evaluate_on_solution, AnsatzConfig, WeakCertificate};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("unknown pipeline `{0}`")]
    UnknownPipeline(String),
    #[error("pipeline `{0}` needs a side file")]
    MissingSideFile(&'static str),
    #[error("pipeline `{0}` takes no side file")]
    UnexpectedSideFile(&'static str),
    #[error("side file declares no {0} blocks")]
    EmptySideFile(&'static str),
    #[error("theory file: {0}")]
    Theory(DslError),
    #[error("side file: {0}")]
    Side(DslError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pipeline {
    Validate,
    Noether,
    Symmetry,
    Closure,
    Reducibility,
    Currents,
    BvNilpotency,
    Master,
    Full,
}

impl Pipeline {
    pub const ALL: [Pipeline; 9] = [
        Pipeline::Validate,
        Pipeline::Noether,
        Pipeline::Symmetry,
        Pipeline::Closure,
        Pipeline::Reducibility,
        Pipeline::Currents,
        Pipeline::BvNilpotency,
        Pipeline::Master,
        Pipeline::Full,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Pipeline::Validate => "validate",
            Pipeline::Noether => "noether",
            Pipeline::Symmetry => "symmetry",
            Pipeline::Closure => "closure",
            Pipeline::Reducibility => "reducibility",
            Pipeline::Currents => "currents",
            Pipeline::BvNilpotency => "bv-nilpotency",
            Pipeline::Master => "master",
            Pipeline::Full => "full",
        }
    }

    pub fn needs_side_file(self) -> bool {
        matches!(self, Pipeline::Symmetry | Pipeline::Reducibility | Pipeline::Currents)
    }
}

impl FromStr for Pipeline {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Pipeline::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| PipelineError::UnknownPipeline(s.into()))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunConfig {
    pub ansatz: AnsatzConfig,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    NotCertified,
}

impl Status {
    fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::NotCertified => "NOT-CERTIFIED",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    /// The identity the check instantiates.
    pub identity: String,
    pub status: Status,
    pub detail: String,
    pub wall_time_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConfigRecord {
    pub ansatz_order: usize,
    pub max_degree: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub passed: usize,
    pub failed: usize,
    pub not_certified: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub pipeline: String,
    pub engine_version: String,
    pub input_digest: String,
    pub config: ConfigRecord,
    pub status: Status,
    pub summary: Summary,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "pipeline {} (engine {}, input {})",
            self.pipeline, self.engine_version, self.input_digest
        );
        for c in &self.checks {
            let _ = writeln!(out, "{:<13} {}  [{}]", c.status.label(), c.name, c.identity);
            for line in c.detail.lines() {
                let _ = writeln!(out, "              {line}");
            }
        }
        let s = &self.summary;
        let _ = writeln!(
            out,
            "{}: {} passed, {} failed, {} not certified",
            self.status.label(),
            s.passed,
            s.failed,
            s.not_certified
        );
        out
    }
}

/// SHA-256 of the theory text followed by a NUL byte and the side file.
pub fn input_digest(theory_text: &str, side_text: Option<&str>) -> String {
    let mut h = Sha256::new();
    h.update(theory_text.as_bytes());
    if let Some(s) = side_text {
        h.update([0u8]);
        h.update(s.as_bytes());
    }
    hex::encode(h.finalize())
}

/// Parses the inputs and runs a pipeline. Parse errors are returned as
/// errors; a theory that parses but fails validation yields a report with
/// a failing `validate` check.
pub fn run(
    pipeline: Pipeline,
    theory_text: &str,
    side_text: Option<&str>,
    cfg: &RunConfig,
) -> Result<Report, PipelineError> {
    match (pipeline.needs_side_file(), side_text.is_some()) {
        (true, false) => return Err(PipelineError::MissingSideFile(pipeline.name())),
        (false, true) => return Err(PipelineError::UnexpectedSideFile(pipeline.name())),
        _ => {}
    }
    let doc = parse_theory(theory_text).map_err(PipelineError::Theory)?;
    let side = match side_text {
        Some(t) => parse_side_file(t, &doc.schema).map_err(PipelineError::Side)?,
        None => Vec::new(),
    };
    let mut checks = Vec::new();
    let start = Instant::now();
    match doc.to_theory() {
        Err(e) => checks.push(Check {
            name: "validate".into(),
            identity: "parse, Helmholtz condition, Noether identities, solutions".into(),
            status: Status::Fail,
            detail: e.to_string(),
            wall_time_ms: start.elapsed().as_millis() as u64,
        }),
        Ok(theory) => {
            let ctx = Ctx { theory: &theory, cfg };
            match pipeline {
                Pipeline::Validate => ctx.validate(&mut checks),
                Pipeline::Noether => ctx.noether(&mut checks),
                Pipeline::Symmetry => ctx.symmetry(&blocks(&side, BlockKind::Symmetry, "symmetry")?, &mut checks),
                Pipeline::Closure => ctx.closure(&mut checks),
                Pipeline::Reducibility => {
                    ctx.reducibility(&blocks(&side, BlockKind::Parameter, "parameter")?, &mut checks)
                }
                Pipeline::Currents => ctx.currents(&side, &mut checks)?,
                Pipeline::BvNilpotency => ctx.bv_nilpotency(&mut checks),
                Pipeline::Master => ctx.master(&mut checks),
                Pipeline::Full => {
                    ctx.validate(&mut checks);
                    ctx.noether(&mut checks);
                    ctx.closure(&mut checks);
                    ctx.bv_nilpotency(&mut checks);
                    ctx.master(&mut checks);
                }
            }
        }
    }
    let count = |s: Status| checks.iter().filter(|c| c.status == s).count();
    let summary = Summary {
        passed: count(Status::Pass),
        failed: count(Status::Fail),
        not_certified: count(Status::NotCertified),
    };
    let status = if summary.failed > 0 {
        Status::Fail
    } else if summary.not_certified > 0 {
        Status::NotCertified
    } else {
        Status::Pass
    };
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        pipeline: pipeline.name().into(),
        engine_version: env!("CARGO_PKG_VERSION").into(),
        input_digest: input_digest(theory_text, side_text),
        config: ConfigRecord {
            ansatz_order: cfg.ansatz.max_jet_order,
            max_degree: cfg.ansatz.max_coeff_degree,
            seed: cfg.seed,
        },
        status,
        summary,
        checks,
    })
}

fn blocks<'a>(side: &'a [SideBlock], kind: BlockKind, what: &'static str) -> Result<Vec<&'a SideBlock>, PipelineError> {
    let v: Vec<&SideBlock> = side.iter().filter(|b| b.kind == kind).collect();
    if v.is_empty() {
        return Err(PipelineError::EmptySideFile(what));
    }
    Ok(v)
}

fn timed(name: impl Into<String>, identity: &str, f: impl FnOnce() -> (Status, String)) -> Check {
    let start = Instant::now();
    let (status, detail) = f();
    Check {
        name: name.into(),
        identity: identity.into(),
        status,
        detail,
        wall_time_ms: start.elapsed().as_millis() as u64,
    }
}

fn pass_if(ok: bool, detail: String) -> (Status, String) {
    (if ok { Status::Pass } else { Status::Fail }, detail)
}

pub fn render_certificate(cert: &WeakCertificate, schema: &Schema) -> String {
    if cert.is_trivial() {
        return "0".into();
    }
    cert.k
        .iter()
        .map(|((a, mi), k)| {
            format!(
                "({})*E[{}]{}",
                schema.render(k),
                schema.fields[*a],
                render_jet(mi, schema)
            )
        })
        .collect::<Vec<_>>()
        .join(" + ")
}

fn render_list(items: &[Expr], schema: &Schema) -> String {
    format!(
        "({})",
        items.iter().map(|e| schema.render(e)).collect::<Vec<_>>().join(", ")
    )
}

struct Ctx<'a> {
    theory: &'a Theory,
    cfg: &'a RunConfig,
}

impl Ctx<'_> {
    fn schema(&self) -> &Schema {
        &self.theory.schema
    }

    fn render(&self, e: &Expr) -> String {
        self.schema().render(e)
    }

    /// Status and detail for a weak-vanishing verdict.
    fn verdict(&self, v: &WeakVerdict) -> (Status, String) {
        match v {
            WeakVerdict::IdenticallyZero => (Status::Pass, "identically zero".into()),
            WeakVerdict::Certified(certs) => {
                let parts: Vec<String> = certs
                    .iter()
                    .enumerate()
                    .map(|(i, c)| format!("component {i} = {}", render_certificate(c, self.schema())))
                    .collect();
                (Status::Pass, format!("certified: {}", parts.join("; ")))
            }
            WeakVerdict::NotCertified {
                component,
                residual,
                refutation,
            } => match refutation {
                Some(r) => (
                    Status::Fail,
                    format!(
                        "component {component} = {} is nonzero on solution `{}`: {}",
                        self.render(residual),
                        r.solution,
                        self.render(&r.value)
                    ),
                ),
                None => (
                    Status::NotCertified,
                    format!(
                        "no certificate within the ansatz bounds for component {component} = {}",
                        self.render(residual)
                    ),
                ),
            },
        }
    }

    fn validate(&self, out: &mut Vec<Check>) {
        let t = self.theory;
        let e = t.equations_of_motion();
        out.push(timed("helmholtz", "D_E = (D_E)^dagger", || {
            let eqs: Vec<String> = e
                .iter()
                .enumerate()
                .map(|(i, ei)| format!("E[{}] = {}", t.schema.fields[i], self.render(ei)))
                .collect();
            pass_if(helmholtz_check(e), eqs.join("\n"))
        }));
        self.noether_identities(out);
        if let Some(c) = &t.structure {
            out.push(timed("structure-skew", "C(f1, f2) = -C(f2, f1)", || {
                pass_if(
                    c.is_skew(),
                    if c.is_zero() {
                        "abelian".into()
                    } else {
                        format!("order {}", c.order())
                    },
                )
            }));
        }
        for sol in &t.solutions {
            out.push(timed(
                format!("solution:{}", sol.name),
                "E[phi] = 0 on the named solution",
                || {
                    let residuals: Vec<Expr> = e.iter().map(|ei| evaluate_on_solution(ei, &sol.values)).collect();
                    pass_if(
                        residuals.iter().all(Expr::is_zero),
                        render_list(&sol.values, self.schema()),
                    )
                },
            ));
        }
    }

    fn noether_identities(&self, out: &mut Vec<Check>) {
        let t = self.theory;
        for alpha in 0..t.n_params() {
            let row = t.noether_row(alpha);
            out.push(timed(
                format!("noether-identity:{}", t.schema.params[alpha]),
                "R^dagger[E] = 0",
                || {
                    pass_if(
                        is_noether(&row, t.equations_of_motion()),
                        format!("N = {}", row.render(&t.schema)),
                    )
                },
            ));
        }
    }

    fn noether(&self, out: &mut Vec<Check>) {
        let t = self.theory;
        for alpha in 0..t.n_params() {
            let name = &t.schema.params[alpha];
            let row = t.noether_row(alpha);
            out.push(timed(format!("noether-identity:{name}"), "R^dagger[E] = 0", || {
                pass_if(
                    is_noether(&row, t.equations_of_motion()),
                    format!("N = {}", row.render(&t.schema)),
                )
            }));
            out.push(timed(
                format!("rho-symmetry:{name}"),
                "rho(N) = N^dagger(1) is a variational symmetry",
                || match rho(&row) {
                    Err(e) => (Status::Fail, e.to_string()),
                    Ok(q) => self.variational(&q),
                },
            ));
        }
    }

    fn variational(&self, q: &EvolutionaryField) -> (Status, String) {
        let comps = render_list(&q.field_components(self.theory.n_fields()), self.schema());
        match is_variational_symmetry(self.theory, q) {
            Ok(VariationalVerdict::Witness(k)) => (
                Status::Pass,
                format!(
                    "Q = {comps}; delta_Q L = div k with k = {}",
                    render_list(&k, self.schema())
                ),
            ),
            Ok(VariationalVerdict::NotDivergence) => (
                Status::NotCertified,
                format!("Q = {comps}; delta_Q L is a null Lagrangian but no explicit k was found"),
            ),
            Ok(VariationalVerdict::No) => (
                Status::Fail,
                format!("Q = {comps}; delta_Q L is not a total divergence"),
            ),
            Err(e) => (Status::Fail, e.to_string()),
        }
    }

    fn symmetry(&self, blocks: &[&SideBlock], out: &mut Vec<Check>) {
        let t = self.theory;
        for b in blocks {
            let q = EvolutionaryField::on_fields(b.values.clone());
            out.push(timed(
                format!("variational:{}", b.name),
                "delta_Q L = d_mu k^mu",
                || self.variational(&q),
            ));
            out.push(timed(format!("eom-symmetry:{}", b.name), "delta_Q E_a ~ 0", || {
                self.verdict(&is_eom_symmetry(t, &q, &self.cfg.ansatz))
            }));
            if t.n_params() > 0 {
                out.push(timed(
                    format!("module-action:{}", b.name),
                    "Q.N = delta_Q N - N o (D_Q)^dagger is Noether",
                    || {
                        let mut bad = Vec::new();
                        for alpha in 0..t.n_params() {
                            match module_action(&q, &t.noether_row(alpha), t.n_fields()) {
                                Ok(qn) if is_noether(&qn, t.equations_of_motion()) => {}
                                Ok(qn) => bad.push(format!("{}: {}", t.schema.params[alpha], qn.render(&t.schema))),
                                Err(e) => bad.push(e.to_string()),
                            }
                        }
                        if bad.is_empty() {
                            (Status::Pass, format!("{} Noether operators preserved", t.n_params()))
                        } else {
                            (Status::Fail, bad.join("\n"))
                        }
                    },
                ));
            }
        }
    }

    fn render_parameter(&self, f: &GaugeParameter) -> String {
        render_list(f, self.schema())
    }

    fn closure(&self, out: &mut Vec<Check>) {
        let t = self.theory;
        let cfg = &self.cfg.ansatz;
        out.push(timed("closure", "[R_f1, R_f2] ~ R_[f1,f2]", || {
            match closure_check(t, cfg) {
                Err(e) => (Status::Fail, e.to_string()),
                Ok(rep) => {
                    let zero = rep.pairs.iter().filter(|(_, v)| v.is_identically_zero()).count();
                    match rep.first_failure() {
                        None => (
                            Status::Pass,
                            format!(
                                "{} pairs over {} test parameters, {zero} identically zero",
                                rep.pairs.len(),
                                rep.basis.len()
                            ),
                        ),
                        Some(((i, j), v)) => {
                            let (status, detail) = self.verdict(v);
                            (
                                status,
                                format!(
                                    "f1 = {}, f2 = {}: {detail}",
                                    self.render_parameter(&rep.basis[*i]),
                                    self.render_parameter(&rep.basis[*j])
                                ),
                            )
                        }
                    }
                }
            }
        }));
        out.push(timed("jacobi", "cyclic [f1,[f2,f3]] maps to R ~ 0", || {
            if let Err(e) = t.require_structure() {
                return (Status::Fail, e.to_string());
            }
            let triples = self.jacobi_triples();
            let mut zero = 0;
            for (a, b, c) in &triples {
                match jacobi_check_a(t, a, b, c, cfg) {
                    Err(e) => return (Status::Fail, e.to_string()),
                    Ok(v) if v.is_identically_zero() => zero += 1,
                    Ok(v) if v.holds() => {}
                    Ok(v) => {
                        let (status, detail) = self.verdict(&v);
                        let f = |x: &GaugeParameter| self.render_parameter(x);
                        return (status, format!("f = {}, {}, {}: {detail}", f(a), f(b), f(c)));
                    }
                }
            }
            (
                Status::Pass,
                format!("{} triples, {zero} identically zero", triples.len()),
            )
        }));
    }

    /// All triples of polynomial test parameters, plus a seeded sample of
    /// triples from the full test basis.
    fn jacobi_triples(&self) -> Vec<(GaugeParameter, GaugeParameter, GaugeParameter)> {
        let basis = test_parameter_basis(self.theory, &self.cfg.ansatz);
        let poly: Vec<&GaugeParameter> = basis
            .iter()
            .filter(|f| f.iter().all(|c| !c.contains_kind(|g| g.kind != Kind::Coordinate)))
            .collect();
        let mut out = Vec::new();
        for i in 0..poly.len() {
            for j in i + 1..poly.len() {
                for k in j + 1..poly.len() {
                    out.push((poly[i].clone(), poly[j].clone(), poly[k].clone()));
                }
            }
        }
        if !basis.is_empty() {
            let mut s = Sampler::new(self.cfg.seed, self.theory.dim(), self.theory.n_fields());
            for _ in 0..16 {
                let mut pick = || basis[s.rng().gen_range(0..basis.len())].clone();
                out.push((pick(), pick(), pick()));
            }
        }
        out
    }

    fn reducibility(&self, blocks: &[&SideBlock], out: &mut Vec<Check>) {
        for b in blocks {
            out.push(timed(
                format!("reducibility:{}", b.name),
                "R^i_alpha(f^alpha) ~ 0",
                || {
                    let (status, detail) = self.verdict(&reducibility_check(self.theory, &b.values, &self.cfg.ansatz));
                    (status, format!("f = {}: {detail}", self.render_parameter(&b.values)))
                },
            ));
        }
    }

    fn currents(&self, side: &[SideBlock], out: &mut Vec<Check>) -> Result<(), PipelineError> {
        let t = self.theory;
        let cfg = &self.cfg.ansatz;
        let currents = blocks(side, BlockKind::Current, "current")?;
        let symmetry_of = |name: &str| {
            side.iter()
                .find(|b| b.kind == BlockKind::Symmetry && b.name == name)
                .map(|b| EvolutionaryField::on_fields(b.values.clone()))
        };
        for j in &currents {
            out.push(timed(format!("conserved:{}", j.name), "d_mu j^mu ~ 0", || {
                let (status, detail) = self.verdict(&conserved_current_check(t, &j.values, cfg));
                (
                    status,
                    format!("j = {}: {detail}", render_list(&j.values, self.schema())),
                )
            }));
            if let Some(q) = symmetry_of(&j.name) {
                out.push(timed(
                    format!("noether-pair:{}", j.name),
                    "d_mu j^mu + Q^i E_i = 0",
                    || {
                        let mut r = Expr::zero();
                        for (mu, jm) in j.values.iter().enumerate() {
                            r += crate::jet::d(jm, mu);
                        }
                        for (qi, ei) in q.field_components(t.n_fields()).iter().zip(t.equations_of_motion()) {
                            r += qi * ei;
                        }
                        pass_if(
                            r.is_zero(),
                            if r.is_zero() {
                                "exact".into()
                            } else {
                                format!("residual {}", self.render(&r))
                            },
                        )
                    },
                ));
            }
        }
        for a in &currents {
            let Some(qa) = symmetry_of(&a.name) else { continue };
            for b in &currents {
                out.push(timed(
                    format!("bracket:{},{}", a.name, b.name),
                    "{j_a, j_b} = -delta_Qa j_b is conserved",
                    || {
                        let br = current_bracket(&qa, &b.values);
                        let (status, detail) = self.verdict(&conserved_current_check(t, &br, cfg));
                        if status != Status::Pass {
                            return (status, detail);
                        }
                        let class = match current_is_trivial(t, &br, cfg) {
                            WeakVerdict::IdenticallyZero => "class trivial (identically zero)".to_string(),
                            v @ WeakVerdict::Certified(_) => format!("class trivial ({})", self.verdict(&v).1),
                            WeakVerdict::NotCertified { .. } => "class not shown trivial".to_string(),
                        };
                        (
                            status,
                            format!("bracket = {}; {class}", render_list(&br, self.schema())),
                        )
                    },
                ));
            }
        }
        Ok(())
    }

    fn bv_nilpotency(&self, out: &mut Vec<Check>) {
        let ext = ExtendedTheory::new(self.theory.clone());
        let residuals = match ext.nilpotency_residuals() {
            Ok(r) => r,
            Err(e) => {
                out.push(timed(
                    "nilpotency",
                    "delta^2 = gamma^2 = delta gamma + gamma delta = 0",
                    || (Status::Fail, e.to_string()),
                ));
                return;
            }
        };
        for r in &residuals {
            let g = self.render(&Expr::var(r.generator));
            for (label, identity, value) in [
                ("delta-squared", "delta^2 = 0", &r.delta_squared),
                ("gamma-squared", "gamma^2 = 0", &r.gamma_squared),
                ("delta-gamma", "delta gamma + gamma delta = 0", &r.anticommutator),
            ] {
                out.push(timed(format!("{label}:{g}"), identity, || {
                    pass_if(
                        value.is_zero(),
                        if value.is_zero() {
                            "0".into()
                        } else {
                            self.render(value)
                        },
                    )
                }));
            }
        }
    }

    fn master(&self, out: &mut Vec<Check>) {
        let ext = ExtendedTheory::new(self.theory.clone());
        let s = match ext.assemble_master_action() {
            Ok(s) => s,
            Err(e) => {
                out.push(timed("master-equation", "(S, S) = 0", || (Status::Fail, e.to_string())));
                return;
            }
        };
        out.push(timed("ghost-number", "gh(S) = 0", || match ghost_number(&s) {
            Some(0) => (Status::Pass, "0".into()),
            Some(g) => (Status::Fail, g.to_string()),
            None => (Status::Fail, "S is not homogeneous in ghost number".into()),
        }));
        let check = ext.check_master(&s);
        out.push(timed("master-equation", "(S, S) = 0", || match &check {
            MasterCheck::Zero => (Status::Pass, format!("Zero; S = {}", self.render(&s))),
            MasterCheck::Residual(r) => (Status::Fail, format!("Residual: {}", self.render(r))),
        }));
        if check.is_zero() {
            out.push(timed(
                "brst-decomposition",
                "s = delta + gamma on generators",
                || match ext.decomposition_residuals(&s) {
                    Err(e) => (Status::Fail, e.to_string()),
                    Ok(rs) => {
                        let bad: Vec<String> = rs
                            .iter()
                            .filter(|(_, a, b, c)| !(a.is_zero() && b.is_zero() && c.is_zero()))
                            .map(|(v, ..)| self.render(&Expr::var(*v)))
                            .collect();
                        if bad.is_empty() {
                            (Status::Pass, format!("{} generators", rs.len()))
                        } else {
                            (Status::Fail, format!("mismatch on {}", bad.join(", ")))
                        }
                    }
                },
            ));
        }
    }
}
