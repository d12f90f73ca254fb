//! Subcommand implementations and their report payloads.

use std::path::Path;
use std::time::Instant;

use carnot_bcp::algebra::algebra_from_json;
use carnot_bcp::besicovitch::BesicovitchFamily;
use carnot_bcp::besicovitch::{
    ball_structure_holds, countable_space, find_two_ball_family, greedy_cover, search_family, verify_family,
    Certificate, CertificateMode, CoverReport, SearchConfig, SearchOutcome, Strategy, TwoBallFamily,
};
use carnot_bcp::certificates::{
    aq_exact_check, lemma_sweep, AqExactReport, Lemma, RegionParams, SweepReport, SWEEP_TOLERANCE,
};
use carnot_bcp::io::parse_point;
use carnot_bcp::metrics::finite::{index_of, FiniteViolation};
use carnot_bcp::metrics::{DistanceSpec, QuasiDistance, SmallRatio};
use carnot_bcp::scalar::{fmt_rational, parse_rational, rational_to_f64};
use carnot_bcp::structure::{
    decompose_commuting, has_commuting_different_layers, heisenberg_quotient_witness, is_stratification,
    validate_morphism, LayerWitness, StratificationReport,
};
use carnot_bcp::{Backend, GroupSpec, StructureConstants};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::report::{AnyReport, Provenance, RunReport, Status};
use crate::{
    BesicovitchCommand, CertifyArgs, ClassifyArgs, CliError, Command, CountableArgs, CoverArgs, DistCommand,
    DistEvalArgs, DistanceArgs, DistanceKind, Rendered, ReportArgs, SearchArgs, StrategyArg, VerifyArgs,
};

type Res<T> = std::result::Result<T, CliError>;

/// Float tolerance quoted for solver-based distance values.
pub const DIST_TOLERANCE: f64 = 1e-10;

fn read(path: &Path) -> Res<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("reading {}: {e}", path.display())))
}

fn parse_json<T: DeserializeOwned>(text: &str, what: &str) -> Res<T> {
    serde_json::from_str(text).map_err(|e| CliError::Usage(format!("parsing {what}: {e}")))
}

fn render<C: Serialize, R: Serialize>(
    command: &str,
    config: C,
    result: R,
    status: Status,
    provenance: Vec<Provenance>,
    start: Instant,
    diagnostic: Option<Value>,
) -> Res<Rendered> {
    let report = RunReport {
        command: command.into(),
        status,
        config,
        result,
        provenance,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    let mut json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(e.to_string()))?;
    json.push('\n');
    Ok(Rendered { json, status, diagnostic })
}

fn status_of(ok: bool) -> Status {
    if ok {
        Status::Ok
    } else {
        Status::Rejected
    }
}

pub fn dispatch(cmd: &Command) -> Res<Rendered> {
    match cmd {
        Command::Classify(a) => classify(a),
        Command::Dist { cmd: DistCommand::Eval(a) } => dist_eval(a),
        Command::Besicovitch { cmd } => match cmd {
            BesicovitchCommand::Search(a) => search(a),
            BesicovitchCommand::Verify(a) => verify(a),
            BesicovitchCommand::Cover(a) => cover(a),
        },
        Command::CertifyLemmas(a) => certify(a),
        Command::CountableSpace(a) => countable(a),
        Command::Report(a) => report(a),
    }
}

/// Expands a bare `heisenberg_nonstandard` plus `--alpha` and checks the expression parses.
pub fn resolve_group(group: &str, alpha: Option<&str>) -> Res<String> {
    let name = match alpha {
        None => group.trim().to_string(),
        Some(a) if group.trim() == "heisenberg_nonstandard" => {
            format!("heisenberg_nonstandard({})", a.trim())
        }
        Some(_) => return Err(CliError::Usage("--alpha applies only to a bare heisenberg_nonstandard".into())),
    };
    name.parse::<GroupSpec>()?;
    Ok(name)
}

impl DistanceArgs {
    pub fn is_given(&self) -> bool {
        self.distance.is_some() || self.distance_json.is_some() || self.kind.is_some() || self.group.is_some()
    }

    fn group_name(&self) -> Res<String> {
        let g = self.group.as_deref().ok_or_else(|| CliError::Usage("this distance kind needs --group".into()))?;
        resolve_group(g, self.alpha.as_deref())
    }

    /// The described distance, or `fallback` when nothing was given.
    pub fn spec(&self, fallback: Option<DistanceSpec>) -> Res<DistanceSpec> {
        if let Some(p) = &self.distance {
            return parse_json(&read(p)?, "distance file");
        }
        if let Some(j) = &self.distance_json {
            return parse_json(j, "--distance-json");
        }
        let kind = self.kind.or(self.group.as_ref().map(|_| DistanceKind::Hs));
        let hs = || -> Res<DistanceSpec> { Ok(DistanceSpec::Hs { group: self.group_name()?, r: self.radius.clone() }) };
        Ok(match kind {
            None => fallback.ok_or_else(|| {
                CliError::Usage("no distance given: use --group, --kind, --distance or --distance-json".into())
            })?,
            Some(DistanceKind::Hs) => hs()?,
            Some(DistanceKind::Power) => DistanceSpec::Power {
                inner: Box::new(hs()?),
                t: self.t.clone().ok_or_else(|| CliError::Usage("--kind power needs --t".into()))?,
            },
            Some(DistanceKind::CcH1) => DistanceSpec::CcH1 { scale: self.scale.unwrap_or(1.0) },
            Some(DistanceKind::CountableSpace) => DistanceSpec::CountableSpace { n: self.n.unwrap_or(200) },
        })
    }
}

// ---------------------------------------------------------------- classify

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifyConfig {
    pub group: Option<String>,
    pub algebra: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorSummary {
    pub power: String,
    pub dim: usize,
    pub weights: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionSummary {
    pub factors: Vec<FactorSummary>,
    /// The assembled direct sum maps isomorphically onto the input (exact rank check).
    pub isomorphism_valid: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuotientSummary {
    pub t: String,
    pub s: String,
    pub subalgebra_dim: usize,
    /// The bracket-preserving map onto the non-standard Heisenberg algebra is surjective.
    pub valid: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifyResult {
    pub dim: usize,
    pub weights: Vec<String>,
    pub commuting_different_layers: bool,
    pub bcp_admissible: bool,
    pub witness: Option<LayerWitness>,
    pub verdict: String,
    pub stratification: StratificationReport,
    pub decomposition: Option<DecompositionSummary>,
    pub heisenberg_quotient: Option<QuotientSummary>,
}

pub fn classify_algebra(alg: &StructureConstants) -> Res<ClassifyResult> {
    let v = has_commuting_different_layers(alg)?;
    let (decomposition, heisenberg_quotient) = if v.commuting_different_layers {
        let d = decompose_commuting(alg)?;
        let factors = d
            .factors
            .iter()
            .map(|f| FactorSummary {
                power: fmt_rational(&f.power),
                dim: f.algebra.dim(),
                weights: f.algebra.weights().iter().map(fmt_rational).collect(),
            })
            .collect();
        let ok = validate_morphism(&d.isomorphism).is_isomorphism();
        (Some(DecompositionSummary { factors, isomorphism_valid: ok }), None)
    } else {
        let w = heisenberg_quotient_witness(alg)?;
        let rep = validate_morphism(&w.morphism);
        let q = QuotientSummary {
            t: fmt_rational(&w.t),
            s: fmt_rational(&w.s),
            subalgebra_dim: w.subalgebra.dim(),
            valid: rep.is_morphism() && rep.surjective,
        };
        (None, Some(q))
    };
    Ok(ClassifyResult {
        dim: alg.dim(),
        weights: alg.weights().iter().map(fmt_rational).collect(),
        commuting_different_layers: v.commuting_different_layers,
        bcp_admissible: v.commuting_different_layers,
        witness: v.witness,
        verdict: v.verdict,
        stratification: is_stratification(alg),
        decomposition,
        heisenberg_quotient,
    })
}

fn classify(a: &ClassifyArgs) -> Res<Rendered> {
    let start = Instant::now();
    let (group, alg) = match (&a.group, &a.algebra) {
        (Some(g), None) => {
            let name = resolve_group(g, a.alpha.as_deref())?;
            let alg = name.parse::<GroupSpec>()?.algebra()?;
            (Some(name), alg)
        }
        (None, Some(p)) => (None, algebra_from_json(&read(p)?)?),
        _ => return Err(CliError::Usage("give exactly one of --group and --algebra".into())),
    };
    let result = classify_algebra(&alg)?;
    let ok = result.decomposition.as_ref().is_none_or(|d| d.isomorphism_valid)
        && result.heisenberg_quotient.as_ref().is_none_or(|q| q.valid);
    let config = ClassifyConfig { group, algebra: a.algebra.as_ref().map(|p| p.display().to_string()) };
    let prov = vec![Provenance::exact("commuting_different_layers"), Provenance::exact("decomposition")];
    render("classify", config, result, status_of(ok), prov, start, None)
}

// ---------------------------------------------------------------- dist eval

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistEvalConfig {
    pub distance: DistanceSpec,
    pub p: String,
    pub q: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistEvalResult {
    pub value: f64,
    pub backend: Backend,
    /// The value as `base^(1/root)` when it is decided exactly.
    pub exact_base: Option<String>,
    pub exact_root: Option<u64>,
}

fn dist_eval(a: &DistEvalArgs) -> Res<Rendered> {
    let start = Instant::now();
    let spec = a.distance.spec(None)?;
    let d = spec.build()?;
    let (p, q) = (parse_point(&a.p)?, parse_point(&a.q)?);
    let pf: Vec<f64> = p.iter().map(rational_to_f64).collect();
    let qf: Vec<f64> = q.iter().map(rational_to_f64).collect();
    let value = d.dist(&pf, &qf)?;
    let exact = match &d {
        QuasiDistance::Finite(s) => {
            let label = |x: &[carnot_bcp::Rational]| match x {
                [c] => index_of(c, s.len()),
                _ => Err(carnot_bcp::Error::Dimension { expected: 1, got: x.len() }),
            };
            let r: SmallRatio = s.distance(label(&p)?, label(&q)?);
            Some((format!("{r}"), 1))
        }
        _ => d.difference_exact(&p, &q).ok().and_then(|x| d.exact_norm(&x)).map(|r| (fmt_rational(&r.base), r.k)),
    };
    let (backend, prov) = match exact {
        Some(_) => (Backend::Exact, Provenance::exact("value")),
        None => (Backend::Float, Provenance::float("value", DIST_TOLERANCE)),
    };
    let result = DistEvalResult {
        value,
        backend,
        exact_base: exact.as_ref().map(|e| e.0.clone()),
        exact_root: exact.map(|e| e.1),
    };
    let config = DistEvalConfig { distance: spec, p: a.p.clone(), q: a.q.clone() };
    render("dist eval", config, result, Status::Ok, vec![prov], start, None)
}

// ---------------------------------------------------------------- besicovitch

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchEcho {
    pub distance: DistanceSpec,
    pub search: SearchConfig,
}

fn family_provenance(mode: CertificateMode, eps: Option<f64>) -> Provenance {
    match mode {
        CertificateMode::Exact => Provenance::exact("certificate"),
        CertificateMode::Margin => {
            Provenance::float("certificate", eps.unwrap_or(carnot_bcp::besicovitch::DEFAULT_MARGIN))
        }
    }
}

fn search(a: &SearchArgs) -> Res<Rendered> {
    let start = Instant::now();
    let spec = a.distance.spec(None)?;
    let d = spec.build()?;
    let mut cfg =
        if a.combined { SearchConfig::combined(a.budget, a.seed) } else { SearchConfig::new(a.budget, a.seed) };
    cfg.strategy = match a.strategy {
        StrategyArg::Random => Strategy::Random,
        StrategyArg::Annealed => Strategy::Annealed,
    };
    let mut out: SearchOutcome = search_family(&d, &cfg)?;
    out.family.distance = Some(spec.clone());
    if let Some(path) = &a.family_out {
        let text = serde_json::to_string_pretty(&out.family).map_err(|e| CliError::Io(e.to_string()))? + "\n";
        std::fs::write(path, text).map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))?;
    }
    let prov = vec![family_provenance(out.family.mode, out.family.epsilon)];
    let status = status_of(out.certificate.valid);
    render("besicovitch search", SearchEcho { distance: spec, search: cfg }, out, status, prov, start, None)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyEcho {
    pub family: String,
    pub distance: DistanceSpec,
}

fn verify(a: &VerifyArgs) -> Res<Rendered> {
    let start = Instant::now();
    let family: BesicovitchFamily = parse_json(&read(&a.family)?, "family file")?;
    let spec = if a.distance.is_given() {
        a.distance.spec(None)?
    } else {
        family.distance.clone().ok_or_else(|| {
            CliError::Usage("the family file names no distance; pass --group, --distance or --distance-json".into())
        })?
    };
    let d = spec.build()?;
    let cert: Certificate = verify_family(&family, &d)?;
    let diagnostic =
        cert.violation.as_ref().map(|v| json!({ "error": "rejected", "message": v.to_string(), "violation": v }));
    let prov = vec![family_provenance(family.mode, family.epsilon)];
    let echo = VerifyEcho { family: a.family.display().to_string(), distance: spec };
    render("besicovitch verify", echo, cert.clone(), status_of(cert.valid), prov, start, diagnostic)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverInput {
    pub points: Vec<Vec<f64>>,
    pub radii: Vec<f64>,
}

/// Uniform points in [0,1]^dim with radii log-uniform in [1/16, 1].
pub fn random_cover_input(n: usize, dim: usize, seed: u64) -> CoverInput {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..n).map(|_| (0..dim).map(|_| rng.random::<f64>()).collect()).collect();
    let radii = (0..n).map(|_| (1.0f64 / 16.0).powf(rng.random::<f64>())).collect();
    CoverInput { points, radii }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverEcho {
    pub distance: DistanceSpec,
    pub input: Option<String>,
    pub random: Option<usize>,
    pub seed: Option<u64>,
    pub dim: usize,
}

fn cover(a: &CoverArgs) -> Res<Rendered> {
    let start = Instant::now();
    let input = match (&a.input, a.random, a.seed) {
        (Some(p), None, _) => parse_json::<CoverInput>(&read(p)?, "cover input")?,
        (None, Some(n), Some(seed)) => random_cover_input(n, a.dim, seed),
        _ => return Err(CliError::Usage("give --input FILE or --random N --seed S".into())),
    };
    let dim = input.points.first().map_or(a.dim, Vec::len);
    let euclidean = DistanceSpec::Hs { group: format!("abelian({})", vec!["1"; dim].join(",")), r: "1".into() };
    let spec = a.distance.spec(Some(euclidean))?;
    let rep: CoverReport = greedy_cover(&input.points, &input.radii, &spec.build()?)?;
    let ok = rep.covered && rep.centers_outside_earlier_balls;
    let echo = CoverEcho {
        distance: spec,
        input: a.input.as_ref().map(|p| p.display().to_string()),
        random: a.random,
        seed: a.seed,
        dim,
    };
    render("besicovitch cover", echo, rep, status_of(ok), vec![Provenance::float("block_bounds", 0.0)], start, None)
}

// ---------------------------------------------------------------- certify-lemmas

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifyEcho {
    pub lemmas: Vec<Lemma>,
    pub params: RegionParams,
    pub samples: u64,
    pub seed: u64,
    pub epsilon: Option<String>,
    pub delta: Option<f64>,
    pub exact_samples: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifyResult {
    pub sweeps: Vec<SweepReport>,
    pub aq_exact: Option<AqExactReport>,
    pub total_violations: usize,
}

fn certify(a: &CertifyArgs) -> Res<Rendered> {
    let start = Instant::now();
    let lemmas: Vec<Lemma> = if a.lemma == "all" { Lemma::ALL.to_vec() } else { vec![a.lemma.parse::<Lemma>()?] };
    let params = RegionParams::new(a.rank, parse_rational(&a.radius)?)?;
    let epsilon = a.epsilon.as_deref().map(parse_rational).transpose()?;
    let sweeps = lemmas
        .iter()
        .map(|&l| lemma_sweep(l, &params, epsilon.clone(), a.delta, a.samples, a.seed))
        .collect::<carnot_bcp::Result<Vec<_>>>()?;
    let aq_exact = (a.exact_samples > 0).then(|| aq_exact_check(&params, a.exact_samples, a.seed)).transpose()?;
    let total_violations = sweeps.iter().map(|s| s.violations.len()).sum::<usize>()
        + aq_exact.as_ref().map_or(0, |r| r.disagreements.len());
    let diagnostic = sweeps
        .iter()
        .find_map(|s| s.violations.first().map(|v| json!({ "error": "rejected", "lemma": s.lemma, "violation": v })));
    let mut prov = vec![Provenance::float("max_a_form", SWEEP_TOLERANCE), Provenance::exact("epsilon")];
    if aq_exact.is_some() {
        prov.push(Provenance::exact("aq_exact"));
    }
    let echo = CertifyEcho {
        lemmas,
        params,
        samples: a.samples,
        seed: a.seed,
        epsilon: a.epsilon.clone(),
        delta: a.delta,
        exact_samples: a.exact_samples,
    };
    let status = status_of(total_violations == 0);
    render(
        "certify-lemmas",
        echo,
        CertifyResult { sweeps, aq_exact, total_violations },
        status,
        prov,
        start,
        diagnostic,
    )
}

// ---------------------------------------------------------------- countable-space

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountableEcho {
    pub n: usize,
    pub ball_check: usize,
    pub grid: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountableResult {
    /// First failed distance axiom (triangle inequality over all triples), if any.
    pub axioms_violation: Option<FiniteViolation>,
    pub ball_structure_holds: bool,
    pub two_ball_family: Option<TwoBallFamily>,
}

fn countable(a: &CountableArgs) -> Res<Rendered> {
    let start = Instant::now();
    if a.grid < 1 {
        return Err(CliError::Usage("--grid must be positive".into()));
    }
    let s = countable_space(a.n)?;
    let ball_check = a.ball_check.unwrap_or(a.n);
    let balls = ball_structure_holds(&countable_space(ball_check.max(a.n))?, ball_check);
    let grid = a.grid;
    let radii = move |_| (1..=grid).map(|k| SmallRatio::new(k, grid)).collect();
    let result = CountableResult {
        axioms_violation: s.validate(),
        ball_structure_holds: balls,
        two_ball_family: find_two_ball_family(&s, &radii),
    };
    let ok = result.axioms_violation.is_none() && balls && result.two_ball_family.is_none();
    let diagnostic = result.two_ball_family.as_ref().map(|f| json!({ "error": "rejected", "two_ball_family": f }));
    let echo = CountableEcho { n: a.n, ball_check, grid };
    render("countable-space", echo, result, status_of(ok), vec![Provenance::exact("result")], start, diagnostic)
}

// ---------------------------------------------------------------- report

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub path: String,
    pub command: String,
    pub status: Status,
    pub elapsed_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub reports: Vec<ReportEntry>,
    pub all_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportEcho {
    pub inputs: Vec<String>,
}

fn typed<C, R>(text: &str, what: &str) -> Res<String>
where
    C: Serialize + DeserializeOwned,
    R: Serialize + DeserializeOwned,
{
    let r = parse_json::<RunReport<C, R>>(text, what)?;
    Ok(serde_json::to_string_pretty(&r).map_err(|e| CliError::Io(e.to_string()))? + "\n")
}

/// Parses a report into the typed payload of its own command and serializes it again.
pub fn canonical_report(text: &str, what: &str) -> Res<String> {
    let any: AnyReport = parse_json(text, what)?;
    match any.command.as_str() {
        "classify" => typed::<ClassifyConfig, ClassifyResult>(text, what),
        "dist eval" => typed::<DistEvalConfig, DistEvalResult>(text, what),
        "besicovitch search" => typed::<SearchEcho, SearchOutcome>(text, what),
        "besicovitch verify" => typed::<VerifyEcho, Certificate>(text, what),
        "besicovitch cover" => typed::<CoverEcho, CoverReport>(text, what),
        "certify-lemmas" => typed::<CertifyEcho, CertifyResult>(text, what),
        "countable-space" => typed::<CountableEcho, CountableResult>(text, what),
        "report" => typed::<ReportEcho, ReportSummary>(text, what),
        other => Err(CliError::Usage(format!("{what}: unknown command {other:?}"))),
    }
}

/// Header of a report whose payload parses as its command's typed result.
pub fn parse_report(text: &str, what: &str) -> Res<AnyReport> {
    canonical_report(text, what)?;
    parse_json(text, what)
}

fn report(a: &ReportArgs) -> Res<Rendered> {
    let start = Instant::now();
    let mut reports = Vec::new();
    for p in &a.inputs {
        let path = p.display().to_string();
        let r = parse_report(&read(p)?, &path)?;
        reports.push(ReportEntry { path, command: r.command, status: r.status, elapsed_ms: r.elapsed_ms });
    }
    let all_ok = reports.iter().all(|r| r.status == Status::Ok);
    let echo = ReportEcho { inputs: a.inputs.iter().map(|p| p.display().to_string()).collect() };
    render("report", echo, ReportSummary { reports, all_ok }, status_of(all_ok), Vec::new(), start, None)
}
