use std::path::Path;

use scenario_cert::bounds::BoundContext;
use scenario_cert::cdf::{
    build_envelope, envelope_csv, monte_carlo_cdf, nested_flags_below, per_level_complexities,
    CdfEnvelope, EnvelopeMode, ThresholdGrid,
};
use scenario_cert::format::{round_sig, scenario_file_json, to_report_json};
use scenario_cert::problems::{
    input_design, pole_placement, ConicSector, InputDesign, InputDesignSpec, InputMatrixSampler,
    InputScenario, PendulumSampler, PendulumScenario, PolePlacement, PolePlacementSpec,
};
use scenario_cert::scenario::{
    certify_full, monte_carlo_risk, Certification, CertificationReport, CertifyOptions, Decision,
    DecisionProblem, ScenarioId, ScenarioSampler, ScenarioSet,
};

use crate::args::{
    CdfArgs, CertifyArgs, EpsilonArgs, InputDesignArgs, Mode, PolePlacementArgs, ProblemArgs,
    ValidateArgs,
};
use crate::config::{companion, output_path, parse_grid, parse_sector, parse_sweep, RunConfig};
use crate::docs::{
    CertificateDoc, EpsilonDoc, EpsilonRow, MonteCarlo, Setup, SweepRow, ValidationDoc,
};
use crate::error::{CliError, CliResult};
use crate::manifest::Recorder;

/// Overrides the nesting flag with a user assertion.
struct Asserted<'a, P> {
    inner: &'a P,
    nested: bool,
}

impl<P: DecisionProblem> DecisionProblem for Asserted<'_, P> {
    type Scenario = P::Scenario;

    fn solve(
        &self,
        scenarios: &[(ScenarioId, &Self::Scenario)],
    ) -> scenario_cert::Result<Decision> {
        self.inner.solve(scenarios)
    }

    fn decisions_equal(&self, a: &Decision, b: &Decision) -> bool {
        self.inner.decisions_equal(a, b)
    }

    fn baseline_ok(&self, d: &Decision, s: &Self::Scenario) -> scenario_cert::Result<bool> {
        self.inner.baseline_ok(d, s)
    }

    fn postdesign_ok(&self, d: &Decision, s: &Self::Scenario) -> scenario_cert::Result<bool> {
        self.inner.postdesign_ok(d, s)
    }

    fn is_nested(&self) -> bool {
        self.nested || self.inner.is_nested()
    }

    fn nondegenerate(&self) -> bool {
        self.inner.nondegenerate()
    }
}

enum Loaded {
    Pole(PolePlacement, ScenarioSet<PendulumScenario>),
    Input(InputDesign, ScenarioSet<InputScenario>),
}

impl Loaded {
    fn seed(&self) -> Option<u64> {
        match self {
            Loaded::Pole(_, s) => s.origin.seed,
            Loaded::Input(_, s) => s.origin.seed,
        }
    }
}

fn pole_problem(sector: ConicSector, nondegenerate: bool) -> CliResult<PolePlacement> {
    let mut p = PolePlacement::new(PolePlacementSpec::default().with_sector(sector)?);
    p.nondegenerate = nondegenerate;
    Ok(p)
}

fn input_problem(rho: f64, level: f64, nondegenerate: bool) -> CliResult<InputDesign> {
    let mut p = InputDesign::new(InputDesignSpec::new(rho)?);
    p.postdesign_level = level;
    p.nondegenerate = nondegenerate;
    Ok(p)
}

fn setup_of(args: &ProblemArgs) -> CliResult<Setup> {
    match args.problem.as_str() {
        pole_placement::PROBLEM_ID => Ok(Setup::PolePlacement {
            sector: parse_sector(&args.sector)?,
        }),
        input_design::PROBLEM_ID => Ok(Setup::InputDesign {
            rho: args.rho,
            postdesign_level: args.level,
        }),
        other => Err(CliError::config(format!(
            "unknown problem `{other}` (expected `{}` or `{}`)",
            pole_placement::PROBLEM_ID,
            input_design::PROBLEM_ID
        ))),
    }
}

fn load(setup: &Setup, path: &Path, nondegenerate: bool) -> CliResult<Loaded> {
    use scenario_cert::format::load_scenarios;
    Ok(match *setup {
        Setup::PolePlacement { sector } => Loaded::Pole(
            pole_problem(sector, nondegenerate)?,
            load_scenarios(path, pole_placement::PROBLEM_ID)?,
        ),
        Setup::InputDesign {
            rho,
            postdesign_level,
        } => Loaded::Input(
            input_problem(rho, postdesign_level, nondegenerate)?,
            load_scenarios(path, input_design::PROBLEM_ID)?,
        ),
    })
}

fn problem_config(command: &str, args: &ProblemArgs, setup: &Setup, out: &Path) -> RunConfig {
    let mut c = RunConfig::new(command, out.to_path_buf());
    c.problem = Some(args.problem.clone());
    c.beta = Some(args.beta);
    c.scenarios = Some(args.scenarios.clone());
    match *setup {
        Setup::PolePlacement { sector } => c.sector = Some(sector),
        Setup::InputDesign {
            rho,
            postdesign_level,
        } => {
            c.rho = Some(rho);
            c.level = Some(postdesign_level);
        }
    }
    c
}

fn json_bytes<T: serde::Serialize>(value: &T, indent: Option<usize>) -> CliResult<Vec<u8>> {
    let mut text = to_report_json(value, indent)?;
    text.push('\n');
    Ok(text.into_bytes())
}

fn fmt(x: f64) -> String {
    format!("{}", round_sig(x))
}

/// Six significant digits in scientific notation, trailing zeros dropped.
fn short(x: f64) -> String {
    let d: f64 = format!("{x:.5e}").parse().unwrap_or(x);
    format!("{d:e}")
}

/// `1 - c` printed without float noise.
fn complement(c: f64) -> String {
    short(1.0 - c)
}

fn print_report(r: &CertificationReport) {
    println!(
        "scenarios {}, beta {}",
        r.sample_size,
        short(r.confidence_beta)
    );
    println!(
        "baseline complexity {}, instrumental complexity {}",
        r.baseline_complexity, r.instrumental_complexity
    );
    println!("baseline risk <= {}", fmt(r.baseline_upper));
    println!("post-design risk <= {}", fmt(r.theorem1_upper));
    if let Some(i) = r.theorem2_interval.or(r.theorem3_interval) {
        println!(
            "post-design risk in [{}, {}] with confidence {}",
            fmt(i.lower),
            fmt(i.upper),
            fmt(r.total_confidence)
        );
    }
}

// ---------------------------------------------------------------------------

pub fn epsilon(args: EpsilonArgs, indent: Option<usize>) -> CliResult<()> {
    let out = args
        .out
        .as_deref()
        .map(|p| output_path(Some(p), "epsilon.json"))
        .or_else(|| args.table.then(|| output_path(None, "epsilon_table.json")));
    let mut cfg = RunConfig::new("epsilon", out.clone().unwrap_or_default());
    cfg.n = Some(args.n);
    cfg.beta = Some(args.beta);
    cfg.k = args.k;
    cfg.mode = Some(args.mode);
    cfg.validate()?;

    let mut rec = Recorder::start();
    let ctx = BoundContext::new(args.n, args.beta)?;
    let row = |k: usize| -> CliResult<EpsilonRow> {
        let eps = match args.mode {
            Mode::Upper | Mode::Both => Some(ctx.epsilon_upper(k)?),
            Mode::Pair => None,
        };
        let (eps_lo, eps_hi) = match args.mode {
            Mode::Pair | Mode::Both => {
                let (lo, hi) = ctx.epsilon_pair(k)?;
                (Some(lo), Some(hi))
            }
            Mode::Upper => (None, None),
        };
        Ok(EpsilonRow {
            k,
            eps,
            eps_lo,
            eps_hi,
        })
    };
    let ks: Vec<usize> = match args.k {
        Some(k) => vec![k],
        None => (0..=args.n).collect(),
    };
    let rows = rec.stage("bounds", || {
        ks.into_iter().map(row).collect::<CliResult<Vec<_>>>()
    })?;

    if let [r] = rows.as_slice() {
        if args.k.is_some() {
            match (r.eps, r.eps_lo, r.eps_hi) {
                (Some(e), None, None) => println!("{}", fmt(e)),
                (e, Some(lo), Some(hi)) => {
                    if let Some(e) = e {
                        println!("eps {}", fmt(e));
                    }
                    println!("eps_lo {}", fmt(lo));
                    println!("eps_hi {}", fmt(hi));
                }
                _ => {}
            }
        }
    }
    if let Some(path) = out {
        let doc = EpsilonDoc {
            n: args.n,
            beta: args.beta,
            rows,
        };
        rec.write(&path, &json_bytes(&doc, indent)?)?;
        rec.finish(cfg, indent)?;
        if args.table {
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

pub fn certify(args: CertifyArgs, indent: Option<usize>) -> CliResult<()> {
    let setup = setup_of(&args.problem)?;
    let out = output_path(args.out.as_deref(), "certificate.json");
    let mut cfg = problem_config("certify", &args.problem, &setup, &out);
    cfg.prune = args.prune;
    cfg.nested = args.nested;
    cfg.nondegenerate = args.nondegenerate;
    cfg.validate()?;

    let mut rec = Recorder::start();
    let loaded = rec.stage("load", || {
        load(&setup, &args.problem.scenarios, args.nondegenerate)
    })?;
    cfg.seed = loaded.seed();
    let opts = CertifyOptions { prune: args.prune };
    let beta = args.problem.beta;
    let nested = args.nested;
    let cert = rec.stage("certify", || match &loaded {
        Loaded::Pole(p, set) => certify_full(&Asserted { inner: p, nested }, set, beta, opts),
        Loaded::Input(p, set) => certify_full(&Asserted { inner: p, nested }, set, beta, opts),
    })?;
    print_report(&cert.report);
    let doc = CertificateDoc {
        setup,
        scenario_seed: loaded.seed(),
        decision: cert.decision,
        report: cert.report,
        monte_carlo: None,
        sweep: Vec::new(),
        envelope: None,
        empirical_cdf: None,
    };
    rec.write(&out, &json_bytes(&doc, indent)?)?;
    rec.finish(cfg, indent)?;
    println!("wrote {}", out.display());
    Ok(())
}

/// Certifies at the post-design level and builds the envelope over `grid`.
fn input_envelope(
    problem: &InputDesign,
    set: &ScenarioSet<InputScenario>,
    beta: f64,
    grid: &ThresholdGrid,
    rec: &mut Recorder,
) -> CliResult<(Certification, CdfEnvelope)> {
    let cert = rec.stage("certify", || {
        certify_full(problem, set, beta, CertifyOptions::default())
    })?;
    let envelope = rec.stage("envelope", || -> CliResult<CdfEnvelope> {
        let cost = |d: &Decision, s: &InputScenario| problem.cost(d, s);
        let per_level = per_level_complexities(set, &cert.decision, &cert.support, cost, grid)?;
        let mode = if problem.nondegenerate {
            EnvelopeMode::TwoSided
        } else {
            EnvelopeMode::LowerOnly
        };
        Ok(build_envelope(
            &per_level,
            grid,
            set.len(),
            beta,
            cert.support.cardinality,
            &nested_flags_below(grid, 0.0),
            mode,
        )?)
    })?;
    Ok((cert, envelope))
}

fn print_envelope(e: &CdfEnvelope) {
    let s = &e.per_level_complexity;
    println!(
        "envelope over {} levels, complexity {} down to {}",
        e.grid.len(),
        s.first().copied().unwrap_or(0),
        s.last().copied().unwrap_or(0)
    );
    println!(
        "confidence {} (1 - {})",
        fmt(e.confidence),
        complement(e.confidence)
    );
}

pub fn cdf(args: CdfArgs, indent: Option<usize>) -> CliResult<()> {
    let setup = setup_of(&args.problem)?;
    if !matches!(setup, Setup::InputDesign { .. }) {
        return Err(CliError::config(format!(
            "cost distribution envelopes need a scalar cost; `{}` has none (use `{}`)",
            args.problem.problem,
            input_design::PROBLEM_ID
        )));
    }
    let out = output_path(args.out.as_deref(), "envelope.json");
    let mut cfg = problem_config("cdf", &args.problem, &setup, &out);
    cfg.nondegenerate = args.nondegenerate;
    cfg.grid = Some(args.grid.clone());
    cfg.validate()?;
    let grid = parse_grid(&args.grid)?;

    let mut rec = Recorder::start();
    let loaded = rec.stage("load", || {
        load(&setup, &args.problem.scenarios, args.nondegenerate)
    })?;
    cfg.seed = loaded.seed();
    let Loaded::Input(problem, set) = &loaded else {
        unreachable!("setup is input design");
    };
    let (cert, envelope) = input_envelope(problem, set, args.problem.beta, &grid, &mut rec)?;
    print_envelope(&envelope);
    let csv = envelope_csv(&envelope);
    let doc = CertificateDoc {
        setup,
        scenario_seed: loaded.seed(),
        decision: cert.decision,
        report: cert.report,
        monte_carlo: None,
        sweep: Vec::new(),
        envelope: Some(envelope),
        empirical_cdf: None,
    };
    rec.write(&out, &json_bytes(&doc, indent)?)?;
    rec.write(&companion(&out, "csv"), csv.as_bytes())?;
    rec.finish(cfg, indent)?;
    println!("wrote {}", out.display());
    Ok(())
}

pub fn example_pole_placement(args: PolePlacementArgs, indent: Option<usize>) -> CliResult<()> {
    let out = output_path(args.out.as_deref(), "pole_placement.json");
    let sector = parse_sector(&args.sector)?;
    let sweep = match &args.sector_sweep {
        Some(s) => parse_sweep(s)?,
        None => Vec::new(),
    };
    let mut cfg = RunConfig::new("example pole-placement", out.clone());
    cfg.problem = Some(pole_placement::PROBLEM_ID.into());
    cfg.n = Some(args.n);
    cfg.beta = Some(args.beta);
    cfg.seed = Some(args.seed);
    cfg.prune = args.prune;
    cfg.nondegenerate = args.nondegenerate;
    cfg.sector = Some(sector);
    cfg.sector_sweep = sweep.clone();
    cfg.monte_carlo = Some(args.mc);
    cfg.validate()?;

    let mut rec = Recorder::start();
    let set = rec.stage("sample", || PendulumSampler.sample_set(args.n, args.seed))?;
    let opts = CertifyOptions { prune: args.prune };
    let run =
        |sector: ConicSector, rec: &mut Recorder| -> CliResult<(Certification, Option<f64>)> {
            let problem = pole_problem(sector, args.nondegenerate)?;
            let cert = rec.stage("certify", || certify_full(&problem, &set, args.beta, opts))?;
            let risk = if args.mc > 0 {
                Some(rec.stage("monte_carlo", || {
                    monte_carlo_risk(
                        |d, s| problem.postdesign_ok(d, s),
                        &cert.decision,
                        &PendulumSampler,
                        args.mc,
                        args.seed,
                    )
                })?)
            } else {
                None
            };
            Ok((cert, risk))
        };

    let (cert, risk) = run(sector, &mut rec)?;
    print_report(&cert.report);
    if let Some(r) = risk {
        println!(
            "Monte Carlo post-design risk {} over {} scenarios",
            fmt(r),
            args.mc
        );
    }
    let row = |max_real: f64, c: &Certification, risk: Option<f64>| SweepRow {
        max_real,
        instrumental_complexity: c.report.instrumental_complexity,
        upper: c.report.theorem1_upper,
        interval: c.report.theorem3_interval.or(c.report.theorem2_interval),
        postdesign_risk: risk,
    };
    let mut rows = Vec::with_capacity(sweep.len());
    for &max_real in &sweep {
        let s = ConicSector::new(max_real, sector.min_damping)?;
        let (c, r) = run(s, &mut rec)?;
        rows.push(row(max_real, &c, r));
    }
    let mut csv =
        String::from("max_real,instrumental_complexity,upper,lower,interval_upper,mc_risk\n");
    for r in std::iter::once(&row(sector.max_real, &cert, risk)).chain(&rows) {
        let opt = |x: Option<f64>| x.map(fmt).unwrap_or_default();
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt(r.max_real),
            r.instrumental_complexity,
            fmt(r.upper),
            opt(r.interval.map(|i| i.lower)),
            opt(r.interval.map(|i| i.upper)),
            opt(r.postdesign_risk)
        ));
    }

    let doc = CertificateDoc {
        setup: Setup::PolePlacement { sector },
        scenario_seed: Some(args.seed),
        monte_carlo: risk.map(|r| MonteCarlo::new(args.mc, args.seed, r, &cert.report)),
        decision: cert.decision,
        report: cert.report,
        sweep: rows,
        envelope: None,
        empirical_cdf: None,
    };
    let scenarios = scenario_file_json(pole_placement::PROBLEM_ID, &set, indent)?;
    rec.write(&out, &json_bytes(&doc, indent)?)?;
    rec.write(&companion(&out, "csv"), csv.as_bytes())?;
    rec.write(
        &companion(&out, "scenarios.json"),
        (scenarios + "\n").as_bytes(),
    )?;
    rec.finish(cfg, indent)?;
    println!("wrote {}", out.display());
    Ok(())
}

pub fn example_input_design(args: InputDesignArgs, indent: Option<usize>) -> CliResult<()> {
    let out = output_path(args.out.as_deref(), "input_design.json");
    let mut cfg = RunConfig::new("example input-design", out.clone());
    cfg.problem = Some(input_design::PROBLEM_ID.into());
    cfg.n = Some(args.n);
    cfg.beta = Some(args.beta);
    cfg.seed = Some(args.seed);
    cfg.rho = Some(args.rho);
    cfg.level = Some(0.0);
    cfg.nondegenerate = true;
    cfg.grid = Some(args.grid.clone());
    cfg.monte_carlo = Some(args.mc);
    cfg.validate()?;
    let grid = parse_grid(&args.grid)?;

    let mut rec = Recorder::start();
    let sampler = InputMatrixSampler::default();
    let set = rec.stage("sample", || sampler.sample_set(args.n, args.seed))?;
    let problem = input_problem(args.rho, 0.0, true)?;
    let (cert, envelope) = input_envelope(&problem, &set, args.beta, &grid, &mut rec)?;
    print_report(&cert.report);
    print_envelope(&envelope);

    let (risk, empirical) = if args.mc > 0 {
        let risk = rec.stage("monte_carlo", || {
            monte_carlo_risk(
                |d, s| problem.postdesign_ok(d, s),
                &cert.decision,
                &sampler,
                args.mc,
                args.seed,
            )
        })?;
        let empirical = rec.stage("monte_carlo_cdf", || {
            monte_carlo_cdf(
                |d, s| problem.cost(d, s),
                &cert.decision,
                &sampler,
                args.mc,
                args.seed,
                &grid,
            )
        })?;
        let upper = envelope.upper_values.as_deref().unwrap_or_default();
        let inside = empirical
            .iter()
            .enumerate()
            .filter(|&(j, &f)| {
                envelope.lower_values[j] <= f && upper.get(j).is_none_or(|&u| f <= u)
            })
            .count();
        println!(
            "Monte Carlo post-design risk {}; empirical CDF inside the envelope at {}/{} levels",
            fmt(risk),
            inside,
            grid.len()
        );
        (Some(risk), Some(empirical))
    } else {
        (None, None)
    };

    let mut csv = String::from("level,lower,upper,empirical\n");
    for (j, &l) in grid.levels().iter().enumerate() {
        let upper = envelope.upper_values.as_ref().map(|u| fmt(u[j]));
        let emp = empirical.as_ref().map(|e| fmt(e[j]));
        csv.push_str(&format!(
            "{},{},{},{}\n",
            fmt(l),
            fmt(envelope.lower_values[j]),
            upper.unwrap_or_default(),
            emp.unwrap_or_default()
        ));
    }
    let doc = CertificateDoc {
        setup: Setup::InputDesign {
            rho: args.rho,
            postdesign_level: 0.0,
        },
        scenario_seed: Some(args.seed),
        monte_carlo: risk.map(|r| MonteCarlo::new(args.mc, args.seed, r, &cert.report)),
        decision: cert.decision,
        report: cert.report,
        sweep: Vec::new(),
        envelope: Some(envelope),
        empirical_cdf: empirical,
    };
    let scenarios = scenario_file_json(input_design::PROBLEM_ID, &set, indent)?;
    rec.write(&out, &json_bytes(&doc, indent)?)?;
    rec.write(&companion(&out, "csv"), csv.as_bytes())?;
    rec.write(
        &companion(&out, "scenarios.json"),
        (scenarios + "\n").as_bytes(),
    )?;
    rec.finish(cfg, indent)?;
    println!("wrote {}", out.display());
    Ok(())
}

pub fn validate(args: ValidateArgs, indent: Option<usize>) -> CliResult<()> {
    let out = output_path(args.out.as_deref(), "validation.json");
    let mut cfg = RunConfig::new("validate", out.clone());
    cfg.report = Some(args.report.clone());
    cfg.monte_carlo = Some(args.mc);
    if args.mc == 0 {
        return Err(CliError::config("--mc must be at least 1"));
    }
    let text =
        std::fs::read_to_string(&args.report).map_err(|source| scenario_cert::Error::Io {
            path: args.report.clone(),
            source,
        })?;
    let doc: CertificateDoc = serde_json::from_str(&text).map_err(|e| {
        CliError::config(format!("{}: not a certificate: {e}", args.report.display()))
    })?;
    let seed = args
        .seed
        .or(doc.scenario_seed)
        .ok_or_else(|| CliError::config("report carries no scenario seed; pass --seed"))?;
    cfg.seed = Some(seed);
    cfg.beta = Some(doc.report.confidence_beta);
    cfg.validate()?;

    let mut rec = Recorder::start();
    let risk = rec.stage("monte_carlo", || -> CliResult<f64> {
        Ok(match doc.setup {
            Setup::PolePlacement { sector } => {
                let p = pole_problem(sector, doc.report.nondegenerate)?;
                monte_carlo_risk(
                    |d, s| p.postdesign_ok(d, s),
                    &doc.decision,
                    &PendulumSampler,
                    args.mc,
                    seed,
                )?
            }
            Setup::InputDesign {
                rho,
                postdesign_level,
            } => {
                let p = input_problem(rho, postdesign_level, doc.report.nondegenerate)?;
                monte_carlo_risk(
                    |d, s| p.postdesign_ok(d, s),
                    &doc.decision,
                    &InputMatrixSampler::default(),
                    args.mc,
                    seed,
                )?
            }
        })
    })?;
    let mc = MonteCarlo::new(args.mc, seed, risk, &doc.report);
    println!(
        "Monte Carlo post-design risk {} over {} scenarios (bound {})",
        fmt(risk),
        args.mc,
        fmt(doc.report.theorem1_upper)
    );
    if let Some(inside) = mc.within_interval {
        println!("inside the certified interval: {inside}");
    }
    let within = mc.within_upper;
    let vdoc = ValidationDoc {
        setup: doc.setup,
        report_upper: doc.report.theorem1_upper,
        report_interval: doc
            .report
            .theorem2_interval
            .or(doc.report.theorem3_interval),
        monte_carlo: mc,
    };
    rec.write(&out, &json_bytes(&vdoc, indent)?)?;
    rec.finish(cfg, indent)?;
    if !within {
        return Err(CliError::Validation(format!(
            "empirical risk {} exceeds the certified bound {}",
            fmt(risk),
            fmt(doc.report.theorem1_upper)
        )));
    }
    Ok(())
}
