use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::{json, Value};

use hauptwerk::ade::{additive_assignment, catalogue, mckay_graph_cyclic, Graph};
use hauptwerk::classifier::{self, enumerate_invariants, DEFAULT_LEVEL_CAP};
use hauptwerk::fusion::{a1_fusion_closed, fusion_json, simple_currents, verlinde, DEFAULT_PRECISION_BITS};
use hauptwerk::galois::{a1_galois_action, galois_orbit, sign_vector_partition, units_a1};
use hauptwerk::modular_data::{self, a1_modular_data, load_modular_data, save_modular_data, validate, ModularData};
use hauptwerk::moonshine::{self, IdentityReport};
use hauptwerk::qseries::{self, QSeries};
use hauptwerk::verify::{self, CRITERIA};

const PRECISION_ENV: &str = "HAUPTWERK_PRECISION_BITS";

#[derive(Parser)]
#[command(name = "hauptwerk", version, about = "Modular data, fusion, invariant classification and moonshine checks")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalOpts {
    /// Output format.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Shorthand for --format json.
    #[arg(long, global = true, conflicts_with_all = ["pretty", "csv", "format"])]
    json: bool,
    /// Shorthand for --format pretty.
    #[arg(long, global = true, conflicts_with_all = ["csv", "format"])]
    pretty: bool,
    /// Shorthand for --format csv.
    #[arg(long, global = true, conflicts_with = "format")]
    csv: bool,
    /// Working precision for Verlinde sums; overrides HAUPTWERK_PRECISION_BITS.
    #[arg(long, global = true)]
    precision_bits: Option<usize>,
    /// key = value file with caps and defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for the randomized spot checks.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Allow levels and truncations beyond the configured caps.
    #[arg(long, global = true)]
    force: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Pretty,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Exact A1 modular data at a level, or validation of a data file.
    ModularData {
        #[arg(long, required_unless_present = "input", conflicts_with = "input")]
        level: Option<u64>,
        #[arg(long)]
        input: Option<PathBuf>,
        /// Run the validity checks.
        #[arg(long)]
        validate: bool,
        /// Also write the data as JSON to this path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verlinde fusion coefficients.
    Fusion {
        #[arg(long, required_unless_present = "input", conflicts_with = "input")]
        level: Option<u64>,
        #[arg(long)]
        input: Option<PathBuf>,
        /// Also report simple currents.
        #[arg(long)]
        currents: bool,
    },
    /// Galois permutation and signs; every unit when --ell is omitted.
    Galois {
        #[arg(long)]
        level: u64,
        #[arg(long, allow_hyphen_values = true)]
        ell: Option<i64>,
        /// Report the sign-vector partition instead.
        #[arg(long)]
        partition: bool,
    },
    /// Enumerate every physical invariant at a level.
    Classify {
        #[arg(long)]
        level: u64,
    },
    /// Print a q-series.
    Qseries {
        #[arg(value_enum)]
        series: SeriesName,
        #[arg(long, default_value_t = 10, allow_hyphen_values = true)]
        trunc: i64,
    },
    /// Moonshine identity checks.
    Moonshine {
        #[command(subcommand)]
        command: MoonshineCommand,
    },
    /// A-D-E tools.
    Ade {
        #[command(subcommand)]
        command: AdeCommand,
    },
    /// Run every acceptance criterion and print a summary table.
    VerifyAll {
        /// Run a single criterion.
        #[arg(long)]
        only: Option<u32>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SeriesName {
    /// j = q⁻¹ + 744 + ...
    J,
    /// J = j − 744.
    BigJ,
    Eta,
    Theta3,
    ThetaE8,
    J2,
    J13,
    J25,
}

#[derive(Subcommand)]
enum MoonshineCommand {
    Check {
        /// Identity name, or `all`.
        #[arg(long)]
        identity: String,
    },
    /// List identity names.
    List,
}

#[derive(Subcommand)]
enum AdeCommand {
    /// Additive assignment of a graph.
    Additive {
        /// Graph JSON file: {"adjacency": [[..]]} or {"nodes": n, "edges": [[a, b], ..]}.
        #[arg(long, required_unless_present_any = ["inline", "diagram"])]
        graph: Option<PathBuf>,
        /// Graph JSON given directly.
        #[arg(long, conflicts_with = "graph")]
        inline: Option<String>,
        /// A catalogue diagram by name, e.g. E8^.
        #[arg(long, conflicts_with_all = ["graph", "inline"])]
        diagram: Option<String>,
    },
    /// The extended Dynkin catalogue.
    Catalogue,
    /// McKay graph of the cyclic subgroup of order n.
    Mckay {
        #[arg(long)]
        n: u64,
    },
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    precision_bits: Option<usize>,
    seed: Option<u64>,
    level_cap: Option<u64>,
    fusion_level_cap: Option<u64>,
    galois_level_cap: Option<u64>,
    trunc_cap: Option<i64>,
}

struct RunConfig {
    format: Format,
    precision_bits: usize,
    seed: u64,
    force: bool,
    level_cap: u64,
    fusion_level_cap: u64,
    galois_level_cap: u64,
    trunc_cap: i64,
}

enum Failure {
    Usage(String),
    /// An identity or acceptance check failed; the rendered output is the witness.
    Check(Rendered),
}

fn usage(e: impl Display) -> Failure {
    Failure::Usage(e.to_string())
}

type Table = Vec<Vec<String>>;

struct Rendered {
    json: Value,
    pretty: String,
    csv: Option<Table>,
}

impl RunConfig {
    fn build(g: &GlobalOpts) -> Result<Self, Failure> {
        let file = match &g.config {
            Some(p) => read_config(p)?,
            None => ConfigFile::default(),
        };
        let env_bits = match std::env::var(PRECISION_ENV) {
            Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| usage(format!("{PRECISION_ENV}={v} is not a bit count")))?),
            Err(_) => None,
        };
        let precision_bits = g.precision_bits.or(env_bits).or(file.precision_bits).unwrap_or(DEFAULT_PRECISION_BITS);
        if !(64..=4096).contains(&precision_bits) {
            return Err(usage(format!("precision_bits {precision_bits} outside 64..=4096")));
        }
        let format = if g.json {
            Format::Json
        } else if g.pretty {
            Format::Pretty
        } else if g.csv {
            Format::Csv
        } else {
            g.format.unwrap_or(Format::Json)
        };
        Ok(RunConfig {
            format,
            precision_bits,
            seed: g.seed.or(file.seed).unwrap_or(0),
            force: g.force,
            level_cap: file.level_cap.unwrap_or(DEFAULT_LEVEL_CAP),
            fusion_level_cap: file.fusion_level_cap.unwrap_or(200),
            galois_level_cap: file.galois_level_cap.unwrap_or(1000),
            trunc_cap: file.trunc_cap.unwrap_or(400),
        })
    }

    fn cap(&self, what: &str, value: u64, cap: u64) -> Result<(), Failure> {
        if value > cap && !self.force {
            return Err(usage(format!("{what} {value} exceeds the cap {cap}; pass --force to run anyway")));
        }
        Ok(())
    }
}

fn read_config(path: &Path) -> Result<ConfigFile, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| usage(format!("{}: {}", path.display(), e.message())))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = RunConfig::build(&cli.global).and_then(|cfg| run(&cli.command, &cfg).map(|r| (r, cfg)));
    match result {
        Ok((rendered, cfg)) => match emit(&rendered, cfg.format) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) if e.contains("Broken pipe") => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Check(rendered)) => {
            let format = RunConfig::build(&cli.global).map(|c| c.format).unwrap_or(Format::Json);
            let _ = emit(&rendered, format);
            if format != Format::Json {
                eprintln!("{}", serde_json::to_string_pretty(&rendered.json).unwrap());
            }
            ExitCode::from(1)
        }
    }
}

fn emit(r: &Rendered, format: Format) -> Result<(), String> {
    let mut out = std::io::stdout().lock();
    match format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&r.json).unwrap()).map_err(|e| e.to_string()),
        Format::Pretty => write!(out, "{}", r.pretty).map_err(|e| e.to_string()),
        Format::Csv => {
            let table = r.csv.as_ref().ok_or("csv output is not available for this subcommand")?;
            let mut w = csv::Writer::from_writer(out);
            for row in table {
                w.write_record(row).map_err(|e| e.to_string())?;
            }
            w.flush().map_err(|e| e.to_string())
        }
    }
}

fn run(cmd: &Command, cfg: &RunConfig) -> Result<Rendered, Failure> {
    match cmd {
        Command::ModularData { level, input, validate, out } => {
            cmd_modular_data(cfg, *level, input.as_deref(), *validate, out.as_deref())
        }
        Command::Fusion { level, input, currents } => cmd_fusion(cfg, *level, input.as_deref(), *currents),
        Command::Galois { level, ell, partition } => cmd_galois(cfg, *level, *ell, *partition),
        Command::Classify { level } => cmd_classify(cfg, *level),
        Command::Qseries { series, trunc } => cmd_qseries(cfg, *series, *trunc),
        Command::Moonshine { command } => match command {
            MoonshineCommand::Check { identity } => cmd_moonshine_check(identity),
            MoonshineCommand::List => Ok(Rendered {
                json: json!({ "identities": moonshine::IDENTITIES }),
                pretty: moonshine::IDENTITIES.iter().map(|s| format!("{s}\n")).collect(),
                csv: Some(moonshine::IDENTITIES.iter().map(|s| vec![s.to_string()]).collect()),
            }),
        },
        Command::Ade { command } => cmd_ade(command),
        Command::VerifyAll { only } => cmd_verify_all(cfg, *only),
    }
}

fn load_data(cfg: &RunConfig, level: Option<u64>, input: Option<&Path>, cap: u64) -> Result<ModularData, Failure> {
    match (level, input) {
        (Some(k), _) => {
            if k == 0 {
                return Err(usage("level must be at least 1"));
            }
            cfg.cap("level", k, cap)?;
            Ok(a1_modular_data(k))
        }
        (None, Some(p)) => load_modular_data(p).map_err(usage),
        (None, None) => Err(usage("one of --level or --input is required")),
    }
}

fn cmd_modular_data(
    cfg: &RunConfig,
    level: Option<u64>,
    input: Option<&Path>,
    run_checks: bool,
    out: Option<&Path>,
) -> Result<Rendered, Failure> {
    let md = load_data(cfg, level, input, cfg.fusion_level_cap)?;
    if let Some(p) = out {
        save_modular_data(&md, p).map_err(usage)?;
    }
    let report = run_checks.then(|| validate(&md));
    let mut pretty = format!("labels: {}\n", md.labels.join(" "));
    if let Some(c) = md.charge_conjugation() {
        pretty += &format!("charge conjugation: {c:?}\n");
    }
    let mut csv = vec![vec!["check".to_string(), "passed".into(), "detail".into()]];
    if let Some(r) = &report {
        for c in &r.checks {
            pretty += &format!("{:<28} {}  {}\n", c.name, if c.passed { "ok" } else { "FAILED" }, c.detail);
            csv.push(vec![c.name.to_string(), c.passed.to_string(), c.detail.clone()]);
        }
    }
    let json = json!({
        "float": true,
        "modular_data": modular_data::to_json(&md),
        "validity": report,
    });
    match report {
        Some(r) if !r.ok => Err(Failure::Check(Rendered { json, pretty, csv: Some(csv) })),
        _ => Ok(Rendered { json, pretty, csv: run_checks.then_some(csv) }),
    }
}

fn cmd_fusion(cfg: &RunConfig, level: Option<u64>, input: Option<&Path>, currents: bool) -> Result<Rendered, Failure> {
    let md = load_data(cfg, level, input, cfg.fusion_level_cap)?;
    let fr = verlinde(&md, cfg.precision_bits).map_err(usage)?;
    let cur = if currents { Some(simple_currents(&md, &fr).map_err(usage)?) } else { None };
    let d = fr.dim();
    let mut pretty = String::new();
    for a in 0..d {
        for b in a..d {
            let terms: Vec<String> = (0..d)
                .filter(|&c| fr.n(a, b, c) != 0)
                .map(|c| match fr.n(a, b, c) {
                    1 => fr.labels[c].clone(),
                    x => format!("{x}·{}", fr.labels[c]),
                })
                .collect();
            pretty += &format!("{} × {} = {}\n", fr.labels[a], fr.labels[b], terms.join(" + "));
        }
    }
    for c in cur.iter().flatten() {
        pretty += &format!("simple current {} of order {}: {:?}\n", c.label, c.order, c.perm);
    }
    let mut csv = vec![vec!["lambda".to_string(), "mu".into(), "nu".into(), "N".into()]];
    csv.extend(fr.sparse().into_iter().map(|(l, m, v, x)| {
        vec![fr.labels[l].clone(), fr.labels[m].clone(), fr.labels[v].clone(), x.to_string()]
    }));
    let mut json = serde_json::to_value(fusion_json(&fr)).unwrap();
    if let Some(c) = cur {
        json["simple_currents"] = serde_json::to_value(c).unwrap();
    }
    Ok(Rendered { json, pretty, csv: Some(csv) })
}

fn cmd_galois(cfg: &RunConfig, level: u64, ell: Option<i64>, partition: bool) -> Result<Rendered, Failure> {
    if level == 0 {
        return Err(usage("level must be at least 1"));
    }
    cfg.cap("level", level, cfg.galois_level_cap)?;
    if partition {
        let parts = sign_vector_partition(level);
        let pretty = parts.iter().map(|p| format!("{p:?}\n")).collect();
        let csv = parts.iter().enumerate().flat_map(|(i, p)| p.iter().map(move |a| vec![a.to_string(), i.to_string()]));
        let csv = std::iter::once(vec!["label".to_string(), "class".into()]).chain(csv).collect();
        return Ok(Rendered { json: json!({ "level": level, "partition": parts }), pretty, csv: Some(csv) });
    }
    let ells = match ell {
        Some(l) => vec![l],
        None => units_a1(level),
    };
    let mut actions = Vec::new();
    for l in ells {
        let act = if level <= 40 {
            galois_orbit(&a1_modular_data(level), l).map_err(usage)?
        } else {
            a1_galois_action(level, l).map_err(usage)?
        };
        actions.push(act);
    }
    let mut pretty = String::new();
    let mut csv = vec![vec!["ell".to_string(), "label".into(), "image".into(), "sign".into()]];
    let mut items = Vec::new();
    for a in &actions {
        pretty += &format!("ell = {}: cycles {:?}, signs {:?}, global sign {}\n", a.ell, a.cycles(), a.signs, a.global_sign);
        for (i, (&p, &s)) in a.perm.iter().zip(&a.signs).enumerate() {
            csv.push(vec![a.ell.to_string(), i.to_string(), p.to_string(), s.to_string()]);
        }
        let mut v = serde_json::to_value(a).unwrap();
        v["cycles"] = json!(a.cycles());
        items.push(v);
    }
    Ok(Rendered { json: json!({ "level": level, "actions": items }), pretty, csv: Some(csv) })
}

fn cmd_classify(cfg: &RunConfig, level: u64) -> Result<Rendered, Failure> {
    if level == 0 {
        return Err(usage("level must be at least 1"));
    }
    cfg.cap("level", level, cfg.level_cap)?;
    let inv = enumerate_invariants(level).map_err(usage)?;
    let mut pretty = format!("level {level}: {} physical invariants\n", inv.len());
    let mut csv = vec![vec!["tag".to_string(), "exceptional".into(), "expression".into()]];
    let mut items = Vec::new();
    for i in &inv {
        let expr = classifier::pretty(&i.m);
        pretty += &format!("{:<4} {}\n", i.tag.to_string(), expr);
        csv.push(vec![i.tag.to_string(), i.exceptional.to_string(), expr.clone()]);
        items.push(json!({
            "tag": i.tag.to_string(),
            "exceptional": i.exceptional,
            "expression": expr,
            "matrix": i.m,
        }));
    }
    Ok(Rendered { json: json!({ "level": level, "count": inv.len(), "invariants": items }), pretty, csv: Some(csv) })
}

fn cmd_qseries(cfg: &RunConfig, name: SeriesName, trunc: i64) -> Result<Rendered, Failure> {
    if trunc < -1 {
        return Err(usage("trunc must be at least -1"));
    }
    cfg.cap("trunc", trunc.max(0) as u64, cfg.trunc_cap as u64)?;
    let (label, s): (&str, QSeries) = match name {
        SeriesName::J => ("j", qseries::jfun(trunc)),
        SeriesName::BigJ => ("J", qseries::big_j(trunc)),
        SeriesName::Eta => ("eta", qseries::eta(trunc)),
        SeriesName::Theta3 => ("theta3", qseries::theta3(trunc)),
        SeriesName::ThetaE8 => ("theta_e8", qseries::theta_e8(trunc)),
        SeriesName::J2 => ("J2", moonshine::j2(trunc).map_err(usage)?),
        SeriesName::J13 => ("J13", moonshine::j13(trunc).map_err(usage)?),
        SeriesName::J25 => ("J25", moonshine::j25(trunc).map_err(usage)?),
    };
    let mut csv = vec![vec!["exponent".to_string(), "coefficient".into()]];
    csv.extend(s.terms().map(|(e, c)| vec![e.to_string(), c.to_string()]));
    let mut json = serde_json::to_value(s.to_json()).unwrap();
    json["series"] = json!(label);
    Ok(Rendered { json, pretty: format!("{label} = {s}\n"), csv: Some(csv) })
}

fn report_line(r: &IdentityReport) -> String {
    let mut line = format!("{:<22} {}  (checked to {})", r.identity, if r.passed { "PASS" } else { "FAIL" }, r.checked_upto);
    if let Some(m) = &r.first_mismatch {
        line += &format!("  first mismatch at {}: {} vs {}", m.exponent, m.left, m.right);
    }
    line + "\n"
}

fn cmd_moonshine_check(identity: &str) -> Result<Rendered, Failure> {
    let reports = moonshine::check(identity).map_err(usage)?;
    let pretty = reports.iter().map(report_line).collect();
    let mut csv = vec![vec!["identity".to_string(), "passed".into(), "checked_upto".into(), "first_mismatch".into()]];
    for r in &reports {
        let m = r.first_mismatch.as_ref().map(|m| m.exponent.clone()).unwrap_or_default();
        csv.push(vec![r.identity.clone(), r.passed.to_string(), r.checked_upto.clone(), m]);
    }
    let passed = reports.iter().all(|r| r.passed);
    let rendered = Rendered { json: json!({ "passed": passed, "reports": reports }), pretty, csv: Some(csv) };
    if passed {
        Ok(rendered)
    } else {
        Err(Failure::Check(rendered))
    }
}

fn assignment_json(v: &Option<Vec<hauptwerk::exactnum::Rational>>) -> Value {
    match v {
        Some(a) => json!(a.iter().map(|x| x.to_string()).collect::<Vec<_>>()),
        None => Value::Null,
    }
}

fn cmd_ade(cmd: &AdeCommand) -> Result<Rendered, Failure> {
    match cmd {
        AdeCommand::Additive { graph, inline, diagram } => {
            let g = if let Some(name) = diagram {
                catalogue()
                    .into_iter()
                    .find(|e| &e.name == name)
                    .map(|e| e.graph)
                    .ok_or_else(|| usage(format!("no catalogue diagram named {name}")))?
            } else {
                let text = match (graph, inline) {
                    (Some(p), _) => std::fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())))?,
                    (None, Some(s)) => s.clone(),
                    (None, None) => return Err(usage("one of --graph, --inline or --diagram is required")),
                };
                Graph::from_json(&text).map_err(usage)?
            };
            let a = additive_assignment(&g).map_err(usage)?;
            let aj = assignment_json(&a);
            let pretty = match &a {
                Some(v) => format!("assignment: {}\n", v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")),
                None => "no additive assignment\n".to_string(),
            };
            let mut csv = vec![vec!["node".to_string(), "value".into()]];
            for (i, x) in a.iter().flatten().enumerate() {
                csv.push(vec![i.to_string(), x.to_string()]);
            }
            Ok(Rendered { json: json!({ "adjacency": g.adjacency(), "assignment": aj }), pretty, csv: Some(csv) })
        }
        AdeCommand::Catalogue => {
            let cat = catalogue();
            let mut pretty = String::new();
            let mut csv = vec![vec!["name".to_string(), "rank".into(), "coxeter".into(), "marks".into(), "exponents".into()]];
            for e in &cat {
                pretty += &format!("{:<4} rank {} h = {:<3} marks {:?} exponents {:?}\n", e.name, e.rank, e.coxeter, e.marks, e.exponents);
                csv.push(vec![e.name.clone(), e.rank.to_string(), e.coxeter.to_string(), join(&e.marks), join(&e.exponents)]);
            }
            let items: Vec<Value> = cat
                .iter()
                .map(|e| {
                    json!({
                        "name": e.name,
                        "rank": e.rank,
                        "coxeter": e.coxeter,
                        "marks": e.marks,
                        "exponents": e.exponents,
                        "adjacency": e.graph.adjacency(),
                    })
                })
                .collect();
            Ok(Rendered { json: json!({ "diagrams": items }), pretty, csv: Some(csv) })
        }
        AdeCommand::Mckay { n } => {
            let g = mckay_graph_cyclic(*n).map_err(usage)?;
            let a = additive_assignment(&g).map_err(usage)?;
            let pretty = format!("McKay graph of Z/{n}: {:?}\nassignment: {}\n", g.adjacency(), assignment_json(&a));
            Ok(Rendered { json: json!({ "n": n, "adjacency": g.adjacency(), "assignment": assignment_json(&a) }), pretty, csv: None })
        }
    }
}

fn join(v: &[u64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

/// Seeded spot checks: random Verlinde coefficients against the closed rule,
/// and catalogue diagrams under a random relabeling.
fn spot_checks(cfg: &RunConfig) -> Result<Value, Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut fusion_ok = true;
    let mut rings = std::collections::BTreeMap::new();
    for _ in 0..64 {
        let k = rng.random_range(1..=16u64);
        if let std::collections::btree_map::Entry::Vacant(e) = rings.entry(k) {
            e.insert(verlinde(&a1_modular_data(k), cfg.precision_bits).map_err(usage)?);
        }
        let (a, b, c) = (rng.random_range(0..=k), rng.random_range(0..=k), rng.random_range(0..=k));
        let want = a1_fusion_closed(k, a, b, c).map_err(usage)?;
        fusion_ok &= rings[&k].n(a as usize, b as usize, c as usize) == want;
    }
    let cat = catalogue();
    let mut ade_ok = true;
    for _ in 0..16 {
        let e = &cat[rng.random_range(0..cat.len())];
        let n = e.graph.len();
        let mut p: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            p.swap(i, rng.random_range(0..=i));
        }
        let adj = e.graph.adjacency();
        let mut b = vec![vec![0u32; n]; n];
        for i in 0..n {
            for j in 0..n {
                b[p[i]][p[j]] = adj[i][j];
            }
        }
        let g = Graph::new(b).map_err(usage)?;
        let got = additive_assignment(&g).map_err(usage)?;
        ade_ok &= got.is_some_and(|v| (0..n).all(|i| v[p[i]] == hauptwerk::exactnum::rat_int(e.marks[i] as i64)));
    }
    Ok(json!({ "seed": cfg.seed, "fusion_samples": 64, "fusion_ok": fusion_ok, "relabelings": 16, "relabeling_ok": ade_ok }))
}

fn cmd_verify_all(cfg: &RunConfig, only: Option<u32>) -> Result<Rendered, Failure> {
    let ids: Vec<u32> = match only {
        Some(id) if CRITERIA.iter().any(|c| c.0 == id) => vec![id],
        Some(id) => return Err(usage(format!("no criterion {id}"))),
        None => CRITERIA.iter().map(|c| c.0).collect(),
    };
    let results: Vec<_> = ids.into_iter().map(verify::run).collect();
    let spots = spot_checks(cfg)?;
    let failed = results.iter().filter(|r| !r.passed).count();
    let mut pretty = format!("{:<4} {:<6} {:<50} detail\n", "id", "result", "criterion");
    let mut csv = vec![vec!["id".to_string(), "passed".into(), "name".into(), "detail".into()]];
    let mut items = Vec::new();
    for r in &results {
        pretty += &format!("{:<4} {:<6} {:<50} {}\n", r.id, if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
        csv.push(vec![r.id.to_string(), r.passed.to_string(), r.name.to_string(), r.detail.clone()]);
        items.push(json!({ "id": r.id, "name": r.name, "passed": r.passed, "detail": r.detail }));
    }
    pretty += &format!("{} passed, {} failed\n", results.len() - failed, failed);
    pretty += &format!("spot checks (seed {}): {spots}\n", cfg.seed);
    let spots_ok = spots["fusion_ok"] == true && spots["relabeling_ok"] == true;
    let json = json!({
        "results": items,
        "passed": results.len() - failed,
        "failed": failed,
        "spot_checks": spots,
    });
    let rendered = Rendered { json, pretty, csv: Some(csv) };
    if failed == 0 && spots_ok {
        Ok(rendered)
    } else {
        Err(Failure::Check(rendered))
    }
}
