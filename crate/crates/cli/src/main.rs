//! `ohd`: command-line front end for the network analyses.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use ohd::barricades::{barricade_sweep, SatzReport};
use ohd::currents::{current_with_intensity, LimitConfig, DEFAULT_CAP};
use ohd::exhaustion::{truncate_free, Exhaustion, VertexSelector};
use ohd::families::{Family, FamilySpec, BRIDGE_KEY};
use ohd::io::{read_exhaustion, read_vertex_set};
use ohd::kirchhoff::{is_non_elusive, NonElusiveReport, DEFAULT_TOL};
use ohd::ohd::{characterization_check, gap_test, harmonic_witness, CertificateVerdict, OhdEvidence, GAP_FACTOR};
use ohd::transience::{nash_williams_bound, resistance_to_infinity, Transience};

/// Version tag of the JSON reports.
const SCHEMA: &str = "ohd-report/1";

/// Random cuts sampled per non-elusiveness check.
const CUT_SAMPLES: usize = 64;

#[derive(Parser, Debug)]
#[command(name = "ohd", version, about = "Harmonic Dirichlet analysis of infinite electrical networks")]
struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Free/wired resistance gap between terminal pairs.
    Gap(GapArgs),
    /// Resistance from a vertex to infinity.
    Transience(TransienceArgs),
    /// Barricades around an edge and the sum of inverse weak resistance diameters.
    Barricade(BarricadeArgs),
    /// Transient parts A, B with a separating finite-energy potential.
    Certify(CertifyArgs),
    /// List the built-in families.
    Families,
}

#[derive(Args, Debug, Clone, Serialize)]
struct Source {
    /// Built-in family, e.g. `ladder:unit` (see `ohd families`).
    #[arg(long, conflicts_with_all = ["family_file", "network"])]
    family: Option<String>,
    /// JSON family description.
    #[arg(long, conflicts_with = "network")]
    family_file: Option<PathBuf>,
    /// Network file with lines `u v r`.
    #[arg(long)]
    network: Option<PathBuf>,
    /// Exhaustion file with lines `n: v1 v2 ...` (with --network).
    #[arg(long, requires = "network")]
    exhaustion: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
struct Common {
    /// Largest truncation level (default depends on the family).
    #[arg(long)]
    nmax: Option<usize>,
    /// Convergence tolerance for limit sequences.
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    /// Values above this count as divergent.
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: f64,
    /// Output prefix; writes PREFIX.csv and PREFIX.json. Without it the JSON
    /// report goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for randomized checks.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug, Serialize)]
struct GapArgs {
    #[command(flatten)]
    source: Source,
    #[command(flatten)]
    common: Common,
    /// Terminal pair `p,q`; repeatable.
    #[arg(long, value_parser = parse_pair)]
    pair: Vec<(String, String)>,
    /// Also test every pair of vertices in V_1.
    #[arg(long)]
    sweep_v1: bool,
}

#[derive(Args, Debug, Serialize)]
struct TransienceArgs {
    #[command(flatten)]
    source: Source,
    #[command(flatten)]
    common: Common,
    /// Base vertex (default: the family's).
    #[arg(long)]
    vertex: Option<String>,
}

#[derive(Args, Debug, Serialize)]
struct BarricadeArgs {
    #[command(flatten)]
    source: Source,
    #[command(flatten)]
    common: Common,
    /// Number of barricades to look for.
    #[arg(long, default_value_t = 10)]
    count: usize,
    /// Key of the anchor edge (default: the family's).
    #[arg(long)]
    edge: Option<u64>,
    /// Pair whose gap witness supplies barricade voltages.
    #[arg(long, value_parser = parse_pair)]
    pair: Option<(String, String)>,
}

#[derive(Args, Debug, Serialize)]
struct CertifyArgs {
    #[command(flatten)]
    source: Source,
    #[command(flatten)]
    common: Common,
    /// Part name of the family (e.g. `side1`) or a vertex-set file.
    #[arg(long = "A")]
    a: String,
    /// Part name of the family (e.g. `side2`) or a vertex-set file.
    #[arg(long = "B")]
    b: String,
    /// Skip the gap test between the two anchors.
    #[arg(long)]
    no_cross_check: bool,
}

/// `p,q`, or `p;q` when names contain commas. An odd number of commas is
/// also split at the middle one, so `0,0,1,0` names two grid vertices.
fn parse_pair(s: &str) -> std::result::Result<(String, String), String> {
    let split = if let Some(split) = s.split_once(';') {
        Some(split)
    } else {
        let commas: Vec<usize> = s.match_indices(',').map(|(i, _)| i).collect();
        (commas.len() % 2 == 1).then(|| {
            let mid = commas[commas.len() / 2];
            (&s[..mid], &s[mid + 1..])
        })
    };
    match split {
        Some((p, q)) if !p.trim().is_empty() && !q.trim().is_empty() => {
            Ok((p.trim().to_string(), q.trim().to_string()))
        }
        _ => Err(format!("expected `p,q` or `p;q`, got `{s}`")),
    }
}

fn format_pair((p, q): &(String, String)) -> String {
    let sep = if p.contains(',') || q.contains(',') { ';' } else { ',' };
    format!("{p}{sep}{q}")
}

/// The analysed network: a family or a file, with whatever defaults it has.
struct Loaded {
    label: String,
    exhaustion: Arc<dyn Exhaustion>,
    family: Option<Family>,
}

impl Loaded {
    fn default_nmax(&self) -> usize {
        let name = self.family.as_ref().map(|f| f.name.as_str()).unwrap_or("");
        if name.starts_with("btree") || name == "twin-trees" {
            18
        } else if name.starts_with("grid") {
            40
        } else {
            200
        }
    }
}

fn load(source: &Source) -> Result<Loaded> {
    let family = if let Some(name) = &source.family {
        Some(Family::named(name)?)
    } else if let Some(path) = &source.family_file {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let spec: FamilySpec =
            serde_json::from_str(&text).with_context(|| format!("parsing family file {}", path.display()))?;
        Some(spec.build()?)
    } else {
        None
    };
    if let Some(f) = family {
        return Ok(Loaded {
            label: f.name.clone(),
            exhaustion: f.exhaustion.clone(),
            family: Some(f),
        });
    }
    let Some(network) = &source.network else {
        bail!("one of --family, --family-file or --network is required");
    };
    let ex = read_exhaustion(network, source.exhaustion.as_deref())
        .with_context(|| format!("loading {}", network.display()))?;
    Ok(Loaded {
        label: network.display().to_string(),
        exhaustion: Arc::new(ex),
        family: None,
    })
}

fn config(common: &Common, loaded: &Loaded) -> Result<(usize, LimitConfig)> {
    if !(common.tol > 0.0) {
        bail!("--tol must be positive");
    }
    if !(common.cap > 0.0) {
        bail!("--cap must be positive");
    }
    let nmax = common.nmax.unwrap_or_else(|| loaded.default_nmax());
    if nmax == 0 {
        bail!("--nmax must be at least 1");
    }
    Ok((
        nmax,
        LimitConfig {
            tol: common.tol,
            cap: common.cap,
            ..LimitConfig::default()
        },
    ))
}

#[derive(Serialize)]
struct Report<'a, C: Serialize, R: Serialize> {
    schema: &'static str,
    command: &'static str,
    source: &'a str,
    nmax: usize,
    tol: f64,
    cap: f64,
    seed: u64,
    config: &'a C,
    results: R,
}

fn emit<C: Serialize, R: Serialize, Row: Serialize>(
    common: &Common,
    command: &'static str,
    loaded: &Loaded,
    nmax: usize,
    args: &C,
    results: R,
    rows: &[Row],
) -> Result<()> {
    let report = Report {
        schema: SCHEMA,
        command,
        source: &loaded.label,
        nmax,
        tol: common.tol,
        cap: common.cap,
        seed: common.seed,
        config: args,
        results,
    };
    let json = serde_json::to_string_pretty(&report)?;
    match &common.out {
        Some(prefix) => {
            let csv_path = with_suffix(prefix, "csv");
            let mut w = csv::Writer::from_path(&csv_path).with_context(|| format!("writing {}", csv_path.display()))?;
            for row in rows {
                w.serialize(row)?;
            }
            w.flush()?;
            let json_path = with_suffix(prefix, "json");
            let mut f = File::create(&json_path).with_context(|| format!("writing {}", json_path.display()))?;
            writeln!(f, "{json}")?;
        }
        None => println!("{json}"),
    }
    Ok(())
}

fn with_suffix(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

#[derive(Serialize)]
struct GapCsvRow<'a> {
    p: &'a str,
    q: &'a str,
    n: usize,
    r_free: f64,
    r_wired: f64,
    gap: f64,
    energy: f64,
    residual: f64,
}

#[derive(Serialize)]
struct WitnessSummary {
    n: usize,
    energy: f64,
    spread: f64,
    interior_residual: f64,
    interior_vertices: usize,
    max_residual: f64,
}

#[derive(Serialize)]
struct GapResult {
    p: String,
    q: String,
    verdict: OhdEvidence,
    gap_last: Option<f64>,
    gap_extrapolated: f64,
    r_free: Option<f64>,
    r_wired: Option<f64>,
    free_verdict: ohd::currents::LimitVerdict,
    wired_verdict: ohd::currents::LimitVerdict,
    not_in_ohd_threshold: f64,
    in_ohd_threshold: f64,
    witness: WitnessSummary,
    free_current_non_elusive: NonElusiveReport,
}

fn cmd_gap(args: &GapArgs) -> Result<bool> {
    let loaded = load(&args.source)?;
    let (nmax, cfg) = config(&args.common, &loaded)?;
    let ex = &*loaded.exhaustion;
    let mut pairs = args.pair.clone();
    if args.sweep_v1 {
        for pair in ohd::ohd::pairs_in_level(ex, 1)? {
            if !pairs.contains(&pair) {
                pairs.push(pair);
            }
        }
    }
    if pairs.is_empty() {
        match &loaded.family {
            Some(f) => pairs.push(f.pair.clone()),
            None => bail!("--pair is required for network files"),
        }
    }
    let mut results = Vec::new();
    let mut rows = Vec::new();
    let mut decided = true;
    for (p, q) in &pairs {
        let v = gap_test(ex, p, q, nmax, &cfg).with_context(|| format!("gap test for {p},{q}"))?;
        decided &= v.verdict.is_decided();
        for r in &v.rows {
            rows.push(GapCsvRow {
                p,
                q,
                n: r.n,
                r_free: r.r_free,
                r_wired: r.r_wired,
                gap: r.gap,
                energy: r.energy,
                residual: r.residual,
            });
        }
        let non_elusive = free_current_check(ex, p, q, nmax, &cfg, args.common.seed)?;
        eprintln!("{p},{q}: {}", serde_json::to_string(&v.verdict)?.trim_matches('"'));
        results.push(GapResult {
            p: p.clone(),
            q: q.clone(),
            verdict: v.verdict,
            gap_last: v.gap.last(),
            gap_extrapolated: v.gap.extrapolated,
            r_free: v.free.last(),
            r_wired: v.wired.last(),
            free_verdict: v.free.verdict,
            wired_verdict: v.wired.verdict,
            not_in_ohd_threshold: GAP_FACTOR * cfg.tol,
            in_ohd_threshold: cfg.tol,
            witness: WitnessSummary {
                n: v.witness.n,
                energy: v.witness.energy,
                spread: v.witness.spread,
                interior_residual: v.witness.interior_residual,
                interior_vertices: v.witness.interior_vertices,
                max_residual: v.witness.max_residual,
            },
            free_current_non_elusive: non_elusive,
        });
    }
    emit(&args.common, "gap", &loaded, nmax, args, results, &rows)?;
    Ok(decided)
}

/// Non-elusiveness of the free current at `n`: exhaustion layers plus seeded random cuts.
fn free_current_check(
    ex: &dyn Exhaustion,
    p: &str,
    q: &str,
    n: usize,
    cfg: &LimitConfig,
    seed: u64,
) -> Result<NonElusiveReport> {
    let t = truncate_free(ex, n)?;
    let (pv, qv) = (t.network.require(p)?, t.network.require(q)?);
    let current = current_with_intensity(&t.network, pv, qv, 1.0, &cfg.solver)?;
    let mut layers = Vec::new();
    for k in 1..n {
        let shell = ex.shell(k)?;
        layers.push(
            shell
                .inner
                .iter()
                .filter_map(|v| t.network.vertex(&v.name))
                .collect(),
        );
    }
    let tol = DEFAULT_TOL * current.flow.max_abs().max(1.0);
    Ok(is_non_elusive(&t.network, &current.flow, pv, qv, tol, &layers, CUT_SAMPLES, seed)?)
}

#[derive(Serialize)]
struct TransienceCsvRow {
    n: usize,
    r: f64,
    nw_partial_sum: Option<f64>,
}

fn cmd_transience(args: &TransienceArgs) -> Result<bool> {
    let loaded = load(&args.source)?;
    let (nmax, cfg) = config(&args.common, &loaded)?;
    let ex = &*loaded.exhaustion;
    let vertex = match (&args.vertex, &loaded.family) {
        (Some(v), _) => v.clone(),
        (None, Some(f)) => f.vertex.clone(),
        (None, None) => bail!("--vertex is required for network files"),
    };
    let recurrence = loaded.family.as_ref().and_then(|f| f.recurrence.as_deref());
    let verdict = resistance_to_infinity(ex, &vertex, nmax, &cfg, recurrence)?;
    let levels: Vec<usize> = verdict.sequence.values.iter().map(|&(n, _)| n).collect();
    let nw = match nash_williams_bound(ex, &vertex, &levels) {
        Ok(nw) => Some(nw),
        Err(err) => {
            log::warn!("no Nash-Williams sum over these levels: {err}");
            None
        }
    };
    let rows: Vec<TransienceCsvRow> = verdict
        .sequence
        .values
        .iter()
        .enumerate()
        .map(|(i, &(n, r))| TransienceCsvRow {
            n,
            r,
            nw_partial_sum: nw.as_ref().map(|nw| nw.partial_sums[i]),
        })
        .collect();
    eprintln!("{vertex}: {}", serde_json::to_string(&verdict.verdict)?.trim_matches('"'));
    let decided = verdict.verdict != Transience::Undecided;
    #[derive(Serialize)]
    struct Out<'a> {
        verdict: &'a ohd::transience::TransienceVerdict,
        nash_williams_total: Option<f64>,
    }
    let out = Out {
        verdict: &verdict,
        nash_williams_total: nw.as_ref().map(|nw| nw.total()),
    };
    emit(&args.common, "transience", &loaded, nmax, args, out, &rows)?;
    Ok(decided)
}

#[derive(Serialize)]
struct BarricadeCsvRow {
    index: usize,
    wrd: f64,
    diam: usize,
    voltage: Option<f64>,
    partial_sum: f64,
}

fn cmd_barricade(args: &BarricadeArgs) -> Result<bool> {
    let loaded = load(&args.source)?;
    let (nmax, cfg) = config(&args.common, &loaded)?;
    let ex = &*loaded.exhaustion;
    let edge = match (args.edge, &loaded.family) {
        (Some(e), _) => e,
        (None, Some(f)) => f.anchor_edge,
        (None, None) => bail!("--edge is required for network files"),
    };
    let nmax = args.common.nmax.unwrap_or(nmax.min(args.count + 10));
    let pair = args.pair.clone().or_else(|| loaded.family.as_ref().map(|f| f.pair.clone()));
    let witness = match &pair {
        Some((p, q)) => Some(harmonic_witness(ex, p, q, nmax, &cfg)?),
        None => None,
    };
    let bound = loaded.family.as_ref().and_then(|f| f.wrd_bound.as_ref());
    let (search, report) = barricade_sweep(ex, edge, args.count, nmax, bound, witness.as_ref().map(|w| &w.potential))?;
    if search.truncated {
        log::warn!(
            "found {} of {} barricades inside V_{nmax}; raise --nmax for more",
            search.barricades.len(),
            args.count
        );
    }
    let rows: Vec<BarricadeCsvRow> = report
        .rows
        .iter()
        .map(|r| BarricadeCsvRow {
            index: r.index,
            wrd: r.wrd,
            diam: r.diameter,
            voltage: r.voltage,
            partial_sum: r.partial_sum,
        })
        .collect();
    eprintln!(
        "{} barricades, Σ 1/wRD = {}{}",
        report.rows.len(),
        report.partial_sum(),
        if report.certified { " (divergence certified)" } else { "" }
    );
    #[derive(Serialize)]
    struct Out<'a> {
        anchor_edge: u64,
        found: usize,
        truncated: bool,
        report: &'a SatzReport,
    }
    let out = Out {
        anchor_edge: edge,
        found: search.barricades.len(),
        truncated: search.truncated,
        report: &report,
    };
    emit(&args.common, "barricade", &loaded, nmax, args, out, &rows)?;
    Ok(report.certified)
}

fn part(loaded: &Loaded, spec: &str) -> Result<(VertexSelector, Option<String>)> {
    if let Some(f) = &loaded.family {
        if let Some(sel) = f.part(spec) {
            return Ok((sel.clone(), f.part_recurrence(spec)));
        }
    }
    let path = Path::new(spec);
    if path.exists() {
        return Ok((read_vertex_set(path)?, None));
    }
    bail!("`{spec}` is neither a part of the family nor a readable vertex-set file")
}

#[derive(Serialize)]
struct CertifyCsvRow {
    series: &'static str,
    n: usize,
    value: f64,
}

fn cmd_certify(args: &CertifyArgs) -> Result<bool> {
    let loaded = load(&args.source)?;
    let (nmax, cfg) = config(&args.common, &loaded)?;
    let (a, hint_a) = part(&loaded, &args.a)?;
    let (b, hint_b) = part(&loaded, &args.b)?;
    let cert = characterization_check(
        loaded.exhaustion.clone(),
        &a,
        &b,
        nmax,
        &cfg,
        [hint_a.as_deref(), hint_b.as_deref()],
        !args.no_cross_check,
    )?;
    let mut rows = Vec::new();
    for (series, values) in [
        ("contracted", &cert.contracted.values),
        ("transience_a", &cert.transience_a.sequence.values),
        ("transience_b", &cert.transience_b.sequence.values),
    ] {
        rows.extend(values.iter().map(|&(n, value)| CertifyCsvRow { series, n, value }));
    }
    eprintln!("{}", serde_json::to_string(&cert.verdict)?.trim_matches('"'));
    let decided = cert.verdict != CertificateVerdict::Undecided;
    emit(&args.common, "certify", &loaded, nmax, args, &cert, &rows)?;
    Ok(decided)
}

fn cmd_families() -> Result<bool> {
    let names = [
        "ladder:unit",
        "ladder:geometric",
        "ladder:one-unit-side",
        "ladder:summable",
        "ray:unit",
        "btree:unit",
        "grid2:unit",
        "n1",
        "n2",
        "twin-trees",
        "twin-rays",
    ];
    for name in names {
        let f = Family::named(name)?;
        let parts: Vec<&str> = f.parts.iter().map(|(n, _)| n.as_str()).collect();
        println!(
            "{name:22} pair {}  vertex {}  parts [{}]  anchor edge {}",
            format_pair(&f.pair),
            f.vertex,
            parts.join(", "),
            if f.anchor_edge == BRIDGE_KEY { "bridge".to_string() } else { f.anchor_edge.to_string() }
        );
    }
    Ok(true)
}

fn run(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Gap(a) => cmd_gap(a),
        Command::Transience(a) => cmd_transience(a),
        Command::Barricade(a) => cmd_barricade(a),
        Command::Certify(a) => cmd_certify(a),
        Command::Families => cmd_families(),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return match err.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    if let Some(jobs) = cli.jobs {
        if let Err(err) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: {err}");
            return ExitCode::from(1);
        }
    }
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
