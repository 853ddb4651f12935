use clap::{Args, Parser, Subcommand};
use conefront::coneharm::{ConePartition, Exponent, Flavor};
use conefront::fields::io::{read_field, write_field};
use conefront::fields::{synth, GeneratorSpec, Grid, SampledField};
use conefront::harness::{render_wf_svg, run_case, CaseId, CaseReport, CaseSpec, PlotSource, DEFAULT_SEED};
use conefront::pdo::apply_op;
use conefront::symcalc::{char_set, CharSetConfig, SymbolSpec};
use conefront::wavefront::{wavefront_set, DetectorConfig};
use conefront::weights::WeightSpec;
use conefront::{Error, Result};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "conefront", version, about = "Wave-front sets of sampled fields and pseudo-differential operators")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Estimate the wave-front set of a field.
    Analyze(AnalyzeArgs),
    /// Apply Op_t(a) to a field.
    Op(OpArgs),
    /// Estimate the characteristic set of a symbol.
    Charset(CharsetArgs),
    /// Run verification cases.
    Verify(VerifyArgs),
    /// Sample a generator field.
    Synth(SynthArgs),
}

#[derive(Args)]
struct Detector {
    /// Window radius; a tenth of the shortest grid side by default.
    #[arg(long)]
    radius: Option<f64>,
    /// Number of cones in d = 2 (d = 1 always uses the two half-lines).
    #[arg(long, default_value_t = 8)]
    cones: usize,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    field: PathBuf,
    /// Weight spec: a JSON file or inline JSON.
    #[arg(long)]
    weight: String,
    #[arg(long, default_value = "inf")]
    q: String,
    #[arg(long, default_value = "inf")]
    p: String,
    #[arg(long, default_value = "FL")]
    flavor: String,
    #[command(flatten)]
    detector: Detector,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Args)]
struct OpArgs {
    #[arg(long)]
    field: PathBuf,
    /// Symbol spec: a JSON file or inline JSON.
    #[arg(long)]
    symbol: String,
    #[arg(long, default_value_t = 0.0)]
    t: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CharsetArgs {
    #[arg(long)]
    symbol: String,
    #[arg(long)]
    weight: String,
    /// Field whose grid fixes centres and the probed frequency range.
    #[arg(long, conflicts_with = "grid")]
    field: Option<PathBuf>,
    /// Centred grid "d,n,h" instead of a field.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    c_min: Option<f64>,
    #[command(flatten)]
    detector: Detector,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, required_unless_present = "all")]
    case: Option<String>,
    #[arg(long, conflicts_with = "case")]
    all: bool,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Grid refinement: 2^refine times more points on the same domain.
    #[arg(long, default_value_t = 0)]
    refine: u32,
    /// Report file for one case; a directory for --all.
    #[arg(long)]
    out: Option<PathBuf>,
    /// SVG of the case's representative estimate (one case only).
    #[arg(long, conflicts_with = "all")]
    plot: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// Generator spec as JSON, e.g. '{"gen":"delta","x0":[0.0]}'.
    #[arg(long)]
    gen: String,
    /// Centred grid "d,n,h".
    #[arg(long)]
    grid: String,
    #[arg(long)]
    out: PathBuf,
}

fn json_arg(s: &str) -> Result<(String, Option<PathBuf>)> {
    if s.trim_start().starts_with('{') {
        return Ok((s.to_string(), None));
    }
    let p = PathBuf::from(s);
    let base = p.parent().map(Path::to_path_buf);
    Ok((std::fs::read_to_string(&p)?, base))
}

fn weight_arg(s: &str) -> Result<WeightSpec> {
    WeightSpec::from_json(&json_arg(s)?.0)
}

fn symbol_arg(s: &str) -> Result<SymbolSpec> {
    let (src, base) = json_arg(s)?;
    SymbolSpec::from_json_at(&src, base.as_deref())
}

fn grid_arg(s: &str) -> Result<Grid> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let bad = || Error::InvalidConfig(format!("grid must be \"d,n,h\", got '{s}'"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let d: usize = parts[0].parse().map_err(|_| bad())?;
    let n: usize = parts[1].parse().map_err(|_| bad())?;
    let h: f64 = parts[2].parse().map_err(|_| bad())?;
    if !(1..=2).contains(&d) || n < 2 || !(h > 0.0) {
        return Err(bad());
    }
    Ok(Grid::centered(d, n, h))
}

fn flavor_arg(s: &str) -> Result<Flavor> {
    match s.to_ascii_uppercase().as_str() {
        "FL" => Ok(Flavor::Fl),
        "M" => Ok(Flavor::M),
        "W" => Ok(Flavor::W),
        _ => Err(Error::InvalidConfig(format!("flavor must be FL, M or W, got '{s}'"))),
    }
}

fn detector(g: &Grid, args: &Detector) -> Result<DetectorConfig> {
    let side = (0..g.dim()).map(|a| g.upper(a) - g.origin[a]).fold(f64::INFINITY, f64::min);
    let r = args.radius.unwrap_or(side / 10.0);
    let mut cfg = DetectorConfig::new(g.dim(), r);
    if g.dim() == 2 {
        cfg = cfg.with_partition(ConePartition::new(2, args.cones, 1.2)?);
    }
    Ok(cfg)
}

fn analyze(a: &AnalyzeArgs) -> Result<bool> {
    let f = read_field(&a.field)?;
    let w = weight_arg(&a.weight)?;
    let mut cfg = detector(&f.grid, &a.detector)?;
    cfg.p = Exponent::parse(&a.p)?;
    let est = wavefront_set(&f, &w, Exponent::parse(&a.q)?, &cfg, flavor_arg(&a.flavor)?)?;
    std::fs::write(&a.out, est.to_json())?;
    if let Some(p) = &a.plot {
        render_wf_svg(PlotSource::Estimate(&est), p)?;
    }
    eprintln!("{} singular (centre, sector) pairs", est.singular().len());
    Ok(true)
}

fn op(a: &OpArgs) -> Result<bool> {
    let f = read_field(&a.field)?;
    let g = apply_op(&symbol_arg(&a.symbol)?, &f, a.t)?;
    write_field(&a.out, &g)?;
    Ok(true)
}

fn charset(a: &CharsetArgs) -> Result<bool> {
    let g = match (&a.field, &a.grid) {
        (Some(p), _) => read_field(p)?.grid,
        (None, Some(s)) => grid_arg(s)?,
        (None, None) => return Err(Error::InvalidConfig("charset needs --field or --grid".into())),
    };
    let cfg = detector(&g, &a.detector)?;
    let mut ccfg = CharSetConfig::for_grid(&g, cfg.radius());
    if let Some(c) = a.c_min {
        ccfg = ccfg.with_c_min(c);
    }
    let est = char_set(
        &symbol_arg(&a.symbol)?,
        &weight_arg(&a.weight)?,
        &cfg.partition,
        &cfg.centers_for(&g)?,
        &ccfg,
    )?;
    std::fs::write(&a.out, serde_json::to_string_pretty(&est)?)?;
    eprintln!("{} characteristic (centre, sector) pairs", est.characteristic().len());
    Ok(true)
}

fn print_report(r: &CaseReport) {
    println!("{:<22} {}", r.case.name(), if r.pass { "PASS" } else { "FAIL" });
    for c in r.checks.iter().filter(|c| !c.pass) {
        println!("    failed: {}", c.name);
    }
}

fn verify(a: &VerifyArgs) -> Result<bool> {
    let ids = if a.all {
        CaseId::ALL.to_vec()
    } else {
        vec![CaseId::parse(a.case.as_deref().unwrap_or_default())?]
    };
    if a.all {
        if let Some(dir) = &a.out {
            std::fs::create_dir_all(dir)?;
        }
    }
    let mut all_pass = true;
    for id in ids {
        let spec = CaseSpec {
            id,
            seed: a.seed,
            refine: a.refine,
        };
        let r = run_case(&spec)?;
        print_report(&r);
        all_pass &= r.pass;
        if let Some(out) = &a.out {
            let path = if a.all { out.join(format!("{}.json", id.name())) } else { out.clone() };
            std::fs::write(path, r.to_json())?;
        }
        if let (Some(p), Some(est)) = (&a.plot, &r.plot) {
            render_wf_svg(PlotSource::Estimate(est), p)?;
        }
    }
    Ok(all_pass)
}

fn synth_cmd(a: &SynthArgs) -> Result<bool> {
    let gen: GeneratorSpec = serde_json::from_str(&a.gen)?;
    let f: SampledField = synth(&gen, &grid_arg(&a.grid)?)?;
    write_field(&a.out, &f)?;
    Ok(true)
}

fn init_threads() {
    if let Some(n) = std::env::var("CONEFRONT_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn main() -> ExitCode {
    init_threads();
    let cli = Cli::parse();
    let res = match &cli.cmd {
        Cmd::Analyze(a) => analyze(a),
        Cmd::Op(a) => op(a),
        Cmd::Charset(a) => charset(a),
        Cmd::Verify(a) => verify(a),
        Cmd::Synth(a) => synth_cmd(a),
    };
    match res {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
