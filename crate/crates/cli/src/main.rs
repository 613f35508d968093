//! `foliated-link`: build codes, foliate them into repeater chains, decode
//! erasures, run Monte Carlo sweeps and fit/optimize/plot the results.

mod plot;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use foliated_link::analysis::{default_n_max, optimize_repeaters};
use foliated_link::codes::{gb_gcd, generalized_bicycle, load_code, save_code, steane, toric, CssCode};
use foliated_link::decoding::{decode_exact, decode_greedy, DecoderKind, ErasurePattern};
use foliated_link::foliation::{foliate, ChainDump, SubgraphLabel};
use foliated_link::gf2::Gf2Poly;
use foliated_link::io::{
    alpha_grids, config_hash, fit_grid_records, read_csv, to_json_pretty, write_atomic, write_csv, AlphaRecord, CellKey,
    GridRecord, OptRecord, ALPHA_HEADER, FORMAT_VERSION, GRID_HEADER, OPT_HEADER,
};
use foliated_link::montecarlo::{estimate_etr, spacing_for_transmission, LossModel, DEFAULT_ALPHA0_DB_PER_KM};
use serde::Serialize;
use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

pub const THREADS_ENV: &str = "FOLIATED_LINK_THREADS";

#[derive(Parser, Debug)]
#[command(name = "foliated-link", version, about = "All-photonic one-way quantum repeater simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build or validate a CSS code and write it as JSON.
    Code(CodeArgs),
    /// Foliate a code into an N-hop chain and check its syndrome subgraphs.
    Foliate(FoliateArgs),
    /// Decide which logicals survive a given set of lost qubits.
    Decode(DecodeArgs),
    /// Estimate the effective transmission rate of one chain.
    Simulate(SimulateArgs),
    /// Simulate every (code, eta_r, L0, N) cell of a grid into a CSV file.
    Sweep(SweepArgs),
    /// Fit alpha_eff per spacing from a sweep CSV.
    Fit(FitArgs),
    /// Pick the cheapest repeater count per distance from an alpha CSV.
    Optimize(OptimizeArgs),
    /// Render a CSV as an SVG line plot.
    Plot(PlotArgs),
}

#[derive(Args, Debug)]
struct CodeArgs {
    #[command(subcommand)]
    kind: CodeKind,
    /// Output file for the code JSON.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Drop linearly dependent check rows before saving.
    #[arg(long, global = true)]
    row_reduce: bool,
    /// Override the code name.
    #[arg(long, global = true)]
    name: Option<String>,
    /// Distance recorded as metadata; never verified.
    #[arg(long, global = true)]
    claimed_distance: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum CodeKind {
    /// [[7,1,3]] Steane code.
    Steane,
    /// Toric code on a d x d torus.
    Toric {
        #[arg(long)]
        d: usize,
    },
    /// Generalized bicycle code from two polynomials given as exponent lists.
    Gb {
        #[arg(long)]
        ell: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        a: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        b: Vec<usize>,
    },
    /// Re-validate an existing code file.
    File {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

#[derive(Args, Debug)]
struct FoliateArgs {
    #[arg(long)]
    code: PathBuf,
    #[arg(long)]
    hops: usize,
    /// Write the qubit table, stabilizer rows and logical rows as JSON.
    #[arg(long, alias = "out")]
    dump: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DecodeArgs {
    /// Chain file written by `foliate --dump`.
    #[arg(long)]
    chain: PathBuf,
    /// Comma-separated global qubit indices that were lost.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    erasure: Vec<usize>,
    #[arg(long, default_value = "exact")]
    decoder: DecoderKind,
}

#[derive(Args, Debug, Clone)]
struct LossArgs {
    /// Fiber attenuation in dB/km.
    #[arg(long, default_value_t = DEFAULT_ALPHA0_DB_PER_KM)]
    alpha0: f64,
    #[arg(long, default_value = "exact")]
    decoder: DecoderKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Profile {
    /// 5 x 10^5 trials per cell.
    Standard,
    /// 2 x 10^6 trials per cell.
    High,
}

impl Profile {
    fn trials(self) -> u64 {
        match self {
            Profile::Standard => 500_000,
            Profile::High => 2_000_000,
        }
    }
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    code: PathBuf,
    #[arg(long)]
    hops: usize,
    #[arg(long)]
    eta_r: f64,
    #[arg(long)]
    l0_km: f64,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long, value_enum, default_value = "standard")]
    profile: Profile,
    #[command(flatten)]
    loss: LossArgs,
    /// Output JSON file; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Code files; repeat the flag for several codes.
    #[arg(long, required = true)]
    code: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',', required = true)]
    eta_r: Vec<f64>,
    /// Repeater spacings in km.
    #[arg(long, value_delimiter = ',', num_args = 0.., conflicts_with = "loss")]
    l0_km: Vec<f64>,
    /// Fiber loss per spacing, 1 - 10^(-alpha0 L0 / 10), converted to L0.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    loss: Vec<f64>,
    /// Hop counts: a list `1,2,5` or an inclusive range `2-12`.
    #[arg(long, value_parser = parse_hops, default_value = "1")]
    hops: HopList,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long, value_enum, default_value = "standard")]
    profile: Profile,
    #[command(flatten)]
    loss_args: LossArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct FitArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct OptimizeArgs {
    /// Alpha CSV written by `fit`.
    #[arg(long)]
    grid: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    distance_km: Vec<f64>,
    /// Largest repeater count scanned; defaults to ceil(2 L).
    #[arg(long)]
    n_max: Option<usize>,
    /// Code file supplying n/k for the cost; without it n/k = 1.
    #[arg(long)]
    code: Option<PathBuf>,
    /// Select the grid rows of this code name.
    #[arg(long)]
    code_name: Option<String>,
    /// Select the grid rows of this repeater efficiency.
    #[arg(long)]
    eta_r: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum PlotKind {
    /// eta_eff against single-photon loss, from a sweep CSV.
    LossTolerance,
    /// alpha_eff against repeater spacing, from an alpha CSV.
    Attenuation,
    /// Optimized eta_eff against distance, from an optimize CSV.
    Optimal,
}

#[derive(Args, Debug)]
struct PlotArgs {
    #[arg(long, value_enum)]
    kind: PlotKind,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct HopList(Vec<usize>);

fn parse_hops(s: &str) -> std::result::Result<HopList, String> {
    let bad = |_| format!("invalid hop list {s:?}");
    let hops: Vec<usize> = if let Some((a, b)) = s.split_once('-') {
        let (a, b): (usize, usize) = (a.trim().parse().map_err(bad)?, b.trim().parse().map_err(bad)?);
        if a > b {
            return Err(format!("empty hop range {s:?}"));
        }
        (a..=b).collect()
    } else {
        s.split(',')
            .map(|t| t.trim().parse().map_err(bad))
            .collect::<std::result::Result<_, _>>()?
    };
    if hops.contains(&0) {
        return Err("hop counts must be at least 1".into());
    }
    Ok(HopList(hops))
}

#[derive(Debug, Serialize)]
struct SubgraphDecode {
    erased: Vec<usize>,
    #[serde(flatten)]
    outcome: foliated_link::decoding::DecodeOutcome,
}

#[derive(Debug, Serialize)]
struct DecodeReport {
    decoder: DecoderKind,
    primal: SubgraphDecode,
    dual: SubgraphDecode,
    success: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match configure_threads().and_then(|_| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| anyhow!("{THREADS_ENV} must be a positive integer, got {value:?}"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Code(args) => cmd_code(args),
        Command::Foliate(args) => cmd_foliate(args),
        Command::Decode(args) => cmd_decode(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Fit(args) => cmd_fit(args),
        Command::Optimize(args) => cmd_optimize(args),
        Command::Plot(args) => cmd_plot(args),
    }
}

fn load(path: &Path) -> Result<CssCode> {
    load_code(path).with_context(|| format!("loading code {}", path.display()))
}

fn cmd_code(args: CodeArgs) -> Result<()> {
    let mut gcd = None;
    let mut code = match args.kind {
        CodeKind::Steane => steane(),
        CodeKind::Toric { d } => toric(d)?,
        CodeKind::Gb { ell, a, b } => {
            let (a, b) = (Gf2Poly::from_exponents(&a), Gf2Poly::from_exponents(&b));
            gcd = Some(gb_gcd(ell, &a, &b)?);
            generalized_bicycle(ell, &a, &b)?
        }
        CodeKind::File { input } => load(&input)?,
    };
    if args.row_reduce {
        code = code.row_reduced()?;
    }
    if let Some(name) = args.name {
        code.name = name;
    }
    if args.claimed_distance.is_some() {
        code.claimed_distance = args.claimed_distance;
    }
    println!(
        "{}: n={} k={} rank(H_X)={} rank(H_Z)={} checks={}+{}",
        code.name,
        code.n,
        code.k,
        code.rank_x(),
        code.rank_z(),
        code.h_x.rows(),
        code.h_z.rows()
    );
    if let Some(g) = gcd {
        println!("gcd(a, b, x^ell + 1) = {g}");
    }
    if let Some(out) = args.out {
        save_code(&code, &out)?;
    }
    Ok(())
}

fn cmd_foliate(args: FoliateArgs) -> Result<()> {
    let code = load(&args.code)?;
    let chain = foliate(&code, args.hops)?;
    let dump = chain.dump()?;
    let report = dump.report;
    println!(
        "{} N={}: {} qubits, primal {} qubits / {} stabilizers, dual {} qubits / {} stabilizers, {} channel qubits",
        code.name,
        args.hops,
        report.total_qubits,
        report.primal_qubits,
        report.primal_stabilizers,
        report.dual_qubits,
        report.dual_stabilizers,
        report.channel_qubits
    );
    if let Some(path) = args.dump {
        write_atomic(&path, to_json_pretty(&dump)?.as_bytes())?;
    }
    Ok(())
}

fn cmd_decode(args: DecodeArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.chain).with_context(|| format!("reading {}", args.chain.display()))?;
    let dump: ChainDump = serde_json::from_str(&text)?;
    let chain = dump.rebuild()?;
    let mut positions = [Vec::new(), Vec::new()];
    for &g in &args.erasure {
        let (label, pos) = chain
            .locate(g)
            .ok_or_else(|| anyhow!("qubit {g} out of range (chain has {} qubits)", chain.total_qubits()))?;
        positions[(label == SubgraphLabel::Dual) as usize].push(pos);
    }
    let mut parts = Vec::with_capacity(2);
    for (sub, pos) in [&chain.primal, &chain.dual].into_iter().zip(positions) {
        let pattern = ErasurePattern::from_positions(sub, pos)?;
        let outcome = match args.decoder {
            DecoderKind::Exact => decode_exact(sub, &pattern)?,
            DecoderKind::Greedy => decode_greedy(sub, &pattern)?,
        };
        parts.push(SubgraphDecode {
            erased: pattern.positions().into_iter().map(|p| sub.qubits[p].global).collect(),
            outcome,
        });
    }
    let dual = parts.pop().unwrap();
    let primal = parts.pop().unwrap();
    let report = DecodeReport {
        decoder: args.decoder,
        success: primal.outcome.success && dual.outcome.success,
        primal,
        dual,
    };
    print!("{}", to_json_pretty(&report)?);
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let code = load(&args.code)?;
    let chain = foliate(&code, args.hops)?;
    let model = LossModel::with_alpha0(args.loss.alpha0, args.eta_r, args.l0_km)?;
    let trials = args.trials.unwrap_or(args.profile.trials());
    let result = estimate_etr(&chain, &model, trials, args.loss.seed, args.loss.decoder)?;
    let text = to_json_pretty(&result)?;
    match args.out {
        Some(out) => write_atomic(&out, text.as_bytes())?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let alpha0 = args.loss_args.alpha0;
    let spacings: Vec<f64> = if args.loss.is_empty() {
        args.l0_km.clone()
    } else {
        args.loss
            .iter()
            .map(|&p| {
                if !(0.0..1.0).contains(&p) {
                    bail!("fiber loss must lie in [0, 1), got {p}");
                }
                Ok(if p == 0.0 { 0.0 } else { spacing_for_transmission(1.0 - p, alpha0) })
            })
            .collect::<Result<_>>()?
    };
    let codes = args.code.iter().map(|p| load(p)).collect::<Result<Vec<_>>>()?;
    let trials = args.trials.unwrap_or(args.profile.trials());
    let seed = args.loss_args.seed;
    let decoder = args.loss_args.decoder;
    for &eta_r in &args.eta_r {
        for &l0 in &spacings {
            LossModel::with_alpha0(alpha0, eta_r, l0)?;
        }
    }

    let config = format!(
        "codes={:?} eta_r={:?} l0_km={:?} hops={:?} trials={trials} seed={seed} decoder={decoder} alpha0={alpha0}",
        codes.iter().map(|c| &c.name).collect::<Vec<_>>(),
        args.eta_r,
        spacings,
        args.hops.0
    );
    let hash = config_hash(&config);
    let metadata = [("version", FORMAT_VERSION.to_string()), ("config", hash.clone())];

    let mut existing: Vec<GridRecord> = if args.out.exists() {
        read_csv(&args.out).with_context(|| format!("resuming from {}", args.out.display()))?
    } else {
        Vec::new()
    };
    if !existing.is_empty() {
        log::info!("resuming: {} cells already in {}", existing.len(), args.out.display());
    }
    let mut done: HashMap<CellKey, usize> = existing.iter().enumerate().map(|(i, r)| (r.key(), i)).collect();

    let total = codes.len() * args.eta_r.len() * spacings.len() * args.hops.0.len();
    let mut computed = 0usize;
    for code in &codes {
        let chains = args.hops.0.iter().map(|&h| foliate(code, h)).collect::<Result<Vec<_>, _>>()?;
        for &eta_r in &args.eta_r {
            for &l0 in &spacings {
                let model = LossModel::with_alpha0(alpha0, eta_r, l0)?;
                for chain in &chains {
                    let key = CellKey::new(&code.name, eta_r, l0, chain.hops);
                    if done.contains_key(&key) {
                        continue;
                    }
                    let r = estimate_etr(chain, &model, trials, seed, decoder)?;
                    done.insert(key, existing.len());
                    existing.push(GridRecord::from_sim(&r));
                    computed += 1;
                    log::info!("cell {computed}: {} eta_r={eta_r} L0={l0} N={} eta_eff={}", code.name, chain.hops, r.eta_eff);
                    write_csv(&args.out, &existing, &GRID_HEADER, &metadata)?;
                }
            }
        }
    }
    // Header-only output for an empty grid, and fresh metadata on resume.
    write_csv(&args.out, &existing, &GRID_HEADER, &metadata)?;
    println!(
        "{} cells ({computed} simulated, {} reused) -> {}",
        total,
        total - computed,
        args.out.display()
    );
    Ok(())
}

fn cmd_fit(args: FitArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let records: Vec<GridRecord> = foliated_link::io::parse_csv(&text)?;
    let alpha = fit_grid_records(&records)?;
    for r in &alpha {
        println!(
            "{} eta_r={} L0={} km: alpha_eff={:.6} dB/km (rms {:.2e})",
            r.code, r.eta_r, r.l0_km, r.alpha_eff_db_per_km, r.rms_residual
        );
    }
    let metadata = [("version", FORMAT_VERSION.to_string()), ("source", config_hash(&text))];
    write_csv(&args.out, &alpha, &ALPHA_HEADER, &metadata)?;
    Ok(())
}

fn cmd_optimize(args: OptimizeArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.grid).with_context(|| format!("reading {}", args.grid.display()))?;
    let records: Vec<AlphaRecord> = foliated_link::io::parse_csv(&text)?;
    let grids: Vec<_> = alpha_grids(&records)?
        .into_iter()
        .filter(|g| args.code_name.as_ref().is_none_or(|c| &g.code == c))
        .filter(|g| args.eta_r.is_none_or(|e| g.eta_r == e))
        .collect();
    let grid = match grids.as_slice() {
        [g] => g,
        [] => bail!("no alpha grid matches the selection"),
        many => bail!(
            "{} alpha grids match; select one with --code-name and --eta-r ({})",
            many.len(),
            many.iter()
                .map(|g| format!("{}@{}", g.code, g.eta_r))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    };
    let (n, k) = match &args.code {
        Some(path) => {
            let code = load(path)?;
            (code.n, code.k)
        }
        None => (1, 1),
    };
    let mut out = Vec::with_capacity(args.distance_km.len());
    for &l in &args.distance_km {
        let n_max = args.n_max.unwrap_or_else(|| default_n_max(l));
        let r = optimize_repeaters(grid, l, n_max, n, k).with_context(|| format!("at L = {l} km"))?;
        println!(
            "L={l} km: N_opt={} L0={:.4} km eta_eff={:.6} cost={:.6e}",
            r.n_opt, r.l0_km, r.eta_eff, r.cost
        );
        out.push(OptRecord {
            distance_km: r.distance_km,
            n_opt: r.n_opt,
            l0_km: r.l0_km,
            eta_eff: r.eta_eff,
            cost: r.cost,
        });
    }
    let metadata = [
        ("version", FORMAT_VERSION.to_string()),
        ("grid", format!("{}@{}", grid.code, grid.eta_r)),
        ("source", config_hash(&text)),
    ];
    write_csv(&args.out, &out, &OPT_HEADER, &metadata)?;
    Ok(())
}

fn cmd_plot(args: PlotArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let svg = match args.kind {
        PlotKind::LossTolerance => plot::loss_tolerance(&foliated_link::io::parse_csv(&text)?),
        PlotKind::Attenuation => plot::attenuation(&foliated_link::io::parse_csv(&text)?),
        PlotKind::Optimal => plot::optimal(&foliated_link::io::parse_csv(&text)?),
    };
    write_atomic(&args.out, svg.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn hop_lists() {
        assert_eq!(parse_hops("2-5").unwrap(), HopList(vec![2, 3, 4, 5]));
        assert_eq!(parse_hops("1,3, 7").unwrap(), HopList(vec![1, 3, 7]));
        assert_eq!(parse_hops("4").unwrap(), HopList(vec![4]));
        assert!(parse_hops("5-2").is_err());
        assert!(parse_hops("0-3").is_err());
        assert!(parse_hops("a").is_err());
    }

    fn cli(args: &[&str]) -> Result<()> {
        let mut argv = vec!["foliated-link"];
        argv.extend_from_slice(args);
        run(Cli::try_parse_from(argv)?)
    }

    fn path(dir: &tempfile::TempDir, name: &str) -> String {
        dir.path().join(name).to_str().unwrap().to_string()
    }

    #[test]
    fn argument_errors_exit_with_two() {
        for argv in [
            vec!["foliated-link"],
            vec!["foliated-link", "simulate", "--code", "x.json"],
            vec!["foliated-link", "frobnicate"],
            vec!["foliated-link", "decode", "--chain", "c.json", "--decoder", "fast"],
            vec!["foliated-link", "sweep", "--code", "a", "--eta-r", "1", "--hops", "3-1", "--out", "g.csv"],
        ] {
            let err = Cli::try_parse_from(&argv).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{argv:?}");
        }
    }

    #[test]
    fn domain_errors_are_reported() {
        let dir = tempfile::tempdir().unwrap();
        let code = path(&dir, "s.json");
        cli(&["code", "steane", "--out", &code]).unwrap();
        let sim = |eta: &str| cli(&["simulate", "--code", &code, "--hops", "1", "--eta-r", eta, "--l0-km", "1", "--trials", "10"]);
        assert!(sim("1.5").unwrap_err().to_string().contains("eta_r"));
        assert!(sim("0").is_err());
        assert!(cli(&["code", "toric", "--d", "1"]).is_err());
        assert!(cli(&["code", "gb", "--ell", "4", "--a", "0", "--b", "0"]).is_err());
        assert!(cli(&["simulate", "--code", &path(&dir, "missing.json"), "--hops", "1", "--eta-r", "1", "--l0-km", "1"]).is_err());

        let chain = path(&dir, "chain.json");
        cli(&["foliate", "--code", &code, "--hops", "1", "--dump", &chain]).unwrap();
        assert!(cli(&["decode", "--chain", &chain, "--erasure", "30"]).is_err());
        cli(&["decode", "--chain", &chain, "--erasure", "0,1,29", "--decoder", "greedy"]).unwrap();
        cli(&["decode", "--chain", &chain]).unwrap();
        // A hand-edited chain no longer matches the rebuilt one.
        let text = std::fs::read_to_string(&chain).unwrap().replacen("\"channel\"", "\"internal\"", 1);
        std::fs::write(&chain, text).unwrap();
        assert!(cli(&["decode", "--chain", &chain, "--erasure", "0"]).is_err());
    }

    #[test]
    fn code_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let out = path(&dir, "gb48.json");
        cli(&["code", "gb", "--ell", "24", "--a", "0,2,8,15", "--b", "0,2,12,17", "--claimed-distance", "8", "--out", &out]).unwrap();
        let code = load_code(&out).unwrap();
        assert_eq!((code.n, code.k, code.claimed_distance), (48, 6, Some(8)));
        let again = path(&dir, "again.json");
        cli(&["code", "file", "--in", &out, "--out", &again]).unwrap();
        assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&again).unwrap());

        let reduced = path(&dir, "t3.json");
        cli(&["code", "toric", "--d", "3", "--row-reduce", "--name", "t3r", "--out", &reduced]).unwrap();
        let t = load_code(&reduced).unwrap();
        assert_eq!((t.name.as_str(), t.h_x.rows(), t.k), ("t3r", 8, 2));
    }

    #[test]
    fn simulate_output_round_trips_and_is_stable() {
        let dir = tempfile::tempdir().unwrap();
        let code = path(&dir, "s.json");
        cli(&["code", "steane", "--out", &code]).unwrap();
        let args = |out: &str| {
            vec![
                "simulate", "--code", &code, "--hops", "2", "--eta-r", "0.95", "--l0-km", "3", "--trials", "5000",
                "--seed", "3", "--decoder", "greedy", "--out", out,
            ]
            .into_iter()
            .map(String::from)
            .collect::<Vec<_>>()
        };
        let (a, b) = (path(&dir, "a.json"), path(&dir, "b.json"));
        cli(&args(&a).iter().map(String::as_str).collect::<Vec<_>>()).unwrap();
        cli(&args(&b).iter().map(String::as_str).collect::<Vec<_>>()).unwrap();
        let text = std::fs::read_to_string(&a).unwrap();
        assert_eq!(text, std::fs::read_to_string(&b).unwrap());
        let r: foliated_link::montecarlo::SimResult = serde_json::from_str(&text).unwrap();
        assert_eq!(r.decoder, DecoderKind::Greedy);
        assert_eq!(r.greedy_agreement, Some(1.0));
        assert_eq!(to_json_pretty(&r).unwrap(), text);
    }

    #[test]
    fn steane_loss_sweep_matches_closed_form() {
        let dir = tempfile::tempdir().unwrap();
        let code = path(&dir, "s.json");
        let grid = path(&dir, "grid.csv");
        cli(&["code", "steane", "--out", &code]).unwrap();
        let sweep = [
            "sweep", "--code", &code, "--eta-r", "1", "--loss", "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9", "--hops", "1",
            "--trials", "20000", "--seed", "5", "--out", &grid,
        ];
        cli(&sweep).unwrap();
        let first = std::fs::read_to_string(&grid).unwrap();
        let rows: Vec<GridRecord> = foliated_link::io::parse_csv(&first).unwrap();
        assert_eq!(rows.len(), 10);
        for r in &rows {
            let eta = 10f64.powf(-r.alpha0_db_per_km * r.l0_km / 10.0);
            let expect = foliated_link::montecarlo::steane_single_hop_etr(eta);
            assert!((r.eta_eff - expect).abs() <= 3.0 * r.stderr + 1e-12, "{r:?} vs {expect}");
        }
        // Resuming recomputes nothing and reproduces the file.
        cli(&sweep).unwrap();
        assert_eq!(std::fs::read_to_string(&grid).unwrap(), first);
        cli(&["plot", "--kind", "loss-tolerance", "--in", &grid, "--out", &path(&dir, "f3.svg")]).unwrap();
        let svg = std::fs::read_to_string(dir.path().join("f3.svg")).unwrap();
        assert!(svg.contains("direct") && svg.matches("<circle").count() == 10);
    }

    #[test]
    fn empty_sweep_writes_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let code = path(&dir, "s.json");
        let grid = path(&dir, "grid.csv");
        cli(&["code", "steane", "--out", &code]).unwrap();
        cli(&["sweep", "--code", &code, "--eta-r", "1", "--l0-km", "--out", &grid]).unwrap();
        let text = std::fs::read_to_string(&grid).unwrap();
        let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(body, vec![GRID_HEADER.join(",")]);
        assert!(text.starts_with("# version: foliated-link"));
    }

    #[test]
    fn fit_optimize_plot_pipeline() {
        let dir = tempfile::tempdir().unwrap();
        let code = path(&dir, "s.json");
        let (grid, alpha, opt) = (path(&dir, "grid.csv"), path(&dir, "alpha.csv"), path(&dir, "opt.csv"));
        cli(&["code", "steane", "--out", &code]).unwrap();
        cli(&[
            "sweep", "--code", &code, "--eta-r", "0.95", "--l0-km", "1,2,3", "--hops", "2-5", "--trials", "4000",
            "--out", &grid,
        ])
        .unwrap();
        cli(&["fit", "--in", &grid, "--out", &alpha]).unwrap();
        let rows: Vec<AlphaRecord> = read_csv(Path::new(&alpha)).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows.windows(2).all(|w| w[0].l0_km < w[1].l0_km));
        cli(&["optimize", "--grid", &alpha, "--distance-km", "10,20,100", "--code", &code, "--out", &opt]).unwrap();
        let best: Vec<OptRecord> = read_csv(Path::new(&opt)).unwrap();
        assert_eq!(best.len(), 3);
        for r in &best {
            assert!(r.l0_km >= 1.0 && r.l0_km <= 3.0, "{r:?}");
            assert!((r.l0_km * r.n_opt as f64 - r.distance_km).abs() < 1e-9);
        }
        assert!(cli(&["optimize", "--grid", &alpha, "--distance-km", "10", "--eta-r", "0.5", "--out", &opt]).is_err());
        cli(&["plot", "--kind", "attenuation", "--in", &alpha, "--out", &path(&dir, "f4.svg")]).unwrap();
        cli(&["plot", "--kind", "optimal", "--in", &opt, "--out", &path(&dir, "f5.svg")]).unwrap();
        for f in ["f4.svg", "f5.svg"] {
            assert!(std::fs::read_to_string(dir.path().join(f)).unwrap().starts_with("<svg"));
        }
    }

    #[test]
    fn profiles() {
        assert_eq!(Profile::Standard.trials(), 500_000);
        assert_eq!(Profile::High.trials(), 2_000_000);
    }
}
