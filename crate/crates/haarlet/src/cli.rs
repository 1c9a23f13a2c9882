//! Command-line front end.
//!
//! Four subcommands: `validate` (axiom checks on a family), `analyze`
//! (AWC series + power-law fit for a field or image), `verify` (direct
//! and converse coefficient-bound checks at a given alpha), and
//! `reproduce` (the reference texture tables).
//!
//! Exit codes: 0 success, 1 semantic failure (axiom violations, a failed
//! bound, a degenerate series), 2 input trouble (unreadable files, parse
//! errors, bad flags, incompatible geometry). All output is
//! deterministic: identical inputs produce identical bytes.

use crate::family::{validate_family, DyadicFamily, ExplicitFamily};
use crate::grid::{GridFamily, GridKind, TemplateKind};
use crate::numfmt::sig6;
use crate::pgm::load_pgm;
use crate::regularity::{
    fit_power_law, lawc_series, verify_converse, verify_direct_injected, AwcMode, AwcSeries,
    PowerLawFit, RegularityError,
};
use crate::reproduce::{table_one, table_one_csv, table_two, table_two_csv, ReproduceOptions};
use crate::signal::{image_to_signal, sample_field, AnalyticField, Signal};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "haarlet",
    about = "Haar coefficient decay on dyadic families: validate, analyze, verify, reproduce",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a family against the partition axioms
    Validate(ValidateArgs),
    /// Fit a coefficient power law to a field or image
    Analyze(AnalyzeArgs),
    /// Check the direct and converse regularity bounds at one alpha
    Verify(VerifyArgs),
    /// Regenerate the reference texture tables
    Reproduce(ReproduceArgs),
}

#[derive(Args)]
struct FamilySel {
    /// Built-in geometry: squares | parabolic | bands
    #[arg(long, value_name = "KIND")]
    family: Option<String>,
    /// Explicit family as JSON ({"levels": [[{"measure", "children"}...]]})
    #[arg(long, value_name = "PATH")]
    family_file: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    sel: FamilySel,
    /// Depth for built-in families
    #[arg(long, default_value_t = 5)]
    depth: usize,
    /// Absolute tolerance for the measure-sum checks
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    sel: FamilySel,
    /// Field to pixelate: F1 | F2 | G1..G5 | constant:<v>
    #[arg(long)]
    field: Option<String>,
    /// PGM image to pixelate instead of a field
    #[arg(long, value_name = "PATH")]
    image: Option<PathBuf>,
    /// Inclusive level window A..B for the series and fit
    #[arg(long, value_name = "A..B")]
    levels: Option<String>,
    /// Midpoint subsamples per cell axis (default 4; 64 on bands)
    #[arg(long)]
    quad: Option<usize>,
    /// Coefficient mode: full | template:I | template:II | template:III
    #[arg(long)]
    mode: Option<String>,
    /// Base for the log-coefficient axis: auto | <number>
    #[arg(long, default_value = "auto")]
    log_base: String,
    /// Base path for artifacts: writes <out>.csv and <out>.json
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// What to print without --out: csv | json
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    sel: FamilySel,
    #[arg(long)]
    field: Option<String>,
    #[arg(long, value_name = "PATH")]
    image: Option<PathBuf>,
    /// Regularity exponent to check
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    quad: Option<usize>,
    /// Test hook: inflate the first checked coefficient by this much
    #[arg(long, hide = true)]
    inject_coefficient_error: Option<f64>,
}

#[derive(Args)]
struct ReproduceArgs {
    /// Which table (1 or 2); both when omitted
    #[arg(long)]
    table: Option<u8>,
    /// Supersampling factor for the rasters
    #[arg(long, default_value_t = 1)]
    quad: usize,
    /// Override the per-family fit windows
    #[arg(long, value_name = "A..B")]
    levels: Option<String>,
    /// Directory to drop table1.csv / table2.csv into
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

enum CliError {
    /// Exit 2: the invocation or its inputs are unusable.
    Input(String),
    /// Exit 1: inputs parsed fine but the answer is negative.
    Semantic(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Semantic(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Semantic(m) => m,
        }
    }
}

fn input<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Input(e.to_string())
}

/// Classify analysis errors: a degenerate series is a semantic verdict
/// about the data; everything else means the request itself was off.
fn regularity_err(e: RegularityError) -> CliError {
    match e {
        RegularityError::AllZero { .. } | RegularityError::TooFewPoints { .. } => {
            CliError::Semantic(e.to_string())
        }
        other => CliError::Input(other.to_string()),
    }
}

pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Validate(args) => cmd_validate(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Reproduce(args) => cmd_reproduce(args),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.code()
        }
    }
}

fn parse_levels(text: &str) -> Result<(usize, usize), CliError> {
    let (a, b) = text
        .split_once("..")
        .ok_or_else(|| input(format!("levels must look like A..B, got '{text}'")))?;
    let lo: usize = a
        .trim()
        .parse()
        .map_err(|_| input(format!("bad level '{a}'")))?;
    let hi: usize = b
        .trim()
        .parse()
        .map_err(|_| input(format!("bad level '{b}'")))?;
    if lo > hi {
        return Err(input(format!("empty level window {lo}..{hi}")));
    }
    Ok((lo, hi))
}

enum Family {
    Grid(GridFamily),
    Explicit(ExplicitFamily),
}

impl Family {
    fn as_dyn(&self) -> &dyn DyadicFamily {
        match self {
            Family::Grid(g) => g,
            Family::Explicit(e) => e,
        }
    }

    fn grid(&self) -> Option<&GridFamily> {
        match self {
            Family::Grid(g) => Some(g),
            Family::Explicit(_) => None,
        }
    }
}

/// Reference depth for desk-scale analysis of each geometry.
fn desk_depth(kind: GridKind) -> usize {
    match kind {
        GridKind::Squares => 10,
        GridKind::Parabolic => 6,
        GridKind::Bands => 12,
    }
}

fn default_quad(kind: GridKind) -> usize {
    match kind {
        // Full-height cells need a denser rule to resolve y.
        GridKind::Bands => 64,
        _ => 4,
    }
}

fn load_family(sel: &FamilySel, depth: Option<usize>) -> Result<Family, CliError> {
    match (&sel.family, &sel.family_file) {
        (Some(_), Some(_)) => Err(input("pass either --family or --family-file, not both")),
        (None, None) => Err(input("pass --family <kind> or --family-file <path>")),
        (Some(name), None) => {
            let kind = GridKind::parse(name)
                .ok_or_else(|| input(format!("unknown family '{name}' (squares | parabolic | bands)")))?;
            let depth = depth.unwrap_or_else(|| desk_depth(kind));
            Ok(Family::Grid(GridFamily::new(kind, depth).map_err(input)?))
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| input(format!("{}: {e}", path.display())))?;
            Ok(Family::Explicit(ExplicitFamily::from_json(&text).map_err(input)?))
        }
    }
}

fn cmd_validate(args: ValidateArgs) -> Result<(), CliError> {
    let family = load_family(&args.sel, Some(args.depth))?;
    let report = validate_family(family.as_dyn(), args.tol);
    if report.ok {
        println!(
            "ok: {} levels, computed_B={} gamma={}",
            family.as_dyn().max_level() + 1,
            sig6(report.computed_b),
            sig6(report.computed_gamma)
        );
        Ok(())
    } else {
        for v in &report.violations {
            println!("{v}");
        }
        Err(CliError::Semantic(format!(
            "{} axiom violation(s)",
            report.violations.len()
        )))
    }
}

/// Build the signal a subcommand will analyze, returning the family too.
fn build_signal(
    sel: &FamilySel,
    field: &Option<String>,
    image: &Option<PathBuf>,
    quad: Option<usize>,
) -> Result<(Family, Signal), CliError> {
    match (field, image) {
        (Some(_), Some(_)) => Err(input("pass either --field or --image, not both")),
        (None, None) => Err(input("pass --field <spec> or --image <path>")),
        (None, Some(path)) => {
            let bytes = std::fs::read(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
            let img = load_pgm(&bytes).map_err(input)?;
            let family = load_family(sel, None)?;
            let grid = family
                .grid()
                .ok_or_else(|| input("images need a built-in geometry (--family)"))?;
            let level = grid.max_image_level(img.width, img.height);
            if level == 0 {
                return Err(input(format!(
                    "a {}x{} image does not resolve even one level of the {} family",
                    img.width,
                    img.height,
                    grid.kind()
                )));
            }
            let signal = image_to_signal(&img, grid, level).map_err(input)?;
            Ok((family, signal))
        }
        (Some(spec), None) => {
            let field = AnalyticField::parse(spec).map_err(input)?;
            let family = load_family(sel, None)?;
            match &family {
                Family::Grid(grid) => {
                    let level = grid.max_level();
                    let quad = quad.unwrap_or_else(|| default_quad(grid.kind()));
                    let signal = sample_field(&field, grid, level, quad).map_err(input)?;
                    Ok((family, signal))
                }
                Family::Explicit(fam) => match field {
                    // No cell geometry: only structure-free fields make sense.
                    AnalyticField::Constant(c) => {
                        let level = fam.max_level();
                        let signal =
                            Signal::from_cell_means(level, vec![c; fam.level_size(level)]);
                        Ok((family, signal))
                    }
                    _ => Err(input(
                        "explicit families carry no cell geometry; only constant fields \
                         can be sampled on them",
                    )),
                },
            }
        }
    }
}

fn parse_mode(text: &str) -> Result<AwcMode, CliError> {
    if text == "full" {
        return Ok(AwcMode::FullBasis);
    }
    if let Some(k) = text.strip_prefix("template:") {
        if let Some(kind) = TemplateKind::parse(k) {
            return Ok(AwcMode::SingleTemplate(kind));
        }
    }
    Err(input(format!(
        "unknown mode '{text}' (full | template:I | template:II | template:III)"
    )))
}

#[derive(Serialize)]
struct FitJson {
    slope: f64,
    intercept: f64,
    alpha: f64,
    #[serde(rename = "logC")]
    log_c: f64,
    r2: f64,
    j_range: [usize; 2],
    mode: String,
    log_base: f64,
}

fn series_csv(series: &AwcSeries) -> String {
    let mut out = String::from("j,K_j,mu_j,awc,lawc\n");
    for e in &series.entries {
        let lawc = e.lawc.map(sig6).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{lawc}\n",
            e.level,
            e.cube_count,
            sig6(e.measure),
            sig6(e.awc)
        ));
    }
    out
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<(), CliError> {
    let (family, signal) = build_signal(&args.sel, &args.field, &args.image, args.quad)?;
    let fam = family.as_dyn();

    let mode = match &args.mode {
        Some(text) => parse_mode(text)?,
        None => match &family {
            Family::Grid(g) => AwcMode::SingleTemplate(TemplateKind::for_grid(g.kind())),
            Family::Explicit(_) => AwcMode::FullBasis,
        },
    };
    let log_base = match args.log_base.as_str() {
        "auto" => match &family {
            Family::Grid(g) => g.default_log_base(),
            Family::Explicit(_) => {
                return Err(input(
                    "auto log base needs a built-in geometry; pass --log-base <number>",
                ))
            }
        },
        text => {
            let b: f64 = text
                .parse()
                .map_err(|_| input(format!("bad log base '{text}'")))?;
            if b <= 1.0 {
                return Err(input(format!("log base must exceed 1, got {b}")));
            }
            b
        }
    };

    let coef_top = signal.level - 1;
    let (lo, hi) = match &args.levels {
        Some(text) => {
            let (lo, hi) = parse_levels(text)?;
            if lo > coef_top {
                return Err(input(format!(
                    "window {lo}..{hi} starts past the last coefficient level {coef_top}"
                )));
            }
            (lo, hi.min(coef_top))
        }
        None => (0, coef_top),
    };

    let series = lawc_series(fam, &signal, lo..=hi, mode, log_base).map_err(regularity_err)?;
    let fit = fit_power_law(&series, None).map_err(regularity_err)?;

    let csv = series_csv(&series);
    let json = serde_json::to_string_pretty(&FitJson {
        slope: fit.slope,
        intercept: fit.intercept,
        alpha: fit.alpha,
        log_c: fit.log_c,
        r2: fit.r2,
        j_range: [fit.level_range.0, fit.level_range.1],
        mode: mode.to_string(),
        log_base,
    })
    .expect("fit serializes");

    if let Some(base) = &args.out {
        let csv_path = with_extension(base, "csv");
        let json_path = with_extension(base, "json");
        std::fs::write(&csv_path, &csv).map_err(|e| input(format!("{}: {e}", csv_path.display())))?;
        std::fs::write(&json_path, &json)
            .map_err(|e| input(format!("{}: {e}", json_path.display())))?;
        println!("wrote {}", csv_path.display());
        println!("wrote {}", json_path.display());
    } else {
        match args.format.as_str() {
            "csv" => print!("{csv}"),
            "json" => println!("{json}"),
            other => return Err(input(format!("unknown format '{other}' (csv | json)"))),
        }
    }
    println!("alpha={} logC={}", sig6(fit.alpha), sig6(fit.log_c));
    Ok(())
}

fn with_extension(base: &Path, ext: &str) -> PathBuf {
    let mut p = base.to_path_buf();
    let new_ext = match p.extension() {
        Some(cur) => format!("{}.{ext}", cur.to_string_lossy()),
        None => ext.to_string(),
    };
    p.set_extension(new_ext);
    p
}

fn cmd_verify(args: VerifyArgs) -> Result<(), CliError> {
    if !(args.alpha > 0.0) {
        return Err(input(format!("alpha must be positive, got {}", args.alpha)));
    }
    let (family, signal) = build_signal(&args.sel, &args.field, &args.image, args.quad)?;
    let fam = family.as_dyn();
    if signal.level < 1 {
        return Err(input("the signal resolves no coefficients at all"));
    }

    let direct = verify_direct_injected(fam, &signal, args.alpha, args.inject_coefficient_error);
    let converse = verify_converse(fam, &signal, args.alpha);

    println!("alpha={}", sig6(args.alpha));
    println!("seminorm={}", sig6(direct.seminorm));
    println!("C_est={}", sig6(converse.c_est));
    println!("converse_constant={}", sig6(converse.converse_constant));
    println!(
        "direct={} ({} coefficients, worst excess {})",
        if direct.ok { "pass" } else { "FAIL" },
        direct.checked,
        sig6(direct.worst_excess)
    );
    let conv_ok = converse.ok && converse.edge_bounds_ok;
    println!(
        "converse={} (edge bounds {}, worst edge excess {})",
        if conv_ok { "pass" } else { "FAIL" },
        if converse.edge_bounds_ok { "pass" } else { "FAIL" },
        sig6(converse.worst_edge_excess)
    );
    if direct.ok && conv_ok {
        Ok(())
    } else {
        Err(CliError::Semantic("a regularity bound failed".into()))
    }
}

fn cmd_reproduce(args: ReproduceArgs) -> Result<(), CliError> {
    let window = match &args.levels {
        Some(text) => Some(parse_levels(text)?),
        None => None,
    };
    if args.quad == 0 {
        return Err(input("quad must be at least 1"));
    }
    let opts = ReproduceOptions {
        quad: args.quad,
        window,
    };
    let want = |t: u8| args.table.is_none() || args.table == Some(t);
    if let Some(t) = args.table {
        if t != 1 && t != 2 {
            return Err(input(format!("there is no table {t}; pass 1 or 2")));
        }
    }

    let mut outputs: Vec<(&str, String)> = Vec::new();
    if want(1) {
        let rows = table_one(opts).map_err(regularity_err)?;
        outputs.push(("table1", table_one_csv(&rows)));
    }
    if want(2) {
        let rows = table_two(opts).map_err(regularity_err)?;
        outputs.push(("table2", table_two_csv(&rows)));
    }

    match &args.out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| input(format!("{}: {e}", dir.display())))?;
            for (name, csv) in &outputs {
                let path = dir.join(format!("{name}.csv"));
                std::fs::write(&path, csv).map_err(|e| input(format!("{}: {e}", path.display())))?;
                println!("wrote {}", path.display());
            }
        }
        None => {
            for (i, (name, csv)) in outputs.iter().enumerate() {
                if i > 0 {
                    println!();
                }
                println!("# {name}");
                print!("{csv}");
            }
        }
    }
    Ok(())
}
