//! `borel-ext`: Ext charts, Borel coweight pages, dictionaries, Mahowald
//! invariants and validation suites from the command line.
//!
//! Exit codes: 0 success, 1 a validation check failed, 2 bad usage or any
//! other error.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};

use borel_ext::borel::{
    dictionary, mahowald, BorelExt, BorelWindow, DEFAULT_COWEIGHTS, DEFAULT_STEM_MAX, DEFAULT_S_MAX,
};
use borel_ext::catalog::{SphereCatalog, CATALOG_STEM_MAX};
use borel_ext::chart::{borel_page, render_svg, ChartDocument, ColumnCertificate, ExtDocument};
use borel_ext::config::{write_atomic, Config};
use borel_ext::engine::Engine;
use borel_ext::module::{ModuleSpec, Variant};
use borel_ext::resolution::limit::{certified_limit, DEPTH_CAP};
use borel_ext::validate::{chart_window, Suite, COLUMN_S_MAX};

#[derive(Parser)]
#[command(name = "borel-ext", version, about = "Ext over the mod-2 Steenrod algebra and Borel C2-equivariant charts")]
struct Cli {
    /// TOML config file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Resolution cache directory (also BOREL_EXT_CACHE).
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Output {
    /// Write JSON here instead of stdout.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Also write an SVG chart here.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Ext chart of a module: S:n, P:a:b, M:w, DA:K:T or DB:K:T.
    Ext {
        module: String,
        #[arg(long)]
        smax: Option<u32>,
        #[arg(long)]
        tmax: Option<i32>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Borel coweight pages. With several coweights, --json and --svg name
    /// directories holding coweight-<c>.json / .svg.
    Borel {
        /// Coweights to emit; default -2..13.
        #[arg(long, num_args = 1.., allow_negative_numbers = true)]
        coweight: Vec<i32>,
        #[arg(long)]
        stem_max: Option<i32>,
        #[arg(long)]
        smax: Option<u32>,
        /// Certify the column limits (s <= 4) and mark failures on the page.
        #[arg(long)]
        certify: bool,
        /// Truncation cap for --certify.
        #[arg(long)]
        depth: Option<i32>,
        #[command(flatten)]
        out: Output,
    },
    /// Named AHSS differentials of a dictionary model, certified at K + 8.
    Dict {
        #[arg(value_enum)]
        variant: VariantArg,
        #[arg(long)]
        depth: Option<i32>,
        #[arg(long)]
        smax: Option<u32>,
        #[arg(long)]
        tmax: Option<i32>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Algebraic Mahowald invariant of a named sphere class.
    Mahowald {
        class: String,
        #[arg(long)]
        depth: Option<i32>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Run validation suites; all of them when none is named.
    Validate {
        suites: Vec<String>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Render a chart JSON document as SVG.
    Render {
        input: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    A,
    B,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl<E: std::error::Error> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::usage(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn emit(path: Option<&Path>, text: &str) -> Outcome {
    match path {
        Some(p) => write_atomic(p, text.as_bytes()).map_err(|e| Failure::usage(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn cmd_ext(engine: &Engine, cfg: &Config, spec: &str, smax: Option<u32>, tmax: Option<i32>, json: Option<&Path>) -> Outcome {
    let spec: ModuleSpec = spec
        .parse()
        .map_err(|e| Failure::usage(format!("bad module spec {spec:?}: {e}")))?;
    let s_max = smax.or(cfg.smax).unwrap_or(6);
    let t_max = tmax.or(cfg.tmax).unwrap_or(20);
    let m = spec.module(t_max);
    let res = engine.resolve(&m, s_max, t_max);
    let mut doc = ExtDocument::from_chart(&res.chart());
    doc.module = spec.to_string();
    emit(json, &doc.to_json())
}

fn page_path(base: &Path, c: i32, ext: &str, many: bool) -> PathBuf {
    if many {
        base.join(format!("coweight-{c}.{ext}"))
    } else {
        base.to_owned()
    }
}

fn certificates(engine: &Engine, b: &BorelExt<'_>, coweights: &[i32], stem_max: i32, cap: i32) -> Result<BTreeMap<i32, ColumnCertificate>, Failure> {
    let lo = coweights.iter().min().copied().unwrap_or(0);
    let hi = coweights.iter().max().copied().unwrap_or(0);
    let s_max = COLUMN_S_MAX.min(b.window().s_max);
    let t_max = s_max as i32 + hi - 1;
    let mut out = BTreeMap::new();
    for w in -hi..=stem_max - lo {
        let window = chart_window(w);
        let pred = |s: u32, tp: i32| window(s, tp) && coweights.contains(&(tp + 1 - s as i32));
        let limit = certified_limit(engine, w, s_max, t_max.max(s_max as i32), &pred, cap)?;
        out.insert(w, ColumnCertificate::from_limit(&limit, s_max));
        engine.clear();
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn cmd_borel(
    engine: &Engine,
    cfg: &Config,
    coweight: Vec<i32>,
    stem_max: Option<i32>,
    smax: Option<u32>,
    certify: bool,
    depth: Option<i32>,
    out: &Output,
) -> Outcome {
    let stem_max = stem_max.or(cfg.stem_max).unwrap_or(DEFAULT_STEM_MAX);
    let s_max = smax.or(cfg.smax).unwrap_or(DEFAULT_S_MAX);
    let mut coweights = if coweight.is_empty() {
        let lo = cfg.coweight_min.unwrap_or(*DEFAULT_COWEIGHTS.start());
        let hi = cfg.coweight_max.unwrap_or(*DEFAULT_COWEIGHTS.end());
        (lo..=hi).collect()
    } else {
        coweight
    };
    coweights.sort_unstable();
    coweights.dedup();
    if !(0..=CATALOG_STEM_MAX).contains(&stem_max) {
        return Err(Failure::usage(format!("--stem-max must lie in 0..={CATALOG_STEM_MAX}")));
    }
    let lo = coweights[0];
    let hi = *coweights.last().expect("nonempty");
    let window = BorelWindow::chart(s_max, stem_max, lo..=hi);
    let catalog = Arc::new(SphereCatalog::build(engine, s_max, CATALOG_STEM_MAX)?);
    let certs = if certify {
        let b = BorelExt::with_catalog(engine, window, catalog.clone())?;
        let certs = certificates(engine, &b, &coweights, stem_max, depth.or(cfg.depth).unwrap_or(DEPTH_CAP))?;
        drop(b);
        certs
    } else {
        BTreeMap::new()
    };
    let b = BorelExt::with_catalog(engine, window, catalog)?;
    let pages = build_pages(&b, &coweights, stem_max, &certs)?;
    let many = coweights.len() > 1;
    if out.json.is_none() && out.svg.is_none() && many {
        return Err(Failure::usage("several coweights need --json DIR or --svg DIR"));
    }
    for doc in &pages {
        match &out.json {
            Some(p) => emit(Some(&page_path(p, doc.coweight, "json", many)), &doc.to_json())?,
            None if out.svg.is_none() => emit(None, &doc.to_json())?,
            None => {}
        }
        if let Some(p) = &out.svg {
            emit(Some(&page_path(p, doc.coweight, "svg", many)), &render_svg(doc))?;
        }
        if !doc.provenance.uncertified.is_empty() {
            eprintln!(
                "warning: coweight {}: uncertified bidegrees (stem, s) {:?}",
                doc.coweight, doc.provenance.uncertified
            );
        }
    }
    Ok(())
}

#[cfg(feature = "parallel")]
fn build_pages(b: &BorelExt<'_>, coweights: &[i32], stem_max: i32, certs: &BTreeMap<i32, ColumnCertificate>) -> Result<Vec<ChartDocument>, Failure> {
    use rayon::prelude::*;
    coweights
        .par_iter()
        .map(|&c| borel_page(b, c, stem_max, certs).map_err(Failure::from))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn build_pages(b: &BorelExt<'_>, coweights: &[i32], stem_max: i32, certs: &BTreeMap<i32, ColumnCertificate>) -> Result<Vec<ChartDocument>, Failure> {
    coweights
        .iter()
        .map(|&c| borel_page(b, c, stem_max, certs).map_err(Failure::from))
        .collect()
}

fn cmd_dict(engine: &Engine, cfg: &Config, variant: VariantArg, depth: Option<i32>, smax: Option<u32>, tmax: Option<i32>, json: Option<&Path>) -> Outcome {
    let variant = match variant {
        VariantArg::A => Variant::A,
        VariantArg::B => Variant::B,
    };
    let depth = depth.or(cfg.depth).unwrap_or(12);
    let s_max = smax.or(cfg.smax).unwrap_or(6);
    let t_max = tmax.or(cfg.tmax).unwrap_or(8);
    let catalog = SphereCatalog::build(engine, s_max, CATALOG_STEM_MAX)?;
    let dict = dictionary(engine, &catalog, variant, depth, s_max, t_max)?;
    if json.is_none() {
        for p in &dict.pairs {
            println!("d{} {} -> {}  (stem {}, s {})", p.r, p.source.label(), p.target.label(), p.stem(), p.source.s);
        }
        if !dict.unstable.is_empty() {
            eprintln!("warning: {} pairs differ between K = {depth} and K = {}", dict.unstable.len(), depth + 8);
        }
        return Ok(());
    }
    emit(json, &to_json(&dict))
}

fn cmd_mahowald(engine: &Engine, cfg: &Config, class: &str, depth: Option<i32>, json: Option<&Path>) -> Outcome {
    let depth = depth.or(cfg.depth).unwrap_or(16);
    let catalog = SphereCatalog::build(engine, cfg.smax.unwrap_or(8), CATALOG_STEM_MAX)?;
    let m = mahowald(engine, &catalog, class, depth)?;
    if json.is_none() {
        let note = if m.certified { "" } else { " (not confirmed at K + 8)" };
        println!("{} -> {}{note}", m.class, m.invariant.label());
        return Ok(());
    }
    emit(json, &to_json(&m))
}

fn cmd_validate(engine: &Engine, suites: &[String], json: Option<&Path>) -> Outcome {
    let suites: Vec<Suite> = if suites.is_empty() {
        Suite::ALL.to_vec()
    } else {
        suites
            .iter()
            .map(|s| s.parse().map_err(Failure::usage))
            .collect::<Result<_, _>>()?
    };
    let mut all = BTreeMap::new();
    let mut passed = true;
    for suite in suites {
        let reports = suite.run(engine);
        for r in &reports {
            eprintln!("{r}");
            passed &= r.passed;
        }
        all.insert(suite.name(), reports);
    }
    emit(json, &to_json(&all))?;
    if passed {
        Ok(())
    } else {
        Err(Failure {
            code: 1,
            message: "validation failed".into(),
        })
    }
}

fn cmd_render(input: &Path, svg: Option<&Path>) -> Outcome {
    let text = std::fs::read_to_string(input).map_err(|e| Failure::usage(format!("{}: {e}", input.display())))?;
    let doc = ChartDocument::from_json(&text).map_err(|e| Failure::usage(format!("{}: {e}", input.display())))?;
    doc.check().map_err(Failure::usage)?;
    emit(svg, &render_svg(&doc))
}

fn run(cli: Cli) -> Outcome {
    let cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    #[cfg(feature = "parallel")]
    if let Some(jobs) = cli.jobs.or(cfg.jobs) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Failure::usage(e.to_string()))?;
    }
    let engine = Engine::new(cfg.cache_dir(cli.cache_dir.clone()));
    match cli.command {
        Command::Ext { module, smax, tmax, json } => cmd_ext(&engine, &cfg, &module, smax, tmax, json.as_deref()),
        Command::Borel {
            coweight,
            stem_max,
            smax,
            certify,
            depth,
            out,
        } => cmd_borel(&engine, &cfg, coweight, stem_max, smax, certify, depth, &out),
        Command::Dict {
            variant,
            depth,
            smax,
            tmax,
            json,
        } => cmd_dict(&engine, &cfg, variant, depth, smax, tmax, json.as_deref()),
        Command::Mahowald { class, depth, json } => cmd_mahowald(&engine, &cfg, &class, depth, json.as_deref()),
        Command::Validate { suites, json } => cmd_validate(&engine, &suites, json.as_deref()),
        Command::Render { input, svg } => cmd_render(&input, svg.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
