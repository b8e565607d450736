use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Result};
use clap::{Args, Parser, Subcommand};
use theta_core::hecke::HeckeCase;
use theta_core::quad::Flavor;
use theta_core::verify::{self, CheckRecord, GlobalParams};

mod config;
mod report;

use config::{FlavorArg, Format, RunConfig};
use report::ReportDocument;

#[derive(Parser)]
#[command(name = "theta", version, about = "Exact verification reports for local and global theta lifts")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classical and dual-number Hecke checks plus the representation suite.
    LocalVerify(Common),
    /// Theta values, constant terms, Hecke eigenvalues and dictionaries.
    GlobalTheta(Common),
    /// T1 on the spherical basis of each selected case.
    Table(Common),
    /// Orbit/spectral-data and Higgs round trips.
    OrbitMap(Common),
}

#[derive(Args, Clone, Default)]
struct Common {
    /// JSON config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    q: Option<u32>,
    #[arg(long, value_enum)]
    flavor: Option<FlavorArg>,
    /// Valuation class of c0 (b0 when split): 0 or 1.
    #[arg(long)]
    vc0: Option<u8>,
    /// Comma-separated case names, e.g. unramified-v1,split-v0.
    #[arg(long, value_delimiter = ',')]
    cases: Option<Vec<String>>,
    #[arg(long)]
    level: Option<i32>,
    #[arg(long)]
    char_order: Option<u32>,
    #[arg(long)]
    nmax: Option<u32>,
    #[arg(long)]
    pairs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Keep wall times in the report (they make reruns differ).
    #[arg(long)]
    timings: bool,
}

macro_rules! override_fields {
    ($cfg:ident, $c:ident, $set:ident; $($f:ident),*; $($g:ident),*) => {
        $(if let Some(v) = $c.$f.clone() { $cfg.$f = v; $set.push(stringify!($f)); })*
        $(if let Some(v) = $c.$g.clone() { $cfg.$g = Some(v); $set.push(stringify!($g)); })*
    };
}

fn resolve(c: &Common) -> Result<RunConfig> {
    let (mut cfg, source) = match &c.config {
        Some(p) => {
            let (cfg, src) = config::load(p)?;
            (cfg, Some(src))
        }
        None => (RunConfig::default(), None),
    };
    let mut set: Vec<&str> = Vec::new();
    override_fields!(cfg, c, set; q, flavor, level, char_order, nmax, pairs, seed, workers, format; vc0, cases, out);
    cfg.validate(source.as_ref(), &set)?;
    Ok(cfg)
}

fn local_verify(cfg: &RunConfig) -> Vec<CheckRecord> {
    let kinds = cfg.kinds();
    let mut out = verify::classical_suite(cfg.q, cfg.classical_levels);
    out.extend(verify::dual_suite(cfg.q, &kinds, cfg.level));
    let split: Vec<_> = kinds.iter().copied().filter(|k| k.flavor() == Flavor::Split).collect();
    out.extend(verify::split_suite(cfg.q, &split, cfg.char_order, cfg.level));
    out.extend(verify::representation_suite(cfg.q, cfg.pairs, cfg.samples, cfg.seed));
    out
}

fn global_theta(cfg: &RunConfig) -> Vec<CheckRecord> {
    let params = GlobalParams { q: cfg.q, nmax: cfg.nmax, samples: cfg.theta_samples, seed: cfg.seed };
    let mut out = verify::global_suite(&params);
    out.extend(verify::dictionary_suite(cfg.q));
    out
}

fn run(cli: Cli) -> Result<bool> {
    let (name, common) = match &cli.cmd {
        Cmd::LocalVerify(c) => ("local-verify", c),
        Cmd::GlobalTheta(c) => ("global-theta", c),
        Cmd::Table(c) => ("table", c),
        Cmd::OrbitMap(c) => ("orbit-map", c),
    };
    let cfg = resolve(common)?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build_global()
        .map_err(|e| anyhow!("thread pool: {e}"))?;
    let mut tables = Vec::new();
    let records = match cli.cmd {
        Cmd::LocalVerify(_) => local_verify(&cfg),
        Cmd::GlobalTheta(_) => global_theta(&cfg),
        Cmd::OrbitMap(_) => verify::dictionary_suite(cfg.q),
        Cmd::Table(_) => {
            let mut recs = Vec::new();
            for kind in cfg.kinds() {
                let case = HeckeCase::new(cfg.q, kind);
                match verify::operator_table(&case, cfg.level) {
                    Ok((t, r)) => {
                        tables.push(t);
                        recs.extend(r);
                    }
                    Err(e) => recs.push(CheckRecord::error(verify::case_label(&case), verify::case_anchor(kind), &e)),
                }
            }
            recs
        }
    };
    let doc = ReportDocument::new(name, cfg.clone(), records, tables, common.timings);
    match &cfg.out {
        Some(p) => {
            let f = File::create(p).map_err(|e| anyhow!("{}: {e}", p.display()))?;
            doc.write(cfg.format, BufWriter::new(f))?;
        }
        None => doc.write(cfg.format, std::io::stdout().lock())?,
    }
    Ok(doc.all_pass())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
