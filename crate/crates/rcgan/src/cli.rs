//! Command-line front end. Five subcommands cover the pipeline:
//!
//! * `theory`  — exact grid solution for a data/penalty pair
//! * `synth`   — sample a synthetic labeled dataset to CSV
//! * `train`   — fit a model on synthetic or tabular data
//! * `eval`    — score a labeled test set with a trained model
//! * `heatmap` — render a discriminator over a 2-D grid
//!
//! Every flag may instead come from a `key = value` config file given with
//! `--config`; a flag on the command line wins on conflict. Each run echoes
//! its fully resolved configuration into the output directory, and reruns
//! with the same configuration and seed produce byte-identical outputs.
//!
//! Exit codes: 0 success, 1 usage/config error, 2 numeric failure, 3 I/O or
//! data-format failure.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as FmtWrite;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::error::ErrorKind as ClapErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::data::{load_csv, load_numeric_csv, split, write_numeric_csv, Schema};
use crate::dist::{parse_spec, DistSpec, Grid2D};
use crate::error::{Error, Result};
use crate::gan::{
    load_checkpoint, save_checkpoint, train, RCGANModel, TrainConfig, TrainMode, DEFAULT_HIDDEN,
};
use crate::gridio::{
    write_dense_grid_csv, write_dense_grid_pgm, write_grid_csv, write_grid_pgm, write_metrics_csv,
    write_scores_csv,
};
use crate::nn::AdamParams;
use crate::score::{
    flag_count, heatmap, ranked_indices, score, summarize, HeatmapKind, ScoreKind, ScoreReport,
};
use crate::seeds::{stream_rng, streams};
use crate::tensor::Tensor;
use crate::theory::optimal_generator_grid;

#[derive(Parser)]
#[command(
    name = "rcgan",
    version,
    about = "Cycle-consistent GAN anomaly detection with an exact grid solver",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve the discrete generator/discriminator problem exactly on a grid
    Theory(TheoryArgs),
    /// Sample a labeled synthetic dataset to CSV
    Synth(SynthArgs),
    /// Train a model on synthetic or tabular data
    Train(TrainArgs),
    /// Score a labeled test set with a trained model
    Eval(EvalArgs),
    /// Render a discriminator probability map over a 2-D grid
    Heatmap(HeatmapArgs),
}

/// Shared grid flags; defaults cover the square [-3, 3] x [-3, 3] at 64x64.
#[derive(Args, Debug, Clone)]
struct GridFlags {
    /// Grid resolution per axis
    #[arg(long)]
    res: Option<usize>,
    /// Lower x bound
    #[arg(long)]
    xlo: Option<f64>,
    /// Upper x bound
    #[arg(long)]
    xhi: Option<f64>,
    /// Lower y bound
    #[arg(long)]
    ylo: Option<f64>,
    /// Upper y bound
    #[arg(long)]
    yhi: Option<f64>,
}

#[derive(Args, Debug)]
struct TheoryArgs {
    /// Data distribution, e.g. "gaussian(dim=2,mean=0,var=0.25)"
    #[arg(long)]
    q_spec: Option<String>,
    /// Penalty distribution, e.g. "uniform(dim=2,lo=-3,hi=3)"
    #[arg(long)]
    t_spec: Option<String>,
    #[command(flatten)]
    grid: GridFlags,
    /// Mass-residual tolerance for the scale solve
    #[arg(long)]
    tol: Option<f64>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Key-value config file; flags override its entries
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// Distribution to sample normal rows from
    #[arg(long)]
    spec: Option<String>,
    /// Number of normal rows
    #[arg(long)]
    n: Option<usize>,
    /// Distribution to sample anomalous rows from
    #[arg(long)]
    anomaly_spec: Option<String>,
    /// Number of anomalous rows
    #[arg(long)]
    n_anomaly: Option<usize>,
    /// Root seed
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Key-value config file; flags override its entries
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TrainArgs {
    /// Synthetic data distribution (mutually exclusive with --data)
    #[arg(long)]
    synth: Option<String>,
    /// Number of synthetic training rows
    #[arg(long)]
    n: Option<usize>,
    /// Tabular CSV path (requires --schema and --label)
    #[arg(long)]
    data: Option<PathBuf>,
    /// Schema file declaring the feature columns
    #[arg(long)]
    schema: Option<PathBuf>,
    /// Name of the binary label column
    #[arg(long)]
    label: Option<String>,
    /// Fraction of rows drawn for training before anomalies move to test
    #[arg(long)]
    train_frac: Option<f64>,
    /// Objective: rcgan, no-penalty, or alice-baseline
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch: Option<usize>,
    /// Discriminator updates per generator update
    #[arg(long)]
    disc_steps: Option<usize>,
    /// Adam learning rate
    #[arg(long)]
    lr: Option<f64>,
    /// Hidden layer widths, comma separated, e.g. "64,64"
    #[arg(long)]
    hidden: Option<String>,
    /// Latent distribution
    #[arg(long)]
    latent: Option<String>,
    /// Penalty distribution (defaults to a unit gaussian in data space)
    #[arg(long)]
    penalty: Option<String>,
    /// Root seed
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    grid: GridFlags,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Key-value config file; flags override its entries
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Trained model checkpoint
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Numeric CSV with feature columns and a `label` column
    #[arg(long)]
    data: Option<PathBuf>,
    /// Score kind: dxx or fm
    #[arg(long)]
    score: Option<String>,
    /// Fraction of rows to flag as anomalous
    #[arg(long)]
    ratio: Option<f64>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Key-value config file; flags override its entries
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct HeatmapArgs {
    /// Trained model checkpoint (2-D data space)
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Which map: dxz or dxx
    #[arg(long)]
    which: Option<String>,
    #[command(flatten)]
    grid: GridFlags,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Key-value config file; flags override its entries
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Run the CLI on the given argument list (including argv[0]) and return the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ClapErrorKind::DisplayHelp | ClapErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.cmd {
        Cmd::Theory(a) => cmd_theory(a),
        Cmd::Synth(a) => cmd_synth(a),
        Cmd::Train(a) => cmd_train(a),
        Cmd::Eval(a) => cmd_eval(a),
        Cmd::Heatmap(a) => cmd_heatmap(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            e.exit_code()
        }
    }
}

// ---------------------------------------------------------------------------
// Config-file resolution

/// `key = value` pairs from a config file. Keys use the long flag names.
struct Kv {
    map: BTreeMap<String, String>,
    path: Option<PathBuf>,
}

impl Kv {
    fn load(path: Option<&Path>) -> Result<Kv> {
        let Some(path) = path else {
            return Ok(Kv {
                map: BTreeMap::new(),
                path: None,
            });
        };
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut map = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Malformed {
                    path: path.to_path_buf(),
                    line: lineno + 1,
                    msg: format!("expected `key = value`, got {line:?}"),
                });
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if map.insert(key.clone(), value).is_some() {
                return Err(Error::Malformed {
                    path: path.to_path_buf(),
                    line: lineno + 1,
                    msg: format!("duplicate key {key:?}"),
                });
            }
        }
        Ok(Kv {
            map,
            path: Some(path.to_path_buf()),
        })
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.map.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse().map(Some).map_err(|_| {
                Error::Config(format!(
                    "config key {key:?}: cannot parse {raw:?} (in {})",
                    self.path
                        .as_deref()
                        .unwrap_or(Path::new("<none>"))
                        .display()
                ))
            }),
        }
    }
}

/// Flag value if given, else config-file value, else the default.
fn resolve<T: FromStr>(flag: Option<T>, kv: &Kv, key: &str, default: T) -> Result<T> {
    match flag {
        Some(v) => Ok(v),
        None => Ok(kv.get(key)?.unwrap_or(default)),
    }
}

/// Flag value if given, else config-file value, else an error naming the key.
fn resolve_required<T: FromStr>(flag: Option<T>, kv: &Kv, key: &str) -> Result<T> {
    match flag {
        Some(v) => Ok(v),
        None => kv.get(key)?.ok_or_else(|| {
            Error::Config(format!("missing required setting {key:?} (flag or config)"))
        }),
    }
}

/// Flag value if given, else config-file value.
fn resolve_optional<T: FromStr>(flag: Option<T>, kv: &Kv, key: &str) -> Result<Option<T>> {
    match flag {
        Some(v) => Ok(Some(v)),
        None => kv.get(key),
    }
}

fn resolve_grid(flags: &GridFlags, kv: &Kv) -> Result<Grid2D> {
    let res = resolve(flags.res, kv, "res", 64)?;
    let xlo = resolve(flags.xlo, kv, "xlo", -3.0)?;
    let xhi = resolve(flags.xhi, kv, "xhi", 3.0)?;
    let ylo = resolve(flags.ylo, kv, "ylo", -3.0)?;
    let yhi = resolve(flags.yhi, kv, "yhi", 3.0)?;
    Grid2D::new(xlo, xhi, ylo, yhi, res, res)
}

/// Resolved settings, echoed in insertion order so every output directory
/// records the configuration that produced it.
struct Echo {
    entries: Vec<(String, String)>,
}

impl Echo {
    fn new(command: &str) -> Echo {
        Echo {
            entries: vec![("command".into(), command.into())],
        }
    }

    fn push(&mut self, key: &str, value: impl std::fmt::Display) {
        self.entries.push((key.into(), value.to_string()));
    }

    fn push_grid(&mut self, grid: &Grid2D) {
        self.push("res", grid.nx);
        self.push("xlo", grid.x_lo);
        self.push("xhi", grid.x_hi);
        self.push("ylo", grid.y_lo);
        self.push("yhi", grid.y_hi);
    }

    fn write(&self, dir: &Path) -> Result<()> {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        let path = dir.join("config.txt");
        fs::write(&path, out).map_err(|e| Error::io(&path, e))
    }
}

fn ensure_out_dir(out: &Path) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))
}

fn parse_hidden(s: &str) -> Result<Vec<usize>> {
    let widths: Vec<usize> = s
        .split(',')
        .map(|w| {
            w.trim()
                .parse::<usize>()
                .ok()
                .filter(|&v| v > 0)
                .ok_or_else(|| {
                    Error::Config(format!("hidden widths must be positive integers, got {s:?}"))
                })
        })
        .collect::<Result<_>>()?;
    Ok(widths)
}

fn join_hidden(widths: &[usize]) -> String {
    widths
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

// ---------------------------------------------------------------------------
// Subcommands

fn cmd_theory(args: TheoryArgs) -> Result<()> {
    let kv = Kv::load(args.config.as_deref())?;
    let q_spec_text: String = resolve_required(args.q_spec, &kv, "q-spec")?;
    let t_spec_text: String = resolve_required(args.t_spec, &kv, "t-spec")?;
    let out: PathBuf = resolve_required(args.out, &kv, "out")?;
    let tol = resolve(args.tol, &kv, "tol", 1e-12)?;
    let grid = resolve_grid(&args.grid, &kv)?;
    let q_spec = parse_spec(&q_spec_text)?;
    let t_spec = parse_spec(&t_spec_text)?;

    let sol = optimal_generator_grid(&q_spec, &t_spec, &grid, tol)?;

    ensure_out_dir(&out)?;
    let mut echo = Echo::new("theory");
    echo.push("q-spec", &q_spec);
    echo.push("t-spec", &t_spec);
    echo.push_grid(&grid);
    echo.push("tol", tol);
    echo.write(&out)?;

    write_dense_grid_csv(&out.join("q.csv"), &grid, &sol.q)?;
    write_dense_grid_csv(&out.join("t.csv"), &grid, &sol.t)?;
    write_dense_grid_csv(&out.join("p.csv"), &grid, &sol.solution.p)?;
    write_grid_csv(&out.join("d_opt.csv"), &grid, &sol.d_opt)?;
    write_dense_grid_pgm(&out.join("q.pgm"), &grid, &sol.q, None)?;
    write_dense_grid_pgm(&out.join("t.pgm"), &grid, &sol.t, None)?;
    write_dense_grid_pgm(&out.join("p.pgm"), &grid, &sol.solution.p, None)?;
    write_grid_pgm(&out.join("d_opt.pgm"), &grid, &sol.d_opt, Some(1.0))?;

    let support_cells = sol.solution.support.iter().filter(|&&s| s).count();
    let summary = format!(
        "beta = {}\nobjective = {}\nlambda = {}\nsupport_cells = {}\n",
        sol.solution.beta, sol.objective, sol.solution.lambda, support_cells
    );
    let beta_path = out.join("beta.txt");
    fs::write(&beta_path, summary).map_err(|e| Error::io(&beta_path, e))?;

    println!(
        "theory: beta = {}, objective = {}, support = {} of {} cells",
        sol.solution.beta,
        sol.objective,
        support_cells,
        grid.n_cells()
    );
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Result<()> {
    let kv = Kv::load(args.config.as_deref())?;
    let spec_text: String = resolve_required(args.spec, &kv, "spec")?;
    let n = resolve(args.n, &kv, "n", 1000)?;
    let anomaly_spec_text: Option<String> =
        resolve_optional(args.anomaly_spec, &kv, "anomaly-spec")?;
    let n_anomaly = resolve(args.n_anomaly, &kv, "n-anomaly", 0)?;
    let seed = resolve(args.seed, &kv, "seed", 0)?;
    let out: PathBuf = resolve_required(args.out, &kv, "out")?;

    let spec = parse_spec(&spec_text)?;
    if n == 0 {
        return Err(Error::Config("need at least one normal row".into()));
    }
    let anomaly_spec = match &anomaly_spec_text {
        Some(text) => Some(parse_spec(text)?),
        None => None,
    };
    if anomaly_spec.is_some() && n_anomaly == 0 {
        return Err(Error::Config(
            "anomaly-spec given but n-anomaly is 0".into(),
        ));
    }
    if anomaly_spec.is_none() && n_anomaly > 0 {
        return Err(Error::Config("n-anomaly given without anomaly-spec".into()));
    }
    if let Some(a) = &anomaly_spec {
        if a.dim() != spec.dim() {
            return Err(Error::Shape(format!(
                "anomaly dim {} does not match data dim {}",
                a.dim(),
                spec.dim()
            )));
        }
    }

    let normal = spec.sample(n, &mut stream_rng(seed, streams::DATA))?;
    let mut labels = vec![0u8; n];
    let x = match &anomaly_spec {
        Some(a) => {
            let anom = a.sample(n_anomaly, &mut stream_rng(seed, streams::ANOMALY))?;
            labels.extend(std::iter::repeat_n(1u8, n_anomaly));
            let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n + n_anomaly);
            for i in 0..n {
                rows.push(normal.row(i).to_vec());
            }
            for i in 0..n_anomaly {
                rows.push(anom.row(i).to_vec());
            }
            Tensor::from_rows(&rows)?
        }
        None => normal,
    };

    ensure_out_dir(&out)?;
    let mut echo = Echo::new("synth");
    echo.push("spec", &spec);
    echo.push("n", n);
    if let Some(a) = &anomaly_spec {
        echo.push("anomaly-spec", a);
        echo.push("n-anomaly", n_anomaly);
    }
    echo.push("seed", seed);
    echo.write(&out)?;
    write_numeric_csv(&out.join("data.csv"), &x, &labels)?;

    println!(
        "synth: {} rows ({} normal, {} anomalous), dim {}",
        x.nrows(),
        n,
        n_anomaly,
        x.ncols()
    );
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let kv = Kv::load(args.config.as_deref())?;
    let synth_text: Option<String> = resolve_optional(args.synth, &kv, "synth")?;
    let data_path: Option<PathBuf> = resolve_optional(args.data, &kv, "data")?;
    let out: PathBuf = resolve_required(args.out, &kv, "out")?;
    let seed = resolve(args.seed, &kv, "seed", 0)?;
    let defaults = TrainConfig::default();
    let mode = TrainMode::parse(&resolve(args.mode, &kv, "mode", defaults.mode.name().into())?)?;
    let epochs = resolve(args.epochs, &kv, "epochs", defaults.epochs)?;
    let batch = resolve(args.batch, &kv, "batch", defaults.batch_size)?;
    let disc_steps = resolve(args.disc_steps, &kv, "disc-steps", defaults.disc_steps)?;
    let lr = resolve(args.lr, &kv, "lr", defaults.adam.lr)?;
    let hidden = parse_hidden(&resolve(
        args.hidden,
        &kv,
        "hidden",
        join_hidden(&DEFAULT_HIDDEN),
    )?)?;
    let latent_text = resolve(
        args.latent,
        &kv,
        "latent",
        "gaussian(dim=2,mean=0,var=1)".into(),
    )?;
    let penalty_text: Option<String> = resolve_optional(args.penalty, &kv, "penalty")?;

    // Assemble training features (and, for tabular data, the held-out test
    // side with the train-fit scaling applied).
    enum Source {
        Synth {
            spec: DistSpec,
            n: usize,
        },
        Tabular {
            data: PathBuf,
            schema: PathBuf,
            label: String,
            train_frac: f64,
        },
    }
    let source = match (synth_text, data_path) {
        (Some(_), Some(_)) => {
            return Err(Error::Config(
                "give either a synthetic spec or a tabular data path, not both".into(),
            ))
        }
        (None, None) => {
            return Err(Error::Config(
                "training needs a synthetic spec or a tabular data path".into(),
            ))
        }
        (Some(spec_text), None) => Source::Synth {
            spec: parse_spec(&spec_text)?,
            n: resolve(args.n, &kv, "n", 5000)?,
        },
        (None, Some(data)) => Source::Tabular {
            data,
            schema: resolve_required(args.schema, &kv, "schema")?,
            label: resolve_required(args.label, &kv, "label")?,
            train_frac: resolve(args.train_frac, &kv, "train-frac", 0.8)?,
        },
    };

    let mut echo = Echo::new("train");
    let (x_train, test_out): (Tensor, Option<(Tensor, Vec<u8>)>) = match &source {
        Source::Synth { spec, n } => {
            if *n == 0 {
                return Err(Error::Config("need at least one training row".into()));
            }
            echo.push("synth", spec);
            echo.push("n", n);
            let x = spec.sample(*n, &mut stream_rng(seed, streams::DATA))?;
            (x, None)
        }
        Source::Tabular {
            data,
            schema,
            label,
            train_frac,
        } => {
            echo.push("data", data.display());
            echo.push("schema", schema.display());
            echo.push("label", label);
            echo.push("train-frac", train_frac);
            let schema = Schema::load(schema)?;
            let ds = load_csv(data, &schema, label)?;
            let (train_ds, test_ds) = split(&ds, *train_frac, seed)?;
            (
                train_ds.features().clone(),
                Some((test_ds.features().clone(), test_ds.labels().to_vec())),
            )
        }
    };
    let x_dim = x_train.ncols();

    let latent = parse_spec(&latent_text)?;
    let penalty = match &penalty_text {
        Some(text) => parse_spec(text)?,
        None => DistSpec::gaussian(x_dim, 0.0, 1.0),
    };

    echo.push("mode", mode.name());
    echo.push("epochs", epochs);
    echo.push("batch", batch);
    echo.push("disc-steps", disc_steps);
    echo.push("lr", lr);
    echo.push("hidden", join_hidden(&hidden));
    echo.push("latent", &latent);
    echo.push("penalty", &penalty);
    echo.push("seed", seed);

    let mut model = RCGANModel::with_mlps(
        x_dim,
        &hidden,
        latent,
        penalty,
        &mut stream_rng(seed, streams::INIT),
    )?;
    let cfg = TrainConfig {
        mode,
        epochs,
        batch_size: batch,
        disc_steps,
        adam: AdamParams {
            lr,
            ..defaults.adam
        },
        seed,
    };
    let report = train(&mut model, &x_train, &cfg)?;

    ensure_out_dir(&out)?;
    echo.write(&out)?;
    save_checkpoint(&out.join("checkpoint.json"), &model)?;
    let losses_path = out.join("losses.csv");
    let mut losses = Vec::new();
    report
        .write_csv(&mut losses)
        .map_err(|e| Error::io(&losses_path, e))?;
    fs::write(&losses_path, losses).map_err(|e| Error::io(&losses_path, e))?;
    if let Some((x_test, labels)) = &test_out {
        write_numeric_csv(&out.join("test.csv"), x_test, labels)?;
    }
    if x_dim == 2 {
        let grid = resolve_grid(&args.grid, &kv)?;
        for (kind, stem) in [(HeatmapKind::DiscXz, "d_xz"), (HeatmapKind::DiscXx, "d_xx")] {
            let values = heatmap(&model, &grid, kind)?;
            write_dense_grid_csv(&out.join(format!("{stem}.csv")), &grid, &values)?;
            write_dense_grid_pgm(&out.join(format!("{stem}.pgm")), &grid, &values, Some(1.0))?;
        }
    }

    println!(
        "train: {} on {} rows (dim {}), {} epochs, {} steps",
        mode.name(),
        x_train.nrows(),
        x_dim,
        epochs,
        report.steps.len()
    );
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let kv = Kv::load(args.config.as_deref())?;
    let checkpoint: PathBuf = resolve_required(args.checkpoint, &kv, "checkpoint")?;
    let data: PathBuf = resolve_required(args.data, &kv, "data")?;
    let out: PathBuf = resolve_required(args.out, &kv, "out")?;
    let kind = ScoreKind::parse(&resolve(args.score, &kv, "score", "dxx".into())?)?;
    let ratio = resolve(args.ratio, &kv, "ratio", 0.1)?;

    let model = load_checkpoint(&checkpoint)?;
    let (x, labels) = load_numeric_csv(&data)?;
    if x.ncols() != model.x_dim() {
        return Err(Error::Shape(format!(
            "test data has {} feature columns but the model expects {}",
            x.ncols(),
            model.x_dim()
        )));
    }

    let scores = score(&model, &x, kind)?;
    let report = ScoreReport::new(scores, labels)?;
    let summary = summarize(&report, ratio)?;
    let k = flag_count(report.len(), ratio)?;
    let mut flagged = vec![false; report.len()];
    for &i in &ranked_indices(&report)[..k] {
        flagged[i] = true;
    }

    ensure_out_dir(&out)?;
    let mut echo = Echo::new("eval");
    echo.push("checkpoint", checkpoint.display());
    echo.push("data", data.display());
    echo.push("score", kind.name());
    echo.push("ratio", ratio);
    echo.write(&out)?;
    write_scores_csv(&out.join("scores.csv"), &report, Some(&flagged))?;
    write_metrics_csv(&out.join("metrics.csv"), &summary)?;

    println!(
        "eval: {} rows, {} flagged at ratio {}",
        report.len(),
        k,
        ratio
    );
    println!(
        "precision = {}, recall = {}, f1 = {}, auroc = {}",
        summary.precision, summary.recall, summary.f1, summary.auroc
    );
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_heatmap(args: HeatmapArgs) -> Result<()> {
    let kv = Kv::load(args.config.as_deref())?;
    let checkpoint: PathBuf = resolve_required(args.checkpoint, &kv, "checkpoint")?;
    let out: PathBuf = resolve_required(args.out, &kv, "out")?;
    let kind = HeatmapKind::parse(&resolve(args.which, &kv, "which", "dxz".into())?)?;
    let grid = resolve_grid(&args.grid, &kv)?;

    let model = load_checkpoint(&checkpoint)?;
    let values = heatmap(&model, &grid, kind)?;

    ensure_out_dir(&out)?;
    let mut echo = Echo::new("heatmap");
    echo.push("checkpoint", checkpoint.display());
    echo.push("which", kind.name());
    echo.push_grid(&grid);
    echo.write(&out)?;
    write_dense_grid_csv(&out.join("heatmap.csv"), &grid, &values)?;
    write_dense_grid_pgm(&out.join("heatmap.pgm"), &grid, &values, Some(1.0))?;

    let mean = values.iter().sum::<f64>() / values.len() as f64;
    println!(
        "heatmap: {} over {}x{} cells, mean probability {}",
        kind.name(),
        grid.nx,
        grid.ny,
        mean
    );
    println!("wrote {}", out.display());
    Ok(())
}
