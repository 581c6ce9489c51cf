use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use neurorl::env::{GaussianMixture, Objective};
use neurorl::harness::demos::{ClusteringDemo, TrackDemo};
use neurorl::harness::emit::{self, fmt_num, load_campaign, write_campaign, Manifest};
use neurorl::harness::stats::{summarize, welch_t_test, Metric, ALPHA};
use neurorl::harness::sweep::SweepSpec;
use neurorl::harness::{run_campaign, AgentSpec, ExperimentConfig};
use neurorl::presets;

#[derive(Parser)]
#[command(name = "neurorl", version, about = "Clustering actor-critic experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a multi-seed campaign and write CSVs plus a manifest.
    Run {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Run a proposed preset with ablation switches.
    Ablate {
        #[arg(long, value_enum)]
        preset: Preset,
        /// Ablation switches; repeat or comma-separate.
        #[arg(long = "flag", value_enum, value_delimiter = ',', required = true)]
        flags: Vec<AblationFlag>,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Grid search from a sweep file.
    Sweep {
        grid: PathBuf,
        /// Overrides the file's `cap` (default 100).
        #[arg(long)]
        cap: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        parallel: bool,
    },
    /// Welch t-test between two result directories.
    Stats {
        a: PathBuf,
        b: PathBuf,
        /// Trailing episodes per run; defaults to the manifest window.
        #[arg(long)]
        window: Option<usize>,
    },
    /// Cluster a 1-D Gaussian mixture stream.
    DemoClustering {
        #[arg(long, default_value_t = 3)]
        neurons: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value = "0")]
        seeds: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Value learning on the linear track with and without TD modulation.
    DemoTrack {
        #[arg(long)]
        episodes: Option<usize>,
        #[arg(long, default_value = "0")]
        seeds: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Source {
    /// Shipped preset letter.
    #[arg(long, value_enum, conflicts_with_all = ["config", "manifest"])]
    preset: Option<Preset>,
    /// Agent used with `--preset`.
    #[arg(long, value_enum, default_value_t = AgentKind::Proposed)]
    agent: AgentKind,
    /// Experiment TOML file.
    #[arg(long, conflicts_with = "manifest")]
    config: Option<PathBuf>,
    /// Replay the config and seeds of an earlier run.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct RunOpts {
    /// Seed list such as `0..10` or `1,4,9`; default `0..10`.
    #[arg(long)]
    seeds: Option<String>,
    /// Overrides the configured episode count.
    #[arg(long)]
    episodes: Option<usize>,
    /// Output directory; default `results/<config id>`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run seeds on all cores.
    #[arg(long)]
    parallel: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    A,
    B,
    C,
    D,
}

impl Preset {
    fn letter(self) -> char {
        match self {
            Preset::A => 'a',
            Preset::B => 'b',
            Preset::C => 'c',
            Preset::D => 'd',
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AgentKind {
    Proposed,
    Tac,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum AblationFlag {
    NoTd,
    NoUnsupervised,
    Static,
}

fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    let mut seeds = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((lo, hi)) = part.split_once("..") {
            let lo: u64 = lo.parse().with_context(|| format!("bad seed range `{part}`"))?;
            let hi: u64 = hi.parse().with_context(|| format!("bad seed range `{part}`"))?;
            seeds.extend(lo..hi);
        } else {
            seeds.push(part.parse().with_context(|| format!("bad seed `{part}`"))?);
        }
    }
    if seeds.is_empty() {
        bail!("no seeds given");
    }
    Ok(seeds)
}

fn preset_config(preset: Preset, agent: AgentKind) -> Result<ExperimentConfig> {
    let letter = preset.letter();
    Ok(match agent {
        AgentKind::Proposed => presets::proposed_experiment(letter)?,
        AgentKind::Tac => presets::tac_experiment(if letter == 'd' { 'c' } else { letter })?,
        AgentKind::Random => {
            let mut config = presets::proposed_experiment(letter)?;
            config.id = format!("random-{letter}");
            config.agent = AgentSpec::Random;
            config
        }
    })
}

fn resolve(source: &Source, seeds: Option<&str>) -> Result<(ExperimentConfig, Vec<u64>)> {
    if let Some(path) = &source.manifest {
        let manifest = Manifest::load(path)?;
        let seeds = match seeds {
            Some(s) => parse_seeds(s)?,
            None => manifest.seeds,
        };
        return Ok((manifest.config, seeds));
    }
    let config = match (&source.config, source.preset) {
        (Some(path), _) => ExperimentConfig::from_path(path)?,
        (None, Some(preset)) => preset_config(preset, source.agent)?,
        (None, None) => bail!("give one of --preset, --config or --manifest"),
    };
    Ok((config, parse_seeds(seeds.unwrap_or("0..10"))?))
}

fn apply_episodes(config: &mut ExperimentConfig, episodes: Option<usize>) -> Result<()> {
    if let Some(n) = episodes {
        config.episodes = n;
        config.window = config.window.min(n);
    }
    config.validate()?;
    Ok(())
}

fn execute(mut config: ExperimentConfig, seeds: Vec<u64>, opts: &RunOpts) -> Result<()> {
    apply_episodes(&mut config, opts.episodes)?;
    let out = opts
        .out
        .clone()
        .unwrap_or_else(|| Path::new("results").join(&config.id));
    let campaign = run_campaign(&config, &seeds, opts.parallel);
    let objective = config.environment.spec().objective;
    let stats = summarize(&campaign.records(), config.window, objective).ok();
    write_campaign(&out, &config, &seeds, &campaign, stats.as_ref())?;
    match &stats {
        Some(s) => println!(
            "{}: {} runs, mean {} over last {} episodes = {:.2} (std {:.2}), best run seed {}",
            config.id,
            s.n,
            metric_name(s.metric),
            s.window,
            s.mean,
            s.std,
            campaign.outcomes[s.best_run].record.seed
        ),
        None => println!("{}: no completed runs", config.id),
    }
    for f in &campaign.failures {
        eprintln!("seed {} failed: {}", f.seed, f.error);
    }
    println!("wrote {}", out.display());
    if !campaign.failures.is_empty() {
        bail!("{} of {} seeds failed", campaign.failures.len(), seeds.len());
    }
    Ok(())
}

fn metric_name(metric: Metric) -> &'static str {
    match metric {
        Metric::Latency => "latency",
        Metric::Return => "return",
    }
}

fn ablate(preset: Preset, flags: &[AblationFlag], opts: &RunOpts) -> Result<()> {
    let mut config = presets::proposed_experiment(preset.letter())?;
    let AgentSpec::Proposed(agent) = &mut config.agent else {
        unreachable!("proposed presets carry a proposed agent");
    };
    let mut suffix = String::new();
    for flag in flags {
        let (name, field) = match flag {
            AblationFlag::NoTd => ("no-td", &mut agent.ablation.disable_td_modulation),
            AblationFlag::NoUnsupervised => ("no-unsupervised", &mut agent.ablation.disable_unsupervised),
            AblationFlag::Static => ("static", &mut agent.ablation.static_clusters),
        };
        *field = true;
        suffix.push('-');
        suffix.push_str(name);
    }
    config.id.push_str(&suffix);
    let seeds = parse_seeds(opts.seeds.as_deref().unwrap_or("0..10"))?;
    execute(config, seeds, opts)
}

fn sweep(grid: &Path, cap: Option<usize>, out: Option<&Path>, parallel: bool) -> Result<()> {
    let text = fs::read_to_string(grid).with_context(|| format!("reading {}", grid.display()))?;
    let mut spec = SweepSpec::from_toml_str(&text)?;
    if let Some(cap) = cap {
        spec.cap = cap;
    }
    let entries = spec.run(parallel)?;
    let mut table = String::from("rank,id,mean,std,failures,overrides\n");
    for (rank, e) in entries.iter().enumerate() {
        let overrides: Vec<String> = e.overrides.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let (mean, std) = e.stats.as_ref().map_or((f64::NAN, f64::NAN), |s| (s.mean, s.std));
        let _ = writeln!(
            table,
            "{},{},{},{},{},\"{}\"",
            rank + 1,
            e.config.id,
            fmt_num(mean),
            fmt_num(std),
            e.failures,
            overrides.join(" ")
        );
    }
    print!("{table}");
    if let Some(dir) = out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        fs::write(dir.join("ranking.csv"), &table).with_context(|| format!("writing {}", dir.display()))?;
    }
    Ok(())
}

fn stats(a: &Path, b: &Path, window: Option<usize>) -> Result<()> {
    let (ma, ra) = load_campaign(a)?;
    let (mb, rb) = load_campaign(b)?;
    let objective = ma.environment.objective;
    if objective != mb.environment.objective {
        bail!("{} and {} use environments with different objectives", a.display(), b.display());
    }
    let window = window.unwrap_or_else(|| ma.config.window.min(mb.config.window));
    let sa = summarize(&ra, window, objective)?;
    let sb = summarize(&rb, window, objective)?;
    let test = welch_t_test(&sa.run_means, &sb.run_means)?;
    let better = match objective {
        Objective::HigherIsBetter => "higher",
        Objective::LowerIsBetter => "lower",
    };
    println!("metric: {} over last {window} episodes ({better} is better)", metric_name(sa.metric));
    println!("{}: mean {:.3} std {:.3} n {}", ma.config.id, sa.mean, sa.std, sa.n);
    println!("{}: mean {:.3} std {:.3} n {}", mb.config.id, sb.mean, sb.std, sb.n);
    println!("welch t {:.4} dof {:.2} p {:.4e}", test.t, test.dof, test.p_value);
    println!(
        "{} at alpha {ALPHA}{}",
        if test.significant { "significant" } else { "not significant" },
        if test.degenerate { " (zero variance on both sides)" } else { "" }
    );
    Ok(())
}

fn demo_clustering(neurons: usize, samples: usize, seeds: &str, out: Option<&Path>) -> Result<()> {
    let demo = ClusteringDemo {
        neurons,
        samples,
        ..ClusteringDemo::default()
    };
    let mixture = GaussianMixture::default();
    for seed in parse_seeds(seeds)? {
        let outcome = demo.run(&mixture, seed)?;
        let mut centres: Vec<(f64, f64)> = outcome
            .last
            .neurons
            .iter()
            .map(|n| (n.weights[0], n.threshold))
            .collect();
        centres.sort_by(|x, y| x.0.total_cmp(&y.0));
        let shown: Vec<String> = centres.iter().map(|(w, t)| format!("{w:.3}±{t:.3}")).collect();
        println!(
            "seed {seed}: mean threshold {:.4}, neurons {}",
            outcome.last.mean_threshold(),
            shown.join(" ")
        );
        if let Some(dir) = out {
            fs::create_dir_all(dir)?;
            fs::write(dir.join(format!("clusters_seed{seed}_initial.csv")), emit::snapshot_csv(&outcome.initial))?;
            fs::write(dir.join(format!("clusters_seed{seed}_final.csv")), emit::snapshot_csv(&outcome.last))?;
        }
    }
    Ok(())
}

fn demo_track(episodes: Option<usize>, seeds: &str, out: Option<&Path>) -> Result<()> {
    let mut on = TrackDemo::default();
    if let Some(n) = episodes {
        on.episodes = n;
    }
    let off = TrackDemo {
        modulation: false,
        ..on.clone()
    };
    for seed in parse_seeds(seeds)? {
        let a = on.run(seed)?;
        let b = off.run(seed)?;
        println!("seed {seed}: value RMS error with modulation {:.4}, without {:.4}", a.rms, b.rms);
        if let Some(dir) = out {
            fs::create_dir_all(dir)?;
            let mut text = String::from("position,oracle,modulated,unmodulated\n");
            for i in 0..a.learned.len() {
                let _ = writeln!(
                    text,
                    "{},{},{},{}",
                    i + 1,
                    fmt_num(a.oracle[i]),
                    fmt_num(a.learned[i]),
                    fmt_num(b.learned[i])
                );
            }
            fs::write(dir.join(format!("track_seed{seed}.csv")), text)?;
            fs::write(dir.join(format!("clusters_seed{seed}_modulated.csv")), emit::snapshot_csv(&a.layer))?;
            fs::write(dir.join(format!("clusters_seed{seed}_unmodulated.csv")), emit::snapshot_csv(&b.layer))?;
        }
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { source, opts } => {
            let (config, seeds) = resolve(&source, opts.seeds.as_deref())?;
            execute(config, seeds, &opts)
        }
        Command::Ablate { preset, flags, opts } => ablate(preset, &flags, &opts),
        Command::Sweep {
            grid,
            cap,
            out,
            parallel,
        } => sweep(&grid, cap, out.as_deref(), parallel),
        Command::Stats { a, b, window } => stats(&a, &b, window),
        Command::DemoClustering {
            neurons,
            samples,
            seeds,
            out,
        } => demo_clustering(neurons, samples, &seeds, out.as_deref()),
        Command::DemoTrack { episodes, seeds, out } => demo_track(episodes, &seeds, out.as_deref()),
    }
}
