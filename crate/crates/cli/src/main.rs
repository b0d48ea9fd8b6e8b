use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{ArgGroup, Parser, Subcommand, ValueEnum};

use dgli_core::analysis::{
    self, choose_representatives, classify_nearest, confusion_matrix, extract, extract_all,
    sign_change_frames, ConfusionMatrix, Features, Metric, Representation,
};
use dgli_core::cloth::{compute_coordinates, default_edge_selection, ClothConfiguration};
use dgli_core::datagen::{self, BuiltinSequence};
use dgli_core::geometry::{PerturbationSpec, Point3};
use dgli_core::io;

#[derive(Parser)]
#[command(
    name = "dgli",
    version,
    about = "dGLI cloth coordinates and representation comparisons"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReprArg {
    Dgli,
    Edges,
    Corners,
    Boundary,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Spearman,
    Euclidean,
    Frechet,
    Hausdorff,
}

impl From<ReprArg> for Representation {
    fn from(r: ReprArg) -> Self {
        match r {
            ReprArg::Dgli => Representation::Dgli,
            ReprArg::Edges => Representation::Edges,
            ReprArg::Corners => Representation::Corners,
            ReprArg::Boundary => Representation::Boundary,
        }
    }
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Spearman => Metric::Spearman,
            MetricArg::Euclidean => Metric::Euclidean,
            MetricArg::Frechet => Metric::Frechet,
            MetricArg::Hausdorff => Metric::Hausdorff,
        }
    }
}

#[derive(clap::Args, Clone, Copy)]
struct Compare {
    /// Feature extracted from each configuration
    #[arg(long = "repr")]
    repr: Option<ReprArg>,
    /// Distance between features; defaults to the representation's natural one
    #[arg(long)]
    metric: Option<MetricArg>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the dGLI coordinates of one configuration
    Coords {
        config: PathBuf,
        /// Also print the upper-triangular matrix layout
        #[arg(long)]
        matrix: bool,
        /// Perturbation direction as x,y,z
        #[arg(long, value_parser = parse_point, default_value = "0,0,1")]
        direction: Point3,
        #[arg(long, default_value_t = 1e-8)]
        epsilon: f64,
        #[arg(long, default_value_t = 1e4)]
        clamp: f64,
    },
    /// Distance between two configurations
    Dist {
        a: PathBuf,
        b: PathBuf,
        #[command(flatten)]
        compare: Compare,
    },
    /// Pairwise distance matrix of a dataset as CSV
    Confusion {
        manifest: PathBuf,
        #[command(flatten)]
        compare: Compare,
        /// CSV output; stdout when omitted
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write an SVG heatmap
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Davies-Bouldin index of every representation on a labeled dataset
    DbIndex {
        manifest: PathBuf,
        /// Also write the table as CSV
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Nearest-representative classification of query configurations
    Classify {
        manifest: PathBuf,
        #[arg(required = true)]
        queries: Vec<PathBuf>,
        /// JSON object mapping class labels to representative counts
        #[arg(long)]
        reps: Option<PathBuf>,
        #[command(flatten)]
        compare: Compare,
    },
    /// Write a synthetic dataset (one JSON per configuration plus manifest.json)
    #[command(group(ArgGroup::new("what").required(true).args(["class", "sequence", "database"])))]
    Gen {
        /// Single class 1..12
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=12))]
        class: Option<u8>,
        /// Built-in folding sequence 1..3
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        sequence: Option<u8>,
        /// All twelve classes
        #[arg(long)]
        database: bool,
        #[arg(long, default_value_t = datagen::DEFAULT_SAMPLES_PER_CLASS)]
        samples: usize,
        #[arg(long, default_value_t = datagen::DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = datagen::DEFAULT_JITTER)]
        jitter: f64,
        /// Frames per fold for sequences
        #[arg(long, default_value_t = 30)]
        frames: usize,
        /// Output directory
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Frame-by-frame distance matrix of a folding sequence
    Sequence {
        manifest: PathBuf,
        #[command(flatten)]
        compare: Compare,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

fn parse_point(s: &str) -> Result<Point3, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [x, y, z] => Ok(Point3::new(x, y, z)),
        _ => Err(format!("expected x,y,z, got `{s}`")),
    }
}

/// Files written so far; removed if the command fails.
#[derive(Default)]
struct Outputs(Vec<PathBuf>);

impl Outputs {
    fn write(&mut self, path: &Path, text: &str) -> Result<()> {
        io::write_file(path, text.as_bytes())?;
        self.0.push(path.to_path_buf());
        Ok(())
    }
}

fn resolve(
    compare: Compare,
    manifest: Option<&io::DatasetManifest>,
) -> Result<(Representation, Metric)> {
    let repr = compare
        .repr
        .map(Representation::from)
        .or(manifest.and_then(|m| m.representation))
        .unwrap_or(Representation::Dgli);
    let metric = compare
        .metric
        .map(Metric::from)
        .or(manifest.and_then(|m| m.metric))
        .unwrap_or(repr.default_metric());
    if !repr.accepts(metric) {
        bail!(dgli_core::Error::InvalidDataset(format!(
            "metric {metric} does not apply to representation {repr}"
        )));
    }
    Ok((repr, metric))
}

fn fmt_value(v: f64) -> String {
    format!("{v:.17e}")
}

fn matrix_outputs(
    m: &ConfusionMatrix,
    labels: Option<&[String]>,
    output: Option<&Path>,
    svg: Option<&Path>,
    outputs: &mut Outputs,
) -> Result<String> {
    let csv = io::matrix_to_csv(m);
    let mut stdout = String::new();
    match output {
        Some(p) => outputs.write(p, &csv)?,
        None => stdout.push_str(&csv),
    }
    if let Some(p) = svg {
        outputs.write(p, &io::heatmap_svg(m, labels)?)?;
    }
    Ok(stdout)
}

fn load(manifest: &Path) -> Result<(io::DatasetManifest, Vec<ClothConfiguration>)> {
    let m = io::load_manifest(manifest)?;
    let configs = io::load_dataset(&m)?;
    if configs.is_empty() {
        bail!(dgli_core::Error::InvalidDataset(format!(
            "{}: no entries",
            manifest.display()
        )));
    }
    Ok((m, configs))
}

fn labels_of(configs: &[ClothConfiguration]) -> Result<Vec<String>> {
    configs
        .iter()
        .map(|c| {
            c.class_label.clone().ok_or_else(|| {
                dgli_core::Error::InvalidDataset(format!("configuration `{}` has no class", c.name))
                    .into()
            })
        })
        .collect()
}

fn run(cli: Cli, outputs: &mut Outputs) -> Result<String> {
    let mut out = String::new();
    match cli.command {
        Command::Coords {
            config,
            matrix,
            direction,
            epsilon,
            clamp,
        } => {
            let c = io::load_configuration(&config)?;
            let sel = default_edge_selection(&c)?;
            let p = PerturbationSpec::new(direction, epsilon, clamp)?;
            let coords = compute_coordinates(&c, &sel, &p)?;
            let line: Vec<String> = coords.values().iter().map(|&v| fmt_value(v)).collect();
            writeln!(out, "{}", line.join(" "))?;
            if matrix {
                writeln!(out, "segments {:?}", sel.indices())?;
                for row in coords.upper_triangle() {
                    let cells: Vec<String> = row
                        .iter()
                        .map(|v| v.map_or_else(|| format!("{:>10}", "."), |v| format!("{v:>10.4}")))
                        .collect();
                    writeln!(out, "{}", cells.join(" "))?;
                }
            }
            if coords.all_clamped() {
                eprintln!("warning: every entry clamped; the configuration is degenerate");
            } else if coords.clamped_count() > 0 {
                eprintln!(
                    "note: {} of {} entries clamped",
                    coords.clamped_count(),
                    coords.len()
                );
            }
        }
        Command::Dist { a, b, compare } => {
            let (repr, metric) = resolve(compare, None)?;
            let fa = extract(&io::load_configuration(&a)?, repr)?;
            let fb = extract(&io::load_configuration(&b)?, repr)?;
            writeln!(out, "{}", analysis::distance(&fa, &fb, metric)?)?;
        }
        Command::Confusion {
            manifest,
            compare,
            output,
            svg,
        } => {
            let (m, configs) = load(&manifest)?;
            let (repr, metric) = resolve(compare, Some(&m))?;
            let ids: Vec<String> = configs.iter().map(|c| c.name.clone()).collect();
            let labels: Option<Vec<String>> =
                configs.iter().map(|c| c.class_label.clone()).collect();
            let matrix = confusion_matrix(&extract_all(&configs, repr)?, &ids, metric)?;
            out = matrix_outputs(
                &matrix,
                labels.as_deref(),
                output.as_deref(),
                svg.as_deref(),
                outputs,
            )?;
        }
        Command::DbIndex { manifest, output } => {
            let (_, configs) = load(&manifest)?;
            let labels = labels_of(&configs)?;
            let mut csv = String::from("representation,db_index\n");
            for (scheme, value) in analysis::db_table(&configs, &labels)? {
                let shown = match value {
                    Ok(v) => format!("{v:.6}"),
                    Err(e @ dgli_core::Error::DegenerateSeparation { .. }) => {
                        eprintln!("{}: {e}", scheme.label());
                        "inf".to_string()
                    }
                    Err(e) => return Err(e.into()),
                };
                writeln!(out, "{:<10} {shown}", scheme.label())?;
                writeln!(csv, "{},{shown}", scheme.label())?;
            }
            if let Some(p) = output {
                outputs.write(&p, &csv)?;
            }
        }
        Command::Classify {
            manifest,
            queries,
            reps,
            compare,
        } => {
            let (m, configs) = load(&manifest)?;
            let (repr, metric) = resolve(compare, Some(&m))?;
            let labels = labels_of(&configs)?;
            let counts = match reps {
                Some(p) => load_counts(&p)?,
                None => datagen::default_representative_counts()
                    .into_iter()
                    .filter(|(k, _)| labels.contains(k))
                    .collect(),
            };
            let features = extract_all(&configs, repr)?;
            let set = choose_representatives(&features, &labels, metric, &counts)?;
            for q in queries {
                let c = io::load_configuration(&q)?;
                let f: Features = extract(&c, repr)?;
                writeln!(out, "{}\t{}", c.name, classify_nearest(&f, &set, metric)?)?;
            }
        }
        Command::Gen {
            class,
            sequence,
            database,
            samples,
            seed,
            jitter,
            frames,
            out: dir,
        } => {
            let configs = if let Some(id) = class {
                let recipe = datagen::class_catalog(jitter)
                    .into_iter()
                    .find(|r| r.class_id == id)
                    .expect("catalog covers 1..12");
                datagen::generate_class(&recipe, samples, seed)?
            } else if let Some(s) = sequence {
                BuiltinSequence::from_index(s)?.generate(frames)?
            } else {
                debug_assert!(database);
                datagen::generate_database(samples, jitter, seed)?
            };
            let written = io::write_dataset(&dir, &configs)?;
            writeln!(
                out,
                "{} configurations written to {}",
                configs.len(),
                dir.display()
            )?;
            outputs.0.extend(written);
        }
        Command::Sequence {
            manifest,
            compare,
            output,
            svg,
        } => {
            let (m, mut configs) = load(&manifest)?;
            let (repr, metric) = resolve(compare, Some(&m))?;
            if configs.iter().any(|c| c.frame_index.is_none()) {
                bail!(dgli_core::Error::InvalidDataset(
                    "every configuration in a sequence needs a frame index".into()
                ));
            }
            configs.sort_by_key(|c| c.frame_index);
            let ids: Vec<String> = configs.iter().map(|c| c.name.clone()).collect();
            let matrix = confusion_matrix(&extract_all(&configs, repr)?, &ids, metric)?;
            out = matrix_outputs(&matrix, None, output.as_deref(), svg.as_deref(), outputs)?;
            if repr == Representation::Dgli {
                let coords: Vec<Vec<f64>> = extract_all(&configs, repr)?
                    .into_iter()
                    .filter_map(|f| f.as_vector().map(<[f64]>::to_vec))
                    .collect();
                let changes = sign_change_frames(&coords, 1e-9);
                let frames: Vec<u32> = changes
                    .iter()
                    .map(|&k| configs[k].frame_index.unwrap_or(0))
                    .collect();
                eprintln!("sign changes at frames {frames:?}");
            }
        }
    }
    Ok(out)
}

fn load_counts(path: &Path) -> Result<BTreeMap<String, usize>> {
    let text = fs::read_to_string(path).with_context(|| format!("{}", path.display()))?;
    serde_json_counts(&text).map_err(|message| {
        dgli_core::Error::Parse {
            path: path.to_path_buf(),
            message,
        }
        .into()
    })
}

fn serde_json_counts(text: &str) -> Result<BTreeMap<String, usize>, String> {
    let value: BTreeMap<String, u64> = serde_json::from_str(text).map_err(|e| e.to_string())?;
    value
        .into_iter()
        .map(|(k, v)| {
            usize::try_from(v)
                .map(|v| (k, v))
                .map_err(|e| e.to_string())
        })
        .collect()
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<dgli_core::Error>() {
        Some(e) if e.is_numerical() => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let mut outputs = Outputs::default();
    match run(cli, &mut outputs) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            io::remove_all(&outputs.0);
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
