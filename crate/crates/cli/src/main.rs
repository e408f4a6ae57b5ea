use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{debug, info, warn};

use speedsign::config::{Config, KernelKind};
use speedsign::dataset::{generate_corpus, read_manifest, Background, CorpusParams};
use speedsign::eval::{evaluate, EvalReport};
use speedsign::features::write_feature_file;
use speedsign::io::{read_image, write_image, ImageFormat};
use speedsign::recognize::{
    check_speed_classes, corpus_training_set, font_training_set, per_class_accuracy, DetectionRecord, Pipeline,
    Recognizer,
};
use speedsign::svm::{train_multiclass, MulticlassModel};
use speedsign::{BBox, RgbImage};

#[derive(Parser)]
#[command(name = "speedsign", version, about = "Detect and read circular speed-limit signs")]
struct Cli {
    /// TOML file with thresholds and training settings.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Log progress to stderr.
    #[arg(long, short, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic corpus with a manifest.
    Synth(SynthArgs),
    /// Train the character classifier.
    Train(TrainArgs),
    /// Detect signs and print one JSON record per sign.
    Detect(DetectArgs),
    /// Detect signs and print the speed read from each.
    Recognize(RecognizeArgs),
    /// Score detection and recognition over an annotated corpus.
    Eval(EvalArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Png,
    Ppm,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 20)]
    n_per_class: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Per-channel noise standard deviation.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Gaussian blur standard deviation.
    #[arg(long, default_value_t = 1.0)]
    blur: f64,
    /// Background kinds to draw from, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "plain")]
    background: Vec<String>,
    #[arg(long, default_value_t = 40.0)]
    radius_min: f64,
    #[arg(long, default_value_t = 80.0)]
    radius_max: f64,
    /// Largest sign rotation in degrees.
    #[arg(long, default_value_t = 0.0)]
    rotation_max: f64,
    #[arg(long, default_value_t = 320)]
    width: usize,
    #[arg(long, default_value_t = 240)]
    height: usize,
    #[arg(long, value_enum, default_value_t = Format::Png)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelArg {
    Linear,
    Rbf,
}

#[derive(Args)]
struct TrainArgs {
    /// Corpus manifest whose ground-truth signs provide the characters.
    #[arg(long, required_unless_present = "font", conflicts_with = "font")]
    manifest: Option<PathBuf>,
    /// Train on the built-in font instead of a corpus.
    #[arg(long)]
    font: bool,
    /// Model file to write.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum)]
    kernel: Option<KernelArg>,
    #[arg(long = "C")]
    c: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Also write the training features as CSV.
    #[arg(long)]
    features: Option<PathBuf>,
}

#[derive(Args)]
struct DetectArgs {
    image: PathBuf,
    /// Write a copy of the image with detections outlined.
    #[arg(long)]
    annotate: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RecognizeArgs {
    image: PathBuf,
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    annotate: Option<PathBuf>,
    /// Write JSON records (bbox, digits, speed) for each sign here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    model: PathBuf,
    /// Write the full report, with per-image records, as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .filter_level(if cli.verbose {
            log::LevelFilter::Debug
        } else {
            log::LevelFilter::Warn
        })
        .format_timestamp(None)
        .init();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    let config = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    match cli.command {
        Command::Synth(a) => synth(a),
        Command::Train(a) => train(a, &config),
        Command::Detect(a) => detect(a, &config),
        Command::Recognize(a) => recognize(a, &config),
        Command::Eval(a) => eval(a, &config),
    }
}

fn synth(a: SynthArgs) -> Result<()> {
    let backgrounds = a
        .background
        .iter()
        .map(|s| s.parse::<Background>())
        .collect::<speedsign::Result<Vec<_>>>()?;
    let params = CorpusParams {
        n_per_class: a.n_per_class,
        width: a.width,
        height: a.height,
        radius_min: a.radius_min,
        radius_max: a.radius_max,
        noise_sigma: a.noise,
        blur_sigma: a.blur,
        backgrounds,
        rotation_max: a.rotation_max,
        format: match a.format {
            Format::Png => ImageFormat::Png,
            Format::Ppm => ImageFormat::Ppm,
        },
    };
    let corpus = generate_corpus(&params, a.seed, &a.out)?;
    println!(
        "wrote {} images and {}",
        corpus.entries.len(),
        corpus.manifest_path.display()
    );
    Ok(())
}

fn train(a: TrainArgs, config: &Config) -> Result<()> {
    let mut section = config.train;
    if let Some(k) = a.kernel {
        section.kernel = match k {
            KernelArg::Linear => KernelKind::Linear,
            KernelArg::Rbf => KernelKind::Rbf,
        };
    }
    if let Some(c) = a.c {
        section.c = c;
    }
    if a.gamma.is_some() {
        section.gamma = a.gamma;
    }
    let train_cfg = section.to_train_config();
    let pipeline = Pipeline::from_config(config);

    let data = match &a.manifest {
        Some(manifest) => {
            let entries = read_manifest(manifest)?;
            if entries.is_empty() {
                bail!("manifest {} has no entries", manifest.display());
            }
            check_speed_classes(&entries)?;
            let (data, stats) = corpus_training_set(manifest, &entries, &pipeline)?;
            info!(
                "{} signs, {} skipped for a character count mismatch",
                stats.signs, stats.skipped
            );
            if stats.skipped > 0 {
                warn!(
                    "{} of {} signs did not segment into their digit count",
                    stats.skipped, stats.signs
                );
            }
            data
        }
        None => font_training_set(&(0..10).collect::<Vec<_>>(), &[2, 3, 4, 5, 6])?,
    };
    if let Some(p) = &a.features {
        let rows: Vec<_> = data.iter().map(|(f, l)| (*l, f.clone())).collect();
        write_feature_file(p, &rows)?;
    }
    debug!("training on {} characters", data.len());
    let model = train_multiclass(&data, &train_cfg)?;
    for m in &model.machines {
        if let Some(w) = &m.meta.warning {
            warn!("machine {} vs {}: {w}", m.label_pos, m.label_neg);
        }
    }
    model.save(&a.out)?;

    let acc = per_class_accuracy(&model, &data)?;
    let mut out = String::new();
    out.push_str("class  samples  accuracy\n");
    for (class, rate) in &acc {
        let n = data.iter().filter(|(_, l)| l == class).count();
        out.push_str(&format!("{class:>5}  {n:>7}  {rate:.4}\n"));
    }
    let correct: f64 = acc
        .iter()
        .map(|(class, rate)| rate * data.iter().filter(|(_, l)| l == class).count() as f64)
        .sum();
    out.push_str(&format!("training accuracy {:.4}\n", correct / data.len() as f64));
    print!("{out}");
    Ok(())
}

fn outline(img: &mut RgbImage, b: &BBox, color: [u8; 3]) {
    let (w, h) = (img.width(), img.height());
    for t in 0..2usize {
        let (x0, y0) = (b.min_x.saturating_sub(t), b.min_y.saturating_sub(t));
        let (x1, y1) = ((b.max_x + t).min(w - 1), (b.max_y + t).min(h - 1));
        for x in x0..=x1 {
            img.put(x, y0, color);
            img.put(x, y1, color);
        }
        for y in y0..=y1 {
            img.put(x0, y, color);
            img.put(x1, y, color);
        }
    }
}

fn annotate(img: &RgbImage, boxes: &[BBox], path: &Path) -> Result<()> {
    let mut copy = img.clone();
    for b in boxes {
        outline(&mut copy, b, [0, 255, 0]);
    }
    write_image(path, &copy)?;
    Ok(())
}

fn emit(records: &[DetectionRecord], out: Option<&Path>) -> Result<()> {
    let mut text = String::new();
    for r in records {
        text.push_str(&serde_json::to_string(r)?);
        text.push('\n');
    }
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn detect(a: DetectArgs, config: &Config) -> Result<()> {
    let img = read_image(&a.image)?;
    let pipeline = Pipeline::from_config(config);
    let crops = pipeline.detect(&img)?;
    let name = a.image.display().to_string();
    let records: Vec<_> = crops
        .iter()
        .enumerate()
        .map(|(i, c)| DetectionRecord::new(&name, i, c, None))
        .collect();
    emit(&records, a.out.as_deref())?;
    if let Some(p) = &a.annotate {
        annotate(&img, &crops.iter().map(|c| c.bbox).collect::<Vec<_>>(), p)?;
    }
    eprintln!("{} detections", crops.len());
    Ok(())
}

fn recognize(a: RecognizeArgs, config: &Config) -> Result<()> {
    let img = read_image(&a.image)?;
    let model = MulticlassModel::load(&a.model)?;
    let recognizer = Recognizer::new(Pipeline::from_config(config), model);
    let found = recognizer.recognize(&img)?;
    let name = a.image.display().to_string();
    let records: Vec<_> = found
        .iter()
        .enumerate()
        .map(|(i, f)| DetectionRecord::new(&name, i, &f.crop, Some(&f.reading)))
        .collect();
    for f in &found {
        println!("{}", f.reading.text);
    }
    if let Some(p) = &a.out {
        emit(&records, Some(p))?;
    }
    if let Some(p) = &a.annotate {
        annotate(&img, &found.iter().map(|f| f.crop.bbox).collect::<Vec<_>>(), p)?;
    }
    eprintln!("{} detections", found.len());
    Ok(())
}

fn format_report(r: &EvalReport) -> String {
    let mut s = String::new();
    s.push_str(&format!("images                   {}\n", r.images));
    s.push_str(&format!("signs                    {}\n", r.signs));
    s.push_str(&format!(
        "detection rate           {:.4} ({}/{})\n",
        r.detection_rate, r.detected, r.signs
    ));
    s.push_str(&format!(
        "false positives / image  {:.4} ({} total)\n",
        r.false_positives_per_image, r.false_positives
    ));
    s.push_str(&format!(
        "recognition rate         {:.4} ({}/{})\n",
        r.recognition_rate, r.recognized, r.detected
    ));
    s.push_str("\nradius px     signs  detected  det.rate  rec.rate\n");
    for b in &r.buckets {
        s.push_str(&format!(
            "{:>5}-{:<5}  {:>6}  {:>8}  {:>8.4}  {:>8.4}\n",
            b.radius_min, b.radius_max, b.signs, b.detected, b.detection_rate, b.recognition_rate
        ));
    }
    s
}

fn eval(a: EvalArgs, config: &Config) -> Result<()> {
    let entries = read_manifest(&a.manifest)?;
    if entries.is_empty() {
        bail!("manifest {} has no entries", a.manifest.display());
    }
    let model = MulticlassModel::load(&a.model)?;
    let recognizer = Recognizer::new(Pipeline::from_config(config), model);
    let report = evaluate(&a.manifest, &entries, &recognizer, &config.eval)?;
    print!("{}", format_report(&report));
    if let Some(p) = &a.out {
        let text = serde_json::to_string_pretty(&report)? + "\n";
        fs::write(p, text).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}
