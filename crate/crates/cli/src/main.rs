use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use g2l_cli::{exit_code, server, EXIT_OK};
use g2l_core::cnn::{load_model, save_model, train_with, HyperParams};
use g2l_core::codegen::TemplateSet;
use g2l_core::corpus::{generate_corpus, CorpusConfig, CorpusManifest};
use g2l_core::pipeline::{evaluate, roundtrip, Pipeline};
use g2l_core::{Error, Result, Stage};

#[derive(Parser)]
#[command(name = "g2l", version, about = "Turn a chart image into plotting code")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Render a labeled synthetic corpus.
    GenCorpus {
        #[arg(long)]
        out: PathBuf,
        /// Per-class counts, e.g. bar=300,pie=200. Defaults to the standard mix.
        #[arg(long)]
        counts: Option<String>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Train the classifier on a corpus.
    Train {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        batch: Option<usize>,
        #[arg(long)]
        lr: Option<f32>,
        #[arg(long)]
        val_fraction: Option<f64>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Also write the training report as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Classify every corpus item and print a confusion matrix.
    Eval {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Generate code for one image.
    Infer {
        #[arg(long)]
        model: PathBuf,
        image: PathBuf,
        /// Write the code here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the full inference report instead of the code.
        #[arg(long, value_enum)]
        report: Option<ReportFormat>,
        /// Directory of <class>.tmpl files replacing the built-in templates.
        #[arg(long)]
        templates: Option<PathBuf>,
    },
    /// Render seeded charts, run the pipeline, compare with ground truth.
    Roundtrip {
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Serve the pipeline over HTTP.
    Serve {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
    },
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v).map_err(|e| Error::Internal(format!("cannot serialize output: {e}")))
}

fn write_file(path: &PathBuf, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io { path: path.clone(), source })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenCorpus { out, counts, seed } => {
            let config = match counts {
                Some(s) => CorpusConfig::parse(&s)?,
                None => CorpusConfig::default(),
            };
            let m = generate_corpus(&config, seed, &out)?;
            println!("wrote {} images to {}", m.items.len(), out.display());
            for (class, n) in m.histogram() {
                println!("  {class:<16} {n}");
            }
        }
        Command::Train {
            corpus,
            out,
            epochs,
            batch,
            lr,
            val_fraction,
            seed,
            report,
        } => {
            let mut hp = HyperParams::default();
            hp.epochs_max = epochs.unwrap_or(hp.epochs_max);
            hp.batch = batch.unwrap_or(hp.batch);
            hp.lr = lr.unwrap_or(hp.lr);
            hp.val_fraction = val_fraction.unwrap_or(hp.val_fraction);
            let manifest = CorpusManifest::load(&corpus)?;
            let (model, rep) = train_with(&manifest, &hp, seed, |e| {
                eprintln!(
                    "epoch {:>3}  loss {:.4}  train accuracy {:.4}",
                    e.epoch, e.train_loss, e.train_accuracy
                );
            })?;
            save_model(&model, &out)?;
            for s in &rep.skipped {
                eprintln!("skipped {s}");
            }
            println!("epochs run:             {}", rep.epochs_run);
            println!("final train accuracy:   {:.4}", rep.final_train_accuracy);
            match rep.heldout_accuracy {
                Some(a) => println!("held-out accuracy:      {a:.4} ({} items)", rep.n_val),
                None => println!("held-out accuracy:      n/a (empty validation split)"),
            }
            println!("model written to {}", out.display());
            if let Some(p) = report {
                write_file(&p, &to_json(&rep)?)?;
            }
        }
        Command::Eval { corpus, model, json } => {
            let manifest = CorpusManifest::load(&corpus)?;
            let model = load_model(&model).map_err(|e| e.at(Stage::Load))?;
            let r = evaluate(&manifest, &model)?;
            if json {
                println!("{}", to_json(&r)?);
            } else {
                println!("items: {}  overall accuracy: {:.4}", r.n, r.overall_accuracy);
                for (c, a) in &r.per_class_accuracy {
                    println!("  {c:<16} {a:.4}");
                }
                print!("{}", r.confusion_table());
                for s in &r.skipped {
                    eprintln!("skipped {s}");
                }
            }
        }
        Command::Infer {
            model,
            image,
            out,
            report,
            templates,
        } => {
            let mut pipeline = Pipeline::load(&model)?;
            if let Some(dir) = templates {
                pipeline.templates = TemplateSet::load_dir(dir).map_err(|e| e.at(Stage::Load))?;
            }
            let r = pipeline.infer_path(&image)?;
            if let Some(p) = &out {
                write_file(p, &r.artifact.code)?;
            }
            match report {
                Some(ReportFormat::Json) => println!("{}", to_json(&r)?),
                None if out.is_none() => print!("{}", r.artifact.code),
                None => {}
            }
            for w in &r.artifact.warnings {
                eprintln!("warning: {w}");
            }
        }
        Command::Roundtrip { n, seed, model, json } => {
            let pipeline = Pipeline::load(&model)?;
            let r = roundtrip(n, seed, &pipeline)?;
            if json {
                println!("{}", to_json(&r)?);
            } else {
                println!("items:              {}", r.n);
                println!("class recovery:     {:.4}", r.class_recovery_rate);
                println!("title exact:        {:.4}", r.title_exact_rate);
                println!("y label exact:      {:.4}", r.y_label_exact_rate);
                println!("legend agreement:   {:.4}", r.legend_agreement_rate);
                println!("lint pass:          {:.4}", r.lint_pass_rate);
                for f in &r.failures {
                    println!("  #{} {} seed {}: {}", f.index, f.class, f.seed, f.diffs.join("; "));
                }
            }
        }
        Command::Serve { model, port, host } => {
            let pipeline = Arc::new(Pipeline::load(&model)?);
            let rt = tokio::runtime::Runtime::new().map_err(|e| Error::Internal(format!("cannot start runtime: {e}")))?;
            rt.block_on(async {
                let listener = tokio::net::TcpListener::bind((host.as_str(), port))
                    .await
                    .map_err(|e| Error::InvalidArgument(format!("cannot bind {host}:{port}: {e}")))?;
                let addr = listener.local_addr().map_err(|e| Error::Internal(e.to_string()))?;
                eprintln!("listening on http://{addr}");
                server::serve(listener, pipeline)
                    .await
                    .map_err(|e| Error::Internal(format!("server error: {e}")))
            })?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::from(EXIT_OK as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
