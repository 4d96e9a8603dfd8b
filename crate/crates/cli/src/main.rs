use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use conceptvec::eval::{self, DatasetLayout};
use conceptvec::normalize::{self, InputLayout, NormalizationRules};
use conceptvec::pairgen::{self, ConceptMap, PairFile, PairGenConfig};
use conceptvec::pipeline::{self, RunConfig, StageError};
use conceptvec::sgns::{self, TrainConfig};
use conceptvec::vectors::{self, VectorFormat};
use conceptvec::{neighbors, Error, ErrorKind};

#[derive(Parser)]
#[command(name = "conceptvec", version, about = "Word embeddings over arbitrary contexts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Normalize raw notes into a token-per-space corpus.
    Normalize {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// TOML file with normalization rules.
        #[arg(long)]
        rules: Option<PathBuf>,
        /// Input rows are `id<delimiter>text` instead of one note per line.
        #[arg(long)]
        delimiter: Option<char>,
    },
    /// Generate (word, context) training pairs.
    Pairs {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Two-column word/concept file; enables ontology pairs.
        #[arg(long)]
        concepts: Option<PathBuf>,
        #[arg(long, default_value_t = '\t')]
        concepts_delimiter: char,
        #[arg(long, default_value_t = 5)]
        min_count: u64,
        #[arg(long, default_value_t = 1e-4)]
        subsample: f64,
        #[arg(long, default_value_t = 8)]
        window: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Train embeddings on a pair file.
    Train {
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value = "text")]
        format: VectorFormat,
        /// Also write the context matrix here.
        #[arg(long)]
        contexts_output: Option<PathBuf>,
        #[command(flatten)]
        train: TrainArgs,
    },
    /// Score vectors against similarity judgments.
    Eval {
        #[arg(long)]
        vectors: PathBuf,
        #[arg(long, default_value = "text")]
        format: VectorFormat,
        /// Judgment file; repeat for several datasets.
        #[arg(long, required = true)]
        dataset: Vec<PathBuf>,
        /// One layout for all datasets, or one per dataset.
        #[arg(long, default_value = "generic")]
        dataset_layout: Vec<DatasetLayout>,
        /// Score column header, overriding the layout's default.
        #[arg(long)]
        score_column: Vec<String>,
        /// Row label in the printed table.
        #[arg(long, default_value = "model")]
        model_name: String,
        #[arg(long)]
        report: PathBuf,
        /// TOML file with the normalization rules used for the corpus.
        #[arg(long)]
        rules: Option<PathBuf>,
    },
    /// Print the nearest neighbours of a word.
    Neighbors {
        #[arg(long)]
        vectors: PathBuf,
        #[arg(long, default_value = "text")]
        format: VectorFormat,
        #[arg(long)]
        query: String,
        #[arg(long, default_value_t = 10)]
        k: usize,
    },
    /// Run normalize, pairs, train and eval from a config file.
    Pipeline {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
        #[arg(long)]
        min_count: Option<u64>,
        #[arg(long)]
        subsample: Option<f64>,
        #[arg(long)]
        window: Option<usize>,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        negatives: Option<usize>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        workers: Option<usize>,
    },
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long, default_value_t = 300)]
    dim: usize,
    #[arg(long, default_value_t = 8)]
    negatives: usize,
    #[arg(long, default_value_t = 5)]
    epochs: usize,
    #[arg(long, default_value_t = 0.025)]
    alpha: f64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    shuffle: bool,
}

impl TrainArgs {
    fn config(&self) -> TrainConfig {
        TrainConfig {
            dim: self.dim,
            negatives: self.negatives,
            epochs: self.epochs,
            alpha: self.alpha,
            seed: self.seed,
            workers: self.workers,
            shuffle: self.shuffle,
            ..Default::default()
        }
    }
}

enum Failure {
    Usage(String),
    Lib(Error),
    Stage(StageError),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        let kind = match self {
            Failure::Usage(_) => ErrorKind::Usage,
            Failure::Lib(e) => e.kind(),
            Failure::Stage(e) => e.kind(),
        };
        match kind {
            ErrorKind::Usage => 1,
            ErrorKind::Data => 2,
            ErrorKind::Internal => 3,
        }
    }
}

fn input_file(flag: &str, path: &Path) -> Result<(), Failure> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Failure::Usage(format!("{flag}: no such file {}", path.display())))
    }
}

fn output_file(flag: &str, path: &Path) -> Result<(), Failure> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => Err(Failure::Usage(format!(
            "{flag}: directory {} does not exist",
            dir.display()
        ))),
        _ => Ok(()),
    }
}

fn load_rules(path: Option<&Path>) -> Result<NormalizationRules, Failure> {
    match path {
        Some(p) => {
            input_file("--rules", p)?;
            Ok(NormalizationRules::from_toml_file(p)?)
        }
        None => Ok(NormalizationRules::default()),
    }
}

fn broadcast<T: Clone>(flag: &str, values: &[T], n: usize) -> Result<Vec<Option<T>>, Failure> {
    match values.len() {
        0 => Ok(vec![None; n]),
        1 => Ok(vec![Some(values[0].clone()); n]),
        m if m == n => Ok(values.iter().cloned().map(Some).collect()),
        m => Err(Failure::Usage(format!(
            "{flag}: given {m} times for {n} datasets; give it once or once per dataset"
        ))),
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Normalize {
            input,
            output,
            rules,
            delimiter,
        } => {
            input_file("--input", &input)?;
            output_file("--output", &output)?;
            let rules = load_rules(rules.as_deref())?;
            let layout = delimiter.map_or(InputLayout::Lines, InputLayout::Delimited);
            let (docs, tokens) = normalize::normalize_file(&input, &output, layout, &rules)?;
            log::info!("normalized {docs} documents into {tokens} tokens");
        }

        Command::Pairs {
            corpus,
            output,
            concepts,
            concepts_delimiter,
            min_count,
            subsample,
            window,
            seed,
        } => {
            input_file("--corpus", &corpus)?;
            output_file("--output", &output)?;
            let concepts = match &concepts {
                Some(path) => {
                    input_file("--concepts", path)?;
                    Some(ConceptMap::from_file(path, concepts_delimiter)?)
                }
                None => None,
            };
            let config = PairGenConfig {
                min_count,
                subsample_t: subsample,
                max_window: window,
                seed,
                inject_ontology: concepts.is_some(),
            };
            config.validate()?;
            let manifest = pairgen::write_pair_file(&corpus, concepts.as_ref(), &config, &output)?;
            log::info!(
                "wrote {} word pairs and {} ontology pairs",
                manifest.word_pairs,
                manifest.ontology_pairs
            );
        }

        Command::Train {
            pairs,
            output,
            format,
            contexts_output,
            train,
        } => {
            input_file("--pairs", &pairs)?;
            output_file("--output", &output)?;
            if let Some(p) = &contexts_output {
                output_file("--contexts-output", p)?;
            }
            let config = train.config();
            config.validate()?;
            let mut source = PairFile::open(&pairs)?;
            let (words, contexts) = (source.words.clone(), source.contexts.clone());
            let (model, _) = sgns::train(&mut source, &words, &contexts, &config)?;
            vectors::write(&model.words, &output, format)?;
            if let Some(p) = contexts_output {
                vectors::write(&model.contexts, &p, format)?;
            }
        }

        Command::Eval {
            vectors: vectors_path,
            format,
            dataset,
            dataset_layout,
            score_column,
            model_name,
            report,
            rules,
        } => {
            input_file("--vectors", &vectors_path)?;
            for d in &dataset {
                input_file("--dataset", d)?;
            }
            output_file("--report", &report)?;
            let rules = load_rules(rules.as_deref())?;
            let layouts = broadcast("--dataset-layout", &dataset_layout, dataset.len())?;
            let columns = broadcast("--score-column", &score_column, dataset.len())?;

            let matrix = vectors::read(&vectors_path, format)?;
            let mut reports = Vec::with_capacity(dataset.len());
            for ((path, layout), column) in dataset.iter().zip(layouts).zip(columns) {
                let layout = layout.unwrap_or(DatasetLayout::Generic);
                let data = eval::read_dataset(path, &layout, column.as_deref())?;
                let name = path
                    .file_stem()
                    .map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
                reports.push(eval::evaluate(&name, &matrix, &data, &rules)?);
            }
            eval::write_report(&report, &model_name, &reports)?;
            print!("{}", eval::format_table(&model_name, &reports));
        }

        Command::Neighbors {
            vectors: vectors_path,
            format,
            query,
            k,
        } => {
            input_file("--vectors", &vectors_path)?;
            let matrix = vectors::read(&vectors_path, format)?;
            for (symbol, score) in neighbors::neighbors(&matrix, &query, k)? {
                println!("{symbol}\t{score:.6}");
            }
        }

        Command::Pipeline {
            config,
            seed,
            output_dir,
            min_count,
            subsample,
            window,
            dim,
            negatives,
            epochs,
            alpha,
            workers,
        } => {
            input_file("--config", &config)?;
            let mut run = RunConfig::from_file(&config)?;
            if let Some(v) = seed {
                run.seed = v;
            }
            if let Some(v) = output_dir {
                run.output_dir = v;
            }
            if let Some(v) = min_count {
                run.pairs.min_count = v;
            }
            if let Some(v) = subsample {
                run.pairs.subsample_t = v;
            }
            if let Some(v) = window {
                run.pairs.max_window = v;
            }
            if let Some(v) = dim {
                run.train.dim = v;
            }
            if let Some(v) = negatives {
                run.train.negatives = v;
            }
            if let Some(v) = epochs {
                run.train.epochs = v;
            }
            if let Some(v) = alpha {
                run.train.alpha = v;
            }
            if let Some(v) = workers {
                run.train.workers = v;
            }
            let outputs = pipeline::run_pipeline(run).map_err(Failure::Stage)?;
            if !outputs.reports.is_empty() {
                print!("{}", eval::format_table("pipeline", &outputs.reports));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            match &failure {
                Failure::Usage(msg) => eprintln!("error: {msg}"),
                Failure::Lib(e) => eprintln!("error: {e}"),
                Failure::Stage(e) => eprintln!("error: {e}"),
            }
            ExitCode::from(failure.exit_code())
        }
    }
}
