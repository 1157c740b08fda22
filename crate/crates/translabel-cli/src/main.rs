//! Command-line frontend over the translabel library.
//!
//! Data flows through standard output or `-o`; summaries go to standard
//! error so pipelines compose. Exit codes: 0 success, 1 usage, 2 data
//! error, 3 invariant violation.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use translabel::eval::{label_accuracy, score_with, ScoreOptions};
use translabel::labeling::{
    decode_corpus, encode_corpus, flatten, label_vocabulary, labeled_sentence, read_label_file,
    read_label_file_str, LabelSequence, LabeledSentence, OnNonProjective,
};
use translabel::parallel::set_jobs;
use translabel::systems::SystemId;
use translabel::tagger::{train, TaggerModel};
use translabel::transition::verify_left_to_right;
use translabel::treebank::{read_conllu, write_conllu, DepTree};

#[derive(Parser)]
#[command(name = "translabel", version, about = "Dependency parsing as sequence labeling")]
struct Cli {
    /// Worker threads for corpus passes (default: all cores)
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    jobs: Option<u32>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a CoNLL-U treebank as one label per token
    Encode(EncodeArgs),
    /// Decode a label file back into CoNLL-U trees
    Decode(DecodeArgs),
    /// Check oracle traces: one read per token, minimal lookahead
    Verify(VerifyArgs),
    /// Tally the label vocabularies of a treebank
    Stats(StatsArgs),
    /// Train the perceptron tagger on a gold treebank
    Train(TrainArgs),
    /// Predict labels for a treebank with a trained model
    Predict(PredictArgs),
    /// Score predictions against gold trees or gold labels
    Eval(EvalArgs),
    /// Encode then decode a treebank and require a perfect score
    Roundtrip(RoundtripArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NonProjectivePolicy {
    /// Drop non-projective sentences and count them
    Skip,
    /// Abort on the first non-projective sentence
    Fail,
}

impl From<NonProjectivePolicy> for OnNonProjective {
    fn from(policy: NonProjectivePolicy) -> Self {
        match policy {
            NonProjectivePolicy::Skip => OnNonProjective::Skip,
            NonProjectivePolicy::Fail => OnNonProjective::Fail,
        }
    }
}

#[derive(Args)]
struct EncodeArgs {
    /// Transition system: arc-standard, arc-eager, arc-hybrid or covington
    #[arg(long)]
    system: SystemId,
    #[arg(long, value_enum, default_value = "skip")]
    on_nonprojective: NonProjectivePolicy,
    /// Output label file ("-" for stdout)
    #[arg(short, long, default_value = "-")]
    output: String,
    /// Input CoNLL-U file ("-" for stdin)
    #[arg(default_value = "-")]
    input: String,
}

#[derive(Args)]
struct DecodeArgs {
    /// Must match the label file's own header
    #[arg(long)]
    system: SystemId,
    #[arg(short, long, default_value = "-")]
    output: String,
    /// Input label file ("-" for stdin)
    #[arg(default_value = "-")]
    input: String,
}

#[derive(Args)]
struct VerifyArgs {
    /// Transition system: arc-standard, arc-eager, arc-hybrid or covington
    #[arg(long)]
    system: SystemId,
    #[arg(long, value_enum, default_value = "skip")]
    on_nonprojective: NonProjectivePolicy,
    #[arg(default_value = "-")]
    input: String,
}

#[derive(Args)]
struct StatsArgs {
    /// Transition system: arc-standard, arc-eager, arc-hybrid or covington
    #[arg(long)]
    system: SystemId,
    #[arg(short, long, default_value = "-")]
    output: String,
    #[arg(default_value = "-")]
    input: String,
}

#[derive(Args)]
struct TrainArgs {
    /// Transition system: arc-standard, arc-eager, arc-hybrid or covington
    #[arg(long)]
    system: SystemId,
    #[arg(long, value_enum, default_value = "skip")]
    on_nonprojective: NonProjectivePolicy,
    /// Passes over the shuffled training data
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..))]
    epochs: u32,
    /// Shuffling seed; equal seeds give byte-identical models
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output model file ("-" for stdout)
    #[arg(short, long, default_value = "-")]
    output: String,
    /// Gold CoNLL-U training data ("-" for stdin)
    #[arg(default_value = "-")]
    input: String,
}

#[derive(Args)]
struct PredictArgs {
    /// Trained model file
    #[arg(long)]
    model: String,
    /// Optional cross-check against the model's own system
    #[arg(long)]
    system: Option<SystemId>,
    /// Decode the predictions and emit CoNLL-U instead of labels
    #[arg(long)]
    decode: bool,
    #[arg(short, long, default_value = "-")]
    output: String,
    /// Input CoNLL-U file; heads may be unannotated ("_")
    #[arg(default_value = "-")]
    input: String,
}

#[derive(Args)]
struct EvalArgs {
    /// Exclude tokens whose gold UPOS is PUNCT
    #[arg(long)]
    ignore_punct: bool,
    /// Gold file: CoNLL-U or labels
    gold: String,
    /// Predicted file of the same kind
    predicted: String,
}

#[derive(Args)]
struct RoundtripArgs {
    /// Transition system: arc-standard, arc-eager, arc-hybrid or covington
    #[arg(long)]
    system: SystemId,
    #[arg(long, value_enum, default_value = "skip")]
    on_nonprojective: NonProjectivePolicy,
    #[arg(default_value = "-")]
    input: String,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(error) => {
            let code = u8::from(error.use_stderr());
            let _ = error.print();
            return ExitCode::from(code);
        }
    };
    env_logger::Builder::from_env(env_logger::Env::new().filter("TRANSLABEL_LOG"))
        .format_timestamp(None)
        .init();
    if let Some(jobs) = cli.jobs {
        if let Err(message) = set_jobs(jobs as usize) {
            log::warn!("could not size the worker pool: {message}");
        }
    }
    match run(cli.command) {
        Ok(code) => code,
        Err(error) => {
            eprintln!("error: {error:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Encode(args) => cmd_encode(args),
        Command::Decode(args) => cmd_decode(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Stats(args) => cmd_stats(args),
        Command::Train(args) => cmd_train(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Roundtrip(args) => cmd_roundtrip(args),
    }
}

fn open_input(path: &str) -> Result<Box<dyn BufRead>> {
    if path == "-" {
        return Ok(Box::new(io::stdin().lock()));
    }
    let file = File::open(path).with_context(|| format!("opening {path}"))?;
    Ok(Box::new(BufReader::new(file)))
}

fn open_output(path: &str) -> Result<Box<dyn Write>> {
    if path == "-" {
        return Ok(Box::new(io::stdout().lock()));
    }
    let file = File::create(path).with_context(|| format!("creating {path}"))?;
    Ok(Box::new(BufWriter::new(file)))
}

fn read_trees(path: &str) -> Result<Vec<DepTree>> {
    read_conllu(open_input(path)?).with_context(|| format!("reading treebank {path}"))
}

fn read_text(path: &str) -> Result<String> {
    let mut text = String::new();
    open_input(path)?.read_to_string(&mut text).with_context(|| format!("reading {path}"))?;
    Ok(text)
}

/// Pairs each kept sentence with its tree for label-file output.
fn kept_sentences(
    trees: &[DepTree],
    kept: &[usize],
    sequences: &[LabelSequence],
) -> Vec<LabeledSentence> {
    kept.iter().zip(sequences).map(|(&i, sequence)| labeled_sentence(&trees[i], sequence)).collect()
}

fn cmd_encode(args: EncodeArgs) -> Result<ExitCode> {
    let trees = read_trees(&args.input)?;
    let encoding = encode_corpus(args.system, &trees, args.on_nonprojective.into())?;
    let sentences = kept_sentences(&trees, &encoding.kept, &encoding.sequences);
    let mut writer = open_output(&args.output)?;
    translabel::labeling::write_label_file(&mut writer, args.system, &sentences)?;
    writer.flush()?;
    let mut transition_labels = BTreeSet::new();
    let mut deprels = BTreeSet::new();
    for sequence in &encoding.sequences {
        for label in &sequence.labels {
            transition_labels.insert(label.transition_part());
            deprels.insert(label.deprel.clone());
        }
    }
    eprintln!(
        "encoded {} sentences ({} skipped as non-projective); {} transition labels, {} deprels",
        encoding.kept.len(),
        encoding.skipped.len(),
        transition_labels.len(),
        deprels.len()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_decode(args: DecodeArgs) -> Result<ExitCode> {
    let (header_system, sentences) = read_label_file(open_input(&args.input)?)
        .with_context(|| format!("reading label file {}", args.input))?;
    if header_system != args.system {
        bail!("label file declares system {header_system}, but {} was requested", args.system);
    }
    let (trees, stats) = decode_corpus(args.system, &sentences);
    let mut writer = open_output(&args.output)?;
    write_conllu(&mut writer, &trees)?;
    writer.flush()?;
    eprintln!("decoded {} sentences with {} repaired actions", trees.len(), stats.repairs());
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode> {
    let trees = read_trees(&args.input)?;
    let encoding = encode_corpus(args.system, &trees, args.on_nonprojective.into())?;
    let lookahead = args.system.lookahead();
    let mut passed = 0usize;
    let mut max_k = 0usize;
    for sequence in &encoding.sequences {
        let report =
            verify_left_to_right(args.system, sequence.labels.len(), &flatten(sequence), lookahead)
                .context("oracle trace failed to replay")?;
        if report.condition1 && report.condition2 {
            passed += 1;
        }
        max_k = max_k.max(report.minimal_k);
    }
    let total = encoding.sequences.len();
    let rate = if total == 0 { 100.0 } else { 100.0 * passed as f64 / total as f64 };
    println!(
        "system={} sentences={} skipped={} condition1_rate={:.2} minimal_k={} documented_k={}",
        args.system,
        total,
        encoding.skipped.len(),
        rate,
        max_k,
        lookahead
    );
    if passed != total || max_k > lookahead {
        eprintln!("verification failed: {passed}/{total} sentences passed, minimal k {max_k}");
        return Ok(ExitCode::from(3));
    }
    eprintln!("verified {total} sentences");
    Ok(ExitCode::SUCCESS)
}

fn cmd_stats(args: StatsArgs) -> Result<ExitCode> {
    let trees = read_trees(&args.input)?;
    let report = label_vocabulary(args.system, &trees);
    let mut writer = open_output(&args.output)?;
    for (label, count) in &report.transition_labels {
        writeln!(writer, "transition\t{label}\t{count}")?;
    }
    for (deprel, count) in &report.deprels {
        writeln!(writer, "deprel\t{deprel}\t{count}")?;
    }
    writer.flush()?;
    eprintln!(
        "system={} transition_labels={} deprels={} encoded={} skipped={}",
        report.system,
        report.transition_label_count(),
        report.deprel_count(),
        report.sentences_encoded,
        report.sentences_skipped
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_train(args: TrainArgs) -> Result<ExitCode> {
    let trees = read_trees(&args.input)?;
    let encoding = encode_corpus(args.system, &trees, args.on_nonprojective.into())?;
    let pairs: Vec<(&DepTree, &LabelSequence)> = encoding
        .kept
        .iter()
        .zip(&encoding.sequences)
        .map(|(&i, sequence)| (&trees[i], sequence))
        .collect();
    let model = train(&pairs, args.epochs, args.seed)?;
    let mut writer = open_output(&args.output)?;
    model.save(&mut writer)?;
    writer.flush()?;
    eprintln!(
        "trained on {} sentences ({} skipped), {} epochs, seed {}",
        pairs.len(),
        encoding.skipped.len(),
        args.epochs,
        args.seed
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_predict(args: PredictArgs) -> Result<ExitCode> {
    let model = TaggerModel::load(open_input(&args.model)?)
        .with_context(|| format!("loading model {}", args.model))?;
    if let Some(requested) = args.system {
        if requested != model.system() {
            bail!("model was trained for {}, not {requested}", model.system());
        }
    }
    let trees = read_trees(&args.input)?;
    let sequences = model.predict_corpus(&trees);
    let sentences: Vec<LabeledSentence> = trees
        .iter()
        .zip(&sequences)
        .map(|(tree, sequence)| labeled_sentence(tree, sequence))
        .collect();
    let mut writer = open_output(&args.output)?;
    if args.decode {
        let (decoded, stats) = decode_corpus(model.system(), &sentences);
        write_conllu(&mut writer, &decoded)?;
        writer.flush()?;
        eprintln!(
            "predicted and decoded {} sentences with {} repaired actions",
            decoded.len(),
            stats.repairs()
        );
    } else {
        translabel::labeling::write_label_file(&mut writer, model.system(), &sentences)?;
        writer.flush()?;
        eprintln!("predicted labels for {} sentences", sentences.len());
    }
    Ok(ExitCode::SUCCESS)
}

fn looks_like_label_file(text: &str) -> bool {
    text.lines().next().is_some_and(|line| line.trim_end().starts_with("# system ="))
}

fn cmd_eval(args: EvalArgs) -> Result<ExitCode> {
    let gold_text = read_text(&args.gold)?;
    let predicted_text = read_text(&args.predicted)?;
    let gold_is_labels = looks_like_label_file(&gold_text);
    if gold_is_labels != looks_like_label_file(&predicted_text) {
        bail!("cannot compare a label file with a treebank");
    }
    if gold_is_labels {
        let (gold_system, gold) = read_label_file_str(&gold_text)
            .with_context(|| format!("reading label file {}", args.gold))?;
        let (predicted_system, predicted) = read_label_file_str(&predicted_text)
            .with_context(|| format!("reading label file {}", args.predicted))?;
        if gold_system != predicted_system {
            bail!("label files use different systems: {gold_system} vs {predicted_system}");
        }
        let report = label_accuracy(&gold, &predicted)?;
        println!("tokens                 {}", report.tokens);
        println!("transition accuracy    {:.2}", report.transition_accuracy);
        println!("deprel accuracy        {:.2}", report.deprel_accuracy);
        println!(
            "tokens={} transition_accuracy={:.2} deprel_accuracy={:.2}",
            report.tokens, report.transition_accuracy, report.deprel_accuracy
        );
    } else {
        let gold = translabel::treebank::read_conllu_str(&gold_text)
            .with_context(|| format!("reading treebank {}", args.gold))?;
        let predicted = translabel::treebank::read_conllu_str(&predicted_text)
            .with_context(|| format!("reading treebank {}", args.predicted))?;
        let options = ScoreOptions { ignore_punct: args.ignore_punct };
        let report = score_with(&gold, &predicted, options)?;
        println!("sentences        {}", report.sentences);
        println!("tokens           {}", report.tokens);
        println!("correct heads    {}", report.correct_heads);
        println!("correct labeled  {}", report.correct_labeled);
        println!("UAS              {:.2}", report.uas);
        println!("LAS              {:.2}", report.las);
        println!(
            "sentences={} tokens={} uas={:.2} las={:.2}",
            report.sentences, report.tokens, report.uas, report.las
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_roundtrip(args: RoundtripArgs) -> Result<ExitCode> {
    let trees = read_trees(&args.input)?;
    let encoding = encode_corpus(args.system, &trees, args.on_nonprojective.into())?;
    let kept: Vec<DepTree> = encoding.kept.iter().map(|&i| trees[i].clone()).collect();
    let sentences = kept_sentences(&trees, &encoding.kept, &encoding.sequences);
    let (decoded, stats) = decode_corpus(args.system, &sentences);
    let report = score_with(&kept, &decoded, ScoreOptions::default())?;
    println!(
        "system={} sentences={} skipped={} uas={:.2} las={:.2} repairs={}",
        args.system,
        kept.len(),
        encoding.skipped.len(),
        report.uas,
        report.las,
        stats.repairs()
    );
    if report.uas != 100.0 || report.las != 100.0 {
        eprintln!("round trip failed: UAS {:.2}, LAS {:.2}", report.uas, report.las);
        return Ok(ExitCode::from(3));
    }
    eprintln!("round trip exact over {} sentences", kept.len());
    Ok(ExitCode::SUCCESS)
}
