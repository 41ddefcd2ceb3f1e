use std::process::ExitCode;

use clap::{Parser, Subcommand};
use jpretrain::pipeline::{self, Command, Flags};

#[derive(Parser)]
#[command(name = "jpretrain", version, about = "Java pre-training corpus pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Clean raw method/Javadoc pairs into deduplicated records
    Clean(Flags),
    /// Train the trigram model used for replaced-token detection
    NgramTrain(Flags),
    /// Generate pre-training instances for one or more objectives
    PretrainGen(Flags),
    /// Emit every mutant of every record
    Mutate(Flags),
    /// Build a bugfix, summarization or completion dataset
    FinetuneBuild(Flags),
    /// Assign train/validation/test labels
    Split(Flags),
    /// Score one prediction file
    Eval(Flags),
    /// Pairwise statistical comparison of several prediction files
    Compare(Flags),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 4 } else { 0 });
        }
    };
    let (command, flags) = match cli.command {
        Sub::Clean(f) => (Command::Clean, f),
        Sub::NgramTrain(f) => (Command::NgramTrain, f),
        Sub::PretrainGen(f) => (Command::PretrainGen, f),
        Sub::Mutate(f) => (Command::Mutate, f),
        Sub::FinetuneBuild(f) => (Command::FinetuneBuild, f),
        Sub::Split(f) => (Command::Split, f),
        Sub::Eval(f) => (Command::Eval, f),
        Sub::Compare(f) => (Command::Compare, f),
    };
    match pipeline::run(command, &flags) {
        Ok(manifest) => {
            for (k, v) in &manifest.counts {
                eprintln!("{k}: {v}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("jpretrain {}: {e}", command.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
