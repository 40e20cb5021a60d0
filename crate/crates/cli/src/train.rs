use glitter_core::backends::tokenizer::words;
use glitter_core::backends::{NgramModel, Smoothing, TrainError, TrainOptions};
use glitter_core::info::LogBase;

use crate::args::TrainArgs;
use crate::{read_input, Failure};

pub fn run(args: &TrainArgs) -> Result<(), Failure> {
    let opts = TrainOptions {
        order: args.order,
        discount: args.discount,
        unk_threshold: args.unk_threshold,
        smoothing: if args.mle { Smoothing::Mle } else { Smoothing::KneserNey },
    };
    let mut text = String::new();
    for path in &args.corpus {
        text.push_str(&read_input(Some(path))?);
        text.push('\n');
    }
    let model = NgramModel::train_from_text(&text, &opts).map_err(|e| match e {
        TrainError::EmptyCorpus => Failure::Input(e.to_string()),
        TrainError::InvalidOrder(_) | TrainError::InvalidDiscount(_) => Failure::Usage(e.to_string()),
    })?;
    std::fs::write(&args.out, model.to_bytes()).map_err(|e| Failure::Input(format!("cannot write {}: {e}", args.out.display())))?;
    println!("model_id\t{}", glitter_core::backends::Backend::model_id(&model));
    println!("vocab_size\t{}", model.vocab_size());
    println!("token_count\t{}", model.token_count());
    if let Some(path) = &args.heldout {
        let heldout = read_input(Some(path))?;
        let sentences = heldout.lines().filter(|l| !l.trim().is_empty()).map(words);
        match model.perplexity(sentences, LogBase::BITS) {
            Some(ppl) => println!("heldout_perplexity\t{}", glitter_core::render::structured::format_float(ppl)),
            None => println!("heldout_perplexity\tinf"),
        }
    }
    Ok(())
}
