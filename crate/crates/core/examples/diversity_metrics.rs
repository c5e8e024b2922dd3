//! Semantic, lexical and syntactic diversity of one small group of stories.

use credal::diversity::{lexical_diversity, semantic_diversity, syntactic_diversity};
use credal::features::{build_pos_bigrams, build_vocab};

fn main() -> credal::Result<()> {
    let stories = [
        ("The lighthouse keeper counted ships until dawn.", vec!["DET", "NOUN", "NOUN", "VERB", "NOUN", "ADP", "NOUN"]),
        ("A keeper of lights watched the grey sea.", vec!["DET", "NOUN", "ADP", "NOUN", "VERB", "DET", "ADJ", "NOUN"]),
        ("Nobody remembered why the tower was built.", vec!["PRON", "VERB", "ADV", "DET", "NOUN", "AUX", "VERB"]),
    ];
    // stand-ins for sentence embeddings
    let embeddings = [vec![0.9, 0.1, 0.2], vec![0.8, 0.3, 0.1], vec![0.1, 0.9, 0.4]];

    let vocabs: Vec<_> = stories.iter().map(|(text, _)| build_vocab(text)).collect();
    let bigrams: Vec<_> = stories.iter().map(|(_, tags)| build_pos_bigrams(tags)).collect();
    let emb: Vec<&[f64]> = embeddings.iter().map(Vec::as_slice).collect();

    println!("semantic  {:.4}", semantic_diversity(&emb)?);
    println!("lexical   {:.4}", lexical_diversity(&vocabs.iter().collect::<Vec<_>>())?);
    println!("syntactic {:.4}", syntactic_diversity(&bigrams.iter().collect::<Vec<_>>())?);
    Ok(())
}
