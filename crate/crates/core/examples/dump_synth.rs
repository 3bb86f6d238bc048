use candela_core::corpus::{build_index, formulate_queries, ingest, retrieve, segment};
use candela_core::ranker::{merge_dedup, stance_score, StanceTargets};
use candela_core::synth::{records_to_jsonl, synth_debate, synth_records};
use candela_core::textproc::{
    builtin_gazetteer, builtin_relation_lexicon, builtin_sentiment_lexicon, expand_terms,
    extract_keyphrases, topic_signatures, Tagger, TokenCounts, Tokenizer, WordVectors,
};

fn main() {
    let n = 120;
    let records = synth_records(11, n);
    let jsonl = records_to_jsonl(&records);
    let (stmt, arg) = synth_debate(3);

    let tokenizer = Tokenizer::builtin();
    let tagger = Tagger::builtin();
    let (articles, _) = ingest(jsonl.lines(), &tokenizer, 30);
    let mut passages = Vec::new();
    for a in &articles {
        passages.extend(segment(a, 3, 2, 15));
    }
    let mut bg = TokenCounts::default();
    for p in &passages {
        bg.merge(&TokenCounts::from_tokens(&p.tokens));
    }
    let index = build_index(passages, 1.2, 0.75).unwrap();

    let mut sents = tokenizer.split_sentences(&stmt);
    for s in &mut sents {
        tagger.tag(&mut s.tokens);
    }
    let toks: Vec<_> = sents.iter().flat_map(|s| s.tokens.iter().cloned()).collect();
    let fg = TokenCounts::from_tokens(&toks);
    let sigs = topic_signatures(&fg, &bg, 0.5);
    let sig_words: std::collections::BTreeSet<String> =
        sigs.iter().map(|s| s.word.clone()).collect();
    println!("signature words: {sig_words:?}");
    let expanded = expand_terms(&sigs, &builtin_relation_lexicon());
    println!("expanded: {expanded:?}");

    let kps = extract_keyphrases(
        &sents,
        &expanded,
        &builtin_gazetteer(),
        &WordVectors::new(50),
    )
    .unwrap();
    for kp in &kps {
        println!("keyphrase: {:?} ({:?})", kp.words, kp.kind);
    }
    let targets = StanceTargets::new(
        kps.iter().map(|k| k.words.clone()).collect(),
        builtin_sentiment_lexicon(),
    );
    let stmt_q = stance_score(&toks, &targets);
    println!("statement q = {stmt_q}");

    let queries = formulate_queries(&sents);
    let mut groups = Vec::new();
    for q in &queries {
        for m in ["news", "debate"] {
            groups.push(retrieve(&index, q, 8, m));
        }
    }
    let merged = merge_dedup(groups);
    println!("retrieved {}", merged.len());
    let mut nonzero = 0;
    for sp in &merged {
        let q = stance_score(&sp.passage.tokens, &targets);
        if q != 0.0 {
            nonzero += 1;
        }
        println!("  {} score {:.3} stance {:+.4}", sp.passage.id(), sp.score, q);
    }
    println!("nonzero stance: {nonzero}/{}", merged.len());
    let _ = arg;
}
