//! TF-IDF cosine between item descriptions, used to compare two users whose
//! rated items barely overlap.
//!
//! Run with `cargo run --example text_profiles`.

use strapsim::constituent::{tfidf_cosine_matrix, TfidfIndex};
use strapsim::metrics::{bertscore_like, jaccard, strapsim};
use strapsim::{align_matrix, WeightedSet};

fn main() -> strapsim::Result<()> {
    let docs = [
        ("m1", "space crew stranded on a distant planet survival"),
        ("m2", "astronaut survival on mars after a storm"),
        ("m3", "romantic comedy in paris"),
        ("m4", "a love story in a small paris cafe"),
        ("m5", "heist crew plans one last job"),
    ];
    let index = TfidfIndex::build(docs.iter().map(|(id, text)| (id.to_string(), *text)))?;
    let ids: Vec<&str> = docs.iter().map(|d| d.0).collect();
    let s = tfidf_cosine_matrix(&index, &ids)?;

    // ratings act as weights
    let alice = WeightedSet::new("alice", [("m1", 5.0), ("m3", 2.0)], false)?;
    let bob = WeightedSet::new("bob", [("m2", 4.5), ("m4", 2.5), ("m5", 3.0)], false)?;

    let aligned = align_matrix(&s, &alice, &bob)?;
    let greedy = strapsim(&alice, &bob, &aligned)?;
    println!("jaccard   {:.3}", jaccard(&alice, &bob).score);
    println!("bertscore {:.3}", bertscore_like(&alice, &bob, &aligned)?.score);
    println!("strapsim  {:.3} (residual {:.2} rating points)", greedy.total_score, greedy.total_residual);
    for step in &greedy.steps {
        println!(
            "  {} -> {}: cosine {:.3}, moved {:.1}",
            alice.ids()[step.row],
            bob.ids()[step.col],
            step.score,
            step.mass
        );
    }
    Ok(())
}
