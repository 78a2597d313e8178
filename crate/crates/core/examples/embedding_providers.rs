//! The two embedding sources: seeded feature hashing and precomputed vectors
//! read from JSON lines.
//!
//!     cargo run --example embedding_providers

use hybrid_subjectivity::embeddings::{EmbeddingFile, EmbeddingProvider, EmbeddingSelector, HashEmbedder};

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let hash = HashEmbedder::new(256, 0)?;
    let pairs = [
        ("the old man walked home", "the old man walked home slowly"),
        ("the old man walked home", "prices rose sharply in March"),
    ];
    for (x, y) in pairs {
        let c = cosine(&hash.embed("x", x)?, &hash.embed("y", y)?);
        println!("{:.3}  {x:?} vs {y:?}", c);
    }

    let file = EmbeddingFile::load(
        "{\"id\": \"s1\", \"vector\": [0.6, 0.8]}\n{\"id\": \"s2\", \"vector\": [1.0, 0.0]}\n".as_bytes(),
    )?
    .with_name("toy");
    println!(
        "{} vectors of width {}; s1 = {:?}",
        file.len(),
        file.dim(),
        file.embed("s1", "")?
    );
    println!("unknown id: {}", file.embed("s9", "").unwrap_err());

    let selector: EmbeddingSelector = "hash:768:1".parse()?;
    println!("selector {selector} builds a {}-wide provider", selector.build()?.dim());
    Ok(())
}
