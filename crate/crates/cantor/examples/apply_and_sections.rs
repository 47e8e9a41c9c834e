//! Applying automorphisms and reading off their sections.
//!
//! The adding machine shows digit-by-digit application with carries; the
//! four-generator torsion action shows how an element decomposes into a root
//! permutation and one section per child, and how few distinct sections a
//! finite-state element can have.

use cantor::catalog::{build_example, ExampleParams};
use cantor::word::parse_digits;
use cantor::{Letter, Limits, Vertex};

fn main() -> cantor::Result<()> {
    let limits = Limits::default();

    // The adding machine sends a vertex (read least-significant digit first)
    // to its successor modulo the level size.
    let odo = build_example("odometer", &ExampleParams::default())?;
    let a = odo.generator("a").expect("the entry has one generator");
    println!("adding machine on the binary tree:");
    for digits in [vec![0, 0, 0], vec![1, 1, 0], vec![1, 1, 1]] {
        let v = Vertex::new(&odo.index, digits)?;
        println!("  a . {v} = {}", a.apply_vertex(&v)?);
    }

    // Words apply rightmost letter first; "a a a" is +3.
    let word = vec![Letter { gen: 0, inverse: false }; 3];
    let v = Vertex::new(&odo.index, parse_digits("0,0,0")?)?;
    println!(
        "  {} . {v} = {}",
        odo.action.word_to_string(&word),
        odo.action.apply_word_to_vertex(&word, &v)?
    );

    // The recursion b = (a, c): the section of b at child 0 acts like a, the
    // section at child 1 acts like c, and the root permutation is trivial.
    let grig = build_example("grigorchuk", &ExampleParams::default())?;
    let b = grig.generator("b").expect("entry has b");
    let c = grig.generator("c").expect("entry has c");
    let left = b.section(&Vertex::new(&grig.index, vec![0])?)?;
    let right = b.section(&Vertex::new(&grig.index, vec![1])?)?;
    println!("\nwreath recursion of the torsion action:");
    println!(
        "  b's section at (0) equals a: {}",
        left.equal_to_depth(grig.generator("a").unwrap(), 10, &limits)?
    );
    println!("  b's section at (1) equals c: {}", right.equal_to_depth(c, 10, &limits)?);

    // Every section of b, at every vertex, is one of finitely many elements.
    let closure = b.section_closure(16, 16, &limits)?;
    println!("  b has {} distinct sections in its closure:", closure.len());
    for (vertex, _) in &closure.sections {
        println!("    first reached at {vertex}");
    }
    Ok(())
}
