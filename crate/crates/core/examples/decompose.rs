//! Splitting a diagram into atomic pieces, including one whose intermediate
//! wire order is not zetless.
use std::sync::Arc;

use physduo::{DiagramBuilder, Signature};

fn main() {
    let sig = Arc::new(Signature::parse("type A B C D E F X\ngen g : B * D -> X\ngen k : C -> C").unwrap());
    let mut b = DiagramBuilder::new(&sig, "(A > (B * C)) * ((D * E) > F)".parse().unwrap());
    b.apply("g", &[1, 3]).unwrap();
    b.apply("k", &[2]).unwrap();
    let d = b.finish().unwrap();
    println!("{} -> {}", d.source(), d.target());

    let k = d.generator_nodes()[1];
    let (_, level) = d.level_before(k).unwrap();
    println!("wires before k: {level} (zigzag {:?})", level.find_zigzag());

    let dec = d.decompose().unwrap();
    println!("entry: {} -> {}", dec.entry.source(), dec.entry.target());
    for a in &dec.atomics {
        println!("atomic: {} -> {}", a.source(), a.target());
    }
    println!("exit:  {} -> {}", dec.exit.source(), dec.exit.target());
    println!("recomposes: {}", dec.recompose().unwrap().equal(&d));
}
