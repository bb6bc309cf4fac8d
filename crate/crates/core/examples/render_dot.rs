//! Graphviz and JSON output for a small diagram.
use std::sync::Arc;

use physduo::{Signature, StringDiagram};

fn main() {
    let sig = Arc::new(Signature::parse("type X Y B C\ngen f : X * Y -> B > C").unwrap());
    let f = StringDiagram::from_generator(&sig, "f").unwrap();
    println!("{}", f.to_dot(true));
    println!("{}", f.to_json_string());
}
