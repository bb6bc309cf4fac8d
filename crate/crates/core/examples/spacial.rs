//! Scalars slide freely: placing a scalar before or after a wire gives the
//! same diagram.
use std::sync::Arc;

use physduo::{Expression, Signature, StringDiagram};

fn main() {
    let sig = Arc::new(Signature::parse("type A\ngen alpha : N -> N").unwrap());
    let a: Expression = "A".parse().unwrap();
    let id = StringDiagram::identity(&sig, &a);
    let alpha = StringDiagram::from_generator(&sig, "alpha").unwrap();
    let before = id.sequence(&alpha).unwrap();
    let after = alpha.sequence(&id).unwrap();
    println!("id > alpha == alpha > id: {}", before.equal(&after));
    println!("id > alpha == id:         {}", before.equal(&id));
}
