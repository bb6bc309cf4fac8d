//! Interpreting diagrams in a commutative monoid and in diagrams themselves.
use std::sync::Arc;

use physduo::eval::{eval_diagram, eval_diagram_along};
use physduo::{DiagramBuilder, SelfAlgebra, Signature, WeightAlgebra};

fn main() {
    let sig = Arc::new(Signature::parse("type A B C\ngen f : A -> B\ngen g : B -> A * C\ngen h : A * B -> C").unwrap());
    let mut b = DiagramBuilder::new(&sig, "A > B".parse().unwrap());
    b.apply("f", &[0]).unwrap();
    b.apply("g", &[1]).unwrap();
    let d = b.finish().unwrap();
    println!("{} -> {}", d.source(), d.target());

    let weights = WeightAlgebra::product([("f".to_string(), 2), ("g".to_string(), 3), ("h".to_string(), 5)]);
    for order in d.all_node_orders().unwrap() {
        println!("weight along {order:?}: {}", eval_diagram_along(&weights, &d, &order).unwrap());
    }
    let back = eval_diagram(&SelfAlgebra::new(&sig), &d).unwrap();
    println!("self-interpretation equals the diagram: {}", back.equal(&d));
}
