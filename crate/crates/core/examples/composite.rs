//! A composite of a structure map and two generators, and its derived wire
//! order.
use std::sync::Arc;

use physduo::{Expression, Signature, StringDiagram};

fn main() {
    let sig = Arc::new(
        Signature::parse("type X Y B C A U V\ngen f : X * Y -> B > C\ngen g : A > B -> U * V").unwrap(),
    );
    let e = |s: &str| s.parse::<Expression>().unwrap();
    let head = StringDiagram::structural(&sig, &e("(A > X) * Y"), &e("A > (X * Y)")).unwrap();
    let f = StringDiagram::identity(&sig, &e("A"))
        .sequence(&StringDiagram::from_generator(&sig, "f").unwrap())
        .unwrap();
    let g = StringDiagram::from_generator(&sig, "g")
        .unwrap()
        .sequence(&StringDiagram::identity(&sig, &e("C")))
        .unwrap();
    let d = head.compose(&f).unwrap().compose(&g).unwrap();
    d.validate().unwrap();
    println!("{d}");

    let p = d.derived_poset().unwrap();
    let outs = d.output_wires();
    for &a in outs {
        for &b in outs {
            if a != b && p.leq(a, b) {
                println!("{} <= {}", p.label(a), p.label(b));
            }
        }
    }
}
