//! Parsing, reduction, and symmetry-equality of duoidal expressions.
use physduo::{par_e, seq_e, Expression};

fn main() {
    let e: Expression = "(A > N > B) * (C * N)".parse().expect("parses");
    println!("reduced:        {e}");
    println!("leaves:         {:?}", e.list_type());

    let a = Expression::atom("A");
    let b = Expression::atom("B");
    let built = seq_e(&par_e(&a, &b), &Expression::Unit);
    println!("built:          {built}");

    let x: Expression = "(A > B) * C".parse().unwrap();
    let y: Expression = "C * (A > B)".parse().unwrap();
    println!("{x} ~ {y}: {}", x.sym_equal(&y));
    println!("canonical:      {}", y.canonical());
    println!("witness:        {:?}", x.sym_witness(&y));

    let z: Expression = "A > B".parse().unwrap();
    let w: Expression = "B > A".parse().unwrap();
    println!("{z} ~ {w}: {}", z.sym_equal(&w));
}
