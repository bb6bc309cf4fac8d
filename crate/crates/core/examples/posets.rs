//! Zigzags, components, primality, and intervals of labelled posets.
use physduo::TypedPoset;

fn labels(s: &str) -> Vec<String> {
    s.split(',').map(str::to_string).collect()
}

fn main() {
    // x <= u >= y <= v
    let z = TypedPoset::from_generators(labels("X,U,Y,V"), &[(0, 1), (2, 1), (2, 3)]).unwrap();
    println!("poset:        {z}");
    println!("zigzag:       {:?}", z.find_zigzag());
    println!("zetless:      {}", z.is_zetless());

    let n = TypedPoset::from_generators(labels("A,B,C"), &[(0, 1)]).unwrap();
    let comps = n.components();
    println!("components:   {:?}", comps.connected);
    println!("primality:    {:?}", n.primality());

    let chain = TypedPoset::from_generators(labels("A,B,C"), &[(0, 1), (1, 2)]).unwrap();
    for s in [vec![0, 1], vec![0, 2]] {
        let sub = chain.subset(s.clone()).unwrap();
        println!("{s:?} interval in {chain}: {}", sub.is_interval());
    }
    let ext = chain.subset([0, 1]).unwrap().extract().unwrap();
    println!("collapsed:    {} (hole {})", ext.outer, ext.hole);
}
