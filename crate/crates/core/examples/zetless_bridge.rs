//! The bridge between expressions and zetless posets: encoding, decoding,
//! enumeration, and structure maps from inclusions.
use physduo::zetless::{enumerate, inclusion_exists, synthesize_structure_map};
use physduo::{decode, encode, Expression};

fn main() {
    let e: Expression = "(X > Z) * (Y > W)".parse().unwrap();
    let p = encode(&e);
    println!("encode {e} = {p}");
    println!("decode back = {}", decode(&p).unwrap());

    let types = vec!["A".to_string(), "B".to_string()];
    let all = enumerate(2, &types).unwrap();
    println!("{} zetless posets on 2 points over A, B:", all.len());
    for q in &all {
        println!("  {}", decode(q).unwrap());
    }

    let target: Expression = "(X * Y) > (Z * W)".parse().unwrap();
    match inclusion_exists(&p, &encode(&target)) {
        Some(inc) => {
            println!("{e} -> {target} via {:?}", inc.map());
            println!("structure map: {}", synthesize_structure_map(&inc).unwrap());
        }
        None => println!("no structure map"),
    }
    println!("reverse exists: {}", inclusion_exists(&encode(&target), &p).is_some());
}
