//! Shared generators and oracles for the integration suites.
//!
//! Random objects are built from a `u64` seed so that proptest can drive
//! them and shrink the seed, and so that the acceptance target can replay
//! the same cases from a fixed stream of seeds.

#![allow(dead_code)]

use std::sync::Arc;

use physduo::eval::{eval_diagram, eval_diagram_along, Algebra, SelfAlgebra, WeightAlgebra};
use physduo::poset::{Primality, TypedPoset};
use physduo::zetless::{decode, encode, enumerate};
use physduo::{par_e, seq_e, DiagramBuilder, DiagramError, Expression, Signature, StringDiagram};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Check = Result<(), String>;

pub const TEST_SIGNATURE: &str = "\
type A B C
gen f : A -> B
gen g : B -> A * C
gen h : A * B -> C
gen k : C > A -> B
gen m : B -> B > C
gen u : N -> A
gen e : C -> N
";

pub const WORKED: &str = "type X Y B C A U V\ngen f : X * Y -> B > C\ngen g : A > B -> U * V\n";

pub fn signature() -> Arc<Signature> {
    Arc::new(Signature::parse(TEST_SIGNATURE).unwrap())
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn expr(s: &str) -> Expression {
    s.parse().unwrap()
}

/// A random expression with between `min` and `max` atoms.
pub fn random_expression(r: &mut impl Rng, types: &[&str], min: usize, max: usize) -> Expression {
    let n = r.gen_range(min..=max);
    random_tree(r, types, n)
}

fn random_tree(r: &mut impl Rng, types: &[&str], n: usize) -> Expression {
    match n {
        0 => Expression::Unit,
        1 => Expression::atom(*types.choose(r).unwrap()),
        _ => {
            let parts = r.gen_range(2..=n.min(3));
            let mut sizes = vec![1; parts];
            for _ in parts..n {
                sizes[r.gen_range(0..parts)] += 1;
            }
            let kids: Vec<Expression> = sizes.into_iter().map(|s| random_tree(r, types, s)).collect();
            if r.gen_bool(0.5) {
                Expression::seq_all(kids)
            } else {
                Expression::par_all(kids)
            }
        }
    }
}

/// Turns some tensors into sequences, which only adds order.
pub fn coarsen(r: &mut impl Rng, e: &Expression) -> Expression {
    match e {
        Expression::Seq(cs) => Expression::seq_all(cs.iter().map(|c| coarsen(r, c))),
        Expression::Par(cs) => {
            let kids: Vec<Expression> = cs.iter().map(|c| coarsen(r, c)).collect();
            if r.gen_bool(0.3) {
                Expression::seq_all(kids)
            } else {
                Expression::par_all(kids)
            }
        }
        other => other.clone(),
    }
}

/// A random valid diagram from `source`: a structure map to a coarser
/// expression followed by up to `max_nodes` generator applications.
pub fn random_diagram_from(r: &mut impl Rng, sig: &Arc<Signature>, source: &Expression, max_nodes: usize) -> StringDiagram {
    let coarse = coarsen(r, source);
    let head = StringDiagram::structural(sig, source, &coarse).expect("coarsening adds order only");
    let mut b = DiagramBuilder::new(sig, coarse);
    let steps = r.gen_range(0..=max_nodes);
    extend_randomly(r, &mut b, steps);
    let body = b.finish().expect("builder output is valid");
    head.compose(&body).expect("boundaries agree")
}

fn extend_randomly(r: &mut impl Rng, b: &mut DiagramBuilder, steps: usize) {
    let names: Vec<String> = b.signature().generators().map(|g| g.name.clone()).collect();
    for _ in 0..steps {
        let options: Vec<(String, Vec<usize>)> = names
            .iter()
            .flat_map(|g| b.applications(g).into_iter().map(move |ins| (g.clone(), ins)))
            .collect();
        let Some((g, ins)) = options.choose(r) else { break };
        b.apply(g, ins).expect("listed applications are valid");
    }
}

/// `(p > (A * q)) * ((B * s) > t)` with `h : A * B -> C` joining the two
/// branches first, so that intermediate levels usually contain a zigzag.
pub fn random_tangled_diagram(r: &mut impl Rng, sig: &Arc<Signature>, max_nodes: usize) -> StringDiagram {
    let types = ["A", "B", "C"];
    let [p, q, s, t] = [0; 4].map(|_| random_expression(r, &types, 1, 2));
    let (a, bb) = (Expression::atom("A"), Expression::atom("B"));
    let source = par_e(&seq_e(&p, &par_e(&a, &q)), &seq_e(&par_e(&bb, &s), &t));
    let wa = p.size();
    let wb = wa + 1 + q.size();
    let mut b = DiagramBuilder::new(sig, source);
    b.apply("h", &[wa, wb]).expect("h joins the branches");
    let steps = r.gen_range(0..=max_nodes);
    extend_randomly(r, &mut b, steps);
    b.finish().expect("builder output is valid")
}

pub fn random_diagram(r: &mut impl Rng, sig: &Arc<Signature>, max_nodes: usize) -> StringDiagram {
    if r.gen_bool(0.2) {
        return random_tangled_diagram(r, sig, max_nodes.saturating_sub(1));
    }
    let max = if r.gen_bool(0.3) { 6 } else { 4 };
    let source = random_expression(r, &["A", "B", "C"], 0, max);
    random_diagram_from(r, sig, &source, max_nodes)
}

pub fn diagram_from_seed(seed: u64, max_nodes: usize) -> StringDiagram {
    random_diagram(&mut rng(seed), &signature(), max_nodes)
}

fn ensure(ok: bool, what: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn same(lhs: &StringDiagram, rhs: &StringDiagram, law: &str) -> Check {
    lhs.validate().map_err(|e| format!("{law}: left side invalid: {e}"))?;
    rhs.validate().map_err(|e| format!("{law}: right side invalid: {e}"))?;
    ensure(lhs.equal(rhs), || format!("{law}: sides differ\nleft:\n{lhs}\nright:\n{rhs}"))
}

fn err(law: &str) -> impl Fn(physduo::DiagramError) -> String + '_ {
    move |e| format!("{law}: {e}")
}

// ---------------------------------------------------------------------------
// Category and duoidal laws

pub fn law_compose_associative(seed: u64) -> Check {
    let (s, r) = (signature(), &mut rng(seed));
    let a = random_diagram(r, &s, 3);
    let b = random_diagram_from(r, &s, a.target(), 3);
    let c = random_diagram_from(r, &s, b.target(), 3);
    let e = err("associativity");
    let lhs = a.compose(&b).map_err(&e)?.compose(&c).map_err(&e)?;
    let rhs = a.compose(&b.compose(&c).map_err(&e)?).map_err(&e)?;
    same(&lhs, &rhs, "associativity")
}

pub fn law_compose_unital(seed: u64) -> Check {
    let s = signature();
    let d = random_diagram(&mut rng(seed), &s, 4);
    let e = err("unitality");
    let left = StringDiagram::identity(&s, d.source()).compose(&d).map_err(&e)?;
    let right = d.compose(&StringDiagram::identity(&s, d.target())).map_err(&e)?;
    same(&left, &d, "left unit")?;
    same(&right, &d, "right unit")
}

pub fn law_products_associative(seed: u64) -> Check {
    let (s, r) = (signature(), &mut rng(seed));
    let (a, b, c) = (random_diagram(r, &s, 2), random_diagram(r, &s, 2), random_diagram(r, &s, 2));
    let e = err("product associativity");
    let lt = a.tensor(&b).map_err(&e)?.tensor(&c).map_err(&e)?;
    let rt = a.tensor(&b.tensor(&c).map_err(&e)?).map_err(&e)?;
    same(&lt, &rt, "tensor associativity")?;
    let ls = a.sequence(&b).map_err(&e)?.sequence(&c).map_err(&e)?;
    let rs = a.sequence(&b.sequence(&c).map_err(&e)?).map_err(&e)?;
    same(&ls, &rs, "sequence associativity")
}

pub fn law_shared_unit(seed: u64) -> Check {
    let s = signature();
    let d = random_diagram(&mut rng(seed), &s, 3);
    let unit = StringDiagram::identity(&s, &Expression::Unit);
    let e = err("shared unit");
    same(&unit.tensor(&d).map_err(&e)?, &d, "tensor left unit")?;
    same(&d.tensor(&unit).map_err(&e)?, &d, "tensor right unit")?;
    same(&unit.sequence(&d).map_err(&e)?, &d, "sequence left unit")?;
    same(&d.sequence(&unit).map_err(&e)?, &d, "sequence right unit")
}

/// Two composable pairs `a;c` and `b;d`.
fn quadruple(seed: u64) -> [StringDiagram; 4] {
    let (s, r) = (signature(), &mut rng(seed));
    let a = random_diagram(r, &s, 2);
    let b = random_diagram(r, &s, 2);
    let c = random_diagram_from(r, &s, a.target(), 2);
    let d = random_diagram_from(r, &s, b.target(), 2);
    [a, b, c, d]
}

pub fn law_interchange_tensor(seed: u64) -> Check {
    let [a, b, c, d] = quadruple(seed);
    let e = err("tensor interchange");
    let lhs = a.tensor(&b).map_err(&e)?.compose(&c.tensor(&d).map_err(&e)?).map_err(&e)?;
    let rhs = a.compose(&c).map_err(&e)?.tensor(&b.compose(&d).map_err(&e)?).map_err(&e)?;
    same(&lhs, &rhs, "tensor interchange")
}

pub fn law_interchange_sequence(seed: u64) -> Check {
    let [a, b, c, d] = quadruple(seed);
    let e = err("sequence interchange");
    let lhs = a.sequence(&b).map_err(&e)?.compose(&c.sequence(&d).map_err(&e)?).map_err(&e)?;
    let rhs = a.compose(&c).map_err(&e)?.sequence(&b.compose(&d).map_err(&e)?).map_err(&e)?;
    same(&lhs, &rhs, "sequence interchange")
}

/// `(a > c) * (b > d) ; dist = dist ; (a * b) > (c * d)`.
pub fn law_dist_natural(seed: u64) -> Check {
    let (s, r) = (signature(), &mut rng(seed));
    let [a, b, c, d] = [0; 4].map(|_| random_diagram(r, &s, 2));
    let e = err("distributor naturality");
    let alg = SelfAlgebra::new(&s);
    let dist = |x: &Expression, y: &Expression, z: &Expression, w: &Expression| {
        alg.dist(x, y, z, w).map_err(|e| format!("distributor naturality: {e}"))
    };
    let after = dist(a.target(), b.target(), c.target(), d.target())?;
    let before = dist(a.source(), b.source(), c.source(), d.source())?;
    let lhs = a
        .sequence(&c)
        .map_err(&e)?
        .tensor(&b.sequence(&d).map_err(&e)?)
        .map_err(&e)?
        .compose(&after)
        .map_err(&e)?;
    let rhs = before
        .compose(&a.tensor(&b).map_err(&e)?.sequence(&c.tensor(&d).map_err(&e)?).map_err(&e)?)
        .map_err(&e)?;
    same(&lhs, &rhs, "distributor naturality")
}

/// `(a * b) ; swap = swap ; (b * a)`.
pub fn law_symmetry_natural(seed: u64) -> Check {
    let (s, r) = (signature(), &mut rng(seed));
    let (a, b) = (random_diagram(r, &s, 2), random_diagram(r, &s, 2));
    let e = err("symmetry naturality");
    let alg = SelfAlgebra::new(&s);
    let swap = |x: &Expression, y: &Expression| alg.sym(x, y).map_err(|e| format!("symmetry naturality: {e}"));
    let lhs = a
        .tensor(&b)
        .map_err(&e)?
        .compose(&swap(a.target(), b.target())?)
        .map_err(&e)?;
    let rhs = swap(a.source(), b.source())?
        .compose(&b.tensor(&a).map_err(&e)?)
        .map_err(&e)?;
    same(&lhs, &rhs, "symmetry naturality")
}

pub type Law = fn(u64) -> Check;

pub const LAWS: &[(&str, Law)] = &[
    ("compose associative", law_compose_associative),
    ("compose unital", law_compose_unital),
    ("tensor and sequence associative", law_products_associative),
    ("shared unit", law_shared_unit),
    ("interchange with tensor", law_interchange_tensor),
    ("interchange with sequence", law_interchange_sequence),
    ("distributor natural", law_dist_natural),
    ("symmetry natural", law_symmetry_natural),
];

// ---------------------------------------------------------------------------
// Posets

/// Every poset on `n` elements with the given labels, as generating edges.
/// Brute force over all relations, keeping transitive antisymmetric ones.
pub fn all_posets(labels: &[&str]) -> Vec<TypedPoset> {
    let n = labels.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|x| (0..n).filter(move |&y| y != x).map(move |y| (x, y))).collect();
    let mut out = Vec::new();
    for mask in 0u32..(1 << pairs.len()) {
        let rel = |x: usize, y: usize| {
            x == y || pairs.iter().position(|&p| p == (x, y)).is_some_and(|i| mask & (1 << i) != 0)
        };
        let transitive = (0..n).all(|x| (0..n).all(|y| (0..n).all(|z| !(rel(x, y) && rel(y, z)) || rel(x, z))));
        let antisymmetric = pairs.iter().all(|&(x, y)| !(rel(x, y) && rel(y, x)));
        if transitive && antisymmetric {
            let edges: Vec<(usize, usize)> = pairs.iter().copied().filter(|&(x, y)| rel(x, y)).collect();
            let labels = labels.iter().map(|s| s.to_string()).collect();
            out.push(TypedPoset::from_generators(labels, &edges).unwrap());
        }
    }
    out
}

/// All posets of size at most `n`, over a single label.
pub fn all_posets_up_to(n: usize) -> Vec<TypedPoset> {
    (0..=n).flat_map(|k| all_posets(&vec!["A"; k])).collect()
}

pub fn random_poset(r: &mut impl Rng, n: usize, types: &[&str]) -> TypedPoset {
    let labels = (0..n).map(|_| types.choose(r).unwrap().to_string()).collect();
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(r);
    let p = r.gen_range(0.15..0.6);
    let edges: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter(|_| r.gen_bool(p))
        .map(|(i, j)| (perm[i], perm[j]))
        .collect();
    TypedPoset::from_generators(labels, &edges).unwrap()
}

/// Independent zigzag search: four distinct elements inducing exactly
/// `x < u > y < v`.
pub fn oracle_has_zigzag(p: &TypedPoset) -> bool {
    let n = p.len();
    let el = 0..n;
    el.clone().any(|x| {
        el.clone().any(|u| {
            el.clone().any(|y| {
                el.clone().any(|v| {
                    let q = [x, u, y, v];
                    let distinct = (0..4).all(|i| (0..4).all(|j| i == j || q[i] != q[j]));
                    let want = |a: usize, b: usize| matches!((a, b), (0, 1) | (2, 1) | (2, 3));
                    distinct
                        && (0..4).all(|i| (0..4).all(|j| i == j || p.leq(q[i], q[j]) == want(i, j)))
                })
            })
        })
    })
}

/// Number of connected components of the graph with the given adjacency.
fn count_components(n: usize, adj: impl Fn(usize, usize) -> bool) -> usize {
    let mut comp: Vec<usize> = (0..n).collect();
    fn find(c: &mut Vec<usize>, x: usize) -> usize {
        if c[x] != x {
            let r = find(c, c[x]);
            c[x] = r;
        }
        c[x]
    }
    for x in 0..n {
        for y in 0..n {
            if x != y && adj(x, y) {
                let (a, b) = (find(&mut comp, x), find(&mut comp, y));
                comp[a] = b;
            }
        }
    }
    (0..n).filter(|&x| find(&mut comp, x) == x).count()
}

pub fn oracle_connected(p: &TypedPoset) -> bool {
    count_components(p.len(), |x, y| p.leq(x, y) || p.leq(y, x)) == 1
}

pub fn oracle_incomparable_connected(p: &TypedPoset) -> bool {
    count_components(p.len(), |x, y| !p.leq(x, y) && !p.leq(y, x)) == 1
}

fn members_of(mask: u32, n: usize) -> Vec<usize> {
    (0..n).filter(|&x| mask & (1 << x) != 0).collect()
}

/// Every outside element relates to all members in the same way, which is
/// exactly when the parent factors as a substitution into that subset.
pub fn oracle_substitution_factor(p: &TypedPoset, s: &[usize]) -> bool {
    (0..p.len()).filter(|x| !s.contains(x)).all(|z| {
        s.iter().all(|&m| p.leq(z, m)) || s.iter().all(|&m| p.leq(m, z)) || s.iter().all(|&m| !p.leq(z, m) && !p.leq(m, z))
    })
}

pub fn oracle_interval(p: &TypedPoset, s: &[usize]) -> bool {
    (0..p.len())
        .filter(|y| !s.contains(y))
        .all(|y| !(s.iter().any(|&a| p.leq(a, y)) && s.iter().any(|&b| p.leq(y, b))))
}

fn bracketed_in(p: &TypedPoset, s: &[usize]) -> bool {
    (0..p.len()).filter(|x| !s.contains(x)).all(|q| {
        let above = s.iter().any(|&m| p.leq(m, q));
        let below = s.iter().any(|&m| p.leq(q, m));
        (!above || s.iter().all(|&m| p.leq(m, q))) && (!below || s.iter().all(|&m| p.leq(q, m)))
    })
}

fn extends(big: &TypedPoset, small: &TypedPoset) -> bool {
    let n = small.len();
    (0..n).all(|x| (0..n).all(|y| !small.leq(x, y) || big.leq(x, y)))
}

/// Checks every poset-level characterization on `p`.
pub fn poset_properties(p: &TypedPoset, saturations: Option<&[TypedPoset]>) -> Check {
    let n = p.len();
    let shown = || format!("{:?} {:?}", p.labels(), p.strict_pairs());

    // zetless detection and decoding
    let zetless = !oracle_has_zigzag(p);
    ensure(p.is_zetless() == zetless, || format!("is_zetless wrong on {}", shown()))?;
    match decode(p) {
        Ok(e) => {
            ensure(zetless, || format!("decoded a poset with a zigzag: {}", shown()))?;
            ensure(encode(&e).is_isomorphic(p), || format!("encode(decode) not isomorphic: {}", shown()))?;
        }
        Err(_) => ensure(!zetless, || format!("decode failed on a zetless poset: {}", shown()))?,
    }

    // primality against component counts
    let (con, inc) = (oracle_connected(p), oracle_incomparable_connected(p));
    let prim = p.primality();
    let expected = match n {
        0 => Primality::Empty,
        1 => Primality::Singleton,
        _ if con => Primality::ParPrime { ambiguous: inc },
        _ => Primality::SeqPrime,
    };
    ensure(prim == expected, || format!("primality {prim:?}, expected {expected:?} on {}", shown()))?;
    if n >= 2 && zetless {
        ensure(con != inc, || format!("zetless poset both or neither prime: {}", shown()))?;
    }
    if n >= 2 && !con {
        ensure(inc, || format!("disconnected but not incomparable-connected: {}", shown()))?;
    }

    // zetless implies span or cospan for each connected pair
    if zetless {
        let comps = p.components();
        for c in &comps.connected {
            for &x in c {
                for &y in c {
                    let ok = p.has_span_or_cospan(x, y).unwrap();
                    ensure(ok, || format!("no span or cospan for {x},{y} in {}", shown()))?;
                }
            }
        }
    }

    // subsets: intervals, bracketing, extraction, saturation
    for mask in 0u32..(1 << n) {
        let s = members_of(mask, n);
        let sub = p.subset(s.clone()).unwrap();
        let bracketed = sub.is_bracketed();
        let factor = oracle_substitution_factor(p, &s);
        ensure(bracketed == factor, || format!("bracketed {bracketed} for {s:?} in {}", shown()))?;
        match sub.extract() {
            Ok(x) => {
                ensure(bracketed, || format!("extracted unbracketed {s:?} from {}", shown()))?;
                let back = x.outer.substitute(x.hole, &x.inner).unwrap();
                ensure(back.is_isomorphic(p), || format!("extraction of {s:?} does not recompose in {}", shown()))?;
            }
            Err(_) => ensure(!bracketed, || format!("extract refused bracketed {s:?} in {}", shown()))?,
        }
        let interval = oracle_interval(p, &s);
        ensure(sub.is_interval() == interval, || format!("is_interval wrong for {s:?} in {}", shown()))?;
        if bracketed {
            ensure(interval, || format!("bracketed {s:?} is not an interval in {}", shown()))?;
        }
        match sub.saturate_for_interval() {
            Ok(q) => {
                ensure(interval, || format!("saturated a non-interval {s:?} in {}", shown()))?;
                ensure(extends(&q, p), || format!("saturation of {s:?} drops order in {}", shown()))?;
                ensure(bracketed_in(&q, &s), || format!("saturation leaves {s:?} unbracketed in {}", shown()))?;
            }
            Err(_) => ensure(!interval, || format!("refused to saturate interval {s:?} in {}", shown()))?,
        }
        if let Some(all) = saturations {
            let exists = all.iter().any(|q| extends(q, p) && bracketed_in(q, &s));
            ensure(exists == interval, || format!("saturation search disagrees for {s:?} in {}", shown()))?;
        }
    }
    Ok(())
}

/// Sequencing and tensoring keep zetless posets zetless.
pub fn products_preserve_zetless(p: &TypedPoset, q: &TypedPoset) -> Check {
    if !p.is_zetless() || !q.is_zetless() {
        return Ok(());
    }
    ensure(!oracle_has_zigzag(&p.seq(q)), || "seq created a zigzag".into())?;
    ensure(!oracle_has_zigzag(&p.tensor(q)), || "tensor created a zigzag".into())
}

/// Parallel substitutions commute and nested substitutions associate.
pub fn operad_laws(r: &mut impl Rng) -> Check {
    let pick = |r: &mut ChaCha8Rng, lo: usize| {
        let n = r.gen_range(lo..=4);
        random_poset(r, n, &["A", "B", "C"])
    };
    let mut r = ChaCha8Rng::seed_from_u64(r.gen());
    let q = pick(&mut r, 2);
    let (p1, p2) = (pick(&mut r, 0), pick(&mut r, 0));
    let x = r.gen_range(0..q.len());
    let y = (x + 1 + r.gen_range(0..q.len() - 1)) % q.len();
    // after substituting at x, y moves if it was later
    let shift = |z: usize, at: usize, by: &TypedPoset| if z > at { z + by.len() - 1 } else { z };
    let xy = q.substitute(x, &p1).unwrap().substitute(shift(y, x, &p1), &p2).unwrap();
    let yx = q.substitute(y, &p2).unwrap().substitute(shift(x, y, &p2), &p1).unwrap();
    ensure(xy.is_isomorphic(&yx), || "parallel substitutions do not commute".into())?;

    let p = pick(&mut r, 1);
    let z = r.gen_range(0..p.len());
    let inner = q.substitute(x, &p.substitute(z, &p2).unwrap()).unwrap();
    let outer = q.substitute(x, &p).unwrap().substitute(x + z, &p2).unwrap();
    ensure(inner.is_isomorphic(&outer), || "nested substitution does not associate".into())?;

    let unit = TypedPoset::singleton(q.label(x));
    ensure(q.substitute(x, &unit).unwrap().is_isomorphic(&q), || "singleton is not a unit".into())?;
    let whole = TypedPoset::singleton("A").substitute(0, &p1).unwrap();
    ensure(whole.is_isomorphic(&p1), || "substituting into a point".into())
}

/// Runs the whole poset suite: exhaustive up to size 4, random at 5 and 6.
pub fn poset_suite(random_cases: usize, seed: u64) -> Check {
    let small = all_posets_up_to(4);
    for p in &small {
        let sats: Vec<TypedPoset> = small.iter().filter(|q| q.len() == p.len()).cloned().collect();
        poset_properties(p, Some(&sats))?;
    }
    // two labels, to exercise typed isomorphism
    for labels in [["A", "B", "A"], ["A", "B", "B"]] {
        for p in all_posets(&labels) {
            poset_properties(&p, None)?;
        }
    }
    let upto3: Vec<&TypedPoset> = small.iter().filter(|p| p.len() <= 3).collect();
    for p in &upto3 {
        for q in &upto3 {
            products_preserve_zetless(p, q)?;
        }
    }
    let mut r = rng(seed);
    for _ in 0..random_cases {
        let n = r.gen_range(5..=6);
        let p = random_poset(&mut r, n, &["A", "B"]);
        poset_properties(&p, None)?;
        let m = r.gen_range(3..=5);
        let q = random_poset(&mut r, m, &["A", "B"]);
        products_preserve_zetless(&p, &q)?;
        operad_laws(&mut r)?;
    }
    // enumerated posets decode and re-encode faithfully
    for n in 0..=4 {
        for p in enumerate(n, &["A".into(), "B".into()]).map_err(|e| e.to_string())? {
            let e = decode(&p).map_err(|e| e.to_string())?;
            ensure(encode(&e).is_isomorphic(&p), || format!("enumerated poset {e} does not round-trip"))?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Evaluation

pub fn weights() -> WeightAlgebra {
    WeightAlgebra::product([("f", 2), ("g", 3), ("h", 5), ("k", 7), ("m", 11), ("u", 13), ("e", 17)].map(|(g, w)| (g.to_string(), w)))
}

/// Orders along which the diagram validates and every node has a zetless
/// context; the planned order is always among them.
pub fn feasible_orders(d: &StringDiagram) -> Result<Vec<Vec<usize>>, String> {
    let planned = d.planned_order().map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    for order in d.all_node_orders().map_err(|e| e.to_string())? {
        match d.decompose_along(&order) {
            Ok(_) => out.push(order),
            Err(
                DiagramError::NoZetlessContext { .. }
                | DiagramError::NotInterval { .. }
                | DiagramError::NoInputInclusion { .. }
                | DiagramError::BoundaryMismatch { .. },
            ) => {}
            Err(e) => return Err(format!("along {order:?}: {e}")),
        }
    }
    ensure(out.contains(&planned), || format!("planned order {planned:?} is not feasible"))?;
    Ok(out)
}

/// Every feasible node order gives the same value in both built-in algebras.
pub fn eval_order_independent(d: &StringDiagram) -> Check {
    let s = d.signature().clone();
    let (w, me) = (weights(), SelfAlgebra::new(&s));
    let orders = feasible_orders(d)?;
    let expected: i64 = d
        .generator_nodes()
        .iter()
        .map(|&n| *w.weight(d.nodes()[n].generator().unwrap()).unwrap())
        .product();
    for order in &orders {
        let v = eval_diagram_along(&w, d, order).map_err(|e| e.to_string())?;
        ensure(v == expected, || format!("weight {v} along {order:?}, expected {expected}\n{d}"))?;
        let m = eval_diagram_along(&me, d, order).map_err(|e| e.to_string())?;
        ensure(m.equal(d), || format!("self evaluation along {order:?} differs:\n{m}\nfrom\n{d}"))?;
    }
    Ok(())
}

/// Evaluation commutes with composition, tensor and sequence.
pub fn eval_functorial(seed: u64) -> Check {
    let (s, r) = (signature(), &mut rng(seed));
    let a = random_diagram(r, &s, 3);
    let b = random_diagram_from(r, &s, a.target(), 3);
    let c = random_diagram(r, &s, 2);
    let (w, me) = (weights(), SelfAlgebra::new(&s));
    let e = |e: physduo::DiagramError| e.to_string();
    let ev = |d: &StringDiagram| eval_diagram(&w, d).map_err(|e| e.to_string());
    let em = |d: &StringDiagram| eval_diagram(&me, d).map_err(|e| e.to_string());
    use physduo::Algebra;
    let ab = a.compose(&b).map_err(e)?;
    ensure(ev(&ab)? == w.compose(&ev(&a)?, &ev(&b)?).unwrap(), || "weight of a composite".into())?;
    let composed = me.compose(&em(&a)?, &em(&b)?).map_err(|e| e.to_string())?;
    ensure(em(&ab)?.equal(&composed), || "self evaluation of a composite".into())?;
    let ac = a.tensor(&c).map_err(e)?;
    ensure(ev(&ac)? == w.tensor(&ev(&a)?, &ev(&c)?).unwrap(), || "weight of a tensor".into())?;
    let tensored = me.tensor(&em(&a)?, &em(&c)?).map_err(|e| e.to_string())?;
    ensure(em(&ac)?.equal(&tensored), || "self evaluation of a tensor".into())?;
    let sc = a.sequence(&c).map_err(e)?;
    let sequenced = me.seq(&em(&a)?, &em(&c)?).map_err(|e| e.to_string())?;
    ensure(em(&sc)?.equal(&sequenced), || "self evaluation of a sequence".into())?;
    let id = StringDiagram::identity(&s, a.source());
    ensure(em(&id)?.equal(&id), || "self evaluation of an identity".into())?;
    ensure(ev(&id)? == 1, || "weight of an identity".into())
}

/// Diagrams with at most four generator nodes for the order-independence check.
pub fn small_diagrams(count: usize, seed: u64) -> Vec<StringDiagram> {
    let s = signature();
    let mut r = rng(seed);
    let mut out: Vec<StringDiagram> = (0..count).map(|_| random_diagram(&mut r, &s, 4)).collect();
    out.retain(|d| d.generator_nodes().len() <= 4);
    // a few wide ones, where many orders exist
    for _ in 0..count / 10 {
        let parts: Vec<StringDiagram> = (0..2).map(|_| random_diagram(&mut r, &s, 2)).collect();
        let d = parts[0].tensor(&parts[1]).unwrap();
        if d.generator_nodes().len() <= 4 {
            out.push(d);
        }
    }
    let fig = Arc::new(Signature::parse(WORKED).unwrap());
    out.push(worked_composite(&fig));
    out
}

pub fn worked_composite(s: &Arc<Signature>) -> StringDiagram {
    let st = StringDiagram::structural(s, &expr("(A > X) * Y"), &expr("A > (X * Y)")).unwrap();
    let f = StringDiagram::identity(s, &expr("A"))
        .sequence(&StringDiagram::from_generator(s, "f").unwrap())
        .unwrap();
    let g = StringDiagram::from_generator(s, "g")
        .unwrap()
        .sequence(&StringDiagram::identity(s, &expr("C")))
        .unwrap();
    st.compose(&f).unwrap().compose(&g).unwrap()
}

// ---------------------------------------------------------------------------
// Round trips

pub fn expression_round_trip(seed: u64) -> Check {
    let e = random_expression(&mut rng(seed), &["A", "B", "C", "D"], 0, 8);
    let back = decode(&encode(&e)).map_err(|err| format!("{e}: {err}"))?;
    ensure(back.sym_equal(&e), || format!("decode(encode({e})) = {back}"))?;
    let printed = e.to_string();
    let parsed: Expression = printed.parse().map_err(|err| format!("{printed}: {err}"))?;
    ensure(parsed == e, || format!("parse(print({e:?})) = {parsed:?}"))?;
    let json = serde_json::to_string(&encode(&e).to_json()).unwrap();
    let p = TypedPoset::from_json(&serde_json::from_str(&json).unwrap()).map_err(|e| e.to_string())?;
    ensure(p == encode(&e), || format!("poset JSON round trip for {e}"))
}

pub fn diagram_round_trip(seed: u64) -> Check {
    let d = diagram_from_seed(seed, 4);
    let text = d.to_json_string();
    let back = StringDiagram::from_json_str(d.signature(), &text).map_err(|e| e.to_string())?;
    ensure(back.to_json_string() == text, || "JSON text changed".into())?;
    ensure(back.equal(&d), || "JSON round trip changed the diagram".into())?;
    let c = d.canonicalize();
    ensure(c.canonicalize().to_json_string() == c.to_json_string(), || "canonicalize not idempotent".into())?;
    for order in feasible_orders(&d)?.iter().take(6) {
        let dec = d.decompose_along(order).map_err(|e| e.to_string())?;
        ensure(dec.atomics.len() == order.len(), || "one atomic per node".into())?;
        for a in &dec.atomics {
            a.validate().map_err(|e| format!("atomic invalid: {e}"))?;
            ensure(a.generator_nodes().len() == 1, || "atomic with several nodes".into())?;
        }
        let re = dec.recompose().map_err(|e| e.to_string())?;
        ensure(re.equal(&d), || format!("recomposition along {order:?} differs:\n{re}\nfrom\n{d}"))?;
    }
    Ok(())
}

/// Runs `check` on `cases` seeds drawn from `seed`, stopping at the first failure.
pub fn run_cases(cases: usize, seed: u64, check: impl Fn(u64) -> Check) -> Check {
    let mut r = rng(seed);
    for _ in 0..cases {
        let s: u64 = r.gen();
        check(s).map_err(|e| format!("seed {s}: {e}"))?;
    }
    Ok(())
}
