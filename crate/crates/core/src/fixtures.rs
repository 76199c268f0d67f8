//! Named graphs and scripted-violation scenarios used by tests, the CLI and
//! the benchmark.

use crate::ci::Override;
use crate::graph::Dag;

fn build(names: &[&str], edges: &[(&str, &str)]) -> Dag {
    Dag::from_named_edges(names, edges).expect("fixture graphs are valid")
}

/// The running example: `C -> A, C -> B, A -> W, B -> W, W -> X, W -> Y,
/// X -> M, M -> Y`.
pub fn fig1() -> Dag {
    build(
        &["C", "A", "B", "W", "X", "M", "Y"],
        &[
            ("C", "A"),
            ("C", "B"),
            ("A", "W"),
            ("B", "W"),
            ("W", "X"),
            ("W", "Y"),
            ("X", "M"),
            ("M", "Y"),
        ],
    )
}

/// A graph where `Y` has no separator inside `Ne(X)`: `X -> M, A -> M,
/// M -> Y, A -> Y`.
pub fn missing_mns() -> Dag {
    build(
        &["X", "M", "A", "Y"],
        &[("X", "M"), ("A", "M"), ("M", "Y"), ("A", "Y")],
    )
}

fn clique_names(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

/// Collider `A -> C <- B` feeding a directed path through an `n`-clique
/// `K1..Kn` into the parent `W` of `X`; `X -> Y`.
pub fn fig5a(clique: usize) -> Dag {
    assert!(clique >= 1, "clique size must be positive");
    let ks = clique_names("K", clique);
    let mut names: Vec<String> = ["X", "W", "Y", "A", "B", "C"].map(String::from).to_vec();
    names.extend(ks.iter().cloned());
    let mut g = Dag::new(&names).expect("unique names");
    let id = |g: &Dag, s: &str| g.index_of(s).unwrap();
    let add = |g: &mut Dag, a: &str, b: &str| {
        let (a, b) = (id(g, a), id(g, b));
        g.add_edge(a, b).expect("acyclic by construction");
    };
    add(&mut g, "A", "C");
    add(&mut g, "B", "C");
    add(&mut g, "C", &ks[0]);
    for i in 0..clique {
        for j in i + 1..clique {
            add(&mut g, &ks[i], &ks[j]);
        }
    }
    add(&mut g, &ks[clique - 1], "W");
    add(&mut g, "W", "X");
    add(&mut g, "X", "Y");
    g
}

/// Collider `A -> W <- B` at the parent of `X` whose endpoints share the
/// `sep` common causes `S1..Ssep`, with an `clique`-clique `K1..Kn`
/// upstream feeding `S1`; `X -> Y`. The common causes are fully connected
/// so that they form no collider at `A` or `B`.
pub fn fig5b(sep: usize, clique: usize) -> Dag {
    assert!(sep >= 1 && clique >= 1, "sizes must be positive");
    let ss = clique_names("S", sep);
    let ks = clique_names("K", clique);
    let mut names: Vec<String> = ["X", "W", "Y", "A", "B"].map(String::from).to_vec();
    names.extend(ss.iter().cloned());
    names.extend(ks.iter().cloned());
    let mut g = Dag::new(&names).expect("unique names");
    let id = |g: &Dag, s: &str| g.index_of(s).unwrap();
    let add = |g: &mut Dag, a: &str, b: &str| {
        let (a, b) = (id(g, a), id(g, b));
        g.add_edge(a, b).expect("acyclic by construction");
    };
    add(&mut g, "W", "X");
    add(&mut g, "X", "Y");
    add(&mut g, "A", "W");
    add(&mut g, "B", "W");
    for (i, s) in ss.iter().enumerate() {
        add(&mut g, s, "A");
        add(&mut g, s, "B");
        for t in &ss[i + 1..] {
            add(&mut g, s, t);
        }
    }
    for i in 0..clique {
        for j in i + 1..clique {
            add(&mut g, &ks[i], &ks[j]);
        }
    }
    add(&mut g, &ks[clique - 1], &ss[0]);
    g
}

/// A graph plus a list of forced CI verdicts.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: &'static str,
    pub graph: Dag,
    pub overrides: Vec<Override>,
    pub treatment: &'static str,
    pub outcome: &'static str,
}

fn forced(g: &Dag, a: &str, b: &str, s: &[&str], independent: bool) -> Override {
    let ids: Vec<usize> = s.iter().map(|n| g.index_of(n).unwrap()).collect();
    Override::new(g.index_of(a).unwrap(), g.index_of(b).unwrap(), ids, independent)
        .expect("fixture queries are well formed")
}

/// `A -> D <- B`, `D -> W -> X -> M`, `D -> M`, `M -> Y`.
fn collider_above_parent() -> Dag {
    build(
        &["X", "Y", "A", "B", "D", "M", "W"],
        &[
            ("A", "D"),
            ("B", "D"),
            ("D", "W"),
            ("W", "X"),
            ("X", "M"),
            ("D", "M"),
            ("M", "Y"),
        ],
    )
}

/// `W` and `D` look independent given the collider `M`, so SD drops the
/// `D -> W` edge and cannot orient `W`.
pub fn example15() -> Scenario {
    let g = collider_above_parent();
    let overrides = vec![forced(&g, "W", "D", &["M"], true)];
    Scenario {
        name: "example15",
        graph: g,
        overrides,
        treatment: "X",
        outcome: "Y",
    }
}

/// Both `A` and `B` look independent of `X` given `M`, giving two minimal
/// separators.
pub fn example18() -> Scenario {
    let g = collider_above_parent();
    let overrides = vec![
        forced(&g, "A", "X", &["M"], true),
        forced(&g, "B", "X", &["M"], true),
    ];
    Scenario {
        name: "example18",
        graph: g,
        overrides,
        treatment: "X",
        outcome: "Y",
    }
}

/// Only `A` looks independent of `X` given `M`; the two endpoint separators
/// disagree.
pub fn example18_asymmetric() -> Scenario {
    let g = collider_above_parent();
    let overrides = vec![forced(&g, "A", "X", &["M"], true)];
    Scenario {
        name: "example18-asymmetric",
        graph: g,
        overrides,
        treatment: "X",
        outcome: "Y",
    }
}

/// Paths through `W2` and `W3` cancel, so `A` looks separated from `X` by
/// `W1` alone while `{W1, W2}` and `{W1, W3}` do not separate.
pub fn example19() -> Scenario {
    let g = build(
        &["X", "Y", "A", "C", "W1", "W2", "W3"],
        &[
            ("A", "W1"),
            ("W1", "X"),
            ("A", "C"),
            ("C", "W2"),
            ("C", "W3"),
            ("W2", "X"),
            ("W3", "X"),
            ("X", "Y"),
        ],
    );
    let overrides = vec![forced(&g, "A", "X", &["W1"], true)];
    Scenario {
        name: "example19",
        graph: g,
        overrides,
        treatment: "X",
        outcome: "Y",
    }
}

/// `C` looks independent of `X` given `M`, hiding the collider
/// `X -> M <- C`; SD then orients `M` as a parent through `A -> C <- B`.
pub fn example21() -> Scenario {
    let g = build(
        &["X", "Y", "A", "B", "C", "M", "W"],
        &[
            ("A", "C"),
            ("B", "C"),
            ("C", "M"),
            ("X", "M"),
            ("C", "W"),
            ("W", "X"),
            ("M", "Y"),
        ],
    );
    let overrides = vec![forced(&g, "C", "X", &["M"], true)];
    Scenario {
        name: "example21",
        graph: g,
        overrides,
        treatment: "X",
        outcome: "Y",
    }
}

/// Scenario lookup by name.
pub fn scenario(name: &str) -> Option<Scenario> {
    match name {
        "example15" => Some(example15()),
        "example18" => Some(example18()),
        "example18-asymmetric" => Some(example18_asymmetric()),
        "example19" => Some(example19()),
        "example21" => Some(example21()),
        _ => None,
    }
}
