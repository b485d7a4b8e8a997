//! The content poset of a product's fillings and its Möbius function.
//!
//! Vertices are the distinct contents of the southwest fillings; `a <= b`
//! when the content of `a` contains the content of `b`, so the single-valued
//! fillings sit on top and every extra entry moves a vertex one row down.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grothendieck::buch_product;
use crate::partition::{content_sum, AmbientBox, Partition};
use crate::svt::{enumerate_buch_tableaux, SetValuedFilling};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Vertex {
    /// Content vector of the southwest filling alone; not necessarily a partition.
    pub content: Vec<u32>,
    /// Content of the whole filling, northeast context included.
    pub total: Partition,
    /// Number of fillings with this content.
    pub count: u32,
    /// Entries beyond one per box; the row of the vertex in the Hasse diagram.
    pub extra: u32,
}

impl Vertex {
    fn size(&self) -> u32 {
        self.content.iter().sum()
    }
}

/// `a` contains `b` as multisets.
fn content_contains(a: &[u32], b: &[u32]) -> bool {
    b.iter()
        .enumerate()
        .all(|(i, &x)| x <= a.get(i).copied().unwrap_or(0))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContentPoset {
    pub lambda: Partition,
    pub mu: Partition,
    vertices: Vec<Vertex>,
    /// `above[i]`: vertices strictly greater than `i`.
    above: Vec<Vec<usize>>,
    /// `(lower, upper)` cover pairs.
    covers: Vec<(usize, usize)>,
}

impl ContentPoset {
    /// Poset of the given fillings, all of which must share `lambda` and `mu`.
    pub fn from_fillings(lambda: &Partition, mu: &Partition, fillings: &[SetValuedFilling]) -> Self {
        let mut by_content: BTreeMap<Vec<u32>, u32> = BTreeMap::new();
        for t in fillings {
            debug_assert_eq!(t.shape(), mu);
            *by_content.entry(t.content(false).counts).or_insert(0) += 1;
        }
        let mut vertices: Vec<Vertex> = by_content
            .into_iter()
            .map(|(content, count)| {
                let total = content_sum(lambda.parts(), &content)
                    .expect("lattice-word fillings have partition content");
                let extra = content.iter().sum::<u32>() - mu.size();
                Vertex {
                    content,
                    total,
                    count,
                    extra,
                }
            })
            .collect();
        vertices.sort_by(|a, b| a.extra.cmp(&b.extra).then_with(|| b.content.cmp(&a.content)));
        Self::with_vertices(lambda.clone(), mu.clone(), vertices)
    }

    fn with_vertices(lambda: Partition, mu: Partition, vertices: Vec<Vertex>) -> Self {
        let n = vertices.len();
        let above: Vec<Vec<usize>> = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| {
                        j != i && content_contains(&vertices[i].content, &vertices[j].content)
                    })
                    .collect()
            })
            .collect();
        // j covers i when nothing sits strictly between them
        let mut covers = Vec::new();
        for i in 0..n {
            for &j in &above[i] {
                if !above[i].iter().any(|&k| k != j && above[k].contains(&j)) {
                    covers.push((i, j));
                }
            }
        }
        ContentPoset {
            lambda,
            mu,
            vertices,
            above,
            covers,
        }
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Vertices strictly above `i`.
    pub fn above(&self, i: usize) -> &[usize] {
        &self.above[i]
    }

    pub fn covers(&self) -> &[(usize, usize)] {
        &self.covers
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        a == b || self.above[a].contains(&b)
    }

    pub fn index_of(&self, content: &[u32]) -> Option<usize> {
        self.vertices.iter().position(|v| v.content == content)
    }

    /// Vertices whose total content fits in `bx`, as a poset in its own right.
    pub fn restrict_to_box(&self, bx: AmbientBox) -> ContentPoset {
        let kept = self
            .vertices
            .iter()
            .filter(|v| v.total.fits_in_box(bx))
            .cloned()
            .collect();
        Self::with_vertices(self.lambda.clone(), self.mu.clone(), kept)
    }

    /// Every vertex with no extra entries has a single filling.
    pub fn top_row_multiplicity_free(&self) -> bool {
        self.vertices
            .iter()
            .filter(|v| v.extra == 0)
            .all(|v| v.count == 1)
    }

    /// Cover pairs whose extra counts differ by something other than one.
    pub fn ungraded_covers(&self) -> Vec<(usize, usize)> {
        self.covers
            .iter()
            .copied()
            .filter(|&(lo, hi)| self.vertices[lo].extra != self.vertices[hi].extra + 1)
            .collect()
    }

    pub fn to_dot(&self, mobius: Option<&MobiusAssignment>) -> String {
        dot_export(self, mobius)
    }

    pub fn to_json(&self, mobius: Option<&MobiusAssignment>) -> String {
        #[derive(Serialize)]
        struct V<'a> {
            content: &'a [u32],
            count: u32,
            #[serde(skip_serializing_if = "Option::is_none")]
            mobius: Option<i64>,
        }
        #[derive(Serialize)]
        struct P<'a> {
            vertices: Vec<V<'a>>,
            covers: Vec<[usize; 2]>,
        }
        let p = P {
            vertices: self
                .vertices
                .iter()
                .enumerate()
                .map(|(i, v)| V {
                    content: &v.content,
                    count: v.count,
                    mobius: mobius.map(|m| m.values[i]),
                })
                .collect(),
            covers: self.covers.iter().map(|&(a, b)| [a, b]).collect(),
        };
        serde_json::to_string(&p).expect("serializable")
    }
}

pub fn build_poset(lambda: &Partition, mu: &Partition, bx: AmbientBox) -> Result<ContentPoset> {
    let fillings = enumerate_buch_tableaux(lambda, mu, bx);
    if fillings.is_empty() {
        return Err(Error::EmptyProduct);
    }
    Ok(ContentPoset::from_fillings(lambda, mu, &fillings))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MobiusAssignment {
    pub values: Vec<i64>,
}

/// Top-down solution of `sum_{a >= v} m(a) = 1`.
pub fn mobius(p: &ContentPoset) -> MobiusAssignment {
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by_key(|&i| p.vertices[i].size());
    let mut values = vec![0i64; p.len()];
    for i in order {
        values[i] = 1 - p.above[i].iter().map(|&j| values[j]).sum::<i64>();
    }
    MobiusAssignment { values }
}

/// Vertices at which the defining identity fails.
pub fn mobius_violations(p: &ContentPoset, m: &MobiusAssignment) -> Vec<usize> {
    (0..p.len())
        .filter(|&i| m.values[i] + p.above[i].iter().map(|&j| m.values[j]).sum::<i64>() != 1)
        .collect()
}

/// Hasse diagram in Graphviz dialect; edges run from the larger content to
/// the smaller one.
pub fn dot_export(p: &ContentPoset, m: Option<&MobiusAssignment>) -> String {
    let mut s = String::new();
    writeln!(s, "digraph poset {{").unwrap();
    writeln!(s, "  rankdir=BT;").unwrap();
    writeln!(s, "  node [shape=box];").unwrap();
    for (i, v) in p.vertices.iter().enumerate() {
        let content: Vec<String> = v.content.iter().map(|c| c.to_string()).collect();
        let mut label = format!("[{}] x{}", content.join(","), v.count);
        if let Some(m) = m {
            write!(label, "\\nmu={}", m.values[i]).unwrap();
        }
        writeln!(s, "  v{i} [label=\"{label}\", rank={}];", v.extra).unwrap();
    }
    for &(lo, hi) in &p.covers {
        writeln!(s, "  v{lo} -> v{hi};").unwrap();
    }
    writeln!(s, "}}").unwrap();
    s
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct VertexCheck {
    pub content: Vec<u32>,
    pub nu: Partition,
    pub mobius: i64,
    pub coefficient: i64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MainTheoremReport {
    pub lambda: Partition,
    pub mu: Partition,
    pub bx: AmbientBox,
    /// Every single-valued content occurs once.
    pub precondition_met: bool,
    pub vertices: Vec<VertexCheck>,
    /// Every vertex passes.
    pub all_pass: bool,
}

impl MainTheoremReport {
    /// The theorem holds for this instance: precondition met and all vertices pass.
    pub fn verdict(&self) -> bool {
        self.precondition_met && self.all_pass
    }
}

/// Compares Möbius values with the signed Buch coefficients vertex by vertex.
pub fn check_main_theorem(lambda: &Partition, mu: &Partition, bx: AmbientBox) -> Result<MainTheoremReport> {
    let p = build_poset(lambda, mu, bx)?;
    let m = mobius(&p);
    let coeffs = buch_product(lambda, mu, bx);
    let vertices: Vec<VertexCheck> = p
        .vertices
        .iter()
        .zip(&m.values)
        .map(|(v, &mv)| {
            let c = coeffs.coeff(&v.total);
            VertexCheck {
                content: v.content.clone(),
                nu: v.total.clone(),
                mobius: mv,
                coefficient: c,
                pass: mv == c,
            }
        })
        .collect();
    Ok(MainTheoremReport {
        lambda: lambda.clone(),
        mu: mu.clone(),
        bx,
        precondition_met: p.top_row_multiplicity_free(),
        all_pass: vertices.iter().all(|v| v.pass),
        vertices,
    })
}
