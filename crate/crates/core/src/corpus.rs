//! Built-in inputs: an exhaustive family of small presentations, and a curated
//! set of equation documents in the input language.

use std::collections::BTreeSet;

use crate::groups::Presentation;
use crate::words::{Alphabet, Word};

/// Letters are `2g` for generator `g` and `2g + 1` for its inverse.
type Letters = Vec<u8>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorpusOptions {
    pub max_rank: usize,
    pub max_relators: usize,
    /// Longest relator, in letters.
    pub max_len: usize,
}

impl Default for CorpusOptions {
    fn default() -> Self {
        CorpusOptions {
            max_rank: 2,
            max_relators: 2,
            max_len: 6,
        }
    }
}

fn inverse(w: &[u8]) -> Letters {
    w.iter().rev().map(|l| l ^ 1).collect()
}

/// Least rotation of `w` or of its inverse, compared by length then lexicographically.
fn canonical_cyclic(w: &[u8]) -> Letters {
    let mut best: Option<Letters> = None;
    for v in [w.to_vec(), inverse(w)] {
        for i in 0..v.len().max(1) {
            let mut r = v[i..].to_vec();
            r.extend_from_slice(&v[..i]);
            if best.as_ref().map_or(true, |b| r < *b) {
                best = Some(r);
            }
        }
    }
    best.unwrap_or_default()
}

fn cyclically_reduced(w: &[u8]) -> bool {
    w.windows(2).all(|p| p[0] != p[1] ^ 1) && (w.len() < 2 || w[0] != w[w.len() - 1] ^ 1)
}

/// Generator permutations combined with generator inversions.
fn automorphisms(rank: usize) -> Vec<Vec<u8>> {
    let mut perms: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..rank {
        let mut next = Vec::new();
        for p in &perms {
            for g in (0..rank).filter(|g| !p.contains(g)) {
                let mut q = p.clone();
                q.push(g);
                next.push(q);
            }
        }
        perms = next;
    }
    let mut out = Vec::new();
    for p in perms {
        for flips in 0..(1u32 << rank) {
            let mut image = vec![0u8; 2 * rank];
            for g in 0..rank {
                let flip = (flips >> g) & 1 == 1;
                let base = 2 * p[g] as u8;
                image[2 * g] = base | u8::from(flip);
                image[2 * g + 1] = base | u8::from(!flip);
            }
            out.push(image);
        }
    }
    out
}

/// Canonical relator list under rotation, inversion, relator order, and
/// generator permutation/inversion.
fn canonical_presentation(relators: &[Letters], autos: &[Vec<u8>]) -> Vec<Letters> {
    autos
        .iter()
        .map(|a| {
            let mut rs: Vec<Letters> = relators
                .iter()
                .map(|r| canonical_cyclic(&r.iter().map(|&l| a[l as usize]).collect::<Letters>()))
                .collect();
            rs.sort_by(|x, y| (x.len(), x).cmp(&(y.len(), y)));
            rs
        })
        .min_by(|x, y| {
            let kx: Vec<(usize, &Letters)> = x.iter().map(|r| (r.len(), r)).collect();
            let ky: Vec<(usize, &Letters)> = y.iter().map(|r| (r.len(), r)).collect();
            kx.cmp(&ky)
        })
        .unwrap_or_default()
}

/// All cyclically reduced words of length `1..=max_len`, up to rotation and inversion.
fn relator_classes(rank: usize, max_len: usize) -> Vec<Letters> {
    let mut classes = BTreeSet::new();
    let mut frontier: Vec<Letters> = vec![vec![]];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for l in 0..2 * rank as u8 {
                if w.last().is_some_and(|&p| p == l ^ 1) {
                    continue;
                }
                let mut v = w.clone();
                v.push(l);
                if cyclically_reduced(&v) {
                    classes.insert((v.len(), canonical_cyclic(&v)));
                }
                next.push(v);
            }
        }
        frontier = next;
    }
    classes.into_iter().map(|(_, w)| w).collect()
}

fn to_presentation(rank: usize, relators: &[Letters]) -> Presentation {
    let names = ["x", "y", "z", "t"];
    let alphabet = Alphabet::new(&names[..rank]).expect("distinct names");
    let words = relators
        .iter()
        .map(|r| Word::from_letters(r.iter().map(|&l| ((l / 2) as usize, l % 2 == 0))))
        .collect();
    Presentation::new(alphabet, words).expect("letters in range")
}

/// Every presentation with `1..=max_rank` generators and at most
/// `max_relators` cyclically reduced relators, one per equivalence class.
/// Relators may repeat.
pub fn presentation_corpus(opts: CorpusOptions) -> Vec<Presentation> {
    let mut out = Vec::new();
    for rank in 1..=opts.max_rank {
        let autos = automorphisms(rank);
        let classes = relator_classes(rank, opts.max_len);
        let mut seen = BTreeSet::new();
        // multisets of classes, as non-decreasing index tuples
        let mut stack: Vec<Vec<usize>> = vec![vec![]];
        while let Some(choice) = stack.pop() {
            let rels: Vec<Letters> = choice.iter().map(|&i| classes[i].clone()).collect();
            if seen.insert(canonical_presentation(&rels, &autos)) {
                out.push((rank, rels));
            }
            if choice.len() < opts.max_relators {
                let start = choice.last().copied().unwrap_or(0);
                for i in (start..classes.len()).rev() {
                    let mut c = choice.clone();
                    c.push(i);
                    stack.push(c);
                }
            }
        }
    }
    out.sort_by(|a, b| (a.0, a.1.len(), &a.1).cmp(&(b.0, b.1.len(), &b.1)));
    out.into_iter().map(|(rank, rels)| to_presentation(rank, &rels)).collect()
}

/// A curated input document.
#[derive(Debug, Clone, Copy)]
pub struct CuratedDocument {
    pub name: &'static str,
    pub text: &'static str,
}

/// The example system with three equations over `S3`, parametrized by `k`.
pub fn example_system(k: i64) -> String {
    format!(
        "# constants a, b, c, d live in S3\n\
         group G = perms {{ a = (1 2), b = (2 3), c = (1 3), d = (1 2 3) }}\n\
         vars x, y, z, t;\n\
         eq: a x b y c y z^5 d z^-2 = 1;\n\
         eq: [x t, d z]^2022 d x^4 c y^5 b z^6 = 1;\n\
         eq: a x^7 y^8 d z^{k} = 1;\n"
    )
}

pub const CURATED: &[CuratedDocument] = &[
    CuratedDocument {
        name: "square-root-in-c2",
        text: "group C2 = finite { table = [[0, 1], [1, 0]]; labels = [e, a] }\nvars x;\neq: x^2 a = 1;\n",
    },
    CuratedDocument {
        name: "linear-in-c2",
        text: "group C2 = finite { table = [[0, 1], [1, 0]]; labels = [e, a] }\nvars x;\neq: x a = 1;\n",
    },
    CuratedDocument {
        name: "conjugate-in-c2",
        text: "group C2 = finite { table = [[0, 1], [1, 0]]; labels = [e, a] }\nvars x;\neq: x^-1 a x = 1;\n",
    },
    CuratedDocument {
        name: "two-variables-in-s3",
        text: "group S3 = perms { r = (1 2 3), s = (1 2) }\nvars x, y;\neq: x r y s x = 1;\neq: y^2 x r = 1;\n",
    },
    CuratedDocument {
        name: "cube-root-in-c3",
        text: "group C3 = perms { g = (1 2 3) }\nvars x;\neq: x g x g x g^-1 = 1;\n",
    },
    CuratedDocument {
        name: "commutator-times-square-in-s3",
        text: "group S3 = perms { r = (1 2 3), s = (1 2) }\nvars x, y;\neq: [x, y] s x^2 = 1;\n",
    },
    CuratedDocument {
        name: "main-theorem-s3",
        text: "group S3 = perms { r = (1 2 3), s = (1 2) }\nsubgroup A of S3 = < r >;\nvars x;\neq: s x s x^-1 = 1;\n",
    },
    CuratedDocument {
        name: "orbit-system-klein",
        text: "group V = perms { a = (1 2), b = (3 4) }\nsubgroup A of V = < a >;\nvars x;\neq: x a x b x = 1;\n",
    },
    CuratedDocument {
        name: "brodskii-howie-short",
        text: "group C = free { c }\ngroup D = free { d }\neq: c d c d = 1;\n",
    },
    CuratedDocument {
        name: "freiheitssatz",
        text: "group C = free { c }\ngroup D = free { d }\ngroup K = perms { k = (1 2 3) }\neq: c k d = 1;\neq: k d k c d^-1 = 1;\n",
    },
    CuratedDocument {
        name: "projective-plane",
        text: "group P = presented < x | x^2 >\n",
    },
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_cyclic_identifies_rotations_and_inverses() {
        // x y x⁻¹ y⁻¹ and its rotations/inverse
        let w = vec![0, 2, 1, 3];
        let c = canonical_cyclic(&w);
        assert_eq!(canonical_cyclic(&[2, 1, 3, 0]), c);
        assert_eq!(canonical_cyclic(&inverse(&w)), c);
    }

    #[test]
    fn rank_one_corpus_is_small_and_exact() {
        // classes of cyclically reduced words in one generator up to inversion: x^1..x^6
        let corpus = presentation_corpus(CorpusOptions {
            max_rank: 1,
            max_relators: 1,
            max_len: 6,
        });
        let shown: Vec<String> = corpus.iter().map(|p| p.to_string()).collect();
        assert_eq!(shown.len(), 7, "{shown:?}");
        assert_eq!(shown[0], "< x | >");
    }

    #[test]
    fn corpus_has_no_duplicates_under_symmetry() {
        let corpus = presentation_corpus(CorpusOptions {
            max_rank: 2,
            max_relators: 2,
            max_len: 3,
        });
        let autos = automorphisms(2);
        let mut keys = BTreeSet::new();
        for p in corpus.iter().filter(|p| p.rank() == 2) {
            let rels: Vec<Letters> = p
                .relators()
                .iter()
                .map(|r| r.letters(100).unwrap().into_iter().map(|(g, pos)| (2 * g + usize::from(!pos)) as u8).collect())
                .collect();
            assert!(keys.insert(canonical_presentation(&rels, &autos)));
        }
    }

    #[test]
    fn automorphism_count() {
        assert_eq!(automorphisms(1).len(), 2);
        assert_eq!(automorphisms(2).len(), 8);
    }
}
