#![allow(dead_code)]

use rand::Rng;
use satrna::dotbracket::{parse, Structure};

/// A random secondary structure of exactly `len` positions. Not uniform:
/// nesting depth and loop sizes vary widely, which is what order tests need.
pub fn random_structure<R: Rng>(len: usize, rng: &mut R) -> Structure {
    let mut out = String::with_capacity(len);
    fill(len, rng.gen_range(0.1..0.7), rng, &mut out);
    parse(&out).expect("generator emits valid structures")
}

fn fill<R: Rng>(len: usize, dot_rate: f64, rng: &mut R, out: &mut String) {
    let mut left = len;
    while left > 0 {
        if left < 3 || rng.gen_bool(dot_rate) {
            out.push('.');
            left -= 1;
            continue;
        }
        // A pair spanning `span` positions, interior span - 2 >= 1.
        let span = rng.gen_range(3..=left);
        out.push('(');
        fill(span - 2, dot_rate, rng, out);
        out.push(')');
        left -= span;
    }
}

/// Pairs addable to `s`, by checking every candidate against every
/// existing pair directly.
pub fn addable_by_scan(s: &Structure) -> Vec<(usize, usize)> {
    let n = s.len();
    let pairs = s.pairs();
    let mut found = Vec::new();
    for i in 1..=n {
        for j in i + 2..=n {
            if s.partner(i).is_some() || s.partner(j).is_some() {
                continue;
            }
            let crosses = pairs
                .iter()
                .any(|&(k, l)| (i < k && k < j && j < l) || (k < i && i < l && l < j));
            if !crosses {
                found.push((i, j));
            }
        }
    }
    found
}
