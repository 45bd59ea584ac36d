//! Shared oracles for the integration suites.
#![allow(dead_code)]

/// Farey fractions of order `q_max` on `[0, 1)`, ascending, exact.
pub fn farey(q_max: u64) -> Vec<(u64, u64)> {
    let mut out = vec![(0, 1)];
    let mut stack = vec![((0u64, 1u64), (1u64, 1u64), false)];
    while let Some((l, r, expanded)) = stack.pop() {
        let med = (l.0 + r.0, l.1 + r.1);
        if med.1 > q_max {
            continue;
        }
        if expanded {
            out.push(med);
            continue;
        }
        stack.push((med, r, false));
        stack.push((l, r, true));
        stack.push((l, med, false));
    }
    out
}

/// Euler totient sums via a sieve.
pub fn totient_sum(q_max: u64) -> u64 {
    let n = q_max as usize;
    let mut phi: Vec<u64> = (0..=n as u64).collect();
    for p in 2..=n {
        if phi[p] == p as u64 {
            let mut k = p;
            while k <= n {
                phi[k] -= phi[k] / p as u64;
                k += p;
            }
        }
    }
    phi[1..=n].iter().sum()
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| a + (b - a) * k as f64 / (n - 1) as f64)
        .collect()
}

pub fn assert_close(a: f64, b: f64, tol: f64, what: &str) {
    assert!(
        (a - b).abs() <= tol,
        "{what}: {a} vs {b} (|diff| = {:e} > {tol:e})",
        (a - b).abs()
    );
}

pub fn pass(criterion: &str, detail: &str) {
    println!("[acceptance] {criterion}: PASS — {detail}");
}
