use std::time::{Duration, Instant};

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::minors::{
    all_minors, cauchy_binet_check, laplace_mixed, laplace_mixed_contract, xi, xi_minor_sum, xi_prime,
    xi_prime_minor_sum, z_matrix, z_minor_sum, IndexSet, MinorLayout, RationalMatrix,
};
use crate::scalar::ratio;

pub const DEFAULT_SHAPES: [(usize, usize); 7] = [(1, 1), (2, 1), (1, 2), (2, 2), (2, 3), (3, 2), (3, 3)];
pub const DEFAULT_SAMPLES: usize = 200;
pub const MAX_SHAPE: usize = 4;

pub const IDENTITIES: [&str; 5] = ["cauchy_binet", "xi_minor_sum", "xi_prime_minor_sum", "z_minor_sum", "laplace_mixed"];

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteCount {
    pub identity: &'static str,
    pub passed: usize,
    pub failed: usize,
}

/// Smallest failing input seen for one identity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Reproducer {
    pub identity: &'static str,
    pub shape: (usize, usize),
    pub sample: usize,
    /// Entries as `p/q` strings, row-major.
    pub f: Vec<Vec<String>>,
    /// Second factor of the Cauchy–Binet product, when relevant.
    pub g: Option<Vec<Vec<String>>>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub samples: usize,
    pub shapes: Vec<(usize, usize)>,
    pub suites: Vec<SuiteCount>,
    pub failures: Vec<Reproducer>,
    pub all_passed: bool,
    /// Reported on stderr only, so the JSON stays byte-identical per seed.
    #[serde(skip)]
    pub elapsed: Duration,
}

impl VerifyReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn random_rational(rng: &mut ChaCha8Rng) -> BigRational {
    let q: i64 = rng.gen_range(1..=4);
    let p: i64 = rng.gen_range(-5 * q..=5 * q);
    ratio(p, q)
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> RationalMatrix {
    RationalMatrix::from_fn(rows, cols, |_, _| random_rational(rng))
}

fn render(f: &RationalMatrix) -> Vec<Vec<String>> {
    (0..f.rows()).map(|i| (0..f.cols()).map(|j| f.at(i, j).to_string()).collect()).collect()
}

/// Checks every identity on one matrix; returns the failing identities
/// with a short description.
fn check_matrix(f: &RationalMatrix, g: &RationalMatrix, layout: &MinorLayout) -> Result<Vec<(&'static str, String)>> {
    let (m, n) = (f.rows(), f.cols());
    let mut failures = Vec::new();

    // Cauchy–Binet on F·G (m × n times n × m), all admissible index sets
    'cb: for k in 0..=m.min(n) {
        for rows in IndexSet::subsets(m, k) {
            for cols in IndexSet::subsets(m, k) {
                let (lhs, rhs) = cauchy_binet_check(f, g, &rows, &cols)?;
                if lhs != rhs {
                    failures.push(("cauchy_binet", format!("I={rows:?} J={cols:?}: {lhs} != {rhs}")));
                    break 'cb;
                }
            }
        }
    }

    let minors = all_minors(f, layout)?;
    let (a, b) = (xi(f), xi_minor_sum(&minors));
    if a != b {
        failures.push(("xi_minor_sum", format!("{a} != {b}")));
    }
    let (a, b) = (xi_prime(f), xi_prime_minor_sum(&minors, layout));
    if a != b {
        failures.push(("xi_prime_minor_sum", format!("{a:?} != {b:?}")));
    }
    let (a, b) = (z_matrix(f), z_minor_sum(&minors, layout));
    if a != b {
        failures.push(("z_minor_sum", format!("{a:?} != {b:?}")));
    }
    'lp: for pair in layout.pairs() {
        for q in 1..=pair.order() {
            for j in 1..=n {
                let lhs = laplace_mixed(f, &pair.rows, &pair.cols, q, j)?;
                let rhs = laplace_mixed_contract(f, &pair.rows, &pair.cols, q, j)?;
                if lhs != rhs {
                    failures.push(("laplace_mixed", format!("A={:?} I={:?} q={q} j={j}: {lhs} != {rhs}", pair.rows, pair.cols)));
                    break 'lp;
                }
            }
        }
    }
    Ok(failures)
}

/// Runs every exact identity suite on `samples` random rational matrices
/// per shape, drawn from a ChaCha stream seeded with `seed`.
pub fn cmd_verify(shapes: &[(usize, usize)], samples: usize, seed: u64) -> Result<VerifyReport> {
    if let Some(&(m, n)) = shapes.iter().find(|&&(m, n)| m == 0 || n == 0 || m > MAX_SHAPE || n > MAX_SHAPE) {
        return Err(Error::Config(format!("shape ({m}, {n}) outside [1, {MAX_SHAPE}]²")));
    }
    let start = Instant::now();
    let mut counts: Vec<SuiteCount> =
        IDENTITIES.iter().map(|&identity| SuiteCount { identity, passed: 0, failed: 0 }).collect();
    let mut failures: Vec<Reproducer> = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for &(m, n) in shapes {
        let layout = MinorLayout::new(m, n)?;
        for sample in 0..samples {
            let f = random_matrix(&mut rng, m, n);
            let g = random_matrix(&mut rng, n, m);
            let failed = check_matrix(&f, &g, &layout)?;
            for count in counts.iter_mut() {
                match failed.iter().find(|(id, _)| *id == count.identity) {
                    None => count.passed += 1,
                    Some((identity, detail)) => {
                        count.failed += 1;
                        let size = m * n;
                        let smaller = failures
                            .iter()
                            .position(|r| r.identity == *identity)
                            .map(|i| (i, failures[i].shape.0 * failures[i].shape.1 > size));
                        let rep = Reproducer {
                            identity,
                            shape: (m, n),
                            sample,
                            f: render(&f),
                            g: (*identity == "cauchy_binet").then(|| render(&g)),
                            detail: detail.clone(),
                        };
                        match smaller {
                            None => failures.push(rep),
                            Some((i, true)) => failures[i] = rep,
                            Some((_, false)) => {}
                        }
                    }
                }
            }
        }
    }
    let all_passed = failures.is_empty();
    Ok(VerifyReport {
        seed,
        samples,
        shapes: shapes.to_vec(),
        suites: counts,
        failures,
        all_passed,
        elapsed: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_run() {
        let r = cmd_verify(&DEFAULT_SHAPES, 0, 1).unwrap();
        assert!(r.all_passed);
        assert!(r.suites.iter().all(|s| s.passed == 0 && s.failed == 0));
    }

    #[test]
    fn small_run_passes_and_is_deterministic() {
        let a = cmd_verify(&[(2, 2), (3, 2)], 5, 7).unwrap();
        let b = cmd_verify(&[(2, 2), (3, 2)], 5, 7).unwrap();
        assert!(a.all_passed);
        assert_eq!(a.to_json(), b.to_json());
        assert!(cmd_verify(&[(5, 1)], 1, 0).is_err());
    }
}
