//! Flux matrices `A_j(W)` of the symmetric non-conservative system, the
//! conservative fluxes of the augmented conservation laws, the convex
//! entropy and its flux, and characteristic analysis.
//!
//! Two independent constructions of the non-conservative operator live
//! here: [`System`] stores the equations term by term (one entry per
//! product `W_k ∂_j W_q` as it appears in each evolution equation) and
//! drives the solver, while [`assemble_a`] builds each symmetric matrix by
//! writing every coupling to both `(p, q)` and `(q, p)`.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{domain, Result};
use crate::minors::IndexSet;
use crate::scalar::Scalar;
use crate::state::{ConservativeState, StateLayout};

/// One product `sign * W[coef] * ∂_dir W[col]` in the equation for `W[row]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Term {
    pub row: usize,
    pub coef: usize,
    pub col: usize,
    /// 0-based spatial direction.
    pub dir: usize,
    pub sign: i8,
}

/// Layout plus the term table of the non-conservative system.
#[derive(Clone, Debug)]
pub struct System {
    layout: StateLayout,
    terms: Vec<Term>,
}

impl System {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        let layout = StateLayout::new(m, n)?;
        let terms = nonconservative_terms(&layout);
        Ok(Self { layout, terms })
    }

    pub fn layout(&self) -> &StateLayout {
        &self.layout
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    /// `∂_t W` at a point, written into `out` (f64 fast path).
    pub fn rhs_point_into(&self, w: &[f64], grads: &[&[f64]], out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        for t in &self.terms {
            let prod = w[t.coef] * grads[t.dir][t.col];
            if t.sign > 0 {
                out[t.row] -= prod;
            } else {
                out[t.row] += prod;
            }
        }
    }
}

/// The evolution equations for `τ`, `d_α`, `v_i` and `m_{A,I}`, term by term.
fn nonconservative_terms(layout: &StateLayout) -> Vec<Term> {
    let (m, n) = (layout.m(), layout.n());
    let tau = StateLayout::TAU;
    let mut terms = Vec::new();
    let mut push = |row, coef, col, dir: usize, sign: i8| terms.push(Term { row, coef, col, dir: dir - 1, sign });
    let pairs = layout.minors().pairs();
    let slot = |rows: &IndexSet, cols: &IndexSet| layout.minor_slot(rows, cols);

    // ∂_t τ + v_j ∂_j τ − τ ∂_j v_j = 0
    for j in 1..=n {
        push(tau, layout.v(j), tau, j, 1);
        push(tau, tau, layout.v(j), j, -1);
    }

    // ∂_t d_α + v_i ∂_i d_α + Σ 1{α∈A, i∈I} s m_{A∖α, I∖i} ∂_i m_{A,I} = 0
    for alpha in 1..=m {
        let row = layout.d(alpha);
        for i in 1..=n {
            push(row, layout.v(i), row, i, 1);
        }
        for (p, pair) in pairs.iter().enumerate() {
            if !pair.rows.contains(alpha) {
                continue;
            }
            for i in pair.cols.iter() {
                let sign = parity(pair.rows.rank(alpha) + pair.cols.rank(i));
                if let Some(c) = slot(&pair.rows.without(alpha), &pair.cols.without(i)) {
                    push(row, c, layout.minor(p), i, sign);
                }
            }
        }
    }

    // ∂_t v_i + Σ 1{j∈I, i∉I∖j} s m_{A,(I∖j)∪i} ∂_j m_{A,I}
    //         − Σ m_{A,I} ∂_i m_{A,I} + v_j ∂_j v_i − τ ∂_i τ = 0
    for i in 1..=n {
        let row = layout.v(i);
        for (p, pair) in pairs.iter().enumerate() {
            for j in pair.cols.iter() {
                let reduced = pair.cols.without(j);
                if reduced.contains(i) {
                    continue;
                }
                let sign = parity(pair.cols.rank(j) + reduced.rank(i));
                if let Some(c) = slot(&pair.rows, &reduced.with(i)) {
                    push(row, c, layout.minor(p), j, sign);
                }
            }
        }
        for p in 0..pairs.len() {
            push(row, layout.minor(p), layout.minor(p), i, -1);
        }
        for j in 1..=n {
            push(row, layout.v(j), row, j, 1);
        }
        push(row, tau, tau, i, -1);
    }

    // ∂_t m_{A,I} + v_j ∂_j m_{A,I} + Σ 1{i∈I, j∉I∖i} s m_{A,(I∖i)∪j} ∂_i v_j
    //             − m_{A,I} ∂_j v_j + Σ 1{α∈A, i∈I} s m_{A∖α,I∖i} ∂_i d_α = 0
    for (p, pair) in pairs.iter().enumerate() {
        let row = layout.minor(p);
        for j in 1..=n {
            push(row, layout.v(j), row, j, 1);
        }
        for i in pair.cols.iter() {
            let reduced = pair.cols.without(i);
            for j in 1..=n {
                if reduced.contains(j) {
                    continue;
                }
                let sign = parity(reduced.rank(j) + pair.cols.rank(i));
                if let Some(c) = slot(&pair.rows, &reduced.with(j)) {
                    push(row, c, layout.v(j), i, sign);
                }
            }
        }
        for j in 1..=n {
            push(row, row, layout.v(j), j, -1);
        }
        for alpha in pair.rows.iter() {
            for i in pair.cols.iter() {
                let sign = parity(pair.rows.rank(alpha) + pair.cols.rank(i));
                if let Some(c) = slot(&pair.rows.without(alpha), &pair.cols.without(i)) {
                    push(row, c, layout.d(alpha), i, sign);
                }
            }
        }
    }
    terms
}

fn parity(e: usize) -> i8 {
    if e % 2 == 0 {
        1
    } else {
        -1
    }
}

/// `∂_t W = −Σ_j A_j(W) ∂_j W` evaluated from the term table.
///
/// `grads[j]` holds `∂_{j+1} W` in slot order.
pub fn rhs_nonconservative_point<T: Scalar>(system: &System, w: &[T], grads: &[Vec<T>]) -> Result<Vec<T>> {
    let dim = system.dim();
    if w.len() != dim || grads.len() != system.layout.n() || grads.iter().any(|g| g.len() != dim) {
        return domain("state or gradient length does not match the layout");
    }
    let mut out = vec![T::zero(); dim];
    for t in system.terms() {
        let prod = w[t.coef].clone() * grads[t.dir][t.col].clone();
        out[t.row] = if t.sign > 0 { out[t.row].clone() - prod } else { out[t.row].clone() + prod };
    }
    Ok(out)
}

/// Dense symmetric matrix in slot order.
#[derive(Clone, Debug, PartialEq)]
pub struct FluxMatrix<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Scalar> FluxMatrix<T> {
    fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![T::zero(); dim * dim] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, p: usize, q: usize) -> &T {
        &self.data[p * self.dim + q]
    }

    /// Adds `value` to `(p, q)` and, off the diagonal, to `(q, p)`.
    fn couple(&mut self, p: usize, q: usize, value: T) {
        let k = p * self.dim + q;
        self.data[k] = self.data[k].clone() + value.clone();
        if p != q {
            let k = q * self.dim + p;
            self.data[k] = self.data[k].clone() + value;
        }
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.dim).all(|p| (0..p).all(|q| self.get(p, q) == self.get(q, p)))
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.dim)
            .map(|p| (0..self.dim).fold(T::zero(), |acc, q| acc + self.get(p, q).clone() * x[q].clone()))
            .collect()
    }

    pub fn scaled_add(&self, a: &T, other: &Self) -> Self {
        let data = self.data.iter().zip(&other.data).map(|(x, y)| x.clone() + a.clone() * y.clone()).collect();
        Self { dim: self.dim, data }
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |p, q| self.get(p, q).to_f64())
    }
}

/// `A_j(W)` for direction `j` (1-based), assembled coupling by coupling.
pub fn assemble_a<T: Scalar>(j: usize, w: &[T], layout: &StateLayout) -> Result<FluxMatrix<T>> {
    let n = layout.n();
    if j == 0 || j > n {
        return domain(format!("direction {j} outside [1, {n}]"));
    }
    if w.len() != layout.dim() {
        return domain(format!("state of length {} for dimension {}", w.len(), layout.dim()));
    }
    let tau = StateLayout::TAU;
    let mut a = FluxMatrix::zeros(layout.dim());
    let signed = |s: i8, x: &T| if s > 0 { x.clone() } else { -x.clone() };

    // transport along v_j on every component
    for p in 0..layout.dim() {
        a.couple(p, p, w[layout.v(j)].clone());
    }
    // τ ↔ v_j
    a.couple(tau, layout.v(j), -w[tau].clone());

    for (p, pair) in layout.minors().pairs().iter().enumerate() {
        let q = layout.minor(p);
        // d_α ↔ m_{A,I}, weighted by the complementary minor
        if pair.cols.contains(j) {
            for alpha in pair.rows.iter() {
                let sign = parity(pair.rows.rank(alpha) + pair.cols.rank(j));
                if let Some(c) = layout.minor_slot(&pair.rows.without(alpha), &pair.cols.without(j)) {
                    a.couple(layout.d(alpha), q, signed(sign, &w[c]));
                }
            }
            // v_i ↔ m_{A,I} through the column exchange j → i
            let reduced = pair.cols.without(j);
            for i in 1..=n {
                if reduced.contains(i) {
                    continue;
                }
                let sign = parity(pair.cols.rank(j) + reduced.rank(i));
                if let Some(c) = layout.minor_slot(&pair.rows, &reduced.with(i)) {
                    a.couple(layout.v(i), q, signed(sign, &w[c]));
                }
            }
        }
        // v_j ↔ m_{A,I} from the pressure-like term
        a.couple(layout.v(j), q, -w[q].clone());
    }
    Ok(a)
}

/// Conservative flux in direction `j` (1-based) of `(h, D, P, M)`.
pub fn conservative_flux<T: Scalar>(j: usize, u: &ConservativeState<T>, layout: &StateLayout, eps_h: f64) -> Result<Vec<T>> {
    let n = layout.n();
    if j == 0 || j > n {
        return domain(format!("direction {j} outside [1, {n}]"));
    }
    check_h(&u.h, eps_h)?;
    let h = u.h.clone();
    let ml = layout.minors();
    let one = T::one();
    let big_m = |rows: &IndexSet, cols: &IndexSet| ml.value(&u.m, rows, cols, &one);
    let mut out = Vec::with_capacity(layout.dim());

    out.push(u.p[j - 1].clone());

    for alpha in 1..=layout.m() {
        let mut acc = u.d[alpha - 1].clone() * u.p[j - 1].clone();
        for (p, pair) in ml.pairs().iter().enumerate() {
            if pair.rows.contains(alpha) && pair.cols.contains(j) {
                let s = T::sign(pair.rows.rank(alpha) + pair.cols.rank(j));
                acc = acc + s * u.m[p].clone() * big_m(&pair.rows.without(alpha), &pair.cols.without(j));
            }
        }
        out.push(acc / h.clone());
    }

    let pressure = u.m.iter().fold(T::one(), |acc, x| acc + x.clone() * x.clone());
    for i in 1..=n {
        let mut acc = u.p[i - 1].clone() * u.p[j - 1].clone();
        if i == j {
            acc = acc - pressure.clone();
        }
        for (p, pair) in ml.pairs().iter().enumerate() {
            if !pair.cols.contains(j) {
                continue;
            }
            let reduced = pair.cols.without(j);
            if reduced.contains(i) {
                continue;
            }
            let s = T::sign(pair.cols.rank(j) + reduced.rank(i));
            acc = acc + s * big_m(&pair.rows, &reduced.with(i)) * u.m[p].clone();
        }
        out.push(acc / h.clone());
    }

    for pair in ml.pairs() {
        let mut acc = T::zero();
        if pair.cols.contains(j) {
            let reduced = pair.cols.without(j);
            for k in 1..=n {
                if reduced.contains(k) {
                    continue;
                }
                let s = T::sign(reduced.rank(k) + pair.cols.rank(j));
                acc = acc + s * big_m(&pair.rows, &reduced.with(k)) * u.p[k - 1].clone();
            }
            for alpha in pair.rows.iter() {
                let s = T::sign(pair.rows.rank(alpha) + pair.cols.rank(j));
                acc = acc + s * big_m(&pair.rows.without(alpha), &reduced) * u.d[alpha - 1].clone();
            }
        }
        out.push(acc / h.clone());
    }
    Ok(out)
}

fn check_h<T: Scalar>(h: &T, eps_h: f64) -> Result<()> {
    let value = h.abs_f64();
    if value > eps_h {
        Ok(())
    } else {
        Err(crate::error::Error::SingularState { what: "h", value, guard: eps_h })
    }
}

/// `S = (1 + |D|² + |P|² + Σ M²) / (2h)`.
pub fn entropy<T: Scalar>(u: &ConservativeState<T>, eps_h: f64) -> Result<T> {
    check_h(&u.h, eps_h)?;
    Ok(u.energy_numerator() / (T::from_i64(2) * u.h.clone()))
}

/// Entropy flux in direction `j` (1-based).
pub fn entropy_flux<T: Scalar>(u: &ConservativeState<T>, j: usize, layout: &StateLayout, eps_h: f64) -> Result<T> {
    let n = layout.n();
    if j == 0 || j > n {
        return domain(format!("direction {j} outside [1, {n}]"));
    }
    let s = entropy(u, eps_h)?;
    let h = u.h.clone();
    let h2 = h.clone() * h.clone();
    let ml = layout.minors();
    let one = T::one();
    let big_m = |rows: &IndexSet, cols: &IndexSet| ml.value(&u.m, rows, cols, &one);
    let pj = u.p[j - 1].clone();

    let mut coupled = T::zero();
    for (p, pair) in ml.pairs().iter().enumerate() {
        if !pair.cols.contains(j) {
            continue;
        }
        for alpha in pair.rows.iter() {
            let sg = T::sign(pair.rows.rank(alpha) + pair.cols.rank(j));
            coupled = coupled
                + sg * u.d[alpha - 1].clone() * big_m(&pair.rows.without(alpha), &pair.cols.without(j)) * u.m[p].clone();
        }
        let reduced = pair.cols.without(j);
        for i in 1..=n {
            if reduced.contains(i) {
                continue;
            }
            let sg = T::sign(pair.cols.rank(j) + reduced.rank(i));
            coupled = coupled + sg * u.p[i - 1].clone() * big_m(&pair.rows, &reduced.with(i)) * u.m[p].clone();
        }
    }
    let pressure = u.m.iter().fold(T::one(), |acc, x| acc + x.clone() * x.clone());
    Ok(s * pj.clone() / h + (coupled - pj * pressure) / h2)
}

/// Characteristic speed with its eigenvectors in slot order.
#[derive(Clone, Debug, PartialEq)]
pub struct CharField {
    pub speed: f64,
    pub multiplicity: usize,
    pub vectors: Vec<Vec<f64>>,
}

/// Closed-form speeds `v₁ ± τ` (each of multiplicity `m + 1`) and their
/// eigenvectors for strings (`n = 1`).
pub fn char_speeds_n1(w: &[f64], layout: &StateLayout) -> Result<(f64, f64, [CharField; 2])> {
    if layout.n() != 1 {
        return domain(format!("closed-form characteristics need n = 1, got n = {}", layout.n()));
    }
    if w.len() != layout.dim() {
        return domain("state length does not match the layout");
    }
    let m = layout.m();
    let dim = layout.dim();
    let (tau, v) = (w[StateLayout::TAU], w[layout.v(1)]);
    let unit = |entries: &[(usize, f64)]| {
        let mut e = vec![0.0; dim];
        let norm = entries.iter().map(|(_, x)| x * x).sum::<f64>().sqrt();
        for &(k, x) in entries {
            e[k] = x / norm;
        }
        e
    };
    let field = |sign: f64| {
        let mut vectors = vec![unit(&[(StateLayout::TAU, 1.0), (layout.v(1), -sign)])];
        for alpha in 1..=m {
            let mk = layout.minor(layout.minors().entry_index(alpha, 1));
            vectors.push(unit(&[(layout.d(alpha), 1.0), (mk, sign)]));
        }
        CharField { speed: v + sign * tau, multiplicity: m + 1, vectors }
    };
    let plus = field(1.0);
    let minus = field(-1.0);
    Ok((plus.speed, minus.speed, [plus, minus]))
}

/// Largest directional derivative of `λ±` along its own characteristic
/// vectors, by central differences (relative step `1e-5`).
///
/// Evaluated both in conservative variables, where `λ± = (P ± 1)/h` is
/// nonlinear, and in primitive variables.
pub fn linear_degeneracy_residual(w: &[f64], layout: &StateLayout) -> Result<f64> {
    let (_, _, fields) = char_speeds_n1(w, layout)?;
    let rel_step = 1e-5;
    let mut worst: f64 = 0.0;

    let scale = w.iter().map(|x| x.abs()).fold(1.0, f64::max);
    let eps = rel_step * scale;
    for (field, sign) in fields.iter().zip([1.0, -1.0]) {
        let speed = |x: &[f64]| x[layout.v(1)] + sign * x[StateLayout::TAU];
        for r in &field.vectors {
            let fwd: Vec<f64> = w.iter().zip(r).map(|(a, b)| a + eps * b).collect();
            let bwd: Vec<f64> = w.iter().zip(r).map(|(a, b)| a - eps * b).collect();
            worst = worst.max(((speed(&fwd) - speed(&bwd)) / (2.0 * eps)).abs());
        }
    }

    let tau = w[StateLayout::TAU];
    if tau.abs() > crate::state::DEFAULT_GUARD {
        let m = layout.m();
        let u: Vec<f64> = w.iter().map(|x| x / tau).collect();
        let (h_slot, p_slot) = (StateLayout::TAU, layout.v(1));
        let scale = u.iter().map(|x| x.abs()).fold(1.0, f64::max);
        let eps = rel_step * scale;
        for sign in [1.0, -1.0] {
            let speed = |x: &[f64]| (x[p_slot] + sign) / x[h_slot];
            let mut vectors = Vec::new();
            let mut v0 = u.clone();
            v0[p_slot] = u[p_slot] + sign;
            vectors.push(v0);
            for alpha in 1..=m {
                let mut e = vec![0.0; u.len()];
                e[layout.d(alpha)] = 1.0;
                e[layout.minor(layout.minors().entry_index(alpha, 1))] = sign;
                vectors.push(e);
            }
            for r in vectors {
                let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
                let fwd: Vec<f64> = u.iter().zip(&r).map(|(a, b)| a + eps * b / norm).collect();
                let bwd: Vec<f64> = u.iter().zip(&r).map(|(a, b)| a - eps * b / norm).collect();
                worst = worst.max(((speed(&fwd) - speed(&bwd)) / (2.0 * eps)).abs());
            }
        }
    }
    Ok(worst)
}

/// Sorted eigenvalues of `Σ_j ν_j A_j(W)` for a unit direction `ν`.
pub fn wave_speeds(w: &[f64], nu: &[f64], layout: &StateLayout) -> Result<Vec<f64>> {
    let n = layout.n();
    if nu.len() != n {
        return domain(format!("direction of length {} in {n} dimensions", nu.len()));
    }
    let norm = nu.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-10 {
        return domain(format!("direction must be a unit vector, |nu| = {norm}"));
    }
    let mut total = assemble_a(1, w, layout)?.scaled_add(&(nu[0] - 1.0), &assemble_a(1, w, layout)?);
    for (j, &nj) in nu.iter().enumerate().skip(1) {
        total = total.scaled_add(&nj, &assemble_a(j + 1, w, layout)?);
    }
    let eig = SymmetricEigen::new(total.to_f64());
    let mut speeds: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    speeds.sort_by(f64::total_cmp);
    Ok(speeds)
}

/// Largest `|λ|` over the coordinate directions at one state.
pub fn max_coordinate_speed(w: &[f64], layout: &StateLayout) -> Result<f64> {
    if layout.n() == 1 {
        let (plus, minus, _) = char_speeds_n1(w, layout)?;
        return Ok(plus.abs().max(minus.abs()));
    }
    let mut best: f64 = 0.0;
    for j in 0..layout.n() {
        let mut nu = vec![0.0; layout.n()];
        nu[j] = 1.0;
        for s in wave_speeds(w, &nu, layout)? {
            best = best.max(s.abs());
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{lift, GraphData};
    use crate::minors::Matrix;

    fn hand_a1(w: &[f64]) -> Vec<f64> {
        let (t, _d, v, _mu) = (w[0], w[1], w[2], w[3]);
        vec![v, 0.0, -t, 0.0, 0.0, v, 0.0, t, -t, 0.0, v, 0.0, 0.0, t, 0.0, v]
    }

    #[test]
    fn a1_for_strings_in_the_plane() {
        let l = StateLayout::new(1, 1).unwrap();
        let w = [0.7, -0.3, 0.2, 1.1];
        let a = assemble_a(1, &w, &l).unwrap();
        let flat: Vec<f64> = (0..4).flat_map(|p| (0..4).map(move |q| (p, q))).map(|(p, q)| *a.get(p, q)).collect();
        assert_eq!(flat, hand_a1(&w));
        assert!(assemble_a(2, &w, &l).is_err());
        let zero = assemble_a(1, &[0.0; 4], &l).unwrap();
        assert!((0..4).all(|p| (0..4).all(|q| *zero.get(p, q) == 0.0)));
    }

    #[test]
    fn rhs_tau_row_for_strings() {
        let sys = System::new(1, 1).unwrap();
        let w = [0.8, 0.1, -0.4, 0.3];
        let g = vec![vec![0.5, -0.2, 0.9, 0.7]];
        let dt = rhs_nonconservative_point(&sys, &w, &g).unwrap();
        assert!((dt[0] - (0.8 * 0.9 - (-0.4) * 0.5)).abs() < 1e-15);
        let zero = rhs_nonconservative_point(&sys, &w, &[vec![0.0; 4]]).unwrap();
        assert!(zero.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn fluxes_for_strings_in_the_plane() {
        let l = StateLayout::new(1, 1).unwrap();
        let u = ConservativeState { h: 2.0, d: vec![0.5], p: vec![-0.3], m: vec![0.8] };
        let f = conservative_flux(1, &u, &l, 1e-12).unwrap();
        assert!((f[0] + 0.3).abs() < 1e-15);
        assert!((f[1] - (0.5 * -0.3 + 0.8) / 2.0).abs() < 1e-15);
        assert!((f[2] - (0.09 - 1.0) / 2.0).abs() < 1e-15);
        assert!((f[3] - (0.8 * -0.3 + 0.5) / 2.0).abs() < 1e-15);

        let flat = ConservativeState { h: 1.0, d: vec![0.0], p: vec![0.0], m: vec![0.0] };
        let f = conservative_flux(1, &flat, &l, 1e-12).unwrap();
        assert_eq!(f, vec![0.0, 0.0, -1.0, 0.0]);
        assert_eq!(entropy(&flat, 1e-12).unwrap(), 0.5);
        assert_eq!(entropy_flux(&flat, 1, &l, 1e-12).unwrap(), 0.0);
        let bad = ConservativeState { h: 0.0, ..flat };
        assert!(conservative_flux(1, &bad, &l, 1e-12).is_err());
        assert!(entropy(&bad, 1e-12).is_err());
    }

    #[test]
    fn entropy_is_half_h_on_lifted_states() {
        let l = StateLayout::new(2, 2).unwrap();
        let g = GraphData { f: Matrix::from_rows(&[vec![0.4, -1.0], vec![0.3, 0.9]]).unwrap(), d: vec![0.2, -0.6] };
        let u = lift(&g, &l).unwrap();
        assert!((entropy(&u, 1e-12).unwrap() - u.h / 2.0).abs() < 1e-14);
    }

    #[test]
    fn string_speeds() {
        let l = StateLayout::new(1, 1).unwrap();
        let (p, m, fields) = char_speeds_n1(&[0.5, 0.0, 0.2, 0.0], &l).unwrap();
        assert!((p - 0.7).abs() < 1e-15 && (m + 0.3).abs() < 1e-15);
        assert_eq!(fields[0].multiplicity, 2);
        let (p, m, _) = char_speeds_n1(&[1.0, 0.0, 0.0, 0.0], &l).unwrap();
        assert_eq!((p, m), (1.0, -1.0));
        let l2 = StateLayout::new(1, 2).unwrap();
        assert!(char_speeds_n1(&vec![0.0; l2.dim()], &l2).is_err());
        assert!(linear_degeneracy_residual(&vec![0.0; l2.dim()], &l2).is_err());
    }

    #[test]
    fn flat_degeneracy_residual_is_tiny() {
        let l = StateLayout::new(2, 1).unwrap();
        let mut w = vec![0.0; l.dim()];
        w[0] = 1.0;
        assert!(linear_degeneracy_residual(&w, &l).unwrap() <= 1e-10);
    }

    #[test]
    fn wave_speeds_basic() {
        let l = StateLayout::new(1, 2).unwrap();
        let s = wave_speeds(&vec![0.0; l.dim()], &[0.6, 0.8], &l).unwrap();
        assert!(s.iter().all(|x| *x == 0.0));
        assert!(wave_speeds(&vec![0.0; l.dim()], &[1.0, 1.0], &l).is_err());
        let l1 = StateLayout::new(2, 1).unwrap();
        let w = [0.5, 0.1, -0.2, 0.2, 0.3, -0.4];
        let s = wave_speeds(&w, &[1.0], &l1).unwrap();
        let (p, m, _) = char_speeds_n1(&w, &l1).unwrap();
        for (k, x) in s.iter().enumerate() {
            let expect = if k < 3 { m } else { p };
            assert!((x - expect).abs() < 1e-12, "{s:?}");
        }
    }
}
