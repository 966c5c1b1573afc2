//! Point states in primitive (`W`) and conservative (`U`) form, the maps
//! from graph data, and the pointwise constraint residuals.

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::minors::{self, binomial, IndexSet, Matrix, MinorLayout};
use crate::scalar::Scalar;

/// Default guard on `|tau|` and `|h|` for the divisions in the state maps.
pub const DEFAULT_GUARD: f64 = 1e-12;

/// Label of one `φ^α_{A,I}` (`index` = α) or `ψ^i_{A,I}` (`index` = i).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ResidualLabel {
    pub rows: IndexSet,
    pub cols: IndexSet,
    pub index: usize,
}

/// Flat layout of `W = (τ, d_α, v_i, m_{A,I})` and `U = (h, D_α, P_i, M_{A,I})`.
#[derive(Clone, Debug)]
pub struct StateLayout {
    m: usize,
    n: usize,
    minors: MinorLayout,
    phi_labels: Vec<ResidualLabel>,
    psi_labels: Vec<ResidualLabel>,
}

impl StateLayout {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        let minors = MinorLayout::new(m, n)?;
        let mut phi_labels = Vec::new();
        for k in 1..=n {
            if k - 1 > m {
                break;
            }
            for rows in IndexSet::subsets(m, k - 1) {
                for cols in IndexSet::subsets(n, k) {
                    for index in 1..=m {
                        phi_labels.push(ResidualLabel { rows, cols, index });
                    }
                }
            }
        }
        let mut psi_labels = Vec::new();
        for k in 1..=m {
            if k - 1 > n {
                break;
            }
            for rows in IndexSet::subsets(m, k) {
                for cols in IndexSet::subsets(n, k - 1) {
                    for index in 1..=n {
                        psi_labels.push(ResidualLabel { rows, cols, index });
                    }
                }
            }
        }
        Ok(Self { m, n, minors, phi_labels, psi_labels })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn minors(&self) -> &MinorLayout {
        &self.minors
    }

    /// `n + m + C(m+n, n)`.
    pub fn dim(&self) -> usize {
        1 + self.m + self.n + self.minors.len()
    }

    pub const TAU: usize = 0;

    /// Slot of `d_α` (1-based α).
    pub fn d(&self, alpha: usize) -> usize {
        alpha
    }

    /// Slot of `v_i` (1-based i).
    pub fn v(&self, i: usize) -> usize {
        self.m + i
    }

    /// Slot of the `p`-th minor in layout order.
    pub fn minor(&self, p: usize) -> usize {
        1 + self.m + self.n + p
    }

    /// Slot of `m_{A,I}`, routing `A = I = ∅` to `τ`.
    pub fn minor_slot(&self, rows: &IndexSet, cols: &IndexSet) -> Option<usize> {
        if rows.is_empty() && cols.is_empty() {
            return Some(Self::TAU);
        }
        self.minors.index_of(rows, cols).map(|p| self.minor(p))
    }

    pub fn phi_labels(&self) -> &[ResidualLabel] {
        &self.phi_labels
    }

    pub fn psi_labels(&self) -> &[ResidualLabel] {
        &self.psi_labels
    }

    /// Human-readable component names in slot order.
    pub fn component_names(&self) -> Vec<String> {
        let mut names = vec!["tau".to_string()];
        names.extend((1..=self.m).map(|a| format!("d{a}")));
        names.extend((1..=self.n).map(|i| format!("v{i}")));
        names.extend(self.minors.pairs().iter().map(|p| format!("m{:?}{:?}", p.rows, p.cols)));
        names
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrimitiveState<T> {
    pub tau: T,
    pub d: Vec<T>,
    pub v: Vec<T>,
    pub m: Vec<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConservativeState<T> {
    pub h: T,
    pub d: Vec<T>,
    pub p: Vec<T>,
    pub m: Vec<T>,
}

/// Graph data `F_{αi} = ∂_i X^{n+α}` and conjugate momentum `D_α`.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphData<T> {
    pub f: Matrix<T>,
    pub d: Vec<T>,
}

impl<T: Scalar> PrimitiveState<T> {
    pub fn from_slice(layout: &StateLayout, w: &[T]) -> Result<Self> {
        if w.len() != layout.dim() {
            return domain(format!("state of length {} for dimension {}", w.len(), layout.dim()));
        }
        let (m, n) = (layout.m(), layout.n());
        Ok(Self {
            tau: w[0].clone(),
            d: w[1..=m].to_vec(),
            v: w[m + 1..=m + n].to_vec(),
            m: w[m + n + 1..].to_vec(),
        })
    }

    pub fn to_vec(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(1 + self.d.len() + self.v.len() + self.m.len());
        out.push(self.tau.clone());
        out.extend(self.d.iter().cloned());
        out.extend(self.v.iter().cloned());
        out.extend(self.m.iter().cloned());
        out
    }

    /// The flat static state `τ = 1`, everything else zero.
    pub fn flat(layout: &StateLayout) -> Self {
        Self {
            tau: T::one(),
            d: vec![T::zero(); layout.m()],
            v: vec![T::zero(); layout.n()],
            m: vec![T::zero(); layout.minors().len()],
        }
    }
}

impl<T: Scalar> ConservativeState<T> {
    pub fn from_slice(layout: &StateLayout, u: &[T]) -> Result<Self> {
        let w = PrimitiveState::from_slice(layout, u)?;
        Ok(Self { h: w.tau, d: w.d, p: w.v, m: w.m })
    }

    pub fn to_vec(&self) -> Vec<T> {
        PrimitiveState { tau: self.h.clone(), d: self.d.clone(), v: self.p.clone(), m: self.m.clone() }.to_vec()
    }

    /// `1 + |D|² + |P|² + Σ M²`, which equals `h²` on lifted states.
    pub fn energy_numerator(&self) -> T {
        let sq = |xs: &[T]| xs.iter().fold(T::zero(), |acc, x| acc + x.clone() * x.clone());
        T::one() + sq(&self.d) + sq(&self.p) + sq(&self.m)
    }
}

/// `P = FᵀD`, `M = [F]`, `h = sqrt(|D|² + |P|² + ξ(F))`.
pub fn lift<T: Scalar>(g: &GraphData<T>, layout: &StateLayout) -> Result<ConservativeState<T>> {
    let (m, n) = (layout.m(), layout.n());
    if g.f.rows() != m || g.f.cols() != n || g.d.len() != m {
        return domain(format!(
            "graph data {}x{} with |D| = {} against layout ({m}, {n})",
            g.f.rows(),
            g.f.cols(),
            g.d.len()
        ));
    }
    let p: Vec<T> = (0..n)
        .map(|i| (0..m).fold(T::zero(), |acc, a| acc + g.f.at(a, i).clone() * g.d[a].clone()))
        .collect();
    let minors = minors::all_minors(&g.f, layout.minors())?;
    let h2 = lifted_h_squared(g, &p);
    Ok(ConservativeState { h: h2.sqrt(), d: g.d.clone(), p, m: minors })
}

/// `|D|² + |P|² + ξ(F)` with `ξ` from the determinant (no minors involved).
pub fn lifted_h_squared<T: Scalar>(g: &GraphData<T>, p: &[T]) -> T {
    let sq = |xs: &[T]| xs.iter().fold(T::zero(), |acc, x| acc + x.clone() * x.clone());
    sq(&g.d) + sq(p) + minors::xi(&g.f)
}

fn guard<T: Scalar>(x: &T, what: &'static str, eps: f64) -> Result<()> {
    let value = x.abs_f64();
    // NaN fails the comparison and is rejected too.
    if value > eps {
        Ok(())
    } else {
        Err(Error::SingularState { what, value, guard: eps })
    }
}

pub fn to_primitive<T: Scalar>(u: &ConservativeState<T>, eps_h: f64) -> Result<PrimitiveState<T>> {
    guard(&u.h, "h", eps_h)?;
    let h = u.h.clone();
    let scale = |xs: &[T]| xs.iter().map(|x| x.clone() / h.clone()).collect::<Vec<_>>();
    Ok(PrimitiveState { tau: T::one() / h.clone(), d: scale(&u.d), v: scale(&u.p), m: scale(&u.m) })
}

pub fn to_conservative<T: Scalar>(w: &PrimitiveState<T>, eps_tau: f64) -> Result<ConservativeState<T>> {
    guard(&w.tau, "tau", eps_tau)?;
    let tau = w.tau.clone();
    let scale = |xs: &[T]| xs.iter().map(|x| x.clone() / tau.clone()).collect::<Vec<_>>();
    Ok(ConservativeState { h: T::one() / tau.clone(), d: scale(&w.d), p: scale(&w.v), m: scale(&w.m) })
}

/// `F_{αi} = m_{αi}/τ`, `D = d/τ`.
pub fn reconstruct_graph<T: Scalar>(
    w: &PrimitiveState<T>,
    layout: &StateLayout,
    eps_tau: f64,
) -> Result<GraphData<T>> {
    guard(&w.tau, "tau", eps_tau)?;
    let ml = layout.minors();
    let f = Matrix::from_fn(layout.m(), layout.n(), |a, i| {
        w.m[ml.entry_index(a + 1, i + 1)].clone() / w.tau.clone()
    });
    let d = w.d.iter().map(|x| x.clone() / w.tau.clone()).collect();
    Ok(GraphData { f, d })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintResiduals<T> {
    pub lambda: T,
    pub omega: Vec<T>,
    /// `φ^α_{A,I}` in the order of [`StateLayout::phi_labels`].
    pub phi: Vec<T>,
    /// `ψ^i_{A,I}` in the order of [`StateLayout::psi_labels`].
    pub psi: Vec<T>,
}

impl<T: Scalar> ConstraintResiduals<T> {
    pub fn lambda_abs(&self) -> f64 {
        self.lambda.abs_f64()
    }

    pub fn omega_max(&self) -> f64 {
        max_abs(&self.omega)
    }

    pub fn phi_max(&self) -> f64 {
        max_abs(&self.phi)
    }

    pub fn psi_max(&self) -> f64 {
        max_abs(&self.psi)
    }

    pub fn is_zero(&self) -> bool {
        self.lambda.is_zero()
            && self.omega.iter().all(T::is_zero)
            && self.phi.iter().all(T::is_zero)
            && self.psi.iter().all(T::is_zero)
    }
}

fn max_abs<T: Scalar>(xs: &[T]) -> f64 {
    xs.iter().map(T::abs_f64).fold(0.0, f64::max)
}

/// λ, ω, φ, ψ evaluated on a flat primitive state `w`.
pub fn constraint_residuals<T: Scalar>(w: &[T], layout: &StateLayout) -> ConstraintResiduals<T> {
    let (m, n) = (layout.m(), layout.n());
    let tau = &w[StateLayout::TAU];
    let sum_sq = w.iter().fold(T::zero(), |acc, x| acc + x.clone() * x.clone());
    let lambda = (sum_sq - T::one()) / T::from_i64(2);
    let entry = |a: usize, i: usize| &w[layout.minor(layout.minors().entry_index(a, i))];

    let omega = (1..=n)
        .map(|i| {
            (1..=m).fold(tau.clone() * w[layout.v(i)].clone(), |acc, a| {
                acc - entry(a, i).clone() * w[layout.d(a)].clone()
            })
        })
        .collect();

    let get = |rows: &IndexSet, cols: &IndexSet| -> T {
        layout.minor_slot(rows, cols).map_or_else(T::zero, |s| w[s].clone())
    };

    let phi = layout
        .phi_labels()
        .iter()
        .map(|lab| {
            let alpha = lab.index;
            let mut acc = T::zero();
            for i in lab.cols.iter() {
                let s = T::sign(lab.rows.rank(alpha) + lab.cols.rank(i));
                acc = acc + s * get(&lab.rows, &lab.cols.without(i)) * entry(alpha, i).clone();
            }
            if !lab.rows.contains(alpha) {
                acc = acc - tau.clone() * get(&lab.rows.with(alpha), &lab.cols);
            }
            acc
        })
        .collect();

    let psi = layout
        .psi_labels()
        .iter()
        .map(|lab| {
            let i = lab.index;
            let mut acc = T::zero();
            for alpha in lab.rows.iter() {
                let s = T::sign(lab.rows.rank(alpha) + lab.cols.rank(i));
                acc = acc + s * get(&lab.rows.without(alpha), &lab.cols) * entry(alpha, i).clone();
            }
            if !lab.cols.contains(i) {
                acc = acc - tau.clone() * get(&lab.rows, &lab.cols.with(i));
            }
            acc
        })
        .collect();

    ConstraintResiduals { lambda, omega, phi, psi }
}

/// Dimension check helper: `n + m + C(m+n, n)`.
pub fn expected_dim(m: usize, n: usize) -> usize {
    n + m + binomial(m + n, n)
}
