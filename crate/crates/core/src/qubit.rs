//! 2×2 operators on the qubit in the basis {|g⟩, |e⟩}.

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::Serialize;

pub type C64 = Complex64;
pub type Mat2 = Matrix2<C64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    State,
    Effect,
    Projector,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitMatrix {
    pub m: Mat2,
    pub role: Role,
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Lowering operator σ = |g⟩⟨e|.
pub fn sigma() -> Mat2 {
    Mat2::new(c(0.0), c(1.0), c(0.0), c(0.0))
}

/// Raising operator σ† = |e⟩⟨g|.
pub fn sigma_dag() -> Mat2 {
    sigma().adjoint()
}

pub fn projector(index: usize) -> Mat2 {
    let mut m = Mat2::zeros();
    m[(index, index)] = c(1.0);
    m
}

impl QubitMatrix {
    pub fn ground_state() -> Self {
        QubitMatrix { m: projector(0), role: Role::State }
    }

    pub fn projector(index: usize) -> Self {
        QubitMatrix { m: projector(index), role: Role::Projector }
    }

    pub fn trace(&self) -> C64 {
        self.m.trace()
    }

    /// Tr{self · other}.
    pub fn trace_with(&self, other: &Mat2) -> C64 {
        (self.m * other).trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        (self.m - self.m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let a = self.m[(0, 0)].re;
        let d = self.m[(1, 1)].re;
        let b = 0.5 * (self.m[(0, 1)] + self.m[(1, 0)].conj());
        let mean = 0.5 * (a + d);
        let r = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        [mean - r, mean + r]
    }

    /// Checks the invariants of the role tag within `tol`.
    pub fn is_valid(&self, tol: f64) -> bool {
        if self.hermiticity_error() > tol {
            return false;
        }
        let [lo, hi] = self.eigenvalues();
        match self.role {
            Role::State => (self.trace().re - 1.0).abs() <= tol && lo >= -tol,
            Role::Effect => lo >= -tol && hi <= 1.0 + tol,
            Role::Projector => (self.m * self.m - self.m).iter().all(|z| z.norm() <= tol),
        }
    }
}
