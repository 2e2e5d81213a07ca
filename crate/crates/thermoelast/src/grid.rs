//! Uniform staggered grid on the unit interval.
//!
//! Displacement, velocity and heat flux live on the interior nodes
//! `x_j = j*h`, `j = 1..=n`; the temperature lives on the `n + 1`
//! midpoints `(j + 1/2)*h`, `j = 0..=n`, so that first-difference
//! operators between the two families are second-order accurate and
//! exactly adjoint under the uniform quadrature weight `h`.

use ndarray::Array1;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    n_interior: usize,
    h: f64,
    nodes: Array1<f64>,
    midpoints: Array1<f64>,
}

impl Grid {
    /// Build the grid with `n_interior >= 2` interior nodes; `h = 1/(n+1)`.
    pub fn new(n_interior: usize) -> Result<Self> {
        if n_interior < 2 {
            return Err(Error::invalid(
                "n_interior",
                format!("must be >= 2, got {n_interior} (degenerate discretization)"),
            ));
        }
        let h = 1.0 / (n_interior as f64 + 1.0);
        let nodes = Array1::from_iter((1..=n_interior).map(|j| j as f64 * h));
        let midpoints = Array1::from_iter((0..=n_interior).map(|j| (j as f64 + 0.5) * h));
        Ok(Grid {
            n_interior,
            h,
            nodes,
            midpoints,
        })
    }

    pub fn n_interior(&self) -> usize {
        self.n_interior
    }

    /// Uniform spacing, also the quadrature weight of all inner products.
    pub fn spacing(&self) -> f64 {
        self.h
    }

    /// Interior node coordinates `j*h`, strictly inside (0, 1).
    pub fn nodes(&self) -> &Array1<f64> {
        &self.nodes
    }

    /// Midpoint coordinates `(j + 1/2)*h` in [0, 1].
    pub fn midpoints(&self) -> &Array1<f64> {
        &self.midpoints
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate() {
        assert!(Grid::new(0).is_err());
        assert!(Grid::new(1).is_err());
        assert!(Grid::new(2).is_ok());
    }

    #[test]
    fn spacing_examples() {
        assert_eq!(Grid::new(3).unwrap().spacing(), 0.25);
        assert!((Grid::new(2).unwrap().spacing() - 1.0 / 3.0).abs() < 1e-16);
        assert!((Grid::new(199).unwrap().spacing() - 0.005).abs() < 1e-18);
    }

    #[test]
    fn node_coordinates() {
        let g = Grid::new(3).unwrap();
        assert_eq!(g.nodes().to_vec(), vec![0.25, 0.5, 0.75]);
        assert_eq!(g.midpoints().len(), 4);
        // strictly increasing, inside the interval
        for w in g.nodes().to_vec().windows(2) {
            assert!(w[0] < w[1]);
        }
        for w in g.midpoints().to_vec().windows(2) {
            assert!(w[0] < w[1]);
        }
        assert!(g.nodes()[0] > 0.0 && g.nodes()[2] < 1.0);
        assert!(g.midpoints()[0] > 0.0 && g.midpoints()[3] < 1.0);
    }

    #[test]
    fn spacing_consistency() {
        for n in [2usize, 5, 17, 100, 399] {
            let g = Grid::new(n).unwrap();
            assert!((g.spacing() * (n as f64 + 1.0) - 1.0).abs() <= 1e-15);
        }
    }
}
