use std::cmp::Ordering;

use crate::error::{check_dim, Error, Result};
use crate::tol;
use crate::types::point::{lex_cmp, Point};
use crate::types::DiscreteLevyMeasure;

/// One atom `w·δ_{(x,y)}` of a coupling; either end may be the origin, not both.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingAtom {
    pub x: Point,
    pub y: Point,
    pub w: f64,
}

impl CouplingAtom {
    /// `½|x − y|²`.
    pub fn cost(&self) -> f64 {
        0.5 * self.x.dist_sq(&self.y)
    }
}

/// A Lévy coupling: a finite measure on `R^{2d}` whose marginals agree with
/// `μ` and `ν` away from the origin.
///
/// Mass at `(0, 0)` is invisible to the marginal condition and costs nothing,
/// so it is dropped on construction.
#[derive(Clone, Debug, PartialEq)]
pub struct LevyCoupling {
    dim: usize,
    atoms: Vec<CouplingAtom>,
}

impl LevyCoupling {
    pub fn new<I>(dim: usize, atoms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<f64>, Vec<f64>, f64)>,
    {
        if dim == 0 {
            return Err(Error::invalid("d", "dimension must be at least 1"));
        }
        let mut out = Vec::new();
        for (i, (x, y, w)) in atoms.into_iter().enumerate() {
            for (name, v) in [("x", &x), ("y", &y)] {
                if v.len() != dim {
                    return Err(Error::invalid(
                        format!("atoms[{i}].{name}"),
                        format!("has {} coordinates, expected {dim}", v.len()),
                    ));
                }
            }
            if !w.is_finite() || w <= 0.0 {
                return Err(Error::invalid(
                    format!("atoms[{i}].w"),
                    format!("weight must be positive and finite, got {w}"),
                ));
            }
            let x = Point::new(x).map_err(|_| Error::invalid(format!("atoms[{i}].x"), "non-finite coordinate"))?;
            let y = Point::new(y).map_err(|_| Error::invalid(format!("atoms[{i}].y"), "non-finite coordinate"))?;
            out.push(CouplingAtom { x, y, w });
        }
        Ok(Self::canonical(dim, out))
    }

    pub(crate) fn canonical(dim: usize, atoms: Vec<CouplingAtom>) -> Self {
        let mut atoms: Vec<_> = atoms
            .into_iter()
            .filter(|a| !(a.x.is_origin() && a.y.is_origin()))
            .collect();
        atoms.sort_by(cmp_pair);
        let mut merged: Vec<CouplingAtom> = Vec::with_capacity(atoms.len());
        for a in atoms {
            match merged.last_mut() {
                Some(last) if last.x == a.x && last.y == a.y => last.w += a.w,
                _ => merged.push(a),
            }
        }
        LevyCoupling { dim, atoms: merged }
    }

    /// `μ⊗δ₀ + δ₀⊗ν`: every jump of one side is matched with no jump on the other.
    pub fn trivial(mu: &DiscreteLevyMeasure, nu: &DiscreteLevyMeasure) -> Result<Self> {
        check_dim(mu.dim(), nu.dim())?;
        let d = mu.dim();
        let atoms = mu
            .atoms()
            .iter()
            .map(|a| CouplingAtom { x: a.x.clone(), y: Point::origin(d), w: a.w })
            .chain(
                nu.atoms()
                    .iter()
                    .map(|b| CouplingAtom { x: Point::origin(d), y: b.x.clone(), w: b.w }),
            )
            .collect();
        Ok(Self::canonical(d, atoms))
    }

    /// The diagonal coupling of `μ` with itself.
    pub fn diagonal(mu: &DiscreteLevyMeasure) -> Self {
        let atoms = mu
            .atoms()
            .iter()
            .map(|a| CouplingAtom { x: a.x.clone(), y: a.x.clone(), w: a.w })
            .collect();
        Self::canonical(mu.dim(), atoms)
    }

    /// `λ·self + (1 − λ)·other` for `λ ∈ [0, 1]`.
    pub fn mixture(&self, other: &Self, lambda: f64) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::invalid("mixture weight", format!("{lambda} not in [0, 1]")));
        }
        let scale = |atoms: &[CouplingAtom], f: f64| {
            atoms
                .iter()
                .filter(move |_| f > 0.0)
                .map(move |a| CouplingAtom { w: a.w * f, ..a.clone() })
                .collect::<Vec<_>>()
        };
        let mut atoms = scale(&self.atoms, lambda);
        atoms.extend(scale(&other.atoms, 1.0 - lambda));
        Ok(Self::canonical(self.dim, atoms))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[CouplingAtom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.w).sum()
    }

    /// `∫ ½|x − y|² dγ`.
    pub fn cost(&self) -> f64 {
        self.atoms.iter().map(|a| a.w * a.cost()).sum()
    }

    /// Support points `(x, y)` of the coupling.
    pub fn support(&self) -> Vec<(Point, Point)> {
        self.atoms.iter().map(|a| (a.x.clone(), a.y.clone())).collect()
    }

    /// The coupling seen as a Lévy measure on `R^{2d}`.
    pub fn as_measure(&self) -> DiscreteLevyMeasure {
        DiscreteLevyMeasure::new(
            2 * self.dim,
            self.atoms.iter().map(|a| (a.x.concat(&a.y).into_vec(), a.w)),
        )
        .expect("canonical couplings hold no atom at the joint origin")
    }

    /// Splits a Lévy measure on `R^{2d}` back into a coupling on `R^d × R^d`.
    pub fn from_joint_measure(joint: &DiscreteLevyMeasure) -> Result<Self> {
        if !joint.dim().is_multiple_of(2) {
            return Err(Error::invalid("d", format!("joint dimension {} is odd", joint.dim())));
        }
        let d = joint.dim() / 2;
        Self::new(
            d,
            joint
                .atoms()
                .iter()
                .map(|a| (a.x[..d].to_vec(), a.x[d..].to_vec(), a.w)),
        )
    }

    /// Marginal restricted to nonzero locations; `source` picks the first factor.
    pub fn marginal(&self, source: bool) -> DiscreteLevyMeasure {
        let atoms = self
            .atoms
            .iter()
            .map(|a| if source { (&a.x, a.w) } else { (&a.y, a.w) })
            .filter(|(p, _)| !p.is_origin())
            .map(|(p, w)| (p.to_vec(), w));
        DiscreteLevyMeasure::new(self.dim, atoms).expect("origin filtered, weights positive")
    }

    /// Swaps the two factors.
    pub fn swapped(&self) -> Self {
        let atoms = self
            .atoms
            .iter()
            .map(|a| CouplingAtom { x: a.y.clone(), y: a.x.clone(), w: a.w })
            .collect();
        Self::canonical(self.dim, atoms)
    }
}

fn cmp_pair(a: &CouplingAtom, b: &CouplingAtom) -> Ordering {
    lex_cmp(&a.x, &b.x).then_with(|| lex_cmp(&a.y, &b.y))
}

/// Which marginal a defect was found on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Source,
    Target,
}

/// Outcome of [`validate_coupling`].
#[derive(Clone, Debug, PartialEq)]
pub struct MarginalCertificate {
    pub passed: bool,
    pub worst_defect: f64,
    /// Location with the largest defect, if any atom exists at all.
    pub worst_location: Option<(Side, Point)>,
    pub tolerance: f64,
}

/// Checks the marginal condition of a Lévy coupling location by location.
///
/// For each nonzero location the coupling's marginal mass must match the
/// corresponding measure within [`tol::marginal`] of the larger total mass.
pub fn validate_coupling(
    gamma: &LevyCoupling,
    mu: &DiscreteLevyMeasure,
    nu: &DiscreteLevyMeasure,
) -> Result<MarginalCertificate> {
    check_dim(gamma.dim(), mu.dim())?;
    check_dim(gamma.dim(), nu.dim())?;
    let tolerance = tol::marginal(mu.total_mass().max(nu.total_mass()));
    let mut worst_defect = 0.0;
    let mut worst_location = None;
    for (side, target) in [(Side::Source, mu), (Side::Target, nu)] {
        let marginal = gamma.marginal(side == Side::Source);
        let locations = marginal.atoms().iter().chain(target.atoms()).map(|a| &a.x);
        for x in locations {
            let defect = (marginal.mass_at(x) - target.mass_at(x)).abs();
            if worst_location.is_none() || defect > worst_defect {
                worst_defect = defect;
                worst_location = Some((side, x.clone()));
            }
        }
    }
    Ok(MarginalCertificate {
        passed: worst_defect <= tolerance,
        worst_defect,
        worst_location,
        tolerance,
    })
}
