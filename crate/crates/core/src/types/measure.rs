use crate::error::{check_dim, Error, Result};
use crate::types::point::{lex_cmp, Point};

/// One weighted atom `w·δ_x`.
#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub x: Point,
    pub w: f64,
}

/// A Lévy measure with finitely many atoms, none at the origin.
///
/// Atoms are kept in canonical form: sorted lexicographically, with bitwise
/// equal locations merged by summing their weights.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteLevyMeasure {
    dim: usize,
    atoms: Vec<Atom>,
}

impl DiscreteLevyMeasure {
    pub fn empty(dim: usize) -> Self {
        DiscreteLevyMeasure { dim, atoms: Vec::new() }
    }

    pub fn new<I>(dim: usize, atoms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<f64>, f64)>,
    {
        if dim == 0 {
            return Err(Error::invalid("d", "dimension must be at least 1"));
        }
        let mut out = Vec::new();
        for (i, (x, w)) in atoms.into_iter().enumerate() {
            if x.len() != dim {
                return Err(Error::invalid(
                    format!("jumps[{i}].x"),
                    format!("has {} coordinates, expected {dim}", x.len()),
                ));
            }
            let x = Point::new(x).map_err(|e| match e {
                Error::Invalid { reason, .. } => Error::invalid(format!("jumps[{i}].x"), reason),
                e => e,
            })?;
            if !w.is_finite() || w <= 0.0 {
                return Err(Error::invalid(
                    format!("jumps[{i}].w"),
                    format!("weight must be positive and finite, got {w}"),
                ));
            }
            if x.is_origin() {
                return Err(Error::invalid(
                    format!("jumps[{i}].x"),
                    "Lévy measures carry no mass at the origin",
                ));
            }
            out.push(Atom { x, w });
        }
        Ok(Self::canonical(dim, out))
    }

    fn canonical(dim: usize, mut atoms: Vec<Atom>) -> Self {
        atoms.sort_by(|a, b| a.x.lex_cmp(&b.x));
        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        for a in atoms {
            match merged.last_mut() {
                Some(last) if last.x == a.x => last.w += a.w,
                _ => merged.push(a),
            }
        }
        DiscreteLevyMeasure { dim, atoms: merged }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[Atom] {
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

    /// `Σ wᵢ |xᵢ|²`.
    pub fn second_moment(&self) -> f64 {
        self.atoms.iter().map(|a| a.w * a.x.norm_sq()).sum()
    }

    /// `Σ wᵢ xᵢ`, the jump mean that global compensation removes.
    pub fn first_moment(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for a in &self.atoms {
            for (mi, xi) in m.iter_mut().zip(a.x.iter()) {
                *mi += a.w * xi;
            }
        }
        m
    }

    /// Mass at exactly `x`, zero if `x` is not an atom.
    pub fn mass_at(&self, x: &[f64]) -> f64 {
        self.position(x).map_or(0.0, |i| self.atoms[i].w)
    }

    pub(crate) fn position(&self, x: &[f64]) -> Option<usize> {
        self.atoms.binary_search_by(|a| lex_cmp(&a.x, x)).ok()
    }

    /// `λμ`; a zero factor yields the empty measure.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !factor.is_finite() || factor < 0.0 {
            return Err(Error::invalid("scale", format!("factor must be >= 0, got {factor}")));
        }
        if factor == 0.0 {
            return Ok(Self::empty(self.dim));
        }
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom { x: a.x.clone(), w: a.w * factor })
            .collect();
        Ok(DiscreteLevyMeasure { dim: self.dim, atoms })
    }

    /// `μ + μ′`.
    pub fn sum(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        let atoms = self.atoms.iter().chain(&other.atoms).cloned().collect();
        Ok(Self::canonical(self.dim, atoms))
    }

    /// Every atom moved by `h`; fails if an atom lands on the origin.
    pub fn translated(&self, h: &[f64]) -> Result<Self> {
        check_dim(self.dim, h.len())?;
        Self::new(
            self.dim,
            self.atoms
                .iter()
                .map(|a| (a.x.iter().zip(h).map(|(x, h)| x + h).collect(), a.w)),
        )
    }

    /// Keeps atoms satisfying `keep`, with weights multiplied by `factor > 0`.
    pub(crate) fn filter_scale(&self, keep: impl Fn(&Atom) -> bool, factor: f64) -> Self {
        let atoms = self
            .atoms
            .iter()
            .filter(|a| keep(a))
            .map(|a| Atom { x: a.x.clone(), w: a.w * factor })
            .collect();
        DiscreteLevyMeasure { dim: self.dim, atoms }
    }

    /// Per-component comparison of canonical forms.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.dim == other.dim
            && self.atoms.len() == other.atoms.len()
            && self.atoms.iter().zip(&other.atoms).all(|(a, b)| {
                (a.w - b.w).abs() <= tol && a.x.iter().zip(b.x.iter()).all(|(p, q)| (p - q).abs() <= tol)
            })
    }
}
