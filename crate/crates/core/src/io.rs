//! JSON reading and writing.
//!
//! Floats are written with 17 significant digits so every value round-trips
//! exactly.

use std::io;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gen_metric::{ConvergenceReport, CoupledTriplet, GeneratorDistance};
use crate::levy_ot::{Potential, TransportSolution};
use crate::tol;
use crate::types::{DiscreteLevyMeasure, LevyCoupling, LevyTriplet, Point, PsdMatrix};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomDto {
    x: Vec<f64>,
    w: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TripletDto {
    d: usize,
    drift: Vec<f64>,
    diffusion: Vec<Vec<f64>>,
    #[serde(default)]
    jumps: Vec<AtomDto>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureDto {
    d: usize,
    #[serde(default)]
    jumps: Vec<AtomDto>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PairAtomDto {
    x: Vec<f64>,
    y: Vec<f64>,
    w: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CouplingDto {
    d: usize,
    atoms: Vec<PairAtomDto>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoupledDto {
    d: usize,
    drift: Vec<f64>,
    diffusion: Vec<Vec<f64>>,
    #[serde(default)]
    jumps: Vec<AtomDto>,
    coupling: CouplingDto,
}

#[derive(Serialize)]
struct PotentialDto {
    x: Vec<f64>,
    value: f64,
}

#[derive(Serialize)]
struct SolutionDto {
    cost: f64,
    plan: Vec<PairAtomDto>,
    phi: Vec<PotentialDto>,
    psi: Vec<PotentialDto>,
    gap: f64,
    monotone: bool,
}

#[derive(Serialize)]
struct DistanceDto {
    total_sq: f64,
    drift_sq: f64,
    diffusion_sq: f64,
    jump_sq: f64,
}

#[derive(Serialize)]
struct ConvergenceEntryDto {
    w_lambda: f64,
    moment_gap: f64,
    battery_defect: f64,
}

#[derive(Serialize)]
struct ConvergenceDto {
    entries: Vec<ConvergenceEntryDto>,
    co_trending: bool,
}

/// A parsed input file: a full triplet or a bare jump measure.
#[derive(Clone, Debug, PartialEq)]
pub enum Input {
    Triplet(LevyTriplet),
    Measure(DiscreteLevyMeasure),
}

impl Input {
    /// Bare measures become pure-jump triplets.
    pub fn into_triplet(self) -> LevyTriplet {
        match self {
            Input::Triplet(t) => t,
            Input::Measure(m) => LevyTriplet::pure_jump(m),
        }
    }
}

struct Precise;

impl serde_json::ser::Formatter for Precise {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

/// Compact JSON with 17 significant digits per float, newline-terminated.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Precise);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

fn check_d(d: usize) -> Result<()> {
    if d == 0 {
        Err(Error::invalid("d", "dimension must be at least 1"))
    } else {
        Ok(())
    }
}

fn point(field: &str, v: Vec<f64>, d: usize) -> Result<Point> {
    if v.len() != d {
        return Err(Error::invalid(field, format!("has {} entries, expected {d}", v.len())));
    }
    Point::new(v).map_err(|_| Error::invalid(field, "non-finite entry"))
}

fn matrix(rows: &[Vec<f64>], d: usize) -> Result<PsdMatrix> {
    if rows.len() != d || rows.iter().any(|r| r.len() != d) {
        return Err(Error::invalid("diffusion", format!("must be {d}x{d}")));
    }
    let m = nalgebra::DMatrix::from_fn(d, d, |i, j| rows[i][j]);
    PsdMatrix::with_field(m, "diffusion")
}

fn measure(d: usize, jumps: Vec<AtomDto>) -> Result<DiscreteLevyMeasure> {
    DiscreteLevyMeasure::new(d, jumps.into_iter().map(|a| (a.x, a.w)))
}

fn atoms_of(m: &DiscreteLevyMeasure) -> Vec<AtomDto> {
    m.atoms()
        .iter()
        .map(|a| AtomDto {
            x: a.x.to_vec(),
            w: a.w,
        })
        .collect()
}

fn coupling_dto(g: &LevyCoupling) -> CouplingDto {
    CouplingDto {
        d: g.dim(),
        atoms: pair_atoms(g),
    }
}

fn pair_atoms(g: &LevyCoupling) -> Vec<PairAtomDto> {
    g.atoms()
        .iter()
        .map(|a| PairAtomDto {
            x: a.x.to_vec(),
            y: a.y.to_vec(),
            w: a.w,
        })
        .collect()
}

fn coupling_from(dto: CouplingDto) -> Result<LevyCoupling> {
    check_d(dto.d)?;
    LevyCoupling::new(dto.d, dto.atoms.into_iter().map(|a| (a.x, a.y, a.w)))
}

/// Reads a triplet, or a measure when `drift` and `diffusion` are both absent.
pub fn parse_input(text: &str) -> Result<Input> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let is_triplet = value.get("drift").is_some() || value.get("diffusion").is_some();
    if is_triplet {
        let dto: TripletDto = serde_json::from_value(value)?;
        Ok(Input::Triplet(triplet_from(dto)?))
    } else {
        let dto: MeasureDto = serde_json::from_value(value)?;
        check_d(dto.d)?;
        Ok(Input::Measure(measure(dto.d, dto.jumps)?))
    }
}

fn triplet_from(dto: TripletDto) -> Result<LevyTriplet> {
    check_d(dto.d)?;
    let drift = point("drift", dto.drift, dto.d)?;
    let diffusion = matrix(&dto.diffusion, dto.d)?;
    LevyTriplet::new(drift, diffusion, measure(dto.d, dto.jumps)?)
}

pub fn parse_triplet(text: &str) -> Result<LevyTriplet> {
    triplet_from(serde_json::from_str(text)?)
}

pub fn parse_measure(text: &str) -> Result<DiscreteLevyMeasure> {
    let dto: MeasureDto = serde_json::from_str(text)?;
    check_d(dto.d)?;
    measure(dto.d, dto.jumps)
}

pub fn parse_coupling(text: &str) -> Result<LevyCoupling> {
    coupling_from(serde_json::from_str(text)?)
}

/// Reads a coupled triplet; its `jumps`, if present, must agree with `coupling`.
pub fn parse_coupled(text: &str) -> Result<CoupledTriplet> {
    let dto: CoupledDto = serde_json::from_str(text)?;
    let jumps = coupling_from(dto.coupling)?;
    if dto.d != 2 * jumps.dim() {
        return Err(Error::invalid("d", format!("expected {} for a coupling in dimension {}", 2 * jumps.dim(), jumps.dim())));
    }
    let drift = point("drift", dto.drift, dto.d)?;
    let diffusion = matrix(&dto.diffusion, dto.d)?;
    if !dto.jumps.is_empty() {
        let listed = measure(dto.d, dto.jumps)?;
        if !listed.approx_eq(&jumps.as_measure(), tol::CANONICAL) {
            return Err(Error::invalid("jumps", "disagrees with coupling"));
        }
    }
    CoupledTriplet::new(drift, diffusion, jumps)
}

pub fn triplet_to_json(t: &LevyTriplet) -> Result<String> {
    to_json_string(&TripletDto {
        d: t.dim(),
        drift: t.drift().to_vec(),
        diffusion: t.diffusion().to_rows(),
        jumps: atoms_of(t.jumps()),
    })
}

pub fn measure_to_json(m: &DiscreteLevyMeasure) -> Result<String> {
    to_json_string(&MeasureDto {
        d: m.dim(),
        jumps: atoms_of(m),
    })
}

pub fn coupling_to_json(g: &LevyCoupling) -> Result<String> {
    to_json_string(&coupling_dto(g))
}

pub fn coupled_to_json(j: &CoupledTriplet) -> Result<String> {
    to_json_string(&CoupledDto {
        d: 2 * j.dim(),
        drift: j.drift().to_vec(),
        diffusion: j.diffusion().to_rows(),
        jumps: atoms_of(&j.jumps().as_measure()),
        coupling: coupling_dto(j.jumps()),
    })
}

fn potential_dto(p: &Potential) -> Vec<PotentialDto> {
    p.entries()
        .iter()
        .map(|(x, v)| PotentialDto {
            x: x.to_vec(),
            value: *v,
        })
        .collect()
}

pub fn solution_to_json(s: &TransportSolution) -> Result<String> {
    to_json_string(&SolutionDto {
        cost: s.cost,
        plan: pair_atoms(&s.plan),
        phi: potential_dto(&s.phi),
        psi: potential_dto(&s.psi),
        gap: s.duality_gap,
        monotone: s.monotone_certified,
    })
}

pub fn distance_to_json(g: &GeneratorDistance) -> Result<String> {
    to_json_string(&DistanceDto {
        total_sq: g.total_sq,
        drift_sq: g.drift_sq,
        diffusion_sq: g.diffusion_sq,
        jump_sq: g.jump_sq,
    })
}

pub fn convergence_to_json(r: &ConvergenceReport) -> Result<String> {
    to_json_string(&ConvergenceDto {
        entries: r
            .entries
            .iter()
            .map(|e| ConvergenceEntryDto {
                w_lambda: e.w_lambda,
                moment_gap: e.moment_gap,
                battery_defect: e.battery_defect,
            })
            .collect(),
        co_trending: r.co_trending,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplet_round_trip_is_exact() {
        let text = r#"{"d":2,"drift":[0.1,-3.3],"diffusion":[[2.0,0.3],[0.3,1.0]],
                       "jumps":[{"x":[1.0,0.7],"w":0.3},{"x":[-0.2,0.0],"w":1e-3}]}"#;
        let t = parse_triplet(text).unwrap();
        let back = parse_triplet(&triplet_to_json(&t).unwrap()).unwrap();
        assert_eq!(t, back);
        assert_eq!(t.mean_vector(), back.mean_vector());
    }

    #[test]
    fn seventeen_digits() {
        let s = to_json_string(&[0.1_f64, -1.0 / 3.0]).unwrap();
        assert_eq!(s, "[1.0000000000000001e-1,-3.3333333333333331e-1]\n");
        let back: Vec<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, vec![0.1, -1.0 / 3.0]);
    }

    #[test]
    fn input_kind_is_detected() {
        assert!(matches!(parse_input(r#"{"d":1,"jumps":[{"x":[1.0],"w":1.0}]}"#).unwrap(), Input::Measure(_)));
        assert!(matches!(
            parse_input(r#"{"d":1,"drift":[0.0],"diffusion":[[1.0]]}"#).unwrap(),
            Input::Triplet(_)
        ));
    }

    #[test]
    fn diagnostics_name_the_field() {
        let err = parse_input(r#"{"d":1,"jumps":[{"x":[1.0],"w":1.0},{"x":[2.0],"w":-1.0}]}"#).unwrap_err();
        assert!(err.to_string().contains("jumps[1].w"), "{err}");
        let err = parse_input(r#"{"d":1,"jumps":[{"x":[0.0],"w":1.0}]}"#).unwrap_err();
        assert!(err.to_string().contains("jumps[0].x"), "{err}");
        let err = parse_input(r#"{"d":2,"drift":[0.0,0.0],"diffusion":[[1.0,2.0],[2.0,1.0]]}"#).unwrap_err();
        assert!(err.to_string().contains("diffusion"), "{err}");
        let err = parse_input("{\"d\":1,\n\"jumps\":[{\"x\":[NaN],\"w\":1.0}]}").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn coupling_round_trip() {
        let g = LevyCoupling::new(1, [(vec![1.0], vec![0.0], 0.5), (vec![0.0], vec![-2.0], 1.5)]).unwrap();
        assert_eq!(parse_coupling(&coupling_to_json(&g).unwrap()).unwrap(), g);
    }
}
