//! Labeled fixtures, their JSON form, seeded random families, and the
//! parabola separation certificate.

use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::cone::Cone;
use crate::conjugate::PiecewiseLinearFn;
use crate::continuity::{verdict_matrix, CheckerConfig, Concept, VerdictMatrix};
use crate::duality::BivariateMap;
use crate::error::{Error, Result};
use crate::lp::Halfspace;
use crate::oracle::ParabolaSet;
use crate::polyhedron::Polyhedron;
use crate::rational::{fmt_q, fmt_vec, parse_q, q, qr, qvec, to_f64, zeros, Q};
use crate::scalarize::DirectionBase;
use crate::setmap::{AffineFamily, AffineScalar, Body, Guard, SetValuedMap};
use crate::upperset::{embed_point, Repr, UpperSet};
use crate::verdict::Status;

#[derive(Clone, Debug)]
pub enum FixtureMap {
    Single(SetValuedMap),
    Bivariate(BivariateMap),
}

impl FixtureMap {
    pub fn map(&self) -> &SetValuedMap {
        match self {
            FixtureMap::Single(f) => f,
            FixtureMap::Bivariate(b) => &b.map,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledPoint {
    pub x0: Vec<Q>,
    pub labels: Vec<(Concept, Status)>,
}

#[derive(Clone, Debug)]
pub struct Fixture {
    pub id: String,
    pub map: FixtureMap,
    pub points: Vec<LabeledPoint>,
    pub notes: String,
}

fn point(x0: &[i64], labels: &[(Concept, Status)]) -> LabeledPoint {
    let mut labels = labels.to_vec();
    labels.sort_by_key(|(c, _)| *c);
    LabeledPoint { x0: qvec(x0), labels }
}

/// The upward ray `{z : z1 = 0, z2 ≥ 0}`.
pub fn vertical_ray() -> Cone {
    Cone::from_generators(2, vec![qvec(&[0, 1])]).expect("valid generator")
}

/// `x ↦ (x, 0) + C` with `C` the upward ray.
pub fn sliding_ray() -> SetValuedMap {
    let normals = vec![qvec(&[1, 0]), qvec(&[-1, 0]), qvec(&[0, 1])];
    let slopes = vec![qvec(&[1]), qvec(&[-1]), qvec(&[0])];
    SetValuedMap::affine(1, &vertical_ray(), normals, vec![q(0); 3], slopes).expect("consistent dimensions")
}

/// `C` for `x ≥ 0` and `∅` otherwise, with `C` the upward ray.
pub fn switch_on() -> SetValuedMap {
    let c = vertical_ray();
    let body = Body::Piecewise {
        guard: Guard { normal: qvec(&[1]), offset: q(0), strict: false },
        then: Box::new(Body::Constant(embed_point(&qvec(&[0, 0]), &c))),
        otherwise: Box::new(Body::Constant(UpperSet::empty(&c))),
    };
    SetValuedMap::new(1, &c, body).expect("consistent dimensions")
}

/// `x·A + R²_+` for `x ≥ 0`, `∅` otherwise, with `A = {z2 ≥ z1²}`.
pub fn scaled_parabola() -> SetValuedMap {
    let c = Cone::orthant(2);
    let base = UpperSet::oracle(&c, Arc::new(ParabolaSet::new(q(1)))).expect("dimension 2");
    let body = Body::ScaledBase { base, alpha: AffineScalar { coeffs: qvec(&[1]), constant: q(0) } };
    SetValuedMap::new(1, &c, body).expect("consistent dimensions")
}

/// `{z1 + x z2 ≥ 1 + x}` for `x > 0`, `R²_+` otherwise.
pub fn tilted_halfspace() -> SetValuedMap {
    let c = Cone::orthant(2);
    let body = Body::Piecewise {
        guard: Guard { normal: qvec(&[1]), offset: q(0), strict: true },
        then: Box::new(Body::Affine(AffineFamily {
            normals: vec![qvec(&[1, 0])],
            normal_slopes: vec![vec![qvec(&[0, 1])]],
            offsets: vec![q(1)],
            slopes: vec![qvec(&[1])],
        })),
        otherwise: Box::new(Body::Constant(embed_point(&qvec(&[0, 0]), &c))),
    };
    SetValuedMap::new(1, &c, body).expect("consistent dimensions")
}

/// `{z ≥ |x| + |x − y|}` over `R_+`.
pub fn two_kinks() -> BivariateMap {
    let c = Cone::orthant(1);
    let slopes = vec![qvec(&[2, -1]), qvec(&[0, 1]), qvec(&[0, -1]), qvec(&[-2, 1])];
    let map = SetValuedMap::affine(2, &c, vec![qvec(&[1]); 4], vec![q(0); 4], slopes).expect("consistent dimensions");
    BivariateMap::new(map, 1).expect("split fits")
}

/// `{z ≥ max(1 − y, 2y + 1)}`, constant in x.
pub fn y_only() -> BivariateMap {
    let c = Cone::orthant(1);
    let slopes = vec![qvec(&[0, -1]), qvec(&[0, 2])];
    let map = SetValuedMap::affine(2, &c, vec![qvec(&[1]); 2], vec![q(1); 2], slopes).expect("consistent dimensions");
    BivariateMap::new(map, 1).expect("split fits")
}

/// `(|x| + |x − y|, |y|) + R²_+`.
pub fn planar_kinks() -> BivariateMap {
    let c = Cone::orthant(2);
    let mut normals = vec![qvec(&[1, 0]); 4];
    normals.extend([qvec(&[0, 1]), qvec(&[0, 1])]);
    let slopes = vec![qvec(&[2, -1]), qvec(&[0, 1]), qvec(&[0, -1]), qvec(&[-2, 1]), qvec(&[0, 1]), qvec(&[0, -1])];
    let map = SetValuedMap::affine(2, &c, normals, vec![q(0); 6], slopes).expect("consistent dimensions");
    BivariateMap::new(map, 1).expect("split fits")
}

/// `{z ≥ |x|}` on `y ≥ x`: the value at `(0, y)` jumps to `∅` for `y < 0`.
pub fn cliff() -> BivariateMap {
    let c = Cone::orthant(1);
    let normals = vec![qvec(&[1]), qvec(&[1]), qvec(&[0])];
    let slopes = vec![qvec(&[1, 0]), qvec(&[-1, 0]), qvec(&[1, -1])];
    let map = SetValuedMap::affine(2, &c, normals, vec![q(0); 3], slopes).expect("consistent dimensions");
    BivariateMap::new(map, 1).expect("split fits")
}

/// `{z ≥ −|x|}`: not convex.
pub fn concave_kink() -> SetValuedMap {
    let c = Cone::orthant(1);
    let side = |s: i64| {
        Body::Affine(AffineFamily {
            normals: vec![qvec(&[1])],
            normal_slopes: Vec::new(),
            offsets: vec![q(0)],
            slopes: vec![qvec(&[s])],
        })
    };
    let body = Body::Piecewise {
        guard: Guard { normal: qvec(&[1]), offset: q(0), strict: false },
        then: Box::new(side(-1)),
        otherwise: Box::new(side(1)),
    };
    SetValuedMap::new(1, &c, body).expect("consistent dimensions")
}

pub fn builtin_fixtures() -> Vec<Fixture> {
    use Concept::*;
    use Status::{Fails, Holds};
    let ray_labels = [(Hlc, Holds), (Uls, Fails), (Lc, Holds), (Lba, Fails), (Eff, Holds)];
    vec![
        Fixture {
            id: "sliding-ray".into(),
            map: FixtureMap::Single(sliding_ray()),
            points: [-1, 0, 2].iter().map(|&x| point(&[x], &ray_labels)).collect(),
            notes: "convex and Hausdorff lower continuous everywhere, never upper lattice-semicontinuous".into(),
        },
        Fixture {
            id: "switch-on".into(),
            map: FixtureMap::Single(switch_on()),
            points: vec![point(&[0], &[(Uc, Holds), (Eff, Fails), (Lc, Fails), (Lba, Fails)])],
            notes: "convex and upper continuous at 0 but not efficient there".into(),
        },
        Fixture {
            id: "scaled-parabola".into(),
            map: FixtureMap::Single(scaled_parabola()),
            points: vec![
                point(
                    &[1],
                    &[
                        (Uls, Holds),
                        (Lls, Holds),
                        (Huc, Fails),
                        (Hlc, Fails),
                        (CminusUsc, Holds),
                        (CminusLsc, Holds),
                    ],
                ),
                point(&[0], &[(Lls, Holds), (CminusLsc, Fails)]),
            ],
            notes: "lattice-semicontinuous at 1 without either Hausdorff continuity; scalarizations continuous at 1; \
                    lower lattice-semicontinuous at 0 with a scalarization that is not lower semicontinuous"
                .into(),
        },
        Fixture {
            id: "tilted-halfspace".into(),
            map: FixtureMap::Single(tilted_halfspace()),
            points: vec![point(&[0], &[(Lc, Fails), (CminusUsc, Holds)])],
            notes: "every scalarization upper semicontinuous at 0, yet not lower continuous".into(),
        },
        Fixture {
            id: "two-kinks".into(),
            map: FixtureMap::Bivariate(two_kinks()),
            points: vec![],
            notes: "duality: f_X(0) = {z >= 0}, zero gap".into(),
        },
        Fixture {
            id: "y-only".into(),
            map: FixtureMap::Bivariate(y_only()),
            points: vec![],
            notes: "duality: constant in x, the family is a subgradient".into(),
        },
        Fixture {
            id: "planar-kinks".into(),
            map: FixtureMap::Bivariate(planar_kinks()),
            points: vec![],
            notes: "duality in two image dimensions".into(),
        },
        Fixture {
            id: "cliff".into(),
            map: FixtureMap::Bivariate(cliff()),
            points: vec![],
            notes: "duality refused: the y-slice scalarization jumps to +inf left of 0".into(),
        },
        Fixture {
            id: "concave-kink".into(),
            map: FixtureMap::Single(concave_kink()),
            points: vec![],
            notes: "not convex".into(),
        },
    ]
}

pub fn builtin(id: &str) -> Result<Fixture> {
    builtin_fixtures().into_iter().find(|f| f.id == id).ok_or_else(|| Error::UnknownFixture(id.to_string()))
}

/// Fixtures whose map is polyhedral-valued and piecewise linear in `x`.
pub fn pl_bivariate_fixtures() -> Vec<(String, BivariateMap)> {
    builtin_fixtures()
        .into_iter()
        .filter_map(|f| match f.map {
            FixtureMap::Bivariate(b) => Some((f.id, b)),
            _ => None,
        })
        .collect()
}

// ---------------------------------------------------------------------------
// label reproduction

#[derive(Clone, Debug, PartialEq)]
pub struct Mismatch {
    pub fixture: String,
    pub x0: Vec<Q>,
    pub concept: Concept,
    pub expected: Status,
    pub got: Status,
}

#[derive(Clone, Debug)]
pub struct PointRun {
    pub fixture: String,
    pub matrix: VerdictMatrix,
    pub mismatches: Vec<Mismatch>,
}

/// Verdict matrices at every labeled point, compared with the labels.
pub fn run_labels(fixtures: &[Fixture], cfg: &CheckerConfig) -> Result<Vec<PointRun>> {
    let jobs: Vec<(&Fixture, &LabeledPoint)> =
        fixtures.iter().flat_map(|f| f.points.iter().map(move |p| (f, p))).collect();
    jobs.par_iter()
        .map(|(f, p)| {
            let map = f.map.map();
            let base = DirectionBase::fan(map.cone(), cfg.fan);
            let matrix = verdict_matrix(map, &p.x0, cfg, &base)?;
            let mismatches = p
                .labels
                .iter()
                .filter(|(c, s)| matrix.status(*c) != *s)
                .map(|&(concept, expected)| Mismatch {
                    fixture: f.id.clone(),
                    x0: p.x0.clone(),
                    concept,
                    expected,
                    got: matrix.status(concept),
                })
                .collect();
            Ok(PointRun { fixture: f.id.clone(), matrix, mismatches })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// JSON

fn num(v: &Value) -> Result<Q> {
    match v {
        Value::String(s) => parse_q(s),
        Value::Number(n) => parse_q(&n.to_string()),
        _ => Err(Error::Malformed(format!("expected a number, got {v}"))),
    }
}

fn vector(v: &Value) -> Result<Vec<Q>> {
    v.as_array().ok_or_else(|| Error::Malformed(format!("expected an array, got {v}")))?.iter().map(num).collect()
}

fn matrix(v: &Value) -> Result<Vec<Vec<Q>>> {
    v.as_array().ok_or_else(|| Error::Malformed(format!("expected an array of rows, got {v}")))?.iter().map(vector).collect()
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| Error::Malformed(format!("missing field {key:?}")))
}

fn usize_field(v: &Value, key: &str) -> Result<usize> {
    field(v, key)?.as_u64().map(|n| n as usize).ok_or_else(|| Error::Malformed(format!("{key:?} must be a count")))
}

fn rows_json(rows: &[Halfspace]) -> Value {
    Value::Array(rows.iter().map(|h| json!({"normal": fmt_vec(&h.normal), "offset": fmt_q(&h.offset)})).collect())
}

fn rows_from(v: &Value) -> Result<Vec<Halfspace>> {
    v.as_array()
        .ok_or_else(|| Error::Malformed("rows must be an array".into()))?
        .iter()
        .map(|r| Ok(Halfspace::new(vector(field(r, "normal")?)?, num(field(r, "offset")?)?)))
        .collect()
}

pub fn cone_to_json(c: &Cone) -> Value {
    json!({"dim": c.dim(), "generators": c.generators().iter().map(|g| fmt_vec(g)).collect::<Vec<_>>()})
}

pub fn cone_from_json(v: &Value) -> Result<Cone> {
    let dim = usize_field(v, "dim")?;
    match (v.get("generators"), v.get("halfspaces")) {
        (Some(g), _) => Cone::from_generators(dim, matrix(g)?),
        (None, Some(h)) => Cone::from_halfspaces(dim, matrix(h)?),
        _ => Err(Error::Malformed("cone needs generators or halfspaces".into())),
    }
}

pub fn set_to_json(s: &UpperSet) -> Result<Value> {
    if s.is_empty() {
        return Ok(json!({"kind": "empty"}));
    }
    Ok(match s.repr() {
        Repr::Polyhedral(pieces) if pieces.len() == 1 => json!({"kind": "halfspaces", "rows": rows_json(pieces[0].rows())}),
        Repr::Polyhedral(pieces) => {
            json!({"kind": "union", "pieces": pieces.iter().map(|p| rows_json(p.rows())).collect::<Vec<_>>()})
        }
        Repr::Oracle(f) => match f.as_any().downcast_ref::<ParabolaSet>() {
            Some(p) => json!({"kind": "parabola", "scale": fmt_q(&p.scale)}),
            None => return Err(Error::Unsupported(format!("no JSON form for {}", f.describe()))),
        },
    })
}

pub fn set_from_json(v: &Value, c: &Cone) -> Result<UpperSet> {
    let kind = field(v, "kind")?.as_str().unwrap_or_default();
    match kind {
        "empty" => Ok(UpperSet::empty(c)),
        "universe" => Ok(UpperSet::universe(c)),
        "point" => Ok(embed_point(&vector(field(v, "at")?)?, c)),
        "halfspaces" => UpperSet::from_halfspaces(c, rows_from(field(v, "rows")?)?),
        "union" => {
            let pieces = field(v, "pieces")?
                .as_array()
                .ok_or_else(|| Error::Malformed("pieces must be an array".into()))?
                .iter()
                .map(|p| Polyhedron::new(c.dim(), rows_from(p)?))
                .collect::<Result<Vec<_>>>()?;
            UpperSet::from_union(c, pieces)
        }
        "parabola" => {
            let scale = num(field(v, "scale")?)?;
            if !scale.is_positive() {
                return Err(Error::Malformed("parabola scale must be positive".into()));
            }
            UpperSet::oracle(c, Arc::new(ParabolaSet::new(scale)))
        }
        other => Err(Error::Malformed(format!("unknown set kind {other:?}"))),
    }
}

pub fn body_to_json(b: &Body) -> Result<Value> {
    Ok(match b {
        Body::Affine(a) => {
            let mut m = Map::new();
            m.insert("kind".into(), json!("affine_halfspace"));
            m.insert("normals".into(), json!(a.normals.iter().map(|r| fmt_vec(r)).collect::<Vec<_>>()));
            m.insert("offsets".into(), json!(fmt_vec(&a.offsets)));
            m.insert("slopes".into(), json!(a.slopes.iter().map(|r| fmt_vec(r)).collect::<Vec<_>>()));
            if !a.fixed_normals() {
                let ns: Vec<Vec<Vec<String>>> =
                    a.normal_slopes.iter().map(|nk| nk.iter().map(|r| fmt_vec(r)).collect()).collect();
                m.insert("normal_slopes".into(), json!(ns));
            }
            Value::Object(m)
        }
        Body::ScaledBase { base, alpha } => json!({
            "kind": "scaled_base",
            "base": set_to_json(base)?,
            "alpha": {"coeffs": fmt_vec(&alpha.coeffs), "constant": fmt_q(&alpha.constant)},
        }),
        Body::Constant(v) => json!({"kind": "constant", "value": set_to_json(v)?}),
        Body::Piecewise { guard, then, otherwise } => json!({
            "kind": "piecewise",
            "guard": {"normal": fmt_vec(&guard.normal), "offset": fmt_q(&guard.offset), "strict": guard.strict},
            "then": body_to_json(then)?,
            "otherwise": body_to_json(otherwise)?,
        }),
    })
}

pub fn body_from_json(v: &Value, c: &Cone) -> Result<Body> {
    let kind = field(v, "kind")?.as_str().unwrap_or_default();
    match kind {
        "affine_halfspace" => {
            let normal_slopes = match v.get("normal_slopes") {
                Some(ns) => ns
                    .as_array()
                    .ok_or_else(|| Error::Malformed("normal_slopes must be an array".into()))?
                    .iter()
                    .map(matrix)
                    .collect::<Result<Vec<_>>>()?,
                None => Vec::new(),
            };
            Ok(Body::Affine(AffineFamily {
                normals: matrix(field(v, "normals")?)?,
                normal_slopes,
                offsets: vector(field(v, "offsets")?)?,
                slopes: matrix(field(v, "slopes")?)?,
            }))
        }
        "scaled_base" => {
            let alpha = field(v, "alpha")?;
            Ok(Body::ScaledBase {
                base: set_from_json(field(v, "base")?, c)?,
                alpha: AffineScalar { coeffs: vector(field(alpha, "coeffs")?)?, constant: num(field(alpha, "constant")?)? },
            })
        }
        "constant" => Ok(Body::Constant(set_from_json(field(v, "value")?, c)?)),
        "piecewise" => {
            let g = field(v, "guard")?;
            Ok(Body::Piecewise {
                guard: Guard {
                    normal: vector(field(g, "normal")?)?,
                    offset: num(field(g, "offset")?)?,
                    strict: g.get("strict").and_then(Value::as_bool).unwrap_or(false),
                },
                then: Box::new(body_from_json(field(v, "then")?, c)?),
                otherwise: Box::new(body_from_json(field(v, "otherwise")?, c)?),
            })
        }
        other => Err(Error::Malformed(format!("unknown body kind {other:?}"))),
    }
}

pub fn fixture_to_json(f: &Fixture) -> Result<Value> {
    let map = f.map.map();
    let mut v = json!({
        "id": f.id,
        "notes": f.notes,
        "domain_dim": map.domain_dim(),
        "cone": cone_to_json(map.cone()),
        "body": body_to_json(map.body())?,
        "labels": f.points.iter().map(|p| {
            let expect: Map<String, Value> =
                p.labels.iter().map(|(c, s)| (c.name().to_string(), json!(s.label()))).collect();
            json!({"at": fmt_vec(&p.x0), "expect": expect})
        }).collect::<Vec<_>>(),
    });
    if let FixtureMap::Bivariate(b) = &f.map {
        v["x_dim"] = json!(b.n);
    }
    Ok(v)
}

fn status_from(s: &str) -> Result<Status> {
    match s {
        "holds" => Ok(Status::Holds),
        "fails" => Ok(Status::Fails),
        "inconclusive" => Ok(Status::Inconclusive),
        other => Err(Error::Malformed(format!("unknown status {other:?}"))),
    }
}

pub fn fixture_from_json(v: &Value) -> Result<Fixture> {
    let cone = cone_from_json(field(v, "cone")?)?;
    let n = usize_field(v, "domain_dim")?;
    let body = body_from_json(field(v, "body")?, &cone)?;
    let map = SetValuedMap::new(n, &cone, body)?;
    let map = match v.get("x_dim") {
        Some(k) => FixtureMap::Bivariate(BivariateMap::new(
            map,
            k.as_u64().ok_or_else(|| Error::Malformed("x_dim must be a count".into()))? as usize,
        )?),
        None => FixtureMap::Single(map),
    };
    let mut points = Vec::new();
    if let Some(labels) = v.get("labels") {
        for p in labels.as_array().ok_or_else(|| Error::Malformed("labels must be an array".into()))? {
            let x0 = vector(field(p, "at")?)?;
            crate::error::check_dim(n, x0.len())?;
            let mut ls = Vec::new();
            if let Some(Value::Object(exp)) = p.get("expect") {
                for (k, s) in exp {
                    let c = Concept::from_name(k).ok_or_else(|| Error::Malformed(format!("unknown concept {k:?}")))?;
                    ls.push((c, status_from(s.as_str().unwrap_or_default())?));
                }
            }
            ls.sort_by_key(|(c, _)| *c);
            points.push(LabeledPoint { x0, labels: ls });
        }
    }
    Ok(Fixture {
        id: v.get("id").and_then(Value::as_str).unwrap_or("fixture").to_string(),
        map,
        points,
        notes: v.get("notes").and_then(Value::as_str).unwrap_or_default().to_string(),
    })
}

// ---------------------------------------------------------------------------
// random families

/// A random convex affine map `R^n → F(R^m, C)` with small integer data and
/// normals in the dual of `C`, together with sample points.
pub fn random_convex_affine(seed: u64) -> (SetValuedMap, Vec<Vec<Q>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=2usize);
    let (c, gens_dual): (Cone, Vec<Vec<Q>>) = match rng.gen_range(0..3) {
        0 => (Cone::orthant(2), vec![qvec(&[1, 0]), qvec(&[0, 1])]),
        1 => (vertical_ray(), vec![qvec(&[0, 1]), qvec(&[1, 0]), qvec(&[-1, 0])]),
        // the wedge spanned by (1, 0) and (1, 1)
        _ => (
            Cone::from_generators(2, vec![qvec(&[1, 0]), qvec(&[1, 1])]).expect("valid generators"),
            vec![qvec(&[0, 1]), qvec(&[1, -1])],
        ),
    };
    let rows = rng.gen_range(1..=4usize);
    let mut normals = Vec::with_capacity(rows);
    for _ in 0..rows {
        let mut nrm = zeros(2);
        while nrm.iter().all(Q::is_zero) {
            for g in &gens_dual {
                let w = q(rng.gen_range(0..=2));
                for (a, b) in nrm.iter_mut().zip(g) {
                    *a += &w * b;
                }
            }
        }
        normals.push(nrm);
    }
    let offsets = (0..rows).map(|_| q(rng.gen_range(-3..=3))).collect();
    let slopes = (0..rows).map(|_| (0..n).map(|_| q(rng.gen_range(-2..=2))).collect()).collect();
    let f = SetValuedMap::affine(n, &c, normals, offsets, slopes).expect("consistent dimensions");
    let points = (0..5).map(|_| (0..n).map(|_| qr(rng.gen_range(-6..=6), 2)).collect()).collect();
    (f, points)
}

/// A random finite max-affine function on a random box in `R^n`, `n ≤ 2`.
pub fn random_pl_convex(seed: u64) -> PiecewiseLinearFn {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=2usize);
    let mut rows = Vec::new();
    for i in 0..n {
        let lo = q(rng.gen_range(-4..=0));
        let hi = &lo + q(rng.gen_range(1..=5));
        let mut e = zeros(n);
        e[i] = Q::one();
        rows.push(Halfspace::new(e.clone(), lo));
        let neg: Vec<Q> = e.iter().map(|v| -v).collect();
        rows.push(Halfspace::new(neg, -hi));
    }
    let parts = rng.gen_range(1..=4usize);
    let affines = (0..parts)
        .map(|_| ((0..n).map(|_| qr(rng.gen_range(-6..=6), 2)).collect(), q(rng.gen_range(-3..=3))))
        .collect();
    let domain = Polyhedron::new(n, rows).expect("consistent dimensions");
    PiecewiseLinearFn::from_max_affine(domain, affines).expect("consistent dimensions")
}

/// A random convex bivariate affine map on `R × R` with a nonempty value at
/// the origin.
pub fn random_bivariate(seed: u64) -> BivariateMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let m = rng.gen_range(1..=2usize);
        let c = Cone::orthant(m);
        let rows = rng.gen_range(1..=4usize);
        let normals: Vec<Vec<Q>> = (0..rows)
            .map(|_| {
                let mut v: Vec<Q> = (0..m).map(|_| q(rng.gen_range(0..=2))).collect();
                if v.iter().all(Q::is_zero) {
                    v[0] = Q::one();
                }
                v
            })
            .collect();
        let offsets = (0..rows).map(|_| q(rng.gen_range(-2..=2))).collect();
        let slopes = (0..rows).map(|_| vec![q(rng.gen_range(-2..=2)), q(rng.gen_range(-2..=2))]).collect();
        let map = SetValuedMap::affine(2, &c, normals, offsets, slopes).expect("consistent dimensions");
        if map.in_domain(&zeros(2)).unwrap_or(false) {
            return BivariateMap::new(map, 1).expect("split fits");
        }
    }
}

// ---------------------------------------------------------------------------
// parabola certificate

#[derive(Clone, Debug)]
pub struct ParabolaCertificate {
    pub epsilon: Q,
    pub t: Q,
    /// `(ε t²)² / (1 + 4t²)`, the squared distance from `(1+ε)(−t, t²)` to
    /// the tangent of the parabola at `(−t, t²)`
    pub formula_sq: Q,
    pub formula: f64,
    /// Euclidean distance from `(1+ε)(−t, t²)` to `A + R²_+`
    pub distance: f64,
}

impl ParabolaCertificate {
    pub fn to_json(&self) -> Value {
        json!({
            "epsilon": fmt_q(&self.epsilon),
            "t": fmt_q(&self.t),
            "formula_sq": fmt_q(&self.formula_sq),
            "formula": self.formula,
            "distance": self.distance,
        })
    }
}

/// Squared tangent distance, computed from the tangent line itself.
pub fn tangent_distance_sq(eps: &Q, t: &Q) -> Q {
    // tangent at (−t, t²): 2t·z1 + z2 + t² = 0
    let s = Q::one() + eps;
    let (p1, p2) = (-(&s * t), &s * t * t);
    let residual = q(2) * t * p1 + p2 + t * t;
    &residual * &residual / (q(4) * t * t + Q::one())
}

/// The smallest integer `t ≥ 1` with `ε t² / √(1 + 4t²) > 1`, together with the
/// distance of `(1+ε)(−t, t²)` from `A + R²_+`.
pub fn parabola_separation_certificate(eps: &Q) -> Result<ParabolaCertificate> {
    if !eps.is_positive() {
        return Err(Error::Malformed("epsilon must be positive".into()));
    }
    let mut t = Q::one();
    while tangent_distance_sq(eps, &t) <= Q::one() {
        t += Q::one();
    }
    certificate_at(eps, &t)
}

pub fn certificate_at(eps: &Q, t: &Q) -> Result<ParabolaCertificate> {
    let formula_sq = tangent_distance_sq(eps, t);
    let s = to_f64(&(Q::one() + eps));
    let tf = to_f64(t);
    let distance = ParabolaSet::new(q(1)).euclidean_distance(&[-s * tf, s * tf * tf]);
    Ok(ParabolaCertificate {
        epsilon: eps.clone(),
        t: t.clone(),
        formula: to_f64(eps) * tf * tf / (1.0 + 4.0 * tf * tf).sqrt(),
        formula_sq,
        distance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conjugate::scalar_conjugate;
    use crate::setmap::{convexity_check, SamplingPlan};

    #[test]
    fn builtin_ids_are_unique_and_complete() {
        let fx = builtin_fixtures();
        let mut ids: Vec<&str> = fx.iter().map(|f| f.id.as_str()).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), fx.len());
        assert_eq!(fx.iter().filter(|f| !f.points.is_empty()).count(), 4);
        assert!(matches!(builtin("nope"), Err(Error::UnknownFixture(_))));
    }

    #[test]
    fn evaluations() {
        let f = switch_on();
        assert!(f.evaluate(&qvec(&[-1])).unwrap().is_empty());
        let c0 = f.evaluate(&qvec(&[0])).unwrap();
        assert!(c0.as_polyhedron().unwrap().equivalent(embed_point(&qvec(&[0, 0]), &vertical_ray()).as_polyhedron().unwrap()));
        let t = tilted_halfspace().evaluate(&qvec(&[1])).unwrap();
        let expect = UpperSet::from_halfspaces(&Cone::orthant(2), vec![Halfspace::new(qvec(&[1, 1]), q(2))]).unwrap();
        assert!(t.as_polyhedron().unwrap().equivalent(expect.as_polyhedron().unwrap()));
    }

    #[test]
    fn convexity_of_fixtures() {
        let plan = SamplingPlan::default();
        for f in [sliding_ray(), switch_on(), scaled_parabola()] {
            assert_eq!(convexity_check(&f, &plan).unwrap().status, Status::Holds);
        }
        let v = convexity_check(&concave_kink(), &plan).unwrap();
        assert_eq!(v.status, Status::Fails);
    }

    #[test]
    fn json_round_trip() {
        for f in builtin_fixtures() {
            let v = fixture_to_json(&f).unwrap();
            let back = fixture_from_json(&v).unwrap();
            assert_eq!(back.points, f.points, "{}", f.id);
            assert_eq!(fixture_to_json(&back).unwrap(), v, "{}", f.id);
            for x in [qvec(&[-1]), qvec(&[0]), qvec(&[3])] {
                let x: Vec<Q> = x.into_iter().cycle().take(f.map.map().domain_dim()).collect();
                let a = f.map.map().evaluate(&x).unwrap();
                let b = back.map.map().evaluate(&x).unwrap();
                for d in f.map.map().cone().dual_fan(8) {
                    assert_eq!(a.support(&d), b.support(&d), "{} at {x:?}", f.id);
                }
            }
        }
    }

    #[test]
    fn malformed_json_is_rejected() {
        let bad = json!({"cone": {"dim": 1, "generators": [["1"]]}, "domain_dim": 1, "body": {"kind": "spiral"}});
        assert!(matches!(fixture_from_json(&bad), Err(Error::Malformed(_))));
        let bad = json!({"cone": {"dim": 1, "generators": [["x"]]}, "domain_dim": 1, "body": {"kind": "constant"}});
        assert!(fixture_from_json(&bad).is_err());
    }

    #[test]
    fn certificate_values() {
        for (eps, t) in [(q(1), 3), (qr(1, 2), 5), (qr(1, 10), 21)] {
            let c = parabola_separation_certificate(&eps).unwrap();
            assert_eq!(c.t, q(t));
            assert!(c.formula > 1.0 && c.distance > 1.0 + 1e-6);
            // the formula is exact at t and fails at t − 1
            let formula_sq = &eps * &eps * q(t).pow(4) / (q(1) + q(4) * q(t) * q(t));
            assert_eq!(c.formula_sq, formula_sq);
            assert!(tangent_distance_sq(&eps, &q(t - 1)) <= Q::one());
        }
        // ε = 1: 9/√37
        let c = parabola_separation_certificate(&q(1)).unwrap();
        assert!((c.formula - 9.0 / 37f64.sqrt()).abs() < 1e-12);
        let c = certificate_at(&qr(1, 10), &q(25)).unwrap();
        assert!((c.formula - 62.5 / 2501f64.sqrt()).abs() < 1e-12);
        assert!(c.distance > c.formula);
    }

    #[test]
    fn certificate_formula_grows_with_t() {
        let eps = qr(1, 10);
        let vals: Vec<Q> = (1..60).map(|t| tangent_distance_sq(&eps, &q(t))).collect();
        assert!(vals.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn random_families_are_deterministic() {
        let (a, pa) = random_convex_affine(11);
        let (b, pb) = random_convex_affine(11);
        assert_eq!(pa, pb);
        assert_eq!(body_to_json(a.body()).unwrap(), body_to_json(b.body()).unwrap());
        assert!(a.structurally_convex());
        let f = random_pl_convex(5);
        let g = random_pl_convex(5);
        assert_eq!(scalar_conjugate(&f, &zeros(f.dim)).unwrap(), scalar_conjugate(&g, &zeros(g.dim)).unwrap());
        assert!(random_bivariate(3).map.in_domain(&zeros(2)).unwrap());
    }

    #[test]
    fn labels_reproduced() {
        let runs = run_labels(&builtin_fixtures(), &CheckerConfig::default()).unwrap();
        let mismatches: Vec<&Mismatch> = runs.iter().flat_map(|r| &r.mismatches).collect();
        assert!(mismatches.is_empty(), "{mismatches:?}");
        assert!(runs.iter().all(|r| r.matrix.violations.is_empty()));
    }
}
