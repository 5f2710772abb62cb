//! Term chains: every stage L_0^j u of a representation formula is a sum of
//! terms c · K_1 ⋆ K_2 ⋆ … ⋆ data, where the first kernel integrates the
//! data (over B or ∂B) and the others are volume kernels. Stages are built
//! symbolically and evaluated either stage by stage (composition) or with
//! fused kernel matrices (direct).

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::spec::{Problem, ProblemKind};
use crate::error::{Error, Result};
use crate::exprdsl::{eval, Expr};
use crate::kernels::{Meridian, MeridianKernel, NeumannCorrection};
use crate::quad::product::{BoundaryRule, VolumeRule};
use crate::quad::{apply, boundary_matrix, chain, volume_matrix, BoundaryGrid, VolumeGrid};

/// Kernels of a chain. Signs follow L_0 g_e = −δ: the volume kernels enter
/// as −N and −Ḡ so that L_0 removes one factor, the Poisson kernel enters
/// as is.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Op {
    /// Neumann function, volume source.
    N,
    /// Green function, volume source.
    G,
    /// Neumann function, boundary source (measure dσ/4).
    Nb,
    /// Poisson kernel, boundary source.
    P,
}

impl Op {
    fn sign(self) -> f64 {
        match self {
            Op::P => 1.0,
            _ => -1.0,
        }
    }

    fn boundary_source(self) -> bool {
        matches!(self, Op::Nb | Op::P)
    }
}

/// Data a term integrates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Data {
    F,
    /// Neumann data g_j.
    G(usize),
    /// Dirichlet data h_j.
    H(usize),
}

impl Data {
    fn on_boundary(self) -> bool {
        !matches!(self, Data::F)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub coef: f64,
    pub data: Data,
    pub chain: Vec<Op>,
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ops: Vec<String> = self.chain.iter().map(|o| format!("{o:?}")).collect();
        let data = match self.data {
            Data::F => "f".to_string(),
            Data::G(j) => format!("g{j}"),
            Data::H(j) => format!("h{j}"),
        };
        write!(f, "{:+}*[{}]{}", self.coef, ops.join(","), data)
    }
}

fn extend(top: &[Term], op: Op, times: usize) -> Vec<Term> {
    top.iter()
        .map(|t| {
            let mut t = t.clone();
            t.chain.extend(std::iter::repeat(op).take(times));
            t
        })
        .collect()
}

fn boundary_term(coef: f64, data: Data, first: Op, op: Op, times: usize) -> Term {
    let mut chain = vec![first];
    chain.extend(std::iter::repeat(op).take(times));
    Term { coef, data, chain }
}

/// Stages 0..p of a Neumann block under `top` (which is stage p):
/// u_j = N^{p−j} top − Σ_{μ=j}^{p−1} N^{μ−j} Nb g_μ.
pub fn neumann_block(top: &[Term], p: usize) -> Vec<Vec<Term>> {
    (0..p)
        .map(|j| {
            let mut s = extend(top, Op::N, p - j);
            s.extend((j..p).map(|mu| boundary_term(-1.0, Data::G(mu), Op::Nb, Op::N, mu - j)));
            s
        })
        .collect()
}

/// Stages 0..q of a Dirichlet block under `top` (stage q):
/// w_s = G^{q−s} top + Σ_{r=s}^{q−1} G^{r−s} P d_r, with d_r the data
/// paired with the r-th Poisson term.
pub fn dirichlet_block(top: &[Term], q: usize, data: &dyn Fn(usize) -> Data) -> Vec<Vec<Term>> {
    (0..q)
        .map(|s| {
            let mut st = extend(top, Op::G, q - s);
            st.extend((s..q).map(|r| boundary_term(1.0, data(r), Op::P, Op::G, r - s)));
            st
        })
        .collect()
}

/// All stages u_0..u_{p+q} (the last one is f) and the stage indices of
/// the Neumann conditions.
#[derive(Clone, Debug)]
pub struct Stages {
    pub stages: Vec<Vec<Term>>,
    /// (j, stage index) pairs: condition j reads ∫_B u_{idx+1} = ∫ g_j dσ/4.
    pub neumann: Vec<(usize, usize)>,
    /// (s, stage index) pairs: u_idx = h_s on ∂B.
    pub dirichlet: Vec<(usize, usize)>,
}

pub fn build_stages(kind: ProblemKind, p: usize, q: usize, strict: bool) -> Result<Stages> {
    let top = vec![Term { coef: 1.0, data: Data::F, chain: vec![] }];
    let h = |r: usize| Data::H(r);
    let (stages, neumann, dirichlet) = match kind {
        ProblemKind::Neumann => {
            let mut st = neumann_block(&top, p);
            st.push(top);
            (st, (0..p).map(|j| (j, j)).collect(), vec![])
        }
        ProblemKind::Dirichlet => {
            let mut st = dirichlet_block(&top, q, &h);
            st.push(top);
            (st, vec![], (0..q).map(|s| (s, s)).collect())
        }
        ProblemKind::NeumannDirichlet => {
            let upper = dirichlet_block(&top, q, &h);
            let mut st = neumann_block(&upper[0], p);
            st.extend(upper);
            st.push(top);
            (st, (0..p).map(|j| (j, j)).collect(), (0..q).map(|s| (s, p + s)).collect())
        }
        ProblemKind::DirichletNeumann => {
            let upper = neumann_block(&top, p);
            let paired: Box<dyn Fn(usize) -> Data> = if strict {
                if p < q {
                    return Err(Error::Unsupported(format!(
                        "strict mode pairs the Poisson terms with g_(q-1-r), which needs p ≥ q (p = {p}, q = {q})"
                    )));
                }
                Box::new(move |r| Data::G(q - 1 - r))
            } else {
                Box::new(h)
            };
            let mut st = dirichlet_block(&upper[0], q, &*paired);
            st.extend(upper);
            st.push(top);
            (st, (0..p).map(|j| (j, q + j)).collect(), (0..q).map(|s| (s, s)).collect())
        }
    };
    Ok(Stages { stages, neumann, dirichlet })
}

/// Where a term is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Target {
    /// Volume nodes.
    V,
    /// Sample points.
    X,
    /// Boundary nodes (volume-source kernels only).
    B,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvalPath {
    /// Fused kernel matrices, as in the closed representation formulas.
    Direct,
    /// One kernel at a time through grid values, as in the two-stage proofs.
    Composition,
}

/// Data sampled where terms need it.
#[derive(Clone, Debug)]
pub struct DataValues {
    pub f_volume: Vec<f64>,
    pub f_samples: Vec<f64>,
    pub g: Vec<Vec<f64>>,
    pub h: Vec<Vec<f64>>,
}

fn sample(e: &Expr, pts: &[Meridian]) -> Result<Vec<f64>> {
    pts.iter().map(|m| eval(e, &m.to_point())).collect()
}

/// Grids, rules and lazily built kernel matrices for one resolution.
pub struct Discretization {
    pub volume: VolumeGrid,
    pub boundary: BoundaryGrid,
    pub samples: Vec<Meridian>,
    pub correction: NeumannCorrection,
    /// End-corrected volume weights for condition integrals.
    volume_weights: Vec<f64>,
    vrule: VolumeRule,
    brule: BoundaryRule,
    mats: RefCell<HashMap<(Op, Target), Rc<Array2<f64>>>>,
    fused: RefCell<HashMap<(Vec<Op>, Target), Rc<Array2<f64>>>>,
}

impl Discretization {
    pub fn new(volume: VolumeGrid, boundary: BoundaryGrid, samples: Vec<Meridian>, correction: NeumannCorrection) -> Result<Self> {
        let vrule = VolumeRule::new(&volume)?;
        let brule = BoundaryRule::new(&boundary)?;
        Ok(Discretization {
            volume_weights: volume.corrected_weights(),
            volume,
            boundary,
            samples,
            correction,
            vrule,
            brule,
            mats: RefCell::new(HashMap::new()),
            fused: RefCell::new(HashMap::new()),
        })
    }

    pub fn calibration(&self) -> f64 {
        self.boundary.calibration
    }

    fn points(&self, t: Target) -> Vec<Meridian> {
        match t {
            Target::V => self.vrule.nodes.clone(),
            Target::X => self.samples.clone(),
            Target::B => self.brule.nodes.clone(),
        }
    }

    fn id(&self, t: Target) -> String {
        match t {
            Target::V => self.volume.id(),
            Target::X => format!("samples({})", self.samples.len()),
            Target::B => self.boundary.id(),
        }
    }

    /// The kernel matrix of `op` from its natural source to `target`. For
    /// target B the volume-source form of the kernel is used (N for Nb and
    /// P alike).
    pub fn matrix(&self, op: Op, target: Target) -> Result<Rc<Array2<f64>>> {
        if let Some(m) = self.mats.borrow().get(&(op, target)) {
            return Ok(m.clone());
        }
        let pts = self.points(target);
        let neumann = MeridianKernel::Neumann(self.correction);
        let (vid, bid, tid) = (self.volume.id(), self.boundary.id(), self.id(target));
        let m = match (op, target) {
            (Op::N, _) | (Op::Nb, Target::B) => volume_matrix(&self.vrule, &vid, neumann, &pts, &tid)?,
            (Op::G, _) => volume_matrix(&self.vrule, &vid, MeridianKernel::Green, &pts, &tid)?,
            (Op::P, Target::B) => volume_matrix(&self.vrule, &vid, MeridianKernel::Poisson, &pts, &tid)?,
            (Op::Nb, _) => boundary_matrix(&self.brule, &bid, neumann, &pts, &tid)?,
            (Op::P, _) => boundary_matrix(&self.brule, &bid, MeridianKernel::Poisson, &pts, &tid)?,
        };
        let key = if op == Op::Nb && target == Target::B { (Op::N, Target::B) } else { (op, target) };
        let m = Rc::new(m.values);
        self.mats.borrow_mut().insert(key, m.clone());
        self.mats.borrow_mut().insert((op, target), m.clone());
        Ok(m)
    }

    /// Source weights of an op: volume weights, or calibrated boundary
    /// weights (a quarter of them for Neumann data).
    pub fn weights(&self, op: Op) -> Vec<f64> {
        match op {
            Op::N | Op::G => self.volume.weights.clone(),
            Op::Nb => self.boundary.weights.iter().map(|w| 0.25 * w).collect(),
            Op::P => self.boundary.weights.clone(),
        }
    }

    /// Fused matrix of a chain of length ≥ 2, source × target.
    pub fn fused(&self, ops: &[Op], target: Target) -> Result<Rc<Array2<f64>>> {
        if ops.len() < 2 {
            return self.matrix(ops[0], target);
        }
        let key = (ops.to_vec(), target);
        if let Some(m) = self.fused.borrow().get(&key) {
            return Ok(m.clone());
        }
        let lead = self.matrix(ops[0], Target::V)?;
        let w = self.volume.weights.clone();
        let mut rest = Vec::with_capacity(ops.len() - 1);
        for (i, op) in ops[1..].iter().enumerate() {
            let t = if i + 2 == ops.len() { target } else { Target::V };
            rest.push(self.matrix(*op, t)?);
        }
        let refs: Vec<&Array2<f64>> = rest.iter().map(|r| r.as_ref()).collect();
        let m = Rc::new(chain(&lead, &w, &refs)?);
        self.fused.borrow_mut().insert(key, m.clone());
        Ok(m)
    }

    pub fn data_values(&self, problem: &Problem) -> Result<DataValues> {
        let bnodes = &self.brule.nodes;
        Ok(DataValues {
            f_volume: sample(&problem.f, &self.vrule.nodes)?,
            f_samples: sample(&problem.f, &self.samples)?,
            g: problem.g.iter().map(|e| sample(e, bnodes)).collect::<Result<_>>()?,
            h: problem.h.iter().map(|e| sample(e, bnodes)).collect::<Result<_>>()?,
        })
    }

    fn source<'a>(&self, data: Data, values: &'a DataValues) -> Result<&'a [f64]> {
        let missing = |what: &str, j: usize| Error::Invalid(format!("no data {what}_{j}"));
        Ok(match data {
            Data::F => &values.f_volume,
            Data::G(j) => values.g.get(j).ok_or_else(|| missing("g", j))?,
            Data::H(j) => values.h.get(j).ok_or_else(|| missing("h", j))?,
        })
    }

    /// Values of one term at the target points, signs and coefficient
    /// included.
    pub fn eval_term(&self, term: &Term, values: &DataValues, target: Target, path: EvalPath) -> Result<Vec<f64>> {
        if term.chain.is_empty() {
            return match (term.data, target) {
                (Data::F, Target::V) => Ok(values.f_volume.clone()),
                (Data::F, Target::X) => Ok(values.f_samples.clone()),
                _ => Err(Error::Invalid(format!("term {term} has no kernel"))),
            };
        }
        let first = term.chain[0];
        if first.boundary_source() != term.data.on_boundary() || term.chain[1..].iter().any(|o| o.boundary_source()) {
            return Err(Error::Invalid(format!("term {term} mixes boundary and volume sources")));
        }
        let sign: f64 = term.chain.iter().map(|o| o.sign()).product();
        let src = self.source(term.data, values)?;
        let out = match path {
            EvalPath::Direct => apply(&*self.fused(&term.chain, target)?, &self.weights(first), src)?,
            EvalPath::Composition => {
                let mut v = src.to_vec();
                for (i, op) in term.chain.iter().enumerate() {
                    let t = if i + 1 == term.chain.len() { target } else { Target::V };
                    v = apply(&*self.matrix(*op, t)?, &self.weights(*op), &v)?;
                }
                v
            }
        };
        Ok(out.into_iter().map(|x| x * sign * term.coef).collect())
    }

    pub fn eval_stage(&self, terms: &[Term], values: &DataValues, target: Target, path: EvalPath) -> Result<Vec<f64>> {
        let len = match target {
            Target::V => self.volume.len(),
            Target::X => self.samples.len(),
            Target::B => self.boundary.len(),
        };
        let mut acc = vec![0.0; len];
        for t in terms {
            for (a, v) in acc.iter_mut().zip(self.eval_term(t, values, target, path)?) {
                *a += v;
            }
        }
        Ok(acc)
    }

    /// ∫_B of a term's values at the volume nodes.
    pub fn volume_integral(&self, vals: &[f64]) -> f64 {
        vals.iter().zip(&self.volume_weights).map(|(v, w)| v * w).sum()
    }
}
