//! Gravitational search over continuous positions that decode to test cases.
//!
//! Every object carries a position with one coordinate per SUT parameter,
//! bounded to `[0, v_d - 1]`. A position decodes to a test case by rounding
//! each coordinate and clamping it into range. Fitness is supplied by the
//! caller and is maximized.
//!
//! One iteration is: evaluate fitness, find best and worst, turn fitness into
//! normalized masses, accumulate gravitational forces from the `K` heaviest
//! objects, and integrate acceleration into velocity and position.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sut::{SutConfig, TestCase};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GsaError {
    #[error("invalid GSA parameters: {0}")]
    InvalidParams(String),
    #[error("coordinate {dim} is not finite ({value})")]
    NonFinite { dim: usize, value: f64 },
    #[error("position has {got} coordinates, configuration has {expected} parameters")]
    Dimension { expected: usize, got: usize },
    #[error("best and worst fitness are equal; masses are undefined")]
    DegenerateFitness,
}

/// How many of the heaviest objects exert force at iteration `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "k")]
pub enum KbestSchedule {
    /// `K(t) = max(1, round(N * (1 - t/T)))`.
    #[default]
    LinearDecay,
    /// Every object attracts every other one.
    All,
    Fixed(usize),
}

/// The `R_ij` term in the force denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMetric {
    /// Euclidean distance between the two position vectors.
    #[default]
    Position,
    /// `|M_j - M_i|`, the distance between normalized masses.
    MassDifference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GsaParams {
    pub population_size: usize,
    pub g0: f64,
    pub alpha: f64,
    pub epsilon: f64,
    pub max_iterations: usize,
    #[serde(default)]
    pub kbest: KbestSchedule,
    #[serde(default)]
    pub distance: DistanceMetric,
}

impl Default for GsaParams {
    fn default() -> Self {
        Self {
            population_size: 200,
            g0: 10.0,
            alpha: 20.0,
            epsilon: 1e-9,
            max_iterations: 500,
            kbest: KbestSchedule::LinearDecay,
            distance: DistanceMetric::Position,
        }
    }
}

impl GsaParams {
    pub fn validate(&self) -> Result<(), GsaError> {
        let bad = |msg: &str| Err(GsaError::InvalidParams(msg.to_string()));
        if self.population_size < 2 {
            return bad("population size must be at least 2");
        }
        if self.max_iterations < 1 {
            return bad("iteration count must be at least 1");
        }
        if !(self.g0.is_finite() && self.g0 > 0.0) {
            return bad("G0 must be a positive finite number");
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return bad("alpha must be a non-negative finite number");
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return bad("epsilon must be a positive finite number");
        }
        if let KbestSchedule::Fixed(k) = self.kbest {
            if k == 0 || k > self.population_size {
                return bad("fixed K must be in 1..=N");
            }
        }
        Ok(())
    }

    /// Size of the attracting set at iteration `t`.
    pub fn kbest_count(&self, t: usize) -> usize {
        let n = self.population_size;
        match self.kbest {
            KbestSchedule::All => n,
            KbestSchedule::Fixed(k) => k.min(n),
            KbestSchedule::LinearDecay => {
                let frac = 1.0 - t as f64 / self.max_iterations as f64;
                ((n as f64 * frac).round() as usize).clamp(1, n)
            }
        }
    }
}

/// `G(t) = G0 * exp(-alpha * t / T)`.
pub fn gravitational_constant(t: usize, params: &GsaParams) -> f64 {
    params.g0 * (-params.alpha * t as f64 / params.max_iterations as f64).exp()
}

/// Rounds each coordinate half away from zero and clamps it to `[0, v_d - 1]`.
pub fn decode_position(position: &[f64], config: &SutConfig) -> Result<TestCase, GsaError> {
    let mut values = Vec::with_capacity(position.len());
    decode_into(position, config, &mut values)?;
    Ok(TestCase::from_raw(values))
}

fn decode_into(position: &[f64], config: &SutConfig, out: &mut Vec<usize>) -> Result<(), GsaError> {
    if position.len() != config.num_params() {
        return Err(GsaError::Dimension {
            expected: config.num_params(),
            got: position.len(),
        });
    }
    out.clear();
    for (dim, (&x, &v)) in position.iter().zip(config.cardinalities()).enumerate() {
        if !x.is_finite() {
            return Err(GsaError::NonFinite { dim, value: x });
        }
        let r = x.round().clamp(0.0, (v - 1) as f64);
        out.push(r as usize);
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct GsaObject {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub fitness: f64,
    /// Normalized mass `M`, in `[0, 1]` once masses are computed.
    pub mass: f64,
    decoded: Vec<usize>,
}

impl GsaObject {
    /// The test case decoded at the last evaluation.
    pub fn decoded(&self) -> &[usize] {
        &self.decoded
    }
}

/// Per-object force vectors, row-major `N x dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct Forces {
    dim: usize,
    values: Vec<f64>,
}

impl Forces {
    pub fn of(&self, object: usize) -> &[f64] {
        &self.values[object * self.dim..(object + 1) * self.dim]
    }
}

/// One line of the convergence trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t: usize,
    pub best_fitness: f64,
    pub worst_fitness: f64,
    pub g: f64,
}

impl TraceRecord {
    pub const CSV_HEADER: &'static str = "t,best_fitness,worst_fitness,G";

    pub fn to_csv_line(&self) -> String {
        format!("{},{},{},{:e}", self.t, self.best_fitness, self.worst_fitness, self.g)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GsaState {
    pub objects: Vec<GsaObject>,
    pub iteration: usize,
    pub g: f64,
    pub best: f64,
    pub worst: f64,
    upper: Vec<f64>,
    /// Objects resampled after a non-finite coordinate or acceleration.
    pub resampled: u64,
}

impl GsaState {
    /// `N` objects placed uniformly in the box `[0, v_d - 1]`, at rest.
    pub fn init<R: Rng + ?Sized>(config: &SutConfig, params: &GsaParams, rng: &mut R) -> Self {
        let upper: Vec<f64> = config.cardinalities().iter().map(|&v| (v - 1) as f64).collect();
        let objects = (0..params.population_size)
            .map(|_| GsaObject {
                position: random_position(&upper, rng),
                velocity: vec![0.0; upper.len()],
                fitness: 0.0,
                mass: 0.0,
                decoded: Vec::with_capacity(upper.len()),
            })
            .collect();
        Self {
            objects,
            iteration: 0,
            g: gravitational_constant(0, params),
            best: 0.0,
            worst: 0.0,
            upper,
            resampled: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.upper.len()
    }

    /// Decodes every object, scores it with `fitness` and records the
    /// population's best (max) and worst (min) fitness. Objects whose
    /// position is not finite are resampled before scoring.
    pub fn evaluate<R, F>(&mut self, config: &SutConfig, rng: &mut R, mut fitness: F)
    where
        R: Rng + ?Sized,
        F: FnMut(&[usize]) -> usize,
    {
        let mut best = f64::NEG_INFINITY;
        let mut worst = f64::INFINITY;
        for obj in &mut self.objects {
            if decode_into(&obj.position, config, &mut obj.decoded).is_err() {
                obj.position = random_position(&self.upper, rng);
                obj.velocity.iter_mut().for_each(|v| *v = 0.0);
                self.resampled += 1;
                decode_into(&obj.position, config, &mut obj.decoded).expect("freshly sampled position is finite");
            }
            obj.fitness = fitness(&obj.decoded) as f64;
            best = best.max(obj.fitness);
            worst = worst.min(obj.fitness);
        }
        self.best = best;
        self.worst = worst;
    }

    pub fn trace_record(&self) -> TraceRecord {
        TraceRecord {
            t: self.iteration,
            best_fitness: self.best,
            worst_fitness: self.worst,
            g: self.g,
        }
    }

    /// `m_i = (fit_i - worst) / (best - worst)`, then `M_i = m_i / sum(m)`.
    pub fn compute_masses(&mut self) -> Result<(), GsaError> {
        let span = self.best - self.worst;
        if span == 0.0 {
            return Err(GsaError::DegenerateFitness);
        }
        let mut total = 0.0;
        for obj in &mut self.objects {
            obj.mass = (obj.fitness - self.worst) / span;
            total += obj.mass;
        }
        for obj in &mut self.objects {
            obj.mass /= total;
        }
        Ok(())
    }

    /// Indices of the `k` fittest objects, ties going to the lower index.
    pub fn kbest_members(&self, k: usize) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.objects.len()).collect();
        order.sort_by(|&a, &b| {
            self.objects[b]
                .fitness
                .total_cmp(&self.objects[a].fitness)
                .then(a.cmp(&b))
        });
        order.truncate(k.min(order.len()));
        order
    }

    /// Total force on each object from the current Kbest set.
    ///
    /// One uniform draw is consumed per contributing `(i, j)` pair, with `i`
    /// in object order and `j` in Kbest order. An object of zero mass feels
    /// no force, so no draws are taken for it.
    pub fn compute_forces<R: Rng + ?Sized>(&self, params: &GsaParams, rng: &mut R) -> Forces {
        let dim = self.dim();
        let mut values = vec![0.0; self.objects.len() * dim];
        let kbest = self.kbest_members(params.kbest_count(self.iteration));
        for (i, oi) in self.objects.iter().enumerate() {
            if oi.mass == 0.0 {
                continue;
            }
            let force = &mut values[i * dim..(i + 1) * dim];
            for &j in &kbest {
                if j == i {
                    continue;
                }
                let oj = &self.objects[j];
                let r = match params.distance {
                    DistanceMetric::Position => euclidean(&oi.position, &oj.position),
                    DistanceMetric::MassDifference => (oj.mass - oi.mass).abs(),
                };
                let coef = rng.gen::<f64>() * self.g * oi.mass * oj.mass / (r + params.epsilon);
                for ((f, xj), xi) in force.iter_mut().zip(&oj.position).zip(&oi.position) {
                    *f += coef * (xj - xi);
                }
            }
        }
        Forces { dim, values }
    }

    /// `a = F / max(M, eps)`, `v <- rand * v + a`, `x <- clamp(x + v)`, then
    /// advances `t` and recomputes `G`. One draw per `(i, d)`.
    pub fn update_kinematics<R: Rng + ?Sized>(&mut self, forces: &Forces, params: &GsaParams, rng: &mut R) {
        for (i, obj) in self.objects.iter_mut().enumerate() {
            let inv_mass = 1.0 / obj.mass.max(params.epsilon);
            let mut finite = true;
            for (d, &f) in forces.of(i).iter().enumerate() {
                let accel = f * inv_mass;
                let v = rng.gen::<f64>() * obj.velocity[d] + accel;
                let x = obj.position[d] + v;
                if !(accel.is_finite() && v.is_finite() && x.is_finite()) {
                    finite = false;
                }
                obj.velocity[d] = v;
                obj.position[d] = x.clamp(0.0, self.upper[d]);
            }
            if !finite {
                obj.position = random_position(&self.upper, rng);
                obj.velocity.iter_mut().for_each(|v| *v = 0.0);
                self.resampled += 1;
            }
        }
        self.advance(params);
    }

    /// Moves to the next iteration without touching any object.
    pub fn advance(&mut self, params: &GsaParams) {
        self.iteration += 1;
        self.g = gravitational_constant(self.iteration, params);
    }

    /// Masses, forces and kinematics for one iteration after `evaluate`.
    /// When best equals worst the population is left as is.
    pub fn step<R: Rng + ?Sized>(&mut self, params: &GsaParams, rng: &mut R) {
        if self.compute_masses().is_err() {
            self.advance(params);
            return;
        }
        let forces = self.compute_forces(params, rng);
        self.update_kinematics(&forces, params, rng);
    }
}

fn random_position<R: Rng + ?Sized>(upper: &[f64], rng: &mut R) -> Vec<f64> {
    upper.iter().map(|&u| rng.gen_range(0.0..=u)).collect()
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}
