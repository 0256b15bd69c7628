use super::{DiscriminativeUnits, GenerativeModel, GenerativeTables, Table2, Unit, UnitSet};
use crate::error::Violation;
use crate::prob::check_distribution;

/// Invariant checks that report every failure as data.
pub trait Validate {
    fn validate(&self) -> Vec<Violation>;
}

impl Validate for GenerativeModel {
    fn validate(&self) -> Vec<Violation> {
        validate_generative(self)
    }
}

impl Validate for DiscriminativeUnits {
    fn validate(&self) -> Vec<Violation> {
        validate_units(self)
    }
}

struct Checker {
    out: Vec<Violation>,
}

impl Checker {
    fn push(&mut self, table: &str, index: Vec<usize>, message: impl Into<String>) {
        self.out.push(Violation::new(table, index, message));
    }

    /// Checks one distribution of length `len`.
    fn dist(&mut self, table: &str, index: Vec<usize>, p: &[f64], len: usize) {
        if p.len() != len {
            self.push(table, index, format!("length {} ≠ {len}", p.len()));
        } else if let Some(msg) = check_distribution(p) {
            self.push(table, index, msg);
        }
    }

    /// A distribution that also appears as a denominator.
    fn denominator(&mut self, table: &str, index: Vec<usize>, p: &[f64], len: usize) {
        let before = self.out.len();
        self.dist(table, index.clone(), p, len);
        if self.out.len() == before {
            if let Some(i) = p.iter().position(|&v| v <= 0.0) {
                let mut idx = index;
                idx.push(i);
                self.push(table, idx, "zero denominator marginal");
            }
        }
    }

    fn rows(&mut self, table: &str, prefix: &[usize], rows: &Table2, n_rows: usize, len: usize) {
        if rows.len() != n_rows {
            self.push(table, prefix.to_vec(), format!("{} rows ≠ {n_rows}", rows.len()));
            return;
        }
        for (i, row) in rows.iter().enumerate() {
            let mut idx = prefix.to_vec();
            idx.push(i);
            self.dist(table, idx, row, len);
        }
    }

    fn rows3(&mut self, table: &str, t: &[Table2], dims: (usize, usize, usize)) {
        if t.len() != dims.0 {
            self.push(table, vec![], format!("{} blocks ≠ {}", t.len(), dims.0));
            return;
        }
        for (i, block) in t.iter().enumerate() {
            self.rows(table, &[i], block, dims.1, dims.2);
        }
    }

    fn rows4(&mut self, table: &str, t: &[Vec<Table2>], dims: (usize, usize, usize, usize)) {
        if t.len() != dims.0 {
            self.push(table, vec![], format!("{} blocks ≠ {}", t.len(), dims.0));
            return;
        }
        for (i, outer) in t.iter().enumerate() {
            if outer.len() != dims.1 {
                self.push(table, vec![i], format!("{} blocks ≠ {}", outer.len(), dims.1));
                continue;
            }
            for (j, block) in outer.iter().enumerate() {
                self.rows(table, &[i, j], block, dims.2, dims.3);
            }
        }
    }
}

pub fn validate_generative(model: &GenerativeModel) -> Vec<Violation> {
    let n = model.num_labels();
    let m = model.num_symbols();
    let mut c = Checker { out: Vec::new() };
    match &model.tables {
        GenerativeTables::NaiveBayes { prior, emission } => {
            c.dist("prior", vec![], prior, n);
            c.rows("emission", &[], emission, n, m);
        }
        GenerativeTables::PooledMc { prior, first, next } => {
            c.dist("prior", vec![], prior, n);
            c.rows("first", &[], first, n, m);
            c.rows3("next", next, (n, m, m));
        }
        GenerativeTables::PooledMc2 {
            prior,
            first,
            second,
            next,
        } => {
            c.dist("prior", vec![], prior, n);
            c.rows("first", &[], first, n, m);
            c.rows3("second", second, (n, m, m));
            c.rows4("next", next, (n, m, m, m));
        }
        GenerativeTables::Hmc {
            initial,
            transition,
            emission,
        } => {
            c.dist("initial", vec![], initial, n);
            c.rows("transition", &[], transition, n, n);
            c.rows("emission", &[], emission, n, m);
        }
        GenerativeTables::Hmc2 {
            initial,
            transition,
            transition2,
            emission,
        } => {
            c.dist("initial", vec![], initial, n);
            c.rows("transition", &[], transition, n, n);
            c.rows3("transition2", transition2, (n, n, n));
            c.rows("emission", &[], emission, n, m);
        }
        GenerativeTables::HmcPlus {
            initial,
            transition,
            first_emission,
            emission,
        } => {
            c.dist("initial", vec![], initial, n);
            c.rows("transition", &[], transition, n, n);
            c.rows("first_emission", &[], first_emission, n, m);
            c.rows3("emission", emission, (n, n, m));
        }
    }
    c.out
}

pub fn validate_units(units: &DiscriminativeUnits) -> Vec<Violation> {
    let n = units.num_labels();
    let mut c = Checker { out: Vec::new() };
    match &units.units {
        UnitSet::NaiveBayes { prior, marginal, .. }
        | UnitSet::PooledMc { prior, marginal, .. }
        | UnitSet::PooledMc2 { prior, marginal, .. } => {
            c.dist("prior", vec![], prior, n);
            c.denominator("marginal", vec![], marginal, n);
        }
        UnitSet::Hmc {
            initial,
            transition,
            marginals,
            ..
        } => {
            c.dist("initial", vec![], initial, n);
            c.rows("transition", &[], transition, n, n);
            position_marginals(&mut c, marginals, n);
        }
        UnitSet::Hmc2 {
            initial,
            transition,
            transition2,
            marginals,
            ..
        } => {
            c.dist("initial", vec![], initial, n);
            c.rows("transition", &[], transition, n, n);
            c.rows3("transition2", transition2, (n, n, n));
            position_marginals(&mut c, marginals, n);
        }
        UnitSet::HmcPlus {
            initial,
            transition,
            marginals,
            pair_marginals,
            ..
        } => {
            c.dist("initial", vec![], initial, n);
            c.rows("transition", &[], transition, n, n);
            position_marginals(&mut c, marginals, n);
            if pair_marginals.is_empty() {
                c.push("pair_marginals", vec![], "no positions");
            }
            for (k, pm) in pair_marginals.iter().enumerate() {
                let flat: Vec<f64> = pm.iter().flatten().copied().collect();
                if pm.len() != n || pm.iter().any(|r| r.len() != n) {
                    c.push("pair_marginals", vec![k], format!("shape ≠ {n}×{n}"));
                } else {
                    c.denominator("pair_marginals", vec![k], &flat, n * n);
                }
            }
        }
    }

    let outputs_for = |name: &str| {
        if units.kind() == super::ModelKind::HmcPlus && name == "pair" {
            n * n
        } else {
            n
        }
    };
    let mut feature_dim: Option<(usize, &str)> = None;
    for (name, unit, order) in units.units.posterior_units() {
        let outputs = outputs_for(name);
        match unit {
            Unit::Table(table) => {
                let Some(obs) = &units.observations else {
                    c.push(name, vec![], "table unit without an observation alphabet");
                    continue;
                };
                if table.order != order {
                    c.push(name, vec![], format!("order {} ≠ {order}", table.order));
                    continue;
                }
                if table.positions.is_empty() {
                    c.push(name, vec![], "no positions");
                }
                let n_rows = obs.len().pow(order as u32);
                for (k, rows) in table.positions.iter().enumerate() {
                    c.rows(name, &[k], rows, n_rows, outputs);
                }
            }
            Unit::Head(head) => {
                if head.b.len() != outputs || head.w.len() != outputs {
                    c.push(name, vec![], format!("head must have {outputs} outputs"));
                }
                if let Some(i) = head.w.iter().position(|r| r.len() != head.d) {
                    c.push(name, vec![i], format!("weight row length ≠ d = {}", head.d));
                }
                let all_finite = head.w.iter().flatten().chain(&head.b).all(|v| v.is_finite());
                if !all_finite {
                    c.push(name, vec![], "non-finite head parameter");
                }
                if head.d % order != 0 {
                    c.push(name, vec![], format!("d = {} not divisible by order {order}", head.d));
                } else {
                    let per_obs = head.d / order;
                    match feature_dim {
                        None => feature_dim = Some((per_obs, name)),
                        Some((d0, first)) if d0 != per_obs => c.push(
                            name,
                            vec![],
                            format!("per-observation dimension {per_obs} ≠ {d0} of `{first}`"),
                        ),
                        _ => {}
                    }
                }
            }
        }
    }
    c.out
}

fn position_marginals(c: &mut Checker, marginals: &Table2, n: usize) {
    if marginals.is_empty() {
        c.push("marginals", vec![], "no positions");
    }
    for (t, m) in marginals.iter().enumerate() {
        c.denominator("marginals", vec![t], m, n);
    }
}
