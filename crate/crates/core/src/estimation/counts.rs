use super::{MarginalEstimate, TrainConfig};
use crate::alphabet::{LabelSet, ObsSet};
use crate::error::{Error, Result};
use crate::model::{
    chain_marginals, check_label_layout, check_symbols, hmc2_marginals, DiscriminativeUnits, GenerativeModel,
    GenerativeTables, ModelKind, Table2, Table3, Unit, UnitSet, UnitTable,
};
use crate::sequence::LabeledSequence;

/// Dense count tensor in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct CountTensor {
    pub shape: Vec<usize>,
    pub data: Vec<u64>,
}

impl CountTensor {
    pub fn zeros(shape: &[usize]) -> Self {
        CountTensor {
            shape: shape.to_vec(),
            data: vec![0; shape.iter().product()],
        }
    }

    fn offset(&self, index: &[usize]) -> usize {
        index
            .iter()
            .zip(&self.shape)
            .fold(0, |acc, (&i, &s)| acc * s + i)
    }

    pub fn incr(&mut self, index: &[usize]) {
        let k = self.offset(index);
        self.data[k] += 1;
    }

    pub fn get(&self, index: &[usize]) -> u64 {
        self.data[self.offset(index)]
    }

    pub fn total(&self) -> u64 {
        self.data.iter().sum()
    }

    /// Sums out the last axis.
    fn sum_last(&self) -> CountTensor {
        let width = *self.shape.last().expect("non-scalar");
        CountTensor {
            shape: self.shape[..self.shape.len() - 1].to_vec(),
            data: self.data.chunks(width).map(|c| c.iter().sum()).collect(),
        }
    }

    /// Conditional rows over the last axis, `(c + α) / (total + α·width)`; a row with no mass
    /// at all is uniform.
    fn smoothed_rows(&self, alpha: f64) -> Table2 {
        let width = *self.shape.last().expect("non-scalar");
        self.data.chunks(width).map(|c| smooth(c, alpha)).collect()
    }

    /// Rows indexed by the trailing `shape.len() - hidden` axes, each a distribution over
    /// the leading `hidden` axes: `p(hidden | context)`.
    fn posterior_rows(&self, hidden: usize, alpha: f64) -> Table2 {
        let h: usize = self.shape[..hidden].iter().product();
        let c: usize = self.shape[hidden..].iter().product();
        (0..c)
            .map(|ctx| {
                let col: Vec<u64> = (0..h).map(|k| self.data[k * c + ctx]).collect();
                smooth(&col, alpha)
            })
            .collect()
    }
}

fn smooth(counts: &[u64], alpha: f64) -> Vec<f64> {
    let total: f64 = counts.iter().map(|&c| c as f64).sum::<f64>() + alpha * counts.len() as f64;
    if total > 0.0 {
        counts.iter().map(|&c| (c as f64 + alpha) / total).collect()
    } else {
        vec![1.0 / counts.len() as f64; counts.len()]
    }
}

fn group(rows: Table2, size: usize) -> Table3 {
    let mut out = Vec::with_capacity(rows.len() / size);
    let mut it = rows.into_iter();
    loop {
        let chunk: Table2 = it.by_ref().take(size).collect();
        if chunk.is_empty() {
            return out;
        }
        out.push(chunk);
    }
}

fn table(order: usize, rows: Table2) -> Unit {
    Unit::Table(UnitTable::homogeneous(order, rows))
}

/// Mergeable joint counts of one model kind.
///
/// Every table is a joint count over its hidden and observed variables, so the same
/// counts yield the generative conditionals (normalized along observations) and the
/// posterior units (normalized along labels). Tables by kind, hidden axes first:
///
/// - nb: `prior[x]`, `emission[x][y]` over all tokens
/// - pooledmc: `prior`, `first[x][y_1]`, `next[x][y_{t-1}][y_t]`
/// - pooledmc2: `prior`, `first`, `second[x][y_1][y_2]`, `next[x][y_{t-2}][y_{t-1}][y_t]`
/// - hmc: `initial[x_1]`, `transition[x_{t-1}][x_t]`, `emission[x_t][y_t]`
/// - hmc2: as hmc plus `transition2[x_{t-2}][x_{t-1}][x_t]`; `transition` counts only
///   `(x_1, x_2)`
/// - hmcplus: `initial`, `transition`, `first_emission[x_1][y_1]`,
///   `emission[x_{t-1}][x_t][y_t]`
#[derive(Debug, Clone, PartialEq)]
pub struct CountAccumulator {
    pub kind: ModelKind,
    pub num_labels: usize,
    pub num_symbols: usize,
    pub sequences: u64,
    pub max_len: usize,
    pub tables: Vec<(&'static str, CountTensor)>,
}

impl CountAccumulator {
    pub fn new(kind: ModelKind, num_labels: usize, num_symbols: usize) -> Self {
        let (n, m) = (num_labels, num_symbols);
        let shapes: Vec<(&'static str, Vec<usize>)> = match kind {
            ModelKind::NaiveBayes => vec![("prior", vec![n]), ("emission", vec![n, m])],
            ModelKind::PooledMc => vec![
                ("prior", vec![n]),
                ("first", vec![n, m]),
                ("next", vec![n, m, m]),
            ],
            ModelKind::PooledMc2 => vec![
                ("prior", vec![n]),
                ("first", vec![n, m]),
                ("second", vec![n, m, m]),
                ("next", vec![n, m, m, m]),
            ],
            ModelKind::Hmc => vec![
                ("initial", vec![n]),
                ("transition", vec![n, n]),
                ("emission", vec![n, m]),
            ],
            ModelKind::Hmc2 => vec![
                ("initial", vec![n]),
                ("transition", vec![n, n]),
                ("transition2", vec![n, n, n]),
                ("emission", vec![n, m]),
            ],
            ModelKind::HmcPlus => vec![
                ("initial", vec![n]),
                ("transition", vec![n, n]),
                ("first_emission", vec![n, m]),
                ("emission", vec![n, n, m]),
            ],
        };
        CountAccumulator {
            kind,
            num_labels,
            num_symbols,
            sequences: 0,
            max_len: 0,
            tables: shapes
                .into_iter()
                .map(|(name, shape)| (name, CountTensor::zeros(&shape)))
                .collect(),
        }
    }

    pub fn table(&self, name: &str) -> &CountTensor {
        &self.tables.iter().find(|(n, _)| *n == name).expect("table of this kind").1
    }

    fn table_mut(&mut self, name: &str) -> &mut CountTensor {
        &mut self
            .tables
            .iter_mut()
            .find(|(n, _)| *n == name)
            .expect("table of this kind")
            .1
    }

    pub fn add(&mut self, seq: &LabeledSequence) -> Result<()> {
        let y = seq
            .observations
            .symbols()
            .ok_or_else(|| Error::Shape("count-based fitting needs discrete observations".into()))?;
        check_symbols(y, self.num_symbols)?;
        check_label_layout(&seq.labels, self.kind, y.len(), self.num_labels)?;
        let x = &seq.labels;
        let t_len = y.len();
        match self.kind {
            ModelKind::NaiveBayes => {
                self.table_mut("prior").incr(&[x[0]]);
                let e = self.table_mut("emission");
                for &o in y {
                    e.incr(&[x[0], o]);
                }
            }
            ModelKind::PooledMc => {
                self.table_mut("prior").incr(&[x[0]]);
                self.table_mut("first").incr(&[x[0], y[0]]);
                let e = self.table_mut("next");
                for t in 1..t_len {
                    e.incr(&[x[0], y[t - 1], y[t]]);
                }
            }
            ModelKind::PooledMc2 => {
                self.table_mut("prior").incr(&[x[0]]);
                self.table_mut("first").incr(&[x[0], y[0]]);
                if t_len > 1 {
                    self.table_mut("second").incr(&[x[0], y[0], y[1]]);
                }
                let e = self.table_mut("next");
                for t in 2..t_len {
                    e.incr(&[x[0], y[t - 2], y[t - 1], y[t]]);
                }
            }
            ModelKind::Hmc | ModelKind::Hmc2 => {
                self.table_mut("initial").incr(&[x[0]]);
                let second_order = self.kind == ModelKind::Hmc2;
                for t in 1..t_len {
                    if t == 1 || !second_order {
                        self.table_mut("transition").incr(&[x[t - 1], x[t]]);
                    } else {
                        self.table_mut("transition2").incr(&[x[t - 2], x[t - 1], x[t]]);
                    }
                }
                let e = self.table_mut("emission");
                for t in 0..t_len {
                    e.incr(&[x[t], y[t]]);
                }
            }
            ModelKind::HmcPlus => {
                self.table_mut("initial").incr(&[x[0]]);
                self.table_mut("first_emission").incr(&[x[0], y[0]]);
                for t in 1..t_len {
                    self.table_mut("transition").incr(&[x[t - 1], x[t]]);
                    self.table_mut("emission").incr(&[x[t - 1], x[t], y[t]]);
                }
            }
        }
        self.sequences += 1;
        self.max_len = self.max_len.max(t_len);
        Ok(())
    }

    /// Adds another accumulator's counts; the result does not depend on merge order.
    pub fn merge(&mut self, other: &CountAccumulator) -> Result<()> {
        if other.kind != self.kind
            || other.num_labels != self.num_labels
            || other.num_symbols != self.num_symbols
        {
            return Err(Error::Shape("cannot merge counts of different models".into()));
        }
        for ((_, a), (_, b)) in self.tables.iter_mut().zip(&other.tables) {
            a.data.iter_mut().zip(&b.data).for_each(|(x, y)| *x += y);
        }
        self.sequences += other.sequences;
        self.max_len = self.max_len.max(other.max_len);
        Ok(())
    }

    fn check_nonempty(&self) -> Result<()> {
        if self.sequences == 0 {
            Err(Error::EmptyData)
        } else {
            Ok(())
        }
    }

    /// Smoothed maximum likelihood tables.
    pub fn generative_tables(&self, alpha: f64) -> Result<GenerativeTables> {
        self.check_nonempty()?;
        let (n, m) = (self.num_labels, self.num_symbols);
        let rows = |name: &str| self.table(name).smoothed_rows(alpha);
        let vector = |name: &str| rows(name).remove(0);
        Ok(match self.kind {
            ModelKind::NaiveBayes => GenerativeTables::NaiveBayes {
                prior: vector("prior"),
                emission: rows("emission"),
            },
            ModelKind::PooledMc => GenerativeTables::PooledMc {
                prior: vector("prior"),
                first: rows("first"),
                next: group(rows("next"), m),
            },
            ModelKind::PooledMc2 => GenerativeTables::PooledMc2 {
                prior: vector("prior"),
                first: rows("first"),
                second: group(rows("second"), m),
                next: group(rows("next"), m * m)
                    .into_iter()
                    .map(|t| group(t, m))
                    .collect(),
            },
            ModelKind::Hmc => GenerativeTables::Hmc {
                initial: vector("initial"),
                transition: rows("transition"),
                emission: rows("emission"),
            },
            ModelKind::Hmc2 => GenerativeTables::Hmc2 {
                initial: vector("initial"),
                transition: rows("transition"),
                transition2: group(rows("transition2"), n),
                emission: rows("emission"),
            },
            ModelKind::HmcPlus => GenerativeTables::HmcPlus {
                initial: vector("initial"),
                transition: rows("transition"),
                first_emission: rows("first_emission"),
                emission: group(rows("emission"), n),
            },
        })
    }

    /// Posterior units by smoothed conditional counts. Each unit's denominator is the label
    /// frequency of the population its numerator was counted on, unless
    /// [`MarginalEstimate::Chain`] asks for chain-propagated HMC-family marginals.
    pub fn unit_set(&self, alpha: f64, marginals: MarginalEstimate) -> Result<UnitSet> {
        self.check_nonempty()?;
        let n = self.num_labels;
        let t = |name: &str| self.table(name);
        let label_freq = |c: &CountTensor| smooth(&c.data, alpha);
        Ok(match self.kind {
            ModelKind::NaiveBayes => UnitSet::NaiveBayes {
                prior: label_freq(t("prior")),
                marginal: label_freq(&t("emission").sum_last()),
                posterior: table(1, t("emission").posterior_rows(1, alpha)),
            },
            ModelKind::PooledMc => {
                let prior = label_freq(t("prior"));
                UnitSet::PooledMc {
                    marginal: prior.clone(),
                    prior,
                    first: table(1, t("first").posterior_rows(1, alpha)),
                    pair: table(2, t("next").posterior_rows(1, alpha)),
                    previous: table(1, t("next").sum_last().posterior_rows(1, alpha)),
                }
            }
            ModelKind::PooledMc2 => {
                let prior = label_freq(t("prior"));
                UnitSet::PooledMc2 {
                    marginal: prior.clone(),
                    prior,
                    first: table(1, t("first").posterior_rows(1, alpha)),
                    pair: table(2, t("second").posterior_rows(1, alpha)),
                    previous: table(1, t("second").sum_last().posterior_rows(1, alpha)),
                    triple: table(3, t("next").posterior_rows(1, alpha)),
                    previous_pair: table(2, t("next").sum_last().posterior_rows(1, alpha)),
                }
            }
            ModelKind::Hmc | ModelKind::Hmc2 => {
                let initial = label_freq(t("initial"));
                let transition = t("transition").smoothed_rows(alpha);
                let posterior = table(1, t("emission").posterior_rows(1, alpha));
                let horizon = self.max_len.max(1);
                if self.kind == ModelKind::Hmc {
                    let marg = match marginals {
                        MarginalEstimate::Empirical => vec![label_freq(&t("emission").sum_last())],
                        MarginalEstimate::Chain => chain_marginals(&initial, &transition, horizon),
                    };
                    UnitSet::Hmc {
                        initial,
                        transition,
                        marginals: marg,
                        posterior,
                    }
                } else {
                    let transition2 = group(t("transition2").smoothed_rows(alpha), n);
                    let marg = match marginals {
                        MarginalEstimate::Empirical => vec![label_freq(&t("emission").sum_last())],
                        MarginalEstimate::Chain => {
                            hmc2_marginals(&initial, &transition, &transition2, horizon)
                        }
                    };
                    UnitSet::Hmc2 {
                        initial,
                        transition,
                        transition2,
                        marginals: marg,
                        posterior,
                    }
                }
            }
            ModelKind::HmcPlus => {
                let initial = label_freq(t("initial"));
                let transition = t("transition").smoothed_rows(alpha);
                let pairs = t("emission").sum_last();
                let (marg, pair_marginals) = match marginals {
                    MarginalEstimate::Empirical => {
                        let flat = smooth(&pairs.data, alpha);
                        let pm: Table2 = flat.chunks(n).map(<[f64]>::to_vec).collect();
                        let prev: Vec<f64> = pm.iter().map(|r| r.iter().sum()).collect();
                        (vec![initial.clone(), prev], vec![pm])
                    }
                    MarginalEstimate::Chain => {
                        let horizon = self.max_len.max(2);
                        let marg = chain_marginals(&initial, &transition, horizon);
                        let pm = (1..horizon)
                            .map(|k| {
                                (0..n)
                                    .map(|i| (0..n).map(|j| marg[k - 1][i] * transition[i][j]).collect())
                                    .collect()
                            })
                            .collect();
                        (marg, pm)
                    }
                };
                UnitSet::HmcPlus {
                    initial,
                    transition,
                    marginals: marg,
                    pair_marginals,
                    first: table(1, t("first_emission").posterior_rows(1, alpha)),
                    pair: table(1, t("emission").posterior_rows(2, alpha)),
                }
            }
        })
    }
}

fn accumulate(kind: ModelKind, n: usize, m: usize, data: &[LabeledSequence]) -> Result<CountAccumulator> {
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    let mut acc = CountAccumulator::new(kind, n, m);
    for seq in data {
        acc.add(seq)?;
    }
    Ok(acc)
}

/// Smoothed maximum likelihood: every conditional row is
/// `(count + α) / (row_total + α·row_width)`.
pub fn fit_generative(
    kind: ModelKind,
    labels: &LabelSet,
    observations: &ObsSet,
    data: &[LabeledSequence],
    cfg: &TrainConfig,
) -> Result<GenerativeModel> {
    cfg.check()?;
    let acc = accumulate(kind, labels.len(), observations.len(), data)?;
    Ok(GenerativeModel::new(
        labels.clone(),
        observations.clone(),
        acc.generative_tables(cfg.smoothing_alpha)?,
    ))
}

/// Posterior units and marginals by smoothed conditional counts.
pub fn fit_discriminative_tables(
    kind: ModelKind,
    labels: &LabelSet,
    observations: &ObsSet,
    data: &[LabeledSequence],
    cfg: &TrainConfig,
) -> Result<DiscriminativeUnits> {
    cfg.check()?;
    let acc = accumulate(kind, labels.len(), observations.len(), data)?;
    Ok(DiscriminativeUnits {
        labels: labels.clone(),
        observations: Some(observations.clone()),
        units: acc.unit_set(cfg.smoothing_alpha, cfg.marginals)?,
    })
}
