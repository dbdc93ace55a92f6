//! Least-squares models of the optimal defense frequency, k-fold cross
//! validation, the model zoo, and the 100-50-25 MIN rule.

use std::fmt::{self, Write as _};

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::datagen::DatasetRow;
use crate::error::{Error, Result};

/// Relative singular-value cutoff below which a design matrix counts as rank deficient.
const RANK_TOL: f64 = 1e-10;

pub const PIECEWISE_THRESHOLD: f64 = 0.75;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Feature {
    Constant,
    Mdf,
    Ra,
    RaMdf,
    Ra2,
    Mdf2,
}

impl Feature {
    pub fn eval(self, mdf: f64, ra: f64) -> f64 {
        match self {
            Feature::Constant => 1.0,
            Feature::Mdf => mdf,
            Feature::Ra => ra,
            Feature::RaMdf => ra * mdf,
            Feature::Ra2 => ra * ra,
            Feature::Mdf2 => mdf * mdf,
        }
    }

    fn label(self) -> &'static str {
        match self {
            Feature::Constant => "",
            Feature::Mdf => "MDF",
            Feature::Ra => "RA",
            Feature::RaMdf => "RA*MDF",
            Feature::Ra2 => "RA^2",
            Feature::Mdf2 => "MDF^2",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Mode {
    Fitted,
    /// One coefficient per feature, in the spec's feature order.
    Fixed(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Transform {
    None,
    /// `min(MDF, form)`.
    MinMdf,
    /// `high` when `RA > threshold`, otherwise `min(MDF, form)`.
    Piecewise {
        threshold: f64,
        high: Vec<(Feature, f64)>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub name: String,
    pub features: Vec<Feature>,
    pub mode: Mode,
    pub transform: Transform,
}

impl ModelSpec {
    pub fn fitted(name: &str, features: &[Feature]) -> Self {
        Self {
            name: name.into(),
            features: features.to_vec(),
            mode: Mode::Fitted,
            transform: Transform::None,
        }
    }

    pub fn fixed(name: &str, terms: &[(Feature, f64)]) -> Self {
        Self {
            name: name.into(),
            features: terms.iter().map(|t| t.0).collect(),
            mode: Mode::Fixed(terms.iter().map(|t| t.1).collect()),
            transform: Transform::None,
        }
    }

    pub fn with_transform(mut self, transform: Transform) -> Self {
        self.transform = transform;
        self
    }

    pub fn is_fixed(&self) -> bool {
        matches!(self.mode, Mode::Fixed(_))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    pub spec: ModelSpec,
    pub coefficients: Vec<(Feature, f64)>,
    pub train_mse: f64,
    pub cv_mse: Option<f64>,
}

fn linear_form(terms: &[(Feature, f64)], mdf: f64, ra: f64) -> f64 {
    terms.iter().map(|&(f, c)| c * f.eval(mdf, ra)).sum()
}

impl FittedModel {
    /// A fixed-coefficient model needs no data.
    pub fn from_fixed(spec: ModelSpec) -> Result<Self> {
        let Mode::Fixed(coefs) = &spec.mode else {
            return Err(Error::Contract(format!(
                "model `{}` must be fitted",
                spec.name
            )));
        };
        if coefs.len() != spec.features.len() {
            return Err(Error::Contract(format!(
                "model `{}` has {} coefficients for {} features",
                spec.name,
                coefs.len(),
                spec.features.len()
            )));
        }
        let coefficients = spec
            .features
            .iter()
            .copied()
            .zip(coefs.iter().copied())
            .collect();
        Ok(Self {
            spec,
            coefficients,
            train_mse: f64::NAN,
            cv_mse: None,
        })
    }

    /// The untransformed linear form.
    pub fn linear(&self, mdf: f64, ra: f64) -> f64 {
        linear_form(&self.coefficients, mdf, ra)
    }

    /// Human-readable formula, e.g. `min(MDF, MDF - 0.5*RA + 0.25)`.
    pub fn formula(&self) -> String {
        let digits = if self.spec.is_fixed() { None } else { Some(3) };
        let base = render_terms(&self.coefficients, digits);
        match &self.spec.transform {
            Transform::None => base,
            Transform::MinMdf => format!("min(MDF, {base})"),
            Transform::Piecewise { threshold, high } => format!(
                "{}, RA > {threshold}; min(MDF, {base}), RA <= {threshold}",
                render_terms(high, None)
            ),
        }
    }
}

fn render_number(x: f64, digits: Option<usize>) -> String {
    match digits {
        Some(d) => format!("{x:.d$}"),
        None => format!("{x}"),
    }
}

fn render_terms(terms: &[(Feature, f64)], digits: Option<usize>) -> String {
    let mut out = String::new();
    for (i, &(f, c)) in terms.iter().enumerate() {
        let neg = c < 0.0;
        let mag = c.abs();
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let num = render_number(mag, digits);
        match f {
            Feature::Constant => out.push_str(&num),
            _ if digits.is_none() && mag == 1.0 => out.push_str(f.label()),
            _ => {
                let _ = write!(out, "{num}*{}", f.label());
            }
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

fn design(rows: &[DatasetRow], features: &[Feature]) -> (DMatrix<f64>, DVector<f64>) {
    let x = DMatrix::from_fn(rows.len(), features.len(), |i, j| {
        features[j].eval(rows[i].mdf, rows[i].ra)
    });
    let y = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.odf));
    (x, y)
}

/// Ordinary least squares on the untransformed form via the normal equations.
/// Transforms only apply at prediction time.
pub fn fit_ols(rows: &[DatasetRow], spec: &ModelSpec) -> Result<FittedModel> {
    if spec.is_fixed() {
        return Err(Error::Contract(format!(
            "model `{}` has fixed coefficients",
            spec.name
        )));
    }
    if rows.is_empty() {
        return Err(Error::validation("rows", "cannot fit on an empty dataset"));
    }
    if spec.features.is_empty() {
        return Err(Error::validation("features", "model has no features"));
    }
    let (x, y) = design(rows, &spec.features);
    let degenerate = |reason: String| Error::Degenerate {
        model: spec.name.clone(),
        reason,
    };
    if rows.len() < spec.features.len() {
        return Err(degenerate(format!(
            "{} rows for {} features",
            rows.len(),
            spec.features.len()
        )));
    }
    // Rank check on column-normalized X so feature scale does not matter.
    let mut xs = x.clone();
    for mut col in xs.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col /= norm;
        }
    }
    let sv = xs.singular_values();
    let (smax, smin) = (sv.max(), sv.min());
    if !(smin > RANK_TOL * smax) {
        return Err(degenerate(format!(
            "singular values {smax:.3e} .. {smin:.3e}"
        )));
    }

    let xtx = x.transpose() * &x;
    let xty = x.transpose() * &y;
    let beta = xtx
        .cholesky()
        .map(|c| c.solve(&xty))
        .ok_or_else(|| degenerate("normal equations are not positive definite".into()))?;

    let mut model = FittedModel {
        spec: spec.clone(),
        coefficients: spec
            .features
            .iter()
            .copied()
            .zip(beta.iter().copied())
            .collect(),
        train_mse: f64::NAN,
        cv_mse: None,
    };
    model.train_mse = mse(&model, rows)?;
    Ok(model)
}

/// Evaluate the model and clamp to [0, 1].
pub fn predict(model: &FittedModel, mdf: f64, ra: f64) -> f64 {
    let form = model.linear(mdf, ra);
    let v = match &model.spec.transform {
        Transform::None => form,
        Transform::MinMdf => form.min(mdf),
        Transform::Piecewise { threshold, high } => {
            if ra > *threshold {
                linear_form(high, mdf, ra)
            } else {
                form.min(mdf)
            }
        }
    };
    v.clamp(0.0, 1.0)
}

pub fn mse(model: &FittedModel, rows: &[DatasetRow]) -> Result<f64> {
    if rows.is_empty() {
        return Err(Error::validation("rows", "cannot score an empty dataset"));
    }
    let total: f64 = rows
        .iter()
        .map(|r| (predict(model, r.mdf, r.ra) - r.odf).powi(2))
        .sum();
    Ok(total / rows.len() as f64)
}

/// Fit (when needed) and score on all rows.
pub fn fit(rows: &[DatasetRow], spec: &ModelSpec) -> Result<FittedModel> {
    if spec.is_fixed() {
        let mut m = FittedModel::from_fixed(spec.clone())?;
        m.train_mse = mse(&m, rows)?;
        Ok(m)
    } else {
        fit_ols(rows, spec)
    }
}

/// Deterministic fold assignment: shuffle indices with `seed`, then cut into
/// `k` contiguous folds whose sizes differ by at most one.
pub fn kfold_indices(len: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::validation(
            "k",
            format!("{k} folds; need at least 2"),
        ));
    }
    if len < k {
        return Err(Error::validation(
            "rows",
            format!("{len} rows for {k} folds"),
        ));
    }
    let mut idx: Vec<usize> = (0..len).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (base, extra) = (len / k, len % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        folds.push(idx[start..start + size].to_vec());
        start += size;
    }
    Ok(folds)
}

/// Mean of per-fold test MSEs. Fixed-coefficient models are scored directly.
pub fn kfold_cv(rows: &[DatasetRow], spec: &ModelSpec, k: usize, seed: u64) -> Result<f64> {
    let folds = kfold_indices(rows.len(), k, seed)?;
    if spec.is_fixed() {
        let model = FittedModel::from_fixed(spec.clone())?;
        let mut total = 0.0;
        for fold in &folds {
            let test: Vec<DatasetRow> = fold.iter().map(|&i| rows[i].clone()).collect();
            total += mse(&model, &test)? * test.len() as f64;
        }
        // Folds of unequal size: weight so the result equals the plain MSE.
        return Ok(total / rows.len() as f64);
    }
    let mut in_fold = vec![0usize; rows.len()];
    for (f, fold) in folds.iter().enumerate() {
        for &i in fold {
            in_fold[i] = f;
        }
    }
    let mut scores = Vec::with_capacity(k);
    for (f, fold) in folds.iter().enumerate() {
        let train: Vec<DatasetRow> = rows
            .iter()
            .zip(&in_fold)
            .filter(|(_, &g)| g != f)
            .map(|(r, _)| r.clone())
            .collect();
        let test: Vec<DatasetRow> = fold.iter().map(|&i| rows[i].clone()).collect();
        let model = fit_ols(&train, spec)?;
        scores.push(mse(&model, &test)?);
    }
    Ok(scores.iter().sum::<f64>() / k as f64)
}

/// `min(mdf, mdf - 0.5 * ra + 0.25)`.
pub fn rule_100_50_25(mdf: f64, ra: f64) -> Result<f64> {
    if !(mdf > 0.0 && mdf < 1.0) {
        return Err(Error::validation("mdf", format!("{mdf} not in (0, 1)")));
    }
    if !(0.0..=1.0).contains(&ra) {
        return Err(Error::validation("ra", format!("{ra} not in [0, 1]")));
    }
    Ok(mdf.min(mdf - 0.5 * ra + 0.25))
}

/// The same rule with range advantage rescaled to [-1, 1]: `min(mdf, mdf - 0.25 * ra)`.
pub fn rule_signed(mdf: f64, ra_signed: f64) -> Result<f64> {
    if !(mdf > 0.0 && mdf < 1.0) {
        return Err(Error::validation("mdf", format!("{mdf} not in (0, 1)")));
    }
    if !(-1.0..=1.0).contains(&ra_signed) {
        return Err(Error::validation(
            "ra",
            format!("{ra_signed} not in [-1, 1]"),
        ));
    }
    Ok(mdf.min(mdf - 0.25 * ra_signed))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Table {
    /// Single bet size: MDF is a constant.
    PotOnly,
    /// Several bet sizes: MDF is a feature.
    MultiSize,
}

impl fmt::Display for Table {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Table::PotOnly => write!(f, "1"),
            Table::MultiSize => write!(f, "2"),
        }
    }
}

fn simplified_terms() -> Vec<(Feature, f64)> {
    vec![
        (Feature::Mdf, 1.0),
        (Feature::Ra, -0.5),
        (Feature::Constant, 0.25),
    ]
}

/// Models for the single-bet-size table. `mdf` is the dataset's constant MDF.
pub fn table1_models(mdf: f64) -> Vec<ModelSpec> {
    use Feature::*;
    vec![
        ModelSpec::fixed("Fixed MDF", &[(Constant, mdf)]),
        ModelSpec::fitted("Linear MDF", &[Constant]),
        ModelSpec::fitted("Linear RA", &[Ra, Constant]),
        ModelSpec::fitted("Quadratic RA", &[Ra2, Ra, Constant]),
    ]
}

pub fn table2_models() -> Vec<ModelSpec> {
    use Feature::*;
    let min_lin = ModelSpec::fitted("Min Linear MDF with RA", &[Mdf, Ra, Constant])
        .with_transform(Transform::MinMdf);
    vec![
        ModelSpec::fixed("Fixed MDF", &[(Mdf, 1.0)]),
        ModelSpec::fitted("Linear MDF", &[Mdf, Constant]),
        ModelSpec::fitted("Linear MDF with RA", &[Mdf, Ra, Constant]),
        ModelSpec::fitted("Linear MDF with RA*MDF", &[Mdf, RaMdf, Constant]),
        ModelSpec::fitted("Linear MDF with RA and RA*MDF", &[Mdf, Ra, RaMdf, Constant]),
        ModelSpec::fixed("Simplified Linear MDF with RA", &simplified_terms()),
        min_lin,
        ModelSpec::fixed("Simplified Min Linear MDF with RA", &simplified_terms())
            .with_transform(Transform::MinMdf),
        ModelSpec::fixed("Piecewise Simp. Min Linear MDF w. RA", &simplified_terms())
            .with_transform(Transform::Piecewise {
                threshold: PIECEWISE_THRESHOLD,
                high: vec![(Constant, 1.0), (Ra, -1.0)],
            }),
        ModelSpec::fitted(
            "Quadratic MDF with RA and MDF*RA",
            &[Ra2, RaMdf, Mdf2, Ra, Mdf, Constant],
        ),
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZooEntry {
    pub model: FittedModel,
    pub formula: String,
    pub train_mse: f64,
    pub cv_mse: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZooReport {
    pub table: Table,
    pub rows: usize,
    pub folds: usize,
    pub seed: u64,
    pub entries: Vec<ZooEntry>,
}

impl ZooReport {
    pub fn entry(&self, name: &str) -> Option<&ZooEntry> {
        self.entries.iter().find(|e| e.model.spec.name == name)
    }

    pub fn to_text(&self) -> String {
        let name_w = self
            .entries
            .iter()
            .map(|e| e.model.spec.name.len())
            .max()
            .unwrap_or(5)
            .max("model".len());
        let formula_w = self
            .entries
            .iter()
            .map(|e| e.formula.len())
            .max()
            .unwrap_or(7)
            .max("formula".len());
        let mut out = format!(
            "# table={} rows={} folds={} cv_seed={}\n",
            self.table, self.rows, self.folds, self.seed
        );
        let _ = writeln!(
            out,
            "{:name_w$}  {:formula_w$}  {:>10}  {:>10}",
            "model", "formula", "train_mse", "cv_mse"
        );
        for e in &self.entries {
            let _ = writeln!(
                out,
                "{:name_w$}  {:formula_w$}  {:>10.6}  {:>10.6}",
                e.model.spec.name, e.formula, e.train_mse, e.cv_mse
            );
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("model,formula,train_mse,cv_mse\n");
        for e in &self.entries {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                csv_field(&e.model.spec.name),
                csv_field(&e.formula),
                e.train_mse,
                e.cv_mse
            );
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Distinct bet sizes present in `rows`, sorted.
pub fn bet_sizes(rows: &[DatasetRow]) -> Vec<f64> {
    let mut sizes: Vec<f64> = rows.iter().map(|r| r.bet_size).collect();
    sizes.sort_by(f64::total_cmp);
    sizes.dedup();
    sizes
}

/// Fit and cross-validate every model of `table`, in table order.
pub fn run_model_zoo(rows: &[DatasetRow], table: Table, k: usize, seed: u64) -> Result<ZooReport> {
    if rows.is_empty() {
        return Err(Error::validation("rows", "dataset has no rows"));
    }
    let specs = match table {
        Table::PotOnly => {
            let sizes = bet_sizes(rows);
            if sizes.len() != 1 {
                return Err(Error::validation(
                    "table",
                    format!(
                        "table 1 needs a single bet size, dataset has {} ({sizes:?})",
                        sizes.len()
                    ),
                ));
            }
            table1_models(rows[0].mdf)
        }
        Table::MultiSize => table2_models(),
    };
    let mut entries = Vec::with_capacity(specs.len());
    for spec in specs {
        let model = fit(rows, &spec)?;
        let cv = kfold_cv(rows, &spec, k, seed)?;
        let mut model = model;
        model.cv_mse = Some(cv);
        entries.push(ZooEntry {
            formula: model.formula(),
            train_mse: model.train_mse,
            cv_mse: cv,
            model,
        });
    }
    Ok(ZooReport {
        table,
        rows: rows.len(),
        folds: k,
        seed,
        entries,
    })
}
