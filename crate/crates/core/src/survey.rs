//! Survey aggregation and the regression target.
//!
//! Likert answers are rescaled to `[-1, 1]`, averaged per question, and
//! mapped onto constructs through a row-stochastic matrix. The target
//! function is an ordinary least-squares fit solved by Householder QR.

use std::io::{Read, Write};

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::ser::{SerializeMap, SerializeStruct};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::matrix::{dot, Matrix};

/// Relative tolerance below which a column is considered dependent.
pub const RANK_TOL: f64 = 1e-10;
const ROW_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurveyResponse {
    pub respondent: String,
    pub answers: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct LikertScale(u32);

impl LikertScale {
    pub fn new(levels: u32) -> Result<Self> {
        if levels < 2 {
            return Err(Error::invalid(
                "scale",
                format!("Likert scale needs >= 2 levels, got {levels}"),
            ));
        }
        Ok(Self(levels))
    }

    pub fn levels(self) -> u32 {
        self.0
    }

    /// Linear map of `[1, L]` onto `[-1, 1]`.
    pub fn rescale(self, answer: f64) -> f64 {
        2.0 * (answer - 1.0) / f64::from(self.0 - 1) - 1.0
    }

    /// Nearest answer to a point of `[-1, 1]`, clamped to the scale.
    pub fn nearest_answer(self, value: f64) -> u32 {
        let raw = ((value + 1.0) * f64::from(self.0 - 1) / 2.0 + 1.0).round();
        raw.clamp(1.0, f64::from(self.0)) as u32
    }
}

impl TryFrom<u32> for LikertScale {
    type Error = Error;
    fn try_from(v: u32) -> Result<Self> {
        Self::new(v)
    }
}

impl From<LikertScale> for u32 {
    fn from(s: LikertScale) -> u32 {
        s.0
    }
}

/// Question-to-construct weights; rows are constructs, columns questions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Matrix", into = "Matrix")]
pub struct ConstructMap(Matrix);

impl ConstructMap {
    pub fn new(matrix: Matrix) -> Result<Self> {
        for i in 0..matrix.rows() {
            let row = matrix.row(i);
            if row.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::invalid(
                    "construct_map",
                    format!("row {i} has a negative or non-finite entry"),
                ));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::invalid(
                    "construct_map",
                    format!("row {i} sums to {sum}, expected 1"),
                ));
            }
        }
        Ok(Self(matrix))
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn constructs(&self) -> usize {
        self.0.rows()
    }

    pub fn questions(&self) -> usize {
        self.0.cols()
    }
}

impl TryFrom<Matrix> for ConstructMap {
    type Error = Error;
    fn try_from(m: Matrix) -> Result<Self> {
        Self::new(m)
    }
}

impl From<ConstructMap> for Matrix {
    fn from(c: ConstructMap) -> Matrix {
        c.0
    }
}

fn check_answers(responses: &[SurveyResponse], questions: usize, scale: LikertScale) -> Result<()> {
    for r in responses {
        if r.answers.len() != questions {
            return Err(Error::dimension(
                format!("answers of respondent {}", r.respondent),
                questions,
                r.answers.len(),
            ));
        }
        if let Some(bad) = r.answers.iter().find(|a| **a < 1 || **a > scale.levels()) {
            return Err(Error::invalid(
                "survey",
                format!(
                    "respondent {} answered {bad}, outside [1, {}]",
                    r.respondent,
                    scale.levels()
                ),
            ));
        }
    }
    Ok(())
}

/// Per-question means rescaled to `[-1, 1]`, then mapped to constructs.
pub fn aggregate_survey(
    responses: &[SurveyResponse],
    map: &ConstructMap,
    scale: LikertScale,
) -> Result<Vec<f64>> {
    if responses.is_empty() {
        return Err(Error::Empty("survey responses".into()));
    }
    let k = map.questions();
    check_answers(responses, k, scale)?;
    // integer sums keep the mean independent of response order
    let mut sums = vec![0u64; k];
    for r in responses {
        for (s, a) in sums.iter_mut().zip(&r.answers) {
            *s += u64::from(*a);
        }
    }
    let n = responses.len() as f64;
    let means: Vec<f64> = sums.iter().map(|s| scale.rescale(*s as f64 / n)).collect();
    map.matrix().mul_vec(&means)
}

/// Construct scores of a single respondent.
pub fn respondent_constructs(
    answers: &[u32],
    map: &ConstructMap,
    scale: LikertScale,
) -> Result<Vec<f64>> {
    let rescaled: Vec<f64> = answers
        .iter()
        .map(|a| scale.rescale(f64::from(*a)))
        .collect();
    map.matrix().mul_vec(&rescaled)
}

pub fn read_survey_csv<R: Read>(reader: R) -> Result<Vec<SurveyResponse>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Parse(format!("survey header: {e}")))?
        .clone();
    if headers.get(0) != Some("respondent") {
        return Err(Error::Parse(
            "survey header must start with `respondent`".into(),
        ));
    }
    for (i, h) in headers.iter().enumerate().skip(1) {
        if h != format!("q{i}") {
            return Err(Error::Parse(format!(
                "survey column {} is {h:?}, expected \"q{i}\"",
                i + 1
            )));
        }
    }
    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(format!("survey row {}: {e}", line + 2)))?;
        let answers = rec
            .iter()
            .skip(1)
            .map(|v| v.parse::<u32>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse(format!("survey row {}: {e}", line + 2)))?;
        out.push(SurveyResponse {
            respondent: rec.get(0).unwrap_or_default().to_string(),
            answers,
        });
    }
    Ok(out)
}

pub fn write_survey_csv<W: Write>(writer: W, responses: &[SurveyResponse]) -> Result<()> {
    let k = responses.first().map_or(0, |r| r.answers.len());
    let mut w = csv::Writer::from_writer(writer);
    let header: Vec<String> = std::iter::once("respondent".to_string())
        .chain((1..=k).map(|i| format!("q{i}")))
        .collect();
    let csv_err = |e: csv::Error| Error::Parse(e.to_string());
    w.write_record(&header).map_err(csv_err)?;
    for r in responses {
        let row: Vec<String> = std::iter::once(r.respondent.clone())
            .chain(r.answers.iter().map(u32::to_string))
            .collect();
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io("survey csv", e))?;
    Ok(())
}

/// Ground truth for the synthetic well-being answer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticWellbeing {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    #[serde(default)]
    pub noise: f64,
}

/// Seeded generator of survey fixtures: construct questions are drawn from
/// declared categorical distributions; a trailing well-being question is
/// derived from the construct scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSurvey {
    pub seed: u64,
    pub respondents: usize,
    /// One probability vector over `1..=L` per construct question.
    pub questions: Vec<Vec<f64>>,
    pub wellbeing: SyntheticWellbeing,
}

impl SyntheticSurvey {
    pub fn generate(&self, map: &ConstructMap, scale: LikertScale) -> Result<Vec<SurveyResponse>> {
        if self.respondents == 0 {
            return Err(Error::invalid(
                "survey.synthetic.respondents",
                "must be >= 1",
            ));
        }
        if self.questions.len() != map.questions() {
            return Err(Error::dimension(
                "synthetic questions",
                map.questions(),
                self.questions.len(),
            ));
        }
        if self.wellbeing.coefficients.len() != map.constructs() {
            return Err(Error::dimension(
                "synthetic well-being coefficients",
                map.constructs(),
                self.wellbeing.coefficients.len(),
            ));
        }
        let dists = self
            .questions
            .iter()
            .enumerate()
            .map(|(i, p)| {
                if p.len() != scale.levels() as usize {
                    return Err(Error::dimension(
                        format!("distribution of question {}", i + 1),
                        scale.levels() as usize,
                        p.len(),
                    ));
                }
                WeightedIndex::new(p)
                    .map_err(|e| Error::invalid("survey.synthetic.questions", e.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut out = Vec::with_capacity(self.respondents);
        for id in 0..self.respondents {
            let mut answers: Vec<u32> = dists
                .iter()
                .map(|d| d.sample(&mut rng) as u32 + 1)
                .collect();
            let x = respondent_constructs(&answers, map, scale)?;
            let z: f64 = rng.sample(StandardNormal);
            let latent = self.wellbeing.intercept
                + dot(&self.wellbeing.coefficients, &x)
                + self.wellbeing.noise * z;
            answers.push(scale.nearest_answer(latent));
            out.push(SurveyResponse {
                respondent: format!("r{:04}", id + 1),
                answers,
            });
        }
        Ok(out)
    }
}

/// Regression design with a leading intercept column.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    names: Vec<String>,
    x: Matrix,
}

impl DesignMatrix {
    /// Build from explanatory rows; the intercept column is prepended.
    pub fn with_intercept(names: &[String], rows: &[Vec<f64>]) -> Result<Self> {
        let p = names.len();
        let mut full = Vec::with_capacity(rows.len());
        for (i, r) in rows.iter().enumerate() {
            if r.len() != p {
                return Err(Error::dimension(format!("design row {i}"), p, r.len()));
            }
            let mut row = Vec::with_capacity(p + 1);
            row.push(1.0);
            row.extend_from_slice(r);
            full.push(row);
        }
        let x = if full.is_empty() {
            Matrix::zeros(0, p + 1)
        } else {
            Matrix::from_rows(full)?
        };
        Ok(Self {
            names: names.to_vec(),
            x,
        })
    }

    pub fn rows(&self) -> usize {
        self.x.rows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.x
    }

    pub fn column_name(&self, j: usize) -> &str {
        if j == 0 {
            "intercept"
        } else {
            &self.names[j - 1]
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionModel {
    pub intercept: f64,
    pub names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub r2: f64,
    pub residuals: Vec<f64>,
}

impl Serialize for RegressionModel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        struct Coefs<'a>(&'a [String], &'a [f64]);
        impl Serialize for Coefs<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                let mut m = s.serialize_map(Some(self.0.len()))?;
                for (k, v) in self.0.iter().zip(self.1) {
                    m.serialize_entry(k, v)?;
                }
                m.end()
            }
        }
        let mut st = s.serialize_struct("RegressionModel", 3)?;
        st.serialize_field("intercept", &self.intercept)?;
        st.serialize_field("coefficients", &Coefs(&self.names, &self.coefficients))?;
        st.serialize_field("r2", &self.r2)?;
        st.end()
    }
}

impl RegressionModel {
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            intercept: self.intercept * c,
            names: self.names.clone(),
            coefficients: self.coefficients.iter().map(|b| b * c).collect(),
            r2: self.r2,
            residuals: self.residuals.iter().map(|r| r * c).collect(),
        }
    }
}

/// Householder reflector `I - tau v vᵀ` acting on rows `k..`.
struct Reflector {
    k: usize,
    v: Vec<f64>,
    tau: f64,
}

impl Reflector {
    fn apply(&self, x: &mut [f64]) {
        let tail = &mut x[self.k..];
        let s = self.tau * dot(&self.v, tail);
        for (xi, vi) in tail.iter_mut().zip(&self.v) {
            *xi -= s * vi;
        }
    }
}

pub fn fit_target(design: &DesignMatrix, y: &[f64]) -> Result<RegressionModel> {
    let x = design.matrix();
    let (n, p) = (x.rows(), x.cols());
    if y.len() != n {
        return Err(Error::dimension("response vector", n, y.len()));
    }
    if n < p {
        return Err(Error::TooFewRows { rows: n, params: p });
    }
    if !x.is_finite() || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("regression data".into()));
    }

    let mut reflectors: Vec<Reflector> = Vec::with_capacity(p);
    let mut r = Matrix::zeros(p, p);
    let mut dependent = Vec::new();
    for j in 0..p {
        let mut col = x.column(j);
        let col_norm = dot(&col, &col).sqrt();
        for h in &reflectors {
            h.apply(&mut col);
        }
        let k = reflectors.len();
        let tail_norm = dot(&col[k..], &col[k..]).sqrt();
        if col_norm == 0.0 || tail_norm <= RANK_TOL * col_norm {
            dependent.push(design.column_name(j).to_string());
            continue;
        }
        let alpha = if col[k] >= 0.0 { -tail_norm } else { tail_norm };
        let mut v = col[k..].to_vec();
        v[0] -= alpha;
        let vnorm2 = dot(&v, &v);
        let tau = 2.0 / vnorm2;
        for (i, ri) in col[..k].iter().enumerate() {
            r[(i, j)] = *ri;
        }
        r[(k, j)] = alpha;
        reflectors.push(Reflector { k, v, tau });
    }
    if !dependent.is_empty() {
        return Err(Error::RankDeficient(dependent));
    }

    let mut qty = y.to_vec();
    for h in &reflectors {
        h.apply(&mut qty);
    }
    let mut beta = vec![0.0; p];
    for i in (0..p).rev() {
        let mut acc = qty[i];
        for j in i + 1..p {
            acc -= r[(i, j)] * beta[j];
        }
        beta[i] = acc / r[(i, i)];
    }

    let fitted = x.mul_vec(&beta)?;
    let residuals: Vec<f64> = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();
    let mean = y.iter().sum::<f64>() / n as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let ss_res: f64 = residuals.iter().map(|e| e * e).sum();
    let r2 = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(RegressionModel {
        intercept: beta[0],
        names: design.names.clone(),
        coefficients: beta[1..].to_vec(),
        r2,
        residuals,
    })
}

pub fn predict(model: &RegressionModel, x_w: &[f64]) -> Result<f64> {
    if x_w.len() != model.coefficients.len() {
        return Err(Error::dimension(
            "prediction input",
            model.coefficients.len(),
            x_w.len(),
        ));
    }
    let mut acc = model.intercept;
    for (b, x) in model.coefficients.iter().zip(x_w) {
        acc += b * x;
    }
    Ok(acc)
}

/// Per-respondent construct scores and rescaled well-being answers, ready
/// for [`fit_target`]. `wellbeing_index` is the 0-based question holding the
/// well-being answer; all other questions feed the construct map in order.
pub fn regression_data(
    responses: &[SurveyResponse],
    map: &ConstructMap,
    scale: LikertScale,
    wellbeing_index: usize,
) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    if responses.is_empty() {
        return Err(Error::Empty("survey responses".into()));
    }
    check_answers(responses, map.questions() + 1, scale)?;
    let mut rows = Vec::with_capacity(responses.len());
    let mut y = Vec::with_capacity(responses.len());
    for r in responses {
        let construct_answers: Vec<u32> = r
            .answers
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != wellbeing_index)
            .map(|(_, a)| *a)
            .collect();
        rows.push(respondent_constructs(&construct_answers, map, scale)?);
        y.push(scale.rescale(f64::from(r.answers[wellbeing_index])));
    }
    Ok((rows, y))
}

/// Drop the well-being column so responses line up with the construct map.
pub fn strip_question(responses: &[SurveyResponse], index: usize) -> Vec<SurveyResponse> {
    responses
        .iter()
        .map(|r| SurveyResponse {
            respondent: r.respondent.clone(),
            answers: r
                .answers
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != index)
                .map(|(_, a)| *a)
                .collect(),
        })
        .collect()
}
