//! Divergences between topic distributions, the intertopic Jensen–Shannon
//! distance matrix, its dispersion ("coherence"), and a 2-D embedding of the
//! topics by classical multidimensional scaling.

use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lda::TopicModel;

const SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    /// Bits; bounds the Jensen–Shannon divergence by 1.
    #[default]
    Two,
    Natural,
}

impl LogBase {
    fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Two => x.log2(),
            LogBase::Natural => x.ln(),
        }
    }
}

fn check_pair(p: &[f64], q: &[f64]) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    check_distribution(p)?;
    check_distribution(q)
}

fn check_distribution(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::NotADistribution("empty vector".into()));
    }
    if let Some(x) = p.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
        return Err(Error::NotADistribution(format!("entry {x}")));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::NotADistribution(format!("sums to {s}")));
    }
    Ok(())
}

fn kl_unchecked(p: &[f64], q: &[f64], base: LogBase) -> f64 {
    let mut d = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi == 0.0 {
            continue;
        }
        if qi == 0.0 {
            return f64::INFINITY;
        }
        d += pi * base.log(pi / qi);
    }
    d
}

fn js_unchecked(p: &[f64], q: &[f64], base: LogBase) -> f64 {
    let m: Vec<f64> = p.iter().zip(q).map(|(a, b)| 0.5 * (a + b)).collect();
    let d = 0.5 * kl_unchecked(p, &m, base) + 0.5 * kl_unchecked(q, &m, base);
    d.max(0.0)
}

/// Kullback–Leibler divergence `D(P‖Q)` in bits. Zero-mass terms of `P`
/// contribute nothing; mass of `P` where `Q` is zero gives `+∞`.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> Result<f64> {
    kl_divergence_in(p, q, LogBase::Two)
}

pub fn kl_divergence_in(p: &[f64], q: &[f64], base: LogBase) -> Result<f64> {
    check_pair(p, q)?;
    Ok(kl_unchecked(p, q, base))
}

/// Jensen–Shannon divergence in bits, in `[0, 1]`.
pub fn js_divergence(p: &[f64], q: &[f64]) -> Result<f64> {
    js_divergence_in(p, q, LogBase::Two)
}

pub fn js_divergence_in(p: &[f64], q: &[f64], base: LogBase) -> Result<f64> {
    check_pair(p, q)?;
    Ok(js_unchecked(p, q, base))
}

/// Square root of the Jensen–Shannon divergence; a metric.
pub fn js_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    js_distance_in(p, q, LogBase::Two)
}

pub fn js_distance_in(p: &[f64], q: &[f64], base: LogBase) -> Result<f64> {
    js_divergence_in(p, q, base).map(f64::sqrt)
}

/// Symmetric K×K matrix of Jensen–Shannon distances with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix(DMatrix<f64>);

impl DistanceMatrix {
    /// Wraps a precomputed matrix after checking shape, symmetry and diagonal.
    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                left: m.nrows(),
                right: m.ncols(),
            });
        }
        let k = m.nrows();
        for i in 0..k {
            if m[(i, i)] != 0.0 {
                return Err(Error::InvalidConfig(format!("diagonal entry {i} is non-zero")));
            }
            for j in 0..i {
                let (a, b) = (m[(i, j)], m[(j, i)]);
                if !a.is_finite() || a < 0.0 || a != b {
                    return Err(Error::InvalidConfig(format!(
                        "entries ({i},{j}) = {a} and ({j},{i}) = {b} are not a symmetric distance"
                    )));
                }
            }
        }
        Ok(Self(m))
    }

    pub fn size(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    /// Same matrix with topics reordered: entry (i, j) becomes (perm[i], perm[j]).
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let k = self.size();
        Self(DMatrix::from_fn(k, k, |i, j| self.0[(perm[i], perm[j])]))
    }

    /// CSV with header `topic,t1,…,tK` and one row per topic.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
        let mut header = vec!["topic".to_string()];
        header.extend((1..=self.size()).map(|j| format!("t{j}")));
        w.write_record(&header).map_err(|e| Error::csv(path, e))?;
        for i in 0..self.size() {
            let mut row = vec![(i + 1).to_string()];
            row.extend(self.0.row(i).iter().map(|x| x.to_string()));
            w.write_record(&row).map_err(|e| Error::csv(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| Error::csv(path, e))?;
            let row = rec
                .iter()
                .skip(1)
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
            rows.push(row);
        }
        let k = rows.len();
        if rows.iter().any(|r| r.len() != k) {
            return Err(Error::DimensionMismatch {
                left: k,
                right: rows.first().map_or(0, Vec::len),
            });
        }
        Self::from_matrix(DMatrix::from_fn(k, k, |i, j| rows[i][j]))
    }
}

/// Pairwise Jensen–Shannon distances between the rows of φ.
pub fn distance_matrix(model: &TopicModel) -> Result<DistanceMatrix> {
    distance_matrix_in(&model.phi, LogBase::Two)
}

pub fn distance_matrix_in(topics: &[Vec<f64>], base: LogBase) -> Result<DistanceMatrix> {
    for t in topics {
        check_pair(t, &topics[0])?;
    }
    let k = topics.len();
    let mut m = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..i {
            let d = js_unchecked(&topics[i], &topics[j], base).sqrt();
            m[(i, j)] = d;
            m[(j, i)] = d;
        }
    }
    Ok(DistanceMatrix(m))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoherenceVariant {
    /// Standard deviation over all K² entries, zero diagonal included.
    #[default]
    Full,
    /// Standard deviation over the K(K−1) off-diagonal entries only.
    OffDiagonal,
}

/// Population standard deviation of all K² matrix entries.
pub fn coherence(m: &DistanceMatrix) -> f64 {
    coherence_with(m, CoherenceVariant::Full)
}

pub fn coherence_with(m: &DistanceMatrix, variant: CoherenceVariant) -> f64 {
    let k = m.size();
    let entries: Vec<f64> = match variant {
        CoherenceVariant::Full => m.0.iter().copied().collect(),
        CoherenceVariant::OffDiagonal => (0..k)
            .flat_map(|i| (0..k).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m.0[(i, j)])
            .collect(),
    };
    if entries.is_empty() {
        return 0.0;
    }
    let n = entries.len() as f64;
    let mean = entries.iter().sum::<f64>() / n;
    (entries.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / n).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection2D {
    pub points: Vec<(f64, f64)>,
}

impl Projection2D {
    /// CSV `topic,x,y`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
        w.write_record(["topic", "x", "y"]).map_err(|e| Error::csv(path, e))?;
        for (i, (x, y)) in self.points.iter().enumerate() {
            w.write_record([i.to_string(), x.to_string(), y.to_string()])
                .map_err(|e| Error::csv(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            #[allow(dead_code)]
            topic: usize,
            x: f64,
            y: f64,
        }
        let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
        let points = r
            .deserialize::<Row>()
            .map(|row| row.map(|r| (r.x, r.y)))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::csv(path, e))?;
        Ok(Self { points })
    }
}

/// Classical MDS of the distance matrix onto its top two principal axes.
///
/// Negative eigenvalues (the JS metric need not embed in Euclidean space) are
/// clamped to zero. Each axis is oriented so that its largest-magnitude
/// coordinate is non-negative.
pub fn project_2d(m: &DistanceMatrix) -> Result<Projection2D> {
    let k = m.size();
    if k < 2 {
        return Err(Error::TooFewTopics(k));
    }
    let d2 = m.0.map(|d| d * d);
    let row_means: Vec<f64> = (0..k).map(|i| d2.row(i).sum() / k as f64).collect();
    let grand = row_means.iter().sum::<f64>() / k as f64;
    let b = DMatrix::from_fn(k, k, |i, j| -0.5 * (d2[(i, j)] - row_means[i] - row_means[j] + grand));

    let eig = SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &c| eig.eigenvalues[c].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&c)));

    let mut axes = [vec![0.0; k], vec![0.0; k]];
    for (axis, &idx) in axes.iter_mut().zip(&order) {
        let scale = eig.eigenvalues[idx].max(0.0).sqrt();
        for (i, a) in axis.iter_mut().enumerate() {
            *a = eig.eigenvectors[(i, idx)] * scale;
        }
        orient(axis);
    }
    Ok(Projection2D {
        points: (0..k).map(|i| (axes[0][i], axes[1][i])).collect(),
    })
}

/// Flips the sign so the first largest-magnitude entry is non-negative and
/// normalizes negative zeros.
fn orient(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    v.iter_mut().for_each(|x| {
        if *x == 0.0 {
            *x = 0.0;
        }
    });
}

/// Reads a projection dump produced by [`Projection2D::write_csv`].
pub fn read_projection(path: &Path) -> Result<Projection2D> {
    Projection2D::read_csv(path)
}

/// Reads a distance-matrix dump produced by [`DistanceMatrix::write_csv`].
pub fn read_distance_matrix(path: &Path) -> Result<DistanceMatrix> {
    DistanceMatrix::read_csv(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::fs;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn kl_examples() {
        assert_eq!(kl_divergence(&[0.5, 0.5], &[0.5, 0.5]).unwrap(), 0.0);
        let expected = 0.5 * 2f64.log2() + 0.5 * (2.0f64 / 3.0).log2();
        let got = kl_divergence(&[0.5, 0.5], &[0.25, 0.75]).unwrap();
        assert!(close(got, expected, 1e-15));
        assert!(close(got, 0.207_518_749_639_422, 1e-12));
        assert_eq!(kl_divergence(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), f64::INFINITY);
    }

    #[test]
    fn js_examples() {
        assert_eq!(js_divergence(&[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.0);
        assert_eq!(js_divergence(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
        assert_eq!(js_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
        // M = (0.75, 0.25): 0.5·D(P‖M) + 0.5·D(Q‖M)
        let got = js_divergence(&[0.5, 0.5], &[1.0, 0.0]).unwrap();
        assert!(close(got, 0.311_278_124_459_133, 1e-12));
        assert!(close(
            js_distance(&[0.5, 0.5], &[1.0, 0.0]).unwrap(),
            0.557_923_045_284_143_8,
            1e-12
        ));
    }

    #[test]
    fn natural_log_variant() {
        let bits = js_divergence(&[0.5, 0.5], &[1.0, 0.0]).unwrap();
        let nats = js_divergence_in(&[0.5, 0.5], &[1.0, 0.0], LogBase::Natural).unwrap();
        assert!(close(nats, bits * std::f64::consts::LN_2, 1e-15));
    }

    #[test]
    fn validation_errors() {
        assert!(matches!(
            kl_divergence(&[1.0], &[0.5, 0.5]),
            Err(Error::DimensionMismatch { left: 1, right: 2 })
        ));
        assert!(matches!(
            js_divergence(&[0.5, 0.4], &[0.5, 0.5]),
            Err(Error::NotADistribution(_))
        ));
        assert!(matches!(
            js_divergence(&[1.5, -0.5], &[0.5, 0.5]),
            Err(Error::NotADistribution(_))
        ));
    }

    fn model(phi: Vec<Vec<f64>>) -> TopicModel {
        TopicModel {
            month: None,
            vocabulary: (0..phi[0].len()).map(|i| format!("w{i}")).collect(),
            theta: vec![],
            config: Default::default(),
            phi,
        }
    }

    #[test]
    fn distance_matrix_examples() {
        let one = distance_matrix(&model(vec![vec![0.2, 0.8]])).unwrap();
        assert_eq!(one.size(), 1);
        assert_eq!(one.get(0, 0), 0.0);

        let phi = vec![vec![0.2, 0.3, 0.5], vec![0.6, 0.2, 0.2], vec![0.2, 0.3, 0.5]];
        let m = distance_matrix(&model(phi.clone())).unwrap();
        assert_eq!(m.get(0, 2), 0.0);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(m.get(i, j), m.get(j, i));
                if i != j {
                    assert_eq!(m.get(i, j), js_distance(&phi[i], &phi[j]).unwrap());
                }
            }
        }
    }

    #[test]
    fn coherence_examples() {
        let m = DistanceMatrix::from_matrix(DMatrix::from_row_slice(2, 2, &[0.0, 0.8, 0.8, 0.0])).unwrap();
        assert_eq!(coherence(&m), 0.4);
        let z = DistanceMatrix::from_matrix(DMatrix::zeros(4, 4)).unwrap();
        assert_eq!(coherence(&z), 0.0);
        // Off-diagonal variant on K=2 has no spread.
        assert_eq!(coherence_with(&m, CoherenceVariant::OffDiagonal), 0.0);
    }

    #[test]
    fn projection_of_two_points() {
        let m = DistanceMatrix::from_matrix(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap();
        let p = project_2d(&m).unwrap();
        assert!(close(p.points[0].0, 0.5, 1e-12) && close(p.points[1].0, -0.5, 1e-12));
        assert!(p.points.iter().all(|pt| pt.1.abs() < 1e-12));
    }

    #[test]
    fn projection_edge_cases() {
        let z = DistanceMatrix::from_matrix(DMatrix::zeros(3, 3)).unwrap();
        let p = project_2d(&z).unwrap();
        assert!(p.points.iter().all(|&(x, y)| x == 0.0 && y == 0.0));
        let one = DistanceMatrix::from_matrix(DMatrix::zeros(1, 1)).unwrap();
        assert!(matches!(project_2d(&one), Err(Error::TooFewTopics(1))));
    }

    #[test]
    fn equilateral_triangle_is_embedded_exactly() {
        let d = 0.7;
        let m = DistanceMatrix::from_matrix(DMatrix::from_fn(3, 3, |i, j| if i == j { 0.0 } else { d })).unwrap();
        let p = project_2d(&m).unwrap();
        for i in 0..3 {
            for j in 0..i {
                let (a, b) = (p.points[i], p.points[j]);
                let e = ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
                assert!(close(e, d, 1e-9), "{e}");
            }
        }
        let cx: f64 = p.points.iter().map(|q| q.0).sum();
        let cy: f64 = p.points.iter().map(|q| q.1).sum();
        assert!(cx.abs() < 1e-9 && cy.abs() < 1e-9);
    }

    #[test]
    fn csv_dumps_round_trip() {
        let phi = vec![vec![0.1, 0.9], vec![0.5, 0.5], vec![0.8, 0.2]];
        let m = distance_matrix(&model(phi)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.csv");
        m.write_csv(&p).unwrap();
        assert_eq!(read_distance_matrix(&p).unwrap(), m);
        let proj = project_2d(&m).unwrap();
        let q = dir.path().join("p.csv");
        proj.write_csv(&q).unwrap();
        assert!(fs::read_to_string(&q).unwrap().starts_with("topic,x,y\n"));
        assert_eq!(read_projection(&q).unwrap(), proj);
    }

    fn distribution(len: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..1.0, len).prop_filter_map("non-zero mass", |v| {
            let s: f64 = v.iter().sum();
            (s > 1e-6).then(|| v.iter().map(|x| x / s).collect())
        })
    }

    fn matrix() -> impl Strategy<Value = (DistanceMatrix, Vec<usize>)> {
        (2usize..8).prop_flat_map(|k| {
            (
                prop::collection::vec(0.0f64..1.0, k * k),
                Just((0..k).collect::<Vec<_>>()).prop_shuffle(),
            )
                .prop_map(move |(vals, perm)| {
                    let m = DMatrix::from_fn(k, k, |i, j| if i == j { 0.0 } else { vals[i.min(j) * k + i.max(j)] });
                    (DistanceMatrix::from_matrix(m).unwrap(), perm)
                })
        })
    }

    proptest! {
        #[test]
        fn coherence_is_permutation_invariant_and_bounded((m, perm) in matrix()) {
            let c = coherence(&m);
            prop_assert!(close(c, coherence(&m.permuted(&perm)), 1e-12));
            let max = m.as_matrix().max();
            prop_assert!(c >= 0.0 && c <= max + 1e-15);
        }

        #[test]
        fn relabeling_topics_preserves_coherence(
            phi in (2usize..6, 2usize..10).prop_flat_map(|(k, v)| prop::collection::vec(distribution(v), k)),
            seed in any::<u64>(),
        ) {
            let k = phi.len();
            let mut perm: Vec<usize> = (0..k).collect();
            perm.rotate_left((seed % k as u64) as usize);
            let shuffled: Vec<Vec<f64>> = perm.iter().map(|&i| phi[i].clone()).collect();
            let a = distance_matrix(&model(phi)).unwrap();
            let b = distance_matrix(&model(shuffled)).unwrap();
            prop_assert!(close(coherence(&a), coherence(&b), 1e-12));
            let ea = SymmetricEigen::new(a.as_matrix().clone()).eigenvalues;
            let eb = SymmetricEigen::new(b.as_matrix().clone()).eigenvalues;
            let mut ea: Vec<f64> = ea.iter().copied().collect();
            let mut eb: Vec<f64> = eb.iter().copied().collect();
            ea.sort_by(f64::total_cmp);
            eb.sort_by(f64::total_cmp);
            for (x, y) in ea.iter().zip(&eb) {
                prop_assert!(close(*x, *y, 1e-9));
            }
        }
    }
}
