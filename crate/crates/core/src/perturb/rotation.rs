use serde::Serialize;

use crate::linalg::{DenseMatrix, Lu};
use crate::scalar::Scalar;

use super::{matched_exact_vectors, PerturbError, PerturbWorkspace, PerturbationModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rotation {
    Clockwise,
    Anticlockwise,
    Unchanged,
}

impl Rotation {
    fn from_sign(positive_is_clockwise: bool) -> Self {
        if positive_is_clockwise {
            Rotation::Clockwise
        } else {
            Rotation::Anticlockwise
        }
    }
}

/// Classifies the signed angle from `before` to `after` (home axis first).
/// Returns the verdict and the angle in radians.
pub fn rotation_verdict<T: Scalar>(before: [T; 2], after: [T; 2], eps: T) -> Result<(Rotation, T), PerturbError> {
    if before[0] == T::zero() && before[1] == T::zero() {
        return Err(PerturbError::ZeroVector);
    }
    let cross = before[0] * after[1] - before[1] * after[0];
    let dot = before[0] * after[0] + before[1] * after[1];
    let angle = cross.atan2(dot);
    let verdict = if angle.abs() <= eps {
        Rotation::Unchanged
    } else if angle < T::zero() {
        Rotation::Clockwise
    } else {
        Rotation::Anticlockwise
    };
    Ok((verdict, angle))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeDirection {
    /// `u -> v`
    Forward,
    /// `v -> u`
    Backward,
    Both,
}

/// Ways of predicting which node of a single cross edge moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RotationRule {
    /// The node whose block has the larger Perron value moves: clockwise for a
    /// positive edge, anticlockwise for a negative one.
    LargerPerron,
    /// The source node moves and the target stays; the source turns clockwise
    /// iff `sign * (lambda_src - lambda_tgt) > 0`.
    SourceGap,
    /// Exact single-edge algebra: the source gains
    /// `e * x_t * [(lambda_tgt I - A_src)^{-1}]_ss` on the target axis.
    Resolvent,
}

/// Predicted verdicts `[u, v]` for `u` in block 1 and `v` in block 2.
/// `Resolvent` needs the two resolvent diagonal signs (source `u`, source `v`).
pub fn predict_rotation(
    reading: RotationRule,
    sign: i8,
    lambda_u: f64,
    lambda_v: f64,
    direction: EdgeDirection,
    resolvent_sign: Option<[f64; 2]>,
) -> [Rotation; 2] {
    let e = f64::from(sign.signum());
    let stay = Rotation::Unchanged;
    let (fwd, bwd) = match direction {
        EdgeDirection::Forward => (true, false),
        EdgeDirection::Backward => (false, true),
        EdgeDirection::Both => (true, true),
    };
    match reading {
        RotationRule::LargerPerron => {
            let turn = Rotation::from_sign(e > 0.0);
            if lambda_u > lambda_v {
                [turn, stay]
            } else {
                [stay, turn]
            }
        }
        RotationRule::SourceGap => {
            let u = if fwd { Rotation::from_sign(e * (lambda_u - lambda_v) > 0.0) } else { stay };
            let v = if bwd { Rotation::from_sign(e * (lambda_v - lambda_u) > 0.0) } else { stay };
            [u, v]
        }
        RotationRule::Resolvent => {
            let r = resolvent_sign.unwrap_or([0.0, 0.0]);
            // target Perron entries are positive, so the gained coordinate has
            // the sign of e * r; negative means clockwise
            let turn = |s: f64| if s == 0.0 { stay } else { Rotation::from_sign(e * s < 0.0) };
            [if fwd { turn(r[0]) } else { stay }, if bwd { turn(r[1]) } else { stay }]
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeRotation<T> {
    pub node: usize,
    /// (home, other) coordinates before and after.
    pub before: [T; 2],
    pub after: [T; 2],
    pub angle: T,
    pub verdict: Rotation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeRotationReport<T> {
    pub lambda_u: T,
    pub lambda_v: T,
    pub sign: i8,
    pub direction: EdgeDirection,
    /// Case label for `u -> v`: "1" positive, "2" negative; "a" when
    /// `lambda_u > lambda_v`.
    pub case: String,
    pub u: NodeRotation<T>,
    pub v: NodeRotation<T>,
    pub larger_perron_prediction: [Rotation; 2],
    pub source_gap_prediction: [Rotation; 2],
    pub resolvent_prediction: [Rotation; 2],
}

impl<T: Scalar> EdgeRotationReport<T> {
    pub fn observed(&self) -> [Rotation; 2] {
        [self.u.verdict, self.v.verdict]
    }

    /// Whether the observed verdicts agree with `reading` on every node it
    /// predicts to move.
    pub fn movers_match(&self, reading: RotationRule) -> bool {
        let p = match reading {
            RotationRule::LargerPerron => self.larger_perron_prediction,
            RotationRule::SourceGap => self.source_gap_prediction,
            RotationRule::Resolvent => self.resolvent_prediction,
        };
        let obs = self.observed();
        (0..2).all(|i| p[i] == Rotation::Unchanged || p[i] == obs[i])
    }

    /// Largest stationary-node angle over smallest moving-node angle under
    /// `reading`; `None` if the reading predicts no stationary or no moving node.
    pub fn stationary_ratio(&self, reading: RotationRule) -> Option<T> {
        let p = match reading {
            RotationRule::LargerPerron => self.larger_perron_prediction,
            RotationRule::SourceGap => self.source_gap_prediction,
            RotationRule::Resolvent => self.resolvent_prediction,
        };
        let angles = [self.u.angle.abs(), self.v.angle.abs()];
        let moving = (0..2).filter(|&i| p[i] != Rotation::Unchanged).map(|i| angles[i]).reduce(T::min)?;
        let still = (0..2).filter(|&i| p[i] == Rotation::Unchanged).map(|i| angles[i]).reduce(T::max)?;
        Some(still / moving)
    }
}

/// `[(lambda_tgt I - A_src)^{-1}]_ss` for the source block of a single edge.
fn resolvent_diagonal<T: Scalar>(m: &PerturbationModel<T>, src: usize, lambda_tgt: T) -> Result<T, PerturbError> {
    let b = m.cluster_of[src];
    let nodes = m.block_nodes(b);
    let s = nodes.len();
    let mut shifted = DenseMatrix::zeros(s, s);
    for (jj, &j) in nodes.iter().enumerate() {
        for (ii, &i) in nodes.iter().enumerate() {
            shifted[(ii, jj)] = -m.base[(i, j)];
        }
        shifted[(jj, jj)] += lambda_tgt;
    }
    let lu = Lu::new(&shifted).map_err(|_| PerturbError::SingularResolvent { index: b })?;
    let local = nodes.iter().position(|&i| i == src).expect("src in its block");
    let mut unit = vec![T::zero(); s];
    unit[local] = T::one();
    Ok(lu.solve(&unit)[local])
}

/// Injects a single cross edge of `sign` between `u` and `v` into the base of
/// `m` and measures how both nodes move in the plane of their two block
/// Perron vectors. Verdicts use angles with `|angle| <= 1e-10` as unchanged.
pub fn single_edge_rotation<T: Scalar>(
    m: &PerturbationModel<T>,
    u: usize,
    v: usize,
    sign: i8,
    direction: EdgeDirection,
) -> Result<EdgeRotationReport<T>, PerturbError> {
    let n = m.n();
    for node in [u, v] {
        if node >= n {
            return Err(PerturbError::NodeOutOfRange(node));
        }
    }
    let (bu, bv) = (m.cluster_of[u], m.cluster_of[v]);
    if bu == bv {
        return Err(PerturbError::SameBlock { u, v });
    }
    let (lu_, xu) = m.block_perron(bu)?;
    let (lv_, xv) = m.block_perron(bv)?;
    let scale = lu_.abs().max(lv_.abs());
    if (lu_ - lv_).abs() <= T::lit(1e-9) * scale {
        return Err(PerturbError::EqualPerronValues(lu_.as_f64()));
    }

    let e = if sign > 0 { T::one() } else { -T::one() };
    let mut pert = m.base.clone();
    if matches!(direction, EdgeDirection::Forward | EdgeDirection::Both) {
        pert[(u, v)] += e;
    }
    if matches!(direction, EdgeDirection::Backward | EdgeDirection::Both) {
        pert[(v, u)] += e;
    }

    let x = DenseMatrix::from_columns(&[xu.clone(), xv.clone()])?;
    let w = PerturbWorkspace {
        x,
        lambdas: vec![lu_, lv_],
        q: DenseMatrix::zeros(n, 0),
        l2: DenseMatrix::zeros(0, 0),
        nabla: Vec::new(),
        cluster_of: m.cluster_of.clone(),
    };
    let (exact, _) = matched_exact_vectors(&w, &pert)?;

    let eps = T::lit(1e-10);
    let node_rot = |node: usize, home: usize| -> Result<NodeRotation<T>, PerturbError> {
        let other = 1 - home;
        let before = [w.x[(node, home)], w.x[(node, other)]];
        let after = [exact[(node, home)], exact[(node, other)]];
        let (verdict, angle) = rotation_verdict(before, after, eps)?;
        Ok(NodeRotation { node, before, after, angle, verdict })
    };
    let ru = node_rot(u, 0)?;
    let rv = node_rot(v, 1)?;

    let res = [
        resolvent_diagonal(m, u, lv_)?.as_f64(),
        resolvent_diagonal(m, v, lu_)?.as_f64(),
    ];
    let (lu64, lv64) = (lu_.as_f64(), lv_.as_f64());
    let case = format!("{}{}", if sign > 0 { 1 } else { 2 }, if lu64 > lv64 { "a" } else { "b" });
    Ok(EdgeRotationReport {
        lambda_u: lu_,
        lambda_v: lv_,
        sign: sign.signum(),
        direction,
        case,
        u: ru,
        v: rv,
        larger_perron_prediction: predict_rotation(RotationRule::LargerPerron, sign, lu64, lv64, direction, None),
        source_gap_prediction: predict_rotation(RotationRule::SourceGap, sign, lu64, lv64, direction, None),
        resolvent_prediction: predict_rotation(RotationRule::Resolvent, sign, lu64, lv64, direction, Some(res)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::DirectedSignedGraph;

    #[test]
    fn verdict_examples() {
        assert_eq!(rotation_verdict([1.0, 0.0], [1.0, -0.1], 1e-10).unwrap().0, Rotation::Clockwise);
        assert_eq!(rotation_verdict([1.0, 0.0], [1.0, 0.1], 1e-10).unwrap().0, Rotation::Anticlockwise);
        assert_eq!(rotation_verdict([0.0, 1.0], [0.0, 1.2], 1e-10).unwrap().0, Rotation::Unchanged);
        assert_eq!(rotation_verdict([0.0, 0.0], [1.0, 0.0], 1e-10).unwrap_err(), PerturbError::ZeroVector);
    }

    // block 0: triangle plus chord (rho ~ 1.32), block 1: 2-cycle (rho = 1)
    fn model() -> PerturbationModel<f64> {
        let g = DirectedSignedGraph::from_edges(
            5,
            &[(0, 1, 1), (1, 2, 1), (2, 0, 1), (0, 2, 1), (3, 4, 1), (4, 3, 1)],
        )
        .unwrap();
        PerturbationModel::from_graph(&g, &[0, 0, 0, 1, 1]).unwrap()
    }

    #[test]
    fn target_of_single_edge_stays_exactly() {
        let m = model();
        for sign in [1, -1] {
            // (I - A_0)^{-1} has a zero diagonal entry at node 1 but not at node 0
            let r = single_edge_rotation(&m, 0, 3, sign, EdgeDirection::Forward).unwrap();
            assert_eq!(r.case, if sign > 0 { "1a" } else { "2a" });
            assert_eq!(r.v.verdict, Rotation::Unchanged);
            assert_ne!(r.u.verdict, Rotation::Unchanged);
            assert!(r.movers_match(RotationRule::Resolvent));
            let r = single_edge_rotation(&m, 0, 3, sign, EdgeDirection::Backward).unwrap();
            assert_eq!(r.u.verdict, Rotation::Unchanged);
            assert!(r.movers_match(RotationRule::Resolvent));
        }
    }

    #[test]
    fn zero_resolvent_entry_leaves_source_in_place() {
        let r = single_edge_rotation(&model(), 1, 3, 1, EdgeDirection::Forward).unwrap();
        assert_eq!(r.observed(), [Rotation::Unchanged, Rotation::Unchanged]);
        assert_eq!(r.resolvent_prediction, [Rotation::Unchanged, Rotation::Unchanged]);
    }

    #[test]
    fn larger_target_value_follows_sign() {
        // source block has the smaller Perron value: the resolvent is positive
        let m = model();
        let r = single_edge_rotation(&m, 3, 1, 1, EdgeDirection::Forward).unwrap();
        assert_eq!(r.case, "1b");
        assert_eq!(r.u.verdict, Rotation::Anticlockwise);
        assert_eq!(r.source_gap_prediction, [Rotation::Anticlockwise, Rotation::Unchanged]);
        let r = single_edge_rotation(&m, 3, 1, -1, EdgeDirection::Forward).unwrap();
        assert_eq!(r.u.verdict, Rotation::Clockwise);
    }

    #[test]
    fn same_block_and_equal_values_rejected() {
        let m = model();
        assert_eq!(single_edge_rotation(&m, 0, 1, 1, EdgeDirection::Forward).unwrap_err(), PerturbError::SameBlock { u: 0, v: 1 });
        let g = DirectedSignedGraph::from_edges(4, &[(0, 1, 1), (1, 0, 1), (2, 3, 1), (3, 2, 1)]).unwrap();
        let m = PerturbationModel::<f64>::from_graph(&g, &[0, 0, 1, 1]).unwrap();
        assert!(matches!(single_edge_rotation(&m, 0, 2, 1, EdgeDirection::Forward), Err(PerturbError::EqualPerronValues(_))));
    }
}
