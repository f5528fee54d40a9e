//! Worked examples: Schoen's population model, an order-3 tensor map on
//! four coordinates, and a three-state turn-based game.

use rand::Rng;

use crate::maps::{harmonic_theta, tensor_map, ExprMap, MapError, MapExpr, TensorSpec};
use crate::topical::{Action, GameSpec, GameState, Player};

/// Coefficients `a_i, b_i, c_i, d_i` of Schoen's map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchoenParams {
    pub a: [f64; 4],
    pub b: [f64; 4],
    pub c: [f64; 4],
    pub d: [f64; 4],
}

impl SchoenParams {
    /// Positivity and the four pairwise inequalities assumed in the analysis.
    pub fn satisfies_assumptions(&self) -> bool {
        let [a, b, c, d] = [self.a, self.b, self.c, self.d];
        a.iter().all(|v| *v > 0.0)
            && [b, c, d].iter().all(|row| row.iter().all(|v| *v >= 0.0))
            && d[0] > 0.0
            && c[1] > 0.0
            && c[2] > 0.0
            && d[3] > 0.0
            && a[0] < a[1] + b[1]
            && a[1] < a[0] + b[0]
            && a[2] < a[3] + b[3]
            && a[3] < a[2] + b[2]
    }
}

fn x(i: usize) -> MapExpr {
    MapExpr::Coord(i)
}

fn theta(i: usize, j: usize) -> MapExpr {
    harmonic_theta(x(i), x(j))
}

fn term(c: f64, e: MapExpr) -> Option<MapExpr> {
    (c > 0.0).then(|| MapExpr::Scale { c, child: Box::new(e) })
}

/// `f_i = a_i x_i + b_i θ(pair_i) + c_i θ(x1, x4) + d_i θ(x2, x3)` with
/// pairs `(1,2), (1,2), (3,4), (3,4)`.
pub fn schoen(p: &SchoenParams) -> Result<ExprMap, MapError> {
    let pair = [(0, 1), (0, 1), (2, 3), (2, 3)];
    let coords = (0..4)
        .map(|i| {
            let parts: Vec<MapExpr> = [
                term(p.a[i], x(i)),
                term(p.b[i], theta(pair[i].0, pair[i].1)),
                term(p.c[i], theta(0, 3)),
                term(p.d[i], theta(1, 2)),
            ]
            .into_iter()
            .flatten()
            .collect();
            MapExpr::Sum(parts)
        })
        .collect();
    ExprMap::new(coords)
}

/// The same map as a `.conemap` document.
pub fn schoen_text(p: &SchoenParams) -> String {
    let mut s = String::from("format: 1\ndim: 4\n");
    let pair = ["x1, x2", "x1, x2", "x3, x4", "x3, x4"];
    for (i, pair) in pair.iter().enumerate() {
        s.push_str(&format!(
            "f{} = {}*x{} + {}*theta({}) + {}*theta(x1, x4) + {}*theta(x2, x3)\n",
            i + 1,
            p.a[i],
            i + 1,
            p.b[i],
            pair,
            p.c[i],
            p.d[i]
        ));
    }
    s
}

/// Parameters of the order-3 tensor example.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TensorParams {
    pub a: [f64; 2],
    pub b: [f64; 3],
    pub c: [f64; 3],
    pub d: [f64; 3],
}

/// Entries of the tensor as `(coefficient, [j2, j3])` per row.
pub fn tensor_spec(p: &TensorParams) -> TensorSpec {
    let rows = vec![
        vec![(p.a[0], vec![0, 1]), (p.a[1], vec![1, 1])],
        vec![(p.b[0], vec![0, 0]), (p.b[1], vec![0, 1]), (p.b[2], vec![1, 1])],
        vec![(p.c[0], vec![0, 0]), (p.c[1], vec![0, 1]), (p.c[2], vec![1, 2])],
        vec![(p.d[0], vec![0, 3]), (p.d[1], vec![2, 2]), (p.d[2], vec![3, 3])],
    ];
    TensorSpec { n: 4, order: 3, rows }
}

/// `f(x)_i = (Σ a_{ijk} x_j x_k)^{1/2}`.
pub fn tensor_example(p: &TensorParams) -> Result<ExprMap, MapError> {
    tensor_map(&tensor_spec(p))
}

/// The tensor map in normalised mean form, one `mean(2, ..)` per row.
pub fn tensor_text(p: &TensorParams) -> String {
    let mut s = String::from("format: 1\ndim: 4\n");
    let mono = |j: usize, k: usize| if j == k { format!("x{}", j + 1) } else { format!("geo(x{}, x{})", j + 1, k + 1) };
    for (i, row) in tensor_spec(p).rows.iter().enumerate() {
        let total: f64 = row.iter().map(|(a, _)| a).sum();
        let weights: Vec<String> = row.iter().map(|(a, _)| format!("{a}/{total}")).collect();
        let kids: Vec<String> = row.iter().map(|(_, jk)| mono(jk[0], jk[1])).collect();
        s.push_str(&format!("f{} = mean(2, ({}), {}) * {total}^0.5\n", i + 1, weights.join(", "), kids.join(", ")));
    }
    s
}

/// Payoffs `r_1 .. r_6` and transition probabilities of the three-state game.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GameParams {
    pub r: [f64; 6],
    pub p1: f64,
    pub p2: f64,
}

/// State 1 is controlled by the maximiser, states 2 and 3 by the minimiser.
pub fn game_example(p: &GameParams) -> GameSpec {
    let act = |payoff: f64, transition: [f64; 3]| Action { payoff, transition: transition.to_vec() };
    GameSpec {
        states: vec![
            GameState {
                player: Player::Max,
                actions: vec![act(p.r[0], [1.0, 0.0, 0.0]), act(p.r[1], [p.p1, 1.0 - p.p1, 0.0])],
            },
            GameState {
                player: Player::Min,
                actions: vec![act(p.r[2], [0.0, 1.0, 0.0]), act(p.r[3], [p.p2, 0.0, 1.0 - p.p2])],
            },
            GameState {
                player: Player::Min,
                actions: vec![act(p.r[4], [0.0, 0.0, 1.0]), act(p.r[5], [1.0, 0.0, 0.0])],
            },
        ],
    }
}

/// `exp ∘ T ∘ log` for the game above as a `.conemap` document.
pub fn game_conjugate_text(p: &GameParams) -> String {
    let e = p.r.map(f64::exp);
    let (q1, q2) = (1.0 - p.p1, 1.0 - p.p2);
    format!(
        "format: 1\ndim: 3\n\
         f1 = max({}*x1, {}*x1^{}*x2^{})\n\
         f2 = min({}*x2, {}*x1^{}*x3^{})\n\
         f3 = min({}*x3, {}*x1)\n",
        e[0], e[1], p.p1, q1, e[2], e[3], p.p2, q2, e[4], e[5]
    )
}

/// Random map in the class generated by power means with `r >= 0`.
///
/// Each coordinate is a positive combination of one to three means over
/// small random sets of coordinates, so `G(f)` ranges from strongly
/// connected to block triangular with several final classes. `density` is
/// the chance that a coordinate appears in a given mean.
pub fn random_m_plus(rng: &mut impl Rng, n: usize, density: f64) -> ExprMap {
    const EXPONENTS: [f64; 5] = [0.0, 0.5, 1.0, 2.0, 3.0];
    let coords = (0..n)
        .map(|_| {
            let terms = (0..rng.gen_range(1..=3))
                .map(|_| {
                    let mut children: Vec<MapExpr> =
                        (0..n).filter(|_| rng.gen_bool(density)).map(MapExpr::Coord).collect();
                    if children.is_empty() {
                        children.push(MapExpr::Coord(rng.gen_range(0..n)));
                    }
                    let raw: Vec<f64> = children.iter().map(|_| rng.gen_range(0.1..1.0)).collect();
                    let total: f64 = raw.iter().sum();
                    let mut weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
                    let head: f64 = weights[1..].iter().sum();
                    weights[0] = 1.0 - head;
                    let r = EXPONENTS[rng.gen_range(0..EXPONENTS.len())];
                    MapExpr::Scale {
                        c: rng.gen_range(0.2..3.0),
                        child: Box::new(MapExpr::PowerMean { r, weights, children }),
                    }
                })
                .collect();
            MapExpr::Sum(terms)
        })
        .collect();
    ExprMap::new(coords).expect("well-formed by construction")
}
