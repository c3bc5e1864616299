/// Gauss-Legendre rule on [0, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct LineRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Tensor-product rule on the unit square.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl LineRule {
    /// `n`-point Gauss rule, exact for degree `2n − 1`. Supports 1 ≤ n ≤ 5.
    pub fn gauss(n: usize) -> Self {
        let (x, w): (&[f64], &[f64]) = match n {
            1 => (&[0.0], &[2.0]),
            2 => (&[-0.577_350_269_189_625_8, 0.577_350_269_189_625_8], &[1.0, 1.0]),
            3 => (
                &[-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4],
                &[5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0],
            ),
            4 => (
                &[
                    -0.861_136_311_594_052_6,
                    -0.339_981_043_584_856_3,
                    0.339_981_043_584_856_3,
                    0.861_136_311_594_052_6,
                ],
                &[
                    0.347_854_845_137_453_85,
                    0.652_145_154_862_546_1,
                    0.652_145_154_862_546_1,
                    0.347_854_845_137_453_85,
                ],
            ),
            5 => (
                &[
                    -0.906_179_845_938_664,
                    -0.538_469_310_105_683,
                    0.0,
                    0.538_469_310_105_683,
                    0.906_179_845_938_664,
                ],
                &[
                    0.236_926_885_056_189_08,
                    0.478_628_670_499_366_47,
                    0.568_888_888_888_888_9,
                    0.478_628_670_499_366_47,
                    0.236_926_885_056_189_08,
                ],
            ),
            _ => panic!("Gauss rule with {n} points not tabulated"),
        };
        Self {
            points: x.iter().map(|s| 0.5 * (s + 1.0)).collect(),
            weights: w.iter().map(|w| 0.5 * w).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl QuadratureRule {
    pub fn gauss(n: usize) -> Self {
        let line = LineRule::gauss(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for (j, &y) in line.points.iter().enumerate() {
            for (i, &x) in line.points.iter().enumerate() {
                points.push([x, y]);
                weights.push(line.weights[i] * line.weights[j]);
            }
        }
        Self { points, weights }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w * f(p[0], p[1]))
            .sum()
    }
}
