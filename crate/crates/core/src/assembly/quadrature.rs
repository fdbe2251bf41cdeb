//! Quadrature rules and 1D polynomial bases shared by the assembly paths.

/// Gauss-Legendre points and weights on `[0, 1]`.
///
/// Nodes are computed by Newton iteration on the Legendre polynomial, which
/// is deterministic and accurate to machine precision for the small counts
/// used here.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(m >= 1);
    let mut pts = vec![0.0; m];
    let mut wts = vec![0.0; m];
    for i in 0..m {
        // initial guess on [-1, 1]
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(m, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(m, x);
        // map to [0,1]; note the reversed index keeps nodes increasing
        pts[m - 1 - i] = 0.5 * (x + 1.0);
        wts[m - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    (pts, wts)
}

fn legendre(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=m {
        let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = pk;
    }
    let p = if m == 0 { p0 } else { p1 };
    let dp = if m == 0 {
        0.0
    } else {
        m as f64 * (x * p1 - p0) / (x * x - 1.0)
    };
    (p, dp)
}

/// Chebyshev-Gauss-Lobatto interpolation nodes on `[0, 1]`.
///
/// Degree 0 collapses to the midpoint.
pub fn chebyshev_gauss_lobatto(degree: usize) -> Vec<f64> {
    if degree == 0 {
        return vec![0.5];
    }
    (0..=degree)
        .map(|m| 0.5 * (1.0 - (std::f64::consts::PI * m as f64 / degree as f64).cos()))
        .collect()
}

/// Values and derivatives of the Lagrange basis on `nodes` at `t`.
pub fn lagrange_basis(nodes: &[f64], t: f64) -> (Vec<f64>, Vec<f64>) {
    let n = nodes.len();
    let mut values = vec![0.0; n];
    let mut derivs = vec![0.0; n];
    for i in 0..n {
        let mut v = 1.0;
        for k in 0..n {
            if k != i {
                v *= (t - nodes[k]) / (nodes[i] - nodes[k]);
            }
        }
        values[i] = v;
        let mut dv = 0.0;
        for j in 0..n {
            if j == i {
                continue;
            }
            let mut term = 1.0 / (nodes[i] - nodes[j]);
            for k in 0..n {
                if k != i && k != j {
                    term *= (t - nodes[k]) / (nodes[i] - nodes[k]);
                }
            }
            dv += term;
        }
        derivs[i] = dv;
    }
    (values, derivs)
}

/// Equally spaced Lagrange nodes on `[0, 1]` for element shape functions.
pub fn element_nodes(degree: usize) -> Vec<f64> {
    (0..=degree).map(|i| i as f64 / degree as f64).collect()
}
