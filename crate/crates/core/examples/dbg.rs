use romfeti_core::geometry::MacroMapping;
fn main() {
    let w = std::f64::consts::FRAC_1_SQRT_2;
    let r = 2.0;
    let ctrl = vec![
        [r, 0.0, 0.0, 1.0],
        [w * r, w * r, 0.0, w],
        [0.0, r, 0.0, 1.0],
    ];
    let m = MacroMapping::from_homogeneous(1, [2, 0, 0], ctrl);
    let sub = m.restricted([0.25, 0.0, 0.0], [0.6, 0.0, 0.0]);
    for p in sub.control_points() { println!("{:?}", p); }
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let (x, _) = sub.evaluate(&[t, 0.0, 0.0]);
        let (xg, _) = m.evaluate(&[0.25 + t*0.35, 0.0, 0.0]);
        println!("t={t}: sub=({:.6},{:.6}) r={:.8}  glob=({:.6},{:.6}) r={:.8}", x[0], x[1], (x[0]*x[0]+x[1]*x[1]).sqrt(), xg[0], xg[1], (xg[0]*xg[0]+xg[1]*xg[1]).sqrt());
    }
}
