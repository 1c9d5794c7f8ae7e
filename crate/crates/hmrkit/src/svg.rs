//! Minimal hand-rolled SVG scatter chart for the height-sweep output: one
//! series per vertical axis (pixel error left, millimeter error right)
//! against body height on the horizontal axis. No plotting dependencies;
//! the output is deterministic for identical inputs.

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_L: f64 = 64.0;
const MARGIN_R: f64 = 64.0;
const MARGIN_T: f64 = 32.0;
const MARGIN_B: f64 = 48.0;

const COLOR_2D: &str = "#88ccee";
const COLOR_PA: &str = "#6699aa";

fn axis_range(values: &[f64]) -> (f64, f64) {
    let mut lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        lo -= 0.5;
        hi += 0.5;
    }
    let pad = (hi - lo) * 0.08;
    (lo - pad, hi + pad)
}

/// Scatter of the per-height mean 2D keypoint error (left axis, px) and
/// per-height Procrustes-aligned joint error (right axis, mm).
pub fn sweep_scatter(heights: &[f64], err2d_px: &[f64], pa_mm: &[f64]) -> String {
    assert_eq!(heights.len(), err2d_px.len());
    assert_eq!(heights.len(), pa_mm.len());

    let (x0, x1) = axis_range(heights);
    let (l0, l1) = axis_range(err2d_px);
    let (r0, r1) = axis_range(pa_mm);
    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let sx = |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * plot_w;
    let sl = |y: f64| MARGIN_T + (1.0 - (y - l0) / (l1 - l0)) * plot_h;
    let sr = |y: f64| MARGIN_T + (1.0 - (y - r0) / (r1 - r0)) * plot_h;

    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    s.push_str(&format!(
        "  <rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));
    // Plot frame.
    s.push_str(&format!(
        "  <rect x=\"{MARGIN_L}\" y=\"{MARGIN_T}\" width=\"{plot_w}\" height=\"{plot_h}\" \
         fill=\"none\" stroke=\"#444444\" stroke-width=\"1\"/>\n"
    ));
    // Axis tick labels: min and max on each axis.
    let text = |x: f64, y: f64, anchor: &str, label: &str| {
        format!(
            "  <text x=\"{x:.2}\" y=\"{y:.2}\" font-family=\"monospace\" font-size=\"11\" \
             text-anchor=\"{anchor}\">{label}</text>\n"
        )
    };
    s.push_str(&text(sx(x0), HEIGHT - MARGIN_B + 16.0, "start", &format!("{x0:.3}")));
    s.push_str(&text(sx(x1), HEIGHT - MARGIN_B + 16.0, "end", &format!("{x1:.3}")));
    s.push_str(&text(
        WIDTH / 2.0,
        HEIGHT - 12.0,
        "middle",
        "body height [m]",
    ));
    s.push_str(&text(MARGIN_L - 6.0, sl(l0), "end", &format!("{l0:.3}")));
    s.push_str(&text(MARGIN_L - 6.0, sl(l1), "end", &format!("{l1:.3}")));
    s.push_str(&format!(
        "  <text x=\"16\" y=\"{:.2}\" font-family=\"monospace\" font-size=\"11\" fill=\"{COLOR_2D}\" \
         text-anchor=\"middle\" transform=\"rotate(-90 16 {:.2})\">mean 2D error [px]</text>\n",
        HEIGHT / 2.0,
        HEIGHT / 2.0
    ));
    s.push_str(&text(
        WIDTH - MARGIN_R + 6.0,
        sr(r0),
        "start",
        &format!("{r0:.3}"),
    ));
    s.push_str(&text(
        WIDTH - MARGIN_R + 6.0,
        sr(r1),
        "start",
        &format!("{r1:.3}"),
    ));
    s.push_str(&format!(
        "  <text x=\"{:.2}\" y=\"{:.2}\" font-family=\"monospace\" font-size=\"11\" fill=\"{COLOR_PA}\" \
         text-anchor=\"middle\" transform=\"rotate(90 {:.2} {:.2})\">PA-MPJPE [mm]</text>\n",
        WIDTH - 14.0,
        HEIGHT / 2.0,
        WIDTH - 14.0,
        HEIGHT / 2.0
    ));

    for ((h, e), p) in heights.iter().zip(err2d_px).zip(pa_mm) {
        s.push_str(&format!(
            "  <circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"{COLOR_2D}\"/>\n",
            sx(*h),
            sl(*e)
        ));
        s.push_str(&format!(
            "  <circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"none\" stroke=\"{COLOR_PA}\" \
             stroke-width=\"2\"/>\n",
            sx(*h),
            sr(*p)
        ));
    }
    s.push_str("</svg>\n");
    s
}
