/// Horizontal offsets of `count` sheet tabs while sliding from sheet `from`
/// to sheet `to`. `phase` 0 is the start of the slide, 1 its end; offsets
/// are `(index - active) * (width + gap)` with `active` interpolated.
pub fn tab_geometry(
    count: usize,
    from: usize,
    to: usize,
    phase: f64,
    width: f64,
    gap: f64,
) -> Vec<(usize, f64)> {
    let phase = phase.clamp(0.0, 1.0);
    let active = from as f64 + (to as f64 - from as f64) * phase;
    (0..count)
        .map(|i| (i, (i as f64 - active) * (width + gap)))
        .collect()
}
