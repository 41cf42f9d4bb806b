use rand::Rng;

/// Independently drop profile entries with probability `p`, rescaling
/// survivors by `1/(1-p)` when `rescale` is set so the expected user
/// embedding matches the no-dropout embedding. A profile that loses every
/// entry keeps one uniformly chosen entry instead of going silent.
pub fn apply_user_profile_dropout(
    profiles: &[Vec<(u32, f64)>],
    p: f64,
    rescale: bool,
    rng: &mut impl Rng,
) -> Vec<Vec<(u32, f64)>> {
    assert!((0.0..1.0).contains(&p), "dropout p must be in [0,1)");
    if p == 0.0 {
        return profiles.to_vec();
    }
    let scale = if rescale { 1.0 / (1.0 - p) } else { 1.0 };
    profiles
        .iter()
        .map(|profile| {
            let mut kept: Vec<(u32, f64)> = profile
                .iter()
                .filter(|_| !rng.gen_bool(p))
                .map(|&(i, w)| (i, w * scale))
                .collect();
            if kept.is_empty() && !profile.is_empty() {
                let &(i, w) = &profile[rng.gen_range(0..profile.len())];
                kept.push((i, w * scale));
            }
            kept
        })
        .collect()
}
