use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::matrix::InteractionMatrix;
use crate::error::{Error, Result};

/// Per-user partition of a matrix into train/validation/test.
#[derive(Debug, Clone)]
pub struct DatasetSplit {
    pub train: InteractionMatrix,
    pub validation: InteractionMatrix,
    pub test: InteractionMatrix,
    pub seed: u64,
}

/// User-level holdout for inductive evaluation: seen users keep their full
/// profile, unseen users are split into an embedding-building part and an
/// evaluation part. All parts share the item universe.
#[derive(Debug, Clone)]
pub struct UserHoldoutSplit {
    pub train_users: InteractionMatrix,
    pub unseen_build: InteractionMatrix,
    pub unseen_eval: InteractionMatrix,
    pub seed: u64,
}

fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor() as usize
}

/// Shuffle each user's interactions with the seeded generator and partition
/// them by `round(n*train_frac) / round(n*val_frac) / remainder`, guaranteeing
/// at least one validation and one test interaction per user.
pub fn split_per_user(
    matrix: &InteractionMatrix,
    train_frac: f64,
    val_frac: f64,
    seed: u64,
) -> Result<DatasetSplit> {
    if !(train_frac > 0.0 && val_frac > 0.0 && train_frac + val_frac < 1.0) {
        return Err(Error::InvalidParam(format!(
            "split fractions must be positive with train+val < 1, got {train_frac}/{val_frac}"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_users = matrix.n_users();
    let mut train_rows = Vec::with_capacity(n_users);
    let mut val_rows = Vec::with_capacity(n_users);
    let mut test_rows = Vec::with_capacity(n_users);

    for u in 0..n_users as u32 {
        let mut items: Vec<u32> = matrix.row(u).to_vec();
        let n = items.len();
        if n < 3 {
            return Err(Error::ProfileTooSmall {
                user: matrix.user_map().key(u).to_string(),
                have: n,
                need: 3,
            });
        }
        items.shuffle(&mut rng);

        let mut n_train = round_half_up(n as f64 * train_frac).max(1);
        let mut n_val = round_half_up(n as f64 * val_frac).max(1);
        // Steal from train until at least one test interaction remains.
        while n_train + n_val > n - 1 && n_train > 1 {
            n_train -= 1;
        }
        while n_train + n_val > n - 1 && n_val > 1 {
            n_val -= 1;
        }

        let mut train: Vec<u32> = items[..n_train].to_vec();
        let mut val: Vec<u32> = items[n_train..n_train + n_val].to_vec();
        let mut test: Vec<u32> = items[n_train + n_val..].to_vec();
        train.sort_unstable();
        val.sort_unstable();
        test.sort_unstable();
        train_rows.push(train);
        val_rows.push(val);
        test_rows.push(test);
    }

    let um = matrix.user_map().clone();
    let im = matrix.item_map().clone();
    Ok(DatasetSplit {
        train: InteractionMatrix::from_parts(train_rows, um.clone(), im.clone()),
        validation: InteractionMatrix::from_parts(val_rows, um.clone(), im.clone()),
        test: InteractionMatrix::from_parts(test_rows, um, im),
        seed,
    })
}

/// Shuffle users with the seeded generator, mark `round(U*unseen_frac)` of
/// them unseen, and split each unseen profile into build/eval parts with at
/// least one evaluation interaction.
pub fn split_user_holdout(
    matrix: &InteractionMatrix,
    unseen_frac: f64,
    profile_build_frac: f64,
    seed: u64,
) -> Result<UserHoldoutSplit> {
    if !(unseen_frac > 0.0 && unseen_frac < 1.0) {
        return Err(Error::InvalidParam(format!(
            "unseen_frac must be in (0,1), got {unseen_frac}"
        )));
    }
    if !(profile_build_frac > 0.0 && profile_build_frac < 1.0) {
        return Err(Error::InvalidParam(format!(
            "profile_build_frac must be in (0,1), got {profile_build_frac}"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_users = matrix.n_users();
    let mut order: Vec<u32> = (0..n_users as u32).collect();
    order.shuffle(&mut rng);
    let n_unseen = round_half_up(n_users as f64 * unseen_frac);

    let mut is_unseen = vec![false; n_users];
    for &u in order.iter().take(n_unseen) {
        is_unseen[u as usize] = true;
    }
    // Original index order keeps the id maps stable regardless of shuffle.
    let seen: Vec<u32> = (0..n_users as u32).filter(|&u| !is_unseen[u as usize]).collect();
    let unseen: Vec<u32> = (0..n_users as u32).filter(|&u| is_unseen[u as usize]).collect();

    let seen_rows: Vec<Vec<u32>> = seen.iter().map(|&u| matrix.row(u).to_vec()).collect();

    let mut build_rows = Vec::with_capacity(unseen.len());
    let mut eval_rows = Vec::with_capacity(unseen.len());
    for &u in &unseen {
        let mut items: Vec<u32> = matrix.row(u).to_vec();
        let n = items.len();
        if n < 2 {
            return Err(Error::ProfileTooSmall {
                user: matrix.user_map().key(u).to_string(),
                have: n,
                need: 2,
            });
        }
        items.shuffle(&mut rng);
        let mut n_build = round_half_up(n as f64 * profile_build_frac).max(1);
        while n_build > n - 1 {
            n_build -= 1;
        }
        let mut build: Vec<u32> = items[..n_build].to_vec();
        let mut eval: Vec<u32> = items[n_build..].to_vec();
        build.sort_unstable();
        eval.sort_unstable();
        build_rows.push(build);
        eval_rows.push(eval);
    }

    let im = matrix.item_map().clone();
    let seen_map = matrix.user_map().subset(&seen);
    let unseen_map = matrix.user_map().subset(&unseen);
    Ok(UserHoldoutSplit {
        train_users: InteractionMatrix::from_parts(seen_rows, seen_map, im.clone()),
        unseen_build: InteractionMatrix::from_parts(build_rows, unseen_map.clone(), im.clone()),
        unseen_eval: InteractionMatrix::from_parts(eval_rows, unseen_map, im),
        seed,
    })
}
