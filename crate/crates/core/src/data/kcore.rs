use crate::data::matrix::InteractionMatrix;
use crate::error::{Error, Result};

/// Restrict to the maximal submatrix in which every user and every item has
/// degree >= k, removing violators iteratively until a fixed point.
///
/// Surviving users and items are reindexed densely, preserving their
/// original relative order.
pub fn kcore_filter(matrix: &InteractionMatrix, k: usize) -> Result<InteractionMatrix> {
    if k < 1 {
        return Err(Error::InvalidParam("k-core requires k >= 1".into()));
    }

    let n_users = matrix.n_users();
    let n_items = matrix.n_items();
    let mut user_alive = vec![true; n_users];
    let mut item_alive = vec![true; n_items];
    let mut user_deg: Vec<usize> = matrix.rows().iter().map(Vec::len).collect();
    let mut item_deg: Vec<usize> = matrix.item_degrees().iter().map(|&d| d as usize).collect();

    loop {
        let mut changed = false;
        for u in 0..n_users {
            if user_alive[u] && user_deg[u] < k {
                user_alive[u] = false;
                changed = true;
                for &i in matrix.row(u as u32) {
                    if item_alive[i as usize] {
                        item_deg[i as usize] -= 1;
                    }
                }
            }
        }
        for i in 0..n_items {
            if item_alive[i] && item_deg[i] < k {
                item_alive[i] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        // Refresh user degrees against the new item set before the next pass.
        for (u, row) in matrix.rows().iter().enumerate() {
            if user_alive[u] {
                user_deg[u] = row.iter().filter(|&&i| item_alive[i as usize]).count();
            }
        }
    }

    let kept_users: Vec<u32> = (0..n_users as u32).filter(|&u| user_alive[u as usize]).collect();
    let kept_items: Vec<u32> = (0..n_items as u32).filter(|&i| item_alive[i as usize]).collect();
    if kept_users.is_empty() || kept_items.is_empty() {
        return Err(Error::EmptyAfterKCore { k });
    }

    let mut item_remap = vec![u32::MAX; n_items];
    for (new, &old) in kept_items.iter().enumerate() {
        item_remap[old as usize] = new as u32;
    }

    let rows: Vec<Vec<u32>> = kept_users
        .iter()
        .map(|&u| {
            matrix
                .row(u)
                .iter()
                .filter(|&&i| item_alive[i as usize])
                .map(|&i| item_remap[i as usize])
                .collect()
        })
        .collect();

    Ok(InteractionMatrix::from_parts(
        rows,
        matrix.user_map().subset(&kept_users),
        matrix.item_map().subset(&kept_items),
    ))
}
