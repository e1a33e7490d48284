/// Probabilists' Hermite polynomial `He_m(x)` via the three-term recurrence
/// `He_{k+1} = x He_k - k He_{k-1}`.
pub fn hermite_polynomial(m: u32, x: f64) -> f64 {
    match m {
        0 => 1.0,
        1 => x,
        _ => {
            let (mut prev, mut cur) = (1.0, x);
            for k in 1..m {
                let next = x * cur - f64::from(k) * prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}
