//! Limit moments from the recurrences and from free cumulant addition.
use bdlab::freeprob::{free_add, semicircle_moments, LimitLaw};
use bdlab::moments::{limit_moments_a, limit_moments_dunkl, MomentScaling, MomentSequence};

fn main() -> bdlab::Result<()> {
    let order = 8;
    let m0 = LimitLaw::Quartercircle.moments(order)?;
    let rec = limit_moments_a(
        &MomentSequence::new(m0.clone(), MomentScaling::A, 0.0),
        1.0,
        order,
    );
    let fp = free_add(&semicircle_moments(&1.0, order), &m0, order);
    println!(" l   recurrence        free cumulants    Dunkl (nu0 = 1)");
    let d = limit_moments_dunkl(
        &MomentSequence::new(m0, MomentScaling::Dunkl, 0.0),
        1.0,
        1.0,
        order,
    );
    for l in 0..=order {
        println!(
            "{l:2}   {:<16.10}  {:<16.10}  {:.10}",
            rec.values[l], fp[l], d.values[l]
        );
    }
    Ok(())
}
