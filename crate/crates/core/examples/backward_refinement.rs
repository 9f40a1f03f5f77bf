//! Walk back from a grounding anchor to the first frame where both objects
//! are visible, counting presence probes.

use graze::refinement::{phase1_backtrack, refine, PairBoxes, PresenceSet};
use graze::{BBox, EngineConfig};

fn main() {
    let cfg = EngineConfig::default();
    let b = BBox::new(600.0, 300.0, 690.0, 450.0).unwrap();
    let refs = PairBoxes { player: b, dummy: b };

    let cases: [(&str, PresenceSet, usize); 4] = [
        ("contiguous", PresenceSet::new(42..=280), 150),
        ("one dropped frame", PresenceSet::new((42..=280).filter(|&f| f != 97)), 150),
        ("two dropped frames", PresenceSet::new((42..=280).filter(|&f| f != 97 && f != 98)), 150),
        ("long video", PresenceSet::new(1_000..=9_000), 8_500),
    ];
    for (label, presence, t_g) in cases {
        let walk = phase1_backtrack(&presence, t_g, refs, &cfg);
        let r = refine(&presence, t_g, refs, &cfg);
        println!(
            "{label:<20} anchor {t_g:>5}  walk stops at {walk:>5}  first frame {:>5}  probes {}",
            r.frame, r.probe_calls
        );
    }
}
