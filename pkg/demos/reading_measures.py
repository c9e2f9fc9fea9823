"""Four reading-time measures on one trial with a refixation and a regression.

The reader looks at ``int``, refixates it, moves on to ``count``, jumps
back to ``int`` and then reads ``count`` and ``=`` in order. Each token
position (AOI) gets its own measures:

* single fixation duration only exists when the token was fixated once,
* first fixation duration is the first look,
* gaze duration adds up the first run of consecutive looks,
* regression path duration runs until the eyes pass the token to the right.

Run with ``python3 demos/reading_measures.py``.
"""

from __future__ import annotations

from sndgaze.gaze import FixationEvent, trial_metrics

SCANPATH = [  # (token, position, duration in ms)
    ("int", 0, 180.0),
    ("int", 0, 120.0),
    ("count", 1, 240.0),
    ("int", 0, 90.0),
    ("count", 1, 110.0),
    ("=", 2, 150.0),
]


def main() -> None:
    events = [FixationEvent("reader", "trial", i, w, o, d) for i, (w, o, d) in enumerate(SCANPATH)]
    print(f"{'token':>6} {'pos':>3} {'SFD':>6} {'FFD':>6} {'GD':>6} {'RPD':>6}")
    for (word, pos), m in sorted(trial_metrics(events).items(), key=lambda kv: kv[0][1]):
        sfd = "-" if m.sfd is None else f"{m.sfd:g}"
        print(f"{word:>6} {pos:>3} {sfd:>6} {m.ffd:>6g} {m.gd:>6g} {m.rpd:>6g}")


if __name__ == "__main__":
    main()
