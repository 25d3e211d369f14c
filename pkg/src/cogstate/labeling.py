"""Three-class cognitive-state labels from task performance and NASA-TLX.

Each trial's score averages performance with inverted TLX (high reported
workload pulls the state down); the pooled cohort's quartiles then split
scores into low / transition / high. TLX inversion is an interpretation
choice and can be switched off.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .recording import Recording, TaskRound

STATES: tuple[str, ...] = ("low", "transition", "high")


def state_index(state: str) -> int:
    try:
        return STATES.index(state)
    except ValueError:
        raise ConfigError(f"unknown cognitive state {state!r}") from None


def combined_score(performance: float, nasa_tlx: float, invert_tlx: bool = True) -> float:
    """Average of performance and (inverted) TLX, in [0, 1]."""
    for name, v in (("performance", performance), ("nasa_tlx", nasa_tlx)):
        if not 0.0 <= v <= 1.0:
            raise ConfigError(f"{name} must be in [0, 1], got {v}")
    tlx = (1.0 - nasa_tlx) if invert_tlx else nasa_tlx
    return (performance + tlx) / 2.0


def quartile_label(scores: list[float] | np.ndarray) -> list[str]:
    """Label each score against the cohort's Q1/Q3 (linear interpolation).

    Below Q1 is low, above Q3 is high, anything else (including boundary
    equality) is transition.
    """
    s = np.asarray(scores, dtype=np.float64)
    if s.size < 4:
        raise ConfigError(f"quartile labeling needs at least 4 scores, got {s.size}")
    q1, q3 = np.percentile(s, [25.0, 75.0], method="linear")
    return ["low" if v < q1 else "high" if v > q3 else "transition" for v in s]


@dataclass(frozen=True)
class LabeledTrial:
    subject_id: str
    task: str
    difficulty: int
    performance: float
    nasa_tlx: float
    score: float
    state: str


def label_cohort(recordings: list[Recording], invert_tlx: bool = True) -> list[LabeledTrial]:
    """Score and quartile-label every annotated round across the cohort."""
    rows = []
    for rec in recordings:
        for rnd in rec.annotations:
            rows.append((rec.subject_id, rnd))
    return label_rounds(rows, invert_tlx)


def label_rounds(rows: list[tuple[str, TaskRound]], invert_tlx: bool = True) -> list[LabeledTrial]:
    """Label (subject_id, round) pairs pooled over the whole cohort."""
    if not rows:
        raise ConfigError("cohort has no annotated rounds to label")
    scores = [combined_score(r.performance, r.nasa_tlx, invert_tlx) for _, r in rows]
    states = quartile_label(scores)
    return [
        LabeledTrial(
            subject_id=sid,
            task=rnd.task,
            difficulty=rnd.difficulty,
            performance=rnd.performance,
            nasa_tlx=rnd.nasa_tlx,
            score=score,
            state=state,
        )
        for (sid, rnd), score, state in zip(rows, scores, states)
    ]


def trials_csv(trials: list[LabeledTrial]) -> str:
    lines = ["subject_id,task,difficulty,performance,nasa_tlx,score,state"]
    for t in trials:
        lines.append(
            f"{t.subject_id},{t.task},{t.difficulty},{t.performance!r},"
            f"{t.nasa_tlx!r},{t.score!r},{t.state}"
        )
    return "\n".join(lines) + "\n"


def trial_lookup(trials: list[LabeledTrial]) -> dict[tuple[str, str, int], LabeledTrial]:
    """Index trials by (subject, task, difficulty)."""
    out = {}
    for t in trials:
        key = (t.subject_id, t.task, t.difficulty)
        if key in out:
            raise ConfigError(f"duplicate trial for {key}")
        out[key] = t
    return out
