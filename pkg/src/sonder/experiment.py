"""Randomized-experiment machinery: arms, survey scoring, outcomes, effects.

Arm assignment is a deterministic Bernoulli(0.5) draw keyed by (seed,
participant id) and is idempotent per id. Survey scoring flips the sign of
reverse-coded items, averages within dimension, and averages all effective
item scores for the overall value. Outcome O2 summarizes click telemetry per
participant; treatment effects are estimated by OLS with a treatment
indicator and optional pre-treatment controls.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from scipy import stats

from .analytics import RegressionFit, ols_fit, significance_stars
from .errors import (
    DegenerateDistribution,
    EmptyArm,
    InvalidInput,
    InvalidResponse,
)

ARM_TREATMENT = "treatment"
ARM_CONTROL = "control"

TOPICS = (
    "Patriotism in my country today",
    "Openness to immigration",
    "Abortion and its legal status",
    "Traditional values in society today",
    "Laws around gun ownership",
)

COVARIATE_NAMES = ("white", "female", "age", "college", "income_60k",
                   "urban", "democrat")


@dataclass
class Participant:
    id: str
    covariates: dict[str, float]
    arm: Optional[str] = None
    aot7_pre: float = 0.0


@dataclass(frozen=True)
class ScaleItem:
    text: str
    dimension: str
    reverse_coded: bool


@dataclass(frozen=True)
class SurveyScale:
    name: str
    items: tuple[ScaleItem, ...]
    response_range: tuple[int, int] = (-3, 3)

    @property
    def dimensions(self) -> list[str]:
        seen = []
        for item in self.items:
            if item.dimension not in seen:
                seen.append(item.dimension)
        return seen

    @classmethod
    def from_json(cls, obj: dict) -> "SurveyScale":
        return cls(
            name=obj["name"],
            items=tuple(ScaleItem(i["text"], i["dimension"],
                                  bool(i["reverse_coded"]))
                        for i in obj["items"]),
            response_range=tuple(obj.get("response_range", (-3, 3))),
        )


def load_scale(name: str) -> SurveyScale:
    """Load a bundled scale definition (aot17, aot7)."""
    path = resources.files("sonder").joinpath(f"scales/{name}.json")
    return SurveyScale.from_json(json.loads(path.read_text("utf-8")))


@dataclass(frozen=True)
class SurveyResponse:
    participant_id: str
    scale_name: str
    answers: tuple[int, ...]


@dataclass(frozen=True)
class ClickEvent:
    participant_id: str
    topic: str
    query: str
    rank_clicked: int
    completeness_of_result: float
    timestamp: str = ""

    def __post_init__(self):
        if self.rank_clicked < 1:
            raise InvalidInput("rank_clicked must be >= 1")


@dataclass(frozen=True)
class OutcomeRecord:
    participant_id: str
    o1_overall: float
    o1_dimensions: dict[str, float]
    o2_max_rank: int
    o2_n_clicked: int
    o2_mean_click_completeness: Optional[float]


# ---------------------------------------------------------------------------
# arm assignment

class ArmAssigner:
    """Seeded, idempotent Bernoulli(0.5) assignment keyed by participant id."""

    def __init__(self, seed: int):
        self.seed = seed
        self._assigned: dict[str, str] = {}

    def assign(self, participant_id: str) -> str:
        if participant_id in self._assigned:
            return self._assigned[participant_id]
        arm = assign_arm(participant_id, self.seed)
        self._assigned[participant_id] = arm
        return arm

    @property
    def assigned(self) -> dict[str, str]:
        return dict(self._assigned)


def assign_arm(participant_id: str, seed: int) -> str:
    digest = hashlib.blake2b(
        f"{seed}:{participant_id}".encode("utf-8"), digest_size=8
    ).digest()
    return ARM_TREATMENT if digest[0] & 1 else ARM_CONTROL


def find_balanced_seed(participant_ids: Sequence[str], n_treatment: int,
                       start_seed: int = 0, max_tries: int = 100_000) -> int:
    """Search seeds until assign_arm yields exactly n_treatment treated ids."""
    for seed in range(start_seed, start_seed + max_tries):
        n = sum(assign_arm(pid, seed) == ARM_TREATMENT
                for pid in participant_ids)
        if n == n_treatment:
            return seed
    raise InvalidInput(
        f"no seed in [{start_seed}, {start_seed + max_tries}) gives "
        f"{n_treatment} treated"
    )


# ---------------------------------------------------------------------------
# survey scoring

def score_survey(response: SurveyResponse, scale: SurveyScale) -> dict:
    lo, hi = scale.response_range
    if len(response.answers) != len(scale.items):
        raise InvalidResponse(
            f"{len(response.answers)} answers for {len(scale.items)} items"
        )
    for i, a in enumerate(response.answers):
        if not isinstance(a, (int, np.integer)) or not (lo <= a <= hi):
            raise InvalidResponse(f"answer {a!r} at item {i} outside [{lo}, {hi}]")
    effective = [(-a if item.reverse_coded else a)
                 for a, item in zip(response.answers, scale.items)]
    by_dimension = {}
    for dim in scale.dimensions:
        scores = [e for e, item in zip(effective, scale.items)
                  if item.dimension == dim]
        by_dimension[dim] = float(np.mean(scores))
    return {
        "overall": float(np.mean(effective)),
        "by_dimension": by_dimension,
    }


def standardize(values: Sequence[float]) -> np.ndarray:
    arr = np.asarray(list(values), dtype=float)
    if arr.size < 2:
        raise DegenerateDistribution("need at least two values")
    sd = arr.std(ddof=1)
    if sd == 0:
        raise DegenerateDistribution("zero variance")
    return (arr - arr.mean()) / sd


# ---------------------------------------------------------------------------
# balance and outcomes

def balance_table(participants: Sequence[Participant]) -> list[dict]:
    treat = [p for p in participants if p.arm == ARM_TREATMENT]
    control = [p for p in participants if p.arm == ARM_CONTROL]
    if not treat or not control:
        raise EmptyArm("both arms must be nonempty")
    rows = []
    names = list(COVARIATE_NAMES) + ["aot7_pre"]
    for name in names:
        def pull(group):
            if name == "aot7_pre":
                return np.array([p.aot7_pre for p in group], dtype=float)
            return np.array([p.covariates[name] for p in group], dtype=float)
        t, c = pull(treat), pull(control)
        diff = t.mean() - c.mean()
        se = float(np.sqrt(t.var(ddof=1) / len(t) + c.var(ddof=1) / len(c)))
        if se > 0:
            z = diff / se
            p = float(2 * stats.norm.sf(abs(z)))
        else:
            p = 1.0
        rows.append({
            "covariate": name,
            "treat_mean": float(t.mean()),
            "control_mean": float(c.mean()),
            "diff": float(diff),
            "se": se,
            "stars": significance_stars(p),
            "p_value": p,
        })
    return rows


def compute_o2(clicks: Sequence[ClickEvent]) -> tuple[int, int, Optional[float]]:
    """(furthest rank, click count, mean click completeness or None)."""
    if not clicks:
        return (0, 0, None)
    ranks = [c.rank_clicked for c in clicks]
    # summed in sorted order so the result is exactly arrival-order invariant
    comp = sorted(c.completeness_of_result for c in clicks)
    return (max(ranks), len(clicks), float(np.mean(comp)))


def estimate_effect(
    outcomes: Sequence[float | None],
    arms: Sequence[str],
    covariates: Optional[pd.DataFrame] = None,
    standardize_outcome: bool = False,
) -> RegressionFit:
    """OLS of outcome on a treatment indicator plus optional controls.

    None outcomes (e.g. zero-click participants) are dropped listwise.
    """
    frame = pd.DataFrame({
        "outcome": [np.nan if o is None else float(o) for o in outcomes],
        "treatment": [1.0 if a == ARM_TREATMENT else 0.0 for a in arms],
    })
    controls: list[str] = []
    if covariates is not None:
        for col in covariates.columns:
            frame[col] = np.asarray(covariates[col], dtype=float)
            controls.append(col)
    if frame["treatment"].nunique() < 2:
        raise EmptyArm("need both arms represented")
    return ols_fit(
        frame.dropna(),
        outcome="outcome",
        covariates=["treatment", *controls],
        standardize=["outcome"] if standardize_outcome else [],
    )
