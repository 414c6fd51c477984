"""Simulated participants for end-to-end validation of the experiment stack.

Agents click through search results with ranks drawn from a truncated power
law; treated agents additionally take one deeper exploratory click (a
Poisson-distributed number of ranks past their deepest organic click, so the
expected furthest-rank shift equals the configured value exactly), click
results whose completeness is shifted upward, and answer the post-test with
a latent fact-resistance shift. Everything is deterministic for a fixed
seed, which lets the estimator be checked against the generating process.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidConfig
from .experiment import (
    ARM_TREATMENT,
    ClickEvent,
    Participant,
    SurveyResponse,
    TOPICS,
    assign_arm,
    load_scale,
)

# latent dimension SD and per-item noise SD used when synthesizing answers
_LATENT_SD = 0.9
_ITEM_NOISE_SD = 0.8


@dataclass(frozen=True)
class AgentBehavior:
    """Generating-process parameters for the simulated cohort."""

    rank_exponent: float = 1.5          # power-law P(rank) ~ rank^-a on 1..100
    max_rank: int = 100
    mean_clicks_per_topic: float = 2.0
    rank_shift: float = 6.14            # expected furthest-rank treatment shift
    completeness_base: float = 55.0     # 0-100 scale
    completeness_sd: float = 10.0
    completeness_shift: float = 7.6     # points added for treated clicks
    fact_resistance_shift: float = -0.212  # in SD units of the dimension score

    def __post_init__(self):
        if self.rank_exponent <= 0 or self.max_rank < 1:
            raise InvalidConfig("rank distribution parameters invalid")
        if self.mean_clicks_per_topic < 0:
            raise InvalidConfig("mean_clicks_per_topic must be >= 0")
        if self.rank_shift < 0:
            raise InvalidConfig("rank_shift must be >= 0")
        if self.completeness_sd <= 0:
            raise InvalidConfig("completeness_sd must be > 0")


@dataclass
class SimulatedCohort:
    participants: list[Participant]
    clicks: list[ClickEvent]
    surveys: list[SurveyResponse]
    behavior: AgentBehavior
    seed: int


def _rank_distribution(behavior: AgentBehavior) -> np.ndarray:
    ranks = np.arange(1, behavior.max_rank + 1, dtype=float)
    p = ranks ** -behavior.rank_exponent
    return p / p.sum()


def _dimension_latent_sd(n_items: int) -> float:
    # latent + item noise + rounding jitter, per item, averaged over the items
    per_item = _ITEM_NOISE_SD ** 2 + 1.0 / 12.0
    return float(np.sqrt(_LATENT_SD ** 2 + per_item / n_items))


def _synthesize_answers(rng, scale, latents: dict[str, float]) -> tuple[int, ...]:
    lo, hi = scale.response_range
    answers = []
    for item in scale.items:
        theta = latents.get(item.dimension, 0.0)
        effective = int(np.clip(
            round(theta + rng.normal(0.0, _ITEM_NOISE_SD)), lo, hi
        ))
        answers.append(-effective if item.reverse_coded else effective)
    return tuple(answers)


def simulate_agents(
    n: int,
    behavior: AgentBehavior = AgentBehavior(),
    seed: int = 0,
) -> SimulatedCohort:
    if n < 2:
        raise InvalidConfig("need at least two agents")
    rng = np.random.default_rng(seed)
    scale = load_scale("aot17")
    rank_p = _rank_distribution(behavior)
    ranks_support = np.arange(1, behavior.max_rank + 1)

    fr_items = sum(1 for i in scale.items if i.dimension == "fact_resistance")
    fr_shift_raw = behavior.fact_resistance_shift * _dimension_latent_sd(fr_items)

    participants: list[Participant] = []
    clicks: list[ClickEvent] = []
    surveys: list[SurveyResponse] = []

    for idx in range(n):
        pid = f"agent-{idx:04d}"
        arm = assign_arm(pid, seed)
        treated = arm == ARM_TREATMENT
        covariates = {
            "white": float(rng.random() < 0.67),
            "female": float(rng.random() < 0.46),
            "age": float(np.round(rng.normal(28.3, 9.0), 1)),
            "college": float(rng.random() < 0.45),
            "income_60k": float(rng.random() < 0.57),
            "urban": float(rng.random() < 0.83),
            "democrat": float(rng.random() < 0.56),
        }
        participant = Participant(
            id=pid, covariates=covariates, arm=arm,
            aot7_pre=float(rng.normal(0.0, 1.0)),
        )
        participants.append(participant)

        comp_mean = behavior.completeness_base + (
            behavior.completeness_shift if treated else 0.0
        )

        def draw_completeness() -> float:
            return float(np.clip(rng.normal(comp_mean,
                                            behavior.completeness_sd),
                                 0.0, 100.0))

        agent_max = 0
        agent_clicks: list[ClickEvent] = []
        for topic in TOPICS:
            n_clicks = 1 + rng.poisson(behavior.mean_clicks_per_topic)
            drawn = rng.choice(ranks_support, size=n_clicks, p=rank_p)
            for rank in drawn:
                agent_clicks.append(ClickEvent(
                    participant_id=pid,
                    topic=topic,
                    query=f"{topic.lower()} question",
                    rank_clicked=int(rank),
                    completeness_of_result=draw_completeness(),
                ))
            agent_max = max(agent_max, int(drawn.max()))
        if treated and behavior.rank_shift > 0:
            # one exploratory click Poisson(rank_shift) ranks past the deepest
            # organic one; expected furthest-rank shift is exactly rank_shift
            deep_rank = agent_max + int(rng.poisson(behavior.rank_shift))
            agent_clicks.append(ClickEvent(
                participant_id=pid,
                topic=TOPICS[int(rng.integers(len(TOPICS)))],
                query="deeper look",
                rank_clicked=max(deep_rank, 1),
                completeness_of_result=draw_completeness(),
            ))
        clicks.extend(agent_clicks)

        latents = {
            "fact_resistance": float(rng.normal(0.0, _LATENT_SD))
            + (fr_shift_raw if treated else 0.0),
            "dogmatism": float(rng.normal(0.0, _LATENT_SD)),
            "liberalism": float(rng.normal(0.0, _LATENT_SD)),
            "belief_personification": float(rng.normal(0.0, _LATENT_SD)),
        }
        surveys.append(SurveyResponse(
            participant_id=pid,
            scale_name="aot17",
            answers=_synthesize_answers(rng, scale, latents),
        ))

    return SimulatedCohort(
        participants=participants,
        clicks=clicks,
        surveys=surveys,
        behavior=behavior,
        seed=seed,
    )
