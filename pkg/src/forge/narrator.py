"""Stakeholder what-if queries: parse, match scenarios, ground, narrate.

The pipeline is pure given the bank and cluster artifacts: a query text maps
to a canonical parameter and multiplier, scenarios are matched on their
recipe multipliers, the match is grounded in a dominant cluster, and a
byte-stable prompt is built for a pluggable chat-completion client.  A
deterministic stub client keeps the whole path testable offline.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bank import ScenarioBank
from .model import PARAMETER_TENSORS
from .similarity import CorrelationMatrix, intra_cluster_mean

DEFAULT_EPS = 0.05
DEFAULT_CLUSTER_THRESHOLD = 0.5


class UnrecognizedQueryError(ValueError):
    """No linguistic pattern matched; carries the original text."""

    def __init__(self, text: str):
        super().__init__(f"no known parameter referenced in: {text!r}")
        self.text = text


class NoEvidenceError(ValueError):
    """Grounding was requested for an empty match set."""


class NarrationTransportError(RuntimeError):
    """The remote client failed after retries; carries the prompt."""

    def __init__(self, message: str, prompt: str):
        super().__init__(message)
        self.prompt = prompt


@dataclass(frozen=True)
class ParameterMap:
    """Ordered, case-insensitive text-pattern to parameter-name mapping."""

    patterns: tuple[tuple[str, str], ...]

    def __post_init__(self):
        for _, name in self.patterns:
            if name not in PARAMETER_TENSORS:
                raise KeyError(f"pattern target {name!r} is not a known parameter")

    def resolve(self, text: str) -> str | None:
        low = text.lower()
        for pattern, name in self.patterns:
            if pattern.lower() in low:
                return name
        return None


def default_parameter_map(bank: str = "fm") -> ParameterMap:
    """Built-in patterns; ambiguous words resolve per bank."""
    marg = "costMargAgri" if bank == "agri" else "costMargFMs"
    growth = "Agrigrowth" if bank == "agri" else "FMsgrowth"
    return ParameterMap((
        ("co2 price", "CO2price"),
        ("carbon price", "CO2price"),
        ("costinvagri", "costInvAgri"),
        ("investment cost", "costInvAgri"),
        ("marginal cost", marg),
        ("growth", growth),
        ("beech", "BeechArea0"),
        ("grass", "GrassArea0"),
        ("target", "ghgTargetLULUCF"),
        ("peat", "PeatExtract"),
    ))


@dataclass(frozen=True)
class ParsedQuery:
    parameter: str
    multiplier: float | None
    direction: str  # "increase" | "decrease" | "unspecified"
    raw: str


_PERCENT = re.compile(r"([+-]?\d+(?:\.\d+)?)\s*%")
_UP_WORDS = re.compile(r"\b(increas\w*|ris\w*|rais\w*|higher|grow\w*|goes up|\+)", re.I)
_DOWN_WORDS = re.compile(r"\b(decreas\w*|drop\w*|reduc\w*|lower|declin\w*|fall\w*|goes down)", re.I)


def parse_query(text: str, pmap: ParameterMap) -> ParsedQuery:
    """Resolve (parameter, multiplier, direction) from free-form text."""
    if not text.strip():
        raise UnrecognizedQueryError(text)
    parameter = pmap.resolve(text)
    if parameter is None:
        raise UnrecognizedQueryError(text)
    direction = "unspecified"
    if _DOWN_WORDS.search(text):
        direction = "decrease"
    elif _UP_WORDS.search(text):
        direction = "increase"
    multiplier = None
    m = _PERCENT.search(text)
    if m:
        pct = float(m.group(1))
        if pct < 0 or direction == "decrease":
            multiplier = 1.0 - abs(pct) / 100.0
        else:
            multiplier = 1.0 + pct / 100.0
    return ParsedQuery(parameter, multiplier, direction, text)


@dataclass(frozen=True)
class MatchResult:
    ids: tuple[str, ...]
    nearest: bool  # True when no scenario fell within eps and the closest won


def match_scenarios(q: ParsedQuery, bank: ScenarioBank,
                    eps: float = DEFAULT_EPS) -> MatchResult:
    """Scenarios whose recipe multiplier for the parameter fits the query.

    Recipes are exact ground truth, so matching compares multipliers
    directly; parameters absent from a recipe count as factor 1.0.  With no
    multiplier, the direction filters factors on the matching side of 1.0.
    Without any in-tolerance match, the nearest-factor scenarios are
    returned with ``nearest=True``.
    """
    factors = {r.scenario_id: float(r.multipliers.get(q.parameter, 1.0))
               for r in bank.recipes}
    if q.multiplier is None:
        if q.direction == "decrease":
            ids = [s for s, f in factors.items() if f < 1.0]
        elif q.direction == "increase":
            ids = [s for s, f in factors.items() if f > 1.0]
        else:
            ids = [s for s, f in factors.items() if f != 1.0]
        return MatchResult(tuple(ids), False)
    ids = [s for s, f in factors.items() if abs(f - q.multiplier) < eps]
    if ids:
        return MatchResult(tuple(ids), False)
    gaps = {s: abs(f - q.multiplier) for s, f in factors.items()}
    best = min(gaps.values())
    return MatchResult(tuple(s for s, g in gaps.items() if g == best), True)


@dataclass(frozen=True)
class GroundingBundle:
    matched_ids: tuple[str, ...]
    cluster_id: int
    cluster_size: int
    intra_rho: float
    representative_recipes: dict[str, dict[str, float]] = field(default_factory=dict)
    nearest: bool = False


def ground(match: MatchResult, labels: np.ndarray, corr: CorrelationMatrix,
           bank: ScenarioBank) -> GroundingBundle:
    """Assign the match set to its modal cluster and summarize it."""
    if not match.ids:
        raise NoEvidenceError("no matched scenarios to ground")
    labels = np.asarray(labels)
    by_id = {sid: int(labels[i]) for i, sid in enumerate(corr.ids)}
    votes: dict[int, int] = {}
    for sid in match.ids:
        votes[by_id[sid]] = votes.get(by_id[sid], 0) + 1
    top = max(votes.values())
    cluster_id = min(k for k, v in votes.items() if v == top)
    size = int((labels == cluster_id).sum())
    rho = intra_cluster_mean(corr, labels, cluster_id)
    recipes = {r.scenario_id: dict(r.multipliers)
               for r in bank.recipes if r.scenario_id in match.ids}
    return GroundingBundle(match.ids, cluster_id, size, rho, recipes, match.nearest)


def build_prompt(q: ParsedQuery, g: GroundingBundle,
                 extras: dict | None = None) -> str:
    """Deterministic prompt instantiation; byte-stable for identical inputs."""
    change = f"x{q.multiplier:g}" if q.multiplier is not None else q.direction
    lines = [
        "You are a sustainability analyst preparing a summary report for "
        "stakeholders, based on a machine learning ensemble model and SHAP "
        "analysis focused on forest management capacity (`capFMs`).",
        "",
        f"**Stakeholder Query**: {q.raw}",
        "",
        f"Matched parameter **{q.parameter}** altered by {change} "
        f"({q.direction}).",
        f"Matched scenario(s): {', '.join(g.matched_ids)}"
        + (" [nearest match]" if g.nearest else ""),
        f"Dominant cluster #{g.cluster_id} contains {g.cluster_size} scenarios "
        f"(average intra-cluster rho = {g.intra_rho:.3f}).",
        "",
        "Representative scenario recipes:",
    ]
    for sid in g.matched_ids:
        recipe = g.representative_recipes.get(sid, {})
        body = ", ".join(f"{k} x{v:g}" for k, v in recipe.items()) or "baseline"
        lines.append(f"- {sid}: {body}")
    if extras:
        metrics = extras.get("metrics", {})
        lines += [
            "",
            "**Model Performance**:",
            f"- R2 Score: {metrics.get('r2', float('nan')):.4f}",
            f"- RMSE: {metrics.get('rmse', float('nan')):.2f} hectares",
            "",
            "**Top 3 Influential Features (from SHAP analysis across ensemble models)**:",
        ]
        for i, item in enumerate(extras.get("top_features", [])[:3], start=1):
            lines.append(
                f"{i}. **{item['name']}** - SHAP = {item['mean_abs_shap']:.3f}, "
                f"Avg value = {item.get('avg_value', float('nan')):.3f}")
        lines += [
            "",
            "**Regional & Policy Highlights**:",
            f"- Region with highest capFMs potential: **{extras.get('best_region', 'n/a')}**",
            f"- Leading growth technology: **{extras.get('best_tech', 'n/a')}**",
        ]
    lines += [
        "",
        "**Task**:",
        "Craft a clear and professional report that:",
        "- Summarizes the matched scenarios and their cluster in non-technical terms",
        "- Interprets how the queried change influences capFMs outcomes",
        "- Highlights regional and technological opportunities",
        "- Recommends actions that align with long-term decarbonization goals",
        "",
        "The tone should be insight-driven, stakeholder-friendly, and suitable "
        "for regional planners, policymakers, and sustainability investors. "
        "Avoid equations or technical jargon - focus on actionable insights.",
    ]
    return "\n".join(lines)


def prompt_hash(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


class StubClient:
    """Offline client: the response is a pure function of the prompt hash."""

    client_id = "stub"

    def complete(self, prompt: str) -> str:
        digest = prompt_hash(prompt)
        seed = int(digest[:8], 16)
        rng = np.random.default_rng(seed)
        openers = (
            "The matched scenarios indicate a consistent system response.",
            "Cluster evidence suggests a moderate shift in deployment.",
            "Scenario analysis points to cost-driven reallocation.",
        )
        return (f"[stub narrative {digest[:12]}] "
                f"{openers[int(rng.integers(len(openers)))]} "
                "See the grounded prompt for the underlying scenario evidence.")


class HttpChatClient:
    """Minimal chat-completion client (model, messages, temperature 0).

    Endpoint and credentials come from the environment so configs never
    carry secrets: FORGE_LLM_ENDPOINT and FORGE_LLM_API_KEY.
    """

    client_id = "http-chat"

    def __init__(self, model: str = "default", timeout: float = 30.0,
                 max_retries: int = 2):
        self.model = model
        self.timeout = timeout
        self.max_retries = max_retries

    def complete(self, prompt: str) -> str:
        import httpx

        endpoint = os.environ.get("FORGE_LLM_ENDPOINT")
        if not endpoint:
            raise NarrationTransportError("FORGE_LLM_ENDPOINT is not set", prompt)
        headers = {}
        key = os.environ.get("FORGE_LLM_API_KEY")
        if key:
            headers["Authorization"] = f"Bearer {key}"
        payload = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": 0,
        }
        last: Exception | None = None
        for _ in range(self.max_retries + 1):
            try:
                resp = httpx.post(endpoint, json=payload, headers=headers,
                                  timeout=self.timeout)
                resp.raise_for_status()
                return resp.json()["choices"][0]["message"]["content"]
            except Exception as exc:  # noqa: BLE001 - typed re-raise below
                last = exc
        raise NarrationTransportError(f"chat completion failed: {last}", prompt)


@dataclass(frozen=True)
class Provenance:
    prompt_hash: str
    client_id: str
    matched_ids: tuple[str, ...]
    cluster_id: int


@dataclass(frozen=True)
class Narrative:
    text: str
    provenance: Provenance


def narrate(prompt: str, client, grounding: GroundingBundle) -> Narrative:
    text = client.complete(prompt)
    return Narrative(text, Provenance(prompt_hash(prompt), client.client_id,
                                      grounding.matched_ids, grounding.cluster_id))


@dataclass(frozen=True)
class NarratorConfig:
    """JSON-loadable settings: map extensions, tolerances, client wiring."""

    eps: float = DEFAULT_EPS
    cluster_threshold: float = DEFAULT_CLUSTER_THRESHOLD
    extra_patterns: tuple[tuple[str, str], ...] = ()
    client: str = "stub"  # "stub" | "http"
    model: str = "default"

    @staticmethod
    def from_file(path: str | Path) -> "NarratorConfig":
        doc = json.loads(Path(path).read_text())
        return NarratorConfig(
            eps=float(doc.get("eps", DEFAULT_EPS)),
            cluster_threshold=float(doc.get("cluster_threshold",
                                            DEFAULT_CLUSTER_THRESHOLD)),
            extra_patterns=tuple((p, n) for p, n in doc.get("extra_patterns", [])),
            client=doc.get("client", "stub"),
            model=doc.get("model", "default"),
        )

    def parameter_map(self, bank: str) -> ParameterMap:
        base = default_parameter_map(bank)
        return ParameterMap(self.extra_patterns + base.patterns)

    def make_client(self):
        if self.client == "stub":
            return StubClient()
        if self.client == "http":
            return HttpChatClient(model=self.model)
        raise ValueError(f"unknown client kind {self.client!r}")


def answer_query(text: str, bank: ScenarioBank, labels: np.ndarray,
                 corr: CorrelationMatrix, config: NarratorConfig = NarratorConfig(),
                 extras: dict | None = None, client=None) -> dict:
    """Run the full parse -> match -> ground -> prompt -> narrate pipeline."""
    pmap = config.parameter_map(bank.bank)
    q = parse_query(text, pmap)
    match = match_scenarios(q, bank, eps=config.eps)
    bundle = ground(match, labels, corr, bank)
    prompt = build_prompt(q, bundle, extras)
    narrative = narrate(prompt, client if client is not None else config.make_client(),
                        bundle)
    return {
        "query": q,
        "match": match,
        "grounding": bundle,
        "prompt": prompt,
        "narrative": narrative,
    }
