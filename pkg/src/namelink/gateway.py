"""Yes/No token-scoring backends and probability calibration.

A backend takes rendered prompts and returns unnormalized log-scores for the
answer tokens "Yes" and "No". Only the difference of the two scores matters.

Wire protocol of :class:`RemoteBackend` (HTTP POST, JSON)::

    request   {"prompt": str, "answer_tokens": ["Yes", "No"]}
    response  {"scores": [yes, no], "model_id": str}

    batch request   {"prompts": [str, ...], "answer_tokens": ["Yes", "No"]}
    batch response  {"scores": [[yes, no], ...], "model_id": str}
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Protocol, Sequence

import httpx

from .curriculum.prompts import PromptTemplate, default_template
from .errors import BackendUnavailable, NonFiniteScore, ProtocolError, ScorerTimeout
from .matchers import DEFAULT_CONSTANTS, MatcherConstants, structure_aware_score
from .parser import NameLexicon, default_lexicon

__all__ = [
    "ANSWER_TOKENS",
    "TokenScores",
    "MatchDecision",
    "Backend",
    "MockBackend",
    "RemoteBackend",
    "match_probability",
    "logit",
    "score_pair",
    "score_pairs",
    "decide",
    "mock_backend",
]

ANSWER_TOKENS = ("Yes", "No")
# exponent clamp for the two-way softmax
MAX_LOGIT_GAP = 700.0
# keeps probabilities inside the open interval (0, 1)
PROB_EPS = 2.0**-52
MOCK_EPS = 1e-6


@dataclass(frozen=True)
class TokenScores:
    score_yes: float
    score_no: float


@dataclass(frozen=True)
class MatchDecision:
    probability: float
    threshold: float
    verdict: bool
    backend_id: str

    @property
    def answer(self) -> str:
        return "yes" if self.verdict else "no"


def match_probability(s: TokenScores) -> float:
    """Softmax over the Yes/No pair: ``1 / (1 + exp(no - yes))``."""
    if not (math.isfinite(s.score_yes) and math.isfinite(s.score_no)):
        raise NonFiniteScore(f"non-finite token scores {s!r}")
    gap = min(max(s.score_no - s.score_yes, -MAX_LOGIT_GAP), MAX_LOGIT_GAP)
    p = 1.0 / (1.0 + math.exp(gap))
    return min(max(p, PROB_EPS), 1.0 - PROB_EPS)


def logit(p: float) -> float:
    return math.log(p) - math.log1p(-p)


class Backend(Protocol):
    backend_id: str

    def score_prompts(self, prompts: Sequence[str]) -> list[TokenScores]: ...


class MockBackend:
    """Deterministic stand-in for a fine-tuned model.

    Reads the name pair back out of the prompt's final line and reports
    ``log p`` / ``log(1 - p)`` for the structure-aware score ``p``.
    """

    def __init__(
        self,
        lexicon: Optional[NameLexicon] = None,
        constants: MatcherConstants = DEFAULT_CONSTANTS,
        template: Optional[PromptTemplate] = None,
        eps: float = MOCK_EPS,
    ):
        self.lexicon = lexicon or default_lexicon()
        self.constants = constants
        self.template = template or default_template()
        self.eps = eps
        self.backend_id = "mock-structure-v1"

    def scores_for_similarity(self, similarity: float) -> TokenScores:
        p = min(max(similarity, self.eps), 1.0 - self.eps)
        return TokenScores(math.log(p), math.log1p(-p))

    def score_prompt(self, prompt: str) -> TokenScores:
        a, b = self.template.extract_pair(prompt)
        sim = structure_aware_score(a, b, self.lexicon, self.constants)
        return self.scores_for_similarity(sim)

    def score_prompts(self, prompts: Sequence[str]) -> list[TokenScores]:
        return [self.score_prompt(p) for p in prompts]


def mock_backend(lexicon=None, constants: MatcherConstants = DEFAULT_CONSTANTS, template=None) -> MockBackend:
    return MockBackend(lexicon, constants, template)


@dataclass
class RemoteBackend:
    """HTTP client for any server speaking the JSON protocol above."""

    url: str
    timeout_ms: int = 2000
    max_retries: int = 2
    batch_size: int = 32
    max_in_flight: int = 4
    backoff_s: float = 0.05
    client: Optional[httpx.Client] = None
    backend_id: str = field(default="", init=False)

    def __post_init__(self):
        self.backend_id = f"remote:{self.url}"
        if self.client is None:
            self.client = httpx.Client(timeout=self.timeout_ms / 1000.0)

    def _post(self, body: dict) -> dict:
        last_exc: Exception | None = None
        for attempt in range(self.max_retries + 1):
            try:
                resp = self.client.post(self.url, json=body, timeout=self.timeout_ms / 1000.0)
            except httpx.TimeoutException as exc:
                last_exc = ScorerTimeout(f"scoring request timed out after {self.timeout_ms} ms")
                last_exc.__cause__ = exc
            except httpx.TransportError as exc:
                last_exc = BackendUnavailable(f"cannot reach scorer at {self.url}: {exc}")
            else:
                if resp.status_code >= 500:
                    last_exc = BackendUnavailable(f"scorer returned HTTP {resp.status_code}")
                elif resp.status_code >= 400:
                    raise ProtocolError(f"scorer rejected request: HTTP {resp.status_code}")
                else:
                    try:
                        return resp.json()
                    except ValueError as exc:
                        raise ProtocolError("scorer response is not JSON") from exc
            if attempt < self.max_retries:
                time.sleep(self.backoff_s * (2**attempt))
        raise last_exc

    @staticmethod
    def _pair(raw) -> TokenScores:
        if not isinstance(raw, (list, tuple)) or len(raw) != 2:
            raise ProtocolError(f"expected [yes, no] scores, got {raw!r}")
        try:
            yes, no = float(raw[0]), float(raw[1])
        except (TypeError, ValueError) as exc:
            raise ProtocolError(f"scores are not numbers: {raw!r}") from exc
        return TokenScores(yes, no)

    def _note_model(self, body: dict) -> None:
        model_id = body.get("model_id")
        if not isinstance(model_id, str):
            raise ProtocolError("response is missing model_id")
        self.backend_id = f"remote:{model_id}"

    def score_prompt(self, prompt: str) -> TokenScores:
        body = self._post({"prompt": prompt, "answer_tokens": list(ANSWER_TOKENS)})
        if not isinstance(body, dict) or "scores" not in body:
            raise ProtocolError("response is missing scores")
        self._note_model(body)
        return self._pair(body["scores"])

    def _score_batch(self, prompts: Sequence[str]) -> list[TokenScores]:
        body = self._post({"prompts": list(prompts), "answer_tokens": list(ANSWER_TOKENS)})
        if not isinstance(body, dict) or not isinstance(body.get("scores"), list):
            raise ProtocolError("response is missing scores")
        if len(body["scores"]) != len(prompts):
            raise ProtocolError(f"asked for {len(prompts)} scores, got {len(body['scores'])}")
        self._note_model(body)
        return [self._pair(s) for s in body["scores"]]

    def score_prompts(self, prompts: Sequence[str]) -> list[TokenScores]:
        chunks = [prompts[i:i + self.batch_size] for i in range(0, len(prompts), self.batch_size)]
        if len(chunks) <= 1 or self.max_in_flight <= 1:
            return [s for chunk in chunks for s in self._score_batch(chunk)]
        with ThreadPoolExecutor(self.max_in_flight) as pool:
            results = list(pool.map(self._score_batch, chunks))
        return [s for chunk in results for s in chunk]


def score_pair(backend: Backend, name1: str, name2: str, template: Optional[PromptTemplate] = None) -> TokenScores:
    template = template or default_template()
    return backend.score_prompts([template.render(name1, name2)])[0]


def score_pairs(
    backend: Backend, pairs: Sequence[tuple[str, str]], template: Optional[PromptTemplate] = None
) -> list[TokenScores]:
    template = template or default_template()
    return backend.score_prompts([template.render(a, b) for a, b in pairs])


def decide(scores: TokenScores, threshold: float, backend_id: str) -> MatchDecision:
    """The single decision rule shared by the service and the evaluator."""
    if not 0.0 <= threshold <= 1.0:
        raise ValueError("threshold must lie in [0, 1]")
    p = match_probability(scores)
    return MatchDecision(p, threshold, p >= threshold, backend_id)
