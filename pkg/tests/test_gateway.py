from __future__ import annotations

import json
import math

import httpx
import pytest
from fastapi.testclient import TestClient
from hypothesis import given, strategies as st

from namelink.curriculum import default_template
from namelink.errors import BackendUnavailable, NonFiniteScore, ProtocolError, ScorerTimeout
from namelink.gateway import (
    PROB_EPS,
    MockBackend,
    RemoteBackend,
    TokenScores,
    decide,
    logit,
    match_probability,
    score_pair,
    score_pairs,
)
from namelink.pipeline import default_calibration
from namelink.service import create_scorer_app


def test_softmax_examples():
    assert match_probability(TokenScores(0.0, 0.0)) == 0.5
    assert match_probability(TokenScores(math.log(3), 0.0)) == pytest.approx(0.75, abs=1e-15)
    assert match_probability(TokenScores(1000.0, 0.0)) == 1.0 - PROB_EPS
    assert match_probability(TokenScores(0.0, 1000.0)) == PROB_EPS
    for bad in (math.nan, math.inf, -math.inf):
        with pytest.raises(NonFiniteScore):
            match_probability(TokenScores(bad, 0.0))


finite = st.floats(-1e6, 1e6, allow_nan=False)


@given(finite, finite, st.floats(-1e3, 1e3))
def test_shift_invariance(yes, no, shift):
    assert abs(match_probability(TokenScores(yes + shift, no + shift)) - match_probability(TokenScores(yes, no))) <= 1e-9


@given(finite, finite, st.floats(0, 50))
def test_monotone_in_yes(yes, no, bump):
    assert match_probability(TokenScores(yes + bump, no)) >= match_probability(TokenScores(yes, no))


@given(st.floats(1e-6, 1 - 1e-6))
def test_logit_round_trip(p):
    assert match_probability(TokenScores(logit(p), 0.0)) == pytest.approx(p, abs=1e-9)


def test_mock_scores():
    mock = MockBackend()
    assert match_probability(mock.scores_for_similarity(0.5)) == 0.5
    assert match_probability(mock.scores_for_similarity(0.9)) == pytest.approx(0.9, abs=1e-9)
    s = mock.scores_for_similarity(0.0)
    assert math.isfinite(s.score_yes) and math.isfinite(s.score_no)
    same = score_pair(mock, "Kirtan Singh", "kirtan singh")
    assert match_probability(same) > 0.99


def test_mock_vipin_bipin_below_threshold():
    threshold = default_calibration().threshold
    d = decide(score_pair(MockBackend(), "Vipin", "Bipin"), threshold, "mock")
    assert d.verdict is False and d.answer == "no"


def test_decide_validates_threshold():
    with pytest.raises(ValueError):
        decide(TokenScores(0, 0), 1.5, "x")
    assert decide(TokenScores(0, 0), 0.5, "x").verdict is True


def test_score_pairs_order():
    mock = MockBackend()
    pairs = [("ravi", "ravi"), ("ravi", "amit"), ("subham", "shubham")]
    got = [match_probability(s) for s in score_pairs(mock, pairs)]
    assert got == [match_probability(score_pair(mock, a, b)) for a, b in pairs]


# -- remote backend ----------------------------------------------------------------


def _transport(handler):
    return httpx.Client(transport=httpx.MockTransport(handler))


def test_remote_fixed_scores():
    def handler(request):
        body = json.loads(request.content)
        assert body["answer_tokens"] == ["Yes", "No"]
        return httpx.Response(200, json={"scores": [[2.0, -1.0]] * len(body["prompts"]), "model_id": "stub"})

    backend = RemoteBackend("http://scorer/v1/score", client=_transport(handler))
    p = match_probability(score_pair(backend, "a", "b"))
    assert p == pytest.approx(1 / (1 + math.exp(-3)), abs=1e-12)
    assert round(p, 4) == 0.9526
    assert backend.backend_id == "remote:stub"


def test_remote_single_prompt():
    def handler(request):
        assert "prompt" in json.loads(request.content)
        return httpx.Response(200, json={"scores": [0.0, 0.0], "model_id": "stub"})

    backend = RemoteBackend("http://scorer/v1/score", client=_transport(handler))
    assert backend.score_prompt("x") == TokenScores(0.0, 0.0)


def test_remote_retries_then_succeeds():
    calls = []

    def handler(request):
        calls.append(1)
        if len(calls) < 3:
            return httpx.Response(503)
        return httpx.Response(200, json={"scores": [[1.0, 0.0]], "model_id": "stub"})

    backend = RemoteBackend("http://s", max_retries=2, backoff_s=0, client=_transport(handler))
    assert backend.score_prompts(["p"]) == [TokenScores(1.0, 0.0)]
    assert len(calls) == 3


def test_remote_gives_up():
    backend = RemoteBackend("http://s", max_retries=1, backoff_s=0,
                            client=_transport(lambda r: httpx.Response(500)))
    with pytest.raises(BackendUnavailable):
        backend.score_prompts(["p"])


def test_remote_timeout():
    def handler(request):
        raise httpx.ReadTimeout("slow", request=request)

    backend = RemoteBackend("http://s", max_retries=1, backoff_s=0, client=_transport(handler))
    with pytest.raises(ScorerTimeout):
        backend.score_prompts(["p"])


def test_remote_unreachable():
    def handler(request):
        raise httpx.ConnectError("refused", request=request)

    backend = RemoteBackend("http://s", max_retries=0, client=_transport(handler))
    with pytest.raises(BackendUnavailable):
        backend.score_prompts(["p"])


@pytest.mark.parametrize(
    "response",
    [
        httpx.Response(400),
        httpx.Response(200, content=b"not json"),
        httpx.Response(200, json={"model_id": "x"}),
        httpx.Response(200, json={"scores": [[1.0]], "model_id": "x"}),
        httpx.Response(200, json={"scores": [["a", "b"]], "model_id": "x"}),
        httpx.Response(200, json={"scores": [[1.0, 0.0], [1.0, 0.0]], "model_id": "x"}),
        httpx.Response(200, json={"scores": [[1.0, 0.0]]}),
    ],
)
def test_remote_protocol_errors(response):
    backend = RemoteBackend("http://s", max_retries=0, client=_transport(lambda r: response))
    with pytest.raises(ProtocolError):
        backend.score_prompts(["p"])


def test_remote_batches_preserve_order():
    def handler(request):
        prompts = json.loads(request.content)["prompts"]
        return httpx.Response(200, json={"scores": [[float(p), 0.0] for p in prompts], "model_id": "s"})

    backend = RemoteBackend("http://s", batch_size=3, max_in_flight=4, client=_transport(handler))
    out = backend.score_prompts([str(i) for i in range(20)])
    assert [s.score_yes for s in out] == [float(i) for i in range(20)]


def test_remote_against_scorer_app_equals_mock():
    mock = MockBackend()
    client = TestClient(create_scorer_app(mock))
    remote = RemoteBackend("http://testserver/v1/score", batch_size=4, max_in_flight=1, client=client)
    pairs = [("Kirtan Singh", "SinghKirtan"), ("Vipin", "Bipin"), ("Rajeshk", "Rajesh Kumar"),
             ("ravi", "amit"), ("Subham", "Shubham")]
    assert score_pairs(remote, pairs) == score_pairs(mock, pairs)
    assert remote.backend_id == f"remote:{mock.backend_id}"
    single = client.post("/v1/score", json={"prompt": default_template().render("a", "a")})
    assert single.status_code == 200 and len(single.json()["scores"]) == 2
    assert client.post("/v1/score", json={"prompts": [1]}).status_code == 400
