from __future__ import annotations

import json

import httpx
import pytest

from toolplan.llm import (
    ChatMessage,
    CompletionRequest,
    CredentialMissing,
    LiveBackend,
    ReplayBackend,
    ReplayMiss,
    StubBackend,
    Transcript,
    TranscriptEntry,
    TranscriptError,
    TransportFailure,
    load_transcript,
    save_transcript,
)


def req(text: str = "hello", **kw) -> CompletionRequest:
    return CompletionRequest((ChatMessage("system", "sys"), ChatMessage("user", text)), **kw)


def ticking():
    t = [0.0]

    def clock():
        t[0] += 1.0
        return t[0]
    return clock


def test_request_validation():
    with pytest.raises(ValueError):
        CompletionRequest(())
    with pytest.raises(ValueError):
        req(temperature=3.0)
    with pytest.raises(ValueError):
        req(max_tokens=0)
    with pytest.raises(ValueError):
        ChatMessage("tool", "x")
    with pytest.raises(ValueError):
        ChatMessage("user", "")
    assert ChatMessage("assistant", "").content == ""


def test_prompt_hash_depends_only_on_messages():
    assert req("a").prompt_hash() == req("a", temperature=0.5).prompt_hash()
    assert req("a").prompt_hash() != req("b").prompt_hash()
    assert CompletionRequest.from_dict(req("a").to_dict()) == req("a")


def test_transcript_round_trip(tmp_path):
    tr = Transcript()
    stub = StubBackend({"planner": ["one", "two"]}, clock=ticking())
    stub.complete(req(), "planner", tr)
    stub.complete(req("again"), "planner", tr)
    save_transcript(tr, tmp_path / "t.json")
    back = load_transcript(tmp_path / "t.json")
    assert back == tr
    assert back.stages() == ["planner", "planner"]
    assert [e.timestamp for e in back.entries] == [1.0, 2.0]


def test_transcript_rejects_time_travel():
    tr = Transcript()
    tr.append(TranscriptEntry("a", None, "x", 5.0))
    with pytest.raises(ValueError):
        tr.append(TranscriptEntry("b", None, "y", 4.0))


def test_backend_keeps_timestamps_monotone_with_a_backwards_clock():
    times = iter([10.0, 3.0])
    stub = StubBackend({"*": "ok"}, clock=lambda: next(times))
    tr = Transcript()
    stub.complete(req(), "a", tr)
    stub.complete(req(), "b", tr)
    assert [e.timestamp for e in tr.entries] == [10.0, 10.0]


@pytest.mark.parametrize("payload, fragment", [
    ("[]", "expected an object"),
    ('{"version": 7, "entries": []}', "version"),
    ('{"version": 1, "entries": [{"response": "x"}]}', "malformed transcript entry"),
    ("{not json", "malformed transcript file"),
])
def test_malformed_transcripts(tmp_path, payload, fragment):
    p = tmp_path / "t.json"
    p.write_text(payload)
    with pytest.raises(TranscriptError, match=fragment):
        load_transcript(p)


def _recorded() -> Transcript:
    tr = Transcript()
    rec = StubBackend({"analyzer": ["A1"], "planner": ["P1", "P2"]}, clock=ticking())
    rec.complete(req("a"), "analyzer", tr)
    rec.complete(req("p1"), "planner", tr)
    rec.complete(req("p2"), "planner", tr)
    return tr


def test_replay_matches_stage_and_ordinal():
    replay = ReplayBackend(_recorded())
    assert replay.complete(req("anything"), "planner") == "P1"
    assert replay.complete(req("a"), "analyzer") == "A1"
    assert replay.complete(req("x"), "planner") == "P2"
    with pytest.raises(ReplayMiss, match="#3"):
        replay.complete(req("x"), "planner")
    with pytest.raises(ReplayMiss):
        replay.complete(req("x"), "coder")


def test_strict_replay_checks_the_prompt_hash():
    strict = ReplayBackend(_recorded(), strict=True)
    assert strict.complete(req("a"), "analyzer") == "A1"
    with pytest.raises(ReplayMiss, match="hash"):
        strict.complete(req("not p1"), "planner")


def test_replay_records_into_a_new_transcript():
    replay = ReplayBackend(_recorded(), clock=ticking())
    tr = Transcript()
    replay.complete(req("a"), "analyzer", tr)
    assert tr.entries[0].response == "A1"
    assert tr.entries[0].prompt_hash == req("a").prompt_hash()


def test_stub_forms():
    stub = StubBackend({"a": "fixed", "b": ["x"], "c": lambda r, s: s.upper()})
    assert stub.complete(req(), "a") == stub.complete(req(), "a") == "fixed"
    assert stub.complete(req(), "b") == "x"
    with pytest.raises(ReplayMiss, match="exhausted"):
        stub.complete(req(), "b")
    assert stub.complete(req(), "c") == "C"
    with pytest.raises(ReplayMiss):
        stub.complete(req(), "d")


# ---------------------------------------------------------------- live client

def _client(handler) -> httpx.Client:
    return httpx.Client(transport=httpx.MockTransport(handler))


def _ok(text: str = "hi", tokens: int = 12) -> httpx.Response:
    return httpx.Response(200, json={"choices": [{"message": {"content": text}}], "usage": {"total_tokens": tokens}})


def test_live_requires_credential_in_environment(monkeypatch):
    monkeypatch.delenv("TOOLPLAN_TEST_KEY", raising=False)
    with pytest.raises(CredentialMissing, match="TOOLPLAN_TEST_KEY"):
        LiveBackend("http://x/v1/chat/completions", credential_env="TOOLPLAN_TEST_KEY")


def test_live_request_shape(monkeypatch):
    monkeypatch.setenv("TOOLPLAN_TEST_KEY", "sk-test")
    seen = {}

    def handler(request: httpx.Request):
        seen["auth"] = request.headers["authorization"]
        seen["body"] = json.loads(request.content)
        return _ok("answer", 7)

    be = LiveBackend("http://x/v1/chat/completions", credential_env="TOOLPLAN_TEST_KEY", client=_client(handler))
    tr = Transcript()
    assert be.complete(req("q", model_id="m1", temperature=0.2, max_tokens=64), "coder", tr) == "answer"
    assert seen["auth"] == "Bearer sk-test"
    assert seen["body"]["model"] == "m1"
    assert seen["body"]["temperature"] == 0.2 and seen["body"]["max_tokens"] == 64
    assert seen["body"]["messages"][-1] == {"role": "user", "content": "q"}
    assert tr.tokens == 7
    assert "sk-test" not in json.dumps(tr.to_dict())


def test_live_retries_then_succeeds(monkeypatch):
    monkeypatch.setenv("TOOLPLAN_TEST_KEY", "k")
    calls, sleeps = [], []

    def handler(request):
        calls.append(1)
        if len(calls) == 1:
            raise httpx.ConnectError("refused")
        if len(calls) == 2:
            return httpx.Response(429)
        return _ok()

    be = LiveBackend("http://x", credential_env="TOOLPLAN_TEST_KEY", client=_client(handler),
                     sleep=sleeps.append, backoff=0.5)
    assert be.complete(req()) == "hi"
    assert sleeps == [0.5, 1.0]


def test_live_gives_up_after_bounded_retries(monkeypatch):
    monkeypatch.setenv("TOOLPLAN_TEST_KEY", "k")
    be = LiveBackend("http://x", credential_env="TOOLPLAN_TEST_KEY", max_retries=2,
                     client=_client(lambda r: httpx.Response(503)), sleep=lambda s: None)
    with pytest.raises(TransportFailure, match="3 attempts"):
        be.complete(req())


@pytest.mark.parametrize("response, fragment", [
    (httpx.Response(401, text="bad key"), "401"),
    (httpx.Response(200, json={"choices": []}), "unexpected response"),
    (httpx.Response(200, text="not json"), "unexpected response"),
])
def test_live_does_not_retry_client_errors(monkeypatch, response, fragment):
    monkeypatch.setenv("TOOLPLAN_TEST_KEY", "k")
    calls = []

    def handler(request):
        calls.append(1)
        return response

    be = LiveBackend("http://x", credential_env="TOOLPLAN_TEST_KEY", client=_client(handler), sleep=lambda s: None)
    with pytest.raises(TransportFailure, match=fragment):
        be.complete(req())
    assert len(calls) == 1
