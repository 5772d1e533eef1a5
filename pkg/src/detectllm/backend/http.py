"""Client for a remote scoring/generation server.

Wire protocol::

    POST /v1/score     {"text": str} -> {"vocab_size": int, "tokens": [{"token", "logprob", "rank", "entropy"}]}
    POST /v1/generate  {"prompt": str, "max_tokens": int, "decoding": {...}} -> {"text": str}
    POST /v1/perturb   {"text", "n", "mask_fraction", "span_length", "seed"} -> {"perturbations": [str]}
"""

from __future__ import annotations

import os

import requests

from detectllm.backend.base import Backend, DecodingConfig, TokenStats
from detectllm.errors import BackendUnavailable, UnsupportedStrategy, VocabMismatch

ENV_URL = "DETECTLLM_BACKEND_URL"


def default_url() -> str | None:
    return os.environ.get(ENV_URL)


class HttpBackend(Backend):
    def __init__(self, url: str | None = None, timeout: float = 60.0, vocab_size: int | None = None,
                 concurrent_safe: bool = True):
        super().__init__()
        url = url or default_url()
        if not url:
            raise BackendUnavailable(f"no backend URL given and ${ENV_URL} is unset")
        self.url = url.rstrip("/")
        self.timeout = timeout
        self.backend_id = f"http:{self.url}"
        self.concurrent_safe = concurrent_safe
        self._vocab_size = vocab_size
        self._http = requests.Session()

    def _post(self, route: str, body: dict) -> dict:
        try:
            resp = self._http.post(self.url + route, json=body, timeout=self.timeout)
            resp.raise_for_status()
            return resp.json()
        except (requests.RequestException, ValueError) as exc:
            raise BackendUnavailable(f"POST {route} failed: {exc}") from exc

    @property
    def vocab_size(self) -> int:
        if self._vocab_size is None:
            raise BackendUnavailable("vocab_size unknown until the first /v1/score call")
        return self._vocab_size

    def _score(self, text: str) -> list[TokenStats]:
        reply = self._post("/v1/score", {"text": text})
        try:
            vocab = int(reply["vocab_size"])
            tokens = [TokenStats.from_json(t) for t in reply["tokens"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise BackendUnavailable(f"malformed /v1/score reply: {exc}") from exc
        if self._vocab_size is None:
            self._vocab_size = vocab
        elif vocab != self._vocab_size:
            raise VocabMismatch(f"server reported vocab_size {vocab}, expected {self._vocab_size}")
        return tokens

    # Token strings are assumed to carry their own leading whitespace, so
    # concatenating them restores the text.
    def tokenize(self, text: str) -> list[str]:
        return [t.token_text for t in self._score(text)]

    def detokenize(self, tokens) -> str:
        return "".join(tokens)

    def join(self, prompt: str, continuation: str) -> str:
        if prompt[-1:].isspace() or continuation[:1].isspace() or not continuation:
            return prompt + continuation
        return prompt + " " + continuation

    def score_positions(self, text, prompt=None):
        tokens = self._score(text)
        skip = len(self._score(prompt)) if prompt else 0
        return tokens[skip:], skip + 1

    def generate(self, prompt: str, max_tokens: int, cfg: DecodingConfig) -> str:
        if cfg.greedy:
            raise UnsupportedStrategy("the HTTP protocol has no greedy decoding mode")
        decoding = {"strategy": cfg.strategy, "temperature": cfg.temperature, "seed": cfg.seed}
        if cfg.k is not None:
            decoding["k"] = cfg.k
        if cfg.p is not None:
            decoding["p"] = cfg.p
        reply = self._post("/v1/generate", {"prompt": prompt, "max_tokens": max_tokens, "decoding": decoding})
        if "error" in reply and "text" not in reply:
            raise UnsupportedStrategy(str(reply["error"]))
        return str(reply["text"])

    def perturb(self, text: str, n: int, mask_fraction: float, span_length: int, seed: int) -> list[str]:
        reply = self._post(
            "/v1/perturb",
            {"text": text, "n": n, "mask_fraction": mask_fraction, "span_length": span_length, "seed": seed},
        )
        try:
            return [str(v) for v in reply["perturbations"]]
        except (KeyError, TypeError) as exc:
            raise BackendUnavailable(f"malformed /v1/perturb reply: {exc}") from exc
