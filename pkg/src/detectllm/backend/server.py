"""Reference HTTP server exposing a ToyModel over the backend wire protocol.

Useful for exercising :class:`~detectllm.backend.http.HttpBackend` end to end
without a real LLM. Token strings in ``/v1/score`` replies carry their leading
whitespace so that concatenating them restores the input text.
"""

from __future__ import annotations

import json
import logging
import re
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from detectllm.backend.base import DecodingConfig
from detectllm.backend.toy import ToyModel
from detectllm.errors import DetectLLMError

log = logging.getLogger(__name__)

_PIECE = re.compile(r"\s*(?:\w+(?:'\w+)*|[^\w\s])")


def pieces(text: str) -> list[str]:
    return _PIECE.findall(text)


def make_handler(model: ToyModel):
    from detectllm.perturber import PerturbationConfig, perturb

    def score(body):
        text = body["text"]
        stats, _ = model.score_positions(text)
        return {
            "vocab_size": model.vocab_size,
            "tokens": [dict(t.to_json(), token=p) for t, p in zip(stats, pieces(text))],
        }

    def gen(body):
        dec = body.get("decoding") or {}
        cfg = DecodingConfig(
            strategy=dec.get("strategy", "temperature"),
            temperature=float(dec.get("temperature", 1.0)),
            k=dec.get("k") if dec.get("strategy") == "top_k" else None,
            p=dec.get("p") if dec.get("strategy") == "top_p" else None,
            seed=int(dec.get("seed", 0)),
        )
        prompt = body["prompt"]
        cont = model.generate(prompt, int(body["max_tokens"]), cfg)
        full = model.join(prompt, cont)
        return {"text": full[len(prompt):] if full.startswith(prompt) else " " + cont}

    def pert(body):
        cfg = PerturbationConfig(
            n=int(body["n"]),
            mask_fraction=float(body.get("mask_fraction", 0.15)),
            span_length=int(body.get("span_length", 2)),
            seed=int(body.get("seed", 0)),
        )
        return {"perturbations": list(perturb(body["text"], cfg).variants)}

    routes = {"/v1/score": score, "/v1/generate": gen, "/v1/perturb": pert}

    class Handler(BaseHTTPRequestHandler):
        def do_POST(self):
            route = routes.get(self.path)
            if route is None:
                return self._reply(404, {"error": f"no route {self.path}"})
            try:
                length = int(self.headers.get("Content-Length", 0))
                body = json.loads(self.rfile.read(length) or b"{}")
                return self._reply(200, route(body))
            except (KeyError, TypeError, ValueError, DetectLLMError) as exc:
                return self._reply(400, {"error": str(exc)})

        def _reply(self, status, obj):
            data = json.dumps(obj).encode()
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)

        def log_message(self, fmt, *args):
            log.debug(fmt, *args)

    return Handler


def make_server(model: ToyModel, host: str = "127.0.0.1", port: int = 0) -> ThreadingHTTPServer:
    return ThreadingHTTPServer((host, port), make_handler(model))


def serve(model: ToyModel, host: str = "127.0.0.1", port: int = 0) -> ThreadingHTTPServer:
    """Start serving in a daemon thread; ``server.server_address`` has the port."""
    server = make_server(model, host, port)
    threading.Thread(target=server.serve_forever, daemon=True).start()
    return server
