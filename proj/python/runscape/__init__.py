"""Runner-oriented round-trip routing over sensory street scores."""

import json as _json

from . import _core
from ._core import (
    BatchError,
    Error,
    FormatError,
    NoPathError,
    NoRouteError,
    NoSnapError,
    ParseError,
    ScoreStore,
    UnknownKeyError,
    ValidationError,
    ingest,
    load_store,
    store_from_bytes,
)

__all__ = [
    "BatchError", "Engine", "Error", "FormatError", "NoPathError", "NoRouteError", "NoSnapError",
    "ParseError", "ScoreStore", "Service", "UnknownKeyError", "ValidationError",
    "ingest", "load_store", "store_from_bytes",
]


class Engine:
    """Routes, score layers and coverage batches over one score store."""

    def __init__(self, store, *, cost_mode="detour_bounded", gamma=2.0, epsilon=0.01, profiles=None):
        self._e = _core.Engine(store, cost_mode=cost_mode, gamma=gamma, epsilon=epsilon,
                               profiles=None if profiles is None else str(profiles))

    def route(self, lat, lon, *, length_m=5000.0, profile="scenic", seed=0, k=8, tolerance=0.2):
        return _json.loads(self._e.route(lat, lon, length_m=length_m, profile=profile,
                                         seed=seed, k=k, tolerance=tolerance))

    def scores(self, profile="scenic", bbox=None):
        if bbox is not None and not isinstance(bbox, str):
            bbox = ",".join(repr(float(v)) for v in bbox)
        return _json.loads(self._e.scores(profile, bbox))

    def batch(self, points_csv, *, length_m=5000.0, min_count=20, smoothing=1.0, threads=0, seed=0):
        return _json.loads(self._e.batch(str(points_csv), length_m=length_m, min_count=min_count,
                                         smoothing=smoothing, threads=threads, seed=seed))


class Service:
    """The HTTP handlers without the transport. Each call returns (status, decoded body)."""

    def __init__(self, config_path):
        self._s = _core.Service.from_config(str(config_path))

    @staticmethod
    def _done(reply):
        status, body = reply
        return status, _json.loads(body)

    @staticmethod
    def _body(body):
        return body if isinstance(body, str) else _json.dumps(body)

    def post_route(self, body):
        return self._done(self._s.post_route(self._body(body)))

    def get_route(self, route_id):
        return self._done(self._s.get_route(route_id))

    def questionnaire(self, phase, form="short"):
        return self._done(self._s.questionnaire(phase, form))

    def post_ers(self, body):
        return self._done(self._s.post_ers(self._body(body)))

    def get_ers(self, ers_id):
        return self._done(self._s.get_ers(str(ers_id)))

    def list_ers(self, route_id=None):
        return self._done(self._s.list_ers(route_id))

    def importance(self):
        return self._done(self._s.importance())

    def segment_scores(self, bbox=None, profile="scenic"):
        return self._done(self._s.segment_scores(bbox, profile))
