"""Crisis warning engine: scenarios, belief tracking and alert timing."""

import json

from ._sentinel import (
    SentinelError,
    first_passage,
    present_value,
    replay,
    shortest_hops,
    validate,
)
from ._sentinel import _Service

__all__ = [
    "SentinelError",
    "Service",
    "first_passage",
    "present_value",
    "replay",
    "shortest_hops",
    "validate",
]


class Service:
    """Session service with dict in, dict out."""

    def __init__(self, root=None):
        self._svc = _Service(None if root is None else str(root))

    def upload_scenario(self, doc):
        if not isinstance(doc, str):
            doc = json.dumps(doc)
        return json.loads(self._svc.upload(doc))

    def create_session(self, scenario_id):
        return json.loads(self._svc.create(scenario_id))

    def observe(self, session_id, observation):
        return json.loads(self._svc.observe(session_id, json.dumps(observation)))

    def belief(self, session_id):
        return json.loads(self._svc.belief(session_id))

    def projection(self, session_id, horizon=0):
        return json.loads(self._svc.projection(session_id, horizon))

    def recommendation(self, session_id):
        return json.loads(self._svc.recommendation(session_id))

    def branch(self, session_id, overrides=None):
        return json.loads(self._svc.branch(session_id, json.dumps(overrides or {})))

    def history(self, session_id):
        return json.loads(self._svc.history(session_id))
