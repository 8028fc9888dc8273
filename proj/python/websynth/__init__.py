"""Python bindings for the websynth trajectory toolkit.

Structured results come back as plain dicts and lists.
"""
import json
import os

from . import _websynth
from ._websynth import (
    ActionError,
    BackendError,
    DatastoreError,
    EmptyInput,
    EnvError,
    PayloadError,
    RaggedMatrix,
    format_dollars,
    run_average,
    token_f1,
)

__all__ = [
    "ActionError", "BackendError", "DatastoreError", "EmptyInput", "EnvError", "PayloadError", "RaggedMatrix",
    "canonicalize_action", "action_to_training", "action_from_training", "parse_agent_payload",
    "keynode_metrics", "step_metrics", "run_average", "token_f1",
    "compute_stats", "filter_training", "cost_report", "format_dollars", "sample_steps", "export_training",
    "load_manifest", "filter_seeds", "run_fixture_trajectory", "template_version",
]


def template_version():
    return _websynth.template_version()


def canonicalize_action(text):
    """Parse an action string and render it in canonical form."""
    return _websynth.canonicalize_action(text)


def action_to_training(text, action_nl=""):
    return json.loads(_websynth.action_to_training(text, action_nl))


def action_from_training(obj):
    return _websynth.action_from_training(json.dumps(obj))


def parse_agent_payload(response):
    return json.loads(_websynth.parse_agent_payload(response))


def keynode_metrics(rows, tolerance=0):
    """rows: iterable of (task_id, total, completed)."""
    return json.loads(_websynth.keynode_metrics([tuple(r) for r in rows], tolerance))


def step_metrics(rows):
    """rows: iterable of (predicted_element, gold_elements, predicted_op, gold_op)."""
    return json.loads(_websynth.step_metrics([(p, set(g), po, go) for p, g, po, go in rows]))


def compute_stats(dataset, success_only=True):
    return json.loads(_websynth.compute_stats(os.fspath(dataset), success_only))


def filter_training(dataset, max_scrolls=2):
    return _websynth.filter_training(os.fspath(dataset), max_scrolls)


def cost_report(usage, rates=None, n_total=1, n_success=0):
    """usage: {stage: {"calls":..., "prompt_tokens":..., ...}}; rates as in the CLI rates file."""
    return json.loads(_websynth.cost_report(json.dumps(usage), json.dumps(rates) if rates else "", n_total, n_success))


def sample_steps(steps_per_trajectory, strategy="trajectory-then-step", seed=0, draws=1):
    return [tuple(d) for d in _websynth.sample_steps(list(steps_per_trajectory), strategy, seed, draws)]


def export_training(dataset, ids, strategy="trajectory-then-step", seed=0, draws=0):
    return json.loads(_websynth.export_training(os.fspath(dataset), list(ids), strategy, seed, draws))


def load_manifest(record_dir):
    return json.loads(_websynth.load_manifest(os.fspath(record_dir)))


def filter_seeds(lines, blocked=(), extra_schemes=()):
    return json.loads(_websynth.filter_seeds(list(lines), list(blocked), list(extra_schemes)))


def run_fixture_trajectory(fixtures, seed_url, transcripts, config=None, store_dir=None, via_search=False):
    """Run one trajectory on fixture sites with replayed model responses.

    Returns the manifest; when store_dir is given the record is persisted there too.
    """
    return json.loads(
        _websynth.run_fixture_trajectory(
            os.fspath(fixtures),
            seed_url,
            os.fspath(transcripts),
            json.dumps(config) if config else "",
            os.fspath(store_dir) if store_dir else "",
            via_search,
        )
    )
