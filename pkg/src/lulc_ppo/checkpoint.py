"""Versioned checkpoint files.

Layout: a single JSON document holding an architecture descriptor, every
weight and optimizer array as base64-encoded little-endian float64 bytes,
the RNG stream states, the training step count, and a sha256 over the
canonical serialization of everything else. Loading verifies the digest
and the architecture before touching any array.
"""

from __future__ import annotations

import base64
import binascii
import hashlib
import json
from pathlib import Path

import numpy as np

from .errors import CheckpointError
from .neural import POLICY_LAYERS, VALUE_LAYERS, AdamState, MlpParams
from .persistence import atomic_write_text

FORMAT_NAME = "lulc-ppo-checkpoint"
FORMAT_VERSION = 1

REQUIRED_FIELDS = (
    "format",
    "version",
    "architecture",
    "train_step",
    "rng",
    "policy",
    "value",
    "adam_policy",
    "adam_value",
    "sha256",
)


def _encode_array(arr: np.ndarray) -> dict:
    arr = np.ascontiguousarray(arr, dtype="<f8")
    return {"shape": list(arr.shape), "data": base64.b64encode(arr.tobytes()).decode("ascii")}


def _decode_array(obj, field: str) -> np.ndarray:
    try:
        shape = tuple(int(s) for s in obj["shape"])
        raw = base64.b64decode(obj["data"], validate=True)
        arr = np.frombuffer(raw, dtype="<f8").astype(np.float64).reshape(shape)
    except (KeyError, TypeError, ValueError, binascii.Error) as exc:
        raise CheckpointError(f"checkpoint field {field!r} is corrupt: {exc}") from None
    return arr


def _encode_params(params: MlpParams) -> dict:
    return {
        "weights": [_encode_array(w) for w in params.weights],
        "biases": [_encode_array(b) for b in params.biases],
    }


def _decode_params(obj, field: str) -> MlpParams:
    weights = [_decode_array(w, f"{field}.weights[{i}]") for i, w in enumerate(obj["weights"])]
    biases = [_decode_array(b, f"{field}.biases[{i}]") for i, b in enumerate(obj["biases"])]
    return MlpParams(weights, biases)


def _encode_adam(state: AdamState) -> dict:
    return {
        "t": state.t,
        "lr": state.lr,
        "beta1": state.beta1,
        "beta2": state.beta2,
        "eps": state.eps,
        "m": _encode_params(state.m),
        "v": _encode_params(state.v),
    }


def _decode_adam(obj, field: str) -> AdamState:
    return AdamState(
        m=_decode_params(obj["m"], f"{field}.m"),
        v=_decode_params(obj["v"], f"{field}.v"),
        t=int(obj["t"]),
        lr=float(obj["lr"]),
        beta1=float(obj["beta1"]),
        beta2=float(obj["beta2"]),
        eps=float(obj["eps"]),
    )


def _payload_digest(doc: dict) -> str:
    payload = {k: v for k, v in doc.items() if k != "sha256"}
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def save_checkpoint(
    path,
    *,
    policy: MlpParams,
    value: MlpParams,
    adam_policy: AdamState,
    adam_value: AdamState,
    train_step: int,
    rng_states: dict,
) -> None:
    doc = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "architecture": {
            "policy": list(policy.layer_sizes),
            "value": list(value.layer_sizes),
            "hidden_activation": "tanh",
        },
        "train_step": int(train_step),
        "rng": rng_states,
        "policy": _encode_params(policy),
        "value": _encode_params(value),
        "adam_policy": _encode_adam(adam_policy),
        "adam_value": _encode_adam(adam_value),
    }
    doc["sha256"] = _payload_digest(doc)
    atomic_write_text(path, json.dumps(doc, sort_keys=True, indent=1) + "\n")


def load_checkpoint(path, *, expect_default_architecture: bool = True) -> dict:
    """Load and verify a checkpoint; returns a dict with live objects.

    Raises CheckpointError naming the failed integrity field.
    """
    path = Path(path)
    if not path.exists():
        raise CheckpointError(f"checkpoint file not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except (ValueError, UnicodeDecodeError) as exc:
        raise CheckpointError(f"checkpoint is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise CheckpointError("checkpoint root must be a JSON object")
    for field in REQUIRED_FIELDS:
        if field not in doc:
            raise CheckpointError(f"checkpoint missing field {field!r}")
    if doc["format"] != FORMAT_NAME:
        raise CheckpointError(f"integrity check failed on field 'format': got {doc['format']!r}")
    if doc["version"] != FORMAT_VERSION:
        raise CheckpointError(f"integrity check failed on field 'version': got {doc['version']!r}")
    if _payload_digest(doc) != doc["sha256"]:
        raise CheckpointError("integrity check failed on field 'sha256': digest does not match payload")

    arch = doc["architecture"]
    policy = _decode_params(doc["policy"], "policy")
    value = _decode_params(doc["value"], "value")
    if list(policy.layer_sizes) != list(arch.get("policy", [])) or list(value.layer_sizes) != list(
        arch.get("value", [])
    ):
        raise CheckpointError("integrity check failed on field 'architecture': descriptor does not match arrays")
    if expect_default_architecture and (
        tuple(policy.layer_sizes) != POLICY_LAYERS or tuple(value.layer_sizes) != VALUE_LAYERS
    ):
        raise CheckpointError(
            f"architecture mismatch: checkpoint has policy {arch.get('policy')} / value {arch.get('value')}, "
            f"expected {list(POLICY_LAYERS)} / {list(VALUE_LAYERS)}"
        )

    return {
        "policy": policy,
        "value": value,
        "adam_policy": _decode_adam(doc["adam_policy"], "adam_policy"),
        "adam_value": _decode_adam(doc["adam_value"], "adam_value"),
        "train_step": int(doc["train_step"]),
        "rng": doc["rng"],
    }
