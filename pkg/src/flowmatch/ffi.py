"""Flat-buffer boundary for foreign callers, in process and over a pipe.

Other runtimes cannot hand us dataclasses, so this module accepts matrices as
flat row-major float64 buffers plus explicit shapes and returns plain index
arrays.  The same payloads travel a framed binary protocol (served by
``python3 -m flowmatch.serve``) that a child-process client in any language
can speak over stdin/stdout.

Wire format, all integers little-endian:

    frame     := u32 payload_length, payload
    request   := u8 op, u32 n_preds, u32 n_targets, f64[n_preds*n_targets] cost,
                 (op 2 only) f64[n_preds*n_targets] quality, u8[n_targets] origins,
                 f64 alpha, f64 beta
    response  := u8 status,
                 status 0: u32 n_pairs, u32[n_pairs] pred_index,
                           u32[n_pairs] target_index, f64 total_cost
                 status 1: u32 message_length, utf-8 message bytes

Ops are 1 (assignment baseline) and 2 (quality-pruned flow matcher); origin
tags are 0 (old) and 1 (new).  Every request gets exactly one response;
failures come back as status-1 frames, the server never dies on bad input.
"""

from __future__ import annotations

import struct
import sys
from collections.abc import Sequence
from dataclasses import dataclass
from typing import BinaryIO

import numpy as np

from .cost import Origin
from .errors import (
    DimensionError,
    DomainError,
    FlowmatchError,
    MalformedInputError,
    ProtocolError,
    RemoteMatcherError,
)
from .hungarian import Matching, hungarian_match
from .qmcmf import PruneThresholds, q_mcmf_match

__all__ = [
    "OP_HUNGARIAN",
    "OP_QMCMF",
    "FlatMatchResult",
    "flat_hungarian",
    "flat_q_mcmf",
    "encode_hungarian_request",
    "encode_qmcmf_request",
    "decode_request",
    "encode_response",
    "encode_error",
    "decode_response",
    "read_frame",
    "write_frame",
    "serve",
    "main",
]

OP_HUNGARIAN = 1
OP_QMCMF = 2
_STATUS_OK = 0
_STATUS_ERROR = 1
_ORIGIN_TAGS = {0: Origin.OLD, 1: Origin.NEW}

_MAX_FRAME = 1 << 26  # 64 MiB guards against a garbage length prefix


@dataclass(frozen=True)
class FlatMatchResult:
    """Matching in boundary form: parallel index tuples plus the total."""

    pred_indices: tuple[int, ...]
    target_indices: tuple[int, ...]
    total_cost: float

    @classmethod
    def from_matching(cls, m: Matching) -> "FlatMatchResult":
        return cls(
            pred_indices=tuple(i for i, _ in m.pairs),
            target_indices=tuple(j for _, j in m.pairs),
            total_cost=m.total_cost,
        )


def _shape_counts(n_preds: int, n_targets: int) -> tuple[int, int]:
    for name, v in (("n_preds", n_preds), ("n_targets", n_targets)):
        if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
            raise MalformedInputError(f"{name} must be an int, got {v!r}")
        if v < 0:
            raise DomainError(f"{name} must be >= 0, got {v}")
    return int(n_preds), int(n_targets)


def _reshape(buffer: Sequence[float], n_preds: int, n_targets: int, name: str) -> np.ndarray:
    arr = np.asarray(buffer, dtype=np.float64)
    if arr.ndim != 1:
        raise DimensionError(f"{name} must be a flat buffer, got shape {arr.shape}")
    if arr.size != n_preds * n_targets:
        raise DimensionError(
            f"{name} holds {arr.size} values, expected {n_preds}*{n_targets}"
            f" = {n_preds * n_targets}"
        )
    return arr.reshape(n_preds, n_targets)


def _decode_origins(tags: Sequence[int], n_targets: int) -> list[Origin]:
    if len(tags) != n_targets:
        raise DimensionError(f"{len(tags)} origin tags for {n_targets} targets")
    out = []
    for k, t in enumerate(tags):
        t = int(t)
        if t not in _ORIGIN_TAGS:
            raise DomainError(f"origins[{k}] = {t} is not a valid tag (0 or 1)")
        out.append(_ORIGIN_TAGS[t])
    return out


def flat_hungarian(n_preds: int, n_targets: int, cost: Sequence[float]) -> FlatMatchResult:
    """Assignment baseline over a flat row-major cost buffer."""
    n_p, n_q = _shape_counts(n_preds, n_targets)
    return FlatMatchResult.from_matching(hungarian_match(_reshape(cost, n_p, n_q, "cost")))


def flat_q_mcmf(
    n_preds: int,
    n_targets: int,
    cost: Sequence[float],
    quality: Sequence[float],
    origins: Sequence[int],
    alpha: float = 0.7,
    beta: float = 0.5,
) -> FlatMatchResult:
    """Quality-pruned flow matcher over flat buffers and integer origin tags."""
    n_p, n_q = _shape_counts(n_preds, n_targets)
    matching = q_mcmf_match(
        _reshape(cost, n_p, n_q, "cost"),
        _reshape(quality, n_p, n_q, "quality"),
        _decode_origins(origins, n_q),
        PruneThresholds(alpha=alpha, beta=beta),
    )
    return FlatMatchResult.from_matching(matching)


def encode_hungarian_request(n_preds: int, n_targets: int, cost: Sequence[float]) -> bytes:
    """Payload bytes for an op-1 request (frame it before sending)."""
    n_p, n_q = _shape_counts(n_preds, n_targets)
    c = _reshape(cost, n_p, n_q, "cost")
    return struct.pack("<BII", OP_HUNGARIAN, n_p, n_q) + c.astype("<f8").tobytes()


def encode_qmcmf_request(
    n_preds: int,
    n_targets: int,
    cost: Sequence[float],
    quality: Sequence[float],
    origins: Sequence[int],
    alpha: float = 0.7,
    beta: float = 0.5,
) -> bytes:
    """Payload bytes for an op-2 request (frame it before sending)."""
    n_p, n_q = _shape_counts(n_preds, n_targets)
    c = _reshape(cost, n_p, n_q, "cost")
    q = _reshape(quality, n_p, n_q, "quality")
    tags = _decode_origins(origins, n_q)
    tag_bytes = bytes(0 if t is Origin.OLD else 1 for t in tags)
    return (
        struct.pack("<BII", OP_QMCMF, n_p, n_q)
        + c.astype("<f8").tobytes()
        + q.astype("<f8").tobytes()
        + tag_bytes
        + struct.pack("<dd", float(alpha), float(beta))
    )


class _Cursor:
    """Sequential reader over a request/response payload."""

    def __init__(self, payload: bytes):
        self.payload = payload
        self.offset = 0

    def take(self, count: int, what: str) -> bytes:
        if count < 0 or self.offset + count > len(self.payload):
            raise ProtocolError(
                f"payload too short reading {what}: need {count} bytes at offset "
                f"{self.offset} of {len(self.payload)}"
            )
        chunk = self.payload[self.offset : self.offset + count]
        self.offset += count
        return chunk

    def u8(self, what: str) -> int:
        return self.take(1, what)[0]

    def u32(self, what: str) -> int:
        return struct.unpack("<I", self.take(4, what))[0]

    def f64(self, what: str) -> float:
        return struct.unpack("<d", self.take(8, what))[0]

    def f64_array(self, count: int, what: str) -> np.ndarray:
        raw = self.take(8 * count, what)
        return np.frombuffer(raw, dtype="<f8").astype(np.float64)

    def u32_array(self, count: int, what: str) -> np.ndarray:
        raw = self.take(4 * count, what)
        return np.frombuffer(raw, dtype="<u4").astype(np.int64)

    def done(self) -> None:
        if self.offset != len(self.payload):
            raise ProtocolError(
                f"{len(self.payload) - self.offset} trailing bytes after payload"
            )


def decode_request(payload: bytes):
    """Parse a request payload into (op, kwargs for the flat function)."""
    cur = _Cursor(payload)
    op = cur.u8("op")
    if op not in (OP_HUNGARIAN, OP_QMCMF):
        raise ProtocolError(f"unknown op {op}")
    n_p = cur.u32("n_preds")
    n_q = cur.u32("n_targets")
    cost = cur.f64_array(n_p * n_q, "cost")
    if op == OP_HUNGARIAN:
        cur.done()
        return op, {"n_preds": n_p, "n_targets": n_q, "cost": cost}
    quality = cur.f64_array(n_p * n_q, "quality")
    tags = list(cur.take(n_q, "origins"))
    alpha = cur.f64("alpha")
    beta = cur.f64("beta")
    cur.done()
    return op, {
        "n_preds": n_p,
        "n_targets": n_q,
        "cost": cost,
        "quality": quality,
        "origins": tags,
        "alpha": alpha,
        "beta": beta,
    }


def encode_response(result: FlatMatchResult) -> bytes:
    preds = np.asarray(result.pred_indices, dtype="<u4")
    targets = np.asarray(result.target_indices, dtype="<u4")
    return (
        struct.pack("<BI", _STATUS_OK, len(result.pred_indices))
        + preds.tobytes()
        + targets.tobytes()
        + struct.pack("<d", result.total_cost)
    )


def encode_error(message: str) -> bytes:
    raw = message.encode("utf-8")
    return struct.pack("<BI", _STATUS_ERROR, len(raw)) + raw


def decode_response(payload: bytes) -> FlatMatchResult:
    """Parse a response payload; server-reported failures raise RemoteMatcherError."""
    cur = _Cursor(payload)
    status = cur.u8("status")
    if status == _STATUS_ERROR:
        length = cur.u32("message length")
        message = cur.take(length, "message").decode("utf-8", errors="replace")
        cur.done()
        raise RemoteMatcherError(message)
    if status != _STATUS_OK:
        raise ProtocolError(f"unknown response status {status}")
    n_pairs = cur.u32("n_pairs")
    preds = cur.u32_array(n_pairs, "pred indices")
    targets = cur.u32_array(n_pairs, "target indices")
    total = cur.f64("total cost")
    cur.done()
    return FlatMatchResult(
        pred_indices=tuple(int(i) for i in preds),
        target_indices=tuple(int(j) for j in targets),
        total_cost=total,
    )


def read_frame(stream: BinaryIO) -> bytes | None:
    """Read one length-prefixed frame; None on clean EOF at a boundary."""
    header = stream.read(4)
    if header == b"" or header is None:
        return None
    if len(header) < 4:
        raise ProtocolError("stream ended inside a frame header")
    (length,) = struct.unpack("<I", header)
    if length > _MAX_FRAME:
        raise ProtocolError(f"frame of {length} bytes exceeds the {_MAX_FRAME} cap")
    payload = b""
    while len(payload) < length:
        chunk = stream.read(length - len(payload))
        if not chunk:
            raise ProtocolError(
                f"stream ended {length - len(payload)} bytes into a frame"
            )
        payload += chunk
    return payload


def write_frame(stream: BinaryIO, payload: bytes) -> None:
    stream.write(struct.pack("<I", len(payload)) + payload)


def serve(stdin: BinaryIO, stdout: BinaryIO) -> int:
    """Answer framed requests until EOF.  Returns a process exit code.

    Anything the solvers reject comes back as an error frame and the loop
    keeps going; only an undecodable stream (truncation mid-frame) stops the
    server, because the frame boundary is lost at that point.
    """
    while True:
        try:
            payload = read_frame(stdin)
        except ProtocolError as exc:
            print(f"protocol error: {exc}", file=sys.stderr)
            return 1
        if payload is None:
            return 0
        try:
            op, kwargs = decode_request(payload)
            if op == OP_HUNGARIAN:
                result = flat_hungarian(**kwargs)
            else:
                result = flat_q_mcmf(**kwargs)
            response = encode_response(result)
        except FlowmatchError as exc:
            response = encode_error(str(exc))
        write_frame(stdout, response)
        stdout.flush()


def main(argv: Sequence[str] | None = None) -> int:
    return serve(sys.stdin.buffer, sys.stdout.buffer)
