"""Randomness sources: pseudo, remote quantum entropy services, QPU
measurement records, persisted pools, and deterministic mocks.

Every source ultimately feeds the same inverse-transform pipeline; what
varies is where the raw bits come from.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import httpx
import numpy as np

from .bits import (
    MANTISSA_BITS,
    BitBuffer,
    UniformBatch,
    bits_to_uniform,
    bytes_to_uniform_blocks,
    von_neumann_extract,
)
from .errors import (
    ConflictError,
    DomainError,
    EmptyInputError,
    EntropyExhaustedError,
    MalformedResponseError,
    NetworkError,
    NotFoundError,
    ProviderError,
    RecordFormatError,
    ValidationError,
)
from .gaussian import ZERO_REMAP, inverse_normal_cdf_array
from .pool import EntropyPool

KINDS = ("pseudo", "remote-http", "measurement-file", "pool", "mock")


@dataclass
class RandomSourceDescriptor:
    """Identity and configuration of a uniform-randomness provider."""

    id: str
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.id:
            raise ValidationError("source id must be non-empty")
        if self.kind not in KINDS:
            raise ValidationError(f"unknown source kind {self.kind!r}")
        p = self.params
        if self.kind == "mock":
            bias = float(p.get("p", 0.5))
            if not 0.0 <= bias <= 1.0:
                raise DomainError(f"mock bias p={bias} outside [0, 1]")
        elif self.kind == "remote-http" and not p.get("endpoint"):
            raise ValidationError("remote-http source needs an endpoint")
        elif self.kind == "measurement-file" and not p.get("path"):
            raise ValidationError("measurement-file source needs a path")
        elif self.kind == "pool" and not p.get("path"):
            raise ValidationError("pool source needs a path")


class SourceRegistry:
    """Id-keyed set of descriptors, optionally persisted to a JSON file."""

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path else None
        self._sources: dict[str, RandomSourceDescriptor] = {}
        if self.path and self.path.exists():
            for entry in json.loads(self.path.read_text()):
                desc = RandomSourceDescriptor(**entry)
                self._sources[desc.id] = desc

    def register(self, descriptor: RandomSourceDescriptor) -> str:
        if descriptor.id in self._sources:
            raise ConflictError(f"source {descriptor.id!r} already registered")
        self._sources[descriptor.id] = descriptor
        self._save()
        return descriptor.id

    def get(self, source_id: str) -> RandomSourceDescriptor:
        try:
            return self._sources[source_id]
        except KeyError:
            raise NotFoundError(f"unknown source {source_id!r}") from None

    def list(self) -> list[RandomSourceDescriptor]:
        return list(self._sources.values())

    def _save(self):
        if self.path:
            self.path.write_text(json.dumps(
                [vars(d) for d in self._sources.values()], indent=2))


# ---------------------------------------------------------------------------
# Bit-level sources


class MockBitSource:
    """Seeded Bernoulli(p) bit stream; same seed, same bits, forever."""

    def __init__(self, seed: int, bias_p: float = 0.5):
        if not 0.0 <= bias_p <= 1.0:
            raise DomainError(f"bias p={bias_p} outside [0, 1]")
        self.bias_p = bias_p
        self.origin = f"mock(seed={seed},p={bias_p})"
        self._rng = np.random.default_rng(seed)

    def take(self, n_bits: int) -> np.ndarray:
        return (self._rng.random(n_bits) < self.bias_p).astype(np.uint8)

    def take_bytes(self, n_bytes: int) -> bytes:
        return np.packbits(self.take(n_bytes * 8)).tobytes()


class FiniteBitSource:
    """Single-consumer view over a fixed bit buffer (e.g. ingested records)."""

    def __init__(self, buf: BitBuffer):
        self._bits = buf.bits
        self._pos = 0
        self.origin = buf.origin

    def take(self, n_bits: int) -> np.ndarray:
        chunk = self._bits[self._pos : self._pos + n_bits]
        self._pos += chunk.size
        return chunk

    def take_bytes(self, n_bytes: int) -> bytes:
        bits = self.take(n_bytes * 8)
        usable = (bits.size // 8) * 8
        return np.packbits(bits[:usable]).tobytes()


class PseudoByteSource:
    """Seeded PCG64 byte stream, used to fill pools without quantum hardware."""

    def __init__(self, seed: int):
        self.origin = f"pseudo(seed={seed})"
        self._rng = np.random.default_rng(seed)

    def take_bytes(self, n_bytes: int) -> bytes:
        return self._rng.bytes(n_bytes)

    def take(self, n_bits: int) -> np.ndarray:
        raw = np.frombuffer(self.take_bytes((n_bits + 7) // 8), dtype=np.uint8)
        return np.unpackbits(raw)[:n_bits]


# ---------------------------------------------------------------------------
# Remote HTTP entropy service

DEFAULT_WORDS_PER_CALL = 1024
DEFAULT_RETRIES = 3
DEFAULT_BACKOFF_S = 0.5


def fetch_remote(
    descriptor: RandomSourceDescriptor,
    count: int,
    client: httpx.Client | None = None,
    sleep=time.sleep,
) -> BitBuffer:
    """Fetch `count` 16-bit words from a remote entropy service as bits.

    Requests are batched at the configured per-call maximum; words are
    expanded MSB-first, preserving request order, so the result is always
    exactly 16 * count bits.
    """
    if descriptor.kind != "remote-http":
        raise ValidationError(f"source {descriptor.id!r} is not remote-http")
    if count < 1:
        raise ValidationError("word count must be >= 1")
    params = descriptor.params
    endpoint = params["endpoint"]
    per_call = int(params.get("words_per_call", DEFAULT_WORDS_PER_CALL))
    retries = int(params.get("max_retries", DEFAULT_RETRIES))
    backoff = float(params.get("backoff_s", DEFAULT_BACKOFF_S))
    headers = {}
    if params.get("api_key"):
        headers["x-api-key"] = params["api_key"]

    own_client = client is None
    if own_client:
        client = httpx.Client(timeout=30.0)
    words: list[np.ndarray] = []
    try:
        remaining = count
        while remaining > 0:
            batch = min(per_call, remaining)
            payload = _get_with_retries(
                client, endpoint,
                {"length": batch, "type": "uint16"},
                headers, retries, backoff, sleep,
            )
            if not isinstance(payload, dict) or "success" not in payload:
                raise MalformedResponseError("response missing success flag")
            if not payload["success"]:
                raise ProviderError(f"{endpoint} reported success=false")
            data = payload.get("data")
            if not isinstance(data, list) or len(data) != batch:
                got = len(data) if isinstance(data, list) else "no"
                raise MalformedResponseError(
                    f"expected {batch} words, got {got}")
            try:
                arr = np.asarray(data, dtype=np.int64)
            except (ValueError, TypeError, OverflowError) as exc:
                raise MalformedResponseError(f"non-integer word in data: {exc}") from exc
            if arr.size and (arr.min() < 0 or arr.max() > 0xFFFF):
                raise MalformedResponseError("word outside [0, 65535]")
            words.append(arr.astype(np.uint16))
            remaining -= batch
    finally:
        if own_client:
            client.close()
    packed = np.concatenate(words).astype(">u2").tobytes()
    return BitBuffer.from_bytes(packed, origin=f"remote:{descriptor.id}")


def _get_with_retries(client, endpoint, params, headers, retries, backoff, sleep):
    attempt = 0
    while True:
        try:
            resp = client.get(endpoint, params=params, headers=headers)
            resp.raise_for_status()
            return resp.json()
        except (httpx.TransportError, httpx.HTTPStatusError) as exc:
            attempt += 1
            if attempt > retries:
                raise NetworkError(str(exc), retries) from exc
            sleep(backoff * 2 ** (attempt - 1))
        except json.JSONDecodeError as exc:
            raise MalformedResponseError(f"invalid JSON from {endpoint}") from exc


class RemoteBitSource:
    """Adapter that pulls words from the remote service on demand."""

    def __init__(self, descriptor: RandomSourceDescriptor,
                 client: httpx.Client | None = None):
        self.descriptor = descriptor
        self.client = client
        self.origin = f"remote:{descriptor.id}"

    def take(self, n_bits: int) -> np.ndarray:
        n_words = (n_bits + 15) // 16
        return fetch_remote(self.descriptor, n_words, client=self.client).bits

    def take_bytes(self, n_bytes: int) -> bytes:
        n_words = (n_bytes + 1) // 2
        buf = fetch_remote(self.descriptor, n_words, client=self.client)
        return buf.to_bytes()[:n_bytes]


# ---------------------------------------------------------------------------
# QPU measurement records


@dataclass
class MeasurementRecordSet:
    shots: int
    bits_per_shot: int
    records: list[str]
    backend_label: str


def ingest_measurement_records(path: str | Path) -> MeasurementRecordSet:
    """Parse a measurement-record file: header then one bitstring per shot.

    Header: ``#shots=<n> bits=<k> backend=<label>``.
    """
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or not lines[0].strip():
        raise EmptyInputError(f"{path}: empty record file")
    header = lines[0]
    if not header.startswith("#"):
        raise RecordFormatError("missing '#shots=...' header", line=1)
    fields = {}
    for token in header.lstrip("#").split():
        key, _, value = token.partition("=")
        fields[key] = value
    try:
        shots = int(fields["shots"])
        bits_per_shot = int(fields["bits"])
        backend = fields.get("backend", "unknown")
    except (KeyError, ValueError) as exc:
        raise RecordFormatError(f"bad header: {exc}", line=1) from exc
    records = []
    for lineno, line in enumerate(lines[1:], start=2):
        line = line.strip()
        if not line:
            continue
        if len(line) != bits_per_shot or set(line) - {"0", "1"}:
            raise RecordFormatError(
                f"expected {bits_per_shot} binary digits, got {line!r}",
                line=lineno)
        records.append(line)
    if shots == 0 or not records:
        raise EmptyInputError(f"{path}: no measurement shots")
    if len(records) != shots:
        raise RecordFormatError(
            f"header claims {shots} shots but file has {len(records)}")
    return MeasurementRecordSet(
        shots=shots, bits_per_shot=bits_per_shot,
        records=records, backend_label=backend)


def records_to_bits(records: MeasurementRecordSet,
                    apply_extractor: bool = False) -> BitBuffer:
    """Concatenate shot bitstrings in order; optionally de-bias them."""
    joined = "".join(records.records)
    bits = np.frombuffer(joined.encode("ascii"), dtype=np.uint8) - ord("0")
    buf = BitBuffer(bits, origin=f"records:{records.backend_label}")
    if apply_extractor:
        buf = von_neumann_extract(buf)
    return buf


# ---------------------------------------------------------------------------
# Normal-variate adapters for the Monte Carlo engine


class PseudoNormalSource:
    """Seeded PCG64 uniforms pushed through the inverse normal CDF."""

    def __init__(self, seed: int):
        self.source_id = f"pseudo(seed={seed})"
        self._rng = np.random.default_rng(seed)
        self.variates_consumed = 0

    def draw(self, n: int) -> np.ndarray:
        u = self._rng.random(n)
        u[u == 0.0] = ZERO_REMAP
        self.variates_consumed += n
        return inverse_normal_cdf_array(u)


class PoolNormalSource:
    """Consumes a pool in 53-byte blocks (8 uniforms each), carrying spares."""

    def __init__(self, pool: EntropyPool):
        self.pool = pool
        self.source_id = f"pool:{pool.path.name}"
        self.variates_consumed = 0
        self._spare = np.empty(0, dtype=np.float64)

    def draw(self, n: int) -> np.ndarray:
        need = n - self._spare.size
        if need > 0:
            n_blocks = (need + 7) // 8
            try:
                raw = self.pool.read_raw(n_blocks * 53)
            except Exception as exc:
                raise EntropyExhaustedError(
                    self.variates_consumed,
                    f"pool exhausted after {self.variates_consumed} variates: {exc}",
                ) from exc
            u = bytes_to_uniform_blocks(raw, self.source_id).values
            u[u == 0.0] = ZERO_REMAP
            fresh = inverse_normal_cdf_array(u)
            out = np.concatenate([self._spare, fresh[:need]])
            self._spare = fresh[need:]
        else:
            out = self._spare[:n]
            self._spare = self._spare[n:]
        self.variates_consumed += n
        return out


class ExtractingBitSource:
    """Von Neumann de-biasing layered over any raw bit source."""

    def __init__(self, bit_source):
        self._src = bit_source
        self.origin = bit_source.origin + "+vn"
        self._surplus = np.empty(0, dtype=np.uint8)

    def take(self, n_bits: int) -> np.ndarray:
        chunks = [self._surplus]
        got = self._surplus.size
        while got < n_bits:
            # Expect one output bit per ~1/(2p(1-p)) raw bits; over-ask.
            raw = self._src.take(max(4 * (n_bits - got), 1024))
            if raw.size == 0:
                break
            extracted = von_neumann_extract(
                BitBuffer(raw, origin=self._src.origin)).bits
            chunks.append(extracted)
            got += extracted.size
        bits = np.concatenate(chunks)
        self._surplus = bits[n_bits:]
        return bits[:n_bits]


class BitStreamNormalSource:
    """Draws normals from any bit-level source, 53 bits per variate.

    Keeps a bit carry so results are independent of draw chunking. When
    `extract` is set the raw stream is Von Neumann de-biased first.
    """

    def __init__(self, bit_source, extract: bool = False):
        self._src = ExtractingBitSource(bit_source) if extract else bit_source
        self.source_id = self._src.origin
        self.variates_consumed = 0
        self._carry = np.empty(0, dtype=np.uint8)

    def draw(self, n: int) -> np.ndarray:
        need_bits = n * MANTISSA_BITS - self._carry.size
        fresh = self._src.take(need_bits) if need_bits > 0 else np.empty(0, np.uint8)
        bits = np.concatenate([self._carry, fresh])
        if bits.size < n * MANTISSA_BITS:
            raise EntropyExhaustedError(
                self.variates_consumed,
                f"bit stream exhausted after {self.variates_consumed} variates",
            )
        batch = bits_to_uniform(
            BitBuffer(bits[: n * MANTISSA_BITS], origin=self.source_id))
        self._carry = bits[n * MANTISSA_BITS :]
        u = batch.values
        u[u == 0.0] = ZERO_REMAP
        self.variates_consumed += n
        return inverse_normal_cdf_array(u)


def make_normal_source(descriptor: RandomSourceDescriptor,
                       client: httpx.Client | None = None):
    """Build the normal-variate adapter for any descriptor kind."""
    p = descriptor.params
    if descriptor.kind == "pseudo":
        return PseudoNormalSource(int(p.get("seed", 0)))
    if descriptor.kind == "pool":
        return PoolNormalSource(EntropyPool(p["path"]))
    if descriptor.kind == "mock":
        return BitStreamNormalSource(
            MockBitSource(int(p.get("seed", 0)), float(p.get("p", 0.5))),
            extract=_truthy(p.get("extract")))
    if descriptor.kind == "remote-http":
        return BitStreamNormalSource(RemoteBitSource(descriptor, client=client))
    if descriptor.kind == "measurement-file":
        records = ingest_measurement_records(p["path"])
        bits = records_to_bits(records, apply_extractor=_truthy(p.get("extract")))
        return BitStreamNormalSource(FiniteBitSource(bits))
    raise ValidationError(f"unsupported source kind {descriptor.kind!r}")


def make_bit_source(descriptor: RandomSourceDescriptor,
                    client: httpx.Client | None = None):
    """Build a raw bit/byte source (pool filling, validation sampling)."""
    p = descriptor.params
    if descriptor.kind == "pseudo":
        return PseudoByteSource(int(p.get("seed", 0)))
    if descriptor.kind == "mock":
        src = MockBitSource(int(p.get("seed", 0)), float(p.get("p", 0.5)))
        return ExtractingBitSource(src) if _truthy(p.get("extract")) else src
    if descriptor.kind == "remote-http":
        return RemoteBitSource(descriptor, client=client)
    if descriptor.kind == "measurement-file":
        records = ingest_measurement_records(p["path"])
        return FiniteBitSource(
            records_to_bits(records, apply_extractor=_truthy(p.get("extract"))))
    if descriptor.kind == "pool":
        pool = EntropyPool(p["path"])

        class _PoolBits:
            origin = f"pool:{pool.path.name}"

            def take(self, n_bits):
                return pool.read((n_bits + 7) // 8).bits[:n_bits]

            def take_bytes(self, n_bytes):
                return pool.read_raw(n_bytes)

        return _PoolBits()
    raise ValidationError(f"unsupported source kind {descriptor.kind!r}")


def draw_uniform_samples(descriptor: RandomSourceDescriptor, n_samples: int,
                         client: httpx.Client | None = None) -> UniformBatch:
    """Pull enough bits from a source to decode `n_samples` uniforms."""
    from .errors import InsufficientEntropyError

    need_bits = n_samples * MANTISSA_BITS
    src = make_bit_source(descriptor, client=client)
    bits = src.take(need_bits)
    if bits.size < need_bits:
        raise InsufficientEntropyError(need_bits, int(bits.size))
    return bits_to_uniform(BitBuffer(bits, origin=src.origin))


def _truthy(value) -> bool:
    return str(value).lower() in ("1", "true", "yes", "on")


def parse_source_spec(spec: str, source_id: str | None = None) -> RandomSourceDescriptor:
    """Parse an inline CLI source spec like ``pseudo:seed=42`` or ``pool:x.qpool``.

    Grammar: ``kind[:key=value[,key=value...]]``; a pool/measurement-file
    value without ``=`` is treated as the path.
    """
    kind, _, rest = spec.partition(":")
    params: dict = {}
    if rest:
        for item in rest.split(","):
            if "=" in item:
                key, _, value = item.partition("=")
                params[key] = value
            elif kind in ("pool", "measurement-file"):
                params["path"] = item
            elif kind == "remote-http":
                params["endpoint"] = item
            else:
                raise ValidationError(f"cannot parse source spec item {item!r}")
    return RandomSourceDescriptor(id=source_id or spec, kind=kind, params=params)
