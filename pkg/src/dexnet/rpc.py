"""Enumerate pools of a Uniswap-V2-style factory over Ethereum JSON-RPC.

Only ``eth_call`` is used. The factory exposes ``allPairsLength()`` and
``allPairs(uint256)``; each pair contract exposes ``token0()`` and
``token1()``. Calls are sent as JSON-RPC batches of ``batch_size`` requests.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from itertools import count

import requests

from .core import Platform, TokenId, normalize_address
from .errors import DecodeError, RpcTransportError
from .ingest import Pool, PoolRegistry

log = logging.getLogger(__name__)

# keccak256(signature)[:4]
SELECTORS = {
    "allPairsLength()": "0x574f2ba3",
    "allPairs(uint256)": "0x1e3dd18b",
    "token0()": "0x0dfe1681",
    "token1()": "0xd21220a7",
}


def encode_call(signature: str, *uint_args: int) -> str:
    data = SELECTORS[signature]
    for arg in uint_args:
        if arg < 0:
            raise ValueError("uint256 argument must be non-negative")
        data += f"{arg:064x}"
    return data


def decode_uint256(call: str, result) -> int:
    if not isinstance(result, str) or not result.startswith("0x"):
        raise DecodeError(call, f"expected hex string, got {result!r}")
    body = result[2:]
    if len(body) < 64:
        raise DecodeError(call, f"truncated return data ({len(body) // 2} bytes, need 32)")
    try:
        return int(body[:64], 16)
    except ValueError:
        raise DecodeError(call, "return data is not hex") from None


def decode_address(call: str, result) -> str:
    word = decode_uint256(call, result)
    if word >> 160:
        raise DecodeError(call, "address word has non-zero high bytes")
    return normalize_address(f"{word:040x}")


class RpcClient:
    """Minimal batched JSON-RPC client with bounded exponential backoff."""

    def __init__(self, endpoint: str, *, retries: int = 4, backoff: float = 0.25,
                 timeout: float = 30.0, session: requests.Session | None = None):
        self.endpoint = endpoint
        self.retries = retries
        self.backoff = backoff
        self.timeout = timeout
        self.session = session or requests.Session()
        self._ids = count(1)

    def _post(self, payload):
        delay = self.backoff
        for attempt in range(self.retries + 1):
            try:
                resp = self.session.post(self.endpoint, json=payload, timeout=self.timeout)
                if resp.status_code >= 500 or resp.status_code == 429:
                    raise requests.HTTPError(f"HTTP {resp.status_code}")
                resp.raise_for_status()
                return resp.json()
            except (requests.ConnectionError, requests.Timeout, requests.HTTPError) as exc:
                if attempt == self.retries:
                    raise RpcTransportError(
                        f"{self.endpoint}: giving up after {attempt + 1} attempt(s): {exc}"
                    ) from exc
                log.warning("rpc attempt %d failed (%s); retrying in %.2fs",
                            attempt + 1, exc, delay)
                time.sleep(delay)
                delay *= 2
            except ValueError as exc:
                raise RpcTransportError(f"{self.endpoint}: response is not JSON") from exc

    def eth_call_batch(self, calls: list[tuple[str, str]], block="latest") -> list:
        """Run ``(to, data)`` calls in one batch; results are returned in input order."""
        if not calls:
            return []
        reqs = []
        for to, data in calls:
            reqs.append({"jsonrpc": "2.0", "id": next(self._ids), "method": "eth_call",
                         "params": [{"to": to, "data": data}, block]})
        reply = self._post(reqs if len(reqs) > 1 else reqs[0])
        if isinstance(reply, dict):
            reply = [reply]
        if not isinstance(reply, list):
            raise DecodeError("eth_call", "batch reply is not a list")
        by_id = {r.get("id"): r for r in reply if isinstance(r, dict)}
        out = []
        for req in reqs:
            r = by_id.get(req["id"])
            if r is None:
                raise DecodeError("eth_call", f"no reply for request id {req['id']}")
            if "error" in r:
                raise DecodeError("eth_call", f"node error {r['error']}")
            out.append(r.get("result"))
        return out

    def eth_call(self, to: str, data: str, block="latest"):
        return self.eth_call_batch([(to, data)], block)[0]


def _chunks(seq, size):
    for i in range(0, len(seq), size):
        yield seq[i:i + size]


def fetch_pool_registry(endpoint, factory: str, platform, *, batch_size: int = 100,
                        parallelism: int = 8, client: RpcClient | None = None,
                        **client_kw) -> PoolRegistry:
    """Enumerate every pair created by ``factory`` along with its two tokens."""
    platform = Platform(platform)
    factory = normalize_address(factory)
    client = client or RpcClient(endpoint, **client_kw)

    n_pairs = decode_uint256(
        "allPairsLength()", client.eth_call(factory, encode_call("allPairsLength()")))
    log.info("%s factory %s reports %d pair(s)", platform, factory, n_pairs)
    if n_pairs == 0:
        return PoolRegistry()

    def run(calls, decode, name):
        batches = list(_chunks(calls, batch_size))
        with ThreadPoolExecutor(max_workers=max(1, parallelism)) as pool:
            results = list(pool.map(client.eth_call_batch, batches))
        # pool.map preserves batch order, so merging is deterministic
        return [decode(name, r) for batch in results for r in batch]

    pair_calls = [(factory, encode_call("allPairs(uint256)", i)) for i in range(n_pairs)]
    pairs = run(pair_calls, decode_address, "allPairs(uint256)")

    token0 = run([(p, encode_call("token0()")) for p in pairs], decode_address, "token0()")
    token1 = run([(p, encode_call("token1()")) for p in pairs], decode_address, "token1()")

    registry = PoolRegistry()
    for addr, t0, t1 in zip(pairs, token0, token1):
        if t0 == t1:
            log.warning("pair %s reports identical tokens; skipped", addr)
            continue
        registry.add(Pool(addr, TokenId(t0), TokenId(t1), platform))
    return registry
