"""Paginated HTTP client for Etherscan-style account transaction APIs.

The whole pipeline runs from files alone; this client is only used when a
run explicitly asks for live address histories. Requests go through a
process-wide rate limiter, and transient failures (HTTP 429/5xx, connection
errors) retry with exponential backoff.
"""

from __future__ import annotations

import os
import threading
import time
from dataclasses import dataclass

import requests

from .graph import TransactionRecord

WEI_PER_ETH = 1e18
API_KEY_ENV = "TSGN_API_KEY"


class FetchError(RuntimeError):
    pass


class FetchAuthError(FetchError):
    pass


class FetchSchemaError(FetchError):
    pass


@dataclass
class ClientConfig:
    base_url: str
    api_key: str = ""
    rate_limit: float = 5.0  # requests per second, process-wide
    page_size: int = 100
    max_pages: int = 100
    timeout: float = 10.0
    max_retries: int = 5
    backoff_base: float = 0.5  # seconds; doubles per retry

    def resolved_key(self) -> str:
        return self.api_key or os.environ.get(API_KEY_ENV, "")


_rate_lock = threading.Lock()
_last_request = 0.0


def _throttle(rate_limit: float) -> None:
    global _last_request
    if rate_limit <= 0:
        return
    min_interval = 1.0 / rate_limit
    with _rate_lock:
        now = time.monotonic()
        wait = _last_request + min_interval - now
        if wait > 0:
            time.sleep(wait)
        _last_request = time.monotonic()


def _decode_item(item: dict) -> TransactionRecord:
    try:
        return TransactionRecord(
            src=str(item["from"]),
            dst=str(item["to"]),
            amount=int(item["value"]) / WEI_PER_ETH,
            timestamp=int(item["timeStamp"]),
            tx_hash=str(item.get("hash", "")),
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise FetchSchemaError(f"unexpected record shape: {exc}") from exc


def _get_page(address: str, page: int, cfg: ClientConfig) -> list:
    params = {
        "module": "account",
        "action": "txlist",
        "address": address,
        "page": page,
        "offset": cfg.page_size,
        "apikey": cfg.resolved_key(),
    }
    last_exc: Exception | None = None
    for attempt in range(cfg.max_retries + 1):
        if attempt:
            time.sleep(cfg.backoff_base * 2 ** (attempt - 1))
        _throttle(cfg.rate_limit)
        try:
            resp = requests.get(cfg.base_url, params=params, timeout=cfg.timeout)
        except requests.RequestException as exc:
            last_exc = exc
            continue
        if resp.status_code in (401, 403):
            raise FetchAuthError(f"authentication failed (HTTP {resp.status_code})")
        if resp.status_code == 429 or resp.status_code >= 500:
            last_exc = FetchError(f"HTTP {resp.status_code}")
            continue
        if resp.status_code != 200:
            raise FetchError(f"unexpected HTTP {resp.status_code}")
        try:
            payload = resp.json()
        except ValueError as exc:
            raise FetchSchemaError(f"response is not JSON: {exc}") from exc
        if not isinstance(payload, dict) or "result" not in payload:
            raise FetchSchemaError("response missing 'result'")
        message = str(payload.get("message", ""))
        if payload.get("status") == "0" and "invalid api key" in message.lower():
            raise FetchAuthError(message)
        result = payload["result"]
        if result is None or (isinstance(result, str) and "no transactions" in result.lower()):
            return []
        if not isinstance(result, list):
            raise FetchSchemaError(f"'result' is {type(result).__name__}, expected list")
        return result
    raise FetchError(f"persistent failure after {cfg.max_retries} retries: {last_exc}")


def fetch_address_history(address: str, cfg: ClientConfig) -> list[TransactionRecord]:
    """All transfers touching an address, paginated until an empty page."""
    records: list[TransactionRecord] = []
    for page in range(1, cfg.max_pages + 1):
        result = _get_page(address, page, cfg)
        if not result:
            break
        records.extend(_decode_item(item) for item in result)
        if len(result) < cfg.page_size:
            break
    return records
