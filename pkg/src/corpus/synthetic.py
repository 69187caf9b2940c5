"""
Synthetic four-region corpus for benchmarks and demos.

Each view carries part of the label:

- vocabulary separates {northeast, midwest} from {south, west}
- posting hours separate {northeast, south} from {midwest, west}
- connected users mention same-region peers

so only a combination of views recovers all four regions. Turning a
signal off randomizes it instead of removing it.
"""

import json
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Dict, List, Sequence

import numpy as np

from ..models import SyntheticCorpusConfig, TweetRecord
from ..utils.logger import logger

# (label, latitude, longitude)
REGIONS = (
    ("northeast", 42.0, -73.0),
    ("midwest", 42.0, -89.0),
    ("south", 32.5, -87.0),
    ("west", 38.0, -120.0),
)
HOUR_CENTERS = (3, 15)
POOL_SIZE = 30
COORDINATE_JITTER_DEG = 0.5
_EPOCH = datetime(2010, 3, 1, tzinfo=timezone.utc)


def user_id(index: int) -> str:
    return f"u{index:04d}"


def word_pools() -> Dict[str, List[str]]:
    return {
        "group0": [f"g0w{k:02d}" for k in range(POOL_SIZE)],
        "group1": [f"g1w{k:02d}" for k in range(POOL_SIZE)],
        "common": [f"cw{k:02d}" for k in range(POOL_SIZE)],
    }


def _choose_peers(
    rng: np.random.Generator,
    connected: Sequence[int],
    region_of: Dict[int, int],
    cfg: SyntheticCorpusConfig
) -> Dict[int, List[int]]:
    peers = {}
    for u in connected:
        if cfg.mention_signal:
            pool = [v for v in connected if v != u and region_of[v] == region_of[u]]
        else:
            pool = [v for v in connected if v != u]
        k = min(cfg.peers, len(pool))
        peers[u] = sorted(int(v) for v in rng.choice(pool, size=k, replace=False)) if k else []
    return peers


def generate_corpus(cfg: SyntheticCorpusConfig) -> List[TweetRecord]:
    """
    Generate tweets for ``cfg.n_users`` users; user i lives in region i mod 4.

    Only each user's first tweet carries coordinates and a label.
    """
    rng = np.random.default_rng(cfg.seed)
    pools = word_pools()
    region_of = {i: i % len(REGIONS) for i in range(cfg.n_users)}

    n_connected = int(round(cfg.connected_fraction * cfg.n_users))
    connected = sorted(int(i) for i in rng.choice(cfg.n_users, size=n_connected, replace=False))
    peers = _choose_peers(rng, connected, region_of, cfg)

    records: List[TweetRecord] = []
    for i in range(cfg.n_users):
        region = region_of[i]
        label, lat, lon = REGIONS[region]
        group = region // 2 if cfg.text_signal else int(rng.integers(2))
        center = HOUR_CENTERS[region % 2] if cfg.hour_signal else HOUR_CENTERS[int(rng.integers(2))]
        regional = pools[f"group{group}"]

        n_tweets = int(rng.integers(cfg.min_tweets, cfg.max_tweets + 1))
        texts = []
        for _ in range(n_tweets):
            words = [
                regional[int(rng.integers(POOL_SIZE))] if rng.random() < cfg.regional_word_rate
                else pools["common"][int(rng.integers(POOL_SIZE))]
                for _ in range(cfg.words_per_tweet)
            ]
            texts.append(words)
        for peer in peers.get(i, []):
            texts[int(rng.integers(n_tweets))].insert(0, "@" + user_id(peer))

        for t, words in enumerate(texts):
            hour = (center + int(rng.integers(-1, 2))) % 24
            timestamp = _EPOCH + timedelta(days=t, hours=hour, minutes=int(rng.integers(60)))
            located = t == 0
            records.append(TweetRecord(
                user_id=user_id(i),
                text=" ".join(words),
                timestamp_utc=timestamp,
                latitude=float(lat + rng.normal(0, COORDINATE_JITTER_DEG)) if located else None,
                longitude=float(lon + rng.normal(0, COORDINATE_JITTER_DEG)) if located else None,
                label=label if located else None,
            ))

    logger.info(
        "corpus",
        "synthetic_corpus_generated",
        users=cfg.n_users,
        tweets=len(records),
        connected=n_connected,
        text_signal=cfg.text_signal,
        mention_signal=cfg.mention_signal,
        hour_signal=cfg.hour_signal
    )
    return records


def write_jsonl(records: Sequence[TweetRecord], path: Path) -> None:
    """One TweetRecord JSON object per line, timestamps as ISO-8601 with Z."""
    with open(path, "w", encoding="utf-8") as f:
        for r in records:
            payload = {
                "user_id": r.user_id,
                "text": r.text,
                "timestamp_utc": r.timestamp_utc.strftime("%Y-%m-%dT%H:%M:%SZ"),
                "latitude": r.latitude,
                "longitude": r.longitude,
                "label": r.label,
            }
            f.write(json.dumps(payload, sort_keys=True) + "\n")
