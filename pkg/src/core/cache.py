"""
Objective Memo Cache
LRU cache for objective values keyed by hashed array geometries
"""

import hashlib
from collections import OrderedDict
from typing import Any, Dict, Optional

import numpy as np


class CacheKey:
    """Generate cache keys"""

    @staticmethod
    def generate(prefix: str, *args, **kwargs) -> str:
        """Generate a unique key; numpy arrays contribute their raw bytes and shape"""
        digest = hashlib.md5(prefix.encode())
        for arg in args:
            if isinstance(arg, np.ndarray):
                digest.update(str(arg.shape).encode())
                digest.update(np.ascontiguousarray(arg).tobytes())
            else:
                digest.update(repr(arg).encode())
            digest.update(b"|")
        for k, v in sorted(kwargs.items()):
            digest.update(f"{k}:{v!r}|".encode())
        return f"{prefix}:{digest.hexdigest()}"


class InMemoryCache:
    """In-memory cache with LRU eviction"""

    def __init__(self, max_size: int = 4096):
        self.cache: "OrderedDict[str, Any]" = OrderedDict()
        self.max_size = max_size
        self.hit_count = 0
        self.miss_count = 0

    def get(self, key: str) -> Optional[Any]:
        if key in self.cache:
            self.cache.move_to_end(key)
            self.hit_count += 1
            return self.cache[key]
        self.miss_count += 1
        return None

    def set(self, key: str, value: Any):
        if self.max_size <= 0:
            return
        if len(self.cache) >= self.max_size and key not in self.cache:
            self.cache.popitem(last=False)
        self.cache[key] = value
        self.cache.move_to_end(key)

    def clear(self):
        self.cache.clear()
        self.hit_count = 0
        self.miss_count = 0

    def get_stats(self) -> Dict:
        """Get cache statistics"""
        total = self.hit_count + self.miss_count
        return {
            "size": len(self.cache),
            "max_size": self.max_size,
            "hit_count": self.hit_count,
            "miss_count": self.miss_count,
            "hit_rate": self.hit_count / total if total > 0 else 0,
        }
