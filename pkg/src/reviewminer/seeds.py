import hashlib


def derive_seed(base: int, *parts) -> int:
    """Stable 64-bit seed from a base seed and any labels (stage name, grid coords)."""
    key = "/".join([str(int(base))] + [str(p) for p in parts]).encode("utf-8")
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "little")
