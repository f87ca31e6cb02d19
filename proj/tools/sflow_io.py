"""Python side of the engine's file interfaces.

Covers the weight file (SVOW), the serialized observation blob (SVOB) and
the NDJSON episode log. Only numpy and the standard library are used so a
trainer can vendor this file as is.
"""

import gzip
import json
import struct

import numpy as np

WEIGHT_MAGIC = b"SVOW"
OBS_MAGIC = b"SVOB"
FORMAT_VERSION = 1
LOG_SCHEMA = 1


class FormatError(ValueError):
    pass


def crc32c(data: bytes) -> int:
    """Castagnoli CRC, reflected, computed bit by bit."""
    crc = 0xFFFFFFFF
    for byte in data:
        crc ^= byte
        for _ in range(8):
            crc = (crc >> 1) ^ 0x82F63B78 if crc & 1 else crc >> 1
    return crc ^ 0xFFFFFFFF


# ---------------------------------------------------------------- weights


def pack_weights(tensors):
    """tensors: sequence of (name, ndarray) in file order."""
    head = WEIGHT_MAGIC + struct.pack("<II", FORMAT_VERSION, len(tensors))
    body = b""
    for name, arr in tensors:
        raw = name.encode()
        head += struct.pack("<I", len(raw)) + raw + struct.pack("<II", 0, arr.ndim)
        head += struct.pack("<%dI" % arr.ndim, *arr.shape)
        body += np.ascontiguousarray(arr, dtype="<f4").tobytes()
    blob = head + body
    return blob + struct.pack("<I", crc32c(blob))


def unpack_weights(blob: bytes):
    if blob[:4] != WEIGHT_MAGIC:
        raise FormatError("bad magic")
    if len(blob) < 16:
        raise FormatError("truncated")
    (stored,) = struct.unpack_from("<I", blob, len(blob) - 4)
    if crc32c(blob[:-4]) != stored:
        raise FormatError("checksum mismatch")
    version, count = struct.unpack_from("<II", blob, 4)
    if version != FORMAT_VERSION:
        raise FormatError("unsupported version %d" % version)
    at = 12
    manifest = []
    for _ in range(count):
        (n,) = struct.unpack_from("<I", blob, at)
        name = blob[at + 4:at + 4 + n].decode()
        dtype, ndim = struct.unpack_from("<II", blob, at + 4 + n)
        if dtype != 0:
            raise FormatError("unsupported dtype in " + name)
        shape = struct.unpack_from("<%dI" % ndim, blob, at + 12 + n)
        manifest.append((name, tuple(shape)))
        at += 12 + n + 4 * ndim
    tensors = []
    for name, shape in manifest:
        size = int(np.prod(shape)) if shape else 1
        arr = np.frombuffer(blob, dtype="<f4", count=size, offset=at).reshape(shape)
        tensors.append((name, arr.copy()))
        at += 4 * size
    if at != len(blob) - 4:
        raise FormatError("payload size disagrees with manifest")
    return tensors


def meta(tensors):
    m = dict(tensors)["meta"]
    return {
        "input_width": int(m[0]),
        "heads": int(m[1]),
        "output": "action" if int(m[2]) == 0 else "svo",
        "v_max": float(m[3]),
        "sigma_max": float(m[4]),
    }


# ------------------------------------------------------------ observations


def pack_observation(width, query, dyn, static):
    """dyn / static: lists of (rows, width) and (rows, 5) arrays."""
    out = OBS_MAGIC + struct.pack("<IIIII", FORMAT_VERSION, width, query, len(dyn), len(static))
    out += b"".join(struct.pack("<I", len(p)) for p in dyn)
    out += b"".join(struct.pack("<I", len(p)) for p in static)
    for p in list(dyn) + list(static):
        out += np.asarray(p, dtype="<f4").tobytes()
    return out


def unpack_observation(blob: bytes):
    if blob[:4] != OBS_MAGIC:
        raise FormatError("bad magic")
    version, width, query, n_dyn, n_static = struct.unpack_from("<IIIII", blob, 4)
    if version != FORMAT_VERSION:
        raise FormatError("unsupported version %d" % version)
    counts = struct.unpack_from("<%dI" % (n_dyn + n_static), blob, 24)
    at = 24 + 4 * (n_dyn + n_static)
    polys = []
    for k, rows in enumerate(counts):
        w = width if k < n_dyn else 5
        polys.append(np.frombuffer(blob, dtype="<f4", count=rows * w, offset=at).reshape(rows, w).copy())
        at += 4 * rows * w
    if at != len(blob):
        raise FormatError("trailing bytes")
    return {"width": width, "query": query, "dynamic": polys[:n_dyn], "static": polys[n_dyn:]}


# ---------------------------------------------------------------- forward


def forward(tensors, obs):
    """Raw decoder outputs (before squashing), in float64."""
    t = {name: arr.astype(np.float64) for name, arr in tensors}
    heads = meta(tensors)["heads"]

    def layers(prefix):
        out, i = [], 0
        while "%s.%d.weight" % (prefix, i) in t:
            out.append((t["%s.%d.weight" % (prefix, i)], t["%s.%d.bias" % (prefix, i)]))
            i += 1
        return out

    def mlp(stack, x, relu_last):
        for k, (w, b) in enumerate(stack):
            x = w @ x + b
            if relu_last or k + 1 < len(stack):
                x = np.maximum(x, 0.0)
        return x

    def encode(prefix, poly):
        vec = layers(prefix + ".vector_mlp")
        pooled = np.zeros(vec[-1][0].shape[0])
        for row in poly.astype(np.float64):
            pooled += mlp(vec, row, True)
        return mlp(layers(prefix + ".post_mlp"), pooled, True)

    feats = [encode("dyn", p) for p in obs["dynamic"]] + [encode("static", p) for p in obs["static"]]
    x = np.stack(feats)
    q = t["mha.w_q"] @ x[obs["query"]] + t["mha.b_q"]
    k = x @ t["mha.w_k"].T + t["mha.b_k"]
    v = x @ t["mha.w_v"].T + t["mha.b_v"]
    dk = q.shape[0] // heads
    parts = []
    for h in range(heads):
        sl = slice(h * dk, (h + 1) * dk)
        s = k[:, sl] @ q[sl] / np.sqrt(dk)
        a = np.exp(s - s.max())
        a /= a.sum()
        parts.append(a @ v[:, sl])
    z = t["mha.w_o"] @ np.concatenate(parts) + t["mha.b_o"]
    return mlp(layers("decoder_mlp"), z, False)


def squash(tensors, raw):
    m = meta(tensors)
    if m["output"] == "action":
        return [0.5 * m["v_max"] * (1.0 + np.tanh(raw[0])), m["sigma_max"] * np.tanh(raw[1])]
    return [45.0 + 45.0 * np.tanh(raw[0])]


# ------------------------------------------------------------ episode logs


def read_episode_log(path):
    """Returns {"header": ..., "steps": [...], "footer": ...}; gzip by extension."""
    opener = gzip.open if str(path).endswith(".gz") else open
    header, steps, footer = None, [], None
    with opener(path, "rt", encoding="utf-8") as f:
        for line in f:
            if not line.strip():
                continue
            rec = json.loads(line)
            kind = rec.get("type")
            if kind == "header":
                if rec["schema"] != LOG_SCHEMA:
                    raise FormatError("unsupported log schema")
                header = rec
            elif kind == "step":
                steps.append(rec)
            elif kind == "footer":
                footer = rec
            else:
                raise FormatError("unknown record type %r" % kind)
    if header is None or footer is None:
        raise FormatError("log lacks a header or footer")
    return {"header": header, "steps": steps, "footer": footer}
