"""Writes the recorded gain-provider transcript used by the protocol tests.

Scenario: 4x4 flat terrain, z_ceil 1, k = 2, first sensor at (0, 0),
epsilon 0. After the first sensor every cell is seen once (C1 = 0) and
never twice (C2 = sentinel = 1). The scripted reply ranks cells by their
row-major index, so the planner must pick (3, 3) and then stop.

Files come in pairs: NN.in is what the planner must send, NN.out is the
provider's reply.
"""

import json
import pathlib
import struct

out = pathlib.Path(__file__).parent / "transcript_flat4"
out.mkdir(exist_ok=True)


def line(obj):
    return (json.dumps(obj, separators=(",", ":")) + "\n").encode()


def floats(values):
    return struct.pack("<%df" % len(values), *values)


m, k = 4, 2
(out / "00.in").write_bytes(line({"proto": 1, "grid": [m, m], "k": k}))
(out / "00.out").write_bytes(line({"ok": True}))

obs = [0.0] * (m * m)
c1 = [0.0] * (m * m)
c2 = [1.0] * (m * m)
(out / "01.in").write_bytes(line({"id": 0, "channels": 1 + k}) + floats(obs + c1 + c2))
(out / "01.out").write_bytes(line({"id": 0}) + floats([float(n) for n in range(m * m)]))
