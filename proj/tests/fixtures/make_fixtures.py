"""Regenerates the golden NPY fixtures with numpy (the bridge's writer).

Run from this directory: python3 make_fixtures.py
"""
import io
import json

import numpy as np


def save(name, array):
    np.save(name, array.astype("<f4"), allow_pickle=False)


def header_bytes(shape):
    buf = io.BytesIO()
    np.lib.format.write_array_header_1_0(buf, {"descr": "<f4", "fortran_order": False, "shape": shape})
    return buf.getvalue()


save("golden_2x3.npy", np.array([[1, 2, 3], [4, 5, 6]]))

bridge = (np.arange(20, dtype=np.float64).reshape(4, 5) - 9.5) / 7.0
save("bridge_4x5.npy", bridge)
manifest = {
    "kind": "embeddings",
    "dim": 5,
    "created_from": [{"path": "corpus.txt", "digest": "sha256:" + "0" * 64}],
    "format_version": 1,
    "encoder": "fixture",
    "sample_indices": [0, 1, 2, 3],
}
with open("bridge_4x5.manifest.json", "w", encoding="utf-8") as f:
    json.dump(manifest, f, indent=2)
    f.write("\n")

for shape in [(1, 1), (10000, 1024), (160000, 59136), (3528, 13000)]:
    with open("header_%dx%d.bin" % shape, "wb") as f:
        f.write(header_bytes(shape))

# Asymmetric similarity triple: inputs, projected and replaced rows chosen so
# that every distance differs and swapping any two matrices changes the result.
inputs = np.array([[1, 0, 0], [0, 2, 0], [1, 1, 0]])
projected = np.array([[1, 1, 0], [0, 1, 1], [1, 1, 1]])
replaced = np.array([[0, 1, 0], [0, 0, 3], [1, 2, 2]])
save("sim_inputs.npy", inputs)
save("sim_projected.npy", projected)
save("sim_replaced.npy", replaced)
