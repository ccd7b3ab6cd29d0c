#!/usr/bin/env python3
"""Convert a citation-network .npz (CSR pieces attr_* / adj_* plus labels)
into the container layout read by `mghga --dataset`.

    python3 tools/convert_npz.py cora.npz data/cora --name cora --lcc
"""

import argparse
import json
import os
import sys

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components


def load_csr(z, prefix):
    return sp.csr_matrix(
        (z[prefix + "_data"], z[prefix + "_indices"], z[prefix + "_indptr"]),
        shape=tuple(z[prefix + "_shape"]),
    )


def largest_component(adj):
    _, comp = connected_components(adj, directed=False)
    sizes = np.bincount(comp)
    return np.flatnonzero(comp == np.argmax(sizes))


def write_atomic(path, text):
    tmp = path + ".tmp"
    with open(tmp, "w") as f:
        f.write(text)
    os.replace(tmp, path)


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("npz")
    ap.add_argument("out")
    ap.add_argument("--name", default="dataset")
    ap.add_argument("--lcc", action="store_true", help="keep the largest connected component of adj")
    args = ap.parse_args()

    z = np.load(args.npz, allow_pickle=True)
    if "attr_data" in z:
        x = load_csr(z, "attr").toarray().astype(np.float64)
    elif "features" in z:
        x = np.asarray(z["features"], dtype=np.float64)
    else:
        sys.exit("no attr_* or features array in " + args.npz)
    labels = np.asarray(z["labels"]).astype(np.int64)

    keep = np.arange(x.shape[0])
    if args.lcc:
        if "adj_data" not in z:
            sys.exit("--lcc needs adj_* arrays")
        keep = largest_component(load_csr(z, "adj"))
    x, labels = x[keep], labels[keep]
    _, labels = np.unique(labels, return_inverse=True)

    binary = bool(np.all((x == 0.0) | (x == 1.0)))
    os.makedirs(args.out, exist_ok=True)
    rows = [f"{x.shape[0]} {x.shape[1]} {'binary' if binary else 'float64'}"]
    for r in x:
        rows.append(" ".join(("1" if v else "0") if binary else repr(float(v)) for v in r))
    write_atomic(os.path.join(args.out, "features.txt"), "\n".join(rows) + "\n")
    write_atomic(os.path.join(args.out, "labels.txt"), "\n".join(str(int(v)) for v in labels) + "\n")
    manifest = {
        "name": args.name,
        "feature_files": ["features.txt"],
        "label_file": "labels.txt",
        "feature_mode": "discrete" if binary else "continuous",
        "n_nodes": int(x.shape[0]),
        "n_features": int(x.shape[1]),
        "n_classes": int(labels.max()) + 1,
        "preprocessing": "raw features" + (", largest connected component" if args.lcc else ""),
    }
    write_atomic(os.path.join(args.out, "manifest.json"), json.dumps(manifest, indent=2) + "\n")
    print(os.path.join(args.out, "manifest.json"))


if __name__ == "__main__":
    main()
